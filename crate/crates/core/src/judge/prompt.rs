//! Deterministic prompt assembly.
//!
//! Sections are emitted in a fixed order: preamble, instruction (the
//! verbatim rubric for the target dimension), examples (omitted when there
//! are none), input, output format. Rendering the same target with the
//! same conditioning set and config twice yields byte-identical text.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conditioning::{ConditioningSet, TargetInstance};
use crate::dataset::{Corpus, Dimension, DimensionSpec, Idea, Patent};

/// Knobs for prompt rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    /// Budget, in characters, for a patent's abstract-plus-claims text.
    pub patent_char_budget: usize,
    /// Render each example's patent text, not just its idea.
    pub include_example_patents: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            patent_char_budget: 4000,
            include_example_patents: true,
        }
    }
}

/// One rendered few-shot example, keeping enough structure for offline
/// backends to inspect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedExample {
    pub idea_id: String,
    /// The example idea's full text (all four content fields).
    pub idea_text: String,
    pub score: i64,
    /// The block as it appears in the prompt.
    pub block: String,
}

/// A fully rendered prompt plus the structured facts it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub preamble: String,
    pub instruction: String,
    pub examples: Vec<RenderedExample>,
    pub input: String,
    pub output_contract: String,
    pub dimension: Dimension,
    /// The target idea's full text, for similarity-based offline backends.
    pub target_idea_text: String,
}

const PREAMBLE: &str =
    "You are given a pair consisting of a patent and a product idea based on that\n\
patent. Your task is to evaluate the idea following the given instruction.\n\
First, you will receive a detailed instruction. If the setting is few-shot,\n\
several examples of patents, ideas, and scores are also provided. Finally,\n\
you will be given a new patent and idea to evaluate.";

const OUTPUT_CONTRACT: &str = "Return a single line of valid JSON in this format:\n\
{\"score\": <number>,\n \"reason\": \"<brief reason>\",\n \"confidence\": <integer between 0 and 100>}";

/// Truncate to a character budget without splitting a code point.
fn truncate_chars(text: &str, budget: usize) -> &str {
    match text.char_indices().nth(budget) {
        Some((byte_idx, _)) => &text[..byte_idx],
        None => text,
    }
}

fn render_patent(patent: &Patent, config: &RenderConfig) -> String {
    let mut body = patent.abstract_text.clone();
    for claim in &patent.claims {
        body.push('\n');
        body.push_str(claim);
    }
    format!(
        "Patent: {}\n{}",
        patent.title,
        truncate_chars(&body, config.patent_char_budget)
    )
}

fn render_idea(idea: &Idea) -> String {
    format!(
        "Idea title: {}\nDescription: {}\nImplementation: {}\nDifferentiation: {}",
        idea.title, idea.description, idea.implementation, idea.differentiation
    )
}

fn render_instruction(spec: &DimensionSpec) -> String {
    let mut text = format!(
        "Evaluate the idea on the \"{}\" dimension.\n{}\nScore levels:\n",
        spec.id, spec.focus
    );
    for (score, level) in &spec.rubric_levels {
        text.push_str(&format!("{score}: {level}\n"));
    }
    if let Some(notes) = &spec.notes {
        text.push_str(notes);
        text.push('\n');
    }
    text.trim_end().to_string()
}

/// Render the judge prompt for one target under one conditioning set.
///
/// The corpus must be the one the target and conditioning set were built
/// from; lookups are infallible by construction.
pub fn render_prompt(
    corpus: &Corpus,
    target: &TargetInstance,
    conditioning: &ConditioningSet,
    spec: &DimensionSpec,
    config: &RenderConfig,
) -> PromptBundle {
    let examples = conditioning
        .examples
        .iter()
        .enumerate()
        .map(|(i, example)| {
            let idea = corpus.idea(&example.idea_id).expect("validated corpus");
            let patent = corpus.patent(&example.patent_id).expect("validated corpus");
            let mut block = format!("### Example {}\n", i + 1);
            if config.include_example_patents {
                block.push_str(&render_patent(patent, config));
                block.push('\n');
            }
            block.push_str(&render_idea(idea));
            block.push_str(&format!("\nScore: {}", example.score));
            RenderedExample {
                idea_id: example.idea_id.clone(),
                idea_text: idea.full_text(),
                score: example.score,
                block,
            }
        })
        .collect();

    let target_idea = corpus.idea(&target.idea_id).expect("validated corpus");
    let target_patent = corpus.patent(&target.patent_id).expect("validated corpus");
    let input = format!(
        "{}\n{}",
        render_patent(target_patent, config),
        render_idea(target_idea)
    );

    PromptBundle {
        preamble: PREAMBLE.to_string(),
        instruction: render_instruction(spec),
        examples,
        input,
        output_contract: OUTPUT_CONTRACT.to_string(),
        dimension: target.dimension,
        target_idea_text: target_idea.full_text(),
    }
}

impl PromptBundle {
    /// The complete prompt in section order. The Examples section is
    /// omitted entirely in the zero-shot setting.
    pub fn full_text(&self) -> String {
        let mut text = String::new();
        text.push_str(&self.preamble);
        text.push_str("\n\n## Instruction\n");
        text.push_str(&self.instruction);
        if !self.examples.is_empty() {
            text.push_str("\n\n## Examples\n");
            for example in &self.examples {
                text.push_str(&example.block);
                text.push('\n');
            }
        }
        text.push_str("\n## Input\n");
        text.push_str(&self.input);
        text.push_str("\n\n## Output format\n");
        text.push_str(&self.output_contract);
        text.push('\n');
        text
    }

    /// SHA-256 hex digest of the full prompt text.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.full_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
