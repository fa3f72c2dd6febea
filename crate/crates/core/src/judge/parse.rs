//! Extraction and validation of judge output.
//!
//! The judge is asked for a single JSON line, but real completions wrap it
//! in prose. The parser takes the first valid JSON object that contains
//! all three required keys. A required key holding a value of the wrong
//! type counts as missing. Scores must be integral (3.0 coerces to 3, 3.5
//! is rejected: rubric levels are discrete) and inside the dimension's
//! scale; confidence must be an integer in [0, 100].

use serde_json::Value;

use crate::dataset::Dimension;
use crate::error::{Error, Result};

/// Validated fields pulled from one judge completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPrediction {
    pub score: i64,
    pub reason: String,
    pub confidence: i64,
}

const REQUIRED_KEYS: [&str; 3] = ["score", "reason", "confidence"];

/// A numeric JSON value as i64, only when it is integral.
fn integral(value: &Value) -> Option<std::result::Result<i64, f64>> {
    match value {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Some(Ok(i))
            } else {
                n.as_f64().map(|f| {
                    if f.fract() == 0.0 {
                        Ok(f as i64)
                    } else {
                        Err(f)
                    }
                })
            }
        }
        _ => None,
    }
}

/// Parse one judge completion for `dimension`.
pub fn parse_prediction(raw: &str, dimension: Dimension) -> Result<ParsedPrediction> {
    let mut first_object: Option<serde_json::Map<String, Value>> = None;
    for (start, _) in raw.char_indices().filter(|&(_, c)| c == '{') {
        let mut stream = serde_json::Deserializer::from_str(&raw[start..]).into_iter::<Value>();
        let Some(Ok(Value::Object(object))) = stream.next() else {
            continue;
        };
        if REQUIRED_KEYS.iter().all(|k| object.contains_key(*k)) {
            return validate(&object, dimension);
        }
        first_object.get_or_insert(object);
    }
    match first_object {
        Some(object) => {
            let missing = REQUIRED_KEYS
                .into_iter()
                .find(|k| !object.contains_key(*k))
                .expect("object failed the all-keys check");
            Err(Error::MissingKey(missing))
        }
        None => Err(Error::NoJson),
    }
}

fn validate(
    object: &serde_json::Map<String, Value>,
    dimension: Dimension,
) -> Result<ParsedPrediction> {
    let score = match integral(&object["score"]) {
        None => return Err(Error::MissingKey("score")),
        Some(Err(f)) => return Err(Error::NonIntegralScore(f)),
        Some(Ok(i)) => i,
    };
    let (min, max) = dimension.scale();
    if score < min || score > max {
        return Err(Error::ScoreOutsideScale {
            dimension: dimension.to_string(),
            score: score as f64,
            min,
            max,
        });
    }
    let reason = match &object["reason"] {
        Value::String(s) => s.clone(),
        _ => return Err(Error::MissingKey("reason")),
    };
    let confidence = match integral(&object["confidence"]) {
        None => return Err(Error::MissingKey("confidence")),
        Some(Err(f)) => return Err(Error::InvalidConfidence(f)),
        Some(Ok(i)) => i,
    };
    if !(0..=100).contains(&confidence) {
        return Err(Error::InvalidConfidence(confidence as f64));
    }
    Ok(ParsedPrediction {
        score,
        reason,
        confidence,
    })
}
