//! Reliability and selection-overlap statistics: Krippendorff's α over
//! incomplete rating matrices, above-median Jaccard with a minimum-overlap
//! rule, top-half ranking overlap, Pearson correlation, and cosine
//! similarity. All operations are pure functions over immutable inputs.

mod correlation;
mod krippendorff;
mod matrix;
mod overlap;

pub use correlation::{cosine_similarity, pearson_r};
pub use krippendorff::{krippendorff_alpha, AgreementReport, DistanceMetric};
pub use matrix::RatingMatrix;
pub use overlap::{
    above_median_set, jaccard_similarity, pairwise_jaccard, top_half_overlap, ExcludedPair,
    JaccardReport, MedianStrictness, OwnerSelections, PairJaccard, SelectionSet,
};
