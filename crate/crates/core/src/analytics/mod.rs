//! Statistics over digit prefixes.
//!
//! Popcount statistics (ones ratio, angle to the all-ones vector, norm ratio,
//! balance gap) are accumulated in one streaming pass and reported at
//! checkpoints. The non-standard norm ratio needs the exact representative
//! and is computed separately for moderate `n`. Block histograms count every
//! length-`k` pattern, optionally across threads.

mod blocks;
mod report;
mod series;

pub use blocks::{
    block_histogram, block_histogram_parallel, block_histogram_suite, normality_deviation,
    BlockHistogram, Deviation, WindowMode, MAX_BLOCK_LEN,
};
pub use report::{analyze, AnalysisBundle, AnalyzeOptions, HistogramReport};
pub use series::{
    angle_series, balance_gap_series, digit_series, norm_ratio_series, ns_ratio_series,
    ones_ratio_series, parse_checkpoints, prefix_popcounts, tail_diagnostics, Checkpoint,
    NsRatioReport, SeriesReport, Statistic, TailDiagnostics, NS_RATIO_MAX_N,
};
