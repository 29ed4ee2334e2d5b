use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::blocks::{
    block_histogram_suite, normality_deviation, BlockHistogram, Deviation, WindowMode,
};
use super::series::{digit_series, ns_ratio_series, NsRatioReport, SeriesReport, Statistic};
use crate::digits::{BitBuffer, BufferSource, SourceSpec};
use crate::{Result, JSON_SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub k: u32,
    pub mode: WindowMode,
    pub windows: u64,
    #[serde(flatten)]
    pub deviation: Deviation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<BTreeMap<String, u64>>,
}

impl HistogramReport {
    pub fn from_histogram(h: &BlockHistogram, with_counts: bool) -> Self {
        Self {
            k: h.k(),
            mode: h.mode(),
            windows: h.windows(),
            deviation: normality_deviation(h),
            counts: with_counts.then(|| h.labeled_counts()),
        }
    }

    pub fn count_of(&self, pattern: &str) -> Option<u64> {
        self.counts.as_ref()?.get(pattern).copied()
    }
}

/// Everything `analyze`/`report` emit for one stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub schema: u32,
    pub source: SourceSpec,
    pub digits: u64,
    pub series: Vec<SeriesReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns_ratio: Option<NsRatioReport>,
    pub blocks: Vec<HistogramReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub checkpoints: Vec<u64>,
    pub statistics: Vec<Statistic>,
    /// `n` values for the non-standard ratio; `None` skips it.
    pub ns_checkpoints: Option<Vec<u64>>,
    pub block_lengths: Vec<u32>,
    pub mode: WindowMode,
    pub include_counts: bool,
    /// Histogram workers, 0 for rayon's default.
    pub threads: usize,
    /// Significand of the true constant, for the proportion-based ns series.
    pub significand: Option<f64>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            checkpoints: Vec::new(),
            statistics: vec![
                Statistic::OnesRatio,
                Statistic::Angle,
                Statistic::NormRatio,
                Statistic::BalanceGap,
            ],
            ns_checkpoints: None,
            block_lengths: Vec::new(),
            mode: WindowMode::Overlapping,
            include_counts: true,
            threads: 0,
            significand: None,
        }
    }
}

pub fn analyze(
    bits: Arc<BitBuffer>,
    source: SourceSpec,
    opts: &AnalyzeOptions,
) -> Result<AnalysisBundle> {
    let label = source.label();
    let replay =
        || BufferSource::new(source.clone(), bits.clone()).with_significand(opts.significand);
    let popcount_stats: Vec<Statistic> = opts
        .statistics
        .iter()
        .copied()
        .filter(|s| s.is_popcount_based())
        .collect();
    let mut series = if popcount_stats.is_empty() || opts.checkpoints.is_empty() {
        Vec::new()
    } else {
        digit_series(&mut replay(), &opts.checkpoints, &popcount_stats)?
    };
    for s in &mut series {
        s.source = label.clone();
    }
    let ns_ratio = match &opts.ns_checkpoints {
        Some(ns) if !ns.is_empty() => {
            let mut r = ns_ratio_series(&mut replay(), ns)?;
            r.exact.source = label.clone();
            r.proportion.source = label.clone();
            Some(r)
        }
        _ => None,
    };
    let blocks = block_histogram_suite(
        &bits,
        opts.block_lengths.iter().copied(),
        opts.mode,
        opts.threads,
    )?
    .iter()
    .map(|h| HistogramReport::from_histogram(h, opts.include_counts))
    .collect();
    Ok(AnalysisBundle {
        schema: JSON_SCHEMA_VERSION,
        source,
        digits: bits.len() as u64,
        series,
        ns_ratio,
        blocks,
    })
}

impl AnalysisBundle {
    pub fn series(&self, stat: Statistic) -> Option<&SeriesReport> {
        self.series.iter().find(|s| s.statistic == stat)
    }

    pub fn histogram(&self, k: u32) -> Option<&HistogramReport> {
        self.blocks.iter().find(|h| h.k == k)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Long-format CSV: `record,statistic,n,pattern,value`.
    ///
    /// Series rows carry `(n, value)`; block rows carry the window count in
    /// `n` and one pattern count per row; deviation and limit rows summarize.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("record,statistic,n,pattern,value\n");
        let mut series_rows = |s: &SeriesReport| {
            for c in &s.checkpoints {
                let _ = writeln!(out, "series,{},{},,{}", s.statistic.name(), c.n, c.value);
            }
        };
        for s in &self.series {
            series_rows(s);
        }
        if let Some(ns) = &self.ns_ratio {
            series_rows(&ns.exact);
            series_rows(&ns.proportion);
            let _ = writeln!(out, "limit,ns_ratio_claimed,,,{}", ns.claimed_limit);
            let _ = writeln!(
                out,
                "limit,ns_ratio_exact_estimate,,,{}",
                ns.exact_limit_estimate
            );
        }
        for h in &self.blocks {
            let tag = format!("k{}_{}", h.k, h.mode);
            let _ = writeln!(
                out,
                "deviation,{tag}_max_abs_dev,{},,{}",
                h.windows, h.deviation.max_abs_dev
            );
            let _ = writeln!(
                out,
                "deviation,{tag}_chi_square,{},,{}",
                h.windows, h.deviation.chi_square
            );
            if let Some(counts) = &h.counts {
                for (p, c) in counts {
                    let _ = writeln!(out, "block,{tag},{},{p},{c}", h.windows);
                }
            }
        }
        out
    }
}
