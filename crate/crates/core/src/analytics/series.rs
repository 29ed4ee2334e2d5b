use serde::{Deserialize, Serialize};

use crate::digits::{BitBuffer, DigitSource};
use crate::vecrep::angle_from_counts;
use crate::{Error, Result};

/// Statistic carried by a [`SeriesReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `popcount(n) / n`.
    OnesRatio,
    /// `arccos(√(popcount / n))`, the angle to the all-ones vector.
    Angle,
    /// `‖[x]^(n)‖ / √(n/2)`.
    NormRatio,
    /// `|popcount − (n − popcount)| / n`.
    BalanceGap,
    /// `√x* / √(2^n / 2)`, exact up to the final conversion.
    NsRatio,
    /// The same ratio obtained from the linear proportion
    /// `(2^n − 1) : X = √(2^n − 1) : ‖·‖` with `X` the true value.
    NsProportion,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::OnesRatio => "ones_ratio",
            Statistic::Angle => "angle",
            Statistic::NormRatio => "norm_ratio",
            Statistic::BalanceGap => "balance_gap",
            Statistic::NsRatio => "ns_ratio",
            Statistic::NsProportion => "ns_proportion",
        }
    }

    /// Parses the CLI spelling; `ones`, `norm`, `balance` and `ns` are
    /// accepted as short forms.
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ones" | "ones_ratio" => Statistic::OnesRatio,
            "angle" => Statistic::Angle,
            "norm" | "norm_ratio" => Statistic::NormRatio,
            "balance" | "balance_gap" => Statistic::BalanceGap,
            "ns" | "ns_ratio" => Statistic::NsRatio,
            "ns_proportion" => Statistic::NsProportion,
            _ => return None,
        })
    }

    fn evaluate(self, ones: u64, n: u64) -> Option<f64> {
        let ratio = ones as f64 / n as f64;
        match self {
            Statistic::OnesRatio => Some(ratio),
            Statistic::Angle => angle_from_counts(ones, n).ok(),
            Statistic::NormRatio => Some((2.0 * ratio).sqrt()),
            Statistic::BalanceGap => Some((2 * ones).abs_diff(n) as f64 / n as f64),
            Statistic::NsRatio | Statistic::NsProportion => None,
        }
    }

    /// Whether the statistic depends only on the prefix popcount.
    pub fn is_popcount_based(self) -> bool {
        !matches!(self, Statistic::NsRatio | Statistic::NsProportion)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    pub value: f64,
}

/// Least-squares slope of value against `log10 n` over the last decade of
/// checkpoints, plus the spread of values there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDiagnostics {
    pub from_n: u64,
    pub points: usize,
    pub slope: f64,
    pub amplitude: f64,
    pub last: f64,
}

/// A checkpointed sequence of one statistic over growing prefixes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub statistic: Statistic,
    pub source: String,
    pub checkpoints: Vec<Checkpoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub tail: Option<TailDiagnostics>,
}

impl SeriesReport {
    pub fn new(statistic: Statistic, source: impl Into<String>) -> Self {
        Self {
            statistic,
            source: source.into(),
            checkpoints: Vec::new(),
            notes: Vec::new(),
            tail: None,
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.checkpoints.iter().map(|c| c.value)
    }

    pub fn value_at(&self, n: u64) -> Option<f64> {
        self.checkpoints.iter().find(|c| c.n == n).map(|c| c.value)
    }

    pub fn last(&self) -> Option<Checkpoint> {
        self.checkpoints.last().copied()
    }

    fn push(&mut self, n: u64, value: f64) {
        debug_assert!(value.is_finite());
        debug_assert!(self.checkpoints.last().is_none_or(|c| c.n < n));
        self.checkpoints.push(Checkpoint { n, value });
    }

    fn finish(mut self) -> Self {
        self.tail = tail_diagnostics(&self.checkpoints);
        self
    }
}

pub fn tail_diagnostics(points: &[Checkpoint]) -> Option<TailDiagnostics> {
    let last = points.last()?;
    let from_n = (last.n / 10).max(1);
    let tail: Vec<&Checkpoint> = points.iter().filter(|c| c.n >= from_n).collect();
    if tail.len() < 2 {
        return None;
    }
    let k = tail.len() as f64;
    let xs: Vec<f64> = tail.iter().map(|c| (c.n as f64).log10()).collect();
    let mean_x = xs.iter().sum::<f64>() / k;
    let mean_y = tail.iter().map(|c| c.value).sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, c) in xs.iter().zip(&tail) {
        sxy += (x - mean_x) * (c.value - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c.value), hi.max(c.value))
        });
    Some(TailDiagnostics {
        from_n: tail[0].n,
        points: tail.len(),
        slope: if sxx > 0.0 { sxy / sxx } else { 0.0 },
        amplitude: hi - lo,
        last: last.value,
    })
}

pub(crate) fn validate_checkpoints(checkpoints: &[u64]) -> Result<()> {
    if checkpoints.first().is_some_and(|&n| n == 0) || checkpoints.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidCheckpoints);
    }
    Ok(())
}

const SCAN_CHUNK: usize = 1 << 16;

/// Popcount of the prefix at each checkpoint, reading the source once in
/// fixed-size chunks. Digits are counted from the source's current position.
pub fn prefix_popcounts(source: &mut dyn DigitSource, checkpoints: &[u64]) -> Result<Vec<u64>> {
    validate_checkpoints(checkpoints)?;
    let start = source.position();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut read = 0u64;
    let mut ones = 0u64;
    let mut chunk = BitBuffer::with_capacity(SCAN_CHUNK);
    for &target in checkpoints {
        while read < target {
            let want = ((target - read) as usize).min(SCAN_CHUNK);
            chunk.truncate(0);
            let got = source.read_into(want, &mut chunk)?;
            ones += chunk.count_ones() as u64;
            read += got as u64;
            if got < want {
                return Err(Error::InsufficientDigits {
                    required: start + target as usize,
                    available: start + read as usize,
                });
            }
        }
        out.push(ones);
    }
    Ok(out)
}

/// Several popcount statistics from a single pass over the source.
pub fn digit_series(
    source: &mut dyn DigitSource,
    checkpoints: &[u64],
    statistics: &[Statistic],
) -> Result<Vec<SeriesReport>> {
    if let Some(s) = statistics.iter().find(|s| !s.is_popcount_based()) {
        return Err(Error::InvalidConfig(format!(
            "{} is not a popcount statistic; use ns_ratio_series",
            s.name()
        )));
    }
    let label = source.spec().label();
    let counts = prefix_popcounts(source, checkpoints)?;
    Ok(statistics
        .iter()
        .map(|&stat| series_from_counts(stat, &label, checkpoints, &counts))
        .collect())
}

pub(crate) fn series_from_counts(
    stat: Statistic,
    label: &str,
    checkpoints: &[u64],
    counts: &[u64],
) -> SeriesReport {
    let mut report = SeriesReport::new(stat, label);
    for (&n, &ones) in checkpoints.iter().zip(counts) {
        match stat.evaluate(ones, n) {
            Some(v) => report.push(n, v),
            None => report.notes.push(format!(
                "n = {n}: zero prefix, angle undefined; value omitted"
            )),
        }
    }
    report.finish()
}

fn single(
    stat: Statistic,
    source: &mut dyn DigitSource,
    checkpoints: &[u64],
) -> Result<SeriesReport> {
    Ok(digit_series(source, checkpoints, &[stat])?.remove(0))
}

pub fn ones_ratio_series(
    source: &mut dyn DigitSource,
    checkpoints: &[u64],
) -> Result<SeriesReport> {
    single(Statistic::OnesRatio, source, checkpoints)
}

pub fn angle_series(source: &mut dyn DigitSource, checkpoints: &[u64]) -> Result<SeriesReport> {
    single(Statistic::Angle, source, checkpoints)
}

pub fn norm_ratio_series(
    source: &mut dyn DigitSource,
    checkpoints: &[u64],
) -> Result<SeriesReport> {
    single(Statistic::NormRatio, source, checkpoints)
}

pub fn balance_gap_series(
    source: &mut dyn DigitSource,
    checkpoints: &[u64],
) -> Result<SeriesReport> {
    single(Statistic::BalanceGap, source, checkpoints)
}

/// Largest `n` accepted by [`ns_ratio_series`].
pub const NS_RATIO_MAX_N: u64 = 1 << 16;

/// The non-standard norm ratio computed two ways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsRatioReport {
    /// `√(x*/2^(n−1))` from the exact representative.
    pub exact: SeriesReport,
    /// `X·√(2^n−1)/(2^n−1)/√(2^n/2)`, with `X = s·2^(n−1)` and `s` the
    /// constant's significand.
    pub proportion: SeriesReport,
    /// Where the proportion argument says the ratio should go.
    pub claimed_limit: f64,
    /// Where the exact series is heading: `√s` for significand `s`.
    pub exact_limit_estimate: f64,
}

/// `√(x*(n) / 2^(n−1))` for each `n`, with `x*(n)` the `n`-digit prefix read as
/// an integer, alongside the proportion-derived value.
pub fn ns_ratio_series(source: &mut dyn DigitSource, ns: &[u64]) -> Result<NsRatioReport> {
    validate_checkpoints(ns)?;
    let max_n = ns.last().copied().unwrap_or(0);
    if max_n > NS_RATIO_MAX_N {
        return Err(Error::InvalidConfig(format!(
            "ns ratio limited to n <= {NS_RATIO_MAX_N}, got {max_n}"
        )));
    }
    let label = source.spec().label();
    let hint = source.significand();
    let prefix = source.take(max_n as usize)?;
    let mut exact = SeriesReport::new(Statistic::NsRatio, &label);
    let mut proportion = SeriesReport::new(Statistic::NsProportion, &label);
    for &n in ns {
        let significand = prefix_significand(&prefix, n as usize);
        exact.push(n, sqrt_scaled_ratio(&prefix, n as usize));
        let s = hint.unwrap_or(significand);
        // 2^(n−1) / (2^n − 1) = 1 / (2 − 2^(1−n))
        let share = 1.0 / (2.0 - 2f64.powi(1 - n as i32));
        proportion.push(n, s * share.sqrt());
    }
    if hint.is_none() {
        proportion
            .notes
            .push("true value unknown; X estimated by x*".into());
    }
    let s = hint.unwrap_or_else(|| prefix_significand(&prefix, max_n as usize));
    Ok(NsRatioReport {
        exact: exact.finish(),
        proportion: proportion.finish(),
        claimed_limit: 1.0,
        exact_limit_estimate: s.sqrt(),
    })
}

/// The top bits of an `n`-bit prefix as `(mantissa, exponent)`, where
/// `x* = mantissa · 2^exponent` exactly when `n ≤ 64` and to 64 bits
/// otherwise.
fn top_bits(prefix: &BitBuffer, n: usize) -> (u64, i64) {
    let take = n.min(64);
    let mut m = 0u64;
    for i in 0..take {
        m = m << 1 | prefix.get(i) as u64;
    }
    (m, (n - take) as i64)
}

/// `x* / 2^(n−1)` as a double.
fn prefix_significand(prefix: &BitBuffer, n: usize) -> f64 {
    let (m, e) = top_bits(prefix, n);
    m as f64 * 2f64.powi((e - (n as i64 - 1)) as i32)
}

/// `√(x* / 2^(n−1))`, with the power of two halved in integer form before
/// the single floating-point square root.
fn sqrt_scaled_ratio(prefix: &BitBuffer, n: usize) -> f64 {
    let (m, e) = top_bits(prefix, n);
    if m == 0 {
        return 0.0;
    }
    // x*/2^(n-1) = m · 2^k with k = e − (n − 1) ≤ 0.
    let k = e - (n as i64 - 1);
    let lz = m.leading_zeros() as i64;
    // m = mant · 2^(63 − lz) with mant ∈ [1, 2).
    let mant = (m as f64) / 2f64.powi((63 - lz) as i32);
    let mut exp = k + 63 - lz;
    let mut mant = mant;
    if exp.rem_euclid(2) == 1 {
        mant *= 2.0;
        exp -= 1;
    }
    mant.sqrt() * 2f64.powi((exp / 2) as i32)
}

/// Checkpoint presets: `log2` gives `1, 2, 4, …` up to `max_n`; `linear:m`
/// gives `m` evenly spaced values ending at `max_n`; otherwise a
/// comma-separated list.
pub fn parse_checkpoints(spec: &str, max_n: u64) -> Result<Vec<u64>> {
    let cps: Vec<u64> = if spec == "log2" {
        std::iter::successors(Some(1u64), |&n| n.checked_mul(2))
            .take_while(|&n| n <= max_n)
            .collect()
    } else if let Some(m) = spec.strip_prefix("linear:") {
        let m: u64 = m
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad linear count `{m}`")))?;
        if m == 0 || m > max_n {
            return Err(Error::InvalidConfig(format!(
                "linear:{m} needs 1 <= m <= {max_n}"
            )));
        }
        let mut v: Vec<u64> = (1..=m).map(|i| max_n * i / m).collect();
        v.dedup();
        v
    } else {
        spec.split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad checkpoint `{t}`")))
            })
            .collect::<Result<_>>()?
    };
    validate_checkpoints(&cps)?;
    if cps.is_empty() {
        return Err(Error::InvalidCheckpoints);
    }
    Ok(cps)
}
