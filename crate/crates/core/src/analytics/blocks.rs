use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::BitBuffer;
use crate::{Error, Result};

pub const MAX_BLOCK_LEN: u32 = 24;

/// How length-`k` windows are laid over the stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// Every start position: `n − k + 1` windows.
    #[default]
    Overlapping,
    /// Starts at multiples of `k`: `⌊n / k⌋` windows.
    Disjoint,
}

impl fmt::Display for WindowMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowMode::Overlapping => "overlapping",
            WindowMode::Disjoint => "disjoint",
        })
    }
}

/// Occurrence counts of every length-`k` bit pattern. Pattern `p` is indexed
/// by its value with the first stream bit most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockHistogram {
    k: u32,
    mode: WindowMode,
    counts: Vec<u64>,
    windows: u64,
}

impl BlockHistogram {
    fn empty(k: u32, mode: WindowMode) -> Self {
        Self {
            k,
            mode,
            counts: vec![0; 1 << k],
            windows: 0,
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn mode(&self) -> WindowMode {
        self.mode
    }

    pub fn windows(&self) -> u64 {
        self.windows
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, pattern: u32) -> u64 {
        self.counts[pattern as usize]
    }

    /// Count of a pattern written as a `'0'`/`'1'` string of length `k`.
    pub fn count_of(&self, pattern: &str) -> Option<u64> {
        if pattern.len() != self.k as usize {
            return None;
        }
        u32::from_str_radix(pattern, 2).ok().map(|p| self.count(p))
    }

    pub fn pattern_label(&self, pattern: u32) -> String {
        format!("{:0width$b}", pattern, width = self.k as usize)
    }

    /// `pattern → count` with `'0'`/`'1'` string keys.
    pub fn labeled_counts(&self) -> BTreeMap<String, u64> {
        (0..self.counts.len() as u32)
            .map(|p| (self.pattern_label(p), self.count(p)))
            .collect()
    }

    /// Adds the counts of a histogram over a disjoint set of windows.
    pub fn merge(&mut self, other: &BlockHistogram) {
        assert_eq!((self.k, self.mode), (other.k, other.mode));
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.windows += other.windows;
    }

    /// Folds each length-`k` pattern onto its leading `k − 1` bits.
    ///
    /// For overlapping windows this equals the direct `(k − 1)`-histogram
    /// except for the final window, which the `k`-histogram cannot see.
    pub fn marginalize(&self) -> Option<BlockHistogram> {
        if self.k < 2 {
            return None;
        }
        let mut out = BlockHistogram::empty(self.k - 1, self.mode);
        for (p, &c) in self.counts.iter().enumerate() {
            out.counts[p >> 1] += c;
        }
        out.windows = self.windows;
        Some(out)
    }
}

fn check_k(k: u32, n: usize) -> Result<()> {
    if k == 0 || k > MAX_BLOCK_LEN || k as usize > n {
        return Err(Error::InvalidBlockLength { k, available: n });
    }
    Ok(())
}

/// Counts windows starting in `start..end`; each window reads `k` bits, so
/// the scan touches `start..end + k − 1`.
fn count_range(
    bits: &BitBuffer,
    k: u32,
    mode: WindowMode,
    start: usize,
    end: usize,
) -> BlockHistogram {
    let mut h = BlockHistogram::empty(k, mode);
    if start >= end {
        return h;
    }
    let k = k as usize;
    let mask = (1u32 << k) - 1;
    match mode {
        WindowMode::Overlapping => {
            let bytes = bits.as_bytes();
            let stop = end + k - 1;
            let mut w = 0u32;
            let mut i = start;
            // Prime the window with the first k − 1 bits.
            while i < start + k - 1 {
                w = w << 1 | bits.get(i) as u32;
                i += 1;
            }
            while i < stop && !i.is_multiple_of(8) {
                w = (w << 1 | bits.get(i) as u32) & mask;
                h.counts[w as usize] += 1;
                i += 1;
            }
            while i + 8 <= stop {
                let byte = bytes[i / 8] as u32;
                for s in (0..8).rev() {
                    w = (w << 1 | (byte >> s & 1)) & mask;
                    h.counts[w as usize] += 1;
                }
                i += 8;
            }
            while i < stop {
                w = (w << 1 | bits.get(i) as u32) & mask;
                h.counts[w as usize] += 1;
                i += 1;
            }
            h.windows = (end - start) as u64;
        }
        WindowMode::Disjoint => {
            debug_assert!(start.is_multiple_of(k) && end.is_multiple_of(k));
            for s in (start..end).step_by(k) {
                let mut w = 0u32;
                for i in s..s + k {
                    w = w << 1 | bits.get(i) as u32;
                }
                h.counts[w as usize] += 1;
            }
            h.windows = ((end - start) / k) as u64;
        }
    }
    h
}

/// Window start positions `0..count` for the buffer and mode.
fn window_span(n: usize, k: u32, mode: WindowMode) -> usize {
    match mode {
        WindowMode::Overlapping => n - k as usize + 1,
        WindowMode::Disjoint => (n / k as usize) * k as usize,
    }
}

pub fn block_histogram(bits: &BitBuffer, k: u32, mode: WindowMode) -> Result<BlockHistogram> {
    check_k(k, bits.len())?;
    Ok(count_range(
        bits,
        k,
        mode,
        0,
        window_span(bits.len(), k, mode),
    ))
}

/// Approximate window starts per parallel chunk.
const CHUNK_WINDOWS: usize = 1 << 20;

/// [`block_histogram`] over chunks processed on the rayon pool. Each chunk
/// reads `k − 1` bits past its end, and the merge is a plain sum, so the
/// result is identical for any number of threads.
pub fn block_histogram_parallel(
    bits: &BitBuffer,
    k: u32,
    mode: WindowMode,
) -> Result<BlockHistogram> {
    check_k(k, bits.len())?;
    let span = window_span(bits.len(), k, mode);
    // Per-chunk tables for long blocks cost more than the scan saves.
    if k > 16 {
        return Ok(count_range(bits, k, mode, 0, span));
    }
    // Disjoint windows must not straddle chunk boundaries.
    let chunk = CHUNK_WINDOWS / k as usize * k as usize;
    Ok((0..span.div_ceil(chunk))
        .into_par_iter()
        .map(|c| count_range(bits, k, mode, c * chunk, ((c + 1) * chunk).min(span)))
        .reduce(
            || BlockHistogram::empty(k, mode),
            |mut a, b| {
                a.merge(&b);
                a
            },
        ))
}

/// Histograms for every `k` in `ks`, using `threads` workers (0 = rayon's
/// default).
pub fn block_histogram_suite(
    bits: &BitBuffer,
    ks: impl IntoIterator<Item = u32>,
    mode: WindowMode,
    threads: usize,
) -> Result<Vec<BlockHistogram>> {
    let ks: Vec<u32> = ks.into_iter().collect();
    for &k in &ks {
        check_k(k, bits.len())?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    pool.install(|| {
        ks.iter()
            .map(|&k| block_histogram_parallel(bits, k, mode))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    /// `max_p |count(p)/windows − 2^−k|`.
    pub max_abs_dev: f64,
    /// `Σ_p (count(p) − windows·2^−k)² / (windows·2^−k)`.
    pub chi_square: f64,
}

pub fn normality_deviation(h: &BlockHistogram) -> Deviation {
    let windows = h.windows as f64;
    let p = 2f64.powi(-(h.k as i32));
    let expected = windows * p;
    let mut max_abs_dev = 0.0f64;
    let mut chi_square = 0.0;
    for &c in &h.counts {
        let c = c as f64;
        max_abs_dev = max_abs_dev.max((c / windows - p).abs());
        chi_square += (c - expected) * (c - expected) / expected;
    }
    Deviation {
        max_abs_dev,
        chi_square,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct window-by-window count.
    fn naive(bits: &[u8], k: usize, mode: WindowMode) -> Vec<u64> {
        let mut counts = vec![0u64; 1 << k];
        let step = if mode == WindowMode::Overlapping {
            1
        } else {
            k
        };
        let mut s = 0;
        while s + k <= bits.len() {
            let p = bits[s..s + k]
                .iter()
                .fold(0usize, |a, &b| a << 1 | b as usize);
            counts[p] += 1;
            s += step;
        }
        counts
    }

    #[test]
    fn small_examples() {
        let b = BitBuffer::from_bits(&[1, 0, 1, 0, 1, 0]);
        let h = block_histogram(&b, 2, WindowMode::Overlapping).unwrap();
        assert_eq!(h.windows(), 5);
        assert_eq!(h.count_of("10"), Some(3));
        assert_eq!(h.count_of("01"), Some(2));
        assert_eq!(h.count_of("11"), Some(0));
        assert_eq!(h.count_of("00"), Some(0));

        let h = block_histogram(
            &BitBuffer::from_bits(&[1, 1, 1, 1]),
            1,
            WindowMode::Overlapping,
        )
        .unwrap();
        assert_eq!(h.counts(), &[0, 4]);

        let h = block_histogram(&b, 2, WindowMode::Disjoint).unwrap();
        assert_eq!(h.windows(), 3);
        assert_eq!(h.count_of("10"), Some(3));
    }

    #[test]
    fn bad_block_lengths() {
        let b = BitBuffer::from_bits(&[1, 0, 1]);
        assert!(block_histogram(&b, 4, WindowMode::Overlapping).is_err());
        assert!(block_histogram(&b, 0, WindowMode::Overlapping).is_err());
        let big = BitBuffer::from_bits(&[1; 40]);
        assert!(block_histogram(&big, 25, WindowMode::Overlapping).is_err());
    }

    #[test]
    fn deviation_examples() {
        let uniform = BlockHistogram {
            k: 2,
            mode: WindowMode::Overlapping,
            counts: vec![5; 4],
            windows: 20,
        };
        let d = normality_deviation(&uniform);
        assert_eq!((d.max_abs_dev, d.chi_square), (0.0, 0.0));

        // 1000 windows: "01" and "10" each 500, "00" and "11" absent.
        let third = crate::digits::rational_digits(1, 3, 1001).unwrap();
        let h = block_histogram(&third, 2, WindowMode::Overlapping).unwrap();
        assert_eq!(h.count_of("11"), Some(0));
        assert_eq!(normality_deviation(&h).max_abs_dev, 0.25);
    }

    #[test]
    fn marginal_differs_only_at_the_boundary() {
        let b = crate::digits::sqrt_digits(2, 5000).unwrap();
        for k in 2..=10 {
            let hk = block_histogram(&b, k, WindowMode::Overlapping).unwrap();
            let direct = block_histogram(&b, k - 1, WindowMode::Overlapping).unwrap();
            let folded = hk.marginalize().unwrap();
            let diff: u64 = folded
                .counts()
                .iter()
                .zip(direct.counts())
                .map(|(a, b)| a.abs_diff(*b))
                .sum();
            assert!(diff <= 1, "k = {k}");
            for (a, b) in folded.counts().iter().zip(direct.counts()) {
                assert!(a.abs_diff(*b) <= 1);
            }
        }
    }

    #[test]
    fn parallel_is_thread_count_independent() {
        let b = crate::digits::champernowne2_digits(3_000_000).unwrap();
        let one = block_histogram_suite(&b, 1..=8, WindowMode::Overlapping, 1).unwrap();
        let many = block_histogram_suite(&b, 1..=8, WindowMode::Overlapping, 4).unwrap();
        assert_eq!(one, many);
        for h in &one {
            assert_eq!(
                h,
                &block_histogram(&b, h.k(), WindowMode::Overlapping).unwrap()
            );
        }
        let d1 = block_histogram_suite(&b, [3, 7], WindowMode::Disjoint, 1).unwrap();
        let d3 = block_histogram_suite(&b, [3, 7], WindowMode::Disjoint, 3).unwrap();
        assert_eq!(d1, d3);
        assert_eq!(d1[0], block_histogram(&b, 3, WindowMode::Disjoint).unwrap());
    }

    proptest! {
        #[test]
        fn matches_naive_and_conserves(
            bits in proptest::collection::vec(0u8..2, 1..600),
            k in 1u32..10,
            split in 0usize..600,
        ) {
            prop_assume!(k as usize <= bits.len());
            let buf = BitBuffer::from_bits(&bits);
            for mode in [WindowMode::Overlapping, WindowMode::Disjoint] {
                let h = block_histogram(&buf, k, mode).unwrap();
                prop_assert_eq!(h.counts(), &naive(&bits, k as usize, mode)[..]);
                prop_assert_eq!(h.counts().iter().sum::<u64>(), h.windows());
                let expect = match mode {
                    WindowMode::Overlapping => bits.len() - k as usize + 1,
                    WindowMode::Disjoint => bits.len() / k as usize,
                };
                prop_assert_eq!(h.windows(), expect as u64);
            }
            // Two chunks with a (k−1)-bit overlap merge to the single pass.
            let span = bits.len() - k as usize + 1;
            let cut = split.min(span);
            let mut left = count_range(&buf, k, WindowMode::Overlapping, 0, cut);
            left.merge(&count_range(&buf, k, WindowMode::Overlapping, cut, span));
            prop_assert_eq!(left, block_histogram(&buf, k, WindowMode::Overlapping).unwrap());
        }
    }
}
