/// Streaming prime enumeration with a segmented sieve of Eratosthenes.
///
/// Segments double in length (up to [`MAX_SEGMENT`]) so no upper bound is
/// needed in advance; base primes are re-sieved whenever the next segment
/// reaches past their square.
#[derive(Debug, Clone)]
pub struct PrimeStream {
    base: Vec<u64>,
    base_limit: u64,
    lo: u64,
    seg_len: u64,
    segment: Vec<u64>,
    idx: usize,
}

const FIRST_SEGMENT: u64 = 1 << 12;
const MAX_SEGMENT: u64 = 1 << 20;

impl PrimeStream {
    pub fn new() -> Self {
        Self {
            base: Vec::new(),
            base_limit: 1,
            lo: 2,
            seg_len: FIRST_SEGMENT,
            segment: Vec::new(),
            idx: 0,
        }
    }

    fn sieve_next_segment(&mut self) {
        let lo = self.lo;
        let hi = lo + self.seg_len;
        let root = (hi as f64).sqrt() as u64 + 1;
        if root > self.base_limit {
            self.base_limit = root.max(2 * self.base_limit);
            self.base = simple_sieve(self.base_limit);
        }
        let mut composite = vec![false; (hi - lo) as usize];
        for &p in &self.base {
            if p * p >= hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            for m in (start..hi).step_by(p as usize) {
                composite[(m - lo) as usize] = true;
            }
        }
        self.segment.clear();
        self.segment.extend(
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| lo + i as u64),
        );
        self.idx = 0;
        self.lo = hi;
        self.seg_len = (self.seg_len * 2).min(MAX_SEGMENT);
    }
}

impl Default for PrimeStream {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        while self.idx == self.segment.len() {
            self.sieve_next_segment();
        }
        let p = self.segment[self.idx];
        self.idx += 1;
        Some(p)
    }
}

/// All primes `≤ limit`.
pub fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}
