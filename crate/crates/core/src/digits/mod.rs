//! Binary digit streams of constants.
//!
//! Every source starts at the most significant 1 of its constant, so the
//! position of the binary point never matters: `x` and `2^p·x` emit the same
//! digits. Leading zeros, when wanted, are added explicitly by
//! [`crate::vecrep::prefix_vector`].

mod bits;
mod format;
mod isqrt;
mod primes;

use std::path::PathBuf;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use bits::BitBuffer;
pub use format::{
    read_bits, read_bits_file, read_sidecar, sidecar_path, write_bits, write_bits_file,
    write_sidecar, Sidecar, HEADER_LEN, MAGIC, VERSION,
};
pub use isqrt::{isqrt, isqrt_scaled, InvSqrt};
pub use primes::{simple_sieve, PrimeStream};

use crate::{Error, Result};

/// A stateful generator of successive binary digits.
///
/// Sources are sequential: one caller at a time, but they can be moved
/// between threads between calls.
pub trait DigitSource: Send {
    /// What this source generates.
    fn spec(&self) -> SourceSpec;

    /// Digits emitted so far.
    fn position(&self) -> usize;

    /// Appends up to `count` further digits to `out` and returns how many were
    /// appended. Only finite sources (files) return fewer than `count`.
    fn read_into(&mut self, count: usize, out: &mut BitBuffer) -> Result<usize>;

    /// The constant divided by the power of two that puts it in `[1, 2)`,
    /// when known independently of the digits.
    fn significand(&self) -> Option<f64> {
        None
    }

    /// The next `count` digits, or an error if the source runs dry.
    fn take(&mut self, count: usize) -> Result<BitBuffer> {
        let mut out = BitBuffer::with_capacity(count);
        let got = self.read_into(count, &mut out)?;
        if got < count {
            return Err(Error::InsufficientDigits {
                required: self.position() - got + count,
                available: self.position(),
            });
        }
        Ok(out)
    }
}

/// Description of a digit source; also the sidecar `kind`/`parameters`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Sqrt { m: u64 },
    Rational { p: u64, q: u64 },
    Champernowne2,
    CopelandErdos2,
    File { path: PathBuf },
    ConstantOnes,
    Alternating,
}

impl SourceSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SourceSpec::Sqrt { .. } => "sqrt",
            SourceSpec::Rational { .. } => "rational",
            SourceSpec::Champernowne2 => "champernowne2",
            SourceSpec::CopelandErdos2 => "copeland_erdos2",
            SourceSpec::File { .. } => "file",
            SourceSpec::ConstantOnes => "constant_ones",
            SourceSpec::Alternating => "alternating",
        }
    }

    pub fn parameters(&self) -> serde_json::Value {
        match self {
            SourceSpec::Sqrt { m } => json!({ "m": m }),
            SourceSpec::Rational { p, q } => json!({ "p": p, "q": q }),
            SourceSpec::File { path } => json!({ "path": path }),
            _ => json!({}),
        }
    }

    /// Short human-readable name, e.g. `sqrt(2)` or `rational(1/3)`.
    pub fn label(&self) -> String {
        match self {
            SourceSpec::Sqrt { m } => format!("sqrt({m})"),
            SourceSpec::Rational { p, q } => format!("rational({p}/{q})"),
            SourceSpec::File { path } => format!("file({})", path.display()),
            other => other.kind_name().to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SourceSpec::Sqrt { m } => {
                if m < 2 {
                    return Err(Error::InvalidSource(format!("sqrt needs m >= 2, got {m}")));
                }
                let r = isqrt(&BigUint::from(m));
                if &r * &r == BigUint::from(m) {
                    return Err(Error::InvalidSource(format!(
                        "{m} is a perfect square; its expansion terminates"
                    )));
                }
            }
            SourceSpec::Rational { p, q } => {
                if q == 0 {
                    return Err(Error::InvalidSource("rational with q = 0".into()));
                }
                if p == 0 {
                    return Err(Error::InvalidSource(
                        "rational with p = 0 has no leading 1".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Opens a fresh source positioned at the first digit.
    pub fn open(&self) -> Result<Box<dyn DigitSource>> {
        self.validate()?;
        Ok(match *self {
            SourceSpec::Sqrt { m } => Box::new(SqrtSource::new(m)?),
            SourceSpec::Rational { p, q } => Box::new(RationalSource::new(p, q)?),
            SourceSpec::Champernowne2 => Box::new(ConcatSource::champernowne2()),
            SourceSpec::CopelandErdos2 => Box::new(ConcatSource::copeland_erdos2()),
            SourceSpec::File { ref path } => Box::new(BufferSource::from_file(path)?),
            SourceSpec::ConstantOnes => Box::new(PatternSource::ones()),
            SourceSpec::Alternating => Box::new(PatternSource::alternating()),
        })
    }

    /// The first `n` digits.
    pub fn generate(&self, n: usize) -> Result<BitBuffer> {
        self.open()?.take(n)
    }
}

fn require_digits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSource(
            "digit count must be at least 1".into(),
        ));
    }
    Ok(())
}

/// First `n` digits of `√m`, from its leading 1.
pub fn sqrt_digits(m: u64, n: usize) -> Result<BitBuffer> {
    require_digits(n)?;
    SourceSpec::Sqrt { m }.generate(n)
}

/// First `n` digits of `p/q` by long division, from its leading 1.
/// Dyadic values terminate and continue with zeros.
pub fn rational_digits(p: u64, q: u64, n: usize) -> Result<BitBuffer> {
    require_digits(n)?;
    SourceSpec::Rational { p, q }.generate(n)
}

/// First `n` bits of `1 10 11 100 101 …`.
pub fn champernowne2_digits(n: usize) -> Result<BitBuffer> {
    require_digits(n)?;
    SourceSpec::Champernowne2.generate(n)
}

/// First `n` bits of `10 11 101 111 1011 …`.
pub fn copeland_erdos2_digits(n: usize) -> Result<BitBuffer> {
    require_digits(n)?;
    SourceSpec::CopelandErdos2.generate(n)
}

/// Digits of `√m`, computed as the top bits of `⌊√m · 2^t⌋` for growing `t`.
pub struct SqrtSource {
    m: u64,
    int_bits: usize,
    inv: InvSqrt,
    digits: BitBuffer,
    pos: usize,
}

const MIN_SQRT_BLOCK: usize = 1 << 12;

impl SqrtSource {
    pub fn new(m: u64) -> Result<Self> {
        SourceSpec::Sqrt { m }.validate()?;
        let radicand = BigUint::from(m);
        let int_bits = isqrt(&radicand).bits() as usize;
        Ok(Self {
            m,
            int_bits,
            inv: InvSqrt::new(radicand),
            digits: BitBuffer::new(),
            pos: 0,
        })
    }

    /// Number of digits before the binary point.
    pub fn integer_bits(&self) -> usize {
        self.int_bits
    }

    fn ensure(&mut self, need: usize) {
        if self.digits.len() >= need {
            return;
        }
        let target = need.max(2 * self.digits.len()).max(MIN_SQRT_BLOCK);
        let t = target.saturating_sub(self.int_bits) as u64;
        let root = self.inv.root_scaled(t);
        let bytes = root.to_bytes_be();
        let skip = bytes.len() * 8 - root.bits() as usize;
        self.digits = BitBuffer::from_be_bytes(&bytes, skip, root.bits() as usize);
    }
}

impl DigitSource for SqrtSource {
    fn spec(&self) -> SourceSpec {
        SourceSpec::Sqrt { m: self.m }
    }

    fn position(&self) -> usize {
        self.pos
    }

    fn read_into(&mut self, count: usize, out: &mut BitBuffer) -> Result<usize> {
        self.ensure(self.pos + count);
        out.extend_from_range(&self.digits, self.pos, count);
        self.pos += count;
        Ok(count)
    }

    fn significand(&self) -> Option<f64> {
        Some((self.m as f64).sqrt() / 2f64.powi(self.int_bits as i32 - 1))
    }
}

/// Long division of `p/q`, normalized so the first quotient digit is 1.
pub struct RationalSource {
    p: u64,
    q: u64,
    rem: u128,
    den: u128,
    pos: usize,
}

impl RationalSource {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        SourceSpec::Rational { p, q }.validate()?;
        let mut rem = p as u128;
        let mut den = q as u128;
        while rem >= 2 * den {
            den <<= 1;
        }
        while rem < den {
            rem <<= 1;
        }
        Ok(Self {
            p,
            q,
            rem,
            den,
            pos: 0,
        })
    }
}

impl DigitSource for RationalSource {
    fn spec(&self) -> SourceSpec {
        SourceSpec::Rational {
            p: self.p,
            q: self.q,
        }
    }

    fn position(&self) -> usize {
        self.pos
    }

    fn read_into(&mut self, count: usize, out: &mut BitBuffer) -> Result<usize> {
        for _ in 0..count {
            let bit = self.rem >= self.den;
            if bit {
                self.rem -= self.den;
            }
            self.rem <<= 1;
            out.push(bit);
        }
        self.pos += count;
        Ok(count)
    }

    fn significand(&self) -> Option<f64> {
        // Exact ratio of the normalized state only at position 0; recompute.
        let mut rem = self.p as f64;
        let mut den = self.q as f64;
        while rem >= 2.0 * den {
            den *= 2.0;
        }
        while rem < den {
            rem *= 2.0;
        }
        Some(rem / den)
    }
}

/// Concatenated binary representations of an increasing integer sequence.
pub struct ConcatSource<I> {
    spec: SourceSpec,
    terms: I,
    current: u64,
    remaining: u32,
    pos: usize,
}

impl ConcatSource<std::ops::RangeFrom<u64>> {
    pub fn champernowne2() -> Self {
        Self::new(SourceSpec::Champernowne2, 1..)
    }
}

impl ConcatSource<PrimeStream> {
    pub fn copeland_erdos2() -> Self {
        Self::new(SourceSpec::CopelandErdos2, PrimeStream::new())
    }
}

impl<I: Iterator<Item = u64>> ConcatSource<I> {
    fn new(spec: SourceSpec, terms: I) -> Self {
        Self {
            spec,
            terms,
            current: 0,
            remaining: 0,
            pos: 0,
        }
    }
}

impl<I: Iterator<Item = u64> + Send> DigitSource for ConcatSource<I> {
    fn spec(&self) -> SourceSpec {
        self.spec.clone()
    }

    fn position(&self) -> usize {
        self.pos
    }

    fn read_into(&mut self, count: usize, out: &mut BitBuffer) -> Result<usize> {
        let mut left = count;
        while left > 0 {
            if self.remaining == 0 {
                self.current = self.terms.next().expect("infinite term sequence");
                self.remaining = 64 - self.current.leading_zeros();
            }
            let take = self.remaining.min(left.min(64) as u32);
            let shifted = self.current >> (self.remaining - take);
            out.push_word(shifted, take);
            self.remaining -= take;
            left -= take as usize;
        }
        self.pos += count;
        Ok(count)
    }
}

/// Periodic test streams: all ones, or `1010…`.
pub struct PatternSource {
    alternating: bool,
    pos: usize,
}

impl PatternSource {
    pub fn ones() -> Self {
        Self {
            alternating: false,
            pos: 0,
        }
    }

    pub fn alternating() -> Self {
        Self {
            alternating: true,
            pos: 0,
        }
    }
}

impl DigitSource for PatternSource {
    fn spec(&self) -> SourceSpec {
        if self.alternating {
            SourceSpec::Alternating
        } else {
            SourceSpec::ConstantOnes
        }
    }

    fn position(&self) -> usize {
        self.pos
    }

    fn read_into(&mut self, count: usize, out: &mut BitBuffer) -> Result<usize> {
        let mut left = count;
        let mut at = self.pos;
        while left > 0 {
            let take = left.min(64) as u32;
            let word = if !self.alternating {
                u64::MAX
            } else if at.is_multiple_of(2) {
                0xAAAA_AAAA_AAAA_AAAA
            } else {
                0x5555_5555_5555_5555
            };
            out.push_word(word >> (64 - take), take);
            left -= take as usize;
            at += take as usize;
        }
        self.pos += count;
        Ok(count)
    }

    fn significand(&self) -> Option<f64> {
        if self.alternating {
            Some(4.0 / 3.0)
        } else {
            Some(2.0)
        }
    }
}

/// Replays a stored buffer, typically one read from an `.nbits` file.
pub struct BufferSource {
    spec: SourceSpec,
    buffer: Arc<BitBuffer>,
    significand: Option<f64>,
    pos: usize,
}

impl BufferSource {
    pub fn new(spec: SourceSpec, buffer: Arc<BitBuffer>) -> Self {
        Self {
            spec,
            buffer,
            significand: None,
            pos: 0,
        }
    }

    /// Attaches the true significand of the stored constant, if known.
    pub fn with_significand(mut self, significand: Option<f64>) -> Self {
        self.significand = significand;
        self
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let buffer = read_bits_file(path)?;
        Ok(Self::new(
            SourceSpec::File {
                path: path.to_path_buf(),
            },
            Arc::new(buffer),
        ))
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }
}

impl DigitSource for BufferSource {
    fn spec(&self) -> SourceSpec {
        self.spec.clone()
    }

    fn position(&self) -> usize {
        self.pos
    }

    fn read_into(&mut self, count: usize, out: &mut BitBuffer) -> Result<usize> {
        let got = count.min(self.buffer.len() - self.pos);
        out.extend_from_range(&self.buffer, self.pos, got);
        self.pos += got;
        Ok(got)
    }

    fn significand(&self) -> Option<f64> {
        self.significand
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|c| c - b'0').collect()
    }

    #[test]
    fn sqrt2_first_digits() {
        assert_eq!(
            sqrt_digits(2, 21).unwrap().to_bit_vec(),
            bits("101101010000010011110")
        );
        assert_eq!(sqrt_digits(2, 4).unwrap().to_bit_vec(), [1, 0, 1, 1]);
    }

    #[test]
    fn sqrt3_prefix_bounds() {
        // floor(sqrt(3) * 2^7) = floor(221.70...) = 221
        let d = sqrt_digits(3, 8).unwrap();
        assert_eq!(d.to_string01(), format!("{:b}", 221));
        let v = 221u64;
        assert!(v * v <= 3 * 4u64.pow(7) && 3 * 4u64.pow(7) < (v + 1) * (v + 1));
    }

    #[test]
    fn sqrt_with_multibit_integer_part() {
        // sqrt(10) = 3.1622... = 11.00101...
        let d = sqrt_digits(10, 7).unwrap();
        assert_eq!(d.to_string01(), "1100101");
        assert_eq!(SqrtSource::new(10).unwrap().integer_bits(), 2);
    }

    #[test]
    fn sqrt_rejects_bad_radicands() {
        assert!(sqrt_digits(4, 8).is_err());
        assert!(sqrt_digits(1, 8).is_err());
        assert!(sqrt_digits(0, 8).is_err());
        assert!(sqrt_digits(2, 0).is_err());
    }

    #[test]
    fn sqrt_streaming_equals_bulk() {
        let bulk = sqrt_digits(7, 20_000).unwrap();
        let mut src = SqrtSource::new(7).unwrap();
        let mut streamed = BitBuffer::new();
        for chunk in [1usize, 7, 4000, 5000, 10_992] {
            src.read_into(chunk, &mut streamed).unwrap();
        }
        assert_eq!(streamed, bulk);
    }

    #[test]
    fn rationals() {
        assert_eq!(
            rational_digits(1, 3, 6).unwrap().to_bit_vec(),
            [1, 0, 1, 0, 1, 0]
        );
        assert_eq!(rational_digits(1, 1, 3).unwrap().to_bit_vec(), [1, 0, 0]);
        assert_eq!(
            rational_digits(1, 7, 9).unwrap().to_bit_vec(),
            [1, 0, 0, 1, 0, 0, 1, 0, 0]
        );
        // 5/4 = 1.01
        assert_eq!(rational_digits(5, 4, 5).unwrap().to_string01(), "10100");
        // 7 = 111
        assert_eq!(rational_digits(7, 1, 5).unwrap().to_string01(), "11100");
        assert!(rational_digits(1, 0, 3).is_err());
        assert!(rational_digits(0, 5, 3).is_err());
    }

    #[test]
    fn rational_extremes_do_not_overflow() {
        let d = rational_digits(u64::MAX, 3, 200).unwrap();
        assert_eq!(d.len(), 200);
        let d = rational_digits(1, u64::MAX, 200).unwrap();
        assert!(d.get(0));
    }

    #[test]
    fn champernowne() {
        assert_eq!(champernowne2_digits(3).unwrap().to_string01(), "110");
        assert_eq!(
            champernowne2_digits(12).unwrap().to_string01(),
            "110111001011"
        );
        assert_eq!(
            champernowne2_digits(17).unwrap().to_string01(),
            "11011100101110111"
        );
    }

    #[test]
    fn copeland_erdos() {
        assert_eq!(copeland_erdos2_digits(4).unwrap().to_string01(), "1011");
        assert_eq!(
            copeland_erdos2_digits(10).unwrap().to_string01(),
            "1011101111"
        );
        assert_eq!(
            copeland_erdos2_digits(13).unwrap().to_string01(),
            "1011101111101"
        );
    }

    #[test]
    fn patterns() {
        let mut alt = PatternSource::alternating();
        let mut out = BitBuffer::new();
        alt.read_into(3, &mut out).unwrap();
        alt.read_into(70, &mut out).unwrap();
        assert!(out.iter().enumerate().all(|(i, b)| b == (i % 2 == 0)));
        assert_eq!(
            SourceSpec::ConstantOnes.generate(100).unwrap().count_ones(),
            100
        );
    }

    #[test]
    fn buffer_source_runs_dry() {
        let buf = Arc::new(BitBuffer::from_bits(&[1, 0, 1]));
        let mut src = BufferSource::new(SourceSpec::Alternating, buf);
        let err = src.take(5).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientDigits {
                required: 5,
                available: 3
            }
        ));
    }

    #[test]
    fn significands() {
        let s = SqrtSource::new(2).unwrap().significand().unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        let s = SqrtSource::new(10).unwrap().significand().unwrap();
        assert!((s - 10f64.sqrt() / 2.0).abs() < 1e-15);
        let r = RationalSource::new(1, 3).unwrap().significand().unwrap();
        assert!((r - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn spec_serde_shape() {
        let v = serde_json::to_value(SourceSpec::Rational { p: 1, q: 3 }).unwrap();
        assert_eq!(v, json!({"kind": "rational", "p": 1, "q": 3}));
        assert_eq!(SourceSpec::Sqrt { m: 2 }.label(), "sqrt(2)");
    }
}
