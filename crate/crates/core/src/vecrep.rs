//! Prefix vectors and their integer and non-standard representations.
//!
//! A [`PrefixVector`] holds the first `n` digits `[x]^(n)`. Its integer
//! representative `x*` weights digit `i` (1-based) by `2^(n-i)`. The
//! non-standard vector repeats digit `i` exactly `2^(n-i)` times, so its
//! squared norm is `x*`; for `n` above [`NS_MATERIALIZE_CAP`] only the integer
//! form in [`NsProfile`] is available.

use num_bigint::BigUint;
use num_traits::One;

use crate::digits::{BitBuffer, DigitSource};
use crate::{Error, Result};

/// Largest `n` for which [`ns_vector`] materializes all `2^n - 1` entries.
pub const NS_MATERIALIZE_CAP: usize = 20;

/// The first `n` digits of a number as a 0/1 vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrefixVector {
    bits: BitBuffer,
    ones: usize,
}

impl PrefixVector {
    pub fn new(bits: BitBuffer) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyVector);
        }
        let ones = bits.count_ones();
        Ok(Self { bits, ones })
    }

    /// From 0/1 entries, e.g. `&[1, 0, 1, 1]`.
    pub fn from_entries(entries: &[u8]) -> Result<Self> {
        Self::new(BitBuffer::from_bits(entries))
    }

    /// The low `n` bits of `code`, most significant first.
    pub fn from_code(code: u64, n: usize) -> Result<Self> {
        assert!(n <= 64);
        let mut bits = BitBuffer::with_capacity(n);
        bits.push_word(code, n as u32);
        Self::new(bits)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Always false; vectors have at least one entry.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of ones, `⟨[x]^(n), 1^(n)⟩`.
    #[inline]
    pub fn popcount(&self) -> usize {
        self.ones
    }

    pub fn bits(&self) -> &BitBuffer {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    pub fn entries(&self) -> Vec<u8> {
        self.bits.to_bit_vec()
    }
}

/// `left_pad` zeros followed by the next `n - left_pad` digits of `source`.
pub fn prefix_vector(
    source: &mut dyn DigitSource,
    n: usize,
    left_pad: usize,
) -> Result<PrefixVector> {
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    let wanted = n.saturating_sub(left_pad);
    let mut bits = BitBuffer::with_capacity(n);
    for _ in 0..n.min(left_pad) {
        bits.push(false);
    }
    let start = source.position();
    let got = source.read_into(wanted, &mut bits)?;
    if got < wanted {
        return Err(Error::InsufficientDigits {
            required: start + wanted,
            available: start + got,
        });
    }
    PrefixVector::new(bits)
}

/// Same as [`prefix_vector`] over an already materialized buffer.
pub fn prefix_of(buffer: &BitBuffer, n: usize, left_pad: usize) -> Result<PrefixVector> {
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    let wanted = n.saturating_sub(left_pad);
    if buffer.len() < wanted {
        return Err(Error::InsufficientDigits {
            required: wanted,
            available: buffer.len(),
        });
    }
    let mut bits = BitBuffer::with_capacity(n);
    for _ in 0..n.min(left_pad) {
        bits.push(false);
    }
    bits.extend_from_range(buffer, 0, wanted);
    PrefixVector::new(bits)
}

/// `x* = Σ bits[i]·2^(n-i)`: the prefix read as a binary integer.
pub fn integer_representative(v: &PrefixVector) -> BigUint {
    let bytes = v.bits.as_bytes();
    BigUint::from_bytes_be(bytes) >> (bytes.len() * 8 - v.len())
}

/// `2^n - 1`, the integer representative of the all-ones vector and the
/// length of the non-standard vector.
pub fn all_ones_value(n: usize) -> BigUint {
    (BigUint::one() << n) - 1u32
}

/// Explicit non-standard vector: blocks of sizes `2^(n-1), …, 2, 1`, block
/// `i` filled with digit `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsVector {
    n: usize,
    entries: BitBuffer,
}

impl NsVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BitBuffer {
        &self.entries
    }

    /// Squared Euclidean norm (the number of ones).
    pub fn norm_squared(&self) -> u64 {
        self.entries.count_ones() as u64
    }

    /// Block `i` (0-based), of size `2^(n-1-i)`.
    pub fn block(&self, i: usize) -> BitBuffer {
        let size = 1usize << (self.n - 1 - i);
        let start = (1usize << self.n) - 2 * size;
        self.entries.slice(start, size)
    }
}

pub fn ns_vector(v: &PrefixVector) -> Result<NsVector> {
    let n = v.len();
    if n > NS_MATERIALIZE_CAP {
        return Err(Error::NsTooLarge {
            n,
            cap: NS_MATERIALIZE_CAP,
        });
    }
    let mut entries = BitBuffer::with_capacity((1 << n) - 1);
    for (i, bit) in v.bits.iter().enumerate() {
        let mut size = 1usize << (n - 1 - i);
        let word = if bit { u64::MAX } else { 0 };
        while size > 0 {
            let take = size.min(64);
            entries.push_word(word, take as u32);
            size -= take;
        }
    }
    Ok(NsVector { n, entries })
}

/// The non-standard representation kept in integer form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsProfile {
    pub n: usize,
    /// `x*`, also the squared norm of the non-standard vector.
    pub x_star: BigUint,
    /// `(x^c)* = 2^n - 1 - x*`.
    pub complement_star: BigUint,
}

impl NsProfile {
    /// `2^n - 1`.
    pub fn ns_length(&self) -> BigUint {
        all_ones_value(self.n)
    }

    /// `‖[x]_ns^(n)‖²`.
    pub fn norm_squared(&self) -> &BigUint {
        &self.x_star
    }
}

pub fn ns_profile(v: &PrefixVector) -> NsProfile {
    let x_star = integer_representative(v);
    let complement_star = all_ones_value(v.len()) - &x_star;
    NsProfile {
        n: v.len(),
        x_star,
        complement_star,
    }
}

/// Entrywise `1 - v`, so that `v + complement(v)` is the all-ones vector.
pub fn complement(v: &PrefixVector) -> PrefixVector {
    PrefixVector {
        bits: v.bits.complemented(),
        ones: v.len() - v.ones,
    }
}

/// `‖[x]^(n)‖²`, i.e. the number of ones.
pub fn norm_squared(v: &PrefixVector) -> usize {
    v.ones
}

/// Angle between `v` and the all-ones vector, `arccos(√(popcount/n))`.
pub fn angle_to_ones(v: &PrefixVector) -> Result<f64> {
    angle_from_counts(v.ones as u64, v.len() as u64)
}

pub(crate) fn angle_from_counts(ones: u64, n: u64) -> Result<f64> {
    if ones == 0 {
        return Err(Error::UndefinedAngle);
    }
    Ok((ones as f64 / n as f64).sqrt().min(1.0).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::{PatternSource, SqrtSource};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn pv(e: &[u8]) -> PrefixVector {
        PrefixVector::from_entries(e).unwrap()
    }

    #[test]
    fn prefixes_from_sources() {
        let mut s = SqrtSource::new(2).unwrap();
        let v = prefix_vector(&mut s, 4, 0).unwrap();
        assert_eq!(v.entries(), [1, 0, 1, 1]);
        assert_eq!(v.popcount(), 3);

        let v = prefix_vector(&mut PatternSource::ones(), 3, 0).unwrap();
        assert_eq!(v.entries(), [1, 1, 1]);

        let mut s = SqrtSource::new(2).unwrap();
        let v = prefix_vector(&mut s, 3, 2).unwrap();
        assert_eq!(v.entries(), [0, 0, 1]);
        assert_eq!(v.popcount(), 1);
    }

    #[test]
    fn prefix_errors() {
        let buf = BitBuffer::from_bits(&[1, 0]);
        let err = prefix_of(&buf, 5, 1).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientDigits {
                required: 4,
                available: 2
            }
        ));
        assert!(matches!(prefix_of(&buf, 0, 0), Err(Error::EmptyVector)));
        assert_eq!(prefix_of(&buf, 4, 2).unwrap().entries(), [0, 0, 1, 0]);
    }

    #[test]
    fn representatives() {
        assert_eq!(integer_representative(&pv(&[1, 0, 1, 1])), 11u32.into());
        assert_eq!(integer_representative(&pv(&[1, 0, 1])), 5u32.into());
        assert_eq!(integer_representative(&pv(&[0, 0, 1])), 1u32.into());
        let wide = PrefixVector::new(BitBuffer::from_bits(&[1; 70])).unwrap();
        assert_eq!(integer_representative(&wide), all_ones_value(70));
    }

    #[test]
    fn ns_vectors() {
        assert_eq!(
            ns_vector(&pv(&[1, 0, 1])).unwrap().entries().to_string01(),
            "1111001"
        );
        let ex = ns_vector(&pv(&[1, 0, 1, 1])).unwrap();
        assert_eq!(ex.entries().to_string01(), "111111110000111");
        assert_eq!(ex.norm_squared(), 11);
        assert_eq!(ex.block(1).to_string01(), "0000");
        assert_eq!(ex.block(3).to_string01(), "1");
        assert_eq!(
            ns_vector(&pv(&[0, 0, 1])).unwrap().entries().to_string01(),
            "0000001"
        );
        let big = PrefixVector::new(BitBuffer::from_bits(&[1; 21])).unwrap();
        assert!(matches!(
            ns_vector(&big),
            Err(Error::NsTooLarge { n: 21, cap: 20 })
        ));
        let at_cap = PrefixVector::new(BitBuffer::from_bits(&[1; 20])).unwrap();
        assert_eq!(ns_vector(&at_cap).unwrap().norm_squared(), (1 << 20) - 1);
    }

    #[test]
    fn profiles() {
        let p = ns_profile(&pv(&[1, 0, 1, 1]));
        assert_eq!(p.x_star, 11u32.into());
        assert_eq!(p.complement_star, 4u32.into());
        assert_eq!(p.ns_length(), 15u32.into());
        let p = ns_profile(&pv(&[1, 1, 1]));
        assert_eq!((p.x_star, p.complement_star), (7u32.into(), 0u32.into()));
    }

    #[test]
    fn sqrt2_64_bit_representative() {
        // floor(sqrt(2) * 2^63), checked by squaring.
        let v = prefix_vector(&mut SqrtSource::new(2).unwrap(), 64, 0).unwrap();
        let x = integer_representative(&v);
        let bound = BigUint::from(2u32) << 126u32;
        assert!(&x * &x <= bound);
        let x1 = &x + 1u32;
        assert!(&x1 * &x1 > bound);
        assert_eq!(x, BigUint::from(13_043_817_825_332_782_212u64));
    }

    #[test]
    fn complements_and_norms() {
        assert_eq!(complement(&pv(&[1, 0, 1, 1])).entries(), [0, 1, 0, 0]);
        assert_eq!(complement(&pv(&[1, 1, 1])).entries(), [0, 0, 0]);
        assert_eq!(norm_squared(&pv(&[1, 1, 0])), 2);
        assert_eq!(norm_squared(&pv(&[0, 0, 0])), 0);
        assert_eq!(norm_squared(&pv(&[1, 1, 1])), 3);
        for code in 0..64u64 {
            let v = PrefixVector::from_code(code, 6).unwrap();
            assert_eq!(complement(&complement(&v)), v);
        }
    }

    #[test]
    fn angles() {
        assert_eq!(angle_to_ones(&pv(&[1, 1, 1, 1])).unwrap(), 0.0);
        assert!((angle_to_ones(&pv(&[1, 0])).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((angle_to_ones(&pv(&[1, 0, 1, 1])).unwrap() - FRAC_PI_6).abs() < 1e-15);
        assert!(matches!(
            angle_to_ones(&pv(&[0, 0])),
            Err(Error::UndefinedAngle)
        ));
    }
}
