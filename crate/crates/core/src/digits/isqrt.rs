//! Exact integer square roots of large integers.
//!
//! Small radicands use Heron's iteration directly. Large ones go through a
//! division-free Newton iteration for the reciprocal square root with
//! precision doubling, followed by an exact correction of the candidate root
//! against the radicand. Only multiplications grow with the operand size, so
//! ten-million-bit roots stay within seconds on num-bigint's Toom-3.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Radicands at or below this many bits use Heron's iteration.
const SMALL_BITS: u64 = 2048;
/// Extra bits carried through truncated radicands and the final product.
const GUARD: u64 = 64;
/// Precision of the floating-point seed.
const SEED_PREC: u64 = 48;

/// `⌊√n⌋`, exact.
pub fn isqrt(n: &BigUint) -> BigUint {
    if n.bits() <= SMALL_BITS {
        return isqrt_heron(n);
    }
    InvSqrt::new(n.clone()).root_scaled(0)
}

/// `⌊√(m·4^t)⌋`, i.e. `⌊√m · 2^t⌋`.
pub fn isqrt_scaled(m: &BigUint, t: u64) -> BigUint {
    if m.bits() + 2 * t <= SMALL_BITS {
        return isqrt_heron(&(m << (2 * t)));
    }
    InvSqrt::new(m.clone()).root_scaled(t)
}

fn isqrt_heron(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    // 2^ceil(bits/2) ≥ √n, and the iteration decreases monotonically to ⌊√n⌋.
    let mut x = BigUint::one() << n.bits().div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1u32;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Fixed-point approximation `y ≈ 2^prec / √f` of the reciprocal square root
/// of `f = radicand / 4^half`, where `half = ceil(bits / 2)` puts `f` in
/// `[1/4, 1)`.
///
/// `f` does not change when the radicand is multiplied by a power of four, so
/// one state serves every `⌊√(m·4^t)⌋` and refining to a higher precision
/// reuses everything computed so far.
#[derive(Debug, Clone)]
pub struct InvSqrt {
    radicand: BigUint,
    half: u64,
    y: BigUint,
    prec: u64,
}

impl InvSqrt {
    pub fn new(radicand: BigUint) -> Self {
        assert!(!radicand.is_zero(), "reciprocal square root of zero");
        let bits = radicand.bits();
        let half = bits.div_ceil(2);
        let shift = bits.saturating_sub(53);
        let top = (&radicand >> shift).to_u64().unwrap() as f64;
        let f = top * 2f64.powi(shift as i32 - 2 * half as i32);
        let g = 1.0 / f.sqrt();
        let y = BigUint::from((g * (1u64 << SEED_PREC) as f64) as u64);
        Self {
            radicand,
            half,
            y,
            prec: SEED_PREC,
        }
    }

    pub fn precision(&self) -> u64 {
        self.prec
    }

    /// Raises the fixed-point precision to at least `target` bits.
    pub fn refine(&mut self, target: u64) {
        let bits = self.radicand.bits();
        while self.prec < target {
            let next = target.min(2 * self.prec - 16);
            self.y <<= next - self.prec;
            self.prec = next;

            // Keep only the bits of the radicand this precision can use. The
            // shift is even so the truncated value is still f·4^k.
            let sh = bits.saturating_sub(next + GUARD) & !1;
            let nt = &self.radicand >> sh;
            let scale = 2 * (self.half - sh / 2) + 2 * next;

            // y ← y + y·(1 − f·y²)/2 in fixed point.
            let t = nt * (&self.y * &self.y);
            let residual = BigInt::from(BigUint::one() << scale) - BigInt::from(t);
            let corr: BigInt = (BigInt::from(self.y.clone()) * residual) >> (scale + 1);
            let y = BigInt::from(std::mem::take(&mut self.y)) + corr;
            self.y = y
                .to_biguint()
                .expect("reciprocal square root stays positive");
        }
    }

    /// `⌊√(radicand · 4^t)⌋`, exact.
    pub fn root_scaled(&mut self, t: u64) -> BigUint {
        // The root has half + t bits; relative error 2^-(prec-2) must stay
        // well below one unit.
        self.refine(self.half + t + GUARD / 2);
        // √(r·4^t) = r · 2^t · (1/√f) / 2^half.
        let prod = &self.radicand * &self.y;
        let candidate = if t >= self.half + self.prec {
            prod << (t - self.half - self.prec)
        } else {
            prod >> (self.half + self.prec - t)
        };
        correct_root(candidate, &(&self.radicand << (2 * t)))
    }
}

/// Moves `z` to `⌊√n⌋`, assuming it is already close.
fn correct_root(z: BigUint, n: &BigUint) -> BigUint {
    let n = BigInt::from(n.clone());
    let mut z = BigInt::from(z);
    loop {
        let rem = &n - &z * &z;
        let twice = &z << 1u32;
        if rem.is_negative() {
            // Overshoot: step down by ceil(-rem / 2z), at least one.
            let step = (-&rem).div_ceil(&twice).max(BigInt::one());
            z -= step;
        } else if rem > twice {
            // (z+1)² ≤ n: step up by ⌊rem / (2z+1)⌋, at least one.
            let step = (&rem / (&twice + 1u32)).max(BigInt::one());
            z += step;
        } else {
            return z.to_biguint().unwrap();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Bit-by-bit restoring square root, independent of the Newton paths.
    fn isqrt_bitwise(n: &BigUint) -> BigUint {
        let mut rem = BigUint::zero();
        let mut root = BigUint::zero();
        let pairs = n.bits().div_ceil(2);
        for i in (0..pairs).rev() {
            let pair = (n >> (2 * i)) & BigUint::from(3u32);
            rem = (rem << 2u32) | pair;
            let trial = (&root << 2u32) | BigUint::one();
            root <<= 1u32;
            if rem >= trial {
                rem -= trial;
                root |= BigUint::one();
            }
        }
        root
    }

    fn check(n: &BigUint, r: &BigUint) {
        assert!(r * r <= *n);
        let r1 = r + 1u32;
        assert!(&r1 * &r1 > *n);
    }

    #[test]
    fn small_values_exhaustive() {
        for v in 0u64..5000 {
            let n = BigUint::from(v);
            let r = isqrt(&n);
            check(&n, &r);
        }
    }

    #[test]
    fn large_path_matches_bitwise_oracle() {
        for bits in [2049u64, 3000, 5000, 9001] {
            let n = (BigUint::one() << bits) - 12345u32;
            let r = isqrt(&n);
            assert_eq!(r, isqrt_bitwise(&n), "bits = {bits}");
        }
    }

    #[test]
    fn perfect_squares_and_neighbors_on_large_path() {
        let base = (BigUint::one() << 1500u32) + 987_654_321u32;
        let sq = &base * &base;
        assert_eq!(isqrt(&sq), base);
        assert_eq!(isqrt(&(&sq - 1u32)), &base - 1u32);
        assert_eq!(isqrt(&(&sq + 1u32)), base);
    }

    #[test]
    fn scaled_roots_reuse_state() {
        let m = BigUint::from(2u32);
        let mut inv = InvSqrt::new(m.clone());
        for t in [10u64, 100, 1100, 4000, 2500] {
            let r = inv.root_scaled(t);
            assert_eq!(r, isqrt_bitwise(&(&m << (2 * t))), "t = {t}");
        }
        assert!(inv.precision() >= 4000);
    }

    #[test]
    fn correction_handles_far_candidates() {
        let n = BigUint::from(1_000_000_007u64) << 300u32;
        let exact = isqrt_bitwise(&n);
        assert_eq!(correct_root(&exact + 1000u32, &n), exact);
        assert_eq!(correct_root(&exact - 1000u32, &n), exact);
    }

    proptest! {
        #[test]
        fn scaled_matches_oracle(m in 2u64..1_000_000, t in 0u64..1500) {
            let m = BigUint::from(m);
            prop_assert_eq!(isqrt_scaled(&m, t), isqrt_bitwise(&(&m << (2 * t))));
        }
    }
}
