//! Finite-scale checks of the vector identities.
//!
//! Every claim is checked exhaustively over all `2^n` vectors for
//! `n ≤` [`EXHAUSTIVE_MAX_N`], then on seeded random vectors up to the
//! configured `n_max`. Each checker also has a deliberately broken
//! [`Variant::Mutant`] so tests can confirm the checker is not vacuous.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::BitBuffer;
use crate::vecrep::{
    all_ones_value, angle_to_ones, complement, integer_representative, norm_squared, ns_profile,
    ns_vector, prefix_of, PrefixVector,
};
use crate::{Error, Result};

pub const EXHAUSTIVE_MAX_N: usize = 12;
/// Largest `n` for [`rebalance_permutation`]; block counts stay in `u64`.
pub const REBALANCE_MAX_N: usize = 40;
/// Counterexamples kept per result; the total is in `failure_count`.
pub const MAX_REPORTED_FAILURES: usize = 16;
const ANGLE_TOLERANCE: f64 = 1e-12;
const SCALE_SHIFTS: [usize; 3] = [1, 3, 17];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// Squared norm of the non-standard vector equals `x*`.
    Propnorm,
    /// `‖v‖² + ‖vᶜ‖² = n`, with `v ⊥ vᶜ`.
    Norme,
    /// `x* + (xᶜ)* = 2^n − 1`.
    NsPythagoras,
    /// Prefixes do not depend on the power of two scaling the number.
    ScaleInvariance,
    /// `cos²(angle to 1) = popcount / n`.
    Teo1Identity,
    /// The rebalanced non-standard vector keeps norm `x*` and near-uniform
    /// block proportions.
    Rebalance,
}

impl Claim {
    pub const ALL: [Claim; 6] = [
        Claim::Propnorm,
        Claim::Norme,
        Claim::NsPythagoras,
        Claim::ScaleInvariance,
        Claim::Teo1Identity,
        Claim::Rebalance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::Propnorm => "propnorm",
            Claim::Norme => "norme",
            Claim::NsPythagoras => "ns_pythagoras",
            Claim::ScaleInvariance => "scale_invariance",
            Claim::Teo1Identity => "teo1_identity",
            Claim::Rebalance => "rebalance",
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Claim::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownClaim(s.to_string()))
    }
}

/// Which form of the identity a checker tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Faithful,
    /// A seeded bug the checker must catch.
    Mutant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_max: EXHAUSTIVE_MAX_N,
            trials: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub n: usize,
    pub bits: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomizedRun {
    pub seed: u64,
    pub trials: usize,
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub claim: Claim,
    pub variant: Variant,
    pub passed: bool,
    pub instances: u64,
    pub failure_count: u64,
    pub failures: Vec<Counterexample>,
    pub exhaustive_up_to: usize,
    pub randomized: Option<RandomizedRun>,
}

pub fn verify_claim(claim: Claim, cfg: &VerifyConfig) -> Result<VerificationResult> {
    verify_claim_variant(claim, cfg, Variant::Faithful)
}

pub fn verify_all(cfg: &VerifyConfig) -> Result<Vec<VerificationResult>> {
    Claim::ALL.iter().map(|&c| verify_claim(c, cfg)).collect()
}

pub fn verify_claim_variant(
    claim: Claim,
    cfg: &VerifyConfig,
    variant: Variant,
) -> Result<VerificationResult> {
    if cfg.n_max < 2 {
        return Err(Error::InvalidConfig(format!(
            "n_max must be >= 2, got {}",
            cfg.n_max
        )));
    }
    let exhaustive_up_to = cfg.n_max.min(EXHAUSTIVE_MAX_N);
    let mut instances = 0u64;
    let mut found: Vec<Counterexample> = Vec::new();
    let mut failure_count = 0u64;
    let mut record = |outcomes: Vec<Option<Counterexample>>| {
        instances += outcomes.len() as u64;
        for c in outcomes.into_iter().flatten() {
            failure_count += 1;
            if found.len() < MAX_REPORTED_FAILURES {
                found.push(c);
            }
        }
    };

    for n in 1..=exhaustive_up_to {
        let outcomes = (0..1u64 << n)
            .into_par_iter()
            .map(|code| {
                let v = PrefixVector::from_code(code, n).expect("n >= 1");
                check(claim, &v, variant)
            })
            .collect();
        record(outcomes);
    }

    let n_hi = match claim {
        Claim::Rebalance => cfg.n_max.min(REBALANCE_MAX_N),
        _ => cfg.n_max,
    };
    let randomized = if n_hi > EXHAUSTIVE_MAX_N {
        if cfg.trials == 0 {
            return Err(Error::InvalidConfig(
                "randomized checks beyond n = 12 need trials >= 1".into(),
            ));
        }
        let n_lo = EXHAUSTIVE_MAX_N + 1;
        let outcomes = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|i| {
                let v = random_vector(cfg.seed, i, n_lo, n_hi);
                check(claim, &v, variant)
            })
            .collect();
        record(outcomes);
        Some(RandomizedRun {
            seed: cfg.seed,
            trials: cfg.trials,
            n_min: n_lo,
            n_max: n_hi,
        })
    } else {
        None
    };

    Ok(VerificationResult {
        claim,
        variant,
        passed: failure_count == 0,
        instances,
        failure_count,
        failures: found,
        exhaustive_up_to,
        randomized,
    })
}

/// Instance `index` of a seeded run: its own ChaCha stream, so results do
/// not depend on evaluation order.
pub fn random_vector(seed: u64, index: u64, n_lo: usize, n_hi: usize) -> PrefixVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = rng.gen_range(n_lo..=n_hi);
    let bits: BitBuffer = (0..n).map(|_| rng.gen::<bool>()).collect();
    PrefixVector::new(bits).expect("n >= 1")
}

fn check(claim: Claim, v: &PrefixVector, variant: Variant) -> Option<Counterexample> {
    let outcome = match claim {
        Claim::Propnorm => check_propnorm(v, variant),
        Claim::Norme => check_norme(v, variant),
        Claim::NsPythagoras => check_ns_pythagoras(v, variant),
        Claim::ScaleInvariance => check_scale_invariance(v, variant),
        Claim::Teo1Identity => check_teo1(v, variant),
        Claim::Rebalance => check_rebalance(v, variant),
    };
    outcome.err().map(|detail| Counterexample {
        n: v.len(),
        bits: v.bits().to_string01(),
        detail,
    })
}

type Check = std::result::Result<(), String>;

/// `‖[x]_ns‖²` counted from the block structure: materialized up to the
/// exhaustive bound, summed block by block beyond it.
fn ns_norm_squared(v: &PrefixVector) -> BigUint {
    let n = v.len();
    if n <= EXHAUSTIVE_MAX_N {
        return BigUint::from(ns_vector(v).expect("below cap").norm_squared());
    }
    let mut total = BigUint::zero();
    for i in (0..n).filter(|&i| v.get(i)) {
        total += BigUint::from(1u32) << (n - 1 - i);
    }
    total
}

fn check_propnorm(v: &PrefixVector, variant: Variant) -> Check {
    let ns = ns_norm_squared(v);
    let x_star = match variant {
        Variant::Faithful => ns_profile(v).x_star,
        // Linear weights i in place of 2^(n-i).
        Variant::Mutant => (0..v.len())
            .filter(|&i| v.get(i))
            .map(|i| BigUint::from(i + 1))
            .sum(),
    };
    if ns != x_star {
        return Err(format!("ns norm² {ns} != x* {x_star}"));
    }
    Ok(())
}

fn check_norme(v: &PrefixVector, variant: Variant) -> Check {
    let c = match variant {
        Variant::Faithful => complement(v),
        // Leaves the last entry unflipped.
        Variant::Mutant => {
            let mut bits = complement(v).bits().clone();
            bits.truncate(v.len() - 1);
            bits.push(v.get(v.len() - 1));
            PrefixVector::new(bits).unwrap()
        }
    };
    let overlap = v
        .bits()
        .iter()
        .zip(c.bits().iter())
        .filter(|&(a, b)| a && b)
        .count();
    let sum = norm_squared(v) + norm_squared(&c);
    if overlap != 0 || sum != v.len() {
        return Err(format!(
            "‖v‖²+‖vᶜ‖² = {sum}, n = {}, ⟨v,vᶜ⟩ = {overlap}",
            v.len()
        ));
    }
    Ok(())
}

fn check_ns_pythagoras(v: &PrefixVector, variant: Variant) -> Check {
    let n = v.len();
    let c = complement(v);
    let xs = integer_representative(v);
    let cs = integer_representative(&c);
    let total = match variant {
        Variant::Faithful => all_ones_value(n),
        Variant::Mutant => BigUint::from(1u32) << n,
    };
    if &xs + &cs != total {
        return Err(format!("x* + (xᶜ)* = {} != {total}", &xs + &cs));
    }
    if ns_profile(v).complement_star != cs {
        return Err("profile complement disagrees with complement vector".into());
    }
    if n <= EXHAUSTIVE_MAX_N {
        let ns_sum = ns_norm_squared(v) + ns_norm_squared(&c);
        if ns_sum != total {
            return Err(format!("‖ns‖² + ‖nsᶜ‖² = {ns_sum} != {total}"));
        }
    }
    Ok(())
}

/// The low `width` bits of `x`, most significant first.
fn bits_of(x: &BigUint, width: usize) -> BitBuffer {
    let mut out = BitBuffer::with_capacity(width);
    let len = x.bits() as usize;
    assert!(len <= width);
    for _ in 0..width - len {
        out.push(false);
    }
    if len > 0 {
        let bytes = x.to_bytes_be();
        out.extend_from(&BitBuffer::from_be_bytes(
            &bytes,
            bytes.len() * 8 - len,
            len,
        ));
    }
    out
}

fn check_scale_invariance(v: &PrefixVector, variant: Variant) -> Check {
    let n = v.len();
    let x_star = integer_representative(v);
    for p in SCALE_SHIFTS {
        let scaled = &x_star << p;
        let width = match variant {
            Variant::Faithful => n + p,
            Variant::Mutant => n + p + 1,
        };
        let back = prefix_of(&bits_of(&scaled, width), n, 0).map_err(|e| e.to_string())?;
        if &back != v {
            return Err(format!("2^{p}·x has prefix {}", back.bits().to_string01()));
        }
    }
    Ok(())
}

fn check_teo1(v: &PrefixVector, variant: Variant) -> Check {
    let ones = v.popcount();
    let n = v.len();
    let angle = match variant {
        Variant::Faithful => angle_to_ones(v),
        // Drops the square root.
        Variant::Mutant if ones > 0 => Ok((ones as f64 / n as f64).acos()),
        Variant::Mutant => Err(Error::UndefinedAngle),
    };
    match angle {
        Err(Error::UndefinedAngle) if ones == 0 => Ok(()),
        Err(e) => Err(e.to_string()),
        Ok(_) if ones == 0 => Err("zero vector produced an angle".into()),
        Ok(a) => {
            let ratio = ones as f64 / n as f64;
            let gap = (a.cos().powi(2) - ratio).abs();
            if gap > ANGLE_TOLERANCE {
                Err(format!("cos²α − popcount/n = {gap:e}"))
            } else {
                Ok(())
            }
        }
    }
}

fn check_rebalance(v: &PrefixVector, variant: Variant) -> Check {
    let r = rebalance_variant(v, variant).map_err(|e| e.to_string())?;
    let sum: u64 = r.block_ones.iter().sum();
    if sum != r.x_star || r.total_ones != r.x_star {
        return Err(format!("Σ block ones {sum} != x* {}", r.x_star));
    }
    if let Some(i) = (0..r.n).find(|&i| r.block_ones[i] > r.block_sizes[i]) {
        return Err(format!("block {i} overfull"));
    }
    let loose = r.blocks_off_target();
    if loose > 1 {
        return Err(format!("{loose} blocks more than one unit from target"));
    }
    if r.n <= EXHAUSTIVE_MAX_N {
        let laid = r.layout().map_err(|e| e.to_string())?;
        let ns = ns_vector(v).map_err(|e| e.to_string())?;
        if laid.len() != ns.len() || laid.count_ones() as u64 != ns.norm_squared() {
            return Err("rebalanced vector is not a permutation of the ns vector".into());
        }
    }
    Ok(())
}

/// A non-standard vector with its ones spread across blocks in proportion
/// to block size. Within each block the canonical layout puts ones first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RebalancedNs {
    pub n: usize,
    pub x_star: u64,
    /// `2^(n−1), …, 2, 1`.
    pub block_sizes: Vec<u64>,
    pub block_ones: Vec<u64>,
    pub total_ones: u64,
}

impl RebalancedNs {
    pub fn proportions(&self) -> Vec<f64> {
        self.block_ones
            .iter()
            .zip(&self.block_sizes)
            .map(|(&o, &s)| o as f64 / s as f64)
            .collect()
    }

    /// `x* / (2^n − 1)`.
    pub fn global_ratio(&self) -> f64 {
        self.x_star as f64 / ((1u64 << self.n) - 1) as f64
    }

    /// Blocks whose count is more than one away from `size·x*/(2^n−1)`.
    pub fn blocks_off_target(&self) -> usize {
        let d = ((1u128 << self.n) - 1) as i128;
        self.block_sizes
            .iter()
            .zip(&self.block_ones)
            .filter(|&(&s, &o)| {
                let dev = o as i128 * d - s as i128 * self.x_star as i128;
                dev.abs() > d
            })
            .count()
    }

    /// The permuted vector itself; only for `n ≤ 20`.
    pub fn layout(&self) -> Result<BitBuffer> {
        if self.n > crate::vecrep::NS_MATERIALIZE_CAP {
            return Err(Error::NsTooLarge {
                n: self.n,
                cap: crate::vecrep::NS_MATERIALIZE_CAP,
            });
        }
        let mut out = BitBuffer::with_capacity((1 << self.n) - 1);
        for (&s, &o) in self.block_sizes.iter().zip(&self.block_ones) {
            for j in 0..s {
                out.push(j < o);
            }
        }
        Ok(out)
    }
}

pub fn rebalance_permutation(v: &PrefixVector) -> Result<RebalancedNs> {
    rebalance_variant(v, Variant::Faithful)
}

fn rebalance_variant(v: &PrefixVector, variant: Variant) -> Result<RebalancedNs> {
    let n = v.len();
    if n > REBALANCE_MAX_N {
        return Err(Error::InvalidConfig(format!(
            "rebalance supports n <= {REBALANCE_MAX_N}, got {n}"
        )));
    }
    let x_star = integer_representative(v).to_u64().expect("n <= 40");
    let d = (1u128 << n) - 1;
    let x = x_star as u128;
    let block_sizes: Vec<u64> = (0..n).map(|i| 1u64 << (n - 1 - i)).collect();
    let mut block_ones: Vec<u64> = block_sizes
        .iter()
        .map(|&s| {
            let num = s as u128 * x;
            match variant {
                Variant::Faithful => ((2 * num + d) / (2 * d)) as u64,
                // Truncates and never corrects.
                Variant::Mutant => (num / d) as u64,
            }
        })
        .collect();

    if variant == Variant::Faithful {
        let mut drift = x_star as i128 - block_ones.iter().map(|&o| o as i128).sum::<i128>();
        // Prefer blocks whose rounding went against the drift, largest
        // first; any block with room is a fallback.
        for strict in [true, false] {
            for (i, &s) in block_sizes.iter().enumerate() {
                if drift == 0 {
                    break;
                }
                let target = s as u128 * x;
                let have = block_ones[i] as u128 * d;
                if drift > 0 && block_ones[i] < s && (!strict || have < target) {
                    block_ones[i] += 1;
                    drift -= 1;
                } else if drift < 0 && block_ones[i] > 0 && (!strict || have > target) {
                    block_ones[i] -= 1;
                    drift += 1;
                }
            }
        }
        debug_assert_eq!(drift, 0);
    }

    let total_ones = block_ones.iter().sum();
    Ok(RebalancedNs {
        n,
        x_star,
        block_sizes,
        block_ones,
        total_ones,
    })
}

/// How element `i` of the ordered sequence is drawn from rebalanced block `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawPolicy {
    /// The same position in every block.
    Index(u64),
    /// A uniformly random position per block.
    Uniform { seed: u64 },
}

/// One bit per block under the ones-first layout, giving a length-`n`
/// sequence.
pub fn ordered_sequence_draw(r: &RebalancedNs, policy: DrawPolicy) -> Result<BitBuffer> {
    match policy {
        DrawPolicy::Index(index) => {
            let mut out = BitBuffer::with_capacity(r.n);
            for (&s, &o) in r.block_sizes.iter().zip(&r.block_ones) {
                if index >= s {
                    return Err(Error::DrawIndexOutOfRange {
                        index,
                        block_size: s,
                    });
                }
                out.push(index < o);
            }
            Ok(out)
        }
        DrawPolicy::Uniform { seed } => Ok(draw_uniform(r, &mut ChaCha8Rng::seed_from_u64(seed))),
    }
}

pub fn draw_uniform<R: Rng + ?Sized>(r: &RebalancedNs, rng: &mut R) -> BitBuffer {
    r.block_sizes
        .iter()
        .zip(&r.block_ones)
        .map(|(&s, &o)| rng.gen_range(0..s) < o)
        .collect()
}
