//! Distributional inverters for samplers.
//!
//! The bit inverter recovers, by rejection sampling, a uniformly random coin
//! string mapping to a requested output bit. To invert bit 1 of a bias
//! `p = s/2^k` it draws a `C`-bit window where `C` is the bit length of `s`
//! (so `2^(C-1) <= s < 2^C`), zero-extends the draw to `k` bits, and accepts
//! iff the value is below `s`; each round accepts with probability at least
//! 1/2 and, conditioned on acceptance, the result is exactly uniform over
//! the preimages of 1. Bit 0 runs the same procedure against `2^k - s` and
//! offsets the accepted value by `s`. After `ceil(log2(1/gamma))` rounds the
//! inverter gives up and reports an explicit failure, so the failure
//! probability is at most `gamma`.
//!
//! Coins are explicit inputs of fixed, precomputed length rather than an
//! internal RNG: every claim about these inverters is verified by exhaustive
//! enumeration of the coin space, which needs outcomes to be a deterministic
//! function of finitely many bits.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;

use crate::bits::{
    bit_length, ceil_log2, is_open_unit, rat_pow2, BitString, PreimageIndex, Rational, TruthTable,
};
use crate::dist::{DyadicProb, ExactDistribution, ProductDistribution, Sampler};
use crate::error::{Error, Result};
use crate::rng::random_bits;

/// Result of one inversion attempt: a preimage, or an explicit failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InversionOutcome {
    Preimage(BitString),
    Fail,
}

impl InversionOutcome {
    pub fn is_fail(&self) -> bool {
        matches!(self, InversionOutcome::Fail)
    }

    pub fn preimage(&self) -> Option<&BitString> {
        match self {
            InversionOutcome::Preimage(r) => Some(r),
            InversionOutcome::Fail => None,
        }
    }
}

/// Number of rejection rounds for failure bound `gamma`: the smallest
/// `R >= 1` with `2^-R <= gamma`, i.e. `num * 2^R >= den`. The answer is
/// within one of the bit-length gap of the reduced fraction, so a single
/// shifted comparison settles it.
pub fn rounds_for(gamma: &Rational) -> Result<u32> {
    if !is_open_unit(gamma) {
        return Err(Error::InvalidParameter(format!(
            "failure bound {gamma} not in (0,1)"
        )));
    }
    let gap = gamma.denom().bits() - gamma.numer().bits();
    if gap > 64 {
        return Err(Error::InvalidParameter(format!(
            "failure bound {gamma} below 2^-64"
        )));
    }
    let gap = gap as u32;
    let rounds = if gap == 0 {
        1
    } else if (gamma.numer() << gap).cmp(gamma.denom()) != std::cmp::Ordering::Less {
        gap.max(1)
    } else {
        gap + 1
    };
    if rounds > 64 {
        return Err(Error::InvalidParameter(format!(
            "failure bound {gamma} below 2^-64"
        )));
    }
    Ok(rounds)
}

/// Window width for inverting `target_bit` under bias `p`: the unique `C`
/// with `2^(C-1) <= s < 2^C`, where `s` is the numerator of `p` for bit 1
/// and of `1 - p` for bit 0.
pub fn window_width(p: &DyadicProb, target_bit: bool) -> u32 {
    let numerator = if target_bit {
        p.numerator()
    } else {
        p.complement_numerator()
    };
    bit_length(numerator)
}

/// Coin length consumed by [`bit_inv`] for this bias, bit, and bound.
pub fn bit_inv_coin_length(p: &DyadicProb, b: bool, gamma: &Rational) -> Result<usize> {
    Ok(window_width(p, b) as usize * rounds_for(gamma)? as usize)
}

fn bit_inv_rounds(
    p: &DyadicProb,
    b: bool,
    rounds: u32,
    coins: &BitString,
    biased: bool,
) -> Result<InversionOutcome> {
    let c = window_width(p, b) as usize;
    if coins.len() != c * rounds as usize {
        return Err(Error::CoinLength {
            expected: c * rounds as usize,
            got: coins.len(),
        });
    }
    let target = if b {
        p.numerator()
    } else {
        p.complement_numerator()
    };
    for round in 0..rounds as usize {
        let mut draw = coins.value_range(round * c, c)?;
        if biased && draw == target {
            // Deliberately wrong: fold the first rejected value back onto
            // target - 1, doubling its mass.
            draw = target - 1;
        }
        if draw < target {
            let value = if b { draw } else { p.numerator() + draw };
            return Ok(InversionOutcome::Preimage(BitString::from_value(
                value,
                p.precision() as usize,
            )));
        }
    }
    Ok(InversionOutcome::Fail)
}

/// Inverts a single sampled bit by rejection sampling.
///
/// On success the returned `k`-bit string `r` satisfies `samp(p, r) == b`,
/// and conditioned on success `r` is exactly uniform over the preimages of
/// `b`. Fails with probability at most `gamma` over uniform coins.
pub fn bit_inv(
    p: &DyadicProb,
    b: bool,
    gamma: &Rational,
    coins: &BitString,
) -> Result<InversionOutcome> {
    bit_inv_rounds(p, b, rounds_for(gamma)?, coins, false)
}

/// Inverts a product-distribution sample coordinate by coordinate.
///
/// Coins are consumed as consecutive per-coordinate blocks, each sized as
/// [`bit_inv`] requires for that coordinate's target bit. Success requires
/// every coordinate to succeed; the failure probability is at most
/// `gamma * n` whenever `gamma < 1/n`.
pub fn prod_inv(
    x: &BitString,
    d: &ProductDistribution,
    gamma: &Rational,
    coins: &BitString,
) -> Result<InversionOutcome> {
    if x.len() != d.n() {
        return Err(Error::LengthMismatch {
            expected: d.n(),
            got: x.len(),
        });
    }
    let rounds = rounds_for(gamma)?;
    let expected: usize = (0..d.n())
        .map(|i| window_width(d.bias(i), x.bit(i)) as usize * rounds as usize)
        .sum();
    if coins.len() != expected {
        return Err(Error::CoinLength {
            expected,
            got: coins.len(),
        });
    }
    let mut result = BitString::empty();
    let mut offset = 0;
    for i in 0..d.n() {
        let c = window_width(d.bias(i), x.bit(i)) as usize;
        let block = coins.slice(offset, c * rounds as usize)?;
        offset += c * rounds as usize;
        match bit_inv_rounds(d.bias(i), x.bit(i), rounds, &block, false)? {
            InversionOutcome::Preimage(r) => result = result.concat(&r),
            InversionOutcome::Fail => return Ok(InversionOutcome::Fail),
        }
    }
    Ok(InversionOutcome::Preimage(result))
}

/// A randomized procedure mapping a sampler output (plus explicit coins) to
/// a preimage of that output or an explicit failure.
///
/// `fail_bound` is the declared bound on the failure probability for any
/// output in the sampler's support; `distance_bound` is the declared
/// statistical distance of the success-conditioned output from uniform
/// preimages. The total distance of the joint distribution from the
/// sampler-side joint is at most `distance_bound + fail_bound`.
pub trait DistributionalInverter: Send + Sync {
    /// Number of coin bits consumed per inversion.
    fn coin_length(&self) -> usize;

    fn invert(&self, y: &BitString, coins: &BitString) -> Result<InversionOutcome>;

    /// Declared bound on the failure probability.
    fn fail_bound(&self) -> Rational;

    /// Declared statistical-distance bound of the conditional output from
    /// uniform over preimages.
    fn distance_bound(&self) -> Rational;

    /// Inverts with coins drawn from a seeded stream.
    fn invert_with_rng(&self, y: &BitString, rng: &mut ChaCha8Rng) -> Result<InversionOutcome> {
        let coins = random_bits(rng, self.coin_length());
        self.invert(y, &coins)
    }

    /// Exact conditional outcome distribution given output `y`, when the
    /// implementation can provide one without coin enumeration. Keys are
    /// tagged outcomes: `1 . r` for a preimage `r`, `0` for failure.
    fn exact_conditional(&self, _y: &BitString) -> Option<Result<ExactDistribution>> {
        None
    }
}

/// Tagged-atom encoding shared by conditional and joint distributions:
/// success outcomes are `1 . r`, failure is the reserved atom `0`, and joint
/// atoms append the sampler output `y`.
pub fn success_atom(r: &BitString) -> BitString {
    BitString::from_value(1, 1).concat(r)
}

/// The reserved failure atom; see [`success_atom`].
pub fn fail_atom() -> BitString {
    BitString::from_value(0, 1)
}

/// The joint atom for an inversion outcome paired with sampler output `y`.
pub fn joint_atom(outcome: &InversionOutcome, y: &BitString) -> BitString {
    match outcome {
        InversionOutcome::Preimage(r) => success_atom(r).concat(y),
        InversionOutcome::Fail => fail_atom().concat(y),
    }
}

/// Splits a joint atom back into an outcome and the trailing `y`.
pub fn decode_joint_atom(atom: &BitString, y_len: usize) -> Result<(InversionOutcome, BitString)> {
    if atom.len() < 1 + y_len {
        return Err(Error::LengthMismatch {
            expected: 1 + y_len,
            got: atom.len(),
        });
    }
    let y = atom.slice(atom.len() - y_len, y_len)?;
    let outcome = if atom.bit(0) {
        InversionOutcome::Preimage(atom.slice(1, atom.len() - 1 - y_len)?)
    } else {
        InversionOutcome::Fail
    };
    Ok((outcome, y))
}

/// The product-distribution inverter with a fixed coin budget.
///
/// Per coordinate `i` it reserves `k_i` coin bits per round regardless of
/// the target bit, of which each round consumes the first `C` (the window
/// for that bit). The total coin length is therefore `rounds * sum_i k_i`,
/// matching the `n^2 * max_i k_i` accounting at the default bound
/// `gamma = 2^-n`.
#[derive(Clone, Debug)]
pub struct ProductInverter {
    dist: ProductDistribution,
    gamma: Rational,
    rounds: u32,
}

impl ProductInverter {
    pub fn new(dist: ProductDistribution, gamma: Rational) -> Result<Self> {
        let rounds = rounds_for(&gamma)?;
        Ok(Self {
            dist,
            gamma,
            rounds,
        })
    }

    /// Uses the default failure bound `gamma = 2^-n`.
    pub fn with_default_gamma(dist: ProductDistribution) -> Result<Self> {
        let gamma = rat_pow2(1, dist.n() as u32);
        Self::new(dist, gamma)
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn distribution(&self) -> &ProductDistribution {
        &self.dist
    }

    /// Extracts the window bits [`bit_inv`] consumes for coordinate `i` from
    /// the coordinate's fixed-width coin block.
    fn coordinate_coins(&self, coins: &BitString, offset: usize, k: usize, c: usize) -> BitString {
        let mut used = BitString::empty();
        for round in 0..self.rounds as usize {
            let block = coins
                .slice(offset + round * k, c)
                .expect("coordinate block within checked coin length");
            used = used.concat(&block);
        }
        used
    }

    /// Exact conditional outcome distribution of one coordinate, in closed
    /// form: each round accepts a uniform window value below the target
    /// count, so conditioned on success the returned coin string is uniform
    /// over the preimages and the failure probability is the per-round
    /// rejection probability raised to the round count. The closed form is
    /// checked against full coin enumeration in tests.
    fn coordinate_conditional(&self, i: usize, bit: bool) -> Vec<(Option<u64>, Rational)> {
        let p = self.dist.bias(i);
        let c = window_width(p, bit);
        let target = if bit {
            p.numerator()
        } else {
            p.complement_numerator()
        };
        let per_round_reject = rat_pow2((1u64 << c) - target, c);
        let fail = crate::bits::pow_rational(&per_round_reject, self.rounds as u64);
        let share = (Rational::one() - &fail) / Rational::from_integer(BigInt::from(target));
        let mut outcomes: Vec<(Option<u64>, Rational)> = (0..target)
            .map(|v| {
                let value = if bit { v } else { p.numerator() + v };
                (Some(value), share.clone())
            })
            .collect();
        if !fail.is_zero() {
            outcomes.push((None, fail));
        }
        outcomes
    }
}

impl DistributionalInverter for ProductInverter {
    fn coin_length(&self) -> usize {
        self.rounds as usize * self.dist.coin_length()
    }

    fn invert(&self, y: &BitString, coins: &BitString) -> Result<InversionOutcome> {
        if y.len() != self.dist.n() {
            return Err(Error::LengthMismatch {
                expected: self.dist.n(),
                got: y.len(),
            });
        }
        if coins.len() != self.coin_length() {
            return Err(Error::CoinLength {
                expected: self.coin_length(),
                got: coins.len(),
            });
        }
        let mut result = BitString::empty();
        let mut offset = 0;
        for i in 0..self.dist.n() {
            let p = self.dist.bias(i);
            let k = p.precision() as usize;
            let c = window_width(p, y.bit(i)) as usize;
            let used = self.coordinate_coins(coins, offset, k, c);
            offset += k * self.rounds as usize;
            match bit_inv_rounds(p, y.bit(i), self.rounds, &used, false)? {
                InversionOutcome::Preimage(r) => result = result.concat(&r),
                InversionOutcome::Fail => return Ok(InversionOutcome::Fail),
            }
        }
        Ok(InversionOutcome::Preimage(result))
    }

    fn fail_bound(&self) -> Rational {
        let bound = &self.gamma * Rational::from_integer(BigInt::from(self.dist.n()));
        bound.min(Rational::one())
    }

    fn distance_bound(&self) -> Rational {
        Rational::zero()
    }

    fn exact_conditional(&self, y: &BitString) -> Option<Result<ExactDistribution>> {
        Some(self.exact_conditional_impl(y))
    }
}

impl ProductInverter {
    fn exact_conditional_impl(&self, y: &BitString) -> Result<ExactDistribution> {
        if y.len() != self.dist.n() {
            return Err(Error::LengthMismatch {
                expected: self.dist.n(),
                got: y.len(),
            });
        }
        // Outcomes of the coordinates are independent; combine their exact
        // conditionals and collapse any coordinate failure into the overall
        // failure atom.
        let mut atoms: Vec<(BitString, Rational)> = vec![(BitString::empty(), Rational::one())];
        let mut fail_mass = Rational::zero();
        for i in 0..self.dist.n() {
            let p = self.dist.bias(i);
            let outcomes = self.coordinate_conditional(i, y.bit(i));
            let mut success: Vec<(BitString, Rational)> = Vec::new();
            let mut coord_fail = Rational::zero();
            for (value, prob) in outcomes {
                match value {
                    Some(v) => success.push((
                        BitString::from_value(v, p.precision() as usize),
                        prob,
                    )),
                    None => coord_fail += prob,
                }
            }
            let mut next = Vec::with_capacity(atoms.len() * success.len());
            let mut reached = Rational::zero();
            for (prefix, q) in &atoms {
                reached += q;
                for (r, pr) in &success {
                    next.push((prefix.concat(r), q * pr));
                }
            }
            fail_mass += reached * coord_fail;
            atoms = next;
        }
        let mut probs: BTreeMap<BitString, Rational> = BTreeMap::new();
        for (r, q) in atoms {
            probs.insert(success_atom(&r), q);
        }
        if !fail_mass.is_zero() {
            probs.insert(fail_atom(), fail_mass);
        }
        ExactDistribution::new(probs)
    }
}

/// The inverter for the identity sampler: every output is its own coins.
#[derive(Clone, Debug)]
pub struct IdentityInverter {
    bits: usize,
}

impl IdentityInverter {
    pub fn new(bits: usize) -> Self {
        Self { bits }
    }
}

impl DistributionalInverter for IdentityInverter {
    fn coin_length(&self) -> usize {
        0
    }

    fn invert(&self, y: &BitString, coins: &BitString) -> Result<InversionOutcome> {
        if y.len() != self.bits {
            return Err(Error::LengthMismatch {
                expected: self.bits,
                got: y.len(),
            });
        }
        if !coins.is_empty() {
            return Err(Error::CoinLength {
                expected: 0,
                got: coins.len(),
            });
        }
        Ok(InversionOutcome::Preimage(y.clone()))
    }

    fn fail_bound(&self) -> Rational {
        Rational::zero()
    }

    fn distance_bound(&self) -> Rational {
        Rational::zero()
    }

    fn exact_conditional(&self, y: &BitString) -> Option<Result<ExactDistribution>> {
        if y.len() != self.bits {
            return Some(Err(Error::LengthMismatch {
                expected: self.bits,
                got: y.len(),
            }));
        }
        Some(Ok(ExactDistribution::point_mass(success_atom(y))))
    }
}

/// A ground-truth inverter for any tabulated sampler: rejection-samples a
/// uniform preimage from the precomputed preimage sets.
///
/// The window for output `y` is `ceil(log2 |preimages(y)|)` bits, so for
/// power-of-two preimage counts the inverter never fails; otherwise the
/// per-round acceptance probability exceeds 1/2 and the declared failure
/// bound is the worst case over the image.
#[derive(Clone, Debug)]
pub struct UniformPreimageInverter {
    index: PreimageIndex,
    rounds: u32,
    window: usize,
    fail: Rational,
}

impl UniformPreimageInverter {
    pub fn new(table: &TruthTable, rounds: u32) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidParameter("rounds must be positive".into()));
        }
        let index = table.preimage_index();
        let mut window = 0usize;
        let mut fail = Rational::zero();
        for y in index.images() {
            let count = index.preimages_of(y).len() as u64;
            let c = ceil_log2(count);
            window = window.max(c as usize);
            let rejected = (1u64 << c) - count;
            let round_fail = if c == 0 {
                Rational::zero()
            } else {
                rat_pow2(rejected, c)
            };
            let mut total = Rational::one();
            for _ in 0..rounds {
                total *= &round_fail;
            }
            fail = fail.max(total);
        }
        Ok(Self {
            index,
            rounds,
            window,
            fail,
        })
    }

    fn conditional_for(&self, y: &BitString) -> Result<ExactDistribution> {
        if y.len() != self.index.out_len() {
            return Err(Error::LengthMismatch {
                expected: self.index.out_len(),
                got: y.len(),
            });
        }
        let preimages = self.index.preimages_of(y.value());
        if preimages.is_empty() {
            return Ok(ExactDistribution::point_mass(fail_atom()));
        }
        let count = preimages.len() as u64;
        let c = ceil_log2(count);
        let round_fail = if c == 0 {
            Rational::zero()
        } else {
            rat_pow2((1u64 << c) - count, c)
        };
        let mut fail_total = Rational::one();
        for _ in 0..self.rounds {
            fail_total *= &round_fail;
        }
        let success_share =
            (Rational::one() - &fail_total) / Rational::from_integer(BigInt::from(count));
        let mut probs: BTreeMap<BitString, Rational> = BTreeMap::new();
        for &x in preimages {
            probs.insert(
                success_atom(&BitString::from_value(x, self.index.arity())),
                success_share.clone(),
            );
        }
        if !fail_total.is_zero() {
            probs.insert(fail_atom(), fail_total);
        }
        ExactDistribution::new(probs)
    }
}

impl DistributionalInverter for UniformPreimageInverter {
    fn coin_length(&self) -> usize {
        self.window * self.rounds as usize
    }

    fn invert(&self, y: &BitString, coins: &BitString) -> Result<InversionOutcome> {
        if y.len() != self.index.out_len() {
            return Err(Error::LengthMismatch {
                expected: self.index.out_len(),
                got: y.len(),
            });
        }
        if coins.len() != self.coin_length() {
            return Err(Error::CoinLength {
                expected: self.coin_length(),
                got: coins.len(),
            });
        }
        let preimages = self.index.preimages_of(y.value());
        if preimages.is_empty() {
            return Ok(InversionOutcome::Fail);
        }
        let count = preimages.len() as u64;
        let c = ceil_log2(count) as usize;
        for round in 0..self.rounds as usize {
            let draw = coins.value_range(round * self.window, c)?;
            if draw < count {
                return Ok(InversionOutcome::Preimage(BitString::from_value(
                    preimages[draw as usize],
                    self.index.arity(),
                )));
            }
        }
        Ok(InversionOutcome::Fail)
    }

    fn fail_bound(&self) -> Rational {
        self.fail.clone()
    }

    fn distance_bound(&self) -> Rational {
        Rational::zero()
    }

    fn exact_conditional(&self, y: &BitString) -> Option<Result<ExactDistribution>> {
        Some(self.conditional_for(y))
    }
}

/// An inverter that always fails; useful as a degenerate fixture.
#[derive(Clone, Debug, Default)]
pub struct AlwaysFailInverter;

impl DistributionalInverter for AlwaysFailInverter {
    fn coin_length(&self) -> usize {
        0
    }

    fn invert(&self, _y: &BitString, coins: &BitString) -> Result<InversionOutcome> {
        if !coins.is_empty() {
            return Err(Error::CoinLength {
                expected: 0,
                got: coins.len(),
            });
        }
        Ok(InversionOutcome::Fail)
    }

    fn fail_bound(&self) -> Rational {
        Rational::one()
    }

    fn distance_bound(&self) -> Rational {
        Rational::zero()
    }

    fn exact_conditional(&self, _y: &BitString) -> Option<Result<ExactDistribution>> {
        Some(Ok(ExactDistribution::point_mass(fail_atom())))
    }
}

/// The sampler-side joint distribution `w . S(w)` over uniform coins, in the
/// tagged-atom encoding (every atom is a success).
pub fn sampler_joint(sampler: &dyn Sampler, cap_bits: usize) -> Result<ExactDistribution> {
    let r = sampler.coin_length();
    if r > cap_bits || r > 63 {
        return Err(Error::SizeCap {
            what: "sampler coin length",
            value: r,
            cap: cap_bits.min(63),
        });
    }
    let mut counts: BTreeMap<BitString, u64> = BTreeMap::new();
    for w in 0..1u64 << r {
        let coins = BitString::from_value(w, r);
        let y = sampler.sample(&coins)?;
        *counts
            .entry(joint_atom(&InversionOutcome::Preimage(coins), &y))
            .or_default() += 1;
    }
    ExactDistribution::from_counts(counts, 1 << r)
}

/// The exact joint distribution `I(S(w), z) . S(w)` over uniform coins
/// `(w, z)`, computed by full enumeration of both coin spaces.
///
/// This is the brute-force oracle for the distributional-inversion contract;
/// failures map to the reserved atom outside the preimage space.
pub fn joint_preimage_distribution(
    sampler: &dyn Sampler,
    inverter: &dyn DistributionalInverter,
    cap_bits: usize,
) -> Result<ExactDistribution> {
    let r_inv = inverter.coin_length();
    if r_inv > cap_bits || r_inv > 63 {
        return Err(Error::SizeCap {
            what: "inverter coin length",
            value: r_inv,
            cap: cap_bits.min(63),
        });
    }
    let output = crate::dist::exact_output_distribution(sampler, cap_bits)?;
    let denom = BigInt::one() << r_inv;
    let mut probs: BTreeMap<BitString, Rational> = BTreeMap::new();
    for (y, py) in output.iter() {
        let mut counts: BTreeMap<BitString, u64> = BTreeMap::new();
        for z in 0..1u64 << r_inv {
            let coins = BitString::from_value(z, r_inv);
            let outcome = inverter.invert(y, &coins)?;
            *counts.entry(joint_atom(&outcome, y)).or_default() += 1;
        }
        for (atom, count) in counts {
            let p = py * Rational::new(BigInt::from(count), denom.clone());
            *probs.entry(atom).or_insert_with(Rational::zero) += p;
        }
    }
    ExactDistribution::new(probs)
}

/// The same joint distribution computed from the inverter's exact
/// conditionals instead of coin enumeration.
///
/// Errors if the inverter does not expose conditionals. Equality with
/// [`joint_preimage_distribution`] is asserted in tests; downstream exact
/// error computations use this route when the coin space is too large to
/// enumerate.
pub fn joint_from_conditionals(
    sampler: &dyn Sampler,
    inverter: &dyn DistributionalInverter,
    cap_bits: usize,
) -> Result<ExactDistribution> {
    let output = crate::dist::exact_output_distribution(sampler, cap_bits)?;
    let mut probs: BTreeMap<BitString, Rational> = BTreeMap::new();
    for (y, py) in output.iter() {
        let conditional = inverter
            .exact_conditional(y)
            .ok_or_else(|| {
                Error::InvalidParameter(
                    "inverter does not provide exact conditional distributions".into(),
                )
            })??;
        for (atom, q) in conditional.iter() {
            *probs.entry(atom.concat(y)).or_insert_with(Rational::zero) += py * q;
        }
    }
    ExactDistribution::new(probs)
}

/// Intentionally defective inverter implementations for exercising the
/// verification gates; see the harness's inverter suite.
pub mod fixtures {
    use super::*;

    /// A biased bit inverter: sound (every success is a genuine preimage)
    /// but not conditionally uniform, because the first out-of-window value
    /// is folded back onto a valid preimage.
    pub fn biased_bit_inv(
        p: &DyadicProb,
        b: bool,
        gamma: &Rational,
        coins: &BitString,
    ) -> Result<InversionOutcome> {
        bit_inv_rounds(p, b, rounds_for(gamma)?, coins, true)
    }
}

/// Convenience alias used by verification suites that sweep bit-inverter
/// implementations.
pub type BitInverterFn = fn(&DyadicProb, bool, &Rational, &BitString) -> Result<InversionOutcome>;

#[allow(unused)]
fn _object_safety(_: &dyn DistributionalInverter, _: Arc<dyn DistributionalInverter>) {}
