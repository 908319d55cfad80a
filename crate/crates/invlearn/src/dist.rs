//! Dyadic biases, product distributions, samplers, and exact distributions.
//!
//! A sampler is a deterministic map from uniform coin strings to samples; its
//! output distribution is the exact pushforward of the uniform distribution
//! on coins. For dyadic biases `p = s/2^k` the single-bit sampler compares a
//! `k`-bit coin string against the numerator, so every probability in sight
//! is a rational with a power-of-two denominator and can be accounted for
//! exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::bits::{rat_pow2, BitString, Rational, TruthTable};
use crate::error::{Error, Result};

/// Largest supported precision for a dyadic bias.
pub const MAX_PRECISION: u32 = 16;

/// An exact bias `p = s / 2^k` with `0 < s < 2^k`.
///
/// The boundary biases 0 and 1 are rejected: a deterministic coordinate has
/// no inverter window, so callers wanting constant bits should use a constant
/// sampler instead.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicProb {
    numerator: u64,
    precision: u32,
}

impl DyadicProb {
    pub fn new(numerator: u64, precision: u32) -> Result<Self> {
        if precision == 0 || precision > MAX_PRECISION {
            return Err(Error::InvalidParameter(format!(
                "precision {precision} not in 1..={MAX_PRECISION}"
            )));
        }
        if numerator == 0 || numerator >= 1 << precision {
            return Err(Error::InvalidParameter(format!(
                "numerator {numerator} not strictly inside (0, 2^{precision})"
            )));
        }
        Ok(Self {
            numerator,
            precision,
        })
    }

    /// The numerator `s`, i.e. the integer value of `bin(p)`.
    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    /// The precision `k`.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn denominator(&self) -> u64 {
        1 << self.precision
    }

    /// The numerator of `1 - p`, i.e. `2^k - s`.
    pub fn complement_numerator(&self) -> u64 {
        self.denominator() - self.numerator
    }

    /// The `k`-bit big-endian encoding of the numerator.
    pub fn bin(&self) -> BitString {
        BitString::from_value(self.numerator, self.precision as usize)
    }

    pub fn value(&self) -> Rational {
        rat_pow2(self.numerator, self.precision)
    }
}

impl fmt::Display for DyadicProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator())
    }
}

impl fmt::Debug for DyadicProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for DyadicProb {
    type Err = Error;

    /// Parses `s/d` where `d` is a power of two, e.g. `3/4`, or the explicit
    /// form `s/2^k`.
    fn from_str(text: &str) -> Result<Self> {
        let (num, den) = text
            .split_once('/')
            .ok_or_else(|| Error::Parse(format!("bias {text:?} is not of the form s/2^k")))?;
        let numerator: u64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
        let den = den.trim();
        let precision = if let Some(k) = den.strip_prefix("2^") {
            k.parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad exponent in {text:?}")))?
        } else {
            let d: u64 = den
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
            if !d.is_power_of_two() {
                return Err(Error::Parse(format!(
                    "denominator {d} is not a power of two"
                )));
            }
            d.trailing_zeros()
        };
        Self::new(numerator, precision)
    }
}

/// An ordered list of independent dyadic biases `(p_1, ..., p_n)`.
#[derive(Clone, PartialEq, Eq)]
pub struct ProductDistribution {
    biases: Vec<DyadicProb>,
}

impl ProductDistribution {
    pub fn new(biases: Vec<DyadicProb>) -> Result<Self> {
        if biases.is_empty() {
            return Err(Error::InvalidParameter(
                "product distribution needs at least one coordinate".into(),
            ));
        }
        Ok(Self { biases })
    }

    /// Convenience constructor from `(numerator, precision)` pairs.
    pub fn from_pairs(pairs: &[(u64, u32)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(s, k)| DyadicProb::new(s, k))
                .collect::<Result<_>>()?,
        )
    }

    /// Parses a comma- or newline-separated list of biases.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(
            text.split([',', '\n'])
                .map(str::trim)
                .filter(|part| !part.is_empty())
                .map(str::parse)
                .collect::<Result<_>>()?,
        )
    }

    pub fn n(&self) -> usize {
        self.biases.len()
    }

    pub fn biases(&self) -> &[DyadicProb] {
        &self.biases
    }

    pub fn bias(&self, i: usize) -> &DyadicProb {
        &self.biases[i]
    }

    /// Total coin length `sum_i k_i` of the product sampler.
    pub fn coin_length(&self) -> usize {
        self.biases.iter().map(|p| p.precision() as usize).sum()
    }

    /// The exact distribution of a single coordinate.
    pub fn coordinate_distribution(&self, i: usize) -> ExactDistribution {
        let p = &self.biases[i];
        let mut probs = BTreeMap::new();
        probs.insert(BitString::from_value(1, 1), p.value());
        probs.insert(
            BitString::from_value(0, 1),
            rat_pow2(p.complement_numerator(), p.precision()),
        );
        ExactDistribution::new(probs).expect("coordinate distribution sums to one")
    }

    /// The exact joint distribution over `{0,1}^n`.
    pub fn exact_distribution(&self) -> Result<ExactDistribution> {
        let coords: Vec<ExactDistribution> = (0..self.n())
            .map(|i| self.coordinate_distribution(i))
            .collect();
        Ok(ExactDistribution::product(&coords))
    }
}

impl fmt::Debug for ProductDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProductDistribution(")?;
        for (i, p) in self.biases.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Samples one biased bit: returns 1 iff the coin string, read as a `k`-bit
/// dyadic number, is strictly below the bias.
pub fn samp(p: &DyadicProb, r: &BitString) -> Result<bool> {
    if r.len() != p.precision() as usize {
        return Err(Error::CoinLength {
            expected: p.precision() as usize,
            got: r.len(),
        });
    }
    Ok(r.value() < p.numerator())
}

/// Samples from a product distribution, consuming one fresh coin block per
/// coordinate, in order.
pub fn prod_samp(d: &ProductDistribution, r: &BitString) -> Result<BitString> {
    if r.len() != d.coin_length() {
        return Err(Error::CoinLength {
            expected: d.coin_length(),
            got: r.len(),
        });
    }
    let mut out = BitString::empty();
    let mut offset = 0;
    for p in d.biases() {
        let k = p.precision() as usize;
        let block = r.slice(offset, k)?;
        offset += k;
        out.push(samp(p, &block)?);
    }
    Ok(out)
}

/// A deterministic map from uniform coins to samples.
pub trait Sampler: Send + Sync {
    /// Number of coin bits consumed per sample.
    fn coin_length(&self) -> usize;

    /// Length of each sample.
    fn output_length(&self) -> usize;

    fn sample(&self, coins: &BitString) -> Result<BitString>;
}

/// The product-distribution sampler.
#[derive(Clone, Debug)]
pub struct ProductSampler {
    dist: ProductDistribution,
}

impl ProductSampler {
    pub fn new(dist: ProductDistribution) -> Self {
        Self { dist }
    }

    pub fn distribution(&self) -> &ProductDistribution {
        &self.dist
    }
}

impl Sampler for ProductSampler {
    fn coin_length(&self) -> usize {
        self.dist.coin_length()
    }

    fn output_length(&self) -> usize {
        self.dist.n()
    }

    fn sample(&self, coins: &BitString) -> Result<BitString> {
        prod_samp(&self.dist, coins)
    }
}

/// A sampler backed by an arbitrary truth table from coins to samples.
#[derive(Clone, Debug)]
pub struct TableSampler {
    table: TruthTable,
}

impl TableSampler {
    pub fn new(table: TruthTable) -> Self {
        Self { table }
    }

    pub fn table(&self) -> &TruthTable {
        &self.table
    }
}

impl Sampler for TableSampler {
    fn coin_length(&self) -> usize {
        self.table.arity()
    }

    fn output_length(&self) -> usize {
        self.table.out_len()
    }

    fn sample(&self, coins: &BitString) -> Result<BitString> {
        self.table.eval(coins)
    }
}

/// The sampler whose samples are its coins; models the uniform distribution.
#[derive(Clone, Debug)]
pub struct IdentitySampler {
    bits: usize,
}

impl IdentitySampler {
    pub fn new(bits: usize) -> Self {
        Self { bits }
    }
}

impl Sampler for IdentitySampler {
    fn coin_length(&self) -> usize {
        self.bits
    }

    fn output_length(&self) -> usize {
        self.bits
    }

    fn sample(&self, coins: &BitString) -> Result<BitString> {
        if coins.len() != self.bits {
            return Err(Error::CoinLength {
                expected: self.bits,
                got: coins.len(),
            });
        }
        Ok(coins.clone())
    }
}

/// A sampler that ignores its coins and always emits a fixed output.
#[derive(Clone, Debug)]
pub struct ConstantSampler {
    output: BitString,
    coin_length: usize,
}

impl ConstantSampler {
    pub fn new(output: BitString, coin_length: usize) -> Self {
        Self {
            output,
            coin_length,
        }
    }
}

impl Sampler for ConstantSampler {
    fn coin_length(&self) -> usize {
        self.coin_length
    }

    fn output_length(&self) -> usize {
        self.output.len()
    }

    fn sample(&self, coins: &BitString) -> Result<BitString> {
        if coins.len() != self.coin_length {
            return Err(Error::CoinLength {
                expected: self.coin_length,
                got: coins.len(),
            });
        }
        Ok(self.output.clone())
    }
}

/// A finite distribution with exact rational probabilities.
///
/// Zero-probability atoms are dropped, so equal distributions compare equal.
#[derive(Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    probs: BTreeMap<BitString, Rational>,
}

impl ExactDistribution {
    pub fn new(probs: BTreeMap<BitString, Rational>) -> Result<Self> {
        let mut total = Rational::zero();
        for (atom, p) in &probs {
            if p < &Rational::zero() {
                return Err(Error::InvalidParameter(format!(
                    "negative probability on {atom}"
                )));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            probs: probs.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
        })
    }

    /// Builds from occurrence counts out of `total` equally likely outcomes.
    pub fn from_counts(counts: BTreeMap<BitString, u64>, total: u64) -> Result<Self> {
        if total == 0 || counts.values().sum::<u64>() != total {
            return Err(Error::InvalidParameter(
                "counts do not sum to the given total".into(),
            ));
        }
        let denom = BigInt::from(total);
        Self::new(
            counts
                .into_iter()
                .map(|(atom, c)| (atom, Rational::new(BigInt::from(c), denom.clone())))
                .collect(),
        )
    }

    pub fn point_mass(atom: BitString) -> Self {
        let mut probs = BTreeMap::new();
        probs.insert(atom, Rational::one());
        Self { probs }
    }

    pub fn uniform(atoms: impl IntoIterator<Item = BitString>) -> Result<Self> {
        let atoms: Vec<BitString> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::InvalidParameter(
                "uniform distribution over an empty set".into(),
            ));
        }
        let p = Rational::new(BigInt::one(), BigInt::from(atoms.len()));
        Self::new(atoms.into_iter().map(|a| (a, p.clone())).collect())
    }

    pub fn prob(&self, atom: &BitString) -> Rational {
        self.probs.get(atom).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, &Rational)> {
        self.probs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &BitString> {
        self.probs.keys()
    }

    /// The joint distribution of independent coordinates, with atoms
    /// concatenated in order.
    pub fn product(coords: &[ExactDistribution]) -> ExactDistribution {
        let mut acc = vec![(BitString::empty(), Rational::one())];
        for coord in coords {
            let mut next = Vec::with_capacity(acc.len() * coord.support_len());
            for (prefix, p) in &acc {
                for (atom, q) in coord.iter() {
                    next.push((prefix.concat(atom), p * q));
                }
            }
            acc = next;
        }
        ExactDistribution {
            probs: acc.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
        }
    }
}

impl fmt::Debug for ExactDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.probs.iter().map(|(a, p)| (a.to_string(), p.to_string())))
            .finish()
    }
}

/// The exact pushforward of the uniform coin distribution through a sampler.
pub fn exact_output_distribution(
    sampler: &dyn Sampler,
    cap_bits: usize,
) -> Result<ExactDistribution> {
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
        *counts.entry(sampler.sample(&coins)?).or_default() += 1;
    }
    ExactDistribution::from_counts(counts, 1 << r)
}
