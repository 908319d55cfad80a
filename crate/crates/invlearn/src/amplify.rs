//! Inversion amplification: direct products, truncating hashes, and the
//! chain turning a weak inverter oracle into a distributional inverter.
//!
//! The chain runs in the standard order: take the truncating hash of the
//! function to invert, take its direct product, invert the product weakly
//! (here: a brute-force oracle stands in for a natural-property oracle),
//! amplify weak inversion to strong inversion by planting the target image
//! among fresh blocks, and finally recover near-uniform preimages by
//! querying the strong inverter on hashed-and-truncated images at a random
//! truncation level. Parameters follow the asymptotic formulas but every
//! entry point accepts logged desk-scale overrides, and achieved failure
//! and distance figures are measured rather than assumed.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::{
    ceil_log2, pow_rational, BitString, PreimageIndex, Rational, TruthTable, DEFAULT_ENUM_CAP,
    MAX_TABLE_ARITY,
};
use crate::dist::ExactDistribution;
use crate::error::{Error, Result};
use crate::invert::{fail_atom, success_atom, DistributionalInverter, InversionOutcome};
use crate::rng::random_bits;

/// An affine map over GF(2) from `n` bits to `m` bits: `h(x) = A*x xor b`.
///
/// With uniformly random `A` and `b` the family is pairwise independent, and
/// every prefix truncation of the output is itself pairwise independent,
/// since dropping rows leaves a uniformly random smaller family.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HashFunction {
    n: usize,
    m: usize,
    rows: Vec<u64>,
    offset: u64,
}

impl HashFunction {
    pub fn new(n: usize, m: usize, rows: Vec<u64>, offset: u64) -> Result<Self> {
        if n > 63 || m > 63 {
            return Err(Error::SizeCap {
                what: "hash dimension",
                value: n.max(m),
                cap: 63,
            });
        }
        if rows.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: rows.len(),
            });
        }
        Ok(Self {
            n,
            m,
            rows,
            offset,
        })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Self {
        let mask = if n == 0 { 0 } else { (1u64 << n) - 1 };
        let rows = (0..m).map(|_| rng.random::<u64>() & mask).collect();
        let offset = rng.random::<u64>() & if m == 0 { 0 } else { (1u64 << m) - 1 };
        Self {
            n,
            m,
            rows,
            offset,
        }
    }

    /// Bits in the canonical description: row-major `A`, then `b`.
    pub fn description_len(n: usize, m: usize) -> usize {
        m * n + m
    }

    /// Number of functions in the family.
    pub fn family_size(n: usize, m: usize) -> u64 {
        1u64 << Self::description_len(n, m)
    }

    /// The `index`-th member of the family, in description order.
    pub fn from_index(n: usize, m: usize, index: u64) -> Self {
        let len = Self::description_len(n, m);
        debug_assert!(len <= 64);
        let row_mask = (1u64 << n) - 1;
        let rows = (0..m)
            .map(|j| (index >> (len - (j + 1) * n)) & row_mask)
            .collect();
        let offset = index & ((1u64 << m) - 1);
        Self {
            n,
            m,
            rows,
            offset,
        }
    }

    pub fn encode(&self) -> BitString {
        let mut desc = BitString::empty();
        for &row in &self.rows {
            desc = desc.concat(&BitString::from_value(row, self.n));
        }
        desc.concat(&BitString::from_value(self.offset, self.m))
    }

    pub fn decode(desc: &BitString, n: usize, m: usize) -> Result<Self> {
        if desc.len() != Self::description_len(n, m) {
            return Err(Error::LengthMismatch {
                expected: Self::description_len(n, m),
                got: desc.len(),
            });
        }
        let rows = (0..m)
            .map(|j| desc.slice(j * n, n).map(|s| s.value()))
            .collect::<Result<Vec<u64>>>()?;
        let offset = desc.slice(m * n, m)?.value();
        Self::new(n, m, rows, offset)
    }

    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn output_len(&self) -> usize {
        self.m
    }

    pub fn eval_index(&self, x: u64) -> u64 {
        let mut out = 0u64;
        for &row in &self.rows {
            out = (out << 1) | ((row & x).count_ones() as u64 & 1);
        }
        out ^ self.offset
    }

    pub fn eval(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.n {
            return Err(Error::ArityMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(BitString::from_value(self.eval_index(x.value()), self.m))
    }

    /// The first `i` output bits.
    pub fn eval_prefix(&self, x: &BitString, i: usize) -> Result<BitString> {
        self.eval(x)?.prefix(i)
    }
}

/// The `t`-fold blockwise application of `f`: block `i` of the output is
/// `f` applied to block `i` of the input.
pub fn direct_product(f: &TruthTable, t: usize) -> Result<TruthTable> {
    if t == 0 {
        return Err(Error::InvalidParameter("direct product needs t >= 1".into()));
    }
    let arity = t * f.arity();
    let out_len = t * f.out_len();
    if arity > MAX_TABLE_ARITY {
        return Err(Error::SizeCap {
            what: "direct product arity",
            value: arity,
            cap: MAX_TABLE_ARITY,
        });
    }
    if out_len > 64 {
        return Err(Error::SizeCap {
            what: "direct product output length",
            value: out_len,
            cap: 64,
        });
    }
    let n = f.arity();
    let block_mask = (1u64 << n) - 1;
    let f = f.clone();
    TruthTable::from_index_fn(arity, out_len, move |x| {
        let mut out = 0u64;
        for block in 0..t {
            let shift = (t - 1 - block) * n;
            out = (out << f.out_len()) | f.eval_index((x >> shift) & block_mask);
        }
        out
    })
}

/// Output width for the `c`-truncating hash of an `n`-input function:
/// `m = n + (6c + 6) * ceil(log2 n)`.
pub fn hash_output_len(n: usize, c: u32) -> usize {
    n + (6 * c as usize + 6) * ceil_log2(n as u64) as usize
}

/// The `c`-truncating hash of a function `f`: on input `(h, i, x)` the
/// output is `h . i . f(x) . h(x) restricted to its first i bits`.
///
/// Inputs are one flat bitstring: the hash description (row-major matrix,
/// then offset), then `i` in fixed-width binary (out-of-range values reduce
/// modulo `m + 1`, keeping the function total), then `x`. Tabulated outputs
/// zero-pad the truncated hash to `m` bits; since `i` is copied to the
/// output verbatim, padding preserves the collision structure exactly.
#[derive(Clone, Debug)]
pub struct TruncatingHash {
    base: TruthTable,
    m: usize,
    ilen: usize,
}

impl TruncatingHash {
    pub fn new(base: &TruthTable, m: usize) -> Result<Self> {
        if m == 0 || m > 63 {
            return Err(Error::InvalidParameter(format!(
                "truncating hash width {m} not in 1..=63"
            )));
        }
        Ok(Self {
            base: base.clone(),
            m,
            ilen: ceil_log2(m as u64 + 1) as usize,
        })
    }

    /// Uses the formula width for hardness parameter `c`.
    pub fn with_formula_width(base: &TruthTable, c: u32) -> Result<Self> {
        Self::new(base, hash_output_len(base.arity(), c))
    }

    pub fn base(&self) -> &TruthTable {
        &self.base
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Fixed width of the truncation-level field.
    pub fn ilen(&self) -> usize {
        self.ilen
    }

    pub fn description_len(&self) -> usize {
        HashFunction::description_len(self.base.arity(), self.m)
    }

    pub fn arity(&self) -> usize {
        self.description_len() + self.ilen + self.base.arity()
    }

    pub fn out_len(&self) -> usize {
        self.description_len() + self.ilen + self.base.out_len() + self.m
    }

    pub fn encode_input(&self, h: &HashFunction, i: usize, x: &BitString) -> Result<BitString> {
        if x.len() != self.base.arity() {
            return Err(Error::ArityMismatch {
                expected: self.base.arity(),
                got: x.len(),
            });
        }
        if i > self.m {
            return Err(Error::OutOfRange {
                index: i,
                len: self.m,
            });
        }
        Ok(h.encode()
            .concat(&BitString::from_value(i as u64, self.ilen))
            .concat(x))
    }

    /// Decodes `(h, i, x)`; raw `i` fields reduce modulo `m + 1`.
    pub fn decode_input(&self, input: &BitString) -> Result<(HashFunction, usize, BitString)> {
        if input.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: input.len(),
            });
        }
        let desc_len = self.description_len();
        let h = HashFunction::decode(&input.prefix(desc_len)?, self.base.arity(), self.m)?;
        let i = input.slice(desc_len, self.ilen)?.value() as usize % (self.m + 1);
        let x = input.slice(desc_len + self.ilen, self.base.arity())?;
        Ok((h, i, x))
    }

    /// The padded output on decoded parts.
    pub fn eval_parts(&self, h: &HashFunction, i: usize, x: &BitString) -> Result<BitString> {
        let fingerprint = h.eval_prefix(x, i)?;
        let padding = BitString::from_value(0, self.m - i);
        Ok(h.encode()
            .concat(&BitString::from_value(i as u64, self.ilen))
            .concat(&self.base.eval(x)?)
            .concat(&fingerprint)
            .concat(&padding))
    }

    /// The padded image atom for a claimed output `y` and fingerprint `w`
    /// of length `i`; this is what inverters query.
    pub fn encode_image(
        &self,
        h: &HashFunction,
        i: usize,
        y: &BitString,
        w: &BitString,
    ) -> Result<BitString> {
        if y.len() != self.base.out_len() {
            return Err(Error::LengthMismatch {
                expected: self.base.out_len(),
                got: y.len(),
            });
        }
        if w.len() != i || i > self.m {
            return Err(Error::LengthMismatch {
                expected: i,
                got: w.len(),
            });
        }
        let padding = BitString::from_value(0, self.m - i);
        Ok(h.encode()
            .concat(&BitString::from_value(i as u64, self.ilen))
            .concat(y)
            .concat(w)
            .concat(&padding))
    }

    /// Tabulates the whole function; errors if the arity exceeds the cap.
    pub fn table(&self) -> Result<TruthTable> {
        let arity = self.arity();
        if arity > MAX_TABLE_ARITY {
            return Err(Error::SizeCap {
                what: "truncating hash arity",
                value: arity,
                cap: MAX_TABLE_ARITY,
            });
        }
        let this = self.clone();
        TruthTable::from_index_fn(arity, self.out_len(), move |raw| {
            let input = BitString::from_value(raw, this.arity());
            let (h, i, x) = this.decode_input(&input).expect("input length fixed");
            this.eval_parts(&h, i, &x).expect("parts are consistent").value()
        })
    }
}

impl TruncatingHash {
    /// The unpadded truncating-hash string `h . i . f(x) . h(x)|_i` for
    /// direct inspection; tabulated forms pad the final field to `m` bits.
    pub fn eval_unpadded(&self, h: &HashFunction, i: usize, x: &BitString) -> Result<BitString> {
        if i > self.m {
            return Err(Error::OutOfRange {
                index: i,
                len: self.m,
            });
        }
        Ok(h.encode()
            .concat(&BitString::from_value(i as u64, self.ilen))
            .concat(&self.base.eval(x)?)
            .concat(&h.eval_prefix(x, i)?))
    }
}

/// An oracle that maps images of a fixed function to preimages, possibly
/// failing. Stands in for natural-property-derived inverters.
pub trait InverterOracle: Send + Sync {
    fn invert(&self, y: &BitString, rng: &mut ChaCha8Rng) -> Option<BitString>;

    /// Deterministic support indicator: whether inversion of `y` can ever
    /// succeed. For composite oracles this may be a necessary condition
    /// rather than a guarantee; see the implementors.
    fn answers(&self, y: &BitString) -> bool;

    /// Declared success probability over images of uniform inputs.
    fn success_bound(&self) -> Rational;
}

/// Rejection-samples a uniform preimage of `y` under `f` from explicit
/// coins: each round draws `ceil(log2 |preimages|)` bits and accepts values
/// below the preimage count.
///
/// Conditioned on success the output is exactly uniform over the preimage
/// set; failure needs every round to reject, so for `rounds` rounds the
/// failure probability is below `2^-rounds`. Fails immediately when `y` has
/// no preimage.
pub fn brute_force_invert(
    f: &TruthTable,
    y: &BitString,
    coins: &BitString,
    rounds: u32,
) -> Result<InversionOutcome> {
    if y.len() != f.out_len() {
        return Err(Error::LengthMismatch {
            expected: f.out_len(),
            got: y.len(),
        });
    }
    let preimages = f.preimages(y)?;
    if preimages.is_empty() {
        return Ok(InversionOutcome::Fail);
    }
    let window = ceil_log2(preimages.len() as u64) as usize;
    if coins.len() != window * rounds as usize {
        return Err(Error::CoinLength {
            expected: window * rounds as usize,
            got: coins.len(),
        });
    }
    for round in 0..rounds as usize {
        let draw = coins.value_range(round * window, window)?;
        if (draw as usize) < preimages.len() {
            return Ok(InversionOutcome::Preimage(preimages[draw as usize].clone()));
        }
    }
    Ok(InversionOutcome::Fail)
}

/// A perfect inverter oracle backed by a precomputed preimage index;
/// returns a uniformly random preimage of any image.
pub struct BruteForceOracle {
    arity: usize,
    out_len: usize,
    index: PreimageIndex,
}

impl BruteForceOracle {
    pub fn new(table: &TruthTable) -> Self {
        Self {
            arity: table.arity(),
            out_len: table.out_len(),
            index: table.preimage_index(),
        }
    }

    pub fn index(&self) -> &PreimageIndex {
        &self.index
    }
}

impl InverterOracle for BruteForceOracle {
    fn invert(&self, y: &BitString, rng: &mut ChaCha8Rng) -> Option<BitString> {
        if y.len() != self.out_len {
            return None;
        }
        let preimages = self.index.preimages_of(y.value());
        if preimages.is_empty() {
            return None;
        }
        let pick = preimages[rng.random_range(0..preimages.len())];
        Some(BitString::from_value(pick, self.arity))
    }

    fn answers(&self, y: &BitString) -> bool {
        y.len() == self.out_len && self.index.contains(y.value())
    }

    fn success_bound(&self) -> Rational {
        Rational::one()
    }
}

/// A brute-force oracle deliberately restricted to a fixed fraction of the
/// underlying function's distinct images, selected by a seeded shuffle.
pub struct RestrictedOracle {
    inner: BruteForceOracle,
    allowed: HashSet<u64>,
    fraction: Rational,
}

impl RestrictedOracle {
    /// Keeps `ceil(count * keep_num / keep_den)` of the distinct images.
    pub fn restrict_to_fraction(
        table: &TruthTable,
        keep_num: u64,
        keep_den: u64,
        seed: u64,
    ) -> Result<Self> {
        if keep_num == 0 || keep_num > keep_den {
            return Err(Error::InvalidParameter(format!(
                "kept fraction {keep_num}/{keep_den} not in (0,1]"
            )));
        }
        let inner = BruteForceOracle::new(table);
        let mut images = inner.index.images();
        let keep = ((images.len() as u64 * keep_num).div_ceil(keep_den)) as usize;
        let mut rng = crate::rng::substream(seed, "restricted-oracle");
        images.shuffle(&mut rng);
        let allowed = images.into_iter().take(keep).collect();
        Ok(Self {
            inner,
            allowed,
            fraction: Rational::new(BigInt::from(keep_num), BigInt::from(keep_den)),
        })
    }

    pub fn allowed_count(&self) -> usize {
        self.allowed.len()
    }
}

impl InverterOracle for RestrictedOracle {
    fn invert(&self, y: &BitString, rng: &mut ChaCha8Rng) -> Option<BitString> {
        if y.len() == self.inner.out_len && self.allowed.contains(&y.value()) {
            self.inner.invert(y, rng)
        } else {
            None
        }
    }

    fn answers(&self, y: &BitString) -> bool {
        y.len() == self.inner.out_len && self.allowed.contains(&y.value())
    }

    fn success_bound(&self) -> Rational {
        self.fraction.clone()
    }
}

/// An oracle that never answers.
#[derive(Default)]
pub struct AlwaysFailOracle;

impl InverterOracle for AlwaysFailOracle {
    fn invert(&self, _y: &BitString, _rng: &mut ChaCha8Rng) -> Option<BitString> {
        None
    }

    fn answers(&self, _y: &BitString) -> bool {
        false
    }

    fn success_bound(&self) -> Rational {
        Rational::zero()
    }
}

/// Repetition schedule for weak-to-strong amplification:
/// `ceil(2 * t * ln(2 / target_failure) / weak_success)`.
pub fn amplification_reps(
    weak_success: &Rational,
    target_failure: &Rational,
    t: usize,
) -> Result<usize> {
    let eta = weak_success.to_f64().unwrap_or(0.0);
    let fail = target_failure.to_f64().unwrap_or(0.0);
    if !(eta > 0.0 && eta <= 1.0) || !(fail > 0.0 && fail < 1.0) {
        return Err(Error::InvalidParameter(
            "amplification needs weak success in (0,1] and target failure in (0,1)".into(),
        ));
    }
    Ok(((2.0 * t as f64 * (2.0 / fail).ln() / eta).ceil() as usize).max(1))
}

/// Strong inverter for `base` built from a weak inverter for the `t`-fold
/// direct product of `base`.
///
/// Each repetition plants the target image at a uniformly random block
/// position among images of freshly drawn inputs, queries the weak oracle
/// on the composite image, and accepts when the recovered block maps back
/// to the target.
pub struct AmplifiedInverter {
    base: TruthTable,
    t: usize,
    weak: Arc<dyn InverterOracle>,
    reps: usize,
    base_index: PreimageIndex,
}

impl AmplifiedInverter {
    pub fn new(
        base: &TruthTable,
        t: usize,
        weak: Arc<dyn InverterOracle>,
        reps: usize,
    ) -> Result<Self> {
        if t == 0 || reps == 0 {
            return Err(Error::InvalidParameter(
                "amplification needs t >= 1 and reps >= 1".into(),
            ));
        }
        Ok(Self {
            base: base.clone(),
            t,
            weak,
            reps,
            base_index: base.preimage_index(),
        })
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    fn composite_query(&self, planted: usize, y_value: u64, fresh: &[u64]) -> BitString {
        let out = self.base.out_len();
        let mut value = 0u64;
        let mut fresh_iter = fresh.iter();
        for block in 0..self.t {
            let block_value = if block == planted {
                y_value
            } else {
                self.base.eval_index(*fresh_iter.next().expect("t-1 fresh blocks"))
            };
            value = (value << out) | block_value;
        }
        BitString::from_value(value, self.t * out)
    }
}

impl InverterOracle for AmplifiedInverter {
    fn invert(&self, y: &BitString, rng: &mut ChaCha8Rng) -> Option<BitString> {
        if y.len() != self.base.out_len() {
            return None;
        }
        let n = self.base.arity();
        let y_value = y.value();
        for _ in 0..self.reps {
            let planted = rng.random_range(0..self.t);
            let fresh: Vec<u64> = (0..self.t - 1)
                .map(|_| rng.random_range(0..1u64 << n))
                .collect();
            let query = self.composite_query(planted, y_value, &fresh);
            if let Some(preimage) = self.weak.invert(&query, rng) {
                if preimage.len() != self.t * n {
                    continue;
                }
                let candidate = preimage
                    .slice(planted * n, n)
                    .expect("block within preimage");
                if self.base.eval_index(candidate.value()) == y_value {
                    return Some(candidate);
                }
            }
        }
        None
    }

    /// Necessary condition only: the target must be in the base image.
    fn answers(&self, y: &BitString) -> bool {
        y.len() == self.base.out_len() && self.base_index.contains(y.value())
    }

    fn success_bound(&self) -> Rational {
        Rational::one()
    }
}

/// Exact single-repetition success probability of the planting strategy for
/// target image `y`: the probability, over a uniform planted position and
/// fresh blocks, that the weak oracle answers the composite query.
pub fn exact_per_rep_success(
    base: &TruthTable,
    t: usize,
    weak: &dyn InverterOracle,
    y: &BitString,
) -> Result<Rational> {
    let n = base.arity();
    let fresh_bits = n * (t - 1);
    if fresh_bits > DEFAULT_ENUM_CAP {
        return Err(Error::SizeCap {
            what: "fresh-block coin length",
            value: fresh_bits,
            cap: DEFAULT_ENUM_CAP,
        });
    }
    let out = base.out_len();
    let y_value = y.value();
    let block_mask = (1u64 << n) - 1;
    let mut hits = 0u64;
    for planted in 0..t {
        for fresh in 0..1u64 << fresh_bits {
            let mut value = 0u64;
            let mut consumed = 0;
            for block in 0..t {
                let block_value = if block == planted {
                    y_value
                } else {
                    let shift = (t - 2 - consumed) * n;
                    consumed += 1;
                    base.eval_index((fresh >> shift) & block_mask)
                };
                value = (value << out) | block_value;
            }
            if weak.answers(&BitString::from_value(value, t * out)) {
                hits += 1;
            }
        }
    }
    Ok(Rational::new(
        BigInt::from(hits),
        BigInt::from(t as u64) * (BigInt::one() << fresh_bits),
    ))
}

/// Exact success probability of the amplified inverter over a uniform input
/// to the base function: the average over `x` of
/// `1 - (1 - per_rep_success(f(x)))^reps`.
pub fn exact_amplified_success(
    base: &TruthTable,
    t: usize,
    weak: &dyn InverterOracle,
    reps: usize,
) -> Result<Rational> {
    let index = base.preimage_index();
    let mut total = Rational::zero();
    for y_value in index.images() {
        let y = BitString::from_value(y_value, base.out_len());
        let rho = exact_per_rep_success(base, t, weak, &y)?;
        let success = Rational::one() - pow_rational(&(Rational::one() - rho), reps as u64);
        total += success * Rational::from_integer(index.preimages_of(y_value).len().into());
    }
    Ok(total / Rational::from_integer(BigInt::one() << base.arity()))
}

/// Distributional inverter for a function `f` built from a strong inverter
/// for its truncating hash.
///
/// Each round draws a fresh hash, a uniform truncation level `i` in
/// `0..=m`, and a uniform `i`-bit fingerprint, then asks the strong
/// inverter for a preimage of the assembled image and returns its `x`
/// component after verifying consistency. Failure and distance bounds are
/// declared engineering targets; the harness measures achieved values.
pub struct HashInverter {
    th: TruncatingHash,
    strong: Arc<dyn InverterOracle>,
    rounds: usize,
    declared_fail: Rational,
    declared_distance: Rational,
}

impl HashInverter {
    pub fn new(
        base: &TruthTable,
        m: usize,
        strong: Arc<dyn InverterOracle>,
        rounds: usize,
        declared_fail: Rational,
        declared_distance: Rational,
    ) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidParameter("rounds must be positive".into()));
        }
        Ok(Self {
            th: TruncatingHash::new(base, m)?,
            strong,
            rounds,
            declared_fail,
            declared_distance,
        })
    }

    pub fn truncating_hash(&self) -> &TruncatingHash {
        &self.th
    }

    fn one_round(&self, y: &BitString, rng: &mut ChaCha8Rng) -> Result<Option<BitString>> {
        let base = self.th.base();
        let m = self.th.m();
        let h = HashFunction::random(base.arity(), m, rng);
        let i = rng.random_range(0..=m);
        let w = random_bits(rng, m).prefix(i)?;
        let query = self.th.encode_image(&h, i, y, &w)?;
        if let Some(preimage) = self.strong.invert(&query, rng) {
            if preimage.len() != self.th.arity() {
                return Ok(None);
            }
            let (h2, i2, x) = self.th.decode_input(&preimage)?;
            // Inconsistent recoveries count as round failures.
            if h2 == h && i2 == i && base.eval(&x)? == *y && h.eval_prefix(&x, i)? == w {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }
}

impl DistributionalInverter for HashInverter {
    /// The explicit coin string seeds the per-call randomness stream.
    fn coin_length(&self) -> usize {
        64
    }

    fn invert(&self, y: &BitString, coins: &BitString) -> Result<InversionOutcome> {
        if coins.len() != 64 {
            return Err(Error::CoinLength {
                expected: 64,
                got: coins.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(coins.value());
        self.invert_with_rng(y, &mut rng)
    }

    fn invert_with_rng(&self, y: &BitString, rng: &mut ChaCha8Rng) -> Result<InversionOutcome> {
        if y.len() != self.th.base().out_len() {
            return Err(Error::LengthMismatch {
                expected: self.th.base().out_len(),
                got: y.len(),
            });
        }
        for _ in 0..self.rounds {
            if let Some(x) = self.one_round(y, rng)? {
                return Ok(InversionOutcome::Preimage(x));
            }
        }
        Ok(InversionOutcome::Fail)
    }

    fn fail_bound(&self) -> Rational {
        self.declared_fail.clone()
    }

    fn distance_bound(&self) -> Rational {
        self.declared_distance.clone()
    }
}

/// Parameters for the full amplification chain. `None` fields resolve to
/// the formula values; desk-scale runs override them and the resolution is
/// reported for logging.
#[derive(Clone, Debug)]
pub struct ChainParams {
    /// Target statistical distance `1/p(n)` of the resulting inverter.
    pub target_distance: Rational,
    pub c_override: Option<u32>,
    pub m_override: Option<usize>,
    pub t_override: Option<usize>,
    pub reps_override: Option<usize>,
    /// Rounds of the final hashing stage.
    pub rounds: usize,
    /// Declared failure bound of the resulting inverter (engineering
    /// target; measured by the harness).
    pub declared_fail: Rational,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            target_distance: crate::bits::rat(1, 4),
            c_override: None,
            m_override: None,
            t_override: None,
            reps_override: None,
            rounds: 16,
            declared_fail: crate::bits::rat(1, 20),
        }
    }
}

/// The resolved chain configuration, echoed into reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainResolution {
    pub n: usize,
    pub c: u32,
    pub m: usize,
    pub t: usize,
    pub reps: usize,
    pub rounds: usize,
    pub hash_arity: usize,
    pub hash_out_len: usize,
    pub product_arity: usize,
    pub product_out_len: usize,
    pub overridden: bool,
}

/// A distributional inverter assembled by the full chain, together with the
/// resolved parameters it was built from.
pub struct ChainInverter {
    inner: HashInverter,
    pub resolution: ChainResolution,
}

impl DistributionalInverter for ChainInverter {
    fn coin_length(&self) -> usize {
        self.inner.coin_length()
    }

    fn invert(&self, y: &BitString, coins: &BitString) -> Result<InversionOutcome> {
        self.inner.invert(y, coins)
    }

    fn invert_with_rng(&self, y: &BitString, rng: &mut ChaCha8Rng) -> Result<InversionOutcome> {
        self.inner.invert_with_rng(y, rng)
    }

    fn fail_bound(&self) -> Rational {
        self.inner.fail_bound()
    }

    fn distance_bound(&self) -> Rational {
        self.inner.distance_bound()
    }
}

/// Smallest hardness exponent consistent with the target distance: the
/// largest `c >= 1` with `n^c < 2 / target`.
fn resolve_hardness_exponent(n: usize, target: &Rational) -> u32 {
    let bound = Rational::from_integer(BigInt::from(2)) / target;
    let mut c = 1u32;
    while c < 16 {
        let next = pow_rational(&Rational::from_integer(BigInt::from(n as u64)), (c + 1) as u64);
        if next < bound {
            c += 1;
        } else {
            break;
        }
    }
    c
}

/// Builds the full chain for a tabulated sampler: truncating hash, direct
/// product, weak oracle on the product, weak-to-strong amplification, and
/// the hashing stage yielding a distributional inverter for the sampler.
///
/// The oracle builder receives the direct-product table, mirroring an
/// oracle that weakly inverts any supplied function. All derived arities
/// must fit the tabulation cap; oversized formula parameters are reported
/// as size errors so desk-scale runs override them explicitly.
pub fn chain_distributional_inverter(
    sampler_table: &TruthTable,
    params: &ChainParams,
    oracle_builder: &dyn Fn(&TruthTable) -> Result<Arc<dyn InverterOracle>>,
) -> Result<ChainInverter> {
    let n = sampler_table.arity();
    let c = params
        .c_override
        .unwrap_or_else(|| resolve_hardness_exponent(n, &params.target_distance));
    let m = params.m_override.unwrap_or_else(|| hash_output_len(n, c));
    let t = match params.t_override {
        Some(t) => t,
        None => (n as u64)
            .checked_pow(6 * c)
            .and_then(|t| usize::try_from(t).ok())
            .ok_or(Error::SizeCap {
                what: "direct product width",
                value: usize::MAX,
                cap: MAX_TABLE_ARITY,
            })?,
    };
    let overridden =
        params.c_override.is_some() || params.m_override.is_some() || params.t_override.is_some();

    let th = TruncatingHash::new(sampler_table, m)?;
    let hash_table = th.table()?;
    let product = direct_product(&hash_table, t)?;
    let weak = oracle_builder(&product)?;

    // Strong inversion target failure follows the chain's requirement on
    // the product's inverter.
    let target_failure = pow_rational(
        &Rational::new(BigInt::one(), BigInt::from(n.max(2) as u64)),
        6 * c as u64,
    );
    let reps = match params.reps_override {
        Some(r) => r,
        None => amplification_reps(&weak.success_bound(), &target_failure, t)?,
    };
    let strong = Arc::new(AmplifiedInverter::new(&hash_table, t, weak, reps)?);

    let resolution = ChainResolution {
        n,
        c,
        m,
        t,
        reps,
        rounds: params.rounds,
        hash_arity: hash_table.arity(),
        hash_out_len: hash_table.out_len(),
        product_arity: product.arity(),
        product_out_len: product.out_len(),
        overridden,
    };
    let inner = HashInverter::new(
        sampler_table,
        m,
        strong,
        params.rounds,
        params.declared_fail.clone(),
        params.target_distance.clone(),
    )?;
    Ok(ChainInverter { inner, resolution })
}

/// Empirical conditional distribution of an inverter's outputs for a fixed
/// image, over `trials` seeded runs, in tagged-atom form (failures under
/// the reserved atom).
pub fn empirical_conditional(
    inverter: &dyn DistributionalInverter,
    y: &BitString,
    trials: u64,
    rng: &mut ChaCha8Rng,
) -> Result<ExactDistribution> {
    let mut counts: std::collections::BTreeMap<BitString, u64> = std::collections::BTreeMap::new();
    for _ in 0..trials {
        match inverter.invert_with_rng(y, rng)? {
            InversionOutcome::Preimage(r) => *counts.entry(success_atom(&r)).or_default() += 1,
            InversionOutcome::Fail => *counts.entry(fail_atom()).or_default() += 1,
        }
    }
    ExactDistribution::from_counts(counts, trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::rat;
    use crate::rng::substream;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn direct_product_examples() {
        let and = TruthTable::and(2).unwrap();
        assert_eq!(direct_product(&and, 1).unwrap(), and);

        let not = TruthTable::from_index_fn(1, 1, |x| 1 - x).unwrap();
        let doubled = direct_product(&not, 2).unwrap();
        assert_eq!(doubled.eval(&bs("01")).unwrap(), bs("10"));

        let doubled = direct_product(&and, 2).unwrap();
        assert_eq!(doubled.eval(&bs("1101")).unwrap(), bs("10"));
    }

    #[test]
    fn direct_product_projects_blockwise() {
        let mut rng = substream(21, "product");
        let f = TruthTable::random(3, 2, &mut rng).unwrap();
        let t = 3;
        let product = direct_product(&f, t).unwrap();
        for x in 0..1u64 << (3 * t) {
            let input = BitString::from_value(x, 3 * t);
            let output = product.eval(&input).unwrap();
            for block in 0..t {
                let x_block = input.slice(block * 3, 3).unwrap();
                let y_block = output.slice(block * 2, 2).unwrap();
                assert_eq!(f.eval(&x_block).unwrap(), y_block);
            }
        }
    }

    #[test]
    fn direct_product_respects_caps() {
        let f = TruthTable::identity(13).unwrap();
        assert!(matches!(direct_product(&f, 2), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn hash_formula_width() {
        assert_eq!(hash_output_len(3, 1), 27);
        assert_eq!(hash_output_len(4, 1), 28);
        assert_eq!(hash_output_len(4, 2), 40);
    }

    #[test]
    fn hash_encode_decode_round_trip() {
        let mut rng = substream(31, "hash");
        for _ in 0..20 {
            let h = HashFunction::random(4, 3, &mut rng);
            let decoded = HashFunction::decode(&h.encode(), 4, 3).unwrap();
            assert_eq!(h, decoded);
        }
    }

    #[test]
    fn hash_is_affine() {
        let mut rng = substream(32, "hash-affine");
        let h = HashFunction::random(5, 4, &mut rng);
        let zero_image = h.eval_index(0);
        for x in 0..32u64 {
            for y in 0..32u64 {
                // h(x) xor h(y) xor h(0) == h(x xor y)
                let lhs = h.eval_index(x) ^ h.eval_index(y) ^ zero_image;
                assert_eq!(lhs, h.eval_index(x ^ y));
            }
        }
    }

    #[test]
    fn truncating_hash_examples() {
        let f = TruthTable::parity(3).unwrap();
        let th = TruncatingHash::new(&f, 5).unwrap();
        let mut rng = substream(33, "th");
        let h = HashFunction::random(3, 5, &mut rng);
        let x = bs("101");

        // i = 0: empty fingerprint.
        let out = th.eval_unpadded(&h, 0, &x).unwrap();
        let expected = h
            .encode()
            .concat(&BitString::from_value(0, th.ilen()))
            .concat(&f.eval(&x).unwrap());
        assert_eq!(out, expected);

        // i = m: the full hash value is appended.
        let out = th.eval_unpadded(&h, 5, &x).unwrap();
        let expected = h
            .encode()
            .concat(&BitString::from_value(5, th.ilen()))
            .concat(&f.eval(&x).unwrap())
            .concat(&h.eval(&x).unwrap());
        assert_eq!(out, expected);
    }

    #[test]
    fn truncating_hash_table_matches_eval_with_padding() {
        let f = TruthTable::and(2).unwrap();
        let th = TruncatingHash::new(&f, 1).unwrap();
        let table = th.table().unwrap();
        assert_eq!(table.arity(), th.arity());
        for raw in 0..table.size() {
            let input = BitString::from_value(raw, th.arity());
            let (h, i, x) = th.decode_input(&input).unwrap();
            let unpadded = th.eval_unpadded(&h, i, &x).unwrap();
            let padded = table.eval(&input).unwrap();
            assert_eq!(padded.prefix(unpadded.len()).unwrap(), unpadded);
            // Padding bits are zero.
            for pos in unpadded.len()..padded.len() {
                assert!(!padded.bit(pos));
            }
        }
    }

    #[test]
    fn out_of_range_truncation_levels_reduce() {
        let f = TruthTable::and(2).unwrap();
        // m = 2 gives ilen = 2, so raw value 3 reduces to 0.
        let th = TruncatingHash::new(&f, 2).unwrap();
        let h = HashFunction::random(2, 2, &mut substream(34, "th-mod"));
        let input = th.encode_input(&h, 0, &bs("11")).unwrap();
        // Patch the i field to the out-of-range raw value 3.
        let desc_len = th.description_len();
        let mut bits: Vec<bool> = input.iter().collect();
        bits[desc_len] = true;
        bits[desc_len + 1] = true;
        let patched = BitString::from_bits(bits);
        let (_, i, _) = th.decode_input(&patched).unwrap();
        assert_eq!(i, 0);
    }

    #[test]
    fn brute_force_invert_examples() {
        let and = TruthTable::and(2).unwrap();
        // Unique preimage: window is zero bits wide, success is immediate.
        let out = brute_force_invert(&and, &bs("1"), &BitString::empty(), 2).unwrap();
        assert_eq!(out, InversionOutcome::Preimage(bs("11")));

        // Outside the image of OR-of-nothing: y = "1" for constant-0.
        let zero = TruthTable::constant(2, false).unwrap();
        let out = brute_force_invert(&zero, &bs("1"), &BitString::empty(), 2).unwrap();
        assert!(out.is_fail());
    }

    #[test]
    fn brute_force_invert_is_conditionally_uniform() {
        // Three preimages of "0" under AND2: enumerate all coins.
        let and = TruthTable::and(2).unwrap();
        let rounds = 3u32;
        let window = 2usize;
        let mut counts: std::collections::BTreeMap<u64, u64> = Default::default();
        let mut fails = 0u64;
        for z in 0..1u64 << (window * rounds as usize) {
            let coins = BitString::from_value(z, window * rounds as usize);
            match brute_force_invert(&and, &bs("0"), &coins, rounds).unwrap() {
                InversionOutcome::Preimage(r) => *counts.entry(r.value()).or_default() += 1,
                InversionOutcome::Fail => fails += 1,
            }
        }
        assert_eq!(counts.keys().copied().collect::<Vec<_>>(), vec![0, 1, 2]);
        let values: Vec<u64> = counts.values().copied().collect();
        assert!(values.windows(2).all(|w| w[0] == w[1]));
        // Failure requires all rounds to reject: (1/4)^3 of the coin space.
        assert_eq!(fails, 1);
    }

    #[test]
    fn amplified_inverter_with_perfect_oracle() {
        let mut rng = substream(41, "amp");
        let f = TruthTable::random(4, 4, &mut rng).unwrap();
        let product = direct_product(&f, 2).unwrap();
        let weak: Arc<dyn InverterOracle> = Arc::new(BruteForceOracle::new(&product));
        let strong = AmplifiedInverter::new(&f, 2, weak, 1).unwrap();
        // One repetition suffices: per-repetition success is 1.
        let success = exact_amplified_success(&f, 2, &BruteForceOracle::new(&product), 1).unwrap();
        assert_eq!(success, Rational::one());
        for x in 0..16u64 {
            let y = BitString::from_value(f.eval_index(x), 4);
            let got = strong.invert(&y, &mut rng).unwrap();
            assert_eq!(f.eval(&got).unwrap(), y);
        }
    }

    #[test]
    fn amplified_inverter_with_always_fail_oracle() {
        let f = TruthTable::identity(3).unwrap();
        let strong = AmplifiedInverter::new(&f, 2, Arc::new(AlwaysFailOracle), 8).unwrap();
        let mut rng = substream(42, "amp-fail");
        for x in 0..8u64 {
            assert!(strong.invert(&BitString::from_value(x, 3), &mut rng).is_none());
        }
        let success = exact_amplified_success(&f, 2, &AlwaysFailOracle, 8).unwrap();
        assert_eq!(success, Rational::zero());
    }

    #[test]
    fn amplified_success_is_monotone_in_reps() {
        let mut rng = substream(43, "amp-mono");
        let f = TruthTable::random(4, 4, &mut rng).unwrap();
        let product = direct_product(&f, 2).unwrap();
        let weak = RestrictedOracle::restrict_to_fraction(&product, 1, 4, 99).unwrap();
        let mut last = Rational::zero();
        for reps in [1usize, 2, 4, 8, 16] {
            let success = exact_amplified_success(&f, 2, &weak, reps).unwrap();
            assert!(success >= last);
            last = success;
        }
    }

    #[test]
    fn hash_inverter_on_injective_base_returns_the_preimage() {
        let base = TruthTable::identity(3).unwrap();
        let strong: Arc<dyn InverterOracle> = {
            let th = TruncatingHash::new(&base, 2).unwrap();
            Arc::new(BruteForceOracle::new(&th.table().unwrap()))
        };
        let inverter = HashInverter::new(
            &base,
            2,
            strong,
            16,
            rat(1, 20),
            rat(1, 10),
        )
        .unwrap();
        let mut rng = substream(44, "hash-inv");
        for x in 0..8u64 {
            let y = BitString::from_value(x, 3);
            match inverter.invert_with_rng(&y, &mut rng).unwrap() {
                InversionOutcome::Preimage(r) => assert_eq!(r, y),
                InversionOutcome::Fail => panic!("unexpected failure on injective base"),
            }
        }
    }

    #[test]
    fn hash_inverter_with_always_fail_strong_oracle() {
        let base = TruthTable::identity(3).unwrap();
        let inverter = HashInverter::new(
            &base,
            2,
            Arc::new(AlwaysFailOracle),
            4,
            Rational::one(),
            Rational::one(),
        )
        .unwrap();
        let mut rng = substream(45, "hash-inv-fail");
        assert!(inverter
            .invert_with_rng(&bs("101"), &mut rng)
            .unwrap()
            .is_fail());
    }

    #[test]
    fn chain_on_identity_sampler_is_exact_on_success() {
        let sampler_table = TruthTable::identity(2).unwrap();
        let params = ChainParams {
            m_override: Some(1),
            t_override: Some(2),
            rounds: 32,
            ..ChainParams::default()
        };
        let chain = chain_distributional_inverter(&sampler_table, &params, &|g| {
            Ok(Arc::new(BruteForceOracle::new(g)) as Arc<dyn InverterOracle>)
        })
        .unwrap();
        assert_eq!(chain.resolution.t, 2);
        assert!(chain.resolution.overridden);
        let mut rng = substream(46, "chain-id");
        let mut successes = 0;
        for _ in 0..200 {
            let y = BitString::from_value(rng.random_range(0..4), 2);
            match chain.invert_with_rng(&y, &mut rng).unwrap() {
                InversionOutcome::Preimage(r) => {
                    assert_eq!(r, y);
                    successes += 1;
                }
                InversionOutcome::Fail => {}
            }
        }
        // 32 rounds at per-round success >= 1/(m+1) = 1/2 leave failures
        // vanishingly rare.
        assert!(successes >= 199);
    }

    #[test]
    fn chain_with_always_fail_oracle_always_fails() {
        let sampler_table = TruthTable::identity(2).unwrap();
        let params = ChainParams {
            m_override: Some(1),
            t_override: Some(2),
            reps_override: Some(4),
            rounds: 4,
            ..ChainParams::default()
        };
        let chain = chain_distributional_inverter(&sampler_table, &params, &|_| {
            Ok(Arc::new(AlwaysFailOracle) as Arc<dyn InverterOracle>)
        })
        .unwrap();
        let mut rng = substream(47, "chain-fail");
        for y in 0..4u64 {
            assert!(chain
                .invert_with_rng(&BitString::from_value(y, 2), &mut rng)
                .unwrap()
                .is_fail());
        }
    }

    #[test]
    fn chain_rejects_oversized_formula_parameters() {
        // Formula parameters at n = 4 blow past the tabulation cap, which is
        // reported as a size error rather than silently shrunk.
        let sampler_table = TruthTable::identity(4).unwrap();
        let result = chain_distributional_inverter(
            &sampler_table,
            &ChainParams::default(),
            &|g| Ok(Arc::new(BruteForceOracle::new(g)) as Arc<dyn InverterOracle>),
        );
        assert!(matches!(result, Err(Error::SizeCap { .. })));
    }

    #[test]
    fn hardness_exponent_resolution() {
        // n = 3, target 1/4: need n^c < 8, so c = 1.
        assert_eq!(resolve_hardness_exponent(3, &rat(1, 4)), 1);
        // n = 2, target 1/100: 2^c < 200 allows c = 7.
        assert_eq!(resolve_hardness_exponent(2, &rat(1, 100)), 7);
    }
}
