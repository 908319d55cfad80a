//! Bitstrings, truth tables, and counted membership-query oracles.
//!
//! A [`BitString`] is an ordered sequence of bits; its integer value is read
//! most-significant-bit first, and that convention is used everywhere a
//! string is interpreted as a number (table indices, dyadic numerators,
//! comparison of coin strings against biases). A [`TruthTable`] represents a
//! total function `{0,1}^n -> {0,1}^out_len` exhaustively, and a
//! [`QueryOracle`] wraps a function behind a membership-query interface with
//! an exact, thread-safe query counter.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;

use crate::error::{Error, Result};

/// Exact rational arithmetic; carries every probability in the crate.
pub type Rational = num_rational::BigRational;

/// `num / den` as an exact rational.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `num / 2^k` as an exact rational.
pub fn rat_pow2(num: u64, k: u32) -> Rational {
    Rational::new(BigInt::from(num), BigInt::one() << k)
}

/// Lossy conversion for reporting; exact values should be kept rational.
pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `base^exp` by square-and-multiply.
pub fn pow_rational(base: &Rational, mut exp: u64) -> Rational {
    let mut result = Rational::one();
    let mut acc = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result *= &acc;
        }
        exp >>= 1;
        if exp > 0 {
            acc = &acc * &acc;
        }
    }
    result
}

/// True when `r` lies in the open interval (0, 1).
pub fn is_open_unit(r: &Rational) -> bool {
    r.is_positive() && *r < Rational::one()
}

/// Smallest `c` with `2^c >= x`, for `x >= 1`. `ceil_log2(1) == 0`.
pub fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    64 - (x - 1).leading_zeros().min(64)
}

/// Number of bits in the binary representation of `x >= 1`.
pub fn bit_length(x: u64) -> u32 {
    debug_assert!(x >= 1);
    64 - x.leading_zeros()
}

/// An ordered, possibly empty sequence of bits.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn empty() -> Self {
        Self { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The `len`-bit big-endian encoding of `value`.
    ///
    /// Panics if `len > 64` or if `value` does not fit in `len` bits.
    pub fn from_value(value: u64, len: usize) -> Self {
        assert!(len <= 64, "bitstring value encoding limited to 64 bits");
        if len < 64 {
            assert!(value < 1u64 << len, "value {value} does not fit in {len} bits");
        }
        let bits = (0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect();
        Self { bits }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        Self {
            bits: (0..len).map(|_| rng.random::<bool>()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn set_bit(&mut self, i: usize, bit: bool) {
        self.bits[i] = bit;
    }

    /// Integer value, most-significant bit first. Panics if `len > 64`.
    /// The empty string has value 0.
    pub fn value(&self) -> u64 {
        assert!(self.len() <= 64, "value() limited to 64 bits");
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    /// Concatenation: the bits of `self` followed by the bits of `other`.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = Vec::with_capacity(self.len() + other.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    /// The first `i` bits.
    pub fn prefix(&self, i: usize) -> Result<BitString> {
        if i > self.len() {
            return Err(Error::OutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(BitString {
            bits: self.bits[..i].to_vec(),
        })
    }

    /// `len` bits starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> Result<BitString> {
        if start + len > self.len() {
            return Err(Error::OutOfRange {
                index: start + len,
                len: self.len(),
            });
        }
        Ok(BitString {
            bits: self.bits[start..start + len].to_vec(),
        })
    }

    /// Integer value of the `len`-bit range starting at `start`, without
    /// materializing the substring. Requires `len <= 64`.
    pub fn value_range(&self, start: usize, len: usize) -> Result<u64> {
        if start + len > self.len() {
            return Err(Error::OutOfRange {
                index: start + len,
                len: self.len(),
            });
        }
        assert!(len <= 64, "value_range limited to 64 bits");
        Ok(self.bits[start..start + len]
            .iter()
            .fold(0, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::Parse(format!("invalid bit character {ch:?}"))),
            }
        }
        Ok(BitString { bits })
    }
}

/// Largest table arity accepted by constructors; beyond this the library
/// refuses to tabulate rather than silently switching to sampling.
pub const MAX_TABLE_ARITY: usize = 24;

/// Default cap on exhaustive enumeration of coin spaces.
pub const DEFAULT_ENUM_CAP: usize = 24;

/// A total function `{0,1}^arity -> {0,1}^out_len`, stored exhaustively.
///
/// Entry `i` is the output on the input whose big-endian value is `i`.
#[derive(Clone, PartialEq, Eq)]
pub struct TruthTable {
    arity: usize,
    out_len: usize,
    outputs: Vec<u64>,
}

impl TruthTable {
    /// Builds a table by evaluating `f` on every input index.
    pub fn from_index_fn(arity: usize, out_len: usize, f: impl Fn(u64) -> u64) -> Result<Self> {
        check_dims(arity, out_len)?;
        let mask = out_mask(out_len);
        let outputs = (0..1u64 << arity).map(|x| f(x) & mask).collect();
        Ok(Self {
            arity,
            out_len,
            outputs,
        })
    }

    /// Builds a single-output table from a Boolean predicate on bitstrings.
    pub fn from_bool_fn(arity: usize, f: impl Fn(&BitString) -> bool) -> Result<Self> {
        Self::from_index_fn(arity, 1, |x| f(&BitString::from_value(x, arity)) as u64)
    }

    /// Builds a table from one output row per input, in index order.
    pub fn from_rows(arity: usize, out_len: usize, rows: &[BitString]) -> Result<Self> {
        check_dims(arity, out_len)?;
        if rows.len() != 1 << arity {
            return Err(Error::LengthMismatch {
                expected: 1 << arity,
                got: rows.len(),
            });
        }
        let mut outputs = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != out_len {
                return Err(Error::LengthMismatch {
                    expected: out_len,
                    got: row.len(),
                });
            }
            outputs.push(row.value());
        }
        Ok(Self {
            arity,
            out_len,
            outputs,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    /// Number of rows, `2^arity`.
    pub fn size(&self) -> u64 {
        1 << self.arity
    }

    pub fn eval_index(&self, x: u64) -> u64 {
        self.outputs[x as usize]
    }

    pub fn eval(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: x.len(),
            });
        }
        Ok(BitString::from_value(self.eval_index(x.value()), self.out_len))
    }

    /// Single-bit evaluation; the table must have `out_len == 1`.
    pub fn eval_bit(&self, x: &BitString) -> Result<bool> {
        if self.out_len != 1 {
            return Err(Error::InvalidParameter(format!(
                "eval_bit on a table with out_len {}",
                self.out_len
            )));
        }
        Ok(self.eval(x)?.value() == 1)
    }

    /// The set `{x : f(x) = y}`, sorted by input value; may be empty.
    pub fn preimages(&self, y: &BitString) -> Result<Vec<BitString>> {
        if y.len() != self.out_len {
            return Err(Error::LengthMismatch {
                expected: self.out_len,
                got: y.len(),
            });
        }
        let target = y.value();
        Ok((0..self.size())
            .filter(|&x| self.eval_index(x) == target)
            .map(|x| BitString::from_value(x, self.arity))
            .collect())
    }

    /// Precomputes the full preimage structure for repeated inversion.
    pub fn preimage_index(&self) -> PreimageIndex {
        let mut map: HashMap<u64, Vec<u64>> = HashMap::new();
        for x in 0..self.size() {
            map.entry(self.eval_index(x)).or_default().push(x);
        }
        PreimageIndex {
            arity: self.arity,
            out_len: self.out_len,
            map,
        }
    }

    /// Distinct output values, sorted.
    pub fn image(&self) -> Vec<u64> {
        let mut values: Vec<u64> = self.outputs.clone();
        values.sort_unstable();
        values.dedup();
        values
    }

    pub fn constant(arity: usize, bit: bool) -> Result<Self> {
        Self::from_index_fn(arity, 1, |_| bit as u64)
    }

    pub fn and(arity: usize) -> Result<Self> {
        Self::from_index_fn(arity, 1, move |x| (x == (1u64 << arity) - 1) as u64)
    }

    pub fn or(arity: usize) -> Result<Self> {
        Self::from_index_fn(arity, 1, |x| (x != 0) as u64)
    }

    pub fn parity(arity: usize) -> Result<Self> {
        Self::from_index_fn(arity, 1, |x| (x.count_ones() & 1) as u64)
    }

    /// Majority; ties on even arity resolve to 0.
    pub fn majority(arity: usize) -> Result<Self> {
        Self::from_index_fn(arity, 1, move |x| (x.count_ones() as usize * 2 > arity) as u64)
    }

    /// The identity map on `arity` bits.
    pub fn identity(arity: usize) -> Result<Self> {
        Self::from_index_fn(arity, arity, |x| x)
    }

    pub fn random<R: Rng + ?Sized>(arity: usize, out_len: usize, rng: &mut R) -> Result<Self> {
        check_dims(arity, out_len)?;
        let mask = out_mask(out_len);
        let outputs = (0..1u64 << arity).map(|_| rng.random::<u64>() & mask).collect();
        Ok(Self {
            arity,
            out_len,
            outputs,
        })
    }

    /// Serializes as a header line `n=<arity> out=<out_len>` followed by the
    /// concatenated output rows, hex-encoded four bits per digit (the final
    /// digit is zero-padded on the right).
    pub fn to_text(&self) -> String {
        let mut text = format!("n={} out={}\n", self.arity, self.out_len);
        let mut nibble = 0u8;
        let mut filled = 0;
        for &row in &self.outputs {
            for pos in (0..self.out_len).rev() {
                nibble = (nibble << 1) | ((row >> pos) & 1) as u8;
                filled += 1;
                if filled == 4 {
                    text.push(char::from_digit(nibble as u32, 16).unwrap());
                    nibble = 0;
                    filled = 0;
                }
            }
        }
        if filled > 0 {
            nibble <<= 4 - filled;
            text.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        text.push('\n');
        text
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header line".into()))?;
        let (arity, out_len) = parse_header(header)?;
        check_dims(arity, out_len)?;
        let data = lines
            .next()
            .ok_or_else(|| Error::Parse("missing table data line".into()))?;
        let total_bits = (1usize << arity) * out_len;
        let expected_digits = total_bits.div_ceil(4);
        if data.len() != expected_digits {
            return Err(Error::Parse(format!(
                "expected {expected_digits} hex digits, got {}",
                data.len()
            )));
        }
        let mut bits = Vec::with_capacity(expected_digits * 4);
        for ch in data.chars() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {ch:?}")))?;
            for pos in (0..4).rev() {
                bits.push((v >> pos) & 1 == 1);
            }
        }
        if bits[total_bits..].iter().any(|&b| b) {
            return Err(Error::Parse("nonzero padding bits".into()));
        }
        let outputs = (0..1usize << arity)
            .map(|i| {
                bits[i * out_len..(i + 1) * out_len]
                    .iter()
                    .fold(0u64, |acc, &b| (acc << 1) | b as u64)
            })
            .collect();
        Ok(Self {
            arity,
            out_len,
            outputs,
        })
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable(n={}, out={})", self.arity, self.out_len)
    }
}

fn check_dims(arity: usize, out_len: usize) -> Result<()> {
    if arity > MAX_TABLE_ARITY {
        return Err(Error::SizeCap {
            what: "truth table arity",
            value: arity,
            cap: MAX_TABLE_ARITY,
        });
    }
    if out_len == 0 || out_len > 64 {
        return Err(Error::InvalidParameter(format!(
            "table output length {out_len} not in 1..=64"
        )));
    }
    Ok(())
}

fn out_mask(out_len: usize) -> u64 {
    if out_len >= 64 {
        u64::MAX
    } else {
        (1u64 << out_len) - 1
    }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let mut arity = None;
    let mut out_len = None;
    for field in header.split_whitespace() {
        if let Some(v) = field.strip_prefix("n=") {
            arity = Some(v.parse().map_err(|_| Error::Parse(format!("bad arity {v:?}")))?);
        } else if let Some(v) = field.strip_prefix("out=") {
            out_len = Some(v.parse().map_err(|_| Error::Parse(format!("bad out_len {v:?}")))?);
        } else {
            return Err(Error::Parse(format!("unexpected header field {field:?}")));
        }
    }
    match (arity, out_len) {
        (Some(n), Some(o)) => Ok((n, o)),
        _ => Err(Error::Parse("header must contain n= and out=".into())),
    }
}

/// Preimage sets of a truth table, keyed by output value.
#[derive(Clone, Debug)]
pub struct PreimageIndex {
    arity: usize,
    out_len: usize,
    map: HashMap<u64, Vec<u64>>,
}

impl PreimageIndex {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    /// Preimage input values of `y`, sorted ascending; empty when `y` is
    /// outside the image.
    pub fn preimages_of(&self, y: u64) -> &[u64] {
        self.map.get(&y).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, y: u64) -> bool {
        self.map.contains_key(&y)
    }

    /// Largest preimage-set size over the image.
    pub fn max_preimage_count(&self) -> usize {
        self.map.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Distinct images, sorted.
    pub fn images(&self) -> Vec<u64> {
        let mut keys: Vec<u64> = self.map.keys().copied().collect();
        keys.sort_unstable();
        keys
    }
}

/// Membership-query access to a function, with an exact query counter.
///
/// Cloning shares both the function and the counter, so pass-through
/// compositions report the query traffic of the underlying oracle.
#[derive(Clone)]
pub struct QueryOracle {
    arity: usize,
    out_len: usize,
    func: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    queries: Arc<AtomicU64>,
}

impl QueryOracle {
    pub fn from_fn(
        arity: usize,
        out_len: usize,
        f: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            arity,
            out_len,
            func: Arc::new(f),
            queries: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn from_table(table: TruthTable) -> Self {
        let arity = table.arity();
        let out_len = table.out_len();
        Self::from_fn(arity, out_len, move |x| table.eval_index(x))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    pub fn query_index(&self, x: u64) -> u64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        (self.func)(x)
    }

    pub fn query(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: x.len(),
            });
        }
        Ok(BitString::from_value(self.query_index(x.value()), self.out_len))
    }

    /// Single-bit query; the oracle must have `out_len == 1`.
    pub fn query_bit(&self, x: &BitString) -> Result<bool> {
        if self.out_len != 1 {
            return Err(Error::InvalidParameter(format!(
                "query_bit on an oracle with out_len {}",
                self.out_len
            )));
        }
        Ok(self.query(x)?.value() == 1)
    }

    /// Total queries made through this oracle (and its clones).
    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

impl fmt::Debug for QueryOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "QueryOracle(n={}, out={}, queries={})",
            self.arity,
            self.out_len,
            self.query_count()
        )
    }
}

/// Tabulates an oracle by querying all `2^n` points.
pub fn tt_from_oracle(oracle: &QueryOracle, n: usize) -> Result<TruthTable> {
    if n != oracle.arity() {
        return Err(Error::ArityMismatch {
            expected: oracle.arity(),
            got: n,
        });
    }
    TruthTable::from_index_fn(n, oracle.out_len(), |x| oracle.query_index(x))
}
