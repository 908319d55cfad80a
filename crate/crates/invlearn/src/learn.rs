//! Pluggable membership-query learners over the uniform distribution.
//!
//! The learner contract mirrors the query-learning definition: given oracle
//! access to an `m`-bit Boolean target, produce with probability at least
//! `1 - delta` a hypothesis whose uniform disagreement with the target is at
//! most `epsilon`. Hypotheses are deterministic total maps; all randomness of
//! a composed hypothesis lives in its inverter.

use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bits::{tt_from_oracle, BitString, QueryOracle, Rational, TruthTable, MAX_TABLE_ARITY};
use crate::error::{Error, Result};

/// A deterministic, totally evaluable Boolean hypothesis.
#[derive(Clone, Debug)]
pub enum Hypothesis {
    /// Tabulated on all inputs.
    Table(TruthTable),
    /// Sign of a truncated parity expansion: output 1 iff the weighted sum
    /// of parities is negative (in the +1/-1 convention where +1 encodes 0);
    /// exact zero resolves to output 0.
    SignExpansion {
        arity: usize,
        terms: Vec<(u64, f64)>,
    },
}

impl Hypothesis {
    pub fn arity(&self) -> usize {
        match self {
            Hypothesis::Table(t) => t.arity(),
            Hypothesis::SignExpansion { arity, .. } => *arity,
        }
    }

    pub fn eval_index(&self, x: u64) -> bool {
        match self {
            Hypothesis::Table(t) => t.eval_index(x) == 1,
            Hypothesis::SignExpansion { terms, .. } => {
                let mut sum = 0.0;
                for &(mask, coefficient) in terms {
                    sum += coefficient * parity_char(mask, x);
                }
                sum < 0.0
            }
        }
    }

    pub fn eval(&self, x: &BitString) -> Result<bool> {
        if x.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: x.len(),
            });
        }
        Ok(self.eval_index(x.value()))
    }

    /// Exact uniform disagreement with a single-output truth table.
    pub fn exact_uniform_error(&self, target: &TruthTable) -> Result<Rational> {
        if target.arity() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: target.arity(),
            });
        }
        let disagreements = (0..target.size())
            .filter(|&x| self.eval_index(x) != (target.eval_index(x) == 1))
            .count() as u64;
        Ok(Rational::new(
            disagreements.into(),
            num_bigint::BigInt::from(target.size()),
        ))
    }
}

/// The character `chi_T(x) = (-1)^(sum of x_j over j in T)`, with masks in
/// input-value space.
fn parity_char(mask: u64, x: u64) -> f64 {
    if (mask & x).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// A learner for Boolean targets over the uniform distribution.
pub trait UniformLearner: Send + Sync {
    fn name(&self) -> &'static str;

    /// Declared membership-query budget for the given parameters.
    fn query_budget(&self, arity: usize, epsilon: &Rational, delta: &Rational) -> u64;

    /// Produces a hypothesis with uniform error at most `epsilon`, except
    /// with probability at most `delta` over `rng`, for targets inside the
    /// learner's promise.
    fn learn(
        &self,
        oracle: &QueryOracle,
        arity: usize,
        epsilon: &Rational,
        delta: &Rational,
        rng: &mut ChaCha8Rng,
    ) -> Result<Hypothesis>;
}

/// The exact learner: tabulates the oracle with `2^m` queries. Error and
/// failure bounds are met with slack for any target.
#[derive(Clone, Copy, Debug, Default)]
pub struct BruteForceLearner;

impl UniformLearner for BruteForceLearner {
    fn name(&self) -> &'static str {
        "brute_force"
    }

    fn query_budget(&self, arity: usize, _epsilon: &Rational, _delta: &Rational) -> u64 {
        1u64 << arity
    }

    fn learn(
        &self,
        oracle: &QueryOracle,
        arity: usize,
        _epsilon: &Rational,
        _delta: &Rational,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Hypothesis> {
        if arity > MAX_TABLE_ARITY {
            return Err(Error::SizeCap {
                what: "brute-force learner arity",
                value: arity,
                cap: MAX_TABLE_ARITY,
            });
        }
        Ok(Hypothesis::Table(tt_from_oracle(oracle, arity)?))
    }
}

/// A low-degree parity-expansion learner.
///
/// Estimates every parity correlation of degree at most `degree` from one
/// shared Monte-Carlo sample of membership queries and outputs the sign of
/// the truncated expansion. With `M` estimated parities, each coefficient is
/// estimated to within `lambda = sqrt(epsilon / (2M))` using the two-sided
/// Hoeffding budget `N = ceil((4M / epsilon) * ln(2M / delta))` queries, so
/// on targets whose parity mass above the degree cutoff is at most
/// `epsilon / 2` the hypothesis errs on at most an `epsilon` fraction of
/// inputs, except with probability `delta`.
#[derive(Clone, Copy, Debug)]
pub struct LowDegreeLearner {
    degree: usize,
}

impl LowDegreeLearner {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn masks(&self, arity: usize) -> Vec<u64> {
        (0..1u64 << arity)
            .filter(|mask| mask.count_ones() as usize <= self.degree)
            .collect()
    }
}

impl UniformLearner for LowDegreeLearner {
    fn name(&self) -> &'static str {
        "low_degree"
    }

    fn query_budget(&self, arity: usize, epsilon: &Rational, delta: &Rational) -> u64 {
        let m = self.masks(arity).len() as f64;
        let eps = epsilon.to_f64().unwrap_or(0.0);
        let del = delta.to_f64().unwrap_or(0.0);
        ((4.0 * m / eps) * (2.0 * m / del).ln()).ceil() as u64
    }

    fn learn(
        &self,
        oracle: &QueryOracle,
        arity: usize,
        epsilon: &Rational,
        delta: &Rational,
        rng: &mut ChaCha8Rng,
    ) -> Result<Hypothesis> {
        if self.degree > arity {
            return Err(Error::InvalidParameter(format!(
                "degree {} exceeds arity {arity}",
                self.degree
            )));
        }
        if !crate::bits::is_open_unit(epsilon) || !crate::bits::is_open_unit(delta) {
            return Err(Error::InvalidParameter(
                "epsilon and delta must lie in (0,1)".into(),
            ));
        }
        let masks = self.masks(arity);
        let samples = self.query_budget(arity, epsilon, delta);
        let domain = 1u64 << arity;
        // One shared sample: each query contributes to every coefficient.
        let mut sums = vec![0i64; masks.len()];
        for _ in 0..samples {
            let x = rng.random_range(0..domain);
            let sign = if oracle.query_index(x) == 1 { -1i64 } else { 1 };
            for (slot, &mask) in sums.iter_mut().zip(&masks) {
                let chi = if (mask & x).count_ones() % 2 == 0 { 1i64 } else { -1 };
                *slot += sign * chi;
            }
        }
        let terms = masks
            .into_iter()
            .zip(sums)
            .map(|(mask, sum)| (mask, sum as f64 / samples as f64))
            .collect();
        Ok(Hypothesis::SignExpansion { arity, terms })
    }
}
