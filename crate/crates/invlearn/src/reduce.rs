//! The composition reduction: learn over a samplable distribution by
//! learning the sampler-composed target over the uniform distribution and
//! composing the resulting hypothesis with a distributional inverter.
//!
//! Error accounting: the learner is invoked at error `alpha/2`, and the
//! inverter's declared distance plus failure mass must fit in the remaining
//! `alpha/2`, so the composed hypothesis errs on at most an `alpha` fraction
//! of the samplable distribution (except with the learner's failure
//! probability `beta`). The split is configurable for experiments.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;

use crate::bits::{is_open_unit, rat, BitString, QueryOracle, Rational, TruthTable};
use crate::dist::{exact_output_distribution, Sampler};
use crate::error::{Error, Result};
use crate::invert::{
    decode_joint_atom, joint_from_conditionals, joint_preimage_distribution,
    DistributionalInverter, InversionOutcome,
};
use crate::learn::{Hypothesis, UniformLearner};
use crate::rng::random_bits;

/// Builds the composed oracle `w -> f(S(w))` on sampler-coin inputs.
///
/// Each composed query issues exactly one query to `f`, so the target's
/// query counter reflects pass-through traffic one-to-one.
pub fn compose_target(f: &QueryOracle, sampler: Arc<dyn Sampler>) -> Result<QueryOracle> {
    if f.arity() != sampler.output_length() {
        return Err(Error::Config(format!(
            "sampler produces {} bits but the target takes {}",
            sampler.output_length(),
            f.arity()
        )));
    }
    let coin_len = sampler.coin_length();
    let inner = f.clone();
    Ok(QueryOracle::from_fn(coin_len, f.out_len(), move |w| {
        let coins = BitString::from_value(w, coin_len);
        let x = sampler
            .sample(&coins)
            .expect("composed oracle feeds coins of the declared length");
        inner.query(&x).expect("sampler output matches target arity").value()
    }))
}

/// Options for [`learn_over_mu`].
#[derive(Clone, Debug)]
pub struct LearnOptions {
    /// Fraction of the error budget given to the uniform learner; the
    /// remainder covers the inverter's distance and failure mass.
    pub learner_share: Rational,
    /// Label emitted when the inverter fails during evaluation.
    pub default_label: bool,
    /// Enforce the budget rule against the inverter's declared bounds.
    pub enforce_budget: bool,
}

impl Default for LearnOptions {
    fn default() -> Self {
        Self {
            learner_share: rat(1, 2),
            default_label: false,
            enforce_budget: true,
        }
    }
}

/// A hypothesis over the samplable distribution: a uniform-distribution
/// hypothesis on sampler coins, composed with a distributional inverter.
#[derive(Clone)]
pub struct ComposedHypothesis {
    hypothesis: Hypothesis,
    inverter: Arc<dyn DistributionalInverter>,
    default_label: bool,
}

impl ComposedHypothesis {
    pub fn new(
        hypothesis: Hypothesis,
        inverter: Arc<dyn DistributionalInverter>,
        default_label: bool,
    ) -> Self {
        Self {
            hypothesis,
            inverter,
            default_label,
        }
    }

    pub fn uniform_hypothesis(&self) -> &Hypothesis {
        &self.hypothesis
    }

    pub fn inverter(&self) -> &Arc<dyn DistributionalInverter> {
        &self.inverter
    }

    /// Coin bits consumed per evaluation.
    pub fn coin_length(&self) -> usize {
        self.inverter.coin_length()
    }

    /// Evaluates `C(I(x; z))`, or the default label when inversion fails.
    /// Deterministic in `(x, z)`.
    pub fn evaluate(&self, x: &BitString, z: &BitString) -> Result<bool> {
        match self.inverter.invert(x, z)? {
            InversionOutcome::Preimage(r) => self.hypothesis.eval(&r),
            InversionOutcome::Fail => Ok(self.default_label),
        }
    }

    /// Evaluates with coins drawn from a seeded stream.
    pub fn evaluate_with_rng(&self, x: &BitString, rng: &mut ChaCha8Rng) -> Result<bool> {
        let coins = random_bits(rng, self.coin_length());
        self.evaluate(x, &coins)
    }

    /// Derandomized evaluation: majority vote over an odd number of
    /// independent coin strings. An extension beyond the randomized
    /// hypothesis contract, provided for callers that need deterministic
    /// semantics given a fixed coin list.
    pub fn evaluate_majority(&self, x: &BitString, coin_draws: &[BitString]) -> Result<bool> {
        if coin_draws.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "majority evaluation needs an odd number of coin draws".into(),
            ));
        }
        let mut ones = 0usize;
        for z in coin_draws {
            if self.evaluate(x, z)? {
                ones += 1;
            }
        }
        Ok(ones * 2 > coin_draws.len())
    }

    /// Exact error over the sampler's output distribution, by full
    /// enumeration of sampler and inverter coins.
    pub fn exact_mu_error(
        &self,
        sampler: &dyn Sampler,
        target: &TruthTable,
        cap_bits: usize,
    ) -> Result<Rational> {
        let joint = joint_preimage_distribution(sampler, self.inverter.as_ref(), cap_bits)?;
        self.integrate_disagreement(&joint, target, sampler.output_length())
    }

    /// Exact error over the sampler's output distribution, using the
    /// inverter's exact conditional distributions (no coin enumeration).
    pub fn exact_mu_error_conditional(
        &self,
        sampler: &dyn Sampler,
        target: &TruthTable,
        cap_bits: usize,
    ) -> Result<Rational> {
        let joint = joint_from_conditionals(sampler, self.inverter.as_ref(), cap_bits)?;
        self.integrate_disagreement(&joint, target, sampler.output_length())
    }

    /// Integrates the disagreement test over a tagged joint distribution.
    pub fn integrate_disagreement(
        &self,
        joint: &crate::dist::ExactDistribution,
        target: &TruthTable,
        y_len: usize,
    ) -> Result<Rational> {
        integrate_disagreement(joint, &self.hypothesis, self.default_label, target, y_len)
    }

    /// Monte-Carlo error estimate over the sampler's distribution.
    pub fn empirical_mu_error(
        &self,
        sampler: &dyn Sampler,
        target: &TruthTable,
        trials: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64> {
        let mut wrong = 0u64;
        for _ in 0..trials {
            let coins = random_bits(rng, sampler.coin_length());
            let x = sampler.sample(&coins)?;
            if self.evaluate_with_rng(&x, rng)? != target.eval_bit(&x)? {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / trials as f64)
    }
}

impl std::fmt::Debug for ComposedHypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ComposedHypothesis(coins={}, default={})",
            self.coin_length(),
            self.default_label
        )
    }
}

/// Learns `f` over the sampler's distribution.
///
/// Runs the uniform learner on the composed target `f(S(w))` at error
/// `learner_share * alpha` and failure `beta`, then pairs the hypothesis
/// with the inverter. Under the budget rule, the inverter's declared failure
/// mass and conditional distance must each fit half of the remaining error
/// budget, which makes the composed error at most `alpha` whenever the
/// learner succeeds.
#[allow(clippy::too_many_arguments)]
pub fn learn_over_mu(
    f: &QueryOracle,
    sampler: Arc<dyn Sampler>,
    inverter: Arc<dyn DistributionalInverter>,
    learner: &dyn UniformLearner,
    alpha: &Rational,
    beta: &Rational,
    opts: &LearnOptions,
    rng: &mut ChaCha8Rng,
) -> Result<ComposedHypothesis> {
    if f.out_len() != 1 {
        return Err(Error::Config(format!(
            "learning targets must be Boolean, got out_len {}",
            f.out_len()
        )));
    }
    if !is_open_unit(alpha) || !is_open_unit(beta) {
        return Err(Error::Config("alpha and beta must lie in (0,1)".into()));
    }
    if !is_open_unit(&opts.learner_share) {
        return Err(Error::Config("learner share must lie in (0,1)".into()));
    }
    if opts.enforce_budget {
        let inverter_budget =
            (Rational::one() - &opts.learner_share) * alpha / Rational::from_integer(BigInt::from(2));
        if inverter.fail_bound() > inverter_budget {
            return Err(Error::Config(format!(
                "inverter failure bound {} exceeds its budget {}",
                inverter.fail_bound(),
                inverter_budget
            )));
        }
        if inverter.distance_bound() > inverter_budget {
            return Err(Error::Config(format!(
                "inverter distance bound {} exceeds its budget {}",
                inverter.distance_bound(),
                inverter_budget
            )));
        }
    }
    let composed = compose_target(f, sampler)?;
    let epsilon = &opts.learner_share * alpha;
    let hypothesis = learner.learn(&composed, composed.arity(), &epsilon, beta, rng)?;
    Ok(ComposedHypothesis::new(
        hypothesis,
        inverter,
        opts.default_label,
    ))
}

/// Integrates the disagreement test `hypothesis-label != f(y)` over a
/// tagged joint distribution of (inversion outcome, sampler output), with
/// failures labeled by `default_label`.
///
/// Applied to the inverter-side joint this is the composed hypothesis's
/// error over the samplable distribution; applied to the sampler-side joint
/// `w . S(w)` it is the uniform error of the hypothesis against the
/// composed target. The gap between the two is bounded by the statistical
/// distance of the joints, which is the reduction's error decomposition.
pub fn integrate_disagreement(
    joint: &crate::dist::ExactDistribution,
    hypothesis: &Hypothesis,
    default_label: bool,
    target: &TruthTable,
    y_len: usize,
) -> Result<Rational> {
    let mut err = Rational::zero();
    for (atom, p) in joint.iter() {
        let (outcome, y) = decode_joint_atom(atom, y_len)?;
        let label = match outcome {
            InversionOutcome::Preimage(r) => hypothesis.eval(&r)?,
            InversionOutcome::Fail => default_label,
        };
        if label != target.eval_bit(&y)? {
            err += p;
        }
    }
    Ok(err)
}

/// Exact uniform error of a hypothesis against the composed target
/// `w -> f(S(w))`, enumerated over sampler coins.
pub fn exact_uniform_error(
    hypothesis: &Hypothesis,
    target: &TruthTable,
    sampler: &dyn Sampler,
    cap_bits: usize,
) -> Result<Rational> {
    let r = sampler.coin_length();
    if r > cap_bits || r > 63 {
        return Err(Error::SizeCap {
            what: "sampler coin length",
            value: r,
            cap: cap_bits.min(63),
        });
    }
    let mut disagreements = 0u64;
    for w in 0..1u64 << r {
        let coins = BitString::from_value(w, r);
        let x = sampler.sample(&coins)?;
        if hypothesis.eval(&coins)? != target.eval_bit(&x)? {
            disagreements += 1;
        }
    }
    Ok(Rational::new(disagreements.into(), BigInt::one() << r))
}

/// Exact mu-weighted error of a plain hypothesis evaluated directly on
/// samples (no inverter), for baselines.
pub fn exact_direct_error(
    hypothesis: &Hypothesis,
    target: &TruthTable,
    sampler: &dyn Sampler,
    cap_bits: usize,
) -> Result<Rational> {
    let mu = exact_output_distribution(sampler, cap_bits)?;
    crate::stats::error_rate(
        |x| hypothesis.eval(x).expect("arity checked by caller"),
        target,
        &mu,
    )
}
