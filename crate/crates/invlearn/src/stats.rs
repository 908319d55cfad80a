//! Exact and empirical distribution measurements.
//!
//! Statistical distance is computed as half the L1 difference, which equals
//! the maximum over events of the probability gap; the equivalence is one of
//! the property tests. Empirical estimates carry a distribution-free
//! confidence radius so every reported number is either exact or explicitly
//! uncertain.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::bits::{rat_to_f64, BitString, Rational, TruthTable};
use crate::dist::ExactDistribution;
use crate::error::{Error, Result};

/// Exact statistical (total-variation) distance between two finite
/// distributions: half the L1 difference over the union support.
pub fn statistical_distance(d0: &ExactDistribution, d1: &ExactDistribution) -> Rational {
    let mut atoms: BTreeSet<&BitString> = d0.support().collect();
    atoms.extend(d1.support());
    let mut l1 = Rational::zero();
    for atom in atoms {
        l1 += (d0.prob(atom) - d1.prob(atom)).abs();
    }
    l1 / Rational::from_integer(2.into())
}

/// The event achieving the statistical distance: `{x : d0(x) > d1(x)}`.
pub fn maximizing_event(d0: &ExactDistribution, d1: &ExactDistribution) -> Vec<BitString> {
    let mut atoms: BTreeSet<&BitString> = d0.support().collect();
    atoms.extend(d1.support());
    atoms
        .into_iter()
        .filter(|atom| d0.prob(atom) > d1.prob(atom))
        .cloned()
        .collect()
}

/// Probability mass a distribution assigns to an event.
pub fn event_probability(d: &ExactDistribution, event: &[BitString]) -> Rational {
    event.iter().map(|atom| d.prob(atom)).sum()
}

/// Exact disagreement mass of a hypothesis against a truth table under a
/// distribution supported on the table's inputs.
pub fn error_rate(
    hypothesis: impl Fn(&BitString) -> bool,
    target: &TruthTable,
    d: &ExactDistribution,
) -> Result<Rational> {
    let mut err = Rational::zero();
    for (x, px) in d.iter() {
        if x.len() != target.arity() {
            return Err(Error::ArityMismatch {
                expected: target.arity(),
                got: x.len(),
            });
        }
        if hypothesis(x) != target.eval_bit(x)? {
            err += px;
        }
    }
    Ok(err)
}

/// A distance measurement: exact, or an estimate with a confidence radius.
#[derive(Clone, Debug)]
pub struct DistanceReport {
    pub exact: bool,
    pub value: f64,
    pub exact_value: Option<Rational>,
    pub samples: Option<u64>,
    pub radius: f64,
}

impl DistanceReport {
    pub fn exact(value: Rational) -> Self {
        Self {
            exact: true,
            value: rat_to_f64(&value),
            exact_value: Some(value),
            samples: None,
            radius: 0.0,
        }
    }
}

/// Failure probability budget for the empirical confidence radius.
const RADIUS_ETA: f64 = 0.01;

/// Confidence radius of the plug-in distance estimate at `trials` samples
/// per distribution.
///
/// The estimate is a function of `2 * trials` independent draws in which any
/// single draw moves the value by at most `1/trials`, so a bounded-difference
/// (DKW/McDiarmid style) bound gives deviation below
/// `2 * sqrt(ln(2/eta) / (2 * trials))` with probability `1 - eta`,
/// distribution-free.
pub fn empirical_radius(trials: u64) -> f64 {
    2.0 * ((2.0 / RADIUS_ETA).ln() / (2.0 * trials as f64)).sqrt()
}

/// Plug-in statistical-distance estimate between two sample streams.
pub fn empirical_distance<R, F0, F1>(
    mut draw0: F0,
    mut draw1: F1,
    trials: u64,
    rng: &mut R,
) -> DistanceReport
where
    R: Rng,
    F0: FnMut(&mut R) -> BitString,
    F1: FnMut(&mut R) -> BitString,
{
    assert!(trials >= 1);
    let mut h0: BTreeMap<BitString, u64> = BTreeMap::new();
    let mut h1: BTreeMap<BitString, u64> = BTreeMap::new();
    for _ in 0..trials {
        *h0.entry(draw0(rng)).or_default() += 1;
        *h1.entry(draw1(rng)).or_default() += 1;
    }
    let mut atoms: BTreeSet<&BitString> = h0.keys().collect();
    atoms.extend(h1.keys());
    let n = trials as f64;
    let mut l1 = 0.0;
    for atom in atoms {
        let p0 = h0.get(atom).copied().unwrap_or(0) as f64 / n;
        let p1 = h1.get(atom).copied().unwrap_or(0) as f64 / n;
        l1 += (p0 - p1).abs();
    }
    DistanceReport {
        exact: false,
        value: l1 / 2.0,
        exact_value: None,
        samples: Some(trials),
        radius: empirical_radius(trials),
    }
}
