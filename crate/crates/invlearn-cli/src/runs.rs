//! The three run kinds behind the CLI subcommands.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{anyhow, bail, Result};
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use invlearn::amplify::{
    direct_product, exact_amplified_success, AmplifiedInverter, BruteForceOracle, InverterOracle,
    RestrictedOracle, TruncatingHash,
};
use invlearn::bits::{is_open_unit, rat, rat_to_f64, BitString, Rational, TruthTable};
use invlearn::dist::DyadicProb;
use invlearn::invert::{
    bit_inv, fixtures, joint_atom, joint_from_conditionals, rounds_for, sampler_joint,
    window_width, BitInverterFn, DistributionalInverter, InversionOutcome,
};
use invlearn::reduce::{integrate_disagreement, learn_over_mu, LearnOptions};
use invlearn::rng::{random_bits, substream, trial_substream};
use invlearn::stats::{empirical_distance, empirical_radius, statistical_distance};

use crate::config::{
    check_amplify_keys, check_learn_keys, check_suite_keys, parse_chain_params, parse_inverter,
    parse_learner, parse_target, rational_string, rational_to_json, worker_count, DistSpec,
    RawConfig,
};
use crate::report::Report;

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| anyhow!("building worker pool: {e}"))
}

/// Runs a learning experiment: `trials` seeded learn-and-measure rounds.
pub fn run_learn(config: &RawConfig) -> Result<Report> {
    check_learn_keys(config)?;
    let seed = config.u64_or("seed", 0)?;
    let enum_cap = config.usize_or("enum_cap", 24)?;
    let trials = config.u64_or("trials", 1)?;
    let error_samples = config.u64_or("error_samples", 4096)?;
    let workers = worker_count(config)?;

    let dist = DistSpec::parse(config)?;
    let n = dist.output_length();
    let target = parse_target(config, n)?;
    let learner = parse_learner(config)?;
    let alpha = config.rational("alpha")?;
    let beta = config.rational("beta")?;
    let gamma = config.rational_or("gamma", invlearn::bits::rat_pow2(1, n as u32))?;
    if !is_open_unit(&alpha) || !is_open_unit(&beta) || !is_open_unit(&gamma) {
        bail!("config fields \"alpha\"/\"beta\"/\"gamma\" must lie in (0,1)");
    }
    let inverter = parse_inverter(config, &dist, &gamma, enum_cap)?;
    let sampler = dist.sampler();

    let mut warnings = Vec::new();
    let inverter_name = config.str_or("inverter", "prod_inv");
    if inverter_name == "prod_inv" && gamma >= rat(1, n as i64) {
        warnings.push(format!(
            "gamma = {} is not below 1/n = 1/{n}; the gamma*n failure bound is \
             inapplicable and the run proceeds with bound min(1, gamma*n)",
            rational_string(&gamma)
        ));
    }
    let override_budget = config.bool_or("override_budget", false)?;
    if override_budget {
        warnings.push(
            "budget rule disabled by override_budget; the composed error bound is \
             not guaranteed by the declared inverter bounds"
                .to_string(),
        );
    }
    let opts = LearnOptions {
        learner_share: config.rational_or("learner_share", rat(1, 2))?,
        default_label: config.bool_or("default_label", false)?,
        enforce_budget: !override_budget,
    };

    // The joint distributions depend only on the sampler and inverter, so
    // compute them once: when the inverter exposes exact conditionals the
    // per-trial error is an exact integral over the joint, and the joint
    // statistical distance and failure mass are exact report fields.
    let exact_ctx = match joint_from_conditionals(sampler.as_ref(), inverter.as_ref(), enum_cap) {
        Ok(joint_inv) => {
            let joint_smp = sampler_joint(sampler.as_ref(), enum_cap)
                .map_err(|e| anyhow!("enumerating the sampler joint: {e}"))?;
            let distance = statistical_distance(&joint_inv, &joint_smp);
            let fail_mass: Rational = joint_inv
                .iter()
                .filter(|(atom, _)| !atom.bit(0))
                .map(|(_, p)| p.clone())
                .sum();
            Some((joint_inv, distance, fail_mass))
        }
        Err(invlearn::Error::InvalidParameter(_)) | Err(invlearn::Error::SizeCap { .. }) => None,
        Err(e) => return Err(anyhow!("enumerating the inverter joint: {e}")),
    };

    struct TrialResult {
        trial: u64,
        exact: bool,
        error: f64,
        error_exact: Option<Rational>,
        fail_fraction: Option<f64>,
        learner_queries: u64,
        target_queries: u64,
        failed: bool,
    }

    let alpha_f = rat_to_f64(&alpha);
    let run_trial = |trial: u64| -> Result<TrialResult> {
        let oracle = invlearn::bits::QueryOracle::from_table(target.clone());
        let mut rng = trial_substream(seed, "learner", trial);
        let composed = learn_over_mu(
            &oracle,
            sampler.clone(),
            inverter.clone(),
            learner.as_ref(),
            &alpha,
            &beta,
            &opts,
            &mut rng,
        )
        .map_err(|e| anyhow!("trial {trial}: {e}"))?;
        let learner_queries = oracle.query_count();
        if let Some((joint_inv, _, _)) = &exact_ctx {
            let error = integrate_disagreement(
                joint_inv,
                composed.uniform_hypothesis(),
                opts.default_label,
                &target,
                n,
            )
            .map_err(|e| anyhow!("trial {trial}: {e}"))?;
            return Ok(TrialResult {
                trial,
                exact: true,
                error: rat_to_f64(&error),
                failed: error > alpha,
                error_exact: Some(error),
                fail_fraction: None,
                learner_queries,
                target_queries: learner_queries,
            });
        }
        // Monte-Carlo evaluation: fresh sample and inverter coins per draw.
        let mut eval_rng = trial_substream(seed, "evaluation", trial);
        let mut wrong = 0u64;
        let mut inverter_fails = 0u64;
        for _ in 0..error_samples {
            let coins = random_bits(&mut eval_rng, sampler.coin_length());
            let x = sampler.sample(&coins).map_err(|e| anyhow!("trial {trial}: {e}"))?;
            let z = random_bits(&mut eval_rng, composed.coin_length());
            let outcome = composed
                .inverter()
                .invert(&x, &z)
                .map_err(|e| anyhow!("trial {trial}: {e}"))?;
            let label = match &outcome {
                InversionOutcome::Preimage(r) => composed
                    .uniform_hypothesis()
                    .eval(r)
                    .map_err(|e| anyhow!("trial {trial}: {e}"))?,
                InversionOutcome::Fail => {
                    inverter_fails += 1;
                    opts.default_label
                }
            };
            if label != target.eval_bit(&x).map_err(|e| anyhow!("trial {trial}: {e}"))? {
                wrong += 1;
            }
        }
        let error = wrong as f64 / error_samples.max(1) as f64;
        Ok(TrialResult {
            trial,
            exact: false,
            error,
            error_exact: None,
            fail_fraction: Some(inverter_fails as f64 / error_samples.max(1) as f64),
            failed: error > alpha_f + empirical_radius(error_samples),
            learner_queries,
            target_queries: learner_queries,
        })
    };

    let pool = thread_pool(workers)?;
    let results: Result<Vec<TrialResult>> =
        pool.install(|| (0..trials).into_par_iter().map(run_trial).collect());
    let results = results?;

    let failures = results.iter().filter(|r| r.failed).count() as u64;
    let all_exact = results.iter().all(|r| r.exact);
    let max_error = results
        .iter()
        .map(|r| r.error)
        .fold(0.0f64, f64::max);
    let trial_rows: Vec<Value> = results
        .iter()
        .map(|r| {
            let mut row = json!({
                "trial": r.trial,
                "exact": r.exact,
                "mu_error": r.error,
                "within_alpha": !r.failed,
                "learner_queries": r.learner_queries,
                "target_queries": r.target_queries,
            });
            if let Some(exact) = &r.error_exact {
                row["mu_error_exact"] = Value::String(rational_string(exact));
            } else {
                row["radius"] = json!(empirical_radius(error_samples));
                row["samples"] = json!(error_samples);
            }
            if let Some(fails) = r.fail_fraction {
                row["inverter_fail_fraction"] = json!(fails);
            }
            row
        })
        .collect();

    // Gate: learner failures beyond beta plus a three-sigma binomial margin.
    let beta_f = rat_to_f64(&beta);
    let margin = beta_f + 3.0 * (beta_f * (1.0 - beta_f) / trials.max(1) as f64).sqrt();
    let failure_fraction = failures as f64 / trials.max(1) as f64;
    let mut violations = Vec::new();
    if failure_fraction > margin {
        violations.push(format!(
            "failure fraction {failure_fraction:.4} exceeds beta {beta_f} plus margin"
        ));
    }

    let mut results_json = json!({
        "distribution": dist.describe(),
        "sampler_coin_length": sampler.coin_length(),
        "inverter_coin_length": inverter.coin_length(),
        "inverter_fail_bound": rational_to_json(&inverter.fail_bound()),
        "inverter_distance_bound": rational_to_json(&inverter.distance_bound()),
        "trials": trials,
        "all_exact": all_exact,
        "max_mu_error": max_error,
        "failures": failures,
        "failure_fraction": failure_fraction,
        "failure_margin": margin,
        "per_trial": trial_rows,
    });
    if let Some((_, distance, fail_mass)) = &exact_ctx {
        // Trial-independent exact measurements of the inverter itself.
        results_json["joint_statistical_distance"] = rational_to_json(distance);
        results_json["inverter_fail_mass"] = rational_to_json(fail_mass);
    }
    Ok(Report::new(
        "learn",
        config.echo(),
        results_json,
        warnings,
        violations,
    ))
}

/// Verifies the bit inverter over a grid of biases, target bits, and
/// failure bounds by full coin-space enumeration: exact conditional
/// uniformity, exact support, and the failure bound.
pub fn run_invert_suite(config: &RawConfig) -> Result<Report> {
    check_suite_keys(config)?;
    let max_k = config.u64_or("suite_max_k", 4)? as u32;
    if max_k > 6 {
        bail!("config field \"suite_max_k\": {max_k} exceeds the enumeration limit 6");
    }
    let gammas = config.rational_list_or("suite_gammas", &[rat(1, 2), rat(1, 4), rat(1, 8)])?;
    for gamma in &gammas {
        let rounds = rounds_for(gamma)
            .map_err(|e| anyhow!("config field \"suite_gammas\": {e}"))?;
        if rounds > 4 {
            bail!(
                "config field \"suite_gammas\": {} needs {rounds} rounds; the suite caps at 4",
                rational_string(gamma)
            );
        }
    }
    let implementation: BitInverterFn = match config.str_or("bitinv", "reference") {
        "reference" => bit_inv,
        "biased" => fixtures::biased_bit_inv,
        other => bail!("config field \"bitinv\": unknown implementation {other:?}"),
    };

    let mut cells = Vec::new();
    let mut violations = Vec::new();
    for k in 1..=max_k {
        for s in 1..(1u64 << k) {
            let p = DyadicProb::new(s, k).map_err(|e| anyhow!("bias {s}/2^{k}: {e}"))?;
            for b in [false, true] {
                for gamma in &gammas {
                    let rounds = rounds_for(gamma).expect("validated above");
                    let c = window_width(&p, b) as usize;
                    let coin_bits = c * rounds as usize;
                    let target_count = if b { s } else { (1 << k) - s };
                    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
                    let mut fails = 0u64;
                    for z in 0..1u64 << coin_bits {
                        let coins = BitString::from_value(z, coin_bits);
                        match implementation(&p, b, gamma, &coins)
                            .map_err(|e| anyhow!("cell p={p}, b={b}: {e}"))?
                        {
                            InversionOutcome::Preimage(r) => {
                                *counts.entry(r.value()).or_default() += 1
                            }
                            InversionOutcome::Fail => fails += 1,
                        }
                    }
                    let expected_support: Vec<u64> = if b {
                        (0..s).collect()
                    } else {
                        (s..1 << k).collect()
                    };
                    let support: Vec<u64> = counts.keys().copied().collect();
                    let support_ok = support == expected_support;
                    let first = counts.values().next().copied().unwrap_or(0);
                    let uniform = counts.values().all(|&v| v == first);
                    let total = 1u64 << coin_bits;
                    let fail_prob = Rational::new(fails.into(), total.into());
                    let bound_ok = fail_prob <= *gamma;
                    let cell_label =
                        format!("p={p}, b={}, gamma={}", b as u8, rational_string(gamma));
                    if !support_ok {
                        violations.push(format!("{cell_label}: support mismatch"));
                    }
                    if !uniform {
                        violations.push(format!("{cell_label}: conditional not uniform"));
                    }
                    if !bound_ok {
                        violations.push(format!("{cell_label}: failure bound violated"));
                    }
                    let mut cell = json!({
                        "bias": p.to_string(),
                        "bit": b as u8,
                        "gamma": rational_string(gamma),
                        "rounds": rounds,
                        "window": c,
                        "uniform": uniform,
                        "support_ok": support_ok,
                        "fail_prob": rational_string(&fail_prob),
                        "fail_bound_ok": bound_ok,
                        "preimage_count": target_count,
                    });
                    if uniform {
                        // The exact conditional is one number: the common
                        // per-preimage share of the success mass.
                        let successes = total - fails;
                        let share = if successes == 0 {
                            Rational::new(0.into(), 1.into())
                        } else {
                            Rational::new(first.into(), successes.into())
                        };
                        cell["conditional_share"] = json!(rational_string(&share));
                    } else {
                        // Diagnostic: the full exact conditional distribution.
                        let conditional: BTreeMap<String, String> = counts
                            .iter()
                            .map(|(value, count)| {
                                (
                                    BitString::from_value(*value, k as usize).to_string(),
                                    rational_string(&Rational::new(
                                        (*count).into(),
                                        (total - fails).into(),
                                    )),
                                )
                            })
                            .collect();
                        cell["conditional"] = json!(conditional);
                    }
                    cells.push(cell);
                }
            }
        }
    }
    let results = json!({
        "implementation": config.str_or("bitinv", "reference"),
        "cell_count": cells.len(),
        "cells": cells,
    });
    Ok(Report::new(
        "invert-suite",
        config.echo(),
        results,
        Vec::new(),
        violations,
    ))
}

/// Runs the amplification chain on a configured function, reporting each
/// rung: weak-oracle coverage, amplified inversion success, and the final
/// stage's joint distance from the ground-truth coupling.
pub fn run_amplify(config: &RawConfig) -> Result<Report> {
    check_amplify_keys(config)?;
    let seed = config.u64_or("seed", 0)?;
    let trials = config.u64_or("amp_trials", 10_000)?;
    let params = parse_chain_params(config)?;

    let target_text = config.str_or("amp_target", "identity:2").to_string();
    let table = amplification_target(config, &target_text, seed)?;
    let n = table.arity();

    // Assemble the chain rung by rung so each stage is inspectable.
    let m = params.m_override.unwrap_or_else(|| {
        invlearn::amplify::hash_output_len(n, params.c_override.unwrap_or(1))
    });
    let th = TruncatingHash::new(&table, m).map_err(size_to_config)?;
    let hash_table = th.table().map_err(size_to_config)?;
    let t = params.t_override.unwrap_or(2);
    let product = direct_product(&hash_table, t).map_err(size_to_config)?;

    let weak_fraction = config.str_or("amp_weak_fraction", "none").to_string();
    let weak: Arc<dyn InverterOracle> = if weak_fraction == "none" {
        Arc::new(BruteForceOracle::new(&product))
    } else {
        let fraction = crate::config::parse_rational(&weak_fraction)
            .map_err(|e| anyhow!("config field \"amp_weak_fraction\": {e}"))?;
        let num = fraction
            .numer()
            .to_u64()
            .ok_or_else(|| anyhow!("config field \"amp_weak_fraction\": out of range"))?;
        let den = fraction
            .denom()
            .to_u64()
            .ok_or_else(|| anyhow!("config field \"amp_weak_fraction\": out of range"))?;
        let weak_seed = config.u64_or("amp_weak_seed", seed.wrapping_add(101))?;
        Arc::new(
            RestrictedOracle::restrict_to_fraction(&product, num, den, weak_seed)
                .map_err(|e| anyhow!("building restricted oracle: {e}"))?,
        )
    };

    // Rung 1: weak-oracle coverage of the product's image, exact.
    let product_images = product.image();
    let answered = product_images
        .iter()
        .filter(|&&y| weak.answers(&BitString::from_value(y, product.out_len())))
        .count();
    let weak_coverage = answered as f64 / product_images.len().max(1) as f64;

    // Rung 2: weak-to-strong amplification on the hash function.
    let target_failure = invlearn::bits::pow_rational(
        &rat(1, n.max(2) as i64),
        6 * params.c_override.unwrap_or(1) as u64,
    );
    let reps = match params.reps_override {
        Some(r) => r,
        None => invlearn::amplify::amplification_reps(&weak.success_bound(), &target_failure, t)
            .map_err(|e| anyhow!("resolving repetition count: {e}"))?,
    };
    let strong = Arc::new(
        AmplifiedInverter::new(&hash_table, t, weak.clone(), reps).map_err(size_to_config)?,
    );
    let fresh_bits = hash_table.arity() * (t - 1);
    let (strong_success, strong_exact, strong_radius) = if fresh_bits <= 20 {
        let exact = exact_amplified_success(&hash_table, t, weak.as_ref(), reps)
            .map_err(size_to_config)?;
        (rat_to_f64(&exact), true, 0.0)
    } else {
        let mut rng = substream(seed, "strong-success");
        let mut hits = 0u64;
        let sample_trials = trials.min(2_000);
        for _ in 0..sample_trials {
            let x = rng.random_range(0..hash_table.size());
            let y = BitString::from_value(hash_table.eval_index(x), hash_table.out_len());
            if strong.invert(&y, &mut rng).is_some() {
                hits += 1;
            }
        }
        (
            hits as f64 / sample_trials as f64,
            false,
            empirical_radius(sample_trials),
        )
    };

    // Rung 3: the distributional stage, measured against the ground-truth
    // coupling (x, f(x)) by Monte-Carlo joint distance.
    let inverter = invlearn::amplify::HashInverter::new(
        &table,
        m,
        strong,
        params.rounds,
        params.declared_fail.clone(),
        params.target_distance.clone(),
    )
    .map_err(size_to_config)?;
    let mut rng = substream(seed, "distributional-stage");
    let mut fails = 0u64;
    let distance = {
        let fails = &mut fails;
        let table_ref = &table;
        let inverter_ref = &inverter;
        empirical_distance(
            move |r| {
                let x = r.random_range(0..table_ref.size());
                let y = BitString::from_value(table_ref.eval_index(x), table_ref.out_len());
                let outcome = inverter_ref
                    .invert_with_rng(&y, r)
                    .expect("image lengths fixed");
                if outcome.is_fail() {
                    *fails += 1;
                }
                joint_atom(&outcome, &y)
            },
            |r| {
                let coins = random_bits(r, table_ref.arity());
                let y = table_ref.eval(&coins).expect("arity fixed");
                joint_atom(&InversionOutcome::Preimage(coins), &y)
            },
            trials,
            &mut rng,
        )
    };
    let fail_fraction = fails as f64 / trials.max(1) as f64;

    let mut violations = Vec::new();
    let success_threshold = config.rational_or("amp_success_threshold", rat(0, 1))?;
    if strong_success < rat_to_f64(&success_threshold) {
        violations.push(format!(
            "amplified success {strong_success:.4} below threshold {}",
            rational_string(&success_threshold)
        ));
    }
    let tv_threshold = config.rational_or("amp_tv_threshold", rat(1, 1))?;
    if distance.value > rat_to_f64(&tv_threshold) {
        violations.push(format!(
            "joint distance estimate {:.4} above threshold {}",
            distance.value,
            rational_string(&tv_threshold)
        ));
    }

    let results = json!({
        "target": target_text,
        "resolution": {
            "n": n,
            "m": m,
            "ilen": th.ilen(),
            "t": t,
            "reps": reps,
            "rounds": params.rounds,
            "hash_arity": hash_table.arity(),
            "hash_out_len": hash_table.out_len(),
            "product_arity": product.arity(),
            "product_out_len": product.out_len(),
            "overridden": params.m_override.is_some() || params.t_override.is_some()
                || params.c_override.is_some(),
            "note": "desk-scale parameters; formula values overridden where present",
        },
        "rungs": {
            "weak_oracle": {
                "distinct_images": product_images.len(),
                "answered_images": answered,
                "coverage": weak_coverage,
                "declared_success": rational_string(&weak.success_bound()),
            },
            "weak_to_strong": {
                "reps": reps,
                "success": strong_success,
                "exact": strong_exact,
                "radius": strong_radius,
            },
            "distributional": {
                "joint_distance": crate::report::distance_to_json(&distance),
                "fail_fraction": fail_fraction,
                "declared_fail": rational_string(&params.declared_fail),
                "declared_distance": rational_string(&params.target_distance),
                "note": "thresholds are desk-scale engineering bounds",
            },
        },
    });
    Ok(Report::new(
        "amplify",
        config.echo(),
        results,
        Vec::new(),
        violations,
    ))
}

fn amplification_target(config: &RawConfig, text: &str, seed: u64) -> Result<TruthTable> {
    if let Some(n) = text.strip_prefix("identity:") {
        let n: usize = n
            .parse()
            .map_err(|_| anyhow!("config field \"amp_target\": bad arity in {text:?}"))?;
        return TruthTable::identity(n).map_err(size_to_config);
    }
    if let Some(n) = text.strip_prefix("two_to_one:") {
        let n: usize = n
            .parse()
            .map_err(|_| anyhow!("config field \"amp_target\": bad arity in {text:?}"))?;
        if !(1..=12).contains(&n) {
            bail!("config field \"amp_target\": two_to_one arity {n} not in 1..=12");
        }
        use rand::seq::SliceRandom;
        let mut rng = substream(seed, "amp-two-to-one");
        let mut values: Vec<u64> = (0..1u64 << n).collect();
        values.shuffle(&mut rng);
        let images: Vec<u64> = values.into_iter().take(1 << (n - 1)).collect();
        return TruthTable::from_index_fn(n, n, |x| images[(x >> 1) as usize])
            .map_err(size_to_config);
    }
    if let Some(n) = text.strip_prefix("random:") {
        let n: usize = n
            .parse()
            .map_err(|_| anyhow!("config field \"amp_target\": bad arity in {text:?}"))?;
        let mut rng = substream(seed, "amp-random");
        return TruthTable::random(n, n, &mut rng).map_err(size_to_config);
    }
    if text == "dist" {
        let dist = DistSpec::parse(config)?;
        let enum_cap = config.usize_or("enum_cap", 24)?;
        return dist.sampler_table(enum_cap);
    }
    bail!("config field \"amp_target\": unknown target {text:?}")
}

fn size_to_config(e: invlearn::Error) -> anyhow::Error {
    anyhow!("{e}")
}
