//! End-to-end pipelines combining the learners, inverters, and measurement
//! machinery across module boundaries.

use std::sync::Arc;

use invlearn::amplify::{chain_distributional_inverter, BruteForceOracle, ChainParams};
use invlearn::bits::{rat, rat_pow2, BitString, QueryOracle, TruthTable};
use invlearn::dist::{prod_samp, ProductDistribution, ProductSampler};
use invlearn::invert::{DistributionalInverter, ProductInverter};
use invlearn::learn::{BruteForceLearner, LowDegreeLearner};
use invlearn::reduce::{learn_over_mu, LearnOptions};
use invlearn::rng::substream;

/// The low-degree learner feeds the whole reduction: over fair coins the
/// composed target keeps its low degree, the expansion hypothesis is exact,
/// and the composed error reduces to the inverter's failure mass.
#[test]
fn low_degree_learner_through_the_reduction() {
    let target = TruthTable::and(2).unwrap();
    let f = QueryOracle::from_table(target.clone());
    let dist = ProductDistribution::from_pairs(&[(1, 1), (1, 1)]).unwrap();
    let sampler = Arc::new(ProductSampler::new(dist.clone()));
    let gamma = rat_pow2(1, 8);
    let inverter = Arc::new(ProductInverter::new(dist, gamma).unwrap());
    let alpha = rat(1, 4);
    let mut rng = substream(31, "pipeline-low-degree");
    let composed = learn_over_mu(
        &f,
        sampler.clone(),
        inverter.clone(),
        &LowDegreeLearner::new(2),
        &alpha,
        &rat(1, 10),
        &LearnOptions::default(),
        &mut rng,
    )
    .unwrap();
    let err = composed
        .exact_mu_error_conditional(sampler.as_ref(), &target, 24)
        .unwrap();
    // The degree-2 expansion captures the composed target exactly, so all
    // residual error is inverter failure mass.
    assert!(err <= inverter.fail_bound(), "error {err}");
    assert!(err <= alpha);
}

/// A chain-built inverter slots into the reduction behind the same trait,
/// evaluated by seeded Monte-Carlo.
#[test]
fn chain_inverter_through_the_reduction() {
    let target = TruthTable::and(2).unwrap();
    let f = QueryOracle::from_table(target.clone());
    let dist = ProductDistribution::from_pairs(&[(3, 2), (1, 1)]).unwrap();
    let sampler = Arc::new(ProductSampler::new(dist.clone()));
    let coins = dist.coin_length();
    let sampler_table = TruthTable::from_index_fn(coins, 2, {
        let dist = dist.clone();
        move |w| {
            prod_samp(&dist, &BitString::from_value(w, coins))
                .unwrap()
                .value()
        }
    })
    .unwrap();
    let params = ChainParams {
        m_override: Some(1),
        t_override: Some(2),
        rounds: 24,
        target_distance: rat(1, 16),
        declared_fail: rat(1, 20),
        ..Default::default()
    };
    let chain = chain_distributional_inverter(&sampler_table, &params, &|g| {
        Ok(Arc::new(BruteForceOracle::new(g)) as Arc<dyn invlearn::amplify::InverterOracle>)
    })
    .unwrap();

    let alpha = rat(1, 4);
    let mut rng = substream(32, "pipeline-chain");
    let composed = learn_over_mu(
        &f,
        sampler.clone(),
        Arc::new(chain),
        &BruteForceLearner,
        &alpha,
        &rat(1, 10),
        &LearnOptions::default(),
        &mut rng,
    )
    .unwrap();
    let mut eval_rng = substream(33, "pipeline-chain-eval");
    let err = composed
        .empirical_mu_error(sampler.as_ref(), &target, 20_000, &mut eval_rng)
        .unwrap();
    // The chain is conditionally exact here (uniform-preimage strong
    // inverter), so the measured error is failure mass plus noise.
    assert!(err < 0.05, "measured error {err}");
}

/// Truth-table files round-trip through the text format and drive the
/// query-oracle plumbing unchanged.
#[test]
fn table_text_format_preserves_learn_behavior() {
    let target = TruthTable::majority(3).unwrap();
    let reloaded = TruthTable::from_text(&target.to_text()).unwrap();
    assert_eq!(reloaded, target);
    let f = QueryOracle::from_table(reloaded);
    for x in 0..8u64 {
        let input = BitString::from_value(x, 3);
        assert_eq!(
            f.query_bit(&input).unwrap(),
            target.eval_bit(&input).unwrap()
        );
    }
}
