//! Flat key-value experiment configuration with command-line overrides.
//!
//! Config files are lines of `key = value`; `#` starts a comment. Every key
//! must belong to the command's known set so typos surface as configuration
//! errors naming the offending field. `--set key=value` overrides file
//! entries, and `--seed` overrides the `seed` key.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};

use invlearn::bits::{rat_to_f64, BitString, Rational, TruthTable};
use invlearn::dist::{
    IdentitySampler, ProductDistribution, ProductSampler, Sampler, TableSampler,
};
use invlearn::invert::{
    AlwaysFailInverter, DistributionalInverter, IdentityInverter, ProductInverter,
    UniformPreimageInverter,
};
use invlearn::learn::{BruteForceLearner, LowDegreeLearner, UniformLearner};

/// Keys accepted by every command.
const COMMON_KEYS: &[&str] = &["seed", "workers", "enum_cap"];

const LEARN_KEYS: &[&str] = &[
    "target",
    "dist",
    "learner",
    "inverter",
    "inverter_rounds",
    "alpha",
    "beta",
    "gamma",
    "trials",
    "error_samples",
    "default_label",
    "override_budget",
    "learner_share",
    "amp_m",
    "amp_t",
    "amp_reps",
    "amp_rounds",
    "amp_c",
    "amp_target_distance",
    "amp_declared_fail",
];

const SUITE_KEYS: &[&str] = &["suite_max_k", "suite_gammas", "bitinv"];

const AMPLIFY_KEYS: &[&str] = &[
    "amp_target",
    "dist",
    "amp_c",
    "amp_m",
    "amp_t",
    "amp_reps",
    "amp_rounds",
    "amp_trials",
    "amp_weak_fraction",
    "amp_weak_seed",
    "amp_target_distance",
    "amp_declared_fail",
    "amp_success_threshold",
    "amp_tv_threshold",
];

/// A parsed, override-applied key-value configuration.
#[derive(Clone, Debug)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected key = value", lineno + 1))?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for entry in overrides {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| anyhow!("--set {entry:?}: expected key=value"))?;
            self.values
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    /// Rejects keys outside the command's vocabulary.
    pub fn check_known_keys(&self, command_keys: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !COMMON_KEYS.contains(&key.as_str()) && !command_keys.contains(&key.as_str()) {
                bail!("unknown config field {key:?}");
            }
        }
        Ok(())
    }

    /// The normalized `key = value` view echoed into reports.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values.clone()
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.raw(key).unwrap_or(default)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .ok_or_else(|| anyhow!("missing required config field {key:?}"))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| anyhow!("config field {key:?}: invalid integer {v:?}")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => Ok(Some(v.parse().map_err(|_| {
                anyhow!("config field {key:?}: invalid integer {v:?}")
            })?)),
        }
    }

    pub fn opt_u32(&self, key: &str) -> Result<Option<u32>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => Ok(Some(v.parse().map_err(|_| {
                anyhow!("config field {key:?}: invalid integer {v:?}")
            })?)),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(v) => bail!("config field {key:?}: invalid boolean {v:?}"),
        }
    }

    pub fn rational(&self, key: &str) -> Result<Rational> {
        let v = self.require(key)?;
        parse_rational(v).map_err(|e| anyhow!("config field {key:?}: {e}"))
    }

    pub fn rational_or(&self, key: &str, default: Rational) -> Result<Rational> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_rational(v).map_err(|e| anyhow!("config field {key:?}: {e}")),
        }
    }

    pub fn rational_list_or(&self, key: &str, default: &[Rational]) -> Result<Vec<Rational>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some("") => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|part| !part.is_empty())
                .map(|part| parse_rational(part).map_err(|e| anyhow!("config field {key:?}: {e}")))
                .collect(),
        }
    }
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let (num, den) = text
        .split_once('/')
        .ok_or_else(|| anyhow!("expected num/den, got {text:?}"))?;
    let num: i64 = num.trim().parse().map_err(|_| anyhow!("bad numerator in {text:?}"))?;
    let den: i64 = den.trim().parse().map_err(|_| anyhow!("bad denominator in {text:?}"))?;
    if den <= 0 {
        bail!("denominator must be positive in {text:?}");
    }
    Ok(invlearn::bits::rat(num, den))
}

pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn check_learn_keys(config: &RawConfig) -> Result<()> {
    config.check_known_keys(LEARN_KEYS)
}

pub fn check_suite_keys(config: &RawConfig) -> Result<()> {
    config.check_known_keys(SUITE_KEYS)
}

pub fn check_amplify_keys(config: &RawConfig) -> Result<()> {
    config.check_known_keys(AMPLIFY_KEYS)
}

/// The sampler described by the `dist` field.
pub enum DistSpec {
    Product(ProductDistribution),
    Identity(usize),
    Table(TruthTable),
}

impl DistSpec {
    pub fn parse(config: &RawConfig) -> Result<Self> {
        let text = config.require("dist")?;
        if let Some(n) = text.strip_prefix("identity:") {
            let n: usize = n
                .parse()
                .map_err(|_| anyhow!("config field \"dist\": bad identity arity {n:?}"))?;
            return Ok(DistSpec::Identity(n));
        }
        if let Some(path) = text.strip_prefix("table:") {
            let table_text = std::fs::read_to_string(path.trim())
                .with_context(|| format!("config field \"dist\": reading table {path}"))?;
            let table = TruthTable::from_text(&table_text)
                .map_err(|e| anyhow!("config field \"dist\": {e}"))?;
            return Ok(DistSpec::Table(table));
        }
        let dist = ProductDistribution::parse(text)
            .map_err(|e| anyhow!("config field \"dist\": {e}"))?;
        Ok(DistSpec::Product(dist))
    }

    pub fn sampler(&self) -> Arc<dyn Sampler> {
        match self {
            DistSpec::Product(d) => Arc::new(ProductSampler::new(d.clone())),
            DistSpec::Identity(n) => Arc::new(IdentitySampler::new(*n)),
            DistSpec::Table(t) => Arc::new(TableSampler::new(t.clone())),
        }
    }

    pub fn output_length(&self) -> usize {
        match self {
            DistSpec::Product(d) => d.n(),
            DistSpec::Identity(n) => *n,
            DistSpec::Table(t) => t.out_len(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DistSpec::Product(d) => format!("{d:?}"),
            DistSpec::Identity(n) => format!("identity:{n}"),
            DistSpec::Table(t) => format!("table(arity={}, out={})", t.arity(), t.out_len()),
        }
    }

    /// Tabulates the sampler for inverters that need the full map.
    pub fn sampler_table(&self, enum_cap: usize) -> Result<TruthTable> {
        let sampler = self.sampler();
        let coins = sampler.coin_length();
        if coins > enum_cap {
            bail!(
                "sampler coin length {coins} exceeds the enumeration cap {enum_cap} \
                 (config field \"enum_cap\")"
            );
        }
        TruthTable::from_index_fn(coins, sampler.output_length(), move |w| {
            sampler
                .sample(&BitString::from_value(w, coins))
                .expect("coin length fixed")
                .value()
        })
        .map_err(|e| anyhow!("tabulating sampler: {e}"))
    }
}

/// The learning target described by the `target` field.
pub fn parse_target(config: &RawConfig, arity: usize) -> Result<TruthTable> {
    let text = config.require("target")?;
    if let Some(path) = text.strip_prefix("tt:") {
        let table_text = std::fs::read_to_string(path.trim())
            .with_context(|| format!("config field \"target\": reading table {path}"))?;
        let table = TruthTable::from_text(&table_text)
            .map_err(|e| anyhow!("config field \"target\": {e}"))?;
        if table.arity() != arity || table.out_len() != 1 {
            bail!(
                "config field \"target\": table is {}->{} bits, expected {arity}->1",
                table.arity(),
                table.out_len()
            );
        }
        return Ok(table);
    }
    let table = match text {
        "and" => TruthTable::and(arity),
        "or" => TruthTable::or(arity),
        "parity" => TruthTable::parity(arity),
        "majority" => TruthTable::majority(arity),
        "const0" => TruthTable::constant(arity, false),
        "const1" => TruthTable::constant(arity, true),
        other => bail!("config field \"target\": unknown builtin {other:?}"),
    };
    table.map_err(|e| anyhow!("config field \"target\": {e}"))
}

/// The learner described by the `learner` field.
pub fn parse_learner(config: &RawConfig) -> Result<Box<dyn UniformLearner>> {
    let text = config.str_or("learner", "brute_force");
    if text == "brute_force" {
        return Ok(Box::new(BruteForceLearner));
    }
    if let Some(rest) = text.strip_prefix("low_degree(") {
        let degree = rest
            .strip_suffix(')')
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| anyhow!("config field \"learner\": bad degree in {text:?}"))?;
        return Ok(Box::new(LowDegreeLearner::new(degree)));
    }
    bail!("config field \"learner\": unknown learner {text:?}")
}

/// Chain parameters shared by learn (inverter = chain) and amplify runs.
pub fn parse_chain_params(config: &RawConfig) -> Result<invlearn::amplify::ChainParams> {
    Ok(invlearn::amplify::ChainParams {
        target_distance: config.rational_or("amp_target_distance", invlearn::bits::rat(1, 4))?,
        c_override: config.opt_u32("amp_c")?,
        m_override: config.opt_usize("amp_m")?,
        t_override: config.opt_usize("amp_t")?,
        reps_override: config.opt_usize("amp_reps")?,
        rounds: config.usize_or("amp_rounds", 16)?,
        declared_fail: config.rational_or("amp_declared_fail", invlearn::bits::rat(1, 20))?,
    })
}

/// The inverter described by the `inverter` field, built against the
/// configured distribution.
pub fn parse_inverter(
    config: &RawConfig,
    dist: &DistSpec,
    gamma: &Rational,
    enum_cap: usize,
) -> Result<Arc<dyn DistributionalInverter>> {
    let text = config.str_or("inverter", "prod_inv");
    match text {
        "prod_inv" => match dist {
            DistSpec::Product(d) => Ok(Arc::new(
                ProductInverter::new(d.clone(), gamma.clone())
                    .map_err(|e| anyhow!("config field \"gamma\": {e}"))?,
            )),
            _ => bail!("config field \"inverter\": prod_inv needs a product dist"),
        },
        "perfect" => {
            let rounds = config.u64_or("inverter_rounds", 2)? as u32;
            let table = dist.sampler_table(enum_cap)?;
            Ok(Arc::new(
                UniformPreimageInverter::new(&table, rounds)
                    .map_err(|e| anyhow!("building perfect inverter: {e}"))?,
            ))
        }
        "identity" => match dist {
            DistSpec::Identity(n) => Ok(Arc::new(IdentityInverter::new(*n))),
            _ => bail!("config field \"inverter\": identity needs dist = identity:<n>"),
        },
        "always_fail" => Ok(Arc::new(AlwaysFailInverter)),
        "chain" => {
            let table = dist.sampler_table(enum_cap)?;
            let params = parse_chain_params(config)?;
            let chain = invlearn::amplify::chain_distributional_inverter(&table, &params, &|g| {
                Ok(Arc::new(invlearn::amplify::BruteForceOracle::new(g))
                    as Arc<dyn invlearn::amplify::InverterOracle>)
            })
            .map_err(|e| anyhow!("building chain inverter: {e}"))?;
            Ok(Arc::new(chain))
        }
        other => bail!("config field \"inverter\": unknown inverter {other:?}"),
    }
}

/// Worker-pool size: the `INVLEARN_WORKERS` environment variable overrides
/// the `workers` config key; both default to 1.
pub fn worker_count(config: &RawConfig) -> Result<usize> {
    if let Ok(env) = std::env::var("INVLEARN_WORKERS") {
        return env
            .parse()
            .map_err(|_| anyhow!("INVLEARN_WORKERS: invalid integer {env:?}"));
    }
    config.usize_or("workers", 1)
}

pub fn rational_to_json(r: &Rational) -> serde_json::Value {
    serde_json::json!({
        "exact": rational_string(r),
        "approx": rat_to_f64(r),
    })
}
