//! Monte Carlo campaigns: configuration, shot loops, per-round normalization,
//! error bars, threshold crossings and result files.

use std::collections::HashMap;
use std::path::Path;
use std::sync::RwLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_gadget_detailed, build_memory_experiment_for, Circuit, ControlKind, GadgetBlock, GadgetPlan, NoiseModel};
use crate::codes::{build_bacon_shor, build_lacross, CssCode, LaCrossLayout};
use crate::decoder::{decode, DecodeConfig, TannerGraph};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::logicals::{logical_basis, representative_partition, Basis};
use crate::sim::{extract_dem, FrameSampler};

/// One controlled step of a user-supplied gadget plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    /// `cnot` couples to the X partition, `cz` to the Z partition.
    pub kind: ControlKind,
    pub logical: usize,
    #[serde(default)]
    pub block: usize,
}

/// Teleported-gate protocol over copies of the configured code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSpec {
    #[serde(default = "one")]
    pub blocks: usize,
    pub steps: Vec<PlanStep>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Memory {
        #[serde(default)]
        logical: usize,
    },
    Hadamard {
        #[serde(default)]
        logical: usize,
        #[serde(default)]
        reverse: bool,
    },
    Gadget(PlanSpec),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Memory { .. } => "memory",
            Experiment::Hadamard { .. } => "hadamard",
            Experiment::Gadget(_) => "gadget",
        }
    }

    /// Decoder settings tuned per experiment: min-sum scale 0.3 for memory,
    /// 0.2 for gadgets.
    pub fn default_decoder(&self) -> DecodeConfig {
        let min_sum_scale = match self {
            Experiment::Memory { .. } => 0.3,
            _ => 0.2,
        };
        DecodeConfig { min_sum_scale, ..DecodeConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub experiment: Experiment,
    pub ps: Vec<f64>,
    pub shots: usize,
    /// Error-correction rounds; the code distance when absent.
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// The experiment's default decoder when absent.
    #[serde(default)]
    pub decoder: DecodeConfig,
    /// Directory for the CSV and manifest.
    #[serde(default)]
    pub out: Option<std::path::PathBuf>,
}

impl ExperimentConfig {
    pub fn new(n: usize, k: usize, experiment: Experiment, ps: Vec<f64>, shots: usize) -> Self {
        let decoder = experiment.default_decoder();
        Self {
            n,
            k,
            experiment,
            ps,
            shots,
            rounds: None,
            seed: 0,
            decoder,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        if self.ps.is_empty() {
            return Err(Error::InvalidConfig("no physical error rates given".into()));
        }
        if let Some(&p) = self.ps.iter().find(|&&p| !(p > 0.0 && p <= 0.1)) {
            return Err(Error::InvalidConfig(format!("physical error rate {p} outside (0, 0.1]")));
        }
        if self.rounds == Some(0) {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        self.decoder.validate()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s)?;
        let explicit_decoder = value.get("decoder").is_some();
        let mut c: Self = serde_json::from_value(value)?;
        if !explicit_decoder {
            c.decoder = c.experiment.default_decoder();
        }
        c.validate()?;
        Ok(c)
    }

    /// Seed of the `index`-th p point.
    pub fn point_seed(&self, index: usize) -> u64 {
        // splitmix64 step, so neighbouring points get unrelated streams
        let mut z = self.seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

/// Circuit factory for one configuration; the code and partitions are built once.
#[derive(Clone, Debug)]
pub struct ExperimentSetup {
    pub code: CssCode,
    pub layout: LaCrossLayout,
    pub rounds: usize,
    plan: Option<GadgetPlan>,
    memory_logical: usize,
}

impl ExperimentSetup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let (code, layout) = build_lacross(config.n, config.k)?;
        let d = code.distance.unwrap_or(1);
        let rounds = config.rounds.unwrap_or(d);
        let gadget_rounds = |plan: &mut GadgetPlan| -> Result<()> {
            let fixed = plan.rounds_before + plan.rounds_between * (plan.steps.len() - 1);
            if rounds < fixed {
                return Err(Error::InvalidConfig(format!("gadget needs at least {fixed} rounds, got {rounds}")));
            }
            plan.rounds_after = rounds - fixed;
            Ok(())
        };
        let (plan, memory_logical) = match &config.experiment {
            Experiment::Memory { logical } => {
                if *logical >= code.k_logical {
                    return Err(Error::OutOfRange(format!("logical {logical} of {}", code.k_logical)));
                }
                (None, *logical)
            }
            Experiment::Hadamard { logical, reverse } => {
                let mut plan = GadgetPlan::hadamard(&code, &layout, *logical, *reverse)?;
                gadget_rounds(&mut plan)?;
                (Some(plan), 0)
            }
            Experiment::Gadget(spec) => {
                let mut plan = build_plan(&code, &layout, spec)?;
                gadget_rounds(&mut plan)?;
                (Some(plan), 0)
            }
        };
        Ok(Self {
            code,
            layout,
            rounds,
            plan,
            memory_logical,
        })
    }

    pub fn circuit(&self, p: f64) -> Result<Circuit> {
        let noise = if p == 0.0 { NoiseModel::noiseless() } else { NoiseModel::uniform(p)? };
        match &self.plan {
            None => build_memory_experiment_for(&self.code, &self.layout, self.rounds, noise, self.memory_logical),
            Some(plan) => Ok(build_gadget_detailed(plan, noise)?.circuit),
        }
    }
}

/// Resolves a plan file against the configured code. The Bacon-Shor side is
/// the first step's partition size.
pub fn build_plan(code: &CssCode, layout: &LaCrossLayout, spec: &PlanSpec) -> Result<GadgetPlan> {
    if spec.blocks == 0 || spec.steps.is_empty() {
        return Err(Error::InvalidConfig("plan needs at least one block and one step".into()));
    }
    let logicals = logical_basis(code, layout);
    let mut partitions = Vec::with_capacity(spec.steps.len());
    for step in &spec.steps {
        let logical = logicals
            .get(step.logical)
            .ok_or_else(|| Error::OutOfRange(format!("logical {} of {}", step.logical, logicals.len())))?;
        let basis = match step.kind {
            ControlKind::Cnot => Basis::X,
            ControlKind::Cz => Basis::Z,
        };
        partitions.push(representative_partition(code, layout, logical, basis)?);
    }
    let bs = build_bacon_shor(partitions[0].len())?;
    let blocks = (0..spec.blocks)
        .map(|_| GadgetBlock {
            code: code.clone(),
            layout: *layout,
        })
        .collect();
    let mut plan = GadgetPlan::new(bs, blocks);
    for (step, part) in spec.steps.iter().zip(partitions) {
        plan.add_step(step.kind, step.block, part)?;
    }
    Ok(plan)
}

/// `1 - (1 - p_L)^(1/rounds)`.
pub fn normalize_per_round(p_l: f64, rounds: usize) -> Result<f64> {
    if rounds == 0 {
        return Err(Error::InvalidConfig("rounds must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&p_l) {
        return Err(Error::NormalizationUndefined(p_l));
    }
    // expm1/ln1p keep precision for tiny rates
    Ok(-((1.0 - p_l).ln() / rounds as f64).exp_m1())
}

/// Inverse of [`normalize_per_round`].
pub fn denormalize(p_round: f64, rounds: usize) -> f64 {
    -((rounds as f64) * (-p_round).ln_1p()).exp_m1()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub p: f64,
    pub shots: usize,
    pub failures: usize,
    /// Raw logical failure rate over the whole circuit.
    pub p_l: f64,
    /// Per-round rate.
    pub p_l_round: f64,
    /// Binomial standard deviation of `p_l`, propagated to `p_l_round`.
    pub stderr: f64,
    pub rounds: usize,
    pub seed: u64,
}

impl ResultRow {
    pub fn new(p: f64, shots: usize, failures: usize, rounds: usize, seed: u64) -> Result<Self> {
        if shots == 0 || failures > shots {
            return Err(Error::InvalidConfig(format!("{failures} failures in {shots} shots")));
        }
        let p_l = failures as f64 / shots as f64;
        let p_l_round = normalize_per_round(p_l, rounds)?;
        let sigma = (p_l * (1.0 - p_l) / shots as f64).sqrt();
        // dP/dp_L = (1 - p_L)^(1/r - 1) / r
        let slope = (1.0 - p_l).powf(1.0 / rounds as f64 - 1.0) / rounds as f64;
        Ok(Self {
            p,
            shots,
            failures,
            p_l,
            p_l_round,
            stderr: sigma * slope,
            rounds,
            seed,
        })
    }
}

/// Exact decoder memo; decoding is a pure function of the syndrome.
struct DecodeCache {
    map: RwLock<HashMap<Vec<u64>, Vec<u64>>>,
}

const CACHE_LIMIT: usize = 1 << 20;

impl DecodeCache {
    fn new() -> Self {
        Self { map: RwLock::new(HashMap::new()) }
    }

    fn predict(&self, graph: &TannerGraph, syndrome: &BitVector, config: &DecodeConfig) -> Result<Vec<u64>> {
        if let Some(hit) = self.map.read().expect("cache lock").get(syndrome.words()) {
            return Ok(hit.clone());
        }
        let obs = decode(graph, syndrome, config)?.observables.words().to_vec();
        let mut map = self.map.write().expect("cache lock");
        if map.len() < CACHE_LIMIT {
            map.insert(syndrome.words().to_vec(), obs.clone());
        }
        Ok(obs)
    }
}

/// Samples and decodes `shots` shots of `circuit`; returns the failure count.
pub fn count_failures(circuit: &Circuit, shots: usize, seed: u64, config: &DecodeConfig) -> Result<usize> {
    config.validate()?;
    let sampler = FrameSampler::new(circuit)?;
    let dem = extract_dem(circuit)?;
    let graph = TannerGraph::from_dem(&dem)?;
    let cache = DecodeCache::new();
    let batches = shots.div_ceil(64);
    let per_batch: Vec<usize> = (0..batches as u64)
        .into_par_iter()
        .map(|b| -> Result<usize> {
            let sample = sampler.sample_batch(seed, b);
            let lanes = 64.min(shots - b as usize * 64);
            let mut failures = 0;
            for lane in 0..lanes {
                let syndrome = sample.shot_detectors(lane);
                let actual = sample.shot_observables(lane);
                if cache.predict(&graph, &syndrome, config)? != actual.words() {
                    failures += 1;
                }
            }
            Ok(failures)
        })
        .collect::<Result<_>>()?;
    Ok(per_batch.into_iter().sum())
}

/// Per p point: build the circuit and DEM, sample, decode, normalize.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let setup = ExperimentSetup::new(config)?;
    config
        .ps
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let seed = config.point_seed(i);
            let circuit = setup.circuit(p)?;
            let failures = count_failures(&circuit, config.shots, seed, &config.decoder)?;
            ResultRow::new(p, config.shots, failures, setup.rounds, seed)
        })
        .collect()
}

/// Least-squares slope of `ln P_L` against `ln p` over rows with failures.
pub fn loglog_slope(rows: &[ResultRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.p_l_round > 0.0).map(|r| (r.p.ln(), r.p_l_round.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "p", rename_all = "kebab-case")]
pub enum Crossing {
    At(f64),
    /// The curves coincide on the scanned grid.
    Degenerate,
    /// No sign change of the difference in the scanned range.
    Unbounded,
}

impl Crossing {
    pub fn value(self) -> Option<f64> {
        match self {
            Crossing::At(p) => Some(p),
            _ => None,
        }
    }
}

/// Per-round rate with a half-count floor so zero-failure points stay finite
/// in log space.
fn floored_rate(failures: usize, shots: usize, rounds: usize) -> f64 {
    let f = (failures as f64).max(0.5);
    normalize_per_round((f / shots as f64).min(1.0 - 1e-12), rounds).expect("rate below one")
}

/// First crossing of two curves on a shared p grid, by linear interpolation
/// of the log-rate difference in log p. `lower` is the smaller code.
pub fn curve_crossing(ps: &[f64], lower: &[f64], higher: &[f64]) -> Crossing {
    let diff: Vec<f64> = lower.iter().zip(higher).map(|(a, b)| b.ln() - a.ln()).collect();
    if diff.iter().all(|&x| x == 0.0) {
        return Crossing::Degenerate;
    }
    for i in 0..diff.len().saturating_sub(1) {
        let (a, b) = (diff[i], diff[i + 1]);
        if a == 0.0 {
            return Crossing::At(ps[i]);
        }
        if a.signum() != b.signum() {
            let t = a / (a - b);
            let (la, lb) = (ps[i].ln(), ps[i + 1].ln());
            return Crossing::At((la + t * (lb - la)).exp());
        }
    }
    if diff.last() == Some(&0.0) {
        return Crossing::At(*ps.last().expect("non-empty grid"));
    }
    Crossing::Unbounded
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub lower_label: String,
    pub higher_label: String,
    pub crossing: Crossing,
    /// 2.5 and 97.5 percentiles of bounded bootstrap crossings.
    pub interval: Option<(f64, f64)>,
    pub bootstrap_samples: usize,
    /// Fraction of bootstrap resamples without a crossing.
    pub unbounded_fraction: f64,
}

/// A labelled curve of one code in a threshold family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub distance: usize,
    pub rows: Vec<ResultRow>,
}

/// Crossings of adjacent-distance curves with binomial bootstrap intervals.
pub fn threshold_scan(curves: &[Curve], bootstrap: usize, seed: u64) -> Result<Vec<ThresholdEstimate>> {
    if curves.len() < 2 {
        return Err(Error::InvalidConfig("threshold scan needs at least two codes".into()));
    }
    let mut sorted: Vec<&Curve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.distance);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for pair in sorted.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let ps: Vec<f64> = lo.rows.iter().map(|r| r.p).collect();
        if ps.len() != hi.rows.len() || ps.iter().zip(&hi.rows).any(|(p, r)| (p - r.p).abs() > 1e-15) {
            return Err(Error::InvalidConfig(format!("curves {} and {} use different p grids", lo.label, hi.label)));
        }
        let rates = |c: &Curve| -> Vec<f64> { c.rows.iter().map(|r| floored_rate(r.failures, r.shots, r.rounds)).collect() };
        let crossing = curve_crossing(&ps, &rates(lo), &rates(hi));
        let mut resample = |c: &Curve| -> Result<Vec<f64>> {
            c.rows
                .iter()
                .map(|r| {
                    let b = Binomial::new(r.shots as u64, r.p_l).map_err(|e| Error::InvalidConfig(e.to_string()))?;
                    Ok(floored_rate(b.sample(&mut rng) as usize, r.shots, r.rounds))
                })
                .collect()
        };
        let mut values = Vec::with_capacity(bootstrap);
        for _ in 0..bootstrap {
            let (a, b) = (resample(lo)?, resample(hi)?);
            if let Crossing::At(p) = curve_crossing(&ps, &a, &b) {
                values.push(p);
            }
        }
        values.sort_by(f64::total_cmp);
        let interval = (!values.is_empty()).then(|| {
            let q = |f: f64| values[((values.len() - 1) as f64 * f).round() as usize];
            (q(0.025), q(0.975))
        });
        out.push(ThresholdEstimate {
            lower_label: lo.label.clone(),
            higher_label: hi.label.clone(),
            crossing,
            interval,
            bootstrap_samples: bootstrap,
            unbounded_fraction: if bootstrap == 0 { 0.0 } else { 1.0 - values.len() as f64 / bootstrap as f64 },
        });
    }
    Ok(out)
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from("p,shots,failures,p_L,P_L,stderr\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{},{},{}\n", r.p, r.shots, r.failures, r.p_l, r.p_l_round, r.stderr));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    /// SHA-256 of the text form of each point's circuit.
    pub circuit_hashes: Vec<String>,
    pub crate_version: String,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, rows: Vec<ResultRow>) -> Result<Self> {
        let setup = ExperimentSetup::new(config)?;
        let circuit_hashes = config.ps.iter().map(|&p| Ok(setup.circuit(p)?.content_hash())).collect::<Result<_>>()?;
        Ok(Self {
            config: config.clone(),
            rows,
            circuit_hashes,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }
}

/// Writes `results.csv` and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, manifest: &RunManifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("results.csv"), rows_to_csv(&manifest.rows))?;
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}
