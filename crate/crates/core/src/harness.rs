//! Seeded OIM/DIM trials, portfolio aggregation and TOML reports.
//!
//! Every trial draws one initial phase vector and one noise seed from
//! [`trial_seed`]; all models in the trial start from those phases and see
//! the same noise stream. Trials run in parallel and are reassembled in trial
//! order, so reports depend only on the [`TrialSpec`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bifurcation::{estimate_from_run, BifurcationEstimate, DeviationOptions, DEFAULT_THRESHOLD};
use crate::dynamics::{integrate, round_to_spins, AnnealSchedule, IntegratorConfig, ModelKind, PhaseState};
use crate::error::{Error, Result};
use crate::graph::{generate_random_graph, parse_graph, CouplingMatrix, CouplingMode, Graph, SpinConfig};
use crate::oracle::{exact_ground_state, OracleOptions};
use crate::scalar::Real;

pub const SCHEMA_VERSION: u32 = 1;

/// SplitMix64 finaliser.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(base_seed) ^ trial)`.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    splitmix64(splitmix64(base_seed) ^ trial as u64)
}

/// FNV-1a, used for content digests in reports.
pub fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes.into_iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn hex(h: u64) -> String {
    format!("{h:016x}")
}

/// Hex digest of the canonical (spin 0 up) configuration.
pub fn spin_hash(s: &SpinConfig) -> String {
    hex(fnv1a(s.canonical().spins().iter().map(|&v| v as u8)))
}

fn phase_digest<T: Real>(phi: &[T]) -> String {
    hex(fnv1a(phi.iter().flat_map(|p| p.to_f64_lossy().to_bits().to_le_bytes())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSource {
    File { path: PathBuf },
    Generated { nodes: usize, edges: usize, weight: f64, seed: u64 },
}

impl GraphSource {
    pub fn load<T: Real>(&self) -> Result<Graph<T>> {
        match self {
            GraphSource::File { path } => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let name = path.file_name().map(|s| s.to_string_lossy().into_owned());
                let g = parse_graph(&text)?;
                Ok(match name {
                    Some(name) => g.with_name(name),
                    None => g,
                })
            }
            &GraphSource::Generated {
                nodes,
                edges,
                weight,
                seed,
            } => generate_random_graph(nodes, edges, T::lit(weight), seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub k: f64,
    /// `(t, K_s)` breakpoints.
    pub points: Vec<(f64, f64)>,
    pub total_time: f64,
}

impl ScheduleSpec {
    pub fn linear_ramp(k: f64, ks_max: f64, total_time: f64) -> Self {
        ScheduleSpec {
            k,
            points: vec![(0.0, 0.0), (total_time, ks_max)],
            total_time,
        }
    }

    pub fn build<T: Real>(&self) -> Result<AnnealSchedule<T>> {
        AnnealSchedule::new(
            T::lit(self.k),
            self.points.iter().map(|&(t, ks)| (T::lit(t), T::lit(ks))).collect(),
            T::lit(self.total_time),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    pub dt: f64,
    pub noise_amplitude: f64,
    pub record_stride: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        let d = IntegratorConfig::<f64>::default();
        IntegratorSpec {
            dt: d.dt,
            noise_amplitude: d.noise_amplitude,
            record_stride: d.record_stride,
        }
    }
}

impl IntegratorSpec {
    pub fn build<T: Real>(&self, seed: u64) -> Result<IntegratorConfig<T>> {
        let cfg = IntegratorConfig {
            dt: T::lit(self.dt),
            noise_amplitude: T::lit(self.noise_amplitude),
            seed,
            record_stride: self.record_stride,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub graph: GraphSource,
    #[serde(default = "default_coupling")]
    pub coupling: CouplingMode,
    pub models: Vec<ModelKind>,
    pub n_trials: usize,
    pub base_seed: u64,
    pub schedule: ScheduleSpec,
    pub integrator: IntegratorSpec,
    /// Worker threads; `None` uses the global pool.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Attach the exact ground state when the graph is small enough.
    #[serde(default)]
    pub oracle_limit: Option<usize>,
}

fn default_coupling() -> CouplingMode {
    CouplingMode::Antiferromagnetic
}

fn check_seed(name: &str, seed: u64) -> Result<()> {
    if seed > i64::MAX as u64 {
        return Err(Error::InvalidArgument(format!("{name} {seed} exceeds {}", i64::MAX)));
    }
    Ok(())
}

impl TrialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidArgument("n_trials must be >= 1".into()));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidArgument("no models selected".into()));
        }
        let mut seen = self.models.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.models.len() {
            return Err(Error::InvalidArgument("duplicate model".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidArgument("workers must be >= 1".into()));
        }
        check_seed("base seed", self.base_seed)?;
        if let GraphSource::Generated { seed, .. } = self.graph {
            check_seed("graph seed", seed)?;
        }
        self.schedule.build::<f64>()?;
        self.integrator.build::<f64>(0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub h: f64,
    pub cut: f64,
    pub spins: String,
    pub spin_hash: String,
    /// Digest of the initial phase vector shared by all models of the trial.
    pub initial_phases: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub h: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: ModelKind,
    pub best_cut: f64,
    pub best_h: f64,
    /// Trials reaching `best_cut`.
    pub success_count: usize,
    /// Trials reaching the oracle optimum, when known.
    #[serde(default)]
    pub oracle_hits: Option<usize>,
    pub histogram: Vec<HistogramBin>,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReference {
    pub h_min: f64,
    pub optimal_cut: f64,
    pub degeneracy: u64,
}

/// Which model reached the reference cut more often.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reference_cut: f64,
    pub dim_successes: usize,
    pub oim_successes: usize,
    /// `None` on a tie.
    pub leader: Option<ModelKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub crate_version: String,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub xi: f64,
    pub graph_digest: String,
    pub spec: TrialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub created_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioReport {
    pub schema_version: u32,
    pub portfolio_best_cut: f64,
    pub portfolio_best_models: Vec<ModelKind>,
    #[serde(default)]
    pub oracle: Option<OracleReference>,
    #[serde(default)]
    pub comparison: Option<Comparison>,
    pub manifest: Manifest,
    pub models: Vec<ModelSummary>,
    /// Wall-clock data; excluded from determinism comparisons.
    #[serde(default)]
    pub metadata: Option<Metadata>,
}

fn graph_digest<T: Real>(g: &Graph<T>) -> String {
    hex(fnv1a(g.to_rudy().into_bytes()))
}

/// Histogram key: `H` to 9 decimals, exact for integer energies.
fn energy_key(h: f64) -> i64 {
    (h * 1e9).round() as i64
}

fn same_value(a: f64, b: f64) -> bool {
    energy_key(a) == energy_key(b)
}

fn summarize(model: ModelKind, trials: Vec<TrialRecord>, optimum: Option<f64>) -> ModelSummary {
    let best_cut = trials.iter().map(|r| r.cut).fold(f64::NEG_INFINITY, f64::max);
    let best_h = trials.iter().map(|r| r.h).fold(f64::INFINITY, f64::min);
    let success_count = trials.iter().filter(|r| same_value(r.cut, best_cut)).count();
    let oracle_hits = optimum.map(|c| trials.iter().filter(|r| same_value(r.cut, c)).count());
    let mut bins: BTreeMap<i64, HistogramBin> = BTreeMap::new();
    for r in &trials {
        bins.entry(energy_key(r.h))
            .or_insert(HistogramBin { h: r.h, count: 0 })
            .count += 1;
    }
    ModelSummary {
        model,
        best_cut,
        best_h,
        success_count,
        oracle_hits,
        histogram: bins.into_values().collect(),
        trials,
    }
}

fn run_trial<T: Real>(
    spec: &TrialSpec,
    g: &Graph<T>,
    j: &CouplingMatrix<T>,
    schedule: &AnnealSchedule<T>,
    trial: usize,
) -> Result<Vec<TrialRecord>> {
    let seed = trial_seed(spec.base_seed, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi0 = PhaseState::<T>::uniform(g.n(), &mut rng);
    let digest = phase_digest(phi0.phases());
    let cfg = spec.integrator.build::<T>(splitmix64(seed))?;
    spec.models
        .iter()
        .map(|&model| {
            let traj = integrate(model, j, &phi0, schedule, &cfg).map_err(|e| Error::Trial {
                model,
                trial,
                source: Box::new(e),
            })?;
            let s = round_to_spins(traj.final_state.phases());
            let h = j.ising_energy(&s)?;
            let cut = match spec.coupling {
                CouplingMode::Antiferromagnetic => g.cut_of_spins(&s)?,
                CouplingMode::Ferromagnetic => g.cut_from_energy(-h),
            };
            Ok(TrialRecord {
                trial,
                h: h.to_f64_lossy(),
                cut: cut.to_f64_lossy(),
                spins: s.to_string(),
                spin_hash: spin_hash(&s),
                initial_phases: digest.clone(),
            })
        })
        .collect()
}

/// Runs every trial of `spec` for every selected model.
pub fn run_portfolio<T: Real>(spec: &TrialSpec) -> Result<PortfolioReport> {
    spec.validate()?;
    let g: Graph<T> = spec.graph.load()?;
    let j = CouplingMatrix::from_graph(&g, spec.coupling);
    let schedule = spec.schedule.build::<T>()?;

    let run = || {
        (0..spec.n_trials)
            .into_par_iter()
            .map(|t| run_trial(spec, &g, &j, &schedule, t))
            .collect::<Result<Vec<_>>>()
    };
    let per_trial = match spec.workers {
        None => run()?,
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?
            .install(run)?,
    };

    let oracle = match spec.oracle_limit {
        Some(limit) if g.n() <= limit => {
            let r = exact_ground_state(
                &j,
                &OracleOptions {
                    n_limit: limit,
                    ..Default::default()
                },
            )?;
            let optimal_cut = match spec.coupling {
                CouplingMode::Antiferromagnetic => r.optimal_cut,
                CouplingMode::Ferromagnetic => g.cut_from_energy(-r.h_min),
            };
            Some(OracleReference {
                h_min: r.h_min.to_f64_lossy(),
                optimal_cut: optimal_cut.to_f64_lossy(),
                degeneracy: r.degeneracy,
            })
        }
        _ => None,
    };
    let optimum = oracle.as_ref().map(|o| o.optimal_cut);

    let models: Vec<ModelSummary> = spec
        .models
        .iter()
        .enumerate()
        .map(|(m, &model)| {
            let trials = per_trial.iter().map(|recs| recs[m].clone()).collect();
            summarize(model, trials, optimum)
        })
        .collect();

    let portfolio_best_cut = models.iter().map(|s| s.best_cut).fold(f64::NEG_INFINITY, f64::max);
    let portfolio_best_models = models
        .iter()
        .filter(|s| same_value(s.best_cut, portfolio_best_cut))
        .map(|s| s.model)
        .collect();

    let comparison = {
        let reference_cut = optimum.unwrap_or(portfolio_best_cut);
        let hits = |k: ModelKind| {
            models
                .iter()
                .find(|s| s.model == k)
                .map(|s| s.trials.iter().filter(|r| same_value(r.cut, reference_cut)).count())
        };
        match (hits(ModelKind::Dim), hits(ModelKind::Oim)) {
            (Some(d), Some(o)) => Some(Comparison {
                reference_cut,
                dim_successes: d,
                oim_successes: o,
                leader: match d.cmp(&o) {
                    std::cmp::Ordering::Greater => Some(ModelKind::Dim),
                    std::cmp::Ordering::Less => Some(ModelKind::Oim),
                    std::cmp::Ordering::Equal => None,
                },
            }),
            _ => None,
        }
    };

    Ok(PortfolioReport {
        schema_version: SCHEMA_VERSION,
        portfolio_best_cut,
        portfolio_best_models,
        oracle,
        comparison,
        manifest: Manifest {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            graph_nodes: g.n(),
            graph_edges: g.edge_count(),
            xi: j.negated_pair_sum().to_f64_lossy(),
            graph_digest: graph_digest(&g),
            spec: spec.clone(),
        },
        models,
        metadata: None,
    })
}

impl PortfolioReport {
    pub fn model(&self, model: ModelKind) -> Result<&ModelSummary> {
        self.models
            .iter()
            .find(|s| s.model == model)
            .ok_or(Error::ModelAbsent(model))
    }

    /// Per-trial energies of one model, in trial order.
    pub fn energies(&self, model: ModelKind) -> Result<Vec<f64>> {
        Ok(self.model(model)?.trials.iter().map(|r| r.h).collect())
    }

    /// Report without the metadata block.
    pub fn without_metadata(&self) -> Self {
        PortfolioReport {
            metadata: None,
            ..self.clone()
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Report(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let r: PortfolioReport = toml::from_str(text).map_err(|e| Error::Report(e.to_string()))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Report(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        Ok(r)
    }
}

/// Energy histogram of one model, bins in ascending `H`.
pub fn emit_histogram(report: &PortfolioReport, model: ModelKind) -> Result<Vec<HistogramBin>> {
    Ok(report.model(model)?.histogram.clone())
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes the report as TOML, stamping a fresh metadata block.
pub fn export_report(report: &PortfolioReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let stamped = PortfolioReport {
        metadata: Some(Metadata {
            created_unix: now_unix(),
        }),
        ..report.clone()
    };
    fs::write(path, stamped.to_toml()?).map_err(|e| Error::io(path, e))
}

pub fn import_report(path: impl AsRef<Path>) -> Result<PortfolioReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    PortfolioReport::from_toml(&text)
}

/// Re-runs the manifest of a report.
pub fn replay<T: Real>(report: &PortfolioReport) -> Result<PortfolioReport> {
    run_portfolio::<T>(&report.manifest.spec)
}

/// Fails unless both reports hold identical per-trial energies for every model.
pub fn check_replay(original: &PortfolioReport, again: &PortfolioReport) -> Result<()> {
    for s in &original.models {
        let a: Vec<u64> = s.trials.iter().map(|r| r.h.to_bits()).collect();
        let b: Vec<u64> = again.energies(s.model)?.iter().map(|h| h.to_bits()).collect();
        if a != b {
            return Err(Error::Report(format!("replay of {} differs in per-trial energies", s.model)));
        }
    }
    Ok(())
}

/// Generates a seeded random graph and writes it in rudy format.
pub fn generate_graph_file(n: usize, m: usize, weight: f64, seed: u64, path: impl AsRef<Path>) -> Result<Graph<f64>> {
    let path = path.as_ref();
    let g = generate_random_graph(n, m, weight, seed)?;
    fs::write(path, g.to_rudy()).map_err(|e| Error::io(path, e))?;
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSpec {
    pub graph: GraphSource,
    pub seed: u64,
    pub schedule: ScheduleSpec,
    pub integrator: IntegratorSpec,
    pub threshold: f64,
    #[serde(default)]
    pub deviation: DeviationOptions,
}

impl EstimateSpec {
    pub fn new(graph: GraphSource, seed: u64, schedule: ScheduleSpec, integrator: IntegratorSpec) -> Self {
        EstimateSpec {
            graph,
            seed,
            schedule,
            integrator,
            threshold: DEFAULT_THRESHOLD,
            deviation: DeviationOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub estimate: BifurcationEstimate,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub xi: f64,
    pub graph_digest: String,
    pub spec: EstimateSpec,
}

impl EstimateReport {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Report(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Report(e.to_string()))
    }
}

/// Seeded DIM run followed by the bifurcation estimate.
pub fn run_estimate<T: Real>(spec: &EstimateSpec) -> Result<EstimateReport> {
    check_seed("seed", spec.seed)?;
    let g: Graph<T> = spec.graph.load()?;
    let j = CouplingMatrix::from_graph(&g, CouplingMode::Antiferromagnetic);
    let schedule = spec.schedule.build::<T>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let phi0 = PhaseState::<T>::uniform(g.n(), &mut rng);
    let cfg = spec.integrator.build::<T>(splitmix64(spec.seed))?;
    let (estimate, _) = estimate_from_run(&j, &phi0, &schedule, &cfg, T::lit(spec.threshold), spec.deviation)?;
    Ok(EstimateReport {
        schema_version: SCHEMA_VERSION,
        estimate,
        graph_nodes: g.n(),
        graph_edges: g.edge_count(),
        xi: j.negated_pair_sum().to_f64_lossy(),
        graph_digest: graph_digest(&g),
        spec: spec.clone(),
    })
}
