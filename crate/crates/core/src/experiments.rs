//! Seeded experiment suites with CSV output.
//!
//! Every trial is an independent job keyed by `(point, trial)`. Jobs may run
//! on several threads, but results are merged in key order, so the emitted
//! CSV depends only on the configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::generators::{
    barabasi_albert, plant_quasi_clique, rng_stream, BaConfig, PlantMode, PlantParams,
    PlantedInstance,
};
use crate::graph::{adjacency, edge_density, Gamma, Graph, VertexSet};
use crate::metrics::{density_relative_error, recovers_block, size_relative_error, TrialMetrics};
use crate::oracle::{max_quasi_clique_bnb, max_quasi_clique_exhaustive, QuasiClique, BNB_MAX_N};
use crate::solver::{
    binarize, cleanup, recover, solve_nnm1, RecoveryResult, SolverConfig, Strategy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    LambdaSweep,
    CliqueRecovery,
    DensityError,
    SizeTable,
    BaRandom,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::LambdaSweep => "lambda_sweep",
            Suite::CliqueRecovery => "clique_recovery",
            Suite::DensityError => "density_error",
            Suite::SizeTable => "size_table",
            Suite::BaRandom => "ba_random",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Suite::LambdaSweep,
            Suite::CliqueRecovery,
            Suite::DensityError,
            Suite::SizeTable,
            Suite::BaRandom,
        ]
        .into_iter()
        .find(|x| x.name() == s)
        .ok_or_else(|| Error::input(format!("unknown suite {s:?}")))
    }
}

/// Penalty weight, either fixed or as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Fixed(f64),
    Rule(LambdaRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    /// `n`
    N,
    /// `1/sqrt(n)`
    InvSqrtN,
    /// `1/(2 sqrt(n))`
    HalfInvSqrtN,
    /// `1/n`
    InvN,
}

impl LambdaSpec {
    pub fn value(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            LambdaSpec::Fixed(v) => v,
            LambdaSpec::Rule(LambdaRule::N) => nf,
            LambdaSpec::Rule(LambdaRule::InvSqrtN) => 1.0 / nf.sqrt(),
            LambdaSpec::Rule(LambdaRule::HalfInvSqrtN) => 1.0 / (2.0 * nf.sqrt()),
            LambdaSpec::Rule(LambdaRule::InvN) => 1.0 / nf,
        }
    }
}

/// Solver variant compared in the clique recovery suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Nuclear norm with the planted size known and zero entries pinned.
    Nnm1,
    /// Nuclear norm plus sparse penalty under the density constraint.
    Nnm5,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Nnm1 => "nnm1",
            Mode::Nnm5 => "nnm5",
        }
    }
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

fn default_trials() -> usize {
    10
}

fn default_rho() -> Vec<f64> {
    vec![0.2]
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Nnm1, Mode::Nnm5]
}

fn default_max_n() -> usize {
    150
}

fn default_budget() -> u64 {
    crate::oracle::DEFAULT_BUDGET
}

fn default_jobs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    #[serde(deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    /// Planted size; when absent, `round(n_c_fraction * n)`.
    #[serde(default)]
    pub n_c: Option<usize>,
    #[serde(default)]
    pub n_c_fraction: Option<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub gamma: Vec<f64>,
    /// In-block edge probability; `p = gamma` when absent.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_rho", deserialize_with = "one_or_many")]
    pub rho: Vec<f64>,
    /// Defaults to `1/sqrt(n)`.
    #[serde(default, deserialize_with = "one_or_many")]
    pub lambda: Vec<LambdaSpec>,
    /// Attachment count per `n` for Barabási–Albert graphs.
    #[serde(default, deserialize_with = "one_or_many")]
    pub m: Vec<usize>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default = "default_plant_mode")]
    pub plant_mode: PlantMode,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Largest `n` accepted.
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    /// Largest `n` for which the exact oracle runs; suite dependent default.
    #[serde(default)]
    pub oracle_max_n: Option<usize>,
    #[serde(default = "default_budget")]
    pub oracle_budget: u64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    /// Fill the `seconds` column. Off by default so output is reproducible.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_plant_mode() -> PlantMode {
    PlantMode::Raw
}

impl ExperimentConfig {
    /// A configuration with defaults for everything but the grid.
    pub fn new(suite: Suite, n: Vec<usize>, gamma: Vec<f64>) -> Self {
        ExperimentConfig {
            suite,
            n,
            n_c: None,
            n_c_fraction: None,
            gamma,
            p: None,
            rho: default_rho(),
            lambda: Vec::new(),
            m: Vec::new(),
            modes: default_modes(),
            trials: default_trials(),
            base_seed: 0,
            strategy: Strategy::default(),
            plant_mode: default_plant_mode(),
            solver: SolverConfig::default(),
            max_n: default_max_n(),
            oracle_max_n: None,
            oracle_budget: default_budget(),
            jobs: default_jobs(),
            record_timing: false,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn planted_size(&self, n: usize) -> usize {
        match (self.n_c, self.n_c_fraction) {
            (Some(k), _) => k,
            (None, Some(f)) => (f * n as f64).round() as usize,
            (None, None) => (0.8 * n as f64).round() as usize,
        }
    }

    fn oracle_limit(&self) -> usize {
        self.oracle_max_n.unwrap_or(match self.suite {
            Suite::BaRandom => 50,
            _ => 14,
        })
    }

    fn lambdas(&self) -> Vec<LambdaSpec> {
        if self.lambda.is_empty() {
            vec![LambdaSpec::Rule(LambdaRule::InvSqrtN)]
        } else {
            self.lambda.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.gamma.is_empty() {
            return Err(Error::input("the n and gamma grids must be non-empty"));
        }
        if self.trials == 0 {
            return Err(Error::input("trials must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(Error::input("jobs must be at least 1"));
        }
        if self.trials > u32::MAX as usize {
            return Err(Error::input("too many trials"));
        }
        for &g in &self.gamma {
            Gamma::new(g)?;
        }
        for &n in &self.n {
            if n == 0 || n > self.max_n {
                return Err(Error::input(format!("n = {n} outside 1..={}", self.max_n)));
            }
        }
        if let Some(f) = self.n_c_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::input(format!(
                    "n_c_fraction must lie in (0, 1], got {f}"
                )));
            }
        }
        if self.rho.is_empty() {
            return Err(Error::input("the rho grid must be non-empty"));
        }
        for l in &self.lambda {
            if let LambdaSpec::Fixed(v) = l {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(Error::input(format!("lambda must be positive, got {v}")));
                }
            }
        }
        self.solver.validate()?;
        match self.suite {
            Suite::CliqueRecovery => {
                if self.modes.is_empty() {
                    return Err(Error::input("clique_recovery needs at least one mode"));
                }
            }
            Suite::BaRandom => {
                if self.m.len() != self.n.len() {
                    return Err(Error::input("ba_random needs one m per n"));
                }
            }
            _ => {
                if self.rho.len() != 1 {
                    return Err(Error::input(format!(
                        "{} takes a single rho",
                        self.suite.name()
                    )));
                }
            }
        }
        if self.suite != Suite::BaRandom {
            for &n in &self.n {
                let k = self.planted_size(n);
                if k == 0 || k > n {
                    return Err(Error::input(format!(
                        "planted size {k} invalid for n = {n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `start, start + step, ..., stop`, rounded to six decimals.
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| ((start + i as f64 * step) * 1e6).round() / 1e6)
        .collect()
}

/// Key formatting shared by CSV output and report lookups.
pub fn format_key(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    /// One entry per value column; `None` is written as `n/a`.
    pub values: Vec<Option<f64>>,
    pub seconds: f64,
    pub converged: bool,
    pub recovered: VertexSet,
    pub metrics: Option<TrialMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub keys: Vec<String>,
    pub trials: Vec<TrialRow>,
    pub mean: Vec<Option<f64>>,
    pub min: Vec<Option<f64>>,
    pub max: Vec<Option<f64>>,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stat {
    Mean,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialKey {
    pub keys: Vec<String>,
    pub trial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub config: ExperimentConfig,
    /// Instance seed per group and trial, in the order groups are created.
    pub instance_seeds: Vec<Vec<u64>>,
    pub non_converged: Vec<TrialKey>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub suite: Suite,
    pub key_columns: Vec<String>,
    pub value_columns: Vec<String>,
    pub points: Vec<PointReport>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn point(&self, keys: &[&str]) -> Option<&PointReport> {
        self.points
            .iter()
            .find(|p| p.keys.iter().map(String::as_str).eq(keys.iter().copied()))
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.value_columns.iter().position(|c| c == name)
    }

    /// Aggregate of `column` at the point with the given keys.
    pub fn stat(&self, keys: &[&str], column: &str, stat: Stat) -> Option<f64> {
        let p = self.point(keys)?;
        let c = self.column(column)?;
        match stat {
            Stat::Mean => p.mean[c],
            Stat::Min => p.min[c],
            Stat::Max => p.max[c],
        }
    }

    /// Per-trial values of `column` at a point.
    pub fn trial_values(&self, keys: &[&str], column: &str) -> Option<Vec<Option<f64>>> {
        let p = self.point(keys)?;
        let c = self.column(column)?;
        Some(p.trials.iter().map(|t| t.values[c]).collect())
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = self.key_columns.clone();
        h.push("trial".into());
        h.extend(self.value_columns.iter().cloned());
        h.push("seconds".into());
        h.push("agg".into());
        h
    }

    /// CSV text: one row per trial, then `mean`, `min` and `max` rows
    /// flagged `agg=1` for each point.
    pub fn to_csv(&self) -> Result<String> {
        let timing = self.provenance.config.record_timing;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header())?;
        let cell = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x}"));
        for p in &self.points {
            for t in &p.trials {
                let mut rec = p.keys.clone();
                rec.push(t.trial.to_string());
                rec.extend(t.values.iter().map(|&v| cell(v)));
                rec.push(if timing {
                    format!("{}", t.seconds)
                } else {
                    String::new()
                });
                rec.push("0".into());
                w.write_record(&rec)?;
            }
            for (label, row, secs) in [
                ("mean", &p.mean, Some(p.mean_seconds)),
                ("min", &p.min, None),
                ("max", &p.max, None),
            ] {
                let mut rec = p.keys.clone();
                rec.push(label.into());
                rec.extend(row.iter().map(|&v| cell(v)));
                rec.push(match secs {
                    Some(s) if timing => format!("{s}"),
                    _ => String::new(),
                });
                rec.push("1".into());
                w.write_record(&rec)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::input(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::input(e.to_string()))
    }

    /// Writes the CSV to `path` and the provenance to `path.provenance.json`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))?;
        let side = provenance_path(path);
        let json = serde_json::to_string_pretty(&self.provenance)?;
        std::fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))
    }
}

pub fn provenance_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".provenance.json");
    PathBuf::from(s)
}

/// Seed of trial `trial` in instance group `group`.
pub fn instance_seed(base_seed: u64, group: usize, trial: usize) -> u64 {
    rng_stream(base_seed, ((group as u64) << 32) | trial as u64).next_u64()
}

#[derive(Debug, Clone, Copy)]
enum GroupSpec {
    Planted {
        n: usize,
        n_c: usize,
        gamma: f64,
        p: f64,
        rho: f64,
    },
    Ba {
        n: usize,
        m: usize,
    },
}

#[derive(Debug, Clone, Copy)]
enum Task {
    Lambda { lambda: f64 },
    Recovery { mode: Mode },
    Density,
    Size,
    Ba,
}

#[derive(Debug, Clone)]
struct Point {
    keys: Vec<String>,
    group: usize,
    gamma: f64,
    task: Task,
}

struct Plan {
    key_columns: Vec<&'static str>,
    value_columns: Vec<&'static str>,
    groups: Vec<GroupSpec>,
    points: Vec<Point>,
}

fn plan(cfg: &ExperimentConfig) -> Plan {
    let mut groups = Vec::new();
    let mut points = Vec::new();
    let f = format_key;
    let planted = |n: usize, gamma: f64, rho: f64| GroupSpec::Planted {
        n,
        n_c: cfg.planted_size(n),
        gamma,
        p: cfg.p.unwrap_or(gamma),
        rho,
    };
    let rho0 = cfg.rho[0];
    let (key_columns, value_columns): (Vec<&str>, Vec<&str>) = match cfg.suite {
        Suite::LambdaSweep => {
            for &n in &cfg.n {
                for &gamma in &cfg.gamma {
                    let group = groups.len();
                    groups.push(planted(n, gamma, rho0));
                    for l in cfg.lambdas() {
                        let lambda = l.value(n);
                        let mut keys = vec![f(gamma), f(lambda)];
                        if cfg.n.len() > 1 {
                            keys.insert(0, n.to_string());
                        }
                        points.push(Point {
                            keys,
                            group,
                            gamma,
                            task: Task::Lambda { lambda },
                        });
                    }
                }
            }
            let keys = if cfg.n.len() > 1 {
                vec!["n", "gamma", "lambda"]
            } else {
                vec!["gamma", "lambda"]
            };
            (keys, vec!["recovered_size", "frob_error"])
        }
        Suite::CliqueRecovery => {
            for &n in &cfg.n {
                for &gamma in &cfg.gamma {
                    for &rho in &cfg.rho {
                        let group = groups.len();
                        groups.push(planted(n, gamma, rho));
                        for &mode in &cfg.modes {
                            points.push(Point {
                                keys: vec![n.to_string(), f(gamma), f(rho), mode.name().into()],
                                group,
                                gamma,
                                task: Task::Recovery { mode },
                            });
                        }
                    }
                }
            }
            (
                vec!["n", "gamma", "rho", "mode"],
                vec!["recovered_size", "success", "converged", "iterations"],
            )
        }
        Suite::DensityError | Suite::SizeTable => {
            let density = cfg.suite == Suite::DensityError;
            for &n in &cfg.n {
                for &gamma in &cfg.gamma {
                    let group = groups.len();
                    groups.push(planted(n, gamma, rho0));
                    points.push(Point {
                        keys: vec![n.to_string(), cfg.planted_size(n).to_string(), f(gamma)],
                        group,
                        gamma,
                        task: if density { Task::Density } else { Task::Size },
                    });
                }
            }
            let values = if density {
                vec![
                    "recovered_size",
                    "density_error",
                    "frob_error",
                    "converged",
                    "oracle_density_error",
                ]
            } else {
                vec![
                    "recovered_size",
                    "size_error",
                    "converged",
                    "oracle_size",
                    "oracle_size_error",
                ]
            };
            (vec!["n", "n_c", "gamma"], values)
        }
        Suite::BaRandom => {
            for (&n, &m) in cfg.n.iter().zip(&cfg.m) {
                let group = groups.len();
                groups.push(GroupSpec::Ba { n, m });
                for &gamma in &cfg.gamma {
                    points.push(Point {
                        keys: vec![n.to_string(), m.to_string(), f(gamma)],
                        group,
                        gamma,
                        task: Task::Ba,
                    });
                }
            }
            (
                vec!["n", "m", "gamma"],
                vec![
                    "recovered_size",
                    "recovered_density",
                    "gamma_clique",
                    "converged",
                    "oracle_size",
                    "oracle_certified",
                ],
            )
        }
    };
    Plan {
        key_columns,
        value_columns,
        groups,
        points,
    }
}

enum Instance {
    Planted(PlantedInstance),
    Ba(Graph),
}

fn build_instance(spec: GroupSpec, seed: u64, mode: PlantMode) -> Result<Instance> {
    Ok(match spec {
        GroupSpec::Planted {
            n,
            n_c,
            gamma,
            p,
            rho,
        } => Instance::Planted(plant_quasi_clique(PlantParams {
            n,
            n_c,
            p,
            rho,
            gamma,
            seed,
            mode,
        })?),
        GroupSpec::Ba { n, m } => Instance::Ba(barabasi_albert(BaConfig { n, m, seed })?),
    })
}

/// Runs `recover`, keeping the last iterate when the solver stops early.
fn recover_lenient(
    g: &Graph,
    gamma: f64,
    cfg: &SolverConfig,
    strategy: Strategy,
) -> Result<RecoveryResult> {
    match recover(g, gamma, cfg, strategy) {
        Ok(r) => Ok(r),
        Err(Error::NonConvergence {
            best: Some(best), ..
        }) => Ok(*best),
        Err(e) => Err(e),
    }
}

fn bool_value(b: bool) -> Option<f64> {
    Some(if b { 1.0 } else { 0.0 })
}

/// Above this size the oracle switches from enumeration to branch and bound.
const ENUMERATE_UP_TO: usize = 14;

fn oracle(g: &Graph, gamma: f64, budget: u64) -> Result<QuasiClique> {
    if g.n() <= ENUMERATE_UP_TO {
        max_quasi_clique_exhaustive(g, gamma)
    } else {
        max_quasi_clique_bnb(g, gamma, 0, g.n(), budget)
    }
}

fn run_trial(cfg: &ExperimentConfig, plan: &Plan, point: &Point, trial: usize) -> Result<TrialRow> {
    let seed = instance_seed(cfg.base_seed, point.group, trial);
    let instance = build_instance(plan.groups[point.group], seed, cfg.plant_mode)?;
    let gamma = point.gamma;
    let oracle_on = |n: usize| n <= cfg.oracle_limit() && n <= BNB_MAX_N;

    let (values, seconds, converged, recovered, metrics) = match (&instance, point.task) {
        (Instance::Planted(inst), Task::Recovery { mode: Mode::Nnm1 }) => {
            let start = Instant::now();
            let d = solve_nnm1(
                &adjacency(&inst.graph, true),
                inst.planted.len(),
                &cfg.solver,
            )?;
            let seconds = start.elapsed().as_secs_f64();
            let q_bin = binarize(&d.q, cfg.solver.round_threshold, &d.support);
            let q_star = cleanup(&q_bin, &adjacency(&inst.graph, false))?;
            let m = TrialMetrics::evaluate(inst, &d.support, &q_star, seconds)?;
            let success =
                m.success && recovers_block(&d.q, &inst.planted, cfg.solver.round_threshold);
            let values = vec![
                Some(d.support.len() as f64),
                bool_value(success),
                bool_value(d.converged),
                Some(d.iterations as f64),
            ];
            (values, seconds, d.converged, d.support.clone(), Some(m))
        }
        (Instance::Planted(inst), task) => {
            let solver = match task {
                Task::Lambda { lambda } => SolverConfig {
                    lambda: Some(lambda),
                    ..cfg.solver
                },
                _ => cfg.solver,
            };
            let r = recover_lenient(&inst.graph, gamma, &solver, cfg.strategy)?;
            let set = r.recovered_set.clone();
            if cfg.strategy == Strategy::DescendingEta {
                assert!(
                    r.recovered_density.meets(Gamma::new(gamma)?),
                    "descending strategy returned a set below gamma"
                );
            }
            let m = TrialMetrics::evaluate(inst, &set, &r.q_star, r.solve_seconds)?;
            let conv = r.decomposition.converged;
            let n = inst.graph.n();
            let values = match task {
                Task::Lambda { .. } => vec![Some(set.len() as f64), Some(m.frobenius_error)],
                Task::Recovery { .. } => {
                    let success = m.success
                        && recovers_block(
                            &r.decomposition.q,
                            &inst.planted,
                            solver.round_threshold,
                        );
                    vec![
                        Some(set.len() as f64),
                        bool_value(success),
                        bool_value(conv),
                        Some(r.decomposition.iterations as f64),
                    ]
                }
                Task::Density => {
                    let oracle_err = if oracle_on(n) {
                        let q = oracle(&inst.graph, gamma, cfg.oracle_budget)?;
                        Some(density_relative_error(
                            &inst.graph,
                            &q.vertices,
                            &inst.planted,
                        )?)
                    } else {
                        None
                    };
                    vec![
                        Some(set.len() as f64),
                        Some(m.density_error),
                        Some(m.frobenius_error),
                        bool_value(conv),
                        oracle_err,
                    ]
                }
                Task::Size => {
                    let (size, err) = if oracle_on(n) {
                        let q = oracle(&inst.graph, gamma, cfg.oracle_budget)?;
                        (
                            Some(q.size as f64),
                            Some(size_relative_error(q.size, inst.planted.len())?),
                        )
                    } else {
                        (None, None)
                    };
                    vec![
                        Some(set.len() as f64),
                        Some(m.size_error),
                        bool_value(conv),
                        size,
                        err,
                    ]
                }
                Task::Ba => unreachable!("planted instance for a Barabási–Albert point"),
            };
            (values, r.solve_seconds, conv, set, Some(m))
        }
        (Instance::Ba(g), _) => {
            let r = recover_lenient(g, gamma, &cfg.solver, cfg.strategy)?;
            let set = r.recovered_set.clone();
            let density = edge_density(g, &set)?;
            let (osize, ocert) = if oracle_on(g.n()) {
                let q = oracle(g, gamma, cfg.oracle_budget)?;
                (Some(q.size as f64), bool_value(q.certified_optimal))
            } else {
                (None, None)
            };
            let values = vec![
                Some(set.len() as f64),
                Some(density.value()),
                bool_value(density.meets(Gamma::new(gamma)?)),
                bool_value(r.decomposition.converged),
                osize,
                ocert,
            ];
            (
                values,
                r.solve_seconds,
                r.decomposition.converged,
                set,
                None,
            )
        }
    };
    Ok(TrialRow {
        trial,
        values,
        seconds,
        converged,
        recovered,
        metrics,
    })
}

type Column = Vec<Option<f64>>;

/// Per-column mean, min and max; missing if any trial lacks the value.
fn aggregate(rows: &[TrialRow], columns: usize) -> (Column, Column, Column) {
    let mut mean = Vec::with_capacity(columns);
    let mut min = Vec::with_capacity(columns);
    let mut max = Vec::with_capacity(columns);
    for c in 0..columns {
        let vals: Option<Vec<f64>> = rows.iter().map(|r| r.values[c]).collect();
        match vals {
            Some(v) if !v.is_empty() => {
                mean.push(Some(v.iter().sum::<f64>() / v.len() as f64));
                min.push(v.iter().copied().reduce(f64::min));
                max.push(v.iter().copied().reduce(f64::max));
            }
            _ => {
                mean.push(None);
                min.push(None);
                max.push(None);
            }
        }
    }
    (mean, min, max)
}

/// Runs any suite described by `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let plan = plan(cfg);
    let jobs: Vec<(usize, usize)> = (0..plan.points.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    let results: Vec<Result<TrialRow>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, t)| run_trial(cfg, &plan, &plan.points[p], t))
            .collect()
    });

    let mut rows = results.into_iter();
    let mut points = Vec::with_capacity(plan.points.len());
    let mut non_converged = Vec::new();
    for point in &plan.points {
        let trials = rows.by_ref().take(cfg.trials).collect::<Result<Vec<_>>>()?;
        for t in trials.iter().filter(|t| !t.converged) {
            non_converged.push(TrialKey {
                keys: point.keys.clone(),
                trial: t.trial,
            });
        }
        let (mean, min, max) = aggregate(&trials, plan.value_columns.len());
        let mean_seconds = trials.iter().map(|t| t.seconds).sum::<f64>() / trials.len() as f64;
        points.push(PointReport {
            keys: point.keys.clone(),
            trials,
            mean,
            min,
            max,
            mean_seconds,
        });
    }

    let instance_seeds = (0..plan.groups.len())
        .map(|g| {
            (0..cfg.trials)
                .map(|t| instance_seed(cfg.base_seed, g, t))
                .collect()
        })
        .collect();
    Ok(ExperimentReport {
        suite: cfg.suite,
        key_columns: plan.key_columns.iter().map(|s| s.to_string()).collect(),
        value_columns: plan.value_columns.iter().map(|s| s.to_string()).collect(),
        points,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            instance_seeds,
            non_converged,
        },
    })
}

fn run_suite(cfg: &ExperimentConfig, suite: Suite) -> Result<ExperimentReport> {
    if cfg.suite != suite {
        return Err(Error::input(format!(
            "config is for suite {}, not {}",
            cfg.suite.name(),
            suite.name()
        )));
    }
    run(cfg)
}

pub fn run_lambda_sweep(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_suite(cfg, Suite::LambdaSweep)
}

pub fn run_clique_recovery(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_suite(cfg, Suite::CliqueRecovery)
}

pub fn run_density_error(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_suite(cfg, Suite::DensityError)
}

pub fn run_size_table(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_suite(cfg, Suite::SizeTable)
}

pub fn run_ba_random(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_suite(cfg, Suite::BaRandom)
}

/// One-line summary per point, for terminal output.
pub fn summary(report: &ExperimentReport) -> String {
    let mut out = String::new();
    for p in &report.points {
        let mut line = String::new();
        for (k, v) in report.key_columns.iter().zip(&p.keys) {
            let _ = write!(line, "{k}={v} ");
        }
        for (c, v) in report.value_columns.iter().zip(&p.mean) {
            match v {
                Some(x) => {
                    let _ = write!(line, "{c}={x:.4} ");
                }
                None => {
                    let _ = write!(line, "{c}=n/a ");
                }
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
