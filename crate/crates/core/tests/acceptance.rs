//! Acceptance suite. Runs every criterion, prints one status line each and
//! exits non-zero if a criterion fails that is not on the known-failure list.
//!
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 1 7 9`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;

use qclab::experiments::{
    format_key, grid, run, ExperimentConfig, ExperimentReport, LambdaRule, LambdaSpec, Stat, Suite,
};
use qclab::linalg::{project_box_halfspace, shrink, soft_threshold, svt, SymmetricMatrix};
use qclab::mip::lp::{export_lp, read_lp};
use qclab::mip::{build_mip7, build_mip8, build_mip9, check, lift};
use qclab::oracle::{max_quasi_clique_bnb, max_quasi_clique_exhaustive, DEFAULT_BUDGET};
use qclab::solver::sdpa::export_sdpa;
use qclab::solver::{admm_decompose, recover, SolverConfig, Strategy};
use qclab::{adjacency, fixtures, is_gamma_clique, VertexSet};

/// Criteria expected to fail; the analysis lives in the decisions ledger.
const KNOWN_FAILURES: [usize; 2] = [3, 5];

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            details: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.pass = false;
            self.details.push(format!("FAILED {what}"));
        } else {
            self.details.push(format!("ok     {what}"));
        }
    }

    fn within(&mut self, start: Instant, limit: Duration) {
        let took = start.elapsed();
        self.require(
            took < limit,
            format!(
                "runtime {:.1} s < {} s",
                took.as_secs_f64(),
                limit.as_secs()
            ),
        );
    }
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn mean(r: &ExperimentReport, keys: &[&str], column: &str) -> f64 {
    r.stat(keys, column, Stat::Mean)
        .unwrap_or_else(|| panic!("no {column} at {keys:?}"))
}

// 1
fn golden_example() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let g = fixtures::example_graph();
    let r = recover(
        &g,
        0.9,
        &SolverConfig::with_lambda(1.0 / 10f64.sqrt()),
        Strategy::Unconstrained,
    )
    .unwrap();
    o.within(start, Duration::from_secs(1));
    o.require(
        r.recovered_set == fixtures::example_planted(),
        format!("recovered {:?}", r.recovered_set),
    );
    o.require(
        r.decomposition.eta == 5,
        format!("eta = {}", r.decomposition.eta),
    );
    let q_star: Vec<Vec<u8>> = r
        .q_star
        .matrix
        .row_iter()
        .map(|row| row.iter().map(|&x| x as u8).collect())
        .collect();
    let exact = r.q_star.matrix.iter().all(|&x| x == 0.0 || x == 1.0);
    o.require(
        exact && q_star == fixtures::example_q_star(),
        "Q* equals the printed matrix",
    );
    o
}

// 2
fn lambda_table() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let rules = [
        LambdaRule::N,
        LambdaRule::InvSqrtN,
        LambdaRule::HalfInvSqrtN,
        LambdaRule::InvN,
    ];
    let mut cfg = ExperimentConfig::new(Suite::LambdaSweep, vec![50], grid(0.5, 1.0, 0.05));
    cfg.n_c = Some(35);
    cfg.rho = vec![0.2];
    cfg.lambda = rules.iter().map(|&r| LambdaSpec::Rule(r)).collect();
    cfg.jobs = jobs();
    let r = run(&cfg).unwrap();
    o.within(start, Duration::from_secs(600));
    let key = |rule: LambdaRule| format_key(LambdaSpec::Rule(rule).value(50));
    for &gamma in &cfg.gamma {
        let gk = format_key(gamma);
        let sizes: Vec<String> = rules
            .iter()
            .map(|&rule| format!("{:.1}", mean(&r, &[&gk, &key(rule)], "recovered_size")))
            .collect();
        o.details.push(format!(
            "       gamma {gk:<5} sizes n, 1/sqrt n, 1/(2 sqrt n), 1/n: {}",
            sizes.join(" ")
        ));
        for (rule, want) in [(LambdaRule::N, 50.0), (LambdaRule::InvN, 0.0)] {
            let lk = key(rule);
            let k = [gk.as_str(), lk.as_str()];
            let (lo, hi) = (
                r.stat(&k, "recovered_size", Stat::Min).unwrap(),
                r.stat(&k, "recovered_size", Stat::Max).unwrap(),
            );
            o.require(
                lo == want && hi == want,
                format!("gamma {gk} lambda {:?}: size {want} +- 0", rule),
            );
        }
    }
    for gamma in [0.8, 0.85, 0.9, 0.95, 1.0] {
        let gk = format_key(gamma);
        let lk = key(LambdaRule::InvSqrtN);
        let k = [gk.as_str(), lk.as_str()];
        let size = mean(&r, &k, "recovered_size");
        let err = mean(&r, &k, "frob_error");
        o.require(
            size >= 34.0,
            format!("gamma {gk} lambda 1/sqrt n: mean size {size} >= 34"),
        );
        o.require(
            err <= 0.05,
            format!("gamma {gk} lambda 1/sqrt n: mean error {err:.4} <= 0.05"),
        );
    }
    let size = mean(
        &r,
        &["0.65", &key(LambdaRule::HalfInvSqrtN)],
        "recovered_size",
    );
    o.require(
        size <= 15.0,
        format!("gamma 0.65 lambda 1/(2 sqrt n): mean size {size} <= 15"),
    );
    o
}

fn density_config(n: usize, gammas: Vec<f64>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(Suite::DensityError, vec![n], gammas);
    cfg.n_c_fraction = Some(0.8);
    cfg.rho = vec![0.2];
    cfg.jobs = jobs();
    cfg
}

// 3
fn density_table_50() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let cfg = density_config(50, vec![0.6, 0.8, 0.85, 0.9, 0.95, 1.0]);
    let r = run(&cfg).unwrap();
    o.within(start, Duration::from_secs(600));
    for &gamma in &cfg.gamma {
        let gk = format_key(gamma);
        let err = mean(&r, &["50", "40", &gk], "density_error");
        if gamma == 0.6 {
            o.require(
                err >= 0.1,
                format!("gamma {gk}: mean density error {err:.4} >= 0.1"),
            );
        } else {
            o.require(
                err <= 0.02,
                format!("gamma {gk}: mean density error {err:.4} <= 0.02"),
            );
        }
    }
    o
}

// 4
fn density_table_100() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let cfg = density_config(100, grid(0.75, 1.0, 0.05));
    let r = run(&cfg).unwrap();
    o.within(start, Duration::from_secs(1800));
    for &gamma in &cfg.gamma {
        let gk = format_key(gamma);
        let err = mean(&r, &["100", "80", &gk], "density_error");
        o.require(
            err <= 0.02,
            format!("gamma {gk}: mean density error {err:.4} <= 0.02"),
        );
    }
    o
}

// 5
fn size_table() -> Outcome {
    let mut o = Outcome::new();
    let mut cfg = ExperimentConfig::new(Suite::SizeTable, vec![50, 100, 150], grid(0.6, 1.0, 0.1));
    cfg.n_c_fraction = Some(0.8);
    cfg.rho = vec![0.2];
    cfg.jobs = jobs();
    let r = run(&cfg).unwrap();
    for &n in &cfg.n {
        let nk = n.to_string();
        let ck = (n * 4 / 5).to_string();
        for &gamma in &cfg.gamma {
            let gk = format_key(gamma);
            let errs = r.trial_values(&[&nk, &ck, &gk], "size_error").unwrap();
            let exact = errs.iter().filter(|e| **e == Some(0.0)).count();
            let sizes = r.trial_values(&[&nk, &ck, &gk], "recovered_size").unwrap();
            let sizes: Vec<String> = sizes
                .iter()
                .map(|s| format!("{}", s.unwrap_or(f64::NAN)))
                .collect();
            o.require(
                exact >= 9,
                format!(
                    "n {n} gamma {gk}: eta = n_c in {exact}/10 trials (sizes {})",
                    sizes.join(" ")
                ),
            );
        }
    }
    o
}

// 6
fn recovery_frequency() -> Outcome {
    let mut o = Outcome::new();
    let mut cfg = ExperimentConfig::new(Suite::CliqueRecovery, vec![100], vec![1.0, 0.99]);
    cfg.n_c = Some(80);
    cfg.rho = grid(0.1, 0.5, 0.05);
    cfg.jobs = jobs();
    let r = run(&cfg).unwrap();
    for &gamma in &cfg.gamma {
        let gk = format_key(gamma);
        for &rho in &cfg.rho {
            let rk = format_key(rho);
            let f1 = mean(&r, &["100", &gk, &rk, "nnm1"], "success");
            let f5 = mean(&r, &["100", &gk, &rk, "nnm5"], "success");
            let tag = format!("gamma {gk} rho {rk}: nnm5 {f5:.1} nnm1 {f1:.1}");
            let mut ok = true;
            if rho <= 0.35 + 1e-9 {
                ok &= f5 == 1.0;
            }
            if gamma == 1.0 {
                if rho >= 0.5 - 1e-9 {
                    ok &= f5 <= 0.5;
                }
                if rho <= 0.45 + 1e-9 {
                    ok &= f1 == 1.0;
                }
            } else {
                ok &= f1 == 0.0;
            }
            o.require(ok, tag);
        }
    }
    o
}

// 7
fn oracle_agreement() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let mut mismatches = 0;
    let mut checked = 0;
    for seed in 0..50u64 {
        let mut rng = common::rng(seed);
        let n = rng.random_range(8..=14);
        let p = rng.random_range(0.3..0.9);
        let g = common::random_graph(&mut rng, n, p);
        for gamma in [0.5, 0.6, 0.7, 0.8, 0.9, 1.0] {
            let ex = max_quasi_clique_exhaustive(&g, gamma).unwrap();
            let bb = max_quasi_clique_bnb(&g, gamma, 0, n, DEFAULT_BUDGET).unwrap();
            checked += 1;
            let same = bb.certified_optimal
                && ex.certified_optimal
                && bb.vertices == ex.vertices
                && bb.size == ex.size
                && bb.density == ex.density;
            if !same {
                mismatches += 1;
                o.details.push(format!(
                    "       seed {seed} gamma {gamma}: {:?} vs {:?}",
                    bb.vertices, ex.vertices
                ));
            }
        }
    }
    o.require(
        mismatches == 0,
        format!("{checked} graph/gamma pairs, {mismatches} mismatches"),
    );
    o.within(start, Duration::from_secs(120));
    o
}

// 8
fn mip_equivalence() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let mut bad = 0usize;
    let mut subsets = 0usize;
    for n in 1..=10usize {
        for seed in 0..20u64 {
            let mut rng = common::rng(1000 * n as u64 + seed);
            let p = rng.random_range(0.2..0.95);
            let g = common::random_graph(&mut rng, n, p);
            for gamma in [0.6, 0.8, 1.0] {
                let omega = max_quasi_clique_exhaustive(&g, gamma).unwrap().size;
                for model in [
                    build_mip8(&g, gamma, 0, n).unwrap(),
                    build_mip9(&g, gamma, 0, n).unwrap(),
                ] {
                    let f = model.meta.as_ref().unwrap().formulation;
                    let mut best = 0.0f64;
                    for mask in 0..1u32 << n {
                        let s: VertexSet = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                        let report = check(&model, &lift(&g, gamma, &s, &f).unwrap()).unwrap();
                        subsets += 1;
                        if report.feasible != is_gamma_clique(&g, &s, gamma).unwrap() {
                            bad += 1;
                        }
                        if report.feasible {
                            if report.objective != s.len() as f64 {
                                bad += 1;
                            }
                            best = best.max(report.objective);
                        }
                    }
                    if best != omega as f64 {
                        bad += 1;
                        o.details.push(format!(
                            "       n {n} seed {seed} gamma {gamma} {}: {best} vs {omega}",
                            f.tag()
                        ));
                    }
                }
            }
        }
    }
    o.require(
        bad == 0,
        format!("{subsets} lifted subsets, {bad} disagreements"),
    );
    o.within(start, Duration::from_secs(300));
    o
}

fn sym(m: DMatrix<f64>) -> SymmetricMatrix {
    SymmetricMatrix::new(m).unwrap()
}

/// Largest violation of the nuclear-norm prox optimality conditions.
fn svt_kkt_violation(m: &DMatrix<f64>, x: &DMatrix<f64>, tau: f64) -> f64 {
    let g = (m - x) / tau;
    let mut worst = (common::spectral_norm(&g) - 1.0).max(0.0);
    let (vals, vecs) = common::jacobi_eigen(x);
    for (k, &l) in vals.iter().enumerate() {
        if l.abs() > 1e-9 {
            let v = vecs.column(k);
            worst = worst.max((&g * v - v * l.signum()).norm());
        }
    }
    worst
}

fn l1_kkt_violation(m: &DMatrix<f64>, x: &DMatrix<f64>, tau: f64) -> f64 {
    m.iter()
        .zip(x.iter())
        .map(|(mi, xi)| {
            let g = (mi - xi) / tau;
            if *xi != 0.0 {
                (g - xi.signum()).abs()
            } else {
                (g.abs() - 1.0).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

// 9
fn prox_suite() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = common::rng(9);
    let (mut expand, mut kkt) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let a = common::random_symmetric(&mut rng, 4, 3.0);
        let b = common::random_symmetric(&mut rng, 4, 3.0);
        let tau = rng.random_range(0.05..2.0);
        let d = (&a - &b).norm();
        let (sa, sb) = (
            svt(&sym(a.clone()), tau).unwrap(),
            svt(&sym(b.clone()), tau).unwrap(),
        );
        let (ta, tb) = (
            soft_threshold(&sym(a.clone()), tau).unwrap(),
            soft_threshold(&sym(b), tau).unwrap(),
        );
        expand = expand.max((sa.as_matrix() - sb.as_matrix()).norm() - d);
        expand = expand.max((ta.as_matrix() - tb.as_matrix()).norm() - d);
        kkt = kkt.max(svt_kkt_violation(&a, sa.as_matrix(), tau));
        kkt = kkt.max(l1_kkt_violation(&a, ta.as_matrix(), tau));
        let want: Vec<f64> = {
            let mut v: Vec<f64> = common::jacobi_eigen(&a)
                .0
                .into_iter()
                .map(|l| shrink(l, tau))
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let mut got = common::jacobi_eigen(sa.as_matrix()).0;
        got.sort_by(f64::total_cmp);
        kkt = kkt.max(
            got.iter()
                .zip(&want)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        );
    }
    o.require(
        expand <= 1e-6,
        format!("1000 4x4 pairs: worst expansion {expand:.2e} <= 1e-6"),
    );
    o.require(
        kkt <= 1e-6,
        format!("1000 4x4 instances: worst optimality residual {kkt:.2e} <= 1e-6"),
    );
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let m = common::random_symmetric(&mut rng, 3, 1.5);
        let target = rng.random_range(0.0..9.0);
        let ours = project_box_halfspace(&sym(m.clone()), 0.0, 1.0, target).unwrap();
        let reference = common::brute_force_box_halfspace(m.as_slice(), 0.0, 1.0, target);
        worst = worst.max(
            ours.as_matrix()
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }
    o.require(
        worst <= 1e-7,
        format!("500 3x3 projections: worst deviation {worst:.2e} <= 1e-7"),
    );
    o
}

// 10
fn convex_spot_check() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = common::rng(10);
    let cfg = |lambda| SolverConfig {
        lambda: Some(lambda),
        tol_primal: 1e-9,
        tol_dual: 1e-9,
        max_iter: 20_000,
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for k in 0..200 {
        let g = common::random_graph(&mut rng, 3, 0.5);
        let lambda = rng.random_range(0.2..1.5);
        let eta = rng.random_range(0..=3usize);
        // keep the sum constraint strictly inside the cube
        let gamma_hi = if eta == 3 { 0.95 } else { 1.0 };
        let gamma = rng.random_range(0.5..=gamma_hi);
        let a = adjacency(&g, true);
        let r = admm_decompose(&a, gamma, eta, &cfg(lambda)).unwrap();
        let ours = common::eq5_objective(&a.matrix, r.q.as_matrix(), lambda);
        let reference = common::ellipsoid_eq5(&a.matrix, lambda, gamma * (eta * eta) as f64);
        let gap = (ours - reference).abs();
        if gap > 1e-4 {
            o.details
                .push(format!("       instance {k}: {ours} vs {reference}"));
        }
        worst = worst.max(gap);
    }
    o.require(
        worst <= 1e-4,
        format!("200 3x3 instances: worst objective gap {worst:.2e} <= 1e-4"),
    );
    o
}

/// Independent check of the sparse SDPA layout: header counts, the cost
/// vector, and `matno block i j value` entries inside their blocks.
fn sdpa_grammar(text: &str) -> Result<(), String> {
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('"') && !l.starts_with('*'));
    let mut next = || lines.next().ok_or("truncated");
    let m: usize = next()?.trim().parse().map_err(|_| "bad constraint count")?;
    let nblocks: usize = next()?.trim().parse().map_err(|_| "bad block count")?;
    let sizes: Vec<i64> = next()?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| "bad block size"))
        .collect::<Result<_, _>>()?;
    if sizes.len() != nblocks || sizes.contains(&0) {
        return Err("block sizes do not match".into());
    }
    let c: Vec<f64> = next()?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| "bad cost entry"))
        .collect::<Result<_, _>>()?;
    if c.len() != m {
        return Err(format!("cost vector has {} entries, expected {m}", c.len()));
    }
    for l in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 5 {
            return Err(format!("entry line {l:?}"));
        }
        let ints: Vec<usize> = t[..4]
            .iter()
            .map(|x| x.parse().map_err(|_| format!("entry line {l:?}")))
            .collect::<Result<_, _>>()?;
        t[4].parse::<f64>()
            .map_err(|_| format!("entry value in {l:?}"))?;
        let (k, b, i, j) = (ints[0], ints[1], ints[2], ints[3]);
        if k > m || b == 0 || b > nblocks {
            return Err(format!("entry indices in {l:?}"));
        }
        let size = sizes[b - 1];
        let dim = size.unsigned_abs() as usize;
        if i == 0 || i > j || j > dim || (size < 0 && i != j) {
            return Err(format!("entry position in {l:?}"));
        }
    }
    Ok(())
}

// 11
fn export_validity() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = common::rng(11);
    let gammas = [0.5, 0.6, 0.75, 0.8, 0.9, 0.95, 1.0];
    let mut failed = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=12usize);
        let p = rng.random_range(0.1..0.9);
        let g = common::random_graph(&mut rng, n, p);
        let gamma = gammas[rng.random_range(0..gammas.len())];
        let lo = rng.random_range(0..=n);
        let hi = rng.random_range(lo..=n);
        let model = match rng.random_range(0..4) {
            0 => build_mip7(&g, gamma, n as f64 * rng.random_range(1.0..2.0), false),
            1 => build_mip7(&g, gamma, n as f64 * rng.random_range(1.0..2.0), true),
            2 => build_mip8(&g, gamma, lo, hi),
            _ => build_mip9(&g, gamma, lo, hi),
        }
        .unwrap();
        let text = export_lp(&model);
        match read_lp(&text) {
            Ok(back) if back == model && export_lp(&back) == text => {}
            _ => failed += 1,
        }
    }
    o.require(
        failed == 0,
        format!("100 random models: {failed} LP round-trip failures"),
    );
    let mut bad = Vec::new();
    for k in 0..40 {
        let n = rng.random_range(1..=8usize);
        let g = common::random_graph(&mut rng, n, 0.5);
        let eta = rng.random_range(0..=n);
        let gamma = gammas[rng.random_range(0..gammas.len())];
        let text =
            export_sdpa(&adjacency(&g, true), rng.random_range(0.1..2.0), gamma, eta).unwrap();
        if let Err(e) = sdpa_grammar(&text) {
            bad.push(format!("export {k}: {e}"));
        }
    }
    o.require(
        bad.is_empty(),
        format!("40 SDPA exports pass the grammar check {bad:?}"),
    );
    o
}

// 12
fn determinism() -> Outcome {
    let mut o = Outcome::new();
    let dir = tempfile::tempdir().unwrap();
    let mut configs = Vec::new();
    let mut c = ExperimentConfig::new(Suite::LambdaSweep, vec![20], vec![0.8, 1.0]);
    c.lambda = vec![
        LambdaSpec::Rule(LambdaRule::InvSqrtN),
        LambdaSpec::Fixed(0.3),
    ];
    configs.push(c);
    let mut c = ExperimentConfig::new(Suite::CliqueRecovery, vec![20], vec![1.0, 0.95]);
    c.rho = vec![0.1, 0.3];
    configs.push(c);
    configs.push(ExperimentConfig::new(
        Suite::DensityError,
        vec![12, 20],
        vec![0.7, 0.9],
    ));
    configs.push(ExperimentConfig::new(
        Suite::SizeTable,
        vec![14],
        vec![0.8, 1.0],
    ));
    let mut c = ExperimentConfig::new(Suite::BaRandom, vec![20], vec![0.8, 1.0]);
    c.m = vec![5];
    configs.push(c);
    for mut cfg in configs {
        cfg.trials = 3;
        cfg.base_seed = 12;
        let name = cfg.suite.name();
        let mut files = Vec::new();
        for jobs in [1, 8] {
            cfg.jobs = jobs;
            let path = dir.path().join(format!("{name}-{jobs}.csv"));
            run(&cfg).unwrap().write_csv(&path).unwrap();
            files.push(std::fs::read(&path).unwrap());
        }
        o.require(
            files[0] == files[1],
            format!("{name}: jobs 1 and 8 give byte-identical CSV"),
        );
    }
    o
}

fn main() {
    let criteria: [Criterion; 12] = [
        (
            1,
            "worked example recovers the planted set and Q*",
            golden_example,
        ),
        (2, "lambda sweep, n = 50", lambda_table),
        (3, "density error, n = 50", density_table_50),
        (4, "density error, n = 100", density_table_100),
        (5, "recovered size equals planted size", size_table),
        (6, "clique recovery frequency, n = 100", recovery_frequency),
        (7, "branch and bound equals enumeration", oracle_agreement),
        (8, "MIP lift feasibility iff gamma-clique", mip_equivalence),
        (9, "proximal operators", prox_suite),
        (
            10,
            "ADMM objective against a reference optimum",
            convex_spot_check,
        ),
        (11, "LP round trip and SDPA grammar", export_validity),
        (
            12,
            "experiment output independent of thread count",
            determinism,
        ),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut unexpected = Vec::new();
    for (id, title, f) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome {
                pass: false,
                details: vec![format!("FAILED panic: {msg}")],
            }
        });
        let known = KNOWN_FAILURES.contains(&id);
        let status = match (outcome.pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as known failure)",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!(
            "criterion {id:>2}: {status:<12} {title} [{:.1} s]",
            start.elapsed().as_secs_f64()
        );
        for d in &outcome.details {
            println!("    {d}");
        }
        if !outcome.pass && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
