//! `qclab` command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 solver non-convergence, 3 I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qclab::experiments::{self, ExperimentConfig};
use qclab::generators::{barabasi_albert, plant_quasi_clique, BaConfig, PlantMode, PlantParams};
use qclab::graph::{read_edge_list, write_edge_list};
use qclab::mip::{self, lp::export_lp};
use qclab::oracle::{self, DEFAULT_BUDGET};
use qclab::solver::{self, sdpa::export_sdpa, SolverConfig, Strategy};
use qclab::{adjacency, edge_density, Error, Gamma, Graph, VertexSet};

#[derive(Parser)]
#[command(
    name = "qclab",
    version,
    about = "Planted quasi-clique recovery toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted or Barabási–Albert instance.
    Gen(GenArgs),
    /// Recover a dense block with the nuclear norm solver.
    Solve(SolveArgs),
    /// Exact maximum quasi-clique.
    Oracle(OracleArgs),
    /// Write a MIP model in LP format.
    ExportMip(ExportMipArgs),
    /// Write the semidefinite model in SDPA sparse format.
    ExportSdpa(ExportSdpaArgs),
    /// Run an experiment suite from a JSON config.
    Experiment(ExperimentArgs),
    /// Report the density of a vertex set.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Raw,
    DensityAssured,
}

#[derive(Args)]
struct GenArgs {
    /// Barabási–Albert graph instead of a planted instance.
    #[arg(long)]
    ba: bool,
    #[arg(long)]
    n: usize,
    /// Edges per new vertex (with --ba).
    #[arg(long, required_if_eq("ba", "true"))]
    m: Option<usize>,
    #[arg(long, required_unless_present = "ba")]
    nc: Option<usize>,
    #[arg(long, required_unless_present = "ba")]
    p: Option<f64>,
    #[arg(long, required_unless_present = "ba")]
    rho: Option<f64>,
    #[arg(long, required_unless_present = "ba")]
    gamma: Option<f64>,
    #[arg(long, env = "QCLAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "raw")]
    mode: ModeArg,
    /// Edge list path; the sidecar goes to `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    gamma: f64,
    /// Defaults to 1/sqrt(n).
    #[arg(long)]
    lambda: Option<f64>,
    /// unconstrained, fixed_eta:K or descending_eta.
    #[arg(long, default_value = "unconstrained")]
    strategy: Strategy,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMode {
    Exhaustive,
    Bnb,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    gamma: f64,
    #[arg(long, value_enum, default_value = "bnb")]
    mode: OracleMode,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct ExportMipArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    gamma: f64,
    #[arg(long, value_parser = clap::value_parser!(u8).range(7..=9))]
    model: u8,
    /// Big-M for model 7; defaults to n.
    #[arg(long)]
    nu: Option<f64>,
    /// Use the sign-corrected upper linking row in model 7.
    #[arg(long)]
    corrected_7e: bool,
    #[arg(long, default_value_t = 0)]
    omega_l: usize,
    /// Defaults to n.
    #[arg(long)]
    omega_u: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportSdpaArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0)]
    eta: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's worker count.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's base seed.
    #[arg(long, env = "QCLAB_SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    gamma: f64,
    /// Comma-separated 0-indexed vertices.
    #[arg(long)]
    set: String,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Parse { .. } | Error::Json(_) => 1,
        Error::NonConvergence { .. } => 2,
        Error::Io { .. } | Error::Csv(_) => 3,
    }
}

fn read(path: &Path) -> qclab::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> qclab::Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_graph(path: &Path) -> qclab::Result<Graph> {
    read_edge_list(&read(path)?)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn list(s: &VertexSet) -> String {
    let items: Vec<String> = s.iter().map(|v| v.to_string()).collect();
    format!("[{}]", items.join(","))
}

fn gen(a: GenArgs) -> qclab::Result<()> {
    if a.ba {
        let m = a.m.ok_or_else(|| Error::Input("--ba needs --m".into()))?;
        let cfg = BaConfig {
            n: a.n,
            m,
            seed: a.seed,
        };
        let g = barabasi_albert(cfg)?;
        write(&a.out, &write_edge_list(&g))?;
        write(
            &with_suffix(&a.out, ".json"),
            &(serde_json::to_string_pretty(&cfg)? + "\n"),
        )?;
        println!("n={} m_edges={} planted=none", g.n(), g.edge_count());
        return Ok(());
    }
    let missing = |name: &str| Error::Input(format!("--{name} is required"));
    let inst = plant_quasi_clique(PlantParams {
        n: a.n,
        n_c: a.nc.ok_or_else(|| missing("nc"))?,
        p: a.p.ok_or_else(|| missing("p"))?,
        rho: a.rho.ok_or_else(|| missing("rho"))?,
        gamma: a.gamma.ok_or_else(|| missing("gamma"))?,
        seed: a.seed,
        mode: match a.mode {
            ModeArg::Raw => PlantMode::Raw,
            ModeArg::DensityAssured => PlantMode::DensityAssured,
        },
    })?;
    write(&a.out, &write_edge_list(&inst.graph))?;
    let sidecar = serde_json::to_string_pretty(&inst.sidecar())?;
    write(&with_suffix(&a.out, ".json"), &(sidecar + "\n"))?;
    println!(
        "n={} m_edges={} planted={}",
        inst.graph.n(),
        inst.graph.edge_count(),
        list(&inst.planted)
    );
    Ok(())
}

fn solve(a: SolveArgs) -> qclab::Result<()> {
    let g = load_graph(&a.graph)?;
    let mut cfg = SolverConfig {
        lambda: a.lambda,
        ..Default::default()
    };
    if let Some(k) = a.max_iter {
        cfg.max_iter = k;
    }
    let (r, failure) = match solver::recover(&g, a.gamma, &cfg, a.strategy) {
        Ok(r) => (r, None),
        Err(Error::NonConvergence {
            message,
            best: Some(best),
        }) => (*best, Some(message)),
        Err(e) => return Err(e),
    };
    let eta = r.recovered_set.len();
    let degenerate = eta == g.n() || eta == 0;
    let report = json!({
        "recovered": r.recovered_set,
        "eta": eta,
        "density": r.recovered_density.value(),
        "edges": r.recovered_density.edges,
        "gamma_clique": r.recovered_density.meets(Gamma::new(a.gamma)?),
        "iterations": r.decomposition.iterations,
        "converged": r.decomposition.converged,
        "degenerate": degenerate,
        "lambda": r.decomposition.lambda,
        "objective": r.decomposition.objective,
        "strategy": r.strategy_used,
        "solve_seconds": r.solve_seconds,
    });
    if let Some(path) = &a.out_json {
        write(path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    println!(
        "eta={eta} recovered={} density={} converged={} degenerate={degenerate}",
        list(&r.recovered_set),
        r.recovered_density.value(),
        r.decomposition.converged
    );
    match failure {
        Some(message) => Err(Error::NonConvergence {
            message,
            best: None,
        }),
        None => Ok(()),
    }
}

fn run_oracle(a: OracleArgs) -> qclab::Result<()> {
    let g = load_graph(&a.graph)?;
    let q = match a.mode {
        OracleMode::Exhaustive => oracle::max_quasi_clique_exhaustive(&g, a.gamma)?,
        OracleMode::Bnb => oracle::max_quasi_clique_bnb(&g, a.gamma, 0, g.n(), a.budget)?,
    };
    let text = serde_json::to_string(&q)?;
    if let Some(path) = &a.out_json {
        write(path, &(text.clone() + "\n"))?;
    }
    println!("{text}");
    Ok(())
}

fn export_mip(a: ExportMipArgs) -> qclab::Result<()> {
    let g = load_graph(&a.graph)?;
    let omega_u = a.omega_u.unwrap_or(g.n());
    let model = match a.model {
        7 => mip::build_mip7(
            &g,
            a.gamma,
            a.nu.unwrap_or_else(|| mip::default_nu(&g)),
            a.corrected_7e,
        )?,
        8 => mip::build_mip8(&g, a.gamma, a.omega_l, omega_u)?,
        _ => mip::build_mip9(&g, a.gamma, a.omega_l, omega_u)?,
    };
    write(&a.out, &export_lp(&model))?;
    println!(
        "model={} variables={} binaries={} constraints={}",
        a.model,
        model.variables.len(),
        model.count_kind(mip::VarKind::Binary),
        model.constraints.len()
    );
    Ok(())
}

fn export_sdpa_cmd(a: ExportSdpaArgs) -> qclab::Result<()> {
    let g = load_graph(&a.graph)?;
    let lambda = a.lambda.unwrap_or_else(|| solver::default_lambda(g.n()));
    let text = export_sdpa(&adjacency(&g, true), lambda, a.gamma, a.eta)?;
    write(&a.out, &text)?;
    let p = solver::sdpa::SdpaProblem::parse(&text)?;
    println!(
        "m={} blocks={:?} entries={}",
        p.m,
        p.blocks,
        p.entries.len()
    );
    Ok(())
}

fn experiment(a: ExperimentArgs) -> qclab::Result<()> {
    let mut cfg = ExperimentConfig::from_json(&read(&a.config)?)?;
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    if let Some(s) = a.seed {
        cfg.base_seed = s;
    }
    if let Some(o) = a.out {
        cfg.output = Some(o);
    }
    let out = cfg.output.clone().ok_or_else(|| {
        Error::Input("no output path: set \"output\" in the config or pass --out".into())
    })?;
    let report = experiments::run(&cfg)?;
    report.write_csv(&out)?;
    print!("{}", experiments::summary(&report));
    Ok(())
}

fn check(a: CheckArgs) -> qclab::Result<()> {
    let g = load_graph(&a.graph)?;
    let members = a
        .set
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Input(format!("bad vertex {t:?}")))
        })
        .collect::<qclab::Result<Vec<_>>>()?;
    let set = VertexSet::new(members);
    let d = edge_density(&g, &set)?;
    let ok = d.meets(Gamma::new(a.gamma)?);
    println!(
        "density={} gamma-clique={ok} edges={} size={}",
        d.value(),
        d.edges,
        d.size
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Oracle(a) => run_oracle(a),
        Command::ExportMip(a) => export_mip(a),
        Command::ExportSdpa(a) => export_sdpa_cmd(a),
        Command::Experiment(a) => experiment(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qclab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
