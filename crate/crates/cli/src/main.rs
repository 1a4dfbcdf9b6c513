//! `rcn`: minimization, sweeps, certificates and probes from the command
//! line. Every subcommand writes CSV files into `--out` and echoes the main
//! table on stdout.
//!
//! Exit codes: 0 success, 1 invalid input, 2 non-convergence, 3 violated
//! lower bound.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use rcn_core::bounds::{Certifier, Variant};
use rcn_core::energy::energy;
use rcn_core::io::{self, ENERGY_HEADER, PROBE_HEADER, SWEEP_HEADER};
use rcn_core::optimize::{
    default_k_list, init_field, local_minima, minimize_field, run_task, slope_analysis, sweep_a_with,
    transition_report, NcgOptions, SeedKind, SweepOptions, SweepRecord,
};
use rcn_core::selfdual::{default_height, sampled_knee, upper_bound_probe, ProbeParams};
use rcn_core::{knee_energy, BoundaryConfig, RcnError, StripGrid};

#[derive(Parser)]
#[command(
    name = "rcn",
    version,
    about = "Regularized Cross-Newell zipper energy on a half-strip"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize from one seed at fixed eps and k.
    #[command(args_override_self = true)]
    Minimize(MinimizeArgs),
    /// Minimum energy against the Dirichlet fraction a at fixed eps.
    #[command(name = "sweep-a", args_override_self = true)]
    SweepA(SweepArgs),
    /// Global minimum over a for each eps, and the transition bracket.
    #[command(name = "energy-curve", args_override_self = true)]
    EnergyCurve(CurveArgs),
    /// Lower-bound certificates for a field file.
    #[command(name = "bounds-check", args_override_self = true)]
    BoundsCheck(BoundsArgs),
    /// Energies of the blended self-dual test functions.
    #[command(name = "selfdual-probe", args_override_self = true)]
    SelfdualProbe(ProbeArgs),
    /// Knee closed form against the sampled knee on a grid.
    #[command(args_override_self = true)]
    Knee(KneeArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0: all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 96)]
    m: usize,
    #[arg(long, default_value_t = 96)]
    n: usize,
    /// Strip height (default max(20, 8/eps)).
    #[arg(long = "L", alias = "height")]
    height: Option<f64>,
}

impl GridArgs {
    fn grid(&self, eps: f64) -> Result<StripGrid, RcnError> {
        StripGrid::new(eps, self.height.unwrap_or_else(|| default_height(eps)), self.m, self.n)
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Stop when the max-norm of the gradient is at most this.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long = "max-iters", default_value_t = 50_000)]
    max_iters: usize,
}

impl SolverArgs {
    fn options(&self) -> NcgOptions {
        NcgOptions {
            tol: self.tol,
            max_iters: self.max_iters,
            ..NcgOptions::default()
        }
    }
}

#[derive(Args)]
struct MinimizeArgs {
    #[arg(long)]
    eps: f64,
    /// Number of Dirichlet nodes on the bottom edge.
    #[arg(long, conflicts_with = "a")]
    k: Option<usize>,
    /// Dirichlet fraction, rounded to the nearest node.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, default_value = "knee", value_parser = parse_seed)]
    seed: SeedKind,
    /// Phase shift of the roll seed.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepSettings {
    /// Dirichlet counts to minimize at (default: dense near both ends).
    #[arg(long = "k-list", value_delimiter = ',')]
    k_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_value = "knee,zipper", value_parser = parse_seed)]
    seeds: Vec<SeedKind>,
    /// Bisect the gaps next to the best k until they close.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    refine: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

impl SweepSettings {
    fn options(&self) -> SweepOptions {
        SweepOptions {
            ncg: self.solver.options(),
            seeds: self.seeds.clone(),
            refine: self.refine,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    eps: f64,
    /// Also write the minimizer for every k.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    fields: bool,
    #[command(flatten)]
    sweep: SweepSettings,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(
        long = "eps-list",
        value_delimiter = ',',
        default_value = "0.55,0.5,0.45,0.4,0.35,0.3"
    )]
    eps_list: Vec<f64>,
    #[command(flatten)]
    sweep: SweepSettings,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BoundsArgs {
    field: PathBuf,
    /// Lattice points per axis for the subordination constants.
    #[arg(long = "per-axis", default_value_t = 201)]
    per_axis: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long = "eps-list", value_delimiter = ',', default_value = "0.3,0.2,0.1")]
    eps_list: Vec<f64>,
    /// Neumann length in units of eps: 1 - a = c eps.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Target grid spacing.
    #[arg(long, default_value_t = 0.05)]
    spacing: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct KneeArgs {
    #[arg(long = "eps-list", value_delimiter = ',', default_value = "0.8,0.5")]
    eps_list: Vec<f64>,
    #[arg(long, default_value_t = 128)]
    m: usize,
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long = "L", alias = "height", default_value_t = 20.0)]
    height: f64,
    #[command(flatten)]
    common: Common,
}

fn parse_seed(s: &str) -> Result<SeedKind, String> {
    s.parse().map_err(|e: RcnError| e.to_string())
}

/// Why a command did not succeed, mapped onto the exit code.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    NotConverged(String),
    Bound(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::NotConverged(_) => 2,
            Failure::Bound(_) => 3,
        }
    }
}

impl From<RcnError> for Failure {
    fn from(e: RcnError) -> Self {
        match e {
            RcnError::BoundViolation(msg) => Failure::Bound(msg),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "error: {m}"),
            Failure::NotConverged(m) => write!(f, "not converged: {m}"),
            Failure::Bound(m) => write!(f, "bound violated: {m}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Outcome {
    let jobs = match &command {
        Command::Minimize(a) => a.common.jobs,
        Command::SweepA(a) => a.common.jobs,
        Command::EnergyCurve(a) => a.common.jobs,
        Command::BoundsCheck(a) => a.common.jobs,
        Command::SelfdualProbe(a) => a.common.jobs,
        Command::Knee(a) => a.common.jobs,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Invalid(e.to_string()))?;
    pool.install(|| match command {
        Command::Minimize(a) => cmd_minimize(a),
        Command::SweepA(a) => cmd_sweep_a(a),
        Command::EnergyCurve(a) => cmd_energy_curve(a),
        Command::BoundsCheck(a) => cmd_bounds_check(a),
        Command::SelfdualProbe(a) => cmd_selfdual_probe(a),
        Command::Knee(a) => cmd_knee(a),
    })
}

/// Writes `header` and `rows` to `dir/name` and echoes them on stdout.
fn write_csv(dir: &Path, name: &str, header: &str, rows: &[String]) -> Outcome {
    fs::create_dir_all(dir)?;
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    fs::write(dir.join(name), &text)?;
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn unconverged(records: &[SweepRecord]) -> Outcome {
    let bad: Vec<String> = records
        .iter()
        .filter(|r| !r.converged)
        .map(|r| format!("eps {} k {}", r.eps, r.k))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::NotConverged(bad.join(", ")))
    }
}

fn cmd_minimize(args: MinimizeArgs) -> Outcome {
    let grid = args.grid.grid(args.eps)?;
    let k = match (args.k, args.a) {
        (Some(k), _) => k,
        (None, Some(a)) if (0.0..=1.0).contains(&a) => (a * grid.m() as f64).round() as usize,
        (None, Some(a)) => return Err(Failure::Invalid(format!("a must lie in [0, 1], got {a}"))),
        (None, None) => 0,
    };
    let start = init_field(grid, BoundaryConfig::new(k, args.delta), args.seed)?;
    let r = minimize_field(&start, args.solver.options())?;
    fs::create_dir_all(&args.common.out)?;
    io::save_field(&r.field, &args.common.out.join("field.txt"))?;
    let a = k as f64 / grid.m() as f64;
    let row = io::energy_row(args.eps, a, r.field.delta(), &r.energy);
    write_csv(&args.common.out, "energy.csv", ENERGY_HEADER, &[row])?;
    eprintln!(
        "eps {} k {k}: E = {:.6} after {} iterations, |grad| = {:.2e}",
        args.eps, r.energy.total, r.iterations, r.grad_norm
    );
    if r.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!(
            "gradient {:.3e} > tol {:.1e}",
            r.grad_norm, args.solver.tol
        )))
    }
}

/// Runs a sweep with every batch of `(k, seed)` tasks spread over the pool.
fn parallel_sweep(grid: StripGrid, ks: &[usize], opts: &SweepOptions) -> Result<Vec<SweepRecord>, RcnError> {
    sweep_a_with(grid, ks, opts, |tasks| {
        tasks
            .par_iter()
            .map(|&(k, seed)| run_task(grid, k, seed, opts.ncg))
            .collect()
    })
}

fn sweep_rows(records: &[SweepRecord]) -> Vec<String> {
    records
        .iter()
        .map(|r| io::sweep_row(r.eps, r.a, r.delta_star, &r.energy, r.converged, r.iterations))
        .collect()
}

fn cmd_sweep_a(args: SweepArgs) -> Outcome {
    let grid = args.grid.grid(args.eps)?;
    let ks = args
        .sweep
        .k_list
        .clone()
        .unwrap_or_else(|| default_k_list(grid.m(), args.eps));
    let records = parallel_sweep(grid, &ks, &args.sweep.options())?;
    write_csv(&args.common.out, "sweep_a.csv", SWEEP_HEADER, &sweep_rows(&records))?;
    if args.fields {
        for r in &records {
            io::save_field(&r.field, &args.common.out.join(format!("field_k{}.txt", r.k)))?;
        }
    }
    let best = records
        .iter()
        .min_by(|a, b| a.energy.total.total_cmp(&b.energy.total))
        .expect("sweep has records");
    let minima: Vec<String> = local_minima(&records)
        .iter()
        .map(|&i| format!("{:.4}", records[i].a))
        .collect();
    eprintln!(
        "eps {}: global minimum E = {:.6} at a = {:.4}; local minima at a = {}",
        args.eps,
        best.energy.total,
        best.a,
        minima.join(", ")
    );
    unconverged(&records)
}

fn cmd_energy_curve(args: CurveArgs) -> Outcome {
    let mut eps_list = args.eps_list.clone();
    eps_list.sort_by(|a, b| b.total_cmp(a));
    eps_list.dedup();
    let opts = args.sweep.options();
    let sweeps: Vec<(f64, Vec<SweepRecord>)> = eps_list
        .par_iter()
        .map(|&eps| {
            let grid = args.grid.grid(eps)?;
            let ks = args
                .sweep
                .k_list
                .clone()
                .unwrap_or_else(|| default_k_list(grid.m(), eps));
            Ok((eps, parallel_sweep(grid, &ks, &opts)?))
        })
        .collect::<Result<_, RcnError>>()?;
    let report = transition_report(&sweeps)?;
    let slopes = slope_analysis(&report);

    let header = "eps,k_star,a_star,delta,bending,strain,total,knee_branch,zipper_branch,knee_closed_form";
    let rows: Vec<String> = report
        .points
        .iter()
        .zip(&sweeps)
        .map(|(p, (_, recs))| {
            let delta = recs.iter().find(|r| r.k == p.k_star).map_or(f64::NAN, |r| r.delta_star);
            format!(
                "{},{},{},{delta:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                p.eps,
                p.k_star,
                p.a_star,
                p.energy.bending,
                p.energy.strain,
                p.energy.total,
                p.knee_branch,
                p.zipper_branch,
                knee_energy(p.eps)
            )
        })
        .collect();
    write_csv(&args.common.out, "energy_curve.csv", header, &rows)?;

    let all: Vec<SweepRecord> = sweeps.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    fs::write(
        args.common.out.join("sweeps.csv"),
        format!("{SWEEP_HEADER}\n{}\n", sweep_rows(&all).join("\n")),
    )?;
    let bracket_row = match report.bracket {
        Some((hi, lo)) => format!(
            "{hi},{lo},{},{},{}",
            report.monotone_ordering,
            slopes.at_transition.map_or(String::new(), |r| format!("{r:.6}")),
            slopes.kink
        ),
        None => format!(",,{},,false", report.monotone_ordering),
    };
    fs::write(
        args.common.out.join("transition.csv"),
        format!("eps_hi,eps_lo,monotone_ordering,slope_jump,kink\n{bracket_row}\n"),
    )?;
    match report.bracket {
        Some((hi, lo)) => eprintln!(
            "transition between eps = {lo} and {hi}; monotone ordering {}; kink {}",
            report.monotone_ordering, slopes.kink
        ),
        None => eprintln!("no transition bracket in the eps list"),
    }
    unconverged(&all)
}

fn cmd_bounds_check(args: BoundsArgs) -> Outcome {
    let field = io::load_field(&args.field)?;
    let cert = Certifier::new(args.per_axis)?;
    let reports = [Variant::Squeeze, Variant::Extend]
        .map(|v| cert.certify(&field, v))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let header = "variant,eps,a,energy,rhs,c_sub,area,boundary,consistency,lemma_bound,pass";
    let rows: Vec<String> = reports
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.6e},{:.12e},{}",
                r.variant.name(),
                r.eps,
                r.a,
                r.lhs,
                r.rhs,
                r.c_sub,
                r.integral.area,
                r.integral.boundary,
                r.consistency,
                r.lemma_bound,
                r.pass
            )
        })
        .collect();
    write_csv(&args.common.out, "bounds.csv", header, &rows)?;
    match reports.iter().find(|r| !r.pass) {
        None => Ok(()),
        Some(r) => Err(Failure::Bound(format!(
            "{} variant: F = {} < |area|/C = {}",
            r.variant.name(),
            r.lhs,
            r.rhs
        ))),
    }
}

fn cmd_selfdual_probe(args: ProbeArgs) -> Outcome {
    let params = ProbeParams {
        c: args.c,
        spacing: args.spacing,
    };
    let rows = args
        .eps_list
        .par_iter()
        .map(|&eps| upper_bound_probe(&[eps], params).map(|mut v| v.remove(0)))
        .collect::<Result<Vec<_>, _>>()?;
    let lines: Vec<String> = rows.iter().map(|r| io::probe_row(r.eps, &r.energy)).collect();
    write_csv(&args.common.out, "probe.csv", PROBE_HEADER, &lines)?;
    Ok(())
}

fn cmd_knee(args: KneeArgs) -> Outcome {
    let rows = args
        .eps_list
        .par_iter()
        .map(|&eps| {
            let grid = StripGrid::new(eps, args.height, args.m, args.n)?;
            let sampled = energy(&sampled_knee(grid)?)?.total;
            let exact = knee_energy(eps);
            Ok(format!(
                "{eps},{exact:.12e},{sampled:.12e},{:.6e}",
                (sampled - exact).abs() / exact
            ))
        })
        .collect::<Result<Vec<_>, RcnError>>()?;
    write_csv(
        &args.common.out,
        "knee.csv",
        "eps,closed_form,sampled_energy,relative_error",
        &rows,
    )?;
    Ok(())
}
