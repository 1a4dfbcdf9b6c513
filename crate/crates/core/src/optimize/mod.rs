//! Minimization of the discrete energy over the free nodal values and the
//! phase shift `δ`, seeds, and sweeps over the Dirichlet count `k`.

pub mod linesearch;
pub mod ncg;
pub mod precond;
pub mod sweep;

use std::str::FromStr;

pub use ncg::NcgOptions;
pub use sweep::{
    collect_sweep, default_k_list, find_transition, local_minima, refinement_ks, run_task, slope_analysis, sweep_a,
    sweep_a_with, sweep_tasks, transition_report, BranchResult, CurvePoint, SlopeAnalysis, SweepOptions, SweepRecord,
    TransitionReport, KINK_THRESHOLD, KNEE_BRANCH_MAX_A,
};

use crate::energy::{EnergyBreakdown, EnergyGradient, Evaluator};
use crate::error::{invalid, RcnError, Result};
use crate::grid::{BoundaryConfig, PhaseField, StripGrid};
use crate::selfdual::{knee, log_cosh, zipper_test_function};

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub field: PhaseField,
    pub energy: EnergyBreakdown,
    /// Max-norm of the projected gradient at `field`.
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Total energy after each accepted step.
    pub history: Vec<f64>,
}

/// Nonlinear conjugate gradients (PR+, strong Wolfe line search) over rows
/// `1..n` and `δ`. Every iterate satisfies the discrete boundary conditions.
pub fn minimize_field(field: &PhaseField, opts: NcgOptions) -> Result<MinimizeResult> {
    field.check_finite()?;
    if !(opts.tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {}", opts.tol));
    }
    let mut work = field.clone();
    work.project_onto_bcs();
    let grid = *work.grid();
    let mut x0 = vec![0.0; work.free_len()];
    work.pack(&mut x0);
    let mut precond = precond::Preconditioner::new(&grid);
    let mut eval = Evaluator::new();
    let mut grad = EnergyGradient::zeros(&grid);
    let outcome = ncg::minimize(
        |x, g| {
            work.unpack(x);
            let e = eval.energy_and_gradient(&work, &mut grad);
            grad.pack(&grid, g);
            e.total
        },
        x0,
        |g, z| precond.apply(g, z),
        opts,
    );
    work.unpack(&outcome.x);
    work.check_finite()?;
    let energy = eval.energy_and_gradient(&work, &mut grad);
    Ok(MinimizeResult {
        field: work,
        energy,
        grad_norm: grad.max_norm(),
        iterations: outcome.iterations,
        evaluations: outcome.evaluations,
        converged: outcome.converged,
        history: outcome.history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeedKind {
    Roll,
    Knee,
    Zipper,
}

impl SeedKind {
    pub fn name(self) -> &'static str {
        match self {
            SeedKind::Roll => "roll",
            SeedKind::Knee => "knee",
            SeedKind::Zipper => "zipper",
        }
    }
}

impl FromStr for SeedKind {
    type Err = RcnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roll" => Ok(SeedKind::Roll),
            "knee" => Ok(SeedKind::Knee),
            "zipper" | "zipper-seed" => Ok(SeedKind::Zipper),
            other => invalid(format!("unknown seed kind `{other}` (roll, knee, zipper)")),
        }
    }
}

/// Initial field of the given kind, projected onto the boundary conditions.
///
/// The roll uses `config.delta`; the knee and zipper seeds choose their own
/// phase shift so that the top row matches the far field.
pub fn init_field(grid: StripGrid, config: BoundaryConfig, kind: SeedKind) -> Result<PhaseField> {
    if config.k > grid.m() {
        return invalid(format!("k = {} exceeds m = {}", config.k, grid.m()));
    }
    match kind {
        SeedKind::Roll => {
            let (eps, s, d) = (grid.eps(), grid.slope(), config.delta);
            let mut f = PhaseField::from_fn(grid, config, |x, y| eps * x + s * y + d)?;
            f.project_onto_bcs();
            Ok(f)
        }
        SeedKind::Knee => {
            let s = grid.slope();
            let delta = log_cosh(s * grid.height()) - s * grid.height();
            let eps = grid.eps();
            let mut f = PhaseField::from_fn(grid, BoundaryConfig::new(config.k, delta), |x, y| knee(x, y, eps))?;
            f.project_onto_bcs();
            Ok(f)
        }
        SeedKind::Zipper => zipper_test_function(grid, config.k),
    }
}
