//! Successive minimization over the Dirichlet count `k` and detection of
//! the jump of the minimizing fraction `a* = k*/m` as ε decreases.

use super::{init_field, minimize_field, MinimizeResult, NcgOptions, SeedKind};
use crate::energy::EnergyBreakdown;
use crate::error::{invalid, Result};
use crate::grid::{BoundaryConfig, PhaseField, StripGrid};
use crate::selfdual::default_height;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub ncg: NcgOptions,
    pub seeds: Vec<SeedKind>,
    /// Bisect the `k` gaps next to the best `k` until they close.
    pub refine: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            ncg: NcgOptions::default(),
            seeds: vec![SeedKind::Knee, SeedKind::Zipper],
            refine: true,
        }
    }
}

/// Outcome of one seed at one `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchResult {
    pub seed: SeedKind,
    pub energy: EnergyBreakdown,
    pub delta: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Best minimizer over seeds at one `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub eps: f64,
    pub k: usize,
    pub a: f64,
    pub delta_star: f64,
    pub energy: EnergyBreakdown,
    pub converged: bool,
    pub iterations: usize,
    pub seed: SeedKind,
    pub branches: Vec<BranchResult>,
    pub field: PhaseField,
}

/// `{0, 1, 2, 4} ∪ {round(m(1 − bε))}` for `b` spread over `[0.4, 3.3]`,
/// restricted to `0 ≤ k < m`.
pub fn default_k_list(m: usize, eps: f64) -> Vec<usize> {
    let mut ks = vec![0, 1, 2, 4];
    for b in [0.4, 0.6, 0.8, 1.0, 1.2, 1.5, 1.8, 2.2, 2.7, 3.3] {
        let k = (m as f64 * (1.0 - b * eps)).round();
        if k >= 0.0 {
            ks.push(k as usize);
        }
    }
    ks.retain(|&k| k < m);
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// Minimizes from one seed. The zipper seed needs `k < m`.
pub fn run_task(grid: StripGrid, k: usize, seed: SeedKind, ncg: NcgOptions) -> Result<MinimizeResult> {
    let field = init_field(grid, BoundaryConfig::new(k, 0.0), seed)?;
    minimize_field(&field, ncg)
}

/// Groups per-seed results by `k` and keeps the lowest energy.
pub fn collect_sweep(grid: &StripGrid, results: Vec<(usize, SeedKind, MinimizeResult)>) -> Vec<SweepRecord> {
    let mut by_k: std::collections::BTreeMap<usize, Vec<(SeedKind, MinimizeResult)>> = Default::default();
    for (k, seed, r) in results {
        by_k.entry(k).or_default().push((seed, r));
    }
    by_k.into_iter()
        .map(|(k, mut runs)| {
            runs.sort_by_key(|(s, _)| *s);
            let branches = runs
                .iter()
                .map(|(seed, r)| BranchResult {
                    seed: *seed,
                    energy: r.energy,
                    delta: r.field.delta(),
                    converged: r.converged,
                    iterations: r.iterations,
                })
                .collect();
            let best = runs
                .into_iter()
                .min_by(|a, b| a.1.energy.total.total_cmp(&b.1.energy.total))
                .expect("at least one seed per k");
            let (seed, r) = best;
            SweepRecord {
                eps: grid.eps(),
                k,
                a: k as f64 / grid.m() as f64,
                delta_star: r.field.delta(),
                energy: r.energy,
                converged: r.converged,
                iterations: r.iterations,
                seed,
                branches,
                field: r.field,
            }
        })
        .collect()
}

/// The (seed, k) pairs a sweep runs.
pub fn sweep_tasks(grid: &StripGrid, k_list: &[usize], seeds: &[SeedKind]) -> Result<Vec<(usize, SeedKind)>> {
    if k_list.is_empty() {
        return invalid("k list is empty");
    }
    if seeds.is_empty() {
        return invalid("no seed kinds given");
    }
    if let Some(&k) = k_list.iter().find(|&&k| k > grid.m()) {
        return invalid(format!("k = {k} exceeds m = {}", grid.m()));
    }
    let mut tasks = Vec::new();
    for &k in k_list {
        let mut any = false;
        for &seed in seeds {
            if seed == SeedKind::Zipper && k == grid.m() {
                continue;
            }
            tasks.push((k, seed));
            any = true;
        }
        if !any {
            // a = 1 admits no zipper seed; fall back to the knee.
            tasks.push((k, SeedKind::Knee));
        }
    }
    tasks.sort_unstable();
    tasks.dedup();
    Ok(tasks)
}

/// For each `k`, minimizes from every seed and keeps the best. Records are
/// ordered by `k`.
pub fn sweep_a(grid: StripGrid, k_list: &[usize], opts: &SweepOptions) -> Result<Vec<SweepRecord>> {
    sweep_a_with(grid, k_list, opts, |tasks| {
        tasks
            .iter()
            .map(|&(k, seed)| run_task(grid, k, seed, opts.ncg))
            .collect()
    })
}

/// [`sweep_a`] with a caller-supplied runner that minimizes a batch of
/// `(k, seed)` tasks and returns the results in task order.
pub fn sweep_a_with<F>(grid: StripGrid, k_list: &[usize], opts: &SweepOptions, mut run: F) -> Result<Vec<SweepRecord>>
where
    F: FnMut(&[(usize, SeedKind)]) -> Result<Vec<MinimizeResult>>,
{
    let mut tasks = sweep_tasks(&grid, k_list, &opts.seeds)?;
    let mut results = Vec::new();
    loop {
        let batch = run(&tasks)?;
        if batch.len() != tasks.len() {
            return invalid(format!(
                "runner returned {} results for {} tasks",
                batch.len(),
                tasks.len()
            ));
        }
        results.extend(tasks.iter().zip(batch).map(|(&(k, seed), r)| (k, seed, r)));
        let records = collect_sweep(&grid, results.clone());
        let extra = if opts.refine {
            refinement_ks(&records)
        } else {
            Vec::new()
        };
        if extra.is_empty() {
            return Ok(records);
        }
        tasks = sweep_tasks(&grid, &extra, &opts.seeds)?;
    }
}

/// Midpoints of the gaps on either side of the lowest-energy record.
pub fn refinement_ks(records: &[SweepRecord]) -> Vec<usize> {
    let Some(best) = records
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.energy.total.total_cmp(&b.1.energy.total))
        .map(|(i, _)| i)
    else {
        return Vec::new();
    };
    let mut ks = Vec::new();
    if best > 0 && records[best].k - records[best - 1].k > 1 {
        ks.push((records[best].k + records[best - 1].k) / 2);
    }
    if best + 1 < records.len() && records[best + 1].k - records[best].k > 1 {
        ks.push((records[best].k + records[best + 1].k) / 2);
    }
    ks
}

/// Indices of local minima of the energy along records ordered by `k`.
pub fn local_minima(records: &[SweepRecord]) -> Vec<usize> {
    let e: Vec<f64> = records.iter().map(|r| r.energy.total).collect();
    (0..e.len())
        .filter(|&i| {
            let left = i == 0 || e[i] <= e[i - 1];
            let right = i + 1 == e.len() || e[i] <= e[i + 1];
            left && right
        })
        .collect()
}

/// Records with `a` up to this value belong to the knee branch. A few
/// Dirichlet nodes at the start of the bottom edge barely perturb the knee,
/// whose phase already vanishes there.
pub const KNEE_BRANCH_MAX_A: f64 = 0.05;

/// Relative slope jump of the wrong sign for a convex branch that counts as
/// a kink.
pub const KINK_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub eps: f64,
    pub k_star: usize,
    pub a_star: f64,
    pub energy: EnergyBreakdown,
    /// Best energy with `a ≤ KNEE_BRANCH_MAX_A`.
    pub knee_branch: f64,
    /// Best energy with `a > KNEE_BRANCH_MAX_A`.
    pub zipper_branch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReport {
    pub points: Vec<CurvePoint>,
    /// `(ε_hi, ε_lo)`: consecutive values with the minimizer on the knee
    /// branch at `ε_hi` and on the zipper branch at `ε_lo`.
    pub bracket: Option<(f64, f64)>,
    /// The sign of `knee_branch − zipper_branch` changes exactly once.
    pub monotone_ordering: bool,
}

/// Builds the E(ε) curve from per-ε sweeps, ordered by descending ε. A
/// single ε gives a curve without a bracket.
pub fn transition_report(sweeps: &[(f64, Vec<SweepRecord>)]) -> Result<TransitionReport> {
    if sweeps.is_empty() {
        return invalid("no eps values");
    }
    if sweeps.windows(2).any(|w| w[0].0 <= w[1].0) {
        return invalid("eps values must be sorted in strictly descending order");
    }
    let mut points = Vec::with_capacity(sweeps.len());
    for (eps, recs) in sweeps {
        let best = recs
            .iter()
            .min_by(|a, b| a.energy.total.total_cmp(&b.energy.total))
            .ok_or_else(|| crate::RcnError::InvalidInput(format!("empty sweep at eps = {eps}")))?;
        let branch = |knee: bool| {
            recs.iter()
                .filter(|r| (r.a <= KNEE_BRANCH_MAX_A) == knee)
                .map(|r| r.energy.total)
                .fold(f64::INFINITY, f64::min)
        };
        let (knee, zipper) = (branch(true), branch(false));
        points.push(CurvePoint {
            eps: *eps,
            k_star: best.k,
            a_star: best.a,
            energy: best.energy,
            knee_branch: knee,
            zipper_branch: zipper,
        });
    }
    let bracket = points
        .windows(2)
        .find(|w| w[0].a_star <= KNEE_BRANCH_MAX_A && w[1].a_star > KNEE_BRANCH_MAX_A)
        .map(|w| (w[0].eps, w[1].eps));
    let signs: Vec<bool> = points
        .iter()
        .filter(|p| p.knee_branch.is_finite() && p.zipper_branch.is_finite())
        .map(|p| p.knee_branch > p.zipper_branch)
        .collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let monotone_ordering = changes == 1 && signs.first() == Some(&false);
    Ok(TransitionReport {
        points,
        bracket,
        monotone_ordering,
    })
}

/// Sweeps every ε (descending) on an `m × n` grid of height
/// `height.unwrap_or(max(20, 8/ε))` with the default `k` list unless one is
/// given.
pub fn find_transition(
    eps_list: &[f64],
    m: usize,
    n: usize,
    height: Option<f64>,
    k_list: Option<&[usize]>,
    opts: &SweepOptions,
) -> Result<(TransitionReport, Vec<(f64, Vec<SweepRecord>)>)> {
    if eps_list.is_empty() {
        return invalid("no eps values");
    }
    let mut sweeps = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let grid = StripGrid::new(eps, height.unwrap_or_else(|| default_height(eps)), m, n)?;
        let ks = k_list.map(<[usize]>::to_vec).unwrap_or_else(|| default_k_list(m, eps));
        sweeps.push((eps, sweep_a(grid, &ks, opts)?));
    }
    Ok((transition_report(&sweeps)?, sweeps))
}

/// Three-point slope comparison on the global E(ε) curve.
///
/// Each branch is convex in ε, so its one-sided slopes satisfy
/// `s₊ ≥ s₋` (`s₊` toward larger ε). Taking the minimum of two branches
/// that cross at an angle produces a jump of the opposite sign.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeAnalysis {
    /// `(ε, (s₊ − s₋) / max(|s₊|, |s₋|))` at each interior point of the
    /// global curve.
    pub global: Vec<(f64, f64)>,
    /// The same quantity along the knee branch alone.
    pub knee_branch: Vec<(f64, f64)>,
    /// Most negative global jump at the two points bounding the bracket.
    pub at_transition: Option<f64>,
    /// `at_transition < −KINK_THRESHOLD` while the knee branch stays convex
    /// at the same points.
    pub kink: bool,
}

fn slope_jumps(eps: &[f64], e: &[f64]) -> Vec<(f64, f64)> {
    (1..eps.len().saturating_sub(1))
        .map(|i| {
            let s_lo = (e[i] - e[i + 1]) / (eps[i] - eps[i + 1]);
            let s_hi = (e[i - 1] - e[i]) / (eps[i - 1] - eps[i]);
            (eps[i], (s_hi - s_lo) / s_hi.abs().max(s_lo.abs()).max(1e-300))
        })
        .collect()
}

pub fn slope_analysis(report: &TransitionReport) -> SlopeAnalysis {
    let eps: Vec<f64> = report.points.iter().map(|p| p.eps).collect();
    let global_e: Vec<f64> = report.points.iter().map(|p| p.energy.total).collect();
    let knee_e: Vec<f64> = report.points.iter().map(|p| p.knee_branch).collect();
    let global = slope_jumps(&eps, &global_e);
    let knee_branch = slope_jumps(&eps, &knee_e);
    let near = |e: f64| report.bracket.is_some_and(|(hi, lo)| e == hi || e == lo);
    let at_transition = global
        .iter()
        .filter(|(e, _)| near(*e))
        .map(|(_, r)| *r)
        .reduce(f64::min);
    let knee_convex = knee_branch.iter().filter(|(e, _)| near(*e)).all(|(_, r)| *r > 0.0);
    SlopeAnalysis {
        kink: at_transition.is_some_and(|r| r < -KINK_THRESHOLD) && knee_convex,
        global,
        knee_branch,
        at_transition,
    }
}
