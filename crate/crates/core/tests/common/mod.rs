//! Shared helpers: seeded smooth fields and a central-difference gradient
//! check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcn_core::energy::{energy, gradient};
use rcn_core::{BoundaryConfig, PhaseField, StripGrid};

/// Roll plus a few smooth modes, periodic in x, projected onto the boundary
/// conditions.
pub fn smooth_field(grid: StripGrid, k: usize, seed: u64, amplitude: f64) -> PhaseField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(1..4) as f64,
                rng.gen_range(0.2..1.5),
                rng.gen_range(-amplitude..amplitude),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let delta = rng.gen_range(-1.0..1.0);
    let (eps, s, ell, h) = (grid.eps(), grid.slope(), grid.period(), grid.height());
    let mut f = PhaseField::from_fn(grid, BoundaryConfig::new(k, delta), |x, y| {
        let bump = (y * (h - y) / (h * h)).max(0.0);
        let pert: f64 = modes
            .iter()
            .map(|&(n, ky, amp, ph)| amp * (std::f64::consts::TAU * n * x / ell + ph).sin() * (ky * y).cos())
            .sum();
        eps * x + s * y + delta + 4.0 * bump * pert
    })
    .unwrap();
    f.project_onto_bcs();
    f
}

/// Largest change made by re-imposing the boundary conditions.
pub fn reprojection_moves(f: &mut PhaseField) -> f64 {
    let before = f.values().to_vec();
    f.project_onto_bcs();
    before
        .iter()
        .zip(f.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Worst relative error of the analytic gradient against central
/// differences with step `10⁻⁶(1 + |v|)` over `coords` and `δ`. The
/// denominator is floored at `10⁻³ max|g|`.
pub fn fd_check(f: &PhaseField, coords: &[(usize, usize)]) -> f64 {
    let g = *f.grid();
    let grad = gradient(f).unwrap();
    let floor = 1e-3 * grad.max_norm();
    let mut worst = 0.0f64;
    for &(i, j) in coords {
        let v = f.get(i, j);
        let h = 1e-6 * (1.0 + v.abs());
        let (mut p, mut q) = (f.clone(), f.clone());
        p.set_free(i, j, v + h);
        q.set_free(i, j, v - h);
        let fd = (energy(&p).unwrap().total - energy(&q).unwrap().total) / (2.0 * h);
        worst = worst.max(rel_err(grad.nodal[g.idx(i, j)], fd, floor));
    }
    let d = f.delta();
    let h = 1e-6 * (1.0 + d.abs());
    let (mut p, mut q) = (f.clone(), f.clone());
    p.set_delta(d + h);
    q.set_delta(d - h);
    let fd = (energy(&p).unwrap().total - energy(&q).unwrap().total) / (2.0 * h);
    worst.max(rel_err(grad.ddelta, fd, floor))
}
