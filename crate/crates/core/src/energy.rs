//! Discrete regularized Cross-Newell energy
//!
//! ```text
//! F ≈ ηζ Σ_{i<m} Σ_{j≤n} [(δx⁺δx⁻ + δy⁺δy⁻)θ]² + [½(|δx⁺θ|² + |δx⁻θ|² + |δy⁺θ|² + |δy⁻θ|²) − 1]²
//! ```
//!
//! and its exact gradient with respect to the free coordinates (rows
//! `1..n` and `δ`), including every chain-rule path through ghost values.

use crate::error::Result;
use crate::grid::{Extended, PhaseField, StripGrid};
use crate::quad::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub bending: f64,
    pub strain: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(bending: f64, strain: f64) -> Self {
        Self {
            bending,
            strain,
            total: bending + strain,
        }
    }
}

/// `∂F/∂θ_{i,j}` on the stored nodes plus `∂F/∂δ`.
///
/// Constrained entries are zero: the Dirichlet nodes, the whole `j = n` row
/// and the tied Neumann nodes at `j = 0` (their derivative is folded into
/// `(i, 1)`).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGradient {
    pub nodal: Vec<f64>,
    pub ddelta: f64,
}

impl EnergyGradient {
    pub fn zeros(grid: &StripGrid) -> Self {
        Self {
            nodal: vec![0.0; grid.len()],
            ddelta: 0.0,
        }
    }

    /// Max-norm over the free coordinates.
    pub fn max_norm(&self) -> f64 {
        self.nodal.iter().fold(self.ddelta.abs(), |acc, g| acc.max(g.abs()))
    }

    /// Copies the free part in the order used by [`PhaseField::pack`].
    pub fn pack(&self, grid: &StripGrid, out: &mut [f64]) {
        let (m, n) = (grid.m(), grid.n());
        out[..m * (n - 1)].copy_from_slice(&self.nodal[m..n * m]);
        out[m * (n - 1)] = self.ddelta;
    }
}

/// Reusable buffers for repeated evaluations on one grid.
#[derive(Debug, Default)]
pub struct Evaluator {
    ext: Vec<f64>,
    gext: Vec<f64>,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn energy(&mut self, field: &PhaseField) -> EnergyBreakdown {
        field.fill_extended(&mut self.ext);
        let g = field.grid();
        let ext = Extended::new(&self.ext, g);
        let (bending, strain) = node_sums(g, ext, |_, _| true);
        EnergyBreakdown::new(bending, strain)
    }

    /// Energy and gradient in one pass.
    pub fn energy_and_gradient(&mut self, field: &PhaseField, grad: &mut EnergyGradient) -> EnergyBreakdown {
        let g = *field.grid();
        let (m, n) = (g.m(), g.n());
        let w = m + 2;
        field.fill_extended(&mut self.ext);
        self.gext.clear();
        self.gext.resize(self.ext.len(), 0.0);

        let (ie2, iz2) = (1.0 / (g.eta() * g.eta()), 1.0 / (g.zeta() * g.zeta()));
        let (ie, iz) = (1.0 / g.eta(), 1.0 / g.zeta());
        let cell = g.eta() * g.zeta();
        let ext = &self.ext;
        let gext = &mut self.gext;
        let mut bending = CompensatedSum::default();
        let mut strain = CompensatedSum::default();
        for j in 0..=n {
            let mut rb = CompensatedSum::default();
            let mut rs = CompensatedSum::default();
            for i in 0..m {
                let p = (i + 1) + (j + 1) * w;
                let c = ext[p];
                let (l, r, d, u) = (ext[p - 1], ext[p + 1], ext[p - w], ext[p + w]);
                let dxp = (r - c) * ie;
                let dxm = (c - l) * ie;
                let dyp = (u - c) * iz;
                let dym = (c - d) * iz;
                let lap = (dxp - dxm) * ie + (dyp - dym) * iz;
                let st = 0.5 * (dxp * dxp + dxm * dxm + dyp * dyp + dym * dym) - 1.0;
                rb.add(lap * lap);
                rs.add(st * st);
                let gl = 2.0 * cell * lap;
                let gs = 2.0 * cell * st;
                gext[p - 1] += gl * ie2 - gs * dxm * ie;
                gext[p + 1] += gl * ie2 + gs * dxp * ie;
                gext[p - w] += gl * iz2 - gs * dym * iz;
                gext[p + w] += gl * iz2 + gs * dyp * iz;
                gext[p] += -2.0 * gl * (ie2 + iz2) + gs * ((dxm - dxp) * ie + (dym - dyp) * iz);
            }
            bending.add(rb.value());
            strain.add(rs.value());
        }
        fold_ghosts(field, &mut self.gext, grad);
        EnergyBreakdown::new(cell * bending.value(), cell * strain.value())
    }
}

/// Chain rule from the ghost-extended gradient back to free coordinates.
fn fold_ghosts(field: &PhaseField, gext: &mut [f64], grad: &mut EnergyGradient) {
    let g = field.grid();
    let (m, n) = (g.m(), g.n());
    let w = m + 2;
    let at = |i: isize, j: isize| (i + 1) as usize + (j + 1) as usize * w;
    let ghost_rows = field.ghosts() == crate::grid::GhostMode::ShiftPeriodic;

    grad.nodal.clear();
    grad.nodal.resize(g.len(), 0.0);
    let mut ddelta = CompensatedSum::default();
    if ghost_rows {
        // i = -1 and i = m columns wrap onto stored columns (constant shifts
        // do not contribute). Rows -1 and n+1 are folded below from the
        // wrapped columns too.
        for j in -1..=(n as isize + 1) {
            let left = gext[at(-1, j)];
            let right = gext[at(m as isize, j)];
            gext[at(m as isize - 1, j)] += left;
            gext[at(0, j)] += right;
        }
        for i in 0..m {
            let gm1 = gext[at(i as isize, -1)];
            match field.reflection() {
                crate::grid::Reflection::Mixed if field.is_dirichlet(i) => {
                    gext[at(i as isize, 0)] += 2.0 * gm1;
                    gext[at(i as isize, 1)] -= gm1;
                }
                _ => gext[at(i as isize, 1)] += gm1,
            }
            ddelta.add(gext[at(i as isize, n as isize + 1)]);
        }
    }
    for i in 0..m {
        ddelta.add(gext[at(i as isize, n as isize)]);
    }
    for j in 1..n {
        let src = &gext[at(0, j as isize)..at(0, j as isize) + m];
        grad.nodal[j * m..(j + 1) * m].copy_from_slice(src);
    }
    for i in 0..m {
        if !field.is_dirichlet(i) {
            grad.nodal[m + i] += gext[at(i as isize, 0)];
        }
    }
    grad.ddelta = ddelta.value();
}

/// Bending and strain sums (scaled by `ηζ`) over nodes selected by `keep`.
fn node_sums(g: &StripGrid, ext: Extended<'_>, keep: impl Fn(usize, usize) -> bool) -> (f64, f64) {
    let (ie, iz) = (1.0 / g.eta(), 1.0 / g.zeta());
    let mut bending = CompensatedSum::default();
    let mut strain = CompensatedSum::default();
    for j in 0..=g.n() {
        let mut rb = CompensatedSum::default();
        let mut rs = CompensatedSum::default();
        for i in 0..g.m() {
            if !keep(i, j) {
                continue;
            }
            let (ii, jj) = (i as isize, j as isize);
            let c = ext.at(ii, jj);
            let dxp = (ext.at(ii + 1, jj) - c) * ie;
            let dxm = (c - ext.at(ii - 1, jj)) * ie;
            let dyp = (ext.at(ii, jj + 1) - c) * iz;
            let dym = (c - ext.at(ii, jj - 1)) * iz;
            let lap = (dxp - dxm) * ie + (dyp - dym) * iz;
            let st = 0.5 * (dxp * dxp + dxm * dxm + dyp * dyp + dym * dym) - 1.0;
            rb.add(lap * lap);
            rs.add(st * st);
        }
        bending.add(rb.value());
        strain.add(rs.value());
    }
    let cell = g.eta() * g.zeta();
    (cell * bending.value(), cell * strain.value())
}

pub fn energy(field: &PhaseField) -> Result<EnergyBreakdown> {
    field.check_finite()?;
    Ok(Evaluator::new().energy(field))
}

pub fn gradient(field: &PhaseField) -> Result<EnergyGradient> {
    field.check_finite()?;
    let mut grad = EnergyGradient::zeros(field.grid());
    Evaluator::new().energy_and_gradient(field, &mut grad);
    Ok(grad)
}

/// Energy restricted to nodes with `x_lo ≤ x_i ≤ x_hi` and `y_lo ≤ y_j ≤ y_hi`.
pub fn energy_in_box(field: &PhaseField, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<EnergyBreakdown> {
    field.check_finite()?;
    let g = *field.grid();
    let mut buf = Vec::new();
    field.fill_extended(&mut buf);
    let ext = Extended::new(&buf, &g);
    // Node coordinates are compared with a relative slack so that box edges
    // placed on grid lines include those lines.
    let slack = 1e-12 * (g.period() + g.height());
    let (bending, strain) = node_sums(&g, ext, |i, j| {
        let x = g.x(i as isize);
        let y = g.y(j as isize);
        x >= x_lo - slack && x <= x_hi + slack && y >= y_lo - slack && y <= y_hi + slack
    });
    Ok(EnergyBreakdown::new(bending, strain))
}

/// Second derivatives `(θ_xx, θ_xy, θ_yy)` by centered differences at a
/// stored node of an extended array.
#[inline]
pub(crate) fn hessian_at(g: &StripGrid, ext: Extended<'_>, i: isize, j: isize) -> (f64, f64, f64) {
    let (eta, zeta) = (g.eta(), g.zeta());
    let c = ext.at(i, j);
    let xx = (ext.at(i + 1, j) - 2.0 * c + ext.at(i - 1, j)) / (eta * eta);
    let yy = (ext.at(i, j + 1) - 2.0 * c + ext.at(i, j - 1)) / (zeta * zeta);
    let xy = (ext.at(i + 1, j + 1) - ext.at(i + 1, j - 1) - ext.at(i - 1, j + 1) + ext.at(i - 1, j - 1))
        / (4.0 * eta * zeta);
    (xx, xy, yy)
}

/// Centered gradient `(θ_x, θ_y)` at a stored node.
#[inline]
pub(crate) fn gradient_at(g: &StripGrid, ext: Extended<'_>, i: isize, j: isize) -> (f64, f64) {
    (
        (ext.at(i + 1, j) - ext.at(i - 1, j)) / (2.0 * g.eta()),
        (ext.at(i, j + 1) - ext.at(i, j - 1)) / (2.0 * g.zeta()),
    )
}

/// Trapezoid weight in y for row `j`.
#[inline]
pub(crate) fn row_weight(g: &StripGrid, j: usize) -> f64 {
    if j == 0 || j == g.n() {
        0.5
    } else {
        1.0
    }
}

/// `|∬(Δθ)² − ∬|∇∇θ|² − 2∮θ_x dθ_y|` with centered stencils.
///
/// The boundary integral runs counter-clockwise; the two sides cancel by
/// shift-periodicity, leaving `∫_bottom θ_x θ_xy dx − ∫_top θ_x θ_xy dx`.
pub fn boundary_identity_residual(field: &PhaseField) -> Result<f64> {
    field.check_finite()?;
    let g = *field.grid();
    let mut buf = Vec::new();
    field.fill_extended(&mut buf);
    let ext = Extended::new(&buf, &g);
    let cell = g.eta() * g.zeta();
    let mut lap2 = CompensatedSum::default();
    let mut hess2 = CompensatedSum::default();
    for j in 0..=g.n() {
        let wj = row_weight(&g, j) * cell;
        for i in 0..g.m() {
            let (xx, xy, yy) = hessian_at(&g, ext, i as isize, j as isize);
            lap2.add(wj * (xx + yy) * (xx + yy));
            hess2.add(wj * (xx * xx + 2.0 * xy * xy + yy * yy));
        }
    }
    let mut contour = CompensatedSum::default();
    for (j, sign) in [(0usize, 1.0), (g.n(), -1.0)] {
        for i in 0..g.m() {
            let (px, _) = gradient_at(&g, ext, i as isize, j as isize);
            let (_, xy, _) = hessian_at(&g, ext, i as isize, j as isize);
            contour.add(sign * g.eta() * px * xy);
        }
    }
    Ok((lap2.value() - hess2.value() - 2.0 * contour.value()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryConfig, GhostMode};

    fn roll(eps: f64, k: usize, delta: f64) -> PhaseField {
        let g = StripGrid::new(eps, 12.0, 24, 20).unwrap();
        let s = g.slope();
        PhaseField::from_fn(g, BoundaryConfig::new(k, delta), |x, y| eps * x + s * y + delta).unwrap()
    }

    #[test]
    fn roll_is_stationary_away_from_the_bottom() {
        // The roll is not reflection symmetric about y = 0, so only rows
        // whose stencils avoid the bottom ghost row see zero energy.
        let f = roll(0.6, 0, 0.7);
        let g = *f.grid();
        let e = energy_in_box(&f, 0.0, g.period(), g.zeta(), g.height()).unwrap();
        assert!(e.total < 1e-20, "{e:?}");
        assert!(energy(&f).unwrap().bending > 1.0);
        let gr = gradient(&f).unwrap();
        for j in 3..=g.n() {
            for i in 0..g.m() {
                assert!(
                    gr.nodal[j * g.m() + i].abs() < 1e-10,
                    "({i}, {j}) {}",
                    gr.nodal[j * g.m() + i]
                );
            }
        }
    }

    #[test]
    fn zero_field_with_zero_ghosts() {
        let g = StripGrid::new(0.7, 9.0, 16, 12).unwrap();
        let f = PhaseField::zeros(g, BoundaryConfig::new(0, 0.0))
            .unwrap()
            .with_ghosts(GhostMode::Zero);
        let e = energy(&f).unwrap();
        let expect = g.eta() * g.zeta() * (16 * 13) as f64;
        assert!((e.strain - expect).abs() < 1e-12 * expect);
        assert_eq!(e.bending, 0.0);
    }

    #[test]
    fn nonfinite_rejected() {
        let mut f = roll(0.5, 0, 0.0);
        f.set(3, 4, f64::NAN);
        assert!(energy(&f).is_err());
        assert!(gradient(&f).is_err());
    }

    #[test]
    fn box_restriction() {
        let g = StripGrid::new(0.5, 10.0, 16, 16).unwrap();
        let mut f = PhaseField::from_fn(g, BoundaryConfig::new(5, 0.0), |x, y| 0.5 * x + (y * 0.7).sin()).unwrap();
        f.project_onto_bcs();
        let full = energy(&f).unwrap();
        let b = energy_in_box(&f, 0.0, g.period(), 0.0, g.height()).unwrap();
        assert!((full.total - b.total).abs() < 1e-12 * full.total);
        let empty = energy_in_box(&f, 3.0, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(empty.total, 0.0);
        let r = roll(0.5, 0, 0.0);
        assert!(energy_in_box(&r, 1.0, 3.0, 2.0, 5.0).unwrap().total < 1e-20);
    }

    #[test]
    fn roll_boundary_identity() {
        let f = roll(0.4, 0, 0.0);
        assert!(boundary_identity_residual(&f).unwrap() < 1e-10);
    }
}
