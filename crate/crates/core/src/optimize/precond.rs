//! Preconditioner for the free coordinates: the inverse of
//! `2ηζ (S² − 4S + I)` with `S` the five-point Laplacian on rows `1..n`
//! (zero outside), diagonalized by an FFT along the periodic direction and
//! solved by a banded Cholesky factorization in `y` for each mode. The
//! phase shift gets a diagonal entry.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::StripGrid;

/// Cholesky factor of a symmetric pentadiagonal matrix.
#[derive(Debug, Clone)]
struct Banded {
    l0: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl Banded {
    /// `a0` diagonal, `a1[i] = A[i][i−1]`, `a2[i] = A[i][i−2]`.
    fn factor(a0: &[f64], a1: &[f64], a2: &[f64]) -> Self {
        let n = a0.len();
        let (mut l0, mut l1, mut l2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            if i >= 2 {
                l2[i] = a2[i] / l0[i - 2];
            }
            if i >= 1 {
                let prev = if i >= 2 { l2[i] * l1[i - 1] } else { 0.0 };
                l1[i] = (a1[i] - prev) / l0[i - 1];
            }
            l0[i] = (a0[i] - l1[i] * l1[i] - l2[i] * l2[i]).sqrt();
        }
        Self { l0, l1, l2 }
    }

    fn solve(&self, b: &mut [Complex64]) {
        let n = b.len();
        for i in 0..n {
            let mut v = b[i];
            if i >= 1 {
                v -= b[i - 1] * self.l1[i];
            }
            if i >= 2 {
                v -= b[i - 2] * self.l2[i];
            }
            b[i] = v / self.l0[i];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= b[i + 1] * self.l1[i + 1];
            }
            if i + 2 < n {
                v -= b[i + 2] * self.l2[i + 2];
            }
            b[i] = v / self.l0[i];
        }
    }
}

pub struct Preconditioner {
    m: usize,
    rows: usize,
    modes: Vec<Banded>,
    delta_scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    column: Vec<Complex64>,
}

impl Preconditioner {
    pub fn new(grid: &StripGrid) -> Self {
        let (m, n) = (grid.m(), grid.n());
        let (eta, zeta) = (grid.eta(), grid.zeta());
        let rows = n - 1;
        let weight = 2.0 * eta * zeta;
        let c = 1.0 / (zeta * zeta);
        let modes = (0..m)
            .map(|k| {
                let lambda = (2.0 - 2.0 * (2.0 * PI * k as f64 / m as f64).cos()) / (eta * eta);
                let d = -2.0 * c - lambda;
                let a0: Vec<f64> = (0..rows)
                    .map(|i| {
                        let neighbours = if rows == 1 {
                            0.0
                        } else if i == 0 || i + 1 == rows {
                            1.0
                        } else {
                            2.0
                        };
                        weight * (d * d + neighbours * c * c - 4.0 * d + 1.0)
                    })
                    .collect();
                let a1 = vec![weight * (2.0 * c * d - 4.0 * c); rows];
                let a2 = vec![weight * c * c; rows];
                Banded::factor(&a0, &a1, &a2)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            m,
            rows,
            modes,
            delta_scale: 1.0 / (4.0 * m as f64 * eta * zeta * c * c),
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            buf: vec![Complex64::default(); m * rows],
            column: vec![Complex64::default(); rows],
        }
    }

    /// `out = P g` in the layout of [`crate::grid::PhaseField::pack`].
    pub fn apply(&mut self, g: &[f64], out: &mut [f64]) {
        let (m, rows) = (self.m, self.rows);
        for (b, &v) in self.buf.iter_mut().zip(g) {
            *b = Complex64::new(v, 0.0);
        }
        for row in self.buf.chunks_exact_mut(m) {
            self.forward.process(row);
        }
        for (k, mode) in self.modes.iter().enumerate() {
            for j in 0..rows {
                self.column[j] = self.buf[j * m + k];
            }
            mode.solve(&mut self.column);
            for j in 0..rows {
                self.buf[j * m + k] = self.column[j];
            }
        }
        for row in self.buf.chunks_exact_mut(m) {
            self.inverse.process(row);
        }
        let scale = 1.0 / m as f64;
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.re * scale;
        }
        out[m * rows] = g[m * rows] * self.delta_scale;
    }
}
