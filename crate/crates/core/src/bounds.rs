//! Subordinate vector fields `Σ(p, q)` and the lower-bound certificates they
//! give on computed minimizers.
//!
//! A field is subordinate to the energy when
//! `|Σ₁,p| + |Σ₁,q + Σ₂,p| + |Σ₂,q| ≤ C |1 − p² − q²|`. Then
//! `|∇·Σ(∇θ)| ≤ C |1 − |∇θ|²| |∇∇θ|` pointwise, and
//! `F ≥ C⁻¹ |∬ ∇·Σ(∇θ)|`, while the integral itself reduces to boundary
//! data:
//!
//! ```text
//! ∬ ∇·Σ(∇θ) = Σ₂(ε, √(1−ε²)) ℓ − ∫_0^{aℓ} Σ₂(0, θ_y(x,0)) dx − ∫_{aℓ}^{ℓ} Σ₂(θ_x(x,0), 0) dx.
//! ```
//!
//! Two fields are provided. [`SqueezeField`] penalizes short Neumann
//! segments (`b = (1−a)/ε` small); [`ExtendField`] penalizes long ones.

use std::f64::consts::PI;

use crate::energy::{energy, gradient_at, hessian_at, row_weight};
use crate::error::{invalid, RcnError, Result};
use crate::grid::{Extended, PhaseField};
use crate::quad::{adaptive_simpson, cumulative_integral, CompensatedSum, HermiteTable};

const QUAD_TOL: f64 = 1e-13;

/// `exp[½ − 1/((2−p)(p+1)) − p/4]` on `(−1, 2)`, zero elsewhere.
pub fn phi_bump(p: f64) -> f64 {
    phi_bump_derivs(p).0
}

/// `(φ, φ′, φ″)` at `p`.
pub fn phi_bump_derivs(p: f64) -> (f64, f64, f64) {
    let d = (2.0 - p) * (p + 1.0);
    if !(d > 0.0) || p <= -1.0 || p >= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (0.5 - 1.0 / d - p / 4.0).exp();
    if f == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let dp = 1.0 - 2.0 * p;
    let h1 = dp / (d * d) - 0.25;
    let h2 = (-2.0 * d - 2.0 * dp * dp) / (d * d * d);
    (f, h1 * f, (h2 + h1 * h1) * f)
}

/// `sup_z |3φ′(z) + 2zφ″(z)|`, the Lipschitz constant of `φ(z) + 2zφ′(z)`.
pub fn squeeze_lipschitz() -> f64 {
    let n = 300_000;
    (0..=n)
        .map(|k| {
            let z = -1.0 + 3.0 * k as f64 / n as f64;
            let (_, d1, d2) = phi_bump_derivs(z);
            (3.0 * d1 + 2.0 * z * d2).abs()
        })
        .fold(0.0, f64::max)
}

/// `sup_{0 < z ≤ 1} (1 − φ(z))/z`.
pub fn phi_lipschitz_at_zero() -> f64 {
    let n = 100_000;
    (1..=n)
        .map(|k| {
            let z = k as f64 / n as f64;
            (1.0 - phi_bump(z)) / z
        })
        .fold(0.0, f64::max)
}

/// Partial derivatives `[Σ₁,p, Σ₁,q, Σ₂,p, Σ₂,q]`.
pub type Partials = [f64; 4];

pub trait SubordinateField: Sync {
    fn eval(&self, p: f64, q: f64) -> (f64, f64);

    /// Analytic partial derivatives.
    fn partials(&self, p: f64, q: f64) -> Partials;

    /// `Σ` is locally constant outside the square `[−R, R]²`.
    fn support(&self) -> f64;

    fn name(&self) -> &'static str;
}

/// Partial derivatives by centered differences of [`SubordinateField::eval`].
pub fn fd_partials(field: &dyn SubordinateField, p: f64, q: f64, h: f64) -> Partials {
    let (a1, a2) = field.eval(p + h, q);
    let (b1, b2) = field.eval(p - h, q);
    let (c1, c2) = field.eval(p, q + h);
    let (d1, d2) = field.eval(p, q - h);
    let s = 0.5 / h;
    [(a1 - b1) * s, (c1 - d1) * s, (a2 - b2) * s, (c2 - d2) * s]
}

/// `Σ₂ = pφ(b²p²)`, `Σ₁ = −∫_0^q g(b²(1−η²)) dη` with `g(z) = φ(z) + 2zφ′(z)`.
#[derive(Debug, Clone)]
pub struct SqueezeField {
    b: f64,
    q_lo: f64,
    table: Option<HermiteTable>,
}

fn squeeze_g(z: f64) -> f64 {
    let (f, d1, _) = phi_bump_derivs(z);
    f + 2.0 * z * d1
}

impl SqueezeField {
    pub fn new(b: f64) -> Result<Self> {
        if !(b >= 0.0 && b.is_finite()) {
            return invalid(format!("squeeze field needs b ≥ 0, got {b}"));
        }
        if b == 0.0 {
            // g(0) = 1, so Σ = (−q, p).
            return Ok(Self {
                b,
                q_lo: 0.0,
                table: None,
            });
        }
        let b2 = b * b;
        // The integrand vanishes unless −1 < b²(1−η²) < 2.
        let q_lo = (1.0 - 2.0 / b2).max(0.0).sqrt();
        let q_hi = (1.0 + 1.0 / b2).sqrt();
        let step = (1e-3f64).min(1e-2 / b2);
        let count = (((q_hi - q_lo) / step).ceil() as usize).max(2) + 1;
        let integrand = |eta: f64| -squeeze_g(b2 * (1.0 - eta * eta));
        let values = cumulative_integral(integrand, q_lo, q_hi, count, QUAD_TOL)?;
        let h = (q_hi - q_lo) / (count - 1) as f64;
        let d1 = (0..count).map(|k| integrand(q_lo + k as f64 * h)).collect();
        Ok(Self {
            b,
            q_lo,
            table: Some(HermiteTable::cubic(q_lo, q_hi, values, d1)),
        })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    fn sigma1(&self, q: f64) -> f64 {
        match &self.table {
            None => -q,
            Some(t) => {
                let a = q.abs();
                let v = if a <= self.q_lo { 0.0 } else { t.eval(a) };
                if q < 0.0 {
                    -v
                } else {
                    v
                }
            }
        }
    }
}

impl SubordinateField for SqueezeField {
    fn eval(&self, p: f64, q: f64) -> (f64, f64) {
        (self.sigma1(q), p * phi_bump(self.b * self.b * p * p))
    }

    fn partials(&self, p: f64, q: f64) -> Partials {
        let b2 = self.b * self.b;
        [0.0, -squeeze_g(b2 * (1.0 - q * q)), squeeze_g(b2 * p * p), 0.0]
    }

    fn support(&self) -> f64 {
        if self.b == 0.0 {
            return f64::INFINITY;
        }
        let b2 = self.b * self.b;
        (2.0 / b2).sqrt().max((1.0 + 1.0 / b2).sqrt())
    }

    fn name(&self) -> &'static str {
        "squeeze"
    }
}

/// `Σ = (−V_p, V_q)` for the potential
///
/// ```text
/// V = φ(p²)[σ(q²) − p²ζ(q²)] − ∫_0^p (p−ξ){σ(1−ξ²) ∂²_ξ φ(ξ²) − ζ(1−ξ²) ∂²_ξ(ξ²φ(ξ²))} dξ
/// ```
///
/// with `ζ(q²) = ∫_0^q (q−η)ψ(η²)dη`, `σ(q²) = ∫_0^q (q−η)(1−η²)ψ(η²)dη`,
/// and `ψ(x) = φ(x/s²)` scaled so that `∫_0^∞ (1−ξ²)ψ(ξ²)dξ = 0`.
#[derive(Debug, Clone)]
pub struct ExtendField {
    scale: f64,
    a0: f64,
    a1: f64,
    /// `∫_0^q ψ(t²)dt` and `∫_0^q (1−t²)ψ(t²)dt`.
    z1: HermiteTable,
    s1: HermiteTable,
    /// `ζ(q²)` and `σ(q²)` as functions of `q ≥ 0`.
    zeta: HermiteTable,
    sigma: HermiteTable,
    /// C² extensions of `ζ`, `σ` to arguments in `[−1, 0]`.
    zeta_neg: HermiteTable,
    sigma_neg: HermiteTable,
    /// `J(p) = ∫_0^p h`, `p ∈ [0, √2]`.
    j: HermiteTable,
    m: f64,
}

impl ExtendField {
    pub fn new() -> Result<Self> {
        let step = 1e-3;
        let (a0, a1) = psi_moments()?;
        let scale = (a0 / a1).sqrt();
        let psi = |x: f64| phi_bump(x / (scale * scale));
        let dpsi = |x: f64| phi_bump_derivs(x / (scale * scale)).1 / (scale * scale);
        let q_max = (2.0f64).sqrt() * scale;
        let count = (q_max / step).ceil() as usize + 1;
        let h = q_max / (count - 1) as f64;
        let qs: Vec<f64> = (0..count).map(|k| k as f64 * h).collect();

        let z1_vals = cumulative_integral(|t| psi(t * t), 0.0, q_max, count, QUAD_TOL)?;
        let s1_vals = cumulative_integral(|t| (1.0 - t * t) * psi(t * t), 0.0, q_max, count, QUAD_TOL)?;
        let tz = cumulative_integral(|t| t * psi(t * t), 0.0, q_max, count, QUAD_TOL)?;
        let ts = cumulative_integral(|t| t * (1.0 - t * t) * psi(t * t), 0.0, q_max, count, QUAD_TOL)?;

        let p0: Vec<f64> = qs.iter().map(|&q| psi(q * q)).collect();
        let p1: Vec<f64> = qs.iter().map(|&q| (1.0 - q * q) * psi(q * q)).collect();
        let dp0: Vec<f64> = qs.iter().map(|&q| 2.0 * q * dpsi(q * q)).collect();
        let dp1: Vec<f64> = qs
            .iter()
            .map(|&q| -2.0 * q * psi(q * q) + (1.0 - q * q) * 2.0 * q * dpsi(q * q))
            .collect();
        // ∫_0^q (q−t)f(t)dt = q∫_0^q f − ∫_0^q t f.
        let zeta_vals: Vec<f64> = (0..count).map(|k| qs[k] * z1_vals[k] - tz[k]).collect();
        let sigma_vals: Vec<f64> = (0..count).map(|k| qs[k] * s1_vals[k] - ts[k]).collect();

        let z1 = HermiteTable::quintic(0.0, q_max, z1_vals.clone(), p0.clone(), dp0);
        let s1 = HermiteTable::quintic(0.0, q_max, s1_vals.clone(), p1.clone(), dp1);
        let zeta = HermiteTable::quintic(0.0, q_max, zeta_vals, z1_vals, p0);
        let sigma = HermiteTable::quintic(0.0, q_max, sigma_vals, s1_vals, p1);

        // ζ(Q) = Q/2 + ψ′(0)Q²/12 + …, σ(Q) = Q/2 + (ψ′(0) − 1)Q²/12 + …
        let d0 = dpsi(0.0);
        let zeta_neg = HermiteTable::quintic(-1.0, 0.0, vec![0.0, 0.0], vec![0.0, 0.5], vec![0.0, d0 / 6.0]);
        let sigma_neg = HermiteTable::quintic(-1.0, 0.0, vec![0.0, 0.0], vec![0.0, 0.5], vec![0.0, (d0 - 1.0) / 6.0]);

        let mut field = Self {
            scale,
            a0,
            a1,
            z1,
            s1,
            zeta,
            sigma,
            zeta_neg,
            sigma_neg,
            j: HermiteTable::cubic(0.0, 1.0, vec![0.0, 0.0], vec![0.0, 0.0]),
            m: 0.0,
        };
        let p_max = (2.0f64).sqrt();
        let count = (p_max / step).ceil() as usize + 1;
        let hp = p_max / (count - 1) as f64;
        let j_vals = cumulative_integral(|x| field.h(x), 0.0, p_max, count, QUAD_TOL)?;
        let j_d1 = (0..count).map(|k| field.h(k as f64 * hp)).collect();
        field.j = HermiteTable::cubic(0.0, p_max, j_vals, j_d1);
        field.m = adaptive_simpson(|t| (1.0 - t * t) * psi(t * t), 0.0, 1.0, QUAD_TOL)?;
        Ok(field)
    }

    /// Width `s` in `ψ(x) = φ(x/s²)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `(A₀, A₁) = (∫ φ(t²)dt, ∫ t²φ(t²)dt)` over `[0, √2]`.
    pub fn moments(&self) -> (f64, f64) {
        (self.a0, self.a1)
    }

    pub fn psi(&self, x: f64) -> f64 {
        phi_bump(x / (self.scale * self.scale))
    }

    /// `M = ∫_0^1 (1−ξ²)ψ(ξ²)dξ`, the maximum of `Σ₂(0, q)`.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// `ζ(Q)` for any real `Q`.
    pub fn zeta(&self, arg: f64) -> f64 {
        if arg >= 0.0 {
            self.zeta.eval(arg.sqrt())
        } else if arg > -1.0 {
            self.zeta_neg.eval(arg)
        } else {
            0.0
        }
    }

    /// `σ(Q)` for any real `Q`.
    pub fn sigma(&self, arg: f64) -> f64 {
        if arg >= 0.0 {
            self.sigma.eval(arg.sqrt())
        } else if arg > -1.0 {
            self.sigma_neg.eval(arg)
        } else {
            0.0
        }
    }

    fn odd(t: &HermiteTable, q: f64) -> f64 {
        let v = t.eval(q.abs());
        if q < 0.0 {
            -v
        } else {
            v
        }
    }

    /// `∂²_p φ(p²)` and `∂²_p (p²φ(p²))`.
    fn ab(p: f64) -> (f64, f64) {
        let x = p * p;
        let (f, d1, d2) = phi_bump_derivs(x);
        (2.0 * d1 + 4.0 * x * d2, 2.0 * f + 10.0 * x * d1 + 4.0 * x * x * d2)
    }

    fn h(&self, xi: f64) -> f64 {
        let (a, b) = Self::ab(xi);
        let arg = 1.0 - xi * xi;
        self.sigma(arg) * a - self.zeta(arg) * b
    }
}

fn psi_moments() -> Result<(f64, f64)> {
    let r = (2.0f64).sqrt();
    let a0 = adaptive_simpson(|s| phi_bump(s * s), 0.0, r, QUAD_TOL)?;
    let a1 = adaptive_simpson(|s| s * s * phi_bump(s * s), 0.0, r, QUAD_TOL)?;
    Ok((a0, a1))
}

impl SubordinateField for ExtendField {
    fn eval(&self, p: f64, q: f64) -> (f64, f64) {
        let x = p * p;
        let (f, d1, _) = phi_bump_derivs(x);
        let zq = self.zeta.eval(q.abs());
        let sq = self.sigma.eval(q.abs());
        let j = Self::odd(&self.j, p);
        let s1 = -2.0 * p * d1 * (sq - x * zq) + 2.0 * p * f * zq + j;
        let s2 = f * (Self::odd(&self.s1, q) - x * Self::odd(&self.z1, q));
        (s1, s2)
    }

    fn partials(&self, p: f64, q: f64) -> Partials {
        let x = p * p;
        let (f, d1, _) = phi_bump_derivs(x);
        let z1 = Self::odd(&self.z1, q);
        let s1 = Self::odd(&self.s1, q);
        let (a, b) = Self::ab(p);
        let zq = self.zeta.eval(q.abs());
        let sq = self.sigma.eval(q.abs());
        let arg = 1.0 - x;
        let s1p = -a * (sq - self.sigma(arg)) + b * (zq - self.zeta(arg));
        let s1q = -2.0 * p * d1 * (s1 - x * z1) + 2.0 * p * f * z1;
        let s2p = 2.0 * p * d1 * (s1 - x * z1) - 2.0 * p * f * z1;
        let s2q = f * (1.0 - q * q - x) * self.psi(q * q);
        [s1p, s1q, s2p, s2q]
    }

    fn support(&self) -> f64 {
        (2.0f64).sqrt().max((2.0f64).sqrt() * self.scale)
    }

    fn name(&self) -> &'static str {
        "extend"
    }
}

/// Measured subordination constant.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinationEstimate {
    pub c_sub: f64,
    pub samples: usize,
    pub half_width: f64,
    /// `(offset, max ratio)` along circles of radius `1 ± offset`.
    pub approach: Vec<(f64, f64)>,
}

const BAND: f64 = 1e-3;

fn ratio(field: &dyn SubordinateField, p: f64, q: f64) -> f64 {
    let [a, b, c, d] = field.partials(p, q);
    (a.abs() + (b + c).abs() + d.abs()) / (1.0 - p * p - q * q).abs()
}

/// `max (|Σ₁,p| + |Σ₁,q + Σ₂,p| + |Σ₂,q|)/|1 − p² − q²|` over a
/// `per_axis²` lattice on `[−R, R]²`, `R = max(3, 1.2·support)`, skipping a
/// `10⁻³` band around the unit circle, with the analytic partials that the
/// area integral uses. Circles of radius `1 ± 10^{-k}`, `k = 2..=6`, check
/// that the ratio stays bounded at the circle.
pub fn subordination_constant(field: &dyn SubordinateField, per_axis: usize) -> Result<SubordinationEstimate> {
    if per_axis < 2 {
        return invalid("need at least two samples per axis");
    }
    let half_width = (1.2 * field.support()).max(3.0);
    if !half_width.is_finite() {
        return invalid(format!("{} field has unbounded support", field.name()));
    }
    let step = 2.0 * half_width / (per_axis - 1) as f64;
    let mut c_sub = 0.0f64;
    let mut samples = 0;
    for i in 0..per_axis {
        let p = -half_width + i as f64 * step;
        for j in 0..per_axis {
            let q = -half_width + j as f64 * step;
            if (1.0 - p * p - q * q).abs() < BAND {
                continue;
            }
            let r = ratio(field, p, q);
            if !r.is_finite() {
                return Err(RcnError::BoundViolation(format!(
                    "{} field: non-finite subordination ratio at ({p}, {q})",
                    field.name()
                )));
            }
            c_sub = c_sub.max(r);
            samples += 1;
        }
    }
    let angles = 256;
    let mut approach = Vec::new();
    for k in 2..=6 {
        let off = 10f64.powi(-k);
        let mut worst = 0.0f64;
        for a in 0..angles {
            let t = 2.0 * PI * (a as f64 + 0.5) / angles as f64;
            for r in [1.0 - off, 1.0 + off] {
                worst = worst.max(ratio(field, r * t.cos(), r * t.sin()));
            }
        }
        approach.push((off, worst));
    }
    let first = approach[0].1;
    let last = approach[approach.len() - 1].1;
    if !last.is_finite() || last > 10.0 * first.max(1e-12) + 1e-9 {
        return Err(RcnError::BoundViolation(format!(
            "{} field: subordination ratio grows toward the unit circle ({first} → {last})",
            field.name()
        )));
    }
    Ok(SubordinationEstimate {
        c_sub: c_sub.max(approach.iter().map(|a| a.1).fold(0.0, f64::max)),
        samples,
        half_width,
        approach,
    })
}

/// Both sides of the integrated divergence identity on a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceIntegral {
    /// `ηζ Σ w_j ∇·Σ(∇θ)` by the chain rule on centered stencils.
    pub area: f64,
    /// Boundary-data formula.
    pub boundary: f64,
    /// `Σ₂(ε, √(1−ε²)) ℓ`.
    pub top: f64,
    /// `∫_0^{aℓ} Σ₂(0, θ_y(x, 0)) dx`.
    pub dirichlet: f64,
    /// `∫_{aℓ}^ℓ Σ₂(θ_x(x, 0), 0) dx`.
    pub neumann: f64,
    /// `∫ Σ₁(∇θ) dy` along `x = 0` and along `x = ℓ`.
    pub side_left: f64,
    pub side_right: f64,
}

pub fn divergence_integral(field: &PhaseField, sigma: &dyn SubordinateField) -> Result<DivergenceIntegral> {
    field.check_finite()?;
    let g = *field.grid();
    let (m, n) = (g.m() as isize, g.n() as isize);
    let mut buf = Vec::new();
    field.fill_extended(&mut buf);
    let ext = Extended::new(&buf, &g);
    let cell = g.eta() * g.zeta();

    let mut area = CompensatedSum::default();
    for j in 0..=n {
        let w = row_weight(&g, j as usize) * cell;
        let mut row = CompensatedSum::default();
        for i in 0..m {
            let (p, q) = gradient_at(&g, ext, i, j);
            let (xx, xy, yy) = hessian_at(&g, ext, i, j);
            let [s1p, s1q, s2p, s2q] = sigma.partials(p, q);
            row.add(s1p * xx + (s1q + s2p) * xy + s2q * yy);
        }
        area.add(w * row.value());
    }

    let top = sigma.eval(g.eps(), g.slope()).1 * g.period();
    let mut dirichlet = CompensatedSum::default();
    let mut neumann = CompensatedSum::default();
    for i in 0..m {
        if field.is_dirichlet(i as usize) {
            let qy = (-3.0 * ext.at(i, 0) + 4.0 * ext.at(i, 1) - ext.at(i, 2)) / (2.0 * g.zeta());
            dirichlet.add(g.eta() * sigma.eval(0.0, qy).1);
        } else {
            let px = (ext.at(i + 1, 0) - ext.at(i - 1, 0)) / (2.0 * g.eta());
            neumann.add(g.eta() * sigma.eval(px, 0.0).1);
        }
    }
    let mut left = CompensatedSum::default();
    let mut right = CompensatedSum::default();
    for j in 0..=n {
        let w = row_weight(&g, j as usize) * g.zeta();
        let (p0, q0) = gradient_at(&g, ext, 0, j);
        left.add(w * sigma.eval(p0, q0).0);
        // Gradient at the periodic image x = ℓ from the ghost column.
        let pr = (ext.at(1, j) + PI - ext.at(m - 1, j)) / (2.0 * g.eta());
        let qr = (ext.at(m, j + 1) - ext.at(m, j - 1)) / (2.0 * g.zeta());
        right.add(w * sigma.eval(pr, qr).0);
    }
    let (dirichlet, neumann) = (dirichlet.value(), neumann.value());
    Ok(DivergenceIntegral {
        area: area.value(),
        boundary: top - dirichlet - neumann,
        top,
        dirichlet,
        neumann,
        side_left: left.value(),
        side_right: right.value(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Squeeze,
    Extend,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Squeeze => "squeeze",
            Variant::Extend => "extend",
        }
    }
}

/// Lower-bound certificate for one field and one subordinate field.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub variant: Variant,
    pub eps: f64,
    pub a: f64,
    /// Measured energy `F`.
    pub lhs: f64,
    /// `|∬∇·Σ(∇θ)| / C_sub`.
    pub rhs: f64,
    pub c_sub: f64,
    pub integral: DivergenceIntegral,
    /// Closed-form lemma bound with measured constants.
    pub lemma_bound: f64,
    /// `F ≥ rhs` with 1% slack.
    pub pass: bool,
    /// `|area − boundary|` relative to `max(|boundary|, |top|)`.
    pub consistency: f64,
}

/// Relative slack on `F ≥ C_sub⁻¹|∬∇·Σ|`.
pub const CERTIFICATE_SLACK: f64 = 0.01;

/// Constants shared by every certificate: the extend field, its
/// subordination constant, and the constant `K` in
/// `Σ₂(ε, √(1−ε²)) ≥ M − Kε²`.
pub struct Certifier {
    pub extend: ExtendField,
    pub extend_c_sub: f64,
    pub k_extend: f64,
    pub per_axis: usize,
}

impl Certifier {
    pub fn new(per_axis: usize) -> Result<Self> {
        let extend = ExtendField::new()?;
        let est = subordination_constant(&extend, per_axis)?;
        let m = extend.m();
        let k_extend = (1..=1000)
            .map(|k| {
                let e = k as f64 / 1000.0;
                let s2 = extend.eval(e, (1.0 - e * e).sqrt()).1;
                (m - s2) / (e * e)
            })
            .fold(0.0, f64::max);
        Ok(Self {
            extend,
            extend_c_sub: est.c_sub,
            k_extend,
            per_axis,
        })
    }

    pub fn certify(&self, field: &PhaseField, variant: Variant) -> Result<BoundsReport> {
        let g = field.grid();
        let eps = g.eps();
        let a = field.config().fraction(g);
        let lhs = energy(field)?.total;
        let (integral, c_sub, lemma_bound) = match variant {
            Variant::Squeeze => {
                let b = (1.0 - a) / eps;
                let sq = SqueezeField::new(b)?;
                let integral = divergence_integral(field, &sq)?;
                if b == 0.0 {
                    (integral, f64::INFINITY, 0.0)
                } else {
                    let c = subordination_constant(&sq, self.per_axis)?.c_sub;
                    let c1 = phi_lipschitz_at_zero();
                    let lemma = PI / c * (1.0 - c1 * (1.0 - a).powi(2) - phi_bump(1.0));
                    (integral, c, lemma)
                }
            }
            Variant::Extend => {
                let integral = divergence_integral(field, &self.extend)?;
                let c = self.extend_c_sub;
                let lemma = PI / (c * eps) * (self.extend.m() * (1.0 - a) - self.k_extend * eps * eps);
                (integral, c, lemma)
            }
        };
        let rhs = integral.area.abs() / c_sub;
        let scale = integral.boundary.abs().max(integral.top.abs());
        let consistency = if scale > 0.0 {
            (integral.area - integral.boundary).abs() / scale
        } else {
            (integral.area - integral.boundary).abs()
        };
        Ok(BoundsReport {
            variant,
            eps,
            a,
            lhs,
            rhs,
            c_sub,
            integral,
            lemma_bound,
            pass: lhs * (1.0 + CERTIFICATE_SLACK) >= rhs,
            consistency,
        })
    }

    /// Certifies with both variants; a violated inequality is an error.
    pub fn certify_lower_bound(&self, field: &PhaseField) -> Result<[BoundsReport; 2]> {
        let s = self.certify(field, Variant::Squeeze)?;
        let e = self.certify(field, Variant::Extend)?;
        for r in [&s, &e] {
            if !r.pass {
                return Err(RcnError::BoundViolation(format!(
                    "{} variant: F = {} < |∬∇·Σ|/C = {}",
                    r.variant.name(),
                    r.lhs,
                    r.rhs
                )));
            }
        }
        Ok([s, e])
    }

    /// `(e₁, e₂)` in `F ≥ e₁/b² − K₁ε²` and `F ≥ e₂ b − K₂ε`, `b = (1−a)/ε`.
    pub fn lemma_constants(&self) -> (f64, f64) {
        let e1 = PI * (1.0 - phi_bump(1.0)) / squeeze_lipschitz();
        let e2 = PI * self.extend.m() / self.extend_c_sub;
        (e1, e2)
    }

    /// Band `√(e₁/(2E₀)) < (1−a)/ε < 2E₀/e₂` implied by an energy bound `E₀`.
    pub fn scaling_band(&self, e0: f64) -> (f64, f64) {
        let (e1, e2) = self.lemma_constants();
        ((e1 / (2.0 * e0)).sqrt(), 2.0 * e0 / e2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert!((phi_bump(0.0) - 1.0).abs() < 1e-15);
        assert!((phi_bump(1.0) - (-0.25f64).exp()).abs() < 1e-15);
        assert_eq!(phi_bump(-1.0), 0.0);
        assert_eq!(phi_bump(2.5), 0.0);
        let h = 1e-5;
        for &p in &[-0.7, -0.2, 0.3, 1.1, 1.8] {
            let (_, d1, d2) = phi_bump_derivs(p);
            let fd1 = (phi_bump(p + h) - phi_bump(p - h)) / (2.0 * h);
            let fd2 = (phi_bump(p + h) - 2.0 * phi_bump(p) + phi_bump(p - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-8, "{p}");
            assert!((d2 - fd2).abs() < 1e-4, "{p}");
        }
    }

    #[test]
    fn f_has_maximum_at_one() {
        let f = |p: f64| p * phi_bump(p * p);
        let h = 1e-4;
        assert!(((f(1.0 + h) - f(1.0 - h)) / (2.0 * h)).abs() < 1e-7);
        assert!((f(1.0 + h) - 2.0 * f(1.0) + f(1.0 - h)) / (h * h) < 0.0);
        for k in 1..140 {
            let p = k as f64 * 0.01;
            assert!(f(p) <= f(1.0) + 1e-15);
        }
    }

    #[test]
    fn squeeze_structure() {
        let sq = SqueezeField::new(2.0).unwrap();
        assert_eq!(sq.eval(0.0, 0.8).1, 0.0);
        assert_eq!(sq.eval(0.4, 0.0).0, 0.0);
        let best = (1..4000)
            .map(|k| k as f64 * 1e-3)
            .max_by(|x, y| sq.eval(*x, 0.0).1.total_cmp(&sq.eval(*y, 0.0).1))
            .unwrap();
        assert!((best - 0.5).abs() < 2e-3);
        assert!((sq.eval(0.5, 0.0).1 - phi_bump(1.0) / 2.0).abs() < 1e-15);
        // Odd in q, constant past the support.
        let (a, _) = sq.eval(0.0, 0.9);
        let (b, _) = sq.eval(0.0, -0.9);
        assert_eq!(a, -b);
        assert_eq!(sq.eval(0.0, 1.5).0, sq.eval(0.0, 2.5).0);
    }

    #[test]
    fn squeeze_table_matches_quadrature() {
        let b: f64 = 1.7;
        let sq = SqueezeField::new(b).unwrap();
        for &q in &[0.3, 0.75, 0.95, 1.1] {
            let exact = -adaptive_simpson(|t| squeeze_g(b * b * (1.0 - t * t)), 0.0, q, 1e-13).unwrap();
            assert!((sq.eval(0.0, q).0 - exact).abs() < 1e-10, "{q}");
        }
    }

    #[test]
    fn psi_normalization() {
        let ex = ExtendField::new().unwrap();
        let (a0, a1) = ex.moments();
        assert!(a0 > 0.0 && a1 > 0.0);
        assert!((ex.psi(0.0) - 1.0).abs() < 1e-15);
        let r = (2.0f64).sqrt() * ex.scale();
        let total = adaptive_simpson(|t| (1.0 - t * t) * ex.psi(t * t), 0.0, r, 1e-13).unwrap();
        assert!(total.abs() < 1e-9);
    }

    #[test]
    fn zeta_sigma_properties() {
        let ex = ExtendField::new().unwrap();
        assert_eq!(ex.zeta(0.0), 0.0);
        assert_eq!(ex.sigma(0.0), 0.0);
        assert_eq!(ex.zeta(-1.5), 0.0);
        assert_eq!(ex.sigma(-1.0), 0.0);
        let h = 1e-4;
        for &q in &[0.2, 0.7, 1.0, 1.6] {
            let z = |q: f64| ex.zeta(q * q);
            let d2 = (z(q + h) - 2.0 * z(q) + z(q - h)) / (h * h);
            assert!((d2 - ex.psi(q * q)).abs() < 1e-6, "{q}");
            let s = |q: f64| ex.sigma(q * q);
            let d2 = (s(q + h) - 2.0 * s(q) + s(q - h)) / (h * h);
            assert!((d2 - (1.0 - q * q) * ex.psi(q * q)).abs() < 1e-6, "{q}");
        }
        // C² across zero.
        for f in [
            |e: &ExtendField, x: f64| e.zeta(x),
            |e: &ExtendField, x: f64| e.sigma(x),
        ] {
            let h = 1e-3;
            let left = (f(&ex, 0.0) - f(&ex, -h)) / h;
            let right = (f(&ex, h) - f(&ex, 0.0)) / h;
            assert!((left - right).abs() < 1e-2);
        }
    }

    #[test]
    fn extend_observations() {
        let ex = ExtendField::new().unwrap();
        for &p in &[-1.0, 0.0, 0.4, 2.0] {
            assert_eq!(ex.eval(p, 0.0).1, 0.0);
        }
        let m = ex.m();
        assert!(m > 0.0);
        assert!((ex.eval(0.0, 1.0).1 - m).abs() < 1e-10);
        for k in 0..400 {
            let q = k as f64 * 0.01;
            assert!(ex.eval(0.0, q).1 <= m + 1e-12);
        }
        assert!(ex.eval(0.0, 5.0).1.abs() < 1e-9);
    }

    #[test]
    fn analytic_partials_match_differences() {
        let ex = ExtendField::new().unwrap();
        let sq = SqueezeField::new(1.3).unwrap();
        for field in [&ex as &dyn SubordinateField, &sq] {
            for &(p, q) in &[(0.3, 0.4), (0.9, -0.2), (-0.5, 1.1), (1.2, 0.7), (0.1, 1.9)] {
                let a = field.partials(p, q);
                let f = fd_partials(field, p, q, 1e-6);
                for k in 0..4 {
                    assert!(
                        (a[k] - f[k]).abs() < 1e-6,
                        "{} {k} at ({p},{q}): {} vs {}",
                        field.name(),
                        a[k],
                        f[k]
                    );
                }
            }
        }
    }

    #[test]
    fn squeeze_constant_below_lipschitz_bound() {
        let b = 1.5;
        let sq = SqueezeField::new(b).unwrap();
        let est = subordination_constant(&sq, 201).unwrap();
        assert!(est.c_sub <= b * b * squeeze_lipschitz() * 1.001);
        assert!(est.c_sub > 0.0);
    }
}
