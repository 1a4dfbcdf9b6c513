//! Self-dual constructions: the knee solution, the Jacobi theta series, and
//! the zipper test function built from the Dirichlet problem `Δu = u` on
//! the shift-periodic strip.
//!
//! Writing `u = e^{-εx} w` with `w` ℓ-periodic, each Fourier mode
//! `ŵ(n) e^{2πinx/ℓ}` of the boundary trace decays in y like
//! `e^{-λ_n y}`, `λ_n = √(1 + ε²(2n + i)²)` (principal branch). The test
//! function is `θ = εx − log w̃`, where `w̃` replaces `w` near the Neumann
//! segment by `w(x, 0) cosh y` so that `θ_y(x, 0) = 0` there.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::energy::{energy, EnergyBreakdown};
use crate::error::{invalid, RcnError, Result};
use crate::grid::{BoundaryConfig, PhaseField, StripGrid};

/// `εx + log cosh(√(1-ε²) y)`.
pub fn knee(x: f64, y: f64, eps: f64) -> f64 {
    let s = (1.0 - eps * eps).max(0.0).sqrt();
    eps * x + log_cosh(s * y)
}

/// Overflow-free `log cosh z`.
pub fn log_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Knee solution sampled on `grid` with `k = 0` and the phase shift that
/// puts its top row exactly on the roll pattern.
pub fn sampled_knee(grid: StripGrid) -> Result<PhaseField> {
    let s = grid.slope();
    let delta = log_cosh(s * grid.height()) - s * grid.height();
    let mut f = PhaseField::from_fn(grid, BoundaryConfig::new(0, delta), |x, y| knee(x, y, grid.eps()))?;
    f.project_onto_bcs();
    Ok(f)
}

/// `Δθ − (1 − |∇θ|²)` at every stored node with centered stencils.
pub fn selfdual_residual(field: &PhaseField) -> Vec<f64> {
    use crate::energy::{gradient_at, hessian_at};
    use crate::grid::Extended;
    let g = *field.grid();
    let mut buf = Vec::new();
    field.fill_extended(&mut buf);
    let ext = Extended::new(&buf, &g);
    let mut out = Vec::with_capacity(g.len());
    for j in 0..=g.n() as isize {
        for i in 0..g.m() as isize {
            let (xx, _, yy) = hessian_at(&g, ext, i, j);
            let (px, py) = gradient_at(&g, ext, i, j);
            out.push(xx + yy - (1.0 - px * px - py * py));
        }
    }
    out
}

/// `1 + 2 Σ_{n≥1} exp(−(2π/ℓ)² n² t) cos(2πnu)`, summed until a term's
/// envelope falls below `tol`.
pub fn theta3(u: f64, t: f64, ell: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) || !(ell > 0.0) || !(tol > 0.0) {
        return invalid(format!(
            "theta3 needs t, ell, tol > 0 (t = {t}, ell = {ell}, tol = {tol})"
        ));
    }
    let rate = (2.0 * PI / ell).powi(2) * t;
    let mut sum = 1.0f64;
    let mut n = 1.0f64;
    loop {
        let env = (-rate * n * n).exp();
        if 2.0 * env < tol * sum.abs().max(tol) {
            break;
        }
        sum += 2.0 * env * (2.0 * PI * n * u).cos();
        n += 1.0;
    }
    Ok(sum)
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, flat to all orders at both
/// ends. Built from the bump `exp(1 − 1/(1 − s²))`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump(1.0 - t);
        let b = bump(t);
        a / (a + b)
    }
}

/// `exp(1 − 1/(1 − s²))` on `|s| < 1`, zero elsewhere.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Parameters of the interpolating trace on the Neumann segment
/// `[ℓ − cπ, ℓ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QaProfile {
    pub eps: f64,
    pub c: f64,
    pub nu: f64,
    pub gamma: f64,
    pub sigma: f64,
}

impl QaProfile {
    /// Defaults `ν = cπ/10`, `γ = 1/2`, `σ = ν/4`.
    pub fn new(eps: f64, c: f64) -> Result<Self> {
        let nu = c * PI / 10.0;
        let p = Self {
            eps,
            c,
            nu,
            gamma: 0.5,
            sigma: nu / 4.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Profile for a Dirichlet fraction `a < 1`, so `cπ = (1 − a)ℓ`.
    pub fn for_fraction(eps: f64, a: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return invalid(format!("Neumann segment needs a < 1, got a = {a}"));
        }
        Self::new(eps, (1.0 - a) / eps)
    }

    pub fn validate(&self) -> Result<()> {
        let ell = PI / self.eps;
        let width = self.c * PI;
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return invalid(format!("eps must lie in (0, 1], got {}", self.eps));
        }
        if !(width > 0.0 && width <= ell * (1.0 + 1e-12)) {
            return invalid(format!("need 0 < cπ ≤ ℓ, got cπ = {width}, ℓ = {ell}"));
        }
        if !(self.nu > 0.0 && 2.0 * self.nu < width) {
            return invalid(format!("need 0 < ν < cπ/2, got ν = {}", self.nu));
        }
        if !(self.sigma > 0.0 && 2.0 * self.sigma < self.nu) {
            return invalid(format!("need 0 < σ < ν/2, got σ = {}", self.sigma));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return invalid(format!("need 0 < γ < 1, got γ = {}", self.gamma));
        }
        Ok(())
    }

    pub fn ell(&self) -> f64 {
        PI / self.eps
    }

    /// Left end `ℓ − cπ` of the Neumann segment.
    pub fn start(&self) -> f64 {
        self.ell() - self.c * PI
    }

    /// Compressed tanh profile; flat at `x₀ = ℓ − cπ + ν` (value `e^π + γ`)
    /// and `x₁ = ℓ − ν` (value `1 − γ`).
    pub fn tanh_profile(&self, x: f64) -> f64 {
        let ell = self.ell();
        let (x0, x1) = (self.start() + self.nu, ell - self.nu);
        let hi = PI.exp() + self.gamma;
        let lo = 1.0 - self.gamma;
        if x <= x0 {
            return hi;
        }
        if x >= x1 {
            return lo;
        }
        let mid = ell - self.c * PI / 2.0;
        let arg = (x - mid) / ((x - x1) * (x - x0));
        0.5 * (PI.exp() + 1.0) + (0.5 * (PI.exp() - 1.0) + self.gamma) * arg.tanh()
    }

    /// `q_a(x)` on `[ℓ − cπ, ℓ]`.
    pub fn eval(&self, x: f64) -> f64 {
        let start = self.start();
        let ell = self.ell();
        let (x0, x1) = (start + self.nu, ell - self.nu);
        let e = self.eps;
        if x < x0 {
            // ψ₁ = 1 on [start, start + σ), 0 on (x0 − σ, x0].
            let t = (x - start - self.sigma) / (self.nu - 2.0 * self.sigma);
            let psi2 = smooth_step(t);
            (1.0 - psi2) * (e * x).exp() + psi2 * (PI.exp() + self.gamma)
        } else if x <= x1 {
            self.tanh_profile(x)
        } else {
            let t = (x - x1 - self.sigma) / (self.nu - 2.0 * self.sigma);
            let right = smooth_step(t);
            (1.0 - right) * (1.0 - self.gamma) + right * (e * x - PI).exp()
        }
    }

    /// Full boundary trace on `[0, ℓ)`: `e^{εx}` on the Dirichlet part,
    /// `q_a` on the rest. Arguments are reduced modulo ℓ.
    pub fn trace(&self, x: f64) -> f64 {
        let ell = self.ell();
        let x = x.rem_euclid(ell);
        if x < self.start() {
            (self.eps * x).exp()
        } else {
            self.eval(x)
        }
    }
}

/// Fourier representation of the Dirichlet solution `w` of
/// `Δ(e^{-εx}w) = e^{-εx}w` with a given ℓ-periodic trace.
#[derive(Debug, Clone)]
pub struct SelfDualSolution {
    eps: f64,
    /// Coefficients `ŵ(n)` in FFT order (`n = 0, 1, …, M/2−1, −M/2+1, …, −1`);
    /// the Nyquist slot is zero.
    modes: Vec<Complex64>,
    /// `λ_n − λ_0`, same order.
    excess_decay: Vec<Complex64>,
}

impl SelfDualSolution {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn ell(&self) -> f64 {
        PI / self.eps
    }

    /// Number of trace samples `M`.
    pub fn samples(&self) -> usize {
        self.modes.len()
    }

    fn wavenumber(k: usize, big_m: usize) -> i64 {
        if k <= big_m / 2 {
            k as i64
        } else {
            k as i64 - big_m as i64
        }
    }

    /// `ŵ(n)` for `|n| < M/2`.
    pub fn mode(&self, n: i64) -> Complex64 {
        let big_m = self.modes.len() as i64;
        if n.abs() >= big_m / 2 {
            return Complex64::new(0.0, 0.0);
        }
        self.modes[n.rem_euclid(big_m) as usize]
    }

    /// `λ_n = √(1 + ε²(2n + i)²)`, principal branch.
    pub fn decay_rate(&self, n: i64) -> Complex64 {
        decay_rate(self.eps, n)
    }

    /// `p̂(n) = 2 λ_n ŵ(n)`.
    pub fn potential_mode(&self, n: i64) -> Complex64 {
        2.0 * self.decay_rate(n) * self.mode(n)
    }

    /// Largest `|ŵ(n)|` over the top eighth of the retained band relative
    /// to `|ŵ(0)|`.
    pub fn tail_ratio(&self) -> f64 {
        let big_m = self.modes.len();
        let lo = (big_m / 2) * 7 / 8;
        let tail = self
            .modes
            .iter()
            .enumerate()
            .filter(|(k, _)| Self::wavenumber(*k, big_m).unsigned_abs() as usize >= lo)
            .fold(0.0f64, |acc, (_, c)| acc.max(c.norm()));
        tail / self.modes[0].norm()
    }

    /// Phase shift `δ = −log ŵ(0)` of `θ = εx − log w` against the roll.
    pub fn phase_shift(&self) -> f64 {
        -self.modes[0].re.ln()
    }

    /// `w(x, y) e^{s y}` by direct summation (slow; for checks).
    pub fn eval_scaled(&self, x: f64, y: f64) -> f64 {
        let big_m = self.modes.len();
        let k0 = 2.0 * PI / self.ell();
        let mut acc = 0.0;
        for (k, c) in self.modes.iter().enumerate() {
            let n = Self::wavenumber(k, big_m) as f64;
            let phase = Complex64::new(0.0, k0 * n * x);
            acc += (c * (phase - self.excess_decay[k] * y).exp()).re;
        }
        acc
    }

    /// `w(x, y)` by direct summation.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let s = (1.0 - self.eps * self.eps).max(0.0).sqrt();
        self.eval_scaled(x, y) * (-s * y).exp()
    }

    /// `w(x_i, y) e^{s y}` at `x_i = iℓ/m`, `m` dividing `M`, by one inverse
    /// FFT per call.
    pub fn row_scaled(&self, y: f64, m: usize, planner: &mut FftPlanner<f64>) -> Result<Vec<f64>> {
        let big_m = self.modes.len();
        if m == 0 || !big_m.is_multiple_of(m) {
            return invalid(format!("row sampling needs m | M (m = {m}, M = {big_m})"));
        }
        let mut buf: Vec<Complex64> = self
            .modes
            .iter()
            .zip(&self.excess_decay)
            .map(|(c, d)| c * (-d * y).exp())
            .collect();
        planner.plan_fft_inverse(big_m).process(&mut buf);
        let step = big_m / m;
        Ok((0..m).map(|i| buf[i * step].re).collect())
    }
}

/// `√(1 + ε²(2n + i)²)` on the principal branch.
pub fn decay_rate(eps: f64, n: i64) -> Complex64 {
    let z = Complex64::new(2.0 * n as f64, 1.0);
    (Complex64::new(1.0, 0.0) + eps * eps * z * z).sqrt()
}

/// Fourier analysis of the trace sampled at `M = samples` points.
pub fn solve_dirichlet_selfdual(trace: impl Fn(f64) -> f64, eps: f64, samples: usize) -> Result<SelfDualSolution> {
    if !(eps > 0.0 && eps <= 1.0) {
        return invalid(format!("eps must lie in (0, 1], got {eps}"));
    }
    if samples < 16 || !samples.is_multiple_of(2) {
        return invalid(format!("need an even sample count ≥ 16, got {samples}"));
    }
    let ell = PI / eps;
    let h = ell / samples as f64;
    let mut buf = Vec::with_capacity(samples);
    for k in 0..samples {
        let v = trace(k as f64 * h);
        if !(v > 0.0) || !v.is_finite() {
            return Err(RcnError::Nonpositive {
                what: "boundary trace",
                value: v,
            });
        }
        buf.push(Complex64::new(v, 0.0));
    }
    FftPlanner::new().plan_fft_forward(samples).process(&mut buf);
    let inv = 1.0 / samples as f64;
    let lam0 = decay_rate(eps, 0);
    let mut modes = vec![Complex64::new(0.0, 0.0); samples];
    let mut excess = vec![Complex64::new(0.0, 0.0); samples];
    modes[0] = Complex64::new(buf[0].re * inv, 0.0);
    for n in 1..samples / 2 {
        // Average the two halves so that ŵ(−n) = conj ŵ(n) holds exactly.
        let c = 0.5 * (buf[n] + buf[samples - n].conj()) * inv;
        modes[n] = c;
        modes[samples - n] = c.conj();
        excess[n] = decay_rate(eps, n as i64) - lam0;
        excess[samples - n] = decay_rate(eps, -(n as i64)) - lam0;
    }
    Ok(SelfDualSolution {
        eps,
        modes,
        excess_decay: excess,
    })
}

/// Trace sample count: a multiple of `m`, at least 4096, doubled until the
/// tail of the spectrum is below `1e-12 |ŵ(0)|` or `2^20` is reached.
pub fn solve_for_grid(profile: &QaProfile, m: usize) -> Result<SelfDualSolution> {
    let mut big_m = m * 4096usize.div_ceil(m);
    if big_m % 2 == 1 {
        big_m *= 2;
    }
    loop {
        let sol = solve_dirichlet_selfdual(|x| profile.trace(x), profile.eps, big_m)?;
        if sol.tail_ratio() < 1e-12 || big_m >= 1 << 20 {
            return Ok(sol);
        }
        big_m *= 2;
    }
}

/// Construction parameters of the zipper test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendParams {
    /// Radius `r` of the neighbourhood of the Neumann segment in which `w`
    /// is replaced; `w̃ = w(x, 0) cosh y` inside `r/2`.
    pub radius: f64,
    /// The field is relaxed onto the exact roll over `y ∈ [far_start·L, L]`.
    pub far_start: f64,
}

impl BlendParams {
    pub fn for_grid(grid: &StripGrid) -> Self {
        Self {
            radius: 4.0 * grid.zeta(),
            far_start: 0.5,
        }
    }
}

/// Zipper test function on `grid` with `k` Dirichlet nodes (`k < m`),
/// projected onto the discrete boundary conditions.
pub fn blend_test_function(
    solution: &SelfDualSolution,
    profile: &QaProfile,
    grid: StripGrid,
    k: usize,
    params: BlendParams,
) -> Result<PhaseField> {
    if (solution.eps() - grid.eps()).abs() > 1e-14 || (profile.eps - grid.eps()).abs() > 1e-14 {
        return invalid("solution, profile and grid must share eps");
    }
    if !(params.radius > 0.0) {
        return invalid(format!("blend radius must be positive, got {}", params.radius));
    }
    let (m, n) = (grid.m(), grid.n());
    let s = grid.slope();
    let eps = grid.eps();
    let start = profile.start();
    let delta = solution.phase_shift();
    let far0 = params.far_start * grid.height();
    let far_len = grid.height() - far0;

    let mut planner = FftPlanner::new();
    let trace: Vec<f64> = (0..m).map(|i| profile.trace(grid.x(i as isize))).collect();
    let mut values = Vec::with_capacity(grid.len());
    for j in 0..=n {
        let y = grid.y(j as isize);
        let row = solution.row_scaled(y, m, &mut planner)?;
        let far = smooth_step((y - far0) / far_len);
        for i in 0..m {
            let x = grid.x(i as isize);
            // Distance to the segment [start, ℓ] on the circle of length ℓ.
            let dx = if x >= start { 0.0 } else { (start - x).min(x) };
            let d = (dx * dx + y * y).sqrt();
            let phi2 = 1.0 - smooth_step((d - 0.5 * params.radius) / (0.5 * params.radius));
            // Work with w e^{sy}: w₂ e^{sy} = w(x,0) cosh(y) e^{sy}.
            let w2 = trace[i] * 0.5 * ((s + 1.0) * y).exp() * (1.0 + (-2.0 * y).exp());
            let w = (1.0 - phi2) * row[i] + phi2 * w2;
            if !(w > 0.0) {
                return Err(RcnError::Nonpositive {
                    what: "blended self-dual solution",
                    value: w,
                });
            }
            let theta = eps * x + s * y - w.ln();
            let roll = grid.roll(i as isize, j as isize, delta);
            values.push(theta + far * (roll - theta));
        }
    }
    let mut f = PhaseField::from_values(grid, BoundaryConfig::new(k, delta), values)?;
    f.check_finite()?;
    f.project_onto_bcs();
    Ok(f)
}

/// Zipper test function on `grid` for Dirichlet count `k < m` with the
/// default profile and blend.
pub fn zipper_test_function(grid: StripGrid, k: usize) -> Result<PhaseField> {
    if k >= grid.m() {
        return invalid(format!("zipper test function needs k < m, got k = {k}"));
    }
    let a = k as f64 / grid.m() as f64;
    let profile = QaProfile::for_fraction(grid.eps(), a)?;
    let sol = solve_for_grid(&profile, grid.m())?;
    blend_test_function(&sol, &profile, grid, k, BlendParams::for_grid(&grid))
}

/// Probe configuration: `1 − a = cε` and a grid of roughly uniform
/// spacing `h` on a strip of height `max(20, 8/ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeParams {
    pub c: f64,
    pub spacing: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self { c: 1.0, spacing: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub eps: f64,
    pub a: f64,
    pub energy: EnergyBreakdown,
}

/// Energy of the zipper test function at each ε.
pub fn upper_bound_probe(eps_list: &[f64], params: ProbeParams) -> Result<Vec<ProbeRow>> {
    if !(params.spacing > 0.0) {
        return invalid("probe spacing must be positive");
    }
    eps_list
        .iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps <= 1.0) {
                return invalid(format!("eps must lie in (0, 1], got {eps}"));
            }
            let height = default_height(eps);
            let m = ((PI / eps) / params.spacing).ceil().max(8.0) as usize;
            let n = (height / params.spacing).ceil().max(8.0) as usize;
            let grid = StripGrid::new(eps, height, m, n)?;
            let a = 1.0 - params.c * eps;
            if !(0.0..1.0).contains(&a) {
                return invalid(format!(
                    "1 - c eps = {a} must lie in [0, 1) (c = {}, eps = {eps})",
                    params.c
                ));
            }
            let k = (a * m as f64).round() as usize;
            if k >= m {
                return invalid(format!("c = {} leaves no Neumann segment at eps = {eps}", params.c));
            }
            let field = zipper_test_function(grid, k)?;
            Ok(ProbeRow {
                eps,
                a: k as f64 / m as f64,
                energy: energy(&field)?,
            })
        })
        .collect()
}

/// Strip height `max(20, 8/ε)`.
pub fn default_height(eps: f64) -> f64 {
    (8.0 / eps).max(20.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knee_values() {
        assert_eq!(knee(1.3, 0.0, 0.4), 0.4 * 1.3);
        assert!((knee(0.0, 60.0, 0.6) - (0.8 * 60.0 - 2f64.ln())).abs() < 1e-12);
        assert_eq!(knee(2.0, 5.0, 1.0), 2.0);
        assert!((log_cosh(0.7) - 0.7f64.cosh().ln()).abs() < 1e-15);
        assert!((log_cosh(-800.0) - (800.0 - 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn residual_of_roll_and_zero() {
        let g = StripGrid::new(0.6, 10.0, 16, 16).unwrap();
        let roll = PhaseField::from_fn(g, BoundaryConfig::new(0, 0.2), |x, y| 0.6 * x + 0.8 * y + 0.2).unwrap();
        let r = selfdual_residual(&roll);
        assert!(r[g.m()..].iter().all(|v| v.abs() < 1e-12));
        let z = PhaseField::zeros(g, BoundaryConfig::new(0, 0.0))
            .unwrap()
            .with_ghosts(crate::grid::GhostMode::Zero);
        assert!(selfdual_residual(&z).iter().all(|v| *v == -1.0));
    }

    #[test]
    fn theta3_limits() {
        assert!((theta3(0.3, 1e4, 2.0, 1e-16).unwrap() - 1.0).abs() < 1e-15);
        let a = theta3(0.17, 0.4, 3.0, 1e-15).unwrap();
        let b = theta3(1.17, 0.4, 3.0, 1e-15).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(theta3(0.1, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn smooth_step_is_flat_at_ends() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.5), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert!(smooth_step(1e-3) < 1e-100);
        assert!(1.0 - smooth_step(1.0 - 1e-3) < 1e-100);
        for k in 1..100 {
            let t = k as f64 / 100.0;
            assert!(smooth_step(t) > smooth_step(t - 0.01));
        }
    }

    #[test]
    fn qa_endpoints() {
        let p = QaProfile::new(0.3, 1.0).unwrap();
        let ell = p.ell();
        let x = ell - PI;
        assert!((p.eval(x) - (PI - 0.3 * PI).exp()).abs() < 1e-12);
        assert!((p.eval(ell) - 1.0).abs() < 1e-12);
        let mid = ell - PI / 2.0;
        assert!((p.tanh_profile(mid) - 0.5 * (PI.exp() + 1.0)).abs() < 1e-12);
        let floor = (1.0 - p.gamma).min((PI - 0.3 * PI).exp());
        for k in 0..=1000 {
            let x = ell - PI + PI * k as f64 / 1000.0;
            assert!(p.eval(x) >= floor - 1e-12);
        }
        assert!(QaProfile::new(0.3, 0.0).is_err());
        assert!(QaProfile::new(0.3, 20.0).is_err());
    }

    #[test]
    fn qa_matches_exponentials_to_second_order() {
        let p = QaProfile::new(0.25, 1.2).unwrap();
        let h = 1e-4;
        let (x0, x1) = (p.start(), p.ell());
        for (x, target) in [(x0 + 2.0 * h, 0.0), (x1 - 2.0 * h, PI)] {
            let f = |x: f64| p.eval(x);
            let g = |x: f64| (0.25 * x - target).exp();
            for (a, b) in [
                (f(x), g(x)),
                ((f(x + h) - f(x - h)) / (2.0 * h), (g(x + h) - g(x - h)) / (2.0 * h)),
            ] {
                assert!((a - b).abs() < 1e-8 * b.abs().max(1.0));
            }
            let d2f = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let d2g = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
            assert!((d2f - d2g).abs() < 1e-4);
        }
    }

    #[test]
    fn constant_trace_gives_single_mode() {
        let eps = 0.4;
        let sol = solve_dirichlet_selfdual(|_| 1.0, eps, 64).unwrap();
        let s = (1.0f64 - eps * eps).sqrt();
        for &(x, y) in &[(0.0, 0.0), (1.3, 0.7), (5.0, 3.0)] {
            assert!((sol.eval(x, y) - (-s * y).exp()).abs() < 1e-14);
        }
        assert!(sol.phase_shift().abs() < 1e-15);
        assert!((sol.decay_rate(0).re - s).abs() < 1e-15);
        assert!(solve_dirichlet_selfdual(|x| x - 1.0, eps, 64).is_err());
    }

    #[test]
    fn decay_rates_have_positive_real_part_and_conjugate_symmetry() {
        for n in -50..=50 {
            let l = decay_rate(0.3, n);
            assert!(l.re > 0.0);
            let r = decay_rate(0.3, -n);
            assert!((l - r.conj()).norm() < 1e-14);
        }
    }
}
