//! Small numerical utilities: compensated summation, adaptive Simpson
//! quadrature and Hermite-interpolated tables.

use crate::error::{RcnError, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let c = 0.5 * (a + b);
    let fc = f(c);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    let mut ok = true;
    let v = simpson_step(&f, a, b, fa, fc, fb, whole, tol, MAX_DEPTH, &mut ok);
    if ok && v.is_finite() {
        Ok(v)
    } else {
        Err(RcnError::Quadrature { a, b })
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fc: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    ok: &mut bool,
) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let fd = f(d);
    let fe = f(e);
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    let diff = left + right - whole;
    // The first two levels are always refined so that integrands whose coarse
    // Simpson estimates agree by symmetry are still resolved.
    if depth < MAX_DEPTH - 2 && diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    if depth == 0 {
        *ok = false;
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, c, fa, fd, fc, left, 0.5 * tol, depth - 1, ok)
        + simpson_step(f, c, b, fc, fe, fb, right, 0.5 * tol, depth - 1, ok)
}

/// Uniformly sampled function with value, first and (optionally) second
/// derivative at each node; evaluated by quintic or cubic Hermite
/// interpolation. Outside the table the boundary value is extended linearly
/// using the boundary slope.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    x0: f64,
    h: f64,
    f: Vec<f64>,
    d1: Vec<f64>,
    d2: Option<Vec<f64>>,
}

impl HermiteTable {
    /// Tabulates `f` with first derivative `df` and second derivative `d2f` on
    /// `count` uniform nodes spanning `[x0, x1]`.
    pub fn quintic(x0: f64, x1: f64, f: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Self {
        assert!(f.len() >= 2 && f.len() == d1.len() && f.len() == d2.len());
        let h = (x1 - x0) / (f.len() - 1) as f64;
        Self {
            x0,
            h,
            f,
            d1,
            d2: Some(d2),
        }
    }

    pub fn cubic(x0: f64, x1: f64, f: Vec<f64>, d1: Vec<f64>) -> Self {
        assert!(f.len() >= 2 && f.len() == d1.len());
        let h = (x1 - x0) / (f.len() - 1) as f64;
        Self { x0, h, f, d1, d2: None }
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.f.len() - 1) as f64
    }

    pub fn last(&self) -> f64 {
        *self.f.last().unwrap()
    }

    /// Value and first derivative at `x`.
    pub fn eval2(&self, x: f64) -> (f64, f64) {
        let n = self.f.len();
        if x <= self.x0 {
            return (self.f[0] + self.d1[0] * (x - self.x0), self.d1[0]);
        }
        let xm = self.x_max();
        if x >= xm {
            return (self.f[n - 1] + self.d1[n - 1] * (x - xm), self.d1[n - 1]);
        }
        let s = (x - self.x0) / self.h;
        let k = (s.floor() as usize).min(n - 2);
        let t = s - k as f64;
        let h = self.h;
        let (f0, f1) = (self.f[k], self.f[k + 1]);
        let (g0, g1) = (self.d1[k] * h, self.d1[k + 1] * h);
        match &self.d2 {
            Some(d2) => {
                let (c0, c1) = (d2[k] * h * h, d2[k + 1] * h * h);
                let t2 = t * t;
                let t3 = t2 * t;
                let t4 = t3 * t;
                let t5 = t4 * t;
                let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
                let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
                let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
                let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
                let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
                let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
                let dh0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
                let dh1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
                let dh2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
                let dh3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
                let dh4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
                let dh5 = -dh0;
                let v = h0 * f0 + h1 * g0 + h2 * c0 + h3 * c1 + h4 * g1 + h5 * f1;
                let d = (dh0 * f0 + dh1 * g0 + dh2 * c0 + dh3 * c1 + dh4 * g1 + dh5 * f1) / h;
                (v, d)
            }
            None => {
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                let v = h00 * f0 + h10 * g0 + h01 * f1 + h11 * g1;
                let d = ((6.0 * t2 - 6.0 * t) * f0
                    + (3.0 * t2 - 4.0 * t + 1.0) * g0
                    + (-6.0 * t2 + 6.0 * t) * f1
                    + (3.0 * t2 - 2.0 * t) * g1)
                    / h;
                (v, d)
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval2(x).0
    }
}

/// Cumulative integrals `F(x_k) = ∫_{x0}^{x_k} f` on `count` uniform nodes,
/// each cell integrated by adaptive Simpson.
pub fn cumulative_integral(f: impl Fn(f64) -> f64, x0: f64, x1: f64, count: usize, tol: f64) -> Result<Vec<f64>> {
    let h = (x1 - x0) / (count - 1) as f64;
    let mut out = Vec::with_capacity(count);
    let mut acc = CompensatedSum::default();
    out.push(0.0);
    for k in 1..count {
        let a = x0 + (k - 1) as f64 * h;
        let b = x0 + k as f64 * h;
        acc.add(adaptive_simpson(&f, a, b, tol)?);
        out.push(acc.value());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomials_and_transcendentals() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        let v = adaptive_simpson(|x| (-x * x).exp(), -8.0, 8.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn simpson_reports_divergence() {
        assert!(adaptive_simpson(|x| 1.0 / x.abs().sqrt().max(1e-300) / x.abs(), -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let vals: Vec<f64> = (0..100_000).map(|k| if k % 2 == 0 { 1e8 } else { 1e-8 }).collect();
        let s: CompensatedSum = vals.iter().copied().collect();
        let exact = 5e4 * 1e8 + 5e4 * 1e-8;
        assert!((s.value() - exact).abs() / exact < 1e-15);
    }

    #[test]
    fn hermite_tables_reproduce_smooth_functions() {
        let n = 101;
        let xs: Vec<f64> = (0..n).map(|k| k as f64 * 0.02).collect();
        let f: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let d1: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let d2: Vec<f64> = xs.iter().map(|x| -x.sin()).collect();
        let q = HermiteTable::quintic(0.0, 2.0, f.clone(), d1.clone(), d2);
        let c = HermiteTable::cubic(0.0, 2.0, f, d1);
        for k in 0..997 {
            let x = 0.001 + k as f64 * 0.002;
            let (v, d) = q.eval2(x);
            assert!((v - x.sin()).abs() < 1e-13);
            assert!((d - x.cos()).abs() < 1e-10);
            let (v, d) = c.eval2(x);
            assert!((v - x.sin()).abs() < 1e-8);
            assert!((d - x.cos()).abs() < 1e-5);
        }
        let (v, d) = q.eval2(2.5);
        assert!((v - (2f64.sin() + 0.5 * 2f64.cos())).abs() < 1e-14);
        assert_eq!(d, 2f64.cos());
    }

    #[test]
    fn cumulative_integral_of_cosine() {
        let c = cumulative_integral(f64::cos, 0.0, 1.0, 11, 1e-13).unwrap();
        for (k, v) in c.iter().enumerate() {
            assert!((v - (k as f64 * 0.1).sin()).abs() < 1e-12);
        }
    }
}
