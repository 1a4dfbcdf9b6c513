//! Line search for the strong Wolfe conditions (bracketing followed by
//! zoom with safeguarded cubic interpolation).

/// Value and directional derivative at a trial step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub alpha: f64,
    pub value: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfeParams {
    pub c1: f64,
    pub c2: f64,
    pub max_evals: usize,
    pub alpha_max: f64,
    /// Relative slack on sufficient decrease for a step that already meets
    /// the curvature condition. Lets the search terminate once the decrease
    /// drops below the roundoff of `f`.
    pub approx_slack: f64,
}

impl Default for WolfeParams {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            c2: 0.1,
            max_evals: 40,
            alpha_max: 1e10,
            approx_slack: 1e-12,
        }
    }
}

/// Searches along a descent direction. `phi(α)` returns `(f, f′)` at `α`.
///
/// On success the accepted trial is the last one passed to `phi`, so a
/// caller that caches the state of the most recent evaluation can use it
/// directly. Returns `None` if no acceptable step was found within the
/// evaluation budget.
pub fn strong_wolfe(
    mut phi: impl FnMut(f64) -> (f64, f64),
    f0: f64,
    d0: f64,
    alpha_init: f64,
    params: WolfeParams,
) -> Option<Trial> {
    debug_assert!(d0 < 0.0);
    let WolfeParams {
        c1,
        c2,
        max_evals,
        alpha_max,
        approx_slack,
    } = params;
    let roundoff = approx_slack * f0.abs();
    let mut evals = 0;
    let mut prev = Trial {
        alpha: 0.0,
        value: f0,
        slope: d0,
    };
    let mut alpha = alpha_init.min(alpha_max);
    loop {
        let (f, d) = phi(alpha);
        evals += 1;
        let cur = Trial {
            alpha,
            value: f,
            slope: d,
        };
        if f.is_finite() && f <= f0 + roundoff && d.abs() <= -c2 * d0 {
            return Some(cur);
        }
        if too_high(f, f0 + c1 * alpha * d0, roundoff) || (evals > 1 && f > prev.value + roundoff) {
            return zoom(
                &mut phi,
                f0,
                d0,
                prev,
                cur,
                c1,
                c2,
                roundoff,
                max_evals.saturating_sub(evals),
            );
        }
        if d.abs() <= -c2 * d0 {
            return Some(cur);
        }
        if d >= 0.0 {
            return zoom(
                &mut phi,
                f0,
                d0,
                cur,
                prev,
                c1,
                c2,
                roundoff,
                max_evals.saturating_sub(evals),
            );
        }
        if evals >= max_evals || alpha >= alpha_max {
            return None;
        }
        prev = cur;
        alpha = (4.0 * alpha).min(alpha_max);
    }
}

/// Fails sufficient decrease by more than the roundoff of `f`.
fn too_high(f: f64, target: f64, roundoff: f64) -> bool {
    !f.is_finite() || f > target + roundoff
}

/// `lo` satisfies sufficient decrease and has the lower value; the
/// minimizer lies between `lo` and `hi`.
#[allow(clippy::too_many_arguments)]
fn zoom(
    phi: &mut impl FnMut(f64) -> (f64, f64),
    f0: f64,
    d0: f64,
    mut lo: Trial,
    mut hi: Trial,
    c1: f64,
    c2: f64,
    roundoff: f64,
    budget: usize,
) -> Option<Trial> {
    for _ in 0..budget {
        let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
        let width = b - a;
        if width <= 1e-14 * b.max(1e-300) {
            return None;
        }
        let mut alpha = cubic_min(lo, hi).unwrap_or(0.5 * (a + b));
        let guard = 0.1 * width;
        if !(alpha > a + guard && alpha < b - guard) {
            alpha = 0.5 * (a + b);
        }
        let (f, d) = phi(alpha);
        let cur = Trial {
            alpha,
            value: f,
            slope: d,
        };
        if f.is_finite() && f <= f0 + roundoff && d.abs() <= -c2 * d0 {
            return Some(cur);
        }
        if too_high(f, f0 + c1 * alpha * d0, roundoff) || f > lo.value + roundoff {
            hi = cur;
        } else {
            if d.abs() <= -c2 * d0 {
                return Some(cur);
            }
            if d * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    None
}

/// Minimizer of the cubic interpolating values and slopes at two trials.
fn cubic_min(u: Trial, v: Trial) -> Option<f64> {
    if !(u.value.is_finite() && v.value.is_finite() && u.slope.is_finite() && v.slope.is_finite()) {
        return None;
    }
    let d1 = u.slope + v.slope - 3.0 * (u.value - v.value) / (u.alpha - v.alpha);
    let disc = d1 * d1 - u.slope * v.slope;
    if disc < 0.0 {
        return None;
    }
    let d2 = (v.alpha - u.alpha).signum() * disc.sqrt();
    let denom = v.slope - u.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = v.alpha - (v.alpha - u.alpha) * (v.slope + d2 - d1) / denom;
    t.is_finite().then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(t: Trial, f0: f64, d0: f64, p: WolfeParams) {
        assert!(t.value <= f0 + p.c1 * t.alpha * d0);
        assert!(t.slope.abs() <= -p.c2 * d0);
    }

    #[test]
    fn quadratic() {
        let phi = |a: f64| ((a - 3.0).powi(2), 2.0 * (a - 3.0));
        let p = WolfeParams::default();
        let t = strong_wolfe(phi, 9.0, -6.0, 1.0, p).unwrap();
        check(t, 9.0, -6.0, p);
        assert!((t.alpha - 3.0).abs() < 0.3);
        let t = strong_wolfe(phi, 9.0, -6.0, 100.0, p).unwrap();
        check(t, 9.0, -6.0, p);
    }

    #[test]
    fn quartic_with_tiny_initial_step() {
        let phi = |a: f64| ((a - 50.0).powi(4), 4.0 * (a - 50.0).powi(3));
        let (f0, d0) = phi(0.0);
        let p = WolfeParams::default();
        let t = strong_wolfe(phi, f0, d0, 1e-3, p).unwrap();
        check(t, f0, d0, p);
    }

    #[test]
    fn nonfinite_region_is_backtracked() {
        let phi = |a: f64| {
            if a > 2.0 {
                (f64::NAN, f64::NAN)
            } else {
                ((a - 1.0).powi(2), 2.0 * (a - 1.0))
            }
        };
        let p = WolfeParams::default();
        let t = strong_wolfe(phi, 1.0, -2.0, 10.0, p).unwrap();
        check(t, 1.0, -2.0, p);
    }

    #[test]
    fn unbounded_below_fails() {
        let phi = |a: f64| (-a, -1.0);
        let p = WolfeParams {
            max_evals: 10,
            ..WolfeParams::default()
        };
        assert!(strong_wolfe(phi, 0.0, -1.0, 1.0, p).is_none());
    }
}
