//! Adaptive quadrature used as an independent oracle for the analytic
//! kernel formulas (and anywhere a one-off integral is needed in tests).
//!
//! Adaptive Simpson with Richardson extrapolation: each panel is accepted
//! when the embedded error estimate `|S2 - S1| / 15` meets its share of the
//! tolerance, otherwise the panel splits.

use crate::scalar::{real, Real};

use super::KernelError;

const MAX_DEPTH: usize = 60;
const MAX_EVALS: usize = 8_000_000;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn quad_adaptive<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> Result<T, KernelError> {
    if tol <= T::zero() {
        return Err(KernelError::BadTolerance);
    }
    if a == b {
        return Ok(T::zero());
    }
    let (lo, hi, flip) = if a < b { (a, b, false) } else { (b, a, true) };

    let mut evals = 0usize;
    let fa = eval_counted(f, lo, &mut evals)?;
    let fb = eval_counted(f, hi, &mut evals)?;
    let m = (lo + hi) / real(2.0);
    let fm = eval_counted(f, m, &mut evals)?;
    let whole = simpson(lo, hi, fa, fm, fb);

    let v = adapt(f, lo, hi, fa, fm, fb, whole, tol, 0, &mut evals)?;
    Ok(if flip { -v } else { v })
}

fn eval_counted<T: Real, F: Fn(T) -> T>(f: &F, x: T, evals: &mut usize) -> Result<T, KernelError> {
    *evals += 1;
    if *evals > MAX_EVALS {
        return Err(KernelError::QuadratureBudget { achieved: f64::NAN });
    }
    let v = f(x);
    if !v.is_finite() {
        return Err(KernelError::NonFiniteIntegrand { at: x.as_f64() });
    }
    Ok(v)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / real(6.0) * (fa + real::<T>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: usize,
    evals: &mut usize,
) -> Result<T, KernelError> {
    let m = (a + b) / real(2.0);
    let lm = (a + m) / real(2.0);
    let rm = (m + b) / real(2.0);
    let flm = eval_counted(f, lm, evals).map_err(|e| budget_with(e, whole))?;
    let frm = eval_counted(f, rm, evals).map_err(|e| budget_with(e, whole))?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth > 0 && delta.abs() <= real::<T>(15.0) * tol {
        return Ok(left + right + delta / real(15.0));
    }
    if depth >= MAX_DEPTH {
        return Err(KernelError::QuadratureBudget {
            achieved: (left + right).as_f64(),
        });
    }
    let half_tol = tol / real(2.0);
    let l = adapt(f, a, m, fa, flm, fm, left, half_tol, depth + 1, evals)?;
    let r = adapt(f, m, b, fm, frm, fb, right, half_tol, depth + 1, evals)?;
    Ok(l + r)
}

fn budget_with<T: Real>(e: KernelError, estimate: T) -> KernelError {
    match e {
        KernelError::QuadratureBudget { .. } => KernelError::QuadratureBudget {
            achieved: estimate.as_f64(),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_over_unit_interval() {
        let v: f64 = quad_adaptive(&|_| 1.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sine_over_half_period() {
        let v: f64 = quad_adaptive(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let a: f64 = quad_adaptive(&|x: f64| x * x, 0.0, 2.0, 1e-12).unwrap();
        let b: f64 = quad_adaptive(&|x: f64| x * x, 2.0, 0.0, 1e-12).unwrap();
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn sinc_integral_matches_si_closed_form() {
        // integral of sin(w t)/(pi t) over [-50/w, 50/w] = 2 Si(50) / pi.
        let w = 2.3f64;
        let g = move |t: f64| {
            if t == 0.0 {
                w / std::f64::consts::PI
            } else {
                (w * t).sin() / (std::f64::consts::PI * t)
            }
        };
        let v = quad_adaptive(&g, -50.0 / w, 50.0 / w, 1e-12).unwrap();
        let expect = 2.0 * crate::kernels::si(50.0) / std::f64::consts::PI;
        assert!((v - expect).abs() < 1e-10, "v={v} expect={expect}");
    }

    #[test]
    fn zero_length_interval_is_zero() {
        let v: f64 = quad_adaptive(&|x: f64| x.exp(), 1.5, 1.5, 1e-12).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(quad_adaptive(&|x: f64| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn reports_non_finite_integrand() {
        let r = quad_adaptive(&|x: f64| 1.0 / x, -1.0, 1.0, 1e-10);
        assert!(r.is_err());
    }
}
