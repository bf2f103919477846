//! Bandlimited test signals and grid discretization.
//!
//! A [`BandlimitedSignal`] is a finite expansion in sinc kernels
//! `g(t) = sin(omega t) / (pi t)` centered on a uniform comb with spacing
//! `pi / omega`. Values and running integrals are evaluated analytically, so
//! encoders and decoders never depend on a discretization of the input.

use serde::{Deserialize, Serialize};

use crate::kernels::si;
use crate::rng::SplitMix64;
use crate::scalar::{real, Real};

/// Grid resolution used for normalization, bound estimation and default
/// reconstruction output.
pub const DEFAULT_GRID_POINTS: usize = 2000;

/// Oversampling factor (relative to the default grid) used when estimating
/// the amplitude bound.
const BOUND_OVERSAMPLE: usize = 10;

/// Safety inflation applied to the sampled amplitude bound.
const BOUND_INFLATION: f64 = 1.01;

#[derive(Debug, thiserror::Error)]
pub enum SignalError {
    #[error("window too short for one sinc center")]
    WindowTooShort,
    #[error("window is degenerate or not finite")]
    BadWindow,
    #[error("bandwidth must be positive and finite")]
    BadBandwidth,
    #[error("coefficients must be finite and match the center count")]
    BadCoefficients,
    #[error("grid needs at least two points")]
    GridTooShort,
}

/// Input to a time encoder: pointwise values plus exact interval integrals.
pub trait InputSignal<T: Real> {
    fn value(&self, t: T) -> T;

    /// Integral of the signal over `[a, b]`.
    fn integral(&self, a: T, b: T) -> T;

    /// A bound `c` with `|x(t)| <= c` over the window of interest.
    fn amplitude_bound(&self) -> T;

    /// A possibly looser bound that is cheap to compute; the encoder only
    /// needs it to bracket threshold crossings.
    fn bracket_bound(&self) -> T {
        self.amplitude_bound()
    }
}

/// Constant input, mainly for calibration runs and tests.
#[derive(Debug, Clone, Copy)]
pub struct Constant<T>(pub T);

impl<T: Real> InputSignal<T> for Constant<T> {
    fn value(&self, _t: T) -> T {
        self.0
    }

    fn integral(&self, a: T, b: T) -> T {
        self.0 * (b - a)
    }

    fn amplitude_bound(&self) -> T {
        self.0.abs()
    }
}

/// Finite sinc expansion with angular bandwidth `omega` over a window.
///
/// Serializes flat as `{omega, t_start, t_end, centers, coeffs}` and
/// round-trips bit-exactly through JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct BandlimitedSignal<T> {
    omega: T,
    t_start: T,
    t_end: T,
    centers: Vec<T>,
    coeffs: Vec<T>,
}

impl<T: Real> BandlimitedSignal<T> {
    /// Builds a signal from coefficients on the canonical center comb
    /// `t_start + k pi / omega`. The coefficient count must match the comb.
    pub fn from_coeffs(omega: T, window: (T, T), coeffs: Vec<T>) -> Result<Self, SignalError> {
        let centers = center_comb(omega, window)?;
        if coeffs.len() != centers.len() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(SignalError::BadCoefficients);
        }
        Ok(Self {
            omega,
            t_start: window.0,
            t_end: window.1,
            centers,
            coeffs,
        })
    }

    /// Random unit-norm signal: i.i.d. uniform `[0, 1)` amplitudes from the
    /// seeded generator, rescaled so the default-grid L2 norm is one.
    pub fn random(omega: T, window: (T, T), seed: u64) -> Result<Self, SignalError> {
        let centers = center_comb(omega, window)?;
        let mut rng = SplitMix64::new(seed);
        let coeffs: Vec<T> = (0..centers.len()).map(|_| rng.uniform_scalar()).collect();
        let mut signal = Self {
            omega,
            t_start: window.0,
            t_end: window.1,
            centers,
            coeffs,
        };
        let norm = signal.to_grid(DEFAULT_GRID_POINTS)?.norm();
        if norm > T::zero() {
            for c in signal.coeffs.iter_mut() {
                *c /= norm;
            }
        }
        Ok(signal)
    }

    /// Validates a deserialized signal: finite fields, strictly increasing
    /// centers on the canonical comb.
    pub fn validate(&self) -> Result<(), SignalError> {
        let comb = center_comb(self.omega, (self.t_start, self.t_end))?;
        if self.centers.len() != comb.len()
            || self
                .centers
                .iter()
                .zip(comb.iter())
                .any(|(&a, &b)| (a - b).abs() > real::<T>(1e-9) * self.spacing())
        {
            return Err(SignalError::BadCoefficients);
        }
        if self.coeffs.len() != self.centers.len() || self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(SignalError::BadCoefficients);
        }
        Ok(())
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn window(&self) -> (T, T) {
        (self.t_start, self.t_end)
    }

    pub fn centers(&self) -> &[T] {
        &self.centers
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Center spacing `pi / omega`.
    pub fn spacing(&self) -> T {
        T::PI() / self.omega
    }

    /// Pointwise value: sum of sinc kernels.
    pub fn eval(&self, t: T) -> T {
        let mut acc = T::zero();
        for (&c, &center) in self.coeffs.iter().zip(self.centers.iter()) {
            acc += c * sinc_kernel(self.omega, t - center);
        }
        acc
    }

    /// Running integral from minus infinity: each sinc contributes
    /// `(Si(omega (t - center)) + pi/2) / pi` times its amplitude.
    pub fn primitive(&self, t: T) -> T {
        let mut acc = T::zero();
        for (&c, &center) in self.coeffs.iter().zip(self.centers.iter()) {
            acc += c * (si(self.omega * (t - center)) / T::PI() + real(0.5));
        }
        acc
    }

    /// Uniform sampling over the window, endpoints included.
    pub fn to_grid(&self, n_points: usize) -> Result<GridSignal<T>, SignalError> {
        if n_points < 2 {
            return Err(SignalError::GridTooShort);
        }
        let dt = (self.t_end - self.t_start) / real((n_points - 1) as f64);
        let values = (0..n_points)
            .map(|i| self.eval(self.t_start + dt * real(i as f64)))
            .collect();
        Ok(GridSignal {
            t0: self.t_start,
            dt,
            values,
        })
    }
}

impl<T: Real> InputSignal<T> for BandlimitedSignal<T> {
    fn value(&self, t: T) -> T {
        self.eval(t)
    }

    fn integral(&self, a: T, b: T) -> T {
        self.primitive(b) - self.primitive(a)
    }

    /// Max |value| over a 10x oversampled grid, inflated by 1%.
    fn amplitude_bound(&self) -> T {
        let n = DEFAULT_GRID_POINTS * BOUND_OVERSAMPLE;
        let dt = (self.t_end - self.t_start) / real((n - 1) as f64);
        let mut max = T::zero();
        for i in 0..n {
            let v = self.eval(self.t_start + dt * real(i as f64)).abs();
            if v > max {
                max = v;
            }
        }
        max * real(BOUND_INFLATION)
    }

    /// Coefficient-sum bound `sum |coeff| * omega / pi`: a true supremum
    /// bound, no sampling required.
    fn bracket_bound(&self) -> T {
        let mut acc = T::zero();
        for &c in &self.coeffs {
            acc += c.abs();
        }
        acc * self.omega / T::PI()
    }
}

fn center_comb<T: Real>(omega: T, window: (T, T)) -> Result<Vec<T>, SignalError> {
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(SignalError::BadBandwidth);
    }
    let (a, b) = window;
    if !a.is_finite() || !b.is_finite() || !(b > a) {
        return Err(SignalError::BadWindow);
    }
    let spacing = T::PI() / omega;
    if b - a < spacing {
        return Err(SignalError::WindowTooShort);
    }
    // Tolerate roundoff so an exact multiple of the spacing includes both
    // endpoints.
    let count = ((b - a) / spacing + real(1e-9)).floor();
    let count = count.to_usize().unwrap_or(0);
    Ok((0..=count).map(|k| a + spacing * real(k as f64)).collect())
}

#[inline]
pub(crate) fn sinc_kernel<T: Real>(omega: T, u: T) -> T {
    if u == T::zero() {
        omega / T::PI()
    } else {
        (omega * u).sin() / (T::PI() * u)
    }
}

/// Uniformly discretized signal on a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct GridSignal<T> {
    pub t0: T,
    pub dt: T,
    pub values: Vec<T>,
}

impl<T: Real> GridSignal<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_at(&self, i: usize) -> T {
        self.t0 + self.dt * real(i as f64)
    }

    pub fn t_end(&self) -> T {
        self.time_at(self.len().saturating_sub(1))
    }

    /// Discrete L2 norm `sqrt(dt * sum v^2)`.
    pub fn norm(&self) -> T {
        let mut acc = T::zero();
        for &v in &self.values {
            acc += v * v;
        }
        (self.dt * acc).sqrt()
    }

    /// True when both signals live on the same grid (same origin, step and
    /// length up to roundoff).
    pub fn same_grid(&self, other: &Self) -> bool {
        self.len() == other.len()
            && (self.t0 - other.t0).abs() <= self.dt * real(1e-9)
            && (self.dt - other.dt).abs() <= self.dt * real(1e-9)
    }

    /// L2 norm of the difference, panicking on grid mismatch.
    pub fn l2_distance(&self, other: &Self) -> T {
        assert!(self.same_grid(other), "grid mismatch");
        let mut acc = T::zero();
        for (&a, &b) in self.values.iter().zip(other.values.iter()) {
            acc += (a - b) * (a - b);
        }
        (self.dt * acc).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::quad_adaptive;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn comb_includes_both_endpoints_on_exact_multiple() {
        let s = BandlimitedSignal::random(PI, (0.0, 10.0), 7).unwrap();
        assert_eq!(s.centers().len(), 11);
        assert_eq!(s.centers()[0], 0.0);
        assert!((s.centers()[10] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn comb_spacing_is_exact() {
        for &omega in &[PI, 2.0 * PI, 0.7 * PI] {
            let s = BandlimitedSignal::<f64>::random(omega, (0.0, 10.0), 1).unwrap();
            let spacing = PI / omega;
            for w in s.centers().windows(2) {
                // constructed, not computed: spacing differences stay at
                // floating-point construction error
                assert!((w[1] - w[0] - spacing).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn twenty_one_centers_for_doubled_bandwidth() {
        let s = BandlimitedSignal::<f64>::random(2.0 * PI, (0.0, 10.0), 99).unwrap();
        assert_eq!(s.centers().len(), 21);
    }

    #[test]
    fn generation_is_deterministic_bitwise() {
        let a = BandlimitedSignal::<f64>::random(PI, (0.0, 10.0), 7).unwrap();
        let b = BandlimitedSignal::<f64>::random(PI, (0.0, 10.0), 7).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
    }

    #[test]
    fn unit_norm_on_default_grid() {
        for seed in 0..5 {
            let s = BandlimitedSignal::<f64>::random(2.0 * PI, (0.0, 10.0), seed).unwrap();
            let norm = s.to_grid(DEFAULT_GRID_POINTS).unwrap().norm();
            assert!((norm - 1.0).abs() < 1e-9, "norm {norm}");
        }
    }

    #[test]
    fn window_shorter_than_spacing_is_rejected() {
        let r = BandlimitedSignal::<f64>::random(PI, (0.0, 0.5), 7);
        assert!(matches!(r, Err(SignalError::WindowTooShort)));
    }

    #[test]
    fn eval_at_center_is_peak_plus_tails() {
        // Single sinc: value at the center is omega/pi, zero one spacing away.
        let omega = 2.0 * PI;
        let mut coeffs = vec![0.0; 21];
        coeffs[10] = 1.0;
        let s = BandlimitedSignal::from_coeffs(omega, (0.0, 10.0), coeffs).unwrap();
        let center = s.centers()[10];
        assert!((s.eval(center) - omega / PI).abs() < 1e-12);
        assert!(s.eval(center + PI / omega).abs() < 1e-12);
    }

    #[test]
    fn eval_matches_direct_sum_oracle() {
        // Two sincs; midpoint value recomputed from the defining formula.
        let omega = PI;
        let mut coeffs = vec![0.0; 11];
        coeffs[4] = 0.8;
        coeffs[5] = -0.3;
        let s = BandlimitedSignal::from_coeffs(omega, (0.0, 10.0), coeffs).unwrap();
        let t = 4.5;
        let g = |u: f64| {
            if u == 0.0 {
                omega / PI
            } else {
                (omega * u).sin() / (PI * u)
            }
        };
        let expect = 0.8 * g(t - 4.0) - 0.3 * g(t - 5.0);
        assert!((s.eval(t) - expect).abs() < 1e-14);
    }

    #[test]
    fn primitive_of_single_sinc_hits_half_and_one() {
        // Total integral of the kernel is 1; symmetry puts 1/2 at the center.
        let omega = PI;
        let mut coeffs = vec![0.0; 11];
        coeffs[5] = 1.0;
        let s = BandlimitedSignal::from_coeffs(omega, (0.0, 10.0), coeffs).unwrap();
        assert!((s.primitive(5.0) - 0.5).abs() < 1e-12);
        assert!((s.primitive(1e7) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn primitive_difference_matches_quadrature() {
        let s = BandlimitedSignal::<f64>::random(1.5 * PI, (0.0, 10.0), 42).unwrap();
        let cases = [(0.3, 2.3), (1.0, 7.7), (4.2, 4.9)];
        for (a, b) in cases {
            let direct = s.primitive(b) - s.primitive(a);
            let via_quad = quad_adaptive(&|t| s.eval(t), a, b, 1e-10).unwrap();
            assert!((direct - via_quad).abs() < 1e-8, "[{a},{b}]");
        }
    }

    #[test]
    fn primitive_nondecreasing_where_signal_positive() {
        let omega = PI;
        let mut coeffs = vec![0.0; 11];
        coeffs[5] = 1.0;
        let s = BandlimitedSignal::from_coeffs(omega, (0.0, 10.0), coeffs).unwrap();
        // Central lobe of the sinc is positive: primitive must increase there.
        let mut prev = s.primitive(4.0);
        for i in 1..=20 {
            let t = 4.0 + 2.0 * i as f64 / 20.0;
            let v = s.primitive(t);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn eval_bounded_by_coefficient_sum() {
        let s = BandlimitedSignal::<f64>::random(2.0 * PI, (0.0, 10.0), 3).unwrap();
        let bound: f64 = s.coeffs().iter().map(|c| c.abs()).sum::<f64>() * s.omega() / PI;
        let mut rng = crate::rng::SplitMix64::new(1);
        for _ in 0..500 {
            let t = rng.uniform_in(-5.0, 15.0);
            assert!(s.eval(t).abs() <= bound + 1e-12);
        }
    }

    #[test]
    fn amplitude_bound_dominates_dense_samples() {
        let s = BandlimitedSignal::<f64>::random(2.0 * PI, (0.0, 10.0), 8).unwrap();
        let c = s.amplitude_bound();
        let mut rng = crate::rng::SplitMix64::new(2);
        for _ in 0..2000 {
            let t = rng.uniform_in(0.0, 10.0);
            assert!(s.eval(t).abs() <= c);
        }
    }

    #[test]
    fn grid_of_two_points_is_window_endpoints() {
        let s = BandlimitedSignal::<f64>::random(PI, (0.0, 10.0), 7).unwrap();
        let g = s.to_grid(2).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.time_at(0), 0.0);
        assert!((g.time_at(1) - 10.0).abs() < 1e-12);
        assert_eq!(g.values[0], s.eval(0.0));
        assert_eq!(g.values[1], s.eval(g.time_at(1)));
    }

    #[test]
    fn grid_values_equal_eval_at_grid_points() {
        let s = BandlimitedSignal::<f64>::random(PI, (0.0, 10.0), 4).unwrap();
        let g = s.to_grid(100).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.values[i], s.eval(g.time_at(i)));
        }
    }

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let s = BandlimitedSignal::<f64>::random(2.0 * PI, (0.0, 10.0), 17).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: BandlimitedSignal<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(s.coeffs(), back.coeffs());
        assert_eq!(s.centers(), back.centers());
        assert_eq!(s.omega(), back.omega());
        back.validate().unwrap();
    }

    #[test]
    fn constant_signal_contract() {
        let c = Constant(0.5f64);
        assert_eq!(c.value(3.0), 0.5);
        assert_eq!(c.integral(1.0, 3.0), 1.0);
        assert_eq!(c.amplitude_bound(), 0.5);
    }
}
