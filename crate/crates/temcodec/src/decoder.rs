//! Reconstruction of the input from spike streams.
//!
//! Two families live here:
//!
//! - Grid operators: an ideal low-pass projection and the consistency
//!   projection that pins interval integrals to their measured targets.
//!   Constraint intervals are snapped to half-open runs of grid points and
//!   integrals are taken with the matching rectangle rule, which makes both
//!   projections exact orthogonal/affine projections in the grid inner
//!   product — idempotence, nonexpansiveness and the reflection isometry
//!   hold to machine precision.
//!
//! - Decoders: both the iterative decoder and the closed-form decoder work
//!   in the basis of sinc-smoothed interval indicators of the merged spike
//!   stream. Low-passing a piecewise-constant correction has a closed form
//!   in the sine integral, so the iteration applies the exact continuous
//!   bandlimiting operator rather than a grid approximation; the grid enters
//!   only when the final estimate is rendered.

use crate::encoder::{stream_interval_integrals, SpikeStream, SpikeTrain};
use crate::kernels::{
    pinv_truncated, si, si_antiderivative, DenseMatrix, KernelError, SpectralMask,
};
use crate::scalar::{real, Real};
use crate::signals::{sinc_kernel, GridSignal};

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("need at least {needed} spikes, got {got}")]
    TooFewSpikes { needed: usize, got: usize },
    #[error("channels carry different encoder parameters")]
    MismatchedParams,
    #[error("channels carry different windows")]
    MismatchedWindows,
    #[error("midpoint decoder handles a single channel only")]
    SingleChannelOnly,
    #[error("constraint intervals must be finite, ordered and disjoint")]
    BadConstraint,
    #[error("grids do not match")]
    GridMismatch,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Output grid specification for decoders.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec<T> {
    pub t_start: T,
    pub t_end: T,
    pub n_points: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(t_start: T, t_end: T, n_points: usize) -> Self {
        Self {
            t_start,
            t_end,
            n_points,
        }
    }

    pub fn dt(&self) -> T {
        (self.t_end - self.t_start) / real((self.n_points.max(2) - 1) as f64)
    }

    fn validate(&self, omega: T) -> Result<(), DecodeError> {
        if self.n_points < 2 {
            return Err(DecodeError::Kernel(KernelError::GridTooShort {
                len: self.n_points,
            }));
        }
        if T::PI() / self.dt() <= omega {
            return Err(DecodeError::Kernel(
                KernelError::GridCannotRepresentBandwidth {
                    nyquist: (T::PI() / self.dt()).as_f64(),
                    omega: omega.as_f64(),
                },
            ));
        }
        Ok(())
    }

    fn render(&self, mut f: impl FnMut(T) -> T) -> GridSignal<T> {
        let dt = self.dt();
        let values = (0..self.n_points)
            .map(|i| f(self.t_start + dt * real(i as f64)))
            .collect();
        GridSignal {
            t0: self.t_start,
            dt,
            values,
        }
    }
}

/// Interval integrals one channel pins down: spans between consecutive
/// same-channel spikes and the integral targets recovered from the gaps.
#[derive(Debug, Clone)]
pub struct ConsistencyConstraint<T> {
    intervals: Vec<(T, T)>,
    targets: Vec<T>,
    channel: usize,
}

impl<T: Real> ConsistencyConstraint<T> {
    pub fn new(
        intervals: Vec<(T, T)>,
        targets: Vec<T>,
        channel: usize,
    ) -> Result<Self, DecodeError> {
        if intervals.len() != targets.len() || targets.iter().any(|t| !t.is_finite()) {
            return Err(DecodeError::BadConstraint);
        }
        for w in intervals.windows(2) {
            if !(w[0].1 <= w[1].0) {
                return Err(DecodeError::BadConstraint);
            }
        }
        if intervals
            .iter()
            .any(|&(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(DecodeError::BadConstraint);
        }
        Ok(Self {
            intervals,
            targets,
            channel,
        })
    }

    pub fn from_train(train: &SpikeTrain<T>) -> Result<Self, DecodeError> {
        if train.len() < 2 {
            return Err(DecodeError::TooFewSpikes {
                needed: 2,
                got: train.len(),
            });
        }
        let stream = train.stream();
        let targets = stream_interval_integrals(&stream);
        let intervals = train.times().windows(2).map(|w| (w[0], w[1])).collect();
        Self::new(intervals, targets, 0)
    }

    /// Constraint set of one channel of a merged train.
    pub fn from_multi(
        multi: &crate::encoder::MultiSpikeTrain<T>,
        channel: usize,
    ) -> Result<Self, DecodeError> {
        let times = multi.channel_times(channel);
        if times.len() < 2 {
            return Err(DecodeError::TooFewSpikes {
                needed: 2,
                got: times.len(),
            });
        }
        let p = multi.config().params();
        let two_kd = real::<T>(2.0) * p.kappa * p.delta;
        let targets = times
            .windows(2)
            .map(|w| two_kd - p.bias * (w[1] - w[0]))
            .collect();
        let intervals = times.windows(2).map(|w| (w[0], w[1])).collect();
        Self::new(intervals, targets, channel)
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn channel(&self) -> usize {
        self.channel
    }
}

/// Merges single-channel trains into one stream, checking that parameters
/// and windows agree.
pub fn merge_trains<T: Real>(trains: &[&SpikeTrain<T>]) -> Result<SpikeStream<T>, DecodeError> {
    let first = trains
        .first()
        .ok_or(DecodeError::TooFewSpikes { needed: 1, got: 0 })?;
    let params = *first.params();
    let window = first.window();
    for t in trains {
        if *t.params() != params {
            return Err(DecodeError::MismatchedParams);
        }
        let w = t.window();
        if w.0 != window.0 || w.1 != window.1 {
            return Err(DecodeError::MismatchedWindows);
        }
    }
    let mut merged: Vec<(T, usize)> = Vec::new();
    for (ch, t) in trains.iter().enumerate() {
        merged.extend(t.times().iter().map(|&tt| (tt, ch)));
    }
    merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(SpikeStream {
        times: merged.iter().map(|e| e.0).collect(),
        channels: merged.iter().map(|e| e.1).collect(),
        m: trains.len(),
        params,
        window,
    })
}

// ---------------------------------------------------------------------------
// Grid operators
// ---------------------------------------------------------------------------

/// Half-open index run of grid points lying in `[a, b)`.
fn snap_block<T: Real>(grid: &GridSignal<T>, a: T, b: T) -> (usize, usize) {
    let start = first_index_at_or_after(grid, a);
    let end = first_index_at_or_after(grid, b);
    (start.min(grid.len()), end.min(grid.len()))
}

fn first_index_at_or_after<T: Real>(grid: &GridSignal<T>, t: T) -> usize {
    let x = (t - grid.t0) / grid.dt;
    let r = x.round();
    let idx = if (x - r).abs() < real(1e-9) {
        r
    } else {
        x.ceil()
    };
    idx.max(T::zero()).to_usize().unwrap_or(0)
}

/// Rectangle-rule integral of the snapped block of each interval.
pub fn measure_intervals<T: Real>(grid: &GridSignal<T>, intervals: &[(T, T)]) -> Vec<T> {
    intervals
        .iter()
        .map(|&(a, b)| {
            let (s, e) = snap_block(grid, a, b);
            let mut acc = T::zero();
            for &v in &grid.values[s..e] {
                acc += v;
            }
            grid.dt * acc
        })
        .collect()
}

/// Replaces the signal on each interval block by its block average and
/// zeroes everything outside. An exact orthogonal projection.
pub fn interval_average<T: Real>(y: &GridSignal<T>, intervals: &[(T, T)]) -> GridSignal<T> {
    let mut out = GridSignal {
        t0: y.t0,
        dt: y.dt,
        values: vec![T::zero(); y.len()],
    };
    for &(a, b) in intervals {
        let (s, e) = snap_block(y, a, b);
        if e <= s {
            continue;
        }
        let mut acc = T::zero();
        for &v in &y.values[s..e] {
            acc += v;
        }
        let avg = acc / real((e - s) as f64);
        for v in &mut out.values[s..e] {
            *v = avg;
        }
    }
    out
}

/// Shifts the signal on each interval block by a constant so the measured
/// block integral equals the constraint target. Degenerate intervals
/// (shorter than 1e-12 or without grid points) are skipped.
pub fn project_consistency<T: Real>(
    y: &GridSignal<T>,
    constraint: &ConsistencyConstraint<T>,
) -> GridSignal<T> {
    let mut out = y.clone();
    for (&(a, b), &target) in constraint.intervals.iter().zip(constraint.targets.iter()) {
        if b - a < real(1e-12) {
            continue;
        }
        let (s, e) = snap_block(y, a, b);
        if e <= s {
            continue;
        }
        let mut acc = T::zero();
        for &v in &y.values[s..e] {
            acc += v;
        }
        let measured = y.dt * acc;
        let correction = (target - measured) / (y.dt * real((e - s) as f64));
        for v in &mut out.values[s..e] {
            *v += correction;
        }
    }
    out
}

/// Ideal low-pass projection of a grid signal (spectral mask).
pub fn project_bandlimit<T: Real>(
    y: &GridSignal<T>,
    omega: T,
) -> Result<GridSignal<T>, DecodeError> {
    let mask = SpectralMask::new(y.len(), y.dt, omega)?;
    Ok(GridSignal {
        t0: y.t0,
        dt: y.dt,
        values: mask.apply(&y.values),
    })
}

/// Trapezoid integral of the linear interpolant of `y` over `[a, b]`,
/// with interpolated partial cells at both ends.
pub fn integrate_grid<T: Real>(y: &GridSignal<T>, a: T, b: T) -> T {
    if !(b > a) || y.len() < 2 {
        return T::zero();
    }
    let lo = a.max(y.t0);
    let hi = b.min(y.t_end());
    if !(hi > lo) {
        return T::zero();
    }
    let value_at = |t: T| -> T {
        let x = ((t - y.t0) / y.dt).max(T::zero());
        let i = x.floor().to_usize().unwrap_or(0).min(y.len() - 2);
        let frac = x - real(i as f64);
        y.values[i] + (y.values[i + 1] - y.values[i]) * frac
    };
    let first_full = first_index_at_or_after(y, lo);
    let last_full = {
        let x = (hi - y.t0) / y.dt;
        let r = x.round();
        let idx = if (x - r).abs() < real(1e-9) {
            r
        } else {
            x.floor()
        };
        idx.max(T::zero()).to_usize().unwrap_or(0).min(y.len() - 1)
    };
    if first_full > last_full {
        // Entire span inside one cell.
        return (value_at(lo) + value_at(hi)) / real(2.0) * (hi - lo);
    }
    let mut acc = T::zero();
    // Partial head [lo, t_first].
    let t_first = y.time_at(first_full);
    if t_first > lo {
        acc += (value_at(lo) + y.values[first_full]) / real(2.0) * (t_first - lo);
    }
    // Full cells.
    for i in first_full..last_full {
        acc += (y.values[i] + y.values[i + 1]) / real(2.0) * y.dt;
    }
    // Partial tail [t_last, hi].
    let t_last = y.time_at(last_full);
    if hi > t_last {
        acc += (y.values[last_full] + value_at(hi)) / real(2.0) * (hi - t_last);
    }
    acc
}

// ---------------------------------------------------------------------------
// Analytic basis shared by the decoders
// ---------------------------------------------------------------------------

/// Value at `t` of the unit indicator of `[a, b)` convolved with the sinc
/// kernel of bandwidth `omega`.
pub fn smoothed_indicator<T: Real>(omega: T, a: T, b: T, t: T) -> T {
    (si(omega * (t - a)) - si(omega * (t - b))) / T::PI()
}

/// Integral of the smoothed indicator of `[a, b)` over `[c, d]`, in closed
/// form via the antiderivative of the sine integral.
pub fn smoothed_indicator_integral<T: Real>(omega: T, (a, b): (T, T), (c, d): (T, T)) -> T {
    (si_antiderivative(omega * (d - a))
        - si_antiderivative(omega * (d - b))
        - si_antiderivative(omega * (c - a))
        + si_antiderivative(omega * (c - b)))
        / (T::PI() * omega)
}

/// Matrix of smoothed-indicator integrals: row `l` spans the merged
/// same-channel interval `[t_l, t_{l+m}]`, column `k` is the basis function
/// on the merged interval `[t_k, t_{k+1})`.
fn constraint_matrix<T: Real>(times: &[T], m: usize, omega: T) -> DenseMatrix<T> {
    let n = times.len();
    let rows = n - m;
    let cols = n - 1;
    // F(omega (t_j - t_i)) / (pi omega) for every spike pair.
    let scale = T::one() / (T::PI() * omega);
    let f_table = DenseMatrix::from_fn(n, n, |j, i| {
        si_antiderivative(omega * (times[j] - times[i])) * scale
    });
    DenseMatrix::from_fn(rows, cols, |l, k| {
        f_table[(l + m, k)] - f_table[(l + m, k + 1)] - f_table[(l, k)] + f_table[(l, k + 1)]
    })
}

/// Renders a coefficient vector in the smoothed-indicator basis onto a grid.
fn render_smoothed<T: Real>(
    times: &[T],
    coeffs: &[T],
    omega: T,
    grid: &GridSpec<T>,
) -> GridSignal<T> {
    let n = times.len();
    let mut si_at = vec![T::zero(); n];
    grid.render(|t| {
        for (s, &tk) in si_at.iter_mut().zip(times.iter()) {
            *s = si(omega * (t - tk));
        }
        let mut acc = T::zero();
        for (k, &c) in coeffs.iter().enumerate() {
            acc += c * (si_at[k] - si_at[k + 1]);
        }
        acc / T::PI()
    })
}

// ---------------------------------------------------------------------------
// Decoders
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMethod {
    Iterative,
    ClosedForm,
    MidpointClosedForm,
}

impl DecodeMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecodeMethod::Iterative => "iterative",
            DecodeMethod::ClosedForm => "closed_form",
            DecodeMethod::MidpointClosedForm => "midpoint_closed_form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    /// Residual reached the tolerance.
    Converged,
    /// Iteration budget exhausted before the tolerance.
    MaxIterations,
    /// Residual stopped improving for more than ten consecutive iterations;
    /// typically the bandwidth exceeds the reconstructible bound.
    ResidualPlateau,
}

impl DecodeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecodeStatus::Converged => "converged",
            DecodeStatus::MaxIterations => "max_iterations",
            DecodeStatus::ResidualPlateau => "residual_plateau",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecodeResult<T> {
    pub estimate: GridSignal<T>,
    /// Coefficients in the decoder's reconstruction basis.
    pub coefficients: Vec<T>,
    pub iterations: usize,
    /// Max-abs consistency residual per iteration.
    pub residual_history: Vec<T>,
    pub method: DecodeMethod,
    pub status: DecodeStatus,
    pub condition_number: Option<T>,
    pub effective_rank: Option<usize>,
    /// True when the pseudoinverse discarded part of the spectrum.
    pub truncated_spectrum: bool,
    /// Residual history nonincreasing after the first three iterations.
    pub residual_monotone: bool,
}

/// Options for [`decode_iterative`].
#[derive(Debug, Clone)]
pub struct IterativeOptions<T> {
    pub max_iter: usize,
    pub tol: T,
    /// Optional starting estimate; its interval integrals are measured on
    /// the grid and the iteration reconstructs only the remainder.
    pub init: Option<GridSignal<T>>,
}

impl<T: Real> Default for IterativeOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: real(1e-9),
            init: None,
        }
    }
}

const PLATEAU_LIMIT: usize = 10;
/// Constraint spans shorter than this are skipped as degenerate.
const DEGENERATE_SPAN: f64 = 1e-12;

/// Iterative decoder: averaged per-channel corrections followed by exact
/// bandlimiting, iterated from the recovered interval integrals.
pub fn decode_iterative<T: Real>(
    stream: &SpikeStream<T>,
    omega: T,
    grid: &GridSpec<T>,
    opts: &IterativeOptions<T>,
) -> Result<DecodeResult<T>, DecodeError> {
    grid.validate(omega)?;
    let n = stream.times.len();
    let m = stream.m.max(1);
    if n < m + 1 {
        return Err(DecodeError::TooFewSpikes {
            needed: m + 1,
            got: n,
        });
    }
    let times = &stream.times;
    let mut targets = stream_interval_integrals(stream);
    if let Some(init) = &opts.init {
        for (l, target) in targets.iter_mut().enumerate() {
            *target -= integrate_grid(init, times[l], times[l + m]);
        }
    }
    let lengths: Vec<T> = (0..n - m).map(|l| times[l + m] - times[l]).collect();
    let usable: Vec<bool> = lengths
        .iter()
        .map(|&len| len > real(DEGENERATE_SPAN))
        .collect();
    let h = constraint_matrix(times, m, omega);

    let rows = n - m;
    let cols = n - 1;
    let mut coeffs = vec![T::zero(); cols];
    let mut history: Vec<T> = Vec::new();
    let mut status = DecodeStatus::MaxIterations;
    let mut iterations = opts.max_iter;
    let mut stall = 0usize;
    let inv_m = T::one() / real(m as f64);

    for iter in 0..=opts.max_iter {
        let predicted = h.matvec(&coeffs);
        let mut res_norm = T::zero();
        let mut residual = vec![T::zero(); rows];
        for l in 0..rows {
            if !usable[l] {
                continue;
            }
            let r = targets[l] - predicted[l];
            residual[l] = r;
            res_norm = res_norm.max(r.abs());
        }
        history.push(res_norm);

        if res_norm <= opts.tol {
            status = DecodeStatus::Converged;
            iterations = iter;
            break;
        }
        if iter == opts.max_iter {
            status = DecodeStatus::MaxIterations;
            iterations = iter;
            break;
        }
        if history.len() >= 2 {
            let prev = history[history.len() - 2];
            if res_norm >= prev * (T::one() - real(1e-12)) {
                stall += 1;
            } else {
                stall = 0;
            }
            if stall > PLATEAU_LIMIT {
                status = DecodeStatus::ResidualPlateau;
                iterations = iter;
                break;
            }
        }

        // Each channel spreads its residual uniformly over its own span,
        // i.e. over m consecutive merged intervals; channels are averaged.
        for l in 0..rows {
            if !usable[l] {
                continue;
            }
            let w = residual[l] / lengths[l] * inv_m;
            for c in coeffs.iter_mut().skip(l).take(m) {
                *c += w;
            }
        }
    }

    let mut estimate = render_smoothed(times, &coeffs, omega, grid);
    if let Some(init) = &opts.init {
        if !estimate.same_grid(init) {
            return Err(DecodeError::GridMismatch);
        }
        for (v, &i) in estimate.values.iter_mut().zip(init.values.iter()) {
            *v += i;
        }
    }

    Ok(DecodeResult {
        estimate,
        coefficients: coeffs,
        iterations,
        residual_monotone: monotone_after(&history, 3),
        residual_history: history,
        method: DecodeMethod::Iterative,
        status,
        condition_number: None,
        effective_rank: None,
        truncated_spectrum: false,
    })
}

/// Closed-form decoder: least-squares solve of the interval-integral system
/// in the smoothed-indicator basis via the truncated pseudoinverse.
pub fn decode_closed_form<T: Real>(
    stream: &SpikeStream<T>,
    omega: T,
    grid: &GridSpec<T>,
    rel_cutoff: T,
) -> Result<DecodeResult<T>, DecodeError> {
    grid.validate(omega)?;
    let n = stream.times.len();
    let m = stream.m.max(1);
    if n < m + 1 {
        return Err(DecodeError::TooFewSpikes {
            needed: m + 1,
            got: n,
        });
    }
    let targets = stream_interval_integrals(stream);
    let h = constraint_matrix(&stream.times, m, omega);
    let pinv = pinv_truncated(&h, rel_cutoff)?;
    let coeffs = pinv.matrix.matvec(&targets);
    let estimate = render_smoothed(&stream.times, &coeffs, omega, grid);

    let predicted = h.matvec(&coeffs);
    let residual = targets
        .iter()
        .zip(predicted.iter())
        .map(|(&q, &p)| (q - p).abs())
        .fold(T::zero(), T::max);

    Ok(DecodeResult {
        estimate,
        coefficients: coeffs,
        iterations: 0,
        residual_history: vec![residual],
        method: DecodeMethod::ClosedForm,
        status: DecodeStatus::Converged,
        condition_number: Some(pinv.condition_number()),
        effective_rank: Some(pinv.effective_rank),
        truncated_spectrum: pinv.truncated(),
        residual_monotone: true,
    })
}

/// Single-channel closed form in the midpoint sinc basis: one kernel per
/// inter-spike midpoint instead of one smoothed indicator per interval.
pub fn decode_closed_form_midpoint<T: Real>(
    stream: &SpikeStream<T>,
    omega: T,
    grid: &GridSpec<T>,
    rel_cutoff: T,
) -> Result<DecodeResult<T>, DecodeError> {
    grid.validate(omega)?;
    if stream.m != 1 {
        return Err(DecodeError::SingleChannelOnly);
    }
    let n = stream.times.len();
    if n < 2 {
        return Err(DecodeError::TooFewSpikes { needed: 2, got: n });
    }
    let times = &stream.times;
    let targets = stream_interval_integrals(stream);
    let midpoints: Vec<T> = times
        .windows(2)
        .map(|w| (w[0] + w[1]) / real(2.0))
        .collect();
    let k = midpoints.len();
    let h = DenseMatrix::from_fn(k, k, |l, j| {
        (si(omega * (times[l + 1] - midpoints[j])) - si(omega * (times[l] - midpoints[j])))
            / T::PI()
    });
    let pinv = pinv_truncated(&h, rel_cutoff)?;
    let coeffs = pinv.matrix.matvec(&targets);
    let estimate = grid.render(|t| {
        let mut acc = T::zero();
        for (&c, &s) in coeffs.iter().zip(midpoints.iter()) {
            acc += c * sinc_kernel(omega, t - s);
        }
        acc
    });

    let predicted = h.matvec(&coeffs);
    let residual = targets
        .iter()
        .zip(predicted.iter())
        .map(|(&q, &p)| (q - p).abs())
        .fold(T::zero(), T::max);

    Ok(DecodeResult {
        estimate,
        coefficients: coeffs,
        iterations: 0,
        residual_history: vec![residual],
        method: DecodeMethod::MidpointClosedForm,
        status: DecodeStatus::Converged,
        condition_number: Some(pinv.condition_number()),
        effective_rank: Some(pinv.effective_rank),
        truncated_spectrum: pinv.truncated(),
        residual_monotone: true,
    })
}

fn monotone_after<T: Real>(history: &[T], skip: usize) -> bool {
    history
        .iter()
        .skip(skip)
        .zip(history.iter().skip(skip + 1))
        .all(|(&a, &b)| b <= a * (T::one() + real(1e-9)))
}
