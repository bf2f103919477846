//! Integrate-and-fire time encoding.
//!
//! A single channel integrates `(x(t) + b) / kappa` from a starting level in
//! `[-delta, delta)`; each time the level reaches `delta` a spike time is
//! recorded and the integrator resets to `-delta`. Consecutive spikes
//! therefore pin the signal integral over the inter-spike interval to
//! `2 kappa delta - b (t_{k+1} - t_k)`, which is all a decoder needs.
//!
//! An M-channel encoder runs M identical machines whose integrators are
//! offset by fixed shifts, realized here as initial integrator values. With
//! nonzero shifts the merged spike times interleave cyclically.

use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;
use crate::scalar::{real, Real};
use crate::signals::{GridSignal, InputSignal};

#[derive(Debug, thiserror::Error)]
pub enum EncodeError {
    #[error("encoder parameters must be strictly positive")]
    InvalidParams,
    #[error("initial integrator value must lie in [-delta, delta)")]
    InvalidInitialState,
    #[error("signal produced a non-finite value")]
    NonFiniteSignal,
    #[error("zero shift: channels degenerate")]
    ZeroShift,
    #[error("shifts must lie in (0, 2 delta] and sum to a multiple of 2 delta")]
    BadShiftCycle,
    #[error("need at least {needed} spikes, got {got}")]
    TooFewSpikes { needed: usize, got: usize },
    #[error("window is degenerate or not finite")]
    BadWindow,
}

/// Parameters of one integrate-and-fire machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct TemParams<T> {
    pub kappa: T,
    pub delta: T,
    pub bias: T,
}

impl<T: Real> TemParams<T> {
    pub fn new(kappa: T, delta: T, bias: T) -> Result<Self, EncodeError> {
        let p = Self { kappa, delta, bias };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        let ok = self.kappa > T::zero()
            && self.delta > T::zero()
            && self.bias > T::zero()
            && self.kappa.is_finite()
            && self.delta.is_finite()
            && self.bias.is_finite();
        if ok {
            Ok(())
        } else {
            Err(EncodeError::InvalidParams)
        }
    }

    /// Upper bound on same-channel spike spacing for inputs bounded by `c`,
    /// valid when `bias > c`.
    pub fn max_gap(&self, c: T) -> Option<T> {
        if self.bias > c {
            Some(real::<T>(2.0) * self.kappa * self.delta / (self.bias - c))
        } else {
            None
        }
    }

    /// True when spiking is guaranteed to make progress (`bias > c`).
    pub fn guarantees_progress(&self, c: T) -> bool {
        self.bias > c
    }

    /// Bandwidth bound for unique M-channel reconstruction:
    /// `M pi (bias - c) / (2 kappa delta)`.
    pub fn bandwidth_bound(&self, channels: usize, c: T) -> T {
        real::<T>(channels as f64) * T::PI() * (self.bias - c)
            / (real::<T>(2.0) * self.kappa * self.delta)
    }
}

/// Strictly increasing spike times of one channel.
#[derive(Debug, Clone)]
pub struct SpikeTrain<T> {
    times: Vec<T>,
    params: TemParams<T>,
    window: (T, T),
}

impl<T: Real> SpikeTrain<T> {
    pub fn from_parts(times: Vec<T>, params: TemParams<T>, window: (T, T)) -> Self {
        debug_assert!(times.windows(2).all(|w| w[0] < w[1]));
        Self {
            times,
            params,
            window,
        }
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn params(&self) -> &TemParams<T> {
        &self.params
    }

    pub fn window(&self) -> (T, T) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn gaps(&self) -> Vec<T> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Spike rate `(count - 1) / span` over the spiking interval.
    pub fn rate(&self) -> Option<T> {
        if self.times.len() < 2 {
            return None;
        }
        let span = *self.times.last().unwrap() - self.times[0];
        Some(real::<T>((self.times.len() - 1) as f64) / span)
    }

    /// Merged single-channel view for the decoders.
    pub fn stream(&self) -> SpikeStream<T> {
        SpikeStream {
            times: self.times.clone(),
            channels: vec![0; self.times.len()],
            m: 1,
            params: self.params,
            window: self.window,
        }
    }
}

/// One spike with channel provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SpikeEvent<T> {
    pub time: T,
    pub channel: usize,
}

/// Shared parameters plus integrator shifts of an M-channel encoder.
///
/// Shifts are realized as initial integrator values: channel one starts at
/// `-delta` and channel `i+1` starts at `(y_i(start) + alpha_i) mod 2 delta`,
/// mapped into `[-delta, delta)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct MultiChannelConfig<T> {
    params: TemParams<T>,
    shifts: Vec<T>,
    initial_values: Vec<T>,
}

impl<T: Real> MultiChannelConfig<T> {
    /// Builds a configuration from the shift cycle `alpha_1 .. alpha_M`.
    /// Every shift must be nonzero and the cycle must close: the sum is a
    /// multiple of `2 delta`.
    pub fn new(params: TemParams<T>, shifts: Vec<T>) -> Result<Self, EncodeError> {
        params.validate()?;
        if shifts.is_empty() {
            return Err(EncodeError::BadShiftCycle);
        }
        let two_delta = real::<T>(2.0) * params.delta;
        if shifts.iter().any(|&a| a == T::zero()) {
            return Err(EncodeError::ZeroShift);
        }
        if shifts
            .iter()
            .any(|&a| !(a > T::zero()) || a > two_delta || !a.is_finite())
        {
            return Err(EncodeError::BadShiftCycle);
        }
        let total: T = shifts.iter().fold(T::zero(), |acc, &a| acc + a);
        let cycles = total / two_delta;
        if (cycles - cycles.round()).abs() > real(1e-9) {
            return Err(EncodeError::BadShiftCycle);
        }

        let mut initial_values = Vec::with_capacity(shifts.len());
        let mut y = -params.delta;
        initial_values.push(y);
        for &alpha in shifts.iter().take(shifts.len() - 1) {
            y = wrap_level(y + alpha, params.delta);
            initial_values.push(y);
        }
        Ok(Self {
            params,
            shifts,
            initial_values,
        })
    }

    /// Equal shifts `2 delta / m` on every channel.
    pub fn equal_shifts(m: usize, params: TemParams<T>) -> Result<Self, EncodeError> {
        if m == 0 {
            return Err(EncodeError::BadShiftCycle);
        }
        let alpha = real::<T>(2.0) * params.delta / real(m as f64);
        Self::new(params, vec![alpha; m])
    }

    /// Two channels where the second leads the first by `alpha1`; the
    /// complementary shift closes the cycle.
    pub fn leading_pair(alpha1: T, params: TemParams<T>) -> Result<Self, EncodeError> {
        let two_delta = real::<T>(2.0) * params.delta;
        Self::new(params, vec![alpha1, two_delta - alpha1])
    }

    pub fn channels(&self) -> usize {
        self.shifts.len()
    }

    pub fn params(&self) -> &TemParams<T> {
        &self.params
    }

    pub fn shifts(&self) -> &[T] {
        &self.shifts
    }

    pub fn initial_values(&self) -> &[T] {
        &self.initial_values
    }

    pub fn min_shift(&self) -> T {
        self.shifts.iter().fold(T::infinity(), |acc, &a| acc.min(a))
    }
}

/// Maps an integrator level into `[-delta, delta)`.
fn wrap_level<T: Real>(y: T, delta: T) -> T {
    let two_delta = real::<T>(2.0) * delta;
    let mut v = (y + delta) % two_delta;
    if v < T::zero() {
        v += two_delta;
    }
    v - delta
}

/// Time-sorted merge of M channels with provenance.
#[derive(Debug, Clone)]
pub struct MultiSpikeTrain<T> {
    events: Vec<SpikeEvent<T>>,
    config: MultiChannelConfig<T>,
    window: (T, T),
    /// Set when jitter forced a re-sort of the merged order.
    reordered_by_jitter: bool,
}

impl<T: Real> MultiSpikeTrain<T> {
    pub fn events(&self) -> &[SpikeEvent<T>] {
        &self.events
    }

    pub fn config(&self) -> &MultiChannelConfig<T> {
        &self.config
    }

    pub fn window(&self) -> (T, T) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn reordered_by_jitter(&self) -> bool {
        self.reordered_by_jitter
    }

    pub fn times(&self) -> Vec<T> {
        self.events.iter().map(|e| e.time).collect()
    }

    pub fn channel_times(&self, channel: usize) -> Vec<T> {
        self.events
            .iter()
            .filter(|e| e.channel == channel)
            .map(|e| e.time)
            .collect()
    }

    /// Exact cyclic interleaving: the channel pattern repeats with period M,
    /// so consecutive spikes of one channel are exactly M apart in the merge.
    pub fn is_interleaved(&self) -> bool {
        let m = self.config.channels();
        if m <= 1 {
            return true;
        }
        self.events
            .iter()
            .zip(self.events.iter().skip(m))
            .all(|(a, b)| a.channel == b.channel)
    }

    /// Minimum gap between consecutive merged spikes.
    pub fn min_gap(&self) -> Option<T> {
        self.events
            .windows(2)
            .map(|w| w[1].time - w[0].time)
            .fold(None, |acc, g| Some(acc.map_or(g, |a: T| a.min(g))))
    }

    /// Merged view for the decoders.
    pub fn stream(&self) -> SpikeStream<T> {
        SpikeStream {
            times: self.events.iter().map(|e| e.time).collect(),
            channels: self.events.iter().map(|e| e.channel).collect(),
            m: self.config.channels(),
            params: self.config.params,
            window: self.window,
        }
    }
}

/// Merged spike stream: everything a decoder is allowed to see.
///
/// Carries no shift information; reconstruction needs only
/// `(kappa, delta, bias)` and the channel count.
#[derive(Debug, Clone)]
pub struct SpikeStream<T> {
    pub times: Vec<T>,
    pub channels: Vec<usize>,
    pub m: usize,
    pub params: TemParams<T>,
    pub window: (T, T),
}

impl<T: Real> SpikeStream<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Absolute tolerance used to locate spike times.
pub fn spike_time_tolerance<T: Real>(window: (T, T)) -> T {
    let span = (window.1 - window.0).abs();
    real::<T>(1e-12).max(span * T::epsilon() * real(8.0))
}

/// Encodes one channel. `y0` is the integrator level at the window start.
///
/// Each spike time solves
/// `integral(x, t_prev, t) + bias (t - t_prev) = kappa * rise`
/// by bisection; the rise is `delta - y0` for the first spike and `2 delta`
/// afterwards. When `bias <= max |x|` the encoder still runs best-effort and
/// simply stops when no further crossing lies inside the window.
pub fn encode<T: Real, S: InputSignal<T>>(
    input: &S,
    window: (T, T),
    params: &TemParams<T>,
    y0: T,
) -> Result<SpikeTrain<T>, EncodeError> {
    params.validate()?;
    let (t_start, t_end) = window;
    if !t_start.is_finite() || !t_end.is_finite() || !(t_end > t_start) {
        return Err(EncodeError::BadWindow);
    }
    if !(y0 >= -params.delta) || y0 >= params.delta {
        return Err(EncodeError::InvalidInitialState);
    }

    let tol = spike_time_tolerance(window);
    let c = input.bracket_bound();
    if !c.is_finite() {
        return Err(EncodeError::NonFiniteSignal);
    }

    let mut times = Vec::new();
    let mut t_prev = t_start;
    let mut rise = params.delta - y0;
    loop {
        let target = params.kappa * rise;
        match next_crossing(input, params, t_prev, target, t_end, c, tol)? {
            Some(t) => {
                times.push(t);
                t_prev = t;
                rise = real::<T>(2.0) * params.delta;
            }
            None => break,
        }
    }
    Ok(SpikeTrain::from_parts(times, *params, window))
}

/// Finds the next threshold crossing after `from`, or `None` when the
/// integrator cannot reach the threshold inside the window.
fn next_crossing<T: Real, S: InputSignal<T>>(
    input: &S,
    params: &TemParams<T>,
    from: T,
    target: T,
    t_end: T,
    c: T,
    tol: T,
) -> Result<Option<T>, EncodeError> {
    let psi = |t: T| input.integral(from, t) + params.bias * (t - from) - target;

    let at_end = psi(t_end);
    if !at_end.is_finite() {
        return Err(EncodeError::NonFiniteSignal);
    }
    if at_end < T::zero() {
        return Ok(None);
    }

    // With bias > c the crossing lies within target / (bias - c) of the
    // start; otherwise grow the bracket geometrically up to the window end.
    let mut hi = if params.bias > c {
        (from + target / (params.bias - c)).min(t_end)
    } else {
        let mut h = from + params.kappa * params.delta / params.bias;
        while h < t_end && psi(h) < T::zero() {
            h = from + (h - from) * real(2.0);
        }
        h.min(t_end)
    };
    if psi(hi) < T::zero() {
        hi = t_end;
    }
    let mut lo = from;

    // psi is strictly increasing (bias + x > 0 is not required for
    // correctness of bisection, only for the bracket guarantee checked
    // above via psi(t_end) >= 0).
    let mut guard = 0usize;
    while hi - lo > tol && guard < 200 {
        let mid = (lo + hi) / real(2.0);
        let v = psi(mid);
        if !v.is_finite() {
            return Err(EncodeError::NonFiniteSignal);
        }
        if v < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        guard += 1;
    }
    Ok(Some(((lo + hi) / real(2.0)).min(t_end)))
}

/// Discrete cross-check encoder: cumulative-sum integration on a uniform
/// grid of `steps` samples, crossing times linearly interpolated.
pub fn encode_discrete<T: Real, S: InputSignal<T>>(
    input: &S,
    window: (T, T),
    params: &TemParams<T>,
    y0: T,
    steps: usize,
) -> Result<SpikeTrain<T>, EncodeError> {
    params.validate()?;
    let (t_start, t_end) = window;
    if !(y0 >= -params.delta) || y0 >= params.delta {
        return Err(EncodeError::InvalidInitialState);
    }
    let n = steps.max(2);
    let dt = (t_end - t_start) / real(n as f64);
    let two_kd = real::<T>(2.0) * params.kappa * params.delta;

    // Cumulative integral of (x + bias); the k-th spike is the crossing of
    // level kappa (delta - y0) + 2 kappa delta k.
    let mut times = Vec::new();
    let mut level = params.kappa * (params.delta - y0);
    let mut acc = T::zero();
    let mut t = t_start;
    for i in 0..n {
        let v = input.value(t) + params.bias;
        if !v.is_finite() {
            return Err(EncodeError::NonFiniteSignal);
        }
        let next_acc = acc + v * dt;
        let t_next = t_start + dt * real((i + 1) as f64);
        while next_acc >= level {
            let frac = (level - acc) / (next_acc - acc);
            times.push(t + frac * (t_next - t));
            level += two_kd;
        }
        acc = next_acc;
        t = t_next;
    }
    Ok(SpikeTrain::from_parts(times, *params, window))
}

/// Integrator level on a uniform grid, given the spike times of the channel.
pub fn integrator_trace<T: Real, S: InputSignal<T>>(
    input: &S,
    train: &SpikeTrain<T>,
    y0: T,
    n_points: usize,
) -> GridSignal<T> {
    let (t_start, t_end) = train.window();
    let n = n_points.max(2);
    let dt = (t_end - t_start) / real((n - 1) as f64);
    let params = train.params();
    let values = (0..n)
        .map(|i| {
            let t = t_start + dt * real(i as f64);
            // Most recent reset at or before t.
            let idx = train.times().partition_point(|&s| s <= t);
            let (t_ref, y_ref) = if idx == 0 {
                (t_start, y0)
            } else {
                (train.times()[idx - 1], -params.delta)
            };
            y_ref + (input.integral(t_ref, t) + params.bias * (t - t_ref)) / params.kappa
        })
        .collect();
    GridSignal {
        t0: t_start,
        dt,
        values,
    }
}

/// Runs one encoder per channel from its shift-derived initial value and
/// merges the outputs in time order.
pub fn encode_multi<T: Real, S: InputSignal<T>>(
    input: &S,
    window: (T, T),
    config: &MultiChannelConfig<T>,
) -> Result<MultiSpikeTrain<T>, EncodeError> {
    let mut events: Vec<SpikeEvent<T>> = Vec::new();
    for (channel, &y0) in config.initial_values().iter().enumerate() {
        let train = encode(input, window, &config.params, y0)?;
        events.extend(
            train
                .times()
                .iter()
                .map(|&time| SpikeEvent { time, channel }),
        );
    }
    events.sort_by(|a, b| {
        a.time
            .partial_cmp(&b.time)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(MultiSpikeTrain {
        events,
        config: config.clone(),
        window,
        reordered_by_jitter: false,
    })
}

/// Interval integrals recovered from consecutive same-channel spike times:
/// `q_k = 2 kappa delta - bias * gap_k`.
pub fn interval_integrals<T: Real>(train: &SpikeTrain<T>) -> Result<Vec<T>, EncodeError> {
    if train.len() < 2 {
        return Err(EncodeError::TooFewSpikes {
            needed: 2,
            got: train.len(),
        });
    }
    Ok(stream_interval_integrals(&train.stream()))
}

/// Interval integrals of a merged stream. Same-channel neighbours sit `m`
/// apart in the merged order, so row `k` spans `[t_k, t_{k+m}]`.
pub fn interval_integrals_multi<T: Real>(
    multi: &MultiSpikeTrain<T>,
) -> Result<Vec<T>, EncodeError> {
    let stream = multi.stream();
    if stream.len() < stream.m + 1 {
        return Err(EncodeError::TooFewSpikes {
            needed: stream.m + 1,
            got: stream.len(),
        });
    }
    Ok(stream_interval_integrals(&stream))
}

/// `q_k = 2 kappa delta - bias (t_{k+m} - t_k)` over the merged order.
pub fn stream_interval_integrals<T: Real>(stream: &SpikeStream<T>) -> Vec<T> {
    let p = &stream.params;
    let two_kd = real::<T>(2.0) * p.kappa * p.delta;
    stream
        .times
        .iter()
        .zip(stream.times.iter().skip(stream.m))
        .map(|(&a, &b)| two_kd - p.bias * (b - a))
        .collect()
}

/// Rate and separation diagnostics of an encoding.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct RateReport<T> {
    pub per_channel_rate: Vec<T>,
    pub combined_rate: T,
    /// `M (bias - c) / (2 kappa delta)`, the minimum average rate.
    pub rate_bound: T,
    /// Combined rate within a 5% edge allowance of the bound.
    pub rate_ok: bool,
    pub min_merged_gap: Option<T>,
    /// `kappa * min(alpha) / (bias + c)`: merged spikes stay this far apart.
    pub separation_bound: Option<T>,
    pub separation_ok: Option<bool>,
    pub interleaved: Option<bool>,
}

/// Diagnostics for a single channel (`M = 1`).
pub fn diagnostics<T: Real>(train: &SpikeTrain<T>, c: T) -> RateReport<T> {
    let rate = train.rate().unwrap_or(T::zero());
    let p = train.params();
    let bound = (p.bias - c) / (real::<T>(2.0) * p.kappa * p.delta);
    RateReport {
        per_channel_rate: vec![rate],
        combined_rate: rate,
        rate_bound: bound,
        rate_ok: rate >= bound * real(0.95),
        min_merged_gap: train
            .gaps()
            .into_iter()
            .fold(None, |acc, g| Some(acc.map_or(g, |a: T| a.min(g)))),
        separation_bound: None,
        separation_ok: None,
        interleaved: None,
    }
}

/// Diagnostics for a merged multi-channel encoding.
pub fn diagnostics_multi<T: Real>(multi: &MultiSpikeTrain<T>, c: T) -> RateReport<T> {
    let p = multi.config().params();
    let m = multi.config().channels();
    let per_channel_rate: Vec<T> = (0..m)
        .map(|ch| {
            let times = multi.channel_times(ch);
            if times.len() < 2 {
                T::zero()
            } else {
                real::<T>((times.len() - 1) as f64) / (*times.last().unwrap() - times[0])
            }
        })
        .collect();
    let combined_rate = if multi.len() >= 2 {
        let span = multi.events().last().unwrap().time - multi.events()[0].time;
        real::<T>((multi.len() - 1) as f64) / span
    } else {
        T::zero()
    };
    let rate_bound = real::<T>(m as f64) * (p.bias - c) / (real::<T>(2.0) * p.kappa * p.delta);
    let min_gap = multi.min_gap();
    let separation_bound = p.kappa * multi.config().min_shift() / (p.bias + c);
    let sep_tol = real::<T>(1e-9) * separation_bound.max(T::epsilon());
    RateReport {
        per_channel_rate,
        combined_rate,
        rate_bound,
        rate_ok: combined_rate >= rate_bound * real(0.95),
        min_merged_gap: min_gap,
        separation_bound: Some(separation_bound),
        separation_ok: min_gap.map(|g| g >= separation_bound - sep_tol),
        interleaved: Some(multi.is_interleaved()),
    }
}

/// Root-mean-square of the gaps of a merged (or single) time sequence.
fn rms_gap<T: Real>(times: &[T]) -> T {
    if times.len() < 2 {
        return T::zero();
    }
    let mut acc = T::zero();
    for w in times.windows(2) {
        let g = w[1] - w[0];
        acc += g * g;
    }
    (acc / real((times.len() - 1) as f64)).sqrt()
}

/// Jitter scale for a given SNR: `sigma = rms_gap * 10^(-snr_db / 20)`.
pub fn jitter_sigma<T: Real>(times: &[T], snr_db: T) -> T {
    if snr_db == T::infinity() {
        return T::zero();
    }
    rms_gap(times) * real::<T>(10.0).powf(-snr_db / real(20.0))
}

/// Adds Gaussian time jitter to a single-channel train. Infinite `snr_db`
/// is the identity. The result is re-sorted.
pub fn add_time_jitter<T: Real>(train: &SpikeTrain<T>, snr_db: T, seed: u64) -> SpikeTrain<T> {
    let sigma = jitter_sigma(train.times(), snr_db);
    if sigma == T::zero() {
        return train.clone();
    }
    let mut rng = SplitMix64::new(seed);
    let mut times: Vec<T> = train
        .times()
        .iter()
        .map(|&t| t + sigma * rng.gaussian())
        .collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    SpikeTrain {
        times,
        params: *train.params(),
        window: train.window(),
    }
}

/// Adds Gaussian time jitter to a merged train; the sigma is derived from
/// the clean merged gaps. Re-sorting is reported in the result.
pub fn add_time_jitter_multi<T: Real>(
    multi: &MultiSpikeTrain<T>,
    snr_db: T,
    seed: u64,
) -> MultiSpikeTrain<T> {
    let times = multi.times();
    let sigma = jitter_sigma(&times, snr_db);
    if sigma == T::zero() {
        return multi.clone();
    }
    let mut rng = SplitMix64::new(seed);
    let mut events: Vec<SpikeEvent<T>> = multi
        .events()
        .iter()
        .map(|e| SpikeEvent {
            time: e.time + sigma * rng.gaussian(),
            channel: e.channel,
        })
        .collect();
    let sorted = events.windows(2).all(|w| w[0].time <= w[1].time);
    events.sort_by(|a, b| {
        a.time
            .partial_cmp(&b.time)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    MultiSpikeTrain {
        events,
        config: multi.config().clone(),
        window: multi.window(),
        reordered_by_jitter: !sorted,
    }
}
