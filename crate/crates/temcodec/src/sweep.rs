//! Sweep harness: encode/decode trials over grids of bandwidth, channel
//! count, integrator shift and spike-time noise, with deterministic
//! per-trial seeding and CSV-friendly records.
//!
//! Machine parameters follow the simulation protocol: `kappa = delta = 1`
//! and `bias = max |x| + 1` per trial, so the reconstructible bandwidth is
//! `M pi / 2` and only the swept variables move.

use serde::{Deserialize, Serialize};

use crate::decoder::{
    decode_closed_form, decode_iterative, DecodeError, DecodeStatus, GridSpec, IterativeOptions,
};
use crate::encoder::{
    add_time_jitter_multi, diagnostics_multi, encode_multi, EncodeError, MultiChannelConfig,
    TemParams,
};
use crate::rng::derive_seed;
use crate::scalar::{real, Real};
use crate::signals::{BandlimitedSignal, GridSignal, InputSignal, SignalError};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("sweep lists must be non-empty and trials >= 1")]
    BadSpec,
    #[error("log-spaced shifts are defined for two channels")]
    LogShiftNeedsTwoChannels,
    #[error("grids do not match")]
    GridMismatch,
}

/// Mean squared error over the middle 90% of the grid (5% dropped at each
/// end), the figure of merit for all experiments.
pub fn mse_mid90<T: Real>(
    estimate: &GridSignal<T>,
    truth: &GridSignal<T>,
) -> Result<T, SweepError> {
    if !estimate.same_grid(truth) {
        return Err(SweepError::GridMismatch);
    }
    let n = estimate.len();
    let drop = n / 20;
    let kept = n - 2 * drop;
    if kept == 0 {
        return Err(SweepError::GridMismatch);
    }
    let mut acc = T::zero();
    for i in drop..n - drop {
        let d = estimate.values[i] - truth.values[i];
        acc += d * d;
    }
    Ok(acc / real(kept as f64))
}

/// How channel shifts are chosen for each sweep cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftPolicy<T> {
    /// Equal shifts `2 delta / M` on every channel.
    Equal,
    /// Explicit shift cycles, one sweep cell per cycle.
    Explicit(Vec<Vec<T>>),
    /// Two-channel leading shifts `delta * 10^e` for `e` in
    /// `max_exponent ..= min_exponent` (descending), complement closing the
    /// cycle.
    LogSpaced {
        max_exponent: i32,
        min_exponent: i32,
    },
}

impl<T: Real> ShiftPolicy<T> {
    /// Expands the policy into labelled shift cycles for `m` channels.
    pub fn expand(&self, m: usize, delta: T) -> Result<Vec<(String, Vec<T>)>, SweepError> {
        match self {
            ShiftPolicy::Equal => {
                let alpha = real::<T>(2.0) * delta / real(m as f64);
                Ok(vec![("equal".to_string(), vec![alpha; m])])
            }
            ShiftPolicy::Explicit(cycles) => Ok(cycles
                .iter()
                .map(|cycle| {
                    let label = cycle
                        .iter()
                        .map(|a| format!("{}", a.as_f64()))
                        .collect::<Vec<_>>()
                        .join(";");
                    (label, cycle.clone())
                })
                .collect()),
            ShiftPolicy::LogSpaced {
                max_exponent,
                min_exponent,
            } => {
                if m != 2 {
                    return Err(SweepError::LogShiftNeedsTwoChannels);
                }
                let (hi, lo) = (
                    *max_exponent.max(min_exponent),
                    *max_exponent.min(min_exponent),
                );
                Ok((lo..=hi)
                    .rev()
                    .map(|e| {
                        let alpha = delta * real::<T>(10.0f64.powi(e));
                        (
                            format!("1e{e}"),
                            vec![alpha, real::<T>(2.0) * delta - alpha],
                        )
                    })
                    .collect())
            }
        }
    }
}

/// Decoder selection for the sweep.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderChoice {
    #[default]
    ClosedForm,
    Iterative {
        max_iter: usize,
        tol: f64,
    },
}

/// Full sweep specification. Serializes as flat JSON with these exact field
/// names; CLI flags override file values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SweepSpec<T> {
    pub omega_list: Vec<T>,
    pub m_list: Vec<usize>,
    pub shift_policy: ShiftPolicy<T>,
    /// Jitter levels in dB; `null` entries (or an empty list) mean no noise.
    #[serde(default)]
    pub snr_db_list: Vec<Option<T>>,
    pub trials: usize,
    pub seed: u64,
    pub window: (T, T),
    pub grid_points: usize,
    #[serde(default)]
    pub decoder: DecoderChoice,
}

impl<T: Real> SweepSpec<T> {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.omega_list.is_empty() || self.m_list.is_empty() || self.trials == 0 {
            return Err(SweepError::BadSpec);
        }
        Ok(())
    }

    fn snr_levels(&self) -> Vec<Option<T>> {
        if self.snr_db_list.is_empty() {
            vec![None]
        } else {
            self.snr_db_list.clone()
        }
    }
}

/// One trial outcome. `mse_mid90` is NaN when the trial errored; the error
/// column carries the reason.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct TrialRecord<T> {
    pub omega: T,
    pub m: usize,
    pub shift_label: String,
    pub snr_db: Option<T>,
    pub trial: usize,
    pub seed_used: u64,
    pub mse_mid90: T,
    pub iterations: usize,
    pub condition_number: Option<T>,
    pub effective_rank: Option<usize>,
    pub rate_ok: bool,
    pub interleaved: bool,
    pub converged: bool,
    pub runtime_ms: f64,
    pub error: Option<String>,
}

/// Per-cell aggregate of successful trials.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct CellSummary<T> {
    pub omega: T,
    pub m: usize,
    pub shift_label: String,
    pub snr_db: Option<T>,
    pub trials: usize,
    pub failures: usize,
    pub mean_mse: T,
    pub median_mse: T,
    pub median_condition: Option<T>,
}

#[derive(Debug, Clone)]
pub struct SweepResult<T> {
    pub records: Vec<TrialRecord<T>>,
    pub cells: Vec<CellSummary<T>>,
}

struct Cell<T> {
    omega: T,
    m: usize,
    shift_label: String,
    shifts: Vec<T>,
    snr_db: Option<T>,
}

/// Runs the sweep. Expansion order is omega-major, then channels, then
/// shift, then SNR, then trial; per-trial seeds depend only on the indices,
/// so results are independent of scheduling.
pub fn run_sweep<T: Real>(spec: &SweepSpec<T>) -> Result<SweepResult<T>, SweepError> {
    spec.validate()?;
    let delta = T::one();
    let mut cells: Vec<Cell<T>> = Vec::new();
    for &omega in &spec.omega_list {
        for &m in &spec.m_list {
            let shift_cells = spec.shift_policy.expand(m, delta)?;
            for (shift_label, shifts) in shift_cells {
                for snr_db in spec.snr_levels() {
                    cells.push(Cell {
                        omega,
                        m,
                        shift_label: shift_label.clone(),
                        shifts: shifts.clone(),
                        snr_db,
                    });
                }
            }
        }
    }

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials).map(move |t| (c, t)))
        .collect();

    let threads = thread_budget(jobs.len());
    let mut records: Vec<Option<TrialRecord<T>>> = vec![None; jobs.len()];
    if threads <= 1 {
        for (slot, &(c, t)) in records.iter_mut().zip(jobs.iter()) {
            *slot = Some(run_trial(spec, &cells[c], c, t));
        }
    } else {
        let chunk = jobs.len().div_ceil(threads);
        let cells = &cells;
        std::thread::scope(|scope| {
            for (chunk_idx, slot_chunk) in records.chunks_mut(chunk).enumerate() {
                let jobs = &jobs;
                scope.spawn(move || {
                    let base = chunk_idx * chunk;
                    for (off, slot) in slot_chunk.iter_mut().enumerate() {
                        let (c, t) = jobs[base + off];
                        *slot = Some(run_trial(spec, &cells[c], c, t));
                    }
                });
            }
        });
    }
    let records: Vec<TrialRecord<T>> = records.into_iter().map(|r| r.unwrap()).collect();

    let cells_out = cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let cell_records: Vec<&TrialRecord<T>> = records
                [c * spec.trials..(c + 1) * spec.trials]
                .iter()
                .collect();
            summarize(cell, &cell_records)
        })
        .collect();

    Ok(SweepResult {
        records,
        cells: cells_out,
    })
}

fn thread_budget(jobs: usize) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var("TEMCODEC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(available);
    cap.min(jobs.max(1))
}

fn run_trial<T: Real>(
    spec: &SweepSpec<T>,
    cell: &Cell<T>,
    cell_index: usize,
    trial: usize,
) -> TrialRecord<T> {
    let start = std::time::Instant::now();
    let seed = derive_seed(spec.seed, cell_index as u64, trial as u64);
    let outcome = trial_body(spec, cell, seed);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(ok) => TrialRecord {
            omega: cell.omega,
            m: cell.m,
            shift_label: cell.shift_label.clone(),
            snr_db: cell.snr_db,
            trial,
            seed_used: seed,
            mse_mid90: ok.mse,
            iterations: ok.iterations,
            condition_number: ok.condition_number,
            effective_rank: ok.effective_rank,
            rate_ok: ok.rate_ok,
            interleaved: ok.interleaved,
            converged: ok.converged,
            runtime_ms,
            error: None,
        },
        Err(e) => TrialRecord {
            omega: cell.omega,
            m: cell.m,
            shift_label: cell.shift_label.clone(),
            snr_db: cell.snr_db,
            trial,
            seed_used: seed,
            mse_mid90: T::nan(),
            iterations: 0,
            condition_number: None,
            effective_rank: None,
            rate_ok: false,
            interleaved: false,
            converged: false,
            runtime_ms,
            error: Some(e),
        },
    }
}

struct TrialOutcome<T> {
    mse: T,
    iterations: usize,
    condition_number: Option<T>,
    effective_rank: Option<usize>,
    rate_ok: bool,
    interleaved: bool,
    converged: bool,
}

fn trial_body<T: Real>(
    spec: &SweepSpec<T>,
    cell: &Cell<T>,
    seed: u64,
) -> Result<TrialOutcome<T>, String> {
    let signal = BandlimitedSignal::random(cell.omega, spec.window, seed)
        .map_err(|e: SignalError| e.to_string())?;
    let c = signal.amplitude_bound();
    let params =
        TemParams::new(T::one(), T::one(), c + T::one()).map_err(|e: EncodeError| e.to_string())?;
    let config = MultiChannelConfig::new(params, cell.shifts.clone())
        .map_err(|e: EncodeError| e.to_string())?;
    let multi = encode_multi(&signal, spec.window, &config).map_err(|e| e.to_string())?;

    let report = diagnostics_multi(&multi, c);
    let multi = match cell.snr_db {
        Some(snr) => add_time_jitter_multi(&multi, snr, seed ^ 0x005E_ED1E_550F_u64),
        None => multi,
    };

    let grid = GridSpec::new(spec.window.0, spec.window.1, spec.grid_points);
    let stream = multi.stream();
    let decoded = match &spec.decoder {
        DecoderChoice::ClosedForm => decode_closed_form(&stream, cell.omega, &grid, real(1e-8)),
        DecoderChoice::Iterative { max_iter, tol } => decode_iterative(
            &stream,
            cell.omega,
            &grid,
            &IterativeOptions {
                max_iter: *max_iter,
                tol: real(*tol),
                init: None,
            },
        ),
    }
    .map_err(|e: DecodeError| e.to_string())?;

    let truth = signal
        .to_grid(spec.grid_points)
        .map_err(|e| e.to_string())?;
    let mse = mse_mid90(&decoded.estimate, &truth).map_err(|e| e.to_string())?;

    Ok(TrialOutcome {
        mse,
        iterations: decoded.iterations,
        condition_number: decoded.condition_number,
        effective_rank: decoded.effective_rank,
        rate_ok: report.rate_ok,
        interleaved: report.interleaved.unwrap_or(true),
        converged: decoded.status == DecodeStatus::Converged,
    })
}

fn summarize<T: Real>(cell: &Cell<T>, records: &[&TrialRecord<T>]) -> CellSummary<T> {
    let good: Vec<&&TrialRecord<T>> = records.iter().filter(|r| r.error.is_none()).collect();
    let failures = records.len() - good.len();
    let mses: Vec<T> = good.iter().map(|r| r.mse_mid90).collect();
    let conditions: Vec<T> = good.iter().filter_map(|r| r.condition_number).collect();
    CellSummary {
        omega: cell.omega,
        m: cell.m,
        shift_label: cell.shift_label.clone(),
        snr_db: cell.snr_db,
        trials: records.len(),
        failures,
        mean_mse: mean(&mses),
        median_mse: median(&mses),
        median_condition: if conditions.is_empty() {
            None
        } else {
            Some(median(&conditions))
        },
    }
}

fn mean<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::nan();
    }
    let mut acc = T::zero();
    for &v in values {
        acc += v;
    }
    acc / real(values.len() as f64)
}

pub(crate) fn median<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::nan();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / real(2.0)
    }
}

/// Spearman rank correlation between two equal-length samples.
pub fn spearman_rho<T: Real>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len());
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in rx.iter().zip(ry.iter()) {
        num += (a - mean) * (b - mean);
        dx += (a - mean) * (a - mean);
        dy += (b - mean) * (b - mean);
    }
    real(num / (dx.sqrt() * dy.sqrt()))
}

fn ranks<T: Real>(values: &[T]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out = vec![0.0; values.len()];
    for (rank, &i) in idx.iter().enumerate() {
        out[i] = rank as f64 + 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    fn tiny_spec() -> SweepSpec<f64> {
        SweepSpec {
            omega_list: vec![0.25 * PI, 0.5 * PI],
            m_list: vec![1, 2],
            shift_policy: ShiftPolicy::Equal,
            snr_db_list: vec![],
            trials: 2,
            seed: 1,
            window: (0.0, 10.0),
            grid_points: 400,
            decoder: DecoderChoice::ClosedForm,
        }
    }

    #[test]
    #[allow(clippy::identity_op)]
    fn record_count_is_product_of_dimensions() {
        let result = run_sweep(&tiny_spec()).unwrap();
        // omega x m x shift x snr x trials
        assert_eq!(result.records.len(), 2 * 2 * 1 * 1 * 2);
        assert_eq!(result.cells.len(), 4);
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = run_sweep(&tiny_spec()).unwrap();
        let b = run_sweep(&tiny_spec()).unwrap();
        for (ra, rb) in a.records.iter().zip(b.records.iter()) {
            assert_eq!(ra.mse_mid90.to_bits(), rb.mse_mid90.to_bits());
            assert_eq!(ra.seed_used, rb.seed_used);
        }
    }

    #[test]
    fn sweep_deterministic_across_thread_counts() {
        let spec = tiny_spec();
        std::env::set_var("TEMCODEC_THREADS", "1");
        let serial = run_sweep(&spec).unwrap();
        std::env::set_var("TEMCODEC_THREADS", "4");
        let parallel = run_sweep(&spec).unwrap();
        std::env::remove_var("TEMCODEC_THREADS");
        for (ra, rb) in serial.records.iter().zip(parallel.records.iter()) {
            assert_eq!(ra.mse_mid90.to_bits(), rb.mse_mid90.to_bits());
        }
    }

    #[test]
    fn within_bound_cells_reconstruct() {
        let result = run_sweep(&tiny_spec()).unwrap();
        for cell in &result.cells {
            // Both cells sit at or below half the bound m pi / 2.
            assert!(
                cell.median_mse < 1e-3,
                "omega {} m {} mse {}",
                cell.omega,
                cell.m,
                cell.median_mse
            );
            assert_eq!(cell.failures, 0);
        }
    }

    #[test]
    fn mse_mid90_exact_cases() {
        let truth = GridSignal {
            t0: 0.0,
            dt: 0.01,
            values: (0..1000).map(|i| (i as f64 * 0.01).sin()).collect(),
        };
        assert_eq!(mse_mid90(&truth, &truth).unwrap(), 0.0);

        let offset = GridSignal {
            t0: 0.0,
            dt: 0.01,
            values: truth.values.iter().map(|v| v + 0.1).collect(),
        };
        let v = mse_mid90(&offset, &truth).unwrap();
        assert!((v - 0.01).abs() < 1e-12);
    }

    #[test]
    fn mse_mid90_zero_estimate_matches_direct_sum() {
        let truth = GridSignal {
            t0: 0.0,
            dt: 0.005,
            values: (0..2000).map(|i| ((i as f64) * 0.0123).cos()).collect(),
        };
        let zero = GridSignal {
            t0: 0.0,
            dt: 0.005,
            values: vec![0.0; 2000],
        };
        // Independent direct sum over the middle 90%.
        let direct: f64 = truth.values[100..1900].iter().map(|v| v * v).sum::<f64>() / 1800.0;
        let via = mse_mid90(&zero, &truth).unwrap();
        assert!((via - direct).abs() < 1e-15);
    }

    #[test]
    fn mse_mid90_rejects_mismatched_grids() {
        let a = GridSignal {
            t0: 0.0,
            dt: 0.01,
            values: vec![0.0; 100],
        };
        let b = GridSignal {
            t0: 0.0,
            dt: 0.02,
            values: vec![0.0; 100],
        };
        assert!(mse_mid90(&a, &b).is_err());
    }

    #[test]
    fn shift_policy_expansion() {
        let equal = ShiftPolicy::<f64>::Equal.expand(4, 1.0).unwrap();
        assert_eq!(equal.len(), 1);
        assert_eq!(equal[0].1, vec![0.5; 4]);

        let log = ShiftPolicy::<f64>::LogSpaced {
            max_exponent: -1,
            min_exponent: -3,
        }
        .expand(2, 1.0)
        .unwrap();
        assert_eq!(log.len(), 3);
        assert_eq!(log[0].0, "1e-1");
        assert!((log[0].1[0] - 0.1).abs() < 1e-15);
        assert!((log[0].1[1] - 1.9).abs() < 1e-15);
        assert!(ShiftPolicy::<f64>::LogSpaced {
            max_exponent: -1,
            min_exponent: -3,
        }
        .expand(3, 1.0)
        .is_err());
    }

    #[test]
    fn spearman_detects_monotone_sequences() {
        let x = [1.0f64, 2.0, 3.0, 4.0, 5.0];
        let up = [0.1f64, 0.2, 0.5, 0.7, 0.9];
        let down = [0.9f64, 0.7, 0.5, 0.2, 0.1];
        assert!((spearman_rho(&x, &up) - 1.0).abs() < 1e-12);
        assert!((spearman_rho(&x, &down) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_of_even_and_odd_lengths() {
        assert_eq!(median(&[3.0f64, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0f64, 1.0, 2.0, 3.0]), 2.5);
    }
}
