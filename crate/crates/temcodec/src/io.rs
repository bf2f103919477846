//! File formats shared by the CLI and the sweep harness.
//!
//! - Signal file (JSON): `{omega, t_start, t_end, centers, coeffs}`,
//!   bit-exact round trip.
//! - Spike stream (CSV): header `channel,time`, rows ascending by time,
//!   times with 15 significant digits; a JSON metadata sidecar carries the
//!   encoder parameters, shifts, seed, SNR and tool version.
//! - Estimate (CSV): header `t,value`.
//! - Decode result (JSON): iterations, residual history, condition number,
//!   optional mid-90% MSE.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decoder::DecodeResult;
use crate::encoder::{SpikeStream, TemParams};
use crate::scalar::{real, Real};
use crate::signals::{BandlimitedSignal, GridSignal};
use crate::sweep::{CellSummary, SweepSpec, TrialRecord};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv parse error at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("spike metadata not found at {0} (required to recover interval integrals)")]
    MissingMetadata(PathBuf),
    #[error("spike metadata invalid: {0}")]
    BadMetadata(String),
    #[error("signal file invalid: {0}")]
    Signal(#[from] crate::signals::SignalError),
}

/// Formats a value with 15 significant digits.
pub fn fmt_sig15<T: Real>(v: T) -> String {
    format!("{:.14e}", v.as_f64())
}

// ---------------------------------------------------------------------------
// Signal files
// ---------------------------------------------------------------------------

pub fn save_signal<T: Real>(path: &Path, signal: &BandlimitedSignal<T>) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(signal)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_signal<T: Real>(path: &Path) -> Result<BandlimitedSignal<T>, IoError> {
    let text = std::fs::read_to_string(path)?;
    let signal: BandlimitedSignal<T> = serde_json::from_str(&text)?;
    signal.validate()?;
    Ok(signal)
}

// ---------------------------------------------------------------------------
// Spike streams
// ---------------------------------------------------------------------------

/// Sidecar metadata stored next to a spike CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SpikeMetadata<T> {
    pub kappa: T,
    pub delta: T,
    pub bias: T,
    pub channels: usize,
    pub t_start: T,
    pub t_end: T,
    #[serde(default)]
    pub shifts: Option<Vec<T>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub snr_db: Option<T>,
    #[serde(default)]
    pub jitter_reordered: bool,
    pub tool_version: String,
}

impl<T: Real> SpikeMetadata<T> {
    pub fn new(stream: &SpikeStream<T>) -> Self {
        Self {
            kappa: stream.params.kappa,
            delta: stream.params.delta,
            bias: stream.params.bias,
            channels: stream.m,
            t_start: stream.window.0,
            t_end: stream.window.1,
            shifts: None,
            seed: None,
            snr_db: None,
            jitter_reordered: false,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Default sidecar path: `<spikes>.meta.json`.
pub fn metadata_path(spikes: &Path) -> PathBuf {
    let mut os = spikes.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}

pub fn save_spikes<T: Real>(
    csv_path: &Path,
    meta_path: &Path,
    stream: &SpikeStream<T>,
    meta: &SpikeMetadata<T>,
) -> Result<(), IoError> {
    let mut out = String::from("channel,time\n");
    for (&t, &ch) in stream.times.iter().zip(stream.channels.iter()) {
        out.push_str(&format!("{},{}\n", ch, fmt_sig15(t)));
    }
    std::fs::write(csv_path, out)?;
    std::fs::write(meta_path, serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

pub fn load_spikes<T: Real>(
    csv_path: &Path,
    meta_path: &Path,
) -> Result<(SpikeStream<T>, SpikeMetadata<T>), IoError> {
    if !meta_path.exists() {
        return Err(IoError::MissingMetadata(meta_path.to_owned()));
    }
    let meta: SpikeMetadata<T> = serde_json::from_str(&std::fs::read_to_string(meta_path)?)?;
    let text = std::fs::read_to_string(csv_path)?;
    let mut times = Vec::new();
    let mut channels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "channel,time" {
                return Err(IoError::Csv {
                    line: 1,
                    reason: "expected header 'channel,time'".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let ch = parts
            .next()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| IoError::Csv {
                line: i + 1,
                reason: "bad channel".into(),
            })?;
        let t = parts
            .next()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| IoError::Csv {
                line: i + 1,
                reason: "bad time".into(),
            })?;
        channels.push(ch);
        times.push(real::<T>(t));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(IoError::Csv {
            line: 0,
            reason: "spike times not ascending".into(),
        });
    }
    let params = TemParams {
        kappa: meta.kappa,
        delta: meta.delta,
        bias: meta.bias,
    };
    params
        .validate()
        .map_err(|e| IoError::BadMetadata(e.to_string()))?;
    Ok((
        SpikeStream {
            times,
            channels,
            m: meta.channels,
            params,
            window: (meta.t_start, meta.t_end),
        },
        meta,
    ))
}

// ---------------------------------------------------------------------------
// Estimates and decode results
// ---------------------------------------------------------------------------

pub fn save_grid<T: Real>(path: &Path, grid: &GridSignal<T>) -> Result<(), IoError> {
    let mut out = String::from("t,value\n");
    for (i, &v) in grid.values.iter().enumerate() {
        out.push_str(&format!(
            "{},{}\n",
            fmt_sig15(grid.time_at(i)),
            fmt_sig15(v)
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Decode report serialized next to the estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecodeReport {
    pub method: String,
    pub status: String,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub condition_number: Option<f64>,
    pub effective_rank: Option<usize>,
    pub truncated_spectrum: bool,
    pub residual_monotone: bool,
    pub mse_mid90: Option<f64>,
}

impl DecodeReport {
    pub fn new<T: Real>(result: &DecodeResult<T>, mse: Option<T>) -> Self {
        Self {
            method: result.method.as_str().to_string(),
            status: result.status.as_str().to_string(),
            iterations: result.iterations,
            residual_history: result.residual_history.iter().map(|r| r.as_f64()).collect(),
            condition_number: result.condition_number.map(|c| c.as_f64()),
            effective_rank: result.effective_rank,
            truncated_spectrum: result.truncated_spectrum,
            residual_monotone: result.residual_monotone,
            mse_mid90: mse.map(|m| m.as_f64()),
        }
    }
}

pub fn save_decode_report(path: &Path, report: &DecodeReport) -> Result<(), IoError> {
    std::fs::write(path, serde_json::to_string_pretty(report)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Sweep outputs
// ---------------------------------------------------------------------------

pub fn load_sweep_spec<T: Real>(path: &Path) -> Result<SweepSpec<T>, IoError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn fmt_opt<T: Real>(v: &Option<T>) -> String {
    v.map_or(String::new(), |x| fmt_sig15(x))
}

/// Per-trial rows. Byte-deterministic for a fixed spec and seed; wall-clock
/// timings go to a separate sidecar for that reason.
pub fn write_trials_csv<T: Real>(path: &Path, records: &[TrialRecord<T>]) -> Result<(), IoError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "omega,m,shift,snr_db,trial,seed,mse_mid90,iterations,condition_number,effective_rank,rate_ok,interleaved,converged,error"
    )?;
    for r in records {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_sig15(r.omega),
            r.m,
            r.shift_label,
            fmt_opt(&r.snr_db),
            r.trial,
            r.seed_used,
            fmt_sig15(r.mse_mid90),
            r.iterations,
            fmt_opt(&r.condition_number),
            r.effective_rank.map_or(String::new(), |v| v.to_string()),
            r.rate_ok,
            r.interleaved,
            r.converged,
            r.error.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}

/// Wall-clock per-trial timings, inherently non-deterministic.
pub fn write_timings_csv<T: Real>(path: &Path, records: &[TrialRecord<T>]) -> Result<(), IoError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "omega,m,shift,snr_db,trial,runtime_ms")?;
    for r in records {
        writeln!(
            f,
            "{},{},{},{},{},{:.3}",
            fmt_sig15(r.omega),
            r.m,
            r.shift_label,
            fmt_opt(&r.snr_db),
            r.trial,
            r.runtime_ms,
        )?;
    }
    Ok(())
}

pub fn write_cells_csv<T: Real>(path: &Path, cells: &[CellSummary<T>]) -> Result<(), IoError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "omega,m,shift,snr_db,trials,failures,mean_mse,median_mse,median_condition"
    )?;
    for c in cells {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{}",
            fmt_sig15(c.omega),
            c.m,
            c.shift_label,
            fmt_opt(&c.snr_db),
            c.trials,
            c.failures,
            fmt_sig15(c.mean_mse),
            fmt_sig15(c.median_mse),
            fmt_opt(&c.median_condition),
        )?;
    }
    Ok(())
}

/// Axis of a pivot table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotAxis {
    Omega,
    Channels,
    Shift,
    Snr,
}

fn axis_key<T: Real>(cell: &CellSummary<T>, axis: PivotAxis) -> String {
    match axis {
        PivotAxis::Omega => fmt_sig15(cell.omega),
        PivotAxis::Channels => cell.m.to_string(),
        PivotAxis::Shift => cell.shift_label.clone(),
        PivotAxis::Snr => cell
            .snr_db
            .map_or("none".to_string(), |v| format!("{}", v.as_f64())),
    }
}

/// Writes a `rows x cols` pivot of median mid-90% MSE.
pub fn write_pivot_csv<T: Real>(
    path: &Path,
    cells: &[CellSummary<T>],
    rows: PivotAxis,
    cols: PivotAxis,
) -> Result<(), IoError> {
    let mut row_keys: Vec<String> = Vec::new();
    let mut col_keys: Vec<String> = Vec::new();
    for c in cells {
        let rk = axis_key(c, rows);
        let ck = axis_key(c, cols);
        if !row_keys.contains(&rk) {
            row_keys.push(rk);
        }
        if !col_keys.contains(&ck) {
            col_keys.push(ck);
        }
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "{}\\{},{}",
        axis_name(rows),
        axis_name(cols),
        col_keys.join(",")
    )?;
    for rk in &row_keys {
        let mut line = rk.clone();
        for ck in &col_keys {
            let cell = cells
                .iter()
                .find(|c| &axis_key(c, rows) == rk && &axis_key(c, cols) == ck);
            line.push(',');
            if let Some(c) = cell {
                line.push_str(&fmt_sig15(c.median_mse));
            }
        }
        writeln!(f, "{line}")?;
    }
    Ok(())
}

fn axis_name(axis: PivotAxis) -> &'static str {
    match axis {
        PivotAxis::Omega => "omega",
        PivotAxis::Channels => "m",
        PivotAxis::Shift => "shift",
        PivotAxis::Snr => "snr_db",
    }
}

/// Writes the long CSV, cell aggregates and whichever figure-style pivots
/// the spec's varying axes support. Returns the file names written.
pub fn write_sweep_outputs<T: Real>(
    dir: &Path,
    spec: &SweepSpec<T>,
    records: &[TrialRecord<T>],
    cells: &[CellSummary<T>],
) -> Result<Vec<PathBuf>, IoError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let trials = dir.join("trials.csv");
    write_trials_csv(&trials, records)?;
    written.push(trials);

    let cells_path = dir.join("cells.csv");
    write_cells_csv(&cells_path, cells)?;
    written.push(cells_path);

    let timings = dir.join("timings.csv");
    write_timings_csv(&timings, records)?;
    written.push(timings);

    let omegas = spec.omega_list.len() > 1;
    let ms = spec.m_list.len() > 1;
    let shifts = matches!(&spec.shift_policy, crate::sweep::ShiftPolicy::Explicit(v) if v.len() > 1)
        || matches!(
            &spec.shift_policy,
            crate::sweep::ShiftPolicy::LogSpaced { .. }
        );
    let snrs =
        spec.snr_db_list.iter().filter(|s| s.is_some()).count() > 0 && spec.snr_db_list.len() > 1;

    if omegas && ms {
        let p = dir.join("fig8.csv");
        write_pivot_csv(&p, cells, PivotAxis::Omega, PivotAxis::Channels)?;
        written.push(p);
    }
    if omegas && shifts {
        let name = if matches!(
            spec.shift_policy,
            crate::sweep::ShiftPolicy::LogSpaced { .. }
        ) {
            "fig10.csv"
        } else {
            "fig9.csv"
        };
        let p = dir.join(name);
        write_pivot_csv(&p, cells, PivotAxis::Omega, PivotAxis::Shift)?;
        written.push(p);
    }
    if omegas && snrs {
        let p = dir.join("fig11a.csv");
        write_pivot_csv(&p, cells, PivotAxis::Omega, PivotAxis::Snr)?;
        written.push(p);
    }
    if shifts && snrs {
        let p = dir.join("fig11b.csv");
        write_pivot_csv(&p, cells, PivotAxis::Shift, PivotAxis::Snr)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode, TemParams};
    use crate::signals::Constant;

    #[test]
    fn signal_roundtrip_bit_exact() {
        let dir = tempdir();
        let path = dir.join("sig.json");
        let s = crate::Signal64::random(std::f64::consts::PI, (0.0, 10.0), 5).unwrap();
        save_signal(&path, &s).unwrap();
        let back: crate::Signal64 = load_signal(&path).unwrap();
        assert_eq!(s.coeffs(), back.coeffs());
        assert_eq!(s.omega().to_bits(), back.omega().to_bits());
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn spike_roundtrip_and_missing_metadata() {
        let dir = tempdir();
        let csv = dir.join("spikes.csv");
        let meta = metadata_path(&csv);
        let params = TemParams::new(1.0, 1.0, 1.0).unwrap();
        let train = encode(&Constant(0.0), (0.0, 10.0), &params, -1.0).unwrap();
        let stream = train.stream();
        save_spikes(&csv, &meta, &stream, &SpikeMetadata::new(&stream)).unwrap();

        let (back, meta_back) = load_spikes::<f64>(&csv, &meta).unwrap();
        assert_eq!(back.times.len(), stream.times.len());
        assert_eq!(meta_back.channels, 1);
        for (a, b) in back.times.iter().zip(stream.times.iter()) {
            assert!((a - b).abs() < 1e-12);
        }

        std::fs::remove_file(&meta).unwrap();
        assert!(matches!(
            load_spikes::<f64>(&csv, &meta),
            Err(IoError::MissingMetadata(_))
        ));
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn sig15_formatting() {
        assert_eq!(fmt_sig15(2.0f64), "2.00000000000000e0");
        assert_eq!(fmt_sig15(0.5f64), "5.00000000000000e-1");
    }

    fn tempdir() -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "temcodec-io-test-{}-{:x}",
            std::process::id(),
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .unwrap()
                .as_nanos()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }
}
