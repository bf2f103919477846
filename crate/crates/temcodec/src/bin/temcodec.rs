//! Command-line front end: encode signals to spike streams, decode spike
//! streams back to signals, run parameter sweeps, and self-test the
//! numerical invariants.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use temcodec::decoder::{
    decode_closed_form, decode_closed_form_midpoint, decode_iterative, DecodeStatus, GridSpec,
    IterativeOptions,
};
use temcodec::encoder::{
    add_time_jitter_multi, diagnostics_multi, encode_multi, MultiChannelConfig, TemParams,
};
use temcodec::io::{self, DecodeReport, SpikeMetadata};
use temcodec::signals::{InputSignal, DEFAULT_GRID_POINTS};
use temcodec::sweep::{mse_mid90, run_sweep, DecoderChoice, ShiftPolicy, SweepSpec};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "temcodec",
    version,
    about = "Integrate-and-fire time-encoding codec and experiment workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a signal file into a spike-stream CSV (+ metadata sidecar).
    Encode(EncodeArgs),
    /// Decode a spike-stream CSV into an estimate CSV (+ result JSON).
    Decode(DecodeArgs),
    /// Run a sweep described by a JSON spec and write CSV tables.
    Sweep(SweepArgs),
    /// Run the built-in invariant suites.
    Selftest,
}

#[derive(Args)]
struct EncodeArgs {
    /// Signal JSON file.
    #[arg(long)]
    signal: PathBuf,
    /// Integrator constant.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Threshold.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Bias; defaults to max |signal| + 1 when omitted.
    #[arg(long)]
    bias: Option<f64>,
    /// Number of channels with equal shifts (ignored when --shifts given).
    #[arg(long, default_value_t = 1)]
    channels: usize,
    /// Comma-separated shift cycle alpha_1,...,alpha_M.
    #[arg(long, value_delimiter = ',')]
    shifts: Option<Vec<f64>>,
    /// Spike-time SNR in dB; omit for noiseless output.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Seed for the jitter generator.
    #[arg(long, default_value_t = 0)]
    jitter_seed: u64,
    /// Output spike CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Metadata sidecar path (default: <out>.meta.json).
    #[arg(long)]
    metadata: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    /// Spike CSV file.
    #[arg(long)]
    spikes: PathBuf,
    /// Metadata sidecar path (default: <spikes>.meta.json).
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Angular bandwidth of the reconstruction.
    #[arg(long)]
    omega: f64,
    /// Output grid resolution.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// closed_form | iterative | midpoint
    #[arg(long, default_value = "closed_form")]
    method: String,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Optional ground-truth signal JSON for an MSE report.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output estimate CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Result JSON path (default: <out>.result.json).
    #[arg(long)]
    result: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep spec JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for trials.csv, cells.csv and figure pivots.
    #[arg(long, default_value = "sweep-out")]
    out_dir: PathBuf,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own help/version output is success, bad usage is 1.
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::Encode(args) => cmd_encode(&args),
        Command::Decode(args) => cmd_decode(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Selftest => cmd_selftest(),
    };
    ExitCode::from(code)
}

fn cmd_encode(args: &EncodeArgs) -> u8 {
    let signal: temcodec::Signal64 = match io::load_signal(&args.signal) {
        Ok(s) => s,
        Err(e) => return data_error(&e.to_string()),
    };
    let c = signal.amplitude_bound();
    let bias = args.bias.unwrap_or(c + 1.0);
    let params = match TemParams::new(args.kappa, args.delta, bias) {
        Ok(p) => p,
        Err(e) => return data_error(&e.to_string()),
    };
    if !params.guarantees_progress(c) {
        eprintln!(
            "warning: bias {bias} <= signal bound {c:.6}; encoding is best-effort and \
             reconstruction guarantees do not apply"
        );
    }
    let config = match &args.shifts {
        Some(shifts) => MultiChannelConfig::new(params, shifts.clone()),
        None => MultiChannelConfig::equal_shifts(args.channels, params),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => return data_error(&e.to_string()),
    };
    let multi = match encode_multi(&signal, signal.window(), &config) {
        Ok(m) => m,
        Err(e) => return numeric_error(&e.to_string()),
    };
    let multi = match args.snr_db {
        Some(snr) => add_time_jitter_multi(&multi, snr, args.jitter_seed),
        None => multi,
    };
    let report = diagnostics_multi(&multi, c);
    let stream = multi.stream();

    let mut meta = SpikeMetadata::new(&stream);
    meta.shifts = Some(config.shifts().to_vec());
    meta.seed = Some(args.jitter_seed);
    meta.snr_db = args.snr_db;
    meta.jitter_reordered = multi.reordered_by_jitter();

    let meta_path = args
        .metadata
        .clone()
        .unwrap_or_else(|| io::metadata_path(&args.out));
    if let Err(e) = io::save_spikes(&args.out, &meta_path, &stream, &meta) {
        return data_error(&e.to_string());
    }
    println!(
        "encoded {} spikes on {} channel(s); combined rate {:.4}/s (bound {:.4}/s, ok={}), interleaved={}",
        stream.times.len(),
        config.channels(),
        report.combined_rate,
        report.rate_bound,
        report.rate_ok,
        report.interleaved.unwrap_or(true),
    );
    0
}

fn cmd_decode(args: &DecodeArgs) -> u8 {
    let meta_path = args
        .metadata
        .clone()
        .unwrap_or_else(|| io::metadata_path(&args.spikes));
    let (stream, _meta) = match io::load_spikes::<f64>(&args.spikes, &meta_path) {
        Ok(v) => v,
        Err(e) => return data_error(&e.to_string()),
    };
    let grid = GridSpec::new(stream.window.0, stream.window.1, args.grid_points);
    let result = match args.method.as_str() {
        "closed_form" => decode_closed_form(&stream, args.omega, &grid, 1e-8),
        "midpoint" | "midpoint_closed_form" => {
            decode_closed_form_midpoint(&stream, args.omega, &grid, 1e-8)
        }
        "iterative" => decode_iterative(
            &stream,
            args.omega,
            &grid,
            &IterativeOptions {
                max_iter: args.max_iter,
                tol: args.tol,
                init: None,
            },
        ),
        other => {
            eprintln!("unknown method '{other}' (closed_form | iterative | midpoint)");
            return EXIT_USAGE;
        }
    };
    let result = match result {
        Ok(r) => r,
        Err(e) => return numeric_error(&e.to_string()),
    };

    let residual_large = result.residual_history.last().is_some_and(|&r| r > 1e-3);
    if result.status == DecodeStatus::ResidualPlateau
        || (result.status != DecodeStatus::Converged && residual_large)
        || (result.method != temcodec::decoder::DecodeMethod::Iterative && residual_large)
    {
        eprintln!(
            "warning: consistency residual plateau; the spike stream admits no consistent \
             reconstruction at this tolerance (noise or bandwidth above the bound)"
        );
    }

    let mse = match &args.truth {
        Some(path) => {
            let truth: temcodec::Signal64 = match io::load_signal(path) {
                Ok(s) => s,
                Err(e) => return data_error(&e.to_string()),
            };
            let truth_grid = match truth.to_grid(args.grid_points) {
                Ok(g) => g,
                Err(e) => return data_error(&e.to_string()),
            };
            match mse_mid90(&result.estimate, &truth_grid) {
                Ok(m) => Some(m),
                Err(e) => return data_error(&e.to_string()),
            }
        }
        None => None,
    };

    if let Err(e) = io::save_grid(&args.out, &result.estimate) {
        return data_error(&e.to_string());
    }
    let report = DecodeReport::new(&result, mse);
    let result_path = args
        .result
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".result.json"));
    if let Err(e) = io::save_decode_report(&result_path, &report) {
        return data_error(&e.to_string());
    }

    print!(
        "decoded with {} in {} iteration(s); status {}",
        report.method, report.iterations, report.status
    );
    if let Some(c) = report.condition_number {
        print!("; condition number {c:.3e}");
    }
    if let Some(m) = report.mse_mid90 {
        print!("; mse_mid90 {m:.6e}");
    }
    println!();
    0
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}

fn cmd_sweep(args: &SweepArgs) -> u8 {
    let mut spec: SweepSpec<f64> = match io::load_sweep_spec(&args.config) {
        Ok(s) => s,
        Err(e) => return data_error(&e.to_string()),
    };
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    let result = match run_sweep(&spec) {
        Ok(r) => r,
        Err(e) => return numeric_error(&e.to_string()),
    };
    let written =
        match io::write_sweep_outputs(&args.out_dir, &spec, &result.records, &result.cells) {
            Ok(w) => w,
            Err(e) => return data_error(&e.to_string()),
        };
    let failures: usize = result.records.iter().filter(|r| r.error.is_some()).count();
    println!(
        "swept {} cells x {} trials ({} records, {} failures)",
        result.cells.len(),
        spec.trials,
        result.records.len(),
        failures
    );
    for p in written {
        println!("wrote {}", p.display());
    }
    0
}

fn cmd_selftest() -> u8 {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{} {}", if ok { "PASS" } else { "FAIL" }, name);
        if !ok {
            failures += 1;
        }
    };

    // Sine integral against the quadrature oracle.
    {
        use temcodec::kernels::{quad_adaptive, si};
        let ok = [0.5f64, 3.0, 16.0, 100.0].iter().all(|&x| {
            let oracle = quad_adaptive(
                &|u: f64| if u == 0.0 { 1.0 } else { u.sin() / u },
                0.0,
                x,
                1e-13,
            )
            .unwrap();
            (si(x) - oracle).abs() < 1e-12
        });
        check("sine integral vs quadrature", ok);
    }

    // Constant-input spike spacing.
    {
        use temcodec::encoder::encode;
        use temcodec::signals::Constant;
        let p = TemParams::new(1.0, 1.0, 2.0).unwrap();
        let train = encode(&Constant(1.0), (0.0, 10.0), &p, -1.0).unwrap();
        let ok = train
            .gaps()
            .iter()
            .all(|g: &f64| (g - 2.0 / 3.0).abs() < 1e-9);
        check("constant-input spike spacing", ok);
    }

    // Interval integrals match the signal primitive.
    {
        use temcodec::encoder::{encode, interval_integrals};
        let sig = temcodec::Signal64::random(std::f64::consts::PI, (0.0, 10.0), 17).unwrap();
        let c = sig.amplitude_bound();
        let p = TemParams::new(1.0, 1.0, c + 1.0).unwrap();
        let train = encode(&sig, (0.0, 10.0), &p, -1.0).unwrap();
        let q = interval_integrals(&train).unwrap();
        let ok = train
            .times()
            .windows(2)
            .zip(q.iter())
            .all(|(w, &qk)| (sig.primitive(w[1]) - sig.primitive(w[0]) - qk).abs() < 1e-8);
        check("interval integrals vs primitive", ok);
    }

    // Interleaving with nonzero shifts.
    {
        let sig = temcodec::Signal64::random(std::f64::consts::PI, (0.0, 10.0), 23).unwrap();
        let c = sig.amplitude_bound();
        let p = TemParams::new(1.0, 1.0, c + 1.0).unwrap();
        let cfg = MultiChannelConfig::equal_shifts(3, p).unwrap();
        let multi = encode_multi(&sig, (0.0, 10.0), &cfg).unwrap();
        check("multi-channel interleaving", multi.is_interleaved());
    }

    // Grid operator exactness.
    {
        use temcodec::decoder::{interval_average, measure_intervals};
        use temcodec::signals::GridSignal;
        let mut rng = temcodec::rng::SplitMix64::new(99);
        let y = GridSignal {
            t0: 0.0,
            dt: 0.005,
            values: (0..2000).map(|_| rng.uniform_in(-1.0f64, 1.0)).collect(),
        };
        let intervals = [(0.8, 2.0), (2.0, 3.7), (5.2, 7.0)];
        let avg = interval_average(&y, &intervals);
        let reflected = GridSignal {
            t0: y.t0,
            dt: y.dt,
            values: y
                .values
                .iter()
                .zip(avg.values.iter())
                .map(|(&v, &a)| v - 2.0 * a)
                .collect(),
        };
        let iso = (reflected.norm() - y.norm()).abs() < 1e-10;
        let pres = measure_intervals(&y, &intervals)
            .iter()
            .zip(measure_intervals(&avg, &intervals).iter())
            .all(|(a, b)| (a - b).abs() < 1e-10);
        check("interval-average reflection isometry", iso);
        check("interval-average integral preservation", pres);
    }

    // Pseudoinverse identities.
    {
        use temcodec::kernels::{pinv_truncated, DenseMatrix};
        let mut rng = temcodec::rng::SplitMix64::new(7);
        let a = DenseMatrix::from_fn(8, 6, |_, _| rng.uniform_in(-1.0f64, 1.0));
        let p = pinv_truncated(&a, 1e-10).unwrap();
        let ok = a.matmul(&p.matrix).matmul(&a).max_abs_diff(&a) < 1e-8;
        check("pseudoinverse Penrose identity", ok);
    }

    // Closed-form round trip.
    {
        let sig = temcodec::Signal64::random(0.25 * std::f64::consts::PI, (0.0, 10.0), 3).unwrap();
        let c = sig.amplitude_bound();
        let p = TemParams::new(1.0, 1.0, c + 1.0).unwrap();
        let cfg = MultiChannelConfig::equal_shifts(2, p).unwrap();
        let multi = encode_multi(&sig, (0.0, 10.0), &cfg).unwrap();
        let grid = GridSpec::new(0.0, 10.0, 2000);
        let dec = decode_closed_form(&multi.stream(), sig.omega(), &grid, 1e-8).unwrap();
        let truth = sig.to_grid(2000).unwrap();
        let mse = mse_mid90(&dec.estimate, &truth).unwrap();
        check("closed-form round trip mse < 1e-4", mse < 1e-4);
    }

    // Determinism of the sweep seed chain.
    {
        let spec = SweepSpec::<f64> {
            omega_list: vec![0.25 * std::f64::consts::PI],
            m_list: vec![1],
            shift_policy: ShiftPolicy::Equal,
            snr_db_list: vec![],
            trials: 2,
            seed: 5,
            window: (0.0, 10.0),
            grid_points: 200,
            decoder: DecoderChoice::ClosedForm,
        };
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        let ok = a
            .records
            .iter()
            .zip(b.records.iter())
            .all(|(x, y)| x.mse_mid90.to_bits() == y.mse_mid90.to_bits());
        check("sweep determinism", ok);
    }

    if failures == 0 {
        println!("selftest: all checks passed");
        0
    } else {
        println!("selftest: {failures} check(s) failed");
        EXIT_NUMERIC
    }
}

fn data_error(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    EXIT_DATA
}

fn numeric_error(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    EXIT_NUMERIC
}
