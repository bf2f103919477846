//! End-to-end tests of the command-line interface: file formats, exit
//! codes, determinism and the encode/decode round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use temcodec::io;
use temcodec::signals::BandlimitedSignal;

const PI: f64 = std::f64::consts::PI;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_temcodec"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "temcodec-cli-{tag}-{}-{:x}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn temcodec")
}

fn write_zero_signal(path: &Path) {
    let sig = BandlimitedSignal::from_coeffs(PI, (0.0, 10.0), vec![0.0; 11]).unwrap();
    io::save_signal(path, &sig).unwrap();
}

fn write_random_signal(path: &Path, omega: f64, seed: u64) {
    let sig = BandlimitedSignal::<f64>::random(omega, (0.0, 10.0), seed).unwrap();
    io::save_signal(path, &sig).unwrap();
}

#[test]
fn encode_zero_signal_emits_five_spikes() {
    let dir = workdir("zero");
    let sig = dir.join("zero.json");
    write_zero_signal(&sig);
    let spikes = dir.join("spikes.csv");
    let out = run(bin()
        .args(["encode", "--signal"])
        .arg(&sig)
        .args(["--kappa", "1", "--delta", "1", "--bias", "1", "--out"])
        .arg(&spikes));
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&spikes).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.is_empty()).collect();
    assert_eq!(rows.len(), 5, "{text}");
    // Spikes land at 2, 4, 6, 8, 10 within the window.
    let first: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - 2.0).abs() < 1e-9);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn encode_two_channels_interleaves_channel_column() {
    let dir = workdir("interleave");
    let sig = dir.join("sig.json");
    write_random_signal(&sig, 0.5 * PI, 3);
    let spikes = dir.join("spikes.csv");
    let out = run(bin()
        .args(["encode", "--signal"])
        .arg(&sig)
        .args(["--channels", "2", "--out"])
        .arg(&spikes));
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&spikes).unwrap();
    let channels: Vec<usize> = text
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(channels.len() >= 4);
    for (a, b) in channels.iter().zip(channels.iter().skip(2)) {
        assert_eq!(a, b, "channel column not cyclically interleaved");
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = workdir("determinism");
    let sig = dir.join("sig.json");
    write_random_signal(&sig, PI, 7);
    let s1 = dir.join("a.csv");
    let s2 = dir.join("b.csv");
    for (s, m) in [(&s1, "a"), (&s2, "b")] {
        let meta = dir.join(format!("{m}.meta.json"));
        let out = run(bin()
            .args(["encode", "--signal"])
            .arg(&sig)
            .args(["--channels", "2", "--snr-db", "40", "--jitter-seed", "9"])
            .args(["--out"])
            .arg(s)
            .args(["--metadata"])
            .arg(&meta));
        assert!(out.status.success(), "{out:?}");
    }
    assert_eq!(
        std::fs::read(&s1).unwrap(),
        std::fs::read(&s2).unwrap(),
        "spike CSVs differ between identical runs"
    );
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn decode_round_trip_reaches_low_error() {
    let dir = workdir("roundtrip");
    let sig = dir.join("sig.json");
    write_random_signal(&sig, 0.25 * PI, 11);
    let spikes = dir.join("spikes.csv");
    assert!(run(bin()
        .args(["encode", "--signal"])
        .arg(&sig)
        .args(["--channels", "2", "--out"])
        .arg(&spikes))
    .status
    .success());

    let estimate = dir.join("estimate.csv");
    let result = dir.join("result.json");
    let out = run(bin()
        .args(["decode", "--spikes"])
        .arg(&spikes)
        .args(["--omega", &format!("{}", 0.25 * PI)])
        .args(["--method", "closed_form", "--truth"])
        .arg(&sig)
        .args(["--out"])
        .arg(&estimate)
        .args(["--result"])
        .arg(&result));
    assert!(out.status.success(), "{out:?}");

    let report: io::DecodeReport =
        serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    let mse = report.mse_mid90.unwrap();
    assert!(mse < 1e-4, "round-trip mse {mse}");
    assert_eq!(report.method, "closed_form");

    // Estimate CSV parses as t,value rows on the default 2000-point grid.
    let text = std::fs::read_to_string(&estimate).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,value");
    assert_eq!(text.lines().count(), 2001);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn decode_iterative_converges_to_tolerance() {
    let dir = workdir("iterative");
    let sig = dir.join("sig.json");
    write_random_signal(&sig, 0.75 * PI, 2);
    let spikes = dir.join("spikes.csv");
    assert!(run(bin()
        .args(["encode", "--signal"])
        .arg(&sig)
        .args(["--out"])
        .arg(&spikes))
    .status
    .success());

    let estimate = dir.join("estimate.csv");
    let result = dir.join("result.json");
    let out = run(bin()
        .args(["decode", "--spikes"])
        .arg(&spikes)
        .args(["--omega", &format!("{}", 0.75 * PI)])
        .args(["--method", "iterative", "--tol", "1e-9"])
        .args(["--out"])
        .arg(&estimate)
        .args(["--result"])
        .arg(&result));
    assert!(out.status.success(), "{out:?}");
    let report: io::DecodeReport =
        serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(report.status, "converged");
    assert!(!report.residual_history.is_empty());
    assert!(*report.residual_history.last().unwrap() <= 1e-9);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn decode_warns_on_residual_plateau() {
    // Heavy spike-time jitter leaves no consistent bandlimited signal, so
    // the iterative decoder plateaus and says so.
    let dir = workdir("plateau");
    let sig = dir.join("sig.json");
    write_random_signal(&sig, 0.5 * PI, 4);
    let spikes = dir.join("spikes.csv");
    assert!(run(bin()
        .args(["encode", "--signal"])
        .arg(&sig)
        .args(["--channels", "2", "--snr-db", "0", "--out"])
        .arg(&spikes))
    .status
    .success());

    let estimate = dir.join("estimate.csv");
    let out = run(bin()
        .args(["decode", "--spikes"])
        .arg(&spikes)
        .args(["--omega", &format!("{}", 0.5 * PI)])
        .args(["--method", "iterative", "--max-iter", "300", "--out"])
        .arg(&estimate));
    assert!(out.status.success(), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("consistency residual plateau"),
        "stderr: {stderr}"
    );
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn missing_metadata_is_a_data_error() {
    let dir = workdir("nometa");
    let spikes = dir.join("orphan.csv");
    std::fs::write(&spikes, "channel,time\n0,1.0\n0,2.0\n").unwrap();
    let out = run(bin()
        .args(["decode", "--spikes"])
        .arg(&spikes)
        .args(["--omega", "1.0", "--out"])
        .arg(dir.join("est.csv")));
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn bad_usage_exits_one() {
    let out = run(bin().args(["decode", "--omega", "1.0"]));
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let out = run(bin().args(["frobnicate"]));
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn sweep_writes_expected_tables() {
    let dir = workdir("sweep");
    let config = dir.join("sweep.json");
    std::fs::write(
        &config,
        format!(
            r#"{{
  "omega_list": [{}, {}],
  "m_list": [1, 2],
  "shift_policy": "equal",
  "snr_db_list": [],
  "trials": 2,
  "seed": 1,
  "window": [0.0, 10.0],
  "grid_points": 400,
  "decoder": "closed_form"
}}"#,
            0.25 * PI,
            0.5 * PI
        ),
    )
    .unwrap();
    let out_dir = dir.join("out");
    let out = run(bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--out-dir"])
        .arg(&out_dir));
    assert!(out.status.success(), "{out:?}");

    let trials = std::fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 2 * 2, "{trials}");
    assert!(out_dir.join("cells.csv").exists());
    assert!(out_dir.join("fig8.csv").exists());

    // Re-running the sweep reproduces the tables byte for byte.
    let out_dir2 = dir.join("out2");
    assert!(run(bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--out-dir"])
        .arg(&out_dir2))
    .status
    .success());
    assert_eq!(
        std::fs::read(out_dir.join("trials.csv")).unwrap(),
        std::fs::read(out_dir2.join("trials.csv")).unwrap()
    );
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn selftest_passes() {
    let out = run(bin().arg("selftest"));
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("all checks passed"), "{stdout}");
}
