use std::process::Command;

use recyc_miso_cli::output::{format_num, parse_csv, render_csv, Cell, Table};
use recyc_miso_cli::{run, SWEEP_HEADER};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("recyc-miso").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn config_line(stdout: &str) -> &str {
    stdout.lines().next().unwrap().strip_prefix("# config: ").unwrap()
}

fn config_value<'a>(stdout: &'a str, key: &str) -> Option<&'a str> {
    config_line(stdout)
        .split(' ')
        .find_map(|kv| kv.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
}

#[test]
fn rate_sweep_schema() {
    let (code, out, err) = invoke(&[
        "rate-sweep",
        "--m",
        "5..7",
        "--snr-db",
        "10",
        "--alpha-db",
        "-15",
        "--cap",
        "5",
        "--seed",
        "7",
        "--n-samples",
        "500",
    ]);
    assert_eq!(code, 0, "{err}");
    let (config, header, rows) = parse_csv(out.as_bytes()).unwrap();
    assert_eq!(header, SWEEP_HEADER);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["5", "6", "7"]);
    assert!(config.contains("seed=7"));
    for row in &rows {
        let ryc: f64 = row[1].parse().unwrap();
        let noryc: f64 = row[2].parse().unwrap();
        assert!(ryc >= noryc);
    }
}

#[test]
fn schedule_once_matches_hand_computation() {
    // h = (4, 1, 0.5), alpha = 0.1: all active g = 5.5; harvest antenna 3
    // f = 0.9, g = 5 / 0.9; harvest antennas 2, 3 f = 0.8, g = 5
    let (code, out, err) = invoke(&["schedule-once", "--h", "4,1,0.5", "--alpha", "0.1", "--cap", "2"]);
    assert_eq!(code, 0, "{err}");
    let (_, header, rows) = parse_csv(out.as_bytes()).unwrap();
    assert_eq!(header, ["scheduler", "active", "f", "g"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "fast");
    assert_eq!(rows[1][0], "exhaustive");
    for row in &rows {
        assert_eq!(row[1], "1 2");
        assert_eq!(row[2], format_num(0.9));
        assert_eq!(row[3], format_num(5.0 / 0.9));
    }
}

#[test]
fn schedule_once_with_matrix_file_skips_fast() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    std::fs::write(&path, "# asymmetric\n0,0.2,0.01\n0.2,0,0.3\n0.01,0.3,0\n").unwrap();
    let (code, out, err) = invoke(&[
        "schedule-once",
        "--h",
        "1,2,3",
        "--coupling-file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("fast scheduler skipped"));
    let (_, _, rows) = parse_csv(out.as_bytes()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "exhaustive");
}

#[test]
fn positive_alpha_db_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "m = 8\n[coupling]\nalpha_db = 3\n").unwrap();
    let (code, out, err) = invoke(&["validate-config", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("`alpha_db`"), "{err}");
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "m = 8\nsnr = 3\n").unwrap();
    let (code, _, err) = invoke(&["rate-sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("`snr`"), "{err}");

    let (code, _, err) = invoke(&["rate-sweep", "--scheduler", "greedy"]);
    assert_eq!(code, 2);
    assert!(err.contains("`scheduler`"), "{err}");

    let (code, _, err) = invoke(&["rate-sweep", "--m", "30", "--scheduler", "exhaustive"]);
    assert_eq!(code, 2);
    assert!(err.contains("`m`"), "{err}");
}

#[test]
fn unknown_flag_exits_2() {
    let (code, _, err) = invoke(&["rate-sweep", "--frobnicate"]);
    assert_eq!(code, 2);
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(
        &path,
        "snr_db = 0\nseed = 3\nn_samples = 100\n[coupling]\nalpha_db = -20\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let (code, out, _) = invoke(&["rate-sweep", "--config", p, "--dry-run"]);
    assert_eq!(code, 0);
    assert_eq!(config_value(&out, "snr_db"), Some("0"));
    assert_eq!(config_value(&out, "coupling.alpha_db"), Some("-20"));

    let (code, out, _) = invoke(&[
        "rate-sweep",
        "--config",
        p,
        "--snr-db",
        "10",
        "--alpha",
        "0.5",
        "--dry-run",
    ]);
    assert_eq!(code, 0);
    assert_eq!(config_value(&out, "snr_db"), Some("10"));
    assert_eq!(config_value(&out, "seed"), Some("3"));
    assert_eq!(config_value(&out, "coupling.alpha"), Some("0.5"));
    assert_eq!(config_value(&out, "coupling.alpha_db"), None);
}

#[test]
fn dry_run_prints_only_the_config() {
    for cmd in [
        "rate-sweep",
        "cap-sweep",
        "active-sweep",
        "penalty",
        "audit",
        "validate-config",
    ] {
        let (code, out, err) = invoke(&[cmd, "--dry-run"]);
        assert_eq!(code, 0, "{cmd}: {err}");
        assert_eq!(out.lines().count(), 1, "{cmd}");
        assert!(config_value(&out, "seed").is_some());
    }
    let (code, out, _) = invoke(&["schedule-once", "--h", "1,2", "--dry-run"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1);
}

#[test]
fn config_line_reruns_to_the_same_bytes() {
    let args = [
        "rate-sweep",
        "--m",
        "3..6",
        "--cap",
        "none",
        "--n-samples",
        "300",
        "--seed",
        "5",
    ];
    let (_, first, _) = invoke(&args);
    let (_, second, _) = invoke(&args);
    assert_eq!(first, second);

    // the config line alone, written back as TOML, reproduces the run
    let mut toml = String::new();
    let mut coupling = String::from("[coupling]\n");
    for kv in config_line(&first).split(' ') {
        let (k, v) = kv.split_once('=').unwrap();
        let quoted = if k.ends_with("_values") {
            format!("\"{v}\"")
        } else if v.parse::<f64>().is_ok() || v == "true" || v == "false" {
            v.to_string()
        } else {
            format!("\"{v}\"")
        };
        match k.strip_prefix("coupling.") {
            Some(k) => coupling.push_str(&format!("{k} = {quoted}\n")),
            None => toml.push_str(&format!("{k} = {quoted}\n")),
        }
    }
    toml.push_str(&coupling);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("replay.toml");
    std::fs::write(&path, toml).unwrap();
    let (code, replay, err) = invoke(&["rate-sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(replay, first);
    assert_eq!(config_value(&first, "max_harvesters"), Some("none"));
}

#[test]
fn output_file_and_unwritable_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let (code, out, _) = invoke(&[
        "active-sweep",
        "--m",
        "3..4",
        "--n-samples",
        "200",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# config: "));
    assert!(text.contains("m,avg_active,avg_harvesting"));

    let missing = dir.path().join("no/such/dir/out.csv");
    let (code, _, err) = invoke(&[
        "active-sweep",
        "--m",
        "3",
        "--n-samples",
        "10",
        "-o",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: cannot write"));
}

#[test]
fn csv_round_trip_keeps_twelve_digits() {
    let mut t = Table::new(&["x", "v"]);
    let values = [1.0 / 3.0, std::f64::consts::PI * 1e5, 2.5e-7, 123.456, 0.1 + 0.2, 7.0];
    for (i, &v) in values.iter().enumerate() {
        t.push(vec![Cell::Int(i), Cell::Num(v)]);
    }
    let bytes = render_csv("seed=1", &t);
    let (config, header, rows) = parse_csv(&bytes).unwrap();
    assert_eq!(config, "seed=1");
    assert_eq!(header, ["x", "v"]);
    for (row, &v) in rows.iter().zip(&values) {
        let back: f64 = row[1].parse().unwrap();
        assert!((back - v).abs() <= 5e-12 * v.abs(), "{v} -> {back}");
    }
}

#[test]
fn worker_count_does_not_change_bytes() {
    let run_with = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_recyc-miso"))
            .args(["rate-sweep", "--m", "4..8", "--n-samples", "3000", "--seed", "99"])
            .env("RECYC_MISO_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run_with("1"), run_with("8"));

    let bad = Command::new(env!("CARGO_BIN_EXE_recyc-miso"))
        .args(["validate-config"])
        .env("RECYC_MISO_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn audit_row() {
    let (code, out, err) = invoke(&["audit", "--m", "4", "--n-samples", "2000"]);
    assert_eq!(code, 0, "{err}");
    let (_, header, rows) = parse_csv(out.as_bytes()).unwrap();
    assert_eq!(header[0], "n_samples");
    assert_eq!(rows.len(), 1);
    let consumed: f64 = rows[0][7].parse().unwrap();
    let budget: f64 = rows[0][8].parse().unwrap();
    assert!((consumed - budget).abs() <= 1e-6 * budget);
}
