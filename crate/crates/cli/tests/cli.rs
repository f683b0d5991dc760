use std::f64::consts::{E, PI};
use std::io::Write;
use std::process::Command;

use osk_cli::{builtin, emit, parse_scenario, parse_str, run, serialize, Format, Kind, Outcome, Scenario, Status};

const BIN: &str = env!("CARGO_BIN_EXE_osk");

fn osk(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(text.as_bytes()).unwrap();
    file
}

#[test]
fn worked_example_inverse4_recovers_f_and_r0() {
    let s = parse_scenario("builtin:worked-example").unwrap();
    let report = run(&s, Kind::Inverse4, false).unwrap();
    assert_eq!(report.status, Status::Ok);
    let Outcome::Inverse4 { recovery } = &report.result else {
        panic!("wrong outcome");
    };
    let f = recovery.f.coefficients_at(0.0);
    assert_eq!(f.len(), 2);
    for (n, c) in f {
        assert!((c - 1.0).abs() < 1e-6, "f_{n} = {c}");
    }
    let points = recovery.r0.axis().points();
    for (t, v) in points.iter().zip(recovery.r0.values()) {
        assert!((v - t).abs() < 1e-6, "r0({t}) = {v}");
    }
}

#[test]
fn worked_example_through_binary() {
    let out = osk(&["inverse4", "--scenario", "builtin:worked-example"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["t", "r0"]);
    assert_eq!(rows.len(), 2048);
    assert!(rows.iter().all(|r| (r[1] - r[0]).abs() < 1e-6));
}

#[test]
fn zero_source_gives_zero_field() {
    let file = write_temp(
        "kind = \"forward\"\nomega = 50.0\nhorizon = 1.0\nr0 = [{ coeff = 1.0 }]\n\n[f]\nmodes = []\n",
    );
    let out = osk(&["forward", "--scenario", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["x", "t", "u"]);
    assert_eq!(rows.len(), 33 * 65);
    assert!(rows.iter().all(|r| r[2] == 0.0));
}

#[test]
fn convergence_column_is_monotone() {
    let out = osk(&["convergence", "--scenario", "builtin:worked-example", "--omega-ladder", "64,128,256,512"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(
        header,
        ["omega", "residual_order1", "residual_order2", "omega_times_residual2"]
    );
    let omegas: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(omegas, [64.0, 128.0, 256.0, 512.0]);
    for w in rows.windows(2) {
        assert!(w[1][3] < w[0][3], "{:?}", rows);
        assert!(w[1][1] < w[0][1], "{:?}", rows);
    }
    for r in &rows {
        assert_eq!(r[3], r[0] * r[2]);
    }
}

#[test]
fn empty_file_is_an_error() {
    let file = write_temp("");
    let path = file.path().to_str().unwrap();
    assert!(parse_scenario(path).is_err());
    let out = osk(&["forward", "--scenario", path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn serializer_round_trip_on_builtin() {
    let s = builtin("worked-example").unwrap();
    assert_eq!(parse_str(&serialize(&s)).unwrap(), s);
}

#[test]
fn unsolvable_data_exit_two() {
    // Λ₁(1) = 0 for r₀ = t − 1/(e − 1), while ψ₁ ≠ 0
    let r0 = format!("r0 = [{{ coeff = 1.0, power = 1 }}, {{ coeff = {} }}]\n", -1.0 / (E - 1.0));
    let text = format!("kind = \"inverse2\"\nt0 = 1.0\n{r0}\n[psi]\nmodes = [{{ n = 1, coeff = [{{ coeff = 0.1 }}] }}]\n");
    let file = write_temp(&text);
    let out = osk(&["inverse2", "--scenario", file.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["status"], "unsolvable");
    assert_eq!(json["result"]["recovery"]["solvability"]["offending"][0], 1);
}

#[test]
fn inconsistent_data_exit_two() {
    let mut s = builtin("worked-example").unwrap();
    let alpha = s.alpha.as_mut().unwrap();
    alpha[0] = &alpha[0] + &osk_core::SlowFunction::monomial(1e-3, 1);
    let file = write_temp(&serialize(&s));
    let out = osk(&["inverse4", "--scenario", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("# status = \"inconsistent\""));
}

#[test]
fn errors_exit_one_and_name_the_field() {
    let out = osk(&["forward", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(1));

    let file = write_temp("kind = \"inverse1\"\nx0 = 3.5\n");
    let out = osk(&["inverse1", "--scenario", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x0"));

    let file = write_temp("kind = \"forward\"\nomega = 2.0\n");
    let out = osk(&["forward", "--scenario", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`f`"));

    let out = osk(&["inverse4", "--scenario", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind"));

    let out = osk(&["forward", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let run_with = |threads: &str| {
        Command::new(BIN)
            .args(["asymptotics", "--scenario", "builtin:worked-example", "--format", "json"])
            .env("OSK_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = run_with("1");
    let b = run_with("4");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_echo_reruns_to_the_same_report() {
    let s = builtin("worked-example").unwrap();
    let report = run(&s, Kind::Inverse1, false).unwrap();
    let mut first = Vec::new();
    emit(&report, Format::Json, &mut first).unwrap();
    let json: serde_json::Value = serde_json::from_slice(&first).unwrap();
    let echo: Scenario = serde_json::from_value(json["input"].clone()).unwrap();
    let kind = echo.resolve_kind(None).unwrap();
    let mut second = Vec::new();
    emit(&run(&echo, kind, false).unwrap(), Format::Json, &mut second).unwrap();
    assert_eq!(first, second);
}

#[test]
fn csv_echo_reruns_to_the_same_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p1.csv");
    let status = Command::new(BIN)
        .args(["inverse1", "--scenario", "builtin:worked-example", "--grid", "257", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let first = std::fs::read_to_string(&out).unwrap();
    let echo: String = first
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| !l.starts_with("status"))
        .map(|l| format!("{l}\n"))
        .collect();
    let rerun = dir.path().join("p1.toml");
    std::fs::write(&rerun, echo).unwrap();
    let second = osk(&["run", "--scenario", rerun.to_str().unwrap()]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(first.as_bytes(), &second.stdout[..]);
    let (_, rows) = csv_rows(&first);
    assert_eq!(rows.len(), 257);
}

#[test]
fn worked_example_points() {
    let s = builtin("worked-example").unwrap();
    assert_eq!(s.t0, Some(1.0));
    assert_eq!(s.x_points.as_deref(), Some(&[PI / 2.0, PI / 6.0][..]));
}
