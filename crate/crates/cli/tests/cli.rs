use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sunif_core::montecarlo::ExperimentResult;
use sunif_core::report::ResultDocument;

fn sunif(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sunif")).args(args).output().expect("spawn sunif")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, bytes).unwrap();
    p
}

#[test]
fn gen_is_deterministic() {
    let a = sunif(&["gen", "--seed", "1", "--length", "8"]);
    let b = sunif(&["gen", "--seed", "1", "--length", "8"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), "00101101\n");
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gen_rejects_negative_length() {
    let o = sunif(&["gen", "--seed", "1", "--length", "-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn packed_and_text_agree() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("t.txt");
    let packed = dir.path().join("t.bin");
    for (path, format) in [(&text, "text"), (&packed, "packed")] {
        let o = sunif(&["gen", "--seed", "3", "--length", "5000", "--format", format, "--out", path.to_str().unwrap()]);
        assert!(o.status.success());
    }
    for k in ["1", "4", "9"] {
        let a = sunif(&["disc", "--in", text.to_str().unwrap(), "--k", k, "--n", "4000"]);
        let b = sunif(&["disc", "--in", packed.to_str().unwrap(), "--k", k, "--n", "4000"]);
        assert!(a.status.success() && b.status.success());
        assert_eq!(stdout(&a), stdout(&b));
    }
}

#[test]
fn disc_examples() {
    let dir = tempfile::tempdir().unwrap();
    let zeros = write(dir.path(), "z.txt", b"0000000000\n");
    let o = sunif(&["disc", "--in", zeros.to_str().unwrap(), "--k", "3", "--n", "8"]);
    assert_eq!(stdout(&o), "56 8\n");
    let short = write(dir.path(), "s.txt", b"001\n");
    let o = sunif(&["disc", "--in", short.to_str().unwrap(), "--k", "1", "--n", "3"]);
    assert_eq!(stdout(&o), "1 3\n");
}

#[test]
fn disc_horizon_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let zeros = write(dir.path(), "z.txt", b"0000000000\n");
    let o = sunif(&["disc", "--in", zeros.to_str().unwrap(), "--k", "3", "--n", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn disc_rejects_stray_bytes_in_text() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "b.txt", b"0102\n");
    let o = sunif(&["disc", "--in", bad.to_str().unwrap(), "--format", "text", "--k", "1", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn profile_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.txt", b"01010\n");
    let o = sunif(&["profile", "--in", t.to_str().unwrap(), "--s-spec", "const:2", "--checkpoints", "1,4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("n,k,d_num,d_den,d_float\n"), "{out}");
    assert!(out.contains("4,2,4,4,1.0000000000000000\n"), "{out}");
}

#[test]
fn phi_examples() {
    assert_eq!(stdout(&sunif(&["phi", "--s-spec", "const:2", "--n", "256"])), "256 3 ok\n");
    assert_eq!(stdout(&sunif(&["phi", "--s-spec", "const:0", "--n", "1000"])), "1000 6 ok\n");
    assert_eq!(sunif(&["phi", "--s-spec", "const:0", "--n", "1"]).status.code(), Some(1));
    assert_eq!(sunif(&["phi", "--s-spec", "bogus:1", "--n", "4"]).status.code(), Some(1));
}

#[test]
fn phi_reports_hazards_with_exit_3() {
    // log2(3) + 0.415037499278844 lies within 1e-12 of 2
    let o = sunif(&["phi", "--s-spec", "form:1,0,0.415037499278844", "--n", "3"]);
    assert!(stdout(&o).ends_with(" hazard\n"), "{}", stdout(&o));
    assert_eq!(o.status.code(), Some(3));

    let o = sunif(&["phi", "--s-spec", "const:2", "--range", "2:300"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 299);
}

#[test]
fn admissible_prints_json() {
    let o = sunif(&["admissible", "--s-spec", "const:0", "--horizon", "4096"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["nonnegative"], serde_json::Value::Bool(true));
    assert_eq!(v["diverging_up_to_horizon"], serde_json::Value::Bool(true));
}

const SMALL_SPEC: &str = r#"{
  "seed": 5,
  "trials": 12,
  "length": 8192,
  "checkpoints": {"kind": "geometric", "from_exp": 10, "to_exp": 13},
  "schedules": [
    {"name": "const1", "schedule": {"kind": "closed_form", "a": 0.0, "b": 0.0, "c": 1.0}},
    {"name": "phi0", "schedule": {"kind": "clamped", "min": 1, "inner": {"kind": "phi_of", "inner": {"kind": "closed_form", "a": 0.0, "b": 0.0, "c": 0.0}}}}
  ],
  "epsilon": 0.5,
  "min_checkpoint": 1024
}"#;

fn run_exp(spec: &Path, threads: &str, out: &Path) -> ResultDocument<ExperimentResult> {
    let o = sunif(&["exp", "--spec-file", spec.to_str().unwrap(), "--threads", threads, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&std::fs::read(out).unwrap()).unwrap()
}

#[test]
fn exp_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", SMALL_SPEC.as_bytes());
    let a = run_exp(&spec, "1", &dir.path().join("a.json"));
    let b = run_exp(&spec, "8", &dir.path().join("b.json"));
    assert_eq!(a.payload, b.payload);
    assert_eq!(a.digest().unwrap(), b.digest().unwrap());
}

#[test]
fn exp_single_trial_quantiles_coincide() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", SMALL_SPEC.replace("\"trials\": 12", "\"trials\": 1").as_bytes());
    let csv = dir.path().join("r.csv");
    let o = sunif(&[
        "exp",
        "--spec-file",
        spec.to_str().unwrap(),
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let doc: ResultDocument<ExperimentResult> =
        serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    for s in &doc.payload.schedules {
        for c in &s.checkpoints {
            assert_eq!(c.median, c.q10);
            assert_eq!(c.median, c.q90);
        }
    }
    assert!(std::fs::read_to_string(csv).unwrap().lines().count() > 1);
}

#[test]
fn exp_rejects_malformed_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", b"{\"seed\": 1}");
    let o = sunif(&["exp", "--spec-file", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dist_small_n() {
    let o = sunif(&["dist", "--n", "1"]);
    assert!(o.status.success());
    let lines: Vec<_> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 2, "{lines:?}");
    assert_eq!(lines[1], "1,1,1,1");

    let o = sunif(&["dist", "--n", "2"]);
    let out = stdout(&o);
    assert_eq!(out, "value_num,value_den,prob_num,prob_den\n0,2,1,2\n2,2,1,2\n");
    assert_eq!(sunif(&["dist", "--n", "0"]).status.code(), Some(1));
    assert_eq!(sunif(&["dist", "--n", "65"]).status.code(), Some(1));
}
