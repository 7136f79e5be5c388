use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tifiss"));
    c.env_remove("TIFISS_THREADS");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(dir: &Path, config: &str, out: &str) -> Output {
    let cfg = write_config(dir, &format!("{out}.json"), config);
    bin().arg("run").arg(cfg).arg("--out").arg(dir.join(out)).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const EX1_EES2: &str = r#"{"schema": 1, "mode": "deterministic", "preset": "example1", "estimator": "ees2", "timings": false}"#;
const EX1_EES3: &str = r#"{"schema": 1, "mode": "deterministic", "preset": "example1", "estimator": "ees3", "timings": false}"#;

#[test]
fn malformed_json_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), r#"{"schema": 1, "mode": "#, "out");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config key"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_errors_name_the_key() {
    let dir = TempDir::new().unwrap();
    for (text, key) in [
        (r#"{"schema": 1, "mode": "deterministic", "preset": "example1", "theta": 2.0}"#, "theta"),
        (r#"{"schema": 1, "mode": "deterministic", "preset": "example1", "estimator": "ees9"}"#, "estimator"),
        (r#"{"schema": 1, "mode": "deterministic", "preset": "example1", "m_bar": 2}"#, "m_bar"),
        (r#"{"schema": 3, "mode": "deterministic"}"#, "schema"),
    ] {
        let o = run(dir.path(), text, "out");
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(stderr(&o).contains(&format!("`{key}`")), "{text}: {}", stderr(&o));
        assert!(!dir.path().join("out").exists());
    }
}

#[test]
fn missing_config_file_exits_2() {
    let o = bin().args(["run", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn example1_run_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = run(dir.path(), EX1_EES2, "a");
    assert!(a.status.success(), "{}", stderr(&a));
    let line = stdout(&a);
    assert!(line.starts_with("L = "), "{line}");
    let history = fs::read_to_string(dir.path().join("a/history.csv")).unwrap();
    let rows = history.lines().count() - 1;
    assert!((16..=41).contains(&rows), "{rows} rows");
    assert!(history.starts_with("iter,dofs,elements,eta,"));

    let b = run(dir.path(), EX1_EES2, "b");
    assert!(b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    for f in ["history.csv", "final_mesh.txt", "final_solution.txt"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", EX1_EES2);
    for (threads, out) in [("1", "one"), ("3", "three")] {
        let o = bin().env("TIFISS_THREADS", threads).arg("run").arg(&cfg).arg("--out").arg(dir.path().join(out)).arg("--quiet").output().unwrap();
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    assert_eq!(fs::read(dir.path().join("one/history.csv")).unwrap(), fs::read(dir.path().join("three/history.csv")).unwrap());

    let o = bin().env("TIFISS_THREADS", "0").arg("run").arg(&cfg).arg("--out").arg(dir.path().join("zero")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("zero").exists());
}

#[test]
fn example2_reports_point_value() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), r#"{"schema": 1, "mode": "deterministic", "preset": "example2", "tol": 1e-3}"#, "out");
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    let value: f64 = line.rsplit("= ").next().unwrap().trim().parse().unwrap();
    assert!((value - 1.0267919261).abs() < 1e-5, "{line}");
}

#[test]
fn goafem_run_writes_artifacts() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), r#"{"schema": 1, "mode": "goafem", "preset": "example3", "tol": 2e-3}"#, "out");
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("mu*zeta"));
    for f in ["history.csv", "final_mesh.txt", "final_solution.txt", "final_dual.txt"] {
        assert!(dir.path().join("out").join(f).is_file(), "{f}");
    }
    let history = fs::read_to_string(dir.path().join("out/history.csv")).unwrap();
    assert!(history.lines().next().unwrap().contains("mu_zeta"));
}

#[test]
fn sgfem_run_writes_artifacts() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), r#"{"schema": 1, "mode": "sgfem", "preset": "example4", "tol": 6e-2}"#, "out");
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("N_P"));
    let out = dir.path().join("out");
    for f in ["history.csv", "final_mesh.txt", "final_solution.txt", "index_set.txt", "minres_iters.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let history = fs::read_to_string(out.join("history.csv")).unwrap();
    assert_eq!(history.lines().next().unwrap(), "iter,N_X,N_P,dofs,eta,eX,eP,refinement_type,minres_iters");
    let index_set = fs::read_to_string(out.join("index_set.txt")).unwrap();
    assert!(index_set.starts_with("   0  (0"), "{index_set}");
}

#[test]
fn compare_histories() {
    let dir = TempDir::new().unwrap();
    assert!(run(dir.path(), EX1_EES2, "ees2").status.success());
    assert!(run(dir.path(), EX1_EES3, "ees3").status.success());
    let h2 = dir.path().join("ees2/history.csv");
    let h3 = dir.path().join("ees3/history.csv");
    let cmp = |a: &Path, b: &Path| bin().arg("compare").arg(a).arg(b).output().unwrap();

    let same = cmp(&h2, &h2);
    assert_eq!(same.status.code(), Some(0));
    assert!(!stdout(&same).contains(",yes"));

    // doubling one estimate is flagged on that row only
    let text = fs::read_to_string(&h2).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut fields: Vec<String> = lines[5].split(',').map(str::to_string).collect();
    fields[3] = format!("{:e}", 2.0 * fields[3].parse::<f64>().unwrap());
    lines[5] = fields.join(",");
    let perturbed = dir.path().join("perturbed.csv");
    fs::write(&perturbed, lines.join("\n") + "\n").unwrap();
    let o = cmp(&h2, &perturbed);
    let text = stdout(&o);
    let flagged: Vec<&str> = text.lines().filter(|l| l.ends_with(",yes")).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(flagged, ["4"], "{text}");

    let o = cmp(&h2, &h3);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("# slope a = -0.4"));

    let sg = dir.path().join("sg.csv");
    fs::write(&sg, "iter,N_X,N_P,dofs,eta,eX,eP,refinement_type,minres_iters\n0,1,1,1,1,1,1,spatial,1\n").unwrap();
    assert_eq!(cmp(&h2, &sg).status.code(), Some(2));
}

#[test]
fn compare_rejects_diverging_slopes() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let rows = |p: f64| {
        let mut s = String::from("iter,dofs,elements,eta\n");
        for k in 0..8 {
            let n = 100.0 * 2f64.powi(k);
            s += &format!("{k},{n},{n},{:e}\n", n.powf(p));
        }
        s
    };
    fs::write(&a, rows(-0.5)).unwrap();
    fs::write(&b, rows(-1.0)).unwrap();
    let o = bin().arg("compare").arg(&a).arg(&b).output().unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}
