use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fractdim"))
}

fn system(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../systems").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn cantor_dimension() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().to_str().unwrap();
    let o = run(&["dim", "--system", system("cantor.toml").to_str().unwrap(), "--measure", "uniform", "--levels", "16", "--out", out]);
    assert!(o.status.success());
    let v = report(t.path())["result"]["value"].as_f64().unwrap();
    assert!((v - 2f64.ln() / 3f64.ln()).abs() < 1e-9);
}

#[test]
fn golden_is_pisot() {
    let o = run(&["classify", "--poly", "1,-1,-1"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("Pisot"));
    let o = run(&["classify", "--poly", "-1,-1,1", "--constant-first"]);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("Pisot"));
}

#[test]
fn dup3_entropy() {
    let t = tempfile::tempdir().unwrap();
    let o = run(&[
        "entropy",
        "--system",
        system("dup3.toml").to_str().unwrap(),
        "--levels",
        "16",
        "--out",
        t.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let r = &report(t.path())["result"]["estimate"];
    let target = 3f64.ln() - 2.0 / 3.0 * 2f64.ln();
    assert!(r["lower"].as_f64().unwrap() <= target + 1e-11);
    assert!(r["upper"].as_f64().unwrap() >= target - 1e-11);
    let csv = std::fs::read_to_string(t.path().join("levels.csv")).unwrap();
    assert!(csv.starts_with("n,H,H_lower,H_upper,H_over_n,step_quotient,method\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["dim", "--bogus"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    // stochastic commands require a seed
    let cantor = system("cantor.toml");
    assert_eq!(run(&["localdim", "--system", cantor.to_str().unwrap()]).status.code(), Some(64));
    assert_eq!(run(&["dim", "--system", "/nonexistent.toml"]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--poly", "2,1"]).status.code(), Some(2));
    let t = tempfile::tempdir().unwrap();
    let o = run(&[
        "overlap",
        "--system",
        system("dup3.toml").to_str().unwrap(),
        "--levels",
        "30",
        "--cap",
        "1000",
        "--out",
        t.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
}

#[test]
fn render_is_p5() {
    let t = tempfile::tempdir().unwrap();
    let o = run(&["render", "--system", system("gasket.toml").to_str().unwrap(), "--level", "3", "--out", t.path().to_str().unwrap()]);
    assert!(o.status.success());
    let img = std::fs::read(t.path().join("occupancy.pgm")).unwrap();
    assert!(img.starts_with(b"P5\n8 8\n255\n"));
    assert_eq!(img.iter().skip(11).filter(|&&b| b == 255).count(), 27);
    let o = run(&["render", "--system", system("cantor.toml").to_str().unwrap(), "--out", t.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn deterministic_artifacts() {
    let carpet = system("carpet.toml");
    let dup3 = system("dup3.toml");
    let cases: Vec<Vec<&str>> = vec![
        vec!["optimize", "--system", carpet.to_str().unwrap(), "--seed", "11"],
        vec!["localdim", "--system", dup3.to_str().unwrap(), "--seed", "5", "--samples", "20000", "--points", "32", "--k-max", "8"],
        vec!["sponge", "--system", carpet.to_str().unwrap(), "--levels", "4"],
        vec!["boxdim", "--system", carpet.to_str().unwrap(), "--levels", "5"],
    ];
    for case in cases {
        let runs: Vec<_> = ["1", "3"]
            .iter()
            .map(|threads| {
                let t = tempfile::tempdir().unwrap();
                let mut args = case.clone();
                args.extend(["--threads", threads, "--out", t.path().to_str().unwrap()]);
                let o = run(&args);
                assert!(o.status.success(), "{:?}: {}", case, String::from_utf8_lossy(&o.stderr));
                artifacts(t.path())
            })
            .collect();
        assert!(runs[0].len() >= 3);
        assert_eq!(runs[0], runs[1], "{case:?}");
    }
}
