use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chiralis"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn write_input(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chiralis-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn extended() -> PathBuf {
    write_input(
        "ex.toml",
        "dim = 2\nweights = [0, 1]\n[pi]\n\"1,2\" = \"x2\"\n",
    )
}

#[test]
fn reproduce_symplectic_passes() {
    let o = run(&["reproduce", "--case", "symplectic"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["passed"], true);
    assert!(v["conventions"]["pi_normalization"].is_string());
}

#[test]
fn reproduce_extended_example_reports_its_failures() {
    let o = run(&["reproduce", "--case", "extended-example"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("FAILED: differential-table"), "{err}");
    let v = json(&o);
    let failing: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        failing,
        ["differential-table", "v-nontrivial", "weight-2-slice-of-v"]
    );
}

#[test]
fn homology_of_the_class_slice() {
    let input = extended();
    let o = run(&[
        "homology",
        "--input",
        input.to_str().unwrap(),
        "--complex",
        "chiral-poisson-homology",
        "--weight",
        "2",
        "--charge",
        "0,0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let slices = v["result"]["slices"].as_array().unwrap();
    let deg = slices
        .iter()
        .find(|s| s["slice"]["degree"] == -1)
        .expect("degree -1 slice");
    assert_eq!(deg["basis_size"], 10);
    assert_eq!(deg["rank_incoming"], 9);
    assert_eq!(deg["kernel_dim"], 9);
    assert_eq!(v["result"]["total_dim"], 0);
}

#[test]
fn class_of_v_is_exact() {
    let input = extended();
    let o = run(&[
        "class",
        "--input",
        input.to_str().unwrap(),
        "--complex",
        "chiral-poisson-homology",
        "--state",
        "x1_1*psi1_1 - x2_1*psi2_1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"]["class"]["status"], "exact");
}

#[test]
fn check_axioms_example() {
    let o = run(&[
        "check-axioms",
        "--dim",
        "2",
        "--weight-max",
        "3",
        "--samples",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = json(&o);
    assert_eq!(v["result"]["vertex_algebra"]["passed"], true);
    assert_eq!(v["result"]["vertex_g_algebra"]["passed"], true);
}

#[test]
fn s1_and_brylinski() {
    let input = extended();
    let o = run(&[
        "s1-check",
        "--input",
        input.to_str().unwrap(),
        "--weight-max",
        "1",
        "--charge-bound",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"]["reversed_exponents_hold"], false);
    let o = run(&["brylinski", "--weight-max", "1", "--charge-bound", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"]["h0_identity"], true);
}

#[test]
fn input_errors_exit_two() {
    let bad = write_input("bad.toml", "dim = 2\n[pi]\n\"1,2\" = \"x2 + * x1\"\n");
    let o = run(&[
        "homology",
        "--input",
        bad.to_str().unwrap(),
        "--complex",
        "chiral-de-rham",
        "--weight",
        "0",
        "--charge",
        "0,0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3, column"), "{err}");
    assert!(o.stdout.is_empty());

    let asym = write_input(
        "asym.toml",
        "dim = 2\n[pi]\n\"1,2\" = \"x1\"\n\"2,1\" = \"x1\"\n",
    );
    let o = run(&[
        "class",
        "--input",
        asym.to_str().unwrap(),
        "--complex",
        "chiral-de-rham",
        "--state",
        "x1_0",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let input = extended();
    let o = run(&[
        "class",
        "--input",
        input.to_str().unwrap(),
        "--complex",
        "chiral-de-rham",
        "--state",
        "x1_1 * (phi2_0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("column"));

    let o = run(&["reproduce", "--case", "torus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["homology"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn basis_cap_from_environment() {
    let input = extended();
    let o = bin()
        .args([
            "homology",
            "--input",
            input.to_str().unwrap(),
            "--complex",
            "chiral-poisson-homology",
            "--weight",
            "3",
            "--charge",
            "0,0",
        ])
        .env("CHIRALIS_BASIS_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn reports_are_deterministic() {
    let a = run(&["reproduce", "--case", "symplectic"]);
    let b = run(&["reproduce", "--case", "symplectic", "--sequential"]);
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["check-axioms", "--samples", "20"]);
    let b = run(&["check-axioms", "--samples", "20"]);
    assert_eq!(a.stdout, b.stdout);
}
