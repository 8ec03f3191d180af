use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use projtest_core::mc::{generate_draw, DgpSpec};
use projtest_core::seed::stream_rng;
use serde_json::Value;
use tempfile::TempDir;

fn projtest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projtest"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Writes one draw of design `dgp` as `d,x1,...` and returns the path.
fn write_dgp(dir: &Path, dgp: u8, n: usize, seed: u64) -> PathBuf {
    let draw = generate_draw(&DgpSpec::new(dgp, n).unwrap(), &mut stream_rng(seed, 0));
    let p = draw.x.ncols();
    let mut s = String::from("d");
    for j in 1..=p {
        let _ = write!(s, ",x{j}");
    }
    s.push('\n');
    for i in 0..n {
        let _ = write!(s, "{}", draw.d[i] as u8);
        for j in 0..p {
            let _ = write!(s, ",{}", draw.x[(i, j)]);
        }
        s.push('\n');
    }
    let path = dir.join(format!("dgp{dgp}_{n}_{seed}.csv"));
    std::fs::write(&path, s).unwrap();
    path
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn pval_cvm(csv: &Path, seed: u64) -> f64 {
    let out = projtest(&[
        "test",
        "--input",
        csv.to_str().unwrap(),
        "--treatment",
        "d",
        "--seed",
        &seed.to_string(),
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["tests"][0]["test"], "CvM");
    v["tests"][0]["pval"].as_f64().unwrap()
}

#[test]
fn null_design_rarely_rejected() {
    let dir = TempDir::new().unwrap();
    let kept = (0..50)
        .filter(|&s| pval_cvm(&write_dgp(dir.path(), 1, 500, s), s) > 0.05)
        .count();
    assert!(kept >= 45, "pval > 0.05 in only {kept}/50");
}

#[test]
fn quadratic_alternative_detected() {
    let dir = TempDir::new().unwrap();
    let hits = (0..50)
        .filter(|&s| pval_cvm(&write_dgp(dir.path(), 3, 500, s), s) <= 0.01)
        .count();
    assert!(hits >= 48, "pval <= 0.01 in only {hits}/50");
}

#[test]
fn malformed_csv_exits_with_invalid_input() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (
            "noheader.csv",
            "1,0.5,0.2\n0,0.1,0.3\n",
            "header row required",
        ),
        (
            "nonbinary.csv",
            "d,x1\n1,0.5\n2,0.1\n",
            "line 3, column 'd'",
        ),
        ("badnum.csv", "d,x1\n1,0.5\n0,oops\n", "line 3, column 'x1'"),
        (
            "ragged.csv",
            "d,x1\n1,0.5\n0\n",
            "line 3: expected 2 fields",
        ),
    ];
    for (name, contents, needle) in cases {
        let path = write(dir.path(), name, contents);
        let out = projtest(&["fit", "--input", path.to_str().unwrap(), "--treatment", "d"]);
        assert_eq!(out.status.code(), Some(3), "{name}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    let out = projtest(&[
        "fit",
        "--input",
        "/nonexistent/file.csv",
        "--treatment",
        "d",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn model_failures_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    // x1 separates d perfectly.
    let sep = write(
        dir.path(),
        "sep.csv",
        "d,x1\n0,-2\n0,-1\n0,-0.5\n1,0.5\n1,1\n1,2\n",
    );
    let out = projtest(&["fit", "--input", sep.to_str().unwrap(), "--treatment", "d"]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // x2 = 2 x1.
    let col = write(
        dir.path(),
        "col.csv",
        "d,x1,x2\n0,1,2\n1,2,4\n0,3,6\n1,-1,-2\n1,0.5,1\n0,0.2,0.4\n",
    );
    let out = projtest(&["fit", "--input", col.to_str().unwrap(), "--treatment", "d"]);
    assert_eq!(
        out.status.code(),
        Some(5),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let bad = projtest(&["simulate", "--dgp", "12", "--reps", "1"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn outputs_are_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let csv = write_dgp(dir.path(), 2, 300, 4);
    for format in ["json", "csv", "markdown", "text"] {
        let mut files = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("report_{format}_{run}"));
            let o = projtest(&[
                "test",
                "--input",
                csv.to_str().unwrap(),
                "--treatment",
                "d",
                "--bootstrap",
                "199",
                "--shaikh-c",
                "0.1,0.5",
                "--seed",
                "11",
                "--format",
                format,
                "--output",
                out.to_str().unwrap(),
            ]);
            stdout(&o);
            files.push(std::fs::read(out).unwrap());
        }
        assert_eq!(files[0], files[1], "{format}");
    }
    let a = stdout(&projtest(&["ecdf", "--n", "300", "--seed", "3"]));
    let b = stdout(&projtest(&["ecdf", "--n", "300", "--seed", "3"]));
    assert_eq!(a, b);
    let sim = [
        "simulate",
        "--dgp",
        "1,2",
        "--n",
        "60",
        "--reps",
        "8",
        "--bootstrap",
        "49",
        "--format",
        "csv",
    ];
    assert_eq!(stdout(&projtest(&sim)), stdout(&projtest(&sim)));
}

/// Numeric tokens, taken from the raw text so no float is re-parsed.
fn numeric_tokens(text: &str, separators: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace() || separators.contains(c))
        .filter(|t| t.parse::<f64>().is_ok())
        .map(str::to_string)
        .collect()
}

#[test]
fn every_text_number_is_in_json() {
    let dir = TempDir::new().unwrap();
    let csv = write_dgp(dir.path(), 4, 250, 8);
    for cmd in ["fit", "test"] {
        let mut base = vec![cmd, "--input", csv.to_str().unwrap(), "--treatment", "d"];
        if cmd == "test" {
            base.extend([
                "--bootstrap",
                "99",
                "--shaikh-c",
                "0.05,0.15",
                "--seed",
                "2",
            ]);
        }
        let text = stdout(&projtest(&[&base[..], &["--format", "text"]].concat()));
        let json = stdout(&projtest(&[&base[..], &["--format", "json"]].concat()));
        let nums: HashSet<String> = numeric_tokens(&json, ",:[]{}\"").into_iter().collect();
        let seen = numeric_tokens(&text, "()|,:");
        for tok in &seen {
            assert!(nums.contains(tok), "{cmd}: '{tok}' missing from JSON");
        }
        assert!(
            seen.len() > 10,
            "{cmd}: only {} numbers in text report",
            seen.len()
        );
    }
}

#[test]
fn fit_reports_coefficients() {
    let dir = TempDir::new().unwrap();
    let csv = write_dgp(dir.path(), 1, 2000, 1);
    let v: Value = serde_json::from_str(&stdout(&projtest(&[
        "fit",
        "--input",
        csv.to_str().unwrap(),
        "--treatment",
        "d",
        "--format",
        "json",
    ])))
    .unwrap();
    let coefs = v["model"]["coefficients"].as_array().unwrap();
    let names: Vec<&str> = coefs.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["intercept", "x1", "x2"]);
    for c in coefs {
        let est = c["estimate"].as_f64().unwrap();
        let se = c["std_error"].as_f64().unwrap();
        assert!((est - 1.0).abs() < 4.0 * se, "{c}");
    }
    assert_eq!(v["model"]["converged"], true);

    let csv_out = stdout(&projtest(&[
        "fit",
        "--input",
        csv.to_str().unwrap(),
        "--treatment",
        "d",
        "--covariates",
        "x1",
        "--no-intercept",
        "--link",
        "logit",
        "--format",
        "csv",
    ]));
    let lines: Vec<&str> = csv_out.lines().collect();
    assert_eq!(lines[0], "term,estimate,std_error,z");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("x1,"));
}

#[test]
fn test_csv_has_row_per_test_and_alpha() {
    let dir = TempDir::new().unwrap();
    let csv = write_dgp(dir.path(), 1, 200, 3);
    let out = stdout(&projtest(&[
        "test",
        "--input",
        csv.to_str().unwrap(),
        "--treatment",
        "d",
        "--bootstrap",
        "99",
        "--shaikh-c",
        "0.5",
        "--format",
        "csv",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "test,statistic,pval,alpha,critical_value,reject");
    // CvM, KS, T(0.5) at three default alphas.
    assert_eq!(lines.len(), 1 + 3 * 3);
    assert!(lines[7].starts_with("T(0.5),"));
}

#[test]
fn simulate_reads_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "sim.cfg",
        "# small run\ndgps = 3\nsample_sizes = 100\nreps = 10\nbootstrap = 49\nalphas = 0.05\nseed = 17\n",
    );
    let out = stdout(&projtest(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "dgp,n,test,alpha,rate,mc_se,reps,bootstrap,failures,seed"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3,100,CvM,0.05,"));
    assert!(lines[1].ends_with(",10,49,0,17"));
}

#[test]
fn ecdf_formats() {
    let csv = stdout(&projtest(&[
        "ecdf", "--n", "200", "--seed", "5", "--format", "csv",
    ]));
    assert!(csv.starts_with("u,ecdf_misspecified,ecdf_correct\n"));
    assert!(csv.trim_end().ends_with(",1,1"));
    let v: Value = serde_json::from_str(&stdout(&projtest(&[
        "ecdf", "--n", "200", "--seed", "5", "--format", "json",
    ])))
    .unwrap();
    assert_eq!(v["n"], 200);
    assert_eq!(v["rows"].as_array().unwrap().len(), csv.lines().count() - 1);
    let out = projtest(&["ecdf", "--n", "50"]);
    assert_eq!(out.status.code(), Some(3));
}
