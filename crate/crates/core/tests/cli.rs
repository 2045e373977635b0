use std::path::Path;
use std::process::{Command, Output};

use steklov::mesh::{generate_uniform_square, write_mesh};

fn steklov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steklov"))
        .args(args)
        .env_remove("STEKLOV_THREADS")
        .output()
        .expect("run steklov")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn mesh_info_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.txt");
    write_mesh(&generate_uniform_square(8).unwrap(), &file).unwrap();
    let out = steklov(&["mesh-info", "--file", path_str(&file)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out).trim(),
        "128 triangles, 208 edges, 32 boundary, admissible: yes"
    );
}

#[test]
fn inadmissible_mesh_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m1.txt");
    write_mesh(&generate_uniform_square(1).unwrap(), &file).unwrap();
    let out = steklov(&["mesh-info", "--file", path_str(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("admissible: no"));
    let out = steklov(&["bound-file", "--file", path_str(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).is_empty());
}

#[test]
fn unreadable_mesh_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    std::fs::write(&file, "steklov-mesh 1\n3 1\n0 0\n1 zero\n0 1\n0 1 2\n").unwrap();
    let out = steklov(&["bound-file", "--file", path_str(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
    let out = steklov(&["mesh-info", "--file", path_str(&dir.path().join("missing.txt"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn square_csv_matches_table_column() {
    let out = steklov(&["square", "--n", "8", "--k", "5", "--format", "csv", "--certify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,i,lower,lambda_h,upper,Ch");
    assert_eq!(lines.len(), 6);
    let published = [
        (0.231, 0.241),
        (1.195, 1.503),
        (1.195, 1.503),
        (1.541, 2.148),
        (2.570, 4.897),
    ];
    for (line, (pl, pu)) in lines[1..].iter().zip(published) {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((f[2] - pl).abs() <= 1e-3 + 1e-12, "{line}");
        assert!((f[4] - pu).abs() <= 1e-3 + 1e-12, "{line}");
        assert!((f[5] - 0.4039).abs() <= 2e-4);
    }
}

#[test]
fn square_markdown_layout_and_determinism() {
    let args = ["square", "--n", "4", "8", "--digits", "4"];
    let a = steklov(&args);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    assert!(text.starts_with("| h | 1/4 | 1/8 |\n"));
    assert!(text.contains("| λ1 | ("));
    assert!(text.contains("| σ_lower | - | "));
    assert!(text.contains("| σ_upper | - | "));
    assert!(text.contains("without certification"));
    let b = Command::new(env!("CARGO_BIN_EXE_steklov"))
        .args(args)
        .env("STEKLOV_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_file_and_generated_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("gen.txt");
    let out = steklov(&[
        "gen-mesh",
        "--domain",
        "square",
        "--n",
        "4",
        "--out",
        path_str(&mesh),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = dir.path().join("r.csv");
    let out = steklov(&[
        "bound-file",
        "--file",
        path_str(&mesh),
        "--k",
        "3",
        "--format",
        "csv",
        "--out",
        path_str(&report),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(steklov(&["square", "--n", "1"]).status.code(), Some(1));
    assert_eq!(
        steklov(&["square", "--n", "4", "--k", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        steklov(&["square", "--n", "2", "--k", "500"]).status.code(),
        Some(1)
    );
    assert_eq!(steklov(&["square", "--format", "xml"]).status.code(), Some(1));
    assert_eq!(steklov(&["frobnicate"]).status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_steklov"))
        .args(["square", "--n", "4"])
        .env("STEKLOV_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(steklov(&["--help"]).status.code(), Some(0));
}

#[test]
fn reference_override_changes_rates_only() {
    let base = stdout(&steklov(&["square", "--n", "4", "8"]));
    let custom = stdout(&steklov(&[
        "square",
        "--n",
        "4",
        "8",
        "--reference",
        "0.24,1.49,1.49,2.08,4.73",
    ]));
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("| σ"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&base), strip(&custom));
    assert_ne!(base, custom);
}
