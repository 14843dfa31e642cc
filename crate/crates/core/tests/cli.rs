use std::path::Path;
use twostage::bench::{read_csv, CSV_HEADER};
use twostage::cli::{run, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use twostage::linprog::Matrix;
use twostage::model::{generate_gaussian_instance, load_instance, save_instance, GeneratorConfig};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("twostage").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {stdout}"))
        .parse()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generated_file_matches_the_library_draw() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("i.json");
    let (code, _, err) = call(&[
        "generate",
        "--m1",
        "4",
        "--n1",
        "3",
        "--m2",
        "5",
        "--n2",
        "2",
        "--scenarios",
        "3",
        "--h",
        "1.5",
        "--seed",
        "11",
        "--output",
        path_str(&file),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let expected = generate_gaussian_instance(&GeneratorConfig::new(4, 3, 5, 2, 1.5, 3, 11));
    assert_eq!(load_instance(&file).unwrap(), expected);
}

#[test]
fn small_draw_solves_or_names_the_violated_assumption() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("i7.json");
    let (code, _, _) = call(&[
        "generate",
        "--m1",
        "3",
        "--n1",
        "2",
        "--m2",
        "3",
        "--n2",
        "2",
        "--scenarios",
        "2",
        "--seed",
        "7",
        "--output",
        path_str(&file),
    ]);
    assert_eq!(code, EXIT_OK);
    for method in ["extensive", "decouple", "benders", "naive"] {
        let (code, out, err) = call(&["solve", "--method", method, "--instance", path_str(&file)]);
        match code {
            EXIT_OK => assert!(field(&out, "objective").is_finite()),
            EXIT_FAILURE => assert!(
                err.contains("assumption violated") || err.contains("raise k_max"),
                "{method}: {err}"
            ),
            other => panic!("{method}: exit {other}: {err}"),
        }
    }
}

#[test]
fn extensive_and_decouple_agree_without_technology() {
    let dir = tempfile::tempdir().unwrap();
    let mut done = 0;
    for seed in 0.. {
        let mut p = generate_gaussian_instance(&GeneratorConfig::new(20, 4, 20, 4, 2.0, 5, seed));
        for sc in &mut p.scenarios {
            sc.t = Matrix::zeros(20, 4);
        }
        let file = dir.path().join(format!("t0_{seed}.json"));
        save_instance(&p, &file).unwrap();
        let (ce, oe, _) = call(&["solve", "--method", "extensive", "--instance", path_str(&file)]);
        let (cd, od, _) = call(&["solve", "--method", "decouple", "--instance", path_str(&file)]);
        if ce != EXIT_OK || cd != EXIT_OK {
            continue;
        }
        let (ze, zd) = (field(&oe, "objective"), field(&od, "objective"));
        assert!((ze - zd).abs() <= 1e-6, "{ze} vs {zd}");
        done += 1;
        if done == 3 {
            break;
        }
    }
}

#[test]
fn probe_reports_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    let mut p = generate_gaussian_instance(&GeneratorConfig::new(10, 3, 10, 3, 2.0, 4, 1));
    for sc in &mut p.scenarios {
        sc.t = Matrix::zeros(10, 3);
    }
    save_instance(&p, &file).unwrap();
    let (code, out, err) = call(&[
        "probe-invariance",
        "--instance",
        path_str(&file),
        "--rho",
        "0.5",
        "--probes",
        "5",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(field(&out, "epsilon_hat"), 0.0);
}

#[test]
fn bench_csv_has_the_table_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let (code, out, err) = call(&[
        "bench",
        "--runs",
        "1",
        "--scenarios",
        "3",
        "--m1",
        "15",
        "--m2",
        "15",
        "--n",
        "3",
        "--h",
        "2,3",
        "--no-warmup",
        "--seed",
        "5",
        "--output",
        path_str(&csv),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("Ngap"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].n1, rows[0].h, rows[1].h), (3, 2.0, 3.0));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(call(&["solve", "--method", "simplex", "--instance", "x"]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["--threads", "0", "bench"]).0, EXIT_USAGE);
    let (code, _, err) = call(&["solve", "--method", "naive", "--instance", "/nonexistent/file.json"]);
    assert_ne!(code, EXIT_OK);
    assert!(!err.is_empty());
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("probe-invariance"));
}
