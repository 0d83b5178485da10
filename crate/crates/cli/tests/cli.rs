use std::path::PathBuf;
use std::process::Command;

use betacalc_cli::run;

fn fixture(name: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    dir.join(name).to_string_lossy().into_owned()
}

/// Runs the command in-process and returns `(exit code, stdout, stderr)`.
fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["betacalc"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn exit_codes_follow_error_classes() {
    let cases = [
        ("validate", "validate_hahn.json", 0),
        ("validate", "validate_custom.json", 2),
        ("validate", "missing_q.json", 1),
        ("slp", "slp_nondegeneracy.json", 2),
        ("integrate", "integrate_truncation_cap.json", 3),
        ("special", "special_pole.json", 3),
    ];
    for (cmd, file, want) in cases {
        let (code, _, err) = call(&[cmd, &fixture(file)]);
        assert_eq!(code, want, "{cmd} {file}: {err}");
        // a failed validation is a report on stdout, not an error
        if want != 0 && file != "validate_custom.json" {
            assert!(err.starts_with("error: "), "{err}");
        }
    }
    assert_eq!(call(&["validate", "/nonexistent/config.json"]).0, 1);
    assert_eq!(call(&["frobnicate"]).0, 1);
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn nondegeneracy_message_names_the_condition() {
    let (_, _, err) = call(&["slp", &fixture("slp_nondegeneracy.json")]);
    assert!(err.contains("|a1| + |a2|"), "{err}");
}

#[test]
fn integrate_reports_the_jackson_value() {
    let (code, out, _) = call(&["integrate", &fixture("integrate_jackson.json"), "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let value = v["value"][0].as_f64().unwrap();
    let tail = v["tail_bound"].as_f64().unwrap();
    assert!(
        (value - 2.0 / 3.0).abs() <= tail.max(1e-12),
        "{value} (tail {tail})"
    );
    assert_eq!(v["value"][1].as_f64().unwrap(), 0.0);
}

#[test]
fn special_values_at_the_fixed_point_and_reciprocal() {
    let (code, out, _) = call(&["special", &fixture("special_e.json")]);
    assert_eq!(code, 0);
    let mut rows = csv::Reader::from_reader(out.as_bytes());
    let first = rows.records().next().unwrap().unwrap();
    assert_eq!((&first[0], &first[1], &first[2]), ("0.0", "1.0", "0.0"));

    // e_p * E_{-p} = 1 through two runs of the binary logic
    let dir = tempfile::tempdir().unwrap();
    let body = |kind: &str, re: f64, im: f64| {
        format!(
            r#"{{"beta": {{"family": "hahn", "q": 0.5, "omega": 1.0}},
               "special": {{"kind": "{kind}", "p": {{"constant": [{re}, {im}]}}, "points": [2.5, 3.0, 4.0, 6.0]}}}}"#
        )
    };
    let small = write_config(&dir, "e.json", &body("e", 0.4, 0.25));
    let big = write_config(&dir, "E.json", &body("E", -0.4, -0.25));
    let parse = |text: String| -> Vec<(f64, f64)> {
        csv::Reader::from_reader(text.as_bytes())
            .records()
            .map(|r| {
                let r = r.unwrap();
                (r[1].parse().unwrap(), r[2].parse().unwrap())
            })
            .collect()
    };
    let (e, big_e) = (
        parse(call(&["special", &small]).1),
        parse(call(&["special", &big]).1),
    );
    assert_eq!(e.len(), 4);
    for ((a, b), (c, d)) in e.iter().zip(&big_e) {
        // (a + ib)(c + id) with the E coefficient -p = (-0.4, -0.25)
        let (re, im) = (a * c - b * d, a * d + b * c);
        assert!((re - 1.0).abs() <= 1e-12 && im.abs() <= 1e-12, "{re} {im}");
    }
}

#[test]
fn constant_potential_shifts_every_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let shifted = std::fs::read_to_string(fixture("slp_dirichlet.json"))
        .unwrap()
        .replace(
            r#""r": {"constant": [0.0, 0.0]}"#,
            r#""r": {"constant": [5.0, 0.0]}"#,
        );
    assert!(shifted.contains("5.0"));
    let path = write_config(&dir, "shifted.json", &shifted);
    let parse = |text: String| -> Vec<f64> { text.lines().map(|l| l.parse().unwrap()).collect() };
    let base = parse(call(&["slp", &fixture("slp_dirichlet.json")]).1);
    let moved = parse(call(&["slp", &path]).1);
    assert_eq!(base.len(), 3);
    for (a, b) in base.iter().zip(&moved) {
        assert!((b - a - 5.0).abs() <= 1e-10 * b.abs(), "{a} {b}");
    }
}

#[test]
fn out_directory_receives_result_files() {
    let bin = env!("CARGO_BIN_EXE_betacalc");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("slp");
    let status = Command::new(bin)
        .args(["slp", &fixture("slp_dirichlet.json"), "--modes", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let solution: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    assert_eq!(solution["eigenvalues"].as_array().unwrap().len(), 3);
    assert!(out.join("mode_0.csv").exists() && out.join("mode_1.csv").exists());
    assert!(!out.join("mode_2.csv").exists());

    let out = dir.path().join("int");
    let status = Command::new(bin)
        .args(["integrate", &fixture("integrate_jackson.json"), "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("integrate.csv").exists() && out.join("summary.json").exists());
}

#[test]
fn diff_output_is_a_lattice_csv() {
    let (code, out, _) = call(&["diff", &fixture("diff_hahn.json")]);
    assert_eq!(code, 0);
    let rows: Vec<csv::StringRecord> = csv::Reader::from_reader(out.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .collect();
    assert!(rows.len() > 3);
    // D_beta sin at t = 4 on the Hahn map is (sin 3 - sin 4) / (3 - 4)
    let t: f64 = rows[0][1].parse().unwrap();
    let d: f64 = rows[0][3].parse().unwrap();
    assert_eq!(t, 4.0);
    assert!((d - (3f64.sin() - 4f64.sin()) / (3.0 - 4.0)).abs() <= 1e-14);
}
