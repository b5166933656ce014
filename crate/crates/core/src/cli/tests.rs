use super::*;

fn descriptor(name: &str) -> String {
    format!("{}/../../descriptors/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["cansys"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn parses_complex_and_ladders() {
    assert_eq!(parse_complex("-1, 2.5").unwrap(), Complex64::new(-1.0, 2.5));
    assert!(parse_complex("1").is_err());
    assert!(parse_complex("1,2,3").is_err());
    assert_eq!(parse_ladder("10,10,3").unwrap(), vec![10.0, 100.0, 1000.0]);
    assert!(parse_ladder("10,10,2.5").is_err());
    assert!(parse_ladder("-1,10,3").is_err());
}

#[test]
fn step_row_at_two_i() {
    let (code, out, _) = call(&["m", &descriptor("step.json"), "--z", "0,2"]);
    assert_eq!(code, 0);
    assert_eq!(
        out.lines().next().unwrap(),
        "z_re,z_im,m_re,m_im,radius,converged"
    );
    let row = &csv_rows(&out)[0];
    assert_eq!(
        &row[..4],
        [
            "0.000000000000e+00",
            "2.000000000000e+00",
            "0.000000000000e+00",
            "5.000000000000e-01"
        ]
    );
    assert!(num(&row[4]) < 1e-8);
}

#[test]
fn identity_row_at_i() {
    let (code, out, _) = call(&[
        "m",
        &descriptor("identity.json"),
        "--z",
        "0,1",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    let row = &v["rows"][0];
    assert_eq!(row["m"], json!([0.0, 1.0]));
    assert!(row["radius"].as_f64().unwrap() < 1e-8);
}

#[test]
fn alpha_one_ladder_decays_like_cube_root() {
    let (_, out, _) = call(&["m", &descriptor("alpha1.json"), "--ladder", "10,10,4"]);
    let rows = csv_rows(&out);
    let mods: Vec<f64> = rows.iter().map(|r| num(&r[2]).hypot(num(&r[3]))).collect();
    for w in mods.windows(2) {
        let slope = (w[1] / w[0]).log10();
        assert!((slope + 1.0 / 3.0).abs() < 1e-3, "{slope}");
    }
}

#[test]
fn transforms_of_simple_descriptors() {
    let (_, out, _) = call(&[
        "transform",
        &descriptor("uniform_string.json"),
        "--kind",
        "string",
    ]);
    let h = parse_descriptor(&out, None).unwrap();
    assert_eq!(h, Hamiltonian::constant(0.5, 0.0, 0.5));
    let (_, out, _) = call(&[
        "transform",
        &descriptor("massless_indefinite.json"),
        "--kind",
        "indefinite_string",
    ]);
    let h = parse_descriptor(&out, None).unwrap();
    let p = h.primitive_integrals(3.0).unwrap();
    assert_eq!((p.a, p.b, p.c), (0.0, 0.0, 3.0));
    let (_, out, _) = call(&[
        "transform",
        &descriptor("identity.json"),
        "--kind",
        "scale",
        "--r3",
        "2",
    ]);
    assert_eq!(
        parse_descriptor(&out, None).unwrap(),
        Hamiltonian::constant(2.0, 0.0, 0.5)
    );
}

#[test]
fn transform_errors() {
    let (code, _, err) = call(&[
        "transform",
        &descriptor("identity.json"),
        "--kind",
        "string",
    ]);
    assert_eq!(code, EXIT_FAIL);
    assert!(err.contains("does not apply"));
    let (code, _, err) = call(&[
        "transform",
        &descriptor("identity.json"),
        "--kind",
        "fourier",
    ]);
    assert_eq!(code, EXIT_FAIL);
    assert!(err.contains("unsupported transform"));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(call(&["verify", "--scenario", "constant"]).0, EXIT_OK);
    assert_eq!(
        call(&["verify", "--scenario", "oscillating_A"]).0,
        EXIT_FAIL
    );
    let (code, _, err) = call(&["verify", "--scenario", "constant", "--theorem", "nope"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(err.contains("unknown theorem id"));
    let (code, _, err) = call(&["verify", "--scenario", "missing"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(err.contains("unknown scenario"));
}

#[test]
fn verify_from_descriptor_and_claim() {
    let (code, out, _) = call(&[
        "verify",
        &descriptor("alpha1.json"),
        "--theorem",
        "alpha_positive",
        "--claim",
        r#"{"claim":"index","alpha":1}"#,
        "--ladder",
        "10,10,6",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["theorem_id"], "alpha_positive");
    assert_eq!(v["scenario"], "alpha1");
}

#[test]
fn nonconvergence_exits_with_two() {
    // limit-circle: no boundary condition at L is chosen, so m is not determined
    let dir = std::env::temp_dir().join(format!("cansys-lc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("finite.json");
    std::fs::write(
        &path,
        r#"{"form":"Constant","params":{"a0":1,"b0":0,"c0":1},"L":1}"#,
    )
    .unwrap();
    let (code, out, _) = call(&["m", path.to_str().unwrap(), "--z", "0,1"]);
    assert_eq!(code, EXIT_INCONCLUSIVE);
    assert!(out.trim_end().ends_with("false"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn real_z_and_bad_input_fail() {
    assert_eq!(
        call(&["m", &descriptor("identity.json"), "--z", "1,0"]).0,
        EXIT_FAIL
    );
    assert_eq!(call(&["m", "/nonexistent.json", "--z", "0,1"]).0, EXIT_FAIL);
    assert_eq!(call(&["m", &descriptor("identity.json")]).0, EXIT_FAIL);
    assert_eq!(
        call(&["validate", &descriptor("identity.json"), "--format", "csv"]).0,
        EXIT_FAIL
    );
    assert_eq!(call(&["frobnicate"]).0, EXIT_FAIL);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn invalid_descriptor_fails_validation() {
    let dir = std::env::temp_dir().join(format!("cansys-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"form":"Constant","params":{"a0":1,"b0":2,"c0":1}}"#,
    )
    .unwrap();
    let (code, out, _) = call(&["validate", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_FAIL);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["valid"], false);
    assert!(v["issues"][0]
        .as_str()
        .unwrap()
        .contains("positive semidefinite"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join(format!("cansys-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::copy(descriptor("step.json"), dir.join("step.json")).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(
        &cfg,
        r#"{"input": "step.json", "z": ["0,1"], "format": "json"}"#,
    )
    .unwrap();
    let (code, out, _) = call(&["m", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"][0]["m"], json!([0.0, 1.0]));
    // flags win over the file
    let (_, out, _) = call(&[
        "m",
        "--config",
        cfg.to_str().unwrap(),
        "--z",
        "0,4",
        "--format",
        "csv",
    ]);
    assert_eq!(csv_rows(&out)[0][3], "2.500000000000e-01");
    std::fs::write(&cfg, r#"{"input": "step.json", "colour": 3}"#).unwrap();
    assert_eq!(call(&["m", "--config", cfg.to_str().unwrap()]).0, EXIT_FAIL);
    std::fs::write(&cfg, r#"{"input": "step.json", "z": ["0,1"], "tol": -1}"#).unwrap();
    assert_eq!(call(&["m", "--config", cfg.to_str().unwrap()]).0, EXIT_FAIL);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_file_and_sweep_order() {
    let dir = std::env::temp_dir().join(format!("cansys-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.csv");
    let (code, out, _) = call(&[
        "sweep",
        &descriptor("identity.json"),
        "--ladder",
        "1,10,3",
        "--mu",
        "0,1",
        "--mu",
        "1,1",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!((code, out.as_str()), (0, ""));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 6);
    let order: Vec<(f64, f64)> = rows.iter().map(|r| (num(&r[0]), num(&r[1]))).collect();
    assert_eq!(
        order,
        vec![
            (1.0, 0.0),
            (1.0, 1.0),
            (10.0, 0.0),
            (10.0, 1.0),
            (100.0, 0.0),
            (100.0, 1.0)
        ]
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn rho_of_step_is_a_unit_jump() {
    let (code, out, _) = call(&["rho", &descriptor("step.json"), "--t", "-1,-0.5,0.5,1"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    let ts: Vec<f64> = rows.iter().map(|r| num(&r[0])).collect();
    assert_eq!(ts, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    for r in &rows {
        let (t, v) = (num(&r[0]), num(&r[1]));
        let expected = if t > 0.0 { 1.0 } else { 0.0 };
        assert!((v - expected).abs() < 1e-3, "{t}: {v}");
    }
}

#[test]
fn builtin_catalogue_is_consistent() {
    for (name, theorem, _) in BUILTIN {
        let (s, t) = builtin(name).unwrap();
        assert_eq!((s.name.as_str(), t), (name, theorem));
    }
}
