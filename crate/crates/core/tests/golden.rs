//! Every descriptor under `descriptors/` passes `validate` and has golden
//! outputs in `descriptors/golden/`. Set `CANSYS_BLESS=1` to regenerate.

use std::path::{Path, PathBuf};

use cansys::cli::run;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../descriptors")
}

/// Commands recorded per descriptor (`{}` is the descriptor path).
fn commands(stem: &str) -> Option<Vec<Vec<&'static str>>> {
    let c: Vec<Vec<&str>> = match stem {
        "identity" => vec![vec!["m", "{}", "--z", "0,1", "--z", "1,1", "--z", "0,10"]],
        "step" => vec![
            vec!["m", "{}", "--z", "0,2", "--z", "1,1"],
            vec!["rho", "{}", "--t", "-1,0.5,1"],
        ],
        "alpha1" => vec![vec![
            "m", "{}", "--ladder", "1,10,4", "--mu", "0,1", "--mu", "1,1",
        ]],
        "radial_quarter" => vec![vec!["m", "{}", "--z", "0,1", "--z", "1,1"]],
        "piecewise" => vec![
            vec!["m", "{}", "--z", "0,1", "--z", "1,1", "--z", "-2,0.5"],
            vec!["transform", "{}", "--kind", "trace_normalize"],
        ],
        "sampled" => vec![vec!["m", "{}", "--z", "0,1", "--z", "3,1"]],
        "rapid" => vec![vec!["sweep", "{}", "--ladder", "10,10,3"]],
        "scaled_identity" => vec![vec!["m", "{}", "--z", "0,1"]],
        "potential_rotation" => vec![vec![
            "transform",
            "@piecewise.json",
            "--kind",
            "gauge",
            "--potential",
            "{}",
            "--mesh",
            r#"{"kind":"uniform","cells":4,"end":1}"#,
        ]],
        "uniform_string" => vec![
            vec!["transform", "{}", "--kind", "string"],
            vec!["m", "{}", "--z", "0,1"],
        ],
        "kac_alpha1_string" => vec![vec!["m", "{}", "--z", "0,1", "--z", "1,1"]],
        "point_mass_string" => vec![vec!["transform", "{}", "--kind", "string"]],
        "massless_indefinite" => vec![vec!["transform", "{}", "--kind", "indefinite_string"]],
        "constant_indefinite" => {
            vec![
                vec!["transform", "{}", "--kind", "indefinite_string"],
                vec!["m", "{}", "--z", "0,1", "--z", "0,100"],
            ]
        }
        _ => return None,
    };
    Some(c)
}

fn call(args: &[String]) -> (i32, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        std::iter::once("cansys".to_string()).chain(args.iter().cloned()),
        &mut out,
        &mut err,
    );
    let mut text = String::from_utf8(out).unwrap();
    text.push_str(&String::from_utf8(err).unwrap());
    (code, text)
}

fn transcript(stem: &str, path: &Path) -> String {
    let mut validate_and_rest = vec![vec!["validate", "{}"]];
    validate_and_rest.extend(commands(stem).unwrap());
    let mut t = String::new();
    for cmd in validate_and_rest {
        let args: Vec<String> = cmd
            .iter()
            .map(|a| match *a {
                "{}" => path.display().to_string(),
                a if a.starts_with('@') => root().join(&a[1..]).display().to_string(),
                a => a.to_string(),
            })
            .collect();
        let shown: Vec<String> = cmd
            .iter()
            .map(|a| a.replace("{}", &format!("{stem}.json")).replace('@', ""))
            .collect();
        let (code, out) = call(&args);
        t.push_str(&format!("$ {}\n{out}exit {code}\n", shown.join(" ")));
    }
    t
}

fn tokens(s: &str) -> Vec<&str> {
    s.split(|c: char| c.is_whitespace() || ",[]{}:\"".contains(c))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Token-wise comparison; numbers agree to 1e-9 relative (1e-12 absolute).
fn same(golden: &str, actual: &str) -> Result<(), String> {
    let (g, a) = (tokens(golden), tokens(actual));
    if g.len() != a.len() {
        return Err(format!("token count {} vs {}", g.len(), a.len()));
    }
    for (x, y) in g.iter().zip(&a) {
        match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(p), Ok(q)) if (p - q).abs() <= 1e-12 + 1e-9 * p.abs().max(q.abs()) => {}
            (Ok(p), Ok(q)) if p.is_nan() && q.is_nan() => {}
            _ if x == y => {}
            _ => return Err(format!("'{x}' vs '{y}'")),
        }
    }
    Ok(())
}

fn descriptors() -> Vec<(String, PathBuf)> {
    let mut v: Vec<(String, PathBuf)> = std::fs::read_dir(root())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), p))
        .collect();
    v.sort();
    v
}

#[test]
fn every_descriptor_validates() {
    let all = descriptors();
    assert!(all.len() >= 10);
    for (stem, path) in all {
        let (code, out) = call(&["validate".into(), path.display().to_string()]);
        assert_eq!(code, 0, "{stem}: {out}");
        assert!(commands(&stem).is_some(), "{stem} has no golden commands");
    }
}

#[test]
fn golden_outputs() {
    let bless = std::env::var("CANSYS_BLESS").is_ok_and(|v| v == "1");
    let mut failures = Vec::new();
    for (stem, path) in descriptors() {
        let actual = transcript(&stem, &path);
        let golden_path = root().join("golden").join(format!("{stem}.txt"));
        if bless {
            std::fs::write(&golden_path, &actual).unwrap();
            continue;
        }
        let golden = std::fs::read_to_string(&golden_path)
            .unwrap_or_else(|_| panic!("missing {}", golden_path.display()));
        if let Err(e) = same(&golden, &actual) {
            failures.push(format!("{stem}: {e}"));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn reruns_are_byte_identical() {
    for (stem, path) in descriptors() {
        assert_eq!(transcript(&stem, &path), transcript(&stem, &path), "{stem}");
    }
}

#[test]
fn binary_honours_thread_cap_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cansys");
    let step = root().join("step.json");
    let out = std::process::Command::new(bin)
        .args(["m", step.to_str().unwrap(), "--z", "0,2"])
        .env("CANSYS_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("5.000000000000e-01"));
    let bad = std::process::Command::new(bin)
        .args(["m", step.to_str().unwrap(), "--z", "0,2"])
        .env("CANSYS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let fail = std::process::Command::new(bin)
        .args(["verify", "--scenario", "oscillating_A"])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(1));
}
