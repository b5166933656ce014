//! Command-line front end: descriptor ingestion, m and ρ tables, transforms
//! and verification runs. [`run`] is the whole program minus process exit,
//! so tests drive it in-process.

pub mod scenarios;

pub use scenarios::{
    builtin, cesaro_hamiltonian, oscillating_hamiltonian, preferred_ladder, rapid_hamiltonian,
    BUILTIN,
};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::asymptotics::{
    default_ladder, verify_with, Claim, Scenario, Side, System, TheoremId, Verdict,
    VerificationReport,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{parse_descriptor, to_descriptor_json, Hamiltonian, MeshPolicy};
use crate::numerics::{fmt_sci, geometric_ladder};
use crate::spectral::{invert_hamiltonian, DEFAULT_EPS};
use crate::transforms::{
    gauge_transform, indefinite_string_to_canonical, parse_string_descriptor, scale,
    string_to_canonical, trace_normalize, StringDescriptor,
};
use crate::weyl::{m_sweep, TruncationPolicy};

pub const SCHEMA_VERSION: u32 = 1;

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "cansys",
    version,
    about = "Weyl-Titchmarsh functions and high-energy asymptotics of canonical systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the structural hypotheses of a Hamiltonian or string descriptor
    Validate(RunConfig),
    /// Tabulate m(z) at explicit points or along r·μ
    M(RunConfig),
    /// Spectral function by Stieltjes inversion
    Rho(RunConfig),
    /// Write the transformed descriptor (string, indefinite_string, gauge, trace_normalize, scale)
    Transform(RunConfig),
    /// Run a ladder verification of a high-energy asymptotic claim
    Verify(RunConfig),
    /// m(rμ) over a geometric ladder of r and a set of directions μ
    Sweep(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    /// Aligned text (verify only)
    Table,
}

/// Options shared by all subcommands. A `--config` JSON file may supply any
/// of them under the same (snake_case) names; flags take precedence.
#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Descriptor file (Hamiltonian or string)
    pub input: Option<PathBuf>,
    /// JSON file with any of these options; flags given on the command line win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Spectral parameter, repeatable
    #[arg(long = "z", value_name = "RE,IM", allow_hyphen_values = true)]
    pub z: Vec<String>,
    /// Geometric ladder of r
    #[arg(long, value_name = "START,RATIO,RUNGS")]
    pub ladder: Option<String>,
    /// Direction for ladder points z = r·μ, repeatable
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    pub mu: Vec<String>,
    /// Explicit t points for rho
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Vec<f64>,
    /// Uniform t grid for rho
    #[arg(long, value_name = "LO,HI,N", allow_hyphen_values = true)]
    pub t_grid: Option<String>,
    /// Verification tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Relative tolerance of the truncation stopping rule
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Write to this file instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// const_limit, alpha_positive, alpha_negative, rapid, general_Q, string or indefinite_string
    #[arg(long)]
    pub theorem: Option<String>,
    /// Built-in scenario name
    #[arg(long)]
    pub scenario: Option<String>,
    /// Claim as JSON, e.g. '{"claim":"index","alpha":1}'
    #[arg(long)]
    pub claim: Option<String>,
    /// Transform kind
    #[arg(long)]
    pub kind: Option<String>,
    /// Scale transform: x ↦ r1·x
    #[arg(long)]
    pub r1: Option<f64>,
    /// Scale transform: overall factor
    #[arg(long)]
    pub r2: Option<f64>,
    /// Scale transform: a ↦ r3·a, c ↦ c/r3
    #[arg(long)]
    pub r3: Option<f64>,
    /// Potential Q descriptor (gauge transform, general_Q verification)
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Mesh policy as JSON, e.g. '{"kind":"uniform","cells":64,"end":1}'
    #[arg(long)]
    pub mesh: Option<String>,
}

impl RunConfig {
    /// Fills unset fields from `file`.
    fn merged(self, file: RunConfig) -> RunConfig {
        let or_vec = |a: Vec<String>, b: Vec<String>| if a.is_empty() { b } else { a };
        RunConfig {
            input: self.input.or(file.input),
            config: self.config,
            z: or_vec(self.z, file.z),
            ladder: self.ladder.or(file.ladder),
            mu: or_vec(self.mu, file.mu),
            t: if self.t.is_empty() { file.t } else { self.t },
            t_grid: self.t_grid.or(file.t_grid),
            tol: self.tol.or(file.tol),
            rtol: self.rtol.or(file.rtol),
            output: self.output.or(file.output),
            format: self.format.or(file.format),
            theorem: self.theorem.or(file.theorem),
            scenario: self.scenario.or(file.scenario),
            claim: self.claim.or(file.claim),
            kind: self.kind.or(file.kind),
            r1: self.r1.or(file.r1),
            r2: self.r2.or(file.r2),
            r3: self.r3.or(file.r3),
            potential: self.potential.or(file.potential),
            mesh: self.mesh.or(file.mesh),
        }
    }

    fn resolve(self) -> Result<RunConfig> {
        let cfg = match &self.config {
            None => self,
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                let file: RunConfig = serde_json::from_str(&text)?;
                // relative paths in the file resolve against its directory
                let base = path.parent().unwrap_or(Path::new(""));
                let rebase =
                    |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
                let file = RunConfig {
                    input: rebase(file.input),
                    potential: rebase(file.potential),
                    ..file
                };
                self.merged(file)
            }
        };
        for (name, v) in [("tol", cfg.tol), ("rtol", cfg.rtol)] {
            if v.is_some_and(|v| !(v > 0.0)) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        Ok(cfg)
    }

    fn policy(&self, base: TruncationPolicy) -> TruncationPolicy {
        TruncationPolicy {
            rtol: self.rtol.unwrap_or(base.rtol),
            ..base
        }
    }

    fn format(&self, default: Format, allowed: &[Format], command: &str) -> Result<Format> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(Error::InvalidParameter(format!(
                "{command} does not support format {f:?}"
            )))
        }
    }

    fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("missing input descriptor".into()))
    }

    fn ladder_or_default(&self) -> Result<Vec<f64>> {
        match &self.ladder {
            Some(s) => parse_ladder(s),
            None => Ok(default_ladder(Side::AtInfinity)),
        }
    }

    fn directions(&self) -> Result<Vec<Complex64>> {
        if self.mu.is_empty() {
            Ok(vec![Complex64::i()])
        } else {
            self.mu.iter().map(|s| parse_complex(s)).collect()
        }
    }

    /// `--z` points, else the ladder times the directions (ordered by r, then μ).
    fn z_points(&self) -> Result<Vec<Complex64>> {
        if !self.z.is_empty() {
            return self.z.iter().map(|s| parse_complex(s)).collect();
        }
        let Some(l) = &self.ladder else {
            return Err(Error::InvalidParameter(
                "give --z points or a --ladder".into(),
            ));
        };
        let mus = self.directions()?;
        Ok(parse_ladder(l)?
            .into_iter()
            .flat_map(|r| mus.iter().map(move |mu| mu * r))
            .collect())
    }

    fn t_points(&self) -> Result<Vec<f64>> {
        let mut t = self.t.clone();
        if let Some(g) = &self.t_grid {
            let [lo, hi, n] = numbers::<3>(g, "LO,HI,N")?;
            let n = n as usize;
            if n < 2 || !(hi > lo) {
                return Err(Error::InvalidParameter(
                    "t grid needs HI > LO and N ≥ 2".into(),
                ));
            }
            t.extend((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64));
        }
        if t.is_empty() {
            return Err(Error::InvalidParameter(
                "give --t points or a --t-grid".into(),
            ));
        }
        t.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        t.dedup();
        Ok(t)
    }
}

fn numbers<const N: usize>(s: &str, shape: &str) -> Result<[f64; N]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("expected {shape}, got '{s}'")))?;
    v.try_into()
        .map_err(|_| Error::Parse(format!("expected {shape}, got '{s}'")))
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let [re, im] = numbers::<2>(s, "RE,IM")?;
    Ok(Complex64::new(re, im))
}

fn parse_ladder(s: &str) -> Result<Vec<f64>> {
    let [start, ratio, rungs] = numbers::<3>(s, "START,RATIO,RUNGS")?;
    if !(start > 0.0 && ratio > 0.0) || rungs < 1.0 || rungs.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("invalid ladder '{s}'")));
    }
    Ok(geometric_ladder(start, ratio, rungs as usize))
}

/// A descriptor file: a Hamiltonian or a string.
enum Loaded {
    Hamiltonian(Hamiltonian),
    String(StringDescriptor),
}

impl Loaded {
    fn read(path: &Path) -> Result<Loaded> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)?;
        if v.get("string").is_some() {
            Ok(Loaded::String(parse_string_descriptor(
                &text,
                path.parent(),
            )?))
        } else {
            Ok(Loaded::Hamiltonian(parse_descriptor(&text, path.parent())?))
        }
    }

    /// The canonical system; strings are converted first.
    fn canonical(self) -> Result<Hamiltonian> {
        match self {
            Loaded::Hamiltonian(h) => Ok(h),
            Loaded::String(s) => Ok(s.to_canonical()?.hamiltonian),
        }
    }
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Adds the schema version to a JSON report object.
fn report(mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    v
}

struct Output {
    text: String,
    code: i32,
}

fn cmd_validate(cfg: &RunConfig) -> Result<Output> {
    cfg.format(Format::Json, &[Format::Json], "validate")?;
    let (kind, mut issues, h) = match Loaded::read(cfg.input()?)? {
        Loaded::Hamiltonian(h) => ("hamiltonian", Vec::new(), Some(h)),
        Loaded::String(s) => {
            let (kind, issues) = match &s {
                StringDescriptor::Krein(d) => ("krein_string", d.issues()),
                StringDescriptor::Indefinite(_) => ("indefinite_string", Vec::new()),
            };
            match s.to_canonical() {
                Ok(t) => (kind, issues, Some(t.hamiltonian)),
                Err(e) => (kind, vec![e.to_string()], None),
            }
        }
    };
    let mut limit_point = Value::Null;
    let mut valid = issues.is_empty();
    if let Some(h) = h {
        let r = h.validate();
        valid &= r.valid;
        limit_point = serde_json::to_value(r.limit_point)?;
        issues.extend(r.issues);
    }
    let v = report(json!({
        "command": "validate",
        "kind": kind,
        "valid": valid,
        "limit_point": limit_point,
        "issues": issues,
    }));
    Ok(Output {
        text: pretty(&v),
        code: if valid { EXIT_OK } else { EXIT_FAIL },
    })
}

fn m_rows(
    h: &Hamiltonian,
    zs: &[Complex64],
    policy: &TruncationPolicy,
) -> Result<(Vec<crate::weyl::MFunctionSample>, bool)> {
    let samples = m_sweep(h, zs, policy)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let converged = samples.iter().all(|s| s.converged);
    Ok((samples, converged))
}

fn cmd_m(cfg: &RunConfig) -> Result<Output> {
    let format = cfg.format(Format::Csv, &[Format::Csv, Format::Json], "m")?;
    let h = Loaded::read(cfg.input()?)?.canonical()?;
    let zs = cfg.z_points()?;
    let (samples, converged) = m_rows(&h, &zs, &cfg.policy(TruncationPolicy::default()))?;
    let text = match format {
        Format::Json => pretty(&report(json!({
            "command": "m",
            "rows": samples.iter().map(|s| json!({
                "z": s.z, "m": s.value, "radius": s.radius, "converged": s.converged,
            })).collect::<Vec<_>>(),
        }))),
        _ => csv_table(
            &["z_re", "z_im", "m_re", "m_im", "radius", "converged"],
            samples.iter().map(|s| {
                vec![
                    fmt_sci(s.z.re),
                    fmt_sci(s.z.im),
                    fmt_sci(s.value.re),
                    fmt_sci(s.value.im),
                    fmt_sci(s.radius),
                    s.converged.to_string(),
                ]
            }),
        )?,
    };
    Ok(Output {
        text,
        code: if converged {
            EXIT_OK
        } else {
            EXIT_INCONCLUSIVE
        },
    })
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Output> {
    let format = cfg.format(Format::Csv, &[Format::Csv, Format::Json], "sweep")?;
    let h = Loaded::read(cfg.input()?)?.canonical()?;
    let ladder = cfg.ladder_or_default()?;
    let mus = cfg.directions()?;
    let points: Vec<(f64, Complex64)> = ladder
        .iter()
        .flat_map(|&r| mus.iter().map(move |&mu| (r, mu)))
        .collect();
    let zs: Vec<Complex64> = points.iter().map(|(r, mu)| mu * r).collect();
    let (samples, converged) = m_rows(&h, &zs, &cfg.policy(TruncationPolicy::sweep()))?;
    let text = match format {
        Format::Json => pretty(&report(json!({
            "command": "sweep",
            "rows": points.iter().zip(&samples).map(|((r, mu), s)| json!({
                "r": r, "mu": mu, "m": s.value, "radius": s.radius, "converged": s.converged,
            })).collect::<Vec<_>>(),
        }))),
        _ => csv_table(
            &["r", "mu_re", "mu_im", "m_re", "m_im", "radius", "converged"],
            points.iter().zip(&samples).map(|((r, mu), s)| {
                vec![
                    fmt_sci(*r),
                    fmt_sci(mu.re),
                    fmt_sci(mu.im),
                    fmt_sci(s.value.re),
                    fmt_sci(s.value.im),
                    fmt_sci(s.radius),
                    s.converged.to_string(),
                ]
            }),
        )?,
    };
    Ok(Output {
        text,
        code: if converged {
            EXIT_OK
        } else {
            EXIT_INCONCLUSIVE
        },
    })
}

fn cmd_rho(cfg: &RunConfig) -> Result<Output> {
    let format = cfg.format(Format::Csv, &[Format::Csv, Format::Json], "rho")?;
    let h = Loaded::read(cfg.input()?)?.canonical()?;
    let t = cfg.t_points()?;
    let inv = invert_hamiltonian(&h, &t, &DEFAULT_EPS, &cfg.policy(TruncationPolicy::sweep()))?;
    let rho = &inv.rho;
    let text = match format {
        Format::Json => pretty(&report(json!({
            "command": "rho",
            "t": rho.breakpoints(),
            "rho": rho.values(),
            "atoms": rho.atoms(),
            "clamped": inv.clamped,
            "linear_term": inv.linear_term,
        }))),
        _ => csv_table(
            &["t", "rho"],
            rho.breakpoints()
                .iter()
                .zip(rho.values())
                .map(|(t, v)| vec![fmt_sci(*t), fmt_sci(*v)]),
        )?,
    };
    Ok(Output {
        text,
        code: EXIT_OK,
    })
}

fn read_hamiltonian(path: &Path) -> Result<Hamiltonian> {
    match Loaded::read(path)? {
        Loaded::Hamiltonian(h) => Ok(h),
        Loaded::String(_) => Err(Error::InvalidParameter(format!(
            "{} is a string descriptor",
            path.display()
        ))),
    }
}

fn mesh_policy(cfg: &RunConfig) -> Result<MeshPolicy> {
    match &cfg.mesh {
        Some(s) => Ok(serde_json::from_str(s)?),
        None => Ok(MeshPolicy::Uniform {
            cells: 64,
            end: 1.0,
        }),
    }
}

fn cmd_transform(cfg: &RunConfig) -> Result<Output> {
    cfg.format(Format::Json, &[Format::Json], "transform")?;
    let kind = cfg
        .kind
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("missing --kind".into()))?;
    let loaded = Loaded::read(cfg.input()?)?;
    let transformed = match (kind, loaded) {
        ("string", Loaded::String(StringDescriptor::Krein(d))) => string_to_canonical(&d)?,
        ("indefinite_string", Loaded::String(StringDescriptor::Indefinite(d))) => {
            indefinite_string_to_canonical(&d)?
        }
        ("trace_normalize", Loaded::Hamiltonian(h)) => trace_normalize(&h)?.0,
        ("scale", Loaded::Hamiltonian(h)) => scale(
            &h,
            cfg.r1.unwrap_or(1.0),
            cfg.r2.unwrap_or(1.0),
            cfg.r3.unwrap_or(1.0),
        )?,
        ("gauge", Loaded::Hamiltonian(h)) => {
            let q_path = cfg
                .potential
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("gauge needs --potential".into()))?;
            gauge_transform(&h, &read_hamiltonian(q_path)?, &mesh_policy(cfg)?)?.transformed
        }
        ("string" | "indefinite_string" | "trace_normalize" | "scale" | "gauge", _) => {
            return Err(Error::InvalidParameter(format!(
                "transform '{kind}' does not apply to this descriptor"
            )))
        }
        (other, _) => {
            return Err(Error::InvalidParameter(format!(
                "unsupported transform '{other}'"
            )))
        }
    };
    let mut v = to_descriptor_json(&transformed.hamiltonian);
    v["relation"] = json!(transformed.relation.statement());
    Ok(Output {
        text: pretty(&v),
        code: EXIT_OK,
    })
}

fn scenario_from(cfg: &RunConfig) -> Result<(Scenario, Option<TheoremId>)> {
    if let Some(name) = &cfg.scenario {
        let (s, t) = builtin(name)?;
        return Ok((s, Some(t)));
    }
    let path = cfg.input()?;
    let claim: Claim = serde_json::from_str(
        cfg.claim
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("a descriptor run needs --claim".into()))?,
    )?;
    let system = match (Loaded::read(path)?, &cfg.potential) {
        (Loaded::Hamiltonian(h), Some(q)) => System::WithPotential {
            h,
            q: read_hamiltonian(q)?,
            mesh: mesh_policy(cfg)?,
        },
        (Loaded::Hamiltonian(h), None) => System::Canonical(h),
        (Loaded::String(StringDescriptor::Krein(d)), _) => System::Krein(d),
        (Loaded::String(StringDescriptor::Indefinite(d)), _) => System::Indefinite(d),
    };
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok((
        Scenario {
            name,
            system,
            claim,
        },
        None,
    ))
}

fn verify_table(r: &VerificationReport) -> String {
    let mut s = format!(
        "theorem {}  scenario {}  tolerance {}\n{:>20} {:>9} {:>9} {:>20} {:>20} {:>20}\n",
        r.theorem_id,
        r.scenario,
        fmt_sci(r.tolerance),
        "r",
        "mu_re",
        "mu_im",
        "normalized_re",
        "normalized_im",
        "deviation"
    );
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), fmt_sci);
    for row in &r.rows {
        s.push_str(&format!(
            "{:>20} {:>9} {:>9} {:>20} {:>20} {:>20}\n",
            fmt_sci(row.r),
            row.mu.re,
            row.mu.im,
            opt(row.normalized.map(|v| v.re)),
            opt(row.normalized.map(|v| v.im)),
            opt(row.deviation),
        ));
    }
    for h in &r.hypotheses {
        s.push_str(&format!(
            "hypothesis {}: {} ({})\n",
            h.name,
            if h.holds { "holds" } else { "fails" },
            h.detail
        ));
    }
    for d in &r.diagnostics {
        s.push_str(&format!("note: {d}\n"));
    }
    s.push_str(&format!("verdict: {:?}\n", r.verdict));
    s
}

fn cmd_verify(cfg: &RunConfig) -> Result<Output> {
    let format = cfg.format(
        Format::Json,
        &[Format::Json, Format::Table, Format::Csv],
        "verify",
    )?;
    let (scenario, default_theorem) = scenario_from(cfg)?;
    let theorem = match (&cfg.theorem, default_theorem) {
        (Some(t), _) => t.parse::<TheoremId>()?,
        (None, Some(t)) => t,
        (None, None) => return Err(Error::InvalidParameter("missing --theorem".into())),
    };
    let ladder = match (&cfg.ladder, preferred_ladder(&scenario.name)) {
        (None, Some(l)) if cfg.scenario.is_some() => l,
        _ => cfg.ladder_or_default()?,
    };
    let tol = cfg.tol.unwrap_or(crate::asymptotics::DEFAULT_TOLERANCE);
    let rep = verify_with(
        theorem,
        &scenario,
        &ladder,
        tol,
        &cfg.policy(TruncationPolicy::sweep()),
    )?;
    let code = match rep.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    };
    let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_sci);
    let text = match format {
        Format::Table => verify_table(&rep),
        Format::Csv => csv_table(
            &[
                "r",
                "mu_re",
                "mu_im",
                "normalized_re",
                "normalized_im",
                "target_re",
                "target_im",
                "deviation",
            ],
            rep.rows.iter().map(|row| {
                vec![
                    fmt_sci(row.r),
                    fmt_sci(row.mu.re),
                    fmt_sci(row.mu.im),
                    opt(row.normalized.map(|v| v.re)),
                    opt(row.normalized.map(|v| v.im)),
                    fmt_sci(row.target.re),
                    fmt_sci(row.target.im),
                    opt(row.deviation),
                ]
            }),
        )?,
        _ => pretty(&report(serde_json::to_value(&rep)?)),
    };
    Ok(Output { text, code })
}

/// Caps the global rayon pool at `CANSYS_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("CANSYS_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "CANSYS_THREADS must be a positive integer, got '{v}'"
        ))
    })?;
    // a second initialization (tests) keeps the existing pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } => EXIT_INCONCLUSIVE,
        _ => EXIT_FAIL,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status. Results go to `--output` or `out`, messages to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAIL } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = (|| {
        let (handler, cfg): (fn(&RunConfig) -> Result<Output>, RunConfig) = match cli.command {
            Command::Validate(c) => (cmd_validate, c),
            Command::M(c) => (cmd_m, c),
            Command::Rho(c) => (cmd_rho, c),
            Command::Transform(c) => (cmd_transform, c),
            Command::Verify(c) => (cmd_verify, c),
            Command::Sweep(c) => (cmd_sweep, c),
        };
        let cfg = cfg.resolve()?;
        let output = handler(&cfg)?;
        match &cfg.output {
            Some(path) => std::fs::write(path, &output.text)?,
            None => out.write_all(output.text.as_bytes())?,
        }
        Ok::<i32, Error>(output.code)
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_of(&e)
        }
    }
}

#[cfg(test)]
mod tests;
