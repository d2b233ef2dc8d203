//! Job runner behind the `selftest` binary.
//!
//! Every command reads one JSON point, either
//! `{"correlators": [[e00, e01], [e10, e11]]}` or
//! `{"angles": {"alpha": [[a00, a01], [a10, a11]]}}`, from a file, `--data`
//! or stdin. Numbers may be decimals or strings such as `"1/sqrt2"` and
//! `"3pi/4"`. Reports go to stdout (or `--out`); failures print a JSON error
//! object on stderr.
//!
//! Exit codes: `0` success, `1` I/O error, `2` malformed or unsuitable input,
//! `3` numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::games::{game_coefficients, verify_maximizer};
use crate::geometry::{angles_from_correlations, canonicalize, chsh_max, chsh_max_table, classify, AnglePoint, CorrelationPoint, Relabeling};
use crate::numparse::{number_from_json, parse_eps_grid};
use crate::realization::{build_realization, control_operators, verify_selftest_relations, ControlVariant};
use crate::sdp::{assemble_sdp, fig5_presets, solve_lower_bound, sweep_curve, write_curve_csv, CriterionConfig, SdpError, SolveStatus, SweepRow};
use crate::simulator::rho_swap_fidelity;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Caps the number of threads used by `sweep`.
pub const THREADS_ENV: &str = "SELFTEST_THREADS";

#[derive(Debug, Parser)]
#[command(name = "selftest", version, about = "Self-testing of the maximally entangled two-qubit state")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a correlation point against the self-testing conditions.
    Classify(Common),
    /// Build the qubit realization of a self-testing point.
    Realize(Common),
    /// Check the operator relations behind the swap isometry.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Variant::Direct)]
        variant: Variant,
    },
    /// Certified lower bound on the swap fidelity at one ε.
    Bound {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "0")]
        eps: String,
    },
    /// Bounds over a grid of ε values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: Target,
        #[arg(long = "eps-grid", default_value = "0:0.05:0.005")]
        eps_grid: String,
    },
    /// The XOR game tangent to the quantum set at a self-testing point.
    Game(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Input JSON file; stdin when omitted and `--data` is not given.
    pub input: Option<PathBuf>,
    /// Input JSON given inline.
    #[arg(long, conflicts_with = "input")]
    pub data: Option<String>,
    /// Equality tolerance for the self-testing conditions.
    #[arg(long, default_value_t = crate::DEFAULT_TOL)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct Target {
    /// Built-in criteria instead of an input point.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Direct,
    Rotated,
}

impl From<Variant> for ControlVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Direct => ControlVariant::Direct,
            Variant::Rotated => ControlVariant::Rotated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Four-setting family θ = π/2, α00 = π/4 plus Mayers–Yao.
    Fig5,
    Chsh,
    MayersYao,
}

/// A failed job: exit code, machine-readable kind and message.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, kind: "malformed-input", message: message.into(), details: None }
    }

    fn unsuitable(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, kind: "unsuitable-input", message: message.into(), details: None }
    }

    fn numerical(message: impl Into<String>, details: Option<Value>) -> Self {
        Self { code: EXIT_NUMERICAL, kind: "numerical-failure", message: message.into(), details }
    }

    fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, kind: "io", message: message.into(), details: None }
    }

    pub fn to_json(&self) -> Value {
        let mut err = json!({ "kind": self.kind, "code": self.code, "message": self.message });
        if let Some(d) = &self.details {
            err["details"] = d.clone();
        }
        json!({ "error": err })
    }
}

impl From<SdpError> for Failure {
    fn from(e: SdpError) -> Self {
        match e {
            SdpError::InvalidConfig(_) | SdpError::EmptyGrid => Failure::unsuitable(e.to_string()),
            _ => Failure::numerical(e.to_string(), None),
        }
    }
}

/// A parsed input point. Angles that already satisfy the canonical
/// condition are kept as given; everything else goes through correlators.
#[derive(Debug, Clone, PartialEq)]
pub enum InputPoint {
    Correlators(CorrelationPoint),
    /// A table with more than two columns; only CHSH values apply.
    Table(Vec<Vec<f64>>),
    Angles(AnglePoint),
}

fn matrix_field(v: &Value, what: &str) -> Result<Vec<Vec<f64>>, Failure> {
    let rows = v.as_array().ok_or_else(|| Failure::input(format!("{what} must be an array of rows")))?;
    if rows.len() != 2 {
        return Err(Failure::input(format!("{what} must have two rows, found {}", rows.len())));
    }
    rows.iter()
        .enumerate()
        .map(|(x, row)| {
            let row = row.as_array().ok_or_else(|| Failure::input(format!("{what}[{x}] must be an array")))?;
            row.iter()
                .enumerate()
                .map(|(y, n)| number_from_json(n).map_err(|e| Failure::input(format!("{what}[{x}][{y}]: {e}"))))
                .collect()
        })
        .collect()
}

fn square(m: &[Vec<f64>], what: &str) -> Result<[[f64; 2]; 2], Failure> {
    if m.iter().any(|r| r.len() != 2) {
        return Err(Failure::input(format!("{what} must be 2x2")));
    }
    Ok([[m[0][0], m[0][1]], [m[1][0], m[1][1]]])
}

pub fn parse_input(text: &str) -> Result<InputPoint, Failure> {
    let v: Value = serde_json::from_str(text).map_err(|e| Failure::input(format!("invalid JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| Failure::input("input must be a JSON object"))?;
    match (obj.get("correlators"), obj.get("angles")) {
        (Some(c), None) => {
            let m = matrix_field(c, "correlators")?;
            let width = m[0].len();
            if width < 2 || m[1].len() != width {
                return Err(Failure::input("correlators rows must have equal length of at least 2"));
            }
            if m.iter().flatten().any(|e| e.abs() > 1.0 + 1e-12) {
                return Err(Failure::input("correlators must lie in [-1, 1]"));
            }
            if width > 2 {
                return Ok(InputPoint::Table(m));
            }
            CorrelationPoint::new(square(&m, "correlators")?)
                .map(InputPoint::Correlators)
                .map_err(|e| Failure::input(e.to_string()))
        }
        (None, Some(a)) => {
            let alpha = a.get("alpha").ok_or_else(|| Failure::input("angles must contain alpha"))?;
            let m = square(&matrix_field(alpha, "angles.alpha")?, "angles.alpha")?;
            AnglePoint::from_alpha(m).map(InputPoint::Angles).map_err(|e| Failure::input(e.to_string()))
        }
        (Some(_), Some(_)) => Err(Failure::input("give either correlators or angles, not both")),
        (None, None) => Err(Failure::input("input must contain correlators or angles")),
    }
}

impl InputPoint {
    pub fn correlation_point(&self) -> Result<CorrelationPoint, Failure> {
        match self {
            InputPoint::Correlators(p) => Ok(*p),
            InputPoint::Angles(a) => Ok(a.correlators()),
            InputPoint::Table(_) => Err(Failure::input("this command needs a 2x2 point")),
        }
    }

    /// Canonical angles together with the relabeling that produced them.
    pub fn canonical(&self, tol: f64) -> Result<(Relabeling, AnglePoint), Failure> {
        if let InputPoint::Angles(a) = self {
            if a.is_canonical() {
                return Ok((Relabeling::IDENTITY, *a));
            }
        }
        let p = self.correlation_point()?;
        let (r, q) = canonicalize(&p, tol).map_err(|e| Failure::unsuitable(e.to_string()))?;
        Ok((r, angles_from_correlations(&q)))
    }
}

fn read_input(c: &Common, stdin: &mut dyn Read) -> Result<InputPoint, Failure> {
    let text = match (&c.data, &c.input) {
        (Some(d), _) => d.clone(),
        (None, Some(path)) => fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?,
        (None, None) => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| Failure::io(format!("stdin: {e}")))?;
            s
        }
    };
    parse_input(&text)
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn configs(target: &Target, common: &Common, stdin: &mut dyn Read) -> Result<Vec<CriterionConfig>, Failure> {
    match target.preset {
        Some(Preset::Fig5) => Ok(fig5_presets(0.0)),
        Some(Preset::Chsh) => Ok(vec![CriterionConfig::chsh(0.0)]),
        Some(Preset::MayersYao) => Ok(vec![CriterionConfig::mayers_yao(0.0)]),
        None => {
            let (_, a) = read_input(common, stdin)?.canonical(common.tol)?;
            Ok(vec![CriterionConfig::four_setting(a, 0.0)?])
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure::input(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Failure::io(format!("thread pool: {e}")))
}

fn bound_row_json(name: &str, row: &SweepRow) -> Value {
    match &row.result {
        Ok(b) => json!({ "name": name, "result": b }),
        Err(e) => json!({ "name": name, "epsilon": row.epsilon, "error": e.to_string() }),
    }
}

fn row_failed(row: &SweepRow) -> bool {
    match &row.result {
        Ok(b) => b.status == SolveStatus::NumericalFailure,
        Err(_) => true,
    }
}

fn curves_csv(curves: &[(String, Vec<SweepRow>)]) -> String {
    let mut out = Vec::new();
    for (k, (name, rows)) in curves.iter().enumerate() {
        if curves.len() > 1 {
            if k > 0 {
                out.push(b'\n');
            }
            writeln!(out, "# {name}").expect("write to memory");
        }
        write_curve_csv(&mut out, rows).expect("write to memory");
    }
    String::from_utf8(out).expect("csv is utf-8")
}

/// Runs one job. Returns the report text or a failure. When bounds were
/// produced but some were not certified tightly, the report comes back
/// together with a numerical failure.
fn execute(cmd: &Command, stdin: &mut dyn Read) -> Result<String, (Option<String>, Failure)> {
    let plain = |f: Failure| (None, f);
    match cmd {
        Command::Classify(c) => {
            let point = read_input(c, stdin).map_err(plain)?;
            let report = match &point {
                InputPoint::Table(m) => json!({ "tag": "Table", "columns": m[0].len(), "chsh_max": chsh_max_table(&m[0], &m[1]) }),
                _ => {
                    let p = point.correlation_point().map_err(plain)?;
                    let mut v = serde_json::to_value(classify(&p, c.tol)).expect("classification serializes");
                    v["chsh_max"] = json!(chsh_max(&p));
                    v
                }
            };
            Ok(pretty(&report))
        }
        Command::Realize(c) => {
            let (relabeling, a) = read_input(c, stdin).and_then(|p| p.canonical(c.tol)).map_err(plain)?;
            let r = build_realization(&a).map_err(|e| plain(Failure::unsuitable(e.to_string())))?;
            let corr = r.correlators().map_err(|e| plain(Failure::numerical(e.to_string(), None)))?;
            let (ma, mb) = r.marginals().map_err(|e| plain(Failure::numerical(e.to_string(), None)))?;
            Ok(pretty(&json!({
                "relabeling": relabeling,
                "angles": { "alpha": a.alpha(), "theta": a.theta() },
                "bloch_angles": { "alice": r.meas_angle_a, "bob": r.meas_angle_b },
                "correlators": corr.correlators(),
                "marginals": { "alice": ma, "bob": mb },
                "chsh_max": chsh_max(&corr),
            })))
        }
        Command::Verify { common: c, variant } => {
            let (relabeling, a) = read_input(c, stdin).and_then(|p| p.canonical(c.tol)).map_err(plain)?;
            let unsuitable = |e: crate::realization::RealizationError| plain(Failure::unsuitable(e.to_string()));
            let r = build_realization(&a).map_err(unsuitable)?;
            let cs = control_operators(&a, (*variant).into()).map_err(unsuitable)?;
            let report = verify_selftest_relations(&r, &cs).map_err(unsuitable)?;
            let m = cs.concretize(&r).map_err(unsuitable)?;
            let (_, fidelity) = rho_swap_fidelity(r.state(), &m, &cs.target()).map_err(|e| plain(Failure::numerical(e.to_string(), None)))?;
            Ok(pretty(&json!({
                "relabeling": relabeling,
                "variant": ControlVariant::from(*variant),
                "residuals": report.residuals,
                "routes": report.routes,
                "max_residual": report.max(),
                "swap_fidelity": fidelity,
            })))
        }
        Command::Bound { common: c, target, eps } => {
            let eps = crate::numparse::parse_number(eps).map_err(|e| plain(Failure::input(e.to_string())))?;
            let cfgs = configs(target, c, stdin).map_err(plain)?;
            let curves: Vec<(String, Vec<SweepRow>)> = cfgs
                .iter()
                .map(|cfg| {
                    let cfg = cfg.with_epsilon(eps);
                    let result = cfg.validate().and_then(|_| assemble_sdp(&cfg)).and_then(|i| solve_lower_bound(&i));
                    (cfg.name.clone(), vec![SweepRow { epsilon: eps, result }])
                })
                .collect();
            report_curves(&curves, c.format.unwrap_or(Format::Json))
        }
        Command::Sweep { common: c, target, eps_grid } => {
            let grid = parse_eps_grid(eps_grid).map_err(|e| plain(Failure::input(e.to_string())))?;
            let cfgs = configs(target, c, stdin).map_err(plain)?;
            let pool = thread_pool().map_err(plain)?;
            let curves = pool.install(|| {
                cfgs.iter()
                    .map(|cfg| sweep_curve(cfg, &grid).map(|rows| (cfg.name.clone(), rows)))
                    .collect::<Result<Vec<_>, _>>()
            });
            let curves = curves.map_err(|e| plain(e.into()))?;
            report_curves(&curves, c.format.unwrap_or(Format::Csv))
        }
        Command::Game(c) => {
            let point = read_input(c, stdin).map_err(plain)?;
            let (relabeling, a) = point.canonical(c.tol).map_err(plain)?;
            let g = game_coefficients(&a).map_err(|e| plain(Failure::unsuitable(e.to_string())))?;
            let report = verify_maximizer(&g, &a.correlators());
            Ok(pretty(&json!({
                "relabeling": relabeling,
                "angles": { "alpha": a.alpha() },
                "game": g.f,
                "value_at_point": report.value_at_point,
                "quantum_value": report.quantum_value,
                "classical_value": report.classical_value,
                "difference": report.difference,
                "unique_maximizer": report.unique_maximizer,
            })))
        }
    }
}

fn report_curves(curves: &[(String, Vec<SweepRow>)], format: Format) -> Result<String, (Option<String>, Failure)> {
    let text = match format {
        Format::Csv => curves_csv(curves),
        Format::Json => {
            let rows: Vec<Value> = curves.iter().flat_map(|(name, rows)| rows.iter().map(move |r| bound_row_json(name, r))).collect();
            pretty(&rows)
        }
    };
    let failed: Vec<Value> = curves
        .iter()
        .flat_map(|(name, rows)| rows.iter().filter(|r| row_failed(r)).map(move |r| bound_row_json(name, r)))
        .collect();
    if failed.is_empty() {
        Ok(text)
    } else {
        let n = failed.len();
        Err((Some(text), Failure::numerical(format!("{n} bound(s) not certified to solver accuracy"), Some(Value::Array(failed)))))
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::io(format!("stdout: {e}"))),
    }
}

fn out_path(cmd: &Command) -> &Option<PathBuf> {
    match cmd {
        Command::Classify(c) | Command::Realize(c) | Command::Game(c) => &c.out,
        Command::Verify { common, .. } | Command::Bound { common, .. } | Command::Sweep { common, .. } => &common.out,
    }
}

fn fail(f: &Failure, stderr: &mut dyn Write) -> i32 {
    // nothing useful to do if stderr itself is gone
    let _ = stderr.write_all(pretty(&f.to_json()).as_bytes());
    f.code
}

/// Parses `args` (program name first) and runs the job. Returns the exit
/// code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = stdout.write_all(e.render().to_string().as_bytes());
                return EXIT_OK;
            }
            return fail(&Failure::input(e.render().to_string().trim_end().to_owned()), stderr);
        }
    };
    match execute(&cli.command, stdin) {
        Ok(text) => match emit(out_path(&cli.command), &text, stdout) {
            Ok(()) => EXIT_OK,
            Err(f) => fail(&f, stderr),
        },
        Err((text, f)) => {
            if let Some(text) = text {
                if let Err(io) = emit(out_path(&cli.command), &text, stdout) {
                    return fail(&io, stderr);
                }
            }
            fail(&f, stderr)
        }
    }
}
