//! Command-line front end. Exit codes: 0 success, 1 validation, 2 numeric failure.

use crate::boundary::regularity;
use crate::bvp::{DiracBvp, BVP_SCHEMA};
use crate::classify::classify_bvp;
use crate::error::{Error, Result};
use crate::ode::OdeOptions;
use crate::report::{ClassifyReport, CompareReport, Format, Report, TimoshenkoReport, ValidationReport};
use crate::spectra::{default_strip, pair_spectra, zeros_in_window, SpectrumOptions};
use crate::timoshenko::{reduce_to_dirac, tim_asymptotic_branches, tim_spectrum_check, TimoshenkoModel, TIM_SCHEMA};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

const DEFAULT_WINDOW: (f64, f64) = (-20.0, 20.0);

#[derive(Debug, Parser)]
#[command(name = "diracspec", version, about = "Spectra of Dirac-type boundary value problems and the damped Timoshenko beam")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Real-part window `a,b`.
    #[arg(long, global = true, env = "DIRACSPEC_WINDOW", value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<(f64, f64)>,
    /// Half-height of the search strip; defaults to the zero strip plus two.
    #[arg(long, global = true, env = "DIRACSPEC_STRIP")]
    pub strip: Option<f64>,
    /// Relative ODE tolerance.
    #[arg(long, global = true, env = "DIRACSPEC_TOL")]
    pub tol: Option<f64>,
    #[arg(long, global = true, env = "DIRACSPEC_FORMAT", value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true, env = "DIRACSPEC_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "DIRACSPEC_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a `dirac-bvp/1` or `tim-beam/1` file.
    Validate { input: PathBuf },
    /// Regularity and strict-regularity verdict.
    Classify { input: PathBuf },
    /// Eigenvalues in the window.
    Spectrum { input: PathBuf },
    /// Pair the spectrum of `input` with that of `reference`.
    Compare { input: PathBuf, reference: PathBuf },
    /// Branches, regime and spectrum check of a beam.
    Timoshenko { input: PathBuf },
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b, found {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

/// Validated run settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub window: (f64, f64),
    pub strip: Option<f64>,
    pub ode: OdeOptions,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn from_args(g: &GlobalArgs) -> Result<Self> {
        let window = g.window.unwrap_or(DEFAULT_WINDOW);
        if !(window.0 < window.1) || !window.0.is_finite() || !window.1.is_finite() {
            return Err(Error::Invalid(format!("window [{}, {}] is empty", window.0, window.1)));
        }
        if let Some(h) = g.strip {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Invalid(format!("strip {h} must be positive")));
            }
        }
        let mut ode = OdeOptions::default();
        if let Some(t) = g.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Invalid(format!("tolerance {t} must be positive")));
            }
            ode.tol = t;
        }
        if g.jobs == Some(0) {
            return Err(Error::Invalid("jobs must be at least 1".into()));
        }
        Ok(RunConfig { window, strip: g.strip, ode, format: g.format, out: g.out.clone(), jobs: g.jobs })
    }

    fn spectrum_options(&self) -> SpectrumOptions {
        SpectrumOptions { strip: self.strip, ode: self.ode, ..Default::default() }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

fn schema_of(text: &str) -> Result<String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    v.get("schema")
        .and_then(|s| s.as_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Parse("missing field `schema`".into()))
}

/// Validation report of a file; `valid` is false when any check fails.
pub fn validate_text(input: &str, text: &str) -> ValidationReport {
    let mut r = ValidationReport {
        input: input.to_string(),
        schema: String::new(),
        valid: false,
        error: None,
        b: vec![],
        theta: None,
        blocks: vec![],
        j_plus: None,
        j_minus: None,
        regular: None,
        warning: None,
        tolerance: crate::boundary::ZERO_THRESHOLD,
    };
    let checked = schema_of(text).and_then(|schema| {
        r.schema = schema.clone();
        match schema.as_str() {
            BVP_SCHEMA => DiracBvp::parse(text),
            TIM_SCHEMA => {
                let red = reduce_to_dirac(&TimoshenkoModel::parse(text)?)?;
                match red.violation {
                    Some(e) => Err(e),
                    None => Ok(red.bvp),
                }
            }
            other => Err(Error::Parse(format!("unknown schema {other:?}"))),
        }
    });
    let bvp = match checked {
        Ok(b) => b,
        Err(e) => {
            r.error = Some(e.to_string());
            return r;
        }
    };
    let p = bvp.profile();
    r.b = p.b().to_vec();
    r.theta = Some(p.theta());
    r.blocks = p.blocks().to_vec();
    match regularity(bvp.c(), bvp.d(), p) {
        Ok(reg) => {
            r.valid = true;
            r.j_plus = Some(reg.j_plus);
            r.j_minus = Some(reg.j_minus);
            r.regular = Some(reg.regular);
            r.warning = reg.warning;
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    r
}

fn load_bvp(path: &Path) -> Result<DiracBvp> {
    DiracBvp::parse(&read(path)?)
}

enum Outcome {
    Done(String),
    /// Report written, but the run counts as a numeric failure.
    Failed(String, Error),
    Invalid(String),
}

fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let fmt = cfg.format;
    let (a, b) = cfg.window;
    match cmd {
        Command::Validate { input } => {
            let r = validate_text(&name(input), &read(input)?);
            Ok(if r.valid { Outcome::Done(r.render(fmt)) } else { Outcome::Invalid(r.render(fmt)) })
        }
        Command::Classify { input } => {
            let bvp = load_bvp(input)?;
            let reg = regularity(bvp.c(), bvp.d(), bvp.profile())?;
            let verdict = classify_bvp(&bvp)?;
            let r = ClassifyReport {
                input: name(input),
                verdict,
                j_plus: reg.j_plus,
                j_minus: reg.j_minus,
                tolerance: crate::boundary::ZERO_THRESHOLD,
            };
            Ok(Outcome::Done(r.render(fmt)))
        }
        Command::Spectrum { input } => {
            let bvp = load_bvp(input)?;
            Ok(Outcome::Done(zeros_in_window(&bvp, a, b, &cfg.spectrum_options())?.render(fmt)))
        }
        Command::Compare { input, reference } => {
            let (p, q) = (load_bvp(input)?, load_bvp(reference)?);
            let strip = match cfg.strip {
                Some(h) => h,
                None => default_strip(&p)?.max(default_strip(&q)?),
            };
            let opts = SpectrumOptions { strip: Some(strip), ..cfg.spectrum_options() };
            let s = zeros_in_window(&p, a, b, &opts)?;
            let s0 = zeros_in_window(&q, a, b, &opts)?;
            let pairing = pair_spectra(&s, &s0);
            let mismatch = pairing.count_mismatch;
            let r = CompareReport {
                input: name(input),
                reference: name(reference),
                window: (a, b),
                strip,
                pairing,
                tolerance: s.tolerance.max(s0.tolerance),
            };
            Ok(match mismatch {
                Some((x, y)) => Outcome::Failed(r.render(fmt), Error::CountMismatch(x, y)),
                None => Outcome::Done(r.render(fmt)),
            })
        }
        Command::Timoshenko { input } => {
            let model = TimoshenkoModel::parse(&read(input)?)?;
            let br = tim_asymptotic_branches(&model)?;
            let check = tim_spectrum_check(&model, a, b, &cfg.spectrum_options())?;
            let mismatch = check.pairing.count_mismatch;
            let r = TimoshenkoReport {
                input: name(input),
                regime: br.regime,
                branches: br.branches,
                verdict: br.verdict,
                window: (a, b),
                strip: check.reference.strip,
                computed: check.computed.eigenvalues.iter().flat_map(|e| std::iter::repeat(e.lambda).take(e.multiplicity)).collect(),
                reference: check.reference.eigenvalues.iter().flat_map(|e| std::iter::repeat(e.lambda).take(e.multiplicity)).collect(),
                pairing: check.pairing,
                tolerance: check.computed.tolerance.max(br.tolerance),
            };
            Ok(match mismatch {
                Some((x, y)) => Outcome::Failed(r.render(fmt), Error::CountMismatch(x, y)),
                None => Outcome::Done(r.render(fmt)),
            })
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn code_of(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERIC
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let cfg = match RunConfig::from_args(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    if let Some(k) = cfg.jobs {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let out = cfg.out.as_deref();
    let result = execute(&cli.command, &cfg).and_then(|o| match o {
        Outcome::Done(t) => emit(&t, out).map(|_| EXIT_OK),
        Outcome::Invalid(t) => emit(&t, out).map(|_| EXIT_VALIDATION),
        Outcome::Failed(t, e) => {
            emit(&t, out)?;
            eprintln!("error: {e}");
            Ok(EXIT_NUMERIC)
        }
    });
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        code_of(&e)
    })
}

/// Parses `args` (program name first) and runs.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_parsing() {
        assert_eq!(parse_window("-3.5, 7").unwrap(), (-3.5, 7.0));
        assert!(parse_window("3").is_err());
        let cli = Cli::try_parse_from(["diracspec", "spectrum", "x.json", "--window", "-5,5", "--format", "json"]).unwrap();
        assert_eq!(cli.global.window, Some((-5.0, 5.0)));
        assert_eq!(cli.global.format, Format::Json);
    }

    #[test]
    fn config_rejects_bad_values() {
        let g = |w: (f64, f64), tol: Option<f64>| GlobalArgs { window: Some(w), strip: None, tol, format: Format::Csv, out: None, jobs: None };
        assert!(RunConfig::from_args(&g((1.0, 1.0), None)).is_err());
        assert!(RunConfig::from_args(&g((0.0, 1.0), Some(-1.0))).is_err());
        assert_eq!(RunConfig::from_args(&g((0.0, 1.0), Some(1e-8))).unwrap().ode.tol, 1e-8);
    }

    #[test]
    fn validate_reports_parse_position() {
        let r = validate_text("bad", "{\"schema\": \"dirac-bvp/1\", \"n\": 2,\n \"ell\": }");
        assert!(!r.valid);
        assert!(r.error.unwrap().contains("line 2"));
        let r = validate_text("other", "{\"schema\": \"nope/1\"}");
        assert!(r.error.unwrap().contains("unknown schema"));
    }
}
