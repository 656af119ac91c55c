//! The `ralmc` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::model::{parse_formula, parse_rbm, validate_irbm, Coalition, Endowment, Rbm};
use crate::oracle::{ral_sandwich, Verdict};
use crate::pushdown::parse_cabpds;
use crate::ral::{encode, evaluate};
use crate::saturation::{buchi_language_with_cap, default_cap};
use crate::{Error, Result};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ralmc", version, about = "Model checker for resource agent logic over 1-unbounded models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide a formula at a state and endowment.
    Check(CheckArgs),
    /// Evaluate a formula with the bounded-endowment game oracle.
    Oracle(OracleArgs),
    /// Print the pushdown encoding of a coalition's game.
    Encode(EncodeArgs),
    /// Expand a compact pushdown system to width one.
    Expand(SystemArgs),
    /// Print the automaton of accepted configurations of a pushdown system.
    DumpLang(SystemArgs),
    /// Check a model file.
    Validate(ModelArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct Query {
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub endowment: u64,
    #[arg(long)]
    pub formula: String,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub model: PathBuf,
    #[command(flatten)]
    pub query: Query,
    /// Print a JSON summary instead of the bare verdict.
    #[arg(long)]
    pub json: bool,
    /// Per-subformula statistics on stderr.
    #[arg(long)]
    pub stats: bool,
    /// Write the product system of the outermost cooperation subformula.
    #[arg(long, value_name = "FILE")]
    pub emit_product: Option<PathBuf>,
    /// Write the automaton computed for the outermost cooperation subformula.
    #[arg(long, value_name = "FILE")]
    pub emit_lang: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub model: PathBuf,
    #[command(flatten)]
    pub query: Query,
    /// Largest endowment explored.
    #[arg(long, default_value_t = 16)]
    pub max_stack: u64,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub model: PathBuf,
    /// Comma-separated agent names.
    #[arg(long, value_delimiter = ',')]
    pub coalition: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    pub system: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub verdict: bool,
    pub r: usize,
    pub rules: usize,
    pub product_controls: usize,
    pub saturation_iterations: usize,
    pub wall_ms: u128,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Rbm> {
    parse_rbm(&read(path)?)
}

fn iteration_cap() -> Result<Option<usize>> {
    match std::env::var("RALMC_ITER_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Usage(format!("RALMC_ITER_CAP must be a number, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn resolve_state(m: &Rbm, name: &Option<String>) -> Result<usize> {
    match name {
        None => Ok(m.init),
        Some(s) => m.state_index(s).ok_or_else(|| Error::UnknownState(s.clone())),
    }
}

fn check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    let m = load_model(&args.model)?;
    let q = resolve_state(&m, &args.query.state)?;
    let f = parse_formula(&args.query.formula)?;
    let eval = evaluate(&m, &f, iteration_cap()?)?;
    let verdict = eval.holds(q, Endowment(args.query.endowment))?;
    if args.stats {
        for flat in &eval.flats {
            let _ = writeln!(
                err,
                "{}: r={} rules={} product_controls={} outer={} rounds={} added={}",
                flat.formula,
                flat.encoded.r,
                flat.encoded.system.rules.len(),
                flat.run.product.system.controls.len(),
                flat.run.stats.outer_iterations,
                flat.run.stats.saturation_rounds,
                flat.run.stats.transitions_added
            );
        }
    }
    if args.emit_product.is_some() || args.emit_lang.is_some() {
        let last = eval
            .flats
            .last()
            .ok_or_else(|| Error::Usage("the formula has no cooperation modality to emit".into()))?;
        if let Some(path) = &args.emit_product {
            write_file(path, &last.run.product.system.dump())?;
        }
        if let Some(path) = &args.emit_lang {
            write_file(path, &last.run.lang.ama.dump())?;
        }
    }
    if args.json {
        let summary = Summary {
            verdict,
            r: eval.flats.iter().map(|f| f.encoded.r).max().unwrap_or(0),
            rules: eval.flats.iter().map(|f| f.encoded.system.rules.len()).sum(),
            product_controls: eval.flats.iter().map(|f| f.run.product.system.controls.len()).sum(),
            saturation_iterations: eval.stats().outer_iterations,
            wall_ms: start.elapsed().as_millis(),
        };
        let _ = writeln!(out, "{}", serde_json::to_string(&summary).expect("plain struct"));
    } else {
        let _ = writeln!(out, "{}", if verdict { "TRUE" } else { "FALSE" });
    }
    Ok(if verdict { EXIT_TRUE } else { EXIT_FALSE })
}

fn oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let m = load_model(&args.model)?;
    let q = resolve_state(&m, &args.query.state)?;
    let f = parse_formula(&args.query.formula)?;
    Ok(match ral_sandwich(&m, &f, q, Endowment(args.query.endowment), args.max_stack)? {
        Verdict::True { bound } => {
            let _ = writeln!(out, "TRUE (bound {bound})");
            EXIT_TRUE
        }
        Verdict::False { bound } => {
            let _ = writeln!(out, "FALSE (bound {bound})");
            EXIT_FALSE
        }
        Verdict::Unknown => {
            let _ = writeln!(out, "UNKNOWN (up to bound {})", args.max_stack);
            EXIT_UNKNOWN
        }
    })
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Check(a) => check(a, out, err),
        Command::Oracle(a) => oracle(a, out),
        Command::Encode(a) => {
            let m = load_model(&a.model)?;
            m.validate()?;
            let coalition = Coalition::resolve(&m, &a.coalition)?;
            let _ = write!(out, "{}", encode(&m, &coalition).system.dump());
            Ok(EXIT_TRUE)
        }
        Command::Expand(a) => {
            let sys = parse_cabpds(&read(&a.system)?)?;
            let _ = write!(out, "{}", sys.expand().dump());
            Ok(EXIT_TRUE)
        }
        Command::DumpLang(a) => {
            let sys = parse_cabpds(&read(&a.system)?)?.expand();
            let cap = iteration_cap()?.unwrap_or_else(|| default_cap(&sys));
            let (lang, _) = buchi_language_with_cap(&sys, cap)?;
            let _ = write!(out, "{}", lang.ama.dump());
            Ok(EXIT_TRUE)
        }
        Command::Validate(a) => {
            let m = load_model(&a.model)?;
            m.validate()?;
            let _ = writeln!(out, "{}", if validate_irbm(&m) { "ok: iRBM" } else { "ok: RBM (not an iRBM)" });
            Ok(EXIT_TRUE)
        }
    }
}

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let text = e.render().to_string();
                let _ = writeln!(err, "{}", text.lines().next().unwrap_or("error: bad arguments"));
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_TRUE;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
