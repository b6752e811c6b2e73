//! Command-line driver: one verb per pipeline stage plus bounded oracle
//! checks and the full verify chain.
//!
//! Exit codes: 0 success or proved, 1 unknown, 2 refuted or property
//! violated, 3 input error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use umlstate::edhml;
use umlstate::eds::{self, EdStructure};
use umlstate::folgen::{self, casl, tptp, FolTheory};
use umlstate::frontend::{self, StateMachine};
use umlstate::toolchain::{self, InvariantSpec, RunConfig};

const INPUT_ERROR: u8 = 3;

macro_rules! out {
    ($($t:tt)*) => { write_stdout(format_args!($($t)*)) };
}

macro_rules! outln {
    ($($t:tt)*) => { write_stdout(format_args!("{}\n", format_args!($($t)*))) };
}

/// Writes to stdout; a closed pipe ends the process quietly.
fn write_stdout(args: std::fmt::Arguments) {
    if let Err(e) = io::stdout().lock().write_fmt(args) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: stdout: {e}");
        std::process::exit(INPUT_ERROR as i32);
    }
}

#[derive(Parser)]
#[command(name = "umlstate", version, about = "UML state machines to hybrid logic and first-order proof obligations")]
struct Cli {
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a UMLState file and print it in normal form.
    Parse { file: PathBuf },
    /// Report diagnostics for a UMLState file.
    Check { file: PathBuf },
    /// Print the input-enabled completion.
    Complete { file: PathBuf },
    /// Print the characterizing sentence.
    Characterize {
        file: PathBuf,
        /// Complete the machine first.
        #[arg(long)]
        complete: bool,
    },
    /// Emit the first-order theory as CASL or TPTP.
    Emit(EmitArgs),
    /// Bounded semantic checks.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Run the full chain and the external prover.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Casl,
    Tptp,
}

#[derive(Args)]
struct EmitArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
    /// TPTP: one problem on stdout instead of an axiom file and goal files.
    #[arg(long)]
    combined: bool,
    /// CASL: ASCII connectives.
    #[arg(long)]
    ascii: bool,
    /// Translate the machine as written, without completion.
    #[arg(long)]
    no_complete: bool,
    /// Skip the logical simplifications.
    #[arg(long)]
    no_simplify: bool,
    /// Add proof obligations for this invariant (see `verify`).
    #[arg(long)]
    invariant: Option<String>,
    /// Safety property for the obligations.
    #[arg(long)]
    safe: Option<String>,
    /// Write files here instead of printing; required for split TPTP.
    #[arg(long)]
    outdir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Check whether a structure is a model of a machine.
    CheckModel {
        file: PathBuf,
        /// Structure file.
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Check whether a structure satisfies a sentence.
    CheckSentence {
        /// Structure file.
        #[arg(long)]
        structure: PathBuf,
        /// Sentence text.
        #[arg(long, conflicts_with = "machine", required_unless_present = "machine")]
        formula: Option<String>,
        /// Use the characterizing sentence of this machine.
        #[arg(long)]
        machine: Option<PathBuf>,
        /// With `--machine`, characterize the completed machine.
        #[arg(long)]
        complete: bool,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Print the canonical structure of a machine.
    Canonical {
        file: PathBuf,
        #[arg(long)]
        complete: bool,
        #[arg(long)]
        bound: Option<u64>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    /// A predicate over the attributes, or `state: predicate` entries
    /// separated by `;`.
    #[arg(long)]
    invariant: String,
    /// Safety property; defaults to a uniform invariant.
    #[arg(long)]
    safe: Option<String>,
    /// Prover command template with {axioms}, {goal} and {timeout}.
    #[arg(long)]
    prover: Option<String>,
    /// Seconds per goal.
    #[arg(long)]
    timeout: Option<u64>,
    #[arg(long)]
    outdir: Option<PathBuf>,
    /// Print raw prover output.
    #[arg(long)]
    verbose: bool,
}

/// Failure carrying its exit code.
struct Fail(u8, String);

type Outcome = Result<u8, Fail>;

fn input(msg: impl std::fmt::Display) -> Fail {
    Fail(INPUT_ERROR, msg.to_string())
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<StateMachine, Fail> {
    toolchain::load_machine(&read(path)?).map_err(|ds| input(ds.join("\n")))
}

fn load_structure(path: &Path) -> Result<EdStructure, Fail> {
    read(path)?.parse::<EdStructure>().map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, body: &str) -> Result<(), Fail> {
    fs::write(path, body).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn run_config(cli_config: Option<&Path>) -> Result<RunConfig, Fail> {
    let mut cfg = RunConfig::from_env();
    if let Some(p) = cli_config {
        cfg.apply_config_file(p).map_err(input)?;
    }
    Ok(cfg)
}

fn bound_of(cfg: &RunConfig, flag: Option<u64>) -> Result<u64, Fail> {
    match flag {
        Some(0) => Err(input("bound must be >= 1")),
        Some(b) => Ok(b),
        None => Ok(cfg.bound),
    }
}

fn theory_for(args: &EmitArgs, m: &StateMachine) -> Result<FolTheory, Fail> {
    let t = folgen::machine_theory(m, !args.no_complete).map_err(input)?;
    let t = if args.no_simplify { t } else { folgen::simplify_theory(&t) };
    match &args.invariant {
        None if args.safe.is_some() => Err(input("--safe needs --invariant")),
        None => Ok(t),
        Some(inv) => {
            let spec = InvariantSpec::parse(m, inv, args.safe.as_deref()).map_err(input)?;
            let cfg = folgen::ObligationConfig::from_predicates(&spec.per_state, &spec.safe).map_err(input)?;
            folgen::gen_obligations(&t, m, &cfg).map_err(input)
        }
    }
}

fn emit(args: &EmitArgs, cfg: &RunConfig) -> Outcome {
    let m = load(&args.file)?;
    let t = theory_for(args, &m)?;
    let stem = toolchain::spec_stem(&args.file);
    let ascii = args.ascii || cfg.ascii;
    let outdir = args.outdir.as_deref();
    if let Some(d) = outdir {
        fs::create_dir_all(d).map_err(|e| input(format!("{}: {e}", d.display())))?;
    }
    match args.format {
        Format::Casl => {
            let text = casl::emit_casl(&t, ascii).map_err(input)?;
            match outdir {
                Some(d) => write(&d.join(format!("{stem}.casl")), &text)?,
                None => out!("{text}"),
            }
        }
        Format::Tptp if args.combined || cfg.combined => {
            let text = tptp::emit_tptp(&t).map_err(input)?;
            match outdir {
                Some(d) => write(&d.join(format!("{stem}.p")), &text)?,
                None => out!("{text}"),
            }
        }
        Format::Tptp => {
            let d = outdir.ok_or_else(|| input("split TPTP output needs --outdir (or use --combined)"))?;
            let axiom_file = format!("{stem}_axioms.p");
            let files = tptp::emit_tptp_split(&t, &axiom_file).map_err(input)?;
            write(&d.join(&axiom_file), &files.axioms)?;
            for (label, body) in &files.goals {
                write(&d.join(format!("{stem}_goal_{label}.p")), body)?;
            }
        }
    }
    Ok(0)
}

fn oracle(cmd: &OracleCmd, cfg: &RunConfig) -> Outcome {
    match cmd {
        OracleCmd::CheckModel { file, structure, bound } => {
            let m = load(file)?;
            let s = load_structure(structure)?;
            let report = eds::is_model_of(&s, &m, bound_of(cfg, *bound)?).map_err(input)?;
            for v in &report.violations {
                let at = v.config.map(|c| s.describe(&c)).unwrap_or_default();
                let ev = v.event.as_ref().map(|e| e.to_string()).unwrap_or_default();
                outln!("violation {} {at} {ev}: {}", v.kind.as_str(), v.detail);
            }
            outln!("{}", if report.verdict { "model" } else { "not a model" });
            Ok(if report.verdict { 0 } else { 2 })
        }
        OracleCmd::CheckSentence { structure, formula, machine, complete, bound } => {
            let s = load_structure(structure)?;
            let rho = match (formula, machine) {
                (Some(text), _) => edhml::parse_formula(text, s.signature()).map_err(input)?,
                (None, Some(path)) => edhml::characterize(&load(path)?, *complete).map_err(input)?,
                (None, None) => return Err(input("give --formula or --machine")),
            };
            let holds = edhml::sat_sentence(&s, &rho, bound_of(cfg, *bound)?).map_err(input)?;
            outln!("{holds}");
            Ok(if holds { 0 } else { 2 })
        }
        OracleCmd::Canonical { file, complete, bound } => {
            let m = load(file)?;
            let m = if *complete { frontend::complete_input_enabledness(&m) } else { m };
            let s = eds::canonical_model(&m, bound_of(cfg, *bound)?).map_err(input)?;
            out!("{s}");
            Ok(0)
        }
    }
}

fn verify(args: &VerifyArgs, mut cfg: RunConfig) -> Outcome {
    if let Some(p) = &args.prover {
        cfg.prover = p.clone();
    }
    if let Some(t) = args.timeout {
        cfg.timeout = t;
    }
    if let Some(d) = &args.outdir {
        cfg.outdir = d.clone();
    }
    let report = toolchain::verify_pipeline(&args.file, &args.invariant, args.safe.as_deref(), &cfg).map_err(input)?;
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    for p in &report.artifacts {
        outln!("wrote {}", p.display());
    }
    for (label, v) in &report.verdicts {
        outln!("{label}: {v} ({:.2}s)", v.wall_time.as_secs_f64());
        if args.verbose {
            outln!("{}", v.raw_output.trim_end());
        }
    }
    Ok(report.exit_code as u8)
}

fn run(cli: Cli) -> Outcome {
    let cfg = run_config(cli.config.as_deref())?;
    match &cli.command {
        Cmd::Parse { file } => {
            out!("{}", load(file)?);
            Ok(0)
        }
        Cmd::Check { file } => {
            let text = read(file)?;
            let diags = match frontend::parse_umlstate(&text) {
                Ok(m) => frontend::validate(&m),
                Err(ds) => ds,
            };
            for d in &diags {
                outln!("{d}");
            }
            if diags.iter().any(|d| d.is_error()) {
                Ok(INPUT_ERROR)
            } else {
                outln!("ok");
                Ok(0)
            }
        }
        Cmd::Complete { file } => {
            out!("{}", frontend::complete_input_enabledness(&load(file)?));
            Ok(0)
        }
        Cmd::Characterize { file, complete } => {
            outln!("{}", edhml::characterize(&load(file)?, *complete).map_err(input)?);
            Ok(0)
        }
        Cmd::Emit(args) => emit(args, &cfg),
        Cmd::Oracle(cmd) => oracle(cmd, &cfg),
        Cmd::Verify(args) => verify(args, cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
