//! Run configuration, external prover invocation and the end-to-end verify
//! pipeline.

use std::fmt;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;
use wait_timeout::ChildExt;

use crate::datalogic::Predicate;
use crate::edhml;
use crate::folgen::{self, casl, tptp, ObligationConfig};
use crate::frontend::{self, parse_predicate, StateMachine};
use crate::par;

/// Environment variable holding the default prover command template.
pub const PROVER_ENV: &str = "UMLSTATE_PROVER";

/// Used when neither the configuration nor the environment names a prover.
pub const DEFAULT_TEMPLATE: &str = "SPASS -TPTP -TimeLimit={timeout} {goal}";

const PLACEHOLDERS: &[&str] = &["axioms", "goal", "timeout"];

#[derive(Debug, Error)]
pub enum ToolchainError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ToolchainError + '_ {
    move |source| ToolchainError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub bound: u64,
    pub prover: String,
    /// Seconds per goal.
    pub timeout: u64,
    pub outdir: PathBuf,
    pub ascii: bool,
    pub combined: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bound: 4,
            prover: DEFAULT_TEMPLATE.to_string(),
            timeout: 60,
            outdir: PathBuf::from("."),
            ascii: false,
            combined: false,
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ToolchainError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ToolchainError::Config(format!("{key}: expected a boolean, got `{value}`"))),
    }
}

fn parse_positive(key: &str, value: &str) -> Result<u64, ToolchainError> {
    match value.parse::<u64>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(ToolchainError::Config(format!("{key}: expected an integer >= 1, got `{value}`"))),
    }
}

impl RunConfig {
    /// Defaults, with the prover template taken from [`PROVER_ENV`] when set.
    pub fn from_env() -> Self {
        let mut cfg = RunConfig::default();
        if let Ok(t) = std::env::var(PROVER_ENV) {
            if !t.trim().is_empty() {
                cfg.prover = t;
            }
        }
        cfg
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ToolchainError> {
        match key {
            "bound" => self.bound = parse_positive(key, value)?,
            "timeout" => self.timeout = parse_positive(key, value)?,
            "prover" => self.prover = value.to_string(),
            "outdir" => self.outdir = PathBuf::from(value),
            "ascii" => self.ascii = parse_bool(key, value)?,
            "combined" => self.combined = parse_bool(key, value)?,
            _ => return Err(ToolchainError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_config_text(&mut self, text: &str) -> Result<(), ToolchainError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ToolchainError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim()).map_err(|e| match e {
                ToolchainError::Config(m) => ToolchainError::Config(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_config_file(&mut self, path: &Path) -> Result<(), ToolchainError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        self.apply_config_text(&text)
    }

    pub fn validate(&self) -> Result<(), ToolchainError> {
        if self.bound < 1 {
            return Err(ToolchainError::Config("bound must be >= 1".into()));
        }
        if self.timeout < 1 {
            return Err(ToolchainError::Config("timeout must be >= 1".into()));
        }
        check_template(&self.prover)
    }
}

/// Rejects empty templates, unknown or unterminated placeholders and
/// templates without `{goal}`.
pub fn check_template(template: &str) -> Result<(), ToolchainError> {
    if template.split_whitespace().next().is_none() {
        return Err(ToolchainError::Config("empty prover template".into()));
    }
    let mut rest = template;
    let mut has_goal = false;
    while let Some(open) = rest.find('{') {
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| ToolchainError::Config(format!("unterminated placeholder in `{template}`")))?;
        let name = &rest[open + 1..open + close];
        if !PLACEHOLDERS.contains(&name) {
            return Err(ToolchainError::Config(format!("unknown placeholder {{{name}}}")));
        }
        has_goal |= name == "goal";
        rest = &rest[open + close + 1..];
    }
    if rest.contains('}') {
        return Err(ToolchainError::Config(format!("stray `}}` in `{template}`")));
    }
    if !has_goal {
        return Err(ToolchainError::Config("prover template lacks {goal}".into()));
    }
    Ok(())
}

/// The argument vector for one run, split on whitespace before substitution.
pub fn expand_template(
    template: &str,
    axioms: &Path,
    goal: &Path,
    timeout: u64,
) -> Result<Vec<String>, ToolchainError> {
    check_template(template)?;
    Ok(template
        .split_whitespace()
        .map(|w| {
            w.replace("{axioms}", &axioms.to_string_lossy())
                .replace("{goal}", &goal.to_string_lossy())
                .replace("{timeout}", &timeout.to_string())
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofStatus {
    Proved,
    Refuted,
    Unknown,
}

impl ProofStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ProofStatus::Proved => "proved",
            ProofStatus::Refuted => "refuted",
            ProofStatus::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    Timeout,
    ResourceOut,
    ParseFailure,
    ToolMissing,
    GaveUp,
    ToolError,
}

impl UnknownReason {
    pub fn as_str(self) -> &'static str {
        match self {
            UnknownReason::Timeout => "timeout",
            UnknownReason::ResourceOut => "resource-out",
            UnknownReason::ParseFailure => "parse-failure",
            UnknownReason::ToolMissing => "tool-missing",
            UnknownReason::GaveUp => "gave-up",
            UnknownReason::ToolError => "tool-error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProverVerdict {
    pub status: ProofStatus,
    /// Set exactly when `status` is unknown.
    pub reason: Option<UnknownReason>,
    pub raw_output: String,
    pub wall_time: Duration,
}

impl ProverVerdict {
    fn unknown(reason: UnknownReason, raw_output: String, wall_time: Duration) -> Self {
        ProverVerdict { status: ProofStatus::Unknown, reason: Some(reason), raw_output, wall_time }
    }
}

impl fmt::Display for ProverVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reason {
            Some(r) => write!(f, "{}({})", self.status.as_str(), r.as_str()),
            None => f.write_str(self.status.as_str()),
        }
    }
}

fn szs_outcome(status: &str) -> Result<ProofStatus, UnknownReason> {
    match status {
        "Theorem" | "Unsatisfiable" | "Equivalent" | "TautologousConclusion" | "ContradictoryAxioms" => {
            Ok(ProofStatus::Proved)
        }
        "CounterSatisfiable" | "Satisfiable" | "CounterTheorem" | "CounterEquivalent" | "CounterTautology" => {
            Ok(ProofStatus::Refuted)
        }
        "Timeout" => Err(UnknownReason::Timeout),
        "ResourceOut" | "MemoryOut" => Err(UnknownReason::ResourceOut),
        "GaveUp" | "Unknown" | "Incomplete" | "Inappropriate" => Err(UnknownReason::GaveUp),
        "Error" | "OSError" | "InputError" | "SyntaxError" | "SemanticError" | "TypeError" => {
            Err(UnknownReason::ToolError)
        }
        _ => Err(UnknownReason::ParseFailure),
    }
}

fn spass_outcome(line: &str) -> Option<Result<ProofStatus, UnknownReason>> {
    let rest = line.trim().strip_prefix("SPASS beiseite:")?.trim();
    Some(match rest {
        "Proof found." => Ok(ProofStatus::Proved),
        "Completion found." => Ok(ProofStatus::Refuted),
        "Ran out of time." => Err(UnknownReason::Timeout),
        "Maximal number of loops exceeded." => Err(UnknownReason::ResourceOut),
        _ => Err(UnknownReason::ParseFailure),
    })
}

/// Reads the outcome from SZS status lines or SPASS's result line. Lines
/// that disagree with each other yield `unknown(parse-failure)`.
pub fn parse_prover_output(output: &str) -> Result<ProofStatus, UnknownReason> {
    let mut outcomes = Vec::new();
    for line in output.lines() {
        if let Some(i) = line.find("SZS status ") {
            let status = line[i + "SZS status ".len()..].split_whitespace().next().unwrap_or("");
            outcomes.push(szs_outcome(status));
        } else if let Some(o) = spass_outcome(line) {
            outcomes.push(o);
        }
    }
    match outcomes.split_first() {
        None => Err(UnknownReason::ParseFailure),
        Some((first, rest)) if rest.iter().all(|o| o == first) => *first,
        Some(_) => Err(UnknownReason::ParseFailure),
    }
}

fn drain(mut r: impl Read + Send + 'static) -> mpsc::Receiver<String> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        let _ = tx.send(String::from_utf8_lossy(&buf).into_owned());
    });
    rx
}

/// Output left behind by a killed process whose descendants may keep the
/// pipes open.
const DRAIN_GRACE: Duration = Duration::from_millis(500);

/// Runs the configured prover on one goal problem. The process runs in the
/// directory of `goal` so that relative includes resolve. Only a malformed
/// template is an error; every prover failure is encoded in the verdict.
pub fn run_prover(axioms: &Path, goal: &Path, cfg: &RunConfig) -> Result<ProverVerdict, ToolchainError> {
    let argv = expand_template(&cfg.prover, axioms, goal, cfg.timeout)?;
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..]).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::piped());
    if let Some(dir) = goal.parent().filter(|d| !d.as_os_str().is_empty()) {
        cmd.current_dir(dir);
    }
    let start = Instant::now();
    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) => {
            let reason =
                if e.kind() == io::ErrorKind::NotFound { UnknownReason::ToolMissing } else { UnknownReason::ToolError };
            return Ok(ProverVerdict::unknown(reason, format!("{}: {e}", argv[0]), start.elapsed()));
        }
    };
    let out = drain(child.stdout.take().expect("piped stdout"));
    let err = drain(child.stderr.take().expect("piped stderr"));
    let waited = child.wait_timeout(Duration::from_secs(cfg.timeout));
    let timed_out = !matches!(waited, Ok(Some(_)));
    if timed_out {
        let _ = child.kill();
        let _ = child.wait();
    }
    let wall_time = start.elapsed();
    let collect = |rx: mpsc::Receiver<String>| {
        if timed_out {
            rx.recv_timeout(DRAIN_GRACE).unwrap_or_default()
        } else {
            rx.recv().unwrap_or_default()
        }
    };
    let mut raw = collect(out);
    raw.push_str(&collect(err));
    if timed_out {
        return Ok(ProverVerdict::unknown(UnknownReason::Timeout, raw, wall_time));
    }
    Ok(match parse_prover_output(&raw) {
        Ok(status) => ProverVerdict { status, reason: None, raw_output: raw, wall_time },
        Err(reason) => ProverVerdict::unknown(reason, raw, wall_time),
    })
}

/// Safety property plus the per-state invariant used for induction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantSpec {
    pub per_state: Vec<(String, Predicate)>,
    pub safe: Predicate,
}

impl InvariantSpec {
    /// `text` is either a single predicate, used for every state and as the
    /// safety property, or `state: predicate` entries separated by `;`, in
    /// which case `safe` is required.
    pub fn parse(machine: &StateMachine, text: &str, safe: Option<&str>) -> Result<Self, String> {
        let pred = |t: &str| parse_predicate(t.trim(), &machine.attributes, &[]).map_err(|d| d.to_string());
        let entries: Vec<&str> = text.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
        let per_state_form = entries
            .iter()
            .all(|e| e.split_once(':').is_some_and(|(s, _)| machine.states.contains(&s.trim().to_string())));
        if entries.is_empty() {
            return Err("empty invariant".into());
        }
        if !per_state_form {
            if entries.len() > 1 {
                return Err("expected `state: predicate` entries separated by `;`".into());
            }
            let p = pred(entries[0])?;
            let safe = match safe {
                Some(s) => pred(s)?,
                None => p.clone(),
            };
            return Ok(InvariantSpec {
                per_state: machine.states.iter().map(|s| (s.clone(), p.clone())).collect(),
                safe,
            });
        }
        let mut per_state = Vec::new();
        for e in entries {
            let (s, p) = e.split_once(':').expect("checked above");
            let s = s.trim().to_string();
            if per_state.iter().any(|(x, _)| *x == s) {
                return Err(format!("state {s} listed twice"));
            }
            per_state.push((s, pred(p)?));
        }
        let safe = safe.ok_or("a per-state invariant needs an explicit safety property")?;
        Ok(InvariantSpec { per_state, safe: pred(safe)? })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub exit_code: i32,
    pub diagnostics: Vec<String>,
    pub artifacts: Vec<PathBuf>,
    pub verdicts: Vec<(String, ProverVerdict)>,
}

impl VerifyReport {
    fn input_error(diagnostics: Vec<String>) -> Self {
        VerifyReport { exit_code: 3, diagnostics, artifacts: Vec::new(), verdicts: Vec::new() }
    }
}

/// 0 when every goal is proved, 2 when some goal is refuted, 1 otherwise.
pub fn exit_code_for(verdicts: &[(String, ProverVerdict)]) -> i32 {
    if verdicts.iter().any(|(_, v)| v.status == ProofStatus::Refuted) {
        2
    } else if verdicts.iter().all(|(_, v)| v.status == ProofStatus::Proved) {
        0
    } else {
        1
    }
}

/// File stem used for the artifacts of `source`.
pub fn spec_stem(source: &Path) -> String {
    source.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "spec".into())
}

/// Theory with obligations for the completed machine, as used by `verify`.
pub fn obligation_theory(machine: &StateMachine, inv: &InvariantSpec) -> Result<folgen::FolTheory, String> {
    let t = folgen::simplify_theory(&folgen::machine_theory(machine, true).map_err(|e| e.to_string())?);
    let cfg = ObligationConfig::from_predicates(&inv.per_state, &inv.safe).map_err(|e| e.to_string())?;
    folgen::gen_obligations(&t, machine, &cfg).map_err(|e| e.to_string())
}

/// Parses and validates UMLState source, rendering diagnostics as text.
pub fn load_machine(text: &str) -> Result<StateMachine, Vec<String>> {
    let m = frontend::parse_umlstate(text).map_err(|ds| ds.iter().map(|d| d.to_string()).collect::<Vec<_>>())?;
    let errors: Vec<String> = frontend::validate(&m).iter().filter(|d| d.is_error()).map(|d| d.to_string()).collect();
    if errors.is_empty() {
        Ok(m)
    } else {
        Err(errors)
    }
}

/// Parses, validates, completes, characterizes, translates, simplifies and
/// emits `source`, then runs the prover on every goal. `invariant` and
/// `safe` follow [`InvariantSpec::parse`].
pub fn verify_pipeline(
    source: &Path,
    invariant: &str,
    safe: Option<&str>,
    cfg: &RunConfig,
) -> Result<VerifyReport, ToolchainError> {
    cfg.validate()?;
    let text = match fs::read_to_string(source) {
        Ok(t) => t,
        Err(e) => return Ok(VerifyReport::input_error(vec![format!("{}: {e}", source.display())])),
    };
    let machine = match load_machine(&text) {
        Ok(m) => m,
        Err(ds) => return Ok(VerifyReport::input_error(ds)),
    };
    let inv = match InvariantSpec::parse(&machine, invariant, safe) {
        Ok(i) => i,
        Err(e) => return Ok(VerifyReport::input_error(vec![format!("invariant: {e}")])),
    };
    let rho = match edhml::characterize(&machine, true) {
        Ok(r) => r,
        Err(e) => return Ok(VerifyReport::input_error(vec![e.to_string()])),
    };
    let theory = match obligation_theory(&machine, &inv) {
        Ok(t) => t,
        Err(e) => return Ok(VerifyReport::input_error(vec![e])),
    };
    let casl_text = casl::emit_casl(&theory, cfg.ascii).map_err(|e| ToolchainError::Config(e.to_string()))?;
    let stem = spec_stem(source);
    let axiom_name = format!("{stem}_axioms.p");
    let files = tptp::emit_tptp_split(&theory, &axiom_name).map_err(|e| ToolchainError::Config(e.to_string()))?;

    fs::create_dir_all(&cfg.outdir).map_err(io_err(&cfg.outdir))?;
    let mut artifacts = Vec::new();
    let mut write = |name: String, body: &str| -> Result<PathBuf, ToolchainError> {
        let path = cfg.outdir.join(name);
        fs::write(&path, body).map_err(io_err(&path))?;
        artifacts.push(path.clone());
        Ok(path)
    };
    write(format!("{stem}.edhml.txt"), &format!("{rho}\n"))?;
    write(format!("{stem}.casl"), &casl_text)?;
    let axiom_path = write(axiom_name, &files.axioms)?;
    let mut goal_paths = Vec::new();
    for (label, body) in &files.goals {
        goal_paths.push((label.clone(), write(format!("{stem}_goal_{label}.p"), body)?));
    }
    let runs = par::map(&goal_paths, |(label, path)| run_prover(&axiom_path, path, cfg).map(|v| (label.clone(), v)));
    let verdicts = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(VerifyReport { exit_code: exit_code_for(&verdicts), diagnostics: Vec::new(), artifacts, verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::os::unix::fs::PermissionsExt;

    fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
        fs::set_permissions(&p, fs::Permissions::from_mode(0o755)).unwrap();
        p
    }

    fn cfg_with(prover: String, timeout: u64, outdir: &Path) -> RunConfig {
        RunConfig { prover, timeout, outdir: outdir.to_path_buf(), ..RunConfig::default() }
    }

    #[test]
    fn status_lines() {
        assert_eq!(parse_prover_output("% SZS status Theorem for x"), Ok(ProofStatus::Proved));
        assert_eq!(parse_prover_output("# SZS status CounterSatisfiable"), Ok(ProofStatus::Refuted));
        assert_eq!(parse_prover_output("SPASS beiseite: Proof found.\n"), Ok(ProofStatus::Proved));
        assert_eq!(parse_prover_output("SPASS beiseite: Completion found."), Ok(ProofStatus::Refuted));
        assert_eq!(parse_prover_output("SPASS beiseite: Ran out of time."), Err(UnknownReason::Timeout));
        assert_eq!(parse_prover_output("SZS status ResourceOut"), Err(UnknownReason::ResourceOut));
        assert_eq!(parse_prover_output("SZS status GaveUp"), Err(UnknownReason::GaveUp));
        assert_eq!(parse_prover_output("nothing here"), Err(UnknownReason::ParseFailure));
        assert_eq!(
            parse_prover_output("SZS status Theorem\nSZS status CounterSatisfiable"),
            Err(UnknownReason::ParseFailure)
        );
        assert_eq!(parse_prover_output("SZS status Theorem\nSPASS beiseite: Proof found."), Ok(ProofStatus::Proved));
    }

    #[test]
    fn templates() {
        assert!(check_template(DEFAULT_TEMPLATE).is_ok());
        assert!(check_template("eprover --auto {axioms}").is_err());
        assert!(check_template("x {goal} {bogus}").is_err());
        assert!(check_template("x {goal").is_err());
        assert!(check_template("x {goal}}").is_err());
        assert!(check_template("   ").is_err());
        let argv = expand_template("p -t={timeout} {goal} {axioms}", Path::new("a.p"), Path::new("g.p"), 7).unwrap();
        assert_eq!(argv, ["p", "-t=7", "g.p", "a.p"]);
    }

    #[test]
    fn config_text() {
        let mut cfg = RunConfig::default();
        cfg.apply_config_text("# comment\nbound = 6\n\ntimeout=5\nprover = e {goal}\nascii = yes\noutdir = out\n")
            .unwrap();
        assert_eq!((cfg.bound, cfg.timeout, cfg.prover.as_str(), cfg.ascii), (6, 5, "e {goal}", true));
        assert_eq!(cfg.outdir, PathBuf::from("out"));
        assert!(RunConfig::default().apply_config_text("bound = 0").is_err());
        assert!(RunConfig::default().apply_config_text("timeout = -1").is_err());
        assert!(RunConfig::default().apply_config_text("colour = red").is_err());
        assert!(RunConfig::default().apply_config_text("no equals sign").is_err());
        let bad = RunConfig { prover: "x".into(), ..RunConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn verdicts_from_fake_provers() {
        let dir = tempfile::tempdir().unwrap();
        let goal = dir.path().join("g.p");
        let ax = dir.path().join("a.p");
        fs::write(&goal, "").unwrap();
        fs::write(&ax, "").unwrap();
        let yes = script(dir.path(), "yes.sh", "echo '% SZS status Theorem for g'");
        let no = script(dir.path(), "no.sh", "echo 'SPASS beiseite: Completion found.'");
        let junk = script(dir.path(), "junk.sh", "echo hello >&2; exit 1");
        let slow = script(dir.path(), "slow.sh", "sleep 5");
        let run = |p: &Path, t: u64| {
            run_prover(&ax, &goal, &cfg_with(format!("{} {{goal}}", p.display()), t, dir.path())).unwrap()
        };
        assert_eq!(run(&yes, 10).status, ProofStatus::Proved);
        assert_eq!(run(&no, 10).status, ProofStatus::Refuted);
        let j = run(&junk, 10);
        assert_eq!((j.status, j.reason), (ProofStatus::Unknown, Some(UnknownReason::ParseFailure)));
        assert!(j.raw_output.contains("hello"));
        let s = run(&slow, 1);
        assert_eq!(s.reason, Some(UnknownReason::Timeout));
        assert!(s.wall_time >= Duration::from_secs(1) && s.wall_time < Duration::from_secs(4), "{:?}", s.wall_time);
        let missing = run(&dir.path().join("does-not-exist"), 1);
        assert_eq!(missing.reason, Some(UnknownReason::ToolMissing));
        assert_eq!(missing.to_string(), "unknown(tool-missing)");
    }

    fn counter_source(dir: &Path) -> PathBuf {
        let p = dir.join("Counter.umlstate");
        fs::write(&p, include_str!("../fixtures/counter.umlstate")).unwrap();
        p
    }

    #[test]
    fn pipeline_writes_artifacts_and_maps_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let src = counter_source(dir.path());
        let out = dir.path().join("out");
        let cfg = cfg_with(format!("{} {{goal}}", dir.path().join("absent").display()), 1, &out);
        let r = verify_pipeline(&src, "cnt <= 4", None, &cfg).unwrap();
        assert_eq!(r.exit_code, 1);
        let labels: Vec<&str> = r.verdicts.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["InvarInit", "InvarReset", "InvarInc", "InvarStep", "InvarImpliesSafe", "Safe"]);
        assert!(r.verdicts.iter().all(|(_, v)| v.reason == Some(UnknownReason::ToolMissing)));
        for name in ["Counter.edhml.txt", "Counter.casl", "Counter_axioms.p", "Counter_goal_Safe.p"] {
            assert!(out.join(name).is_file(), "{name}");
        }
        assert!(fs::read_to_string(out.join("Counter_goal_InvarInit.p"))
            .unwrap()
            .contains("include('Counter_axioms.p')"));

        let yes = script(dir.path(), "yes.sh", "echo 'SZS status Theorem'");
        let r =
            verify_pipeline(&src, "cnt <= 4", None, &cfg_with(format!("{} {{goal}}", yes.display()), 5, &out)).unwrap();
        assert_eq!(r.exit_code, 0);
        let picky = script(
            dir.path(),
            "picky.sh",
            "case \"$1\" in *Safe*) echo 'SZS status CounterSatisfiable';; *) echo 'SZS status Theorem';; esac",
        );
        let r = verify_pipeline(&src, "cnt <= 4", None, &cfg_with(format!("{} {{goal}}", picky.display()), 5, &out))
            .unwrap();
        assert_eq!(r.exit_code, 2);

        let bad = dir.path().join("bad.umlstate");
        fs::write(&bad, "logic UMLState spec X = states ; end").unwrap();
        let r = verify_pipeline(&bad, "true", None, &cfg).unwrap();
        assert_eq!(r.exit_code, 3);
        assert!(!r.diagnostics.is_empty());
        assert_eq!(verify_pipeline(&src, "bogus <= 4", None, &cfg).unwrap().exit_code, 3);
        assert_eq!(verify_pipeline(&dir.path().join("missing"), "true", None, &cfg).unwrap().exit_code, 3);
    }

    #[test]
    fn invariant_forms() {
        let m = frontend::parse_umlstate(include_str!("../fixtures/counter.umlstate")).unwrap();
        let u = InvariantSpec::parse(&m, "cnt <= 4", None).unwrap();
        assert_eq!(u.per_state.len(), 2);
        assert_eq!(u.safe, u.per_state[0].1);
        let p = InvariantSpec::parse(&m, "s1: cnt <= 4; s2: cnt = 4", Some("cnt <= 4")).unwrap();
        assert_eq!(p.per_state[1].0, "s2");
        assert!(InvariantSpec::parse(&m, "s1: cnt <= 4; s2: cnt = 4", None).is_err());
        assert!(InvariantSpec::parse(&m, "s1: cnt <= 4; s1: cnt = 4", Some("true")).is_err());
        assert!(InvariantSpec::parse(&m, "", None).is_err());
    }
}
