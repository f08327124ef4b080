//! Running QBF solvers on emitted circuits and tabulating the results.

mod bench;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::qbf::{decide, emit_qcir, emit_smt, parse_qcir, parse_smt, QbfCircuit, QbfError};

pub use bench::{bench_collect, bench_run, BenchCase, BenchOptions, Report, ReportCell};


/// Value of `command` selecting the in-process evaluator.
pub const BUILTIN: &str = "builtin";
/// Name under which the in-process evaluator is always available.
pub const NAIVE: &str = "naive";
/// Prefix of the environment variables overriding solver executables.
pub const ENV_PREFIX: &str = "QCTLQBF_SOLVER_";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("config: {0}")]
    Config(String),
    #[error("unknown solver `{0}`")]
    UnknownSolver(String),
    #[error("cannot start `{command}`: {msg}")]
    Spawn { command: String, msg: String },
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Qbf(#[from] QbfError),
    #[error("verdict mismatch: {}", .0.join("; "))]
    Mismatch(Vec<String>),
}

impl From<std::io::Error> for SolverError {
    fn from(e: std::io::Error) -> Self {
        SolverError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Qcir,
    Smt,
}

impl InputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            InputFormat::Qcir => "qcir",
            InputFormat::Smt => "smt2",
        }
    }

    pub fn emit(self, c: &QbfCircuit) -> Result<String, QbfError> {
        match self {
            InputFormat::Qcir => emit_qcir(c),
            InputFormat::Smt => emit_smt(c),
        }
    }

    pub fn parse(self, text: &str) -> Result<QbfCircuit, QbfError> {
        match self {
            InputFormat::Qcir => parse_qcir(text),
            InputFormat::Smt => parse_smt(text),
        }
    }
}

fn default_timeout() -> f64 {
    600.0
}

/// One configured solver. Unset verdict rules fall back to the QBF
/// competition exit codes (10 valid, 20 invalid) for QCIR input and to
/// `sat` / `unsat` output lines for SMT input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub name: String,
    /// Executable, or `builtin` for the in-process evaluator.
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default)]
    pub format: InputFormat,
    #[serde(default)]
    pub prenex_required: bool,
    /// Wall-clock limit in seconds.
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default)]
    pub valid_exit: Vec<i32>,
    #[serde(default)]
    pub invalid_exit: Vec<i32>,
    #[serde(default)]
    pub valid_pattern: Option<String>,
    #[serde(default)]
    pub invalid_pattern: Option<String>,
}

impl SolverSpec {
    pub fn naive() -> Self {
        SolverSpec {
            name: NAIVE.into(),
            command: BUILTIN.into(),
            args: Vec::new(),
            format: InputFormat::Qcir,
            prenex_required: false,
            timeout: default_timeout(),
            valid_exit: Vec::new(),
            invalid_exit: Vec::new(),
            valid_pattern: None,
            invalid_pattern: None,
        }
    }

    pub fn is_builtin(&self) -> bool {
        self.command == BUILTIN
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout.max(0.0))
    }

    /// Whether a circuit may be handed to this solver.
    pub fn accepts(&self, c: &QbfCircuit) -> bool {
        !self.prenex_required || c.is_prenex()
    }

    fn rules(&self) -> Result<VerdictRules, SolverError> {
        let compile = |p: &Option<String>, fallback: &str| -> Result<Option<Regex>, SolverError> {
            let text = match (p, self.format) {
                (Some(p), _) => p.as_str(),
                (None, InputFormat::Smt) => fallback,
                (None, InputFormat::Qcir) => return Ok(None),
            };
            Regex::new(text)
                .map(Some)
                .map_err(|e| SolverError::Config(format!("{}: {e}", self.name)))
        };
        let codes = |given: &[i32], fallback: i32| match (given.is_empty(), self.format) {
            (false, _) => given.to_vec(),
            (true, InputFormat::Qcir) => vec![fallback],
            (true, InputFormat::Smt) => Vec::new(),
        };
        Ok(VerdictRules {
            valid_exit: codes(&self.valid_exit, 10),
            invalid_exit: codes(&self.invalid_exit, 20),
            valid: compile(&self.valid_pattern, r"(?m)^\s*sat\s*$")?,
            invalid: compile(&self.invalid_pattern, r"(?m)^\s*unsat\s*$")?,
        })
    }
}

struct VerdictRules {
    valid_exit: Vec<i32>,
    invalid_exit: Vec<i32>,
    valid: Option<Regex>,
    invalid: Option<Regex>,
}

impl VerdictRules {
    fn classify(&self, code: Option<i32>, stdout: &str) -> Verdict {
        if let Some(c) = code {
            if self.valid_exit.contains(&c) {
                return Verdict::Valid;
            }
            if self.invalid_exit.contains(&c) {
                return Verdict::Invalid;
            }
        }
        // the invalid pattern goes first since `sat` patterns may match inside `unsat`
        if self.invalid.as_ref().is_some_and(|r| r.is_match(stdout)) {
            return Verdict::Invalid;
        }
        if self.valid.as_ref().is_some_and(|r| r.is_match(stdout)) {
            return Verdict::Valid;
        }
        Verdict::Error(format!("unrecognised solver output (exit {code:?})"))
    }
}

/// The `[[solver]]` tables of a config file plus the worker count.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default, rename = "solver")]
    pub solvers: Vec<SolverSpec>,
}

impl SolverConfig {
    pub fn parse(text: &str) -> Result<Self, SolverError> {
        let cfg: SolverConfig =
            toml::from_str(text).map_err(|e| SolverError::Config(e.to_string()))?;
        for (i, s) in cfg.solvers.iter().enumerate() {
            if cfg.solvers[..i].iter().any(|t| t.name == s.name) {
                return Err(SolverError::Config(format!(
                    "solver `{}` defined twice",
                    s.name
                )));
            }
            s.rules()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SolverError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SolverError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Replaces executables by `QCTLQBF_SOLVER_<NAME>` where set, with the
    /// name upper-cased and non-alphanumerics mapped to `_`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        for s in &mut self.solvers {
            if let Some(cmd) = lookup(&env_var_name(&s.name)) {
                s.command = cmd;
            }
        }
    }

    /// The named solver; `naive` resolves to the built-in evaluator unless
    /// the file redefines it.
    pub fn get(&self, name: &str) -> Result<SolverSpec, SolverError> {
        match self.solvers.iter().find(|s| s.name == name) {
            Some(s) => Ok(s.clone()),
            None if name == NAIVE => Ok(SolverSpec::naive()),
            None => Err(SolverError::UnknownSolver(name.to_string())),
        }
    }
}

pub fn env_var_name(solver: &str) -> String {
    let tail: String = solver
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_uppercase()
            } else {
                '_'
            }
        })
        .collect();
    format!("{ENV_PREFIX}{tail}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid,
    /// An inconclusive answer, such as invalidity under a bounded encoding.
    Unknown,
    Timeout,
    /// The solver cannot take the circuit, e.g. a prenex-only solver.
    NotApplicable,
    Error(String),
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Unknown => "unknown",
            Verdict::Timeout => "timeout",
            Verdict::NotApplicable => "n/a",
            Verdict::Error(_) => "error",
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Verdict::Valid => Some(true),
            Verdict::Invalid => Some(false),
            _ => None,
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Valid
        } else {
            Verdict::Invalid
        }
    }

    /// Turns a negative answer on an inexact circuit into [`Verdict::Unknown`].
    pub fn for_circuit(self, c: &QbfCircuit) -> Self {
        match self {
            Verdict::Invalid if !c.meta.exact => Verdict::Unknown,
            v => v,
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverResult {
    pub verdict: Verdict,
    pub translate_s: f64,
    pub solve_s: f64,
    #[serde(skip)]
    pub raw_output: String,
}

impl SolverResult {
    pub fn diagnostic(&self) -> Option<&str> {
        match &self.verdict {
            Verdict::Error(m) => Some(m),
            _ => None,
        }
    }
}

/// Decides `c` in-process with an optional wall-clock limit.
pub fn run_builtin(c: &QbfCircuit, timeout: Option<Duration>) -> SolverResult {
    let start = Instant::now();
    let verdict = match decide(c, timeout.map(|t| start + t)) {
        Ok(b) => Verdict::from_bool(b).for_circuit(c),
        Err(QbfError::Timeout) => Verdict::Timeout,
        Err(e) => Verdict::Error(e.to_string()),
    };
    SolverResult {
        verdict,
        translate_s: 0.0,
        solve_s: start.elapsed().as_secs_f64(),
        raw_output: String::new(),
    }
}

/// Runs the solver on a circuit file. The child is killed once `timeout`
/// (or the spec's own limit) elapses and is always reaped.
pub fn run_solver(
    spec: &SolverSpec,
    file: &Path,
    timeout: Option<Duration>,
) -> Result<SolverResult, SolverError> {
    let limit = timeout.unwrap_or_else(|| spec.timeout());
    if spec.is_builtin() {
        let text = std::fs::read_to_string(file)?;
        let c = spec.format.parse(&text)?;
        return Ok(run_builtin(&c, Some(limit)));
    }
    let rules = spec.rules()?;
    let start = Instant::now();
    let mut cmd = Command::new(&spec.command);
    cmd.args(&spec.args)
        .arg(file)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        // own process group, so wrapper scripts die together with their solver
        cmd.process_group(0);
    }
    let mut child = cmd.spawn().map_err(|e| SolverError::Spawn {
        command: spec.command.clone(),
        msg: e.to_string(),
    })?;
    let drain = |r: Option<Box<dyn Read + Send>>| {
        std::thread::spawn(move || {
            let mut buf = String::new();
            if let Some(mut r) = r {
                let _ = r.read_to_string(&mut buf);
            }
            buf
        })
    };
    let out = drain(
        child
            .stdout
            .take()
            .map(|s| Box::new(s) as Box<dyn Read + Send>),
    );
    let err = drain(
        child
            .stderr
            .take()
            .map(|s| Box::new(s) as Box<dyn Read + Send>),
    );
    let status = child.wait_timeout(limit)?;
    let timed_out = status.is_none();
    let status = match status {
        Some(s) => s,
        None => {
            kill_tree(&mut child);
            child.wait()?
        }
    };
    let solve_s = start.elapsed().as_secs_f64();
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    let verdict = if timed_out {
        Verdict::Timeout
    } else {
        rules.classify(status.code(), &stdout)
    };
    let raw_output = if stderr.is_empty() {
        stdout
    } else {
        format!("{stdout}\n--- stderr ---\n{stderr}")
    };
    Ok(SolverResult {
        verdict,
        translate_s: 0.0,
        solve_s,
        raw_output,
    })
}

fn kill_tree(child: &mut std::process::Child) {
    #[cfg(unix)]
    {
        if let Ok(pid) = i32::try_from(child.id()) {
            // SAFETY: signalling a process group we created; no memory is touched
            unsafe {
                libc::kill(-pid, libc::SIGKILL);
            }
        }
    }
    let _ = child.kill();
}

/// Emits `c` in the solver's format into `dir` and runs it there.
pub fn solve_circuit(
    spec: &SolverSpec,
    c: &QbfCircuit,
    dir: &Path,
    stem: &str,
    timeout: Option<Duration>,
) -> Result<SolverResult, SolverError> {
    if !spec.accepts(c) {
        return Ok(SolverResult {
            verdict: Verdict::NotApplicable,
            translate_s: 0.0,
            solve_s: 0.0,
            raw_output: String::new(),
        });
    }
    if spec.is_builtin() {
        return Ok(run_builtin(
            c,
            Some(timeout.unwrap_or_else(|| spec.timeout())),
        ));
    }
    let path: PathBuf = dir.join(format!("{stem}.{}", spec.format.extension()));
    std::fs::write(&path, spec.format.emit(c)?)?;
    let mut r = run_solver(spec, &path, timeout)?;
    r.verdict = r.verdict.for_circuit(c);
    Ok(r)
}
