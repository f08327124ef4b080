//! Benchmark grid: every case under every strategy and solver.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::{solve_circuit, SolverError, SolverResult, SolverSpec, Verdict};
use crate::benchgen::BenchInstance;
use crate::corpus::CorpusInstance;
use crate::kripke::Kripke;
use crate::qctl::{Formula, QctlError};
use crate::reduce::{reduce, ReduceError, ReductionConfig, Strategy, UniqEncoding};

#[derive(Debug, Clone)]
pub struct BenchCase {
    pub name: String,
    pub kripke: Kripke,
    pub formula: Formula,
    pub expected: Option<bool>,
}

impl From<BenchInstance> for BenchCase {
    fn from(b: BenchInstance) -> Self {
        BenchCase {
            name: b.name,
            kripke: b.kripke,
            formula: b.formula,
            expected: Some(b.expected.verdict),
        }
    }
}

impl From<CorpusInstance> for BenchCase {
    fn from(c: CorpusInstance) -> Self {
        BenchCase {
            name: c.name,
            kripke: c.kripke,
            formula: c.formula,
            expected: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Concurrent (case, strategy) jobs.
    pub workers: usize,
    /// Limit for translation and for each solver run; solver specs' own
    /// limits apply when unset.
    pub timeout: Option<Duration>,
    pub uniq_encoding: UniqEncoding,
    pub fbv_bound: Option<usize>,
    /// Where circuit files for external solvers go; a temporary directory
    /// when unset.
    pub workdir: Option<PathBuf>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            timeout: None,
            uniq_encoding: UniqEncoding::Bitvector,
            fbv_bound: None,
            workdir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportCell {
    pub instance: String,
    pub strategy: Strategy,
    pub solver: String,
    pub verdict: Verdict,
    pub translate_s: f64,
    pub solve_s: f64,
    pub qbf_vars: usize,
    pub qbf_gates: usize,
    pub expected: Option<bool>,
    /// False when translation itself hit the time limit.
    pub translated: bool,
    #[serde(skip)]
    pub diagnostic: Option<String>,
}

impl ReportCell {
    /// `translate+solve` seconds, `t+X` for a solver timeout, `X` when the
    /// circuit was never built, `-` when not applicable and `t+E` on errors.
    pub fn text(&self) -> String {
        let t = secs(self.translate_s);
        match &self.verdict {
            Verdict::Timeout if !self.translated => "X".into(),
            Verdict::NotApplicable => "-".into(),
            Verdict::Timeout => format!("{t}+X"),
            Verdict::Error(_) if !self.translated => "E".into(),
            Verdict::Error(_) => format!("{t}+E"),
            Verdict::Unknown => format!("{t}+{}?", secs(self.solve_s)),
            Verdict::Valid | Verdict::Invalid => format!("{t}+{}", secs(self.solve_s)),
        }
    }
}

fn secs(x: f64) -> String {
    let s = if x >= 10.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.1}")
    };
    match s.strip_suffix(".0") {
        Some(whole) => whole.to_string(),
        None => s,
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    /// In case order, then strategy order, then solver order.
    pub cells: Vec<ReportCell>,
}

impl Report {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn columns(&self) -> Vec<(Strategy, String)> {
        let mut cols: Vec<(Strategy, String)> = Vec::new();
        for c in &self.cells {
            let key = (c.strategy, c.solver.clone());
            if !cols.contains(&key) {
                cols.push(key);
            }
        }
        cols
    }

    fn rows(&self) -> Vec<(String, Option<bool>)> {
        let mut rows: Vec<(String, Option<bool>)> = Vec::new();
        for c in &self.cells {
            if rows.last().map(|r| &r.0) != Some(&c.instance) {
                rows.push((c.instance.clone(), c.expected));
            }
        }
        rows
    }

    /// An aligned table with one row per case and one column per
    /// strategy/solver pair.
    pub fn text(&self) -> String {
        if self.cells.is_empty() {
            return String::new();
        }
        let cols = self.columns();
        let mut table: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["instance".to_string(), "expected".to_string()];
        header.extend(cols.iter().map(|(s, v)| format!("{s}/{v}")));
        table.push(header);
        for (name, expected) in self.rows() {
            let mut row = vec![
                name.clone(),
                expected.map_or("?".into(), |b| Verdict::from_bool(b).as_str().into()),
            ];
            for (s, v) in &cols {
                let cell = self
                    .cells
                    .iter()
                    .find(|c| c.instance == name && c.strategy == *s && &c.solver == v);
                row.push(cell.map_or(String::new(), ReportCell::text));
            }
            table.push(row);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|i| table.iter().map(|r| r[i].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &table {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }

    /// One line per cell with raw timings.
    pub fn csv(&self) -> Result<String, SolverError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| SolverError::Io(e.to_string());
        w.write_record([
            "instance",
            "strategy",
            "solver",
            "verdict",
            "expected",
            "translate_s",
            "solve_s",
            "qbf_vars",
            "qbf_gates",
            "cell",
        ])
        .map_err(io)?;
        for c in &self.cells {
            w.write_record([
                c.instance.clone(),
                c.strategy.to_string(),
                c.solver.clone(),
                c.verdict.as_str().to_string(),
                c.expected.map_or(String::new(), |b| {
                    Verdict::from_bool(b).as_str().to_string()
                }),
                format!("{:.6}", c.translate_s),
                format!("{:.6}", c.solve_s),
                c.qbf_vars.to_string(),
                c.qbf_gates.to_string(),
                c.text(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| SolverError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| SolverError::Io(e.to_string()))
    }

    /// Conclusive answers that contradict the expected verdict or each other.
    pub fn mismatches(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, expected) in self.rows() {
            let answers: Vec<(&ReportCell, bool)> = self
                .cells
                .iter()
                .filter(|c| c.instance == name)
                .filter_map(|c| c.verdict.as_bool().map(|b| (c, b)))
                .collect();
            let reference = expected.or_else(|| answers.first().map(|a| a.1));
            for (c, b) in answers {
                if Some(b) != reference {
                    out.push(format!(
                        "{name}: {}/{} says {}, expected {}",
                        c.strategy,
                        c.solver,
                        c.verdict.as_str(),
                        Verdict::from_bool(!b).as_str()
                    ));
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<(), SolverError> {
        let m = self.mismatches();
        if m.is_empty() {
            Ok(())
        } else {
            Err(SolverError::Mismatch(m))
        }
    }
}

fn run_job(
    case: &BenchCase,
    strategy: Strategy,
    specs: &[SolverSpec],
    opts: &BenchOptions,
    dir: &std::path::Path,
) -> Result<Vec<ReportCell>, SolverError> {
    let start = Instant::now();
    let cfg = ReductionConfig {
        strategy,
        uniq_encoding: opts.uniq_encoding,
        fbv_bound: opts.fbv_bound,
        max_gates: None,
        deadline: opts.timeout.map(|t| start + t),
        instance: case.name.clone(),
    };
    let translated = reduce(&case.kripke, case.kripke.init(), &case.formula, &cfg);
    let translate_s = start.elapsed().as_secs_f64();
    let cell =
        |solver: &SolverSpec, r: SolverResult, vars: usize, gates: usize, translated: bool| {
            ReportCell {
                instance: case.name.clone(),
                strategy,
                solver: solver.name.clone(),
                diagnostic: r.diagnostic().map(str::to_string),
                verdict: r.verdict,
                translate_s,
                solve_s: r.solve_s,
                qbf_vars: vars,
                qbf_gates: gates,
                expected: case.expected,
                translated,
            }
        };
    let circuit = match translated {
        Ok(c) => c,
        Err(e) => {
            let verdict = match e {
                ReduceError::Timeout => Verdict::Timeout,
                ReduceError::Qctl(QctlError::NotPrenexable(_)) => Verdict::NotApplicable,
                e => Verdict::Error(e.to_string()),
            };
            let r = SolverResult {
                verdict,
                translate_s,
                solve_s: 0.0,
                raw_output: String::new(),
            };
            return Ok(specs
                .iter()
                .map(|s| cell(s, r.clone(), 0, 0, false))
                .collect());
        }
    };
    let stem = format!("{}__{}", case.name, strategy);
    specs
        .iter()
        .map(|s| {
            let r = solve_circuit(s, &circuit, dir, &stem, opts.timeout)?;
            Ok(cell(s, r, circuit.num_vars(), circuit.num_gates(), true))
        })
        .collect()
}

type JobResult = Result<Vec<ReportCell>, SolverError>;

/// Runs the grid on a bounded pool of worker threads. Cells come back in
/// case/strategy/solver order whatever the scheduling.
pub fn bench_collect(
    cases: &[BenchCase],
    strategies: &[Strategy],
    specs: &[SolverSpec],
    opts: &BenchOptions,
) -> Result<Report, SolverError> {
    let jobs: Vec<(usize, Strategy)> = (0..cases.len())
        .flat_map(|i| strategies.iter().map(move |&s| (i, s)))
        .collect();
    if jobs.is_empty() || specs.is_empty() {
        return Ok(Report::default());
    }
    let _tmp;
    let dir = match &opts.workdir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            d.clone()
        }
        None if specs.iter().all(SolverSpec::is_builtin) => PathBuf::new(),
        None => {
            let t = tempfile::tempdir()?;
            let p = t.path().to_path_buf();
            _tmp = t;
            p
        }
    };
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<JobResult>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..opts.workers.clamp(1, jobs.len()) {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(case, strategy)) = jobs.get(j) else {
                    break;
                };
                let r = run_job(&cases[case], strategy, specs, opts, &dir);
                *slots[j].lock().expect("slot lock") = Some(r);
            });
        }
    });
    let mut cells = Vec::new();
    for slot in slots {
        cells.extend(
            slot.into_inner()
                .expect("slot lock")
                .expect("every job ran")?,
        );
    }
    Ok(Report { cells })
}

/// [`bench_collect`] followed by the verdict cross-check.
pub fn bench_run(
    cases: &[BenchCase],
    strategies: &[Strategy],
    specs: &[SolverSpec],
    opts: &BenchOptions,
) -> Result<Report, SolverError> {
    let report = bench_collect(cases, strategies, specs, opts)?;
    report.check()?;
    Ok(report)
}
