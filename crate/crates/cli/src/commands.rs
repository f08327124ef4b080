//! Subcommand implementations. Each returns the process exit code.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use qctl_core::benchgen::{self, BenchError, BenchInstance, KconnFormula};
use qctl_core::corpus::{corpus, CorpusParams};
use qctl_core::kripke::{parse_kri, serialize_kri, Kripke, KripkeError, StateId};
use qctl_core::oracle::{mc_qctl, Environment, OracleError};
use qctl_core::qctl::{parse_qctl, Formula, QctlError};
use qctl_core::reduce::{reduce, ReduceError, ReductionConfig, Strategy};
use qctl_core::sml::{parse_sml, sml_to_qctl, SmlError};
use qctl_core::solverio::{
    bench_collect, BenchCase, BenchOptions, Report, ReportCell, SolverConfig, SolverError,
    SolverSpec, Verdict,
};
use serde_json::{json, Value};
use thiserror::Error;

use crate::args::{
    BenchArgs, CheckArgs, Family, GenArgs, InputArgs, KconnKind, OracleArgs, OutputFormat,
    ReductionArgs, SmlArgs, SolverArgs, StrategyChoice, Suite, TranslateArgs,
};
use crate::{EXIT_ERROR, EXIT_FAILS, EXIT_HOLDS, EXIT_UNKNOWN};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Kripke { path: PathBuf, source: KripkeError },
    #[error("formula: {0}")]
    Formula(#[from] QctlError),
    #[error("sabotage formula: {0}")]
    Sml(#[from] SmlError),
    #[error("unknown state `{0}`")]
    State(String),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid value: {0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Reduce(ReduceError::Timeout)
            | CliError::Oracle(OracleError::Budget { .. })
            | CliError::Solver(SolverError::Qbf(qctl_core::qbf::QbfError::Timeout)) => EXIT_UNKNOWN,
            _ => EXIT_ERROR,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Formula text given inline or as a path to an existing file.
fn formula_text(arg: &str) -> Result<String, CliError> {
    let p = Path::new(arg);
    if p.is_file() {
        read(p)
    } else {
        Ok(arg.to_string())
    }
}

fn load_kripke(path: &Path) -> Result<Kripke, CliError> {
    parse_kri(&read(path)?).map_err(|source| CliError::Kripke {
        path: path.to_path_buf(),
        source,
    })
}

fn load_structure(input: &InputArgs) -> Result<(String, Kripke, StateId), CliError> {
    let k = load_kripke(&input.kripke)?;
    let x = match &input.state {
        Some(s) => k.state(s).ok_or_else(|| CliError::State(s.clone()))?,
        None => k.init(),
    };
    let name = input.instance.clone().unwrap_or_else(|| {
        input
            .kripke
            .file_stem()
            .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
    });
    Ok((name, k, x))
}

fn timeout(secs: f64) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(secs).map_err(|_| CliError::Usage(format!("timeout {secs}")))
}

fn solver_spec(args: &SolverArgs) -> Result<(SolverSpec, Option<usize>), CliError> {
    let cfg = load_config(args.config.as_deref())?;
    Ok((cfg.get(&args.solver)?, cfg.workers))
}

fn load_config(path: Option<&Path>) -> Result<SolverConfig, CliError> {
    let mut cfg = match path {
        Some(p) => SolverConfig::load(p)?,
        None => SolverConfig::default(),
    };
    cfg.apply_env(|k| std::env::var(k).ok());
    Ok(cfg)
}

fn record(c: &ReportCell) -> Value {
    json!({
        "instance": c.instance,
        "strategy": c.strategy,
        "verdict": c.verdict,
        "translate_s": c.translate_s,
        "solve_s": c.solve_s,
        "qbf_vars": c.qbf_vars,
        "qbf_gates": c.qbf_gates,
    })
}

/// Prints the cells of a one-case report and folds them into an exit code.
fn conclude(report: &Report, json_out: bool, all: bool) -> Result<u8, CliError> {
    for c in &report.cells {
        if let Some(d) = &c.diagnostic {
            eprintln!("{} with {}: {d}", c.strategy, c.solver);
        }
    }
    if json_out {
        let records: Vec<Value> = report.cells.iter().map(record).collect();
        let v = if all {
            Value::Array(records)
        } else {
            records.into_iter().next().unwrap_or(Value::Null)
        };
        println!("{v}");
    } else {
        for c in &report.cells {
            println!(
                "{}: {} ({:.3}s translate, {:.3}s solve, {} vars, {} gates)",
                c.strategy,
                c.verdict.as_str(),
                c.translate_s,
                c.solve_s,
                c.qbf_vars,
                c.qbf_gates
            );
        }
    }
    report.check()?;
    let verdicts: Vec<&Verdict> = report.cells.iter().map(|c| &c.verdict).collect();
    if let Some(b) = verdicts.iter().find_map(|v| v.as_bool()) {
        return Ok(if b { EXIT_HOLDS } else { EXIT_FAILS });
    }
    if verdicts
        .iter()
        .any(|v| matches!(v, Verdict::Timeout | Verdict::Unknown))
    {
        return Ok(EXIT_UNKNOWN);
    }
    if !all && verdicts.iter().any(|v| matches!(v, Verdict::NotApplicable)) {
        eprintln!("the strategy or solver cannot take this formula; quantifiers must be in Boolean context");
    }
    Ok(EXIT_ERROR)
}

#[allow(clippy::too_many_arguments)]
fn decide_case(
    case: BenchCase,
    strategy: StrategyChoice,
    reduction: Option<&ReductionArgs>,
    solver: &SolverArgs,
    json_out: bool,
) -> Result<u8, CliError> {
    let (spec, _) = solver_spec(solver)?;
    let opts = BenchOptions {
        workers: 1,
        timeout: Some(timeout(solver.timeout)?),
        uniq_encoding: reduction.map_or_else(Default::default, |r| r.uniq),
        fbv_bound: reduction.and_then(|r| r.fbv_bound),
        workdir: None,
    };
    let report = bench_collect(&[case], &strategy.strategies(), &[spec], &opts)?;
    conclude(&report, json_out, strategy == StrategyChoice::All)
}

pub fn check(a: CheckArgs) -> Result<u8, CliError> {
    let (name, k, x) = load_structure(&a.input)?;
    let formula = parse_qctl(&formula_text(&a.input.formula)?)?;
    let case = BenchCase {
        name,
        kripke: k.with_init(x),
        formula,
        expected: None,
    };
    decide_case(
        case,
        a.reduction.strategy,
        Some(&a.reduction),
        &a.solver,
        a.json,
    )
}

pub fn sml_check(a: SmlArgs) -> Result<u8, CliError> {
    let (name, k, x) = load_structure(&a.input)?;
    let f = parse_sml(&formula_text(&a.input.formula)?)?;
    let (expanded, formula) = sml_to_qctl(&k, &f)?;
    let case = BenchCase {
        name,
        kripke: expanded.with_init(x),
        formula,
        expected: None,
    };
    decide_case(case, a.strategy, None, &a.solver, a.json)
}

pub fn translate(a: TranslateArgs) -> Result<u8, CliError> {
    let (name, k, x) = load_structure(&a.input)?;
    let formula = parse_qctl(&formula_text(&a.input.formula)?)?;
    create_dir(&a.out)?;
    let limit = timeout(a.timeout)?;
    let mut records = Vec::new();
    for strategy in a.reduction.strategy.strategies() {
        let start = Instant::now();
        let cfg = ReductionConfig {
            strategy,
            uniq_encoding: a.reduction.uniq,
            fbv_bound: a.reduction.fbv_bound,
            max_gates: None,
            deadline: Some(start + limit),
            instance: name.clone(),
        };
        let c = match reduce(&k, x, &formula, &cfg) {
            Ok(c) => c,
            Err(ReduceError::Qctl(QctlError::NotPrenexable(msg)))
                if a.reduction.strategy == StrategyChoice::All =>
            {
                eprintln!("{strategy}: skipped, {msg}");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let translate_s = start.elapsed().as_secs_f64();
        let mut files = Vec::new();
        let formats: &[qctl_core::solverio::InputFormat] = match a.format {
            OutputFormat::Qcir => &[qctl_core::solverio::InputFormat::Qcir],
            OutputFormat::Smt => &[qctl_core::solverio::InputFormat::Smt],
            OutputFormat::Both => &[
                qctl_core::solverio::InputFormat::Qcir,
                qctl_core::solverio::InputFormat::Smt,
            ],
        };
        for f in formats {
            let path = a.out.join(format!("{name}__{strategy}.{}", f.extension()));
            let text = f.emit(&c).map_err(SolverError::from)?;
            write(&path, &text)?;
            files.push(path.display().to_string());
        }
        if !a.json {
            for f in &files {
                println!(
                    "{f} ({} vars, {} gates, prenex: {})",
                    c.num_vars(),
                    c.num_gates(),
                    c.is_prenex()
                );
            }
        }
        records.push(json!({
            "instance": name,
            "strategy": strategy,
            "translate_s": translate_s,
            "qbf_vars": c.num_vars(),
            "qbf_gates": c.num_gates(),
            "prenex": c.is_prenex(),
            "files": files,
        }));
    }
    if a.json {
        let v = if a.reduction.strategy == StrategyChoice::All {
            Value::Array(records)
        } else {
            records.into_iter().next().unwrap_or(Value::Null)
        };
        println!("{v}");
    }
    Ok(EXIT_HOLDS)
}

pub fn oracle(a: OracleArgs) -> Result<u8, CliError> {
    let (name, k, x) = load_structure(&a.input)?;
    let formula = parse_qctl(&formula_text(&a.input.formula)?)?;
    let start = Instant::now();
    let sat = mc_qctl(&k, &formula, &Environment::default())?;
    let elapsed = start.elapsed().as_secs_f64();
    let holds = sat.contains(x);
    let states: Vec<&str> = sat.iter().map(|s| k.name(s)).collect();
    if a.json {
        println!(
            "{}",
            json!({
                "instance": name,
                "state": k.name(x),
                "verdict": Verdict::from_bool(holds),
                "satisfying": states,
                "time_s": elapsed,
            })
        );
    } else {
        println!("{}: {}", k.name(x), Verdict::from_bool(holds).as_str());
        println!("satisfying states: {}", states.join(" "));
    }
    Ok(if holds { EXIT_HOLDS } else { EXIT_FAILS })
}

fn write_instance(
    dir: &Path,
    name: &str,
    k: &Kripke,
    f: &Formula,
    expected: &Value,
) -> Result<(), CliError> {
    write(&dir.join(format!("{name}.kri")), &serialize_kri(k))?;
    write(&dir.join(format!("{name}.qctl")), &format!("{f}\n"))?;
    write(
        &dir.join(format!("{name}.expected.json")),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(expected).unwrap_or_default()
        ),
    )?;
    println!("{}", dir.join(name).display());
    Ok(())
}

pub fn gen(a: GenArgs) -> Result<u8, CliError> {
    create_dir(&a.out)?;
    let inst: BenchInstance = match a.family {
        Family::Reset { n, k, m } => benchgen::gen_reset(n, k, m)?,
        Family::Kconn { n, m, k, formula } => {
            let which = match formula {
                KconnKind::Psi => KconnFormula::Cut,
                KconnKind::Phi => KconnFormula::Paths,
            };
            benchgen::gen_kconn(n, m, k, which)?
        }
        Family::Nim { heaps, player } => benchgen::gen_nim(&heaps, player)?,
        Family::Resources { n, m, k, d } => benchgen::gen_resources(n, m, k, d)?,
        Family::Corpus {
            seed,
            count,
            nested,
        } => {
            let params = CorpusParams {
                prenex: !nested,
                ..CorpusParams::default()
            };
            for c in corpus(seed, count, params) {
                let expected = match qctl_core::oracle::holds(&c.kripke, &c.formula) {
                    Ok(b) => {
                        json!({ "name": c.name, "params": { "family": "corpus", "seed": seed }, "expected": b, "provenance": "oracle" })
                    }
                    Err(_) => {
                        json!({ "name": c.name, "params": { "family": "corpus", "seed": seed }, "expected": null })
                    }
                };
                write_instance(&a.out, &c.name, &c.kripke, &c.formula, &expected)?;
            }
            return Ok(EXIT_HOLDS);
        }
    };
    write_instance(
        &a.out,
        &inst.name,
        &inst.kripke,
        &inst.formula,
        &inst.expected_json(),
    )?;
    Ok(EXIT_HOLDS)
}

/// Instances in a directory: every `<name>.kri` with a `<name>.qctl`,
/// expected verdicts from `<name>.expected.json` where present.
fn load_dir(dir: &Path) -> Result<Vec<BenchCase>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|source| CliError::Read {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut kri: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "kri"))
        .collect();
    kri.sort();
    let mut out = Vec::new();
    for path in kri {
        let qctl = path.with_extension("qctl");
        if !qctl.is_file() {
            continue;
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let expected_path = path.with_extension("expected.json");
        let expected = if expected_path.is_file() {
            let v: Value = serde_json::from_str(&read(&expected_path)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", expected_path.display())))?;
            v["expected"].as_bool()
        } else {
            None
        };
        out.push(BenchCase {
            name,
            kripke: load_kripke(&path)?,
            formula: parse_qctl(&read(&qctl)?)?,
            expected,
        });
    }
    Ok(out)
}

pub fn bench(a: BenchArgs) -> Result<u8, CliError> {
    let mut cases: Vec<BenchCase> = match a.suite {
        Suite::Desk => benchgen::desk_suite()?
            .into_iter()
            .map(BenchCase::from)
            .collect(),
        Suite::Published => benchgen::published_suite()?
            .into_iter()
            .map(BenchCase::from)
            .collect(),
        Suite::None => Vec::new(),
    };
    for d in &a.dirs {
        cases.extend(load_dir(d)?);
    }
    cases.extend(
        corpus(a.seed, a.corpus, CorpusParams::default())
            .into_iter()
            .map(BenchCase::from),
    );
    let mut strategies: Vec<Strategy> = Vec::new();
    for s in &a.strategy {
        let choice = crate::args::parse_strategy(s).map_err(CliError::Usage)?;
        for s in choice.strategies() {
            if !strategies.contains(&s) {
                strategies.push(s);
            }
        }
    }
    let cfg = load_config(a.config.as_deref())?;
    let specs = a
        .solvers
        .iter()
        .map(|s| cfg.get(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut opts = BenchOptions {
        timeout: Some(timeout(a.timeout)?),
        uniq_encoding: a.uniq,
        workdir: a.workdir.clone(),
        ..BenchOptions::default()
    };
    if let Some(w) = a.workers.or(cfg.workers) {
        opts.workers = w.max(1);
    }
    let report = bench_collect(&cases, &strategies, &specs, &opts)?;
    print!("{}", report.text());
    if let Some(path) = &a.csv {
        write(path, &report.csv()?)?;
    }
    match report.check() {
        Ok(()) => Ok(EXIT_HOLDS),
        Err(SolverError::Mismatch(lines)) => {
            for l in lines {
                eprintln!("mismatch: {l}");
            }
            Ok(EXIT_FAILS)
        }
        Err(e) => Err(e.into()),
    }
}
