//! The `aimc` command-line front end.
//!
//! Exit codes: 0 yes / accept / sat, 1 no / reject / unsat, 2 error,
//! 3 unknown.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::approx::{approx_decide, ApproxDecision, ApproxOptions, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::etr::{build_formula, emit_smtlib, solve_external, EncodingMode, SolverOutcome};
use crate::exact::reach_prob;
use crate::gadgets::{encode_3sat, encode_polynomial, encode_sqrtsum, parse_dimacs, parse_poly_file, SqrtSumOptions};
use crate::graph::structure_status;
use crate::model::{parse_document, to_json, to_json_value, validate, AimcModel, Interval, MarkovChain, Query, Relation};
use crate::oracle::{brute_force_opt, OracleMode, OracleOptions, DEFAULT_DENOMINATOR, DEFAULT_SEED};
use crate::qualitative::qual_decide;
use crate::rational::{self, Rational};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

#[derive(Parser)]
#[command(name = "aimc", version, about = "Reachability analysis for augmented interval Markov chains")]
struct Cli {
    /// Print a machine-readable report instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock timing in the JSON report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct QueryArgs {
    /// Source vertex (defaults to the model's query).
    #[arg(long = "from")]
    source: Option<String>,
    /// Target vertex (defaults to the model's query).
    #[arg(long = "to")]
    target: Option<String>,
    #[arg(long, value_parser = ["le", "ge"])]
    relation: Option<String>,
    /// Exact rational threshold, e.g. 1/2.
    #[arg(long)]
    threshold: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fixed,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleModeArg {
    Grid,
    Sample,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model for malformed intervals, constraints and rows.
    Validate { model: PathBuf },
    /// Classify the structure as known, epsilon-known or uncertain.
    Structure { model: PathBuf },
    /// Exact reachability probability in a fully determined model.
    Reach {
        model: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Decide a qualitative query (threshold 0 or 1).
    Qual {
        model: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        /// Write the witness refinement here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Decide the promise problem on an epsilon-known model by grid search.
    Approx {
        model: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        /// Promise gap, an exact rational.
        #[arg(long)]
        eps: Option<String>,
        /// Maximal grid size (also AIMC_BUDGET).
        #[arg(long)]
        budget: Option<u128>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Encode the query as an existential sentence over the reals.
    Etr {
        model: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value = "fixed")]
        mode: ModeArg,
        /// Write the SMT-LIB script here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Solver command containing {file} (also AIMC_SOLVER).
        #[arg(long)]
        solver: Option<String>,
        /// Solver timeout in seconds.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
    },
    /// Generate reduction instances.
    #[command(subcommand)]
    Gadget(GadgetCommand),
    /// Optimize the reachability probability by exhaustive grid or sampling.
    Oracle {
        model: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value = "grid")]
        mode: OracleModeArg,
        #[arg(long, default_value_t = 64)]
        resolution: u64,
        #[arg(long, default_value_t = 100_000)]
        count: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DENOMINATOR)]
        denominator: u64,
        #[arg(long)]
        budget: Option<u128>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Subcommand)]
enum GadgetCommand {
    /// 3-CNF satisfiability as qualitative reachability.
    Sat {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Square-root sum comparison as quantitative reachability.
    Sqrtsum {
        /// Comma-separated positive integers.
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<u64>,
        #[arg(long)]
        k: u64,
        #[arg(long = "M")]
        big_m: Option<u64>,
        #[arg(long = "N")]
        big_n: Option<u64>,
        /// Lower end of the x interval (exact rational).
        #[arg(long)]
        x_lo: Option<String>,
        /// Upper end of the x interval (exact rational).
        #[arg(long)]
        x_hi: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Polynomial optimization over a box as quantitative reachability.
    Poly {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        tau: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// What a command produced: a result object, counters, the exit code, and
/// the human-readable summary.
struct Outcome {
    result: Value,
    counters: Map<String, Value>,
    code: i32,
    summary: String,
    hash: Option<String>,
}

impl Outcome {
    fn new(result: Value, code: i32, summary: String) -> Self {
        Outcome {
            result,
            counters: Map::new(),
            code,
            summary,
            hash: None,
        }
    }

    fn counter(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.counters.insert(name.to_string(), value.into());
        self
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct Loaded {
    model: AimcModel,
    query: Option<Query>,
    hash: String,
}

fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read(path)?;
    let (model, query) = parse_document(&String::from_utf8_lossy(&text))?;
    Ok(Loaded {
        model,
        query,
        hash: sha256_hex(&text),
    })
}

fn parse_rational(text: &str) -> Result<Rational> {
    rational::parse(text)
}

/// Flags override the model's own query field by field.
fn resolve_query(
    args: &QueryArgs,
    doc: Option<&Query>,
    default_relation: Option<Relation>,
    eps: Option<&str>,
) -> Result<Query> {
    let missing = |what: &str| Error::Query(format!("no {what} given and the model has no query"));
    let source = args
        .source
        .clone()
        .or_else(|| doc.map(|q| q.source.clone()))
        .ok_or_else(|| missing("--from"))?;
    let target = args
        .target
        .clone()
        .or_else(|| doc.map(|q| q.target.clone()))
        .ok_or_else(|| missing("--to"))?;
    let relation = match &args.relation {
        Some(r) => r.parse()?,
        None => doc
            .map(|q| q.relation)
            .or(default_relation)
            .ok_or_else(|| missing("--relation"))?,
    };
    let threshold = match &args.threshold {
        Some(t) => parse_rational(t)?,
        None => doc.map(|q| q.threshold.clone()).unwrap_or_else(rational::zero),
    };
    let gap = match eps {
        Some(e) => Some(parse_rational(e)?),
        None => doc.and_then(|q| q.promise_gap.clone()),
    };
    Query::new(source, target, relation, threshold, gap)
}

fn query_json(q: &Query) -> Value {
    let mut v = json!({
        "source": q.source,
        "target": q.target,
        "relation": q.relation.as_str(),
        "threshold": rational::format(&q.threshold),
    });
    if let Some(g) = &q.promise_gap {
        v["epsilon"] = json!(rational::format(g));
    }
    v
}

fn chain_json(mc: &MarkovChain) -> Value {
    let entries: Vec<Value> = mc
        .entries()
        .map(|(e, p)| {
            json!({
                "from": mc.vertices()[e.from],
                "to": mc.vertices()[e.to],
                "p": rational::format(p),
            })
        })
        .collect();
    Value::Array(entries)
}

fn budget_from(flag: Option<u128>) -> Result<u128> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("AIMC_BUDGET") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("AIMC_BUDGET must be an integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Validate { model } => {
            let l = load(model)?;
            let diags = validate(&l.model);
            let summary = if diags.is_empty() {
                "valid".to_string()
            } else {
                diags.iter().map(|d| d.message.clone()).collect::<Vec<_>>().join("\n")
            };
            let code = if diags.is_empty() { EXIT_YES } else { EXIT_NO };
            let mut out = Outcome::new(json!({ "diagnostics": diags }), code, summary);
            out.hash = Some(l.hash);
            Ok(out)
        }
        Command::Structure { model } => {
            let l = load(model)?;
            let status = structure_status(&l.model);
            let mut result = json!({ "kind": status.kind.as_str() });
            if let Some(e) = &status.epsilon_struct {
                result["epsilon"] = json!(rational::format(e));
            }
            if let Some(opt) = &status.optional_edges {
                let edges: Vec<Value> = opt
                    .iter()
                    .map(|e| {
                        let (a, b) = l.model.edge_names(*e);
                        json!([a, b])
                    })
                    .collect();
                result["optional_edges"] = Value::Array(edges);
            }
            let summary = serde_json::to_string_pretty(&result).expect("json");
            let mut out = Outcome::new(result, EXIT_YES, summary);
            out.hash = Some(l.hash);
            Ok(out)
        }
        Command::Reach { model, query } => {
            let l = load(model)?;
            let q = resolve_query(query, l.query.as_ref(), Some(Relation::Ge), None)?;
            let mc = l.model.determined_chain()?;
            let p = reach_prob(&mc, &q.source, &q.target)?;
            let decimal = format!("{:.12}", rational::to_f64(&p));
            let summary = format!("P({} -> {}) = {} ~ {}", q.source, q.target, rational::format(&p), decimal);
            let result = json!({
                "source": q.source,
                "target": q.target,
                "probability": rational::format(&p),
                "decimal": decimal,
            });
            let mut out = Outcome::new(result, EXIT_YES, summary);
            out.hash = Some(l.hash);
            Ok(out)
        }
        Command::Qual { model, query, witness } => {
            let l = load(model)?;
            let q = resolve_query(query, l.query.as_ref(), None, None)?;
            let ans = qual_decide(&l.model, &q)?;
            if let (Some(path), Some(mc)) = (witness, &ans.witness_chain) {
                write_file(path, &to_json(&mc.to_model(), Some(&q)))?;
            }
            let mut result = json!({ "query": query_json(&q), "decision": ans.decision });
            if let Some(mc) = &ans.witness_chain {
                result["witness"] = chain_json(mc);
            }
            let summary = format!(
                "{} ({} structures checked)",
                if ans.decision { "yes" } else { "no" },
                ans.structures_checked
            );
            let code = if ans.decision { EXIT_YES } else { EXIT_NO };
            let mut out = Outcome::new(result, code, summary).counter("structures_checked", ans.structures_checked);
            out.hash = Some(l.hash);
            Ok(out)
        }
        Command::Approx {
            model,
            query,
            eps,
            budget,
            jobs,
        } => {
            let l = load(model)?;
            let q = resolve_query(query, l.query.as_ref(), None, eps.as_deref())?;
            let opts = ApproxOptions {
                budget: budget_from(*budget)?,
                jobs: *jobs,
            };
            let ans = approx_decide(&l.model, &q, opts)?;
            let mut result = json!({
                "query": query_json(&q),
                "decision": ans.decision.as_str(),
                "spacing": rational::format(&ans.spacing),
                "grid_cardinality": ans.grid_cardinality.to_string(),
                "grid_chains_visited": ans.grid_chains_visited,
            });
            if let Some(p) = &ans.witness_prob {
                result["witness_prob"] = json!(rational::format(p));
            }
            if let Some(mc) = &ans.witness {
                result["witness"] = chain_json(mc);
            }
            let summary = serde_json::to_string_pretty(&result).expect("json");
            let code = match ans.decision {
                ApproxDecision::Accept => EXIT_YES,
                ApproxDecision::Reject => EXIT_NO,
            };
            let mut out = Outcome::new(result, code, summary)
                .counter("grid_chains_visited", ans.grid_chains_visited)
                .counter("grid_cardinality", ans.grid_cardinality.to_string());
            out.hash = Some(l.hash);
            Ok(out)
        }
        Command::Etr {
            model,
            query,
            mode,
            out,
            solver,
            timeout,
        } => {
            let l = load(model)?;
            let q = resolve_query(query, l.query.as_ref(), None, None)?;
            let mode = match mode {
                ModeArg::Fixed => EncodingMode::Fixed,
                ModeArg::Full => EncodingMode::Full,
            };
            let enc = build_formula(&l.model, &q, mode)?;
            let script = emit_smtlib(&enc.formula);
            if let Some(path) = out {
                write_file(path, &script)?;
            }
            let solver = solver.clone().or_else(|| std::env::var("AIMC_SOLVER").ok());
            let mut result = json!({
                "query": query_json(&q),
                "mode": mode.as_str(),
                "variables": enc.variable_count(),
                "atoms": enc.formula.body.atoms().len(),
            });
            let outcome = match &solver {
                None => {
                    if out.is_none() {
                        result["smtlib"] = json!(script);
                    }
                    result["status"] = json!("unknown");
                    result["reason"] = json!("no solver configured");
                    let summary = if out.is_none() {
                        script.trim_end().to_string()
                    } else {
                        "script written; no solver configured".to_string()
                    };
                    Outcome::new(result, EXIT_UNKNOWN, summary)
                }
                Some(template) => match solve_external(&enc.formula, template, Duration::from_secs(*timeout))? {
                    SolverOutcome::Sat { assignment, verified } => {
                        result["status"] = json!("sat");
                        result["verified"] = json!(verified);
                        let values: Map<String, Value> = assignment
                            .iter()
                            .map(|(k, v)| (k.clone(), json!(rational::format(v))))
                            .collect();
                        result["assignment"] = Value::Object(values);
                        let note = if verified { "verified" } else { "not verified exactly" };
                        Outcome::new(result, EXIT_YES, format!("sat ({note})"))
                    }
                    SolverOutcome::Unsat => {
                        result["status"] = json!("unsat");
                        Outcome::new(result, EXIT_NO, "unsat".into())
                    }
                    SolverOutcome::Unknown(reason) => {
                        result["status"] = json!("unknown");
                        result["reason"] = json!(reason.clone());
                        Outcome::new(result, EXIT_UNKNOWN, format!("unknown: {reason}"))
                    }
                },
            };
            let atoms = enc.formula.body.atoms().len();
            let mut outcome = outcome
                .counter("variables", enc.variable_count())
                .counter("atoms", atoms);
            outcome.hash = Some(l.hash);
            Ok(outcome)
        }
        Command::Gadget(g) => run_gadget(g),
        Command::Oracle {
            model,
            query,
            mode,
            resolution,
            count,
            seed,
            denominator,
            budget,
            jobs,
        } => {
            let l = load(model)?;
            let q = resolve_query(query, l.query.as_ref(), Some(Relation::Ge), None)?;
            let mode = match mode {
                OracleModeArg::Grid => OracleMode::Grid {
                    resolution: *resolution,
                },
                OracleModeArg::Sample => OracleMode::Sample {
                    count: *count,
                    seed: *seed,
                    denominator: *denominator,
                },
            };
            let opts = OracleOptions {
                budget: budget_from(*budget)?,
                jobs: *jobs,
            };
            let r = brute_force_opt(&l.model, &q, mode, opts)?;
            let mode_json = match &r.mode {
                OracleMode::Grid { resolution } => json!({ "kind": "grid", "resolution": resolution }),
                OracleMode::Sample {
                    count,
                    seed,
                    denominator,
                } => json!({ "kind": "sample", "count": count, "seed": seed, "denominator": denominator }),
            };
            let result = json!({
                "source": q.source,
                "target": q.target,
                "objective": if q.relation == Relation::Ge { "max" } else { "min" },
                "best_prob": rational::format(&r.best_prob),
                "best_chain": chain_json(&r.best_chain),
                "evaluations": r.evaluations,
                "mode": mode_json,
            });
            let summary = serde_json::to_string_pretty(&result).expect("json");
            let mut out = Outcome::new(result, EXIT_YES, summary).counter("evaluations", r.evaluations);
            out.hash = Some(l.hash);
            Ok(out)
        }
    }
}

fn emit_model(model: &AimcModel, query: &Query, out: &Option<PathBuf>, extra: Value) -> Result<Outcome> {
    let text = to_json(model, Some(query));
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    let mut result = json!({
        "vertices": model.len(),
        "transitions": model.transitions().count(),
        "constraints": model.constraints().len(),
        "query": query_json(query),
        "parameters": extra,
    });
    if out.is_none() {
        result["model"] = to_json_value(model, Some(query));
    }
    let summary = match out {
        Some(path) => format!(
            "wrote {} vertices, {} transitions to {}",
            model.len(),
            model.transitions().count(),
            path.display()
        ),
        None => text.clone(),
    };
    let mut outcome = Outcome::new(result, EXIT_YES, summary);
    outcome.hash = Some(sha256_hex(text.as_bytes()));
    Ok(outcome)
}

fn run_gadget(g: &GadgetCommand) -> Result<Outcome> {
    match g {
        GadgetCommand::Sat { cnf, out } => {
            let text = std::fs::read_to_string(cnf)?;
            let cnf = parse_dimacs(&text)?;
            let (model, query) = encode_3sat(&cnf)?;
            let extra = json!({ "variables": cnf.num_vars, "clauses": cnf.clauses.len() });
            emit_model(&model, &query, out, extra)
        }
        GadgetCommand::Sqrtsum {
            r,
            k,
            big_m,
            big_n,
            x_lo,
            x_hi,
            out,
        } => {
            let x_interval = match (x_lo, x_hi) {
                (None, None) => None,
                (Some(lo), Some(hi)) => Some(Interval::closed(parse_rational(lo)?, parse_rational(hi)?)?),
                _ => return Err(Error::GadgetParams("--x-lo and --x-hi go together".into())),
            };
            let opts = SqrtSumOptions {
                m: *big_m,
                n: *big_n,
                x_interval,
            };
            let (model, query, p) = encode_sqrtsum(r, *k, &opts)?;
            let extra = json!({
                "r": p.r_list,
                "k": p.k,
                "M": p.m,
                "N": p.n,
                "alpha": rational::format(&p.alpha),
                "beta": p.beta_list.iter().map(rational::format).collect::<Vec<_>>(),
                "x_interval": p.x_interval.to_string(),
                "threshold": rational::format(&p.threshold),
            });
            emit_model(&model, &query, out, extra)
        }
        GadgetCommand::Poly { poly, tau, out } => {
            let text = std::fs::read_to_string(poly)?;
            let problem = parse_poly_file(&text)?;
            let tau = parse_rational(tau)?;
            let (model, query, pm) = encode_polynomial(&problem.polynomial, &problem.intervals, &tau)?;
            let extra = json!({
                "offset": rational::format(&pm.encoding.offset),
                "scale": rational::format(&pm.encoding.scale),
                "terms": pm.encoding.terms.len(),
            });
            emit_model(&model, &query, out, extra)
        }
    }
}

/// Drops flags that must not change the report (parallelism, timing).
fn echo(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--jobs" {
            skip = true;
            continue;
        }
        if a.starts_with("--jobs=") || a == "--timing" {
            continue;
        }
        out.push(a.clone());
    }
    out
}

/// Parses `args` (including the program name), runs the command, writes
/// to `stdout`/`stderr`, and returns the exit code.
pub fn dispatch<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_YES };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let started = Instant::now();
    let outcome = run(&cli.command);
    let strings: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match outcome {
        Ok(o) => {
            if cli.json {
                let mut report = json!({
                    "command": echo(&strings),
                    "model_sha256": o.hash,
                    "result": o.result,
                    "counters": Value::Object(o.counters),
                    "exit_code": o.code,
                });
                if cli.timing {
                    report["timing"] = json!({ "elapsed_ms": started.elapsed().as_secs_f64() * 1000.0 });
                }
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("json"));
            } else {
                let _ = writeln!(stdout, "{}", o.summary);
            }
            o.code
        }
        Err(e) => {
            if cli.json {
                let report = json!({
                    "command": echo(&strings),
                    "error": e.to_string(),
                    "exit_code": EXIT_ERROR,
                });
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("json"));
            }
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}
