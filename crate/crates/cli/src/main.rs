//! Command-line front end for the trace-calculus engine.
//!
//! Exit codes are a stable contract:
//! 0 ok, 1 violation, 2 contractivity failure, 3 parse error,
//! 4 malformed input, 5 equivalence failure.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use trace_calculus::analysis::{check_contractive, Contractivity};
use trace_calculus::data::{DataValue, EventValue};
use trace_calculus::dsl::{self, ParsedSpec, SpecSource};
use trace_calculus::events::render_event;
use trace_calculus::harness::{ground_alphabet, random_sweep, EquivalenceReport};
use trace_calculus::interp::{FeedVerdict, MonitorSession, SessionStatus};
use trace_calculus::semantics::enumerate;

const EXIT_OK: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_CONTRACTIVITY: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_INEQUIVALENT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "tracecalc",
    version,
    about = "Check, monitor, and explore trace-calculus specifications",
    after_help = "The entry point is the equation named \"Main\" if present, \
                  otherwise the first equation in the file."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Human-readable lines.
    Text,
    /// One JSON object per line.
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a specification and check that every equation is contractive.
    Check {
        /// Specification file.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Monitor a JSON-lines event stream against a specification.
    Monitor {
        /// Specification file.
        #[arg(long)]
        spec: PathBuf,
        /// Event stream: a path, or "-" for stdin.
        #[arg(long, default_value = "-")]
        events: String,
        /// Override the per-transition rule-application budget.
        #[arg(long)]
        fuel: Option<usize>,
        /// Warn about malformed lines instead of aborting.
        #[arg(long)]
        skip_bad_lines: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List every trace of the bounded semantics with its substitution.
    Enumerate {
        /// Specification file.
        #[arg(long)]
        spec: PathBuf,
        /// Maximum trace length to explore.
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        /// Comma-separated JSON values used to instantiate event parameters.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        pool: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Cross-check the interpreter against the compositional set operators
    /// on randomly generated contractive systems.
    Equiv {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of generated systems to check.
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Maximum trace length compared.
        #[arg(long, default_value_t = 5)]
        horizon: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Check { spec } => cmd_check(&spec),
        Cmd::Monitor {
            spec,
            events,
            fuel,
            skip_bad_lines,
            format,
        } => cmd_monitor(&spec, &events, fuel, skip_bad_lines, format),
        Cmd::Enumerate {
            spec,
            horizon,
            pool,
            format,
        } => cmd_enumerate(&spec, horizon, &pool, format),
        Cmd::Equiv {
            seed,
            count,
            horizon,
            format,
        } => cmd_equiv(seed, count, horizon, format),
    };
    ExitCode::from(code)
}

/// Loads and parses a spec file, printing located diagnostics on failure.
fn load_spec(path: &PathBuf) -> Result<ParsedSpec, u8> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_INPUT);
        }
    };
    let src = SpecSource::new(text, path.display().to_string());
    match dsl::parse(&src) {
        Ok(spec) => Ok(spec),
        Err(diags) => {
            for d in diags {
                eprintln!("{}:{d}", src.origin);
            }
            Err(EXIT_PARSE)
        }
    }
}

/// Checks contractivity of every equation, printing the first offending
/// cycle on failure.
fn require_contractive(spec: &ParsedSpec) -> Result<(), u8> {
    for name in spec.equation_order() {
        let id = spec.system.equation(name).expect("parsed equation");
        if let Contractivity::NotContractive { cycle } = check_contractive(&spec.system, id) {
            eprintln!(
                "error: equation {name:?} is not contractive: \
                 cycle through {}",
                cycle.join(" -> ")
            );
            return Err(EXIT_CONTRACTIVITY);
        }
    }
    Ok(())
}

fn cmd_check(path: &PathBuf) -> u8 {
    let spec = match load_spec(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Err(code) = require_contractive(&spec) {
        return code;
    }
    println!(
        "ok: {} equation(s), {} event type(s), entry {}",
        spec.equation_order().len(),
        spec.decls.len(),
        spec.main
    );
    EXIT_OK
}

fn cmd_monitor(
    path: &PathBuf,
    events: &str,
    fuel: Option<usize>,
    skip_bad_lines: bool,
    format: Format,
) -> u8 {
    let spec = match load_spec(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Err(code) = require_contractive(&spec) {
        return code;
    }
    let main = spec.system.equation(&spec.main).expect("entry equation");
    let mut session = match MonitorSession::new(&spec.system, main, spec.decls.clone()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONTRACTIVITY;
        }
    };
    session.set_fuel(fuel);

    let reader: Box<dyn BufRead> = if events == "-" {
        Box::new(io::BufReader::new(io::stdin()))
    } else {
        match fs::File::open(events) {
            Ok(f) => Box::new(io::BufReader::new(f)),
            Err(e) => {
                eprintln!("error: cannot read {events}: {e}");
                return EXIT_INPUT;
            }
        }
    };

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let emit = |out: &mut dyn Write, value: serde_json::Value, text: String| {
        let line = match format {
            Format::Json => value.to_string(),
            Format::Text => text,
        };
        let _ = writeln!(out, "{line}");
    };

    for line in reader.lines() {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: while reading events: {e}");
                return EXIT_INPUT;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let index = session.events_fed();
        let event = match EventValue::from_json_str(&line) {
            Ok(e) => e,
            Err(e) => {
                emit(
                    &mut out,
                    serde_json::json!({
                        "index": index,
                        "status": "error",
                        "message": e.to_string(),
                    }),
                    format!("event {index}: malformed input: {e}"),
                );
                if skip_bad_lines {
                    continue;
                }
                return EXIT_INPUT;
            }
        };
        match session.feed(&event) {
            Ok(FeedVerdict::Ok { accepting }) => {
                emit(
                    &mut out,
                    serde_json::json!({
                        "index": index,
                        "status": "ok",
                        "accepting": accepting,
                    }),
                    format!(
                        "event {index}: ok ({})",
                        if accepting { "accepting" } else { "incomplete" }
                    ),
                );
            }
            Ok(FeedVerdict::Violation) => {
                emit(
                    &mut out,
                    serde_json::json!({
                        "index": index,
                        "status": "violation",
                        "accepting": false,
                    }),
                    format!("event {index}: violation"),
                );
                emit(
                    &mut out,
                    serde_json::json!({"final": "violated", "at": index}),
                    format!("final: violated at event {index}"),
                );
                return EXIT_VIOLATION;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONTRACTIVITY;
            }
        }
    }

    match session.status() {
        SessionStatus::Accepting => {
            emit(
                &mut out,
                serde_json::json!({"final": "accepted"}),
                "final: accepted".to_string(),
            );
            EXIT_OK
        }
        SessionStatus::Incomplete => {
            emit(
                &mut out,
                serde_json::json!({"final": "incomplete"}),
                "final: incomplete".to_string(),
            );
            EXIT_OK
        }
        SessionStatus::Violated { .. } => unreachable!("violations exit above"),
    }
}

fn parse_pool(pool: &[String]) -> Result<Vec<DataValue>, u8> {
    if pool.is_empty() || pool.iter().all(|p| p.trim().is_empty()) {
        eprintln!("error: the value pool must be non-empty");
        return Err(EXIT_INPUT);
    }
    let mut out = Vec::new();
    for raw in pool {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        // Pool entries are JSON values; bare words are a convenience for
        // strings.
        match serde_json::from_str::<serde_json::Value>(raw) {
            Ok(v) => out.push(DataValue::from_json(&v)),
            Err(_) => out.push(DataValue::str(raw)),
        }
    }
    Ok(out)
}

fn cmd_enumerate(path: &PathBuf, horizon: usize, pool: &[String], format: Format) -> u8 {
    let spec = match load_spec(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Err(code) = require_contractive(&spec) {
        return code;
    }
    let pool = match parse_pool(pool) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let alphabet = ground_alphabet(&spec.decls, &pool);
    let main = spec.system.equation(&spec.main).expect("entry equation");
    let set = match enumerate(&spec.system, main, &spec.decls, &alphabet, horizon) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONTRACTIVITY;
        }
    };
    // BTreeSet iteration gives a canonical, run-independent order.
    for (trace, sigma) in set.items() {
        let rendered: Vec<String> = trace
            .iter()
            .map(|e| render_event(&spec.decls, e))
            .collect();
        match format {
            Format::Json => {
                let sigma_obj: serde_json::Map<String, serde_json::Value> = sigma
                    .iter()
                    .map(|(x, v)| (x.as_str().to_string(), v.to_json()))
                    .collect();
                println!(
                    "{}",
                    serde_json::json!({"trace": rendered, "substitution": sigma_obj})
                );
            }
            Format::Text => {
                let shown = if rendered.is_empty() {
                    "λ".to_string()
                } else {
                    rendered.join(" ")
                };
                if sigma.is_empty() {
                    println!("{shown}");
                } else {
                    println!("{shown}  {sigma}");
                }
            }
        }
    }
    EXIT_OK
}

fn print_report_text(report: &EquivalenceReport) {
    eprintln!("counterexample:");
    eprintln!("  left:  {}", report.left);
    eprintln!("  right: {}", report.right);
    for claim in &report.claims {
        if claim.equal {
            continue;
        }
        let Some(ce) = &claim.counterexample else {
            continue;
        };
        let trace = if ce.trace.is_empty() {
            "λ".to_string()
        } else {
            ce.trace.join(" ")
        };
        eprintln!(
            "  {:?}: trace {} with {} only in the {} set",
            claim.operator, trace, ce.substitution, ce.only_in
        );
    }
}

fn cmd_equiv(seed: u64, count: usize, horizon: usize, format: Format) -> u8 {
    let outcome = random_sweep(count, seed, horizon);
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string(&outcome).expect("report serializes")
        ),
        Format::Text => println!(
            "checked {} generated system pair(s) at horizon {horizon}: {}",
            outcome.pairs_checked,
            if outcome.all_equal() {
                "all compositional claims hold"
            } else {
                "INEQUALITY FOUND"
            }
        ),
    }
    if outcome.all_equal() {
        EXIT_OK
    } else {
        // An inequality here means a bug in this implementation, not a
        // refutation of the underlying equivalence result.
        eprintln!(
            "note: an inequality indicates a bug in this tool, not in the \
             underlying theory"
        );
        if let Some(first) = outcome.failures.first() {
            print_report_text(first);
        }
        EXIT_INEQUIVALENT
    }
}
