//! `pispan`: span analysis for pi-calculus processes.
//!
//! Exit codes: 0 for pass/Proven/Reliable, 1 for fail/Refuted/Unreliable
//! (and for input errors), 2 for Unknown or inexact exploration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pispan::deriv::{check_script, parse_script};
use pispan::harness::{default_valuations, run_soundness};
use pispan::index::{parse_valuation, EntailsConfig, Verdict};
use pispan::process::parse_process;
use pispan::registry::Registry;
use pispan::semantics::global_span;
use pispan::types::TypeConfig;
use pispan::usage::{parse_usage, reliable, subusage, Reliability, SubusageConfig, UsageConfig};

#[derive(Parser)]
#[command(
    name = "pispan",
    version,
    about = "Parallel complexity analysis for pi-calculus processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Maximum number of explored states.
    #[arg(long, default_value_t = 100_000)]
    fuel: usize,
    /// Replication unfolding budget for usage exploration.
    #[arg(long, default_value_t = 2)]
    unfold: u32,
    /// Maximum subusage chain length.
    #[arg(long, default_value_t = 8)]
    depth: u32,
    /// Counterexample search bound for index entailment.
    #[arg(long, default_value_t = 8)]
    index_bound: u64,
    /// Emit a JSON report.
    #[arg(long)]
    json: bool,
}

impl CommonFlags {
    fn type_config(&self) -> TypeConfig {
        let entails = EntailsConfig {
            bound: self.index_bound,
        };
        TypeConfig {
            entails,
            usage: UsageConfig {
                unfold: self.unfold,
                fuel: self.fuel,
                entails,
            },
            subusage: SubusageConfig {
                depth: self.depth,
                nodes: self.fuel,
                entails,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the global parallel complexity of a process by exhaustive
    /// exploration.
    Span {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Decide reliability of a usage.
    Usage {
        file: PathBuf,
        /// Index variables in scope, e.g. `i,j`.
        #[arg(long, default_value = "")]
        vars: String,
        /// Constraints on the variables, repeatable, e.g. `i >= 1`.
        #[arg(long = "constraint")]
        constraints: Vec<String>,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Search for a subusage derivation between two usages.
    Subusage {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value = "")]
        vars: String,
        #[arg(long = "constraint")]
        constraints: Vec<String>,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Check a typing derivation script against a process.
    Typecheck {
        process: PathBuf,
        script: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Check a script and validate its bound against the span oracle.
    Soundness {
        process: PathBuf,
        script: PathBuf,
        /// Valuation of the index variables, e.g. `i=2`; repeatable.
        /// Defaults to all variables ranging over 0..=3.
        #[arg(long = "val")]
        valuations: Vec<String>,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_vars(src: &str) -> pispan::index::VarSet {
    src.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn parse_constraints(items: &[String]) -> Result<pispan::index::ConstraintSet, String> {
    items
        .iter()
        .map(|s| pispan::index::parse_constraint(s).map_err(|e| e.to_string()))
        .collect()
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    let registry = Registry::standard();
    match cli.command {
        Command::Span { file, flags } => {
            let p = parse_process(&read(&file)?, &registry).map_err(|e| e.to_string())?;
            let r = global_span(&p, flags.fuel, &registry);
            if flags.json {
                println!(
                    "{}",
                    json!({
                        "schema": 1,
                        "span": r.span,
                        "exact": r.exact,
                        "states_explored": r.states_explored,
                    })
                );
            } else if r.exact {
                println!("span {} (exact, {} states)", r.span, r.states_explored);
            } else {
                println!(
                    "span >= {} (fuel exhausted after {} states)",
                    r.span, r.states_explored
                );
            }
            Ok(if r.exact {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Usage {
            file,
            vars,
            constraints,
            flags,
        } => {
            let u = parse_usage(&read(&file)?).map_err(|e| e.to_string())?;
            let phi = parse_vars(&vars);
            let cs = parse_constraints(&constraints)?;
            let cfg = flags.type_config();
            let verdict = reliable(&phi, &cs, &u, &cfg.usage);
            let (label, code) = match &verdict {
                Reliability::Reliable => ("reliable", ExitCode::SUCCESS),
                Reliability::Unreliable { .. } => ("unreliable", ExitCode::from(1)),
                Reliability::Unknown { .. } => ("unknown", ExitCode::from(2)),
            };
            if flags.json {
                let trace = match &verdict {
                    Reliability::Unreliable { trace } => {
                        Some(trace.iter().map(|u| u.to_string()).collect::<Vec<_>>())
                    }
                    _ => None,
                };
                let reason = match &verdict {
                    Reliability::Unknown { reason } => Some(reason.clone()),
                    _ => None,
                };
                println!(
                    "{}",
                    json!({"schema": 1, "verdict": label, "trace": trace, "reason": reason})
                );
            } else {
                match &verdict {
                    Reliability::Reliable => println!("reliable"),
                    Reliability::Unreliable { trace } => {
                        println!("unreliable; error reachable via:");
                        for step in trace {
                            println!("  {step}");
                        }
                    }
                    Reliability::Unknown { reason } => println!("unknown: {reason}"),
                }
            }
            Ok(code)
        }
        Command::Subusage {
            left,
            right,
            vars,
            constraints,
            flags,
        } => {
            let u = parse_usage(&read(&left)?).map_err(|e| e.to_string())?;
            let v = parse_usage(&read(&right)?).map_err(|e| e.to_string())?;
            let phi = parse_vars(&vars);
            let cs = parse_constraints(&constraints)?;
            let cfg = flags.type_config();
            let verdict = subusage(&phi, &cs, &u, &v, &cfg.subusage);
            let (label, code) = match verdict {
                Verdict::Proven => ("proven", ExitCode::SUCCESS),
                Verdict::Refuted(_) => ("refuted", ExitCode::from(1)),
                Verdict::Unknown => ("unknown", ExitCode::from(2)),
            };
            if flags.json {
                println!("{}", json!({"schema": 1, "verdict": label}));
            } else {
                println!("{label}");
            }
            Ok(code)
        }
        Command::Typecheck {
            process,
            script,
            flags,
        } => {
            let p = parse_process(&read(&process)?, &registry).map_err(|e| e.to_string())?;
            let s = parse_script(&read(&script)?).map_err(|e| e.to_string())?;
            let cfg = flags.type_config();
            match check_script(&s, &p, &registry, &cfg) {
                Ok(checked) => {
                    if flags.json {
                        println!(
                            "{}",
                            json!({"schema": 1, "accepted": true, "complexity": checked.complexity.to_string()})
                        );
                    } else {
                        println!("accepted with complexity {}", checked.complexity);
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    let unknown = matches!(e, pispan::deriv::CheckError::SideConditionUnknown(_));
                    if flags.json {
                        println!(
                            "{}",
                            json!({"schema": 1, "accepted": false, "error": e.to_string()})
                        );
                    } else {
                        println!("rejected: {e}");
                    }
                    Ok(if unknown {
                        ExitCode::from(2)
                    } else {
                        ExitCode::from(1)
                    })
                }
            }
        }
        Command::Soundness {
            process,
            script,
            valuations,
            flags,
        } => {
            let p = parse_process(&read(&process)?, &registry).map_err(|e| e.to_string())?;
            let s = parse_script(&read(&script)?).map_err(|e| e.to_string())?;
            let cfg = flags.type_config();
            let vals = if valuations.is_empty() {
                default_valuations(&s.vars)
            } else {
                valuations
                    .iter()
                    .map(|v| parse_valuation(v).map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let report = run_soundness(&p, &s, &registry, &vals, flags.fuel, &cfg)
                .map_err(|e| e.to_string())?;
            if flags.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
                );
            } else {
                println!("typed complexity {}", report.complexity);
                for row in &report.rows {
                    let vs = row
                        .valuation
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .collect::<Vec<_>>()
                        .join(",");
                    let vs = if vs.is_empty() { "-".to_string() } else { vs };
                    let lower = if row.lower_checked {
                        format!(
                            ", lower {} <= {} {}",
                            row.bound_lo,
                            row.span,
                            if row.lower_ok { "ok" } else { "FAIL" }
                        )
                    } else {
                        String::new()
                    };
                    println!(
                        "  [{vs}] span {}{}, upper {} <= {} {}{lower}",
                        row.span,
                        if row.exact { "" } else { " (inexact)" },
                        row.span,
                        row.bound_hi,
                        if row.upper_ok { "ok" } else { "FAIL" },
                    );
                }
                println!("{}", if report.pass { "pass" } else { "FAIL" });
            }
            Ok(if report.pass && !report.advisory {
                ExitCode::SUCCESS
            } else if report.pass {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
