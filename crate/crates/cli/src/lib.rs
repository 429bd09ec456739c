//! Command-line front end: input parsing, command dispatch and JSON reports.

pub mod input;

use std::ffi::OsString;
use std::io::Write;

use chiralis::axioms::{random_suite, SuiteReport};
use chiralis::battery::{
    brylinski_battery, conventions, reproduce_extended_example, reproduce_symplectic,
    SCHEMA_VERSION,
};
use chiralis::chiral::check_vertex_g_axioms;
use chiralis::exec::Execution;
use chiralis::parse::parse_state;
use chiralis::poisson::PoissonStructure;
use chiralis::slices::{
    class_check, degrees_present, homology_batch, s1_conjugation_check, s1_slices, ClassStatus,
    ComplexKind, ComplexSpec, SliceSpec,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub use input::{parse_input, Input, InputError};

pub const DEFAULT_SEED: u64 = 7;

#[derive(Parser, Debug)]
#[command(
    name = "chiralis",
    version,
    about = "Chiral Poisson homology calculator"
)]
struct Cli {
    /// Run every batch on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Case {
    ExtendedExample,
    Symplectic,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Vertex algebra and vertex G-algebra identities on seeded random states.
    CheckAxioms {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        weight_max: i64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Homology of a complex on one weight and charge.
    Homology {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long)]
        complex: String,
        #[arg(long)]
        weight: i64,
        /// Comma-separated charge, e.g. `0,0`.
        #[arg(long, allow_hyphen_values = true)]
        charge: Option<String>,
        /// Torus weight of a truncated slice (needs `weights` in the input).
        #[arg(long, allow_hyphen_values = true)]
        torus_weight: Option<i64>,
        #[arg(long, default_value_t = 4)]
        max_x0_degree: u32,
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<i64>,
    },
    /// Decide whether a state is closed, exact or a nontrivial class.
    Class {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long)]
        complex: String,
        #[arg(long)]
        state: String,
    },
    /// Conjugation of the chiral de Rham differential by exp(iota/u).
    S1Check {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long, default_value_t = 2)]
        weight_max: i64,
        #[arg(long, default_value_t = 2)]
        charge_bound: i64,
    },
    /// Symplectic identities and homology sweep for the standard plane.
    Brylinski {
        #[arg(long, default_value_t = 2)]
        weight_max: i64,
        #[arg(long, default_value_t = 4)]
        charge_bound: i64,
    },
    /// Reproduce a worked example.
    Reproduce {
        #[arg(long, value_enum)]
        case: Case,
    },
}

/// A finished command: report, pass flag and first failing identity.
struct Outcome {
    report: Value,
    failure: Option<String>,
}

enum Failure {
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn envelope(command: &str, passed: bool, result: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "conventions": conventions(),
        "passed": passed,
        "result": result,
    })
}

fn load(path: &std::path::Path) -> Result<Input, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_input(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn complex(name: &str, p: &PoissonStructure) -> Result<ComplexSpec, Failure> {
    let kind = ComplexKind::parse(name).ok_or_else(|| {
        let names: Vec<_> = ComplexKind::ALL.iter().map(|k| k.name()).collect();
        Failure::Input(format!(
            "unknown complex {name:?}; expected one of {}",
            names.join(", ")
        ))
    })?;
    Ok(ComplexSpec::new(kind, p))
}

fn parse_charge(text: &str, dim: usize) -> Result<Vec<i64>, Failure> {
    let c: Vec<i64> = text
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Input(format!("charge {text:?}: {e}")))?;
    if c.len() != dim {
        return Err(Failure::Input(format!(
            "charge {text:?} has {} entries, dim is {dim}",
            c.len()
        )));
    }
    Ok(c)
}

fn with_cap(s: SliceSpec, cap: Option<usize>) -> SliceSpec {
    match cap {
        Some(c) if std::env::var(chiralis::slices::BASIS_CAP_ENV).is_err() => s.with_cap(c),
        _ => s,
    }
}

fn suite_failure(r: &SuiteReport) -> Option<String> {
    r.first_failure.as_ref().map(|f| {
        format!(
            "{} on ({}): residual {}",
            f.identity,
            f.states.join(", "),
            f.residual
        )
    })
}

fn dispatch(command: Command, exec: Execution) -> Result<Outcome, Failure> {
    match command {
        Command::CheckAxioms {
            dim,
            weight_max,
            samples,
            seed,
        } => {
            if dim == 0 {
                return Err(Failure::Input("dim must be positive".into()));
            }
            let axioms = random_suite(dim, weight_max, samples, seed, exec)?;
            let vertex_g = check_vertex_g_axioms(dim, weight_max, samples, seed, exec)?;
            let failure = suite_failure(&axioms).or_else(|| {
                vertex_g.first_failure.as_ref().map(|f| {
                    format!(
                        "{} on ({}, {}, {}) i={} j={}: residual {}",
                        f.identity, f.v, f.w, f.u, f.i, f.j, f.residual
                    )
                })
            });
            let report = envelope(
                "check-axioms",
                failure.is_none(),
                json!({ "dim": dim, "weight_max": weight_max, "samples": samples, "seed": seed,
                        "vertex_algebra": axioms, "vertex_g_algebra": vertex_g }),
            );
            Ok(Outcome { report, failure })
        }
        Command::Homology {
            input,
            complex: name,
            weight,
            charge,
            torus_weight,
            max_x0_degree,
            degree,
        } => {
            let inp = load(&input)?;
            let p = &inp.poisson;
            let c = complex(&name, p)?;
            let sheaf = c.sheaf();
            let slices: Vec<SliceSpec> = match (charge, torus_weight) {
                (Some(text), None) => {
                    let ch = parse_charge(&text, p.dim)?;
                    let degrees = match degree {
                        Some(d) => vec![d],
                        None => degrees_present(sheaf, p.dim, weight, &ch),
                    };
                    degrees
                        .into_iter()
                        .map(|d| SliceSpec::new(sheaf, p.dim, weight, ch.clone(), d))
                        .collect()
                }
                (None, Some(t)) => {
                    let torus = p.torus_weights.clone().ok_or_else(|| {
                        Failure::Input("--torus-weight needs `weights` in the input".into())
                    })?;
                    let d = degree
                        .ok_or_else(|| Failure::Input("--torus-weight needs --degree".into()))?;
                    vec![SliceSpec::truncated(
                        sheaf,
                        p.dim,
                        weight,
                        torus,
                        t,
                        max_x0_degree,
                        d,
                    )]
                }
                _ => {
                    return Err(Failure::Input(
                        "give exactly one of --charge and --torus-weight".into(),
                    ))
                }
            };
            let slices: Vec<SliceSpec> = slices
                .into_iter()
                .map(|s| with_cap(s, inp.basis_cap))
                .collect();
            let reports = homology_batch(&c, &slices, exec)?;
            let total: usize = reports.iter().map(|r| r.homology_dim).sum();
            let report = envelope(
                "homology",
                true,
                json!({ "complex": c.kind, "weight": weight, "total_dim": total,
                        "slices": reports }),
            );
            Ok(Outcome {
                report,
                failure: None,
            })
        }
        Command::Class {
            input,
            complex: name,
            state,
        } => {
            let inp = load(&input)?;
            let c = complex(&name, &inp.poisson)?;
            let a = parse_state(&state, c.sheaf(), inp.poisson.dim)?;
            let result = match class_check(&c, &a)? {
                ClassStatus::NotClosed(da) => {
                    json!({ "status": "not-closed", "differential": da.to_string() })
                }
                ClassStatus::Exact(w) => json!({ "status": "exact", "witness": w.to_string() }),
                ClassStatus::Nontrivial => json!({ "status": "nontrivial" }),
            };
            let report = envelope(
                "class",
                true,
                json!({ "complex": c.kind, "state": a.to_string(), "class": result }),
            );
            Ok(Outcome {
                report,
                failure: None,
            })
        }
        Command::S1Check {
            input,
            weight_max,
            charge_bound,
        } => {
            let inp = load(&input)?;
            let p = &inp.poisson;
            if p.charge_shift().is_none() {
                return Err(Failure::Input(
                    "s1-check needs a charge-homogeneous pi".into(),
                ));
            }
            let slices: Vec<SliceSpec> = (0..=weight_max)
                .flat_map(|n| s1_slices(p.dim, n, charge_bound))
                .map(|s| with_cap(s, inp.basis_cap))
                .collect();
            let checks = exec
                .map(&slices, |s| s1_conjugation_check(p, s))
                .into_iter()
                .collect::<chiralis::Result<Vec<_>>>()?;
            let failure = checks
                .iter()
                .find(|c| !c.conjugation)
                .map(|c| format!("conjugation fails on slice {}", c.slice));
            let nilpotency = checks.iter().map(|c| c.nilpotency).max().unwrap_or(0);
            let reversed = checks.iter().all(|c| c.reversed_exponents);
            let report = envelope(
                "s1-check",
                failure.is_none(),
                json!({ "weight_max": weight_max, "charge_bound": charge_bound,
                        "slices": checks.len(), "max_nilpotency": nilpotency,
                        "reversed_exponents_hold": reversed,
                        "failures": checks.iter().filter(|c| !c.conjugation)
                            .map(|c| c.slice.to_string()).collect::<Vec<_>>() }),
            );
            Ok(Outcome { report, failure })
        }
        Command::Brylinski {
            weight_max,
            charge_bound,
        } => {
            let b = brylinski_battery(weight_max, charge_bound, exec)?;
            let failure = if !b.h0_identity {
                Some("H_(0) of the symplectic partner is not the Virasoro vector".to_string())
            } else if !b.mode_one_identity {
                Some("(1)-mode of the partner differs from the differential".to_string())
            } else if !b.grading_identity {
                Some("[H_(0), L] differs from L_(1)".to_string())
            } else {
                b.positive_weight
                    .iter()
                    .find(|s| s.total_dim != 0)
                    .map(|s| {
                        format!(
                            "homology at weight {} has dimension {}",
                            s.weight, s.total_dim
                        )
                    })
            };
            let report = envelope("brylinski", failure.is_none(), json!(b));
            Ok(Outcome { report, failure })
        }
        Command::Reproduce { case } => {
            let b = match case {
                Case::ExtendedExample => reproduce_extended_example(exec)?,
                Case::Symplectic => reproduce_symplectic(exec)?,
            };
            let failure = b.first_failure().map(|c| {
                format!(
                    "{}: expected {}, observed {}",
                    c.name, c.expected, c.observed
                )
            });
            let report = serde_json::to_value(&b)?;
            Ok(Outcome { report, failure })
        }
    }
}

/// Run with the given arguments (program name first); returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match dispatch(cli.command, exec) {
        Ok(o) => {
            let text = serde_json::to_string_pretty(&o.report).expect("plain data");
            let _ = writeln!(out, "{text}");
            match o.failure {
                Some(f) => {
                    let _ = writeln!(err, "FAILED: {f}");
                    1
                }
                None => 0,
            }
        }
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}
