//! Command-line surface.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | success, equivalent, or invariant verified |
//! | 1  | unreadable input or frontend error |
//! | 2  | translation error |
//! | 3  | lock-step divergence |
//! | 4  | runtime error while simulating or checking |
//! | 5  | invariant violated |
//! | 6  | state bound reached before exploration finished |
//! | 64 | bad command line |

use crate::b_interp::{Animator, BState};
use crate::bmachine::{emit_machine, emit_machine_unicode, parse_machine, Machine};
use crate::checker::{self, Outcome, Overrides};
use crate::frontend::{compile, TypedProgram};
use crate::harness::{b_step, run_lockstep, Observation, Trace};
use crate::scade_interp::Simulator;
use crate::translator::{translate, translate_node, Translation};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_TRANSLATE: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;
pub const EXIT_VIOLATION: i32 = 5;
pub const EXIT_BOUND: i32 = 6;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "scade2b", version, about = "Translate SCADE models to B machines, compare them in lock-step and check invariants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Translate a .scade file into a B machine.
    Translate {
        input: PathBuf,
        /// Write the machine here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Use mathematical symbols instead of ASCII spellings.
        #[arg(long)]
        unicode: bool,
        #[command(flatten)]
        node: NodeArg,
    },
    /// Run a node, its machine, or both side by side over a trace.
    Simulate {
        input: PathBuf,
        #[command(flatten)]
        source: TraceSource,
        #[arg(long, value_enum, default_value_t = Side::Both)]
        side: Side,
        /// Animate this .mch instead of the translated machine.
        #[arg(long)]
        machine: Option<PathBuf>,
        #[command(flatten)]
        node: NodeArg,
    },
    /// Explore the reachable states of a machine and check its invariant.
    Check {
        /// A .scade file (translated first) or a .mch file.
        input: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        max_states: usize,
        /// Bound an integer parameter, or each cell of an array parameter.
        #[arg(long = "domain", value_name = "NAME=LO..HI")]
        domains: Vec<String>,
        #[arg(long, value_enum, default_value_t = CexFormat::Table)]
        format: CexFormat,
        #[command(flatten)]
        node: NodeArg,
    },
}

#[derive(Debug, Args)]
pub struct NodeArg {
    /// Node to translate; defaults to the last root node.
    #[arg(long)]
    pub node: Option<String>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
pub struct TraceSource {
    /// Trace file, one cycle per line.
    #[arg(long, conflicts_with_all = ["seed", "cycles"])]
    pub trace: Option<PathBuf>,
    /// Seed for a generated trace.
    #[arg(long, requires = "cycles")]
    pub seed: Option<u64>,
    /// Length of the generated trace.
    #[arg(long, requires = "seed")]
    pub cycles: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Scade,
    B,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CexFormat {
    Table,
    Trace,
}

/// Outcome of a command: exit code plus what goes to each stream.
struct Reply<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Reply<'_> {
    fn fail(&mut self, code: i32, msg: impl std::fmt::Display) -> i32 {
        let _ = writeln!(self.err, "{msg}");
        code
    }
}

/// Runs the command line in `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let mut r = Reply { out, err };
    match cli.command {
        Command::Translate {
            input,
            output,
            unicode,
            node,
        } => cmd_translate(&mut r, &input, output.as_deref(), unicode, node.node.as_deref()),
        Command::Simulate {
            input,
            source,
            side,
            machine,
            node,
        } => cmd_simulate(&mut r, &input, &source, side, machine.as_deref(), node.node.as_deref()),
        Command::Check {
            input,
            max_states,
            domains,
            format,
            node,
        } => cmd_check(&mut r, &input, max_states, &domains, format, node.node.as_deref()),
    }
}

fn read(r: &mut Reply, path: &Path) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| r.fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load(r: &mut Reply, path: &Path) -> Result<TypedProgram, i32> {
    let src = read(r, path)?;
    compile(&src).map_err(|e| r.fail(EXIT_INPUT, format!("{}:{e}", path.display())))
}

fn translated(r: &mut Reply, path: &Path, tp: &TypedProgram, node: Option<&str>) -> Result<Translation, i32> {
    let t = match node {
        Some(n) => translate_node(tp, n),
        None => translate(tp),
    };
    let t = t.map_err(|e| r.fail(EXIT_TRANSLATE, format!("{}:{e}", path.display())))?;
    for w in &t.warnings {
        let _ = writeln!(r.err, "{}: warning: {w}", path.display());
    }
    Ok(t)
}

fn read_machine(r: &mut Reply, path: &Path) -> Result<Machine, i32> {
    let src = read(r, path)?;
    parse_machine(&src).map_err(|e| r.fail(EXIT_INPUT, format!("{}:{e}", path.display())))
}

fn cmd_translate(r: &mut Reply, input: &Path, output: Option<&Path>, unicode: bool, node: Option<&str>) -> i32 {
    let go = |r: &mut Reply| -> Result<i32, i32> {
        let tp = load(r, input)?;
        let t = translated(r, input, &tp, node)?;
        let text = if unicode {
            emit_machine_unicode(&t.machine)
        } else {
            emit_machine(&t.machine)
        };
        match output {
            Some(p) => std::fs::write(p, &text).map_err(|e| r.fail(EXIT_INPUT, format!("{}: {e}", p.display())))?,
            None => {
                let _ = write!(r.out, "{text}");
            }
        }
        Ok(EXIT_OK)
    };
    go(r).unwrap_or_else(|c| c)
}

fn cmd_simulate(r: &mut Reply, input: &Path, source: &TraceSource, side: Side, machine: Option<&Path>, node: Option<&str>) -> i32 {
    let go = |r: &mut Reply| -> Result<i32, i32> {
        let tp = load(r, input)?;
        let t = translated(r, input, &tp, node)?;
        let m = match machine {
            Some(p) => read_machine(r, p)?,
            None => t.machine.clone(),
        };
        let sim = Simulator::new(&tp, &t.binding.node).expect("translated node exists");
        let (inputs, _) = tp.signature(&t.binding.node).expect("translated node exists");
        let trace = match (&source.trace, source.seed, source.cycles) {
            (Some(p), _, _) => {
                let text = read(r, p)?;
                let mut tr = Trace::parse(&text, &inputs, &tp.env)
                    .map_err(|e| r.fail(EXIT_INPUT, format!("{}:{}: {}", p.display(), e.line, e.message)))?;
                tr.provenance = crate::harness::Provenance::File(p.display().to_string());
                tr
            }
            (None, Some(seed), Some(n)) => Trace::generate(&inputs, &tp.env, seed, n),
            _ => return Err(r.fail(EXIT_USAGE, "either --trace or both --seed and --cycles are required")),
        };
        match side {
            Side::Scade => {
                let mut state = sim.init_state();
                for (k, cycle) in trace.cycles.iter().enumerate() {
                    let (outs, next) = sim.step(&state, cycle).map_err(|e| r.fail(EXIT_RUNTIME, format!("cycle {}: {e}", k + 1)))?;
                    let _ = writeln!(r.out, "{}", Observation::of_scade(outs, &next, &t.binding).render());
                    state = next;
                }
                Ok(EXIT_OK)
            }
            Side::B => {
                let anim = Animator::new(&m).map_err(|e| r.fail(EXIT_RUNTIME, format!("machine: {e}")))?;
                let mut state: BState = anim.init().map_err(|e| r.fail(EXIT_RUNTIME, format!("INITIALISATION: {e}")))?;
                for (k, cycle) in trace.cycles.iter().enumerate() {
                    let (obs, next, diags) =
                        b_step(&anim, &t.binding, &state, cycle).map_err(|e| r.fail(EXIT_RUNTIME, format!("cycle {}: {e}", k + 1)))?;
                    for d in diags {
                        let _ = writeln!(r.err, "cycle {}: {}: {}", k + 1, d.location, d.text);
                    }
                    let _ = writeln!(r.out, "{}", obs.render());
                    state = next;
                }
                Ok(EXIT_OK)
            }
            Side::Both => {
                let anim = Animator::new(&m).map_err(|e| r.fail(EXIT_RUNTIME, format!("machine: {e}")))?;
                let report = run_lockstep(&sim, &anim, &t.binding, &trace.cycles);
                for (c, d) in &report.diagnostics {
                    let _ = writeln!(r.err, "cycle {c}: {}: {}", d.location, d.text);
                }
                let _ = writeln!(r.out, "{report}");
                Ok(if !report.is_equivalent() {
                    EXIT_DIVERGENCE
                } else if report.common_error.is_some() {
                    EXIT_RUNTIME
                } else {
                    EXIT_OK
                })
            }
        }
    };
    go(r).unwrap_or_else(|c| c)
}

fn cmd_check(r: &mut Reply, input: &Path, max_states: usize, domains: &[String], format: CexFormat, node: Option<&str>) -> i32 {
    let go = |r: &mut Reply| -> Result<i32, i32> {
        let m = if input.extension().is_some_and(|e| e == "mch") {
            read_machine(r, input)?
        } else {
            let tp = load(r, input)?;
            translated(r, input, &tp, node)?.machine
        };
        let mut overrides = Overrides::default();
        for d in domains {
            overrides.add(d).map_err(|e| r.fail(EXIT_USAGE, e))?;
        }
        let outcome = checker::check(&m, &overrides, max_states).map_err(|e| r.fail(EXIT_RUNTIME, format!("{}: {e}", input.display())))?;
        let _ = writeln!(r.out, "{outcome}");
        Ok(match &outcome {
            Outcome::Verified { .. } => EXIT_OK,
            Outcome::Violation(c) => {
                let _ = writeln!(r.out);
                let _ = write!(
                    r.out,
                    "{}",
                    match format {
                        CexFormat::Table => c.table(),
                        CexFormat::Trace => c.trace_lines(),
                    }
                );
                EXIT_VIOLATION
            }
            Outcome::BoundExceeded { .. } => EXIT_BOUND,
        })
    };
    go(r).unwrap_or_else(|c| c)
}
