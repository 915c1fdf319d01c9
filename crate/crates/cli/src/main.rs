//! `boxc`: check, format, render, search and simulate boxology diagrams.
//!
//! Exit status: 0 on success, 1 when the input has findings (validation
//! errors, parse errors, a nonconformant trace), 2 on usage or I/O failure.

use std::fmt::Write as _;
use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boxology::parser::{format, parse};
use boxology::patterns::{builtin_patterns, detect, find_pattern, instantiate, PatternTemplate};
use boxology::renderer::{to_dot, RankDir, RenderOptions};
use boxology::simulator::{
    bdi_protocol, bind_trace, check_trace, contract_net_protocol, federated_protocol,
    planning_protocol, run_bdi, run_contract_net, run_distributed_planning,
    run_federated_learning, BdiConfig, ContractNetConfig, FederatedConfig, Performative,
    PlanningConfig, ProtocolSpec, Trace,
};
use boxology::validator::validate;
use boxology::{builtin_taxonomy, Diagnostic, Document, Severity};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "boxc", version, about = "Toolchain for boxology diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rank {
    #[value(name = "LR")]
    Lr,
    #[value(name = "TB")]
    Tb,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Simulation {
    ContractNet,
    Planning,
    Federated,
    Bdi,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a diagram.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
        /// Treat warnings as errors.
        #[arg(long)]
        strict: bool,
    },
    /// Print the canonical formatting of a diagram.
    Fmt {
        file: PathBuf,
        /// Rewrite the file in place instead of printing.
        #[arg(long)]
        write: bool,
    },
    /// Emit Graphviz DOT.
    Render {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[arg(long)]
        no_pattern_frames: bool,
        #[arg(long)]
        no_zoom_frames: bool,
        #[arg(long, value_enum, default_value = "LR")]
        rankdir: Rank,
    },
    /// List occurrences of built-in patterns.
    Detect {
        file: PathBuf,
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Instantiate a built-in pattern as a standalone diagram.
    Expand {
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        prefix: String,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Run a seeded simulation and write its trace as JSON lines.
    Sim {
        #[arg(value_enum)]
        kind: Simulation,
        #[arg(long)]
        config: PathBuf,
        /// Overrides any seed in the config.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trace: PathBuf,
        /// Replay the trace through its protocol and fail on violations.
        #[arg(long)]
        check: bool,
        /// Attach diagram node references from this diagram.
        #[arg(long)]
        bind: Option<PathBuf>,
    },
}

/// Failure carrying its exit status.
struct Exit(u8, String);

fn usage(msg: impl Into<String>) -> Exit {
    Exit(2, msg.into())
}

fn read(path: &Path) -> Result<String, Exit> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Exit> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Exit> {
    match output {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn color_enabled() -> bool {
    std::env::var_os("BOXC_NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn paint(text: &str, severity: Severity) -> String {
    let code = match severity {
        Severity::Error => "31",
        Severity::Warning => "33",
    };
    format!("\x1b[{code}m{text}\x1b[0m")
}

fn render_diagnostics(diags: &[Diagnostic], file: &str, fmt: OutputFormat) -> String {
    let color = fmt == OutputFormat::Text && color_enabled();
    let mut out = String::new();
    for d in diags {
        let line = match fmt {
            OutputFormat::Json => d.to_json_line(file),
            OutputFormat::Text if color => paint(&d.to_text(file), d.severity),
            OutputFormat::Text => d.to_text(file),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Parse `path`, or report its parse diagnostics on stderr and fail with 1.
fn load(path: &Path) -> Result<Document, Exit> {
    let text = read(path)?;
    parse(&text).map_err(|diags| {
        Exit(1, render_diagnostics(&diags, &path.display().to_string(), OutputFormat::Text).trim_end().to_string())
    })
}

fn pattern_by_name(name: &str) -> Result<&'static PatternTemplate, Exit> {
    find_pattern(name).ok_or_else(|| {
        let known: Vec<&str> = builtin_patterns().iter().map(|p| p.name.as_str()).collect();
        usage(format!("unknown pattern `{name}`; known patterns: {}", known.join(", ")))
    })
}

fn check(file: &Path, fmt: OutputFormat, strict: bool) -> Result<(), Exit> {
    let text = read(file)?;
    let name = file.display().to_string();
    let mut diags = match parse(&text) {
        Ok(doc) => validate(&doc, builtin_taxonomy()),
        Err(diags) => diags,
    };
    if strict {
        for d in &mut diags {
            d.severity = Severity::Error;
        }
    }
    print!("{}", render_diagnostics(&diags, &name, fmt));
    if diags.iter().any(Diagnostic::is_error) {
        Err(Exit(1, String::new()))
    } else {
        Ok(())
    }
}

fn fmt_file(file: &Path, write_back: bool) -> Result<(), Exit> {
    let doc = load(file)?;
    let formatted = format(&doc);
    if write_back {
        if read(file)? != formatted {
            write(file, &formatted)?;
        }
        Ok(())
    } else {
        emit(None, &formatted)
    }
}

fn detect_file(file: &Path, pattern: Option<&str>, fmt: OutputFormat) -> Result<(), Exit> {
    let patterns: Vec<&PatternTemplate> = match pattern {
        Some(name) => vec![pattern_by_name(name)?],
        None => builtin_patterns().iter().collect(),
    };
    let doc = load(file)?;
    let mut out = String::new();
    for p in patterns {
        for m in detect(&doc, p, builtin_taxonomy()) {
            match fmt {
                OutputFormat::Json => out.push_str(&serde_json::to_string(&m).expect("match serializes")),
                OutputFormat::Text => {
                    let binding: Vec<String> = m.binding.iter().map(|(s, n)| format!("{s}={n}")).collect();
                    let _ = write!(out, "{}: {}", m.pattern, binding.join(", "));
                }
            }
            out.push('\n');
        }
    }
    emit(None, &out)
}

fn expand(pattern: &str, prefix: &str, output: Option<&Path>) -> Result<(), Exit> {
    let p = pattern_by_name(pattern)?;
    let doc = instantiate(p, prefix, builtin_taxonomy()).map_err(|e| usage(e.to_string()))?;
    emit(output, &format(&doc))
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path, seed: u64) -> Result<T, Exit> {
    let text = read(path)?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let Some(obj) = value.as_object_mut() else {
        return Err(usage(format!("{}: config must be a JSON object", path.display())));
    };
    obj.insert("seed".into(), seed.into());
    serde_json::from_value(value).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn sim_error(e: impl std::fmt::Display) -> Exit {
    usage(e.to_string())
}

/// Runs the simulation and returns its trace, protocol and a summary.
fn simulate(kind: Simulation, config: &Path, seed: u64) -> Result<(Trace, ProtocolSpec, String), Exit> {
    let mut summary = String::new();
    match kind {
        Simulation::ContractNet => {
            let cfg: ContractNetConfig = load_config(config, seed)?;
            let trace = run_contract_net(&cfg).map_err(sim_error)?;
            match trace.events.iter().find(|e| e.performative == Performative::Accept) {
                Some(e) => {
                    let _ = writeln!(summary, "awarded to {} with bid {}", e.receiver, e.payload["bid"]);
                }
                None => summary.push_str("no award\n"),
            }
            Ok((trace, contract_net_protocol(), summary))
        }
        Simulation::Planning => {
            let cfg: PlanningConfig = load_config(config, seed)?;
            let (schedule, trace) = run_distributed_planning(&cfg).map_err(sim_error)?;
            for e in &schedule.entries {
                match (&e.machine, e.start, e.end) {
                    (Some(m), Some(s), Some(t)) => {
                        let _ = writeln!(summary, "{}: {m} [{s}, {t})", e.job);
                    }
                    _ => {
                        let _ = writeln!(summary, "{}: unassigned", e.job);
                    }
                }
            }
            Ok((trace, planning_protocol(), summary))
        }
        Simulation::Federated => {
            let cfg: FederatedConfig = load_config(config, seed)?;
            let (stats, trace) = run_federated_learning(&cfg).map_err(sim_error)?;
            let _ = writeln!(
                summary,
                "count {} mean {} variance {}",
                stats.count, stats.mean, stats.variance
            );
            Ok((trace, federated_protocol(), summary))
        }
        Simulation::Bdi => {
            let cfg: BdiConfig = load_config(config, seed)?;
            let trace = run_bdi(&cfg).map_err(sim_error)?;
            for p in [
                Performative::Sense,
                Performative::Classify,
                Performative::Predict,
                Performative::Plan,
                Performative::Act,
                Performative::Speak,
            ] {
                let _ = writeln!(summary, "{p}: {}", trace.count(p));
            }
            Ok((trace, bdi_protocol(), summary))
        }
    }
}

fn sim(
    kind: Simulation,
    config: &Path,
    seed: u64,
    trace_path: &Path,
    check: bool,
    bind: Option<&Path>,
) -> Result<(), Exit> {
    let (mut trace, protocol, summary) = simulate(kind, config, seed)?;
    if let Some(path) = bind {
        trace = bind_trace(&trace, &load(path)?);
    }
    write(trace_path, &trace.to_jsonl())?;
    print!("{summary}");
    if check {
        let report = check_trace(&trace, &protocol);
        let mut msg = String::new();
        for v in &report.violations {
            let _ = writeln!(msg, "event {} ({}, state {}): {}", v.event, v.conversation, v.state, v.reason);
        }
        for c in report.conversations.iter().filter(|c| !c.terminal) {
            let _ = writeln!(msg, "conversation {} ends in non-terminal state {}", c.conversation, c.final_state);
        }
        if !report.conformant() {
            return Err(Exit(1, msg.trim_end().to_string()));
        }
        println!("trace conforms to {}", report.protocol);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Exit> {
    match cli.command {
        Command::Check { file, format, strict } => check(&file, format, strict),
        Command::Fmt { file, write } => fmt_file(&file, write),
        Command::Render {
            file,
            output,
            no_pattern_frames,
            no_zoom_frames,
            rankdir,
        } => {
            let doc = load(&file)?;
            let opts = RenderOptions {
                show_pattern_frames: !no_pattern_frames,
                show_zoom_frames: !no_zoom_frames,
                rankdir: match rankdir {
                    Rank::Lr => RankDir::LR,
                    Rank::Tb => RankDir::TB,
                },
            };
            emit(output.as_deref(), &to_dot(&doc, &opts))
        }
        Command::Detect { file, pattern, format } => detect_file(&file, pattern.as_deref(), format),
        Command::Expand { pattern, prefix, output } => expand(&pattern, &prefix, output.as_deref()),
        Command::Sim {
            kind,
            config,
            seed,
            trace,
            check,
            bind,
        } => sim(kind, &config, seed, &trace, check, bind.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(code)
        }
    }
}
