//! Argument parsing and subcommands.

use std::collections::BTreeSet;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::thread;

use aspdbg_core::diagnosis::SampleLimit;
use aspdbg_core::instrument::{assemble_gamma_with, default_background, validate_background};
use aspdbg_core::solver::enumerate_answer_sets;
use aspdbg_core::{ground, parse_program, parse_test_case, GroundMode, GroundOptions, RuleId};
use clap::{Parser, Subcommand, ValueEnum};

use crate::engine::{DebugInput, Engine};
use crate::protocol::{FindingInfo, Payload, SessionMessage, Status};
use crate::source::{Location, Sources};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "aspdbg", version, about = "Debugger for answer-set programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the ground program and its atom table.
    Ground {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::NoSimplify)]
        mode: Mode,
        #[arg(long, default_value_t = aspdbg_core::ground::DEFAULT_GROUNDING_BUDGET)]
        budget: usize,
    },
    /// Enumerate answer sets.
    Solve {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Maximum number of answer sets, 0 for all.
        #[arg(long, default_value_t = 0)]
        models: usize,
    },
    /// Print the extended debugging program with the test constraints.
    Instrument {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_parser = parse_background)]
        background: Option<BTreeSet<RuleId>>,
    },
    /// Start a debugging session.
    Debug {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        test: PathBuf,
        /// Comma-separated rule ids; defaults to all facts.
        #[arg(long, value_parser = parse_background)]
        background: Option<BTreeSet<RuleId>>,
        /// Answer sets sampled per reason element, or `all`.
        #[arg(long, default_value = "10", value_parser = parse_sample_limit)]
        max_models_per_query: SampleLimit,
        /// Speak the session protocol on stdin/stdout.
        #[arg(long, conflicts_with = "serve")]
        json: bool,
        /// Speak the session protocol on 127.0.0.1:PORT.
        #[arg(long)]
        serve: Option<u16>,
        #[arg(long, default_value_t = aspdbg_core::ground::DEFAULT_GROUNDING_BUDGET)]
        budget: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Simplify,
    NoSimplify,
}

fn parse_background(s: &str) -> Result<BTreeSet<RuleId>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<u32>()
                .map(RuleId)
                .map_err(|_| format!("invalid rule id {p:?}"))
        })
        .collect()
}

fn parse_sample_limit(s: &str) -> Result<SampleLimit, String> {
    if s == "all" {
        return Ok(SampleLimit::ALL);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(SampleLimit(Some(n))),
        _ => Err(format!("expected a positive integer or `all`, got {s:?}")),
    }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_program(files: &[PathBuf]) -> Result<(Sources, aspdbg_core::Program), Error> {
    let sources = Sources::load(files)?;
    let p = parse_program(sources.text()).map_err(|e| sources.parse_error(&e))?;
    Ok((sources, p))
}

fn load_test(path: &PathBuf) -> Result<aspdbg_core::TestCase, Error> {
    let text = read(path)?;
    parse_test_case(&text).map_err(|e| Error::Parse {
        location: Location {
            file: path.display().to_string(),
            line: e.line,
            column: e.column,
        },
        message: e.message(),
    })
}

fn io_err(e: io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

/// Runs a parsed command. Returns the process exit status.
pub fn run<R: BufRead, W: Write, E: Write>(cli: Cli, input: R, out: &mut W, err: &mut E) -> u8 {
    match execute(cli, input, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn execute<R: BufRead, W: Write, E: Write>(
    cli: Cli,
    input: R,
    out: &mut W,
    err: &mut E,
) -> Result<(), Error> {
    match cli.command {
        Command::Ground {
            files,
            mode,
            budget,
        } => {
            let (sources, p) = load_program(&files)?;
            let mode = match mode {
                Mode::Simplify => GroundMode::Simplify,
                Mode::NoSimplify => GroundMode::NoSimplify,
            };
            let g = ground(&p, GroundOptions { mode, budget })
                .map_err(|e| Error::Input(e.to_string()))?;
            write!(out, "{g}").map_err(io_err)?;
            for w in &g.warnings {
                if let Some(r) = p.rule(w.rule_id) {
                    let _ = writeln!(
                        err,
                        "warning: {}: rule {} lost instances to simplification: {r}",
                        sources.span(r.span),
                        w.rule_id
                    );
                }
            }
            Ok(())
        }
        Command::Solve { files, models } => {
            let (_, p) = load_program(&files)?;
            let g =
                ground(&p, GroundOptions::default()).map_err(|e| Error::Input(e.to_string()))?;
            let limit = if models == 0 { usize::MAX } else { models };
            let result = enumerate_answer_sets(&g, limit);
            for (i, m) in result.models().iter().enumerate() {
                let mut atoms: Vec<String> = m
                    .iter()
                    .map(|a| g.atoms.atom(a))
                    .filter(|a| !a.is_reserved())
                    .map(|a| a.to_string())
                    .collect();
                atoms.sort();
                writeln!(out, "Answer: {}\n{}", i + 1, atoms.join(" ")).map_err(io_err)?;
            }
            let verdict = if result.models().is_empty() {
                "INCOHERENT"
            } else {
                "COHERENT"
            };
            writeln!(out, "{verdict}").map_err(io_err)
        }
        Command::Instrument {
            files,
            test,
            background,
        } => {
            let (_, p) = load_program(&files)?;
            let t = load_test(&test)?;
            let bg = match background {
                Some(ids) => {
                    validate_background(&p, &ids).map_err(|e| Error::Input(e.to_string()))?;
                    ids
                }
                None => default_background(&p),
            };
            let gamma =
                assemble_gamma_with(&p, &t, &bg, aspdbg_core::ground::DEFAULT_GROUNDING_BUDGET)
                    .map_err(|e| Error::Input(e.to_string()))?;
            write!(out, "{}", gamma.program).map_err(io_err)?;
            let pa: Vec<String> = gamma
                .instrumentation
                .assumable()
                .map(|a| a.to_string())
                .collect();
            writeln!(out, "% P_A: {}", pa.join(" ")).map_err(io_err)
        }
        Command::Debug {
            files,
            test,
            background,
            max_models_per_query,
            json,
            serve: port,
            budget,
        } => {
            let sources = Sources::load(&files)?;
            let mut input_spec =
                DebugInput::new(sources, &test.display().to_string(), &read(&test)?);
            input_spec.background = background;
            input_spec.sample_limit = max_models_per_query;
            input_spec.budget = budget;
            let engine = Engine::start(input_spec.clone())?;
            if let Some(port) = port {
                let listener =
                    TcpListener::bind(("127.0.0.1", port)).map_err(|source| Error::Io {
                        path: format!("127.0.0.1:{port}"),
                        source,
                    })?;
                let addr = listener.local_addr().map_err(io_err)?;
                let _ = writeln!(err, "listening on {addr}");
                let _ = err.flush();
                drop(engine);
                serve(listener, input_spec);
                Ok(())
            } else if json {
                run_json(engine, input, out).map_err(io_err)
            } else {
                run_terminal(engine, input, out).map_err(io_err)
            }
        }
    }
}

/// Accepts connections forever, one session per connection.
pub fn serve(listener: TcpListener, input: DebugInput) {
    for stream in listener.incoming().flatten() {
        let input = input.clone();
        thread::spawn(move || {
            let _ = serve_connection(stream, input);
        });
    }
}

fn serve_connection(stream: TcpStream, input: DebugInput) -> io::Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    let mut writer = stream;
    match Engine::start(input) {
        Ok(engine) => run_json(engine, reader, &mut writer),
        Err(e) => {
            let m = SessionMessage::new(
                1,
                Payload::Error {
                    message: e.to_string(),
                    in_reply_to: None,
                },
            );
            writeln!(writer, "{}", m.to_line())?;
            writeln!(
                writer,
                "{}",
                SessionMessage::new(2, Payload::Bye {}).to_line()
            )
        }
    }
}

/// Protocol loop: opening messages, then one reply batch per inbound line.
/// End of input counts as `stop`.
pub fn run_json<R: BufRead, W: Write>(mut engine: Engine, input: R, out: &mut W) -> io::Result<()> {
    let emit = |out: &mut W, msgs: Vec<SessionMessage>| -> io::Result<()> {
        for m in msgs {
            writeln!(out, "{}", m.to_line())?;
        }
        out.flush()
    };
    emit(out, engine.opening())?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let replies = engine.handle_line(&line);
        emit(out, replies)?;
        if engine.is_done() {
            return Ok(());
        }
    }
    let replies = engine.handle(SessionMessage {
        seq: None,
        payload: Payload::Stop {},
    });
    emit(out, replies)
}

fn render_finding(out: &mut impl Write, f: &FindingInfo) -> io::Result<()> {
    match f {
        FindingInfo::Rule {
            rule_id,
            span,
            rule,
            instances,
        } => {
            let at = span.as_ref().map(|s| format!(" ({s})")).unwrap_or_default();
            writeln!(out, "  rule {rule_id}{at}: {rule}")?;
            for i in instances {
                let sub: Vec<String> = i
                    .substitution
                    .iter()
                    .map(|b| format!("{}={}", b.var, b.value))
                    .collect();
                if sub.is_empty() {
                    writeln!(out, "    {}", i.ground_instance)?;
                } else {
                    writeln!(out, "    with {}: {}", sub.join(", "), i.ground_instance)?;
                }
            }
            Ok(())
        }
        FindingInfo::Unsupported {
            atom,
            candidate_rules,
        } => {
            writeln!(
                out,
                "  atom {atom} has no support; rules with it in the head:"
            )?;
            if candidate_rules.is_empty() {
                writeln!(out, "    (none)")?;
            }
            for r in candidate_rules {
                let at = r
                    .span
                    .as_ref()
                    .map(|s| format!(" ({s})"))
                    .unwrap_or_default();
                writeln!(out, "    rule {}{at}", r.rule_id)?;
            }
            Ok(())
        }
    }
}

/// Writes a message for a human reader.
pub fn render(out: &mut impl Write, m: &SessionMessage) -> io::Result<()> {
    match &m.payload {
        Payload::Hello { files, test, .. } => {
            writeln!(
                out,
                "debugging {} against {} assertion(s)",
                files.join(", "),
                test.len()
            )
        }
        Payload::GroundReport {
            atoms,
            program_rules,
            debugging_rules,
            assumptions,
            warnings,
        } => {
            writeln!(
                out,
                "ground program: {program_rules} rules; debugging program: {debugging_rules} rules, {atoms} atoms, {assumptions} assumptions"
            )?;
            for w in warnings {
                let at = w
                    .span
                    .as_ref()
                    .map(|s| format!(" ({s})"))
                    .unwrap_or_default();
                writeln!(
                    out,
                    "warning: rule {}{at} would be removed by a simplifying grounder",
                    w.rule_id
                )?;
            }
            Ok(())
        }
        Payload::Diagnosis {
            step,
            status,
            reason,
            findings,
            ..
        } => {
            writeln!(
                out,
                "step {step}: reason of incoherence {{{}}}",
                reason.join(", ")
            )?;
            for f in findings {
                render_finding(out, f)?;
            }
            match status {
                Status::Finished => writeln!(out, "diagnosis complete"),
                Status::Inconsistent => writeln!(
                    out,
                    "answers inconsistent with every candidate fix; undo an answer"
                ),
                Status::Open => Ok(()),
            }
        }
        Payload::Queries { queries, .. } => {
            if queries.is_empty() {
                return Ok(());
            }
            let qs: Vec<String> = queries
                .iter()
                .map(|q| format!("{} (+{} -{})", q.atom, q.q_plus, q.q_minus))
                .collect();
            writeln!(out, "queries: {}", qs.join(", "))
        }
        Payload::Finding { finding } => {
            writeln!(out, "finding:")?;
            render_finding(out, finding)
        }
        Payload::Error { message, .. } => writeln!(out, "error: {message}"),
        Payload::Bye {} => writeln!(out, "bye"),
        Payload::Answer { .. } | Payload::Undo { .. } | Payload::Stop {} => Ok(()),
    }
}

/// Terminal loop: asks the top query as `atom? [y/n/skip]`. Also accepts
/// `undo N` and `stop`.
pub fn run_terminal<R: BufRead, W: Write>(
    mut engine: Engine,
    input: R,
    out: &mut W,
) -> io::Result<()> {
    let mut queries: Vec<String> = Vec::new();
    let mut finished = false;
    let show =
        |out: &mut W, msgs: Vec<SessionMessage>, queries: &mut Vec<String>, finished: &mut bool| {
            for m in &msgs {
                match &m.payload {
                    Payload::Queries { queries: q, .. } => {
                        *queries = q.iter().map(|q| q.atom.clone()).collect();
                    }
                    Payload::Diagnosis { status, .. } => *finished = *status != Status::Open,
                    _ => {}
                }
                render(out, m)?;
            }
            io::Result::Ok(())
        };
    show(out, engine.opening(), &mut queries, &mut finished)?;
    let mut lines = input.lines();
    let mut skip = 0;
    while !finished && skip < queries.len() {
        let atom = queries[skip].clone();
        write!(out, "{atom}? [y/n/skip] ")?;
        out.flush()?;
        let Some(line) = lines.next() else { break };
        let line = line?;
        let cmd = line.trim();
        let msg = match cmd {
            "y" | "yes" => Payload::Answer { atom, value: true },
            "n" | "no" => Payload::Answer { atom, value: false },
            "s" | "skip" | "" => {
                skip += 1;
                continue;
            }
            "stop" | "q" | "quit" => break,
            other => match other
                .strip_prefix("undo")
                .map(str::trim)
                .map(str::parse::<usize>)
            {
                Some(Ok(to_step)) => Payload::Undo { to_step },
                _ => {
                    writeln!(out, "expected y, n, skip, undo N or stop")?;
                    continue;
                }
            },
        };
        skip = 0;
        let replies = engine.handle(SessionMessage {
            seq: None,
            payload: msg,
        });
        show(out, replies, &mut queries, &mut finished)?;
    }
    writeln!(out)?;
    let replies = engine.handle(SessionMessage {
        seq: None,
        payload: Payload::Stop {},
    });
    show(out, replies, &mut queries, &mut finished)
}
