use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use wenforge::codec::{format_move, format_trace, parse_move, parse_trace, parse_unchecked};
use wenforge::search::{random_closed_trace, random_diagram_with, rng, FrontierStats};
use wenforge::transpiler::{append_mirrors, eliminate_wens_link};
use wenforge::{
    apply, bfs_equivalence, canonical_form, classify, eliminate_w4_single_wen,
    eliminate_wens_even, enumerate, mirror, mirror_component, parse, reduce_to_no_wen,
    reduce_to_single_wen, serialize, slide_wen, ArcSet, Direction, GaussDiagram, MoveSet,
    SearchBounds, SearchResult, SizeCaps, Trace, WenId,
};

#[derive(Parser)]
#[command(name = "wenforge", version, about = "Gauss diagrams with wens: moves, reductions, transpilers, search")]
struct Cli {
    /// Emit one JSON object instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arcs {
    /// Arcs whose membership starts false at index 0.
    Aprime,
    /// The complement.
    Adoubleprime,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a Gauss code and report every violation.
    Validate { code: String },
    /// Canonical form.
    Canon { code: String },
    /// Wen parity type per component.
    Type { code: String },
    /// Negate every sign, or only the chords with tail on one component.
    Mirror {
        code: String,
        /// 1-based component index.
        #[arg(long)]
        component: Option<usize>,
    },
    /// Reduce a knot diagram to one wen (odd) or none (even).
    Reduce {
        code: String,
        /// 1-based wen number in reading order; defaults to the first wen.
        #[arg(long, conflicts_with = "arcs")]
        wen: Option<u32>,
        #[arg(long, value_enum)]
        arcs: Option<Arcs>,
    },
    /// Type and normal form of a knot diagram.
    Classify { code: String },
    /// List applicable moves.
    Moves {
        code: String,
        #[arg(long, default_value = "all")]
        moveset: MoveSet,
        #[arg(long)]
        max_chords: Option<usize>,
        #[arg(long)]
        max_wens: Option<usize>,
    },
    /// Apply one move.
    Apply { code: String, r#move: String },
    /// Slide a wen to a target index with W1/W2 moves.
    Slide {
        code: String,
        #[arg(long)]
        wen: u32,
        /// 0-based target index on the wen's component.
        #[arg(long)]
        to: usize,
        #[arg(long)]
        backward: bool,
    },
    /// Rewrite a trace file without W4 moves (odd) or without wens (even).
    Transpile {
        trace: PathBuf,
        /// Leave out the trailing mirror steps.
        #[arg(long)]
        no_mirror: bool,
        /// Write a checkpoint after every move.
        #[arg(long)]
        checkpoints: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Replay a trace file and check its checkpoints.
    Verify { trace: PathBuf },
    /// Breadth-first search for a move sequence between two diagrams.
    Search {
        a: String,
        b: String,
        #[arg(long, default_value = "welded")]
        moveset: MoveSet,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long)]
        max_nodes: Option<usize>,
        #[arg(long)]
        max_chords: Option<usize>,
        #[arg(long)]
        max_wens: Option<usize>,
    },
    /// Seeded random diagram, or a closed random trace with --trace.
    Rand {
        #[arg(long, default_value_t = 3)]
        chords: usize,
        #[arg(long, default_value_t = 1)]
        wens: usize,
        #[arg(long, default_value_t = 1)]
        components: usize,
        #[arg(long, env = "WENFORGE_SEED", default_value_t = 0)]
        seed: u64,
        /// Random walk length; the walk is closed back to the initial wen counts.
        #[arg(long)]
        trace: Option<usize>,
    },
}

/// Exit 1: a check failed or the search came back empty. Exit 2: bad input.
enum Failure {
    Check(String, Option<Value>),
    Input(String),
}

fn check<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Check(e.to_string(), None)
}

type Outcome = Result<(String, Value), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn diagram(code: &str) -> Result<GaussDiagram, Failure> {
    parse(code).map_err(input)
}

fn read_trace(path: &PathBuf) -> Result<Trace, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(input)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?
    };
    parse_trace(&text).map_err(input)
}

fn type_label(d: &GaussDiagram) -> String {
    let ty = d.link_type();
    if d.num_components() == 1 {
        let parity = if ty.is_odd(0) { "odd" } else { "even" };
        format!("{parity} ({})", ty.deltas()[0])
    } else {
        format!("link {ty}")
    }
}

fn stats_json(s: &FrontierStats) -> Value {
    json!({
        "depth": s.depth,
        "visited": s.visited,
        "frontier": s.frontier,
        "reason": format!("{:?}", s.reason),
    })
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Validate { code } => {
            let d = parse_unchecked(&code).map_err(input)?;
            match d.validate() {
                Ok(()) => Ok(("ok".into(), json!({ "valid": true }))),
                Err(vs) => {
                    let lines: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                    Err(Failure::Check(lines.join("\n"), Some(json!({ "valid": false, "violations": lines }))))
                }
            }
        }
        Cmd::Canon { code } => {
            let c = canonical_form(&diagram(&code)?);
            Ok((c.clone(), json!({ "canonical": c })))
        }
        Cmd::Type { code } => {
            let d = diagram(&code)?;
            let label = type_label(&d);
            Ok((label.clone(), json!({ "type": label, "deltas": d.link_type().deltas() })))
        }
        Cmd::Mirror { code, component } => {
            let d = diagram(&code)?;
            let m = match component {
                None => mirror(&d),
                Some(0) => return Err(Failure::Input("components are numbered from 1".into())),
                Some(i) => mirror_component(&d, i - 1).map_err(input)?,
            };
            let s = serialize(&m);
            Ok((s.clone(), json!({ "diagram": s })))
        }
        Cmd::Reduce { code, wen, arcs } => {
            let d = diagram(&code)?;
            let odd = d.link_type().is_odd(0);
            let r = match (wen, arcs) {
                (Some(w), _) => reduce_to_single_wen(&d, WenId(w)),
                (None, Some(a)) => reduce_to_no_wen(
                    &d,
                    ArcSet {
                        component: 0,
                        phase: matches!(a, Arcs::Adoubleprime),
                    },
                ),
                (None, None) if odd => {
                    let w = d.wens_on(0).first().copied().ok_or_else(|| input("no wens"))?;
                    reduce_to_single_wen(&d, w)
                }
                (None, None) => reduce_to_no_wen(&d, ArcSet { component: 0, phase: false }),
            }
            .map_err(input)?;
            let s = serialize(&r);
            Ok((s.clone(), json!({ "diagram": s })))
        }
        Cmd::Classify { code } => {
            let d = diagram(&code)?;
            let (_, form) = classify(&d).map_err(input)?;
            let label = type_label(&d);
            Ok((format!("{label} {form}"), json!({ "type": label, "normal_form": form })))
        }
        Cmd::Moves { code, moveset, max_chords, max_wens } => {
            let d = diagram(&code)?;
            let caps = SizeCaps {
                max_chords: max_chords.unwrap_or(d.num_chords() + 1),
                max_wens: max_wens.unwrap_or(d.num_wens() + 2),
            };
            let ms: Vec<String> = enumerate(&d, &moveset, caps).iter().map(format_move).collect();
            Ok((ms.join("\n"), json!({ "moves": ms })))
        }
        Cmd::Apply { code, r#move } => {
            let d = diagram(&code)?;
            let m = parse_move(&r#move).map_err(input)?;
            let out = apply(&d, &m).map_err(check)?;
            let s = serialize(&out);
            Ok((s.clone(), json!({ "diagram": s })))
        }
        Cmd::Slide { code, wen, to, backward } => {
            let d = diagram(&code)?;
            let dir = if backward { Direction::Backward } else { Direction::Forward };
            let t = slide_wen(&d, WenId(wen), to, dir).map_err(input)?;
            let end = t.verify().map_err(check)?;
            let text = format_trace(&t);
            Ok((
                text.trim_end().to_string(),
                json!({ "trace": text, "final": serialize(&end), "steps": t.len() }),
            ))
        }
        Cmd::Transpile { trace, no_mirror, checkpoints, output } => {
            let t = read_trace(&trace)?;
            let end = t.verify().map_err(check)?;
            let single = t.initial.num_components() == 1;
            let (out, flags) = if single && t.initial.link_type().is_odd(0) {
                (eliminate_w4_single_wen(&t).map_err(input)?, vec![false])
            } else if single {
                let (o, f) = eliminate_wens_even(&t).map_err(input)?;
                (o, vec![f])
            } else {
                eliminate_wens_link(&t).map_err(input)?
            };
            let mut out = if no_mirror { out } else { append_mirrors(&out, &flags) };
            if checkpoints {
                out = out.with_checkpoints().map_err(check)?;
            }
            let last = out.verify().map_err(check)?;
            if !no_mirror && canonical_form(&last) != canonical_form(&end) {
                return Err(check("transpiled trace misses the input endpoint"));
            }
            let text = format_trace(&out);
            let meta = json!({
                "steps": out.len(),
                "mirrored": flags,
                "final": serialize(&last),
            });
            match output {
                Some(path) => {
                    fs::write(&path, &text).map_err(|e| input(format!("{}: {e}", path.display())))?;
                    Ok((format!("wrote {} steps to {}", out.len(), path.display()), meta))
                }
                None => {
                    let mut meta = meta;
                    meta["trace"] = json!(text);
                    Ok((text.trim_end().to_string(), meta))
                }
            }
        }
        Cmd::Verify { trace } => {
            let t = read_trace(&trace)?;
            let end = t.verify().map_err(check)?;
            let s = serialize(&end);
            Ok((
                format!("ok {} steps, final {s}", t.len()),
                json!({ "ok": true, "steps": t.len(), "final": s }),
            ))
        }
        Cmd::Search { a, b, moveset, max_depth, max_nodes, max_chords, max_wens } => {
            let (a, b) = (diagram(&a)?, diagram(&b)?);
            let base = SearchBounds::for_pair(&a, &b);
            let bounds = SearchBounds {
                max_depth: max_depth.unwrap_or(base.max_depth),
                max_nodes: max_nodes.unwrap_or(base.max_nodes),
                max_chords: max_chords.unwrap_or(base.max_chords),
                max_wens: max_wens.unwrap_or(base.max_wens),
            };
            match bfs_equivalence(&a, &b, &moveset, bounds).map_err(input)? {
                SearchResult::Found(t) => {
                    let text = format_trace(&t);
                    Ok((text.trim_end().to_string(), json!({ "found": true, "trace": text })))
                }
                SearchResult::Exhausted(s) => Err(Failure::Check(
                    format!(
                        "exhausted: {:?} at depth {}, {} visited, frontier {}",
                        s.reason, s.depth, s.visited, s.frontier
                    ),
                    Some(json!({ "found": false, "stats": stats_json(&s) })),
                )),
            }
        }
        Cmd::Rand { chords, wens, components, seed, trace } => {
            if components == 0 {
                return Err(Failure::Input("need at least one component".into()));
            }
            let mut r = rng(seed);
            let d = random_diagram_with(&mut r, chords, wens, components);
            match trace {
                None => {
                    let s = serialize(&d);
                    Ok((s.clone(), json!({ "diagram": s, "seed": seed })))
                }
                Some(len) => {
                    let caps = SizeCaps::around(&d, 2);
                    let t = random_closed_trace(&d, len, &MoveSet::extended_welded(), caps, &mut r);
                    let text = format_trace(&t);
                    Ok((text.trim_end().to_string(), json!({ "trace": text, "seed": seed })))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let as_json = cli.json;
    match run(cli.cmd) {
        Ok((text, value)) => {
            if as_json {
                println!("{value}");
            } else if !text.is_empty() {
                println!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Check(text, value)) => {
            if as_json {
                println!("{}", value.unwrap_or_else(|| json!({ "error": text })));
            } else {
                eprintln!("{text}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            if as_json {
                println!("{}", json!({ "error": msg }));
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(2)
        }
    }
}
