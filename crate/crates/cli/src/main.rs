use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hamdecomp::colouring::Colouring;
use hamdecomp::covering::{cover_with_report, CoverOptions};
use hamdecomp::decomposer::Session;
use hamdecomp::product::{Decomposition, ProductSession};
use hamdecomp::render::Drawing;
use hamdecomp::trace::{trace, TraceKind};
use hamdecomp::verifier::{
    summarize_window, verify_colouring, verify_covering, verify_decomposition_window, Window, WindowReport,
};
use hamdecomp::{Error, GeneratorSet, GroupSpec};

/// Hamilton decompositions of one-ended Cayley graphs of abelian groups.
#[derive(Parser)]
#[command(name = "hamdecomp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GroupArgs {
    /// e.g. "Z^2", "Z^2 x Z_3"
    #[arg(long)]
    group: Option<String>,
    /// tuples like "(1,0) (0,1)", or "units"
    #[arg(long)]
    gens: Option<String>,
}

#[derive(Args)]
struct Source {
    #[command(flatten)]
    group: GroupArgs,
    /// colouring or checkpoint file (instead of --group/--gens)
    #[arg(long)]
    colouring: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Cover a finite vertex set with one double-ray of a colour.
    Cover {
        #[command(flatten)]
        source: Source,
        /// vertices, e.g. "(0,0) (1,0)"
        #[arg(long)]
        set: String,
        /// 1-based colour
        #[arg(long)]
        colour: usize,
        /// write the new colouring here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run the decomposition driver for a number of steps.
    Decompose {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        steps: usize,
        /// stable window `a..b` on every free coordinate
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// continue from this checkpoint
        #[arg(long)]
        resume: Option<PathBuf>,
        /// write a checkpoint here when done
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Decompose a Cartesian product from decompositions of its factors.
    Product {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        steps: usize,
        /// label window `a..b`; defaults to the whole stable box
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Re-check a saved colouring or checkpoint.
    Verify {
        #[arg(long)]
        colouring: PathBuf,
        /// window `a..b` for checkpoints
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Walk the colour component through a vertex.
    Trace {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        from: String,
        #[arg(long)]
        colour: usize,
    },
    /// Render a window of a colouring.
    Export {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Dot,
    Svg,
}

/// Exit status; the variants carry their process code.
enum Failure {
    Input(String),
    Violations,
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SpecMismatch { .. }
            | Error::Parse(_)
            | Error::InvalidGenerators(_)
            | Error::TorsionGenerator(_)
            | Error::NotOneEnded(_)
            | Error::NotAlmostStandard(_)
            | Error::WindowNotStable(_)
            | Error::EdgeNotInDecomposition(_)
            | Error::LabelNotOnRay(_) => Failure::Input(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Internal(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gens_of(g: &GroupArgs) -> Result<GeneratorSet, Failure> {
    let (Some(group), Some(gens)) = (&g.group, &g.gens) else {
        return Err(input("need --group and --gens"));
    };
    let spec: GroupSpec = group.parse()?;
    Ok(if gens.trim() == "units" {
        GeneratorSet::units(spec)?
    } else {
        GeneratorSet::parse(spec, gens)?
    })
}

fn is_checkpoint(text: &str) -> bool {
    text.lines().any(|l| l.trim_start().starts_with("step "))
}

fn colouring_of(s: &Source) -> Result<Colouring, Failure> {
    match &s.colouring {
        Some(path) => {
            let text = read(path)?;
            if is_checkpoint(&text) {
                Ok(Session::restore(&text, CoverOptions::default())?.colouring().clone())
            } else {
                Ok(Colouring::from_text(&text)?)
            }
        }
        None => Ok(Colouring::standard(gens_of(&s.group)?)),
    }
}

/// `a..b` or `a,b`.
fn parse_range(s: &str) -> Result<(i64, i64), Failure> {
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once(','))
        .ok_or_else(|| input(format!("bad window {s:?}")))?;
    let a: i64 = a.trim().parse().map_err(|_| input(format!("bad window {s:?}")))?;
    let b: i64 = b.trim().parse().map_err(|_| input(format!("bad window {s:?}")))?;
    if a > b {
        return Err(input(format!("empty window {s:?}")));
    }
    Ok((a, b))
}

fn emit(report: &WindowReport, json: bool) -> Outcome {
    if json {
        println!("{}", report.to_json());
    } else {
        println!("{report}");
    }
    if report.is_clean() {
        Ok(())
    } else {
        Err(Failure::Violations)
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Cover {
            source,
            set,
            colour,
            out,
            json,
        } => {
            let c = colouring_of(&source)?;
            if colour == 0 || colour > c.colours() {
                return Err(input(format!("colour {colour} out of range 1..={}", c.colours())));
            }
            let spec = c.spec();
            let xs = hamdecomp::group::split_tuples(&set)?
                .into_iter()
                .map(|t| spec.parse_element(t))
                .collect::<Result<Vec<_>, _>>()?;
            if xs.is_empty() {
                return Err(input("--set is empty"));
            }
            let (after, r) = cover_with_report(&c, &xs, colour - 1, CoverOptions::default())?;
            let report = verify_covering(&c, &after, &xs, colour - 1);
            write_or_print(out.as_deref(), &after.to_text())?;
            let s = r.sizes;
            println!(
                "cover colour {} partner {} t {} N0 {} N1 {} N2 {} N3 {}",
                r.target + 1,
                r.partner + 1,
                r.t,
                s.n0,
                s.n1,
                s.n2,
                s.n3
            );
            println!("representatives {}", r.reps.join(" "));
            println!(
                "switched squares {} exceptional edges {}",
                r.switched_squares,
                after.exceptional_len()
            );
            println!(
                "covering double-ray contains X and Grid(g{}, g{}, {}, {}) around every representative",
                r.target + 1,
                r.partner + 1,
                s.n1,
                s.n1
            );
            emit(&report, json)
        }
        Command::Decompose {
            group,
            steps,
            window,
            resume,
            checkpoint,
            json,
        } => {
            let window = window.as_deref().map(parse_range).transpose()?;
            let mut session = match &resume {
                Some(p) => Session::restore(&read(p)?, CoverOptions::default())?,
                None => Session::new(gens_of(&group)?)?,
            };
            let mut stopped = None;
            for _ in 0..steps {
                match session.step() {
                    Ok(r) => println!(
                        "step {} colour {} radius {} |X| {} switched {} path {} from {} to {}",
                        r.n,
                        r.colour,
                        r.radius,
                        r.x_size,
                        r.switched_edges,
                        r.path_length,
                        r.endpoints.0,
                        r.endpoints.1
                    ),
                    Err(e) => {
                        stopped = Some(e);
                        break;
                    }
                }
            }
            if let Some(p) = &checkpoint {
                write_or_print(Some(p), &session.checkpoint())?;
            }
            if let Some(e) = stopped {
                return Err(e.into());
            }
            if let Some((a, b)) = window {
                let w = Window::cube(session.spec(), a, b);
                let report = verify_decomposition_window(&session, &w)?;
                println!("colour classes {}", session.colours());
                return emit(&report, json);
            }
            Ok(())
        }
        Command::Product {
            left,
            right,
            steps,
            window,
            json,
        } => {
            let l = Decomposition::parse(&read(&left)?)?;
            let r = Decomposition::parse(&read(&right)?)?;
            let window = window.as_deref().map(parse_range).transpose()?;
            if let Some((a, _)) = window {
                if a < 0 {
                    return Err(input("product labels are non-negative"));
                }
            }
            let mut session = ProductSession::new(l, r, CoverOptions::default())?;
            for _ in 0..steps {
                let r = session.step()?;
                println!(
                    "step {} colour {} M {} N {} half-width {} switched {} path {}",
                    r.k, r.colour, r.m, r.n, r.half_width, r.switched_edges, r.path_length
                );
            }
            let Some(m) = session.stable_bound() else { return Ok(()) };
            let (a, b) = window.unwrap_or((0, m as i64));
            let report = session.verify_window(a as u64, b as u64)?;
            println!("colour classes {}", session.factors().colours());
            emit(&report, json)
        }
        Command::Verify {
            colouring,
            window,
            json,
        } => {
            let text = read(&colouring)?;
            if is_checkpoint(&text) {
                let session = Session::restore(&text, CoverOptions::default())?;
                let (a, b) = parse_range(window.as_deref().ok_or_else(|| input("checkpoints need --window"))?)?;
                let report = verify_decomposition_window(&session, &Window::cube(session.spec(), a, b))?;
                return emit(&report, json);
            }
            let c = Colouring::from_text(&text)?;
            let report = match window.as_deref().map(parse_range).transpose()? {
                Some((a, b)) => summarize_window(&c, &Window::cube(c.spec(), a, b)),
                None => verify_colouring(&c),
            };
            emit(&report, json)
        }
        Command::Trace { source, from, colour } => {
            let c = colouring_of(&source)?;
            if colour == 0 || colour > c.colours() {
                return Err(input(format!("colour {colour} out of range 1..={}", c.colours())));
            }
            let v = c.spec().parse_element(&from)?;
            let t = trace(&c, &v, colour - 1, None)?;
            let middle: Vec<String> = t.vertices.iter().map(ToString::to_string).collect();
            match &t.kind {
                TraceKind::FiniteCycle => println!("cycle of length {}", t.edges.len()),
                TraceKind::DoubleRay { tails } => {
                    println!("double-ray with a middle path of {} edges", t.edges.len());
                    for (k, tail) in tails.iter().enumerate() {
                        println!("tail {} from {} step {}", k + 1, tail.anchor, tail.step);
                    }
                }
            }
            println!("{}", middle.join(" "));
            Ok(())
        }
        Command::Export {
            source,
            format,
            window,
            out,
        } => {
            let c = colouring_of(&source)?;
            let text = match format {
                Format::Text => c.to_text(),
                Format::Dot | Format::Svg => {
                    let (a, b) = parse_range(window.as_deref().ok_or_else(|| input("dot and svg need --window"))?)?;
                    let d = Drawing::from_window(&c, &Window::cube(c.spec(), a, b));
                    if matches!(format, Format::Dot) {
                        d.to_dot()
                    } else {
                        d.to_svg()
                    }
                }
            };
            write_or_print(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Violations) => ExitCode::from(3),
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
