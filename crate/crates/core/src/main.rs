use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use uacomm::conlat::{PentagonMode, Property};
use uacomm::corpus::CorpusConfig;
use uacomm::hunt::{HuntConfig, HuntTarget};
use uacomm::notation::{parse_blocks, parse_pairs};
use uacomm::report::{self, Report, SuiteConfig, TermKind};
use uacomm::{
    fixtures, BinaryRelation, Bounds, Congruence, Error, FiniteAlgebra, Result, Tolerance,
};

#[derive(Parser, Debug)]
#[command(
    name = "uacomm",
    version,
    about = "Centralizers, commutators and congruence lattices of finite algebras"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Record wall-clock timings in structured output (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    timings: bool,
    /// Largest closure (subpower) the term searches may build.
    #[arg(long, global = true)]
    max_closure: Option<usize>,
    /// Most operation applications one closure may perform.
    #[arg(long, global = true)]
    max_steps: Option<u64>,
    /// Largest universe for which all tolerances are enumerated.
    #[arg(long, global = true)]
    max_tolerance_size: Option<usize>,
    /// Largest congruence lattice computed.
    #[arg(long, global = true)]
    max_lattice: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Congruence lattice.
    Con {
        /// Algebra document, or a fixture name such as z4, s3, l2, sl2, set3.
        alg: String,
        /// Also print the Hasse diagram in DOT after the text report.
        #[arg(long)]
        dot: bool,
    },
    /// Term-condition commutator [alpha, beta].
    Comm {
        alg: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
    },
    /// Centralizer relation C(S,T;delta).
    Cent {
        alg: String,
        #[arg(long = "S", alias = "s")]
        s: String,
        #[arg(long = "T", alias = "t")]
        t: String,
        #[arg(long)]
        delta: String,
    },
    /// Every tolerance, with abelianness and the congruence it generates.
    Tol { alg: String },
    /// Labeled pentagons in Con(A) and their side conditions.
    Pentagons {
        alg: String,
        #[arg(long, default_value = "fig9")]
        mode: String,
    },
    /// Term search.
    Terms {
        alg: String,
        #[arg(long)]
        kind: String,
    },
    /// Lattice property A, B or C.
    Check {
        alg: String,
        #[arg(long)]
        property: String,
    },
    /// Clause suite and consistency checks over a random corpus.
    Suite {
        #[arg(long, default_value_t = 200)]
        random: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
        /// Sampled instances per algebra.
        #[arg(long, default_value_t = 10)]
        instances: usize,
        /// Run only the clause suite.
        #[arg(long)]
        clauses_only: bool,
    },
    /// Exhaustive search over small unary algebras.
    Hunt {
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 3)]
        max_size: usize,
        #[arg(long, default_value_t = 2)]
        max_ops: usize,
        #[arg(long)]
        first_only: bool,
    },
}

fn load(spec: &str) -> Result<FiniteAlgebra> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read {spec}: {e}")))?;
        return FiniteAlgebra::from_json(&text);
    }
    fixtures::by_name(spec).ok_or_else(|| {
        Error::Invalid(format!(
            "`{spec}` is neither a readable file nor a known fixture"
        ))
    })
}

fn congruence_arg(alg: &FiniteAlgebra, text: &str) -> Result<Congruence> {
    let n = alg.size();
    let mut blocks = parse_blocks(text)?;
    let mut seen = vec![false; n];
    for &e in blocks.iter().flatten() {
        if e >= n {
            return Err(Error::ElementOutOfRange {
                element: e,
                size: n,
            });
        }
        seen[e] = true;
    }
    blocks.extend((0..n).filter(|&e| !seen[e]).map(|e| vec![e]));
    let c = Congruence::from_blocks(n, &blocks)?;
    if let Some(reason) = c.compatibility_failure(alg) {
        return Err(Error::NotCongruence(format!("{text}: {reason}")));
    }
    Ok(c)
}

fn tolerance_arg(alg: &FiniteAlgebra, text: &str) -> Result<Tolerance> {
    let rel = BinaryRelation::reflexive_symmetric(alg.size(), &parse_pairs(text)?)?;
    Tolerance::new(alg, rel).map_err(|e| match e {
        Error::NotTolerance(reason) => Error::NotTolerance(format!("{text}: {reason}")),
        other => other,
    })
}

enum Output {
    Report(Report),
    Dot(String),
}

fn execute(cli: &Cli, bounds: &Bounds) -> Result<Output> {
    let dot_only = |what: &str| -> Result<()> {
        if cli.format == Format::Dot {
            return Err(Error::Invalid(format!("`{what}` has no DOT output")));
        }
        Ok(())
    };
    let out = match &cli.command {
        Command::Con { alg, dot } => {
            let alg = load(alg)?;
            if cli.format == Format::Dot {
                return Ok(Output::Dot(report::con_dot(&alg, None, bounds)?));
            }
            let mut r = report::con(&alg, bounds)?;
            if *dot {
                let diagram = report::con_dot(&alg, None, bounds)?;
                if let Some(w) = r.witnesses.as_object_mut() {
                    w.insert("dot".into(), json!(diagram));
                }
                r.text.push_str(&diagram);
            }
            r
        }
        Command::Comm { alg, alpha, beta } => {
            dot_only("comm")?;
            let alg = load(alg)?;
            let (a, b) = (congruence_arg(&alg, alpha)?, congruence_arg(&alg, beta)?);
            report::comm(&alg, &a, &b, bounds)?
        }
        Command::Cent { alg, s, t, delta } => {
            dot_only("cent")?;
            let alg = load(alg)?;
            let (s, t) = (tolerance_arg(&alg, s)?, tolerance_arg(&alg, t)?);
            let d = congruence_arg(&alg, delta)?;
            report::cent(&alg, &s, &t, &d, bounds)?
        }
        Command::Tol { alg } => {
            dot_only("tol")?;
            report::tol(&load(alg)?, bounds)?
        }
        Command::Pentagons { alg, mode } => {
            let alg = load(alg)?;
            let mode: PentagonMode = mode.parse()?;
            if cli.format == Format::Dot {
                return Ok(Output::Dot(report::con_dot(&alg, Some(mode), bounds)?));
            }
            report::pentagons(&alg, mode, bounds)?
        }
        Command::Terms { alg, kind } => {
            dot_only("terms")?;
            let kind: TermKind = kind.parse()?;
            report::terms(&load(alg)?, kind, bounds)?
        }
        Command::Check { alg, property } => {
            dot_only("check")?;
            let which: Property = property.parse()?;
            report::check(&load(alg)?, which, bounds)?
        }
        Command::Suite {
            random,
            seed,
            max_size,
            instances,
            clauses_only,
        } => {
            dot_only("suite")?;
            if *max_size < 2 {
                return Err(Error::Invalid("--max-size must be at least 2".into()));
            }
            let cfg = SuiteConfig {
                corpus: CorpusConfig::new(*random, *seed, *max_size),
                instances: *instances,
                consistency: !clauses_only,
            };
            report::suite(&cfg, bounds, cli.timings)?
        }
        Command::Hunt {
            target,
            max_size,
            max_ops,
            first_only,
        } => {
            dot_only("hunt")?;
            let target: HuntTarget = target.parse()?;
            let cfg = HuntConfig {
                target,
                max_size: *max_size,
                max_ops: *max_ops,
                first_only: *first_only,
            };
            report::hunt_report(&cfg, bounds, cli.timings)?
        }
    };
    Ok(Output::Report(out))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Con { .. } => "con",
        Command::Comm { .. } => "comm",
        Command::Cent { .. } => "cent",
        Command::Tol { .. } => "tol",
        Command::Pentagons { .. } => "pentagons",
        Command::Terms { .. } => "terms",
        Command::Check { .. } => "check",
        Command::Suite { .. } => "suite",
        Command::Hunt { .. } => "hunt",
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn write_out(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: cannot write output: {e}");
            std::process::exit(2);
        }
    }
}

fn emit(cli: &Cli, r: &Report) {
    match cli.format {
        Format::Json => write_out(&r.to_json()),
        _ => write_out(&format!(
            "{}verdict: {}\n",
            r.text,
            json!(r.verdict).as_str().unwrap_or_default()
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut bounds = Bounds::default();
    if let Some(v) = cli.max_closure {
        bounds.max_closure = v;
    }
    if let Some(v) = cli.max_steps {
        bounds.max_steps = v;
    }
    if let Some(v) = cli.max_tolerance_size {
        bounds.max_tolerance_size = v;
    }
    if let Some(v) = cli.max_lattice {
        bounds.max_lattice = v;
    }
    match execute(&cli, &bounds) {
        Ok(Output::Dot(d)) => {
            write_out(&d);
            ExitCode::SUCCESS
        }
        Ok(Output::Report(r)) => {
            emit(&cli, &r);
            ExitCode::from(r.verdict.exit_code() as u8)
        }
        Err(e) if e.is_exhausted() => {
            let r = Report::exhausted(command_name(&cli.command), json!({ "bounds": bounds }), &e);
            emit(&cli, &r);
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
