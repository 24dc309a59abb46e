//! Command-line front end: parses `.cog` files, runs checks and reports
//! verdicts as text or JSON.
//!
//! Exit codes: 0 when every check passes, 1 when some check fails, 2 on
//! usage, input or parse errors.

mod demo;
mod render;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cogame::coterm::{bisimilar, bisimilar_bounded};
use cogame::equilibria::{convertible, nash_eq, sgpe, ConvValue};
use cogame::histories::{is_history_of, strategy_history};
use cogame::oracle::{self, GameConfig, TieBreak};
use cogame::semantics::{alw_leads_to_leaf, leads_to_leaf, s2u};
use cogame::{dsl, families, CoSystem, Kind, Outcome};

use report::{digest, Check, Report, SCHEMA_VERSION};

/// Default depth for bounded bisimilarity on parametric systems.
pub const DEFAULT_BISIM_DEPTH: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "cogame", version, about = "Check equilibrium predicates on infinite games written as .cog equations")]
pub struct Cli {
    /// Print the machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run predicate checks on a strategy. Runs all four when none is given.
    Check {
        file: PathBuf,
        /// Nash equilibrium.
        #[arg(long)]
        nash: bool,
        /// Subgame perfect equilibrium.
        #[arg(long)]
        sgpe: bool,
        /// Following the choices from the root reaches a leaf.
        #[arg(long)]
        ltl: bool,
        /// Following the choices from every node reaches a leaf.
        #[arg(long)]
        altl: bool,
    },
    /// Utility of an agent under a strategy.
    Eval {
        file: PathBuf,
        #[arg(long)]
        agent: String,
        /// Index the root equation is instantiated at.
        #[arg(long, default_value_t = 0)]
        n: u64,
    },
    /// Bisimilarity of two systems. Exact when both are non-parametric and
    /// no depth is given, otherwise bounded (default depth 64).
    Bisim {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Whether the second strategy arises from the first by changing one
    /// agent's choices.
    Convert {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        agent: String,
    },
    /// The history a strategy follows from the root, as lasso text.
    History { file: PathBuf },
    /// Cut a system at a fixed depth into a finite tree, printed as .cog text.
    Truncate {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Games: run backward induction and check the result by exhaustive
        /// enumeration. Strategies: check the truncation itself.
        #[arg(long)]
        solve: bool,
        #[arg(long, value_enum, default_value_t = Tie::Left)]
        tiebreak: Tie,
    },
    /// Build a named family and run the full suite of checks on its profiles.
    Demo {
        #[arg(value_enum)]
        family: Family,
    },
    /// Compare the engine with brute-force enumeration on random finite games.
    Crosscheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tie {
    Left,
    Right,
}

impl From<Tie> for TieBreak {
    fn from(t: Tie) -> TieBreak {
        match t {
            Tie::Left => TieBreak::PreferLeft,
            Tie::Right => TieBreak::PreferRight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Dollar,
    Centipede,
}

/// Errors that end a run with exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: dsl::ParseError },
    #[error("{0}")]
    Core(#[from] cogame::Error),
    #[error("{0}")]
    Usage(String),
}

struct Input {
    path: String,
    bytes: Vec<u8>,
    sys: CoSystem,
}

fn load(path: &Path) -> Result<Input, CliError> {
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: shown.clone(),
        source,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let sys = dsl::parse(&text).map_err(|source| CliError::Parse {
        path: shown.clone(),
        source,
    })?;
    Ok(Input {
        path: shown,
        bytes,
        sys,
    })
}

fn strategy(input: &Input) -> Result<(), CliError> {
    if input.sys.kind == Kind::Strategy {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{}: expected a strategy, found a game", input.path)))
    }
}

fn subject(input: &Input) -> String {
    input.sys.names[input.sys.root.class].clone()
}

fn verdict_check(name: &str, input: &Input, v: &cogame::Verdict) -> Check {
    Check::from_verdict(name, &subject(input), v).with_lines(render::evidence(&input.sys, v))
}

fn execute(cmd: &Command) -> Result<(String, String, Vec<Check>), CliError> {
    let mut checks = Vec::new();
    let (name, digest) = match cmd {
        Command::Check {
            file,
            nash,
            sgpe: want_sgpe,
            ltl,
            altl,
        } => {
            let input = load(file)?;
            strategy(&input)?;
            let all = !(*nash || *want_sgpe || *ltl || *altl);
            let s = &input.sys;
            if all || *ltl {
                checks.push(verdict_check("ltl", &input, &leads_to_leaf(s, s.root)?));
            }
            if all || *altl {
                checks.push(verdict_check("altl", &input, &alw_leads_to_leaf(s)?));
            }
            if all || *nash {
                checks.push(verdict_check("nash", &input, &nash_eq(s)?));
            }
            if all || *want_sgpe {
                checks.push(verdict_check("sgpe", &input, &sgpe(s)?));
            }
            ("check", digest([input.bytes.as_slice()]))
        }
        Command::Eval { file, agent, n } => {
            let input = load(file)?;
            strategy(&input)?;
            let a = input.sys.agent(agent)?;
            let check = match s2u(&input.sys, &a)? {
                Some(u) => {
                    let value = u.eval(*n);
                    Check::new(
                        "eval",
                        &subject(&input),
                        Outcome::Holds,
                        value.to_string(),
                        json!({ "agent": a, "n": n, "utility": u, "value": value }),
                    )
                }
                None => Check::new(
                    "eval",
                    &subject(&input),
                    Outcome::Fails,
                    "no utility: the strategy does not lead to a leaf",
                    json!({ "agent": a, "n": n, "utility": null, "value": null }),
                ),
            };
            checks.push(check);
            ("eval", digest([input.bytes.as_slice()]))
        }
        Command::Bisim { a, b, depth } => {
            let (x, y) = (load(a)?, load(b)?);
            let exact = depth.is_none() && !x.sys.is_parametric() && !y.sys.is_parametric();
            let v = if exact {
                bisimilar(&x.sys, &y.sys)?
            } else {
                bisimilar_bounded(&x.sys, &y.sys, depth.unwrap_or(DEFAULT_BISIM_DEPTH))?
            };
            let subject = format!("{} ~ {}", subject(&x), subject(&y));
            checks.push(Check::from_verdict("bisim", &subject, &v).with_lines(render::evidence(&x.sys, &v)));
            ("bisim", digest([x.bytes.as_slice(), y.bytes.as_slice()]))
        }
        Command::Convert { a, b, agent } => {
            let (x, y) = (load(a)?, load(b)?);
            let who = x.sys.agent(agent)?;
            let c = convertible(&x.sys, &y.sys, &who)?;
            let outcome = if c.value == ConvValue::NotConvertible {
                Outcome::Fails
            } else {
                Outcome::Holds
            };
            let subject = format!("{} -> {}", subject(&x), subject(&y));
            checks.push(Check::new(
                "convert",
                &subject,
                outcome,
                c.value.to_string(),
                serde_json::to_value(&c).expect("serializable"),
            )
            .with_lines(render::conversion(&x.sys, &y.sys, &c)));
            ("convert", digest([x.bytes.as_slice(), y.bytes.as_slice()]))
        }
        Command::History { file } => {
            let input = load(file)?;
            strategy(&input)?;
            let h = strategy_history(&input.sys)?;
            let game = input.sys.strategy_to_game()?;
            let ok = is_history_of(&game, &h)?;
            checks.push(Check::new(
                "history",
                &subject(&input),
                if ok { Outcome::Holds } else { Outcome::Fails },
                h.to_string(),
                json!({ "history": h.to_string(), "prefix": h.prefix, "cycle": h.cycle, "is_history_of_game": ok }),
            ));
            ("history", digest([input.bytes.as_slice()]))
        }
        Command::Truncate {
            file,
            depth,
            solve,
            tiebreak,
        } => {
            let input = load(file)?;
            let subj = subject(&input);
            match input.sys.kind {
                Kind::Game => {
                    let tree = families::truncate_game(&input.sys, *depth)?;
                    checks.push(tree_check(&subj, *depth, &oracle::embed(&tree), tree.size()));
                    if *solve {
                        let s = oracle::backward_induction(&tree, (*tiebreak).into());
                        let root = match &s {
                            oracle::Tree::Node { choice, .. } => format!(", root plays {choice}"),
                            oracle::Tree::Leaf(_) => String::new(),
                        };
                        checks.push(Check::new(
                            "backward_induction",
                            &subj,
                            Outcome::Holds,
                            format!("outcome {}{root}", render::payoffs(s.outcome())),
                            json!({ "outcome": s.outcome(), "strategy": dsl::print(&oracle::embed(&s)) }),
                        ));
                        let v = oracle::exhaustive_nash(&s)?;
                        checks.push(Check::from_verdict("exhaustive_nash", &subj, &v).with_lines(render::evidence(&input.sys, &v)));
                    }
                }
                Kind::Strategy => {
                    let tree = families::truncate_strategy(&input.sys, *depth)?;
                    checks.push(tree_check(&subj, *depth, &oracle::embed(&tree), tree.size()));
                    if *solve {
                        let v = oracle::exhaustive_nash(&tree)?;
                        let mut lines = Vec::new();
                        if let cogame::Evidence::FiniteDeviation { .. } = v.evidence {
                            lines = render::evidence(&input.sys, &v);
                        }
                        checks.push(Check::from_verdict("exhaustive_nash", &subj, &v).with_lines(lines));
                        let perfect = oracle::finite_sgpe(&tree);
                        checks.push(Check::new(
                            "finite_sgpe",
                            &subj,
                            if perfect { Outcome::Holds } else { Outcome::Fails },
                            if perfect { "every node's owner weakly prefers its choice" } else { "some owner prefers the other child" },
                            json!({ "sgpe": perfect }),
                        ));
                    }
                }
            }
            ("truncate", digest([input.bytes.as_slice()]))
        }
        Command::Demo { family } => {
            checks = demo::run(*family)?;
            let label = format!("demo {family:?}");
            ("demo", digest([label.as_bytes()]))
        }
        Command::Crosscheck { seed, count } => {
            checks = crosscheck(*seed, *count)?;
            let label = format!("crosscheck {seed} {count}");
            ("crosscheck", digest([label.as_bytes()]))
        }
    };
    Ok((name.to_owned(), digest, checks))
}

fn tree_check(subject: &str, depth: usize, sys: &CoSystem, size: usize) -> Check {
    let text = dsl::print(sys);
    Check::new(
        "truncate",
        subject,
        Outcome::Holds,
        format!("{size} nodes at depth {depth}"),
        json!({ "depth": depth, "nodes": size, "tree": text }),
    )
    .with_lines(text.lines().map(str::to_owned).collect())
}

/// Engine against oracle on random finite games and random strategies.
fn crosscheck(seed: u64, count: u64) -> Result<Vec<Check>, CliError> {
    let cfg = GameConfig::default();
    let mut bi_failures = Vec::new();
    let mut nash_mismatch = Vec::new();
    let mut sgpe_mismatch = Vec::new();
    let mut cases = 0u64;
    for i in 0..count {
        let s = seed.wrapping_add(i);
        let g = oracle::random_game(s, &cfg);
        let mut strategies = vec![
            oracle::backward_induction(&g, TieBreak::PreferLeft),
            oracle::backward_induction(&g, TieBreak::PreferRight),
        ];
        for bi in &strategies {
            if !oracle::exhaustive_nash(bi)?.is_holds() {
                bi_failures.push(s);
            }
        }
        strategies.push(oracle::random_strategy(s, &g));
        for st in &strategies {
            cases += 1;
            let sys = oracle::embed(st);
            if nash_eq(&sys)?.is_holds() != oracle::exhaustive_nash(st)?.is_holds() {
                nash_mismatch.push(s);
            }
            if sgpe(&sys)?.is_holds() != oracle::finite_sgpe(st) {
                sgpe_mismatch.push(s);
            }
        }
    }
    let check = |name: &str, bad: Vec<u64>, total: u64, what: &str| {
        let outcome = if bad.is_empty() { Outcome::Holds } else { Outcome::Fails };
        Check::new(
            name,
            "random games",
            outcome,
            format!("{} of {total} {what}", bad.len()),
            json!({ "seed": seed, "count": count, "cases": total, "failing_seeds": bad }),
        )
    };
    Ok(vec![
        check("backward_induction_nash", bi_failures, 2 * count, "backward induction solutions fail exhaustive Nash"),
        check("nash_vs_oracle", nash_mismatch, cases, "strategies disagree with enumeration"),
        check("sgpe_vs_oracle", sgpe_mismatch, cases, "strategies disagree with the recursive check"),
    ])
}

/// Runs the command line `args` (program name first), writing the report to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return 2;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    let start = Instant::now();
    let (command, input_digest, checks) = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let report = Report {
        tool: "cogame",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        command,
        input_digest,
        checks,
        timing_ms: start.elapsed().as_secs_f64() * 1000.0,
    };
    let text = if cli.json {
        serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
    } else if let Command::Eval { .. } = cli.command {
        format!("{}\n", report.checks[0].summary)
    } else {
        report.human()
    };
    let _ = out.write_all(text.as_bytes());
    report.exit_code()
}
