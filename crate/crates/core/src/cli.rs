//! Command-line front end. [`run`] does all the work and returns the exit
//! code with both output streams, so the binary is a thin wrapper.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::factorize::{c_factorize, lz_factorize, semi_greedy, Factorization};
use crate::grammar::Grammar;
use crate::oracle::{summarize, OracleBudget};
use crate::repair::{enumerate_repair, repair, strategy_graph, Policy};
use crate::verify::{reports_json_lines, reports_table, run_suite, Claim};
use crate::words::{Alphabet, Family, Generator, Word};

/// Environment variable holding the default oracle length budget.
pub const ORACLE_BUDGET_ENV: &str = "FIBSLP_ORACLE_BUDGET";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fibslp",
    version,
    about = "Grammar compression, LZ factorizations and smallest SLPs of Fibonacci-family words"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a word.
    Gen {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compress with RePair.
    Repair {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = PolicyArg::First)]
        policy: PolicyArg,
        /// Print every replacement step.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Every RePair grammar over all tie-breaks, one per line.
    RepairAll {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// LZ-factorization.
    Lz {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// C-factorization.
    Cfact {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Semi-greedy factorization.
    Sg {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// g-factorization of a grammar given as JSON (`-` reads stdin).
    Gfact {
        grammar: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Expand a grammar given as JSON (`-` reads stdin).
    Expand {
        grammar: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Derivation tree of a grammar given as JSON, as DOT.
    Tree {
        grammar: PathBuf,
        /// Draw only the partial derivation tree.
        #[arg(long)]
        partial: bool,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
    },
    /// Exact smallest grammar size, optionally with every smallest grammar.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        enumerate: bool,
        /// Longest word the search accepts.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Strategy graph of F_n.
    Graph {
        n: u32,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
    },
    /// Run the claim checks.
    Verify {
        /// `all` or a comma-separated list of claim ids.
        #[arg(
            long,
            default_value = "all",
            long_help = "`all` or a comma-separated list of claim ids:\n  \
                fib-length-sums, forbidden-factors, most-frequent-bigrams, lz-of-fib,\n  \
                rotation-identities, lz-of-p, gfact-bound, morphism-composition,\n  \
                repair-census, replace-ab, fib-smallest-size, replace-ba, square-shift,\n  \
                semi-greedy-shape, lz-lower-bound, opt-equals-repair, strategy-1..strategy-16"
        )]
        claims: String,
        #[arg(long, default_value_t = 12)]
        nmax: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Args)]
struct Input {
    /// A literal word or a generator spec such as `fib:7`, `p:4`, `q:3@ba`.
    word: Option<String>,
    /// Read the word from a file (`-` reads stdin).
    #[arg(long, conflicts_with = "word")]
    file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    First,
    Lex,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Policy {
        match p {
            PolicyArg::First => Policy::FirstByScan,
            PolicyArg::Lex => Policy::Lexicographic,
        }
    }
}

/// Exit code and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = std::result::Result<String, Failure>;

/// Parses a generator spec (`fib:n`, `p:i`, `q:i`, optional `@ab`/`@ba`).
pub fn parse_generator(spec: &str) -> Option<crate::Result<Word>> {
    let (body, alphabet) = match spec.split_once('@') {
        Some((b, "ab")) => (b, Alphabet::ab()),
        Some((b, "ba")) => (b, Alphabet::ba()),
        Some(_) => return Some(Err(Error::Parse(format!("bad alphabet suffix in `{spec}`")))),
        None => (spec, Alphabet::ab()),
    };
    let (family, index) = body.split_once(':')?;
    let family = match family {
        "fib" | "f" => Family::F,
        "p" => Family::P,
        "q" => Family::Q,
        _ => return None,
    };
    Some(
        index
            .parse::<u32>()
            .map_err(|_| Error::Parse(format!("bad index in `{spec}`")))
            .and_then(|i| Generator::default().word(family, i, alphabet)),
    )
}

fn read_source(path: &PathBuf, stdin: &mut dyn Read) -> std::result::Result<String, Failure> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        stdin
            .read_to_string(&mut text)
            .map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    }
    Ok(text)
}

fn read_word(input: &Input, stdin: &mut dyn Read) -> std::result::Result<Word, Failure> {
    match (&input.word, &input.file) {
        (Some(s), None) => match parse_generator(s) {
            Some(w) => Ok(w?),
            None => Ok(Word::terminals(s)),
        },
        (None, Some(path)) => {
            let text = read_source(path, stdin)?;
            Ok(Word::terminals(text.trim_end_matches(['\n', '\r'])))
        }
        _ => Err(Failure::Usage("give exactly one of a word or --file".into())),
    }
}

fn read_grammar(path: &PathBuf, stdin: &mut dyn Read) -> std::result::Result<Grammar, Failure> {
    let text = read_source(path, stdin)?;
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    Ok(Grammar::from_json(line)?)
}

fn only(format: Format, allowed: &[Format]) -> std::result::Result<(), Failure> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "format {format:?} is not available here; use one of {allowed:?}"
        )))
    }
}

fn factorization(f: &Factorization, format: Format) -> CmdResult {
    only(format, &[Format::Text, Format::Json])?;
    Ok(match format {
        Format::Json => f.to_json() + "\n",
        _ => f.to_text() + "\n",
    })
}

fn oracle_budget(flag: Option<usize>, enumerate: bool) -> std::result::Result<OracleBudget, Failure> {
    let base = if enumerate {
        OracleBudget::for_enumeration()
    } else {
        OracleBudget::for_size()
    };
    let env = match std::env::var(ORACLE_BUDGET_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            Failure::Usage(format!("{ORACLE_BUDGET_ENV} must be a positive integer, got `{v}`"))
        })?),
        Err(_) => None,
    };
    Ok(match flag.or(env) {
        Some(len) => base.with_max_len(len),
        None => base,
    })
}

fn execute(cli: Cli, stdin: &mut dyn Read) -> CmdResult {
    match cli.command {
        Command::Gen { input, format } => {
            only(format, &[Format::Text, Format::Json])?;
            let w = read_word(&input, stdin)?;
            Ok(match format {
                Format::Json => serde_json::json!({ "word": w.to_string() }).to_string() + "\n",
                _ => format!("{w}\n"),
            })
        }
        Command::Repair {
            input,
            policy,
            trace,
            format,
        } => {
            only(format, &[Format::Text, Format::Json])?;
            let w = read_word(&input, stdin)?;
            let out = repair(&w, &Policy::from(policy))?;
            Ok(match (format, trace) {
                (Format::Json, false) => out.grammar.to_json() + "\n",
                (Format::Json, true) => {
                    let steps: Vec<String> =
                        out.trace.to_text().lines().map(str::to_owned).collect();
                    serde_json::json!({
                        "grammar": out.grammar.to_json_value(),
                        "trace": steps,
                    })
                    .to_string()
                        + "\n"
                }
                (_, with_trace) => {
                    let mut s = String::new();
                    if with_trace {
                        s.push_str(&out.trace.to_text());
                    }
                    let _ = writeln!(s, "size {}", out.grammar.size());
                    let _ = writeln!(s, "{}", out.grammar);
                    s
                }
            })
        }
        Command::RepairAll { input, format } => {
            only(format, &[Format::Text, Format::Json])?;
            let w = read_word(&input, stdin)?;
            let all = enumerate_repair(&w)?;
            let mut s = String::new();
            if format == Format::Text {
                let _ = writeln!(s, "{} grammars", all.len());
            }
            for g in &all {
                let line = match format {
                    Format::Json => g.to_json(),
                    _ => format!("size {}: {g}", g.size()),
                };
                let _ = writeln!(s, "{line}");
            }
            Ok(s)
        }
        Command::Lz { input, format } => factorization(&lz_factorize(&read_word(&input, stdin)?)?, format),
        Command::Cfact { input, format } => factorization(&c_factorize(&read_word(&input, stdin)?)?, format),
        Command::Sg { input, format } => factorization(&semi_greedy(&read_word(&input, stdin)?)?, format),
        Command::Gfact { grammar, format } => {
            let g = read_grammar(&grammar, stdin)?;
            factorization(&g.g_factorization()?, format)
        }
        Command::Expand { grammar, format } => {
            only(format, &[Format::Text, Format::Json])?;
            let w = read_grammar(&grammar, stdin)?.expand()?;
            Ok(match format {
                Format::Json => serde_json::json!({ "word": w.to_string() }).to_string() + "\n",
                _ => format!("{w}\n"),
            })
        }
        Command::Tree {
            grammar,
            partial,
            format,
        } => {
            only(format, &[Format::Dot])?;
            let g = read_grammar(&grammar, stdin)?;
            Ok(if partial {
                g.partial_derivation_tree()?.to_dot()
            } else {
                g.derivation_tree()?.to_dot()?
            })
        }
        Command::Oracle {
            input,
            enumerate,
            budget,
            format,
        } => {
            only(format, &[Format::Text, Format::Json])?;
            let w = read_word(&input, stdin)?;
            let budget = oracle_budget(budget, enumerate)?;
            let (summary, grammars) = summarize(&w, enumerate, &budget)?;
            let mut s = String::new();
            match format {
                Format::Json => {
                    let _ = writeln!(s, "{}", serde_json::to_string(&summary).expect("serializes"));
                    for g in &grammars {
                        let _ = writeln!(s, "{}", g.to_json());
                    }
                }
                _ => {
                    let _ = writeln!(s, "g* = {}", summary.g_star);
                    let _ = writeln!(
                        s,
                        "bounds: lower {} upper {}",
                        summary.lower_bound, summary.upper_bound
                    );
                    if let Some(c) = summary.count {
                        let _ = writeln!(s, "{c} smallest grammars");
                    }
                    for g in &grammars {
                        let _ = writeln!(s, "{g}");
                    }
                }
            }
            Ok(s)
        }
        Command::Graph { n, format } => {
            only(format, &[Format::Dot, Format::Text, Format::Json])?;
            let g = strategy_graph(n)?;
            Ok(match format {
                Format::Dot => g.to_dot(),
                Format::Json => {
                    let edges: Vec<[String; 2]> = g
                        .edges
                        .iter()
                        .map(|&(a, b)| [g.vertices[a].to_string(), g.vertices[b].to_string()])
                        .collect();
                    serde_json::json!({ "n": n, "paths": g.path_count(), "edges": edges }).to_string()
                        + "\n"
                }
                Format::Text => {
                    let mut s = format!("{} source-to-sink paths\n", g.path_count());
                    for &(a, b) in &g.edges {
                        let _ = writeln!(s, "{} -> {}", g.vertices[a], g.vertices[b]);
                    }
                    s
                }
            })
        }
        Command::Verify {
            claims,
            nmax,
            seed,
            format,
        } => {
            only(format, &[Format::Text, Format::Json])?;
            let selection = Claim::parse_selection(&claims).map_err(|e| Failure::Usage(e.to_string()))?;
            let reports = run_suite(&selection, nmax, seed);
            let out = match format {
                Format::Json => reports_json_lines(&reports),
                _ => reports_table(&reports),
            };
            if reports.iter().all(|r| r.passed) {
                Ok(out)
            } else {
                Err(Failure::Check(out))
            }
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(cli, stdin) {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(Failure::Check(stdout)) => Outcome {
            code: EXIT_CHECK_FAILED,
            stdout,
            stderr: "some checks failed\n".into(),
        },
        Err(Failure::Usage(msg)) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Lib(e)) => {
            let code = match e {
                Error::Resource { .. } => EXIT_RESOURCE,
                _ => EXIT_USAGE,
            };
            let mut stderr = format!("error: {e}\n");
            if let Error::Resource {
                lower: Some(l),
                upper: Some(u),
                ..
            } = e
            {
                let _ = writeln!(stderr, "bounds: lower {l} upper {u}");
            }
            Outcome {
                code,
                stdout: String::new(),
                stderr,
            }
        }
    }
}
