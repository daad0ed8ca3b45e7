//! Command-line driver.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::infer::{analyze, Analysis, Options};
use crate::oracle::{Interpreter, Status};
use crate::par::Execution;
use crate::parse::{parse_atom, parse_user_program};
use crate::sample;

#[derive(Debug, Parser)]
#[command(
    name = "numterm",
    version,
    about = "Termination conditions for integer logic programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infer a termination condition for the program's query directive.
    Analyze {
        file: PathBuf,
        /// Print the specialized program.
        #[arg(long)]
        dump_adorned: bool,
        /// Print the symbolic level mapping of each adorned predicate.
        #[arg(long)]
        dump_levelmaps: bool,
        /// Print each decrease obligation with its outcome.
        #[arg(long)]
        dump_sigma: bool,
        /// Emit the full report as JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Run this many sampled queries satisfying the condition.
        #[arg(long, default_value_t = 0)]
        check: usize,
        /// Step budget per sampled query.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Seed for sampled queries.
        #[arg(long, env = "NUMTERM_SEED", default_value_t = sample::DEFAULT_SEED)]
        seed: u64,
        /// Disable data-parallel search.
        #[arg(long)]
        sequential: bool,
    },
    /// Run a goal with the reference interpreter.
    Run {
        file: PathBuf,
        #[arg(long)]
        goal: String,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {}", path.display(), e)))
}

fn program_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "program".into())
}

fn report_error(e: &Error, err: &mut dyn Write) -> i32 {
    if e.is_input() {
        let _ = writeln!(err, "input error: {}", e);
        1
    } else {
        let _ = writeln!(err, "cap error: {}", e);
        2
    }
}

fn dumps(
    a: &Analysis,
    adorned: bool,
    levelmaps: bool,
    sigma: bool,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    if adorned {
        writeln!(out, "% adorned program")?;
        for s in a.sets.values() {
            writeln!(out, "% {}", s)?;
        }
        write!(out, "{}", a.adorned)?;
    }
    if levelmaps {
        writeln!(out, "% level maps")?;
        for m in a.maps.values() {
            writeln!(out, "{}", m)?;
        }
    }
    if sigma {
        writeln!(out, "% obligations")?;
        for s in &a.sccs {
            for (i, o) in s.obligations.iter().zip(&s.outcomes) {
                writeln!(out, "{}  % {}", a.obligations[*i], o)?;
            }
        }
    }
    Ok(())
}

fn check(
    a: &Analysis,
    n: usize,
    budget: u64,
    seed: u64,
    out: &mut dyn Write,
) -> std::io::Result<bool> {
    let interp = Interpreter::new(&a.program);
    let mut rng = sample::rng(seed);
    let points = sample::sample_satisfying(&a.query, &a.condition, n, -100, 100, &mut rng);
    let mut bad = 0;
    for p in &points {
        let goal = sample::query_atom(&a.query, &a.query.pred.name, p);
        match interp.run(&goal, budget) {
            Ok(r) if r.status == Status::AllFinite => {}
            Ok(r) => {
                bad += 1;
                writeln!(out, "check: {} {}", goal, r.status)?;
            }
            Err(e) => writeln!(out, "check: {} run error: {}", goal, e)?,
        }
    }
    writeln!(
        out,
        "check: {}/{} sampled queries terminated",
        points.len() - bad,
        points.len()
    )?;
    Ok(bad == 0)
}

/// Parses `args` and runs; returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match cli.command {
        Command::Analyze {
            file,
            dump_adorned,
            dump_levelmaps,
            dump_sigma,
            json,
            check: n,
            budget,
            seed,
            sequential,
        } => {
            let opts = Options {
                exec: if sequential {
                    Execution::Sequential
                } else {
                    Execution::Parallel
                },
            };
            let analysis = read(&file)
                .and_then(|src| parse_user_program(&program_name(&file), &src))
                .and_then(|p| analyze(&p, &opts));
            let a = match analysis {
                Ok(a) => a,
                Err(e) => return report_error(&e, err),
            };
            let written = if json {
                serde_json::to_string_pretty(&a.report())
                    .map_err(std::io::Error::other)
                    .and_then(|s| writeln!(out, "{}", s))
            } else {
                writeln!(out, "termination condition: {}", a.condition)
                    .and_then(|_| dumps(&a, dump_adorned, dump_levelmaps, dump_sigma, out))
            };
            let checked = match written {
                Ok(()) if n > 0 => check(&a, n, budget, seed, out),
                Ok(()) => Ok(true),
                Err(e) => Err(e),
            };
            match checked {
                Ok(_) => 0,
                Err(e) => {
                    let _ = writeln!(err, "output error: {}", e);
                    1
                }
            }
        }
        Command::Run { file, goal, budget } => {
            if budget == 0 {
                return report_error(&Error::input("budget must be at least 1"), err);
            }
            let parsed = read(&file)
                .and_then(|src| parse_user_program(&program_name(&file), &src))
                .and_then(|p| Ok((p, parse_atom(&goal)?)));
            let (p, g) = match parsed {
                Ok(x) => x,
                Err(e) => return report_error(&e, err),
            };
            match Interpreter::new(&p).run(&g, budget) {
                Ok(r) => {
                    let _ = writeln!(out, "status: {}", r.status);
                    let _ = writeln!(out, "steps: {}", r.steps);
                    for a in &r.answers {
                        let _ = writeln!(out, "answer: {}", a);
                    }
                    0
                }
                Err(e) => {
                    let _ = writeln!(err, "run error: {}", e);
                    1
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(name: &str) -> String {
        format!("{}/corpus/{}.npl", env!("CARGO_MANIFEST_DIR"), name)
    }

    fn cli(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["numterm"];
        full.extend_from_slice(args);
        let code = run_cli(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn analyze_prints_one_line() {
        let (code, out, _) = cli(&["analyze", &corpus("loop7")]);
        assert_eq!(code, 0);
        assert_eq!(out, "termination condition: true\n");
    }

    #[test]
    fn missing_file_is_input_error() {
        let (code, _, err) = cli(&["analyze", "missing.npl"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("input error: "), "{}", err);
    }

    #[test]
    fn run_subcommand() {
        let (code, out, _) = cli(&[
            "run",
            &corpus("loop7"),
            "--goal",
            "p(5)",
            "--budget",
            "10000",
        ]);
        assert_eq!(code, 0);
        assert!(out.starts_with("status: all finite\n"), "{}", out);
    }
}
