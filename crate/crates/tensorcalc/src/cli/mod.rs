//! The `tc` command line.
//!
//! Exit codes: 0 pass, 1 fail, 2 usage or input error.

mod suite;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::divergence::{eliminate_internal_contractions, silly_integrate_by_parts};
use crate::expr::{Contraction, LinComb};
use crate::numeval::{graded_coefficient, jets};
use crate::rewrite::{apply_rule, GradePolicy, Mode};
use crate::textio::{parse_file, print, print_contraction, Statement};

pub use suite::{builtin_names, canonical_text, load_suite, run_suite, Check, DimResult, SuiteError, SuiteReport, SuiteSpec};

#[derive(Parser, Debug)]
#[command(name = "tc", version, about = "Exact calculus for complete contractions of curvature tensors")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Print the canonical form of every statement.
    Canon { file: PathBuf },
    /// Per-term statistics as JSON.
    Stats { file: PathBuf },
    /// Apply one rule to every term.
    Rewrite {
        #[arg(long)]
        rule: String,
        /// Factor position.
        #[arg(long, default_value_t = 0)]
        at: usize,
        /// Extra slot arguments.
        #[arg(long, value_delimiter = ',')]
        args: Vec<usize>,
        #[arg(long)]
        track: bool,
        file: PathBuf,
    },
    /// Integrate internal contractions by parts.
    Divergence {
        #[arg(long, required = true)]
        eliminate: bool,
        #[arg(long)]
        track: bool,
        file: PathBuf,
    },
    /// Strip every derivative off `psi<h>`.
    Ibp {
        #[arg(long)]
        psi: u32,
        file: PathBuf,
    },
    /// Ambient-metric verification report.
    Ambient {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Graded coefficient of each statement on seeded jets.
    Numcheck {
        #[arg(long)]
        n: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        grade: Option<usize>,
        #[arg(long, default_value_t = 1)]
        jets: usize,
        file: PathBuf,
    },
    /// Run a verification suite (built-in name or TOML path).
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<i64>>,
    },
}

/// Usage or input problem: exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn read_statements(file: &PathBuf) -> Result<Vec<(Option<i64>, LinComb)>, Usage> {
    let src = std::fs::read_to_string(file).map_err(|e| Usage(format!("{}: {e}", file.display())))?;
    Ok(parse_file(&src, None)?
        .into_iter()
        .filter_map(|s| match s {
            Statement::Expr { lc, n, .. } => Some((n, lc)),
            Statement::SetN(_) => None,
        })
        .collect())
}

fn contractions(lc: &LinComb) -> impl Iterator<Item = &Contraction> {
    lc.terms.iter().map(|(_, c)| c)
}

fn emit(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

/// Run a parsed command; returns the output text and the pass verdict.
pub fn execute(cmd: &Cmd) -> Result<(String, bool), Usage> {
    match cmd {
        Cmd::Canon { file } => {
            let lines: Vec<String> = read_statements(file)?.iter().map(|(_, lc)| print(&canonical_text(lc))).collect();
            Ok((lines.join("\n"), true))
        }
        Cmd::Stats { file } => {
            let mut out = vec![];
            for (_, lc) in read_statements(file)? {
                for c in contractions(&lc) {
                    let s = c.stats();
                    out.push(json!({
                        "term": print_contraction(c),
                        "sigma": s.sigma,
                        "delta": s.delta,
                        "deltaBar": s.delta_bar,
                        "q": s.q,
                        "weight": s.weight,
                    }));
                }
            }
            Ok((emit(&Value::Array(out)), true))
        }
        Cmd::Rewrite { rule, at, args, track, file } => {
            let mode = if *track { Mode::Track } else { Mode::Discard };
            let mut lines = vec![];
            for (_, lc) in read_statements(file)? {
                let mut acc = LinComb::zero();
                let mut truncated = 0;
                for (k, c) in &lc.terms {
                    let r = apply_rule(rule, c, *at, args, mode)?;
                    acc.add_scaled(k, &r.total());
                    truncated += r.truncated;
                }
                lines.push(print(&canonical_text(&acc)));
                if truncated > 0 {
                    lines.push(format!("# {truncated} longer terms dropped"));
                }
            }
            Ok((lines.join("\n"), true))
        }
        Cmd::Divergence { track, file, .. } => {
            let mut certs = vec![];
            let mut ok = true;
            for (_, lc) in read_statements(file)? {
                for c in contractions(&lc) {
                    let policy = if *track { GradePolicy::track(c.sigma()) } else { GradePolicy::discard(c.sigma()) };
                    let cert = eliminate_internal_contractions(c, &policy)?;
                    ok &= cert.holds()?;
                    certs.push(cert.to_json());
                }
            }
            Ok((emit(&Value::Array(certs)), ok))
        }
        Cmd::Ibp { psi, file } => {
            let lines = read_statements(file)?
                .iter()
                .map(|(_, lc)| silly_integrate_by_parts(lc, *psi).map(|r| print(&r)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((lines.join("\n"), true))
        }
        Cmd::Ambient { n, json } => {
            let r = crate::ambient::verify_motlagh(*n)?;
            let v = serde_json::to_value(&r)?;
            let text = emit(&v);
            if let Some(p) = json {
                std::fs::write(p, &text)?;
            }
            Ok((text, r.nonzero))
        }
        Cmd::Numcheck { n, seed, grade, jets: count, file } => {
            let js = jets(*n as usize, *n as usize, *seed, *count);
            let mut rows = vec![];
            let mut zero = true;
            for (sn, lc) in read_statements(file)? {
                if sn.is_some_and(|k| k != *n) {
                    return Err(Usage(format!("statement written for n = {} but --n {n}", sn.unwrap())));
                }
                let lc = lc.at_n(*n)?.collect();
                let g = grade.unwrap_or_else(|| lc.min_sigma().unwrap_or(0));
                let vals = js.iter().map(|j| graded_coefficient(&lc, j, g).map(|v| v.to_string())).collect::<Result<Vec<_>, _>>()?;
                zero &= vals.iter().all(|v| v == "0");
                rows.push(json!({"expr": print(&lc), "grade": g, "values": vals}));
            }
            Ok((emit(&json!({"n": n, "seed": seed, "results": rows, "zero": zero})), zero))
        }
        Cmd::Verify { suite, n } => {
            let spec = load_suite(suite)?;
            let report = run_suite(&spec, n.as_deref());
            Ok((emit(&report.to_json()), report.pass()))
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = std::env::var("TC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match execute(&cli.cmd) {
        Ok((text, pass)) => {
            use std::io::Write;
            let _ = writeln!(std::io::stdout(), "{text}");
            if pass {
                0
            } else {
                1
            }
        }
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}
