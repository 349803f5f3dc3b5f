//! Verification suites as TOML data files.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::ambient::verify_motlagh;
use crate::divergence::{
    eliminate_internal_contractions, find_divergence, quadratic_shape, reduce_quadratic_weyl, silly_decomposed_coefficient,
    silly_multiplicity, QuadShape, SearchOpts,
};
use crate::expr::linearize::vanishes_at_leading_length_at;
use crate::expr::{canonicalize, Contraction, LinComb};
use crate::numeval::{graded_coefficient, jets};
use crate::ratcoef::{parse_coef, Rational};
use crate::rewrite::{normalize, GradePolicy, RuleSet};
use crate::textio::parse_with_n;

const BUILTIN: &[(&str, &str)] = &[
    ("aggelopoulou-prime", include_str!("../../suites/aggelopoulou-prime.toml")),
    ("crossed-square", include_str!("../../suites/crossed-square.toml")),
    ("empty", include_str!("../../suites/empty.toml")),
    ("korusxades", include_str!("../../suites/korusxades.toml")),
    ("korusxades2", include_str!("../../suites/korusxades2.toml")),
    ("korusxades4", include_str!("../../suites/korusxades4.toml")),
    ("pre-int", include_str!("../../suites/pre-int.toml")),
    ("sigma1", include_str!("../../suites/sigma1.toml")),
    ("silly", include_str!("../../suites/silly.toml")),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

#[derive(Clone, Debug, Deserialize)]
pub struct SuiteSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub dims: Vec<i64>,
    #[serde(default, rename = "check")]
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Check {
    NormalFormEmpty {
        expr: String,
        #[serde(default)]
        numeric_dims: Vec<i64>,
        #[serde(default = "one")]
        jets: usize,
    },
    Divergence {
        expr: String,
        targets: Vec<String>,
        expect: Vec<String>,
        #[serde(default)]
        numeric_dims: Vec<i64>,
        #[serde(default = "one")]
        jets: usize,
    },
    QuadraticShapes,
    Ambient {
        #[serde(default)]
        expect_net: BTreeMap<String, String>,
    },
    Eliminate {
        expr: String,
    },
    SillyMultiplicity {
        gammas: Vec<usize>,
        expect: String,
    },
    SillyDecomposed {
        gammas: Vec<usize>,
        expect: String,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?} (built in: {1})")]
    Unknown(String, String),
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error("bad suite file: {0}")]
    Format(String),
}

/// A built-in name or a path to a suite file.
pub fn load_suite(name: &str) -> Result<SuiteSpec, SuiteError> {
    let src = match BUILTIN.iter().find(|(n, _)| *n == name) {
        Some((_, s)) => s.to_string(),
        None if std::path::Path::new(name).is_file() => {
            std::fs::read_to_string(name).map_err(|e| SuiteError::Io(name.into(), e.to_string()))?
        }
        None => return Err(SuiteError::Unknown(name.into(), builtin_names().join(", "))),
    };
    toml::from_str(&src).map_err(|e| SuiteError::Format(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimResult {
    pub n: i64,
    pub pass: bool,
    pub detail: String,
    pub ms: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: String,
    pub dims: Vec<DimResult>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.dims.iter().all(|d| d.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "verdict": if self.pass() { "PASS" } else { "FAIL" },
            "version": env!("CARGO_PKG_VERSION"),
            "dims": self.dims.iter().map(|d| json!({
                "n": d.n,
                "verdict": if d.pass { "PASS" } else { "FAIL" },
                "detail": d.detail,
                "ms": d.ms,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Run every check at every dimension; `dims` overrides the suite's sweep.
pub fn run_suite(spec: &SuiteSpec, dims: Option<&[i64]>) -> SuiteReport {
    let dims: Vec<i64> = dims.map(<[i64]>::to_vec).unwrap_or_else(|| spec.dims.clone());
    let results = dims
        .par_iter()
        .map(|&n| {
            let t0 = Instant::now();
            let outcomes: Vec<(bool, String)> = spec
                .checks
                .par_iter()
                .map(|c| match run_check(c, n) {
                    Ok(r) => r,
                    Err(e) => (false, format!("error: {e}")),
                })
                .collect();
            let pass = outcomes.iter().all(|(p, _)| *p);
            let detail = if outcomes.is_empty() {
                "no checks".to_string()
            } else {
                outcomes.into_iter().map(|(_, d)| d).collect::<Vec<_>>().join("; ")
            };
            DimResult {
                n,
                pass,
                detail,
                ms: t0.elapsed().as_millis(),
            }
        })
        .collect();
    SuiteReport {
        suite: spec.name.clone(),
        dims: results,
    }
}

type CheckResult = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn parse_at(expr: &str, n: i64) -> Result<LinComb, String> {
    Ok(parse_with_n(expr, Some(n)).map_err(err)?.at_n(n).map_err(err)?.collect())
}

fn single(expr: &str, n: i64) -> Result<Contraction, String> {
    let lc = parse_at(expr, n)?;
    match lc.terms.as_slice() {
        [(_, c)] => Ok(c.clone()),
        _ => Err(format!("expected a single contraction in {expr:?}")),
    }
}

fn coef(s: &str, n: i64) -> Result<Rational, String> {
    parse_coef(s, Some(n)).map_err(err)?.eval_at(n).map_err(err)
}

fn numeric_zero(lc: &LinComb, n: i64, count: usize) -> Result<bool, String> {
    let sigma = lc.min_sigma().unwrap_or(0);
    for jet in jets(n as usize, n as usize, 0, count) {
        if graded_coefficient(lc, &jet, sigma).map_err(err)? != Rational::from_integer(0.into()) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn run_check(check: &Check, n: i64) -> CheckResult {
    match check {
        Check::NormalFormEmpty { expr, numeric_dims, jets } => {
            let lc = parse_at(expr, n)?;
            let sigma = lc.min_sigma().unwrap_or(0);
            let out = normalize(&lc, &RuleSet::default(), &GradePolicy::discard(sigma)).map_err(err)?;
            let symbolic = vanishes_at_leading_length_at(&out.lc.collect(), n).map_err(err)?;
            let mut detail = format!("normal form {}", if symbolic { "empty" } else { "nonempty" });
            let mut pass = symbolic;
            if numeric_dims.contains(&n) {
                let z = numeric_zero(&lc, n, *jets)?;
                detail += &format!(", graded residual on {jets} jets {}", if z { "0" } else { "nonzero" });
                pass &= z;
            }
            Ok((pass, detail))
        }
        Check::Divergence {
            expr,
            targets,
            expect,
            numeric_dims,
            jets,
        } => {
            let lc = parse_at(expr, n)?;
            let ts = targets.iter().map(|t| single(t, n)).collect::<Result<Vec<_>, _>>()?;
            let (x, cert) = find_divergence(&lc, &ts, n, SearchOpts::default()).map_err(err)?;
            let want = expect.iter().map(|e| coef(e, n)).collect::<Result<Vec<_>, _>>()?;
            let holds = cert.holds().map_err(err)?;
            let found: Vec<String> = x.iter().map(ToString::to_string).collect();
            let mut pass = x == want && holds;
            let mut detail = format!("coefficients [{}], {} steps, certificate {}", found.join(", "), cert.steps.len(), if holds { "holds" } else { "fails" });
            if numeric_dims.contains(&n) {
                let z = numeric_zero(&cert.defect().map_err(err)?, n, *jets)?;
                detail += &format!(", graded defect {}", if z { "0" } else { "nonzero" });
                pass &= z;
            }
            Ok((pass, detail))
        }
        Check::QuadraticShapes => {
            let shapes = QuadShape::all(n);
            let bad: Vec<String> = shapes
                .par_iter()
                .filter_map(|&s| match reduce_quadratic_weyl(&quadratic_shape(s, n), n) {
                    Ok((m, cert)) if m == s.expected_multiple(n) && cert.holds().unwrap_or(false) => None,
                    Ok((m, _)) => Some(format!("{s:?} gave {m}")),
                    Err(e) => Some(format!("{s:?}: {e}")),
                })
                .collect();
            Ok((bad.is_empty(), format!("{} shapes, {} mismatches{}", shapes.len(), bad.len(), if bad.is_empty() { String::new() } else { format!(": {}", bad.join(", ")) })))
        }
        Check::Ambient { expect_net } => {
            let r = verify_motlagh(n).map_err(err)?;
            let rows_ok = r.y_rows.iter().all(|row| row.first.is_none() || row.sum == Rational::from_integer(0.into()));
            let left_ok = r.leftover == r.leftover_closed_form;
            let agree = r.net_constant == r.displayed_constant;
            let positive = r.net_constant > Rational::from_integer(0.into());
            let mut pass = rows_ok && left_ok && agree && positive && r.nonzero;
            let mut detail = format!(
                "net {}, closed form {}, leftover {}, rows {}, constant {}",
                r.net_constant,
                r.displayed_constant,
                r.leftover,
                if rows_ok { "cancel" } else { "do not cancel" },
                r.constant
            );
            if let Some(want) = expect_net.get(&n.to_string()) {
                let w = coef(want, n)?;
                detail += &format!(", expected net {w}");
                pass &= w == r.net_constant;
            }
            Ok((pass, detail))
        }
        Check::Eliminate { expr } => {
            let lc = parse_at(expr, n)?;
            let mut steps = 0;
            let mut ok = true;
            for (_, c) in &lc.terms {
                let sigma = c.sigma();
                let cert = eliminate_internal_contractions(c, &GradePolicy::track(sigma)).map_err(err)?;
                ok &= cert.remainder.collect().is_empty() && cert.corrections.collect().is_empty() && cert.truncated == 0 && cert.holds().map_err(err)?;
                steps += cert.steps.len();
            }
            Ok((ok, format!("{steps} steps, remainder {}", if ok { "0" } else { "nonzero" })))
        }
        Check::SillyMultiplicity { gammas, expect } => {
            let mut found = vec![];
            let mut pass = true;
            for &g in gammas {
                let m = silly_multiplicity(g, 0, 0, 4).map_err(err)?.eval_at(n).map_err(err)?;
                let w = coef(&expect.replace('g', &g.to_string()), n)?;
                pass &= m == w;
                found.push(format!("g={g}: {m} (expected {w})"));
            }
            Ok((pass, found.join(", ")))
        }
        Check::SillyDecomposed { gammas, expect } => {
            let mut found = vec![];
            let mut pass = true;
            for &g in gammas {
                let m = silly_decomposed_coefficient(g, false).map_err(err)?.eval_at(n).map_err(err)?;
                let w = coef(&expect.replace('g', &g.to_string()), n)?;
                pass &= m == w;
                found.push(format!("g={g}: {m}"));
            }
            Ok((pass, found.join(", ")))
        }
    }
}

/// Canonical text of every term, collected.
pub fn canonical_text(lc: &LinComb) -> LinComb {
    let mut out = LinComb::zero();
    for (k, c) in &lc.terms {
        let (s, cc) = canonicalize(c);
        if s != 0 {
            out.push(k.scale(&crate::ratcoef::int(s as i64)), cc);
        }
    }
    out.collect()
}
