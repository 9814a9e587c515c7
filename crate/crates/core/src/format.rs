//! Line-oriented text formats for instances and packings.
//!
//! ```text
//! # comment
//! p pdbep <n> <m>
//! c <v> <bound>
//! e <u> <v> [weight]
//! ```
//!
//! Packings are written as `s <value>` followed by one `x <edgeId>` per edge.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::graph::{EdgePacking, Instance, InstanceError};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("missing `p pdbep <n> <m>` header")]
    MissingHeader,
    #[error("duplicate header")]
    DuplicateHeader,
    #[error("duplicate bound for vertex {0}")]
    DuplicateBound(usize),
    #[error("vertex index {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("negative weight")]
    NegativeWeight,
    #[error("negative bound")]
    NegativeBound,
    #[error("weights must be given on every edge or on none")]
    MixedWeights,
    #[error("expected {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error("edge id {edge} out of range (m = {m})")]
    EdgeOutOfRange { edge: usize, m: usize },
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn malformed(line: usize, what: impl Into<String>) -> ParseError {
    err(line, ParseErrorKind::Malformed(what.into()))
}

fn parse_index(tok: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    tok.parse::<usize>()
        .map_err(|_| malformed(line, format!("invalid {what} `{tok}`")))
}

/// Parses an exact non-negative-or-negative decimal (`12`, `-0.25`, `3.`)
/// or a fraction `p/q` into a rational.
pub fn parse_rational(tok: &str) -> Option<Rational> {
    if let Some((num, den)) = tok.split_once('/') {
        let num: BigInt = num.parse().ok()?;
        let den: BigInt = den.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (negative, body) = match tok.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, tok.strip_prefix('+').unwrap_or(tok)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(num, den);
    Some(if negative { -value } else { value })
}

/// Renders a rational as a terminating decimal when one exists, otherwise
/// as `p/q`.
pub fn format_rational(q: &Rational) -> String {
    let den = q.denom().clone();
    let mut rest = den.clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while rest.is_even() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if rest != BigInt::from(1) {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let places = twos.max(fives);
    if places == 0 {
        return q.numer().to_string();
    }
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = q.numer() * (&scale / &den);
    let sign = if scaled.is_negative() { "-" } else { "" };
    let digits = scaled.abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    format!("{sign}{int_part}.{frac_part}")
}

/// Parses the instance text format. Bounds are clamped to degrees.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut bounds: Vec<Option<usize>> = Vec::new();
    let mut edges = Vec::new();
    let mut weights: Vec<Option<Rational>> = Vec::new();
    let mut weighted: Option<bool> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let Some((n, m)) = header else {
            if toks[0] != "p" {
                return Err(err(line, ParseErrorKind::MissingHeader));
            }
            if toks.len() != 4 || toks[1] != "pdbep" {
                return Err(malformed(line, "expected `p pdbep <n> <m>`"));
            }
            let n = parse_index(toks[2], line, "vertex count")?;
            let m = parse_index(toks[3], line, "edge count")?;
            header = Some((n, m));
            bounds = vec![None; n];
            continue;
        };
        match toks[0] {
            "p" => return Err(err(line, ParseErrorKind::DuplicateHeader)),
            "c" => {
                if toks.len() != 3 {
                    return Err(malformed(line, "expected `c <v> <bound>`"));
                }
                let v = parse_index(toks[1], line, "vertex")?;
                if v >= n {
                    return Err(err(line, ParseErrorKind::VertexOutOfRange { vertex: v, n }));
                }
                if toks[2].starts_with('-') {
                    return Err(err(line, ParseErrorKind::NegativeBound));
                }
                let c = parse_index(toks[2], line, "bound")?;
                if bounds[v].replace(c).is_some() {
                    return Err(err(line, ParseErrorKind::DuplicateBound(v)));
                }
            }
            "e" => {
                if toks.len() != 3 && toks.len() != 4 {
                    return Err(malformed(line, "expected `e <u> <v> [weight]`"));
                }
                let u = parse_index(toks[1], line, "vertex")?;
                let v = parse_index(toks[2], line, "vertex")?;
                for x in [u, v] {
                    if x >= n {
                        return Err(err(line, ParseErrorKind::VertexOutOfRange { vertex: x, n }));
                    }
                }
                if u == v {
                    return Err(err(line, ParseErrorKind::SelfLoop(u)));
                }
                let has_weight = toks.len() == 4;
                if *weighted.get_or_insert(has_weight) != has_weight {
                    return Err(err(line, ParseErrorKind::MixedWeights));
                }
                let w = if has_weight {
                    let w = parse_rational(toks[3])
                        .ok_or_else(|| malformed(line, format!("invalid weight `{}`", toks[3])))?;
                    if w.is_negative() {
                        return Err(err(line, ParseErrorKind::NegativeWeight));
                    }
                    Some(w)
                } else {
                    None
                };
                if edges.len() == m {
                    return Err(err(
                        line,
                        ParseErrorKind::EdgeCount {
                            expected: m,
                            found: m + 1,
                        },
                    ));
                }
                edges.push((u, v));
                weights.push(w);
            }
            other => return Err(malformed(line, format!("unknown record type `{other}`"))),
        }
    }

    let Some((n, m)) = header else {
        return Err(err(last_line.max(1), ParseErrorKind::MissingHeader));
    };
    if edges.len() != m {
        return Err(err(
            last_line.max(1),
            ParseErrorKind::EdgeCount {
                expected: m,
                found: edges.len(),
            },
        ));
    }
    let mut degree = vec![0usize; n];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let bounds = bounds
        .into_iter()
        .zip(degree)
        .map(|(c, d)| c.unwrap_or(d))
        .collect();
    let weights = if weighted == Some(true) {
        Some(weights.into_iter().map(|w| w.expect("all weighted")).collect())
    } else {
        None
    };
    Instance::new(n, edges, bounds, weights).map_err(|e| match e {
        // Already screened above; only reachable through logic errors.
        InstanceError::SelfLoop { vertex, .. } => err(last_line, ParseErrorKind::SelfLoop(vertex)),
        other => malformed(last_line, other.to_string()),
    })
}

/// Canonical text form: header, one `c` line per vertex, one `e` line per edge.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    writeln!(out, "p pdbep {} {}", inst.n(), inst.m()).unwrap();
    for (v, c) in inst.bounds().iter().enumerate() {
        writeln!(out, "c {v} {c}").unwrap();
    }
    for (e, &(u, v)) in inst.edges().iter().enumerate() {
        match inst.weights() {
            Some(w) => writeln!(out, "e {u} {v} {}", format_rational(&w[e])).unwrap(),
            None => writeln!(out, "e {u} {v}").unwrap(),
        }
    }
    out
}

/// Writes `s <value>` followed by the chosen edge ids. The value is the
/// packing's weight (cardinality for unweighted instances).
pub fn serialize_packing(inst: &Instance, p: &EdgePacking) -> String {
    let mut out = String::new();
    writeln!(out, "s {}", format_rational(&p.weight(inst))).unwrap();
    for e in p.iter() {
        writeln!(out, "x {e}").unwrap();
    }
    out
}

/// Reads a packing file; returns the declared value alongside the edges.
pub fn parse_packing(inst: &Instance, text: &str) -> Result<(Rational, EdgePacking), ParseError> {
    let mut value = None;
    let mut edges = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["s", v] => {
                let q = parse_rational(v)
                    .ok_or_else(|| malformed(line, format!("invalid value `{v}`")))?;
                value = Some(q);
            }
            ["x", e] => {
                let e = parse_index(e, line, "edge id")?;
                if e >= inst.m() {
                    return Err(err(line, ParseErrorKind::EdgeOutOfRange { edge: e, m: inst.m() }));
                }
                edges.push(e);
            }
            _ => return Err(malformed(line, "expected `s <value>` or `x <edgeId>`")),
        }
    }
    let value = value.ok_or_else(|| malformed(last_line.max(1), "missing `s <value>` line"))?;
    Ok((value, EdgePacking::from_edges(edges)))
}
