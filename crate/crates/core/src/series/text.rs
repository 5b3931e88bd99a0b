use std::sync::Arc;

use num_bigint::BigInt;

use super::{Exponents, Rational, Ring, TruncatedSeries};
use crate::error::{Error, Result};

/// `num/den` with an explicit denominator, even for integers.
pub fn format_rational(c: &Rational) -> String {
    format!("{}/{}", c.numer(), c.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

impl TruncatedSeries {
    /// One term per line, `num/den  e1 e2 ... ek`, exponents in variable order,
    /// lines sorted by exponent vector. The zero series is the empty string.
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        for (e, c) in self.terms() {
            out.push_str(&format_rational(c));
            out.push_str("  ");
            let exps: Vec<String> = e.iter().map(i32::to_string).collect();
            out.push_str(&exps.join(" "));
            out.push('\n');
        }
        out
    }

    /// Inverse of [`to_canonical_text`](Self::to_canonical_text). Blank lines
    /// and lines starting with `#` are skipped.
    pub fn from_canonical_text(ring: &Arc<Ring>, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let c = parse_rational(parts.next().unwrap())?;
            let e: Exponents = parts
                .map(|p| p.parse::<i32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("line {}: bad exponent", lineno + 1)))?;
            if e.len() != ring.n_vars() {
                return Err(Error::Parse(format!(
                    "line {}: {} exponents for {} variables",
                    lineno + 1,
                    e.len(),
                    ring.n_vars()
                )));
            }
            terms.push((e, c));
        }
        TruncatedSeries::from_terms(ring, terms)
    }
}
