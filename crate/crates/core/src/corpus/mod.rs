//! Stored reference values for the built-in geometries and an exact
//! comparison harness.
//!
//! Each data file starts with `case NAME` and `convention NAME` and then lists
//! entries grouped under `section TAG` lines:
//!
//! ```text
//! strict potential uv=1 z2=1 q=1 : 8
//! cross potential uv=0 z2=-1 z3=-1 q=1 : 2
//! ```
//!
//! A `strict` entry must match. A `cross` entry is a cross-check against a
//! source that is known to be incomplete or internally inconsistent; its
//! mismatches are reported with both values but do not fail verification.

use std::time::Instant;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Model, BUILTIN_NAMES};
use crate::mirror_map::MirrorMap;
use crate::series::text::parse_rational;
use crate::series::{Rational, TruncatedSeries, UV};
use crate::solver::{CoefficientTable, Convention, TableKey};
use crate::special::swap_symmetry;

const SOURCES: [(&str, &str); 6] = [
    ("C3", include_str!("../../data/C3.txt")),
    ("KP2-inner", include_str!("../../data/KP2-inner.txt")),
    ("KP2-outer", include_str!("../../data/KP2-outer.txt")),
    ("KP3", include_str!("../../data/KP3.txt")),
    ("local-surface-A0", include_str!("../../data/local-surface-A0.txt")),
    ("abelian-family", include_str!("../../data/abelian-family.txt")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// An entry of the coefficient table of `log Z` under the case convention.
    Potential,
    /// A coefficient of `delta` for point 0.
    Delta,
    /// A coefficient of the first inverse mirror map component `Q(q)`.
    Inverse,
    /// A coefficient of the solution `Z`.
    Solution,
}

impl Target {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "potential" => Target::Potential,
            "delta" => Target::Delta,
            "inverse" => Target::Inverse,
            "solution" => Target::Solution,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedEntry {
    pub strict: bool,
    pub target: Target,
    pub coords: Vec<(String, i32)>,
    pub value: Rational,
    pub section: String,
}

impl ExpectedEntry {
    pub fn coords_text(&self) -> String {
        self.coords.iter().map(|(n, e)| format!("{n}={e}")).collect::<Vec<_>>().join(" ")
    }

    fn named(&self) -> Vec<(&str, i32)> {
        self.coords.iter().map(|(n, e)| (n.as_str(), *e)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ExpectedCase {
    pub name: String,
    pub convention: Convention,
    pub entries: Vec<ExpectedEntry>,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

impl ExpectedCase {
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut convention = None;
        let mut section = String::new();
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            match head {
                "case" => name = Some(rest.trim().to_string()),
                "convention" => convention = Some(rest.trim().parse::<Convention>()?),
                "section" => section = rest.trim().to_string(),
                "strict" | "cross" => {
                    let (lhs, value) =
                        rest.split_once(':').ok_or_else(|| parse_err(ln, "missing `:`"))?;
                    let mut tokens = lhs.split_whitespace();
                    let target = tokens
                        .next()
                        .and_then(Target::parse)
                        .ok_or_else(|| parse_err(ln, "unknown target"))?;
                    let coords = tokens
                        .map(|t| {
                            let (n, e) = t.split_once('=').ok_or_else(|| parse_err(ln, t))?;
                            let e = e.parse::<i32>().map_err(|e| parse_err(ln, e))?;
                            Ok((n.to_string(), e))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    entries.push(ExpectedEntry {
                        strict: head == "strict",
                        target,
                        coords,
                        value: parse_rational(value.trim()).map_err(|e| parse_err(ln, e))?,
                        section: section.clone(),
                    });
                }
                other => return Err(parse_err(ln, format!("unexpected `{other}`"))),
            }
        }
        Ok(ExpectedCase {
            name: name.ok_or_else(|| Error::Parse("missing `case` line".into()))?,
            convention: convention.ok_or_else(|| Error::Parse("missing `convention` line".into()))?,
            entries,
        })
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let (_, text) = SOURCES
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::UnknownCase(name.to_string()))?;
        Self::parse(text)
    }

    pub fn all() -> Result<Vec<Self>> {
        BUILTIN_NAMES.iter().map(|n| Self::builtin(n)).collect()
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::builtin(&self.name)
    }

    pub fn strict_count(&self) -> usize {
        self.entries.iter().filter(|e| e.strict).count()
    }

    /// Checks that every table entry lies inside the geometry's truncation.
    pub fn within_truncation(&self, g: &Geometry) -> bool {
        let t = &g.truncation;
        self.entries.iter().filter(|e| e.target == Target::Potential).all(|e| {
            let mut q_total = 0;
            e.coords.iter().all(|(n, x)| {
                if n == UV {
                    (0..=t.uv_max as i32).contains(x)
                } else if n.starts_with('z') {
                    *x <= t.z_window as i32
                } else {
                    q_total += x;
                    *x >= 0
                }
            }) && q_total <= t.q_total as i32
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mismatch {
    pub section: String,
    pub target: Target,
    pub coords: String,
    pub expected: String,
    pub computed: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub case: String,
    /// Strict entries.
    pub expected: usize,
    pub matched: usize,
    pub mismatches: Vec<Mismatch>,
    pub cross_checked: usize,
    pub cross_mismatches: Vec<Mismatch>,
    /// Whether `f(-Z) - uv` vanished identically.
    pub residual_zero: bool,
    pub checks: Vec<CheckOutcome>,
    pub runtime_ms: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.residual_zero && self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} {}/{} strict, {} cross-check mismatch(es) of {}, residual {}{}",
            self.case,
            if self.passed() { "ok" } else { "FAILED" },
            self.matched,
            self.expected,
            self.cross_mismatches.len(),
            self.cross_checked,
            if self.residual_zero { "zero" } else { "nonzero" },
            self.checks
                .iter()
                .map(|c| format!(", {} {}", c.name, if c.passed { "ok" } else { "failed" }))
                .collect::<String>(),
        )
    }
}

fn table_key(table: &CoefficientTable, e: &ExpectedEntry) -> Result<TableKey> {
    let mut key = TableKey {
        uv: 0,
        z: vec![0; table.z_names().len()],
        q: vec![0; table.q_names().len()],
    };
    for (n, x) in &e.coords {
        if n == UV {
            key.uv = *x;
        } else if let Some(i) = table.z_names().iter().position(|z| z == n) {
            key.z[i] = *x;
        } else if let Some(i) = table.q_names().iter().position(|q| q == n) {
            key.q[i] = *x;
        } else {
            return Err(Error::UnknownVariable(n.clone()));
        }
    }
    Ok(key)
}

fn series_order(case: &ExpectedCase, targets: &[Target]) -> u32 {
    case.entries
        .iter()
        .filter(|e| targets.contains(&e.target))
        .map(|e| e.coords.iter().map(|(_, x)| *x).sum::<i32>().max(0) as u32)
        .max()
        .unwrap_or(0)
        .max(1)
}

/// Runs the full pipeline for the case's geometry and compares every entry
/// exactly.
pub fn verify(case: &ExpectedCase) -> Result<VerificationReport> {
    let start = Instant::now();
    let geometry = case.geometry()?;
    let slab = geometry.slab()?;
    let sol = crate::solver::solve_gluing(&slab)?;
    let table = CoefficientTable::from_potential(&sol.equivariant_potential()?, case.convention)?;

    let needs_mm = case.entries.iter().any(|e| matches!(e.target, Target::Delta | Target::Inverse));
    let mm: Option<MirrorMap> = if needs_mm {
        geometry.mirror_map(series_order(case, &[Target::Delta, Target::Inverse]))?
    } else {
        None
    };
    let delta: Option<TruncatedSeries> = mm.as_ref().map(|m| m.delta(0)).transpose()?;

    let mut report = VerificationReport {
        case: case.name.clone(),
        expected: case.strict_count(),
        matched: 0,
        mismatches: Vec::new(),
        cross_checked: 0,
        cross_mismatches: Vec::new(),
        residual_zero: sol.residual_checked(),
        checks: Vec::new(),
        runtime_ms: 0.0,
    };
    let no_mm = || Error::Config(format!("`{}` has no mirror map", case.name));
    for e in &case.entries {
        let computed = match e.target {
            Target::Potential => table.get(&table_key(&table, e)?),
            Target::Solution => sol.z().coefficient_of(&e.named())?,
            Target::Delta => delta.as_ref().ok_or_else(no_mm)?.coefficient_of(&e.named())?,
            Target::Inverse => {
                let m = mm.as_ref().ok_or_else(no_mm)?;
                m.inverse().first().ok_or_else(no_mm)?.coefficient_of(&e.named())?
            }
        };
        let ok = computed == e.value;
        if e.strict {
            if ok {
                report.matched += 1;
            }
        } else {
            report.cross_checked += 1;
        }
        if !ok {
            let m = Mismatch {
                section: e.section.clone(),
                target: e.target,
                coords: e.coords_text(),
                expected: e.value.to_string(),
                computed: computed.to_string(),
            };
            if e.strict {
                report.mismatches.push(m);
            } else {
                report.cross_mismatches.push(m);
            }
        }
    }

    if let Model::AbelianFamily = geometry.model {
        report.checks.push(CheckOutcome {
            name: "swap symmetry".into(),
            passed: swap_symmetry(slab.series())? == *slab.series(),
        });
    }
    if let Model::LocalSurface = geometry.model {
        // The q-free column is -log(1 - uv) up to the convention sign.
        let passed = (1..=geometry.truncation.uv_max as i32).all(|l| {
            let key = TableKey { uv: l, z: vec![], q: vec![0] };
            table.get(&key).abs() == Rational::new(1.into(), l.into())
        }) && !table.get(&TableKey { uv: 1, z: vec![], q: vec![0] }).is_zero();
        report.checks.push(CheckOutcome { name: "q-free column".into(), passed });
    }

    report.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Verifies every built-in case, one thread per case, in registry order.
pub fn verify_all() -> Result<Vec<VerificationReport>> {
    let cases = ExpectedCase::all()?;
    std::thread::scope(|s| {
        let handles: Vec<_> = cases.iter().map(|c| s.spawn(move || verify(c))).collect();
        handles.into_iter().map(|h| h.join().expect("verification thread panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_files_parse() {
        let all = ExpectedCase::all().unwrap();
        assert_eq!(all.len(), 6);
        for case in &all {
            assert!(case.within_truncation(&case.geometry().unwrap()), "{}", case.name);
            assert_eq!(case.convention, case.geometry().unwrap().convention);
        }
        let kp2 = ExpectedCase::builtin("KP2-inner").unwrap();
        assert_eq!(kp2.entries.iter().filter(|e| e.target == Target::Potential).count(), 96);
        let surf = ExpectedCase::builtin("local-surface-A0").unwrap();
        assert_eq!(surf.entries.len(), 30);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(ExpectedCase::parse("case X\n"), Err(Error::Parse(_))));
        let bad = "case X\nconvention plain\nstrict potential q=1 8\n";
        assert!(matches!(ExpectedCase::parse(bad), Err(Error::Parse(_))));
        let bad = "case X\nconvention plain\nstrict wrong q=1 : 8\n";
        assert!(matches!(ExpectedCase::parse(bad), Err(Error::Parse(_))));
        assert!(matches!(ExpectedCase::builtin("nope"), Err(Error::UnknownCase(_))));
    }

    #[test]
    fn c3_verifies() {
        let r = verify(&ExpectedCase::builtin("C3").unwrap()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.matched, r.expected);
    }

    #[test]
    fn wrong_value_is_reported() {
        let text = "case C3\nconvention inner\nsection s\nstrict solution uv=1 z2=0 : 1\n";
        let r = verify(&ExpectedCase::parse(text).unwrap()).unwrap();
        assert!(!r.passed());
        assert_eq!(r.mismatches[0].expected, "1");
        assert_eq!(r.mismatches[0].computed, "-1");
    }
}
