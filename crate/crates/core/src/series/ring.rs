//! Variable layouts and truncation rules shared by every series.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Name of the distinguished small variable standing for the product `u*v`.
pub const UV: &str = "uv";

/// Ordered variable names. Small variables come first in every exponent
/// vector, followed by the phase variables.
///
/// Small variables (Kähler parameters, `uv`) only carry nonnegative exponents
/// and are truncated by degree. Phase variables (`z_j`) carry exponents of any
/// sign and are truncated by the z-window.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariableSpec {
    small: Vec<String>,
    phase: Vec<String>,
}

impl VariableSpec {
    pub fn new<S: Into<String>>(
        small: impl IntoIterator<Item = S>,
        phase: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let small: Vec<String> = small.into_iter().map(Into::into).collect();
        let phase: Vec<String> = phase.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for name in small.iter().chain(&phase) {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidSpec(format!("bad variable name `{name}`")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidSpec(format!("duplicate variable `{name}`")));
            }
        }
        if phase.iter().any(|n| n == UV) {
            return Err(Error::InvalidSpec("`uv` must be a small variable".into()));
        }
        Ok(VariableSpec { small, phase })
    }

    pub fn small_names(&self) -> &[String] {
        &self.small
    }

    pub fn phase_names(&self) -> &[String] {
        &self.phase
    }

    pub fn n_small(&self) -> usize {
        self.small.len()
    }

    pub fn n_phase(&self) -> usize {
        self.phase.len()
    }

    pub fn len(&self) -> usize {
        self.small.len() + self.phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self, index: usize) -> &str {
        if index < self.small.len() {
            &self.small[index]
        } else {
            &self.phase[index - self.small.len()]
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.small.iter().chain(&self.phase).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names().position(|n| n == name)
    }

    pub fn is_small(&self, index: usize) -> bool {
        index < self.small.len()
    }
}

/// Which monomials a series keeps.
///
/// A monomial with small exponents `s` and phase exponents `e` is kept iff
///
/// * `sum(s) <= small_total_max` and `s_k <= per_small_max[k]` for every cap,
/// * `|e_j + sum_k slope[j][k] * s_k| <= z_window` for every phase variable.
///
/// With all slopes zero this is the plain symmetric window `|e_j| <= W`.
/// Positive slopes shear the window so that a term like `q z^-1` has weight
/// zero; the kept set is then an ideal for all monomials of nonnegative weight
/// and truncated arithmetic is exact on that cone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Truncation {
    small_total_max: u32,
    per_small_max: Vec<Option<u32>>,
    z_window: u32,
    phase_slopes: Vec<Vec<u32>>,
}

impl Truncation {
    pub fn new(small_total_max: u32, z_window: u32) -> Self {
        Truncation {
            small_total_max,
            per_small_max: Vec::new(),
            z_window,
            phase_slopes: Vec::new(),
        }
    }

    /// Per-variable degree caps, one entry per small variable.
    pub fn with_small_caps(mut self, caps: Vec<Option<u32>>) -> Self {
        self.per_small_max = caps;
        self
    }

    /// Slope matrix indexed `[phase][small]`.
    pub fn with_phase_slopes(mut self, slopes: Vec<Vec<u32>>) -> Self {
        self.phase_slopes = slopes;
        self
    }

    pub fn with_z_window(mut self, z_window: u32) -> Self {
        self.z_window = z_window;
        self
    }

    pub fn small_total_max(&self) -> u32 {
        self.small_total_max
    }

    pub fn z_window(&self) -> u32 {
        self.z_window
    }

    pub fn small_cap(&self, k: usize) -> Option<u32> {
        self.per_small_max.get(k).copied().flatten()
    }

    pub fn small_caps(&self) -> &[Option<u32>] {
        &self.per_small_max
    }

    pub fn slope(&self, phase: usize, small: usize) -> u32 {
        self.phase_slopes
            .get(phase)
            .and_then(|row| row.get(small))
            .copied()
            .unwrap_or(0)
    }

    pub fn phase_slopes(&self) -> &[Vec<u32>] {
        &self.phase_slopes
    }

    fn validate(&self, vars: &VariableSpec) -> Result<()> {
        if !self.per_small_max.is_empty() && self.per_small_max.len() != vars.n_small() {
            return Err(Error::InvalidTruncation(format!(
                "{} caps for {} small variables",
                self.per_small_max.len(),
                vars.n_small()
            )));
        }
        if !self.phase_slopes.is_empty() {
            if self.phase_slopes.len() != vars.n_phase()
                || self.phase_slopes.iter().any(|r| r.len() != vars.n_small())
            {
                return Err(Error::InvalidTruncation(
                    "slope matrix must be n_phase x n_small".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A variable layout together with its truncation; every series lives in one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    vars: VariableSpec,
    trunc: Truncation,
}

impl Ring {
    pub fn new(vars: VariableSpec, trunc: Truncation) -> Result<Arc<Ring>> {
        trunc.validate(&vars)?;
        Ok(Arc::new(Ring { vars, trunc }))
    }

    pub fn vars(&self) -> &VariableSpec {
        &self.vars
    }

    pub fn trunc(&self) -> &Truncation {
        &self.trunc
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    /// Weighted phase degree `e_j + sum_k slope[j][k] s_k` of phase variable `j`.
    pub fn phase_weight(&self, exps: &[i32], phase: usize) -> i64 {
        let ns = self.vars.n_small();
        let mut w = exps[ns + phase] as i64;
        for k in 0..ns {
            w += self.trunc.slope(phase, k) as i64 * exps[k] as i64;
        }
        w
    }

    pub fn small_degree(&self, exps: &[i32]) -> i64 {
        exps[..self.vars.n_small()].iter().map(|&e| e as i64).sum()
    }

    pub fn retains(&self, exps: &[i32]) -> bool {
        let ns = self.vars.n_small();
        let mut total = 0i64;
        for (k, &e) in exps[..ns].iter().enumerate() {
            if e < 0 {
                return false;
            }
            if let Some(cap) = self.trunc.small_cap(k) {
                if e as i64 > cap as i64 {
                    return false;
                }
            }
            total += e as i64;
        }
        if total > self.trunc.small_total_max as i64 {
            return false;
        }
        let window = self.trunc.z_window as i64;
        (0..self.vars.n_phase()).all(|j| self.phase_weight(exps, j).abs() <= window)
    }

    /// True when the monomial sits in the cone on which truncation is an
    /// ideal: every weighted phase degree is nonnegative.
    pub fn in_cone(&self, exps: &[i32]) -> bool {
        (0..self.vars.n_phase()).all(|j| self.phase_weight(exps, j) >= 0)
    }

    /// Same variables, different truncation.
    pub fn with_truncation(&self, trunc: Truncation) -> Result<Arc<Ring>> {
        Ring::new(self.vars.clone(), trunc)
    }
}
