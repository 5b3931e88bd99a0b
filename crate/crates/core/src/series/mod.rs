//! Sparse multivariate truncated power/Laurent series over the rationals.

mod ring;
mod substitute;
pub mod text;
mod transcendental;

use std::collections::BTreeMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use ring::{Ring, Truncation, VariableSpec, UV};

pub type Rational = BigRational;
pub type Exponents = Vec<i32>;

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Result of [`TruncatedSeries::extract`].
#[derive(Clone, Debug, PartialEq)]
pub enum Extracted {
    Coefficient(Rational),
    Series(TruncatedSeries),
}

impl Extracted {
    pub fn into_rational(self) -> Option<Rational> {
        match self {
            Extracted::Coefficient(c) => Some(c),
            Extracted::Series(_) => None,
        }
    }

    pub fn into_series(self) -> Option<TruncatedSeries> {
        match self {
            Extracted::Series(s) => Some(s),
            Extracted::Coefficient(_) => None,
        }
    }
}

/// An immutable truncated series. Zero coefficients are never stored and
/// every stored monomial is retained by the ring's truncation.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    ring: Arc<Ring>,
    terms: BTreeMap<Exponents, Rational>,
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}

fn same_ring(a: &Arc<Ring>, b: &Arc<Ring>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl TruncatedSeries {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        TruncatedSeries { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ring: &Arc<Ring>) -> Self {
        Self::constant(ring, Rational::one())
    }

    pub fn constant(ring: &Arc<Ring>, c: Rational) -> Self {
        let mut s = Self::zero(ring);
        s.insert(vec![0; ring.n_vars()], c);
        s
    }

    /// `c * prod x_i^e_i`; zero if the monomial is truncated away.
    pub fn monomial(ring: &Arc<Ring>, exps: Exponents, c: Rational) -> Result<Self> {
        check_len(ring, &exps)?;
        let mut s = Self::zero(ring);
        s.insert(exps, c);
        Ok(s)
    }

    /// The variable `name` to the first power.
    pub fn var(ring: &Arc<Ring>, name: &str) -> Result<Self> {
        Self::var_pow(ring, name, 1)
    }

    pub fn var_pow(ring: &Arc<Ring>, name: &str, power: i32) -> Result<Self> {
        let idx = index(ring, name)?;
        let mut exps = vec![0; ring.n_vars()];
        exps[idx] = power;
        Self::monomial(ring, exps, Rational::one())
    }

    /// Builds a series from raw terms, summing duplicates and dropping
    /// anything outside the truncation.
    pub fn from_terms(
        ring: &Arc<Ring>,
        terms: impl IntoIterator<Item = (Exponents, Rational)>,
    ) -> Result<Self> {
        let mut s = Self::zero(ring);
        for (e, c) in terms {
            check_len(ring, &e)?;
            s.add_term(e, c);
        }
        Ok(s)
    }

    /// Like [`from_terms`](Self::from_terms) with terms given by variable name.
    pub fn from_named_terms<'a>(
        ring: &Arc<Ring>,
        terms: impl IntoIterator<Item = (&'a [(&'a str, i32)], Rational)>,
    ) -> Result<Self> {
        let mut s = Self::zero(ring);
        for (named, c) in terms {
            let mut e = vec![0; ring.n_vars()];
            for &(name, p) in named {
                e[index(ring, name)?] += p;
            }
            s.add_term(e, c);
        }
        Ok(s)
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[i32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.ring.n_vars()])
    }

    fn insert(&mut self, exps: Exponents, c: Rational) {
        if !c.is_zero() && self.ring.retains(&exps) {
            self.terms.insert(exps, c);
        }
    }

    fn add_term(&mut self, exps: Exponents, c: Rational) {
        if c.is_zero() || !self.ring.retains(&exps) {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if same_ring(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let (a, b) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let mut acc: BTreeMap<Exponents, Rational> = BTreeMap::new();
        let mut e = vec![0; self.ring.n_vars()];
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                for (k, slot) in e.iter_mut().enumerate() {
                    *slot = ea[k] + eb[k];
                }
                if !self.ring.retains(&e) {
                    continue;
                }
                let prod = ca * cb;
                match acc.get_mut(&e) {
                    Some(v) => *v += prod,
                    None => {
                        acc.insert(e.clone(), prod);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(TruncatedSeries { ring: self.ring.clone(), terms: acc })
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        TruncatedSeries {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by the monomial `x^shift`, truncating.
    pub fn shift(&self, shift: &[i32]) -> Result<Self> {
        check_len(&self.ring, shift)?;
        let mut out = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            let e2: Exponents = e.iter().zip(shift).map(|(a, b)| a + b).collect();
            out.insert(e2, c.clone());
        }
        Ok(out)
    }

    /// Formal partial derivative.
    pub fn derivative(&self, var: &str) -> Result<Self> {
        let idx = index(&self.ring, var)?;
        let mut out = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            let p = e[idx];
            if p == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[idx] -= 1;
            out.add_term(e2, c * integer(p as i64));
        }
        Ok(out)
    }

    /// Drops every term with a nonzero exponent of `var`.
    pub fn set_zero(&self, var: &str) -> Result<Self> {
        let idx = index(&self.ring, var)?;
        Ok(self.filter(|e| e[idx] == 0))
    }

    pub fn filter(&self, mut keep: impl FnMut(&[i32]) -> bool) -> Self {
        TruncatedSeries {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Re-expresses the series in `target`, matching variables by name. Every
    /// variable carrying a nonzero exponent must exist in the target; terms the
    /// target truncation rejects are dropped.
    pub fn embed(&self, target: &Arc<Ring>) -> Result<Self> {
        let map = name_map(&self.ring, target, |name| {
            self.terms.keys().any(|e| e[self.ring.vars().index_of(name).unwrap()] != 0)
        })?;
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; target.n_vars()];
            for (i, &p) in e.iter().enumerate() {
                if let Some(j) = map[i] {
                    e2[j] += p;
                }
            }
            out.add_term(e2, c.clone());
        }
        Ok(out)
    }

    /// Coefficient of the monomial fixed by `pattern`. Returns a rational when
    /// every variable is fixed, otherwise a series in the remaining variables.
    pub fn extract(&self, pattern: &[(&str, i32)]) -> Result<Extracted> {
        let vars = self.ring.vars();
        let mut fixed: Vec<Option<i32>> = vec![None; vars.len()];
        for &(name, p) in pattern {
            fixed[index(&self.ring, name)?] = Some(p);
        }
        let matches = |e: &[i32]| fixed.iter().zip(e).all(|(f, &x)| f.is_none_or(|v| v == x));
        if fixed.iter().all(Option::is_some) {
            let e: Exponents = fixed.iter().map(|f| f.unwrap()).collect();
            return Ok(Extracted::Coefficient(self.coefficient(&e)));
        }
        let ns = vars.n_small();
        let keep_small: Vec<usize> = (0..ns).filter(|&k| fixed[k].is_none()).collect();
        let keep_phase: Vec<usize> =
            (0..vars.n_phase()).filter(|&j| fixed[ns + j].is_none()).collect();
        let spec = VariableSpec::new(
            keep_small.iter().map(|&k| vars.name(k).to_string()),
            keep_phase.iter().map(|&j| vars.name(ns + j).to_string()),
        )?;
        let t = self.ring.trunc();
        let mut widen = 0i64;
        for &j in &keep_phase {
            let shift: i64 = (0..ns)
                .filter_map(|k| fixed[k].map(|v| t.slope(j, k) as i64 * v as i64))
                .sum();
            widen = widen.max(shift.abs());
        }
        let mut trunc = Truncation::new(t.small_total_max(), t.z_window() + widen as u32);
        if !t.small_caps().is_empty() {
            trunc = trunc.with_small_caps(keep_small.iter().map(|&k| t.small_cap(k)).collect());
        }
        if !t.phase_slopes().is_empty() {
            trunc = trunc.with_phase_slopes(
                keep_phase
                    .iter()
                    .map(|&j| keep_small.iter().map(|&k| t.slope(j, k)).collect())
                    .collect(),
            );
        }
        let ring = Ring::new(spec, trunc)?;
        let kept: Vec<usize> = keep_small.iter().copied().chain(keep_phase.iter().map(|j| ns + j)).collect();
        let mut out = Self::zero(&ring);
        for (e, c) in &self.terms {
            if matches(e) {
                out.add_term(kept.iter().map(|&i| e[i]).collect(), c.clone());
            }
        }
        Ok(Extracted::Series(out))
    }

    /// Coefficient of the monomial given by name, all other variables at 0.
    pub fn coefficient_of(&self, named: &[(&str, i32)]) -> Result<Rational> {
        let mut e = vec![0; self.ring.n_vars()];
        for &(name, p) in named {
            e[index(&self.ring, name)?] = p;
        }
        Ok(self.coefficient(&e))
    }

    pub fn map_coefficients(&self, mut f: impl FnMut(&[i32], &Rational) -> Rational) -> Self {
        let mut out = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            out.insert(e.clone(), f(e, c));
        }
        out
    }

    /// Largest small degree among the terms (`None` for zero).
    pub fn max_small_degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| self.ring.small_degree(e)).max()
    }
}

fn check_len(ring: &Ring, exps: &[i32]) -> Result<()> {
    if exps.len() != ring.n_vars() {
        return Err(Error::InvalidSpec(format!(
            "exponent vector of length {} for {} variables",
            exps.len(),
            ring.n_vars()
        )));
    }
    Ok(())
}

pub(crate) fn index(ring: &Ring, name: &str) -> Result<usize> {
    ring.vars().index_of(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
}

/// For every source variable, its index in `target`. A source variable missing
/// from the target is an error only if `used(name)` says it carries exponents.
fn name_map(
    source: &Ring,
    target: &Ring,
    mut used: impl FnMut(&str) -> bool,
) -> Result<Vec<Option<usize>>> {
    source
        .vars()
        .names()
        .map(|name| match target.vars().index_of(name) {
            Some(j) => Ok(Some(j)),
            None if used(name) => Err(Error::UnknownVariable(name.to_string())),
            None => Ok(None),
        })
        .collect()
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl ops::$trait<&TruncatedSeries> for &TruncatedSeries {
            type Output = TruncatedSeries;
            fn $method(self, rhs: &TruncatedSeries) -> TruncatedSeries {
                self.$try(rhs).expect("series from different rings")
            }
        }
        impl ops::$trait<TruncatedSeries> for TruncatedSeries {
            type Output = TruncatedSeries;
            fn $method(self, rhs: TruncatedSeries) -> TruncatedSeries {
                (&self).$try(&rhs).expect("series from different rings")
            }
        }
        impl ops::$trait<&TruncatedSeries> for TruncatedSeries {
            type Output = TruncatedSeries;
            fn $method(self, rhs: &TruncatedSeries) -> TruncatedSeries {
                (&self).$try(rhs).expect("series from different rings")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl ops::Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries::neg(self)
    }
}

impl ops::Neg for TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries::neg(&self)
    }
}

impl fmt::Display for TruncatedSeries {
    /// Human-readable form, lowest small degree first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(e, _)| (self.ring.small_degree(e), (*e).clone()));
        let vars = self.ring.vars();
        for (n, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => factors.push(vars.name(i).to_string()),
                    _ => factors.push(format!("{}^{}", vars.name(i), p)),
                }
            }
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", abs, factors.join("*"))?;
            }
        }
        Ok(())
    }
}
