//! Newton solver for `uv = f(-Z, z2, ...)`, the equivariant potential
//! `log Z`, coefficient tables, the formal integral of `log Z`, and the
//! immersed-torus superpotential.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Rational, Ring, TruncatedSeries, Truncation, VariableSpec, UV};
use crate::slab::SlabFunction;

#[derive(Clone, Debug)]
pub struct GluingSolution {
    z: TruncatedSeries,
    rounds: usize,
    residual_checked: bool,
}

fn solution_ring(f_ring: &Ring, solve_var: &str, uv_max: u32) -> Result<Arc<Ring>> {
    let vars = f_ring.vars();
    let t = f_ring.trunc();
    let has_uv = vars.index_of(UV).is_some();
    let mut small: Vec<String> = vars.small_names().to_vec();
    let mut caps: Vec<Option<u32>> = (0..small.len()).map(|k| t.small_cap(k)).collect();
    let mut total = t.small_total_max();
    if !has_uv {
        small.push(UV.to_string());
        caps.push(Some(uv_max));
        total += uv_max;
    }
    let ns_f = vars.n_small();
    let mut phase = Vec::new();
    let mut slopes = Vec::new();
    for (j, name) in vars.phase_names().iter().enumerate() {
        if name == solve_var {
            continue;
        }
        phase.push(name.clone());
        let mut row: Vec<u32> = (0..ns_f).map(|k| t.slope(j, k)).collect();
        if !has_uv {
            row.push(0);
        }
        slopes.push(row);
    }
    let mut trunc = Truncation::new(total, t.z_window()).with_small_caps(caps);
    if !t.phase_slopes().is_empty() {
        trunc = trunc.with_phase_slopes(slopes);
    }
    Ring::new(VariableSpec::new(small, phase)?, trunc)
}

/// Solves `f(-Z) = uv` for `Z` by Newton iteration from the exact solution
/// of the small-variable-free part.
pub fn solve_gluing(slab: &SlabFunction) -> Result<GluingSolution> {
    let f = slab.series();
    let var = slab.solve_var();
    let ring = solution_ring(f.ring(), var, slab.uv_max())?;
    let (c0, c1) = slab.linear_part()?;
    let mut z = (&c0 * &c1.invert()?).embed(&ring)?;
    let df = f.derivative(var)?;
    let uv = TruncatedSeries::var(&ring, UV)?;

    let residual = |z: &TruncatedSeries| -> Result<TruncatedSeries> {
        Ok(&f.substitute_into(&ring, &[(var, &z.neg())])? - &uv)
    };

    let n = ring.trunc().small_total_max();
    let max_rounds = (u32::BITS - n.leading_zeros()) as usize + 1;
    let mut rounds = 0;
    loop {
        let r = residual(&z)?;
        if r.is_zero() {
            return Ok(GluingSolution { z, rounds, residual_checked: true });
        }
        if rounds == max_rounds {
            return Err(Error::ResidualNonzero(rounds));
        }
        let fprime = df.substitute_into(&ring, &[(var, &z.neg())])?.neg();
        if fprime.constant_term().is_zero() {
            return Err(Error::UnsupportedFraming("derivative is not a unit".into()));
        }
        z = &z - &(&r * &fprime.invert()?);
        rounds += 1;
    }
}

/// The leading constant of the untwisted equation `uv = f(Z)` with `Z` near 1.
/// A nonzero value means the equation has no solution with `Z - 1` small;
/// this is reported as [`Error::UntwistedObstruction`].
pub fn untwisted_leading_constant(slab: &SlabFunction) -> Result<Rational> {
    let f = slab.series();
    let idx = f
        .ring()
        .vars()
        .index_of(slab.solve_var())
        .ok_or_else(|| Error::UnknownVariable(slab.solve_var().to_string()))?;
    Ok(f.terms()
        .filter(|(e, _)| e.iter().enumerate().all(|(i, &x)| i == idx || x == 0))
        .fold(Rational::zero(), |acc, (_, c)| acc + c))
}

pub fn check_untwisted(slab: &SlabFunction) -> Result<()> {
    let c = untwisted_leading_constant(slab)?;
    if c.is_zero() {
        Ok(())
    } else {
        Err(Error::UntwistedObstruction(c))
    }
}

impl GluingSolution {
    /// `Z = -z1` as a series in the Kähler variables, `uv` and the remaining
    /// phase variables.
    pub fn z(&self) -> &TruncatedSeries {
        &self.z
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn residual_checked(&self) -> bool {
        self.residual_checked
    }

    pub fn equivariant_potential(&self) -> Result<EquivariantPotential> {
        Ok(EquivariantPotential { lambda_coefficient: self.z.log()? })
    }

    pub fn at_uv_zero(&self) -> Result<TruncatedSeries> {
        self.z.set_zero(UV)
    }
}

/// The coefficient of the equivariant parameter, `log Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantPotential {
    pub lambda_coefficient: TruncatedSeries,
}

/// Sign rule relating series coefficients `c` to table entries `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `sum -a (-z)^j (-q)^k (uv)^l`
    Inner,
    /// `sum a z^j q^k (uv)^l`
    Plain,
    /// `-sum a z^j q^k (uv)^l`
    Negated,
    /// `sum -a (-z)^j q^k (uv)^l`
    Phase,
}

impl Convention {
    pub const ALL: [Convention; 4] =
        [Convention::Inner, Convention::Plain, Convention::Negated, Convention::Phase];

    /// `a = sign * c`; the map is an involution.
    pub fn sign(self, z_degree: i64, q_degree: i64) -> i64 {
        let parity = |d: i64| if d.rem_euclid(2) == 0 { 1 } else { -1 };
        match self {
            Convention::Inner => -parity(z_degree + q_degree),
            Convention::Plain => 1,
            Convention::Negated => -1,
            Convention::Phase => -parity(z_degree),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Inner => "inner",
            Convention::Plain => "plain",
            Convention::Negated => "negated",
            Convention::Phase => "phase",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Convention::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown convention `{s}`")))
    }
}

/// Position of an entry: `uv` order, phase exponents, Kähler exponents.
/// The derived order gives one block per `uv` order, rows by phase exponent
/// and columns by Kähler exponent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TableKey {
    pub uv: i32,
    pub z: Vec<i32>,
    pub q: Vec<i32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    convention: Convention,
    q_names: Vec<String>,
    z_names: Vec<String>,
    entries: BTreeMap<TableKey, Rational>,
    ring: Arc<Ring>,
}

impl CoefficientTable {
    pub fn new(series: &TruncatedSeries, convention: Convention) -> Result<Self> {
        let ring = series.ring().clone();
        let vars = ring.vars();
        let uv_idx = vars.index_of(UV);
        let q_idx: Vec<usize> = (0..vars.n_small()).filter(|&k| Some(k) != uv_idx).collect();
        let z_idx: Vec<usize> = (vars.n_small()..vars.len()).collect();
        let mut entries = BTreeMap::new();
        for (e, c) in series.terms() {
            let key = TableKey {
                uv: uv_idx.map_or(0, |i| e[i]),
                z: z_idx.iter().map(|&i| e[i]).collect(),
                q: q_idx.iter().map(|&i| e[i]).collect(),
            };
            let zd: i64 = key.z.iter().map(|&x| x as i64).sum();
            let qd: i64 = key.q.iter().map(|&x| x as i64).sum();
            let a = c * Rational::from_integer(convention.sign(zd, qd).into());
            entries.insert(key, a);
        }
        Ok(CoefficientTable {
            convention,
            q_names: q_idx.iter().map(|&i| vars.name(i).to_string()).collect(),
            z_names: z_idx.iter().map(|&i| vars.name(i).to_string()).collect(),
            entries,
            ring,
        })
    }

    pub fn from_potential(pot: &EquivariantPotential, convention: Convention) -> Result<Self> {
        Self::new(&pot.lambda_coefficient, convention)
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn q_names(&self) -> &[String] {
        &self.q_names
    }

    pub fn z_names(&self) -> &[String] {
        &self.z_names
    }

    pub fn entries(&self) -> &BTreeMap<TableKey, Rational> {
        &self.entries
    }

    /// Entry at a position; absent positions are zero.
    pub fn get(&self, key: &TableKey) -> Rational {
        self.entries.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    /// Keeps entries whose phase exponents are all at most `max_z` and whose
    /// total Kähler degree is at most `max_q`.
    pub fn restrict(&self, max_z: Option<i32>, max_q: Option<i32>) -> Self {
        let mut out = self.clone();
        out.entries.retain(|k, _| {
            max_z.is_none_or(|m| k.z.iter().all(|&e| e <= m))
                && max_q.is_none_or(|m| k.q.iter().sum::<i32>() <= m)
        });
        out
    }

    /// Rebuilds the series the table describes.
    pub fn reconstruct(&self) -> Result<TruncatedSeries> {
        let vars = self.ring.vars();
        let mut terms = Vec::with_capacity(self.entries.len());
        for (k, a) in &self.entries {
            let mut e = vec![0; vars.len()];
            if let Some(i) = vars.index_of(UV) {
                e[i] = k.uv;
            }
            for (name, &x) in self.q_names.iter().zip(&k.q) {
                e[vars.index_of(name).unwrap()] = x;
            }
            for (name, &x) in self.z_names.iter().zip(&k.z) {
                e[vars.index_of(name).unwrap()] = x;
            }
            let zd: i64 = k.z.iter().map(|&x| x as i64).sum();
            let qd: i64 = k.q.iter().map(|&x| x as i64).sum();
            terms.push((e, a * Rational::from_integer(self.convention.sign(zd, qd).into())));
        }
        TruncatedSeries::from_terms(&self.ring, terms)
    }

    pub fn uv_orders(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.entries.keys().map(|k| k.uv).collect();
        v.dedup();
        v
    }

    /// Distinct phase rows and Kähler columns present in one `uv` block.
    pub fn block_axes(&self, uv: i32) -> (Vec<Vec<i32>>, Vec<Vec<i32>>) {
        let mut rows: Vec<Vec<i32>> = Vec::new();
        let mut cols: Vec<Vec<i32>> = Vec::new();
        for k in self.entries.keys().filter(|k| k.uv == uv) {
            if !rows.contains(&k.z) {
                rows.push(k.z.clone());
            }
            if !cols.contains(&k.q) {
                cols.push(k.q.clone());
            }
        }
        rows.sort();
        cols.sort_by_key(|q| (q.iter().sum::<i32>(), q.clone()));
        (rows, cols)
    }
}

fn widened(ring: &Ring) -> Result<Arc<Ring>> {
    let t = ring.trunc().clone();
    let w = t.z_window() + 1;
    ring.with_truncation(t.with_z_window(w))
}

/// Term-wise antiderivative of `log Z` at `uv = 0` in the phase variable
/// `wrt`, with zero integration constant. Returns the integrated part and the
/// terms with `wrt`-exponent `-1`, whose antiderivative is a logarithm. The
/// integrated part lives in a ring whose window is one wider.
pub fn av_potential_split(
    sol: &GluingSolution,
    wrt: &str,
) -> Result<(TruncatedSeries, TruncatedSeries)> {
    let log_z = sol.z.log()?.set_zero(UV)?;
    let ring = log_z.ring().clone();
    let idx = ring.vars().index_of(wrt).ok_or_else(|| Error::UnknownVariable(wrt.to_string()))?;
    if ring.vars().is_small(idx) {
        return Err(Error::Config(format!("`{wrt}` is not a phase variable")));
    }
    let out_ring = widened(&ring)?;
    let mut integrated = Vec::new();
    let mut logs = Vec::new();
    for (e, c) in log_z.terms() {
        if e[idx] == -1 {
            logs.push((e.clone(), c.clone()));
        } else {
            let mut e2 = e.clone();
            e2[idx] += 1;
            integrated.push((e2, c / Rational::from_integer((e[idx] + 1).into())));
        }
    }
    Ok((
        TruncatedSeries::from_terms(&out_ring, integrated)?,
        TruncatedSeries::from_terms(&ring, logs)?,
    ))
}

/// Like [`av_potential_split`] but fails if any logarithmic term is present.
pub fn av_potential(sol: &GluingSolution, wrt: &str) -> Result<TruncatedSeries> {
    let (integrated, logs) = av_potential_split(sol, wrt)?;
    if !logs.is_zero() {
        return Err(Error::LogarithmicTerms { var: wrt.to_string(), count: logs.len() });
    }
    Ok(integrated)
}

/// `W = -u v h + h f(z)` with `u`, `v`, `h` as separate formal variables.
#[derive(Clone, Debug)]
pub struct ImmersedTorusPotential {
    f_part: TruncatedSeries,
    w: TruncatedSeries,
}

impl ImmersedTorusPotential {
    pub fn new(slab: &SlabFunction) -> Result<Self> {
        let f = slab.series().clone();
        let fr = f.ring();
        let t = fr.trunc();
        let vars = fr.vars();
        let ns = vars.n_small();
        let uv_max = slab.uv_max();
        let mut small: Vec<String> = vars.small_names().to_vec();
        small.extend(["u", "v", "h"].map(String::from));
        let mut caps: Vec<Option<u32>> = (0..ns).map(|k| t.small_cap(k)).collect();
        caps.extend([Some(uv_max), Some(uv_max), Some(1)]);
        let mut trunc = Truncation::new(t.small_total_max() + 2 * uv_max + 1, t.z_window())
            .with_small_caps(caps);
        if !t.phase_slopes().is_empty() {
            trunc = trunc.with_phase_slopes(
                (0..vars.n_phase())
                    .map(|j| {
                        let mut row: Vec<u32> = (0..ns).map(|k| t.slope(j, k)).collect();
                        row.extend([0, 0, 0]);
                        row
                    })
                    .collect(),
            );
        }
        let ring = Ring::new(VariableSpec::new(small, vars.phase_names().to_vec())?, trunc)?;
        let u = TruncatedSeries::var(&ring, "u")?;
        let v = TruncatedSeries::var(&ring, "v")?;
        let h = TruncatedSeries::var(&ring, "h")?;
        let fe = f.embed(&ring)?;
        let w = &(&h * &fe) - &(&(&u * &v) * &h);
        Ok(ImmersedTorusPotential { f_part: f, w })
    }

    pub fn f_part(&self) -> &TruncatedSeries {
        &self.f_part
    }

    pub fn potential(&self) -> &TruncatedSeries {
        &self.w
    }

    pub fn derivative(&self, var: &str) -> Result<TruncatedSeries> {
        self.w.derivative(var)
    }

    /// `f - u v` in the potential's ring.
    pub fn f_minus_uv(&self) -> Result<TruncatedSeries> {
        let ring = self.w.ring();
        let uv = &TruncatedSeries::var(ring, "u")? * &TruncatedSeries::var(ring, "v")?;
        Ok(&self.f_part.embed(ring)? - &uv)
    }

    pub fn at_h_zero(&self) -> Result<TruncatedSeries> {
        self.w.set_zero("h")
    }

    /// `dW/du` and `dW/dv` at `h = 0`; both vanish on the critical locus.
    pub fn critical_residual(&self) -> Result<(TruncatedSeries, TruncatedSeries)> {
        Ok((self.derivative("u")?.set_zero("h")?, self.derivative("v")?.set_zero("h")?))
    }

    /// Symbolic form of the equivariant variant.
    pub fn equivariant_form(&self) -> String {
        let phase = self.f_part.ring().vars().phase_names();
        let args: Vec<String> = (1..=phase.len()).map(|j| format!("exp(x{j})")).collect();
        let lin: Vec<String> = (1..=phase.len()).map(|j| format!("x{j}*lambda{j}")).collect();
        let mut s = format!("W = -u*v*h + h*f({})", args.join(", "));
        for l in lin {
            s.push_str(" + ");
            s.push_str(&l);
        }
        s
    }

    /// `f(exp(x1), ..., exp(x_{n-1}))` with each `x_j` truncated at degree
    /// `x_order`.
    pub fn exponential_slab(&self, x_order: u32) -> Result<TruncatedSeries> {
        let f = &self.f_part;
        let fr = f.ring();
        let t = fr.trunc();
        let vars = fr.vars();
        let ns = vars.n_small();
        let xs: Vec<String> = (1..=vars.n_phase()).map(|j| format!("x{j}")).collect();
        let mut small: Vec<String> = vars.small_names().to_vec();
        small.extend(xs.iter().cloned());
        let mut caps: Vec<Option<u32>> = (0..ns).map(|k| t.small_cap(k)).collect();
        caps.extend(xs.iter().map(|_| Some(x_order)));
        let ring = Ring::new(
            VariableSpec::new(small, Vec::<String>::new())?,
            Truncation::new(t.small_total_max() + x_order, 0).with_small_caps(caps),
        )?;
        let images: Vec<TruncatedSeries> = xs
            .iter()
            .map(|x| TruncatedSeries::var(&ring, x)?.exp())
            .collect::<Result<_>>()?;
        let bindings: Vec<(&str, &TruncatedSeries)> =
            vars.phase_names().iter().map(String::as_str).zip(images.iter()).collect();
        f.substitute_into(&ring, &bindings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{integer, rational};
    use crate::slab::TruncationConfig;
    use crate::toric::{Frame, ToricCYData};

    fn c3_slab(uv: u32) -> SlabFunction {
        let d = ToricCYData::build(vec![vec![0, 0], vec![1, 0], vec![0, 1]], vec![0, 1, 2]).unwrap();
        let fr = Frame::standard(&d, 0).unwrap();
        SlabFunction::build(&d, &fr, &TruncationConfig::new(0, uv, 4)).unwrap()
    }

    fn kp2_inner() -> SlabFunction {
        let d = ToricCYData::build(vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![-1, -1]], vec![0, 1, 2])
            .unwrap();
        let fr = Frame::standard(&d, 0).unwrap();
        SlabFunction::build(&d, &fr, &TruncationConfig::new(3, 2, 4)).unwrap()
    }

    #[test]
    fn c3_closed_form() {
        let sol = solve_gluing(&c3_slab(3)).unwrap();
        let z = sol.z();
        assert_eq!(z.len(), 3);
        assert_eq!(z.coefficient_of(&[]).unwrap(), integer(1));
        assert_eq!(z.coefficient_of(&[("z2", 1)]).unwrap(), integer(1));
        assert_eq!(z.coefficient_of(&[("uv", 1)]).unwrap(), integer(-1));
        assert!(sol.residual_checked());
    }

    #[test]
    fn kp2_inner_leading_entries() {
        let sol = solve_gluing(&kp2_inner()).unwrap();
        let pot = sol.equivariant_potential().unwrap();
        let l = &pot.lambda_coefficient;
        assert_eq!(l.coefficient_of(&[("z2", 1)]).unwrap(), integer(1));
        assert_eq!(l.coefficient_of(&[("z2", 2)]).unwrap(), rational(-1, 2));
        let t = CoefficientTable::from_potential(&pot, Convention::Inner).unwrap();
        let key = |z, q, uv| TableKey { uv, z: vec![z], q: vec![q] };
        assert_eq!(t.get(&key(1, 1, 1)), integer(8));
        assert_eq!(t.get(&key(3, 3, 0)), rational(838, 3));
        assert_eq!(t.reconstruct().unwrap(), pot.lambda_coefficient);
    }

    #[test]
    fn untwisted_obstruction() {
        let slab = kp2_inner();
        assert_eq!(untwisted_leading_constant(&slab).unwrap(), integer(2));
        assert_eq!(check_untwisted(&slab), Err(Error::UntwistedObstruction(integer(2))));
    }

    #[test]
    fn plain_convention() {
        let r = Ring::new(VariableSpec::new(vec!["uv"], vec!["z"]).unwrap(), Truncation::new(1, 3))
            .unwrap();
        let s = TruncatedSeries::from_named_terms(
            &r,
            vec![(&[("z", 1)][..], integer(1)), (&[("z", 2)][..], rational(-1, 2))],
        )
        .unwrap();
        let t = CoefficientTable::new(&s, Convention::Plain).unwrap();
        assert_eq!(t.get(&TableKey { uv: 0, z: vec![1], q: vec![] }), integer(1));
        assert_eq!(t.get(&TableKey { uv: 0, z: vec![2], q: vec![] }), rational(-1, 2));
        for c in Convention::ALL {
            assert_eq!(CoefficientTable::new(&s, c).unwrap().reconstruct().unwrap(), s);
        }
    }

    #[test]
    fn av_potential_c3() {
        let sol = solve_gluing(&c3_slab(1)).unwrap();
        let av = av_potential(&sol, "z2").unwrap();
        assert_eq!(av.coefficient_of(&[("z2", 2)]).unwrap(), rational(1, 2));
        assert_eq!(av.coefficient_of(&[("z2", 3)]).unwrap(), rational(-1, 6));
        let back = av.derivative("z2").unwrap().embed(sol.z().ring()).unwrap();
        assert_eq!(back, sol.z().log().unwrap().set_zero(UV).unwrap());
    }

    #[test]
    fn av_potential_reports_logs() {
        let sol = solve_gluing(&kp2_inner()).unwrap();
        let err = av_potential(&sol, "z2").unwrap_err();
        assert!(matches!(err, Error::LogarithmicTerms { .. }));
        let (int, logs) = av_potential_split(&sol, "z2").unwrap();
        assert!(!logs.is_zero());
        for j in 1..4 {
            let sign = if j % 2 == 1 { 1 } else { -1 };
            assert_eq!(
                int.coefficient_of(&[("z2", j + 1)]).unwrap(),
                rational(sign, (j * (j + 1)) as i64)
            );
        }
    }

    #[test]
    fn immersed_potential() {
        let p = ImmersedTorusPotential::new(&kp2_inner()).unwrap();
        assert_eq!(p.derivative("h").unwrap(), p.f_minus_uv().unwrap());
        assert!(p.at_h_zero().unwrap().is_zero());
        let (du, dv) = p.critical_residual().unwrap();
        assert!(du.is_zero() && dv.is_zero());
        assert!(p.equivariant_form().contains("x2*lambda2"));
        let e = p.exponential_slab(2).unwrap();
        assert_eq!(e.coefficient_of(&[]).unwrap(), integer(3));
        assert_eq!(e.coefficient_of(&[("x1", 1)]).unwrap(), integer(1));
        assert_eq!(e.coefficient_of(&[("q", 1), ("x1", 1)]).unwrap(), integer(-1));
    }
}
