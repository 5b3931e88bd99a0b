//! Mirrors given directly as series: the infinite-product local surface and
//! the theta-function family with its correction factor `Delta`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::series::{Rational, Ring, TruncatedSeries, Truncation, VariableSpec};
use crate::slab::{geometry_ring, SlabFunction, TruncationConfig};

/// `prod_{i>=1} (1 + q^i z^-1) prod_{j>=0} (1 + q^j z)`.
#[derive(Clone, Debug)]
pub struct SurfaceMirror {
    pub series: TruncatedSeries,
}

fn surface_ring(cfg: &TruncationConfig, with_uv: bool) -> Result<Arc<Ring>> {
    // Every factor has weight >= 0 under slope 1, and at Kähler degree <= Q the
    // weight never exceeds 2Q + 1, so this window keeps the product complete.
    let z_window = cfg.z_window.max(cfg.q_total + 1);
    let cfg = TruncationConfig { z_window, ..cfg.clone() };
    geometry_ring(&["q".to_string()], with_uv, &["z".to_string()], &[1], &cfg)
}

fn product_side(ring: &Arc<Ring>, q_max: u32) -> Result<TruncatedSeries> {
    let one = TruncatedSeries::one(ring);
    let mut f = one.clone();
    for i in 1..=q_max as i32 {
        let t = TruncatedSeries::monomial(ring, vec![i, -1], Rational::one())?;
        f = &f * &(&one + &t);
    }
    for j in 0..=q_max as i32 {
        let t = TruncatedSeries::monomial(ring, vec![j, 1], Rational::one())?;
        f = &f * &(&one + &t);
    }
    Ok(f)
}

impl SurfaceMirror {
    pub fn build(cfg: &TruncationConfig) -> Result<Self> {
        let ring = surface_ring(cfg, false)?;
        Ok(SurfaceMirror { series: product_side(&ring, cfg.q_total)? })
    }

    pub fn into_slab(self, uv_max: u32) -> Result<SlabFunction> {
        SlabFunction::from_series(self.series, "z", uv_max)
    }
}

/// Compares the product with `prod 1/(1 - q^k) * sum_l q^{l(l-1)/2} z^l` at
/// Kähler degree `q_max`.
pub fn triple_product_check(q_max: u32, z_window: u32) -> Result<bool> {
    let cfg = TruncationConfig::new(q_max, 0, z_window);
    let ring = geometry_ring(&["q".to_string()], false, &["z".to_string()], &[1], &cfg)?;
    let lhs = product_side(&ring, q_max)?;
    let one = TruncatedSeries::one(&ring);
    let mut euler = one.clone();
    for k in 1..=q_max as i32 {
        let qk = TruncatedSeries::monomial(&ring, vec![k, 0], Rational::one())?;
        euler = &euler * &(&one - &qk).invert()?;
    }
    let mut theta = Vec::new();
    let bound = q_max as i64;
    let mut l: i64 = 0;
    while l * (l - 1) / 2 <= bound {
        theta.push((vec![(l * (l - 1) / 2) as i32, l as i32], Rational::one()));
        if l != 0 && (-l) * (-l - 1) / 2 <= bound {
            theta.push((vec![((-l) * (-l - 1) / 2) as i32, -l as i32], Rational::one()));
        }
        l += 1;
    }
    let theta = TruncatedSeries::from_terms(&ring, theta)?;
    Ok(lhs == &euler * &theta)
}

/// Names of the theta family's Kähler variables.
pub const ABELIAN_Q: [&str; 3] = ["q1", "q2", "qs"];

/// `Delta * sum_{(j,k)} qs^{(j+k)(j+k-1)/2} q2^{j(j-1)/2} q1^{k(k-1)/2} z1^j z2^k`.
#[derive(Clone, Debug)]
pub struct AbelianFamilyMirror {
    pub series: TruncatedSeries,
    pub delta: TruncatedSeries,
}

fn abelian_caps(cfg: &TruncationConfig) -> Result<[u32; 3]> {
    match &cfg.q_caps {
        None => Ok([cfg.q_total; 3]),
        Some(c) if c.len() == 3 => Ok([c[0], c[1], c[2]]),
        Some(_) => Err(Error::Config("the theta family needs three Kähler caps".into())),
    }
}

/// `Delta = exp(sum_{j>=2} (-1)^j/j S_j)`, where `S_j` sums, over ordered
/// `j`-tuples of nonzero `l in Z^2` with zero sum, the monomial
/// `q1^{sum l1^2/2} q2^{sum l2^2/2} qs^{sum (l1+l2)^2/2}`.
///
/// Exponents are handled doubled. A tuple with partial sum `s` still needs
/// doubled `q1`-degree at least `|s1|` to return to zero (as `l^2 >= |l|`), and
/// likewise for `q2` with `s2` and `qs` with `s1 + s2`; partial tuples beyond
/// the caps by that bound are dropped. Each nonzero `l` adds doubled total
/// degree at least 2, which bounds the tuple length.
pub fn theta_delta(ring: &Arc<Ring>, caps: [u32; 3]) -> Result<TruncatedSeries> {
    let total_cap = ring.trunc().small_total_max() as i64;
    let dcaps: [i64; 3] = caps.map(|c| 2 * c as i64);
    let mono = |l: (i64, i64)| [l.0 * l.0, l.1 * l.1, (l.0 + l.1) * (l.0 + l.1)];
    let r = (dcaps[0].max(dcaps[1]) as f64).sqrt() as i64 + 1;
    let vecs: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|a| (-r..=r).map(move |b| (a, b)))
        .filter(|&l| l != (0, 0))
        .filter(|&l| mono(l).iter().zip(&dcaps).all(|(m, c)| m <= c))
        .collect();

    type Poly = BTreeMap<[i64; 3], Rational>;
    let viable = |s: (i64, i64), e: &[i64; 3]| {
        e[0] + s.0.abs() <= dcaps[0]
            && e[1] + s.1.abs() <= dcaps[1]
            && e[2] + (s.0 + s.1).abs() <= dcaps[2]
            && e.iter().sum::<i64>() <= 2 * total_cap
    };

    let mut log_terms: Poly = BTreeMap::new();
    let mut states: BTreeMap<(i64, i64), Poly> = BTreeMap::new();
    states.insert((0, 0), BTreeMap::from([([0, 0, 0], Rational::one())]));
    let max_len = (dcaps.iter().sum::<i64>() / 2).max(1);
    for len in 1..=max_len {
        let mut next: BTreeMap<(i64, i64), Poly> = BTreeMap::new();
        for (s, poly) in &states {
            for &l in &vecs {
                let ns = (s.0 + l.0, s.1 + l.1);
                let m = mono(l);
                for (e, c) in poly {
                    let ne = [e[0] + m[0], e[1] + m[1], e[2] + m[2]];
                    if !viable(ns, &ne) {
                        continue;
                    }
                    *next.entry(ns).or_default().entry(ne).or_insert_with(Rational::zero) += c;
                }
            }
        }
        states = next;
        if states.is_empty() {
            break;
        }
        if len >= 2 {
            if let Some(p) = states.get(&(0, 0)) {
                let sign = if len % 2 == 0 { 1 } else { -1 };
                let w = Rational::new(sign.into(), len.into());
                for (e, c) in p {
                    *log_terms.entry(*e).or_insert_with(Rational::zero) += c * &w;
                }
            }
        }
    }

    let vars = ring.vars();
    let idx: Vec<usize> = ABELIAN_Q
        .iter()
        .map(|n| vars.index_of(n).ok_or_else(|| Error::UnknownVariable(n.to_string())))
        .collect::<Result<_>>()?;
    let mut terms = Vec::new();
    for (e, c) in log_terms {
        debug_assert!(e.iter().all(|x| x % 2 == 0));
        let mut exps = vec![0; vars.len()];
        for (k, &i) in idx.iter().enumerate() {
            exps[i] = (e[k] / 2) as i32;
        }
        terms.push((exps, c));
    }
    TruncatedSeries::from_terms(ring, terms)?.exp()
}

impl AbelianFamilyMirror {
    /// `cfg.q_caps` (or `q_total` for each) bounds `q1, q2, qs`.
    pub fn build(cfg: &TruncationConfig) -> Result<Self> {
        let caps = abelian_caps(cfg)?;
        let cfg = TruncationConfig {
            q_caps: Some(caps.to_vec()),
            q_total: cfg.q_total.min(caps.iter().sum()),
            ..cfg.clone()
        };
        let q: Vec<String> = ABELIAN_Q.iter().map(|s| s.to_string()).collect();
        let ring = geometry_ring(&q, false, &["z1".to_string(), "z2".to_string()], &[1, 1], &cfg)?;
        let delta = theta_delta(&ring, caps)?;

        let reach = |c: u32| {
            let mut m = 0i64;
            while (m + 1) * m / 2 <= c as i64 {
                m += 1;
            }
            m
        };
        let r = reach(caps[0].max(caps[1]).max(caps[2])) + 1;
        let mut theta = Vec::new();
        for j in -r..=r {
            for k in -r..=r {
                let tri = |x: i64| x * (x - 1) / 2;
                let e = vec![tri(k) as i32, tri(j) as i32, tri(j + k) as i32, j as i32, k as i32];
                if (0..3).all(|i| e[i] as u32 <= caps[i]) {
                    theta.push((e, Rational::one()));
                }
            }
        }
        let theta = TruncatedSeries::from_terms(&ring, theta)?;
        Ok(AbelianFamilyMirror { series: &delta * &theta, delta })
    }

    pub fn into_slab(self, uv_max: u32) -> Result<SlabFunction> {
        SlabFunction::from_series(self.series, "z1", uv_max)
    }
}

/// Exchanges `q1 <-> q2` and `z1 <-> z2`.
pub fn swap_symmetry(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    let vars = s.ring().vars();
    let pairs = [("q1", "q2"), ("z1", "z2")];
    let mut perm: Vec<usize> = (0..vars.len()).collect();
    for (a, b) in pairs {
        let ia = vars.index_of(a).ok_or_else(|| Error::UnknownVariable(a.into()))?;
        let ib = vars.index_of(b).ok_or_else(|| Error::UnknownVariable(b.into()))?;
        perm.swap(ia, ib);
    }
    TruncatedSeries::from_terms(
        s.ring(),
        s.terms().map(|(e, c)| (perm.iter().map(|&p| e[p]).collect(), c.clone())),
    )
}

/// Plain small ring used by the tests and corpus for `Delta` alone.
pub fn delta_ring(caps: [u32; 3]) -> Result<Arc<Ring>> {
    Ring::new(
        VariableSpec::new(ABELIAN_Q.to_vec(), Vec::<&str>::new())?,
        Truncation::new(caps.iter().sum(), 0).with_small_caps(caps.map(Some).to_vec()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{integer, rational};
    use crate::solver::solve_gluing;

    #[test]
    fn surface_low_orders() {
        let m = SurfaceMirror::build(&TruncationConfig::new(1, 0, 3)).unwrap();
        let s = &m.series;
        let q0 = s.extract(&[("q", 0)]).unwrap().into_series().unwrap();
        assert_eq!(q0.len(), 2);
        let q1 = s.extract(&[("q", 1)]).unwrap().into_series().unwrap();
        for e in [-1, 0, 1, 2] {
            assert_eq!(q1.coefficient_of(&[("z", e)]).unwrap(), integer(1));
        }
        assert_eq!(q1.len(), 4);
    }

    #[test]
    fn triple_product() {
        assert!(triple_product_check(0, 2).unwrap());
        assert!(triple_product_check(1, 2).unwrap());
        assert!(triple_product_check(5, 5).unwrap());
    }

    #[test]
    fn surface_potential_q0_column() {
        let cfg = TruncationConfig::new(2, 4, 3);
        let slab = SurfaceMirror::build(&cfg).unwrap().into_slab(4).unwrap();
        let sol = solve_gluing(&slab).unwrap();
        let log = sol.z().log().unwrap();
        for l in 1..=4 {
            assert_eq!(log.coefficient_of(&[("uv", l)]).unwrap(), rational(-1, l as i64));
        }
        assert_eq!(log.coefficient_of(&[("uv", 1), ("q", 1)]).unwrap(), integer(-2));
    }

    #[test]
    fn delta_low_terms() {
        let ring = delta_ring([2, 2, 2]).unwrap();
        let d = theta_delta(&ring, [2, 2, 2]).unwrap();
        let c = |a, b, s| d.coefficient(&[a, b, s]);
        assert_eq!(c(0, 0, 0), integer(1));
        assert_eq!(c(0, 1, 1), integer(1));
        assert_eq!(c(1, 0, 1), integer(1));
        assert_eq!(c(1, 1, 0), integer(1));
        assert_eq!(c(1, 1, 1), integer(-4));
        assert_eq!(c(0, 2, 2), integer(2));
        assert_eq!(c(2, 2, 2), integer(177));
        assert_eq!(c(1, 2, 2), integer(-28));
        assert_eq!(c(0, 0, 1), integer(0));
    }

    #[test]
    fn abelian_shape() {
        let cfg = TruncationConfig::new(6, 0, 2).with_q_caps(vec![2, 2, 2]);
        let m = AbelianFamilyMirror::build(&cfg).unwrap();
        let s = &m.series;
        let free = s.filter(|e| e[..3].iter().all(|&x| x == 0));
        assert_eq!(free.len(), 3);
        assert_eq!(s.coefficient_of(&[("qs", 1), ("z1", 1), ("z2", 1)]).unwrap(), integer(1));
        assert_eq!(swap_symmetry(s).unwrap(), *s);
    }

    #[test]
    fn abelian_w_minus_two_block() {
        let cfg = TruncationConfig::new(6, 0, 2).with_q_caps(vec![2, 2, 2]);
        let slab = AbelianFamilyMirror::build(&cfg).unwrap().into_slab(0).unwrap();
        let sol = solve_gluing(&slab).unwrap();
        let log = sol.z().log().unwrap();
        let c = |q1, q2| log.coefficient_of(&[("q1", q1), ("q2", q2), ("z2", -2)]).unwrap();
        assert_eq!(c(2, 2), rational(3, 2));
        assert_eq!(c(2, 1), integer(-2));
        assert_eq!(c(2, 0), rational(1, 2));
    }
}
