//! Hypergeometric series `g_i`, the mirror map and its inverse, and the
//! open correction series `1 + delta_i = exp(g_i(Q(q)))`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::series::{Rational, Ring, TruncatedSeries, Truncation, VariableSpec};
use crate::toric::ToricCYData;

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn names(data: &ToricCYData, stem: &str) -> Vec<String> {
    match data.n_generators() {
        1 => vec![stem.to_string()],
        k => (1..=k).map(|i| format!("{stem}{i}")).collect(),
    }
}

/// Kähler parameter names: `q` for a single generator, else `q1, q2, ...`.
pub fn kahler_names(data: &ToricCYData) -> Vec<String> {
    names(data, "q")
}

/// Complex-structure parameter names, `Q` or `Q1, Q2, ...`.
pub fn mirror_names(data: &ToricCYData) -> Vec<String> {
    names(data, "Q")
}

fn power_ring(names: Vec<String>, order: u32) -> Result<Arc<Ring>> {
    Ring::new(VariableSpec::new(names, Vec::<String>::new())?, Truncation::new(order, 0))
}

pub fn kahler_ring(data: &ToricCYData, order: u32) -> Result<Arc<Ring>> {
    power_ring(kahler_names(data), order)
}

pub fn mirror_ring(data: &ToricCYData, order: u32) -> Result<Arc<Ring>> {
    power_ring(mirror_names(data), order)
}

/// `g_i(Q)` for the divisor of point `i` (0-based), in the mirror ring.
pub fn g_series(data: &ToricCYData, i: usize, order: u32) -> Result<TruncatedSeries> {
    g_series_in(data, i, &mirror_ring(data, order)?)
}

fn g_series_in(data: &ToricCYData, i: usize, ring: &Arc<Ring>) -> Result<TruncatedSeries> {
    if i >= data.m() {
        return Err(Error::IndexOutOfRange { index: i, max: data.m() - 1 });
    }
    let order = ring.trunc().small_total_max();
    let mut terms = Vec::new();
    'class: for class in data.enumerate_effective(order) {
        let di = data.pair_class(i, &class);
        if di >= 0 {
            continue;
        }
        let mut denom = BigInt::one();
        for j in 0..data.m() {
            if j == i {
                continue;
            }
            let dj = data.pair_class(j, &class);
            if dj < 0 {
                continue 'class;
            }
            denom *= factorial(dj as u64);
        }
        let sign = if di % 2 == 0 { 1 } else { -1 };
        let numer = factorial((-di - 1) as u64) * sign;
        let exps = class.iter().map(|&d| d as i32).collect();
        terms.push((exps, Rational::new(numer, denom)));
    }
    TruncatedSeries::from_terms(ring, terms)
}

#[derive(Clone, Debug)]
pub struct MirrorMap {
    order: u32,
    /// `g_i(Q)` for every point index.
    g: Vec<TruncatedSeries>,
    /// `q_k(Q)`, in the mirror ring.
    forward: Vec<TruncatedSeries>,
    /// `Q_k(q)`, in the Kähler ring.
    inverse: Vec<TruncatedSeries>,
    rounds: usize,
    mirror_names: Vec<String>,
}

impl MirrorMap {
    pub fn compute(data: &ToricCYData, order: u32) -> Result<Self> {
        let mring = mirror_ring(data, order)?;
        let kring = kahler_ring(data, order)?;
        let mnames = mirror_names(data);
        let knames = kahler_names(data);
        let g: Vec<TruncatedSeries> =
            (0..data.m()).map(|i| g_series_in(data, i, &mring)).collect::<Result<_>>()?;

        // E_k = sum_i (C_k . D_i) g_i
        let exponents: Vec<TruncatedSeries> = (0..data.n_generators())
            .map(|k| {
                g.iter().enumerate().fold(TruncatedSeries::zero(&mring), |acc, (i, gi)| {
                    let c = data.pairing(i, k);
                    if c == 0 {
                        acc
                    } else {
                        &acc + &gi.scale(&Rational::from_integer(c.into()))
                    }
                })
            })
            .collect();

        let forward = exponents
            .iter()
            .zip(&mnames)
            .map(|(e, name)| Ok(&TruncatedSeries::var(&mring, name)? * &e.neg().exp()?))
            .collect::<Result<Vec<_>>>()?;

        let qvars: Vec<TruncatedSeries> =
            knames.iter().map(|n| TruncatedSeries::var(&kring, n)).collect::<Result<_>>()?;
        let mut inverse = qvars.clone();
        let mut rounds = 0;
        for _ in 0..order.max(1) {
            rounds += 1;
            let bindings: Vec<(&str, &TruncatedSeries)> =
                mnames.iter().map(String::as_str).zip(inverse.iter()).collect();
            let next = exponents
                .iter()
                .zip(&qvars)
                .map(|(e, q)| Ok(q * &e.substitute_into(&kring, &bindings)?.exp()?))
                .collect::<Result<Vec<_>>>()?;
            let stable = next == inverse;
            inverse = next;
            if stable {
                break;
            }
        }

        Ok(MirrorMap { order, g, forward, inverse, rounds, mirror_names: mnames })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn g(&self, i: usize) -> &TruncatedSeries {
        &self.g[i]
    }

    pub fn forward(&self) -> &[TruncatedSeries] {
        &self.forward
    }

    pub fn inverse(&self) -> &[TruncatedSeries] {
        &self.inverse
    }

    /// Fixed-point rounds used for the inverse.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    fn inverse_bindings(&self) -> Vec<(&str, &TruncatedSeries)> {
        self.mirror_names.iter().map(String::as_str).zip(self.inverse.iter()).collect()
    }

    /// `exp(g_i(Q(q))) - 1`, in the Kähler ring.
    pub fn delta(&self, i: usize) -> Result<TruncatedSeries> {
        let gi = self.g.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            max: self.g.len().saturating_sub(1),
        })?;
        let Some(kring) = self.inverse.first().map(|s| s.ring().clone()) else {
            return Ok(TruncatedSeries::zero(gi.ring()));
        };
        let composed = gi.substitute_into(&kring, &self.inverse_bindings())?;
        Ok(&composed.exp()? - &TruncatedSeries::one(&kring))
    }

    /// `q_k(Q(q))` for every `k`; equals `q_k` when the map is consistent.
    pub fn forward_after_inverse(&self) -> Result<Vec<TruncatedSeries>> {
        let Some(kring) = self.inverse.first().map(|s| s.ring().clone()) else {
            return Ok(Vec::new());
        };
        let b = self.inverse_bindings();
        self.forward.iter().map(|f| f.substitute_into(&kring, &b)).collect()
    }

    /// `Q_k(q(Q))` for every `k`; equals `Q_k` when the map is consistent.
    pub fn inverse_after_forward(&self) -> Result<Vec<TruncatedSeries>> {
        let Some(mring) = self.forward.first().map(|s| s.ring().clone()) else {
            return Ok(Vec::new());
        };
        let knames: Vec<String> = self.inverse[0].ring().vars().small_names().to_vec();
        let b: Vec<(&str, &TruncatedSeries)> =
            knames.iter().map(String::as_str).zip(self.forward.iter()).collect();
        self.inverse.iter().map(|f| f.substitute_into(&mring, &b)).collect()
    }

    /// True when both compositions are the identity at this order.
    pub fn round_trip_holds(&self) -> Result<bool> {
        let fi = self.forward_after_inverse()?;
        let ifw = self.inverse_after_forward()?;
        let ok_f = fi.iter().zip(&self.inverse).enumerate().all(|(k, (s, inv))| {
            let name = &inv.ring().vars().small_names()[k];
            TruncatedSeries::var(inv.ring(), name).is_ok_and(|v| v == *s)
        });
        let ok_i = ifw.iter().zip(&self.forward).enumerate().all(|(k, (s, fw))| {
            let name = &fw.ring().vars().small_names()[k];
            TruncatedSeries::var(fw.ring(), name).is_ok_and(|v| v == *s)
        });
        Ok(ok_f && ok_i)
    }
}
