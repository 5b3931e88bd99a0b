use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Zero;

use super::{index, Ring, TruncatedSeries};
use crate::error::{Error, Result};

struct Bound {
    image: TruncatedSeries,
    inverse: Option<TruncatedSeries>,
}

/// Smallest weighted phase degree of any term, per phase variable, capped at 0.
fn min_weights(s: &TruncatedSeries) -> Vec<i64> {
    let r = s.ring();
    (0..r.vars().n_phase())
        .map(|j| s.terms().map(|(e, _)| r.phase_weight(e, j)).min().unwrap_or(0).min(0))
        .collect()
}

impl TruncatedSeries {
    /// Composition. All images must live in one common ring, which becomes the
    /// ring of the result; unbound variables are carried over by name.
    ///
    /// With no bindings this is the identity.
    pub fn substitute(&self, bindings: &[(&str, &TruncatedSeries)]) -> Result<Self> {
        match bindings.first() {
            None => Ok(self.clone()),
            Some((_, s)) => self.substitute_into(&s.ring().clone(), bindings),
        }
    }

    /// Composition into an explicit target ring.
    ///
    /// A bound small variable needs an image without constant term. A bound
    /// phase variable raised to a negative power needs an image of the form
    /// monomial times a series that [`invert`](Self::invert) accepts. For each
    /// source monomial the powers of the images are multiplied and the unbound
    /// part is applied as an exact shift. Partial products can have negative
    /// weighted phase degree that a later factor cancels, so the work happens
    /// with the window widened by the largest such deficit and the result is
    /// cut back to the target.
    pub fn substitute_into(
        &self,
        target: &Arc<Ring>,
        bindings: &[(&str, &TruncatedSeries)],
    ) -> Result<Self> {
        let src = self.ring().vars();
        let mut bound: HashMap<usize, Bound> = HashMap::new();
        for &(name, image) in bindings {
            let i = index(self.ring(), name)?;
            if **image.ring() != **target {
                return Err(Error::InvalidBinding {
                    var: name.to_string(),
                    reason: "image lives in a different ring".into(),
                });
            }
            if src.is_small(i) && !image.constant_term().is_zero() {
                return Err(Error::InvalidBinding {
                    var: name.to_string(),
                    reason: "small variable image has a nonzero constant term".into(),
                });
            }
            if bound.insert(i, Bound { image: image.clone(), inverse: None }).is_some() {
                return Err(Error::InvalidBinding {
                    var: name.to_string(),
                    reason: "bound twice".into(),
                });
            }
        }
        let mut pass: Vec<Option<usize>> = Vec::with_capacity(src.len());
        for (i, name) in src.names().enumerate() {
            if bound.contains_key(&i) {
                pass.push(None);
            } else {
                let used = self.terms().any(|(e, _)| e[i] != 0);
                match target.vars().index_of(name) {
                    Some(j) => pass.push(Some(j)),
                    None if used => return Err(Error::UnknownVariable(name.to_string())),
                    None => pass.push(None),
                }
            }
        }
        let shift_of = |e: &[i32]| {
            let mut shift = vec![0; target.n_vars()];
            for (i, &p) in e.iter().enumerate() {
                if let Some(j) = pass[i] {
                    shift[j] += p;
                }
            }
            shift
        };

        // Deficit bound: every factor of a term has weight at least minus its
        // share, so partial products stay within `window + extra`.
        let n_phase = target.vars().n_phase();
        let mut extra = 0i64;
        if n_phase > 0 {
            let mut lows: HashMap<(usize, bool), Vec<i64>> = HashMap::new();
            for (e, _) in self.terms() {
                let shift = shift_of(e);
                let mut deficit: Vec<i64> =
                    (0..n_phase).map(|j| (-target.phase_weight(&shift, j)).max(0)).collect();
                for (i, &p) in e.iter().enumerate() {
                    if p == 0 || pass[i].is_some() || !bound.contains_key(&i) {
                        continue;
                    }
                    if !lows.contains_key(&(i, p > 0)) {
                        let b = bound.get_mut(&i).expect("bound variable");
                        let base = if p > 0 {
                            b.image.clone()
                        } else {
                            checked_inverse(&b.image, src.name(i))?
                        };
                        lows.insert((i, p > 0), min_weights(&base));
                    }
                    for (d, lo) in deficit.iter_mut().zip(&lows[&(i, p > 0)]) {
                        *d += -lo * p.unsigned_abs() as i64;
                    }
                }
                extra = extra.max(deficit.into_iter().max().unwrap_or(0));
            }
        }
        let work = if extra == 0 {
            target.clone()
        } else {
            let t = target.trunc().clone();
            let w = t.z_window() as i64 + extra;
            target.with_truncation(t.with_z_window(u32::try_from(w).map_err(|_| {
                Error::InvalidTruncation("substitution window overflow".into())
            })?))?
        };
        if extra != 0 {
            for b in bound.values_mut() {
                b.image = b.image.embed(&work)?;
            }
        }

        let mut cache: HashMap<(usize, i32), TruncatedSeries> = HashMap::new();
        let mut out = Self::zero(&work);
        for (e, c) in self.terms() {
            let mut product = Self::one(&work);
            for (i, &p) in e.iter().enumerate() {
                if p == 0 || pass[i].is_some() || !bound.contains_key(&i) {
                    continue;
                }
                let factor = power(&mut cache, &mut bound, src.name(i), i, p)?;
                product = &product * &factor;
                if product.is_zero() {
                    break;
                }
            }
            if product.is_zero() {
                continue;
            }
            out = &out + &product.shift(&shift_of(e))?.scale(c);
        }
        if extra == 0 {
            Ok(out)
        } else {
            out.embed(target)
        }
    }
}

fn checked_inverse(image: &TruncatedSeries, name: &str) -> Result<TruncatedSeries> {
    inverse(image).map_err(|e| Error::InvalidBinding {
        var: name.to_string(),
        reason: format!("negative power undefined: {e}"),
    })
}

fn power(
    cache: &mut HashMap<(usize, i32), TruncatedSeries>,
    bound: &mut HashMap<usize, Bound>,
    name: &str,
    i: usize,
    p: i32,
) -> Result<TruncatedSeries> {
    if let Some(s) = cache.get(&(i, p)) {
        return Ok(s.clone());
    }
    let b = bound.get_mut(&i).expect("bound variable");
    let base = if p > 0 {
        b.image.clone()
    } else {
        if b.inverse.is_none() {
            b.inverse = Some(checked_inverse(&b.image, name)?);
        }
        b.inverse.clone().unwrap()
    };
    let step = if p > 0 { 1 } else { -1 };
    let result = if p == step {
        base
    } else {
        let prev = power(cache, bound, name, i, p - step)?;
        &prev * &base
    };
    cache.insert((i, p), result.clone());
    Ok(result)
}

/// Inverse of `monomial * unit`: tries each term as the monomial factor.
fn inverse(g: &TruncatedSeries) -> Result<TruncatedSeries> {
    if !g.constant_term().is_zero() {
        return g.invert();
    }
    if g.is_zero() {
        return Err(Error::ZeroConstantTerm);
    }
    for (m, _) in g.terms() {
        let neg: Vec<i32> = m.iter().map(|x| -x).collect();
        let h = g.shift(&neg)?;
        if h.len() != g.len() {
            continue;
        }
        if let Ok(hinv) = h.invert() {
            let inv = hinv.shift(&neg)?;
            if !inv.is_zero() {
                return Ok(inv);
            }
        }
    }
    Err(Error::ZeroConstantTerm)
}
