//! The slab function `f = sum_i (1 + delta_i) q^{C_i} z^{w_i}` in framed
//! coordinates.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mirror_map::{kahler_names, MirrorMap};
use crate::series::{Rational, Ring, TruncatedSeries, Truncation, VariableSpec};
use crate::toric::{Frame, ToricCYData};

/// User-facing truncation of a geometry.
///
/// `z_window` bounds the printed phase exponents from above. Internally the
/// window is sheared by the Kähler degree (see [`Truncation`]) so that every
/// monomial `q^k z^e` with `-slope*k <= e <= z_window` is computed exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub q_total: u32,
    pub uv_max: u32,
    pub z_window: u32,
    /// Optional per-Kähler-variable caps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_caps: Option<Vec<u32>>,
}

impl TruncationConfig {
    pub fn new(q_total: u32, uv_max: u32, z_window: u32) -> Self {
        TruncationConfig { q_total, uv_max, z_window, q_caps: None }
    }

    pub fn with_q_caps(mut self, caps: Vec<u32>) -> Self {
        self.q_caps = Some(caps);
        self
    }
}

/// One summand of the slab function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlabTerm {
    /// Point index (0-based).
    pub index: usize,
    pub z_exponent: Vec<i64>,
    /// Multiplicities of the curve-class generators in the q-charge.
    pub charge: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct SlabFunction {
    series: TruncatedSeries,
    frame: Option<Frame>,
    provenance: Vec<SlabTerm>,
    solve_var: String,
    uv_max: u32,
}

pub fn phase_names(count: usize) -> Vec<String> {
    (1..=count).map(|j| format!("z{j}")).collect()
}

/// Smallest slope per phase variable making every `(charge, exponent)` pair
/// nonnegative in weighted degree.
pub fn required_slopes(terms: &[(u32, Vec<i64>)], n_phase: usize) -> Result<Vec<u32>> {
    let mut slopes = vec![0u32; n_phase];
    for (deg, w) in terms {
        for (j, &e) in w.iter().enumerate() {
            if e >= 0 {
                continue;
            }
            if *deg == 0 {
                return Err(Error::UnsupportedFraming(format!(
                    "uncharged term with negative exponent {e} in z{}",
                    j + 1
                )));
            }
            let need = (-e as u32).div_ceil(*deg);
            slopes[j] = slopes[j].max(need);
        }
    }
    Ok(slopes)
}

/// A ring with Kähler variables, optionally `uv`, and phase variables.
pub(crate) fn geometry_ring(
    q_names: &[String],
    with_uv: bool,
    phase: &[String],
    slopes: &[u32],
    cfg: &TruncationConfig,
) -> Result<Arc<Ring>> {
    let mut small: Vec<String> = q_names.to_vec();
    let mut caps: Vec<Option<u32>> = match &cfg.q_caps {
        Some(c) if c.len() == q_names.len() => c.iter().map(|&x| Some(x)).collect(),
        Some(_) => {
            return Err(Error::Config("q_caps must have one entry per Kähler variable".into()))
        }
        None => vec![Some(cfg.q_total); q_names.len()],
    };
    let mut total = cfg.q_total;
    if with_uv {
        small.push(crate::series::UV.to_string());
        caps.push(Some(cfg.uv_max));
        total += cfg.uv_max;
    }
    let max_slope = slopes.iter().copied().max().unwrap_or(0);
    let window = cfg.z_window + max_slope * cfg.q_total;
    let slope_rows: Vec<Vec<u32>> = slopes
        .iter()
        .map(|&s| {
            let mut row = vec![s; q_names.len()];
            if with_uv {
                row.push(0);
            }
            row
        })
        .collect();
    Ring::new(
        VariableSpec::new(small, phase.to_vec())?,
        Truncation::new(total, window).with_small_caps(caps).with_phase_slopes(slope_rows),
    )
}

impl SlabFunction {
    pub fn build(data: &ToricCYData, frame: &Frame, cfg: &TruncationConfig) -> Result<Self> {
        let n_phase = data.n() - 1;
        let phase = phase_names(n_phase);
        let q_names = kahler_names(data);

        let mut provenance = Vec::with_capacity(data.m());
        for i in 0..data.m() {
            let z_exponent = frame.exponent(data, i)?;
            let mut charge = vec![0u32; data.n_generators()];
            if let Some(k) = data.generator_position(i) {
                charge[k] = 1;
            }
            provenance.push(SlabTerm { index: i, z_exponent, charge });
        }
        let slopes = required_slopes(
            &provenance
                .iter()
                .map(|t| (t.charge.iter().sum(), t.z_exponent.clone()))
                .collect::<Vec<_>>(),
            n_phase,
        )?;
        let ring = geometry_ring(&q_names, false, &phase, &slopes, cfg)?;

        let mm = if data.n_generators() > 0 {
            Some(MirrorMap::compute(data, cfg.q_total)?)
        } else {
            None
        };
        let mut series = TruncatedSeries::zero(&ring);
        for t in &provenance {
            let mut exps: Vec<i32> = t.charge.iter().map(|&c| c as i32).collect();
            exps.extend(t.z_exponent.iter().map(|&e| e as i32));
            if !ring.retains(&exps) {
                if t.charge.iter().sum::<u32>() > cfg.q_total {
                    continue;
                }
                let worst = (0..n_phase)
                    .map(|j| ring.phase_weight(&exps, j))
                    .max()
                    .unwrap_or(0);
                return Err(Error::WindowTooSmall {
                    var: format!("point {}", t.index + 1),
                    window: ring.trunc().z_window(),
                    needed: worst,
                });
            }
            let mono = TruncatedSeries::monomial(&ring, exps, Rational::one())?;
            let coeff = match &mm {
                Some(mm) => {
                    let delta = mm.delta(t.index)?.embed(&ring)?;
                    &TruncatedSeries::one(&ring) + &delta
                }
                None => TruncatedSeries::one(&ring),
            };
            series = &series + &(&coeff * &mono);
        }

        let slab = SlabFunction {
            series,
            frame: Some(frame.clone()),
            provenance,
            solve_var: "z1".to_string(),
            uv_max: cfg.uv_max,
        };
        slab.check_solvable()?;
        Ok(slab)
    }

    /// Wraps an explicitly constructed series (used by the non-toric mirrors).
    pub fn from_series(series: TruncatedSeries, solve_var: &str, uv_max: u32) -> Result<Self> {
        let slab = SlabFunction {
            series,
            frame: None,
            provenance: Vec::new(),
            solve_var: solve_var.to_string(),
            uv_max,
        };
        slab.check_solvable()?;
        Ok(slab)
    }

    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }

    pub fn frame(&self) -> Option<&Frame> {
        self.frame.as_ref()
    }

    pub fn provenance(&self) -> &[SlabTerm] {
        &self.provenance
    }

    pub fn solve_var(&self) -> &str {
        &self.solve_var
    }

    pub fn uv_max(&self) -> u32 {
        self.uv_max
    }

    /// The small-variable-free part, split by power of the solving variable.
    /// Returns `(c0, c1)` for `c0 + c1 z1`, or an error if it is not of that
    /// shape or `c1` is not a unit.
    pub fn linear_part(&self) -> Result<(TruncatedSeries, TruncatedSeries)> {
        let ring = self.series.ring();
        let ns = ring.vars().n_small();
        let idx = ring
            .vars()
            .index_of(&self.solve_var)
            .ok_or_else(|| Error::UnknownVariable(self.solve_var.clone()))?;
        if ring.vars().is_small(idx) {
            return Err(Error::UnsupportedFraming("solving variable must be a phase variable".into()));
        }
        let free = self.series.filter(|e| e[..ns].iter().all(|&x| x == 0));
        let mut c0 = Vec::new();
        let mut c1 = Vec::new();
        for (e, c) in free.terms() {
            let mut rest = e.clone();
            rest[idx] = 0;
            match e[idx] {
                0 => c0.push((rest, c.clone())),
                1 => c1.push((rest, c.clone())),
                p => {
                    return Err(Error::UnsupportedFraming(format!(
                        "small-variable-free part has {} to the power {p}",
                        self.solve_var
                    )))
                }
            }
        }
        let c0 = TruncatedSeries::from_terms(ring, c0)?;
        let c1 = TruncatedSeries::from_terms(ring, c1)?;
        if c1.constant_term().is_zero() {
            return Err(Error::UnsupportedFraming(format!(
                "coefficient of {} has no constant term",
                self.solve_var
            )));
        }
        c0.check_admissible_tail()
            .and_then(|_| c1.check_admissible_tail())
            .map_err(|e| Error::UnsupportedFraming(e.to_string()))?;
        if c0.constant_term() != Rational::one() {
            return Err(Error::UnsupportedFraming(format!(
                "constant term {} instead of 1",
                c0.constant_term()
            )));
        }
        Ok((c0, c1))
    }

    fn check_solvable(&self) -> Result<()> {
        self.linear_part().map(|_| ())
    }

    /// `f` with `q = 0` and `delta = 0`.
    pub fn skeleton(&self) -> TruncatedSeries {
        let ns = self.series.ring().vars().n_small();
        self.series.filter(|e| e[..ns].iter().all(|&x| x == 0))
    }
}
