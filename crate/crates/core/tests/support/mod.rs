//! Strategies and law checks shared by the property suite and the acceptance
//! run.

use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use toric_disc::series::{Rational, Ring, TruncatedSeries, Truncation, VariableSpec};

pub type Terms = Vec<(Vec<i32>, Rational)>;

fn ring(total: u32, window: u32) -> Arc<Ring> {
    Ring::new(
        VariableSpec::new(vec!["q", "uv"], vec!["z"]).unwrap(),
        Truncation::new(total, window)
            .with_small_caps(vec![None, Some(2)])
            .with_phase_slopes(vec![vec![1, 0]]),
    )
    .unwrap()
}

pub fn small() -> Arc<Ring> {
    ring(4, 3)
}

pub fn big() -> Arc<Ring> {
    ring(6, 5)
}

fn coeff() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

/// Terms `q^a uv^b z^c` with `c >= -a`, so every term has phase weight
/// `c + a >= 0` and the truncation is exact.
pub fn raw_terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec(
        (0i32..=3, 0i32..=2, 0i32..=4, coeff()).prop_map(|(a, b, w, c)| (vec![a, b, w - a], c)),
        0..6,
    )
}

/// Random terms without a constant.
pub fn tail_terms() -> impl Strategy<Value = Terms> {
    raw_terms().prop_map(|v| v.into_iter().filter(|(e, _)| e.iter().any(|&x| x != 0)).collect())
}

/// Random terms with a nonzero constant.
pub fn unit_terms() -> impl Strategy<Value = Terms> {
    (tail_terms(), coeff().prop_filter("nonzero", |c| *c != Rational::from_integer(0.into())))
        .prop_map(|(mut t, c)| {
            t.push((vec![0, 0, 0], c));
            t
        })
}

pub fn series_in(r: &Arc<Ring>, terms: &Terms) -> TruncatedSeries {
    TruncatedSeries::from_terms(r, terms.iter().cloned()).unwrap()
}

pub fn ring_laws(a: &Terms, b: &Terms, c: &Terms) -> Result<(), TestCaseError> {
    let r = small();
    let (a, b, c) = (series_in(&r, a), series_in(&r, b), series_in(&r, c));
    prop_assert_eq!(&a + &b, &b + &a);
    prop_assert_eq!(&a * &b, &b * &a);
    prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
    prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    prop_assert_eq!(&a * &TruncatedSeries::one(&r), a.clone());
    prop_assert!((&a - &a).is_zero());
    prop_assert_eq!(&a + &TruncatedSeries::zero(&r), a);
    Ok(())
}

pub fn invert_round_trip(u: &Terms) -> Result<(), TestCaseError> {
    let r = small();
    let u = series_in(&r, u);
    prop_assert_eq!(&u * &u.invert().unwrap(), TruncatedSeries::one(&r));
    Ok(())
}

pub fn exp_log_round_trips(t: &Terms) -> Result<(), TestCaseError> {
    let r = small();
    let t = series_in(&r, t);
    prop_assert_eq!(t.exp().unwrap().log().unwrap(), t.clone());
    let one_plus = &TruncatedSeries::one(&r) + &t;
    prop_assert_eq!(one_plus.log().unwrap().exp().unwrap(), one_plus.clone());
    // exp turns sums into products
    let s = t.scale(&Rational::new(1.into(), 2.into()));
    prop_assert_eq!(&s.exp().unwrap() * &s.exp().unwrap(), t.exp().unwrap());
    Ok(())
}

pub fn truncation_monotonicity(a: &Terms, b: &Terms, t: &Terms) -> Result<(), TestCaseError> {
    let (rs, rb) = (small(), big());
    let (a_s, a_b) = (series_in(&rs, a), series_in(&rb, a));
    let (b_s, b_b) = (series_in(&rs, b), series_in(&rb, b));
    let (t_s, t_b) = (series_in(&rs, t), series_in(&rb, t));
    prop_assert_eq!(a_b.embed(&rs).unwrap(), a_s.clone());
    prop_assert_eq!((&a_b * &b_b).embed(&rs).unwrap(), &a_s * &b_s);
    prop_assert_eq!(b_b.invert().unwrap().embed(&rs).unwrap(), b_s.invert().unwrap());
    prop_assert_eq!(t_b.exp().unwrap().embed(&rs).unwrap(), t_s.exp().unwrap());
    Ok(())
}

/// `z -> z (1 + d)` with `d` the part of a random series that carries a small
/// variable.
pub fn substitution_homomorphism(a: &Terms, b: &Terms, d: &Terms) -> Result<(), TestCaseError> {
    let r = small();
    let (a, b) = (series_in(&r, a), series_in(&r, b));
    let d = series_in(&r, d).filter(|e| e[0] + e[1] > 0);
    let z = TruncatedSeries::var(&r, "z").unwrap();
    let image = &z * &(&TruncatedSeries::one(&r) + &d);
    let phi = |s: &TruncatedSeries| s.substitute(&[("z", &image)]).unwrap();
    prop_assert_eq!(phi(&(&a + &b)), &phi(&a) + &phi(&b));
    prop_assert_eq!(phi(&(&a * &b)), &phi(&a) * &phi(&b));
    prop_assert_eq!(phi(&TruncatedSeries::one(&r)), TruncatedSeries::one(&r));
    prop_assert_eq!(a.substitute(&[("z", &z)]).unwrap(), a);
    Ok(())
}
