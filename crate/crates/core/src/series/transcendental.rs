use num_traits::{One, Zero};

use super::{integer, Rational, TruncatedSeries};
use crate::error::{Error, Result};

impl TruncatedSeries {
    /// A non-constant monomial is admissible when it carries a small variable
    /// or is a nonconstant monomial in the phase variables with nonnegative
    /// exponents. Powers of an admissible monomial eventually leave every
    /// truncation.
    pub fn is_admissible_monomial(&self, exps: &[i32]) -> bool {
        let ns = self.ring().vars().n_small();
        if exps[..ns].iter().any(|&e| e > 0) {
            return true;
        }
        let phase = &exps[ns..];
        phase.iter().all(|&e| e >= 0) && phase.iter().any(|&e| e > 0)
    }

    /// Errors on the first non-constant monomial that is not admissible.
    pub fn check_admissible_tail(&self) -> Result<()> {
        for (e, _) in self.terms() {
            if e.iter().all(|&x| x == 0) {
                continue;
            }
            if !self.is_admissible_monomial(e) {
                return Err(Error::InadmissibleMonomial(e.clone()));
            }
        }
        Ok(())
    }

    /// The part without constant term.
    pub fn tail(&self) -> Self {
        self.filter(|e| e.iter().any(|&x| x != 0))
    }

    /// Sums `coeff(k) * t^k` for `k >= 1` until the powers of `t` vanish.
    fn power_sum(t: &Self, mut coeff: impl FnMut(u64) -> Rational) -> Self {
        let mut sum = Self::zero(t.ring());
        let mut power = t.clone();
        let mut k = 1u64;
        while !power.is_zero() {
            let c = coeff(k);
            if !c.is_zero() {
                sum = &sum + &power.scale(&c);
            }
            power = &power * t;
            k += 1;
        }
        sum
    }

    /// Multiplicative inverse via the geometric series in `a/c - 1`.
    pub fn invert(&self) -> Result<Self> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        self.check_admissible_tail()?;
        let cinv = c.recip();
        let t = self.tail().scale(&cinv);
        let geo = Self::power_sum(&t, |k| if k % 2 == 0 { Rational::one() } else { -Rational::one() });
        Ok((&Self::one(self.ring()) + &geo).scale(&cinv))
    }

    pub fn exp(&self) -> Result<Self> {
        let c = self.constant_term();
        if !c.is_zero() {
            return Err(Error::WrongConstantTerm { expected: Rational::zero(), found: c });
        }
        self.check_admissible_tail()?;
        let mut fact = Rational::one();
        let s = Self::power_sum(self, |k| {
            fact = &fact * integer(k as i64);
            fact.recip()
        });
        Ok(&Self::one(self.ring()) + &s)
    }

    pub fn log(&self) -> Result<Self> {
        let c = self.constant_term();
        if !c.is_one() {
            return Err(Error::WrongConstantTerm { expected: Rational::one(), found: c });
        }
        self.check_admissible_tail()?;
        let s = self.tail();
        Ok(Self::power_sum(&s, |k| {
            let r = Rational::new(1.into(), (k as i64).into());
            if k % 2 == 1 {
                r
            } else {
                -r
            }
        }))
    }

    /// Integer power; negative exponents go through [`invert`](Self::invert).
    pub fn pow(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.invert()?.pow(-n);
        }
        let mut result = Self::one(self.ring());
        let mut base = self.clone();
        let mut n = n as u64;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::{rational, Ring, Truncation, VariableSpec};
    use super::*;

    fn ring(small: &[&str], phase: &[&str], q: u32, w: u32) -> Arc<Ring> {
        Ring::new(VariableSpec::new(small.to_vec(), phase.to_vec()).unwrap(), Truncation::new(q, w))
            .unwrap()
    }

    fn s(r: &Arc<Ring>, terms: &[(&[(&str, i32)], Rational)]) -> TruncatedSeries {
        TruncatedSeries::from_named_terms(r, terms.iter().map(|(t, c)| (*t, c.clone()))).unwrap()
    }

    #[test]
    fn invert_geometric_in_uv() {
        let r = ring(&["uv"], &[], 4, 0);
        let a = s(&r, &[(&[], integer(1)), (&[("uv", 1)], integer(-1))]);
        let inv = a.invert().unwrap();
        let expected = TruncatedSeries::from_terms(&r, (0..=4).map(|k| (vec![k], integer(1)))).unwrap();
        assert_eq!(inv, expected);
        assert_eq!(&a * &inv, TruncatedSeries::one(&r));
    }

    #[test]
    fn invert_geometric_in_z() {
        let r = ring(&[], &["z1"], 0, 5);
        let a = s(&r, &[(&[], integer(1)), (&[("z1", 1)], integer(1))]);
        let inv = a.invert().unwrap();
        for k in 0..=5 {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            assert_eq!(inv.coefficient_of(&[("z1", k)]).unwrap(), integer(sign));
        }
        assert_eq!(inv.len(), 6);
    }

    #[test]
    fn invert_constant() {
        let r = ring(&["q"], &[], 2, 0);
        let two = TruncatedSeries::constant(&r, integer(2));
        assert_eq!(two.invert().unwrap(), TruncatedSeries::constant(&r, rational(1, 2)));
    }

    #[test]
    fn invert_errors() {
        let r = ring(&["q"], &["z"], 2, 3);
        let q = TruncatedSeries::var(&r, "q").unwrap();
        assert_eq!(q.invert(), Err(Error::ZeroConstantTerm));
        let bad = s(&r, &[(&[], integer(1)), (&[("z", -1)], integer(1))]);
        assert!(matches!(bad.invert(), Err(Error::InadmissibleMonomial(_))));
        let ok = s(&r, &[(&[], integer(1)), (&[("q", 1), ("z", -1)], integer(1))]);
        assert!(ok.invert().is_ok());
    }

    #[test]
    fn exp_of_zero() {
        let r = ring(&["q"], &[], 3, 0);
        assert_eq!(TruncatedSeries::zero(&r).exp().unwrap(), TruncatedSeries::one(&r));
    }

    #[test]
    fn log_expansion() {
        let r = ring(&["uv"], &["z2"], 2, 2);
        let a = s(&r, &[(&[], integer(1)), (&[("z2", 1)], integer(1)), (&[("uv", 1)], integer(-1))]);
        let l = a.log().unwrap();
        assert_eq!(l.coefficient_of(&[("z2", 1)]).unwrap(), integer(1));
        assert_eq!(l.coefficient_of(&[("uv", 1)]).unwrap(), integer(-1));
        assert_eq!(l.coefficient_of(&[("z2", 2)]).unwrap(), rational(-1, 2));
        assert_eq!(l.coefficient_of(&[("z2", 1), ("uv", 1)]).unwrap(), integer(1));
        assert_eq!(l.coefficient_of(&[("uv", 2)]).unwrap(), rational(-1, 2));
        assert_eq!(l.exp().unwrap(), a);
    }

    #[test]
    fn exp_log_preconditions() {
        let r = ring(&["q"], &[], 3, 0);
        let one = TruncatedSeries::one(&r);
        assert!(matches!(one.exp(), Err(Error::WrongConstantTerm { .. })));
        let two = TruncatedSeries::constant(&r, integer(2));
        assert!(matches!(two.log(), Err(Error::WrongConstantTerm { .. })));
    }

    #[test]
    fn pow_negative() {
        let r = ring(&["q"], &[], 4, 0);
        let a = s(&r, &[(&[], integer(1)), (&[("q", 1)], integer(1))]);
        let p = a.pow(-2).unwrap();
        assert_eq!(&p * &a.pow(2).unwrap(), TruncatedSeries::one(&r));
        assert_eq!(p.coefficient_of(&[("q", 1)]).unwrap(), integer(-2));
        assert_eq!(a.pow(0).unwrap(), TruncatedSeries::one(&r));
    }
}
