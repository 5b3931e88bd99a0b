//! Lattice data of a toric Calabi-Yau manifold, curve classes and the
//! divisor-curve pairing, plus framings of the hyperplane lattice.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Rational;

/// Generators `v_i = (p_i, 1)` of the fan together with a basis cone `sigma`.
///
/// Indices are 0-based throughout. The curve-class generators are the points
/// outside `sigma`, in increasing index order; `C_i` for such a point is
/// `beta_i - sum_l a[i][l] beta_{sigma[l]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToricCYData {
    n: usize,
    points: Vec<Vec<i64>>,
    sigma: Vec<usize>,
    a_matrix: Vec<Vec<i64>>,
    generators: Vec<usize>,
    pairing: Vec<Vec<i64>>,
}

impl ToricCYData {
    pub fn build(points: Vec<Vec<i64>>, sigma: Vec<usize>) -> Result<Self> {
        let m = points.len();
        let Some(first) = points.first() else {
            return Err(Error::InvalidToricData("no points".into()));
        };
        let n = first.len() + 1;
        if points.iter().any(|p| p.len() != n - 1) {
            return Err(Error::InvalidToricData("points of different dimensions".into()));
        }
        let mut seen = HashSet::new();
        for (i, p) in points.iter().enumerate() {
            if !seen.insert(p) {
                return Err(Error::InvalidToricData(format!("duplicate point at index {i}")));
            }
        }
        if sigma.len() != n {
            return Err(Error::InvalidToricData(format!(
                "sigma has {} indices, dimension is {n}",
                sigma.len()
            )));
        }
        let mut sig_seen = HashSet::new();
        for &s in &sigma {
            if s >= m {
                return Err(Error::IndexOutOfRange { index: s, max: m - 1 });
            }
            if !sig_seen.insert(s) {
                return Err(Error::InvalidToricData(format!("sigma repeats index {s}")));
            }
        }

        let lift = |i: usize| -> Vec<i64> {
            let mut v = points[i].clone();
            v.push(1);
            v
        };
        let basis: Vec<Vec<i64>> = sigma.iter().map(|&s| lift(s)).collect();
        let det = determinant(&basis);
        if det.abs() != BigInt::one() {
            return Err(Error::NotUnimodular(det));
        }

        let mut a_matrix = Vec::with_capacity(m);
        for i in 0..m {
            let coords = solve_row(&basis, &lift(i)).expect("unimodular basis");
            let mut row = Vec::with_capacity(n);
            for c in coords {
                if !c.is_integer() {
                    return Err(Error::NonIntegral(i));
                }
                row.push(c.to_integer().to_i64().ok_or(Error::NonIntegral(i))?);
            }
            a_matrix.push(row);
        }

        let generators: Vec<usize> = (0..m).filter(|i| !sigma.contains(i)).collect();
        let pairing = (0..m)
            .map(|j| {
                generators
                    .iter()
                    .map(|&i| {
                        let delta = i64::from(i == j);
                        let a = sigma.iter().position(|&s| s == j).map_or(0, |l| a_matrix[i][l]);
                        delta - a
                    })
                    .collect()
            })
            .collect();

        let data = ToricCYData { n, points, sigma, a_matrix, generators, pairing };
        data.check_invariants()?;
        Ok(data)
    }

    fn check_invariants(&self) -> Result<()> {
        for (i, row) in self.a_matrix.iter().enumerate() {
            if row.iter().sum::<i64>() != 1 {
                return Err(Error::InvalidToricData(format!(
                    "row {i} of the expansion matrix does not sum to 1"
                )));
            }
        }
        for k in 0..self.generators.len() {
            if self.pairing.iter().map(|r| r[k]).sum::<i64>() != 0 {
                return Err(Error::InvalidToricData(format!("class {k} has nonzero degree")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// Row `i`: coefficients of `v_i` in the basis `v_{sigma[0]}, ...`.
    pub fn a_row(&self, i: usize) -> &[i64] {
        &self.a_matrix[i]
    }

    /// Point indices of the curve-class generators.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    /// Position of point `i` among the generators.
    pub fn generator_position(&self, i: usize) -> Option<usize> {
        self.generators.iter().position(|&g| g == i)
    }

    /// `D_j . C_{generators[k]}`.
    pub fn pairing(&self, j: usize, k: usize) -> i64 {
        self.pairing[j][k]
    }

    pub fn pairing_matrix(&self) -> &[Vec<i64>] {
        &self.pairing
    }

    /// `D_j . alpha` for `alpha = sum_k d_k C_k`.
    pub fn pair_class(&self, j: usize, class: &[u32]) -> i64 {
        class.iter().zip(&self.pairing[j]).map(|(&d, &p)| d as i64 * p).sum()
    }

    /// All multiplicity vectors with total degree at most `max_degree`, in
    /// lexicographic order.
    pub fn enumerate_effective(&self, max_degree: u32) -> Vec<Vec<u32>> {
        let k = self.n_generators();
        let mut out = Vec::new();
        let mut cur = vec![0u32; k];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if pos == cur.len() {
                out.push(cur.clone());
                return;
            }
            for d in 0..=left {
                cur[pos] = d;
                rec(pos + 1, left - d, cur, out);
            }
            cur[pos] = 0;
        }
        rec(0, max_degree, &mut cur, &mut out);
        out
    }

    /// Ambient hyperplane vector `v_i - v_b`.
    pub fn relative(&self, i: usize, b: usize) -> Vec<i64> {
        self.points[i].iter().zip(&self.points[b]).map(|(x, y)| x - y).collect()
    }
}

/// Chamber base `b` (a point index in `sigma`) and a unimodular basis of the
/// hyperplane lattice. Row `j` of `matrix` is `v'_{j+1}` and defines `z_{j+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    base: usize,
    matrix: Vec<Vec<i64>>,
}

impl Frame {
    pub fn new(data: &ToricCYData, base: usize, matrix: Vec<Vec<i64>>) -> Result<Self> {
        if base >= data.m() {
            return Err(Error::IndexOutOfRange { index: base, max: data.m() - 1 });
        }
        if !data.sigma().contains(&base) {
            return Err(Error::InvalidToricData(format!("chamber {base} is not in sigma")));
        }
        let d = data.n() - 1;
        if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidToricData(format!("frame must be {d}x{d}")));
        }
        if d > 0 {
            let det = determinant(&matrix);
            if det.abs() != BigInt::one() {
                return Err(Error::NotUnimodular(det));
            }
        }
        Ok(Frame { base, matrix })
    }

    /// Rows `v_s - v_b` for the other members of `sigma`, in `sigma` order.
    pub fn standard(data: &ToricCYData, base: usize) -> Result<Self> {
        let rows = data
            .sigma()
            .iter()
            .filter(|&&s| s != base)
            .map(|&s| data.relative(s, base))
            .collect();
        Frame::new(data, base, rows)
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    /// Integer `w` with `sum_j w_j v'_j = v_i - v_b`.
    pub fn exponent(&self, data: &ToricCYData, i: usize) -> Result<Vec<i64>> {
        let target = data.relative(i, self.base);
        if self.matrix.is_empty() {
            return Ok(Vec::new());
        }
        let x = solve_row(&self.matrix, &target)
            .ok_or_else(|| Error::InvalidToricData("singular frame".into()))?;
        x.into_iter()
            .map(|c| {
                if c.is_integer() {
                    c.to_integer().to_i64().ok_or(Error::NonIntegral(i))
                } else {
                    Err(Error::NonIntegral(i))
                }
            })
            .collect()
    }
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    let mut a: Vec<Vec<BigInt>> =
        m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v.div_floor(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    sign * &a[n - 1][n - 1]
}

/// Solves `x * rows = target` over the rationals; `None` if singular.
fn solve_row(rows: &[Vec<i64>], target: &[i64]) -> Option<Vec<Rational>> {
    let n = rows.len();
    // Transpose so that the unknowns multiply columns: rows^T x = target.
    let mut aug: Vec<Vec<Rational>> = (0..n)
        .map(|c| {
            let mut r: Vec<Rational> =
                (0..n).map(|k| Rational::from_integer(BigInt::from(rows[k][c]))).collect();
            r.push(Rational::from_integer(BigInt::from(target[c])));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, piv);
        let p = aug[col][col].clone();
        for v in aug[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..=n {
                    let sub = &f * &aug[col][c];
                    aug[r][c] -= sub;
                }
            }
        }
    }
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kp2() -> ToricCYData {
        ToricCYData::build(vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![-1, -1]], vec![0, 1, 2])
            .unwrap()
    }

    #[test]
    fn c3_has_no_classes() {
        let d = ToricCYData::build(vec![vec![0, 0], vec![1, 0], vec![0, 1]], vec![0, 1, 2]).unwrap();
        assert_eq!(d.m(), 3);
        assert_eq!(d.n_generators(), 0);
        assert_eq!(d.enumerate_effective(5), vec![Vec::<u32>::new()]);
    }

    #[test]
    fn kp2_pairing() {
        let d = kp2();
        assert_eq!(d.a_row(3), &[3, -1, -1]);
        let col: Vec<i64> = (0..4).map(|j| d.pairing(j, 0)).collect();
        assert_eq!(col, vec![-3, 1, 1, 1]);
        assert_eq!(d.enumerate_effective(2), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn kp3_pairing() {
        let d = ToricCYData::build(
            vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, -1, -1]],
            vec![0, 1, 2, 3],
        )
        .unwrap();
        assert_eq!(d.a_row(4), &[4, -1, -1, -1]);
        let col: Vec<i64> = (0..5).map(|j| d.pairing(j, 0)).collect();
        assert_eq!(col, vec![-4, 1, 1, 1, 1]);
    }

    #[test]
    fn three_generators_degree_one() {
        let d = ToricCYData::build(
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![-1, -1], vec![1, 1], vec![-1, 0]],
            vec![0, 1, 2],
        )
        .unwrap();
        assert_eq!(d.n_generators(), 3);
        assert_eq!(d.enumerate_effective(1).len(), 4);
    }

    #[test]
    fn rejects_bad_input() {
        let dup = ToricCYData::build(vec![vec![0, 0], vec![0, 0], vec![1, 0]], vec![0, 1, 2]);
        assert!(matches!(dup, Err(Error::InvalidToricData(_))));
        let nonuni =
            ToricCYData::build(vec![vec![0, 0], vec![2, 0], vec![0, 1], vec![1, 0]], vec![0, 1, 2]);
        assert!(matches!(nonuni, Err(Error::NotUnimodular(_))));
        let short = ToricCYData::build(vec![vec![0, 0], vec![1, 0], vec![0, 1]], vec![0, 1]);
        assert!(short.is_err());
    }

    #[test]
    fn frames() {
        let d = kp2();
        let inner = Frame::standard(&d, 0).unwrap();
        assert_eq!(inner.exponent(&d, 3).unwrap(), vec![-1, -1]);
        let outer = Frame::new(&d, 2, vec![vec![1, -1], vec![0, -1]]).unwrap();
        assert_eq!(outer.exponent(&d, 0).unwrap(), vec![0, 1]);
        assert_eq!(outer.exponent(&d, 1).unwrap(), vec![1, 0]);
        assert_eq!(outer.exponent(&d, 3).unwrap(), vec![-1, 3]);
        assert!(Frame::new(&d, 3, vec![vec![1, 0], vec![0, 1]]).is_err());
        assert!(matches!(
            Frame::new(&d, 0, vec![vec![2, 0], vec![0, 1]]),
            Err(Error::NotUnimodular(_))
        ));
    }

    #[test]
    fn determinant_values() {
        assert_eq!(determinant(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(determinant(&[vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 2]]), BigInt::from(4));
    }
}
