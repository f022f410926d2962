//! Dense rational matrices: fraction-free determinant and exact null space.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{common_denominator, serde_rational, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    /// row-major
    #[serde(with = "serde_rational::vec")]
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, entries: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Ok(RatMatrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
        .expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rational) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(Error::InvalidInput("matrix dimension mismatch".into()));
        }
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| {
            super::rational::to_f64(self.get(i, j))
        })
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for j in 0..m.cols {
                    m.entries.swap(p * m.cols + j, row * m.cols + j);
                }
            }
            let inv = Rational::one() / m.get(row, col);
            for j in col..m.cols {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for j in col..m.cols {
                    let v = m.get(r, j) - &factor * m.get(row, j);
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }
}

/// Exact determinant by Bareiss elimination on the integer matrix obtained by
/// clearing denominators row by row.
pub fn det_exact(m: &RatMatrix) -> Result<Rational> {
    if m.rows != m.cols {
        return Err(Error::InvalidInput(format!(
            "determinant of a non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Rational::one());
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|r| {
            let row = m.row(r);
            let den = common_denominator(row);
            scale *= &den;
            row.iter()
                .map(|q| q.numer() * (&den / q.denom()))
                .collect()
        })
        .collect();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return Ok(Rational::zero());
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = Rational::new(a[n - 1][n - 1].clone() * sign, scale);
    Ok(det)
}

/// Basis of the right null space, one vector per free column of the RREF
/// (free coordinate set to 1). Empty iff the matrix has full column rank.
pub fn kernel_exact(m: &RatMatrix) -> Vec<Vec<Rational>> {
    let (r, pivots) = m.rref();
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); m.cols];
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(i, f).clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::{rat, ratio};

    /// Cofactor expansion, kept independent of the Bareiss route.
    fn cofactor_det(m: &RatMatrix) -> Rational {
        let n = m.rows();
        if n == 1 {
            return m.get(0, 0).clone();
        }
        let mut acc = Rational::zero();
        for j in 0..n {
            let minor = RatMatrix::from_rows(
                (1..n)
                    .map(|r| (0..n).filter(|&c| c != j).map(|c| m.get(r, c).clone()).collect())
                    .collect(),
            )
            .unwrap();
            let term = m.get(0, j) * cofactor_det(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(det_exact(&RatMatrix::identity(2)).unwrap(), rat(1));
        let rep = RatMatrix::from_i64(&[&[1, 2, 3], &[4, 5, 6], &[1, 2, 3]]);
        assert_eq!(det_exact(&rep).unwrap(), rat(0));
        assert!(det_exact(&RatMatrix::zeros(2, 3)).is_err());
        let m = RatMatrix::from_rows(vec![
            vec![ratio(1, 2), rat(3)],
            vec![rat(2), ratio(-1, 3)],
        ])
        .unwrap();
        assert_eq!(det_exact(&m).unwrap(), ratio(-1, 6) - rat(6));
    }

    #[test]
    fn permutation_needing_pivot() {
        let m = RatMatrix::from_i64(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
        assert_eq!(det_exact(&m).unwrap(), rat(1));
        let m = RatMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(det_exact(&m).unwrap(), rat(-1));
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_exact(&RatMatrix::identity(3)).is_empty());
        assert_eq!(kernel_exact(&RatMatrix::zeros(2, 2)).len(), 2);
        let m = RatMatrix::from_i64(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = kernel_exact(&m);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_matrix(max: usize) -> impl Strategy<Value = RatMatrix> {
            (1..=max).prop_flat_map(|n| {
                proptest::collection::vec((-6i64..=6, 1i64..=4), n * n).prop_map(move |v| {
                    RatMatrix::from_rows(
                        v.chunks(n)
                            .map(|row| row.iter().map(|&(a, b)| ratio(a, b)).collect())
                            .collect(),
                    )
                    .unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn bareiss_matches_cofactor(m in small_matrix(4)) {
                prop_assert_eq!(det_exact(&m).unwrap(), cofactor_det(&m));
            }

            #[test]
            fn kernel_vectors_are_annihilated(
                v in proptest::collection::vec(-3i64..=3, 12),
            ) {
                let m = RatMatrix::from_rows(
                    v.chunks(4).map(|r| r.iter().map(|&x| rat(x)).collect()).collect(),
                ).unwrap();
                let k = kernel_exact(&m);
                prop_assert_eq!(k.len(), 4 - m.rank());
                for w in &k {
                    prop_assert!(m.mul_vec(w).iter().all(Zero::is_zero));
                }
            }
        }
    }
}
