//! Dense exact matrices with fraction-free elimination.
//!
//! Everything is generic over a small ring interface so the same Bareiss
//! code serves rational, polynomial, and quadratic-extension entries.
//! Sizes in this crate stay tiny (at most ~35 on a side), so a dense
//! row-major vector is the whole story.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::MPoly;
use crate::quadext::QuadExt;

/// The operations fraction-free elimination needs. `div_exact` must
/// succeed whenever the quotient lies in the ring, which Bareiss
/// guarantees at every pivot step.
pub trait Ring: Clone + PartialEq + fmt::Display {
    fn ring_zero(&self) -> Self;
    fn ring_one(&self) -> Self;
    fn ring_add(&self, other: &Self) -> Result<Self>;
    fn ring_sub(&self, other: &Self) -> Result<Self>;
    fn ring_mul(&self, other: &Self) -> Result<Self>;
    fn ring_neg(&self) -> Self;
    fn ring_is_zero(&self) -> bool;
    fn ring_div_exact(&self, other: &Self) -> Result<Self>;
}

impl Ring for MPoly {
    fn ring_zero(&self) -> Self {
        MPoly::zero(self.vars())
    }
    fn ring_one(&self) -> Self {
        MPoly::one(self.vars())
    }
    fn ring_add(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }
    fn ring_sub(&self, other: &Self) -> Result<Self> {
        self.sub(other)
    }
    fn ring_mul(&self, other: &Self) -> Result<Self> {
        self.mul(other)
    }
    fn ring_neg(&self) -> Self {
        self.neg()
    }
    fn ring_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn ring_div_exact(&self, other: &Self) -> Result<Self> {
        self.div_exact(other)
    }
}

impl Ring for QuadExt {
    fn ring_zero(&self) -> Self {
        QuadExt::zero(self.musq())
    }
    fn ring_one(&self) -> Self {
        QuadExt::one(self.musq())
    }
    fn ring_add(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }
    fn ring_sub(&self, other: &Self) -> Result<Self> {
        self.sub(other)
    }
    fn ring_mul(&self, other: &Self) -> Result<Self> {
        self.mul(other)
    }
    fn ring_neg(&self) -> Self {
        self.neg()
    }
    fn ring_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn ring_div_exact(&self, other: &Self) -> Result<Self> {
        self.div_exact(other)
    }
}

#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Ring> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Structure("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Structure("ragged rows in matrix".into()));
        }
        Ok(Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zero(rows: usize, cols: usize, template: &T) -> Self {
        Self::from_fn(rows, cols, |_, _| template.ring_zero())
    }

    pub fn identity(n: usize, template: &T) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                template.ring_one()
            } else {
                template.ring_zero()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Structure("matrix size mismatch in add".into()));
        }
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x = x.ring_add(y)?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Structure(format!(
                "matrix size mismatch in mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let z = self.data[0].ring_zero();
        let mut out = Mat::zero(self.rows, other.cols, &z);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = z.clone();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.ring_is_zero() {
                        continue;
                    }
                    acc = acc.ring_add(&a.ring_mul(other.get(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Left action of a row vector: v * self.
    pub fn row_vec_mul(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.rows {
            return Err(Error::Structure("row vector length mismatch".into()));
        }
        let z = self.data[0].ring_zero();
        let mut out = vec![z.clone(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.ring_is_zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j] = out[j].ring_add(&vi.ring_mul(self.get(i, j))?)?;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Structure("power of a non-square matrix".into()));
        }
        let mut acc = Mat::identity(self.rows, &self.data[0]);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn with_column_replaced(&self, j: usize, col: &[T]) -> Result<Self> {
        if col.len() != self.rows {
            return Err(Error::Structure("replacement column length mismatch".into()));
        }
        let mut out = self.clone();
        for (i, v) in col.iter().enumerate() {
            out.set(i, j, v.clone());
        }
        Ok(out)
    }

    /// Submatrix keeping the listed rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Mat::from_fn(rows.len(), cols.len(), |i, j| {
            self.get(rows[i], cols[j]).clone()
        })
    }

    /// Delete one row and one column.
    pub fn minor_matrix(&self, del_row: usize, del_col: usize) -> Self {
        let rows: Vec<usize> = (0..self.rows).filter(|&i| i != del_row).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&j| j != del_col).collect();
        self.select(&rows, &cols)
    }

    /// Fraction-free determinant (Bareiss). Every division is exact.
    pub fn bareiss_det(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(Error::Structure(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let one = self.data[0].ring_one();
        if n == 0 {
            return Ok(one);
        }
        let mut a = self.clone();
        let mut sign_flip = false;
        let mut prev = one;
        for k in 0..n - 1 {
            if a.get(k, k).ring_is_zero() {
                let pivot = ((k + 1)..n).find(|&r| !a.get(r, k).ring_is_zero());
                match pivot {
                    None => return Ok(self.data[0].ring_zero()),
                    Some(r) => {
                        for j in 0..n {
                            let tmp = a.get(k, j).clone();
                            a.set(k, j, a.get(r, j).clone());
                            a.set(r, j, tmp);
                        }
                        sign_flip = !sign_flip;
                    }
                }
            }
            let pkk = a.get(k, k).clone();
            for i in (k + 1)..n {
                let aik = a.get(i, k).clone();
                for j in (k + 1)..n {
                    let num = pkk
                        .ring_mul(a.get(i, j))?
                        .ring_sub(&aik.ring_mul(a.get(k, j))?)?;
                    a.set(i, j, num.ring_div_exact(&prev)?);
                }
                a.set(i, k, pkk.ring_zero());
            }
            prev = pkk;
        }
        let det = a.get(n - 1, n - 1).clone();
        Ok(if sign_flip { det.ring_neg() } else { det })
    }

    /// Rank by fraction-free elimination with the first-nonzero pivot rule.
    pub fn rank(&self) -> Result<usize> {
        let mut a = self.clone();
        let one = self.data[0].ring_one();
        let mut prev = one;
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let pivot = (r..self.rows).find(|&i| !a.get(i, c).ring_is_zero());
            let Some(p) = pivot else { continue };
            if p != r {
                for j in 0..self.cols {
                    let tmp = a.get(r, j).clone();
                    a.set(r, j, a.get(p, j).clone());
                    a.set(p, j, tmp);
                }
            }
            let prc = a.get(r, c).clone();
            for i in (r + 1)..self.rows {
                let aic = a.get(i, c).clone();
                for j in (c + 1)..self.cols {
                    let num = prc
                        .ring_mul(a.get(i, j))?
                        .ring_sub(&aic.ring_mul(a.get(r, j))?)?;
                    a.set(i, j, num.ring_div_exact(&prev)?);
                }
                a.set(i, c, prc.ring_zero());
            }
            prev = prc;
            r += 1;
        }
        Ok(r)
    }

    pub fn trace(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(Error::Structure("trace of a non-square matrix".into()));
        }
        let mut acc = self.data[0].ring_zero();
        for i in 0..self.rows {
            acc = acc.ring_add(self.get(i, i))?;
        }
        Ok(acc)
    }
}

impl<T: Ring> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rint, MPoly, Rat};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn cvars() -> Arc<Vec<String>> {
        Arc::new(Vec::new())
    }

    fn cp(v: Rat) -> MPoly {
        MPoly::constant(&cvars(), v)
    }

    /// Slow cofactor-expansion determinant, the oracle for bareiss_det.
    fn det_cofactor(m: &Mat<MPoly>) -> MPoly {
        let n = m.rows();
        if n == 0 {
            return m.get(0, 0).ring_one();
        }
        if n == 1 {
            return m.get(0, 0).clone();
        }
        let mut acc = m.get(0, 0).ring_zero();
        for j in 0..n {
            if m.get(0, j).is_zero() {
                continue;
            }
            let sub = det_cofactor(&m.minor_matrix(0, j));
            let term = m.get(0, j).mul(&sub).unwrap();
            acc = if j % 2 == 0 {
                acc.add(&term).unwrap()
            } else {
                acc.sub(&term).unwrap()
            };
        }
        acc
    }

    #[test]
    fn identity_det_and_rank() {
        let id: Mat<MPoly> = Mat::identity(3, &cp(Rat::from_integer(1.into())));
        assert_eq!(id.bareiss_det().unwrap().as_rat().unwrap(), rint(1));
        assert_eq!(id.rank().unwrap(), 3);
        let z: Mat<MPoly> = Mat::zero(4, 5, &cp(rint(0)));
        assert_eq!(z.rank().unwrap(), 0);
    }

    #[test]
    fn antidiagonal_det() {
        // [[0,1],[-X,0]] has determinant X
        let vars = Arc::new(vec!["X".to_string()]);
        let x = MPoly::var(&vars, "X").unwrap();
        let m = Mat::from_rows(vec![
            vec![MPoly::zero(&vars), MPoly::one(&vars)],
            vec![x.neg(), MPoly::zero(&vars)],
        ])
        .unwrap();
        assert_eq!(m.bareiss_det().unwrap(), x);
    }

    #[test]
    fn bareiss_matches_cofactor_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..=5);
            let m = Mat::from_fn(n, n, |_, _| cp(rint(rng.gen_range(-6..=6))));
            assert_eq!(m.bareiss_det().unwrap(), det_cofactor(&m));
        }
    }

    #[test]
    fn det_sign_under_row_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let n = 4;
            let m = Mat::from_fn(n, n, |_, _| cp(rint(rng.gen_range(-4..=4))));
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut sign = 1i64;
            {
                let mut p = perm.clone();
                for i in 0..n {
                    while p[i] != i {
                        let t = p[i];
                        p.swap(i, t);
                        sign = -sign;
                    }
                }
            }
            let permuted = m.select(&perm, &(0..n).collect::<Vec<_>>());
            let lhs = permuted.bareiss_det().unwrap();
            let rhs = m.bareiss_det().unwrap().scale(&rint(sign));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn rank_invariant_under_shuffle_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            // rank-2 by construction: rows are combinations of two base rows
            let cols = 5;
            let base: Vec<Vec<Rat>> = (0..2)
                .map(|_| (0..cols).map(|_| rint(rng.gen_range(-3..=3))).collect())
                .collect();
            let rows: Vec<Vec<MPoly>> = (0..6)
                .map(|_| {
                    let a = rint(rng.gen_range(-2..=2));
                    let b = rint(rng.gen_range(-2..=2));
                    (0..cols)
                        .map(|j| cp(&a * &base[0][j] + &b * &base[1][j]))
                        .collect()
                })
                .collect();
            let m = Mat::from_rows(rows).unwrap();
            let r = m.rank().unwrap();
            assert!(r <= 2);

            let mut perm: Vec<usize> = (0..6).collect();
            perm.shuffle(&mut rng);
            let shuffled = m.select(&perm, &(0..cols).collect::<Vec<_>>());
            assert_eq!(shuffled.rank().unwrap(), r);

            let scaled = Mat::from_fn(6, cols, |i, j| {
                let s = rint(rng.gen_range(1..=4));
                let _ = s;
                m.get(i, j).scale(&rint(if i % 2 == 0 { 3 } else { -2 }))
            });
            assert_eq!(scaled.rank().unwrap(), r);
        }
    }

    #[test]
    fn symbolic_bareiss_is_exact() {
        let vars = Arc::new(vec!["X".to_string()]);
        let x = MPoly::var(&vars, "X").unwrap();
        let one = MPoly::one(&vars);
        let m = Mat::from_rows(vec![
            vec![x.clone(), one.clone(), MPoly::zero(&vars)],
            vec![one.clone(), x.clone(), one.clone()],
            vec![MPoly::zero(&vars), one.clone(), x.clone()],
        ])
        .unwrap();
        // det = X^3 - 2X
        let expect = x.pow(3).sub(&x.scale(&rint(2))).unwrap();
        assert_eq!(m.bareiss_det().unwrap(), expect);
        assert_eq!(det_cofactor(&m), expect);
    }

    #[test]
    fn row_vec_mul_matches_full_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = Mat::from_fn(3, 4, |_, _| cp(rint(rng.gen_range(-5..=5))));
        let v: Vec<MPoly> = (0..3).map(|_| cp(rint(rng.gen_range(-5..=5)))).collect();
        let out = m.row_vec_mul(&v).unwrap();
        for j in 0..4 {
            let mut acc = rint(0);
            for i in 0..3 {
                acc += v[i].as_rat().unwrap() * m.get(i, j).as_rat().unwrap();
            }
            assert_eq!(out[j].as_rat().unwrap(), acc);
        }
    }
}
