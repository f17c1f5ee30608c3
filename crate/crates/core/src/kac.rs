//! The tridiagonal Kac-type matrix K, the block matrix Q built from it,
//! closed-form powers of Q, and the exact spectral facts this crate
//! relies on: simple spectrum, rank parity, and nonvanishing of the
//! first basis vector's eigencoordinates.
//!
//! Everything here follows the left-row-vector convention: row vectors
//! multiply matrices from the left, and "eigenvectors of K" in the
//! coordinate computation means right eigenvectors K v = lambda v.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::poly::{rint, MPoly, Rat};
use crate::quadext::QuadExt;

/// Parameters of the ambient product: an n-dimensional sphere (c=+1) or
/// hyperbolic space (c=-1) times a Euclidean factor of dimension m, with
/// the constant tau in (0,1) playing the role of the horizontal normal
/// norm.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceFormParams {
    pub n: usize,
    pub m: usize,
    pub c: i8,
    pub tau: Rat,
}

impl SpaceFormParams {
    pub fn new(n: usize, m: usize, c: i8, tau: Rat) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("n must be at least 2, got {n}")));
        }
        if m < 1 {
            return Err(Error::Parameter(format!("m must be at least 1, got {m}")));
        }
        if c != 1 && c != -1 {
            return Err(Error::Parameter(format!("c must be +1 or -1, got {c}")));
        }
        if !(tau > Rat::zero() && tau < Rat::one()) {
            return Err(Error::Parameter(format!("tau must lie in (0,1), got {tau}")));
        }
        Ok(SpaceFormParams { n, m, c, tau })
    }

    /// The combination c*tau^2 that every exact formula is written in.
    pub fn x_value(&self) -> Rat {
        let t2 = &self.tau * &self.tau;
        if self.c == 1 {
            t2
        } else {
            -t2
        }
    }

    pub fn block_size(&self) -> usize {
        (self.m + 1) * self.n
    }
}

/// K of order n with superdiagonal 1..n-1 and subdiagonal entries
/// -(n-i) * x for i = 1..n-1, where x stands for c*tau^2 (symbolic or a
/// grounded constant).
pub fn kac_with_x(n: usize, x: &MPoly) -> Result<Mat<MPoly>> {
    if n < 2 {
        return Err(Error::Parameter(format!("n must be at least 2, got {n}")));
    }
    Ok(Mat::from_fn(n, n, |i, j| {
        if j == i + 1 {
            MPoly::constant(x.vars(), rint((i + 1) as i64))
        } else if i == j + 1 {
            // 1-based subdiagonal entry (i+1, i) is -(n-i) c tau^2
            x.scale(&rint(-((n - (j + 1)) as i64)))
        } else {
            MPoly::zero(x.vars())
        }
    }))
}

/// Block matrix of size (m+1)n with K on the diagonal and p * I on the
/// p-th superdiagonal block row, p = 1..m.
pub fn q_with_x(n: usize, m: usize, x: &MPoly) -> Result<Mat<MPoly>> {
    let k = kac_with_x(n, x)?;
    let size = (m + 1) * n;
    Ok(Mat::from_fn(size, size, |i, j| {
        let (bi, ri) = (i / n, i % n);
        let (bj, rj) = (j / n, j % n);
        if bi == bj {
            k.get(ri, rj).clone()
        } else if bj == bi + 1 && ri == rj {
            MPoly::constant(x.vars(), rint((bi + 1) as i64))
        } else {
            MPoly::zero(x.vars())
        }
    }))
}

fn ground_x(params: &SpaceFormParams) -> MPoly {
    let vars: Arc<Vec<String>> = Arc::new(Vec::new());
    MPoly::constant(&vars, params.x_value())
}

pub fn build_kac(params: &SpaceFormParams) -> Result<Mat<MPoly>> {
    kac_with_x(params.n, &ground_x(params))
}

pub fn build_q(params: &SpaceFormParams) -> Result<Mat<MPoly>> {
    q_with_x(params.n, params.m, &ground_x(params))
}

fn binom(j: u32, d: u32) -> BigInt {
    if d > j {
        return BigInt::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..d {
        num *= BigInt::from(j - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

fn rising(p: u32, d: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..d {
        acc *= BigInt::from(p + i);
    }
    acc
}

/// Q^j assembled from the closed form: the (p, p+d) block is
/// binom(j,d) * p^(rising d) * K^(j-d), with K^j on the diagonal.
pub fn q_power_closed(params: &SpaceFormParams, j: u32) -> Result<Mat<MPoly>> {
    let x = ground_x(params);
    q_power_closed_with_x(params.n, params.m, j, &x)
}

pub fn q_power_closed_with_x(n: usize, m: usize, j: u32, x: &MPoly) -> Result<Mat<MPoly>> {
    let k = kac_with_x(n, x)?;
    let mut kpows = Vec::with_capacity(j as usize + 1);
    kpows.push(Mat::identity(n, &MPoly::zero(x.vars())));
    for _ in 0..j {
        let next = kpows.last().unwrap().mul(&k)?;
        kpows.push(next);
    }
    let size = (m + 1) * n;
    Ok(Mat::from_fn(size, size, |i, jj| {
        let (bi, ri) = (i / n, i % n);
        let (bj, rj) = (jj / n, jj % n);
        if bj < bi || bj > bi + m {
            return MPoly::zero(x.vars());
        }
        let d = (bj - bi) as u32;
        if d > j {
            return MPoly::zero(x.vars());
        }
        let coeff = binom(j, d) * rising((bi + 1) as u32, d);
        kpows[(j - d) as usize]
            .get(ri, rj)
            .scale(&Rat::from_integer(coeff))
    }))
}

/// Characteristic polynomial det(lambda I - K) as an exact polynomial in
/// the variables "lam" and "X" (X standing for c*tau^2), verified against
/// the factored spectrum prod(lambda - (n-1-2l) mu) with mu^2 = -X.
pub fn charpoly_kac(params: &SpaceFormParams) -> Result<MPoly> {
    let vars = Arc::new(vec!["lam".to_string(), "X".to_string()]);
    let x = MPoly::var(&vars, "X")?;
    let lam = MPoly::var(&vars, "lam")?;
    let k = kac_with_x(params.n, &x)?;
    let n = params.n;
    let lam_i_minus_k = Mat::from_fn(n, n, |i, j| {
        let d = k.get(i, j).neg();
        if i == j {
            d.add(&lam).unwrap()
        } else {
            d
        }
    });
    let det = lam_i_minus_k.bareiss_det()?;

    // factored form over Q[lam, mu], then reduce mu^2 -> -X
    let fvars = Arc::new(vec!["lam".to_string(), "mu".to_string()]);
    let flam = MPoly::var(&fvars, "lam")?;
    let fmu = MPoly::var(&fvars, "mu")?;
    let mut prod = MPoly::one(&fvars);
    for l in 0..n {
        let coef = rint(n as i64 - 1 - 2 * l as i64);
        let factor = flam.sub(&fmu.scale(&coef))?;
        prod = prod.mul(&factor)?;
    }
    let reduced = reduce_mu_squared(&prod, &vars)?;
    if reduced != det {
        return Err(Error::Verification(format!(
            "characteristic polynomial mismatch: determinant {det} vs factored {reduced}"
        )));
    }
    Ok(det)
}

/// Rewrite a polynomial in ("lam", "mu") with only even mu powers into
/// one in ("lam", "X") via mu^2 = -X. Odd mu powers are an error.
fn reduce_mu_squared(p: &MPoly, out_vars: &Arc<Vec<String>>) -> Result<MPoly> {
    let mut out = MPoly::zero(out_vars);
    let deg_mu = p.degree_in("mu")?.unwrap_or(0);
    for e in 0..=deg_mu {
        let part = p.coeff_of("mu", e)?;
        if part.is_zero() {
            continue;
        }
        if e % 2 == 1 {
            return Err(Error::Verification(format!(
                "odd power of the extension generator survives reduction: {p}"
            )));
        }
        let deg_lam = part.degree_in("lam")?.unwrap_or(0);
        for a in 0..=deg_lam {
            let c = part.coeff_of("lam", a)?;
            if c.is_zero() {
                continue;
            }
            let mut coeff = c.constant_term();
            if (e / 2) % 2 == 1 {
                coeff = -coeff;
            }
            let mono = MPoly::monomial(out_vars, vec![a, e / 2], coeff);
            out = out.add(&mono)?;
        }
    }
    Ok(out)
}

/// Exact rank of K, checked against the parity rule: n for even n,
/// n-1 for odd n.
pub fn kac_rank(params: &SpaceFormParams) -> Result<usize> {
    let k = build_kac(params)?;
    let r = k.rank()?;
    let expected = if params.n % 2 == 0 {
        params.n
    } else {
        params.n - 1
    };
    if r != expected {
        return Err(Error::Verification(format!(
            "rank of K is {r}, parity rule demands {expected} for n = {}",
            params.n
        )));
    }
    Ok(r)
}

/// mu^2 = -c tau^2 as a grounded constant.
pub fn ground_musq(params: &SpaceFormParams) -> MPoly {
    let vars: Arc<Vec<String>> = Arc::new(Vec::new());
    MPoly::constant(&vars, -params.x_value())
}

/// The eigenvalue (n-1-2l) sqrt(-c) tau as an extension element. For
/// c=-1 the square root is tau itself and the value stays rational; for
/// c=+1 it is a pure mu-multiple.
pub fn eigenvalue(params: &SpaceFormParams, l: usize) -> QuadExt {
    let musq = ground_musq(params);
    let factor = rint(params.n as i64 - 1 - 2 * l as i64);
    if params.c == -1 {
        QuadExt::from_rational(factor * &params.tau, &musq)
    } else {
        QuadExt::mu_times(factor, &musq)
    }
}

/// Right eigenvector of K for the l-th eigenvalue, normalized so the
/// first coordinate is 1, computed by the tridiagonal recurrence with
/// the last row kept as a consistency check.
pub fn right_eigenvector(params: &SpaceFormParams, l: usize) -> Result<Vec<QuadExt>> {
    let n = params.n;
    let musq = ground_musq(params);
    let lam = eigenvalue(params, l);
    let x = params.x_value();
    let mut v = vec![QuadExt::one(&musq)];
    // row 1: v_2 = lam v_1
    v.push(lam.clone());
    // row i (1-based, 2..n-1): i v_{i+1} = lam v_i + (n-i+1) x v_{i-1}
    for i in 2..n {
        let prev = v[i - 2].scale(&(&x * rint((n - i + 1) as i64)));
        let num = lam.mul(&v[i - 1])?.add(&prev)?;
        v.push(num.scale(&(Rat::one() / rint(i as i64))));
    }
    // row n: -x v_{n-1} = lam v_n
    let lhs = v[n - 2].scale(&-&x);
    let rhs = lam.mul(&v[n - 1])?;
    if lhs != rhs {
        return Err(Error::Verification(format!(
            "eigenvector recurrence inconsistent at the last row for l = {l}"
        )));
    }
    Ok(v)
}

/// Left row eigenvector x K = lambda x, first coordinate 1.
pub fn left_eigenvector(params: &SpaceFormParams, l: usize) -> Result<Vec<QuadExt>> {
    let n = params.n;
    let musq = ground_musq(params);
    let lam = eigenvalue(params, l);
    let x = params.x_value();
    let mut v = vec![QuadExt::one(&musq)];
    // column j (1-based): (j-1) x_{j-1} - (n-j) x tau-part x_{j+1} = lam x_j
    for j in 1..n {
        let prev = if j >= 2 {
            v[j - 2].scale(&rint((j - 1) as i64))
        } else {
            QuadExt::zero(&musq)
        };
        let num = lam.mul(&v[j - 1])?.sub(&prev)?;
        let den = -(&x * rint((n - j) as i64));
        v.push(num.scale(&(Rat::one() / den)));
    }
    // last column check: (n-1) x_{n-1} = lam x_n
    let lhs = v[n - 2].scale(&rint((n - 1) as i64));
    let rhs = lam.mul(&v[n - 1])?;
    if lhs != rhs {
        return Err(Error::Verification(format!(
            "left eigenvector recurrence inconsistent at the last column for l = {l}"
        )));
    }
    Ok(v)
}

/// Coordinates of e_1 = (1,0,...,0) in the right eigenbasis of K,
/// computed exactly by Cramer's rule. Each coordinate must be nonzero.
pub fn e1_eigen_coordinates(params: &SpaceFormParams) -> Result<Vec<QuadExt>> {
    let n = params.n;
    let musq = ground_musq(params);
    let basis: Vec<Vec<QuadExt>> = (0..n)
        .map(|l| right_eigenvector(params, l))
        .collect::<Result<_>>()?;
    let v = Mat::from_fn(n, n, |i, j| basis[j][i].clone());
    let det_v = v.bareiss_det()?;
    if det_v.is_zero() {
        return Err(Error::Verification("eigenbasis is singular".into()));
    }
    let mut e1 = vec![QuadExt::zero(&musq); n];
    e1[0] = QuadExt::one(&musq);
    let mut coords = Vec::with_capacity(n);
    for l in 0..n {
        let replaced = v.with_column_replaced(l, &e1)?;
        let c = replaced.bareiss_det()?.div_exact(&det_v)?;
        if c.is_zero() {
            return Err(Error::Verification(format!(
                "coordinate {l} of e_1 in the eigenbasis vanishes"
            )));
        }
        coords.push(c);
    }
    Ok(coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use std::collections::BTreeMap;

    fn p(n: usize, m: usize, c: i8, num: i64, den: i64) -> SpaceFormParams {
        SpaceFormParams::new(n, m, c, rat(num, den)).unwrap()
    }

    fn as_rat(mp: &MPoly) -> Rat {
        mp.as_rat().unwrap()
    }

    #[test]
    fn kac_small_examples() {
        let k = build_kac(&p(2, 1, -1, 1, 2)).unwrap();
        assert_eq!(as_rat(k.get(0, 0)), rint(0));
        assert_eq!(as_rat(k.get(0, 1)), rint(1));
        assert_eq!(as_rat(k.get(1, 0)), rat(1, 4));
        assert_eq!(as_rat(k.get(1, 1)), rint(0));

        let k = build_kac(&p(3, 1, 1, 1, 2)).unwrap();
        let expect = [
            [rint(0), rint(1), rint(0)],
            [rat(-1, 2), rint(0), rint(2)],
            [rint(0), rat(-1, 4), rint(0)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(as_rat(k.get(i, j)), expect[i][j]);
            }
        }
        for n in 2..=6 {
            let k = build_kac(&p(n, 1, -1, 1, 3)).unwrap();
            for i in 0..n {
                assert!(k.get(i, i).is_zero());
            }
        }
    }

    #[test]
    fn q_block_pattern_and_det() {
        let params = p(2, 1, -1, 1, 2);
        let q = build_q(&params).unwrap();
        let k = build_kac(&params).unwrap();
        // [[K, I], [0, K]]
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(q.get(i, j), k.get(i, j));
                assert_eq!(q.get(i + 2, j + 2), k.get(i, j));
                let expect = if i == j { rint(1) } else { rint(0) };
                assert_eq!(as_rat(q.get(i, j + 2)), expect);
                assert!(q.get(i + 2, j).is_zero());
            }
        }
        let params = p(3, 2, 1, 1, 3);
        let q = build_q(&params).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let b12 = if i == j { rint(1) } else { rint(0) };
                let b23 = if i == j { rint(2) } else { rint(0) };
                assert_eq!(as_rat(q.get(i, j + 3)), b12);
                assert_eq!(as_rat(q.get(i + 3, j + 6)), b23);
                assert!(q.get(i, j + 6).is_zero());
            }
        }
        // det Q = (det K)^{m+1}
        let dq = q.bareiss_det().unwrap().as_rat().unwrap();
        let dk = build_kac(&params).unwrap().bareiss_det().unwrap().as_rat().unwrap();
        assert_eq!(dq, (&dk) * (&dk) * (&dk));
    }

    #[test]
    fn closed_power_matches_repeated_multiplication() {
        for (n, m, c) in [(2usize, 2usize, -1i8), (3, 1, 1), (2, 1, -1)] {
            let params = p(n, m, c, 1, 2);
            let q = build_q(&params).unwrap();
            assert_eq!(
                q_power_closed(&params, 0).unwrap(),
                Mat::identity((m + 1) * n, q.get(0, 0))
            );
            assert_eq!(q_power_closed(&params, 1).unwrap(), q);
            let direct = q.pow(5).unwrap();
            assert_eq!(q_power_closed(&params, 5).unwrap(), direct);
        }
    }

    #[test]
    fn closed_power_recursion() {
        let params = p(3, 2, -1, 2, 3);
        let q = build_q(&params).unwrap();
        let top = params.block_size() as u32 + 2;
        for j in 0..top {
            let lhs = q_power_closed(&params, j).unwrap().mul(&q).unwrap();
            assert_eq!(lhs, q_power_closed(&params, j + 1).unwrap());
        }
    }

    #[test]
    fn charpoly_examples() {
        // n = 2: lam^2 + X
        let cp = charpoly_kac(&p(2, 1, -1, 1, 2)).unwrap();
        let vars = cp.vars().clone();
        let lam = MPoly::var(&vars, "lam").unwrap();
        let x = MPoly::var(&vars, "X").unwrap();
        assert_eq!(cp, lam.pow(2).add(&x).unwrap());

        // n = 3, c = -1, tau = 1/2: roots 1, 0, -1
        let cp = charpoly_kac(&p(3, 1, -1, 1, 2)).unwrap();
        for root in [rint(1), rint(0), rint(-1)] {
            let mut assign = BTreeMap::new();
            assign.insert("lam".to_string(), root);
            assign.insert("X".to_string(), rat(-1, 4));
            assert_eq!(cp.eval_all(&assign).unwrap(), rint(0));
        }
    }

    #[test]
    fn charpoly_parity() {
        for n in 2..=6 {
            let cp = charpoly_kac(&p(n, 1, 1, 1, 3)).unwrap();
            let deg = cp.degree_in("lam").unwrap().unwrap();
            assert_eq!(deg as usize, n);
            for a in 0..=deg {
                let part = cp.coeff_of("lam", a).unwrap();
                if !part.is_zero() {
                    assert_eq!(a % 2, deg % 2, "lam-degree parity broken in {cp}");
                }
            }
        }
    }

    #[test]
    fn rank_parity() {
        assert_eq!(kac_rank(&p(2, 1, -1, 1, 2)).unwrap(), 2);
        assert_eq!(kac_rank(&p(3, 1, -1, 1, 2)).unwrap(), 2);
        assert_eq!(kac_rank(&p(5, 1, 1, 1, 2)).unwrap(), 4);
    }

    #[test]
    fn eigenvectors_and_coordinates() {
        for (n, c, num, den) in [(2usize, -1i8, 1i64, 2i64), (3, -1, 1, 3), (4, 1, 1, 2)] {
            let params = p(n, 1, c, num, den);
            let k = build_kac(&params).unwrap();
            let musq = ground_musq(&params);
            for l in 0..n {
                let v = right_eigenvector(&params, l).unwrap();
                let lam = eigenvalue(&params, l);
                // K v = lam v, entrywise over the extension
                for i in 0..n {
                    let mut acc = QuadExt::zero(&musq);
                    for j in 0..n {
                        let kij = QuadExt::from_rational(k.get(i, j).as_rat().unwrap(), &musq);
                        acc = acc.add(&kij.mul(&v[j]).unwrap()).unwrap();
                    }
                    assert_eq!(acc, lam.mul(&v[i]).unwrap());
                }
            }
            let coords = e1_eigen_coordinates(&params).unwrap();
            assert_eq!(coords.len(), n);
            for c in &coords {
                assert!(!c.is_zero());
            }
            // reassemble e_1 from the coordinates
            let basis: Vec<Vec<QuadExt>> = (0..n)
                .map(|l| right_eigenvector(&params, l).unwrap())
                .collect();
            for i in 0..n {
                let mut acc = QuadExt::zero(&musq);
                for l in 0..n {
                    acc = acc.add(&coords[l].mul(&basis[l][i]).unwrap()).unwrap();
                }
                let expect = if i == 0 {
                    QuadExt::one(&musq)
                } else {
                    QuadExt::zero(&musq)
                };
                assert_eq!(acc, expect);
            }
        }
    }

    #[test]
    fn block_eigenvector_chain() {
        // scaled block vectors x_k = k! (0,..,x,..,0) built on a left
        // eigenvector x of K satisfy x_k Q = lam x_k + x_{k+1}, with the
        // chain terminating at the last block.
        let params = p(3, 2, 1, 1, 2);
        let (n, m) = (params.n, params.m);
        let musq = ground_musq(&params);
        let q = build_q(&params).unwrap();
        for l in 0..n {
            let x = left_eigenvector(&params, l).unwrap();
            let lam = eigenvalue(&params, l);
            let mut fact = Rat::one();
            let chain: Vec<Vec<QuadExt>> = (0..=m)
                .map(|k| {
                    if k > 0 {
                        fact = &fact * rint(k as i64);
                    }
                    let mut v = vec![QuadExt::zero(&musq); (m + 1) * n];
                    for i in 0..n {
                        v[k * n + i] = x[i].scale(&fact);
                    }
                    v
                })
                .collect();
            for k in 0..=m {
                let mut prod = vec![QuadExt::zero(&musq); (m + 1) * n];
                for (i, vi) in chain[k].iter().enumerate() {
                    if vi.is_zero() {
                        continue;
                    }
                    for j in 0..(m + 1) * n {
                        let qij = QuadExt::from_rational(q.get(i, j).as_rat().unwrap(), &musq);
                        prod[j] = prod[j].add(&vi.mul(&qij).unwrap()).unwrap();
                    }
                }
                for j in 0..(m + 1) * n {
                    let mut expect = lam.mul(&chain[k][j]).unwrap();
                    if k < m {
                        expect = expect.add(&chain[k + 1][j]).unwrap();
                    }
                    assert_eq!(prod[j], expect, "chain relation fails at k={k}, j={j}");
                }
            }
        }
    }

    #[test]
    fn bad_params_rejected() {
        assert!(SpaceFormParams::new(1, 1, -1, rat(1, 2)).is_err());
        assert!(SpaceFormParams::new(2, 0, -1, rat(1, 2)).is_err());
        assert!(SpaceFormParams::new(2, 1, 0, rat(1, 2)).is_err());
        assert!(SpaceFormParams::new(2, 1, 1, rat(3, 2)).is_err());
        assert!(SpaceFormParams::new(2, 1, 1, rint(0)).is_err());
    }
}
