//! The p-coefficient table, its interpolated dimension polynomials, the
//! linear-system matrices built from the table rows, and the rank and
//! determinant structure that turns those systems into a nontrivial
//! algebraic equation for tau.
//!
//! All symbolic work happens in the single indeterminate X standing for
//! c*tau^2; every nonzero table entry is a single integer monomial in X.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::kac::{q_power_closed_with_x, SpaceFormParams};
use crate::matrix::Mat;
use crate::poly::{lagrange_interpolate, rint, MPoly, Rat};

/// The family p_{k,l}^q as exact monomials in X, for 0 <= k <= kmax,
/// 0 <= l <= n-1, 0 <= q <= m.
pub struct PTable {
    pub n: usize,
    pub m: usize,
    pub kmax: usize,
    vars: Arc<Vec<String>>,
    vals: Vec<Vec<Vec<MPoly>>>,
}

impl PTable {
    /// Fill the table from the recurrence
    /// p_{k+1,l}^q = q p_{k,l}^{q-1} + l p_{k,l-1}^q - (n-1-l) X p_{k,l+1}^q
    /// seeded with p_{0,0}^0 = 1.
    pub fn build(n: usize, m: usize, kmax: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("n must be at least 2, got {n}")));
        }
        let vars = Arc::new(vec!["X".to_string()]);
        let x = MPoly::var(&vars, "X")?;
        let zero = MPoly::zero(&vars);
        let mut vals: Vec<Vec<Vec<MPoly>>> =
            vec![vec![vec![zero.clone(); m + 1]; n]; kmax + 1];
        vals[0][0][0] = MPoly::one(&vars);
        for k in 0..kmax {
            for l in 0..n {
                for q in 0..=m {
                    let mut acc = zero.clone();
                    if q >= 1 {
                        acc = acc.add(&vals[k][l][q - 1].scale(&rint(q as i64)))?;
                    }
                    if l >= 1 {
                        acc = acc.add(&vals[k][l - 1][q].scale(&rint(l as i64)))?;
                    }
                    if l + 1 < n {
                        let t = vals[k][l + 1][q]
                            .mul(&x)?
                            .scale(&rint(-((n - 1 - l) as i64)));
                        acc = acc.add(&t)?;
                    }
                    vals[k + 1][l][q] = acc;
                }
            }
        }
        Ok(PTable { n, m, kmax, vars, vals })
    }

    pub fn get(&self, k: usize, l: usize, q: usize) -> &MPoly {
        &self.vals[k][l][q]
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    /// The row (p_{k,0}^0, ..., p_{k,n-1}^0, p_{k,0}^1, ..., p_{k,n-1}^m):
    /// l runs innermost, q outermost.
    pub fn flat_row(&self, k: usize) -> Vec<MPoly> {
        let mut out = Vec::with_capacity((self.m + 1) * self.n);
        for q in 0..=self.m {
            for l in 0..self.n {
                out.push(self.vals[k][l][q].clone());
            }
        }
        out
    }

    /// Check the vanishing pattern and the monomial shape: zero unless
    /// s = (k-q-l)/2 is a non-negative integer, in which case the entry
    /// is a single integer multiple of X^s.
    pub fn check_shape(&self) -> Result<()> {
        for k in 0..=self.kmax {
            for l in 0..self.n {
                for q in 0..=self.m {
                    let v = &self.vals[k][l][q];
                    let diff = k as i64 - q as i64 - l as i64;
                    if diff < 0 || diff % 2 != 0 {
                        if !v.is_zero() {
                            return Err(Error::Verification(format!(
                                "entry ({k},{l},{q}) should vanish, got {v}"
                            )));
                        }
                        continue;
                    }
                    let s = (diff / 2) as u32;
                    if v.is_zero() {
                        continue;
                    }
                    match v.as_monomial() {
                        Some((c, exps)) if exps[0] == s && c.denom().is_one() => {}
                        _ => {
                            return Err(Error::Verification(format!(
                                "entry ({k},{l},{q}) is not an integer monomial of degree {s}: {v}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn p_table(params: &SpaceFormParams, kmax: usize) -> Result<PTable> {
    PTable::build(params.n, params.m, kmax)
}

/// Exact comparison of the flat p-row at level k with the first row of
/// the closed-form power Q^k. A mismatch is reported with its index.
pub fn row_matches_qpower(table: &PTable, k: usize) -> Result<bool> {
    if k > table.kmax {
        return Err(Error::Parameter(format!(
            "k = {k} exceeds table depth {}",
            table.kmax
        )));
    }
    let x = MPoly::var(table.vars(), "X")?;
    let qk = q_power_closed_with_x(table.n, table.m, k as u32, &x)?;
    let row = table.flat_row(k);
    for (j, want) in row.iter().enumerate() {
        if qk.get(0, j) != want {
            return Err(Error::Verification(format!(
                "p-row {k} differs from the matrix power at flat index {j}: {} vs {want}",
                qk.get(0, j)
            )));
        }
    }
    Ok(true)
}

/// The integer coefficient of p_{k,l}^q, seen as a polynomial in the
/// dimension n, recovered by interpolation.
pub struct SigmaPoly {
    pub k: usize,
    pub l: usize,
    pub q: usize,
    pub s: usize,
    pub poly: MPoly,
}

/// Interpolate the coefficient of X^s in p_{k,l}^q across dimensions
/// n_j = max(l+1, 2) + j, j = 0..k, and check the degree and leading
/// sign predicted for it.
pub fn sigma_interpolate(l: usize, q: usize, k: usize, c: i8) -> Result<SigmaPoly> {
    if c != 1 && c != -1 {
        return Err(Error::Parameter(format!("c must be +1 or -1, got {c}")));
    }
    let diff = k as i64 - q as i64 - l as i64;
    if diff < 0 || diff % 2 != 0 {
        return Err(Error::Parameter(format!(
            "indices (k,l,q) = ({k},{l},{q}) have no coefficient: s is not a non-negative integer"
        )));
    }
    let s = (diff / 2) as usize;
    let n0 = (l + 1).max(2);
    let m = q.max(1);
    let mut samples = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let n = n0 + j;
        let table = PTable::build(n, m, k)?;
        let entry = table.get(k, l, q);
        let a = if entry.is_zero() {
            Rat::zero()
        } else {
            let (coeff, exps) = entry.as_monomial().ok_or_else(|| {
                Error::Verification(format!("entry ({k},{l},{q}) is not a monomial: {entry}"))
            })?;
            if exps[0] as usize != s {
                return Err(Error::Verification(format!(
                    "entry ({k},{l},{q}) at n = {n} has X-degree {} instead of {s}",
                    exps[0]
                )));
            }
            coeff
        };
        samples.push((rint(n as i64), a));
    }
    let poly = lagrange_interpolate(&samples, "n")?;
    let deg = poly.degree_in("n")?.unwrap_or(0) as usize;
    if deg < s {
        return Err(Error::Verification(format!(
            "coefficient polynomial {poly} for ({k},{l},{q}) has degree {deg} < s = {s}"
        )));
    }
    let lead = poly.coeff_of("n", deg as u32)?.constant_term();
    let want_negative = s % 2 == 1;
    if lead.is_negative() != want_negative || lead.is_zero() {
        return Err(Error::Verification(format!(
            "leading coefficient {lead} of {poly} has the wrong sign for s = {s}"
        )));
    }
    Ok(SigmaPoly { k, l, q, s, poly })
}

/// Flat column labels of the full system matrix: (l, q) pairs with l
/// innermost. Columns of M drop the leading (0,0).
fn column_pairs(n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity((m + 1) * n);
    for q in 0..=m {
        for l in 0..n {
            out.push((l, q));
        }
    }
    out
}

/// M, the right-hand column nu_tau, and the augmented [ -nu_tau | M ],
/// all symbolic in X. Row r holds the p-row at k = r + 2.
pub struct SystemMatrices {
    pub m_mat: Mat<MPoly>,
    pub nu_tau: Vec<MPoly>,
    pub mtilde: Mat<MPoly>,
}

pub fn build_system(params: &SpaceFormParams) -> Result<SystemMatrices> {
    let size = params.block_size();
    let table = p_table(params, size)?;
    let rows: Vec<Vec<MPoly>> = (2..=size).map(|k| table.flat_row(k)).collect();
    let mtilde = Mat::from_rows(rows.clone())?;
    let m_mat = Mat::from_fn(size - 1, size - 1, |i, j| rows[i][j + 1].clone());
    let nu_tau: Vec<MPoly> = rows.iter().map(|r| r[0].neg()).collect();
    Ok(SystemMatrices { m_mat, nu_tau, mtilde })
}

/// The odd-n system: rows are the p-rows at k = 2..(m+1)n-1 plus the
/// extra row at k = s. `full` keeps every column, `ms` drops the first.
pub struct SystemMatricesOdd {
    pub s: usize,
    pub row_ks: Vec<usize>,
    pub full: Mat<MPoly>,
    pub ms: Mat<MPoly>,
    pub nu_tau: Vec<MPoly>,
}

pub fn build_system_odd(params: &SpaceFormParams, s: usize) -> Result<SystemMatricesOdd> {
    if params.n % 2 == 0 {
        return Err(Error::Parameter("odd-n system requested for even n".into()));
    }
    let size = params.block_size();
    if s < size {
        return Err(Error::Parameter(format!(
            "s = {s} must be at least (m+1)n = {size}"
        )));
    }
    let table = p_table(params, s)?;
    let mut row_ks: Vec<usize> = (2..size).collect();
    row_ks.push(s);
    let rows: Vec<Vec<MPoly>> = row_ks.iter().map(|&k| table.flat_row(k)).collect();
    let full = Mat::from_rows(rows.clone())?;
    let ms = Mat::from_fn(size - 1, size - 1, |i, j| rows[i][j + 1].clone());
    let nu_tau: Vec<MPoly> = rows.iter().map(|r| r[0].neg()).collect();
    Ok(SystemMatricesOdd { s, row_ks, full, ms, nu_tau })
}

fn ground(mat: &Mat<MPoly>, x: &Rat) -> Result<Mat<MPoly>> {
    let mut rows = Vec::with_capacity(mat.rows());
    for i in 0..mat.rows() {
        let mut row = Vec::with_capacity(mat.cols());
        for j in 0..mat.cols() {
            row.push(mat.get(i, j).eval("X", x)?);
        }
        rows.push(row);
    }
    Mat::from_rows(rows)
}

/// rank M for even n, asserted equal to (m+1)n - 2.
pub fn verify_rank_m(params: &SpaceFormParams) -> Result<usize> {
    if params.n % 2 != 0 {
        return Err(Error::Parameter("rank of M is an even-n statement".into()));
    }
    let sys = build_system(params)?;
    let r = ground(&sys.m_mat, &params.x_value())?.rank()?;
    let want = params.block_size() - 2;
    if r != want {
        return Err(Error::Verification(format!(
            "rank M = {r}, expected {want} for {params:?}"
        )));
    }
    Ok(r)
}

/// rank M^s for odd n, asserted equal to (m+1)n - 2.
pub fn verify_rank_ms(params: &SpaceFormParams, s: usize) -> Result<usize> {
    let sys = build_system_odd(params, s)?;
    let r = ground(&sys.ms, &params.x_value())?.rank()?;
    let want = params.block_size() - 2;
    if r != want {
        return Err(Error::Verification(format!(
            "rank M^s = {r}, expected {want} for {params:?}, s = {s}"
        )));
    }
    Ok(r)
}

/// Even n: the (m+1)n consecutive first rows of Q^i, i = s..s+(m+1)n-1,
/// must be linearly independent.
pub fn verify_independence_even(params: &SpaceFormParams, s: usize) -> Result<bool> {
    if params.n % 2 != 0 {
        return Err(Error::Parameter("window independence needs even n".into()));
    }
    let size = params.block_size();
    let x = MPoly::var(&Arc::new(vec!["X".to_string()]), "X")?;
    let rows: Vec<Vec<MPoly>> = (s..s + size)
        .map(|i| {
            let qi = q_power_closed_with_x(params.n, params.m, i as u32, &x)?;
            Ok(qi.row(0))
        })
        .collect::<Result<_>>()?;
    let mat = Mat::from_rows(rows)?;
    let r = ground(&mat, &params.x_value())?.rank()?;
    if r != size {
        return Err(Error::Verification(format!(
            "window rows at s = {s} have rank {r} < {size}"
        )));
    }
    Ok(true)
}

/// Odd n: the rows at k = 2..(m+1)n-1 have full row rank (m+1)n-2, and
/// appending the row at k = s does not raise it.
pub fn verify_independence_odd(params: &SpaceFormParams, s: usize) -> Result<bool> {
    let sys = build_system_odd(params, s)?;
    let x = params.x_value();
    let want = params.block_size() - 2;
    let lambda_rows = sys.full.select(
        &(0..want).collect::<Vec<_>>(),
        &(0..sys.full.cols()).collect::<Vec<_>>(),
    );
    let r_lambda = ground(&lambda_rows, &x)?.rank()?;
    if r_lambda != want {
        return Err(Error::Verification(format!(
            "independent row set has rank {r_lambda}, expected {want}"
        )));
    }
    let r_all = ground(&sys.full, &x)?.rank()?;
    if r_all != want {
        return Err(Error::Verification(format!(
            "appending the row at k = {s} changed the rank to {r_all}"
        )));
    }
    Ok(true)
}

/// Odd n, s = (m+1)n: column qn+1 of the full odd system lies in the
/// span of the columns qn+2i+1, i = 1..(n-1)/2 (all 1-based).
pub fn verify_column_span(params: &SpaceFormParams, q: usize) -> Result<bool> {
    if q > 1 {
        return Err(Error::Parameter("column-span check is stated for q = 0, 1".into()));
    }
    let sys = build_system_odd(params, params.block_size())?;
    let x = params.x_value();
    let target = q * params.n; // 0-based column qn+1
    let span: Vec<usize> = (1..=(params.n - 1) / 2).map(|i| q * params.n + 2 * i).collect();
    let rows_all: Vec<usize> = (0..sys.full.rows()).collect();
    let span_mat = ground(&sys.full.select(&rows_all, &span), &x)?;
    let mut with_target = span.clone();
    with_target.push(target);
    let aug_mat = ground(&sys.full.select(&rows_all, &with_target), &x)?;
    let r0 = span_mat.rank()?;
    let r1 = aug_mat.rank()?;
    if r0 != r1 {
        return Err(Error::Verification(format!(
            "column {} is not in the span of {:?} (ranks {r0} vs {r1})",
            target + 1,
            span.iter().map(|j| j + 1).collect::<Vec<_>>()
        )));
    }
    Ok(true)
}

fn binom_big(j: usize, d: usize) -> BigInt {
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

pub enum XiMode {
    EvenFull,
    OddReduced,
}

pub struct XiReport {
    pub xi: Mat<MPoly>,
    pub det: MPoly,
    /// +1 when the determinant equals the closed product, -1 when it is
    /// its negative (only the reduced odd case may flip).
    pub sign: i8,
}

/// The generalized Vandermonde matrix of the eigenvalue powers, and its
/// determinant compared against the closed product formula. Everything
/// is polynomial in the single generator mu with lambda_l = (n-1-2l) mu.
pub fn vandermonde_xi(params: &SpaceFormParams, mode: XiMode) -> Result<XiReport> {
    let n = params.n;
    let m = params.m;
    let size = params.block_size();
    let vars = Arc::new(vec!["mu".to_string()]);
    let mu = MPoly::var(&vars, "mu")?;
    let lam_factor = |l: usize| n as i64 - 1 - 2 * l as i64;
    let entry = |l: usize, t: usize, k: usize| -> MPoly {
        if t > k {
            return MPoly::zero(&vars);
        }
        let mut c = Rat::from_integer(binom_big(k, t));
        let mut f = Rat::one();
        for _ in 0..(k - t) {
            f *= rint(lam_factor(l));
        }
        c *= f;
        MPoly::monomial(&vars, vec![(k - t) as u32], c)
    };

    let (rows, cols): (Vec<(usize, usize)>, Vec<usize>) = match mode {
        XiMode::EvenFull => {
            if n % 2 != 0 {
                return Err(Error::Parameter("full Vandermonde check needs even n".into()));
            }
            let rows = (0..n).flat_map(|l| (0..=m).map(move |t| (l, t))).collect();
            (rows, (0..size).collect())
        }
        XiMode::OddReduced => {
            if n % 2 == 0 {
                return Err(Error::Parameter("reduced Vandermonde check needs odd n".into()));
            }
            let mid = (n - 1) / 2;
            let rows = (0..n)
                .flat_map(|l| (0..=m).map(move |t| (l, t)))
                .filter(|&(l, t)| !(l == mid && t <= 1))
                .collect();
            (rows, (2..size).collect())
        }
    };
    let xi = Mat::from_fn(rows.len(), cols.len(), |i, j| {
        let (l, t) = rows[i];
        entry(l, t, cols[j])
    });
    let det = xi.bareiss_det()?;

    let expected = match mode {
        XiMode::EvenFull => {
            let mut acc = MPoly::one(&vars);
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = mu.scale(&rint(lam_factor(j) - lam_factor(i)));
                    acc = acc.mul(&d.pow(((m + 1) * (m + 1)) as u32))?;
                }
            }
            acc
        }
        XiMode::OddReduced => {
            let mid = (n - 1) / 2;
            let mut acc = MPoly::one(&vars);
            for i in 0..n {
                for j in (i + 1)..n {
                    if i == mid || j == mid {
                        continue;
                    }
                    let d = mu.scale(&rint(lam_factor(j) - lam_factor(i)));
                    acc = acc.mul(&d.pow(((m + 1) * (m + 1)) as u32))?;
                }
            }
            for i in 0..n {
                if i == mid {
                    continue;
                }
                let li = mu.scale(&rint(lam_factor(i)));
                acc = acc.mul(&li.pow(((m + 1) * (m + 1)) as u32))?;
            }
            acc
        }
    };
    if det.is_zero() {
        return Err(Error::Verification("Vandermonde determinant vanishes".into()));
    }
    let sign = if det == expected {
        1
    } else if det == expected.neg() {
        match mode {
            XiMode::EvenFull => {
                return Err(Error::Verification(format!(
                    "full Vandermonde determinant {det} is the negative of the product"
                )));
            }
            XiMode::OddReduced => -1,
        }
    } else {
        return Err(Error::Verification(format!(
            "Vandermonde determinant {det} does not match the product {expected}"
        )));
    };
    Ok(XiReport { xi, det, sign })
}

/// One term of the determinant expansion: the cofactor attached to the
/// unknown labeled `idx`, as an integer beta with tau-exponent gamma.
#[derive(Debug, Clone)]
pub struct DetChainEntry {
    pub idx: usize,
    pub beta: Rat,
    pub gamma: i64,
}

#[derive(Debug)]
pub struct DetStructureReport {
    pub iota: usize,
    pub beta0: Rat,
    pub gamma0: i64,
    pub chain: Vec<DetChainEntry>,
}

/// Decompose a monomial-in-X determinant value as beta and tau-exponent
/// gamma, where the stored coefficient is (-1)^(gamma/2) * beta.
fn monomial_beta_gamma(p: &MPoly, what: &str) -> Result<(Rat, i64)> {
    let (coeff, exps) = p.as_monomial().ok_or_else(|| {
        Error::Verification(format!("{what} is not a single monomial: {p}"))
    })?;
    let xdeg = exps[0] as i64;
    let beta = if xdeg % 2 == 1 { -coeff } else { coeff };
    Ok((beta, 2 * xdeg))
}

/// Shared cofactor walk: replace column `iota0` (0-based) by the tau
/// part of the right-hand side, demand a monomial determinant, then
/// expand the cofactors of that column row by row.
fn det_structure(
    mat: &Mat<MPoly>,
    nu_tau: &[MPoly],
    iota0: usize,
    row_ks: &[usize],
    col_weight_sum: i64,
    w_iota: i64,
    expect_tau_zero: bool,
) -> Result<(Rat, i64, Vec<DetChainEntry>)> {
    let det_tau = mat.with_column_replaced(iota0, nu_tau)?.bareiss_det()?;
    let rows_sum: i64 = row_ks.iter().map(|&k| k as i64).sum();
    let (beta0, gamma0) = if expect_tau_zero {
        if !det_tau.is_zero() {
            return Err(Error::Verification(format!(
                "tau-part determinant should vanish, got {det_tau}"
            )));
        }
        (Rat::zero(), 0)
    } else {
        if det_tau.is_zero() {
            return Err(Error::Verification("tau-part determinant vanishes".into()));
        }
        let (b, g) = monomial_beta_gamma(&det_tau, "tau-part determinant")?;
        let g_struct = rows_sum - (col_weight_sum - w_iota);
        if g != g_struct {
            return Err(Error::Verification(format!(
                "tau-part exponent {g} disagrees with the structural count {g_struct}"
            )));
        }
        (b, g)
    };

    let mut chain = Vec::with_capacity(row_ks.len());
    for (r, &k) in row_ks.iter().enumerate() {
        let minor = mat.minor_matrix(r, iota0);
        let mut cof = minor.bareiss_det()?;
        if (r + iota0) % 2 == 1 {
            cof = cof.neg();
        }
        let g_struct = rows_sum - k as i64 - (col_weight_sum - w_iota);
        let (beta, gamma) = if cof.is_zero() {
            (Rat::zero(), g_struct)
        } else {
            let (b, g) = monomial_beta_gamma(&cof, "cofactor")?;
            if g != g_struct {
                return Err(Error::Verification(format!(
                    "cofactor exponent {g} at row k = {k} disagrees with the structural count {g_struct}"
                )));
            }
            (b, g)
        };
        chain.push(DetChainEntry { idx: k - 1, beta, gamma });
    }
    // the exponent chain must decrease strictly and stay positive
    let mut prev: Option<i64> = if expect_tau_zero { None } else { Some(gamma0) };
    for e in &chain {
        if let Some(p) = prev {
            if e.gamma >= p {
                return Err(Error::Verification(format!(
                    "exponent chain is not strictly decreasing at index {}",
                    e.idx
                )));
            }
        }
        prev = Some(e.gamma);
    }
    if let Some(last) = chain.last() {
        if last.gamma <= 0 {
            return Err(Error::Verification(format!(
                "final exponent {} is not positive",
                last.gamma
            )));
        }
    }
    Ok((beta0, gamma0, chain))
}

/// Even n: search for a column iota whose tau-part determinant is a
/// nonzero monomial, then report the cofactor chain of that column.
pub fn det_structure_m_iota(params: &SpaceFormParams) -> Result<DetStructureReport> {
    if params.n % 2 != 0 {
        return Err(Error::Parameter("determinant structure of M needs even n".into()));
    }
    let size = params.block_size();
    let sys = build_system(params)?;
    let pairs = column_pairs(params.n, params.m);
    let col_weight_sum: i64 = pairs[1..].iter().map(|&(l, q)| (l + q) as i64).sum();
    let row_ks: Vec<usize> = (2..=size).collect();
    let mut last_err = None;
    for iota in 1..size {
        let w_iota = {
            let (l, q) = pairs[iota]; // column iota of M is pair iota of the full list
            (l + q) as i64
        };
        match det_structure(
            &sys.m_mat,
            &sys.nu_tau,
            iota - 1,
            &row_ks,
            col_weight_sum,
            w_iota,
            false,
        ) {
            Ok((beta0, gamma0, chain)) => {
                return Ok(DetStructureReport { iota, beta0, gamma0, chain });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Verification("no admissible column found".into())))
}

/// Odd n: the fixed column n of the odd system. The tau part must vanish
/// identically, the cofactor of the extra row must not.
pub fn det_structure_ms(params: &SpaceFormParams, s: usize) -> Result<DetStructureReport> {
    let sys = build_system_odd(params, s)?;
    let pairs = column_pairs(params.n, params.m);
    let col_weight_sum: i64 = pairs[1..].iter().map(|&(l, q)| (l + q) as i64).sum();
    let iota = params.n;
    let w_iota = {
        let (l, q) = pairs[iota];
        (l + q) as i64
    };
    let (beta0, gamma0, chain) = det_structure(
        &sys.ms,
        &sys.nu_tau,
        iota - 1,
        &sys.row_ks,
        col_weight_sum,
        w_iota,
        true,
    )?;
    let last = chain.last().expect("chain is nonempty");
    if last.beta.is_zero() {
        return Err(Error::Verification(format!(
            "cofactor of the extra row at k = {s} vanishes"
        )));
    }
    Ok(DetStructureReport { iota, beta0, gamma0, chain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn p(n: usize, m: usize, c: i8, num: i64, den: i64) -> SpaceFormParams {
        SpaceFormParams::new(n, m, c, rat(num, den)).unwrap()
    }

    fn xmono(vars: &Arc<Vec<String>>, a: i64, s: u32) -> MPoly {
        MPoly::monomial(vars, vec![s], rint(a))
    }

    #[test]
    fn first_rows_of_table() {
        let t = PTable::build(3, 2, 2).unwrap();
        let vars = t.vars().clone();
        // k = 1: p_{1,0}^1 = p_{1,1}^0 = 1, all else 0
        for l in 0..3 {
            for q in 0..=2 {
                let want = if (l, q) == (1, 0) || (l, q) == (0, 1) {
                    MPoly::one(&vars)
                } else {
                    MPoly::zero(&vars)
                };
                assert_eq!(t.get(1, l, q), &want, "(l,q)=({l},{q})");
            }
        }
        // k = 2: p_{2,0}^0 = -2X, p_{2,0}^2 = p_{2,1}^1 = p_{2,2}^0 = 2
        for l in 0..3 {
            for q in 0..=2 {
                let want = match (l, q) {
                    (0, 0) => xmono(&vars, -2, 1),
                    (0, 2) | (1, 1) | (2, 0) => xmono(&vars, 2, 0),
                    _ => MPoly::zero(&vars),
                };
                assert_eq!(t.get(2, l, q), &want, "(l,q)=({l},{q})");
            }
        }
    }

    #[test]
    fn shape_and_factorial_diagonal() {
        for (n, m) in [(2usize, 1usize), (3, 2), (4, 3), (5, 1)] {
            let kmax = (m + 1) * n + 2;
            let t = PTable::build(n, m, kmax).unwrap();
            t.check_shape().unwrap();
            // s = 0 diagonal: p_{k,k-q}^q = k!
            for k in 0..=kmax {
                for q in 0..=m.min(k) {
                    let l = k - q;
                    if l > n - 1 {
                        continue;
                    }
                    let mut fact = Rat::one();
                    for i in 1..=k {
                        fact *= rint(i as i64);
                    }
                    assert_eq!(t.get(k, l, q).as_rat().unwrap(), fact);
                }
            }
        }
    }

    #[test]
    fn rows_match_matrix_powers() {
        for (n, m) in [(2usize, 2usize), (3, 1)] {
            let kmax = (m + 1) * n;
            let t = PTable::build(n, m, kmax).unwrap();
            for k in 0..=kmax {
                assert!(row_matches_qpower(&t, k).unwrap());
            }
        }
    }

    #[test]
    fn corrupted_row_is_detected() {
        let mut t = PTable::build(2, 1, 4).unwrap();
        let vars = t.vars().clone();
        t.vals[3][1][0] = t.vals[3][1][0].add(&MPoly::one(&vars)).unwrap();
        assert!(row_matches_qpower(&t, 3).is_err());
        assert!(row_matches_qpower(&t, 2).is_ok());
    }

    #[test]
    fn sigma_small_cases() {
        // (l,q,k) = (0,0,2): sigma = -(n-1)
        let s = sigma_interpolate(0, 0, 2, -1).unwrap();
        let vars = s.poly.vars().clone();
        let n = MPoly::var(&vars, "n").unwrap();
        assert_eq!(s.poly, MPoly::one(&vars).sub(&n).unwrap());
        assert_eq!(s.s, 1);

        // (l,q,k) = (0,0,4): degree >= 2, leading sign +
        let s = sigma_interpolate(0, 0, 4, 1).unwrap();
        assert_eq!(s.s, 2);
        assert!(s.poly.degree_in("n").unwrap().unwrap() >= 2);

        // s = 0: constant k!
        let s = sigma_interpolate(2, 1, 3, -1).unwrap();
        assert!(s.poly.is_constant());
        assert_eq!(s.poly.as_rat().unwrap(), rint(6));

        assert!(sigma_interpolate(0, 0, 3, -1).is_err());
    }

    #[test]
    fn system_shapes_and_rows() {
        let params = p(2, 1, -1, 1, 2);
        let sys = build_system(&params).unwrap();
        assert_eq!(sys.m_mat.rows(), 3);
        assert_eq!(sys.m_mat.cols(), 3);
        let t = p_table(&params, 4).unwrap();
        // rows of M are (p_{k,1}^0, p_{k,0}^1, p_{k,1}^1) for k = 2..4
        for (r, k) in (2..=4).enumerate() {
            assert_eq!(sys.m_mat.get(r, 0), t.get(k, 1, 0));
            assert_eq!(sys.m_mat.get(r, 1), t.get(k, 0, 1));
            assert_eq!(sys.m_mat.get(r, 2), t.get(k, 1, 1));
            assert_eq!(&sys.nu_tau[r], &t.get(k, 0, 0).neg());
        }
        // first entry of nu_tau is (n-1) c tau^2, i.e. (n-1) X
        let vars = t.vars().clone();
        assert_eq!(sys.nu_tau[0], xmono(&vars, 1, 1));
    }

    #[test]
    fn odd_system_shape() {
        let params = p(3, 1, -1, 1, 2);
        let sys = build_system_odd(&params, 8).unwrap();
        assert_eq!(sys.ms.rows(), 5);
        assert_eq!(sys.ms.cols(), 5);
        assert_eq!(sys.full.cols(), 6);
        assert_eq!(sys.row_ks, vec![2, 3, 4, 5, 8]);
        assert!(build_system_odd(&params, 5).is_err());
        assert!(build_system_odd(&p(2, 1, -1, 1, 2), 8).is_err());
    }

    #[test]
    fn ranks() {
        assert_eq!(verify_rank_m(&p(2, 1, -1, 1, 2)).unwrap(), 2);
        assert_eq!(verify_rank_m(&p(2, 2, 1, 1, 3)).unwrap(), 4);
        assert_eq!(verify_rank_m(&p(4, 1, -1, 2, 3)).unwrap(), 6);
        assert_eq!(verify_rank_ms(&p(3, 1, -1, 1, 2), 8).unwrap(), 4);
        assert_eq!(verify_rank_ms(&p(3, 2, 1, 1, 3), 9).unwrap(), 7);
        assert_eq!(verify_rank_ms(&p(5, 1, -1, 1, 2), 10).unwrap(), 8);
    }

    #[test]
    fn independence() {
        assert!(verify_independence_even(&p(2, 1, -1, 1, 2), 2).unwrap());
        assert!(verify_independence_odd(&p(3, 1, -1, 1, 2), 8).unwrap());
        assert!(verify_independence_odd(&p(3, 1, 1, 1, 3), 6).unwrap());
    }

    #[test]
    fn column_span() {
        assert!(verify_column_span(&p(3, 1, -1, 1, 2), 0).unwrap());
        assert!(verify_column_span(&p(3, 1, -1, 1, 2), 1).unwrap());
        assert!(verify_column_span(&p(5, 1, 1, 1, 2), 0).unwrap());
    }

    #[test]
    fn vandermonde_even_and_odd() {
        let r = vandermonde_xi(&p(2, 1, -1, 1, 2), XiMode::EvenFull).unwrap();
        // n=2, m=1: det = (lam_1 - lam_0)^4 = (-2 mu)^4 = 16 mu^4
        let vars = r.det.vars().clone();
        assert_eq!(r.det, MPoly::monomial(&vars, vec![4], rint(16)));
        assert_eq!(r.sign, 1);
        assert!(vandermonde_xi(&p(3, 1, -1, 1, 2), XiMode::EvenFull).is_err());

        let r = vandermonde_xi(&p(3, 1, -1, 1, 2), XiMode::OddReduced).unwrap();
        assert!(!r.det.is_zero());
        assert_eq!(r.xi.rows(), 4);
    }

    #[test]
    fn determinant_structure_even() {
        for params in [p(2, 1, -1, 1, 2), p(2, 2, 1, 1, 3), p(4, 1, -1, 1, 2)] {
            let rep = det_structure_m_iota(&params).unwrap();
            assert!(!rep.beta0.is_zero());
            assert_eq!(rep.gamma0 % 2, 0);
            assert_eq!(rep.chain.len(), params.block_size() - 1);
            let mut prev = rep.gamma0;
            for e in &rep.chain {
                assert!(e.gamma < prev);
                prev = e.gamma;
                if !e.beta.is_zero() {
                    assert_eq!(e.gamma % 2, 0);
                }
            }
            assert!(rep.chain.last().unwrap().gamma > 0);
        }
    }

    #[test]
    fn determinant_structure_odd() {
        for (params, s) in [(p(3, 1, -1, 1, 2), 6), (p(3, 1, -1, 1, 2), 9), (p(3, 2, 1, 1, 3), 9)] {
            let rep = det_structure_ms(&params, s).unwrap();
            assert_eq!(rep.iota, params.n);
            assert!(rep.beta0.is_zero());
            let last = rep.chain.last().unwrap();
            assert!(!last.beta.is_zero());
            assert!(last.gamma > 0);
            // the extra-row cofactor equals, up to sign, the determinant
            // of the system with its last row and iota-th column removed
            let sys = build_system_odd(&params, s).unwrap();
            let sub = sys.ms.minor_matrix(sys.ms.rows() - 1, params.n - 1);
            assert!(!sub.bareiss_det().unwrap().is_zero());
        }
    }
}
