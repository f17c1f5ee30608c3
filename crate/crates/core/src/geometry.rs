//! Concrete geometry of the two product families: ambient models for the
//! circle and the Lorentz hyperboloid, the two explicit isoparametric
//! example families, level-set invariants (normal, angle, Hessian,
//! curvature tables), the closed parametrizations of the exceptional
//! hypersurfaces, and the constructive isometries witnessing homogeneity.
//!
//! Everything here is double-precision numerics; finite-difference
//! oracles use 4th-order central stencils with one Richardson step.

use crate::error::{Error, Result};

const FD_STEP: f64 = 1e-4;

// ---- small vector helpers ------------------------------------------------

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minkowski pairing with signature (-, +, ..., +).
pub fn ldot(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + dot(&a[1..], &b[1..])
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scaled(x: &[f64], alpha: f64) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

fn vsub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FactorModel {
    Sphere,
    Hyperbolic,
}

fn h_dot(model: FactorModel, a: &[f64], b: &[f64]) -> f64 {
    match model {
        FactorModel::Sphere => dot(a, b),
        FactorModel::Hyperbolic => ldot(a, b),
    }
}

#[derive(Clone, Debug)]
pub struct ProductPoint {
    pub h: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TangentVec {
    pub h: Vec<f64>,
    pub v: Vec<f64>,
}

impl TangentVec {
    pub fn zero(hdim: usize, vdim: usize) -> Self {
        TangentVec { h: vec![0.0; hdim], v: vec![0.0; vdim] }
    }
}

/// Product metric on tangent vectors (positive definite in both models:
/// the Lorentz form is Riemannian on the hyperboloid's tangent spaces).
pub fn g_product(model: FactorModel, x: &TangentVec, y: &TangentVec) -> f64 {
    h_dot(model, &x.h, &y.h) + dot(&x.v, &y.v)
}

impl ProductPoint {
    pub fn check_model(&self, model: FactorModel) -> Result<()> {
        let q = h_dot(model, &self.h, &self.h);
        let want = match model {
            FactorModel::Sphere => 1.0,
            FactorModel::Hyperbolic => -1.0,
        };
        if (q - want).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "factor point off the model surface: <h,h> = {q}"
            )));
        }
        if model == FactorModel::Hyperbolic && self.h[0] <= 0.0 {
            return Err(Error::Parameter("hyperboloid point with h_0 <= 0".into()));
        }
        Ok(())
    }
}

// ---- the two example families --------------------------------------------

/// F(e^{ix}, y) = sin(x - kappa <y, y0>) on the circle times R^m.
#[derive(Clone, Debug)]
pub struct ExampleS1 {
    pub m: usize,
    pub kappa: f64,
    pub y0: Vec<f64>,
}

impl ExampleS1 {
    pub fn new(m: usize, kappa: f64, y0: Vec<f64>) -> Result<Self> {
        if y0.len() != m {
            return Err(Error::Parameter("y0 has the wrong dimension".into()));
        }
        if (dot(&y0, &y0) - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter("y0 must be a unit vector".into()));
        }
        Ok(ExampleS1 { m, kappa, y0 })
    }

    fn phase(&self, p: &ProductPoint) -> f64 {
        p.h[1].atan2(p.h[0]) - self.kappa * dot(&p.v, &self.y0)
    }
}

/// F(x, y) = <x, u>_L exp(a <y - y0, v0>) on the hyperboloid times R^m.
#[derive(Clone, Debug)]
pub struct ExampleHn {
    pub n: usize,
    pub m: usize,
    pub u: Vec<f64>,
    pub v0: Vec<f64>,
    pub y0: Vec<f64>,
    pub a: f64,
}

impl ExampleHn {
    pub fn new(n: usize, m: usize, u: Vec<f64>, v0: Vec<f64>, y0: Vec<f64>, a: f64) -> Result<Self> {
        if u.len() != n + 1 || v0.len() != m || y0.len() != m {
            return Err(Error::Parameter("dimension mismatch in example data".into()));
        }
        if ldot(&u, &u).abs() > 1e-12 || u[0] <= 0.0 {
            return Err(Error::Parameter(
                "u must be lightlike with positive time component".into(),
            ));
        }
        if (dot(&v0, &v0) - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter("v0 must be a unit vector".into()));
        }
        Ok(ExampleHn { n, m, u, v0, y0, a })
    }

    fn weight(&self, p: &ProductPoint) -> f64 {
        (self.a * dot(&vsub(&p.v, &self.y0), &self.v0)).exp()
    }
}

#[derive(Clone, Debug)]
pub enum Example {
    S1(ExampleS1),
    Hn(ExampleHn),
}

impl Example {
    pub fn model(&self) -> FactorModel {
        match self {
            Example::S1(_) => FactorModel::Sphere,
            Example::Hn(_) => FactorModel::Hyperbolic,
        }
    }

    pub fn hdim(&self) -> usize {
        match self {
            Example::S1(_) => 2,
            Example::Hn(e) => e.n + 1,
        }
    }

    pub fn vdim(&self) -> usize {
        match self {
            Example::S1(e) => e.m,
            Example::Hn(e) => e.m,
        }
    }

    pub fn f(&self, p: &ProductPoint) -> f64 {
        match self {
            Example::S1(e) => e.phase(p).sin(),
            Example::Hn(e) => ldot(&p.h, &e.u) * e.weight(p),
        }
    }

    /// The displayed analytic gradient.
    pub fn grad_f(&self, p: &ProductPoint) -> TangentVec {
        match self {
            Example::S1(e) => {
                let cs = e.phase(p).cos();
                TangentVec {
                    h: vec![-cs * p.h[1], cs * p.h[0]],
                    v: scaled(&e.y0, -e.kappa * cs),
                }
            }
            Example::Hn(e) => {
                let s = ldot(&p.h, &e.u);
                let w = e.weight(p);
                let mut h = e.u.clone();
                axpy(&mut h, s, &p.h);
                TangentVec {
                    h: scaled(&h, w),
                    v: scaled(&e.v0, e.a * s * w),
                }
            }
        }
    }

    /// The displayed closed-form Laplacian.
    pub fn laplace_closed(&self, p: &ProductPoint) -> f64 {
        match self {
            Example::S1(e) => -(1.0 + e.kappa * e.kappa) * self.f(p),
            Example::Hn(e) => (e.n as f64 + e.a * e.a) * self.f(p),
        }
    }

    /// The displayed analytic Hessian, as a bilinear form on tangent pairs.
    pub fn hessian(&self, p: &ProductPoint, x: &TangentVec, y: &TangentVec) -> f64 {
        match self {
            Example::S1(e) => {
                // -F (X^x - k<X^v,y0>)(Y^x - k<Y^v,y0>) with X^x the
                // component along the circle tangent (-h1, h0)
                let circ = [-p.h[1], p.h[0]];
                let xs = dot(&x.h, &circ) - e.kappa * dot(&x.v, &e.y0);
                let ys = dot(&y.h, &circ) - e.kappa * dot(&y.v, &e.y0);
                -self.f(p) * xs * ys
            }
            Example::Hn(e) => {
                let s = ldot(&p.h, &e.u);
                let w = e.weight(p);
                let f = s * w;
                let mut utop = e.u.clone();
                axpy(&mut utop, s, &p.h);
                let xv = dot(&x.v, &e.v0);
                let yv = dot(&y.v, &e.v0);
                ldot(&x.h, &y.h) * f
                    + e.a * e.a * xv * yv * f
                    + e.a * w * (ldot(&x.h, &utop) * yv + ldot(&y.h, &utop) * xv)
            }
        }
    }
}

pub fn hessian_f(example: &Example, p: &ProductPoint, x: &TangentVec, y: &TangentVec) -> f64 {
    example.hessian(p, x, y)
}

// ---- geodesics and frames ------------------------------------------------

/// Factorwise geodesic of the product metric.
pub fn factor_exp(
    model: FactorModel,
    p: &ProductPoint,
    w: &TangentVec,
    t: f64,
) -> Result<ProductPoint> {
    p.check_model(model)?;
    let tang = h_dot(model, &p.h, &w.h);
    if tang.abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "velocity is not tangent to the factor: <h, w> = {tang}"
        )));
    }
    let s2 = h_dot(model, &w.h, &w.h);
    let h = if s2 <= 1e-24 {
        p.h.clone()
    } else {
        let s = s2.sqrt();
        let (cv, sv) = match model {
            FactorModel::Sphere => ((s * t).cos(), (s * t).sin()),
            FactorModel::Hyperbolic => ((s * t).cosh(), (s * t).sinh()),
        };
        let mut out = scaled(&p.h, cv);
        axpy(&mut out, sv / s, &w.h);
        out
    };
    let mut v = p.v.clone();
    axpy(&mut v, t, &w.v);
    Ok(ProductPoint { h, v })
}

fn gram_schmidt(cands: Vec<Vec<f64>>, inner: impl Fn(&[f64], &[f64]) -> f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut c in cands {
        for b in &basis {
            let coef = inner(&c, b);
            axpy(&mut c, -coef, b);
        }
        let n2 = inner(&c, &c);
        if n2 > 1e-16 {
            basis.push(scaled(&c, 1.0 / n2.sqrt()));
        }
    }
    basis
}

/// Orthonormal basis of the factor tangent space at h.
fn h_tangent_frame(model: FactorModel, h: &[f64]) -> Vec<Vec<f64>> {
    let dim = h.len();
    let mut cands = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        let c = h_dot(model, &e, h);
        // project out the position direction: <h,h> is +1 or -1
        let q = h_dot(model, h, h);
        axpy(&mut e, -c / q, h);
        cands.push(e);
    }
    gram_schmidt(cands, |a, b| h_dot(model, a, b))
}

/// Orthonormal tangent frame of the whole product at p.
fn product_frame(example: &Example, p: &ProductPoint) -> Vec<TangentVec> {
    let model = example.model();
    let vdim = example.vdim();
    let hdim = example.hdim();
    let mut out: Vec<TangentVec> = h_tangent_frame(model, &p.h)
        .into_iter()
        .map(|h| TangentVec { h, v: vec![0.0; vdim] })
        .collect();
    for j in 0..vdim {
        let mut v = vec![0.0; vdim];
        v[j] = 1.0;
        out.push(TangentVec { h: vec![0.0; hdim], v });
    }
    out
}

fn second_derivative(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}

pub struct GradLap {
    pub grad: TangentVec,
    pub lap_closed: f64,
    pub lap_fd: f64,
}

/// Analytic gradient plus the Laplacian both in closed form and through
/// the geodesic finite-difference oracle.
pub fn grad_laplace(example: &Example, p: &ProductPoint) -> Result<GradLap> {
    p.check_model(example.model())?;
    let frame = product_frame(example, p);
    let expect = example.hdim() - 1 + example.vdim();
    if frame.len() != expect {
        return Err(Error::Numerical(format!(
            "tangent frame has {} vectors, expected {expect}",
            frame.len()
        )));
    }
    let mut lap_fd = 0.0;
    for e in &frame {
        let d2 = |h: f64| {
            let g = |t: f64| {
                let q = factor_exp(example.model(), p, e, t).expect("frame is tangent");
                example.f(&q)
            };
            second_derivative(g, h)
        };
        // one Richardson step on the 4th-order stencil
        lap_fd += (16.0 * d2(FD_STEP / 2.0) - d2(FD_STEP)) / 15.0;
    }
    Ok(GradLap {
        grad: example.grad_f(p),
        lap_closed: example.laplace_closed(p),
        lap_fd,
    })
}

// ---- level-set frame and curvature ---------------------------------------

pub struct LevelFrame {
    pub n: TangentVec,
    pub c: f64,
    pub v: TangentVec,
}

/// Unit normal N, angle C = <PN, N> and the distinguished tangent field
/// V = PN - CN of the level set through p.
pub fn level_set_frame(example: &Example, p: &ProductPoint) -> Result<LevelFrame> {
    let model = example.model();
    let grad = example.grad_f(p);
    let norm2 = g_product(model, &grad, &grad);
    if norm2 < 1e-20 {
        return Err(Error::Parameter("critical point of F".into()));
    }
    let norm = norm2.sqrt();
    let n = TangentVec {
        h: scaled(&grad.h, 1.0 / norm),
        v: scaled(&grad.v, 1.0 / norm),
    };
    let c = h_dot(model, &n.h, &n.h) - dot(&n.v, &n.v);
    let v = TangentVec {
        h: scaled(&n.h, 1.0 - c),
        v: scaled(&n.v, -(1.0 + c)),
    };
    let v2 = g_product(model, &v, &v);
    if (v2 - (1.0 - c * c)).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "|V|^2 = {v2} fails to match 1 - C^2 = {}",
            1.0 - c * c
        )));
    }
    Ok(LevelFrame { n, c, v })
}

/// Adapted orthonormal frame of the level-set tangent space, grouped as
/// (horizontal orth. to N^h, vertical orth. to N^v, the V direction).
/// Returns the frame and the sizes of the first two groups.
fn adapted_sigma_frame(
    example: &Example,
    p: &ProductPoint,
) -> Result<(Vec<TangentVec>, usize, usize)> {
    let model = example.model();
    let lf = level_set_frame(example, p)?;
    let vdim = example.vdim();
    let hdim = example.hdim();

    let mut h_cands = h_tangent_frame(model, &p.h);
    // remove the N^h direction
    for c in h_cands.iter_mut() {
        let nh2 = h_dot(model, &lf.n.h, &lf.n.h);
        if nh2 > 1e-20 {
            let coef = h_dot(model, c, &lf.n.h) / nh2;
            axpy(c, -coef, &lf.n.h);
        }
    }
    let g1 = gram_schmidt(h_cands, |a, b| h_dot(model, a, b));

    let nv2 = dot(&lf.n.v, &lf.n.v);
    let vertical_axis: Vec<f64> = if nv2 > 1e-20 {
        scaled(&lf.n.v, 1.0 / nv2.sqrt())
    } else {
        match example {
            Example::S1(e) => e.y0.clone(),
            Example::Hn(e) => e.v0.clone(),
        }
    };
    let mut v_cands = Vec::with_capacity(vdim);
    for j in 0..vdim {
        let mut e = vec![0.0; vdim];
        e[j] = 1.0;
        let coef = -dot(&e, &vertical_axis);
        axpy(&mut e, coef, &vertical_axis);
        v_cands.push(e);
    }
    let g2 = gram_schmidt(v_cands, dot);

    let vnorm2 = g_product(model, &lf.v, &lf.v);
    let last = if vnorm2 > 1e-20 {
        TangentVec {
            h: scaled(&lf.v.h, 1.0 / vnorm2.sqrt()),
            v: scaled(&lf.v.v, 1.0 / vnorm2.sqrt()),
        }
    } else {
        // degenerate angle |C| = 1: the distinguished direction reduces
        // to the vertical axis
        TangentVec { h: vec![0.0; hdim], v: vertical_axis.clone() }
    };

    let (s1, s2) = (g1.len(), g2.len());
    let mut frame: Vec<TangentVec> = g1
        .into_iter()
        .map(|h| TangentVec { h, v: vec![0.0; vdim] })
        .collect();
    frame.extend(
        g2.into_iter()
            .map(|v| TangentVec { h: vec![0.0; hdim], v }),
    );
    frame.push(last);
    if frame.len() != hdim - 1 + vdim - 1 {
        return Err(Error::Numerical(format!(
            "adapted frame has {} vectors, expected {}",
            frame.len(),
            hdim + vdim - 2
        )));
    }
    Ok((frame, s1, s2))
}

/// Shape-operator matrix S_ij = -Hess F(E_i, E_j)/|grad F| in the given
/// orthonormal frame (the second fundamental form toward N).
fn shape_matrix(example: &Example, p: &ProductPoint, frame: &[TangentVec]) -> Vec<Vec<f64>> {
    let model = example.model();
    let grad = example.grad_f(p);
    let norm = g_product(model, &grad, &grad).sqrt();
    let d = frame.len();
    let mut s = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let v = -example.hessian(p, &frame[i], &frame[j]) / norm;
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    s
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn sym_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let d = a.len();
    for _ in 0..64 {
        let mut off = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..d).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Ambient sectional curvature of the plane spanned by an orthonormal
/// pair: the curvature tensor only sees horizontal components.
fn ambient_sectional(model: FactorModel, x: &TangentVec, y: &TangentVec) -> f64 {
    let c = match model {
        FactorModel::Sphere => 1.0,
        FactorModel::Hyperbolic => -1.0,
    };
    c * (h_dot(model, &x.h, &x.h) * h_dot(model, &y.h, &y.h)
        - h_dot(model, &x.h, &y.h).powi(2))
}

pub struct CurvatureTables {
    pub principal: Vec<f64>,
    pub mean: f64,
    /// sectional curvatures between the three frame groups; NaN where a
    /// group is too small to span a plane
    pub sectional: [[f64; 3]; 3],
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

/// Intrinsic and extrinsic curvature data of the level set of the
/// hyperbolic example at p, via the Gauss equation.
pub fn curvature_tables(ex: &ExampleHn, p: &ProductPoint) -> Result<CurvatureTables> {
    let example = Example::Hn(ex.clone());
    let (frame, s1, s2) = adapted_sigma_frame(&example, p)?;
    let d = frame.len();
    let s = shape_matrix(&example, p, &frame);
    let mean = (0..d).map(|i| s[i][i]).sum();
    let principal = sym_eigenvalues(s.clone());

    let model = example.model();
    let sect = |i: usize, j: usize| -> f64 {
        ambient_sectional(model, &frame[i], &frame[j]) + s[i][i] * s[j][j] - s[i][j] * s[i][j]
    };
    let group = |g: usize| -> std::ops::Range<usize> {
        match g {
            0 => 0..s1,
            1 => s1..s1 + s2,
            _ => s1 + s2..d,
        }
    };
    let mut table = [[f64::NAN; 3]; 3];
    for gi in 0..3 {
        for gj in 0..3 {
            let mut acc = 0.0;
            let mut cnt = 0usize;
            for i in group(gi) {
                for j in group(gj) {
                    if i == j {
                        continue;
                    }
                    acc += sect(i, j);
                    cnt += 1;
                }
            }
            if cnt > 0 {
                table[gi][gj] = acc / cnt as f64;
            }
        }
    }
    let ricci: Vec<f64> = (0..d)
        .map(|i| (0..d).filter(|&j| j != i).map(|j| sect(i, j)).sum())
        .collect();
    let scalar = ricci.iter().sum();
    Ok(CurvatureTables { principal, mean, sectional: table, ricci, scalar })
}

/// Verifies A V = 0 and the block-diagonality of the shape operator
/// across the horizontal/vertical frame split. Returns the pass flag and
/// the worst residual.
pub fn check_principal_frame(example: &Example, p: &ProductPoint) -> Result<(bool, f64)> {
    let lf = level_set_frame(example, p)?;
    if lf.c.abs() >= 1.0 - 1e-12 {
        return Err(Error::Parameter("angle |C| = 1 at the probe point".into()));
    }
    let (frame, s1, s2) = adapted_sigma_frame(example, p)?;
    let s = shape_matrix(example, p, &frame);
    let d = frame.len();
    // V is the last frame vector: the AV residual is the norm of the
    // last column of S
    let mut residual: f64 = (0..d).map(|i| s[i][d - 1] * s[i][d - 1]).sum::<f64>().sqrt();
    for i in 0..s1 {
        for j in s1..s1 + s2 {
            residual = residual.max(s[i][j].abs());
        }
    }
    Ok((residual <= 1e-9, residual))
}

// ---- parametrizations ----------------------------------------------------

/// The flat parametrization of the exceptional circle-product
/// hypersurface: x -> (cos<x,x0>, sin<x,x0>, x).
pub fn param_phi(x: &[f64], x0: &[f64]) -> Result<ProductPoint> {
    if x.len() != x0.len() {
        return Err(Error::Parameter("dimension mismatch".into()));
    }
    let n0 = dot(x0, x0).sqrt();
    if n0 < 1e-300 {
        return Err(Error::Parameter("x0 must be nonzero".into()));
    }
    let t = dot(x, x0);
    Ok(ProductPoint { h: vec![t.cos(), t.sin()], v: x.to_vec() })
}

/// Lorentz null pair adapted to a lightlike u, plus an orthonormal
/// spacelike completion: <e_minus, u>_L = -1, e spans the complement.
pub struct NullBasis {
    pub u: Vec<f64>,
    pub e_minus: Vec<f64>,
    pub e: Vec<Vec<f64>>,
}

impl NullBasis {
    pub fn from_u(u: &[f64]) -> Result<Self> {
        if ldot(u, u).abs() > 1e-12 || u[0] <= 0.0 {
            return Err(Error::Parameter("u must be future lightlike".into()));
        }
        let dim = u.len();
        // time reflection of u is lightlike with <refl, u> = -2 u0^2
        let mut refl = u.to_vec();
        for x in refl.iter_mut().skip(1) {
            *x = -*x;
        }
        let e_minus = scaled(&refl, 1.0 / (2.0 * u[0] * u[0]));
        let mut cands = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut c = vec![0.0; dim];
            c[i] = 1.0;
            // remove the span of the null pair: z = a e_minus + b u + E
            // with a = -<z,u>, b = -<z,e_minus>
            let a = -ldot(&c, u);
            let b = -ldot(&c, &e_minus);
            axpy(&mut c, -a, &e_minus);
            axpy(&mut c, -b, u);
            cands.push(c);
        }
        let e = gram_schmidt(cands, ldot);
        if e.len() != dim - 2 {
            return Err(Error::Numerical("null-pair completion failed".into()));
        }
        Ok(NullBasis { u: u.to_vec(), e_minus, e })
    }

    /// Horosphere chart: gamma(w) = e_minus + w + ((1+|w|^2)/2) u with w
    /// in the spacelike complement coordinates.
    pub fn horosphere(&self, w: &[f64]) -> Vec<f64> {
        let mut out = self.e_minus.clone();
        for (wi, ei) in w.iter().zip(&self.e) {
            axpy(&mut out, *wi, ei);
        }
        axpy(&mut out, (1.0 + dot(w, w)) / 2.0, &self.u);
        out
    }

    /// Spacelike chart coordinates of a hyperboloid point.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        self.e.iter().map(|ei| ldot(x, ei)).collect()
    }
}

/// The exceptional hyperbolic-product hypersurface: t flows with speed
/// sqrt(eps) along the horosphere normal and sqrt(1-eps) along the
/// hyperplane normal.
pub fn param_psi(
    t: f64,
    x: &[f64],
    y: &[f64],
    eps: f64,
    n: usize,
    m: usize,
) -> Result<ProductPoint> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Parameter(format!("eps = {eps} must lie in (0, 1)")));
    }
    if x.len() != n - 1 || y.len() + 1 != m {
        return Err(Error::Parameter("chart dimension mismatch".into()));
    }
    let basis = standard_null_basis(n);
    let gamma = basis.horosphere(x);
    // normal pointing away from u: N = u - gamma
    let mut normal = basis.u.clone();
    axpy(&mut normal, -1.0, &gamma);
    let (cv, sv) = ((t * eps.sqrt()).cosh(), (t * eps.sqrt()).sinh());
    let mut p = scaled(&gamma, cv);
    axpy(&mut p, sv, &normal);
    // flat factor: v0 = e_1, the hyperplane is its orthogonal complement
    let mut q = vec![0.0; m];
    q[0] = t * (1.0 - eps).sqrt();
    for (i, yi) in y.iter().enumerate() {
        q[i + 1] = *yi;
    }
    Ok(ProductPoint { h: p, v: q })
}

fn standard_null_basis(n: usize) -> NullBasis {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = vec![0.0; n + 1];
    u[0] = s;
    u[1] = s;
    NullBasis::from_u(&u).expect("standard lightlike vector")
}

/// The hyperbolic example whose level set contains the image of
/// param_psi with the same eps: a = sqrt(eps/(1-eps)).
pub fn psi_example(eps: f64, n: usize, m: usize) -> Result<ExampleHn> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Parameter(format!("eps = {eps} must lie in (0, 1)")));
    }
    let basis = standard_null_basis(n);
    let mut v0 = vec![0.0; m];
    v0[0] = 1.0;
    ExampleHn::new(n, m, basis.u, v0, vec![0.0; m], (eps / (1.0 - eps)).sqrt())
}

// ---- level-set sampling --------------------------------------------------

/// Point of the zero level of the circle example above a given y.
pub fn s1_level_point(ex: &ExampleS1, y: &[f64]) -> ProductPoint {
    let x = ex.kappa * dot(y, &ex.y0);
    ProductPoint { h: vec![x.cos(), x.sin()], v: y.to_vec() }
}

/// Point of the level F = f0 (f0 < 0) of the hyperbolic example with
/// chart coordinates w over the horosphere and vertical position y.
pub fn hn_level_point(ex: &ExampleHn, w: &[f64], y: &[f64], f0: f64) -> Result<ProductPoint> {
    if f0 >= 0.0 {
        return Err(Error::Parameter("levels of this example are negative".into()));
    }
    let basis = NullBasis::from_u(&ex.u)?;
    let weight = (ex.a * dot(&vsub(y, &ex.y0), &ex.v0)).exp();
    // need <x, u> = f0 / weight = -e^sigma
    let sigma = (-f0 / weight).ln();
    let gamma = basis.horosphere(w);
    // boost by sigma: e_minus-component scales by e^sigma, u-component
    // by e^{-sigma}
    let alpha = -ldot(&gamma, &basis.u);
    let beta = -ldot(&gamma, &basis.e_minus);
    let mut x = scaled(&basis.e_minus, alpha * sigma.exp());
    axpy(&mut x, beta * (-sigma).exp(), &basis.u);
    for ei in &basis.e {
        axpy(&mut x, ldot(&gamma, ei), ei);
    }
    Ok(ProductPoint { h: x, v: y.to_vec() })
}

// ---- metric-probing sectional curvature oracle ---------------------------

fn flat_inner(hdim: usize, a: &[f64], b: &[f64]) -> f64 {
    ldot(&a[..hdim], &b[..hdim]) + dot(&a[hdim..], &b[hdim..])
}

fn fd_grad_component(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

/// Intrinsic sectional curvature of the level set of the hyperbolic
/// example, computed with no reference to the Gauss equation: the level
/// set is charted by (w, y), the induced metric is differentiated
/// numerically, and the curvature tensor is assembled from Christoffel
/// symbols.
pub fn sectional_probe(
    ex: &ExampleHn,
    w: &[f64],
    y: &[f64],
    f0: f64,
    xdir: &TangentVec,
    ydir: &TangentVec,
) -> Result<f64> {
    let d = (ex.n - 1) + ex.m;
    let hdim = ex.n + 1;
    let step = 1e-2;
    let chart = |z: &[f64]| -> Vec<f64> {
        let p = hn_level_point(ex, &z[..ex.n - 1], &z[ex.n - 1..], f0)
            .expect("chart point");
        let mut flat = p.h;
        flat.extend(p.v);
        flat
    };
    let mut z0: Vec<f64> = Vec::with_capacity(d);
    z0.extend_from_slice(w);
    z0.extend_from_slice(y);

    let jacobian = |z: &[f64]| -> Vec<Vec<f64>> {
        (0..d)
            .map(|k| {
                let f = |t: f64| {
                    let mut zz = z.to_vec();
                    zz[k] += t;
                    chart(&zz)
                };
                let dim = hdim + ex.m;
                (0..dim)
                    .map(|c| fd_grad_component(|t| f(t)[c], step))
                    .collect()
            })
            .collect()
    };
    let metric = |z: &[f64]| -> Vec<Vec<f64>> {
        let j = jacobian(z);
        (0..d)
            .map(|i| (0..d).map(|k| flat_inner(hdim, &j[i], &j[k])).collect())
            .collect()
    };
    let metric_flat = |z: &[f64]| -> Vec<f64> {
        metric(z).into_iter().flatten().collect()
    };
    let dmetric = |z: &[f64], k: usize| -> Vec<f64> {
        let f = |t: f64| {
            let mut zz = z.to_vec();
            zz[k] += t;
            metric_flat(&zz)
        };
        (0..d * d)
            .map(|c| fd_grad_component(|t| f(t)[c], step))
            .collect()
    };
    let christoffel = |z: &[f64]| -> Result<Vec<f64>> {
        let g = metric(z);
        let ginv = crate::jacobi::invert_f64_pub(&g)
            .ok_or_else(|| Error::Numerical("induced metric is singular".into()))?;
        let dg: Vec<Vec<f64>> = (0..d).map(|k| dmetric(z, k)).collect();
        let at = |m: &Vec<f64>, i: usize, j: usize| m[i * d + j];
        let mut gamma = vec![0.0; d * d * d];
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = 0.0;
                    for l in 0..d {
                        acc += ginv[k][l]
                            * (at(&dg[i], j, l) + at(&dg[j], i, l) - at(&dg[l], i, j));
                    }
                    gamma[(k * d + i) * d + j] = 0.5 * acc;
                }
            }
        }
        Ok(gamma)
    };

    let gamma0 = christoffel(&z0)?;
    let dgamma: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let vals: Result<Vec<Vec<f64>>> = [-2.0, -1.0, 1.0, 2.0]
                .iter()
                .map(|&mult| {
                    let mut zz = z0.clone();
                    zz[k] += mult * step;
                    christoffel(&zz)
                })
                .collect();
            vals.map(|v| {
                (0..d * d * d)
                    .map(|c| (v[0][c] - 8.0 * v[1][c] + 8.0 * v[2][c] - v[3][c]) / (12.0 * step))
                    .collect()
            })
        })
        .collect::<Result<_>>()?;

    let g0 = metric(&z0);
    let j0 = jacobian(&z0);
    let ginv0 = crate::jacobi::invert_f64_pub(&g0)
        .ok_or_else(|| Error::Numerical("induced metric is singular".into()))?;
    // chart coordinates of the ambient directions
    let to_coords = |v: &TangentVec| -> Vec<f64> {
        let mut flat = v.h.clone();
        flat.extend(v.v.clone());
        let rhs: Vec<f64> = (0..d).map(|i| flat_inner(hdim, &j0[i], &flat)).collect();
        (0..d)
            .map(|i| (0..d).map(|k| ginv0[i][k] * rhs[k]).sum())
            .collect()
    };
    let xc = to_coords(xdir);
    let yc = to_coords(ydir);

    let gam = |k: usize, i: usize, j: usize| gamma0[(k * d + i) * d + j];
    let dgam = |l: usize, k: usize, i: usize, j: usize| dgamma[l][(k * d + i) * d + j];
    // R(d_i, d_j) d_k, lower index l
    let riem = |i: usize, j: usize, k: usize, l: usize| -> f64 {
        let mut up = vec![0.0; d];
        for (m_idx, u) in up.iter_mut().enumerate() {
            let mut acc = dgam(i, m_idx, j, k) - dgam(j, m_idx, i, k);
            for a in 0..d {
                acc += gam(m_idx, i, a) * gam(a, j, k) - gam(m_idx, j, a) * gam(a, i, k);
            }
            *u = acc;
        }
        (0..d).map(|m_idx| g0[l][m_idx] * up[m_idx]).sum()
    };
    // K(X, Y) = R(X, Y, Y, X) / (|X|^2 |Y|^2 - <X,Y>^2)
    let mut num = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    num += xc[i] * yc[j] * yc[k] * xc[l] * riem(i, j, k, l);
                }
            }
        }
    }
    let gx = |a: &[f64], b: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += a[i] * g0[i][j] * b[j];
            }
        }
        acc
    };
    let den = gx(&xc, &xc) * gx(&yc, &yc) - gx(&xc, &yc).powi(2);
    if den.abs() < 1e-12 {
        return Err(Error::Numerical("directions do not span a plane".into()));
    }
    Ok(num / den)
}

/// Sectional curvature of the tangent plane via the Gauss equation.
pub fn sectional_gauss(
    ex: &ExampleHn,
    p: &ProductPoint,
    x: &TangentVec,
    y: &TangentVec,
) -> Result<f64> {
    let example = Example::Hn(ex.clone());
    let model = example.model();
    let grad = example.grad_f(p);
    let norm = g_product(model, &grad, &grad).sqrt();
    if norm < 1e-12 {
        return Err(Error::Parameter("critical point".into()));
    }
    let ii = |a: &TangentVec, b: &TangentVec| -example.hessian(p, a, b) / norm;
    let den = g_product(model, x, x) * g_product(model, y, y)
        - g_product(model, x, y).powi(2);
    if den.abs() < 1e-12 {
        return Err(Error::Numerical("directions do not span a plane".into()));
    }
    let amb = {
        let c = -1.0;
        c * (h_dot(model, &x.h, &x.h) * h_dot(model, &y.h, &y.h)
            - h_dot(model, &x.h, &y.h).powi(2))
    };
    Ok((amb + ii(x, x) * ii(y, y) - ii(x, y).powi(2)) / den)
}

// ---- constructive isometries ---------------------------------------------

/// An ambient isometry of the product: a linear factor block and a rigid
/// affine map of the flat factor.
pub struct IsometryElement {
    pub h_mat: Vec<Vec<f64>>,
    pub v_mat: Vec<Vec<f64>>,
    pub v_shift: Vec<f64>,
}

impl IsometryElement {
    pub fn apply(&self, p: &ProductPoint) -> ProductPoint {
        let h = mat_vec(&self.h_mat, &p.h);
        let mut v = mat_vec(&self.v_mat, &p.v);
        axpy(&mut v, 1.0, &self.v_shift);
        ProductPoint { h, v }
    }

    /// Worst deviation of the blocks from the isometry conditions:
    /// factor block preserves the factor form, flat block is orthogonal.
    pub fn isometry_residual(&self, model: FactorModel) -> f64 {
        let d = self.h_mat.len();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let col_i: Vec<f64> = (0..d).map(|r| self.h_mat[r][i]).collect();
                let col_j: Vec<f64> = (0..d).map(|r| self.h_mat[r][j]).collect();
                let want = match model {
                    FactorModel::Sphere => {
                        if i == j { 1.0 } else { 0.0 }
                    }
                    FactorModel::Hyperbolic => {
                        if i != j {
                            0.0
                        } else if i == 0 {
                            -1.0
                        } else {
                            1.0
                        }
                    }
                };
                worst = worst.max((h_dot(model, &col_i, &col_j) - want).abs());
            }
        }
        let m = self.v_mat.len();
        for i in 0..m {
            for j in 0..m {
                let col_i: Vec<f64> = (0..m).map(|r| self.v_mat[r][i]).collect();
                let col_j: Vec<f64> = (0..m).map(|r| self.v_mat[r][j]).collect();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(&col_i, &col_j) - want).abs());
            }
        }
        worst
    }
}

fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, x)).collect()
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// An element of the level-preserving group carrying p to p'.
pub fn transitive_isometry(
    example: &Example,
    p: &ProductPoint,
    p2: &ProductPoint,
) -> Result<IsometryElement> {
    let el = match example {
        Example::S1(e) => {
            // rotate the circle by theta = kappa <y'-y, y0> and translate
            // the flat factor by y'-y; this preserves the phase exactly
            let theta = e.kappa * dot(&vsub(&p2.v, &p.v), &e.y0);
            let (c, s) = (theta.cos(), theta.sin());
            IsometryElement {
                h_mat: vec![vec![c, -s], vec![s, c]],
                v_mat: identity(e.m),
                v_shift: vsub(&p2.v, &p.v),
            }
        }
        Example::Hn(e) => {
            // horospherical translation plus boost in the null-pair basis
            // of u, tuned so that B u = e^{a delta} u with
            // delta = <y'-y, v0>; the flat factor translates by y'-y
            let basis = NullBasis::from_u(&e.u)?;
            let delta = dot(&vsub(&p2.v, &p.v), &e.v0);
            let s = -e.a * delta;
            let w = basis.coords(&p.h);
            let w2 = basis.coords(&p2.h);
            let sigma2 = -ldot(&p2.h, &e.u);
            if sigma2 <= 0.0 {
                return Err(Error::Construction("target point off the chart".into()));
            }
            let b: Vec<f64> = vsub(&w2, &w).iter().map(|x| x / sigma2).collect();
            let dim = e.n + 1;
            let mut h_mat = vec![vec![0.0; dim]; dim];
            for j in 0..dim {
                let mut col = vec![0.0; dim];
                col[j] = 1.0;
                // decompose: col = alpha e_minus + beta u + E
                let alpha = -ldot(&col, &e.u);
                let beta = -ldot(&col, &basis.e_minus);
                let ecoords: Vec<f64> = basis.e.iter().map(|ei| ldot(&col, ei)).collect();
                // boost
                let (alpha, beta) = (alpha * s.exp(), beta * (-s).exp());
                // horospherical translation by b
                let mut out = scaled(&basis.e_minus, alpha);
                axpy(&mut out, beta, &e.u);
                let mut bvec = vec![0.0; dim];
                for (bi, ei) in b.iter().zip(&basis.e) {
                    axpy(&mut bvec, *bi, ei);
                }
                axpy(&mut out, alpha, &bvec);
                let ucoef = alpha * dot(&b, &b) / 2.0 + dot(&ecoords, &b);
                for (ci, ei) in ecoords.iter().zip(&basis.e) {
                    axpy(&mut out, *ci, ei);
                }
                axpy(&mut out, ucoef, &e.u);
                for (r, val) in out.iter().enumerate() {
                    h_mat[r][j] = *val;
                }
            }
            IsometryElement {
                h_mat,
                v_mat: identity(e.m),
                v_shift: vsub(&p2.v, &p.v),
            }
        }
    };
    // verify: the element must carry p to p' and preserve the metric
    let image = el.apply(p);
    let mut res = el.isometry_residual(example.model());
    for (a, b) in image.h.iter().zip(&p2.h) {
        res = res.max((a - b).abs());
    }
    for (a, b) in image.v.iter().zip(&p2.v) {
        res = res.max((a - b).abs());
    }
    if res > 1e-9 {
        return Err(Error::Construction(format!(
            "constructed element misses the target: residual {res}"
        )));
    }
    Ok(el)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let n = dot(&v, &v).sqrt();
        scaled(&v, 1.0 / n)
    }

    fn s1_example(m: usize, kappa: f64) -> ExampleS1 {
        let mut y0 = vec![0.0; m];
        y0[0] = 0.6;
        y0[1] = 0.8;
        ExampleS1::new(m, kappa, y0).unwrap()
    }

    fn hn_example(n: usize, m: usize, a: f64) -> ExampleHn {
        let mut u = vec![0.0; n + 1];
        u[0] = 1.0;
        u[1] = 0.8;
        u[2] = 0.6;
        let mut v0 = vec![0.0; m];
        v0[0] = 1.0;
        ExampleHn::new(n, m, u, v0, vec![0.0; m], a).unwrap()
    }

    fn random_point_s1(ex: &ExampleS1, rng: &mut ChaCha8Rng) -> ProductPoint {
        let x: f64 = rng.gen_range(-3.0..3.0);
        let v: Vec<f64> = (0..ex.m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        ProductPoint { h: vec![x.cos(), x.sin()], v }
    }

    fn random_point_hn(ex: &ExampleHn, rng: &mut ChaCha8Rng) -> ProductPoint {
        let w: Vec<f64> = (0..ex.n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..ex.m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f0 = -rng.gen_range(0.5..2.0);
        hn_level_point(ex, &w, &y, f0).unwrap()
    }

    #[test]
    fn gradient_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let ex = Example::S1(s1_example(3, 1.5));
        for _ in 0..20 {
            let p = random_point_s1(match &ex { Example::S1(e) => e, _ => unreachable!() }, &mut rng);
            let f = ex.f(&p);
            let grad = ex.grad_f(&p);
            let n2 = g_product(ex.model(), &grad, &grad);
            // |grad F|^2 = (1 + kappa^2)(1 - F^2)
            let want = (1.0 + 1.5 * 1.5) * (1.0 - f * f);
            assert!((n2 - want).abs() < 1e-12, "{n2} vs {want}");
        }
        let ex = Example::Hn(hn_example(3, 2, 0.75));
        for _ in 0..20 {
            let p = random_point_hn(match &ex { Example::Hn(e) => e, _ => unreachable!() }, &mut rng);
            p.check_model(FactorModel::Hyperbolic).unwrap();
            let f = ex.f(&p);
            let grad = ex.grad_f(&p);
            let n2 = g_product(ex.model(), &grad, &grad);
            // |grad F|^2 = (1 + a^2) F^2
            let want = (1.0 + 0.75 * 0.75) * f * f;
            assert!((n2 - want).abs() < 1e-10 * want.abs().max(1.0), "{n2} vs {want}");
        }
    }

    #[test]
    fn laplacian_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s1 = s1_example(2, 1.5);
        for _ in 0..10 {
            let p = random_point_s1(&s1, &mut rng);
            let gl = grad_laplace(&Example::S1(s1.clone()), &p).unwrap();
            assert!((gl.lap_fd - gl.lap_closed).abs() < 1e-6, "{} vs {}", gl.lap_fd, gl.lap_closed);
        }
        let hn = hn_example(2, 2, 1.0);
        for _ in 0..10 {
            let p = random_point_hn(&hn, &mut rng);
            let gl = grad_laplace(&Example::Hn(hn.clone()), &p).unwrap();
            assert!(
                (gl.lap_fd - gl.lap_closed).abs() < 1e-6 * gl.lap_closed.abs().max(1.0),
                "{} vs {}",
                gl.lap_fd,
                gl.lap_closed
            );
        }
        // kappa = 0 and a = 0 reductions
        let p = random_point_s1(&s1_example(2, 0.0), &mut rng);
        let ex0 = Example::S1(s1_example(2, 0.0));
        assert!((ex0.laplace_closed(&p) + ex0.f(&p)).abs() < 1e-12);
        let hn0 = hn_example(3, 2, 0.0);
        let p = random_point_hn(&hn0, &mut rng);
        assert!(
            (Example::Hn(hn0.clone()).laplace_closed(&p) - 3.0 * Example::Hn(hn0).f(&p)).abs()
                < 1e-12
        );
    }

    #[test]
    fn angle_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kappa in [0.5, 1.0, 2.0] {
            let ex = s1_example(2, kappa);
            let want = (1.0 - kappa * kappa) / (1.0 + kappa * kappa);
            for _ in 0..5 {
                let p = random_point_s1(&ex, &mut rng);
                if Example::S1(ex.clone()).f(&p).abs() > 0.99 {
                    continue;
                }
                let lf = level_set_frame(&Example::S1(ex.clone()), &p).unwrap();
                assert!((lf.c - want).abs() < 1e-12, "kappa {kappa}: {} vs {want}", lf.c);
            }
        }
        for a in [0.5, 1.0, 2.0] {
            let ex = hn_example(2, 2, a);
            let want = (1.0 - a * a) / (1.0 + a * a);
            for _ in 0..5 {
                let p = random_point_hn(&ex, &mut rng);
                let lf = level_set_frame(&Example::Hn(ex.clone()), &p).unwrap();
                assert!((lf.c - want).abs() < 1e-12, "a {a}: {} vs {want}", lf.c);
            }
        }
    }

    #[test]
    fn hessian_restriction() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // circle family: the level sets are totally geodesic
        let ex = Example::S1(s1_example(3, 2.0));
        let e = match &ex { Example::S1(e) => e, _ => unreachable!() };
        for _ in 0..5 {
            let p = random_point_s1(e, &mut rng);
            let (frame, _, _) = adapted_sigma_frame(&ex, &p).unwrap();
            for x in &frame {
                for y in &frame {
                    assert!(ex.hessian(&p, x, y).abs() < 1e-10);
                }
            }
        }
        // hyperbolic family: diag(F I_{n-1}, 0, 0) in the adapted frame
        let ex = Example::Hn(hn_example(3, 2, 1.0));
        let e = match &ex { Example::Hn(e) => e, _ => unreachable!() };
        for _ in 0..5 {
            let p = random_point_hn(e, &mut rng);
            let f = ex.f(&p);
            let (frame, s1, s2) = adapted_sigma_frame(&ex, &p).unwrap();
            for (i, x) in frame.iter().enumerate() {
                for (j, y) in frame.iter().enumerate() {
                    let h = ex.hessian(&p, x, y);
                    let want = if i == j && i < s1 { f } else { 0.0 };
                    assert!(
                        (h - want).abs() < 1e-9 * f.abs().max(1.0),
                        "({i},{j}) [groups {s1},{s2}]: {h} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn factor_exp_basics() {
        // quarter great circle
        let p = ProductPoint { h: vec![1.0, 0.0], v: vec![0.0] };
        let w = TangentVec { h: vec![0.0, 1.0], v: vec![0.0] };
        let q = factor_exp(FactorModel::Sphere, &p, &w, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((q.h[0]).abs() < 1e-12 && (q.h[1] - 1.0).abs() < 1e-12);
        // hyperboloid constraint preserved
        let p = ProductPoint { h: vec![1.25, 0.75, 0.0], v: vec![0.0] };
        let w = TangentVec { h: unit(vec![0.6, 1.0, 0.0]), v: vec![1.0] };
        // make w Lorentz-tangent: w - <w,p>/<p,p> p
        let c = ldot(&w.h, &p.h);
        let mut wh = w.h.clone();
        axpy(&mut wh, c, &p.h);
        let w = TangentVec { h: wh, v: w.v };
        let q = factor_exp(FactorModel::Hyperbolic, &p, &w, 0.8).unwrap();
        assert!((ldot(&q.h, &q.h) + 1.0).abs() < 1e-12);
        assert!((q.v[0] - 0.8).abs() < 1e-12);
        // t = 0 identity and non-tangent rejection
        let q0 = factor_exp(FactorModel::Hyperbolic, &p, &w, 0.0).unwrap();
        assert!(vsub(&q0.h, &p.h).iter().all(|x| x.abs() < 1e-12));
        let bad = TangentVec { h: vec![1.0, 0.0, 0.0], v: vec![0.0] };
        assert!(factor_exp(FactorModel::Hyperbolic, &p, &bad, 0.1).is_err());
    }

    #[test]
    fn curvature_tables_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (n, a) in [(2usize, 1.0f64), (3, 0.5), (3, 1.0), (4, 2.0)] {
            let ex = hn_example(n, 2, a);
            let p = random_point_hn(&ex, &mut rng);
            let ct = curvature_tables(&ex, &p).unwrap();
            let lam = 1.0 / (1.0 + a * a).sqrt();
            // mean curvature (n-1)/sqrt(1+a^2)
            assert!((ct.mean - (n as f64 - 1.0) * lam).abs() < 1e-8, "H = {}", ct.mean);
            // principal curvatures: lam with multiplicity n-1, 0 with m
            let mut nonzero = 0;
            for ev in &ct.principal {
                if ev.abs() > 1e-8 {
                    nonzero += 1;
                    assert!((ev - lam).abs() < 1e-8, "ev = {ev}");
                }
            }
            assert_eq!(nonzero, n - 1);
            let ka = -a * a / (1.0 + a * a);
            // sectional table: V1 x V3 always, V1 x V1 when n >= 3
            assert!((ct.sectional[0][2] - ka).abs() < 1e-8);
            if n >= 3 {
                assert!((ct.sectional[0][0] - ka).abs() < 1e-8);
            }
            assert!(ct.sectional[0][1].abs() < 1e-8);
            assert!(ct.sectional[1][2].abs() < 1e-8);
            // scalar curvature -n(n-1)a^2/(1+a^2)
            let scal = -(n as f64) * (n as f64 - 1.0) * a * a / (1.0 + a * a);
            assert!((ct.scalar - scal).abs() < 1e-8, "{} vs {scal}", ct.scalar);
        }
        // a = 0: flat tables
        let ex = hn_example(3, 2, 0.0);
        let p = random_point_hn(&ex, &mut rng);
        let ct = curvature_tables(&ex, &p).unwrap();
        assert!(ct.scalar.abs() < 1e-8);
        for row in &ct.sectional {
            for v in row {
                assert!(v.is_nan() || v.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gauss_vs_metric_probe() {
        let ex = hn_example(3, 2, 1.0);
        let w = [0.3, -0.2];
        let y = [0.1, 0.4];
        let f0 = -1.0;
        let p = hn_level_point(&ex, &w, &y, f0).unwrap();
        let (frame, s1, _) = adapted_sigma_frame(&Example::Hn(ex.clone()), &p).unwrap();
        // probe a horizontal-horizontal plane and a mixed plane
        let pairs = [(0usize, 1usize), (0, frame.len() - 1), (s1, s1 + 1)];
        for (i, j) in pairs {
            let kg = sectional_gauss(&ex, &p, &frame[i], &frame[j]).unwrap();
            let kp = sectional_probe(&ex, &w, &y, f0, &frame[i], &frame[j]).unwrap();
            assert!((kg - kp).abs() < 1e-6, "plane ({i},{j}): {kg} vs {kp}");
        }
    }

    #[test]
    fn principal_frame_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ex = Example::S1(s1_example(3, 2.0));
        let e = match &ex { Example::S1(e) => e, _ => unreachable!() };
        for _ in 0..5 {
            let p = random_point_s1(e, &mut rng);
            let (ok, res) = check_principal_frame(&ex, &p).unwrap();
            assert!(ok, "residual {res}");
        }
        let ex = Example::Hn(hn_example(3, 2, 1.0));
        let e = match &ex { Example::Hn(e) => e, _ => unreachable!() };
        for _ in 0..5 {
            let p = random_point_hn(e, &mut rng);
            let (ok, res) = check_principal_frame(&ex, &p).unwrap();
            assert!(ok, "residual {res}");
        }
    }

    #[test]
    fn phi_parametrization() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x0 = vec![0.9, -1.2, 0.4];
        let kappa = dot(&x0, &x0).sqrt();
        let y0 = unit(x0.clone());
        let ex = Example::S1(ExampleS1::new(3, kappa, y0).unwrap());
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let p = param_phi(&x, &x0).unwrap();
            assert!((dot(&p.h, &p.h) - 1.0).abs() < 1e-12);
            assert!(ex.f(&p).abs() < 1e-12);
        }
        assert!(param_phi(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn psi_parametrization() {
        let (n, m, eps) = (3usize, 2usize, 0.4f64);
        let ex = Example::Hn(psi_example(eps, n, m).unwrap());
        let mut values = Vec::new();
        for it in -2..=2 {
            for ix in -2..=2 {
                for iy in -2..=2 {
                    let t = it as f64 * 0.5;
                    let x = [ix as f64 * 0.4, 0.3];
                    let y = [iy as f64 * 0.6];
                    let p = param_psi(t, &x, &y, eps, n, m).unwrap();
                    assert!((ldot(&p.h, &p.h) + 1.0).abs() < 1e-12);
                    values.push(ex.f(&p));
                }
            }
        }
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-9, "level spread {spread}");
        // t = 0 reduces to the product of the two leaves
        let p = param_psi(0.0, &[0.2, -0.1], &[0.5], eps, n, m).unwrap();
        let basis = standard_null_basis(n);
        let gamma = basis.horosphere(&[0.2, -0.1]);
        assert!(vsub(&p.h, &gamma).iter().all(|x| x.abs() < 1e-12));
        assert!((p.v[0]).abs() < 1e-12 && (p.v[1] - 0.5).abs() < 1e-12);
        assert!(param_psi(0.0, &[0.0; 2], &[0.0], 1.5, n, m).is_err());
    }

    #[test]
    fn isometries_move_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        // circle family on the zero level
        let ex = s1_example(3, 1.0);
        let exw = Example::S1(ex.clone());
        for _ in 0..10 {
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y2: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p = s1_level_point(&ex, &y);
            let p2 = s1_level_point(&ex, &y2);
            let el = transitive_isometry(&exw, &p, &p2).unwrap();
            assert!(el.isometry_residual(FactorModel::Sphere) < 1e-12);
            // F-invariance at probe points
            for _ in 0..20 {
                let q = random_point_s1(&ex, &mut rng);
                let qi = el.apply(&q);
                assert!((exw.f(&qi) - exw.f(&q)).abs() < 1e-10);
            }
        }
        // hyperbolic family
        let ex = hn_example(2, 2, 1.0);
        let exw = Example::Hn(ex.clone());
        for _ in 0..10 {
            let p = {
                let w: Vec<f64> = (0..1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
                hn_level_point(&ex, &w, &y, -1.5).unwrap()
            };
            let p2 = {
                let w: Vec<f64> = (0..1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
                hn_level_point(&ex, &w, &y, -1.5).unwrap()
            };
            let el = transitive_isometry(&exw, &p, &p2).unwrap();
            assert!(el.isometry_residual(FactorModel::Hyperbolic) < 1e-9);
            // the Lorentz block rescales u by e^{a delta}
            let delta = dot(&vsub(&p2.v, &p.v), &ex.v0);
            let bu = mat_vec(&el.h_mat, &ex.u);
            let want = scaled(&ex.u, (ex.a * delta).exp());
            for (x, y) in bu.iter().zip(&want) {
                assert!((x - y).abs() < 1e-9, "{bu:?} vs {want:?}");
            }
            for _ in 0..10 {
                let q = random_point_hn(&ex, &mut rng);
                let qi = el.apply(&q);
                assert!(
                    (exw.f(&qi) - exw.f(&q)).abs() < 1e-9 * exw.f(&q).abs().max(1.0)
                );
            }
            // identity element for p = p'
            let id = transitive_isometry(&exw, &p, &p).unwrap();
            let q = id.apply(&p);
            assert!(vsub(&q.h, &p.h).iter().all(|x| x.abs() < 1e-10));
        }
    }
}
