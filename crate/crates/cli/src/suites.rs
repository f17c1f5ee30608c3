//! The executable check suites: each suite expands the configured
//! parameter grid into independent tasks, every task producing one
//! report record.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use isoprod::coeff::{
    det_structure_m_iota, det_structure_ms, row_matches_qpower, sigma_interpolate,
    vandermonde_xi, verify_column_span, verify_independence_even, verify_independence_odd,
    verify_rank_m, verify_rank_ms, XiMode,
};
use isoprod::geometry::{
    check_principal_frame, curvature_tables, g_product, grad_laplace, hn_level_point, ldot,
    level_set_frame, param_phi, param_psi, psi_example, s1_level_point, transitive_isometry,
    Example, ExampleHn, ExampleS1, ProductPoint,
};
use isoprod::jacobi::{
    alpha_table, check_bridge_identity, check_dprime_identity, parallel_principal_branch,
    parallel_shape, system_residual, Branch, ShapeMatrix,
};
use isoprod::kac::{charpoly_kac, e1_eigen_coordinates, kac_rank, SpaceFormParams};
use isoprod::poly::{rint, Rat};
use isoprod::Error;

use crate::config::SuiteConfig;
use crate::report::CheckRecord;

type TaskFn = Box<dyn Fn() -> Result<(String, f64), Error> + Send + Sync>;

struct Task {
    suite: &'static str,
    params: String,
    check_id: String,
    run: TaskFn,
}

fn pass(witness: impl Into<String>) -> Result<(String, f64), Error> {
    Ok((witness.into(), 0.0))
}

fn task_seed(base: u64, params: &str, check: &str) -> u64 {
    // deterministic per-task seed: cheap FNV-style fold of the labels
    let mut h = base ^ 0xcbf2_9ce4_8422_2325;
    for b in params.bytes().chain(check.bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

pub fn run_suites(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let mut tasks: Vec<Task> = Vec::new();
    let all = cfg.suite == "all";
    if all || cfg.suite == "recurrence" {
        recurrence_tasks(cfg, &mut tasks);
    }
    if all || cfg.suite == "kac" {
        kac_tasks(cfg, &mut tasks);
    }
    if all || cfg.suite == "system" {
        system_tasks(cfg, &mut tasks);
    }
    if all || cfg.suite == "jacobi" {
        jacobi_tasks(cfg, &mut tasks);
    }
    if all || cfg.suite == "geometry" {
        geometry_tasks(cfg, &mut tasks);
    }
    let mut records: Vec<CheckRecord> = tasks
        .par_iter()
        .map(|t| {
            let (status, witness, residual) = match (t.run)() {
                Ok((w, r)) => ("pass", w, r),
                Err(Error::Verification(msg)) => ("fail", msg, f64::NAN),
                Err(e) => ("error", e.to_string(), f64::NAN),
            };
            CheckRecord {
                suite: t.suite.to_string(),
                params: t.params.clone(),
                check_id: t.check_id.clone(),
                status: status.to_string(),
                witness,
                max_residual: residual,
            }
        })
        .collect();
    records.sort_by(|a, b| {
        (&a.suite, &a.params, &a.check_id).cmp(&(&b.suite, &b.params, &b.check_id))
    });
    records
}

fn grid_params(cfg: &SuiteConfig) -> Vec<SpaceFormParams> {
    let mut out = Vec::new();
    for &n in &cfg.n {
        for &m in &cfg.m {
            for &c in &cfg.c {
                for tau in &cfg.tau {
                    if let Ok(p) = SpaceFormParams::new(n, m, c, tau.clone()) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn param_label(p: &SpaceFormParams) -> String {
    format!("n={} m={} c={} tau={}", p.n, p.m, p.c, p.tau)
}

// ---- recurrence ----------------------------------------------------------

fn recurrence_tasks(cfg: &SuiteConfig, tasks: &mut Vec<Task>) {
    for &n in &cfg.n {
        for &m in &cfg.m {
            let kmax = cfg.kmax_for(n, m);
            let label = format!("n={n} m={m}");
            tasks.push(Task {
                suite: "recurrence",
                params: label.clone(),
                check_id: "table-shape".into(),
                run: Box::new(move || {
                    let t = isoprod::coeff::PTable::build(n, m, kmax)?;
                    t.check_shape()?;
                    pass(format!("all entries monomial through k = {kmax}"))
                }),
            });
            tasks.push(Task {
                suite: "recurrence",
                params: label,
                check_id: "row-matches-qpower".into(),
                run: Box::new(move || {
                    let t = isoprod::coeff::PTable::build(n, m, kmax)?;
                    for k in 0..=kmax {
                        if !row_matches_qpower(&t, k)? {
                            return Err(Error::Verification(format!("row {k} disagrees")));
                        }
                    }
                    pass(format!("rows equal matrix powers for k <= {kmax}"))
                }),
            });
        }
    }
    // interpolated coefficient polynomials are grid-independent
    tasks.push(Task {
        suite: "recurrence",
        params: "k<=8 s<=3".into(),
        check_id: "sigma-interpolation".into(),
        run: Box::new(|| {
            let mut count = 0usize;
            for k in 2..=8usize {
                for q in 0..=3usize.min(k) {
                    for l in 0..=(k - q) {
                        let diff = k - q - l;
                        if diff % 2 != 0 || diff / 2 > 3 {
                            continue;
                        }
                        sigma_interpolate(l, q, k, -1)?;
                        count += 1;
                    }
                }
            }
            pass(format!("{count} coefficient polynomials verified"))
        }),
    });
}

// ---- kac -----------------------------------------------------------------

fn kac_tasks(cfg: &SuiteConfig, tasks: &mut Vec<Task>) {
    for p in grid_params(cfg) {
        let label = param_label(&p);
        let p1 = p.clone();
        tasks.push(Task {
            suite: "kac",
            params: label.clone(),
            check_id: "charpoly-factored".into(),
            run: Box::new(move || {
                let cp = charpoly_kac(&p1)?;
                pass(format!("det(lam I - K) = {cp}"))
            }),
        });
        let p2 = p.clone();
        tasks.push(Task {
            suite: "kac",
            params: label.clone(),
            check_id: "rank-parity".into(),
            run: Box::new(move || {
                let r = kac_rank(&p2)?;
                pass(format!("rank {r}"))
            }),
        });
        tasks.push(Task {
            suite: "kac",
            params: label,
            check_id: "e1-coordinates".into(),
            run: Box::new(move || {
                let coords = e1_eigen_coordinates(&p)?;
                pass(format!("{} nonzero eigenbasis coordinates", coords.len()))
            }),
        });
    }
}

// ---- system --------------------------------------------------------------

fn system_tasks(cfg: &SuiteConfig, tasks: &mut Vec<Task>) {
    for p in grid_params(cfg) {
        let label = param_label(&p);
        let size = p.block_size();
        if p.n % 2 == 0 {
            let p1 = p.clone();
            tasks.push(Task {
                suite: "system",
                params: label.clone(),
                check_id: "rank-M".into(),
                run: Box::new(move || {
                    let r = verify_rank_m(&p1)?;
                    pass(format!("rank M = {r}"))
                }),
            });
            let p2 = p.clone();
            tasks.push(Task {
                suite: "system",
                params: label.clone(),
                check_id: "independence-window".into(),
                run: Box::new(move || {
                    if !verify_independence_even(&p2, 2)? {
                        return Err(Error::Verification("window rows are dependent".into()));
                    }
                    pass("window rows independent at s = 2")
                }),
            });
            let p3 = p.clone();
            tasks.push(Task {
                suite: "system",
                params: label.clone(),
                check_id: "det-structure".into(),
                run: Box::new(move || {
                    let rep = det_structure_m_iota(&p3)?;
                    pass(format!(
                        "column {} with tau-exponent chain from {}",
                        rep.iota, rep.gamma0
                    ))
                }),
            });
            tasks.push(Task {
                suite: "system",
                params: label,
                check_id: "vandermonde".into(),
                run: Box::new(move || {
                    let rep = vandermonde_xi(&p, XiMode::EvenFull)?;
                    pass(format!("det Xi = {}", rep.det))
                }),
            });
        } else {
            for s in [size, size + 3] {
                let ps = p.clone();
                tasks.push(Task {
                    suite: "system",
                    params: label.clone(),
                    check_id: format!("rank-Ms-s{s}"),
                    run: Box::new(move || {
                        let r = verify_rank_ms(&ps, s)?;
                        pass(format!("rank M^s = {r} at s = {s}"))
                    }),
                });
            }
            let p1 = p.clone();
            tasks.push(Task {
                suite: "system",
                params: label.clone(),
                check_id: "independence-rows".into(),
                run: Box::new(move || {
                    if !verify_independence_odd(&p1, p1.block_size() + 3)? {
                        return Err(Error::Verification("row family loses rank".into()));
                    }
                    pass("row family keeps rank with the extra row")
                }),
            });
            for q in 0..=1usize.min(p.m) {
                let pq = p.clone();
                tasks.push(Task {
                    suite: "system",
                    params: label.clone(),
                    check_id: format!("column-span-q{q}"),
                    run: Box::new(move || {
                        if !verify_column_span(&pq, q)? {
                            return Err(Error::Verification(format!(
                                "column {} escapes the even-step span",
                                q * pq.n + 1
                            )));
                        }
                        pass(format!("column {} lies in the even-step span", q * pq.n + 1))
                    }),
                });
            }
            let p2 = p.clone();
            tasks.push(Task {
                suite: "system",
                params: label.clone(),
                check_id: "det-structure".into(),
                run: Box::new(move || {
                    let rep = det_structure_ms(&p2, p2.block_size())?;
                    let last = rep.chain.last().expect("nonempty chain");
                    pass(format!(
                        "tau part vanishes, extra-row cofactor {} at exponent {}",
                        last.beta, last.gamma
                    ))
                }),
            });
            tasks.push(Task {
                suite: "system",
                params: label,
                check_id: "vandermonde-reduced".into(),
                run: Box::new(move || {
                    let rep = vandermonde_xi(&p, XiMode::OddReduced)?;
                    pass(format!("nonsingular, sign {:+}", rep.sign))
                }),
            });
        }
    }
}

// ---- jacobi --------------------------------------------------------------

fn random_shape(rng: &mut ChaCha8Rng, dim: usize) -> ShapeMatrix {
    let mut a = vec![vec![Rat::from_integer(0.into()); dim]; dim];
    for i in 0..dim {
        for j in 0..=i {
            let v = rint(rng.gen_range(-3..=3));
            a[i][j] = v.clone();
            a[j][i] = v;
        }
    }
    ShapeMatrix::new(a).expect("symmetric by construction")
}

fn jacobi_tasks(cfg: &SuiteConfig, tasks: &mut Vec<Task>) {
    for p in grid_params(cfg) {
        let label = param_label(&p);
        let trials = cfg.trials;
        let dim = p.n + p.m - 1;
        for (check, f) in [
            (
                "alpha-recurrence",
                (|a: &ShapeMatrix, p: &SpaceFormParams| {
                    // every derivative step cross-checks the recurrence
                    alpha_table(a, p, p.block_size() + 1).map(|_| ())
                }) as fn(&ShapeMatrix, &SpaceFormParams) -> Result<(), Error>,
            ),
            ("linear-system", |a, p| system_residual(a, p).map(|_| ())),
            ("bridge-identity", |a, p| check_bridge_identity(a, p)),
            ("dprime-identity", |a, p| check_dprime_identity(a, p)),
        ] {
            let pp = p.clone();
            let seed = task_seed(cfg.seed, &label, check);
            tasks.push(Task {
                suite: "jacobi",
                params: label.clone(),
                check_id: check.into(),
                run: Box::new(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    for _ in 0..trials {
                        let a = random_shape(&mut rng, dim);
                        f(&a, &pp)?;
                    }
                    pass(format!("{trials} random shape matrices"))
                }),
            });
        }
        let seed = task_seed(cfg.seed, &label, "parallel-shape");
        tasks.push(Task {
            suite: "jacobi",
            params: label.clone(),
            check_id: "parallel-shape".into(),
            run: Box::new(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let worst: f64 = 0.0;
                for _ in 0..trials.min(5) {
                    let a = random_shape(&mut rng, dim);
                    let r = Rat::new(rng.gen_range(-10i64..=10).into(), 64.into());
                    match parallel_shape(&a, &p, &r) {
                        Ok(_) => {} // trace vs -D'/D checked inside
                        Err(Error::Focal(_)) => {} // legitimate focal point
                        Err(e) => return Err(e),
                    }
                }
                Ok(("trace matches -D'/D at sampled radii".into(), worst))
            }),
        });
    }
}

// ---- geometry ------------------------------------------------------------

fn random_point_s1(ex: &ExampleS1, rng: &mut ChaCha8Rng) -> ProductPoint {
    let x: f64 = rng.gen_range(-3.0..3.0);
    let v: Vec<f64> = (0..ex.m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    ProductPoint { h: vec![x.cos(), x.sin()], v }
}

// moderate boosts: wild points push the FD noise floor above 1e-6
fn random_point_hn(ex: &ExampleHn, rng: &mut ChaCha8Rng) -> ProductPoint {
    let w: Vec<f64> = (0..ex.n - 1).map(|_| rng.gen_range(-0.7..0.7)).collect();
    let y: Vec<f64> = (0..ex.m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let f0 = -rng.gen_range(0.8..1.5);
    hn_level_point(ex, &w, &y, f0).expect("level point")
}

fn s1_instance(m: usize, kappa: f64) -> ExampleS1 {
    let mut y0 = vec![0.0; m];
    if m >= 2 {
        y0[0] = 0.6;
        y0[1] = 0.8;
    } else {
        y0[0] = 1.0;
    }
    ExampleS1::new(m, kappa, y0).expect("unit y0")
}

fn hn_instance(n: usize, m: usize, a: f64) -> ExampleHn {
    let mut u = vec![0.0; n + 1];
    u[0] = 1.0;
    u[1] = 0.8;
    u[2] = 0.6;
    let mut v0 = vec![0.0; m];
    v0[0] = 1.0;
    ExampleHn::new(n, m, u, v0, vec![0.0; m], a).expect("example data")
}

fn geometry_tasks(cfg: &SuiteConfig, tasks: &mut Vec<Task>) {
    let m = *cfg.m.iter().max().unwrap_or(&2).max(&2);
    if cfg.family == "s1" || cfg.family == "both" {
        for &kappa in &cfg.kappa {
            s1_family_tasks(cfg, m, kappa, tasks);
        }
    }
    if cfg.family == "hn" || cfg.family == "both" {
        for &n in &cfg.n {
            for &a in &cfg.a {
                hn_family_tasks(cfg, n, m, a, tasks);
            }
        }
    }
}

fn s1_family_tasks(cfg: &SuiteConfig, m: usize, kappa: f64, tasks: &mut Vec<Task>) {
    let label = format!("family=s1 m={m} kappa={kappa}");
    let trials = cfg.trials;
    {
        let label2 = label.clone();
        let seed = task_seed(cfg.seed, &label, "invariants");
        tasks.push(Task {
            suite: "geometry",
            params: label.clone(),
            check_id: "isoparametric-invariants".into(),
            run: Box::new(move || {
                let ex = s1_instance(m, kappa);
                let exw = Example::S1(ex.clone());
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst: f64 = 0.0;
                let mut angles: Vec<f64> = Vec::new();
                for _ in 0..trials {
                    let p = random_point_s1(&ex, &mut rng);
                    let f = exw.f(&p);
                    let gl = grad_laplace(&exw, &p)?;
                    let n2 = g_product(exw.model(), &gl.grad, &gl.grad);
                    let gradres = (n2 - (1.0 + kappa * kappa) * (1.0 - f * f)).abs();
                    let lapres = (gl.lap_fd - gl.lap_closed).abs();
                    worst = worst.max(gradres).max(lapres);
                    if f.abs() < 0.99 {
                        angles.push(level_set_frame(&exw, &p)?.c);
                    }
                }
                let want_c = (1.0 - kappa * kappa) / (1.0 + kappa * kappa);
                for c in &angles {
                    worst = worst.max((c - want_c).abs());
                }
                if worst > 1e-6 {
                    return Err(Error::Verification(format!(
                        "worst invariant residual {worst} in {label2}"
                    )));
                }
                Ok((format!("{trials} probe points"), worst))
            }),
        });
    }
    {
        let seed = task_seed(cfg.seed, &label, "frame");
        tasks.push(Task {
            suite: "geometry",
            params: label.clone(),
            check_id: "principal-frame".into(),
            run: Box::new(move || {
                let ex = s1_instance(m, kappa);
                let exw = Example::S1(ex.clone());
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst: f64 = 0.0;
                for _ in 0..trials.min(10) {
                    let p = random_point_s1(&ex, &mut rng);
                    if exw.f(&p).abs() > 0.99 {
                        continue;
                    }
                    let (ok, res) = check_principal_frame(&exw, &p)?;
                    worst = worst.max(res);
                    if !ok {
                        return Err(Error::Verification(format!("AV residual {res}")));
                    }
                }
                Ok(("AV = 0 and block structure".into(), worst))
            }),
        });
    }
    {
        let seed = task_seed(cfg.seed, &label, "isometry");
        tasks.push(Task {
            suite: "geometry",
            params: label.clone(),
            check_id: "transitive-isometry".into(),
            run: Box::new(move || {
                if kappa.abs() < 1e-12 {
                    return pass("skipped: the zero level is a plain product at kappa = 0");
                }
                let ex = s1_instance(m, kappa);
                let exw = Example::S1(ex.clone());
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst: f64 = 0.0;
                for _ in 0..20 {
                    let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    let y2: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    let p = s1_level_point(&ex, &y);
                    let p2 = s1_level_point(&ex, &y2);
                    let el = transitive_isometry(&exw, &p, &p2)?;
                    worst = worst.max(el.isometry_residual(exw.model()));
                    for _ in 0..5 {
                        let q = random_point_s1(&ex, &mut rng);
                        worst = worst.max((exw.f(&el.apply(&q)) - exw.f(&q)).abs());
                    }
                }
                if worst > 1e-10 {
                    return Err(Error::Verification(format!("isometry residual {worst}")));
                }
                Ok(("20 point pairs".into(), worst))
            }),
        });
    }
    {
        let seed = task_seed(cfg.seed, &label, "phi");
        tasks.push(Task {
            suite: "geometry",
            params: label,
            check_id: "phi-membership".into(),
            run: Box::new(move || {
                if kappa.abs() < 1e-12 {
                    return pass("skipped: x0 = 0 is excluded");
                }
                let ex = s1_instance(m, kappa);
                let x0: Vec<f64> = ex.y0.iter().map(|v| v * kappa).collect();
                let exw = Example::S1(ex);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst: f64 = 0.0;
                for _ in 0..50 {
                    let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
                    let p = param_phi(&x, &x0)?;
                    worst = worst.max(exw.f(&p).abs());
                }
                if worst > 1e-12 {
                    return Err(Error::Verification(format!("level residual {worst}")));
                }
                Ok(("50 chart points on the zero level".into(), worst))
            }),
        });
    }
}

fn hn_family_tasks(cfg: &SuiteConfig, n: usize, m: usize, a: f64, tasks: &mut Vec<Task>) {
    let label = format!("family=hn n={n} m={m} a={a}");
    let trials = cfg.trials;
    {
        let seed = task_seed(cfg.seed, &label, "invariants");
        tasks.push(Task {
            suite: "geometry",
            params: label.clone(),
            check_id: "isoparametric-invariants".into(),
            run: Box::new(move || {
                let ex = hn_instance(n, m, a);
                let exw = Example::Hn(ex.clone());
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst: f64 = 0.0;
                for _ in 0..trials {
                    let p = random_point_hn(&ex, &mut rng);
                    let f = exw.f(&p);
                    let gl = grad_laplace(&exw, &p)?;
                    let n2 = g_product(exw.model(), &gl.grad, &gl.grad);
                    let scale = (1.0 + a * a) * f * f;
                    worst = worst.max((n2 - scale).abs() / scale.max(1.0));
                    worst = worst
                        .max((gl.lap_fd - gl.lap_closed).abs() / gl.lap_closed.abs().max(1.0));
                    let c = level_set_frame(&exw, &p)?.c;
                    worst = worst.max((c - (1.0 - a * a) / (1.0 + a * a)).abs());
                }
                if worst > 1e-6 {
                    return Err(Error::Verification(format!("worst residual {worst}")));
                }
                Ok((format!("{trials} probe points"), worst))
            }),
        });
    }
    {
        let seed = task_seed(cfg.seed, &label, "curvature");
        tasks.push(Task {
            suite: "geometry",
            params: label.clone(),
            check_id: "curvature-tables".into(),
            run: Box::new(move || {
                let ex = hn_instance(n, m, a);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let p = random_point_hn(&ex, &mut rng);
                let ct = curvature_tables(&ex, &p)?;
                let lam = 1.0 / (1.0 + a * a).sqrt();
                let mut worst = (ct.mean - (n as f64 - 1.0) * lam).abs();
                let scal = -(n as f64) * (n as f64 - 1.0) * a * a / (1.0 + a * a);
                worst = worst.max((ct.scalar - scal).abs());
                let ka = -a * a / (1.0 + a * a);
                worst = worst.max((ct.sectional[0][2] - ka).abs());
                if n >= 3 {
                    worst = worst.max((ct.sectional[0][0] - ka).abs());
                }
                if worst > 1e-8 {
                    return Err(Error::Verification(format!(
                        "curvature table residual {worst}"
                    )));
                }
                Ok(("mean, principal, sectional, scalar".into(), worst))
            }),
        });
    }
    {
        let seed = task_seed(cfg.seed, &label, "frame");
        tasks.push(Task {
            suite: "geometry",
            params: label.clone(),
            check_id: "principal-frame".into(),
            run: Box::new(move || {
                if a.abs() < 1e-12 {
                    return pass("skipped: |C| = 1 at a = 0");
                }
                let ex = hn_instance(n, m, a);
                let exw = Example::Hn(ex.clone());
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst: f64 = 0.0;
                for _ in 0..trials.min(10) {
                    let p = random_point_hn(&ex, &mut rng);
                    let (ok, res) = check_principal_frame(&exw, &p)?;
                    worst = worst.max(res);
                    if !ok {
                        return Err(Error::Verification(format!("AV residual {res}")));
                    }
                }
                Ok(("AV = 0 and block structure".into(), worst))
            }),
        });
    }
    {
        let seed = task_seed(cfg.seed, &label, "isometry");
        tasks.push(Task {
            suite: "geometry",
            params: label.clone(),
            check_id: "transitive-isometry".into(),
            run: Box::new(move || {
                let ex = hn_instance(n, m, a);
                let exw = Example::Hn(ex.clone());
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst: f64 = 0.0;
                for _ in 0..20 {
                    let sample = |rng: &mut ChaCha8Rng| {
                        let w: Vec<f64> =
                            (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        hn_level_point(&ex, &w, &y, -1.5).expect("level point")
                    };
                    let p = sample(&mut rng);
                    let p2 = sample(&mut rng);
                    let el = transitive_isometry(&exw, &p, &p2)?;
                    worst = worst.max(el.isometry_residual(exw.model()));
                    for _ in 0..5 {
                        let q = random_point_hn(&ex, &mut rng);
                        let rel = (exw.f(&el.apply(&q)) - exw.f(&q)).abs()
                            / exw.f(&q).abs().max(1.0);
                        worst = worst.max(rel);
                    }
                }
                if worst > 1e-10 {
                    return Err(Error::Verification(format!("isometry residual {worst}")));
                }
                Ok(("20 point pairs".into(), worst))
            }),
        });
    }
    {
        tasks.push(Task {
            suite: "geometry",
            params: label.clone(),
            check_id: "psi-membership".into(),
            run: Box::new(move || {
                if a.abs() < 1e-12 {
                    return pass("skipped: eps = 0 is excluded");
                }
                let eps = a * a / (1.0 + a * a);
                let ex = Example::Hn(psi_example(eps, n, m.max(2))?);
                let mut values = Vec::new();
                for it in -2..=2 {
                    for ix in -2..=2 {
                        for iy in -2..=2 {
                            let t = it as f64 * 0.5;
                            let x: Vec<f64> = (0..n - 1)
                                .map(|k| ix as f64 * 0.3 + 0.1 * k as f64)
                                .collect();
                            let y: Vec<f64> =
                                (0..m.max(2) - 1).map(|k| iy as f64 * 0.4 + 0.2 * k as f64).collect();
                            let p = param_psi(t, &x, &y, eps, n, m.max(2))?;
                            if (ldot(&p.h, &p.h) + 1.0).abs() > 1e-12 {
                                return Err(Error::Verification(
                                    "chart leaves the hyperboloid".into(),
                                ));
                            }
                            values.push(ex.f(&p));
                        }
                    }
                }
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
                if max - min > 1e-9 {
                    return Err(Error::Verification(format!("level spread {}", max - min)));
                }
                Ok(("5x5x5 chart grid in one level set".into(), max - min))
            }),
        });
    }
    {
        tasks.push(Task {
            suite: "geometry",
            params: label,
            check_id: "parallel-constancy".into(),
            run: Box::new(move || {
                // the n-1 nonzero principal curvatures evolve on the
                // hyperbolic branch, the flat ones stay zero, so the mean
                // curvature of every parallel hypersurface is (n-1) C1
                let c1 = 1.0 / (1.0 + a * a).sqrt();
                let branch = Branch { c: -1, big_c: c1 };
                let mut values = Vec::new();
                for t in [-1.0, 0.0, 1.0] {
                    let lam = parallel_principal_branch(c1, branch, t)?;
                    values.push((n as f64 - 1.0) * lam);
                }
                let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                    - values.iter().cloned().fold(f64::INFINITY, f64::min);
                if spread > 1e-10 {
                    return Err(Error::Verification(format!("mean-curvature spread {spread}")));
                }
                Ok((format!("H = {} at t in {{-1,0,1}}", values[0]), spread))
            }),
        });
    }
    // a pure sanity check that the branch evolution agrees with the
    // parallel shape operator of the Jacobi module on the flat window
    {
        tasks.push(Task {
            suite: "geometry",
            params: format!("family=hn n={n} a={a} bridge"),
            check_id: "parallel-branch-fixed-point".into(),
            run: Box::new(move || {
                let c1 = 1.0 / (1.0 + a * a).sqrt();
                let branch = Branch { c: -1, big_c: c1 };
                let mut worst: f64 = 0.0;
                for t in [-2.0, -0.5, 0.0, 0.5, 2.0] {
                    worst = worst.max((parallel_principal_branch(c1, branch, t)? - c1).abs());
                }
                if worst > 1e-12 {
                    return Err(Error::Verification(format!(
                        "horosphere curvature drifts by {worst}"
                    )));
                }
                Ok(("lambda = C1 is a fixed point".into(), worst))
            }),
        });
    }
}
