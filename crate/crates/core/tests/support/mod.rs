//! Independent oracles shared by the integration tests and the acceptance
//! target. Nothing here calls into the library's projection or solver code.
#![allow(dead_code)]

use feasible_paths::geometry::SmoothConvexSet;
use feasible_paths::Vector;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, n: usize) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

pub fn unit(rng: &mut impl Rng, n: usize) -> Vector {
    loop {
        let g = gaussian(rng, n);
        let norm = g.norm();
        if norm > 1e-8 {
            return g / norm;
        }
    }
}

pub struct RandomBall {
    pub center: Vector,
    pub radius: f64,
    pub set: SmoothConvexSet,
}

pub fn random_ball(rng: &mut impl Rng, n: usize) -> RandomBall {
    let center = Vector::from_iterator(n, (0..n).map(|_| rng.gen_range(-5.0..5.0)));
    let radius = rng.gen_range(0.2..3.0);
    let set = SmoothConvexSet::ball(center.clone(), radius).unwrap();
    RandomBall { center, radius, set }
}

pub struct RandomEllipsoid {
    pub center: Vector,
    pub matrix: DMatrix<f64>,
    pub set: SmoothConvexSet,
}

/// `A = Q diag(1/a_i^2) Q^T` with semi-axes `a_i` in `[0.3, 3]`.
pub fn random_ellipsoid(rng: &mut impl Rng, n: usize) -> RandomEllipsoid {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = m.qr().q();
    let axes: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
    let d = DMatrix::from_diagonal(&Vector::from_iterator(n, axes.iter().map(|a| 1.0 / (a * a))));
    let mut matrix = &q * d * q.transpose();
    matrix = (&matrix + matrix.transpose()) * 0.5;
    let center = Vector::from_iterator(n, (0..n).map(|_| rng.gen_range(-3.0..3.0)));
    let set = SmoothConvexSet::ellipsoid(center.clone(), matrix.clone()).unwrap();
    RandomEllipsoid { center, matrix, set }
}

/// A point on the boundary of `(x-c)^T A (x-c) = 1` along direction `u`.
pub fn ellipsoid_boundary_point(e: &RandomEllipsoid, u: &Vector) -> Vector {
    let q = u.dot(&(&e.matrix * u));
    &e.center + u / q.sqrt()
}

/// Nearest point of a 2-D ellipse `c + R (a cos t, b sin t)` to `x`, by
/// dense sampling of `t` followed by a fine local grid.
pub fn brute_force_ellipse_projection(
    center: &Vector,
    rotation: &DMatrix<f64>,
    a: f64,
    b: f64,
    x: &Vector,
) -> Vector {
    let local = rotation.transpose() * (x - center);
    if (local[0] / a).powi(2) + (local[1] / b).powi(2) <= 1.0 {
        return x.clone();
    }
    let point = |t: f64| Vector::from_vec(vec![a * t.cos(), b * t.sin()]);
    let dist = |t: f64| (point(t) - &local).norm_squared();
    let coarse = 100_000;
    let step = 2.0 * std::f64::consts::PI / coarse as f64;
    let mut best = (0..coarse)
        .map(|i| i as f64 * step)
        .min_by(|s, t| dist(*s).partial_cmp(&dist(*t)).unwrap())
        .unwrap();
    let fine = 2_000;
    let fine_step = 2.0 * step / fine as f64;
    let start = best - step;
    best = (0..=fine)
        .map(|i| start + i as f64 * fine_step)
        .min_by(|s, t| dist(*s).partial_cmp(&dist(*t)).unwrap())
        .unwrap();
    center + rotation * point(best)
}

/// Nearest point to `y` among rays `s d` (`s >= 0`) with `d` sampled on the
/// unit sphere intersected with `{a^T d <= 0}`; 2-D and 3-D only.
///
/// Directions are parametrized by the angle `theta` from `a`, restricted to
/// `[pi/2, pi]`, so the cap boundary is sampled exactly.
pub fn brute_force_halfspace_cone(a: &Vector, y: &Vector) -> Vector {
    use std::f64::consts::PI;
    let n = a.len();
    let e = a.normalize();
    let helper = if e[0].abs() < 0.9 {
        Vector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 })
    } else {
        Vector::from_fn(n, |i, _| if i == 1 { 1.0 } else { 0.0 })
    };
    let u = (&helper - &e * e.dot(&helper)).normalize();
    let ray_point = |d: &Vector| d * d.dot(y).max(0.0);
    let score = |d: &Vector| (ray_point(d) - y).norm_squared();
    let mut best = Vector::zeros(n);
    let mut best_score = y.norm_squared();
    match n {
        2 => {
            let m = 4_000_000;
            for i in 0..=m {
                let t = PI / 2.0 + PI * i as f64 / m as f64;
                let d = &e * t.cos() + &u * t.sin();
                let s = score(&d);
                if s < best_score {
                    best_score = s;
                    best = ray_point(&d);
                }
            }
        }
        3 => {
            let v = e.cross(&u);
            let dir = |theta: f64, phi: f64| {
                &e * theta.cos() + (&u * phi.cos() + &v * phi.sin()) * theta.sin()
            };
            let (nt, np) = (400, 1600);
            let (mut theta, mut phi) = (PI, 0.0);
            let mut best_d = dir(theta, phi);
            let mut current = score(&best_d);
            for i in 0..=nt {
                for j in 0..np {
                    let (t, p) = (PI / 2.0 + PI / 2.0 * i as f64 / nt as f64, 2.0 * PI * j as f64 / np as f64);
                    let s = score(&dir(t, p));
                    if s < current {
                        current = s;
                        (theta, phi) = (t, p);
                    }
                }
            }
            let (mut wt, mut wp) = (PI / nt as f64 * 2.0, 2.0 * PI / np as f64 * 2.0);
            for _ in 0..60 {
                let k = 20;
                let (mut nt_best, mut np_best) = (theta, phi);
                for i in 0..=k {
                    for j in 0..=k {
                        let t = (theta - wt + 2.0 * wt * i as f64 / k as f64).clamp(PI / 2.0, PI);
                        let p = phi - wp + 2.0 * wp * j as f64 / k as f64;
                        let s = score(&dir(t, p));
                        if s < current {
                            current = s;
                            (nt_best, np_best) = (t, p);
                        }
                    }
                }
                (theta, phi) = (nt_best, np_best);
                wt *= 0.5;
                wp *= 0.5;
            }
            best_d = dir(theta, phi);
            if current < best_score {
                best = ray_point(&best_d);
            }
        }
        _ => panic!("brute-force cone oracle supports 2-D and 3-D only"),
    }
    best
}

/// Nonnegative least squares `min ||G l - d||, l >= 0` by the Lawson-Hanson
/// active-set method on unit-normalized columns. Returns the residual norm.
pub fn nnls_residual(columns: &[Vector], d: &Vector) -> f64 {
    let n = d.len();
    let kept: Vec<Vector> = columns
        .iter()
        .filter(|c| c.norm() > 1e-14)
        .map(|c| c / c.norm())
        .collect();
    let m = kept.len();
    let g = DMatrix::from_fn(n, m, |i, j| kept[j][i]);
    let tol = 1e-13 * (1.0 + d.norm());
    let mut x = Vector::zeros(m);
    let mut passive = vec![false; m];
    let least_squares = |passive: &[bool]| -> Vector {
        let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
        let sub = DMatrix::from_fn(n, idx.len(), |i, k| g[(i, idx[k])]);
        let z = sub.svd(true, true).solve(d, 1e-14).unwrap();
        let mut full = Vector::zeros(m);
        for (k, &j) in idx.iter().enumerate() {
            full[j] = z[k];
        }
        full
    };
    for _ in 0..3 * m + 10 {
        let w = g.transpose() * (d - &g * &x);
        let entering = (0..m)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap());
        let Some(j) = entering else { break };
        passive[j] = true;
        loop {
            let z = least_squares(&passive);
            if (0..m).all(|i| !passive[i] || z[i] > 0.0) {
                x = z;
                break;
            }
            let alpha = (0..m)
                .filter(|&i| passive[i] && z[i] <= 0.0)
                .map(|i| x[i] / (x[i] - z[i]))
                .fold(f64::INFINITY, f64::min);
            x += (&z - &x) * alpha;
            for i in 0..m {
                if passive[i] && x[i] <= 1e-15 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    (&g * x - d).norm()
}

/// One row of a 1-D pattern-search trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub success: bool,
    pub tentative: f64,
    pub accepted: f64,
}

/// Direct simulation of the pattern search on `[lo, hi]` with polling
/// directions `dirs`, the first iteration sweeping all of them and keeping
/// the best decrease, later ones opportunistic with success-first cyclic
/// reordering. Returns the trace and the final point.
pub fn simulate_1d(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    x0: f64,
    dirs: &[f64],
) -> (Vec<TraceRow>, f64) {
    let (delta, sigma, tau, alpha_bar, min_step) = (0.5, 1e-3, 1.025, 1e-6, 1e-7);
    let mut x = x0;
    let mut fx = f(x);
    let mut evals = 1;
    let mut step = 1.0;
    let mut order: Vec<usize> = (0..dirs.len()).collect();
    let mut rows = Vec::new();
    let mut first = true;
    while step >= min_step && evals < 10_000 {
        let mut chosen: Option<(usize, f64, f64)> = None;
        for &i in &order {
            let y = (x + step * dirs[i]).clamp(lo, hi);
            let fy = f(y);
            evals += 1;
            if fx - fy >= sigma * step * step {
                let better = match chosen {
                    None => true,
                    Some((_, _, fb)) => fy < fb,
                };
                if better {
                    chosen = Some((i, y, fy));
                }
                if !first {
                    break;
                }
            }
        }
        first = false;
        match chosen {
            Some((i, y, fy)) => {
                rows.push(TraceRow { success: true, tentative: step, accepted: step });
                x = y;
                fx = fy;
                step = (tau * step).max(alpha_bar);
                let pos = order.iter().position(|&j| j == i).unwrap();
                order.rotate_left(pos);
            }
            None => {
                rows.push(TraceRow { success: false, tentative: step, accepted: 0.0 });
                step *= delta;
            }
        }
    }
    (rows, x)
}

/// Straightforward projected-gradient-along-the-arc method on a ball:
/// `x <- P(x - t g)` with `t` the first of `1, 1/2, 1/4, ...` giving
/// `f(new) <= f(x) - 1e-3 t^2`; stops when the tangential part of `-g`
/// is at most `tol`, or when `1e-3 t^2` has shrunk below `1e-14 max(1, |f|)`
/// without an accepted step.
pub fn reference_arc_descent(
    f: impl Fn(&Vector) -> f64,
    grad: impl Fn(&Vector) -> Vector,
    center: &Vector,
    radius: f64,
    x0: &Vector,
    tol: f64,
) -> Vector {
    let project = |z: &Vector| {
        let r = (z - center).norm();
        if r <= radius {
            z.clone()
        } else {
            center + (z - center) * (radius / r)
        }
    };
    let mut x = x0.clone();
    for _ in 0..100_000 {
        let g = grad(&x);
        let mut d = -&g;
        let offset = &x - center;
        if offset.norm() >= radius * (1.0 - 1e-12) {
            let normal = &offset / offset.norm();
            let out = normal.dot(&d);
            if out > 0.0 {
                d -= normal * out;
            }
        }
        if d.norm() <= tol {
            break;
        }
        let fx = f(&x);
        let mut t = 1.0;
        loop {
            let cand = project(&(&x - &g * t));
            if fx - f(&cand) >= 1e-3 * t * t {
                x = cand;
                break;
            }
            t *= 0.5;
            if 1e-3 * t * t < 1e-14 * fx.abs().max(1.0) {
                return x;
            }
        }
    }
    x
}
