//! Feasible regions with exact Euclidean projection and tangent cones.
//!
//! Every set is described implicitly by a convex function `g` with
//! `C = {x | g(x) <= 0}`. Membership and the interior/boundary split are
//! decided on a scale-free version of `g` (the ball residual is divided by
//! `r^2`, the box residual by the side length) against
//! [`SmoothConvexSet::boundary_tolerance`].
//!
//! Balls and ellipsoids are the sets the solvers are meant for. Boxes and
//! halfspace intersections have nonsmooth boundaries and exist mostly for
//! tests of the cone machinery; the solvers run on them, but their
//! convergence theory does not cover them.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::text::{format_reals, parse_reals};
use crate::Vector;

/// Default relative tolerance used to classify boundary points.
pub const DEFAULT_BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Target residual of the ellipsoid multiplier search.
const ELLIPSOID_RESIDUAL_TOL: f64 = 1e-12;
const ELLIPSOID_MAX_ITERATIONS: usize = 2_000;

const DYKSTRA_MAX_SWEEPS: usize = 100_000;
const DYKSTRA_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    /// `||x - center|| <= radius`.
    Ball { center: Vector, radius: f64 },
    /// `lower <= x <= upper`, componentwise.
    Box { lower: Vector, upper: Vector },
    /// `(x - center)^T matrix (x - center) <= 1`, `matrix` symmetric positive definite.
    Ellipsoid { center: Vector, matrix: DMatrix<f64> },
    /// `normals[i]^T x <= offsets[i]` for every `i`.
    Halfspaces { normals: Vec<Vector>, offsets: Vec<f64> },
}

/// A closed convex feasible region with a nonempty interior.
///
/// Immutable once built, so a single instance can back any number of
/// concurrent solver runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothConvexSet {
    kind: SetKind,
    boundary_tolerance: f64,
}

impl SmoothConvexSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        check_finite(center.as_slice(), "ball center")?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if center.is_empty() {
            return Err(Error::InvalidInput("zero-dimensional set".into()));
        }
        Ok(Self::from_kind(SetKind::Ball { center, radius }))
    }

    /// Ball of the given radius centered at `[center, ..., center]`.
    pub fn uniform_ball(dimension: usize, center: f64, radius: f64) -> Result<Self> {
        Self::ball(Vector::from_element(dimension, center), radius)
    }

    pub fn ellipsoid(center: Vector, matrix: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        if n == 0 {
            return Err(Error::InvalidInput("zero-dimensional set".into()));
        }
        check_finite(center.as_slice(), "ellipsoid center")?;
        check_finite(matrix.as_slice(), "ellipsoid matrix")?;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "ellipsoid matrix must be {n}x{n}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.amax().max(1.0);
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidInput("ellipsoid matrix is not symmetric".into()));
        }
        if matrix.clone().cholesky().is_none() {
            return Err(Error::InvalidInput("ellipsoid matrix is not positive definite".into()));
        }
        Ok(Self::from_kind(SetKind::Ellipsoid { center, matrix }))
    }

    pub fn hyperbox(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidInput("zero-dimensional set".into()));
        }
        check_finite(lower.as_slice(), "box lower bound")?;
        check_finite(upper.as_slice(), "box upper bound")?;
        if lower.iter().zip(upper.iter()).any(|(l, u)| l >= u) {
            return Err(Error::InvalidInput("box must satisfy lower < upper".into()));
        }
        Ok(Self::from_kind(SetKind::Box { lower, upper }))
    }

    pub fn halfspaces(normals: Vec<Vector>, offsets: Vec<f64>) -> Result<Self> {
        if normals.is_empty() || normals.len() != offsets.len() {
            return Err(Error::InvalidInput(
                "need one offset per normal and at least one halfspace".into(),
            ));
        }
        let n = normals[0].len();
        if n == 0 {
            return Err(Error::InvalidInput("zero-dimensional set".into()));
        }
        for a in &normals {
            check_dim(n, a.len())?;
            check_finite(a.as_slice(), "halfspace normal")?;
            if a.norm() == 0.0 {
                return Err(Error::InvalidInput("halfspace normal is zero".into()));
            }
        }
        check_finite(&offsets, "halfspace offsets")?;
        Ok(Self::from_kind(SetKind::Halfspaces { normals, offsets }))
    }

    fn from_kind(kind: SetKind) -> Self {
        Self {
            kind,
            boundary_tolerance: DEFAULT_BOUNDARY_TOLERANCE,
        }
    }

    pub fn with_boundary_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "boundary tolerance must be positive, got {tolerance}"
            )));
        }
        self.boundary_tolerance = tolerance;
        Ok(self)
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn boundary_tolerance(&self) -> f64 {
        self.boundary_tolerance
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            SetKind::Ball { center, .. } | SetKind::Ellipsoid { center, .. } => center.len(),
            SetKind::Box { lower, .. } => lower.len(),
            SetKind::Halfspaces { normals, .. } => normals[0].len(),
        }
    }

    /// Whether the boundary is smooth, i.e. the set is a ball or an ellipsoid.
    pub fn is_smooth(&self) -> bool {
        matches!(self.kind, SetKind::Ball { .. } | SetKind::Ellipsoid { .. })
    }

    fn check_point(&self, x: &Vector) -> Result<()> {
        check_dim(self.dimension(), x.len())?;
        check_finite(x.as_slice(), "point")
    }

    /// Scale-free constraint residual: negative inside, zero on the boundary.
    pub fn constraint_value(&self, x: &Vector) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.residual(x))
    }

    fn residual(&self, x: &Vector) -> f64 {
        match &self.kind {
            SetKind::Ball { center, radius } => (x - center).norm_squared() / (radius * radius) - 1.0,
            SetKind::Ellipsoid { center, matrix } => {
                let d = x - center;
                d.dot(&(matrix * &d)) - 1.0
            }
            SetKind::Box { lower, upper } => (0..x.len())
                .map(|i| {
                    let width = upper[i] - lower[i];
                    ((lower[i] - x[i]) / width).max((x[i] - upper[i]) / width)
                })
                .fold(f64::NEG_INFINITY, f64::max),
            SetKind::Halfspaces { normals, offsets } => normals
                .iter()
                .zip(offsets)
                .map(|(a, b)| (a.dot(x) - b) / a.norm())
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Gradient of the unscaled constraint function, where it exists.
    ///
    /// Ball: `2(x - c)`; ellipsoid: `2A(x - c)`. `None` for the polyhedral kinds.
    pub fn constraint_gradient(&self, x: &Vector) -> Result<Option<Vector>> {
        self.check_point(x)?;
        Ok(match &self.kind {
            SetKind::Ball { center, .. } => Some((x - center) * 2.0),
            SetKind::Ellipsoid { center, matrix } => Some(matrix * (x - center) * 2.0),
            _ => None,
        })
    }

    pub fn contains(&self, x: &Vector) -> Result<bool> {
        self.check_point(x)?;
        Ok(self.residual(x) <= self.boundary_tolerance)
    }

    /// Euclidean projection onto the set. Points with `g(x) <= 0` are
    /// returned unchanged, bit for bit; points in the tolerance band outside
    /// the exact set are moved onto the boundary, so projection curves never
    /// drift outward through the band.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        self.check_point(x)?;
        if self.residual(x) <= 0.0 {
            return Ok(x.clone());
        }
        match &self.kind {
            SetKind::Ball { center, radius } => {
                let d = x - center;
                let norm = d.norm();
                Ok(center + d * (radius / norm))
            }
            SetKind::Box { lower, upper } => Ok(Vector::from_iterator(
                x.len(),
                (0..x.len()).map(|i| x[i].clamp(lower[i], upper[i])),
            )),
            SetKind::Ellipsoid { center, matrix } => self.project_ellipsoid(center, matrix, x),
            SetKind::Halfspaces { normals, offsets } => {
                let y = dykstra(x, normals, offsets)?;
                if self.residual(&y) > self.boundary_tolerance {
                    return Err(Error::Numerical {
                        message: "halfspace projection left the set".into(),
                        residual: self.residual(&y),
                    });
                }
                Ok(y)
            }
        }
    }

    // Stationarity of |y - x|^2 / 2 + mu/2 ((y-c)^T A (y-c) - 1) gives
    // y - c = (I + mu A)^{-1} (x - c); the level-set residual of that point
    // decreases in mu, so the multiplier is found by bisection.
    fn project_ellipsoid(&self, center: &Vector, matrix: &DMatrix<f64>, x: &Vector) -> Result<Vector> {
        let n = x.len();
        let d = x - center;
        let shifted = |mu: f64| -> Result<Vector> {
            let m = DMatrix::identity(n, n) + matrix * mu;
            let chol = m.cholesky().ok_or_else(|| Error::Numerical {
                message: "I + mu A lost positive definiteness".into(),
                residual: f64::NAN,
            })?;
            Ok(chol.solve(&d))
        };
        let phi = |s: &Vector| s.dot(&(matrix * s)) - 1.0;

        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut s_hi = shifted(hi)?;
        let mut iterations = 0;
        while phi(&s_hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            s_hi = shifted(hi)?;
            iterations += 1;
            if iterations > ELLIPSOID_MAX_ITERATIONS || !hi.is_finite() {
                return Err(Error::Numerical {
                    message: "could not bracket the ellipsoid multiplier".into(),
                    residual: phi(&s_hi),
                });
            }
        }
        while iterations < ELLIPSOID_MAX_ITERATIONS && -phi(&s_hi) > ELLIPSOID_RESIDUAL_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let s_mid = shifted(mid)?;
            if phi(&s_mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
                s_hi = s_mid;
            }
            iterations += 1;
        }

        // `hi` always sits on the feasible side of the root.
        let y = center + s_hi;
        let residual = self.residual(&y);
        if residual.abs() > self.boundary_tolerance {
            return Err(Error::Numerical {
                message: "ellipsoid multiplier search did not converge".into(),
                residual,
            });
        }
        Ok(y)
    }

    /// Tangent cone at a feasible point.
    pub fn tangent_cone(&self, x: &Vector) -> Result<TangentCone> {
        self.check_point(x)?;
        let g = self.residual(x);
        if g > self.boundary_tolerance {
            return Err(Error::Domain(format!(
                "tangent cone requested at an infeasible point (residual {g:e})"
            )));
        }
        let tol = self.boundary_tolerance;
        let case = match &self.kind {
            SetKind::Ball { .. } | SetKind::Ellipsoid { .. } => {
                if g < -tol {
                    ConeCase::FullSpace
                } else {
                    let normal = self
                        .constraint_gradient(x)?
                        .expect("smooth sets have a gradient");
                    ConeCase::Halfspace(normal)
                }
            }
            SetKind::Box { lower, upper } => {
                let n = x.len();
                let mut active = Vec::new();
                for i in 0..n {
                    let width = upper[i] - lower[i];
                    if (x[i] - lower[i]) / width <= tol {
                        active.push(-Vector::from_fn(n, |j, _| if j == i { 1.0 } else { 0.0 }));
                    }
                    if (upper[i] - x[i]) / width <= tol {
                        active.push(Vector::from_fn(n, |j, _| if j == i { 1.0 } else { 0.0 }));
                    }
                }
                ConeCase::from_normals(active)
            }
            SetKind::Halfspaces { normals, offsets } => {
                let active = normals
                    .iter()
                    .zip(offsets)
                    .filter(|(a, b)| (a.dot(x) - *b) / a.norm() >= -tol)
                    .map(|(a, _)| a.clone())
                    .collect();
                ConeCase::from_normals(active)
            }
        };
        Ok(TangentCone {
            base: x.clone(),
            case,
        })
    }
}

/// Dykstra's alternating projections onto an intersection of halfspaces.
fn dykstra(x: &Vector, normals: &[Vector], offsets: &[f64]) -> Result<Vector> {
    let m = normals.len();
    let mut y = x.clone();
    let mut corrections = vec![Vector::zeros(x.len()); m];
    let scale = 1.0 + x.norm();
    for _ in 0..DYKSTRA_MAX_SWEEPS {
        let previous = y.clone();
        for i in 0..m {
            let v = &y + &corrections[i];
            let a = &normals[i];
            let excess = a.dot(&v) - offsets[i];
            let projected = if excess > 0.0 {
                &v - a * (excess / a.norm_squared())
            } else {
                v.clone()
            };
            corrections[i] = v - &projected;
            y = projected;
        }
        let violation = normals
            .iter()
            .zip(offsets)
            .map(|(a, b)| (a.dot(&y) - b) / a.norm())
            .fold(0.0_f64, f64::max);
        if (&y - previous).norm() <= DYKSTRA_TOL * scale && violation <= DYKSTRA_TOL * scale {
            return Ok(y);
        }
    }
    let violation = normals
        .iter()
        .zip(offsets)
        .map(|(a, b)| (a.dot(&y) - b) / a.norm())
        .fold(0.0_f64, f64::max);
    Err(Error::Numerical {
        message: "alternating projections did not converge".into(),
        residual: violation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeCase {
    /// Interior point: every direction is feasible.
    FullSpace,
    /// Smooth boundary point: `{d | normal^T d <= 0}`.
    Halfspace(Vector),
    /// Corner of a polyhedral set: intersection of several halfspaces through the origin.
    Polyhedral(Vec<Vector>),
}

impl ConeCase {
    fn from_normals(mut normals: Vec<Vector>) -> Self {
        match normals.len() {
            0 => ConeCase::FullSpace,
            1 => ConeCase::Halfspace(normals.pop().unwrap()),
            _ => ConeCase::Polyhedral(normals),
        }
    }
}

/// The tangent cone `T_C(x)` at a feasible base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCone {
    pub base: Vector,
    pub case: ConeCase,
}

impl TangentCone {
    pub fn full_space(base: Vector) -> Self {
        Self {
            base,
            case: ConeCase::FullSpace,
        }
    }

    pub fn halfspace(base: Vector, normal: Vector) -> Self {
        Self {
            base,
            case: ConeCase::Halfspace(normal),
        }
    }

    pub fn is_interior(&self) -> bool {
        matches!(self.case, ConeCase::FullSpace)
    }

    /// Euclidean projection of `y` onto the cone.
    pub fn project(&self, y: &Vector) -> Result<Vector> {
        check_dim(self.base.len(), y.len())?;
        match &self.case {
            ConeCase::FullSpace => Ok(y.clone()),
            ConeCase::Halfspace(a) => project_halfspace(a, y),
            ConeCase::Polyhedral(normals) => {
                for a in normals {
                    if a.norm_squared() == 0.0 {
                        return Err(Error::Invariant("tangent cone normal is zero".into()));
                    }
                }
                let offsets = vec![0.0; normals.len()];
                dykstra(y, normals, &offsets)
            }
        }
    }
}

fn project_halfspace(a: &Vector, y: &Vector) -> Result<Vector> {
    let norm2 = a.norm_squared();
    if norm2 == 0.0 {
        return Err(Error::Invariant("tangent cone normal is zero".into()));
    }
    let ay = a.dot(y);
    if ay <= 0.0 {
        Ok(y.clone())
    } else {
        Ok(y - a * (ay / norm2))
    }
}

impl fmt::Display for SmoothConvexSet {
    /// One-line record, e.g. `ball center=0,0 radius=1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SetKind::Ball { center, radius } => {
                write!(f, "ball center={} radius={}", format_reals(center.as_slice()), radius)?
            }
            SetKind::Ellipsoid { center, matrix } => {
                let row_major: Vec<f64> = matrix.transpose().iter().copied().collect();
                write!(
                    f,
                    "ellipsoid center={} matrix={}",
                    format_reals(center.as_slice()),
                    format_reals(&row_major)
                )?
            }
            SetKind::Box { lower, upper } => write!(
                f,
                "box lower={} upper={}",
                format_reals(lower.as_slice()),
                format_reals(upper.as_slice())
            )?,
            SetKind::Halfspaces { normals, offsets } => {
                let flat: Vec<f64> = normals.iter().flat_map(|a| a.iter().copied()).collect();
                write!(
                    f,
                    "halfspaces normals={} offsets={}",
                    format_reals(&flat),
                    format_reals(offsets)
                )?
            }
        }
        if self.boundary_tolerance != DEFAULT_BOUNDARY_TOLERANCE {
            write!(f, " tolerance={}", self.boundary_tolerance)?;
        }
        Ok(())
    }
}

impl FromStr for SmoothConvexSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let tag = tokens
            .next()
            .ok_or_else(|| Error::Config("empty set descriptor".into()))?;
        let mut fields = std::collections::BTreeMap::new();
        for tok in tokens {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, found `{tok}`")))?;
            fields.insert(k, v);
        }
        let get = |key: &str| -> Result<Vec<f64>> {
            let v = fields
                .get(key)
                .ok_or_else(|| Error::Config(format!("`{tag}` descriptor is missing `{key}`")))?;
            parse_reals(v)
        };
        let set = match tag {
            "ball" => {
                let radius = get("radius")?;
                if radius.len() != 1 {
                    return Err(Error::Config("ball radius must be a single value".into()));
                }
                Self::ball(DVector::from_vec(get("center")?), radius[0])?
            }
            "ellipsoid" => {
                let center = get("center")?;
                let n = center.len();
                let entries = get("matrix")?;
                if entries.len() != n * n {
                    return Err(Error::Config(format!(
                        "ellipsoid matrix needs {} entries, got {}",
                        n * n,
                        entries.len()
                    )));
                }
                Self::ellipsoid(
                    DVector::from_vec(center),
                    DMatrix::from_row_slice(n, n, &entries),
                )?
            }
            "box" => Self::hyperbox(
                DVector::from_vec(get("lower")?),
                DVector::from_vec(get("upper")?),
            )?,
            "halfspaces" => {
                let offsets = get("offsets")?;
                let flat = get("normals")?;
                if offsets.is_empty() || flat.len() % offsets.len() != 0 {
                    return Err(Error::Config(
                        "halfspace normals do not match the number of offsets".into(),
                    ));
                }
                let n = flat.len() / offsets.len();
                let normals = flat.chunks(n).map(DVector::from_column_slice).collect();
                Self::halfspaces(normals, offsets)?
            }
            other => return Err(Error::Config(format!("unknown set kind `{other}`"))),
        };
        match fields.get("tolerance") {
            Some(t) => {
                let t: f64 = t
                    .parse()
                    .map_err(|_| Error::Config(format!("bad tolerance `{t}`")))?;
                set.with_boundary_tolerance(t)
            }
            None => Ok(set),
        }
    }
}
