//! Feasible search paths built by projecting straight-line steps.
//!
//! A [`SearchCurve`] is `t -> P_C(x + t y)` for `t >= 0`. It starts at the
//! anchor, never leaves `C`, and its right derivative at zero is the
//! projection of `y` onto the tangent cone at the anchor.

use crate::error::{check_dim, Error, Result};
use crate::geometry::SmoothConvexSet;
use crate::Vector;

/// A point on a search path, plus whether an infeasible trial point had
/// to be projected to obtain it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub point: Vector,
    pub projected: bool,
}

/// Any curve `gamma: R+ -> C` with `gamma(0)` equal to its anchor.
pub trait FeasiblePath {
    fn point_at(&self, t: f64) -> Result<PathPoint>;
}

/// Builds one feasible path per (anchor, polling direction) pair.
///
/// Convergence of the pattern search needs the produced family to vary
/// continuously with the anchor and direction; for custom factories that is
/// the caller's obligation; it is not checked.
pub trait CurveFactory: Send + Sync {
    fn build<'a>(
        &self,
        set: &'a SmoothConvexSet,
        anchor: &'a Vector,
        direction: &'a Vector,
    ) -> Result<Box<dyn FeasiblePath + 'a>>;
}

/// The default factory: projection curves.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProjectionCurves;

impl CurveFactory for ProjectionCurves {
    fn build<'a>(
        &self,
        set: &'a SmoothConvexSet,
        anchor: &'a Vector,
        direction: &'a Vector,
    ) -> Result<Box<dyn FeasiblePath + 'a>> {
        Ok(Box::new(SearchCurve::new(set, anchor, direction)?))
    }
}

/// `t -> P_C(anchor + t * direction)`.
///
/// Borrowing, and evaluated lazily: nothing is cached, so each call to
/// [`SearchCurve::eval`] performs one projection.
#[derive(Debug, Clone, Copy)]
pub struct SearchCurve<'a> {
    set: &'a SmoothConvexSet,
    anchor: &'a Vector,
    direction: &'a Vector,
}

impl<'a> SearchCurve<'a> {
    /// The anchor must belong to the set; the direction need not be feasible.
    pub fn new(set: &'a SmoothConvexSet, anchor: &'a Vector, direction: &'a Vector) -> Result<Self> {
        check_dim(set.dimension(), anchor.len())?;
        check_dim(set.dimension(), direction.len())?;
        if !set.contains(anchor)? {
            return Err(Error::Domain("curve anchor is outside the feasible set".into()));
        }
        Ok(Self {
            set,
            anchor,
            direction,
        })
    }

    pub fn anchor(&self) -> &Vector {
        self.anchor
    }

    pub fn direction(&self) -> &Vector {
        self.direction
    }

    pub fn eval(&self, t: f64) -> Result<Vector> {
        Ok(self.trace(t)?.point)
    }

    fn trace(&self, t: f64) -> Result<PathPoint> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("curve parameter must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(PathPoint {
                point: self.anchor.clone(),
                projected: false,
            });
        }
        let raw = self.anchor + self.direction * t;
        let point = self.set.project(&raw)?;
        let projected = point != raw;
        Ok(PathPoint { point, projected })
    }

    /// Right derivative at zero: the direction projected onto `T_C(anchor)`.
    pub fn initial_velocity(&self) -> Result<Vector> {
        self.set.tangent_cone(self.anchor)?.project(self.direction)
    }

    /// Forward difference `(eval(h) - eval(0)) / h`.
    pub fn velocity_finite_difference(&self, h: f64) -> Result<Vector> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!("difference step must be > 0, got {h}")));
        }
        Ok((self.eval(h)? - self.anchor) / h)
    }
}

impl FeasiblePath for SearchCurve<'_> {
    fn point_at(&self, t: f64) -> Result<PathPoint> {
        self.trace(t)
    }
}
