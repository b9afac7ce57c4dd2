//! First-order stationarity diagnostics.
//!
//! A feasible point is stationary when `-grad f(x)` has no component inside
//! the tangent cone, so `||P_{T_C(x)}(-grad f(x))||` measures how far from
//! stationary it is. Solvers never see gradients; these helpers only serve
//! tests and benchmark reports.

use std::fmt;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::geometry::SmoothConvexSet;
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientSource {
    Analytic,
    FiniteDifference { step: f64 },
}

impl fmt::Display for GradientSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradientSource::Analytic => f.write_str("analytic"),
            GradientSource::FiniteDifference { step } => write!(f, "finite-difference({step:e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeLocation {
    Interior,
    Boundary,
}

impl fmt::Display for ConeLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConeLocation::Interior => "interior",
            ConeLocation::Boundary => "boundary",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub point: Vector,
    pub measure: f64,
    pub gradient_source: GradientSource,
    pub cone_case: ConeLocation,
}

/// `||P_{T_C(x)}(-grad)||`.
pub fn stationarity_measure(set: &SmoothConvexSet, x: &Vector, grad: &Vector) -> Result<f64> {
    check_dim(set.dimension(), grad.len())?;
    check_finite(grad.as_slice(), "gradient")?;
    let cone = set.tangent_cone(x)?;
    Ok(cone.project(&-grad)?.norm())
}

/// Default difference step `1e-6 * max(1, ||x||)`.
pub fn default_step(x: &Vector) -> f64 {
    1e-6 * x.norm().max(1.0)
}

/// Central differences where both stencil points are feasible, one-sided
/// differences otherwise.
pub fn finite_difference_gradient<F>(
    f: F,
    x: &Vector,
    h: f64,
    set: &SmoothConvexSet,
) -> Result<Vector>
where
    F: Fn(&Vector) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::Domain(format!("difference step must be > 0, got {h}")));
    }
    if !set.contains(x)? {
        return Err(Error::Domain("gradient requested at an infeasible point".into()));
    }
    let n = x.len();
    let fx = f(x);
    let mut grad = Vector::zeros(n);
    for i in 0..n {
        let mut forward = x.clone();
        forward[i] += h;
        let mut backward = x.clone();
        backward[i] -= h;
        let fwd_ok = set.contains(&forward)?;
        let bwd_ok = set.contains(&backward)?;
        grad[i] = match (fwd_ok, bwd_ok) {
            (true, true) => (f(&forward) - f(&backward)) / (2.0 * h),
            (true, false) => (f(&forward) - fx) / h,
            (false, true) => (fx - f(&backward)) / h,
            (false, false) => {
                return Err(Error::DiagnosticUnavailable(format!(
                    "no feasible stencil point along coordinate {i}"
                )))
            }
        };
    }
    Ok(grad)
}

/// Builds a report, preferring an analytic gradient when one is supplied.
pub fn stationarity_report<F>(
    set: &SmoothConvexSet,
    x: &Vector,
    f: F,
    analytic_gradient: Option<Vector>,
) -> Result<StationarityReport>
where
    F: Fn(&Vector) -> f64,
{
    let (grad, gradient_source) = match analytic_gradient {
        Some(g) => (g, GradientSource::Analytic),
        None => {
            let step = default_step(x);
            (
                finite_difference_gradient(f, x, step, set)?,
                GradientSource::FiniteDifference { step },
            )
        }
    };
    let cone = set.tangent_cone(x)?;
    let cone_case = if cone.is_interior() {
        ConeLocation::Interior
    } else {
        ConeLocation::Boundary
    };
    Ok(StationarityReport {
        point: x.clone(),
        measure: stationarity_measure(set, x, &grad)?,
        gradient_source,
        cone_case,
    })
}
