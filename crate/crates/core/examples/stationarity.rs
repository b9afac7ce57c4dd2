//! The stationarity measure at interior and boundary points, with analytic
//! and finite-difference gradients.

use feasible_paths::geometry::SmoothConvexSet;
use feasible_paths::stationarity::{finite_difference_gradient, stationarity_measure, stationarity_report};
use feasible_paths::{Result, Vector};
use nalgebra::dvector;

fn f(x: &Vector) -> f64 {
    (x[0] - 2.0).powi(2) + x[1] * x[1]
}

fn main() -> Result<()> {
    let ball = SmoothConvexSet::uniform_ball(2, 0.0, 1.0)?;
    for x in [dvector![0.0, 0.0], dvector![1.0, 0.0], dvector![0.0, 1.0]] {
        let grad = dvector![2.0 * (x[0] - 2.0), 2.0 * x[1]];
        let fd = finite_difference_gradient(f, &x, 1e-6, &ball)?;
        let report = stationarity_report(&ball, &x, f, None)?;
        println!(
            "x={:?} measure={:.6} fd grad={:.6?} fd measure={:.6} ({})",
            x.as_slice(),
            stationarity_measure(&ball, &x, &grad)?,
            fd.as_slice(),
            report.measure,
            report.cone_case
        );
    }
    Ok(())
}
