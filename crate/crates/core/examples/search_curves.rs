//! A projection curve on the unit ball: its points, and its initial velocity
//! against forward differences.

use feasible_paths::curve::SearchCurve;
use feasible_paths::geometry::SmoothConvexSet;
use feasible_paths::Result;
use nalgebra::dvector;

fn main() -> Result<()> {
    let ball = SmoothConvexSet::uniform_ball(2, 0.0, 1.0)?;
    let anchor = dvector![1.0, 0.0];
    let direction = dvector![1.0, 1.0];
    let curve = SearchCurve::new(&ball, &anchor, &direction)?;

    for t in [0.0, 0.1, 0.5, 1.0, 4.0] {
        println!("gamma({t:>3}) = {:.6?}", curve.eval(t)?.as_slice());
    }
    println!("velocity     = {:.6?}", curve.initial_velocity()?.as_slice());
    for h in [1e-2, 1e-4, 1e-6] {
        println!("fd h={h:e} = {:.6?}", curve.velocity_finite_difference(h)?.as_slice());
    }
    Ok(())
}
