//! Projections, membership and tangent cones for the shipped set kinds.

use feasible_paths::geometry::SmoothConvexSet;
use feasible_paths::Result;
use nalgebra::{dvector, DMatrix};

fn main() -> Result<()> {
    let ball = SmoothConvexSet::ball(dvector![0.0, 0.0], 1.0)?;
    println!("ball      P([2, 0])   = {:.6?}", ball.project(&dvector![2.0, 0.0])?.as_slice());

    let ellipse = SmoothConvexSet::ellipsoid(
        dvector![0.0, 0.0],
        DMatrix::from_diagonal(&dvector![0.25, 1.0]),
    )?;
    let p = ellipse.project(&dvector![2.0, 2.0])?;
    println!("ellipse   P([2, 2])   = {:.6?}", p.as_slice());
    println!("          g(P([2,2])) = {:e}", ellipse.constraint_value(&p)?);
    println!("          [0, 3] in C = {}", ellipse.contains(&dvector![0.0, 3.0])?);

    let bx = SmoothConvexSet::hyperbox(dvector![-1.0, -1.0], dvector![1.0, 1.0])?;
    println!("box       P([3, -0.5]) = {:.6?}", bx.project(&dvector![3.0, -0.5])?.as_slice());

    let half = SmoothConvexSet::halfspaces(vec![dvector![1.0, 1.0]], vec![1.0])?;
    println!("halfspace P([2, 2])   = {:.6?}", half.project(&dvector![2.0, 2.0])?.as_slice());

    for x in [dvector![0.0, 0.0], dvector![1.0, 0.0]] {
        let cone = ball.tangent_cone(&x)?;
        let y = dvector![1.0, 1.0];
        println!(
            "T_C({:?}) interior={} P_T([1, 1]) = {:.6?}",
            x.as_slice(),
            cone.is_interior(),
            cone.project(&y)?.as_slice()
        );
    }
    Ok(())
}
