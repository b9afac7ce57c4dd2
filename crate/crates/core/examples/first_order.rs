//! The gradient-based twin next to the derivative-free method on the same
//! problems.

use feasible_paths::fo::{solve_fo, FoConfig};
use feasible_paths::fsp::{solve, FspConfig};
use feasible_paths::problems::{make_instance, ConstraintVariant};
use feasible_paths::Result;

fn main() -> Result<()> {
    for (id, center) in [("quad-shift", 0.0), ("quad-iso-5", 5.0), ("HS43", 0.0), ("rosenbrock-3", 0.0)] {
        let variant = ConstraintVariant::unit_ball(center);
        let mut p = make_instance(id, &variant)?;
        let fo = solve_fo(&mut p, &FoConfig::default())?;
        let mut q = make_instance(id, &variant)?;
        let fsp = solve(&mut q, &FspConfig::default())?;
        println!(
            "{id:<13} c{center}: fo f={:<12.6} n_f={:<6} ({})  fsp f={:<12.6} n_f={:<6} ({})",
            fo.best_value, fo.n_f, fo.termination, fsp.best_value, fsp.n_f, fsp.termination
        );
    }
    Ok(())
}
