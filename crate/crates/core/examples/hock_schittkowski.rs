//! The Hock-Schittkowski objectives on unit balls centered at 0 and at 5.

use feasible_paths::fsp::{solve, FspConfig};
use feasible_paths::problems::{make_instance, ConstraintVariant};
use feasible_paths::Result;

fn main() -> Result<()> {
    println!("{:<6} {:>6} {:>12} {:>10} {:>6} {:>6}", "id", "center", "f_best", "reference", "n_f", "n_p");
    for center in [0.0, 5.0] {
        for id in ["HS22", "HS232", "HS29", "HS65", "HS43"] {
            let mut problem = make_instance(id, &ConstraintVariant::unit_ball(center))?;
            let reference = problem.reference().map_or(f64::NAN, |r| r.value);
            let run = solve(&mut problem, &FspConfig::default())?;
            println!(
                "{id:<6} {center:>6} {:>12.5} {reference:>10.3} {:>6} {:>6}",
                run.best_value, run.n_f, run.n_p
            );
        }
    }
    Ok(())
}
