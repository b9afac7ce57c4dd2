//! A user-supplied objective on an ellipsoid, solved by three variants of
//! the pattern search, with an observer printing progress.

use std::ops::ControlFlow;
use std::sync::Arc;

use feasible_paths::fsp::{DirectionPolicy, FspConfig, FspSolver, OrderingPolicy};
use feasible_paths::geometry::SmoothConvexSet;
use feasible_paths::problems::{BlackBoxProblem, FnObjective};
use feasible_paths::stationarity::stationarity_report;
use feasible_paths::{Result, Vector};
use nalgebra::{dvector, DMatrix};

fn objective(x: &Vector) -> f64 {
    (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2) + x[0] * x[1]
}

fn problem() -> Result<BlackBoxProblem> {
    let set = SmoothConvexSet::ellipsoid(
        dvector![0.0, 0.0],
        DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 1.0]),
    )?;
    BlackBoxProblem::new("tilted", Arc::new(FnObjective::new(objective)), set, dvector![0.0, 0.0])
}

fn main() -> Result<()> {
    let variants = [
        ("default", FspConfig::default()),
        (
            "static",
            FspConfig {
                ordering: OrderingPolicy::Static,
                ..FspConfig::default()
            },
        ),
        (
            "coordinates",
            FspConfig {
                directions: DirectionPolicy::Coordinates,
                ..FspConfig::default()
            },
        ),
    ];
    for (name, config) in variants {
        let mut p = problem()?;
        let mut solver = FspSolver::new(config).with_observer(|it, x| {
            if it.k % 20 == 0 {
                println!("  {name} k={:<4} step={:.2e} x={:.4?}", it.k, it.tentative_step, x.as_slice());
            }
            ControlFlow::Continue(())
        });
        let run = solver.solve(&mut p)?;
        let report = stationarity_report(p.set(), &run.best_point, objective, None)?;
        println!(
            "{name}: f={:.8} n_f={} n_p={} {} measure={:.1e} ({}, {})",
            run.best_value, run.n_f, run.n_p, run.termination, report.measure,
            report.gradient_source, report.cone_case
        );
    }
    Ok(())
}
