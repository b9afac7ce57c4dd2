//! Derivative-free optimization over smooth convex sets by pattern search
//! along feasible search paths.
//!
//! The pieces, bottom up:
//!
//! * [`geometry`]: feasible sets with exact projection and tangent cones.
//! * [`curve`]: projection curves `t -> P_C(x + t y)`.
//! * [`stationarity`]: the projected-gradient stationarity measure.
//! * [`fsp`]: the derivative-free pattern search.
//! * [`fo`]: a first-order twin used to cross-check the geometry.
//! * [`problems`]: counted black-box objectives and the benchmark registry.
//! * [`profiles`]: performance and data profiles.
//! * [`campaign`]: single runs and benchmark campaigns writing CSV output.
//!
//! ```
//! use feasible_paths::fsp::{solve, FspConfig};
//! use feasible_paths::problems::{make_instance, ConstraintVariant};
//!
//! let mut problem = make_instance("HS22", &ConstraintVariant::unit_ball(0.0)).unwrap();
//! let run = solve(&mut problem, &FspConfig::default()).unwrap();
//! assert!((run.best_value - 1.528).abs() < 1e-2);
//! ```

pub mod campaign;
pub mod curve;
pub mod error;
pub mod fo;
pub mod fsp;
pub mod geometry;
pub mod problems;
pub mod profiles;
pub mod run;
pub mod stationarity;
pub mod text;

pub use error::{Error, Result};

/// Dense real vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
