//! First-order reference method: backtracking along the projection arc.
//!
//! At `x^k` the search path is `gamma_k(t) = P_C(x^k - t grad f(x^k))`,
//! whose initial velocity is `d_k = P_{T_C(x^k)}(-grad f(x^k))`. The step
//! is the largest `delta^j Delta_0` with
//! `f(gamma_k(delta^j Delta_0)) <= f(x^k) - sigma (delta^j Delta_0)^2`.
//! The run stops once `||d_k||` falls below a tolerance.
//!
//! Near a stationary point the accepted steps shrink like `||d_k||^2 / sigma`
//! and the decrease they buy like `||d_k||^4 / sigma`, so in floating point
//! the test stops resolving anything long before `||d_k||` is tiny. Once
//! `sigma t^2` drops below the rounding level of `f(x^k)` without an
//! accepted step, the run ends with [`Termination::PrecisionLimit`].
//!
//! This solver reads gradients, so it is a diagnostic twin of the pattern
//! search rather than a black-box method.

use crate::curve::{FeasiblePath, SearchCurve};
use crate::error::{Error, Result};
use crate::problems::BlackBoxProblem;
use crate::run::{sufficient_decrease, HistoryRecorder, IterationRecord, SolverRun, Termination};

#[derive(Debug, Clone, PartialEq)]
pub struct FoConfig {
    pub delta: f64,
    pub sigma: f64,
    /// First trial step of every line search.
    pub initial_step: f64,
    pub max_iterations: usize,
    pub max_backtracks: usize,
    /// Stop once `||P_{T_C(x)}(-grad f(x))||` is at most this.
    pub stationarity_tolerance: f64,
    pub max_function_evaluations: usize,
}

impl Default for FoConfig {
    fn default() -> Self {
        Self {
            delta: 0.5,
            sigma: 1e-3,
            initial_step: 1.0,
            max_iterations: 10_000,
            max_backtracks: 60,
            stationarity_tolerance: 1e-6,
            max_function_evaluations: 1_000_000,
        }
    }
}

impl FoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::Config(format!(
                "initial step must be positive, got {}",
                self.initial_step
            )));
        }
        if !(self.stationarity_tolerance >= 0.0) {
            return Err(Error::Config("stationarity tolerance must be >= 0".into()));
        }
        if self.max_backtracks == 0 || self.max_function_evaluations == 0 {
            return Err(Error::Config("backtrack cap and budget must be positive".into()));
        }
        Ok(())
    }
}

pub fn solve_fo(problem: &mut BlackBoxProblem, config: &FoConfig) -> Result<SolverRun> {
    config.validate()?;
    let set = problem.shared_set();
    let mut x = problem.start().clone();
    if !set.contains(&x)? {
        return Err(Error::Domain("start point is infeasible".into()));
    }
    if problem.gradient(&x).is_none() {
        return Err(Error::Config(format!(
            "problem `{}` has no gradient oracle",
            problem.name()
        )));
    }

    let base_count = problem.evaluations();
    let used = |p: &BlackBoxProblem| p.evaluations() - base_count;
    let mut history = HistoryRecorder::new();
    let mut n_p = 0usize;

    let mut fx = problem.evaluate(&x)?;
    history.record(used(problem), fx);
    let initial_value = fx;
    let mut iterates = vec![x.clone()];
    let mut iterations = Vec::new();

    let termination = 'outer: loop {
        let k = iterations.len();
        if k >= config.max_iterations {
            break Termination::IterationLimit;
        }
        let grad = problem
            .gradient(&x)
            .ok_or_else(|| Error::Invariant("gradient oracle disappeared".into()))?;
        let cone = set.tangent_cone(&x)?;
        let velocity = cone.project(&-&grad)?;
        let measure = velocity.norm();
        if measure <= config.stationarity_tolerance {
            break Termination::Stationary;
        }

        let steepest = -&grad;
        let curve = SearchCurve::new(&set, &x, &steepest)?;
        let mut accepted = None;
        let mut polls = 0;
        let mut non_finite = 0;
        let mut step = config.initial_step;
        let resolution = rounding_level(fx);
        let mut unresolved = false;
        for _ in 0..config.max_backtracks {
            if config.sigma * step * step < resolution {
                unresolved = true;
                break;
            }
            if used(problem) >= config.max_function_evaluations {
                break 'outer Termination::BudgetExhausted;
            }
            let trial = curve.point_at(step)?;
            if trial.projected {
                n_p += 1;
            }
            let value = problem.evaluate(&trial.point)?;
            history.record(used(problem), value);
            polls += 1;
            if !value.is_finite() {
                non_finite += 1;
            } else if sufficient_decrease(fx, value, config.sigma, step) {
                accepted = Some((trial.point, value, step));
                break;
            }
            step *= config.delta;
        }

        let Some((point, value, step)) = accepted else {
            let termination = if unresolved {
                Termination::PrecisionLimit
            } else {
                Termination::LineSearchFailure
            };
            iterations.push(IterationRecord {
                k,
                success: false,
                direction: None,
                tentative_step: config.initial_step,
                accepted_step: 0.0,
                f_before: fx,
                f_after: fx,
                n_f: used(problem),
                n_p,
                polls,
                non_finite,
                complete: true,
                gradient_norm: Some(grad.norm()),
                stationarity: Some(measure),
            });
            iterates.push(x.clone());
            break termination;
        };
        iterations.push(IterationRecord {
            k,
            success: true,
            direction: None,
            tentative_step: config.initial_step,
            accepted_step: step,
            f_before: fx,
            f_after: value,
            n_f: used(problem),
            n_p,
            polls,
            non_finite,
            complete: true,
            gradient_norm: Some(grad.norm()),
            stationarity: Some(measure),
        });
        x = point;
        fx = value;
        iterates.push(x.clone());
    };

    Ok(SolverRun {
        solver: "fo".into(),
        problem: problem.name().to_string(),
        iterates,
        iterations,
        n_f: used(problem),
        n_p,
        best_point: x,
        best_value: fx,
        initial_value,
        final_tentative_step: config.initial_step,
        termination,
        history: history.entries,
        metadata: vec![
            ("curves".into(), "projection".into()),
            ("line_search".into(), "backtracking".into()),
        ],
    })
}

/// A few units in the last place of `f`, floored at the unit scale.
fn rounding_level(f: f64) -> f64 {
    4.0 * f64::EPSILON * f.abs().max(1.0)
}
