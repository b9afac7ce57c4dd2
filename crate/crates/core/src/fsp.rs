//! Derivative-free pattern search along feasible search paths.
//!
//! Each iteration polls the objective at `gamma_i(a)` for every direction
//! `b_i` in a fixed set containing `+-e_1, ..., +-e_n`, where `gamma_i` is
//! a feasible path leaving `x^k` with initial velocity `P_{T_C(x^k)}(b_i)`
//! and `a` is the tentative stepsize. A poll succeeds under the sufficient
//! decrease test `f(gamma_i(a)) <= f(x^k) - sigma a^2`. Success moves the
//! iterate and sets the next tentative step to `max(alpha_bar, tau a)`;
//! a sweep without success shrinks it by `delta`.
//!
//! Only feasible points are ever passed to the objective.

use std::ops::ControlFlow;

use crate::curve::{CurveFactory, ProjectionCurves};
use crate::error::{Error, Result};
use crate::problems::BlackBoxProblem;
use crate::run::{sufficient_decrease, HistoryRecorder, IterationRecord, SolverRun, Termination};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionPolicy {
    /// `e_1, ..., e_n, -e_1, ..., -e_n`.
    Coordinates,
    /// The coordinates followed by `[1, ..., 1]` and `[-1, ..., -1]`.
    CoordinatesPlusDiagonals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingPolicy {
    Static,
    /// After a success the next scan starts at the successful direction
    /// and continues cyclically through the previous order.
    DynamicSuccessFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FspConfig {
    /// Contraction factor on unsuccessful iterations, in (0, 1).
    pub delta: f64,
    /// Sufficient decrease constant.
    pub sigma: f64,
    /// Expansion factor on success, > 1.
    pub tau: f64,
    /// Floor for the tentative step after a success.
    pub alpha_bar: f64,
    pub initial_step: f64,
    /// The run stops once the tentative step drops below this.
    pub min_step: f64,
    pub max_function_evaluations: usize,
    pub directions: DirectionPolicy,
    /// Scale the diagonal directions to unit length.
    pub normalize_diagonals: bool,
    pub ordering: OrderingPolicy,
    /// Poll every direction in the first iteration and take the best
    /// successful one instead of the first.
    pub first_iteration_full_sweep: bool,
}

impl Default for FspConfig {
    /// The benchmark protocol: `delta = 0.5`, `sigma = 1e-3`, `tau = 1.025`,
    /// `alpha_bar = 1e-6`, stop below `1e-7`, 10000 evaluations, diagonals,
    /// dynamic ordering and a full first sweep.
    fn default() -> Self {
        Self {
            delta: 0.5,
            sigma: 1e-3,
            tau: 1.025,
            alpha_bar: 1e-6,
            initial_step: 1.0,
            min_step: 1e-7,
            max_function_evaluations: 10_000,
            directions: DirectionPolicy::CoordinatesPlusDiagonals,
            normalize_diagonals: false,
            ordering: OrderingPolicy::DynamicSuccessFirst,
            first_iteration_full_sweep: true,
        }
    }
}

impl FspConfig {
    /// The bare method: coordinate directions only, static order,
    /// opportunistic from the first iteration.
    pub fn plain() -> Self {
        Self {
            directions: DirectionPolicy::Coordinates,
            ordering: OrderingPolicy::Static,
            first_iteration_full_sweep: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0,1), got {}", self.delta));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.tau > 1.0 && self.tau.is_finite()) {
            return bad(format!("tau must exceed 1, got {}", self.tau));
        }
        if !(self.alpha_bar > 0.0 && self.alpha_bar.is_finite()) {
            return bad(format!("alpha_bar must be positive, got {}", self.alpha_bar));
        }
        if !(self.min_step > 0.0 && self.min_step.is_finite()) {
            return bad(format!("min_step must be positive, got {}", self.min_step));
        }
        if !(self.initial_step >= self.min_step && self.initial_step.is_finite()) {
            return bad(format!(
                "initial step {} is below the stopping threshold {}",
                self.initial_step, self.min_step
            ));
        }
        if self.max_function_evaluations == 0 {
            return bad("evaluation budget must be positive".into());
        }
        Ok(())
    }
}

/// Ordered polling directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Vector>,
    order: Vec<usize>,
}

impl DirectionSet {
    pub fn new(dimension: usize, policy: DirectionPolicy, normalize_diagonals: bool) -> Self {
        let unit = |i: usize, sign: f64| Vector::from_fn(dimension, |j, _| if j == i { sign } else { 0.0 });
        let mut directions: Vec<Vector> = (0..dimension)
            .map(|i| unit(i, 1.0))
            .chain((0..dimension).map(|i| unit(i, -1.0)))
            .collect();
        if policy == DirectionPolicy::CoordinatesPlusDiagonals {
            let scale = if normalize_diagonals {
                1.0 / (dimension as f64).sqrt()
            } else {
                1.0
            };
            directions.push(Vector::from_element(dimension, scale));
            directions.push(Vector::from_element(dimension, -scale));
        }
        let order = (0..directions.len()).collect();
        Self { directions, order }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn direction(&self, index: usize) -> &Vector {
        &self.directions[index]
    }

    /// Current scan order, as indices into the set.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Rotates the order so that `index` comes first.
    pub fn promote(&mut self, index: usize) {
        if let Some(pos) = self.order.iter().position(|&i| i == index) {
            self.order.rotate_left(pos);
        }
    }
}

/// Outcome of evaluating one poll point.
#[derive(Debug, Clone, PartialEq)]
pub struct PollOutcome {
    pub point: Vector,
    pub value: f64,
    /// The raw trial point was infeasible and had to be projected.
    pub projected: bool,
    pub accepted: bool,
}

/// Polls `gamma(step)` on the path from `anchor` along `direction`: one
/// objective evaluation, accepted under sufficient decrease. Non-finite
/// objective values are rejected.
pub fn poll_step(
    problem: &mut BlackBoxProblem,
    curves: &dyn CurveFactory,
    anchor: &Vector,
    f_anchor: f64,
    direction: &Vector,
    step: f64,
    sigma: f64,
) -> Result<PollOutcome> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("poll step must be positive, got {step}")));
    }
    let set = problem.shared_set();
    let path = curves.build(&set, anchor, direction)?;
    let trial = path.point_at(step)?;
    let value = problem.evaluate(&trial.point)?;
    let accepted = value.is_finite() && sufficient_decrease(f_anchor, value, sigma, step);
    Ok(PollOutcome {
        point: trial.point,
        value,
        projected: trial.projected,
        accepted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Success { accepted_step: f64 },
    Failure,
}

/// `max(alpha_bar, tau * alpha)` after a success, `delta * tentative` otherwise.
pub fn update_tentative_stepsize(tentative: f64, outcome: StepOutcome, config: &FspConfig) -> f64 {
    match outcome {
        StepOutcome::Success { accepted_step } => config.alpha_bar.max(config.tau * accepted_step),
        StepOutcome::Failure => config.delta * tentative,
    }
}

type Observer<'a> = dyn FnMut(&IterationRecord, &Vector) -> ControlFlow<()> + 'a;

/// Pattern search solver with pluggable curves and an optional per-iteration observer.
pub struct FspSolver<'a> {
    config: FspConfig,
    curves: Box<dyn CurveFactory + 'a>,
    observer: Option<Box<Observer<'a>>>,
    name: String,
}

impl<'a> FspSolver<'a> {
    pub fn new(config: FspConfig) -> Self {
        Self {
            config,
            curves: Box::new(ProjectionCurves),
            observer: None,
            name: "fsp".into(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Replaces the projection curves. The factory must produce feasible
    /// paths that vary continuously with anchor and direction.
    pub fn with_curves(mut self, curves: impl CurveFactory + 'a) -> Self {
        self.curves = Box::new(curves);
        self
    }

    /// Called after every iteration; returning `Break` ends the run with
    /// [`Termination::UserStop`].
    pub fn with_observer(
        mut self,
        observer: impl FnMut(&IterationRecord, &Vector) -> ControlFlow<()> + 'a,
    ) -> Self {
        self.observer = Some(Box::new(observer));
        self
    }

    pub fn config(&self) -> &FspConfig {
        &self.config
    }

    pub fn solve(&mut self, problem: &mut BlackBoxProblem) -> Result<SolverRun> {
        let config = self.config.clone();
        config.validate()?;
        let start = problem.start().clone();
        if !problem.set().contains(&start)? {
            return Err(Error::Domain("start point is infeasible".into()));
        }

        let base_count = problem.evaluations();
        let budget = config.max_function_evaluations;
        let used = |p: &BlackBoxProblem| p.evaluations() - base_count;

        let mut directions =
            DirectionSet::new(problem.dimension(), config.directions, config.normalize_diagonals);
        let mut history = HistoryRecorder::new();
        let mut n_p = 0usize;

        let mut x = start;
        let mut fx = problem.evaluate(&x)?;
        history.record(used(problem), fx);
        let initial_value = fx;

        let mut iterates = vec![x.clone()];
        let mut iterations = Vec::new();
        let mut tentative = config.initial_step;
        let mut k = 0usize;

        let termination = loop {
            if tentative < config.min_step {
                break Termination::StepsizeBelowThreshold;
            }
            if used(problem) >= budget {
                break Termination::BudgetExhausted;
            }

            let full_sweep = k == 0 && config.first_iteration_full_sweep;
            let order = directions.order().to_vec();
            let mut chosen: Option<(usize, PollOutcome)> = None;
            let mut polls = 0;
            let mut non_finite = 0;
            let mut complete = true;

            for &i in &order {
                if used(problem) >= budget {
                    complete = false;
                    break;
                }
                let outcome = poll_step(
                    problem,
                    self.curves.as_ref(),
                    &x,
                    fx,
                    directions.direction(i),
                    tentative,
                    config.sigma,
                )?;
                polls += 1;
                if outcome.projected {
                    n_p += 1;
                }
                if !outcome.value.is_finite() {
                    non_finite += 1;
                }
                history.record(used(problem), outcome.value);
                if !outcome.accepted {
                    continue;
                }
                if full_sweep {
                    let better = match &chosen {
                        None => true,
                        Some((j, best)) => {
                            outcome.value < best.value || (outcome.value == best.value && i < *j)
                        }
                    };
                    if better {
                        chosen = Some((i, outcome));
                    }
                } else {
                    chosen = Some((i, outcome));
                    break;
                }
            }

            let f_before = fx;
            let record = match chosen {
                Some((i, outcome)) => {
                    let accepted_step = tentative;
                    x = outcome.point;
                    fx = outcome.value;
                    let next = update_tentative_stepsize(
                        tentative,
                        StepOutcome::Success { accepted_step },
                        &config,
                    );
                    if config.ordering == OrderingPolicy::DynamicSuccessFirst {
                        directions.promote(i);
                    }
                    let record = IterationRecord {
                        k,
                        success: true,
                        direction: Some(i),
                        tentative_step: tentative,
                        accepted_step,
                        f_before,
                        f_after: fx,
                        n_f: used(problem),
                        n_p,
                        polls,
                        non_finite,
                        complete,
                        gradient_norm: None,
                        stationarity: None,
                    };
                    tentative = next;
                    record
                }
                None => {
                    let record = IterationRecord {
                        k,
                        success: false,
                        direction: None,
                        tentative_step: tentative,
                        accepted_step: 0.0,
                        f_before,
                        f_after: fx,
                        n_f: used(problem),
                        n_p,
                        polls,
                        non_finite,
                        complete,
                        gradient_norm: None,
                        stationarity: None,
                    };
                    if complete {
                        tentative =
                            update_tentative_stepsize(tentative, StepOutcome::Failure, &config);
                    }
                    record
                }
            };
            iterates.push(x.clone());
            let stop = match self.observer.as_mut() {
                Some(observe) => observe(&record, &x).is_break(),
                None => false,
            };
            iterations.push(record);
            k += 1;
            if !complete {
                break Termination::BudgetExhausted;
            }
            if stop {
                break Termination::UserStop;
            }
        };

        let mut metadata = vec![
            ("curves".to_string(), "projection".to_string()),
            (
                "directions".into(),
                match (config.directions, config.normalize_diagonals) {
                    (DirectionPolicy::Coordinates, _) => "coordinates".into(),
                    (DirectionPolicy::CoordinatesPlusDiagonals, false) => "coordinates+diagonals".into(),
                    (DirectionPolicy::CoordinatesPlusDiagonals, true) => {
                        "coordinates+normalized-diagonals".into()
                    }
                },
            ),
            (
                "ordering".into(),
                match config.ordering {
                    OrderingPolicy::Static => "static".into(),
                    OrderingPolicy::DynamicSuccessFirst => "dynamic-cyclic".into(),
                },
            ),
            (
                "first_iteration".into(),
                if config.first_iteration_full_sweep {
                    "full-sweep-best-decrease".into()
                } else {
                    "opportunistic".into()
                },
            ),
            ("start".into(), "canonical start projected onto the set".into()),
        ];
        metadata.push(("budget".into(), budget.to_string()));

        Ok(SolverRun {
            solver: self.name.clone(),
            problem: problem.name().to_string(),
            iterates,
            iterations,
            n_f: used(problem),
            n_p,
            best_point: x,
            best_value: fx,
            initial_value,
            final_tentative_step: tentative,
            termination,
            history: history.entries,
            metadata,
        })
    }
}

/// Runs the pattern search with projection curves.
pub fn solve(problem: &mut BlackBoxProblem, config: &FspConfig) -> Result<SolverRun> {
    FspSolver::new(config.clone()).solve(problem)
}
