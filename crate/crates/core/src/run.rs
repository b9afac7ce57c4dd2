//! Solver traces shared by the pattern search and the first-order method.

use std::fmt;
use std::io::{self, Write};

use crate::text::sig12;
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    BudgetExhausted,
    StepsizeBelowThreshold,
    UserStop,
    /// First-order method: projected gradient below tolerance.
    Stationary,
    IterationLimit,
    /// First-order method: no acceptable step within the backtracking cap.
    LineSearchFailure,
    /// First-order method: the required decrease `sigma t^2` fell below the
    /// rounding level of `f(x^k)` before any step was accepted.
    PrecisionLimit,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::BudgetExhausted => "budget_exhausted",
            Termination::StepsizeBelowThreshold => "stepsize_below_threshold",
            Termination::UserStop => "user_stop",
            Termination::Stationary => "stationary",
            Termination::IterationLimit => "iteration_limit",
            Termination::LineSearchFailure => "line_search_failure",
            Termination::PrecisionLimit => "precision_limit",
        }
    }

    /// Whether the run ended abnormally.
    pub fn is_failure(&self) -> bool {
        matches!(self, Termination::LineSearchFailure)
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Termination {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Ok(match s {
            "budget_exhausted" => Termination::BudgetExhausted,
            "stepsize_below_threshold" => Termination::StepsizeBelowThreshold,
            "user_stop" => Termination::UserStop,
            "stationary" => Termination::Stationary,
            "iteration_limit" => Termination::IterationLimit,
            "line_search_failure" => Termination::LineSearchFailure,
            "precision_limit" => Termination::PrecisionLimit,
            other => return Err(crate::Error::Config(format!("unknown termination `{other}`"))),
        })
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub success: bool,
    /// Index into the direction set of the accepted direction.
    pub direction: Option<usize>,
    /// Tentative stepsize tried in this iteration.
    pub tentative_step: f64,
    /// Accepted stepsize, zero when unsuccessful.
    pub accepted_step: f64,
    /// `f(x^k)`.
    pub f_before: f64,
    /// `f(x^{k+1})`.
    pub f_after: f64,
    /// Cumulative counters after the iteration.
    pub n_f: usize,
    pub n_p: usize,
    /// Directions polled (pattern search) or trial steps (first-order).
    pub polls: usize,
    /// Polls whose objective value was not finite.
    pub non_finite: usize,
    /// False when the budget ran out in the middle of the iteration.
    pub complete: bool,
    pub gradient_norm: Option<f64>,
    pub stationarity: Option<f64>,
}

/// Full trace of a solver run.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub solver: String,
    pub problem: String,
    /// `x^0, x^1, ...`; one more entry than `iterations`.
    pub iterates: Vec<Vector>,
    pub iterations: Vec<IterationRecord>,
    pub n_f: usize,
    pub n_p: usize,
    pub best_point: Vector,
    pub best_value: f64,
    pub initial_value: f64,
    /// Tentative stepsize the next iteration would have used.
    pub final_tentative_step: f64,
    pub termination: Termination,
    /// `(cumulative n_f, best value so far)` after every evaluation.
    pub history: Vec<(usize, f64)>,
    pub metadata: Vec<(String, String)>,
}

/// `f_after <= f_before - sigma * step^2`, evaluated as a difference so that
/// an unchanged value never passes once `sigma * step^2` drops below the
/// rounding unit of `f_before`.
pub fn sufficient_decrease(f_before: f64, f_after: f64, sigma: f64, step: f64) -> bool {
    f_before - f_after >= sigma * step * step
}

impl SolverRun {
    /// Sufficient-decrease check `f(x^{k+1}) <= f(x^k) - sigma * alpha_k^2`
    /// on every iteration; returns the offending iteration index.
    pub fn descent_violation(&self, sigma: f64) -> Option<usize> {
        self.iterations
            .iter()
            .find(|it| !sufficient_decrease(it.f_before, it.f_after, sigma, it.accepted_step))
            .map(|it| it.k)
    }

    pub fn metadata(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Writes per-iteration rows followed by a `summary` row.
    ///
    /// Columns: `k,success,direction,tentative_step,accepted_step,f,n_f,n_p`
    /// with `gradient_norm,stationarity` appended when `with_gradient` is set.
    pub fn write_trace_csv<W: Write>(&self, mut w: W, with_gradient: bool) -> io::Result<()> {
        let extra = if with_gradient {
            ",gradient_norm,stationarity"
        } else {
            ""
        };
        writeln!(w, "k,success,direction,tentative_step,accepted_step,f,n_f,n_p{extra}")?;
        for it in &self.iterations {
            write!(
                w,
                "{},{},{},{},{},{},{},{}",
                it.k,
                it.success as u8,
                it.direction.map(|d| d.to_string()).unwrap_or_default(),
                sig12(it.tentative_step),
                sig12(it.accepted_step),
                sig12(it.f_before),
                it.n_f,
                it.n_p
            )?;
            if with_gradient {
                write!(
                    w,
                    ",{},{}",
                    it.gradient_norm.map(sig12).unwrap_or_default(),
                    it.stationarity.map(sig12).unwrap_or_default()
                )?;
            }
            writeln!(w)?;
        }
        write!(
            w,
            "summary,{},,{},,{},{},{}",
            self.termination,
            sig12(self.final_tentative_step),
            sig12(self.best_value),
            self.n_f,
            self.n_p
        )?;
        if with_gradient {
            let last = self.iterations.last();
            write!(
                w,
                ",{},{}",
                last.and_then(|it| it.gradient_norm).map(sig12).unwrap_or_default(),
                last.and_then(|it| it.stationarity).map(sig12).unwrap_or_default()
            )?;
        }
        writeln!(w)
    }
}

/// Tracks best-so-far values for the evaluation history.
#[derive(Debug, Default)]
pub(crate) struct HistoryRecorder {
    best: f64,
    pub(crate) entries: Vec<(usize, f64)>,
}

impl HistoryRecorder {
    pub(crate) fn new() -> Self {
        Self {
            best: f64::INFINITY,
            entries: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, n_f: usize, value: f64) {
        if value.is_finite() && value < self.best {
            self.best = value;
        }
        self.entries.push((n_f, self.best));
    }
}
