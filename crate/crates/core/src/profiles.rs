//! Performance profiles and data profiles over a problems x solvers matrix.
//!
//! Performance profile: with `t_{p,s}` the cost of solver `s` on problem
//! `p` (infinite for failed cells), `r_{p,s} = t_{p,s} / min_s t_{p,s}` and
//! `rho_s(tau)` is the fraction of problems with `r_{p,s} <= tau`. Costs are
//! floored at 1 so that runs needing no projections still produce finite
//! ratios.
//!
//! Data profile: a problem counts as solved once the best value found drops
//! to `f_L + eps (f(x0) - f_L)`, where `f_L` is the best value any solver
//! reached. `d_s(kappa)` is the fraction of problems solved within
//! `kappa (n + 1)` evaluations.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::run::SolverRun;
use crate::text::sig12;

/// Tolerances used for data profiles by default.
pub const DEFAULT_EPSILONS: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMetric {
    Evaluations,
    Projections,
}

impl CostMetric {
    pub fn as_str(&self) -> &'static str {
        match self {
            CostMetric::Evaluations => "n_f",
            CostMetric::Projections => "n_p",
        }
    }
}

impl std::str::FromStr for CostMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n_f" | "nf" | "evaluations" => Ok(CostMetric::Evaluations),
            "n_p" | "np" | "projections" => Ok(CostMetric::Projections),
            other => Err(Error::Config(format!("unknown cost metric `{other}`"))),
        }
    }
}

/// Summary of one (problem, solver) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub solver: String,
    pub n_f: usize,
    pub n_p: usize,
    pub f_best: f64,
    pub terminated: String,
    /// `(cumulative n_f, best value so far)`; nondecreasing in the first
    /// component, nonincreasing in the second.
    pub history: Vec<(usize, f64)>,
}

impl RunRecord {
    pub fn from_run(run: &SolverRun) -> Self {
        Self {
            problem: run.problem.clone(),
            solver: run.solver.clone(),
            n_f: run.n_f,
            n_p: run.n_p,
            f_best: run.best_value,
            terminated: run.termination.to_string(),
            history: run.history.clone(),
        }
    }

    fn cost(&self, metric: CostMetric) -> f64 {
        let c = match metric {
            CostMetric::Evaluations => self.n_f,
            CostMetric::Projections => self.n_p,
        };
        c.max(1) as f64
    }

    fn lowest_value(&self) -> f64 {
        let hist = self.history.last().map(|h| h.1).unwrap_or(f64::INFINITY);
        if self.f_best.is_finite() {
            self.f_best.min(hist)
        } else {
            hist
        }
    }

    /// Checks the history invariants.
    pub fn history_is_monotone(&self) -> bool {
        self.history
            .windows(2)
            .all(|w| w[0].0 <= w[1].0 && !(w[1].1 > w[0].1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Done(RunRecord),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInfo {
    pub id: String,
    pub dimension: usize,
    /// `f(x0)`; when absent it is read from the first history entry.
    pub initial_value: Option<f64>,
    /// Replaces the computed `f_L` when set.
    pub reference_value: Option<f64>,
}

impl ProblemInfo {
    pub fn new(id: impl Into<String>, dimension: usize) -> Self {
        Self {
            id: id.into(),
            dimension,
            initial_value: None,
            reference_value: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProfileMatrix {
    problems: Vec<ProblemInfo>,
    solvers: Vec<String>,
    cells: BTreeMap<(String, String), Cell>,
}

/// A per-solver step function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverProfile {
    pub solver: String,
    /// `(tau or kappa, value)`.
    pub points: Vec<(f64, f64)>,
}

impl SolverProfile {
    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == x).map(|p| p.1)
    }
}

impl ProfileMatrix {
    pub fn new(problems: Vec<ProblemInfo>, solvers: Vec<String>) -> Self {
        Self {
            problems,
            solvers,
            cells: BTreeMap::new(),
        }
    }

    pub fn problems(&self) -> &[ProblemInfo] {
        &self.problems
    }

    pub fn solvers(&self) -> &[String] {
        &self.solvers
    }

    pub fn insert(&mut self, problem: &str, solver: &str, cell: Cell) -> Result<()> {
        if !self.problems.iter().any(|p| p.id == problem) {
            return Err(Error::NotFound(format!("problem `{problem}` not in matrix")));
        }
        if !self.solvers.iter().any(|s| s == solver) {
            return Err(Error::NotFound(format!("solver `{solver}` not in matrix")));
        }
        self.cells
            .insert((problem.to_string(), solver.to_string()), cell);
        Ok(())
    }

    pub fn insert_run(&mut self, record: RunRecord) -> Result<()> {
        let (p, s) = (record.problem.clone(), record.solver.clone());
        self.insert(&p, &s, Cell::Done(record))
    }

    pub fn cell(&self, problem: &str, solver: &str) -> Option<&Cell> {
        self.cells.get(&(problem.to_string(), solver.to_string()))
    }

    /// Completed records in problem-major, solver-minor order.
    pub fn records(&self) -> Vec<&RunRecord> {
        let mut out = Vec::new();
        for p in &self.problems {
            for s in &self.solvers {
                if let Some(Cell::Done(r)) = self.cell(&p.id, s) {
                    out.push(r);
                }
            }
        }
        out
    }

    pub fn has_failures(&self) -> bool {
        self.cells.values().any(|c| matches!(c, Cell::Failed(_)))
    }

    fn check_complete(&self) -> Result<()> {
        if self.problems.is_empty() || self.solvers.is_empty() {
            return Err(Error::Domain("profile matrix is empty".into()));
        }
        for p in &self.problems {
            for s in &self.solvers {
                if self.cell(&p.id, s).is_none() {
                    return Err(Error::Domain(format!(
                        "cell ({}, {s}) is neither filled nor marked failed",
                        p.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Ratios `r_{p,s}` in problem-major order; infinite for failed cells.
    pub fn performance_ratios(&self, metric: CostMetric) -> Result<Vec<Vec<f64>>> {
        self.check_complete()?;
        let mut ratios = Vec::with_capacity(self.problems.len());
        for p in &self.problems {
            let costs: Vec<f64> = self
                .solvers
                .iter()
                .map(|s| match self.cell(&p.id, s) {
                    Some(Cell::Done(r)) => r.cost(metric),
                    _ => f64::INFINITY,
                })
                .collect();
            let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
            ratios.push(
                costs
                    .iter()
                    .map(|&c| if best.is_finite() { c / best } else { f64::INFINITY })
                    .collect(),
            );
        }
        Ok(ratios)
    }

    /// All distinct finite ratios, sorted; the natural breakpoints of `rho_s`.
    pub fn ratio_breakpoints(&self, metric: CostMetric) -> Result<Vec<f64>> {
        let mut taus: Vec<f64> = self
            .performance_ratios(metric)?
            .into_iter()
            .flatten()
            .filter(|r| r.is_finite())
            .collect();
        taus.push(1.0);
        taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
        taus.dedup();
        Ok(taus)
    }

    pub fn performance_profile(&self, metric: CostMetric, taus: &[f64]) -> Result<Vec<SolverProfile>> {
        let ratios = self.performance_ratios(metric)?;
        let np = self.problems.len() as f64;
        Ok(self
            .solvers
            .iter()
            .enumerate()
            .map(|(s, name)| SolverProfile {
                solver: name.clone(),
                points: taus
                    .iter()
                    .map(|&tau| {
                        let hits = ratios.iter().filter(|row| row[s] <= tau).count();
                        (tau, hits as f64 / np)
                    })
                    .collect(),
            })
            .collect())
    }

    /// `f_L` for a problem: its reference value if registered, else the best
    /// value over all completed cells.
    pub fn lowest_value(&self, problem: &ProblemInfo) -> f64 {
        if let Some(r) = problem.reference_value {
            return r;
        }
        self.solvers
            .iter()
            .filter_map(|s| match self.cell(&problem.id, s) {
                Some(Cell::Done(r)) => Some(r.lowest_value()),
                _ => None,
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn initial_value(&self, problem: &ProblemInfo) -> Option<f64> {
        problem.initial_value.or_else(|| {
            self.solvers.iter().find_map(|s| match self.cell(&problem.id, s) {
                Some(Cell::Done(r)) => r.history.first().map(|h| h.1),
                _ => None,
            })
        })
    }

    /// Evaluations each solver needed to enter the tolerance band of each
    /// problem; `None` if it never did. Zero when `f(x0) = f_L`.
    pub fn solve_costs(&self, epsilon: f64) -> Result<Vec<Vec<Option<usize>>>> {
        self.check_complete()?;
        let mut out = Vec::with_capacity(self.problems.len());
        for p in &self.problems {
            let f_low = self.lowest_value(p);
            if !f_low.is_finite() {
                // Every cell failed: nobody solves it.
                out.push(vec![None; self.solvers.len()]);
                continue;
            }
            let f0 = self.initial_value(p).ok_or_else(|| {
                Error::Domain(format!("problem `{}` has no initial value", p.id))
            })?;
            let trivially = f0 == f_low;
            let threshold = f_low + epsilon * (f0 - f_low);
            let row = self
                .solvers
                .iter()
                .map(|s| match self.cell(&p.id, s) {
                    Some(Cell::Done(r)) => {
                        if trivially {
                            Some(0)
                        } else {
                            r.history
                                .iter()
                                .find(|(_, best)| *best <= threshold)
                                .map(|(n, _)| *n)
                        }
                    }
                    _ => None,
                })
                .collect();
            out.push(row);
        }
        Ok(out)
    }

    pub fn data_profile(&self, epsilon: f64, kappas: &[f64]) -> Result<Vec<SolverProfile>> {
        let costs = self.solve_costs(epsilon)?;
        let np = self.problems.len() as f64;
        Ok(self
            .solvers
            .iter()
            .enumerate()
            .map(|(s, name)| SolverProfile {
                solver: name.clone(),
                points: kappas
                    .iter()
                    .map(|&kappa| {
                        let solved = self
                            .problems
                            .iter()
                            .zip(&costs)
                            .filter(|(p, row)| match row[s] {
                                Some(n) => n as f64 <= kappa * (p.dimension + 1) as f64,
                                None => false,
                            })
                            .count();
                        (kappa, solved as f64 / np)
                    })
                    .collect(),
            })
            .collect())
    }

    /// Budget grid `0, 1, ..., max` in units of `n + 1` evaluations, where
    /// `max` covers the longest recorded run.
    pub fn kappa_grid(&self) -> Vec<f64> {
        let max = self
            .problems
            .iter()
            .flat_map(|p| {
                self.solvers.iter().filter_map(move |s| match self.cell(&p.id, s) {
                    Some(Cell::Done(r)) => Some((r.n_f as f64 / (p.dimension + 1) as f64).ceil()),
                    _ => None,
                })
            })
            .fold(0.0, f64::max);
        (0..=max as usize).map(|k| k as f64).collect()
    }
}

pub fn write_runs_csv<W: Write>(mut w: W, matrix: &ProfileMatrix) -> io::Result<()> {
    writeln!(w, "problem,solver,n_f,n_p,f_best,terminated")?;
    for p in matrix.problems() {
        for s in matrix.solvers() {
            match matrix.cell(&p.id, s) {
                Some(Cell::Done(r)) => writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    r.problem,
                    r.solver,
                    r.n_f,
                    r.n_p,
                    sig12(r.f_best),
                    r.terminated
                )?,
                Some(Cell::Failed(_)) => writeln!(w, "{},{},,,,failed", p.id, s)?,
                None => {}
            }
        }
    }
    Ok(())
}

pub fn write_history_csv<W: Write>(mut w: W, matrix: &ProfileMatrix) -> io::Result<()> {
    writeln!(w, "problem,solver,eval_index,f_best_so_far")?;
    for r in matrix.records() {
        for (n, best) in &r.history {
            writeln!(w, "{},{},{},{}", r.problem, r.solver, n, sig12(*best))?;
        }
    }
    Ok(())
}

pub fn write_profile_csv<W: Write>(mut w: W, profiles: &[SolverProfile]) -> io::Result<()> {
    writeln!(w, "solver,tau_or_kappa,value")?;
    for p in profiles {
        for (x, v) in &p.points {
            writeln!(w, "{},{},{}", p.solver, sig12(*x), sig12(*v))?;
        }
    }
    Ok(())
}

/// One data block per solver, separated by two blank lines (`index` in gnuplot).
pub fn write_gnuplot<W: Write>(mut w: W, profiles: &[SolverProfile]) -> io::Result<()> {
    for (i, p) in profiles.iter().enumerate() {
        if i > 0 {
            writeln!(w)?;
            writeln!(w)?;
        }
        writeln!(w, "# {}", p.solver)?;
        for (x, v) in &p.points {
            writeln!(w, "{} {}", sig12(*x), sig12(*v))?;
        }
    }
    Ok(())
}

/// A row of the runs CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub problem: String,
    pub solver: String,
    pub n_f: Option<usize>,
    pub n_p: Option<usize>,
    pub f_best: Option<f64>,
    pub terminated: String,
}

pub fn parse_runs_csv(text: &str) -> Result<Vec<RunRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("problem,solver,n_f,n_p,f_best,terminated") => {}
        other => return Err(Error::Config(format!("unexpected runs header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Config(format!("malformed runs row `{line}`")));
            }
            let opt_usize = |s: &str| -> Result<Option<usize>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse()
                        .map(Some)
                        .map_err(|_| Error::Config(format!("bad count `{s}`")))
                }
            };
            Ok(RunRow {
                problem: f[0].to_string(),
                solver: f[1].to_string(),
                n_f: opt_usize(f[2])?,
                n_p: opt_usize(f[3])?,
                f_best: if f[4].is_empty() {
                    None
                } else {
                    Some(
                        f[4].parse()
                            .map_err(|_| Error::Config(format!("bad value `{}`", f[4])))?,
                    )
                },
                terminated: f[5].to_string(),
            })
        })
        .collect()
}
