//! Single runs and benchmark campaigns with plain-text output.
//!
//! A campaign file is line oriented. Top-level `key=value` lines set the
//! global budget, output directory, job bound, seed and profile settings.
//! `[instance]` sections hold problem descriptors and `[solver.<name>]`
//! sections configure named solvers:
//!
//! ```text
//! budget=10000
//! out=results
//! metric=n_f
//! epsilons=1e-2,1e-4
//!
//! [instance]
//! problem=HS22
//! center=0
//!
//! [solver.fsp-default]
//!
//! [solver.slow]
//! kind=fsp
//! tau=1.0001
//! ```
//!
//! A solver section named after a built-in solver starts from that
//! configuration; other names need `kind=fsp` or `kind=fo`.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fo::{solve_fo, FoConfig};
use crate::fsp::{DirectionPolicy, FspConfig, FspSolver, OrderingPolicy};
use crate::problems::{BlackBoxProblem, ProblemInstance};
use crate::profiles::{
    write_gnuplot, write_history_csv, write_profile_csv, write_runs_csv, Cell, CostMetric,
    ProblemInfo, ProfileMatrix, RunRecord, DEFAULT_EPSILONS,
};
use crate::run::SolverRun;
use crate::stationarity::{stationarity_report, StationarityReport};
use crate::text::{key_value, parse_reals, sig12};

/// Names accepted by [`NamedSolver::builtin`].
pub const BUILTIN_SOLVERS: &[&str] = &[
    "fsp-default",
    "fsp-static",
    "fsp-coordinates",
    "fsp-normalized",
    "fsp-plain",
    "fo",
];

#[derive(Debug, Clone, PartialEq)]
pub enum SolverKind {
    Fsp(FspConfig),
    Fo(FoConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedSolver {
    pub name: String,
    pub kind: SolverKind,
}

impl NamedSolver {
    pub fn builtin(name: &str) -> Result<Self> {
        let fsp = |config| Ok(SolverKind::Fsp(config));
        let kind = match name {
            "fsp-default" => fsp(FspConfig::default()),
            "fsp-static" => fsp(FspConfig {
                ordering: OrderingPolicy::Static,
                ..FspConfig::default()
            }),
            "fsp-coordinates" => fsp(FspConfig {
                directions: DirectionPolicy::Coordinates,
                ..FspConfig::default()
            }),
            "fsp-normalized" => fsp(FspConfig {
                normalize_diagonals: true,
                ..FspConfig::default()
            }),
            "fsp-plain" => fsp(FspConfig::plain()),
            "fo" => Ok(SolverKind::Fo(FoConfig::default())),
            other => Err(Error::NotFound(format!(
                "unknown solver `{other}`; built-ins are {}",
                BUILTIN_SOLVERS.join(", ")
            ))),
        }?;
        Ok(Self {
            name: name.to_string(),
            kind,
        })
    }

    /// Builds a solver from `key=value` settings, starting from the built-in
    /// of the same name when there is one.
    pub fn from_settings(name: &str, settings: &[(String, String)]) -> Result<Self> {
        let declared = settings.iter().find(|(k, _)| k == "kind").map(|(_, v)| v.as_str());
        let builtin = Self::builtin(name).ok();
        let mut solver = match (builtin, declared) {
            (Some(base), None) => base,
            (Some(base), Some(kind)) if base.kind_name() == kind => base,
            (_, Some(kind)) => Self {
                name: name.into(),
                kind: match kind {
                    "fsp" => SolverKind::Fsp(FspConfig::default()),
                    "fo" => SolverKind::Fo(FoConfig::default()),
                    other => {
                        return Err(Error::Config(format!("solver `{name}`: unknown kind `{other}`")))
                    }
                },
            },
            (None, None) => {
                return Err(Error::Config(format!(
                    "solver `{name}` is not built in and has no `kind`"
                )))
            }
        };
        for (key, value) in settings.iter().filter(|(k, _)| k != "kind") {
            solver.set(key, value)?;
        }
        solver.validate()?;
        Ok(solver)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let name = self.name.clone();
        let real = || -> Result<f64> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("solver `{name}`: `{key}` expects a real, got `{value}`")))
        };
        let count = || -> Result<usize> {
            value.parse().map_err(|_| {
                Error::Config(format!("solver `{name}`: `{key}` expects a count, got `{value}`"))
            })
        };
        let flag = || -> Result<bool> {
            value.parse().map_err(|_| {
                Error::Config(format!("solver `{name}`: `{key}` expects true/false, got `{value}`"))
            })
        };
        match &mut self.kind {
            SolverKind::Fsp(c) => match key {
                "delta" => c.delta = real()?,
                "sigma" => c.sigma = real()?,
                "tau" => c.tau = real()?,
                "alpha_bar" => c.alpha_bar = real()?,
                "initial_step" => c.initial_step = real()?,
                "min_step" => c.min_step = real()?,
                "normalize" => c.normalize_diagonals = flag()?,
                "full_sweep" => c.first_iteration_full_sweep = flag()?,
                "directions" => {
                    c.directions = match value {
                        "coordinates" => DirectionPolicy::Coordinates,
                        "diagonals" => DirectionPolicy::CoordinatesPlusDiagonals,
                        _ => return Err(Error::Config(format!("unknown directions `{value}`"))),
                    }
                }
                "ordering" => {
                    c.ordering = match value {
                        "static" => OrderingPolicy::Static,
                        "dynamic" => OrderingPolicy::DynamicSuccessFirst,
                        _ => return Err(Error::Config(format!("unknown ordering `{value}`"))),
                    }
                }
                _ => return Err(Error::Config(format!("solver `{name}`: unknown key `{key}`"))),
            },
            SolverKind::Fo(c) => match key {
                "delta" => c.delta = real()?,
                "sigma" => c.sigma = real()?,
                "initial_step" => c.initial_step = real()?,
                "tolerance" => c.stationarity_tolerance = real()?,
                "max_iterations" => c.max_iterations = count()?,
                "max_backtracks" => c.max_backtracks = count()?,
                _ => return Err(Error::Config(format!("solver `{name}`: unknown key `{key}`"))),
            },
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SolverKind::Fsp(_) => "fsp",
            SolverKind::Fo(_) => "fo",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            SolverKind::Fsp(c) => c.validate(),
            SolverKind::Fo(c) => c.validate(),
        }
    }

    pub fn sigma(&self) -> f64 {
        match &self.kind {
            SolverKind::Fsp(c) => c.sigma,
            SolverKind::Fo(c) => c.sigma,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        match &mut self.kind {
            SolverKind::Fsp(c) => c.max_function_evaluations = budget,
            SolverKind::Fo(c) => c.max_function_evaluations = budget,
        }
        self
    }

    pub fn solve(&self, problem: &mut BlackBoxProblem) -> Result<SolverRun> {
        match &self.kind {
            SolverKind::Fsp(c) => FspSolver::new(c.clone())
                .with_name(self.name.clone())
                .solve(problem),
            SolverKind::Fo(c) => {
                let mut run = solve_fo(problem, c)?;
                run.solver = self.name.clone();
                Ok(run)
            }
        }
    }
}

/// Result of one (instance, solver) cell.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub run: SolverRun,
    /// Present when the problem exposes a gradient.
    pub stationarity: Option<StationarityReport>,
}

impl SingleRun {
    /// `problem solver f_best n_f n_p terminated`.
    pub fn summary_line(&self) -> String {
        let r = &self.run;
        format!(
            "{} {} {} {} {} {}",
            r.problem,
            r.solver,
            sig12(r.best_value),
            r.n_f,
            r.n_p,
            r.termination
        )
    }

    pub fn summary_text(&self) -> String {
        let r = &self.run;
        let mut s = String::new();
        let _ = writeln!(s, "problem={}", r.problem);
        let _ = writeln!(s, "solver={}", r.solver);
        let _ = writeln!(s, "f_best={}", sig12(r.best_value));
        let _ = writeln!(s, "f_initial={}", sig12(r.initial_value));
        let _ = writeln!(s, "n_f={}", r.n_f);
        let _ = writeln!(s, "n_p={}", r.n_p);
        let _ = writeln!(s, "iterations={}", r.iterations.len());
        let _ = writeln!(s, "terminated={}", r.termination);
        let _ = writeln!(s, "final_tentative_step={}", sig12(r.final_tentative_step));
        let point: Vec<String> = r.best_point.iter().map(|v| sig12(*v)).collect();
        let _ = writeln!(s, "x_best={}", point.join(","));
        for (k, v) in &r.metadata {
            let _ = writeln!(s, "meta.{k}={v}");
        }
        s
    }

    pub fn stationarity_text(&self) -> Option<String> {
        self.stationarity.as_ref().map(|rep| {
            let point: Vec<String> = rep.point.iter().map(|v| sig12(*v)).collect();
            format!(
                "point={}\nmeasure={}\ngradient={}\ncone={}\n",
                point.join(","),
                sig12(rep.measure),
                rep.gradient_source,
                rep.cone_case
            )
        })
    }

    /// Writes `<stem>.csv`, `<stem>.summary` and, when available,
    /// `<stem>.stationarity` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let stem = format!("{}__{}", self.run.problem, self.run.solver);
        let with_gradient = self.run.iterations.iter().any(|it| it.gradient_norm.is_some());
        let mut trace = BufWriter::new(File::create(dir.join(format!("{stem}.csv")))?);
        self.run.write_trace_csv(&mut trace, with_gradient)?;
        trace.flush()?;
        fs::write(dir.join(format!("{stem}.summary")), self.summary_text())?;
        if let Some(text) = self.stationarity_text() {
            fs::write(dir.join(format!("{stem}.stationarity")), text)?;
        }
        Ok(())
    }
}

/// Builds the instance, runs the solver under `budget`, and attaches the
/// stationarity report at the returned point.
pub fn run_single(instance: &ProblemInstance, solver: &NamedSolver, budget: usize) -> Result<SingleRun> {
    let mut problem = instance.build()?;
    let budget = instance.budget.unwrap_or(budget);
    let solver = solver.clone().with_budget(budget);
    let before = problem.evaluations();
    let run = solver.solve(&mut problem)?;
    if run.n_f != problem.evaluations() - before {
        return Err(Error::Invariant(format!(
            "recorded n_f {} differs from the oracle counter {}",
            run.n_f,
            problem.evaluations() - before
        )));
    }
    let stationarity = match problem.gradient(&run.best_point) {
        Some(g) => Some(stationarity_report(
            problem.set(),
            &run.best_point,
            |x| problem.objective().value(x),
            Some(g),
        )?),
        None => None,
    };
    Ok(SingleRun { run, stationarity })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub instances: Vec<ProblemInstance>,
    pub solvers: Vec<NamedSolver>,
    pub budget: usize,
    pub out: PathBuf,
    pub jobs: usize,
    /// Reserved; every shipped solver is deterministic.
    pub seed: u64,
    pub metric: CostMetric,
    pub epsilons: Vec<f64>,
}

impl CampaignConfig {
    pub fn new(instances: Vec<ProblemInstance>, solvers: Vec<NamedSolver>) -> Self {
        Self {
            instances,
            solvers,
            budget: 10_000,
            out: PathBuf::from("campaign-out"),
            jobs: 1,
            seed: 0,
            metric: CostMetric::Evaluations,
            epsilons: DEFAULT_EPSILONS.to_vec(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        fs::read_to_string(path)?.parse()
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() {
            return Err(Error::Config("campaign has no problem instances".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::Config("campaign has no solvers".into()));
        }
        let mut names = HashSet::new();
        for s in &self.solvers {
            if !names.insert(s.name.as_str()) {
                return Err(Error::Config(format!("duplicate solver name `{}`", s.name)));
            }
            s.validate()?;
        }
        let mut labels = HashSet::new();
        for inst in &self.instances {
            inst.build()?;
            if !labels.insert(inst.label()) {
                return Err(Error::Config(format!(
                    "duplicate instance label `{}`",
                    inst.label()
                )));
            }
        }
        if self.budget == 0 || self.jobs == 0 {
            return Err(Error::Config("budget and jobs must be positive".into()));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::Config("profile tolerances must lie in (0,1)".into()));
        }
        Ok(())
    }
}

enum Section {
    Top,
    Instance(Vec<String>),
    Solver(String, Vec<(String, String)>),
}

impl FromStr for CampaignConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut config = CampaignConfig::new(Vec::new(), Vec::new());
        let mut section = Section::Top;
        let close = |section: Section, config: &mut CampaignConfig| -> Result<()> {
            match section {
                Section::Top => {}
                Section::Instance(lines) => config
                    .instances
                    .push(ProblemInstance::from_lines(lines.iter().map(String::as_str))?),
                Section::Solver(name, settings) => config
                    .solvers
                    .push(NamedSolver::from_settings(&name, &settings)?),
            }
            Ok(())
        };
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let next = if header == "instance" {
                    Section::Instance(Vec::new())
                } else if let Some(name) = header.strip_prefix("solver.") {
                    if name.is_empty() {
                        return Err(Error::Config("empty solver name".into()));
                    }
                    Section::Solver(name.to_string(), Vec::new())
                } else {
                    return Err(Error::Config(format!("unknown section `[{header}]`")));
                };
                close(std::mem::replace(&mut section, next), &mut config)?;
                continue;
            }
            match &mut section {
                Section::Instance(lines) => lines.push(line.to_string()),
                Section::Solver(_, settings) => {
                    if let Some((k, v)) = key_value(line)? {
                        settings.push((k.to_string(), v.to_string()));
                    }
                }
                Section::Top => {
                    let Some((key, value)) = key_value(line)? else {
                        continue;
                    };
                    let count = || -> Result<usize> {
                        value
                            .parse()
                            .map_err(|_| Error::Config(format!("`{key}` expects a count, got `{value}`")))
                    };
                    match key {
                        "budget" => config.budget = count()?,
                        "jobs" => config.jobs = count()?,
                        "seed" => {
                            config.seed = value
                                .parse()
                                .map_err(|_| Error::Config(format!("bad seed `{value}`")))?
                        }
                        "out" => config.out = PathBuf::from(value),
                        "metric" => config.metric = value.parse()?,
                        "epsilons" => config.epsilons = parse_reals(value)?,
                        other => return Err(Error::Config(format!("unknown campaign key `{other}`"))),
                    }
                }
            }
        }
        close(section, &mut config)?;
        config.validate()?;
        Ok(config)
    }
}

/// What a finished campaign produced.
#[derive(Debug)]
pub struct CampaignOutcome {
    pub matrix: ProfileMatrix,
    /// Cells that raised an error, as `(instance, solver, message)`.
    pub failures: Vec<(String, String, String)>,
    pub files: Vec<PathBuf>,
}

/// Runs every (instance, solver) cell with at most `config.jobs` worker
/// threads and writes run records and profiles under `config.out`.
///
/// A failing cell is recorded in the matrix and the campaign carries on.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignOutcome> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = (0..config.instances.len())
        .flat_map(|i| (0..config.solvers.len()).map(move |s| (i, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: BTreeMap<(usize, usize), Result<SingleRun>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, s)| {
                let result = run_single(&config.instances[i], &config.solvers[s], config.budget);
                ((i, s), result)
            })
            .collect()
    });

    let runs_dir = config.out.join("runs");
    fs::create_dir_all(&runs_dir)?;
    let mut problems = Vec::with_capacity(config.instances.len());
    for inst in &config.instances {
        let built = inst.build()?;
        let mut info = ProblemInfo::new(inst.label(), built.dimension());
        info.initial_value = Some(built.objective().value(built.start()));
        problems.push(info);
    }
    let solvers = config.solvers.iter().map(|s| s.name.clone()).collect();
    let mut matrix = ProfileMatrix::new(problems, solvers);
    let mut failures = Vec::new();
    for ((i, s), result) in results {
        let label = config.instances[i].label();
        let solver = &config.solvers[s].name;
        match result {
            Ok(single) => {
                single.write_files(&runs_dir)?;
                matrix.insert(&label, solver, Cell::Done(RunRecord::from_run(&single.run)))?;
            }
            Err(e) => {
                matrix.insert(&label, solver, Cell::Failed(e.to_string()))?;
                failures.push((label, solver.clone(), e.to_string()));
            }
        }
    }

    let mut files = Vec::new();
    let mut emit = |name: String, write: &dyn Fn(&mut dyn Write) -> std::io::Result<()>| -> Result<()> {
        let path = config.out.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        write(&mut w)?;
        w.flush()?;
        files.push(path);
        Ok(())
    };
    emit("runs.csv".into(), &|w| write_runs_csv(w, &matrix))?;
    emit("history.csv".into(), &|w| write_history_csv(w, &matrix))?;

    let metric = config.metric.as_str();
    let taus = matrix.ratio_breakpoints(config.metric)?;
    let perf = matrix.performance_profile(config.metric, &taus)?;
    emit(format!("performance_{metric}.csv"), &|w| write_profile_csv(w, &perf))?;
    emit(format!("performance_{metric}.dat"), &|w| write_gnuplot(w, &perf))?;

    let kappas = matrix.kappa_grid();
    for &eps in &config.epsilons {
        let data = matrix.data_profile(eps, &kappas)?;
        let tag = format!("{eps:e}");
        emit(format!("data_eps{tag}.csv"), &|w| write_profile_csv(w, &data))?;
        emit(format!("data_eps{tag}.dat"), &|w| write_gnuplot(w, &data))?;
    }
    Ok(CampaignOutcome {
        matrix,
        failures,
        files,
    })
}
