//! Black-box benchmark problems.
//!
//! Objectives are registered in code; an instance pairs one of them with a
//! feasible set and a start point. The Hock–Schittkowski objectives keep
//! only their objective function: the original constraints are replaced by
//! the instance's set.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::geometry::SmoothConvexSet;
use crate::text::{format_reals, key_value, parse_reals};
use crate::Vector;

/// A scalar objective; the gradient is optional and only used by diagnostics
/// and the first-order reference solver.
pub trait Objective: Send + Sync {
    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, _x: &Vector) -> Option<Vector> {
        None
    }
}

type ValueFn = dyn Fn(&Vector) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&Vector) -> Vector + Send + Sync;

/// Objective assembled from closures.
#[derive(Clone)]
pub struct FnObjective {
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
}

impl FnObjective {
    pub fn new(value: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }
}

impl Objective for FnObjective {
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Vector) -> Option<Vector> {
        self.gradient.as_ref().map(|g| g(x))
    }
}

impl fmt::Debug for FnObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnObjective")
            .field("gradient", &self.gradient.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    /// Reported optimum from published benchmark tables.
    Published,
    /// Value at the closed-form minimizer.
    ClosedForm,
}

impl fmt::Display for ReferenceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceSource::Published => "published",
            ReferenceSource::ClosedForm => "closed-form",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceValue {
    pub value: f64,
    pub source: ReferenceSource,
    pub note: String,
}

/// An objective oracle bound to a feasible set, with an evaluation counter.
///
/// The counter is owned by whichever run holds the `&mut` borrow; it only
/// ever grows.
pub struct BlackBoxProblem {
    name: String,
    base_id: String,
    objective: Arc<dyn Objective>,
    set: Arc<SmoothConvexSet>,
    start: Vector,
    reference: Option<ReferenceValue>,
    minimizer: Option<Vector>,
    evaluations: usize,
}

impl fmt::Debug for BlackBoxProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBoxProblem")
            .field("name", &self.name)
            .field("set", &self.set.to_string())
            .field("start", &self.start.as_slice())
            .field("evaluations", &self.evaluations)
            .finish()
    }
}

impl BlackBoxProblem {
    pub fn new(
        name: impl Into<String>,
        objective: Arc<dyn Objective>,
        set: SmoothConvexSet,
        start: Vector,
    ) -> Result<Self> {
        let name = name.into();
        check_dim(set.dimension(), start.len())?;
        if !set.contains(&start)? {
            return Err(Error::Domain(format!("start point of `{name}` is infeasible")));
        }
        Ok(Self {
            base_id: name.clone(),
            name,
            objective,
            set: Arc::new(set),
            start,
            reference: None,
            minimizer: None,
            evaluations: 0,
        })
    }

    pub fn with_reference(mut self, reference: ReferenceValue) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_minimizer(mut self, minimizer: Vector) -> Self {
        self.minimizer = Some(minimizer);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Registry id of the underlying objective.
    pub fn base_id(&self) -> &str {
        &self.base_id
    }

    pub fn dimension(&self) -> usize {
        self.start.len()
    }

    pub fn set(&self) -> &SmoothConvexSet {
        &self.set
    }

    /// Shared handle to the feasible set.
    pub fn shared_set(&self) -> Arc<SmoothConvexSet> {
        Arc::clone(&self.set)
    }

    pub fn start(&self) -> &Vector {
        &self.start
    }

    pub fn reference(&self) -> Option<&ReferenceValue> {
        self.reference.as_ref()
    }

    /// Known constrained minimizer, when one exists in closed form.
    pub fn minimizer(&self) -> Option<&Vector> {
        self.minimizer.as_ref()
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    pub fn has_gradient(&self) -> bool {
        self.objective.gradient(&self.start).is_some()
    }

    /// Metered oracle call. Evaluating outside the set is a solver bug and
    /// reported as [`Error::ContractViolation`]; the counter is not bumped
    /// in that case.
    pub fn evaluate(&mut self, x: &Vector) -> Result<f64> {
        check_dim(self.dimension(), x.len())?;
        if x.iter().any(|v| !v.is_finite()) || !self.set.contains(x)? {
            return Err(Error::ContractViolation {
                problem: self.name.clone(),
            });
        }
        self.evaluations += 1;
        Ok(self.objective.value(x))
    }

    /// Unmetered gradient, for diagnostics only.
    pub fn gradient(&self, x: &Vector) -> Option<Vector> {
        self.objective.gradient(x)
    }
}

/// Feasible region of an instance, before it is sized to a problem.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintVariant {
    /// A single center value is broadcast to every coordinate.
    Ball { center: Vec<f64>, radius: f64 },
    /// Row-major matrix entries; when `matrix` is empty the ellipsoid is
    /// given by semi-axis lengths in `axes`.
    Ellipsoid {
        center: Vec<f64>,
        matrix: Vec<f64>,
        axes: Vec<f64>,
    },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl ConstraintVariant {
    /// The unit ball centered at `[center, ..., center]`.
    pub fn unit_ball(center: f64) -> Self {
        ConstraintVariant::Ball {
            center: vec![center],
            radius: 1.0,
        }
    }

    pub fn to_set(&self, dimension: usize) -> Result<SmoothConvexSet> {
        match self {
            ConstraintVariant::Ball { center, radius } => {
                SmoothConvexSet::ball(broadcast(center, dimension, "center")?, *radius)
            }
            ConstraintVariant::Ellipsoid {
                center,
                matrix,
                axes,
            } => {
                let center = broadcast(center, dimension, "center")?;
                let matrix = if !matrix.is_empty() {
                    if matrix.len() != dimension * dimension {
                        return Err(Error::Config(format!(
                            "ellipsoid matrix needs {} entries",
                            dimension * dimension
                        )));
                    }
                    DMatrix::from_row_slice(dimension, dimension, matrix)
                } else {
                    let axes = broadcast(axes, dimension, "axes")?;
                    DMatrix::from_diagonal(&axes.map(|a| 1.0 / (a * a)))
                };
                SmoothConvexSet::ellipsoid(center, matrix)
            }
            ConstraintVariant::Box { lower, upper } => SmoothConvexSet::hyperbox(
                broadcast(lower, dimension, "lower")?,
                broadcast(upper, dimension, "upper")?,
            ),
        }
    }

    /// The uniform center value when this is a ball with all coordinates equal.
    fn uniform_ball_center(&self) -> Option<(f64, f64)> {
        match self {
            ConstraintVariant::Ball { center, radius } => {
                let first = *center.first()?;
                center.iter().all(|&c| c == first).then_some((first, *radius))
            }
            _ => None,
        }
    }
}

fn broadcast(values: &[f64], dimension: usize, what: &str) -> Result<Vector> {
    match values.len() {
        1 => Ok(Vector::from_element(dimension, values[0])),
        n if n == dimension => Ok(Vector::from_column_slice(values)),
        n => Err(Error::Config(format!(
            "{what} has {n} entries, expected 1 or {dimension}"
        ))),
    }
}

/// An objective from the registry.
#[derive(Clone)]
pub struct BaseProblem {
    pub id: String,
    pub dimension: usize,
    /// Canonical start before projection onto the instance's set.
    pub start: Vector,
    pub objective: Arc<dyn Objective>,
    kind: BaseKind,
}

#[derive(Clone, Debug)]
enum BaseKind {
    HockSchittkowski {
        /// Reported optimal values for unit balls centered at 0 and at 5.
        center0: f64,
        center5: f64,
    },
    /// `||x - target||^2`: minimizer is the projection of `target`.
    IsotropicQuadratic { target: Vector },
    /// `weights^T x`.
    Linear { weights: Vector },
    Other,
}

impl BaseProblem {
    /// Closed-form constrained minimizer over `set`, when known.
    pub fn minimizer(&self, set: &SmoothConvexSet) -> Option<Vector> {
        match &self.kind {
            BaseKind::IsotropicQuadratic { target } => set.project(target).ok(),
            BaseKind::Linear { weights } => match set.kind() {
                crate::geometry::SetKind::Ball { center, radius } => {
                    Some(center - weights * (*radius / weights.norm()))
                }
                _ => None,
            },
            _ => None,
        }
    }

    fn reference(&self, variant: &ConstraintVariant, set: &SmoothConvexSet) -> Option<ReferenceValue> {
        match &self.kind {
            BaseKind::HockSchittkowski { center0, center5 } => {
                let (c, r) = variant.uniform_ball_center()?;
                if r != 1.0 {
                    return None;
                }
                let (value, table) = if c == 0.0 {
                    (*center0, "unit ball at 0")
                } else if c == 5.0 {
                    (*center5, "unit ball at 5")
                } else {
                    return None;
                };
                Some(ReferenceValue {
                    value,
                    source: ReferenceSource::Published,
                    note: format!("reported optimum, {table}"),
                })
            }
            BaseKind::IsotropicQuadratic { .. } | BaseKind::Linear { .. } => {
                let x = self.minimizer(set)?;
                Some(ReferenceValue {
                    value: self.objective.value(&x),
                    source: ReferenceSource::ClosedForm,
                    note: "closed-form minimizer".into(),
                })
            }
            BaseKind::Other => None,
        }
    }
}

fn hs(
    id: &str,
    start: Vec<f64>,
    center0: f64,
    center5: f64,
    objective: FnObjective,
) -> BaseProblem {
    BaseProblem {
        id: id.to_string(),
        dimension: start.len(),
        start: Vector::from_vec(start),
        objective: Arc::new(objective),
        kind: BaseKind::HockSchittkowski { center0, center5 },
    }
}

fn isotropic(id: &str, target: Vector, start: Vector) -> BaseProblem {
    let t = target.clone();
    let t2 = target.clone();
    BaseProblem {
        id: id.to_string(),
        dimension: target.len(),
        start,
        objective: Arc::new(
            FnObjective::new(move |x| (x - &t).norm_squared())
                .with_gradient(move |x| (x - &t2) * 2.0),
        ),
        kind: BaseKind::IsotropicQuadratic { target },
    }
}

fn linear(id: &str, weights: Vector) -> BaseProblem {
    let w = weights.clone();
    let w2 = weights.clone();
    BaseProblem {
        id: id.to_string(),
        dimension: weights.len(),
        start: Vector::zeros(weights.len()),
        objective: Arc::new(FnObjective::new(move |x| w.dot(x)).with_gradient(move |_| w2.clone())),
        kind: BaseKind::Linear { weights },
    }
}

/// Fixed registry ids; parametric families are listed as `quad-iso-N`,
/// `quad-diag-N`, `linear-N` and `rosenbrock-N`.
pub const FIXED_PROBLEMS: &[&str] = &[
    "HS22", "HS232", "HS29", "HS65", "HS43", "sphere", "quad-shift", "linear",
];

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Looks up a registered objective by id.
pub fn lookup(id: &str) -> Result<BaseProblem> {
    let problem = match id {
        "HS22" => hs(
            id,
            vec![2.0, 2.0],
            1.528,
            16.0,
            FnObjective::new(|x| (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2))
                .with_gradient(|x| Vector::from_vec(vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)])),
        ),
        "HS232" => hs(
            id,
            vec![2.0, 0.5],
            -0.038,
            -29.373,
            FnObjective::new(|x| -(9.0 - (x[0] - 3.0).powi(2)) * x[1].powi(3) / (27.0 * SQRT3))
                .with_gradient(|x| {
                    let k = 27.0 * SQRT3;
                    Vector::from_vec(vec![
                        2.0 * (x[0] - 3.0) * x[1].powi(3) / k,
                        -(9.0 - (x[0] - 3.0).powi(2)) * 3.0 * x[1].powi(2) / k,
                    ])
                }),
        ),
        "HS29" => hs(
            id,
            vec![1.0, 1.0, 1.0],
            -0.192,
            -173.494,
            FnObjective::new(|x| -x[0] * x[1] * x[2]).with_gradient(|x| {
                Vector::from_vec(vec![-x[1] * x[2], -x[0] * x[2], -x[0] * x[1]])
            }),
        ),
        "HS65" => hs(
            id,
            vec![-5.0, 5.0, 0.0],
            26.548,
            0.0,
            FnObjective::new(|x| {
                (x[0] - x[1]).powi(2) + (x[0] + x[1] - 10.0).powi(2) / 9.0 + (x[2] - 5.0).powi(2)
            })
            .with_gradient(|x| {
                let s = 2.0 * (x[0] + x[1] - 10.0) / 9.0;
                Vector::from_vec(vec![
                    2.0 * (x[0] - x[1]) + s,
                    -2.0 * (x[0] - x[1]) + s,
                    2.0 * (x[2] - 5.0),
                ])
            }),
        ),
        "HS43" => hs(
            id,
            vec![0.0; 4],
            -21.435,
            -12.436,
            FnObjective::new(|x| {
                x[0] * x[0] + x[1] * x[1] + 2.0 * x[2] * x[2] + x[3] * x[3] - 5.0 * x[0]
                    - 5.0 * x[1]
                    - 21.0 * x[2]
                    + 7.0 * x[3]
            })
            .with_gradient(|x| {
                Vector::from_vec(vec![
                    2.0 * x[0] - 5.0,
                    2.0 * x[1] - 5.0,
                    4.0 * x[2] - 21.0,
                    2.0 * x[3] + 7.0,
                ])
            }),
        ),
        "sphere" => isotropic(id, Vector::zeros(2), Vector::from_vec(vec![0.5, 0.5])),
        "quad-shift" => isotropic(id, Vector::from_vec(vec![2.0, 0.0]), Vector::zeros(2)),
        "linear" => linear(id, Vector::from_vec(vec![1.0, 0.0])),
        _ => return parametric(id),
    };
    Ok(problem)
}

fn parametric(id: &str) -> Result<BaseProblem> {
    let not_found = || Error::NotFound(format!("unknown problem `{id}`"));
    let (family, n) = id.rsplit_once('-').ok_or_else(not_found)?;
    let n: usize = n.parse().map_err(|_| not_found())?;
    if n == 0 {
        return Err(not_found());
    }
    match family {
        "quad-iso" => Ok(isotropic(
            id,
            Vector::from_fn(n, |i, _| if i % 2 == 0 { 2.0 } else { -1.0 }),
            Vector::zeros(n),
        )),
        "linear" => Ok(linear(id, Vector::from_fn(n, |i, _| 1.0 + i as f64))),
        "quad-diag" => Ok(BaseProblem {
            id: id.to_string(),
            dimension: n,
            start: Vector::zeros(n),
            objective: Arc::new(
                FnObjective::new(|x: &Vector| {
                    x.iter()
                        .enumerate()
                        .map(|(i, v)| (i + 1) as f64 * (v - 2.0).powi(2))
                        .sum()
                })
                .with_gradient(|x: &Vector| {
                    Vector::from_fn(x.len(), |i, _| 2.0 * (i + 1) as f64 * (x[i] - 2.0))
                }),
            ),
            kind: BaseKind::Other,
        }),
        "rosenbrock" if n >= 2 => Ok(BaseProblem {
            id: id.to_string(),
            dimension: n,
            start: Vector::from_fn(n, |i, _| if i % 2 == 0 { -1.2 } else { 1.0 }),
            objective: Arc::new(FnObjective::new(rosenbrock).with_gradient(rosenbrock_gradient)),
            kind: BaseKind::Other,
        }),
        _ => Err(not_found()),
    }
}

fn rosenbrock(x: &Vector) -> f64 {
    (0..x.len() - 1)
        .map(|i| 100.0 * (x[i + 1] - x[i] * x[i]).powi(2) + (1.0 - x[i]).powi(2))
        .sum()
}

fn rosenbrock_gradient(x: &Vector) -> Vector {
    let n = x.len();
    let mut g = Vector::zeros(n);
    for i in 0..n - 1 {
        let r = x[i + 1] - x[i] * x[i];
        g[i] += -400.0 * x[i] * r - 2.0 * (1.0 - x[i]);
        g[i + 1] += 200.0 * r;
    }
    g
}

/// A problem id plus constraint and budget, as read from a descriptor file:
///
/// ```text
/// problem=HS22
/// constraint=ball
/// center=0,0
/// radius=1
/// budget=10000
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub problem: String,
    pub constraint: ConstraintVariant,
    pub budget: Option<usize>,
    /// Overrides the canonical start (still projected onto the set).
    pub start: Option<Vec<f64>>,
    pub label: Option<String>,
}

impl ProblemInstance {
    pub fn new(problem: impl Into<String>, constraint: ConstraintVariant) -> Self {
        Self {
            problem: problem.into(),
            constraint,
            budget: None,
            start: None,
            label: None,
        }
    }

    /// Name used in run records, e.g. `HS22-c0`.
    pub fn label(&self) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        match (&self.constraint, self.constraint.uniform_ball_center()) {
            (_, Some((c, r))) if r == 1.0 => format!("{}-c{}", self.problem, c),
            (_, Some((c, r))) => format!("{}-c{}-r{}", self.problem, c, r),
            (ConstraintVariant::Ball { .. }, None) => format!("{}-ball", self.problem),
            (ConstraintVariant::Ellipsoid { .. }, _) => format!("{}-ellipsoid", self.problem),
            (ConstraintVariant::Box { .. }, _) => format!("{}-box", self.problem),
        }
    }

    pub fn build(&self) -> Result<BlackBoxProblem> {
        let mut problem = make_instance(&self.problem, &self.constraint)?;
        if let Some(start) = &self.start {
            let start = broadcast(start, problem.dimension(), "start")?;
            problem.start = problem.set.project(&start)?;
        }
        problem.name = self.label();
        Ok(problem)
    }

    /// Parses `key=value` lines; unknown keys are an error.
    pub fn from_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut problem = None;
        let mut kind = "ball".to_string();
        let mut center = None;
        let mut radius = None;
        let mut matrix = None;
        let mut axes = None;
        let mut lower = None;
        let mut upper = None;
        let mut budget = None;
        let mut start = None;
        let mut label = None;
        for line in lines {
            let Some((key, value)) = key_value(line)? else {
                continue;
            };
            match key {
                "problem" => problem = Some(value.to_string()),
                "constraint" => kind = value.to_string(),
                "center" => center = Some(parse_reals(value)?),
                "radius" => radius = Some(parse_scalar(value)?),
                "matrix" => matrix = Some(parse_reals(value)?),
                "axes" => axes = Some(parse_reals(value)?),
                "lower" => lower = Some(parse_reals(value)?),
                "upper" => upper = Some(parse_reals(value)?),
                "budget" => {
                    budget = Some(value.parse::<usize>().map_err(|_| {
                        Error::Config(format!("budget must be a positive integer, got `{value}`"))
                    })?)
                }
                "start" => start = Some(parse_reals(value)?),
                "label" => label = Some(value.to_string()),
                other => return Err(Error::Config(format!("unknown instance key `{other}`"))),
            }
        }
        let problem = problem.ok_or_else(|| Error::Config("instance is missing `problem`".into()))?;
        let center = center.unwrap_or_else(|| vec![0.0]);
        let constraint = match kind.as_str() {
            "ball" => ConstraintVariant::Ball {
                center,
                radius: radius.unwrap_or(1.0),
            },
            "ellipsoid" => {
                let (matrix, axes) = match (matrix, axes) {
                    (Some(m), _) => (m, Vec::new()),
                    (None, Some(a)) => (Vec::new(), a),
                    (None, None) => {
                        return Err(Error::Config(
                            "ellipsoid needs `matrix` or `axes`".into(),
                        ))
                    }
                };
                ConstraintVariant::Ellipsoid {
                    center,
                    matrix,
                    axes,
                }
            }
            "box" => ConstraintVariant::Box {
                lower: lower.ok_or_else(|| Error::Config("box needs `lower`".into()))?,
                upper: upper.ok_or_else(|| Error::Config("box needs `upper`".into()))?,
            },
            other => return Err(Error::Config(format!("unknown constraint `{other}`"))),
        };
        if budget == Some(0) {
            return Err(Error::Config("budget must be positive".into()));
        }
        Ok(Self {
            problem,
            constraint,
            budget,
            start,
            label,
        })
    }
}

fn parse_scalar(value: &str) -> Result<f64> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{value}` is not a real number")))
}

impl FromStr for ProblemInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_lines(s.lines())
    }
}

impl fmt::Display for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "problem={}", self.problem)?;
        match &self.constraint {
            ConstraintVariant::Ball { center, radius } => {
                writeln!(f, "constraint=ball")?;
                writeln!(f, "center={}", format_reals(center))?;
                writeln!(f, "radius={radius}")?;
            }
            ConstraintVariant::Ellipsoid {
                center,
                matrix,
                axes,
            } => {
                writeln!(f, "constraint=ellipsoid")?;
                writeln!(f, "center={}", format_reals(center))?;
                if matrix.is_empty() {
                    writeln!(f, "axes={}", format_reals(axes))?;
                } else {
                    writeln!(f, "matrix={}", format_reals(matrix))?;
                }
            }
            ConstraintVariant::Box { lower, upper } => {
                writeln!(f, "constraint=box")?;
                writeln!(f, "lower={}", format_reals(lower))?;
                writeln!(f, "upper={}", format_reals(upper))?;
            }
        }
        if let Some(budget) = self.budget {
            writeln!(f, "budget={budget}")?;
        }
        if let Some(start) = &self.start {
            writeln!(f, "start={}", format_reals(start))?;
        }
        if let Some(label) = &self.label {
            writeln!(f, "label={label}")?;
        }
        Ok(())
    }
}

/// Binds a registered objective to a constraint. The start point is the
/// canonical start projected onto the set; the counter starts at zero.
pub fn make_instance(id: &str, variant: &ConstraintVariant) -> Result<BlackBoxProblem> {
    let base = lookup(id)?;
    let set = variant.to_set(base.dimension)?;
    let start = set.project(&base.start)?;
    let reference = base.reference(variant, &set);
    let minimizer = base.minimizer(&set);
    let mut problem = BlackBoxProblem::new(id, base.objective.clone(), set, start)?;
    problem.reference = reference;
    problem.minimizer = minimizer;
    Ok(problem)
}
