//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use feasible_paths::campaign::{run_campaign, CampaignConfig, NamedSolver, BUILTIN_SOLVERS};
use feasible_paths::curve::SearchCurve;
use feasible_paths::fo::{solve_fo, FoConfig};
use feasible_paths::fsp::{solve, FspConfig};
use feasible_paths::geometry::SmoothConvexSet;
use feasible_paths::problems::{lookup, make_instance, BlackBoxProblem, ConstraintVariant, FnObjective, Objective};
use feasible_paths::profiles::{CostMetric, ProblemInfo, ProfileMatrix, RunRecord, SolverProfile};
use feasible_paths::run::Termination;
use feasible_paths::stationarity::stationarity_measure;
use feasible_paths::Vector;
use nalgebra::{dvector, DMatrix};
use rand::Rng;
use support::*;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn hs_table(center: f64, table: &[(&str, f64)]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut max_nf = 0;
    for &(id, target) in table {
        let mut p = make_instance(id, &ConstraintVariant::unit_ball(center)).map_err(|e| e.to_string())?;
        let run = solve(&mut p, &FspConfig::default()).map_err(|e| e.to_string())?;
        let gap = (run.best_value - target).abs();
        worst = worst.max(gap);
        max_nf = max_nf.max(run.n_f);
        ensure(gap <= 1e-2, || format!("{id}: f_best {} vs {target}", run.best_value))?;
        ensure(run.n_f <= 10_000, || format!("{id}: n_f {}", run.n_f))?;
        ensure(run.termination == Termination::StepsizeBelowThreshold, || {
            format!("{id}: terminated by {}", run.termination)
        })?;
    }
    Ok(format!("max |f - f*| = {worst:.2e}, max n_f = {max_nf}"))
}

fn criterion_1() -> Outcome {
    hs_table(
        0.0,
        &[("HS22", 1.528), ("HS232", -0.038), ("HS29", -0.192), ("HS65", 26.548), ("HS43", -21.435)],
    )
}

fn criterion_2() -> Outcome {
    hs_table(
        5.0,
        &[("HS22", 16.0), ("HS232", -29.373), ("HS29", -173.494), ("HS65", 0.0), ("HS43", -12.436)],
    )
}

fn criterion_3() -> Outcome {
    let ids = [
        "sphere", "quad-shift", "linear", "quad-iso-2", "quad-iso-3", "quad-iso-5", "quad-iso-10",
        "linear-2", "linear-3", "linear-4", "linear-6",
    ];
    let (mut fsp_dist, mut fsp_measure, mut fo_dist): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut misses = Vec::new();
    let generous = FoConfig {
        max_iterations: 1_000_000,
        max_function_evaluations: 20_000_000,
        ..FoConfig::default()
    };
    for id in ids {
        for center in [0.0, 5.0] {
            let variant = ConstraintVariant::unit_ball(center);
            let mut p = make_instance(id, &variant).map_err(|e| e.to_string())?;
            let star = p.minimizer().cloned().ok_or(format!("{id}: no closed-form minimizer"))?;

            let run = solve(&mut p, &FspConfig::default()).map_err(|e| e.to_string())?;
            let dist = (&run.best_point - &star).norm();
            let grad = p.gradient(&run.best_point).ok_or(format!("{id}: no gradient"))?;
            let measure = stationarity_measure(p.set(), &run.best_point, &grad).map_err(|e| e.to_string())?;
            fsp_dist = fsp_dist.max(dist);
            fsp_measure = fsp_measure.max(measure);
            if dist > 1e-3 || measure > 1e-2 {
                misses.push(format!("fsp {id}/c{center}: dist {dist:.2e} measure {measure:.2e}"));
            }

            let mut q = make_instance(id, &variant).map_err(|e| e.to_string())?;
            let run = solve_fo(&mut q, &generous).map_err(|e| e.to_string())?;
            let dist = (&run.best_point - &star).norm();
            fo_dist = fo_dist.max(dist);
            if dist > 1e-5 {
                misses.push(format!("fo {id}/c{center}: dist {dist:.2e} ({})", run.termination));
            }
        }
    }
    let summary = format!(
        "fsp max dist {fsp_dist:.2e}, max measure {fsp_measure:.2e}; fo max dist {fo_dist:.2e}"
    );
    if misses.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", misses.join("; ")))
    }
}

fn random_set(kind: usize, r: &mut impl Rng) -> (SmoothConvexSet, Vector, f64) {
    let n = r.gen_range(2..=5);
    match kind {
        0 => {
            let b = random_ball(r, n);
            (b.set, b.center, b.radius)
        }
        1 => {
            let e = random_ellipsoid(r, n);
            (e.set, e.center, 3.0)
        }
        2 => {
            let lower = Vector::from_iterator(n, (0..n).map(|_| r.gen_range(-3.0..0.0)));
            let upper = &lower + Vector::from_iterator(n, (0..n).map(|_| r.gen_range(0.1..4.0)));
            let center = (&lower + &upper) * 0.5;
            (SmoothConvexSet::hyperbox(lower, upper).unwrap(), center, 4.0)
        }
        _ => {
            let m = r.gen_range(1..=4);
            let normals: Vec<Vector> = (0..m).map(|_| unit(r, n)).collect();
            let offsets: Vec<f64> = (0..m).map(|_| r.gen_range(0.5..3.0)).collect();
            (SmoothConvexSet::halfspaces(normals, offsets).unwrap(), Vector::zeros(n), 3.0)
        }
    }
}

fn criterion_4() -> Outcome {
    let kinds = ["ball", "ellipsoid", "box", "halfspaces"];
    let mut r = rng(404);
    let mut worst_vi: f64 = f64::NEG_INFINITY;
    for (kind, name) in kinds.iter().enumerate() {
        for trial in 0..1000 {
            let (set, center, scale) = random_set(kind, &mut r);
            let n = set.dimension();
            let x = &center + gaussian(&mut r, n) * (2.0 * scale);
            let y = &center + gaussian(&mut r, n) * (2.0 * scale);
            let px = set.project(&x).map_err(|e| e.to_string())?;
            let py = set.project(&y).map_err(|e| e.to_string())?;
            let at = || format!("{name} #{trial}");
            ensure(set.contains(&px).unwrap(), || format!("{}: projection infeasible", at()))?;
            let ppx = set.project(&px).unwrap();
            ensure((&ppx - &px).norm() <= set.boundary_tolerance() * scale, || {
                format!("{}: not idempotent", at())
            })?;
            let slack = 1e-12 * (1.0 + x.norm() + y.norm());
            ensure((&px - &py).norm() <= (&x - &y).norm() + slack, || {
                format!("{}: expansive", at())
            })?;
            if !set.contains(&x).unwrap() {
                let z = set.project(&(&center + gaussian(&mut r, n) * scale)).unwrap();
                let vi = (&x - &px).dot(&(&z - &px)) / x.norm().max(1.0);
                worst_vi = worst_vi.max(vi);
                ensure(vi <= 1e-8, || format!("{}: variational inequality {vi:e}", at()))?;
            }
        }
    }

    let mut worst_ellipse: f64 = 0.0;
    let quarter = SmoothConvexSet::ellipsoid(dvector![0.0, 0.0], DMatrix::from_diagonal(&dvector![0.25, 1.0]))
        .unwrap();
    let x = dvector![2.0, 2.0];
    let oracle = brute_force_ellipse_projection(&dvector![0.0, 0.0], &DMatrix::identity(2, 2), 2.0, 1.0, &x);
    worst_ellipse = worst_ellipse.max((quarter.project(&x).unwrap() - oracle).norm());
    for _ in 0..20 {
        let angle: f64 = r.gen_range(0.0..std::f64::consts::PI);
        let rot = DMatrix::from_row_slice(2, 2, &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()]);
        let (a, b) = (r.gen_range(0.3..3.0), r.gen_range(0.3..3.0));
        let center = Vector::from_vec(vec![r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)]);
        let matrix = &rot * DMatrix::from_diagonal(&dvector![1.0 / (a * a), 1.0 / (b * b)]) * rot.transpose();
        let set = SmoothConvexSet::ellipsoid(center.clone(), matrix).unwrap();
        let x = &center + gaussian(&mut r, 2) * 3.0;
        let oracle = brute_force_ellipse_projection(&center, &rot, a, b, &x);
        worst_ellipse = worst_ellipse.max((set.project(&x).unwrap() - oracle).norm());
    }
    ensure(worst_ellipse <= 1e-3, || format!("ellipse oracle mismatch {worst_ellipse:e}"))?;
    Ok(format!(
        "4 kinds x 1000 instances; max scaled VI {worst_vi:.2e}; ellipse oracle gap {worst_ellipse:.2e}"
    ))
}

fn boundary_anchor(r: &mut impl Rng, n: usize, ellipsoid: bool) -> (SmoothConvexSet, Vector) {
    if ellipsoid {
        let e = random_ellipsoid(r, n);
        let x = ellipsoid_boundary_point(&e, &unit(r, n));
        (e.set, x)
    } else {
        let b = random_ball(r, n);
        let x = &b.center + unit(r, n) * b.radius;
        (b.set, x)
    }
}

fn criterion_5() -> Outcome {
    let mut r = rng(505);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 2..=10 {
        for ellipsoid in [false, true] {
            for k in 0..50 {
                let (set, mut x) = boundary_anchor(&mut r, n, ellipsoid);
                if k % 5 == 0 {
                    let inner = set.project(&(&x * 0.0)).unwrap();
                    x = set.project(&(&x * 0.5 + inner * 0.5)).unwrap();
                }
                let y = gaussian(&mut r, n);
                let curve = SearchCurve::new(&set, &x, &y).map_err(|e| e.to_string())?;
                let fd = curve.velocity_finite_difference(1e-6).unwrap();
                let v = curve.initial_velocity().unwrap();
                worst = worst.max((fd - v).norm());
                count += 1;
            }
        }
    }
    ensure(worst <= 1e-4, || format!("worst mismatch {worst:e}"))?;
    Ok(format!("{count} curves, worst mismatch {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let mut r = rng(606);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let n = 2 + trial % 9;
        let b = random_ball(&mut r, n);
        let x = &b.center + unit(&mut r, n) * b.radius;
        let cone = b.set.tangent_cone(&x).map_err(|e| e.to_string())?;
        let normal = &x - &b.center;
        let mut d = unit(&mut r, n);
        if normal.dot(&d) > 0.0 {
            d -= &normal * (2.0 * normal.dot(&d) / normal.norm_squared());
        }
        if trial % 4 == 0 {
            d -= &normal * (normal.dot(&d) / normal.norm_squared());
            d /= d.norm();
        }
        let columns: Vec<Vector> = (0..2 * n)
            .map(|i| {
                let mut e = Vector::zeros(n);
                e[i % n] = if i < n { 1.0 } else { -1.0 };
                cone.project(&e).unwrap()
            })
            .collect();
        worst = worst.max(nnls_residual(&columns, &d));
    }
    ensure(worst <= 1e-6, || format!("worst residual {worst:e}"))?;
    Ok(format!("100 boundary points, worst NNLS residual {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    let cases: [(f64, f64); 4] = [(2.0, 0.0), (2.0, -0.9), (-0.37, 0.8), (0.3, -0.9)];
    let mut rows_checked = 0;
    for (target, x0) in cases {
        let f = move |x: f64| (x - target).powi(2);
        let mut p = BlackBoxProblem::new(
            "segment",
            Arc::new(FnObjective::new(move |x| f(x[0]))),
            SmoothConvexSet::hyperbox(dvector![-1.0], dvector![1.0]).unwrap(),
            dvector![x0],
        )
        .unwrap();
        let run = solve(&mut p, &FspConfig::default()).map_err(|e| e.to_string())?;
        let (rows, x_sim) = simulate_1d(f, -1.0, 1.0, x0, &[1.0, -1.0, 1.0, -1.0]);
        let label = format!("target {target}, start {x0}");
        ensure(run.iterations.len() == rows.len(), || {
            format!("{label}: {} iterations vs {}", run.iterations.len(), rows.len())
        })?;
        for (it, row) in run.iterations.iter().zip(&rows) {
            let same = it.success == row.success
                && it.tentative_step == row.tentative
                && it.accepted_step == row.accepted;
            ensure(same, || format!("{label}: iteration {} differs", it.k))?;
        }
        ensure(run.best_point[0] == x_sim, || format!("{label}: final point differs"))?;
        rows_checked += rows.len();
    }
    Ok(format!("{} traces, {rows_checked} iterations identical", cases.len()))
}

/// Wraps an objective and keeps every point it is asked about.
struct Recording {
    inner: Arc<dyn Objective>,
    points: Mutex<Vec<Vector>>,
}

impl Objective for Recording {
    fn value(&self, x: &Vector) -> f64 {
        self.points.lock().unwrap().push(x.clone());
        self.inner.value(x)
    }

    fn gradient(&self, x: &Vector) -> Option<Vector> {
        self.inner.gradient(x)
    }
}

fn criterion_8() -> Outcome {
    let ids = [
        "HS22", "HS232", "HS29", "HS65", "HS43", "sphere", "quad-shift", "linear", "quad-iso-5",
        "quad-diag-4", "linear-3", "rosenbrock-4",
    ];
    let (mut runs, mut evaluations) = (0, 0);
    for id in ids {
        for center in [0.0, 5.0] {
            for name in BUILTIN_SOLVERS {
                let solver = NamedSolver::builtin(name).map_err(|e| e.to_string())?;
                let base = make_instance(id, &ConstraintVariant::unit_ball(center)).map_err(|e| e.to_string())?;
                let recording = Arc::new(Recording {
                    inner: lookup(id).map_err(|e| e.to_string())?.objective,
                    points: Mutex::default(),
                });
                let mut p = BlackBoxProblem::new(id, recording.clone(), base.set().clone(), base.start().clone())
                    .map_err(|e| e.to_string())?;
                let run = solver.solve(&mut p).map_err(|e| e.to_string())?;
                let label = format!("{id}/c{center}/{name}");
                ensure(run.descent_violation(solver.sigma()).is_none(), || {
                    format!("{label}: sufficient decrease violated")
                })?;
                for it in &run.iterations {
                    if !it.success {
                        ensure(it.accepted_step == 0.0 && it.f_after == it.f_before, || {
                            format!("{label}: unsuccessful iteration {} moved", it.k)
                        })?;
                    }
                }
                let points = recording.points.lock().unwrap();
                ensure(points.len() == run.n_f, || format!("{label}: n_f mismatch"))?;
                for x in points.iter() {
                    ensure(p.set().contains(x).unwrap(), || format!("{label}: infeasible evaluation"))?;
                }
                runs += 1;
                evaluations += points.len();
            }
        }
    }
    Ok(format!("{runs} runs, {evaluations} evaluations, all feasible"))
}

fn record(problem: &str, solver: &str, n_f: usize, history: Vec<(usize, f64)>) -> RunRecord {
    RunRecord {
        problem: problem.into(),
        solver: solver.into(),
        n_f,
        n_p: 0,
        f_best: history.last().map_or(f64::NAN, |h| h.1),
        terminated: "stepsize_below_threshold".into(),
        history,
    }
}

fn check_profile_shape(label: &str, profiles: &[SolverProfile]) -> Result<(), String> {
    for p in profiles {
        ensure(p.points.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1), || {
            format!("{label} {}: not monotone", p.solver)
        })?;
        ensure(p.points.iter().all(|q| (0.0..=1.0).contains(&q.1)), || {
            format!("{label} {}: out of [0, 1]", p.solver)
        })?;
    }
    Ok(())
}

const CAMPAIGN: &str = "\
budget=4000
epsilons=1e-1,1e-3,1e-5

[instance]
problem=HS22

[instance]
problem=HS43
center=5

[instance]
problem=quad-iso-4
center=5

[instance]
problem=rosenbrock-3

[solver.fsp-default]

[solver.fsp-plain]

[solver.fo]
";

fn criterion_9() -> Outcome {
    let third = 1.0 / 3.0;
    let infos = (0..3).map(|p| ProblemInfo::new(format!("p{p}"), 2)).collect();
    let mut m = ProfileMatrix::new(infos, vec!["A".into(), "B".into()]);
    for (s, costs) in [("A", [10, 10, 30]), ("B", [20, 5, 30])] {
        for (p, c) in costs.into_iter().enumerate() {
            m.insert_run(record(&format!("p{p}"), s, c, vec![(1, 1.0), (c, 0.0)])).unwrap();
        }
    }
    let perf = m.performance_profile(CostMetric::Evaluations, &[1.0, 1.5, 2.0, 4.0]).unwrap();
    let expected = vec![(1.0, 2.0 * third), (1.5, 2.0 * third), (2.0, 1.0), (4.0, 1.0)];
    ensure(perf[0].points == expected && perf[1].points == expected, || {
        "hand performance profile differs".into()
    })?;

    let infos = vec![ProblemInfo::new("p0", 1), ProblemInfo::new("p1", 2)];
    let mut m = ProfileMatrix::new(infos, vec!["A".into(), "B".into()]);
    m.insert_run(record("p0", "A", 8, vec![(1, 10.0), (3, 5.0), (5, 0.05), (8, 0.0)])).unwrap();
    m.insert_run(record("p0", "B", 20, vec![(1, 10.0), (2, 0.09), (20, 0.01)])).unwrap();
    m.insert_run(record("p1", "A", 9, vec![(1, 4.0), (9, 2.0)])).unwrap();
    m.insert_run(record("p1", "B", 12, vec![(1, 4.0), (4, 1.0), (12, 0.5)])).unwrap();
    let costs = m.solve_costs(1e-2).unwrap();
    ensure(costs == vec![vec![Some(5), Some(2)], vec![None, Some(12)]], || {
        format!("hand solve costs differ: {costs:?}")
    })?;
    let d = m.data_profile(1e-2, &[0.0, 1.0, 2.5, 4.0]).unwrap();
    ensure(
        d[0].points == vec![(0.0, 0.0), (1.0, 0.0), (2.5, 0.5), (4.0, 0.5)]
            && d[1].points == vec![(0.0, 0.0), (1.0, 0.5), (2.5, 0.5), (4.0, 1.0)],
        || "hand data profile differs".into(),
    )?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut config: CampaignConfig = CAMPAIGN.parse().map_err(|e: feasible_paths::Error| e.to_string())?;
    config.out = dir.path().to_path_buf();
    let outcome = run_campaign(&config).map_err(|e| e.to_string())?;
    ensure(outcome.failures.is_empty(), || format!("campaign cells failed: {:?}", outcome.failures))?;
    let matrix = &outcome.matrix;
    let mut curves = 0;
    for metric in [CostMetric::Evaluations, CostMetric::Projections] {
        let taus = matrix.ratio_breakpoints(metric).unwrap();
        let perf = matrix.performance_profile(metric, &taus).unwrap();
        check_profile_shape(metric.as_str(), &perf)?;
        curves += perf.len();
    }
    for &eps in &config.epsilons {
        let data = matrix.data_profile(eps, &matrix.kappa_grid()).unwrap();
        check_profile_shape(&format!("data eps {eps:e}"), &data)?;
        curves += data.len();
    }
    for path in &outcome.files {
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if !name.ends_with(".csv") || !(name.starts_with("performance_") || name.starts_with("data_")) {
            continue;
        }
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let mut last: Option<(String, f64, f64)> = None;
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            let (solver, x, y) = (cols[0].to_string(), cols[1].parse::<f64>().unwrap(), cols[2].parse::<f64>().unwrap());
            ensure((0.0..=1.0).contains(&y), || format!("{name}: value {y} out of range"))?;
            if let Some((s, px, py)) = &last {
                if *s == solver {
                    ensure(*px < x && *py <= y, || format!("{name}: {solver} not monotone"))?;
                }
            }
            last = Some((solver, x, y));
        }
    }
    Ok(format!("hand matrices exact; {curves} campaign curves monotone and within [0, 1]"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 HS values, unit ball at 0", criterion_1),
        ("2 HS values, unit ball at 5", criterion_2),
        ("3 closed-form minimizers", criterion_3),
        ("4 projection properties", criterion_4),
        ("5 curve velocities", criterion_5),
        ("6 tangent cone span", criterion_6),
        ("7 one-dimensional trace", criterion_7),
        ("8 descent ledger and feasibility", criterion_8),
        ("9 profile correctness", criterion_9),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
