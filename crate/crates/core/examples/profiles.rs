//! Performance and data profiles from a small hand-made result matrix.

use feasible_paths::profiles::{write_profile_csv, CostMetric, ProblemInfo, ProfileMatrix, RunRecord};
use feasible_paths::Result;

fn record(problem: &str, solver: &str, history: Vec<(usize, f64)>) -> RunRecord {
    let (n_f, f_best) = *history.last().unwrap();
    RunRecord {
        problem: problem.into(),
        solver: solver.into(),
        n_f,
        n_p: n_f / 3,
        f_best,
        terminated: "stepsize_below_threshold".into(),
        history,
    }
}

fn main() -> Result<()> {
    let problems = vec![ProblemInfo::new("p0", 1), ProblemInfo::new("p1", 2), ProblemInfo::new("p2", 2)];
    let mut m = ProfileMatrix::new(problems, vec!["slow".into(), "fast".into()]);
    m.insert_run(record("p0", "slow", vec![(1, 10.0), (6, 1.0), (20, 0.0)]))?;
    m.insert_run(record("p0", "fast", vec![(1, 10.0), (4, 0.5), (12, 0.0)]))?;
    m.insert_run(record("p1", "slow", vec![(1, 4.0), (9, 2.0), (30, 1.0)]))?;
    m.insert_run(record("p1", "fast", vec![(1, 4.0), (15, 1.5)]))?;
    m.insert_run(record("p2", "slow", vec![(1, 3.0), (7, -1.0)]))?;
    m.insert_run(record("p2", "fast", vec![(1, 3.0), (21, -1.0)]))?;

    let taus = m.ratio_breakpoints(CostMetric::Evaluations)?;
    println!("performance profile, n_f");
    write_profile_csv(std::io::stdout(), &m.performance_profile(CostMetric::Evaluations, &taus)?)?;
    for eps in [1e-1, 1e-3] {
        println!("\ndata profile, eps = {eps:e}");
        write_profile_csv(std::io::stdout(), &m.data_profile(eps, &m.kappa_grid())?)?;
    }
    Ok(())
}
