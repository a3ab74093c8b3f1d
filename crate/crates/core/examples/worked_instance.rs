// The scalar problem `s = (1, 0, 1)`: one-dimensional deficiency, the
// forbidden angle `θ = π`, and the measure `½δ_{-1} + ½δ_1` for `θ = 0`.

use truncated_hamburger::prelude::*;

pub fn run_example() -> Result<()> {
    let tol = Tolerances::default();
    let seq = MomentSequence::scalar(&[1.0, 0.0, 1.0])?;
    let problem = TruncatedProblem::new(&seq, &tol)?;
    println!("q = {}", problem.deficiency().dim());

    let pi = problem.admissibility(&ExtensionParameter::unimodular(std::f64::consts::PI))?;
    println!("θ = π admissible: {} (meets X_i: {})", pi.admissible, pi.meets_forbidden);
    assert!(!pi.admissible);

    let measure = problem.atomic_solution(&ExtensionParameter::unimodular(0.0))?;
    for atom in measure.atoms() {
        println!("atom t = {:+.6}, weight {:.6}", atom.t, atom.weight[(0, 0)].re);
    }
    let report = problem.verify(&measure, 1e-12);
    println!("moment deviation {:.1e}", report.max_deviation);
    assert!(report.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
