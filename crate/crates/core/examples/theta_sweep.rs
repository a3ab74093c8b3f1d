// The unimodular family `e^{iθ}` on `s = (1, 0, 1)`: every admissible
// angle gives a different two-atom measure.

use std::f64::consts::PI;

use truncated_hamburger::prelude::*;

pub fn run_example() -> Result<()> {
    let tol = Tolerances::default();
    let problem = TruncatedProblem::new(&MomentSequence::scalar(&[1.0, 0.0, 1.0])?, &tol)?;

    let mut measures = Vec::new();
    for k in 0..8 {
        let theta = k as f64 * PI / 4.0;
        let v = problem.theta_parameter(theta);
        if !problem.admissibility(&v)?.admissible {
            println!("θ = {k}π/4: forbidden");
            continue;
        }
        let m = problem.atomic_solution(&v)?;
        let atoms: Vec<String> = m
            .atoms()
            .iter()
            .map(|a| format!("({:+.4}, {:.4})", a.t, a.weight[(0, 0)].re))
            .collect();
        println!("θ = {k}π/4: {}", atoms.join(" "));
        measures.push(m);
    }

    let closest = measures
        .iter()
        .enumerate()
        .flat_map(|(i, a)| measures[i + 1..].iter().map(move |b| a.distance(b)))
        .fold(f64::INFINITY, f64::min);
    println!("smallest pairwise distance {closest:.3}");
    assert!(closest > 1e-3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
