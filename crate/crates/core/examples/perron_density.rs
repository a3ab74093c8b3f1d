// Stieltjes-Perron inversion of the solution for `F = 0`, whose measure
// has no atoms, written as density CSV.

use truncated_hamburger::io::density_csv;
use truncated_hamburger::prelude::*;
use truncated_hamburger::solutions::DEFAULT_EPS_SEQUENCE;

pub fn run_example() -> Result<()> {
    let tol = Tolerances::default();
    let problem = TruncatedProblem::new(&MomentSequence::scalar(&[1.0, 0.0, 1.0])?, &tol)?;
    let t = problem.transform(ExtensionParameter::zero(problem.deficiency().dim()));

    let grid = PerronGrid::new(-6.0, 6.0, 0.5)?;
    let result = perron_inversion(&t, &grid, &DEFAULT_EPS_SEQUENCE, &tol)?;
    print!("{}", density_csv(&result));
    let total = result.total()[(0, 0)].re;
    println!("# mass on [-6, 6): {total:.4} of {:.4} (ε = {:.0e})", result.mass_estimate, result.eps);
    assert!(total > 0.8 && total <= 1.0 + 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
