// A 2×2 problem built from a known atomic measure: conditions, Gram
// realization, deficiency index and the solution for the default angle,
// printed in the JSON measure format.

use truncated_hamburger::io::to_json;
use truncated_hamburger::prelude::*;
use truncated_hamburger::solutions::Atom;

fn weight(a: f64, b: f64, c: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::new(a, 0.0), C64::new(b, c), C64::new(b, -c), C64::new(a, 0.0)])
}

pub fn run_example() -> Result<()> {
    let tol = Tolerances::default();
    // two full-rank atoms and a rank-one atom, so q = 1
    let rank_one = {
        let v = CMatrix::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        &v * v.adjoint()
    };
    let truth = AtomicMatrixMeasure::new(
        2,
        vec![
            Atom { t: -1.0, weight: weight(1.0, 0.2, 0.1) },
            Atom { t: 0.5, weight: weight(0.8, -0.3, 0.0) },
            Atom { t: 1.5, weight: rank_one },
        ],
    );
    let seq = truth.moment_sequence(5, &tol)?;

    let report = check_truncated_conditions(&seq, &tol)?;
    println!(
        "d = {}, Γ_(d-1) > 0: {}, Γ_d ≥ 0: {}",
        report.d, report.gamma_prev_positive, report.gamma_d_psd
    );

    let problem = TruncatedProblem::new(&seq, &tol)?;
    println!("Gram space dimension {}, q = {}", problem.space().dim(), problem.deficiency().dim());
    println!("symmetry residual {:.1e}", problem.shift().symmetry_residual());

    let v = problem.default_isometry();
    let measure = problem.atomic_solution(&v)?;
    println!("{}", to_json(&measure.to_json()));
    let check = problem.verify(&measure, 1e-10);
    println!("deviation {:.1e}", check.max_deviation);
    assert!(check.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
