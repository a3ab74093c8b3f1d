// The scalar problem with an even number of moments: one input per
// verdict, with the certificate that decided it.

use truncated_hamburger::prelude::*;

pub fn run_example() -> Result<()> {
    let tol = Tolerances::default();
    let cases: [&[f64]; 5] = [
        &[0.0, 0.0, 0.0, 0.0],
        &[1.0, 0.0, 1.0, 0.0],
        &[1.0, 1.0, 1.0, 1.0],
        &[1.0, 1.0, 1.0, 2.0],
        &[2.0, 1.0, 2.5, 1.0, 4.25, 2.5],
    ];
    for s in cases {
        let result = solve_scalar_even(s, &tol)?;
        print!("{s:?}: {:?}", result.verdict);
        if let Some(measure) = &result.measure {
            let atoms: Vec<String> = measure
                .atoms()
                .iter()
                .map(|a| format!("({:+.4}, {:.4})", a.t, a.weight[(0, 0)].re))
                .collect();
            print!(" {}", atoms.join(" "));
            assert!(verify_moments(measure, &MomentSequence::scalar(s)?, 1e-8).passed);
        } else {
            print!(" ({})", result.message);
        }
        println!();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
