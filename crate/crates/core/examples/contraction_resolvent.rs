// Solutions from strict contractions: the generalized resolvent's
// Stieltjes transform is Herglotz, and contour integration of its rational
// continuation returns the given moments.

use truncated_hamburger::prelude::*;

pub fn run_example() -> Result<()> {
    let tol = Tolerances::default();
    let seq = MomentSequence::scalar(&[2.0, 0.5, 1.5, 0.2, 2.0])?;
    let problem = TruncatedProblem::new(&seq, &tol)?;
    let q = problem.deficiency().dim();

    for scale in [0.0, 0.5, 0.9] {
        let f = ExtensionParameter::contraction(CMatrix::identity(q, q) * C64::new(0.0, scale));
        let t = problem.transform(f);
        let lambda = C64::new(0.3, 0.7);
        let value = t.evaluate(lambda)?[(0, 0)];
        assert!(value.im >= 0.0);

        let contour = moments_from_transform(&t, None, 256, 2 * problem.degree(), &tol)?;
        let worst = contour
            .moments
            .iter()
            .zip(seq.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        println!(
            "F = {scale}i: T({lambda}) = {value:.6}, {} circle(s), moment error {worst:.1e}",
            contour.circles.len()
        );
        assert!(worst < 1e-8);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
