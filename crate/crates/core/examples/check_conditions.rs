// Solvability checks through the command layer: a solvable problem, one
// with an indefinite Hankel matrix and one with a singular `Γ_(d-1)`.

use truncated_hamburger::{cli, Result};

pub fn run_example() -> Result<()> {
    let problems = [
        ("solvable", r#"{"N": 1, "moments": [[[1]], [[0]], [[1]]]}"#, cli::EXIT_OK),
        ("indefinite", r#"{"N": 1, "moments": [[[1]], [[2]], [[1]]]}"#, cli::EXIT_NOT_PSD),
        ("singular", r#"{"N": 1, "moments": [[[0]], [[0]], [[0]]]}"#, cli::EXIT_NOT_POSITIVE),
    ];
    for (name, text, expected) in problems {
        let out = cli::cmd_check(text, &[]);
        println!("{name}: exit {}\n{}", out.code, out.stdout);
        assert_eq!(out.code, expected);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
