//! Subcommands behind the `hamburger` binary. Each returns an exit code and
//! the text for stdout, so they can be driven in-process.
//!
//! Exit codes: 0 success, 1 malformed input, 2 `Γ_d` not PSD (or scalar
//! verdict infeasible), 3 `Γ_{d-1}` not positive, 4 parameter rejected or
//! numerical failure, 5 moment verification failed.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::{json, Value};

use crate::extensions::{ExtensionParameter, ParameterKind};
use crate::io::{density_csv, matrix_to_pairs, to_json, ParameterFile, ProblemFile};
use crate::linalg::max_abs;
use crate::moment_model::{check_truncated_conditions, MomentSequence};
use crate::problem::TruncatedProblem;
use crate::scalar_even::solve_scalar_even;
use crate::solutions::{
    moments_from_transform, perron_inversion, AtomicMatrixMeasure, MeasureJson, PerronGrid, StieltjesTransform,
    VerificationReport, DEFAULT_EPS_SEQUENCE,
};
use crate::{CMatrix, Error, Tolerances, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_NOT_PSD: i32 = 2;
pub const EXIT_NOT_POSITIVE: i32 = 3;
pub const EXIT_REJECTED: i32 = 4;
pub const EXIT_UNVERIFIED: i32 = 5;

/// Contour-recovered moments are compared with the input at this relative
/// tolerance.
pub const CONTOUR_VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CmdOutput {
    pub code: i32,
    pub stdout: String,
}

impl CmdOutput {
    fn json(code: i32, value: &impl Serialize) -> Self {
        Self {
            code,
            stdout: to_json(value),
        }
    }

    fn error(code: i32, err: &Error) -> Self {
        let mut body = json!({ "error": err.to_string() });
        match err {
            Error::NotAdmissible { margin } => body["margin"] = json!(margin),
            Error::NotPsd { min_eigenvalue } => body["min_eigenvalue"] = json!(min_eigenvalue),
            _ => {}
        }
        Self::json(code, &body)
    }
}

fn gate_code(err: &Error) -> i32 {
    match err {
        Error::NotPsd { .. } => EXIT_NOT_PSD,
        Error::DependentDomain { .. } => EXIT_NOT_POSITIVE,
        Error::InvalidInput(_)
        | Error::NotHermitian { .. }
        | Error::ShapeMismatch { .. }
        | Error::InsufficientMoments { .. } => EXIT_MALFORMED,
        _ => EXIT_REJECTED,
    }
}

fn load(text: &str, overrides: &[(String, f64)]) -> Result<(ProblemFile, Tolerances, MomentSequence), CmdOutput> {
    let file = ProblemFile::parse(text).map_err(|e| CmdOutput::error(EXIT_MALFORMED, &e))?;
    let tol = file.tolerances(overrides).map_err(|e| CmdOutput::error(EXIT_MALFORMED, &e))?;
    let seq = file.sequence(&tol).map_err(|e| CmdOutput::error(EXIT_MALFORMED, &e))?;
    Ok((file, tol, seq))
}

pub fn cmd_check(text: &str, overrides: &[(String, f64)]) -> CmdOutput {
    let (_, tol, seq) = match load(text, overrides) {
        Ok(x) => x,
        Err(out) => return out,
    };
    let report = match check_truncated_conditions(&seq, &tol) {
        Ok(r) => r,
        Err(e) => return CmdOutput::error(EXIT_MALFORMED, &e),
    };
    let (code, message) = if !report.gamma_d_psd {
        (EXIT_NOT_PSD, "Γ_d is not positive semidefinite: no solution")
    } else if !report.gamma_prev_positive {
        (
            EXIT_NOT_POSITIVE,
            "warning: Γ_{d-1} is singular; this case is outside what the solver covers",
        )
    } else {
        (EXIT_OK, "solvable")
    };
    CmdOutput::json(code, &json!({ "report": report, "message": message }))
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol_overrides: Vec<(String, f64)>,
    /// Takes precedence over the file's parameter.
    pub parameter: Option<ParameterFile>,
    pub dump_gram: bool,
    pub dump_operator: bool,
    pub contour_radius: Option<f64>,
    pub contour_points: usize,
    pub grid: Option<PerronGrid>,
    pub eps_sequence: Vec<f64>,
    /// Print only the density CSV (needs `grid`).
    pub csv: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_overrides: Vec::new(),
            parameter: None,
            dump_gram: false,
            dump_operator: false,
            contour_radius: None,
            contour_points: 512,
            grid: None,
            eps_sequence: DEFAULT_EPS_SEQUENCE.to_vec(),
            csv: false,
        }
    }
}

fn pairs(m: &CMatrix) -> Value {
    json!(matrix_to_pairs(m))
}

fn operator_dump(p: &TruncatedProblem) -> Value {
    let a = p.shift();
    let pair = p.deficiency();
    let f = p.forbidden();
    json!({
        "dom_basis": pairs(a.dom_basis()),
        "action": pairs(a.action()),
        "perp_basis": pairs(a.perp_basis()),
        "basis_ni": pairs(&pair.basis_ni),
        "basis_nmi": pairs(&pair.basis_nmi),
        "forbidden": {
            "dom_basis": pairs(&f.dom_basis),
            "matrix": pairs(&f.matrix),
            "full_matrix": f.full_matrix().map(|m| pairs(&m)),
        },
    })
}

fn density(t: &StieltjesTransform, opts: &SolveOptions, tol: &Tolerances) -> Result<Option<(Value, String)>, Error> {
    let Some(grid) = opts.grid else {
        return Ok(None);
    };
    let r = perron_inversion(t, &grid, &opts.eps_sequence, tol)?;
    let value = json!({
        "grid": grid,
        "eps": r.eps,
        "differences": r.differences,
        "mass_estimate": r.mass_estimate,
        "cells": r.cells,
        "increments": r.increments.iter().map(pairs).collect::<Vec<_>>(),
    });
    Ok(Some((value, density_csv(&r))))
}

pub fn cmd_solve(text: &str, opts: &SolveOptions) -> CmdOutput {
    let (file, tol, seq) = match load(text, &opts.tol_overrides) {
        Ok(x) => x,
        Err(out) => return out,
    };
    if opts.csv && opts.grid.is_none() {
        return CmdOutput::error(EXIT_MALFORMED, &Error::InvalidInput("--csv needs --grid".into()));
    }
    let problem = match TruncatedProblem::new(&seq, &tol) {
        Ok(p) => p,
        Err(e) => return CmdOutput::error(gate_code(&e), &e),
    };
    let q = problem.deficiency().dim();
    let param = match opts.parameter.as_ref().or(file.parameter.as_ref()) {
        Some(spec) => match spec.to_parameter(q) {
            Ok(p) => p,
            Err(e) => return CmdOutput::error(EXIT_REJECTED, &e),
        },
        None => problem.default_isometry(),
    };

    let mut out = json!({
        "N": problem.block(),
        "d": problem.degree(),
        "q": q,
        "parameter": { "kind": match param.kind() {
            ParameterKind::Isometric => "isometric",
            ParameterKind::Contraction => "contraction",
        }, "matrix": pairs(param.matrix()) },
    });
    if q == 0 {
        out["note"] = json!("q=0 unique");
    }
    if opts.dump_gram {
        out["gram"] = json!(problem.space().to_dump());
    }
    if opts.dump_operator {
        out["operator"] = operator_dump(&problem);
    }

    let result = match param.kind() {
        ParameterKind::Isometric => solve_isometric(&problem, &param, opts, &mut out),
        ParameterKind::Contraction => solve_contraction(&problem, &param, opts, &mut out),
    };
    match result {
        Ok((verified, csv)) => {
            if opts.csv {
                return CmdOutput {
                    code: EXIT_OK,
                    stdout: csv.unwrap_or_default(),
                };
            }
            CmdOutput::json(if verified { EXIT_OK } else { EXIT_UNVERIFIED }, &out)
        }
        Err(e) => {
            out["error"] = json!(e.to_string());
            if let Error::NotAdmissible { margin } = e {
                out["margin"] = json!(margin);
            }
            CmdOutput::json(EXIT_REJECTED, &out)
        }
    }
}

fn solve_isometric(
    problem: &TruncatedProblem,
    param: &ExtensionParameter,
    opts: &SolveOptions,
    out: &mut Value,
) -> Result<(bool, Option<String>), Error> {
    let tol = problem.tolerances();
    let adm = problem.admissibility(param)?;
    out["admissibility"] = json!(adm);
    if !adm.admissible {
        return Err(Error::NotAdmissible {
            margin: adm.margin.unwrap_or(0.0),
        });
    }
    let measure = problem.atomic_solution(param)?;
    let report = problem.verify(&measure, tol.moment_tol);
    out["measure"] = json!(measure.to_json());
    out["verification"] = json!(report);
    let csv = match density(&StieltjesTransform::from_measure(measure), opts, tol)? {
        Some((value, csv)) => {
            out["density"] = value;
            Some(csv)
        }
        None => None,
    };
    Ok((report.passed, csv))
}

fn solve_contraction(
    problem: &TruncatedProblem,
    param: &ExtensionParameter,
    opts: &SolveOptions,
    out: &mut Value,
) -> Result<(bool, Option<String>), Error> {
    let tol = problem.tolerances();
    param.validate(problem.deficiency().dim(), tol)?;
    let t = problem.transform(param.clone());
    let n_max = 2 * problem.degree();
    let contour = moments_from_transform(&t, opts.contour_radius, opts.contour_points, n_max, tol)?;
    let report = compare_moments(&contour.moments, problem.sequence(), CONTOUR_VERIFY_TOL);
    out["contour"] = json!(contour);
    out["recovered_moments"] = json!(contour.moments.iter().map(pairs).collect::<Vec<_>>());
    out["verification"] = json!(report);
    let samples = (-4..=4)
        .map(|k| {
            let lambda = C64::new(0.5 * k as f64, 1.0);
            t.evaluate(lambda).map(|v| json!({ "lambda": [lambda.re, lambda.im], "T": pairs(&v) }))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    out["transform_samples"] = json!(samples);
    let csv = match density(&t, opts, tol)? {
        Some((value, csv)) => {
            out["density"] = value;
            Some(csv)
        }
        None => None,
    };
    Ok((report.passed, csv))
}

fn compare_moments(got: &[CMatrix], seq: &MomentSequence, tol: f64) -> VerificationReport {
    let deviation: Vec<f64> = got.iter().zip(seq.entries()).map(|(a, b)| max_abs(&(a - b))).collect();
    let max_deviation = deviation.iter().copied().fold(0.0, f64::max);
    let scale = seq.entries().iter().map(max_abs).fold(0.0, f64::max);
    VerificationReport {
        passed: max_deviation <= tol * scale.max(1.0),
        deviation,
        max_deviation,
        scale,
        tol,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub theta: f64,
    pub admissible: bool,
    pub forbidden: bool,
    pub margin: Option<f64>,
    pub measure: Option<MeasureJson>,
    pub verification: Option<VerificationReport>,
    pub error: Option<String>,
}

/// `e^{iθ_j} I_q`, `θ_j = 2πj/k`, evaluated in parallel.
pub fn cmd_sweep(text: &str, theta_grid: usize, overrides: &[(String, f64)]) -> CmdOutput {
    let (_, tol, seq) = match load(text, overrides) {
        Ok(x) => x,
        Err(out) => return out,
    };
    if theta_grid == 0 {
        return CmdOutput::error(EXIT_MALFORMED, &Error::InvalidInput("--theta-grid must be positive".into()));
    }
    let problem = match TruncatedProblem::new(&seq, &tol) {
        Ok(p) => p,
        Err(e) => return CmdOutput::error(gate_code(&e), &e),
    };
    let thetas: Vec<f64> = (0..theta_grid).map(|j| 2.0 * PI * j as f64 / theta_grid as f64).collect();
    let results: Vec<(SweepEntry, Option<AtomicMatrixMeasure>)> = std::thread::scope(|s| {
        let handles: Vec<_> = thetas
            .iter()
            .map(|&theta| {
                let problem = &problem;
                s.spawn(move || sweep_one(problem, theta))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let distances: Vec<Vec<Option<f64>>> = results
        .iter()
        .map(|(_, a)| {
            results
                .iter()
                .map(|(_, b)| match (a, b) {
                    (Some(a), Some(b)) => Some(a.distance(b)),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let entries: Vec<SweepEntry> = results.into_iter().map(|(e, _)| e).collect();
    let admissible = entries.iter().filter(|e| e.admissible).count();
    let forbidden: Vec<f64> = entries.iter().filter(|e| e.forbidden).map(|e| e.theta).collect();
    CmdOutput::json(
        EXIT_OK,
        &json!({
            "q": problem.deficiency().dim(),
            "admissible_count": admissible,
            "forbidden_thetas": forbidden,
            "entries": entries,
            "distances": distances,
        }),
    )
}

fn sweep_one(problem: &TruncatedProblem, theta: f64) -> (SweepEntry, Option<AtomicMatrixMeasure>) {
    let param = problem.theta_parameter(theta);
    let mut entry = SweepEntry {
        theta,
        admissible: false,
        forbidden: false,
        margin: None,
        measure: None,
        verification: None,
        error: None,
    };
    let adm = match problem.admissibility(&param) {
        Ok(a) => a,
        Err(e) => {
            entry.error = Some(e.to_string());
            return (entry, None);
        }
    };
    entry.admissible = adm.admissible;
    entry.forbidden = !adm.admissible;
    entry.margin = adm.margin;
    if !adm.admissible {
        return (entry, None);
    }
    match problem.atomic_solution(&param) {
        Ok(m) => {
            entry.verification = Some(problem.verify(&m, problem.tolerances().moment_tol));
            entry.measure = Some(m.to_json());
            (entry, Some(m))
        }
        Err(e) => {
            entry.error = Some(e.to_string());
            (entry, None)
        }
    }
}

/// Parses `1,1,1,1`.
pub fn parse_moment_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("moment '{p}': {e}")))
        })
        .collect()
}

pub fn cmd_scalar_even(moments: &[f64], overrides: &[(String, f64)]) -> CmdOutput {
    let mut tol = Tolerances::default();
    for (k, v) in overrides {
        if let Err(e) = tol.set(k, *v) {
            return CmdOutput::error(EXIT_MALFORMED, &e);
        }
    }
    match solve_scalar_even(moments, &tol) {
        Ok(r) => CmdOutput::json(if r.verdict.is_solvable() { EXIT_OK } else { EXIT_NOT_PSD }, &r),
        Err(e) => CmdOutput::error(EXIT_MALFORMED, &e),
    }
}

pub fn cmd_verify(problem_text: &str, measure_text: &str, overrides: &[(String, f64)]) -> CmdOutput {
    let (_, tol, seq) = match load(problem_text, overrides) {
        Ok(x) => x,
        Err(out) => return out,
    };
    let measure = match MeasureJson::parse(measure_text).and_then(|m| m.to_measure()) {
        Ok(m) => m,
        Err(e) => return CmdOutput::error(EXIT_MALFORMED, &e),
    };
    if !measure.is_empty() && measure.dim() != seq.dim() {
        return CmdOutput::error(
            EXIT_MALFORMED,
            &Error::InvalidInput(format!("measure is {0}×{0}, moments are {1}×{1}", measure.dim(), seq.dim())),
        );
    }
    let report = crate::solutions::verify_moments(&measure, &seq, tol.moment_tol);
    CmdOutput::json(if report.passed { EXIT_OK } else { EXIT_UNVERIFIED }, &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const S101: &str = r#"{"N": 1, "moments": [[[1]], [[0]], [[1]]]}"#;

    #[test]
    fn check_codes() {
        assert_eq!(cmd_check(S101, &[]).code, EXIT_OK);
        assert_eq!(cmd_check(r#"{"N": 1, "moments": [[[1]], [[0]], [[-1]]]}"#, &[]).code, EXIT_NOT_PSD);
        assert_eq!(cmd_check(r#"{"N": 1, "moments": [[[0]], [[0]], [[1]]]}"#, &[]).code, EXIT_NOT_POSITIVE);
        assert_eq!(cmd_check("{", &[]).code, EXIT_MALFORMED);
    }

    #[test]
    fn solve_is_deterministic() {
        let a = cmd_solve(S101, &SolveOptions::default());
        let b = cmd_solve(S101, &SolveOptions::default());
        assert_eq!(a, b);
        assert_eq!(a.code, EXIT_OK);
    }

    #[test]
    fn forbidden_parameter_is_rejected_with_margin() {
        let opts = SolveOptions {
            parameter: Some(ParameterFile::Theta { constant_unimodular_theta: PI }),
            ..Default::default()
        };
        let out = cmd_solve(S101, &opts);
        assert_eq!(out.code, EXIT_REJECTED);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert!(v["margin"].as_f64().unwrap() < 1e-8);
    }

    #[test]
    fn csv_requires_grid() {
        let opts = SolveOptions {
            csv: true,
            ..Default::default()
        };
        assert_eq!(cmd_solve(S101, &opts).code, EXIT_MALFORMED);
    }
}
