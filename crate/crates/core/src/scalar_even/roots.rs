use nalgebra::DMatrix;

use crate::C64;

/// Roots of the monic polynomial `x^n + Σ_{k<n} c_k x^k` (`coeffs` holds
/// `c_0..c_{n-1}`) as companion-matrix eigenvalues, each polished by a few
/// Newton steps. Sorted by real part. `None` if the eigenvalue iteration
/// does not converge.
pub fn monic_roots(coeffs: &[f64]) -> Option<Vec<C64>> {
    let n = coeffs.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -coeffs[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut roots: Vec<C64> = companion
        .try_schur(f64::EPSILON, 10_000)?
        .complex_eigenvalues()
        .iter()
        .map(|&z| polish(coeffs, z))
        .collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Some(roots)
}

fn eval(coeffs: &[f64], x: C64) -> (C64, C64) {
    // Horner for p and p'
    let mut p = C64::new(1.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn polish(coeffs: &[f64], mut x: C64) -> C64 {
    for _ in 0..3 {
        let (p, dp) = eval(coeffs, x);
        if dp.norm() == 0.0 {
            break;
        }
        let next = x - p / dp;
        if !(next.re.is_finite() && next.im.is_finite()) || eval(coeffs, next).0.norm() >= p.norm() {
            break;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        // x^2 - 1
        let r = monic_roots(&[-1.0, 0.0]).unwrap();
        assert!((r[0] - C64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn linear() {
        let r = monic_roots(&[-1.0]).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn complex_pair() {
        // x^2 + 1
        let r = monic_roots(&[1.0, 0.0]).unwrap();
        assert!(r.iter().all(|z| (z.im.abs() - 1.0).abs() < 1e-14 && z.re.abs() < 1e-14));
    }

    #[test]
    fn cubic_from_known_roots() {
        // (x + 2)(x - 0.5)(x - 3) = x^3 - 1.5x^2 - 5.5x + 3
        let r = monic_roots(&[3.0, -5.5, -1.5]).unwrap();
        for (z, e) in r.iter().zip([-2.0, 0.5, 3.0]) {
            assert!((z - C64::new(e, 0.0)).norm() < 1e-12);
        }
    }
}
