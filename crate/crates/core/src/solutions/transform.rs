use std::f64::consts::PI;

use serde::Serialize;

use crate::extensions::{apply_continued_resolvent, apply_generalized_resolvent, extension_matrix, ParameterSource};
use crate::linalg::{max_abs, operator_norm};
use crate::shift_operator::{DeficiencyPair, ShiftOperator};
use crate::solutions::AtomicMatrixMeasure;
use crate::{CMatrix, Error, Result, Tolerances, C64};

/// Matrix Stieltjes transform `T(λ) = ∫ dM(x)/(x - λ)` of a solution, with
/// `T[k][j] = (R_λ x_k, x_j)`.
#[derive(Debug, Clone)]
pub struct StieltjesTransform {
    n: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Resolvent {
        a: Box<ShiftOperator>,
        pair: DeficiencyPair,
        source: ParameterSource,
        tol: Tolerances,
    },
    Atomic(AtomicMatrixMeasure),
}

impl StieltjesTransform {
    /// Transform generated by the generalized resolvent for `(A, F)`.
    pub fn from_resolvent(a: &ShiftOperator, pair: &DeficiencyPair, source: ParameterSource, tol: &Tolerances) -> Self {
        Self {
            n: a.block(),
            kind: Kind::Resolvent {
                a: Box::new(a.clone()),
                pair: pair.clone(),
                source,
                tol: *tol,
            },
        }
    }

    pub fn from_measure(measure: AtomicMatrixMeasure) -> Self {
        Self {
            n: measure.dim(),
            kind: Kind::Atomic(measure),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_measure(AtomicMatrixMeasure::zero(n))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Whether the transform is a rational function whose `C_+` branch can
    /// be continued (constant parameters and atomic measures).
    pub fn is_rational(&self) -> bool {
        match &self.kind {
            Kind::Resolvent { source, .. } => source.constant().is_some(),
            Kind::Atomic(_) => true,
        }
    }

    /// `T(λ)` for `λ ∉ R`; the lower half-plane uses the mirrored branch.
    pub fn evaluate(&self, lambda: C64) -> Result<CMatrix> {
        match &self.kind {
            Kind::Resolvent { a, pair, source, tol } => {
                let x = a.space().columns(0, self.n);
                let h = apply_generalized_resolvent(a, pair, source, lambda, &x, tol)?;
                Ok((x.adjoint() * h).transpose())
            }
            Kind::Atomic(m) => {
                if lambda.im == 0.0 {
                    return Err(Error::RealSpectralParameter {
                        re: lambda.re,
                        im: lambda.im,
                    });
                }
                Ok(m.transform(lambda))
            }
        }
    }

    /// The `C_+` branch continued as a rational function to any `λ` off its
    /// poles.
    pub fn evaluate_continued(&self, lambda: C64) -> Result<CMatrix> {
        match &self.kind {
            Kind::Resolvent { a, pair, source, tol } => {
                let v = source.constant().ok_or(Error::NotRational)?;
                let x = a.space().columns(0, self.n);
                let h = apply_continued_resolvent(a, pair, v, lambda, &x, tol)?;
                Ok((x.adjoint() * h).transpose())
            }
            Kind::Atomic(m) => Ok(m.transform(lambda)),
        }
    }

    /// Integrands for the moments of the continued branch: for each
    /// `n ≤ n_max` a matrix function `F_n` and a power `m` with
    /// `Ŝ_n = -(1/2πi) ∮ λ^m F_n(λ) dλ`.
    ///
    /// `F_n[a][b] = (R_λ x_{kN+a}, x_{lN+b})` with `k + l = n` as far as the
    /// Gram vectors reach (`k, l ≤ d`), whose residue at a pole `t` is
    /// `t^n W`. The factor `λ^n` is thereby absorbed into the resolvent
    /// instead of being applied to samples, where it would cancel down.
    fn moment_integrands(&self, lambda: C64, n_max: usize) -> Result<Vec<(CMatrix, i32)>> {
        let n = self.n;
        match &self.kind {
            Kind::Resolvent { a, pair, source, tol } => {
                let v = source.constant().ok_or(Error::NotRational)?;
                let d = a.degree();
                let x = a.space().columns(0, (d + 1) * n);
                let h = apply_continued_resolvent(a, pair, v, lambda, &x, tol)?;
                let gram = x.adjoint() * h;
                Ok((0..=n_max)
                    .map(|order| {
                        let k = order.min(d);
                        let l = (order - k).min(d);
                        let block = gram.view((l * n, k * n), (n, n)).transpose();
                        (block, (order - k - l) as i32)
                    })
                    .collect())
            }
            Kind::Atomic(m) => Ok((0..=n_max)
                .map(|order| {
                    let mut f = CMatrix::zeros(n, n);
                    for atom in m.atoms() {
                        f += &atom.weight * (C64::new(atom.t.powi(order as i32), 0.0) / (atom.t - lambda));
                    }
                    (f, 0)
                })
                .collect()),
        }
    }

    /// Poles of the continued branch, or `None` when the eigenvalue
    /// iteration does not converge.
    pub fn poles(&self) -> Result<Option<Vec<C64>>> {
        match &self.kind {
            Kind::Resolvent { a, pair, source, tol } => {
                let v = source.constant().ok_or(Error::NotRational)?;
                let g = extension_matrix(a, pair, v.matrix(), tol)?;
                if g.nrows() == 0 {
                    return Ok(Some(Vec::new()));
                }
                Ok(g
                    .try_schur(f64::EPSILON, 10_000)
                    .and_then(|s| s.eigenvalues())
                    .map(|ev| ev.iter().copied().collect()))
            }
            Kind::Atomic(m) => Ok(Some(m.atoms().iter().map(|a| C64::new(a.t, 0.0)).collect())),
        }
    }

    /// Radius of a disc containing every pole of the continued branch.
    pub fn pole_radius(&self) -> Result<f64> {
        if let Some(poles) = self.poles()? {
            return Ok(poles.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        match &self.kind {
            // ‖G‖ bounds the spectral radius
            Kind::Resolvent { a, pair, source, tol } => {
                let v = source.constant().ok_or(Error::NotRational)?;
                Ok(operator_norm(&extension_matrix(a, pair, v.matrix(), tol)?))
            }
            Kind::Atomic(_) => unreachable!("atomic poles are always known"),
        }
    }
}

/// `T(λ)` for the generalized resolvent of `(A, F)`.
pub fn stieltjes_transform(
    a: &ShiftOperator,
    pair: &DeficiencyPair,
    source: &ParameterSource,
    lambda: C64,
    tol: &Tolerances,
) -> Result<CMatrix> {
    StieltjesTransform::from_resolvent(a, pair, source.clone(), tol).evaluate(lambda)
}

/// One circle of the integration contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Circle {
    fn centered(center: C64, radius: f64) -> Self {
        Self {
            center: [center.re, center.im],
            radius,
        }
    }

    fn center(&self) -> C64 {
        C64::new(self.center[0], self.center[1])
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            radius: self.radius * factor,
            ..*self
        }
    }
}

/// Moments recovered from a rational transform by contour integration.
#[derive(Debug, Clone, Serialize)]
pub struct ContourMoments {
    #[serde(skip)]
    pub moments: Vec<CMatrix>,
    pub circles: Vec<Circle>,
    /// Largest circle radius.
    pub radius: f64,
    pub n_points: usize,
    /// Largest scaled change against the enlarged check contour.
    pub change: f64,
}

fn contour_pass(t: &StieltjesTransform, circles: &[Circle], n_points: usize, n_max: usize) -> Result<Vec<CMatrix>> {
    let n = t.dim();
    let mut acc = vec![CMatrix::zeros(n, n); n_max + 1];
    for circle in circles {
        let center = circle.center();
        for k in 0..n_points {
            let theta = 2.0 * PI * (k as f64 + 0.5) / n_points as f64;
            let offset = C64::from_polar(circle.radius, theta);
            let lambda = center + offset;
            for (s, (f, m)) in acc.iter_mut().zip(t.moment_integrands(lambda, n_max)?) {
                let weight = offset * lambda.powi(m);
                *s += f.map(|z| z * weight);
            }
        }
    }
    let scale = C64::new(-1.0 / n_points as f64, 0.0);
    Ok(acc.into_iter().map(|s| s * scale).collect())
}

/// Contour for [`moments_from_transform`]: the circle `|λ| = 2(1 + ρ)`
/// unless the pole moduli jump, i.e. some poles sit beyond `4(1 + m)` where
/// `m` bounds the rest. Then the core gets a circle between the two
/// levels, and the far poles are grouped until each group lies at least
/// four times its spread away from every other pole, with one circle per
/// group at the geometric mean of the two distances.
///
/// A single big circle around a far pole makes the core poles' samples
/// large relative to their residues; a small circle around the far pole
/// keeps both sides well resolved.
fn pole_circles(poles: &[C64], rho: f64) -> Vec<Circle> {
    let single = vec![Circle::centered(C64::new(0.0, 0.0), 2.0 * (1.0 + rho))];
    let mut moduli: Vec<f64> = poles.iter().map(|p| p.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    let Some(split) = moduli.windows(2).position(|w| w[1] > 4.0 * (1.0 + w[0])) else {
        return single;
    };
    let core = moduli[split];
    let far_start = moduli[split + 1];
    let core_circle = Circle::centered(C64::new(0.0, 0.0), ((1.0 + core) * far_start).sqrt());

    let mut groups: Vec<Vec<C64>> = poles.iter().filter(|p| p.norm() > core).map(|&p| vec![p]).collect();
    let core_poles: Vec<C64> = poles.iter().filter(|p| p.norm() <= core).copied().collect();
    loop {
        // (center, spread, gap, nearest far group or None for the core)
        let shapes: Vec<(C64, f64, f64, Option<usize>)> = (0..groups.len())
            .map(|g| {
                let c = groups[g].iter().sum::<C64>() / groups[g].len() as f64;
                let spread = groups[g].iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
                let spread = spread.max(1e-3 * (1.0 + c.norm()));
                let to_core = core_poles
                    .iter()
                    .map(|p| ((p - c).norm(), None))
                    .fold((f64::INFINITY, None), |best, x| if x.0 < best.0 { x } else { best });
                let (gap, nearest) = (0..groups.len())
                    .filter(|&h| h != g)
                    .flat_map(|h| groups[h].iter().map(move |p| (p, h)))
                    .map(|(p, h)| ((p - c).norm(), Some(h)))
                    .fold(to_core, |best, x| if x.0 < best.0 { x } else { best });
                (c, spread, gap, nearest)
            })
            .collect();
        let (worst, ratio) = (0..groups.len())
            .map(|g| (g, shapes[g].1 / shapes[g].2))
            .fold((0, 0.0), |best, x| if x.1 > best.1 { x } else { best });
        if ratio <= 0.25 {
            let mut circles = vec![core_circle];
            circles.extend(shapes.iter().map(|&(c, spread, gap, _)| Circle::centered(c, (spread * gap).sqrt())));
            return circles;
        }
        let Some(h) = shapes[worst].3 else {
            return single;
        };
        let moved = groups[h.max(worst)].clone();
        groups[h.min(worst)].extend(moved);
        groups.remove(h.max(worst));
    }
}

/// `Ŝ_n = -(1/2πi) ∮ λ^n T(λ) dλ` by the trapezoid rule on the rational
/// continuation of the `C_+` branch, for `n = 0..=n_max`. Moments up to
/// `S_{2d}` are integrated from the resolvent blocks of the Gram vectors
/// rather than from `λ^n T(λ)`.
///
/// With `radius` the contour is `|λ| = radius`; otherwise `|λ| = 2(1 + ρ)`
/// or, when a few poles lie far out, one circle around the core and small
/// ones around the far poles. The computation is
/// repeated on enlarged circles (`2R` for a single circle); a scaled change
/// above `contour_tol` is reported as [`Error::RadiusTooSmall`].
pub fn moments_from_transform(
    t: &StieltjesTransform,
    radius: Option<f64>,
    n_points: usize,
    n_max: usize,
    tol: &Tolerances,
) -> Result<ContourMoments> {
    if !t.is_rational() {
        return Err(Error::NotRational);
    }
    if n_points == 0 || n_points % 2 != 0 {
        return Err(Error::InvalidInput(format!("n_points must be positive and even, got {n_points}")));
    }
    let rho = t.pole_radius()?;
    let circles = match radius {
        Some(r) if !(r > 0.0) => {
            return Err(Error::InvalidInput(format!("contour radius must be positive, got {r}")));
        }
        Some(r) => vec![Circle::centered(C64::new(0.0, 0.0), r)],
        None => pole_circles(&t.poles()?.unwrap_or_default(), rho),
    };
    // grouped circles stay inside their gaps when grown by √2
    let factor = if circles.len() == 1 { 2.0 } else { 2f64.sqrt() };
    let check: Vec<Circle> = circles.iter().map(|c| c.scaled(factor)).collect();
    let first = contour_pass(t, &circles, n_points, n_max)?;
    let second = contour_pass(t, &check, n_points, n_max)?;
    let s0 = first.first().map(max_abs).unwrap_or(0.0);
    let base = if s0 > 0.0 { s0 } else { 1.0 };
    let growth = rho.max(1.0);
    let change = first
        .iter()
        .zip(&second)
        .enumerate()
        .map(|(k, (a, b))| max_abs(&(a - b)) / (base * growth.powi(k as i32)))
        .fold(0.0, f64::max);
    if change > tol.contour_tol {
        return Err(Error::RadiusTooSmall { change });
    }
    Ok(ContourMoments {
        moments: first,
        radius: circles.iter().map(|c| c.radius).fold(0.0, f64::max),
        circles,
        n_points,
        change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_transform_moments() {
        let m = AtomicMatrixMeasure::scalar(&[(-1., 0.5), (1., 0.5)]);
        let t = StieltjesTransform::from_measure(m);
        let r = moments_from_transform(&t, Some(3.0), 256, 4, &Tolerances::default()).unwrap();
        let expected = [1., 0., 1., 0., 1.];
        for (s, e) in r.moments.iter().zip(expected) {
            assert!((s[(0, 0)] - C64::new(e, 0.)).norm() < 1e-12);
        }
    }

    #[test]
    fn far_atom_gets_its_own_circle() {
        let m = AtomicMatrixMeasure::scalar(&[(-1., 0.3), (0.5, 0.7 - 1e-9), (40., 1e-9)]);
        let t = StieltjesTransform::from_measure(m.clone());
        let r = moments_from_transform(&t, None, 256, 8, &Tolerances::default()).unwrap();
        assert_eq!(r.circles.len(), 2);
        for (n, e) in m.moments(9).iter().enumerate() {
            let err = (r.moments[n][(0, 0)] - e[(0, 0)]).norm() / m.absolute_moment(n);
            assert!(err < 1e-12, "n={n}: {err:e}");
        }
    }

    #[test]
    fn clustered_poles_use_one_circle() {
        assert_eq!(pole_circles(&[C64::new(-1., 0.), C64::new(1., 0.)], 1.0).len(), 1);
        let c = pole_circles(&[C64::new(-1., 0.), C64::new(1., 0.), C64::new(30., -2.)], 30.1);
        assert_eq!(c.len(), 2);
        let c = pole_circles(&[C64::new(1., 0.), C64::new(30., -2.), C64::new(-30., -2.)], 30.1);
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn zero_transform_has_zero_moments() {
        let t = StieltjesTransform::zero(2);
        let r = moments_from_transform(&t, None, 64, 3, &Tolerances::default()).unwrap();
        assert!(r.moments.iter().all(|s| max_abs(s) == 0.0));
    }

    #[test]
    fn odd_point_count_is_rejected() {
        let t = StieltjesTransform::zero(1);
        assert!(moments_from_transform(&t, None, 63, 3, &Tolerances::default()).is_err());
    }

    #[test]
    fn too_small_radius_is_detected() {
        // poles at ±1 lie outside a contour of radius 0.5
        let m = AtomicMatrixMeasure::scalar(&[(-1., 0.5), (1., 0.5)]);
        let t = StieltjesTransform::from_measure(m);
        assert!(matches!(
            moments_from_transform(&t, Some(0.5), 64, 2, &Tolerances::default()),
            Err(Error::RadiusTooSmall { .. })
        ));
    }
}
