use serde::{Deserialize, Serialize};

/// Numerical thresholds. Every rank, positivity and admissibility decision is
/// taken against one of these; the reports carry the margins they were
/// compared with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity of input moments, relative to the largest entry.
    pub herm_tol: f64,
    /// `Γ ≥ 0` accepts a smallest eigenvalue down to `-psd_tol·max|Γ|`.
    pub psd_tol: f64,
    /// `Γ > 0` requires a smallest eigenvalue above `pos_tol·max|Γ|`.
    pub pos_tol: f64,
    /// Eigenvalues of `Γ_d` below `rank_tol·λ_max` are discarded.
    pub rank_tol: f64,
    /// Absolute floor for admissibility margins (singular values).
    pub adm_tol: f64,
    /// Slack allowed on `‖V‖ ≤ 1` and on unimodularity of isometries.
    pub norm_tol: f64,
    /// Reconstruction checks (Gram reproduction, shift identity).
    pub recon_tol: f64,
    /// Relative residual accepted from linear solves.
    pub solve_tol: f64,
    /// Eigenvalues closer than `cluster_tol·spectral_radius` become one atom.
    pub cluster_tol: f64,
    /// Atoms lighter than `weight_tol·max|S_0|` are dropped.
    pub weight_tol: f64,
    /// Maximum change of contour moments under radius doubling.
    pub contour_tol: f64,
    /// Richardson stabilization threshold for Perron inversion.
    pub perron_tol: f64,
    /// `|Im x| ≤ root_tol·(1+max|x|)` counts as a real root.
    pub root_tol: f64,
    /// Roots closer than `sep_tol·spread` are not distinct.
    pub sep_tol: f64,
    /// Moment matching in the scalar even procedure, relative to `max|s|`.
    pub moment_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_tol: 1e-10,
            psd_tol: 1e-10,
            pos_tol: 1e-10,
            rank_tol: 1e-12,
            adm_tol: 1e-8,
            norm_tol: 1e-10,
            recon_tol: 1e-8,
            solve_tol: 1e-8,
            cluster_tol: 1e-9,
            weight_tol: 1e-12,
            contour_tol: 1e-8,
            perron_tol: 1e-3,
            root_tol: 1e-8,
            sep_tol: 1e-8,
            moment_tol: 1e-8,
        }
    }
}

impl Tolerances {
    /// Overrides one field by name, e.g. `("psd_tol", 1e-9)`.
    pub fn set(&mut self, key: &str, value: f64) -> crate::Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(crate::Error::InvalidInput(format!("tolerance {key} = {value} must be finite and ≥ 0")));
        }
        let slot = match key {
            "herm_tol" => &mut self.herm_tol,
            "psd_tol" => &mut self.psd_tol,
            "pos_tol" => &mut self.pos_tol,
            "rank_tol" => &mut self.rank_tol,
            "adm_tol" => &mut self.adm_tol,
            "norm_tol" => &mut self.norm_tol,
            "recon_tol" => &mut self.recon_tol,
            "solve_tol" => &mut self.solve_tol,
            "cluster_tol" => &mut self.cluster_tol,
            "weight_tol" => &mut self.weight_tol,
            "contour_tol" => &mut self.contour_tol,
            "perron_tol" => &mut self.perron_tol,
            "root_tol" => &mut self.root_tol,
            "sep_tol" => &mut self.sep_tol,
            "moment_tol" => &mut self.moment_tol,
            _ => return Err(crate::Error::InvalidInput(format!("unknown tolerance '{key}'"))),
        };
        *slot = value;
        Ok(())
    }

    /// Parses `key=value`.
    pub fn parse_override(text: &str) -> crate::Result<(String, f64)> {
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| crate::Error::InvalidInput(format!("tolerance override '{text}' must be key=value")))?;
        let value = value
            .trim()
            .parse::<f64>()
            .map_err(|e| crate::Error::InvalidInput(format!("tolerance override '{text}': {e}")))?;
        Ok((key.trim().to_string(), value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let mut t = Tolerances::default();
        let (k, v) = Tolerances::parse_override("psd_tol=1e-6").unwrap();
        t.set(&k, v).unwrap();
        assert_eq!(t.psd_tol, 1e-6);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("psd_tol", -1.0).is_err());
        assert!(Tolerances::parse_override("psd_tol").is_err());
    }
}
