//! Material and contact model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic hyperelastic material with derived Lame parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Material {
    /// Young's modulus (Pa).
    pub e: f64,
    /// Poisson ratio.
    pub nu: f64,
    /// Density (kg/m^3).
    pub rho: f64,
    /// Friction coefficient.
    pub mu_f: f64,
    pub lame_mu: f64,
    pub lame_lambda: f64,
}

impl Material {
    pub fn new(e: f64, nu: f64, rho: f64, mu_f: f64) -> Result<Self> {
        if !(e > 0.0) {
            return Err(Error::invalid(format!("Young's modulus must be positive, got {e}")));
        }
        if !(0.0..0.5).contains(&nu) {
            return Err(Error::invalid(format!("Poisson ratio must be in [0, 0.5), got {nu}")));
        }
        if !(rho > 0.0) {
            return Err(Error::invalid(format!("density must be positive, got {rho}")));
        }
        if !(mu_f >= 0.0) {
            return Err(Error::invalid(format!(
                "friction coefficient must be non-negative, got {mu_f}"
            )));
        }
        Ok(Material {
            e,
            nu,
            rho,
            mu_f,
            lame_mu: e / (2.0 * (1.0 + nu)),
            lame_lambda: e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        })
    }

    /// Parameter vector `[E, nu, rho, mu_f]`.
    pub fn theta(&self) -> [f64; 4] {
        [self.e, self.nu, self.rho, self.mu_f]
    }

    pub fn from_theta(theta: &[f64; 4]) -> Result<Self> {
        Material::new(theta[0], theta[1], theta[2], theta[3])
    }
}

impl<'de> Deserialize<'de> for Material {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            e: f64,
            nu: f64,
            rho: f64,
            mu_f: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        Material::new(raw.e, raw.nu, raw.rho, raw.mu_f).map_err(serde::de::Error::custom)
    }
}

/// Log-barrier contact parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    /// Activation distance (m): pairs farther than this exert no force.
    pub dhat: f64,
    /// Barrier stiffness.
    pub kappa: f64,
}

impl BarrierParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dhat > 0.0 && self.kappa > 0.0) {
            return Err(Error::invalid(format!(
                "barrier params must be positive: dhat={}, kappa={}",
                self.dhat, self.kappa
            )));
        }
        Ok(())
    }
}

/// Smooth friction parameters. `eps_v` is the mollifier knot expressed as a
/// per-step displacement (m): slip below it is treated as sticking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionParams {
    pub eps_v: f64,
    pub mu_f: f64,
}

impl FrictionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_v > 0.0) {
            return Err(Error::invalid(format!("eps_v must be positive, got {}", self.eps_v)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lame_relations() {
        let m = Material::new(1.25e5, 0.45, 2.0e3, 1.0).unwrap();
        assert!((m.lame_mu - m.e / (2.0 * (1.0 + m.nu))).abs() < 1e-9);
        assert!(
            (m.lame_lambda - m.e * m.nu / ((1.0 + m.nu) * (1.0 - 2.0 * m.nu))).abs()
                < 1e-9 * m.lame_lambda
        );
    }

    #[test]
    fn rejects_invalid() {
        assert!(Material::new(-1.0, 0.3, 1e3, 0.5).is_err());
        assert!(Material::new(1e5, 0.5, 1e3, 0.5).is_err());
        assert!(Material::new(1e5, 0.3, 0.0, 0.5).is_err());
        assert!(Material::new(1e5, 0.3, 1e3, -0.5).is_err());
    }

    #[test]
    fn material_json_roundtrip() {
        let m = Material::new(8e4, 0.42, 1.5e3, 0.8).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: Material = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
