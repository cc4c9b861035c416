use serde::{Deserialize, Serialize};

use crate::assembly::Scheme;
use crate::error::{Error, Result};

/// Constant material coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub mu: f64,
    pub lambda: f64,
    /// Biot coefficient.
    pub alpha: f64,
    /// Storage coefficient `1/beta`; zero for an incompressible fluid and grains.
    pub inv_beta: f64,
    /// Hydraulic conductivity.
    pub conductivity: f64,
    /// Fluid weight density `rho_f g` (only the first `d` components are used).
    pub fluid_weight: [f64; 3],
}

impl MaterialParams {
    pub fn from_lame(mu: f64, lambda: f64, alpha: f64, inv_beta: f64, conductivity: f64) -> Result<Self> {
        let p = MaterialParams {
            mu,
            lambda,
            alpha,
            inv_beta,
            conductivity,
            fluid_weight: [0.0; 3],
        };
        p.validate()?;
        Ok(p)
    }

    /// Lamé parameters from Young's modulus and Poisson ratio.
    pub fn from_young(e: f64, nu: f64, alpha: f64, inv_beta: f64, conductivity: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "Poisson ratio {nu} must lie in (0, 0.5)"
            )));
        }
        if !(e > 0.0) {
            return Err(Error::InvalidParameter(format!("Young's modulus {e} must be positive")));
        }
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = e * nu / ((1.0 - 2.0 * nu) * (1.0 + nu));
        Self::from_lame(mu, lambda, alpha, inv_beta, conductivity)
    }

    /// Biot modulus `beta`; infinite when the storage coefficient is zero.
    pub fn beta(&self) -> f64 {
        1.0 / self.inv_beta
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return fail(format!("mu = {} must be positive", self.mu));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return fail(format!("lambda = {} must be nonnegative", self.lambda));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail(format!("alpha = {} must lie in (0, 1]", self.alpha));
        }
        if !(self.inv_beta >= 0.0) || !self.inv_beta.is_finite() {
            return fail(format!("1/beta = {} must be nonnegative", self.inv_beta));
        }
        if !(self.conductivity > 0.0) || !self.conductivity.is_finite() {
            return fail(format!("K = {} must be positive", self.conductivity));
        }
        Ok(())
    }

    /// `lambda + 2 mu / d`.
    pub fn constrained_modulus(&self, dim: usize) -> f64 {
        self.lambda + 2.0 * self.mu / dim as f64
    }
}

/// Which formula family to use for the stabilization and coupling presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Negligible storage: `1/beta` is left out of `L`.
    SmallStorage,
    /// `1/beta` is added to `L`.
    General,
}

/// Stabilization parameter `L` multiplying `M_l - M`.
///
/// P1-P1 uses `3 alpha^2 / (2 m)`, MINI uses `alpha^2 / m` with
/// `m = lambda + 2 mu / d`; the general regime adds `1/beta`.
pub fn stabilization_coefficient(scheme: Scheme, params: &MaterialParams, dim: usize, regime: Regime) -> Result<f64> {
    params.validate()?;
    let c = params.alpha * params.alpha / params.constrained_modulus(dim);
    let base = match scheme {
        Scheme::P1P1 => 1.5 * c,
        Scheme::Mini => c,
    };
    Ok(match regime {
        Regime::SmallStorage => base,
        Regime::General => base + params.inv_beta,
    })
}
