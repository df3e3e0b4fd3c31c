//! Physical constants, model parameters and unit conversion.
//!
//! Internally every energy is measured in units of the cutoff and every
//! time in units of its inverse. `unit_scale` carries the factor back to
//! rad/s.

use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Fine-structure constant.
    pub alpha: f64,
    /// Electron rest frequency m_e c^2 / hbar in rad/s.
    pub m_e: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        alpha: 7.297_352_569_3e-3,
        m_e: 7.763_440_7e20,
    };

    pub fn new(alpha: f64, m_e: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.01) {
            return Err(DecayError::InvalidParameter(format!(
                "alpha must lie in (0, 0.01), got {alpha}"
            )));
        }
        if !(m_e > 0.0 && m_e.is_finite()) {
            return Err(DecayError::InvalidParameter(format!(
                "m_e must be positive and finite, got {m_e}"
            )));
        }
        Ok(PhysicalConstants { alpha, m_e })
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Dimensionless coupling.
    pub lambda: f64,
    /// Form-factor cutoff in rad/s.
    pub cutoff: f64,
    /// Energy of the initial state in rad/s.
    pub omega0: f64,
    /// rad/s per internal energy unit.
    pub unit_scale: f64,
}

impl ModelParams {
    /// Generic parameters from user values in rad/s. The internal unit is
    /// the cutoff. `lambda = 0` is accepted (the free evolution).
    pub fn new(lambda: f64, cutoff: f64, omega0: f64) -> Result<Self> {
        let p = ModelParams {
            lambda,
            cutoff,
            omega0,
            unit_scale: cutoff,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DecayError::InvalidParameter(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return bad(format!("cutoff must be positive, got {}", self.cutoff));
        }
        if !(self.omega0 > 0.0 && self.omega0 < self.cutoff) {
            return bad(format!(
                "omega0 must satisfy 0 < omega0 < cutoff, got {} (cutoff {})",
                self.omega0, self.cutoff
            ));
        }
        if !(self.unit_scale > 0.0 && self.unit_scale.is_finite()) {
            return bad(format!("unit_scale must be positive, got {}", self.unit_scale));
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let p = ModelParams { lambda, ..*self };
        p.validate()?;
        Ok(p)
    }

    /// omega0 in internal units.
    pub fn omega0_internal(&self) -> f64 {
        self.omega0 / self.unit_scale
    }

    /// Cutoff in internal units.
    pub fn cutoff_internal(&self) -> f64 {
        self.cutoff / self.unit_scale
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda * self.lambda
    }

    /// Seconds to internal time.
    pub fn to_internal(&self, t_si: f64) -> Result<f64> {
        if !t_si.is_finite() {
            return Err(DecayError::InvalidParameter(format!("time must be finite, got {t_si}")));
        }
        Ok(t_si * self.unit_scale)
    }

    /// Internal time to seconds.
    pub fn from_internal(&self, t: f64) -> f64 {
        t / self.unit_scale
    }

    /// Internal energy to rad/s.
    pub fn energy_si(&self, e: f64) -> f64 {
        e * self.unit_scale
    }

    /// Rate in inverse internal time to 1/s.
    pub fn rate_si(&self, r: f64) -> f64 {
        r * self.unit_scale
    }
}

/// Hydrogen 2P-1S parameters from the fine-structure constant and the
/// electron rest frequency.
pub fn hydrogen_params(c: PhysicalConstants) -> ModelParams {
    let cutoff = 1.5 * c.alpha * c.m_e;
    let lambda = (2.0 / std::f64::consts::PI).sqrt() * (2.0f64 / 3.0).powf(4.5) * c.alpha.powf(1.5);
    let omega0 = 0.375 * c.alpha * c.alpha * c.m_e;
    ModelParams {
        lambda,
        cutoff,
        omega0,
        unit_scale: cutoff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hydrogen_values() {
        let p = hydrogen_params(PhysicalConstants::CODATA);
        assert!((p.cutoff / 8.498e18 - 1.0).abs() < 1e-3);
        assert!((p.lambda / 0.802e-4 - 1.0).abs() < 5e-3);
        assert!((p.omega0 / 1.550e16 - 1.0).abs() < 1e-3);
        assert!((p.lambda2() / 6.43e-9 - 1.0).abs() < 5e-3);
        let c = PhysicalConstants::CODATA;
        assert!((p.omega0 / p.cutoff - c.alpha / 4.0).abs() < 1e-18);
    }

    #[test]
    fn deterministic() {
        let a = hydrogen_params(PhysicalConstants::CODATA);
        let b = hydrogen_params(PhysicalConstants::CODATA);
        assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
        assert_eq!(a.omega0.to_bits(), b.omega0.to_bits());
    }

    #[test]
    fn unit_roundtrip() {
        let p = hydrogen_params(PhysicalConstants::CODATA);
        assert_eq!(p.to_internal(0.0).unwrap(), 0.0);
        assert!((p.to_internal(1.0 / p.cutoff).unwrap() - 1.0).abs() < 1e-15);
        for t in [1e-18, 3.7e-12, 2.5e-9, 1.0] {
            let back = p.from_internal(p.to_internal(t).unwrap());
            assert!((back - t).abs() <= 1e-15 * t);
        }
        assert!(p.to_internal(f64::NAN).is_err());
    }

    #[test]
    fn rejects_bad_constants() {
        assert!(PhysicalConstants::new(0.2, 1.0).is_err());
        assert!(PhysicalConstants::new(7e-3, -1.0).is_err());
        assert!(ModelParams::new(0.1, 1.0, 2.0).is_err());
    }
}
