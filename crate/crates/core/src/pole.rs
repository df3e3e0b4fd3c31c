//! Resonance pole of the resolvent on the second sheet.
//!
//! Energies here are measured from the unperturbed level, so the pole
//! solves `E - lambda^2 Sigma(E + w0) = 0` and tends to zero with the
//! coupling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};
use crate::params::ModelParams;
use crate::selfenergy::{sigma2, sigma2_derivative, Sheet};
use crate::spectral::SpectralDensity;

const MAX_ITERATIONS: usize = 50;
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoleOrder {
    Second,
    Fourth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleData {
    /// Pole position relative to w0, internal units.
    pub e_pole: Complex64,
    /// `Re e_pole`.
    pub delta_e: f64,
    /// `-2 Im e_pole`.
    pub gamma: f64,
    /// Residue of the pole term, `A_pole(t) = residue * exp(-i e_pole t)`.
    pub residue: Complex64,
    /// `-arg(residue)`; positive and close to `pi lambda^2` for hydrogen.
    pub zeta: f64,
    pub iterations: usize,
    /// Final `|E - lambda^2 Sigma(E + w0)|`.
    pub tolerance_achieved: f64,
}

impl PoleData {
    /// `(|Z|, zeta)` with `A_pole(t) = |Z| exp(-i zeta) exp(-i E_pole t)`.
    pub fn residue_phase(&self) -> (f64, f64) {
        (self.residue.norm(), self.zeta)
    }
}

/// Self-energy on the sheet reached by continuing from above through the
/// cut at `Re z`; for `Im z > 0` that is the physical sheet itself.
fn sigma_continued(sd: &SpectralDensity, z: Complex64) -> Result<Complex64> {
    let sheet = if z.im > 0.0 { Sheet::First } else { Sheet::Second };
    Ok(sigma2(sd, z, sheet)?.value)
}

fn sigma_continued_derivative(sd: &SpectralDensity, z: Complex64) -> Result<Complex64> {
    let sheet = if z.im > 0.0 { Sheet::First } else { Sheet::Second };
    sigma2_derivative(sd, z, sheet)
}

/// Truncated iterative solution of the pole equation.
pub fn perturbative_pole(params: &ModelParams, sd: &SpectralDensity, order: PoleOrder) -> Result<Complex64> {
    let l2 = params.lambda2();
    if l2 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w0 = Complex64::new(params.omega0_internal(), 0.0);
    let s0 = sigma2(sd, w0, Sheet::First)?.value;
    let mut e = l2 * s0;
    if order == PoleOrder::Fourth {
        let ds = sigma2_derivative(sd, w0, Sheet::First)?;
        e += l2 * l2 * ds * s0;
    }
    Ok(e)
}

/// Newton iteration on `D(E) = E - lambda^2 Sigma_II(E + w0)` from the
/// fourth-order seed.
pub fn find_pole(params: &ModelParams, sd: &SpectralDensity) -> Result<PoleData> {
    let l2 = params.lambda2();
    let w0 = params.omega0_internal();
    if l2 == 0.0 {
        return Ok(PoleData {
            e_pole: Complex64::new(0.0, 0.0),
            delta_e: 0.0,
            gamma: 0.0,
            residue: Complex64::new(1.0, 0.0),
            zeta: 0.0,
            iterations: 0,
            tolerance_achieved: 0.0,
        });
    }
    if sd.gamma_at(w0) == 0.0 {
        return real_pole(params, sd);
    }
    if !sd.supports_continuation() {
        return Err(DecayError::Unsupported(
            "pole search needs the continued density; tabulated input has none".into(),
        ));
    }
    let radius = w0 - sd.threshold();
    let scale = l2 * sd.cutoff;
    let d = |e: Complex64| -> Result<Complex64> { Ok(e - l2 * sigma_continued(sd, e + w0)?) };

    let mut e = perturbative_pole(params, sd, PoleOrder::Fourth)?;
    let mut res = d(e)?;
    let mut iterations = 0;
    let mut polish = 0;
    loop {
        if iterations >= MAX_ITERATIONS {
            return Err(DecayError::NoConvergence {
                iterations,
                residual: res.norm(),
            });
        }
        iterations += 1;
        let slope = 1.0 - l2 * sigma_continued_derivative(sd, e + w0)?;
        let mut step = res / slope;
        let mut next = e - step;
        let mut next_res = d(next)?;
        let mut halvings = 0;
        while next_res.norm() > res.norm() && halvings < 10 && res.norm() > RESIDUAL_TOL * scale.max(e.norm()) {
            step *= 0.5;
            next = e - step;
            next_res = d(next)?;
            halvings += 1;
        }
        e = next;
        res = next_res;
        if e.norm() >= radius {
            return Err(DecayError::OutOfRegime(format!(
                "pole at {e} left the disk of radius {radius:e} around the level"
            )));
        }
        if res.norm() < RESIDUAL_TOL * scale.max(e.norm()) {
            // a few more steps take the root to machine precision
            polish += 1;
            if step.norm() <= 4.0 * f64::EPSILON * e.norm() || polish > 3 {
                break;
            }
        }
    }
    let ds = sigma_continued_derivative(sd, e + w0)?;
    let residue = (1.0 - l2 * ds).inv();
    Ok(PoleData {
        e_pole: e,
        delta_e: e.re,
        gamma: -2.0 * e.im,
        residue,
        zeta: -residue.arg(),
        iterations,
        tolerance_achieved: res.norm(),
    })
}

/// Level sitting where the density vanishes: the pole stays on the real
/// axis of the physical sheet.
fn real_pole(params: &ModelParams, sd: &SpectralDensity) -> Result<PoleData> {
    let l2 = params.lambda2();
    let w0 = params.omega0_internal();
    let sig = |e: f64| -> Result<f64> { Ok(sigma2(sd, Complex64::new(e + w0, 0.0), Sheet::First)?.value.re) };
    let dsig =
        |e: f64| -> Result<f64> { Ok(sigma2_derivative(sd, Complex64::new(e + w0, 0.0), Sheet::First)?.re) };
    let mut e = l2 * sig(0.0)?;
    let mut res = e - l2 * sig(e)?;
    let mut iterations = 0;
    while res.abs() > RESIDUAL_TOL * (l2 * sd.cutoff).max(e.abs()) {
        if iterations >= MAX_ITERATIONS {
            return Err(DecayError::NoConvergence {
                iterations,
                residual: res.abs(),
            });
        }
        iterations += 1;
        e -= res / (1.0 - l2 * dsig(e)?);
        res = e - l2 * sig(e)?;
    }
    let residue = 1.0 / (1.0 - l2 * dsig(e)?);
    Ok(PoleData {
        e_pole: Complex64::new(e, 0.0),
        delta_e: e,
        gamma: 0.0,
        residue: Complex64::new(residue, 0.0),
        zeta: 0.0,
        iterations,
        tolerance_achieved: res.abs(),
    })
}
