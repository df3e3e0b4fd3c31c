//! Survival amplitude `A(t) = <a| exp(-iHt) |a> exp(i w0 t)`.
//!
//! Three independent engines evaluate the same quantity:
//! * `spectral`: Fourier transform of the spectral function on the real
//!   axis, with the high-energy tail moved onto a descending ray;
//! * `pole_cut`: pole term plus the branch-cut integral along a ray below
//!   the threshold;
//! * `volterra`: time stepping of the integro-differential equation with
//!   the memory kernel.

mod pole_cut;
mod spectral;
mod volterra;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};
use crate::params::ModelParams;
use crate::selfenergy::{sigma2, Sheet};
use crate::spectral::SpectralDensity;

pub use pole_cut::amplitude_pole_cut;
pub use spectral::{amplitude_spectral, spectral_weight};
pub use volterra::{amplitude_volterra, amplitude_volterra_with, memory_kernel, KernelForm, MemoryKernel, VolterraOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spacing {
    Linear,
    Log,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
    pub spacing: Spacing,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(DecayError::InvalidParameter("time grid is empty".into()));
        }
        if points.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(DecayError::InvalidParameter("times must be finite and >= 0".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DecayError::InvalidParameter("times must be strictly increasing".into()));
        }
        Ok(TimeGrid {
            points,
            spacing: Spacing::Mixed,
        })
    }

    pub fn linear(tmin: f64, tmax: f64, count: usize) -> Result<Self> {
        if count == 1 {
            return TimeGrid::new(vec![tmin]);
        }
        if count < 1 || !(tmax > tmin) {
            return Err(DecayError::InvalidParameter(format!(
                "linear grid needs count >= 1 and tmax > tmin, got [{tmin}, {tmax}] x {count}"
            )));
        }
        let step = (tmax - tmin) / (count - 1) as f64;
        let mut pts: Vec<f64> = (0..count).map(|i| tmin + step * i as f64).collect();
        pts[count - 1] = tmax;
        let mut g = TimeGrid::new(pts)?;
        g.spacing = Spacing::Linear;
        Ok(g)
    }

    pub fn log(tmin: f64, tmax: f64, count: usize) -> Result<Self> {
        if !(tmin > 0.0) || !(tmax > tmin) || count < 2 {
            return Err(DecayError::InvalidParameter(format!(
                "log grid needs 0 < tmin < tmax and count >= 2, got [{tmin}, {tmax}] x {count}"
            )));
        }
        let ratio = (tmax / tmin).ln() / (count - 1) as f64;
        let mut pts: Vec<f64> = (0..count).map(|i| tmin * (ratio * i as f64).exp()).collect();
        pts[0] = tmin;
        pts[count - 1] = tmax;
        let mut g = TimeGrid::new(pts)?;
        g.spacing = Spacing::Log;
        Ok(g)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.points.last().expect("grid is never empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    Spectral,
    PoleCut,
    Volterra,
    VanHoveLimit,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Spectral => "spectral",
            Engine::PoleCut => "pole_cut",
            Engine::Volterra => "volterra",
            Engine::VanHoveLimit => "vanhove_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSeries {
    pub grid: TimeGrid,
    pub amplitude: Vec<Complex64>,
    pub probability: Vec<f64>,
    pub engine: Engine,
    pub err_estimate: Vec<f64>,
    /// Pole term, pole/cut engine only.
    pub pole_part: Option<Vec<Complex64>>,
    /// Branch-cut term, pole/cut engine only.
    pub cut_part: Option<Vec<Complex64>>,
}

impl SurvivalSeries {
    /// `A(0) = 1` by definition; the engines' rounding there is dropped.
    /// The pole and cut parts keep their computed values.
    fn new(grid: &TimeGrid, mut amplitude: Vec<Complex64>, mut err: Vec<f64>, engine: Engine) -> Self {
        if grid.points[0] == 0.0 {
            amplitude[0] = Complex64::new(1.0, 0.0);
            err[0] = 0.0;
        }
        let probability = amplitude.iter().map(|a| a.norm_sqr()).collect();
        SurvivalSeries {
            grid: grid.clone(),
            amplitude,
            probability,
            engine,
            err_estimate: err,
            pole_part: None,
            cut_part: None,
        }
    }

    fn unit(grid: &TimeGrid, engine: Engine) -> Self {
        let n = grid.len();
        SurvivalSeries::new(grid, vec![Complex64::new(1.0, 0.0); n], vec![0.0; n], engine)
    }
}

/// `1 / (z - w0 - lambda^2 Sigma(z))` on the given sheet.
pub(crate) fn propagator(l2: f64, w0: f64, sd: &SpectralDensity, z: Complex64, sheet: Sheet) -> Result<Complex64> {
    let s = sigma2(sd, z, sheet)?.value;
    Ok((z - w0 - l2 * s).inv())
}

/// Limit amplitude in rescaled time: `exp(-i Sigma(w0 + i0) t~)`.
pub fn amplitude_vanhove_limit(params: &ModelParams, sd: &SpectralDensity, rescaled: &TimeGrid) -> Result<SurvivalSeries> {
    let w0 = params.omega0_internal();
    if sd.gamma_at(w0) <= 0.0 {
        return Err(DecayError::StableState);
    }
    let s = sigma2(sd, Complex64::new(w0, 0.0), Sheet::First)?.value;
    let amplitude = rescaled
        .points()
        .iter()
        .map(|&t| (Complex64::new(0.0, -1.0) * s * t).exp())
        .collect();
    Ok(SurvivalSeries::new(rescaled, amplitude, vec![0.0; rescaled.len()], Engine::VanHoveLimit))
}

/// Dispatch by engine name.
pub fn survival(params: &ModelParams, sd: &SpectralDensity, grid: &TimeGrid, engine: Engine) -> Result<SurvivalSeries> {
    match engine {
        Engine::Spectral => amplitude_spectral(params, sd, grid),
        Engine::PoleCut => amplitude_pole_cut(params, sd, grid),
        Engine::Volterra => amplitude_volterra(params, &memory_kernel(params, sd), grid),
        Engine::VanHoveLimit => {
            let l2 = params.lambda2();
            if l2 == 0.0 {
                return Err(DecayError::InvalidParameter("rescaled time needs lambda > 0".into()));
            }
            let rescaled = TimeGrid::new(grid.points().iter().map(|t| t * l2).collect())?;
            let mut s = amplitude_vanhove_limit(params, sd, &rescaled)?;
            s.grid = grid.clone();
            Ok(s)
        }
    }
}
