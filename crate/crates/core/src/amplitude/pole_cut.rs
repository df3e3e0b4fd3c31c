//! Pole plus branch-cut decomposition. The real-axis integral is rotated
//! onto the ray `z = thr + u exp(-i pi/4)`; the resonance pole crossed on
//! the way contributes `Z exp(-i E_p t)` and the ray carries the
//! non-exponential remainder.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{propagator, Engine, SurvivalSeries, TimeGrid};
use crate::error::{DecayError, Result};
use crate::params::ModelParams;
use crate::pole::{find_pole, PoleData};
use crate::quad::PanelRule;
use crate::selfenergy::Sheet;
use crate::spectral::SpectralDensity;

const ORDER: usize = 16;
const CHECK_ORDER: usize = 12;

pub(crate) struct CutRule {
    /// `z - w0` at each node.
    nu: Vec<Complex64>,
    weight: Vec<Complex64>,
}

impl CutRule {
    pub(crate) fn build(params: &ModelParams, sd: &SpectralDensity, t_max: f64, order: usize) -> Result<Self> {
        let l2 = params.lambda2();
        let w0 = params.omega0_internal();
        let thr = sd.threshold();
        let eta = sd.threshold_exponent().unwrap_or(1.0).max(0.05);
        let t_ref = t_max.max(1.0 / sd.cutoff);
        // the panel [0, lo] carries a fraction ~ (lo t)^eta of the integral
        let lo = 1e-4f64.min(1e-14f64.powf(1.0 / eta)) / t_ref;
        let ray = PanelRule::geometric(lo, 1e3 * sd.cutoff, 4, order);
        let dir = Complex64::from_polar(1.0, -FRAC_PI_4);
        let vals: Vec<Result<(Complex64, Complex64)>> = ray
            .nodes
            .par_iter()
            .zip(&ray.weights)
            .map(|(&u, &q)| {
                let z = thr + dir * u;
                let gi = propagator(l2, w0, sd, z, Sheet::First)?;
                let gii = propagator(l2, w0, sd, z, Sheet::Second)?;
                let rho = l2 * sd.continued(z)? * gi * gii;
                Ok((Complex64::new(thr - w0, 0.0) + dir * u, dir * q * rho))
            })
            .collect();
        let mut nu = Vec::with_capacity(vals.len());
        let mut weight = Vec::with_capacity(vals.len());
        for v in vals {
            let (n, w) = v?;
            nu.push(n);
            weight.push(w);
        }
        Ok(CutRule { nu, weight })
    }

    pub(crate) fn eval(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (nu, w) in self.nu.iter().zip(&self.weight) {
            acc += w * (Complex64::new(0.0, -t) * nu).exp();
        }
        acc
    }
}

/// Whether the pole sits between the real axis and the ray, so that
/// rotating the contour picks it up.
fn pole_enclosed(pole: &PoleData, w0: f64, thr: f64) -> bool {
    let z = pole.e_pole + w0 - thr;
    if z.im == 0.0 {
        // bound state below threshold, or a stable level in the continuum gap
        return true;
    }
    z.im < 0.0 && z.arg() > -FRAC_PI_4
}

fn check_input(sd: &SpectralDensity) -> Result<()> {
    if !sd.supports_continuation() {
        return Err(DecayError::Unsupported(
            "the pole/cut engine needs an analytic density".into(),
        ));
    }
    if sd.thresholds().len() > 1 {
        return Err(DecayError::Unsupported(
            "the pole/cut engine handles a single branch point".into(),
        ));
    }
    Ok(())
}

pub fn amplitude_pole_cut(params: &ModelParams, sd: &SpectralDensity, grid: &TimeGrid) -> Result<SurvivalSeries> {
    if params.lambda == 0.0 {
        let mut s = SurvivalSeries::unit(grid, Engine::PoleCut);
        s.pole_part = Some(s.amplitude.clone());
        s.cut_part = Some(vec![Complex64::new(0.0, 0.0); grid.len()]);
        return Ok(s);
    }
    check_input(sd)?;
    let w0 = params.omega0_internal();
    let pole = find_pole(params, sd)?;
    let residue = if pole_enclosed(&pole, w0, sd.threshold()) {
        pole.residue
    } else {
        Complex64::new(0.0, 0.0)
    };
    let fine = CutRule::build(params, sd, grid.t_max(), ORDER)?;
    let coarse = CutRule::build(params, sd, grid.t_max(), CHECK_ORDER)?;
    let rows: Vec<(Complex64, Complex64, f64)> = grid
        .points()
        .par_iter()
        .map(|&t| {
            let p = residue * (Complex64::new(0.0, -t) * pole.e_pole).exp();
            let c = fine.eval(t);
            let err = (c - coarse.eval(t)).norm();
            (p, c, err)
        })
        .collect();
    let pole_part: Vec<Complex64> = rows.iter().map(|r| r.0).collect();
    let cut_part: Vec<Complex64> = rows.iter().map(|r| r.1).collect();
    let err = rows.iter().map(|r| r.2).collect();
    let amp = pole_part.iter().zip(&cut_part).map(|(p, c)| p + c).collect();
    let mut s = SurvivalSeries::new(grid, amp, err, Engine::PoleCut);
    s.pole_part = Some(pole_part);
    s.cut_part = Some(cut_part);
    Ok(s)
}
