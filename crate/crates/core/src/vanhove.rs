//! Weak-coupling limit `lambda -> 0` at fixed `t~ = lambda^2 t`: sweeps over
//! the coupling, convergence of the exact survival probability to the
//! limit exponential, and the scaling of the rescaled time scales.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{
    amplitude_pole_cut, amplitude_spectral, amplitude_volterra, KernelForm, MemoryKernel, SurvivalSeries, TimeGrid,
};
use crate::asymptotics::{asymptotic_coefficients, power_transition_time, time_scales};
use crate::error::{DecayError, Result};
use crate::fit;
use crate::params::ModelParams;
use crate::selfenergy::{sigma2, Sheet};
use crate::spectral::SpectralDensity;

/// Points of the rescaled grid on which `D(lambda)` is measured.
pub const DEVIATION_POINTS: usize = 241;

/// `t = t~ / lambda^2`.
pub fn rescale_time(params: &ModelParams, t_tilde: f64) -> Result<f64> {
    if params.lambda == 0.0 {
        return Err(DecayError::InvalidParameter("rescaled time needs lambda > 0".into()));
    }
    if !(t_tilde >= 0.0) || !t_tilde.is_finite() {
        return Err(DecayError::InvalidParameter(format!("rescaled time must be finite and >= 0, got {t_tilde}")));
    }
    Ok(t_tilde / params.lambda2())
}

/// Log-spaced `t~` in `[1e-4, 5] tau~_E`.
pub fn deviation_grid(sd: &SpectralDensity, params: &ModelParams) -> Result<TimeGrid> {
    let g = sd.gamma_at(params.omega0_internal());
    if g <= 0.0 {
        return Err(DecayError::StableState);
    }
    TimeGrid::log(1e-4 / g, 5.0 / g, DEVIATION_POINTS)
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(DecayError::InvalidParameter("empty coupling list".into()));
    }
    if lambdas.iter().any(|l| !(*l > 0.0 && *l < 0.1)) {
        return Err(DecayError::OutOfRegime("sweep couplings must lie in (0, 0.1)".into()));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(DecayError::InvalidParameter("couplings must be strictly decreasing".into()));
    }
    Ok(())
}

/// Exact survival series at the given physical times, preferring the
/// pole/cut engine.
fn exact_series(params: &ModelParams, sd: &SpectralDensity, grid: &TimeGrid) -> Result<SurvivalSeries> {
    match amplitude_pole_cut(params, sd, grid) {
        Err(DecayError::Unsupported(_)) => amplitude_spectral(params, sd, grid),
        other => other,
    }
}

/// `max |P(t~/lambda^2) - exp(-Gamma t~)|` and where it occurs.
fn deviation(series: &SurvivalSeries, rescaled: &[f64], gamma: f64) -> (f64, f64) {
    let mut worst = (0.0, rescaled[0]);
    for (p, &tt) in series.probability.iter().zip(rescaled) {
        let d = (p - (-gamma * tt).exp()).abs();
        if d > worst.0 {
            worst = (d, tt);
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub lambda: f64,
    pub tau_z_tilde: f64,
    pub tau_e_tilde: f64,
    pub tau_pow_tilde: f64,
    /// `tau_pow` in units of the pole lifetime `1 / gamma`.
    pub tau_pow_ratio: f64,
    /// `lambda^(2 (eta + 1))`.
    pub oscillation_scale: f64,
    /// Envelope `2 |pole| |cut|` of the interference term at `t~ = tau~_E`.
    pub oscillation_amplitude: f64,
    pub deviation: f64,
    /// `t~` at which the deviation peaks.
    pub deviation_at: f64,
    /// Failure of this coupling, if any; the numeric fields are NaN then.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fitted {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lambdas: Vec<f64>,
    pub rows: Vec<ScalingRow>,
    pub eta: f64,
    /// Slope of `log tau~_Z` against `log lambda`; 1 in the limit.
    pub tau_z_exponent: Option<Fitted>,
    /// Coefficient `a` of `tau_pow_ratio = a L + b ln L + c` with
    /// `L = ln(1/lambda)`; tends to `4 (eta + 1)`.
    pub tau_pow_coefficient: Option<Fitted>,
    /// Slope of `log D` against `log lambda`.
    pub deviation_order: Option<Fitted>,
    /// Slope of the log interference envelope against `log lambda`;
    /// compare with `2 (eta + 1)`.
    pub oscillation_exponent: Option<Fitted>,
}

fn sweep_row(template: &ModelParams, sd: &SpectralDensity, lambda: f64, eta: f64) -> Result<ScalingRow> {
    let p = template.with_lambda(lambda)?;
    let ts = time_scales(&p, sd)?;
    let ratio = power_transition_time(&asymptotic_coefficients(&p, sd)?)?.x;
    let gamma0 = sd.gamma_at(p.omega0_internal());
    let rescaled = deviation_grid(sd, &p)?;
    let l2 = p.lambda2();
    let physical = TimeGrid::new(rescaled.points().iter().map(|t| t / l2).collect())?;
    let series = exact_series(&p, sd, &physical)?;
    let (dev, at) = deviation(&series, rescaled.points(), gamma0);

    let probe = TimeGrid::new(vec![1.0 / gamma0 / l2])?;
    let osc = match amplitude_pole_cut(&p, sd, &probe) {
        Ok(s) => {
            let pole = s.pole_part.as_ref().map(|v| v[0].norm()).unwrap_or(f64::NAN);
            let cut = s.cut_part.as_ref().map(|v| v[0].norm()).unwrap_or(f64::NAN);
            2.0 * pole * cut
        }
        Err(_) => f64::NAN,
    };
    Ok(ScalingRow {
        lambda,
        tau_z_tilde: ts.rescaled.tau_z,
        tau_e_tilde: ts.rescaled.tau_e,
        tau_pow_tilde: ts.rescaled.tau_pow,
        tau_pow_ratio: ratio,
        oscillation_scale: lambda.powf(2.0 * (eta + 1.0)),
        oscillation_amplitude: osc,
        deviation: dev,
        deviation_at: at,
        error: None,
    })
}

fn failed_row(lambda: f64, e: DecayError) -> ScalingRow {
    ScalingRow {
        lambda,
        tau_z_tilde: f64::NAN,
        tau_e_tilde: f64::NAN,
        tau_pow_tilde: f64::NAN,
        tau_pow_ratio: f64::NAN,
        oscillation_scale: f64::NAN,
        oscillation_amplitude: f64::NAN,
        deviation: f64::NAN,
        deviation_at: f64::NAN,
        error: Some(e.to_string()),
    }
}

fn log_slope(points: &[(f64, f64)]) -> Option<Fitted> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let (slope, _, se) = fit::linear_with_error(&pts);
    Some(Fitted { value: slope, std_err: se })
}

/// Time scales, deviation from the limit and interference envelope for
/// each coupling. Failures are recorded per row and the sweep goes on.
pub fn sweep(template: &ModelParams, sd: &SpectralDensity, lambdas: &[f64]) -> Result<ScalingReport> {
    check_lambdas(lambdas)?;
    let eta = sd.threshold_exponent()?;
    let rows: Vec<ScalingRow> = lambdas
        .par_iter()
        .map(|&l| sweep_row(template, sd, l, eta).unwrap_or_else(|e| failed_row(l, e)))
        .collect();
    let ok: Vec<&ScalingRow> = rows.iter().filter(|r| r.error.is_none()).collect();

    let tau_z_exponent = log_slope(&ok.iter().map(|r| (r.lambda, r.tau_z_tilde)).collect::<Vec<_>>());
    let deviation_order = log_slope(&ok.iter().map(|r| (r.lambda, r.deviation)).collect::<Vec<_>>());
    let oscillation_exponent =
        log_slope(&ok.iter().map(|r| (r.lambda, r.oscillation_amplitude)).collect::<Vec<_>>());
    let pow: Vec<&&ScalingRow> = ok.iter().filter(|r| r.tau_pow_ratio.is_finite()).collect();
    let tau_pow_coefficient = if pow.len() >= 4 {
        let l: Vec<f64> = pow.iter().map(|r| (1.0 / r.lambda).ln()).collect();
        let x: Vec<f64> = pow.iter().map(|r| r.tau_pow_ratio).collect();
        let (c, se) = fit::basis_with_error(&l, &x, |v| [v, v.ln(), 1.0]);
        Some(Fitted {
            value: c[0],
            std_err: se[0],
        })
    } else {
        None
    };
    Ok(ScalingReport {
        lambdas: lambdas.to_vec(),
        rows,
        eta,
        tau_z_exponent,
        tau_pow_coefficient,
        deviation_order,
        oscillation_exponent,
    })
}

/// Crossover ratio `tau_pow / tau_E` (with `tau_E = 1 / gamma_pole`) for
/// each coupling, from the pole and threshold coefficients alone.
pub fn crossover_ratios(template: &ModelParams, sd: &SpectralDensity, lambdas: &[f64]) -> Result<Vec<f64>> {
    lambdas
        .iter()
        .map(|&l| {
            let p = template.with_lambda(l)?;
            Ok(power_transition_time(&asymptotic_coefficients(&p, sd)?)?.x)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub lambdas: Vec<f64>,
    pub deviation: Vec<f64>,
    pub deviation_at: Vec<f64>,
    /// `D` strictly decreasing along the sweep.
    pub monotone: bool,
    /// Slope of `log D` against `log lambda`, when every `D` is positive.
    pub order: Option<Fitted>,
}

/// `D(lambda)` for each coupling. A dispersive kernel is evolved exactly;
/// a constant kernel follows its closed form, which is the limit itself.
pub fn convergence_to_exponential(
    template: &ModelParams,
    kernel: &MemoryKernel,
    lambdas: &[f64],
) -> Result<Convergence> {
    check_lambdas(lambdas)?;
    let sd = &kernel.sd;
    let gamma0 = sd.gamma_at(kernel.omega0);
    let rows: Vec<Result<(f64, f64)>> = lambdas
        .par_iter()
        .map(|&l| {
            let p = template.with_lambda(l)?;
            let rescaled = deviation_grid(sd, &p)?;
            let l2 = p.lambda2();
            let physical = TimeGrid::new(rescaled.points().iter().map(|t| t / l2).collect())?;
            let series = match kernel.form {
                KernelForm::Dispersive => exact_series(&p, sd, &physical)?,
                KernelForm::Markovian { .. } => amplitude_volterra(&p, kernel, &physical)?,
            };
            Ok(deviation(&series, rescaled.points(), gamma0))
        })
        .collect();
    let mut deviation = Vec::with_capacity(rows.len());
    let mut at = Vec::with_capacity(rows.len());
    for r in rows {
        let (d, a) = r?;
        deviation.push(d);
        at.push(a);
    }
    let monotone = deviation.windows(2).all(|w| w[1] < w[0]);
    let order = if deviation.iter().all(|d| *d > 0.0) {
        log_slope(&lambdas.iter().copied().zip(deviation.iter().copied()).collect::<Vec<_>>())
    } else {
        None
    };
    Ok(Convergence {
        lambdas: lambdas.to_vec(),
        deviation,
        deviation_at: at,
        monotone,
        order,
    })
}

/// `|1/(E~ - Sigma(lambda^2 E~ + w0)) - 1/(E~ - Sigma(w0 + i0))|` for each
/// coupling (rows) and rescaled energy (columns), `Im E~ > 0`.
pub fn propagator_deviation(
    template: &ModelParams,
    sd: &SpectralDensity,
    lambdas: &[f64],
    energies: &[Complex64],
) -> Result<Vec<Vec<f64>>> {
    if energies.iter().any(|e| !(e.im > 0.0)) {
        return Err(DecayError::Domain("rescaled energies must lie in the upper half plane".into()));
    }
    let w0 = template.omega0_internal();
    let limit = sigma2(sd, Complex64::new(w0, 0.0), Sheet::First)?.value;
    lambdas
        .iter()
        .map(|&l| {
            let l2 = l * l;
            energies
                .iter()
                .map(|&e| {
                    let s = sigma2(sd, w0 + l2 * e, Sheet::First)?.value;
                    Ok(((e - s).inv() - (e - limit).inv()).norm())
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{hydrogen_params, PhysicalConstants};

    #[test]
    fn rescaling() {
        let p = hydrogen_params(PhysicalConstants::CODATA).with_lambda(0.1).unwrap();
        assert_eq!(rescale_time(&p, 0.0).unwrap(), 0.0);
        assert!((rescale_time(&p, 1.0).unwrap() - 100.0).abs() < 1e-12);
        let t = rescale_time(&p, 0.37).unwrap();
        assert!((p.lambda2() * t - 0.37).abs() < 1e-15);
        assert!(rescale_time(&p.with_lambda(0.0).unwrap(), 1.0).is_err());
    }

    #[test]
    fn markovian_kernel_is_its_own_limit() {
        let p = hydrogen_params(PhysicalConstants::CODATA);
        let h = SpectralDensity::hydrogen();
        let k = MemoryKernel::vanhove_constant(&p, &h).unwrap();
        let c = convergence_to_exponential(&p, &k, &[0.05, 0.01, 0.001]).unwrap();
        for d in c.deviation {
            assert!(d < 1e-12, "{d}");
        }
    }

    #[test]
    fn rejects_unsorted_sweep() {
        let p = hydrogen_params(PhysicalConstants::CODATA);
        let h = SpectralDensity::hydrogen();
        assert!(sweep(&p, &h, &[0.01, 0.02]).is_err());
        assert!(sweep(&p, &h, &[0.2]).is_err());
    }
}
