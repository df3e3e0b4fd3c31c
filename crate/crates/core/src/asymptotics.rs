//! Short- and long-time asymptotics: Zeno time, lifetime, the three-term
//! long-time law and the crossover to the power-law tail.
//!
//! At long times the amplitude splits into
//! `A(t) ~ Z exp(-i E_p t) + lambda^2 C exp(i E_a t) / (E_a t)^eta`
//! with `E_a = w0 - threshold`. `C` is complex in general; for hydrogen it
//! is close to `-1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::SurvivalSeries;
use crate::error::{DecayError, Result};
use crate::fit;
use crate::params::ModelParams;
use crate::pole::find_pole;
use crate::selfenergy::{sigma2, Sheet};
use crate::spectral::{DensityKind, SpectralDensity};

const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_MAX: usize = 500;
/// Largest accepted deviation of `log |A_cut|` from a straight line in
/// `log t` inside the fit window.
const FIT_RESIDUAL: f64 = 0.05;

/// A time in internal units with its SI value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeValue {
    pub internal: f64,
    pub seconds: f64,
}

impl TimeValue {
    pub fn new(params: &ModelParams, internal: f64) -> Self {
        TimeValue {
            internal,
            seconds: params.from_internal(internal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledTimes {
    pub tau_z: f64,
    pub tau_e: f64,
    pub tau_pow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeScales {
    pub tau_z: TimeValue,
    pub tau_e: TimeValue,
    pub tau_pow: TimeValue,
    /// `lambda^2` times the internal values.
    pub rescaled: RescaledTimes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCoefficients {
    pub lambda: f64,
    pub z_mag: f64,
    /// `-arg Z`, as reported by the pole search.
    pub zeta: f64,
    pub c_mag: f64,
    pub c_arg: f64,
    pub eta: f64,
    /// `Re E_pole`.
    pub delta_e: f64,
    /// Pole width `-2 Im E_pole`; the exponential term decays as
    /// `exp(-gamma t)`.
    pub gamma: f64,
    /// Distance of the level from the threshold.
    pub e_a: f64,
}

impl AsymptoticCoefficients {
    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(self.z_mag, -self.zeta)
    }

    pub fn c(&self) -> Complex64 {
        Complex64::from_polar(self.c_mag, self.c_arg)
    }

    /// Phase of the interference term, `arg Z - arg C`.
    pub fn interference_phase(&self) -> f64 {
        -self.zeta - self.c_arg
    }
}

/// `1 / (lambda sqrt(int d))`; infinite when nothing couples.
pub fn zeno_time(params: &ModelParams, sd: &SpectralDensity) -> Result<f64> {
    let m = sd.second_moment()?;
    if params.lambda == 0.0 || m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (params.lambda * m.sqrt()))
}

/// Golden-rule lifetime `1 / (lambda^2 Gamma(w0))`.
pub fn lifetime(params: &ModelParams, sd: &SpectralDensity) -> Result<f64> {
    let g = sd.gamma_at(params.omega0_internal());
    if g <= 0.0 {
        return Err(DecayError::StableState);
    }
    Ok(1.0 / (params.lambda2() * g))
}

/// Leading coefficient of the density at its threshold,
/// `d(thr + w) ~ amp w^(eta - 1)`.
fn threshold_amplitude(sd: &SpectralDensity, eta: f64) -> Result<f64> {
    let v = match &sd.kind {
        DensityKind::Hydrogen => 1.0,
        DensityKind::PowerLaw { eta: e } => sd.cutoff.powf(2.0 - e),
        DensityKind::Tabulated(_) => {
            return Err(DecayError::Unsupported(
                "threshold amplitude of a tabulated density".into(),
            ))
        }
        DensityKind::ChannelSum(ch) => {
            let thr = sd.threshold();
            let mut acc = 0.0;
            for c in ch {
                if c.threshold + c.density.threshold() == thr && c.density.threshold_exponent()? == eta {
                    acc += threshold_amplitude(&c.density, eta)?;
                }
            }
            acc
        }
    };
    Ok(v * sd.strength)
}

/// `C` from the behaviour of the resolvent at the threshold:
/// `C = G(thr)^2 amp Gamma(eta) i^(-eta) E_a^eta`.
pub fn cut_coefficient(params: &ModelParams, sd: &SpectralDensity) -> Result<Complex64> {
    let eta = sd.threshold_exponent()?;
    if eta <= 1.0 {
        return Err(DecayError::Unsupported(format!(
            "the self-energy diverges at threshold for eta = {eta}"
        )));
    }
    let thr = sd.threshold();
    let w0 = params.omega0_internal();
    let e_a = w0 - thr;
    let s = sigma2(sd, Complex64::new(thr, 0.0), Sheet::First)?.value;
    let g = (thr - w0 - params.lambda2() * s).inv();
    let amp = threshold_amplitude(sd, eta)?;
    let phase = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_2 * eta);
    Ok(g * g * amp * libm::tgamma(eta) * phase * e_a.powf(eta))
}

/// Coefficients from the pole search and the threshold behaviour.
pub fn asymptotic_coefficients(params: &ModelParams, sd: &SpectralDensity) -> Result<AsymptoticCoefficients> {
    let pole = find_pole(params, sd)?;
    let c = cut_coefficient(params, sd)?;
    Ok(AsymptoticCoefficients {
        lambda: params.lambda,
        z_mag: pole.residue.norm(),
        zeta: pole.zeta,
        c_mag: c.norm(),
        c_arg: c.arg(),
        eta: sd.threshold_exponent()?,
        delta_e: pole.delta_e,
        gamma: pole.gamma,
        e_a: params.omega0_internal() - sd.threshold(),
    })
}

/// Exponential, power and interference terms of the long-time law.
pub fn long_time_terms(t: f64, coeffs: &AsymptoticCoefficients) -> (f64, f64, f64) {
    let l2 = coeffs.lambda * coeffs.lambda;
    let decay = (-coeffs.gamma * t).exp();
    let power = (coeffs.e_a * t).powf(-coeffs.eta);
    let exp_term = coeffs.z_mag * coeffs.z_mag * decay;
    let pow_term = l2 * l2 * coeffs.c_mag * coeffs.c_mag * power * power;
    let phase = (coeffs.e_a + coeffs.delta_e) * t - coeffs.interference_phase();
    let cross = 2.0 * l2 * coeffs.c_mag * coeffs.z_mag * power * decay.sqrt() * phase.cos();
    (exp_term, pow_term, cross)
}

/// `P(t) ~ |Z|^2 e^{-gamma t} + lambda^4 |C|^2 / (E_a t)^{2 eta}
///        + 2 lambda^2 |C Z| / (E_a t)^eta e^{-gamma t / 2} cos((E_a + dE) t - (arg Z - arg C))`.
pub fn long_time_p(t: f64, coeffs: &AsymptoticCoefficients) -> f64 {
    let (a, b, c) = long_time_terms(t, coeffs);
    a + b + c
}

/// Crossover between the exponential and the power-law term, as a
/// multiple `x` of `1 / gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTransition {
    /// Root of `|Z|^2 e^{-x} = lambda^4 |C|^2 / (E_a x / gamma)^{2 eta}`:
    /// `x = 4(eta+1) ln(1/lambda) + 2 eta ln(E_a/Gamma) + 2 ln|Z/C| + 2 eta ln x`.
    pub x: f64,
    /// Root of the variant with `eta ln x` and `ln|Z/C|`.
    pub x_printed: f64,
    /// `4 (eta + 1) ln(1/lambda)`.
    pub x_leading: f64,
    /// `x / gamma` in internal units.
    pub tau_pow: f64,
    pub iterations: usize,
}

fn fixed_point(constant: f64, slope: f64, seed: f64) -> Result<(f64, usize)> {
    let mut x = seed;
    if !(x > 0.0) || slope / x >= 1.0 {
        return Err(DecayError::NoConvergence {
            iterations: 0,
            residual: slope / x,
        });
    }
    for it in 1..=FIXED_POINT_MAX {
        let next = constant + slope * x.ln();
        if !(next > 0.0) {
            return Err(DecayError::NoConvergence {
                iterations: it,
                residual: next,
            });
        }
        let dx = (next - x).abs();
        x = next;
        if dx < FIXED_POINT_TOL {
            return Ok((x, it));
        }
    }
    Err(DecayError::NoConvergence {
        iterations: FIXED_POINT_MAX,
        residual: (constant + slope * x.ln() - x).abs(),
    })
}

pub fn power_transition_time(coeffs: &AsymptoticCoefficients) -> Result<PowerTransition> {
    let lambda = coeffs.lambda;
    if !(lambda > 0.0 && lambda < 1.0) {
        if lambda == 0.0 {
            return Ok(PowerTransition {
                x: f64::INFINITY,
                x_printed: f64::INFINITY,
                x_leading: f64::INFINITY,
                tau_pow: f64::INFINITY,
                iterations: 0,
            });
        }
        return Err(DecayError::OutOfRegime(format!("crossover needs 0 < lambda < 1, got {lambda}")));
    }
    if !(coeffs.gamma > 0.0) {
        return Err(DecayError::StableState);
    }
    let eta = coeffs.eta;
    let log_inv = (1.0 / lambda).ln();
    // Gamma(E_a) in the lambda-free normalisation
    let width = coeffs.gamma / (lambda * lambda);
    let base = 4.0 * (eta + 1.0) * log_inv + 2.0 * eta * (coeffs.e_a / width).ln();
    let ratio = (coeffs.z_mag / coeffs.c_mag).ln();
    let seed = 4.0 * (eta + 1.0) * log_inv;
    let (x, iterations) = fixed_point(base + 2.0 * ratio, 2.0 * eta, seed)?;
    let (x_printed, _) = fixed_point(base + ratio, eta, seed)?;
    Ok(PowerTransition {
        x,
        x_printed,
        x_leading: seed,
        tau_pow: x / coeffs.gamma,
        iterations,
    })
}

pub fn time_scales(params: &ModelParams, sd: &SpectralDensity) -> Result<TimeScales> {
    let tau_z = zeno_time(params, sd)?;
    let tau_e = lifetime(params, sd)?;
    let tau_pow = if params.lambda == 0.0 {
        f64::INFINITY
    } else {
        power_transition_time(&asymptotic_coefficients(params, sd)?)?.tau_pow
    };
    let l2 = params.lambda2();
    Ok(TimeScales {
        tau_z: TimeValue::new(params, tau_z),
        tau_e: TimeValue::new(params, tau_e),
        tau_pow: TimeValue::new(params, tau_pow),
        rescaled: RescaledTimes {
            tau_z: l2 * tau_z,
            tau_e: 1.0 / sd.gamma_at(params.omega0_internal()),
            tau_pow: l2 * tau_pow,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    /// Fitted values; `eta` is the fitted exponent.
    pub coefficients: AsymptoticCoefficients,
    /// `|Z_fit - Z_pole| / |Z_pole|`.
    pub z_mismatch: f64,
    /// Largest deviation of `log |A_cut|` from the fitted line.
    pub fit_residual: f64,
    /// Fit window in internal time.
    pub window: (f64, f64),
}

/// `eta`, `C` and `Z` from a pole/cut series. The fit uses the points in
/// `[5 tau_pow / 4, 4 tau_pow]`; `C` is fitted with the declared
/// threshold exponent and a `1/t` correction.
pub fn extract_coefficients(
    series: &SurvivalSeries,
    params: &ModelParams,
    sd: &SpectralDensity,
) -> Result<Extraction> {
    let (Some(pole_part), Some(cut_part)) = (&series.pole_part, &series.cut_part) else {
        return Err(DecayError::InvalidParameter(
            "coefficient extraction needs the pole and cut parts".into(),
        ));
    };
    let reference = asymptotic_coefficients(params, sd)?;
    let pole = find_pole(params, sd)?;
    let tau_pow = power_transition_time(&reference)?.tau_pow;
    let window = (1.25 * tau_pow, 4.0 * tau_pow);
    let idx: Vec<usize> = series
        .grid
        .points()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= window.0 && t <= window.1)
        .map(|(i, _)| i)
        .collect();
    if idx.len() < 4 {
        return Err(DecayError::RegimeNotReached(format!(
            "{} grid points in the power-law window [{:e}, {:e}]",
            idx.len(),
            window.0,
            window.1
        )));
    }
    let t = series.grid.points();
    let pts: Vec<(f64, f64)> = idx.iter().map(|&i| (t[i].ln(), cut_part[i].norm().ln())).collect();
    let (slope, intercept) = fit::linear(&pts);
    let residual = pts
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    if residual > FIT_RESIDUAL {
        return Err(DecayError::RegimeNotReached(format!(
            "cut part is not a power law in the window (log residual {residual:.3})"
        )));
    }

    let l2 = params.lambda2();
    let e_a = reference.e_a;
    let eta = reference.eta;
    let inv: Vec<f64> = idx.iter().map(|&i| 1.0 / (e_a * t[i])).collect();
    let scaled: Vec<Complex64> = idx
        .iter()
        .map(|&i| {
            let phase = Complex64::new(0.0, -e_a * t[i]).exp();
            cut_part[i] * (e_a * t[i]).powf(eta) * phase / l2
        })
        .collect();
    let re: Vec<f64> = scaled.iter().map(|c| c.re).collect();
    let im: Vec<f64> = scaled.iter().map(|c| c.im).collect();
    let cr = fit::basis(&inv, &re, |x| [1.0, x]);
    let ci = fit::basis(&inv, &im, |x| [1.0, x]);
    let c = Complex64::new(cr[0], ci[0]);

    let i0 = idx[0];
    let z = pole_part[i0] * (Complex64::new(0.0, t[i0]) * pole.e_pole).exp();
    let z_mismatch = (z - pole.residue).norm() / pole.residue.norm();

    Ok(Extraction {
        coefficients: AsymptoticCoefficients {
            z_mag: z.norm(),
            zeta: -z.arg(),
            c_mag: c.norm(),
            c_arg: c.arg(),
            eta: -slope,
            ..reference
        },
        z_mismatch,
        fit_residual: residual,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{hydrogen_params, PhysicalConstants};

    #[test]
    fn hydrogen_time_scales() {
        let p = hydrogen_params(PhysicalConstants::CODATA);
        let h = SpectralDensity::hydrogen();
        let tz = p.from_internal(zeno_time(&p, &h).unwrap());
        assert!((tz / 3.593e-15 - 1.0).abs() < 5e-3, "{tz}");
        let te = p.from_internal(lifetime(&p, &h).unwrap());
        assert!((te / 1.595e-9 - 1.0).abs() < 5e-3, "{te}");
        assert!((1.0 / te / 6.268e8 - 1.0).abs() < 5e-3);
    }

    #[test]
    fn scaling_laws() {
        let p = hydrogen_params(PhysicalConstants::CODATA).with_lambda(0.01).unwrap();
        let q = p.with_lambda(0.02).unwrap();
        let h = SpectralDensity::hydrogen();
        assert!((zeno_time(&q, &h).unwrap() * 2.0 / zeno_time(&p, &h).unwrap() - 1.0).abs() < 1e-14);
        assert!((lifetime(&q, &h).unwrap() * 4.0 / lifetime(&p, &h).unwrap() - 1.0).abs() < 1e-14);
        let h4 = h.scaled(4.0);
        assert!((zeno_time(&p, &h4).unwrap() * 2.0 / zeno_time(&p, &h).unwrap() - 1.0).abs() < 1e-14);
        let h2 = h.scaled(2.0);
        assert!((lifetime(&p, &h2).unwrap() * 2.0 / lifetime(&p, &h).unwrap() - 1.0).abs() < 1e-14);
        let free = p.with_lambda(0.0).unwrap();
        assert_eq!(zeno_time(&free, &h).unwrap(), f64::INFINITY);
    }

    #[test]
    fn crossover_matches_bisection() {
        let c = AsymptoticCoefficients {
            lambda: 1e-3,
            z_mag: 1.0,
            zeta: 0.0,
            c_mag: 1.0,
            c_arg: 0.0,
            eta: 1.5,
            delta_e: 0.0,
            gamma: 1e-6,
            e_a: 1.0,
        };
        let x = power_transition_time(&c).unwrap().x;
        // E_a = Gamma and Z = C leave x = 4(eta+1) ln(1/lambda) + 2 eta ln x
        let f = |x: f64| x - 4.0 * 2.5 * 1e3f64.ln() - 3.0 * x.ln();
        let (mut lo, mut hi) = (10.0, 1e3);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((x - lo).abs() < 1e-8);
        // the two terms cross at the root
        let t = x / c.gamma;
        let (e, p, _) = long_time_terms(t, &c);
        assert!((e / p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn far_tail_is_pure_power() {
        let c = AsymptoticCoefficients {
            lambda: 0.05,
            z_mag: 0.99,
            zeta: 0.01,
            c_mag: 1.2,
            c_arg: 3.0,
            eta: 2.0,
            delta_e: -1e-4,
            gamma: 1e-4,
            e_a: 1e-3,
        };
        let t: f64 = 1e8;
        let l4 = 0.05f64.powi(4);
        let want = l4 * 1.44 / (1e-3 * t).powi(4);
        assert!((long_time_p(t, &c) / want - 1.0).abs() < 1e-12);
    }
}
