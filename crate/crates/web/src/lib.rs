//! Browser bindings for the hydrogen decay demo in `www/`.
//!
//! Every export returns a flat `Float64Array` of fixed-width rows; the
//! plain `*_rows` functions behind them are usable (and tested) natively.

use decay_core::amplitude::{survival, Engine, TimeGrid};
use decay_core::asymptotics::lifetime;
use decay_core::params::{hydrogen_params, ModelParams, PhysicalConstants};
use decay_core::selfenergy::{sigma2, Sheet};
use decay_core::spectral::SpectralDensity;
use decay_core::{Complex64, DecayError, Result};
use wasm_bindgen::prelude::*;

fn hydrogen(lambda: f64) -> Result<(ModelParams, SpectralDensity)> {
    let p = hydrogen_params(PhysicalConstants::CODATA).with_lambda(lambda)?;
    Ok((p, SpectralDensity::hydrogen()))
}

fn engine(name: &str) -> Result<Engine> {
    match name {
        "pole_cut" => Ok(Engine::PoleCut),
        "spectral" => Ok(Engine::Spectral),
        "volterra" => Ok(Engine::Volterra),
        other => Err(DecayError::InvalidParameter(format!("unknown engine {other:?}"))),
    }
}

/// Rows `(t / tau_E, P(t), exp(-t / tau_E))` for `t` in `[0, t_max tau_E]`.
pub fn survival_rows(lambda: f64, engine_name: &str, t_max: f64, count: usize) -> Result<Vec<f64>> {
    let (p, h) = hydrogen(lambda)?;
    let tau = lifetime(&p, &h)?;
    let grid = TimeGrid::linear(0.0, t_max * tau, count)?;
    let s = survival(&p, &h, &grid, engine(engine_name)?)?;
    let mut out = Vec::with_capacity(3 * count);
    for (&t, &pr) in grid.points().iter().zip(&s.probability) {
        let x = t / tau;
        out.extend([x, pr, (-x).exp()]);
    }
    Ok(out)
}

/// Rows `(E / w0, Re Sigma, Im Sigma)` along `E + i eim w0` for
/// `E` in `[emin w0, emax w0]`, on the first or second sheet.
pub fn self_energy_rows(emin: f64, emax: f64, eim: f64, count: usize, second_sheet: bool) -> Result<Vec<f64>> {
    if count < 2 || !(emax > emin) {
        return Err(DecayError::InvalidParameter("need emax > emin and count >= 2".into()));
    }
    let (p, h) = hydrogen(0.0)?;
    let w0 = p.omega0_internal();
    let sheet = if second_sheet { Sheet::Second } else { Sheet::First };
    let step = (emax - emin) / (count - 1) as f64;
    let mut out = Vec::with_capacity(3 * count);
    for i in 0..count {
        let x = emin + step * i as f64;
        let v = sigma2(&h, Complex64::new(x * w0, eim * w0), sheet)?.value;
        out.extend([x, v.re, v.im]);
    }
    Ok(out)
}

/// Rows `(t~, P_1(t~ / l_1^2), ..., P_n(t~ / l_n^2), exp(-Gamma t~))` over
/// rescaled time `t~` in `[0, t_max / Gamma]`: the curves collapse onto the
/// exponential as the coupling goes to zero.
pub fn vanhove_rows(lambdas: &[f64], t_max: f64, count: usize) -> Result<Vec<f64>> {
    if lambdas.is_empty() {
        return Err(DecayError::InvalidParameter("no couplings given".into()));
    }
    let (p, h) = hydrogen(lambdas[0])?;
    let gamma = h.gamma_at(p.omega0_internal());
    let tilde = TimeGrid::linear(0.0, t_max / gamma, count)?;
    let mut curves = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let (q, _) = hydrogen(l)?;
        let l2 = q.lambda2();
        let grid = TimeGrid::new(tilde.points().iter().map(|t| t / l2).collect())?;
        curves.push(survival(&q, &h, &grid, Engine::PoleCut)?.probability);
    }
    let width = lambdas.len() + 2;
    let mut out = Vec::with_capacity(width * count);
    for (i, &t) in tilde.points().iter().enumerate() {
        out.push(t);
        out.extend(curves.iter().map(|c| c[i]));
        out.push((-gamma * t).exp());
    }
    Ok(out)
}

fn js(r: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// Survival probability of the hydrogen 2P level; see [`survival_rows`].
#[wasm_bindgen]
pub fn survival_curve(lambda: f64, engine: &str, t_max: f64, count: usize) -> std::result::Result<Vec<f64>, JsError> {
    js(survival_rows(lambda, engine, t_max, count))
}

/// Hydrogen self-energy profile; see [`self_energy_rows`].
#[wasm_bindgen]
pub fn self_energy_profile(
    emin: f64,
    emax: f64,
    eim: f64,
    count: usize,
    second_sheet: bool,
) -> std::result::Result<Vec<f64>, JsError> {
    js(self_energy_rows(emin, emax, eim, count, second_sheet))
}

/// Rescaled survival curves for several couplings; see [`vanhove_rows`].
#[wasm_bindgen]
pub fn vanhove_collapse(lambdas: Vec<f64>, t_max: f64, count: usize) -> std::result::Result<Vec<f64>, JsError> {
    js(vanhove_rows(&lambdas, t_max, count))
}
