//! Real-axis spectral representation
//! `A(t) = int rho(w) exp(-i (w - w0) t) dw` with
//! `rho = (l2 Gamma / 2pi) / ((w - w0 - l2 Delta)^2 + (l2 Gamma / 2)^2)`.
//!
//! The real axis is covered up to a few times `w0` with Gauss-Legendre
//! panels no wider than half an oscillation at the largest time; beyond
//! that the integral runs along a ray descending at 45 degrees, where the
//! continued spectral function is `l2 d(z) G_I(z) G_II(z)`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use super::{propagator, Engine, SurvivalSeries, TimeGrid};
use crate::error::{DecayError, Result};
use crate::params::ModelParams;
use crate::pole::{find_pole, perturbative_pole, PoleOrder};
use crate::quad::PanelRule;
use crate::selfenergy::{sigma2, Sheet};
use crate::spectral::{DensityKind, SpectralDensity};

const ORDER: usize = 16;
const CHECK_ORDER: usize = 12;
const MAX_NODES: usize = 8_000_000;

struct Rule {
    /// `z - w0` at each node.
    nu: Vec<Complex64>,
    /// Quadrature weight times spectral function.
    weight: Vec<Complex64>,
}

impl Rule {
    fn amplitude(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (nu, w) in self.nu.iter().zip(&self.weight) {
            acc += w * (Complex64::new(0.0, -t) * nu).exp();
        }
        acc
    }
}

struct Layout {
    breaks: Vec<f64>,
    /// Start of the descending ray; `None` when the density has no
    /// continuation and the real axis is covered to the end of its support.
    ray_origin: Option<f64>,
    ray_lo: f64,
    ray_hi: f64,
}

fn sample_points(sd: &SpectralDensity) -> Vec<f64> {
    match &sd.kind {
        DensityKind::Tabulated(t) => t.samples().map(|(w, _)| w).collect(),
        DensityKind::ChannelSum(ch) => ch
            .iter()
            .flat_map(|c| sample_points(&c.density).into_iter().map(move |w| w + c.threshold))
            .collect(),
        _ => Vec::new(),
    }
}

fn layout(params: &ModelParams, sd: &SpectralDensity, t_max: f64) -> Result<Layout> {
    let w0 = params.omega0_internal();
    let thr = sd.threshold();
    let gap = w0 - thr;
    let thresholds = sd.thresholds();
    let analytic = sd.supports_continuation();

    let (centre, half) = match find_pole(params, sd) {
        Ok(p) => (w0 + p.delta_e, 0.5 * p.gamma),
        Err(_) => {
            let e = perturbative_pole(params, sd, PoleOrder::Second)?;
            (w0 + e.re, -e.im)
        }
    };
    let half = half.max(1e-12 * gap);

    let end = if analytic {
        let top_thr = thresholds.iter().copied().fold(thr, f64::max);
        (thr + 4.0 * gap).max(top_thr + gap)
    } else {
        sd.upper_support()
    };

    let mut marks: Vec<f64> = thresholds.clone();
    marks.extend(sample_points(sd));
    marks.extend(sd.features().into_iter().filter(|x| x.is_finite()));
    marks.retain(|&x| x > thr && x < end);
    marks.push(end);
    marks.sort_by(f64::total_cmp);
    marks.dedup();

    let osc = if t_max > 0.0 { PI / t_max } else { f64::INFINITY };
    let width = |x: f64| -> f64 {
        let below = thresholds
            .iter()
            .copied()
            .filter(|&t| t <= x)
            .fold(thr, f64::max);
        let grading = 0.5 * (x - below);
        let resonance = (0.25 * half).max(0.25 * (x - centre).abs());
        osc.min(resonance).min(grading).min(gap / 4.0).min(sd.cutoff / 8.0)
    };

    let tiny = 1e-13 * gap.max(1e-300);
    let mut breaks = vec![thr];
    let mut x = thr;
    for &m in &marks {
        // grade geometrically away from each mark
        if x + tiny < m {
            x = (x + tiny).min(m);
            breaks.push(x);
        }
        while x < m {
            let next = x + width(x).max(tiny);
            x = if next >= m - 1e-3 * (next - x) { m } else { next };
            breaks.push(x);
            if breaks.len() * ORDER > MAX_NODES {
                return Err(DecayError::InvalidParameter(format!(
                    "time range {t_max:e} needs more than {MAX_NODES} spectral nodes"
                )));
            }
        }
    }

    let inv_t = if t_max > 0.0 { 1.0 / t_max } else { f64::INFINITY };
    Ok(Layout {
        breaks,
        ray_origin: analytic.then_some(end),
        ray_lo: 1e-2 * inv_t.min(end - w0),
        ray_hi: 1e3 * sd.cutoff,
    })
}

fn build_rule(params: &ModelParams, sd: &SpectralDensity, lay: &Layout, order: usize) -> Result<Rule> {
    let l2 = params.lambda2();
    let w0 = params.omega0_internal();
    let real = PanelRule::from_breaks(&lay.breaks, order);
    let rho: Vec<Result<f64>> = real
        .nodes
        .par_iter()
        .map(|&w| {
            let s = sigma2(sd, Complex64::new(w, 0.0), Sheet::First)?.value;
            let gamma = -2.0 * s.im;
            let det = w - w0 - l2 * s.re;
            let hw = 0.5 * l2 * gamma;
            Ok(l2 * gamma / (2.0 * PI) / (det * det + hw * hw))
        })
        .collect();
    let mut nu = Vec::with_capacity(real.len());
    let mut weight = Vec::with_capacity(real.len());
    for ((w, q), r) in real.nodes.iter().zip(&real.weights).zip(rho) {
        nu.push(Complex64::new(w - w0, 0.0));
        weight.push(Complex64::new(q * r?, 0.0));
    }
    if let Some(origin) = lay.ray_origin {
        let dir = Complex64::from_polar(1.0, -FRAC_PI_4);
        let ray = PanelRule::geometric(lay.ray_lo, lay.ray_hi, 4, order);
        let vals: Vec<Result<Complex64>> = ray
            .nodes
            .par_iter()
            .map(|&v| {
                let z = origin + dir * v;
                let gi = propagator(l2, w0, sd, z, Sheet::First)?;
                let gii = propagator(l2, w0, sd, z, Sheet::Second)?;
                Ok(l2 * sd.continued(z)? * gi * gii)
            })
            .collect();
        for ((v, q), r) in ray.nodes.iter().zip(&ray.weights).zip(vals) {
            nu.push(Complex64::new(origin - w0, 0.0) + dir * v);
            weight.push(dir * q * r?);
        }
    }
    Ok(Rule { nu, weight })
}

fn check_input(params: &ModelParams, sd: &SpectralDensity) -> Result<()> {
    let w0 = params.omega0_internal();
    if sd.gamma_at(w0) <= 0.0 {
        return Err(DecayError::Unsupported(
            "the spectral engine needs the level inside the continuum".into(),
        ));
    }
    Ok(())
}

/// Integral of the spectral function over the same contour, i.e. `A(0)`.
/// Equals one when the level has no bound-state component.
pub fn spectral_weight(params: &ModelParams, sd: &SpectralDensity, t_max: f64) -> Result<f64> {
    check_input(params, sd)?;
    let lay = layout(params, sd, t_max)?;
    let rule = build_rule(params, sd, &lay, ORDER)?;
    Ok(rule.amplitude(0.0).re)
}

pub fn amplitude_spectral(params: &ModelParams, sd: &SpectralDensity, grid: &TimeGrid) -> Result<SurvivalSeries> {
    if params.lambda == 0.0 {
        return Ok(SurvivalSeries::unit(grid, Engine::Spectral));
    }
    check_input(params, sd)?;
    let lay = layout(params, sd, grid.t_max())?;
    let fine = build_rule(params, sd, &lay, ORDER)?;
    let coarse = build_rule(params, sd, &lay, CHECK_ORDER)?;
    let pairs: Vec<(Complex64, f64)> = grid
        .points()
        .par_iter()
        .map(|&t| {
            let a = fine.amplitude(t);
            let b = coarse.amplitude(t);
            (a, (a - b).norm())
        })
        .collect();
    let (amp, err) = pairs.into_iter().unzip();
    Ok(SurvivalSeries::new(grid, amp, err, Engine::Spectral))
}
