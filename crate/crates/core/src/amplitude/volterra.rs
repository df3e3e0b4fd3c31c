//! Memory-kernel evolution `i dA/dt = lambda^2 int_0^t sigma(t - s) A(s) ds`.
//!
//! The solver works in a frame rotating with the golden-rule shift,
//! `B = exp(i w_s t) A`, and integrates `dB/dt` over each step exactly for
//! piecewise-linear `B`. The kernel enters only through its moments
//! against the hat functions, which are computed from the density along a
//! ray in the lower half plane where they decay with the step index.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Engine, SurvivalSeries, TimeGrid};
use crate::conv;
use crate::error::{DecayError, Result};
use crate::params::ModelParams;
use crate::quad::{self, PanelRule, Tolerance};
use crate::selfenergy::{sigma2, Sheet};
use crate::spectral::{DensityKind, SpectralDensity};

const ORDER: usize = 16;
const CHUNK: usize = 2048;
const NEGLIGIBLE: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelForm {
    /// `sigma(t)` from the density.
    Dispersive,
    /// `sigma(t) = C delta(t)`, never sampled.
    Markovian { constant: Complex64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryKernel {
    pub sd: SpectralDensity,
    /// Unperturbed level, internal units.
    pub omega0: f64,
    pub form: KernelForm,
}

/// Kernel built from the density.
pub fn memory_kernel(params: &ModelParams, sd: &SpectralDensity) -> MemoryKernel {
    MemoryKernel {
        sd: sd.clone(),
        omega0: params.omega0_internal(),
        form: KernelForm::Dispersive,
    }
}

impl MemoryKernel {
    pub fn markovian(params: &ModelParams, sd: &SpectralDensity, constant: Complex64) -> MemoryKernel {
        MemoryKernel {
            sd: sd.clone(),
            omega0: params.omega0_internal(),
            form: KernelForm::Markovian { constant },
        }
    }

    /// The constant that reproduces the weak-coupling limit:
    /// `C = Sigma(w0 + i0)`.
    pub fn vanhove_constant(params: &ModelParams, sd: &SpectralDensity) -> Result<MemoryKernel> {
        let c = sigma2(sd, Complex64::new(params.omega0_internal(), 0.0), Sheet::First)?.value;
        Ok(MemoryKernel::markovian(params, sd, c))
    }

    pub fn is_markovian(&self) -> bool {
        matches!(self.form, KernelForm::Markovian { .. })
    }

    /// `sigma(t) = -i exp(i w0 t) int d(w) exp(-i w t) dw`.
    pub fn sigma(&self, t: f64) -> Result<Complex64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(DecayError::Domain(format!("sigma(t) needs finite t >= 0, got {t}")));
        }
        if let KernelForm::Markovian { .. } = self.form {
            return Err(DecayError::Unsupported(
                "a delta kernel has no pointwise values".into(),
            ));
        }
        let minus_i = Complex64::new(0.0, -1.0);
        if t == 0.0 {
            return Ok(minus_i * self.sd.second_moment()?);
        }
        let tol = Tolerance {
            abs: 1e-15,
            rel: 1e-12,
            max_intervals: 20_000,
        };
        let mut total = Complex64::new(0.0, 0.0);
        if self.sd.supports_continuation() {
            let dir = Complex64::from_polar(1.0, -FRAC_PI_4);
            for leaf in leaves(&self.sd)? {
                let origin = leaf.offset + leaf.sd.threshold();
                let f = |u: f64| -> Complex64 {
                    let w = Complex64::new(origin, 0.0) + dir * u;
                    let d = leaf.sd.continued(w - leaf.offset).unwrap_or_default();
                    dir * d * leaf.strength * (minus_i * (w - self.omega0) * t).exp()
                };
                let scale = (1.0 / t).min(leaf.sd.cutoff);
                total += quad::integrate_to_infinity(f, 0.0, scale, &[], tol)?.value;
            }
        } else {
            let g = |w: f64| (minus_i * (w - self.omega0) * t).exp();
            total = crate::spectral::real_axis_integral(&self.sd, g, &[], tol)?.value;
        }
        Ok(minus_i * total)
    }
}

/// One analytic piece of a channel sum, placed at `offset`.
struct Leaf {
    offset: f64,
    strength: f64,
    sd: SpectralDensity,
}

fn collect_leaves(sd: &SpectralDensity, offset: f64, strength: f64, out: &mut Vec<Leaf>) -> Result<()> {
    match &sd.kind {
        DensityKind::ChannelSum(ch) => {
            for c in ch {
                collect_leaves(&c.density, offset + c.threshold, strength * sd.strength, out)?;
            }
        }
        DensityKind::Tabulated(_) => {
            return Err(DecayError::Unsupported(
                "the memory-kernel solver needs an analytic density".into(),
            ))
        }
        _ => out.push(Leaf {
            offset,
            strength,
            sd: sd.clone(),
        }),
    }
    Ok(())
}

fn leaves(sd: &SpectralDensity) -> Result<Vec<Leaf>> {
    let mut out = Vec::new();
    collect_leaves(sd, 0.0, 1.0, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolterraOptions {
    /// Requested step; the default is the largest admissible one.
    pub step: Option<f64>,
    /// Run a delta kernel through the time stepper instead of the closed
    /// form.
    pub discretize_markovian: bool,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        VolterraOptions {
            step: None,
            discretize_markovian: false,
        }
    }
}

/// `I_n(a) = int_0^1 v^n exp(a v) dv` for n = 0, 1, 2.
fn exp_moments(a: Complex64) -> [Complex64; 3] {
    if a.norm() < 1.0 {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..24 {
            for (n, o) in out.iter_mut().enumerate() {
                *o += term / (n + k + 1) as f64;
            }
            term = term * a / (k + 1) as f64;
        }
        out
    } else {
        let ea = a.exp();
        let i0 = (ea - 1.0) / a;
        let i1 = (ea - i0) / a;
        let i2 = (ea - 2.0 * i1) / a;
        [i0, i1, i2]
    }
}

/// Hat-function moments of the kernel for step `h`.
struct Moments {
    /// `D_{-1}`: weight of the unknown `B_{n+1}`.
    next: Complex64,
    /// `kernel[j] = D_{j-1}` for `j >= 1`; `kernel[0]` unused.
    kernel: Vec<Complex64>,
    /// Weight of `B_0` in the step from `t_n`.
    origin: Vec<Complex64>,
}

fn dispersive_moments(kernel: &MemoryKernel, omega_ref: f64, h: f64, n: usize, t_max: f64) -> Result<Moments> {
    let dir = Complex64::from_polar(1.0, -FRAC_PI_4);
    // node data: a = -i nu h, c = quadrature weight times density
    let mut a_nodes = Vec::new();
    let mut c_nodes = Vec::new();
    for leaf in leaves(&kernel.sd)? {
        let origin = leaf.offset + leaf.sd.threshold();
        let eta = leaf.sd.threshold_exponent().unwrap_or(1.0).max(0.05);
        let lo = 1e-4f64.min(1e-14f64.powf(1.0 / eta)) / t_max.max(1.0 / leaf.sd.cutoff);
        let rule = PanelRule::geometric(lo, 1e3 * leaf.sd.cutoff, 4, ORDER);
        for (&u, &q) in rule.nodes.iter().zip(&rule.weights) {
            let w = Complex64::new(origin, 0.0) + dir * u;
            let d = leaf.sd.continued(w - leaf.offset)? * leaf.strength * kernel.sd.strength;
            a_nodes.push(Complex64::new(0.0, -h) * (w - omega_ref));
            c_nodes.push(dir * q * d);
        }
    }
    let scale = Complex64::new(0.0, -h * h);

    let mut next = Complex64::new(0.0, 0.0);
    let mut d0 = Complex64::new(0.0, 0.0);
    let mut origin0 = Complex64::new(0.0, 0.0);
    // per node: (exp(a), weight for D_k, weight for the origin sequence)
    let mut per_node = Vec::with_capacity(a_nodes.len());
    for (&a, &c) in a_nodes.iter().zip(&c_nodes) {
        let [i0, i1, i2] = exp_moments(a);
        let ea = a.exp();
        let p2 = 0.5 * (i0 - 2.0 * i1 + i2);
        let p1 = 0.5 * (i0 + 2.0 * i1 - 2.0 * i2) + ea * p2;
        let p0 = 0.5 * (i0 - i2);
        let n0 = 0.5 * i2 + ea * p0;
        next += c * p2;
        d0 += c * p1;
        origin0 += c * p0;
        per_node.push((ea, c * i0 * i0 * i0, c * n0));
    }

    // D_k and the origin weights for k = 1..n share exp(a (k-1))
    let chunks: Vec<(Vec<Complex64>, Vec<Complex64>)> = (1..=n)
        .step_by(CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k0| {
            let len = CHUNK.min(n + 1 - k0);
            let mut dk = vec![Complex64::new(0.0, 0.0); len];
            let mut ok = vec![Complex64::new(0.0, 0.0); len];
            for (j, &(ea, wd, wo)) in per_node.iter().enumerate() {
                let mut p = (a_nodes[j] * (k0 - 1) as f64).exp();
                for i in 0..len {
                    if p.norm_sqr() < NEGLIGIBLE * NEGLIGIBLE {
                        break;
                    }
                    dk[i] += wd * p;
                    ok[i] += wo * p;
                    p *= ea;
                }
            }
            (dk, ok)
        })
        .collect();

    let mut kern = Vec::with_capacity(n + 1);
    kern.push(Complex64::new(0.0, 0.0));
    kern.push(scale * d0);
    let mut origin = Vec::with_capacity(n + 1);
    origin.push(scale * origin0);
    for (dk, ok) in chunks {
        kern.extend(dk.into_iter().map(|v| scale * v));
        origin.extend(ok.into_iter().map(|v| scale * v));
    }
    kern.truncate(n + 1);
    origin.truncate(n + 1);
    Ok(Moments {
        next: scale * next,
        kernel: kern,
        origin,
    })
}

/// A delta kernel discretized with the same hat functions: only the
/// current step sees it, which reduces to the trapezoidal rule.
fn markovian_moments(constant: Complex64, h: f64, n: usize) -> Moments {
    let half = constant * (0.5 * h);
    let mut kernel = vec![Complex64::new(0.0, 0.0); n + 1];
    if n >= 1 {
        kernel[1] = half;
    }
    let mut origin = vec![Complex64::new(0.0, 0.0); n + 1];
    origin[0] = half;
    Moments {
        next: half,
        kernel,
        origin,
    }
}

/// `B_0..B_n` on the uniform grid of step `h`.
fn march(l2: f64, omega_s: f64, m: &Moments, h: f64, n: usize) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let lhs = 1.0 - i * (0.5 * omega_s * h) + i * l2 * m.next;
    let rot = 1.0 + i * (0.5 * omega_s * h);
    let b0 = Complex64::new(1.0, 0.0);
    // y_0 = 0 so that B_0 only enters through the origin weights
    let mut prev = b0;
    let y = conv::causal(&m.kernel, n + 1, |step, hist| {
        if step == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let b = (prev * rot - i * l2 * (hist + m.origin[step - 1] * b0)) / lhs;
        prev = b;
        b
    });
    let mut out = y;
    out[0] = b0;
    out
}

/// Cubic Lagrange interpolation of samples spaced by `h`.
fn interpolate(b: &[Complex64], h: f64, t: f64) -> Complex64 {
    let n = b.len();
    if n < 4 {
        let x = (t / h).clamp(0.0, (n - 1) as f64);
        let k = (x.floor() as usize).min(n.saturating_sub(2));
        if n == 1 {
            return b[0];
        }
        let f = x - k as f64;
        return b[k] * (1.0 - f) + b[k + 1] * f;
    }
    let x = t / h;
    let k = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let f = x - k as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..4 {
        let mut w = 1.0;
        for m in 0..4 {
            if m != j {
                w *= (f - m as f64) / (j as f64 - m as f64);
            }
        }
        acc += b[k + j] * w;
    }
    acc
}

/// Largest admissible step `min(tau_Z / 20, tau_E / 200)`.
pub fn volterra_step_bound(params: &ModelParams, kernel: &MemoryKernel) -> Result<f64> {
    let l2 = params.lambda2();
    match kernel.form {
        KernelForm::Markovian { constant } => {
            let rate = l2 * constant.norm();
            Ok(if rate > 0.0 { 1.0 / rate / 200.0 } else { f64::INFINITY })
        }
        KernelForm::Dispersive => {
            let tau_z = 1.0 / (params.lambda * kernel.sd.second_moment()?.sqrt());
            let gamma = kernel.sd.gamma_at(kernel.omega0);
            let tau_e = if gamma > 0.0 { 1.0 / (l2 * gamma) } else { f64::INFINITY };
            Ok((tau_z / 20.0).min(tau_e / 200.0))
        }
    }
}

pub fn amplitude_volterra(params: &ModelParams, kernel: &MemoryKernel, grid: &TimeGrid) -> Result<SurvivalSeries> {
    amplitude_volterra_with(params, kernel, grid, VolterraOptions::default())
}

pub fn amplitude_volterra_with(
    params: &ModelParams,
    kernel: &MemoryKernel,
    grid: &TimeGrid,
    opts: VolterraOptions,
) -> Result<SurvivalSeries> {
    let l2 = params.lambda2();
    if l2 == 0.0 {
        return Ok(SurvivalSeries::unit(grid, Engine::Volterra));
    }
    if let KernelForm::Markovian { constant } = kernel.form {
        if !opts.discretize_markovian {
            let amp = grid
                .points()
                .iter()
                .map(|&t| (Complex64::new(0.0, -l2 * t) * constant).exp())
                .collect();
            return Ok(SurvivalSeries::new(grid, amp, vec![0.0; grid.len()], Engine::Volterra));
        }
    }
    if kernel.sd.is_tabulated() && !kernel.is_markovian() {
        return Err(DecayError::Unsupported(
            "the memory-kernel solver needs an analytic density".into(),
        ));
    }
    let bound = volterra_step_bound(params, kernel)?;
    let requested = opts.step.unwrap_or(bound);
    if !(requested > 0.0) {
        return Err(DecayError::InvalidParameter(format!("step must be positive, got {requested}")));
    }
    if requested > bound {
        return Err(DecayError::StepTooCoarse { step: requested, bound });
    }
    let t_max = grid.t_max();
    if t_max == 0.0 {
        return Ok(SurvivalSeries::unit(grid, Engine::Volterra));
    }

    let omega_s = match kernel.form {
        KernelForm::Markovian { constant } => l2 * constant.re,
        KernelForm::Dispersive => l2 * sigma2(&kernel.sd, Complex64::new(kernel.omega0, 0.0), Sheet::First)?.value.re,
    };
    let omega_ref = kernel.omega0 + omega_s;
    let solve = |n: usize| -> Result<(Vec<Complex64>, f64)> {
        let h = t_max / n as f64;
        let m = match kernel.form {
            KernelForm::Markovian { constant } => markovian_moments(constant, h, n),
            KernelForm::Dispersive => dispersive_moments(kernel, omega_ref, h, n, t_max)?,
        };
        Ok((march(l2, omega_s, &m, h, n), h))
    };
    let n = ((t_max / requested).ceil() as usize).max(4);
    let (fine, h) = solve(n)?;
    let (coarse, h2) = solve(n.div_ceil(2).max(4))?;

    let mut amp = Vec::with_capacity(grid.len());
    let mut err = Vec::with_capacity(grid.len());
    for &t in grid.points() {
        let phase = (Complex64::new(0.0, -omega_s * t)).exp();
        let a = interpolate(&fine, h, t) * phase;
        let b = interpolate(&coarse, h2, t) * phase;
        amp.push(a);
        err.push((a - b).norm() / 3.0);
    }
    Ok(SurvivalSeries::new(grid, amp, err, Engine::Volterra))
}
