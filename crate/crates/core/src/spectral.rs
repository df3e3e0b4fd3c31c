//! Coupling densities |phi(w)|^2 and the quantities derived from them:
//! the golden-rule width, the principal-value shift, the total weight and
//! the threshold exponent.
//!
//! The built-in family is `L (w/L)^(eta-1) (1 + (w/L)^2)^-(eta+2)`; the
//! hydrogen 2P-1S weight is its `eta = 2` member and has a closed-form
//! self-energy.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};
use crate::quad::{self, Tolerance};

/// Truncation point of principal-value integrals, in units of the cutoff.
pub const PV_TRUNCATION: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    omega: Vec<f64>,
    value: Vec<f64>,
    eta: Option<f64>,
}

impl TabulatedDensity {
    /// Samples must have strictly increasing, non-negative abscissae and
    /// non-negative values. `eta` may be declared; otherwise it is
    /// estimated from the samples nearest the threshold.
    pub fn new(omega: Vec<f64>, value: Vec<f64>, eta: Option<f64>) -> Result<Self> {
        if omega.len() != value.len() || omega.len() < 2 {
            return Err(DecayError::InvalidParameter(
                "tabulated density needs at least two (omega, value) pairs".into(),
            ));
        }
        if omega.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(DecayError::InvalidParameter("omega samples must be finite and >= 0".into()));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DecayError::InvalidParameter("omega samples must be strictly increasing".into()));
        }
        if value.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(DecayError::InvalidParameter("density samples must be finite and >= 0".into()));
        }
        if let Some(e) = eta {
            if !(e > 0.0) {
                return Err(DecayError::InvalidParameter(format!("eta must be positive, got {e}")));
            }
        }
        Ok(TabulatedDensity { omega, value, eta })
    }

    /// Reads a two-column CSV (omega, density) in internal units. Lines
    /// starting with `#` and a non-numeric header line are skipped.
    pub fn from_csv(text: &str, eta: Option<f64>) -> Result<Self> {
        let mut omega = Vec::new();
        let mut value = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(DecayError::InvalidParameter(format!("line {}: expected two columns", lineno + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(w), Ok(v)) => {
                    omega.push(w);
                    value.push(v);
                }
                _ if omega.is_empty() => continue,
                _ => {
                    return Err(DecayError::InvalidParameter(format!(
                        "line {}: cannot parse numbers",
                        lineno + 1
                    )))
                }
            }
        }
        TabulatedDensity::new(omega, value, eta)
    }

    pub fn eval(&self, w: f64) -> f64 {
        let n = self.omega.len();
        if !(w >= self.omega[0] && w <= self.omega[n - 1]) {
            return 0.0;
        }
        let i = self.omega.partition_point(|&x| x <= w).clamp(1, n - 1);
        let (w0, w1) = (self.omega[i - 1], self.omega[i]);
        let (v0, v1) = (self.value[i - 1], self.value[i]);
        let s = (w - w0) / (w1 - w0);
        if v0 > 0.0 && v1 > 0.0 {
            (v0.ln() * (1.0 - s) + v1.ln() * s).exp()
        } else {
            v0 * (1.0 - s) + v1 * s
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega.iter().copied().zip(self.value.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// Energy at which this channel opens.
    pub threshold: f64,
    pub density: SpectralDensity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DensityKind {
    Hydrogen,
    PowerLaw { eta: f64 },
    Tabulated(TabulatedDensity),
    ChannelSum(Vec<Channel>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub kind: DensityKind,
    /// Cutoff in internal units.
    pub cutoff: f64,
    /// Overall multiplier of the density.
    pub strength: f64,
}

/// Principal-value shift and golden-rule width at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftValue {
    pub e: f64,
    pub delta: f64,
    pub gamma: f64,
    pub err_estimate: f64,
}

impl SpectralDensity {
    /// Hydrogen 2P-1S weight with the cutoff as unit.
    pub fn hydrogen() -> Self {
        SpectralDensity {
            kind: DensityKind::Hydrogen,
            cutoff: 1.0,
            strength: 1.0,
        }
    }

    pub fn power_law(eta: f64, cutoff: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(DecayError::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(DecayError::InvalidParameter(format!("cutoff must be positive, got {cutoff}")));
        }
        Ok(SpectralDensity {
            kind: DensityKind::PowerLaw { eta },
            cutoff,
            strength: 1.0,
        })
    }

    pub fn tabulated(table: TabulatedDensity) -> Self {
        let cutoff = table.support().1.max(f64::MIN_POSITIVE);
        SpectralDensity {
            kind: DensityKind::Tabulated(table),
            cutoff,
            strength: 1.0,
        }
    }

    pub fn channel_sum(channels: Vec<Channel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(DecayError::InvalidParameter("channel sum needs at least one channel".into()));
        }
        if channels.iter().any(|c| !c.threshold.is_finite()) {
            return Err(DecayError::InvalidParameter("channel thresholds must be finite".into()));
        }
        let cutoff = channels.iter().map(|c| c.density.cutoff).fold(0.0, f64::max);
        Ok(SpectralDensity {
            kind: DensityKind::ChannelSum(channels),
            cutoff,
            strength: 1.0,
        })
    }

    /// The same density multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        SpectralDensity {
            strength: self.strength * c,
            ..self.clone()
        }
    }

    /// The same density moved up in energy by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        SpectralDensity {
            kind: DensityKind::ChannelSum(vec![Channel {
                threshold: shift,
                density: self.clone(),
            }]),
            cutoff: self.cutoff,
            strength: 1.0,
        }
    }

    /// True for the hydrogen weight, which has a closed-form self-energy.
    pub fn is_hydrogen(&self) -> bool {
        matches!(self.kind, DensityKind::Hydrogen)
    }

    pub fn is_tabulated(&self) -> bool {
        match &self.kind {
            DensityKind::Tabulated(_) => true,
            DensityKind::ChannelSum(ch) => ch.iter().any(|c| c.density.is_tabulated()),
            _ => false,
        }
    }

    /// Lowest energy at which the density can be non-zero.
    pub fn threshold(&self) -> f64 {
        match &self.kind {
            DensityKind::ChannelSum(ch) => ch
                .iter()
                .map(|c| c.threshold + c.density.threshold())
                .fold(f64::INFINITY, f64::min),
            DensityKind::Tabulated(t) => t.support().0,
            _ => 0.0,
        }
    }

    /// All branch points of the density, sorted.
    pub fn thresholds(&self) -> Vec<f64> {
        let mut out = match &self.kind {
            DensityKind::ChannelSum(ch) => ch
                .iter()
                .flat_map(|c| c.density.thresholds().into_iter().map(move |t| t + c.threshold))
                .collect(),
            _ => vec![self.threshold()],
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Energies where the density changes character; used as quadrature
    /// breakpoints.
    pub fn features(&self) -> Vec<f64> {
        let mut out = match &self.kind {
            DensityKind::ChannelSum(ch) => ch
                .iter()
                .flat_map(|c| c.density.features().into_iter().map(move |t| t + c.threshold))
                .collect(),
            DensityKind::Tabulated(t) => {
                let (a, b) = t.support();
                vec![a, b]
            }
            _ => vec![0.0, self.cutoff],
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Upper end of the support, infinite for the analytic families.
    pub fn upper_support(&self) -> f64 {
        match &self.kind {
            DensityKind::Tabulated(t) => t.support().1,
            DensityKind::ChannelSum(ch) => ch
                .iter()
                .map(|c| c.threshold + c.density.upper_support())
                .fold(f64::NEG_INFINITY, f64::max),
            _ => f64::INFINITY,
        }
    }

    /// |phi(w)|^2 on the real axis; zero below threshold.
    pub fn density(&self, w: f64) -> f64 {
        let v = match &self.kind {
            DensityKind::Hydrogen => {
                if w <= 0.0 {
                    0.0
                } else {
                    let x = w / self.cutoff;
                    let q = 1.0 + x * x;
                    let q2 = q * q;
                    self.cutoff * x / (q2 * q2)
                }
            }
            DensityKind::PowerLaw { eta } => {
                if w <= 0.0 {
                    0.0
                } else {
                    let x = w / self.cutoff;
                    self.cutoff * x.powf(eta - 1.0) * (1.0 + x * x).powf(-(eta + 2.0))
                }
            }
            DensityKind::Tabulated(t) => t.eval(w),
            DensityKind::ChannelSum(ch) => ch.iter().map(|c| c.density.density(w - c.threshold)).sum(),
        };
        self.strength * v
    }

    pub fn supports_continuation(&self) -> bool {
        !self.is_tabulated()
    }

    /// Analytic continuation of the density off the positive real axis.
    /// For channel sums only the channels already open at `Re z` enter,
    /// which is the continuation reached by crossing the real axis at
    /// `Re z`.
    pub fn continued(&self, z: Complex64) -> Result<Complex64> {
        let v = match &self.kind {
            DensityKind::Hydrogen => {
                let x = z / self.cutoff;
                let q = Complex64::new(1.0, 0.0) + x * x;
                let q2 = q * q;
                x * self.cutoff / (q2 * q2)
            }
            DensityKind::PowerLaw { eta } => {
                let x = z / self.cutoff;
                let q = Complex64::new(1.0, 0.0) + x * x;
                x.powf(eta - 1.0) * q.powf(-(eta + 2.0)) * self.cutoff
            }
            DensityKind::Tabulated(_) => {
                return Err(DecayError::Unsupported(
                    "a tabulated density has no analytic continuation".into(),
                ))
            }
            DensityKind::ChannelSum(ch) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in ch {
                    let zc = z - c.threshold;
                    if zc.re > c.density.threshold() {
                        acc += c.density.continued(zc)?;
                    }
                }
                acc
            }
        };
        Ok(v * self.strength)
    }

    /// Golden-rule width 2 pi |phi(E)|^2.
    pub fn gamma_at(&self, e: f64) -> f64 {
        2.0 * PI * self.density(e)
    }

    /// Principal-value shift `P int d(w) / (E - w) dw` with the width at
    /// the same energy.
    pub fn delta_at(&self, e: f64) -> Result<ShiftValue> {
        self.delta_at_tol(e, default_tolerance())
    }

    pub fn delta_at_tol(&self, e: f64, tol: Tolerance) -> Result<ShiftValue> {
        if !e.is_finite() {
            return Err(DecayError::Domain(format!("energy must be finite, got {e}")));
        }
        let gamma = self.gamma_at(e);
        let thr = self.threshold();
        let de = self.density(e);
        let top = self.upper_support();
        let mut breaks: Vec<f64> = self.features().into_iter().filter(|&x| x.is_finite()).collect();
        let mut value = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        if de > 0.0 && e > thr {
            // subtract the density at the singular point
            let m = if top.is_finite() { top } else { thr + PV_TRUNCATION * self.cutoff };
            breaks.push(e);
            breaks.push(thr + 2.0 * (e - thr));
            breaks.push(thr + 0.5 * (e - thr));
            let mut pts: Vec<f64> = breaks.into_iter().filter(|&x| x >= thr && x <= m).collect();
            pts.push(thr);
            pts.push(m);
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let mut f = |w: f64| {
                if w == e {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new((self.density(w) - de) / (e - w), 0.0)
            };
            let r = quad::integrate_breaks(&mut f, &pts, tol)?;
            value += r.value;
            err += r.error;
            value += de * ((e - thr) / (m - e)).ln();
            if !top.is_finite() {
                let t = quad::integrate_to_infinity(
                    |w| Complex64::new(self.density(w) / (e - w), 0.0),
                    m,
                    m,
                    &[],
                    tol,
                )?;
                value += t.value;
                err += t.error;
            }
        } else {
            let r = real_axis_integral(self, |w| Complex64::new(1.0 / (e - w), 0.0), &[e], tol)?;
            value = r.value;
            err = r.error;
        }
        Ok(ShiftValue {
            e,
            delta: value.re,
            gamma,
            err_estimate: err,
        })
    }

    /// Total weight `int d(w) dw`, the squared coupling scale behind the
    /// Zeno time.
    pub fn second_moment(&self) -> Result<f64> {
        if self.strength == 0.0 {
            return Ok(0.0);
        }
        let v = match &self.kind {
            DensityKind::Hydrogen => self.cutoff * self.cutoff / 6.0,
            DensityKind::ChannelSum(ch) => {
                let mut acc = 0.0;
                for c in ch {
                    acc += c.density.second_moment()?;
                }
                acc
            }
            _ => {
                let unit = SpectralDensity {
                    strength: 1.0,
                    ..self.clone()
                };
                let r = real_axis_integral(&unit, |_| Complex64::new(1.0, 0.0), &[], default_tolerance())
                    .map_err(|e| DecayError::DivergentMoment(e.to_string()))?;
                if !r.value.re.is_finite() {
                    return Err(DecayError::DivergentMoment("integral is not finite".into()));
                }
                r.value.re
            }
        };
        Ok(self.strength * v)
    }

    /// Exponent eta of the threshold law `Gamma(E) ~ E^(eta-1)`.
    pub fn threshold_exponent(&self) -> Result<f64> {
        match &self.kind {
            DensityKind::Hydrogen => Ok(2.0),
            DensityKind::PowerLaw { eta } => Ok(*eta),
            DensityKind::Tabulated(t) => match t.eta {
                Some(e) => Ok(e),
                None => {
                    let pts: Vec<(f64, f64)> =
                        t.samples().filter(|&(w, v)| w > t.support().0 && v > 0.0).take(8).collect();
                    let shifted: Vec<(f64, f64)> = pts.iter().map(|&(w, v)| (w - t.support().0, v)).collect();
                    estimate_threshold_exponent(&shifted)
                }
            },
            DensityKind::ChannelSum(ch) => {
                let thr = self.threshold();
                let lowest: Vec<&Channel> = ch
                    .iter()
                    .filter(|c| c.threshold + c.density.threshold() == thr)
                    .collect();
                let mut eta = f64::INFINITY;
                for c in lowest {
                    eta = eta.min(c.density.threshold_exponent()?);
                }
                Ok(eta)
            }
        }
    }
}

/// Largest acceptable deviation of the log-log residuals from a line.
const ESTIMATOR_RESIDUAL: f64 = 0.05;

/// Threshold exponent from samples (E, density) close to threshold: one
/// plus the log-log regression slope.
pub fn estimate_threshold_exponent(samples: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(w, v)| *w > 0.0 && *v > 0.0)
        .map(|(w, v)| (w.ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(DecayError::RegimeNotReached(
            "need at least three positive samples to estimate eta".into(),
        ));
    }
    let (slope, intercept) = crate::fit::linear(&pts);
    let worst = pts
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    if worst > ESTIMATOR_RESIDUAL {
        return Err(DecayError::RegimeNotReached(format!(
            "threshold is not a power law (log residual {worst:.3})"
        )));
    }
    let eta = slope + 1.0;
    if eta <= 0.0 {
        return Err(DecayError::RegimeNotReached(format!("estimated eta {eta} is not positive")));
    }
    Ok(eta)
}

pub(crate) fn default_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-14,
        rel: 1e-12,
        max_intervals: 20_000,
    }
}

/// `int d(w) g(w) dw` over the support, with `extra` breakpoints.
pub(crate) fn real_axis_integral<G>(
    sd: &SpectralDensity,
    g: G,
    extra: &[f64],
    tol: Tolerance,
) -> Result<quad::Integral>
where
    G: Fn(f64) -> Complex64,
{
    let thr = sd.threshold();
    let top = sd.upper_support();
    let mut pts: Vec<f64> = sd
        .features()
        .into_iter()
        .chain(extra.iter().copied())
        .filter(|&x| x.is_finite() && x >= thr)
        .collect();
    let f = |w: f64| g(w) * sd.density(w);
    if top.is_finite() {
        pts.push(thr);
        pts.push(top);
        pts.retain(|&x| x <= top);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut f = f;
        quad::integrate_breaks(&mut f, &pts, tol)
    } else {
        let m = thr + 4.0 * sd.cutoff;
        pts.push(thr);
        pts.push(m);
        pts.retain(|&x| x <= m);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut f1 = f;
        let a = quad::integrate_breaks(&mut f1, &pts, tol)?;
        let b = quad::integrate_to_infinity(f, m, m, &[], tol)?;
        Ok(quad::Integral {
            value: a.value + b.value,
            error: a.error + b.error,
        })
    }
}
