//! Second-order self-energy `Sigma(z) = int d(w) / (z - w) dw` on the
//! physical sheet and its continuation through the continuum cut.
//!
//! For the hydrogen weight the integral is known in closed form through
//! `Q(s)`, with `Sigma(E) = -i L Q(-i E / L)`. A real energy inside the
//! continuum is read as the upper-rim value `E + i0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};
use crate::quad::{self, Tolerance};
use crate::spectral::{default_tolerance, SpectralDensity, PV_TRUNCATION};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Radius around `s = +-1` inside which the closed form is replaced by
/// direct quadrature.
pub const REMOVABLE_RADIUS: f64 = 0.05;

/// Relative step of the finite-difference derivative on quadrature paths.
pub const DERIVATIVE_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sheet {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergyValue {
    pub e: Complex64,
    pub value: Complex64,
    pub sheet: Sheet,
    pub method: Method,
    pub err_estimate: f64,
}

fn numerator(s: Complex64, log_s: Complex64) -> Complex64 {
    let pi = PI;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    // Horner in s for the polynomial part
    let coeffs = [
        c(0.0, -15.0 * pi),
        c(-88.0, 48.0 * pi),
        c(0.0, -45.0 * pi),
        c(144.0, 0.0),
        c(0.0, 15.0 * pi),
        c(-72.0, 0.0),
        c(0.0, -3.0 * pi),
        c(16.0, 0.0),
    ];
    let mut p = Complex64::new(0.0, 0.0);
    for k in coeffs.iter().rev() {
        p = p * s + k;
    }
    p - 96.0 * s * log_s
}

fn numerator_derivative(s: Complex64, log_s: Complex64) -> Complex64 {
    let pi = PI;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let coeffs = [
        c(-88.0, 48.0 * pi),
        c(0.0, -90.0 * pi),
        c(432.0, 0.0),
        c(0.0, 60.0 * pi),
        c(-360.0, 0.0),
        c(0.0, -18.0 * pi),
        c(112.0, 0.0),
    ];
    let mut p = Complex64::new(0.0, 0.0);
    for k in coeffs.iter().rev() {
        p = p * s + k;
    }
    p - 96.0 * (log_s + 1.0)
}

fn q_from_log(s: Complex64, log_s: Complex64) -> Complex64 {
    if s == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, -5.0 * PI / 32.0);
    }
    let d = s * s - 1.0;
    let d2 = d * d;
    numerator(s, log_s) / (96.0 * d2 * d2)
}

fn dq_from_log(s: Complex64, log_s: Complex64) -> Complex64 {
    let d = s * s - 1.0;
    let d2 = d * d;
    (numerator_derivative(s, log_s) * d - 8.0 * s * numerator(s, log_s)) / (96.0 * d2 * d2 * d)
}

/// `-i int_0^inf x (1+x^2)^-4 / (x - i s) dx` by adaptive quadrature. This
/// is `Q(s)` wherever the integral converges, i.e. off the negative
/// imaginary axis.
pub fn q_quadrature(s: Complex64) -> Result<Complex64> {
    if s.re == 0.0 && s.im <= 0.0 {
        return Err(DecayError::Domain(format!("integral representation undefined at s = {s}")));
    }
    let z = I * s;
    let v = hydrogen_first_sheet_quadrature(z, 1.0)?;
    // Sigma(is) = -i Q(s)  =>  Q(s) = i Sigma(is)
    Ok(I * v.value)
}

/// Closed form of `Q(s)` with the principal branch of `log s`.
pub fn q_closed(s: Complex64) -> Result<Complex64> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(DecayError::Domain(format!("non-finite argument {s}")));
    }
    if s.im == 0.0 && s.re < 0.0 {
        return Err(DecayError::Domain(format!("s = {s} lies on the branch cut of log s")));
    }
    if (s - 1.0).norm() < REMOVABLE_RADIUS {
        return q_quadrature(s);
    }
    if (s + 1.0).norm() < REMOVABLE_RADIUS {
        let v = q_quadrature(s)?;
        if s.im > 0.0 {
            return Ok(v);
        }
        // the principal log jumps by 2 pi i relative to the integral
        let d = s * s - 1.0;
        let d2 = d * d;
        return Ok(v + 2.0 * PI * I * s / (d2 * d2));
    }
    Ok(q_from_log(s, s.ln()))
}

/// `log s` with the cut on the negative imaginary axis, arg in [-pi/2, 3pi/2).
fn log_rotated(s: Complex64) -> Complex64 {
    let mut arg = s.im.atan2(s.re);
    // decide by the sign of Re s: atan2 rounds a tiny Re s < 0 onto the cut
    if s.re < 0.0 && arg < 0.0 {
        arg += 2.0 * PI;
    }
    Complex64::new(s.norm().ln(), arg)
}

fn hydrogen_first_sheet_quadrature(z: Complex64, cutoff: f64) -> Result<SelfEnergyValue> {
    let sd = SpectralDensity {
        cutoff,
        ..SpectralDensity::hydrogen()
    };
    let (value, err) = first_sheet_quadrature(&sd, z, default_tolerance())?;
    Ok(SelfEnergyValue {
        e: z,
        value,
        sheet: Sheet::First,
        method: Method::Quadrature,
        err_estimate: err,
    })
}

fn hydrogen_first_sheet(sd: &SpectralDensity, z: Complex64) -> Result<(Complex64, Method, f64)> {
    let l = sd.cutoff;
    let s = -I * z / l;
    if (s - 1.0).norm() < REMOVABLE_RADIUS || (s + 1.0).norm() < REMOVABLE_RADIUS {
        let (v, e) = first_sheet_quadrature(sd, z, default_tolerance())?;
        return Ok((v, Method::Quadrature, e));
    }
    let q = q_from_log(s, log_rotated(s));
    Ok((-I * l * q * sd.strength, Method::ClosedForm, 0.0))
}

fn hydrogen_first_sheet_derivative(sd: &SpectralDensity, z: Complex64) -> Result<Complex64> {
    let l = sd.cutoff;
    let s = -I * z / l;
    if (s - 1.0).norm() < REMOVABLE_RADIUS || (s + 1.0).norm() < REMOVABLE_RADIUS {
        // z is far from the real axis here, so the squared kernel is benign
        let r = crate::spectral::real_axis_integral(
            sd,
            |w| {
                let d = z - w;
                -(d * d).inv()
            },
            &[],
            default_tolerance(),
        )?;
        return Ok(r.value);
    }
    Ok(-dq_from_log(s, log_rotated(s)) * sd.strength)
}

/// First-sheet value by quadrature. Whenever `Re z` lies inside the
/// continuum the density at `Re z` is subtracted and its contribution
/// added back through the logarithm, so the integrand stays bounded as
/// `Im z -> 0`.
fn first_sheet_quadrature(sd: &SpectralDensity, z: Complex64, tol: Tolerance) -> Result<(Complex64, f64)> {
    let thr = sd.threshold();
    let top = sd.upper_support();
    let x0 = z.re;
    let d0 = if z.im.abs() < 0.5 * sd.cutoff { sd.density(x0) } else { 0.0 };
    let m = if top.is_finite() { top } else { thr + PV_TRUNCATION * sd.cutoff };
    let mut pts: Vec<f64> = sd.features().into_iter().filter(|x| x.is_finite()).collect();
    if x0 > thr && x0 < m {
        pts.push(x0);
        let gap = z.im.abs().max(1e-3 * (x0 - thr));
        for k in [-4.0, -1.0, 1.0, 4.0] {
            pts.push(x0 + k * gap);
        }
        pts.push(thr + 0.5 * (x0 - thr));
        pts.push(thr + 2.0 * (x0 - thr));
    }
    pts.push(thr);
    pts.push(m);
    pts.retain(|&x| x >= thr && x <= m);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut f = |w: f64| {
        let dz = z - w;
        if dz == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        (sd.density(w) - d0) / dz
    };
    let r = quad::integrate_breaks(&mut f, &pts, tol)?;
    let mut value = r.value;
    let mut err = r.error;
    if d0 != 0.0 {
        // int_thr^m dw / (z - w), upper rim when z is real
        let zz = if z.im == 0.0 { Complex64::new(z.re, 0.0) } else { z };
        let a = (zz - thr).ln();
        let b = if z.im == 0.0 {
            Complex64::new((m - z.re).ln(), PI)
        } else {
            (zz - m).ln()
        };
        value += d0 * (a - b);
    }
    if !top.is_finite() {
        let t = quad::integrate_to_infinity(|w| sd.density(w) / (z - w), m, m, &[], tol)?;
        value += t.value;
        err += t.error;
    }
    Ok((value, err))
}

fn first_sheet(sd: &SpectralDensity, z: Complex64) -> Result<(Complex64, Method, f64)> {
    match &sd.kind {
        crate::spectral::DensityKind::Hydrogen => hydrogen_first_sheet(sd, z),
        crate::spectral::DensityKind::ChannelSum(ch) if ch.iter().all(|c| c.density.is_hydrogen()) => {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut method = Method::ClosedForm;
            let mut err = 0.0;
            for c in ch {
                let (v, m, e) = hydrogen_first_sheet(&c.density, z - c.threshold)?;
                acc += v;
                err += e;
                if m == Method::Quadrature {
                    method = m;
                }
            }
            Ok((acc * sd.strength, method, err))
        }
        _ => {
            let (v, e) = first_sheet_quadrature(sd, z, default_tolerance())?;
            Ok((v, Method::Quadrature, e))
        }
    }
}

fn check_domain(sd: &SpectralDensity, z: Complex64, sheet: Sheet) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(DecayError::Domain(format!("non-finite energy {z}")));
    }
    if sheet == Sheet::Second {
        if z.im > 0.0 {
            return Err(DecayError::Domain(format!(
                "second sheet is reached from below the real axis; got Im E = {}",
                z.im
            )));
        }
        if !sd.supports_continuation() {
            return Err(DecayError::Unsupported("second sheet of a tabulated density".into()));
        }
    }
    Ok(())
}

/// `Sigma(z)` on the requested sheet. The second sheet is the
/// continuation downward through the cut at `Re z`; on the real axis both
/// sheets return the upper-rim value.
pub fn sigma2(sd: &SpectralDensity, z: Complex64, sheet: Sheet) -> Result<SelfEnergyValue> {
    check_domain(sd, z, sheet)?;
    let (mut value, method, err) = first_sheet(sd, z)?;
    if sheet == Sheet::Second && z.im < 0.0 {
        value -= 2.0 * PI * I * sd.continued(z)?;
    }
    Ok(SelfEnergyValue {
        e: z,
        value,
        sheet,
        method,
        err_estimate: err,
    })
}

fn has_closed_form(sd: &SpectralDensity) -> bool {
    match &sd.kind {
        crate::spectral::DensityKind::Hydrogen => true,
        crate::spectral::DensityKind::ChannelSum(ch) => ch.iter().all(|c| c.density.is_hydrogen()),
        _ => false,
    }
}

/// `d Sigma / dz` on the requested sheet: analytic for hydrogen, Richardson
/// extrapolated central differences otherwise.
pub fn sigma2_derivative(sd: &SpectralDensity, z: Complex64, sheet: Sheet) -> Result<Complex64> {
    check_domain(sd, z, sheet)?;
    let mut first = if has_closed_form(sd) {
        match &sd.kind {
            crate::spectral::DensityKind::ChannelSum(ch) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in ch {
                    acc += hydrogen_first_sheet_derivative(&c.density, z - c.threshold)?;
                }
                acc * sd.strength
            }
            _ => hydrogen_first_sheet_derivative(sd, z)?,
        }
    } else {
        let h = DERIVATIVE_STEP * (z - sd.threshold()).norm().max(1e-6 * sd.cutoff);
        let f = |dz: f64| first_sheet(sd, z + dz).map(|v| v.0);
        let d1 = (f(h)? - f(-h)?) / (2.0 * h);
        let d2 = (f(0.5 * h)? - f(-0.5 * h)?) / h;
        (4.0 * d2 - d1) / 3.0
    };
    if sheet == Sheet::Second && z.im < 0.0 {
        first -= 2.0 * PI * I * continued_derivative(sd, z)?;
    }
    Ok(first)
}

/// Derivative of the continued density.
fn continued_derivative(sd: &SpectralDensity, z: Complex64) -> Result<Complex64> {
    use crate::spectral::DensityKind;
    let v = match &sd.kind {
        DensityKind::Hydrogen => {
            let x = z / sd.cutoff;
            let q = 1.0 + x * x;
            let q2 = q * q;
            // d/dx [x q^-4] = q^-4 - 8 x^2 q^-5
            (q - 8.0 * x * x) / (q2 * q2 * q)
        }
        DensityKind::PowerLaw { eta } => {
            let x = z / sd.cutoff;
            let q = 1.0 + x * x;
            x.powf(eta - 2.0) * q.powf(-(eta + 3.0)) * ((eta - 1.0) * q - 2.0 * (eta + 2.0) * x * x)
        }
        DensityKind::Tabulated(_) => {
            return Err(DecayError::Unsupported("tabulated density has no continuation".into()))
        }
        DensityKind::ChannelSum(ch) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in ch {
                let zc = z - c.threshold;
                if zc.re > c.density.threshold() {
                    acc += continued_derivative(&c.density, zc)?;
                }
            }
            acc
        }
    };
    Ok(v * sd.strength)
}

#[cfg(test)]
mod tests {
    use super::*;

    const W0: f64 = 7.297_352_569_3e-3 / 4.0;

    #[test]
    fn q_at_origin() {
        let q = q_closed(Complex64::new(1e-6, 0.0)).unwrap();
        assert!((q - Complex64::new(0.0, -5.0 * PI / 32.0)).norm() < 1e-4);
        let q0 = q_quadrature(Complex64::new(1e-6, 0.0)).unwrap();
        assert!((q - q0).norm() < 1e-10);
    }

    #[test]
    fn q_at_two() {
        let s = Complex64::new(2.0, 0.0);
        let a = q_closed(s).unwrap();
        let b = q_quadrature(s).unwrap();
        assert!((a - b).norm() < 1e-10 * b.norm(), "{a} {b}");
    }

    #[test]
    fn q_rejects_cut() {
        assert!(q_closed(Complex64::new(-2.0, 0.0)).is_err());
    }

    #[test]
    fn q_near_removable_points() {
        for s in [Complex64::new(1.01, 0.02), Complex64::new(-1.0, 0.03)] {
            let a = q_closed(s).unwrap();
            let b = q_quadrature(s).unwrap();
            assert!((a - b).norm() < 1e-10 * b.norm());
        }
    }

    #[test]
    fn sign_matches_definition() {
        let h = SpectralDensity::hydrogen();
        for z in [Complex64::new(0.3, 0.2), Complex64::new(-0.7, 1.3), Complex64::new(2.0, -0.5)] {
            let c = sigma2(&h, z, Sheet::First).unwrap().value;
            let (q, _) = first_sheet_quadrature(&h, z, default_tolerance()).unwrap();
            assert!((c - q).norm() < 1e-10 * q.norm(), "{z}: {c} vs {q}");
        }
        let up = sigma2(&h, Complex64::new(W0, 0.0), Sheet::First).unwrap().value;
        assert!(up.im < 0.0);
    }

    #[test]
    fn upper_rim_boundary_value() {
        let h = SpectralDensity::hydrogen();
        let v = sigma2(&h, Complex64::new(W0, 0.0), Sheet::First).unwrap().value;
        let s = h.delta_at(W0).unwrap();
        assert!((v.re - s.delta).abs() < 1e-9);
        assert!((v.im + 0.5 * s.gamma).abs() < 1e-12);
    }

    #[test]
    fn below_threshold_is_real() {
        let h = SpectralDensity::hydrogen();
        let v = sigma2(&h, Complex64::new(-1.0, 0.0), Sheet::First).unwrap().value;
        assert!(v.im.abs() < 1e-14);
        let d = sigma2_derivative(&h, Complex64::new(-1.0, 0.0), Sheet::First).unwrap();
        assert!(d.im.abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_differences() {
        let h = SpectralDensity::hydrogen();
        let z = Complex64::new(W0, 0.0);
        let d = sigma2_derivative(&h, z, Sheet::First).unwrap();
        let step = 1e-5 * W0;
        let f = |x: f64| sigma2(&h, Complex64::new(x, 0.0), Sheet::First).unwrap().value;
        let fd = (f(W0 + step) - f(W0 - step)) / (2.0 * step);
        assert!((d - fd).norm() < 1e-6 * d.norm());
        let d4 = sigma2_derivative(&h.scaled(4.0), z, Sheet::First).unwrap();
        assert!((d4 - 4.0 * d).norm() < 1e-14 * d.norm());
    }

    #[test]
    fn quadrature_path_derivative() {
        let p = SpectralDensity::power_law(2.0, 1.0).unwrap();
        let h = SpectralDensity::hydrogen();
        let z = Complex64::new(0.2, -0.05);
        let a = sigma2_derivative(&p, z, Sheet::Second).unwrap();
        let b = sigma2_derivative(&h, z, Sheet::Second).unwrap();
        assert!((a - b).norm() < 1e-6 * b.norm(), "{a} {b}");
    }

    #[test]
    fn sheets_join_across_cut() {
        let h = SpectralDensity::hydrogen();
        let gap = |eps: f64| {
            let below = sigma2(&h, Complex64::new(W0, -eps), Sheet::Second).unwrap().value;
            let above = sigma2(&h, Complex64::new(W0, eps), Sheet::First).unwrap().value;
            below - above
        };
        let g: Vec<Complex64> = [1e-2, 1e-3, 1e-4, 1e-5].iter().map(|&e| gap(e)).collect();
        assert!(g[0].norm() > g[1].norm() && g[1].norm() > g[2].norm());
        // the mismatch is odd in eps; w0 bounds the Taylor radius, so only
        // the two smallest offsets take part in removing the linear term
        let extrapolated = (10.0 * g[3] - g[2]) / 9.0;
        assert!(extrapolated.norm() < 1e-6, "{extrapolated}");
    }

    #[test]
    fn second_sheet_rejects_upper_half_plane() {
        let h = SpectralDensity::hydrogen();
        assert!(sigma2(&h, Complex64::new(0.1, 0.1), Sheet::Second).is_err());
    }
}
