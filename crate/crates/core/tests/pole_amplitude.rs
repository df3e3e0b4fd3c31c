use decay_core::amplitude::*;
use decay_core::asymptotics::lifetime;
use decay_core::params::*;
use decay_core::pole::*;
use decay_core::selfenergy::*;
use decay_core::spectral::SpectralDensity;
use decay_core::Complex64;

fn hydrogen(lambda: f64) -> (ModelParams, SpectralDensity) {
    let p = hydrogen_params(PhysicalConstants::CODATA).with_lambda(lambda).unwrap();
    (p, SpectralDensity::hydrogen())
}

fn upper_rim(sd: &SpectralDensity, e: f64) -> Complex64 {
    sigma2(sd, Complex64::new(e, 0.0), Sheet::First).unwrap().value
}

#[test]
fn fourth_order_correction_is_sigma_prime_sigma() {
    let (p, h) = hydrogen(1e-3);
    let w0 = p.omega0_internal();
    let d = perturbative_pole(&p, &h, PoleOrder::Fourth).unwrap() - perturbative_pole(&p, &h, PoleOrder::Second).unwrap();
    // derivative by central differences along the upper rim
    let step = 1e-6;
    let ds = (upper_rim(&h, w0 + step) - upper_rim(&h, w0 - step)) / (2.0 * step);
    let want = p.lambda2() * p.lambda2() * ds * upper_rim(&h, w0);
    assert!((d - want).norm() < 1e-6 * want.norm(), "{d} vs {want}");
}

#[test]
fn scaled_pole_tends_to_boundary_value() {
    let h = SpectralDensity::hydrogen();
    let p0 = hydrogen_params(PhysicalConstants::CODATA);
    let target = upper_rim(&h, p0.omega0_internal());
    let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&l| {
            let p = p0.with_lambda(l).unwrap();
            (find_pole(&p, &h).unwrap().e_pole / p.lambda2() - target).norm() / target.norm()
        })
        .collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    assert!(errs[2] < 1e-5, "{errs:?}");
}

#[test]
fn desk_pole_is_the_grid_minimiser() {
    let (p, h) = hydrogen(0.05);
    let w0 = p.omega0_internal();
    let pole = find_pole(&p, &h).unwrap().e_pole;
    let n = 400;
    let (re0, re1) = (-w0, 0.5 * w0);
    let (im0, im1) = (-w0, -1e-3 * w0);
    let (dx, dy) = ((re1 - re0) / (n - 1) as f64, (im1 - im0) / (n - 1) as f64);
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let e = Complex64::new(re0 + dx * i as f64, im0 + dy * j as f64);
            let s = sigma2(&h, e + w0, Sheet::Second).unwrap().value;
            let r = (e - p.lambda2() * s).norm();
            if r < best.0 {
                best = (r, e);
            }
        }
    }
    let off = best.1 - pole;
    assert!(off.re.abs() <= dx && off.im.abs() <= dy, "grid {} vs pole {pole}", best.1);
}

#[test]
fn residue_phase_and_weight() {
    let (p, h) = hydrogen(0.802e-4);
    let d = find_pole(&p, &h).unwrap();
    let ratio = d.zeta / (std::f64::consts::PI * p.lambda2());
    assert!((ratio - 1.0).abs() < 0.1, "zeta / (pi l^2) = {ratio}");

    let (p0, _) = hydrogen(0.0);
    let z = find_pole(&p0, &h).unwrap().residue_phase();
    assert_eq!(z, (1.0, 0.0));

    let loss: Vec<f64> = [1e-3, 1e-4]
        .iter()
        .map(|&l| {
            let (q, _) = hydrogen(l);
            (1.0 - find_pole(&q, &h).unwrap().residue.norm()) / q.lambda2()
        })
        .collect();
    assert!((loss[1] / loss[0] - 1.0).abs() < 0.05, "{loss:?}");
}

#[test]
fn physical_lifetime_from_the_pole() {
    let (p, h) = hydrogen(0.802e-4);
    let d = find_pole(&p, &h).unwrap();
    let gamma0 = h.gamma_at(p.omega0_internal());
    assert!((d.gamma / p.lambda2() / gamma0 - 1.0).abs() < 1e-4);
    let p_si = hydrogen_params(PhysicalConstants::CODATA);
    let d_si = find_pole(&p_si, &h).unwrap();
    assert!((1.0 / p_si.rate_si(d_si.gamma) / 1.595e-9 - 1.0).abs() < 5e-3);
}

#[test]
fn zero_coupling_never_decays() {
    let (p, h) = hydrogen(0.0);
    let grid = TimeGrid::linear(0.0, 1e6, 11).unwrap();
    for engine in [Engine::Spectral, Engine::PoleCut, Engine::Volterra] {
        let s = survival(&p, &h, &grid, engine).unwrap();
        assert!(s.amplitude.iter().all(|a| *a == Complex64::new(1.0, 0.0)), "{engine:?}");
    }
}

#[test]
fn desk_decay_follows_the_pole() {
    let (p, h) = hydrogen(0.05);
    let pole = find_pole(&p, &h).unwrap();
    let tau = 1.0 / pole.gamma;
    let s = amplitude_spectral(&p, &h, &TimeGrid::new(vec![5.0 * tau]).unwrap()).unwrap();
    let want = (-5.0f64).exp() * pole.residue.norm_sqr();
    assert!((s.probability[0] / want - 1.0).abs() < 0.02, "{} vs {want}", s.probability[0]);
}

#[test]
fn pole_cut_matches_spectral() {
    let (p, h) = hydrogen(0.05);
    let tau = lifetime(&p, &h).unwrap();
    let grid = TimeGrid::log(0.1 * tau, 30.0 * tau, 120).unwrap();
    let a = amplitude_pole_cut(&p, &h, &grid).unwrap();
    let b = amplitude_spectral(&p, &h, &grid).unwrap();
    for (x, y) in a.probability.iter().zip(&b.probability) {
        assert!((x / y - 1.0).abs() < 1e-6, "{x} vs {y}");
    }
}

#[test]
fn volterra_matches_spectral_from_zero() {
    let (p, h) = hydrogen(0.05);
    let tau = lifetime(&p, &h).unwrap();
    let grid = TimeGrid::linear(0.0, 10.0 * tau, 41).unwrap();
    let a = amplitude_volterra(&p, &memory_kernel(&p, &h), &grid).unwrap();
    let b = amplitude_spectral(&p, &h, &grid).unwrap();
    for (x, y) in a.probability.iter().zip(&b.probability) {
        assert!((x / y - 1.0).abs() < 1e-6, "{x} vs {y}");
    }
}

#[test]
fn cut_decays_as_a_power() {
    let (p, h) = hydrogen(0.05);
    let tau = lifetime(&p, &h).unwrap();
    let grid = TimeGrid::log(45.0 * tau, 55.0 * tau, 11).unwrap();
    let cut = amplitude_pole_cut(&p, &h, &grid).unwrap().cut_part.unwrap();
    let pts: Vec<(f64, f64)> = grid.points().iter().zip(&cut).map(|(t, c)| (t.ln(), c.norm().ln())).collect();
    let (slope, _) = decay_core::fit::linear(&pts);
    assert!((slope / -2.0 - 1.0).abs() < 0.02, "slope {slope}");
}

/// `int_0^inf x (1 + x^2)^-4 e^{-i x t} dx` by composite Simpson on
/// `[0, 200]`; the tail is below 1e-14.
fn brute_force_transform(t: f64) -> Complex64 {
    let n = 2_000_000;
    let h = 200.0 / n as f64;
    let f = |x: f64| x / (1.0 + x * x).powi(4) * Complex64::new(0.0, -x * t).exp();
    let mut acc = f(0.0) + f(200.0);
    for k in 1..n {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn memory_kernel_values() {
    let (p, h) = hydrogen(0.05);
    let k = memory_kernel(&p, &h);
    let m = h.second_moment().unwrap();
    assert_eq!(k.sigma(0.0).unwrap(), Complex64::new(0.0, -m));
    for t in [0.1, 0.5, 2.0, 10.0, 100.0] {
        assert!(k.sigma(t).unwrap().norm() <= m);
    }
    let w0 = p.omega0_internal();
    let want = Complex64::new(0.0, -1.0) * Complex64::new(0.0, w0).exp() * brute_force_transform(1.0);
    let got = k.sigma(1.0).unwrap();
    assert!((got - want).norm() < 1e-8 * want.norm(), "{got} vs {want}");

    let markov = MemoryKernel::vanhove_constant(&p, &h).unwrap();
    assert!(markov.is_markovian());
    assert!(markov.sigma(1.0).is_err());
}

#[test]
fn vanhove_limit_curve() {
    let (p, h) = hydrogen(0.05);
    let g = h.gamma_at(p.omega0_internal());
    let s = amplitude_vanhove_limit(&p, &h, &TimeGrid::new(vec![0.0, 1.0 / g, 3.0 / g]).unwrap()).unwrap();
    assert_eq!(s.probability[0], 1.0);
    assert!((s.probability[1] - (-1.0f64).exp()).abs() < 1e-12);
    // golden-rule width 2 pi w0 up to (1 + (w0/L)^2)^-4
    let w0 = p.omega0_internal();
    assert!((s.probability[2] / (-2.0 * std::f64::consts::PI * w0 * 3.0 / g).exp() - 1.0).abs() < 1e-4);
}
