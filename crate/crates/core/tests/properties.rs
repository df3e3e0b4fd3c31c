use approx::assert_relative_eq;
use decay_core::amplitude::*;
use decay_core::asymptotics::{lifetime, time_scales};
use decay_core::params::*;
use decay_core::selfenergy::*;
use decay_core::spectral::SpectralDensity;
use decay_core::Complex64;
use proptest::prelude::*;

fn hydrogen(lambda: f64) -> (ModelParams, SpectralDensity) {
    let p = hydrogen_params(PhysicalConstants::CODATA).with_lambda(lambda).unwrap();
    (p, SpectralDensity::hydrogen())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn probability_is_bounded(lambda in 1e-3f64..0.06, t in 0.0f64..50.0) {
        // the hydrogen resonance reaches the threshold near lambda = 0.0605
        let (p, h) = hydrogen(lambda);
        let tau = lifetime(&p, &h).unwrap();
        let s = amplitude_pole_cut(&p, &h, &TimeGrid::new(vec![t * tau]).unwrap()).unwrap();
        prop_assert!(s.probability[0] >= 0.0 && s.probability[0] <= 1.0 + 1e-9);
    }

    #[test]
    fn self_energy_is_herglotz(re in -3.0f64..3.0, im in 1e-4f64..3.0) {
        let h = SpectralDensity::hydrogen();
        let z = Complex64::new(re, im);
        let up = sigma2(&h, z, Sheet::First).unwrap().value;
        let down = sigma2(&h, z.conj(), Sheet::First).unwrap().value;
        prop_assert!(up.im < 0.0);
        prop_assert!((up.conj() - down).norm() <= 1e-12 * up.norm().max(1e-3));
    }

    #[test]
    fn closed_form_q_matches_quadrature(r in 0.01f64..10.0, phi in -1.5f64..1.5) {
        let s = Complex64::from_polar(r, phi);
        let a = q_closed(s).unwrap();
        let b = q_quadrature(s).unwrap();
        prop_assert!((a - b).norm() <= 1e-8 * b.norm());
    }

    #[test]
    fn unit_conversion_roundtrip(t in 0.0f64..1e-3) {
        let p = hydrogen_params(PhysicalConstants::CODATA);
        let back = p.from_internal(p.to_internal(t).unwrap());
        prop_assert!((back - t).abs() <= 4.0 * f64::EPSILON * t);
    }

    #[test]
    fn cutoff_ratio_is_alpha_over_four(alpha in 1e-3f64..9e-3, m in 1e19f64..1e22) {
        let c = PhysicalConstants::new(alpha, m).unwrap();
        let p = hydrogen_params(c);
        assert_relative_eq!(p.omega0 / p.cutoff, alpha / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn rescaled_lifetime_is_coupling_free(lambda in 1e-4f64..0.05) {
        let (p, h) = hydrogen(lambda);
        let (q, _) = hydrogen(0.01);
        let a = time_scales(&p, &h).unwrap().rescaled;
        let b = time_scales(&q, &h).unwrap().rescaled;
        assert_relative_eq!(a.tau_e, b.tau_e, max_relative = 1e-12);
        assert_relative_eq!(a.tau_z / lambda, b.tau_z / 0.01, max_relative = 1e-12);
    }
}
