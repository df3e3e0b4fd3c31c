use decay_web::{self_energy_rows, survival_rows, vanhove_rows};

#[test]
fn survival_starts_at_one_and_decays() {
    let r = survival_rows(0.01, "pole_cut", 5.0, 51).unwrap();
    assert_eq!(r.len(), 3 * 51);
    assert_eq!(r[1], 1.0);
    let last = &r[r.len() - 3..];
    assert!((last[0] - 5.0).abs() < 1e-12);
    // within the sup deviation from the exponential at this coupling, about 1e-2
    assert!((last[1] - last[2]).abs() < 1.1e-2, "{last:?}");
}

#[test]
fn engines_agree() {
    let a = survival_rows(0.05, "pole_cut", 3.0, 7).unwrap();
    let b = survival_rows(0.05, "spectral", 3.0, 7).unwrap();
    for (x, y) in a.chunks(3).zip(b.chunks(3)) {
        assert!((x[1] - y[1]).abs() < 1e-8);
    }
}

#[test]
fn self_energy_sheets_join_on_the_real_axis() {
    // above the threshold the second sheet continues the first from above
    let first = self_energy_rows(0.5, 2.0, 1e-9, 4, false).unwrap();
    let second = self_energy_rows(0.5, 2.0, -1e-9, 4, true).unwrap();
    for (a, b) in first.chunks(3).zip(second.chunks(3)) {
        assert!((a[1] - b[1]).abs() < 1e-6 && (a[2] - b[2]).abs() < 1e-6, "{a:?} {b:?}");
    }
    assert!(first.chunks(3).all(|r| r[2] < 0.0));
}

#[test]
fn curves_collapse_onto_the_exponential() {
    let r = vanhove_rows(&[0.03, 0.003], 3.0, 31).unwrap();
    let mut dev = [0.0f64; 2];
    for row in r.chunks(4) {
        for k in 0..2 {
            dev[k] = dev[k].max((row[1 + k] - row[3]).abs());
        }
    }
    assert!(dev[1] < dev[0] && dev[1] < 1e-2, "{dev:?}");
}

#[test]
fn bad_input_is_an_error() {
    assert!(survival_rows(0.05, "nope", 1.0, 3).is_err());
    assert!(self_energy_rows(1.0, 0.5, 0.0, 3, false).is_err());
    assert!(vanhove_rows(&[], 1.0, 3).is_err());
}
