use dipolar_spin_core::couplings::*;
use dipolar_spin_core::crystal::*;
use dipolar_spin_core::error::Error;
use proptest::prelude::*;

fn model(n: usize, eps: f64) -> CouplingModel {
    CouplingModel::harmonic(&CrystalSpec::harmonic(n, eps)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn modes_are_orthonormal(n in 2usize..12) {
        let m = model(n, 0.1);
        let c = &m.spectrum.modes;
        let gram = c * c.transpose();
        for a in 0..n {
            for b in 0..n {
                let expect = if a == b { 1.0 } else { 0.0 };
                prop_assert!((gram[(a, b)] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn force_balance_and_reflection(n in 2usize..20) {
        let m = model(n, 0.1);
        prop_assert!(m.equilibrium.residual < 1e-10);
        let x = &m.equilibrium.positions;
        for i in 0..n {
            prop_assert!((x[i] + x[n - 1 - i]).abs() < 1e-9);
        }
        for mode in 0..n {
            let v = m.spectrum.mode(mode);
            let even = (0..n).all(|i| (v[i] - v[n - 1 - i]).abs() < 1e-8);
            let odd = (0..n).all(|i| (v[i] + v[n - 1 - i]).abs() < 1e-8);
            prop_assert!(even || odd, "mode {mode} of N = {n} has no parity");
        }
    }

    #[test]
    fn com_mode_decouples(n in 2usize..12, eps in 0.01f64..0.2) {
        let m = model(n, eps);
        // the lowest mode is the rigid translation at the trap frequency
        prop_assert!((m.spectrum.frequencies[0] - 1.0).abs() < 1e-9);
        for mode in 1..n {
            let s: f64 = m.spectrum.mode(mode).iter().sum();
            prop_assert!(s.abs() < 1e-8);
        }
        prop_assert!(m.spin_phonon.row(0).iter().all(|g| g.abs() < 1e-9));
    }

    #[test]
    fn couplings_are_symmetric(n in 2usize..8, omega in 0.2f64..6.0) {
        let m = model(n, 0.1);
        if let Ok(t) = m.total(omega, ResonanceGuard::PoleOnly) {
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(t.matrix[(i, j)], t.matrix[(j, i)]);
                }
            }
        }
    }

    #[test]
    fn ring_depends_on_minimum_image_only(n in 5usize..30, d in 1i64..15, shift in 0i64..40) {
        let spec = CrystalSpec::ring(n, 0.1, 100.0);
        let w = 0.5 * (ring_frequency(n, 1) + ring_frequency(n, 2));
        let d = d % n as i64;
        prop_assume!(d != 0);
        let a = ring_mediated_couplings(&spec, w, d, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
        let b = ring_mediated_couplings(&spec, w, n as i64 - d, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
        let c = ring_mediated_couplings(&spec, w, d + shift * n as i64, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
        prop_assert!((a - c).abs() <= 1e-12 * a.abs().max(1e-12));
        prop_assert_eq!(ring_bare_coupling(n, d), ring_bare_coupling(n, n as i64 - d));
    }
}

#[test]
fn lattice_constant_decreases_with_n() {
    let xi: Vec<f64> = (2..=30)
        .map(|n| solve_equilibrium(&CrystalSpec::harmonic(n, 0.1)).unwrap().xi.unwrap())
        .collect();
    assert!((xi[0] - 6f64.powf(0.2)).abs() < 1e-10);
    assert!(xi.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn force_balance_up_to_thirty() {
    for n in [25, 30] {
        let eq = solve_equilibrium(&CrystalSpec::harmonic(n, 0.1)).unwrap();
        assert!(eq.residual < 1e-10, "N = {n}: {}", eq.residual);
    }
}

#[test]
fn no_pole_at_com_frequency() {
    let m = model(3, 0.1);
    let below = m.mediated(1.0 - 1e-7, ResonanceGuard::PoleOnly).unwrap();
    let at = m.mediated(1.0, ResonanceGuard::PoleOnly).unwrap();
    let above = m.mediated(1.0 + 1e-7, ResonanceGuard::PoleOnly).unwrap();
    assert!((below - &at).amax() < 1e-5);
    assert!((above - &at).amax() < 1e-5);
}

#[test]
fn sign_flips_across_each_coupled_pole() {
    let m = model(3, 0.1);
    for mode in 1..3 {
        let wn = m.spectrum.frequencies[mode];
        let lo = m.mediated(wn - 1e-6, ResonanceGuard::PoleOnly).unwrap();
        let hi = m.mediated(wn + 1e-6, ResonanceGuard::PoleOnly).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let gg = m.spin_phonon[(mode, i)] * m.spin_phonon[(mode, j)];
                if i != j && gg.abs() > 1e-12 {
                    assert!(lo[(i, j)] * hi[(i, j)] < 0.0, "mode {mode} pair ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn high_frequency_tail_falls_as_inverse_square() {
    let m = model(4, 0.1);
    let w_max = m.spectrum.frequencies[3];
    let scaled = |w: f64| m.mediated(w, ResonanceGuard::PoleOnly).unwrap()[(0, 1)] * w * w;
    let a = scaled(w_max * 10.0);
    let b = scaled(w_max * 100.0);
    // omega^2 G1 = sum gg (1 + w_n^2/w^2 + ...)
    let limit: f64 = (0..4).map(|n| m.spin_phonon[(n, 0)] * m.spin_phonon[(n, 1)]).sum();
    assert!((b / limit - 1.0).abs() < 1e-3);
    assert!((a - b).abs() < 0.05 * b.abs());
}

#[test]
fn equal_coupling_point_of_three_molecules() {
    let m = model(3, 0.1);
    let t = m.total(2.977, ResonanceGuard::default()).unwrap().matrix;
    let g = [t[(0, 1)], t[(0, 2)], t[(1, 2)]];
    for a in g {
        assert!((a / 0.911 - 1.0).abs() < 0.01, "{a}");
    }
}

#[test]
fn guard_rejects_near_resonant_drive() {
    let m = model(3, 0.1);
    let wn = m.spectrum.frequencies[1];
    let err = m.total(wn + 0.01, ResonanceGuard::default()).unwrap_err();
    assert!(matches!(err, Error::ResonantDrive { mode: 1, .. }));
    assert!(m.total(wn + 0.01, ResonanceGuard::PoleOnly).is_ok());
}

#[test]
fn ring_gamma_independence() {
    let w = 0.5 * (ring_frequency(21, 9) + ring_frequency(21, 10));
    for d in 1..=10 {
        let a = ring_mediated_couplings(&CrystalSpec::ring(21, 0.1, 100.0), w, d, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
        let b = ring_mediated_couplings(&CrystalSpec::ring(21, 0.1, 1e4), w, d, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "d = {d}: {a} vs {b}");
    }
}
