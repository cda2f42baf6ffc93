use std::f64::consts::PI;

use lyman_core::quadrature::{adaptive, adaptive_to_infinity, Tolerance};
use lyman_core::solver::*;
use lyman_core::units::make_atom_params;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic() -> DecaySpectrum {
    DecaySpectrum::synthetic(0.05, 0.3).unwrap()
}

#[test]
fn d_closed_form_matches_time_quadrature() {
    let s = synthetic();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..20 {
        let omega = rng.gen_range(0.01..1.5);
        let t = rng.gen_range(0.0..60.0);
        let rho = s.rho_tilde(omega).unwrap();
        let integrand = |u: f64| {
            -Complex64::i() * rho * s.c0_weak(u) * Complex64::from_polar(1.0, -omega * (t - u))
        };
        let num = adaptive(integrand, 0.0, t, Tolerance::new(1e-15, 1e-13)).unwrap().value;
        let closed = s.photon_amplitude_d(omega, t).unwrap();
        assert!((num - closed).norm() < 1e-10 * closed.norm().max(1e-3), "ω={omega} t={t}");
    }
}

#[test]
fn d_vanishes_at_zero_time() {
    let s = synthetic();
    for omega in [0.0, 0.1, 0.3, 5.0] {
        assert_eq!(s.photon_amplitude_d(omega, 0.0).unwrap().norm(), 0.0);
    }
}

#[test]
fn late_time_line_is_lorentzian() {
    let s = synthetic();
    let t = 40.0 / s.gamma_a;
    for omega in [0.2, 0.28, 0.3, 0.31, 0.45] {
        let d = s.photon_amplitude_d(omega, t).unwrap().norm_sqr();
        let rho = s.rho_tilde(omega).unwrap();
        let del = s.omega_shifted - omega;
        let lorentz = rho * rho / (0.25 * s.gamma_a * s.gamma_a + del * del);
        assert!((d / lorentz - 1.0).abs() < 1e-8);
    }
}

#[test]
fn photon_norm_is_nondecreasing() {
    let s = synthetic();
    let mut last = 0.0;
    for i in 0..=25 {
        let t = i as f64 * 0.2 / s.gamma_a;
        let n = s.photon_norm(t).unwrap();
        assert!(n >= last - 1e-12, "t = {t}: {n} < {last}");
        last = n;
    }
}

#[test]
fn synthetic_weak_coupling_agreement() {
    // Γ_a/Ω_a ≈ 7e-3
    let s = DecaySpectrum::synthetic(0.001, 0.3).unwrap();
    assert!(s.gamma_a / s.omega_shifted <= 1e-2);
    for i in 0..=20 {
        let t = i as f64 * 0.25 / s.gamma_a;
        let exact = s.c0_exact(t).unwrap().norm();
        let weak = s.c0_weak(t).norm();
        assert!((exact / weak - 1.0).abs() < 0.05, "Γt = {}", s.tau(t));
    }
}

#[test]
fn synthetic_unitarity() {
    // the weak-coupling amplitudes only conserve norm when Γ_a ≪ Ω_a
    let s = DecaySpectrum::synthetic(0.001, 0.3).unwrap();
    for tau in [0.0, 1.0, 3.0, 5.0] {
        let n = s.norm_check(tau / s.gamma_a).unwrap();
        assert!((n - 1.0).abs() < 1e-2, "Γt = {tau}: {n}");
    }
}

#[test]
fn rates_and_densities_are_nonnegative() {
    let atom = make_atom_params(0).unwrap();
    let s = DecaySpectrum::hydrogen(&atom).unwrap();
    assert_eq!(s.gamma_of_omega(0.0).unwrap(), 0.0);
    for i in 0..1000 {
        let omega = s.omega_shifted * 3.0 * i as f64 / 999.0;
        assert!(s.gamma_of_omega(omega).unwrap() >= 0.0);
        assert!(s.spectral_density_g(omega).unwrap() >= 0.0);
    }
}

#[test]
fn lamb_shift_near_zero_frequency_needs_no_principal_value() {
    let atom = make_atom_params(0).unwrap();
    let s = DecaySpectrum::hydrogen(&atom).unwrap();
    let scale = atom.frequency_scale();
    let omega = 1e-7 * scale;
    let pv = s.lamb_shift_delta(omega).unwrap();
    // -∫ |ρ̃|²/ω_k dω_k, with the ω_k ≈ ω part removed by its own small size
    let plain = adaptive_to_infinity(
        |q: f64| {
            if q == 0.0 {
                return 0.0;
            }
            let w = q * scale;
            let r = s.rho_tilde(w).unwrap();
            -r * r / w * scale
        },
        0.0,
        Tolerance::new(0.0, 1e-12),
    )
    .unwrap()
    .value;
    assert!((pv / plain - 1.0).abs() < 1e-5, "pv {pv:e} plain {plain:e}");
}

#[test]
fn principal_value_window_robustness() {
    for q in [0.05, 0.3, 1.0, 3.0] {
        let a = principal_value(q, q / 2.0).unwrap();
        let b = principal_value(q, q / 4.0).unwrap();
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-2 * 5.0 * PI / 32.0));
    }
}

#[test]
fn hydrogen_peak_and_weak_coupling_limit() {
    let atom = make_atom_params(0).unwrap();
    let s = DecaySpectrum::hydrogen(&atom).unwrap();
    let peak = s.peak_omega().unwrap();
    assert!((peak - s.omega_shifted).abs() <= s.gamma_a);
    let w = s.c0_weak(0.0);
    assert_eq!(w, Complex64::new(1.0, 0.0));
    let dt = 1e-12;
    let phase = (s.c0_weak(dt) / s.c0_weak(0.0)).arg();
    let want = -(s.omega_shifted * dt).rem_euclid(2.0 * PI);
    let diff = (phase - want).rem_euclid(2.0 * PI);
    assert!(diff.min(2.0 * PI - diff) < 1e-9);
    for tau in [0.5, 2.0] {
        let t = tau / s.gamma_a;
        assert!((s.c0_weak(t).norm() - (-0.5 * tau).exp()).abs() < 1e-15);
        assert!(s.c0_exact(t).unwrap().norm() <= 1.0 + 1e-6);
    }
}

#[test]
fn cached_constants_rebuild_identical_spectrum() {
    let atom = make_atom_params(1).unwrap();
    let s = DecaySpectrum::hydrogen(&atom).unwrap();
    let again = DecaySpectrum::from_constants(s.model, s.gamma_a, s.delta_a).unwrap();
    assert_eq!(s.a(), again.a());
    assert_eq!(s.b(), again.b());
    let t = 1.0 / s.gamma_a;
    assert_eq!(s.c0_exact(t).unwrap(), again.c0_exact(t).unwrap());
}
