use std::f64::consts::PI;

use lyman_core::asymptotics::f1_asymptotic;
use lyman_core::field::*;
use lyman_core::quadrature::{adaptive, Tolerance};
use lyman_core::solver::DecaySpectrum;
use lyman_core::special::{sph_j012, vector_spherical_harmonic, AngularPoint, ComplexVector3};
use lyman_core::units::{make_atom_params, MagneticNumber};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic() -> DecaySpectrum {
    DecaySpectrum::synthetic(0.05, 0.3).unwrap()
}

fn harmonics(m: MagneticNumber, pt: AngularPoint) -> [ComplexVector3; 3] {
    [0, 1, 2].map(|l| vector_spherical_harmonic(l, m.value(), pt).unwrap())
}

#[test]
fn zero_time_gives_zero_density_everywhere() {
    let s = synthetic();
    let ev = FieldEvaluator::new(&s, MagneticNumber::Plus);
    for r in [0.5, 7.0, 300.0] {
        let pt = FieldPoint::dimensionless(r, 1.0, 2.0, 0.0).unwrap();
        assert_eq!(ev.energy_density(&pt).unwrap(), 0.0);
        assert_eq!(ev.helicity_field(&pt, 1).unwrap(), ComplexVector3::ZERO);
    }
}

#[test]
fn helicity_sum_drops_interference() {
    let s = synthetic();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..12 {
        let m = MagneticNumber::try_from(rng.gen_range(-1..=1)).unwrap();
        let ev = FieldEvaluator::new(&s, m);
        let pt = FieldPoint::dimensionless(
            rng.gen_range(0.5..60.0),
            rng.gen_range(0.0..PI),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.1..20.0),
        )
        .unwrap();
        let full = ev.energy_density(&pt).unwrap();
        let f = ev.compute_fl(&pt, 1).unwrap().f;
        let y = harmonics(m, pt.angles());
        let even = (y[0] * f[0] + y[2] * f[2]).norm_sqr();
        let odd = (y[1] * f[1]).norm_sqr();
        let split = 2.0 * (even + odd);
        assert!((full - split).abs() <= 1e-9 * full, "{full} vs {split}");
        assert!(full >= 0.0);
    }
}

#[test]
fn helicity_flip_negates_only_f1() {
    let s = synthetic();
    let ev = FieldEvaluator::new(&s, MagneticNumber::Zero);
    let pt = FieldPoint::dimensionless(12.0, 0.7, 0.1, 4.0).unwrap();
    let plus = ev.compute_fl(&pt, 1).unwrap().f;
    let minus = ev.compute_fl(&pt, -1).unwrap().f;
    assert_eq!(plus[0], minus[0]);
    assert_eq!(plus[1], -minus[1]);
    assert_eq!(plus[2], minus[2]);
    assert!(ev.compute_fl(&pt, 0).is_err());
}

#[test]
fn density_is_independent_of_azimuth() {
    let s = synthetic();
    for m in [MagneticNumber::Minus, MagneticNumber::Zero, MagneticNumber::Plus] {
        let ev = FieldEvaluator::new(&s, m);
        let base = ev
            .energy_density(&FieldPoint::dimensionless(9.0, 1.2, 0.0, 3.0).unwrap())
            .unwrap();
        for i in 1..8 {
            let phi = 2.0 * PI * i as f64 / 8.0;
            let d = ev
                .energy_density(&FieldPoint::dimensionless(9.0, 1.2, phi, 3.0).unwrap())
                .unwrap();
            assert!((d / base - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn j2_routes_agree() {
    let s = synthetic();
    for (r, p) in [(0.3, 1.0), (5.0, 5.0), (80.0, 5.0), (1e3, 5.0), (20.0, 60.0)] {
        let params = s.dimensionless(p, r).unwrap();
        let direct = radial_integrals(&params, J2Route::Direct, 1e-12).unwrap();
        let recombined = radial_integrals(&params, J2Route::Recombined, 1e-12).unwrap();
        let scale = direct.values[2].norm();
        assert!(
            (direct.values[2] - recombined.values[2]).norm() <= 1e-9 * scale,
            "r'={r} p={p}"
        );
    }
}

#[test]
fn single_point_scans_match_direct_evaluation() {
    let s = synthetic();
    let ev = FieldEvaluator::new(&s, MagneticNumber::Plus);
    let pt = FieldPoint::dimensionless(40.0, 0.9, 0.0, 5.0).unwrap();
    let direct = ev.energy_density(&pt).unwrap();
    let radial = ev.radial_scan(&[40.0], 0.9, 0.0, 5.0, FieldMode::Dimensionless).unwrap();
    let angular = ev.angular_scan(&[0.9], 40.0, 0.0, 5.0, FieldMode::Dimensionless).unwrap();
    assert_eq!(radial.samples[0].density, direct);
    assert_eq!(angular.samples[0].density, direct);
    assert_eq!(radial.failures(), 0);
    assert!(ev.radial_scan(&[], 0.9, 0.0, 5.0, FieldMode::Dimensionless).is_err());
}

#[test]
fn scans_are_nonnegative() {
    let s = synthetic();
    let ev = FieldEvaluator::new(&s, MagneticNumber::Zero);
    let rs: Vec<f64> = (0..30).map(|i| 10f64.powf(-0.5 + i as f64 * 0.1)).collect();
    let scan = ev.radial_scan(&rs, 0.4, 0.0, 5.0, FieldMode::Dimensionless).unwrap();
    assert!(scan.samples.iter().all(|x| x.density >= 0.0 && x.failure.is_none()));
}

#[test]
fn photon_amplitude_change_of_variables() {
    let atom = make_atom_params(0).unwrap();
    let s = DecaySpectrum::hydrogen(&atom).unwrap();
    let ev = FieldEvaluator::new(&s, MagneticNumber::Zero);
    let t = 2.0 / s.gamma_a;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let k = rng.gen_range(0.5..1.5) * s.omega_shifted / atom.c;
        let d = ev.d_k_amplitude(k, t).unwrap();
        let big_d = s.photon_amplitude_d(atom.c * k, t).unwrap();
        // |d_k|² dk = |D_ω|² dω with dω = c dk
        assert!((d.norm_sqr() / (atom.c * big_d.norm_sqr()) - 1.0).abs() < 1e-14);
    }
    assert_eq!(ev.d_k_amplitude(1e6, 0.0).unwrap().norm(), 0.0);
    assert!(ev.d_k_amplitude(0.0, t).is_err());
}

/// `(1 - e^{-w})/w` for complex `w`.
fn phi1(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 2..8 {
            term = -term * w / n as f64;
            sum += term;
        }
        sum
    } else {
        (1.0 - (-w).exp()) / w
    }
}

/// `F_L` by direct k integration of `k^{3/2} d_k j_L(kr)` in SI units.
fn k_space_fl(s: &DecaySpectrum, r: f64, t: f64, lambda: f64) -> [Complex64; 3] {
    let atom = s.model.atom.unwrap();
    let c = atom.c;
    let kk = atom.k_cut;
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for l in 0..3 {
        let integrand = |q: f64| {
            if q == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let k = q * kk;
            let omega = c * k;
            let z = Complex64::new(0.5 * s.gamma_a, s.omega_shifted - omega);
            // D = -i ρ̃ e^{-iωt} (1 - e^{-zt})/z
            let big_d = -Complex64::i()
                * s.rho_tilde(omega).unwrap()
                * Complex64::from_polar(1.0, -omega * t)
                * t
                * phi1(z * t);
            let d_k = c.sqrt() * big_d;
            k.powf(1.5) * d_k * sph_j012(k * r)[l] * kk
        };
        let tol = Tolerance { abs: 0.0, rel: 1e-11, max_intervals: 50000 };
        let head = adaptive(integrand, 0.0, 2.0, tol).unwrap().value;
        // the integrand falls as q^-4, so q > 2e4 is below 1e-12 of the total
        let mut tail = Complex64::new(0.0, 0.0);
        for i in 0..100 {
            let a = 2.0 + 200.0 * i as f64;
            tail += adaptive(integrand, a, a + 200.0, tol).unwrap().value;
        }
        out[l] = head + tail;
    }
    let pref = [
        Complex64::i() * (c / (3.0 * PI)).sqrt(),
        Complex64::new(lambda * (c / (2.0 * PI)).sqrt(), 0.0),
        -Complex64::i() * (c / (6.0 * PI)).sqrt(),
    ];
    [0, 1, 2].map(|l| pref[l] * out[l])
}

#[test]
fn physical_units_match_k_space_oracle() {
    let atom = make_atom_params(1).unwrap();
    let s = DecaySpectrum::hydrogen(&atom).unwrap();
    let ev = FieldEvaluator::for_spectrum(&s);
    let ck = atom.frequency_scale();
    let t = 5.0 / ck;
    for r_prime in [0.7, 3.0, 11.0] {
        let r = r_prime / atom.k_cut;
        let pt = FieldPoint::physical(r, 0.8, 0.3, t).unwrap();
        for lambda in [1, -1] {
            let got = ev.compute_fl(&pt, lambda).unwrap().f;
            let want = k_space_fl(&s, r, t, lambda as f64);
            for l in 0..3 {
                let rel = (got[l] - want[l]).norm() / want[l].norm();
                assert!(rel < 1e-9, "r'={r_prime} L={l}: {} vs {} ({rel:e})", got[l], want[l]);
            }
        }
        // physical density is ħ C₁² times the scaled one
        let scaled = FieldPoint::dimensionless(r_prime, 0.8, 0.3, 5.0).unwrap();
        let c1 = field_unit(&atom);
        let phys = ev.energy_density(&pt).unwrap();
        let dimless = ev.energy_density(&scaled).unwrap();
        assert!((phys / (atom.hbar * c1 * c1 * dimless) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn scaled_spectrum_has_no_physical_units() {
    let s = synthetic();
    let ev = FieldEvaluator::for_spectrum(&s);
    let pt = FieldPoint::physical(1e-9, 0.5, 0.0, 1e-15).unwrap();
    assert!(ev.energy_density(&pt).is_err());
}

#[test]
fn far_field_f1_matches_asymptote() {
    let s = synthetic();
    let params = s.dimensionless(5.0, 1e3).unwrap();
    let f = radial_integrals(&params, J2Route::Direct, 1e-12).unwrap().scaled_fl(1.0);
    let asym = f1_asymptotic(&params, 1).unwrap();
    assert!(asym.valid);
    let ratio = f[1] / asym.value;
    assert!((ratio - 1.0).norm() < 0.05, "ratio {ratio}");
}

#[test]
fn far_field_hierarchy() {
    // F₀ ~ r'^-4 falls behind F₁ ~ r'^-3; F₂ stays comparable because the
    // 3 sin(x)/x³ part of j₂ contributes at the same order as j₁:
    // |F₂/F₁| → (3π/4)/√3
    let s = synthetic();
    let mut last = f64::INFINITY;
    for r in [1e3, 1e4, 1e5] {
        let params = s.dimensionless(5.0, r).unwrap();
        let f = radial_integrals(&params, J2Route::Direct, 1e-12).unwrap().scaled_fl(1.0);
        let r0 = f[0].norm() / f[1].norm();
        assert!(r0 < last / 5.0);
        last = r0;
        let r2 = f[2].norm() / f[1].norm();
        assert!((r2 - 0.75 * PI / 3f64.sqrt()).abs() < 0.01, "r'={r}: |F2/F1| = {r2}");
    }
}

#[test]
#[ignore = "known red: |F2/F1| tends to a constant, see far_field_hierarchy"]
fn f2_decays_faster_than_f1() {
    let s = synthetic();
    let ratio = |r: f64| {
        let params = s.dimensionless(5.0, r).unwrap();
        let f = radial_integrals(&params, J2Route::Direct, 1e-12).unwrap().scaled_fl(1.0);
        f[2].norm() / f[1].norm()
    };
    assert!(ratio(1e5) < 0.5 * ratio(1e3));
}

#[test]
#[ignore = "known red: the far field keeps an F2 share, so the density is not |F1|² alone"]
fn far_field_density_is_f1_only() {
    let s = synthetic();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..5 {
        let m = MagneticNumber::try_from(rng.gen_range(-1..=1)).unwrap();
        let ev = FieldEvaluator::new(&s, m);
        let pt = FieldPoint::dimensionless(
            rng.gen_range(1e3..1e4),
            rng.gen_range(0.2..PI - 0.2),
            0.0,
            5.0,
        )
        .unwrap();
        let density = ev.energy_density(&pt).unwrap();
        let f1 = ev.compute_fl(&pt, 1).unwrap().f[1];
        let y1 = vector_spherical_harmonic(1, m.value(), pt.angles()).unwrap();
        let model = 2.0 * f1.norm_sqr() * y1.norm_sqr();
        assert!((density / model - 1.0).abs() < 0.1);
    }
}
