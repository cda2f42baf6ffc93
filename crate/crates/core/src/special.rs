//! Spherical Bessel functions for L <= 2, Clebsch-Gordan coefficients,
//! vector spherical harmonics with J = 1 and the helicity eigenmodes built
//! from them. All vectors are Cartesian.

use std::f64::consts::PI;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

// Below this argument the Taylor series replaces the closed forms.
const SERIES_CUTOFF: f64 = 1.0;
const SERIES_TERMS: usize = 10;

pub fn spherical_bessel(l: i32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::OutOfRange {
            what: "spherical Bessel argument",
            value: x,
        });
    }
    match l {
        0 => Ok(sph_j0(x)),
        1 => Ok(sph_j1(x)),
        2 => Ok(sph_j2(x)),
        other => Err(Error::UnsupportedIndex {
            what: "L",
            value: other,
        }),
    }
}

fn series(l: usize, x: f64) -> f64 {
    // x^l/(2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
    let mut prefactor = 1.0;
    for n in 0..l {
        prefactor *= x / (2 * n + 3) as f64;
    }
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..SERIES_TERMS {
        term *= y / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
    }
    prefactor * sum
}

pub fn sph_j0(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        series(0, x)
    } else {
        x.sin() / x
    }
}

pub fn sph_j1(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        series(1, x)
    } else {
        let (s, c) = x.sin_cos();
        (s / x - c) / x
    }
}

pub fn sph_j2(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        series(2, x)
    } else {
        let (s, c) = x.sin_cos();
        ((3.0 / (x * x) - 1.0) * s - 3.0 * c / x) / x
    }
}

/// `j_2` through the recurrence `(3/x) j_1 - j_0`.
pub fn sph_j2_recombined(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        series(2, x)
    } else {
        3.0 * sph_j1(x) / x - sph_j0(x)
    }
}

/// `[j_0, j_1, j_2]` sharing one sine/cosine evaluation.
pub fn sph_j012(x: f64) -> [f64; 3] {
    if x < SERIES_CUTOFF {
        [series(0, x), series(1, x), series(2, x)]
    } else {
        let (s, c) = x.sin_cos();
        sph_j012_trig(x, s, c)
    }
}

/// `[j_0, j_1, j_2]` from caller-supplied `sin x`, `cos x`; the series is used below the cutoff.
pub(crate) fn sph_j012_trig(x: f64, s: f64, c: f64) -> [f64; 3] {
    if x < SERIES_CUTOFF {
        return [series(0, x), series(1, x), series(2, x)];
    }
    let inv = 1.0 / x;
    let j0 = s * inv;
    let j1 = (j0 - c) * inv;
    let j2 = ((3.0 * inv * inv - 1.0) * s - 3.0 * c * inv) * inv;
    [j0, j1, j2]
}

fn factorial(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `<j1 m1; j2 m2 | j m>` for integer angular momenta (Racah's formula).
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    if m1 + m2 != m
        || m1.abs() > j1
        || m2.abs() > j2
        || m.abs() > j
        || j < (j1 - j2).abs()
        || j > j1 + j2
    {
        return 0.0;
    }
    let delta = (factorial(j1 + j2 - j) * factorial(j1 - j2 + j) * factorial(-j1 + j2 + j)
        / factorial(j1 + j2 + j + 1))
    .sqrt();
    let pre = ((2 * j + 1) as f64
        * factorial(j + m)
        * factorial(j - m)
        * factorial(j1 - m1)
        * factorial(j1 + m1)
        * factorial(j2 - m2)
        * factorial(j2 + m2))
    .sqrt();
    let kmin = 0.max(j2 - j - m1).max(j1 - j + m2);
    let kmax = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign
            / (factorial(k)
                * factorial(j1 + j2 - j - k)
                * factorial(j1 - m1 - k)
                * factorial(j2 + m2 - k)
                * factorial(j - j2 + m1 + k)
                * factorial(j - j1 - m2 + k));
    }
    delta * pre * sum
}

/// Scalar spherical harmonic with the Condon-Shortley phase, `l <= 2`.
pub fn scalar_harmonic(l: i32, m: i32, pt: AngularPoint) -> Result<Complex64> {
    if !(0..=2).contains(&l) {
        return Err(Error::UnsupportedIndex {
            what: "l",
            value: l,
        });
    }
    if m.abs() > l {
        return Err(Error::UnsupportedIndex {
            what: "m",
            value: m,
        });
    }
    let (st, ct) = pt.theta.sin_cos();
    let mag = match (l, m.abs()) {
        (0, 0) => 0.5 / PI.sqrt(),
        (1, 0) => (3.0 / (4.0 * PI)).sqrt() * ct,
        (1, 1) => -(3.0 / (8.0 * PI)).sqrt() * st,
        (2, 0) => (5.0 / (16.0 * PI)).sqrt() * (3.0 * ct * ct - 1.0),
        (2, 1) => -(15.0 / (8.0 * PI)).sqrt() * st * ct,
        (2, 2) => (15.0 / (32.0 * PI)).sqrt() * st * st,
        _ => unreachable!(),
    };
    let positive = Complex64::from_polar(1.0, m.abs() as f64 * pt.phi) * mag;
    if m >= 0 {
        Ok(positive)
    } else if m % 2 == 0 {
        Ok(positive.conj())
    } else {
        Ok(-positive.conj())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularPoint {
    pub theta: f64,
    pub phi: f64,
}

impl AngularPoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfRange {
                what: "theta",
                value: theta,
            });
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::OutOfRange {
                what: "phi",
                value: phi,
            });
        }
        Ok(Self { theta, phi })
    }

    /// Direction of a Cartesian point; returns `(r, angles)`.
    pub fn from_cartesian(x: f64, y: f64, z: f64) -> (f64, Self) {
        let r = (x * x + y * y + z * z).sqrt();
        let theta = if r > 0.0 { (z / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
        let mut phi = y.atan2(x);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        (r, Self { theta, phi })
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexVector3(pub [Complex64; 3]);

impl ComplexVector3 {
    pub const ZERO: Self = Self([Complex64 { re: 0.0, im: 0.0 }; 3]);

    pub fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self([x, y, z])
    }

    pub fn real(v: [f64; 3]) -> Self {
        Self(v.map(|c| Complex64::new(c, 0.0)))
    }

    /// Hermitian product `self* . other`.
    pub fn hdot(&self, other: &Self) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Components `a_σ = e_σ* . a` for σ = +1, 0, -1, in that order.
    pub fn to_spherical_basis(&self) -> [Complex64; 3] {
        [1, 0, -1].map(|s| spherical_unit(s).hdot(self))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.map(|c| c * s))
    }
}

impl Add for ComplexVector3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for ComplexVector3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for ComplexVector3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

impl Mul<Complex64> for ComplexVector3 {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.scale(s)
    }
}

impl Mul<f64> for ComplexVector3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self(self.0.map(|c| c * s))
    }
}

impl Index<usize> for ComplexVector3 {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Spherical basis vector `e_σ`: `e_{±1} = ∓(x ± iy)/√2`, `e_0 = z`.
pub fn spherical_unit(sigma: i32) -> ComplexVector3 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match sigma {
        1 => ComplexVector3::new(Complex64::new(-s, 0.0), Complex64::new(0.0, -s), 0.0.into()),
        0 => ComplexVector3::real([0.0, 0.0, 1.0]),
        -1 => ComplexVector3::new(Complex64::new(s, 0.0), Complex64::new(0.0, -s), 0.0.into()),
        _ => panic!("spherical basis index must be -1, 0 or 1"),
    }
}

/// `Y^L_{1,M}(θ, φ)` in Cartesian components.
pub fn vector_spherical_harmonic(l: i32, m: i32, pt: AngularPoint) -> Result<ComplexVector3> {
    if !(0..=2).contains(&l) {
        return Err(Error::UnsupportedIndex {
            what: "L",
            value: l,
        });
    }
    if !(-1..=1).contains(&m) {
        return Err(Error::UnsupportedIndex {
            what: "M",
            value: m,
        });
    }
    let mut out = ComplexVector3::ZERO;
    for sigma in -1..=1 {
        let ml = m - sigma;
        if ml.abs() > l {
            continue;
        }
        let cg = clebsch_gordan(l, ml, 1, sigma, 1, m);
        if cg == 0.0 {
            continue;
        }
        let y = scalar_harmonic(l, ml, pt)?;
        out = out + spherical_unit(sigma) * (y * cg);
    }
    Ok(out)
}

/// Helicity eigenmode `ψ^{(λ)}_{k,1,M}` at `(r, θ, φ)`.
pub fn helicity_mode(k: f64, m: i32, lambda: i32, r: f64, pt: AngularPoint) -> Result<ComplexVector3> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::OutOfRange {
            what: "k",
            value: k,
        });
    }
    let lambda = helicity_sign(lambda)?;
    let j = sph_j012(k * r);
    let norm = (2.0 / PI).sqrt() * k;
    let psi = |l: usize| -> Result<ComplexVector3> {
        Ok(vector_spherical_harmonic(l as i32, m, pt)? * (norm * j[l]))
    };
    let combo = psi(0)? * (2.0f64 / 3.0).sqrt() - psi(2)? * (1.0f64 / 3.0).sqrt()
        + psi(1)? * (-I * lambda);
    Ok(combo * (I * std::f64::consts::FRAC_1_SQRT_2))
}

pub(crate) fn helicity_sign(lambda: i32) -> Result<f64> {
    match lambda {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        other => Err(Error::UnsupportedIndex {
            what: "helicity",
            value: other,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_limits() {
        assert_eq!(spherical_bessel(0, 0.0).unwrap(), 1.0);
        assert_eq!(spherical_bessel(1, 0.0).unwrap(), 0.0);
        assert!(spherical_bessel(0, PI).unwrap().abs() < 1e-16);
        for x in [1e-8, 1e-5, 1e-3] {
            assert!((sph_j1(x) / x - 1.0 / 3.0).abs() < x * x / 20.0 + 1e-16);
            assert!((sph_j2(x) / (x * x) - 1.0 / 15.0).abs() < 1e-6);
        }
        assert!(spherical_bessel(3, 1.0).is_err());
        assert!(spherical_bessel(0, -1.0).is_err());
    }

    #[test]
    fn recombined_j2_matches_closed_form() {
        for x in [1.0, 1.7, 5.0, 33.3, 1e3] {
            assert!((sph_j2(x) - sph_j2_recombined(x)).abs() < 1e-14);
            let all = sph_j012(x);
            for (a, b) in all.iter().zip([sph_j0(x), sph_j1(x), sph_j2(x)]) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn clebsch_gordan_known_values() {
        // <1 1; 1 -1 | 1 0> = 1/sqrt2, <2 0; 1 0 | 1 0> = -sqrt(2/5)
        assert!((clebsch_gordan(1, 1, 1, -1, 1, 0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((clebsch_gordan(2, 0, 1, 0, 1, 0) + (0.4f64).sqrt()).abs() < 1e-15);
        assert!((clebsch_gordan(0, 0, 1, 1, 1, 1) - 1.0).abs() < 1e-15);
        assert_eq!(clebsch_gordan(1, 1, 1, 1, 1, 1), 0.0);
        // orthogonality over m1
        for j in 1..=3 {
            let s: f64 = (-2..=2)
                .map(|m1| clebsch_gordan(2, m1, 1, 1 - m1, j, 1).powi(2))
                .sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn scalar_harmonics_conjugation() {
        let pt = AngularPoint::new(0.7, 2.1).unwrap();
        for l in 0..=2 {
            for m in 1..=l {
                let a = scalar_harmonic(l, -m, pt).unwrap();
                let b = scalar_harmonic(l, m, pt).unwrap().conj() * (-1f64).powi(m);
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn spherical_basis_round_trip() {
        let v = ComplexVector3::new(
            Complex64::new(0.3, -1.0),
            Complex64::new(2.0, 0.5),
            Complex64::new(-0.1, 0.2),
        );
        let comps = v.to_spherical_basis();
        let rebuilt = spherical_unit(1) * comps[0] + spherical_unit(0) * comps[1]
            + spherical_unit(-1) * comps[2];
        assert!((rebuilt - v).norm_sqr() < 1e-28);
    }

    #[test]
    fn helicity_flip_touches_only_l1() {
        let pt = AngularPoint::new(1.1, 0.4).unwrap();
        let a = helicity_mode(2.0, 1, 1, 0.8, pt).unwrap();
        let b = helicity_mode(2.0, 1, -1, 0.8, pt).unwrap();
        let j1 = sph_j1(1.6);
        let y1 = vector_spherical_harmonic(1, 1, pt).unwrap();
        // difference is 2 * (i/√2)(-i) ψ¹ = √2 ψ¹
        let psi1 = y1 * ((2.0 / PI).sqrt() * 2.0 * j1);
        let diff = a - b;
        assert!((diff - psi1 * 2f64.sqrt()).norm_sqr() < 1e-28);
        assert!(helicity_mode(0.0, 0, 1, 1.0, pt).is_err());
        assert!(helicity_mode(1.0, 0, 0, 1.0, pt).is_err());
    }
}
