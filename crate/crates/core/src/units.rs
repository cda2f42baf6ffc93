//! Physical constants, the two-level hydrogen data and the map to scaled
//! (dimensionless) variables used by all far-field numerics.
//!
//! Scaled variables: `A = Γ_a/(2cK)`, `B = (ω_a+Δ_a)/(cK)`, `p = cKt`,
//! `r' = Kr`, and wavenumbers are measured as `q = k/K`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{check_finite_nonneg, check_positive, Error, Result};

/// CODATA 2018 base constants. Every derived number in the crate flows from here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codata {
    pub alpha: f64,
    /// Electron mass, kg.
    pub m: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Vacuum permittivity, F/m.
    pub eps0: f64,
}

pub const CODATA_2018: Codata = Codata {
    alpha: 7.297_352_569_3e-3,
    m: 9.109_383_701_5e-31,
    c: 299_792_458.0,
    hbar: 1.054_571_817e-34,
    eps0: 8.854_187_812_8e-12,
};

/// Magnetic quantum number of the excited 2p state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MagneticNumber {
    Minus,
    Zero,
    Plus,
}

impl MagneticNumber {
    pub fn value(self) -> i32 {
        match self {
            MagneticNumber::Minus => -1,
            MagneticNumber::Zero => 0,
            MagneticNumber::Plus => 1,
        }
    }

    pub fn abs(self) -> u32 {
        self.value().unsigned_abs()
    }
}

impl TryFrom<i32> for MagneticNumber {
    type Error = Error;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            -1 => Ok(MagneticNumber::Minus),
            0 => Ok(MagneticNumber::Zero),
            1 => Ok(MagneticNumber::Plus),
            other => Err(Error::InvalidMagneticNumber(other)),
        }
    }
}

impl fmt::Display for MagneticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    pub alpha: f64,
    pub m: f64,
    pub c: f64,
    pub hbar: f64,
    pub eps0: f64,
    /// Bohr radius, m.
    pub r_b: f64,
    /// Momentum cutoff `K = 3/(2 r_B)`, 1/m.
    pub k_cut: f64,
    /// Bare 2p-1s angular frequency, rad/s.
    pub omega_a: f64,
    /// Ground energy, fixed at zero.
    pub e_g: f64,
    pub m_e_qn: MagneticNumber,
}

pub fn make_atom_params(m_e_qn: i32) -> Result<AtomParams> {
    Ok(AtomParams::from_codata(
        CODATA_2018,
        MagneticNumber::try_from(m_e_qn)?,
    ))
}

impl AtomParams {
    pub fn from_codata(k: Codata, m_e_qn: MagneticNumber) -> Self {
        let r_b = k.hbar / (k.alpha * k.m * k.c);
        let mc2 = k.m * k.c * k.c;
        Self {
            alpha: k.alpha,
            m: k.m,
            c: k.c,
            hbar: k.hbar,
            eps0: k.eps0,
            r_b,
            k_cut: 3.0 / (2.0 * r_b),
            // E_2 - E_1 = 3 alpha^2 m c^2 / 8
            omega_a: 3.0 * k.alpha * k.alpha * mc2 / (8.0 * k.hbar),
            e_g: 0.0,
            m_e_qn,
        }
    }

    pub fn with_m_e(self, m_e_qn: MagneticNumber) -> Self {
        Self { m_e_qn, ..self }
    }

    /// `cK`, the angular frequency corresponding to `q = 1`.
    pub fn frequency_scale(&self) -> f64 {
        self.c * self.k_cut
    }

    pub fn mc2(&self) -> f64 {
        self.m * self.c * self.c
    }

    pub fn ground_wavefunction(&self, r: f64) -> f64 {
        ground_wavefunction(self.r_b, r)
    }

    pub fn excited_wavefunction(&self, r: f64, theta: f64, phi: f64) -> Complex64 {
        excited_wavefunction_rb(self.r_b, r, theta, phi, self.m_e_qn)
    }

    pub fn to_dimensionless(
        &self,
        gamma_a: f64,
        delta_a: f64,
        t: f64,
        r: f64,
    ) -> Result<DimensionlessParams> {
        check_positive("gamma_a", gamma_a)?;
        let ck = self.frequency_scale();
        DimensionlessParams::new(
            gamma_a / (2.0 * ck),
            (self.omega_a + delta_a) / ck,
            check_finite_nonneg("t", t)? * ck,
            check_positive("r", r)? * self.k_cut,
        )
    }

    pub fn to_physical(&self, d: &DimensionlessParams) -> PhysicalInputs {
        let ck = self.frequency_scale();
        PhysicalInputs {
            gamma_a: 2.0 * ck * d.a,
            delta_a: ck * d.b - self.omega_a,
            t: d.p / ck,
            r: d.r_prime / self.k_cut,
        }
    }
}

/// The physical quantities behind a [`DimensionlessParams`] value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalInputs {
    pub gamma_a: f64,
    pub delta_a: f64,
    pub t: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub r_prime: f64,
}

impl DimensionlessParams {
    pub fn new(a: f64, b: f64, p: f64, r_prime: f64) -> Result<Self> {
        Ok(Self {
            a: check_positive("A", a)?,
            b: check_positive("B", b)?,
            p: check_finite_nonneg("p", p)?,
            r_prime: check_positive("r'", r_prime)?,
        })
    }

    /// `A + iB`.
    pub fn a_complex(&self) -> Complex64 {
        Complex64::new(self.a, self.b)
    }

    /// `e^{-(A+iB)p}`, the scaled excited-state amplitude at time p.
    pub fn decay_factor(&self) -> Complex64 {
        (-self.a_complex() * self.p).exp()
    }

    pub fn with_r_prime(self, r_prime: f64) -> Result<Self> {
        Self::new(self.a, self.b, self.p, r_prime)
    }
}

pub fn ground_wavefunction(r_b: f64, r: f64) -> f64 {
    (PI * r_b.powi(3)).powf(-0.5) * (-r / r_b).exp()
}

/// Angular factor `β_m(θ, φ)` of the 2p state.
pub fn beta(r_b: f64, theta: f64, phi: f64, m_e_qn: MagneticNumber) -> Complex64 {
    let vol = r_b.powi(3);
    match m_e_qn {
        MagneticNumber::Zero => Complex64::new(theta.cos() / (4.0 * (2.0 * PI * vol).sqrt()), 0.0),
        MagneticNumber::Plus => {
            -Complex64::from_polar(theta.sin() / (8.0 * (PI * vol).sqrt()), phi)
        }
        MagneticNumber::Minus => {
            Complex64::from_polar(theta.sin() / (8.0 * (PI * vol).sqrt()), -phi)
        }
    }
}

pub fn excited_wavefunction(
    params: &AtomParams,
    r: f64,
    theta: f64,
    phi: f64,
    m_e_qn: i32,
) -> Result<Complex64> {
    let m = MagneticNumber::try_from(m_e_qn)?;
    Ok(excited_wavefunction_rb(params.r_b, r, theta, phi, m))
}

fn excited_wavefunction_rb(
    r_b: f64,
    r: f64,
    theta: f64,
    phi: f64,
    m: MagneticNumber,
) -> Complex64 {
    let x = r / r_b;
    beta(r_b, theta, phi, m) * (x * (-0.5 * x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{adaptive_to_infinity, composite_gauss, gauss_legendre, Tolerance};

    #[test]
    fn derived_scales() {
        let p = make_atom_params(0).unwrap();
        assert_eq!(p.e_g, 0.0);
        let ratio = p.omega_a / p.frequency_scale();
        assert!((ratio / (p.alpha / 4.0) - 1.0).abs() < 1e-14);
        assert!((p.k_cut * p.r_b - 1.5).abs() < 1e-15);
        assert!(make_atom_params(2).is_err());
        assert!(make_atom_params(-2).is_err());
    }

    #[test]
    fn ground_state_norm() {
        let p = make_atom_params(0).unwrap();
        let rb = p.r_b;
        let norm = adaptive_to_infinity(
            |x: f64| {
                let r = x * rb;
                4.0 * PI * r * r * p.ground_wavefunction(r).powi(2) * rb
            },
            0.0,
            Tolerance::default(),
        )
        .unwrap();
        assert!((norm.value - 1.0).abs() < 1e-9);
        assert_eq!(p.ground_wavefunction(0.0), (PI * rb.powi(3)).powf(-0.5));
    }

    #[test]
    fn excited_state_norms() {
        let rule = gauss_legendre(24);
        for m in [-1, 0, 1] {
            let p = make_atom_params(m).unwrap();
            let rb = p.r_b;
            let radial = |x: f64| x * x * (x * (-0.5 * x).exp()).powi(2);
            let rad = adaptive_to_infinity(radial, 0.0, Tolerance::default())
                .unwrap()
                .value;
            // angular part of |β|^2 r_B^3 over the sphere; φ-independent
            let ang = composite_gauss(
                |th: f64| {
                    2.0 * PI * th.sin() * beta(rb, th, 0.3, p.m_e_qn).norm_sqr() * rb.powi(3)
                },
                0.0,
                PI,
                4,
                &rule,
            );
            assert!((rad * ang - 1.0).abs() < 1e-9, "m={m}: {}", rad * ang);
        }
        let p = make_atom_params(0).unwrap();
        let v = p.excited_wavefunction(p.r_b, PI / 2.0, 1.0).norm();
        assert!(v < 1e-15 * p.r_b.powf(-1.5));
        let p = make_atom_params(1).unwrap();
        assert_eq!(p.excited_wavefunction(p.r_b, 0.0, 1.0).norm(), 0.0);
    }

    #[test]
    fn dimensionless_round_trip() {
        let p = make_atom_params(0).unwrap();
        let ck = p.frequency_scale();
        let d = p.to_dimensionless(2.0 * ck * 0.05, -2.7e10, 0.0, 1e-9).unwrap();
        assert_eq!(d.p, 0.0);
        assert!((d.a - 0.05).abs() < 1e-16);
        let back = p.to_physical(&d);
        assert!((back.gamma_a / (2.0 * ck * 0.05) - 1.0).abs() < 1e-12);
        // the shift only enters through omega_a + delta_a
        let shifted = p.omega_a - 2.7e10;
        assert!(((p.omega_a + back.delta_a) / shifted - 1.0).abs() < 1e-12);
        assert!((back.r / 1e-9 - 1.0).abs() < 1e-12);
        let d2 = p.to_dimensionless(back.gamma_a, back.delta_a, back.t, back.r).unwrap();
        assert!((d2.b / d.b - 1.0).abs() < 1e-12);
        assert!(p.to_dimensionless(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(p.to_dimensionless(1.0, 0.0, -1.0, 1.0).is_err());
    }
}
