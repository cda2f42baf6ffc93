//! Far-field behaviour of the radial integrals: endpoint data of the
//! amplitudes `R^{(0,1)}_±`, the leading `F_1 ~ r'^{-3}` and `F_0 ~ r'^{-4}`
//! terms, the `r^{-6}` energy-density law with its angular factor, and a
//! log-log power-law fitter.
//!
//! With `a = A + iB` and `E = e^{-ap}`:
//! `R^{(0)}_+ = e^{-iqp}/((a - iq)(1+q²)²)`, `R^{(0)}_- = -E/((a - iq)(1+q²)²)`,
//! `R^{(1)}_± = q R^{(0)}_±`.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use crate::error::{check_positive, Error, Result};
use crate::field::{field_unit, FieldScan};
use crate::oscillatory::{ibp_asymptotic, EndpointData, Parity};
use crate::special::{helicity_sign, vector_spherical_harmonic, AngularPoint};
use crate::units::{AtomParams, DimensionlessParams, MagneticNumber};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// Taylor order kept for the endpoint data.
const ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Leading far-field term with its power of `r'` and the validity flag `r' ≥ 20 max(1, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPrediction<T> {
    pub value: T,
    pub leading_power: i32,
    pub valid: bool,
}

pub fn far_field_valid(params: &DimensionlessParams) -> bool {
    params.r_prime >= 20.0 * params.p.max(1.0)
}

fn check_validity(params: &DimensionlessParams) -> bool {
    let ok = far_field_valid(params);
    if !ok {
        warn!(
            "r' = {} is below 20 max(1, p) = {}; the far-field form may be far off",
            params.r_prime,
            20.0 * params.p.max(1.0)
        );
    }
    ok
}

fn series_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
    for i in 0..a.len() {
        for j in 0..a.len() - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// Taylor coefficients of `R^{(0)}_±` at `q = 0`.
fn r0_taylor(branch: Branch, params: &DimensionlessParams) -> Vec<Complex64> {
    let a = params.a_complex();
    // 1/(a - iq) = (1/a) Σ (iq/a)^n
    let mut geom = Vec::with_capacity(ORDER);
    let mut t = 1.0 / a;
    for _ in 0..ORDER {
        geom.push(t);
        t *= I / a;
    }
    // (1+q²)^{-2} = Σ (-1)^k (k+1) q^{2k}
    let lorentz: Vec<Complex64> = (0..ORDER)
        .map(|n| {
            if n % 2 == 1 {
                Complex64::new(0.0, 0.0)
            } else {
                let k = n / 2;
                Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 } * (k + 1) as f64, 0.0)
            }
        })
        .collect();
    let phase: Vec<Complex64> = match branch {
        Branch::Plus => {
            let mut v = Vec::with_capacity(ORDER);
            let mut t = Complex64::new(1.0, 0.0);
            for n in 0..ORDER {
                v.push(t);
                t *= -I * params.p / (n + 1) as f64;
            }
            v
        }
        Branch::Minus => {
            let mut v = vec![Complex64::new(0.0, 0.0); ORDER];
            v[0] = -params.decay_factor();
            v
        }
    };
    series_mul(&series_mul(&phase, &geom), &lorentz)
}

/// Derivatives `R^{(n)}(0)`, `n = 0..4`, of `R^{(order)}_±`.
///
/// `R^{(0)}` carries the sine kernel and `R^{(1)}` the cosine kernel of the `F_1` integral.
pub fn r_endpoint_data(
    order: u8,
    branch: Branch,
    params: &DimensionlessParams,
) -> Result<EndpointData> {
    let c0 = r0_taylor(branch, params);
    let (coeffs, parity) = match order {
        0 => (c0, Parity::Sine),
        1 => {
            let mut c = vec![Complex64::new(0.0, 0.0)];
            c.extend_from_slice(&c0[..ORDER - 1]);
            (c, Parity::Cosine)
        }
        other => {
            return Err(Error::UnsupportedIndex {
                what: "R order",
                value: other as i32,
            })
        }
    };
    let mut fact = 1.0;
    let derivatives = coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| {
            if n > 0 {
                fact *= n as f64;
            }
            c * fact
        })
        .collect();
    EndpointData::new(derivatives, parity)
}

fn summed(order: u8, params: &DimensionlessParams, parity: Parity) -> Result<EndpointData> {
    let p = r_endpoint_data(order, Branch::Plus, params)?;
    let m = r_endpoint_data(order, Branch::Minus, params)?;
    EndpointData::new(
        p.derivatives
            .iter()
            .zip(&m.derivatives)
            .map(|(a, b)| a + b)
            .collect(),
        parity,
    )
}

/// The closed-form time function quoted with the far-field law:
/// `T = (1/a)(1 - E - 2ip + i(1 - E)/a)`.
pub fn time_function(params: &DimensionlessParams) -> Complex64 {
    let a = params.a_complex();
    let one_minus_e = 1.0 - params.decay_factor();
    (one_minus_e - 2.0 * I * params.p + I * one_minus_e / a) / a
}

/// `R^{(0)}_+(0) + R^{(0)}_-(0) + R^{(1)''}_+(0) + R^{(1)''}_-(0)` from the endpoint data.
///
/// This is the combination the closed-form time function claims to equal; with the
/// exact derivatives it reads `(1/a)(1 - E - 2ip + 2i(1 - E)/a)`.
pub fn time_function_from_endpoints(params: &DimensionlessParams) -> Result<Complex64> {
    let r0 = summed(0, params, Parity::Sine)?;
    let r1 = summed(1, params, Parity::Cosine)?;
    Ok(r0.derivatives[0] + r1.derivatives[2])
}

/// Leading coefficient `c` in `I_1 ~ c/r'^3`, from integration by parts of both kernels.
///
/// `I_1 = (1/r'²)∫R^{(0)} sin(qr') dq - (1/r')∫R^{(1)} cos(qr') dq`, so
/// `c = R^{(0)}(0) + R^{(1)'}(0) = 2(1 - E)/a`.
pub fn far_field_coefficient(params: &DimensionlessParams) -> Result<Complex64> {
    if params.p == 0.0 {
        // no photon yet; every endpoint value vanishes
        return Ok(Complex64::new(0.0, 0.0));
    }
    let sine = ibp_asymptotic(&summed(0, params, Parity::Sine)?, 1.0)?;
    let cosine = ibp_asymptotic(&summed(1, params, Parity::Cosine)?, 1.0)?;
    if sine.power != -1 || cosine.power != -2 {
        return Err(Error::FasterDecay {
            supplied: ORDER,
        });
    }
    Ok(sine.value - cosine.value)
}

/// `F̂_1 ~ -iλ · 2(1 - E)/(a r'³)` in scaled units.
pub fn f1_asymptotic(
    params: &DimensionlessParams,
    lambda: i32,
) -> Result<AsymptoticPrediction<Complex64>> {
    let sign = helicity_sign(lambda)?;
    let c = far_field_coefficient(params)?;
    Ok(AsymptoticPrediction {
        value: -I * sign * c / params.r_prime.powi(3),
        leading_power: -3,
        valid: check_validity(params),
    })
}

/// Physical `F_1` asymptote at distance `r` (m); `params.r_prime` is ignored.
pub fn f1_asymptotic_physical(
    atom: &AtomParams,
    params: &DimensionlessParams,
    r: f64,
    lambda: i32,
) -> Result<AsymptoticPrediction<Complex64>> {
    let scaled = params.with_r_prime(check_positive("r", r)? * atom.k_cut)?;
    let pred = f1_asymptotic(&scaled, lambda)?;
    Ok(AsymptoticPrediction {
        value: pred.value * field_unit(atom),
        ..pred
    })
}

/// `F̂_0 ~ √(2/3) · (-R^{(1)''}(0))/r'^4`.
pub fn f0_asymptotic(params: &DimensionlessParams) -> Result<AsymptoticPrediction<Complex64>> {
    let term = ibp_asymptotic(&summed(1, params, Parity::Sine)?, params.r_prime)?;
    Ok(AsymptoticPrediction {
        value: (2.0f64 / 3.0).sqrt() * term.value / params.r_prime,
        leading_power: term.power - 1,
        valid: check_validity(params),
    })
}

/// Angular distribution in the normalization quoted with the far-field law:
/// `γ_0 = sin²θ`, `γ_1 = (1/4)(1 + cos²θ)`.
pub fn gamma_angular(m_e_qn: i32, theta: f64) -> Result<f64> {
    let m = MagneticNumber::try_from(m_e_qn)?;
    let c = theta.cos();
    Ok(match m.abs() {
        0 => 1.0 - c * c,
        _ => 0.25 * (1.0 + c * c),
    })
}

/// `(8π/3) Y^{1*}_{1,m}·Y^1_{1,m}`: `sin²θ` for `m = 0`, `(1 + cos²θ)/2` for `|m| = 1`.
pub fn dipole_factor(m_e: MagneticNumber, theta: f64) -> f64 {
    let c = theta.cos();
    match m_e.abs() {
        0 => 1.0 - c * c,
        _ => 0.5 * (1.0 + c * c),
    }
}

/// Scaled far-field density `2|F̂_1|² Y^{1*}·Y^1` at `(r', θ)`.
pub fn energy_density_asymptotic_scaled(
    params: &DimensionlessParams,
    theta: f64,
    m_e: MagneticNumber,
) -> Result<AsymptoticPrediction<f64>> {
    AngularPoint::new(theta, 0.0)?;
    let f1 = f1_asymptotic(params, 1)?;
    Ok(AsymptoticPrediction {
        value: 2.0 * f1.value.norm_sqr() * 3.0 / (8.0 * PI) * dipole_factor(m_e, theta),
        leading_power: -6,
        valid: f1.valid,
    })
}

/// Physical far-field density in J/m³:
/// `(2/3)^{10} α⁵ m² c³ r_B⁴/(2π³ħ) · γ(θ) |2(1 - E)/a|² / r⁶`
/// with `γ` the dipole factor of [`dipole_factor`].
pub fn energy_density_asymptotic(
    atom: &AtomParams,
    params: &DimensionlessParams,
    r: f64,
    theta: f64,
) -> Result<AsymptoticPrediction<f64>> {
    AngularPoint::new(theta, 0.0)?;
    let scaled = params.with_r_prime(check_positive("r", r)? * atom.k_cut)?;
    let valid = check_validity(&scaled);
    let c = far_field_coefficient(&scaled)?;
    let prefactor = (2.0f64 / 3.0).powi(10) * atom.alpha.powi(5) * atom.m * atom.m * atom.c.powi(3)
        * atom.r_b.powi(4)
        / (2.0 * PI.powi(3) * atom.hbar);
    Ok(AsymptoticPrediction {
        value: prefactor * dipole_factor(atom.m_e_qn, theta) * c.norm_sqr() / r.powi(6),
        leading_power: -6,
        valid,
    })
}

/// `Y^{1*}_{1,m}·Y^1_{1,m}` evaluated from the vector harmonics.
pub fn dipole_dot(m_e: MagneticNumber, theta: f64, phi: f64) -> Result<f64> {
    let y = vector_spherical_harmonic(1, m_e.value(), AngularPoint::new(theta, phi)?)?;
    Ok(y.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub stderr: f64,
    /// Natural log of the prefactor.
    pub intercept: f64,
    pub used: usize,
    pub rejected: usize,
}

/// Unweighted least-squares slope of `ln y` against `ln x`.
///
/// Points with non-positive or non-finite values, or with error above 1% of the
/// value, are dropped; at least 8 points spanning two decades must remain.
pub fn fit_power_law(x: &[f64], y: &[f64], err: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() || x.len() != err.len() {
        return Err(Error::InsufficientData(format!(
            "mismatched lengths {} / {} / {}",
            x.len(),
            y.len(),
            err.len()
        )));
    }
    let keep: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .zip(err)
        .filter(|((x, y), e)| {
            **x > 0.0 && x.is_finite() && **y > 0.0 && y.is_finite() && **e <= 0.01 * **y
        })
        .map(|((x, y), _)| (x.ln(), y.ln()))
        .collect();
    let rejected = x.len() - keep.len();
    if keep.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "{} usable points, need 8 ({rejected} rejected)",
            keep.len()
        )));
    }
    let (lo, hi) = keep
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let decades = (hi - lo) / std::f64::consts::LN_10;
    if decades < 2.0 - 1e-12 {
        return Err(Error::InsufficientData(format!(
            "usable points span {decades:.2} decades, need 2"
        )));
    }
    let n = keep.len() as f64;
    let mx = keep.iter().map(|p| p.0).sum::<f64>() / n;
    let my = keep.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = keep.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = keep.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = keep
        .iter()
        .map(|p| {
            let r = p.1 - intercept - slope * p.0;
            r * r
        })
        .sum();
    Ok(PowerLawFit {
        exponent: slope,
        stderr: (rss / (n - 2.0) / sxx).sqrt(),
        intercept,
        used: keep.len(),
        rejected,
    })
}

/// Power-law fit of a radial scan's densities; failed points count as rejected.
pub fn fit_scan(scan: &FieldScan) -> Result<PowerLawFit> {
    let x: Vec<f64> = scan.samples.iter().map(|s| s.point.r).collect();
    let y: Vec<f64> = scan.samples.iter().map(|s| s.density).collect();
    let e: Vec<f64> = scan.samples.iter().map(|s| s.error).collect();
    fit_power_law(&x, &y, &e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64) -> DimensionlessParams {
        DimensionlessParams::new(0.05, 0.3, p, 1e3).unwrap()
    }

    #[test]
    fn endpoint_values() {
        let d = params(5.0);
        let a = d.a_complex();
        let r0p = r_endpoint_data(0, Branch::Plus, &d).unwrap();
        assert!((r0p.derivatives[0] * a - 1.0).norm() < 1e-15);
        let r1p = r_endpoint_data(1, Branch::Plus, &d).unwrap();
        let expect = 2.0 * (I / (a * a) - I * d.p / a);
        assert!((r1p.derivatives[2] - expect).norm() < 1e-13);
        let z = params(0.0);
        let s = r_endpoint_data(0, Branch::Plus, &z).unwrap().derivatives[0]
            + r_endpoint_data(0, Branch::Minus, &z).unwrap().derivatives[0];
        assert_eq!(s, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn coefficient_is_twice_r0() {
        let d = params(5.0);
        let c = far_field_coefficient(&d).unwrap();
        let expect = 2.0 * (1.0 - d.decay_factor()) / d.a_complex();
        assert!((c - expect).norm() < 1e-14 * expect.norm());
    }

    #[test]
    fn fitter_recovers_exact_power() {
        let x: Vec<f64> = (0..20).map(|i| 10f64.powf(1.0 + i as f64 * 0.15)).collect();
        let y: Vec<f64> = x.iter().map(|r| 3.0 * r.powi(-6)).collect();
        let fit = fit_power_law(&x, &y, &vec![0.0; 20]).unwrap();
        assert!((fit.exponent + 6.0).abs() < 1e-12);
        assert!(fit_power_law(&x[..5], &y[..5], &[0.0; 5]).is_err());
        assert!(fit_power_law(&x[..10], &y[..10], &[0.0; 10]).is_err());
    }
}
