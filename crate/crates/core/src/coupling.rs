//! The atom-field coupling `ρ(k)`, its frequency-normalized form `ρ̃(ω)` and a
//! slow direct-overlap oracle for `|ρ(k)|`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_finite_nonneg, Error, Result};
use crate::quadrature::gauss_legendre;
use crate::special::{helicity_mode, AngularPoint, ComplexVector3};
use crate::units::AtomParams;

/// Shape of the scaled decay rate: `s(q) = q/(1+q²)⁴`.
pub fn rate_shape(q: f64) -> f64 {
    let d = 1.0 + q * q;
    let d2 = d * d;
    q / (d2 * d2)
}

/// `Γ(ω)/(cK) = G s(q)` for hydrogen, with `G = (16/9)(2/3)⁷ α³`.
pub fn hydrogen_rate_strength(alpha: f64) -> f64 {
    16.0 / 9.0 * (2.0f64 / 3.0).powi(7) * alpha.powi(3)
}

#[derive(Debug, Clone, Copy)]
pub struct CouplingFunction {
    pub params: AtomParams,
}

impl CouplingFunction {
    pub fn new(params: AtomParams) -> Self {
        Self { params }
    }

    /// `ρ(k)` in J m^{1/2}.
    pub fn rho(&self, k: f64) -> Result<f64> {
        let k = check_finite_nonneg("k", k)?;
        if k == 0.0 {
            return Ok(0.0);
        }
        let p = &self.params;
        let q = k / p.k_cut;
        let d = 1.0 + q * q;
        Ok((2.0f64 / 3.0).powf(3.5) * (p.alpha.powi(5) / PI).sqrt() * p.mc2() * q
            / k.sqrt()
            / (d * d))
    }

    /// Coefficient for the mode `(J, M)`; zero unless `J = 1` and `M = m_e`.
    pub fn rho_mode(&self, k: f64, j: i32, m: i32) -> Result<f64> {
        if j == 1 && m == self.params.m_e_qn.value() {
            self.rho(k)
        } else {
            check_finite_nonneg("k", k)?;
            Ok(0.0)
        }
    }

    /// `ρ̃(ω) = √(2/(cħ²)) ρ(ω/c)`, in (rad/s)^{1/2}.
    pub fn rho_tilde(&self, omega: f64) -> Result<f64> {
        let omega = check_finite_nonneg("omega", omega)?;
        let p = &self.params;
        Ok((2.0 / p.c).sqrt() / p.hbar * self.rho(omega / p.c)?)
    }

    /// `2π ρ̃(ω)²`.
    pub fn gamma(&self, omega: f64) -> Result<f64> {
        let r = self.rho_tilde(omega)?;
        Ok(2.0 * PI * r * r)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OverlapReport {
    /// `|⟨g; ψ| p·A |e⟩|` in J m^{1/2}.
    pub magnitude: f64,
    pub rho: f64,
    /// `magnitude / rho`; NaN when the mode is forbidden.
    pub ratio: f64,
    /// Difference between two radial resolutions, same units as `magnitude`.
    pub error_estimate: f64,
}

/// Direct evaluation of the overlap defining `ρ(k)` for the mode `(J=1, M=mode_m, λ)`.
///
/// Works in Bohr units: `|ρ| = α² m c² √(2πα/k) |∫ d³X φ_g ψ*·∇φ_e|`.
pub fn coupling_overlap_oracle(
    params: &AtomParams,
    k: f64,
    lambda: i32,
    mode_m: i32,
) -> Result<OverlapReport> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::OutOfRange { what: "k", value: k });
    }
    crate::special::helicity_sign(lambda)?;
    let kappa = k * params.r_b;
    let coarse = overlap_integral(kappa, lambda, mode_m, params, 20)?;
    let fine = overlap_integral(kappa, lambda, mode_m, params, 40)?;
    let scale = params.alpha.powi(2) * params.mc2() * (2.0 * PI * params.alpha / k).sqrt();
    let magnitude = scale * fine.norm();
    let error_estimate = scale * (fine - coarse).norm();
    let rho = CouplingFunction::new(*params).rho(k)?;
    if error_estimate > 1e-8 * magnitude.max(1e-10 * scale) {
        return Err(Error::NonConvergence {
            context: format!("overlap oracle at k r_B = {kappa}"),
            partial: Complex64::new(magnitude, 0.0),
            estimate: error_estimate,
            panels: 40,
        });
    }
    Ok(OverlapReport {
        magnitude,
        rho,
        ratio: if mode_m == params.m_e_qn.value() {
            magnitude / rho
        } else {
            f64::NAN
        },
        error_estimate,
    })
}

/// Gradient of the scaled 2p wavefunction at Cartesian `x` (Bohr units).
fn excited_gradient(m: i32, x: [f64; 3]) -> ComplexVector3 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let (c, u) = match m {
        0 => (
            1.0 / (4.0 * (2.0 * PI).sqrt()),
            [0.0.into(), 0.0.into(), Complex64::new(1.0, 0.0)],
        ),
        1 => (
            1.0 / (8.0 * PI.sqrt()),
            [Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0), 0.0.into()],
        ),
        _ => (
            1.0 / (8.0 * PI.sqrt()),
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), 0.0.into()],
        ),
    };
    let u_dot_x = u[0] * x[0] + u[1] * x[1] + u[2] * x[2];
    let e = c * (-0.5 * r).exp();
    let inv = if r > 0.0 { 0.5 / r } else { 0.0 };
    ComplexVector3([0, 1, 2].map(|i| (u[i] - u_dot_x * x[i] * inv) * e))
}

fn overlap_integral(
    kappa: f64,
    lambda: i32,
    mode_m: i32,
    params: &AtomParams,
    radial_panels: usize,
) -> Result<Complex64> {
    const R_MAX: f64 = 40.0;
    let m_e = params.m_e_qn.value();
    let radial = gauss_legendre(16);
    let polar = gauss_legendre(24);
    let n_phi = 16;
    let h = R_MAX / radial_panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for panel in 0..radial_panels {
        let c = (panel as f64 + 0.5) * h;
        for (xr, wr) in radial.0.iter().zip(&radial.1) {
            let r = c + 0.5 * h * xr;
            let wr = 0.5 * h * wr * r * r * (-r).exp() / PI.sqrt();
            for (xt, wt) in polar.0.iter().zip(&polar.1) {
                let theta = 0.5 * PI * (1.0 + xt);
                let wt = 0.5 * PI * wt * theta.sin();
                for j in 0..n_phi {
                    let phi = 2.0 * PI * j as f64 / n_phi as f64;
                    let pt = AngularPoint { theta, phi };
                    let n = pt.unit_vector();
                    let x = [r * n[0], r * n[1], r * n[2]];
                    let mode = helicity_mode(kappa, mode_m, lambda, r, pt)?;
                    let grad = excited_gradient(m_e, x);
                    total += mode.hdot(&grad) * (wr * wt * 2.0 * PI / n_phi as f64);
                }
            }
        }
    }
    Ok(total)
}
