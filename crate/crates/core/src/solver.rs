//! Decay of the excited state: rate `Γ(ω)`, principal-value shift `Δ(ω)`,
//! spectral density `g(ω)`, exact and weak-coupling `c₀(t)`, the photon
//! amplitude `D_ω(t)` and norm bookkeeping.
//!
//! Everything runs on the scaled frequency `q = ω/scale`, where `scale = cK`
//! for hydrogen and `1` for the synthetic presets (whose times are then
//! already the scaled time `p`). In scaled units `Γ/scale = G s(q)` with
//! `s(q) = q/(1+q²)⁴`. Spectral integrals use the peak-centred variable
//! `ω = Ω_a + Γ_a x`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::coupling::{hydrogen_rate_strength, rate_shape, CouplingFunction};
use crate::error::{check_finite_nonneg, check_positive, Error, Result};
use crate::interp::PiecewiseChebyshev;
use crate::oscillatory::{fourier_integral_from, OscillatoryOptions};
use crate::quadrature::{
    adaptive, adaptive_to_infinity_scaled, CompensatedSum, Tolerance, WG, WGK, XGK,
};
use crate::units::{AtomParams, DimensionlessParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Half-width of the peak-centred window, in units of `Γ_a`.
pub const DEFAULT_WINDOW: f64 = 1e4;
/// Largest `Γ_a t` the cached window grid resolves.
pub const DEFAULT_TAU_MAX: f64 = 6.0;
/// Required agreement between the two principal-value windows.
pub const PV_WINDOW_TOLERANCE: f64 = 1e-8;
/// `∫_0^∞ s(q)/q dq`.
pub const SHAPE_OVER_Q: f64 = 5.0 * PI / 32.0;

fn pv_tol() -> Tolerance {
    Tolerance {
        abs: 1e-16,
        rel: 1e-13,
        max_intervals: 2000,
    }
}

/// `pv ∫_0^∞ s(q')/(q-q') dq'` with a symmetric window of half-width `w <= q` around `q`.
pub fn principal_value(q: f64, w: f64) -> Result<f64> {
    let q = check_finite_nonneg("q", q)?;
    let tol = pv_tol();
    if q == 0.0 {
        let v = adaptive_to_infinity_scaled(|x: f64| -rate_shape(x) / x, 0.0, 1.0, tol)?;
        return Ok(v.value);
    }
    let w = w.min(q);
    // ∫_0^w [s(q-u) - s(q+u)]/u du replaces the singular window
    let window = adaptive(
        |u: f64| (rate_shape(q - u) - rate_shape(q + u)) / u,
        0.0,
        w,
        tol,
    )?;
    let left = if q - w > 0.0 {
        adaptive(|x: f64| rate_shape(x) / (q - x), 0.0, q - w, tol)?.value
    } else {
        0.0
    };
    let right = adaptive_to_infinity_scaled(
        |x: f64| rate_shape(x) / (q - x),
        q + w,
        (q + w).max(1.0),
        tol,
    )?;
    Ok(window.value + left + right.value)
}

/// Principal value with the window-robustness check (`w = q/2` against `q/4`).
pub fn principal_value_checked(q: f64) -> Result<f64> {
    if q == 0.0 {
        return principal_value(0.0, 0.0);
    }
    let wide = principal_value(q, 0.5 * q)?;
    let narrow = principal_value(q, 0.25 * q)?;
    let gap = (wide - narrow).abs() / wide.abs().max(1e-2 * SHAPE_OVER_Q);
    if gap > PV_WINDOW_TOLERANCE {
        return Err(Error::PrincipalValueUnstable {
            omega: q,
            relative_gap: gap,
        });
    }
    Ok(wide)
}

/// Coupling strength and bare transition frequency of a Friedrichs-Lee model
/// with the hydrogen form factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    /// `G` in `Γ/scale = G s(q)`.
    pub strength: f64,
    /// Bare transition frequency over `scale`.
    pub q_a: f64,
    /// rad/s per unit of `q`.
    pub scale: f64,
    pub atom: Option<AtomParams>,
}

impl DecayModel {
    pub fn hydrogen(atom: &AtomParams) -> Self {
        let scale = atom.frequency_scale();
        Self {
            strength: hydrogen_rate_strength(atom.alpha),
            q_a: atom.omega_a / scale,
            scale,
            atom: Some(*atom),
        }
    }

    /// Model whose scaled constants are `A = Γ_a/2` and `B = q_a + δ(q_a)`.
    ///
    /// Solves `G s(q_a) = 2A`, `q_a = B - (G/2π) pv(q_a)` by fixed-point iteration.
    pub fn synthetic(a: f64, b: f64) -> Result<Self> {
        check_positive("A", a)?;
        check_positive("B", b)?;
        let mut q = b;
        for _ in 0..200 {
            let g = 2.0 * a / rate_shape(q);
            let next = b - g / (2.0 * PI) * principal_value_checked(q)?;
            if !(next > 0.0) {
                return Err(Error::OutOfRange {
                    what: "bare frequency of synthetic model",
                    value: next,
                });
            }
            if (next - q).abs() <= 4.0 * f64::EPSILON * b {
                return Ok(Self {
                    strength: 2.0 * a / rate_shape(next),
                    q_a: next,
                    scale: 1.0,
                    atom: None,
                });
            }
            q = next;
        }
        Err(Error::NonConvergence {
            context: format!("synthetic model for A = {a}, B = {b}"),
            partial: Complex64::new(q, 0.0),
            estimate: f64::NAN,
            panels: 200,
        })
    }

    pub fn gamma_scaled(&self, q: f64) -> f64 {
        self.strength * rate_shape(q)
    }

    pub fn delta_scaled(&self, q: f64) -> Result<f64> {
        Ok(self.strength / (2.0 * PI) * principal_value_checked(q)?)
    }
}

#[derive(Debug, Clone)]
struct WindowGrid {
    h: f64,
    x: Vec<f64>,
    /// Kronrod weights times panel half-width.
    wk: Vec<f64>,
    /// Embedded Gauss weights (zero at Kronrod-only nodes).
    wg: Vec<f64>,
    ghat: Vec<f64>,
    ratio: Vec<f64>,
}

impl WindowGrid {
    fn panels(&self) -> usize {
        self.x.len() / 15
    }
}

#[derive(Debug, Clone)]
pub struct DecaySpectrum {
    pub model: DecayModel,
    /// `Γ(ω_a)`, rad/s.
    pub gamma_a: f64,
    /// `Δ(ω_a)`, rad/s.
    pub delta_a: f64,
    /// `Ω_a = ω_a + Δ_a`, rad/s.
    pub omega_shifted: f64,
    /// Half-width of the peak-centred window in units of `Γ_a`.
    pub window: f64,
    pub tau_max: f64,
    gamma_s: f64,
    delta_s: f64,
    b_s: f64,
    delta_interp: OnceLock<PiecewiseChebyshev>,
    grid: OnceLock<WindowGrid>,
}

/// Physical-units view of the spectrum samples behind the `spectrum` CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSample {
    pub omega: f64,
    pub gamma: f64,
    pub delta: f64,
    pub g: f64,
    pub g_weak: f64,
}

impl DecaySpectrum {
    pub fn new(model: DecayModel) -> Result<Self> {
        let gamma_a = match model.atom {
            Some(atom) => CouplingFunction::new(atom).gamma(model.q_a * model.scale)?,
            None => model.scale * model.gamma_scaled(model.q_a),
        };
        let delta_a = model.scale * model.delta_scaled(model.q_a)?;
        Self::from_constants(model, gamma_a, delta_a)
    }

    pub fn hydrogen(atom: &AtomParams) -> Result<Self> {
        Self::new(DecayModel::hydrogen(atom))
    }

    pub fn synthetic(a: f64, b: f64) -> Result<Self> {
        Self::new(DecayModel::synthetic(a, b)?)
    }

    /// Rebuilds a spectrum from stored `Γ_a`, `Δ_a` without recomputing them.
    pub fn from_constants(model: DecayModel, gamma_a: f64, delta_a: f64) -> Result<Self> {
        check_positive("gamma_a", gamma_a)?;
        let gamma_s = gamma_a / model.scale;
        let delta_s = delta_a / model.scale;
        let b_s = model.q_a + delta_s;
        let omega_shifted = model.q_a * model.scale + delta_a;
        if gamma_a / omega_shifted > 0.1 {
            warn!(
                "strong coupling: Gamma_a/Omega_a = {:.3} exceeds 0.1, weak-coupling comparisons are loose",
                gamma_a / omega_shifted
            );
        }
        Ok(Self {
            model,
            gamma_a,
            delta_a,
            omega_shifted,
            window: DEFAULT_WINDOW,
            tau_max: DEFAULT_TAU_MAX,
            gamma_s,
            delta_s,
            b_s,
            delta_interp: OnceLock::new(),
            grid: OnceLock::new(),
        })
    }

    /// Scaled half-width `A = Γ_a/(2 scale)`.
    pub fn a(&self) -> f64 {
        0.5 * self.gamma_s
    }

    /// Scaled shifted frequency `B = Ω_a/scale`.
    pub fn b(&self) -> f64 {
        self.b_s
    }

    pub fn dimensionless(&self, p: f64, r_prime: f64) -> Result<DimensionlessParams> {
        DimensionlessParams::new(self.a(), self.b(), p, r_prime)
    }

    fn q_window(&self) -> (f64, f64) {
        let lo = (self.b_s - self.gamma_s * self.window).max(0.0);
        (lo, self.b_s + self.gamma_s * self.window)
    }

    fn interp(&self) -> Result<&PiecewiseChebyshev> {
        if let Some(c) = self.delta_interp.get() {
            return Ok(c);
        }
        let (lo, hi) = self.q_window();
        let built = PiecewiseChebyshev::build(
            |q| principal_value(q, 0.5 * q),
            lo,
            hi,
            1e-12 * SHAPE_OVER_Q,
            1e-9 * (hi - lo),
        )?;
        Ok(self.delta_interp.get_or_init(|| built))
    }

    /// `δ(q) - δ_a` in scaled units; interpolated inside the window.
    fn delta_offset(&self, q: f64) -> Result<f64> {
        let pv = match self.interp() {
            Ok(c) if c.contains(q) => c.eval(q),
            _ => principal_value(q, 0.5 * q)?,
        };
        Ok(self.model.strength / (2.0 * PI) * pv - self.delta_s)
    }

    /// Scaled spectral density per unit `q`.
    fn g_q(&self, q: f64) -> Result<f64> {
        let gam = self.model.gamma_scaled(q);
        let detune = (q - self.b_s) - self.delta_offset(q)?;
        Ok(gam / (2.0 * PI) / (detune * detune + 0.25 * gam * gam))
    }

    /// Peak-centred density `ĝ(x)` with its ratio `Γ(ω)/Γ_a`.
    fn ghat(&self, x: f64) -> Result<(f64, f64)> {
        let q = self.b_s + self.gamma_s * x;
        if q <= 0.0 {
            return Ok((0.0, 0.0));
        }
        let ratio = self.model.gamma_scaled(q) / self.gamma_s;
        let d = self.delta_offset(q)? / self.gamma_s;
        let v = (x - d) * (x - d) + 0.25 * ratio * ratio;
        Ok((ratio / (2.0 * PI) / v, ratio))
    }

    fn build_grid(&self, h: f64) -> Result<WindowGrid> {
        self.interp()?;
        let (q_lo, _) = self.q_window();
        let x_lo = (q_lo - self.b_s) / self.gamma_s;
        let x_hi = self.window;
        let n = ((x_hi - x_lo) / h).ceil() as usize;
        let panels: Vec<Result<[(f64, f64, f64, f64, f64); 15]>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let a = x_lo + h * i as f64;
                let b = (a + h).min(x_hi);
                let c = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                let mut out = [(0.0, 0.0, 0.0, 0.0, 0.0); 15];
                for j in 0..15 {
                    let (idx, sign) = if j < 7 { (j, -1.0) } else if j == 7 { (7, 0.0) } else { (14 - j, 1.0) };
                    let x = c + sign * half * XGK[idx];
                    let wg = if idx % 2 == 1 { WG[idx / 2] } else { 0.0 };
                    let (g, r) = self.ghat(x)?;
                    out[j] = (x, WGK[idx] * half, wg * half, g, r);
                }
                Ok(out)
            })
            .collect();
        let mut grid = WindowGrid {
            h,
            x: Vec::with_capacity(15 * n),
            wk: Vec::with_capacity(15 * n),
            wg: Vec::with_capacity(15 * n),
            ghat: Vec::with_capacity(15 * n),
            ratio: Vec::with_capacity(15 * n),
        };
        for p in panels {
            for (x, wk, wg, g, r) in p? {
                grid.x.push(x);
                grid.wk.push(wk);
                grid.wg.push(wg);
                grid.ghat.push(g);
                grid.ratio.push(r);
            }
        }
        Ok(grid)
    }

    fn grid_for(&self, tau: f64) -> Result<std::borrow::Cow<'_, WindowGrid>> {
        let h_default = (2.5 / self.tau_max).min(1.0);
        if tau <= self.tau_max {
            if let Some(g) = self.grid.get() {
                return Ok(std::borrow::Cow::Borrowed(g));
            }
            let built = self.build_grid(h_default)?;
            return Ok(std::borrow::Cow::Borrowed(self.grid.get_or_init(|| built)));
        }
        Ok(std::borrow::Cow::Owned(self.build_grid(2.5 / tau)?))
    }

    /// Kronrod sum over the window grid with a per-panel Gauss comparison.
    fn grid_sum<F: Fn(usize) -> Complex64>(grid: &WindowGrid, f: F) -> (Complex64, f64) {
        let mut total = CompensatedSum::default();
        let mut err = 0.0;
        for p in 0..grid.panels() {
            let mut k = Complex64::new(0.0, 0.0);
            let mut g = Complex64::new(0.0, 0.0);
            let mut abs = 0.0;
            for i in 15 * p..15 * p + 15 {
                let v = f(i);
                k += v * grid.wk[i];
                g += v * grid.wg[i];
                abs += v.norm() * grid.wk[i];
            }
            total.add(k);
            let diff = (k - g).norm();
            if abs > 0.0 && diff > 0.0 {
                err += diff.min(abs * (200.0 * diff / abs).powf(1.5));
            }
        }
        (total.value(), err + 64.0 * f64::EPSILON * total.abs_sum())
    }

    /// `∫ f(q) e^{-iP(q-B)} dq` over the parts of `q >= 0` outside the window.
    fn tails<F: Fn(f64) -> Result<f64> + Sync>(
        &self,
        f: F,
        big_p: f64,
    ) -> Result<(Complex64, f64)> {
        let (q_lo, q_hi) = self.q_window();
        let tol = Tolerance {
            abs: 0.0,
            rel: 1e-9,
            max_intervals: 4000,
        };
        let failed = std::cell::Cell::new(None);
        let eval = |q: f64| match f(q) {
            Ok(v) => v,
            Err(e) => {
                failed.set(Some(e));
                0.0
            }
        };
        let mut value = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        let span = q_hi - self.b_s;

        if big_p == 0.0 {
            let up = adaptive_to_infinity_scaled(&eval, q_hi, span, tol)?;
            value += up.value;
            err += up.error;
            if q_lo > 0.0 {
                let low = adaptive(&eval, 0.0, q_lo, tol)?;
                value += low.value;
                err += low.error;
            }
        } else {
            let opts = OscillatoryOptions {
                low_frequency: 2.0 / span,
                ..OscillatoryOptions::new(1e-9)
            };
            let up = fourier_integral_from(
                |u| Complex64::new(eval(q_hi + u), 0.0),
                -big_p,
                0.0,
                &opts,
            )?;
            value += up.value * Complex64::from_polar(1.0, -big_p * (q_hi - self.b_s));
            err += up.error_estimate;
            if q_lo > 0.0 {
                let phase = Complex64::from_polar(1.0, -big_p * (q_lo - self.b_s));
                let low = if big_p * q_lo < 50.0 {
                    let k = |u: f64| Complex64::from_polar(eval(q_lo - u), big_p * u);
                    let est = adaptive(k, 0.0, q_lo, tol)?;
                    (est.value, est.error)
                } else {
                    // extrapolated panel sums; the far end contributes O(f'(0)/P²)
                    let s = |u: f64| {
                        if u < q_lo {
                            Complex64::new(eval(q_lo - u), 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    };
                    let opts = OscillatoryOptions {
                        low_frequency: 0.0,
                        ..OscillatoryOptions::new(1e-9)
                    };
                    let est = fourier_integral_from(s, big_p, 0.0, &opts)?;
                    (est.value, est.error_estimate)
                };
                value += low.0 * phase;
                err += low.1;
            }
        }
        if let Some(e) = failed.take() {
            return Err(e);
        }
        Ok((value, err))
    }

    pub fn gamma_of_omega(&self, omega: f64) -> Result<f64> {
        let omega = check_finite_nonneg("omega", omega)?;
        match self.model.atom {
            Some(atom) => CouplingFunction::new(atom).gamma(omega),
            None => Ok(self.model.scale * self.model.gamma_scaled(omega / self.model.scale)),
        }
    }

    /// `ρ̃(ω) = √(Γ(ω)/2π)`.
    pub fn rho_tilde(&self, omega: f64) -> Result<f64> {
        match self.model.atom {
            Some(atom) => CouplingFunction::new(atom).rho_tilde(omega),
            None => Ok((self.gamma_of_omega(omega)? / (2.0 * PI)).sqrt()),
        }
    }

    pub fn lamb_shift_delta(&self, omega: f64) -> Result<f64> {
        let omega = check_positive("omega", omega)?;
        Ok(self.model.scale * self.model.delta_scaled(omega / self.model.scale)?)
    }

    /// `g(ω) = (1/2π) Γ(ω)/[(ω - ω_a - Δ(ω))² + Γ(ω)²/4]`, per rad/s.
    pub fn spectral_density_g(&self, omega: f64) -> Result<f64> {
        let omega = check_finite_nonneg("omega", omega)?;
        if omega == 0.0 {
            return Ok(0.0);
        }
        Ok(self.g_q(omega / self.model.scale)? / self.model.scale)
    }

    /// Weak-coupling Lorentzian centred on `Ω_a` with width `Γ_a`.
    pub fn weak_density(&self, omega: f64) -> f64 {
        let d = omega - self.omega_shifted;
        self.gamma_a / (2.0 * PI) / (d * d + 0.25 * self.gamma_a * self.gamma_a)
    }

    pub fn sample(&self, omega: f64) -> Result<SpectrumSample> {
        Ok(SpectrumSample {
            omega,
            gamma: self.gamma_of_omega(omega)?,
            delta: self.lamb_shift_delta(omega)?,
            g: self.spectral_density_g(omega)?,
            g_weak: self.weak_density(omega),
        })
    }

    /// `∫_0^∞ g(ω) dω` with its error estimate.
    pub fn normalization(&self) -> Result<(f64, f64)> {
        let grid = self.grid_for(0.0)?;
        let (core, e1) = Self::grid_sum(&grid, |i| Complex64::new(grid.ghat[i], 0.0));
        let (tail, e2) = self.tails(|q| self.g_q(q), 0.0)?;
        Ok((core.re + tail.re, e1 + e2))
    }

    /// Location of the maximum of `g`, rad/s.
    pub fn peak_omega(&self) -> Result<f64> {
        let grid = self.grid_for(0.0)?;
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
        for (x, g) in grid.x.iter().zip(&grid.ghat) {
            if *g > best {
                best = *g;
                arg = *x;
            }
        }
        Ok(self.omega_shifted + self.gamma_a * arg)
    }

    pub fn c0_exact(&self, t: f64) -> Result<Complex64> {
        self.c0_exact_with_error(t).map(|(v, _)| v)
    }

    /// `c₀(t) = ∫ g(ω) e^{-iωt} dω` with the carrier `e^{-iΩ_a t}` factored out.
    pub fn c0_exact_with_error(&self, t: f64) -> Result<(Complex64, f64)> {
        let t = check_finite_nonneg("t", t)?;
        let big_p = self.model.scale * t;
        let tau = self.gamma_s * big_p;
        let grid = self.grid_for(tau)?;
        let (core, e1) = Self::grid_sum(&grid, |i| {
            Complex64::from_polar(grid.ghat[i], -tau * grid.x[i])
        });
        let (tail, e2) = self.tails(|q| self.g_q(q), big_p)?;
        let carrier = Complex64::from_polar(1.0, -self.b_s * big_p);
        let err = e1 + e2;
        if err > 1e-4 {
            return Err(Error::NonConvergence {
                context: format!("c0 at Gamma_a t = {tau}, grid step {}", grid.h),
                partial: carrier * (core + tail),
                estimate: err,
                panels: grid.panels(),
            });
        }
        Ok((carrier * (core + tail), err))
    }

    /// `e^{-Γ_a t/2} e^{-iΩ_a t}`.
    pub fn c0_weak(&self, t: f64) -> Complex64 {
        Complex64::from_polar((-0.5 * self.gamma_a * t).exp(), -self.omega_shifted * t)
    }

    /// Closed form of `-iρ̃(ω) ∫_0^t c₀(s) e^{-iω(t-s)} ds` with the weak-coupling `c₀`.
    pub fn photon_amplitude_d(&self, omega: f64, t: f64) -> Result<Complex64> {
        let t = check_finite_nonneg("t", t)?;
        let rho = self.rho_tilde(omega)?;
        let z = Complex64::new(0.5 * self.gamma_a, self.omega_shifted - omega);
        Ok(-I * rho * Complex64::from_polar(1.0, -omega * t) * one_minus_exp_over(z, t))
    }

    /// `∫_0^∞ |D(ω, t)|² dω`.
    pub fn photon_norm(&self, t: f64) -> Result<f64> {
        let t = check_finite_nonneg("t", t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let big_p = self.model.scale * t;
        let tau = self.gamma_s * big_p;
        let decay = (-0.5 * tau).exp();
        let grid = self.grid_for(tau)?;
        let (core, _) = Self::grid_sum(&grid, |i| {
            let x = grid.x[i];
            let m = (Complex64::new(1.0, 0.0) - Complex64::from_polar(decay, tau * x)).norm_sqr();
            Complex64::new(grid.ratio[i] / (2.0 * PI) * m / (0.25 + x * x), 0.0)
        });
        // |1 - e^{-τ/2 + iτx}|² = 1 + e^{-τ} - 2 e^{-τ/2} cos(τx)
        let lorentz = |q: f64| {
            let d = q - self.b_s;
            Ok(self.model.gamma_scaled(q) / (2.0 * PI) / (0.25 * self.gamma_s * self.gamma_s + d * d))
        };
        let (flat, _) = self.tails(lorentz, 0.0)?;
        let (osc, _) = self.tails(lorentz, big_p)?;
        Ok(core.re + (1.0 + decay * decay) * flat.re - 2.0 * decay * osc.re)
    }

    /// `|c₀(t)|² + ∫|D(ω,t)|² dω` with the weak-coupling `c₀`.
    pub fn norm_check(&self, t: f64) -> Result<f64> {
        Ok(self.c0_weak(t).norm_sqr() + self.photon_norm(t)?)
    }

    /// `Γ_a t` for a physical time.
    pub fn tau(&self, t: f64) -> f64 {
        self.gamma_a * t
    }

    pub fn amplitude_state(&self, t: f64) -> Result<AmplitudeState<'_>> {
        Ok(AmplitudeState {
            t: check_finite_nonneg("t", t)?,
            c0: self.c0_weak(t),
            spectrum: self,
        })
    }
}

/// Excited and photon amplitudes at one instant.
#[derive(Debug, Clone, Copy)]
pub struct AmplitudeState<'a> {
    pub t: f64,
    pub c0: Complex64,
    spectrum: &'a DecaySpectrum,
}

impl AmplitudeState<'_> {
    pub fn d(&self, omega: f64) -> Result<Complex64> {
        self.spectrum.photon_amplitude_d(omega, self.t)
    }
}

/// `(1 - e^{-zt})/z` without cancellation for small `|zt|`.
pub(crate) fn one_minus_exp_over(z: Complex64, t: f64) -> Complex64 {
    let zt = z * t;
    if zt.norm() < 1e-3 {
        t * (1.0 - zt / 2.0 + zt * zt / 6.0 - zt * zt * zt / 24.0 + zt * zt * zt * zt / 120.0)
    } else {
        (1.0 - (-zt).exp()) / z
    }
}
