//! Position-space field of the emitted photon: the photon amplitude `d_k`,
//! the radial integrals `F_L`, both helicity fields and the energy density.
//!
//! The radial integrals are evaluated in scaled form,
//! `I_L = ∫_0^∞ N(q) w(q) j_L(q r') / (A + i(B - q)) dq` with
//! `N = e^{-iqp} - e^{-(A+iB)p}` and `w = q²/(1+q²)²`, and
//! `F̂_0 = √(2/3) I_0`, `F̂_1 = -iλ I_1`, `F̂_2 = -I_2/√3`.
//! Physical values are `C₁ F̂_L`.

use std::f64::consts::PI;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_finite_nonneg, check_positive, Error, Result};
use crate::oscillatory::{fourier_integral_from, panel_breaks, OscillatoryOptions, Resonance};
use crate::quadrature::{CompensatedSum, WGK, XGK};
use crate::solver::DecaySpectrum;
use crate::special::{
    helicity_sign, sph_j012_trig, sph_j2_recombined, vector_spherical_harmonic, AngularPoint,
    ComplexVector3,
};
use crate::units::{AtomParams, DimensionlessParams, MagneticNumber};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative tolerance handed to the oscillatory tail engine.
pub const DEFAULT_FIELD_TOL: f64 = 1e-12;
/// Budget for the directly integrated region; beyond it the point is refused.
pub const MAX_DIRECT_PANELS: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    /// `r` in metres, `t` in seconds.
    Physical,
    /// `r` is `r' = Kr`, `t` is `p = cKt`.
    Dimensionless,
}

/// How `j_2` enters the `F_2` integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum J2Route {
    #[default]
    Direct,
    /// Through `(3/x) j_1 - j_0`.
    Recombined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub t: f64,
    pub mode: FieldMode,
}

impl FieldPoint {
    pub fn physical(r: f64, theta: f64, phi: f64, t: f64) -> Result<Self> {
        Self::new(r, theta, phi, t, FieldMode::Physical)
    }

    pub fn dimensionless(r_prime: f64, theta: f64, phi: f64, p: f64) -> Result<Self> {
        Self::new(r_prime, theta, phi, p, FieldMode::Dimensionless)
    }

    pub fn new(r: f64, theta: f64, phi: f64, t: f64, mode: FieldMode) -> Result<Self> {
        AngularPoint::new(theta, phi)?;
        Ok(Self {
            r: check_positive("r", r)?,
            theta,
            phi,
            t: check_finite_nonneg("t", t)?,
            mode,
        })
    }

    pub fn angles(&self) -> AngularPoint {
        AngularPoint {
            theta: self.theta,
            phi: self.phi,
        }
    }
}

/// The scaled integrals `I_L` with error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialIntegrals {
    pub values: [Complex64; 3],
    pub errors: [f64; 3],
    pub panels: usize,
}

impl RadialIntegrals {
    /// `[F̂_0, F̂_1, F̂_2]` for helicity `λ`.
    pub fn scaled_fl(&self, lambda: f64) -> [Complex64; 3] {
        let v = self.values;
        [
            v[0] * (2.0f64 / 3.0).sqrt(),
            -I * lambda * v[1],
            -v[2] / 3.0f64.sqrt(),
        ]
    }

    pub fn scaled_errors(&self) -> [f64; 3] {
        let e = self.errors;
        [e[0] * (2.0f64 / 3.0).sqrt(), e[1], e[2] / 3.0f64.sqrt()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FLTriple {
    pub f: [Complex64; 3],
    pub errors: [f64; 3],
    pub lambda: i32,
    pub mode: FieldMode,
}

/// `C₁ = (2/3)^{5/2} √(α⁵/c) mc²/(πħ r_B)`, the unit of `F_L`.
pub fn field_unit(atom: &AtomParams) -> f64 {
    (2.0f64 / 3.0).powf(2.5) * (atom.alpha.powi(5) / atom.c).sqrt() * atom.mc2()
        / (PI * atom.hbar * atom.r_b)
}

/// `w(q)/(A + i(B - q))` without the time-dependent numerator.
fn profile(params: &DimensionlessParams, q: f64) -> Complex64 {
    let d = 1.0 + q * q;
    q * q / (d * d) / Complex64::new(params.a, params.b - q)
}

/// `x·c` split as `hi + lo` with `lo` the exact rounding error of the product.
fn two_prod(x: f64, c: f64) -> (f64, f64) {
    let hi = x * c;
    (hi, x.mul_add(c, -hi))
}

/// `sin`, `cos` of `base.0 + base.1 + offset` where `base.0` is large and the rest small.
fn trig_shifted(base: (f64, f64), base_trig: (f64, f64), offset: f64) -> (f64, f64) {
    let (s0, c0) = base_trig;
    let (sd, cd) = (base.1 + offset).sin_cos();
    (s0 * cd + c0 * sd, c0 * cd - s0 * sd)
}

fn bessel_triple(x: f64, s: f64, c: f64, route: J2Route) -> [f64; 3] {
    let mut j = sph_j012_trig(x, s, c);
    if route == J2Route::Recombined {
        j[2] = if x < 1.0 {
            sph_j2_recombined(x)
        } else {
            3.0 * j[1] / x - j[0]
        };
    }
    j
}

/// Coefficients of `e^{±ix}` in `j_0, j_1, j_2` for `x > 0`.
fn exp_coefficients(x: f64, sign: f64, route: J2Route) -> [Complex64; 3] {
    let half_over_i = Complex64::new(0.0, -0.5);
    let c0 = half_over_i * sign / x;
    let c1 = half_over_i * sign / (x * x) - 0.5 / x;
    let c2 = match route {
        J2Route::Direct => {
            half_over_i * sign * (3.0 / (x * x * x) - 1.0 / x) - 1.5 / (x * x)
        }
        J2Route::Recombined => c1 * (3.0 / x) - c0,
    };
    [c0, c1, c2]
}

fn direct_region(
    params: &DimensionlessParams,
    route: J2Route,
    a: f64,
    b: f64,
) -> Result<([Complex64; 3], usize)> {
    let h = (PI / (params.r_prime + params.p)).min(0.25);
    let estimate = ((b - a) / h).ceil() as usize + 200;
    if estimate > MAX_DIRECT_PANELS {
        return Err(Error::NonConvergence {
            context: format!(
                "F_L direct region needs about {estimate} panels at r' = {}, p = {}",
                params.r_prime, params.p
            ),
            partial: Complex64::new(0.0, 0.0),
            estimate: f64::INFINITY,
            panels: 0,
        });
    }
    let e = params.decay_factor();
    let breaks = panel_breaks(
        a,
        b,
        h,
        Some(Resonance {
            center: params.b,
            width: params.a,
        }),
    );
    // Phases q r' and q p reach 1e5 and more, and over aligned half-period panels
    // rounding errors add up coherently. Nodes are therefore anchored at the
    // left edge (a rounded midpoint would leave slivers between panels) and the
    // edge phase is carried in two parts.
    let mut sums = [CompensatedSum::default(); 3];
    for pair in breaks.windows(2) {
        let left = pair[0];
        let half = 0.5 * (pair[1] - pair[0]);
        let xr = two_prod(left, params.r_prime);
        let xr_trig = xr.0.sin_cos();
        let xp = two_prod(left, params.p);
        let xp_trig = xp.0.sin_cos();
        let mut panel = [Complex64::new(0.0, 0.0); 3];
        for j in 0..15 {
            let (idx, sign) = match j {
                0..=6 => (j, -1.0),
                7 => (7, 0.0),
                _ => (14 - j, 1.0),
            };
            let u = half + sign * half * XGK[idx];
            let q = left + u;
            let (sp, cp) = trig_shifted(xp, xp_trig, params.p * u);
            let numerator = Complex64::new(cp, -sp) - e;
            let amp = numerator * profile(params, q) * WGK[idx];
            let (sr, cr) = trig_shifted(xr, xr_trig, params.r_prime * u);
            let x = xr.0 + (xr.1 + params.r_prime * u);
            let jl = bessel_triple(x, sr, cr, route);
            for l in 0..3 {
                panel[l] += amp * jl[l];
            }
        }
        for l in 0..3 {
            sums[l].add(panel[l] * half);
        }
    }
    Ok((sums.map(|s| s.value()), breaks.len() - 1))
}

/// `∫_a^∞` of the integrands split into `e^{iωq}` kernels with `ω ∈ {r'-p, -(r'+p), r', -r'}`.
fn tail_region(
    params: &DimensionlessParams,
    route: J2Route,
    a: f64,
    tol: f64,
) -> Result<([Complex64; 3], [f64; 3], usize)> {
    let mut values = [Complex64::new(0.0, 0.0); 3];
    let mut errors = [0.0; 3];
    if params.p == 0.0 {
        return Ok((values, errors, 0));
    }
    let r = params.r_prime;
    let e = params.decay_factor();
    let one = Complex64::new(1.0, 0.0);
    // (frequency, [(sign of e^{±iqr'}, weight)]) with equal frequencies merged
    let raw = [
        (r - params.p, 1.0, one),
        (-(r + params.p), -1.0, one),
        (r, 1.0, -e),
        (-r, -1.0, -e),
    ];
    let mut kernels: Vec<(f64, Vec<(f64, Complex64)>)> = Vec::new();
    for (omega, sign, weight) in raw {
        match kernels.iter_mut().find(|k| k.0 == omega) {
            Some(k) => k.1.push((sign, weight)),
            None => kernels.push((omega, vec![(sign, weight)])),
        }
    }
    let opts = OscillatoryOptions::new(tol);
    let mut panels = 0;
    for (omega, parts) in &kernels {
        for l in 0..3 {
            let s = |q: f64| {
                let base = profile(params, q);
                let x = q * r;
                let mut c = Complex64::new(0.0, 0.0);
                for (sign, weight) in parts {
                    c += weight * exp_coefficients(x, *sign, route)[l];
                }
                base * c
            };
            let res = fourier_integral_from(s, *omega, a, &opts).map_err(|err| match err {
                Error::NonConvergence {
                    context,
                    partial,
                    estimate,
                    panels,
                } => Error::NonConvergence {
                    context: format!("F_{l} tail, effective frequency {omega}: {context}"),
                    partial,
                    estimate,
                    panels,
                },
                other => other,
            })?;
            values[l] += res.value;
            errors[l] += res.error_estimate;
            panels += res.panels_used;
        }
    }
    Ok((values, errors, panels))
}

/// The scaled integrals `I_L(r', p)`.
///
/// `[0, q_s]` is integrated directly on panels no wider than `π/(r'+p)`; the
/// rest goes to the oscillatory engine. The error estimate is the change
/// when the split point moves out by a quarter, plus the engine's own estimates.
pub fn radial_integrals(
    params: &DimensionlessParams,
    route: J2Route,
    tol: f64,
) -> Result<RadialIntegrals> {
    if params.p == 0.0 {
        return Ok(RadialIntegrals {
            values: [Complex64::new(0.0, 0.0); 3],
            errors: [0.0; 3],
            panels: 0,
        });
    }
    let q_s = (params.b + 20.0 * params.a).max(1.0);
    let q_s2 = 1.25 * q_s;
    let (near, n1) = direct_region(params, route, 0.0, q_s)?;
    let (tail, tail_err, n2) = tail_region(params, route, q_s, tol)?;
    let (middle, n3) = direct_region(params, route, q_s, q_s2)?;
    let (tail2, _, n4) = tail_region(params, route, q_s2, tol)?;
    let mut values = [Complex64::new(0.0, 0.0); 3];
    let mut errors = [0.0; 3];
    for l in 0..3 {
        values[l] = near[l] + tail[l];
        errors[l] = (tail[l] - middle[l] - tail2[l]).norm() + tail_err[l];
    }
    Ok(RadialIntegrals {
        values,
        errors,
        panels: n1 + n2 + n3 + n4,
    })
}

/// One evaluated point of a scan; `failure` is set when the quadrature gave up.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub point: FieldPoint,
    pub density: f64,
    pub error: f64,
    /// `[F_0, F_1, F_2]` for λ = +1, in the units of the point's mode.
    pub f: [Complex64; 3],
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldScan {
    pub samples: Vec<FieldSample>,
    pub m_e: MagneticNumber,
    pub a: f64,
    pub b: f64,
    pub gamma_a: f64,
    pub delta_a: f64,
    pub tol: f64,
    /// Seconds since the Unix epoch when the scan finished.
    pub timestamp: u64,
}

impl FieldScan {
    pub fn ok_mask(&self) -> Vec<bool> {
        self.samples.iter().map(|s| s.failure.is_none()).collect()
    }

    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| s.failure.is_some()).count()
    }
}

/// Field evaluation for one spectrum and one excited sublevel.
#[derive(Debug, Clone, Copy)]
pub struct FieldEvaluator<'a> {
    pub spectrum: &'a DecaySpectrum,
    pub m_e: MagneticNumber,
    pub route: J2Route,
    pub tol: f64,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(spectrum: &'a DecaySpectrum, m_e: MagneticNumber) -> Self {
        Self {
            spectrum,
            m_e,
            route: J2Route::Direct,
            tol: DEFAULT_FIELD_TOL,
        }
    }

    /// Uses the sublevel stored in the spectrum's atom, or `m_e = 0` for synthetic spectra.
    pub fn for_spectrum(spectrum: &'a DecaySpectrum) -> Self {
        let m = spectrum
            .model
            .atom
            .map(|a| a.m_e_qn)
            .unwrap_or(MagneticNumber::Zero);
        Self::new(spectrum, m)
    }

    pub fn with_route(mut self, route: J2Route) -> Self {
        self.route = route;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn atom(&self) -> Result<&AtomParams> {
        self.spectrum
            .model
            .atom
            .as_ref()
            .ok_or(Error::PhysicalUnitsUnavailable)
    }

    pub fn params(&self, point: &FieldPoint) -> Result<DimensionlessParams> {
        match point.mode {
            FieldMode::Dimensionless => self.spectrum.dimensionless(point.t, point.r),
            FieldMode::Physical => {
                let atom = self.atom()?;
                self.spectrum
                    .dimensionless(point.t * self.spectrum.model.scale, point.r * atom.k_cut)
            }
        }
    }

    /// Factor taking `F̂_L` to the point's units.
    fn unit(&self, mode: FieldMode) -> Result<f64> {
        match mode {
            FieldMode::Dimensionless => Ok(1.0),
            FieldMode::Physical => Ok(field_unit(self.atom()?)),
        }
    }

    /// Factor taking `Σ_λ |Σ_L F̂_L Y^L|²` to an energy density.
    fn density_unit(&self, mode: FieldMode) -> Result<f64> {
        match mode {
            FieldMode::Dimensionless => Ok(1.0),
            FieldMode::Physical => {
                let atom = self.atom()?;
                let c1 = field_unit(atom);
                Ok(atom.hbar * c1 * c1)
            }
        }
    }

    pub fn integrals(&self, point: &FieldPoint) -> Result<RadialIntegrals> {
        radial_integrals(&self.params(point)?, self.route, self.tol)
    }

    /// `d_k(t) = √c D(ck, t)`.
    pub fn d_k_amplitude(&self, k: f64, t: f64) -> Result<Complex64> {
        check_positive("k", k)?;
        let c = self.spectrum.model.atom.map(|a| a.c).unwrap_or(1.0);
        Ok(c.sqrt() * self.spectrum.photon_amplitude_d(c * k, t)?)
    }

    pub fn compute_fl(&self, point: &FieldPoint, lambda: i32) -> Result<FLTriple> {
        let sign = helicity_sign(lambda)?;
        let ints = self.integrals(point)?;
        let unit = self.unit(point.mode)?;
        Ok(FLTriple {
            f: ints.scaled_fl(sign).map(|v| v * unit),
            errors: ints.scaled_errors().map(|e| e * unit),
            lambda,
            mode: point.mode,
        })
    }

    fn harmonics(&self, pt: AngularPoint) -> Result<[ComplexVector3; 3]> {
        let m = self.m_e.value();
        Ok([
            vector_spherical_harmonic(0, m, pt)?,
            vector_spherical_harmonic(1, m, pt)?,
            vector_spherical_harmonic(2, m, pt)?,
        ])
    }

    /// `Σ_L F_L Y^L_{1,m_e}`.
    pub fn helicity_field(&self, point: &FieldPoint, lambda: i32) -> Result<ComplexVector3> {
        let fl = self.compute_fl(point, lambda)?;
        let y = self.harmonics(point.angles())?;
        Ok(y[0] * fl.f[0] + y[1] * fl.f[1] + y[2] * fl.f[2])
    }

    /// Density and error at one angle from precomputed integrals, both helicities summed.
    pub fn density_from_integrals(
        &self,
        ints: &RadialIntegrals,
        pt: AngularPoint,
        mode: FieldMode,
    ) -> Result<(f64, f64)> {
        let y = self.harmonics(pt)?;
        let errs = ints.scaled_errors();
        let mut density = 0.0;
        let mut error = 0.0;
        for lambda in [1.0, -1.0] {
            let f = ints.scaled_fl(lambda);
            let v = y[0] * f[0] + y[1] * f[1] + y[2] * f[2];
            let dv: f64 = (0..3).map(|l| errs[l] * y[l].norm_sqr().sqrt()).sum();
            let n = v.norm_sqr();
            density += n;
            error += 2.0 * n.sqrt() * dv + dv * dv;
        }
        let unit = self.density_unit(mode)?;
        Ok((density * unit, error * unit))
    }

    pub fn energy_density(&self, point: &FieldPoint) -> Result<f64> {
        self.energy_density_with_error(point).map(|(d, _)| d)
    }

    pub fn energy_density_with_error(&self, point: &FieldPoint) -> Result<(f64, f64)> {
        let ints = self.integrals(point)?;
        self.density_from_integrals(&ints, point.angles(), point.mode)
    }

    fn sample(&self, point: FieldPoint, ints: Result<&RadialIntegrals>) -> FieldSample {
        let evaluated = ints.and_then(|ints| {
            let (d, e) = self.density_from_integrals(ints, point.angles(), point.mode)?;
            let unit = self.unit(point.mode)?;
            Ok((d, e, ints.scaled_fl(1.0).map(|v| v * unit)))
        });
        match evaluated {
            Ok((density, error, f)) => FieldSample {
                point,
                density,
                error,
                f,
                failure: None,
            },
            Err(e) => FieldSample {
                point,
                density: f64::NAN,
                error: f64::NAN,
                f: [Complex64::new(f64::NAN, f64::NAN); 3],
                failure: Some(e.to_string()),
            },
        }
    }

    fn finish(&self, samples: Vec<FieldSample>) -> FieldScan {
        let (a, b) = (self.spectrum.a(), self.spectrum.b());
        FieldScan {
            samples,
            m_e: self.m_e,
            a,
            b,
            gamma_a: self.spectrum.gamma_a,
            delta_a: self.spectrum.delta_a,
            tol: self.tol,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    /// Densities along `r` at fixed angles and time, evaluated in parallel.
    pub fn radial_scan(
        &self,
        r_values: &[f64],
        theta: f64,
        phi: f64,
        t: f64,
        mode: FieldMode,
    ) -> Result<FieldScan> {
        if r_values.is_empty() {
            return Err(Error::InsufficientData("radial scan needs at least one r".into()));
        }
        let points = r_values
            .iter()
            .map(|&r| FieldPoint::new(r, theta, phi, t, mode))
            .collect::<Result<Vec<_>>>()?;
        let samples = points
            .into_par_iter()
            .map(|pt| {
                let ints = self.integrals(&pt);
                self.sample(pt, ints.as_ref().map_err(Clone::clone))
            })
            .collect();
        Ok(self.finish(samples))
    }

    /// Densities along `θ` at fixed radius; the radial integrals are shared.
    pub fn angular_scan(
        &self,
        thetas: &[f64],
        r: f64,
        phi: f64,
        t: f64,
        mode: FieldMode,
    ) -> Result<FieldScan> {
        if thetas.is_empty() {
            return Err(Error::InsufficientData("angular scan needs at least one theta".into()));
        }
        let points = thetas
            .iter()
            .map(|&th| FieldPoint::new(r, th, phi, t, mode))
            .collect::<Result<Vec<_>>>()?;
        let ints = self.integrals(&points[0]);
        let samples = points
            .into_iter()
            .map(|pt| self.sample(pt, ints.as_ref().map_err(Clone::clone)))
            .collect();
        Ok(self.finish(samples))
    }
}
