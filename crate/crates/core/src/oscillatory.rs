//! Semi-infinite Fourier-type integrals `∫_a^∞ S(q) e^{iωq} dq` and the
//! endpoint (integration-by-parts) asymptotics of sine/cosine transforms.
//!
//! The tail is cut into half-period panels, each integrated with a 15-point
//! Kronrod rule; the alternating panel sums are extrapolated with Wynn's
//! epsilon algorithm. Near a quasi-pole the panels are graded first and
//! summed directly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, adaptive_to_infinity, gk15, CompensatedSum, Tolerance};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub panels_used: usize,
}

/// A factor `1/(width + i(center - q))` in the integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryOptions {
    /// Relative tolerance.
    pub tol: f64,
    pub max_panels: usize,
    pub resonance: Option<Resonance>,
    /// Panels before this point are summed without extrapolation.
    pub direct_until: f64,
    /// Below this |ω| the integral is done by plain adaptive quadrature.
    pub low_frequency: f64,
}

impl OscillatoryOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_panels: 4000,
            resonance: None,
            direct_until: 0.0,
            low_frequency: 2.0,
        }
    }

    pub fn with_resonance(mut self, center: f64, width: f64) -> Self {
        self.resonance = Some(Resonance { center, width });
        self
    }
}

/// `∫_0^∞ S(q) e^{iωq} dq`.
pub fn fourier_integral<S: Fn(f64) -> Complex64>(
    s: S,
    omega: f64,
    tol: f64,
) -> Result<OscillatoryResult> {
    fourier_integral_from(s, omega, 0.0, &OscillatoryOptions::new(tol))
}

/// `∫_0^∞ S(q) sin(ωq) dq`, by linearity from the exponential kernel.
pub fn sine_integral<S: Fn(f64) -> Complex64>(
    s: S,
    omega: f64,
    tol: f64,
) -> Result<OscillatoryResult> {
    let plus = fourier_integral(&s, omega, tol)?;
    let minus = fourier_integral(&s, -omega, tol)?;
    Ok(combine(plus, minus, -0.5 * I, 0.5 * I))
}

/// `∫_0^∞ S(q) cos(ωq) dq`.
pub fn cosine_integral<S: Fn(f64) -> Complex64>(
    s: S,
    omega: f64,
    tol: f64,
) -> Result<OscillatoryResult> {
    let plus = fourier_integral(&s, omega, tol)?;
    let minus = fourier_integral(&s, -omega, tol)?;
    let half = Complex64::new(0.5, 0.0);
    Ok(combine(plus, minus, half, half))
}

fn combine(
    a: OscillatoryResult,
    b: OscillatoryResult,
    ca: Complex64,
    cb: Complex64,
) -> OscillatoryResult {
    OscillatoryResult {
        value: a.value * ca + b.value * cb,
        error_estimate: a.error_estimate * ca.norm() + b.error_estimate * cb.norm(),
        panels_used: a.panels_used + b.panels_used,
    }
}

/// Panel breakpoints on `[a, b]`: width at most `h`, and graded towards the
/// resonance so that panels within ten widths of it are no wider than a quarter width.
pub fn panel_breaks(a: f64, b: f64, h: f64, resonance: Option<Resonance>) -> Vec<f64> {
    let mut out = vec![a];
    let mut q = a;
    while q < b {
        let mut w = h;
        if let Some(r) = resonance {
            let d = (q - r.center).abs();
            let graded = if d < 10.0 * r.width {
                0.25 * r.width
            } else {
                0.25 * (d - 9.0 * r.width)
            };
            w = w.min(graded);
            // do not step over the center
            if q < r.center && q + w > r.center && r.center - q > 1e-3 * w {
                w = r.center - q;
            }
        }
        q = if q + w >= b || b - (q + w) < 1e-9 * w { b } else { q + w };
        out.push(q);
    }
    out
}

pub fn fourier_integral_from<S: Fn(f64) -> Complex64>(
    s: S,
    omega: f64,
    a: f64,
    opts: &OscillatoryOptions,
) -> Result<OscillatoryResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::OutOfRange {
            what: "tolerance",
            value: opts.tol,
        });
    }
    let h = std::f64::consts::PI / omega.abs();
    // the graded layout reaches the half-period width at 9w + 4h past the center
    let direct_end = opts
        .resonance
        .map(|r| r.center + (10.0 * r.width).max(9.0 * r.width + 4.0 * h.min(1.0)))
        .unwrap_or(a)
        .max(opts.direct_until)
        .max(a);
    let kernel = |q: f64| s(q) * Complex64::from_polar(1.0, omega * q);

    if omega.abs() < opts.low_frequency {
        return low_frequency(kernel, a, direct_end, opts, omega);
    }

    let mut sum = CompensatedSum::default();
    let mut quad_error = 0.0;
    let mut panels = 0usize;

    let breaks = panel_breaks(a, direct_end, h, opts.resonance);
    for w in breaks.windows(2) {
        let est = gk15(&mut &kernel, w[0], w[1]);
        sum.add(est.value);
        quad_error += est.error;
        panels += 1;
    }

    // Tail: half-period panels with epsilon extrapolation of the partial sums.
    let mut partial = Vec::new();
    let mut estimates: Vec<Complex64> = Vec::new();
    let mut small_run = 0usize;
    let mut k = 0usize;
    loop {
        if panels >= opts.max_panels {
            return Err(Error::NonConvergence {
                context: format!("oscillatory tail at omega = {omega:e}"),
                partial: estimates.last().copied().unwrap_or(sum.value()),
                estimate: extrapolation_gap(&estimates),
                panels,
            });
        }
        let lo = direct_end + k as f64 * h;
        let est = gk15(&mut &kernel, lo, lo + h);
        k += 1;
        panels += 1;
        sum.add(est.value);
        quad_error += est.error;
        let s_n = sum.value();
        partial.push(s_n);

        let roundoff = 64.0 * f64::EPSILON * sum.abs_sum();
        if est.value.norm() <= f64::EPSILON * s_n.norm() || est.value.norm() == 0.0 {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 3 {
            return Ok(OscillatoryResult {
                value: s_n,
                error_estimate: quad_error + roundoff,
                panels_used: panels,
            });
        }

        let window = partial.len().min(41);
        let window = if window % 2 == 0 { window - 1 } else { window };
        estimates.push(wynn_epsilon(&partial[partial.len() - window..]));
        if estimates.len() >= 6 {
            let value = *estimates.last().unwrap();
            let gap = extrapolation_gap(&estimates);
            let target = (opts.tol * value.norm()).max(roundoff);
            if gap <= target {
                return Ok(OscillatoryResult {
                    value,
                    error_estimate: gap + quad_error + roundoff,
                    panels_used: panels,
                });
            }
        }
    }
}

fn extrapolation_gap(estimates: &[Complex64]) -> f64 {
    match estimates {
        [.., a, b, c] => (c - b).norm() + (c - a).norm(),
        [a, b] => (b - a).norm(),
        _ => f64::INFINITY,
    }
}

fn low_frequency<K: Fn(f64) -> Complex64>(
    kernel: K,
    a: f64,
    direct_end: f64,
    opts: &OscillatoryOptions,
    omega: f64,
) -> Result<OscillatoryResult> {
    let tol = Tolerance {
        abs: 0.0,
        rel: opts.tol,
        max_intervals: opts.max_panels,
    };
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut panels = 0;
    let wrap = |e: Error| match e {
        Error::NonConvergence {
            partial,
            estimate,
            panels,
            ..
        } => Error::NonConvergence {
            context: format!("low-frequency fallback at omega = {omega:e}"),
            partial,
            estimate,
            panels,
        },
        other => other,
    };
    if direct_end > a {
        // graded breakpoints keep the quasi-pole resolved
        let breaks = panel_breaks(a, direct_end, f64::INFINITY, opts.resonance);
        for w in breaks.windows(2) {
            let est = adaptive(&kernel, w[0], w[1], tol).map_err(wrap)?;
            value += est.value;
            error += est.error;
            panels += est.intervals;
        }
    }
    let tail = adaptive_to_infinity(&kernel, direct_end, tol).map_err(wrap)?;
    Ok(OscillatoryResult {
        value: value + tail.value,
        error_estimate: error + tail.error,
        panels_used: panels + tail.intervals,
    })
}

/// Wynn's epsilon algorithm on a sequence of partial sums (odd length).
pub fn wynn_epsilon(seq: &[Complex64]) -> Complex64 {
    let n = seq.len();
    if n < 3 {
        return *seq.last().expect("empty sequence");
    }
    let mut prev = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = seq.to_vec();
    let mut best = seq[n - 1];
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff.norm() <= f64::MIN_POSITIVE * 1e10
                || diff.norm() <= 1e-15 * cur[i + 1].norm().max(cur[i].norm()) && col % 2 == 0
            {
                // the sequence has converged in this column
                return if col % 2 == 0 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        col += 1;
        prev = cur;
        cur = next;
        if col % 2 == 0 {
            let last = *cur.last().unwrap();
            if !last.re.is_finite() || !last.im.is_finite() {
                return best;
            }
            best = last;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Kernel `sin(r'q)`; the leading term comes from the first non-zero even derivative.
    Sine,
    /// Kernel `cos(r'q)`; the leading term comes from the first non-zero odd derivative.
    Cosine,
}

/// Derivatives `R^{(n)}(0)`, `n = 0..N`, of a smooth amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointData {
    pub derivatives: Vec<Complex64>,
    pub parity: Parity,
}

impl EndpointData {
    pub fn new(derivatives: Vec<Complex64>, parity: Parity) -> Result<Self> {
        if derivatives.is_empty() {
            return Err(Error::InsufficientData(
                "endpoint data needs at least one derivative".into(),
            ));
        }
        Ok(Self {
            derivatives,
            parity,
        })
    }
}

/// Leading asymptotic term `value ~ C r'^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticTerm {
    pub value: Complex64,
    pub power: i32,
    /// Derivative order that produced the term.
    pub order: usize,
}

/// Leading term of `∫_0^∞ R(q) sin(r'q) dq` or `∫_0^∞ R(q) cos(r'q) dq` as `r' → ∞`.
///
/// Repeated integration by parts gives `Σ (-1)^{n/2} R^{(n)}(0)/r'^{n+1}` over
/// even n for the sine kernel and `Σ (-1)^{(n+1)/2} R^{(n)}(0)/r'^{n+1}` over odd n
/// for the cosine kernel.
pub fn ibp_asymptotic(endpoint: &EndpointData, r_prime: f64) -> Result<AsymptoticTerm> {
    if !(r_prime > 0.0) || !r_prime.is_finite() {
        return Err(Error::OutOfRange {
            what: "r'",
            value: r_prime,
        });
    }
    let start = match endpoint.parity {
        Parity::Sine => 0,
        Parity::Cosine => 1,
    };
    for n in (start..endpoint.derivatives.len()).step_by(2) {
        let d = endpoint.derivatives[n];
        if d == Complex64::new(0.0, 0.0) {
            continue;
        }
        let half = match endpoint.parity {
            Parity::Sine => n / 2,
            Parity::Cosine => n.div_ceil(2),
        };
        let sign = if half % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(AsymptoticTerm {
            value: d * sign / r_prime.powi(n as i32 + 1),
            power: -(n as i32 + 1),
            order: n,
        });
    }
    Err(Error::FasterDecay {
        supplied: endpoint.derivatives.len(),
    })
}
