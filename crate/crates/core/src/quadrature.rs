//! Non-oscillatory quadrature building blocks: a 7/15 Gauss-Kronrod pair,
//! globally adaptive bisection on finite and semi-infinite intervals,
//! Gauss-Legendre rules of arbitrary order and compensated summation.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar types the rules can integrate.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

// Kronrod abscissae on [0, 1]; odd indices are the embedded 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
pub(crate) const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
pub(crate) const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
pub(crate) const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod estimate on `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub struct RuleEstimate<T> {
    pub value: T,
    pub error: f64,
    /// Integral of |f|, used to judge roundoff.
    pub abs_value: f64,
}

pub fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> RuleEstimate<T> {
    // nodes are placed from the nearer edge so neighbouring panels tile exactly
    let half = 0.5 * (b - a);
    let fc = f(a + half);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_value = fc.magnitude() * WGK[7];
    for (j, (&x, &wk)) in XGK[..7].iter().zip(WGK[..7].iter()).enumerate() {
        let edge = half * (1.0 - x);
        let f1 = f(a + edge);
        let f2 = f(b - edge);
        kronrod = kronrod + (f1 + f2) * wk;
        abs_value += (f1.magnitude() + f2.magnitude()) * wk;
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let diff = (kronrod - gauss).magnitude() * half.abs();
    let abs_value = abs_value * half.abs();
    // QUADPACK-style rescaling of the raw Kronrod/Gauss gap
    let error = if abs_value > 0.0 && diff > 0.0 {
        diff.min(abs_value * (200.0 * diff / abs_value).powf(1.5))
    } else {
        diff
    };
    RuleEstimate {
        value: kronrod * half,
        error: error.max(50.0 * f64::EPSILON * abs_value),
        abs_value,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 2000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(0.0, 1e-12)
    }
}

/// Globally adaptive Gauss-Kronrod integration on a finite interval.
pub fn adaptive<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Estimate<T>> {
    struct Piece<T> {
        a: f64,
        b: f64,
        est: RuleEstimate<T>,
    }
    if a == b {
        return Ok(Estimate {
            value: T::default(),
            error: 0.0,
            intervals: 0,
        });
    }
    let mut pieces = vec![Piece {
        a,
        b,
        est: gk15(&mut f, a, b),
    }];
    loop {
        let mut total = T::default();
        let mut err = 0.0;
        let mut roundoff = 0.0;
        for p in &pieces {
            total = total + p.est.value;
            err += p.est.error;
            roundoff += p.est.abs_value;
        }
        let target = tol.abs.max(tol.rel * total.magnitude());
        let floor = 100.0 * f64::EPSILON * roundoff;
        if err <= target || err <= floor {
            return Ok(Estimate {
                value: total,
                error: err,
                intervals: pieces.len(),
            });
        }
        if pieces.len() >= tol.max_intervals {
            return Err(Error::NonConvergence {
                context: format!("adaptive Gauss-Kronrod on [{a:e}, {b:e}]"),
                partial: total.to_complex(),
                estimate: err,
                panels: pieces.len(),
            });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.est.error.total_cmp(&y.1.est.error))
            .expect("nonempty");
        let worst = pieces.swap_remove(idx);
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval collapsed to adjacent floats; accept what we have
            return Ok(Estimate {
                value: total,
                error: err,
                intervals: pieces.len() + 1,
            });
        }
        pieces.push(Piece {
            a: worst.a,
            b: mid,
            est: gk15(&mut f, worst.a, mid),
        });
        pieces.push(Piece {
            a: mid,
            b: worst.b,
            est: gk15(&mut f, mid, worst.b),
        });
    }
}

/// Adaptive integration over `[a, inf)` using `x = a + u / (1 - u)`.
pub fn adaptive_to_infinity<T: QuadValue, F: FnMut(f64) -> T>(
    f: F,
    a: f64,
    tol: Tolerance,
) -> Result<Estimate<T>> {
    adaptive_to_infinity_scaled(f, a, 1.0, tol)
}

/// As [`adaptive_to_infinity`] with `x = a + L u / (1 - u)`, for integrands
/// that vary on the length scale `L`.
pub fn adaptive_to_infinity_scaled<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    length: f64,
    tol: Tolerance,
) -> Result<Estimate<T>> {
    adaptive(
        move |u: f64| {
            let one_minus = 1.0 - u;
            if one_minus <= 0.0 {
                return T::default();
            }
            let x = a + length * u / one_minus;
            f(x) * (length / (one_minus * one_minus))
        },
        0.0,
        1.0,
        tol,
    )
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed composite Gauss-Legendre rule over `[a, b]` split into `panels` equal pieces.
pub fn composite_gauss<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    rule: &(Vec<f64>, Vec<f64>),
) -> T {
    let h = (b - a) / panels as f64;
    let mut sum = T::default();
    for i in 0..panels {
        let lo = a + h * i as f64;
        let c = lo + 0.5 * h;
        for (x, w) in rule.0.iter().zip(rule.1.iter()) {
            sum = sum + f(c + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    sum
}

/// Neumaier-compensated running sum for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
    abs_sum: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: Complex64) {
        self.sum.re = neumaier_step(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier_step(self.sum.im, x.im, &mut self.comp.im);
        self.abs_sum += x.norm();
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }

    /// Sum of the magnitudes of everything added, for roundoff estimates.
    pub fn abs_sum(&self) -> f64 {
        self.abs_sum
    }
}

fn neumaier_step(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 33] {
            let rule = gauss_legendre(n);
            let wsum: f64 = rule.1.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-14, "n={n}");
            let deg = 2 * n - 1;
            let got: f64 = rule
                .0
                .iter()
                .zip(&rule.1)
                .map(|(x, w)| w * x.powi(deg as i32 - 1))
                .sum();
            let exact = if (deg - 1) % 2 == 0 {
                2.0 / deg as f64
            } else {
                0.0
            };
            assert!((got - exact).abs() < 1e-13, "n={n}: {got} vs {exact}");
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // Lorentzian of half-width 1e-4 centered in [0, 1]
        let w = 1e-4;
        let est = adaptive(
            |x: f64| w / std::f64::consts::PI / ((x - 0.5).powi(2) + w * w),
            0.0,
            1.0,
            Tolerance::new(0.0, 1e-12),
        )
        .unwrap();
        let exact = 2.0 / std::f64::consts::PI * (0.5 / w).atan();
        assert!((est.value - exact).abs() < 1e-11);
    }

    #[test]
    fn semi_infinite_exponential() {
        let est = adaptive_to_infinity(|x: f64| (-x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-13);
        let est = adaptive_to_infinity(|x: f64| 1.0 / (1.0 + x * x), 1.0, Tolerance::default())
            .unwrap();
        assert!((est.value - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let err = adaptive(
            |x: f64| (1.0 / x).sin() / x,
            1e-12,
            1.0,
            Tolerance {
                abs: 0.0,
                rel: 1e-14,
                max_intervals: 20,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { panels: 20, .. }));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(Complex64::new(1e16, 0.0));
        for _ in 0..1000 {
            s.add(Complex64::new(1.0, 0.0));
        }
        s.add(Complex64::new(-1e16, 0.0));
        assert_eq!(s.value().re, 1000.0);
    }
}
