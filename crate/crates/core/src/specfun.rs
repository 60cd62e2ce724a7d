//! Complex special functions used by the zeta and scattering formulas.
//!
//! `log_gamma` uses the Stirling series with ten Bernoulli terms
//! (B_2 .. B_20, exact rationals, see `STIRLING`) after shifting the argument
//! to `|z| >= 15` with the recurrence `Γ(z) = Γ(z + 1) / z`. Arguments with
//! `Re z < 0` go through the reflection formula first. At `|z| = 15` the
//! first omitted term of the series is below `1e-19` even on the imaginary
//! axis, so the rounding of the shift sum dominates the error budget.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used for the spectral variable and all function values.
pub type ComplexValue = Complex64;

const TAU: f64 = 2.0 * PI;
const LN_PI: f64 = 1.144_729_885_849_400_2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Tolerance for recognising a non-positive integer argument as a pole.
pub const POLE_TOL: f64 = 1e-14;

const STIRLING_SHIFT: f64 = 15.0;

/// `B_{2n} / (2n (2n - 1))` for `n = 1..=10`.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// True when `z` lies within [`POLE_TOL`] of a non-positive integer.
pub fn is_gamma_pole(z: ComplexValue) -> bool {
    z.im.abs() <= POLE_TOL && z.re < 0.5 && (z.re - z.re.round()).abs() <= POLE_TOL
}

/// Principal-branch `log Γ(z)`: the imaginary part is reduced to `(-π, π]`.
pub fn log_gamma(z: ComplexValue) -> Result<ComplexValue> {
    let v = log_gamma_continued(z)?;
    Ok(ComplexValue::new(v.re, principal_angle(v.im)))
}

/// `log Γ(z)` on the branch obtained by continuing the Stirling series with
/// principal logarithms of the recurrence factors.
///
/// Agrees with [`log_gamma`] modulo `2πi`; the imaginary part is not reduced,
/// which keeps sums and differences of several log-Gamma values free of
/// artificial jumps for large `|Im z|`.
pub fn log_gamma_continued(z: ComplexValue) -> Result<ComplexValue> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain(format!("log_gamma of non-finite argument {z}")));
    }
    if is_gamma_pole(z) {
        return Err(Error::Pole { re: z.re, im: z.im, context: "log_gamma" });
    }
    if z.re < 0.0 {
        // Γ(z) Γ(1 - z) = π / sin(πz)
        let reflected = stirling_shifted(ComplexValue::new(1.0, 0.0) - z);
        return Ok(ComplexValue::new(LN_PI, 0.0) - ln_sin_pi(z) - reflected);
    }
    Ok(stirling_shifted(z))
}

fn stirling_shifted(mut z: ComplexValue) -> ComplexValue {
    debug_assert!(z.re >= 0.0);
    let mut shift = ComplexValue::new(0.0, 0.0);
    while z.norm() < STIRLING_SHIFT {
        shift += z.ln();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = ComplexValue::new(0.0, 0.0);
    let mut power = inv;
    for c in STIRLING {
        series += power * c;
        power *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series - shift
}

/// `log sin(πz)` modulo `2πi`, stable for large `|Im z|`.
fn ln_sin_pi(z: ComplexValue) -> ComplexValue {
    // sin(π(z - 2m)) = sin(πz); the reduction is exact in floating point.
    let x = z.re - 2.0 * (z.re / 2.0).round();
    let z = ComplexValue::new(x, z.im);
    let i = ComplexValue::i();
    if z.im.abs() < 15.0 {
        (z * PI).sin().ln()
    } else if z.im > 0.0 {
        // sin(πz) = (i/2) e^{-iπz} (1 - e^{2iπz})
        ComplexValue::new(-LN_2, PI / 2.0) - i * PI * z + ln_1p(-(i * TAU * z).exp())
    } else {
        // sin(πz) = (-i/2) e^{iπz} (1 - e^{-2iπz})
        ComplexValue::new(-LN_2, -PI / 2.0) + i * PI * z + ln_1p(-(-i * TAU * z).exp())
    }
}

/// Reduce an angle to `(-π, π]`.
pub fn principal_angle(theta: f64) -> f64 {
    let r = (theta + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Complex `log(1 + v)`, accurate for small `|v|`.
pub fn ln_1p(v: ComplexValue) -> ComplexValue {
    if v.norm() < 0.5 {
        let re = 0.5 * (2.0 * v.re + v.norm_sqr()).ln_1p();
        let im = v.im.atan2(1.0 + v.re);
        ComplexValue::new(re, im)
    } else {
        (v + 1.0).ln()
    }
}

/// Complex `exp(u) - 1`, accurate for small `|u|`.
pub fn exp_m1(u: ComplexValue) -> ComplexValue {
    let half_sin = (u.im / 2.0).sin();
    let re = u.re.exp_m1() * u.im.cos() - 2.0 * half_sin * half_sin;
    let im = u.re.exp() * u.im.sin();
    ComplexValue::new(re, im)
}

/// `base^s = exp(s log base)` on the real-logarithm branch.
///
/// The base must be a positive real; every library call site passes one.
pub fn complex_pow(base: ComplexValue, s: ComplexValue) -> Result<ComplexValue> {
    if base.im != 0.0 || !(base.re > 0.0) || !base.re.is_finite() {
        return Err(Error::domain(format!("complex_pow needs a positive real base, got {base}")));
    }
    Ok(real_pow(base.re, s))
}

/// [`complex_pow`] for a base already known to be a positive real.
#[inline]
pub fn real_pow(base: f64, s: ComplexValue) -> ComplexValue {
    debug_assert!(base > 0.0);
    if s.im == 0.0 {
        return ComplexValue::new(base.powf(s.re), 0.0);
    }
    (s * base.ln()).exp()
}

/// `log(1 - e^{-x})` for `x > 0`.
pub fn log1m_exp(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("log1m_exp needs x > 0, got {x}")));
    }
    Ok(if x <= LN_2 { (-(-x).exp_m1()).ln() } else { (-(-x).exp()).ln_1p() })
}

/// Complex `log(1 - e^{-u})` for `Re u > 0`.
///
/// Reduces to [`log1m_exp`] bit for bit when `u` is real.
pub fn log1m_exp_complex(u: ComplexValue) -> ComplexValue {
    debug_assert!(u.re > 0.0);
    if u.im == 0.0 {
        let x = u.re;
        let v = if x <= LN_2 { (-(-x).exp_m1()).ln() } else { (-(-x).exp()).ln_1p() };
        return ComplexValue::new(v, 0.0);
    }
    if u.re > LN_2 {
        ln_1p(-(-u).exp())
    } else {
        (-exp_m1(-u)).ln()
    }
}

/// Neumaier-compensated running sum of complex values.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: ComplexValue,
    comp: ComplexValue,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: ComplexValue) {
        self.sum.re = neumaier_step(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier_step(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn value(&self) -> ComplexValue {
        self.sum + self.comp
    }
}

#[inline]
fn neumaier_step(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}
