//! Local zeta factors and truncated Selberg zeta products.
//!
//! Every value is carried as a logarithm; exponentiation happens only when a
//! caller reports a final number.

use rayon::prelude::*;

use crate::error::{merge_warnings, Error, Result, Warning};
use crate::lab::fit::{self, FitReport, Sample};
use crate::specfun::{log1m_exp_complex, CompensatedSum, ComplexValue};
use crate::wordlang::{enumerate_conj_classes, ConjClass, EnumBudget, SurfaceSpec};

/// Margin above the estimated `δ` required before a product is trusted.
pub const DELTA_MARGIN: f64 = 0.05;

/// Default tail tolerance of a local factor.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Residual bound of the `z_l(1-s) / z_l(s)` exponent fit.
pub const Z_RATIO_MAX_RESIDUAL: f64 = 0.05;

/// Spectral parameter with the truncation controls of the local factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint {
    pub s: ComplexValue,
    /// Minimum number of factors of each local product.
    pub trunc_k: usize,
    /// Bound on the neglected tail of each local product.
    pub tail_tol: f64,
}

impl SpectralPoint {
    pub fn new(s: ComplexValue, trunc_k: usize, tail_tol: f64) -> Result<Self> {
        if !(s.re > 0.0) || !s.im.is_finite() || !s.re.is_finite() {
            return Err(Error::domain(format!("spectral parameter needs Re s > 0, got {s}")));
        }
        if trunc_k == 0 {
            return Err(Error::domain("trunc_k must be at least 1"));
        }
        if !(tail_tol > 0.0) || !tail_tol.is_finite() {
            return Err(Error::domain(format!("tail_tol must be positive, got {tail_tol}")));
        }
        Ok(Self { s, trunc_k, tail_tol })
    }

    /// `s` with `trunc_k = 1` and the default tail tolerance.
    pub fn at(s: ComplexValue) -> Result<Self> {
        Self::new(s, 1, DEFAULT_TAIL_TOL)
    }

    pub fn real(s: f64) -> Result<Self> {
        Self::at(ComplexValue::new(s, 0.0))
    }
}

/// `log z(l_c, s)` together with its truncation data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalFactor {
    pub value: ComplexValue,
    /// Number of factors `k = 0 .. terms - 1` multiplied.
    pub terms: usize,
    /// Bound on `|log z - value|`.
    pub tail_bound: f64,
}

/// Bound on `2 Σ_{k >= n} |log(1 - e^{-(s+k) l})|` with `σ = Re s`.
fn local_tail(l: f64, sigma: f64, n: usize) -> f64 {
    let q = (-(sigma + n as f64) * l).exp();
    2.0 * q / ((-(-l).exp_m1()) * (1.0 - q))
}

/// `log Π_{k>=0} (1 - e^{-(s+k) l_c})^2`, truncated once the tail bound
/// drops below `p.tail_tol / 2` (and never before `p.trunc_k` factors).
pub fn local_factor_log(l_c: f64, p: &SpectralPoint) -> Result<LocalFactor> {
    if !(l_c > 0.0) || !l_c.is_finite() {
        return Err(Error::domain(format!("geodesic length must be positive, got {l_c}")));
    }
    let sigma = p.s.re;
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("local factor needs Re s > 0, got {}", p.s)));
    }
    // half of the tolerance is left for rounding in the sum of n logs
    let target = 0.5 * p.tail_tol;
    // e^{-(σ+n) l} < target (1 - e^{-l}) / 2, then adjust upwards
    let guess = ((2.0 / (target * -(-l_c).exp_m1())).ln() / l_c - sigma).ceil().max(0.0);
    let mut n = (guess as usize).max(p.trunc_k);
    while local_tail(l_c, sigma, n) >= target {
        n += 1;
    }
    let mut sum = CompensatedSum::new();
    for k in 0..n {
        sum.add(log1m_exp_complex((p.s + k as f64) * l_c));
    }
    Ok(LocalFactor { value: sum.value() * 2.0, terms: n, tail_bound: local_tail(l_c, sigma, n) })
}

/// Truncated `log Z(s)` over an enumerated primitive length spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct ZetaValue {
    pub log_value: ComplexValue,
    /// Heuristic bound on the contribution of classes above the cutoff.
    pub tail_bound: f64,
    pub classes_used: usize,
    pub length_cutoff: f64,
    pub warnings: Vec<Warning>,
}

impl ZetaValue {
    pub fn value(&self) -> ComplexValue {
        self.log_value.exp()
    }
}

/// Log local factors of the classes in order.
pub fn class_factors(classes: &[ConjClass], p: &SpectralPoint) -> Result<Vec<ComplexValue>> {
    classes
        .par_iter()
        .map(|c| local_factor_log(c.length, p).map(|f| f.value))
        .collect()
}

/// Running sums of the log local factors in class order.
pub fn partial_sums(classes: &[ConjClass], p: &SpectralPoint) -> Result<Vec<ComplexValue>> {
    let factors = class_factors(classes, p)?;
    let mut acc = ComplexValue::new(0.0, 0.0);
    Ok(factors
        .into_iter()
        .map(|f| {
            acc += f;
            acc
        })
        .collect())
}

/// Heuristic tail `Σ_{ℓ > L} |log z(ℓ, s)|` from the fitted counting function
/// `N(T) ≈ e^c e^{δT} / T`, whose density is at most `e^c δ e^{δT} / T`.
fn heuristic_tail(spec: &SurfaceSpec, sigma: f64, cutoff: f64, classes: &[ConjClass]) -> (f64, Vec<Warning>) {
    if !cutoff.is_finite() {
        return (0.0, Vec::new());
    }
    if spec.rank() == 1 {
        // the only primitive class is the boundary itself
        let l = spec.boundary_lengths[0];
        if classes.is_empty() {
            let bound = local_tail(l, sigma, 0);
            return (bound, Vec::new());
        }
        return (0.0, Vec::new());
    }
    let Some(fit) = spec.delta() else {
        return (f64::MAX, vec![Warning::DeltaUnavailable]);
    };
    let mut warnings = Vec::new();
    if sigma <= fit.delta + DELTA_MARGIN {
        warnings.push(Warning::Convergence);
    }
    let gap = sigma - fit.delta;
    if !(gap > 0.0) {
        return (f64::MAX, warnings);
    }
    let per_class = 1.0 / ((-(-cutoff).exp_m1()) * (-(-sigma * cutoff).exp_m1()));
    let tail = 2.0 * per_class * fit.log_scale.exp() * fit.delta * (-gap * cutoff).exp() / (gap * cutoff);
    (tail.min(f64::MAX), warnings)
}

fn zeta_over(
    spec: &SurfaceSpec,
    p: &SpectralPoint,
    budget: &EnumBudget,
    skip_pinching: bool,
) -> Result<ZetaValue> {
    let spectrum = enumerate_conj_classes(spec, budget)?;
    let pinching = crate::wordlang::Word::generator_power(0, 1);
    let factors = class_factors(&spectrum.classes, p)?;
    let mut log_value = ComplexValue::new(0.0, 0.0);
    for (c, f) in spectrum.classes.iter().zip(&factors) {
        if skip_pinching && c.word == pinching {
            continue;
        }
        log_value += *f;
    }
    let (tail_bound, mut warnings) = heuristic_tail(spec, p.s.re, budget.max_length, &spectrum.classes);
    merge_warnings(&mut warnings, &spectrum.warnings);
    Ok(ZetaValue {
        log_value,
        tail_bound,
        classes_used: spectrum.classes.len(),
        length_cutoff: budget.max_length,
        warnings,
    })
}

/// `log Z_l(s)` summed over the primitive classes within `budget`.
pub fn selberg_zeta_log(spec: &SurfaceSpec, p: &SpectralPoint, budget: &EnumBudget) -> Result<ZetaValue> {
    zeta_over(spec, p, budget, false)
}

/// `log (Z_l(s) / z_l(s))`: the product over every class except the pinching geodesic.
pub fn weighted_quotient_log(spec: &SurfaceSpec, p: &SpectralPoint, budget: &EnumBudget) -> Result<ZetaValue> {
    zeta_over(spec, p, budget, true)
}

/// Measured exponent of `z_l(1 - s) / z_l(s)` as `l → 0`, for real `s ∈ (0, 1/2]`.
pub fn z_ratio_exponent(s: f64, l_grid: &[f64]) -> Result<FitReport> {
    if !(s > 0.0 && s <= 0.5) {
        return Err(Error::domain(format!("z-ratio exponent needs real s in (0, 1/2], got {s}")));
    }
    if l_grid.len() < 6 {
        return Err(Error::domain("z-ratio exponent needs at least 6 grid points"));
    }
    if let Some(l) = l_grid.iter().find(|&&l| !(l > 1e-4 && l < 0.5)) {
        return Err(Error::domain(format!("grid point {l} outside (1e-4, 0.5)")));
    }
    let lo = SpectralPoint::real(s)?;
    let hi = SpectralPoint::real(1.0 - s)?;
    let samples = l_grid
        .par_iter()
        .map(|&l| {
            let log_ratio = local_factor_log(l, &hi)?.value - local_factor_log(l, &lo)?.value;
            Ok(Sample::from_log(l, log_ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    let s_c = ComplexValue::new(s, 0.0);
    let report = FitReport::from_samples("z_ratio", s_c, None, samples, Some(s_c * 4.0 - 2.0))?;
    fit::check_residual(&report, Z_RATIO_MAX_RESIDUAL)?;
    Ok(report)
}
