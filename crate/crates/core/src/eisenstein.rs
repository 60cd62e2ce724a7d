//! Hyperbolic and cusp Eisenstein series as coset sums, summed shell by shell
//! in word length.

use rayon::prelude::*;

use crate::error::{merge_warnings, Error, Result, Warning};
use crate::moebius::{angle_sine, classify, HPoint, Isometry, Kind};
use crate::specfun::{real_pow, ComplexValue};
use crate::wordlang::{coset_shells, EnumBudget, SurfaceSpec};
use crate::zeta::{weighted_quotient_log, SpectralPoint, ZetaValue, DELTA_MARGIN};

/// Consecutive non-decreasing shells that trigger [`Warning::ShellStall`].
pub const STALL_SHELLS: usize = 3;

/// Default evaluation point: on the pinching axis, where `sin θ = 1`.
pub const DEFAULT_POINT: HPoint = HPoint { x: 0.0, y: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct EisensteinValue {
    pub value: ComplexValue,
    pub terms_used: usize,
    /// Magnitude of the last shell's contribution.
    pub tail_indicator: f64,
    /// Sum of each word-length shell, starting with the identity coset.
    pub shell_sums: Vec<ComplexValue>,
    pub warnings: Vec<Warning>,
}

fn sum_shells<F>(shells: &[Vec<Isometry>], term: F) -> EisensteinValue
where
    F: Fn(&Isometry) -> ComplexValue + Sync,
{
    let mut shell_sums = Vec::with_capacity(shells.len());
    let mut terms_used = 0;
    for shell in shells {
        // terms in parallel, reduction in shell order
        let terms: Vec<ComplexValue> = shell.par_iter().map(&term).collect();
        terms_used += terms.len();
        shell_sums.push(terms.iter().fold(ComplexValue::new(0.0, 0.0), |a, t| a + t));
    }
    let value = shell_sums.iter().fold(ComplexValue::new(0.0, 0.0), |a, t| a + t);
    let tail_indicator = shell_sums.last().map_or(0.0, |s| s.norm());
    let mut warnings = Vec::new();
    if stalled(&shell_sums) {
        warnings.push(Warning::ShellStall);
    }
    EisensteinValue { value, terms_used, tail_indicator, shell_sums, warnings }
}

/// True when [`STALL_SHELLS`] consecutive non-empty shells (after the identity
/// shell) fail to decrease in magnitude.
fn stalled(shell_sums: &[ComplexValue]) -> bool {
    let mags: Vec<f64> = shell_sums.iter().skip(1).map(|s| s.norm()).filter(|m| *m > 0.0).collect();
    let mut run = 0;
    for w in mags.windows(2) {
        if w[1] >= w[0] {
            run += 1;
            if run + 1 >= STALL_SHELLS {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

fn delta_warnings(spec: &SurfaceSpec, s: ComplexValue) -> Vec<Warning> {
    match spec.delta() {
        Some(d) if s.re > d.delta + DELTA_MARGIN => Vec::new(),
        Some(_) => vec![Warning::Convergence],
        None => vec![Warning::DeltaUnavailable],
    }
}

/// `E_l(z, s) = Σ_{⟨σ_l⟩ \ Γ_l} sin^s θ(γz)` over coset representatives of word
/// length `<= max_word_len`.
pub fn hyperbolic_eisenstein(
    spec: &SurfaceSpec,
    z: HPoint,
    p: &SpectralPoint,
    max_word_len: usize,
) -> Result<EisensteinValue> {
    let z = HPoint::new(z.x, z.y)?;
    let shells = coset_shells(&spec.generators, 0, max_word_len);
    let s = p.s;
    let mut out = sum_shells(&shells, |g| real_pow(angle_sine(g.apply(z)), s));
    merge_warnings(&mut out.warnings, &delta_warnings(spec, s));
    Ok(out)
}

/// Cusp Eisenstein series `E_𝔞(z, s) = Σ_{Γ_𝔞 \ Γ} Im(σ_𝔞^{-1} γ z)^s` for a free
/// group with generator `cusp_generator` generating the cusp stabiliser.
pub fn cusp_eisenstein(
    generators: &[Isometry],
    cusp_generator: usize,
    scaling: &Isometry,
    z: HPoint,
    p: &SpectralPoint,
    max_word_len: usize,
) -> Result<EisensteinValue> {
    let z = HPoint::new(z.x, z.y)?;
    let cusp = generators
        .get(cusp_generator)
        .ok_or_else(|| Error::domain(format!("no generator with index {cusp_generator}")))?;
    if classify(cusp) != Kind::Parabolic {
        return Err(Error::domain("cusp stabiliser generator is not parabolic"));
    }
    let inv = scaling.inverse();
    let normal = inv * *cusp * *scaling;
    if normal.c.abs() > 1e-9 || (normal.b.abs() - 1.0).abs() > 1e-9 {
        return Err(Error::domain("scaling matrix does not conjugate the stabiliser to z ↦ z ± 1"));
    }
    let shells = coset_shells(generators, cusp_generator, max_word_len);
    let s = p.s;
    let mut out = sum_shells(&shells, |g| real_pow((inv * *g).apply(z).y, s));
    if s.re <= 1.0 {
        merge_warnings(&mut out.warnings, &[Warning::Convergence]);
    }
    Ok(out)
}

/// Pinching length to the power `-s`.
fn pinching_weight(spec: &SurfaceSpec, s: ComplexValue) -> ComplexValue {
    real_pow(spec.pinching_length(), -s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedValue {
    /// `l^{-s} E_l(z, s)`.
    pub value: ComplexValue,
    pub eisenstein: EisensteinValue,
}

/// `l^{-s} E_l(z, s)`.
pub fn weighted_eisenstein(
    spec: &SurfaceSpec,
    z: HPoint,
    p: &SpectralPoint,
    max_word_len: usize,
) -> Result<WeightedValue> {
    let e = hyperbolic_eisenstein(spec, z, p, max_word_len)?;
    Ok(WeightedValue { value: pinching_weight(spec, p.s) * e.value, eisenstein: e })
}

/// Budgets of the starred series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarredBudget {
    /// Word-length budget of the coset sum.
    pub coset_word_len: usize,
    /// Enumeration budget of the zeta product.
    pub zeta: EnumBudget,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarredValue {
    /// `(Z_l(s) / z_l(s)) l^{-s} E_l(z, s)`.
    pub value: ComplexValue,
    /// Logarithm of `value` (zeta part continuous, Eisenstein part principal).
    pub log_value: ComplexValue,
    pub quotient: ZetaValue,
    pub eisenstein: EisensteinValue,
    pub warnings: Vec<Warning>,
}

/// `E*_l(z, s) = (Z_l(s) / z_l(s)) l^{-s} E_l(z, s)`.
pub fn starred_eisenstein(
    spec: &SurfaceSpec,
    z: HPoint,
    p: &SpectralPoint,
    budget: &StarredBudget,
) -> Result<StarredValue> {
    let weighted = weighted_eisenstein(spec, z, p, budget.coset_word_len)?;
    let quotient = weighted_quotient_log(spec, p, &budget.zeta)?;
    let value = quotient.log_value.exp() * weighted.value;
    let log_value = quotient.log_value + weighted.value.ln();
    let mut warnings = weighted.eisenstein.warnings.clone();
    merge_warnings(&mut warnings, &quotient.warnings);
    Ok(StarredValue { value, log_value, quotient, eisenstein: weighted.eisenstein, warnings })
}
