//! Funnel scattering eigenvalues `γ_k(s)`, a determinant assembler for
//! externally supplied eigen-increments, and the limit target
//! `1 / (2 sin²(πs/2))`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result, Warning};
use crate::lab::fit::{FitReport, Sample};
use crate::specfun::{is_gamma_pole, ln_1p, log_gamma, real_pow, CompensatedSum, ComplexValue};

/// Distance to a non-positive integer at which a Gamma argument counts as a pole.
pub const MODE_POLE_TOL: f64 = 1e-12;

/// Half-width of the symmetric perturbation across a removable singularity.
pub const PERTURBATION: f64 = 1e-6;

/// Allowed growth of the relative deviation from the Stirling oracle between
/// consecutive grid points.
pub const MONOTONE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringMode {
    pub k: i64,
    pub l: f64,
}

impl ScatteringMode {
    pub fn new(k: i64, l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::domain(format!("funnel length must be positive, got {l}")));
        }
        Ok(Self { k, l })
    }

    /// `k̄ = 2πik / l`.
    pub fn kbar(&self) -> ComplexValue {
        ComplexValue::new(0.0, 2.0 * PI * self.k as f64 / self.l)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaValue {
    pub value: ComplexValue,
    pub warnings: Vec<Warning>,
}

fn near_pole(z: ComplexValue) -> bool {
    z.im.abs() <= MODE_POLE_TOL && z.re < 0.5 && (z.re - z.re.round()).abs() <= MODE_POLE_TOL
}

/// Numerator and denominator Gamma arguments. The two `k̄`-dependent
/// arguments of each side are sorted so that `k` and `-k` produce the same
/// list bit for bit.
fn gamma_arguments(kbar: ComplexValue, s: ComplexValue) -> ([ComplexValue; 3], [ComplexValue; 3]) {
    let half = |z: ComplexValue| z * 0.5;
    let pair = |a: ComplexValue, b: ComplexValue| {
        if (a.im, a.re) <= (b.im, b.re) {
            [a, b]
        } else {
            [b, a]
        }
    };
    let one = ComplexValue::new(1.0, 0.0);
    let [n1, n2] = pair(half(s + one + kbar), half(s + one - kbar));
    let [d1, d2] = pair(half(2.0 - s + kbar), half(2.0 - s - kbar));
    ([0.5 - s, n1, n2], [s - 0.5, d1, d2])
}

fn log_ratio(num: &[ComplexValue; 3], den: &[ComplexValue; 3]) -> Result<ComplexValue> {
    let mut acc = CompensatedSum::new();
    for &z in num {
        acc.add(log_gamma(z)?);
    }
    for &z in den {
        acc.add(-log_gamma(z)?);
    }
    Ok(acc.value())
}

fn pole_error(z: ComplexValue) -> Error {
    Error::Pole { re: z.re, im: z.im, context: "scattering mode eigenvalue" }
}

/// Six-Gamma ratio
/// `Γ(1/2-s) Γ((s+1+k̄)/2) Γ((s+1-k̄)/2) / (Γ(s-1/2) Γ((2-s+k̄)/2) Γ((2-s-k̄)/2))`.
///
/// More poles upstairs is an error, more poles downstairs gives exactly zero
/// and a balanced count is resolved by averaging `s ± 1e-6`.
pub fn gamma_k(mode: &ScatteringMode, s: ComplexValue) -> Result<GammaValue> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::domain(format!("s must be finite, got {s}")));
    }
    let kbar = mode.kbar();
    let (num, den) = gamma_arguments(kbar, s);
    let num_poles: Vec<ComplexValue> = num.iter().copied().filter(|z| near_pole(*z)).collect();
    let den_poles = den.iter().filter(|z| near_pole(**z)).count();
    if num_poles.len() > den_poles {
        return Err(pole_error(num_poles[0]));
    }
    if den_poles > num_poles.len() {
        return Ok(GammaValue { value: ComplexValue::new(0.0, 0.0), warnings: Vec::new() });
    }
    if den_poles == 0 {
        return Ok(GammaValue { value: log_ratio(&num, &den)?.exp(), warnings: Vec::new() });
    }
    let mut total = ComplexValue::new(0.0, 0.0);
    for shift in [PERTURBATION, -PERTURBATION] {
        let (num, den) = gamma_arguments(kbar, s + shift);
        if let Some(z) = num.iter().chain(&den).find(|z| is_gamma_pole(**z)) {
            return Err(pole_error(*z));
        }
        total += log_ratio(&num, &den)?.exp();
    }
    Ok(GammaValue { value: total * 0.5, warnings: vec![Warning::RemovableSingularity] })
}

/// Large-`|k̄|` approximation `Γ(1/2-s)/Γ(s-1/2) · (π|k|/l)^{2s-1}`.
///
/// The first-order Stirling corrections of the `+k̄` and `-k̄` factors cancel,
/// so the relative error is `O((l/k)²)`.
pub fn gamma_k_stirling(mode: &ScatteringMode, s: ComplexValue) -> Result<ComplexValue> {
    if mode.k == 0 {
        return Err(Error::domain("the Stirling approximation needs k != 0"));
    }
    let half = ComplexValue::new(0.5, 0.0);
    for z in [half - s, s - half] {
        if near_pole(z) {
            return Err(pole_error(z));
        }
    }
    let t = PI * mode.k.unsigned_abs() as f64 / mode.l;
    let lead = (log_gamma(half - s)? - log_gamma(s - half)?).exp();
    Ok(lead * real_pow(t, 2.0 * s - 1.0))
}

/// One grid point of a degeneration table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeRow {
    pub l: f64,
    pub gamma: ComplexValue,
    pub oracle: ComplexValue,
    /// `|γ_k / oracle - 1|`.
    pub rel_deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegenerationReport {
    pub k: i64,
    pub rows: Vec<ModeRow>,
    /// Power-law fit of `γ_k` against `l`, with target exponent `1 - 2s`.
    pub fit: FitReport,
}

/// Tabulates `γ_k(s)` along a decreasing grid next to the Stirling oracle.
///
/// Fails with [`Error::Fit`] when the deviation from the oracle grows by more
/// than [`MONOTONE_TOL`] between consecutive points.
pub fn gamma_k_degeneration(k: i64, s: ComplexValue, l_grid: &[f64]) -> Result<DegenerationReport> {
    if k == 0 {
        return Err(Error::domain("degeneration table needs k != 0"));
    }
    if !(s.re > 0.5) {
        return Err(Error::domain(format!("degeneration table needs Re s > 1/2, got {s}")));
    }
    if l_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::domain("l grid must be strictly decreasing"));
    }
    let rows = l_grid
        .par_iter()
        .map(|&l| {
            let mode = ScatteringMode::new(k, l)?;
            let g = gamma_k(&mode, s)?;
            let oracle = gamma_k_stirling(&mode, s)?;
            Ok((ModeRow { l, gamma: g.value, oracle, rel_deviation: (g.value / oracle - 1.0).norm() }, g.warnings))
        })
        .collect::<Result<Vec<_>>>()?;
    let samples = rows.iter().map(|(r, w)| Sample::from_value(r.l, r.gamma).with_warnings(w)).collect();
    let fit = FitReport::from_samples("gamma_mode", s, None, samples, Some(1.0 - 2.0 * s))?;
    let rows: Vec<ModeRow> = rows.into_iter().map(|(r, _)| r).collect();
    let worst = rows.windows(2).map(|w| w[1].rel_deviation - w[0].rel_deviation).fold(0.0, f64::max);
    if worst > MONOTONE_TOL {
        return Err(Error::Fit { residual: worst, bound: MONOTONE_TOL });
    }
    Ok(DegenerationReport { k, rows, fit })
}

/// `1 / (2 sin²(πs/2))`.
pub fn tau_limit_target(s: ComplexValue) -> Result<ComplexValue> {
    let half = s * 0.5;
    if half.im.abs() <= MODE_POLE_TOL && (half.re - half.re.round()).abs() <= MODE_POLE_TOL {
        return Err(Error::Pole { re: s.re, im: s.im, context: "tau limit target at an even integer" });
    }
    let sin = (half * PI).sin();
    Ok(1.0 / (2.0 * sin * sin))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelDet {
    pub value: ComplexValue,
    /// `Σ log(1 + λ_k)` with principal logarithms.
    pub log_value: ComplexValue,
    pub terms: usize,
    /// Caller-supplied bound on `Σ_{k > cap} |λ_k|`.
    pub remainder: Option<f64>,
}

/// `Π_{k <= cap} (1 + λ_k)` accumulated in log space.
///
/// The increments are sorted before summation so any permutation of the
/// input gives the same bits.
pub fn rel_det_partial(lambdas: &[ComplexValue], cap: usize, tail: Option<f64>) -> Result<RelDet> {
    let mut used: Vec<ComplexValue> = lambdas.iter().take(cap).copied().collect();
    if let Some(l) = used.iter().find(|l| !(l.re.is_finite() && l.im.is_finite())) {
        return Err(Error::domain(format!("non-finite eigen-increment {l}")));
    }
    if let Some(l) = used.iter().find(|l| (1.0 + **l).norm() < 1e-14) {
        return Err(Error::domain(format!("factor 1 + λ vanishes at λ = {l}")));
    }
    used.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut acc = CompensatedSum::new();
    for l in &used {
        acc.add(ln_1p(*l));
    }
    let log_value = acc.value();
    Ok(RelDet { value: log_value.exp(), log_value, terms: used.len(), remainder: tail })
}

/// CSV table with columns `k,l,s_re,s_im,gamma_re,gamma_im,abs_gamma`.
pub fn write_mode_table<W: std::io::Write>(rows: &[(ScatteringMode, ComplexValue, ComplexValue)], out: W) -> Result<()> {
    use crate::fmt17;
    use crate::lab::report::csv_error;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "l", "s_re", "s_im", "gamma_re", "gamma_im", "abs_gamma"])
        .map_err(csv_error)?;
    for (mode, s, g) in rows {
        w.write_record([
            mode.k.to_string(),
            fmt17(mode.l),
            fmt17(s.re),
            fmt17(s.im),
            fmt17(g.re),
            fmt17(g.im),
            fmt17(g.norm()),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
