//! Complex power-law fits `f(l) ≈ C l^α` on `(log l, log f)`.

use std::f64::consts::TAU;

use crate::error::{merge_warnings, Error, Result, Warning};
use crate::moebius::HPoint;
use crate::specfun::ComplexValue;

/// Minimum number of samples of a valid fit.
pub const MIN_SAMPLES: usize = 4;

/// One point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub l: f64,
    pub value: ComplexValue,
    /// Logarithm of `value`; made continuous along the grid before fitting.
    pub log_value: ComplexValue,
    /// Truncation error indicator of `value`, when the evaluator provides one.
    pub error_estimate: Option<f64>,
    /// Exponent of convergence of the surface at this `l`, when it was needed.
    pub delta: Option<f64>,
    pub warnings: Vec<Warning>,
}

impl Sample {
    pub fn from_value(l: f64, value: ComplexValue) -> Self {
        Self { l, value, log_value: value.ln(), error_estimate: None, delta: None, warnings: Vec::new() }
    }

    pub fn from_log(l: f64, log_value: ComplexValue) -> Self {
        Self { l, value: log_value.exp(), log_value, error_estimate: None, delta: None, warnings: Vec::new() }
    }

    pub fn with_error_estimate(mut self, e: f64) -> Self {
        self.error_estimate = Some(e);
        self
    }

    pub fn with_delta(mut self, delta: Option<f64>) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_warnings(mut self, warnings: &[Warning]) -> Self {
        merge_warnings(&mut self.warnings, warnings);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validity {
    /// Computed in a regime where the underlying sums converge and no warning fired.
    Verified,
    /// Carries warnings or lies in the regime where only exploratory numbers are possible.
    Exploratory,
}

impl Validity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Validity::Verified => "verified",
            Validity::Exploratory => "exploratory",
        }
    }
}

/// Least-squares line through `(log l, log f)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub alpha: ComplexValue,
    pub log_c: ComplexValue,
    /// Root-mean-square deviation of `log f` from the fitted line.
    pub residual: f64,
}

/// Fits `log f = log C + α log l` by complex ordinary least squares.
pub fn fit_power_law(points: &[(f64, ComplexValue)]) -> Result<PowerLawFit> {
    if points.len() < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "power-law fit needs at least {MIN_SAMPLES} samples, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(l, y)| !(*l > 0.0) || !y.re.is_finite() || !y.im.is_finite()) {
        return Err(Error::domain("power-law fit needs positive abscissae and finite logs"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(l, _)| l.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<ComplexValue>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("power-law fit needs at least two distinct abscissae"));
    }
    let sxy: ComplexValue = xs.iter().zip(points).map(|(x, p)| (p.1 - my) * (x - mx)).sum();
    let alpha = sxy / sxx;
    let log_c = my - alpha * mx;
    let rss: f64 = xs.iter().zip(points).map(|(x, p)| (p.1 - log_c - alpha * x).norm_sqr()).sum();
    Ok(PowerLawFit { alpha, log_c, residual: (rss / n).sqrt() })
}

/// Sorts by decreasing `l` and shifts each imaginary part by a multiple of
/// `2π` so that consecutive phases differ by at most `π`.
pub fn unwrap_phases(samples: &mut [Sample]) {
    samples.sort_by(|a, b| b.l.total_cmp(&a.l));
    for i in 1..samples.len() {
        let prev = samples[i - 1].log_value.im;
        let cur = samples[i].log_value.im;
        let turns = ((prev - cur) / TAU).round();
        samples[i].log_value.im = cur + turns * TAU;
    }
}

/// Largest jump `|f(l_{i+1}) - f(l_i)|` between consecutive samples; `None`
/// below three samples.
pub fn cauchy_diagnostic(values: &[(f64, ComplexValue)]) -> Option<f64> {
    if values.len() < 3 {
        return None;
    }
    Some(values.windows(2).map(|w| (w[1].1 - w[0].1).norm()).fold(0.0, f64::max))
}

/// Fitted exponent of one swept quantity at one `(s, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub quantity: String,
    pub s: ComplexValue,
    pub z: Option<HPoint>,
    /// Sorted by decreasing `l`.
    pub samples: Vec<Sample>,
    pub alpha: ComplexValue,
    pub log_c: ComplexValue,
    pub residual: f64,
    pub target_alpha: Option<ComplexValue>,
    pub cauchy: Option<f64>,
    pub validity: Validity,
    pub warnings: Vec<Warning>,
}

impl FitReport {
    /// Unwraps, fits and collects the sample warnings.
    pub fn from_samples(
        quantity: &str,
        s: ComplexValue,
        z: Option<HPoint>,
        mut samples: Vec<Sample>,
        target_alpha: Option<ComplexValue>,
    ) -> Result<Self> {
        unwrap_phases(&mut samples);
        let points: Vec<(f64, ComplexValue)> = samples.iter().map(|p| (p.l, p.log_value)).collect();
        let fit = fit_power_law(&points)?;
        let values: Vec<(f64, ComplexValue)> = samples.iter().map(|p| (p.l, p.value)).collect();
        let mut warnings = Vec::new();
        for p in &samples {
            merge_warnings(&mut warnings, &p.warnings);
        }
        let validity = if warnings.is_empty() { Validity::Verified } else { Validity::Exploratory };
        Ok(Self {
            quantity: quantity.to_string(),
            s,
            z,
            samples,
            alpha: fit.alpha,
            log_c: fit.log_c,
            residual: fit.residual,
            target_alpha,
            cauchy: cauchy_diagnostic(&values),
            validity,
            warnings,
        })
    }

    /// Adds a report-level warning and demotes the report to exploratory.
    pub fn demote(&mut self, w: Warning) {
        merge_warnings(&mut self.warnings, &[w]);
        self.validity = Validity::Exploratory;
    }
}

/// [`Error::Fit`] when the residual exceeds `bound`.
pub fn check_residual(report: &FitReport, bound: f64) -> Result<()> {
    if report.residual > bound {
        return Err(Error::Fit { residual: report.residual, bound });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexValue {
        ComplexValue::new(re, im)
    }

    #[test]
    fn exact_square_law() {
        let pts: Vec<(f64, ComplexValue)> =
            [0.8, 0.4, 0.2, 0.1, 0.05].iter().map(|&l: &f64| (l, c((l * l).ln(), 0.0))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.alpha - c(2.0, 0.0)).norm() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn rotating_phase_is_unwrapped() {
        // f(l) = l^i completes several turns over the grid
        let grid: Vec<f64> = (0..40).map(|j| 10f64.powf(-0.2 * j as f64)).collect();
        let samples: Vec<Sample> =
            grid.iter().map(|&l| Sample::from_value(l, (c(0.0, 1.0) * l.ln()).exp())).collect();
        let r = FitReport::from_samples("synthetic", c(1.0, 0.0), None, samples, None).unwrap();
        assert!((r.alpha - c(0.0, 1.0)).norm() < 1e-8, "{}", r.alpha);
    }

    #[test]
    fn cauchy_examples() {
        assert_eq!(cauchy_diagnostic(&[(0.4, c(1.0, 0.0)), (0.2, c(1.0, 0.0)), (0.1, c(1.0, 0.0))]), Some(0.0));
        let d = cauchy_diagnostic(&[(0.4, c(0.4, 0.0)), (0.2, c(0.2, 0.0)), (0.1, c(0.1, 0.0))]).unwrap();
        assert!((d - 0.2).abs() < 1e-16);
        assert_eq!(cauchy_diagnostic(&[(0.4, c(0.4, 0.0))]), None);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        assert!(fit_power_law(&[(0.1, c(0.0, 0.0)); 3]).is_err());
        assert!(fit_power_law(&[(0.1, c(0.0, 0.0)); 5]).is_err());
        assert!(fit_power_law(&[(0.1, c(0.0, 0.0)), (0.2, c(1.0, 0.0)), (0.0, c(0.0, 0.0)), (0.3, c(0.0, 0.0))]).is_err());
    }

    #[test]
    fn residual_gate() {
        let samples: Vec<Sample> =
            [0.8, 0.4, 0.2, 0.1].iter().zip([1.0, 5.0, 0.3, 2.0]).map(|(&l, v)| Sample::from_value(l, c(v, 0.0))).collect();
        let r = FitReport::from_samples("noise", c(1.0, 0.0), None, samples, None).unwrap();
        assert!(matches!(check_residual(&r, 1e-3), Err(Error::Fit { .. })));
        assert!(check_residual(&r, 10.0).is_ok());
    }
}
