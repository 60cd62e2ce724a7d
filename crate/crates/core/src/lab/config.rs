//! Sweep configuration (JSON) and the parsers for command-line values.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lab::fit::{Sample, MIN_SAMPLES};
use crate::moebius::HPoint;
use crate::specfun::ComplexValue;
use crate::wordlang::EnumBudget;
use crate::zeta::DEFAULT_TAIL_TOL;

pub const DEFAULT_L_GRID: [f64; 5] = [0.8, 0.4, 0.2, 0.1, 0.05];
pub const DEFAULT_S_GRID: [f64; 4] = [2.0, 1.5, 1.0, 0.75];
/// Values of `s` in `(0, 1/2)`, only ever reported as exploratory.
pub const EXPLORATORY_S_GRID: [f64; 2] = [0.25, 0.4];
pub const DEFAULT_Z: HPoint = HPoint { x: 0.3, y: 1.2 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    WeightedEisenstein,
    StarredEisenstein,
    WeightedQuotient,
    ZRatio,
    GammaMode,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::WeightedEisenstein,
        Quantity::StarredEisenstein,
        Quantity::WeightedQuotient,
        Quantity::ZRatio,
        Quantity::GammaMode,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::WeightedEisenstein => "weighted_eisenstein",
            Quantity::StarredEisenstein => "starred_eisenstein",
            Quantity::WeightedQuotient => "weighted_quotient",
            Quantity::ZRatio => "z_ratio",
            Quantity::GammaMode => "gamma_mode",
        }
    }

    /// Whether the value depends on the evaluation point `z`.
    pub fn uses_z(&self) -> bool {
        matches!(self, Quantity::WeightedEisenstein | Quantity::StarredEisenstein)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s.trim())
            .ok_or_else(|| Error::config(format!("unknown quantity {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    #[default]
    Jsonl,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::config(format!("unknown format {other:?}, expected csv or jsonl"))),
        }
    }
}

/// Fixed boundary lengths of the pants family; the first boundary is pinched.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceTemplate {
    pub l2: f64,
    pub l3: f64,
}

impl Default for SurfaceTemplate {
    fn default() -> Self {
        Self { l2: 1.0, l3: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    /// Word length of the coset sums.
    pub max_word_len: usize,
    /// Geodesic length cutoff of the zeta products.
    pub max_length: f64,
    /// Word length of the zeta enumeration; derived from `max_length` when absent.
    pub zeta_word_len: Option<usize>,
    pub trunc_k: usize,
    pub tail_tol: f64,
    pub class_cap: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_word_len: 8,
            max_length: 10.0,
            zeta_word_len: None,
            trunc_k: 1,
            tail_tol: DEFAULT_TAIL_TOL,
            class_cap: EnumBudget::DEFAULT_CLASS_CAP,
        }
    }
}

/// Word-length ceiling when the zeta budget is derived from the length cutoff.
pub const MAX_DERIVED_WORD_LEN: usize = 400;

/// A spectral parameter in JSON: a number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
enum SValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<SValue> for ComplexValue {
    fn from(v: SValue) -> Self {
        match v {
            SValue::Real(x) => ComplexValue::new(x, 0.0),
            SValue::Pair([re, im]) => ComplexValue::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    surface: SurfaceTemplate,
    l_grid: Option<Vec<f64>>,
    s_grid: Option<Vec<SValue>>,
    z_points: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    budgets: Budgets,
    quantities: Option<Vec<Quantity>>,
    #[serde(default = "default_mode_k")]
    mode_k: i64,
    max_residual: Option<f64>,
    output: Option<PathBuf>,
    #[serde(default)]
    format: Format,
    #[serde(default)]
    threads: usize,
}

fn default_mode_k() -> i64 {
    1
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub surface: SurfaceTemplate,
    /// Strictly decreasing pinching lengths in `(0, 2]`.
    pub l_grid: Vec<f64>,
    pub s_grid: Vec<ComplexValue>,
    pub z_points: Vec<HPoint>,
    pub budgets: Budgets,
    pub quantities: Vec<Quantity>,
    /// Fourier mode of the `gamma_mode` quantity.
    pub mode_k: i64,
    /// Fits above this RMS residual fail the sweep.
    pub max_residual: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Worker count; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            surface: SurfaceTemplate::default(),
            l_grid: DEFAULT_L_GRID.to_vec(),
            s_grid: DEFAULT_S_GRID
                .iter()
                .chain(&EXPLORATORY_S_GRID)
                .map(|&s| ComplexValue::new(s, 0.0))
                .collect(),
            z_points: vec![DEFAULT_Z],
            budgets: Budgets::default(),
            quantities: vec![Quantity::WeightedEisenstein, Quantity::StarredEisenstein],
            mode_k: 1,
            max_residual: None,
            output: None,
            format: Format::Jsonl,
            threads: 0,
        }
    }
}

impl SweepConfig {
    /// Parses and validates a JSON document; absent fields take the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        let d = SweepConfig::default();
        let z_points = match raw.z_points {
            Some(zs) => zs.into_iter().map(|[x, y]| point(x, y)).collect::<Result<_>>()?,
            None => d.z_points,
        };
        let cfg = SweepConfig {
            surface: raw.surface,
            l_grid: raw.l_grid.unwrap_or(d.l_grid),
            s_grid: raw.s_grid.map(|v| v.into_iter().map(Into::into).collect()).unwrap_or(d.s_grid),
            z_points,
            budgets: raw.budgets,
            quantities: raw.quantities.unwrap_or(d.quantities),
            mode_k: raw.mode_k,
            max_residual: raw.max_residual,
            output: raw.output,
            format: raw.format,
            threads: raw.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let SurfaceTemplate { l2, l3 } = self.surface;
        if !(l2 > 0.0 && l2.is_finite() && l3 > 0.0 && l3.is_finite()) {
            return Err(Error::config(format!("surface lengths must be positive, got l2 = {l2}, l3 = {l3}")));
        }
        if self.l_grid.len() < MIN_SAMPLES {
            return Err(Error::config(format!("l_grid needs at least {MIN_SAMPLES} points")));
        }
        if let Some(l) = self.l_grid.iter().find(|&&l| !(l > 0.0 && l <= 2.0)) {
            return Err(Error::config(format!("l_grid value {l} outside (0, 2]")));
        }
        if self.l_grid.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::config("l_grid must be strictly decreasing"));
        }
        if self.s_grid.is_empty() {
            return Err(Error::config("s_grid is empty"));
        }
        if let Some(s) = self.s_grid.iter().find(|s| !(s.re > 0.0 && s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::config(format!("s_grid value {s} needs finite s with Re s > 0")));
        }
        if self.quantities.contains(&Quantity::ZRatio) {
            if let Some(s) = self.s_grid.iter().find(|s| !(s.re < 1.0)) {
                return Err(Error::config(format!("z_ratio needs 0 < Re s < 1, got {s}")));
            }
        }
        if self.quantities.is_empty() {
            return Err(Error::config("no quantity selected"));
        }
        if self.quantities.iter().any(Quantity::uses_z) && self.z_points.is_empty() {
            return Err(Error::config("z_points is empty"));
        }
        let b = &self.budgets;
        if b.max_word_len == 0 || b.trunc_k == 0 || b.class_cap == 0 || b.zeta_word_len == Some(0) {
            return Err(Error::config("budgets must be positive"));
        }
        if !(b.max_length > 0.0 && b.max_length.is_finite()) {
            return Err(Error::config(format!("max_length must be positive, got {}", b.max_length)));
        }
        if !(b.tail_tol > 0.0 && b.tail_tol.is_finite()) {
            return Err(Error::config(format!("tail_tol must be positive, got {}", b.tail_tol)));
        }
        if let Some(r) = self.max_residual {
            if !(r >= 0.0) {
                return Err(Error::config(format!("max_residual must be non-negative, got {r}")));
            }
        }
        if self.quantities.contains(&Quantity::GammaMode) && self.mode_k == 0 {
            return Err(Error::config("gamma_mode needs mode_k != 0"));
        }
        Ok(())
    }
}

fn point(x: f64, y: f64) -> Result<HPoint> {
    HPoint::new(x, y).map_err(|_| Error::config(format!("z = ({x}, {y}) is not in the upper half-plane")))
}

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::config(format!("bad number {t:?} in {what} {text:?}")))
        })
        .collect()
}

/// `"l1,l2,l3"`.
pub fn parse_surface(text: &str) -> Result<[f64; 3]> {
    let v = parse_floats(text, "surface")?;
    match v[..] {
        [a, b, c] if a > 0.0 && b > 0.0 && c > 0.0 => Ok([a, b, c]),
        _ => Err(Error::config(format!("surface must be three positive lengths l1,l2,l3, got {text:?}"))),
    }
}

/// `"re"` or `"re,im"`.
pub fn parse_complex(text: &str) -> Result<ComplexValue> {
    match parse_floats(text, "complex value")?[..] {
        [re] => Ok(ComplexValue::new(re, 0.0)),
        [re, im] => Ok(ComplexValue::new(re, im)),
        _ => Err(Error::config(format!("expected re or re,im, got {text:?}"))),
    }
}

/// `"x,y"` with `y > 0`.
pub fn parse_point(text: &str) -> Result<HPoint> {
    match parse_floats(text, "point")?[..] {
        [x, y] => point(x, y),
        _ => Err(Error::config(format!("expected x,y, got {text:?}"))),
    }
}

/// Comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    parse_floats(text, "list")
}

/// Samples from CSV with header `l,re,im` (value, not logarithm).
pub fn parse_samples_csv(text: &str) -> Result<Vec<Sample>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::config(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["l", "re", "im"] {
        return Err(Error::config(format!("samples header must be l,re,im, got {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::config(e.to_string()))?;
        let nums: Vec<f64> = rec
            .iter()
            .map(|t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::config(format!("row {}: bad number", i + 1)))?;
        let [l, re, im] = nums[..] else {
            return Err(Error::config(format!("row {}: expected 3 fields", i + 1)));
        };
        if !(l > 0.0) {
            return Err(Error::config(format!("row {}: l must be positive", i + 1)));
        }
        if re == 0.0 && im == 0.0 {
            return Err(Error::config(format!("row {}: zero value has no logarithm", i + 1)));
        }
        out.push(Sample::from_value(l, ComplexValue::new(re, im)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SweepConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.s_grid.len(), 6);
        assert_eq!(SweepConfig::from_json("{}").unwrap(), cfg);
    }

    #[test]
    fn json_fields() {
        let cfg = SweepConfig::from_json(
            r#"{"surface": {"l2": 1.5, "l3": 0.5}, "l_grid": [1, 0.5, 0.25, 0.125],
                "s_grid": [2, [0.25, 0.3]], "z_points": [[0, 2]],
                "budgets": {"max_word_len": 6, "tail_tol": 1e-10},
                "quantities": ["z_ratio", "gamma_mode"], "mode_k": -2, "format": "csv", "threads": 3}"#,
        );
        assert!(cfg.is_err(), "z_ratio with Re s = 2 must be rejected");
        let cfg = SweepConfig::from_json(
            r#"{"surface": {"l2": 1.5, "l3": 0.5}, "l_grid": [1, 0.5, 0.25, 0.125],
                "s_grid": [0.75, [0.25, 0.3]], "z_points": [[0, 2]],
                "budgets": {"max_word_len": 6, "tail_tol": 1e-10},
                "quantities": ["z_ratio", "gamma_mode"], "mode_k": -2, "format": "csv", "threads": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.s_grid[1], ComplexValue::new(0.25, 0.3));
        assert_eq!(cfg.budgets.max_word_len, 6);
        assert_eq!(cfg.budgets.max_length, 10.0);
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.mode_k, -2);
    }

    #[test]
    fn invalid_configs() {
        for text in [
            r#"{"l_grid": [0.1, 0.2, 0.05, 0.01]}"#,
            r#"{"l_grid": [3, 0.2, 0.05, 0.01]}"#,
            r#"{"l_grid": [0.4, 0.2, 0.1]}"#,
            r#"{"budgets": {"max_word_len": 0}}"#,
            r#"{"budgets": {"tail_tol": -1}}"#,
            r#"{"s_grid": [[-1, 0]]}"#,
            r#"{"z_points": [[0, -1]]}"#,
            r#"{"quantities": []}"#,
            r#"{"quantities": ["plot"]}"#,
            r#"{"unknown": 1}"#,
            r#"{"quantities": ["gamma_mode"], "mode_k": 0}"#,
            "not json",
        ] {
            assert!(matches!(SweepConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn flag_values() {
        assert_eq!(parse_surface("1, 0.5,2").unwrap(), [1.0, 0.5, 2.0]);
        assert!(parse_surface("1,2").is_err());
        assert!(parse_surface("1,0,2").is_err());
        assert_eq!(parse_complex("0.5,-2").unwrap(), ComplexValue::new(0.5, -2.0));
        assert_eq!(parse_complex("2").unwrap(), ComplexValue::new(2.0, 0.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("nan").is_err());
        assert_eq!(parse_point("0.3,1.2").unwrap(), HPoint { x: 0.3, y: 1.2 });
        assert!(parse_point("0,0").is_err());
        assert!(parse_point("").is_err());
        assert_eq!("z_ratio".parse::<Quantity>().unwrap(), Quantity::ZRatio);
    }

    #[test]
    fn samples_csv() {
        let s = parse_samples_csv("l,re,im\n0.5,1,0\n0.25, 2, -1\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].value, ComplexValue::new(2.0, -1.0));
        assert!(parse_samples_csv("x,y,z\n1,1,1\n").is_err());
        assert!(parse_samples_csv("l,re,im\n0,1,0\n").is_err());
        assert!(parse_samples_csv("l,re,im\n1,0,0\n").is_err());
        assert!(parse_samples_csv("l,re,im\n1,a,0\n").is_err());
        assert!(parse_samples_csv("l,re,im\n1,1\n").is_err());
    }
}
