//! CSV and JSON-lines emission with 17 significant digits.
//!
//! Every JSON record carries `"schema": 1`. A fit record looks like
//!
//! ```text
//! {"schema":1,"kind":"fit","quantity":"weighted_eisenstein","s":[re,im],"z":[x,y] | null,
//!  "alpha":[re,im],"log_c":[re,im],"residual":r,"target_alpha":[re,im] | null,
//!  "cauchy":c | null,"validity":"verified" | "exploratory","warnings":[..],
//!  "samples":[{"l":l,"value":[re,im],"log_value":[re,im],"error_estimate":e | null,
//!              "delta":d | null,"warnings":[..]}, ..]}
//! ```
//!
//! Non-finite numbers are written as `null`.

use std::io::Write;

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::{Error, Result, Warning};
use crate::lab::fit::{FitReport, Sample};
use crate::moebius::HPoint;
use crate::specfun::ComplexValue;
use crate::{fmt17, SCHEMA_VERSION};

/// A float serialized with 17 significant digits.
#[derive(Clone, Copy, Debug)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return ser.serialize_none();
        }
        let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(ser)
    }
}

/// A complex number as `[re, im]`.
#[derive(Clone, Copy, Debug)]
pub struct Pair(pub ComplexValue);

impl Serialize for Pair {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(2))?;
        seq.serialize_element(&Num(self.0.re))?;
        seq.serialize_element(&Num(self.0.im))?;
        seq.end()
    }
}

fn point(z: HPoint) -> [Num; 2] {
    [Num(z.x), Num(z.y)]
}

#[derive(Serialize)]
struct SampleRecord<'a> {
    l: Num,
    value: Pair,
    log_value: Pair,
    error_estimate: Option<Num>,
    delta: Option<Num>,
    warnings: &'a [Warning],
}

impl<'a> From<&'a Sample> for SampleRecord<'a> {
    fn from(s: &'a Sample) -> Self {
        Self {
            l: Num(s.l),
            value: Pair(s.value),
            log_value: Pair(s.log_value),
            error_estimate: s.error_estimate.map(Num),
            delta: s.delta.map(Num),
            warnings: &s.warnings,
        }
    }
}

#[derive(Serialize)]
struct FitRecord<'a> {
    schema: u32,
    kind: &'static str,
    quantity: &'a str,
    s: Pair,
    z: Option<[Num; 2]>,
    alpha: Pair,
    log_c: Pair,
    residual: Num,
    target_alpha: Option<Pair>,
    cauchy: Option<Num>,
    validity: &'static str,
    warnings: &'a [Warning],
    samples: Vec<SampleRecord<'a>>,
}

impl<'a> From<&'a FitReport> for FitRecord<'a> {
    fn from(r: &'a FitReport) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            kind: "fit",
            quantity: &r.quantity,
            s: Pair(r.s),
            z: r.z.map(point),
            alpha: Pair(r.alpha),
            log_c: Pair(r.log_c),
            residual: Num(r.residual),
            target_alpha: r.target_alpha.map(Pair),
            cauchy: r.cauchy.map(Num),
            validity: r.validity.as_str(),
            warnings: &r.warnings,
            samples: r.samples.iter().map(SampleRecord::from).collect(),
        }
    }
}

/// `log Z` (or the weighted quotient) at one surface and `s`.
#[derive(Serialize)]
pub struct ZetaRecord {
    pub schema: u32,
    pub kind: &'static str,
    pub surface: Vec<Num>,
    pub s: Pair,
    pub log_value: Pair,
    pub value: Pair,
    pub tail_bound: Num,
    pub classes_used: usize,
    pub length_cutoff: Num,
    pub max_word_len: usize,
    pub delta: Option<Num>,
    pub warnings: Vec<Warning>,
}

/// A hyperbolic, weighted or starred Eisenstein value.
#[derive(Serialize)]
pub struct EisensteinRecord {
    pub schema: u32,
    pub kind: &'static str,
    pub surface: Vec<Num>,
    pub s: Pair,
    pub z: [Num; 2],
    pub value: Pair,
    pub tail_indicator: Num,
    pub terms_used: usize,
    pub shells: usize,
    pub delta: Option<Num>,
    pub warnings: Vec<Warning>,
}

/// One scattering mode eigenvalue.
#[derive(Serialize)]
pub struct ModeRecord {
    pub schema: u32,
    pub kind: &'static str,
    pub k: i64,
    pub l: Num,
    pub s: Pair,
    pub gamma: Pair,
    pub abs_gamma: Num,
    pub warnings: Vec<Warning>,
}

/// The limit target `1 / (2 sin²(πs/2))`.
#[derive(Serialize)]
pub struct TauRecord {
    pub schema: u32,
    pub kind: &'static str,
    pub s: Pair,
    pub value: Pair,
}

/// Writes any serializable record as one JSON line.
pub fn write_json_line<W: Write, T: Serialize>(out: &mut W, record: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, record).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// One JSON line per report; an empty list writes nothing.
pub fn write_jsonl<W: Write>(reports: &[FitReport], mut out: W) -> Result<()> {
    for r in reports {
        write_json_line(&mut out, &FitRecord::from(r))?;
    }
    out.flush()?;
    Ok(())
}

pub const CSV_HEADER: [&str; 17] = [
    "quantity",
    "s_re",
    "s_im",
    "z_x",
    "z_y",
    "alpha_re",
    "alpha_im",
    "log_c_re",
    "log_c_im",
    "residual",
    "target_re",
    "target_im",
    "cauchy",
    "validity",
    "warnings",
    "samples",
    "min_l",
];

fn opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

/// Joins warnings with `;`.
pub fn warning_list(ws: &[Warning]) -> String {
    ws.iter().map(Warning::as_str).collect::<Vec<_>>().join(";")
}

/// One CSV row per report; an empty list writes the header only.
pub fn write_csv<W: Write>(reports: &[FitReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in reports {
        let min_l = r.samples.iter().map(|s| s.l).fold(f64::INFINITY, f64::min);
        w.write_record([
            r.quantity.clone(),
            fmt17(r.s.re),
            fmt17(r.s.im),
            opt(r.z.map(|z| z.x)),
            opt(r.z.map(|z| z.y)),
            fmt17(r.alpha.re),
            fmt17(r.alpha.im),
            fmt17(r.log_c.re),
            fmt17(r.log_c.im),
            fmt17(r.residual),
            opt(r.target_alpha.map(|t| t.re)),
            opt(r.target_alpha.map(|t| t.im)),
            opt(r.cauchy),
            r.validity.as_str().to_string(),
            warning_list(&r.warnings),
            r.samples.len().to_string(),
            fmt17(min_l),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic() -> FitReport {
        let samples = [0.8, 0.4, 0.2, 0.1]
            .iter()
            .map(|&l: &f64| Sample::from_value(l, ComplexValue::new(l * l, 0.0)))
            .collect();
        FitReport::from_samples("synthetic", ComplexValue::new(2.0, 0.5), Some(HPoint { x: 0.0, y: 1.0 }), samples, Some(ComplexValue::new(2.0, 0.0)))
            .unwrap()
    }

    #[test]
    fn empty_outputs() {
        let mut csv = Vec::new();
        write_csv(&[], &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
        let mut jsonl = Vec::new();
        write_jsonl(&[], &mut jsonl).unwrap();
        assert!(jsonl.is_empty());
    }

    #[test]
    fn json_record_shape() {
        let mut out = Vec::new();
        write_jsonl(&[synthetic()], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with(
            r#"{"schema":1,"kind":"fit","quantity":"synthetic","s":[2.0000000000000000e0,5.0000000000000000e-1],"z":[0.0000000000000000e0,1.0000000000000000e0],"alpha":[2.0000000000000000e0,"#
        ), "{text}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["samples"].as_array().unwrap().len(), 4);
        assert_eq!(v["samples"][0]["l"].as_f64(), Some(0.8));
        assert_eq!(v["validity"], "verified");
        assert!(v["samples"][0]["delta"].is_null());
    }

    #[test]
    fn non_finite_numbers_become_null() {
        let v = serde_json::to_string(&[Num(f64::NAN), Num(1.0), Num(f64::INFINITY)]).unwrap();
        assert_eq!(v, "[null,1.0000000000000000e0,null]");
    }

    #[test]
    fn csv_row() {
        let mut out = Vec::new();
        write_csv(&[synthetic()], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("synthetic,2.0000000000000000e0,5.0000000000000000e-1,0.0000000000000000e0,1.0000000000000000e0,"));
        assert!(row.ends_with(",verified,,4,1.0000000000000001e-1"), "{row}");
    }
}
