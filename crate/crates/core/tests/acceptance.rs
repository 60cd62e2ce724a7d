//! Acceptance checks. Runs without the libtest harness so that every check
//! prints its PASS/FAIL line; the process exits non-zero if any check fails.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use pinchlab::eisenstein::hyperbolic_eisenstein;
use pinchlab::lab::config::{Quantity, SweepConfig};
use pinchlab::lab::fit::{FitReport, Sample};
use pinchlab::lab::report::write_jsonl;
use pinchlab::lab::sweep::sweep_reports;
use pinchlab::moebius::{angle_sine, translation_length, HPoint};
use pinchlab::scattering::{gamma_k, tau_limit_target, ScatteringMode};
use pinchlab::specfun::real_pow;
use pinchlab::wordlang::{
    build_cylinder, build_pants, coset_words, enumerate_conj_classes, EnumBudget, Word,
};
use pinchlab::zeta::{local_factor_log, selberg_zeta_log, z_ratio_exponent, SpectralPoint};
use pinchlab::ComplexValue;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

fn timed(limit: Duration, start: Instant) -> Result<String, String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {t:.2?}, limit {limit:.0?}"))
    } else {
        Ok(format!("{t:.2?}"))
    }
}

fn functional_equation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 1000 {
        let k: i64 = rng.gen_range(-20..=20);
        let l = rng.gen_range(0.02..2.0);
        let s = c(rng.gen_range(0.1..1.9), rng.gen_range(-2.0..2.0));
        // Γ(1/2 - s) and Γ(s - 1/2) are singular at s = 1/2 and s = 3/2
        if (s - 0.5).norm() < 0.05 || (s - 1.5).norm() < 0.05 {
            continue;
        }
        let mode = ScatteringMode::new(k, l).map_err(|e| e.to_string())?;
        let a = gamma_k(&mode, s).map_err(|e| format!("k={k} l={l} s={s}: {e}"))?;
        let b = gamma_k(&mode, 1.0 - s).map_err(|e| format!("k={k} l={l} s={}: {e}", 1.0 - s))?;
        worst = worst.max((a.value * b.value - 1.0).norm());
        n += 1;
    }
    if worst > 1e-10 {
        return Err(format!("max |γ(s)γ(1-s) - 1| = {worst:.3e}"));
    }
    Ok(format!("max deviation {worst:.2e}, {}", timed(Duration::from_secs(5), start)?))
}

fn z_ratio() -> Outcome {
    let start = Instant::now();
    let grid: Vec<f64> = (0..8).map(|i| 10f64.powf(-2.0 - i as f64 / 7.0)).collect();
    let mut parts = Vec::new();
    for s in [0.25, 0.4] {
        let r = z_ratio_exponent(s, &grid).map_err(|e| e.to_string())?;
        let target = 4.0 * s - 2.0;
        if (r.alpha.re - target).abs() > 0.05 || r.alpha.im.abs() > 0.05 {
            return Err(format!("s={s}: slope {} vs {target}", r.alpha));
        }
        parts.push(format!("s={s} slope {:.4}", r.alpha.re));
    }
    Ok(format!("{}, {}", parts.join(", "), timed(Duration::from_secs(1), start)?))
}

fn truncation() -> Outcome {
    let tol = 1e-12;
    let mut worst = 0.0f64;
    for &l in &[0.01, 0.1, 0.5, 1.0, 3.0] {
        for &s in &[c(0.1, 0.0), c(0.25, 3.0), c(0.5, -1.0), c(1.0, 0.0), c(2.0, 10.0)] {
            let p = SpectralPoint::new(s, 1, tol).map_err(|e| e.to_string())?;
            let f = local_factor_log(l, &p).map_err(|e| e.to_string())?;
            let q = SpectralPoint::new(s, 2 * f.terms, tol).map_err(|e| e.to_string())?;
            let g = local_factor_log(l, &q).map_err(|e| e.to_string())?;
            if g.terms != 2 * f.terms {
                return Err(format!("l={l} s={s}: asked for {} factors, got {}", 2 * f.terms, g.terms));
            }
            let d = (g.value - f.value).norm();
            if d >= tol {
                return Err(format!("l={l} s={s}: doubling moved the value by {d:.3e}"));
            }
            worst = worst.max(d);
        }
    }
    Ok(format!("max change {worst:.2e}"))
}

fn reduced_words(rank: usize, max_len: usize) -> Vec<Vec<u8>> {
    let mut all = vec![Vec::new()];
    let mut frontier: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for x in 0..(2 * rank) as u8 {
                if w.last() != Some(&(x ^ 1)) {
                    let mut v = w.clone();
                    v.push(x);
                    next.push(v);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

// Written independently of the library: minimum over all rotations of the
// word and of its inverse, by sorting the full list.
fn brute_canonical(w: &[u8]) -> Vec<u8> {
    let inv: Vec<u8> = w.iter().rev().map(|x| x ^ 1).collect();
    let n = w.len();
    let mut all = Vec::new();
    for v in [w.to_vec(), inv] {
        for r in 0..n {
            all.push((0..n).map(|i| v[(i + r) % n]).collect::<Vec<u8>>());
        }
    }
    all.sort();
    all.swap_remove(0)
}

fn enumeration_oracle() -> Outcome {
    let start = Instant::now();
    let max_len = 6;
    let words = reduced_words(2, max_len);
    let mut want = BTreeSet::new();
    for w in &words {
        let n = w.len();
        if n == 0 || w[0] == (w[n - 1] ^ 1) {
            continue;
        }
        let primitive = (1..n).filter(|p| n % p == 0).all(|p| (0..n).any(|i| w[i] != w[(i + p) % n]));
        if primitive {
            want.insert(brute_canonical(w));
        }
    }
    let spec = build_pants(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let spectrum = enumerate_conj_classes(&spec, &EnumBudget::new(max_len, f64::INFINITY)).map_err(|e| e.to_string())?;
    let got: BTreeSet<Vec<u8>> = spectrum.classes.iter().map(|cl| cl.word.letters().to_vec()).collect();
    if got.len() != spectrum.classes.len() {
        return Err("duplicate classes".into());
    }
    if got != want {
        return Err(format!("{} enumerated vs {} brute force", got.len(), want.len()));
    }

    let tile_len = 4;
    let reps = coset_words(2, 0, tile_len);
    let mut hits: Vec<Vec<u8>> = Vec::new();
    for k in -(tile_len as i32)..=tile_len as i32 {
        let head = Word::generator_power(0, k);
        for r in &reps {
            let w = head.concat(r);
            if w.len() <= tile_len {
                hits.push(w.letters().to_vec());
            }
        }
    }
    hits.sort();
    let mut all = reduced_words(2, tile_len);
    all.sort();
    if hits != all {
        return Err(format!("coset tiling: {} products vs {} reduced words", hits.len(), all.len()));
    }
    Ok(format!("{} classes, {} tiled words, {}", want.len(), all.len(), timed(Duration::from_secs(10), start)?))
}

fn pants_construction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let ls: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.1..2.0));
        let spec = build_pants(ls[0], ls[1], ls[2]).map_err(|e| format!("{ls:?}: {e}"))?;
        let (g1, g2) = (spec.generators[0], spec.generators[1]);
        for (g, want) in [(g1, ls[0]), (g2, ls[1]), (g1 * g2, ls[2])] {
            let got = translation_length(&g).map_err(|e| e.to_string())?;
            worst = worst.max((got - want).abs());
        }
    }
    if worst > 1e-9 {
        return Err(format!("max length error {worst:.3e}"));
    }
    Ok(format!("max length error {worst:.2e}"))
}

fn automorphy() -> Outcome {
    let spec = build_pants(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let z = HPoint { x: 0.3, y: 1.2 };
    let p = SpectralPoint::real(2.0).map_err(|e| e.to_string())?;
    let base = hyperbolic_eisenstein(&spec, z, &p, 10).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (i, g) in spec.generators.iter().enumerate() {
        let moved = hyperbolic_eisenstein(&spec, g.apply(z), &p, 10).map_err(|e| e.to_string())?;
        let d = (moved.value - base.value).norm();
        let bound = 2.0 * base.tail_indicator.max(moved.tail_indicator);
        if d > bound {
            return Err(format!("g{}: |ΔE| = {d:.3e} > {bound:.3e}", i + 1));
        }
        parts.push(format!("g{}: {d:.2e} <= {bound:.2e}", i + 1));
    }
    Ok(parts.join(", "))
}

fn cylinder() -> Outcome {
    let mut worst = 0.0f64;
    for &l in &[0.05, 1.0, 3.0] {
        let spec = build_cylinder(l).map_err(|e| e.to_string())?;
        for &s in &[c(0.5, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.3, 4.0), c(5.0, -1.0)] {
            let p = SpectralPoint::at(s).map_err(|e| e.to_string())?;
            for &y in &[0.5, 1.0, 7.0] {
                let e = hyperbolic_eisenstein(&spec, HPoint { x: 0.0, y }, &p, 6).map_err(|e| e.to_string())?;
                worst = worst.max((e.value - 1.0).norm());
            }
            let z = HPoint { x: -0.7, y: 0.4 };
            let e = hyperbolic_eisenstein(&spec, z, &p, 6).map_err(|e| e.to_string())?;
            if e.value != real_pow(angle_sine(z), s) {
                return Err(format!("off-axis value {} differs from sin^s θ", e.value));
            }
        }
    }
    if worst > 1e-14 {
        return Err(format!("axis deviation {worst:.3e}"));
    }
    Ok(format!("axis deviation {worst:.1e}"))
}

fn zeta_self_consistency() -> Outcome {
    let start = Instant::now();
    let spec = build_pants(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let p = SpectralPoint::real(2.0).map_err(|e| e.to_string())?;
    let at = |cutoff: f64| {
        let budget = EnumBudget::new(spec.complete_word_len(cutoff), cutoff);
        selberg_zeta_log(&spec, &p, &budget).map_err(|e| e.to_string())
    };
    let (lo, hi) = (at(10.0)?, at(14.0)?);
    let d = (lo.log_value - hi.log_value).norm();
    if d > lo.tail_bound {
        return Err(format!("|Δ log Z| = {d:.3e} > tail {:.3e}", lo.tail_bound));
    }
    Ok(format!(
        "|Δ log Z| = {d:.2e} <= {:.2e} ({} vs {} classes), {}",
        lo.tail_bound,
        lo.classes_used,
        hi.classes_used,
        timed(Duration::from_secs(60), start)?
    ))
}

fn tau_target() -> Outcome {
    let one = tau_limit_target(c(1.0, 0.0)).map_err(|e| e.to_string())?;
    let half = tau_limit_target(c(0.5, 0.0)).map_err(|e| e.to_string())?;
    let (d1, d2) = ((one - 0.5).norm(), (half - 1.0).norm());
    if d1 > 1e-15 || d2 > 1e-15 {
        return Err(format!("τ(1) = {one}, τ(1/2) = {half}"));
    }
    Ok(format!("τ(1) = {one}, τ(1/2) = {half}"))
}

fn small_sweep(threads: usize) -> Result<Vec<u8>, String> {
    let cfg = SweepConfig {
        l_grid: vec![0.8, 0.4, 0.2, 0.1],
        s_grid: vec![c(2.0, 0.0), c(0.75, 0.5)],
        quantities: vec![Quantity::WeightedEisenstein, Quantity::StarredEisenstein, Quantity::GammaMode],
        threads,
        ..SweepConfig::default()
    };
    let reports = sweep_reports(&cfg).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    write_jsonl(&reports, &mut out).map_err(|e| e.to_string())?;
    Ok(out)
}

fn fit_harness() -> Outcome {
    let s = c(0.25, 0.3);
    let grid = [0.8, 0.4, 0.2, 0.1, 0.05, 0.025];
    let mut worst = 0.0f64;
    for alpha in [c(2.0, 0.0), c(-1.0, 0.0), 1.0 - 2.0 * s] {
        let cst = c(1.7, -0.4);
        let samples: Vec<Sample> = grid.iter().map(|&l| Sample::from_value(l, cst * real_pow(l, alpha))).collect();
        let r = FitReport::from_samples("synthetic", s, None, samples, Some(alpha)).map_err(|e| e.to_string())?;
        worst = worst.max((r.alpha - alpha).norm());
    }
    if worst > 1e-10 {
        return Err(format!("exponent error {worst:.3e}"));
    }
    let one = small_sweep(1)?;
    let four = small_sweep(4)?;
    if one != four || one.is_empty() {
        return Err("reports differ between 1 and 4 workers".into());
    }
    Ok(format!("exponent error {worst:.1e}, {} identical bytes at 1 and 4 workers", one.len()))
}

fn check_record(v: &serde_json::Value) -> Result<(), String> {
    let num_or_null = |x: &serde_json::Value| x.is_f64() || x.is_null();
    let pair = |x: &serde_json::Value| x.as_array().is_some_and(|a| a.len() == 2 && a.iter().all(num_or_null));
    let strings = |x: &serde_json::Value| x.as_array().is_some_and(|a| a.iter().all(|w| w.is_string()));
    let ok = v["schema"] == 1
        && v["kind"] == "fit"
        && v["quantity"].is_string()
        && pair(&v["s"])
        && (v["z"].is_null() || pair(&v["z"]))
        && pair(&v["alpha"])
        && pair(&v["log_c"])
        && num_or_null(&v["residual"])
        && (v["target_alpha"].is_null() || pair(&v["target_alpha"]))
        && num_or_null(&v["cauchy"])
        && (v["validity"] == "verified" || v["validity"] == "exploratory")
        && strings(&v["warnings"]);
    if !ok {
        return Err(format!("malformed report {v}"));
    }
    let samples = v["samples"].as_array().ok_or("samples missing")?;
    if samples.len() < 4 {
        return Err("fewer than four samples".into());
    }
    for smp in samples {
        let ok = smp["l"].is_f64()
            && pair(&smp["value"])
            && pair(&smp["log_value"])
            && num_or_null(&smp["error_estimate"])
            && num_or_null(&smp["delta"])
            && strings(&smp["warnings"]);
        if !ok {
            return Err(format!("malformed sample {smp}"));
        }
    }
    Ok(())
}

fn default_sweep() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_pinchlab"))
        .args(["sweep"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("exit {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let mut reports = 0;
    let mut flagged = 0;
    let mut quantities = BTreeSet::new();
    let mut s_values = BTreeSet::new();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| format!("{e}: {line}"))?;
        check_record(&v)?;
        quantities.insert(v["quantity"].as_str().unwrap_or_default().to_string());
        let s_re = v["s"][0].as_f64().ok_or("s")?;
        s_values.insert(s_re.to_bits());
        for smp in v["samples"].as_array().ok_or("samples")? {
            let delta = smp["delta"].as_f64();
            let risky = delta.is_none_or(|d| s_re <= d + 0.05);
            if risky {
                flagged += 1;
                if smp["warnings"].as_array().is_none_or(|w| w.is_empty()) {
                    return Err(format!("unflagged sample at Re s = {s_re}, δ = {delta:?}: {smp}"));
                }
                if v["validity"] != "exploratory" {
                    return Err(format!("report at Re s = {s_re} contains a risky sample but is verified"));
                }
            }
        }
        reports += 1;
    }
    for q in ["weighted_eisenstein", "starred_eisenstein"] {
        if !quantities.contains(q) {
            return Err(format!("{q} missing from the default sweep"));
        }
    }
    for s in [1.5f64, 2.0] {
        if !s_values.contains(&s.to_bits()) {
            return Err(format!("Re s = {s} missing from the default sweep"));
        }
    }
    Ok(format!(
        "{reports} reports, {flagged} samples near δ all flagged, {}",
        timed(Duration::from_secs(600), start)?
    ))
}

fn main() {
    let checks: [Check; 11] = [
        ("gamma functional equation", functional_equation),
        ("z-ratio exponent", z_ratio),
        ("local-factor truncation", truncation),
        ("enumeration oracle", enumeration_oracle),
        ("pants construction", pants_construction),
        ("eisenstein automorphy", automorphy),
        ("cylinder closed form", cylinder),
        ("zeta self-consistency", zeta_self_consistency),
        ("tau target", tau_target),
        ("fit harness", fit_harness),
        ("default sweep", default_sweep),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} checks failed", checks.len());
        std::process::exit(1);
    }
}
