//! Evaluation of the configured quantities over the grids.

use rayon::prelude::*;

use crate::eisenstein::{starred_eisenstein, weighted_eisenstein, StarredBudget};
use crate::error::{Error, Result, Warning};
use crate::lab::config::{Quantity, SweepConfig, MAX_DERIVED_WORD_LEN};
use crate::lab::fit::{check_residual, FitReport, Sample};
use crate::moebius::HPoint;
use crate::scattering::{gamma_k, ScatteringMode};
use crate::specfun::ComplexValue;
use crate::wordlang::{build_pants, EnumBudget, SurfaceSpec};
use crate::zeta::{local_factor_log, weighted_quotient_log, SpectralPoint};

/// Exponent claimed for `quantity` at `s`, if any.
pub fn target_exponent(quantity: Quantity, s: ComplexValue) -> Option<ComplexValue> {
    let one = ComplexValue::new(1.0, 0.0);
    let below_half = s.re < 0.5;
    match quantity {
        Quantity::WeightedEisenstein => below_half.then(|| one - 2.0 * s),
        Quantity::StarredEisenstein => Some(ComplexValue::new(0.0, 0.0)),
        Quantity::WeightedQuotient => below_half.then(|| 2.0 * s - one),
        Quantity::ZRatio => Some(4.0 * s - 2.0),
        Quantity::GammaMode => Some(one - 2.0 * s),
    }
}

struct Task {
    quantity: Quantity,
    s: ComplexValue,
    z: Option<HPoint>,
    l_index: usize,
}

fn zeta_budget(cfg: &SweepConfig, spec: &SurfaceSpec) -> EnumBudget {
    let b = &cfg.budgets;
    let word_len = b
        .zeta_word_len
        .unwrap_or_else(|| spec.complete_word_len(b.max_length).clamp(1, MAX_DERIVED_WORD_LEN));
    EnumBudget { max_word_len: word_len, max_length: b.max_length, class_cap: b.class_cap }
}

fn evaluate(cfg: &SweepConfig, l: f64, spec: Option<&SurfaceSpec>, task: &Task) -> Result<Sample> {
    let b = &cfg.budgets;
    let p = SpectralPoint::new(task.s, b.trunc_k, b.tail_tol)?;
    let surface = || spec.expect("surface built for this quantity");
    let delta = || surface().delta().map(|d| d.delta);
    let sample = match task.quantity {
        Quantity::WeightedEisenstein => {
            let w = weighted_eisenstein(surface(), task.z.expect("point"), &p, b.max_word_len)?;
            let scale = w.value.norm() / w.eisenstein.value.norm();
            Sample::from_value(l, w.value)
                .with_error_estimate(w.eisenstein.tail_indicator * scale)
                .with_warnings(&w.eisenstein.warnings)
                .with_delta(delta())
        }
        Quantity::StarredEisenstein => {
            let spec = surface();
            let budget = StarredBudget { coset_word_len: b.max_word_len, zeta: zeta_budget(cfg, spec) };
            let st = starred_eisenstein(spec, task.z.expect("point"), &p, &budget)?;
            let rel = st.eisenstein.tail_indicator / st.eisenstein.value.norm() + st.quotient.tail_bound;
            Sample::from_log(l, st.log_value)
                .with_error_estimate(rel * st.value.norm())
                .with_warnings(&st.warnings)
                .with_delta(delta())
        }
        Quantity::WeightedQuotient => {
            let spec = surface();
            let q = weighted_quotient_log(spec, &p, &zeta_budget(cfg, spec))?;
            Sample::from_log(l, q.log_value)
                .with_error_estimate(q.tail_bound)
                .with_warnings(&q.warnings)
                .with_delta(delta())
        }
        Quantity::ZRatio => {
            let q = SpectralPoint::new(1.0 - task.s, b.trunc_k, b.tail_tol)?;
            let hi = local_factor_log(l, &q)?;
            let lo = local_factor_log(l, &p)?;
            Sample::from_log(l, hi.value - lo.value).with_error_estimate(hi.tail_bound + lo.tail_bound)
        }
        Quantity::GammaMode => {
            let g = gamma_k(&ScatteringMode::new(cfg.mode_k, l)?, task.s)?;
            Sample::from_value(l, g.value).with_warnings(&g.warnings)
        }
    };
    Ok(sample)
}

fn needs_surface(q: Quantity) -> bool {
    matches!(q, Quantity::WeightedEisenstein | Quantity::StarredEisenstein | Quantity::WeightedQuotient)
}

/// Evaluates every quantity over the grids and fits one report per
/// `(quantity, s, z)`, without applying the residual bound.
///
/// Reports are ordered by quantity, then `s`, then `z`; samples within a
/// report by decreasing `l`. The output does not depend on the worker count.
pub fn sweep_reports(cfg: &SweepConfig) -> Result<Vec<FitReport>> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if cfg.threads > 0 {
        builder = builder.num_threads(cfg.threads);
    }
    let pool = builder.build().map_err(|e| Error::config(format!("worker pool: {e}")))?;
    pool.install(|| sweep_in_pool(cfg))
}

fn sweep_in_pool(cfg: &SweepConfig) -> Result<Vec<FitReport>> {
    let mut quantities = cfg.quantities.clone();
    quantities.sort();
    quantities.dedup();
    let mut s_grid = cfg.s_grid.clone();
    s_grid.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    s_grid.dedup();
    let mut z_points = cfg.z_points.clone();
    z_points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    z_points.dedup();

    let surfaces: Vec<Option<SurfaceSpec>> = if quantities.iter().any(|&q| needs_surface(q)) {
        cfg.l_grid
            .par_iter()
            .map(|&l| build_pants(l, cfg.surface.l2, cfg.surface.l3).map(Some))
            .collect::<Result<_>>()?
    } else {
        vec![None; cfg.l_grid.len()]
    };

    let mut groups: Vec<(Quantity, ComplexValue, Option<HPoint>)> = Vec::new();
    for &q in &quantities {
        for &s in &s_grid {
            if q.uses_z() {
                groups.extend(z_points.iter().map(|&z| (q, s, Some(z))));
            } else {
                groups.push((q, s, None));
            }
        }
    }
    let tasks: Vec<Task> = groups
        .iter()
        .flat_map(|&(quantity, s, z)| (0..cfg.l_grid.len()).map(move |l_index| Task { quantity, s, z, l_index }))
        .collect();
    let samples: Vec<Sample> = tasks
        .par_iter()
        .map(|t| {
            let spec = if needs_surface(t.quantity) { surfaces[t.l_index].as_ref() } else { None };
            evaluate(cfg, cfg.l_grid[t.l_index], spec, t)
        })
        .collect::<Result<_>>()?;

    let n_l = cfg.l_grid.len();
    groups
        .iter()
        .zip(samples.chunks(n_l))
        .map(|(&(q, s, z), chunk)| {
            let mut report = FitReport::from_samples(q.as_str(), s, z, chunk.to_vec(), target_exponent(q, s))?;
            if needs_surface(q) && s.re < 0.5 {
                report.demote(Warning::Exploratory);
            }
            Ok(report)
        })
        .collect()
}

/// [`sweep_reports`] followed by the residual bound of the configuration.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<FitReport>> {
    let reports = sweep_reports(cfg)?;
    enforce_residual(cfg, &reports)?;
    Ok(reports)
}

/// [`Error::Fit`] for the worst report above `cfg.max_residual`.
pub fn enforce_residual(cfg: &SweepConfig, reports: &[FitReport]) -> Result<()> {
    if let Some(bound) = cfg.max_residual {
        if let Some(worst) = reports.iter().max_by(|a, b| a.residual.total_cmp(&b.residual)) {
            check_residual(worst, bound)?;
        }
    }
    Ok(())
}
