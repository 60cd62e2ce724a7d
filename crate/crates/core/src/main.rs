use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pinchlab::eisenstein::{hyperbolic_eisenstein, starred_eisenstein, weighted_eisenstein, StarredBudget};
use pinchlab::lab::config::{self, Format, Quantity, SweepConfig, MAX_DERIVED_WORD_LEN};
use pinchlab::lab::fit::{check_residual, FitReport};
use pinchlab::lab::report::{
    csv_error, warning_list, write_csv, write_json_line, write_jsonl, EisensteinRecord, ModeRecord, Num, Pair,
    TauRecord, ZetaRecord,
};
use pinchlab::lab::sweep::{enforce_residual, sweep_reports};
use pinchlab::scattering::{gamma_k, tau_limit_target, ScatteringMode};
use pinchlab::wordlang::{build_pants, EnumBudget, SurfaceSpec};
use pinchlab::zeta::{selberg_zeta_log, weighted_quotient_log, SpectralPoint, DEFAULT_TAIL_TOL};
use pinchlab::{fmt17, ComplexValue, Error, Result, SCHEMA_VERSION};

const EXIT_FIT: u8 = 2;
const EXIT_CONFIG: u8 = 3;

/// Numerics of degenerating hyperbolic surfaces: Selberg zeta products,
/// Eisenstein series, funnel scattering modes and pinching sweeps.
#[derive(Parser, Debug)]
#[command(name = "pinchlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// log Z(s) of a pair of pants from its primitive length spectrum.
    Zeta(ZetaArgs),
    /// Hyperbolic Eisenstein series of the first boundary geodesic.
    Eisenstein(EisensteinArgs),
    /// Funnel scattering mode eigenvalues and the limit target.
    Scattering(ScatteringArgs),
    /// Sweep the pinching length and fit power laws.
    Sweep(SweepArgs),
    /// Fit a power law to samples read from CSV (columns l,re,im).
    Fit(FitArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or jsonl.
    #[arg(long)]
    format: Option<String>,
}

impl Output {
    fn format(&self) -> Result<Format> {
        self.format.as_deref().map(str::parse).transpose().map(Option::unwrap_or_default)
    }
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    /// Boundary lengths l1,l2,l3; l1 is the pinching geodesic.
    #[arg(long, default_value = "1,1,1")]
    surface: String,
    /// Spectral parameter re[,im].
    #[arg(long = "s", allow_hyphen_values = true)]
    s: String,
    #[arg(long)]
    tail_tol: Option<f64>,
    /// Minimum number of factors in each local product.
    #[arg(long, default_value_t = 1)]
    trunc_k: usize,
}

impl SurfaceArgs {
    fn surface(&self) -> Result<(SurfaceSpec, [f64; 3])> {
        let ls = config::parse_surface(&self.surface)?;
        let spec = build_pants(ls[0], ls[1], ls[2]).map_err(|e| Error::Config(e.to_string()))?;
        Ok((spec, ls))
    }

    fn point(&self) -> Result<SpectralPoint> {
        let s = config::parse_complex(&self.s)?;
        SpectralPoint::new(s, self.trunc_k, self.tail_tol.unwrap_or(DEFAULT_TAIL_TOL))
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Args, Debug)]
struct ZetaArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Geodesic length cutoff.
    #[arg(long, default_value_t = 10.0)]
    max_length: f64,
    /// Word-length budget; derived from the cutoff when absent.
    #[arg(long)]
    max_word_len: Option<usize>,
    /// Leave out the pinching geodesic (the weighted quotient Z / z).
    #[arg(long)]
    quotient: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    Hyperbolic,
    Weighted,
    Starred,
}

#[derive(Args, Debug)]
struct EisensteinArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Evaluation point x,y.
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    z: String,
    /// Word-length budget of the coset sum.
    #[arg(long, default_value_t = 8)]
    max_word_len: usize,
    /// Length cutoff of the zeta product (starred variant).
    #[arg(long, default_value_t = 10.0)]
    max_length: f64,
    #[arg(long, value_enum, default_value = "hyperbolic")]
    variant: Variant,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ScatteringArgs {
    /// Spectral parameter re[,im].
    #[arg(long = "s", allow_hyphen_values = true)]
    s: String,
    /// Mode indices, comma separated.
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    k: String,
    /// Funnel lengths, comma separated.
    #[arg(long, default_value = "1")]
    l: String,
    /// Also emit 1 / (2 sin²(πs/2)).
    #[arg(long)]
    tau: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON configuration; defaults apply to absent fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// l1,l2,l3: l2 and l3 fix the family, l1 is replaced by the grid.
    #[arg(long)]
    surface: Option<String>,
    /// Replace the s grid by a single value re[,im].
    #[arg(long = "s", allow_hyphen_values = true)]
    s: Option<String>,
    /// Replace the evaluation points by a single x,y.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Comma-separated quantities.
    #[arg(long)]
    quantities: Option<String>,
    #[arg(long)]
    max_word_len: Option<usize>,
    #[arg(long)]
    tail_tol: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// CSV file with header l,re,im.
    #[arg(long)]
    samples: PathBuf,
    /// Spectral parameter recorded in the report.
    #[arg(long = "s", default_value = "1", allow_hyphen_values = true)]
    s: String,
    /// Expected exponent re[,im].
    #[arg(long, allow_hyphen_values = true)]
    target: Option<String>,
    #[arg(long)]
    max_residual: Option<f64>,
    #[command(flatten)]
    output: Output,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn nums(xs: &[f64]) -> Vec<Num> {
    xs.iter().copied().map(Num).collect()
}

fn write_rows(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn run_zeta(a: &ZetaArgs) -> Result<()> {
    let (spec, ls) = a.surface.surface()?;
    let p = a.surface.point()?;
    if !(a.max_length > 0.0 && a.max_length.is_finite()) {
        return Err(Error::Config(format!("max-length must be positive, got {}", a.max_length)));
    }
    let word_len = a
        .max_word_len
        .unwrap_or_else(|| spec.complete_word_len(a.max_length).clamp(1, MAX_DERIVED_WORD_LEN));
    let budget = EnumBudget::new(word_len, a.max_length);
    let z = if a.quotient { weighted_quotient_log(&spec, &p, &budget)? } else { selberg_zeta_log(&spec, &p, &budget)? };
    let delta = spec.delta().map(|d| d.delta);
    let mut out = open_output(a.output.out.as_deref())?;
    let kind = if a.quotient { "weighted_quotient" } else { "zeta" };
    match a.output.format()? {
        Format::Jsonl => write_json_line(
            &mut out,
            &ZetaRecord {
                schema: SCHEMA_VERSION,
                kind,
                surface: nums(&ls),
                s: Pair(p.s),
                log_value: Pair(z.log_value),
                value: Pair(z.value()),
                tail_bound: Num(z.tail_bound),
                classes_used: z.classes_used,
                length_cutoff: Num(z.length_cutoff),
                max_word_len: word_len,
                delta: delta.map(Num),
                warnings: z.warnings.clone(),
            },
        )?,
        Format::Csv => write_rows(
            &mut out,
            &["kind", "s_re", "s_im", "log_re", "log_im", "tail_bound", "classes_used", "length_cutoff", "warnings"],
            &[vec![
                kind.to_string(),
                fmt17(p.s.re),
                fmt17(p.s.im),
                fmt17(z.log_value.re),
                fmt17(z.log_value.im),
                fmt17(z.tail_bound),
                z.classes_used.to_string(),
                fmt17(z.length_cutoff),
                warning_list(&z.warnings),
            ]],
        )?,
    }
    out.flush()?;
    Ok(())
}

fn run_eisenstein(a: &EisensteinArgs) -> Result<()> {
    let (spec, ls) = a.surface.surface()?;
    let p = a.surface.point()?;
    let z = config::parse_point(&a.z)?;
    if a.max_word_len == 0 {
        return Err(Error::Config("max-word-len must be positive".into()));
    }
    let e = hyperbolic_eisenstein(&spec, z, &p, a.max_word_len)?;
    let (value, warnings) = match a.variant {
        Variant::Hyperbolic => (e.value, e.warnings.clone()),
        Variant::Weighted => (weighted_eisenstein(&spec, z, &p, a.max_word_len)?.value, e.warnings.clone()),
        Variant::Starred => {
            let word_len = spec.complete_word_len(a.max_length).clamp(1, MAX_DERIVED_WORD_LEN);
            let budget = StarredBudget { coset_word_len: a.max_word_len, zeta: EnumBudget::new(word_len, a.max_length) };
            let st = starred_eisenstein(&spec, z, &p, &budget)?;
            (st.value, st.warnings)
        }
    };
    let kind = match a.variant {
        Variant::Hyperbolic => "eisenstein",
        Variant::Weighted => "weighted_eisenstein",
        Variant::Starred => "starred_eisenstein",
    };
    let mut out = open_output(a.output.out.as_deref())?;
    match a.output.format()? {
        Format::Jsonl => write_json_line(
            &mut out,
            &EisensteinRecord {
                schema: SCHEMA_VERSION,
                kind,
                surface: nums(&ls),
                s: Pair(p.s),
                z: [Num(z.x), Num(z.y)],
                value: Pair(value),
                tail_indicator: Num(e.tail_indicator),
                terms_used: e.terms_used,
                shells: e.shell_sums.len(),
                delta: spec.delta().map(|d| Num(d.delta)),
                warnings,
            },
        )?,
        Format::Csv => write_rows(
            &mut out,
            &["kind", "s_re", "s_im", "z_x", "z_y", "value_re", "value_im", "tail_indicator", "terms_used", "warnings"],
            &[vec![
                kind.to_string(),
                fmt17(p.s.re),
                fmt17(p.s.im),
                fmt17(z.x),
                fmt17(z.y),
                fmt17(value.re),
                fmt17(value.im),
                fmt17(e.tail_indicator),
                e.terms_used.to_string(),
                warning_list(&warnings),
            ]],
        )?,
    }
    out.flush()?;
    Ok(())
}

fn run_scattering(a: &ScatteringArgs) -> Result<()> {
    let s = config::parse_complex(&a.s)?;
    let ks: Vec<i64> = a
        .k
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Config(format!("bad mode index {t:?}"))))
        .collect::<Result<_>>()?;
    let ls = config::parse_list(&a.l)?;
    let mut rows = Vec::new();
    for &l in &ls {
        for &k in &ks {
            let mode = ScatteringMode::new(k, l).map_err(|e| Error::Config(e.to_string()))?;
            let g = gamma_k(&mode, s)?;
            rows.push((mode, g));
        }
    }
    let tau = if a.tau { Some(tau_limit_target(s)?) } else { None };
    let mut out = open_output(a.output.out.as_deref())?;
    match a.output.format()? {
        Format::Jsonl => {
            for (mode, g) in &rows {
                write_json_line(
                    &mut out,
                    &ModeRecord {
                        schema: SCHEMA_VERSION,
                        kind: "mode",
                        k: mode.k,
                        l: Num(mode.l),
                        s: Pair(s),
                        gamma: Pair(g.value),
                        abs_gamma: Num(g.value.norm()),
                        warnings: g.warnings.clone(),
                    },
                )?;
            }
            if let Some(t) = tau {
                write_json_line(&mut out, &TauRecord { schema: SCHEMA_VERSION, kind: "tau_target", s: Pair(s), value: Pair(t) })?;
            }
        }
        Format::Csv => {
            let table: Vec<_> = rows.iter().map(|(m, g)| (*m, s, g.value)).collect();
            pinchlab::scattering::write_mode_table(&table, &mut out)?;
            if let Some(t) = tau {
                eprintln!("tau target: {} {}", fmt17(t.re), fmt17(t.im));
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            SweepConfig::from_json(&text)?
        }
        None => SweepConfig::default(),
    };
    if let Some(t) = &a.surface {
        let [_, l2, l3] = config::parse_surface(t)?;
        cfg.surface = config::SurfaceTemplate { l2, l3 };
    }
    if let Some(t) = &a.s {
        cfg.s_grid = vec![config::parse_complex(t)?];
    }
    if let Some(t) = &a.z {
        cfg.z_points = vec![config::parse_point(t)?];
    }
    if let Some(t) = &a.quantities {
        cfg.quantities = t.split(',').map(str::parse::<Quantity>).collect::<Result<_>>()?;
    }
    if let Some(n) = a.max_word_len {
        cfg.budgets.max_word_len = n;
    }
    if let Some(t) = a.tail_tol {
        cfg.budgets.tail_tol = t;
    }
    if let Some(n) = a.threads {
        cfg.threads = n;
    }
    if let Some(p) = &a.output.out {
        cfg.output = Some(p.clone());
    }
    if a.output.format.is_some() {
        cfg.format = a.output.format()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_reports(reports: &[FitReport], format: Format, path: Option<&Path>) -> Result<()> {
    let mut out = open_output(path)?;
    match format {
        Format::Csv => write_csv(reports, &mut out)?,
        Format::Jsonl => write_jsonl(reports, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn run_sweep(a: &SweepArgs) -> Result<()> {
    let cfg = sweep_config(a)?;
    let reports = sweep_reports(&cfg)?;
    write_reports(&reports, cfg.format, cfg.output.as_deref())?;
    enforce_residual(&cfg, &reports)
}

fn run_fit(a: &FitArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.samples)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", a.samples.display())))?;
    let samples = config::parse_samples_csv(&text)?;
    let s: ComplexValue = config::parse_complex(&a.s)?;
    let target = a.target.as_deref().map(config::parse_complex).transpose()?;
    let report = FitReport::from_samples("samples", s, None, samples, target)
        .map_err(|e| Error::Config(e.to_string()))?;
    write_reports(std::slice::from_ref(&report), a.output.format()?, a.output.out.as_deref())?;
    if let Some(bound) = a.max_residual {
        check_residual(&report, bound)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Zeta(a) => run_zeta(a),
        Command::Eisenstein(a) => run_eisenstein(a),
        Command::Scattering(a) => run_scattering(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Fit(a) => run_fit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pinchlab: {e}");
            ExitCode::from(match e {
                Error::Fit { .. } => EXIT_FIT,
                Error::Config(_) => EXIT_CONFIG,
                _ => 1,
            })
        }
    }
}
