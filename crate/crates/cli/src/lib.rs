//! The `anadif` command line: spectral densities, bath decompositions and
//! fits, η tables, and validation of the analytic η against quadrature.
//!
//! [`run`] does all the work and never exits the process, so the commands can
//! be driven from tests exactly as from a shell.

pub mod config;
pub mod formats;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anadif::bath::{
    alpha_exponential_grid, alpha_quadrature_grid, reconstruct_spectral_density, uniform_times,
    AlphaGrid, AlphaRoute, Provenance,
};
use anadif::decompose::{
    alpha_power_law_spec, decompose, decompose_auto, has_power_law_closed_form, pade_parameters,
    DecomposeOptions, DecompositionReport, PoleScheme, Statistics,
};
use anadif::eta::{benchmark_eta, build_eta_table, Splitting};
use anadif::expfit::{fit_exponential_bath, fit_quality_vs_spectrum, FitOptions};
use anadif::model::reorganization_energy;
use anadif::quadrature::QuadratureConfig;
use anadif::{ExponentialBath, PhysicalContext, SpectralDensity};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{Family, SpectralConfig};
use crate::formats::{BathJson, FitReportJson};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or unreadable/malformed input files.
    #[error("{0}")]
    Usage(String),
    /// Invalid parameters or a tolerance that was not met.
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<anadif::Error> for CliError {
    fn from(e: anadif::Error) -> Self {
        use anadif::Error as E;
        match e {
            E::QuadratureFailed { .. }
            | E::Divergent(_)
            | E::PoleCollision { .. }
            | E::EigenSolve
            | E::PoleHit
            | E::Fit(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    /// 0 success, 1 validation failure, 2 usage error, 3 numerical failure.
    pub exit_code: i32,
    pub artifacts_written: Vec<PathBuf>,
}

#[derive(Parser)]
#[command(
    name = "anadif",
    version,
    about = "Analytic discretized influence functionals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral density utilities.
    Spectral {
        #[command(subcommand)]
        command: SpectralCommand,
    },
    /// Sample the bath response function α(t) on a uniform grid.
    Alpha(AlphaArgs),
    /// Decompose a Lorentzian-family density into an exponential bath.
    Decompose(DecomposeArgs),
    /// Print the Padé poles and weights of the Bose or Fermi function.
    Pade(PadeArgs),
    /// Fit sampled α(t) with a sum of exponentials.
    Fit(FitArgs),
    /// Tabulate η coefficients for an exponential bath.
    Eta(EtaArgs),
    /// Compare analytic η with both quadrature oracles.
    Validate(ValidateArgs),
    /// Recover J(ω) from an exponential bath and compare with the config.
    Reconstruct(ReconstructArgs),
}

#[derive(Subcommand)]
enum SpectralCommand {
    /// Write J(ω) on a uniform frequency grid.
    Eval(SpectralEvalArgs),
}

#[derive(Args)]
struct SpectralEvalArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    wmin: f64,
    #[arg(long)]
    wmax: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Analytic,
    Quad,
}

#[derive(Args)]
struct AlphaArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    route: RouteArg,
    #[arg(long)]
    tmax: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
    /// Decomposition order for the analytic route; chosen automatically if absent.
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Pade,
    Matsubara,
}

impl From<SchemeArg> for PoleScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Pade => PoleScheme::Pade,
            SchemeArg::Matsubara => PoleScheme::Matsubara,
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Thermal pole count; doubled from 2 until α converges if absent.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, value_enum, default_value = "pade")]
    scheme: SchemeArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsArg {
    Bose,
    Fermi,
}

#[derive(Args)]
struct PadeArgs {
    #[arg(long, value_enum)]
    stats: StatsArg,
    #[arg(long)]
    order: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairsArg {
    Auto,
    On,
    Off,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    alpha: PathBuf,
    #[arg(long)]
    terms: usize,
    #[arg(long)]
    out: PathBuf,
    /// Spectral config; adds a J(ω) reconstruction check to the report.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pairs: PairsArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplittingArg {
    Trotter,
    Strang,
}

impl From<SplittingArg> for Splitting {
    fn from(s: SplittingArg) -> Self {
        match s {
            SplittingArg::Trotter => Splitting::Trotter,
            SplittingArg::Strang => Splitting::Strang,
        }
    }
}

#[derive(Args)]
struct EtaArgs {
    /// Bath JSON, or a fit report containing one.
    #[arg(long)]
    bath: PathBuf,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long, value_enum)]
    splitting: SplittingArg,
    /// Add the QUAPI counter term to the self coefficient.
    #[arg(long)]
    quapi: bool,
    /// Spectral config the reorganization energy is taken from.
    #[arg(long, requires = "quapi", conflicts_with = "lambda")]
    config: Option<PathBuf>,
    /// Reorganization energy in ps⁻¹.
    #[arg(long, requires = "quapi")]
    lambda: Option<f64>,
    /// Written to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    steps: usize,
    /// Largest Δk compared; defaults to --steps.
    #[arg(long)]
    dkmax: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Decomposition order for the Lorentzian families.
    #[arg(long)]
    order: Option<usize>,
    /// Exponential terms fitted for power_exp densities.
    #[arg(long, default_value_t = 4)]
    terms: usize,
    /// Per-Δk comparison CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    bath: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    wmin: f64,
    #[arg(long, default_value_t = 10.0)]
    wmax: f64,
    #[arg(long, default_value_t = 200)]
    n: usize,
}

/// Parses `argv` (program name first), runs the subcommand and reports what
/// happened. Errors go to `stderr` prefixed with `error:`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let exit_code = if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
            return CommandOutcome {
                exit_code,
                artifacts_written: Vec::new(),
            };
        }
    };
    let mut ctx = Session {
        stdout,
        stderr,
        written: Vec::new(),
    };
    let result = dispatch(cli.command, &mut ctx);
    let exit_code = match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(ctx.stderr, "error: {e}");
            e.exit_code()
        }
    };
    CommandOutcome {
        exit_code,
        artifacts_written: ctx.written,
    }
}

struct Session<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    written: Vec<PathBuf>,
}

impl Session<'_> {
    fn write_file(&mut self, path: &Path, text: &str) -> Result<(), CliError> {
        formats::write_atomic(path, text.as_bytes())?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    fn print(&mut self, text: &str) -> Result<(), CliError> {
        self.stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}")))
    }

    fn warn(&mut self, msg: &str) {
        let _ = writeln!(self.stderr, "warning: {msg}");
    }
}

fn dispatch(cmd: Command, s: &mut Session) -> Result<(), CliError> {
    match cmd {
        Command::Spectral {
            command: SpectralCommand::Eval(a),
        } => spectral_eval(a, s),
        Command::Alpha(a) => alpha(a, s),
        Command::Decompose(a) => decompose_cmd(a, s),
        Command::Pade(a) => pade(a, s),
        Command::Fit(a) => fit(a, s),
        Command::Eta(a) => eta(a, s),
        Command::Validate(a) => validate(a, s),
        Command::Reconstruct(a) => reconstruct(a, s),
    }
}

fn positive(value: f64, name: &str) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Validation(format!(
            "--{name} must be positive and finite, got {value}"
        )))
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 || !(a.is_finite() && b.is_finite() && b > a) {
        return Err(CliError::Validation(format!(
            "need at least 2 points on an increasing range, got {n} on [{a}, {b}]"
        )));
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

fn beta_of(ctx: &PhysicalContext) -> Option<f64> {
    ctx.beta_hbar()
}

fn spectral_eval(a: SpectralEvalArgs, s: &mut Session) -> Result<(), CliError> {
    let (spec, ctx) = SpectralConfig::load(&a.config)?.build()?;
    let omega = linspace(a.wmin, a.wmax, a.n)?;
    let j = omega
        .iter()
        .map(|&w| spec.eval(w, Some(&ctx)))
        .collect::<Result<Vec<_>, _>>()?;
    s.write_file(&a.out, &formats::spectral_csv(&omega, &j))
}

fn decomposition(
    spec: &SpectralDensity,
    ctx: &PhysicalContext,
    order: Option<usize>,
    scheme: PoleScheme,
) -> Result<DecompositionReport, CliError> {
    let opts = DecomposeOptions {
        scheme,
        ..DecomposeOptions::default()
    };
    Ok(match order {
        Some(n) => decompose(spec, ctx, n, &opts)?,
        None => decompose_auto(spec, ctx, &opts)?,
    })
}

fn alpha(a: AlphaArgs, s: &mut Session) -> Result<(), CliError> {
    let (spec, ctx) = SpectralConfig::load(&a.config)?.build()?;
    let times = uniform_times(0.0, positive(a.tmax, "tmax")?, a.n)?;
    let quad = QuadratureConfig::default();
    let grid = match a.route {
        RouteArg::Quad => alpha_quadrature_grid(&spec, &ctx, &times, AlphaRoute::HalfLine, &quad)?,
        RouteArg::Analytic => match analytic_alpha(&spec, &ctx, a.order, &times) {
            Ok(g) => g,
            Err(reason) => {
                s.warn(&format!("no analytic form ({reason}); using quadrature"));
                alpha_quadrature_grid(&spec, &ctx, &times, AlphaRoute::HalfLine, &quad)?
            }
        },
    };
    s.write_file(&a.out, &formats::alpha_csv(&grid))
}

/// α from the family's exponential decomposition or the power-law closed form.
fn analytic_alpha(
    spec: &SpectralDensity,
    ctx: &PhysicalContext,
    order: Option<usize>,
    times: &[f64],
) -> Result<AlphaGrid, String> {
    if has_power_law_closed_form(spec) {
        let values = times
            .iter()
            .map(|&t| alpha_power_law_spec(spec, ctx, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        return AlphaGrid::new(times.to_vec(), values, Provenance::Analytic)
            .map_err(|e| e.to_string());
    }
    if matches!(spec, SpectralDensity::PowerLawExpCutoff(_)) {
        return Err("power_exp has a closed form only for q = 1 and integer s".into());
    }
    let bath = decomposition(spec, ctx, order, PoleScheme::Pade)
        .map_err(|e| e.to_string())?
        .bath;
    alpha_exponential_grid(&bath, times).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct DecomposeSummary<'a> {
    family: &'a str,
    order: usize,
    terms: usize,
    alpha_rms_error: f64,
    reference_points: usize,
}

fn decompose_cmd(a: DecomposeArgs, s: &mut Session) -> Result<(), CliError> {
    let (spec, ctx) = SpectralConfig::load(&a.config)?.build()?;
    let report = decomposition(&spec, &ctx, a.order, a.scheme.into())?;
    let bath = BathJson::new(&report.bath, beta_of(&ctx));
    s.write_file(&a.out, &formats::to_json(&bath))?;
    let summary = DecomposeSummary {
        family: spec.family_name(),
        order: report.order,
        terms: report.bath.len(),
        alpha_rms_error: report.alpha_rms_error,
        reference_points: report.grid.len(),
    };
    s.print(&formats::to_json(&summary))
}

fn pade(a: PadeArgs, s: &mut Session) -> Result<(), CliError> {
    let stats = match a.stats {
        StatsArg::Bose => Statistics::Bose,
        StatsArg::Fermi => Statistics::Fermi,
    };
    let p = pade_parameters(stats, a.order)?;
    let mut out = String::from("n,xi,weight\n");
    for (i, (x, w)) in p.xi.iter().zip(&p.weights).enumerate() {
        out.push_str(&format!("{},{x:.16e},{w:.16e}\n", i + 1));
    }
    s.print(&out)
}

/// Frequency grid for the J(ω) check of a fit: up to a few cutoffs.
fn check_grid(spec: &SpectralDensity) -> Vec<f64> {
    let top = 5.0 * spec.frequency_scale();
    (1..=200).map(|i| top * i as f64 / 200.0).collect()
}

fn fit(a: FitArgs, s: &mut Session) -> Result<(), CliError> {
    let text = formats::read_text(&a.alpha)?;
    let grid = formats::parse_alpha_csv(&text, Provenance::Quadrature)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.alpha.display())))?;
    let opts = FitOptions {
        conjugate_pairs: match a.pairs {
            PairsArg::Auto => None,
            PairsArg::On => Some(true),
            PairsArg::Off => Some(false),
        },
        ..FitOptions::default()
    };
    let mut report = fit_exponential_bath(&grid, a.terms, &opts)?;
    let mut beta = None;
    if let Some(path) = &a.config {
        let (spec, ctx) = SpectralConfig::load(path)?.build()?;
        beta = beta_of(&ctx);
        if ctx.is_zero_temperature() {
            s.warn("zero temperature: skipping the J(omega) check");
        } else {
            fit_quality_vs_spectrum(&mut report, &spec, &ctx, &check_grid(&spec))?;
        }
    }
    if !report.converged {
        s.warn(&format!(
            "fit stopped after {} iterations without converging",
            report.iterations
        ));
    }
    s.write_file(
        &a.out,
        &formats::to_json(&FitReportJson::new(&report, beta)),
    )
}

fn eta(a: EtaArgs, s: &mut Session) -> Result<(), CliError> {
    let bath = formats::read_bath(&a.bath)?.bath()?;
    let lambda = match (a.quapi, a.config, a.lambda) {
        (false, _, _) => None,
        (true, Some(path), _) => {
            let (spec, ctx) = SpectralConfig::load(&path)?.build()?;
            Some(reorganization_energy(
                &spec,
                &ctx,
                &QuadratureConfig::default(),
            )?)
        }
        (true, None, Some(l)) => Some(l),
        (true, None, None) => {
            return Err(CliError::Usage("--quapi needs --config or --lambda".into()));
        }
    };
    let table = build_eta_table(&bath, a.dt, a.steps, a.splitting.into(), lambda)?;
    let csv = formats::eta_csv(&table);
    match &a.out {
        Some(path) => s.write_file(path, &csv),
        None => s.print(&csv),
    }
}

#[derive(Serialize)]
struct ValidateSummary {
    family: &'static str,
    bath_source: String,
    bath_terms: usize,
    dt_ps: f64,
    dk_max: usize,
    max_rel_err_vs_makri: f64,
    max_rel_err_vs_vagov: f64,
    makri_failures: usize,
    vagov_failures: usize,
    tolerance: f64,
    time_analytic_s: f64,
    time_makri_s: f64,
    time_vagov_s: f64,
    speedup: f64,
    passed: bool,
}

fn validate(a: ValidateArgs, s: &mut Session) -> Result<(), CliError> {
    let cfg = SpectralConfig::load(&a.config)?;
    let (spec, ctx) = cfg.build()?;
    let dt = positive(a.dt, "dt")?;
    let tol = positive(a.tol, "tol")?;
    if a.steps == 0 {
        return Err(CliError::Validation("--steps must be at least 1".into()));
    }
    let dk_max = a.dkmax.unwrap_or(a.steps);
    if dk_max > a.steps {
        return Err(CliError::Validation(format!(
            "--dkmax {dk_max} exceeds --steps {}",
            a.steps
        )));
    }

    let (bath, source) = validation_bath(&cfg, &spec, &ctx, dt, dk_max, a.order, a.terms)?;
    let quad = QuadratureConfig::default().with_rel_tol(1e-8);
    let origin = Instant::now();
    let r = benchmark_eta(&bath, &spec, &ctx, dt, dk_max, &quad, || origin.elapsed())?;

    let passed = r.max_rel_err_vs_makri <= tol
        && r.max_rel_err_vs_vagov <= tol
        && r.makri_failures == 0
        && r.vagov_failures == 0;
    if let Some(path) = &a.out {
        let mut csv =
            String::from("dk,re_analytic,im_analytic,re_makri,im_makri,re_vagov,im_vagov\n");
        let cell = |v: Option<anadif::Complex64>| match v {
            Some(z) => format!("{:.16e},{:.16e}", z.re, z.im),
            None => "nan,nan".into(),
        };
        for dk in 0..r.points {
            let z = r.analytic[dk];
            csv.push_str(&format!(
                "{dk},{:.16e},{:.16e},{},{}\n",
                z.re,
                z.im,
                cell(r.makri[dk]),
                cell(r.vagov[dk])
            ));
        }
        s.write_file(path, &csv)?;
    }
    let summary = ValidateSummary {
        family: spec.family_name(),
        bath_source: source,
        bath_terms: bath.len(),
        dt_ps: dt,
        dk_max,
        max_rel_err_vs_makri: r.max_rel_err_vs_makri,
        max_rel_err_vs_vagov: r.max_rel_err_vs_vagov,
        makri_failures: r.makri_failures,
        vagov_failures: r.vagov_failures,
        tolerance: tol,
        time_analytic_s: r.time_analytic.as_secs_f64(),
        time_makri_s: r.time_makri.as_secs_f64(),
        time_vagov_s: r.time_vagov.as_secs_f64(),
        speedup: r.speedup,
        passed,
    };
    s.print(&formats::to_json(&summary))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "analytic eta differs from the oracles by {:.3e} (makri) and {:.3e} (vagov), tolerance {tol:e}; \
             oracle failures {}/{}",
            r.max_rel_err_vs_makri, r.max_rel_err_vs_vagov, r.makri_failures, r.vagov_failures
        )))
    }
}

/// The bath validated for a config: the decomposition for the Lorentzian
/// families, otherwise a fit of quadrature α over the swept time span.
fn validation_bath(
    cfg: &SpectralConfig,
    spec: &SpectralDensity,
    ctx: &PhysicalContext,
    dt: f64,
    dk_max: usize,
    order: Option<usize>,
    terms: usize,
) -> Result<(ExponentialBath, String), CliError> {
    if cfg.family != Family::PowerExp {
        let r = decomposition(spec, ctx, order, PoleScheme::Pade)?;
        return Ok((r.bath, format!("pade decomposition, order {}", r.order)));
    }
    let t1 = dt * dk_max.max(1) as f64;
    let times = uniform_times(0.0, t1, 401)?;
    let grid = alpha_quadrature_grid(
        spec,
        ctx,
        &times,
        AlphaRoute::HalfLine,
        &QuadratureConfig::default(),
    )?;
    let report = fit_exponential_bath(&grid, terms, &FitOptions::default())?;
    Ok((
        report.bath,
        format!(
            "{terms}-term fit on [0, {t1}] ps, rms residual {:.3e}",
            report.rms_residual
        ),
    ))
}

#[derive(Serialize)]
struct ReconstructSummary {
    points: usize,
    max_abs_err: f64,
    max_rel_err: f64,
    rms_rel_err: f64,
}

fn reconstruct(a: ReconstructArgs, s: &mut Session) -> Result<(), CliError> {
    let stored = formats::read_bath(&a.bath)?;
    let bath = stored.bath()?;
    let (spec, ctx) = SpectralConfig::load(&a.config)?.build()?;
    if let (Some(b), Some(c)) = (stored.beta_hbar_ps, beta_of(&ctx)) {
        if (b - c).abs() > 1e-12 * c {
            s.warn(&format!(
                "bath was made at beta_hbar_ps = {b}, config has {c}"
            ));
        }
    }
    let omega = linspace(a.wmin, a.wmax, a.n)?;
    let mut csv = String::from("omega_per_ps,j,j_reconstructed\n");
    let mut pairs = Vec::with_capacity(omega.len());
    for &w in &omega {
        let j = spec.eval(w, Some(&ctx))?;
        let jr = reconstruct_spectral_density(&bath, &ctx, w)?;
        csv.push_str(&format!("{w:.16e},{j:.16e},{jr:.16e}\n"));
        pairs.push((j, jr));
    }
    let scale = pairs.iter().fold(0.0_f64, |m, (j, _)| m.max(j.abs()));
    let max_abs_err = pairs
        .iter()
        .fold(0.0_f64, |m, (j, jr)| m.max((jr - j).abs()));
    let rms =
        (pairs.iter().map(|(j, jr)| (jr - j).powi(2)).sum::<f64>() / pairs.len() as f64).sqrt();
    let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
    s.write_file(&a.out, &csv)?;
    let summary = ReconstructSummary {
        points: pairs.len(),
        max_abs_err,
        max_rel_err: rel(max_abs_err),
        rms_rel_err: rel(rms),
    };
    s.print(&formats::to_json(&summary))
}
