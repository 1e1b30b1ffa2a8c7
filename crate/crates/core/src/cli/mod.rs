//! Command-line front end: formula evaluation, sweeps, W_k, simulation and
//! the validation battery.
//!
//! Every document starts with the fully resolved parameters: a `metadata`
//! object in JSON, `# key=value` lines in CSV.

pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotics::{w, w1_closed, w2_closed, Approximation, Approximator, Bands, WalkConfig};
use crate::distributions::JumpModel;
use crate::error::Error;
use crate::simulation::{
    estimate_plain_many, estimate_stratified_many, oracle_w_simplex, Estimate, MCConfig,
    DEFAULT_K_CAP, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_Y_FACTOR,
};
use crate::special::QuadratureSettings;
use crate::validation::{Battery, Status, ValidationConfig};
use output::{num, opt};

/// Environment variable that replaces the default seed.
pub const SEED_ENV: &str = "CENSORED_LDP_SEED";

/// Exit status for a criterion failure in `validate`.
pub const EXIT_CRITERION: u8 = 1;
/// Exit status for usage, domain and range errors.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for quadrature that did not converge.
pub const EXIT_CONVERGENCE: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Convergence { .. }) => EXIT_CONVERGENCE,
            _ => EXIT_USAGE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "censored-ldp",
    version,
    about = "Tail approximations and rare-event simulation for censored heavy-tailed sums"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the approximation of P(Y_n > x) at one level.
    Approx(ApproxArgs),
    /// Evaluate the approximation on a grid of levels, optionally with Monte Carlo.
    Sweep(SweepArgs),
    /// Evaluate W_k(z) by quadrature, closed form and the simplex oracle.
    Wk(WkArgs),
    /// Estimate P(Y_n > x) by simulation.
    Simulate(SimulateArgs),
    /// Run the acceptance battery and report PASS/FAIL per criterion.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum McMethod {
    Plain,
    Stratified,
}

/// Jump law and walk.
#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    /// Jump law, e.g. `pareto:alpha=3`.
    #[arg(long, value_name = "SPEC", conflicts_with = "alpha")]
    pub jump: Option<String>,
    /// Tail index; shorthand for `--jump pareto:alpha=<ALPHA>`. Default 3.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Number of summands.
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    /// Censoring level.
    #[arg(
        long = "M",
        value_name = "M",
        default_value_t = 3000.0,
        allow_negative_numbers = true
    )]
    pub m: f64,
    /// Half-width of the near-multiple bands; default 2h.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Inner margin of the interior bands; default min(4 s_n / M, 1/8).
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    /// Slack below M of the single-jump range; default 4 (n ln n)^(1/2).
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    /// Largest number of censored jumps handled.
    #[arg(long)]
    pub k_max: Option<usize>,
}

impl WalkArgs {
    pub fn model(&self) -> CliResult<JumpModel> {
        Ok(match (&self.jump, self.alpha) {
            (Some(spec), _) => spec.parse()?,
            (None, Some(a)) => JumpModel::standardized_pareto(a)?,
            (None, None) => JumpModel::standardized_pareto(3.0)?,
        })
    }

    pub fn approximator(&self) -> CliResult<Approximator> {
        let config = WalkConfig::new(self.n, self.m, self.model()?)?;
        let d = Bands::defaults(&config);
        let h = self.h.unwrap_or(match self.eps {
            Some(eps) => d.h.min(eps),
            None => d.h,
        });
        let bands = Bands::new(
            self.eps.unwrap_or(2.0 * h),
            h,
            self.d.unwrap_or(d.d),
            d.c,
            self.k_max.unwrap_or(d.k_max),
        )?;
        Ok(Approximator::new(config).with_bands(bands)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Samples per stratum, or walks for the plain estimator.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: u64,
    /// Seed; defaults to $CENSORED_LDP_SEED, then a fixed constant.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stratification threshold as a fraction of M.
    #[arg(long, default_value_t = DEFAULT_Y_FACTOR)]
    pub y_factor: f64,
    /// Largest sampled number of jumps above the threshold.
    #[arg(long, default_value_t = DEFAULT_K_CAP)]
    pub k_cap: usize,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

impl McArgs {
    pub fn config(&self) -> CliResult<MCConfig> {
        let mc = MCConfig {
            samples: self.samples,
            seed: resolve_seed(self.seed)?,
            y_factor: self.y_factor,
            k_cap: self.k_cap,
            workers: self.workers,
            y: None,
        };
        mc.validate()?;
        Ok(mc)
    }
}

/// Explicit seed, else the environment, else the built-in default.
pub fn resolve_seed(explicit: Option<u64>) -> CliResult<u64> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Usage(format!("{SEED_ENV}={v} is not an unsigned 64-bit integer"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[derive(Debug, Clone, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Level x.
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub x_from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x_to: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Add Monte Carlo columns.
    #[arg(long, value_enum)]
    pub with_mc: Option<McMethod>,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WkArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub z: f64,
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
    /// Also run the simplex oracle with this many samples.
    #[arg(long)]
    pub oracle_samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Levels; repeat the flag or separate by commas.
    #[arg(
        long,
        required = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub x: Vec<f64>,
    #[arg(long, value_enum, default_value_t = McMethod::Stratified)]
    pub method: McMethod,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Jump law, e.g. `pareto:alpha=3`
    #[arg(long, value_name = "SPEC", conflicts_with = "alpha")]
    pub jump: Option<String>,
    /// Tail index of the standardized Pareto jumps
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
    /// Number of summands of the main walk
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    /// Censoring level of the main walk
    #[arg(long = "M", value_name = "M", default_value_t = 3000.0)]
    pub m: f64,
    /// W-function checks only.
    #[arg(long)]
    pub quick: bool,
    /// Samples for the simplex oracle.
    #[arg(long, default_value_t = 10_000_000)]
    pub simplex_samples: u64,
    #[command(flatten)]
    pub mc: McArgs,
    /// Report format
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
    /// Write the report to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Resolved parameters echoed into every document.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub command: &'static str,
    pub version: &'static str,
    pub jump: String,
    pub n: u64,
    #[serde(rename = "M")]
    pub m: f64,
    pub alpha: f64,
    pub s_n: f64,
    #[serde(rename = "Pi_n")]
    pub pi_n: f64,
    pub censoring_ratio: f64,
    pub soft_censoring_warning: bool,
    pub eps: f64,
    pub h: f64,
    pub d: f64,
    pub c: f64,
    pub k_max: usize,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub y_factor: Option<f64>,
    pub k_cap: Option<usize>,
    pub mc_method: Option<McMethod>,
}

impl Metadata {
    fn new(command: &'static str, a: &Approximator) -> Self {
        let c = a.config();
        let b = a.bands();
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            jump: c.model.to_string(),
            n: c.n,
            m: c.m,
            alpha: c.alpha(),
            s_n: c.s_n,
            pi_n: c.pi_n,
            censoring_ratio: c.censoring_ratio,
            soft_censoring_warning: c.soft_censoring_warning,
            eps: b.eps,
            h: b.h,
            d: b.d,
            c: b.c,
            k_max: b.k_max,
            seed: None,
            samples: None,
            y_factor: None,
            k_cap: None,
            mc_method: None,
        }
    }

    fn with_mc(mut self, mc: &MCConfig, method: McMethod) -> Self {
        self.seed = Some(mc.seed);
        self.samples = Some(mc.samples);
        self.mc_method = Some(method);
        if method == McMethod::Stratified {
            self.y_factor = Some(mc.y_factor);
            self.k_cap = Some(mc.k_cap);
        }
        self
    }
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Approx(a) => cmd_approx(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Wk(a) => cmd_wk(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Validate(a) => cmd_validate(&a),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// JSON body of `approx`.
#[derive(Debug, Serialize)]
struct ApproxBody<'a> {
    x: f64,
    #[serde(rename = "x_over_M")]
    x_over_m: f64,
    regime: String,
    k: usize,
    value: f64,
    terms: &'a [crate::asymptotics::Term],
    diagnostics: &'a [crate::asymptotics::Term],
}

fn approx_body(x: f64, m: f64, r: &Approximation) -> ApproxBody<'_> {
    ApproxBody {
        x,
        x_over_m: x / m,
        regime: r.regime.kind.to_string(),
        k: r.k,
        value: r.value,
        terms: &r.terms,
        diagnostics: &r.diagnostics,
    }
}

/// Header of the approximation table; `term_j` runs to `k_max + 1`.
pub fn approx_header(k_max: usize, with_mc: bool) -> Vec<String> {
    let mut h: Vec<String> = ["x", "x_over_M", "regime", "k", "value"]
        .map(String::from)
        .to_vec();
    h.extend((0..=k_max + 1).map(|j| format!("term_{j}")));
    h.push("diagnostic".into());
    h.push("diagnostic_value".into());
    if with_mc {
        h.extend(["mc_p", "mc_se", "bias_bound"].map(String::from));
    }
    h
}

fn approx_row(
    x: f64,
    m: f64,
    k_max: usize,
    r: &Approximation,
    mc: Option<&Estimate>,
) -> Vec<String> {
    let mut row = vec![
        num(x),
        num(x / m),
        r.regime.kind.to_string(),
        r.k.to_string(),
        num(r.value),
    ];
    row.extend((0..=k_max + 1).map(|j| opt(r.terms.get(j).map(|t| t.value))));
    match r.diagnostics.first() {
        Some(d) => {
            row.push(d.label.clone());
            row.push(num(d.value));
        }
        None => row.extend([String::new(), String::new()]),
    }
    if let Some(e) = mc {
        row.extend([num(e.p_hat), num(e.std_err), num(e.bias_bound)]);
    }
    row
}

pub fn cmd_approx(args: &ApproxArgs) -> CliResult<u8> {
    let a = args.walk.approximator()?;
    let r = a.auto(args.x)?;
    let meta = Metadata::new("approx", &a);
    let m = a.config().m;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => output::json(&meta, "approximation", &approx_body(args.x, m, &r)),
        Format::Csv => {
            let k_max = a.bands().k_max;
            output::csv(
                &meta,
                &approx_header(k_max, false),
                &[approx_row(args.x, m, k_max, &r, None)],
            )
        }
    };
    emit(&args.output.out, &text)?;
    Ok(0)
}

fn grid(from: f64, to: f64, points: usize) -> CliResult<Vec<f64>> {
    if points < 2 {
        return Err(CliError::Usage(format!(
            "--points must be at least 2, got {points}"
        )));
    }
    if !(from < to) {
        return Err(CliError::Usage(format!(
            "--x-from {from} must be below --x-to {to}"
        )));
    }
    let step = (to - from) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                to
            } else {
                from + step * i as f64
            }
        })
        .collect())
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<u8> {
    let a = args.walk.approximator()?;
    let xs = grid(args.x_from, args.x_to, args.points)?;
    let rows: Vec<Approximation> = xs
        .iter()
        .map(|&x| a.auto(x).map_err(|e| CliError::Core(annotate(e, x))))
        .collect::<CliResult<_>>()?;
    let mut meta = Metadata::new("sweep", &a);
    let estimates = match args.with_mc {
        Some(method) => {
            let mc = args.mc.config()?;
            meta = meta.with_mc(&mc, method);
            Some(simulate(a.config(), &xs, &mc, method)?)
        }
        None => None,
    };
    let m = a.config().m;
    let k_max = a.bands().k_max;
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let table: Vec<Vec<String>> = xs
                .iter()
                .zip(&rows)
                .enumerate()
                .map(|(i, (&x, r))| approx_row(x, m, k_max, r, estimates.as_ref().map(|e| &e[i])))
                .collect();
            output::csv(&meta, &approx_header(k_max, estimates.is_some()), &table)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                #[serde(flatten)]
                approx: ApproxBody<'a>,
                mc: Option<&'a Estimate>,
            }
            let body: Vec<Row> = xs
                .iter()
                .zip(&rows)
                .enumerate()
                .map(|(i, (&x, r))| Row {
                    approx: approx_body(x, m, r),
                    mc: estimates.as_ref().map(|e| &e[i]),
                })
                .collect();
            output::json(&meta, "rows", &body)
        }
    };
    emit(&args.output.out, &text)?;
    Ok(0)
}

fn annotate(e: Error, x: f64) -> Error {
    match e {
        Error::Range(msg) => Error::Range(format!("at x = {x}: {msg}")),
        Error::Domain(msg) => Error::Domain(format!("at x = {x}: {msg}")),
        other => other,
    }
}

fn simulate(
    config: &WalkConfig,
    xs: &[f64],
    mc: &MCConfig,
    method: McMethod,
) -> CliResult<Vec<Estimate>> {
    Ok(match method {
        McMethod::Plain => estimate_plain_many(config, xs, mc)?,
        McMethod::Stratified => estimate_stratified_many(config, xs, mc)?,
    })
}

#[derive(Debug, Serialize)]
struct WkBody {
    k: usize,
    z: f64,
    alpha: f64,
    quadrature: f64,
    closed_form: Option<f64>,
    oracle: Option<crate::simulation::SimplexEstimate>,
    oracle_seed: Option<u64>,
}

pub fn cmd_wk(args: &WkArgs) -> CliResult<u8> {
    // validates alpha the same way the walk does
    JumpModel::standardized_pareto(args.alpha)?;
    let quadrature = w(args.k, args.z, args.alpha, &QuadratureSettings::default())?;
    let closed_form = match args.k {
        0 => Some(1.0),
        1 => Some(w1_closed(args.z, args.alpha)?),
        2 => Some(w2_closed(args.z, args.alpha)?),
        _ => None,
    };
    let (oracle, oracle_seed) = match args.oracle_samples {
        Some(s) if args.k >= 1 => {
            let seed = resolve_seed(args.seed)?;
            (
                Some(oracle_w_simplex(args.k, args.z, args.alpha, s, seed)?),
                Some(seed),
            )
        }
        _ => (None, None),
    };
    let body = WkBody {
        k: args.k,
        z: args.z,
        alpha: args.alpha,
        quadrature,
        closed_form,
        oracle,
        oracle_seed,
    };
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&body).unwrap_or_default();
            s.push('\n');
            s
        }
        Format::Csv => {
            let header = [
                "k",
                "z",
                "alpha",
                "quadrature",
                "closed_form",
                "oracle_value",
                "oracle_se",
                "oracle_seed",
            ]
            .map(String::from);
            let row = [
                body.k.to_string(),
                num(body.z),
                num(body.alpha),
                num(body.quadrature),
                opt(body.closed_form),
                opt(body.oracle.map(|o| o.value)),
                opt(body.oracle.map(|o| o.std_err)),
                body.oracle_seed.map(|s| s.to_string()).unwrap_or_default(),
            ];
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
    };
    emit(&args.output.out, &text)?;
    Ok(0)
}

/// Header of the `simulate` table.
pub const SIMULATE_HEADER: [&str; 10] = [
    "x",
    "x_over_M",
    "method",
    "p_hat",
    "std_err",
    "rel_se",
    "samples",
    "y",
    "bias_bound",
    "approx_value",
];

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<u8> {
    let a = args.walk.approximator()?;
    let mc = args.mc.config()?;
    let estimates = simulate(a.config(), &args.x, &mc, args.method)?;
    let meta = Metadata::new("simulate", &a).with_mc(&mc, args.method);
    // the formula at each level, where one applies
    let theory: Vec<Option<f64>> = args
        .x
        .iter()
        .map(|&x| a.auto(x).ok().map(|r| r.value))
        .collect();
    let m = a.config().m;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                #[serde(flatten)]
                estimate: &'a Estimate,
                approx_value: Option<f64>,
            }
            let body: Vec<Row> = estimates
                .iter()
                .zip(&theory)
                .map(|(e, t)| Row {
                    estimate: e,
                    approx_value: *t,
                })
                .collect();
            output::json(&meta, "estimates", &body)
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = estimates
                .iter()
                .zip(&theory)
                .map(|(e, t)| {
                    vec![
                        num(e.x),
                        num(e.x / m),
                        format!("{:?}", e.method).to_lowercase(),
                        num(e.p_hat),
                        num(e.std_err),
                        num(e.relative_se()),
                        e.samples.to_string(),
                        opt(e.y),
                        num(e.bias_bound),
                        opt(*t),
                    ]
                })
                .collect();
            output::csv(&meta, &SIMULATE_HEADER.map(String::from), &rows)
        }
    };
    emit(&args.output.out, &text)?;
    Ok(0)
}

pub fn cmd_validate(args: &ValidateArgs) -> CliResult<u8> {
    let alpha = match &args.jump {
        Some(spec) => spec.parse::<JumpModel>()?.alpha(),
        None => args.alpha,
    };
    let config = ValidationConfig {
        n: args.n,
        m: args.m,
        alpha,
        mc: args.mc.config()?,
        simplex_samples: args.simplex_samples,
        quick: args.quick,
    };
    let battery = Battery::new(config)?;
    let warning = battery.warning();
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }
    let mut reports = Vec::new();
    let mut text = String::new();
    for id in battery.selected() {
        let r = battery.criterion(id);
        if args.format == ReportFormat::Text {
            // progress on stderr keeps long runs observable
            eprintln!("{}", r.headline());
            text.push_str(&r.to_string());
        }
        reports.push(r);
    }
    let failed = reports.iter().filter(|r| r.status == Status::Fail).count();
    let skipped = reports
        .iter()
        .filter(|r| r.status == Status::Skipped)
        .count();
    let passed = reports.len() - failed - skipped;
    let doc = match args.format {
        ReportFormat::Text => {
            format!("{text}summary: {passed} passed, {failed} failed, {skipped} skipped\n")
        }
        ReportFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                config: &'a ValidationConfig,
                warning: Option<String>,
                reports: &'a [crate::validation::CriterionReport],
            }
            let mut s = serde_json::to_string_pretty(&Doc {
                config: battery.config(),
                warning,
                reports: &reports,
            })
            .unwrap_or_default();
            s.push('\n');
            s
        }
    };
    emit(&args.out, &doc)?;
    Ok(if failed > 0 { EXIT_CRITERION } else { 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_and_errors() {
        let g = grid(1500.0, 7500.0, 200).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!((g[0], g[199]), (1500.0, 7500.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(grid(1.0, 2.0, 1).is_err());
        assert!(grid(2.0, 1.0, 5).is_err());
    }

    #[test]
    fn header_layout() {
        let h = approx_header(6, true);
        assert_eq!(h[..5], ["x", "x_over_M", "regime", "k", "value"]);
        assert_eq!(h[5], "term_0");
        assert_eq!(h[12], "term_7");
        assert_eq!(
            h[13..],
            [
                "diagnostic",
                "diagnostic_value",
                "mc_p",
                "mc_se",
                "bias_bound"
            ]
        );
    }

    #[test]
    fn exit_codes() {
        let conv = CliError::Core(Error::Convergence {
            value: 0.0,
            error_estimate: 1.0,
            subdivisions: 10,
        });
        assert_eq!(conv.exit_code(), EXIT_CONVERGENCE);
        assert_eq!(
            CliError::Core(Error::Range("r".into())).exit_code(),
            EXIT_USAGE
        );
        assert_eq!(CliError::Usage("u".into()).exit_code(), EXIT_USAGE);
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "censored-ldp",
            "approx",
            "--jump",
            "pareto:alpha=3",
            "--n",
            "10000",
            "--M",
            "3000",
            "--x",
            "-5",
        ])
        .unwrap();
        let Command::Approx(a) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(a.x, -5.0);
        assert_eq!(a.walk.m, 3000.0);
        assert!(Cli::try_parse_from([
            "censored-ldp",
            "approx",
            "--jump",
            "pareto:alpha=3",
            "--alpha",
            "3",
            "--x",
            "1"
        ])
        .is_err());
        let s =
            Cli::try_parse_from(["censored-ldp", "simulate", "--x", "1,2", "--x", "3"]).unwrap();
        let Command::Simulate(s) = s.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(s.x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn explicit_bands() {
        let args = WalkArgs {
            jump: None,
            alpha: Some(3.0),
            n: 10_000,
            m: 3000.0,
            eps: Some(0.1),
            h: None,
            d: None,
            k_max: None,
        };
        let a = args.approximator().unwrap();
        assert_eq!((a.bands().eps, a.bands().h), (0.1, 0.1));
    }
}
