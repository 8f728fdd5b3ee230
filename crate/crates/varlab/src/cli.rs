//! The `varlab` command line.
//!
//! Exit codes: 0 on success, 1 when a run fails (including a failed
//! probability check), 2 for usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use varlab_core::analysis::{MatrixSweepRecord, SweepSpec};
use varlab_core::experiments::{
    run_seed, split_for_seed, train_cell_with_params, initial_params, reduce_over_lr, CheckerboardDataset, TrainConfig,
    TrainData, TrainResult,
};
use varlab_core::numerics::median;
use varlab_core::variability::{Grid2D, V3Config, DEFAULT_GRID_POINTS};
use varlab_core::{Activation, Init, InitScheme, Rng};

use crate::drivers;
use crate::manifest::RunManifest;
use crate::output::{atomic_write, write_csv, write_json};
use crate::snapshot::ParamsJson;
use crate::svg;

/// Environment variable read when `--seed` is absent.
pub const SEED_ENV: &str = "VARLAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "varlab", version, about = "Variability, collapse-to-constant and trainability experiments for deep fully connected networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed; falls back to $VARLAB_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "varlab-out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write SVG charts.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalized surfaces |F(x)|^2 / z_max of random extended networks.
    Landscape(LandscapeArgs),
    /// Third-derivative variability V3 against depth at a fixed budget.
    V3(V3Args),
    /// Spectral norms of C- and G-matrices against depth.
    Matrices(MatricesArgs),
    /// Closed-form against Monte-Carlo distance-preservation probabilities.
    Probcheck(ProbArgs),
    /// Train one depth on the checkerboard.
    Train(TrainArgs),
    /// Train a range of depths on the checkerboard at a fixed budget.
    Trainsweep(TrainsweepArgs),
    /// Export the checkerboard dataset and its train/test split.
    Checkerboard(CheckerboardArgs),
}

/// `gaussian` picks the scale matching the activation (sigmoid: normal(1),
/// relu: kaiming, abs: xavier); anything else names a scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitArg {
    Gaussian,
    Scheme(InitScheme),
}

impl FromStr for InitArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("gaussian") {
            Ok(InitArg::Gaussian)
        } else {
            s.parse().map(InitArg::Scheme).map_err(|e: varlab_core::Error| e.to_string())
        }
    }
}

impl InitArg {
    pub fn scheme(self, act: Activation) -> InitScheme {
        match self {
            InitArg::Scheme(s) => s,
            InitArg::Gaussian => match act {
                Activation::Sigmoid => InitScheme::Normal { sigma: 1.0 },
                Activation::Relu => InitScheme::Kaiming,
                Activation::Abs => InitScheme::Xavier,
            },
        }
    }
}

/// Depths as `start:end:step` (inclusive), a comma list, or a single value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthList(pub Vec<usize>);

impl FromStr for DepthList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("invalid depth list '{s}'");
        let list: Vec<usize> = if s.contains(':') {
            let parts: Vec<usize> = s
                .split(':')
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            let (start, end, step) = match parts[..] {
                [a, b] => (a, b, 1),
                [a, b, c] => (a, b, c),
                _ => return Err(bad()),
            };
            if step == 0 || start > end {
                return Err(bad());
            }
            (start..=end).step_by(step).collect()
        } else {
            s.split(',')
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?
        };
        if list.is_empty() || list.contains(&0) {
            return Err(format!("depths must be positive: '{s}'"));
        }
        Ok(DepthList(list))
    }
}

/// Depths 2..=20, then 22..=30 in steps of 2.
pub fn default_sweep_depths() -> Vec<usize> {
    (2..=20).chain((22..=30).step_by(2)).collect()
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[arg(long, default_value = "relu")]
    pub activation: Activation,
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    /// Hidden-parameter budget (d^2 + d) L.
    #[arg(long, default_value_t = 10_000)]
    pub params: usize,
    /// Grid points per axis over [-1, 1].
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid: usize,
    #[arg(long, default_value_t = 9)]
    pub samples: usize,
    #[arg(long, default_value = "gaussian")]
    pub init: InitArg,
    /// Standard deviation of the biases.
    #[arg(long, default_value_t = 1.0)]
    pub bias_sigma: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct V3Args {
    #[arg(long, default_value_t = 3300)]
    pub params: usize,
    #[arg(long, default_value = "3:45:3")]
    pub depths: DepthList,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value = "relu")]
    pub activation: Activation,
    #[arg(long, default_value = "gaussian")]
    pub init: InitArg,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid: usize,
    #[arg(long, default_value_t = 1.0)]
    pub bias_sigma: f64,
    /// Samples below this value count as zero in the geometric mean.
    #[arg(long, default_value_t = varlab_core::numerics::DEFAULT_ZERO_THRESHOLD)]
    pub zero_threshold: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MatricesArgs {
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_depth: usize,
    /// Comma-separated; ratios are reported against the first.
    #[arg(long = "activation", alias = "activations", value_delimiter = ',', default_value = "relu")]
    pub activations: Vec<Activation>,
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    #[arg(long, default_value = "gaussian")]
    pub init: InitArg,
    /// Bias standard deviation; defaults to the weight scale of the scheme.
    #[arg(long)]
    pub bias_sigma: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    #[arg(long = "p", value_delimiter = ',', default_value = "0.25,0.5")]
    pub p: Vec<f64>,
    #[arg(long = "d", value_delimiter = ',', default_value = "1,2,3")]
    pub d: Vec<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Protocol {
    /// Desk-scale protocol: 10000 iterations, rates {0.01, 0.1, 0.3}, 3 seeds.
    #[arg(long)]
    pub reduced: bool,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub lr_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long, default_value = "relu")]
    pub activation: Activation,
    #[arg(long, default_value = "kaiming")]
    pub init: InitScheme,
    /// Standard deviation of the initial biases.
    #[arg(long, default_value_t = 0.0)]
    pub bias_sigma: f64,
    /// Step along the summed-loss gradient instead of the mean gradient.
    #[arg(long)]
    pub sum_steps: bool,
    /// Swap the labels of the two block colors.
    #[arg(long)]
    pub flip_parity: bool,
}

impl Protocol {
    fn config(&self, budget: usize, depth: usize) -> TrainConfig {
        let mut cfg = if self.reduced {
            TrainConfig::reduced(budget, depth)
        } else {
            TrainConfig::full(budget, depth)
        };
        if let Some(it) = self.iterations {
            cfg = cfg.with_iterations(it);
        }
        if let Some(g) = &self.lr_grid {
            cfg.lr_grid = g.clone();
        }
        if let Some(s) = self.seeds {
            cfg.seeds = s;
        }
        cfg.activation = self.activation;
        cfg.init = Init::new(self.init).with_bias_sigma(self.bias_sigma);
        if self.sum_steps {
            cfg.step_scale = varlab_core::experiments::StepScale::Sum;
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 1600)]
    pub params: usize,
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    /// Loss-curve sampling interval in iterations.
    #[arg(long, default_value_t = 100)]
    pub history_every: usize,
    #[command(flatten)]
    pub protocol: Protocol,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainsweepArgs {
    #[arg(long, default_value_t = 3200)]
    pub params: usize,
    /// Default: 2..20, then 22..30 in steps of 2.
    #[arg(long)]
    pub depths: Option<DepthList>,
    #[command(flatten)]
    pub protocol: Protocol,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CheckerboardArgs {
    #[arg(long)]
    pub flip_parity: bool,
    #[command(flatten)]
    pub common: Common,
}

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<varlab_core::Error> for Failure {
    fn from(e: varlab_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Runs a parsed command; `Ok(false)` reports a completed run whose checks failed.
pub fn execute(command: Command) -> Result<bool, Failure> {
    let common = match &command {
        Command::Landscape(a) => &a.common,
        Command::V3(a) => &a.common,
        Command::Matrices(a) => &a.common,
        Command::Probcheck(a) => &a.common,
        Command::Train(a) => &a.common,
        Command::Trainsweep(a) => &a.common,
        Command::Checkerboard(a) => &a.common,
    }
    .clone();
    if common.jobs == Some(0) {
        return Err(usage("--jobs must be at least 1"));
    }
    let seed = resolve_seed(common.seed)?;
    let pool = drivers::pool(common.jobs)?;
    let started = Instant::now();
    let mut ctx = Ctx {
        out: common.out.clone(),
        svg: common.svg,
        outputs: Vec::new(),
    };
    let (name, params, results, ok) = pool.install(|| match command {
        Command::Landscape(a) => landscape(&a, seed, &mut ctx),
        Command::V3(a) => v3(&a, seed, &mut ctx),
        Command::Matrices(a) => matrices(&a, seed, &mut ctx),
        Command::Probcheck(a) => probcheck(&a, seed, &mut ctx),
        Command::Train(a) => train(&a, seed, &mut ctx),
        Command::Trainsweep(a) => trainsweep(&a, seed, &mut ctx),
        Command::Checkerboard(a) => checkerboard(&a, seed, &mut ctx),
    })?;
    let mut manifest = RunManifest::new(name, seed, params);
    manifest.outputs = ctx.outputs;
    manifest.results = results;
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.write(&ctx.out)?;
    Ok(ok)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}='{v}' is not an unsigned 64-bit integer"))),
        Err(_) => Ok(0),
    }
}

struct Ctx {
    out: PathBuf,
    svg: bool,
    outputs: Vec<String>,
}

impl Ctx {
    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out.join(name)
    }

    fn csv<T: Serialize>(&mut self, name: &str, header: &[&str], rows: &[T]) -> Result<()> {
        let p = self.path(name);
        write_csv(&p, header, rows)
    }

    fn svg(&mut self, name: &str, doc: &svg::Svg) -> Result<()> {
        let p = self.path(name);
        atomic_write(&p, doc.finish().as_bytes())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        write_json(&p, value)
    }
}

type Outcome = Result<(&'static str, serde_json::Value, serde_json::Value, bool), Failure>;

fn grid_arg(n: usize) -> Result<Grid2D, Failure> {
    Grid2D::square(n).map_err(|e| usage(format!("--grid: {e}")))
}

fn budget_check(budget: usize, depths: &[usize]) -> Result<(), Failure> {
    for &l in depths {
        varlab_core::experiments::width_for_depth(budget, l).map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn landscape(a: &LandscapeArgs, seed: u64, ctx: &mut Ctx) -> Outcome {
    let grid = grid_arg(a.grid)?;
    if a.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    if !(a.bias_sigma >= 0.0) {
        return Err(usage("--bias-sigma must be nonnegative"));
    }
    budget_check(a.params, &[a.depth])?;
    let scheme = a.init.scheme(a.activation);
    let init = Init::new(scheme).with_bias_sigma(a.bias_sigma);
    let width = varlab_core::experiments::width_for_depth(a.params, a.depth)?.width;
    let suite = drivers::landscapes(a.depth, a.params, a.activation, &init, &grid, a.samples, &Rng::new(seed))?;
    let stem = format!("landscape_{}_L{}", a.activation, a.depth);
    let mut panels = Vec::new();
    let mut per_sample = Vec::new();
    for (s, l) in suite.iter().enumerate() {
        let rows: Vec<(f64, f64, f64)> = (0..grid.len())
            .map(|k| {
                let [x, y] = grid.point(k);
                (x, y, l.field.values[k])
            })
            .collect();
        ctx.csv(&format!("{stem}_s{s}.csv"), &["x", "y", "value"], &rows)?;
        if ctx.svg {
            let title = format!("L={} sample {s}{}", a.depth, if l.collapsed { " (collapsed)" } else { "" });
            let panel = svg::heatmap(&l.field, &title);
            ctx.svg(&format!("{stem}_s{s}.svg"), &panel)?;
            panels.push(panel);
        }
        println!("sample {s}: z_max={:e} collapsed={}", l.z_max, l.collapsed);
        per_sample.push(json!({"sample": s, "z_max": l.z_max, "collapsed": l.collapsed}));
    }
    if ctx.svg && a.samples == 9 {
        ctx.svg(&format!("{stem}.svg"), &svg::grid(&panels, 3))?;
    }
    let params = json!({
        "activation": a.activation.name(), "depth": a.depth, "width": width, "params": a.params,
        "grid": a.grid, "samples": a.samples, "scheme": scheme.name(), "bias_sigma": a.bias_sigma,
    });
    Ok(("landscape", params, json!({ "samples": per_sample }), true))
}

fn v3(a: &V3Args, seed: u64, ctx: &mut Ctx) -> Outcome {
    let grid = grid_arg(a.grid)?;
    if a.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    budget_check(a.params, &a.depths.0)?;
    let scheme = a.init.scheme(a.activation);
    let cfg = V3Config {
        grid,
        num_samples: a.samples,
        zero_threshold: a.zero_threshold,
        init: Init::new(scheme).with_bias_sigma(a.bias_sigma),
        activation: a.activation,
        budget: a.params,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let points = drivers::v3_sweep(&cfg, &a.depths.0, &Rng::new(seed))?;
    let rows: Vec<(usize, usize, f64, usize)> = points
        .iter()
        .map(|p| (p.depth, p.width, p.v3, p.num_zero_samples))
        .collect();
    ctx.csv("v3.csv", &["L", "d", "V3", "num_zero_samples"], &rows)?;
    let peak = points.iter().max_by(|x, y| x.v3.total_cmp(&y.v3)).expect("at least one depth");
    println!("L,d,V3,num_zero_samples");
    for p in &points {
        let mark = if p.depth == peak.depth { "  <- peak" } else { "" };
        println!("{},{},{:e},{}{mark}", p.depth, p.width, p.v3, p.num_zero_samples);
    }
    if ctx.svg {
        let bars: Vec<(String, f64)> = points.iter().map(|p| (p.depth.to_string(), p.v3)).collect();
        let title = format!("V3, {} / {}", a.activation, scheme.name());
        ctx.svg("v3.svg", &svg::bar_chart(&title, "depth L", "V3", &bars))?;
    }
    let params = json!({
        "params": a.params, "depths": a.depths.0, "samples": a.samples, "activation": a.activation.name(),
        "scheme": scheme.name(), "grid": a.grid, "bias_sigma": a.bias_sigma, "zero_threshold": a.zero_threshold,
    });
    let first_zero = points.iter().find(|p| p.v3 == 0.0).map(|p| p.depth);
    Ok(("v3", params, json!({"peak_depth": peak.depth, "peak_v3": peak.v3, "first_zero_depth": first_zero}), true))
}

const MATRIX_HEADER: [&str; 8] = ["L", "norm_C", "norm_G_x", "norm_G_xbar", "log2_scale_C", "seed", "activation", "init"];

fn matrix_rows(records: &[MatrixSweepRecord]) -> Vec<(usize, f64, f64, f64, i32, u64, String, String)> {
    records
        .iter()
        .map(|r| {
            (
                r.depth,
                r.norm_c,
                r.norm_g_x,
                r.norm_g_xbar,
                r.log2_scale_c,
                r.seed,
                r.activation.name().to_string(),
                r.init.scheme.name(),
            )
        })
        .collect()
}

/// Per-depth medians over seeds of `f(record)`.
fn median_curve(sweeps: &[Vec<MatrixSweepRecord>], f: impl Fn(&MatrixSweepRecord) -> f64) -> Vec<f64> {
    let depth = sweeps.first().map_or(0, |s| s.len());
    (0..depth)
        .map(|k| median(&sweeps.iter().map(|s| f(&s[k])).collect::<Vec<_>>()))
        .collect()
}

fn matrices(a: &MatricesArgs, seed: u64, ctx: &mut Ctx) -> Outcome {
    if a.width == 0 || a.max_depth == 0 || a.seeds == 0 {
        return Err(usage("--width, --max-depth and --seeds must be at least 1"));
    }
    if a.activations.is_empty() {
        return Err(usage("--activation needs at least one value"));
    }
    if matches!(a.bias_sigma, Some(b) if !(b >= 0.0)) {
        return Err(usage("--bias-sigma must be nonnegative"));
    }
    let seeds: Vec<u64> = (0..a.seeds).map(|k| run_seed(seed, k)).collect();
    let mut by_act = Vec::new();
    let mut summary = Vec::new();
    for &act in &a.activations {
        let scheme = a.init.scheme(act);
        let bias = a
            .bias_sigma
            .unwrap_or_else(|| scheme.weight_sigma(a.width).unwrap_or(1.0));
        let init = Init::new(scheme).with_bias_sigma(bias);
        let specs: Vec<SweepSpec> = seeds
            .iter()
            .map(|&s| SweepSpec {
                width: a.width,
                max_depth: a.max_depth,
                activation: act,
                init,
                seed: s,
            })
            .collect();
        let sweeps = drivers::matrix_sweeps(&specs)?;
        for (s, sweep) in seeds.iter().zip(&sweeps) {
            ctx.csv(&format!("matrices_{act}_seed{s}.csv"), &MATRIX_HEADER, &matrix_rows(sweep))?;
        }
        let c = median_curve(&sweeps, |r| r.log10_norm_c());
        let gx = median_curve(&sweeps, |r| r.log10_norm_g_x());
        let gb = median_curve(&sweeps, |r| r.log10_norm_g_xbar());
        let ratio = median_curve(&sweeps, |r| r.log10_norm_c() - r.log10_norm_g_x());
        let rows: Vec<(usize, f64, f64, f64, f64)> =
            (0..c.len()).map(|k| (k + 1, c[k], gx[k], gb[k], ratio[k])).collect();
        ctx.csv(
            &format!("matrices_{act}_median.csv"),
            &["L", "log10_norm_C", "log10_norm_G_x", "log10_norm_G_xbar", "log10_ratio_C_G_x"],
            &rows,
        )?;
        let last = rows.last().expect("max_depth >= 1");
        println!(
            "{act}: L={} median log10 |C|={:.3} |G_x|={:.3} |G_xbar|={:.3} log10(|C|/|G_x|)={:.3}",
            last.0, last.1, last.2, last.3, last.4
        );
        summary.push(json!({"activation": act.name(), "scheme": scheme.name(), "bias_sigma": bias,
            "final_median_log10_ratio_C_G_x": last.4}));
        if ctx.svg {
            let series = |name: &str, ys: &[f64]| svg::Series {
                name: name.to_string(),
                points: ys.iter().enumerate().map(|(k, &y)| ((k + 1) as f64, y)).collect(),
            };
            let chart = svg::line_chart(
                &format!("median norms, {act}, d={}", a.width),
                "depth L",
                "log10 spectral norm",
                &[series("C", &c), series("G(x)", &gx), series("G(xbar)", &gb)],
            );
            ctx.svg(&format!("matrices_{act}.svg"), &chart)?;
        }
        by_act.push((act, sweeps));
    }
    let mut results = json!({"activations": summary});
    if by_act.len() > 1 {
        let (base_act, base) = &by_act[0];
        let mut rows: Vec<(usize, String, String, f64)> = Vec::new();
        let mut finals = Vec::new();
        for (act, sweeps) in &by_act[1..] {
            let depth = base[0].len();
            for k in 0..depth {
                let r: Vec<f64> = sweeps
                    .iter()
                    .zip(base)
                    .map(|(s, b)| s[k].log10_norm_c() - b[k].log10_norm_c())
                    .collect();
                rows.push((k + 1, act.name().into(), base_act.name().into(), median(&r)));
            }
            let last = rows.last().expect("non-empty").3;
            println!("median log10(|C_{act}| / |C_{base_act}|) at L={depth}: {last:.3}");
            finals.push(json!({"activation": act.name(), "baseline": base_act.name(), "final_median_log10_ratio": last}));
        }
        ctx.csv("matrices_ratio.csv", &["L", "activation", "baseline", "median_log10_ratio_C"], &rows)?;
        results["ratios"] = json!(finals);
    }
    let params = json!({
        "width": a.width, "max_depth": a.max_depth, "seeds": a.seeds,
        "activations": a.activations.iter().map(|x| x.name()).collect::<Vec<_>>(),
        "init": format!("{:?}", a.init), "bias_sigma": a.bias_sigma,
    });
    Ok(("matrices", params, results, true))
}

fn probcheck(a: &ProbArgs, seed: u64, ctx: &mut Ctx) -> Outcome {
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if a.p.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(usage("--p values must lie in (0, 1)"));
    }
    if a.d.is_empty() || a.p.is_empty() || a.d.contains(&0) {
        return Err(usage("--p and --d need at least one value; dimensions must be positive"));
    }
    let acts = [Activation::Relu, Activation::Abs];
    let rows = drivers::probcheck(&a.p, &a.d, &acts, a.trials, seed)?;
    let table: Vec<(f64, usize, &str, f64, f64, f64, f64, &str)> = rows
        .iter()
        .map(|r| {
            let status = if r.pass() { "PASS" } else { "FAIL" };
            (r.p, r.d, r.activation.name(), r.closed, r.mc, r.abs_err, r.four_sigma, status)
        })
        .collect();
    ctx.csv(
        "probcheck.csv",
        &["p", "d", "activation", "closed", "mc", "abs_err", "four_sigma", "status"],
        &table,
    )?;
    println!("{:>6} {:>3} {:>5} {:>10} {:>10} {:>10} {:>10}  status", "p", "d", "act", "closed", "mc", "abs_err", "4sigma");
    for t in &table {
        println!("{:>6} {:>3} {:>5} {:>10.6} {:>10.6} {:>10.2e} {:>10.2e}  {}", t.0, t.1, t.2, t.3, t.4, t.5, t.6, t.7);
    }
    let failed = rows.iter().filter(|r| !r.pass()).count();
    let params = json!({"p": a.p, "d": a.d, "trials": a.trials});
    Ok(("probcheck", params, json!({"rows": rows.len(), "failed": failed}), failed == 0))
}

const SWEEP_HEADER: [&str; 11] = [
    "L",
    "d",
    "actual_params",
    "seed",
    "lr",
    "best_train_loss",
    "best_train_acc",
    "test_loss",
    "test_acc",
    "best_iter",
    "diverged",
];

type SweepRow = (usize, usize, usize, u64, f64, f64, f64, f64, f64, usize, bool);

fn sweep_row(r: &TrainResult) -> SweepRow {
    (
        r.depth,
        r.width,
        r.actual_params,
        r.seed,
        r.lr_used,
        r.best_train_loss,
        r.best_train_acc,
        r.test_loss_at_best,
        r.test_acc_at_best,
        r.best_iteration,
        r.diverged,
    )
}

fn protocol_json(cfg: &TrainConfig, p: &Protocol) -> serde_json::Value {
    json!({
        "budget": cfg.budget, "iterations": cfg.iterations, "lr_grid": cfg.lr_grid,
        "decay_factor": cfg.decay_factor, "decay_at": cfg.decay_at, "seeds": cfg.seeds,
        "activation": cfg.activation.name(), "scheme": cfg.init.scheme.name(), "bias_sigma": cfg.init.bias_sigma,
        "step_scale": format!("{:?}", cfg.step_scale), "flip_parity": p.flip_parity, "reduced": p.reduced,
    })
}

fn check_protocol(cfg: &TrainConfig) -> Result<(), Failure> {
    cfg.validate().map(|_| ()).map_err(|e| usage(e.to_string()))
}

fn train(a: &TrainArgs, seed: u64, ctx: &mut Ctx) -> Outcome {
    let mut cfg = a.protocol.config(a.params, a.depth);
    cfg.history_every = a.history_every;
    check_protocol(&cfg)?;
    let plan = cfg.validate()?;
    let ds = CheckerboardDataset::generate_with_parity(a.protocol.flip_parity);
    let seeds: Vec<u64> = (0..cfg.seeds).map(|k| run_seed(seed, k)).collect();
    let data = seeds
        .iter()
        .map(|&s| Ok(TrainData::new(&ds, &split_for_seed(&ds, s)?)?))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, f64)> = (0..seeds.len())
        .flat_map(|k| cfg.lr_grid.iter().map(move |&lr| (k, lr)))
        .collect();
    use rayon::prelude::*;
    let runs = cells
        .par_iter()
        .map(|&(k, lr)| {
            let start = initial_params(&cfg, &plan, seeds[k])?;
            train_cell_with_params(&cfg, &data[k], start, seeds[k], lr)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n_lr = cfg.lr_grid.len();
    let mut per_seed = Vec::new();
    let mut curve: Vec<(u64, f64, usize, f64)> = Vec::new();
    let mut rows: Vec<SweepRow> = Vec::new();
    for chunk in runs.chunks(n_lr) {
        let results: Vec<TrainResult> = chunk.iter().map(|(r, _)| r.clone()).collect();
        let best = reduce_over_lr(&results).expect("non-empty lr grid");
        let pos = results.iter().position(|r| r == &best).expect("best is one of the runs");
        for r in &results {
            rows.push(sweep_row(r));
            curve.extend(r.history.iter().map(|&(it, loss)| (r.seed, r.lr_used, it, loss)));
        }
        ctx.json(&format!("params_seed{}.json", best.seed), &ParamsJson::from(&chunk[pos].1))?;
        println!(
            "seed {}: lr={} best_train_loss={:.4} train_acc={:.4} test_acc={:.4} iter={}{}",
            best.seed,
            best.lr_used,
            best.best_train_loss,
            best.best_train_acc,
            best.test_acc_at_best,
            best.best_iteration,
            if best.diverged { " (all rates diverged)" } else { "" }
        );
        per_seed.push(best);
    }
    ctx.csv("train_runs.csv", &SWEEP_HEADER, &rows)?;
    ctx.csv("loss_curve.csv", &["seed", "lr", "iteration", "loss"], &curve)?;
    let result_json: Vec<serde_json::Value> = per_seed
        .iter()
        .map(|r| {
            json!({
                "seed": r.seed, "depth": r.depth, "width": r.width, "actual_params": r.actual_params,
                "lr_used": r.lr_used, "best_train_loss": r.best_train_loss, "best_train_acc": r.best_train_acc,
                "test_loss_at_best": r.test_loss_at_best, "test_acc_at_best": r.test_acc_at_best,
                "best_iteration": r.best_iteration, "diverged": r.diverged,
            })
        })
        .collect();
    ctx.json("train_result.json", &result_json)?;
    let best_acc = per_seed
        .iter()
        .filter(|r| !r.diverged)
        .map(|r| r.best_train_acc)
        .fold(f64::NAN, f64::max);
    let mut params = protocol_json(&cfg, &a.protocol);
    params["depth"] = json!(a.depth);
    params["width"] = json!(plan.width);
    params["history_every"] = json!(a.history_every);
    Ok(("train", params, json!({"best_train_acc": best_acc}), true))
}

fn trainsweep(a: &TrainsweepArgs, seed: u64, ctx: &mut Ctx) -> Outcome {
    let depths = a.depths.clone().map_or_else(default_sweep_depths, |d| d.0);
    let cfg = a.protocol.config(a.params, depths[0]);
    for &l in &depths {
        check_protocol(&cfg.clone().with_depth(l))?;
    }
    let ds = CheckerboardDataset::generate_with_parity(a.protocol.flip_parity);
    let sweep = drivers::train_sweep(&cfg, &depths, &ds, seed)?;
    let rows: Vec<SweepRow> = sweep.cells.iter().map(sweep_row).collect();
    ctx.csv("sweep.csv", &SWEEP_HEADER, &rows)?;
    type SummaryRow = (usize, usize, usize, f64, f64, f64, f64, f64, f64, f64, f64, f64, usize);
    let summary: Vec<SummaryRow> = sweep
        .summaries
        .iter()
        .map(|s| {
            (
                s.depth,
                s.width,
                s.actual_params,
                s.train_loss.mean,
                s.train_loss.variance,
                s.train_acc.mean,
                s.train_acc.variance,
                s.test_loss.mean,
                s.test_loss.variance,
                s.test_acc.mean,
                s.test_acc.variance,
                s.median_train_acc(),
                s.diverged_seeds,
            )
        })
        .collect();
    ctx.csv(
        "sweep_summary.csv",
        &[
            "L",
            "d",
            "actual_params",
            "train_loss_mean",
            "train_loss_var",
            "train_acc_mean",
            "train_acc_var",
            "test_loss_mean",
            "test_loss_var",
            "test_acc_mean",
            "test_acc_var",
            "median_train_acc",
            "diverged_seeds",
        ],
        &summary,
    )?;
    println!("L,d,train_acc_mean,test_acc_mean,median_train_acc");
    for r in &summary {
        println!("{},{},{:.4},{:.4},{:.4}", r.0, r.1, r.5, r.9, r.11);
    }
    if ctx.svg {
        let series = |name: &str, f: &dyn Fn(&SummaryRow) -> f64| svg::Series {
            name: name.to_string(),
            points: summary.iter().map(|r| (r.0 as f64, f(r))).collect(),
        };
        let losses = svg::line_chart(
            &format!("loss, N_w={}", a.params),
            "depth L",
            "mean loss",
            &[series("train", &|r| r.3), series("test", &|r| r.7)],
        );
        let accs = svg::line_chart(
            &format!("accuracy, N_w={}", a.params),
            "depth L",
            "mean accuracy",
            &[series("train", &|r| r.5), series("test", &|r| r.9)],
        );
        ctx.svg("sweep.svg", &svg::grid(&[losses, accs], 1))?;
    }
    let best = sweep
        .summaries
        .iter()
        .max_by(|x, y| x.median_train_acc().total_cmp(&y.median_train_acc()))
        .map(|s| s.depth);
    let mut params = protocol_json(&cfg, &a.protocol);
    params["depths"] = json!(depths);
    Ok(("trainsweep", params, json!({"best_median_train_acc_depth": best}), true))
}

fn checkerboard(a: &CheckerboardArgs, seed: u64, ctx: &mut Ctx) -> Outcome {
    let ds = CheckerboardDataset::generate_with_parity(a.flip_parity);
    let split = split_for_seed(&ds, seed)?;
    let mask = split.is_train_mask(ds.len());
    let rows: Vec<(f64, f64, u8, bool)> = (0..ds.len())
        .map(|k| (ds.points[k][0], ds.points[k][1], ds.labels[k], mask[k]))
        .collect();
    ctx.csv("checkerboard.csv", &["x", "y", "label", "is_train"], &rows)?;
    println!(
        "points={} interior={} boundary={} train={} test={}",
        ds.len(),
        ds.interior_count(),
        ds.boundary_count(),
        split.train.len(),
        split.test.len()
    );
    let params = json!({"flip_parity": a.flip_parity});
    Ok(("checkerboard", params, json!({"train": split.train.len(), "test": split.test.len()}), true))
}

/// Directory helper for callers that want the manifest path.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.join(crate::manifest::MANIFEST_FILE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_lists() {
        assert_eq!("3:45:3".parse::<DepthList>().unwrap().0.len(), 15);
        assert_eq!("2,12,28".parse::<DepthList>().unwrap().0, vec![2, 12, 28]);
        assert_eq!("4".parse::<DepthList>().unwrap().0, vec![4]);
        assert_eq!("1:3".parse::<DepthList>().unwrap().0, vec![1, 2, 3]);
        for bad in ["", "3:1", "1:5:0", "0,2", "a"] {
            assert!(bad.parse::<DepthList>().is_err(), "{bad}");
        }
        let depths = default_sweep_depths();
        assert_eq!(depths.first(), Some(&2));
        assert_eq!(depths.last(), Some(&30));
        assert_eq!(depths.len(), 24);
    }

    #[test]
    fn init_defaults_follow_activation() {
        let g: InitArg = "gaussian".parse().unwrap();
        assert_eq!(g.scheme(Activation::Relu), InitScheme::Kaiming);
        assert_eq!(g.scheme(Activation::Abs), InitScheme::Xavier);
        assert_eq!(g.scheme(Activation::Sigmoid), InitScheme::Normal { sigma: 1.0 });
        let o: InitArg = "orthogonal".parse().unwrap();
        assert_eq!(o.scheme(Activation::Relu), InitScheme::Orthogonal);
        assert!("bogus".parse::<InitArg>().is_err());
    }
}
