use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairlaunch_core::behavior::Preset;
use fairlaunch_core::calibration::{
    grid_search, CalibrationError, GridSpec, Objective, TargetMetric,
};
use fairlaunch_core::data_ingest::{
    load_reference_series, save_market_series, save_reference_series, synthetic_market_series,
    FgiModel, IngestError, MarketDay, ReferencePoint, ReferenceSeries, SyntheticMarket,
};
use fairlaunch_core::engine::{
    run_ensemble_with_market, run_replicate, validation_event, validation_sensitivity, EngineError,
    EnsembleResult, MarketSource, RunConfig,
};
use fairlaunch_core::report::{self, FigureMetric, ReportError};
use fairlaunch_core::scenario::ScenarioKind;

const RESULTS_ENV: &str = "FAIRLAUNCH_RESULTS_DIR";

#[derive(Debug)]
enum AppError {
    Usage(String),
    Data(String),
    Invariant(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
            AppError::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Usage(m) | AppError::Data(m) | AppError::Invariant(m) => m,
        }
    }
}

impl From<EngineError> for AppError {
    fn from(e: EngineError) -> Self {
        if e.is_invariant_violation() {
            AppError::Invariant(e.to_string())
        } else {
            AppError::Data(e.to_string())
        }
    }
}

impl From<CalibrationError> for AppError {
    fn from(e: CalibrationError) -> Self {
        match e {
            CalibrationError::Engine(e) => e.into(),
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<IngestError> for AppError {
    fn from(e: IngestError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<ReportError> for AppError {
    fn from(e: ReportError) -> Self {
        AppError::Data(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fairlaunch",
    version,
    about = "Governance-token concentration simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo ensemble and write its series.
    Simulate(SimulateArgs),
    /// Grid-search behavioural parameters against an observed series.
    Calibrate(CalibrateArgs),
    /// Compare simulated and observed whale share over time.
    ValidateEvent(ValidateEventArgs),
    /// Final-day Gini / NSE gaps for several diamond-hand shares.
    ValidateSensitivity(ValidateSensitivityArgs),
    /// Final whale shares for every scenario and trading preset.
    TableWhales(TableWhalesArgs),
    /// Per-scenario Gini and NSE series for plotting.
    PlotData(PlotDataArgs),
    /// Write a synthetic market series, and optionally a simulated reference.
    SynthData(SynthDataArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioArg {
    #[value(alias = "s0")]
    Cronje,
    #[value(alias = "s1")]
    Bentham,
    #[value(alias = "s2")]
    Rawls,
}

impl From<ScenarioArg> for ScenarioKind {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Cronje => ScenarioKind::Cronje,
            ScenarioArg::Bentham => ScenarioKind::Bentham,
            ScenarioArg::Rawls => ScenarioKind::Rawls,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    High,
    Medium,
    Low,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::High => Preset::High,
            PresetArg::Medium => Preset::Medium,
            PresetArg::Low => Preset::Low,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FgiArg {
    Ar1,
    Uniform,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Diamond-hand trading probability set.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long)]
    t_start: Option<u32>,
    #[arg(long)]
    t_end: Option<u32>,
    /// Initial population size.
    #[arg(long)]
    n_initial: Option<usize>,
    #[arg(long)]
    dh_share: Option<f64>,
    /// Divide the daily entrant draw by this factor.
    #[arg(long)]
    entrant_scale: Option<f64>,
    /// Market CSV with columns date,price_usd,fgi.
    #[arg(long, conflicts_with = "synthetic")]
    market_data: Option<PathBuf>,
    /// Use a generated market series instead of a CSV.
    #[arg(long)]
    synthetic: bool,
    /// Seed of the generated market series.
    #[arg(long, default_value_t = 0)]
    market_seed: u64,
    /// Count zero-balance agents in the metrics.
    #[arg(long)]
    include_zero_holders: bool,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }

    fn config(&self) -> Result<RunConfig, AppError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?
            }
            None => {
                if self.market_data.is_none() && !self.synthetic {
                    return Err(AppError::Usage(
                        "one of --market-data <CSV> or --synthetic is required".into(),
                    ));
                }
                RunConfig::default()
            }
        };
        if let Some(path) = &self.market_data {
            cfg.market = MarketSource::Csv {
                path: path.clone(),
                anchor: Default::default(),
            };
        } else if self.synthetic {
            cfg.market = MarketSource::Synthetic(SyntheticMarket {
                seed: self.market_seed,
                ..SyntheticMarket::default()
            });
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.scenario {
            cfg.scenario.kind = v.into();
        }
        if let Some(v) = self.preset {
            cfg.behavior = cfg.behavior.with_preset(v.into());
        }
        if let Some(v) = self.t_start {
            cfg.t_start = v;
        }
        if let Some(v) = self.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = self.n_initial {
            cfg.population.n_initial = v;
        }
        if let Some(v) = self.dh_share {
            cfg.population.dh_share = v;
        }
        if let Some(v) = self.entrant_scale {
            cfg.entrants.scale_divisor = v;
        }
        if self.include_zero_holders {
            cfg.include_zero_holders = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Also write every fill of replicate 0 as fills_<t>.csv.
    #[arg(long)]
    fills: bool,
    /// Output directory; defaults to <results>/<scenario>_<preset>.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Observed series: t,gini[,one_minus_nse,whale_share,n_holders].
    #[arg(long)]
    reference: PathBuf,
    /// JSON grid specification; defaults to a small grid around the
    /// configured parameters.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Rmse)]
    objective: ObjectiveArg,
    #[arg(long, value_enum, default_value_t = MetricArg::Gini)]
    metric: MetricArg,
    #[arg(long)]
    replicates_per_cell: Option<usize>,
    /// Replicates for re-scoring the best cell (0 to skip).
    #[arg(long)]
    final_replicates: Option<usize>,
    /// Run one refinement pass around the best cell.
    #[arg(long)]
    refine: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    Rmse,
    Mape,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MetricArg {
    Gini,
    Nse,
}

#[derive(Args, Debug)]
struct ValidateEventArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateSensitivityArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5])]
    dh_shares: Vec<f64>,
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TableWhalesArgs {
    /// Run all scenario/preset ensembles first, using the run flags.
    #[arg(long)]
    run: bool,
    #[command(flatten)]
    run_args: RunArgs,
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    /// Directory holding <scenario>_<preset>/whales.csv.
    #[arg(long)]
    root: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotDataArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    /// Observed series to add as a `reference` column.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthDataArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 501)]
    days: u32,
    #[arg(long, value_enum, default_value_t = FgiArg::Ar1)]
    fgi: FgiArg,
    #[arg(long, default_value_t = 0.05)]
    vol: f64,
    /// Also write reference.csv from a simulated opportunity-based ensemble
    /// on the generated market.
    #[arg(long)]
    reference: bool,
    /// Run configuration for the simulated reference.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    replicates: usize,
    #[arg(long)]
    workers: Option<usize>,
}

fn results_root() -> PathBuf {
    std::env::var_os(RESULTS_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn ensure_dir(path: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

fn preset_of(cfg: &RunConfig) -> Option<Preset> {
    let b = &cfg.behavior;
    let p = [b.p_t_fgi_e, b.p_t_w_h, b.p_t_fgi_n, b.p_t_w_l];
    Preset::ALL.into_iter().find(|s| s.probabilities() == p)
}

fn run_dir_name(cfg: &RunConfig) -> String {
    let preset = preset_of(cfg).map(Preset::name).unwrap_or("custom");
    format!("{}_{}", cfg.scenario.kind.name(), preset)
}

fn load_market(cfg: &RunConfig) -> Result<Vec<MarketDay>, AppError> {
    Ok(cfg.market.load()?)
}

fn simulate_into(
    cfg: &RunConfig,
    market: &[MarketDay],
    replicates: usize,
    workers: usize,
    out: &Path,
    fills: bool,
) -> Result<EnsembleResult, AppError> {
    ensure_dir(out)?;
    let ens = run_ensemble_with_market(cfg, market, replicates, workers)?;
    report::write_json(&out.join("config.json"), cfg)?;
    let first = &ens.replicates[0];
    report::write_metrics_csv(&out.join("metrics.csv"), &first.pre_trade, &first.series)?;
    report::write_ensemble_csv(&out.join("ensemble.csv"), &ens)?;
    report::write_whales_csv(&out.join("whales.csv"), &ens)?;
    if fills {
        let mut c = cfg.clone();
        c.record_fills = true;
        let run = run_replicate(&c, market, 0)?;
        for (t, day_fills) in &run.fills {
            report::write_fills_csv(&out.join(format!("fills_{t}.csv")), *t, day_fills)?;
        }
    }
    Ok(ens)
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), AppError> {
    let cfg = a.run.config()?;
    let market = load_market(&cfg)?;
    let out = a
        .out
        .unwrap_or_else(|| results_root().join(run_dir_name(&cfg)));
    let started = Instant::now();
    let ens = simulate_into(&cfg, &market, a.replicates, a.run.workers(), &out, a.fills)?;
    let last = ens.final_day();
    println!(
        "{} replicate(s), t={}..{}: gini {:.4} (sd {:.4}), 1-nse {:.4}, whale share {:.4}, agents {:.0}",
        ens.n_replicates,
        cfg.t_start,
        cfg.t_end,
        last.gini_mean,
        last.gini_std,
        last.nse_mean,
        last.whale_mean,
        last.n_agents_mean
    );
    println!("wrote {} in {:.2?}", out.display(), started.elapsed());
    Ok(())
}

fn default_grid(cfg: &RunConfig) -> GridSpec {
    let b = &cfg.behavior;
    let pm = |v: f64| {
        let mut out: Vec<f64> = [v - 0.2, v, v + 0.2]
            .into_iter()
            .map(|x| (x * 10.0).round() / 10.0)
            .filter(|x| (0.0..=1.0).contains(x))
            .collect();
        out.dedup();
        out
    };
    GridSpec {
        p_t_fgi_e: pm(b.p_t_fgi_e),
        p_t_w_h: pm(b.p_t_w_h),
        ..GridSpec::around(cfg)
    }
}

fn cmd_calibrate(a: CalibrateArgs) -> Result<(), AppError> {
    let cfg = a.run.config()?;
    let market = load_market(&cfg)?;
    let reference = load_reference_series(&a.reference)?;
    let mut grid = match &a.grid {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<GridSpec>(&text)
                .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?
        }
        None => default_grid(&cfg),
    };
    if let Some(v) = a.replicates_per_cell {
        grid.replicates_per_cell = v;
    }
    if let Some(v) = a.final_replicates {
        grid.final_replicates = v;
    }
    let objective = match a.objective {
        ObjectiveArg::Rmse => Objective::Rmse,
        ObjectiveArg::Mape => Objective::Mape,
    };
    let metric = match a.metric {
        MetricArg::Gini => TargetMetric::Gini,
        MetricArg::Nse => TargetMetric::Nse,
    };
    let workers = a.run.workers();
    let mut result = grid_search(&grid, &cfg, &market, &reference, objective, metric, workers)?;
    if a.refine {
        let fine = grid.refined(&result.best.cell);
        let second = grid_search(&fine, &cfg, &market, &reference, objective, metric, workers)?;
        if second.best.objective(objective) < result.best.objective(objective) {
            result.best = second.best;
            result.rescored = second.rescored;
        }
        result.table.extend(second.table);
    }

    let out = a.out.unwrap_or_else(|| results_root().join("calibration"));
    ensure_dir(&out)?;
    report::write_calibration_table(&out.join("calibration_table.csv"), &result)?;
    let best = serde_json::json!({
        "objective": result.objective,
        "metric": result.metric,
        "cells_evaluated": result.table.len(),
        "best": result.best,
        "rescored": result.rescored,
        "config": result.best.cell.apply(&cfg),
    });
    report::write_json(&out.join("best.json"), &best)?;
    let b = result.rescored.unwrap_or(result.best);
    println!(
        "best of {} cells: rmse {:.5}, mape {:.3}% ({} zero points skipped), {:?}",
        result.table.len(),
        b.rmse,
        b.mape,
        b.mape_skipped,
        b.cell
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_validate_event(a: ValidateEventArgs) -> Result<(), AppError> {
    let cfg = a.run.config()?;
    let market = load_market(&cfg)?;
    let reference = load_reference_series(&a.reference)?;
    let report = validation_event(&cfg, &market, &reference, a.replicates, a.run.workers())?;
    let out = a
        .out
        .unwrap_or_else(|| results_root().join("validate_event"));
    ensure_dir(&out)?;
    report::write_event_csv(&out.join("event.csv"), &report)?;
    report::write_json(&out.join("event.json"), &report)?;
    let last = report.rows.last().expect("report has rows");
    println!(
        "t={}: simulated whale share {:.4}, observed {:.4}, gap {:.3} pp",
        last.t, last.simulated, last.reference, report.final_gap_pp
    );
    Ok(())
}

fn cmd_validate_sensitivity(a: ValidateSensitivityArgs) -> Result<(), AppError> {
    let cfg = a.run.config()?;
    let market = load_market(&cfg)?;
    let reference = load_reference_series(&a.reference)?;
    let rows = validation_sensitivity(
        &cfg,
        &market,
        &reference,
        &a.dh_shares,
        a.replicates,
        a.run.workers(),
    )?;
    let out = a
        .out
        .unwrap_or_else(|| results_root().join("validate_sensitivity"));
    ensure_dir(&out)?;
    report::write_sensitivity_csv(&out.join("sensitivity.csv"), &rows)?;
    println!("dh_share  t    dGini     dGini%   d(1-NSE)  d(1-NSE)%");
    for r in &rows {
        let fmt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |x| format!("{x:.p$}"));
        println!(
            "{:<8}  {:<4} {:<9.5} {:<7.2}  {:<9} {}",
            r.dh_share,
            r.t,
            r.delta_gini,
            r.delta_gini_pct,
            fmt(r.delta_nse, 5),
            fmt(r.delta_nse_pct, 2)
        );
    }
    Ok(())
}

struct WhaleRow {
    first_pct: f64,
    mean_pct: f64,
    k: usize,
    n: usize,
}

fn read_whales(path: &Path) -> Result<WhaleRow, AppError> {
    let data_err = |m: String| AppError::Data(format!("{}: {m}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| data_err(e.to_string()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| data_err(format!("missing column `{name}`")))
    };
    let (ki, ni) = (col("whales")?, col("holders")?);
    let mut first = None;
    let mut shares = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> Result<usize, AppError> {
            f.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| data_err(format!("bad row `{line}`")))
        };
        let (k, n) = (parse(ki)?, parse(ni)?);
        first.get_or_insert((k, n));
        shares.push(k as f64 / n as f64);
    }
    let (k, n) = first.ok_or_else(|| data_err("no rows".into()))?;
    Ok(WhaleRow {
        first_pct: 100.0 * k as f64 / n as f64,
        mean_pct: 100.0 * shares.iter().sum::<f64>() / shares.len() as f64,
        k,
        n,
    })
}

fn cmd_table_whales(a: TableWhalesArgs) -> Result<(), AppError> {
    let root = a.root.clone().unwrap_or_else(results_root);
    if a.run {
        let base = a.run_args.config()?;
        let market = load_market(&base)?;
        let workers = a.run_args.workers();
        for kind in ScenarioKind::ALL {
            for preset in Preset::ALL {
                let mut cfg = base.clone();
                cfg.scenario.kind = kind;
                cfg.behavior = cfg.behavior.with_preset(preset);
                let out = root.join(run_dir_name(&cfg));
                simulate_into(&cfg, &market, a.replicates, workers, &out, false)?;
            }
        }
    }
    let mut csv = String::from("scenario,preset,whales,holders,whale_pct,whale_pct_mean\n");
    println!(
        "{:<10} {:>10} {:>10} {:>10}",
        "scenario", "high", "medium", "low"
    );
    for kind in ScenarioKind::ALL {
        let mut cells = Vec::new();
        for preset in Preset::ALL {
            let path = root
                .join(format!("{}_{}", kind.name(), preset.name()))
                .join("whales.csv");
            let row = read_whales(&path)?;
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                kind.name(),
                preset.name(),
                row.k,
                row.n,
                row.first_pct,
                row.mean_pct
            ));
            cells.push(format!("{:.2}%", row.first_pct));
        }
        println!(
            "{:<10} {:>10} {:>10} {:>10}",
            format!("{} ({})", kind.label(), kind.name()),
            cells[0],
            cells[1],
            cells[2]
        );
    }
    let path = root.join("whales_table.csv");
    std::fs::write(&path, csv).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn cmd_plot_data(a: PlotDataArgs) -> Result<(), AppError> {
    let base = a.run.config()?;
    let market = load_market(&base)?;
    let reference = a
        .reference
        .as_ref()
        .map(load_reference_series)
        .transpose()?;
    let workers = a.run.workers();
    let mut ensembles = Vec::new();
    for kind in ScenarioKind::ALL {
        let mut cfg = base.clone();
        cfg.scenario.kind = kind;
        let ens = run_ensemble_with_market(&cfg, &market, a.replicates, workers)?;
        ensembles.push((kind.label().to_string(), ens));
    }
    let series: Vec<(String, &EnsembleResult)> =
        ensembles.iter().map(|(l, e)| (l.clone(), e)).collect();
    let out = a.out.unwrap_or_else(|| results_root().join("plots"));
    ensure_dir(&out)?;
    report::write_figure_csv(
        &out.join("fig_gini.csv"),
        FigureMetric::Gini,
        &series,
        reference.as_ref(),
    )?;
    report::write_figure_csv(
        &out.join("fig_nse.csv"),
        FigureMetric::Nse,
        &series,
        reference.as_ref(),
    )?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_synth_data(a: SynthDataArgs) -> Result<(), AppError> {
    let spec = SyntheticMarket {
        seed: a.seed,
        days: a.days,
        vol: a.vol,
        fgi: match a.fgi {
            FgiArg::Ar1 => FgiModel::default(),
            FgiArg::Uniform => FgiModel::Uniform,
        },
        ..SyntheticMarket::default()
    };
    let market = synthetic_market_series(&spec)?;
    ensure_dir(&a.out)?;
    let market_path = a.out.join("market.csv");
    save_market_series(&market_path, &market)?;
    println!("wrote {} ({} days)", market_path.display(), market.len());
    if a.reference {
        let mut cfg = match &a.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.scenario.kind = ScenarioKind::Cronje;
        cfg.market = MarketSource::Synthetic(spec);
        let workers = a.workers.unwrap_or(1);
        let ens = run_ensemble_with_market(&cfg, &market, a.replicates, workers)?;
        let reference = ReferenceSeries {
            points: ens
                .days
                .iter()
                .map(|d| ReferencePoint {
                    t: d.t,
                    gini: d.gini_mean,
                    one_minus_nse: Some(d.nse_mean),
                    whale_share: Some(d.whale_mean),
                    n_holders: None,
                })
                .collect(),
        };
        let ref_path = a.out.join("reference.csv");
        save_reference_series(&ref_path, &reference)?;
        report::write_json(&a.out.join("reference_config.json"), &cfg)?;
        println!("wrote {} ({} days)", ref_path.display(), reference.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::ValidateEvent(a) => cmd_validate_event(a),
        Command::ValidateSensitivity(a) => cmd_validate_sensitivity(a),
        Command::TableWhales(a) => cmd_table_whales(a),
        Command::PlotData(a) => cmd_plot_data(a),
        Command::SynthData(a) => cmd_synth_data(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
