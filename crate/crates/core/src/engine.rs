//! Day loop and Monte Carlo runner.
//!
//! Within a day: entrants arrive, the fiat percentile and FGI state are
//! fixed, every agent (ascending id) decides and sizes at most one order,
//! the book clears, and metrics are taken from the settled holdings.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{
    classify_fgi, classify_wealth, decide_action, quantile_in_place, size_buy, size_sell, Action,
    BehaviorParams,
};
use crate::data_ingest::{
    load_market_series, synthetic_market_series, CalendarAnchor, Day, IngestError, MarketDay,
    ReferenceSeries, SyntheticMarket,
};
use crate::distributions::{ParamError, RandomSource};
use crate::market::{match_day, settle, Fill, MarketError, Order, Side};
use crate::metrics::{measure, MetricError, MetricPoint, WhaleCount};
use crate::scenario::{
    initial_population, spawn_entrants, Agent, EntrantProcess, PopulationConfig, ScenarioError,
    ScenarioKind, ScenarioSpec,
};

/// Largest tolerated drift of the circulating supply, in tokens.
pub const SUPPLY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("market invariant violated: {0}")]
    Market(#[from] MarketError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("no market data for day {0}")]
    MissingMarketDay(Day),
    #[error("invalid window: t_start {t_start} > t_end {t_end}")]
    InvalidWindow { t_start: Day, t_end: Day },
    #[error("token supply drifted by {drift} on day {t}")]
    SupplyDrift { t: Day, drift: f64 },
    #[error("reference series lacks column `{0}`")]
    MissingReferenceColumn(&'static str),
    #[error("reference series has no day inside the simulated window")]
    NoOverlap,
    #[error("replicate count must be at least 1")]
    NoReplicates,
    #[error("worker pool: {0}")]
    Pool(String),
}

impl EngineError {
    /// True when the error indicates a broken internal invariant rather than
    /// bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            EngineError::Market(_) | EngineError::SupplyDrift { .. }
        )
    }
}

/// Where the daily price / FGI inputs come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum MarketSource {
    Csv {
        path: PathBuf,
        #[serde(default)]
        anchor: CalendarAnchor,
    },
    Synthetic(SyntheticMarket),
}

impl Default for MarketSource {
    fn default() -> Self {
        MarketSource::Synthetic(SyntheticMarket::default())
    }
}

impl MarketSource {
    pub fn load(&self) -> Result<Vec<MarketDay>, IngestError> {
        match self {
            MarketSource::Csv { path, anchor } => load_market_series(path, *anchor),
            MarketSource::Synthetic(spec) => synthetic_market_series(spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub t_start: Day,
    pub t_end: Day,
    pub scenario: ScenarioSpec,
    pub behavior: BehaviorParams,
    pub population: PopulationConfig,
    pub entrants: EntrantProcess,
    pub market: MarketSource,
    /// Count zero-balance agents in the metric population.
    pub include_zero_holders: bool,
    /// Keep every fill in the run result.
    pub record_fills: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            t_start: 45,
            t_end: 392,
            scenario: ScenarioSpec::default(),
            behavior: BehaviorParams::default(),
            population: PopulationConfig::default(),
            entrants: EntrantProcess::default(),
            market: MarketSource::default(),
            include_zero_holders: false,
            record_fills: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.t_start > self.t_end {
            return Err(EngineError::InvalidWindow {
                t_start: self.t_start,
                t_end: self.t_end,
            });
        }
        self.behavior.validate()?;
        self.population.validate()?;
        self.entrants.validate()?;
        Ok(())
    }

    pub fn n_days(&self) -> usize {
        (self.t_end - self.t_start) as usize + 1
    }

    /// The `[t_start, t_end]` slice of `days`, one entry per day.
    pub fn market_window(&self, days: &[MarketDay]) -> Result<Vec<MarketDay>, EngineError> {
        let mut window = Vec::with_capacity(self.n_days());
        let start = days.partition_point(|d| d.t < self.t_start);
        let mut it = days[start..].iter();
        for t in self.t_start..=self.t_end {
            match it.next() {
                Some(d) if d.t == t => window.push(*d),
                _ => return Err(EngineError::MissingMarketDay(t)),
            }
        }
        Ok(window)
    }
}

/// Per-day exogenous context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayContext {
    pub t: Day,
    pub price: f64,
    pub fgi: u8,
}

impl From<&MarketDay> for DayContext {
    fn from(d: &MarketDay) -> Self {
        Self {
            t: d.t,
            price: d.price,
            fgi: d.fgi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayOutcome {
    pub metrics: MetricPoint,
    pub entrants: usize,
    pub orders: usize,
    pub fills: Vec<Fill>,
}

/// One replicate's mutable state.
pub struct Simulation {
    config: RunConfig,
    agents: Vec<Agent>,
    rng: RandomSource,
    fiat_scratch: Vec<f64>,
    metric_scratch: Vec<f64>,
    orders: Vec<Order>,
}

impl Simulation {
    pub fn new(config: &RunConfig, mut rng: RandomSource) -> Result<Self, EngineError> {
        config.validate()?;
        let agents = initial_population(
            &mut rng,
            &config.population,
            &config.scenario,
            config.t_start,
        )?;
        Ok(Self {
            config: config.clone(),
            agents,
            rng,
            fiat_scratch: Vec::new(),
            metric_scratch: Vec::new(),
            orders: Vec::new(),
        })
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn into_agents(self) -> Vec<Agent> {
        self.agents
    }

    pub fn measure(&mut self, t: Day) -> Result<MetricPoint, EngineError> {
        Ok(measure(
            t,
            &self.agents,
            self.config.include_zero_holders,
            &mut self.metric_scratch,
        )?)
    }

    /// Advances one trading round.
    pub fn step_day(&mut self, ctx: DayContext) -> Result<DayOutcome, EngineError> {
        let cfg = &self.config;
        let rng = &mut self.rng;

        let entrants = if ctx.t > cfg.t_start {
            let count = cfg.entrants.draw(rng);
            let arrivals = spawn_entrants(rng, &cfg.population, ctx.t, count, self.agents.len())?;
            self.agents.extend(arrivals);
            count
        } else {
            0
        };

        self.fiat_scratch.clear();
        self.fiat_scratch.extend(self.agents.iter().map(|a| a.fiat));
        let fiat_cut = quantile_in_place(&mut self.fiat_scratch, cfg.behavior.wealth_percentile);
        let fgi_state = classify_fgi(ctx.fgi, &cfg.behavior);

        self.orders.clear();
        for agent in &self.agents {
            let wealth = classify_wealth(agent.fiat, fiat_cut);
            let order = match decide_action(rng, agent, fgi_state, wealth, &cfg.behavior) {
                Action::NoTrade => None,
                Action::Buy => size_buy(rng, agent).map(|amount| (Side::Buy, amount)),
                Action::Sell => size_sell(rng, agent).map(|amount| (Side::Sell, amount)),
            };
            if let Some((side, amount)) = order {
                let arrival_seq = self.orders.len() as u64;
                self.orders.push(Order {
                    agent_id: agent.id,
                    side,
                    amount,
                    arrival_seq,
                });
            }
        }

        let outcome = match_day(&self.orders, ctx.price)?;
        settle(&mut self.agents, &outcome.fills)?;

        let supply: f64 = self.agents.iter().map(|a| a.tokens).sum();
        let drift = supply - cfg.scenario.total_supply;
        if drift.abs() > SUPPLY_TOLERANCE {
            return Err(EngineError::SupplyDrift { t: ctx.t, drift });
        }

        let metrics = self.measure(ctx.t)?;
        Ok(DayOutcome {
            metrics,
            entrants,
            orders: self.orders.len(),
            fills: outcome.fills,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub replicate: u64,
    /// Snapshot at `t_start` before the first trading round.
    pub pre_trade: MetricPoint,
    /// One point per simulated day, `t_start..=t_end`.
    pub series: Vec<MetricPoint>,
    pub final_agents: Vec<Agent>,
    /// `(t, fills)` per day, populated only with `record_fills`.
    pub fills: Vec<(Day, Vec<Fill>)>,
    pub config: RunConfig,
    pub wall_time: Duration,
}

/// Random stream for replicate `k` of a run seeded with `seed`.
pub fn replicate_stream(seed: u64, k: u64) -> RandomSource {
    RandomSource::new(seed).child(k)
}

/// Runs replicate `replicate` over an already loaded market series.
pub fn run_replicate(
    config: &RunConfig,
    market: &[MarketDay],
    replicate: u64,
) -> Result<RunResult, EngineError> {
    let started = Instant::now();
    config.validate()?;
    let window = config.market_window(market)?;
    let mut sim = Simulation::new(config, replicate_stream(config.seed, replicate))?;
    let pre_trade = sim.measure(config.t_start)?;
    let mut series = Vec::with_capacity(window.len());
    let mut fills = Vec::new();
    for day in &window {
        let out = sim.step_day(day.into())?;
        series.push(out.metrics);
        if config.record_fills {
            fills.push((day.t, out.fills));
        }
    }
    Ok(RunResult {
        seed: config.seed,
        replicate,
        pre_trade,
        series,
        final_agents: sim.into_agents(),
        fills,
        config: config.clone(),
        wall_time: started.elapsed(),
    })
}

/// Loads the configured market data and runs replicate 0.
pub fn run(config: &RunConfig) -> Result<RunResult, EngineError> {
    let market = config.market.load()?;
    run_replicate(config, &market, 0)
}

/// Per-day cross-replicate statistics (sample standard deviation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDay {
    pub t: Day,
    pub gini_mean: f64,
    pub gini_std: f64,
    pub nse_mean: f64,
    pub nse_std: f64,
    pub whale_mean: f64,
    pub whale_std: f64,
    pub n_agents_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub replicate: u64,
    pub pre_trade: MetricPoint,
    pub series: Vec<MetricPoint>,
}

impl ReplicateSummary {
    pub fn final_point(&self) -> &MetricPoint {
        self.series.last().expect("series is never empty")
    }

    pub fn final_whales(&self) -> WhaleCount {
        self.final_point().whales
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub n_replicates: usize,
    pub pre_trade: EnsembleDay,
    pub days: Vec<EnsembleDay>,
    pub replicates: Vec<ReplicateSummary>,
}

impl EnsembleResult {
    pub fn final_day(&self) -> &EnsembleDay {
        self.days.last().expect("ensemble has at least one day")
    }

    pub fn day(&self, t: Day) -> Option<&EnsembleDay> {
        self.days.iter().find(|d| d.t == t)
    }
}

pub fn mean_std(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.into_iter().collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn aggregate_day<'a>(t: Day, points: impl Iterator<Item = &'a MetricPoint> + Clone) -> EnsembleDay {
    let (gini_mean, gini_std) = mean_std(points.clone().map(|p| p.gini));
    let (nse_mean, nse_std) = mean_std(points.clone().map(|p| p.one_minus_nse));
    let (whale_mean, whale_std) = mean_std(points.clone().map(|p| p.whale_share));
    let (n_agents_mean, _) = mean_std(points.map(|p| p.n_agents as f64));
    EnsembleDay {
        t,
        gini_mean,
        gini_std,
        nse_mean,
        nse_std,
        whale_mean,
        whale_std,
        n_agents_mean,
    }
}

/// Reduces replicate summaries (in replicate order) to per-day statistics.
pub fn aggregate(replicates: Vec<ReplicateSummary>) -> Result<EnsembleResult, EngineError> {
    let first = replicates.first().ok_or(EngineError::NoReplicates)?;
    let pre_trade = aggregate_day(first.pre_trade.t, replicates.iter().map(|r| &r.pre_trade));
    let days = (0..first.series.len())
        .map(|i| aggregate_day(first.series[i].t, replicates.iter().map(|r| &r.series[i])))
        .collect();
    Ok(EnsembleResult {
        n_replicates: replicates.len(),
        pre_trade,
        days,
        replicates,
    })
}

pub(crate) fn with_pool<T: Send>(
    workers: usize,
    job: impl FnOnce() -> T + Send,
) -> Result<T, EngineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| EngineError::Pool(e.to_string()))?;
    Ok(pool.install(job))
}

/// Runs replicates `0..n_replicates` on up to `workers` threads. The result
/// does not depend on `workers`.
pub fn run_ensemble_with_market(
    config: &RunConfig,
    market: &[MarketDay],
    n_replicates: usize,
    workers: usize,
) -> Result<EnsembleResult, EngineError> {
    if n_replicates == 0 {
        return Err(EngineError::NoReplicates);
    }
    config.validate()?;
    let summaries = with_pool(workers, || {
        (0..n_replicates as u64)
            .into_par_iter()
            .map(|k| {
                let r = run_replicate(config, market, k)?;
                Ok(ReplicateSummary {
                    replicate: k,
                    pre_trade: r.pre_trade,
                    series: r.series,
                })
            })
            .collect::<Result<Vec<_>, EngineError>>()
    })??;
    aggregate(summaries)
}

pub fn run_ensemble(
    config: &RunConfig,
    n_replicates: usize,
    workers: usize,
) -> Result<EnsembleResult, EngineError> {
    let market = config.market.load()?;
    run_ensemble_with_market(config, &market, n_replicates, workers)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub t: Day,
    pub simulated: f64,
    pub reference: f64,
}

/// Simulated vs observed whale share for the opportunity-based scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub rows: Vec<EventRow>,
    /// `|simulated - reference|` on the last compared day, in percentage
    /// points.
    pub final_gap_pp: f64,
}

pub fn event_report(
    ensemble: &EnsembleResult,
    reference: &ReferenceSeries,
) -> Result<EventReport, EngineError> {
    if !reference.has_whale_share() {
        return Err(EngineError::MissingReferenceColumn("whale_share"));
    }
    let rows: Vec<EventRow> = ensemble
        .days
        .iter()
        .filter_map(|d| {
            let r = reference.get(d.t)?.whale_share?;
            Some(EventRow {
                t: d.t,
                simulated: d.whale_mean,
                reference: r,
            })
        })
        .collect();
    let last = rows.last().ok_or(EngineError::NoOverlap)?;
    Ok(EventReport {
        final_gap_pp: 100.0 * (last.simulated - last.reference).abs(),
        rows,
    })
}

/// Event validity: runs the S0 ensemble and compares its whale share with
/// the reference day by day.
pub fn validation_event(
    config: &RunConfig,
    market: &[MarketDay],
    reference: &ReferenceSeries,
    n_replicates: usize,
    workers: usize,
) -> Result<EventReport, EngineError> {
    if !reference.has_whale_share() {
        return Err(EngineError::MissingReferenceColumn("whale_share"));
    }
    let mut cfg = config.clone();
    cfg.scenario.kind = ScenarioKind::Cronje;
    let ens = run_ensemble_with_market(&cfg, market, n_replicates, workers)?;
    event_report(&ens, reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub dh_share: f64,
    pub t: Day,
    pub gini_simulated: f64,
    pub gini_reference: f64,
    pub delta_gini: f64,
    /// `delta_gini` relative to the reference, in percent.
    pub delta_gini_pct: f64,
    pub nse_simulated: f64,
    pub nse_reference: Option<f64>,
    pub delta_nse: Option<f64>,
    pub delta_nse_pct: Option<f64>,
}

pub fn sensitivity_row(
    dh_share: f64,
    ensemble: &EnsembleResult,
    reference: &ReferenceSeries,
) -> Result<SensitivityRow, EngineError> {
    let (day, point) = ensemble
        .days
        .iter()
        .rev()
        .find_map(|d| reference.get(d.t).map(|p| (d, p)))
        .ok_or(EngineError::NoOverlap)?;
    let pct = |delta: f64, base: f64| {
        if base != 0.0 {
            100.0 * delta / base
        } else {
            f64::NAN
        }
    };
    let delta_gini = (day.gini_mean - point.gini).abs();
    let delta_nse = point.one_minus_nse.map(|r| (day.nse_mean - r).abs());
    Ok(SensitivityRow {
        dh_share,
        t: day.t,
        gini_simulated: day.gini_mean,
        gini_reference: point.gini,
        delta_gini,
        delta_gini_pct: pct(delta_gini, point.gini),
        nse_simulated: day.nse_mean,
        nse_reference: point.one_minus_nse,
        delta_nse,
        delta_nse_pct: delta_nse.zip(point.one_minus_nse).map(|(d, r)| pct(d, r)),
    })
}

/// Parameter variability: one ensemble per diamond-hand share, compared
/// with the reference on the last common day.
pub fn validation_sensitivity(
    config: &RunConfig,
    market: &[MarketDay],
    reference: &ReferenceSeries,
    dh_shares: &[f64],
    n_replicates: usize,
    workers: usize,
) -> Result<Vec<SensitivityRow>, EngineError> {
    dh_shares
        .iter()
        .map(|&share| {
            let mut cfg = config.clone();
            cfg.population.dh_share = share;
            let ens = run_ensemble_with_market(&cfg, market, n_replicates, workers)?;
            sensitivity_row(share, &ens, reference)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> RunConfig {
        RunConfig {
            seed: 3,
            t_end: 75,
            population: PopulationConfig {
                n_initial: 200,
                ..PopulationConfig::default()
            },
            entrants: EntrantProcess {
                scale_divisor: 20.0,
                ..EntrantProcess::default()
            },
            ..RunConfig::default()
        }
    }

    #[test]
    fn single_day_window() {
        let cfg = RunConfig {
            t_end: 45,
            ..small_config()
        };
        let r = run(&cfg).unwrap();
        assert_eq!(r.series.len(), 1);
        assert_eq!(r.series[0].t, 45);
    }

    #[test]
    fn invalid_window_rejected() {
        let cfg = RunConfig {
            t_start: 50,
            t_end: 49,
            ..small_config()
        };
        assert!(matches!(run(&cfg), Err(EngineError::InvalidWindow { .. })));
    }

    #[test]
    fn missing_market_day_aborts_with_index() {
        let cfg = small_config();
        let mut market = cfg.market.load().unwrap();
        market.retain(|d| d.t != 60);
        assert!(matches!(
            run_replicate(&cfg, &market, 0),
            Err(EngineError::MissingMarketDay(60))
        ));
    }

    #[test]
    fn same_seed_same_result() {
        let cfg = small_config();
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.final_agents, b.final_agents);
    }

    #[test]
    fn agent_count_grows_by_entrants() {
        let cfg = small_config();
        let market = cfg.market.load().unwrap();
        let window = cfg.market_window(&market).unwrap();
        let mut sim = Simulation::new(&cfg, replicate_stream(cfg.seed, 0)).unwrap();
        for day in &window {
            let before = sim.agents().len();
            let out = sim.step_day(day.into()).unwrap();
            assert_eq!(sim.agents().len(), before + out.entrants);
            assert_eq!(out.metrics.n_agents, sim.agents().len());
        }
    }

    #[test]
    fn null_step_leaves_holdings() {
        let mut cfg = small_config();
        cfg.behavior.p_rt_trade = 0.0;
        cfg.behavior.p_t_fgi_e = 0.0;
        cfg.behavior.p_t_fgi_n = 0.0;
        cfg.behavior.p_t_w_h = 0.0;
        cfg.behavior.p_t_w_l = 0.0;
        cfg.entrants.scale_divisor = 1e12;
        let market = cfg.market.load().unwrap();
        let window = cfg.market_window(&market).unwrap();
        let mut sim = Simulation::new(&cfg, replicate_stream(1, 0)).unwrap();
        let first = sim.step_day((&window[0]).into()).unwrap();
        let holdings = sim.agents().to_vec();
        let second = sim.step_day((&window[1]).into()).unwrap();
        assert_eq!(sim.agents(), holdings.as_slice());
        assert_eq!(second.entrants, 0);
        assert_eq!(second.orders, 0);
        assert_eq!(
            (
                second.metrics.gini,
                second.metrics.one_minus_nse,
                second.metrics.whale_share
            ),
            (
                first.metrics.gini,
                first.metrics.one_minus_nse,
                first.metrics.whale_share
            )
        );
    }

    #[test]
    fn single_replicate_ensemble_has_zero_spread() {
        let cfg = small_config();
        let ens = run_ensemble(&cfg, 1, 1).unwrap();
        let single = run(&cfg).unwrap();
        assert_eq!(ens.days.len(), single.series.len());
        for (d, p) in ens.days.iter().zip(&single.series) {
            assert_eq!(d.gini_mean, p.gini);
            assert_eq!(d.gini_std, 0.0);
            assert_eq!(d.whale_std, 0.0);
        }
        assert!(matches!(
            run_ensemble(&cfg, 0, 1),
            Err(EngineError::NoReplicates)
        ));
    }

    #[test]
    fn event_self_comparison_has_zero_gap() {
        let cfg = small_config();
        let ens = run_ensemble(&cfg, 2, 1).unwrap();
        let reference = ReferenceSeries {
            points: ens
                .days
                .iter()
                .map(|d| crate::data_ingest::ReferencePoint {
                    t: d.t,
                    gini: d.gini_mean,
                    one_minus_nse: Some(d.nse_mean),
                    whale_share: Some(d.whale_mean),
                    n_holders: None,
                })
                .collect(),
        };
        let report = event_report(&ens, &reference).unwrap();
        assert_eq!(report.final_gap_pp, 0.0);
        assert_eq!(report.rows.len(), ens.days.len());
        let row = sensitivity_row(0.3, &ens, &reference).unwrap();
        assert_eq!(row.delta_gini, 0.0);
        assert_eq!(row.delta_nse, Some(0.0));
    }

    #[test]
    fn event_requires_whale_column() {
        let cfg = small_config();
        let market = cfg.market.load().unwrap();
        let reference = ReferenceSeries {
            points: vec![crate::data_ingest::ReferencePoint {
                t: 50,
                gini: 0.5,
                one_minus_nse: None,
                whale_share: None,
                n_holders: None,
            }],
        };
        assert!(matches!(
            validation_event(&cfg, &market, &reference, 1, 1),
            Err(EngineError::MissingReferenceColumn("whale_share"))
        ));
    }

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std([2.0]), (2.0, 0.0));
        let (m, s) = mean_std([1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
