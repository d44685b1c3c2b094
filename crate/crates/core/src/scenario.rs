//! Initial population, fiat endowments and the three fair-launch token
//! allocations, plus the daily stream of fiat-only entrants.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_ingest::Day;
use crate::distributions::{
    AsymLaplace, Bernoulli, Exponential, Lomax, ParamError, Pareto, RandomSource, TruncNormal,
};

/// Circulating token supply from the start day onwards.
pub const TOTAL_SUPPLY: f64 = 36_666.0;

/// Attempts at redrawing an allocation whose raw weights are all zero.
pub const MAX_ALLOCATION_RETRIES: usize = 10;

pub type AgentId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("population size must be at least 1")]
    EmptyPopulation,
    #[error("raw allocation weights were all zero after {0} retries")]
    DegenerateAllocation(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    DiamondHand,
    RandomTrader,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub strategy: Strategy,
    pub fiat: f64,
    pub tokens: f64,
    pub entry_day: Day,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// S0: opportunity-based launch, Lomax-distributed holdings.
    Cronje,
    /// S1: equal split.
    Bentham,
    /// S2: lottery, truncated-normal holdings.
    Rawls,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::Cronje,
        ScenarioKind::Bentham,
        ScenarioKind::Rawls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Cronje => "cronje",
            ScenarioKind::Bentham => "bentham",
            ScenarioKind::Rawls => "rawls",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Cronje => "S0",
            ScenarioKind::Bentham => "S1",
            ScenarioKind::Rawls => "S2",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cronje" | "s0" => Ok(ScenarioKind::Cronje),
            "bentham" | "s1" => Ok(ScenarioKind::Bentham),
            "rawls" | "s2" => Ok(ScenarioKind::Rawls),
            other => Err(format!(
                "unknown scenario `{other}` (cronje, bentham, rawls)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub lomax_scale: f64,
    pub lomax_shape: f64,
    pub tn_mean: f64,
    pub tn_sd: f64,
    pub total_supply: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self::new(ScenarioKind::Cronje)
    }
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            kind,
            lomax_scale: 0.4,
            lomax_shape: 0.5,
            tn_mean: 0.103,
            tn_sd: 0.192,
            total_supply: TOTAL_SUPPLY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationConfig {
    pub n_initial: usize,
    pub dh_share: f64,
    pub pareto_shape: f64,
    pub pareto_min: f64,
    pub exp_rate: f64,
    pub rich_share: f64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            n_initial: 5000,
            dh_share: 0.3,
            pareto_shape: 2.1,
            pareto_min: 400_000.0,
            exp_rate: 1.0 / 40_000.0,
            rich_share: 0.1,
        }
    }
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (name, v) in [("dh_share", self.dh_share), ("rich_share", self.rich_share)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ParamError::Domain {
                    name,
                    requirement: "within [0, 1]",
                    value: v,
                }
                .into());
            }
        }
        Pareto::new(self.pareto_min, self.pareto_shape)?;
        Exponential::new(self.exp_rate)?;
        Ok(())
    }
}

fn rounded_count(share: f64, n: usize) -> usize {
    ((share * n as f64).round() as usize).min(n)
}

/// Fiat endowments: exactly `round(rich_share * n)` Pareto draws, the rest
/// exponential, in random order.
pub fn endow_fiat(
    rng: &mut RandomSource,
    cfg: &PopulationConfig,
    n: usize,
) -> Result<Vec<f64>, ScenarioError> {
    if n < 1 {
        return Err(ScenarioError::EmptyPopulation);
    }
    let pareto = Pareto::new(cfg.pareto_min, cfg.pareto_shape)?;
    let exp = Exponential::new(cfg.exp_rate)?;
    let n_rich = rounded_count(cfg.rich_share, n);
    let mut fiat = Vec::with_capacity(n);
    fiat.extend((0..n_rich).map(|_| pareto.sample(rng)));
    fiat.extend((n_rich..n).map(|_| exp.sample(rng)));
    fiat.shuffle(rng);
    Ok(fiat)
}

/// Splits `spec.total_supply` over `n` holders following the scenario's
/// distribution family. Raw draws are rescaled proportionally; the last
/// holder absorbs the floating-point residual.
pub fn allocate_tokens(
    rng: &mut RandomSource,
    spec: &ScenarioSpec,
    n: usize,
) -> Result<Vec<f64>, ScenarioError> {
    if n < 1 {
        return Err(ScenarioError::EmptyPopulation);
    }
    if !(spec.total_supply > 0.0 && spec.total_supply.is_finite()) {
        return Err(ParamError::Domain {
            name: "total_supply",
            requirement: "strictly positive",
            value: spec.total_supply,
        }
        .into());
    }
    let raw = match spec.kind {
        ScenarioKind::Bentham => return Ok(vec![spec.total_supply / n as f64; n]),
        ScenarioKind::Cronje => {
            let d = Lomax::new(spec.lomax_scale, spec.lomax_shape)?;
            draw_nonzero(|| (0..n).map(|_| d.sample(rng)).collect())?
        }
        ScenarioKind::Rawls => {
            let d = TruncNormal::new(spec.tn_mean, spec.tn_sd, 0.0, f64::INFINITY)?;
            draw_nonzero(|| (0..n).map(|_| d.sample(rng)).collect())?
        }
    };
    Ok(rescale(&raw, spec.total_supply))
}

fn draw_nonzero(mut draw: impl FnMut() -> Vec<f64>) -> Result<Vec<f64>, ScenarioError> {
    for _ in 0..=MAX_ALLOCATION_RETRIES {
        let w = draw();
        let total: f64 = w.iter().sum();
        if total > 0.0 && total.is_finite() {
            return Ok(w);
        }
    }
    Err(ScenarioError::DegenerateAllocation(MAX_ALLOCATION_RETRIES))
}

fn rescale(raw: &[f64], total: f64) -> Vec<f64> {
    let factor = total / raw.iter().sum::<f64>();
    let mut out: Vec<f64> = raw.iter().map(|w| w * factor).collect();
    let (last, head) = out.split_last_mut().expect("non-empty");
    *last = (total - head.iter().sum::<f64>()).max(0.0);
    out
}

/// Marks exactly `round(dh_share * n)` uniformly chosen agents as diamond
/// hands, the rest as random traders.
pub fn assign_strategies(rng: &mut RandomSource, cfg: &PopulationConfig, agents: &mut [Agent]) {
    let n = agents.len();
    let n_dh = rounded_count(cfg.dh_share, n);
    let mut idx: Vec<usize> = (0..n).collect();
    let (chosen, _) = idx.partial_shuffle(rng, n_dh);
    for a in agents.iter_mut() {
        a.strategy = Strategy::RandomTrader;
    }
    for &i in chosen.iter() {
        agents[i].strategy = Strategy::DiamondHand;
    }
}

/// Builds the start-day population for a scenario. Ids run `0..n`.
pub fn initial_population(
    rng: &mut RandomSource,
    cfg: &PopulationConfig,
    scenario: &ScenarioSpec,
    day: Day,
) -> Result<Vec<Agent>, ScenarioError> {
    cfg.validate()?;
    let n = cfg.n_initial;
    let fiat = endow_fiat(rng, cfg, n)?;
    let tokens = allocate_tokens(rng, scenario, n)?;
    let mut agents: Vec<Agent> = fiat
        .into_iter()
        .zip(tokens)
        .enumerate()
        .map(|(id, (fiat, tokens))| Agent {
            id,
            strategy: Strategy::RandomTrader,
            fiat,
            tokens,
            entry_day: day,
        })
        .collect();
    assign_strategies(rng, cfg, &mut agents);
    Ok(agents)
}

/// Fiat-only newcomers. Wealth tier and strategy are drawn per entrant with
/// the population shares as probabilities, since daily batches are too small
/// for exact-count rounding.
pub fn spawn_entrants(
    rng: &mut RandomSource,
    cfg: &PopulationConfig,
    day: Day,
    count: usize,
    first_id: AgentId,
) -> Result<Vec<Agent>, ScenarioError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let pareto = Pareto::new(cfg.pareto_min, cfg.pareto_shape)?;
    let exp = Exponential::new(cfg.exp_rate)?;
    let rich = Bernoulli::new(cfg.rich_share)?;
    let dh = Bernoulli::new(cfg.dh_share)?;
    Ok((0..count)
        .map(|k| {
            let fiat = if rich.sample(rng) {
                pareto.sample(rng)
            } else {
                exp.sample(rng)
            };
            let strategy = if dh.sample(rng) {
                Strategy::DiamondHand
            } else {
                Strategy::RandomTrader
            };
            Agent {
                id: first_id + k,
                strategy,
                fiat,
                tokens: 0.0,
                entry_day: day,
            }
        })
        .collect())
}

/// Daily entrant count: an asymmetric-Laplace draw floored at zero, divided
/// by `scale_divisor`, rounded to the nearest integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntrantProcess {
    pub distribution: AsymLaplace,
    pub scale_divisor: f64,
}

impl Default for EntrantProcess {
    fn default() -> Self {
        Self {
            distribution: AsymLaplace {
                kappa: 0.71,
                location: 58.0,
                scale: 76.0,
            },
            scale_divisor: 1.0,
        }
    }
}

impl EntrantProcess {
    pub fn validate(&self) -> Result<(), ParamError> {
        let d = self.distribution;
        AsymLaplace::new(d.kappa, d.location, d.scale)?;
        if !(self.scale_divisor >= 1.0 && self.scale_divisor.is_finite()) {
            return Err(ParamError::Domain {
                name: "entrant scale divisor",
                requirement: "at least 1",
                value: self.scale_divisor,
            });
        }
        Ok(())
    }

    pub fn draw(&self, rng: &mut RandomSource) -> usize {
        let x = self.distribution.sample(rng).max(0.0);
        (x / self.scale_divisor).round() as usize
    }
}
