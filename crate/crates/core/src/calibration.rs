//! Grid search of behavioural parameters against an observed concentration
//! series.
//!
//! Every cell is evaluated on the same replicate seeds, so a cell's score
//! does not depend on which other cells are in the grid.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_ingest::{MarketDay, ReferenceSeries};
use crate::engine::{run_ensemble_with_market, EngineError, EnsembleDay, RunConfig};

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("series lengths differ: {actual} observed vs {simulated} simulated")]
    LengthMismatch { actual: usize, simulated: usize },
    #[error("no points to compare")]
    Empty,
    #[error("every observed value is zero; MAPE undefined")]
    AllZero,
    #[error("grid has no feasible cell (need th_l < th_h)")]
    EmptyGrid,
    #[error("grid has {cells} feasible cells, above the limit of {limit}; coarsen it")]
    TooManyCells { cells: usize, limit: usize },
    #[error("grid axis `{0}` is empty")]
    EmptyAxis(&'static str),
    #[error("grid value {value} for `{name}` outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
}

impl CalibrationError {
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, CalibrationError::Engine(e) if e.is_invariant_violation())
    }
}

pub fn rmse(actual: &[f64], simulated: &[f64]) -> Result<f64, CalibrationError> {
    check_lengths(actual, simulated)?;
    let sse: f64 = actual
        .iter()
        .zip(simulated)
        .map(|(a, s)| (a - s) * (a - s))
        .sum();
    Ok((sse / actual.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mape {
    /// Mean absolute percentage error, in percent.
    pub value: f64,
    /// Points skipped because the observed value is zero.
    pub skipped: usize,
}

pub fn mape(actual: &[f64], simulated: &[f64]) -> Result<Mape, CalibrationError> {
    check_lengths(actual, simulated)?;
    let (sum, used) = actual
        .iter()
        .zip(simulated)
        .filter(|(a, _)| **a != 0.0)
        .fold((0.0, 0usize), |(sum, used), (a, s)| {
            (sum + ((a - s) / a).abs(), used + 1)
        });
    if used == 0 {
        return Err(CalibrationError::AllZero);
    }
    Ok(Mape {
        value: 100.0 * sum / used as f64,
        skipped: actual.len() - used,
    })
}

fn check_lengths(actual: &[f64], simulated: &[f64]) -> Result<(), CalibrationError> {
    if actual.len() != simulated.len() {
        return Err(CalibrationError::LengthMismatch {
            actual: actual.len(),
            simulated: simulated.len(),
        });
    }
    if actual.is_empty() {
        return Err(CalibrationError::Empty);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Rmse,
    Mape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMetric {
    Gini,
    /// `1 - normalized Shannon entropy`.
    Nse,
}

impl TargetMetric {
    fn simulated(self, day: &EnsembleDay) -> f64 {
        match self {
            TargetMetric::Gini => day.gini_mean,
            TargetMetric::Nse => day.nse_mean,
        }
    }

    fn spread(self, day: &EnsembleDay) -> f64 {
        match self {
            TargetMetric::Gini => day.gini_std,
            TargetMetric::Nse => day.nse_std,
        }
    }
}

/// One point of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub th_h: u8,
    pub th_l: u8,
    pub p_t_fgi_e: f64,
    pub p_t_w_h: f64,
    pub p_t_fgi_n: f64,
    pub p_t_w_l: f64,
    pub dh_share: f64,
    pub p_dh_buy: f64,
}

impl Cell {
    pub fn from_config(config: &RunConfig) -> Self {
        let b = &config.behavior;
        Self {
            th_h: b.th_h,
            th_l: b.th_l,
            p_t_fgi_e: b.p_t_fgi_e,
            p_t_w_h: b.p_t_w_h,
            p_t_fgi_n: b.p_t_fgi_n,
            p_t_w_l: b.p_t_w_l,
            dh_share: config.population.dh_share,
            p_dh_buy: b.p_dh_buy,
        }
    }

    pub fn apply(&self, config: &RunConfig) -> RunConfig {
        let mut c = config.clone();
        c.behavior.th_h = self.th_h;
        c.behavior.th_l = self.th_l;
        c.behavior.p_t_fgi_e = self.p_t_fgi_e;
        c.behavior.p_t_w_h = self.p_t_w_h;
        c.behavior.p_t_fgi_n = self.p_t_fgi_n;
        c.behavior.p_t_w_l = self.p_t_w_l;
        c.behavior.p_dh_buy = self.p_dh_buy;
        c.population.dh_share = self.dh_share;
        c
    }

    /// Lexicographic order on the parameter tuple, used to break ties.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        (self.th_h, self.th_l)
            .cmp(&(other.th_h, other.th_l))
            .then_with(|| {
                let a = [
                    self.p_t_fgi_e,
                    self.p_t_w_h,
                    self.p_t_fgi_n,
                    self.p_t_w_l,
                    self.dh_share,
                    self.p_dh_buy,
                ];
                let b = [
                    other.p_t_fgi_e,
                    other.p_t_w_h,
                    other.p_t_fgi_n,
                    other.p_t_w_l,
                    other.dh_share,
                    other.p_dh_buy,
                ];
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
    }
}

/// Candidate values per parameter. Cells with `th_l >= th_h` are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub th_h: Vec<u8>,
    pub th_l: Vec<u8>,
    pub p_t_fgi_e: Vec<f64>,
    pub p_t_w_h: Vec<f64>,
    pub p_t_fgi_n: Vec<f64>,
    pub p_t_w_l: Vec<f64>,
    pub dh_share: Vec<f64>,
    pub p_dh_buy: Vec<f64>,
    pub replicates_per_cell: usize,
    /// Replicates for re-scoring the winner; 0 disables the re-run.
    pub final_replicates: usize,
    pub max_cells: usize,
}

fn tenths() -> Vec<f64> {
    (0..=10).map(|i| f64::from(i) / 10.0).collect()
}

impl Default for GridSpec {
    /// Thresholds 0..=100 by 10, probabilities 0..=1 by 0.1, diamond-hand
    /// share in {0.1, 0.3, 0.5}. The full product is far above `max_cells`;
    /// callers narrow it.
    fn default() -> Self {
        Self {
            th_h: (0..=10).map(|i| i * 10).collect(),
            th_l: (0..=10).map(|i| i * 10).collect(),
            p_t_fgi_e: tenths(),
            p_t_w_h: tenths(),
            p_t_fgi_n: tenths(),
            p_t_w_l: tenths(),
            dh_share: vec![0.1, 0.3, 0.5],
            p_dh_buy: tenths(),
            replicates_per_cell: 5,
            final_replicates: 30,
            max_cells: 10_000,
        }
    }
}

impl GridSpec {
    /// The single cell holding `config`'s parameters.
    pub fn around(config: &RunConfig) -> Self {
        let c = Cell::from_config(config);
        Self {
            th_h: vec![c.th_h],
            th_l: vec![c.th_l],
            p_t_fgi_e: vec![c.p_t_fgi_e],
            p_t_w_h: vec![c.p_t_w_h],
            p_t_fgi_n: vec![c.p_t_fgi_n],
            p_t_w_l: vec![c.p_t_w_l],
            dh_share: vec![c.dh_share],
            p_dh_buy: vec![c.p_dh_buy],
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), CalibrationError> {
        let axes: [(&'static str, &[f64]); 6] = [
            ("p_t_fgi_e", &self.p_t_fgi_e),
            ("p_t_w_h", &self.p_t_w_h),
            ("p_t_fgi_n", &self.p_t_fgi_n),
            ("p_t_w_l", &self.p_t_w_l),
            ("dh_share", &self.dh_share),
            ("p_dh_buy", &self.p_dh_buy),
        ];
        if self.th_h.is_empty() {
            return Err(CalibrationError::EmptyAxis("th_h"));
        }
        if self.th_l.is_empty() {
            return Err(CalibrationError::EmptyAxis("th_l"));
        }
        for (name, values) in axes {
            if values.is_empty() {
                return Err(CalibrationError::EmptyAxis(name));
            }
            if let Some(&value) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(CalibrationError::OutOfRange { name, value });
            }
        }
        Ok(())
    }

    fn threshold_pairs(&self) -> Vec<(u8, u8)> {
        let mut pairs = Vec::new();
        for &h in &self.th_h {
            for &l in &self.th_l {
                if l < h {
                    pairs.push((h, l));
                }
            }
        }
        pairs
    }

    pub fn feasible_count(&self) -> usize {
        self.threshold_pairs().len()
            * self.p_t_fgi_e.len()
            * self.p_t_w_h.len()
            * self.p_t_fgi_n.len()
            * self.p_t_w_l.len()
            * self.dh_share.len()
            * self.p_dh_buy.len()
    }

    /// Feasible cells in lexicographic axis order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.feasible_count());
        for (th_h, th_l) in self.threshold_pairs() {
            for &p_t_fgi_e in &self.p_t_fgi_e {
                for &p_t_w_h in &self.p_t_w_h {
                    for &p_t_fgi_n in &self.p_t_fgi_n {
                        for &p_t_w_l in &self.p_t_w_l {
                            for &dh_share in &self.dh_share {
                                for &p_dh_buy in &self.p_dh_buy {
                                    out.push(Cell {
                                        th_h,
                                        th_l,
                                        p_t_fgi_e,
                                        p_t_w_h,
                                        p_t_fgi_n,
                                        p_t_w_l,
                                        dh_share,
                                        p_dh_buy,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// A grid centred on `best` with half the current step on every axis.
    pub fn refined(&self, best: &Cell) -> Self {
        fn step_f(values: &[f64]) -> f64 {
            min_gap(values.iter().copied()).unwrap_or(0.0)
        }
        fn around_f(v: f64, step: f64) -> Vec<f64> {
            let h = step / 2.0;
            let mut out: Vec<f64> = [v - h, v, v + h]
                .into_iter()
                .filter(|x| (0.0..=1.0).contains(x))
                .collect();
            out.dedup();
            out
        }
        fn around_u(v: u8, values: &[u8]) -> Vec<u8> {
            let step = min_gap(values.iter().map(|&x| f64::from(x))).unwrap_or(0.0);
            let h = (step / 2.0).floor() as i32;
            let mut out: Vec<u8> = [i32::from(v) - h, i32::from(v), i32::from(v) + h]
                .into_iter()
                .filter(|x| (0..=100).contains(x))
                .map(|x| x as u8)
                .collect();
            out.dedup();
            out
        }
        Self {
            th_h: around_u(best.th_h, &self.th_h),
            th_l: around_u(best.th_l, &self.th_l),
            p_t_fgi_e: around_f(best.p_t_fgi_e, step_f(&self.p_t_fgi_e)),
            p_t_w_h: around_f(best.p_t_w_h, step_f(&self.p_t_w_h)),
            p_t_fgi_n: around_f(best.p_t_fgi_n, step_f(&self.p_t_fgi_n)),
            p_t_w_l: around_f(best.p_t_w_l, step_f(&self.p_t_w_l)),
            dh_share: vec![best.dh_share],
            p_dh_buy: around_f(best.p_dh_buy, step_f(&self.p_dh_buy)),
            ..self.clone()
        }
    }
}

fn min_gap(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .min_by(f64::total_cmp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub cell: Cell,
    pub rmse: f64,
    pub mape: f64,
    pub mape_skipped: usize,
    /// Mean across compared days of the cross-replicate standard deviation.
    pub mean_std: f64,
    pub replicates: usize,
}

impl CellScore {
    pub fn objective(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Rmse => self.rmse,
            Objective::Mape => self.mape,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub objective: Objective,
    pub metric: TargetMetric,
    pub best: CellScore,
    /// Winner re-scored with `final_replicates`.
    pub rescored: Option<CellScore>,
    /// Every evaluated cell in grid order.
    pub table: Vec<CellScore>,
}

/// Scores one cell: the ensemble mean series against the observed values on
/// every day both cover.
pub fn evaluate_cell(
    cell: &Cell,
    base: &RunConfig,
    market: &[MarketDay],
    reference: &ReferenceSeries,
    metric: TargetMetric,
    replicates: usize,
) -> Result<CellScore, CalibrationError> {
    if metric == TargetMetric::Nse && !reference.has_nse() {
        return Err(EngineError::MissingReferenceColumn("one_minus_nse").into());
    }
    let config = cell.apply(base);
    let ens = run_ensemble_with_market(&config, market, replicates, 1)?;
    let mut actual = Vec::new();
    let mut simulated = Vec::new();
    let mut spread = 0.0;
    for day in &ens.days {
        let Some(p) = reference.get(day.t) else {
            continue;
        };
        let observed = match metric {
            TargetMetric::Gini => Some(p.gini),
            TargetMetric::Nse => p.one_minus_nse,
        };
        if let Some(a) = observed {
            actual.push(a);
            simulated.push(metric.simulated(day));
            spread += metric.spread(day);
        }
    }
    if actual.is_empty() {
        return Err(EngineError::NoOverlap.into());
    }
    let m = mape(&actual, &simulated)?;
    Ok(CellScore {
        cell: *cell,
        rmse: rmse(&actual, &simulated)?,
        mape: m.value,
        mape_skipped: m.skipped,
        mean_std: spread / actual.len() as f64,
        replicates,
    })
}

fn better(a: &CellScore, b: &CellScore, objective: Objective) -> bool {
    match a.objective(objective).total_cmp(&b.objective(objective)) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.cell.lex_cmp(&b.cell) == Ordering::Less,
    }
}

/// Evaluates every feasible cell of `grid`, cells in parallel on `workers`
/// threads, and returns the minimiser of `objective`.
pub fn grid_search(
    grid: &GridSpec,
    base: &RunConfig,
    market: &[MarketDay],
    reference: &ReferenceSeries,
    objective: Objective,
    metric: TargetMetric,
    workers: usize,
) -> Result<CalibrationResult, CalibrationError> {
    grid.validate()?;
    base.validate()?;
    let count = grid.feasible_count();
    if count == 0 {
        return Err(CalibrationError::EmptyGrid);
    }
    if count > grid.max_cells {
        return Err(CalibrationError::TooManyCells {
            cells: count,
            limit: grid.max_cells,
        });
    }
    let cells = grid.cells();
    let reps = grid.replicates_per_cell.max(1);
    let table = crate::engine::with_pool(workers, || {
        cells
            .par_iter()
            .map(|c| evaluate_cell(c, base, market, reference, metric, reps))
            .collect::<Result<Vec<_>, _>>()
    })??;

    let best = *table
        .iter()
        .reduce(|a, b| if better(b, a, objective) { b } else { a })
        .expect("grid is non-empty");
    let rescored = if grid.final_replicates > 0 {
        Some(evaluate_cell(
            &best.cell,
            base,
            market,
            reference,
            metric,
            grid.final_replicates,
        )?)
    } else {
        None
    };
    Ok(CalibrationResult {
        objective,
        metric,
        best,
        rescored,
        table,
    })
}
