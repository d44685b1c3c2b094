//! Per-agent daily trading decisions for diamond hands (DH) and random
//! traders (RT), and the normal order-size draws.

use serde::{Deserialize, Serialize};

use crate::distributions::{ParamError, RandomSource};
use crate::scenario::{Agent, Strategy};

/// Calibratable behavioral parameters. Defaults are the calibrated optimum
/// (High preset).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehaviorParams {
    pub p_dh_buy: f64,
    pub p_rt_trade: f64,
    pub p_rt_buy: f64,
    pub th_h: u8,
    pub th_l: u8,
    pub p_t_fgi_e: f64,
    pub p_t_w_h: f64,
    pub p_t_fgi_n: f64,
    pub p_t_w_l: f64,
    pub wealth_percentile: f64,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        Self {
            p_dh_buy: 0.7,
            p_rt_trade: 0.5,
            p_rt_buy: 0.5,
            th_h: 80,
            th_l: 20,
            p_t_fgi_e: 0.7,
            p_t_w_h: 0.7,
            p_t_fgi_n: 0.8,
            p_t_w_l: 0.9,
            wealth_percentile: 0.9,
        }
    }
}

impl BehaviorParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, v) in [
            ("p_dh_buy", self.p_dh_buy),
            ("p_rt_trade", self.p_rt_trade),
            ("p_rt_buy", self.p_rt_buy),
            ("p_t_fgi_e", self.p_t_fgi_e),
            ("p_t_w_h", self.p_t_w_h),
            ("p_t_fgi_n", self.p_t_fgi_n),
            ("p_t_w_l", self.p_t_w_l),
            ("wealth_percentile", self.wealth_percentile),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ParamError::Domain {
                    name,
                    requirement: "within [0, 1]",
                    value: v,
                });
            }
        }
        if self.th_h > 100 || self.th_l >= self.th_h {
            return Err(ParamError::Domain {
                name: "th_l",
                requirement: "below th_h, with th_h <= 100",
                value: f64::from(self.th_l),
            });
        }
        Ok(())
    }

    pub fn with_preset(self, preset: Preset) -> Self {
        let [e, wh, n, wl] = preset.probabilities();
        Self {
            p_t_fgi_e: e,
            p_t_w_h: wh,
            p_t_fgi_n: n,
            p_t_w_l: wl,
            ..self
        }
    }
}

/// The three DH trading-probability sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    High,
    Medium,
    Low,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::High, Preset::Medium, Preset::Low];

    /// `[P(T|FGI_e), P(T|W_h), P(T|FGI_n), P(T|W_l)]`.
    pub fn probabilities(self) -> [f64; 4] {
        match self {
            Preset::High => [0.7, 0.7, 0.8, 0.9],
            Preset::Medium => [0.3, 0.4, 0.3, 0.5],
            Preset::Low => [0.1, 0.1, 0.2, 0.2],
        }
    }

    /// Published aggregate trade probability of the set.
    pub fn reported_aggregate(self) -> f64 {
        match self {
            Preset::High => 0.77,
            Preset::Medium => 0.38,
            Preset::Low => 0.15,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::High => "high",
            Preset::Medium => "medium",
            Preset::Low => "low",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "high" => Ok(Preset::High),
            "medium" => Ok(Preset::Medium),
            "low" => Ok(Preset::Low),
            other => Err(format!("unknown preset `{other}` (high, medium, low)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FgiState {
    Extreme,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WealthState {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    NoTrade,
    Buy,
    Sell,
}

/// Threshold values themselves count as normal.
pub fn classify_fgi(fgi: u8, params: &BehaviorParams) -> FgiState {
    if fgi > params.th_h || fgi < params.th_l {
        FgiState::Extreme
    } else {
        FgiState::Normal
    }
}

pub fn classify_wealth(fiat: f64, threshold: f64) -> WealthState {
    if fiat > threshold {
        WealthState::High
    } else {
        WealthState::Low
    }
}

/// Linear-interpolation quantile (`q` in [0, 1]) of `values`, which is
/// reordered in place. Returns 0 for an empty slice.
pub fn quantile_in_place(values: &mut [f64], q: f64) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let (_, &mut lo_val, upper) = values.select_nth_unstable_by(lo, f64::total_cmp);
    if frac == 0.0 || upper.is_empty() {
        return lo_val;
    }
    let hi_val = upper.iter().copied().fold(f64::INFINITY, f64::min);
    lo_val + frac * (hi_val - lo_val)
}

/// Cell probability for the realized (FGI, wealth) state: the mean of the
/// two matching conditionals.
pub fn dh_trade_probability(fgi: FgiState, wealth: WealthState, params: &BehaviorParams) -> f64 {
    let f = match fgi {
        FgiState::Extreme => params.p_t_fgi_e,
        FgiState::Normal => params.p_t_fgi_n,
    };
    let w = match wealth {
        WealthState::High => params.p_t_w_h,
        WealthState::Low => params.p_t_w_l,
    };
    0.5 * (f + w)
}

/// Population-level trade probability: the four cells weighted by the
/// state probabilities.
pub fn expected_dh_trade_probability(
    p_extreme: f64,
    p_high_wealth: f64,
    params: &BehaviorParams,
) -> f64 {
    let mut total = 0.0;
    for (f, pf) in [
        (FgiState::Extreme, p_extreme),
        (FgiState::Normal, 1.0 - p_extreme),
    ] {
        for (w, pw) in [
            (WealthState::High, p_high_wealth),
            (WealthState::Low, 1.0 - p_high_wealth),
        ] {
            total += dh_trade_probability(f, w, params) * pf * pw;
        }
    }
    total
}

/// Trade / side decision. Infeasible sides (selling with no tokens, buying
/// with no fiat) collapse to `NoTrade`.
pub fn decide_action(
    rng: &mut RandomSource,
    agent: &Agent,
    fgi: FgiState,
    wealth: WealthState,
    params: &BehaviorParams,
) -> Action {
    let (p_trade, p_buy) = match agent.strategy {
        Strategy::RandomTrader => (params.p_rt_trade, params.p_rt_buy),
        Strategy::DiamondHand => (dh_trade_probability(fgi, wealth, params), params.p_dh_buy),
    };
    if rng.uniform() >= p_trade {
        return Action::NoTrade;
    }
    if rng.uniform() < p_buy {
        if agent.fiat > 0.0 {
            Action::Buy
        } else {
            Action::NoTrade
        }
    } else if agent.tokens > 0.0 {
        Action::Sell
    } else {
        Action::NoTrade
    }
}

/// `holding/2 + z * holding/6`, clamped to `(0, holding]`; `None` when the
/// raw value is not positive.
pub fn order_size_from_normal(holding: f64, z: f64) -> Option<f64> {
    let mean = 0.5 * holding;
    let raw = mean + z * mean / 3.0;
    if raw <= 0.0 {
        None
    } else {
        Some(raw.min(holding))
    }
}

/// Fiat budget for a buy order, `N(f/2, f/6)` clamped to the agent's fiat.
pub fn size_buy(rng: &mut RandomSource, agent: &Agent) -> Option<f64> {
    if agent.fiat <= 0.0 {
        return None;
    }
    order_size_from_normal(agent.fiat, rng.standard_normal())
}

/// Token quantity for a sell order, `N(y/2, y/6)` clamped to the holding.
pub fn size_sell(rng: &mut RandomSource, agent: &Agent) -> Option<f64> {
    if agent.tokens <= 0.0 {
        return None;
    }
    order_size_from_normal(agent.tokens, rng.standard_normal())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(strategy: Strategy, fiat: f64, tokens: f64) -> Agent {
        Agent {
            id: 0,
            strategy,
            fiat,
            tokens,
            entry_day: 45,
        }
    }

    #[test]
    fn fgi_classification_boundaries() {
        let p = BehaviorParams::default();
        assert_eq!(classify_fgi(85, &p), FgiState::Extreme);
        assert_eq!(classify_fgi(80, &p), FgiState::Normal);
        assert_eq!(classify_fgi(20, &p), FgiState::Normal);
        assert_eq!(classify_fgi(10, &p), FgiState::Extreme);
        assert_eq!(classify_fgi(50, &p), FgiState::Normal);
    }

    #[test]
    fn wealth_classification_is_strict() {
        assert_eq!(classify_wealth(100.0, 100.0), WealthState::Low);
        assert_eq!(classify_wealth(101.0, 100.0), WealthState::High);
    }

    #[test]
    fn percentile_splits_top_decile() {
        for n in [1usize, 2, 9, 10, 11, 99, 100, 101, 1234] {
            let mut v: Vec<f64> = (0..n).map(|i| ((i * 7919) % n) as f64).collect();
            let original = v.clone();
            let p90 = quantile_in_place(&mut v, 0.9);
            let high = original
                .iter()
                .filter(|&&f| classify_wealth(f, p90) == WealthState::High)
                .count();
            let expect = n / 10;
            assert!(high.abs_diff(expect) <= 1, "n={n} high={high}");
        }
    }

    #[test]
    fn percentile_interpolates() {
        let mut v = vec![4.0, 1.0, 3.0, 2.0];
        // h = 0.5 * 3 = 1.5 -> between 2 and 3
        assert_eq!(quantile_in_place(&mut v, 0.5), 2.5);
        assert_eq!(quantile_in_place(&mut [], 0.9), 0.0);
    }

    #[test]
    fn high_preset_cell() {
        let p = BehaviorParams::default().with_preset(Preset::High);
        assert!(
            (dh_trade_probability(FgiState::Extreme, WealthState::High, &p) - 0.7).abs() < 1e-12
        );
    }

    #[test]
    fn equal_weight_cells_match_reported_aggregates() {
        for (preset, expected) in [
            (Preset::High, 0.775),
            (Preset::Medium, 0.375),
            (Preset::Low, 0.15),
        ] {
            let p = BehaviorParams::default().with_preset(preset);
            let agg = expected_dh_trade_probability(0.5, 0.5, &p);
            assert!((agg - expected).abs() < 1e-12, "{preset:?} {agg}");
            assert!((agg - preset.reported_aggregate()).abs() <= 0.005 + 1e-12);
        }
    }

    #[test]
    fn degenerate_probabilities_constant() {
        let p = BehaviorParams {
            p_t_fgi_e: 0.42,
            p_t_w_h: 0.42,
            p_t_fgi_n: 0.42,
            p_t_w_l: 0.42,
            th_h: 100,
            th_l: 0,
            ..BehaviorParams::default()
        };
        for fgi in 0..=100u8 {
            for w in [WealthState::High, WealthState::Low] {
                let prob = dh_trade_probability(classify_fgi(fgi, &p), w, &p);
                assert!((prob - 0.42).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(BehaviorParams::default().validate().is_ok());
        let bad = BehaviorParams {
            th_l: 80,
            ..BehaviorParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = BehaviorParams {
            p_t_w_l: 1.1,
            ..BehaviorParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rt_no_trade_half_the_time() {
        let mut rng = RandomSource::new(1);
        let a = agent(Strategy::RandomTrader, 100.0, 1.0);
        let p = BehaviorParams::default();
        let n = 100_000;
        let none = (0..n)
            .filter(|_| {
                decide_action(&mut rng, &a, FgiState::Normal, WealthState::Low, &p)
                    == Action::NoTrade
            })
            .count();
        let frac = none as f64 / n as f64;
        assert!((0.49..=0.51).contains(&frac), "{frac}");
    }

    #[test]
    fn dh_buy_fraction_when_trading() {
        let mut rng = RandomSource::new(2);
        let a = agent(Strategy::DiamondHand, 100.0, 1.0);
        let p = BehaviorParams::default().with_preset(Preset::High);
        let mut buys = 0usize;
        let mut trades = 0usize;
        for _ in 0..100_000 {
            match decide_action(&mut rng, &a, FgiState::Extreme, WealthState::High, &p) {
                Action::Buy => {
                    buys += 1;
                    trades += 1
                }
                Action::Sell => trades += 1,
                Action::NoTrade => {}
            }
        }
        let frac = buys as f64 / trades as f64;
        assert!((0.68..=0.72).contains(&frac), "{frac}");
    }

    #[test]
    fn infeasible_sides_suppressed() {
        let mut rng = RandomSource::new(3);
        let p = BehaviorParams::default();
        let broke = agent(Strategy::RandomTrader, 0.0, 0.0);
        let no_tokens = agent(Strategy::RandomTrader, 10.0, 0.0);
        for _ in 0..10_000 {
            assert_eq!(
                decide_action(&mut rng, &broke, FgiState::Normal, WealthState::Low, &p),
                Action::NoTrade
            );
            assert_ne!(
                decide_action(&mut rng, &no_tokens, FgiState::Normal, WealthState::Low, &p),
                Action::Sell
            );
        }
    }

    #[test]
    fn zero_noise_sizes_are_half() {
        assert_eq!(order_size_from_normal(300.0, 0.0), Some(150.0));
        assert_eq!(order_size_from_normal(8.0, 0.0), Some(4.0));
        assert_eq!(order_size_from_normal(10.0, -3.0), None);
        assert_eq!(order_size_from_normal(10.0, 4.0), Some(10.0));
    }

    #[test]
    fn sizes_never_exceed_holdings() {
        let mut rng = RandomSource::new(4);
        let a = agent(Strategy::RandomTrader, 1234.5, 6.75);
        for _ in 0..50_000 {
            if let Some(b) = size_buy(&mut rng, &a) {
                assert!(b > 0.0 && b <= a.fiat);
            }
            if let Some(q) = size_sell(&mut rng, &a) {
                assert!(q > 0.0 && q <= a.tokens);
            }
        }
        assert_eq!(
            size_buy(&mut rng, &agent(Strategy::RandomTrader, 0.0, 1.0)),
            None
        );
        assert_eq!(
            size_sell(&mut rng, &agent(Strategy::RandomTrader, 1.0, 0.0)),
            None
        );
    }
}
