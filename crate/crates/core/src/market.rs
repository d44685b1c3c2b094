//! Daily clearing: buys and sells queue in arrival order, match FIFO at the
//! exogenous day price, and whatever is left at the end of the day is
//! cancelled.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{Agent, AgentId};

/// Buy budgets below this many dollars are treated as exhausted.
pub const FIAT_DUST: f64 = 1e-9;

/// Relative slack allowed when a fill is checked against holdings.
const SETTLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("day price must be positive, got {0}")]
    InvalidPrice(f64),
    #[error("order {arrival_seq} has non-positive amount {amount}")]
    InvalidOrder { arrival_seq: u64, amount: f64 },
    #[error("fill references unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("agent {agent} cannot cover fill: holds {held} {unit}, needs {needed}")]
    Overdrawn {
        agent: AgentId,
        held: f64,
        needed: f64,
        unit: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Buy,
    Sell,
}

/// A buy carries a fiat budget, a sell a token quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub agent_id: AgentId,
    pub side: Side,
    pub amount: f64,
    pub arrival_seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fill {
    pub buyer: AgentId,
    pub seller: AgentId,
    pub tokens: f64,
    pub fiat: f64,
    pub price: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchOutcome {
    pub fills: Vec<Fill>,
    /// Unfilled remainders, with `amount` reduced to what was left.
    pub cancelled: Vec<Order>,
}

/// Matches one day's orders. Each side is processed in `arrival_seq` order;
/// partially filled orders stay at the head of their queue.
pub fn match_day(orders: &[Order], price: f64) -> Result<MatchOutcome, MarketError> {
    if !(price > 0.0 && price.is_finite()) {
        return Err(MarketError::InvalidPrice(price));
    }
    let mut buys: Vec<Order> = Vec::new();
    let mut sells: Vec<Order> = Vec::new();
    for o in orders {
        if !(o.amount > 0.0 && o.amount.is_finite()) {
            return Err(MarketError::InvalidOrder {
                arrival_seq: o.arrival_seq,
                amount: o.amount,
            });
        }
        match o.side {
            Side::Buy => buys.push(*o),
            Side::Sell => sells.push(*o),
        }
    }
    buys.sort_by_key(|o| o.arrival_seq);
    sells.sort_by_key(|o| o.arrival_seq);
    let mut buys = VecDeque::from(buys);
    let mut sells = VecDeque::from(sells);

    let mut fills = Vec::new();
    while let (Some(buy), Some(sell)) = (buys.front_mut(), sells.front_mut()) {
        let wanted = buy.amount / price;
        let (tokens, buy_done, sell_done) = if wanted < sell.amount {
            (wanted, true, false)
        } else {
            let left = buy.amount - sell.amount * price;
            (sell.amount, left < FIAT_DUST, true)
        };
        let fiat = tokens * price;
        fills.push(Fill {
            buyer: buy.agent_id,
            seller: sell.agent_id,
            tokens,
            fiat,
            price,
        });
        buy.amount -= fiat;
        sell.amount -= tokens;
        if buy_done {
            buys.pop_front();
        }
        if sell_done {
            sells.pop_front();
        }
    }

    let mut cancelled: Vec<Order> = buys.into_iter().chain(sells).collect();
    cancelled.sort_by_key(|o| o.arrival_seq);
    Ok(MatchOutcome { fills, cancelled })
}

/// Applies fills in order. `agents[id]` must hold the agent with that id.
pub fn settle(agents: &mut [Agent], fills: &[Fill]) -> Result<(), MarketError> {
    for f in fills {
        if f.buyer >= agents.len() || agents[f.buyer].id != f.buyer {
            return Err(MarketError::UnknownAgent(f.buyer));
        }
        if f.seller >= agents.len() || agents[f.seller].id != f.seller {
            return Err(MarketError::UnknownAgent(f.seller));
        }
        let buyer = agents[f.buyer];
        if buyer.fiat < f.fiat * (1.0 - SETTLE_TOLERANCE) - FIAT_DUST {
            return Err(MarketError::Overdrawn {
                agent: f.buyer,
                held: buyer.fiat,
                needed: f.fiat,
                unit: "fiat",
            });
        }
        let seller = agents[f.seller];
        if seller.tokens < f.tokens * (1.0 - SETTLE_TOLERANCE) {
            return Err(MarketError::Overdrawn {
                agent: f.seller,
                held: seller.tokens,
                needed: f.tokens,
                unit: "tokens",
            });
        }
        let b = &mut agents[f.buyer];
        b.fiat = (b.fiat - f.fiat).max(0.0);
        b.tokens += f.tokens;
        let s = &mut agents[f.seller];
        s.tokens -= f.tokens;
        s.fiat += f.fiat;
        if s.tokens < 0.0 {
            // Sub-ulp overshoot; move the sliver back to the buyer so the
            // supply stays exact.
            agents[f.buyer].tokens += agents[f.seller].tokens;
            agents[f.seller].tokens = 0.0;
        }
    }
    Ok(())
}
