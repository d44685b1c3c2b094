use fairlaunch_core::market::{match_day, settle, Order, Side};
use fairlaunch_core::scenario::{Agent, Strategy as Kind};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Book {
    agents: Vec<Agent>,
    orders: Vec<Order>,
    price: f64,
}

/// Agents with random balances, each placing at most one feasible order, in
/// a shuffled arrival order.
fn book() -> impl Strategy<Value = Book> {
    let agent = (
        0.0f64..1e5,
        0.0f64..50.0,
        any::<bool>(),
        0.01f64..1.0,
        any::<bool>(),
    );
    (
        prop::collection::vec(agent, 1..60),
        0.5f64..5000.0,
        any::<u64>(),
    )
        .prop_map(|(raw, price, salt)| {
            let mut agents = Vec::new();
            let mut orders = Vec::new();
            for (id, (fiat, tokens, buy, frac, active)) in raw.into_iter().enumerate() {
                agents.push(Agent {
                    id,
                    strategy: Kind::RandomTrader,
                    fiat,
                    tokens,
                    entry_day: 45,
                });
                let amount = if buy { fiat * frac } else { tokens * frac };
                if active && amount > 0.0 {
                    orders.push(Order {
                        agent_id: id,
                        side: if buy { Side::Buy } else { Side::Sell },
                        amount,
                        arrival_seq: 0,
                    });
                }
            }
            // Distinct, scrambled sequence numbers.
            for (i, o) in orders.iter_mut().enumerate() {
                o.arrival_seq = (i as u64 ^ salt).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            }
            Book {
                agents,
                orders,
                price,
            }
        })
}

proptest! {
    #[test]
    fn clearing_conserves_tokens_and_fiat(b in book()) {
        let tokens_before: f64 = b.agents.iter().map(|a| a.tokens).sum();
        let fiat_before: f64 = b.agents.iter().map(|a| a.fiat).sum();
        let out = match_day(&b.orders, b.price).unwrap();
        let mut agents = b.agents.clone();
        settle(&mut agents, &out.fills).unwrap();
        let tokens_after: f64 = agents.iter().map(|a| a.tokens).sum();
        let fiat_after: f64 = agents.iter().map(|a| a.fiat).sum();
        prop_assert!((tokens_after - tokens_before).abs() < 1e-9 * tokens_before.max(1.0));
        prop_assert!((fiat_after - fiat_before).abs() < 1e-9 * fiat_before.max(1.0));
        prop_assert!(agents.iter().all(|a| a.tokens >= 0.0 && a.fiat >= 0.0));
    }

    #[test]
    fn fills_priced_at_day_price(b in book()) {
        let out = match_day(&b.orders, b.price).unwrap();
        for f in &out.fills {
            prop_assert_eq!(f.price, b.price);
            prop_assert!(f.tokens > 0.0);
            prop_assert!((f.fiat - f.tokens * b.price).abs() <= 1e-12 * f.fiat.max(1.0));
        }
    }

    #[test]
    fn fifo_priority(b in book()) {
        let out = match_day(&b.orders, b.price).unwrap();
        let seq_of = |id: usize| b.orders.iter().find(|o| o.agent_id == id).unwrap().arrival_seq;
        let buyers: Vec<u64> = out.fills.iter().map(|f| seq_of(f.buyer)).collect();
        let sellers: Vec<u64> = out.fills.iter().map(|f| seq_of(f.seller)).collect();
        prop_assert!(buyers.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(sellers.windows(2).all(|w| w[0] <= w[1]));
        // Leftovers exist on at most one side.
        let buys_left = out.cancelled.iter().any(|o| o.side == Side::Buy);
        let sells_left = out.cancelled.iter().any(|o| o.side == Side::Sell);
        prop_assert!(!(buys_left && sells_left));
    }

    #[test]
    fn filled_plus_cancelled_equals_submitted(b in book()) {
        let out = match_day(&b.orders, b.price).unwrap();
        for o in &b.orders {
            let filled: f64 = out
                .fills
                .iter()
                .filter(|f| match o.side {
                    Side::Buy => f.buyer == o.agent_id,
                    Side::Sell => f.seller == o.agent_id,
                })
                .map(|f| if o.side == Side::Buy { f.fiat } else { f.tokens })
                .sum();
            let left: f64 = out
                .cancelled
                .iter()
                .filter(|c| c.arrival_seq == o.arrival_seq)
                .map(|c| c.amount)
                .sum();
            prop_assert!((filled + left - o.amount).abs() < 1e-6 * o.amount.max(1.0));
        }
    }
}
