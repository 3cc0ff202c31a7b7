use std::collections::BTreeMap;

use super::config::{ArenaConfig, Instrument, MOCK_FIRST};
use crate::oracle::OracleConfig;
use crate::players::{PlayerBinding, PlayerKind};

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 6] = [
    "1v1-random-first",
    "1v1-random-vs-llm",
    "5-seat-fixed-order",
    "vanilla-vs-tutri",
    "ablation-no-history",
    "ablation-no-strategy",
];

fn bind(name: &str, kind: PlayerKind) -> PlayerBinding {
    PlayerBinding { name: name.to_string(), seed: 0, kind }
}

fn tutri(name: &str, history: bool, strategy: bool) -> PlayerBinding {
    bind(
        name,
        PlayerKind::Tutri {
            backend: MOCK_FIRST.to_string(),
            strategies: None,
            history_reflection: history,
            strategy_reflection: strategy,
        },
    )
}

fn vanilla(name: &str) -> PlayerBinding {
    bind(name, PlayerKind::VanillaLlm { backend: MOCK_FIRST.to_string() })
}

fn config(name: &str, decks: u64, p: f64, seats: Vec<PlayerBinding>) -> ArenaConfig {
    ArenaConfig {
        name: Some(name.to_string()),
        decks,
        seed: 0,
        jobs: 0,
        rotate_seats: false,
        instrument: Instrument::default(),
        oracle: OracleConfig { p, ..OracleConfig::default() },
        seats,
        backends: BTreeMap::new(),
    }
}

/// Built-in tournament setups. LLM seats point at the built-in scripted
/// backend; override `backend` in a config file to use a real model.
pub fn preset(name: &str) -> Option<ArenaConfig> {
    let random = || bind("random", PlayerKind::Random);
    Some(match name {
        "1v1-random-first" => config(
            name,
            500,
            0.15,
            vec![random(), bind("oracle_greedy", PlayerKind::OracleGreedy { n_sims: 500 })],
        ),
        "1v1-random-vs-llm" => {
            let mut c = config(name, 500, 0.15, vec![random(), vanilla("llm")]);
            c.instrument = Instrument::Players(vec!["llm".into()]);
            c
        }
        "5-seat-fixed-order" => {
            let mut seats = vec![vanilla("llm"), tutri("tutri", true, true)];
            seats.extend((1..=3).map(|i| bind(&format!("random_{i}"), PlayerKind::Random)));
            config(name, 200, 0.0, seats)
        }
        "vanilla-vs-tutri" => config(name, 200, 0.0, vec![vanilla("vanilla"), tutri("tutri", true, true)]),
        "ablation-no-history" => config(name, 200, 0.15, vec![random(), tutri("tutri_no_history", false, true)]),
        "ablation-no-strategy" => config(name, 200, 0.15, vec![random(), tutri("tutri_no_strategy", true, false)]),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESETS {
            let c = preset(name).unwrap();
            c.validate().unwrap();
            assert_eq!(c.name.as_deref(), Some(name));
        }
        assert!(preset("nope").is_none());
        assert_eq!(preset("5-seat-fixed-order").unwrap().seats.len(), 5);
    }
}
