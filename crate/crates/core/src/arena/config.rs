use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{MAX_SEATS, MIN_SEATS};
use crate::error::ArenaError;
use crate::llm::BackendSpec;
use crate::oracle::OracleConfig;
use crate::players::{PlayerBinding, PlayerKind};

/// Built-in scripted backend that always answers with the first listed move.
pub const MOCK_FIRST: &str = "mock-first";

/// Which seats get oracle scoring at their decision points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Instrument {
    /// `"all"` or `"none"`.
    Keyword(String),
    /// Player names to instrument.
    Players(Vec<String>),
}

impl Default for Instrument {
    fn default() -> Self {
        Instrument::Keyword("all".into())
    }
}

impl Instrument {
    pub fn none() -> Self {
        Instrument::Keyword("none".into())
    }

    pub fn covers(&self, player: &str) -> bool {
        match self {
            Instrument::Keyword(k) => k == "all",
            Instrument::Players(names) => names.iter().any(|n| n == player),
        }
    }
}

/// A tournament definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub decks: u64,
    pub seed: u64,
    /// Worker threads; 0 uses rayon's default.
    #[serde(default)]
    pub jobs: usize,
    /// Play every deck once per rotation of the seating order.
    #[serde(default)]
    pub rotate_seats: bool,
    #[serde(default)]
    pub instrument: Instrument,
    #[serde(default)]
    pub oracle: OracleConfig,
    pub seats: Vec<PlayerBinding>,
    #[serde(default)]
    pub backends: BTreeMap<String, BackendSpec>,
}

impl ArenaConfig {
    /// Parse a TOML config. Script files are resolved relative to `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<ArenaConfig, ArenaError> {
        let mut config: ArenaConfig = toml::from_str(text)?;
        let backends = std::mem::take(&mut config.backends);
        for (name, spec) in backends {
            config.backends.insert(name, spec.resolve(base_dir)?);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<ArenaConfig, ArenaError> {
        let text = std::fs::read_to_string(path)?;
        ArenaConfig::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ArenaError> {
        let bad = |m: String| Err(ArenaError::Config(m));
        if !(MIN_SEATS..=MAX_SEATS).contains(&self.seats.len()) {
            return bad(format!("{} seats configured, need {MIN_SEATS} to {MAX_SEATS}", self.seats.len()));
        }
        if self.decks == 0 {
            return bad("decks must be at least 1".into());
        }
        self.oracle.validate()?;
        if let Instrument::Keyword(k) = &self.instrument {
            if k != "all" && k != "none" {
                return bad(format!("instrument must be \"all\", \"none\" or a list of player names, got {k:?}"));
            }
        }
        if let Instrument::Players(names) = &self.instrument {
            if let Some(n) = names.iter().find(|n| !self.seats.iter().any(|s| &s.name == *n)) {
                return bad(format!("instrumented player {n:?} is not seated"));
            }
        }
        for seat in &self.seats {
            if seat.name.is_empty() || seat.name.contains([',', '\n', '"']) {
                return bad(format!("player name {:?} must be non-empty without commas, quotes or newlines", seat.name));
            }
            if let PlayerKind::OracleGreedy { n_sims: 0 } = seat.kind {
                return bad(format!("player {} needs n_sims >= 1", seat.name));
            }
            if let Some(b) = seat.kind.backend() {
                if b != MOCK_FIRST && !self.backends.contains_key(b) {
                    return bad(format!("player {} uses undefined backend {b:?}", seat.name));
                }
            }
        }
        let mut names: Vec<(&str, &PlayerBinding)> = Vec::new();
        for seat in &self.seats {
            match names.iter().find(|(n, _)| *n == seat.name) {
                Some((_, other)) if *other != seat => {
                    return bad(format!("player name {:?} is bound to two different players", seat.name));
                }
                Some(_) => {}
                None => names.push((&seat.name, seat)),
            }
        }
        Ok(())
    }

    /// Backend spec by name, including the built-in mock.
    pub fn backend(&self, name: &str) -> Option<BackendSpec> {
        self.backends.get(name).cloned().or_else(|| (name == MOCK_FIRST).then(mock_first))
    }

    /// Number of games: decks times rotations.
    pub fn games(&self) -> u64 {
        self.decks * self.rotations() as u64
    }

    pub fn rotations(&self) -> usize {
        if self.rotate_seats {
            self.seats.len()
        } else {
            1
        }
    }

    /// Seating for a rotation: seat `s` holds binding `(s + r) % n`.
    pub fn seating(&self, rotation: usize) -> Vec<&PlayerBinding> {
        let n = self.seats.len();
        (0..n).map(|s| &self.seats[(s + rotation) % n]).collect()
    }
}

pub fn mock_first() -> BackendSpec {
    BackendSpec::Scripted {
        path: None,
        rules: Vec::new(),
        default: Some(r#"{"action": 0, "reasoning": "first listed move"}"#.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = r#"
decks = 10
seed = 7
instrument = ["t"]

[oracle]
n_sims = 200
p = 0.1

[[seats]]
name = "r"
kind = "random"

[[seats]]
name = "t"
kind = "tutri"
backend = "script"

[backends.script]
type = "scripted"
default = '{"action": 0}'
"#;

    #[test]
    fn parses_and_validates() {
        let c = ArenaConfig::from_toml(CONFIG, Path::new(".")).unwrap();
        assert_eq!(c.oracle.n_sims, 200);
        assert!(c.instrument.covers("t") && !c.instrument.covers("r"));
        assert_eq!(c.games(), 10);
        let again = ArenaConfig::from_toml(&c.to_toml(), Path::new(".")).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            CONFIG.replace("backend = \"script\"", "backend = \"nope\""),
            CONFIG.replace("decks = 10", "decks = 0"),
            CONFIG.replace("p = 0.1", "p = 1.5"),
            CONFIG.replace("instrument = [\"t\"]", "instrument = \"some\""),
            CONFIG.replace("name = \"t\"", "name = \"r\""),
            CONFIG.replace("seed = 7", "seed = 7\nextra = 1"),
        ];
        for text in bad {
            assert!(ArenaConfig::from_toml(&text, Path::new(".")).is_err(), "{text}");
        }
    }

    #[test]
    fn rotation_seating() {
        let mut c = ArenaConfig::from_toml(CONFIG, Path::new(".")).unwrap();
        c.rotate_seats = true;
        assert_eq!(c.games(), 20);
        assert_eq!(c.seating(1)[0].name, "t");
        assert_eq!(c.backend(MOCK_FIRST), Some(mock_first()));
    }
}
