//! Player abstraction, the public observation, and the non-LLM players.

use serde::{Deserialize, Serialize};

use crate::card::{Card, Color};
use crate::engine::{Decision, Direction, GameState, Phase};
use crate::llm::{Transcript, StageStatus};
use crate::oracle::{evaluate_candidates, OracleConfig};
use crate::rng::{derive_seed, Rng};
use crate::error::OracleError;

/// One entry of the public discard history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discard {
    /// `None` for the initial flip.
    pub seat: Option<usize>,
    pub card: Card,
}

/// Everything the acting seat may legitimately know.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub seat: usize,
    pub seats: usize,
    pub phase: Phase,
    pub turn_index: u32,
    /// Own hand in canonical order.
    pub hand: Vec<Card>,
    pub top_card: Card,
    pub active_color: Color,
    pub direction: Direction,
    pub hand_counts: Vec<usize>,
    pub draw_pile_len: usize,
    /// Discard pile in play order, oldest first.
    pub discard_history: Vec<Discard>,
    /// Seat that played the pending Wild Draw Four, in the challenge phase.
    pub challenge_offender: Option<usize>,
    pub candidates: Vec<Decision>,
}

impl Observation {
    /// Observation of the acting seat. The state must not be terminal.
    pub fn new(state: &GameState) -> Observation {
        let seat = state.current_seat();
        Observation {
            seat,
            seats: state.seats(),
            phase: state.phase(),
            turn_index: state.turn_index(),
            hand: state.hand(seat).cards(),
            top_card: state.top_card(),
            active_color: state.active_color(),
            direction: state.direction(),
            hand_counts: state.hand_sizes(),
            draw_pile_len: state.draw_pile_len(),
            discard_history: state.discard_history().map(|(seat, card)| Discard { seat, card }).collect(),
            challenge_offender: match state.phase() {
                Phase::SelectChallenge => state.challenge().map(|c| c.offender),
                _ => None,
            },
            candidates: state.legal_decisions().unwrap_or_default(),
        }
    }
}

/// What a player returned for one decision point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlayerDecision {
    pub decision: Option<Decision>,
    pub transcript: Option<Transcript>,
    /// Action after each LLM stage (`None` where a stage produced nothing usable).
    pub stage_actions: Vec<Option<Decision>>,
    pub stage_status: Vec<StageStatus>,
    /// The agent fell back to a random legal action.
    pub fallback: bool,
}

impl PlayerDecision {
    pub fn plain(decision: Decision) -> Self {
        PlayerDecision { decision: Some(decision), ..Default::default() }
    }
}

/// A seat's decision maker. Implementations that model LLM players only
/// read the observation.
pub trait Player: Send {
    fn decide(&mut self, state: &GameState, observation: &Observation) -> PlayerDecision;
}

/// Per-seat player configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerBinding {
    /// Identity used in reports.
    pub name: String,
    /// Mixed into the seat's random stream.
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub kind: PlayerKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlayerKind {
    Random,
    /// Omniscient Monte Carlo greedy baseline.
    OracleGreedy {
        #[serde(default = "default_greedy_sims")]
        n_sims: u32,
    },
    VanillaLlm {
        backend: String,
    },
    Tutri {
        backend: String,
        /// Strategy list for the strategy-reflection stage; defaults apply when absent.
        #[serde(default)]
        strategies: Option<Vec<String>>,
        #[serde(default = "yes")]
        history_reflection: bool,
        #[serde(default = "yes")]
        strategy_reflection: bool,
    },
}

fn default_greedy_sims() -> u32 {
    500
}

fn yes() -> bool {
    true
}

impl PlayerKind {
    pub fn label(&self) -> &'static str {
        match self {
            PlayerKind::Random => "random",
            PlayerKind::OracleGreedy { .. } => "oracle_greedy",
            PlayerKind::VanillaLlm { .. } => "vanilla_llm",
            PlayerKind::Tutri { .. } => "tutri",
        }
    }

    pub fn backend(&self) -> Option<&str> {
        match self {
            PlayerKind::VanillaLlm { backend } | PlayerKind::Tutri { backend, .. } => Some(backend),
            _ => None,
        }
    }
}

/// Uniform choice from a non-empty candidate list.
pub fn random_decide(candidates: &[Decision], rng: &mut Rng) -> Decision {
    assert!(!candidates.is_empty(), "no candidates to choose from");
    if candidates.len() == 1 {
        return candidates[0];
    }
    candidates[rng.below(candidates.len())]
}

/// First candidate attaining the best Monte Carlo estimate.
pub fn greedy_decide(state: &GameState, n_sims: u32, seed: u64) -> Result<Decision, OracleError> {
    let candidates = state.legal_decisions()?;
    if candidates.len() == 1 {
        return Ok(candidates[0]);
    }
    let config = OracleConfig { n_sims, p: 0.0, crn: false };
    let eval = evaluate_candidates(state, &config, seed)?;
    Ok(eval.candidates[eval.optimal_set[0]])
}

pub struct RandomPlayer {
    rng: Rng,
}

impl RandomPlayer {
    pub fn new(seed: u64) -> Self {
        RandomPlayer { rng: Rng::new(seed) }
    }
}

impl Player for RandomPlayer {
    fn decide(&mut self, _state: &GameState, observation: &Observation) -> PlayerDecision {
        PlayerDecision::plain(random_decide(&observation.candidates, &mut self.rng))
    }
}

pub struct GreedyPlayer {
    n_sims: u32,
    seed: u64,
}

impl GreedyPlayer {
    pub fn new(n_sims: u32, seed: u64) -> Self {
        GreedyPlayer { n_sims, seed }
    }
}

impl Player for GreedyPlayer {
    fn decide(&mut self, state: &GameState, _observation: &Observation) -> PlayerDecision {
        let seed = derive_seed(self.seed, &[u64::from(state.turn_index())]);
        PlayerDecision { decision: greedy_decide(state, self.n_sims, seed).ok(), ..Default::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card::Color::*;
    use crate::engine::Scenario;

    fn n(c: Color, d: u8) -> Card {
        Card::Number(c, d)
    }

    #[test]
    fn observation_hides_private_information() {
        let build = |opp: Vec<Card>, pile: Vec<Card>| {
            Scenario::new(vec![vec![n(Red, 1), n(Blue, 2)], opp], pile, n(Red, 5), Red).build().unwrap()
        };
        let a = build(vec![n(Green, 7), n(Green, 2), n(Yellow, 9)], vec![n(Yellow, 3)]);
        let b = build(vec![n(Yellow, 9), n(Yellow, 3), n(Green, 7)], vec![n(Green, 2)]);
        assert_ne!(a, b);
        let obs = Observation::new(&a);
        assert_eq!(obs, Observation::new(&b));
        assert_eq!(obs.hand, vec![n(Red, 1), n(Blue, 2)]);
        assert_eq!(obs.hand_counts, vec![2, 3]);
        assert_eq!(obs.draw_pile_len, 1);
    }

    #[test]
    fn random_choices() {
        let mut rng = Rng::new(5);
        assert_eq!(random_decide(&[Decision::DrawCard], &mut rng), Decision::DrawCard);
        let colors = Color::ALL.map(Decision::ChooseColor);
        let a: Vec<Decision> = (0..20).scan(Rng::new(8), |r, _| Some(random_decide(&colors, r))).collect();
        let b: Vec<Decision> = (0..20).scan(Rng::new(8), |r, _| Some(random_decide(&colors, r))).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn color_frequencies_are_uniform() {
        let colors = Color::ALL.map(Decision::ChooseColor);
        let mut rng = Rng::new(2024);
        let mut hist = [0u32; 4];
        for _ in 0..10_000 {
            match random_decide(&colors, &mut rng) {
                Decision::ChooseColor(c) => hist[c.index()] += 1,
                _ => unreachable!(),
            }
        }
        for h in hist {
            assert!((f64::from(h) / 10_000.0 - 0.25).abs() <= 0.02, "{hist:?}");
        }
        let flags = [Decision::Challenge(true), Decision::Challenge(false)];
        let yes = (0..10_000).filter(|_| random_decide(&flags, &mut rng) == Decision::Challenge(true)).count();
        assert!((yes as f64 / 10_000.0 - 0.5).abs() <= 0.02);
    }

    #[test]
    fn greedy_takes_the_winning_play() {
        let s = Scenario::new(
            vec![vec![n(Red, 1), n(Blue, 5)], vec![n(Green, 7), n(Green, 2), n(Yellow, 9)]],
            vec![n(Yellow, 3), n(Yellow, 4)],
            n(Blue, 1),
            Blue,
        )
        .build()
        .unwrap();
        let single = Scenario::new(
            vec![vec![n(Blue, 5)], vec![n(Green, 7)]],
            vec![n(Yellow, 3)],
            n(Blue, 1),
            Blue,
        )
        .build()
        .unwrap();
        assert_eq!(greedy_decide(&single, 50, 1).unwrap(), Decision::PlayCard(n(Blue, 5)));
        let d = greedy_decide(&s, 200, 3).unwrap();
        assert!(s.legal_decisions().unwrap().contains(&d));
    }

    #[test]
    fn binding_config_shapes() {
        let b: PlayerBinding = toml::from_str("name = \"g\"\nkind = \"oracle_greedy\"\n").unwrap();
        assert_eq!(b.kind, PlayerKind::OracleGreedy { n_sims: 500 });
        let t: PlayerBinding = toml::from_str("name = \"t\"\nkind = \"tutri\"\nbackend = \"m\"\nhistory_reflection = false\n").unwrap();
        assert!(matches!(t.kind, PlayerKind::Tutri { history_reflection: false, strategy_reflection: true, .. }));
    }
}
