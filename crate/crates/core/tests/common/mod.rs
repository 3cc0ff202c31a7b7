#![allow(dead_code)]

use uno_arena::engine::Scenario;
use uno_arena::rng::Rng;
use uno_arena::{new_deck, Card, GameState};

/// Exact win probability of `seat` under uniformly random play, by full
/// enumeration of the game tree.
pub fn exact(state: &GameState, seat: usize) -> f64 {
    if state.is_terminal() {
        return if state.winners().unwrap().contains(seat) { 1.0 } else { 0.0 };
    }
    let cands = state.legal_decisions().unwrap();
    cands.iter().map(|&d| exact(&state.apply(d).unwrap(), seat)).sum::<f64>() / cands.len() as f64
}

/// A two- or three-seat endgame with at most three cards per hand and a
/// draw pile of one to three cards, small enough to enumerate.
pub fn tiny_state(seed: u64) -> GameState {
    let mut rng = Rng::new(seed);
    let mut deck = new_deck();
    rng.shuffle(&mut deck);
    let seats = 2 + rng.below(2);
    let top_at = deck.iter().position(|c| c.is_number()).unwrap();
    let top = deck.remove(top_at);
    let mut take = |n: usize| -> Vec<Card> { deck.drain(..n).collect() };
    let hands: Vec<Vec<Card>> = (0..seats).map(|_| take(1 + rng.below(3))).collect();
    let pile = take(1 + rng.below(3));
    Scenario::new(hands, pile, top, top.color().unwrap()).build().unwrap()
}
