//! Game rules as pure state transitions.
//!
//! A [`GameState`] is the full omniscient position. [`GameState::legal_decisions`]
//! enumerates candidates and [`GameState::apply`] is the transfer function.
//! House rules in force:
//!
//! * a drawn card is never played in the same turn; drawing ends the turn,
//! * drawing is only offered when nothing in hand is playable,
//! * Reverse behaves like Skip with two seats,
//! * no UNO call, no Draw Two stacking, no discard reshuffle: once the draw
//!   pile runs out (including in the middle of a penalty) the game is over and
//!   the smallest hands win.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::card::{face_counts, new_deck, Card, Color, Function, DECK_SIZE, FACE_COUNT};
use crate::error::EngineError;

pub const MIN_SEATS: usize = 2;
pub const MAX_SEATS: usize = 10;
pub const HAND_SIZE: usize = 7;

const NO_SEAT: u8 = u8::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Clockwise,
    Counterclockwise,
}

impl Direction {
    fn flipped(self) -> Direction {
        match self {
            Direction::Clockwise => Direction::Counterclockwise,
            Direction::Counterclockwise => Direction::Clockwise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    SelectCard,
    SelectColor,
    SelectChallenge,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::SelectCard => "select_card",
            Phase::SelectColor => "select_color",
            Phase::SelectChallenge => "select_challenge",
        }
    }
}

/// Pending Wild Draw Four adjudication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChallengeContext {
    /// Seat that played the Wild Draw Four.
    pub offender: usize,
    /// Whether the play was illegal, judged against the hand at play time.
    pub illegal: bool,
}

/// A legal action at a decision point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    PlayCard(Card),
    DrawCard,
    ChooseColor(Color),
    Challenge(bool),
}

impl Decision {
    /// Canonical token, used in logs and accepted from agents.
    pub fn token(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::PlayCard(c) => write!(f, "{c}"),
            Decision::DrawCard => f.write_str("draw"),
            Decision::ChooseColor(c) => write!(f, "{c}"),
            Decision::Challenge(true) => f.write_str("challenge"),
            Decision::Challenge(false) => f.write_str("no_challenge"),
        }
    }
}

impl std::str::FromStr for Decision {
    type Err = crate::error::ParseCardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "draw" => return Ok(Decision::DrawCard),
            "challenge" => return Ok(Decision::Challenge(true)),
            "no_challenge" => return Ok(Decision::Challenge(false)),
            _ => {}
        }
        if t.len() > 1 {
            if let Ok(color) = t.parse::<Color>() {
                return Ok(Decision::ChooseColor(color));
            }
        }
        t.parse::<Card>().map(Decision::PlayCard)
    }
}

impl Serialize for Decision {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decision {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Seats that won a finished game, as a bit set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct WinnerSet(u16);

impl WinnerSet {
    pub fn from_seats(seats: impl IntoIterator<Item = usize>) -> Self {
        WinnerSet(seats.into_iter().fold(0, |m, s| m | (1 << s)))
    }

    pub fn contains(self, seat: usize) -> bool {
        seat < 16 && self.0 & (1 << seat) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn seats(self) -> impl Iterator<Item = usize> {
        (0..16).filter(move |&s| self.contains(s))
    }
}

impl Serialize for WinnerSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.seats())
    }
}

impl<'de> Deserialize<'de> for WinnerSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let seats = Vec::<usize>::deserialize(deserializer)?;
        if let Some(bad) = seats.iter().find(|&&s| s >= MAX_SEATS) {
            return Err(serde::de::Error::custom(format!("winner seat {bad} out of range")));
        }
        Ok(WinnerSet::from_seats(seats))
    }
}

/// A hand as a multiset of card faces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hand {
    counts: [u8; FACE_COUNT],
    len: u8,
}

impl Default for Hand {
    fn default() -> Self {
        Hand { counts: [0; FACE_COUNT], len: 0 }
    }
}

impl Hand {
    pub fn from_cards(cards: &[Card]) -> Self {
        let mut hand = Hand::default();
        for &c in cards {
            hand.insert(c);
        }
        hand
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count(&self, card: Card) -> usize {
        self.counts[card.index()] as usize
    }

    pub fn contains(&self, card: Card) -> bool {
        self.counts[card.index()] > 0
    }

    pub fn insert(&mut self, card: Card) {
        self.counts[card.index()] += 1;
        self.len += 1;
    }

    pub fn remove(&mut self, card: Card) -> bool {
        let slot = &mut self.counts[card.index()];
        if *slot == 0 {
            return false;
        }
        *slot -= 1;
        self.len -= 1;
        true
    }

    /// Distinct faces held, in canonical order.
    pub fn faces(&self) -> impl Iterator<Item = Card> + '_ {
        self.counts.iter().enumerate().filter(|(_, &n)| n > 0).map(|(i, _)| Card::from_index(i))
    }

    /// Every card held, in canonical order.
    pub fn cards(&self) -> Vec<Card> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(Card::from_index(i), n as usize))
            .collect()
    }

    pub fn face_counts(&self) -> &[u8; FACE_COUNT] {
        &self.counts
    }
}

/// Side effects of a transition that logs care about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Effects {
    /// Forced draw: `(seat, cards owed, cards actually drawn)`.
    pub penalty: Option<(usize, usize, usize)>,
    pub challenge: Option<ChallengeResolution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengeResolution {
    pub challenger: usize,
    pub offender: usize,
    pub challenged: bool,
    pub illegal: bool,
    /// Seat that draws the penalty.
    pub penalized: usize,
    pub penalty: usize,
}

/// Full game position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    /// Last element is the next card drawn.
    draw_pile: Vec<Card>,
    /// Last element is the top card.
    discard_pile: Vec<Card>,
    /// Seat that played each discard; `NO_SEAT` for cards that were never played.
    discard_by: Vec<u8>,
    hands: Vec<Hand>,
    current_seat: usize,
    direction: Direction,
    active_color: Color,
    phase: Phase,
    challenge: Option<ChallengeContext>,
    turn_index: u32,
}

/// Reject anything that is not a permutation of the canonical deck.
pub fn validate_deck(deck: &[Card]) -> Result<(), EngineError> {
    if deck.len() != DECK_SIZE {
        return Err(EngineError::InvalidDeck(format!("expected {DECK_SIZE} cards, got {}", deck.len())));
    }
    if face_counts(deck) != face_counts(&new_deck()) {
        return Err(EngineError::InvalidDeck("card multiset differs from the canonical deck".into()));
    }
    Ok(())
}

/// Shuffle a full deck with the documented deterministic generator.
pub fn shuffle_deck(deck: &[Card], seed: u64) -> Result<Vec<Card>, EngineError> {
    if deck.len() != DECK_SIZE {
        return Err(EngineError::InvalidDeck(format!("expected {DECK_SIZE} cards, got {}", deck.len())));
    }
    let mut out = deck.to_vec();
    crate::rng::Rng::new(seed).shuffle(&mut out);
    Ok(out)
}

/// True iff a Wild Draw Four play is illegal: the hand left after removing it
/// still holds a non-wild card of the color that was active before the play.
pub fn wd4_was_illegal(remaining: &Hand, active_before: Color) -> bool {
    remaining.faces().any(|c| c.color() == Some(active_before))
}

impl GameState {
    /// Deal seven cards to each seat round-robin from the front of `deck`,
    /// then flip until a number card turns up. Flipped non-number cards go to
    /// the bottom of the draw pile in the order they were flipped.
    pub fn setup(deck: &[Card], seats: usize) -> Result<GameState, EngineError> {
        if !(MIN_SEATS..=MAX_SEATS).contains(&seats) {
            return Err(EngineError::InvalidSeatCount(seats));
        }
        validate_deck(deck)?;
        let mut hands = vec![Hand::default(); seats];
        let mut cursor = deck.iter().copied();
        for _ in 0..HAND_SIZE {
            for hand in hands.iter_mut() {
                hand.insert(cursor.next().expect("deck holds enough cards"));
            }
        }
        let mut draw_pile: Vec<Card> = cursor.collect();
        draw_pile.reverse();
        let top = loop {
            let card = draw_pile.pop().expect("a number card is always found");
            if card.is_number() {
                break card;
            }
            draw_pile.insert(0, card);
        };
        Ok(GameState {
            draw_pile,
            discard_pile: vec![top],
            discard_by: vec![NO_SEAT],
            hands,
            current_seat: 0,
            direction: Direction::Clockwise,
            active_color: top.color().expect("number cards have a color"),
            phase: Phase::SelectCard,
            challenge: None,
            turn_index: 0,
        })
    }

    pub fn seats(&self) -> usize {
        self.hands.len()
    }

    pub fn current_seat(&self) -> usize {
        self.current_seat
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn active_color(&self) -> Color {
        self.active_color
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn challenge(&self) -> Option<ChallengeContext> {
        self.challenge
    }

    pub fn turn_index(&self) -> u32 {
        self.turn_index
    }

    pub fn top_card(&self) -> Card {
        *self.discard_pile.last().expect("discard pile is never empty")
    }

    pub fn hand(&self, seat: usize) -> &Hand {
        &self.hands[seat]
    }

    pub fn hand_sizes(&self) -> Vec<usize> {
        self.hands.iter().map(Hand::len).collect()
    }

    pub fn draw_pile_len(&self) -> usize {
        self.draw_pile.len()
    }

    /// Draw pile from the next card drawn to the bottom.
    pub fn draw_pile(&self) -> impl Iterator<Item = Card> + '_ {
        self.draw_pile.iter().rev().copied()
    }

    /// Discard pile from bottom to top.
    pub fn discard_pile(&self) -> &[Card] {
        &self.discard_pile
    }

    /// Discards in play order with the seat that played each one
    /// (`None` for the initial flip and other cards never played).
    pub fn discard_history(&self) -> impl Iterator<Item = (Option<usize>, Card)> + '_ {
        self.discard_by
            .iter()
            .zip(&self.discard_pile)
            .map(|(&by, &c)| ((by != NO_SEAT).then_some(by as usize), c))
    }

    /// Seat `steps` places after `seat` in the current direction.
    pub fn seat_after(&self, seat: usize, steps: usize) -> usize {
        let n = self.seats();
        match self.direction {
            Direction::Clockwise => (seat + steps) % n,
            Direction::Counterclockwise => (seat + n * steps - steps) % n,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.draw_pile.is_empty() || self.hands.iter().any(Hand::is_empty)
    }

    /// Seats with the fewest cards. Only meaningful once the game is over.
    pub fn winners(&self) -> Result<WinnerSet, EngineError> {
        if !self.is_terminal() {
            return Err(EngineError::NotTerminal);
        }
        Ok(self.winners_unchecked())
    }

    pub(crate) fn winners_unchecked(&self) -> WinnerSet {
        let min = self.hands.iter().map(Hand::len).min().unwrap_or(0);
        WinnerSet::from_seats((0..self.seats()).filter(|&s| self.hands[s].len() == min))
    }

    /// Candidates at this point in canonical order.
    pub fn legal_decisions(&self) -> Result<Vec<Decision>, EngineError> {
        if self.is_terminal() {
            return Err(EngineError::Terminal);
        }
        let mut out = Vec::with_capacity(8);
        self.legal_decisions_into(&mut out);
        Ok(out)
    }

    /// Allocation-free variant for hot loops; `out` is cleared first.
    /// The caller guarantees the state is not terminal.
    pub fn legal_decisions_into(&self, out: &mut Vec<Decision>) {
        out.clear();
        match self.phase {
            Phase::SelectCard => {
                let top = self.top_card();
                let active = self.active_color;
                out.extend(
                    self.hands[self.current_seat]
                        .faces()
                        .filter(|c| c.matches(top, active))
                        .map(Decision::PlayCard),
                );
                if out.is_empty() {
                    out.push(Decision::DrawCard);
                }
            }
            Phase::SelectColor => out.extend(Color::ALL.map(Decision::ChooseColor)),
            Phase::SelectChallenge => out.extend([Decision::Challenge(true), Decision::Challenge(false)]),
        }
    }

    /// Transfer function: the successor of `self` under `decision`.
    pub fn apply(&self, decision: Decision) -> Result<GameState, EngineError> {
        let mut next = self.clone();
        next.apply_in_place(decision)?;
        Ok(next)
    }

    /// In-place transition reporting penalty and challenge effects.
    pub fn apply_in_place(&mut self, decision: Decision) -> Result<Effects, EngineError> {
        if self.is_terminal() {
            return Err(EngineError::Terminal);
        }
        let phase = self.phase.name();
        let illegal = |reason: &str| EngineError::IllegalDecision {
            decision: decision.to_string(),
            phase,
            reason: reason.to_string(),
        };
        let seat = self.current_seat;
        let mut effects = Effects::default();
        match (self.phase, decision) {
            (Phase::SelectCard, Decision::PlayCard(card)) => {
                if !self.hands[seat].contains(card) {
                    return Err(illegal("card not in hand"));
                }
                if !card.matches(self.top_card(), self.active_color) {
                    return Err(illegal("card does not match the top card or active color"));
                }
                self.play(seat, card, &mut effects);
            }
            (Phase::SelectCard, Decision::DrawCard) => {
                let top = self.top_card();
                if self.hands[seat].faces().any(|c| c.matches(top, self.active_color)) {
                    return Err(illegal("drawing is only allowed without a playable card"));
                }
                self.draw(seat, 1);
                self.current_seat = self.seat_after(seat, 1);
            }
            (Phase::SelectColor, Decision::ChooseColor(color)) => {
                self.active_color = color;
                self.current_seat = self.seat_after(seat, 1);
                self.phase = if self.challenge.is_some() { Phase::SelectChallenge } else { Phase::SelectCard };
            }
            (Phase::SelectChallenge, Decision::Challenge(challenged)) => {
                let ctx = self.challenge.take().expect("challenge phase carries a context");
                let (penalized, penalty) = match (challenged, ctx.illegal) {
                    (true, true) => (ctx.offender, 4),
                    (true, false) => (seat, 6),
                    (false, _) => (seat, 4),
                };
                let drawn = self.draw(penalized, penalty);
                effects.penalty = Some((penalized, penalty, drawn));
                effects.challenge = Some(ChallengeResolution {
                    challenger: seat,
                    offender: ctx.offender,
                    challenged,
                    illegal: ctx.illegal,
                    penalized,
                    penalty,
                });
                // The challenger keeps the turn only when the challenge succeeds.
                if penalized == seat {
                    self.current_seat = self.seat_after(seat, 1);
                }
                self.phase = Phase::SelectCard;
            }
            _ => return Err(illegal("decision kind not valid in this phase")),
        }
        self.turn_index += 1;
        Ok(effects)
    }

    fn play(&mut self, seat: usize, card: Card, effects: &mut Effects) {
        let active_before = self.active_color;
        self.hands[seat].remove(card);
        self.discard_pile.push(card);
        self.discard_by.push(seat as u8);
        if self.hands[seat].is_empty() {
            // Emptying the hand ends the game before any card effect.
            if let Some(color) = card.color() {
                self.active_color = color;
            }
            return;
        }
        match card {
            Card::Number(color, _) => {
                self.active_color = color;
                self.current_seat = self.seat_after(seat, 1);
            }
            Card::Function(color, Function::Skip) => {
                self.active_color = color;
                self.current_seat = self.seat_after(seat, 2);
            }
            Card::Function(color, Function::Reverse) => {
                self.active_color = color;
                if self.seats() == 2 {
                    self.current_seat = seat;
                } else {
                    self.direction = self.direction.flipped();
                    self.current_seat = self.seat_after(seat, 1);
                }
            }
            Card::Function(color, Function::DrawTwo) => {
                self.active_color = color;
                let victim = self.seat_after(seat, 1);
                let drawn = self.draw(victim, 2);
                effects.penalty = Some((victim, 2, drawn));
                self.current_seat = self.seat_after(seat, 2);
            }
            Card::Wild => self.phase = Phase::SelectColor,
            Card::WildDrawFour => {
                self.challenge = Some(ChallengeContext {
                    offender: seat,
                    illegal: wd4_was_illegal(&self.hands[seat], active_before),
                });
                self.phase = Phase::SelectColor;
            }
        }
    }

    /// Draw up to `n` cards; returns how many were actually drawn.
    fn draw(&mut self, seat: usize, n: usize) -> usize {
        let take = n.min(self.draw_pile.len());
        for _ in 0..take {
            let card = self.draw_pile.pop().expect("bounded by pile length");
            self.hands[seat].insert(card);
        }
        take
    }

    /// Hex digest of the complete state, used to audit replays.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update([self.seats() as u8, self.current_seat as u8, self.direction as u8, self.active_color as u8, self.phase as u8]);
        match self.challenge {
            Some(c) => h.update([1, c.offender as u8, c.illegal as u8]),
            None => h.update([0]),
        }
        h.update(self.turn_index.to_le_bytes());
        h.update((self.draw_pile.len() as u32).to_le_bytes());
        h.update(self.draw_pile.iter().map(|c| c.index() as u8).collect::<Vec<_>>());
        h.update((self.discard_pile.len() as u32).to_le_bytes());
        h.update(self.discard_pile.iter().map(|c| c.index() as u8).collect::<Vec<_>>());
        h.update(&self.discard_by);
        for hand in &self.hands {
            h.update(hand.counts);
        }
        hex::encode(&h.finalize()[..12])
    }

    /// Per-face counts over every pile and hand; equals the deck's counts in
    /// every reachable state.
    pub fn face_census(&self) -> [u32; FACE_COUNT] {
        let mut total = [0u32; FACE_COUNT];
        for c in self.draw_pile.iter().chain(&self.discard_pile) {
            total[c.index()] += 1;
        }
        for hand in &self.hands {
            for (t, &n) in total.iter_mut().zip(hand.counts.iter()) {
                *t += u32::from(n);
            }
        }
        total
    }

    pub fn conserves_deck(&self) -> bool {
        let deck = face_counts(&new_deck());
        self.face_census().iter().zip(deck.iter()).all(|(&a, &b)| a == u32::from(b))
    }
}

/// Hand-built position for tests, demos and analysis.
///
/// Cards not mentioned anywhere are placed in the discard pile beneath the top
/// card (in canonical order) so the full-deck conservation invariant holds.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub hands: Vec<Vec<Card>>,
    /// In draw order: the first card is drawn next.
    pub draw_pile: Vec<Card>,
    pub top: Card,
    pub active_color: Color,
    pub current_seat: usize,
    pub direction: Direction,
    pub phase: Phase,
    pub challenge: Option<ChallengeContext>,
}

impl Scenario {
    pub fn new(hands: Vec<Vec<Card>>, draw_pile: Vec<Card>, top: Card, active_color: Color) -> Self {
        Scenario {
            hands,
            draw_pile,
            top,
            active_color,
            current_seat: 0,
            direction: Direction::Clockwise,
            phase: Phase::SelectCard,
            challenge: None,
        }
    }

    pub fn seat(mut self, seat: usize) -> Self {
        self.current_seat = seat;
        self
    }

    pub fn direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn build(self) -> Result<GameState, EngineError> {
        let bad = |m: String| EngineError::InvalidScenario(m);
        let seats = self.hands.len();
        if !(MIN_SEATS..=MAX_SEATS).contains(&seats) {
            return Err(EngineError::InvalidSeatCount(seats));
        }
        if self.current_seat >= seats {
            return Err(bad(format!("current seat {} out of range", self.current_seat)));
        }
        match self.phase {
            Phase::SelectCard if self.challenge.is_some() => {
                return Err(bad("challenge context outside the color/challenge phases".into()))
            }
            Phase::SelectColor if !self.top.is_wild() => return Err(bad("color phase needs a wild on top".into())),
            Phase::SelectColor if self.challenge.is_some() != (self.top == Card::WildDrawFour) => {
                return Err(bad("challenge context must accompany a Wild Draw Four".into()))
            }
            Phase::SelectChallenge if self.top != Card::WildDrawFour || self.challenge.is_none() => {
                return Err(bad("challenge phase needs a Wild Draw Four on top and a context".into()))
            }
            _ => {}
        }
        if let Some(ctx) = self.challenge {
            if ctx.offender >= seats {
                return Err(bad(format!("offender seat {} out of range", ctx.offender)));
            }
        }
        let mut remaining = face_counts(&new_deck());
        let mut take = |c: Card| -> Result<(), EngineError> {
            let slot = &mut remaining[c.index()];
            if *slot == 0 {
                return Err(EngineError::InvalidScenario(format!("more copies of {c} than the deck holds")));
            }
            *slot -= 1;
            Ok(())
        };
        for c in self.hands.iter().flatten().chain(&self.draw_pile).chain([&self.top]) {
            take(*c)?;
        }
        let mut discard_pile: Vec<Card> = remaining
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(Card::from_index(i), n as usize))
            .collect();
        discard_pile.push(self.top);
        let mut draw_pile = self.draw_pile;
        draw_pile.reverse();
        Ok(GameState {
            discard_by: vec![NO_SEAT; discard_pile.len()],
            discard_pile,
            draw_pile,
            hands: self.hands.iter().map(|h| Hand::from_cards(h)).collect(),
            current_seat: self.current_seat,
            direction: self.direction,
            active_color: self.active_color,
            phase: self.phase,
            challenge: self.challenge,
            turn_index: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card::Function::*;
    use crate::card::{Color::*, Function};

    fn n(color: Color, d: u8) -> Card {
        Card::Number(color, d)
    }
    fn f(color: Color, func: Function) -> Card {
        Card::Function(color, func)
    }

    /// Canonical deck rearranged so `front` comes first.
    fn deck_with_front(front: &[Card]) -> Vec<Card> {
        let mut rest = new_deck();
        for c in front {
            let pos = rest.iter().position(|x| x == c).unwrap();
            rest.remove(pos);
        }
        let mut deck = front.to_vec();
        deck.extend(rest);
        deck
    }

    #[test]
    fn setup_flips_first_number_card() {
        let mut front: Vec<Card> = new_deck().into_iter().filter(|c| *c != n(Blue, 7)).take(14).collect();
        front.push(n(Blue, 7));
        let state = GameState::setup(&deck_with_front(&front), 2).unwrap();
        assert_eq!(state.top_card(), n(Blue, 7));
        assert_eq!(state.active_color(), Blue);
        assert_eq!(state.hand_sizes(), vec![7, 7]);
        // round-robin: seat 0 gets cards 1, 3, 5, ...
        assert!(state.hand(0).contains(front[0]));
        assert!(state.hand(1).contains(front[1]));
        assert!(state.conserves_deck());
    }

    #[test]
    fn setup_sends_non_number_flips_to_bottom() {
        let mut front: Vec<Card> = new_deck().into_iter().filter(|c| c.is_number() && *c != n(Green, 2)).take(14).collect();
        front.push(Card::Wild);
        front.push(f(Red, Skip));
        front.push(n(Green, 2));
        let deck = deck_with_front(&front);
        let state = GameState::setup(&deck, 2).unwrap();
        assert_eq!(state.top_card(), n(Green, 2));
        let pile: Vec<Card> = state.draw_pile().collect();
        assert_eq!(&pile[pile.len() - 2..], &[Card::Wild, f(Red, Skip)]);
        assert_eq!(pile[0], deck[17]);
        assert_eq!(pile.len(), 108 - 14 - 1);
    }

    #[test]
    fn setup_rejects_bad_input() {
        let deck = new_deck();
        assert_eq!(GameState::setup(&deck, 1), Err(EngineError::InvalidSeatCount(1)));
        assert_eq!(GameState::setup(&deck, 11), Err(EngineError::InvalidSeatCount(11)));
        assert!(matches!(GameState::setup(&deck[..100], 2), Err(EngineError::InvalidDeck(_))));
        let mut dup = deck.clone();
        dup[0] = dup[1];
        assert!(matches!(GameState::setup(&dup, 2), Err(EngineError::InvalidDeck(_))));
        let five = GameState::setup(&deck, 5).unwrap();
        assert_eq!(five.hand_sizes().iter().sum::<usize>(), 35);
        assert!(five.conserves_deck());
    }

    #[test]
    fn shuffle_is_seeded_permutation() {
        let deck = new_deck();
        let a = shuffle_deck(&deck, 42).unwrap();
        assert_eq!(a, shuffle_deck(&deck, 42).unwrap());
        assert_ne!(a, shuffle_deck(&deck, 43).unwrap());
        assert_eq!(face_counts(&a), face_counts(&deck));
        assert!(shuffle_deck(&deck[..107], 1).is_err());
    }

    #[test]
    fn legal_play_candidates() {
        let state = Scenario::new(
            vec![vec![n(Red, 9), n(Blue, 5), f(Green, Skip), Card::Wild], vec![n(Yellow, 1)]],
            vec![n(Yellow, 2)],
            n(Red, 5),
            Red,
        )
        .build()
        .unwrap();
        assert_eq!(
            state.legal_decisions().unwrap(),
            vec![Decision::PlayCard(n(Red, 9)), Decision::PlayCard(n(Blue, 5)), Decision::PlayCard(Card::Wild)]
        );
    }

    #[test]
    fn draw_only_without_playable_card() {
        let state = Scenario::new(vec![vec![n(Blue, 1), n(Green, 3)], vec![n(Yellow, 1)]], vec![n(Yellow, 2)], n(Red, 5), Red)
            .build()
            .unwrap();
        assert_eq!(state.legal_decisions().unwrap(), vec![Decision::DrawCard]);
        let next = state.apply(Decision::DrawCard).unwrap();
        assert_eq!(next.hand(0).len(), 3);
        assert_eq!(next.current_seat(), 1);
        // pile exhausted by the draw -> game over, smaller hand wins
        assert!(next.is_terminal());
        assert_eq!(next.winners().unwrap(), WinnerSet::from_seats([1]));
    }

    #[test]
    fn duplicates_collapse() {
        let state = Scenario::new(vec![vec![n(Red, 9), n(Red, 9), n(Red, 9)], vec![n(Yellow, 1)]], vec![n(Yellow, 2)], n(Red, 5), Red)
            .build();
        // only two R9 exist
        assert!(state.is_err());
        let state = Scenario::new(vec![vec![n(Red, 9), n(Red, 9)], vec![n(Yellow, 1)]], vec![n(Yellow, 2)], n(Red, 5), Red)
            .build()
            .unwrap();
        assert_eq!(state.legal_decisions().unwrap(), vec![Decision::PlayCard(n(Red, 9))]);
    }

    #[test]
    fn wild_then_color_phase() {
        let state = Scenario::new(vec![vec![Card::Wild, n(Blue, 1)], vec![n(Yellow, 1)]], vec![n(Yellow, 2)], n(Red, 5), Red)
            .build()
            .unwrap();
        let s = state.apply(Decision::PlayCard(Card::Wild)).unwrap();
        assert_eq!(s.phase(), Phase::SelectColor);
        assert_eq!(s.current_seat(), 0);
        assert_eq!(s.legal_decisions().unwrap().len(), 4);
        let s = s.apply(Decision::ChooseColor(Blue)).unwrap();
        assert_eq!((s.phase(), s.current_seat(), s.active_color()), (Phase::SelectCard, 1, Blue));
        assert!(s.apply(Decision::ChooseColor(Red)).is_err());
    }

    #[test]
    fn reverse_three_seats() {
        let state = Scenario::new(
            vec![vec![f(Red, Reverse), n(Blue, 1)], vec![n(Yellow, 1)], vec![n(Green, 1)]],
            vec![n(Yellow, 2)],
            n(Red, 5),
            Red,
        )
        .build()
        .unwrap();
        let s = state.apply(Decision::PlayCard(f(Red, Reverse))).unwrap();
        assert_eq!(s.direction(), Direction::Counterclockwise);
        assert_eq!(s.current_seat(), 2);
    }

    #[test]
    fn reverse_two_seats_acts_as_skip() {
        let state = Scenario::new(vec![vec![f(Red, Reverse), n(Blue, 1)], vec![n(Yellow, 1)]], vec![n(Yellow, 2)], n(Red, 5), Red)
            .build()
            .unwrap();
        let s = state.apply(Decision::PlayCard(f(Red, Reverse))).unwrap();
        assert_eq!(s.current_seat(), 0);
        assert_eq!(s.direction(), Direction::Clockwise);
    }

    #[test]
    fn skip_and_draw_two() {
        let hands = vec![vec![f(Red, Skip), f(Red, DrawTwo), n(Blue, 1)], vec![n(Yellow, 1)], vec![n(Green, 1)]];
        let pile = vec![n(Yellow, 2), n(Yellow, 3), n(Yellow, 4)];
        let state = Scenario::new(hands, pile, n(Red, 5), Red).build().unwrap();
        let s = state.apply(Decision::PlayCard(f(Red, Skip))).unwrap();
        assert_eq!(s.current_seat(), 2);
        let mut s = state.clone();
        let fx = s.apply_in_place(Decision::PlayCard(f(Red, DrawTwo))).unwrap();
        assert_eq!(fx.penalty, Some((1, 2, 2)));
        assert_eq!(s.hand(1).len(), 3);
        assert_eq!(s.current_seat(), 2);
    }

    #[test]
    fn draw_two_truncates_and_ends_game() {
        let hands = vec![vec![f(Red, DrawTwo), n(Blue, 1)], vec![n(Yellow, 1)]];
        let state = Scenario::new(hands, vec![n(Yellow, 2)], n(Red, 5), Red).build().unwrap();
        let mut s = state.clone();
        let fx = s.apply_in_place(Decision::PlayCard(f(Red, DrawTwo))).unwrap();
        assert_eq!(fx.penalty, Some((1, 2, 1)));
        assert!(s.is_terminal());
        assert_eq!(s.winners().unwrap(), WinnerSet::from_seats([0]));
    }

    fn wd4_state(offender_extra: Card) -> GameState {
        let pile: Vec<Card> = (1..=9).map(|d| n(Yellow, d)).collect();
        Scenario::new(
            vec![vec![Card::WildDrawFour, offender_extra, n(Green, 7)], vec![n(Blue, 9), n(Blue, 8)]],
            pile,
            n(Red, 5),
            Red,
        )
        .build()
        .unwrap()
    }

    fn play_wd4(state: &GameState) -> GameState {
        let s = state.apply(Decision::PlayCard(Card::WildDrawFour)).unwrap();
        let s = s.apply(Decision::ChooseColor(Green)).unwrap();
        assert_eq!((s.phase(), s.current_seat()), (Phase::SelectChallenge, 1));
        assert_eq!(s.legal_decisions().unwrap(), vec![Decision::Challenge(true), Decision::Challenge(false)]);
        s
    }

    #[test]
    fn challenge_illegal_wd4() {
        let s = play_wd4(&wd4_state(n(Red, 3)));
        assert_eq!(s.challenge(), Some(ChallengeContext { offender: 0, illegal: true }));
        let mut t = s.clone();
        let fx = t.apply_in_place(Decision::Challenge(true)).unwrap();
        assert_eq!(t.hand(0).len(), 2 + 4);
        assert_eq!(t.hand(1).len(), 2);
        assert_eq!((t.phase(), t.current_seat(), t.active_color()), (Phase::SelectCard, 1, Green));
        assert_eq!(t.top_card(), Card::WildDrawFour);
        let r = fx.challenge.unwrap();
        assert!(r.challenged && r.illegal && r.penalized == 0 && r.penalty == 4);
    }

    #[test]
    fn challenge_legal_wd4() {
        let s = play_wd4(&wd4_state(n(Blue, 3)));
        let t = s.apply(Decision::Challenge(true)).unwrap();
        assert_eq!(t.hand(1).len(), 2 + 6);
        assert_eq!(t.hand(0).len(), 2);
        assert_eq!(t.current_seat(), 0);
    }

    #[test]
    fn unchallenged_wd4() {
        for extra in [n(Red, 3), n(Blue, 3)] {
            let s = play_wd4(&wd4_state(extra));
            let t = s.apply(Decision::Challenge(false)).unwrap();
            assert_eq!(t.hand(1).len(), 2 + 4);
            assert_eq!(t.hand(0).len(), 2);
            assert_eq!(t.current_seat(), 0);
        }
    }

    #[test]
    fn wd4_legality_rule() {
        assert!(wd4_was_illegal(&Hand::from_cards(&[n(Red, 3), Card::Wild]), Red));
        assert!(!wd4_was_illegal(&Hand::from_cards(&[n(Blue, 3), Card::Wild]), Red));
        assert!(!wd4_was_illegal(&Hand::default(), Red));
    }

    #[test]
    fn emptying_hand_wins() {
        let state = Scenario::new(vec![vec![n(Red, 1)], vec![n(Yellow, 1), n(Blue, 2)]], vec![n(Yellow, 2)], n(Red, 5), Red)
            .build()
            .unwrap();
        let s = state.apply(Decision::PlayCard(n(Red, 1))).unwrap();
        assert!(s.is_terminal());
        assert_eq!(s.winners().unwrap(), WinnerSet::from_seats([0]));
        assert_eq!(s.apply(Decision::DrawCard), Err(EngineError::Terminal));
        assert_eq!(s.legal_decisions(), Err(EngineError::Terminal));
    }

    #[test]
    fn terminal_detection() {
        let exhausted = Scenario::new(vec![vec![n(Red, 1)], vec![n(Yellow, 1)], vec![n(Blue, 1), n(Blue, 2)]], vec![], n(Red, 5), Red)
            .build()
            .unwrap();
        assert_eq!(exhausted.winners().unwrap(), WinnerSet::from_seats([0, 1]));
        let live = Scenario::new(vec![vec![n(Red, 1)], vec![n(Yellow, 1)]], vec![n(Blue, 3)], n(Red, 5), Red).build().unwrap();
        assert!(!live.is_terminal());
        assert_eq!(live.winners(), Err(EngineError::NotTerminal));
    }

    #[test]
    fn rejects_illegal_decisions() {
        let state = Scenario::new(vec![vec![n(Red, 1), n(Blue, 2)], vec![n(Yellow, 1)]], vec![n(Blue, 3)], n(Red, 5), Red).build().unwrap();
        assert!(matches!(state.apply(Decision::PlayCard(n(Blue, 2))), Err(EngineError::IllegalDecision { .. })));
        assert!(matches!(state.apply(Decision::PlayCard(n(Green, 2))), Err(EngineError::IllegalDecision { .. })));
        assert!(matches!(state.apply(Decision::DrawCard), Err(EngineError::IllegalDecision { .. })));
        assert!(matches!(state.apply(Decision::ChooseColor(Red)), Err(EngineError::IllegalDecision { .. })));
        assert!(matches!(state.apply(Decision::Challenge(true)), Err(EngineError::IllegalDecision { .. })));
    }

    #[test]
    fn decision_tokens_roundtrip() {
        let all = [
            Decision::PlayCard(n(Red, 5)),
            Decision::PlayCard(Card::WildDrawFour),
            Decision::PlayCard(f(Green, Skip)),
            Decision::DrawCard,
            Decision::ChooseColor(Yellow),
            Decision::Challenge(true),
            Decision::Challenge(false),
        ];
        for d in all {
            assert_eq!(d.token().parse::<Decision>().unwrap(), d);
        }
    }
}
