//! Cards, colors, and the canonical 108-card deck.
//!
//! Every card maps to one of 54 distinct faces. Faces are numbered in the
//! canonical deck order: colors R, Y, G, B; within a color the digits 0..=9,
//! then Skip, Reverse, DrawTwo; then Wild and Wild Draw Four. Log files name
//! cards with short tokens such as `R5`, `GSkip`, `BReverse`, `YDrawTwo`, `W`
//! and `WD4`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseCardError;

/// Number of distinct card faces.
pub const FACE_COUNT: usize = 54;
/// Number of cards in a full deck.
pub const DECK_SIZE: usize = 108;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Yellow,
    Green,
    Blue,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Yellow, Color::Green, Color::Blue];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Yellow => 'Y',
            Color::Green => 'G',
            Color::Blue => 'B',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "Red",
            Color::Yellow => "Yellow",
            Color::Green => "Green",
            Color::Blue => "Blue",
        }
    }

    fn from_letter(c: char) -> Option<Color> {
        match c {
            'R' => Some(Color::Red),
            'Y' => Some(Color::Yellow),
            'G' => Some(Color::Green),
            'B' => Some(Color::Blue),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = ParseCardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Color::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(t) || t.len() == 1 && t.starts_with(c.letter()))
            .ok_or_else(|| ParseCardError(s.to_string()))
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Function {
    Skip,
    Reverse,
    DrawTwo,
}

impl Function {
    pub const ALL: [Function; 3] = [Function::Skip, Function::Reverse, Function::DrawTwo];

    pub fn name(self) -> &'static str {
        match self {
            Function::Skip => "Skip",
            Function::Reverse => "Reverse",
            Function::DrawTwo => "DrawTwo",
        }
    }
}

/// A single UNO card.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Card {
    Number(Color, u8),
    Function(Color, Function),
    Wild,
    WildDrawFour,
}

impl Card {
    /// Face index in canonical deck order, `0..FACE_COUNT`.
    pub fn index(self) -> usize {
        match self {
            Card::Number(c, d) => c.index() * 13 + d as usize,
            Card::Function(c, f) => c.index() * 13 + 10 + f as usize,
            Card::Wild => 52,
            Card::WildDrawFour => 53,
        }
    }

    pub fn from_index(index: usize) -> Card {
        match index {
            52 => Card::Wild,
            53 => Card::WildDrawFour,
            i if i < 52 => {
                let color = Color::ALL[i / 13];
                match i % 13 {
                    d @ 0..=9 => Card::Number(color, d as u8),
                    f => Card::Function(color, Function::ALL[f - 10]),
                }
            }
            _ => panic!("card face index {index} out of range"),
        }
    }

    /// `None` for the two wild kinds.
    pub fn color(self) -> Option<Color> {
        match self {
            Card::Number(c, _) | Card::Function(c, _) => Some(c),
            Card::Wild | Card::WildDrawFour => None,
        }
    }

    pub fn is_wild(self) -> bool {
        matches!(self, Card::Wild | Card::WildDrawFour)
    }

    pub fn is_number(self) -> bool {
        matches!(self, Card::Number(..))
    }

    /// True when `self` can legally go on `top` given the active color.
    pub fn matches(self, top: Card, active: Color) -> bool {
        match self {
            Card::Wild | Card::WildDrawFour => true,
            Card::Number(c, d) => c == active || matches!(top, Card::Number(_, td) if td == d),
            Card::Function(c, f) => c == active || matches!(top, Card::Function(_, tf) if tf == f),
        }
    }

    /// How many copies of this face a full deck holds.
    pub fn copies_in_deck(self) -> u8 {
        match self {
            Card::Number(_, 0) => 1,
            Card::Wild | Card::WildDrawFour => 4,
            _ => 2,
        }
    }
}

impl PartialOrd for Card {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Card {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.index().cmp(&other.index())
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Card::Number(c, d) => write!(f, "{}{}", c.letter(), d),
            Card::Function(c, func) => write!(f, "{}{}", c.letter(), func.name()),
            Card::Wild => f.write_str("W"),
            Card::WildDrawFour => f.write_str("WD4"),
        }
    }
}

impl FromStr for Card {
    type Err = ParseCardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseCardError(s.to_string());
        let t = s.trim();
        if t.eq_ignore_ascii_case("W") {
            return Ok(Card::Wild);
        }
        if t.eq_ignore_ascii_case("WD4") {
            return Ok(Card::WildDrawFour);
        }
        let mut chars = t.chars();
        let color = chars
            .next()
            .map(|c| c.to_ascii_uppercase())
            .and_then(Color::from_letter)
            .ok_or_else(err)?;
        let rest = chars.as_str();
        if rest.len() == 1 {
            let digit = rest.parse::<u8>().map_err(|_| err())?;
            return Ok(Card::Number(color, digit));
        }
        Function::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(rest))
            .map(|f| Card::Function(color, f))
            .ok_or_else(err)
    }
}

impl Serialize for Card {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The canonical deck: R, Y, G, B blocks of `0, 1,1, ..., 9,9, Skip×2,
/// Reverse×2, DrawTwo×2`, then four Wild and four Wild Draw Four.
pub fn new_deck() -> Vec<Card> {
    let mut deck = Vec::with_capacity(DECK_SIZE);
    for face in 0..FACE_COUNT {
        let card = Card::from_index(face);
        deck.extend(std::iter::repeat_n(card, card.copies_in_deck() as usize));
    }
    deck
}

/// Per-face counts of a card list.
pub fn face_counts(cards: &[Card]) -> [u8; FACE_COUNT] {
    let mut counts = [0u8; FACE_COUNT];
    for c in cards {
        counts[c.index()] += 1;
    }
    counts
}
