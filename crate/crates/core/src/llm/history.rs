use serde::{Deserialize, Serialize};

use crate::card::{new_deck, Card, Function};
use crate::players::Observation;

/// Card counts by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KindCounts {
    pub number: u32,
    pub skip: u32,
    pub reverse: u32,
    pub draw_two: u32,
    pub wild: u32,
    pub wild_draw_four: u32,
}

impl KindCounts {
    pub fn add(&mut self, card: Card) {
        match card {
            Card::Number(..) => self.number += 1,
            Card::Function(_, Function::Skip) => self.skip += 1,
            Card::Function(_, Function::Reverse) => self.reverse += 1,
            Card::Function(_, Function::DrawTwo) => self.draw_two += 1,
            Card::Wild => self.wild += 1,
            Card::WildDrawFour => self.wild_draw_four += 1,
        }
    }

    pub fn total(&self) -> u32 {
        self.number + self.skip + self.reverse + self.draw_two + self.wild + self.wild_draw_four
    }

    fn minus(&self, other: &KindCounts) -> KindCounts {
        KindCounts {
            number: self.number - other.number,
            skip: self.skip - other.skip,
            reverse: self.reverse - other.reverse,
            draw_two: self.draw_two - other.draw_two,
            wild: self.wild - other.wild,
            wild_draw_four: self.wild_draw_four - other.wild_draw_four,
        }
    }
}

/// Statistics derivable from public information plus the acting seat's hand.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HistorySummary {
    pub discards: u32,
    /// Discarded colored cards per color, in `Color::ALL` order.
    pub discarded_by_color: [u32; 4],
    pub discarded_by_kind: KindCounts,
    /// Cards each seat has played onto the pile.
    pub played_by_seat: Vec<u32>,
    /// Cards neither discarded nor in the acting seat's hand, by color.
    pub unseen_by_color: [u32; 4],
    pub unseen_by_kind: KindCounts,
    pub unseen_total: u32,
}

impl HistorySummary {
    pub fn from_observation(obs: &Observation) -> HistorySummary {
        let mut s = HistorySummary { played_by_seat: vec![0; obs.seats], ..Default::default() };
        let mut seen_color = [0u32; 4];
        let mut seen_kind = KindCounts::default();
        for d in &obs.discard_history {
            s.discards += 1;
            if let Some(c) = d.card.color() {
                s.discarded_by_color[c.index()] += 1;
            }
            s.discarded_by_kind.add(d.card);
            if let Some(seat) = d.seat {
                s.played_by_seat[seat] += 1;
            }
        }
        for &card in obs.discard_history.iter().map(|d| &d.card).chain(&obs.hand) {
            if let Some(c) = card.color() {
                seen_color[c.index()] += 1;
            }
            seen_kind.add(card);
        }
        let mut full_color = [0u32; 4];
        let mut full_kind = KindCounts::default();
        for card in new_deck() {
            if let Some(c) = card.color() {
                full_color[c.index()] += 1;
            }
            full_kind.add(card);
        }
        for i in 0..4 {
            s.unseen_by_color[i] = full_color[i] - seen_color[i];
        }
        s.unseen_by_kind = full_kind.minus(&seen_kind);
        s.unseen_total = s.unseen_by_kind.total();
        s
    }
}
