use std::fmt::Write as _;

use super::HistorySummary;
use crate::card::{Card, Color};
use crate::engine::{Decision, Direction, Phase};
use crate::error::PromptError;
use crate::players::Observation;

pub const SYSTEM_PROMPT: &str = "\
You are a player at an UNO table. Each request shows what you can see of the game \
and a numbered list of the moves open to you. Answer with one JSON object of the form \
{\"action\": <move number>, \"reasoning\": \"<brief explanation>\"} and nothing that \
could be mistaken for another JSON object.";

const RULES: &str = "\
Rules in brief: a card may be played if it shares the active color, or the number or \
symbol of the top card; Wild and Wild Draw Four can always be played and let the player \
name the next color. Skip passes over the next player, Reverse flips the turn order (with \
two players it acts as Skip), Draw Two makes the next player draw two and lose their turn. \
A Wild Draw Four may be challenged by the next player: if the offender still held a card \
of the previous color they draw four instead, otherwise the challenger draws six. An \
unchallenged Wild Draw Four costs the next player four cards and their turn. You may only \
draw when nothing is playable, and drawing ends your turn. Whoever empties their hand \
first wins; if the draw pile runs out, the smallest hand wins.";

const RECENT_DISCARDS: usize = 12;

/// Generic play principles used by the strategy-reflection stage.
pub fn default_strategies() -> Vec<String> {
    [
        "Hold Wild and Wild Draw Four cards for moments when no colored card fits.",
        "Prefer plays that keep the color you hold most of.",
        "Use Skip, Reverse and Draw Two when the next player is close to going out.",
        "Shed high-count colors early so a drawn card is more likely to be playable.",
        "Challenge a Wild Draw Four only when the offender likely held the previous color.",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}

fn describe_card(card: Card) -> String {
    match card {
        Card::Number(c, d) => format!("{} {d}", c.name()),
        Card::Function(c, f) => format!("{} {}", c.name(), f.name()),
        Card::Wild => "Wild".into(),
        Card::WildDrawFour => "Wild Draw Four".into(),
    }
}

fn describe_decision(d: Decision) -> String {
    match d {
        Decision::PlayCard(c) => format!("play {}", describe_card(c)),
        Decision::DrawCard => "draw a card".into(),
        Decision::ChooseColor(c) => format!("name {}", c.name()),
        Decision::Challenge(true) => "challenge the Wild Draw Four".into(),
        Decision::Challenge(false) => "accept the Wild Draw Four".into(),
    }
}

fn state_block(obs: &Observation) -> String {
    let mut s = String::new();
    let order = match obs.direction {
        Direction::Clockwise => "ascending seat numbers",
        Direction::Counterclockwise => "descending seat numbers",
    };
    let _ = writeln!(s, "You are seat {} of {} (play passes in {order}).", obs.seat, obs.seats);
    let _ = writeln!(s, "Turn: {}", obs.turn_index);
    let _ = writeln!(s, "Top card: {} ({})", describe_card(obs.top_card), obs.top_card);
    let _ = writeln!(s, "Active color: {}", obs.active_color);
    let hand: Vec<String> = obs.hand.iter().map(Card::to_string).collect();
    let _ = writeln!(s, "Your hand ({} cards): {}", obs.hand.len(), hand.join(", "));
    let others: Vec<String> = (1..obs.seats)
        .map(|k| {
            let seat = match obs.direction {
                Direction::Clockwise => (obs.seat + k) % obs.seats,
                Direction::Counterclockwise => (obs.seat + obs.seats - k) % obs.seats,
            };
            format!("seat {seat}: {}", obs.hand_counts[seat])
        })
        .collect();
    let _ = writeln!(s, "Opponent hand sizes in turn order: {}", others.join("; "));
    let _ = writeln!(s, "Cards left in the draw pile: {}", obs.draw_pile_len);
    let recent: Vec<String> = obs
        .discard_history
        .iter()
        .rev()
        .take(RECENT_DISCARDS)
        .map(|d| match d.seat {
            Some(p) => format!("{} by seat {p}", d.card),
            None => format!("{} (opening card)", d.card),
        })
        .collect();
    let _ = writeln!(s, "Most recent discards, newest first: {}", recent.join(", "));
    s
}

fn candidate_block(obs: &Observation) -> String {
    let mut s = String::from("Available moves:\n");
    for (i, d) in obs.candidates.iter().enumerate() {
        let _ = writeln!(s, "{i}: {} [{}]", describe_decision(*d), d.token());
    }
    s
}

/// Initial decision prompt. `kind` must match the observation's phase.
pub fn render_prompt(kind: Phase, obs: &Observation) -> Result<String, PromptError> {
    if kind != obs.phase {
        return Err(PromptError::PhaseMismatch { kind: kind.name(), phase: obs.phase.name() });
    }
    let task = match kind {
        Phase::SelectCard => "Choose which card to play, or draw if nothing fits.".to_string(),
        Phase::SelectColor => "You just played a wild card. Choose the color play continues in.".to_string(),
        Phase::SelectChallenge => format!(
            "Seat {} played a Wild Draw Four on you. Decide whether to challenge it.",
            obs.challenge_offender.map_or_else(|| "?".to_string(), |s| s.to_string())
        ),
    };
    Ok(format!(
        "{RULES}\n\n{}\n{task}\n\n{}\nRespond with a JSON object: {{\"action\": <move number>, \"reasoning\": \"...\"}}",
        state_block(obs),
        candidate_block(obs)
    ))
}

fn color_counts(counts: &[u32; 4]) -> String {
    Color::ALL.iter().map(|c| format!("{} {}", c.name(), counts[c.index()])).collect::<Vec<_>>().join(", ")
}

/// Second-stage prompt: revisit the move given statistics of the game so far.
pub fn render_history_reflection(summary: &HistorySummary, obs: &Observation) -> String {
    let k = &summary.discarded_by_kind;
    let u = &summary.unseen_by_kind;
    let per_seat: Vec<String> =
        summary.played_by_seat.iter().enumerate().map(|(i, n)| format!("seat {i}: {n}")).collect();
    format!(
        "Take stock of the game so far before committing.\n\
         Discarded so far: {} cards. By color: {}. By kind: {} numbers, {} Skip, {} Reverse, {} Draw Two, {} Wild, {} Wild Draw Four.\n\
         Cards played per seat: {}.\n\
         Cards you have not seen yet (in opponents' hands or the draw pile): {}. By color: {}. \
         By kind: {} numbers, {} Skip, {} Reverse, {} Draw Two, {} Wild, {} Wild Draw Four.\n\
         Given these counts, is your last answer still the best move? Keep it or switch to another \
         numbered move from the same list ({} options), and answer with the same JSON format.",
        summary.discards,
        color_counts(&summary.discarded_by_color),
        k.number,
        k.skip,
        k.reverse,
        k.draw_two,
        k.wild,
        k.wild_draw_four,
        per_seat.join(", "),
        summary.unseen_total,
        color_counts(&summary.unseen_by_color),
        u.number,
        u.skip,
        u.reverse,
        u.draw_two,
        u.wild,
        u.wild_draw_four,
        obs.candidates.len(),
    )
}

/// Third-stage prompt: check the move against a list of play principles.
pub fn render_strategy_reflection(strategies: &[String], obs: &Observation) -> String {
    let mut s = String::from("Now test your current answer against these principles:\n");
    for (i, st) in strategies.iter().enumerate() {
        let _ = writeln!(s, "{}. {st}", i + 1);
    }
    let _ = write!(
        s,
        "Settle on your final move from the same numbered list ({} options) and answer with the same JSON format.",
        obs.candidates.len()
    );
    s
}

/// Re-ask after an unusable reply.
pub(crate) fn render_retry(error: &str, obs: &Observation) -> String {
    format!(
        "That answer could not be used ({error}). Reply with exactly one JSON object whose \"action\" is a \
         move number between 0 and {}.",
        obs.candidates.len().saturating_sub(1)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card::Color::*;
    use crate::engine::Scenario;

    fn obs() -> Observation {
        let s = Scenario::new(
            vec![vec![Card::Number(Red, 1), Card::Wild], vec![Card::Number(Blue, 2)]],
            vec![Card::Number(Green, 3)],
            Card::Number(Red, 7),
            Red,
        )
        .build()
        .unwrap();
        Observation::new(&s)
    }

    #[test]
    fn prompt_lists_every_candidate() {
        let o = obs();
        let p = render_prompt(Phase::SelectCard, &o).unwrap();
        for (i, d) in o.candidates.iter().enumerate() {
            assert!(p.contains(&format!("{i}: ")), "{p}");
            assert!(p.contains(&format!("[{}]", d.token())));
        }
        assert!(p.contains("Top card: Red 7"));
        assert!(p.contains("seat 1: 1"));
    }

    #[test]
    fn phase_mismatch_is_an_error() {
        assert!(matches!(render_prompt(Phase::SelectColor, &obs()), Err(PromptError::PhaseMismatch { .. })));
    }

    #[test]
    fn reflections_embed_inputs() {
        let o = obs();
        let h = HistorySummary::from_observation(&o);
        assert!(render_history_reflection(&h, &o).contains(&format!("{}", h.unseen_total)));
        let r = render_strategy_reflection(&["alpha rule".to_string()], &o);
        assert!(r.contains("1. alpha rule"));
    }
}
