use serde_json::Value;
use thiserror::Error;

use crate::engine::Decision;

/// A usable agent reply.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentReply {
    /// Position of the action in the candidate list.
    pub index: usize,
    pub action: Decision,
    pub reasoning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplyError {
    #[error("reply contains no JSON object")]
    NoJson,
    #[error("JSON object has no \"action\" field")]
    MissingAction,
    #[error("action index {index} out of range, {len} candidates listed")]
    OutOfRange { index: i64, len: usize },
    #[error("action {0:?} is not a recognized action token")]
    UnknownToken(String),
    #[error("action {0} is not among the listed candidates")]
    NotCandidate(String),
}

/// First JSON object in `text` carrying an `action` key, else the first JSON
/// object of any shape.
fn first_object(text: &str) -> Option<serde_json::Map<String, Value>> {
    let mut objects = text.match_indices('{').filter_map(|(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(map))) => Some(map),
            _ => None,
        }
    });
    let first = objects.next()?;
    if first.contains_key("action") {
        return Some(first);
    }
    Some(objects.find(|m| m.contains_key("action")).unwrap_or(first))
}

fn by_index(index: i64, candidates: &[Decision]) -> Result<usize, ReplyError> {
    usize::try_from(index)
        .ok()
        .filter(|&i| i < candidates.len())
        .ok_or(ReplyError::OutOfRange { index, len: candidates.len() })
}

fn by_decision(decision: Decision, candidates: &[Decision]) -> Result<usize, ReplyError> {
    candidates
        .iter()
        .position(|&c| c == decision)
        .ok_or_else(|| ReplyError::NotCandidate(decision.token()))
}

/// Extract the chosen action from a reply.
///
/// The reply must embed a JSON object with an `action` field holding the
/// candidate index (number or numeric string), an action token such as
/// `"R5"`, `"draw"` or `"Blue"` (case-insensitive), or a boolean in the
/// challenge phase.
pub fn parse_reply(text: &str, candidates: &[Decision]) -> Result<AgentReply, ReplyError> {
    let map = first_object(text).ok_or(ReplyError::NoJson)?;
    let action = map.get("action").ok_or(ReplyError::MissingAction)?;
    let index = match action {
        Value::Number(n) => {
            let i = n.as_i64().ok_or_else(|| ReplyError::UnknownToken(n.to_string()))?;
            by_index(i, candidates)?
        }
        Value::Bool(b) => by_decision(Decision::Challenge(*b), candidates)?,
        Value::String(s) => {
            let t = s.trim();
            if let Ok(i) = t.parse::<i64>() {
                by_index(i, candidates)?
            } else {
                let d = t.parse::<Decision>().map_err(|_| ReplyError::UnknownToken(s.clone()))?;
                by_decision(d, candidates)?
            }
        }
        Value::Null => return Err(ReplyError::MissingAction),
        other => return Err(ReplyError::UnknownToken(other.to_string())),
    };
    let reasoning = map.get("reasoning").map(|v| match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    });
    Ok(AgentReply { index, action: candidates[index], reasoning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card::{Card, Color};

    fn cands() -> Vec<Decision> {
        vec![Decision::PlayCard(Card::Number(Color::Red, 5)), Decision::PlayCard(Card::Wild), Decision::DrawCard]
    }

    #[test]
    fn accepted_forms() {
        let c = cands();
        assert_eq!(parse_reply(r#"{"action": 1, "reasoning": "x"}"#, &c).unwrap().action, Decision::PlayCard(Card::Wild));
        assert_eq!(parse_reply(r#"Sure. {"action": "2"}"#, &c).unwrap().index, 2);
        assert_eq!(parse_reply("```json\n{\"action\": \"r5\"}\n```", &c).unwrap().index, 0);
        assert_eq!(parse_reply(r#"{"action":"DRAW"}"#, &c).unwrap().action, Decision::DrawCard);
        let r = parse_reply(r#"{"note": {"a": 1}} then {"action": "W", "reasoning": "keep colors"}"#, &c).unwrap();
        assert_eq!(r.index, 1);
        assert_eq!(r.reasoning.as_deref(), Some("keep colors"));
        let ch = [Decision::Challenge(true), Decision::Challenge(false)];
        assert_eq!(parse_reply(r#"{"action": false}"#, &ch).unwrap().action, Decision::Challenge(false));
        assert_eq!(parse_reply(r#"{"action": "challenge"}"#, &ch).unwrap().index, 0);
    }

    #[test]
    fn rejected_forms() {
        let c = cands();
        assert_eq!(parse_reply("play the red five", &c), Err(ReplyError::NoJson));
        assert_eq!(parse_reply(r#"{"reasoning": "hmm"}"#, &c), Err(ReplyError::MissingAction));
        assert_eq!(parse_reply(r#"{"action": 3}"#, &c), Err(ReplyError::OutOfRange { index: 3, len: 3 }));
        assert_eq!(parse_reply(r#"{"action": -1}"#, &c), Err(ReplyError::OutOfRange { index: -1, len: 3 }));
        assert_eq!(parse_reply(r#"{"action": "banana"}"#, &c), Err(ReplyError::UnknownToken("banana".into())));
        assert_eq!(parse_reply(r#"{"action": "G5"}"#, &c), Err(ReplyError::NotCandidate("G5".into())));
        assert!(parse_reply(r#"{"action": 1.5}"#, &c).is_err());
    }
}
