//! Winning rate, decision hit rate and decision rank aggregation.
//!
//! A decision point with `K` candidates is critical when the spread of its
//! candidate estimates reaches the threshold `p`. Over the critical points of
//! one `K`, ODHR@K is the share where the chosen action was among the
//! maximal-estimate candidates and ADR@K the mean fractional rank of the
//! chosen action.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::{Decision, WinnerSet};
use crate::error::MetricsError;
use crate::oracle::fractional_rank;

/// Default candidate counts reported even when empty.
pub const REPORTED_K: [usize; 3] = [2, 3, 4];

/// One instrumented decision point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub game_id: u64,
    pub turn_index: u32,
    pub seat: usize,
    pub player: String,
    pub candidates: Vec<Decision>,
    /// Rollout wins for the acting seat after each candidate.
    pub wins: Vec<u32>,
    pub n_sims: u32,
    pub chosen: usize,
}

/// Scores of one record under a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointScore {
    pub k: usize,
    pub spread: f64,
    pub critical: bool,
    pub hit: bool,
    pub rank: f64,
}

impl DecisionRecord {
    pub fn k(&self) -> usize {
        self.wins.len()
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        let bad = |m: String| Err(MetricsError::BadRecord(format!("game {} turn {}: {m}", self.game_id, self.turn_index)));
        if self.wins.is_empty() {
            return bad("no candidates".into());
        }
        if !self.candidates.is_empty() && self.candidates.len() != self.wins.len() {
            return bad(format!("{} candidates but {} estimates", self.candidates.len(), self.wins.len()));
        }
        if self.chosen >= self.wins.len() {
            return bad(format!("chosen index {} out of range", self.chosen));
        }
        if self.n_sims == 0 || self.wins.iter().any(|&w| w > self.n_sims) {
            return bad(format!("wins {:?} inconsistent with n_sims {}", self.wins, self.n_sims));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        self.wins.iter().map(|&w| f64::from(w) / f64::from(self.n_sims)).collect()
    }

    pub fn score(&self, p: f64) -> Result<PointScore, MetricsError> {
        self.validate()?;
        let max = *self.wins.iter().max().unwrap_or(&0);
        let min = *self.wins.iter().min().unwrap_or(&0);
        let spread = f64::from(max - min) / f64::from(self.n_sims);
        let rank = fractional_rank(&self.values(), self.chosen).map_err(|e| MetricsError::BadRecord(e.to_string()))?;
        Ok(PointScore { k: self.k(), spread, critical: spread >= p, hit: self.wins[self.chosen] == max, rank })
    }
}

/// Who sat where in a finished game and who won.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub game_id: u64,
    /// Player name per seat.
    pub players: Vec<String>,
    pub winners: WinnerSet,
}

/// Winning rate `wins / games`.
pub fn wr(wins: u64, games: u64) -> Result<f64, MetricsError> {
    if games == 0 {
        return Err(MetricsError::NoGames);
    }
    if wins > games {
        return Err(MetricsError::TooManyWins { wins, games });
    }
    Ok(wins as f64 / games as f64)
}

/// Share of critical points whose chosen action was optimal; `None` when no
/// point qualifies.
pub fn odhr(scores: &[PointScore]) -> Option<f64> {
    let critical: Vec<_> = scores.iter().filter(|s| s.critical).collect();
    (!critical.is_empty()).then(|| critical.iter().filter(|s| s.hit).count() as f64 / critical.len() as f64)
}

/// Mean fractional rank over critical points; `None` when no point qualifies.
pub fn adr(scores: &[PointScore]) -> Option<f64> {
    let critical: Vec<_> = scores.iter().filter(|s| s.critical).collect();
    (!critical.is_empty()).then(|| critical.iter().map(|s| s.rank).sum::<f64>() / critical.len() as f64)
}

/// Pearson correlation; `None` for fewer than two points or zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pairwise Pearson coefficients between named columns.
pub fn correlation_matrix(columns: &[(&str, Vec<f64>)]) -> Vec<Vec<Option<f64>>> {
    columns
        .iter()
        .map(|(_, a)| columns.iter().map(|(_, b)| pearson(a, b)).collect())
        .collect()
}

/// Critical-point statistics for one player and one `K`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KBucket {
    /// Instrumented points with this `K`.
    pub points: u64,
    pub critical: u64,
    pub hits: u64,
    pub rank_sum: f64,
}

impl KBucket {
    pub fn odhr(&self) -> Option<f64> {
        (self.critical > 0).then(|| self.hits as f64 / self.critical as f64)
    }

    pub fn adr(&self) -> Option<f64> {
        (self.critical > 0).then(|| self.rank_sum / self.critical as f64)
    }

    fn add(&mut self, s: &PointScore) {
        self.points += 1;
        if s.critical {
            self.critical += 1;
            self.hits += u64::from(s.hit);
            self.rank_sum += s.rank;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerMetrics {
    pub player: String,
    pub games: u64,
    pub wins: u64,
    pub wr: f64,
    pub by_k: BTreeMap<usize, KBucket>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub p: f64,
    pub n_sims: Option<u32>,
    pub games: u64,
    /// Candidate counts with a column in the CSV output.
    pub ks: Vec<usize>,
    /// Rows in order of first appearance.
    pub players: Vec<PlayerMetrics>,
}

/// Aggregate per-player metrics. `p` is the criticality threshold applied to
/// every record, so logs recorded under another threshold can be rescored.
pub fn aggregate(outcomes: &[GameOutcome], records: &[DecisionRecord], p: f64) -> Result<MetricsReport, MetricsError> {
    if outcomes.is_empty() {
        return Err(MetricsError::NoGames);
    }
    let mut n_sims = None;
    for r in records {
        match n_sims {
            None => n_sims = Some(r.n_sims),
            Some(n) if n != r.n_sims => {
                return Err(MetricsError::MixedSettings(format!("n_sims {n} and {}", r.n_sims)));
            }
            _ => {}
        }
    }
    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, PlayerMetrics> = BTreeMap::new();
    let mut row = |name: &str, order: &mut Vec<String>| -> String {
        if !rows.contains_key(name) {
            order.push(name.to_string());
            rows.insert(
                name.to_string(),
                PlayerMetrics { player: name.to_string(), games: 0, wins: 0, wr: 0.0, by_k: BTreeMap::new() },
            );
        }
        name.to_string()
    };
    let mut tallies: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for g in outcomes {
        let mut seen: Vec<&str> = Vec::new();
        for name in &g.players {
            row(name, &mut order);
            let t = tallies.entry(name.clone()).or_default();
            if !seen.contains(&name.as_str()) {
                seen.push(name);
                t.0 += 1;
            }
        }
        for name in seen {
            let won = g.players.iter().enumerate().any(|(s, n)| n == name && g.winners.contains(s));
            tallies.get_mut(name).expect("tallied above").1 += u64::from(won);
        }
    }
    let mut buckets: BTreeMap<String, BTreeMap<usize, KBucket>> = BTreeMap::new();
    let mut ks: Vec<usize> = REPORTED_K.to_vec();
    for r in records {
        let s = r.score(p)?;
        row(&r.player, &mut order);
        buckets.entry(r.player.clone()).or_default().entry(s.k).or_default().add(&s);
        if !ks.contains(&s.k) {
            ks.push(s.k);
        }
    }
    ks.sort_unstable();
    let players = order
        .into_iter()
        .map(|name| {
            let mut m = rows.remove(&name).expect("row registered");
            let (games, wins) = tallies.get(&name).copied().unwrap_or_default();
            m.games = games;
            m.wins = wins;
            m.wr = if games > 0 { wr(wins, games)? } else { 0.0 };
            m.by_k = buckets.remove(&name).unwrap_or_default();
            Ok(m)
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    Ok(MetricsReport { p, n_sims, games: outcomes.len() as u64, ks, players })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

impl MetricsReport {
    pub fn player(&self, name: &str) -> Option<&PlayerMetrics> {
        self.players.iter().find(|p| p.player == name)
    }

    /// CSV with one row per player; empty cells where no critical point exists.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("player,games,wins,wr");
        for k in &self.ks {
            let _ = write!(out, ",points_{k},critical_{k},odhr_{k},adr_{k}");
        }
        out.push('\n');
        for p in &self.players {
            let _ = write!(out, "{},{},{},{:.6}", p.player, p.games, p.wins, p.wr);
            for k in &self.ks {
                let b = p.by_k.get(k).copied().unwrap_or_default();
                let _ = write!(out, ",{},{},{},{}", b.points, b.critical, opt(b.odhr()), opt(b.adr()));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(wins: Vec<u32>, chosen: usize) -> DecisionRecord {
        DecisionRecord {
            game_id: 0,
            turn_index: 0,
            seat: 0,
            player: "a".into(),
            candidates: vec![],
            wins,
            n_sims: 100,
            chosen,
        }
    }

    #[test]
    fn winning_rate() {
        assert_eq!(wr(316, 500).unwrap(), 0.632);
        assert_eq!(wr(0, 0), Err(MetricsError::NoGames));
        assert!(matches!(wr(6, 5), Err(MetricsError::TooManyWins { .. })));
    }

    #[test]
    fn scoring_and_criticality() {
        let s = rec(vec![60, 43], 0).score(0.15).unwrap();
        assert!(s.critical && s.hit && s.rank == 1.0);
        let s = rec(vec![60, 50], 1).score(0.15).unwrap();
        assert!(!s.critical && !s.hit && s.rank == 2.0);
        let tied = rec(vec![50, 50, 10], 1).score(0.0).unwrap();
        assert!(tied.hit);
        assert_eq!(tied.rank, 1.5);
        assert!(rec(vec![101], 0).score(0.1).is_err());
        assert!(rec(vec![1, 2], 2).score(0.1).is_err());
    }

    #[test]
    fn odhr_adr_buckets() {
        let scores: Vec<_> =
            [rec(vec![90, 10], 0), rec(vec![90, 10], 1), rec(vec![50, 50], 0)].iter().map(|r| r.score(0.15).unwrap()).collect();
        assert_eq!(odhr(&scores), Some(0.5));
        assert_eq!(adr(&scores), Some(1.5));
        assert_eq!(odhr(&scores[2..]), None);
    }

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), None);
        let m = correlation_matrix(&[("x", vec![1.0, 2.0, 4.0]), ("y", vec![0.0, 1.0, 1.0])]);
        assert!((m[0][0].unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m[0][1], m[1][0]);
    }

    #[test]
    fn aggregate_report() {
        let outcomes = vec![
            GameOutcome { game_id: 0, players: vec!["a".into(), "b".into()], winners: WinnerSet::from_seats([0]) },
            GameOutcome { game_id: 1, players: vec!["b".into(), "a".into()], winners: WinnerSet::from_seats([0, 1]) },
        ];
        let records = vec![rec(vec![90, 10], 0), rec(vec![10, 20, 90], 1)];
        let rep = aggregate(&outcomes, &records, 0.15).unwrap();
        let a = rep.player("a").unwrap();
        assert_eq!((a.games, a.wins, a.wr), (2, 2, 1.0));
        assert_eq!(rep.player("b").unwrap().wins, 1);
        assert_eq!(a.by_k[&2].odhr(), Some(1.0));
        assert_eq!(a.by_k[&3].adr(), Some(2.0));
        let csv = rep.to_csv();
        assert!(csv.starts_with("player,games,wins,wr,points_2"));
        assert!(csv.contains("\nb,2,1,0.500000,0,0,,,0,0,,,0,0,,\n"), "{csv}");
        let mut mixed = records.clone();
        mixed[1].n_sims = 50;
        assert!(matches!(aggregate(&outcomes, &mixed, 0.15), Err(MetricsError::MixedSettings(_))));
        assert_eq!(aggregate(&[], &records, 0.15), Err(MetricsError::NoGames));
    }
}
