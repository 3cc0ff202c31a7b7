//! Monte Carlo winning-rate estimation.
//!
//! A rollout plays a position to the end with every seat choosing uniformly
//! among its legal decisions. The estimate of a position for a seat is the
//! fraction of rollouts in which that seat is among the winners, so shared
//! wins count in full. Rollouts see the true omniscient state.
//!
//! Rollout `i` of an estimate seeded with `s` always uses seed
//! `derive_seed(s, [i])`, and results are reduced by integer summation, so
//! estimates do not depend on how rayon schedules the work.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Decision, GameState, WinnerSet};
use crate::error::OracleError;
use crate::rng::{derive_seed, Rng};

/// Default rollouts per candidate.
pub const DEFAULT_SIMS: u32 = 1000;

/// Rollouts below this count run on the calling thread.
const PAR_THRESHOLD: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub n_sims: u32,
    /// Criticality threshold on the spread of candidate estimates.
    pub p: f64,
    /// Common random numbers: every candidate reuses the same rollout seeds.
    pub crn: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { n_sims: DEFAULT_SIMS, p: 0.15, crn: false }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.n_sims == 0 {
            return Err(OracleError::NoSimulations);
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(OracleError::BadThreshold(self.p));
        }
        Ok(())
    }
}

/// Winning-rate estimate `wins / n_sims` for one seat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Estimate {
    pub wins: u32,
    pub n_sims: u32,
    pub deciding_seat: usize,
}

impl Estimate {
    pub fn value(&self) -> f64 {
        f64::from(self.wins) / f64::from(self.n_sims)
    }
}

/// Play `state` to the end with uniformly random decisions.
pub fn rollout(state: &GameState, seed: u64) -> WinnerSet {
    let mut s = state.clone();
    let mut rng = Rng::new(seed);
    let mut buf = Vec::with_capacity(16);
    while !s.is_terminal() {
        s.legal_decisions_into(&mut buf);
        let pick = if buf.len() == 1 { buf[0] } else { buf[rng.below(buf.len())] };
        s.apply_in_place(pick).expect("rollouts only pick legal decisions");
    }
    s.winners_unchecked()
}

fn rollout_seed(seed: u64, i: u32) -> u64 {
    derive_seed(seed, &[u64::from(i)])
}

fn count_wins(state: &GameState, n_sims: u32, seed: u64, seats: usize) -> Vec<u32> {
    let tally = |mut acc: Vec<u32>, i: u32| {
        let winners = rollout(state, rollout_seed(seed, i));
        for s in winners.seats() {
            acc[s] += 1;
        }
        acc
    };
    let merge = |mut a: Vec<u32>, b: Vec<u32>| {
        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        a
    };
    if n_sims < PAR_THRESHOLD {
        (0..n_sims).fold(vec![0; seats], tally)
    } else {
        (0..n_sims)
            .into_par_iter()
            .with_min_len(16)
            .fold(|| vec![0; seats], tally)
            .reduce(|| vec![0; seats], merge)
    }
}

/// Estimate `deciding_seat`'s winning rate from `state`.
pub fn estimate(state: &GameState, deciding_seat: usize, n_sims: u32, seed: u64) -> Result<Estimate, OracleError> {
    if n_sims == 0 {
        return Err(OracleError::NoSimulations);
    }
    let wins = count_wins(state, n_sims, seed, state.seats())[deciding_seat];
    Ok(Estimate { wins, n_sims, deciding_seat })
}

/// Estimates for every seat from one shared batch of rollouts. Entry `s`
/// equals `estimate(state, s, n_sims, seed)`.
pub fn estimate_all(state: &GameState, n_sims: u32, seed: u64) -> Result<Vec<Estimate>, OracleError> {
    if n_sims == 0 {
        return Err(OracleError::NoSimulations);
    }
    Ok(count_wins(state, n_sims, seed, state.seats())
        .into_iter()
        .enumerate()
        .map(|(deciding_seat, wins)| Estimate { wins, n_sims, deciding_seat })
        .collect())
}

/// Scored candidates at one decision point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEvaluation {
    pub acting_seat: usize,
    pub candidates: Vec<Decision>,
    pub estimates: Vec<Estimate>,
    /// Indices whose estimate equals the maximum.
    pub optimal_set: Vec<usize>,
    pub spread: f64,
    pub critical: bool,
}

impl CandidateEvaluation {
    pub fn values(&self) -> Vec<f64> {
        self.estimates.iter().map(Estimate::value).collect()
    }

    pub fn wins(&self) -> Vec<u32> {
        self.estimates.iter().map(|e| e.wins).collect()
    }
}

/// Candidate seed for index `j`. With common random numbers every candidate
/// shares the point seed.
pub fn candidate_seed(seed: u64, j: usize, crn: bool) -> u64 {
    if crn {
        seed
    } else {
        derive_seed(seed, &[j as u64])
    }
}

/// Estimate every legal successor for the acting seat and flag criticality.
pub fn evaluate_candidates(state: &GameState, config: &OracleConfig, seed: u64) -> Result<CandidateEvaluation, OracleError> {
    config.validate()?;
    let candidates = state.legal_decisions()?;
    let acting_seat = state.current_seat();
    let estimates = candidates
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let next = state.apply(d)?;
            estimate(&next, acting_seat, config.n_sims, candidate_seed(seed, j, config.crn))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (optimal_set, spread) = optimal_and_spread(&estimates);
    Ok(CandidateEvaluation {
        acting_seat,
        candidates,
        critical: spread >= config.p,
        estimates,
        optimal_set,
        spread,
    })
}

fn optimal_and_spread(estimates: &[Estimate]) -> (Vec<usize>, f64) {
    let max = estimates.iter().map(|e| e.wins).max().unwrap_or(0);
    let min = estimates.iter().map(|e| e.wins).min().unwrap_or(0);
    let optimal = estimates.iter().enumerate().filter(|(_, e)| e.wins == max).map(|(i, _)| i).collect();
    let n = estimates.first().map_or(1, |e| e.n_sims);
    (optimal, f64::from(max - min) / f64::from(n))
}

/// Criticality test on raw estimate values: `max - min >= p`.
pub fn is_critical(values: &[f64], p: f64) -> bool {
    spread(values) >= p
}

pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        0.0
    } else {
        max - min
    }
}

/// Rank of `chosen` when candidates are ordered by descending estimate
/// (1 = best). Tied candidates share the mean of the positions they span.
pub fn fractional_rank(values: &[f64], chosen: usize) -> Result<f64, OracleError> {
    if values.is_empty() {
        return Err(OracleError::NoCandidates);
    }
    let v = *values.get(chosen).ok_or(OracleError::ChosenOutOfRange { chosen, len: values.len() })?;
    let better = values.iter().filter(|&&x| x > v).count();
    let tied = values.iter().filter(|&&x| x == v).count();
    Ok(better as f64 + (tied as f64 + 1.0) / 2.0)
}

/// One row of a winning-rate trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Zero-based index of the action after which the estimate was taken.
    pub turn_index: u32,
    pub seat: usize,
    pub estimate: f64,
}

/// Replay `actions` from `initial`, estimating every seat after each action.
pub fn winrate_trace(initial: &GameState, actions: &[Decision], n_sims: u32, seed: u64) -> Result<Vec<TracePoint>, OracleError> {
    let mut state = initial.clone();
    let mut rows = Vec::with_capacity(actions.len() * state.seats());
    for (t, &d) in actions.iter().enumerate() {
        state.apply_in_place(d)?;
        let turn_seed = derive_seed(seed, &[t as u64]);
        for e in estimate_all(&state, n_sims, turn_seed)? {
            rows.push(TracePoint { turn_index: t as u32, seat: e.deciding_seat, estimate: e.value() });
        }
    }
    Ok(rows)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn mean_fractional_rank_is_k_plus_one_over_two(values in prop::collection::vec(0u32..5, 1..8)) {
            let vals: Vec<f64> = values.iter().map(|&v| f64::from(v) / 4.0).collect();
            let k = vals.len() as f64;
            let total: f64 = (0..vals.len()).map(|i| fractional_rank(&vals, i).unwrap()).sum();
            prop_assert!((total / k - (k + 1.0) / 2.0).abs() < 1e-12);
        }

        #[test]
        fn ranks_and_criticality_are_shift_invariant(values in prop::collection::vec(0u32..5, 2..6), shift in 1u32..4, p in 0u32..5) {
            let base: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
            let moved: Vec<f64> = base.iter().map(|v| v + f64::from(shift)).collect();
            for i in 0..base.len() {
                prop_assert_eq!(fractional_rank(&base, i).unwrap(), fractional_rank(&moved, i).unwrap());
            }
            prop_assert_eq!(is_critical(&base, f64::from(p)), is_critical(&moved, f64::from(p)));
        }
    }
}
