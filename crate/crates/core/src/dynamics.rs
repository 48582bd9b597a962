//! Round-robin best-response dynamics.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::Result;
use crate::model::{Game, StrategyProfile};
use crate::payoff;
use crate::verifier::{self, Method, NumericOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    CycleDetected,
    MaxRounds,
}

/// One firm's turn within a round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirmUpdate {
    pub firm: usize,
    pub before: f64,
    pub after: f64,
    pub moved: bool,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsRound {
    /// 1-based.
    pub round: usize,
    pub profile: StrategyProfile,
    /// Largest payoff gain of an updating firm this round.
    pub max_payoff_change: f64,
    /// ∞-distance between the profiles before and after the round.
    pub movement: f64,
    pub updates: Vec<FirmUpdate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace {
    pub initial: StrategyProfile,
    pub rounds: Vec<DynamicsRound>,
    pub termination: Termination,
    /// For a detected cycle, the earlier round whose profile recurred.
    pub cycle_start: Option<usize>,
}

impl DynamicsTrace {
    pub fn final_profile(&self) -> &StrategyProfile {
        self.rounds
            .last()
            .map(|r| &r.profile)
            .unwrap_or(&self.initial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsOptions {
    pub max_rounds: usize,
    /// Convergence threshold on profile movement; a firm only switches when
    /// its best response gains more than `tol · scale`.
    pub tol: f64,
    pub numeric: NumericOptions,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self {
            max_rounds: 500,
            tol: 1e-9,
            numeric: NumericOptions::default(),
        }
    }
}

/// Each round visits firms in order and replaces each strategy by a best
/// response to the current profile.
pub fn best_response_iteration(
    game: &Game,
    initial: &StrategyProfile,
    options: &DynamicsOptions,
) -> Result<DynamicsTrace> {
    let threshold = options.tol * game.payoff_scale();
    let mut current = initial.clone();
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    seen.insert(fingerprint(&current), 0);
    let mut rounds = Vec::new();

    for round in 1..=options.max_rounds.max(1) {
        let before_round = current.clone();
        let mut updates = Vec::with_capacity(game.n_firms());
        let mut max_change = 0.0f64;
        for firm in 0..game.n_firms() {
            let before = payoff::payoff_at(game, current.masses(), firm);
            let (br, method) = verifier::best_response(game, firm, &current, &options.numeric)?;
            let moved = br.value > before + threshold;
            let after = if moved {
                current.replace_firm(firm, br.strategy);
                max_change = max_change.max(br.value - before);
                br.value
            } else {
                before
            };
            updates.push(FirmUpdate {
                firm,
                before,
                after,
                moved,
                method,
            });
        }
        let movement = current.linf_distance(&before_round);
        rounds.push(DynamicsRound {
            round,
            profile: current.clone(),
            max_payoff_change: max_change,
            movement,
            updates,
        });
        if movement <= options.tol {
            return Ok(DynamicsTrace {
                initial: initial.clone(),
                rounds,
                termination: Termination::Converged,
                cycle_start: None,
            });
        }
        if let Some(&earlier) = seen.get(&fingerprint(&current)) {
            return Ok(DynamicsTrace {
                initial: initial.clone(),
                rounds,
                termination: Termination::CycleDetected,
                cycle_start: Some(earlier),
            });
        }
        seen.insert(fingerprint(&current), round);
    }
    Ok(DynamicsTrace {
        initial: initial.clone(),
        rounds,
        termination: Termination::MaxRounds,
        cycle_start: None,
    })
}

fn fingerprint(profile: &StrategyProfile) -> Vec<i64> {
    profile
        .masses()
        .iter()
        .flatten()
        .map(|x| (x * 1e8).round() as i64)
        .collect()
}
