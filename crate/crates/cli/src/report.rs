//! Report documents written by every subcommand.
//!
//! Strategies are keyed by firm and product id. Key order is deterministic
//! (sorted maps, firms in scenario order), so identical runs produce
//! identical bytes once `timing` and `timestamp` are left out.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use ppm_core::dynamics::{DynamicsTrace, Termination};
use ppm_core::interior::{SecondOrder, StationaryCandidate};
use ppm_core::oracle::GridEquilibrium;
use ppm_core::payoff::{self, PayoffBreakdown};
use ppm_core::portfolio::{PortfolioDistribution, PortfolioEnumeration};
use ppm_core::verifier::{Method, RegretReport};
use ppm_core::{Game, NamedProfile, StrategyProfile};

use crate::files::Scenario;

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: "ppm",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioInfo {
    pub path: String,
    pub sha256: String,
    pub firms: usize,
    pub segments: usize,
    pub products: usize,
}

impl ScenarioInfo {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            path: scenario.path.display().to_string(),
            sha256: scenario.sha256.clone(),
            firms: scenario.game.n_firms(),
            segments: scenario.game.n_segments(),
            products: scenario.game.n_products(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub command: &'static str,
    pub scenario: ScenarioInfo,
    pub parameters: Value,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

fn named_row(game: &Game, firm: usize, row: &[f64]) -> BTreeMap<String, f64> {
    row.iter()
        .enumerate()
        .map(|(k, &x)| (game.catalog_product_id(firm, k).to_string(), x))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductShare {
    pub mass: f64,
    pub probability: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentShares {
    pub segment: String,
    pub products: BTreeMap<String, ProductShare>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FirmEval {
    pub firm: String,
    pub payoff: f64,
    pub segments: Vec<SegmentShares>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalView {
    pub profile: NamedProfile,
    pub denominators: BTreeMap<String, f64>,
    pub firms: Vec<FirmEval>,
}

impl EvalView {
    pub fn new(game: &Game, profile: &StrategyProfile, breakdown: &PayoffBreakdown) -> Self {
        let firms = breakdown
            .firms
            .iter()
            .enumerate()
            .map(|(i, fp)| FirmEval {
                firm: game.firm_id(i).to_string(),
                payoff: fp.total,
                segments: game
                    .segments()
                    .iter()
                    .enumerate()
                    .map(|(j, seg)| SegmentShares {
                        segment: seg.id.clone(),
                        products: (0..game.catalog_len(i))
                            .map(|k| {
                                (
                                    game.catalog_product_id(i, k).to_string(),
                                    ProductShare {
                                        mass: profile.firm(i)[k],
                                        probability: fp.probabilities[j][k],
                                        contribution: fp.contributions[j][k],
                                    },
                                )
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        Self {
            profile: profile.to_named(game),
            denominators: game
                .segments()
                .iter()
                .zip(&breakdown.denominators)
                .map(|(s, &d)| (s.id.clone(), d))
                .collect(),
            firms,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FirmRegretView {
    pub firm: String,
    pub payoff: f64,
    pub best_value: f64,
    pub regret: f64,
    pub method: Method,
    pub best_response: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationView {
    /// Largest regret in payoff units.
    pub epsilon: f64,
    pub relative_epsilon: f64,
    pub scale: f64,
    /// Relative tolerance the profile was checked against.
    pub tolerance: f64,
    pub is_epsilon_nash: bool,
    pub firms: Vec<FirmRegretView>,
}

impl VerificationView {
    pub fn new(game: &Game, report: &RegretReport) -> Self {
        Self {
            epsilon: report.epsilon,
            relative_epsilon: report.epsilon / report.scale,
            scale: report.scale,
            tolerance: report.tolerance,
            is_epsilon_nash: report.is_epsilon_nash,
            firms: report
                .firms
                .iter()
                .map(|f| FirmRegretView {
                    firm: game.firm_id(f.firm).to_string(),
                    payoff: f.payoff,
                    best_value: f.best_value,
                    regret: f.regret,
                    method: f.method,
                    best_response: named_row(game, f.firm, &f.best_response),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateFirm {
    pub firm: String,
    /// Product whose mass is `tau`; absent for equal-attractiveness firms.
    pub reference: Option<String>,
    pub tau: f64,
    pub residual: f64,
    pub curvature: Option<f64>,
    pub second_order: SecondOrder,
    pub payoff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateView {
    pub interior: bool,
    pub max_residual: f64,
    pub profile: NamedProfile,
    pub firms: Vec<CandidateFirm>,
    pub verification: VerificationView,
}

impl CandidateView {
    pub fn new(game: &Game, candidate: &StationaryCandidate, verification: &RegretReport) -> Self {
        let payoffs = payoff::payoffs(game, &candidate.profile);
        let firms = (0..game.n_firms())
            .map(|i| CandidateFirm {
                firm: game.firm_id(i).to_string(),
                reference: candidate.reference[i]
                    .map(|k| game.catalog_product_id(i, k).to_string()),
                tau: candidate.tau[i],
                residual: candidate.residual[i],
                curvature: candidate.curvature[i],
                second_order: candidate.second_order[i],
                payoff: payoffs[i],
            })
            .collect();
        Self {
            interior: candidate.interior,
            max_residual: candidate.max_residual(),
            profile: candidate.profile.to_named(game),
            firms,
            verification: VerificationView::new(game, verification),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveView {
    pub candidates: Vec<CandidateView>,
    /// Candidates whose regret is within the verification tolerance.
    pub certified: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridEquilibriumView {
    pub profile: NamedProfile,
    pub regrets: BTreeMap<String, f64>,
    pub max_regret: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleView {
    pub profiles_searched: f64,
    pub equilibria: Vec<GridEquilibriumView>,
}

impl OracleView {
    pub fn new(game: &Game, searched: f64, found: &[GridEquilibrium]) -> Self {
        Self {
            profiles_searched: searched,
            equilibria: found
                .iter()
                .map(|eq| GridEquilibriumView {
                    profile: eq.profile.to_named(game),
                    regrets: (0..game.n_firms())
                        .map(|i| (game.firm_id(i).to_string(), eq.regrets[i]))
                        .collect(),
                    max_regret: eq.max_regret(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UpdateView {
    pub firm: String,
    pub before: f64,
    pub after: f64,
    pub moved: bool,
    pub method: Method,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundView {
    pub round: usize,
    pub max_payoff_change: f64,
    pub movement: f64,
    pub profile: NamedProfile,
    pub updates: Vec<UpdateView>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsView {
    pub termination: Termination,
    pub cycle_start: Option<usize>,
    pub initial: NamedProfile,
    pub rounds: Vec<RoundView>,
    pub final_profile: NamedProfile,
    pub final_verification: VerificationView,
}

impl DynamicsView {
    pub fn new(game: &Game, trace: &DynamicsTrace, verification: &RegretReport) -> Self {
        Self {
            termination: trace.termination,
            cycle_start: trace.cycle_start,
            initial: trace.initial.to_named(game),
            rounds: trace
                .rounds
                .iter()
                .map(|r| RoundView {
                    round: r.round,
                    max_payoff_change: r.max_payoff_change,
                    movement: r.movement,
                    profile: r.profile.to_named(game),
                    updates: r
                        .updates
                        .iter()
                        .map(|u| UpdateView {
                            firm: game.firm_id(u.firm).to_string(),
                            before: u.before,
                            after: u.after,
                            moved: u.moved,
                            method: u.method,
                        })
                        .collect(),
                })
                .collect(),
            final_profile: trace.final_profile().to_named(game),
            final_verification: VerificationView::new(game, verification),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PortfolioMass {
    pub products: Vec<String>,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvertView {
    pub firm: String,
    pub direction: &'static str,
    pub product_distribution: BTreeMap<String, f64>,
    /// Every pure portfolio in enumeration order (by size, then ids).
    pub portfolio_distribution: Vec<PortfolioMass>,
}

impl ConvertView {
    pub fn new(
        game: &Game,
        enumeration: &PortfolioEnumeration,
        direction: &'static str,
        product: &[f64],
        portfolio: &PortfolioDistribution,
    ) -> Self {
        let firm = enumeration.firm;
        Self {
            firm: game.firm_id(firm).to_string(),
            direction,
            product_distribution: named_row(game, firm, product),
            portfolio_distribution: portfolio
                .ordered(enumeration)
                .into_iter()
                .map(|(subset, mass)| PortfolioMass {
                    products: subset.iter().map(|&p| game.products()[p].clone()).collect(),
                    mass,
                })
                .collect(),
        }
    }
}
