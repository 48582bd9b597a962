//! Multinomial-logit choice probabilities and expected shared-surplus payoffs.
//!
//! In segment `j` the market denominator is `D_j = Σ_r Σ_q e_rjq σ_rq`, a
//! product is chosen with probability `P_ijp = e_ijp σ_ip / D_j` and firm `i`
//! earns `Σ_j Σ_p β_ijp Q_j P_ijp σ_ip`.

use serde::Serialize;

use crate::error::Result;
use crate::model::{Game, StrategyProfile};

/// Per-firm payoff with its per-(segment, product) decomposition, indexed
/// `[segment][catalog position]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirmPayoff {
    pub total: f64,
    pub probabilities: Vec<Vec<f64>>,
    pub contributions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffBreakdown {
    pub denominators: Vec<f64>,
    pub firms: Vec<FirmPayoff>,
}

/// `D_j` for every segment.
pub fn segment_denominators(game: &Game, masses: &[Vec<f64>]) -> Vec<f64> {
    (0..game.n_segments())
        .map(|j| {
            masses
                .iter()
                .enumerate()
                .map(|(r, row)| dot(game.attractions(r, j), row))
                .sum()
        })
        .collect()
}

/// `P_ijp` indexed `[firm][segment][catalog position]`.
pub fn choice_probabilities(game: &Game, profile: &StrategyProfile) -> Vec<Vec<Vec<f64>>> {
    let denominators = segment_denominators(game, profile.masses());
    (0..game.n_firms())
        .map(|i| firm_probabilities(game, profile.firm(i), i, &denominators))
        .collect()
}

fn firm_probabilities(game: &Game, sigma: &[f64], firm: usize, den: &[f64]) -> Vec<Vec<f64>> {
    den.iter()
        .enumerate()
        .map(|(j, &d)| {
            game.attractions(firm, j)
                .iter()
                .zip(sigma)
                .map(|(e, s)| e * s / d)
                .collect()
        })
        .collect()
}

pub fn firm_payoff(game: &Game, profile: &StrategyProfile, firm: usize) -> Result<FirmPayoff> {
    game.check_firm(firm)?;
    let den = segment_denominators(game, profile.masses());
    Ok(firm_breakdown(game, profile.firm(firm), firm, &den))
}

fn firm_breakdown(game: &Game, sigma: &[f64], firm: usize, den: &[f64]) -> FirmPayoff {
    let probabilities = firm_probabilities(game, sigma, firm, den);
    let contributions: Vec<Vec<f64>> = probabilities
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let q = game.demand(j);
            row.iter()
                .zip(game.prices(firm, j))
                .zip(sigma)
                .map(|((p, b), s)| b * q * p * s)
                .collect()
        })
        .collect();
    let total = contributions.iter().flatten().sum();
    FirmPayoff {
        total,
        probabilities,
        contributions,
    }
}

pub fn payoff_breakdown(game: &Game, profile: &StrategyProfile) -> PayoffBreakdown {
    let denominators = segment_denominators(game, profile.masses());
    let firms = (0..game.n_firms())
        .map(|i| firm_breakdown(game, profile.firm(i), i, &denominators))
        .collect();
    PayoffBreakdown {
        denominators,
        firms,
    }
}

/// Payoff of every firm.
pub fn payoffs(game: &Game, profile: &StrategyProfile) -> Vec<f64> {
    (0..game.n_firms())
        .map(|i| payoff_at(game, profile.masses(), i))
        .collect()
}

/// Payoff formula evaluated on arbitrary nonnegative masses (not necessarily
/// normalized), as needed for coordinate-wise differentiation.
pub fn payoff_at(game: &Game, masses: &[Vec<f64>], firm: usize) -> f64 {
    let den = segment_denominators(game, masses);
    den.iter()
        .enumerate()
        .map(|(j, &d)| {
            let surplus: f64 = game
                .prices(firm, j)
                .iter()
                .zip(game.attractions(firm, j))
                .zip(&masses[firm])
                .map(|((b, e), s)| b * e * s * s)
                .sum();
            game.demand(j) * surplus / d
        })
        .sum()
}

/// `∂u_i/∂σ_is` for every `s` in firm `i`'s catalog, treating the masses as
/// unconstrained coordinates.
pub fn payoff_gradient(game: &Game, profile: &StrategyProfile, firm: usize) -> Result<Vec<f64>> {
    game.check_firm(firm)?;
    Ok(gradient_at(game, profile.masses(), firm))
}

pub fn gradient_at(game: &Game, masses: &[Vec<f64>], firm: usize) -> Vec<f64> {
    ResponseObjective::new(game, masses, firm).gradient(&masses[firm])
}

/// Firm `i`'s payoff as a function of its own strategy with opponents held
/// fixed: `Σ_j Σ_k w_jk σ_k² / (c_j + Σ_k e_jk σ_k)` where `w = β Q e` and
/// `c_j` is the opponents' share of the segment denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseObjective {
    weights: Vec<Vec<f64>>,
    attractions: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl ResponseObjective {
    pub fn new(game: &Game, masses: &[Vec<f64>], firm: usize) -> Self {
        let m = game.n_segments();
        let offsets = (0..m)
            .map(|j| {
                masses
                    .iter()
                    .enumerate()
                    .filter(|(r, _)| *r != firm)
                    .map(|(r, row)| dot(game.attractions(r, j), row))
                    .sum()
            })
            .collect();
        let weights = (0..m)
            .map(|j| {
                let q = game.demand(j);
                game.prices(firm, j)
                    .iter()
                    .zip(game.attractions(firm, j))
                    .map(|(b, e)| b * q * e)
                    .collect()
            })
            .collect();
        let attractions = (0..m).map(|j| game.attractions(firm, j).to_vec()).collect();
        Self {
            weights,
            attractions,
            offsets,
        }
    }

    pub fn dim(&self) -> usize {
        self.attractions[0].len()
    }

    /// Opponents' contribution `c_j` to each segment denominator.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// `β Q e` per segment and catalog position.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn attractions(&self) -> &[Vec<f64>] {
        &self.attractions
    }

    pub fn value(&self, sigma: &[f64]) -> f64 {
        self.segments()
            .map(|(w, e, c)| {
                let num: f64 = w.iter().zip(sigma).map(|(w, s)| w * s * s).sum();
                num / (c + dot(e, sigma))
            })
            .sum()
    }

    pub fn gradient(&self, sigma: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; sigma.len()];
        for (w, e, c) in self.segments() {
            let d = c + dot(e, sigma);
            let num: f64 = w.iter().zip(sigma).map(|(w, s)| w * s * s).sum();
            for (s, g) in grad.iter_mut().enumerate() {
                *g += (2.0 * w[s] * sigma[s] * d - num * e[s]) / (d * d);
            }
        }
        grad
    }

    /// Hessian with respect to the firm's own masses, row-major.
    pub fn hessian(&self, sigma: &[f64]) -> Vec<Vec<f64>> {
        let k = sigma.len();
        let mut h = vec![vec![0.0; k]; k];
        for (w, e, c) in self.segments() {
            let d = c + dot(e, sigma);
            let num: f64 = w.iter().zip(sigma).map(|(w, s)| w * s * s).sum();
            for s in 0..k {
                for t in 0..k {
                    let mut v = -2.0 * (w[s] * sigma[s] * e[t] + w[t] * sigma[t] * e[s]) / (d * d)
                        + 2.0 * num * e[s] * e[t] / (d * d * d);
                    if s == t {
                        v += 2.0 * w[s] / d;
                    }
                    h[s][t] += v;
                }
            }
        }
        h
    }

    fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64], f64)> {
        self.weights
            .iter()
            .zip(&self.attractions)
            .zip(&self.offsets)
            .map(|((w, e), &c)| (w.as_slice(), e.as_slice(), c))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
