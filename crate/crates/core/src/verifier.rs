//! Best responses and regret certification.
//!
//! For single-segment games the exact best response is found by visiting
//! every support `T` of the firm's catalog. On a support the equal-partials
//! condition puts the strategy on `σ_s(k) = (1 − k E_s)/B_s` (the same gap
//! and scale constants as the interior reduction, restricted to `T`), and the
//! self-consistency `2 k D(k) = N(k)` is a quadratic in `k`, so each support
//! contributes at most two stationary points besides the vertices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{Game, StrategyProfile};
use crate::payoff::{self, ResponseObjective};
use crate::simplex;

/// Largest catalog handled by support enumeration.
pub const MAX_ENUMERATION_CATALOG: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponse {
    /// Strategy by catalog position.
    pub strategy: Vec<f64>,
    pub value: f64,
}

/// Exact best response of `firm` to the other strategies in `profile`.
pub fn best_response_m1(
    game: &Game,
    firm: usize,
    profile: &StrategyProfile,
) -> Result<BestResponse> {
    game.check_firm(firm)?;
    if game.n_segments() != 1 {
        return Err(Error::MultiSegmentUnsupported(game.n_segments()));
    }
    let k = game.catalog_len(firm);
    if k > MAX_ENUMERATION_CATALOG {
        return Err(Error::CatalogTooLarge {
            firm: game.firm_id(firm).to_string(),
            size: k,
            limit: MAX_ENUMERATION_CATALOG,
        });
    }
    let objective = ResponseObjective::new(game, profile.masses(), firm);
    let beta = game.prices(firm, 0);
    let e = game.attractions(firm, 0);
    let c = objective.offsets()[0];

    let mut best = BestResponse {
        strategy: Vec::new(),
        value: f64::NEG_INFINITY,
    };
    let mut consider = |sigma: Vec<f64>| {
        let value = objective.value(&sigma);
        if value > best.value {
            best = BestResponse {
                strategy: sigma,
                value,
            };
        }
    };
    for s in 0..k {
        consider(simplex::vertex(k, s));
    }
    for mask in 1u32..(1 << k) {
        if mask.count_ones() < 2 {
            continue;
        }
        let support: Vec<usize> = (0..k).filter(|s| mask & (1 << s) != 0).collect();
        for point in support_stationary_points(beta, e, c, &support) {
            let mut sigma = vec![0.0; k];
            for (&s, &v) in support.iter().zip(&point) {
                sigma[s] = v;
            }
            consider(sigma);
        }
    }
    Ok(best)
}

/// Stationary points of `Σ w σ² / (c + Σ e σ)` in the relative interior of
/// the face spanned by `support` (masses listed in support order).
fn support_stationary_points(beta: &[f64], e: &[f64], c: f64, support: &[usize]) -> Vec<Vec<f64>> {
    let inv_total: f64 = support.iter().map(|&s| 1.0 / (beta[s] * e[s])).sum();
    let gap: Vec<f64> = support
        .iter()
        .map(|&t| {
            support
                .iter()
                .map(|&p| (e[p] - e[t]) / (beta[p] * e[p]))
                .sum()
        })
        .collect();
    let scale: Vec<f64> = support
        .iter()
        .map(|&s| beta[s] * e[s] * inv_total)
        .collect();
    // σ_s(k) = α_s + γ_s k
    let alpha: Vec<f64> = scale.iter().map(|b| 1.0 / b).collect();
    let gamma: Vec<f64> = gap.iter().zip(&scale).map(|(g, b)| -g / b).collect();

    let gap_size = gap.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let interior = |sigma: &[f64]| sigma.iter().all(|&x| x > 0.0);
    if gap_size <= 1e-12 * inv_total {
        // equal attractiveness on the support: the point does not depend on k
        return if interior(&alpha) {
            vec![alpha]
        } else {
            Vec::new()
        };
    }

    let (mut d0, mut d1) = (c, 0.0);
    let (mut n0, mut n1, mut n2) = (0.0, 0.0, 0.0);
    for (idx, &s) in support.iter().enumerate() {
        let w = beta[s] * e[s];
        d0 += e[s] * alpha[idx];
        d1 += e[s] * gamma[idx];
        n0 += w * alpha[idx] * alpha[idx];
        n1 += 2.0 * w * alpha[idx] * gamma[idx];
        n2 += w * gamma[idx] * gamma[idx];
    }
    let roots = crate::interior::quadratic_roots(2.0 * d1 - n2, 2.0 * d0 - n1, -n0);
    roots
        .into_iter()
        .map(|k| {
            alpha
                .iter()
                .zip(&gamma)
                .map(|(a, g)| a + g * k)
                .collect::<Vec<f64>>()
        })
        .filter(|sigma| interior(sigma))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericOptions {
    pub starts: usize,
    /// Stop when an ascent step moves less than this (∞-norm).
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            starts: 16,
            tol: 1e-12,
            max_iter: 2000,
            seed: 0,
        }
    }
}

/// One projected-gradient ascent run.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentRun {
    pub point: Vec<f64>,
    pub value: f64,
    /// Objective after every accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

/// Projected gradient ascent on the simplex with Armijo backtracking.
pub fn projected_gradient_ascent(
    objective: &ResponseObjective,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> AscentRun {
    let mut x = simplex::project(start);
    let mut value = objective.value(&x);
    let mut history = vec![value];
    let mut step = 1.0;
    for _ in 0..max_iter {
        let grad = objective.gradient(&x);
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm == 0.0 {
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x
                .iter()
                .zip(&grad)
                .map(|(xi, gi)| xi + step * gi / gnorm)
                .collect();
            let next = simplex::project(&trial);
            let ascent: f64 = grad
                .iter()
                .zip(next.iter().zip(&x))
                .map(|(g, (n, o))| g * (n - o))
                .sum();
            let v = objective.value(&next);
            if v >= value + 1e-4 * ascent && v >= value {
                accepted = Some((next, v));
                break;
            }
            step *= 0.5;
        }
        let Some((next, v)) = accepted else { break };
        let moved = next
            .iter()
            .zip(&x)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        x = next;
        value = v;
        history.push(v);
        if moved <= tol {
            break;
        }
        step = (step * 2.0).min(1.0);
    }
    AscentRun {
        point: x,
        value,
        history,
    }
}

/// Best local optimum of firm `i`'s payoff over seeded random starts, all
/// vertices and its current strategy. The value is a lower bound on the true
/// best-response value.
pub fn best_response_numeric(
    game: &Game,
    firm: usize,
    profile: &StrategyProfile,
    options: &NumericOptions,
) -> Result<BestResponse> {
    game.check_firm(firm)?;
    let objective = ResponseObjective::new(game, profile.masses(), firm);
    let k = game.catalog_len(firm);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ (firm as u64).wrapping_mul(0x9E37_79B9));
    let mut starts: Vec<Vec<f64>> = (0..k).map(|s| simplex::vertex(k, s)).collect();
    starts.push(profile.firm(firm).to_vec());
    starts.extend((0..options.starts).map(|_| simplex::sample(&mut rng, k)));

    let mut best = BestResponse {
        strategy: Vec::new(),
        value: f64::NEG_INFINITY,
    };
    for start in &starts {
        let run = projected_gradient_ascent(&objective, start, options.tol, options.max_iter);
        if run.value > best.value {
            best = BestResponse {
                strategy: run.point,
                value: run.value,
            };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SupportEnumeration,
    NumericMultiStart,
}

impl Method {
    pub fn is_exact(self) -> bool {
        self == Method::SupportEnumeration
    }
}

/// Picks the strongest best-response method available for `firm`.
pub fn best_response(
    game: &Game,
    firm: usize,
    profile: &StrategyProfile,
    options: &NumericOptions,
) -> Result<(BestResponse, Method)> {
    if game.n_segments() == 1 && game.catalog_len(firm) <= MAX_ENUMERATION_CATALOG {
        Ok((
            best_response_m1(game, firm, profile)?,
            Method::SupportEnumeration,
        ))
    } else {
        Ok((
            best_response_numeric(game, firm, profile, options)?,
            Method::NumericMultiStart,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirmRegret {
    pub firm: usize,
    pub payoff: f64,
    pub best_value: f64,
    pub regret: f64,
    pub best_response: Vec<f64>,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub firms: Vec<FirmRegret>,
    /// Largest regret over firms.
    pub epsilon: f64,
    /// Payoff scale `max Q · max β` that relative tolerances refer to.
    pub scale: f64,
    /// Relative tolerance the profile was tested against.
    pub tolerance: f64,
    pub is_epsilon_nash: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyOptions {
    pub numeric: NumericOptions,
    pub execution: Execution,
}

/// Regret of every firm; the profile is an ε-Nash equilibrium iff the largest
/// regret is at most `eps · scale`.
pub fn profile_regret(
    game: &Game,
    profile: &StrategyProfile,
    eps: f64,
    options: &VerifyOptions,
) -> Result<RegretReport> {
    let results = options.execution.map_range(game.n_firms(), |i| {
        let payoff = payoff::payoff_at(game, profile.masses(), i);
        best_response(game, i, profile, &options.numeric).map(|(br, method)| FirmRegret {
            firm: i,
            payoff,
            best_value: br.value,
            regret: br.value - payoff,
            best_response: br.strategy,
            method,
        })
    });
    let firms = results.into_iter().collect::<Result<Vec<_>>>()?;
    let epsilon = firms.iter().fold(0.0f64, |m, f| m.max(f.regret));
    let scale = game.payoff_scale();
    Ok(RegretReport {
        is_epsilon_nash: epsilon <= eps * scale,
        firms,
        epsilon,
        scale,
        tolerance: eps,
    })
}
