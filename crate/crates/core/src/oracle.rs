//! Exhaustive search for approximate equilibria on a discretized simplex.
//!
//! Every firm is restricted to the simplex points whose coordinates are
//! multiples of `h`. A grid profile is returned when no firm can gain more
//! than `eps` by moving to another grid point of its own simplex. The search
//! shares no code path with the solvers beyond the payoff formula.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{Game, StrategyProfile};
use crate::payoff::ResponseObjective;

/// Upper bound on the number of grid profiles visited.
pub const MAX_GRID_PROFILES: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub resolution: f64,
    divisions: usize,
}

impl GridSpec {
    /// `h` must divide 1 (to within 1e-9).
    pub fn new(resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution <= 1.0) {
            return Err(Error::InvalidGrid(resolution));
        }
        let divisions = (1.0 / resolution).round();
        if (divisions * resolution - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidGrid(resolution));
        }
        Ok(Self {
            resolution,
            divisions: divisions as usize,
        })
    }

    /// Default resolution: fine for two firms with two products each, coarse
    /// otherwise.
    pub fn default_for(game: &Game) -> Self {
        let small = game.n_firms() == 2 && (0..2).all(|i| game.catalog_len(i) == 2);
        Self::new(if small { 0.005 } else { 0.05 }).expect("static resolution")
    }

    pub fn divisions(&self) -> usize {
        self.divisions
    }

    /// `C(1/h + k − 1, k − 1)` grid points on a `k`-product simplex.
    pub fn points_on_simplex(&self, k: usize) -> f64 {
        let n = self.divisions as f64;
        (1..k).fold(1.0, |acc, r| acc * (n + r as f64) / r as f64)
    }

    /// Total number of grid profiles for `game`.
    pub fn profile_count(&self, game: &Game) -> f64 {
        (0..game.n_firms())
            .map(|i| self.points_on_simplex(game.catalog_len(i)).round())
            .product()
    }

    /// All grid points of the `k`-product simplex in lexicographic order.
    pub fn simplex_points(&self, k: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let mut counts = vec![0usize; k];
        compositions(self.divisions, 0, &mut counts, &mut |c| {
            out.push(
                c.iter()
                    .map(|&x| x as f64 / self.divisions as f64)
                    .collect(),
            )
        });
        out
    }
}

fn compositions(
    remaining: usize,
    pos: usize,
    counts: &mut [usize],
    emit: &mut impl FnMut(&[usize]),
) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        emit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        compositions(remaining - c, pos + 1, counts, emit);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEquilibrium {
    pub profile: StrategyProfile,
    /// Grid-restricted regret of each firm.
    pub regrets: Vec<f64>,
}

impl GridEquilibrium {
    pub fn max_regret(&self) -> f64 {
        self.regrets.iter().fold(0.0, |a, &b| a.max(b))
    }
}

pub fn grid_search_equilibria(
    game: &Game,
    grid: &GridSpec,
    eps: f64,
) -> Result<Vec<GridEquilibrium>> {
    grid_search_equilibria_with(game, grid, eps, Execution::default())
}

/// Returns every grid profile whose grid-restricted regret is at most `eps`
/// (absolute payoff units), in lexicographic order of the profile index.
pub fn grid_search_equilibria_with(
    game: &Game,
    grid: &GridSpec,
    eps: f64,
    execution: Execution,
) -> Result<Vec<GridEquilibrium>> {
    let count = grid.profile_count(game);
    if count > MAX_GRID_PROFILES {
        return Err(Error::GridTooLarge {
            count,
            limit: MAX_GRID_PROFILES,
        });
    }
    let n = game.n_firms();
    let points: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| grid.simplex_points(game.catalog_len(i)))
        .collect();
    let sizes: Vec<usize> = points.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();

    let decode = |mut index: usize, digits: &mut [usize]| {
        for i in (0..n).rev() {
            digits[i] = index % sizes[i];
            index /= sizes[i];
        }
    };
    let masses_of = |digits: &[usize]| -> Vec<Vec<f64>> {
        digits
            .iter()
            .enumerate()
            .map(|(i, &d)| points[i][d].clone())
            .collect()
    };
    // index of the opponents' configuration: the profile digits with firm i removed
    let opponent_index = |digits: &[usize], firm: usize| {
        (0..n)
            .filter(|&r| r != firm)
            .fold(0usize, |acc, r| acc * sizes[r] + digits[r])
    };

    // best grid deviation value of each firm against each opponent configuration
    let best_deviation: Vec<Vec<f64>> = (0..n)
        .map(|firm| {
            let configs = total / sizes[firm];
            execution.map_range(configs, |mut config| {
                let mut digits = vec![0usize; n];
                for r in (0..n).rev().filter(|&r| r != firm) {
                    digits[r] = config % sizes[r];
                    config /= sizes[r];
                }
                let masses = masses_of(&digits);
                let objective = ResponseObjective::new(game, &masses, firm);
                points[firm]
                    .iter()
                    .map(|g| objective.value(g))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
        })
        .collect();

    Ok(execution.filter_map_range(total, |index| {
        let mut digits = vec![0usize; n];
        decode(index, &mut digits);
        let masses = masses_of(&digits);
        let mut regrets = Vec::with_capacity(n);
        for firm in 0..n {
            // same arithmetic as the deviation values, so a best grid point has regret exactly 0
            let current = ResponseObjective::new(game, &masses, firm).value(&masses[firm]);
            let regret = best_deviation[firm][opponent_index(&digits, firm)] - current;
            if regret > eps {
                return None;
            }
            regrets.push(regret);
        }
        Some(GridEquilibrium {
            profile: StrategyProfile::from_masses_unchecked(masses),
            regrets,
        })
    }))
}
