//! Seeded random instances for property tests, benchmarks and sweeps.

use std::ops::RangeInclusive;

use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::model::{
    validate_game, Game, RawFirm, RawGame, RawProduct, RawSegment, StrategyProfile,
};
use crate::simplex;

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub firms: RangeInclusive<usize>,
    pub segments: RangeInclusive<usize>,
    /// Catalog size per firm.
    pub catalog: RangeInclusive<usize>,
    /// When set, catalogs are drawn from a shared pool of this many products
    /// (so firms may offer the same product id); otherwise catalogs are disjoint.
    pub shared_pool: Option<usize>,
    pub price: (f64, f64),
    pub utility: (f64, f64),
    pub demand: (f64, f64),
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            firms: 1..=4,
            segments: 1..=3,
            catalog: 1..=5,
            shared_pool: None,
            price: (1.0, 20.0),
            utility: (-2.0, 2.0),
            demand: (10.0, 1000.0),
        }
    }
}

impl InstanceSpec {
    /// Single-segment market with a fixed number of firms and catalog size.
    pub fn single_segment(firms: usize, catalog: usize) -> Self {
        Self {
            firms: firms..=firms,
            segments: 1..=1,
            catalog: catalog..=catalog,
            ..Self::default()
        }
    }
}

pub fn random_raw_game<R: Rng + ?Sized>(rng: &mut R, spec: &InstanceSpec) -> RawGame {
    let n = rng.random_range(spec.firms.clone());
    let m = rng.random_range(spec.segments.clone());
    let segments = (0..m)
        .map(|j| RawSegment {
            id: format!("S{j}"),
            demand: rng.random_range(spec.demand.0..=spec.demand.1),
        })
        .collect();
    let firms = (0..n)
        .map(|i| {
            let ids: Vec<String> = match spec.shared_pool {
                Some(pool) => {
                    let size = rng.random_range(spec.catalog.clone()).clamp(1, pool);
                    let mut picked: Vec<usize> = sample_indices(rng, pool, size).into_vec();
                    picked.sort_unstable();
                    picked.into_iter().map(|p| format!("P{p}")).collect()
                }
                None => {
                    let size = rng.random_range(spec.catalog.clone()).max(1);
                    (0..size).map(|k| format!("F{i}P{k}")).collect()
                }
            };
            RawFirm {
                id: format!("F{i}"),
                products: ids
                    .into_iter()
                    .map(|id| RawProduct {
                        id,
                        price: (0..m)
                            .map(|_| rng.random_range(spec.price.0..=spec.price.1))
                            .collect(),
                        utility: (0..m)
                            .map(|_| rng.random_range(spec.utility.0..=spec.utility.1))
                            .collect(),
                    })
                    .collect(),
            }
        })
        .collect();
    RawGame { segments, firms }
}

pub fn random_game<R: Rng + ?Sized>(rng: &mut R, spec: &InstanceSpec) -> Game {
    validate_game(&random_raw_game(rng, spec)).expect("generated instances are valid")
}

/// Random profile with every on-catalog mass at least `floor / |Z_i|`
/// (a mix of a uniform simplex sample and the uniform strategy).
pub fn random_interior_profile<R: Rng + ?Sized>(
    rng: &mut R,
    game: &Game,
    floor: f64,
) -> StrategyProfile {
    let masses = (0..game.n_firms())
        .map(|i| {
            let k = game.catalog_len(i);
            simplex::sample(rng, k)
                .into_iter()
                .map(|x| (1.0 - floor) * x + floor / k as f64)
                .collect()
        })
        .collect();
    StrategyProfile::from_masses_unchecked(masses)
}

/// Random profile drawn uniformly from each firm's simplex.
pub fn random_profile<R: Rng + ?Sized>(rng: &mut R, game: &Game) -> StrategyProfile {
    random_interior_profile(rng, game, 0.0)
}
