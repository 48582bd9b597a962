#![allow(dead_code)]

use ppm_core::model::{RawFirm, RawProduct, RawSegment};
use ppm_core::{validate_game, Game, RawGame};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Single-segment game; each firm is a list of (price, utility) pairs.
pub fn market(demand: f64, firms: &[&[(f64, f64)]]) -> Game {
    validate_game(&RawGame {
        segments: vec![RawSegment {
            id: "s".into(),
            demand,
        }],
        firms: firms
            .iter()
            .enumerate()
            .map(|(i, prods)| RawFirm {
                id: format!("f{i}"),
                products: prods
                    .iter()
                    .enumerate()
                    .map(|(k, &(price, utility))| RawProduct {
                        id: format!("f{i}p{k}"),
                        price: vec![price],
                        utility: vec![utility],
                    })
                    .collect(),
            })
            .collect(),
    })
    .unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
