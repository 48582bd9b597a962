//! Scenario, profile and distribution files.
//!
//! All files are JSON. Products and firms are referred to by id; positions in
//! arrays carry no meaning except for the per-segment `price` and `utility`
//! arrays, which follow the order of `segments`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ppm_core::portfolio::PortfolioDistribution;
use ppm_core::{
    validate_game, validate_profile, Error, Game, NamedProfile, RawGame, StrategyProfile,
};

use crate::error::{CliError, CliResult};

/// A validated scenario together with the digest of its bytes.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub path: PathBuf,
    pub sha256: String,
    pub game: Game,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> CliResult<Scenario> {
    let path = path.as_ref();
    let text = read(path)?;
    let game = parse_scenario(&text, path)?;
    Ok(Scenario {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
        game,
    })
}

/// `origin` only labels error messages.
pub fn parse_scenario(text: &str, origin: &Path) -> CliResult<Game> {
    let raw: RawGame = serde_json::from_str(text).map_err(|e| CliError::parse(origin, e))?;
    Ok(validate_game(&raw)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    /// Firm id → product id → mass.
    pub strategies: NamedProfile,
}

pub fn load_profile(path: impl AsRef<Path>, game: &Game) -> CliResult<StrategyProfile> {
    let path = path.as_ref();
    let file: ProfileFile =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::parse(path, e))?;
    Ok(validate_profile(game, &file.strategies)?)
}

pub fn write_profile(
    path: impl AsRef<Path>,
    game: &Game,
    profile: &StrategyProfile,
) -> CliResult<()> {
    let path = path.as_ref();
    let file = ProfileFile {
        strategies: profile.to_named(game),
    };
    let text =
        serde_json::to_string_pretty(&file).map_err(|e| CliError::Internal(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads `{product id: mass}` for one firm and returns masses by catalog
/// position. Omitted products get 0.
pub fn load_product_distribution(
    path: impl AsRef<Path>,
    game: &Game,
    firm: usize,
) -> CliResult<Vec<f64>> {
    let path = path.as_ref();
    let named: BTreeMap<String, f64> =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::parse(path, e))?;
    let mut row = vec![0.0; game.catalog_len(firm)];
    for (product, mass) in named {
        let k = game
            .product_index(&product)
            .and_then(|p| game.catalog_position(firm, p))
            .ok_or_else(|| Error::UnknownProduct {
                firm: game.firm_id(firm).to_string(),
                product: product.clone(),
            })?;
        row[k] = mass;
    }
    // reuse the profile checks for sign and normalization
    StrategyProfile::uniform(game).with_firm(game, firm, row.clone())?;
    Ok(row)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioEntry {
    pub products: Vec<String>,
    pub mass: f64,
}

pub fn load_portfolio_distribution(
    path: impl AsRef<Path>,
    game: &Game,
    firm: usize,
) -> CliResult<PortfolioDistribution> {
    let path = path.as_ref();
    let entries: Vec<PortfolioEntry> =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::parse(path, e))?;
    Ok(PortfolioDistribution::from_named(
        game,
        firm,
        entries.into_iter().map(|e| (e.products, e.mass)),
    )?)
}
