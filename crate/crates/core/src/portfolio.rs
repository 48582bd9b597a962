//! Conversions between distributions over pure portfolios (nonempty subsets
//! of a catalog) and distributions over individual products.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Game, MASS_TOLERANCE};

/// Largest catalog whose portfolios we are willing to enumerate.
pub const MAX_PORTFOLIO_CATALOG: usize = 20;

/// All nonempty subsets of one firm's catalog, ordered by cardinality and
/// then lexicographically by member index.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioEnumeration {
    pub firm: usize,
    /// Members of each subset as global product indices, ascending.
    pub subsets: Vec<Vec<usize>>,
    /// How many subsets contain each catalog product, by catalog position.
    pub counts: Vec<u64>,
    catalog: Vec<usize>,
}

impl PortfolioEnumeration {
    pub fn catalog(&self) -> &[usize] {
        &self.catalog
    }

    fn position(&self, product: usize) -> Option<usize> {
        self.catalog.binary_search(&product).ok()
    }
}

pub fn enumerate_portfolios(game: &Game, firm: usize) -> Result<PortfolioEnumeration> {
    game.check_firm(firm)?;
    let catalog = game.catalog(firm).to_vec();
    let k = catalog.len();
    if k > MAX_PORTFOLIO_CATALOG {
        return Err(Error::CatalogTooLarge {
            firm: game.firm_id(firm).to_string(),
            size: k,
            limit: MAX_PORTFOLIO_CATALOG,
        });
    }
    let mut subsets = Vec::with_capacity((1usize << k) - 1);
    for size in 1..=k {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            subsets.push(idx.iter().map(|&x| catalog[x]).collect());
            // advance to the next combination in lexicographic order
            let Some(pos) = (0..size).rev().find(|&p| idx[p] < k - size + p) else {
                break;
            };
            idx[pos] += 1;
            for q in pos + 1..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    Ok(PortfolioEnumeration {
        firm,
        subsets,
        counts: vec![1u64 << (k - 1); k],
        catalog,
    })
}

/// A mixed strategy over pure portfolios. Keys are ascending global product
/// indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioDistribution {
    pub firm: usize,
    pub mass: BTreeMap<Vec<usize>, f64>,
}

impl PortfolioDistribution {
    /// Validates masses keyed by product-id lists.
    pub fn from_named<I, S>(game: &Game, firm: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<S>, f64)>,
        S: AsRef<str>,
    {
        game.check_firm(firm)?;
        let firm_id = game.firm_id(firm).to_string();
        let mut mass = BTreeMap::new();
        for (names, value) in entries {
            let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
            let invalid = || Error::InvalidPortfolio {
                firm: firm_id.clone(),
                subset: names.clone(),
            };
            let mut key = Vec::with_capacity(names.len());
            for name in &names {
                let p = game.product_index(name).ok_or_else(invalid)?;
                game.catalog_position(firm, p).ok_or_else(invalid)?;
                key.push(p);
            }
            key.sort_unstable();
            key.dedup();
            if key.is_empty() || key.len() != names.len() {
                return Err(invalid());
            }
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::NegativeMass {
                    firm: firm_id.clone(),
                    product: names.join("+"),
                    mass: value,
                });
            }
            if mass.insert(key, value).is_some() {
                return Err(Error::DuplicatePortfolio {
                    firm: firm_id.clone(),
                    subset: names,
                });
            }
        }
        let total: f64 = mass.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotNormalized {
                firm: firm_id,
                total,
            });
        }
        Ok(Self { firm, mass })
    }

    pub fn total(&self) -> f64 {
        self.mass.values().sum()
    }

    /// Entries in enumeration order; subsets absent from the map get 0.
    pub fn ordered(&self, enumeration: &PortfolioEnumeration) -> Vec<(Vec<usize>, f64)> {
        enumeration
            .subsets
            .iter()
            .map(|s| (s.clone(), self.mass.get(s).copied().unwrap_or(0.0)))
            .collect()
    }
}

/// `σ(p) = Σ_{Λ∋p} σ̂(Λ)/|Λ|`, by catalog position.
pub fn portfolio_to_product(
    enumeration: &PortfolioEnumeration,
    dist: &PortfolioDistribution,
) -> Vec<f64> {
    let mut sigma = vec![0.0; enumeration.catalog.len()];
    for (subset, &mass) in &dist.mass {
        let share = mass / subset.len() as f64;
        for &p in subset {
            if let Some(k) = enumeration.position(p) {
                sigma[k] += share;
            }
        }
    }
    sigma
}

/// `σ̂(Λ) = Σ_{p∈Λ} σ(p)/c_p` for every subset of the enumeration.
pub fn product_to_portfolio(
    enumeration: &PortfolioEnumeration,
    sigma: &[f64],
) -> PortfolioDistribution {
    let scaled: Vec<f64> = sigma
        .iter()
        .zip(&enumeration.counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let mass = enumeration
        .subsets
        .iter()
        .map(|subset| {
            let m = subset
                .iter()
                .filter_map(|&p| enumeration.position(p))
                .map(|k| scaled[k])
                .sum();
            (subset.clone(), m)
        })
        .collect();
    PortfolioDistribution {
        firm: enumeration.firm,
        mass,
    }
}
