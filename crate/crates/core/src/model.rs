//! Game instances and strategy profiles.
//!
//! A [`Game`] stores, per firm, the products it can offer together with the
//! per-segment price and utility of each. Products are identified globally by
//! id; the global enumeration is lexicographic by id so two loads of the same
//! scenario always agree on indices. Strategies are stored per firm over its
//! own catalog (catalog position `k` refers to `game.catalog(i)[k]`) and are
//! embedded into the global product enumeration on demand.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible |u|; keeps `exp(u)` comfortably inside `f64`.
pub const UTILITY_LIMIT: f64 = 30.0;

/// Tolerance on the total mass of a supplied strategy.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Unvalidated market description, mirroring the scenario file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGame {
    pub segments: Vec<RawSegment>,
    pub firms: Vec<RawFirm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSegment {
    pub id: String,
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFirm {
    pub id: String,
    pub products: Vec<RawProduct>,
}

/// One catalog entry; `price` and `utility` carry one value per segment, in
/// segment order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProduct {
    pub id: String,
    pub price: Vec<f64>,
    pub utility: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub id: String,
    pub demand: f64,
}

/// Per-firm market data indexed `[segment][catalog position]`.
#[derive(Debug, Clone, PartialEq)]
struct FirmData {
    id: String,
    catalog: Vec<usize>,
    price: Vec<Vec<f64>>,
    utility: Vec<Vec<f64>>,
    attraction: Vec<Vec<f64>>,
}

/// A validated product-portfolio game.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    segments: Vec<Segment>,
    products: Vec<String>,
    firms: Vec<FirmData>,
}

/// Validates a raw description and builds the global product enumeration.
pub fn validate_game(raw: &RawGame) -> Result<Game> {
    if raw.segments.is_empty() {
        return Err(Error::EmptyGame("segments"));
    }
    if raw.firms.is_empty() {
        return Err(Error::EmptyGame("firms"));
    }

    let mut seen = HashSet::new();
    for seg in &raw.segments {
        if !seen.insert(seg.id.as_str()) {
            return Err(Error::DuplicateId {
                kind: "segment",
                id: seg.id.clone(),
            });
        }
        if !(seg.demand > 0.0 && seg.demand.is_finite()) {
            return Err(Error::NonpositiveDemand {
                segment: seg.id.clone(),
                value: seg.demand,
            });
        }
    }
    let m = raw.segments.len();

    let mut seen = HashSet::new();
    let mut product_set = BTreeSet::new();
    for firm in &raw.firms {
        if !seen.insert(firm.id.as_str()) {
            return Err(Error::DuplicateId {
                kind: "firm",
                id: firm.id.clone(),
            });
        }
        if firm.products.is_empty() {
            return Err(Error::EmptyCatalog {
                firm: firm.id.clone(),
            });
        }
        let mut own = HashSet::new();
        for prod in &firm.products {
            if !own.insert(prod.id.as_str()) {
                return Err(Error::DuplicateId {
                    kind: "product",
                    id: format!("{}/{}", firm.id, prod.id),
                });
            }
            for (field, values) in [("price", &prod.price), ("utility", &prod.utility)] {
                if values.len() != m {
                    return Err(Error::SegmentArity {
                        firm: firm.id.clone(),
                        product: prod.id.clone(),
                        field,
                        got: values.len(),
                        expected: m,
                    });
                }
            }
            for (seg, (&price, &utility)) in raw
                .segments
                .iter()
                .zip(prod.price.iter().zip(&prod.utility))
            {
                if !(price > 0.0 && price.is_finite()) {
                    return Err(Error::NonpositivePrice {
                        firm: firm.id.clone(),
                        segment: seg.id.clone(),
                        product: prod.id.clone(),
                        value: price,
                    });
                }
                if utility.is_nan() || utility.abs() > UTILITY_LIMIT {
                    return Err(Error::UtilityOutOfRange {
                        firm: firm.id.clone(),
                        segment: seg.id.clone(),
                        product: prod.id.clone(),
                        value: utility,
                        limit: UTILITY_LIMIT,
                    });
                }
            }
            product_set.insert(prod.id.clone());
        }
    }

    let products: Vec<String> = product_set.into_iter().collect();
    let index_of = |id: &str| products.binary_search_by(|p| p.as_str().cmp(id)).unwrap();

    let firms = raw
        .firms
        .iter()
        .map(|firm| {
            let mut entries: Vec<(usize, &RawProduct)> =
                firm.products.iter().map(|p| (index_of(&p.id), p)).collect();
            entries.sort_by_key(|(idx, _)| *idx);
            let catalog = entries.iter().map(|(idx, _)| *idx).collect();
            let price: Vec<Vec<f64>> = (0..m)
                .map(|j| entries.iter().map(|(_, p)| p.price[j]).collect())
                .collect();
            let utility: Vec<Vec<f64>> = (0..m)
                .map(|j| entries.iter().map(|(_, p)| p.utility[j]).collect())
                .collect();
            let attraction = utility
                .iter()
                .map(|row| row.iter().map(|u| u.exp()).collect())
                .collect();
            FirmData {
                id: firm.id.clone(),
                catalog,
                price,
                utility,
                attraction,
            }
        })
        .collect();

    Ok(Game {
        segments: raw
            .segments
            .iter()
            .map(|s| Segment {
                id: s.id.clone(),
                demand: s.demand,
            })
            .collect(),
        products,
        firms,
    })
}

impl Game {
    pub fn n_firms(&self) -> usize {
        self.firms.len()
    }

    pub fn n_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn n_products(&self) -> usize {
        self.products.len()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn demand(&self, segment: usize) -> f64 {
        self.segments[segment].demand
    }

    pub fn firm_id(&self, firm: usize) -> &str {
        &self.firms[firm].id
    }

    pub fn firm_index(&self, id: &str) -> Option<usize> {
        self.firms.iter().position(|f| f.id == id)
    }

    /// Global product ids in enumeration order.
    pub fn products(&self) -> &[String] {
        &self.products
    }

    pub fn product_index(&self, id: &str) -> Option<usize> {
        self.products.binary_search_by(|p| p.as_str().cmp(id)).ok()
    }

    /// Global indices of firm `i`'s products, ascending.
    pub fn catalog(&self, firm: usize) -> &[usize] {
        &self.firms[firm].catalog
    }

    pub fn catalog_len(&self, firm: usize) -> usize {
        self.firms[firm].catalog.len()
    }

    /// Catalog position of global product `p` for `firm`, if offered.
    pub fn catalog_position(&self, firm: usize, product: usize) -> Option<usize> {
        self.firms[firm].catalog.binary_search(&product).ok()
    }

    pub fn catalog_product_id(&self, firm: usize, position: usize) -> &str {
        &self.products[self.firms[firm].catalog[position]]
    }

    /// Prices of `firm` in `segment`, by catalog position.
    pub fn prices(&self, firm: usize, segment: usize) -> &[f64] {
        &self.firms[firm].price[segment]
    }

    pub fn utilities(&self, firm: usize, segment: usize) -> &[f64] {
        &self.firms[firm].utility[segment]
    }

    /// `exp(utility)` of `firm` in `segment`, by catalog position.
    pub fn attractions(&self, firm: usize, segment: usize) -> &[f64] {
        &self.firms[firm].attraction[segment]
    }

    pub fn max_price(&self) -> f64 {
        self.firms
            .iter()
            .flat_map(|f| f.price.iter().flatten())
            .fold(0.0, |a, &b| a.max(b))
    }

    pub fn max_attraction(&self) -> f64 {
        self.firms
            .iter()
            .flat_map(|f| f.attraction.iter().flatten())
            .fold(0.0, |a, &b| a.max(b))
    }

    pub fn max_demand(&self) -> f64 {
        self.segments.iter().fold(0.0, |a, s| a.max(s.demand))
    }

    /// Payoff magnitude used to make tolerances scale-free: largest demand
    /// times largest price.
    pub fn payoff_scale(&self) -> f64 {
        self.max_demand() * self.max_price()
    }

    pub(crate) fn check_firm(&self, firm: usize) -> Result<()> {
        if firm < self.n_firms() {
            Ok(())
        } else {
            Err(Error::FirmIndex(firm))
        }
    }

    /// Rebuilds the raw description (products listed in catalog order).
    pub fn to_raw(&self) -> RawGame {
        RawGame {
            segments: self
                .segments
                .iter()
                .map(|s| RawSegment {
                    id: s.id.clone(),
                    demand: s.demand,
                })
                .collect(),
            firms: self
                .firms
                .iter()
                .map(|f| RawFirm {
                    id: f.id.clone(),
                    products: f
                        .catalog
                        .iter()
                        .enumerate()
                        .map(|(k, &p)| RawProduct {
                            id: self.products[p].clone(),
                            price: f.price.iter().map(|row| row[k]).collect(),
                            utility: f.utility.iter().map(|row| row[k]).collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Strategy masses keyed by firm id, then product id.
pub type NamedProfile = BTreeMap<String, BTreeMap<String, f64>>;

/// One mixed strategy per firm, each a distribution over that firm's catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    masses: Vec<Vec<f64>>,
}

impl StrategyProfile {
    /// Validates per-firm masses given by catalog position.
    pub fn from_catalog_masses(game: &Game, masses: Vec<Vec<f64>>) -> Result<Self> {
        if masses.len() != game.n_firms() {
            return Err(Error::EmptyGame("strategy for every firm"));
        }
        for (i, row) in masses.iter().enumerate() {
            check_firm_masses(game, i, row)?;
        }
        Ok(Self { masses })
    }

    /// Builds a profile without validation; callers guarantee the invariants.
    pub(crate) fn from_masses_unchecked(masses: Vec<Vec<f64>>) -> Self {
        Self { masses }
    }

    /// Every firm spreads its mass evenly over its catalog.
    pub fn uniform(game: &Game) -> Self {
        Self {
            masses: (0..game.n_firms())
                .map(|i| {
                    let len = game.catalog_len(i);
                    vec![1.0 / len as f64; len]
                })
                .collect(),
        }
    }

    /// Firm `i`'s masses by catalog position.
    pub fn firm(&self, firm: usize) -> &[f64] {
        &self.masses[firm]
    }

    pub fn masses(&self) -> &[Vec<f64>] {
        &self.masses
    }

    pub fn into_masses(self) -> Vec<Vec<f64>> {
        self.masses
    }

    /// Firm `i`'s strategy over the global product enumeration, zeros off-catalog.
    pub fn global(&self, game: &Game, firm: usize) -> Vec<f64> {
        let mut out = vec![0.0; game.n_products()];
        for (&p, &mass) in game.catalog(firm).iter().zip(&self.masses[firm]) {
            out[p] = mass;
        }
        out
    }

    /// Replaces firm `i`'s strategy after validating it.
    pub fn with_firm(&self, game: &Game, firm: usize, masses: Vec<f64>) -> Result<Self> {
        game.check_firm(firm)?;
        check_firm_masses(game, firm, &masses)?;
        let mut next = self.clone();
        next.masses[firm] = masses;
        Ok(next)
    }

    pub(crate) fn replace_firm(&mut self, firm: usize, masses: Vec<f64>) {
        self.masses[firm] = masses;
    }

    pub fn to_named(&self, game: &Game) -> NamedProfile {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let inner = row
                    .iter()
                    .enumerate()
                    .map(|(k, &mass)| (game.catalog_product_id(i, k).to_string(), mass))
                    .collect();
                (game.firm_id(i).to_string(), inner)
            })
            .collect()
    }

    /// Largest coordinate difference between two profiles of the same game.
    pub fn linf_distance(&self, other: &Self) -> f64 {
        self.masses
            .iter()
            .flatten()
            .zip(other.masses.iter().flatten())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

fn check_firm_masses(game: &Game, firm: usize, row: &[f64]) -> Result<()> {
    let expected = game.catalog_len(firm);
    if row.len() != expected {
        return Err(Error::StrategyArity {
            firm,
            got: row.len(),
            expected,
        });
    }
    for (k, &mass) in row.iter().enumerate() {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::NegativeMass {
                firm: game.firm_id(firm).to_string(),
                product: game.catalog_product_id(firm, k).to_string(),
                mass,
            });
        }
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::NotNormalized {
            firm: game.firm_id(firm).to_string(),
            total,
        });
    }
    Ok(())
}

/// Maps masses given by product id onto each firm's catalog. Omitted
/// on-catalog products receive mass 0; the result is never renormalized.
pub fn validate_profile(game: &Game, raw: &NamedProfile) -> Result<StrategyProfile> {
    for firm_id in raw.keys() {
        if game.firm_index(firm_id).is_none() {
            return Err(Error::UnknownFirm(firm_id.clone()));
        }
    }
    let mut masses = Vec::with_capacity(game.n_firms());
    for i in 0..game.n_firms() {
        let firm_id = game.firm_id(i);
        let entries = raw
            .get(firm_id)
            .ok_or_else(|| Error::MissingStrategy(firm_id.to_string()))?;
        let mut row = vec![0.0; game.catalog_len(i)];
        for (product_id, &mass) in entries {
            if !(mass >= 0.0 && mass.is_finite()) {
                return Err(Error::NegativeMass {
                    firm: firm_id.to_string(),
                    product: product_id.clone(),
                    mass,
                });
            }
            let position = game
                .product_index(product_id)
                .and_then(|p| game.catalog_position(i, p));
            match position {
                Some(k) => row[k] = mass,
                None if mass == 0.0 => {}
                None if game.product_index(product_id).is_some() => {
                    return Err(Error::OffCatalogMass {
                        firm: firm_id.to_string(),
                        product: product_id.clone(),
                        mass,
                    })
                }
                None => {
                    return Err(Error::UnknownProduct {
                        firm: firm_id.to_string(),
                        product: product_id.clone(),
                    })
                }
            }
        }
        check_firm_masses(game, i, &row)?;
        masses.push(row);
    }
    Ok(StrategyProfile { masses })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product(id: &str, price: f64, utility: f64) -> RawProduct {
        RawProduct {
            id: id.into(),
            price: vec![price],
            utility: vec![utility],
        }
    }

    fn raw(firms: Vec<(&str, Vec<RawProduct>)>) -> RawGame {
        RawGame {
            segments: vec![RawSegment {
                id: "s".into(),
                demand: 100.0,
            }],
            firms: firms
                .into_iter()
                .map(|(id, products)| RawFirm {
                    id: id.into(),
                    products,
                })
                .collect(),
        }
    }

    fn named(entries: &[(&str, &[(&str, f64)])]) -> NamedProfile {
        entries
            .iter()
            .map(|(f, ms)| {
                (
                    f.to_string(),
                    ms.iter().map(|(p, m)| (p.to_string(), *m)).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn minimal_instance() {
        let game = validate_game(&raw(vec![("f", vec![product("A", 10.0, 0.0)])])).unwrap();
        assert_eq!(game.n_firms(), 1);
        assert_eq!(game.n_segments(), 1);
        assert_eq!(game.n_products(), 1);
        assert_eq!(game.attractions(0, 0), &[1.0]);
    }

    #[test]
    fn empty_catalog_rejected() {
        let err = validate_game(&raw(vec![("f", vec![])])).unwrap_err();
        assert!(matches!(err, Error::EmptyCatalog { .. }));
    }

    #[test]
    fn utility_guard() {
        let err = validate_game(&raw(vec![("f", vec![product("A", 1.0, 40.0)])])).unwrap_err();
        assert!(matches!(err, Error::UtilityOutOfRange { .. }));
        assert!(validate_game(&raw(vec![("f", vec![product("A", 1.0, 30.0)])])).is_ok());
        let err = validate_game(&raw(vec![("f", vec![product("A", 1.0, f64::NAN)])])).unwrap_err();
        assert!(matches!(err, Error::UtilityOutOfRange { .. }));
    }

    #[test]
    fn price_and_demand_guards() {
        let err = validate_game(&raw(vec![("f", vec![product("A", 0.0, 0.0)])])).unwrap_err();
        assert!(matches!(err, Error::NonpositivePrice { .. }));
        let mut g = raw(vec![("f", vec![product("A", 1.0, 0.0)])]);
        g.segments[0].demand = -5.0;
        match validate_game(&g).unwrap_err() {
            Error::NonpositiveDemand { segment, .. } => assert_eq!(segment, "s"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids() {
        let err = validate_game(&raw(vec![
            ("f", vec![product("A", 1.0, 0.0)]),
            ("f", vec![product("B", 1.0, 0.0)]),
        ]))
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId { kind: "firm", .. }));
        let err = validate_game(&raw(vec![(
            "f",
            vec![product("A", 1.0, 0.0), product("A", 2.0, 0.0)],
        )]))
        .unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicateId {
                kind: "product",
                ..
            }
        ));
    }

    #[test]
    fn arity_mismatch() {
        let mut g = raw(vec![("f", vec![product("A", 1.0, 0.0)])]);
        g.firms[0].products[0].utility.push(1.0);
        assert!(matches!(
            validate_game(&g).unwrap_err(),
            Error::SegmentArity {
                field: "utility",
                ..
            }
        ));
    }

    #[test]
    fn enumeration_is_lexicographic_and_shared() {
        let game = validate_game(&raw(vec![
            ("f", vec![product("C", 1.0, 0.0), product("A", 2.0, 1.0)]),
            ("g", vec![product("A", 3.0, 0.0)]),
        ]))
        .unwrap();
        assert_eq!(game.products(), &["A".to_string(), "C".to_string()]);
        assert_eq!(game.catalog(0), &[0, 1]);
        assert_eq!(game.catalog(1), &[0]);
        // catalog order follows the enumeration, data travels with it
        assert_eq!(game.prices(0, 0), &[2.0, 1.0]);
        assert_eq!(game.to_raw().firms[0].products[0].id, "A");
        assert_eq!(validate_game(&game.to_raw()).unwrap(), game);
    }

    fn two_product_game() -> Game {
        validate_game(&raw(vec![
            ("f", vec![product("A", 1.0, 0.0), product("B", 1.0, 0.0)]),
            ("g", vec![product("C", 1.0, 0.0)]),
        ]))
        .unwrap()
    }

    #[test]
    fn profile_singleton_simplex() {
        let game = validate_game(&raw(vec![("f", vec![product("A", 1.0, 0.0)])])).unwrap();
        let p = validate_profile(&game, &named(&[("f", &[("A", 1.0)])])).unwrap();
        assert_eq!(p.firm(0), &[1.0]);
    }

    #[test]
    fn profile_errors() {
        let game = two_product_game();
        let err = validate_profile(
            &game,
            &named(&[("f", &[("A", 0.6), ("B", 0.6)]), ("g", &[("C", 1.0)])]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));

        let err = validate_profile(
            &game,
            &named(&[("f", &[("A", 0.5), ("C", 0.5)]), ("g", &[("C", 1.0)])]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::OffCatalogMass { .. }));

        let err = validate_profile(
            &game,
            &named(&[("f", &[("A", 1.5), ("B", -0.5)]), ("g", &[("C", 1.0)])]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NegativeMass { .. }));

        let err = validate_profile(&game, &named(&[("f", &[("A", 1.0)])])).unwrap_err();
        assert!(matches!(err, Error::MissingStrategy(_)));

        let err = validate_profile(&game, &named(&[("f", &[("Z", 1.0)]), ("g", &[("C", 1.0)])]))
            .unwrap_err();
        assert!(matches!(err, Error::UnknownProduct { .. }));
    }

    #[test]
    fn omitted_products_get_zero_and_global_embedding() {
        let game = two_product_game();
        let p = validate_profile(
            &game,
            &named(&[("f", &[("B", 1.0), ("C", 0.0)]), ("g", &[("C", 1.0)])]),
        )
        .unwrap();
        assert_eq!(p.firm(0), &[0.0, 1.0]);
        assert_eq!(p.global(&game, 0), vec![0.0, 1.0, 0.0]);
        assert_eq!(p.global(&game, 1), vec![0.0, 0.0, 1.0]);
        assert_eq!(validate_profile(&game, &p.to_named(&game)).unwrap(), p);
    }
}
