use thiserror::Error;

/// Errors raised while validating inputs or running the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("game has no {0}")]
    EmptyGame(&'static str),
    #[error("firm `{firm}` has an empty catalog; a firm must offer at least one product")]
    EmptyCatalog { firm: String },
    #[error("price of product `{product}` for firm `{firm}` in segment `{segment}` must be positive and finite, got {value}")]
    NonpositivePrice {
        firm: String,
        segment: String,
        product: String,
        value: f64,
    },
    #[error("demand of segment `{segment}` must be positive and finite, got {value}")]
    NonpositiveDemand { segment: String, value: f64 },
    #[error("utility of product `{product}` for firm `{firm}` in segment `{segment}` is {value}; |u| must not exceed {limit}")]
    UtilityOutOfRange {
        firm: String,
        segment: String,
        product: String,
        value: f64,
        limit: f64,
    },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("product `{product}` of firm `{firm}` has {got} {field} entries, expected one per segment ({expected})")]
    SegmentArity {
        firm: String,
        product: String,
        field: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("unknown firm `{0}`")]
    UnknownFirm(String),
    #[error("unknown product `{product}` for firm `{firm}`")]
    UnknownProduct { firm: String, product: String },
    #[error("no strategy given for firm `{0}`")]
    MissingStrategy(String),
    #[error("firm `{firm}` puts mass {mass} on product `{product}` outside its catalog")]
    OffCatalogMass {
        firm: String,
        product: String,
        mass: f64,
    },
    #[error("strategy of firm `{firm}` has total mass {total}, expected 1")]
    NotNormalized { firm: String, total: f64 },
    #[error("strategy of firm `{firm}` has negative or non-finite mass {mass} on `{product}`")]
    NegativeMass {
        firm: String,
        product: String,
        mass: f64,
    },
    #[error("strategy for firm index {firm} has {got} entries, catalog has {expected}")]
    StrategyArity {
        firm: usize,
        got: usize,
        expected: usize,
    },
    #[error("firm index {0} out of range")]
    FirmIndex(usize),

    #[error("catalog of firm `{firm}` has {size} products, limit is {limit}")]
    CatalogTooLarge {
        firm: String,
        size: usize,
        limit: usize,
    },
    #[error("portfolio {subset:?} of firm `{firm}` is not a nonempty subset of its catalog")]
    InvalidPortfolio { firm: String, subset: Vec<String> },
    #[error("portfolio {subset:?} of firm `{firm}` is listed twice")]
    DuplicatePortfolio { firm: String, subset: Vec<String> },

    #[error("closed-form interior analysis needs a single segment, game has {0}")]
    MultiSegmentUnsupported(usize),
    #[error(
        "firm `{0}` has equal attractiveness on all products; use the equal-attractiveness solver"
    )]
    DegenerateAttractiveness(String),
    #[error(
        "firm `{0}` has attractiveness that differs but no reference product with a usable gap"
    )]
    NoValidReference(String),
    #[error("firm `{0}` is not degenerate: its attractiveness values differ")]
    NotDegenerate(String),
    #[error("firm `{firm}` has {size} product(s); interior analysis needs at least 2 per firm")]
    InteriorNeedsTwoProducts { firm: String, size: usize },
    #[error("reference-mass vector has {got} entries, expected {expected}")]
    TauArity { got: usize, expected: usize },
    #[error("reference masses place firm `{0}` outside the open simplex")]
    OutsideFamilyDomain(String),
    #[error("market denominator {0} is not positive on the affine family")]
    DenominatorNonpositive(f64),
    #[error("no interior stationary candidate found")]
    NoInteriorCandidate,

    #[error("grid resolution {0} must lie in (0, 1] and divide 1")]
    InvalidGrid(f64),
    #[error("grid has {count} profiles, limit is {limit}")]
    GridTooLarge { count: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
