//! Equilibrium analysis for the competitive product-portfolio game.
//!
//! Firms choose mixed strategies over their product catalogs; customers pick
//! products by multinomial logit; each firm earns expected shared surplus.
//! The crate evaluates payoffs, converts between portfolio- and
//! product-level mixed strategies, finds interior stationary points of
//! single-segment games in closed form, and certifies profiles through exact
//! best responses, a brute-force grid oracle and best-response dynamics.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod interior;
pub mod model;
pub mod oracle;
pub mod payoff;
pub mod portfolio;
pub mod random;
pub mod simplex;
pub mod verifier;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{validate_game, validate_profile, Game, NamedProfile, RawGame, StrategyProfile};
