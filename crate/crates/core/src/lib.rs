//! Additive random utility models with limited consideration: exact finite
//! mixtures, representation transforms, identified sets, counterfactual
//! bounds and welfare.

pub mod counterfactual;
pub mod equivalence;
pub mod error;
pub mod extended;
pub mod field;
pub mod grid;
pub mod identification;
pub mod instances;
pub mod models;
pub mod scalar;
pub mod welfare;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use field::{ChoiceProbField, Interval, SimplexVector};
pub use grid::{UtilityGrid, UtilityPoint};
pub use models::{
    choice_prob_field, choice_prob_finite, social_surplus, ArumCsDistribution, ArumDistribution, ArumEDistribution,
    ChoiceAtom, ChoiceModel, ConsiderationAtom, EpsilonAtom, FiniteMixture, Model, ModelClass,
};
pub use scalar::{Rational, Scalar};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
