//! The three finite-support model classes.
//!
//! * ARUM: every atom is a finite shock vector.
//! * ARUM-E: shocks may be `-inf`; an alternative with `-inf` is never chosen.
//! * ARUM-CS: finite shocks plus a consideration set; the agent maximises
//!   `u_k + eps_k` over the consideration set only.
//!
//! Ties at the maximum are rejected with [`Error::ArgmaxTie`] instead of being
//! broken, since every class assumes a unique maximiser.

mod gumbel;
mod io;
mod monte_carlo;

pub use gumbel::{choice_prob_gumbel, social_surplus_gumbel, GumbelModel};
pub use io::{ModelFile, NEG_INF_LITERAL};
pub use monte_carlo::{monte_carlo_choice_prob, MonteCarloEstimate, ShockLaw, DRAWS_PER_STREAM};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::field::{ChoiceProbField, SimplexVector};
use crate::grid::{UtilityGrid, UtilityPoint};
use crate::scalar::{max_of, sum_of, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelClass {
    Arum,
    ArumE,
    ArumCs,
}

impl ModelClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelClass::Arum => "arum",
            ModelClass::ArumE => "arum_e",
            ModelClass::ArumCs => "arum_cs",
        }
    }
}

/// Where a transformed model came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub construction: String,
    /// SHA-256 of the source model's canonical JSON.
    pub source_hash: String,
}

/// A weighted shock vector; coordinates may be `-inf` in ARUM-E.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonAtom<T: Scalar> {
    pub eps: Vec<ExtendedReal<T>>,
    pub weight: T,
}

impl<T: Scalar> EpsilonAtom<T> {
    pub fn new(eps: Vec<ExtendedReal<T>>, weight: T) -> Self {
        EpsilonAtom { eps, weight }
    }

    pub fn finite(eps: Vec<T>, weight: T) -> Self {
        EpsilonAtom { eps: eps.into_iter().map(ExtendedReal::Finite).collect(), weight }
    }
}

/// A weighted (finite shock, consideration set) pair. The set is kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsiderationAtom<T: Scalar> {
    pub eps: Vec<T>,
    pub consideration_set: Vec<usize>,
    pub weight: T,
}

impl<T: Scalar> ConsiderationAtom<T> {
    pub fn new(eps: Vec<T>, mut consideration_set: Vec<usize>, weight: T) -> Self {
        consideration_set.sort_unstable();
        consideration_set.dedup();
        ConsiderationAtom { eps, consideration_set, weight }
    }

    pub fn considers(&self, k: usize) -> bool {
        self.consideration_set.binary_search(&k).is_ok()
    }
}

/// Per-atom choice behaviour shared by the engines.
pub trait ChoiceAtom<T: Scalar> {
    fn dim(&self) -> usize;

    fn weight(&self) -> &T;

    /// Unique maximiser of `u_j + eps_j` over feasible alternatives, `None`
    /// on a tie.
    fn choice_at(&self, u: &[T]) -> Option<usize>;

    /// `max_j (u_j + eps_j)` over feasible alternatives.
    fn best_value(&self, u: &[T]) -> T;

    /// `max_j eps_j` over all finite coordinates.
    fn max_shock(&self) -> T;

    /// `(j, eps_j)` for every alternative the atom can choose.
    fn feasible_shocks(&self) -> Vec<(usize, T)>;
}

fn unique_argmax<T: Scalar>(values: impl Iterator<Item = (usize, T)>) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    let mut tied = false;
    for (j, v) in values {
        match &best {
            Some((_, b)) if v < *b => {}
            Some((_, b)) if v == *b => tied = true,
            _ => {
                best = Some((j, v));
                tied = false;
            }
        }
    }
    if tied {
        None
    } else {
        best
    }
}

impl<T: Scalar> ChoiceAtom<T> for EpsilonAtom<T> {
    fn dim(&self) -> usize {
        self.eps.len()
    }

    fn weight(&self) -> &T {
        &self.weight
    }

    fn choice_at(&self, u: &[T]) -> Option<usize> {
        unique_argmax(
            self.eps
                .iter()
                .zip(u)
                .enumerate()
                .filter_map(|(j, (e, uj))| e.finite().map(|e| (j, uj.clone() + e.clone()))),
        )
        .map(|(j, _)| j)
    }

    fn best_value(&self, u: &[T]) -> T {
        max_of(self.eps.iter().zip(u).filter_map(|(e, uj)| e.finite().map(|e| uj.clone() + e.clone())))
            .expect("atom has a finite coordinate")
    }

    fn max_shock(&self) -> T {
        max_of(self.eps.iter().filter_map(|e| e.finite().cloned())).expect("atom has a finite coordinate")
    }

    fn feasible_shocks(&self) -> Vec<(usize, T)> {
        self.eps.iter().enumerate().filter_map(|(j, e)| e.finite().map(|e| (j, e.clone()))).collect()
    }
}

impl<T: Scalar> ChoiceAtom<T> for ConsiderationAtom<T> {
    fn dim(&self) -> usize {
        self.eps.len()
    }

    fn weight(&self) -> &T {
        &self.weight
    }

    fn choice_at(&self, u: &[T]) -> Option<usize> {
        unique_argmax(self.consideration_set.iter().map(|&j| (j, u[j].clone() + self.eps[j].clone()))).map(|(j, _)| j)
    }

    fn best_value(&self, u: &[T]) -> T {
        max_of(self.consideration_set.iter().map(|&j| u[j].clone() + self.eps[j].clone()))
            .expect("consideration set is nonempty")
    }

    fn max_shock(&self) -> T {
        max_of(self.eps.iter().cloned()).expect("atom has coordinates")
    }

    fn feasible_shocks(&self) -> Vec<(usize, T)> {
        self.consideration_set.iter().map(|&j| (j, self.eps[j].clone())).collect()
    }
}

/// Anything that maps utility points to choice probabilities and a social
/// surplus.
pub trait ChoiceModel<T: Scalar> {
    fn num_alternatives(&self) -> usize;

    fn choice_probabilities(&self, u: &UtilityPoint<T>) -> Result<SimplexVector<T>>;

    fn social_surplus(&self, u: &UtilityPoint<T>) -> Result<T>;
}

fn check_dim(expected: usize, u: &UtilityPoint<impl Scalar>) -> Result<()> {
    if u.dim() != expected {
        return Err(Error::DimensionMismatch { expected, found: u.dim() });
    }
    Ok(())
}

fn mixture_probs<T: Scalar, A: ChoiceAtom<T>>(atoms: &[A], u: &UtilityPoint<T>) -> Result<SimplexVector<T>> {
    let k = atoms[0].dim();
    check_dim(k, u)?;
    let mut p = vec![T::zero(); k];
    for (i, a) in atoms.iter().enumerate() {
        let j = a.choice_at(u.values()).ok_or_else(|| Error::tie(i, u.values()))?;
        p[j] = p[j].clone() + a.weight().clone();
    }
    Ok(SimplexVector::from_engine(p))
}

fn mixture_surplus<T: Scalar, A: ChoiceAtom<T>>(atoms: &[A], u: &UtilityPoint<T>) -> Result<T> {
    check_dim(atoms[0].dim(), u)?;
    Ok(sum_of(atoms.iter().map(|a| a.weight().clone() * (a.best_value(u.values()) - a.max_shock()))))
}

fn validate_weights<T: Scalar>(weights: impl Iterator<Item = T>) -> Result<()> {
    let mut total = T::zero();
    for w in weights {
        if w <= T::zero() || !w.is_finite_value() {
            return Err(Error::Invalid(format!("atom weight {} is not positive", w.repr())));
        }
        total = total + w;
    }
    if !total.approx_eq(&T::one()) {
        return Err(Error::Invalid(format!("atom weights sum to {}", total.repr())));
    }
    Ok(())
}

fn validate_dims(dims: impl Iterator<Item = usize>) -> Result<usize> {
    let mut k = None;
    for d in dims {
        match k {
            None if d < 2 => return Err(Error::Invalid("models need K >= 2".into())),
            None => k = Some(d),
            Some(k0) if k0 != d => return Err(Error::DimensionMismatch { expected: k0, found: d }),
            _ => {}
        }
    }
    k.ok_or_else(|| Error::Invalid("model has no atoms".into()))
}

macro_rules! distribution_common {
    ($name:ident, $atom:ident) => {
        impl<T: Scalar> $name<T> {
            pub fn atoms(&self) -> &[$atom<T>] {
                &self.atoms
            }

            pub fn provenance(&self) -> Option<&Provenance> {
                self.provenance.as_ref()
            }

            pub fn with_provenance(mut self, construction: &str, source_hash: String) -> Self {
                self.provenance = Some(Provenance { construction: construction.to_string(), source_hash });
                self
            }
        }

        impl<T: Scalar> ChoiceModel<T> for $name<T> {
            fn num_alternatives(&self) -> usize {
                self.atoms[0].dim()
            }

            fn choice_probabilities(&self, u: &UtilityPoint<T>) -> Result<SimplexVector<T>> {
                mixture_probs(&self.atoms, u)
            }

            fn social_surplus(&self, u: &UtilityPoint<T>) -> Result<T> {
                mixture_surplus(&self.atoms, u)
            }
        }

        impl<T: Scalar> FiniteMixture<T> for $name<T> {
            fn num_atoms(&self) -> usize {
                self.atoms.len()
            }

            fn atom_weight(&self, i: usize) -> &T {
                &self.atoms[i].weight
            }

            fn atom_choice(&self, i: usize, u: &[T]) -> Option<usize> {
                self.atoms[i].choice_at(u)
            }
        }
    };
}

/// Finite-support model: a weighted list of atoms with a deterministic
/// choice per atom.
pub trait FiniteMixture<T: Scalar>: ChoiceModel<T> {
    fn num_atoms(&self) -> usize;

    fn atom_weight(&self, i: usize) -> &T;

    fn atom_choice(&self, i: usize, u: &[T]) -> Option<usize>;
}

/// ARUM: all shocks finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ArumDistribution<T: Scalar> {
    atoms: Vec<EpsilonAtom<T>>,
    provenance: Option<Provenance>,
}

impl<T: Scalar> ArumDistribution<T> {
    pub fn new(atoms: Vec<EpsilonAtom<T>>) -> Result<Self> {
        validate_dims(atoms.iter().map(|a| a.eps.len()))?;
        if atoms.iter().any(|a| a.eps.iter().any(|e| !e.is_finite())) {
            return Err(Error::Invalid("ARUM shocks must all be finite".into()));
        }
        validate_weights(atoms.iter().map(|a| a.weight.clone()))?;
        Ok(ArumDistribution { atoms, provenance: None })
    }

    pub fn consideration_probability(&self, _k: usize) -> T {
        T::one()
    }
}
distribution_common!(ArumDistribution, EpsilonAtom);

/// ARUM-E: shocks in the extended reals, at least one finite per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ArumEDistribution<T: Scalar> {
    atoms: Vec<EpsilonAtom<T>>,
    provenance: Option<Provenance>,
}

impl<T: Scalar> ArumEDistribution<T> {
    pub fn new(atoms: Vec<EpsilonAtom<T>>) -> Result<Self> {
        validate_dims(atoms.iter().map(|a| a.eps.len()))?;
        if let Some(i) = atoms.iter().position(|a| a.eps.iter().all(|e| !e.is_finite())) {
            return Err(Error::Invalid(format!("atom {i} has no finite shock")));
        }
        validate_weights(atoms.iter().map(|a| a.weight.clone()))?;
        Ok(ArumEDistribution { atoms, provenance: None })
    }

    /// `Pr(eps_k > -inf)`.
    pub fn consideration_probability(&self, k: usize) -> T {
        sum_of(
            self.atoms.iter().filter(|a| a.eps.get(k).is_some_and(ExtendedReal::is_finite)).map(|a| a.weight.clone()),
        )
    }
}
distribution_common!(ArumEDistribution, EpsilonAtom);

impl<T: Scalar> From<ArumDistribution<T>> for ArumEDistribution<T> {
    fn from(d: ArumDistribution<T>) -> Self {
        ArumEDistribution { atoms: d.atoms, provenance: d.provenance }
    }
}

/// ARUM-CS: finite shocks and a nonempty consideration set per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ArumCsDistribution<T: Scalar> {
    atoms: Vec<ConsiderationAtom<T>>,
    provenance: Option<Provenance>,
}

impl<T: Scalar> ArumCsDistribution<T> {
    pub fn new(atoms: Vec<ConsiderationAtom<T>>) -> Result<Self> {
        let k = validate_dims(atoms.iter().map(|a| a.eps.len()))?;
        for (i, a) in atoms.iter().enumerate() {
            if a.consideration_set.is_empty() {
                return Err(Error::Invalid(format!("atom {i} has an empty consideration set")));
            }
            if a.consideration_set.iter().any(|&j| j >= k) {
                return Err(Error::Invalid(format!("atom {i} considers an alternative >= K")));
            }
            if a.eps.iter().any(|e| !e.is_finite_value()) {
                return Err(Error::Invalid(format!("atom {i} has a non-finite shock")));
            }
        }
        validate_weights(atoms.iter().map(|a| a.weight.clone()))?;
        Ok(ArumCsDistribution { atoms, provenance: None })
    }

    /// `Pr(k in S)`.
    pub fn consideration_probability(&self, k: usize) -> T {
        sum_of(self.atoms.iter().filter(|a| a.considers(k)).map(|a| a.weight.clone()))
    }
}
distribution_common!(ArumCsDistribution, ConsiderationAtom);

/// Any of the three model classes.
#[derive(Debug, Clone, PartialEq)]
pub enum Model<T: Scalar> {
    Arum(ArumDistribution<T>),
    ArumE(ArumEDistribution<T>),
    ArumCs(ArumCsDistribution<T>),
}

impl<T: Scalar> Model<T> {
    pub fn class(&self) -> ModelClass {
        match self {
            Model::Arum(_) => ModelClass::Arum,
            Model::ArumE(_) => ModelClass::ArumE,
            Model::ArumCs(_) => ModelClass::ArumCs,
        }
    }

    /// Probability that alternative `k` is considered (1 for ARUM).
    pub fn consideration_probability(&self, k: usize) -> T {
        match self {
            Model::Arum(d) => d.consideration_probability(k),
            Model::ArumE(d) => d.consideration_probability(k),
            Model::ArumCs(d) => d.consideration_probability(k),
        }
    }

    /// SHA-256 of the canonical model-file JSON.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(ModelFile::from_model(self).to_canonical_json().as_bytes()))
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        match self {
            Model::Arum(d) => d.provenance(),
            Model::ArumE(d) => d.provenance(),
            Model::ArumCs(d) => d.provenance(),
        }
    }

    fn inner(&self) -> &dyn FiniteMixture<T> {
        match self {
            Model::Arum(d) => d,
            Model::ArumE(d) => d,
            Model::ArumCs(d) => d,
        }
    }
}

impl<T: Scalar> ChoiceModel<T> for Model<T> {
    fn num_alternatives(&self) -> usize {
        self.inner().num_alternatives()
    }

    fn choice_probabilities(&self, u: &UtilityPoint<T>) -> Result<SimplexVector<T>> {
        self.inner().choice_probabilities(u)
    }

    fn social_surplus(&self, u: &UtilityPoint<T>) -> Result<T> {
        self.inner().social_surplus(u)
    }
}

impl<T: Scalar> FiniteMixture<T> for Model<T> {
    fn num_atoms(&self) -> usize {
        self.inner().num_atoms()
    }

    fn atom_weight(&self, i: usize) -> &T {
        self.inner().atom_weight(i)
    }

    fn atom_choice(&self, i: usize, u: &[T]) -> Option<usize> {
        self.inner().atom_choice(i, u)
    }
}

impl<T: Scalar> From<ArumDistribution<T>> for Model<T> {
    fn from(d: ArumDistribution<T>) -> Self {
        Model::Arum(d)
    }
}

impl<T: Scalar> From<ArumEDistribution<T>> for Model<T> {
    fn from(d: ArumEDistribution<T>) -> Self {
        Model::ArumE(d)
    }
}

impl<T: Scalar> From<ArumCsDistribution<T>> for Model<T> {
    fn from(d: ArumCsDistribution<T>) -> Self {
        Model::ArumCs(d)
    }
}

/// Choice probabilities at one utility point.
pub fn choice_prob_finite<T: Scalar, M: ChoiceModel<T> + ?Sized>(
    model: &M,
    u: &UtilityPoint<T>,
) -> Result<SimplexVector<T>> {
    model.choice_probabilities(u)
}

/// Choice probabilities at every grid point. A tie reports the offending atom
/// and point.
pub fn choice_prob_field<T: Scalar, M: ChoiceModel<T> + ?Sized>(
    model: &M,
    grid: &UtilityGrid<T>,
) -> Result<ChoiceProbField<T>> {
    let probs = grid.points().iter().map(|u| model.choice_probabilities(u)).collect::<Result<Vec<_>>>()?;
    ChoiceProbField::new(grid.clone(), probs)
}

/// `E[max_{k in S} (u_k + eps_k) - max_k eps_k]`.
pub fn social_surplus<T: Scalar, M: ChoiceModel<T> + ?Sized>(model: &M, u: &UtilityPoint<T>) -> Result<T> {
    model.social_surplus(u)
}
