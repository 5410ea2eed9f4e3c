//! Counterfactual bounds.
//!
//! Attention interventions add an alternative to every consideration set; the
//! largest attainable rise in its choice probability is `1 - sup_u p_k(u)`.
//! Utility-index interventions are bounded by a linear program over the
//! weights of a declared finite atom family, giving an inner approximation of
//! the identified set at the counterfactual point.

mod simplex;

use serde::Serialize;

use crate::equivalence::arum_e_to_cs;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::field::{ChoiceProbField, Interval};
use crate::grid::{parse_axis, UtilityGrid, UtilityPoint};
use crate::identification::{sup_choice_prob, witness_lower_endpoint};
use crate::models::{
    choice_prob_field, ArumCsDistribution, ArumEDistribution, ChoiceAtom, ConsiderationAtom, EpsilonAtom, ModelClass,
};
use crate::scalar::{max_of, Rational, Scalar};

use simplex::FeasibleRegion;

pub const ATTENTION_WITNESS: &str = "attention_max_change_witness";

/// Adds `k` to every consideration set.
pub fn attention_intervention_apply<T: Scalar>(nu: &ArumCsDistribution<T>, k: usize) -> Result<ArumCsDistribution<T>> {
    let atoms = nu
        .atoms()
        .iter()
        .map(|a| {
            let mut set = a.consideration_set.clone();
            set.push(k);
            ConsiderationAtom::new(a.eps.clone(), set, a.weight.clone())
        })
        .collect();
    ArumCsDistribution::new(atoms)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionChangeReport<T: Scalar> {
    pub k: usize,
    pub lower: T,
    pub upper: T,
    /// A rationalisation of the field whose intervention attains `upper`.
    /// Only built when a rationalising model is supplied.
    pub witness: Option<ArumCsDistribution<T>>,
    /// `p^{S u k}_k(u) - p_k(u)` for the witness, per grid point.
    pub per_point_change: Vec<(UtilityPoint<T>, T)>,
}

impl<T: Scalar> AttentionChangeReport<T> {
    pub fn interval(&self) -> Interval<T> {
        Interval::closed(self.lower.clone(), self.upper.clone()).expect("lower <= upper")
    }

    pub fn realized_max_change(&self) -> Option<T> {
        max_of(self.per_point_change.iter().map(|(_, c)| c.clone()))
    }
}

/// `[0, 1 - sup p_k]`, with a witness built from `nu` when given.
pub fn attention_max_change_set<T: Scalar>(
    field: &ChoiceProbField<T>,
    k: usize,
    nu: Option<&ArumCsDistribution<T>>,
) -> Result<AttentionChangeReport<T>> {
    let grid = field.grid();
    if k >= field.num_alternatives() {
        return Err(Error::Invalid(format!("alternative {k} out of range")));
    }
    grid.k_maximal_point(k).ok_or(Error::NoKMaximalPoint { k })?;
    let upper = T::one() - sup_choice_prob(field, k).0;
    let (witness, per_point_change) = match nu {
        None => (None, Vec::new()),
        Some(nu) => {
            let own = choice_prob_field(nu, grid)?;
            let tol = if T::EXACT { T::zero() } else { T::from_f64(crate::scalar::FLOAT_TOLERANCE).expect("finite") };
            if own.discrepancies(field)?.into_iter().any(|d| d > tol) {
                return Err(Error::Invalid("supplied model does not rationalise the field".into()));
            }
            let w = attention_witness(nu, grid, k)?;
            let before = choice_prob_field(&w, grid)?;
            let after = choice_prob_field(&attention_intervention_apply(&w, k)?, grid)?;
            let change = before
                .iter()
                .zip(after.probs())
                .map(|((u, p), q)| (u.clone(), q.get(k).clone() - p.get(k).clone()))
                .collect();
            (Some(w), change)
        }
    };
    Ok(AttentionChangeReport { k, lower: T::zero(), upper, witness, per_point_change })
}

/// Start from a rationalisation with `Pr(k in S) = sup p_k`, then give `k` a
/// shock large enough to win at every grid point wherever it is ignored.
fn attention_witness<T: Scalar>(
    nu: &ArumCsDistribution<T>,
    grid: &UtilityGrid<T>,
    k: usize,
) -> Result<ArumCsDistribution<T>> {
    let companion = arum_e_to_cs(&witness_lower_endpoint(nu, grid, k)?);
    let atoms = companion
        .atoms()
        .iter()
        .map(|a| {
            let mut eps = a.eps.clone();
            if !a.considers(k) {
                let top = max_of(grid.points().iter().flat_map(|u| {
                    a.consideration_set.iter().map(move |&j| u.get(j).clone() + a.eps[j].clone() - u.get(k).clone())
                }))
                .expect("nonempty grid and consideration set");
                eps[k] = top + T::one();
            }
            ConsiderationAtom::new(eps, a.consideration_set.clone(), a.weight.clone())
        })
        .collect();
    Ok(ArumCsDistribution::new(atoms)?
        .with_provenance(ATTENTION_WITNESS, crate::models::Model::ArumCs(nu.clone()).content_hash()))
}

/// Support of a candidate atom; its weight is an LP variable.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateAtom<T: Scalar> {
    Epsilon(Vec<ExtendedReal<T>>),
    Consideration { eps: Vec<T>, consideration_set: Vec<usize> },
}

impl<T: Scalar> CandidateAtom<T> {
    fn dim(&self) -> usize {
        match self {
            CandidateAtom::Epsilon(e) => e.len(),
            CandidateAtom::Consideration { eps, .. } => eps.len(),
        }
    }

    pub fn choice_at(&self, u: &[T]) -> Option<usize> {
        match self {
            CandidateAtom::Epsilon(e) => EpsilonAtom::new(e.clone(), T::one()).choice_at(u),
            CandidateAtom::Consideration { eps, consideration_set } => {
                ConsiderationAtom::new(eps.clone(), consideration_set.clone(), T::one()).choice_at(u)
            }
        }
    }

    fn fits(&self, class: ModelClass) -> bool {
        match (self, class) {
            (CandidateAtom::Epsilon(e), ModelClass::Arum) => e.iter().all(ExtendedReal::is_finite),
            (CandidateAtom::Epsilon(e), ModelClass::ArumE) => e.iter().any(ExtendedReal::is_finite),
            (CandidateAtom::Consideration { eps, consideration_set }, ModelClass::ArumCs) => {
                !consideration_set.is_empty() && consideration_set.iter().all(|&j| j < eps.len())
            }
            _ => false,
        }
    }

    pub fn repr(&self) -> String {
        match self {
            CandidateAtom::Epsilon(e) => e.iter().map(ExtendedReal::repr).collect::<Vec<_>>().join(" "),
            CandidateAtom::Consideration { eps, consideration_set } => format!(
                "{} | S={}",
                eps.iter().map(Scalar::repr).collect::<Vec<_>>().join(" "),
                consideration_set.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
            ),
        }
    }
}

/// All shock vectors in `axis^K`. For `arum_e` every nonempty proper subset of
/// coordinates may additionally be set to `-inf`; `arum_cs` uses the image of
/// that family under the ARUM-E to ARUM-CS map.
pub fn rectangular_atom_family<T: Scalar>(axis: &[T], k: usize, class: ModelClass) -> Result<Vec<CandidateAtom<T>>> {
    if k < 2 || axis.is_empty() {
        return Err(Error::Invalid("atom family needs K >= 2 and a nonempty axis".into()));
    }
    let masks: Vec<u64> = match class {
        ModelClass::Arum => vec![0],
        ModelClass::ArumE | ModelClass::ArumCs => {
            if k > 16 {
                return Err(Error::Invalid("too many alternatives for an extended atom family".into()));
            }
            (0..(1u64 << k) - 1).collect()
        }
    };
    let mut out = Vec::new();
    for mask in masks {
        let free: Vec<usize> = (0..k).filter(|j| mask & (1 << j) == 0).collect();
        let count = axis.len().checked_pow(free.len() as u32).filter(|&c| c <= 1_000_000);
        let count = count.ok_or_else(|| Error::Invalid("atom family too large".into()))?;
        for n in 0..count {
            // Last free coordinate varies fastest.
            let mut rest = n;
            let mut eps = vec![ExtendedReal::NegInfinity; k];
            for &j in free.iter().rev() {
                eps[j] = ExtendedReal::Finite(axis[rest % axis.len()].clone());
                rest /= axis.len();
            }
            out.push(match class {
                ModelClass::ArumCs => CandidateAtom::Consideration {
                    eps: eps.iter().map(|e| e.finite().cloned().unwrap_or_else(T::zero)).collect(),
                    consideration_set: free.clone(),
                },
                _ => CandidateAtom::Epsilon(eps),
            });
        }
    }
    Ok(out)
}

/// `rectangular_atom_family` from a `"lo:hi:step"` axis.
pub fn parse_atom_family<T: Scalar>(spec: &str, k: usize, class: ModelClass) -> Result<Vec<CandidateAtom<T>>> {
    rectangular_atom_family(&parse_axis::<T>(spec)?, k, class)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpCounterfactualProblem<T: Scalar> {
    pub field: ChoiceProbField<T>,
    pub u_c: UtilityPoint<T>,
    pub atom_family: Vec<CandidateAtom<T>>,
    pub model_class: ModelClass,
}

impl<T: Scalar> LpCounterfactualProblem<T> {
    pub fn grid(&self) -> &UtilityGrid<T> {
        self.field.grid()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct LpBoundsReport<T: Scalar> {
    pub k: usize,
    pub model_class: ModelClass,
    pub interval: Interval<T>,
    /// Indices into the declared family of the atoms kept after tie filtering.
    pub kept_atoms: Vec<usize>,
    pub excluded_ties: usize,
    /// Weights on `kept_atoms` attaining the lower and upper endpoints.
    #[serde(serialize_with = "crate::scalar::ser_scalars")]
    pub min_weights: Vec<T>,
    #[serde(serialize_with = "crate::scalar::ser_scalars")]
    pub max_weights: Vec<T>,
    pub constraint_rank: usize,
}

/// Field values enter the LP as exact rationals; floats go through their
/// shortest decimal form so that `0.6` means `3/5`.
fn exact<T: Scalar>(x: &T) -> Result<Rational> {
    if T::EXACT {
        Ok(x.to_rational())
    } else {
        Rational::parse(&x.repr())
    }
}

/// The atom-to-choice map per kept atom: choices at every grid point and at `u_C`.
pub(crate) struct LpSystem {
    pub(crate) a: Vec<Vec<Rational>>,
    pub(crate) b: Vec<Rational>,
    pub(crate) objective: Vec<Rational>,
    pub(crate) kept: Vec<usize>,
}

pub(crate) fn build_lp_system<T: Scalar>(problem: &LpCounterfactualProblem<T>, k: usize) -> Result<LpSystem> {
    let field = &problem.field;
    let kk = field.num_alternatives();
    if k >= kk {
        return Err(Error::Invalid(format!("alternative {k} out of range")));
    }
    if problem.u_c.dim() != kk {
        return Err(Error::DimensionMismatch { expected: kk, found: problem.u_c.dim() });
    }
    if problem.atom_family.is_empty() {
        return Err(Error::Invalid("atom family is empty".into()));
    }
    for (i, a) in problem.atom_family.iter().enumerate() {
        if a.dim() != kk {
            return Err(Error::DimensionMismatch { expected: kk, found: a.dim() });
        }
        if !a.fits(problem.model_class) {
            return Err(Error::Invalid(format!(
                "atom {i} ({}) is not a {} atom",
                a.repr(),
                problem.model_class.as_str()
            )));
        }
    }
    let mut kept = Vec::new();
    let mut choices = Vec::new();
    for (i, a) in problem.atom_family.iter().enumerate() {
        let at_grid: Option<Vec<usize>> = field.grid().points().iter().map(|u| a.choice_at(u.values())).collect();
        if let (Some(g), Some(c)) = (at_grid, a.choice_at(problem.u_c.values())) {
            kept.push(i);
            choices.push((g, c));
        }
    }
    let n = kept.len();
    let mut a = vec![vec![Rational::from_integer(1.into()); n]];
    let mut b = vec![Rational::from_integer(1.into())];
    for (g, (_, p)) in field.iter().enumerate() {
        for j in 0..kk {
            a.push(choices.iter().map(|(cg, _)| Rational::from_integer(i64::from(cg[g] == j).into())).collect());
            b.push(exact(p.get(j))?);
        }
    }
    let objective = choices.iter().map(|(_, c)| Rational::from_integer(i64::from(*c == k).into())).collect();
    Ok(LpSystem { a, b, objective, kept })
}

/// `[min, max]` of `p_k(u_C)` over atom weights that reproduce the field.
pub fn lp_counterfactual_bounds<T: Scalar>(
    problem: &LpCounterfactualProblem<T>,
    k: usize,
) -> Result<LpBoundsReport<T>> {
    let sys = build_lp_system(problem, k)?;
    if sys.kept.is_empty() {
        return Err(Error::Infeasible);
    }
    let region = FeasibleRegion::new(&sys.a, &sys.b)?;
    let neg: Vec<Rational> = sys.objective.iter().map(|c| -c).collect();
    let lo_w = region.minimise(&sys.objective)?;
    let hi_w = region.minimise(&neg)?;
    let value = |w: &[Rational]| -> Rational { w.iter().zip(&sys.objective).map(|(w, c)| w * c).sum() };
    let conv = |w: &[Rational]| w.iter().map(T::from_rational).collect::<Vec<T>>();
    Ok(LpBoundsReport {
        k,
        model_class: problem.model_class,
        interval: Interval::closed(T::from_rational(&value(&lo_w)), T::from_rational(&value(&hi_w)))?,
        excluded_ties: problem.atom_family.len() - sys.kept.len(),
        kept_atoms: sys.kept,
        min_weights: conv(&lo_w),
        max_weights: conv(&hi_w),
        constraint_rank: region.rank(),
    })
}

/// Rebuilds the ARUM-E mixture a weight vector describes; zero weights dropped.
pub fn weights_to_epsilon_model<T: Scalar>(
    problem: &LpCounterfactualProblem<T>,
    kept: &[usize],
    weights: &[T],
) -> Result<ArumEDistribution<T>> {
    let atoms = kept
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > T::zero())
        .map(|(&i, w)| match &problem.atom_family[i] {
            CandidateAtom::Epsilon(e) => Ok(EpsilonAtom::new(e.clone(), w.clone())),
            CandidateAtom::Consideration { eps, consideration_set } => Ok(EpsilonAtom::new(
                (0..eps.len())
                    .map(|j| {
                        if consideration_set.contains(&j) {
                            ExtendedReal::Finite(eps[j].clone())
                        } else {
                            ExtendedReal::NegInfinity
                        }
                    })
                    .collect(),
                w.clone(),
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    ArumEDistribution::new(atoms)
}
