//! Identified sets for marginal consideration probabilities.
//!
//! For any rationalisation, `sup_u p_k(u)` bounds `Pr(k considered)` from
//! below. When the grid holds a k-maximal point the set is exactly
//! `[sup_u p_k(u), 1]`; otherwise only the lower bound is reported and the
//! report is flagged as not sharp.

use serde::Serialize;

use crate::equivalence::cs_to_arum_e;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::field::{ChoiceProbField, Interval};
use crate::grid::{UtilityGrid, UtilityPoint};
use crate::models::{choice_prob_field, ArumCsDistribution, ArumEDistribution, ChoiceAtom, EpsilonAtom, Model};
use crate::scalar::{sum_of, Scalar};

pub const WITNESS_LOWER_ENDPOINT: &str = "witness_lower_endpoint";

fn check_alternative(k: usize, num: usize) -> Result<()> {
    if k >= num {
        return Err(Error::Invalid(format!("alternative {k} out of range for K = {num}")));
    }
    Ok(())
}

/// `max_u p_k(u)` and the first grid point attaining it.
pub fn sup_choice_prob<T: Scalar>(field: &ChoiceProbField<T>, k: usize) -> (T, UtilityPoint<T>) {
    let mut best: Option<(&T, &UtilityPoint<T>)> = None;
    for (u, p) in field.iter() {
        if best.is_none_or(|(b, _)| p.get(k) > b) {
            best = Some((p.get(k), u));
        }
    }
    let (v, u) = best.expect("field grid is nonempty");
    (v.clone(), u.clone())
}

/// `Pr(eps_k > -inf)` or `Pr(k in S)`; 1 for ARUM.
pub fn consideration_prob_of<T: Scalar>(model: &Model<T>, k: usize) -> T {
    model.consideration_probability(k)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct ConsiderationBoundsReport<T: Scalar> {
    pub k: usize,
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    pub sup_pk: T,
    pub argmax_point: UtilityPoint<T>,
    pub k_maximal_point: Option<UtilityPoint<T>>,
    pub interval: Interval<T>,
    pub k_maximal_found: bool,
    pub sharp: bool,
}

/// `[sup p_k, 1]`, sharp exactly when the grid has a k-maximal point.
pub fn consideration_identified_set<T: Scalar>(
    field: &ChoiceProbField<T>,
    k: usize,
) -> Result<ConsiderationBoundsReport<T>> {
    check_alternative(k, field.num_alternatives())?;
    let (sup_pk, first_argmax) = sup_choice_prob(field, k);
    let k_maximal_point = field.grid().k_maximal_point(k).cloned();
    let found = k_maximal_point.is_some();
    // p_k(u*) attains the supremum, so u* is reported as the maximiser.
    let argmax_point = k_maximal_point.clone().unwrap_or(first_argmax);
    Ok(ConsiderationBoundsReport {
        k,
        interval: Interval::closed(sup_pk.clone(), T::one())?,
        sup_pk,
        argmax_point,
        k_maximal_point,
        k_maximal_found: found,
        sharp: found,
    })
}

/// Rationalisation attaining the lower endpoint: every atom in which `k` loses
/// at the k-maximal point gets `eps_k = -inf`. Such atoms lose `k` at every grid
/// point already, so the field is unchanged while
/// `Pr(eps_k > -inf) = p_k(u*) = sup p_k`.
pub fn witness_lower_endpoint<T: Scalar>(
    nu: &ArumCsDistribution<T>,
    grid: &UtilityGrid<T>,
    k: usize,
) -> Result<ArumEDistribution<T>> {
    check_alternative(k, grid.num_alternatives())?;
    let u_star = grid.k_maximal_point(k).ok_or(Error::NoKMaximalPoint { k })?;
    choice_prob_field(nu, grid)?;
    let mu = cs_to_arum_e(nu);
    let atoms = mu
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let chosen = a.choice_at(u_star.values()).ok_or_else(|| Error::tie(i, u_star.values()))?;
            let mut eps = a.eps.clone();
            if chosen != k {
                eps[k] = ExtendedReal::NegInfinity;
            }
            Ok(EpsilonAtom::new(eps, a.weight.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ArumEDistribution::new(atoms)?.with_provenance(WITNESS_LOWER_ENDPOINT, Model::ArumCs(nu.clone()).content_hash()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct DiscontinuityRow<T: Scalar> {
    pub index: usize,
    pub grid_points: usize,
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    pub sup_pk: T,
    pub interval: Interval<T>,
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    pub width: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct DiscontinuityTable<T: Scalar> {
    pub k: usize,
    pub rows: Vec<DiscontinuityRow<T>>,
    /// The model's own `Pr(k considered)`: the limit a growing domain would
    /// identify if `k` became extremely attractive.
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    pub consideration_probability: T,
}

/// Identified intervals along a nested sequence of rectangular grids.
pub fn discontinuity_experiment<T: Scalar>(
    model: &Model<T>,
    rectangles: &[UtilityGrid<T>],
    k: usize,
) -> Result<DiscontinuityTable<T>> {
    if rectangles.is_empty() {
        return Err(Error::Invalid("discontinuity experiment needs at least one rectangle".into()));
    }
    for (i, r) in rectangles.iter().enumerate() {
        if !r.is_cartesian_product() {
            return Err(Error::Invalid(format!("rectangle {i} is not a product grid")));
        }
        if i > 0 && !rectangles[i - 1].is_subset_of(r) {
            return Err(Error::Invalid(format!("rectangle {} is not contained in rectangle {i}", i - 1)));
        }
    }
    let rows = rectangles
        .iter()
        .enumerate()
        .map(|(index, r)| {
            r.k_maximal_point(k).ok_or(Error::NoKMaximalPoint { k })?;
            let report = consideration_identified_set(&choice_prob_field(model, r)?, k)?;
            Ok(DiscontinuityRow {
                index,
                grid_points: r.len(),
                width: report.interval.width(),
                sup_pk: report.sup_pk,
                interval: report.interval,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscontinuityTable { k, rows, consideration_probability: model.consideration_probability(k) })
}

/// `max_u sum_{k in B} p_k(u)`. Values below 1 on grids that push `B` far
/// ahead of its complement are evidence against full consideration.
pub fn subset_attractiveness_diagnostic<T: Scalar>(field: &ChoiceProbField<T>, subset: &[usize]) -> Result<T> {
    if subset.is_empty() {
        return Err(Error::Invalid("subset must be nonempty".into()));
    }
    for &k in subset {
        check_alternative(k, field.num_alternatives())?;
    }
    let mut best: Option<T> = None;
    for (_, p) in field.iter() {
        let s = sum_of(subset.iter().map(|&k| p.get(k).clone()));
        if best.as_ref().is_none_or(|b| s > *b) {
            best = Some(s);
        }
    }
    Ok(best.expect("field grid is nonempty"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct SubsetDiagnostic<T: Scalar> {
    pub subset: Vec<usize>,
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    pub sup_sum: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct DiagnosticsReport<T: Scalar> {
    pub subsets: Vec<SubsetDiagnostic<T>>,
    /// `sup p_k = 1` for every `k`: the field shows no sign of limited
    /// consideration at this grid's scale.
    pub consistent_with_full_consideration: bool,
}

/// The diagnostic for all `2^K - 2` nonempty proper subsets, ordered by bitmask.
pub fn proper_subset_diagnostics<T: Scalar>(field: &ChoiceProbField<T>) -> Result<DiagnosticsReport<T>> {
    let k = field.num_alternatives();
    if k > 20 {
        return Err(Error::Invalid("too many alternatives for subset enumeration".into()));
    }
    let subsets = (1u32..(1 << k) - 1)
        .map(|mask| {
            let subset: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).collect();
            let sup_sum = subset_attractiveness_diagnostic(field, &subset)?;
            Ok(SubsetDiagnostic { subset, sup_sum })
        })
        .collect::<Result<Vec<_>>>()?;
    let consistent = (0..k).all(|j| sup_choice_prob(field, j).0 == T::one());
    Ok(DiagnosticsReport { subsets, consistent_with_full_consideration: consistent })
}

/// `[max_x p~_k(x), 1]` over a product covariate grid.
pub fn covariate_consideration_bounds<T: Scalar>(ptilde: &ChoiceProbField<T>, k: usize) -> Result<Interval<T>> {
    check_alternative(k, ptilde.num_alternatives())?;
    if !ptilde.grid().is_cartesian_product() {
        return Err(Error::NotCartesianProduct);
    }
    Interval::closed(sup_choice_prob(ptilde, k).0, T::one())
}
