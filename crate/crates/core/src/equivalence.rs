//! Constructive maps between ARUM-E, ARUM-CS and ARUM, and an exact
//! field-level comparison.
//!
//! * [`arum_e_to_cs`]: consider exactly the alternatives with finite shocks;
//!   infinite shocks are replaced by 0 (they are never consulted).
//! * [`cs_to_arum_e`]: unconsidered alternatives get a `-inf` shock.
//! * [`cs_to_arum`]: unconsidered alternatives get a finite shock low enough
//!   that they lose at every point of the grid's convex hull, with a unit margin.
//!
//! Alternative 0 serves as the numeraire when measuring utility differences.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::grid::{UtilityGrid, UtilityPoint};
use crate::models::{
    choice_prob_field, ArumCsDistribution, ArumDistribution, ArumEDistribution, ChoiceModel, ConsiderationAtom,
    EpsilonAtom, Model,
};
use crate::scalar::{max_of, min_of, Scalar};

pub const ARUM_E_TO_CS: &str = "arum_e_to_cs";
pub const CS_TO_ARUM_E: &str = "cs_to_arum_e";
pub const CS_TO_ARUM: &str = "cs_to_arum";

pub fn arum_e_to_cs<T: Scalar>(mu: &ArumEDistribution<T>) -> ArumCsDistribution<T> {
    let atoms = mu
        .atoms()
        .iter()
        .map(|a| {
            let set = (0..a.eps.len()).filter(|&j| a.eps[j].is_finite()).collect();
            let eps = a.eps.iter().map(|e| e.finite().cloned().unwrap_or_else(T::zero)).collect();
            ConsiderationAtom::new(eps, set, a.weight.clone())
        })
        .collect();
    ArumCsDistribution::new(atoms)
        .expect("valid ARUM-E input maps to valid ARUM-CS")
        .with_provenance(ARUM_E_TO_CS, Model::ArumE(mu.clone()).content_hash())
}

pub fn cs_to_arum_e<T: Scalar>(nu: &ArumCsDistribution<T>) -> ArumEDistribution<T> {
    let atoms = nu
        .atoms()
        .iter()
        .map(|a| {
            let eps = a
                .eps
                .iter()
                .enumerate()
                .map(|(j, e)| if a.considers(j) { ExtendedReal::Finite(e.clone()) } else { ExtendedReal::NegInfinity })
                .collect();
            EpsilonAtom::new(eps, a.weight.clone())
        })
        .collect();
    ArumEDistribution::new(atoms)
        .expect("valid ARUM-CS input maps to valid ARUM-E")
        .with_provenance(CS_TO_ARUM_E, Model::ArumCs(nu.clone()).content_hash())
}

/// Replaces each unconsidered shock by
/// `min_{u in grid, l in S}(u_l - u_0 + eps_l) - max_{u in grid}(u_k - u_0) - 1`.
pub fn cs_to_arum<T: Scalar>(nu: &ArumCsDistribution<T>, grid: &UtilityGrid<T>) -> Result<ArumDistribution<T>> {
    let k = nu.num_alternatives();
    if grid.num_alternatives() != k {
        return Err(Error::DimensionMismatch { expected: k, found: grid.num_alternatives() });
    }
    let rel = |u: &UtilityPoint<T>, j: usize| u.get(j).clone() - u.get(0).clone();
    let max_rel: Vec<T> =
        (0..k).map(|j| max_of(grid.points().iter().map(|u| rel(u, j))).expect("nonempty grid")).collect();
    let atoms = nu
        .atoms()
        .iter()
        .map(|a| {
            let floor = min_of(
                grid.points()
                    .iter()
                    .flat_map(|u| a.consideration_set.iter().map(move |&l| rel(u, l) + a.eps[l].clone())),
            )
            .expect("nonempty grid and consideration set");
            let eps = (0..k)
                .map(|j| if a.considers(j) { a.eps[j].clone() } else { floor.clone() - max_rel[j].clone() - T::one() })
                .collect();
            EpsilonAtom::finite(eps, a.weight.clone())
        })
        .collect();
    Ok(ArumDistribution::new(atoms)?.with_provenance(CS_TO_ARUM, Model::ArumCs(nu.clone()).content_hash()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct PointDiscrepancy<T: Scalar> {
    pub point: UtilityPoint<T>,
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    pub max_abs_diff: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct EquivalenceReport<T: Scalar> {
    pub points: Vec<PointDiscrepancy<T>>,
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    pub max_discrepancy: T,
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    pub tolerance: T,
    pub pass: bool,
}

impl<T: Scalar> EquivalenceReport<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,max_abs_diff\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.point.repr(), p.max_abs_diff.repr()));
        }
        out
    }
}

/// Compares the fields of two models on a grid. Use `tol = 0` in rational mode.
pub fn verify_equivalence<T: Scalar, A, B>(
    model_a: &A,
    model_b: &B,
    grid: &UtilityGrid<T>,
    tol: T,
) -> Result<EquivalenceReport<T>>
where
    A: ChoiceModel<T> + ?Sized,
    B: ChoiceModel<T> + ?Sized,
{
    if model_a.num_alternatives() != model_b.num_alternatives() {
        return Err(Error::DimensionMismatch {
            expected: model_a.num_alternatives(),
            found: model_b.num_alternatives(),
        });
    }
    let fa = choice_prob_field(model_a, grid)?;
    let fb = choice_prob_field(model_b, grid)?;
    let diffs = fa.discrepancies(&fb)?;
    let max_discrepancy = max_of(diffs.iter().cloned()).unwrap_or_else(T::zero);
    let pass = max_discrepancy <= tol;
    Ok(EquivalenceReport {
        points: grid
            .points()
            .iter()
            .cloned()
            .zip(diffs)
            .map(|(point, max_abs_diff)| PointDiscrepancy { point, max_abs_diff })
            .collect(),
        max_discrepancy,
        tolerance: tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{integer_box, point, reference_consideration_model, reference_grid};
    use crate::models::FiniteMixture;
    use crate::scalar::{ratio, Rational};

    fn ri(x: i64) -> Rational {
        Rational::from_i64(x)
    }

    #[test]
    fn e_to_cs_zeroes_infinite_shocks() {
        let mu = ArumEDistribution::new(vec![EpsilonAtom::new(
            vec![ExtendedReal::NegInfinity, ExtendedReal::Finite(ri(1))],
            ri(1),
        )])
        .unwrap();
        let nu = arum_e_to_cs(&mu);
        assert_eq!(nu.atoms(), &[ConsiderationAtom::new(vec![ri(0), ri(1)], vec![1], ri(1))]);
        assert_eq!(nu.provenance().unwrap().construction, ARUM_E_TO_CS);
    }

    #[test]
    fn finite_atoms_get_full_sets() {
        let mu = ArumEDistribution::new(vec![EpsilonAtom::finite(vec![ri(2), ri(1), ri(0)], ri(1))]).unwrap();
        let nu = arum_e_to_cs(&mu);
        assert_eq!(nu.atoms()[0].consideration_set, vec![0, 1, 2]);
        assert_eq!(nu.atoms()[0].eps, vec![ri(2), ri(1), ri(0)]);
    }

    #[test]
    fn cs_to_e_masks_unconsidered() {
        let nu =
            ArumCsDistribution::new(vec![ConsiderationAtom::new(vec![ratio(1, 2), ri(0)], vec![0], ri(1))]).unwrap();
        let mu = cs_to_arum_e(&nu);
        assert_eq!(mu.atoms()[0].eps, vec![ExtendedReal::Finite(ratio(1, 2)), ExtendedReal::NegInfinity]);
        let full =
            ArumCsDistribution::new(vec![ConsiderationAtom::new(vec![ri(1), ri(0)], vec![0, 1], ri(1))]).unwrap();
        assert_eq!(cs_to_arum_e(&full).atoms()[0].eps, vec![ExtendedReal::Finite(ri(1)), ExtendedReal::Finite(ri(0))]);
    }

    #[test]
    fn cs_to_arum_never_picks_unconsidered() {
        let nu =
            ArumCsDistribution::new(vec![ConsiderationAtom::new(vec![ratio(1, 2), ri(0)], vec![0], ri(1))]).unwrap();
        let sq = UtilityGrid::rectangular(&[vec![ri(0), ri(1)], vec![ri(0), ri(1)]]).unwrap();
        let arum = cs_to_arum(&nu, &sq).unwrap();
        // min over {0,1}^2 of u_0 - u_0 + 0.5 = 0.5; max of u_1 - u_0 = 1; 0.5 - 1 - 1.
        assert_eq!(arum.atoms()[0].eps[1], ExtendedReal::Finite(ratio(-3, 2)));
        assert!(verify_equivalence(&nu, &arum, &sq, ri(0)).unwrap().pass);
    }

    #[test]
    fn full_sets_pass_through_cs_to_arum() {
        let nu = ArumCsDistribution::new(vec![ConsiderationAtom::new(vec![ri(3), ri(-1)], vec![0, 1], ri(1))]).unwrap();
        let arum = cs_to_arum(&nu, &reference_grid()).unwrap();
        assert_eq!(arum.atoms()[0].eps, vec![ExtendedReal::Finite(ri(3)), ExtendedReal::Finite(ri(-1))]);
        assert!(arum.atoms().iter().all(|a| a.eps.iter().all(ExtendedReal::is_finite)));
    }

    #[test]
    fn reference_instance_is_equivalent_across_classes() {
        let nu = reference_consideration_model::<Rational>();
        let g = integer_box::<Rational>(3, 2);
        let e = cs_to_arum_e(&nu);
        let a = cs_to_arum(&nu, &g).unwrap();
        assert_eq!(verify_equivalence(&nu, &nu, &g, ri(0)).unwrap().max_discrepancy, ri(0));
        assert!(verify_equivalence(&nu, &e, &g, ri(0)).unwrap().pass);
        let rep = verify_equivalence(&nu, &a, &g, ri(0)).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.points.len(), g.len());
        // Atom-by-atom the chosen alternative never changes.
        for u in g.points() {
            for i in 0..nu.num_atoms() {
                assert_eq!(nu.atom_choice(i, u.values()), a.atom_choice(i, u.values()));
            }
        }
        // Round trip through ARUM-E and back.
        let back = arum_e_to_cs(&e);
        assert!(verify_equivalence(&nu, &back, &g, ri(0)).unwrap().pass);
    }

    #[test]
    fn unrelated_models_fail() {
        let nu = reference_consideration_model::<Rational>();
        let other = ArumDistribution::new(vec![EpsilonAtom::finite(vec![ri(0), ratio(1, 3)], ri(1))]).unwrap();
        let rep = verify_equivalence(&nu, &other, &reference_grid(), ri(0)).unwrap();
        assert!(!rep.pass);
        assert!(rep.max_discrepancy > ri(0));
        assert!(rep.to_csv().starts_with("point,max_abs_diff\n"));
        let _ = point::<Rational>(&[0, 0]);
    }

    #[test]
    fn marginal_consideration_is_preserved() {
        let mu = ArumEDistribution::new(vec![
            EpsilonAtom::new(
                vec![ExtendedReal::NegInfinity, ExtendedReal::Finite(ri(1)), ExtendedReal::Finite(ri(0))],
                ratio(1, 4),
            ),
            EpsilonAtom::new(
                vec![ExtendedReal::Finite(ri(2)), ExtendedReal::NegInfinity, ExtendedReal::Finite(ri(0))],
                ratio(3, 4),
            ),
        ])
        .unwrap();
        let nu = arum_e_to_cs(&mu);
        for k in 0..3 {
            assert_eq!(nu.consideration_probability(k), mu.consideration_probability(k));
        }
    }
}
