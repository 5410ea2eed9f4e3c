//! Small named instances used by the CLI examples and tests.

use crate::grid::{UtilityGrid, UtilityPoint};
use crate::models::{ArumCsDistribution, ConsiderationAtom};
use crate::scalar::{ratio, Scalar};

/// K = 2, shocks `(0.5, 0)` in both atoms; alternative 0 is considered with
/// probability 0.6 (`S = {0, 1}`) and ignored with probability 0.4 (`S = {1}`).
pub fn reference_consideration_model<T: Scalar>() -> ArumCsDistribution<T> {
    let eps = vec![T::from_rational(&ratio(1, 2)), T::zero()];
    ArumCsDistribution::new(vec![
        ConsiderationAtom::new(eps.clone(), vec![0, 1], T::from_rational(&ratio(3, 5))),
        ConsiderationAtom::new(eps, vec![1], T::from_rational(&ratio(2, 5))),
    ])
    .expect("reference instance is valid")
}

/// `{-s, ..., s}^k` with unit spacing.
pub fn integer_box<T: Scalar>(s: i64, k: usize) -> UtilityGrid<T> {
    let axis: Vec<T> = (-s..=s).map(T::from_i64).collect();
    UtilityGrid::rectangular(&vec![axis; k]).expect("box grid is valid")
}

/// `{-1, 1}^2`, the four corners of the reference domain.
pub fn reference_grid<T: Scalar>() -> UtilityGrid<T> {
    let axis = vec![T::from_i64(-1), T::from_i64(1)];
    UtilityGrid::rectangular(&[axis.clone(), axis]).expect("corner grid is valid")
}

pub fn point<T: Scalar>(v: &[i64]) -> UtilityPoint<T> {
    UtilityPoint::new(v.iter().map(|&x| T::from_i64(x)).collect()).expect("valid point")
}
