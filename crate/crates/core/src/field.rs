use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{UtilityGrid, UtilityPoint};
use crate::scalar::{sum_of, Scalar};

/// Choice probabilities over K alternatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"), transparent)]
pub struct SimplexVector<T: Scalar>(#[serde(serialize_with = "crate::scalar::ser_scalars")] Vec<T>);

impl<T: Scalar> SimplexVector<T> {
    /// Checks nonnegativity, `<= 1`, and that the coordinates sum to one
    /// (exactly for rationals, within 1e-12 for floats).
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::Invalid("simplex vector needs K >= 2".into()));
        }
        let tol = if T::EXACT { T::zero() } else { T::from_f64(1e-12).unwrap() };
        for x in &p {
            if !x.is_finite_value() || *x < -tol.clone() || *x > T::one() + tol.clone() {
                return Err(Error::Invalid(format!("probability {} out of [0, 1]", x.repr())));
            }
        }
        let total = sum_of(p.iter().cloned());
        if !total.approx_eq(&T::one()) {
            return Err(Error::Invalid(format!("probabilities sum to {}", total.repr())));
        }
        Ok(SimplexVector(p))
    }

    /// Builds without validation; for engine outputs that hold the invariant
    /// by construction.
    pub(crate) fn from_engine(p: Vec<T>) -> Self {
        SimplexVector(p)
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn get(&self, k: usize) -> &T {
        &self.0[k]
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Scalar::to_f64).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.0.iter().zip(&other.0).map(|(a, b)| (a.clone() - b.clone()).abs()).fold(T::zero(), |m, d| {
            if d > m {
                d
            } else {
                m
            }
        })
    }
}

/// A probability vector for every point of a utility grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct ChoiceProbField<T: Scalar> {
    grid: UtilityGrid<T>,
    probs: Vec<SimplexVector<T>>,
}

impl<T: Scalar> ChoiceProbField<T> {
    pub fn new(grid: UtilityGrid<T>, probs: Vec<SimplexVector<T>>) -> Result<Self> {
        if probs.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "field has {} probability vectors for {} grid points",
                probs.len(),
                grid.len()
            )));
        }
        let k = grid.num_alternatives();
        if let Some(p) = probs.iter().find(|p| p.dim() != k) {
            return Err(Error::DimensionMismatch { expected: k, found: p.dim() });
        }
        Ok(ChoiceProbField { grid, probs })
    }

    pub fn grid(&self) -> &UtilityGrid<T> {
        &self.grid
    }

    pub fn probs(&self) -> &[SimplexVector<T>] {
        &self.probs
    }

    pub fn num_alternatives(&self) -> usize {
        self.grid.num_alternatives()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UtilityPoint<T>, &SimplexVector<T>)> {
        self.grid.points().iter().zip(&self.probs)
    }

    pub fn at(&self, u: &UtilityPoint<T>) -> Option<&SimplexVector<T>> {
        self.grid.position(u).map(|i| &self.probs[i])
    }

    /// Per-point max absolute discrepancy against another field on the same grid.
    pub fn discrepancies(&self, other: &Self) -> Result<Vec<T>> {
        if self.grid != other.grid {
            return Err(Error::Invalid("fields are defined on different grids".into()));
        }
        Ok(self.probs.iter().zip(&other.probs).map(|(a, b)| a.max_abs_diff(b)).collect())
    }
}

/// Interval with explicit endpoint closedness.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct Interval<T: Scalar> {
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    pub lo: T,
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    pub hi: T,
    pub closed_lo: bool,
    pub closed_hi: bool,
}

impl<T: Scalar> Interval<T> {
    pub fn closed(lo: T, hi: T) -> Result<Self> {
        if lo > hi {
            return Err(Error::Invalid(format!("interval [{}, {}] is reversed", lo.repr(), hi.repr())));
        }
        Ok(Interval { lo, hi, closed_lo: true, closed_hi: true })
    }

    pub fn width(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn contains(&self, x: &T) -> bool {
        let above = if self.closed_lo { *x >= self.lo } else { *x > self.lo };
        let below = if self.closed_hi { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    /// Containment for closed intervals.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.lo >= other.lo && self.hi <= other.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

impl<T: Scalar> std::fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.closed_lo { '[' } else { '(' },
            self.lo.repr(),
            self.hi.repr(),
            if self.closed_hi { ']' } else { ')' }
        )
    }
}
