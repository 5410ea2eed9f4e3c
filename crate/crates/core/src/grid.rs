use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{max_of, Scalar};

/// A vector of K finite utility indices, K >= 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"), transparent)]
pub struct UtilityPoint<T: Scalar>(#[serde(serialize_with = "crate::scalar::ser_scalars")] Vec<T>);

impl<T: Scalar> UtilityPoint<T> {
    pub fn new(u: Vec<T>) -> Result<Self> {
        if u.len() < 2 {
            return Err(Error::Invalid(format!("utility point needs at least 2 alternatives, got {}", u.len())));
        }
        if u.iter().any(|x| !x.is_finite_value()) {
            return Err(Error::Invalid("utility indices must be finite".into()));
        }
        Ok(UtilityPoint(u))
    }

    pub fn from_f64(u: &[f64]) -> Result<Self> {
        Self::new(u.iter().map(|&x| crate::scalar::from_f64_or_err(x)).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn get(&self, k: usize) -> &T {
        &self.0[k]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Scalar::to_f64).collect()
    }

    /// `self + h * e_k`.
    pub fn shifted(&self, k: usize, h: &T) -> Self {
        let mut v = self.0.clone();
        v[k] = v[k].clone() + h.clone();
        UtilityPoint(v)
    }

    pub fn repr(&self) -> String {
        self.0.iter().map(Scalar::repr).collect::<Vec<_>>().join(" ")
    }

    fn key(&self) -> String {
        self.0.iter().map(Scalar::repr).collect::<Vec<_>>().join(",")
    }
}

/// A finite ordered set of utility points on which probabilities are known.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct UtilityGrid<T: Scalar> {
    points: Vec<UtilityPoint<T>>,
    k: usize,
}

impl<T: Scalar> UtilityGrid<T> {
    pub fn new(points: Vec<UtilityPoint<T>>) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::Invalid("utility grid is empty".into()))?;
        let k = first.dim();
        let mut seen = HashSet::new();
        for p in &points {
            if p.dim() != k {
                return Err(Error::DimensionMismatch { expected: k, found: p.dim() });
            }
            if !seen.insert(p.key()) {
                return Err(Error::Invalid(format!("duplicate grid point [{}]", p.repr())));
            }
        }
        Ok(UtilityGrid { points, k })
    }

    pub fn singleton(u: UtilityPoint<T>) -> Self {
        let k = u.dim();
        UtilityGrid { points: vec![u], k }
    }

    /// Cartesian product of per-coordinate value sets. The first coordinate
    /// varies slowest.
    pub fn rectangular(axes: &[Vec<T>]) -> Result<Self> {
        if axes.iter().any(Vec::is_empty) {
            return Err(Error::Invalid("empty axis in rectangular grid".into()));
        }
        let mut points: Vec<Vec<T>> = vec![Vec::new()];
        for axis in axes {
            points = points
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x.clone());
                        p
                    })
                })
                .collect();
        }
        Self::new(points.into_iter().map(UtilityPoint::new).collect::<Result<_>>()?)
    }

    pub fn points(&self) -> &[UtilityPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of alternatives K.
    pub fn num_alternatives(&self) -> usize {
        self.k
    }

    pub fn contains(&self, u: &UtilityPoint<T>) -> bool {
        self.position(u).is_some()
    }

    pub fn position(&self, u: &UtilityPoint<T>) -> Option<usize> {
        self.points.iter().position(|p| p == u)
    }

    pub fn is_subset_of(&self, other: &UtilityGrid<T>) -> bool {
        let keys: HashSet<String> = other.points.iter().map(UtilityPoint::key).collect();
        self.points.iter().all(|p| keys.contains(&p.key()))
    }

    /// Distinct values of each coordinate, in first-appearance order.
    pub fn axes(&self) -> Vec<Vec<T>> {
        (0..self.k)
            .map(|j| {
                let mut seen = HashSet::new();
                self.points.iter().map(|p| p.get(j).clone()).filter(|x| seen.insert(x.repr())).collect()
            })
            .collect()
    }

    pub fn is_cartesian_product(&self) -> bool {
        let expected = self.axes().iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len()));
        expected == Some(self.points.len())
    }

    pub fn k_maximal_point(&self, k: usize) -> Option<&UtilityPoint<T>> {
        k_maximal_point(self, k)
    }

    pub fn utility_difference_bound(&self) -> T {
        utility_difference_bound(self)
    }
}

/// First grid point `u*` with `u*_k - u*_j >= w_k - w_j` for every grid point
/// `w` and alternative `j`.
pub fn k_maximal_point<T: Scalar>(grid: &UtilityGrid<T>, k: usize) -> Option<&UtilityPoint<T>> {
    if k >= grid.k {
        return None;
    }
    // Column-wise maxima of w_k - w_j over the grid.
    let best: Vec<T> = (0..grid.k)
        .map(|j| max_of(grid.points.iter().map(|w| w.get(k).clone() - w.get(j).clone())).expect("grid is nonempty"))
        .collect();
    grid.points.iter().find(|u| (0..grid.k).all(|j| u.get(k).clone() - u.get(j).clone() >= best[j]))
}

/// `max |u_k - u_j|` over grid points and alternative pairs.
pub fn utility_difference_bound<T: Scalar>(grid: &UtilityGrid<T>) -> T {
    max_of(grid.points.iter().flat_map(|u| {
        let v = u.values();
        v.iter().flat_map(move |a| v.iter().map(move |b| (a.clone() - b.clone()).abs()))
    }))
    .unwrap_or_else(T::zero)
}

/// Values `lo, lo + step, ...` up to and including `hi`.
pub fn axis_values<T: Scalar>(lo: &T, hi: &T, step: &T) -> Result<Vec<T>> {
    if *step <= T::zero() {
        return Err(Error::Invalid("axis step must be positive".into()));
    }
    if lo > hi {
        return Err(Error::Invalid("axis lower end exceeds upper end".into()));
    }
    let mut out = Vec::new();
    // Float steps may overshoot `hi` by rounding; allow a relative slack there.
    let slack = if T::EXACT { T::zero() } else { step.clone() * T::from_f64(1e-9).unwrap() };
    loop {
        // `lo + i * step` rather than repeated addition, so float error does not accumulate.
        let x = lo.clone() + step.clone() * T::from_i64(out.len() as i64);
        if x > hi.clone() + slack.clone() {
            break;
        }
        out.push(x);
        if out.len() > 1_000_000 {
            return Err(Error::Invalid("axis has too many values".into()));
        }
    }
    Ok(out)
}

/// Parses `"lo:hi:step"`.
pub fn parse_axis<T: Scalar>(spec: &str) -> Result<Vec<T>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("expected lo:hi:step, got {spec:?}")));
    }
    axis_values(&T::parse(parts[0])?, &T::parse(parts[1])?, &T::parse(parts[2])?)
}
