use std::cmp::Ordering;

use crate::scalar::Scalar;

/// A real number or negative infinity. `+inf` is not representable.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtendedReal<T> {
    NegInfinity,
    Finite(T),
}

impl<T: Scalar> ExtendedReal<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            ExtendedReal::NegInfinity => None,
        }
    }

    /// `a + b` with `-inf + b = -inf` for finite `b`.
    pub fn add(&self, b: &T) -> Self {
        extended_add(self, b)
    }

    pub fn repr(&self) -> String {
        match self {
            ExtendedReal::Finite(x) => x.repr(),
            ExtendedReal::NegInfinity => "-inf".to_string(),
        }
    }
}

pub fn extended_add<T: Scalar>(a: &ExtendedReal<T>, b: &T) -> ExtendedReal<T> {
    match a {
        ExtendedReal::Finite(x) => ExtendedReal::Finite(x.clone() + b.clone()),
        ExtendedReal::NegInfinity => ExtendedReal::NegInfinity,
    }
}

impl<T: Scalar> PartialOrd for ExtendedReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        match (self, other) {
            (NegInfinity, NegInfinity) => Some(Ordering::Equal),
            (NegInfinity, Finite(_)) => Some(Ordering::Less),
            (Finite(_), NegInfinity) => Some(Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<T> From<T> for ExtendedReal<T> {
    fn from(x: T) -> Self {
        ExtendedReal::Finite(x)
    }
}
