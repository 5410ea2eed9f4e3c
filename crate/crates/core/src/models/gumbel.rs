use crate::error::Result;
use crate::field::SimplexVector;
use crate::grid::UtilityPoint;

use super::{check_dim, ChoiceModel};

/// ARUM with i.i.d. standard Gumbel shocks (multinomial logit).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GumbelModel {
    k: usize,
}

impl GumbelModel {
    pub fn new(k: usize) -> Self {
        assert!(k >= 2, "Gumbel model needs K >= 2");
        GumbelModel { k }
    }
}

/// Softmax of `u`, shifted by `max u` so large indices do not overflow.
pub fn choice_prob_gumbel(u: &[f64]) -> Vec<f64> {
    let m = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = u.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// `V(u) = log sum exp(u) - ln K`, the logit surplus with `V(0) = 0`.
pub fn social_surplus_gumbel(u: &[f64]) -> f64 {
    let m = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = u.iter().map(|x| (x - m).exp()).sum();
    m + s.ln() - (u.len() as f64).ln()
}

impl ChoiceModel<f64> for GumbelModel {
    fn num_alternatives(&self) -> usize {
        self.k
    }

    fn choice_probabilities(&self, u: &UtilityPoint<f64>) -> Result<SimplexVector<f64>> {
        check_dim(self.k, u)?;
        Ok(SimplexVector::from_engine(choice_prob_gumbel(u.values())))
    }

    fn social_surplus(&self, u: &UtilityPoint<f64>) -> Result<f64> {
        check_dim(self.k, u)?;
        Ok(social_surplus_gumbel(u.values()))
    }
}
