//! Social surplus, welfare changes and attention-welfare sets.
//!
//! The gradient of `V` is the choice-probability vector, so a welfare change
//! along a segment is the line integral of `p`. That integral depends on the
//! field only, hence every rationalisation gives the same answer.

mod quadrature;

use serde::Serialize;

pub use quadrature::{composite_gauss_legendre, pairwise_sum, DEFAULT_PANELS};

use crate::counterfactual::attention_intervention_apply;
use crate::equivalence::arum_e_to_cs;
use crate::error::{Error, Result};
use crate::field::{ChoiceProbField, SimplexVector};
use crate::grid::{UtilityGrid, UtilityPoint};
use crate::identification::{sup_choice_prob, witness_lower_endpoint};
use crate::models::{choice_prob_field, ArumCsDistribution, ChoiceAtom, ChoiceModel, ConsiderationAtom, Model};
use crate::scalar::{max_of, Scalar};

pub const DEFAULT_ENVELOPE_STEP: f64 = 1e-4;
pub const DEFAULT_PLOT_SAMPLES: usize = 65;

/// `max_k |p_k(u) - dV/du_k|` with central differences of step `h`.
pub fn envelope_check<T: Scalar, M: ChoiceModel<T> + ?Sized>(model: &M, u: &UtilityPoint<T>, h: &T) -> Result<T> {
    if *h <= T::zero() {
        return Err(Error::Invalid("finite-difference step must be positive".into()));
    }
    let p = model.choice_probabilities(u)?;
    let mut worst = T::zero();
    for k in 0..u.dim() {
        let up = u.shifted(k, h);
        let down = u.shifted(k, &-h.clone());
        // The realised step, which differs from 2h after float rounding.
        let step = up.get(k).clone() - down.get(k).clone();
        let grad = (model.social_surplus(&up)? - model.social_surplus(&down)?) / step;
        let dev = (p.get(k).clone() - grad).abs();
        if dev > worst {
            worst = dev;
        }
    }
    Ok(worst)
}

fn segment_point(u: &UtilityPoint<f64>, u_tilde: &UtilityPoint<f64>, t: f64) -> Result<UtilityPoint<f64>> {
    UtilityPoint::new(u.values().iter().zip(u_tilde.values()).map(|(a, b)| t * b + (1.0 - t) * a).collect())
}

fn integrand<F>(eval: &F, u: &UtilityPoint<f64>, u_tilde: &UtilityPoint<f64>, t: f64) -> Result<f64>
where
    F: Fn(&UtilityPoint<f64>) -> Result<SimplexVector<f64>>,
{
    let p = eval(&segment_point(u, u_tilde, t)?)?;
    let terms: Vec<f64> =
        p.values().iter().zip(u.values().iter().zip(u_tilde.values())).map(|(pk, (a, b))| pk * (b - a)).collect();
    Ok(pairwise_sum(&terms))
}

fn check_segment(u: &UtilityPoint<f64>, u_tilde: &UtilityPoint<f64>) -> Result<()> {
    if u.dim() != u_tilde.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: u_tilde.dim() });
    }
    Ok(())
}

/// `int_0^1 p(t u~ + (1-t) u) . (u~ - u) dt` by composite Gauss-Legendre.
pub fn welfare_change_path_integral<F>(
    eval: F,
    u: &UtilityPoint<f64>,
    u_tilde: &UtilityPoint<f64>,
    panels: usize,
) -> Result<f64>
where
    F: Fn(&UtilityPoint<f64>) -> Result<SimplexVector<f64>> + Sync,
{
    check_segment(u, u_tilde)?;
    if u == u_tilde {
        return Ok(0.0);
    }
    composite_gauss_legendre(|t| integrand(&eval, u, u_tilde, t), 0.0, 1.0, panels)
}

/// Values of `t` in (0, 1) where some atom of a finite model can switch its
/// choice on the segment `t u~ + (1-t) u`, sorted and deduplicated. The
/// integrand is constant between consecutive breakpoints.
pub fn segment_breakpoints<T: Scalar>(
    model: &Model<T>,
    u: &UtilityPoint<T>,
    u_tilde: &UtilityPoint<T>,
) -> Result<Vec<T>> {
    if u.dim() != u_tilde.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: u_tilde.dim() });
    }
    if u.dim() != model.num_alternatives() {
        return Err(Error::DimensionMismatch { expected: model.num_alternatives(), found: u.dim() });
    }
    let mut out = match model {
        Model::Arum(d) => atom_breakpoints(d.atoms(), u, u_tilde),
        Model::ArumE(d) => atom_breakpoints(d.atoms(), u, u_tilde),
        Model::ArumCs(d) => atom_breakpoints(d.atoms(), u, u_tilde),
    };
    out.sort_by(|a, b| a.partial_cmp(b).expect("breakpoints are finite"));
    out.dedup();
    Ok(out)
}

fn atom_breakpoints<T: Scalar, A: ChoiceAtom<T>>(
    atoms: &[A],
    u: &UtilityPoint<T>,
    u_tilde: &UtilityPoint<T>,
) -> Vec<T> {
    let mut out = Vec::new();
    for a in atoms {
        let shocks = a.feasible_shocks();
        for (x, (i, ei)) in shocks.iter().enumerate() {
            for (j, ej) in &shocks[x + 1..] {
                let d0 = u.get(*i).clone() + ei.clone() - u.get(*j).clone() - ej.clone();
                let slope =
                    (u_tilde.get(*i).clone() - u.get(*i).clone()) - (u_tilde.get(*j).clone() - u.get(*j).clone());
                if slope == T::zero() {
                    continue;
                }
                let t = -d0 / slope;
                if t > T::zero() && t < T::one() {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// The path integral split at `breaks` (values in (0, 1)), with `panels`
/// Gauss-Legendre panels on every piece.
pub fn welfare_change_path_integral_split<F>(
    eval: F,
    u: &UtilityPoint<f64>,
    u_tilde: &UtilityPoint<f64>,
    breaks: &[f64],
    panels: usize,
) -> Result<f64>
where
    F: Fn(&UtilityPoint<f64>) -> Result<SimplexVector<f64>> + Sync,
{
    check_segment(u, u_tilde)?;
    if u == u_tilde {
        return Ok(0.0);
    }
    let mut knots = vec![0.0];
    knots.extend(breaks.iter().copied().filter(|t| *t > 0.0 && *t < 1.0));
    knots.push(1.0);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let pieces = knots
        .windows(2)
        .map(|w| composite_gauss_legendre(|t| integrand(&eval, u, u_tilde, t), w[0], w[1], panels))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&pieces))
}

/// Path integral for a finite model, split where atoms switch choices. The
/// integrand is evaluated from choice probabilities only.
pub fn model_path_integral<T: Scalar>(
    model: &Model<T>,
    u: &UtilityPoint<T>,
    u_tilde: &UtilityPoint<T>,
    panels: usize,
) -> Result<f64> {
    let breaks: Vec<f64> = segment_breakpoints(model, u, u_tilde)?.iter().map(Scalar::to_f64).collect();
    welfare_change_path_integral_split(
        model_evaluator(model),
        &UtilityPoint::new(u.to_f64())?,
        &UtilityPoint::new(u_tilde.to_f64())?,
        &breaks,
        panels,
    )
}

/// Float view of any model: nodes are converted exactly into `T` and the
/// probabilities back to `f64`.
pub fn model_evaluator<'a, T: Scalar, M: ChoiceModel<T> + Sync + ?Sized>(
    model: &'a M,
) -> impl Fn(&UtilityPoint<f64>) -> Result<SimplexVector<f64>> + Sync + 'a {
    move |u: &UtilityPoint<f64>| {
        let ut = UtilityPoint::new(
            u.values()
                .iter()
                .map(|&x| T::from_f64(x).ok_or_else(|| Error::Invalid("non-finite utility".into())))
                .collect::<Result<Vec<T>>>()?,
        )?;
        Ok(SimplexVector::from_engine(model.choice_probabilities(&ut)?.to_f64()))
    }
}

/// The path integrand `p(t) . (u~ - u)` at the midpoints of `n` equal cells of
/// [0, 1]. Midpoints keep samples off dyadic kink locations.
pub fn integrand_samples<F>(
    eval: F,
    u: &UtilityPoint<f64>,
    u_tilde: &UtilityPoint<f64>,
    n: usize,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&UtilityPoint<f64>) -> Result<SimplexVector<f64>>,
{
    check_segment(u, u_tilde)?;
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            Ok((t, integrand(&eval, u, u_tilde, t)?))
        })
        .collect()
}

/// `V(u~) - V(u)`.
pub fn welfare_change_exact<T: Scalar, M: ChoiceModel<T> + ?Sized>(
    model: &M,
    u: &UtilityPoint<T>,
    u_tilde: &UtilityPoint<T>,
) -> Result<T> {
    Ok(model.social_surplus(u_tilde)? - model.social_surplus(u)?)
}

/// Identified set for the welfare effect of a k-attention intervention.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "lower", bound(serialize = "T: Scalar"))]
pub enum WelfareSet<T: Scalar> {
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    Point(T),
    #[serde(serialize_with = "crate::scalar::ser_scalar")]
    UnboundedAbove(T),
}

impl<T: Scalar> WelfareSet<T> {
    pub fn lower(&self) -> &T {
        match self {
            WelfareSet::Point(x) | WelfareSet::UnboundedAbove(x) => x,
        }
    }

    pub fn upper(&self) -> Option<&T> {
        match self {
            WelfareSet::Point(x) => Some(x),
            WelfareSet::UnboundedAbove(_) => None,
        }
    }
}

impl<T: Scalar> std::fmt::Display for WelfareSet<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WelfareSet::Point(x) => write!(f, "{{{}}}", x.repr()),
            WelfareSet::UnboundedAbove(x) => write!(f, "[{}, inf)", x.repr()),
        }
    }
}

/// `{0}` when `sup p_k = 1`, otherwise `[0, inf)`. The unbounded case needs a
/// k-maximal point unless the caller asserts the extremely-attractive regime.
pub fn attention_welfare_set<T: Scalar>(
    field: &ChoiceProbField<T>,
    k: usize,
    extremely_attractive: bool,
) -> Result<WelfareSet<T>> {
    if k >= field.num_alternatives() {
        return Err(Error::Invalid(format!("alternative {k} out of range")));
    }
    if sup_choice_prob(field, k).0 == T::one() {
        return Ok(WelfareSet::Point(T::zero()));
    }
    if extremely_attractive || field.grid().k_maximal_point(k).is_some() {
        Ok(WelfareSet::UnboundedAbove(T::zero()))
    } else {
        Err(Error::NoKMaximalPoint { k })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WelfareWitness<T: Scalar> {
    pub witness: ArumCsDistribution<T>,
    /// Translation applied to `eps_k` on atoms that ignore `k`.
    pub shift: T,
    /// Smallest translation at which `k` ties the best considered option.
    pub base_shift: T,
    /// `Pr(k not in S)` in the witness.
    pub gamma: T,
    pub target_gain: T,
    /// `V(u, S u {k}) - V(u, S)` for the witness.
    pub achieved_gain: T,
    /// `target_gain * gamma`.
    pub guaranteed_gain: T,
    /// The input already considered `k` everywhere and was replaced by the
    /// lower-endpoint rationalisation.
    pub used_companion: bool,
}

/// A rationalisation of `nu`'s field whose k-attention welfare gain at `u` is
/// at least `c * Pr(k not in S)`.
pub fn unbounded_welfare_witness<T: Scalar>(
    nu: &ArumCsDistribution<T>,
    grid: &UtilityGrid<T>,
    k: usize,
    u: &UtilityPoint<T>,
    c: &T,
) -> Result<WelfareWitness<T>> {
    if *c < T::zero() {
        return Err(Error::Invalid("target gain must be nonnegative".into()));
    }
    if k >= nu.num_alternatives() {
        return Err(Error::Invalid(format!("alternative {k} out of range")));
    }
    let mut base = nu.clone();
    let mut used_companion = false;
    if base.consideration_probability(k) == T::one() {
        let companion = match witness_lower_endpoint(nu, grid, k) {
            Ok(w) => arum_e_to_cs(&w),
            Err(Error::NoKMaximalPoint { .. }) => return Err(Error::FullConsideration { k }),
            Err(e) => return Err(e),
        };
        if companion.consideration_probability(k) == T::one() {
            return Err(Error::FullConsideration { k });
        }
        base = companion;
        used_companion = true;
    }
    let gamma = T::one() - base.consideration_probability(k);
    let deficits = base
        .atoms()
        .iter()
        .filter(|a| !a.considers(k))
        .map(|a| a.best_value(u.values()) - u.get(k).clone() - a.eps[k].clone());
    let base_shift = max_of(deficits).expect("gamma > 0");
    let shift = base_shift.clone() + c.clone();
    let witness = if *c == T::zero() {
        base.clone()
    } else {
        let atoms = base
            .atoms()
            .iter()
            .map(|a| {
                let mut eps = a.eps.clone();
                if !a.considers(k) {
                    eps[k] = eps[k].clone() + shift.clone();
                }
                ConsiderationAtom::new(eps, a.consideration_set.clone(), a.weight.clone())
            })
            .collect();
        ArumCsDistribution::new(atoms)?
    };
    let achieved_gain = if *c == T::zero() {
        T::zero()
    } else {
        attention_intervention_apply(&witness, k)?.social_surplus(u)? - witness.social_surplus(u)?
    };
    // Shocks on unconsidered alternatives never enter the field.
    debug_assert!(choice_prob_field(&witness, grid).ok() == choice_prob_field(nu, grid).ok());
    Ok(WelfareWitness {
        witness,
        shift,
        base_shift,
        guaranteed_gain: c.clone() * gamma.clone(),
        gamma,
        target_gain: c.clone(),
        achieved_gain,
        used_companion,
    })
}

#[cfg(test)]
mod tests;
