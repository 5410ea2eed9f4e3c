use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Gumbel;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::SimplexVector;
use crate::grid::UtilityPoint;
use crate::scalar::Scalar;

use super::{FiniteMixture, Model};

/// Draws `i` come from ChaCha stream `i / DRAWS_PER_STREAM` of the seed, so
/// results do not depend on how streams are spread across threads.
pub const DRAWS_PER_STREAM: u64 = 4096;

/// Shock law to simulate.
#[derive(Debug, Clone, Copy)]
pub enum ShockLaw<'a, T: Scalar> {
    Finite(&'a Model<T>),
    /// i.i.d. standard Gumbel shocks, all alternatives considered.
    Gumbel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub probs: SimplexVector<f64>,
    /// `sqrt(p(1 - p) / n)` per coordinate.
    pub std_errors: Vec<f64>,
    pub draws: u64,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn simulate(
    n: u64,
    k: usize,
    seed: u64,
    draw_choice: impl Fn(&mut ChaCha8Rng) -> Result<usize> + Sync,
) -> Result<Vec<u64>> {
    let streams = n.div_ceil(DRAWS_PER_STREAM);
    let per_stream = (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, s);
            let len = DRAWS_PER_STREAM.min(n - s * DRAWS_PER_STREAM);
            let mut counts = vec![0u64; k];
            for _ in 0..len {
                counts[draw_choice(&mut rng)?] += 1;
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_stream.into_iter().fold(vec![0u64; k], |mut acc, c| {
        acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        acc
    }))
}

/// Empirical choice frequencies over `n` draws; deterministic given `seed`.
pub fn monte_carlo_choice_prob<T: Scalar>(
    law: ShockLaw<'_, T>,
    u: &UtilityPoint<T>,
    n: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n == 0 {
        return Err(Error::Invalid("Monte Carlo needs at least one draw".into()));
    }
    let k = u.dim();
    let counts = match law {
        ShockLaw::Finite(model) => {
            let choices = (0..model.num_atoms())
                .map(|i| model.atom_choice(i, u.values()).ok_or_else(|| Error::tie(i, u.values())))
                .collect::<Result<Vec<_>>>()?;
            let weights: Vec<f64> = (0..model.num_atoms()).map(|i| model.atom_weight(i).to_f64()).collect();
            let index = WeightedIndex::new(&weights).map_err(|e| Error::Invalid(e.to_string()))?;
            simulate(n, k, seed, |rng| Ok(choices[index.sample(rng)]))?
        }
        ShockLaw::Gumbel => {
            let uf = u.to_f64();
            let g = Gumbel::new(0.0, 1.0).expect("valid Gumbel parameters");
            simulate(n, k, seed, |rng| {
                let mut best = (0usize, f64::NEG_INFINITY);
                let mut tied = false;
                for (j, uj) in uf.iter().enumerate() {
                    let v = uj + g.sample(rng);
                    if v > best.1 {
                        best = (j, v);
                        tied = false;
                    } else if v == best.1 {
                        tied = true;
                    }
                }
                if tied {
                    Err(Error::tie(0, &uf))
                } else {
                    Ok(best.0)
                }
            })?
        }
    };
    let nf = n as f64;
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
    let std_errors = probs.iter().map(|p| (p * (1.0 - p) / nf).sqrt()).collect();
    Ok(MonteCarloEstimate { probs: SimplexVector::from_engine(probs), std_errors, draws: n })
}
