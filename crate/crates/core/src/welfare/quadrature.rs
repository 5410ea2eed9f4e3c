use rayon::prelude::*;

use crate::error::Result;

pub const DEFAULT_PANELS: usize = 64;

/// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const NODES: [f64; 5] =
    [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
const WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Sum that does not depend on how the terms were produced: fixed binary
/// splitting over the slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Composite Gauss-Legendre rule for `int_a^b f` over `panels` equal panels.
/// Panels are evaluated in parallel and combined in a fixed order.
pub fn composite_gauss_legendre<F>(f: F, a: f64, b: f64, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let sums = (0..panels)
        .into_par_iter()
        .map(|i| {
            let lo = a + width * i as f64;
            let mid = lo + width / 2.0;
            let mut terms = [0.0; 5];
            for (t, (x, w)) in terms.iter_mut().zip(NODES.iter().zip(WEIGHTS)) {
                *t = w * f(mid + x * width / 2.0)?;
            }
            Ok(pairwise_sum(&terms) * width / 2.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&sums))
}
