//! Exact two-phase simplex over rationals with Bland's rule.
//!
//! Solves `min c.x` subject to `A x = b`, `x >= 0`. Dense tableau; intended for
//! desk-sized problems.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rational;

#[derive(Debug, Clone)]
struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v = &*v / &p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    fn rhs(&self, r: usize) -> &Rational {
        &self.t[r][self.cols]
    }

    /// Minimises `cost` over the columns `< active`, starting from the current
    /// basis. Returns `false` if unbounded.
    fn minimise(&mut self, cost: &[Rational], active: usize) -> bool {
        loop {
            let entering = (0..active).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut d = cost[j].clone();
                for (r, &b) in self.basis.iter().enumerate() {
                    if !self.t[r][j].is_zero() {
                        d -= &cost[b] * &self.t[r][j];
                    }
                }
                d.is_negative()
            });
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.t.len() {
                let a = &self.t[r][j];
                if !a.is_positive() {
                    continue;
                }
                let q = self.rhs(r) / a;
                let better = match &leave {
                    None => true,
                    Some((lr, lq)) => q < *lq || (q == *lq && self.basis[r] < self.basis[*lr]),
                };
                if better {
                    leave = Some((r, q));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, j),
                None => return false,
            }
        }
    }

    fn solution(&self, n: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rhs(r).clone();
            }
        }
        x
    }
}

/// A basic feasible tableau for `A x = b, x >= 0` with artificials removed.
#[derive(Debug, Clone)]
pub(crate) struct FeasibleRegion {
    tableau: Tableau,
    n: usize,
}

impl FeasibleRegion {
    /// Phase 1. Redundant equality rows are dropped.
    pub(crate) fn new(a: &[Vec<Rational>], b: &[Rational]) -> Result<Self> {
        let n = a.first().map_or(0, Vec::len);
        let m = a.len();
        let cols = n + m;
        let mut t = Vec::with_capacity(m);
        for (i, (row, bi)) in a.iter().zip(b).enumerate() {
            let sign = if bi.is_negative() { -Rational::one() } else { Rational::one() };
            let mut r: Vec<Rational> = row.iter().map(|v| v * &sign).collect();
            r.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            r.push(bi * &sign);
            t.push(r);
        }
        let mut tab = Tableau { t, basis: (n..cols).collect(), cols };
        let cost: Vec<Rational> = (0..cols).map(|j| if j < n { Rational::zero() } else { Rational::one() }).collect();
        tab.minimise(&cost, cols);
        let infeasibility: Rational =
            tab.basis.iter().enumerate().filter(|(_, &c)| c >= n).map(|(r, _)| tab.rhs(r).clone()).sum();
        if !infeasibility.is_zero() {
            return Err(Error::Infeasible);
        }
        // Drive zero-level artificials out of the basis; rows where that is
        // impossible are linear combinations of the others.
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= n {
                match (0..n).find(|&j| !tab.t[r][j].is_zero()) {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.t.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for row in tab.t.iter_mut() {
            row.drain(n..cols);
        }
        tab.cols = n;
        Ok(FeasibleRegion { tableau: tab, n })
    }

    /// Phase 2: the minimiser of `c.x` over the region.
    pub(crate) fn minimise(&self, c: &[Rational]) -> Result<Vec<Rational>> {
        let mut tab = self.tableau.clone();
        if !tab.minimise(c, self.n) {
            return Err(Error::Invalid("linear program is unbounded".into()));
        }
        Ok(tab.solution(self.n))
    }

    pub(crate) fn rank(&self) -> usize {
        self.tableau.t.len()
    }
}
