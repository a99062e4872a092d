//! Dense tableau simplex for `max Σw  s.t.  B w ≤ 1, w ≥ 0` with `B > 0`.
//!
//! Bland's rule (lowest-index entering column, lowest-index leaving basic
//! variable among ratio ties) keeps the pivot sequence deterministic and
//! guarantees termination.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) struct Solution<T> {
    /// Primal solution, one entry per column of `B`.
    pub w: Vec<T>,
    /// Optimal objective `Σw`.
    pub z: T,
}

const MAX_PIVOTS: usize = 100_000;

/// `b` is row-major `m × n` and every entry must be positive.
pub(crate) fn solve<T: Scalar>(b: &[T], m: usize, n: usize) -> Result<Solution<T>> {
    debug_assert_eq!(b.len(), m * n);
    let width = n + m + 1;
    let rhs = n + m;
    let mut tab = vec![T::zero(); m * width];
    for i in 0..m {
        let row = &mut tab[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&b[i * n..(i + 1) * n]);
        row[n + i] = T::one();
        row[rhs] = T::one();
    }
    // Reduced costs; the last slot holds -z.
    let mut obj = vec![T::zero(); width];
    obj[..n].iter_mut().for_each(|c| *c = T::one());
    let mut basis: Vec<usize> = (n..n + m).collect();
    let tol = T::tolerance();

    for _ in 0..MAX_PIVOTS {
        let Some(enter) = (0..n + m).find(|&j| obj[j] > tol) else {
            let mut w = vec![T::zero(); n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    w[bv] = tab[i * width + rhs];
                }
            }
            return Ok(Solution { w, z: -obj[rhs] });
        };

        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            let a = tab[i * width + enter];
            if a <= tol {
                continue;
            }
            let ratio = tab[i * width + rhs] / a;
            leave = match leave {
                None => Some((i, ratio)),
                Some((k, best)) => {
                    if ratio < best - tol || (ratio.approx_eq(best) && basis[i] < basis[k]) {
                        Some((i, ratio))
                    } else {
                        Some((k, best))
                    }
                }
            };
        }
        let Some((row, _)) = leave else {
            return Err(Error::Infeasible("linear program is unbounded".to_owned()));
        };

        let pivot = tab[row * width + enter];
        for v in &mut tab[row * width..(row + 1) * width] {
            *v = *v / pivot;
        }
        let pivot_row: Vec<T> = tab[row * width..(row + 1) * width].to_vec();
        for i in (0..m).filter(|&i| i != row) {
            let f = tab[i * width + enter];
            if !f.is_zero() {
                for (v, &p) in tab[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                    *v = *v - f * p;
                }
            }
        }
        let f = obj[enter];
        for (v, &p) in obj.iter_mut().zip(&pivot_row) {
            *v = *v - f * p;
        }
        basis[row] = enter;
    }
    Err(Error::Infeasible("simplex did not converge".to_owned()))
}
