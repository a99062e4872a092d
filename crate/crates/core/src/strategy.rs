//! Maximin policies for zero-sum matrix games.
//!
//! The agent picks a row distribution `x` maximising `min_j (xᵀR)_j`; the
//! opponent picks a column distribution minimising `max_i (R y)_i`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::reward::RewardMatrix;
use crate::scalar::{lit, Real, Scalar};
use crate::simplex;

#[derive(Debug, Clone, PartialEq)]
pub struct Policy<T> {
    labels: Vec<String>,
    probabilities: Vec<T>,
}

impl<T: Scalar> Policy<T> {
    pub fn new(labels: Vec<String>, probabilities: Vec<T>) -> Result<Self> {
        if labels.len() != probabilities.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: probabilities.len(),
            });
        }
        if probabilities.is_empty() {
            return Err(Error::invalid("policy needs at least one choice"));
        }
        if !probabilities.iter().all(|p| p.is_finite_value()) {
            return Err(Error::NonFinite("policy"));
        }
        let floor = -lit::<T>(1e-12).max_of(T::tolerance());
        if probabilities.iter().any(|&p| p < floor) {
            return Err(Error::invalid("policy has a negative probability"));
        }
        let sum = probabilities.iter().fold(T::zero(), |a, &p| a + p);
        if (sum - T::one()).abs() > lit::<T>(1e-9).max_of(T::tolerance()) {
            return Err(Error::invalid(format!("policy sums to {sum}, not 1")));
        }
        Ok(Policy { labels, probabilities })
    }

    /// All mass on `index`.
    pub fn pure(labels: Vec<String>, index: usize) -> Result<Self> {
        let mut p = vec![T::zero(); labels.len()];
        *p.get_mut(index)
            .ok_or_else(|| Error::invalid("pure policy index out of range"))? = T::one();
        Self::new(labels, p)
    }

    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        let n = T::from_usize_lossy(labels.len());
        let p = vec![T::one() / n; labels.len()];
        Self::new(labels, p)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn max_probability(&self) -> T {
        self.probabilities
            .iter()
            .copied()
            .reduce(T::max_of)
            .expect("policy is non-empty")
    }

    /// `choice,probability` lines under a header.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("choice,probability\n");
        for (l, p) in self.labels.iter().zip(&self.probabilities) {
            writeln!(s, "{l},{p}").expect("string write");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution<T> {
    /// Distribution over rows.
    pub agent_policy: Policy<T>,
    /// Distribution over columns.
    pub opponent_policy: Policy<T>,
    /// Guaranteed expected reward of `agent_policy`: `min_j (xᵀR)_j`.
    pub value: T,
}

/// Clamps tiny negatives from rounding and rescales to unit mass.
fn normalise<T: Scalar>(raw: Vec<T>) -> Vec<T> {
    let clamped: Vec<T> = raw.into_iter().map(|v| v.max_of(T::zero())).collect();
    let sum = clamped.iter().fold(T::zero(), |a, &v| a + v);
    clamped.into_iter().map(|v| v / sum).collect()
}

/// Minimax column distribution `y` of `min_y max_i (R y)_i`.
///
/// The matrix is shifted to be strictly positive, after which
/// `max Σw s.t. (R + c) w ≤ 1, w ≥ 0` is solved by simplex and `y = w / Σw`.
fn column_strategy<T: Scalar>(r: &RewardMatrix<T>) -> Result<Vec<T>> {
    let (m, n) = (r.n_rows(), r.n_cols());
    let shift = T::one() - r.min_value();
    let b: Vec<T> = (0..m).flat_map(|i| r.row(i).iter().map(move |&v| v + shift)).collect();
    let s = simplex::solve(&b, m, n)?;
    if !(s.z > T::zero()) {
        return Err(Error::Infeasible("degenerate game".to_owned()));
    }
    Ok(normalise(s.w.iter().map(|&w| w / s.z).collect()))
}

/// Solves `max_x min_j (xᵀR)_j` over row distributions `x`.
///
/// Each player's policy is the primal solution of its own program: the
/// opponent's on `R`, the agent's on `-Rᵀ`. A game whose matrix is
/// skew-symmetric therefore gives both players the same policy. Ties
/// between optimal vertices are broken by lowest index, so results are
/// deterministic.
pub fn solve_maximin<T: Scalar>(r: &RewardMatrix<T>) -> Result<GameSolution<T>> {
    let y = column_strategy(r)?;
    let x = column_strategy(&r.opponent_view())?;
    let value = (0..r.n_cols())
        .map(|j| (0..r.n_rows()).fold(T::zero(), |acc, i| acc + x[i] * r.get(i, j)))
        .reduce(T::min_of)
        .expect("matrix is non-empty");
    Ok(GameSolution {
        agent_policy: Policy::new(r.row_labels().to_vec(), x)?,
        opponent_policy: Policy::new(r.col_labels().to_vec(), y)?,
        value,
    })
}

/// `agentᵀ R opp`.
pub fn expected_reward<T: Scalar>(r: &RewardMatrix<T>, agent: &Policy<T>, opp: &Policy<T>) -> Result<T> {
    if agent.len() != r.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: r.n_rows(),
            found: agent.len(),
        });
    }
    if opp.len() != r.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: r.n_cols(),
            found: opp.len(),
        });
    }
    let mut total = T::zero();
    for (i, &x) in agent.probabilities().iter().enumerate() {
        for (j, &y) in opp.probabilities().iter().enumerate() {
            total = total + x * r.get(i, j) * y;
        }
    }
    Ok(total)
}

/// Shannon entropy in bits, with `0 · log 0 = 0`.
pub fn policy_entropy<T: Real>(p: &Policy<T>) -> T {
    let two = T::one() + T::one();
    p.probabilities()
        .iter()
        .filter(|&&q| q > T::zero())
        .fold(T::zero(), |acc, &q| acc - q * q.log(two))
}
