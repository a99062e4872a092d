//! Zero-sum reward matrices.
//!
//! Rows are agent choices, columns opponent choices, entries the agent's
//! reward. Combinations are compared unit by unit: within a pair, the side
//! with the strictly shorter stretch-out lands first and scores its damage
//! (positive for the agent, negative for the opponent); equal stretch-outs
//! score the damage difference; an unmatched unit scores its damage
//! unopposed.

use std::fmt;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::action::ActionSet;
use crate::combo::{ActionCombination, EffectiveUnit, Step};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct RewardMatrix<T> {
    rows: Vec<String>,
    cols: Vec<String>,
    values: Vec<T>,
}

impl<T: Scalar> RewardMatrix<T> {
    pub fn new(rows: Vec<String>, cols: Vec<String>, values: Vec<Vec<T>>) -> Result<Self> {
        if values.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|r| r.len() != cols.len()) {
            return Err(Error::DimensionMismatch {
                expected: cols.len(),
                found: bad.len(),
            });
        }
        Self::from_flat(rows, cols, values.into_iter().flatten().collect())
    }

    fn from_flat(rows: Vec<String>, cols: Vec<String>, values: Vec<T>) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::invalid("reward matrix must be at least 1×1"));
        }
        if !values.iter().all(|v| v.is_finite_value()) {
            return Err(Error::NonFinite("reward matrix"));
        }
        Ok(RewardMatrix { rows, cols, values })
    }

    /// Unlabelled matrix; rows and columns are named by index.
    pub fn from_rows(values: Vec<Vec<T>>) -> Result<Self> {
        let n_rows = values.len();
        let n_cols = values.first().map_or(0, Vec::len);
        let names = |n: usize| (0..n).map(|i| i.to_string()).collect();
        Self::new(names(n_rows), names(n_cols), values)
    }

    pub fn from_fn(rows: Vec<String>, cols: Vec<String>, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * cols.len());
        for i in 0..rows.len() {
            for j in 0..cols.len() {
                values.push(f(i, j));
            }
        }
        Self::from_flat(rows, cols, values)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.rows
    }

    pub fn col_labels(&self) -> &[String] {
        &self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.cols.len() + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        let n = self.cols.len();
        &self.values[row * n..(row + 1) * n]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.n_rows()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn min_value(&self) -> T {
        self.values
            .iter()
            .copied()
            .reduce(T::min_of)
            .expect("matrix is non-empty")
    }

    pub fn transpose(&self) -> Self {
        RewardMatrix {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            values: (0..self.n_cols())
                .flat_map(|j| (0..self.n_rows()).map(move |i| (i, j)))
                .map(|(i, j)| self.get(i, j))
                .collect(),
        }
    }

    /// The same game seen from the opponent: `-Rᵀ`.
    pub fn opponent_view(&self) -> Self {
        let mut t = self.transpose();
        t.values.iter_mut().for_each(|v| *v = -*v);
        t
    }

    /// Every entry plus `c`.
    pub fn shifted(&self, c: T) -> Self {
        RewardMatrix {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            values: self.values.iter().map(|&v| v + c).collect(),
        }
    }

    /// Largest `|R[i][j] + R[j][i]|`; `None` for non-square matrices.
    pub fn skew_defect(&self) -> Option<T> {
        if self.n_rows() != self.n_cols() {
            return None;
        }
        let n = self.n_rows();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                worst = worst.max_of((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        Some(worst)
    }

    /// CSV with a header of column labels and one labelled line per row.
    /// Numbers use the scalar's `Display` form, which for floats is the
    /// shortest representation that round-trips.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = std::iter::once("agent\\opponent".to_owned()).chain(self.cols.iter().cloned());
        w.write_record(header).expect("in-memory write");
        for (i, label) in self.rows.iter().enumerate() {
            let line = std::iter::once(label.clone()).chain(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(line).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(self.to_csv_string().as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

impl<T: Scalar> fmt::Display for RewardMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n_rows() {
            let cells: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{:>12} | {}", self.rows[i], cells.join(" "))?;
        }
        Ok(())
    }
}

/// `R[m][n] = damage_m − damage_n` over an attack-only set.
pub fn single_action_matrix<T: Scalar>(set: &ActionSet<T>) -> Result<RewardMatrix<T>> {
    if let Some(a) = set.actions().iter().find(|a| !a.is_attack()) {
        return Err(Error::invalid(format!(
            "single-action matrix needs attacks only, got {}",
            a.id
        )));
    }
    let labels: Vec<String> = set.actions().iter().map(|a| a.id.clone()).collect();
    let d: Vec<T> = set.actions().iter().map(|a| a.damage).collect();
    RewardMatrix::from_fn(labels.clone(), labels, |m, n| d[m] - d[n])
}

/// How two combinations are cut into comparable units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Each attack, with its preceding feint if any, is one unit.
    #[default]
    Units,
    /// When either side uses a feint, consecutive actions are grouped in
    /// pairs (a feint always with the attack after it) and the pair's first
    /// action delays the second's hit. Without feints this equals `Units`.
    ActionPairs,
}

impl Alignment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Alignment::Units => "units",
            Alignment::ActionPairs => "action_pairs",
        }
    }
}

impl std::str::FromStr for Alignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "units" => Ok(Alignment::Units),
            "action_pairs" => Ok(Alignment::ActionPairs),
            other => Err(Error::invalid(format!("unknown alignment {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompetingPair<T> {
    pub agent: Option<EffectiveUnit<T>>,
    pub opponent: Option<EffectiveUnit<T>>,
}

impl<T: Scalar> CompetingPair<T> {
    pub fn new(agent: Option<EffectiveUnit<T>>, opponent: Option<EffectiveUnit<T>>) -> Result<Self> {
        if agent.is_none() && opponent.is_none() {
            return Err(Error::invalid("competing pair needs at least one unit"));
        }
        Ok(CompetingPair { agent, opponent })
    }

    pub fn swapped(&self) -> Self {
        CompetingPair {
            agent: self.opponent.clone(),
            opponent: self.agent.clone(),
        }
    }
}

fn paired_units<T: Scalar>(steps: &[Step<T>]) -> Vec<EffectiveUnit<T>> {
    use crate::action::ActionKind::{Attack, Defense, Feint};
    let steps: Vec<&Step<T>> = steps.iter().filter(|s| s.kind != Defense).collect();
    let mut units = Vec::new();
    let mut i = 0;
    while i < steps.len() {
        let next = steps.get(i + 1).filter(|s| s.kind == Attack);
        match (steps[i].kind, next) {
            (_, Some(second)) => {
                units.push(EffectiveUnit::fused(steps[i], second));
                i += 2;
            }
            (Feint, None) => unreachable!("combinations never end a feint without an attack"),
            _ => {
                units.push(EffectiveUnit::single(steps[i]));
                i += 1;
            }
        }
    }
    units
}

/// Unit pairs of `agent` and `opponent` by index; the longer side's extra
/// units face an absent opponent.
pub fn align_pairs<T: Scalar>(
    agent: &ActionCombination<T>,
    opp: &ActionCombination<T>,
) -> Result<Vec<CompetingPair<T>>> {
    align_pairs_with(agent, opp, Alignment::Units)
}

pub fn align_pairs_with<T: Scalar>(
    agent: &ActionCombination<T>,
    opp: &ActionCombination<T>,
    alignment: Alignment,
) -> Result<Vec<CompetingPair<T>>> {
    if agent.is_empty() && opp.is_empty() {
        return Err(Error::invalid("empty combination"));
    }
    let pair_up = alignment == Alignment::ActionPairs && (agent.feint_count() > 0 || opp.feint_count() > 0);
    let (a, b) = if pair_up {
        (paired_units(&agent.steps), paired_units(&opp.steps))
    } else {
        (agent.units.clone(), opp.units.clone())
    };
    let n = a.len().max(b.len());
    let mut a = a.into_iter();
    let mut b = b.into_iter();
    Ok((0..n)
        .map(|_| CompetingPair {
            agent: a.next(),
            opponent: b.next(),
        })
        .collect())
}

pub fn pair_reward<T: Scalar>(pair: &CompetingPair<T>) -> T {
    match (&pair.agent, &pair.opponent) {
        (Some(a), None) => a.damage,
        (None, Some(b)) => -b.damage,
        (None, None) => T::zero(),
        (Some(a), Some(b)) => {
            if a.stretch_out.approx_eq(b.stretch_out) {
                a.damage - b.damage
            } else if a.stretch_out < b.stretch_out {
                a.damage
            } else {
                -b.damage
            }
        }
    }
}

/// Sum of pair rewards over `align_pairs(agent, opp)`.
pub fn combination_reward<T: Scalar>(
    agent: &ActionCombination<T>,
    opp: &ActionCombination<T>,
    alignment: Alignment,
) -> Result<T> {
    Ok(align_pairs_with(agent, opp, alignment)?
        .iter()
        .fold(T::zero(), |acc, p| acc + pair_reward(p)))
}

pub fn combination_matrix<T: Scalar>(
    agent: &[ActionCombination<T>],
    opp: &[ActionCombination<T>],
) -> Result<RewardMatrix<T>> {
    combination_matrix_with(agent, opp, Alignment::Units)
}

pub fn combination_matrix_with<T: Scalar>(
    agent: &[ActionCombination<T>],
    opp: &[ActionCombination<T>],
    alignment: Alignment,
) -> Result<RewardMatrix<T>> {
    if agent.is_empty() || opp.is_empty() {
        return Err(Error::Infeasible("no admissible combinations".to_owned()));
    }
    let mut values = Vec::with_capacity(agent.len());
    for a in agent {
        let row = opp
            .iter()
            .map(|b| combination_reward(a, b, alignment))
            .collect::<Result<Vec<T>>>()?;
        values.push(row);
    }
    RewardMatrix::new(
        agent.iter().map(ActionCombination::label).collect(),
        opp.iter().map(ActionCombination::label).collect(),
        values,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::ActionSpec;
    use crate::combo::{enumerate_combinations, EnumerationConfig};
    use crate::scalar::Exact;

    fn boxing() -> ActionSet<f64> {
        ActionSet::new(
            1,
            vec![
                ActionSpec::attack("A1", 1.0, 1.0, 0.4),
                ActionSpec::attack("A2", 1.5, 2.0, 0.8),
                ActionSpec::attack("A3", 2.5, 2.5, 1.0),
                ActionSpec::attack("A4", 4.0, 3.5, 1.4),
                ActionSpec::attack("A5", 5.0, 5.0, 1.3),
                ActionSpec::synthetic_feint("F1", 0.5, "neutral"),
            ],
        )
        .unwrap()
    }

    fn combo(set: &ActionSet<f64>, ids: &[&str]) -> ActionCombination<f64> {
        let actions: Vec<_> = ids.iter().map(|id| set.get(id).unwrap()).collect();
        ActionCombination::from_actions(&actions).unwrap()
    }

    #[test]
    fn three_action_matrix_is_exact() {
        let e = |n| Exact::from_integer(n);
        let set = ActionSet::new(
            1,
            vec![
                ActionSpec::attack("A1", e(1), e(1), e(0)),
                ActionSpec::attack("A2", e(2), e(1), e(0)),
                ActionSpec::attack("A3", e(3), e(1), e(0)),
            ],
        )
        .unwrap();
        let r = single_action_matrix(&set).unwrap();
        assert_eq!(
            r.to_rows(),
            vec![
                vec![e(0), e(-1), e(-2)],
                vec![e(1), e(0), e(-1)],
                vec![e(2), e(1), e(0)]
            ]
        );
    }

    #[test]
    fn single_action_entries() {
        let set = ActionSet::new(1, boxing().attacks().cloned().collect()).unwrap();
        let r = single_action_matrix(&set).unwrap();
        assert_eq!(r.get(0, 4), -4.0);
        let one = ActionSet::new(1, vec![ActionSpec::attack("A1", 1.0, 1.0, 0.4)]).unwrap();
        assert_eq!(single_action_matrix(&one).unwrap().to_rows(), vec![vec![0.0]]);
        assert!(single_action_matrix(&boxing()).is_err());
    }

    #[test]
    fn worked_example_pairs() {
        let set = boxing();
        let pairs = align_pairs(&combo(&set, &["A1", "A3", "A4"]), &combo(&set, &["A5", "A2"])).unwrap();
        let labels: Vec<_> = pairs
            .iter()
            .map(|p| {
                (
                    p.agent.as_ref().map(|u| u.label()),
                    p.opponent.as_ref().map(|u| u.label()),
                )
            })
            .collect();
        assert_eq!(
            labels,
            vec![
                (Some("A1".into()), Some("A5".into())),
                (Some("A3".into()), Some("A2".into())),
                (Some("A4".into()), None)
            ]
        );
        let rewards: Vec<f64> = pairs.iter().map(pair_reward).collect();
        assert_eq!(rewards, vec![1.0, -1.5, 4.0]);
    }

    #[test]
    fn feint_example_under_both_alignments() {
        let set = boxing();
        let a = combo(&set, &["F1", "A4", "A2", "A2"]);
        let b = combo(&set, &["A1", "A2", "F1", "A5"]);
        let label = |pairs: Vec<CompetingPair<f64>>| -> Vec<(String, String)> {
            pairs
                .iter()
                .map(|p| (p.agent.as_ref().unwrap().label(), p.opponent.as_ref().unwrap().label()))
                .collect()
        };
        assert_eq!(
            label(align_pairs(&a, &b).unwrap()),
            vec![
                ("F1+A4".into(), "A1".into()),
                ("A2".into(), "A2".into()),
                ("A2".into(), "F1+A5".into())
            ]
        );
        assert_eq!(
            label(align_pairs_with(&a, &b, Alignment::ActionPairs).unwrap()),
            vec![("F1+A4".into(), "A1+A2".into()), ("A2+A2".into(), "F1+A5".into())]
        );
    }

    #[test]
    fn empty_combinations_cannot_be_aligned() {
        let empty = ActionCombination::<f64>::from_steps(Vec::new()).unwrap();
        let err = align_pairs(&empty, &empty).unwrap_err();
        assert_eq!(err.to_string(), "empty combination");
    }

    #[test]
    fn pair_rules() {
        let set = boxing();
        let unit = |id: &str| combo(&set, &[id]).units[0].clone();
        let p = |a: Option<&str>, b: Option<&str>| pair_reward(&CompetingPair::new(a.map(unit), b.map(unit)).unwrap());
        assert_eq!(p(Some("A4"), None), 4.0);
        assert_eq!(p(None, Some("A4")), -4.0);
        assert_eq!(p(Some("A2"), Some("A2")), 0.0);
        assert_eq!(p(Some("A1"), Some("A5")), 1.0);
        assert_eq!(p(Some("A5"), Some("A1")), -1.0);
        assert!(CompetingPair::<f64>::new(None, None).is_err());
    }

    #[test]
    fn shared_list_gives_skew_symmetric_matrix() {
        let set = boxing();
        let combos = enumerate_combinations(&set, &EnumerationConfig::new(5.5).with_feints(1));
        for alignment in [Alignment::Units, Alignment::ActionPairs] {
            let r = combination_matrix_with(&combos, &combos, alignment).unwrap();
            assert_eq!(r.skew_defect(), Some(0.0));
            for i in 0..r.n_rows() {
                assert_eq!(r.get(i, i), 0.0);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let r = RewardMatrix::new(
            vec!["A1+A2".into()],
            vec!["A1".into(), "A2".into()],
            vec![vec![0.5, -1.0]],
        )
        .unwrap();
        assert_eq!(r.to_csv_string(), "agent\\opponent,A1,A2\nA1+A2,0.5,-1\n");
    }

    #[test]
    fn transpose_and_opponent_view() {
        let r = RewardMatrix::from_rows(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(
            r.transpose().to_rows(),
            vec![vec![1.0, 4.0], vec![2.0, 5.0], vec![3.0, 6.0]]
        );
        assert_eq!(r.opponent_view().get(2, 1), -6.0);
        assert_eq!(r.skew_defect(), None);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(RewardMatrix::<f64>::from_rows(vec![]).is_err());
        assert!(RewardMatrix::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(RewardMatrix::from_rows(vec![vec![f64::NAN]]).is_err());
    }
}
