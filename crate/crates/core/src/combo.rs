//! Lookahead-bounded action combinations and feint timing regimes.
//!
//! A combination is an ordered sequence of actions whose total time fits a
//! planning horizon `L` tightly: `total < L` and `total + t_min ≥ L`, where
//! `t_min` is the shortest attack. Each feint must be followed by an attack;
//! the feint and that attack form one effective unit whose stretch-out time
//! is the feint's duration plus the attack's stretch-out time.

use std::fmt;

use crate::action::{ActionKind, ActionSet, ActionSpec};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationConfig<T> {
    pub lookahead: T,
    pub allow_feints: bool,
    pub max_feints_per_combo: usize,
    pub enforce_stance_links: bool,
    /// Pose distance accepted at a frame-level link.
    pub link_eps: T,
}

impl<T: Scalar> EnumerationConfig<T> {
    /// Attacks only, no link checks.
    pub fn new(lookahead: T) -> Self {
        EnumerationConfig {
            lookahead,
            allow_feints: false,
            max_feints_per_combo: 1,
            enforce_stance_links: false,
            link_eps: lit(1e-6),
        }
    }

    pub fn with_feints(mut self, max_feints_per_combo: usize) -> Self {
        self.allow_feints = true;
        self.max_feints_per_combo = max_feints_per_combo;
        self
    }

    pub fn with_stance_links(mut self) -> Self {
        self.enforce_stance_links = true;
        self
    }
}

/// Timing summary of one member action of a combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<T> {
    pub id: String,
    pub kind: ActionKind,
    pub total_time: T,
    pub stretch_out_time: T,
    pub damage: T,
}

impl<T: Scalar> Step<T> {
    pub fn of(spec: &ActionSpec<T>) -> Self {
        Step {
            id: spec.id.clone(),
            kind: spec.kind,
            total_time: spec.total_time,
            stretch_out_time: spec.stretch_out_time,
            damage: spec.damage,
        }
    }
}

/// The action played right before an attack and folded into its unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Lead<T> {
    pub id: String,
    pub kind: ActionKind,
    pub total_time: T,
}

/// One attack, optionally preceded by a lead action that delays its hit.
///
/// With the default unit grouping the lead is always a feint. Paired
/// grouping (see `reward::Alignment`) may also lead with an attack, in which
/// case both damages count.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveUnit<T> {
    pub lead: Option<Lead<T>>,
    pub attack: String,
    pub stretch_out: T,
    pub damage: T,
}

impl<T: Scalar> EffectiveUnit<T> {
    pub fn single(attack: &Step<T>) -> Self {
        EffectiveUnit {
            lead: None,
            attack: attack.id.clone(),
            stretch_out: attack.stretch_out_time,
            damage: attack.damage,
        }
    }

    pub fn fused(lead: &Step<T>, attack: &Step<T>) -> Self {
        EffectiveUnit {
            lead: Some(Lead {
                id: lead.id.clone(),
                kind: lead.kind,
                total_time: lead.total_time,
            }),
            attack: attack.id.clone(),
            stretch_out: lead.total_time + attack.stretch_out_time,
            damage: lead.damage + attack.damage,
        }
    }

    /// A feint of arbitrary (possibly zero) duration in front of `attack`.
    pub fn with_feint(feint_id: &str, feint_time: T, attack: &Step<T>) -> Self {
        let lead = Step {
            id: feint_id.to_owned(),
            kind: ActionKind::Feint,
            total_time: feint_time,
            stretch_out_time: T::zero(),
            damage: T::zero(),
        };
        Self::fused(&lead, attack)
    }

    pub fn feint(&self) -> Option<&Lead<T>> {
        self.lead.as_ref().filter(|l| l.kind == ActionKind::Feint)
    }

    /// `F1+A4` style label.
    pub fn label(&self) -> String {
        match &self.lead {
            Some(l) => format!("{}+{}", l.id, self.attack),
            None => self.attack.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionCombination<T> {
    pub sequence: Vec<String>,
    pub total_time: T,
    pub units: Vec<EffectiveUnit<T>>,
    pub steps: Vec<Step<T>>,
}

impl<T: Scalar> ActionCombination<T> {
    /// Builds a combination from member actions in play order. Defense
    /// actions take time but form no unit.
    pub fn from_actions(actions: &[&ActionSpec<T>]) -> Result<Self> {
        let steps: Vec<Step<T>> = actions.iter().map(|a| Step::of(a)).collect();
        Self::from_steps(steps)
    }

    pub fn from_steps(steps: Vec<Step<T>>) -> Result<Self> {
        let mut units = Vec::new();
        let mut pending: Option<&Step<T>> = None;
        for step in &steps {
            match (step.kind, pending) {
                (ActionKind::Feint, Some(_)) | (ActionKind::Defense, Some(_)) => {
                    return Err(Error::invalid("feint must be followed by an attack"));
                }
                (ActionKind::Feint, None) => pending = Some(step),
                (ActionKind::Attack, Some(f)) => {
                    units.push(EffectiveUnit::fused(f, step));
                    pending = None;
                }
                (ActionKind::Attack, None) => units.push(EffectiveUnit::single(step)),
                (ActionKind::Defense, None) => {}
            }
        }
        if pending.is_some() {
            return Err(Error::invalid("feint must be followed by an attack"));
        }
        Ok(ActionCombination {
            sequence: steps.iter().map(|s| s.id.clone()).collect(),
            total_time: steps.iter().fold(T::zero(), |acc, s| acc + s.total_time),
            units,
            steps,
        })
    }

    pub fn label(&self) -> String {
        self.sequence.join("+")
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn feint_count(&self) -> usize {
        self.steps.iter().filter(|s| s.kind == ActionKind::Feint).count()
    }
}

impl<T: Scalar> fmt::Display for ActionCombination<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.sequence.join(","))
    }
}

/// Whether `next` can start where `prev` ends: frame poses within `eps` when
/// both carry frames, equal stance labels otherwise.
pub fn check_physical_link<T: Scalar>(prev: &ActionSpec<T>, next: &ActionSpec<T>, eps: T) -> bool {
    if let (Some(a), Some(b)) = (&prev.frames, &next.frames) {
        let last = a.frames().last().expect("frame sequences are non-empty");
        let first = &b.frames()[0];
        if last.dim() != first.dim() {
            return false;
        }
        let sq = last
            .joints()
            .iter()
            .zip(first.joints())
            .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
        return sq <= eps * eps;
    }
    prev.stance_end == next.stance_start
}

/// All admissible combinations, in lexicographic order of member position in
/// `set` (a combination precedes its extensions).
///
/// Feints are only considered when `cfg.allow_feints`; the admissibility
/// bound uses the shortest attack, since a combination cannot end on a
/// feint.
pub fn enumerate_combinations<T: Scalar>(set: &ActionSet<T>, cfg: &EnumerationConfig<T>) -> Vec<ActionCombination<T>> {
    let members: Vec<&ActionSpec<T>> = set
        .actions()
        .iter()
        .filter(|a| a.is_attack() || (cfg.allow_feints && a.is_feint()))
        .collect();
    let Some(min_time) = set.attacks().map(|a| a.total_time).reduce(T::min_of) else {
        return Vec::new();
    };

    let mut search = Search {
        members: &members,
        cfg,
        min_time,
        path: Vec::new(),
        out: Vec::new(),
    };
    search.visit(T::zero(), 0);
    search.out
}

struct Search<'a, T> {
    members: &'a [&'a ActionSpec<T>],
    cfg: &'a EnumerationConfig<T>,
    min_time: T,
    path: Vec<&'a ActionSpec<T>>,
    out: Vec<ActionCombination<T>>,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn visit(&mut self, total: T, feints: usize) {
        let tol = T::tolerance();
        let limit = self.cfg.lookahead;
        let last = self.path.last().copied();
        if let Some(last) = last {
            if !last.is_feint() && total + self.min_time >= limit - tol {
                let combo = ActionCombination::from_actions(&self.path).expect("search keeps feints before attacks");
                self.out.push(combo);
            }
        }
        for &next in self.members {
            if next.is_feint() && (feints >= self.cfg.max_feints_per_combo || last.is_some_and(|l| l.is_feint())) {
                continue;
            }
            if self.cfg.enforce_stance_links {
                if let Some(prev) = last {
                    if !check_physical_link(prev, next, self.cfg.link_eps) {
                        continue;
                    }
                }
            }
            let t = total + next.total_time;
            if t < limit - tol {
                self.path.push(next);
                self.visit(t, feints + usize::from(next.is_feint()));
                self.path.pop();
            }
        }
    }
}

/// Key instants of a feint-then-attack against an opponent's two actions,
/// measured from a common origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingMarks<T> {
    /// End of the opponent's first action.
    pub t_b1: T,
    /// Damage start of the agent's fused attack.
    pub t_a2: T,
    /// Damage start of the opponent's second action.
    pub t_b2: T,
}

impl<T: Scalar> TimingMarks<T> {
    pub fn new(t_b1: T, t_a2: T, t_b2: T) -> Result<Self> {
        if !(t_b1 <= t_b2) {
            return Err(Error::invalid("timing marks require t_B1 ≤ t_B2"));
        }
        Ok(TimingMarks { t_b1, t_a2, t_b2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeintRegime {
    TooShort,
    Proper,
    TooLong,
}

impl FeintRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeintRegime::TooShort => "too_short",
            FeintRegime::Proper => "proper",
            FeintRegime::TooLong => "too_long",
        }
    }
}

impl fmt::Display for FeintRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `t_A2 < t_B1` is too short, `t_B1 ≤ t_A2 < t_B2` proper, otherwise too long.
pub fn classify_feint_timing<T: Scalar>(marks: &TimingMarks<T>) -> FeintRegime {
    if marks.t_a2 < marks.t_b1 {
        FeintRegime::TooShort
    } else if marks.t_a2 < marks.t_b2 {
        FeintRegime::Proper
    } else {
        FeintRegime::TooLong
    }
}

/// Timing marks for the agent's feint unit against the opponent's first
/// action and second unit, both sides starting at time zero.
pub fn compute_timing_marks<T: Scalar>(
    agent_unit: &EffectiveUnit<T>,
    opponent_first: &ActionSpec<T>,
    opponent_second: Option<&EffectiveUnit<T>>,
) -> Result<TimingMarks<T>> {
    if agent_unit.feint().is_none() {
        return Err(Error::invalid("agent unit has no feint"));
    }
    let second = opponent_second.ok_or_else(|| Error::invalid("opponent second unit missing"))?;
    let t_b1 = opponent_first.total_time;
    TimingMarks::new(t_b1, agent_unit.stretch_out, t_b1 + second.stretch_out)
}
