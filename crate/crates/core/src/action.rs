//! Timed actions, their pose frames and the action-set file format.
//!
//! An attack is split into three consecutive frame ranges: the stretch-out
//! stage `[0, stage1_end)`, the damage stage `[stage1_end, damage_end]` and the
//! retract stage `(damage_end, last]`. Frame-less actions carry only timing,
//! damage and stance labels.

use std::collections::HashSet;
use std::fs;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

pub const STANCE_NEUTRAL: &str = "neutral";
pub const STANCE_LEFT_FORWARD: &str = "left-forward";
pub const STANCE_RIGHT_FORWARD: &str = "right-forward";

/// One sampled body configuration: a flat vector of joint values.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose<T>(Vec<T>);

impl<T: Scalar> Pose<T> {
    pub fn new(joints: Vec<T>) -> Self {
        Pose(joints)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn joints(&self) -> &[T] {
        &self.0
    }

    fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite_value())
    }
}

impl<T: Scalar> From<Vec<T>> for Pose<T> {
    fn from(joints: Vec<T>) -> Self {
        Pose(joints)
    }
}

/// Euclidean distance between two poses of equal dimension.
pub fn pose_distance<T: Real>(a: &Pose<T>, b: &Pose<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let sum =
        a.0.iter()
            .zip(&b.0)
            .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
    Ok(sum.sqrt())
}

/// Ordered poses sampled every `frame_dt` units of time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence<T> {
    frames: Vec<Pose<T>>,
    frame_dt: T,
}

impl<T: Scalar> FrameSequence<T> {
    pub fn new(frames: Vec<Pose<T>>, frame_dt: T) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::invalid("frame sequence needs at least 2 frames"));
        }
        if !(frame_dt > T::zero()) || !frame_dt.is_finite_value() {
            return Err(Error::invalid("frame_dt must be positive"));
        }
        let dim = frames[0].dim();
        if let Some(bad) = frames.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        if !frames.iter().all(Pose::is_finite) {
            return Err(Error::NonFinite("frame poses"));
        }
        Ok(FrameSequence { frames, frame_dt })
    }

    /// Builds a one-joint sequence from scalar samples.
    pub fn from_scalars(values: &[T], frame_dt: T) -> Result<Self> {
        Self::new(values.iter().map(|&v| Pose(vec![v])).collect(), frame_dt)
    }

    pub fn frames(&self) -> &[Pose<T>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_dt(&self) -> T {
        self.frame_dt
    }

    pub fn dim(&self) -> usize {
        self.frames[0].dim()
    }

    /// Frame count times `frame_dt`.
    pub fn duration(&self) -> T {
        T::from_usize_lossy(self.frames.len()) * self.frame_dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageAnnotation {
    pub stage1_end: usize,
    pub damage_end: usize,
}

impl StageAnnotation {
    pub fn stretch_out(&self) -> Range<usize> {
        0..self.stage1_end
    }

    /// Inclusive of `damage_end`.
    pub fn damage(&self) -> Range<usize> {
        self.stage1_end..self.damage_end + 1
    }

    pub fn retract(&self, frame_count: usize) -> Range<usize> {
        self.damage_end + 1..frame_count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Attack,
    Defense,
    Feint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpec<T> {
    pub id: String,
    pub kind: ActionKind,
    pub damage: T,
    pub total_time: T,
    pub stretch_out_time: T,
    pub stance_start: String,
    pub stance_end: String,
    pub frames: Option<FrameSequence<T>>,
    pub stages: Option<StageAnnotation>,
}

impl<T: Scalar> ActionSpec<T> {
    /// A frame-less attack.
    pub fn attack(id: &str, damage: T, total_time: T, stretch_out_time: T) -> Self {
        ActionSpec {
            id: id.to_owned(),
            kind: ActionKind::Attack,
            damage,
            total_time,
            stretch_out_time,
            stance_start: STANCE_NEUTRAL.to_owned(),
            stance_end: STANCE_NEUTRAL.to_owned(),
            frames: None,
            stages: None,
        }
    }

    /// A frame-less feint of the given duration. Its stretch-out time is the
    /// turning point halfway through the motion.
    pub fn synthetic_feint(id: &str, duration: T, stance: &str) -> Self {
        let two = T::one() + T::one();
        ActionSpec {
            id: id.to_owned(),
            kind: ActionKind::Feint,
            damage: T::zero(),
            total_time: duration,
            stretch_out_time: duration / two,
            stance_start: stance.to_owned(),
            stance_end: stance.to_owned(),
            frames: None,
            stages: None,
        }
    }

    /// A frame-less defensive action with no damage.
    pub fn guard(id: &str, duration: T) -> Self {
        ActionSpec {
            id: id.to_owned(),
            kind: ActionKind::Defense,
            damage: T::zero(),
            total_time: duration,
            stretch_out_time: T::zero(),
            stance_start: STANCE_NEUTRAL.to_owned(),
            stance_end: STANCE_NEUTRAL.to_owned(),
            frames: None,
            stages: None,
        }
    }

    pub fn is_attack(&self) -> bool {
        self.kind == ActionKind::Attack
    }

    pub fn is_feint(&self) -> bool {
        self.kind == ActionKind::Feint
    }

    /// Checks every per-action invariant against the set's joint dimension.
    pub fn check(&self, joint_dimension: usize) -> Result<()> {
        let fail = |msg: &str| Err(Error::validation(Some(&self.id), msg));
        if self.id.is_empty() {
            return Err(Error::validation(None, "action id must not be empty"));
        }
        for (name, v) in [
            ("damage", self.damage),
            ("total_time", self.total_time),
            ("stretch_out_time", self.stretch_out_time),
        ] {
            if !v.is_finite_value() {
                return fail(&format!("{name} must be finite"));
            }
        }
        if self.damage < T::zero() {
            return fail("damage must be non-negative");
        }
        if self.kind == ActionKind::Feint && !self.damage.is_zero() {
            return fail("feint must have zero damage");
        }
        if !(self.total_time > T::zero()) {
            return fail("total_time must be positive");
        }
        if self.stretch_out_time < T::zero() {
            return fail("stretch_out_time must be non-negative");
        }
        if self.stretch_out_time > self.total_time {
            return fail("stretch_out_time exceeds total_time");
        }
        if let Some(frames) = &self.frames {
            if frames.dim() != joint_dimension {
                return fail(&format!(
                    "frames have dimension {}, set declares {}",
                    frames.dim(),
                    joint_dimension
                ));
            }
            let dt = frames.frame_dt();
            if (frames.duration() - self.total_time).abs() > dt + T::tolerance() {
                return fail("frame count times frame_dt disagrees with total_time");
            }
        }
        match (&self.stages, &self.frames) {
            (Some(_), None) => fail("stages require frames"),
            (Some(_), Some(_)) => {
                let violations = validate_stages(self);
                if violations.is_empty() {
                    Ok(())
                } else {
                    fail(&violations.join("; "))
                }
            }
            _ => Ok(()),
        }
    }
}

/// Lists every way the stage annotation of `spec` is inconsistent with its
/// frames. An empty list means the annotation is valid.
pub fn validate_stages<T: Scalar>(spec: &ActionSpec<T>) -> Vec<String> {
    let (frames, stages) = match (&spec.frames, &spec.stages) {
        (Some(f), Some(s)) => (f, s),
        (None, _) => return vec!["frames missing".to_owned()],
        (_, None) => return vec!["stages missing".to_owned()],
    };
    let n = frames.len();
    let mut out = Vec::new();
    if stages.stage1_end == 0 {
        out.push("stage 1 empty".to_owned());
    }
    if stages.damage_end < stages.stage1_end {
        out.push("stage 2 empty".to_owned());
    }
    if stages.damage_end + 1 >= n {
        out.push("stage 3 empty".to_owned());
    }
    if stages.stage1_end > 0 {
        let dt = frames.frame_dt();
        let stage1 = T::from_usize_lossy(stages.stage1_end) * dt;
        if (stage1 - spec.stretch_out_time).abs() > dt + T::tolerance() {
            out.push("stretch-out time disagrees with stage 1 length".to_owned());
        }
    }
    out
}

/// A validated collection of actions sharing one joint dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet<T> {
    joint_dimension: usize,
    actions: Vec<ActionSpec<T>>,
}

impl<T: Scalar> ActionSet<T> {
    pub fn new(joint_dimension: usize, actions: Vec<ActionSpec<T>>) -> Result<Self> {
        if joint_dimension == 0 {
            return Err(Error::validation(None, "joint_dimension must be at least 1"));
        }
        if actions.is_empty() {
            return Err(Error::validation(None, "action set empty"));
        }
        let mut seen = HashSet::new();
        for a in &actions {
            if !seen.insert(a.id.as_str()) {
                return Err(Error::validation(Some(&a.id), "duplicate action id"));
            }
            a.check(joint_dimension)?;
        }
        Ok(ActionSet {
            joint_dimension,
            actions,
        })
    }

    pub fn joint_dimension(&self) -> usize {
        self.joint_dimension
    }

    pub fn actions(&self) -> &[ActionSpec<T>] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ActionSpec<T>> {
        self.actions.iter().find(|a| a.id == id)
    }

    pub fn attacks(&self) -> impl Iterator<Item = &ActionSpec<T>> {
        self.actions.iter().filter(|a| a.is_attack())
    }

    pub fn feints(&self) -> impl Iterator<Item = &ActionSpec<T>> {
        self.actions.iter().filter(|a| a.is_feint())
    }

    /// Returns a copy with `extra` appended, re-validated.
    pub fn with_action(&self, extra: ActionSpec<T>) -> Result<Self> {
        let mut actions = self.actions.clone();
        actions.push(extra);
        Self::new(self.joint_dimension, actions)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let record: ActionSetRecord = serde_json::from_str(text)?;
        record.into_set()
    }

    pub fn to_json_string(&self) -> String {
        let record = ActionSetRecord::from_set(self);
        let mut s = serde_json::to_string_pretty(&record).expect("action set serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }
}

/// Serializes actions in the action-set file format without requiring the
/// list to form a valid (non-empty) set.
pub fn actions_to_json<T: Scalar>(joint_dimension: usize, actions: &[ActionSpec<T>]) -> String {
    let record = ActionSetRecord {
        joint_dimension,
        actions: actions.iter().map(ActionRecord::from_spec).collect(),
    };
    let mut s = serde_json::to_string_pretty(&record).expect("action set serializes");
    s.push('\n');
    s
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionSetRecord {
    joint_dimension: usize,
    actions: Vec<ActionRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionRecord {
    id: String,
    kind: ActionKind,
    damage: f64,
    total_time: f64,
    stretch_out_time: f64,
    stance_start: String,
    stance_end: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frames: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stages: Option<StageAnnotation>,
}

fn to_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

fn from_f64<T: Scalar>(id: &str, field: &str, v: f64) -> Result<T> {
    T::from_f64(v)
        .filter(|x| x.is_finite_value())
        .ok_or_else(|| Error::validation(Some(id), format!("{field} is not representable")))
}

impl ActionRecord {
    fn from_spec<T: Scalar>(a: &ActionSpec<T>) -> Self {
        ActionRecord {
            id: a.id.clone(),
            kind: a.kind,
            damage: to_f64(a.damage),
            total_time: to_f64(a.total_time),
            stretch_out_time: to_f64(a.stretch_out_time),
            stance_start: a.stance_start.clone(),
            stance_end: a.stance_end.clone(),
            frame_dt: a.frames.as_ref().map(|f| to_f64(f.frame_dt())),
            frames: a.frames.as_ref().map(|f| {
                f.frames()
                    .iter()
                    .map(|p| p.joints().iter().map(|&v| to_f64(v)).collect())
                    .collect()
            }),
            stages: a.stages,
        }
    }

    fn into_spec<T: Scalar>(self) -> Result<ActionSpec<T>> {
        let id = self.id;
        let frames = match (self.frames, self.frame_dt) {
            (None, None) => None,
            (Some(_), None) => return Err(Error::validation(Some(&id), "frames require frame_dt")),
            (None, Some(_)) => return Err(Error::validation(Some(&id), "frame_dt given without frames")),
            (Some(rows), Some(dt)) => {
                let poses = rows
                    .into_iter()
                    .map(|row| {
                        row.into_iter()
                            .map(|v| from_f64(&id, "frame value", v))
                            .collect::<Result<Vec<T>>>()
                            .map(Pose)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let dt = from_f64(&id, "frame_dt", dt)?;
                let seq = FrameSequence::new(poses, dt).map_err(|e| Error::validation(Some(&id), e.to_string()))?;
                Some(seq)
            }
        };
        Ok(ActionSpec {
            damage: from_f64(&id, "damage", self.damage)?,
            total_time: from_f64(&id, "total_time", self.total_time)?,
            stretch_out_time: from_f64(&id, "stretch_out_time", self.stretch_out_time)?,
            id,
            kind: self.kind,
            stance_start: self.stance_start,
            stance_end: self.stance_end,
            frames,
            stages: self.stages,
        })
    }
}

impl ActionSetRecord {
    fn from_set<T: Scalar>(set: &ActionSet<T>) -> Self {
        ActionSetRecord {
            joint_dimension: set.joint_dimension,
            actions: set.actions.iter().map(ActionRecord::from_spec).collect(),
        }
    }

    fn into_set<T: Scalar>(self) -> Result<ActionSet<T>> {
        let actions = self
            .actions
            .into_iter()
            .map(ActionRecord::into_spec)
            .collect::<Result<Vec<_>>>()?;
        ActionSet::new(self.joint_dimension, actions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_action(stage1_end: usize, damage_end: usize) -> ActionSpec<f64> {
        let values = [0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0, 0.0];
        ActionSpec {
            frames: Some(FrameSequence::from_scalars(&values, 0.25).unwrap()),
            stages: Some(StageAnnotation { stage1_end, damage_end }),
            ..ActionSpec::attack("J", 1.0, 2.25, 1.0)
        }
    }

    #[test]
    fn distance_examples() {
        let d = |a: Vec<f64>, b: Vec<f64>| pose_distance(&Pose::new(a), &Pose::new(b)).unwrap();
        assert_eq!(d(vec![1.0, 2.0], vec![1.0, 2.0]), 0.0);
        assert_eq!(d(vec![0.0, 0.0], vec![3.0, 4.0]), 5.0);
        assert_eq!(d(vec![1.0], vec![4.0]), 3.0);
    }

    #[test]
    fn distance_rejects_mismatched_dimensions() {
        let err = pose_distance(&Pose::new(vec![0.0]), &Pose::new(vec![0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn consistent_stages_have_no_violations() {
        assert!(validate_stages(&ramp_action(4, 4)).is_empty());
    }

    #[test]
    fn empty_stage_one() {
        assert_eq!(validate_stages(&ramp_action(0, 4)), vec!["stage 1 empty"]);
    }

    #[test]
    fn empty_stage_three() {
        assert_eq!(validate_stages(&ramp_action(4, 8)), vec!["stage 3 empty"]);
    }

    #[test]
    fn empty_stage_two() {
        assert_eq!(validate_stages(&ramp_action(4, 3)), vec!["stage 2 empty"]);
    }

    #[test]
    fn stage_ranges_partition_frames() {
        let s = StageAnnotation {
            stage1_end: 3,
            damage_end: 5,
        };
        let all: Vec<usize> = s.stretch_out().chain(s.damage()).chain(s.retract(9)).collect();
        assert_eq!(all, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn feint_with_damage_is_rejected() {
        let mut f = ActionSpec::synthetic_feint("F1", 0.5, STANCE_NEUTRAL);
        f.damage = 0.3;
        let err = ActionSet::new(1, vec![f]).unwrap_err();
        assert!(err.to_string().contains("feint must have zero damage"), "{err}");
    }

    #[test]
    fn empty_set_is_rejected() {
        let err = ActionSet::<f64>::new(1, vec![]).unwrap_err();
        assert_eq!(err.to_string(), "action set empty");
        let err = ActionSet::<f64>::from_json_str(r#"{"joint_dimension":1,"actions":[]}"#).unwrap_err();
        assert_eq!(err.to_string(), "action set empty");
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let a = ActionSpec::attack("A1", 1.0, 1.0, 0.4);
        assert!(ActionSet::new(1, vec![a.clone(), a]).is_err());
    }

    #[test]
    fn stretch_out_longer_than_action_is_rejected() {
        let a = ActionSpec::attack("A1", 1.0, 1.0, 1.5);
        assert!(ActionSet::new(1, vec![a]).is_err());
    }

    #[test]
    fn frame_timing_must_match_total_time() {
        let mut a = ramp_action(4, 4);
        a.total_time = 4.0;
        let err = ActionSet::new(1, vec![a]).unwrap_err();
        assert!(err.to_string().contains("frame_dt"), "{err}");
    }

    #[test]
    fn stages_without_frames_are_rejected() {
        let mut a = ramp_action(4, 4);
        a.frames = None;
        assert!(ActionSet::new(1, vec![a]).is_err());
    }

    #[test]
    fn frames_must_match_joint_dimension() {
        let a = ramp_action(4, 4);
        assert!(ActionSet::new(2, vec![a]).is_err());
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let err = ActionSet::<f64>::from_json_str("{ not json").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        let err = ActionSet::<f64>::from_json_str(r#"{"joint_dimension":1,"actions":[{"id":"A"}]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn json_round_trip_with_frames() {
        let set = ActionSet::new(1, vec![ramp_action(4, 4), ActionSpec::attack("A1", 1.0, 1.0, 0.4)]).unwrap();
        let back = ActionSet::<f64>::from_json_str(&set.to_json_string()).unwrap();
        assert_eq!(set, back);
    }
}
