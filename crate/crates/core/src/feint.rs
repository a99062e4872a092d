//! Palindrome-directed feint generation.
//!
//! A feint reuses frames of an attack's stretch-out and retract stages and
//! never any frame of its damage stage. Three extraction methods exist:
//!
//! * identical pair: a stretch-out frame `i` and a retract frame `j` with
//!   (near-)equal poses; the feint is `frames[..=i] ++ frames[j..]`.
//! * forward cut at stretch-out frame `c`: `frames[..=c]` followed by its own
//!   reversal, the cut frame appearing once.
//! * backward cut at retract frame `c`: the reversal of `frames[c..]` followed
//!   by `frames[c..]`, again sharing the cut frame.
//!
//! Every result starts and ends at the source's rest pose, so it can be
//! chained with other actions that start from that pose.

use std::path::Path;

use crate::action::{actions_to_json, pose_distance, ActionKind, ActionSpec, FrameSequence, Pose, StageAnnotation};
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Default closeness threshold for treating two poses as identical.
pub const DEFAULT_PALINDROME_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionMethod {
    IdenticalPair { first: usize, second: usize },
    ForwardCut { cut: usize },
    BackwardCut { cut: usize },
}

impl ExtractionMethod {
    fn tag(&self) -> String {
        match *self {
            ExtractionMethod::IdenticalPair { first, second } => format!("pair{first}-{second}"),
            ExtractionMethod::ForwardCut { cut } => format!("fwd{cut}"),
            ExtractionMethod::BackwardCut { cut } => format!("bwd{cut}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeintAction<T> {
    pub source_id: String,
    pub method: ExtractionMethod,
    /// Loadable action with `kind = feint` and zero damage.
    pub spec: ActionSpec<T>,
}

impl<T: Scalar> FeintAction<T> {
    pub fn frames(&self) -> &FrameSequence<T> {
        self.spec.frames.as_ref().expect("generated feints carry frames")
    }

    pub fn total_time(&self) -> T {
        self.spec.total_time
    }
}

fn motion<T: Scalar>(action: &ActionSpec<T>) -> Result<(&FrameSequence<T>, StageAnnotation)> {
    match (&action.frames, action.stages) {
        (Some(f), Some(s)) => Ok((f, s)),
        (None, _) => Err(Error::invalid(format!("action {} has no frames", action.id))),
        (_, None) => Err(Error::invalid(format!("action {} has no stage annotation", action.id))),
    }
}

/// All `(i, j)` with `i` in the stretch-out stage, `j` in the retract stage
/// and `pose_distance(frame_i, frame_j) <= eps`, ordered by `i` then `j`.
pub fn find_identical_pairs<T: Real>(action: &ActionSpec<T>, eps: T) -> Result<Vec<(usize, usize)>> {
    if !(eps >= T::zero()) {
        return Err(Error::invalid("eps must be ≥ 0"));
    }
    let (seq, stages) = motion(action)?;
    let frames = seq.frames();
    let mut pairs = Vec::new();
    for i in stages.stretch_out() {
        for j in stages.retract(frames.len()) {
            if pose_distance(&frames[i], &frames[j])? <= eps {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}

fn build<T: Scalar>(
    source: &ActionSpec<T>,
    seq: &FrameSequence<T>,
    method: ExtractionMethod,
    frames: Vec<Pose<T>>,
    turn_index: usize,
) -> Result<FeintAction<T>> {
    let dt = seq.frame_dt();
    let frames = FrameSequence::new(frames, dt)?;
    let total_time = frames.duration();
    if total_time >= source.total_time {
        return Err(Error::invalid(format!(
            "feint {} of {} would not be shorter than its source",
            method.tag(),
            source.id
        )));
    }
    let spec = ActionSpec {
        id: format!("{}~{}", source.id, method.tag()),
        kind: ActionKind::Feint,
        damage: T::zero(),
        total_time,
        stretch_out_time: T::from_usize_lossy(turn_index) * dt,
        stance_start: source.stance_start.clone(),
        stance_end: source.stance_start.clone(),
        frames: Some(frames),
        stages: None,
    };
    Ok(FeintAction {
        source_id: source.id.clone(),
        method,
        spec,
    })
}

/// Joins the prefix ending at stretch-out frame `i` with the suffix starting
/// at retract frame `j`. Both junction frames are kept.
pub fn gen_feint_identical<T: Scalar>(action: &ActionSpec<T>, pair: (usize, usize)) -> Result<FeintAction<T>> {
    let (seq, stages) = motion(action)?;
    let (i, j) = pair;
    let n = seq.len();
    if !stages.stretch_out().contains(&i) || !stages.retract(n).contains(&j) {
        return Err(Error::invalid(format!(
            "pair ({i}, {j}) must join a stretch-out frame to a retract frame"
        )));
    }
    let frames: Vec<_> = seq.frames()[..=i].iter().chain(&seq.frames()[j..]).cloned().collect();
    build(
        action,
        seq,
        ExtractionMethod::IdenticalPair { first: i, second: j },
        frames,
        i,
    )
}

/// `frames[..=cut]` followed by `frames[..cut]` reversed.
pub fn gen_feint_forward_cut<T: Scalar>(action: &ActionSpec<T>, cut: usize) -> Result<FeintAction<T>> {
    let (seq, stages) = motion(action)?;
    if cut == 0 || cut >= stages.stage1_end {
        return Err(Error::invalid("cut must precede damage stage"));
    }
    let head = &seq.frames()[..=cut];
    let frames: Vec<_> = head.iter().chain(head[..cut].iter().rev()).cloned().collect();
    build(action, seq, ExtractionMethod::ForwardCut { cut }, frames, cut)
}

/// `frames[cut+1..]` reversed followed by `frames[cut..]`.
pub fn gen_feint_backward_cut<T: Scalar>(action: &ActionSpec<T>, cut: usize) -> Result<FeintAction<T>> {
    let (seq, stages) = motion(action)?;
    let n = seq.len();
    if cut <= stages.damage_end {
        return Err(Error::invalid("cut must follow damage stage"));
    }
    if cut + 1 >= n {
        return Err(Error::invalid("cut must leave at least one retract frame after it"));
    }
    let tail = &seq.frames()[cut..];
    let frames: Vec<_> = tail[1..].iter().rev().chain(tail).cloned().collect();
    build(
        action,
        seq,
        ExtractionMethod::BackwardCut { cut },
        frames,
        tail.len() - 1,
    )
}

/// Every feint the three methods can produce from `action` whose duration
/// lies in `[duration_min, duration_max]`, without duplicate frame content.
///
/// Candidates are produced identical pairs first, then forward cuts, then
/// backward cuts; the first of several identical candidates is kept.
/// Candidates that would last as long as the source are skipped.
pub fn enumerate_feints<T: Real>(
    action: &ActionSpec<T>,
    duration_min: T,
    duration_max: T,
    eps: T,
) -> Result<Vec<FeintAction<T>>> {
    if !(duration_min >= T::zero()) || !(duration_min <= duration_max) {
        return Err(Error::invalid("duration bounds must satisfy 0 ≤ min ≤ max"));
    }
    let (seq, stages) = motion(action)?;
    let n = seq.len();

    let mut candidates = Vec::new();
    for pair in find_identical_pairs(action, eps)? {
        candidates.push(gen_feint_identical(action, pair));
    }
    for cut in 1..stages.stage1_end {
        candidates.push(gen_feint_forward_cut(action, cut));
    }
    for cut in stages.damage_end + 1..n.saturating_sub(1) {
        candidates.push(gen_feint_backward_cut(action, cut));
    }

    let tol = T::tolerance();
    let mut out: Vec<FeintAction<T>> = Vec::new();
    for feint in candidates.into_iter().filter_map(Result::ok) {
        let t = feint.total_time();
        if t < duration_min - tol || t > duration_max + tol {
            continue;
        }
        if out.iter().any(|f| f.frames().frames() == feint.frames().frames()) {
            continue;
        }
        out.push(feint);
    }
    Ok(out)
}

/// Writes feints in the action-set file format.
pub fn export_feints<T: Scalar>(
    path: impl AsRef<Path>,
    joint_dimension: usize,
    feints: &[FeintAction<T>],
) -> Result<()> {
    let path = path.as_ref();
    let specs: Vec<_> = feints.iter().map(|f| f.spec.clone()).collect();
    std::fs::write(path, actions_to_json(joint_dimension, &specs)).map_err(|e| Error::io(path, e))
}
