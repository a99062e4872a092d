//! Seeded discrete-event simulation of two NPCs trading action combinations.
//!
//! Each NPC plays one action at a time from a queued combination. An attack
//! deals its damage `stretch_out_time` after it starts. A hit on an NPC that
//! is guarding is absorbed; otherwise the hitter scores `+d`, the target
//! `-d`, and the target loses its current action and queue and is knocked
//! down for `knockdown_recovery`. Hits that fall on the same instant all
//! land. An NPC with nothing queued picks its next combination, either by
//! sampling its maximin policy or from a fixed script.
//!
//! Events at one instant are resolved in this order: guards that end, hits,
//! other actions that end, knockdowns that end.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::{ActionKind, ActionSet, ActionSpec, STANCE_NEUTRAL};
use crate::combo::{
    classify_feint_timing, compute_timing_marks, enumerate_combinations, ActionCombination, EffectiveUnit,
    EnumerationConfig, FeintRegime, Step, TimingMarks,
};
use crate::error::{Error, Result};
use crate::reward::{combination_matrix_with, Alignment, RewardMatrix};
use crate::strategy::{solve_maximin, GameSolution, Policy};

/// Instants closer than this are treated as simultaneous.
const TIME_EPS: f64 = 1e-9;

/// Id given to the feint added for feint-capable NPCs.
pub const SYNTHETIC_FEINT_ID: &str = "F1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    BasicVsBasic,
    FeintVsBasic,
    FeintVsFeint,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::BasicVsBasic,
        ScenarioKind::FeintVsBasic,
        ScenarioKind::FeintVsFeint,
    ];

    /// Whether NPC A and NPC B may use feints.
    pub fn feints(&self) -> (bool, bool) {
        match self {
            ScenarioKind::BasicVsBasic => (false, false),
            ScenarioKind::FeintVsBasic => (true, false),
            ScenarioKind::FeintVsFeint => (true, true),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::BasicVsBasic => "basic_vs_basic",
            ScenarioKind::FeintVsBasic => "feint_vs_basic",
            ScenarioKind::FeintVsFeint => "feint_vs_feint",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scenario {s:?}")))
    }
}

fn default_episode_length() -> f64 {
    25.0
}
fn default_lookahead() -> f64 {
    5.5
}
fn default_feint_duration() -> f64 {
    0.5
}
fn default_max_feints() -> usize {
    1
}
fn default_recovery() -> f64 {
    1.0
}
fn default_alignment() -> Alignment {
    Alignment::ActionPairs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    /// Action-set file; relative paths are resolved by the caller against
    /// the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_set: Option<PathBuf>,
    #[serde(default = "default_episode_length")]
    pub episode_length: f64,
    #[serde(default = "default_lookahead")]
    pub lookahead: f64,
    /// Duration of the feint added for NPCs whose set has none.
    #[serde(default = "default_feint_duration")]
    pub feint_duration: f64,
    #[serde(default = "default_max_feints")]
    pub max_feints: usize,
    #[serde(default = "default_recovery")]
    pub knockdown_recovery: f64,
    /// Unit grouping for the combination matrix the policies are solved on.
    #[serde(default = "default_alignment")]
    pub alignment: Alignment,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        ScenarioConfig {
            scenario,
            action_set: None,
            episode_length: default_episode_length(),
            lookahead: default_lookahead(),
            feint_duration: default_feint_duration(),
            max_feints: default_max_feints(),
            knockdown_recovery: default_recovery(),
            alignment: default_alignment(),
            seed: 0,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::validation(None, m));
        if !(self.episode_length > 0.0) || !self.episode_length.is_finite() {
            return bad("episode_length must be positive");
        }
        if !(self.lookahead > 0.0) || !self.lookahead.is_finite() {
            return bad("lookahead must be positive");
        }
        if !(self.feint_duration >= 0.0) || !self.feint_duration.is_finite() {
            return bad("feint_duration must be non-negative");
        }
        if !(self.knockdown_recovery >= 0.0) || !self.knockdown_recovery.is_finite() {
            return bad("knockdown_recovery must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Actor {
    A,
    B,
}

impl Actor {
    fn other(self) -> Actor {
        match self {
            Actor::A => Actor::B,
            Actor::B => Actor::A,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// `actor` queued `combo`.
    ComboChosen,
    /// `actor` hit with `action` for `damage`.
    DamageLanded,
    /// `actor` absorbed the opponent's `action` while guarding.
    Blocked,
    /// `actor` lost `action` and the rest of its queue to a hit.
    Interrupted,
    /// `actor` recovered from a knockdown.
    KnockdownEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub actor: Actor,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub episode: usize,
    pub events: Vec<Event>,
    pub score_a: f64,
    pub score_b: f64,
}

impl EpisodeLog {
    /// One JSON object per event, newline-terminated.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            s.push_str(&serde_json::to_string(e).expect("event serializes"));
            s.push('\n');
        }
        s
    }

    /// The first combination `actor` chose.
    pub fn opening(&self, actor: Actor) -> Option<&str> {
        self.events
            .iter()
            .find(|e| e.actor == actor && e.kind == EventKind::ComboChosen)
            .and_then(|e| e.combo.as_deref())
    }
}

/// How an NPC picks its next combination.
#[derive(Debug, Clone)]
pub enum Planner {
    /// Samples a combination from a fixed distribution every time.
    Policy {
        combos: Vec<ActionCombination<f64>>,
        weights: WeightedIndex<f64>,
    },
    /// Plays one combination once, then idles.
    Scripted(ActionCombination<f64>),
}

impl Planner {
    pub fn from_policy(combos: Vec<ActionCombination<f64>>, policy: &Policy<f64>) -> Result<Self> {
        if combos.len() != policy.len() {
            return Err(Error::DimensionMismatch {
                expected: combos.len(),
                found: policy.len(),
            });
        }
        let weights = WeightedIndex::new(policy.probabilities().iter().copied())
            .map_err(|e| Error::invalid(format!("policy cannot be sampled: {e}")))?;
        Ok(Planner::Policy { combos, weights })
    }

    fn next(&self, rng: &mut ChaCha8Rng, used: &mut bool) -> Option<&ActionCombination<f64>> {
        match self {
            Planner::Policy { combos, weights } => Some(&combos[weights.sample(rng)]),
            Planner::Scripted(c) if !*used => {
                *used = true;
                Some(c)
            }
            Planner::Scripted(_) => None,
        }
    }
}

struct Active {
    step: Step<f64>,
    start: f64,
    hit_pending: bool,
}

impl Active {
    fn hit_time(&self) -> f64 {
        self.start + self.step.stretch_out_time
    }

    fn end_time(&self) -> f64 {
        self.start + self.step.total_time
    }
}

#[derive(Default)]
struct Fighter {
    queue: VecDeque<Step<f64>>,
    current: Option<Active>,
    knocked_until: Option<f64>,
    script_used: bool,
    score: f64,
}

impl Fighter {
    fn guarding(&self) -> bool {
        self.current
            .as_ref()
            .is_some_and(|a| a.step.kind == ActionKind::Defense)
    }
}

/// Runs one episode. The random stream is fixed by `(cfg.seed, episode)`.
pub fn run_episode(cfg: &ScenarioConfig, a: &Planner, b: &Planner, episode: usize) -> EpisodeLog {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(episode as u64);
    let planners = [a, b];
    let mut fighters = [Fighter::default(), Fighter::default()];
    let mut events = Vec::new();
    let mut t = 0.0_f64;
    let near = |x: f64, t: f64| (x - t).abs() <= TIME_EPS;

    loop {
        for actor in [Actor::A, Actor::B] {
            let f = &mut fighters[actor.index()];
            if f.current.is_some() || f.knocked_until.is_some() {
                continue;
            }
            if f.queue.is_empty() {
                if let Some(c) = planners[actor.index()].next(&mut rng, &mut f.script_used) {
                    events.push(Event {
                        time: t,
                        actor,
                        kind: EventKind::ComboChosen,
                        combo: Some(c.label()),
                        action: None,
                        damage: None,
                    });
                    f.queue.extend(c.steps.iter().cloned());
                }
            }
            if let Some(step) = f.queue.pop_front() {
                f.current = Some(Active {
                    hit_pending: step.kind == ActionKind::Attack,
                    step,
                    start: t,
                });
            }
        }

        let next = fighters
            .iter()
            .flat_map(|f| {
                let act = f.current.as_ref();
                [
                    f.knocked_until,
                    act.filter(|a| a.hit_pending).map(Active::hit_time),
                    act.map(Active::end_time),
                ]
            })
            .flatten()
            .reduce(f64::min);
        let Some(tn) = next else { break };
        if tn > cfg.episode_length + TIME_EPS {
            break;
        }
        t = tn;

        for f in &mut fighters {
            if f.guarding() && near(f.current.as_ref().unwrap().end_time(), t) {
                f.current = None;
            }
        }

        let mut landed = Vec::new();
        for actor in [Actor::A, Actor::B] {
            let Some(act) = fighters[actor.index()].current.as_mut() else {
                continue;
            };
            if !act.hit_pending || !near(act.hit_time(), t) {
                continue;
            }
            act.hit_pending = false;
            let (id, damage) = (act.step.id.clone(), act.step.damage);
            if fighters[actor.other().index()].guarding() {
                events.push(Event {
                    time: t,
                    actor: actor.other(),
                    kind: EventKind::Blocked,
                    combo: None,
                    action: Some(id),
                    damage: None,
                });
            } else {
                landed.push((actor, id, damage));
            }
        }
        for (actor, id, damage) in landed {
            fighters[actor.index()].score += damage;
            events.push(Event {
                time: t,
                actor,
                kind: EventKind::DamageLanded,
                combo: None,
                action: Some(id),
                damage: Some(damage),
            });
            let target = &mut fighters[actor.other().index()];
            target.score -= damage;
            let lost = target
                .current
                .take()
                .map(|a| a.step.id)
                .or_else(|| target.queue.front().map(|s| s.id.clone()));
            target.queue.clear();
            target.knocked_until = Some(t + cfg.knockdown_recovery);
            if let Some(action) = lost {
                events.push(Event {
                    time: t,
                    actor: actor.other(),
                    kind: EventKind::Interrupted,
                    combo: None,
                    action: Some(action),
                    damage: None,
                });
            }
        }

        for f in &mut fighters {
            if f.current.as_ref().is_some_and(|a| near(a.end_time(), t)) {
                f.current = None;
            }
        }

        for actor in [Actor::A, Actor::B] {
            let f = &mut fighters[actor.index()];
            if f.knocked_until.is_some_and(|k| k <= t + TIME_EPS) {
                f.knocked_until = None;
                events.push(Event {
                    time: t,
                    actor,
                    kind: EventKind::KnockdownEnd,
                    combo: None,
                    action: None,
                    damage: None,
                });
            }
        }
    }

    EpisodeLog {
        episode,
        events,
        score_a: fighters[0].score,
        score_b: fighters[1].score,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeScore {
    pub episode: usize,
    pub score_a: f64,
    pub score_b: f64,
    pub opening_a: String,
    pub opening_b: String,
}

impl EpisodeScore {
    pub fn delta(&self) -> f64 {
        self.score_a - self.score_b
    }
}

/// Per-episode scores plus aggregates. Choice frequencies count each
/// episode's opening combination, so they sum to the episode count.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub episodes: Vec<EpisodeScore>,
    pub mean_a: f64,
    pub mean_b: f64,
    pub choices_a: BTreeMap<String, usize>,
    pub choices_b: BTreeMap<String, usize>,
}

impl SummaryStats {
    /// Aggregates logs in episode-index order, whatever order they arrive in.
    pub fn from_logs(logs: &[EpisodeLog]) -> Result<Self> {
        if logs.is_empty() {
            return Err(Error::invalid("episode count must be at least 1"));
        }
        let mut episodes: Vec<EpisodeScore> = logs
            .iter()
            .map(|l| EpisodeScore {
                episode: l.episode,
                score_a: l.score_a,
                score_b: l.score_b,
                opening_a: l.opening(Actor::A).unwrap_or("none").to_owned(),
                opening_b: l.opening(Actor::B).unwrap_or("none").to_owned(),
            })
            .collect();
        episodes.sort_by_key(|e| e.episode);
        let n = episodes.len() as f64;
        let mut choices_a = BTreeMap::new();
        let mut choices_b = BTreeMap::new();
        for e in &episodes {
            *choices_a.entry(e.opening_a.clone()).or_insert(0) += 1;
            *choices_b.entry(e.opening_b.clone()).or_insert(0) += 1;
        }
        Ok(SummaryStats {
            mean_a: episodes.iter().map(|e| e.score_a).sum::<f64>() / n,
            mean_b: episodes.iter().map(|e| e.score_b).sum::<f64>() / n,
            episodes,
            choices_a,
            choices_b,
        })
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.episodes.iter().map(EpisodeScore::delta).collect()
    }

    pub fn mean_delta(&self) -> f64 {
        self.deltas().iter().sum::<f64>() / self.episodes.len() as f64
    }

    /// Standard error of the mean delta (sample standard deviation / √n).
    pub fn delta_std_error(&self) -> f64 {
        let d = self.deltas();
        let n = d.len() as f64;
        if d.len() < 2 {
            return 0.0;
        }
        let mean = d.iter().sum::<f64>() / n;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }

    /// One line per episode, then a `mean` line.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("episode,score_a,score_b,delta,opening_a,opening_b\n");
        for e in &self.episodes {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                e.episode,
                e.score_a,
                e.score_b,
                e.delta(),
                e.opening_a,
                e.opening_b
            )
            .expect("string write");
        }
        writeln!(s, "mean,{},{},{},,", self.mean_a, self.mean_b, self.mean_delta()).expect("string write");
        s
    }

    /// `npc,combo,count` lines.
    pub fn choices_csv_string(&self) -> String {
        let mut s = String::from("npc,combo,count\n");
        for (npc, map) in [("A", &self.choices_a), ("B", &self.choices_b)] {
            for (combo, n) in map {
                writeln!(s, "{npc},{combo},{n}").expect("string write");
            }
        }
        s
    }
}

/// One NPC's choice space in a scenario.
#[derive(Debug, Clone)]
pub struct Npc {
    pub set: ActionSet<f64>,
    pub combos: Vec<ActionCombination<f64>>,
}

/// Both NPCs' combination spaces, the reward matrix between them and the
/// maximin policies each samples from.
#[derive(Debug, Clone)]
pub struct Scenario {
    cfg: ScenarioConfig,
    npc_a: Npc,
    npc_b: Npc,
    matrix: RewardMatrix<f64>,
    solution: GameSolution<f64>,
    planner_a: Planner,
    planner_b: Planner,
}

fn prepare_npc(cfg: &ScenarioConfig, base: &ActionSet<f64>, feints: bool) -> Result<Npc> {
    let set = if feints && base.feints().next().is_none() {
        if !(cfg.feint_duration > 0.0) {
            return Err(Error::validation(
                None,
                "feint_duration must be positive when feints are used",
            ));
        }
        let stance = base
            .attacks()
            .next()
            .map_or(STANCE_NEUTRAL, |a| a.stance_start.as_str())
            .to_owned();
        base.with_action(ActionSpec::synthetic_feint(
            SYNTHETIC_FEINT_ID,
            cfg.feint_duration,
            &stance,
        ))?
    } else {
        base.clone()
    };
    let mut enum_cfg = EnumerationConfig::new(cfg.lookahead);
    if feints {
        enum_cfg = enum_cfg.with_feints(cfg.max_feints);
    }
    let combos = enumerate_combinations(&set, &enum_cfg);
    if combos.is_empty() {
        return Err(Error::Infeasible("no admissible combinations".to_owned()));
    }
    Ok(Npc { set, combos })
}

impl Scenario {
    /// Both NPCs draw on `base`; feint-capable NPCs get a synthetic feint of
    /// `cfg.feint_duration` unless `base` already has feints.
    pub fn new(cfg: &ScenarioConfig, base: &ActionSet<f64>) -> Result<Self> {
        Self::with_sets(cfg, base, base)
    }

    pub fn with_sets(cfg: &ScenarioConfig, set_a: &ActionSet<f64>, set_b: &ActionSet<f64>) -> Result<Self> {
        cfg.validate()?;
        let (fa, fb) = cfg.scenario.feints();
        let npc_a = prepare_npc(cfg, set_a, fa)?;
        let npc_b = prepare_npc(cfg, set_b, fb)?;
        let matrix = combination_matrix_with(&npc_a.combos, &npc_b.combos, cfg.alignment)?;
        let solution = solve_maximin(&matrix)?;
        let planner_a = Planner::from_policy(npc_a.combos.clone(), &solution.agent_policy)?;
        let planner_b = Planner::from_policy(npc_b.combos.clone(), &solution.opponent_policy)?;
        Ok(Scenario {
            cfg: cfg.clone(),
            npc_a,
            npc_b,
            matrix,
            solution,
            planner_a,
            planner_b,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn npc_a(&self) -> &Npc {
        &self.npc_a
    }

    pub fn npc_b(&self) -> &Npc {
        &self.npc_b
    }

    /// Rows are NPC A's combinations.
    pub fn matrix(&self) -> &RewardMatrix<f64> {
        &self.matrix
    }

    pub fn solution(&self) -> &GameSolution<f64> {
        &self.solution
    }

    pub fn run_episode(&self, episode: usize) -> EpisodeLog {
        run_episode(&self.cfg, &self.planner_a, &self.planner_b, episode)
    }

    /// Episodes `0..n`.
    pub fn episodes(&self, n: usize) -> Vec<EpisodeLog> {
        (0..n).map(|i| self.run_episode(i)).collect()
    }

    pub fn run_batch(&self, n: usize) -> Result<SummaryStats> {
        SummaryStats::from_logs(&self.episodes(n))
    }
}

/// The dual-action matchup: the agent feints then attacks; the opponent
/// plays a first action (typically a guard) and then a second attack.
#[derive(Debug, Clone)]
pub struct DualActionProbe {
    pub agent_attack: ActionSpec<f64>,
    pub opponent_first: ActionSpec<f64>,
    pub opponent_second: ActionSpec<f64>,
}

impl DualActionProbe {
    /// A4 against a 2-unit guard followed by A3.
    pub fn canonical(set: &ActionSet<f64>) -> Result<Self> {
        let get = |id: &str| {
            set.get(id)
                .cloned()
                .ok_or_else(|| Error::invalid(format!("action set lacks {id}")))
        };
        Ok(DualActionProbe {
            agent_attack: get("A4")?,
            opponent_first: ActionSpec::guard("G", 2.0),
            opponent_second: get("A3")?,
        })
    }

    pub fn timing_marks(&self, feint_duration: f64) -> Result<TimingMarks<f64>> {
        let unit = EffectiveUnit::with_feint(SYNTHETIC_FEINT_ID, feint_duration, &Step::of(&self.agent_attack));
        let second = EffectiveUnit::single(&Step::of(&self.opponent_second));
        compute_timing_marks(&unit, &self.opponent_first, Some(&second))
    }

    /// Scripted planners for one feint duration. A zero-length feint is
    /// left out of the agent's script.
    pub fn planners(&self, feint_duration: f64) -> Result<(Planner, Planner)> {
        let feint = ActionSpec::synthetic_feint(SYNTHETIC_FEINT_ID, feint_duration, &self.agent_attack.stance_start);
        let agent = if feint_duration > 0.0 {
            ActionCombination::from_actions(&[&feint, &self.agent_attack])?
        } else {
            ActionCombination::from_actions(&[&self.agent_attack])?
        };
        let opponent = ActionCombination::from_actions(&[&self.opponent_first, &self.opponent_second])?;
        Ok((Planner::Scripted(agent), Planner::Scripted(opponent)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub duration: f64,
    pub marks: TimingMarks<f64>,
    pub regime: FeintRegime,
    pub mean_delta: f64,
    pub episodes: usize,
}

/// Classifies each feint duration and measures the mean score delta
/// (A − B) of the scripted matchup over `episodes` seeded episodes.
pub fn sweep_feint_length(
    cfg: &ScenarioConfig,
    probe: &DualActionProbe,
    durations: &[f64],
    episodes: usize,
) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if durations.is_empty() {
        return Err(Error::invalid("durations must be non-empty"));
    }
    if episodes == 0 {
        return Err(Error::invalid("episode count must be at least 1"));
    }
    let mut rows = Vec::with_capacity(durations.len());
    for &d in durations {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::invalid("feint durations must be non-negative"));
        }
        let marks = probe.timing_marks(d)?;
        let (a, b) = probe.planners(d)?;
        let logs: Vec<EpisodeLog> = (0..episodes).map(|i| run_episode(cfg, &a, &b, i)).collect();
        let stats = SummaryStats::from_logs(&logs)?;
        rows.push(SweepRow {
            duration: d,
            marks,
            regime: classify_feint_timing(&marks),
            mean_delta: stats.mean_delta(),
            episodes,
        });
    }
    Ok(rows)
}

/// `duration,t_b1,t_a2,t_b2,regime,mean_delta` lines.
pub fn sweep_csv_string(rows: &[SweepRow]) -> String {
    let mut s = String::from("duration,t_b1,t_a2,t_b2,regime,mean_delta\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.duration, r.marks.t_b1, r.marks.t_a2, r.marks.t_b2, r.regime, r.mean_delta
        )
        .expect("string write");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxing() -> ActionSet<f64> {
        ActionSet::new(
            1,
            vec![
                ActionSpec::attack("A1", 1.0, 1.0, 0.4),
                ActionSpec::attack("A2", 1.5, 2.0, 0.8),
                ActionSpec::attack("A3", 2.5, 2.5, 1.0),
                ActionSpec::attack("A4", 4.0, 3.5, 1.4),
                ActionSpec::attack("A5", 5.0, 5.0, 1.3),
            ],
        )
        .unwrap()
    }

    fn scripted(set: &ActionSet<f64>, ids: &[&str]) -> Planner {
        let owned: Vec<ActionSpec<f64>> = ids
            .iter()
            .map(|id| match *id {
                "G" => ActionSpec::guard("G", 2.0),
                "F1" => ActionSpec::synthetic_feint("F1", 0.5, STANCE_NEUTRAL),
                id => set.get(id).unwrap().clone(),
            })
            .collect();
        let refs: Vec<&ActionSpec<f64>> = owned.iter().collect();
        Planner::Scripted(ActionCombination::from_actions(&refs).unwrap())
    }

    fn kinds(log: &EpisodeLog) -> Vec<(f64, Actor, EventKind)> {
        log.events.iter().map(|e| (e.time, e.actor, e.kind)).collect()
    }

    #[test]
    fn faster_hit_interrupts_slower() {
        let set = boxing();
        let cfg = ScenarioConfig::new(ScenarioKind::BasicVsBasic);
        let log = run_episode(&cfg, &scripted(&set, &["A1"]), &scripted(&set, &["A5"]), 0);
        assert_eq!((log.score_a, log.score_b), (1.0, -1.0));
        assert_eq!(
            kinds(&log),
            vec![
                (0.0, Actor::A, EventKind::ComboChosen),
                (0.0, Actor::B, EventKind::ComboChosen),
                (0.4, Actor::A, EventKind::DamageLanded),
                (0.4, Actor::B, EventKind::Interrupted),
                (1.4, Actor::B, EventKind::KnockdownEnd),
            ]
        );
    }

    #[test]
    fn simultaneous_hits_both_land() {
        let set = boxing();
        let cfg = ScenarioConfig::new(ScenarioKind::BasicVsBasic);
        let log = run_episode(&cfg, &scripted(&set, &["A2"]), &scripted(&set, &["A2"]), 0);
        assert_eq!((log.score_a, log.score_b), (0.0, 0.0));
        let landed = log.events.iter().filter(|e| e.kind == EventKind::DamageLanded).count();
        assert_eq!(landed, 2);
    }

    #[test]
    fn guard_absorbs_hit() {
        let set = boxing();
        let cfg = ScenarioConfig::new(ScenarioKind::BasicVsBasic);
        let log = run_episode(&cfg, &scripted(&set, &["A1"]), &scripted(&set, &["G"]), 0);
        assert_eq!(log.score_a, 0.0);
        assert!(log
            .events
            .iter()
            .any(|e| e.kind == EventKind::Blocked && e.actor == Actor::B));
    }

    #[test]
    fn trade_cancels_both_queues() {
        let set = boxing();
        let cfg = ScenarioConfig::new(ScenarioKind::BasicVsBasic);
        // The trade at 0.4 knocks both down and clears both second jabs.
        let log = run_episode(&cfg, &scripted(&set, &["A1", "A1"]), &scripted(&set, &["A1", "A1"]), 0);
        assert_eq!(log.score_a, 0.0);
        let hits: Vec<f64> = log
            .events
            .iter()
            .filter(|e| e.kind == EventKind::DamageLanded)
            .map(|e| e.time)
            .collect();
        assert_eq!(hits, vec![0.4, 0.4]);
    }

    #[test]
    fn canonical_exchange_per_regime() {
        let set = boxing();
        let probe = DualActionProbe::canonical(&set).unwrap();
        let cfg = ScenarioConfig::new(ScenarioKind::FeintVsBasic);
        let rows = sweep_feint_length(&cfg, &probe, &[0.3, 0.6, 1.0, 1.6, 2.0], 3).unwrap();
        let got: Vec<(FeintRegime, f64)> = rows.iter().map(|r| (r.regime, r.mean_delta)).collect();
        assert_eq!(
            got,
            vec![
                (FeintRegime::TooShort, -5.0),
                (FeintRegime::Proper, 8.0),
                (FeintRegime::Proper, 8.0),
                (FeintRegime::TooLong, 3.0),
                (FeintRegime::TooLong, -5.0),
            ]
        );
    }

    #[test]
    fn episodes_are_zero_sum_bounded_and_reproducible() {
        let set = boxing();
        for kind in ScenarioKind::ALL {
            let cfg = ScenarioConfig {
                seed: 7,
                ..ScenarioConfig::new(kind)
            };
            let s = Scenario::new(&cfg, &set).unwrap();
            for i in 0..20 {
                let log = s.run_episode(i);
                assert_eq!(log.score_a + log.score_b, 0.0);
                assert!(log.events.windows(2).all(|w| w[0].time <= w[1].time));
                assert!(log.events.iter().all(|e| e.time <= 25.0));
                assert_eq!(log.to_jsonl(), s.run_episode(i).to_jsonl());
            }
        }
    }

    #[test]
    fn single_episode_batch_matches_log() {
        let set = boxing();
        let s = Scenario::new(&ScenarioConfig::new(ScenarioKind::FeintVsFeint), &set).unwrap();
        let stats = s.run_batch(1).unwrap();
        let log = s.run_episode(0);
        assert_eq!((stats.mean_a, stats.mean_b), (log.score_a, log.score_b));
        assert!(s.run_batch(0).is_err());
    }

    #[test]
    fn choice_frequencies_cover_every_episode() {
        let set = boxing();
        let s = Scenario::new(&ScenarioConfig::new(ScenarioKind::FeintVsFeint), &set).unwrap();
        let stats = s.run_batch(40).unwrap();
        assert_eq!(stats.choices_a.values().sum::<usize>(), 40);
        assert_eq!(stats.choices_b.values().sum::<usize>(), 40);
    }

    #[test]
    fn batch_aggregation_ignores_log_order() {
        let set = boxing();
        let s = Scenario::new(&ScenarioConfig::new(ScenarioKind::FeintVsBasic), &set).unwrap();
        let mut logs = s.episodes(10);
        let forward = SummaryStats::from_logs(&logs).unwrap();
        logs.reverse();
        assert_eq!(forward, SummaryStats::from_logs(&logs).unwrap());
    }

    #[test]
    fn config_json_defaults_and_validation() {
        let cfg = ScenarioConfig::from_json_str(r#"{"scenario":"feint_vs_basic"}"#).unwrap();
        assert_eq!(cfg, ScenarioConfig::new(ScenarioKind::FeintVsBasic));
        assert!(ScenarioConfig::from_json_str(r#"{"scenario":"basic_vs_basic","episode_length":0}"#).is_err());
        assert!(ScenarioConfig::from_json_str(r#"{"scenario":"basic_vs_basic","bogus":1}"#).is_err());
    }

    #[test]
    fn infeasible_lookahead() {
        let cfg = ScenarioConfig {
            lookahead: 0.5,
            ..ScenarioConfig::new(ScenarioKind::BasicVsBasic)
        };
        assert!(matches!(Scenario::new(&cfg, &boxing()), Err(Error::Infeasible(_))));
    }
}
