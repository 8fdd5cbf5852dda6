//! Tabular action-value learning: the Q-table, accumulating eligibility
//! traces, the TD(lambda) update adapted to action values, and
//! epsilon-greedy selection.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{Action, ActionList, StateKey, KEY_SPACE};
use crate::seed::child_seed;

/// Traces smaller than this are dropped after decay; with gamma*lambda
/// below one the truncation error is negligible and per-step work stays
/// bounded.
pub const TRACE_FLOOR: f64 = 1e-8;

/// How the TD target bootstraps on the next state: `Max` uses the best
/// next action value, `Sarsa` the value of the action actually chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bootstrap {
    #[default]
    Max,
    Sarsa,
}

impl fmt::Display for Bootstrap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bootstrap::Max => write!(f, "max"),
            Bootstrap::Sarsa => write!(f, "sarsa"),
        }
    }
}

/// Exploration schedule: epsilon starts at `start`, decays multiplicatively
/// per episode, and never falls below `floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub floor: f64,
    pub decay: f64,
}

impl EpsilonSchedule {
    /// Schedule that reaches `floor` exactly at episode `floor_episode`.
    pub fn reaching_floor_at(start: f64, floor: f64, floor_episode: u32) -> EpsilonSchedule {
        assert!(start > 0.0 && floor > 0.0 && floor <= start);
        assert!(floor_episode > 0);
        let decay = (floor / start).powf(1.0 / floor_episode as f64);
        EpsilonSchedule { start, floor, decay }
    }

    /// Default schedule for a training budget: start 0.9, floor 0.01,
    /// reaching the floor at 90% of the budget.
    pub fn default_for_budget(episodes: u32) -> EpsilonSchedule {
        let floor_episode = ((episodes as f64) * 0.9).round().max(1.0) as u32;
        EpsilonSchedule::reaching_floor_at(0.9, 0.01, floor_episode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlError {
    InvalidEpsilon,
    InvalidDecay,
    InvalidRate,
}

impl fmt::Display for RlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RlError::InvalidEpsilon => write!(f, "epsilon bounds must satisfy 0 <= floor <= start <= 1"),
            RlError::InvalidDecay => write!(f, "epsilon decay must lie in (0, 1]"),
            RlError::InvalidRate => write!(f, "alpha, gamma and lambda must lie in [0, 1]"),
        }
    }
}

impl std::error::Error for RlError {}

/// Per-agent learning parameters. Sampled identities stay inside the
/// standard ranges (alpha 0.2-0.3, gamma 0.95-0.99, lambda 0.9-1.0);
/// wider values are only reachable through explicit configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub epsilon0: f64,
    pub epsilon_min: f64,
    pub epsilon_decay: f64,
    #[serde(default)]
    pub bootstrap: Bootstrap,
}

impl Hyperparameters {
    /// Draws alpha, gamma and lambda uniformly from the identity ranges,
    /// in that order, and installs the given exploration schedule.
    pub fn sample_from<R: Rng + ?Sized>(rng: &mut R, schedule: EpsilonSchedule) -> Hyperparameters {
        let alpha = 0.2 + 0.1 * rng.gen::<f64>();
        let gamma = 0.95 + 0.04 * rng.gen::<f64>();
        let lambda = 0.9 + 0.1 * rng.gen::<f64>();
        Hyperparameters {
            alpha,
            gamma,
            lambda,
            epsilon0: schedule.start,
            epsilon_min: schedule.floor,
            epsilon_decay: schedule.decay,
            bootstrap: Bootstrap::Max,
        }
    }

    pub fn validate(&self) -> Result<(), RlError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(unit(self.alpha) && unit(self.gamma) && unit(self.lambda)) {
            return Err(RlError::InvalidRate);
        }
        if !(0.0 <= self.epsilon_min && self.epsilon_min <= self.epsilon0 && self.epsilon0 <= 1.0) {
            return Err(RlError::InvalidEpsilon);
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return Err(RlError::InvalidDecay);
        }
        Ok(())
    }

    /// Exploration probability at a given episode:
    /// `max(epsilon_min, epsilon0 * epsilon_decay^episode)`.
    pub fn epsilon_at(&self, episode: u32) -> f64 {
        let eps = self.epsilon0 * self.epsilon_decay.powi(episode as i32);
        eps.max(self.epsilon_min)
    }
}

/// Identifier of a population member; unique within a population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A population member's sampled parameters plus its private seed.
/// Two agents with equal seeds and parameters behave identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentIdentity {
    pub id: AgentId,
    pub params: Hyperparameters,
    pub seed: u64,
    pub episodes_trained: u32,
}

impl AgentIdentity {
    /// Samples an identity from its seed: the parameter draws use a stream
    /// derived from the seed, so the same seed always yields the same
    /// identity.
    pub fn sample(id: AgentId, seed: u64, schedule: EpsilonSchedule) -> AgentIdentity {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, "params"));
        let params = Hyperparameters::sample_from(&mut rng, schedule);
        AgentIdentity {
            id,
            params,
            seed,
            episodes_trained: 0,
        }
    }
}

/// Learned action values. Absent entries read as the initialization value
/// (zero). Iteration is sorted by state key, then action, which makes
/// serialization deterministic.
#[derive(Clone)]
pub struct QTable {
    values: Vec<f64>,
    written: Vec<u64>,
    entries: usize,
}

const ACTIONS_PER_STATE: usize = 9;
const TABLE_SLOTS: usize = KEY_SPACE * ACTIONS_PER_STATE;

#[inline]
fn slot(state: StateKey, action: Action) -> usize {
    debug_assert!((state.0 as usize) < KEY_SPACE);
    debug_assert!((action.0 as usize) < ACTIONS_PER_STATE);
    state.0 as usize * ACTIONS_PER_STATE + action.0 as usize
}

impl QTable {
    pub fn new() -> QTable {
        QTable {
            values: vec![0.0; TABLE_SLOTS],
            written: vec![0; TABLE_SLOTS.div_ceil(64)],
            entries: 0,
        }
    }

    #[inline]
    pub fn get(&self, state: StateKey, action: Action) -> f64 {
        self.values[slot(state, action)]
    }

    #[inline]
    pub fn set(&mut self, state: StateKey, action: Action, value: f64) {
        let idx = slot(state, action);
        self.values[idx] = value;
        self.mark(idx);
    }

    #[inline]
    pub fn add(&mut self, state: StateKey, action: Action, delta: f64) {
        let idx = slot(state, action);
        self.values[idx] += delta;
        self.mark(idx);
    }

    #[inline]
    fn mark(&mut self, idx: usize) {
        let word = &mut self.written[idx / 64];
        let bit = 1u64 << (idx % 64);
        if *word & bit == 0 {
            *word |= bit;
            self.entries += 1;
        }
    }

    /// Number of entries that have ever been written.
    pub fn len(&self) -> usize {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries == 0
    }

    /// Largest absolute value over written entries; 0 for an empty table.
    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |acc, (_, _, v)| acc.max(v.abs()))
    }

    /// Written entries in ascending (state key, action) order.
    pub fn iter(&self) -> impl Iterator<Item = (StateKey, Action, f64)> + '_ {
        self.written
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0)
            .flat_map(move |(wi, &word)| {
                (0..64u32).filter(move |b| word & (1u64 << b) != 0).map(move |b| {
                    let idx = wi * 64 + b as usize;
                    let state = StateKey((idx / ACTIONS_PER_STATE) as u16);
                    let action = Action((idx % ACTIONS_PER_STATE) as u8);
                    (state, action, self.values[idx])
                })
            })
    }

    /// Exact equality of written entry sets and their values.
    pub fn identical_to(&self, other: &QTable) -> bool {
        self.entries == other.entries && self.written == other.written && self.values == other.values
    }
}

impl Default for QTable {
    fn default() -> Self {
        QTable::new()
    }
}

impl fmt::Debug for QTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QTable({} entries)", self.entries)
    }
}

/// Accumulating eligibility traces over (state, action) pairs. Episodes
/// in this game are at most nine plies, so the active set stays tiny and
/// a flat vector beats a map.
#[derive(Debug, Clone, Default)]
pub struct EligibilityTraces {
    entries: Vec<(StateKey, Action, f64)>,
}

impl EligibilityTraces {
    pub fn new() -> EligibilityTraces {
        EligibilityTraces { entries: Vec::new() }
    }

    /// Clears every trace; called at episode start.
    pub fn begin_episode(&mut self) {
        self.entries.clear();
    }

    /// Adds one to the trace of the visited pair.
    fn accumulate(&mut self, state: StateKey, action: Action) {
        for entry in self.entries.iter_mut() {
            if entry.0 == state && entry.1 == action {
                entry.2 += 1.0;
                return;
            }
        }
        self.entries.push((state, action, 1.0));
    }

    /// Applies `scale * trace` to every traced pair, then decays each trace
    /// by `decay`, pruning entries that fall below the floor.
    fn apply_and_decay(&mut self, q: &mut QTable, scale: f64, decay: f64) {
        self.entries.retain_mut(|(state, action, trace)| {
            q.add(*state, *action, scale * *trace);
            *trace *= decay;
            *trace >= TRACE_FLOOR
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateKey, Action, f64)> + '_ {
        self.entries.iter().copied()
    }
}

/// What the agent observed after acting: either the episode ended, or it
/// is next to move in `state` with `legal` moves available. `chosen` is
/// the action selected at the next state and is consulted only by the
/// Sarsa bootstrap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NextState {
    Terminal,
    Ongoing {
        state: StateKey,
        legal: ActionList,
        chosen: Option<Action>,
    },
}

/// One learning step from the agent's own perspective: it acted in `state`
/// and next observed `next` (the opponent's reply is folded into the
/// environment).
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: StateKey,
    pub action: Action,
    pub reward: f64,
    pub next: NextState,
}

/// The TD(lambda) update on action values:
///
/// ```text
/// delta   = r + gamma * B(s') - Q(s, a)
/// e(s, a) += 1
/// for every traced pair p: Q(p) += alpha * delta * e(p); e(p) *= gamma * lambda
/// ```
///
/// where `B(s')` is zero at terminal states and otherwise the bootstrap
/// value of the next state (max over next legal actions, or the chosen
/// action's value under Sarsa). Only traced pairs are touched.
pub fn td_update(q: &mut QTable, traces: &mut EligibilityTraces, t: &Transition, p: &Hyperparameters) {
    let current = q.get(t.state, t.action);
    let bootstrap = match &t.next {
        NextState::Terminal => 0.0,
        NextState::Ongoing { state, legal, chosen } => match p.bootstrap {
            Bootstrap::Max => {
                debug_assert!(!legal.is_empty(), "ongoing next state must have legal moves");
                legal
                    .iter()
                    .map(|&a| q.get(*state, a))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Bootstrap::Sarsa => {
                let a = chosen.expect("sarsa bootstrap requires the chosen next action");
                q.get(*state, a)
            }
        },
    };
    let delta = t.reward + p.gamma * bootstrap - current;
    traces.accumulate(t.state, t.action);
    traces.apply_and_decay(q, p.alpha * delta, p.gamma * p.lambda);
}

/// Epsilon-greedy selection: with probability `epsilon` a uniform legal
/// action, otherwise a uniformly tie-broken argmax of `Q(state, .)`. The
/// resulting distribution gives the greedy action mass
/// `1 - epsilon + epsilon/|A|` and every other action `epsilon/|A|`.
pub fn select_action<R: Rng + ?Sized>(
    q: &QTable,
    state: StateKey,
    legal: &[Action],
    epsilon: f64,
    rng: &mut R,
) -> Action {
    assert!(!legal.is_empty(), "select_action requires at least one legal action");
    debug_assert!((0.0..=1.0).contains(&epsilon));
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        legal[rng.gen_range(0..legal.len())]
    } else {
        greedy_action(q, state, legal, rng)
    }
}

/// Uniformly tie-broken argmax of `Q(state, .)` over the legal actions.
pub fn greedy_action<R: Rng + ?Sized>(
    q: &QTable,
    state: StateKey,
    legal: &[Action],
    rng: &mut R,
) -> Action {
    assert!(!legal.is_empty(), "greedy_action requires at least one legal action");
    let mut best = f64::NEG_INFINITY;
    let mut ties = ActionList::new();
    for &action in legal {
        let v = q.get(state, action);
        if v > best {
            best = v;
            ties.clear();
            ties.push(action);
        } else if v == best {
            ties.push(action);
        }
    }
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.gen_range(0..ties.len())]
    }
}
