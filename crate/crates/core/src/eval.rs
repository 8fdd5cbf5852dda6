//! Evaluation of frozen agents: the ten-board move-quality test with
//! difficulty tiers, and the all-pairs league producing win matrices.
//! Nothing in this module mutates a value table.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{reachable_states, Action, GameState, Mark, MinimaxSolver, Outcome};
use crate::rl::{greedy_action, AgentId, QTable};
use crate::seed::child_seed;

/// Difficulty tier of a test board.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Intermediate,
    Hard,
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Difficulty::Easy => write!(f, "easy"),
            Difficulty::Intermediate => write!(f, "intermediate"),
            Difficulty::Hard => write!(f, "hard"),
        }
    }
}

/// Playing-strength label derived from the board-test score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Beginner,
    Intermediate,
    Advanced,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Beginner => write!(f, "beginner"),
            Level::Intermediate => write!(f, "intermediate"),
            Level::Advanced => write!(f, "advanced"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    ScoreOutOfRange(u32),
    OddGamesPerPair(u32),
    TooFewAgents(usize),
    TierExhausted(Difficulty),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::ScoreOutOfRange(s) => write!(f, "board-test score {s} exceeds 10"),
            EvalError::OddGamesPerPair(g) => {
                write!(f, "games per pair {g} must be even so starters alternate evenly")
            }
            EvalError::TooFewAgents(n) => write!(f, "league needs at least 2 agents, got {n}"),
            EvalError::TierExhausted(d) => {
                write!(f, "not enough qualifying {d} boards; generation is broken")
            }
        }
    }
}

impl std::error::Error for EvalError {}

/// A board with exactly one correct move, graded by how the correct move
/// pays off.
#[derive(Debug, Clone, PartialEq)]
pub struct TestBoard {
    pub state: GameState,
    pub correct: Action,
    pub difficulty: Difficulty,
    pub description: String,
}

/// Per-agent board-test result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardTestReport {
    pub agent: AgentId,
    pub easy_correct: u32,
    pub intermediate_correct: u32,
    pub hard_correct: u32,
    pub total_correct: u32,
    pub level: Level,
}

/// An action source for frozen play: policies never learn and may be
/// shared, so choosing takes `&self` and an external random stream for
/// tie-breaking.
pub trait Policy {
    fn choose(&self, state: &GameState, legal: &[Action], rng: &mut dyn RngCore) -> Action;
}

/// Greedy play over a frozen value table with uniform tie-breaks.
pub struct GreedyPolicy<'a> {
    pub q: &'a QTable,
}

impl Policy for GreedyPolicy<'_> {
    fn choose(&self, state: &GameState, legal: &[Action], rng: &mut dyn RngCore) -> Action {
        greedy_action(self.q, state.encode(), legal, rng)
    }
}

/// Perfect play: a uniform choice among the exact-value-optimal actions.
pub struct OraclePolicy<'a> {
    pub solver: &'a MinimaxSolver,
}

impl Policy for OraclePolicy<'_> {
    fn choose(&self, state: &GameState, legal: &[Action], rng: &mut dyn RngCore) -> Action {
        let (_, best) = self.solver.solve(state).expect("policy is asked on ongoing states");
        let actions = best.to_actions();
        debug_assert!(actions.iter().all(|a| legal.contains(a)));
        actions[rng.gen_range(0..actions.len())]
    }
}

/// Uniform random play.
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn choose(&self, _state: &GameState, legal: &[Action], rng: &mut dyn RngCore) -> Action {
        legal[rng.gen_range(0..legal.len())]
    }
}

/// Deterministically generates the ten test boards from the oracle:
/// reachable ongoing states are filtered to those with a unique optimal
/// move, classified by tier, and the first 5 easy / 2 intermediate /
/// 3 hard by ascending state key are selected.
///
/// - easy: the correct move wins immediately
/// - intermediate: the correct move is the only one that avoids defeat
///   (value 0; every alternative loses)
/// - hard: the correct move forces a win on a later ply
pub fn generate_test_boards(solver: &MinimaxSolver) -> Result<Vec<TestBoard>, EvalError> {
    let mut easy = Vec::new();
    let mut intermediate = Vec::new();
    let mut hard = Vec::new();
    for key in reachable_states() {
        let state = GameState::decode(key).expect("reachable keys decode");
        if state.outcome() != Outcome::Ongoing {
            continue;
        }
        let (value, best) = solver.solve(&state).expect("ongoing state solves");
        if best.len() != 1 {
            continue;
        }
        let correct = best.to_actions()[0];
        let wins_now =
            state.apply(correct).expect("best move is legal").outcome() == Outcome::Win(state.to_move());
        match (value, wins_now) {
            (1, true) => easy.push((state, correct)),
            (1, false) => hard.push((state, correct)),
            (0, _) => intermediate.push((state, correct)),
            _ => {}
        }
    }

    let mut boards = Vec::with_capacity(10);
    for (tier, candidates, want) in [
        (Difficulty::Easy, easy, 5usize),
        (Difficulty::Intermediate, intermediate, 2),
        (Difficulty::Hard, hard, 3),
    ] {
        if candidates.len() < want {
            return Err(EvalError::TierExhausted(tier));
        }
        for (state, correct) in candidates.into_iter().take(want) {
            boards.push(TestBoard {
                description: describe(tier, &state, correct),
                state,
                correct,
                difficulty: tier,
            });
        }
    }
    Ok(boards)
}

fn describe(tier: Difficulty, state: &GameState, correct: Action) -> String {
    let mover = match state.to_move() {
        Mark::Cross => "Cross",
        Mark::Nought => "Nought",
        Mark::Empty => unreachable!("side to move is never empty"),
    };
    match tier {
        Difficulty::Easy => format!("{mover} to play; {correct} wins immediately"),
        Difficulty::Intermediate => {
            format!("{mover} to play; {correct} is the only move that avoids defeat")
        }
        Difficulty::Hard => format!("{mover} to play; {correct} forces a win later"),
    }
}

/// Runs the board test: one greedy try per board, correct iff the chosen
/// action is the board's unique correct move.
pub fn run_board_test(
    agent: AgentId,
    policy: &dyn Policy,
    boards: &[TestBoard],
    rng: &mut dyn RngCore,
) -> BoardTestReport {
    let mut per_tier = [0u32; 3];
    for board in boards {
        let legal = board.state.legal_actions().expect("test boards are ongoing");
        let chosen = policy.choose(&board.state, &legal, rng);
        if chosen == board.correct {
            let idx = match board.difficulty {
                Difficulty::Easy => 0,
                Difficulty::Intermediate => 1,
                Difficulty::Hard => 2,
            };
            per_tier[idx] += 1;
        }
    }
    let total = per_tier.iter().sum();
    BoardTestReport {
        agent,
        easy_correct: per_tier[0],
        intermediate_correct: per_tier[1],
        hard_correct: per_tier[2],
        total_correct: total,
        level: classify_level(total).expect("tier counts bound the total by 10"),
    }
}

/// Level thresholds: 4 or fewer correct is beginner, 5-7 intermediate,
/// 8 or more advanced.
pub fn classify_level(total_correct: u32) -> Result<Level, EvalError> {
    match total_correct {
        0..=4 => Ok(Level::Beginner),
        5..=7 => Ok(Level::Intermediate),
        8..=10 => Ok(Level::Advanced),
        _ => Err(EvalError::ScoreOutOfRange(total_correct)),
    }
}

/// League results: wins and draws for every ordered pair plus per-agent
/// starter tallies. For every unordered pair,
/// `wins[i][j] + wins[j][i] + draws[i][j] == games_per_pair`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinMatrix {
    pub agents: Vec<AgentId>,
    pub games_per_pair: u32,
    wins: Vec<u32>,
    draws: Vec<u32>,
    starter_wins: Vec<u32>,
    starter_games: Vec<u32>,
}

impl WinMatrix {
    fn new(agents: Vec<AgentId>, games_per_pair: u32) -> WinMatrix {
        let n = agents.len();
        WinMatrix {
            agents,
            games_per_pair,
            wins: vec![0; n * n],
            draws: vec![0; n * n],
            starter_wins: vec![0; n],
            starter_games: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Games the row agent won against the column agent.
    pub fn wins(&self, row: usize, col: usize) -> u32 {
        self.wins[row * self.agents.len() + col]
    }

    /// Drawn games between the pair; symmetric.
    pub fn draws(&self, row: usize, col: usize) -> u32 {
        self.draws[row * self.agents.len() + col]
    }

    /// Wins achieved by an agent in games it started.
    pub fn starter_wins_of(&self, index: usize) -> u32 {
        self.starter_wins[index]
    }

    /// Games an agent started.
    pub fn starter_games_of(&self, index: usize) -> u32 {
        self.starter_games[index]
    }

    /// Total decisive games across all pairs.
    pub fn decisive_games(&self) -> u32 {
        self.wins.iter().sum()
    }

    /// Checks the accounting identity on every pair and the diagonal.
    pub fn verify(&self) -> bool {
        let n = self.agents.len();
        for i in 0..n {
            if self.wins(i, i) != 0 || self.draws(i, i) != 0 {
                return false;
            }
            for j in (i + 1)..n {
                if self.draws(i, j) != self.draws(j, i) {
                    return false;
                }
                if self.wins(i, j) + self.wins(j, i) + self.draws(i, j) != self.games_per_pair {
                    return false;
                }
            }
        }
        true
    }
}

/// A league participant: an id for the matrix axis plus its frozen policy.
pub struct LeagueEntry<'a> {
    pub id: AgentId,
    pub policy: &'a dyn Policy,
}

/// Plays one frozen game; returns the winner's side (`true` if the first
/// policy, playing cross, won) and the ply count.
fn play_frozen_game(
    cross: &dyn Policy,
    nought: &dyn Policy,
    rng: &mut dyn RngCore,
) -> (Option<bool>, u8) {
    let mut state = GameState::empty(Mark::Cross);
    let mut plies = 0u8;
    loop {
        let legal = state.legal_actions().expect("loop runs on ongoing states");
        let policy = if state.to_move() == Mark::Cross { cross } else { nought };
        let action = policy.choose(&state, &legal, rng);
        state = state.apply(action).expect("chosen action is legal");
        plies += 1;
        match state.outcome() {
            Outcome::Ongoing => {}
            Outcome::Draw => return (None, plies),
            Outcome::Win(m) => return (Some(m == Mark::Cross), plies),
        }
    }
}

/// All-pairs league among frozen agents. Every unordered pair plays
/// `games_per_pair` games with starters alternating exactly, so the count
/// must be even. Per-game random streams are derived from the master seed
/// and the pair, making results schedule-independent.
pub fn run_league(
    entries: &[LeagueEntry<'_>],
    games_per_pair: u32,
    master_seed: u64,
) -> Result<WinMatrix, EvalError> {
    if entries.len() < 2 {
        return Err(EvalError::TooFewAgents(entries.len()));
    }
    if games_per_pair % 2 != 0 {
        return Err(EvalError::OddGamesPerPair(games_per_pair));
    }
    let ids: Vec<AgentId> = entries.iter().map(|e| e.id).collect();
    let mut matrix = WinMatrix::new(ids, games_per_pair);
    let n = entries.len();
    for i in 0..n {
        for j in (i + 1)..n {
            for game in 0..games_per_pair {
                let label = format!("league/{}-{}/game={}", entries[i].id, entries[j].id, game);
                let mut rng = ChaCha8Rng::seed_from_u64(child_seed(master_seed, &label));
                // Starters alternate exactly: even games start with i.
                let (cross_idx, nought_idx) = if game % 2 == 0 { (i, j) } else { (j, i) };
                let (winner, _plies) =
                    play_frozen_game(entries[cross_idx].policy, entries[nought_idx].policy, &mut rng);
                matrix.starter_games[cross_idx] += 1;
                match winner {
                    Some(true) => {
                        matrix.wins[cross_idx * n + nought_idx] += 1;
                        matrix.starter_wins[cross_idx] += 1;
                    }
                    Some(false) => {
                        matrix.wins[nought_idx * n + cross_idx] += 1;
                    }
                    None => {
                        matrix.draws[cross_idx * n + nought_idx] += 1;
                        matrix.draws[nought_idx * n + cross_idx] += 1;
                    }
                }
            }
        }
    }
    debug_assert!(matrix.verify());
    Ok(matrix)
}

/// Fraction of decisive games won by the agent that moved first,
/// aggregated over the whole league; 0 when every game was drawn.
pub fn starter_advantage(matrix: &WinMatrix) -> f64 {
    let decisive = matrix.decisive_games();
    if decisive == 0 {
        return 0.0;
    }
    let starter_wins: u32 = matrix.starter_wins.iter().sum();
    starter_wins as f64 / decisive as f64
}
