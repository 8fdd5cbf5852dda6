//! Tabular TD(lambda) tic-tac-toe agents trained three ways — self-play,
//! round robin, and a modified Swiss winner/loser pool tournament — with a
//! minimax-backed board test and an all-pairs league for evaluation.
//!
//! The crate is organized around four layers:
//!
//! - [`game`]: exact rules, state encoding, rewards, and the minimax oracle
//! - [`rl`]: Q-table, eligibility traces, the TD(lambda) update, and
//!   epsilon-greedy action selection
//! - [`training`]: the game controller and the three training regimes
//! - [`eval`]: the ten-board move-quality test and the league play test
//!
//! All randomness flows through seeds derived in [`seed`], so any run is
//! reproducible from its master seed.

pub mod eval;
pub mod game;
pub mod rl;
pub mod seed;
pub mod training;

pub use eval::{
    classify_level, generate_test_boards, run_board_test, run_league, starter_advantage,
    BoardTestReport, Difficulty, EvalError, GreedyPolicy, LeagueEntry, Level, OraclePolicy,
    Policy, RandomPolicy, TestBoard, WinMatrix,
};
pub use game::{
    reachable_states, reward, Action, ActionList, ActionSet, GameError, GameState, Mark,
    MinimaxSolver, Outcome, StateKey, KEY_SPACE, LINES,
};
pub use rl::{
    greedy_action, select_action, td_update, AgentIdentity, Bootstrap, EligibilityTraces,
    EpsilonSchedule, Hyperparameters, NextState, QTable, Transition,
};
pub use training::{
    play_training_game, run_modified_swiss, run_round_robin, run_self_play, swiss_initial_split,
    swiss_pairings, Agent, AgentId, GameRecord, PairOutcome, Pool, PoolAssignment,
    PopulationConfig, Regime, RoundRobinTrainer, StarterRule, SwissTrainer, TrainingError,
    TrainingRun,
};
