//! Exact game-tree oracle. The whole tree is solved once at construction,
//! so lookups afterwards are plain reads and the solver can be shared
//! across threads.

use super::{Action, ActionList, GameError, GameState, Outcome, StateKey, KEY_SPACE};

/// A set of cells packed into the low nine bits of a `u16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionSet(u16);

impl ActionSet {
    pub fn contains(&self, action: Action) -> bool {
        self.0 & (1 << action.0) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Action> + '_ {
        let bits = self.0;
        (0..9u8).filter(move |c| bits & (1 << c) != 0).map(Action)
    }

    /// The set as an ascending action list.
    pub fn to_actions(&self) -> ActionList {
        self.iter().collect()
    }
}

/// Fully solved tic-tac-toe: for every valid ongoing position, the exact
/// value for the side to move and the set of value-achieving actions.
pub struct MinimaxSolver {
    // Indexed by state key; None for keys that are invalid or terminal.
    table: Vec<Option<(i8, ActionSet)>>,
}

impl MinimaxSolver {
    /// Solves every valid ongoing position reachable by legal play.
    pub fn new() -> MinimaxSolver {
        let mut solver = MinimaxSolver {
            table: vec![None; KEY_SPACE],
        };
        for starter in [super::Mark::Cross, super::Mark::Nought] {
            solver.solve_rec(GameState::empty(starter));
        }
        solver
    }

    fn solve_rec(&mut self, state: GameState) -> (i8, ActionSet) {
        let key = state.encode().0 as usize;
        if let Some(entry) = self.table[key] {
            return entry;
        }
        let mut best: i8 = -2;
        let mut set: u16 = 0;
        for action in state.legal_actions().expect("solve_rec requires ongoing state") {
            let next = state.apply(action).expect("legal action applies");
            let value = match next.outcome() {
                Outcome::Win(m) => {
                    debug_assert_eq!(m, state.to_move());
                    1
                }
                Outcome::Draw => 0,
                Outcome::Ongoing => -self.solve_rec(next).0,
            };
            if value > best {
                best = value;
                set = 1 << action.0;
            } else if value == best {
                set |= 1 << action.0;
            }
        }
        let entry = (best, ActionSet(set));
        self.table[key] = Some(entry);
        entry
    }

    /// Exact value for the side to move (+1 win, 0 draw, -1 loss) and every
    /// action achieving it. Terminal positions are rejected.
    pub fn solve(&self, state: &GameState) -> Result<(i8, ActionSet), GameError> {
        if state.outcome() != Outcome::Ongoing {
            return Err(GameError::TerminalState);
        }
        // All valid ongoing positions are reachable by legal play (a final
        // board with no completed line has no terminal prefix), so the
        // precomputed table covers every state the precondition admits.
        self.table[state.encode().0 as usize]
            .ok_or_else(|| GameError::InvalidKey(state.encode().0 as u32))
    }

    /// Convenience lookup by key.
    pub fn solve_key(&self, key: StateKey) -> Result<(i8, ActionSet), GameError> {
        let state = GameState::decode(key)?;
        self.solve(&state)
    }
}

impl Default for MinimaxSolver {
    fn default() -> Self {
        MinimaxSolver::new()
    }
}
