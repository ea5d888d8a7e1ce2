use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::Scalar;

use super::{Distribution, Player, StateId, StateSet};

/// One violated invariant found by validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub state: String,
    pub field: String,
    pub reason: String,
}

impl Diagnostic {
    pub fn new(state: impl Into<String>, field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            state: state.into(),
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.state, self.field, self.reason)
    }
}

/// Finite two-player concurrent stochastic game.
///
/// States and moves carry string names; internally states are dense indices
/// in declaration order, and the moves available at a state are addressed by
/// their local position in that state's move list.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrentGame<N> {
    states: Vec<String>,
    moves: Vec<String>,
    moves1: Vec<Vec<usize>>,
    moves2: Vec<Vec<usize>>,
    /// `delta[s][i][j]` for local move indices `i` of player 1 and `j` of player 2.
    delta: Vec<Vec<Vec<Distribution<N>>>>,
}

/// Name of the placeholder move given to a player without a real choice.
pub const DUMMY_MOVE: &str = "_";

impl<N: Scalar> ConcurrentGame<N> {
    /// Assembles a game without checking the probabilistic invariants; only
    /// the shapes of the move tables are checked. Use [`validate`](Self::validate)
    /// or [`ConcurrentGame::new`] for full checking.
    pub fn from_parts(
        states: Vec<String>,
        moves: Vec<String>,
        moves1: Vec<Vec<usize>>,
        moves2: Vec<Vec<usize>>,
        delta: Vec<Vec<Vec<Distribution<N>>>>,
    ) -> Result<Self> {
        let n = states.len();
        if moves1.len() != n || moves2.len() != n || delta.len() != n {
            return Err(Error::Internal("per-state tables disagree with state count".into()));
        }
        for s in 0..n {
            if delta[s].len() != moves1[s].len()
                || delta[s].iter().any(|row| row.len() != moves2[s].len())
            {
                return Err(Error::Internal(format!(
                    "transition table of `{}` does not match its move sets",
                    states[s]
                )));
            }
            if moves1[s].iter().chain(&moves2[s]).any(|&m| m >= moves.len()) {
                return Err(Error::Internal(format!("move index out of range at `{}`", states[s])));
            }
        }
        Ok(Self {
            states,
            moves,
            moves1,
            moves2,
            delta,
        })
    }

    /// Assembles and fully validates a game.
    pub fn new(
        states: Vec<String>,
        moves: Vec<String>,
        moves1: Vec<Vec<usize>>,
        moves2: Vec<Vec<usize>>,
        delta: Vec<Vec<Vec<Distribution<N>>>>,
    ) -> Result<Self> {
        let game = Self::from_parts(states, moves, moves1, moves2, delta)?;
        let diagnostics = game.validate();
        if diagnostics.is_empty() {
            Ok(game)
        } else {
            Err(Error::InvalidGame(diagnostics))
        }
    }

    /// Checks every game invariant and reports one diagnostic per violation.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for s in self.states() {
            let name = &self.states[s];
            for (player, field) in [(Player::One, "moves1"), (Player::Two, "moves2")] {
                let ms = self.moves_of(player, s);
                if ms.is_empty() {
                    out.push(Diagnostic::new(name, field, "empty move set"));
                }
                let mut seen = ms.to_vec();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != ms.len() {
                    out.push(Diagnostic::new(name, field, "duplicate move"));
                }
            }
            for (i, row) in self.delta[s].iter().enumerate() {
                for (j, dist) in row.iter().enumerate() {
                    let field = format!(
                        "transition({},{})",
                        self.moves[self.moves1[s][i]],
                        self.moves[self.moves2[s][j]]
                    );
                    check_distribution(dist, self.num_states(), name, &field, &mut out);
                }
            }
        }
        out
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.states.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|n| n == name)
    }

    /// Resolves state names to a state set.
    pub fn state_set<S: AsRef<str>>(&self, names: &[S]) -> Result<StateSet> {
        names
            .iter()
            .map(|n| {
                self.state_index(n.as_ref())
                    .ok_or_else(|| Error::UnknownState(n.as_ref().to_string()))
            })
            .collect()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.moves
    }

    /// Alphabet indices of the moves available to `player` at `s`.
    pub fn moves_of(&self, player: Player, s: StateId) -> &[usize] {
        match player {
            Player::One => &self.moves1[s],
            Player::Two => &self.moves2[s],
        }
    }

    pub fn num_moves(&self, player: Player, s: StateId) -> usize {
        self.moves_of(player, s).len()
    }

    /// Name of the `local`-th move of `player` at `s`.
    pub fn move_name(&self, player: Player, s: StateId, local: usize) -> &str {
        &self.moves[self.moves_of(player, s)[local]]
    }

    pub fn local_move(&self, player: Player, s: StateId, name: &str) -> Option<usize> {
        self.moves_of(player, s)
            .iter()
            .position(|&m| self.moves[m] == name)
    }

    /// `δ(s, a1, a2)` for local move indices.
    pub fn transition(&self, s: StateId, a1: usize, a2: usize) -> &Distribution<N> {
        &self.delta[s][a1][a2]
    }

    /// `Dest(s, a1, a2)`.
    pub fn dest(&self, s: StateId, a1: usize, a2: usize) -> impl Iterator<Item = StateId> + '_ {
        self.delta[s][a1][a2].support()
    }

    pub fn is_absorbing(&self, s: StateId) -> bool {
        self.delta[s]
            .iter()
            .flatten()
            .all(|d| d.prob(s) == N::one())
    }

    /// Payoff matrix `M[a][b] = Σ_t v(t)·δ(s,a,b)(t)` of the one-shot game at `s`.
    pub fn payoff_matrix(&self, s: StateId, values: &[N]) -> Vec<Vec<N>> {
        self.delta[s]
            .iter()
            .map(|row| row.iter().map(|d| d.expectation(values)).collect())
            .collect()
    }

    /// Same game with the roles of the two players exchanged.
    pub fn swap_players(&self) -> Self {
        let delta = self
            .delta
            .iter()
            .map(|rows| {
                let n1 = rows.len();
                let n2 = rows.first().map_or(0, Vec::len);
                (0..n2)
                    .map(|j| (0..n1).map(|i| rows[i][j].clone()).collect())
                    .collect()
            })
            .collect();
        Self {
            states: self.states.clone(),
            moves: self.moves.clone(),
            moves1: self.moves2.clone(),
            moves2: self.moves1.clone(),
            delta,
        }
    }

    /// Converts probabilities to another backend.
    pub fn convert<M: Scalar>(&self) -> ConcurrentGame<M> {
        ConcurrentGame {
            states: self.states.clone(),
            moves: self.moves.clone(),
            moves1: self.moves1.clone(),
            moves2: self.moves2.clone(),
            delta: self
                .delta
                .iter()
                .map(|rows| {
                    rows.iter()
                        .map(|row| row.iter().map(Distribution::convert).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub(crate) fn dummy_move_index(&mut self) -> usize {
        match self.moves.iter().position(|m| m == DUMMY_MOVE) {
            Some(i) => i,
            None => {
                self.moves.push(DUMMY_MOVE.to_string());
                self.moves.len() - 1
            }
        }
    }

    pub(crate) fn parts_mut(
        &mut self,
    ) -> (
        &mut Vec<Vec<usize>>,
        &mut Vec<Vec<usize>>,
        &mut Vec<Vec<Vec<Distribution<N>>>>,
    ) {
        (&mut self.moves1, &mut self.moves2, &mut self.delta)
    }
}

pub(crate) fn check_distribution<N: Scalar>(
    dist: &Distribution<N>,
    num_states: usize,
    state: &str,
    field: &str,
    out: &mut Vec<Diagnostic>,
) {
    if dist.is_empty() {
        out.push(Diagnostic::new(state, field, "missing transition"));
        return;
    }
    if dist.iter().any(|(t, _)| t >= num_states) {
        out.push(Diagnostic::new(state, field, "target state out of range"));
    }
    if dist.iter().any(|(_, p)| *p < N::zero()) {
        out.push(Diagnostic::new(state, field, "negative probability"));
    }
    if dist.iter().any(|(_, p)| *p > N::one()) {
        out.push(Diagnostic::new(state, field, "probability exceeds 1"));
    }
    if dist.support().next().is_none() {
        out.push(Diagnostic::new(state, field, "empty support"));
    }
    let total = dist.total();
    if !total.approx_eq(&N::one(), 1e-12) {
        out.push(Diagnostic::new(
            state,
            field,
            format!("distribution sum is {} instead of 1", total.render()),
        ));
    }
}

/// Incremental construction of a [`ConcurrentGame`] from names.
#[derive(Debug, Clone)]
pub struct GameBuilder<N> {
    states: Vec<String>,
    moves1: Vec<Vec<String>>,
    moves2: Vec<Vec<String>>,
    transitions: Vec<(String, String, String, Vec<(String, N)>)>,
}

impl<N: Scalar> Default for GameBuilder<N> {
    fn default() -> Self {
        Self {
            states: Vec::new(),
            moves1: Vec::new(),
            moves2: Vec::new(),
            transitions: Vec::new(),
        }
    }
}

impl<N: Scalar> GameBuilder<N> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a state with its move sets.
    pub fn state<S: AsRef<str>>(&mut self, name: &str, moves1: &[S], moves2: &[S]) -> &mut Self {
        self.states.push(name.to_string());
        self.moves1
            .push(moves1.iter().map(|m| m.as_ref().to_string()).collect());
        self.moves2
            .push(moves2.iter().map(|m| m.as_ref().to_string()).collect());
        self
    }

    /// Declares `δ(from, a1, a2)`.
    pub fn transition<S: AsRef<str>>(
        &mut self,
        from: &str,
        a1: &str,
        a2: &str,
        dist: &[(S, N)],
    ) -> &mut Self {
        self.transitions.push((
            from.to_string(),
            a1.to_string(),
            a2.to_string(),
            dist.iter()
                .map(|(t, p)| (t.as_ref().to_string(), p.clone()))
                .collect(),
        ));
        self
    }

    /// Declares an absorbing state with singleton dummy moves.
    pub fn absorbing(&mut self, name: &str) -> &mut Self {
        self.state(name, &[DUMMY_MOVE], &[DUMMY_MOVE]);
        self.transition(name, DUMMY_MOVE, DUMMY_MOVE, &[(name, N::one())])
    }

    /// Resolves names and returns the game with structural diagnostics
    /// (unknown names, duplicates) merged with [`ConcurrentGame::validate`].
    pub fn finish(self) -> Result<(ConcurrentGame<N>, Vec<Diagnostic>)> {
        let mut diagnostics = Vec::new();
        let mut index: HashMap<&str, StateId> = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            if index.insert(s.as_str(), i).is_some() {
                diagnostics.push(Diagnostic::new(s, "states", "duplicate state"));
            }
        }
        let mut alphabet: Vec<String> = Vec::new();
        let mut alpha_index: HashMap<String, usize> = HashMap::new();
        let mut intern = |m: &str| -> usize {
            if let Some(&i) = alpha_index.get(m) {
                return i;
            }
            alphabet.push(m.to_string());
            alpha_index.insert(m.to_string(), alphabet.len() - 1);
            alphabet.len() - 1
        };
        let moves1: Vec<Vec<usize>> = self
            .moves1
            .iter()
            .map(|ms| ms.iter().map(|m| intern(m)).collect())
            .collect();
        let moves2: Vec<Vec<usize>> = self
            .moves2
            .iter()
            .map(|ms| ms.iter().map(|m| intern(m)).collect())
            .collect();
        let mut delta: Vec<Vec<Vec<Distribution<N>>>> = moves1
            .iter()
            .zip(&moves2)
            .map(|(m1, m2)| vec![vec![Distribution::empty(); m2.len()]; m1.len()])
            .collect();

        for (from, a1, a2, dist) in &self.transitions {
            let Some(&s) = index.get(from.as_str()) else {
                diagnostics.push(Diagnostic::new(from, "transitions", "unknown source state"));
                continue;
            };
            let i = self.moves1[s].iter().position(|m| m == a1);
            let j = self.moves2[s].iter().position(|m| m == a2);
            let (Some(i), Some(j)) = (i, j) else {
                diagnostics.push(Diagnostic::new(
                    from,
                    "transitions",
                    format!("move pair ({a1},{a2}) not available"),
                ));
                continue;
            };
            if !delta[s][i][j].is_empty() {
                diagnostics.push(Diagnostic::new(
                    from,
                    "transitions",
                    format!("duplicate transition ({a1},{a2})"),
                ));
                continue;
            }
            let mut entries = Vec::with_capacity(dist.len());
            for (t, p) in dist {
                match index.get(t.as_str()) {
                    Some(&ti) => entries.push((ti, p.clone())),
                    None => diagnostics.push(Diagnostic::new(
                        from,
                        "transitions",
                        format!("unknown target state `{t}`"),
                    )),
                }
            }
            delta[s][i][j] = Distribution::from_entries(entries);
        }

        let game = ConcurrentGame::from_parts(self.states, alphabet, moves1, moves2, delta)?;
        diagnostics.extend(game.validate());
        Ok((game, diagnostics))
    }

    pub fn build(self) -> Result<ConcurrentGame<N>> {
        let (game, diagnostics) = self.finish()?;
        if diagnostics.is_empty() {
            Ok(game)
        } else {
            Err(Error::InvalidGame(diagnostics))
        }
    }
}
