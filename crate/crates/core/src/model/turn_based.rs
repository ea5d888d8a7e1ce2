use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Scalar;

use super::concurrent::{check_distribution, DUMMY_MOVE};
use super::{ConcurrentGame, Diagnostic, Distribution, StateId, StateSet};

/// Who controls a turn-based state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Owner {
    #[serde(rename = "p1")]
    Player1,
    #[serde(rename = "p2")]
    Player2,
    #[serde(rename = "random")]
    Random,
}

/// Turn-based stochastic game: a graph whose states are partitioned among
/// player 1, player 2 and chance.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnBasedGame<N> {
    states: Vec<String>,
    owner: Vec<Owner>,
    edges: Vec<Vec<StateId>>,
    /// Successor distribution of each random state; `None` elsewhere.
    dist: Vec<Option<Distribution<N>>>,
}

impl<N: Scalar> TurnBasedGame<N> {
    /// Assembles a game; invariants are checked by [`validate`](Self::validate).
    pub fn from_parts(
        states: Vec<String>,
        owner: Vec<Owner>,
        edges: Vec<Vec<StateId>>,
        dist: Vec<Option<Distribution<N>>>,
    ) -> Result<Self> {
        let n = states.len();
        if owner.len() != n || edges.len() != n || dist.len() != n {
            return Err(Error::Internal("per-state tables disagree with state count".into()));
        }
        let edges = edges
            .into_iter()
            .map(|mut es| {
                es.sort_unstable();
                es.dedup();
                es
            })
            .collect();
        Ok(Self {
            states,
            owner,
            edges,
            dist,
        })
    }

    pub fn new(
        states: Vec<String>,
        owner: Vec<Owner>,
        edges: Vec<Vec<StateId>>,
        dist: Vec<Option<Distribution<N>>>,
    ) -> Result<Self> {
        let game = Self::from_parts(states, owner, edges, dist)?;
        let diagnostics = game.validate();
        if diagnostics.is_empty() {
            Ok(game)
        } else {
            Err(Error::InvalidGame(diagnostics))
        }
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.num_states();
        for s in self.states() {
            let name = &self.states[s];
            if self.edges[s].is_empty() {
                out.push(Diagnostic::new(name, "edges", "no outgoing edge"));
            }
            if self.edges[s].iter().any(|&t| t >= n) {
                out.push(Diagnostic::new(name, "edges", "successor out of range"));
            }
            match (self.owner[s], &self.dist[s]) {
                (Owner::Random, None) => {
                    out.push(Diagnostic::new(name, "dist", "random state without distribution"))
                }
                (Owner::Random, Some(d)) => {
                    check_distribution(d, n, name, "dist", &mut out);
                    let support: Vec<StateId> = d.support().collect();
                    if support != self.edges[s] {
                        out.push(Diagnostic::new(
                            name,
                            "dist",
                            "distribution support differs from the edge set",
                        ));
                    }
                }
                (_, Some(_)) => out.push(Diagnostic::new(
                    name,
                    "dist",
                    "distribution given for a player state",
                )),
                (_, None) => {}
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

    pub fn state_set<S: AsRef<str>>(&self, names: &[S]) -> Result<StateSet> {
        names
            .iter()
            .map(|n| {
                self.state_index(n.as_ref())
                    .ok_or_else(|| Error::UnknownState(n.as_ref().to_string()))
            })
            .collect()
    }

    pub fn owner(&self, s: StateId) -> Owner {
        self.owner[s]
    }

    pub fn successors(&self, s: StateId) -> &[StateId] {
        &self.edges[s]
    }

    pub fn distribution(&self, s: StateId) -> Option<&Distribution<N>> {
        self.dist[s].as_ref()
    }

    pub fn states_of(&self, owner: Owner) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(move |&s| self.owner[s] == owner)
    }

    /// Binary game: every random state has at most two successors and,
    /// when it has two, each is taken with probability 1/2.
    pub fn is_binary(&self) -> bool {
        let half = N::from_ratio(1, 2);
        self.states_of(Owner::Random).all(|s| match self.edges[s].len() {
            1 => true,
            2 => self.dist[s]
                .as_ref()
                .is_some_and(|d| d.iter().all(|(_, p)| *p == half)),
            _ => false,
        })
    }

    /// Encodes the game as a concurrent game: the owner of a state keeps one
    /// move per successor (named after it), the other player gets the
    /// placeholder move, and random states get placeholder moves for both.
    pub fn to_concurrent(&self) -> ConcurrentGame<N> {
        let mut alphabet = vec![DUMMY_MOVE.to_string()];
        let mut alpha_index: HashMap<&str, usize> = HashMap::new();
        alpha_index.insert(DUMMY_MOVE, 0);
        for name in &self.states {
            if !alpha_index.contains_key(name.as_str()) {
                alpha_index.insert(name, alphabet.len());
                alphabet.push(name.clone());
            }
        }
        let mut moves1 = Vec::with_capacity(self.num_states());
        let mut moves2 = Vec::with_capacity(self.num_states());
        let mut delta = Vec::with_capacity(self.num_states());
        for s in self.states() {
            let succ_moves: Vec<usize> = self.edges[s]
                .iter()
                .map(|&t| alpha_index[self.states[t].as_str()])
                .collect();
            let points = || self.edges[s].iter().map(|&t| Distribution::point(t));
            match self.owner[s] {
                Owner::Player1 => {
                    moves1.push(succ_moves);
                    moves2.push(vec![0]);
                    delta.push(points().map(|d| vec![d]).collect());
                }
                Owner::Player2 => {
                    moves1.push(vec![0]);
                    moves2.push(succ_moves);
                    delta.push(vec![points().collect()]);
                }
                Owner::Random => {
                    moves1.push(vec![0]);
                    moves2.push(vec![0]);
                    let d = self.dist[s].clone().unwrap_or_else(Distribution::empty);
                    delta.push(vec![vec![d]]);
                }
            }
        }
        ConcurrentGame::from_parts(self.states.clone(), alphabet, moves1, moves2, delta)
            .expect("turn-based encoding has consistent shapes")
    }

    pub fn convert<M: Scalar>(&self) -> TurnBasedGame<M> {
        TurnBasedGame {
            states: self.states.clone(),
            owner: self.owner.clone(),
            edges: self.edges.clone(),
            dist: self
                .dist
                .iter()
                .map(|d| d.as_ref().map(Distribution::convert))
                .collect(),
        }
    }
}
