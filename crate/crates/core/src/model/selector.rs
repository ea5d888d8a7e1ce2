use std::ops::Index;


use crate::error::{Error, Result};
use crate::numeric::Scalar;

use super::{ConcurrentGame, Player, StateId, StateSet};

/// Assignment of a probability in `[0,1]` to every state.
#[derive(Debug, Clone, PartialEq)]
pub struct Valuation<N>(Vec<N>);

impl<N: Scalar> Valuation<N> {
    pub fn new(values: Vec<N>) -> Self {
        Self(values)
    }

    pub fn constant(n: usize, c: N) -> Self {
        Self(vec![c; n])
    }

    /// Indicator valuation `[set]`.
    pub fn indicator(n: usize, set: &StateSet) -> Self {
        Self(
            (0..n)
                .map(|s| if set.contains(&s) { N::one() } else { N::zero() })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[N] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<N> {
        self.0
    }

    pub fn set(&mut self, s: StateId, value: N) {
        self.0[s] = value;
    }

    /// `1 - v` statewise.
    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|x| N::one() - x.clone()).collect())
    }

    /// Largest statewise distance to `other`, as `f64`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Scalar::to_f64).collect()
    }
}

impl<N> Index<StateId> for Valuation<N> {
    type Output = N;

    fn index(&self, s: StateId) -> &N {
        &self.0[s]
    }
}

/// Memoryless randomized choice of moves for one player: one distribution
/// per state over that player's local moves.
#[derive(Debug, Clone, PartialEq)]
pub struct Selector<N> {
    owner: Player,
    choice: Vec<Vec<N>>,
}

impl<N: Scalar> Selector<N> {
    pub fn new(owner: Player, choice: Vec<Vec<N>>) -> Self {
        Self { owner, choice }
    }

    /// Plays every available move uniformly at random.
    pub fn uniform(game: &ConcurrentGame<N>, owner: Player) -> Self {
        let choice = game
            .states()
            .map(|s| {
                let k = game.num_moves(owner, s);
                vec![N::from_ratio(1, k as i64); k]
            })
            .collect();
        Self { owner, choice }
    }

    /// Pure selector playing local move `picks[s]` at every state.
    pub fn pure(game: &ConcurrentGame<N>, owner: Player, picks: &[usize]) -> Self {
        let choice = game
            .states()
            .map(|s| point_entry(game.num_moves(owner, s), picks[s]))
            .collect();
        Self { owner, choice }
    }

    pub fn owner(&self) -> Player {
        self.owner
    }

    pub fn num_states(&self) -> usize {
        self.choice.len()
    }

    /// Distribution over the owner's local moves at `s`.
    pub fn at(&self, s: StateId) -> &[N] {
        &self.choice[s]
    }

    pub fn set(&mut self, s: StateId, entry: Vec<N>) {
        self.choice[s] = entry;
    }

    /// Local moves played with positive probability at `s`.
    pub fn support(&self, s: StateId) -> Vec<usize> {
        support_of(&self.choice[s])
    }

    pub fn is_pure(&self) -> bool {
        self.choice
            .iter()
            .all(|entry| entry.iter().filter(|p| !p.is_zero()).count() == 1)
    }

    /// Checks the selector against the game's move sets.
    pub fn check(&self, game: &ConcurrentGame<N>) -> Result<()> {
        if self.choice.len() != game.num_states() {
            return Err(Error::InvalidSelector {
                state: String::new(),
                reason: format!(
                    "selector covers {} states, game has {}",
                    self.choice.len(),
                    game.num_states()
                ),
            });
        }
        for s in game.states() {
            check_entry(game, self.owner, s, &self.choice[s])?;
        }
        Ok(())
    }

    pub fn convert<M: Scalar>(&self) -> Selector<M> {
        Selector {
            owner: self.owner,
            choice: self
                .choice
                .iter()
                .map(|e| e.iter().map(|p| M::from_rational(&p.to_rational())).collect())
                .collect(),
        }
    }
}

pub(crate) fn check_entry<N: Scalar>(
    game: &ConcurrentGame<N>,
    owner: Player,
    s: StateId,
    entry: &[N],
) -> Result<()> {
    let invalid = |reason: String| Error::InvalidSelector {
        state: game.state_name(s).to_string(),
        reason,
    };
    let k = game.num_moves(owner, s);
    if entry.len() != k {
        return Err(invalid(format!(
            "distribution over {} moves, {} available",
            entry.len(),
            k
        )));
    }
    if entry.iter().any(|p| *p < N::zero()) {
        return Err(invalid("negative probability".into()));
    }
    let total = entry.iter().fold(N::zero(), |acc, p| acc + p.clone());
    if !total.approx_eq(&N::one(), 1e-9) {
        return Err(invalid(format!("probabilities sum to {}", total.render())));
    }
    Ok(())
}

pub(crate) fn point_entry<N: Scalar>(k: usize, pick: usize) -> Vec<N> {
    (0..k)
        .map(|i| if i == pick { N::one() } else { N::zero() })
        .collect()
}

pub(crate) fn support_of<N: Scalar>(entry: &[N]) -> Vec<usize> {
    entry
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > N::zero())
        .map(|(i, _)| i)
        .collect()
}

pub(crate) fn uniform_entry<N: Scalar>(k: usize, support: &[usize]) -> Vec<N> {
    let p = N::from_ratio(1, support.len() as i64);
    let mut e = vec![N::zero(); k];
    for &i in support {
        e[i] = p.clone();
    }
    e
}
