//! Probability-one analyses: attractors, almost-sure safety in turn-based
//! and concurrent games, and the reachability value-0 set.

use std::collections::BTreeMap;

use crate::model::{complement, ConcurrentGame, Owner, Player, StateId, StateSet, TurnBasedGame};
use crate::numeric::Scalar;

/// A winning region with a witness.
///
/// For turn-based analyses the witness maps every winning state of the
/// player to a one-element list holding the chosen successor. For
/// concurrent analyses it maps every winning state to the support (local
/// move indices) of a winning selector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualitativeResult {
    pub winning: StateSet,
    pub witness: BTreeMap<StateId, Vec<usize>>,
}

/// A player's positive attractor to `target` with its pure attractor
/// selector (chosen successor per newly added state of the player).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attractor {
    pub set: StateSet,
    pub choice: BTreeMap<StateId, StateId>,
}

fn owned_by(owner: Owner, player: Player) -> bool {
    matches!(
        (owner, player),
        (Owner::Player1, Player::One) | (Owner::Player2, Player::Two)
    )
}

/// Least fixpoint of the layered attractor recurrence: states of `player`
/// and random states join once some successor is in the previous layer,
/// opponent states once all successors are.
pub fn attractor_tb<N: Scalar>(game: &TurnBasedGame<N>, player: Player, target: &StateSet) -> Attractor {
    let mut inside: Vec<bool> = game.states().map(|s| target.contains(&s)).collect();
    let mut choice = BTreeMap::new();
    loop {
        let layer: Vec<(StateId, Option<StateId>)> = game
            .states()
            .filter(|&s| !inside[s])
            .filter_map(|s| {
                let succ = game.successors(s);
                match game.owner(s) {
                    o if owned_by(o, player) => succ.iter().find(|&&t| inside[t]).map(|&t| (s, Some(t))),
                    Owner::Random => succ.iter().any(|&t| inside[t]).then_some((s, None)),
                    _ => succ.iter().all(|&t| inside[t]).then_some((s, None)),
                }
            })
            .collect();
        if layer.is_empty() {
            break;
        }
        for (s, pick) in layer {
            inside[s] = true;
            if let Some(t) = pick {
                choice.insert(s, t);
            }
        }
    }
    Attractor {
        set: game.states().filter(|&s| inside[s]).collect(),
        choice,
    }
}

/// States from which `player` keeps the play inside `safe` forever with
/// probability 1: the complement of the opponent's positive attractor to
/// the unsafe states.
pub fn almost_sure_safe_tb<N: Scalar>(game: &TurnBasedGame<N>, player: Player, safe: &StateSet) -> QualitativeResult {
    let unsafe_states = complement(game.num_states(), safe);
    let losing = attractor_tb(game, player.opponent(), &unsafe_states).set;
    let winning = complement(game.num_states(), &losing);
    let witness = winning
        .iter()
        .filter(|&&s| owned_by(game.owner(s), player))
        .filter_map(|&s| {
            game.successors(s)
                .iter()
                .find(|t| winning.contains(t))
                .map(|&t| (s, vec![t]))
        })
        .collect();
    QualitativeResult { winning, witness }
}

/// Local moves of `player` at `s` that keep every successor inside `region`
/// whatever the opponent plays.
fn staying_moves<N: Scalar>(game: &ConcurrentGame<N>, player: Player, s: StateId, region: &[bool]) -> Vec<usize> {
    let own = game.num_moves(player, s);
    let other = game.num_moves(player.opponent(), s);
    (0..own)
        .filter(|&m| {
            (0..other).all(|o| {
                let (a, b) = match player {
                    Player::One => (m, o),
                    Player::Two => (o, m),
                };
                game.dest(s, a, b).all(|t| region[t])
            })
        })
        .collect()
}

/// States where `player` wins `Safe(safe)` with probability 1 in a
/// concurrent game, with the support of a winning selector at each.
pub fn almost_sure_safe_concurrent<N: Scalar>(
    game: &ConcurrentGame<N>,
    player: Player,
    safe: &StateSet,
) -> QualitativeResult {
    let mut region: Vec<bool> = game.states().map(|s| safe.contains(&s)).collect();
    loop {
        let mut removed = false;
        for s in game.states() {
            if region[s] && staying_moves(game, player, s, &region).is_empty() {
                region[s] = false;
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }
    let winning: StateSet = game.states().filter(|&s| region[s]).collect();
    let witness = winning
        .iter()
        .map(|&s| (s, staying_moves(game, player, s, &region)))
        .collect();
    QualitativeResult { winning, witness }
}

/// States where player 1 cannot reach `target` with positive probability
/// (value 0), that is where player 2 keeps out of `target` almost surely.
pub fn reach_value_zero_set<N: Scalar>(game: &ConcurrentGame<N>, target: &StateSet) -> QualitativeResult {
    almost_sure_safe_concurrent(game, Player::Two, &complement(game.num_states(), target))
}
