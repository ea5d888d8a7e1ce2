//! Small named games used by the test suites, the CLI examples and the docs.
//!
//! The same games ship as JSON under `crates/core/fixtures/`.

use crate::model::{ConcurrentGame, Distribution, GameBuilder, Owner, TurnBasedGame};
use crate::numeric::Scalar;

/// Three-state matching game.
///
/// At `field` player 1 hides left or right (`l`, `r`) while player 2 searches
/// (`L`, `R`); a match sends the play to `caught`, a miss to `home`. Both
/// `home` and `caught` are absorbing. Staying in `{home, field}` has value
/// 1/2 from `field`.
pub fn hide<N: Scalar>() -> ConcurrentGame<N> {
    let one = N::one();
    let mut b = GameBuilder::new();
    b.absorbing("home");
    b.state("field", &["l", "r"], &["L", "R"]);
    b.absorbing("caught");
    b.transition("field", "l", "L", &[("caught", one.clone())]);
    b.transition("field", "l", "R", &[("home", one.clone())]);
    b.transition("field", "r", "L", &[("home", one.clone())]);
    b.transition("field", "r", "R", &[("caught", one)]);
    b.build().expect("hide fixture is well formed")
}

/// Turn-based safety game where valuation-based improvement stalls.
///
/// Player 1 at `s0` moves to `s1` or `s2`; player 2 at `s1` moves back to
/// `s0` or on to `s3`. `s2` reaches the safe sink `s4` with probability 1/3
/// and the unsafe sink `s6` otherwise; `s3` reaches the safe sink `s5` with
/// probability 2/3 and `s6` otherwise. The objective is to avoid `s6`.
///
/// Under `s0 -> s2` the states `s0`, `s1`, `s2` all have value 1/3 and no
/// successor of `s0` is better, yet `s0 -> s1` guarantees 2/3: player 2 must
/// then leave the `s0`/`s1` cycle through `s3`.
pub fn cycle_trap<N: Scalar>() -> TurnBasedGame<N> {
    let names = ["s0", "s1", "s2", "s3", "s4", "s5", "s6"];
    let owner = vec![
        Owner::Player1,
        Owner::Player2,
        Owner::Random,
        Owner::Random,
        Owner::Player1,
        Owner::Player1,
        Owner::Player1,
    ];
    let edges = vec![vec![1, 2], vec![0, 3], vec![4, 6], vec![5, 6], vec![4], vec![5], vec![6]];
    let dist = vec![
        None,
        None,
        Some(Distribution::from_entries([
            (4, N::from_ratio(1, 3)),
            (6, N::from_ratio(2, 3)),
        ])),
        Some(Distribution::from_entries([
            (5, N::from_ratio(2, 3)),
            (6, N::from_ratio(1, 3)),
        ])),
        None,
        None,
        None,
    ];
    TurnBasedGame::new(names.iter().map(|s| s.to_string()).collect(), owner, edges, dist)
        .expect("cycle trap fixture is well formed")
}

/// Binary turn-based reachability game with three random states.
///
/// `p` (player 1) chooses between the coins `c1` and `c2`; `c1` splits evenly
/// between the goal `t` and the player-2 state `q`, which chooses between
/// `p` and the coin `c3`; `c2` splits evenly between `t` and the sink `d`;
/// `c3` splits evenly between `t` and `d`.
pub fn binary_chain<N: Scalar>() -> TurnBasedGame<N> {
    let names = ["p", "q", "c1", "c2", "c3", "t", "d"];
    let half = || N::from_ratio(1, 2);
    let owner = vec![
        Owner::Player1,
        Owner::Player2,
        Owner::Random,
        Owner::Random,
        Owner::Random,
        Owner::Player1,
        Owner::Player1,
    ];
    let edges = vec![vec![2, 3], vec![0, 4], vec![5, 1], vec![5, 6], vec![5, 6], vec![5], vec![6]];
    let dist = vec![
        None,
        None,
        Some(Distribution::from_entries([(5, half()), (1, half())])),
        Some(Distribution::from_entries([(5, half()), (6, half())])),
        Some(Distribution::from_entries([(5, half()), (6, half())])),
        None,
        None,
    ];
    TurnBasedGame::new(names.iter().map(|s| s.to_string()).collect(), owner, edges, dist)
        .expect("binary chain fixture is well formed")
}
