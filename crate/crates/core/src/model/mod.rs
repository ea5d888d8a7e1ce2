//! Game graphs, objectives, valuations and selectors, and the constructions
//! that fix selectors to obtain MDPs and Markov chains.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Scalar;

mod concurrent;
mod distribution;
mod selector;
mod turn_based;

pub use concurrent::{ConcurrentGame, Diagnostic, GameBuilder, DUMMY_MOVE};
pub use distribution::Distribution;
pub use selector::{Selector, Valuation};
pub use turn_based::{Owner, TurnBasedGame};

pub(crate) use selector::{check_entry, point_entry, support_of, uniform_entry};

/// Dense state index, assigned in declaration order.
pub type StateId = usize;

pub type StateSet = BTreeSet<StateId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::One => f.write_str("player 1"),
            Player::Two => f.write_str("player 2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// Never leave the set.
    Safe,
    /// Eventually visit the set.
    Reach,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub set: StateSet,
}

impl Objective {
    pub fn safe(set: StateSet) -> Self {
        Self {
            kind: ObjectiveKind::Safe,
            set,
        }
    }

    pub fn reach(set: StateSet) -> Self {
        Self {
            kind: ObjectiveKind::Reach,
            set,
        }
    }
}

/// Either kind of game, as read from a game file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyGame<N> {
    Concurrent(ConcurrentGame<N>),
    TurnBased(TurnBasedGame<N>),
}

impl<N: Scalar> AnyGame<N> {
    /// The game in concurrent form (turn-based games are encoded).
    pub fn to_concurrent(&self) -> ConcurrentGame<N> {
        match self {
            AnyGame::Concurrent(g) => g.clone(),
            AnyGame::TurnBased(g) => g.to_concurrent(),
        }
    }

    pub fn state_names(&self) -> &[String] {
        match self {
            AnyGame::Concurrent(g) => g.state_names(),
            AnyGame::TurnBased(g) => g.state_names(),
        }
    }

    pub fn state_set<S: AsRef<str>>(&self, names: &[S]) -> Result<StateSet> {
        match self {
            AnyGame::Concurrent(g) => g.state_set(names),
            AnyGame::TurnBased(g) => g.state_set(names),
        }
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        match self {
            AnyGame::Concurrent(g) => g.validate(),
            AnyGame::TurnBased(g) => g.validate(),
        }
    }

    pub fn convert<M: Scalar>(&self) -> AnyGame<M> {
        match self {
            AnyGame::Concurrent(g) => AnyGame::Concurrent(g.convert()),
            AnyGame::TurnBased(g) => AnyGame::TurnBased(g.convert()),
        }
    }
}

/// Complement of `set` within `0..n`.
pub fn complement(n: usize, set: &StateSet) -> StateSet {
    (0..n).filter(|s| !set.contains(s)).collect()
}

/// A concurrent game in which one player has a single move everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp<N> {
    game: ConcurrentGame<N>,
    decider: Player,
}

impl<N: Scalar> Mdp<N> {
    pub fn new(game: ConcurrentGame<N>, decider: Player) -> Result<Self> {
        if let Some(s) = game
            .states()
            .find(|&s| game.num_moves(decider.opponent(), s) != 1)
        {
            return Err(Error::Precondition(format!(
                "{} has several moves at `{}`; not an MDP for {}",
                decider.opponent(),
                game.state_name(s),
                decider
            )));
        }
        Ok(Self { game, decider })
    }

    /// Player that still makes choices.
    pub fn decider(&self) -> Player {
        self.decider
    }

    pub fn game(&self) -> &ConcurrentGame<N> {
        &self.game
    }

    pub fn num_states(&self) -> usize {
        self.game.num_states()
    }

    pub fn num_actions(&self, s: StateId) -> usize {
        self.game.num_moves(self.decider, s)
    }

    pub fn transition(&self, s: StateId, a: usize) -> &Distribution<N> {
        match self.decider {
            Player::One => self.game.transition(s, a, 0),
            Player::Two => self.game.transition(s, 0, a),
        }
    }

    /// Markov chain induced by a pure choice of action per state.
    pub fn chain_for(&self, picks: &[usize]) -> MarkovChain<N> {
        MarkovChain::new(
            self.game
                .states()
                .map(|s| self.transition(s, picks[s]).clone())
                .collect(),
        )
    }
}

/// Finite Markov chain: one successor distribution per state.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain<N> {
    rows: Vec<Distribution<N>>,
}

impl<N: Scalar> MarkovChain<N> {
    pub fn new(rows: Vec<Distribution<N>>) -> Self {
        Self { rows }
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, s: StateId) -> &Distribution<N> {
        &self.rows[s]
    }

    pub fn rows(&self) -> &[Distribution<N>] {
        &self.rows
    }
}

/// Makes every state of `set` absorbing: it keeps only its first move for
/// each player and loops to itself with probability 1.
pub fn make_absorbing<N: Scalar>(game: &ConcurrentGame<N>, set: &StateSet) -> Result<ConcurrentGame<N>> {
    if let Some(&bad) = set.iter().find(|&&s| s >= game.num_states()) {
        return Err(Error::UnknownState(format!("#{bad}")));
    }
    let mut out = game.clone();
    let (moves1, moves2, delta) = out.parts_mut();
    for &s in set {
        moves1[s].truncate(1);
        moves2[s].truncate(1);
        delta[s] = vec![vec![Distribution::point(s)]];
    }
    Ok(out)
}

/// Fixes `selector` in `game`, leaving an MDP for the other player.
///
/// The transition of the remaining move `b` at `s` is the mixture
/// `Σ_a δ(s,a,b)·ξ(s)(a)`.
pub fn fix_selector<N: Scalar>(game: &ConcurrentGame<N>, selector: &Selector<N>) -> Result<Mdp<N>> {
    selector.check(game)?;
    let fixed = selector.owner();
    let mut out = game.clone();
    let dummy = out.dummy_move_index();
    let (moves1, moves2, delta) = out.parts_mut();
    for s in game.states() {
        let weights = selector.at(s);
        match fixed {
            Player::One => {
                let row = (0..game.num_moves(Player::Two, s))
                    .map(|b| {
                        Distribution::mix(
                            weights
                                .iter()
                                .enumerate()
                                .map(|(a, w)| (w.clone(), game.transition(s, a, b))),
                        )
                    })
                    .collect();
                moves1[s] = vec![dummy];
                delta[s] = vec![row];
            }
            Player::Two => {
                let rows = (0..game.num_moves(Player::One, s))
                    .map(|a| {
                        vec![Distribution::mix(
                            weights
                                .iter()
                                .enumerate()
                                .map(|(b, w)| (w.clone(), game.transition(s, a, b))),
                        )]
                    })
                    .collect();
                moves2[s] = vec![dummy];
                delta[s] = rows;
            }
        }
    }
    Mdp::new(out, fixed.opponent())
}

/// Markov chain obtained by fixing a selector for each player.
pub fn fix_both<N: Scalar>(
    game: &ConcurrentGame<N>,
    xi1: &Selector<N>,
    xi2: &Selector<N>,
) -> Result<MarkovChain<N>> {
    if xi1.owner() != Player::One || xi2.owner() != Player::Two {
        return Err(Error::Precondition(
            "fix_both expects a player-1 and a player-2 selector".into(),
        ));
    }
    xi1.check(game)?;
    xi2.check(game)?;
    let rows = game
        .states()
        .map(|s| {
            let parts = xi1.at(s).iter().enumerate().flat_map(|(a, pa)| {
                xi2.at(s).iter().enumerate().map(move |(b, pb)| {
                    (pa.clone() * pb.clone(), game.transition(s, a, b))
                })
            });
            Distribution::mix(parts.collect::<Vec<_>>())
        })
        .collect();
    Ok(MarkovChain::new(rows))
}

/// `Dest(s, A, B)`: successors of `s` reachable with positive probability
/// when player 1 plays within local moves `a_set` and player 2 within `b_set`.
pub fn destinations_of<N: Scalar>(
    game: &ConcurrentGame<N>,
    s: StateId,
    a_set: &[usize],
    b_set: &[usize],
) -> StateSet {
    a_set
        .iter()
        .flat_map(|&a| b_set.iter().flat_map(move |&b| game.dest(s, a, b)))
        .collect()
}

/// `Dest(s, ξ1, ξ2)`.
pub fn destinations<N: Scalar>(
    game: &ConcurrentGame<N>,
    s: StateId,
    xi1: &Selector<N>,
    xi2: &Selector<N>,
) -> Result<StateSet> {
    check_entry(game, Player::One, s, xi1.at(s))?;
    check_entry(game, Player::Two, s, xi2.at(s))?;
    Ok(destinations_of(game, s, &xi1.support(s), &xi2.support(s)))
}

/// Value class `U_r(v)`: states whose value equals `r` (within `tau` for
/// inexact backends).
pub fn value_class<N: Scalar>(v: &Valuation<N>, r: &N, tau: f64) -> StateSet {
    (0..v.len()).filter(|&s| v[s].approx_eq(r, tau)).collect()
}

/// Distinct values of `v`, in increasing order, merging values within `tau`.
pub fn distinct_values<N: Scalar>(v: &Valuation<N>, tau: f64) -> Vec<N> {
    let mut vals: Vec<N> = v.values().to_vec();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("valuations are comparable"));
    let mut out: Vec<N> = Vec::new();
    for x in vals {
        if out.last().is_none_or(|last| !x.approx_eq(last, tau)) {
            out.push(x);
        }
    }
    out
}

/// Number of states where `v` is nonzero.
pub fn support_size<N: Scalar>(v: &Valuation<N>) -> usize {
    v.values().iter().filter(|x| !x.is_zero()).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::numeric::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn two_state() -> ConcurrentGame<Rational> {
        let mut b = GameBuilder::new();
        b.state("s", &["a", "b"], &["x"]);
        b.absorbing("t");
        b.transition("s", "a", "x", &[("t", q(1, 1))]);
        b.transition("s", "b", "x", &[("s", q(1, 1))]);
        b.build().unwrap()
    }

    #[test]
    fn well_formed_game_has_no_diagnostics() {
        assert!(two_state().validate().is_empty());
        assert!(fixtures::hide::<Rational>().validate().is_empty());
    }

    #[test]
    fn short_distribution_is_reported() {
        let mut b = GameBuilder::new();
        b.state("s", &["a"], &["x"]);
        b.transition("s", "a", "x", &[("s", q(9, 10))]);
        let (_, diags) = b.finish().unwrap();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].reason.contains("distribution sum"));
    }

    #[test]
    fn missing_transition_is_reported() {
        let mut b = GameBuilder::new();
        b.state("s", &["a", "b"], &["x"]);
        b.transition("s", "a", "x", &[("s", q(1, 1))]);
        let (_, diags) = b.finish().unwrap();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].reason, "missing transition");
    }

    #[test]
    fn successorless_turn_based_state_is_reported() {
        let g = TurnBasedGame::<Rational>::from_parts(
            vec!["a".into(), "b".into()],
            vec![Owner::Player1, Owner::Player2],
            vec![vec![1], vec![]],
            vec![None, None],
        )
        .unwrap();
        let diags = g.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].reason, "no outgoing edge");
        assert_eq!(diags[0].state, "b");
    }

    #[test]
    fn absorbing_empty_set_is_identity() {
        let g = fixtures::hide::<Rational>();
        assert_eq!(make_absorbing(&g, &StateSet::new()).unwrap(), g);
    }

    #[test]
    fn absorbing_collapses_moves() {
        let g = fixtures::hide::<Rational>();
        let field = g.state_index("field").unwrap();
        let a = make_absorbing(&g, &[field].into()).unwrap();
        assert_eq!(a.num_moves(Player::One, field), 1);
        assert_eq!(a.num_moves(Player::Two, field), 1);
        assert_eq!(a.transition(field, 0, 0), &Distribution::point(field));
        assert!(a.is_absorbing(field));
        assert_eq!(make_absorbing(&a, &[field].into()).unwrap(), a);
    }

    #[test]
    fn absorbing_rejects_unknown_state() {
        let g = two_state();
        assert!(matches!(
            make_absorbing(&g, &[7].into()),
            Err(Error::UnknownState(_))
        ));
    }

    #[test]
    fn uniform_selector_averages_rows() {
        let g = two_state();
        let mdp = fix_selector(&g, &Selector::uniform(&g, Player::One)).unwrap();
        assert_eq!(mdp.decider(), Player::Two);
        assert_eq!(
            mdp.transition(0, 0),
            &Distribution::from_entries([(0, q(1, 2)), (1, q(1, 2))])
        );
    }

    #[test]
    fn pure_selector_picks_row() {
        let g = two_state();
        let mdp = fix_selector(&g, &Selector::pure(&g, Player::One, &[0, 0])).unwrap();
        assert_eq!(mdp.transition(0, 0), &Distribution::point(1));
    }

    #[test]
    fn hide_uniform_mdp() {
        let g = fixtures::hide::<Rational>();
        let field = g.state_index("field").unwrap();
        let home = g.state_index("home").unwrap();
        let caught = g.state_index("caught").unwrap();
        let mdp = fix_selector(&g, &Selector::uniform(&g, Player::One)).unwrap();
        let expected = Distribution::from_entries([(home, q(1, 2)), (caught, q(1, 2))]);
        assert_eq!(mdp.num_actions(field), 2);
        assert_eq!(mdp.transition(field, 0), &expected);
        assert_eq!(mdp.transition(field, 1), &expected);

        let chain = fix_both(
            &g,
            &Selector::uniform(&g, Player::One),
            &Selector::uniform(&g, Player::Two),
        )
        .unwrap();
        assert_eq!(chain.row(field), &expected);
    }

    #[test]
    fn invalid_selector_is_rejected() {
        let g = two_state();
        let bad = Selector::new(Player::One, vec![vec![q(1, 1)], vec![q(1, 1)]]);
        assert!(matches!(
            fix_selector(&g, &bad),
            Err(Error::InvalidSelector { .. })
        ));
        let bad_sum = Selector::new(Player::One, vec![vec![q(1, 2), q(1, 4)], vec![q(1, 1)]]);
        assert!(fix_selector(&g, &bad_sum).is_err());
    }

    #[test]
    fn destinations_of_selectors() {
        let g = fixtures::hide::<Rational>();
        let field = g.state_index("field").unwrap();
        let xi1 = Selector::pure(&g, Player::One, &[0, 0, 0]);
        let xi2 = Selector::pure(&g, Player::Two, &[0, 0, 0]);
        assert_eq!(destinations(&g, field, &xi1, &xi2).unwrap().len(), 1);
        let all = destinations(
            &g,
            field,
            &Selector::uniform(&g, Player::One),
            &Selector::uniform(&g, Player::Two),
        )
        .unwrap();
        assert_eq!(all, g.state_set(&["home", "caught"]).unwrap());
    }

    #[test]
    fn value_classes() {
        let v = Valuation::new(vec![q(1, 2); 3]);
        assert_eq!(value_class(&v, &q(1, 2), 0.0).len(), 3);
        assert!(value_class(&v, &q(1, 3), 0.0).is_empty());
        let t: StateSet = [0, 2].into();
        let ind = Valuation::<Rational>::indicator(3, &t);
        assert_eq!(value_class(&ind, &q(1, 1), 0.0), t);
        assert_eq!(value_class(&ind, &q(0, 1), 0.0), [1].into());
    }

    #[test]
    fn swap_players_transposes() {
        let g = fixtures::hide::<Rational>();
        let sw = g.swap_players();
        let field = g.state_index("field").unwrap();
        assert_eq!(sw.transition(field, 1, 0), g.transition(field, 0, 1));
        assert_eq!(sw.swap_players(), g);
    }

    #[test]
    fn turn_based_encoding() {
        let tb = fixtures::cycle_trap::<Rational>();
        assert!(tb.validate().is_empty());
        let g = tb.to_concurrent();
        assert!(g.validate().is_empty());
        let s0 = g.state_index("s0").unwrap();
        let s1 = g.state_index("s1").unwrap();
        assert_eq!(g.num_moves(Player::One, s0), 2);
        assert_eq!(g.num_moves(Player::Two, s0), 1);
        assert_eq!(g.num_moves(Player::One, s1), 1);
        assert_eq!(g.num_moves(Player::Two, s1), 2);
        assert_eq!(g.move_name(Player::One, s0, 0), "s1");
    }
}
