use crate::error::Result;
use crate::matrix::{counter_optimal, opt_sel_count, pre_one, SupportPair};
use crate::model::{
    destinations_of, support_of, ConcurrentGame, Distribution, Owner, Player, StateId, StateSet,
    TurnBasedGame, Valuation,
};
use crate::numeric::Scalar;
use crate::par::map_indices;

/// What a state of the reduction stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbNode {
    /// A state of the concurrent game, owned by player 1.
    Original(StateId),
    /// Player 2 state `(s, A, B)` for the `pair`-th support pair at `state`.
    Pair { state: StateId, pair: usize },
    /// Random state `(s, A, b)` with `column` the local move `b`.
    Branch { state: StateId, pair: usize, column: usize },
}

impl TbNode {
    pub fn origin(self) -> StateId {
        match self {
            TbNode::Original(s) | TbNode::Pair { state: s, .. } | TbNode::Branch { state: s, .. } => s,
        }
    }
}

/// Turn-based game built from the support pairs of a valuation.
///
/// States `0..n` are the original states; reduction states follow, grouped
/// by original state.
#[derive(Debug, Clone)]
pub struct TbReduction<N> {
    pub game: TurnBasedGame<N>,
    pub safe: StateSet,
    pub back_map: Vec<TbNode>,
    /// Support pairs per original state, indexed as in [`TbNode::Pair`].
    pub pairs: Vec<Vec<SupportPair<N>>>,
}

fn move_set<N: Scalar>(game: &ConcurrentGame<N>, player: Player, s: StateId, moves: &[usize]) -> String {
    let names: Vec<&str> = moves.iter().map(|&m| game.move_name(player, s, m)).collect();
    format!("{{{}}}", names.join(","))
}

/// Support pairs at `s`; if the tolerance-based enumeration finds none, the
/// pair of the LP optimum itself is used.
fn pairs_at<N: Scalar>(
    game: &ConcurrentGame<N>,
    v: &Valuation<N>,
    s: StateId,
    tau: f64,
) -> Result<Vec<SupportPair<N>>> {
    let pairs = opt_sel_count(game, v, s, tau)?;
    if !pairs.is_empty() {
        return Ok(pairs);
    }
    let (_, witness) = pre_one(game, v, s)?;
    let b = counter_optimal(game, v, s, &witness, tau)?;
    Ok(vec![SupportPair {
        a: support_of(&witness),
        b,
        witness,
    }])
}

/// Builds the turn-based reduction of `game` under `v` with safe set `safe`.
pub fn tb_reduction<N: Scalar>(
    game: &ConcurrentGame<N>,
    v: &Valuation<N>,
    safe: &StateSet,
    tau: f64,
    threads: usize,
) -> Result<TbReduction<N>> {
    let n = game.num_states();
    let pairs: Vec<Vec<SupportPair<N>>> = map_indices(n, threads, |s| pairs_at(game, v, s, tau))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut names: Vec<String> = game.state_names().to_vec();
    let mut owner = vec![Owner::Player1; n];
    let mut edges: Vec<Vec<StateId>> = vec![Vec::new(); n];
    let mut dist: Vec<Option<Distribution<N>>> = vec![None; n];
    let mut back_map: Vec<TbNode> = (0..n).map(TbNode::Original).collect();

    for s in 0..n {
        for (k, pair) in pairs[s].iter().enumerate() {
            let a_name = move_set(game, Player::One, s, &pair.a);
            let p = names.len();
            names.push(format!(
                "({},{},{})",
                game.state_name(s),
                a_name,
                move_set(game, Player::Two, s, &pair.b)
            ));
            owner.push(Owner::Player2);
            edges.push(Vec::new());
            dist.push(None);
            back_map.push(TbNode::Pair { state: s, pair: k });
            edges[s].push(p);
            for &b in &pair.b {
                let r = names.len();
                names.push(format!(
                    "({},{},{})",
                    game.state_name(s),
                    a_name,
                    game.move_name(Player::Two, s, b)
                ));
                let targets: Vec<StateId> = destinations_of(game, s, &pair.a, &[b]).into_iter().collect();
                owner.push(Owner::Random);
                dist.push(Some(Distribution::uniform(&targets)));
                edges.push(targets);
                back_map.push(TbNode::Branch {
                    state: s,
                    pair: k,
                    column: b,
                });
                edges[p].push(r);
            }
        }
    }
    let safe_bar = back_map
        .iter()
        .enumerate()
        .filter(|(_, node)| safe.contains(&node.origin()))
        .map(|(i, _)| i)
        .collect();
    Ok(TbReduction {
        game: TurnBasedGame::from_parts(names, owner, edges, dist)?,
        safe: safe_bar,
        back_map,
        pairs,
    })
}
