use crate::error::Result;
use crate::matrix::pre_one_all;
use crate::model::{ConcurrentGame, Objective, ObjectiveKind, Valuation};
use crate::numeric::Scalar;

/// `iters` rounds of value iteration for `objective`.
///
/// Reach: `u_0 = [T]`, `u_{k+1} = max([T], Pre_1(u_k))`, increasing towards
/// the value. Safe: `v_0 = [F]`, `v_{k+1} = min([F], Pre_1(v_k))`,
/// decreasing towards it.
pub fn value_iteration<N: Scalar>(game: &ConcurrentGame<N>, objective: &Objective, iters: usize) -> Result<Valuation<N>> {
    value_iteration_with(game, objective, iters, 1, |_, _| {})
}

/// [`value_iteration`] calling `observe(k, u_k)` after each round. An exact
/// fixpoint ends the loop early since all later rounds would repeat it.
pub fn value_iteration_with<N: Scalar>(
    game: &ConcurrentGame<N>,
    objective: &Objective,
    iters: usize,
    threads: usize,
    mut observe: impl FnMut(usize, &Valuation<N>),
) -> Result<Valuation<N>> {
    let n = game.num_states();
    let mut u = Valuation::indicator(n, &objective.set);
    for k in 1..=iters {
        let pre = pre_one_all(game, &u, threads)?;
        let next = Valuation::new(
            pre.into_iter()
                .enumerate()
                .map(|(s, (x, _))| match (objective.kind, objective.set.contains(&s)) {
                    (ObjectiveKind::Reach, true) => N::one(),
                    (ObjectiveKind::Safe, false) => N::zero(),
                    _ => x,
                })
                .collect(),
        );
        observe(k, &next);
        if next == u {
            break;
        }
        u = next;
    }
    Ok(u)
}
