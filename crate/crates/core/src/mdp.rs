//! Markov chains and MDPs: reachability probabilities, maximal end
//! components, values of fixed selectors and properness.

use std::collections::{BTreeMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::model::{complement, fix_selector, ConcurrentGame, MarkovChain, Mdp, Selector, StateId, StateSet, Valuation};
use crate::numeric::Scalar;

/// Tolerance for recognising an action as tight in a floating-point LP
/// solution.
const TIGHT_TOL: f64 = 1e-9;

/// A closed, strongly connected sub-MDP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndComponent {
    pub states: StateSet,
    /// Actions kept at each state of the component; every one of them stays
    /// inside the component.
    pub actions: BTreeMap<StateId, Vec<usize>>,
}

/// States of `chain` from which `target` is reachable with positive
/// probability.
fn chain_backward(chain: &MarkovChain<impl Scalar>, target: &StateSet) -> Vec<bool> {
    let n = chain.num_states();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in 0..n {
        for t in chain.row(s).support() {
            preds[t].push(s);
        }
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<StateId> = target.iter().copied().collect();
    for &t in target {
        seen[t] = true;
    }
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

/// Probability of eventually reaching `target` in `chain` from every state.
pub fn chain_reach<N: Scalar>(chain: &MarkovChain<N>, target: &StateSet) -> Result<Valuation<N>> {
    let n = chain.num_states();
    let reach = chain_backward(chain, target);
    let unknown: Vec<StateId> = (0..n).filter(|s| reach[*s] && !target.contains(s)).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        index[s] = i;
    }
    let m = unknown.len();
    // (I - P_UU) x = P_UT · 1
    let mut a = vec![vec![N::zero(); m + 1]; m];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] = N::one();
        for (t, p) in chain.row(s).iter() {
            if target.contains(&t) {
                a[i][m] = a[i][m].clone() + p.clone();
            } else if index[t] != usize::MAX {
                a[i][index[t]] = a[i][index[t]].clone() - p.clone();
            }
        }
    }
    let x = gauss_solve(a).ok_or_else(|| Error::Internal("singular reachability system".into()))?;
    let mut values = vec![N::zero(); n];
    for &t in target {
        values[t] = N::one();
    }
    for (i, &s) in unknown.iter().enumerate() {
        values[s] = clamp_unit(x[i].clone());
    }
    Ok(Valuation::new(values))
}

fn clamp_unit<N: Scalar>(x: N) -> N {
    if N::EXACT {
        x
    } else {
        x.max_of(N::zero()).min_of(N::one())
    }
}

/// Solves the square system given as an augmented matrix.
fn gauss_solve<N: Scalar>(mut a: Vec<Vec<N>>) -> Option<Vec<N>> {
    let m = a.len();
    for col in 0..m {
        let pivot = if N::EXACT {
            (col..m).find(|&r| !a[r][col].is_zero())?
        } else {
            let best = (col..m).max_by(|&r1, &r2| {
                a[r1][col]
                    .abs()
                    .partial_cmp(&a[r2][col].abs())
                    .expect("finite entries")
            })?;
            if a[best][col].abs().to_f64() < 1e-14 {
                return None;
            }
            best
        };
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for k in col..=m {
            a[col][k] = a[col][k].clone() / p.clone();
        }
        for r in 0..m {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for k in col..=m {
                let delta = f.clone() * a[col][k].clone();
                a[r][k] = a[r][k].clone() - delta;
            }
        }
    }
    Some(a.into_iter().map(|row| row[m].clone()).collect())
}

/// States from which the decision player can reach `target` with positive
/// probability, and for each such state outside `target` an action that
/// makes progress towards it (attractor layering).
fn positive_reach<N: Scalar>(mdp: &Mdp<N>, target: &StateSet, allowed: impl Fn(StateId, usize) -> bool) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = mdp.num_states();
    let mut inside = vec![false; n];
    for &t in target {
        inside[t] = true;
    }
    let mut pick = vec![None; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            if inside[s] {
                continue;
            }
            if let Some(a) = (0..mdp.num_actions(s))
                .find(|&a| allowed(s, a) && mdp.transition(s, a).support().any(|t| inside[t]))
            {
                inside[s] = true;
                pick[s] = Some(a);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (inside, pick)
}

/// Maximal probability with which the decision player of `mdp` reaches
/// `target`, and a pure memoryless selector attaining it.
pub fn mdp_reach_value<N: Scalar>(mdp: &Mdp<N>, target: &StateSet) -> Result<(Valuation<N>, Selector<N>)> {
    if N::EXACT {
        mdp_reach_policy_iteration(mdp, target)
    } else {
        mdp_reach_lp(mdp, target)
    }
}

fn mdp_reach_lp<N: Scalar>(mdp: &Mdp<N>, target: &StateSet) -> Result<(Valuation<N>, Selector<N>)> {
    let n = mdp.num_states();
    let (positive, _) = positive_reach(mdp, target, |_, _| true);
    let unknown: Vec<StateId> = (0..n).filter(|s| positive[*s] && !target.contains(s)).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        index[s] = i;
    }
    let m = unknown.len();
    let mut values = vec![N::zero(); n];
    for &t in target {
        values[t] = N::one();
    }
    if m > 0 {
        let mut lp = LinearProgram::minimize(vec![N::one(); m]);
        for (i, &s) in unknown.iter().enumerate() {
            for a in 0..mdp.num_actions(s) {
                let mut coeffs = vec![N::zero(); m];
                coeffs[i] = N::one();
                let mut rhs = N::zero();
                for (t, p) in mdp.transition(s, a).iter() {
                    if target.contains(&t) {
                        rhs = rhs + p.clone();
                    } else if index[t] != usize::MAX {
                        coeffs[index[t]] = coeffs[index[t]].clone() - p.clone();
                    }
                }
                lp.constrain(coeffs, Relation::Ge, rhs);
            }
            let mut cap = vec![N::zero(); m];
            cap[i] = N::one();
            lp.constrain(cap, Relation::Le, N::one());
        }
        let (_, x) = lp.solve().optimal().ok_or_else(|| Error::Lp {
            state: String::new(),
            reason: "reachability LP did not reach an optimum".into(),
        })?;
        for (i, &s) in unknown.iter().enumerate() {
            values[s] = clamp_unit(x[i].clone());
        }
    }

    // Witness: among tight actions, walk backwards from the target.
    let tight = |s: StateId, a: usize| {
        mdp.transition(s, a)
            .expectation(&values)
            .approx_eq(&values[s], TIGHT_TOL)
    };
    let (_, layered) = positive_reach(mdp, target, |s, a| positive[s] && tight(s, a));
    let picks: Vec<usize> = (0..n)
        .map(|s| {
            layered[s]
                .or_else(|| (0..mdp.num_actions(s)).find(|&a| tight(s, a)))
                .unwrap_or(0)
        })
        .collect();
    Ok((Valuation::new(values), Selector::pure(mdp.game(), mdp.decider(), &picks)))
}

fn mdp_reach_policy_iteration<N: Scalar>(mdp: &Mdp<N>, target: &StateSet) -> Result<(Valuation<N>, Selector<N>)> {
    let n = mdp.num_states();
    let mut picks = vec![0usize; n];
    loop {
        let values = chain_reach(&mdp.chain_for(&picks), target)?;
        let mut changed = false;
        for s in 0..n {
            if target.contains(&s) {
                continue;
            }
            let current = &values[s];
            let mut best: Option<(usize, N)> = None;
            for a in 0..mdp.num_actions(s) {
                let e = mdp.transition(s, a).expectation(values.values());
                if e > *current && best.as_ref().is_none_or(|(_, b)| e > *b) {
                    best = Some((a, e));
                }
            }
            if let Some((a, _)) = best {
                picks[s] = a;
                changed = true;
            }
        }
        if !changed {
            return Ok((values, Selector::pure(mdp.game(), mdp.decider(), &picks)));
        }
    }
}

/// Maximal end components of `mdp`.
pub fn max_end_components<N: Scalar>(mdp: &Mdp<N>) -> Vec<EndComponent> {
    let all: StateSet = (0..mdp.num_states()).collect();
    max_end_components_within(mdp, &all)
}

/// Maximal end components of the sub-MDP that keeps only `region` and the
/// actions whose successors all lie in it.
pub fn max_end_components_within<N: Scalar>(mdp: &Mdp<N>, region: &StateSet) -> Vec<EndComponent> {
    let n = mdp.num_states();
    let mut alive: Vec<bool> = (0..n).map(|s| region.contains(&s)).collect();
    let mut actions: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            if alive[s] {
                (0..mdp.num_actions(s)).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    loop {
        let mut changed = false;
        // Drop actions that can leave the live region, then dead states.
        loop {
            let mut pruned = false;
            for s in 0..n {
                if !alive[s] {
                    continue;
                }
                let before = actions[s].len();
                actions[s].retain(|&a| mdp.transition(s, a).support().all(|t| alive[t]));
                if actions[s].is_empty() {
                    alive[s] = false;
                    pruned = true;
                } else if actions[s].len() != before {
                    pruned = true;
                }
            }
            if !pruned {
                break;
            }
            changed = true;
        }
        let comp = scc_ids(mdp, &alive, &actions);
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let before = actions[s].len();
            actions[s].retain(|&a| mdp.transition(s, a).support().all(|t| comp[t] == comp[s]));
            if actions[s].len() != before {
                changed = true;
            }
            if actions[s].is_empty() {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            let mut groups: BTreeMap<usize, EndComponent> = BTreeMap::new();
            for s in (0..n).filter(|&s| alive[s]) {
                let ec = groups.entry(comp[s]).or_insert_with(|| EndComponent {
                    states: StateSet::new(),
                    actions: BTreeMap::new(),
                });
                ec.states.insert(s);
                ec.actions.insert(s, actions[s].clone());
            }
            let mut out: Vec<EndComponent> = groups.into_values().collect();
            out.sort_by(|x, y| x.states.first().cmp(&y.states.first()));
            return out;
        }
    }
}

fn scc_ids<N: Scalar>(mdp: &Mdp<N>, alive: &[bool], actions: &[Vec<usize>]) -> Vec<usize> {
    let n = mdp.num_states();
    let mut graph: DiGraph<StateId, ()> = DiGraph::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|s| graph.add_node(s)).collect();
    for s in (0..n).filter(|&s| alive[s]) {
        for &a in &actions[s] {
            for t in mdp.transition(s, a).support() {
                if alive[t] {
                    graph.update_edge(nodes[s], nodes[t], ());
                }
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    for (i, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        for node in scc {
            comp[graph[node]] = i;
        }
    }
    comp
}

/// `1 - (maximal player-2 probability of leaving F)` under the player-1
/// selector `gamma`.
pub fn safety_value_of_selector<N: Scalar>(
    game: &ConcurrentGame<N>,
    gamma: &Selector<N>,
    safe: &StateSet,
) -> Result<Valuation<N>> {
    let mdp = fix_selector(game, gamma)?;
    let (reach, _) = mdp_reach_value(&mdp, &complement(game.num_states(), safe))?;
    Ok(reach.complement())
}

/// Value of `Reach(T)` for player 1 under the proper selector `xi1`, where
/// `w2` is the absorbing value-0 region.
pub fn reach_value_of_selector<N: Scalar>(
    game: &ConcurrentGame<N>,
    xi1: &Selector<N>,
    target: &StateSet,
    w2: &StateSet,
) -> Result<Valuation<N>> {
    let goal: StateSet = target.union(w2).copied().collect();
    let mdp = fix_selector(game, xi1)?;
    if let Some(ec) = improper_component(&mdp, &goal) {
        return Err(Error::NotProper {
            iteration: None,
            component: ec.iter().map(|&s| game.state_name(s).to_string()).collect(),
        });
    }
    let (reach, _) = mdp_reach_value(&mdp, w2)?;
    let mut v = reach.complement();
    for &t in target {
        v.set(t, N::one());
    }
    Ok(v)
}

/// An end component of the player-2 MDP that avoids `goal`, if any.
pub fn improper_component<N: Scalar>(mdp: &Mdp<N>, goal: &StateSet) -> Option<StateSet> {
    let region = complement(mdp.num_states(), goal);
    max_end_components_within(mdp, &region)
        .into_iter()
        .next()
        .map(|ec| ec.states)
}

/// Whether every player-2 strategy reaches `goal` with probability 1 against
/// the player-1 selector `xi1`.
pub fn is_proper<N: Scalar>(game: &ConcurrentGame<N>, xi1: &Selector<N>, goal: &StateSet) -> Result<bool> {
    let mdp = fix_selector(game, xi1)?;
    Ok(improper_component(&mdp, goal).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{Distribution, GameBuilder, Player};
    use crate::numeric::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn chain_one_step_and_geometric() {
        // s -> {t:1/3, d:2/3}; u -> {u:1/2, t:1/2}
        let chain = MarkovChain::new(vec![
            Distribution::from_entries([(1, q(1, 3)), (2, q(2, 3))]),
            Distribution::point(1),
            Distribution::point(2),
            Distribution::from_entries([(3, q(1, 2)), (1, q(1, 2))]),
        ]);
        let v = chain_reach(&chain, &[1].into()).unwrap();
        assert_eq!(v.values(), &[q(1, 3), q(1, 1), q(0, 1), q(1, 1)]);
    }

    fn mdp_two_actions() -> Mdp<Rational> {
        let mut b = GameBuilder::new();
        b.state("s", &["a", "b"], &["_"]);
        b.absorbing("t");
        b.absorbing("dead");
        b.transition("s", "a", "_", &[("t", q(1, 1))]);
        b.transition("s", "b", "_", &[("t", q(1, 2)), ("dead", q(1, 2))]);
        Mdp::new(b.build().unwrap(), Player::One).unwrap()
    }

    #[test]
    fn dominant_action_is_chosen() {
        let mdp = mdp_two_actions();
        let (v, w) = mdp_reach_value(&mdp, &[1].into()).unwrap();
        assert_eq!(v[0], q(1, 1));
        assert_eq!(w.support(0), vec![0]);

        let mdpf = Mdp::new(mdp.game().convert::<f64>(), Player::One).unwrap();
        let (vf, wf) = mdp_reach_value(&mdpf, &[1].into()).unwrap();
        assert!((vf[0] - 1.0).abs() < 1e-12);
        assert_eq!(wf.support(0), vec![0]);
    }

    #[test]
    fn full_target() {
        let mdp = mdp_two_actions();
        let (v, _) = mdp_reach_value(&mdp, &[0, 1, 2].into()).unwrap();
        assert!(v.values().iter().all(|x| *x == q(1, 1)));
    }

    #[test]
    fn policy_iteration_leaves_stalling_loop() {
        // First action loops forever; the second escapes to the target.
        let mut b = GameBuilder::new();
        b.state("s", &["stay", "go"], &["_"]);
        b.absorbing("t");
        b.transition("s", "stay", "_", &[("s", q(1, 1))]);
        b.transition("s", "go", "_", &[("t", q(1, 4)), ("s", q(3, 4))]);
        let mdp = Mdp::new(b.build().unwrap(), Player::One).unwrap();
        let (v, w) = mdp_reach_value(&mdp, &[1].into()).unwrap();
        assert_eq!(v[0], q(1, 1));
        assert_eq!(w.support(0), vec![1]);
        let mdpf = Mdp::new(mdp.game().convert::<f64>(), Player::One).unwrap();
        let (vf, wf) = mdp_reach_value(&mdpf, &[1].into()).unwrap();
        assert!((vf[0] - 1.0).abs() < 1e-9);
        assert_eq!(wf.support(0), vec![1]);
    }

    #[test]
    fn end_components_of_absorbing_states() {
        let mdp = mdp_two_actions();
        let ecs = max_end_components(&mdp);
        let sets: Vec<StateSet> = ecs.iter().map(|e| e.states.clone()).collect();
        assert_eq!(sets, vec![[1].into(), [2].into()]);
        assert_eq!(ecs[0].actions[&1], vec![0]);
    }

    #[test]
    fn hide_selector_values() {
        let g = fixtures::hide::<Rational>();
        let safe = g.state_set(&["home", "field"]).unwrap();
        let v = safety_value_of_selector(&g, &Selector::uniform(&g, Player::One), &safe).unwrap();
        assert_eq!(v.values(), &[q(1, 1), q(1, 2), q(0, 1)]);
        let all: StateSet = g.states().collect();
        let v = safety_value_of_selector(&g, &Selector::uniform(&g, Player::One), &all).unwrap();
        assert!(v.values().iter().all(|x| *x == q(1, 1)));
    }

    #[test]
    fn hide_reach_value_and_properness() {
        let g = fixtures::hide::<Rational>();
        let target = g.state_set(&["home"]).unwrap();
        let w2 = g.state_set(&["caught"]).unwrap();
        let uni = Selector::uniform(&g, Player::One);
        assert!(is_proper(&g, &uni, &target.union(&w2).copied().collect()).unwrap());
        let v = reach_value_of_selector(&g, &uni, &target, &w2).unwrap();
        assert_eq!(v.values(), &[q(1, 1), q(1, 2), q(0, 1)]);
    }

    #[test]
    fn cycle_avoiding_goal_is_improper() {
        let mut b = GameBuilder::new();
        b.state("a", &["_"], &["x", "y"]);
        b.state("b", &["_"], &["x"]);
        b.absorbing("t");
        b.transition("a", "_", "x", &[("b", q(1, 1))]);
        b.transition("a", "_", "y", &[("t", q(1, 1))]);
        b.transition("b", "_", "x", &[("a", q(1, 1))]);
        let g = b.build().unwrap();
        let xi = Selector::uniform(&g, Player::One);
        assert!(!is_proper(&g, &xi, &[2].into()).unwrap());
        assert!(is_proper(&g, &xi, &[0, 1, 2].into()).unwrap());
        assert!(matches!(
            reach_value_of_selector(&g, &xi, &[2].into(), &StateSet::new()),
            Err(Error::NotProper { .. })
        ));
    }
}
