//! One-shot zero-sum matrix games induced by a valuation at a state.
//!
//! At state `s` and valuation `v` the row player (player 1) and the column
//! player (player 2) play the matrix `M[a][b] = Σ_t v(t)·δ(s,a,b)(t)`. Its
//! value is `Pre_1(v)(s)`, the best expectation of `v` player 1 can
//! guarantee in one step.


use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::model::{check_entry, point_entry, support_of, ConcurrentGame, Player, Selector, StateId, Valuation};
use crate::numeric::Scalar;

/// Lower bound used for "strictly positive" probabilities and margins when
/// the backend is inexact.
pub const POSITIVITY_FLOOR: f64 = 1e-9;

/// Largest `|Γ1(s)| + |Γ2(s)|` for which support pairs are enumerated.
pub const ENUMERATION_LIMIT: usize = 24;

/// A support `A` of an optimal selector together with the exact set `B` of
/// counter-optimal actions against a witness selector with that support.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPair<N> {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub witness: Vec<N>,
}

/// Value and an optimal row strategy of the matrix game `payoff`
/// (row player maximises).
///
/// Returns `None` only if the LP fails, which cannot happen for finite
/// payoffs.
pub fn solve_matrix_game<N: Scalar>(payoff: &[Vec<N>]) -> Option<(N, Vec<N>)> {
    let rows = payoff.len();
    let cols = payoff.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return None;
    }
    if cols == 1 {
        let best = argmax((0..rows).map(|a| &payoff[a][0]));
        return Some((payoff[best][0].clone(), point_entry(rows, best)));
    }
    if rows == 1 {
        let worst = payoff[0]
            .iter()
            .cloned()
            .reduce(Scalar::min_of)
            .expect("nonempty row");
        return Some((worst, vec![N::one()]));
    }

    // Pure saddle point: maximin == minimax.
    let row_mins: Vec<N> = payoff
        .iter()
        .map(|r| r.iter().cloned().reduce(Scalar::min_of).expect("nonempty row"))
        .collect();
    let best_row = argmax(row_mins.iter());
    let col_maxes: Vec<N> = (0..cols)
        .map(|b| {
            (0..rows)
                .map(|a| payoff[a][b].clone())
                .reduce(Scalar::max_of)
                .expect("nonempty column")
        })
        .collect();
    let minimax = col_maxes.iter().cloned().reduce(Scalar::min_of).expect("nonempty");
    if row_mins[best_row] == minimax {
        return Some((minimax, point_entry(rows, best_row)));
    }

    // max z  s.t.  Σ_a ξ_a (M[a][b] - shift) / scale ≥ z  ∀b,  Σ ξ = 1,  ξ, z ≥ 0.
    let scale = payoff
        .iter()
        .flatten()
        .cloned()
        .reduce(Scalar::max_of)
        .expect("nonempty matrix");
    let shift = payoff
        .iter()
        .flatten()
        .cloned()
        .reduce(Scalar::min_of)
        .expect("nonempty matrix");
    let scale = scale - shift.clone();
    let z = rows;
    let mut objective = vec![N::zero(); rows + 1];
    objective[z] = N::one();
    let mut lp = LinearProgram::maximize(objective);
    for b in 0..cols {
        let mut coeffs: Vec<N> = (0..rows)
            .map(|a| (payoff[a][b].clone() - shift.clone()) / scale.clone())
            .collect();
        coeffs.push(-N::one());
        lp.constrain(coeffs, Relation::Ge, N::zero());
    }
    lp.constrain(vec![N::one(); rows], Relation::Eq, N::one());
    let (_, x) = lp.solve().optimal()?;
    let mix: Vec<N> = x[..rows].to_vec();
    let mix = normalise(mix);
    // Evaluate the value from the mix itself so that value and selector agree.
    let value = (0..cols)
        .map(|b| column_payoff(payoff, &mix, b))
        .reduce(Scalar::min_of)
        .expect("nonempty");
    Some((value, mix))
}

fn argmax<'a, N: Scalar>(items: impl Iterator<Item = &'a N>) -> usize {
    let mut best: Option<(usize, &N)> = None;
    for (i, x) in items.enumerate() {
        if best.is_none_or(|(_, b)| x > b) {
            best = Some((i, x));
        }
    }
    best.map(|(i, _)| i).unwrap_or(0)
}

fn normalise<N: Scalar>(mut mix: Vec<N>) -> Vec<N> {
    if N::EXACT {
        return mix;
    }
    for p in mix.iter_mut() {
        if *p < N::zero() {
            *p = N::zero();
        }
    }
    let total = mix.iter().fold(N::zero(), |acc, p| acc + p.clone());
    if !total.is_zero() {
        for p in mix.iter_mut() {
            *p = p.clone() / total.clone();
        }
    }
    mix
}

fn column_payoff<N: Scalar>(payoff: &[Vec<N>], mix: &[N], b: usize) -> N {
    mix.iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .fold(N::zero(), |acc, (a, p)| acc + p.clone() * payoff[a][b].clone())
}

/// `Pre_{ξ1,ξ2}(v)(s)`.
pub fn pre_pair<N: Scalar>(
    game: &ConcurrentGame<N>,
    v: &Valuation<N>,
    s: StateId,
    xi1: &Selector<N>,
    xi2: &Selector<N>,
) -> Result<N> {
    check_entry(game, Player::One, s, xi1.at(s))?;
    check_entry(game, Player::Two, s, xi2.at(s))?;
    let mut total = N::zero();
    for (a, pa) in xi1.at(s).iter().enumerate() {
        if pa.is_zero() {
            continue;
        }
        for (b, pb) in xi2.at(s).iter().enumerate() {
            if pb.is_zero() {
                continue;
            }
            let e = game.transition(s, a, b).expectation(v.values());
            total = total + pa.clone() * pb.clone() * e;
        }
    }
    Ok(total)
}

/// `Pre_{1:ξ1}(v)(s)`: the worst column against the mixed row `entry`.
pub fn pre_one_sel<N: Scalar>(
    game: &ConcurrentGame<N>,
    v: &Valuation<N>,
    s: StateId,
    entry: &[N],
) -> Result<N> {
    check_entry(game, Player::One, s, entry)?;
    let payoff = game.payoff_matrix(s, v.values());
    Ok((0..payoff[0].len())
        .map(|b| column_payoff(&payoff, entry, b))
        .reduce(Scalar::min_of)
        .expect("nonempty move set"))
}

/// `Pre_1(v)(s)` together with an optimal selector entry at `s`.
pub fn pre_one<N: Scalar>(game: &ConcurrentGame<N>, v: &Valuation<N>, s: StateId) -> Result<(N, Vec<N>)> {
    let payoff = game.payoff_matrix(s, v.values());
    solve_matrix_game(&payoff).ok_or_else(|| Error::Lp {
        state: game.state_name(s).to_string(),
        reason: "matrix game LP did not reach an optimum".into(),
    })
}

/// `Pre_1(v)` at every state.
pub fn pre_one_valuation<N: Scalar>(game: &ConcurrentGame<N>, v: &Valuation<N>) -> Result<Valuation<N>> {
    Ok(Valuation::new(
        pre_one_all(game, v, 1)?.into_iter().map(|(x, _)| x).collect(),
    ))
}

/// [`pre_one`] at every state, spread over up to `threads` worker threads.
/// Results are in state order regardless of `threads`.
pub fn pre_one_all<N: Scalar>(
    game: &ConcurrentGame<N>,
    v: &Valuation<N>,
    threads: usize,
) -> Result<Vec<(N, Vec<N>)>> {
    crate::par::map_indices(game.num_states(), threads, |s| pre_one(game, v, s))
        .into_iter()
        .collect()
}

fn floor<N: Scalar>() -> N {
    if N::EXACT {
        N::zero()
    } else {
        N::from_rational(&POSITIVITY_FLOOR.to_rational())
    }
}

fn tol<N: Scalar>(tau: f64) -> N {
    if N::EXACT {
        N::zero()
    } else {
        N::from_rational(&tau.to_rational())
    }
}

/// Searches an optimal selector entry at `s` whose support is exactly `a_set`
/// (local moves of player 1), maximising its smallest probability.
pub fn opt_sel_with_support<N: Scalar>(
    game: &ConcurrentGame<N>,
    v: &Valuation<N>,
    s: StateId,
    a_set: &[usize],
    tau: f64,
) -> Result<Option<Vec<N>>> {
    let (value, _) = pre_one(game, v, s)?;
    let payoff = game.payoff_matrix(s, v.values());
    let cols = payoff[0].len();
    let all_cols: Vec<usize> = (0..cols).collect();
    Ok(support_lp(&payoff, &value, a_set, &all_cols, false, tau))
}

/// Solves the support LP: variables `ξ_a` for `a ∈ a_set` and a margin `t`.
///
/// With `exact_b` unset every column must reach the value (within `tau`);
/// with it set, the columns of `b_set` must equal the value and all others
/// exceed it by at least the margin.
fn support_lp<N: Scalar>(
    payoff: &[Vec<N>],
    value: &N,
    a_set: &[usize],
    b_set: &[usize],
    exact_b: bool,
    tau: f64,
) -> Option<Vec<N>> {
    let rows = payoff.len();
    let cols = payoff[0].len();
    let k = a_set.len();
    let t = k;
    let tau_n: N = tol(tau);
    let mut objective = vec![N::zero(); k + 1];
    objective[t] = N::one();
    let mut lp = LinearProgram::maximize(objective);
    for i in 0..k {
        let mut c = vec![N::zero(); k + 1];
        c[i] = N::one();
        c[t] = -N::one();
        lp.constrain(c, Relation::Ge, N::zero());
    }
    lp.constrain(vec![N::one(); k], Relation::Eq, N::one());
    for b in 0..cols {
        let coeffs: Vec<N> = a_set.iter().map(|&a| payoff[a][b].clone()).collect();
        if !exact_b {
            lp.constrain(coeffs, Relation::Ge, value.clone() - tau_n.clone());
        } else if b_set.contains(&b) {
            if N::EXACT {
                lp.constrain(coeffs, Relation::Eq, value.clone());
            } else {
                lp.constrain(coeffs.clone(), Relation::Ge, value.clone() - tau_n.clone());
                lp.constrain(coeffs, Relation::Le, value.clone() + tau_n.clone());
            }
        } else {
            let mut c = coeffs;
            c.push(-N::one());
            lp.constrain(c, Relation::Ge, value.clone() + tau_n.clone());
        }
    }
    match lp.solve() {
        LpOutcome::Optimal { x, .. } if x[t] > floor() => {
            let mut entry = vec![N::zero(); rows];
            for (i, &a) in a_set.iter().enumerate() {
                entry[a] = x[i].clone();
            }
            Some(normalise(entry))
        }
        _ => None,
    }
}

/// `CountOpt(v, s, ξ1)`: columns whose payoff against `entry` equals the
/// value `Pre_1(v)(s)` (within `tau`).
pub fn counter_optimal<N: Scalar>(
    game: &ConcurrentGame<N>,
    v: &Valuation<N>,
    s: StateId,
    entry: &[N],
    tau: f64,
) -> Result<Vec<usize>> {
    check_entry(game, Player::One, s, entry)?;
    let (value, _) = pre_one(game, v, s)?;
    let payoff = game.payoff_matrix(s, v.values());
    let cols = payoff[0].len();
    let col_vals: Vec<N> = (0..cols).map(|b| column_payoff(&payoff, entry, b)).collect();
    if col_vals.iter().any(|x| value.exceeds(x, tau)) {
        return Err(Error::NotOptimal {
            state: game.state_name(s).to_string(),
        });
    }
    Ok((0..cols)
        .filter(|&b| col_vals[b].approx_eq(&value, tau))
        .collect())
}

/// Nonempty subsets of `0..k`, by increasing size and then lexicographically.
pub fn subsets(k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u64..(1u64 << k))
        .map(|mask| (0..k).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    out
}

/// `OptSelCount(v, s)`: every pair `(A, B)` such that some optimal selector
/// has support exactly `A` and counter-optimal set exactly `B`.
pub fn opt_sel_count<N: Scalar>(
    game: &ConcurrentGame<N>,
    v: &Valuation<N>,
    s: StateId,
    tau: f64,
) -> Result<Vec<SupportPair<N>>> {
    let k1 = game.num_moves(Player::One, s);
    let k2 = game.num_moves(Player::Two, s);
    if k1 + k2 > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            state: game.state_name(s).to_string(),
            bits: k1 + k2,
            limit: ENUMERATION_LIMIT,
        });
    }
    let (value, _) = pre_one(game, v, s)?;
    let payoff = game.payoff_matrix(s, v.values());
    let all_cols: Vec<usize> = (0..k2).collect();
    let col_subsets = subsets(k2);
    let mut out = Vec::new();
    for a_set in subsets(k1) {
        if support_lp(&payoff, &value, &a_set, &all_cols, false, tau).is_none() {
            continue;
        }
        for b_set in &col_subsets {
            if let Some(witness) = support_lp(&payoff, &value, &a_set, b_set, true, tau) {
                out.push(SupportPair {
                    a: a_set.clone(),
                    b: b_set.clone(),
                    witness,
                });
            }
        }
    }
    Ok(out)
}

/// Independent re-check of a support pair: the witness has support exactly
/// `A`, is optimal, and its counter-optimal set is exactly `B`.
pub fn verify_support_pair<N: Scalar>(
    game: &ConcurrentGame<N>,
    v: &Valuation<N>,
    s: StateId,
    pair: &SupportPair<N>,
    tau: f64,
) -> Result<bool> {
    if support_of(&pair.witness) != pair.a {
        return Ok(false);
    }
    match counter_optimal(game, v, s, &pair.witness, tau) {
        Ok(b) => Ok(b == pair.b),
        Err(Error::NotOptimal { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::GameBuilder;
    use crate::numeric::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn hide_v() -> (ConcurrentGame<Rational>, Valuation<Rational>, StateId) {
        let g = fixtures::hide::<Rational>();
        let field = g.state_index("field").unwrap();
        // home, field, caught
        let v = Valuation::new(vec![q(1, 1), q(1, 2), q(0, 1)]);
        (g, v, field)
    }

    #[test]
    fn one_by_one() {
        let (value, mix) = solve_matrix_game(&[vec![q(3, 7)]]).unwrap();
        assert_eq!(value, q(3, 7));
        assert_eq!(mix, vec![q(1, 1)]);
    }

    #[test]
    fn matching_pennies_is_exact() {
        let m = vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]];
        let (value, mix) = solve_matrix_game(&m).unwrap();
        assert_eq!(value, q(1, 2));
        assert_eq!(mix, vec![q(1, 2), q(1, 2)]);
    }

    #[test]
    fn asymmetric_two_by_two() {
        // Equalizer: 0.75p + 0(1-p) = 0.25p + 0.5(1-p) → p = 1/2, value 3/8.
        let m = vec![vec![q(3, 4), q(1, 4)], vec![q(0, 1), q(1, 2)]];
        let (value, mix) = solve_matrix_game(&m).unwrap();
        assert_eq!(value, q(3, 8));
        assert_eq!(mix, vec![q(1, 2), q(1, 2)]);

        let mf = vec![vec![0.75, 0.25], vec![0.0, 0.5]];
        let (vf, mixf) = solve_matrix_game(&mf).unwrap();
        assert!((vf - 0.375).abs() < 1e-12);
        assert!((mixf[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn saddle_point_is_pure() {
        let m = vec![vec![q(1, 2), q(3, 4)], vec![q(1, 4), q(1, 1)]];
        let (value, mix) = solve_matrix_game(&m).unwrap();
        assert_eq!(value, q(1, 2));
        assert_eq!(mix, vec![q(1, 1), q(0, 1)]);
    }

    #[test]
    fn pre_pair_hide_uniform() {
        let (g, v, field) = hide_v();
        let u1 = Selector::uniform(&g, Player::One);
        let u2 = Selector::uniform(&g, Player::Two);
        assert_eq!(pre_pair(&g, &v, field, &u1, &u2).unwrap(), q(1, 2));
        let c = Valuation::constant(3, q(2, 5));
        assert_eq!(pre_pair(&g, &c, field, &u1, &u2).unwrap(), q(2, 5));
    }

    #[test]
    fn pre_one_sel_pure_left() {
        let (g, v, field) = hide_v();
        assert_eq!(pre_one_sel(&g, &v, field, &[q(1, 1), q(0, 1)]).unwrap(), q(0, 1));
    }

    #[test]
    fn pre_one_on_extremes() {
        let g = fixtures::hide::<Rational>();
        let zero = Valuation::constant(3, q(0, 1));
        let one = Valuation::constant(3, q(1, 1));
        assert_eq!(pre_one_valuation(&g, &zero).unwrap(), zero);
        assert_eq!(pre_one_valuation(&g, &one).unwrap(), one);
        let (_, v, _) = hide_v();
        let w = pre_one_valuation(&g, &v).unwrap();
        assert_eq!(w[0], v[0]);
        assert_eq!(w[2], v[2]);
        assert_eq!(w[1], q(1, 2));
    }

    #[test]
    fn support_searches() {
        let (g, v, field) = hide_v();
        let both = opt_sel_with_support(&g, &v, field, &[0, 1], 0.0).unwrap();
        assert_eq!(both, Some(vec![q(1, 2), q(1, 2)]));
        assert_eq!(opt_sel_with_support(&g, &v, field, &[0], 0.0).unwrap(), None);
        let home = g.state_index("home").unwrap();
        assert_eq!(
            opt_sel_with_support(&g, &v, home, &[0], 0.0).unwrap(),
            Some(vec![q(1, 1)])
        );
    }

    #[test]
    fn counter_optimal_sets() {
        let (g, v, field) = hide_v();
        let eq = [q(1, 2), q(1, 2)];
        assert_eq!(counter_optimal(&g, &v, field, &eq, 0.0).unwrap(), vec![0, 1]);
        assert!(matches!(
            counter_optimal(&g, &v, field, &[q(1, 1), q(0, 1)], 0.0),
            Err(Error::NotOptimal { .. })
        ));
    }

    #[test]
    fn opt_sel_count_hide_and_absorbing() {
        let (g, v, field) = hide_v();
        let pairs = opt_sel_count(&g, &v, field, 0.0).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].a, vec![0, 1]);
        assert_eq!(pairs[0].b, vec![0, 1]);
        assert_eq!(pairs[0].witness, vec![q(1, 2), q(1, 2)]);

        let home = g.state_index("home").unwrap();
        let pairs = opt_sel_count(&g, &v, home, 0.0).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].a.clone(), pairs[0].b.clone()), (vec![0], vec![0]));
    }

    #[test]
    fn opt_sel_count_absorbing_with_many_moves() {
        // Every move pair loops: all selectors optimal, all columns tight.
        let mut b = GameBuilder::new();
        b.state("s", &["a", "b"], &["x", "y"]);
        for (m1, m2) in [("a", "x"), ("a", "y"), ("b", "x"), ("b", "y")] {
            b.transition("s", m1, m2, &[("s", q(1, 1))]);
        }
        let g = b.build().unwrap();
        let v = Valuation::new(vec![q(1, 3)]);
        let pairs = opt_sel_count(&g, &v, 0, 0.0).unwrap();
        assert_eq!(pairs.len(), 3);
        assert!(pairs.iter().all(|p| p.b == vec![0, 1]));
        assert!(pairs.iter().any(|p| p.a == vec![0, 1]));
        for p in &pairs {
            assert!(verify_support_pair(&g, &v, 0, p, 0.0).unwrap());
        }
    }

    #[test]
    fn enumeration_guard() {
        let moves: Vec<String> = (0..13).map(|i| format!("m{i}")).collect();
        let mut b = GameBuilder::<f64>::new();
        b.state("s", &moves, &moves);
        for m1 in &moves {
            for m2 in &moves {
                b.transition("s", m1, m2, &[("s", 1.0)]);
            }
        }
        let g = b.build().unwrap();
        let v = Valuation::new(vec![0.5]);
        assert!(matches!(
            opt_sel_count(&g, &v, 0, 1e-9),
            Err(Error::EnumerationGuard { bits: 26, .. })
        ));
    }

    #[test]
    fn subsets_order() {
        assert_eq!(
            subsets(3),
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
    }

    #[test]
    fn threaded_matches_sequential() {
        let g = fixtures::cycle_trap::<f64>().to_concurrent();
        let v = Valuation::new(vec![0.3, 0.2, 0.9, 0.4, 1.0, 1.0, 0.0]);
        assert_eq!(pre_one_all(&g, &v, 1).unwrap(), pre_one_all(&g, &v, 3).unwrap());
    }
}
