//! Random game generators and brute-force oracles shared by the
//! integration suites. Oracles here use only exact arithmetic and plain
//! enumeration, never the solvers under test.

#![allow(dead_code)]

use std::collections::BTreeSet;

use csg_core::model::{Distribution, GameBuilder, Owner, TurnBasedGame};
use csg_core::{ConcurrentGame, Rational, Scalar, StateSet};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Splits `units` into `parts` positive integers.
fn composition(rng: &mut ChaCha8Rng, units: i64, parts: usize) -> Vec<i64> {
    let mut cuts: Vec<i64> = (1..units).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain([units]) {
        out.push(c - prev);
        prev = c;
    }
    out
}

/// A distribution over up to three distinct targets with dyadic weights.
fn dyadic<N: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, N)> {
    let denom = [2i64, 4, 8][rng.gen_range(0..3)];
    let parts = rng.gen_range(1..=3usize.min(n).min(denom as usize));
    let mut targets: Vec<usize> = (0..n).collect();
    targets.shuffle(rng);
    composition(rng, denom, parts)
        .into_iter()
        .zip(targets)
        .map(|(w, t)| (t, N::from_ratio(w, denom)))
        .collect()
}

/// Random concurrent game with `1..=max_states` states and `1..=max_moves`
/// moves per player, about a quarter of the states absorbing.
pub fn concurrent<N: Scalar>(rng: &mut ChaCha8Rng, max_states: usize, max_moves: usize) -> ConcurrentGame<N> {
    let n = rng.gen_range(1..=max_states);
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut b = GameBuilder::<N>::new();
    let mut specs = Vec::new();
    for name in &names {
        if rng.gen_bool(0.25) {
            b.absorbing(name);
            continue;
        }
        let m1: Vec<String> = (0..rng.gen_range(1..=max_moves)).map(|i| format!("a{i}")).collect();
        let m2: Vec<String> = (0..rng.gen_range(1..=max_moves)).map(|i| format!("b{i}")).collect();
        b.state(name, &m1, &m2);
        specs.push((name.clone(), m1, m2));
    }
    for (name, m1, m2) in specs {
        for a in &m1 {
            for c in &m2 {
                let dist: Vec<(String, N)> = dyadic::<N>(rng, n)
                    .into_iter()
                    .map(|(t, p)| (names[t].clone(), p))
                    .collect();
                b.transition(&name, a, c, &dist);
            }
        }
    }
    b.build().expect("generated games are valid")
}

/// Random subset containing each state with probability `p`.
pub fn subset(rng: &mut ChaCha8Rng, n: usize, p: f64) -> StateSet {
    (0..n).filter(|_| rng.gen_bool(p)).collect()
}

fn owner_of(rng: &mut ChaCha8Rng) -> Owner {
    [Owner::Player1, Owner::Player2, Owner::Random][rng.gen_range(0..3)]
}

/// Random turn-based game with `1..=max_states` states; player states get
/// one to three successors, random states a dyadic distribution.
pub fn turn_based<N: Scalar>(rng: &mut ChaCha8Rng, max_states: usize) -> TurnBasedGame<N> {
    let n = rng.gen_range(1..=max_states);
    let mut owner = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n);
    let mut dist = Vec::with_capacity(n);
    for _ in 0..n {
        let o = owner_of(rng);
        owner.push(o);
        if o == Owner::Random {
            let d = dyadic::<N>(rng, n);
            edges.push(d.iter().map(|(t, _)| *t).collect());
            dist.push(Some(Distribution::from_entries(d)));
        } else {
            let mut targets: Vec<usize> = (0..n).collect();
            targets.shuffle(rng);
            targets.truncate(rng.gen_range(1..=3usize.min(n)));
            edges.push(targets);
            dist.push(None);
        }
    }
    let names = (0..n).map(|i| format!("s{i}")).collect();
    TurnBasedGame::new(names, owner, edges, dist).expect("generated games are valid")
}

/// Random binary turn-based game with exactly `random` random states among
/// `players + random` states: each random state has one successor or two
/// fair successors.
pub fn binary(rng: &mut ChaCha8Rng, players: usize, random: usize) -> TurnBasedGame<Rational> {
    let n = players + random;
    let mut owners: Vec<Owner> = (0..players)
        .map(|_| if rng.gen_bool(0.5) { Owner::Player1 } else { Owner::Player2 })
        .chain((0..random).map(|_| Owner::Random))
        .collect();
    owners.shuffle(rng);
    let mut edges = Vec::with_capacity(n);
    let mut dist = Vec::with_capacity(n);
    for &o in &owners {
        let mut targets: Vec<usize> = (0..n).collect();
        targets.shuffle(rng);
        if o == Owner::Random {
            let two = n >= 2 && rng.gen_bool(0.85);
            if two {
                let (x, y) = (targets[0], targets[1]);
                edges.push(vec![x, y]);
                dist.push(Some(Distribution::from_entries([(x, q(1, 2)), (y, q(1, 2))])));
            } else {
                edges.push(vec![targets[0]]);
                dist.push(Some(Distribution::point(targets[0])));
            }
        } else {
            targets.truncate(rng.gen_range(1..=3usize.min(n)));
            edges.push(targets);
            dist.push(None);
        }
    }
    let names = (0..n).map(|i| format!("s{i}")).collect();
    TurnBasedGame::new(names, owners, edges, dist).expect("generated games are valid")
}

/// Exact reachability probabilities of a Markov chain given as sparse rows:
/// graph pruning followed by Gauss-Jordan elimination over the rationals.
pub fn chain_reach_oracle(rows: &[Vec<(usize, Rational)>], target: &StateSet) -> Vec<Rational> {
    let n = rows.len();
    let mut reaches: BTreeSet<usize> = target.iter().copied().collect();
    loop {
        let before = reaches.len();
        for s in 0..n {
            if rows[s].iter().any(|(t, p)| !p.is_zero() && reaches.contains(t)) {
                reaches.insert(s);
            }
        }
        if reaches.len() == before {
            break;
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|s| reaches.contains(s) && !target.contains(s)).collect();
    let col = |s: usize| unknown.iter().position(|&u| u == s);
    let m = unknown.len();
    let mut a = vec![vec![Rational::zero(); m + 1]; m];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] = Rational::one();
        for (t, p) in &rows[s] {
            if target.contains(t) {
                a[i][m] = a[i][m].clone() + p.clone();
            } else if let Some(j) = col(*t) {
                a[i][j] = a[i][j].clone() - p.clone();
            }
        }
    }
    for c in 0..m {
        let pivot = (c..m).find(|&r| !a[r][c].is_zero()).expect("prob-reach system is regular");
        a.swap(c, pivot);
        let inv = Rational::one() / a[c][c].clone();
        for x in a[c].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r in 0..m {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in c..=m {
                    let v = a[c][k].clone() * f.clone();
                    a[r][k] = a[r][k].clone() - v;
                }
            }
        }
    }
    (0..n)
        .map(|s| {
            if target.contains(&s) {
                Rational::one()
            } else if let Some(i) = col(s) {
                a[i][m].clone()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

/// Every assignment of one choice per listed state.
fn assignments(options: &[(usize, Vec<usize>)]) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new()];
    for (s, opts) in options {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |&o| {
                    let mut p = prefix.clone();
                    p.push((*s, o));
                    p
                })
            })
            .collect();
    }
    out
}

/// Reach probability of `target` in the chain obtained by fixing a
/// successor at every player state.
fn tb_chain_reach(tb: &TurnBasedGame<Rational>, choice: &[usize], target: &StateSet) -> Vec<Rational> {
    let rows: Vec<Vec<(usize, Rational)>> = tb
        .states()
        .map(|s| match tb.distribution(s) {
            Some(d) => d.iter().map(|(t, p)| (t, p.clone())).collect(),
            None => vec![(choice[s], Rational::one())],
        })
        .collect();
    chain_reach_oracle(&rows, target)
}

/// Objective of the brute-force oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Reach,
    Safe,
}

/// `max_σ1 min_σ2` of the objective's probability over pure memoryless
/// strategies, statewise.
pub fn tb_minimax(tb: &TurnBasedGame<Rational>, goal: Goal, set: &StateSet) -> Vec<Rational> {
    let n = tb.num_states();
    let reach_set: StateSet = match goal {
        Goal::Reach => set.clone(),
        Goal::Safe => (0..n).filter(|s| !set.contains(s)).collect(),
    };
    let options = |o: Owner| -> Vec<(usize, Vec<usize>)> {
        tb.states_of(o).map(|s| (s, tb.successors(s).to_vec())).collect()
    };
    let p1 = assignments(&options(Owner::Player1));
    let p2 = assignments(&options(Owner::Player2));
    let mut best: Option<Vec<Rational>> = None;
    for s1 in &p1 {
        let mut worst: Option<Vec<Rational>> = None;
        for s2 in &p2 {
            let mut choice = vec![0; n];
            for &(s, t) in s1.iter().chain(s2) {
                choice[s] = t;
            }
            let r = tb_chain_reach(tb, &choice, &reach_set);
            let val: Vec<Rational> = match goal {
                Goal::Reach => r,
                Goal::Safe => r.into_iter().map(|x| Rational::one() - x).collect(),
            };
            worst = Some(match worst {
                None => val,
                Some(w) => w.into_iter().zip(val).map(|(a, b)| a.min(b)).collect(),
            });
        }
        let w = worst.expect("player 2 has a strategy");
        best = Some(match best {
            None => w,
            Some(b) => b.into_iter().zip(w).map(|(a, b)| a.max(b)).collect(),
        });
    }
    best.expect("player 1 has a strategy")
}

/// Value of the 2-row matrix game by gridding player 1's mix.
pub fn grid_value(m: &[Vec<f64>], step: f64) -> f64 {
    let steps = (1.0 / step).round() as usize;
    (0..=steps)
        .map(|i| {
            let p = i as f64 / steps as f64;
            (0..m[0].len())
                .map(|b| p * m[0][b] + (1.0 - p) * m[1][b])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Maximum statewise `|a - b|`.
pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Writes one line to the real stderr, bypassing the test harness capture.
pub fn report(line: &str) {
    use std::io::Write;
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}
