use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::model::{AnyGame, ConcurrentGame, Owner, Player};
use crate::numeric::{Rational, Scalar};

/// Termination bounds of a game.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub states: usize,
    /// `|S_R|` (turn-based games only).
    pub random_states: Option<usize>,
    /// Whether the turn-based game is binary.
    pub binary: Option<bool>,
    /// `|δ|`: bits of numerator plus denominator over all positive
    /// transition probabilities of the concurrent form.
    pub delta_bits: u64,
    /// False for floating-point games, whose probabilities are counted by
    /// their exact binary expansions.
    pub delta_bits_exact: bool,
    /// `4^(|S_R|-1)`, bound on numerators and denominators of values of
    /// binary turn-based games.
    pub denominator_bound: Option<Rational>,
    /// `Π_{s∈S_1} |E(s)|`, the number of pure memoryless player-1 strategies.
    pub strategy_bound: Option<BigUint>,
    /// `|S|·4^(|S_R|-1)`, iterations of reachability improvement on binary
    /// turn-based games.
    pub iteration_bound: Option<Rational>,
    pub epsilon: f64,
    /// `k = 192·|S|^4·ln(4|δ|)/ε²`.
    pub k_uniform: f64,
    /// `log10(k^(2|δ|))`.
    pub k_uniform_iterations_log10: f64,
}

fn bits(n: &num_bigint::BigInt) -> u64 {
    n.bits()
}

/// `|δ|` of `game` with the numerator-plus-denominator convention.
pub fn delta_bits<N: Scalar>(game: &ConcurrentGame<N>) -> u64 {
    let mut total = 0;
    for s in game.states() {
        for a in 0..game.num_moves(Player::One, s) {
            for b in 0..game.num_moves(Player::Two, s) {
                for (_, p) in game.transition(s, a, b).iter() {
                    let r = p.to_rational();
                    if r > Rational::from_integer(0.into()) {
                        total += bits(r.numer()) + bits(r.denom());
                    }
                }
            }
        }
    }
    total
}

fn four_pow(exp: i64) -> Rational {
    let four = Rational::from_integer(4.into());
    if exp >= 0 {
        num_traits::pow(four, exp as usize)
    } else {
        Rational::one() / num_traits::pow(four, (-exp) as usize)
    }
}

/// Computes every applicable bound for `game` and tolerance `epsilon`.
pub fn termination_bounds<N: Scalar>(game: &AnyGame<N>, epsilon: f64) -> Result<BoundsReport> {
    if !(epsilon > 0.0) {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let conc = game.to_concurrent();
    let n = conc.num_states();
    let delta = delta_bits(&conc);
    let (random_states, binary, denominator_bound, strategy_bound, iteration_bound) = match game {
        AnyGame::TurnBased(tb) => {
            let sr = tb.states_of(Owner::Random).count();
            let binary = tb.is_binary();
            let strategies = tb
                .states_of(Owner::Player1)
                .map(|s| BigUint::from(tb.successors(s).len()))
                .fold(BigUint::one(), |acc, k| acc * k);
            let denom = four_pow(sr as i64 - 1);
            let iters = Rational::from_integer((n as i64).into()) * denom.clone();
            (
                Some(sr),
                Some(binary),
                binary.then_some(denom),
                Some(strategies),
                binary.then_some(iters),
            )
        }
        AnyGame::Concurrent(_) => (None, None, None, None, None),
    };
    let k = 192.0 * (n as f64).powi(4) * (4.0 * delta as f64).ln() / (epsilon * epsilon);
    Ok(BoundsReport {
        states: n,
        random_states,
        binary,
        delta_bits: delta,
        delta_bits_exact: N::EXACT,
        denominator_bound,
        strategy_bound,
        iteration_bound,
        epsilon,
        k_uniform: k,
        k_uniform_iterations_log10: 2.0 * delta as f64 * k.log10(),
    })
}

impl BoundsReport {
    pub fn denominator_bound_f64(&self) -> Option<f64> {
        self.denominator_bound.as_ref().and_then(ToPrimitive::to_f64)
    }
}
