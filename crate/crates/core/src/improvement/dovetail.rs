use crate::error::Result;
use crate::model::{complement, ConcurrentGame, Player, Selector, StateSet, TurnBasedGame, Valuation};
use crate::numeric::Scalar;

use super::reach::{attractor_selector, ReachSi};
use super::safety::SafetySi;
use super::{Certificate, Config, SolveResult, StepKind};

/// Outcome of the two-sided run for `Safe(F)`.
#[derive(Debug, Clone)]
pub struct DovetailResult<N> {
    /// Player 1's safety side: `values` is the lower bound `v`.
    pub safety: SolveResult<N>,
    /// Player 2's reachability side for `Reach(S \ F)`: `values` is `u` and
    /// `strategy` is a player-2 selector of the input game.
    pub reach: SolveResult<N>,
    pub certificate: Certificate,
    pub rounds: usize,
}

impl<N: Scalar> DovetailResult<N> {
    /// Lower bound on player 1's safety value.
    pub fn lower(&self) -> &Valuation<N> {
        &self.safety.values
    }

    /// Upper bound `1 - u` on player 1's safety value.
    pub fn upper(&self) -> Valuation<N> {
        self.reach.values.complement()
    }

    /// Largest statewise gap between the bounds.
    pub fn gap(&self) -> f64 {
        self.upper()
            .values()
            .iter()
            .zip(self.lower().values())
            .map(|(u, l)| (u.clone() - l.clone()).to_f64())
            .fold(0.0, f64::max)
    }
}

fn within<N: Scalar>(v: &Valuation<N>, u: &Valuation<N>, epsilon: f64) -> bool {
    let one_minus = N::one() - N::from_rational(&epsilon.to_rational());
    v.values()
        .iter()
        .zip(u.values())
        .all(|(a, b)| a.clone() + b.clone() >= one_minus)
}

fn meets<N: Scalar>(v: &Valuation<N>, u: &Valuation<N>) -> bool {
    v.values()
        .iter()
        .zip(u.values())
        .all(|(a, b)| a.clone() + b.clone() == N::one())
}

fn drive<N: Scalar>(mut safety: SafetySi<N>, mut reach: ReachSi<N>, config: &Config) -> Result<DovetailResult<N>> {
    let mut rounds = 0;
    let certificate = loop {
        if safety.step()? == StepKind::None {
            break Certificate::Optimal;
        }
        if reach.step()? == StepKind::None {
            break Certificate::Optimal;
        }
        rounds += 1;
        if meets(safety.values(), reach.values()) {
            break Certificate::Optimal;
        }
        if within(safety.values(), reach.values(), config.epsilon) {
            break Certificate::EpsilonApprox(config.epsilon);
        }
        if rounds >= config.max_iters {
            break Certificate::IterationCap;
        }
    };
    let mut safety = safety.into_result()?;
    let mut reach = reach.into_result()?;
    safety.certificate = certificate;
    reach.certificate = certificate;
    let n = reach.strategy.num_states();
    reach.strategy = Selector::new(
        Player::Two,
        (0..n).map(|s| reach.strategy.at(s).to_vec()).collect(),
    );
    Ok(DovetailResult {
        safety,
        reach,
        certificate,
        rounds,
    })
}

/// Interleaves safety improvement for player 1 on `Safe(F)` with
/// reachability improvement for player 2 on `Reach(S \ F)`, one step each
/// per round, safety first.
pub fn solve_dovetail<N: Scalar>(game: &ConcurrentGame<N>, safe: &StateSet, config: &Config) -> Result<DovetailResult<N>> {
    let safety = SafetySi::new(game, safe, config)?;
    let swapped = game.swap_players();
    let reach = ReachSi::new(&swapped, &complement(game.num_states(), safe), config)?;
    drive(safety, reach, config)
}

/// [`solve_dovetail`] on a turn-based game; player 2 starts from the pure
/// attractor selector.
pub fn solve_dovetail_turn_based<N: Scalar>(
    tb: &TurnBasedGame<N>,
    safe: &StateSet,
    config: &Config,
) -> Result<DovetailResult<N>> {
    let game = tb.to_concurrent();
    let safety = SafetySi::new(&game, safe, config)?;
    let unsafe_states = complement(game.num_states(), safe);
    let attractor = attractor_selector(tb, Player::Two, &unsafe_states);
    let initial = Selector::new(
        Player::One,
        game.states().map(|s| attractor.at(s).to_vec()).collect(),
    );
    let reach = ReachSi::with_selector(&game.swap_players(), &unsafe_states, &initial, config)?;
    drive(safety, reach, config)
}
