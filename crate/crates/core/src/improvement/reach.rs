use crate::error::{Error, Result};
use crate::matrix::pre_one_all;
use crate::mdp::reach_value_of_selector;
use crate::model::{
    complement, make_absorbing, uniform_entry, ConcurrentGame, Objective, Player, Selector, StateSet,
    TurnBasedGame, Valuation,
};
use crate::numeric::Scalar;
use crate::qualitative::{almost_sure_safe_concurrent, attractor_tb};

use super::value_iteration::value_iteration_with;
use super::{Certificate, Config, SiTrace, SolveResult, StepKind, TraceEntry};

/// Reachability strategy improvement for player 1, one iteration at a time.
///
/// The target and the value-0 region are made absorbing up front; every
/// iterate is checked to be proper with respect to them.
#[derive(Debug, Clone)]
pub struct ReachSi<N> {
    input: ConcurrentGame<N>,
    game: ConcurrentGame<N>,
    target: StateSet,
    w2: StateSet,
    absorbed: StateSet,
    gamma: Selector<N>,
    values: Valuation<N>,
    iteration: usize,
    finished: bool,
    config: Config,
    trace: SiTrace<N>,
}

impl<N: Scalar> ReachSi<N> {
    /// Starts from the uniform selector, which is proper.
    pub fn new(game: &ConcurrentGame<N>, target: &StateSet, config: &Config) -> Result<Self> {
        let initial = Selector::uniform(game, Player::One);
        Self::with_selector(game, target, &initial, config)
    }

    /// Starts from `initial`, which must be proper once the target and the
    /// value-0 states are absorbing. Entries on those states are ignored.
    pub fn with_selector(
        game: &ConcurrentGame<N>,
        target: &StateSet,
        initial: &Selector<N>,
        config: &Config,
    ) -> Result<Self> {
        config.check()?;
        if let Some(&bad) = target.iter().find(|&&s| s >= game.num_states()) {
            return Err(Error::UnknownState(format!("#{bad}")));
        }
        if initial.owner() != Player::One {
            return Err(Error::Precondition("initial selector must belong to player 1".into()));
        }
        initial.check(game)?;
        let w2 = almost_sure_safe_concurrent(game, Player::Two, &complement(game.num_states(), target)).winning;
        let absorbed: StateSet = target.union(&w2).copied().collect();
        let absorbing = make_absorbing(game, &absorbed)?;
        let gamma = Selector::new(
            Player::One,
            game.states()
                .map(|s| {
                    if absorbed.contains(&s) {
                        vec![N::one()]
                    } else {
                        initial.at(s).to_vec()
                    }
                })
                .collect(),
        );
        let values = evaluate(&absorbing, &gamma, target, &w2, 0)?;
        Ok(Self {
            input: game.clone(),
            game: absorbing,
            target: target.clone(),
            w2,
            absorbed,
            gamma,
            values,
            iteration: 0,
            finished: false,
            config: config.clone(),
            trace: SiTrace::new(config.trace_limit),
        })
    }

    /// The game with target and value-0 states absorbing.
    pub fn game(&self) -> &ConcurrentGame<N> {
        &self.game
    }

    pub fn values(&self) -> &Valuation<N> {
        &self.values
    }

    pub fn selector(&self) -> &Selector<N> {
        &self.gamma
    }

    /// States from which the target cannot be reached with positive
    /// probability.
    pub fn value_zero(&self) -> &StateSet {
        &self.w2
    }

    /// Target and value-0 states together.
    pub fn goal(&self) -> &StateSet {
        &self.absorbed
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn trace(&self) -> &SiTrace<N> {
        &self.trace
    }

    fn finish(&mut self) -> StepKind {
        self.trace.push(TraceEntry {
            index: self.iteration,
            values: self.values.clone(),
            selector: self.gamma.clone(),
            kind: StepKind::None,
            changed: StateSet::new(),
        });
        self.finished = true;
        StepKind::None
    }

    /// Performs one improvement step; `None` means the run has terminated.
    pub fn step(&mut self) -> Result<StepKind> {
        if self.finished {
            return Ok(StepKind::None);
        }
        let tau = self.config.tau_eq;
        let pre = pre_one_all(&self.game, &self.values, self.config.threads)?;
        let updates: Vec<(usize, Vec<N>)> = pre
            .into_iter()
            .enumerate()
            .filter(|(s, (x, _))| !self.absorbed.contains(s) && x.exceeds(&self.values[*s], tau))
            .map(|(s, (_, entry))| (s, entry))
            .collect();
        if updates.is_empty() {
            return Ok(self.finish());
        }
        let mut next = self.gamma.clone();
        for (s, entry) in &updates {
            next.set(*s, entry.clone());
        }
        let next_values = evaluate(&self.game, &next, &self.target, &self.w2, self.iteration + 1)?;
        let improved = self
            .game
            .states()
            .any(|s| next_values[s].exceeds(&self.values[s], tau));
        if !improved {
            if N::EXACT {
                return Err(Error::Internal(format!(
                    "improvement step at iteration {} did not increase the value",
                    self.iteration
                )));
            }
            return Ok(self.finish());
        }
        self.trace.push(TraceEntry {
            index: self.iteration,
            values: std::mem::replace(&mut self.values, next_values),
            selector: std::mem::replace(&mut self.gamma, next),
            kind: StepKind::LocalPre,
            changed: updates.iter().map(|(s, _)| *s).collect(),
        });
        self.iteration += 1;
        Ok(StepKind::LocalPre)
    }

    pub fn run(mut self) -> Result<SolveResult<N>> {
        while !self.finished && self.iteration < self.config.max_iters {
            self.step()?;
        }
        self.into_result()
    }

    pub fn into_result(self) -> Result<SolveResult<N>> {
        let certificate = if self.finished {
            Certificate::Optimal
        } else {
            Certificate::IterationCap
        };
        let strategy = Selector::new(
            Player::One,
            self.input
                .states()
                .map(|s| {
                    if self.absorbed.contains(&s) {
                        let k = self.input.num_moves(Player::One, s);
                        uniform_entry(k, &(0..k).collect::<Vec<_>>())
                    } else {
                        self.gamma.at(s).to_vec()
                    }
                })
                .collect(),
        );
        let oracle_gap = if self.config.oracle_check {
            let vi = value_iteration_with(
                &self.input,
                &Objective::reach(self.target.clone()),
                self.config.oracle_rounds,
                self.config.threads,
                |_, _| {},
            )?;
            Some(vi.max_abs_diff(&self.values))
        } else {
            None
        };
        Ok(SolveResult {
            values: self.values,
            strategy,
            certificate,
            iterations: self.iteration,
            trace: self.trace,
            absorbed: self.absorbed,
            oracle_gap,
        })
    }
}

fn evaluate<N: Scalar>(
    game: &ConcurrentGame<N>,
    gamma: &Selector<N>,
    target: &StateSet,
    w2: &StateSet,
    iteration: usize,
) -> Result<Valuation<N>> {
    reach_value_of_selector(game, gamma, target, w2).map_err(|e| match e {
        Error::NotProper { component, .. } => Error::NotProper {
            iteration: Some(iteration),
            component,
        },
        other => other,
    })
}

/// Pure attractor selector of `player` in the concurrent encoding of `tb`:
/// every state of the player outside `target` and the player's value-0
/// region moves one layer closer to them.
pub fn attractor_selector<N: Scalar>(tb: &TurnBasedGame<N>, player: Player, target: &StateSet) -> Selector<N> {
    let game = tb.to_concurrent();
    let n = tb.num_states();
    let zero = almost_sure_safe_concurrent(&game, player.opponent(), &complement(n, target)).winning;
    let base: StateSet = target.union(&zero).copied().collect();
    let attractor = attractor_tb(tb, player, &base);
    let picks: Vec<usize> = tb
        .states()
        .map(|s| {
            attractor
                .choice
                .get(&s)
                .and_then(|t| tb.successors(s).iter().position(|x| x == t))
                .unwrap_or(0)
        })
        .collect();
    Selector::pure(&game, player, &picks)
}

/// Reachability strategy improvement from the uniform selector.
pub fn solve_reach_si<N: Scalar>(game: &ConcurrentGame<N>, target: &StateSet, config: &Config) -> Result<SolveResult<N>> {
    ReachSi::new(game, target, config)?.run()
}

/// Reachability strategy improvement on a turn-based game, from the pure
/// attractor selector.
pub fn solve_reach_si_turn_based<N: Scalar>(
    tb: &TurnBasedGame<N>,
    target: &StateSet,
    config: &Config,
) -> Result<SolveResult<N>> {
    let game = tb.to_concurrent();
    let initial = attractor_selector(tb, Player::One, target);
    ReachSi::with_selector(&game, target, &initial, config)?.run()
}
