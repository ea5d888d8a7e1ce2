use crate::error::{Error, Result};
use crate::matrix::pre_one_all;
use crate::mdp::safety_value_of_selector;
use crate::model::{
    complement, make_absorbing, uniform_entry, ConcurrentGame, Objective, Player, Selector, StateSet,
    Valuation,
};
use crate::numeric::Scalar;
use crate::qualitative::{almost_sure_safe_concurrent, almost_sure_safe_tb, QualitativeResult};

use super::reduction::{tb_reduction, TbNode};
use super::value_iteration::value_iteration_with;
use super::{Certificate, Config, SiTrace, SolveResult, StepKind, TraceEntry};

/// Safety strategy improvement, one iteration at a time.
///
/// The value-1 region and the unsafe states are made absorbing up front;
/// the selector and valuations live on that modified game.
#[derive(Debug, Clone)]
pub struct SafetySi<N> {
    input: ConcurrentGame<N>,
    game: ConcurrentGame<N>,
    safe: StateSet,
    w1: QualitativeResult,
    absorbed: StateSet,
    gamma: Selector<N>,
    values: Valuation<N>,
    iteration: usize,
    finished: bool,
    config: Config,
    trace: SiTrace<N>,
}

impl<N: Scalar> SafetySi<N> {
    /// Starts from the uniform selector.
    pub fn new(game: &ConcurrentGame<N>, safe: &StateSet, config: &Config) -> Result<Self> {
        let initial = Selector::uniform(game, Player::One);
        Self::with_selector(game, safe, &initial, config)
    }

    /// Starts from `initial`, a player-1 selector of `game`. Its entries on
    /// absorbed states are ignored.
    pub fn with_selector(
        game: &ConcurrentGame<N>,
        safe: &StateSet,
        initial: &Selector<N>,
        config: &Config,
    ) -> Result<Self> {
        config.check()?;
        if let Some(&bad) = safe.iter().find(|&&s| s >= game.num_states()) {
            return Err(Error::UnknownState(format!("#{bad}")));
        }
        if initial.owner() != Player::One {
            return Err(Error::Precondition("initial selector must belong to player 1".into()));
        }
        initial.check(game)?;
        let w1 = almost_sure_safe_concurrent(game, Player::One, safe);
        let mut absorbed = complement(game.num_states(), safe);
        absorbed.extend(w1.winning.iter().copied());
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
        let values = safety_value_of_selector(&absorbing, &gamma, safe)?;
        Ok(Self {
            input: game.clone(),
            game: absorbing,
            safe: safe.clone(),
            w1,
            absorbed,
            gamma,
            values,
            iteration: 0,
            finished: false,
            config: config.clone(),
            trace: SiTrace::new(config.trace_limit),
        })
    }

    /// The game with value-1 and unsafe states absorbing.
    pub fn game(&self) -> &ConcurrentGame<N> {
        &self.game
    }

    pub fn values(&self) -> &Valuation<N> {
        &self.values
    }

    pub fn selector(&self) -> &Selector<N> {
        &self.gamma
    }

    /// States where player 1 wins with probability 1.
    pub fn almost_sure(&self) -> &StateSet {
        &self.w1.winning
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

    /// States outside the absorbed region where `Pre_1` of the current
    /// valuation beats the valuation, each with an optimal selector entry.
    pub fn local_improvements(&self) -> Result<Vec<(usize, Vec<N>)>> {
        let tau = self.config.tau_eq;
        let pre = pre_one_all(&self.game, &self.values, self.config.threads)?;
        Ok(pre
            .into_iter()
            .enumerate()
            .filter(|(s, (x, _))| !self.absorbed.contains(s) && x.exceeds(&self.values[*s], tau))
            .map(|(s, (_, entry))| (s, entry))
            .collect())
    }

    /// States of the original game that are almost-sure safe in the
    /// turn-based reduction, outside the value-1 region, with the selector
    /// entry taken from the chosen support pair.
    pub fn reduction_improvements(&self) -> Result<Vec<(usize, Vec<N>)>> {
        let reduction = tb_reduction(
            &self.game,
            &self.values,
            &self.safe,
            self.config.tau_eq,
            self.config.threads,
        )?;
        let sure = almost_sure_safe_tb(&reduction.game, Player::One, &reduction.safe);
        let mut out = Vec::new();
        for s in self.game.states() {
            if !sure.winning.contains(&s) || self.w1.winning.contains(&s) {
                continue;
            }
            let succ = sure.witness.get(&s).and_then(|w| w.first()).copied().ok_or_else(|| {
                Error::Internal(format!("no almost-sure witness at `{}`", self.game.state_name(s)))
            })?;
            match reduction.back_map[succ] {
                TbNode::Pair { pair, .. } => out.push((s, reduction.pairs[s][pair].witness.clone())),
                other => {
                    return Err(Error::Internal(format!(
                        "reduction successor of `{}` is {other:?}",
                        self.game.state_name(s)
                    )))
                }
            }
        }
        Ok(out)
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

    /// Performs one improvement step and returns its kind; `None` means the
    /// run has terminated.
    pub fn step(&mut self) -> Result<StepKind> {
        if self.finished {
            return Ok(StepKind::None);
        }
        let mut updates = self.local_improvements()?;
        let mut kind = StepKind::LocalPre;
        if updates.is_empty() {
            updates = self.reduction_improvements()?;
            kind = StepKind::TbAlmostSure;
        }
        if updates.is_empty() {
            return Ok(self.finish());
        }
        let mut next = self.gamma.clone();
        for (s, entry) in &updates {
            next.set(*s, entry.clone());
        }
        let next_values = safety_value_of_selector(&self.game, &next, &self.safe)?;
        let improved = self
            .game
            .states()
            .any(|s| next_values[s].exceeds(&self.values[s], self.config.tau_eq));
        if !improved {
            if N::EXACT {
                return Err(Error::Internal(format!(
                    "{} step at iteration {} did not increase the value",
                    kind, self.iteration
                )));
            }
            // Within rounding of the previous valuation: treat as a fixpoint.
            return Ok(self.finish());
        }
        self.trace.push(TraceEntry {
            index: self.iteration,
            values: std::mem::replace(&mut self.values, next_values),
            selector: std::mem::replace(&mut self.gamma, next),
            kind,
            changed: updates.iter().map(|(s, _)| *s).collect(),
        });
        self.iteration += 1;
        Ok(kind)
    }

    /// Steps until termination or the iteration cap.
    pub fn run(mut self) -> Result<SolveResult<N>> {
        while !self.finished && self.iteration < self.config.max_iters {
            self.step()?;
        }
        self.into_result()
    }

    /// The current state as a result; the certificate is `Optimal` only if
    /// the run has terminated.
    pub fn into_result(self) -> Result<SolveResult<N>> {
        let certificate = if self.finished {
            Certificate::Optimal
        } else {
            Certificate::IterationCap
        };
        let unsafe_states = complement(self.input.num_states(), &self.safe);
        let strategy = Selector::new(
            Player::One,
            self.input
                .states()
                .map(|s| {
                    let k = self.input.num_moves(Player::One, s);
                    if let Some(support) = self.w1.witness.get(&s) {
                        uniform_entry(k, support)
                    } else if unsafe_states.contains(&s) {
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
                &Objective::safe(self.safe.clone()),
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

/// Safety strategy improvement from the uniform selector.
pub fn solve_safety_si<N: Scalar>(game: &ConcurrentGame<N>, safe: &StateSet, config: &Config) -> Result<SolveResult<N>> {
    SafetySi::new(game, safe, config)?.run()
}
