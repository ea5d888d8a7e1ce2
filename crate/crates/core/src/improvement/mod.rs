//! Strategy improvement for safety and reachability objectives, value
//! iteration, the dovetailed two-sided driver and termination bounds.

use std::collections::VecDeque;
use std::fmt;

use crate::model::{Selector, StateSet, Valuation};
use crate::numeric::Backend;

mod bounds;
mod dovetail;
mod reach;
mod reduction;
mod safety;
mod value_iteration;

pub use bounds::{delta_bits, termination_bounds, BoundsReport};
pub use dovetail::{solve_dovetail, solve_dovetail_turn_based, DovetailResult};
pub use reach::{attractor_selector, solve_reach_si, solve_reach_si_turn_based, ReachSi};
pub use reduction::{tb_reduction, TbNode, TbReduction};
pub use safety::{solve_safety_si, SafetySi};
pub use value_iteration::{value_iteration, value_iteration_with};

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Gap at which the dovetailed driver stops.
    pub epsilon: f64,
    /// Comparison tolerance of the floating-point backend.
    pub tau_eq: f64,
    pub max_iters: usize,
    pub backend: Backend,
    /// Run value iteration after solving and report the gap.
    pub oracle_check: bool,
    pub oracle_rounds: usize,
    /// Worker threads for per-state matrix games and support enumeration.
    pub threads: usize,
    /// Trace entries kept: half at the start of the run, half at the end.
    pub trace_limit: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            tau_eq: 1e-9,
            max_iters: 10_000,
            backend: Backend::Float,
            oracle_check: false,
            oracle_rounds: 10_000,
            threads: 1,
            trace_limit: 1_000,
        }
    }
}

impl Config {
    pub fn check(&self) -> crate::Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(crate::Error::Precondition("epsilon must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(crate::Error::Precondition("max_iters must be at least 1".into()));
        }
        if !(self.tau_eq >= 0.0) {
            return Err(crate::Error::Precondition("tau_eq must be nonnegative".into()));
        }
        Ok(())
    }
}

/// How an iteration changed the selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Switched to locally optimal selectors where `Pre_1` improves.
    LocalPre,
    /// Switched to the almost-sure witness of the turn-based reduction.
    TbAlmostSure,
    /// No improvement possible.
    None,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::LocalPre => "local-Pre",
            StepKind::TbAlmostSure => "tb-almost-sure",
            StepKind::None => "none",
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One iteration: the valuation and selector it started from, the step
/// taken and the states where the selector changed.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry<N> {
    pub index: usize,
    pub values: Valuation<N>,
    pub selector: Selector<N>,
    pub kind: StepKind,
    pub changed: StateSet,
}

/// Iteration history with bounded retention.
#[derive(Debug, Clone, PartialEq)]
pub struct SiTrace<N> {
    head: Vec<TraceEntry<N>>,
    tail: VecDeque<TraceEntry<N>>,
    limit: usize,
    total: usize,
}

impl<N: Clone> SiTrace<N> {
    pub fn new(limit: usize) -> Self {
        Self {
            head: Vec::new(),
            tail: VecDeque::new(),
            limit: limit.max(2),
            total: 0,
        }
    }

    pub fn push(&mut self, entry: TraceEntry<N>) {
        self.total += 1;
        if self.head.len() < self.limit / 2 {
            self.head.push(entry);
            return;
        }
        self.tail.push_back(entry);
        if self.tail.len() > self.limit - self.limit / 2 {
            self.tail.pop_front();
        }
    }

    /// Retained entries in iteration order.
    pub fn entries(&self) -> impl Iterator<Item = &TraceEntry<N>> + '_ {
        self.head.iter().chain(self.tail.iter())
    }

    pub fn last(&self) -> Option<&TraceEntry<N>> {
        self.tail.back().or(self.head.last())
    }

    /// Number of recorded iterations, including dropped ones.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn omitted(&self) -> usize {
        self.total - self.head.len() - self.tail.len()
    }
}

/// Why a solver stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certificate {
    /// No further improvement: the valuation is the value.
    Optimal,
    /// Lower bounds of both players are within the given gap.
    EpsilonApprox(f64),
    IterationCap,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Optimal => f.write_str("optimal"),
            Certificate::EpsilonApprox(e) => write!(f, "epsilon-approximate ({e})"),
            Certificate::IterationCap => f.write_str("iteration cap"),
        }
    }
}

/// Outcome of a one-sided strategy-improvement run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<N> {
    /// Value guaranteed by `strategy`: a lower bound, exact when optimal.
    pub values: Valuation<N>,
    /// Selector of the improving player over the input game's moves.
    pub strategy: Selector<N>,
    pub certificate: Certificate,
    pub iterations: usize,
    pub trace: SiTrace<N>,
    /// States made absorbing before improving (value 1 or value 0 regions
    /// and the objective's sink states).
    pub absorbed: StateSet,
    /// Largest statewise distance to value iteration, when requested.
    pub oracle_gap: Option<f64>,
}
