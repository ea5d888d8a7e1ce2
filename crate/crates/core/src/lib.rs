//! Solvers for finite two-player concurrent and turn-based stochastic games
//! with reachability and safety objectives.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: game graphs, selectors, valuations, fixing selectors to get
//!   MDPs and Markov chains.
//! * [`lp`]: a small dense two-phase simplex usable with exact rationals.
//! * [`matrix`]: one-shot matrix games, the `Pre` operators, optimal
//!   selectors and their counter-optimal action sets.
//! * [`mdp`]: Markov-chain and MDP reachability, maximal end components,
//!   values of fixed selectors and properness.
//! * [`qualitative`]: attractors and almost-sure winning sets.
//! * [`improvement`]: the safety and reachability strategy-improvement
//!   algorithms, value iteration, the dovetailed two-sided driver and the
//!   termination-bound calculators.
//! * [`format`]: the JSON game, result and trace formats.
//!
//! All algorithms are generic over [`numeric::Scalar`], implemented for `f64`
//! and for exact [`numeric::Rational`]s.

pub mod error;
pub mod fixtures;
pub mod format;
pub mod improvement;
pub mod lp;
pub mod matrix;
pub mod mdp;
pub mod model;
pub mod numeric;
mod par;
pub mod qualitative;

pub use error::{Error, Result};
pub use improvement::{
    solve_dovetail, solve_dovetail_turn_based, solve_reach_si, solve_reach_si_turn_based,
    solve_safety_si, termination_bounds, value_iteration, BoundsReport, Certificate, Config,
    DovetailResult, SolveResult,
};
pub use model::{
    AnyGame, ConcurrentGame, Distribution, MarkovChain, Mdp, Objective, ObjectiveKind, Owner, Player,
    Selector, StateId, StateSet, TurnBasedGame, Valuation,
};
pub use numeric::{Backend, Rational, Scalar};
