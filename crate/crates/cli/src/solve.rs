use serde_json::json;

use csg_core::format::{result_json, rows_json, si_rows, strategy_json, valuation_json, TraceRow, certificate_json};
use csg_core::improvement::value_iteration_with;
use csg_core::model::complement;
use csg_core::{
    solve_dovetail, solve_dovetail_turn_based, solve_reach_si, solve_reach_si_turn_based, solve_safety_si, AnyGame,
    Certificate, Config, ConcurrentGame, Objective, Player, Scalar, Selector, StateSet, Valuation,
};

use crate::{load, table, write_json, Failure, Loaded, Mode, ObjectiveArg, ObjectiveArgs, OracleArgs, SolveArgs};

/// Everything a solver run reports, over the concurrent form of the game.
pub struct Report<N> {
    pub values: Valuation<N>,
    pub upper: Option<Valuation<N>>,
    pub strategy: Option<Selector<N>>,
    pub counter_strategy: Option<Selector<N>>,
    pub certificate: Certificate,
    pub iterations: usize,
    pub oracle_gap: Option<f64>,
    pub rows: Vec<TraceRow<N>>,
    pub counter_rows: Option<Vec<TraceRow<N>>>,
}

fn relabel<N: Scalar>(sel: &Selector<N>, owner: Player) -> Selector<N> {
    Selector::new(owner, (0..sel.num_states()).map(|s| sel.at(s).to_vec()).collect())
}

fn objective_set<N: Scalar>(game: &AnyGame<N>, args: &ObjectiveArgs) -> Result<StateSet, Failure> {
    Ok(game.state_set(&args.states)?)
}

fn objective_of(kind: ObjectiveArg, set: StateSet) -> Objective {
    match kind {
        ObjectiveArg::Safe => Objective::safe(set),
        ObjectiveArg::Reach => Objective::reach(set),
    }
}

pub fn solve(args: &SolveArgs) -> Result<u8, Failure> {
    if !(args.epsilon > 0.0) {
        return Err(Failure::input("--epsilon must be positive"));
    }
    if args.max_iters == 0 {
        return Err(Failure::input("--max-iters must be at least 1"));
    }
    match load(&args.game)? {
        Loaded::Float(g) => solve_with(&g, args),
        Loaded::Exact(g) => solve_with(&g, args),
    }
}

fn config_of(args: &SolveArgs) -> Config {
    Config {
        epsilon: args.epsilon,
        tau_eq: args.tau_eq,
        max_iters: args.max_iters,
        backend: args.game.backend.into(),
        oracle_check: args.check_oracle,
        oracle_rounds: args.iters,
        threads: args.threads.max(1),
        ..Config::default()
    }
}

fn solve_with<N: Scalar>(game: &AnyGame<N>, args: &SolveArgs) -> Result<u8, Failure> {
    let conc = game.to_concurrent();
    let set = objective_set(game, &args.objective)?;
    let config = config_of(args);
    let report = match args.mode {
        Mode::Si => si(game, &conc, args.objective.objective, &set, &config)?,
        Mode::Dovetail => dovetail(game, &conc, args.objective.objective, &set, &config)?,
        Mode::Vi => {
            let objective = objective_of(args.objective.objective, set);
            let mut report = vi(&conc, &objective, args.max_iters, config.threads, args.trace.is_some())?;
            if args.check_oracle {
                let oracle = value_iteration_with(&conc, &objective, args.iters, config.threads, |_, _| {})?;
                report.oracle_gap = Some(oracle.max_abs_diff(&report.values));
            }
            report
        }
    };
    emit(&conc, &report, args.output.as_deref(), args.trace.as_deref())?;
    Ok(match report.certificate {
        Certificate::IterationCap => 3,
        _ => 0,
    })
}

fn si<N: Scalar>(
    game: &AnyGame<N>,
    conc: &ConcurrentGame<N>,
    kind: ObjectiveArg,
    set: &StateSet,
    config: &Config,
) -> Result<Report<N>, Failure> {
    let res = match (kind, game) {
        (ObjectiveArg::Safe, _) => solve_safety_si(conc, set, config)?,
        (ObjectiveArg::Reach, AnyGame::TurnBased(tb)) => solve_reach_si_turn_based(tb, set, config)?,
        (ObjectiveArg::Reach, AnyGame::Concurrent(_)) => solve_reach_si(conc, set, config)?,
    };
    Ok(Report {
        rows: si_rows(&res.trace),
        values: res.values,
        upper: None,
        strategy: Some(res.strategy),
        counter_strategy: None,
        certificate: res.certificate,
        iterations: res.iterations,
        oracle_gap: res.oracle_gap,
        counter_rows: None,
    })
}

fn max_gap(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, y) => x.or(y),
    }
}

fn dovetail<N: Scalar>(
    game: &AnyGame<N>,
    conc: &ConcurrentGame<N>,
    kind: ObjectiveArg,
    set: &StateSet,
    config: &Config,
) -> Result<Report<N>, Failure> {
    match kind {
        ObjectiveArg::Safe => {
            let res = match game {
                AnyGame::TurnBased(tb) => solve_dovetail_turn_based(tb, set, config)?,
                AnyGame::Concurrent(_) => solve_dovetail(conc, set, config)?,
            };
            Ok(Report {
                upper: Some(res.upper()),
                rows: si_rows(&res.safety.trace),
                counter_rows: Some(si_rows(&res.reach.trace)),
                oracle_gap: max_gap(res.safety.oracle_gap, res.reach.oracle_gap),
                values: res.safety.values,
                strategy: Some(res.safety.strategy),
                counter_strategy: Some(res.reach.strategy),
                certificate: res.certificate,
                iterations: res.rounds,
            })
        }
        ObjectiveArg::Reach => {
            // Player 2 guards the complement of the target in the swapped game.
            let swapped = conc.swap_players();
            let res = solve_dovetail(&swapped, &complement(conc.num_states(), set), config)?;
            Ok(Report {
                upper: Some(res.safety.values.complement()),
                rows: si_rows(&res.reach.trace),
                counter_rows: Some(si_rows(&res.safety.trace)),
                oracle_gap: max_gap(res.safety.oracle_gap, res.reach.oracle_gap),
                values: res.reach.values.clone(),
                strategy: Some(relabel(&res.reach.strategy, Player::One)),
                counter_strategy: Some(relabel(&res.safety.strategy, Player::Two)),
                certificate: res.certificate,
                iterations: res.rounds,
            })
        }
    }
}

fn vi<N: Scalar>(
    game: &ConcurrentGame<N>,
    objective: &Objective,
    rounds: usize,
    threads: usize,
    keep_rows: bool,
) -> Result<Report<N>, Failure> {
    let mut prev = Valuation::indicator(game.num_states(), &objective.set);
    let mut done = 0;
    let mut fixpoint = false;
    let mut rows = Vec::new();
    let values = value_iteration_with(game, objective, rounds, threads, |k, u| {
        done = k;
        if *u == prev {
            fixpoint = true;
            return;
        }
        if keep_rows {
            rows.push(TraceRow {
                index: k - 1,
                kind: "vi".into(),
                changed: game.states().filter(|&s| u[s] != prev[s]).collect(),
                values: prev.clone(),
            });
        }
        prev = u.clone();
    })?;
    Ok(Report {
        values,
        upper: None,
        strategy: None,
        counter_strategy: None,
        certificate: if fixpoint {
            Certificate::Optimal
        } else {
            Certificate::IterationCap
        },
        iterations: done,
        oracle_gap: None,
        rows,
        counter_rows: None,
    })
}

fn emit<N: Scalar>(
    game: &ConcurrentGame<N>,
    report: &Report<N>,
    output: Option<&std::path::Path>,
    trace: Option<&std::path::Path>,
) -> Result<(), Failure> {
    let names = game.state_names();
    let mut doc = result_json(game, &report.values, report.strategy.as_ref(), &report.certificate, report.iterations);
    let map = doc.as_object_mut().expect("result is an object");
    if let Some(upper) = &report.upper {
        map.insert("upper".into(), valuation_json(names, upper));
    }
    if let Some(counter) = &report.counter_strategy {
        map.insert("counter_strategy".into(), strategy_json(game, counter));
    }
    if let Some(gap) = report.oracle_gap {
        map.insert("oracle_gap".into(), json!(gap));
    }
    eprint!("{}", table::solve(names, report));
    write_json(output, &doc)?;
    if let Some(path) = trace {
        let mut t = json!({ "iterations": rows_json(names, &report.rows) });
        if let Some(counter) = &report.counter_rows {
            t["counter_iterations"] = rows_json(names, counter);
        }
        t["certificate"] = certificate_json(&report.certificate);
        write_json(Some(path), &t)?;
    }
    Ok(())
}

pub fn oracle(args: &OracleArgs) -> Result<u8, Failure> {
    match load(&args.game)? {
        Loaded::Float(g) => oracle_with(&g, args),
        Loaded::Exact(g) => oracle_with(&g, args),
    }
}

fn oracle_with<N: Scalar>(game: &AnyGame<N>, args: &OracleArgs) -> Result<u8, Failure> {
    let conc = game.to_concurrent();
    let set = objective_set(game, &args.objective)?;
    let objective = objective_of(args.objective.objective, set);
    let report = vi(&conc, &objective, args.iters, args.threads.max(1), args.trace.is_some())?;
    emit(&conc, &report, args.output.as_deref(), args.trace.as_deref())?;
    Ok(0)
}

