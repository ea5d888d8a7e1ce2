//! JSON formats: game files, solver results and iteration traces.
//!
//! Probabilities are written as strings, either `"p/q"` or decimals. Maps
//! keep their insertion order so emitted documents are byte-stable.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::improvement::{BoundsReport, Certificate, SiTrace};
use crate::model::{
    AnyGame, ConcurrentGame, Diagnostic, Distribution, GameBuilder, Owner, Player, Selector, StateSet,
    TurnBasedGame, Valuation,
};
use crate::numeric::{parse_probability, Scalar};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum Literal {
    Text(String),
    Number(serde_json::Number),
}

impl Literal {
    fn text(&self) -> String {
        match self {
            Literal::Text(s) => s.clone(),
            Literal::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    from: String,
    a1: String,
    a2: String,
    dist: IndexMap<String, Literal>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum RawGame {
    #[serde(rename = "concurrent")]
    Concurrent {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
        states: Vec<String>,
        moves1: IndexMap<String, Vec<String>>,
        moves2: IndexMap<String, Vec<String>>,
        transitions: Vec<RawTransition>,
    },
    #[serde(rename = "turn-based")]
    TurnBased {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        states: Option<Vec<String>>,
        owner: IndexMap<String, Owner>,
        #[serde(default)]
        edges: IndexMap<String, Vec<String>>,
        #[serde(default)]
        dist: IndexMap<String, IndexMap<String, Literal>>,
    },
}

fn probability<N: Scalar>(lit: &Literal) -> Result<N> {
    let text = lit.text();
    parse_probability(&text, N::EXACT)
        .map(|r| N::from_rational(&r))
        .map_err(|e| Error::Parse(e.to_string()))
}

fn literal<N: Scalar>(x: &N) -> Literal {
    if N::EXACT {
        Literal::Text(x.render())
    } else {
        // Shortest decimal that reads back to the same double.
        Literal::Text(x.to_f64().to_string())
    }
}

/// Parses and validates a game document.
pub fn parse_game<N: Scalar>(text: &str) -> Result<AnyGame<N>> {
    let raw: RawGame = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match raw {
        RawGame::Concurrent {
            states,
            moves1,
            moves2,
            transitions,
            ..
        } => parse_concurrent(states, moves1, moves2, transitions).map(AnyGame::Concurrent),
        RawGame::TurnBased {
            states,
            owner,
            edges,
            dist,
            ..
        } => parse_turn_based(states, owner, edges, dist).map(AnyGame::TurnBased),
    }
}

fn unknown_keys<'a>(
    keys: impl Iterator<Item = &'a String>,
    states: &[String],
    field: &str,
    out: &mut Vec<Diagnostic>,
) {
    for k in keys {
        if !states.contains(k) {
            out.push(Diagnostic::new(k, field, "unknown state"));
        }
    }
}

fn parse_concurrent<N: Scalar>(
    states: Vec<String>,
    moves1: IndexMap<String, Vec<String>>,
    moves2: IndexMap<String, Vec<String>>,
    transitions: Vec<RawTransition>,
) -> Result<ConcurrentGame<N>> {
    let mut diagnostics = Vec::new();
    unknown_keys(moves1.keys(), &states, "moves1", &mut diagnostics);
    unknown_keys(moves2.keys(), &states, "moves2", &mut diagnostics);
    let mut b = GameBuilder::<N>::new();
    for s in &states {
        let m1 = moves1.get(s).cloned().unwrap_or_default();
        let m2 = moves2.get(s).cloned().unwrap_or_default();
        b.state(s, &m1, &m2);
    }
    for t in &transitions {
        let dist = t
            .dist
            .iter()
            .map(|(k, p)| Ok((k.clone(), probability::<N>(p)?)))
            .collect::<Result<Vec<_>>>()?;
        b.transition(&t.from, &t.a1, &t.a2, &dist);
    }
    let (game, more) = b.finish()?;
    diagnostics.extend(more);
    if diagnostics.is_empty() {
        Ok(game)
    } else {
        Err(Error::InvalidGame(diagnostics))
    }
}

fn parse_turn_based<N: Scalar>(
    states: Option<Vec<String>>,
    owner: IndexMap<String, Owner>,
    edges: IndexMap<String, Vec<String>>,
    dist: IndexMap<String, IndexMap<String, Literal>>,
) -> Result<TurnBasedGame<N>> {
    let states = states.unwrap_or_else(|| owner.keys().cloned().collect());
    let mut diagnostics = Vec::new();
    for (i, s) in states.iter().enumerate() {
        if states[..i].contains(s) {
            diagnostics.push(Diagnostic::new(s, "states", "duplicate state"));
        }
    }
    unknown_keys(owner.keys(), &states, "owner", &mut diagnostics);
    unknown_keys(edges.keys(), &states, "edges", &mut diagnostics);
    unknown_keys(dist.keys(), &states, "dist", &mut diagnostics);
    let index = |name: &str| states.iter().position(|s| s == name);

    let mut owners = Vec::with_capacity(states.len());
    let mut succ = Vec::with_capacity(states.len());
    let mut dists = Vec::with_capacity(states.len());
    for s in &states {
        let o = match owner.get(s) {
            Some(&o) => o,
            None => {
                diagnostics.push(Diagnostic::new(s, "owner", "missing owner"));
                Owner::Player1
            }
        };
        owners.push(o);
        let d = match dist.get(s) {
            Some(entries) => {
                let mut parsed = Vec::with_capacity(entries.len());
                for (t, p) in entries {
                    match index(t) {
                        Some(ti) => parsed.push((ti, probability::<N>(p)?)),
                        None => diagnostics.push(Diagnostic::new(s, "dist", format!("unknown target state `{t}`"))),
                    }
                }
                Some(Distribution::from_entries(parsed))
            }
            None => None,
        };
        let es = match edges.get(s) {
            Some(names) => names
                .iter()
                .filter_map(|t| {
                    let ti = index(t);
                    if ti.is_none() {
                        diagnostics.push(Diagnostic::new(s, "edges", format!("unknown target state `{t}`")));
                    }
                    ti
                })
                .collect(),
            None => match (&d, o) {
                (Some(d), Owner::Random) => d.support().collect(),
                _ => Vec::new(),
            },
        };
        succ.push(es);
        dists.push(d);
    }
    let game = TurnBasedGame::from_parts(states, owners, succ, dists)?;
    diagnostics.extend(game.validate());
    if diagnostics.is_empty() {
        Ok(game)
    } else {
        Err(Error::InvalidGame(diagnostics))
    }
}

fn raw_dist<N: Scalar>(names: &[String], d: &Distribution<N>) -> IndexMap<String, Literal> {
    d.iter().map(|(t, p)| (names[t].clone(), literal(p))).collect()
}

/// The game as a JSON document accepted by [`parse_game`].
pub fn game_to_json<N: Scalar>(game: &AnyGame<N>) -> Value {
    let raw = match game {
        AnyGame::Concurrent(g) => {
            let names = g.state_names();
            let moves = |p: Player| {
                g.states()
                    .map(|s| {
                        let ms = (0..g.num_moves(p, s)).map(|i| g.move_name(p, s, i).to_string());
                        (names[s].clone(), ms.collect())
                    })
                    .collect()
            };
            let mut transitions = Vec::new();
            for s in g.states() {
                for a in 0..g.num_moves(Player::One, s) {
                    for b in 0..g.num_moves(Player::Two, s) {
                        transitions.push(RawTransition {
                            from: names[s].clone(),
                            a1: g.move_name(Player::One, s, a).to_string(),
                            a2: g.move_name(Player::Two, s, b).to_string(),
                            dist: raw_dist(names, g.transition(s, a, b)),
                        });
                    }
                }
            }
            RawGame::Concurrent {
                description: None,
                states: names.to_vec(),
                moves1: moves(Player::One),
                moves2: moves(Player::Two),
                transitions,
            }
        }
        AnyGame::TurnBased(g) => {
            let names = g.state_names();
            RawGame::TurnBased {
                description: None,
                states: Some(names.to_vec()),
                owner: g.states().map(|s| (names[s].clone(), g.owner(s))).collect(),
                edges: g
                    .states()
                    .map(|s| {
                        let succ = g.successors(s).iter().map(|&t| names[t].clone()).collect();
                        (names[s].clone(), succ)
                    })
                    .collect(),
                dist: g
                    .states()
                    .filter_map(|s| g.distribution(s).map(|d| (names[s].clone(), raw_dist(names, d))))
                    .collect(),
            }
        }
    };
    serde_json::to_value(raw).expect("game documents serialize")
}

/// Pretty-printed [`game_to_json`].
pub fn emit_game<N: Scalar>(game: &AnyGame<N>) -> String {
    serde_json::to_string_pretty(&game_to_json(game)).expect("game documents serialize")
}

pub fn certificate_json(certificate: &Certificate) -> Value {
    match certificate {
        Certificate::Optimal => json!({ "type": "optimal" }),
        Certificate::EpsilonApprox(e) => json!({ "type": "epsilon", "epsilon": e }),
        Certificate::IterationCap => json!({ "type": "iteration-cap" }),
    }
}

/// `{state: value}` with rendered numbers.
pub fn valuation_json<N: Scalar>(names: &[String], v: &Valuation<N>) -> Value {
    Value::Object(
        names
            .iter()
            .zip(v.values())
            .map(|(s, x)| (s.clone(), Value::String(x.render())))
            .collect(),
    )
}

/// `{state: {move: probability}}` over the support of each entry.
pub fn strategy_json<N: Scalar>(game: &ConcurrentGame<N>, selector: &Selector<N>) -> Value {
    let player = selector.owner();
    let mut out = Map::new();
    for s in game.states() {
        let entry: Map<String, Value> = selector
            .at(s)
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| (game.move_name(player, s, i).to_string(), Value::String(p.render())))
            .collect();
        out.insert(game.state_name(s).to_string(), Value::Object(entry));
    }
    Value::Object(out)
}

/// The result document: values, strategy, certificate and iteration count.
pub fn result_json<N: Scalar>(
    game: &ConcurrentGame<N>,
    values: &Valuation<N>,
    strategy: Option<&Selector<N>>,
    certificate: &Certificate,
    iterations: usize,
) -> Value {
    let mut doc = Map::new();
    doc.insert("values".into(), valuation_json(game.state_names(), values));
    if let Some(sel) = strategy {
        doc.insert("strategy".into(), strategy_json(game, sel));
    }
    doc.insert("certificate".into(), certificate_json(certificate));
    doc.insert("iterations".into(), json!(iterations));
    Value::Object(doc)
}

/// One row of an exported trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<N> {
    pub index: usize,
    pub kind: String,
    pub changed: StateSet,
    pub values: Valuation<N>,
}

/// Rows of a strategy-improvement trace.
pub fn si_rows<N: Scalar>(trace: &SiTrace<N>) -> Vec<TraceRow<N>> {
    trace
        .entries()
        .map(|e| TraceRow {
            index: e.index,
            kind: e.kind.as_str().to_string(),
            changed: e.changed.clone(),
            values: e.values.clone(),
        })
        .collect()
}

pub fn rows_json<N: Scalar>(names: &[String], rows: &[TraceRow<N>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "i": r.index,
                    "kind": r.kind,
                    "changed": r.changed.iter().map(|&s| names[s].clone()).collect::<Vec<_>>(),
                    "v": valuation_json(names, &r.values),
                })
            })
            .collect(),
    )
}

/// The trace document `{"iterations": [...], "certificate": {...}}`.
pub fn trace_json<N: Scalar>(names: &[String], rows: &[TraceRow<N>], certificate: &Certificate) -> Value {
    json!({
        "iterations": rows_json(names, rows),
        "certificate": certificate_json(certificate),
    })
}

/// The bounds report; rationals and big integers are strings, inapplicable
/// bounds are `null`.
pub fn bounds_json(report: &BoundsReport) -> Value {
    let text = |x: Option<String>| x.map(Value::String).unwrap_or(Value::Null);
    json!({
        "states": report.states,
        "random_states": report.random_states,
        "binary": report.binary,
        "delta_bits": report.delta_bits,
        "delta_bits_exact": report.delta_bits_exact,
        "denominator_bound": text(report.denominator_bound.as_ref().map(Scalar::render)),
        "strategy_bound": text(report.strategy_bound.as_ref().map(ToString::to_string)),
        "iteration_bound": text(report.iteration_bound.as_ref().map(Scalar::render)),
        "epsilon": report.epsilon,
        "k_uniform": report.k_uniform,
        "k_uniform_iterations_log10": report.k_uniform_iterations_log10,
    })
}
