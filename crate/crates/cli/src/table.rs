use std::fmt::Write;

use csg_core::{BoundsReport, Scalar};

use crate::solve::Report;

pub fn solve<N: Scalar>(names: &[String], report: &Report<N>) -> String {
    let width = names.iter().map(String::len).max().unwrap_or(0).max(5);
    let mut out = String::new();
    match &report.upper {
        Some(_) => writeln!(out, "{:<width$}  {:>18}  {:>18}", "state", "lower", "upper"),
        None => writeln!(out, "{:<width$}  {:>18}", "state", "value"),
    }
    .ok();
    for (s, name) in names.iter().enumerate() {
        let v = report.values[s].render();
        match &report.upper {
            Some(u) => writeln!(out, "{name:<width$}  {v:>18}  {:>18}", u[s].render()),
            None => writeln!(out, "{name:<width$}  {v:>18}"),
        }
        .ok();
    }
    writeln!(out, "certificate: {}", report.certificate).ok();
    writeln!(out, "iterations: {}", report.iterations).ok();
    if let Some(gap) = report.oracle_gap {
        writeln!(out, "oracle gap: {gap:e}").ok();
    }
    out
}

pub fn bounds(report: &BoundsReport) -> String {
    let na = || "n/a".to_string();
    let mut out = String::new();
    let rows = [
        ("states", report.states.to_string()),
        ("random states", report.random_states.map_or_else(na, |k| k.to_string())),
        ("binary", report.binary.map_or_else(na, |b| b.to_string())),
        (
            "|delta| bits",
            if report.delta_bits_exact {
                report.delta_bits.to_string()
            } else {
                format!("{} (from binary expansions)", report.delta_bits)
            },
        ),
        ("value denominator bound", report.denominator_bound.as_ref().map_or_else(na, Scalar::render)),
        ("pure strategies", report.strategy_bound.as_ref().map_or_else(na, ToString::to_string)),
        ("improvement iterations", report.iteration_bound.as_ref().map_or_else(na, Scalar::render)),
        ("k (k-uniform)", format!("{:.6e}", report.k_uniform)),
        ("log10 k-uniform iterations", format!("{:.6e}", report.k_uniform_iterations_log10)),
    ];
    for (k, v) in rows {
        writeln!(out, "{k:<28} {v}").ok();
    }
    out
}
