use std::fs;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use scop_core::baseline::{bounds_propagate, decompose};
use scop_core::model_io::{query_label, Mode};
use scop_core::obdd::{dump_obdd, to_dot};
use scop_core::propagate::{compute_derivatives, compute_path_weights, compute_values};
use scop_core::solver::{
    solve_opt_with, solve_sat_with, PropagatorKind, SearchStats, SolverOptions,
};
use scop_core::{
    dc_propagate, ConstraintTerm, DomainState, Problem, PropagationResult, StochasticConstraint,
    Strategy, VarId, VarTable,
};
use serde_json::{json, Map, Value};

use crate::input;
use crate::{CompileArgs, PropagateArgs, PropagatorArg, SolveArgs};

pub fn compile(args: &CompileArgs) -> Result<u8> {
    let spec = input::load_spec(&args.problem, args.order_file.as_ref())?;
    let built = input::build(&spec, &args.problem)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let mut rows = Vec::new();
    for (q, obdd) in spec.queries.iter().zip(&built.obdds) {
        let stem = format!("{}-{}", q.source, q.target);
        let path = args.out_dir.join(format!("{stem}.obdd"));
        fs::write(&path, dump_obdd(obdd))
            .with_context(|| format!("cannot write {}", path.display()))?;
        let dot = if args.dot {
            let p = args.out_dir.join(format!("{stem}.dot"));
            fs::write(&p, to_dot(obdd)).with_context(|| format!("cannot write {}", p.display()))?;
            Some(p.display().to_string())
        } else {
            None
        };
        rows.push((
            query_label(q),
            obdd.num_internal(),
            path.display().to_string(),
            dot,
        ));
    }
    if args.json {
        let queries: Vec<Value> = rows
            .iter()
            .map(|(q, n, f, d)| json!({"query": q, "internal_nodes": n, "file": f, "dot": d}))
            .collect();
        println!("{}", json!({ "queries": queries }));
    } else {
        for (q, n, f, d) in &rows {
            print!("{q}: {n} internal nodes -> {f}");
            if let Some(d) = d {
                print!(", {d}");
            }
            println!();
        }
    }
    Ok(0)
}

fn parse_fix(vars: &VarTable, s: &str) -> Result<(VarId, bool)> {
    let Some((name, val)) = s.split_once('=') else {
        bail!("--fix expects NAME=0 or NAME=1, got {s:?}");
    };
    let var = vars
        .lookup(name)
        .with_context(|| format!("unknown variable {name:?}"))?;
    if !vars.get(var).is_decision() {
        bail!("{name} is not a decision variable");
    }
    let value = match val {
        "0" | "false" => false,
        "1" | "true" => true,
        _ => bail!("--fix expects NAME=0 or NAME=1, got {s:?}"),
    };
    Ok((var, value))
}

fn status(r: &PropagationResult) -> &'static str {
    if r.is_failed() {
        "failed"
    } else {
        "ok"
    }
}

pub fn propagate(args: &PropagateArgs) -> Result<u8> {
    let obdds = input::load_diagrams(&args.obdds)?;
    let vars = obdds[0].vars().clone();
    let mut doms = DomainState::new(&vars);
    for f in &args.fixes {
        let (v, b) = parse_fix(&vars, f)?;
        if doms.fix(v, b).is_err() {
            bail!("conflicting --fix for {}", vars.name(v));
        }
    }
    let terms: Vec<ConstraintTerm> = obdds.iter().cloned().map(ConstraintTerm::unit).collect();
    let dc = dc_propagate(&terms, &doms, args.theta);
    let base = bounds_propagate(&decompose(&terms, args.theta), &doms);

    let mut delta = vec![0.0; vars.len()];
    for t in &terms {
        let pi = compute_path_weights(&t.obdd, &doms);
        let v = compute_values(&t.obdd, &doms);
        let der = compute_derivatives(&t.obdd, &pi, &v, &doms);
        for var in doms.free_vars() {
            delta[var.index()] += t.reward * der.get(var).unwrap_or(0.0);
        }
    }
    let state = |var: VarId, r: &PropagationResult| -> String {
        if let Some(b) = doms.get(var).and_then(|d| d.value()) {
            return format!("given {}", b as u8);
        }
        match r.fixed.iter().find(|f| f.0 == var) {
            Some(&(_, b)) if !r.is_failed() => format!("fixed {}", b as u8),
            _ => "free".into(),
        }
    };

    if args.json {
        let rows: Vec<Value> = vars
            .decisions()
            .map(|v| {
                json!({
                    "var": vars.name(v),
                    "delta": doms.is_free(v).then(|| delta[v.index()]),
                    "dc": state(v, &dc),
                    "baseline": state(v, &base.result),
                })
            })
            .collect();
        let doc = json!({
            "theta": args.theta,
            "value": dc.bound,
            "dc": {"status": status(&dc), "fixed": fixed_json(&vars, &dc), "visits": dc.visits},
            "baseline": {
                "status": status(&base.result),
                "fixed": fixed_json(&vars, &base.result),
                "visits": base.result.visits,
                "sweeps": base.sweeps,
                "capped": base.capped,
            },
            "variables": rows,
        });
        println!("{doc}");
    } else {
        println!("F = {}", round(dc.bound));
        println!("theta = {}", args.theta);
        let width = vars
            .decisions()
            .map(|v| vars.name(v).len())
            .max()
            .unwrap_or(3)
            .max(3);
        println!(
            "{:width$}  {:>10}  {:<9}  {:<9}",
            "var", "delta", "dc", "baseline"
        );
        for v in vars.decisions() {
            let d = if doms.is_free(v) {
                format!("{}", round(delta[v.index()]))
            } else {
                "-".into()
            };
            println!(
                "{:width$}  {:>10}  {:<9}  {:<9}",
                vars.name(v),
                d,
                state(v, &dc),
                state(v, &base.result)
            );
        }
        println!(
            "dc: {} ({} visits), baseline: {} ({} sweeps{})",
            status(&dc),
            dc.visits,
            status(&base.result),
            base.sweeps,
            if base.capped { ", capped" } else { "" }
        );
    }
    Ok(if dc.is_failed() { 2 } else { 0 })
}

fn fixed_json(vars: &VarTable, r: &PropagationResult) -> Value {
    let mut m = Map::new();
    for &(v, b) in &r.fixed {
        m.insert(vars.name(v).to_string(), json!(b));
    }
    Value::Object(m)
}

/// Twelve significant decimals, enough to hide float noise in reports.
fn round(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn kind(p: PropagatorArg) -> PropagatorKind {
    match p {
        PropagatorArg::Incremental => PropagatorKind::Incremental,
        PropagatorArg::Full => PropagatorKind::Full,
        PropagatorArg::Naive => PropagatorKind::Naive,
    }
}

fn check_theta(theta: f64, terms: &[ConstraintTerm]) -> Result<()> {
    let total: f64 = terms.iter().map(|t| t.reward).sum();
    if !(0.0..=total).contains(&theta) {
        bail!("--theta {theta} outside [0, {total}]");
    }
    Ok(())
}

/// Assembles the problem from the inputs and command-line overrides.
fn problem(args: &SolveArgs) -> Result<Problem> {
    let first = &args.inputs[0];
    let (vars, terms, mode, card) = if input::is_obdd(first) {
        let obdds = input::load_diagrams(&args.inputs)?;
        let vars = obdds[0].vars().clone();
        let terms: Vec<_> = obdds.into_iter().map(ConstraintTerm::unit).collect();
        (vars, terms, Mode::Maximize, None)
    } else {
        if args.inputs.len() > 1 {
            bail!("expected one problem file or several .obdd files");
        }
        let spec = input::load_spec(first, args.order_file.as_ref())?;
        let built = input::build(&spec, first)?;
        let vars = built.problem.vars().clone();
        let terms: Vec<_> = built
            .obdds
            .iter()
            .zip(&spec.queries)
            .map(|(o, q)| ConstraintTerm::new(Arc::clone(o), q.reward))
            .collect::<scop_core::Result<_>>()?;
        (vars, terms, spec.mode, spec.cardinality)
    };
    let card = args.cardinality.or(card);
    let mode = match args.theta {
        Some(t) => {
            check_theta(t, &terms)?;
            Mode::Constraint(t)
        }
        None => mode,
    };
    let (constraints, objective) = match mode {
        Mode::Maximize => (vec![], Some(terms)),
        Mode::Constraint(t) => (vec![StochasticConstraint::new(terms, t)], None),
    };
    Ok(Problem::new(vars, constraints, card, objective)?)
}

fn strategy_json(vars: &VarTable, s: &Strategy) -> Value {
    let mut m = Map::new();
    for (name, b) in s.named(vars) {
        m.insert(name.to_string(), json!(b));
    }
    Value::Object(m)
}

pub fn solve(args: &SolveArgs) -> Result<u8> {
    if args.delta.is_nan() || args.delta <= 0.0 {
        bail!("--delta must be positive");
    }
    let p = problem(args)?;
    let opts = SolverOptions {
        propagator: kind(args.propagator),
        delta: args.delta,
    };
    let (status, strategy, value, stats): (&str, Option<Strategy>, Option<f64>, SearchStats) =
        if p.objective().is_some() {
            let out = solve_opt_with(&p, &opts);
            match out.best {
                Some((s, v)) => ("optimal", Some(s), Some(v), out.stats),
                None => ("unsat", None, None, out.stats),
            }
        } else {
            let out = solve_sat_with(&p, &opts);
            let value = out.strategy.as_ref().map(|s| {
                let d = s.to_domains(p.vars());
                p.constraints()[0].value(&d)
            });
            let status = if out.strategy.is_some() {
                "sat"
            } else {
                "unsat"
            };
            (status, out.strategy, value, out.stats)
        };
    let vars = p.vars();
    if args.json {
        let doc = json!({
            "status": status,
            "strategy": strategy.as_ref().map(|s| strategy_json(vars, s)),
            "value": value,
            "stats": stats,
        });
        println!("{doc}");
    } else {
        println!("status: {status}");
        if let Some(v) = value {
            println!("value: {}", round(v));
        }
        if let Some(s) = &strategy {
            let items: Vec<String> = s
                .named(vars)
                .into_iter()
                .map(|(n, b)| format!("{n}={}", b as u8))
                .collect();
            println!("strategy: {}", items.join(" "));
        }
        println!(
            "nodes: {}  backtracks: {}  propagator calls: {}  node visits: {}  time: {:.3} ms",
            stats.nodes,
            stats.backtracks,
            stats.propagator_calls,
            stats.node_visits,
            stats.wall_time.as_secs_f64() * 1e3
        );
    }
    Ok(if strategy.is_some() { 0 } else { 2 })
}
