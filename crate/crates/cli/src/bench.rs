//! Side-by-side propagator comparison.
//!
//! Every instance is propagated in the same state: all decisions free except
//! the deepest one, which is set to false. The threshold is 90% of the
//! optimistic value in that state. The incremental row starts from a scratch
//! built with everything free and counts only the repair plus the
//! propagation.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use scop_core::baseline::{bounds_propagate, decompose};
use scop_core::generate::{random_network, rng};
use scop_core::model_io::{build_problem, Mode, ProblemSpec, Query};
use scop_core::propagate::dc_propagate_scratch;
use scop_core::{
    dc_propagate, naive_propagate, ConstraintTerm, DomainState, PropagationResult,
    PropagationScratch,
};

use crate::input;
use crate::BenchArgs;

struct Instance {
    name: String,
    terms: Vec<ConstraintTerm>,
}

struct Row {
    instance: String,
    decisions: usize,
    nodes: usize,
    propagator: &'static str,
    status: &'static str,
    fixed: usize,
    visits: u64,
    micros: f64,
}

/// Connected network with `edges` edges on roughly `edges / 2 + 2` nodes and
/// one query between the first and last node.
fn generated(seed: u64, size: usize, k: usize) -> Result<Instance> {
    let nodes = (size / 2 + 2).min(size + 1).max(2);
    let inst_seed = seed ^ ((size as u64) << 32) ^ k as u64;
    let network = random_network(&mut rng(inst_seed), nodes, size);
    let target = network.nodes()[nodes - 1].clone();
    let spec = ProblemSpec {
        network,
        queries: vec![Query {
            source: "n0".into(),
            target,
            reward: 1.0,
        }],
        cardinality: None,
        mode: Mode::Maximize,
        order: None,
    };
    let built = build_problem(&spec)?;
    Ok(Instance {
        name: format!("n{size}-{k}"),
        terms: built.obdds.into_iter().map(ConstraintTerm::unit).collect(),
    })
}

fn stored(dir: &Path) -> Result<Vec<Result<Instance>>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "problem"))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| {
            let spec = input::load_spec(&p, None)?;
            let built = input::build(&spec, &p)?;
            let terms = built
                .obdds
                .into_iter()
                .zip(&spec.queries)
                .map(|(o, q)| ConstraintTerm::new(o, q.reward))
                .collect::<scop_core::Result<_>>()?;
            Ok(Instance {
                name: p
                    .file_stem()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned(),
                terms,
            })
        })
        .collect())
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e6)
}

fn measure(inst: &Instance) -> Vec<Row> {
    let vars = inst.terms[0].obdd.vars().clone();
    let free = DomainState::new(&vars);
    let mut state = free.clone();
    let deepest = vars.decisions().last();
    if let Some(d) = deepest {
        state.fix(d, false).expect("free");
    }
    let optimistic: f64 = inst
        .terms
        .iter()
        .map(|t| t.reward * scop_core::evaluate(&t.obdd, &state))
        .sum();
    let theta = 0.9 * optimistic;
    let terms = inst.terms.as_slice();

    let (naive, t_naive) = timed(|| naive_propagate(terms, &state, theta));
    let (dc, t_dc) = timed(|| dc_propagate(terms, &state, theta));
    let mut scratches: Vec<PropagationScratch> = terms
        .iter()
        .map(|t| PropagationScratch::new(t, &free))
        .collect();
    let (inc, t_inc) = timed(|| {
        let mut repair = 0;
        if let Some(d) = deepest {
            for s in scratches.iter_mut() {
                repair += s.incremental_fix(d, false).expect("free");
            }
        }
        let mut r = dc_propagate_scratch(&scratches, theta).expect("at least one term");
        r.visits += repair;
        r
    });
    let system = decompose(terms, theta);
    let (base, t_base) = timed(|| bounds_propagate(&system, &state).result);

    let nodes = terms.iter().map(|t| t.obdd.num_internal()).sum();
    let row = |propagator, r: &PropagationResult, micros| Row {
        instance: inst.name.clone(),
        decisions: vars.num_decisions(),
        nodes,
        propagator,
        status: if r.is_failed() { "failed" } else { "ok" },
        fixed: r.fixed.len(),
        visits: r.visits,
        micros,
    };
    vec![
        row("naive", &naive, t_naive),
        row("derivative", &dc, t_dc),
        row("incremental", &inc, t_inc),
        row("baseline", &base, t_base),
    ]
}

pub fn run(args: &BenchArgs) -> Result<u8> {
    let instances: Vec<Result<Instance>> = match &args.dir {
        Some(dir) => stored(dir)?,
        None => args
            .size
            .iter()
            .flat_map(|&s| (0..args.instances).map(move |k| (s, k)))
            .map(|(s, k)| generated(args.seed, s, k))
            .collect(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .context("cannot start worker pool")?;
    let results: Vec<Result<Vec<Row>>> = pool.install(|| {
        instances
            .into_par_iter()
            .map(|i| i.map(|inst| measure(&inst)))
            .collect()
    });

    let mut out = String::new();
    let timing = !args.no_timing;
    if args.csv {
        out.push_str("instance,decisions,nodes,propagator,status,fixed,visits");
        out.push_str(if timing { ",time_us\n" } else { "\n" });
    } else {
        let _ = write!(
            out,
            "{:<12} {:>9} {:>6} {:<12} {:<7} {:>5} {:>8}",
            "instance", "decisions", "nodes", "propagator", "status", "fixed", "visits"
        );
        if timing {
            let _ = write!(out, " {:>10}", "time_us");
        }
        out.push('\n');
    }
    for r in results {
        let rows = match r {
            Ok(rows) => rows,
            Err(e) => {
                eprintln!("skipped instance: {e:#}");
                continue;
            }
        };
        for r in rows {
            if args.csv {
                let _ = write!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.instance, r.decisions, r.nodes, r.propagator, r.status, r.fixed, r.visits
                );
                if timing {
                    let _ = write!(out, ",{:.1}", r.micros);
                }
            } else {
                let _ = write!(
                    out,
                    "{:<12} {:>9} {:>6} {:<12} {:<7} {:>5} {:>8}",
                    r.instance, r.decisions, r.nodes, r.propagator, r.status, r.fixed, r.visits
                );
                if timing {
                    let _ = write!(out, " {:>10.1}", r.micros);
                }
            }
            out.push('\n');
        }
    }
    print!("{out}");
    Ok(0)
}
