mod common;

use std::collections::{BTreeSet, HashSet};

use common::*;
use proptest::prelude::*;
use rand::Rng;
use scop_core::generate::{random_network, rng};
use scop_core::model_io::{
    build_problem, connected, format_problem, parse_problem, simple_paths, st_path_dnf, Mode,
    ProbNetwork, ProblemSpec, Query, DEFAULT_PATH_CAP,
};
use scop_core::{evaluate, DomainState, Error, NodeId};

fn names(spec: &ProblemSpec, cube: &scop_core::Cube) -> BTreeSet<String> {
    let vars = spec.network.variable_table(None).unwrap();
    cube.literals()
        .iter()
        .map(|&(v, _)| vars.name(v).to_string())
        .collect()
}

#[test]
fn four_node_fixture() {
    let spec = parse_problem(&fixture("compression.problem")).unwrap();
    assert_eq!(spec.network.nodes().len(), 4);
    let probs: Vec<f64> = spec.network.edges().iter().map(|e| e.prob).collect();
    assert_eq!(probs, vec![0.7, 0.4, 0.8, 0.5, 0.1]);
    assert_eq!(spec.cardinality, Some(2));
    assert_eq!(spec.mode, Mode::Maximize);
    assert_eq!(spec.queries.len(), 2);
}

#[test]
fn empty_file_is_rejected() {
    assert!(matches!(parse_problem(""), Err(Error::Parse { .. })));
    assert!(matches!(
        parse_problem("# only a comment\n"),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn a_to_c_has_three_path_cubes() {
    let spec = parse_problem(&fixture("compression.problem")).unwrap();
    let vars = spec.network.variable_table(None).unwrap();
    let cubes = st_path_dnf(&spec.network, &vars, &spec.queries[0], DEFAULT_PATH_CAP).unwrap();
    let got: BTreeSet<BTreeSet<String>> = cubes.iter().map(|c| names(&spec, c)).collect();
    let want: BTreeSet<BTreeSet<String>> = [
        vec!["d(a,c)", "t(a,c)"],
        vec!["d(a,d)", "t(a,d)", "d(c,d)", "t(c,d)"],
        vec!["d(a,b)", "t(a,b)", "d(b,d)", "t(b,d)", "d(c,d)", "t(c,d)"],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(str::to_string).collect())
    .collect();
    assert_eq!(got, want);
}

#[test]
fn adjacent_and_disconnected_pairs() {
    let spec = parse_problem(
        "node u\nnode v\nnode w\nedge u v 0.3\nquery u v\nquery u w\nobjective maximize\n",
    )
    .unwrap();
    let vars = spec.network.variable_table(None).unwrap();
    let one = st_path_dnf(&spec.network, &vars, &spec.queries[0], 10).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(
        names(&spec, &one[0]),
        ["d(u,v)", "t(u,v)"].map(String::from).into()
    );
    assert!(st_path_dnf(&spec.network, &vars, &spec.queries[1], 10)
        .unwrap()
        .is_empty());
    let built = build_problem(&spec).unwrap();
    assert_eq!(built.obdds[1].root(), NodeId::FALSE);
}

#[test]
fn builds_maximization_problem() {
    let built = compression();
    let p = &built.problem;
    assert_eq!(p.objective().unwrap().len(), 2);
    assert!(p.objective().unwrap().iter().all(|t| t.reward == 1.0));
    assert_eq!(p.cardinality(), Some(2));
    assert!(p.constraints().is_empty());
    assert_eq!(p.vars().num_decisions(), 5);
    // default order: t then d per edge
    let order: Vec<&str> = p.vars().iter().map(|v| v.name.as_str()).collect();
    assert_eq!(&order[..4], &["t(a,b)", "d(a,b)", "t(a,c)", "d(a,c)"]);
}

#[test]
fn builds_threshold_problem() {
    let built =
        build_problem(&parse_problem(&fixture("compression_threshold.problem")).unwrap()).unwrap();
    let p = &built.problem;
    assert!(p.objective().is_none());
    assert_eq!(p.constraints().len(), 1);
    assert_eq!(p.constraints()[0].theta, 0.4);
    assert_eq!(p.constraints()[0].terms.len(), 2);
}

#[test]
fn reward_scales_term_value() {
    let text = fixture("compression.problem").replace("query a c reward 1", "query a c reward 2.5");
    let scaled = build_problem(&parse_problem(&text).unwrap()).unwrap();
    let base = compression();
    let d = DomainState::new(base.problem.vars());
    let t1 = &base.problem.objective().unwrap()[0];
    let t2 = &scaled.problem.objective().unwrap()[0];
    let v1 = t1.reward * evaluate(&t1.obdd, &d);
    let v2 = t2.reward * evaluate(&t2.obdd, &d);
    assert!((v2 - 2.5 * v1).abs() < 1e-12);
}

#[test]
fn order_directive_reorders() {
    let text = format!(
        "{}order {}\n",
        fixture("compression.problem"),
        ac_order().join(" ")
    );
    let built = build_problem(&parse_problem(&text).unwrap()).unwrap();
    assert_eq!(built.obdds[0].num_internal(), 12);
    assert_eq!(built.problem.vars().name(scop_core::VarId(0)), "t(c,d)");
}

#[test]
fn parse_errors_carry_line_numbers() {
    let base = "node a\nnode b\nedge a b 0.5\n";
    let cases = [
        (format!("{base}edge a z 0.5\n"), 4),
        (format!("{base}query a z\n"), 4),
        ("node a\nnode b\nedge a b -0.1\n".to_string(), 3),
        (
            format!("{base}query a b\nobjective maximize\nobjective maximize\n"),
            6,
        ),
        (format!("{base}cardinality <= 1\ncardinality <= 1\n"), 5),
        (format!("{base}query a b\nquery a b\n"), 5),
        (format!("{base}edge a a 0.5\n"), 4),
        (format!("{base}query a b\n"), 4),
    ];
    for (text, line) in cases {
        match parse_problem(&text) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
}

/// All simple paths by trying every ordered sequence of distinct
/// intermediate nodes.
fn brute_paths(net: &ProbNetwork, s: usize, t: usize) -> BTreeSet<BTreeSet<usize>> {
    let n = net.nodes().len();
    let edge = |u: usize, v: usize| {
        net.edges().iter().position(|e| {
            let (a, b) = (net.node_index(&e.u).unwrap(), net.node_index(&e.v).unwrap());
            (a, b) == (u, v) || (a, b) == (v, u)
        })
    };
    let mut out = BTreeSet::new();
    fn rec(
        path: &mut Vec<usize>,
        n: usize,
        t: usize,
        edge: &dyn Fn(usize, usize) -> Option<usize>,
        out: &mut BTreeSet<BTreeSet<usize>>,
    ) {
        let last = *path.last().unwrap();
        if let Some(e) = edge(last, t) {
            let mut set: BTreeSet<usize> =
                path.windows(2).map(|w| edge(w[0], w[1]).unwrap()).collect();
            set.insert(e);
            out.insert(set);
        }
        for next in 0..n {
            if next != t && !path.contains(&next) && edge(last, next).is_some() {
                path.push(next);
                rec(path, n, t, edge, out);
                path.pop();
            }
        }
    }
    rec(&mut vec![s], n, t, &edge, &mut out);
    out
}

fn random_spec(r: &mut impl Rng) -> ProblemSpec {
    let n = r.gen_range(2..=6);
    let m = r.gen_range(n - 1..=n * (n - 1) / 2);
    let network = random_network(r, n, m);
    let mut queries = vec![];
    for _ in 0..r.gen_range(1..=3) {
        let s = r.gen_range(0..n);
        let t = (s + r.gen_range(1..n)) % n;
        let (s, t) = (network.nodes()[s].clone(), network.nodes()[t].clone());
        if !queries
            .iter()
            .any(|q: &Query| q.source == s && q.target == t)
        {
            queries.push(Query {
                source: s,
                target: t,
                reward: (r.gen_range(1..40) as f64) / 8.0,
            });
        }
    }
    ProblemSpec {
        network,
        queries,
        cardinality: r.gen_bool(0.5).then(|| r.gen_range(0..5)),
        mode: if r.gen_bool(0.5) {
            Mode::Maximize
        } else {
            Mode::Constraint(r.gen_range(0..100) as f64 / 50.0)
        },
        order: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn paths_match_brute_force(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r);
        let net = &spec.network;
        for q in &spec.queries {
            let paths = simple_paths(net, &q.source, &q.target, DEFAULT_PATH_CAP).unwrap();
            let got: BTreeSet<BTreeSet<usize>> = paths.iter().map(|p| p.iter().copied().collect()).collect();
            prop_assert_eq!(got.len(), paths.len());
            let want = brute_paths(net, net.node_index(&q.source).unwrap(), net.node_index(&q.target).unwrap());
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r);
        let text = format_problem(&spec);
        let back = parse_problem(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(format_problem(&back), text);
    }

    #[test]
    fn compiled_query_is_connectivity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=4);
        let m = r.gen_range(n - 1..=(n * (n - 1) / 2).min(5));
        let mut spec = random_spec(&mut r);
        spec.network = random_network(&mut r, n, m);
        spec.queries = vec![Query { source: "n0".into(), target: format!("n{}", n - 1), reward: 1.0 }];
        let built = build_problem(&spec).unwrap();
        let o = &built.obdds[0];
        let vars = o.vars();
        for mask in 0u32..(1 << vars.len()) {
            let a: Vec<bool> = (0..vars.len()).map(|i| mask >> i & 1 == 1).collect();
            let usable: HashSet<usize> = spec.network.edges().iter().enumerate()
                .filter(|(_, e)| {
                    a[vars.lookup(&e.decision_name()).unwrap().index()]
                        && a[vars.lookup(&e.stochastic_name()).unwrap().index()]
                })
                .map(|(i, _)| i)
                .collect();
            prop_assert_eq!(truth(o, &a), connected(&spec.network, &spec.queries[0].source, &spec.queries[0].target, &usable));
        }
    }
}
