//! Probabilistic networks, problem files and s-t connectivity formulas.
//!
//! Problem file grammar, one directive per line, `#` starts a comment:
//!
//! ```text
//! node <name>
//! edge <u> <v> <p>
//! query <s> <t> [reward <r>]
//! cardinality <= <N>
//! objective maximize | constraint >= <theta>
//! order <varname> ...
//! ```
//!
//! Nodes must be declared before edges and queries use them. Every edge
//! `u v` owns a stochastic variable `t(u,v)` with the edge probability and a
//! decision variable `d(u,v)`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::obdd::{Cube, Obdd, ObddBuilder};
use crate::propagate::ConstraintTerm;
use crate::solver::{Problem, StochasticConstraint};
use crate::vars::{VarKind, VarTable};

pub const DEFAULT_PATH_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: String,
    pub v: String,
    pub prob: f64,
}

impl Edge {
    pub fn stochastic_name(&self) -> String {
        format!("t({},{})", self.u, self.v)
    }

    pub fn decision_name(&self) -> String {
        format!("d({},{})", self.u, self.v)
    }
}

/// Undirected network with independent edge probabilities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProbNetwork {
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

impl ProbNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str) -> Result<usize> {
        if name.is_empty() || name.contains(|c: char| c.is_whitespace() || "(),".contains(c)) {
            return Err(Error::Argument(format!("bad node name {name:?}")));
        }
        if self.node_index(name).is_some() {
            return Err(Error::Argument(format!("duplicate node {name}")));
        }
        self.nodes.push(name.to_string());
        Ok(self.nodes.len() - 1)
    }

    pub fn add_edge(&mut self, u: &str, v: &str, prob: f64) -> Result<usize> {
        for n in [u, v] {
            if self.node_index(n).is_none() {
                return Err(Error::Argument(format!("unknown node {n}")));
            }
        }
        if u == v {
            return Err(Error::Argument(format!("self-loop on {u}")));
        }
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::Argument(format!("probability {prob} outside [0,1]")));
        }
        if self
            .edges
            .iter()
            .any(|e| (e.u == u && e.v == v) || (e.u == v && e.v == u))
        {
            return Err(Error::Argument(format!("duplicate edge {u} {v}")));
        }
        self.edges.push(Edge {
            u: u.to_string(),
            v: v.to_string(),
            prob,
        });
        Ok(self.edges.len() - 1)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Per node, `(neighbour, edge index)` in edge declaration order.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            let u = self.node_index(&e.u).expect("edge endpoints exist");
            let v = self.node_index(&e.v).expect("edge endpoints exist");
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
        adj
    }

    /// Two variables per edge, `t` before `d`, edges in declaration order.
    /// Names listed in `order` are moved to the front.
    pub fn variable_table(&self, order: Option<&[String]>) -> Result<VarTable> {
        let decls: Vec<(String, VarKind)> = self
            .edges
            .iter()
            .flat_map(|e| {
                [
                    (e.stochastic_name(), VarKind::Stochastic { prob: e.prob }),
                    (e.decision_name(), VarKind::Decision),
                ]
            })
            .collect();
        VarTable::from_decls(&decls, order)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub source: String,
    pub target: String,
    pub reward: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Maximize,
    /// Weighted sum of the queries must reach the threshold.
    Constraint(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub network: ProbNetwork,
    pub queries: Vec<Query>,
    pub cardinality: Option<usize>,
    pub mode: Mode,
    pub order: Option<Vec<String>>,
}

fn number(line: usize, tok: Option<&str>, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    let x: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("bad {what} {tok:?}")))?;
    if !x.is_finite() {
        return Err(Error::parse(line, format!("bad {what} {tok:?}")));
    }
    Ok(x)
}

fn no_more<'a>(line: usize, mut toks: impl Iterator<Item = &'a str>) -> Result<()> {
    match toks.next() {
        Some(t) => Err(Error::parse(line, format!("unexpected token {t:?}"))),
        None => Ok(()),
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec> {
    let mut network = ProbNetwork::new();
    let mut queries: Vec<Query> = Vec::new();
    let mut cardinality = None;
    let mut mode = None;
    let mut order: Option<(usize, Vec<String>)> = None;
    let mut last = 0;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        last = ln;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(head) = toks.next() else { continue };
        match head {
            "node" => {
                let name = toks
                    .next()
                    .ok_or_else(|| Error::parse(ln, "missing node name"))?;
                no_more(ln, toks)?;
                network.add_node(name).map_err(|e| reparse(ln, e))?;
            }
            "edge" => {
                let u = toks
                    .next()
                    .ok_or_else(|| Error::parse(ln, "missing edge endpoint"))?;
                let v = toks
                    .next()
                    .ok_or_else(|| Error::parse(ln, "missing edge endpoint"))?;
                let p = number(ln, toks.next(), "probability")?;
                no_more(ln, toks)?;
                network.add_edge(u, v, p).map_err(|e| reparse(ln, e))?;
            }
            "query" => {
                let s = toks
                    .next()
                    .ok_or_else(|| Error::parse(ln, "missing query source"))?;
                let t = toks
                    .next()
                    .ok_or_else(|| Error::parse(ln, "missing query target"))?;
                let reward = match toks.next() {
                    None => 1.0,
                    Some("reward") => number(ln, toks.next(), "reward")?,
                    Some(other) => {
                        return Err(Error::parse(ln, format!("unexpected token {other:?}")))
                    }
                };
                no_more(ln, toks)?;
                for n in [s, t] {
                    if network.node_index(n).is_none() {
                        return Err(Error::parse(ln, format!("unknown node {n}")));
                    }
                }
                if s == t {
                    return Err(Error::parse(ln, "query source equals target"));
                }
                if reward < 0.0 {
                    return Err(Error::parse(ln, "reward must be >= 0"));
                }
                if queries.iter().any(|q| q.source == s && q.target == t) {
                    return Err(Error::parse(ln, format!("duplicate query {s} {t}")));
                }
                queries.push(Query {
                    source: s.to_string(),
                    target: t.to_string(),
                    reward,
                });
            }
            "cardinality" => {
                if toks.next() != Some("<=") {
                    return Err(Error::parse(ln, "expected cardinality <= N"));
                }
                let tok = toks
                    .next()
                    .ok_or_else(|| Error::parse(ln, "missing bound"))?;
                let n: usize = tok
                    .parse()
                    .map_err(|_| Error::parse(ln, format!("bad bound {tok:?}")))?;
                no_more(ln, toks)?;
                if cardinality.replace(n).is_some() {
                    return Err(Error::parse(ln, "duplicate cardinality directive"));
                }
            }
            "objective" => {
                if toks.next() != Some("maximize") {
                    return Err(Error::parse(ln, "expected objective maximize"));
                }
                no_more(ln, toks)?;
                if mode.replace(Mode::Maximize).is_some() {
                    return Err(Error::parse(ln, "duplicate objective/constraint directive"));
                }
            }
            "constraint" => {
                if toks.next() != Some(">=") {
                    return Err(Error::parse(ln, "expected constraint >= theta"));
                }
                let theta = number(ln, toks.next(), "threshold")?;
                no_more(ln, toks)?;
                if mode.replace(Mode::Constraint(theta)).is_some() {
                    return Err(Error::parse(ln, "duplicate objective/constraint directive"));
                }
            }
            "order" => {
                let names: Vec<String> = toks.map(str::to_string).collect();
                if names.is_empty() {
                    return Err(Error::parse(ln, "empty order"));
                }
                if order.replace((ln, names)).is_some() {
                    return Err(Error::parse(ln, "duplicate order directive"));
                }
            }
            other => return Err(Error::parse(ln, format!("unknown directive {other:?}"))),
        }
    }

    let end = last.max(1);
    if network.nodes().is_empty() {
        return Err(Error::parse(end, "no nodes"));
    }
    if queries.is_empty() {
        return Err(Error::parse(end, "no queries"));
    }
    let mode =
        mode.ok_or_else(|| Error::parse(end, "missing objective or constraint directive"))?;
    let order = match order {
        Some((ln, names)) => {
            network
                .variable_table(Some(&names))
                .map_err(|e| reparse(ln, e))?;
            Some(names)
        }
        None => None,
    };
    Ok(ProblemSpec {
        network,
        queries,
        cardinality,
        mode,
        order,
    })
}

fn reparse(line: usize, e: Error) -> Error {
    match e {
        Error::Argument(msg) | Error::Structure(msg) => Error::parse(line, msg),
        other => other,
    }
}

/// Inverse of [`parse_problem`].
pub fn format_problem(spec: &ProblemSpec) -> String {
    let mut out = String::new();
    for n in spec.network.nodes() {
        writeln!(out, "node {n}").unwrap();
    }
    for e in spec.network.edges() {
        writeln!(out, "edge {} {} {}", e.u, e.v, e.prob).unwrap();
    }
    for q in &spec.queries {
        writeln!(out, "query {} {} reward {}", q.source, q.target, q.reward).unwrap();
    }
    if let Some(n) = spec.cardinality {
        writeln!(out, "cardinality <= {n}").unwrap();
    }
    match spec.mode {
        Mode::Maximize => out.push_str("objective maximize\n"),
        Mode::Constraint(theta) => writeln!(out, "constraint >= {theta}").unwrap(),
    }
    if let Some(order) = &spec.order {
        writeln!(out, "order {}", order.join(" ")).unwrap();
    }
    out
}

/// Every simple path from `source` to `target` as a list of edge indices,
/// found by depth-first search. More than `cap` paths is an error.
pub fn simple_paths(
    network: &ProbNetwork,
    source: &str,
    target: &str,
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    let s = network
        .node_index(source)
        .ok_or_else(|| Error::Argument(format!("unknown node {source}")))?;
    let t = network
        .node_index(target)
        .ok_or_else(|| Error::Argument(format!("unknown node {target}")))?;
    if s == t {
        return Err(Error::Argument("source equals target".into()));
    }
    let adj = network.adjacency();
    let mut paths = Vec::new();
    let mut on_path = vec![false; adj.len()];
    let mut edges = Vec::new();
    on_path[s] = true;
    // explicit stack of (node, next neighbour position)
    let mut stack = vec![(s, 0usize)];
    while let Some(top) = stack.last_mut() {
        let (u, pos) = *top;
        if pos == adj[u].len() {
            stack.pop();
            on_path[u] = false;
            edges.pop();
            continue;
        }
        top.1 += 1;
        let (w, e) = adj[u][pos];
        if on_path[w] {
            continue;
        }
        if w == t {
            let mut path = edges.clone();
            path.push(e);
            paths.push(path);
            if paths.len() > cap {
                return Err(Error::Capacity(format!(
                    "more than {cap} simple paths from {source} to {target}; use a smaller network"
                )));
            }
            continue;
        }
        on_path[w] = true;
        edges.push(e);
        stack.push((w, 0));
    }
    Ok(paths)
}

/// One cube `d_e & t_e` over all edges of each simple path.
pub fn st_path_dnf(
    network: &ProbNetwork,
    vars: &VarTable,
    query: &Query,
    cap: usize,
) -> Result<Vec<Cube>> {
    let lookup = |name: String| {
        vars.lookup(&name)
            .ok_or_else(|| Error::Argument(format!("variable {name} not in table")))
    };
    simple_paths(network, &query.source, &query.target, cap)?
        .into_iter()
        .map(|path| {
            let mut lits = Vec::with_capacity(2 * path.len());
            for e in path {
                let edge = &network.edges()[e];
                lits.push(lookup(edge.decision_name())?);
                lits.push(lookup(edge.stochastic_name())?);
            }
            Cube::positive(lits)
        })
        .collect()
}

/// A compiled problem together with one diagram per query.
#[derive(Clone, Debug)]
pub struct BuiltProblem {
    pub problem: Problem,
    pub obdds: Vec<Arc<Obdd>>,
}

pub fn build_problem(spec: &ProblemSpec) -> Result<BuiltProblem> {
    build_problem_with_cap(spec, DEFAULT_PATH_CAP)
}

pub fn build_problem_with_cap(spec: &ProblemSpec, cap: usize) -> Result<BuiltProblem> {
    let vars = Arc::new(spec.network.variable_table(spec.order.as_deref())?);
    let mut builder = ObddBuilder::new(vars.clone());
    let mut obdds = Vec::with_capacity(spec.queries.len());
    let mut terms = Vec::with_capacity(spec.queries.len());
    for q in &spec.queries {
        let cubes = st_path_dnf(&spec.network, &vars, q, cap)?;
        let root = builder.from_dnf(&cubes)?;
        let obdd = Arc::new(builder.extract(root));
        terms.push(ConstraintTerm::new(obdd.clone(), q.reward)?);
        obdds.push(obdd);
    }
    let (constraints, objective) = match spec.mode {
        Mode::Maximize => (Vec::new(), Some(terms)),
        Mode::Constraint(theta) => (vec![StochasticConstraint::new(terms, theta)], None),
    };
    let problem = Problem::new(vars, constraints, spec.cardinality, objective)?;
    Ok(BuiltProblem { problem, obdds })
}

/// Queries by name, for reports: `"a->c"`.
pub fn query_label(q: &Query) -> String {
    format!("{}->{}", q.source, q.target)
}

/// Brute-force reachability used by tests and the CLI: is there a path from
/// source to target using only edges whose index is in `usable`?
pub fn connected(
    network: &ProbNetwork,
    source: &str,
    target: &str,
    usable: &HashSet<usize>,
) -> bool {
    let (Some(s), Some(t)) = (network.node_index(source), network.node_index(target)) else {
        return false;
    };
    let adj = network.adjacency();
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(u) = stack.pop() {
        if u == t {
            return true;
        }
        for &(w, e) in &adj[u] {
            if usable.contains(&e) && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    false
}
