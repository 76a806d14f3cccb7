//! Line-oriented exchange format.
//!
//! ```text
//! # comment
//! var r stochastic 0.9
//! var x decision
//! order x r            # optional; declaration order otherwise
//! node 2 x 0 1         # node <id> <var> <lo> <hi>, children defined first
//! node 3 r 0 2
//! root 3
//! ```

use std::collections::HashMap;
use std::fmt::Write;
use std::sync::Arc;

use super::{NodeId, Obdd, ObddBuilder};
use crate::error::{Error, Result};
use crate::vars::{VarKind, VarTable};

/// Writes the diagram with children before parents so that the output loads
/// back in one pass.
pub fn dump_obdd(obdd: &Obdd) -> String {
    let vars = obdd.vars();
    let mut out = String::new();
    let _ = writeln!(out, "# obdd: {} internal nodes", obdd.num_internal());
    for v in vars.iter() {
        match v.kind {
            VarKind::Decision => {
                let _ = writeln!(out, "var {} decision", v.name);
            }
            VarKind::Stochastic { prob } => {
                let _ = writeln!(out, "var {} stochastic {}", v.name, prob);
            }
        }
    }
    for id in obdd.internal_ids().rev() {
        let n = obdd.node(id);
        let _ = writeln!(out, "node {} {} {} {}", id, vars.name(n.var), n.lo, n.hi);
    }
    let _ = writeln!(out, "root {}", obdd.root());
    out
}

struct NodeLine<'a> {
    line: usize,
    id: &'a str,
    var: &'a str,
    lo: &'a str,
    hi: &'a str,
}

pub fn load_obdd(text: &str) -> Result<Obdd> {
    let mut decls: Vec<(String, VarKind)> = Vec::new();
    let mut decl_lines: HashMap<String, usize> = HashMap::new();
    let mut order: Option<(usize, Vec<String>)> = None;
    let mut node_lines: Vec<NodeLine<'_>> = Vec::new();
    let mut root: Option<(usize, &str)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["var", name, "decision"] => {
                if decl_lines.insert(name.to_string(), line).is_some() {
                    return Err(Error::parse(
                        line,
                        format!("variable `{name}` declared twice"),
                    ));
                }
                decls.push((name.to_string(), VarKind::Decision));
            }
            ["var", name, "stochastic", p] => {
                let prob: f64 = p
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad probability `{p}`")))?;
                if !(0.0..=1.0).contains(&prob) {
                    return Err(Error::parse(
                        line,
                        format!("probability {prob} outside [0,1]"),
                    ));
                }
                if decl_lines.insert(name.to_string(), line).is_some() {
                    return Err(Error::parse(
                        line,
                        format!("variable `{name}` declared twice"),
                    ));
                }
                decls.push((name.to_string(), VarKind::Stochastic { prob }));
            }
            ["order", names @ ..] => {
                if order.is_some() {
                    return Err(Error::parse(line, "duplicate order directive"));
                }
                order = Some((line, names.iter().map(|s| s.to_string()).collect()));
            }
            ["node", id, var, lo, hi] => node_lines.push(NodeLine {
                line,
                id,
                var,
                lo,
                hi,
            }),
            ["root", id] => {
                if root.is_some() {
                    return Err(Error::parse(line, "duplicate root directive"));
                }
                root = Some((line, id));
            }
            _ => {
                return Err(Error::parse(
                    line,
                    format!("unrecognised line `{}`", raw.trim()),
                ))
            }
        }
    }

    let vars = match &order {
        Some((line, names)) => VarTable::from_decls(&decls, Some(names))
            .map_err(|e| Error::parse(*line, e.to_string()))?,
        None => VarTable::from_decls(&decls, None).map_err(|e| Error::parse(1, e.to_string()))?,
    };
    let vars = Arc::new(vars);
    let mut builder = ObddBuilder::new(vars.clone());
    let mut ids: HashMap<u32, (NodeId, usize)> = HashMap::new();

    let resolve = |ids: &HashMap<u32, (NodeId, usize)>, tok: &str, line: usize| -> Result<NodeId> {
        let raw: u32 = tok
            .parse()
            .map_err(|_| Error::parse(line, format!("bad node id `{tok}`")))?;
        match raw {
            0 => Ok(NodeId::FALSE),
            1 => Ok(NodeId::TRUE),
            _ => ids
                .get(&raw)
                .map(|e| e.0)
                .ok_or_else(|| Error::parse(line, format!("reference to undefined node {raw}"))),
        }
    };

    for nl in &node_lines {
        let line = nl.line;
        let id: u32 = nl
            .id
            .parse()
            .map_err(|_| Error::parse(line, format!("bad node id `{}`", nl.id)))?;
        if id < 2 {
            return Err(Error::parse(line, "ids 0 and 1 are reserved for terminals"));
        }
        if ids.contains_key(&id) {
            return Err(Error::parse(line, format!("duplicate node id {id}")));
        }
        let var = vars
            .lookup(nl.var)
            .ok_or_else(|| Error::parse(line, format!("unknown variable `{}`", nl.var)))?;
        let lo = resolve(&ids, nl.lo, line)?;
        let hi = resolve(&ids, nl.hi, line)?;
        if lo == hi {
            return Err(Error::parse(
                line,
                format!("node {id} is redundant (lo = hi)"),
            ));
        }
        let before = builder.num_slots();
        let made = builder.mk_node(var, lo, hi).map_err(|_| {
            Error::parse(
                line,
                format!(
                    "node {id} is unordered: `{}` must precede its children",
                    nl.var
                ),
            )
        })?;
        if builder.num_slots() == before {
            return Err(Error::parse(
                line,
                format!("node {id} duplicates an earlier node"),
            ));
        }
        ids.insert(id, (made, line));
    }

    let (root_line, root_tok) =
        root.ok_or_else(|| Error::parse(text.lines().count().max(1), "missing root directive"))?;
    let root = resolve(&ids, root_tok, root_line)?;
    let obdd = builder.extract(root);
    if obdd.num_internal() != ids.len() {
        let mut reach = vec![false; builder.num_slots()];
        mark_reachable(&builder, root, &mut reach);
        let first = ids
            .values()
            .filter(|(nid, _)| !reach[nid.index()])
            .map(|&(_, l)| l)
            .min()
            .unwrap_or(root_line);
        return Err(Error::parse(first, "node is unreachable from the root"));
    }
    Ok(obdd)
}

fn mark_reachable(builder: &ObddBuilder, root: NodeId, reach: &mut [bool]) {
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if id.is_terminal() || reach[id.index()] {
            continue;
        }
        reach[id.index()] = true;
        let (lo, hi) = builder.children(id);
        stack.push(lo);
        stack.push(hi);
    }
}

/// Loads several diagrams that must declare identical variable tables; the
/// results share one table.
pub fn load_obdds(texts: &[&str]) -> Result<Vec<Obdd>> {
    let mut out: Vec<Obdd> = Vec::with_capacity(texts.len());
    for (i, text) in texts.iter().enumerate() {
        let o = load_obdd(text)?;
        if let Some(first) = out.first() {
            if **first.vars() != **o.vars() {
                return Err(Error::Argument(format!(
                    "diagram {} declares different variables than diagram 1",
                    i + 1
                )));
            }
            let shared = first.vars().clone();
            out.push(o.with_vars(shared));
        } else {
            out.push(o);
        }
    }
    Ok(out)
}
