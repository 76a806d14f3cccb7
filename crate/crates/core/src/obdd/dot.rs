use std::fmt::Write;

use super::Obdd;
use crate::vars::VarKind;

/// Graphviz rendering: dashed lo arcs, solid hi arcs, stochastic variables as
/// circles and decision variables as boxes.
pub fn to_dot(obdd: &Obdd) -> String {
    let vars = obdd.vars();
    let mut out = String::from("digraph obdd {\n");
    out.push_str("  n0 [label=\"0\", shape=plaintext];\n");
    out.push_str("  n1 [label=\"1\", shape=plaintext];\n");
    for id in obdd.internal_ids() {
        let n = obdd.node(id);
        let info = vars.get(n.var);
        let shape = match info.kind {
            VarKind::Stochastic { .. } => "circle",
            VarKind::Decision => "box",
        };
        let _ = writeln!(out, "  n{id} [label=\"{}\", shape={shape}];", info.name);
        match info.kind {
            VarKind::Stochastic { prob } => {
                let _ = writeln!(out, "  n{id} -> n{} [style=solid, label=\"{prob}\"];", n.hi);
                let _ = writeln!(
                    out,
                    "  n{id} -> n{} [style=dashed, label=\"{}\"];",
                    n.lo,
                    round_weight(1.0 - prob)
                );
            }
            VarKind::Decision => {
                let _ = writeln!(out, "  n{id} -> n{} [style=solid];", n.hi);
                let _ = writeln!(out, "  n{id} -> n{} [style=dashed];", n.lo);
            }
        }
    }
    out.push_str("}\n");
    out
}

fn round_weight(w: f64) -> f64 {
    (w * 1e12).round() / 1e12
}
