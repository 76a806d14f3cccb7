//! Weighted model counting on a diagram.

use crate::domain::DomainState;
use crate::error::{Error, Result};
use crate::obdd::{NodeId, Obdd};
use crate::vars::VarKind;

/// Value of every node under `domains`, free decisions counted as true.
/// Terminal slots hold 0 and 1.
pub fn node_values(obdd: &Obdd, domains: &DomainState) -> Vec<f64> {
    let vars = obdd.vars();
    let mut v = vec![0.0; obdd.num_slots()];
    v[NodeId::TRUE.index()] = 1.0;
    for id in obdd.internal_ids().rev() {
        let n = obdd.node(id);
        v[id.index()] = match vars.get(n.var).kind {
            VarKind::Stochastic { prob } => prob * v[n.hi.index()] + (1.0 - prob) * v[n.lo.index()],
            VarKind::Decision => {
                if domains.takes_hi(n.var) {
                    v[n.hi.index()]
                } else {
                    v[n.lo.index()]
                }
            }
        };
    }
    v
}

/// Probability of the diagram's event under `domains`. With every decision
/// fixed this is the conditional probability of the event given the strategy;
/// with free decisions it is the optimistic bound reached by setting them true.
pub fn evaluate(obdd: &Obdd, domains: &DomainState) -> f64 {
    node_values(obdd, domains)[obdd.root().index()]
}

/// Weight of one complete assignment: the product of the stochastic
/// variables' weights if the diagram accepts it, zero otherwise.
pub fn model_probability(obdd: &Obdd, assignment: &[Option<bool>]) -> Result<f64> {
    let vars = obdd.vars();
    if assignment.len() != vars.len() {
        return Err(Error::Argument(format!(
            "assignment covers {} variables, table has {}",
            assignment.len(),
            vars.len()
        )));
    }
    let mut full = Vec::with_capacity(assignment.len());
    for (info, a) in vars.iter().zip(assignment) {
        match a {
            Some(b) => full.push(*b),
            None => {
                return Err(Error::Argument(format!(
                    "variable `{}` is unassigned",
                    info.name
                )))
            }
        }
    }
    if !obdd.eval_bool(&full) {
        return Ok(0.0);
    }
    Ok(vars
        .iter()
        .zip(&full)
        .map(|(info, &b)| match info.kind {
            VarKind::Stochastic { prob } => {
                if b {
                    prob
                } else {
                    1.0 - prob
                }
            }
            VarKind::Decision => 1.0,
        })
        .product())
}
