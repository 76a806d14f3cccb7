//! Domain-consistent propagation of `sum_i r_i * P(phi_i | sigma) >= theta`
//! over monotone diagrams.
//!
//! The derivative propagator ([`dc_propagate`]) makes one top-down pass for
//! path weights and one bottom-up pass for node values per diagram, summing
//! `pi(r) * (v(hi) - v(lo))` over the nodes of each free decision variable on
//! the way up. That sum is the drop in the optimistic value caused by setting
//! the variable to false, so every variable whose drop pushes the sum below
//! `theta` must be true. [`naive_propagate`] computes the same drops by
//! re-evaluating the diagrams once per free variable.

mod scratch;

use std::sync::Arc;

pub use scratch::{dc_propagate_scratch, PropagationScratch};

use crate::domain::DomainState;
use crate::error::{Error, Result};
use crate::evaluate::node_values;
use crate::obdd::{NodeId, Obdd};
use crate::vars::{VarId, VarKind};

/// Slack on every threshold comparison: a value within `EPSILON` below
/// `theta` still counts as satisfying.
pub const EPSILON: f64 = 1e-9;

/// Per-node sum over valid root paths of the product of arc weights.
#[derive(Clone, Debug, PartialEq)]
pub struct PathWeights(pub Vec<f64>);

impl PathWeights {
    pub fn get(&self, id: NodeId) -> f64 {
        self.0[id.index()]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeValues(pub Vec<f64>);

impl NodeValues {
    pub fn get(&self, id: NodeId) -> f64 {
        self.0[id.index()]
    }
}

/// Drop in the optimistic value when a free decision variable is set to
/// false. Only free variables carry an entry.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivatives(pub Vec<Option<f64>>);

impl Derivatives {
    pub fn get(&self, var: VarId) -> Option<f64> {
        self.0[var.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// No completion of the current domains satisfies the constraint.
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagationResult {
    pub status: Status,
    /// Variables newly forced, each free before the call. Empty on failure.
    pub fixed: Vec<(VarId, bool)>,
    /// Optimistic constraint value with every free variable set true.
    pub bound: f64,
    /// Diagram nodes and variables touched by the call.
    pub visits: u64,
}

impl PropagationResult {
    pub fn ok(fixed: Vec<(VarId, bool)>, bound: f64, visits: u64) -> Self {
        PropagationResult {
            status: Status::Ok,
            fixed,
            bound,
            visits,
        }
    }

    pub fn failed(bound: f64, visits: u64) -> Self {
        PropagationResult {
            status: Status::Failed,
            fixed: Vec::new(),
            bound,
            visits,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.status == Status::Failed
    }
}

/// One weighted probability in a constraint sum.
#[derive(Clone, Debug)]
pub struct ConstraintTerm {
    pub obdd: Arc<Obdd>,
    pub reward: f64,
}

impl ConstraintTerm {
    pub fn new(obdd: Arc<Obdd>, reward: f64) -> Result<Self> {
        if !(reward >= 0.0 && reward.is_finite()) {
            return Err(Error::Argument(format!(
                "reward {reward} must be finite and >= 0"
            )));
        }
        Ok(ConstraintTerm { obdd, reward })
    }

    pub fn unit(obdd: Arc<Obdd>) -> Self {
        ConstraintTerm { obdd, reward: 1.0 }
    }
}

#[inline]
pub(crate) fn arc_weight(obdd: &Obdd, domains: &DomainState, parent: NodeId, via_hi: bool) -> f64 {
    let var = obdd.node(parent).var;
    match obdd.vars().get(var).kind {
        VarKind::Stochastic { prob } => {
            if via_hi {
                prob
            } else {
                1.0 - prob
            }
        }
        VarKind::Decision => {
            if domains.takes_hi(var) == via_hi {
                1.0
            } else {
                0.0
            }
        }
    }
}

pub fn compute_path_weights(obdd: &Obdd, domains: &DomainState) -> PathWeights {
    let mut pi = vec![0.0; obdd.num_slots()];
    path_weights_into(obdd, domains, &mut pi);
    PathWeights(pi)
}

/// Top-down sweep; returns the number of internal nodes visited.
pub(crate) fn path_weights_into(obdd: &Obdd, domains: &DomainState, pi: &mut [f64]) -> u64 {
    pi.fill(0.0);
    pi[obdd.root().index()] = 1.0;
    let vars = obdd.vars();
    for id in obdd.internal_ids() {
        let n = obdd.node(id);
        let p = pi[id.index()];
        match vars.get(n.var).kind {
            VarKind::Decision => {
                if domains.takes_hi(n.var) {
                    pi[n.hi.index()] += p;
                } else {
                    pi[n.lo.index()] += p;
                }
            }
            VarKind::Stochastic { prob } => {
                pi[n.hi.index()] += prob * p;
                pi[n.lo.index()] += (1.0 - prob) * p;
            }
        }
    }
    obdd.num_internal() as u64
}

pub fn compute_values(obdd: &Obdd, domains: &DomainState) -> NodeValues {
    NodeValues(node_values(obdd, domains))
}

pub fn compute_derivatives(
    obdd: &Obdd,
    pi: &PathWeights,
    v: &NodeValues,
    domains: &DomainState,
) -> Derivatives {
    let mut out: Vec<Option<f64>> = vec![None; obdd.vars().len()];
    for var in domains.free_vars() {
        let delta = obdd
            .nodes_of(var)
            .iter()
            .map(|&r| {
                let n = obdd.node(r);
                pi.get(r) * (v.get(n.hi) - v.get(n.lo))
            })
            .sum();
        out[var.index()] = Some(delta);
    }
    Derivatives(out)
}

/// Bottom-up sweep that also adds `reward * pi(r) * (v(hi) - v(lo))` into
/// `deltas` for every node over a free decision variable.
fn values_with_derivatives(
    obdd: &Obdd,
    domains: &DomainState,
    pi: &[f64],
    reward: f64,
    v: &mut [f64],
    deltas: &mut [f64],
) -> u64 {
    v.fill(0.0);
    v[NodeId::TRUE.index()] = 1.0;
    let vars = obdd.vars();
    for id in obdd.internal_ids().rev() {
        let n = obdd.node(id);
        let (hi, lo) = (v[n.hi.index()], v[n.lo.index()]);
        v[id.index()] = match vars.get(n.var).kind {
            VarKind::Stochastic { prob } => prob * hi + (1.0 - prob) * lo,
            VarKind::Decision => {
                if domains.is_free(n.var) {
                    deltas[n.var.index()] += reward * pi[id.index()] * (hi - lo);
                }
                if domains.takes_hi(n.var) {
                    hi
                } else {
                    lo
                }
            }
        };
    }
    obdd.num_internal() as u64
}

/// Turns the aggregated value and per-variable drops into a result.
pub(crate) fn decide(
    domains: &DomainState,
    total: f64,
    deltas: &[f64],
    theta: f64,
    mut visits: u64,
) -> PropagationResult {
    if total < theta - EPSILON {
        return PropagationResult::failed(total, visits);
    }
    let mut fixed = Vec::new();
    for var in domains.free_vars() {
        visits += 1;
        if total - deltas[var.index()] < theta - EPSILON {
            fixed.push((var, true));
        }
    }
    PropagationResult::ok(fixed, total, visits)
}

/// Derivative-based propagation, linear in the total diagram size plus the
/// number of free variables.
pub fn dc_propagate(
    terms: &[ConstraintTerm],
    domains: &DomainState,
    theta: f64,
) -> PropagationResult {
    let mut deltas = vec![0.0; domains.len()];
    let mut total = 0.0;
    let mut visits = 0;
    let mut pi = Vec::new();
    let mut v = Vec::new();
    for term in terms {
        let obdd = &*term.obdd;
        pi.resize(obdd.num_slots(), 0.0);
        v.resize(obdd.num_slots(), 0.0);
        visits += path_weights_into(obdd, domains, &mut pi[..obdd.num_slots()]);
        visits += values_with_derivatives(
            obdd,
            domains,
            &pi[..obdd.num_slots()],
            term.reward,
            &mut v[..obdd.num_slots()],
            &mut deltas,
        );
        total += term.reward * v[obdd.root().index()];
    }
    decide(domains, total, &deltas, theta, visits)
}

/// Re-evaluates every diagram once per free variable with that variable set
/// to false. Same contract as [`dc_propagate`], quadratic cost.
pub fn naive_propagate(
    terms: &[ConstraintTerm],
    domains: &DomainState,
    theta: f64,
) -> PropagationResult {
    let score = |doms: &DomainState, visits: &mut u64| -> f64 {
        terms
            .iter()
            .map(|t| {
                *visits += t.obdd.num_internal() as u64;
                t.reward * node_values(&t.obdd, doms)[t.obdd.root().index()]
            })
            .sum()
    };
    let mut visits = 0;
    let total = score(domains, &mut visits);
    if total < theta - EPSILON {
        return PropagationResult::failed(total, visits);
    }
    let mut fixed = Vec::new();
    let mut probe = domains.clone();
    for var in domains.free_vars() {
        probe.fix(var, false).expect("free variable accepts false");
        if score(&probe, &mut visits) < theta - EPSILON {
            fixed.push((var, true));
        }
        probe.set(var, crate::domain::Domain::Both);
    }
    PropagationResult::ok(fixed, total, visits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obdd::Cube;
    use crate::vars::VarTable;

    #[test]
    fn terminal_root_has_trivial_weights() {
        let mut t = VarTable::new();
        t.add_decision("d").unwrap();
        let t = Arc::new(t);
        let o = Obdd::constant(t.clone(), true);
        let doms = DomainState::new(&t);
        let pi = compute_path_weights(&o, &doms);
        assert_eq!(pi.0.len(), 2);
        assert_eq!(pi.get(NodeId::TRUE), 1.0);
        let d = compute_derivatives(&o, &pi, &compute_values(&o, &doms), &doms);
        assert_eq!(d.get(VarId(0)), Some(0.0));
    }

    #[test]
    fn vacuous_threshold_fixes_nothing() {
        let mut t = VarTable::new();
        let d = t.add_decision("d").unwrap();
        let p = t.add_stochastic("p", 0.5).unwrap();
        let t = Arc::new(t);
        let o = Arc::new(Obdd::from_dnf(t.clone(), &[Cube::positive([d, p]).unwrap()]).unwrap());
        let doms = DomainState::new(&t);
        let terms = [ConstraintTerm::unit(o)];
        let r = dc_propagate(&terms, &doms, 0.0);
        assert_eq!(r.status, Status::Ok);
        assert!(r.fixed.is_empty());
        let r = dc_propagate(&terms, &doms, 0.4);
        assert_eq!(r.fixed, vec![(d, true)]);
        assert!(dc_propagate(&terms, &doms, 0.6).is_failed());
    }

    #[test]
    fn negative_reward_rejected() {
        let mut t = VarTable::new();
        t.add_decision("d").unwrap();
        let o = Arc::new(Obdd::constant(Arc::new(t), false));
        assert!(ConstraintTerm::new(o.clone(), -1.0).is_err());
        assert!(ConstraintTerm::new(o, f64::NAN).is_err());
    }
}
