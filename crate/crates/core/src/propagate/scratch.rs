use std::sync::Arc;

use super::{arc_weight, decide, path_weights_into, ConstraintTerm, PropagationResult};
use crate::domain::{Domain, DomainState};
use crate::error::{Error, Result};
use crate::evaluate::node_values;
use crate::obdd::{NodeId, Obdd};
use crate::vars::{VarId, VarKind};

#[derive(Clone, Copy, Debug)]
enum Undo {
    Weight(u32, f64),
    Value(u32, f64),
    Domain(VarId),
}

/// Path weights and node values of one term, kept consistent with a private
/// copy of the domains while variables are fixed one at a time.
///
/// Fixing a variable true changes nothing, since free and true decisions
/// follow the same arc. Fixing it false only changes path weights strictly
/// below the variable's level and values at or above it; those two regions
/// are contiguous id ranges of the frozen diagram. Every overwrite is trailed
/// so [`restore`](Self::restore) undoes back to the last [`save`](Self::save).
#[derive(Clone, Debug)]
pub struct PropagationScratch {
    obdd: Arc<Obdd>,
    reward: f64,
    domains: DomainState,
    pi: Vec<f64>,
    v: Vec<f64>,
    trail: Vec<Undo>,
    marks: Vec<usize>,
}

impl PropagationScratch {
    /// Runs both full passes under `domains`.
    pub fn new(term: &ConstraintTerm, domains: &DomainState) -> Self {
        let obdd = term.obdd.clone();
        let mut pi = vec![0.0; obdd.num_slots()];
        path_weights_into(&obdd, domains, &mut pi);
        let v = node_values(&obdd, domains);
        PropagationScratch {
            obdd,
            reward: term.reward,
            domains: domains.clone(),
            pi,
            v,
            trail: Vec::new(),
            marks: Vec::new(),
        }
    }

    pub fn obdd(&self) -> &Arc<Obdd> {
        &self.obdd
    }

    pub fn reward(&self) -> f64 {
        self.reward
    }

    pub fn domains(&self) -> &DomainState {
        &self.domains
    }

    pub fn path_weights(&self) -> &[f64] {
        &self.pi
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn root_value(&self) -> f64 {
        self.v[self.obdd.root().index()]
    }

    pub fn save(&mut self) {
        self.marks.push(self.trail.len());
    }

    /// Undoes every change since the matching [`save`](Self::save).
    pub fn restore(&mut self) {
        let mark = self.marks.pop().expect("restore without save");
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Undo::Weight(i, old) => self.pi[i as usize] = old,
                Undo::Value(i, old) => self.v[i as usize] = old,
                Undo::Domain(var) => self.domains.set(var, Domain::Both),
            }
        }
    }

    /// Fixes a free decision variable and repairs the affected region.
    /// Returns the number of nodes recomputed.
    pub fn incremental_fix(&mut self, var: VarId, value: bool) -> Result<u64> {
        if !self.domains.is_free(var) {
            return Err(Error::Argument(format!(
                "variable `{}` is not a free decision variable",
                self.obdd.vars().name(var)
            )));
        }
        self.domains.fix(var, value).expect("free variable");
        self.trail.push(Undo::Domain(var));
        if value || self.obdd.nodes_of(var).is_empty() {
            return Ok(0);
        }
        let obdd = self.obdd.clone();
        let split = obdd.first_below(var.index());
        let mut visits = 0;

        // path weights below the level, parents before children
        let below = (split as u32..obdd.num_slots() as u32)
            .map(NodeId)
            .chain([NodeId::FALSE, NodeId::TRUE]);
        for id in below {
            let w: f64 = obdd
                .parents(id)
                .iter()
                .map(|&(p, via_hi)| {
                    arc_weight(&obdd, &self.domains, p, via_hi) * self.pi[p.index()]
                })
                .sum();
            if w != self.pi[id.index()] {
                self.trail.push(Undo::Weight(id.0, self.pi[id.index()]));
                self.pi[id.index()] = w;
            }
            visits += 1;
        }

        // values at or above the level, children before parents
        let vars = obdd.vars();
        for i in (2..split).rev() {
            let n = obdd.node(NodeId(i as u32));
            let (hi, lo) = (self.v[n.hi.index()], self.v[n.lo.index()]);
            let val = match vars.get(n.var).kind {
                VarKind::Stochastic { prob } => prob * hi + (1.0 - prob) * lo,
                VarKind::Decision => {
                    if self.domains.takes_hi(n.var) {
                        hi
                    } else {
                        lo
                    }
                }
            };
            if val != self.v[i] {
                self.trail.push(Undo::Value(i as u32, self.v[i]));
                self.v[i] = val;
            }
            visits += 1;
        }
        Ok(visits)
    }

    /// Adds `reward * pi(r) * (v(hi) - v(lo))` over the nodes of every free
    /// decision variable into `deltas`. Returns the nodes visited.
    pub fn accumulate_derivatives(&self, deltas: &mut [f64]) -> u64 {
        let mut visits = 0;
        for var in self.domains.free_vars() {
            for &r in self.obdd.nodes_of(var) {
                let n = self.obdd.node(r);
                deltas[var.index()] += self.reward
                    * self.pi[r.index()]
                    * (self.v[n.hi.index()] - self.v[n.lo.index()]);
                visits += 1;
            }
        }
        visits
    }
}

/// Derivative propagation read off maintained scratches, one per term. All
/// scratches must hold the same domains.
pub fn dc_propagate_scratch(
    scratches: &[PropagationScratch],
    theta: f64,
) -> Option<PropagationResult> {
    let first = scratches.first()?;
    let mut deltas = vec![0.0; first.domains.len()];
    let mut total = 0.0;
    let mut visits = 0;
    for s in scratches {
        debug_assert_eq!(s.domains, first.domains);
        total += s.reward * s.root_value();
        visits += s.accumulate_derivatives(&mut deltas);
    }
    Some(decide(&first.domains, total, &deltas, theta, visits))
}
