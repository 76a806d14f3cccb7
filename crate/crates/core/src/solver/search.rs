use crate::domain::{Domain, DomainState};
use crate::propagate::{
    dc_propagate, dc_propagate_scratch, naive_propagate, ConstraintTerm, PropagationScratch,
};
use crate::vars::{VarId, VarTable};

use super::{cardinality_propagate, PropagatorKind, SearchStats, Strategy};

/// One depth-first search over the decision variables. Domain changes are
/// trailed and undone on backtrack together with the scratches.
pub(super) struct Search<'a> {
    constraints: Vec<(&'a [ConstraintTerm], f64)>,
    cardinality: Option<usize>,
    kind: PropagatorKind,
    domains: DomainState,
    trail: Vec<VarId>,
    marks: Vec<usize>,
    scratches: Vec<Vec<PropagationScratch>>,
    pub(super) stats: SearchStats,
}

impl<'a> Search<'a> {
    pub(super) fn new(
        vars: &VarTable,
        constraints: Vec<(&'a [ConstraintTerm], f64)>,
        cardinality: Option<usize>,
        kind: PropagatorKind,
    ) -> Self {
        let domains = DomainState::new(vars);
        let scratches = if kind == PropagatorKind::Incremental {
            constraints
                .iter()
                .map(|(terms, _)| {
                    terms
                        .iter()
                        .map(|t| PropagationScratch::new(t, &domains))
                        .collect()
                })
                .collect()
        } else {
            Vec::new()
        };
        Search {
            constraints,
            cardinality,
            kind,
            domains,
            trail: Vec::new(),
            marks: Vec::new(),
            scratches,
            stats: SearchStats::default(),
        }
    }

    pub(super) fn run(&mut self) -> Option<Strategy> {
        self.stats.nodes += 1;
        if self.propagate() && self.dfs() {
            Some(Strategy::from_domains(&self.domains))
        } else {
            None
        }
    }

    fn dfs(&mut self) -> bool {
        let Some(var) = self.domains.free_vars().next() else {
            return true;
        };
        for value in [true, false] {
            self.stats.nodes += 1;
            self.save();
            if self.fix(var, value) && self.propagate() && self.dfs() {
                return true;
            }
            self.restore();
            self.stats.backtracks += 1;
        }
        false
    }

    fn save(&mut self) {
        self.marks.push(self.trail.len());
        for s in self.scratches.iter_mut().flatten() {
            s.save();
        }
    }

    fn restore(&mut self) {
        let mark = self.marks.pop().expect("restore without save");
        for var in self.trail.drain(mark..) {
            self.domains.set(var, Domain::Both);
        }
        for s in self.scratches.iter_mut().flatten() {
            s.restore();
        }
    }

    /// `false` when the fix empties the domain.
    fn fix(&mut self, var: VarId, value: bool) -> bool {
        match self.domains.fix(var, value) {
            Err(_) => false,
            Ok(false) => true,
            Ok(true) => {
                self.trail.push(var);
                for s in self.scratches.iter_mut().flatten() {
                    self.stats.node_visits += s
                        .incremental_fix(var, value)
                        .expect("scratch domains mirror the search");
                }
                true
            }
        }
    }

    fn propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            if let Some(n) = self.cardinality {
                self.stats.propagator_calls += 1;
                let r = cardinality_propagate(&self.domains, n);
                if r.is_failed() {
                    return false;
                }
                for (v, b) in r.fixed {
                    if !self.fix(v, b) {
                        return false;
                    }
                    changed = true;
                }
            }
            for c in 0..self.constraints.len() {
                self.stats.propagator_calls += 1;
                let (terms, theta) = self.constraints[c];
                let r = match self.kind {
                    PropagatorKind::Incremental => dc_propagate_scratch(&self.scratches[c], theta)
                        .unwrap_or_else(|| dc_propagate(terms, &self.domains, theta)),
                    PropagatorKind::Full => dc_propagate(terms, &self.domains, theta),
                    PropagatorKind::Naive => naive_propagate(terms, &self.domains, theta),
                };
                self.stats.node_visits += r.visits;
                if r.is_failed() {
                    return false;
                }
                for (v, b) in r.fixed {
                    if !self.fix(v, b) {
                        return false;
                    }
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }
}
