//! Per-node decomposition of diagram constraints into linear equations, with
//! interval bounds propagation over the result.
//!
//! Each internal node gets a continuous value variable tied to its children:
//! `v = w * v(hi) + (1 - w) * v(lo)` for stochastic nodes and
//! `v = (1 - d) * v(lo) + d * v(hi)` for decision nodes with binary `d`. The
//! roots enter one inequality `sum_i r_i * v_i(root) >= theta`. Reasoning on
//! each equation in isolation is weaker than reasoning on the whole diagram,
//! so this propagator can leave values that have no support.

use std::fmt;
use std::sync::Arc;

use crate::domain::{Domain, DomainState};
use crate::obdd::NodeId;
use crate::propagate::{ConstraintTerm, PropagationResult, EPSILON};
use crate::vars::{VarId, VarKind, VarTable};

/// Tightenings smaller than this do not count as progress.
const PROGRESS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    fn disjoint(self, other: Interval) -> bool {
        self.lo > other.hi + EPSILON || other.lo > self.hi + EPSILON
    }

    pub fn contains(self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Operand {
    Const(f64),
    Value(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Equation {
    Stochastic {
        target: usize,
        prob: f64,
        hi: Operand,
        lo: Operand,
    },
    Decision {
        target: usize,
        var: VarId,
        hi: Operand,
        lo: Operand,
    },
}

/// Value variable attached to one internal node of one term.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueVar {
    pub term: usize,
    pub node: NodeId,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct LinearSystem {
    vars: Arc<VarTable>,
    pub value_vars: Vec<ValueVar>,
    /// Bounds per value variable; after [`decompose`] these are the bounds
    /// implied by the equations alone with every decision free.
    pub intervals: Vec<Interval>,
    pub equations: Vec<Equation>,
    pub roots: Vec<(f64, Operand)>,
    pub theta: f64,
}

pub fn decompose(terms: &[ConstraintTerm], theta: f64) -> LinearSystem {
    let vars = terms
        .first()
        .map(|t| t.obdd.vars().clone())
        .unwrap_or_default();
    let mut value_vars = Vec::new();
    let mut equations = Vec::new();
    let mut roots = Vec::new();
    for (ti, term) in terms.iter().enumerate() {
        let obdd = &term.obdd;
        let base = value_vars.len();
        let operand = |id: NodeId| -> Operand {
            match id {
                NodeId::FALSE => Operand::Const(0.0),
                NodeId::TRUE => Operand::Const(1.0),
                _ => Operand::Value(base + id.index() - 2),
            }
        };
        for id in obdd.internal_ids() {
            let n = obdd.node(id);
            let label = if terms.len() > 1 {
                format!("v{}({}@{})", ti + 1, vars.name(n.var), id)
            } else {
                format!("v({}@{})", vars.name(n.var), id)
            };
            value_vars.push(ValueVar {
                term: ti,
                node: id,
                label,
            });
        }
        // children before parents so one forward sweep settles the bounds
        for id in obdd.internal_ids().rev() {
            let n = obdd.node(id);
            let target = base + id.index() - 2;
            let (hi, lo) = (operand(n.hi), operand(n.lo));
            equations.push(match vars.get(n.var).kind {
                VarKind::Stochastic { prob } => Equation::Stochastic {
                    target,
                    prob,
                    hi,
                    lo,
                },
                VarKind::Decision => Equation::Decision {
                    target,
                    var: n.var,
                    hi,
                    lo,
                },
            });
        }
        roots.push((term.reward, operand(obdd.root())));
    }
    let mut system = LinearSystem {
        vars,
        intervals: vec![Interval::UNIT; value_vars.len()],
        value_vars,
        equations,
        roots,
        theta,
    };
    let free = DomainState::new(&system.vars);
    for i in 0..system.equations.len() {
        let eq = system.equations[i].clone();
        let iv = system.forward(&eq, &free);
        system.intervals[eq_target(&eq)] = iv;
    }
    system
}

fn eq_target(eq: &Equation) -> usize {
    match *eq {
        Equation::Stochastic { target, .. } | Equation::Decision { target, .. } => target,
    }
}

impl LinearSystem {
    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    fn get(&self, op: Operand) -> Interval {
        match op {
            Operand::Const(c) => Interval::point(c),
            Operand::Value(i) => self.intervals[i],
        }
    }

    fn forward(&self, eq: &Equation, doms: &DomainState) -> Interval {
        match *eq {
            Equation::Stochastic { prob, hi, lo, .. } => {
                let (h, l) = (self.get(hi), self.get(lo));
                Interval {
                    lo: prob * h.lo + (1.0 - prob) * l.lo,
                    hi: prob * h.hi + (1.0 - prob) * l.hi,
                }
            }
            Equation::Decision { var, hi, lo, .. } => match doms.get(var) {
                Some(Domain::TrueOnly) => self.get(hi),
                Some(Domain::FalseOnly) => self.get(lo),
                _ => self.get(hi).hull(self.get(lo)),
            },
        }
    }

    /// Intersects an operand with `bound`. `Err` on emptiness.
    fn narrow(&mut self, op: Operand, bound: Interval) -> Result<bool, ()> {
        match op {
            Operand::Const(c) => {
                if c < bound.lo - EPSILON || c > bound.hi + EPSILON {
                    Err(())
                } else {
                    Ok(false)
                }
            }
            Operand::Value(i) => {
                let cur = self.intervals[i];
                let mut lo = cur.lo.max(bound.lo);
                let mut hi = cur.hi.min(bound.hi);
                if lo > hi + EPSILON {
                    return Err(());
                }
                if lo > hi {
                    let mid = 0.5 * (lo + hi);
                    lo = mid;
                    hi = mid;
                }
                let tighter = lo > cur.lo + PROGRESS || hi < cur.hi - PROGRESS;
                if tighter {
                    self.intervals[i] = Interval { lo, hi };
                }
                Ok(tighter)
            }
        }
    }

    /// Number of value variables, equal to the internal node count.
    pub fn len(&self) -> usize {
        self.value_vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value_vars.is_empty()
    }

    pub fn interval_of(&self, label: &str) -> Option<Interval> {
        self.value_vars
            .iter()
            .position(|v| v.label == label)
            .map(|i| self.intervals[i])
    }
}

#[derive(Clone, Debug)]
pub struct BoundsOutcome {
    pub result: PropagationResult,
    /// Bounds at the fixpoint, or when the sweep cap was hit.
    pub intervals: Vec<Interval>,
    pub sweeps: usize,
    /// The cap of `100 * equations` sweeps was reached before a fixpoint.
    pub capped: bool,
}

/// Interval fixpoint over the equations and the root inequality. A decision
/// variable is fixed only when one of its branches is incompatible with the
/// interval of a node it labels.
pub fn bounds_propagate(system: &LinearSystem, domains: &DomainState) -> BoundsOutcome {
    let mut sys = system.clone();
    let mut doms = domains.clone();
    let mut fixed: Vec<(VarId, bool)> = Vec::new();
    let mut visits = 0u64;
    let cap = 100 * sys.equations.len().max(1);
    let mut sweeps = 0;
    let mut capped = false;
    let root_bound =
        |sys: &LinearSystem| -> f64 { sys.roots.iter().map(|&(r, op)| r * sys.get(op).hi).sum() };

    let failed = loop {
        if sweeps == cap {
            capped = true;
            break false;
        }
        sweeps += 1;
        match sweep(&mut sys, &mut doms, &mut fixed, &mut visits) {
            Err(()) => break true,
            Ok(false) => break false,
            Ok(true) => {}
        }
    };
    let bound = root_bound(&sys);
    let result = if failed {
        PropagationResult::failed(bound, visits)
    } else {
        PropagationResult::ok(fixed, bound, visits)
    };
    BoundsOutcome {
        result,
        intervals: sys.intervals,
        sweeps,
        capped,
    }
}

fn sweep(
    sys: &mut LinearSystem,
    doms: &mut DomainState,
    fixed: &mut Vec<(VarId, bool)>,
    visits: &mut u64,
) -> Result<bool, ()> {
    let mut changed = false;
    for i in 0..sys.equations.len() {
        *visits += 1;
        let eq = sys.equations[i].clone();
        let target = Operand::Value(eq_target(&eq));
        let fwd = sys.forward(&eq, doms);
        changed |= sys.narrow(target, fwd)?;
        let v = sys.get(target);
        match eq {
            Equation::Stochastic { prob, hi, lo, .. } => {
                if prob > 0.0 {
                    let l = sys.get(lo);
                    let b = Interval {
                        lo: (v.lo - (1.0 - prob) * l.hi) / prob,
                        hi: (v.hi - (1.0 - prob) * l.lo) / prob,
                    };
                    changed |= sys.narrow(hi, b)?;
                }
                if prob < 1.0 {
                    let h = sys.get(hi);
                    let b = Interval {
                        lo: (v.lo - prob * h.hi) / (1.0 - prob),
                        hi: (v.hi - prob * h.lo) / (1.0 - prob),
                    };
                    changed |= sys.narrow(lo, b)?;
                }
            }
            Equation::Decision { var, hi, lo, .. } => match doms.get(var) {
                Some(Domain::TrueOnly) => changed |= sys.narrow(hi, v)?,
                Some(Domain::FalseOnly) => changed |= sys.narrow(lo, v)?,
                _ => {
                    let lo_dead = v.disjoint(sys.get(lo));
                    let hi_dead = v.disjoint(sys.get(hi));
                    match (lo_dead, hi_dead) {
                        (true, true) => return Err(()),
                        (false, false) => {}
                        (lo_dead, _) => {
                            doms.fix(var, lo_dead).map_err(|_| ())?;
                            fixed.push((var, lo_dead));
                            changed = true;
                        }
                    }
                }
            },
        }
    }
    // root inequality: sum_i r_i * R_i >= theta - EPSILON
    *visits += 1;
    let target = sys.theta - EPSILON;
    let total_hi: f64 = sys.roots.iter().map(|&(r, op)| r * sys.get(op).hi).sum();
    if total_hi < target {
        return Err(());
    }
    for k in 0..sys.roots.len() {
        let (r, op) = sys.roots[k];
        if r > 0.0 {
            let others = total_hi - r * sys.get(op).hi;
            let need = (target - others) / r;
            changed |= sys.narrow(
                op,
                Interval {
                    lo: need,
                    hi: f64::INFINITY,
                },
            )?;
        }
    }
    Ok(changed)
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |op: Operand| -> String {
            match op {
                Operand::Const(c) => format!("{c}"),
                Operand::Value(i) => self.value_vars[i].label.clone(),
            }
        };
        let lhs: Vec<String> = self
            .roots
            .iter()
            .map(|&(r, op)| {
                if r == 1.0 {
                    name(op)
                } else {
                    format!("{r} {}", name(op))
                }
            })
            .collect();
        writeln!(f, "{} >= {}", lhs.join(" + "), self.theta)?;
        for eq in &self.equations {
            match *eq {
                Equation::Stochastic {
                    target,
                    prob,
                    hi,
                    lo,
                } => writeln!(
                    f,
                    "{} = {} {} + {} {}",
                    self.value_vars[target].label,
                    prob,
                    name(hi),
                    (1e12 * (1.0 - prob)).round() / 1e12,
                    name(lo)
                )?,
                Equation::Decision {
                    target,
                    var,
                    hi,
                    lo,
                } => {
                    let d = self.vars.name(var);
                    writeln!(
                        f,
                        "{} = (1 - {d}) {} + {d} {}",
                        self.value_vars[target].label,
                        name(lo),
                        name(hi)
                    )?
                }
            }
        }
        let decisions: Vec<&str> = {
            let mut seen: Vec<VarId> = self
                .equations
                .iter()
                .filter_map(|e| match e {
                    Equation::Decision { var, .. } => Some(*var),
                    _ => None,
                })
                .collect();
            seen.sort();
            seen.dedup();
            seen.into_iter().map(|v| self.vars.name(v)).collect()
        };
        if !decisions.is_empty() {
            writeln!(f, "{} in {{0,1}}", decisions.join(", "))?;
        }
        for (vv, iv) in self.value_vars.iter().zip(&self.intervals) {
            writeln!(f, "{} <= {} <= {}", iv.lo, vv.label, iv.hi)?;
        }
        Ok(())
    }
}
