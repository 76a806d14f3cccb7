use std::collections::HashMap;
use std::sync::Arc;

use super::{Cube, Node, NodeId, Obdd};
use crate::error::{Error, Result};
use crate::vars::{VarId, VarTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
}

/// Hash-consed node store shared by every diagram built over one variable
/// table. Ids are append-only and never recycled.
pub struct ObddBuilder {
    vars: Arc<VarTable>,
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeId>,
    cache: HashMap<(BoolOp, NodeId, NodeId), NodeId>,
}

impl ObddBuilder {
    pub fn new(vars: Arc<VarTable>) -> Self {
        ObddBuilder {
            vars,
            nodes: vec![Node::TERMINAL, Node::TERMINAL],
            unique: HashMap::new(),
            cache: HashMap::new(),
        }
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    /// Number of node slots allocated so far, terminals included.
    pub fn num_slots(&self) -> usize {
        self.nodes.len()
    }

    fn level(&self, id: NodeId) -> usize {
        if id.is_terminal() {
            self.vars.len()
        } else {
            self.nodes[id.index()].var.index()
        }
    }

    fn check_id(&self, id: NodeId) -> Result<()> {
        if id.index() < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::Structure(format!(
                "node id {id} does not belong to this store"
            )))
        }
    }

    /// Returns the canonical node for `(var, lo, hi)`, or `lo` when both
    /// children coincide.
    pub fn mk_node(&mut self, var: VarId, lo: NodeId, hi: NodeId) -> Result<NodeId> {
        if var.index() >= self.vars.len() {
            return Err(Error::Structure(format!("unknown variable {var}")));
        }
        self.check_id(lo)?;
        self.check_id(hi)?;
        if var.index() >= self.level(lo) || var.index() >= self.level(hi) {
            return Err(Error::Structure(format!(
                "variable `{}` does not precede its children",
                self.vars.name(var)
            )));
        }
        Ok(self.mk_unchecked(var, lo, hi))
    }

    fn mk_unchecked(&mut self, var: VarId, lo: NodeId, hi: NodeId) -> NodeId {
        if lo == hi {
            return lo;
        }
        let node = Node { var, lo, hi };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    pub(crate) fn children(&self, id: NodeId) -> (NodeId, NodeId) {
        let n = self.nodes[id.index()];
        (n.lo, n.hi)
    }

    pub fn var_node(&mut self, var: VarId) -> Result<NodeId> {
        self.mk_node(var, NodeId::FALSE, NodeId::TRUE)
    }

    pub fn apply(&mut self, op: BoolOp, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.check_id(a)?;
        self.check_id(b)?;
        Ok(self.apply_rec(op, a, b))
    }

    fn apply_rec(&mut self, op: BoolOp, a: NodeId, b: NodeId) -> NodeId {
        match op {
            BoolOp::And => {
                if a == NodeId::FALSE || b == NodeId::FALSE {
                    return NodeId::FALSE;
                }
                if a == NodeId::TRUE || a == b {
                    return b;
                }
                if b == NodeId::TRUE {
                    return a;
                }
            }
            BoolOp::Or => {
                if a == NodeId::TRUE || b == NodeId::TRUE {
                    return NodeId::TRUE;
                }
                if a == NodeId::FALSE || a == b {
                    return b;
                }
                if b == NodeId::FALSE {
                    return a;
                }
            }
        }
        // both operators commute
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if let Some(&r) = self.cache.get(&(op, a, b)) {
            return r;
        }
        let (la, lb) = (self.level(a), self.level(b));
        let top = la.min(lb);
        let (a_lo, a_hi) = if la == top {
            let n = self.nodes[a.index()];
            (n.lo, n.hi)
        } else {
            (a, a)
        };
        let (b_lo, b_hi) = if lb == top {
            let n = self.nodes[b.index()];
            (n.lo, n.hi)
        } else {
            (b, b)
        };
        let lo = self.apply_rec(op, a_lo, b_lo);
        let hi = self.apply_rec(op, a_hi, b_hi);
        let r = self.mk_unchecked(VarId(top as u32), lo, hi);
        self.cache.insert((op, a, b), r);
        r
    }

    /// Builds the conjunction of a cube bottom-up along the variable order.
    pub fn cube(&mut self, cube: &Cube) -> Result<NodeId> {
        let mut lits = cube.literals().to_vec();
        for &(v, _) in &lits {
            if v.index() >= self.vars.len() {
                return Err(Error::Argument(format!("cube uses unknown variable {v}")));
            }
        }
        lits.sort_by_key(|l| std::cmp::Reverse(l.0));
        let mut acc = NodeId::TRUE;
        for (v, positive) in lits {
            acc = if positive {
                self.mk_unchecked(v, NodeId::FALSE, acc)
            } else {
                self.mk_unchecked(v, acc, NodeId::FALSE)
            };
        }
        Ok(acc)
    }

    /// Or-fold of the cubes; an empty list is the constant false.
    pub fn from_dnf(&mut self, cubes: &[Cube]) -> Result<NodeId> {
        let mut acc = NodeId::FALSE;
        for c in cubes {
            let c = self.cube(c)?;
            acc = self.apply_rec(BoolOp::Or, acc, c);
        }
        Ok(acc)
    }

    /// Freezes the diagram rooted at `root`.
    pub fn extract(&self, root: NodeId) -> Obdd {
        Obdd::extract(self.vars.clone(), &self.nodes, root)
    }
}
