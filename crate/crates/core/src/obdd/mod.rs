//! Reduced ordered binary decision diagrams.
//!
//! Diagrams are grown in an [`ObddBuilder`], which owns the unique table and
//! the apply cache, and then frozen into an immutable [`Obdd`] that keeps only
//! the nodes reachable from one root. Frozen diagrams number their internal
//! nodes by level, so every id range `[2, k)` is closed upward: a node's
//! children always carry larger ids than the node itself.

mod builder;
mod dot;
mod io;

use std::fmt;
use std::sync::Arc;

pub use builder::{BoolOp, ObddBuilder};
pub use dot::to_dot;
pub use io::{dump_obdd, load_obdd, load_obdds};

use crate::error::{Error, Result};
use crate::vars::{VarId, VarTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const FALSE: NodeId = NodeId(0);
    pub const TRUE: NodeId = NodeId(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Internal node: `lo` is followed when `var` is false, `hi` when true.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub var: VarId,
    pub lo: NodeId,
    pub hi: NodeId,
}

impl Node {
    pub(crate) const TERMINAL: Node = Node {
        var: VarId(u32::MAX),
        lo: NodeId::FALSE,
        hi: NodeId::FALSE,
    };
}

/// Conjunction of literals. Monotone inputs only use positive literals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cube {
    literals: Vec<(VarId, bool)>,
}

impl Cube {
    pub fn new(literals: Vec<(VarId, bool)>) -> Result<Self> {
        let mut seen: Vec<VarId> = literals.iter().map(|l| l.0).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument("cube repeats a variable".into()));
        }
        Ok(Cube { literals })
    }

    pub fn positive(vars: impl IntoIterator<Item = VarId>) -> Result<Self> {
        Cube::new(vars.into_iter().map(|v| (v, true)).collect())
    }

    pub fn literals(&self) -> &[(VarId, bool)] {
        &self.literals
    }

    pub fn is_monotone(&self) -> bool {
        self.literals.iter().all(|l| l.1)
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.literals
            .iter()
            .all(|&(v, pol)| assignment[v.index()] == pol)
    }
}

/// An immutable diagram with a single root.
#[derive(Clone, Debug)]
pub struct Obdd {
    vars: Arc<VarTable>,
    nodes: Vec<Node>,
    root: NodeId,
    parents: Vec<Vec<(NodeId, bool)>>,
    by_var: Vec<Vec<NodeId>>,
}

impl Obdd {
    /// Copies the part of `arena` reachable from `root` into a fresh diagram.
    /// Internal nodes are renumbered by (level, discovery order).
    pub(crate) fn extract(vars: Arc<VarTable>, arena: &[Node], root: NodeId) -> Obdd {
        let level = |id: NodeId| -> u32 {
            if id.is_terminal() {
                u32::MAX
            } else {
                arena[id.index()].var.0
            }
        };
        let mut seen = vec![false; arena.len()];
        let mut order: Vec<NodeId> = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if id.is_terminal() || seen[id.index()] {
                continue;
            }
            seen[id.index()] = true;
            order.push(id);
            let n = arena[id.index()];
            stack.push(n.lo);
            stack.push(n.hi);
        }
        // stable sort keeps discovery order within a level
        order.sort_by_key(|&id| level(id));
        let mut remap = vec![NodeId::FALSE; arena.len()];
        remap[1] = NodeId::TRUE;
        for (i, &old) in order.iter().enumerate() {
            remap[old.index()] = NodeId(i as u32 + 2);
        }
        let mut nodes = vec![Node::TERMINAL, Node::TERMINAL];
        nodes.extend(order.iter().map(|&old| {
            let n = arena[old.index()];
            Node {
                var: n.var,
                lo: remap[n.lo.index()],
                hi: remap[n.hi.index()],
            }
        }));
        let root = if root.is_terminal() {
            root
        } else {
            remap[root.index()]
        };
        Obdd::index(vars, nodes, root)
    }

    fn index(vars: Arc<VarTable>, nodes: Vec<Node>, root: NodeId) -> Obdd {
        let mut parents = vec![Vec::new(); nodes.len()];
        let mut by_var = vec![Vec::new(); vars.len()];
        for (i, n) in nodes.iter().enumerate().skip(2) {
            let id = NodeId(i as u32);
            parents[n.lo.index()].push((id, false));
            parents[n.hi.index()].push((id, true));
            by_var[n.var.index()].push(id);
        }
        Obdd {
            vars,
            nodes,
            root,
            parents,
            by_var,
        }
    }

    /// The diagram of a constant.
    pub fn constant(vars: Arc<VarTable>, value: bool) -> Obdd {
        let root = if value { NodeId::TRUE } else { NodeId::FALSE };
        Obdd::index(vars, vec![Node::TERMINAL, Node::TERMINAL], root)
    }

    /// Compiles a disjunction of cubes by folding them with `Or`.
    pub fn from_dnf(vars: Arc<VarTable>, cubes: &[Cube]) -> Result<Obdd> {
        let mut builder = ObddBuilder::new(vars);
        let root = builder.from_dnf(cubes)?;
        Ok(builder.extract(root))
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    /// Rebinds the diagram to an equal variable table.
    pub(crate) fn with_vars(mut self, vars: Arc<VarTable>) -> Obdd {
        debug_assert!(*vars == *self.vars);
        self.vars = vars;
        self
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Number of node slots, terminals included.
    pub fn num_slots(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_internal(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn node(&self, id: NodeId) -> &Node {
        debug_assert!(!id.is_terminal(), "terminal {id} has no node record");
        &self.nodes[id.index()]
    }

    /// Order position of the node's variable; terminals sit below every
    /// variable.
    #[inline]
    pub fn level(&self, id: NodeId) -> usize {
        if id.is_terminal() {
            self.vars.len()
        } else {
            self.nodes[id.index()].var.index()
        }
    }

    pub fn internal_ids(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (2..self.nodes.len() as u32).map(NodeId)
    }

    /// Parents first, terminals last.
    pub fn topo_order(&self) -> Vec<NodeId> {
        self.internal_ids()
            .chain([NodeId::FALSE, NodeId::TRUE])
            .collect()
    }

    /// In-edges of a node as `(parent, via_hi_arc)`.
    pub fn parents(&self, id: NodeId) -> &[(NodeId, bool)] {
        &self.parents[id.index()]
    }

    /// All nodes labelled with `var`.
    pub fn nodes_of(&self, var: VarId) -> &[NodeId] {
        &self.by_var[var.index()]
    }

    /// First id whose level is strictly greater than `level`; internal ids in
    /// `[first_below(l), len)` are exactly the nodes below level `l`.
    pub fn first_below(&self, level: usize) -> usize {
        let internal = &self.nodes[2..];
        2 + internal.partition_point(|n| n.var.index() <= level)
    }

    /// Evaluates the Boolean function under a complete assignment indexed by
    /// variable.
    pub fn eval_bool(&self, assignment: &[bool]) -> bool {
        let mut id = self.root;
        while !id.is_terminal() {
            let n = &self.nodes[id.index()];
            id = if assignment[n.var.index()] {
                n.hi
            } else {
                n.lo
            };
        }
        id == NodeId::TRUE
    }

    /// Full scan of the reducedness, orderedness, uniqueness and
    /// reachability invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let mut unique = std::collections::HashSet::new();
        for id in self.internal_ids() {
            let n = self.node(id);
            if n.lo == n.hi {
                return Err(Error::Structure(format!("node {id} has lo = hi")));
            }
            for child in [n.lo, n.hi] {
                if child.index() >= self.nodes.len() {
                    return Err(Error::Structure(format!(
                        "node {id} has dangling child {child}"
                    )));
                }
                if !child.is_terminal() && self.level(child) <= n.var.index() {
                    return Err(Error::Structure(format!(
                        "node {id} violates the variable order"
                    )));
                }
            }
            if !unique.insert(*n) {
                return Err(Error::Structure(format!(
                    "node {id} duplicates another node"
                )));
            }
            if id != self.root && self.parents(id).is_empty() {
                return Err(Error::Structure(format!("node {id} is unreachable")));
            }
        }
        Ok(())
    }
}
