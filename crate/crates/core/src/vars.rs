//! Variable registry and global variable order.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Position of a variable in the global order. Smaller indices sit closer to
/// the root of every diagram built over the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarKind {
    Decision,
    /// Independent Boolean variable that is true with probability `prob`.
    Stochastic {
        prob: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarInfo {
    pub id: VarId,
    pub name: String,
    pub kind: VarKind,
}

impl VarInfo {
    pub fn is_decision(&self) -> bool {
        matches!(self.kind, VarKind::Decision)
    }

    pub fn prob(&self) -> Option<f64> {
        match self.kind {
            VarKind::Stochastic { prob } => Some(prob),
            VarKind::Decision => None,
        }
    }
}

/// Decision and stochastic variables, indexed by their order position.
#[derive(Clone, Debug, Default)]
pub struct VarTable {
    vars: Vec<VarInfo>,
    by_name: HashMap<String, VarId>,
}

impl PartialEq for VarTable {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars
    }
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from declarations. Without `order` the declaration
    /// order is the variable order; names listed in `order` come first, in
    /// the listed sequence, followed by the rest in declaration order.
    pub fn from_decls(decls: &[(String, VarKind)], order: Option<&[String]>) -> Result<Self> {
        let mut sequence: Vec<usize> = Vec::with_capacity(decls.len());
        if let Some(order) = order {
            let index: HashMap<&str, usize> = decls
                .iter()
                .enumerate()
                .map(|(i, (name, _))| (name.as_str(), i))
                .collect();
            let mut placed = vec![false; decls.len()];
            for name in order {
                let &i = index.get(name.as_str()).ok_or_else(|| {
                    Error::Argument(format!("order names unknown variable `{name}`"))
                })?;
                if placed[i] {
                    return Err(Error::Argument(format!("order lists `{name}` twice")));
                }
                placed[i] = true;
                sequence.push(i);
            }
            sequence.extend((0..decls.len()).filter(|&i| !placed[i]));
        } else {
            sequence.extend(0..decls.len());
        }
        let mut table = VarTable::new();
        for i in sequence {
            let (name, kind) = &decls[i];
            table.push(name, *kind)?;
        }
        Ok(table)
    }

    pub fn add_decision(&mut self, name: &str) -> Result<VarId> {
        self.push(name, VarKind::Decision)
    }

    pub fn add_stochastic(&mut self, name: &str, prob: f64) -> Result<VarId> {
        self.push(name, VarKind::Stochastic { prob })
    }

    fn push(&mut self, name: &str, kind: VarKind) -> Result<VarId> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Argument(format!("invalid variable name `{name}`")));
        }
        if let VarKind::Stochastic { prob } = kind {
            if !(0.0..=1.0).contains(&prob) {
                return Err(Error::Argument(format!(
                    "probability {prob} of `{name}` is outside [0,1]"
                )));
            }
        }
        if self.by_name.contains_key(name) {
            return Err(Error::Argument(format!("variable `{name}` declared twice")));
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarInfo {
            id,
            name: name.to_string(),
            kind,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn get(&self, id: VarId) -> &VarInfo {
        &self.vars[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.vars[id.index()].name
    }

    pub fn iter(&self) -> impl Iterator<Item = &VarInfo> {
        self.vars.iter()
    }

    /// Decision variables in variable order.
    pub fn decisions(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.iter().filter(|v| v.is_decision()).map(|v| v.id)
    }

    pub fn num_decisions(&self) -> usize {
        self.vars.iter().filter(|v| v.is_decision()).count()
    }

    pub fn stochastic(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.iter().filter(|v| !v.is_decision()).map(|v| v.id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_override_puts_listed_first() {
        let decls = vec![
            ("a".to_string(), VarKind::Decision),
            ("b".to_string(), VarKind::Stochastic { prob: 0.5 }),
            ("c".to_string(), VarKind::Decision),
        ];
        let t = VarTable::from_decls(&decls, Some(&["c".to_string()])).unwrap();
        let names: Vec<_> = t.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["c", "a", "b"]);
        assert_eq!(t.lookup("b"), Some(VarId(2)));
    }

    #[test]
    fn rejects_bad_declarations() {
        let mut t = VarTable::new();
        t.add_decision("x").unwrap();
        assert!(t.add_decision("x").is_err());
        assert!(t.add_stochastic("p", 1.5).is_err());
        assert!(t.add_stochastic("q", -0.1).is_err());
        let decls = vec![("a".to_string(), VarKind::Decision)];
        assert!(VarTable::from_decls(&decls, Some(&["zz".to_string()])).is_err());
        assert!(VarTable::from_decls(&decls, Some(&["a".to_string(), "a".to_string()])).is_err());
    }
}
