//! Search state over decision variables.

use crate::vars::{VarId, VarTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    FalseOnly,
    TrueOnly,
    Both,
}

impl Domain {
    pub fn is_free(self) -> bool {
        self == Domain::Both
    }

    /// Free and true decision nodes both follow their hi arc.
    #[inline]
    pub fn takes_hi(self) -> bool {
        self != Domain::FalseOnly
    }

    pub fn fixed(value: bool) -> Domain {
        if value {
            Domain::TrueOnly
        } else {
            Domain::FalseOnly
        }
    }

    pub fn value(self) -> Option<bool> {
        match self {
            Domain::FalseOnly => Some(false),
            Domain::TrueOnly => Some(true),
            Domain::Both => None,
        }
    }
}

/// Raised instead of storing an empty domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DomainConflict {
    pub var: VarId,
}

/// One domain per decision variable; stochastic slots hold `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainState {
    doms: Vec<Option<Domain>>,
}

impl DomainState {
    /// Every decision variable free.
    pub fn new(vars: &VarTable) -> Self {
        DomainState {
            doms: vars
                .iter()
                .map(|v| v.is_decision().then_some(Domain::Both))
                .collect(),
        }
    }

    pub fn with_fixed(vars: &VarTable, fixed: &[(VarId, bool)]) -> Result<Self, DomainConflict> {
        let mut s = DomainState::new(vars);
        for &(v, b) in fixed {
            s.fix(v, b)?;
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.doms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doms.is_empty()
    }

    /// `None` for stochastic variables.
    #[inline]
    pub fn get(&self, var: VarId) -> Option<Domain> {
        self.doms[var.index()]
    }

    #[inline]
    pub fn is_free(&self, var: VarId) -> bool {
        self.doms[var.index()] == Some(Domain::Both)
    }

    /// Whether a decision node over `var` follows its hi arc.
    #[inline]
    pub fn takes_hi(&self, var: VarId) -> bool {
        self.doms[var.index()].is_none_or(Domain::takes_hi)
    }

    /// Narrows `var` to `value`. Returns whether the domain changed.
    pub fn fix(&mut self, var: VarId, value: bool) -> Result<bool, DomainConflict> {
        let slot = &mut self.doms[var.index()];
        match *slot {
            None => Err(DomainConflict { var }),
            Some(Domain::Both) => {
                *slot = Some(Domain::fixed(value));
                Ok(true)
            }
            Some(d) if d.value() == Some(value) => Ok(false),
            Some(_) => Err(DomainConflict { var }),
        }
    }

    /// Resets `var` to a given domain; used when undoing search decisions.
    pub fn set(&mut self, var: VarId, dom: Domain) {
        debug_assert!(self.doms[var.index()].is_some());
        self.doms[var.index()] = Some(dom);
    }

    pub fn free_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.doms
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == Some(Domain::Both))
            .map(|(i, _)| VarId(i as u32))
    }

    pub fn decisions(&self) -> impl Iterator<Item = (VarId, Domain)> + '_ {
        self.doms
            .iter()
            .enumerate()
            .filter_map(|(i, d)| d.map(|d| (VarId(i as u32), d)))
    }

    pub fn count_true(&self) -> usize {
        self.doms
            .iter()
            .filter(|d| **d == Some(Domain::TrueOnly))
            .count()
    }

    pub fn is_complete(&self) -> bool {
        self.free_vars().next().is_none()
    }
}
