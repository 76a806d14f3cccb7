mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use scop_core::baseline::{bounds_propagate, decompose, Equation, Interval, Operand};
use scop_core::generate::rng;
use scop_core::{dc_propagate, ConstraintTerm, DomainState, NodeId, Obdd, Status};

/// The y node whose lo arc goes to the false terminal, and the other one.
fn y_nodes(o: &Obdd) -> (NodeId, NodeId) {
    let ys = o.nodes_of(var(o, "y"));
    let y1 = *ys.iter().find(|&&n| o.node(n).lo == NodeId::FALSE).unwrap();
    let y2 = *ys.iter().find(|&&n| n != y1).unwrap();
    (y1, y2)
}

fn close(a: Interval, lo: f64, hi: f64) -> bool {
    (a.lo - lo).abs() < 1e-12 && (a.hi - hi).abs() < 1e-12
}

#[test]
fn xy_system_shape_and_structural_bounds() {
    let o = xy();
    let sys = decompose(&[ConstraintTerm::unit(o.clone())], 0.4);
    assert_eq!(sys.len(), o.num_internal());
    let (y1, y2) = y_nodes(&o);
    let x = o.nodes_of(var(&o, "x"))[0];
    let label = |n: NodeId| format!("v({}@{})", o.vars().name(o.node(n).var), n);

    assert!(close(sys.interval_of(&label(o.root())).unwrap(), 0.0, 0.6));
    assert!(close(sys.interval_of(&label(x)).unwrap(), 0.0, 0.6));
    assert!(close(sys.interval_of(&label(y1)).unwrap(), 0.0, 0.6));
    assert!(close(sys.interval_of(&label(y2)).unwrap(), 0.3, 0.6));

    // root = .9 v(x) + .1 v(y1), compared against theta
    let root_eq = sys
        .equations
        .iter()
        .find(|e| matches!(e, Equation::Stochastic { target, .. } if sys.value_vars[*target].node == o.root()))
        .unwrap();
    let idx = |n: NodeId| sys.value_vars.iter().position(|v| v.node == n).unwrap();
    match *root_eq {
        Equation::Stochastic { prob, hi, lo, .. } => {
            assert_eq!(prob, 0.9);
            assert_eq!(hi, Operand::Value(idx(x)));
            assert_eq!(lo, Operand::Value(idx(y1)));
        }
        _ => unreachable!(),
    }
    assert_eq!(sys.roots, vec![(1.0, Operand::Value(idx(o.root())))]);
    let text = sys.to_string();
    assert!(text.contains(">= 0.4"), "{text}");
    assert!(
        text.contains(&format!(
            "{} = (1 - x) {} + x {}",
            label(x),
            label(y1),
            label(y2)
        )),
        "{text}"
    );
}

#[test]
fn xy_bounds_fix_nothing_where_dc_fixes_y() {
    let o = xy();
    let terms = [ConstraintTerm::unit(o.clone())];
    let d = DomainState::new(o.vars());
    let out = bounds_propagate(&decompose(&terms, 0.4), &d);
    assert_eq!(out.result.status, Status::Ok);
    assert!(out.result.fixed.is_empty());
    assert!(!out.capped);
    let dc = dc_propagate(&terms, &d, 0.4);
    assert!(dc.fixed.len() > out.result.fixed.len());

    let (_, y2) = y_nodes(&o);
    let x = o.nodes_of(var(&o, "x"))[0];
    let sys = decompose(&terms, 0.4);
    let at = |n: NodeId| out.intervals[sys.value_vars.iter().position(|v| v.node == n).unwrap()];
    assert!(close(at(y2), 0.3, 0.6));
    assert!(Interval { lo: 0.0, hi: 0.6 }.contains(at(x)));
}

#[test]
fn xy_bounds_fail_above_max() {
    let o = xy();
    let terms = [ConstraintTerm::unit(o.clone())];
    let out = bounds_propagate(&decompose(&terms, 0.7), &DomainState::new(o.vars()));
    assert_eq!(out.result.status, Status::Failed);
    let zero = bounds_propagate(&decompose(&terms, 0.0), &DomainState::new(o.vars()));
    assert_eq!(zero.result.status, Status::Ok);
    assert!(zero.result.fixed.is_empty());
}

#[test]
fn terminal_only_system_has_just_the_root_inequality() {
    let vars = Arc::new(scop_core::VarTable::new());
    let o = Arc::new(Obdd::constant(vars, true));
    let sys = decompose(&[ConstraintTerm::unit(o)], 0.5);
    assert!(sys.is_empty());
    assert_eq!(sys.roots, vec![(1.0, Operand::Const(1.0))]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bounds_are_sound_and_a_fixpoint(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (vars, terms, theta) = random_terms(&mut r, 2);
        let d = DomainState::new(&vars);
        let sys = decompose(&terms, theta);
        let out = bounds_propagate(&sys, &d);
        let all = completions(&terms, &d);
        let eps = scop_core::EPSILON;
        if out.result.status == Status::Failed {
            prop_assert!(all.iter().all(|(_, f)| *f < theta - eps));
            return Ok(());
        }
        for &(x, b) in &out.result.fixed {
            // the removed value has no satisfying completion
            prop_assert!(!all.iter().any(|(c, f)| c.takes_hi(x) != b && *f >= theta - eps));
        }
        // re-running on the output changes nothing
        let mut again = sys.clone();
        again.intervals = out.intervals.clone();
        let mut d2 = d.clone();
        for &(x, b) in &out.result.fixed {
            d2.fix(x, b).unwrap();
        }
        let second = bounds_propagate(&again, &d2);
        prop_assert_eq!(second.result.status, Status::Ok);
        prop_assert!(second.result.fixed.is_empty());
        for (a, b) in out.intervals.iter().zip(&second.intervals) {
            prop_assert!((a.lo - b.lo).abs() <= 1e-12 && (a.hi - b.hi).abs() <= 1e-12);
        }
        // never stronger than domain consistency
        let dc = dc_propagate(&terms, &d, theta);
        for f in &out.result.fixed {
            prop_assert!(dc.fixed.contains(f));
        }
    }
}
