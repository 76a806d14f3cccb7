mod common;

use common::*;
use proptest::prelude::*;
use scop_core::generate::{random_instance, rng};
use scop_core::{evaluate, model_probability, Domain, DomainState, Obdd, VarTable};
use std::sync::Arc;

fn xy_doms(o: &Obdd, x: Option<bool>, y: Option<bool>) -> DomainState {
    let mut d = DomainState::new(o.vars());
    if let Some(b) = x {
        d.fix(var(o, "x"), b).unwrap();
    }
    if let Some(b) = y {
        d.fix(var(o, "y"), b).unwrap();
    }
    d
}

#[test]
fn xy_strategy_values() {
    // computed from the diagram: r=.9 to x, s=.6, t=.3
    let o = xy();
    let cases = [
        (false, false, 0.0),
        (true, false, 0.9 * 0.3),
        (true, true, 0.6),
        (false, true, 0.6),
    ];
    for (x, y, want) in cases {
        let d = xy_doms(&o, Some(x), Some(y));
        let got = evaluate(&o, &d);
        assert!((got - want).abs() < 1e-12, "x={x} y={y}: {got}");
        assert!((got - brute_wmc_doms(&o, &d)).abs() < 1e-12);
    }
}

#[test]
fn free_counts_as_true_on_xy() {
    let o = xy();
    assert!((evaluate(&o, &xy_doms(&o, None, None)) - 0.6).abs() < 1e-12);
    assert_eq!(
        evaluate(&o, &xy_doms(&o, None, Some(false))),
        evaluate(&o, &xy_doms(&o, Some(true), Some(false)))
    );
}

#[test]
fn terminal_true_is_one() {
    let vars = Arc::new(VarTable::new());
    let o = Obdd::constant(vars.clone(), true);
    assert_eq!(evaluate(&o, &DomainState::new(&vars)), 1.0);
}

#[test]
fn connectivity_all_decisions_true_matches_enumeration() {
    let o = ac_obdd();
    let d = DomainState::with_fixed(
        o.vars(),
        &o.vars().decisions().map(|v| (v, true)).collect::<Vec<_>>(),
    )
    .unwrap();
    let want = brute_wmc_doms(&o, &d);
    assert!((evaluate(&o, &d) - want).abs() < 1e-12);

    // same sum through model_probability
    let sto: Vec<_> = o.vars().stochastic().collect();
    let mut sum = 0.0;
    for mask in 0u32..(1 << sto.len()) {
        let mut a: Vec<Option<bool>> = o
            .vars()
            .iter()
            .map(|v| v.is_decision().then_some(true))
            .collect();
        for (k, v) in sto.iter().enumerate() {
            a[v.index()] = Some(mask >> k & 1 == 1);
        }
        sum += model_probability(&o, &a).unwrap();
    }
    assert!((sum - want).abs() < 1e-12);
}

#[test]
fn model_probability_of_worked_model() {
    let o = ac_obdd();
    let mut a: Vec<Option<bool>> = o
        .vars()
        .iter()
        .map(|v| v.is_decision().then_some(true))
        .collect();
    for v in o.vars().stochastic() {
        a[v.index()] = Some(o.vars().name(v) == "t(a,c)");
    }
    let want = 0.4 * (1.0 - 0.8) * (1.0 - 0.1) * (1.0 - 0.5) * (1.0 - 0.7);
    assert!((model_probability(&o, &a).unwrap() - want).abs() < 1e-12);

    // nothing transmits: the formula is false
    for v in o.vars().stochastic() {
        a[v.index()] = Some(false);
    }
    assert_eq!(model_probability(&o, &a).unwrap(), 0.0);

    a[0] = None;
    assert!(model_probability(&o, &a).is_err());
    assert!(model_probability(&o, &a[1..]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn evaluate_matches_enumeration_and_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (vars, obdds) = random_instance(&mut r, 6, 8, 1);
        let o = &obdds[0];
        let decs: Vec<_> = vars.decisions().collect();
        for mask in 0u32..(1 << decs.len()) {
            let mut d = DomainState::new(&vars);
            for (k, &v) in decs.iter().enumerate() {
                d.fix(v, mask >> k & 1 == 1).unwrap();
            }
            let f = evaluate(o, &d);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((f - brute_wmc_doms(o, &d)).abs() < 1e-12);
            for &v in &decs {
                if d.get(v) == Some(Domain::FalseOnly) {
                    let mut up = d.clone();
                    up.set(v, Domain::TrueOnly);
                    prop_assert!(evaluate(o, &up) >= f - 1e-15);
                    let mut free = d.clone();
                    free.set(v, Domain::Both);
                    prop_assert_eq!(evaluate(o, &free), evaluate(o, &up));
                }
            }
        }
    }
}
