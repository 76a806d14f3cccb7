//! Seeded random instances for property tests and benchmarks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model_io::ProbNetwork;
use crate::obdd::{Cube, Obdd, ObddBuilder};
use crate::vars::{VarKind, VarTable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Table with `n_dec` decision and `n_sto` stochastic variables in a random
/// interleaved order. Probabilities are drawn from [0.05, 0.95].
pub fn random_vars(rng: &mut impl Rng, n_dec: usize, n_sto: usize) -> VarTable {
    let mut decls: Vec<(String, VarKind)> = (0..n_dec)
        .map(|i| (format!("d{i}"), VarKind::Decision))
        .chain((0..n_sto).map(|i| {
            let p = (rng.gen_range(0.05..0.95) * 100.0_f64).round() / 100.0;
            (format!("s{i}"), VarKind::Stochastic { prob: p })
        }))
        .collect();
    decls.shuffle(rng);
    VarTable::from_decls(&decls, None).expect("generated names are unique")
}

/// Monotone DNF with `n_cubes` cubes of 1..=`max_len` positive literals.
pub fn random_monotone_dnf(
    rng: &mut impl Rng,
    vars: &VarTable,
    n_cubes: usize,
    max_len: usize,
) -> Vec<Cube> {
    let ids: Vec<_> = vars.iter().map(|v| v.id).collect();
    (0..n_cubes)
        .map(|_| {
            let len = rng.gen_range(1..=max_len.min(ids.len()).max(1));
            let lits: Vec<_> = ids.choose_multiple(rng, len).copied().collect();
            Cube::positive(lits).expect("distinct literals")
        })
        .collect()
}

/// Up to `terms` monotone diagrams sharing one random table with at most 10
/// decision and 10 stochastic variables.
pub fn random_instance(
    rng: &mut impl Rng,
    max_dec: usize,
    max_sto: usize,
    terms: usize,
) -> (Arc<VarTable>, Vec<Arc<Obdd>>) {
    let n_dec = rng.gen_range(1..=max_dec.max(1));
    let n_sto = rng.gen_range(0..=max_sto);
    let vars = Arc::new(random_vars(rng, n_dec, n_sto));
    let mut builder = ObddBuilder::new(vars.clone());
    let obdds = (0..terms)
        .map(|_| {
            let n_cubes = rng.gen_range(1..=5);
            let cubes = random_monotone_dnf(rng, &vars, n_cubes, 4);
            let root = builder.from_dnf(&cubes).expect("valid cubes");
            Arc::new(builder.extract(root))
        })
        .collect();
    (vars, obdds)
}

/// Connected undirected network on `n` nodes with `m` edges (clamped to a
/// spanning tree minimum and the complete graph maximum) and edge
/// probabilities uniform in [0.05, 0.95], rounded to two decimals.
pub fn random_network(rng: &mut impl Rng, n: usize, m: usize) -> ProbNetwork {
    let n = n.max(2);
    let m = m.clamp(n - 1, n * (n - 1) / 2);
    let mut net = ProbNetwork::new();
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    for name in &names {
        net.add_node(name).expect("fresh name");
    }
    let prob =
        |rng: &mut dyn rand::RngCore| (rng.gen_range(0.05..0.95) * 100.0_f64).round() / 100.0;
    let mut present = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.gen_range(0..v);
        present[u][v] = true;
        let p = prob(rng);
        net.add_edge(&names[u], &names[v], p).expect("new edge");
    }
    let mut rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !present[u][v])
        .collect();
    rest.shuffle(rng);
    for &(u, v) in rest.iter().take(m - (n - 1)) {
        let p = prob(rng);
        net.add_edge(&names[u], &names[v], p).expect("new edge");
    }
    net
}
