//! Graph Balog-Szemerédi-Gowers by popular sums and popular paths.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::algebra::Element;
use crate::budget::Budget;
use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::setops::{sumset, PairSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsgResult {
    pub a_sub: Vec<Element>,
    pub b_sub: Vec<Element>,
    pub density_a: f64,
    pub density_b: f64,
    /// `|A_sub + B_sub|`, computed directly.
    pub sumset_count: u64,
    /// `|A +_H B|`, the partial sumset along the edges.
    pub partial_sumset: u64,
    /// `K = max(|A||B|/|H|, |A +_H B| / (|A||B|)^(1/2))`.
    pub k: f64,
    /// `c` with `|A_sub + B_sub| = K^c (|A||B|)^(1/2)`.
    pub exponent: f64,
    /// No additive structure to find: `K^2 >= min(|A|, |B|)`.
    pub degenerate: bool,
    /// Edges kept as popular.
    pub popular_edges: u64,
}

/// Keep edges whose sum is at least half as popular as the edge-weighted
/// average sum; take `A_sub` as the vertices of at least half-average
/// popular degree; take `B_sub` as the vertices reached from `A_sub` by at
/// least half the average number of popular edges.
pub fn bsg_extract(h: &PairSet, a: &DSet, b: &DSet, budget: &Budget) -> Result<BsgResult> {
    if h.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let alg = h.alg();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    if h.pairs().iter().any(|(x, y)| !a.contains(x) || !b.contains(y)) {
        return Err(Error::RangeError("H must be a subset of A x B".into()));
    }
    let sums: Vec<Element> = h.pairs().iter().map(|(x, y)| alg.add(x, y)).collect();
    let mut mult: HashMap<&Element, u64> = HashMap::new();
    for s in &sums {
        *mult.entry(s).or_insert(0) += 1;
    }
    let partial = mult.len() as u64;
    let weighted: f64 = mult.values().map(|&r| (r * r) as f64).sum::<f64>() / h.len() as f64;
    let popular: Vec<&(Element, Element)> = h
        .pairs()
        .iter()
        .zip(&sums)
        .filter(|(_, s)| 2.0 * mult[s] as f64 >= weighted)
        .map(|(e, _)| e)
        .collect();

    let mut deg: HashMap<&Element, u64> = HashMap::new();
    for (x, _) in &popular {
        *deg.entry(x).or_insert(0) += 1;
    }
    let avg_deg = popular.len() as f64 / deg.len() as f64;
    let a_keep: HashSet<&Element> = deg.iter().filter(|(_, &k)| 2.0 * k as f64 >= avg_deg).map(|(x, _)| *x).collect();

    let mut reach: HashMap<&Element, u64> = HashMap::new();
    for (x, y) in &popular {
        if a_keep.contains(x) {
            *reach.entry(y).or_insert(0) += 1;
        }
    }
    let avg_reach = reach.values().sum::<u64>() as f64 / reach.len() as f64;
    let mut a_sub: Vec<Element> = a_keep.into_iter().cloned().collect();
    let mut b_sub: Vec<Element> = reach
        .iter()
        .filter(|(_, &k)| 2.0 * k as f64 >= avg_reach)
        .map(|(y, _)| (*y).clone())
        .collect();
    a_sub.sort_unstable();
    b_sub.sort_unstable();

    let sa = DSet::new(alg.clone(), h.radius_exp(), a_sub.clone())?;
    let sb = DSet::new(alg.clone(), h.radius_exp(), b_sub.clone())?;
    let sumset_count = sumset(&sa, &sb, budget)?.len() as u64;
    let root = (na * nb).sqrt();
    let k = (na * nb / h.len() as f64).max(partial as f64 / root).max(1.0);
    let ratio = sumset_count as f64 / root;
    let exponent = if k > 1.0 {
        (ratio.ln() / k.ln()).max(0.0)
    } else if ratio <= 1.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(BsgResult {
        density_a: a_sub.len() as f64 / na,
        density_b: b_sub.len() as f64 / nb,
        a_sub,
        b_sub,
        sumset_count,
        partial_sumset: partial,
        k,
        exponent,
        degenerate: k * k >= na.min(nb),
        popular_edges: popular.len() as u64,
    })
}
