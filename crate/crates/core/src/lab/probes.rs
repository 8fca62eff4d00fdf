use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Base, Element, Side};
use crate::budget::Budget;
use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::setops::{iterated, project, scalar_image, sumset, PairSet};
use crate::structure::avoids_subalgebras;

use super::{ExperimentRecord, Schedule};

/// `N(π_x(G))` at scale δ for every `x ∈ X`, in the order of `X`.
pub fn measure_projection_profile(g: &PairSet, x: &DSet, budget: &Budget) -> Result<Vec<ExperimentRecord>> {
    if !g.alg().same_structure(x.alg()) || g.m() != x.m() {
        return Err(Error::AlgebraMismatch);
    }
    budget.check_pairs("projection profile", g.len() as u128 * x.len() as u128)?;
    x.points()
        .par_iter()
        .map(|xv| {
            let img = project(xv, g)?;
            Ok(ExperimentRecord::new("projection", g.alg(), "proj", Some(xv), img.len()))
        })
        .collect()
}

/// The element of smallest max-norm, ties to the lexicographically first.
fn recenter(a: &DSet) -> Result<DSet> {
    let alg = a.alg();
    let key = |x: &Element| match alg.base() {
        Base::Real => x.coords().iter().map(|c| c.unsigned_abs()).max().unwrap_or(0),
        Base::Padic { .. } => u64::MAX - alg.valuation(x).map_or(u64::MAX, |v| v as u64),
    };
    let Some(center) = a.points().iter().min_by_key(|x| key(x)).cloned() else {
        return Err(Error::EmptyInput);
    };
    if center.is_zero() {
        return Ok(a.clone());
    }
    let pts = a.points().iter().map(|x| alg.sub(x, &center)).collect();
    DSet::fit(alg.clone(), a.radius_exp(), pts)
}

/// Rounds of `n_sum (A^(n_prod) - A^(n_prod)) ∩ B(0, 1)`, each recentered and
/// re-uniformized. Row 0 is the input; row `k` has `count = |A_k|`,
/// `exponent` the verified non-concentration exponent of `A_k` at the
/// schedule's constant, and `s` the predicted `s_0 + k c_1 / 2` (at most `d`).
pub fn run_expansion(a: &DSet, schedule: &Schedule, budget: &Budget) -> Result<Vec<ExperimentRecord>> {
    if !avoids_subalgebras(a, schedule.c)?.pass {
        return Err(Error::TrappedInput(schedule.c));
    }
    let alg = a.alg();
    let d = alg.d() as f64;
    let s0 = a.verified_exponent(schedule.c)?;
    let record = |k: u32, set: &DSet, exponent: f64, op: String| {
        let mut r = ExperimentRecord::new("expand", alg, op, None, set.len());
        r.exponent = exponent;
        r.s = Some((s0 + k as f64 * schedule.c1 / 2.0).min(d));
        r.seed = Some(schedule.seed);
        r
    };
    let mut out = vec![record(0, a, s0, "input".into())];
    let mut cur = a.clone();
    for k in 1..=schedule.rounds {
        let grown = iterated(&cur, schedule.n_sum, schedule.n_prod, budget)?;
        cur = recenter(&grown)?.uniform_subset(schedule.stage)?;
        let measured = cur.verified_exponent(schedule.c)?.min(d);
        let op = format!("round{k} n_sum={} n_prod={}", schedule.n_sum, schedule.n_prod);
        out.push(record(k, &cur, measured, op));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BabyprojReport {
    /// `|A + xA|` per `x`.
    pub records: Vec<ExperimentRecord>,
    pub best_x: Element,
    pub best_count: u64,
    pub base_count: u64,
    /// `|A + x A| / |A|` at the best `x`.
    pub gain: f64,
    /// `log(gain) / log(1/δ)`.
    pub gain_exponent: f64,
}

/// `max_{x ∈ X} N(A + xA)`, with the first maximizing `x`.
pub fn probe_babyproj(a: &DSet, x: &DSet, budget: &Budget) -> Result<BabyprojReport> {
    if !a.alg().same_structure(x.alg()) || a.m() != x.m() {
        return Err(Error::AlgebraMismatch);
    }
    if a.is_empty() || x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let alg = a.alg();
    let records: Vec<ExperimentRecord> = x
        .points()
        .par_iter()
        .map(|xv| {
            let xa = scalar_image(xv, a, Side::Left)?;
            let n = sumset(a, &xa, budget)?.len();
            Ok(ExperimentRecord::new("babyproj", alg, "A+xA", Some(xv), n))
        })
        .collect::<Result<_>>()?;
    let (best, rec) = records
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, r)| r.count)
        .expect("nonempty");
    let gain = rec.count as f64 / a.len() as f64;
    Ok(BabyprojReport {
        best_x: x.points()[best].clone(),
        best_count: rec.count,
        base_count: a.len() as u64,
        gain,
        gain_exponent: gain.ln() / (alg.m() as f64 * (alg.radix() as f64).ln()),
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FibreRow {
    pub x: Element,
    /// `max_I |π_x^-1(I) ∩ G|` over cells `I` of side `ρ`.
    pub max_fibre: u64,
    /// Nonempty fibres.
    pub fibres: u64,
    pub heaviest_cell: Vec<i64>,
    /// `max_fibre >= δ^(10 c_1) |G|^(1/2)`.
    pub big: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FibreReport {
    pub g_len: u64,
    pub rho_exp: u32,
    /// `δ^(10 c_1) |G|^(1/2)`.
    pub big_threshold: f64,
    pub rows: Vec<FibreRow>,
}

/// Heaviest `ρ`-cell fibre of `G` under each `π_x`.
pub fn fibre_profile(g: &PairSet, x: &DSet, c1: f64, rho_exp: u32, budget: &Budget) -> Result<FibreReport> {
    let alg = g.alg();
    if !alg.same_structure(x.alg()) || g.m() != x.m() {
        return Err(Error::AlgebraMismatch);
    }
    if rho_exp > alg.m() {
        return Err(Error::ScaleOutOfRange {
            k: rho_exp as i64,
            m: alg.m(),
        });
    }
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    budget.check_pairs("fibre profile", g.len() as u128 * x.len() as u128)?;
    let cell = |y: &Element| -> Vec<i64> {
        match alg.base() {
            Base::Real => y.coords().iter().map(|c| c >> (alg.m() - rho_exp)).collect(),
            Base::Padic { p } => {
                let q = (p as i64).pow(rho_exp);
                y.coords().iter().map(|c| c.rem_euclid(q)).collect()
            }
        }
    };
    let delta = (alg.radix() as f64).powf(-(alg.m() as f64));
    let big_threshold = delta.powf(10.0 * c1) * (g.len() as f64).sqrt();
    let rows = x
        .points()
        .par_iter()
        .map(|xv| {
            let mut counts: HashMap<Vec<i64>, u64> = HashMap::new();
            for (a, b) in g.pairs() {
                *counts.entry(cell(&alg.add(a, &alg.mul(xv, b)))).or_insert(0) += 1;
            }
            let (heaviest_cell, max_fibre) = counts
                .iter()
                .max_by(|p, q| p.1.cmp(q.1).then_with(|| q.0.cmp(p.0)))
                .map(|(c, n)| (c.clone(), *n))
                .expect("nonempty graph");
            FibreRow {
                x: xv.clone(),
                max_fibre,
                fibres: counts.len() as u64,
                heaviest_cell,
                big: max_fibre as f64 >= big_threshold,
            }
        })
        .collect();
    Ok(FibreReport {
        g_len: g.len() as u64,
        rho_exp,
        big_threshold,
        rows,
    })
}
