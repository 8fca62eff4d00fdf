//! Set calculus on δ-discretized sets: sums, differences, products, iterated
//! combinations, projections `π_x`, quotient sets and linear coordinate changes.

mod kernel;
mod linear;

use std::collections::HashMap;

use rayon::prelude::*;

use crate::algebra::{Algebra, Base, Element, Side};
use crate::budget::Budget;
use crate::dset::{ball_bound, check_compatible, DSet};
use crate::error::{Error, Result};

pub use kernel::SumStrategy;
pub use linear::{apply_dual, apply_linear_map, change_of_basis, inverse_transpose, LinearMap};

pub(crate) use kernel::{collect_distinct, sum_multiplicities};

/// A finite set of grid points of `E × E`.
#[derive(Clone, Debug)]
pub struct PairSet {
    alg: Algebra,
    radius_exp: i32,
    pairs: Vec<(Element, Element)>,
}

impl PartialEq for PairSet {
    fn eq(&self, other: &Self) -> bool {
        self.alg.same_structure(&other.alg)
            && self.alg.m() == other.alg.m()
            && self.radius_exp == other.radius_exp
            && self.pairs == other.pairs
    }
}

impl PairSet {
    /// Validate both components against the ball, then sort and deduplicate.
    pub fn new(alg: Algebra, radius_exp: i32, pairs: Vec<(Element, Element)>) -> Result<Self> {
        // reuse the point validation of DSet on each component
        let (firsts, seconds): (Vec<Element>, Vec<Element>) = pairs.iter().cloned().unzip();
        DSet::new(alg.clone(), radius_exp, firsts)?;
        DSet::new(alg.clone(), radius_exp, seconds)?;
        Ok(Self::from_unsorted(alg, radius_exp, pairs))
    }

    /// Smallest radius `>= min_radius_exp` holding both components.
    pub fn fit(alg: Algebra, min_radius_exp: i32, pairs: Vec<(Element, Element)>) -> Result<Self> {
        let coords: Vec<Element> = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        let r = DSet::fit(alg.clone(), min_radius_exp, coords)?.radius_exp();
        Self::new(alg, r, pairs)
    }

    pub(crate) fn from_unsorted(alg: Algebra, radius_exp: i32, mut pairs: Vec<(Element, Element)>) -> Self {
        pairs.par_sort_unstable();
        pairs.dedup();
        PairSet {
            alg,
            radius_exp,
            pairs,
        }
    }

    /// `A × B`.
    pub fn product(a: &DSet, b: &DSet) -> Result<Self> {
        check_compatible(a, b)?;
        let pairs = a
            .points()
            .iter()
            .flat_map(|x| b.points().iter().map(move |y| (x.clone(), y.clone())))
            .collect();
        // already sorted: lexicographic in (x, y)
        Ok(PairSet {
            alg: a.alg().clone(),
            radius_exp: a.radius_exp().max(b.radius_exp()),
            pairs,
        })
    }

    pub fn alg(&self) -> &Algebra {
        &self.alg
    }

    pub fn m(&self) -> u32 {
        self.alg.m()
    }

    pub fn radius_exp(&self) -> i32 {
        self.radius_exp
    }

    pub fn pairs(&self) -> &[(Element, Element)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: &Element, b: &Element) -> bool {
        self.pairs.binary_search(&(a.clone(), b.clone())).is_ok()
    }

    pub fn union(&self, other: &PairSet) -> Result<Self> {
        if !self.alg.same_structure(&other.alg) {
            return Err(Error::AlgebraMismatch);
        }
        if self.m() != other.m() {
            return Err(Error::ScaleMismatch(self.m(), other.m()));
        }
        let mut pairs = self.pairs.clone();
        pairs.extend_from_slice(&other.pairs);
        Ok(Self::from_unsorted(
            self.alg.clone(),
            self.radius_exp.max(other.radius_exp),
            pairs,
        ))
    }

    pub fn filter(&self, mut keep: impl FnMut(&Element, &Element) -> bool) -> Self {
        PairSet {
            alg: self.alg.clone(),
            radius_exp: self.radius_exp,
            pairs: self.pairs.iter().filter(|(a, b)| keep(a, b)).cloned().collect(),
        }
    }

    /// First components.
    pub fn first(&self) -> DSet {
        DSet::from_unsorted(
            self.alg.clone(),
            self.radius_exp,
            self.pairs.iter().map(|(a, _)| a.clone()).collect(),
        )
    }

    /// Second components.
    pub fn second(&self) -> DSet {
        DSet::from_unsorted(
            self.alg.clone(),
            self.radius_exp,
            self.pairs.iter().map(|(_, b)| b.clone()).collect(),
        )
    }
}

/// Reduce raw integer vectors into the algebra: mod `p^m` for p-adic.
fn normalize(alg: &Algebra, pts: Vec<Element>) -> Vec<Element> {
    match alg.base() {
        Base::Real => pts,
        Base::Padic { .. } => {
            let md = alg.modulus();
            pts.into_iter()
                .map(|x| Element::new(x.coords().iter().map(|c| c.rem_euclid(md))))
                .collect()
        }
    }
}

fn finish(alg: &Algebra, min_radius_exp: i32, pts: Vec<Element>) -> Result<DSet> {
    DSet::fit(alg.clone(), min_radius_exp, normalize(alg, pts))
}

fn combine(a: &DSet, b: &DSet, negate: bool, strategy: SumStrategy, budget: &Budget, stage: &str) -> Result<DSet> {
    check_compatible(a, b)?;
    let pts = kernel::distinct_sums(a.points(), b.points(), negate, strategy, budget, stage)?;
    finish(a.alg(), a.radius_exp().max(b.radius_exp()), pts)
}

/// `A + B`.
pub fn sumset(a: &DSet, b: &DSet, budget: &Budget) -> Result<DSet> {
    combine(a, b, false, SumStrategy::Auto, budget, "sumset")
}

/// `A + B` with the kernel forced.
pub fn sumset_with(a: &DSet, b: &DSet, strategy: SumStrategy, budget: &Budget) -> Result<DSet> {
    combine(a, b, false, strategy, budget, "sumset")
}

/// `A - B`.
pub fn difference_set(a: &DSet, b: &DSet, budget: &Budget) -> Result<DSet> {
    combine(a, b, true, SumStrategy::Auto, budget, "difference set")
}

/// `{ab}` (`Left`) or `{ba}` (`Right`), each product rounded once.
pub fn product_set(a: &DSet, b: &DSet, side: Side, budget: &Budget) -> Result<DSet> {
    check_compatible(a, b)?;
    let alg = a.alg();
    let (pa, pb) = (a.points(), b.points());
    let pts = collect_distinct(pa.len(), pb.len(), budget, "product set", |i, j| {
        Some(alg.mul_sided(&pa[i], &pb[j], side))
    })?;
    finish(alg, a.radius_exp().max(b.radius_exp()), pts)
}

/// `A^(n) = A ⋯ A`, rounding after each multiplication.
pub fn power_set(a: &DSet, n: u32, budget: &Budget) -> Result<DSet> {
    if n == 0 {
        return Err(Error::RangeError("product depth must be at least 1".into()));
    }
    let mut acc = a.clone();
    for _ in 1..n {
        acc = product_set(&acc, a, Side::Left, budget)?;
    }
    Ok(acc)
}

/// `n A = A + ⋯ + A` by repeated doubling.
pub fn multiple_sumset(a: &DSet, n: u32, budget: &Budget) -> Result<DSet> {
    if n == 0 {
        return Err(Error::RangeError("sum count must be at least 1".into()));
    }
    let mut result: Option<DSet> = None;
    let mut power = a.clone();
    let mut k = n;
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => power.clone(),
                Some(r) => sumset(&r, &power, budget)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        power = sumset(&power, &power, budget)?;
    }
    Ok(result.expect("n >= 1"))
}

/// Intersection with the closed unit ball (Euclidean for real algebras).
pub fn restrict_to_unit_ball(a: &DSet) -> DSet {
    let alg = a.alg().clone();
    let out = a.filter(|x| alg.in_ball(x, 0));
    DSet::from_sorted(alg, a.radius_exp().min(0), out.into_points())
}

/// `n_sum (A^(n_prod) - A^(n_prod)) ∩ B(0, 1)`.
pub fn iterated(a: &DSet, n_sum: u32, n_prod: u32, budget: &Budget) -> Result<DSet> {
    let p = power_set(a, n_prod, budget)?;
    let diff = difference_set(&p, &p, budget)?;
    let total = multiple_sumset(&diff, n_sum, budget)?;
    Ok(restrict_to_unit_ball(&total))
}

/// `{xa}` (`Left`) or `{ax}` (`Right`).
pub fn scalar_image(x: &Element, a: &DSet, side: Side) -> Result<DSet> {
    let alg = a.alg();
    if x.dim() != alg.d() {
        return Err(Error::AlgebraMismatch);
    }
    let pts: Vec<Element> = a.points().par_iter().map(|y| alg.mul_sided(x, y, side)).collect();
    finish(alg, a.radius_exp(), pts)
}

/// `π_x(G) = {a + xb : (a, b) ∈ G}`.
pub fn project(x: &Element, g: &PairSet) -> Result<DSet> {
    let alg = g.alg();
    if x.dim() != alg.d() {
        return Err(Error::AlgebraMismatch);
    }
    let pts: Vec<Element> = g
        .pairs()
        .par_iter()
        .map(|(a, b)| alg.add(a, &alg.mul(x, b)))
        .collect();
    finish(alg, g.radius_exp(), pts)
}

/// A quotient set at scale `Δ = δ / ρ^3` with, optionally, the
/// lexicographically smallest witness `(a, b, c, d)` of each point.
#[derive(Clone, Debug)]
pub struct QuotientSet {
    pub set: DSet,
    pub witnesses: Option<Vec<[Element; 4]>>,
    /// Algebra of the set the quotients were taken from (precision `m`).
    pub source: Algebra,
    pub rho_exp: u32,
}

impl QuotientSet {
    /// Wrap a set given directly at precision `m - 3 rho_exp`, with no witnesses.
    pub fn from_set(set: DSet, rho_exp: u32) -> Result<Self> {
        let source = set.alg().with_precision(set.m() + 3 * rho_exp)?;
        Ok(QuotientSet {
            set,
            witnesses: None,
            source,
            rho_exp,
        })
    }
}

/// `Q = {(a-b)(c-d)^-1 : a, b, c, d ∈ A, |c-d| > ρ}` (`Left`; `Right` gives
/// `(c-d)^-1 (a-b)`), with `ρ = radix^-rho_exp`, represented on the grid of
/// scale `Δ = δ/ρ^3`, i.e. precision `m - 3 rho_exp`. Real quotients are
/// rounded once onto that grid. p-adic quotients keep the integral ones.
pub fn quotient_set(a: &DSet, rho_exp: u32, side: Side, with_witnesses: bool, budget: &Budget) -> Result<QuotientSet> {
    let alg = a.alg();
    let m = alg.m();
    if 3 * rho_exp >= m {
        return Err(Error::RangeError(format!(
            "need 3 rho_exp < m for Δ = δ/ρ^3 to be finer than 1 (rho_exp = {rho_exp}, m = {m})"
        )));
    }
    let mq = m - 3 * rho_exp;
    let out_alg = alg.with_precision(mq)?;
    let pts = a.points();
    let n = pts.len();
    budget.check_pairs("quotient set differences", n as u128 * n as u128)?;

    // distinct differences, each with its lexicographically smallest pair
    let mut diffs: HashMap<Element, (usize, usize)> = HashMap::new();
    for i in 0..n {
        for j in 0..n {
            diffs.entry(alg.sub(&pts[i], &pts[j])).or_insert((i, j));
        }
    }
    let admissible = |v: &Element| match alg.base() {
        Base::Real => {
            let r = ball_bound(alg, -(rho_exp as i32));
            alg.norm_sq_units(v) > r * r
        }
        Base::Padic { .. } => alg.valuation(v).is_some_and(|val| val < rho_exp),
    };
    let mut nums: Vec<(Element, (usize, usize))> = diffs.into_iter().collect();
    nums.sort_unstable_by(|x, y| x.1.cmp(&y.1));
    let dens: Vec<&(Element, (usize, usize))> = nums.iter().filter(|(v, _)| admissible(v)).collect();
    if dens.is_empty() {
        return Err(Error::NoAdmissiblePairs);
    }
    budget.check_pairs("quotient set", nums.len() as u128 * dens.len() as u128)?;

    let quotient = |num: &Element, den: &Element| -> Option<Element> {
        match alg.base() {
            Base::Real => alg.div_at(num, den, side, mq).ok(),
            Base::Padic { .. } => {
                let v_den = alg.valuation(den)?;
                if alg.valuation(num).is_some_and(|v| v < v_den) {
                    return None;
                }
                alg.div_at(num, den, side, mq).ok()
            }
        }
    };
    // nums and dens are ordered by witness, so the first hit per cell is the smallest
    let best: HashMap<Element, ((usize, usize), (usize, usize))> = nums
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<Element, ((usize, usize), (usize, usize))>, (num, wn)| {
            for (den, wd) in &dens {
                if let Some(q) = quotient(num, den) {
                    let cand = (*wn, *wd);
                    acc.entry(q).and_modify(|w| *w = (*w).min(cand)).or_insert(cand);
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut x, y| {
            for (q, w) in y {
                x.entry(q).and_modify(|v| *v = (*v).min(w)).or_insert(w);
            }
            x
        });
    budget.check_points("quotient set", best.len() as u128)?;
    let mut entries: Vec<(Element, ((usize, usize), (usize, usize)))> = best.into_iter().collect();
    entries.sort_unstable_by(|x, y| x.0.cmp(&y.0));
    let witnesses = with_witnesses.then(|| {
        entries
            .iter()
            .map(|(_, ((i, j), (k, l)))| [pts[*i].clone(), pts[*j].clone(), pts[*k].clone(), pts[*l].clone()])
            .collect()
    });
    let points = entries.into_iter().map(|(q, _)| q).collect();
    let set = DSet::fit(out_alg, 0, points)?;
    Ok(QuotientSet {
        set,
        witnesses,
        source: alg.clone(),
        rho_exp,
    })
}

#[cfg(test)]
mod tests;
