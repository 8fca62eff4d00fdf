//! Finite δ-discretized sets: storage, covering numbers, non-concentration
//! and the pigeonholed uniform subset.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::algebra::{Algebra, Base, Coords, Element};
use crate::budget::Budget;
use crate::error::{Error, Result};

/// A finite set of grid points at scale `radix^-m` inside `B(0, radix^radius_exp)`.
///
/// Real balls are the coordinate boxes `|x_j| <= radix^radius_exp`; p-adic
/// sets always live in the integers (`radius_exp = 0`).
#[derive(Clone, Debug)]
pub struct DSet {
    alg: Algebra,
    radius_exp: i32,
    points: Vec<Element>,
}

impl PartialEq for DSet {
    fn eq(&self, other: &Self) -> bool {
        self.alg.same_structure(&other.alg)
            && self.alg.m() == other.alg.m()
            && self.radius_exp == other.radius_exp
            && self.points == other.points
    }
}

impl DSet {
    /// Validate, sort and deduplicate.
    pub fn new(alg: Algebra, radius_exp: i32, points: Vec<Element>) -> Result<Self> {
        if !alg.is_real() && radius_exp != 0 {
            return Err(Error::RangeError("p-adic sets live in the unit ball (radius_exp = 0)".into()));
        }
        let bound = ball_bound(&alg, radius_exp);
        for x in &points {
            if x.dim() != alg.d() {
                return Err(Error::AlgebraMismatch);
            }
            match alg.base() {
                Base::Real => {
                    if x.coords().iter().any(|&c| (c as i128).abs() > bound) {
                        return Err(Error::RangeError(format!(
                            "point {x} outside B(0, 2^{radius_exp})"
                        )));
                    }
                }
                Base::Padic { .. } => {
                    if x.coords().iter().any(|&c| c < 0 || c >= alg.modulus()) {
                        return Err(Error::RangeError(format!("point {x} is not a residue mod p^m")));
                    }
                }
            }
        }
        Ok(Self::from_unsorted(alg, radius_exp, points))
    }

    /// Smallest radius exponent `>= min_radius_exp` containing every point.
    pub fn fit(alg: Algebra, min_radius_exp: i32, points: Vec<Element>) -> Result<Self> {
        let radius_exp = match alg.base() {
            Base::Real => {
                let max = points
                    .iter()
                    .flat_map(|x| x.coords().iter().map(|c| c.unsigned_abs()))
                    .max()
                    .unwrap_or(0);
                let mut r = min_radius_exp;
                while (max as i128) > ball_bound(&alg, r) {
                    r += 1;
                }
                r
            }
            Base::Padic { .. } => 0,
        };
        Self::new(alg, radius_exp, points)
    }

    pub(crate) fn from_unsorted(alg: Algebra, radius_exp: i32, mut points: Vec<Element>) -> Self {
        points.par_sort_unstable();
        points.dedup();
        DSet {
            alg,
            radius_exp,
            points,
        }
    }

    pub(crate) fn from_sorted(alg: Algebra, radius_exp: i32, points: Vec<Element>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        DSet {
            alg,
            radius_exp,
            points,
        }
    }

    pub fn empty(alg: Algebra, radius_exp: i32) -> Self {
        DSet::from_sorted(alg, radius_exp, Vec::new())
    }

    /// Every grid point of the half-open box `[-1, 1)^d` (real) or all of
    /// `(Z / p^m)^d` (p-adic). Every cell at every level holds the same count.
    pub fn full_grid(alg: Algebra, budget: &Budget) -> Result<Self> {
        let (lo, hi) = match alg.base() {
            Base::Real => (-alg.unit_scale(), alg.unit_scale() - 1),
            Base::Padic { .. } => (0, alg.modulus() - 1),
        };
        let side = (hi - lo + 1) as u128;
        budget.check_points("full grid", side.saturating_pow(alg.d() as u32))?;
        let points = grid_box(alg.d(), lo, hi);
        Ok(DSet::from_sorted(alg, 0, points))
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

    pub fn points(&self) -> &[Element] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Element> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.points.binary_search(x).is_ok()
    }

    /// Same algebra and radius, different points.
    pub fn with_points(&self, points: Vec<Element>) -> Self {
        DSet::from_unsorted(self.alg.clone(), self.radius_exp, points)
    }

    pub fn filter(&self, mut keep: impl FnMut(&Element) -> bool) -> Self {
        let points = self.points.iter().filter(|x| keep(x)).cloned().collect();
        DSet::from_sorted(self.alg.clone(), self.radius_exp, points)
    }

    pub fn union(&self, other: &DSet) -> Result<Self> {
        check_compatible(self, other)?;
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        Ok(DSet::from_unsorted(
            self.alg.clone(),
            self.radius_exp.max(other.radius_exp),
            pts,
        ))
    }

    /// Cell of `x` at scale `radix^-k` (`k <= m`). Real cells are half-open
    /// boxes; with `clamp`, the right endpoint of the ball joins the last cell.
    pub fn cell(&self, x: &Element, k: i32, clamp: bool) -> Coords {
        cell_of(&self.alg, self.radius_exp, x, k, clamp)
    }

    /// Number of `radix^-k` cells meeting the set.
    pub fn covering_number(&self, k: i64) -> Result<usize> {
        if k < 0 || k > self.m() as i64 {
            return Err(Error::ScaleOutOfRange { k, m: self.m() });
        }
        if k == self.m() as i64 {
            return Ok(self.len());
        }
        let mut cells: Vec<Coords> = self.points.iter().map(|x| self.cell(x, k as i32, true)).collect();
        cells.par_sort_unstable();
        cells.dedup();
        Ok(cells.len())
    }

    fn level_counts(&self, k: i32, clamp: bool) -> HashMap<Coords, usize> {
        let mut counts: HashMap<Coords, usize> = HashMap::new();
        for x in &self.points {
            *counts.entry(self.cell(x, k, clamp)).or_default() += 1;
        }
        counts
    }

    /// Largest number of points in one `radix^-k` cell, and the smallest point
    /// of the first such cell in point order.
    fn heaviest_cell(&self, k: i32) -> (usize, Element) {
        let counts = self.level_counts(k, true);
        let n_max = counts.values().copied().max().unwrap_or(0);
        let center = self
            .points
            .iter()
            .find(|x| counts[&self.cell(x, k, true)] == n_max)
            .cloned()
            .unwrap_or_else(|| self.alg.zero());
        (n_max, center)
    }

    /// Check `N(A ∩ B(x, r)) <= C r^s |A|` over centers in A and radii
    /// `r = radix^-k`, `0 <= k <= m`, with balls replaced by the grid cells
    /// containing the centers.
    pub fn is_nonconcentrated(&self, s: f64, c: f64) -> Result<NcReport> {
        if self.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = self.len() as f64;
        let radix = self.alg.radix() as f64;
        let levels: Vec<(i32, usize, Element)> = (0..=self.m() as i32)
            .into_par_iter()
            .map(|k| {
                let (count, center) = self.heaviest_cell(k);
                (k, count, center)
            })
            .collect();
        let mut worst: Option<(f64, i32, usize, Element)> = None;
        for (k, count, center) in levels {
            let ratio = count as f64 * radix.powf(k as f64 * s) / n;
            if worst.as_ref().map_or(true, |w| ratio > w.0) {
                worst = Some((ratio, k, count, center));
            }
        }
        let (best_c, k, count, center) = worst.expect("at least one level");
        Ok(NcReport {
            pass: best_c <= c * (1.0 + 1e-12),
            s,
            c,
            worst_center: center,
            worst_radius_exp: k,
            worst_count: count,
            best_c,
        })
    }

    /// Largest `s <= d` for which the set passes `is_nonconcentrated(s, c)`.
    pub fn verified_exponent(&self, c: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = self.len() as f64;
        let ln_radix = (self.alg.radix() as f64).ln();
        let mut s = self.alg.d() as f64;
        for k in 1..=self.m() as i32 {
            let (count, _) = self.heaviest_cell(k);
            s = s.min((c * n / count as f64).ln() / (k as f64 * ln_radix));
        }
        Ok(s.max(0.0))
    }

    /// All grid points within `radix^-k` of the set: an ℓ∞ box of half-width
    /// `radix^(m-k)` units (real, clipped to the ball) or the residue class
    /// mod `p^k` (p-adic).
    pub fn neighborhood(&self, k: i64, budget: &Budget) -> Result<DSet> {
        if k < 0 || k > self.m() as i64 {
            return Err(Error::ScaleOutOfRange { k, m: self.m() });
        }
        let d = self.alg.d() as u32;
        let spread = self.m() - k as u32;
        let (offsets, per_point) = match self.alg.base() {
            Base::Real => {
                let w = 1i64 << spread;
                (grid_box(self.alg.d(), -w, w), (2 * w as u128 + 1).pow(d))
            }
            Base::Padic { p } => {
                let step = (p as i64).pow(k as u32);
                let count = (p as i64).pow(spread);
                let offsets = grid_box(self.alg.d(), 0, count - 1)
                    .into_iter()
                    .map(|e| Element::new(e.coords().iter().map(|&c| c * step)))
                    .collect();
                (offsets, (count as u128).pow(d))
            }
        };
        budget.check_points("neighborhood", per_point * self.len() as u128)?;
        let bound = ball_bound(&self.alg, self.radius_exp) as i64;
        let pts: Vec<Element> = self
            .points
            .par_iter()
            .flat_map_iter(|x| {
                offsets.iter().filter_map(move |o| {
                    let y = self.alg.add(x, o);
                    (!self.alg.is_real() || y.coords().iter().all(|c| c.abs() <= bound)).then_some(y)
                })
            })
            .collect();
        Ok(self.with_points(pts))
    }

    /// Remove the open ball of radius `radix^-k` around `center`.
    pub fn remove_ball(&self, center: &Element, k: i32) -> DSet {
        match self.alg.base() {
            Base::Real => {
                let shift = self.m() as i32 - k;
                self.filter(|x| {
                    let n2 = self.alg.norm_sq_units(&self.alg.sub(x, center));
                    if shift < 0 {
                        // radius below one grid unit: only x = center is inside
                        n2 > 0
                    } else {
                        let r = 1i128 << shift;
                        n2 >= r * r
                    }
                })
            }
            Base::Padic { .. } => {
                if k < 0 {
                    return self.filter(|_| false);
                }
                // distance < p^-k  <=>  valuation of x - c exceeds k
                self.filter(|x| self.alg.valuation(&self.alg.sub(x, center)).map_or(false, |v| v <= k as u32))
            }
        }
    }

    /// Levels `m - T, m - 2T, ...` down to the coarsest level the ball needs.
    pub fn stage_levels(&self, t: u32) -> Vec<i32> {
        let t = t.max(1) as i32;
        let coarsest = match self.alg.base() {
            Base::Real => -self.radius_exp.max(0),
            Base::Padic { .. } => 0,
        };
        let mut out = Vec::new();
        let mut level = self.m() as i32;
        while level > coarsest {
            level = (level - t).max(coarsest);
            out.push(level);
        }
        out
    }

    /// Pigeonholing: at each stage level, from fine to coarse,
    /// group the nonempty cells by `floor(log_radix(count / min count))` and
    /// keep the class carrying the most points (ties go to the lower class).
    /// Whole cells are removed, so finer stages stay uniform. Cells here are
    /// the unclamped half-open boxes.
    pub fn uniform_subset(&self, t: u32) -> Result<DSet> {
        if self.is_empty() {
            return Err(Error::EmptyInput);
        }
        let radix = self.alg.radix() as u128;
        let mut current = self.clone();
        for level in self.stage_levels(t) {
            let counts = current.level_counts(level, false);
            let n_min = *counts.values().min().expect("nonempty") as u128;
            let class_of = |n: usize| {
                let mut i = 0u32;
                let mut bound = n_min * radix;
                while n as u128 >= bound {
                    bound *= radix;
                    i += 1;
                }
                i
            };
            let mut mass: HashMap<u32, usize> = HashMap::new();
            for &n in counts.values() {
                *mass.entry(class_of(n)).or_default() += n;
            }
            let best = mass
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(&i, _)| i)
                .expect("nonempty");
            current = current.filter(|x| class_of(counts[&current.cell(x, level, false)]) == best);
        }
        Ok(current)
    }

    /// Largest max/min ratio of nonempty cell counts over the stage levels
    /// (unclamped cells), the quantity `uniform_subset` controls.
    pub fn uniformity_ratio(&self, t: u32) -> f64 {
        self.stage_levels(t)
            .into_iter()
            .map(|level| {
                let counts = self.level_counts(level, false);
                let max = counts.values().copied().max().unwrap_or(1);
                let min = counts.values().copied().min().unwrap_or(1);
                max as f64 / min as f64
            })
            .fold(1.0, f64::max)
    }
}

/// Outcome of a non-concentration check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NcReport {
    pub pass: bool,
    pub s: f64,
    pub c: f64,
    pub worst_center: Element,
    /// The worst ball has radius `radix^-worst_radius_exp`.
    pub worst_radius_exp: i32,
    pub worst_count: usize,
    pub best_c: f64,
}

/// `log(count) / log(1/δ)`, the exponent a covering count represents.
pub fn covering_exponent(count: usize, m: u32, radix: u64) -> f64 {
    if count == 0 {
        return 0.0;
    }
    (count as f64).ln() / (m as f64 * (radix as f64).ln())
}

pub(crate) fn check_compatible(a: &DSet, b: &DSet) -> Result<()> {
    if !a.alg.same_structure(&b.alg) {
        return Err(Error::AlgebraMismatch);
    }
    if a.m() != b.m() {
        return Err(Error::ScaleMismatch(a.m(), b.m()));
    }
    Ok(())
}

/// Largest coordinate magnitude allowed in `B(0, radix^r)`, in grid units.
pub(crate) fn ball_bound(alg: &Algebra, r: i32) -> i128 {
    let e = alg.m() as i32 + r;
    if e < 0 {
        0
    } else {
        alg.radix_pow(e as u32)
    }
}

pub(crate) fn cell_of(alg: &Algebra, radius_exp: i32, x: &Element, k: i32, clamp: bool) -> Coords {
    let m = alg.m() as i32;
    match alg.base() {
        Base::Real => {
            let shift = m - k;
            let edge = ball_bound(alg, radius_exp) as i64;
            let clamp = clamp && shift > 0;
            x.coords()
                .iter()
                .map(|&c| {
                    let c = if clamp && c == edge { c - 1 } else { c };
                    if shift >= 0 {
                        c >> shift
                    } else {
                        c << -shift
                    }
                })
                .collect()
        }
        Base::Padic { p } => {
            let q = (p as i64).pow(k.max(0) as u32);
            x.coords().iter().map(|&c| c % q).collect()
        }
    }
}

/// All integer vectors in `[lo, hi]^d`, in lexicographic order.
pub(crate) fn grid_box(d: usize, lo: i64, hi: i64) -> Vec<Element> {
    let mut out = Vec::new();
    let mut cur: SmallVec<[i64; 4]> = SmallVec::from_elem(lo, d);
    if hi < lo {
        return out;
    }
    loop {
        out.push(Element(cur.clone()));
        let mut j = d;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if cur[j] < hi {
                cur[j] += 1;
                for c in cur.iter_mut().skip(j + 1) {
                    *c = lo;
                }
                break;
            }
        }
    }
}
