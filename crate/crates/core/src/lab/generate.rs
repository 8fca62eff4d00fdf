use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{make_algebra, Algebra, AlgebraKind, AlgebraSpec, Base, Element};
use crate::budget::Budget;
use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::setops::PairSet;

/// Non-concentration constant used to accept generated sets.
pub const NC_CONSTANT: f64 = 8.0;

const MAX_DRAWS: usize = 10;

/// Random `s`-dimensional set by a branching process on grid cells: every
/// child cell survives independently with probability `radix^(s-d)`, so a
/// cell has `radix^s` children on average; a cell whose children all die
/// keeps one at random. Real sets grow inside `[-1, 1)^d`, p-adic ones in
/// all of the integers. A draw is accepted once it is a `(δ, s, 8)`-set.
pub fn gen_random_dset(alg: &Algebra, s: f64, seed: u64, budget: &Budget) -> Result<DSet> {
    let d = alg.d();
    if !(s > 0.0 && s <= d as f64) {
        return Err(Error::RangeError(format!("need 0 < s <= d, got s = {s}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let a = draw(alg, s, &mut rng, budget)?;
        if a.is_nonconcentrated(s, NC_CONSTANT)?.pass {
            return Ok(a);
        }
    }
    Err(Error::GenerationFailed(MAX_DRAWS))
}

/// A single unverified draw of [`gen_random_dset`].
pub fn draw_random_dset(alg: &Algebra, s: f64, seed: u64, budget: &Budget) -> Result<DSet> {
    if !(s > 0.0 && s <= alg.d() as f64) {
        return Err(Error::RangeError(format!("need 0 < s <= d, got s = {s}")));
    }
    draw(alg, s, &mut ChaCha8Rng::seed_from_u64(seed), budget)
}

fn draw(alg: &Algebra, s: f64, rng: &mut ChaCha8Rng, budget: &Budget) -> Result<DSet> {
    let d = alg.d();
    let radix = alg.radix() as i64;
    let keep = (alg.radix() as f64).powf(s - d as f64).min(1.0);
    let children = (radix as usize).pow(d as u32);
    let m = alg.m();
    // (corner of the root cell, child step at each split)
    let (root, steps): (Vec<i64>, Vec<i64>) = match alg.base() {
        Base::Real => (vec![-(1i64 << m); d], (0..=m).map(|k| 1i64 << (m - k)).collect()),
        Base::Padic { .. } => (vec![0; d], (0..m).map(|k| radix.pow(k)).collect()),
    };
    let mut cells = vec![root];
    for step in steps {
        budget.check_points("random set", (cells.len() * children) as u128)?;
        let mut next = Vec::new();
        for corner in &cells {
            let before = next.len();
            for k in 0..children {
                if rng.gen_bool(keep) {
                    next.push(child(corner, k, radix, step));
                }
            }
            if next.len() == before {
                next.push(child(corner, rng.gen_range(0..children), radix, step));
            }
        }
        cells = next;
    }
    DSet::new(alg.clone(), 0, cells.into_iter().map(Element::new).collect())
}

fn child(corner: &[i64], mut k: usize, radix: i64, step: i64) -> Vec<i64> {
    corner
        .iter()
        .map(|&c| {
            let digit = (k % radix as usize) as i64;
            k /= radix as usize;
            c + digit * step
        })
        .collect()
}

/// `{0, h, 2h, ..., (n-1)h}` on the real axis, `h` in grid units.
pub fn ap(alg: &Algebra, n: usize, step_units: i64) -> Result<DSet> {
    let pts = (0..n as i64)
        .map(|k| {
            let mut c = vec![0; alg.d()];
            c[0] = k * step_units;
            alg.element(c)
        })
        .collect::<Result<Vec<_>>>()?;
    match alg.base() {
        Base::Real => DSet::fit(alg.clone(), 0, pts),
        Base::Padic { .. } => DSet::new(alg.clone(), 0, pts),
    }
}

/// Grid points nearest to `ceil(2π/δ)` equally spaced points of the unit
/// circle in the plane of the first two coordinates.
pub fn circle_net(alg: &Algebra) -> Result<DSet> {
    if !alg.is_real() || alg.d() < 2 {
        return Err(Error::RangeError("circle net needs a real algebra of dimension >= 2".into()));
    }
    let scale = alg.unit_scale() as f64;
    let n = (std::f64::consts::TAU * scale).ceil() as usize;
    let pts = (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64;
            let mut c = vec![0; alg.d()];
            c[0] = (scale * theta.cos()).round() as i64;
            c[1] = (scale * theta.sin()).round() as i64;
            Element::new(c)
        })
        .collect();
    DSet::new(alg.clone(), 0, pts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    /// `G = A × A`, `X = A ∪ {i}`.
    One,
    /// `G = (A × A) ∪ (iA × A)`, `X = A ∪ iA`.
    Two,
    /// `G = (A × A) ∪ (iA × iA)`, `X = A ∪ iA`.
    TwoAsPrinted,
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    /// `{0, δ, 2δ, ..., 1}`.
    pub a: DSet,
    pub g: PairSet,
    /// `[G]` for `One`, `[G_0, G_1]` otherwise.
    pub parts: Vec<PairSet>,
    pub x: DSet,
}

/// The complex examples built on `A = {0, δ, ..., 1}` at `δ = 2^-m`.
pub fn gen_counterexample(which: Which, m: u32) -> Result<Counterexample> {
    let alg = make_algebra(&AlgebraSpec::new(AlgebraKind::C, m))?;
    let n = (1i64 << m) + 1;
    let real: Vec<Element> = (0..n).map(|k| Element::new([k, 0])).collect();
    let imag: Vec<Element> = (0..n).map(|k| Element::new([0, k])).collect();
    let a = DSet::new(alg.clone(), 0, real.clone())?;
    let ia = DSet::new(alg.clone(), 0, imag.clone())?;
    let g0 = PairSet::product(&a, &a)?;
    let (parts, mut xs) = match which {
        Which::One => (vec![g0], real),
        Which::Two => (vec![g0, PairSet::product(&ia, &a)?], [real, imag].concat()),
        Which::TwoAsPrinted => (vec![g0, PairSet::product(&ia, &ia)?], [real, imag].concat()),
    };
    if which == Which::One {
        xs.push(alg.basis(1));
    }
    let mut g = parts[0].clone();
    for part in &parts[1..] {
        g = g.union(part)?;
    }
    Ok(Counterexample {
        a,
        g,
        parts,
        x: DSet::new(alg, 0, xs)?,
    })
}
