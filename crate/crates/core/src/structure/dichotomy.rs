//! The dense/sparse dichotomy on a quotient set `Q` at scale `Δ = δ/ρ^3`.
//!
//! Dense: `Q` is `Δ`-closed under the relevant maps (halving maps over the
//! reals, translations by the basis vectors p-adically, or addition and
//! multiplication in the field mode), and its covering number is audited.
//! Sparse: a point whose image is `Δ`-far from `Q`, together with the
//! `(p, q)` decomposition of that image from the quotient witnesses.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::halving_map;
use crate::algebra::{Algebra, Base, Element};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::setops::QuotientSet;

/// Which closure property is tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DichotomyMode {
    /// `f_i(x) = (x + Σ_{i_j=1} v_j)/2` for every `i ∈ {0,1}^d` (real).
    Halving,
    /// `f_j(x) = x + v_j` for every `j` (p-adic).
    Translation,
    /// `x + y` and `xy` for every pair (commutative p-adic).
    FieldClosure,
}

impl DichotomyMode {
    pub fn default_for(alg: &Algebra) -> Self {
        match alg.base() {
            Base::Real => DichotomyMode::Halving,
            Base::Padic { .. } => DichotomyMode::Translation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    Dense,
    Sparse,
}

/// The map whose image left `Q_Δ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapIndex {
    Halving(Vec<bool>),
    Translation(usize),
    Sum,
    Product,
}

/// `image = p q^-1` with `p, q` built from the quotient witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Witnesses `(a, b, c, d)` of `x` (then of `y` in the field mode).
    pub witnesses: Vec<[Element; 4]>,
    pub p: Element,
    pub q: Element,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseWitness {
    pub x: Element,
    pub y: Option<Element>,
    pub map: MapIndex,
    /// The image on the grid of `Q`.
    pub image: Element,
    /// `d(image, Q)`.
    pub distance: f64,
    pub decomposition: Option<Decomposition>,
}

/// Measured `N_Δ(Q_Δ)` against `(|det v|/2^d) Δ^-d` (real) or
/// `|det v|_p Δ^-d` (p-adic).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseAudit {
    pub covering: u64,
    pub det: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyOutcome {
    pub case: Case,
    pub mode: DichotomyMode,
    /// `Δ = radix^-delta_exp`.
    pub delta_exp: u32,
    pub witness: Option<SparseWitness>,
    pub dense: Option<DenseAudit>,
}

struct Grid<'a> {
    alg: &'a Algebra,
    members: HashSet<&'a Element>,
    points: &'a [Element],
}

impl<'a> Grid<'a> {
    fn new(q: &'a QuotientSet) -> Self {
        Grid {
            alg: q.set.alg(),
            members: q.set.points().iter().collect(),
            points: q.set.points(),
        }
    }

    /// `d(y, Q) <= Δ`: `y` shares a cell with a point of `Q` or is adjacent
    /// to one (max-norm at most one grid unit, real), or lies in the same
    /// residue class mod `p^delta_exp` (p-adic).
    fn near(&self, y: &Element) -> bool {
        if self.members.contains(y) {
            return true;
        }
        if !self.alg.is_real() {
            return false;
        }
        let d = y.dim();
        let mut z = y.clone();
        (0..3usize.pow(d as u32)).any(|mut k| {
            for j in 0..d {
                z.0[j] = y.0[j] + (k % 3) as i64 - 1;
                k /= 3;
            }
            self.members.contains(&z)
        })
    }

    /// Exact `d(y, Q)` by a scan.
    fn distance(&self, y: &Element) -> f64 {
        self.points
            .iter()
            .map(|q| self.alg.distance(y, q))
            .fold(f64::INFINITY, f64::min)
    }

    fn reduce(&self, y: Element) -> Element {
        match self.alg.base() {
            Base::Real => y,
            Base::Padic { .. } => {
                let md = self.alg.modulus();
                Element::new(y.coords().iter().map(|c| c.rem_euclid(md)))
            }
        }
    }
}

/// Run the dichotomy for `Q` with the basis `v` (elements at the source
/// precision, typically from `A^(d)`).
pub fn dichotomy_check(q: &QuotientSet, v: &[Element], mode: DichotomyMode, budget: &Budget) -> Result<DichotomyOutcome> {
    let qalg = q.set.alg();
    let d = qalg.d();
    if q.set.is_empty() {
        return Err(Error::EmptyInput);
    }
    if v.len() != d {
        return Err(Error::RangeError(format!("basis needs {d} vectors, got {}", v.len())));
    }
    match (mode, qalg.base()) {
        (DichotomyMode::Halving, Base::Padic { .. }) => return Err(Error::NotRealBase),
        (DichotomyMode::FieldClosure, _) if !qalg.is_commutative() || qalg.is_real() => {
            return Err(Error::RangeError("field mode needs a commutative p-adic algebra".into()))
        }
        _ => {}
    }
    if mode == DichotomyMode::FieldClosure {
        return closure_check(q, budget);
    }
    let grid = Grid::new(q);
    let vq: Vec<Element> = v.iter().map(|x| q.source.rescale(x, qalg.m())).collect();
    let maps: Vec<MapIndex> = match mode {
        DichotomyMode::Halving => (0..1usize << d)
            .map(|k| MapIndex::Halving((0..d).map(|j| k >> j & 1 == 1).collect()))
            .collect(),
        _ => (0..d).map(MapIndex::Translation).collect(),
    };
    budget.check_pairs("dichotomy images", q.set.len() as u128 * maps.len() as u128)?;
    let image = |x: &Element, map: &MapIndex| -> Result<Element> {
        match map {
            MapIndex::Halving(bits) => halving_map(qalg, &vq, bits, x),
            MapIndex::Translation(j) => Ok(grid.reduce(qalg.add(x, &vq[*j]))),
            _ => unreachable!("pairwise maps are handled by closure_check"),
        }
    };
    let violation = q
        .set
        .points()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, x)| maps.iter().map(move |mp| (i, x, mp)))
        .find_first(|(_, x, mp)| image(x, mp).map_or(false, |y| !grid.near(&y)));
    if let Some((i, x, mp)) = violation {
        let y = image(x, mp)?;
        let decomposition = q
            .witnesses
            .as_ref()
            .map(|w| decompose_single(&q.source, &w[i], v, mp));
        return Ok(DichotomyOutcome {
            case: Case::Sparse,
            mode,
            delta_exp: qalg.m(),
            witness: Some(SparseWitness {
                x: x.clone(),
                y: None,
                map: mp.clone(),
                distance: grid.distance(&y),
                image: y,
                decomposition,
            }),
            dense: None,
        });
    }
    let det = q.source.det_basis(v)?.abs();
    Ok(DichotomyOutcome {
        case: Case::Dense,
        mode,
        delta_exp: qalg.m(),
        witness: None,
        dense: Some(dense_audit(q, det)),
    })
}

fn dense_audit(q: &QuotientSet, det: f64) -> DenseAudit {
    let qalg = q.set.alg();
    let d = qalg.d() as i32;
    let covering = q.set.len() as u64;
    let cells = (qalg.radix() as f64).powi(qalg.m() as i32 * d);
    let bound = match qalg.base() {
        Base::Real => det / 2f64.powi(d) * cells,
        Base::Padic { .. } => det * cells,
    };
    DenseAudit {
        covering,
        det,
        bound,
        holds: covering as f64 >= bound,
    }
}

/// `x = (a-b)(c-d)^-1`; for `f_i`, `f_i(x) = p q^-1` with
/// `p = (a-b) + Σ_{i_j=1} v_j (c-d)`, `q = 2(c-d)`; for `x + v_j`,
/// `p = (a-b) + v_j (c-d)`, `q = c-d`.
fn decompose_single(alg: &Algebra, w: &[Element; 4], v: &[Element], map: &MapIndex) -> Decomposition {
    let num = alg.sub(&w[0], &w[1]);
    let den = alg.sub(&w[2], &w[3]);
    let (p, q) = match map {
        MapIndex::Halving(bits) => {
            let mut p = num;
            for (vj, _) in v.iter().zip(bits).filter(|(_, &b)| b) {
                p = alg.add(&p, &alg.mul(vj, &den));
            }
            (p, alg.add(&den, &den))
        }
        MapIndex::Translation(j) => (alg.add(&num, &alg.mul(&v[*j], &den)), den),
        _ => unreachable!("single-point maps only"),
    };
    Decomposition {
        witnesses: vec![w.clone()],
        p,
        q,
    }
}

/// Field mode: every `x + y` and `xy` with `x, y ∈ Q` must lie in `Q_Δ`.
/// Sums decompose as `((a-b)(c'-d') + (a'-b')(c-d)) / ((c-d)(c'-d'))`,
/// products as `(a-b)(a'-b') / ((c-d)(c'-d'))`.
pub fn closure_check(q: &QuotientSet, budget: &Budget) -> Result<DichotomyOutcome> {
    let qalg = q.set.alg();
    if qalg.is_real() || !qalg.is_commutative() {
        return Err(Error::RangeError("field mode needs a commutative p-adic algebra".into()));
    }
    if q.set.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = q.set.len();
    budget.check_pairs("field closure", n as u128 * (n as u128 + 1))?;
    let grid = Grid::new(q);
    let pts = q.set.points();
    let violation = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (i..n).flat_map(move |j| [(i, j, MapIndex::Sum), (i, j, MapIndex::Product)]))
        .find_first(|(i, j, op)| !grid.near(&pair_image(qalg, &pts[*i], &pts[*j], op)));
    let Some((i, j, op)) = violation else {
        // the closure forces Z_p ⊂ Q_Δ and then Q_Δ ⊃ Z_p^d; audit against the full lattice
        return Ok(DichotomyOutcome {
            case: Case::Dense,
            mode: DichotomyMode::FieldClosure,
            delta_exp: qalg.m(),
            witness: None,
            dense: Some(dense_audit(q, 1.0)),
        });
    };
    let y = pair_image(qalg, &pts[i], &pts[j], &op);
    let decomposition = q.witnesses.as_ref().map(|w| {
        let alg = &q.source;
        let (wx, wy) = (&w[i], &w[j]);
        let (nx, dx) = (alg.sub(&wx[0], &wx[1]), alg.sub(&wx[2], &wx[3]));
        let (ny, dy) = (alg.sub(&wy[0], &wy[1]), alg.sub(&wy[2], &wy[3]));
        let den = alg.mul(&dx, &dy);
        let num = match op {
            MapIndex::Sum => alg.add(&alg.mul(&nx, &dy), &alg.mul(&ny, &dx)),
            _ => alg.mul(&nx, &ny),
        };
        Decomposition {
            witnesses: vec![wx.clone(), wy.clone()],
            p: num,
            q: den,
        }
    });
    Ok(DichotomyOutcome {
        case: Case::Sparse,
        mode: DichotomyMode::FieldClosure,
        delta_exp: qalg.m(),
        witness: Some(SparseWitness {
            x: pts[i].clone(),
            y: Some(pts[j].clone()),
            map: op,
            distance: grid.distance(&y),
            image: y,
            decomposition,
        }),
        dense: None,
    })
}

fn pair_image(alg: &Algebra, x: &Element, y: &Element, op: &MapIndex) -> Element {
    match op {
        MapIndex::Sum => alg.add(x, y),
        _ => alg.mul(x, y),
    }
}

/// Constructive form of the dense case: check level by level that every
/// dyadic point `Σ_j v_j k_j 2^-n` (`0 <= k_j < 2^n`) lies in `Q_Δ`.
/// Returns the deepest level `n <= max_level` through which all levels pass,
/// or `None` when level 0 (the origin) already fails.
pub fn dyadic_induction(q: &QuotientSet, v: &[Element], max_level: u32, budget: &Budget) -> Result<Option<u32>> {
    let qalg = q.set.alg();
    if !qalg.is_real() {
        return Err(Error::NotRealBase);
    }
    let d = qalg.d();
    if v.len() != d {
        return Err(Error::RangeError(format!("basis needs {d} vectors, got {}", v.len())));
    }
    let grid = Grid::new(q);
    let vq: Vec<Element> = v.iter().map(|x| q.source.rescale(x, qalg.m())).collect();
    let mut passed = None;
    for n in 0..=max_level {
        let side = 1u64 << n;
        let total = (side as u128).pow(d as u32);
        budget.check_points("dyadic induction", total)?;
        let ok = (0..total as u64).into_par_iter().all(|idx| {
            let mut acc = vec![0i128; d];
            let mut rest = idx;
            for vj in &vq {
                let k = (rest % side) as i128;
                rest /= side;
                for (a, &c) in acc.iter_mut().zip(vj.coords()) {
                    *a += k * c as i128;
                }
            }
            let pt = Element::new(acc.into_iter().map(|a| crate::algebra::round_div(a, side as i128) as i64));
            grid.near(&pt)
        });
        if !ok {
            break;
        }
        passed = Some(n);
    }
    Ok(passed)
}
