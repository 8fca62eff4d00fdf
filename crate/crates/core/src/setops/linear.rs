//! Left-linear maps of `E^2`: `L(u, w) = (L11 u + L12 w, L21 u + L22 w)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{padic_volume_valuation, Algebra, Base, Element};
use crate::dset::DSet;
use crate::error::{Error, Result};

use super::PairSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearMap {
    /// Row-major entries `[[L11, L12], [L21, L22]]`.
    pub entries: [[Element; 2]; 2],
}

impl LinearMap {
    pub fn identity(alg: &Algebra) -> Self {
        LinearMap {
            entries: [[alg.one(), alg.zero()], [alg.zero(), alg.one()]],
        }
    }

    pub fn apply(&self, alg: &Algebra, u: &Element, w: &Element) -> (Element, Element) {
        let [[a, b], [c, d]] = &self.entries;
        (
            alg.add(&alg.mul(a, u), &alg.mul(b, w)),
            alg.add(&alg.mul(c, u), &alg.mul(d, w)),
        )
    }

    /// Whether the map, viewed as a `2d x 2d` matrix over the base, has
    /// determinant of absolute value at least `radix^-floor(m/2)`.
    pub fn is_invertible(&self, alg: &Algebra) -> bool {
        let d = alg.d();
        // column for basis vector (e_j, 0) is (L11 e_j, L21 e_j), etc.
        let mut cols: Vec<Vec<i128>> = Vec::with_capacity(2 * d);
        for block in 0..2 {
            for j in 0..d {
                let e = alg.basis(j);
                let top = alg.mul_wide(&self.entries[0][block], &e);
                let bottom = alg.mul_wide(&self.entries[1][block], &e);
                cols.push(top.into_iter().chain(bottom).collect());
            }
        }
        let half = alg.m() / 2;
        match alg.base() {
            Base::Real => {
                // entries are in units of radix^-2m
                let s = (alg.unit_scale() as f64).powi(2);
                let mut mat: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().map(|&v| v as f64 / s).collect()).collect();
                det_f64(&mut mat).abs() >= 2f64.powi(-(half as i32))
            }
            Base::Padic { p } => {
                let rows: Vec<Vec<i64>> = cols.iter().map(|c| c.iter().map(|&v| v as i64).collect()).collect();
                padic_volume_valuation(rows, p as i64, alg.m()).is_some_and(|v| v <= half)
            }
        }
    }
}

fn det_f64(m: &mut [Vec<f64>]) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .expect("nonempty");
        if m[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            m.swap(piv, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

/// Image of every pair under `L`, rounded onto the grid.
pub fn apply_linear_map(l: &LinearMap, g: &PairSet) -> Result<PairSet> {
    let alg = g.alg();
    if !l.is_invertible(alg) {
        return Err(Error::SingularMap);
    }
    let pairs: Vec<(Element, Element)> = g.pairs().par_iter().map(|(u, w)| l.apply(alg, u, w)).collect();
    PairSet::fit(alg.clone(), g.radius_exp(), pairs)
}

/// Induced map on directions, `x -> (L11 + L12 x)^-1 (L21 + L22 x)`, so that
/// `L` sends the line through `(1, x)` to the line through `(1, L(x))`.
/// Directions sent near infinity (first coordinate below the inversion
/// floor) are dropped.
pub fn apply_dual(l: &LinearMap, x: &DSet) -> Result<DSet> {
    let alg = x.alg();
    if !l.is_invertible(alg) {
        return Err(Error::SingularMap);
    }
    let one = alg.one();
    let pts: Vec<Element> = x
        .points()
        .par_iter()
        .filter_map(|v| {
            let (u, w) = l.apply(alg, &one, v);
            let inv = alg.inv(&u).ok()?;
            Some(alg.mul(&inv, &w))
        })
        .collect();
    DSet::fit(alg.clone(), x.radius_exp(), pts)
}

/// The map sending `(1, x1)` to `(1, 0)` and `(1, x2)` to `(0, 1)`.
pub fn change_of_basis(alg: &Algebra, x1: &Element, x2: &Element) -> Result<LinearMap> {
    let l12 = alg.inv(&alg.sub(x1, x2))?;
    let l22 = alg.inv(&alg.sub(x2, x1))?;
    let l11 = alg.neg(&alg.mul(&l12, x2));
    let l21 = alg.neg(&alg.mul(&l22, x1));
    Ok(LinearMap {
        entries: [[l11, l12], [l21, l22]],
    })
}

/// `(L^T)^-1` over a commutative algebra.
pub fn inverse_transpose(alg: &Algebra, l: &LinearMap) -> Result<LinearMap> {
    if !alg.is_commutative() {
        return Err(Error::RangeError("inverse transpose needs a commutative algebra".into()));
    }
    let [[a, b], [c, d]] = &l.entries;
    let det = alg.sub(&alg.mul(a, d), &alg.mul(b, c));
    let inv = alg.inv(&det).map_err(|_| Error::SingularMap)?;
    // (L^T)^-1 = det^-1 [[d, -c], [-b, a]]
    let s = |x: &Element| alg.mul(&inv, x);
    Ok(LinearMap {
        entries: [[s(d), s(&alg.neg(c))], [s(&alg.neg(b)), s(a)]],
    })
}
