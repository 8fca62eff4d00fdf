//! Additive energy and the counting sets of the expansion arguments.
//!
//! Counting sets are evaluated through difference multisets: each count is a
//! sum over the "outer" variables of how many `(a, c)` (or `(a_1, a_2)`)
//! differences hit a target, so no enumeration of all tuples is needed and
//! the results are exact.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Base, Element};
use crate::budget::Budget;
use crate::dset::{check_compatible, DSet};
use crate::error::{Error, Result};
use crate::setops::sum_multiplicities;

mod bsg;
mod ledger;

pub use bsg::{bsg_extract, BsgResult};
pub use ledger::{ruzsa_ledger, theorem_chain, write_ledger_csv, Inequality, LedgerRow, SetExpr};

/// When a grid vector counts as `|y| <= δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Tolerance {
    /// `y = 0`: the two sides fall in the same grid cell.
    Exact,
    /// Real: every coordinate of `y` is at most one unit (same or adjacent
    /// cell). p-adic: same as `Exact`, i.e. `y ≡ 0 mod p^m`.
    #[default]
    Adjacent,
}

/// How quintuples are signed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum QuintupleSign {
    /// `a + xb - (c - xd)`.
    #[default]
    AsPrinted,
    /// `a + xb - (c + xd)`.
    Symmetric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseCount {
    pub case: String,
    pub count: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub total: u128,
    pub breakdown: Vec<CaseCount>,
    pub tolerance: Tolerance,
    /// Predicted upper bound, when exponents were supplied.
    pub bound: Option<f64>,
    /// The bound is `δ^bound_exponent` times the trivial count.
    pub bound_exponent: Option<f64>,
    pub ratio: Option<f64>,
    /// `|pA + qA|` (quadruple counts only).
    pub sumset: Option<u64>,
    /// `|A|^4 / |Y|`, the Cauchy-Schwarz lower bound for `|pA + qA|`.
    pub cs_lower: Option<f64>,
}

/// Exponents for the quintuple bound `δ^(s(t-σ+ε)/t - ε) |A|^3 |X|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvExponents {
    pub s: f64,
    pub sigma: f64,
    pub t: f64,
    pub eps: f64,
}

/// `E(A, B) = #{(a, a', b, b') : a + b = a' + b'}`.
pub fn additive_energy(a: &DSet, b: &DSet, budget: &Budget) -> Result<u128> {
    check_compatible(a, b)?;
    let mult = sum_multiplicities(a.points(), b.points(), false, budget, "additive energy")?;
    let alg = a.alg();
    let square = |r: u64| r as u128 * r as u128;
    if alg.is_real() {
        return Ok(mult.iter().map(|(_, r)| square(*r)).sum());
    }
    // raw integer sums that agree mod p^m are the same element
    let md = alg.modulus();
    let mut reduced: HashMap<Element, u64> = HashMap::new();
    for (v, r) in mult {
        *reduced.entry(Element::new(v.coords().iter().map(|c| c.rem_euclid(md)))).or_insert(0) += r;
    }
    Ok(reduced.into_values().map(square).sum())
}

type Multiset = HashMap<Element, u64>;

fn differences(alg: &Algebra, xs: &[Element], ys: &[Element]) -> Multiset {
    xs.par_iter()
        .fold(HashMap::new, |mut acc: Multiset, x| {
            for y in ys {
                *acc.entry(alg.sub(x, y)).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut x, mut y| {
            if x.len() < y.len() {
                std::mem::swap(&mut x, &mut y);
            }
            for (k, v) in y {
                *x.entry(k).or_insert(0) += v;
            }
            x
        })
}

/// Multiplicity of values within tolerance of `t`.
fn lookup(alg: &Algebra, ms: &Multiset, t: &Element, tol: Tolerance) -> u64 {
    if tol == Tolerance::Exact || !alg.is_real() {
        return ms.get(t).copied().unwrap_or(0);
    }
    let d = t.dim();
    let mut z = t.clone();
    (0..3usize.pow(d as u32))
        .map(|mut k| {
            for j in 0..d {
                z.0[j] = t.0[j] + (k % 3) as i64 - 1;
                k /= 3;
            }
            ms.get(&z).copied().unwrap_or(0)
        })
        .sum()
}

/// Whether `|y| <= radix^-r`.
fn within(alg: &Algebra, y: &Element, r: u32) -> bool {
    match alg.base() {
        Base::Real => {
            let shift = alg.m() as i64 - r as i64;
            if shift < 0 {
                return y.is_zero();
            }
            let bound = 1i128 << shift;
            alg.norm_sq_units(y) <= bound * bound
        }
        Base::Padic { .. } => alg.valuation(y).map_or(true, |v| v >= r),
    }
}

/// `|{(a, b, c, d, x) ∈ A^4 × X : |a + xb - (c - xd)| <= δ}|` (or with
/// `c + xd`), split by whether `|b - d| <= ρ`.
pub fn quintuple_count_tv(
    a: &DSet,
    x: &DSet,
    rho_exp: u32,
    sign: QuintupleSign,
    tol: Tolerance,
    exponents: Option<TvExponents>,
    budget: &Budget,
) -> Result<CountReport> {
    check_compatible(a, x)?;
    let alg = a.alg();
    let pts = a.points();
    let n = pts.len() as u128;
    budget.check_pairs("quintuple count", x.len() as u128 * n * n + n * n)?;
    let diffs = differences(alg, pts, pts);
    let (near, far) = x
        .points()
        .par_iter()
        .map(|xv| {
            let xb: Vec<Element> = pts.iter().map(|b| alg.mul(xv, b)).collect();
            let (mut near, mut far) = (0u128, 0u128);
            for (i, b) in pts.iter().enumerate() {
                for (j, d) in pts.iter().enumerate() {
                    // a - c must match -xb - xd (as printed) or xd - xb
                    let target = match sign {
                        QuintupleSign::AsPrinted => alg.neg(&alg.add(&xb[i], &xb[j])),
                        QuintupleSign::Symmetric => alg.sub(&xb[j], &xb[i]),
                    };
                    let hits = lookup(alg, &diffs, &target, tol) as u128;
                    if within(alg, &alg.sub(b, d), rho_exp) {
                        near += hits;
                    } else {
                        far += hits;
                    }
                }
            }
            (near, far)
        })
        .reduce(|| (0, 0), |p, q| (p.0 + q.0, p.1 + q.1));
    let total = near + far;
    let bound_exponent = exponents.map(|e| e.s * (e.t - e.sigma + e.eps) / e.t - e.eps);
    let bound = bound_exponent.map(|be| delta_pow(alg, be) * (n as f64).powi(3) * x.len() as f64);
    Ok(CountReport {
        total,
        breakdown: vec![
            CaseCount {
                case: "|b-d| <= rho".into(),
                count: near,
            },
            CaseCount {
                case: "|b-d| > rho".into(),
                count: far,
            },
        ],
        tolerance: tol,
        bound,
        bound_exponent,
        ratio: bound.map(|b| total as f64 / b),
        sumset: None,
        cs_lower: None,
    })
}

fn delta_pow(alg: &Algebra, e: f64) -> f64 {
    (alg.radix() as f64).powf(-(alg.m() as f64) * e)
}

/// `|Y|` for `Y = {(a_1, a_2, a_3, a_4) : |a_1 q + a_3 p - (a_2 q + a_4 p)| <= δ}`,
/// split by whether `|a_3 - a_4| <= ρ^2`, with `|pA + qA|` and the
/// Cauchy-Schwarz bound `|A|^4 / |Y|`. Products are `a q` and `a p`.
pub fn quadruple_count_sparse(
    a: &DSet,
    p: &Element,
    q: &Element,
    rho_exp: u32,
    tol: Tolerance,
    s: Option<f64>,
    budget: &Budget,
) -> Result<CountReport> {
    let alg = a.alg();
    if p.dim() != alg.d() || q.dim() != alg.d() {
        return Err(Error::AlgebraMismatch);
    }
    if !alg.above_inversion_floor(q) {
        return Err(Error::DivisionByNegligible);
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pts = a.points();
    let n = pts.len() as u128;
    budget.check_pairs("quadruple count", 2 * n * n)?;
    let aq: Vec<Element> = pts.iter().map(|x| alg.mul(x, q)).collect();
    let ap: Vec<Element> = pts.iter().map(|x| alg.mul(x, p)).collect();
    let diffs = differences(alg, &aq, &aq);
    let (near, far) = (0..pts.len())
        .into_par_iter()
        .map(|i3| {
            let (mut near, mut far) = (0u128, 0u128);
            for i4 in 0..pts.len() {
                // a_1 q - a_2 q must match a_4 p - a_3 p
                let hits = lookup(alg, &diffs, &alg.sub(&ap[i4], &ap[i3]), tol) as u128;
                if within(alg, &alg.sub(&pts[i3], &pts[i4]), 2 * rho_exp) {
                    near += hits;
                } else {
                    far += hits;
                }
            }
            (near, far)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let total = near + far;
    let mut values: Vec<Element> = aq
        .par_iter()
        .flat_map_iter(|u| ap.iter().map(move |w| alg.add(u, w)))
        .collect();
    values.par_sort_unstable();
    values.dedup();
    let bound_exponent = s.map(|s| s + s * rho_exp as f64 / alg.m() as f64);
    let bound = bound_exponent.map(|be| delta_pow(alg, be) * (n as f64).powi(4));
    Ok(CountReport {
        total,
        breakdown: vec![
            CaseCount {
                case: "|a3-a4| <= rho^2".into(),
                count: near,
            },
            CaseCount {
                case: "|a3-a4| > rho^2".into(),
                count: far,
            },
        ],
        tolerance: tol,
        bound,
        bound_exponent,
        ratio: bound.map(|b| total as f64 / b),
        sumset: Some(values.len() as u64),
        cs_lower: Some((n as f64).powi(4) / total as f64),
    })
}
