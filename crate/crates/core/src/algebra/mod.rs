//! Exact fixed-precision arithmetic in the supported normed division
//! algebras: R, C, H over the reals and unramified extensions of Q_p.
//!
//! Real elements are integer vectors in units of the finest scale `2^-m`.
//! Products are formed exactly at scale `2^-2m` and rounded once, half away
//! from zero. p-adic elements are residues mod `p^m` in the power basis
//! `1, z, ..., z^(d-1)` of a root `z` of the defining polynomial, so every
//! product is exact.

mod linalg;
pub mod poly;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

pub use linalg::padic_volume_valuation;
pub(crate) use linalg::solve_mod;

pub type Coords = SmallVec<[i64; 4]>;
type Wide = SmallVec<[i128; 4]>;

/// A point of the algebra at working precision.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Element(pub Coords);

impl Element {
    pub fn new(coords: impl IntoIterator<Item = i64>) -> Self {
        Element(coords.into_iter().collect())
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Base {
    Real,
    Padic { p: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgebraKind {
    R,
    C,
    H,
    Qp,
    QpExt,
}

impl std::str::FromStr for AlgebraKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" => Ok(AlgebraKind::R),
            "C" => Ok(AlgebraKind::C),
            "H" => Ok(AlgebraKind::H),
            "Qp" => Ok(AlgebraKind::Qp),
            "Qp_ext" | "QpExt" => Ok(AlgebraKind::QpExt),
            other => Err(Error::InvalidAlgebra(format!("unknown algebra kind {other:?}"))),
        }
    }
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgebraKind::R => "R",
            AlgebraKind::C => "C",
            AlgebraKind::H => "H",
            AlgebraKind::Qp => "Qp",
            AlgebraKind::QpExt => "Qp_ext",
        })
    }
}

/// Request for [`make_algebra`]. `d` is implied by the kind for R, C, H and
/// Qp; when given it must agree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub kind: AlgebraKind,
    pub p: Option<u64>,
    pub d: Option<usize>,
    pub m: u32,
    pub poly: Option<Vec<u64>>,
}

impl AlgebraSpec {
    pub fn new(kind: AlgebraKind, m: u32) -> Self {
        AlgebraSpec {
            kind,
            p: None,
            d: None,
            m,
            poly: None,
        }
    }

    pub fn real(d: usize, m: u32) -> Result<Self> {
        let kind = match d {
            1 => AlgebraKind::R,
            2 => AlgebraKind::C,
            4 => AlgebraKind::H,
            _ => return Err(Error::UnsupportedRealDim(d)),
        };
        Ok(AlgebraSpec::new(kind, m))
    }

    pub fn padic(p: u64, d: usize, m: u32) -> Self {
        let kind = if d == 1 { AlgebraKind::Qp } else { AlgebraKind::QpExt };
        AlgebraSpec {
            kind,
            p: Some(p),
            d: Some(d),
            m,
            poly: None,
        }
    }
}

pub type Algebra = Arc<AlgebraDescriptor>;

/// Which algebra, its base, dimension, precision and multiplication table.
#[derive(Clone, Debug)]
pub struct AlgebraDescriptor {
    kind: AlgebraKind,
    base: Base,
    d: usize,
    m: u32,
    /// Dense `d x d x d` structure constants, `e_i e_j = sum_k t[(i d + j) d + k] e_k`.
    table: Vec<i64>,
    /// Nonzero entries of `table` as `(i, j, k, c)`.
    sparse: Vec<(usize, usize, usize, i64)>,
    poly: Option<Vec<u64>>,
    /// `p^m` for p-adic algebras, zero for real ones.
    modulus: i64,
}

const MAX_REAL_PRECISION: u32 = 30;
const MAX_PADIC_DIM: usize = 16;

pub fn make_algebra(spec: &AlgebraSpec) -> Result<Algebra> {
    AlgebraDescriptor::new(spec).map(Arc::new)
}

impl AlgebraDescriptor {
    pub fn new(spec: &AlgebraSpec) -> Result<Self> {
        if spec.m == 0 {
            return Err(Error::InvalidAlgebra("precision exponent must be positive".into()));
        }
        let alg = match spec.kind {
            AlgebraKind::R | AlgebraKind::C | AlgebraKind::H => {
                let d = match spec.kind {
                    AlgebraKind::R => 1,
                    AlgebraKind::C => 2,
                    _ => 4,
                };
                if let Some(given) = spec.d {
                    if given != d {
                        return Err(Error::UnsupportedRealDim(given));
                    }
                }
                if spec.m > MAX_REAL_PRECISION {
                    return Err(Error::InvalidAlgebra(format!(
                        "real precision capped at m = {MAX_REAL_PRECISION}"
                    )));
                }
                Self::from_table(spec.kind, Base::Real, d, spec.m, real_table(d), None, 0)
            }
            AlgebraKind::Qp | AlgebraKind::QpExt => {
                let p = spec
                    .p
                    .ok_or_else(|| Error::InvalidAlgebra("p-adic algebra needs p".into()))?;
                if !poly::is_prime(p) {
                    return Err(Error::NonPrime(p));
                }
                let d = spec.d.unwrap_or(1);
                if d == 0 || (spec.kind == AlgebraKind::Qp && d != 1) {
                    return Err(Error::InvalidAlgebra(format!("Qp has dimension 1, got {d}")));
                }
                if d > MAX_PADIC_DIM {
                    return Err(Error::InvalidAlgebra(format!(
                        "p-adic extension degree capped at {MAX_PADIC_DIM}, got {d}"
                    )));
                }
                let kind = if d == 1 { AlgebraKind::Qp } else { AlgebraKind::QpExt };
                let modulus = checked_pow(p, spec.m)
                    .filter(|&v| v < (1u64 << 62))
                    .ok_or_else(|| Error::InvalidAlgebra(format!("p^m = {p}^{} too large", spec.m)))?
                    as i64;
                let f = match &spec.poly {
                    _ if d == 1 => vec![0, 1],
                    Some(f) => {
                        let f: Vec<u64> = f.iter().map(|c| c % p).collect();
                        if f.len() != d + 1 || f[d] != 1 {
                            return Err(Error::InvalidAlgebra(format!(
                                "defining polynomial must be monic of degree {d}"
                            )));
                        }
                        if !poly::is_irreducible(&f, p) {
                            return Err(Error::ReduciblePoly(f, p));
                        }
                        f
                    }
                    None => poly::smallest_irreducible(p, d),
                };
                let table = power_basis_table(&f, modulus);
                Self::from_table(kind, Base::Padic { p }, d, spec.m, table, Some(f), modulus)
            }
        }?;
        alg.check_invariants()?;
        Ok(alg)
    }

    fn from_table(
        kind: AlgebraKind,
        base: Base,
        d: usize,
        m: u32,
        table: Vec<i64>,
        poly: Option<Vec<u64>>,
        modulus: i64,
    ) -> Result<Self> {
        let mut sparse = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let c = table[(i * d + j) * d + k];
                    if c != 0 {
                        sparse.push((i, j, k, c));
                    }
                }
            }
        }
        Ok(AlgebraDescriptor {
            kind,
            base,
            d,
            m,
            table,
            sparse,
            poly,
            modulus,
        })
    }

    /// Identity and exhaustive associativity on basis triples (which, by
    /// bilinearity, is associativity everywhere).
    fn check_invariants(&self) -> Result<()> {
        let d = self.d;
        for j in 0..d {
            let e = self.basis(j);
            if self.mul_wide_raw(&self.one().0, &e.0) != self.widen(&e)
                || self.mul_wide_raw(&e.0, &self.one().0) != self.widen(&e)
            {
                return Err(Error::InvalidAlgebra("e_1 is not the identity".into()));
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (a, b, c) = (self.basis(i), self.basis(j), self.basis(k));
                    let left = self.mul_wide_raw(&self.narrow_exact(&self.mul_wide_raw(&a.0, &b.0)), &c.0);
                    let right = self.mul_wide_raw(&a.0, &self.narrow_exact(&self.mul_wide_raw(&b.0, &c.0)));
                    if left != right {
                        return Err(Error::InvalidAlgebra(format!(
                            "multiplication not associative on basis triple ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Same algebra at a different precision.
    pub fn with_precision(&self, m: u32) -> Result<Algebra> {
        make_algebra(&AlgebraSpec {
            kind: self.kind,
            p: self.p(),
            d: Some(self.d),
            m,
            poly: self.poly.clone(),
        })
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn p(&self) -> Option<u64> {
        match self.base {
            Base::Real => None,
            Base::Padic { p } => Some(p),
        }
    }

    pub fn is_real(&self) -> bool {
        self.base == Base::Real
    }

    /// 2 for real algebras, p for p-adic ones.
    pub fn radix(&self) -> u64 {
        self.p().unwrap_or(2)
    }

    pub fn defining_poly(&self) -> Option<&[u64]> {
        self.poly.as_deref()
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn is_commutative(&self) -> bool {
        self.kind != AlgebraKind::H
    }

    /// Structure constant of `e_k` in `e_i e_j`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> i64 {
        self.table[(i * self.d + j) * self.d + k]
    }

    /// Same base, dimension and multiplication, ignoring precision.
    pub fn same_structure(&self, other: &AlgebraDescriptor) -> bool {
        self.kind == other.kind && self.base == other.base && self.d == other.d && self.poly == other.poly
    }

    /// `radix^e` as an i128; callers keep exponents small.
    pub fn radix_pow(&self, e: u32) -> i128 {
        (self.radix() as i128).pow(e)
    }

    /// One unit of the finest scale in the coordinate system (`radix^m`
    /// grid units make up the number one for real algebras).
    pub fn unit_scale(&self) -> i64 {
        match self.base {
            Base::Real => 1i64 << self.m,
            Base::Padic { .. } => 1,
        }
    }

    pub fn zero(&self) -> Element {
        Element(smallvec![0; self.d])
    }

    pub fn one(&self) -> Element {
        self.basis(0)
    }

    /// The basis vector `e_{j+1}` as a grid element.
    pub fn basis(&self, j: usize) -> Element {
        let mut c: Coords = smallvec![0; self.d];
        c[j] = self.unit_scale();
        Element(c)
    }

    /// Scalar `v` from the base (integer multiple of the identity for p-adic,
    /// integer number of grid units for real).
    pub fn scalar_units(&self, v: i64) -> Element {
        let mut c: Coords = smallvec![0; self.d];
        c[0] = self.reduce(v as i128);
        Element(c)
    }

    /// Validate raw coordinates for this algebra.
    pub fn element(&self, coords: impl IntoIterator<Item = i64>) -> Result<Element> {
        let e = Element::new(coords);
        if e.dim() != self.d {
            return Err(Error::InvalidAlgebra(format!(
                "element has {} coordinates, algebra has dimension {}",
                e.dim(),
                self.d
            )));
        }
        if !self.is_real() && e.0.iter().any(|&c| c < 0 || c >= self.modulus) {
            return Err(Error::InvalidAlgebra(format!(
                "p-adic coordinates must lie in [0, {})",
                self.modulus
            )));
        }
        Ok(e)
    }

    fn reduce(&self, v: i128) -> i64 {
        match self.base {
            Base::Real => v as i64,
            Base::Padic { .. } => v.rem_euclid(self.modulus as i128) as i64,
        }
    }

    fn widen(&self, x: &Element) -> Wide {
        x.0.iter().map(|&c| c as i128 * self.unit_scale() as i128).collect()
    }

    /// Inverse of `widen`, only used where the division is exact.
    fn narrow_exact(&self, w: &Wide) -> Coords {
        match self.base {
            Base::Real => w.iter().map(|&c| (c / self.unit_scale() as i128) as i64).collect(),
            Base::Padic { .. } => w.iter().map(|&c| c as i64).collect(),
        }
    }

    pub fn add(&self, x: &Element, y: &Element) -> Element {
        Element(x.0.iter().zip(&y.0).map(|(&a, &b)| self.reduce(a as i128 + b as i128)).collect())
    }

    pub fn sub(&self, x: &Element, y: &Element) -> Element {
        Element(x.0.iter().zip(&y.0).map(|(&a, &b)| self.reduce(a as i128 - b as i128)).collect())
    }

    pub fn neg(&self, x: &Element) -> Element {
        Element(x.0.iter().map(|&a| self.reduce(-(a as i128))).collect())
    }

    /// Real: the exact product in units of `radix^-2m`. p-adic: the product mod `p^m`.
    pub fn mul_wide(&self, x: &Element, y: &Element) -> Wide {
        self.mul_wide_raw(&x.0, &y.0)
    }

    fn mul_wide_raw(&self, x: &[i64], y: &[i64]) -> Wide {
        let mut out: Wide = smallvec![0; self.d];
        match self.base {
            Base::Real => {
                for &(i, j, k, c) in &self.sparse {
                    out[k] += c as i128 * x[i] as i128 * y[j] as i128;
                }
            }
            Base::Padic { .. } => {
                let m = self.modulus as i128;
                for &(i, j, k, c) in &self.sparse {
                    let xy = (x[i] as i128 * y[j] as i128) % m;
                    out[k] = (out[k] + (c as i128 * xy) % m) % m;
                }
            }
        }
        out
    }

    /// Product `xy`, rounded once onto the grid for real algebras.
    pub fn mul(&self, x: &Element, y: &Element) -> Element {
        let w = self.mul_wide(x, y);
        match self.base {
            Base::Real => {
                let s = self.unit_scale() as i128;
                Element(w.iter().map(|&c| round_div(c, s) as i64).collect())
            }
            Base::Padic { .. } => Element(w.iter().map(|&c| c as i64).collect()),
        }
    }

    /// Product in the given order: `Left` gives `xy`, `Right` gives `yx`.
    pub fn mul_sided(&self, x: &Element, y: &Element, side: Side) -> Element {
        match side {
            Side::Left => self.mul(x, y),
            Side::Right => self.mul(y, x),
        }
    }

    /// Quaternion-style conjugate (real algebras only).
    pub fn conj(&self, x: &Element) -> Element {
        Element(
            x.0.iter()
                .enumerate()
                .map(|(i, &c)| if i == 0 { c } else { -c })
                .collect(),
        )
    }

    /// Squared Euclidean norm in grid units (real algebras).
    pub fn norm_sq_units(&self, x: &Element) -> i128 {
        x.0.iter().map(|&c| c as i128 * c as i128).sum()
    }

    /// p-adic valuation, the minimum over coordinates; `None` for zero.
    pub fn valuation(&self, x: &Element) -> Option<u32> {
        let p = self.p()? as i64;
        x.0.iter()
            .filter(|&&c| c != 0)
            .map(|&c| {
                let mut c = c;
                let mut v = 0;
                while c % p == 0 {
                    c /= p;
                    v += 1;
                }
                v
            })
            .min()
    }

    /// Absolute value: Euclidean modulus for real algebras, `p^-v` for p-adic.
    pub fn norm(&self, x: &Element) -> f64 {
        match self.base {
            Base::Real => (self.norm_sq_units(x) as f64).sqrt() / self.unit_scale() as f64,
            Base::Padic { p } => match self.valuation(x) {
                None => 0.0,
                Some(v) => (p as f64).powi(-(v as i32)),
            },
        }
    }

    pub fn distance(&self, x: &Element, y: &Element) -> f64 {
        self.norm(&self.sub(x, y))
    }

    /// Whether `norm(x) >= radix^-floor(m/2)`, the invertibility floor.
    pub fn above_inversion_floor(&self, x: &Element) -> bool {
        let half = self.m / 2;
        match self.base {
            Base::Real => {
                let min_units = 1i128 << (self.m - half);
                self.norm_sq_units(x) >= min_units * min_units
            }
            Base::Padic { .. } => self.valuation(x).is_some_and(|v| v <= half),
        }
    }

    pub fn inv(&self, x: &Element) -> Result<Element> {
        if !self.above_inversion_floor(x) {
            return Err(Error::DivisionByNegligible);
        }
        match self.base {
            Base::Real => {
                // x^-1 = conj(x) / |x|^2, in grid units conj(N) 2^2m / |N|^2
                let n2 = self.norm_sq_units(x);
                let s2 = (self.unit_scale() as i128) * (self.unit_scale() as i128);
                Ok(Element(
                    self.conj(x).0.iter().map(|&c| round_div(c as i128 * s2, n2) as i64).collect(),
                ))
            }
            Base::Padic { .. } => {
                let v = self.valuation(x).expect("checked nonzero");
                if v > 0 {
                    return Err(Error::NonIntegral { num: 0, den: v });
                }
                Ok(self.unit_inverse(x, self.modulus))
            }
        }
    }

    /// Inverse of a p-adic unit mod `modulus` (a power of p dividing `p^m`):
    /// solve `x y = 1` through the left-multiplication matrix, whose
    /// determinant is a unit.
    fn unit_inverse(&self, x: &Element, modulus: i64) -> Element {
        let d = self.d;
        if d == 1 {
            let inv = poly::inv_mod(x.0[0] as i128, modulus as i128).expect("unit");
            return Element(smallvec![inv as i64]);
        }
        // column j of L_x is x e_j
        let mut mat = vec![vec![0i64; d]; d];
        for j in 0..d {
            let col = self.mul_wide_raw(&x.0, &self.basis(j).0);
            for k in 0..d {
                mat[k][j] = (col[k] % modulus as i128) as i64;
            }
        }
        let mut rhs = vec![0i64; d];
        rhs[0] = 1 % modulus;
        let y = linalg::solve_mod(mat, rhs, self.radix() as i64, modulus).expect("unit has invertible multiplication matrix");
        Element(y.into_iter().collect())
    }

    /// `num den^-1` (`Side::Left`) or `den^-1 num` (`Side::Right`), with the
    /// result placed at precision `target_m`. Real: one rounding. p-adic:
    /// requires `v(num) >= v(den)` and `target_m <= m - v(den)`.
    pub fn div_at(&self, num: &Element, den: &Element, side: Side, target_m: u32) -> Result<Element> {
        if !self.above_inversion_floor(den) {
            return Err(Error::DivisionByNegligible);
        }
        match self.base {
            Base::Real => {
                let c = self.conj(den);
                let w = match side {
                    Side::Left => self.mul_wide(num, &c),
                    Side::Right => self.mul_wide(&c, num),
                };
                let n2 = self.norm_sq_units(den);
                let scale = 1i128 << target_m;
                Ok(Element(w.iter().map(|&v| round_div(v * scale, n2) as i64).collect()))
            }
            Base::Padic { p } => {
                let v = self.valuation(den).expect("checked nonzero");
                if target_m + v > self.m {
                    return Err(Error::RangeError(format!(
                        "p-adic quotient known only mod p^{}, asked for p^{target_m}",
                        self.m - v
                    )));
                }
                let target = checked_pow(p, target_m).expect("smaller than modulus") as i64;
                let w = match self.valuation(num) {
                    None => return Ok(self.zero()),
                    Some(w) => w,
                };
                if w < v {
                    return Err(Error::NonIntegral { num: w, den: v });
                }
                let pv = checked_pow(p, v).expect("smaller than modulus") as i64;
                let num_s = Element(num.0.iter().map(|&c| c / pv).collect());
                let den_s = Element(den.0.iter().map(|&c| c / pv).collect());
                let inv = self.unit_inverse(&den_s, self.modulus);
                // commutative, so the side does not matter
                let q = self.mul(&num_s, &inv);
                Ok(Element(q.0.iter().map(|&c| c.rem_euclid(target)).collect()))
            }
        }
    }

    /// `num den^-1` at working precision.
    pub fn div(&self, num: &Element, den: &Element) -> Result<Element> {
        let target = match self.base {
            Base::Real => self.m,
            Base::Padic { .. } => self.m - self.valuation(den).unwrap_or(0).min(self.m),
        };
        let q = self.div_at(num, den, Side::Left, target)?;
        Ok(q)
    }

    /// Determinant of the coordinate matrix of `v`: real algebras normalize
    /// so the standard basis gives 1; p-adic algebras return `|det|_p`.
    pub fn det_basis(&self, v: &[Element]) -> Result<f64> {
        if v.len() != self.d {
            return Err(Error::InvalidAlgebra(format!(
                "det_basis needs {} elements, got {}",
                self.d,
                v.len()
            )));
        }
        match self.base {
            Base::Real => {
                let rows: Vec<Vec<i128>> = v.iter().map(|e| e.0.iter().map(|&c| c as i128).collect()).collect();
                let scale = (self.unit_scale() as f64).powi(self.d as i32);
                Ok(match linalg::det_bareiss(rows.clone()) {
                    Some(det) => det as f64 / scale,
                    None => linalg::det_f64(rows) / scale,
                })
            }
            Base::Padic { p } => {
                let rows: Vec<Vec<i64>> = v.iter().map(|e| e.0.to_vec()).collect();
                Ok(match padic_volume_valuation(rows, p as i64, self.m) {
                    Some(val) => (p as f64).powi(-(val as i32)),
                    None => 0.0,
                })
            }
        }
    }

    /// Whether `x` lies in the closed ball `B(0, radix^r)`.
    pub fn in_ball(&self, x: &Element, r: i32) -> bool {
        match self.base {
            Base::Real => {
                let shift = self.m as i32 + r;
                if shift < 0 {
                    return x.is_zero();
                }
                let bound = 1i128 << shift;
                self.norm_sq_units(x) <= bound * bound
            }
            // integral residues always lie in Z_p^d
            Base::Padic { .. } => r >= 0 || self.valuation(x).map_or(true, |v| v as i32 >= -r),
        }
    }

    /// Move a real element between precisions (rounding when coarsening); a
    /// p-adic element can only be coarsened (reduction mod `p^to`).
    pub fn rescale(&self, x: &Element, to_m: u32) -> Element {
        match self.base {
            Base::Real => {
                if to_m >= self.m {
                    let f = 1i64 << (to_m - self.m);
                    Element(x.0.iter().map(|&c| c * f).collect())
                } else {
                    let f = 1i128 << (self.m - to_m);
                    Element(x.0.iter().map(|&c| round_div(c as i128, f) as i64).collect())
                }
            }
            Base::Padic { p } => {
                let t = checked_pow(p, to_m.min(self.m)).expect("fits") as i64;
                Element(x.0.iter().map(|&c| c.rem_euclid(t)).collect())
            }
        }
    }
}

/// Which operand multiplies from the left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Side {
    #[default]
    Left,
    Right,
}

/// `n / d` rounded half away from zero; `d > 0`.
pub fn round_div(n: i128, d: i128) -> i128 {
    debug_assert!(d > 0);
    let q = (2 * n.abs() + d) / (2 * d);
    if n < 0 {
        -q
    } else {
        q
    }
}

pub(crate) fn checked_pow(p: u64, e: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

fn real_table(d: usize) -> Vec<i64> {
    let mut t = vec![0i64; d * d * d];
    let mut set = |i: usize, j: usize, k: usize, c: i64| t[(i * d + j) * d + k] = c;
    match d {
        1 => set(0, 0, 0, 1),
        2 => {
            set(0, 0, 0, 1);
            set(0, 1, 1, 1);
            set(1, 0, 1, 1);
            set(1, 1, 0, -1);
        }
        4 => {
            // basis 1, i, j, k
            for a in 0..4 {
                set(0, a, a, 1);
                set(a, 0, a, 1);
            }
            for a in 1..4 {
                set(a, a, 0, -1);
            }
            set(1, 2, 3, 1);
            set(2, 3, 1, 1);
            set(3, 1, 2, 1);
            set(2, 1, 3, -1);
            set(3, 2, 1, -1);
            set(1, 3, 2, -1);
        }
        _ => unreachable!("dimension validated by caller"),
    }
    t
}

/// Structure constants of the power basis of `Z_p[x]/(f)` reduced mod `modulus`.
fn power_basis_table(f: &[u64], modulus: i64) -> Vec<i64> {
    let d = f.len() - 1;
    let m = modulus as i128;
    // powers z^0 .. z^(2d-2) in the basis
    let mut powers: Vec<Vec<i128>> = Vec::with_capacity(2 * d - 1);
    let mut cur = vec![0i128; d];
    cur[0] = 1 % m;
    for _ in 0..(2 * d - 1) {
        powers.push(cur.clone());
        // multiply by z: shift up, fold z^d = -sum f_i z^i
        let top = cur[d - 1];
        let mut next = vec![0i128; d];
        for i in (1..d).rev() {
            next[i] = cur[i - 1];
        }
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = (*slot - top * f[i] as i128).rem_euclid(m);
        }
        cur = next;
    }
    let mut t = vec![0i64; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                t[(i * d + j) * d + k] = powers[i + j][k] as i64;
            }
        }
    }
    t
}

#[cfg(test)]
mod tests;
