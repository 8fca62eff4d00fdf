//! Sub-algebra avoidance, escape bases and the dense/sparse dichotomy.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{padic_volume_valuation, round_div, solve_mod, Algebra, Base, Element};
use crate::dset::DSet;
use crate::error::{Error, Result};

mod dichotomy;

pub use dichotomy::{
    closure_check, dichotomy_check, dyadic_induction, Case, Decomposition, DenseAudit, DichotomyMode, DichotomyOutcome,
    MapIndex, SparseWitness,
};

/// Largest candidate pool per product depth in the escape search.
pub const ESCAPE_POOL_CAP: usize = 100_000;

/// Finest quaternion sphere net, about `12 * 4^7` members.
pub const MAX_NET_EXP: u32 = 7;

/// A proper sub-algebra of the ambient algebra.
#[derive(Clone, Debug, PartialEq)]
pub enum SubAlgebra {
    /// Real linear span of orthonormal coordinate vectors (empty for `{0}`).
    Span { label: String, basis: Vec<Vec<f64>> },
    /// `{0}` in a p-adic algebra.
    PadicZero,
    /// Ring of integers of the degree-`e` unramified subfield, spanned over
    /// `Z_p` by `1, ζ, …, ζ^(e-1)`. `frame` completes that span with
    /// standard basis vectors to a basis of `Z_p^d`.
    Subfield { e: usize, basis: Vec<Element>, frame: Vec<Vec<i64>> },
}

impl SubAlgebra {
    pub fn label(&self) -> String {
        match self {
            SubAlgebra::Span { label, .. } => label.clone(),
            SubAlgebra::PadicZero => "0".into(),
            SubAlgebra::Subfield { e, .. } => format!("Z_p^{e}"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SubAlgebra::Span { basis, .. } => basis.len(),
            SubAlgebra::PadicZero => 0,
            SubAlgebra::Subfield { e, .. } => *e,
        }
    }
}

/// Every proper sub-algebra of a real algebra (up to a net for `H`), or
/// every proper unramified subfield of a p-adic one.
#[derive(Clone, Debug)]
pub struct SubAlgebraFamily {
    alg: Algebra,
    members: Vec<SubAlgebra>,
    net_exp: u32,
}

impl SubAlgebraFamily {
    /// Family with the default net fineness `ceil(m/2)`.
    pub fn new(alg: &Algebra) -> Self {
        Self::with_net(alg, alg.m().div_ceil(2))
    }

    /// Family whose `H` net has fineness `2^-net_exp` (capped at
    /// [`MAX_NET_EXP`]).
    pub fn with_net(alg: &Algebra, net_exp: u32) -> Self {
        let net_exp = net_exp.min(MAX_NET_EXP);
        let d = alg.d();
        let members = match alg.base() {
            Base::Real => {
                let mut out = vec![SubAlgebra::Span {
                    label: "0".into(),
                    basis: Vec::new(),
                }];
                if d > 1 {
                    out.push(SubAlgebra::Span {
                        label: "R".into(),
                        basis: vec![unit_vec(d, 0)],
                    });
                }
                if d == 4 {
                    for u in sphere_net(net_exp) {
                        let label = format!("span(1,{:.4}i+{:.4}j+{:.4}k)", u[0], u[1], u[2]);
                        out.push(SubAlgebra::Span {
                            label,
                            basis: vec![unit_vec(4, 0), vec![0.0, u[0], u[1], u[2]]],
                        });
                    }
                }
                out
            }
            Base::Padic { p } => {
                let mut out = vec![SubAlgebra::PadicZero];
                for e in (1..d).filter(|e| d % e == 0) {
                    out.push(subfield(alg, p, e));
                }
                out
            }
        };
        SubAlgebraFamily {
            alg: alg.clone(),
            members,
            net_exp,
        }
    }

    pub fn alg(&self) -> &Algebra {
        &self.alg
    }

    pub fn members(&self) -> &[SubAlgebra] {
        &self.members
    }

    pub fn net_exp(&self) -> u32 {
        self.net_exp
    }
}

fn unit_vec(d: usize, j: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[j] = 1.0;
    v
}

/// Directions of the integer points on the surface of the cube of side
/// `2^(net_exp+1)`, one per antipodal pair.
fn sphere_net(net_exp: u32) -> Vec<[f64; 3]> {
    let k = 1i64 << net_exp;
    let mut out = Vec::new();
    for x in -k..=k {
        for y in -k..=k {
            for z in -k..=k {
                if x.abs().max(y.abs()).max(z.abs()) != k {
                    continue;
                }
                let first = [x, y, z].into_iter().find(|&c| c != 0).expect("on the surface");
                if first < 0 {
                    continue;
                }
                let n = ((x * x + y * y + z * z) as f64).sqrt();
                out.push([x as f64 / n, y as f64 / n, z as f64 / n]);
            }
        }
    }
    out
}

fn pow(alg: &Algebra, x: &Element, mut n: u128) -> Element {
    let mut acc = alg.one();
    let mut base = x.clone();
    while n > 0 {
        if n & 1 == 1 {
            acc = alg.mul(&acc, &base);
        }
        base = alg.mul(&base, &base);
        n >>= 1;
    }
    acc
}

/// The degree-`e` subfield, generated by the Teichmüller lift of an element
/// of exact degree `e` in the residue field.
fn subfield(alg: &Algebra, p: u64, e: usize) -> SubAlgebra {
    let d = alg.d();
    let zeta = if e == 1 {
        alg.one()
    } else {
        let residue = alg.with_precision(1).expect("precision 1 is valid");
        let q_d = (p as u128).pow(d as u32);
        let q_e = (p as u128).pow(e as u32);
        let norm_exp = (q_d - 1) / (q_e - 1);
        let proper: Vec<usize> = (1..e).filter(|k| e % k == 0).collect();
        let y = (1..q_d)
            .map(|n| {
                let mut n = n;
                Element::new((0..d).map(|_| {
                    let c = (n % p as u128) as i64;
                    n /= p as u128;
                    c
                }))
            })
            .map(|x| pow(&residue, &x, norm_exp))
            .find(|y| {
                proper
                    .iter()
                    .all(|&k| pow(&residue, y, (p as u128).pow(k as u32)) != *y)
            })
            .expect("the residue field has elements of every degree dividing d");
        // x -> x^(p^e) converges to the Teichmüller lift, one digit per step
        let mut z = y;
        for _ in 0..e * alg.m() as usize {
            z = pow(alg, &z, p as u128);
        }
        z
    };
    let mut basis = vec![alg.one()];
    for _ in 1..e {
        let next = alg.mul(basis.last().expect("nonempty"), &zeta);
        basis.push(next);
    }
    let mut frame: Vec<Vec<i64>> = basis.iter().map(|b| b.coords().to_vec()).collect();
    for j in 0..d {
        let mut trial = frame.clone();
        trial.push(unit_vec(d, j).iter().map(|&c| c as i64).collect());
        if padic_volume_valuation(trial.clone(), p as i64, 1).is_some() {
            frame = trial;
        }
        if frame.len() == d {
            break;
        }
    }
    SubAlgebra::Subfield { e, basis, frame }
}

/// `d(a, F)`: Euclidean distance to the span (real), or the p-adic distance
/// to the subfield at working precision.
pub fn distance_to_subalgebra(alg: &Algebra, a: &Element, f: &SubAlgebra) -> f64 {
    match f {
        SubAlgebra::Span { basis, .. } => {
            let s = alg.unit_scale() as f64;
            let x: Vec<f64> = a.coords().iter().map(|&c| c as f64 / s).collect();
            let total: f64 = x.iter().map(|v| v * v).sum();
            let along: f64 = basis
                .iter()
                .map(|b| {
                    let dot: f64 = b.iter().zip(&x).map(|(u, v)| u * v).sum();
                    dot * dot
                })
                .sum();
            (total - along).max(0.0).sqrt()
        }
        SubAlgebra::PadicZero => alg.norm(a),
        SubAlgebra::Subfield { e, frame, .. } => {
            let d = alg.d();
            let p = alg.radix() as i64;
            // columns of the frame matrix are the frame vectors
            let mat: Vec<Vec<i64>> = (0..d).map(|i| frame.iter().map(|v| v[i]).collect()).collect();
            let c = solve_mod(mat, a.coords().to_vec(), p, alg.modulus()).expect("frame is unimodular");
            let outside = Element::new(c[*e..].iter().copied());
            alg.norm(&outside)
        }
    }
}

/// Outcome of an avoidance test.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AvoidReport {
    pub pass: bool,
    pub c: f64,
    /// Member with the smallest farthest-point distance.
    pub worst: String,
    /// `max_a d(a, worst)`.
    pub worst_distance: f64,
    /// Points of `A` within `1/C` of the worst member.
    pub trapped: usize,
    pub net_exp: u32,
}

struct MemberProfile {
    index: usize,
    farthest: f64,
    trapped: usize,
}

fn profiles(a: &DSet, family: &SubAlgebraFamily, c: f64) -> Vec<MemberProfile> {
    let alg = a.alg();
    let r = 1.0 / c;
    family
        .members()
        .par_iter()
        .enumerate()
        .map(|(index, f)| {
            let mut farthest: f64 = 0.0;
            let mut trapped = 0;
            for x in a.points() {
                let dist = distance_to_subalgebra(alg, x, f);
                farthest = farthest.max(dist);
                if dist < r {
                    trapped += 1;
                }
            }
            MemberProfile {
                index,
                farthest,
                trapped,
            }
        })
        .collect()
}

/// Whether every member `F` has some `a` with `d(a, F) >= 1/C`.
pub fn avoids_subalgebras(a: &DSet, c: f64) -> Result<AvoidReport> {
    avoids_with(a, &SubAlgebraFamily::new(a.alg()), c)
}

pub fn avoids_with(a: &DSet, family: &SubAlgebraFamily, c: f64) -> Result<AvoidReport> {
    check_c(c)?;
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let prof = profiles(a, family, c);
    let worst = prof
        .iter()
        .min_by(|x, y| x.farthest.total_cmp(&y.farthest).then(x.index.cmp(&y.index)))
        .expect("family contains {0}");
    Ok(AvoidReport {
        pass: worst.farthest >= 1.0 / c,
        c,
        worst: family.members()[worst.index].label(),
        worst_distance: worst.farthest,
        trapped: worst.trapped,
        net_exp: family.net_exp(),
    })
}

/// Outcome of the strong avoidance test.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StrongAvoidReport {
    pub pass: bool,
    pub c: f64,
    /// `ceil(|A|/C)`: the smallest subset size the definition quantifies over.
    pub threshold: usize,
    /// Member trapping the most points.
    pub worst: String,
    pub worst_trapped: usize,
    pub net_exp: u32,
}

/// Every `B ⊂ A` with `|B| >= |A|/C` has a point `1/C`-far from each member.
/// A member defeats this exactly when it traps `ceil(|A|/C)` or more points,
/// since those points form such a `B`.
pub fn strongly_avoids(a: &DSet, c: f64) -> Result<StrongAvoidReport> {
    strongly_avoids_with(a, &SubAlgebraFamily::new(a.alg()), c)
}

pub fn strongly_avoids_with(a: &DSet, family: &SubAlgebraFamily, c: f64) -> Result<StrongAvoidReport> {
    check_c(c)?;
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let threshold = (a.len() as f64 / c).ceil() as usize;
    let prof = profiles(a, family, c);
    let worst = prof
        .iter()
        .max_by(|x, y| x.trapped.cmp(&y.trapped).then(y.index.cmp(&x.index)))
        .expect("family contains {0}");
    Ok(StrongAvoidReport {
        pass: worst.trapped < threshold,
        c,
        threshold,
        worst: family.members()[worst.index].label(),
        worst_trapped: worst.trapped,
        net_exp: family.net_exp(),
    })
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c >= 1.0 {
        Ok(())
    } else {
        Err(Error::RangeError(format!("C must be at least 1, got {c}")))
    }
}

/// An escape basis with its determinant certificate.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EscapeBasis {
    pub vectors: Vec<Element>,
    /// Number of factors from `A` in each vector.
    pub depths: Vec<usize>,
    pub det: f64,
}

/// Greedy search for `d` elements of `A ∪ A^(2) ∪ … ∪ A^(d)` with
/// `|det| >= floor`. Each depth keeps at most [`ESCAPE_POOL_CAP`] products,
/// sampled with a fixed seed when there are more.
pub fn escape_basis(a: &DSet, floor: f64) -> Result<EscapeBasis> {
    let alg = a.alg();
    let d = alg.d();
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut pool: Vec<(Element, usize)> = a.points().iter().map(|x| (x.clone(), 1)).collect();
    let mut level: Vec<Element> = a.points().to_vec();
    for depth in 2..=d {
        let n_pairs = a.len() * level.len();
        let picks: Vec<usize> = if n_pairs > ESCAPE_POOL_CAP {
            let mut v = sample(&mut rng, n_pairs, ESCAPE_POOL_CAP).into_vec();
            v.sort_unstable();
            v
        } else {
            (0..n_pairs).collect()
        };
        let mut next: Vec<Element> = picks
            .par_iter()
            .map(|&k| alg.mul(&a.points()[k / level.len()], &level[k % level.len()]))
            .collect();
        next.sort_unstable();
        next.dedup();
        pool.extend(next.iter().map(|x| (x.clone(), depth)));
        level = next;
    }
    pool.sort_unstable();
    pool.dedup_by(|x, y| x.0 == y.0);

    let mut chosen: Vec<Element> = Vec::with_capacity(d);
    let mut depths = Vec::with_capacity(d);
    // v1 maximizes the norm over A itself
    let first = a
        .points()
        .iter()
        .max_by(|x, y| alg.norm(x).total_cmp(&alg.norm(y)).then(y.cmp(x)))
        .expect("nonempty");
    if first.is_zero() {
        return Err(Error::SubAlgebraTrapped {
            reached: 0,
            volume: 0.0,
        });
    }
    chosen.push(first.clone());
    depths.push(1);
    let mut volume = alg.norm(first);
    while chosen.len() < d {
        // largest gain, then fewest factors, then lexicographically first
        let scored: Vec<(f64, usize)> = pool
            .par_iter()
            .enumerate()
            .map(|(i, (w, _))| (extension_gain(alg, &chosen, w), i))
            .collect();
        let best = scored
            .iter()
            .copied()
            .max_by(|x, y| {
                x.0.total_cmp(&y.0)
                    .then(pool[y.1].1.cmp(&pool[x.1].1))
                    .then(y.1.cmp(&x.1))
            })
            .expect("pool is nonempty");
        if best.0 <= 0.0 {
            return Err(Error::SubAlgebraTrapped {
                reached: chosen.len(),
                volume,
            });
        }
        let (w, depth) = &pool[best.1];
        chosen.push(w.clone());
        depths.push(*depth);
        volume = match alg.base() {
            Base::Real => volume * best.0,
            Base::Padic { .. } => best.0,
        };
    }
    let det = alg.det_basis(&chosen)?.abs();
    if det < floor {
        return Err(Error::SubAlgebraTrapped { reached: d, volume: det });
    }
    Ok(EscapeBasis {
        vectors: chosen,
        depths,
        det,
    })
}

/// Real: distance from `w` to the span of `chosen` (so the volume grows by
/// this factor). p-adic: the volume `p^-v` of `chosen ∪ {w}`.
fn extension_gain(alg: &Algebra, chosen: &[Element], w: &Element) -> f64 {
    match alg.base() {
        Base::Real => {
            let s = alg.unit_scale() as f64;
            let to_f = |x: &Element| x.coords().iter().map(|&c| c as f64 / s).collect::<Vec<f64>>();
            let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(chosen.len());
            for v in chosen {
                let mut u = to_f(v);
                for o in &ortho {
                    let dot: f64 = u.iter().zip(o).map(|(a, b)| a * b).sum();
                    u.iter_mut().zip(o).for_each(|(a, b)| *a -= dot * b);
                }
                let n = u.iter().map(|a| a * a).sum::<f64>().sqrt();
                u.iter_mut().for_each(|a| *a /= n);
                ortho.push(u);
            }
            let mut x = to_f(w);
            for o in &ortho {
                let dot: f64 = x.iter().zip(o).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(o).for_each(|(a, b)| *a -= dot * b);
            }
            let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            // residues below one grid unit are rounding noise
            if r * s < 0.5 {
                0.0
            } else {
                r
            }
        }
        Base::Padic { p } => {
            let rows: Vec<Vec<i64>> = chosen.iter().chain(std::iter::once(w)).map(|x| x.coords().to_vec()).collect();
            match padic_volume_valuation(rows, p as i64, alg.m()) {
                Some(v) => (p as f64).powi(-(v as i32)),
                None => 0.0,
            }
        }
    }
}

/// `f_i(x) = (x + Σ_{i_j = 1} v_j) / 2`, i.e. the map halving the
/// coordinates of `x` in the basis `v` after shifting by `i`. One rounding.
pub fn halving_map(alg: &Algebra, v: &[Element], bits: &[bool], x: &Element) -> Result<Element> {
    if !alg.is_real() {
        return Err(Error::NotRealBase);
    }
    if v.len() != alg.d() || bits.len() != alg.d() {
        return Err(Error::RangeError(format!(
            "halving map needs {} basis vectors and bits, got {} and {}",
            alg.d(),
            v.len(),
            bits.len()
        )));
    }
    let mut acc: Vec<i128> = x.coords().iter().map(|&c| c as i128).collect();
    for (vj, _) in v.iter().zip(bits).filter(|(_, &b)| b) {
        for (a, &c) in acc.iter_mut().zip(vj.coords()) {
            *a += c as i128;
        }
    }
    Ok(Element::new(acc.into_iter().map(|a| round_div(a, 2) as i64)))
}
