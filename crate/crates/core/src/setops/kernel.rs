//! Sumset and pairwise-image kernels.
//!
//! Distinct sums are found either by direct enumeration into a hash set or,
//! when the pair count dwarfs the bounding box, by FFT convolution of the
//! two indicator functions over the box (Kronecker-flattened to one
//! dimension, so no wraparound occurs).

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::algebra::Element;
use crate::budget::Budget;
use crate::error::Result;

/// Largest FFT length used before falling back to enumeration.
const FFT_MAX_LEN: u128 = 1 << 23;

/// Mixed-radix index of the integer box `lo + [0, dims)`.
#[derive(Clone, Debug)]
pub(crate) struct BoxIndex {
    lo: Vec<i64>,
    strides: Vec<u64>,
    size: u128,
}

impl BoxIndex {
    fn new(lo: Vec<i64>, dims: Vec<u64>) -> Self {
        let mut strides = vec![0u64; dims.len()];
        let mut acc: u128 = 1;
        for j in (0..dims.len()).rev() {
            strides[j] = acc.min(u64::MAX as u128) as u64;
            acc = acc.saturating_mul(dims[j] as u128);
        }
        BoxIndex {
            lo,
            strides,
            size: acc,
        }
    }

    /// Bounding box of `pts` (optionally negated).
    fn bounding(pts: &[Element], negate: bool) -> (Vec<i64>, Vec<i64>) {
        let d = pts[0].dim();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for x in pts {
            for (j, &c) in x.coords().iter().enumerate() {
                let c = if negate { -c } else { c };
                lo[j] = lo[j].min(c);
                hi[j] = hi[j].max(c);
            }
        }
        (lo, hi)
    }

    fn encode(&self, c: impl Iterator<Item = i64>) -> u64 {
        c.zip(&self.lo)
            .zip(&self.strides)
            .map(|((c, lo), s)| (c - lo) as u64 * s)
            .sum()
    }

    fn decode(&self, mut key: u64) -> Element {
        Element::new(self.strides.iter().zip(&self.lo).map(|(&s, &lo)| {
            let digit = key / s;
            key %= s;
            lo + digit as i64
        }))
    }
}

fn sum_box(a: &[Element], b: &[Element], negate_b: bool) -> (BoxIndex, Vec<i64>, Vec<i64>) {
    let (alo, ahi) = BoxIndex::bounding(a, false);
    let (blo, bhi) = BoxIndex::bounding(b, negate_b);
    let lo: Vec<i64> = alo.iter().zip(&blo).map(|(x, y)| x + y).collect();
    let dims: Vec<u64> = (0..alo.len())
        .map(|j| ((ahi[j] - alo[j]) + (bhi[j] - blo[j]) + 1) as u64)
        .collect();
    (BoxIndex::new(lo, dims), alo, blo)
}

/// How a distinct-sum computation was carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumStrategy {
    Auto,
    Enumerate,
    Fft,
}

/// Distinct values of `a + b` (or `a - b`), as raw integer vectors.
pub(crate) fn distinct_sums(
    a: &[Element],
    b: &[Element],
    negate_b: bool,
    strategy: SumStrategy,
    budget: &Budget,
    stage: &str,
) -> Result<Vec<Element>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let (index, alo, blo) = sum_box(a, b, negate_b);
    let pairs = a.len() as u128 * b.len() as u128;
    let fft_len = index.size.next_power_of_two();
    let fft_pays = fft_len <= FFT_MAX_LEN && pairs as f64 > 4.0 * fft_len as f64 * (fft_len as f64).log2();
    let use_fft = match strategy {
        SumStrategy::Auto => fft_pays,
        SumStrategy::Enumerate => false,
        SumStrategy::Fft => fft_len <= FFT_MAX_LEN,
    };
    let out = if use_fft {
        fft_sums(a, b, negate_b, &index, &alo, &blo, fft_len as usize)
    } else {
        budget.check_pairs(stage, pairs)?;
        let sign = if negate_b { -1 } else { 1 };
        let keys: HashSet<u64> = a
            .par_iter()
            .fold(HashSet::new, |mut acc, x| {
                for y in b {
                    acc.insert(index.encode(x.coords().iter().zip(y.coords()).map(|(&p, &q)| p + sign * q)));
                }
                acc
            })
            .reduce(HashSet::new, merge_sets);
        keys.into_iter().map(|k| index.decode(k)).collect()
    };
    budget.check_points(stage, out.len() as u128)?;
    Ok(out)
}

fn merge_sets<T: std::hash::Hash + Eq>(mut x: HashSet<T>, mut y: HashSet<T>) -> HashSet<T> {
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    x.extend(y);
    x
}

fn fft_sums(
    a: &[Element],
    b: &[Element],
    negate_b: bool,
    index: &BoxIndex,
    alo: &[i64],
    blo: &[i64],
    n: usize,
) -> Vec<Element> {
    // place both sets at offset zero inside the output box strides
    let indicator = |pts: &[Element], lo: &[i64], negate: bool| {
        let mut buf = vec![Complex::new(0.0f64, 0.0); n];
        for x in pts {
            let k: u64 = x
                .coords()
                .iter()
                .zip(lo)
                .zip(&index.strides)
                .map(|((&c, &l), &s)| ((if negate { -c } else { c }) - l) as u64 * s)
                .sum();
            buf[k as usize].re = 1.0;
        }
        buf
    };
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut fa = indicator(a, alo, false);
    fwd.process(&mut fa);
    let same = !negate_b && a == b;
    if same {
        for v in fa.iter_mut() {
            *v = *v * *v;
        }
    } else {
        let mut fb = indicator(b, blo, negate_b);
        fwd.process(&mut fb);
        for (v, w) in fa.iter_mut().zip(&fb) {
            *v *= w;
        }
    }
    inv.process(&mut fa);
    let scale = n as f64;
    let size = index.size as usize;
    fa[..size]
        .par_iter()
        .enumerate()
        .filter(|(_, v)| v.re / scale > 0.5)
        .map(|(k, _)| index.decode(k as u64))
        .collect()
}

/// Multiplicity of every value of `a + b` (or `a - b`), sorted by value.
pub(crate) fn sum_multiplicities(
    a: &[Element],
    b: &[Element],
    negate_b: bool,
    budget: &Budget,
    stage: &str,
) -> Result<Vec<(Element, u64)>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let (index, _, _) = sum_box(a, b, negate_b);
    budget.check_pairs(stage, a.len() as u128 * b.len() as u128)?;
    let sign = if negate_b { -1 } else { 1 };
    let counts: HashMap<u64, u64> = a
        .par_iter()
        .fold(HashMap::new, |mut acc, x| {
            for y in b {
                let k = index.encode(x.coords().iter().zip(y.coords()).map(|(&p, &q)| p + sign * q));
                *acc.entry(k).or_insert(0) += 1;
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
        });
    let mut out: Vec<(Element, u64)> = counts.into_iter().map(|(k, v)| (index.decode(k), v)).collect();
    out.par_sort_unstable();
    Ok(out)
}

/// Distinct values of `f(i, j)` over `i < outer`, `j < inner`; `None` skips.
pub(crate) fn collect_distinct<F>(outer: usize, inner: usize, budget: &Budget, stage: &str, f: F) -> Result<Vec<Element>>
where
    F: Fn(usize, usize) -> Option<Element> + Sync,
{
    budget.check_pairs(stage, outer as u128 * inner as u128)?;
    let set: HashSet<Element> = (0..outer)
        .into_par_iter()
        .fold(HashSet::new, |mut acc, i| {
            for j in 0..inner {
                if let Some(v) = f(i, j) {
                    acc.insert(v);
                }
            }
            acc
        })
        .reduce(HashSet::new, merge_sets);
    budget.check_points(stage, set.len() as u128)?;
    let mut out: Vec<Element> = set.into_iter().collect();
    out.par_sort_unstable();
    Ok(out)
}
