//! Small exact linear algebra: integer determinants and elimination over
//! `Z / p^m`.

use super::poly::inv_mod;

/// Fraction-free Gaussian elimination; `None` on i128 overflow.
pub(crate) fn det_bareiss(mut a: Vec<Vec<i128>>) -> Option<i128> {
    let n = a.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let swap = (k + 1..n).find(|&i| a[i][k] != 0);
            match swap {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Some(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = t / prev;
            }
        }
        prev = a[k][k];
    }
    a[n - 1][n - 1].checked_mul(sign)
}

pub(crate) fn det_f64(a: Vec<Vec<i128>>) -> f64 {
    let mut m: Vec<Vec<f64>> = a.into_iter().map(|r| r.into_iter().map(|v| v as f64).collect()).collect();
    let n = m.len();
    let mut det = 1.0;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .expect("nonempty range");
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

fn valuation(mut x: i128, p: i128) -> u32 {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Solve `A y = b` over `Z / modulus` for `A` invertible mod p.
pub(crate) fn solve_mod(a: Vec<Vec<i64>>, b: Vec<i64>, p: i64, modulus: i64) -> Option<Vec<i64>> {
    let n = a.len();
    let md = modulus as i128;
    let mut aug: Vec<Vec<i128>> = a
        .into_iter()
        .zip(b)
        .map(|(row, r)| row.into_iter().chain(std::iter::once(r)).map(|v| (v as i128).rem_euclid(md)).collect())
        .collect();
    for k in 0..n {
        let piv = (k..n).find(|&i| aug[i][k] % p as i128 != 0)?;
        aug.swap(piv, k);
        let inv = inv_mod(aug[k][k], md)?;
        for v in aug[k].iter_mut() {
            *v = (*v * inv) % md;
        }
        for i in 0..n {
            if i != k && aug[i][k] != 0 {
                let f = aug[i][k];
                for j in 0..=n {
                    aug[i][j] = (aug[i][j] - f * aug[k][j]).rem_euclid(md);
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n] as i64).collect())
}

/// Valuation of the k-dimensional volume spanned by `rows` (k <= d vectors in
/// `(Z / p^m)^d`): the minimum valuation over k x k minors, computed by
/// elimination with full pivoting on the entry of least valuation. `None`
/// when the rows are dependent at this precision.
pub fn padic_volume_valuation(rows: Vec<Vec<i64>>, p: i64, m: u32) -> Option<u32> {
    let p = p as i128;
    let md = p.pow(m);
    let mut a: Vec<Vec<i128>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(|v| (v as i128).rem_euclid(md)).collect())
        .collect();
    let k = a.len();
    let d = a.first().map_or(0, |r| r.len());
    let mut live_cols: Vec<usize> = (0..d).collect();
    let mut total = 0u32;
    for step in 0..k {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(step) {
            for &j in &live_cols {
                if row[j] != 0 {
                    let v = valuation(row[j], p);
                    if best.map_or(true, |(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let (v, pi, pj) = best?;
        total += v;
        a.swap(step, pi);
        live_cols.retain(|&c| c != pj);
        let pv = p.pow(v);
        let unit = a[step][pj] / pv;
        let reduced = md / pv;
        let u_inv = inv_mod(unit, reduced).expect("unit part is coprime to p");
        for i in step + 1..k {
            if a[i][pj] == 0 {
                continue;
            }
            // a[i][pj] / a[step][pj] is integral since v is the minimum
            let f = ((a[i][pj] / pv) % reduced * u_inv) % reduced;
            for j in 0..d {
                a[i][j] = (a[i][j] - f * a[step][j]).rem_euclid(md);
            }
        }
    }
    Some(total)
}
