//! Polynomials over the prime field F_p, enough to pick and check the
//! defining polynomial of an unramified extension.
//!
//! Coefficient vectors are little-endian: `f[i]` is the coefficient of `x^i`.

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn powmod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, p);
        }
        base = mulmod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Modular inverse of `a` mod `n` by extended Euclid; `None` when not coprime.
pub(crate) fn inv_mod(a: i128, n: i128) -> Option<i128> {
    let (mut r0, mut r1) = (a.rem_euclid(n), n);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(n))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    // deterministic Miller-Rabin for 64-bit inputs
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

/// Remainder of `a` modulo the nonzero polynomial `b`.
fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db] as i128, p as i128).expect("nonzero leading coefficient") as u64;
    while r.len() > db {
        let top = r.len() - 1;
        let c = mulmod(r[top], lead_inv, p);
        if c != 0 {
            for (i, &bi) in b.iter().enumerate() {
                let idx = top - db + i;
                r[idx] = (r[idx] + p - mulmod(c, bi, p)) % p;
            }
        }
        r.pop();
        r = trim(r);
    }
    r
}

fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
        }
    }
    trim(out)
}

fn pow_rem(base: &[u64], mut exp: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = rem(base, f, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = rem(&mul(&acc, &b, p), f, p);
        }
        b = rem(&mul(&b, &b, p), f, p);
        exp >>= 1;
    }
    acc
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// `x^(p^k) mod f`, by k successive p-th powers.
fn frobenius_power(k: usize, f: &[u64], p: u64) -> Vec<u64> {
    let mut x = vec![0, 1];
    for _ in 0..k {
        x = pow_rem(&x, p, f, p);
    }
    x
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

/// Rabin's irreducibility test for a monic polynomial over F_p.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let f = trim(f.iter().map(|c| c % p).collect());
    if f.len() < 2 || f[f.len() - 1] != 1 {
        return false;
    }
    let d = f.len() - 1;
    if d == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    if !sub(&frobenius_power(d, &f, p), &x, p).is_empty() {
        return false;
    }
    for q in prime_factors(d as u64) {
        let h = sub(&frobenius_power(d / q as usize, &f, p), &x, p);
        if gcd(&f, &h, p).len() != 1 {
            return false;
        }
    }
    true
}

/// The monic irreducible polynomial of degree `d` whose lower coefficients,
/// read as base-p digits, form the smallest integer.
pub fn smallest_irreducible(p: u64, d: usize) -> Vec<u64> {
    if d == 1 {
        return vec![0, 1];
    }
    let mut digits = vec![0u64; d];
    loop {
        let mut f = digits.clone();
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
        // increment the little-endian counter; irreducibles of every degree exist
        for c in digits.iter_mut() {
            *c += 1;
            if *c < p {
                break;
            }
            *c = 0;
        }
    }
}
