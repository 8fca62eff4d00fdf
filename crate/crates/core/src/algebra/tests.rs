use proptest::prelude::*;

use super::*;

fn alg(kind: AlgebraKind, m: u32) -> Algebra {
    make_algebra(&AlgebraSpec::new(kind, m)).unwrap()
}

fn padic(p: u64, d: usize, m: u32) -> Algebra {
    make_algebra(&AlgebraSpec::padic(p, d, m)).unwrap()
}

fn el(a: &Algebra, c: &[i64]) -> Element {
    a.element(c.iter().copied()).unwrap()
}

#[test]
fn complex_unit_squares_to_minus_one() {
    let c = alg(AlgebraKind::C, 8);
    let i = c.basis(1);
    assert_eq!(c.mul(&i, &i), c.neg(&c.one()));
    assert_eq!(c.structure_constant(1, 1, 0), -1);
}

#[test]
fn quaternion_table() {
    let h = alg(AlgebraKind::H, 4);
    let (i, j, k) = (h.basis(1), h.basis(2), h.basis(3));
    assert_eq!(h.mul(&i, &j), k);
    assert_eq!(h.mul(&j, &i), h.neg(&k));
    assert_eq!(h.mul(&j, &k), i);
    assert_eq!(h.mul(&k, &i), j);
    assert_eq!(h.mul(&k, &k), h.neg(&h.one()));
    assert!(!h.is_commutative());
}

#[test]
fn z_mod_81() {
    let q = padic(3, 1, 4);
    assert_eq!(q.modulus(), 81);
    assert_eq!(q.mul(&el(&q, &[2]), &el(&q, &[41])), el(&q, &[1]));
    assert_eq!(q.inv(&el(&q, &[2])).unwrap(), el(&q, &[41]));
}

#[test]
fn cubic_extension_of_q2() {
    let e = padic(2, 3, 5);
    assert_eq!(e.defining_poly(), Some(&[1u64, 1, 0, 1][..]));
    // z^3 = -z - 1 mod 32
    let z = e.basis(1);
    let z3 = e.mul(&e.mul(&z, &z), &z);
    assert_eq!(z3, el(&e, &[31, 31, 0]));
}

#[test]
fn supplied_reducible_poly_rejected() {
    let mut spec = AlgebraSpec::padic(2, 2, 4);
    spec.poly = Some(vec![1, 0, 1]);
    assert_eq!(make_algebra(&spec).unwrap_err(), Error::ReduciblePoly(vec![1, 0, 1], 2));
}

#[test]
fn construction_errors() {
    assert_eq!(make_algebra(&AlgebraSpec::padic(4, 1, 3)).unwrap_err(), Error::NonPrime(4));
    assert_eq!(AlgebraSpec::real(3, 4).unwrap_err(), Error::UnsupportedRealDim(3));
    let mut spec = AlgebraSpec::new(AlgebraKind::C, 5);
    spec.d = Some(3);
    assert_eq!(make_algebra(&spec).unwrap_err(), Error::UnsupportedRealDim(3));
}

#[test]
fn complex_identity_product() {
    let c = alg(AlgebraKind::C, 8);
    assert_eq!(c.mul(&c.one(), &c.basis(1)), c.basis(1));
}

#[test]
fn real_rounding_is_half_away_from_zero() {
    let r = alg(AlgebraKind::R, 2);
    // (1/4)(1/2) = 1/8 = half a unit of 1/4, rounds away from zero
    assert_eq!(r.mul(&el(&r, &[1]), &el(&r, &[2])), el(&r, &[1]));
    assert_eq!(r.mul(&el(&r, &[-1]), &el(&r, &[2])), el(&r, &[-1]));
    assert_eq!(round_div(-3, 2), -2);
    assert_eq!(round_div(5, 4), 1);
}

#[test]
fn inverses() {
    let c = alg(AlgebraKind::C, 8);
    assert_eq!(c.inv(&c.basis(1)).unwrap(), c.neg(&c.basis(1)));
    let r = alg(AlgebraKind::R, 8);
    assert_eq!(r.inv(&r.zero()).unwrap_err(), Error::DivisionByNegligible);
    // 2^-4 is exactly at the floor for m = 8, 2^-5 is below it
    assert_eq!(r.inv(&el(&r, &[16])).unwrap(), el(&r, &[16 * 256]));
    assert_eq!(r.inv(&el(&r, &[8])).unwrap_err(), Error::DivisionByNegligible);
    let q = padic(3, 1, 4);
    assert_eq!(q.inv(&el(&q, &[3])).unwrap_err(), Error::NonIntegral { num: 0, den: 1 });
}

#[test]
fn norms() {
    let q = padic(3, 1, 4);
    assert_eq!(q.norm(&el(&q, &[3])), 1.0 / 3.0);
    assert_eq!(q.norm(&q.zero()), 0.0);
    let c = alg(AlgebraKind::C, 8);
    assert_eq!(c.norm(&el(&c, &[3, 4])), 5.0 / 256.0);
    let e = padic(2, 2, 5);
    assert_eq!(e.norm(&el(&e, &[2, 4])), 0.5);
}

#[test]
fn determinants() {
    let c = alg(AlgebraKind::C, 8);
    assert_eq!(c.det_basis(&[c.one(), c.basis(1)]).unwrap(), 1.0);
    assert_eq!(c.det_basis(&[c.one(), c.one()]).unwrap(), 0.0);
    let h = alg(AlgebraKind::H, 6);
    let ij = h.mul(&h.basis(1), &h.basis(2));
    assert_eq!(h.det_basis(&[h.one(), h.basis(1), h.basis(2), ij]).unwrap(), 1.0);
    let e = padic(3, 2, 4);
    assert_eq!(e.det_basis(&[el(&e, &[3, 0]), e.basis(1)]).unwrap(), 1.0 / 3.0);
}

#[test]
fn padic_division_tracks_precision() {
    let q = padic(3, 1, 4);
    // 6 / 3 = 2, known mod 27
    let r = q.div(&el(&q, &[6]), &el(&q, &[3])).unwrap();
    assert_eq!(r, el(&q, &[2]));
    assert_eq!(
        q.div(&el(&q, &[1]), &el(&q, &[3])).unwrap_err(),
        Error::NonIntegral { num: 0, den: 1 }
    );
}

#[test]
fn rescale_round_trip() {
    let c = alg(AlgebraKind::C, 6);
    let x = el(&c, &[5, -7]);
    let fine = c.rescale(&x, 8);
    assert_eq!(fine, Element::new([20, -28]));
    let fine_alg = c.with_precision(8).unwrap();
    assert_eq!(fine_alg.rescale(&fine, 6), x);
}

fn real_alg() -> impl Strategy<Value = Algebra> {
    prop_oneof![Just(AlgebraKind::R), Just(AlgebraKind::C), Just(AlgebraKind::H)].prop_map(|k| alg(k, 10))
}

fn real_elem(a: &Algebra, bound: i64) -> impl Strategy<Value = Element> {
    prop::collection::vec(-bound..=bound, a.d()).prop_map(Element::new)
}

fn padic_alg() -> impl Strategy<Value = Algebra> {
    (prop_oneof![Just(2u64), Just(3), Just(5)], 1usize..=3).prop_map(|(p, d)| {
        let m = match p {
            2 => 10,
            3 => 6,
            _ => 4,
        };
        padic(p, d, m)
    })
}

fn padic_elem(a: &Algebra) -> impl Strategy<Value = Element> {
    // bias toward high valuations by multiplying by a random power of p
    let md = a.modulus();
    let p = a.p().unwrap() as i64;
    let m = a.m();
    (prop::collection::vec(0..md, a.d()), 0..=m).prop_map(move |(c, v)| {
        let f = p.pow(v);
        Element::new(c.into_iter().map(|x| (x as i128 * f as i128 % md as i128) as i64))
    })
}

proptest! {
    #[test]
    fn real_multiplicativity((a, x, y) in real_alg().prop_flat_map(|a| {
        let x = real_elem(&a, 1 << 10);
        let y = real_elem(&a, 1 << 10);
        (Just(a), x, y)
    })) {
        let lhs = a.norm(&a.mul(&x, &y));
        let rhs = a.norm(&x) * a.norm(&y);
        let unit = 1.0 / a.unit_scale() as f64;
        prop_assert!((lhs - rhs).abs() <= (a.d() as f64).sqrt() * unit / 2.0 + 1e-12);
    }

    #[test]
    fn real_distributivity((a, x, y, z) in real_alg().prop_flat_map(|a| {
        (Just(a.clone()), real_elem(&a, 1 << 10), real_elem(&a, 1 << 10), real_elem(&a, 1 << 10))
    })) {
        let lhs = a.mul(&x, &a.add(&y, &z));
        let rhs = a.add(&a.mul(&x, &y), &a.mul(&x, &z));
        for (l, r) in lhs.coords().iter().zip(rhs.coords()) {
            prop_assert!((l - r).abs() <= 1);
        }
    }

    #[test]
    fn real_inverse_is_involution((a, x) in real_alg().prop_flat_map(|a| {
        (Just(a.clone()), real_elem(&a, 1 << 10))
    })) {
        prop_assume!(a.norm(&x) >= 0.5);
        let back = a.inv(&a.inv(&x).unwrap()).unwrap();
        for (l, r) in back.coords().iter().zip(x.coords()) {
            prop_assert!((l - r).abs() <= 2);
        }
        let one = a.mul(&x, &a.inv(&x).unwrap());
        for (l, r) in one.coords().iter().zip(a.one().coords()) {
            prop_assert!((l - r).abs() <= 2);
        }
    }

    #[test]
    fn padic_axioms((a, x, y) in padic_alg().prop_flat_map(|a| {
        (Just(a.clone()), padic_elem(&a), padic_elem(&a))
    })) {
        let (nx, ny) = (a.norm(&x), a.norm(&y));
        let s = a.norm(&a.add(&x, &y));
        prop_assert!(s <= nx.max(ny));
        if nx != ny {
            prop_assert_eq!(s, nx.max(ny));
        }
        let prod = a.mul(&x, &y);
        match (a.valuation(&x), a.valuation(&y)) {
            (Some(vx), Some(vy)) if vx + vy < a.m() => {
                prop_assert_eq!(a.valuation(&prod), Some(vx + vy));
                prop_assert!((a.norm(&prod) - nx * ny).abs() <= 1e-12 * nx * ny);
            }
            _ => prop_assert!(prod.is_zero()),
        }
    }

    #[test]
    fn padic_inverse_is_exact((a, x) in padic_alg().prop_flat_map(|a| {
        let md = a.modulus();
        (Just(a.clone()), prop::collection::vec(0..md, a.d()))
    })) {
        let x = Element::new(x);
        prop_assume!(a.valuation(&x) == Some(0));
        let y = a.inv(&x).unwrap();
        prop_assert_eq!(a.mul(&x, &y), a.one());
        prop_assert_eq!(a.inv(&y).unwrap(), x);
    }

    #[test]
    fn det_is_alternating((a, rows) in prop_oneof![real_alg(), padic_alg()].prop_flat_map(|a| {
        let elem = if a.is_real() { real_elem(&a, 300).boxed() } else { padic_elem(&a).boxed() };
        (Just(a.clone()), prop::collection::vec(elem, a.d()))
    })) {
        prop_assume!(a.d() >= 2);
        let mut swapped = rows.clone();
        swapped.swap(0, 1);
        let (d0, d1) = (a.det_basis(&rows).unwrap(), a.det_basis(&swapped).unwrap());
        if a.is_real() {
            prop_assert_eq!(d0, -d1);
        } else {
            prop_assert_eq!(d0, d1);
        }
    }
}
