use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::algebra::{make_algebra, AlgebraKind, AlgebraSpec};

fn real(kind: AlgebraKind, m: u32) -> Algebra {
    make_algebra(&AlgebraSpec::new(kind, m)).unwrap()
}

fn padic(p: u64, d: usize, m: u32) -> Algebra {
    make_algebra(&AlgebraSpec::padic(p, d, m)).unwrap()
}

fn set(alg: &Algebra, r: i32, pts: &[&[i64]]) -> DSet {
    DSet::new(alg.clone(), r, pts.iter().map(|c| Element::new(c.iter().copied())).collect()).unwrap()
}

fn line(m: u32, pts: &[i64]) -> DSet {
    let alg = real(AlgebraKind::R, m);
    DSet::fit(alg, 0, pts.iter().map(|&c| Element::new([c])).collect()).unwrap()
}

fn b() -> Budget {
    Budget::default()
}

/// Grid points nearest to `n` equally spaced points on the unit circle.
fn circle(m: u32, n: usize) -> DSet {
    let alg = real(AlgebraKind::C, m);
    let s = alg.unit_scale() as f64;
    let pts = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            Element::new([(t.cos() * s).round() as i64, (t.sin() * s).round() as i64])
        })
        .collect();
    DSet::new(alg, 0, pts).unwrap()
}

fn naive_sums(a: &DSet, bset: &DSet, f: impl Fn(&Element, &Element) -> Element) -> BTreeSet<Element> {
    a.points().iter().flat_map(|x| bset.points().iter().map(|y| f(x, y)).collect::<Vec<_>>()).collect()
}

#[test]
fn sumset_examples() {
    let a = line(6, &[0, 3, 7, 20]);
    assert_eq!(sumset(&a, &line(6, &[0]), &b()).unwrap(), a);
    let two = line(6, &[0, 1]);
    assert_eq!(sumset(&two, &two, &b()).unwrap().points(), line(6, &[0, 1, 2]).points());
    for n in [1i64, 5, 17] {
        let ap = line(8, &(0..n).map(|k| 3 * k).collect::<Vec<_>>());
        assert_eq!(sumset(&ap, &ap, &b()).unwrap().len() as i64, 2 * n - 1);
        assert_eq!(difference_set(&ap, &ap, &b()).unwrap().len() as i64, 2 * n - 1);
    }
    let diff = difference_set(&two, &two, &b()).unwrap();
    assert_eq!(diff.points(), line(6, &[-1, 0, 1]).points());
}

#[test]
fn sumset_grows_radius_only_when_needed() {
    let a = line(3, &[8]);
    let s = sumset(&a, &a, &b()).unwrap();
    assert_eq!(s.radius_exp(), 1);
    let small = line(3, &[1]);
    assert_eq!(sumset(&small, &small, &b()).unwrap().radius_exp(), 0);
}

#[test]
fn mismatched_operands() {
    let a = line(3, &[1]);
    let c = set(&real(AlgebraKind::C, 3), 0, &[&[1, 0]]);
    assert_eq!(sumset(&a, &c, &b()).unwrap_err(), Error::AlgebraMismatch);
    assert_eq!(sumset(&a, &line(4, &[1]), &b()).unwrap_err(), Error::ScaleMismatch(3, 4));
}

#[test]
fn product_examples() {
    let alg = real(AlgebraKind::R, 2);
    // {1, 2, 3, 4} at δ = 1/4: the multiplication table has 9 entries
    let a = DSet::fit(alg.clone(), 0, (1..=4).map(|k| Element::new([4 * k])).collect()).unwrap();
    assert_eq!(product_set(&a, &a, Side::Left, &b()).unwrap().len(), 9);
    let one = set(&alg, 0, &[&[4]]);
    assert_eq!(product_set(&a, &one, Side::Left, &b()).unwrap().points(), a.points());

    let h = real(AlgebraKind::H, 3);
    let i = DSet::new(h.clone(), 0, vec![h.basis(1)]).unwrap();
    let j = DSet::new(h.clone(), 0, vec![h.basis(2)]).unwrap();
    let ij = product_set(&i, &j, Side::Left, &b()).unwrap();
    let ji = product_set(&j, &i, Side::Left, &b()).unwrap();
    assert_eq!(ij.points(), &[h.basis(3)]);
    assert_eq!(ji.points(), &[h.neg(&h.basis(3))]);
    assert_eq!(product_set(&i, &j, Side::Right, &b()).unwrap(), ji);
}

#[test]
fn iterated_examples() {
    let a = line(5, &[0, 1]);
    let two = iterated(&a, 2, 1, &b()).unwrap();
    assert_eq!(two.points(), line(5, &[-2, -1, 0, 1, 2]).points());
    let a = line(3, &[-8, -3, 0, 5, 8]);
    let one = iterated(&a, 1, 1, &b()).unwrap();
    let want: Vec<Element> = naive_sums(&a, &a, |x, y| Element::new([x.coords()[0] - y.coords()[0]]))
        .into_iter()
        .filter(|x| x.coords()[0].abs() <= 8)
        .collect();
    assert_eq!(one.points(), &want[..]);
}

#[test]
fn iterated_matches_naive_composition_on_circle() {
    let a = circle(5, 24);
    let alg = a.alg().clone();
    let got = iterated(&a, 2, 2, &b()).unwrap();
    // oracle: explicit loops, one rounding per product
    let prods: BTreeSet<Element> = naive_sums(&a, &a, |x, y| alg.mul(x, y));
    let diffs: BTreeSet<Element> = prods.iter().flat_map(|x| prods.iter().map(|y| alg.sub(x, y))).collect();
    let sums: BTreeSet<Element> = diffs
        .iter()
        .flat_map(|x| diffs.iter().map(|y| alg.add(x, y)))
        .filter(|x| alg.norm_sq_units(x) <= (alg.unit_scale() as i128).pow(2))
        .collect();
    assert_eq!(got.points(), &sums.into_iter().collect::<Vec<_>>()[..]);
    assert!(got.points().iter().all(|x| alg.norm(x) <= 1.0));
}

#[test]
fn budget_exceeded_reports_stage() {
    let a = circle(6, 60);
    let tight = Budget {
        max_points: 1000,
        max_pairs: u64::MAX,
    };
    match iterated(&a, 2, 2, &tight) {
        Err(Error::BudgetExceeded { cap, .. }) => assert_eq!(cap, 1000),
        other => panic!("expected budget error, got {other:?}"),
    }
}

#[test]
fn scalar_image_examples() {
    let c = real(AlgebraKind::C, 4);
    let ap = set(&c, 0, &[&[0, 0], &[3, 0], &[6, 0], &[9, 0]]);
    assert_eq!(scalar_image(&c.one(), &ap, Side::Left).unwrap(), ap);
    assert_eq!(scalar_image(&c.zero(), &ap, Side::Left).unwrap().points(), &[c.zero()]);
    let rotated = scalar_image(&c.basis(1), &ap, Side::Left).unwrap();
    assert_eq!(rotated.len(), ap.len());
    assert!(rotated.points().iter().all(|x| x.coords()[0] == 0));
}

#[test]
fn projection_examples() {
    let a = line(5, &[0, 2, 3, 9]);
    let g = PairSet::product(&a, &a).unwrap();
    let alg = a.alg().clone();
    assert_eq!(project(&alg.zero(), &g).unwrap(), a);
    assert_eq!(project(&alg.one(), &g).unwrap(), sumset(&a, &a, &b()).unwrap());
}

#[test]
fn quotient_of_two_points() {
    let a = line(7, &[0, 64]);
    let q = quotient_set(&a, 2, Side::Left, true, &b()).unwrap();
    assert_eq!(q.set.m(), 1);
    assert_eq!(q.set.points(), &[Element::new([-2]), Element::new([0]), Element::new([2])]);
    let w = q.witnesses.unwrap();
    // 0 first arises from a = b = 0 over c - d = 0 - 64
    assert_eq!(w[1], [Element::new([0]), Element::new([0]), Element::new([0]), Element::new([64])]);
    // a lone point has no admissible denominator
    assert_eq!(
        quotient_set(&line(7, &[5]), 2, Side::Left, false, &b()).unwrap_err(),
        Error::NoAdmissiblePairs
    );
    assert!(matches!(quotient_set(&a, 3, Side::Left, false, &b()), Err(Error::RangeError(_))));
}

/// Quotients of a complex set by four nested loops and exact integer rounding.
fn complex_quotient_oracle(a: &DSet, rho_exp: u32) -> BTreeSet<Element> {
    let m = a.m();
    let mq = m - 3 * rho_exp;
    let thresh = 1i128 << (2 * (m - rho_exp));
    let round = |n: i128, d: i128| -> i64 {
        let q = (2 * n.abs() + d) / (2 * d);
        (if n < 0 { -q } else { q }) as i64
    };
    let mut out = BTreeSet::new();
    for x in a.points() {
        for y in a.points() {
            for z in a.points() {
                for w in a.points() {
                    let (nr, ni) = ((x.0[0] - y.0[0]) as i128, (x.0[1] - y.0[1]) as i128);
                    let (dr, di) = ((z.0[0] - w.0[0]) as i128, (z.0[1] - w.0[1]) as i128);
                    let den = dr * dr + di * di;
                    if den <= thresh {
                        continue;
                    }
                    // (nr + i ni)(dr - i di) / |d|^2
                    let re = (nr * dr + ni * di) << mq;
                    let im = (ni * dr - nr * di) << mq;
                    out.insert(Element::new([round(re, den), round(im, den)]));
                }
            }
        }
    }
    out
}

#[test]
fn quotient_matches_brute_force_on_random_set() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let alg = real(AlgebraKind::C, 7);
    let pts: Vec<Element> = (0..17).map(|_| Element::new([rng.gen_range(-128..=128), rng.gen_range(-128..=128)])).collect();
    let a = DSet::new(alg, 0, pts).unwrap();
    let q = quotient_set(&a, 1, Side::Left, false, &b()).unwrap();
    let want: Vec<Element> = complex_quotient_oracle(&a, 1).into_iter().collect();
    assert_eq!(q.set.points(), &want[..]);
    assert!(q.set.contains(&q.set.alg().zero()));
    assert!(q.set.contains(&q.set.alg().one()));
    let right = quotient_set(&a, 1, Side::Right, false, &b()).unwrap();
    assert_eq!(right.set, q.set);
}

#[test]
fn padic_quotient_keeps_integral_part() {
    let q3 = padic(3, 1, 7);
    let a = DSet::new(q3.clone(), 0, [0, 1, 3, 9].iter().map(|&c| Element::new([c])).collect()).unwrap();
    let q = quotient_set(&a, 2, Side::Left, true, &b()).unwrap();
    assert_eq!(q.set.m(), 1);
    // oracle: every integral (a-b)/(c-d) with v(c-d) < 2, reduced mod 3
    let mut want = BTreeSet::new();
    for x in a.points() {
        for y in a.points() {
            for z in a.points() {
                for w in a.points() {
                    let num = x.0[0] - y.0[0];
                    let den = z.0[0] - w.0[0];
                    if den == 0 || den % 9 == 0 {
                        continue;
                    }
                    let vd = if den % 3 == 0 { 1 } else { 0 };
                    let vn = if num == 0 { 99 } else if num % 9 == 0 { 2 } else if num % 3 == 0 { 1 } else { 0 };
                    if vn < vd {
                        continue;
                    }
                    let (n3, d3) = (num / 3i64.pow(vd), den / 3i64.pow(vd));
                    let inv = (1..3).find(|&t| (d3 * t).rem_euclid(3) == 1).unwrap();
                    want.insert(Element::new([(n3 * inv).rem_euclid(3)]));
                }
            }
        }
    }
    assert_eq!(q.set.points(), &want.into_iter().collect::<Vec<_>>()[..]);
    for (pt, [x, y, z, w]) in q.set.points().iter().zip(q.witnesses.unwrap()) {
        let back = q3.div_at(&q3.sub(&x, &y), &q3.sub(&z, &w), Side::Left, 1).unwrap();
        assert_eq!(&back, pt);
    }
}

#[test]
fn linear_map_examples() {
    let c = real(AlgebraKind::C, 5);
    let a = set(&c, 0, &[&[1, 2], &[-3, 7], &[0, 0]]);
    let bset = set(&c, 0, &[&[5, 5], &[2, -1]]);
    let g = PairSet::product(&a, &bset).unwrap();
    assert_eq!(apply_linear_map(&LinearMap::identity(&c), &g).unwrap(), g);
    let swap = LinearMap {
        entries: [[c.zero(), c.one()], [c.one(), c.zero()]],
    };
    let swapped = apply_linear_map(&swap, &g).unwrap();
    assert_eq!(swapped, PairSet::product(&bset, &a).unwrap());
    let singular = LinearMap {
        entries: [[c.one(), c.one()], [c.one(), c.one()]],
    };
    assert_eq!(apply_linear_map(&singular, &g).unwrap_err(), Error::SingularMap);
}

#[test]
fn change_of_basis_sends_directions_to_axes() {
    let c = real(AlgebraKind::C, 10);
    let x1 = Element::new([0, 0]);
    let x2 = Element::new([512, 512]);
    let l = change_of_basis(&c, &x1, &x2).unwrap();
    let (u, w) = l.apply(&c, &c.one(), &x1);
    assert_eq!((u, w), (c.one(), c.zero()));
    let (u, w) = l.apply(&c, &c.one(), &x2);
    assert!(c.distance(&u, &c.zero()) <= 2.0 / 1024.0);
    assert!(c.distance(&w, &c.one()) <= 2.0 / 1024.0);
    // dual map: x1 -> 0 and x2 -> infinity (dropped)
    let xs = DSet::new(c.clone(), 0, vec![x1, x2]).unwrap();
    let image = apply_dual(&l, &xs).unwrap();
    assert_eq!(image.points(), &[c.zero()]);
    // the abscissa projection after the change is π_0: compare covering numbers
    let a = set(&c, 0, &[&[10, 0], &[20, 4], &[-30, 9], &[7, 7]]);
    let g = PairSet::product(&a, &a).unwrap();
    let t = inverse_transpose(&c, &l).unwrap();
    assert!(apply_linear_map(&t, &g).is_ok());
}

fn arb_set(alg: Algebra, max: usize) -> impl Strategy<Value = DSet> {
    let d = alg.d();
    let (lo, hi) = if alg.is_real() {
        (-alg.unit_scale(), alg.unit_scale())
    } else {
        (0, alg.modulus() - 1)
    };
    prop::collection::vec(prop::collection::vec(lo..=hi, d), 1..max)
        .prop_map(move |pts| DSet::new(alg.clone(), 0, pts.into_iter().map(Element::new).collect()).unwrap())
}

fn arb_alg() -> impl Strategy<Value = Algebra> {
    prop_oneof![
        Just(real(AlgebraKind::R, 7)),
        Just(real(AlgebraKind::C, 4)),
        Just(real(AlgebraKind::H, 2)),
        Just(padic(3, 1, 4)),
        Just(padic(2, 2, 3)),
    ]
}

proptest! {
    #[test]
    fn fft_and_enumeration_agree((a, c) in arb_alg().prop_flat_map(|alg| (arb_set(alg.clone(), 40), arb_set(alg, 40)))) {
        let e = sumset_with(&a, &c, SumStrategy::Enumerate, &b()).unwrap();
        let f = sumset_with(&a, &c, SumStrategy::Fft, &b()).unwrap();
        prop_assert_eq!(&e, &f);
        let alg = a.alg().clone();
        let naive: Vec<Element> = naive_sums(&a, &c, |x, y| alg.add(x, y)).into_iter().collect();
        prop_assert_eq!(e.points(), &naive[..]);
    }

    #[test]
    fn sumset_at_least_max((a, c) in arb_alg().prop_flat_map(|alg| (arb_set(alg.clone(), 30), arb_set(alg, 30)))) {
        let s = sumset(&a, &c, &b()).unwrap();
        prop_assert!(s.len() >= a.len().max(c.len()));
    }

    #[test]
    fn projection_of_product_is_sumset(
        (a, c, x) in arb_alg().prop_flat_map(|alg| {
            let d = alg.d();
            let x = if alg.is_real() {
                prop::collection::vec(-alg.unit_scale()..=alg.unit_scale(), d).boxed()
            } else {
                prop::collection::vec(0..alg.modulus(), d).boxed()
            };
            (arb_set(alg.clone(), 20), arb_set(alg, 20), x)
        })
    ) {
        let x = Element::new(x);
        let g = PairSet::product(&a, &c).unwrap();
        let lhs = project(&x, &g).unwrap();
        let rhs = sumset(&a, &scalar_image(&x, &c, Side::Left).unwrap(), &b()).unwrap();
        prop_assert_eq!(lhs.points(), rhs.points());
    }

    #[test]
    fn ruzsa_triangle_on_grid(
        (x, y, z) in arb_alg().prop_flat_map(|alg| (arb_set(alg.clone(), 25), arb_set(alg.clone(), 25), arb_set(alg, 25)))
    ) {
        let xz = difference_set(&x, &z, &b()).unwrap().len();
        let xy = difference_set(&x, &y, &b()).unwrap().len();
        let yz = difference_set(&y, &z, &b()).unwrap().len();
        prop_assert!(xz * y.len() <= xy * yz);
    }

    #[test]
    fn iterated_stays_in_unit_ball(a in arb_alg().prop_flat_map(|alg| arb_set(alg, 8))) {
        let out = iterated(&a, 2, 2, &b()).unwrap();
        prop_assert!(out.points().iter().all(|x| a.alg().norm(x) <= 1.0));
    }

    #[test]
    fn commutative_quotients_agree(a in prop_oneof![Just(real(AlgebraKind::C, 7)), Just(padic(5, 2, 4))]
        .prop_flat_map(|alg| arb_set(alg, 10))) {
        let l = quotient_set(&a, 1, Side::Left, false, &b());
        let r = quotient_set(&a, 1, Side::Right, false, &b());
        match (l, r) {
            (Ok(l), Ok(r)) => prop_assert_eq!(l.set, r.set),
            (Err(e1), Err(e2)) => prop_assert_eq!(e1, e2),
            _ => prop_assert!(false, "sides disagree on admissibility"),
        }
    }
}
