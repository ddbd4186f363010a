use proptest::prelude::*;

use vstate::error::Error;
use vstate::exactnum::*;

fn bp(c: &[i64]) -> BPoly {
    BPoly::from_i64s(c)
}

fn br(c: &[i64]) -> BRat {
    BRat::from_poly(bp(c))
}

#[test]
fn reduction_examples() {
    assert_eq!(bpoly_reduce(&bp(&[0, 0, 0, 0, 1]), 2), bp(&[1, 0, -2]));
    assert_eq!(bpoly_reduce(&bp(&[0, 0, 0, 1]), 2), bp(&[0, 0, 0, 1]));
    assert_eq!(bpoly_reduce(&bp(&[0, 0, 0, 0, 0, 0, 0, 0, 1]), 3), bp(&[0, 0, 2, 0, -3]));
}

#[test]
fn roots() {
    let r2 = find_b2p(2, 128);
    let b = r2.midpoint();
    // b² - (√2 - 1) = ((b²+1)² - 2)/(b²+1+√2): the relation bounds it.
    assert!(r2.midpoint_residual().abs() < Rat::dyadic(1.into(), 120));
    assert!((r2.to_f64() - 0.6435942529055826).abs() < 1e-15);
    assert!(r2.interval.width() <= Rat::dyadic(1.into(), 128));
    assert!(r2.interval.contains(&b));
    for p in [3u32, 4] {
        let r = find_b2p(p, 160);
        assert!(r.midpoint_residual().abs() < Rat::dyadic(1.into(), 150));
        let v = r.to_f64();
        let rel = v.powi(2 * p as i32) + p as f64 * v * v - (p - 1) as f64;
        assert!(v > 0.0 && v < 1.0 && rel.abs() < 1e-15, "p = {}: {}", p, v);
    }
}

#[test]
fn p2_ratio_is_three_plus_eight_root_two_over_seven() {
    let x = br(&[-3, 0, 4]).div(&br(&[-1, 0, 0, 0, 2]));
    let enc = eval_brat(&x, &find_b2p(2, 128), 100).unwrap();
    let target = (3.0 + 8.0 * 2f64.sqrt()) / 7.0;
    assert!((enc.to_f64() - target).abs() < 1e-15);
    // √2 = b² + 1 at b₄, so (3 + 8√2)/7 = (11 + 8b²)/7.
    let closed = br(&[11, 0, 8]).scale(&Rat::new(1, 7));
    assert!(is_zero_mod_relation(&x.sub(&closed), 2).unwrap());
}

#[test]
fn enclosure_examples() {
    let b = BRat::b();
    assert_eq!(b.div(&b), BRat::one());
    let x = BRat::one().div(&br(&[-1, 0, 1]));
    let enc = eval_brat(&x, &find_b2p(3, 64), 64).unwrap();
    assert!(enc.hi.is_negative());
    let bf = b2p_f64(3);
    assert!((enc.to_f64() - 1.0 / (bf * bf - 1.0)).abs() < 1e-14);
}

#[test]
fn zero_test_examples() {
    assert!(is_zero_mod_relation(&br(&[-1, 0, 2, 0, 1]), 2).unwrap());
    assert!(!is_zero_mod_relation(&br(&[-1, 0, 1]), 2).unwrap());
    // p b² - p + 1 = -b^{2p}.
    assert!(is_zero_mod_relation(&br(&[-2, 0, 3, 0, 0, 0, 1]), 3).unwrap());
    let bad = BRat::one().div(&br(&[-1, 0, 2, 0, 1]));
    assert_eq!(is_zero_mod_relation(&bad, 2), Err(Error::DenominatorVanishes));
}

fn poly_strategy(max_deg: usize) -> impl Strategy<Value = BPoly> {
    prop::collection::vec(-20i64..=20, 1..=max_deg + 1).prop_map(|c| BPoly::from_i64s(&c))
}

fn relem_strategy(p: u32) -> impl Strategy<Value = RelElem> {
    poly_strategy(2 * p as usize - 1).prop_map(move |q| RelElem::from_bpoly(&q, p))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn bpoly_ring_laws(x in poly_strategy(6), y in poly_strategy(6), z in poly_strategy(6)) {
        prop_assert_eq!(x.add(&y).mul(&z), x.mul(&z).add(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.sub(&x), BPoly::zero());
    }

    #[test]
    fn divrem_reconstructs(x in poly_strategy(10), d in poly_strategy(4)) {
        prop_assume!(!d.is_zero());
        let (q, r) = x.divrem(&d);
        prop_assert_eq!(q.mul(&d).add(&r), x);
        prop_assert!(r.is_zero() || r.degree() < d.degree());
    }

    #[test]
    fn reduction_is_a_ring_map(x in poly_strategy(12), y in poly_strategy(12), p in 2u32..=4) {
        let rx = bpoly_reduce(&x, p);
        prop_assert!(rx.is_zero() || rx.degree().unwrap() < 2 * p as usize);
        prop_assert_eq!(bpoly_reduce(&rx, p), rx.clone());
        let lhs = bpoly_reduce(&x.mul(&y), p);
        let rhs = bpoly_reduce(&rx.mul(&bpoly_reduce(&y, p)), p);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn quotient_field_inverse(x in relem_strategy(3)) {
        prop_assume!(!x.is_zero());
        let inv = x.inv().unwrap();
        prop_assert_eq!(x.mul(&inv), RelElem::one());
    }

    #[test]
    fn relem_agrees_with_reduced_polynomials(x in poly_strategy(8), y in poly_strategy(8)) {
        let p = 4;
        let lhs = RelElem::from_bpoly(&x, p).mul(&RelElem::from_bpoly(&y, p));
        prop_assert_eq!(lhs.to_bpoly(), bpoly_reduce(&x.mul(&y), p));
    }

    #[test]
    fn enclosure_contains_double_value(x in poly_strategy(6), d in poly_strategy(3), p in 2u32..=4) {
        prop_assume!(!bpoly_reduce(&d, p).is_zero());
        let v = BRat::new(x, d);
        let bf = b2p_f64(p);
        let fv = v.eval_f64(bf);
        prop_assume!(fv.is_finite() && fv.abs() < 1e6);
        let enc = eval_brat(&v, &find_b2p(p, 64), 80).unwrap();
        prop_assert!((enc.to_f64() - fv).abs() <= 1e-9 * fv.abs().max(1.0));
        prop_assert!(enc.width() <= Rat::dyadic(1.into(), 76));
    }

    #[test]
    fn brat_field_laws(x in poly_strategy(4), y in poly_strategy(4), d in poly_strategy(2)) {
        prop_assume!(!d.is_zero() && !y.is_zero());
        let a = BRat::new(x, d);
        let c = BRat::from_poly(y);
        prop_assert_eq!(a.mul(&c).div(&c), a.clone());
        prop_assert_eq!(a.add(&c).sub(&c), a.clone());
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<BRat>(&json).unwrap(), a);
    }

    #[test]
    fn refinement_nests(p in 2u32..=6, bits in 16u64..200) {
        let r = find_b2p(p, bits);
        let f = r.refine(bits + 17);
        prop_assert!(f.interval.lo >= r.interval.lo && f.interval.hi <= r.interval.hi);
        prop_assert!(!r.relation.eval(&r.interval.lo).is_positive());
        prop_assert!(!r.relation.eval(&r.interval.hi).is_negative());
    }
}
