use num_complex::Complex64;
use proptest::prelude::*;

use vstate::contour::*;
use vstate::exactnum::{is_zero_mod_relation, BPoly, BRat, Field};

fn bp(c: &[i64]) -> BRat {
    BRat::from_poly(BPoly::from_i64s(c))
}

fn kernel_scheme(p: u32) -> PerturbationScheme {
    PerturbationScheme::new(p, vec![PerturbationScheme::kernel_direction(p)]).unwrap()
}

/// `(1/2πi)∮ τ^{k1} τ^{-k2} / D^{k3} dτ` by the trapezoid rule on `|τ| = r`.
fn quadrature(k1: u32, k2: u32, k3: u32, form: CanonicalForm, b: f64, m: usize) -> f64 {
    let r = match form {
        // Pole at 1 on the unit circle: integrate outside it.
        CanonicalForm::SelfForm => 1.5,
        _ => 1.0,
    };
    let e = k1 as i32 - k2 as i32;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..m {
        let tau = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
        let d = match form {
            CanonicalForm::SelfForm => 1.0 - tau,
            CanonicalForm::OuterAtInner => b - tau,
            CanonicalForm::InnerAtOuter => 1.0 - b * tau,
        };
        acc += tau.powi(e + 1) / d.powi(k3 as i32);
    }
    let v = acc / m as f64;
    assert!(v.im.abs() < 1e-9, "imaginary residue {}", v.im);
    v.re
}

fn form_strategy() -> impl Strategy<Value = CanonicalForm> {
    prop_oneof![
        Just(CanonicalForm::SelfForm),
        Just(CanonicalForm::OuterAtInner),
        Just(CanonicalForm::InnerAtOuter),
    ]
}

#[test]
fn canonical_examples() {
    assert_eq!(canonical_integral(3, 2, 1, CanonicalForm::OuterAtInner), BRat::b().neg());
    assert_eq!(canonical_integral(0, 2, 1, CanonicalForm::SelfForm), BRat::zero());
    assert_eq!(canonical_integral(0, 2, 1, CanonicalForm::InnerAtOuter), BRat::b());
}

#[test]
fn canonical_matches_quadrature_on_a_grid() {
    for form in [CanonicalForm::SelfForm, CanonicalForm::OuterAtInner, CanonicalForm::InnerAtOuter] {
        for b in [0.3, 0.5, 0.7] {
            for k1 in 0..=8 {
                for k2 in 0..=8 {
                    for k3 in 1..=4 {
                        let exact = canonical_integral(k1, k2, k3, form).eval_f64(b);
                        let quad = quadrature(k1, k2, k3, form, b, 4096);
                        assert!(
                            (exact - quad).abs() < 1e-10,
                            "{:?} ({},{},{}) b={}: {} vs {}",
                            form, k1, k2, k3, b, exact, quad
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn mu12_from_canonical_terms() {
    // μ₁₂ = ∮ (1 - bτ)/(b - τ).
    let terms = vec![
        RationalTerm { coef: CoefExpr::constant(BRat::one()), k1: 0, k2: 0, k3: 1, form: CanonicalForm::OuterAtInner },
        RationalTerm { coef: CoefExpr::constant(BRat::b().neg()), k1: 1, k2: 0, k3: 1, form: CanonicalForm::OuterAtInner },
    ];
    assert_eq!(integrate_rational(&terms), CoefExpr::constant(bp(&[-1, 0, 1])));
    assert_eq!(integrate_rational(&[]), CoefExpr::zero());
}

#[test]
fn kappa21_from_canonical_terms() {
    // κ₂₁ = -∮ 3(1-bτ̄)(-a)τ̄⁴/(1-bτ) - ∮ b(1-bτ̄)(ab + aτ̄³)/(1-bτ)².
    let b = BRat::b();
    let a = |c: BRat| CoefExpr::monomial(c, 1);
    let t = |coef, k2, k3| RationalTerm { coef, k1: 0, k2, k3, form: CanonicalForm::InnerAtOuter };
    let terms = vec![
        t(a(BRat::from_i64(3)), 4, 1),
        t(a(BRat::from_i64(-3).mul(&b)), 5, 1),
        t(a(BRat::bpow(2).neg()), 0, 2),
        t(a(BRat::bpow(1).neg()), 3, 2),
        t(a(BRat::bpow(3)), 1, 2),
        t(a(BRat::bpow(2)), 4, 2),
    ];
    assert_eq!(integrate_rational(&terms), a(bp(&[0, 0, 0, 1, 0, 1])));
}

#[test]
fn first_derivative_of_cauchy_difference_p2() {
    let s = kernel_scheme(2);
    let d = expand_cauchy(&s, 1, 1, &[1]).unwrap().sub(&expand_cauchy(&s, 2, 1, &[1]).unwrap());
    // d/dt I(φ₁) = -a(b³+b⁵) w̄⁵.
    let expect = LaurentPoly::monomial(-5, CoefExpr::monomial(bp(&[0, 0, 0, -1, 0, -1]), 1));
    assert_eq!(d, expect);
}

#[test]
fn first_derivative_inner_target_p2() {
    let s = kernel_scheme(2);
    let d = expand_cauchy(&s, 1, 2, &[1]).unwrap().sub(&expand_cauchy(&s, 2, 2, &[1]).unwrap());
    let mut expect = LaurentPoly::monomial(1, CoefExpr::constant(bp(&[-1, 0, 1])));
    expect.add_term(3, CoefExpr::monomial(bp(&[1, 0, 0, 0, 1]), 1));
    assert_eq!(d, expect);
}

#[test]
fn second_derivative_inner_target_p2() {
    // ∂tt I(φ₂) = 2[b - b⁻¹ - 3a²(b⁻¹ + b³)] w̄ + 2a(b⁻¹ - b) w̄³.
    let s = kernel_scheme(2);
    let d = expand_cauchy(&s, 1, 2, &[2]).unwrap().sub(&expand_cauchy(&s, 2, 2, &[2]).unwrap());
    let binv = BRat::bpow(-1);
    let w1 = CoefExpr::from_coeffs(vec![
        BRat::b().sub(&binv).mul_i64(2),
        BRat::zero(),
        binv.add(&BRat::bpow(3)).mul_i64(-6),
    ]);
    let w3 = CoefExpr::monomial(binv.sub(&BRat::b()).mul_i64(2), 1);
    let mut expect = LaurentPoly::monomial(-1, w1);
    expect.add_term(-3, w3);
    assert_eq!(d, expect, "got {:?}", d);
}

#[test]
fn zero_direction_gives_zero() {
    let zero = [LaurentPoly::zero(), LaurentPoly::zero()];
    let s = PerturbationScheme::new(2, vec![zero]).unwrap();
    assert!(expand_cauchy(&s, 1, 2, &[1]).unwrap().is_zero());
    assert!(derivative_g(&s, 0, &[1]).unwrap().is_zero());
}

#[test]
fn non_two_fold_direction_rejected() {
    let d = [LaurentPoly::monomial(-2, CoefExpr::constant(BRat::one())), LaurentPoly::zero()];
    assert!(PerturbationScheme::new(2, vec![d]).is_err());
}

fn assert_zero_mod(x: &BRat, p: u32, what: &str) {
    assert!(is_zero_mod_relation(x, p).unwrap(), "{} = {} is not zero mod the relation", what, x);
}

#[test]
fn second_derivative_of_g_p2() {
    // ∂tt G(λ₄, t x_a) = (2a(b²+b⁴) e₂ + 8a²(b⁴+2b⁶+b⁸) e₈, 2a(b²+b⁴) e₂).
    let y = derivative_g(&kernel_scheme(2), 0, &[2]).unwrap();
    let e2 = bp(&[0, 0, 2, 0, 2]);
    let e8 = bp(&[0, 0, 0, 0, 8, 0, 16, 0, 8]);
    for j in 1..=2 {
        let c = y.coeff(j, 2);
        assert_zero_mod(&c.coeff(0), 2, "a⁰ e₂");
        assert_zero_mod(&c.coeff(1).sub(&e2), 2, "a¹ e₂");
        assert_zero_mod(&c.coeff(2), 2, "a² e₂");
    }
    let c = y.coeff(1, 8);
    assert_zero_mod(&c.coeff(1), 2, "a¹ e₈");
    assert_zero_mod(&c.coeff(2).sub(&e8), 2, "a² e₈");
    for (j, n) in [(1, 4), (1, 6), (2, 4), (2, 6), (2, 8)] {
        for k in 0..=2 {
            assert_zero_mod(&y.coeff(j, n).coeff(k), 2, "other modes");
        }
    }
}

#[test]
fn lambda_derivative_is_diagonal_multiplier() {
    // ∂λ∂f G f = Σ 2n b_j A_n^j e_{2n} with b₁ = 1, b₂ = b.
    for n in 1..=4u32 {
        let k = -(2 * n as i32 - 1);
        let d = [
            LaurentPoly::monomial(k, CoefExpr::constant(BRat::from_i64(3))),
            LaurentPoly::monomial(k, CoefExpr::constant(BRat::from_i64(-5))),
        ];
        let s = PerturbationScheme::new(2, vec![d]).unwrap();
        let y = derivative_g(&s, 1, &[1]).unwrap();
        let m = 2 * n as i64;
        let mut expect = YElement::zero();
        expect.set(1, 2 * n, CoefExpr::constant(BRat::from_i64(3 * m)));
        expect.set(2, 2 * n, CoefExpr::constant(BRat::b().mul_i64(-5 * m)));
        assert_eq!(y, expect, "n = {}", n);
    }
}

#[test]
fn third_derivative_at_a0() {
    // ∂fff G[x₀,x₀,x₀] = -6(b³ - b, b - b⁻¹) e₂.
    for p in [2u32, 3] {
        let s = PerturbationScheme::new(p, vec![PerturbationScheme::kernel_direction_a0()]).unwrap();
        let y = derivative_g(&s, 0, &[3]).unwrap();
        let c1 = bp(&[0, 1, 0, -1]).mul_i64(6);
        let c2 = BRat::bpow(-1).sub(&BRat::b()).mul_i64(6);
        assert_eq!(y.coeff(1, 2), CoefExpr::constant(c1));
        assert_eq!(y.coeff(2, 2), CoefExpr::constant(c2));
        for j in 1..=2 {
            for (n, c) in &y.comps[j - 1] {
                if *n != 2 {
                    assert!(c.is_zero(), "p = {}: unexpected mode e_{}", p, n);
                }
            }
        }
    }
}

#[test]
fn yelement_json_layout() {
    let y = derivative_g(&kernel_scheme(2), 0, &[2]).unwrap();
    let v = y.to_json();
    assert_eq!(v[0]["component"], 1);
    assert!(v[0]["coeffs"].get("2").is_some());
    assert!(v[1]["coeffs"].get("8").is_some() || v[1]["coeffs"].get("2").is_some());
}

fn direction_strategy() -> impl Strategy<Value = [LaurentPoly; 2]> {
    prop::collection::vec(-3i64..=3, 6).prop_map(|c| {
        let mut d = [LaurentPoly::zero(), LaurentPoly::zero()];
        for (i, v) in c.iter().enumerate() {
            let k = -(2 * (i / 2) as i32 + 1);
            d[i % 2].add_term(k, CoefExpr::constant(BRat::from_i64(*v)));
        }
        d
    })
}

fn add_dir(x: &[LaurentPoly; 2], y: &[LaurentPoly; 2]) -> [LaurentPoly; 2] {
    [x[0].add(&y[0]), x[1].add(&y[1])]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn canonical_matches_quadrature(
        k1 in 0u32..=8, k2 in 0u32..=8, k3 in 1u32..=4,
        form in form_strategy(),
        bi in 0usize..3,
    ) {
        let b = [0.3, 0.5, 0.7][bi];
        let exact = canonical_integral(k1, k2, k3, form).eval_f64(b);
        let quad = quadrature(k1, k2, k3, form, b, 4096);
        prop_assert!((exact - quad).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn mixed_partials_are_symmetric(d1 in direction_strategy(), d2 in direction_strategy()) {
        let s12 = PerturbationScheme::new(3, vec![d1.clone(), d2.clone()]).unwrap();
        let s21 = PerturbationScheme::new(3, vec![d2, d1]).unwrap();
        for (src, tgt) in [(1, 2), (2, 1), (1, 1)] {
            prop_assert_eq!(
                expand_cauchy(&s12, src, tgt, &[1, 1]).unwrap(),
                expand_cauchy(&s21, src, tgt, &[1, 1]).unwrap()
            );
        }
        prop_assert_eq!(
            expand_cauchy(&s12, 2, 1, &[2, 1]).unwrap(),
            expand_cauchy(&s21, 2, 1, &[1, 2]).unwrap()
        );
    }

    #[test]
    fn first_order_is_linear(d1 in direction_strategy(), d2 in direction_strategy()) {
        let one = |d: [LaurentPoly; 2], src, tgt| {
            expand_cauchy(&PerturbationScheme::new(3, vec![d]).unwrap(), src, tgt, &[1]).unwrap()
        };
        for (src, tgt) in [(1, 2), (2, 1), (2, 2)] {
            let sum = one(add_dir(&d1, &d2), src, tgt);
            prop_assert_eq!(sum, one(d1.clone(), src, tgt).add(&one(d2.clone(), src, tgt)));
        }
    }

    #[test]
    fn g_derivatives_live_on_even_modes(d1 in direction_strategy(), d2 in direction_strategy()) {
        let s = PerturbationScheme::new(2, vec![d1, d2]).unwrap();
        for (lo, mo) in [(0u32, vec![1u32, 1]), (1, vec![1, 0]), (0, vec![2, 0])] {
            let y = derivative_g(&s, lo, &mo).unwrap();
            for j in 0..2 {
                for n in y.comps[j].keys() {
                    prop_assert!(n % 2 == 0, "odd mode e_{}", n);
                }
            }
        }
    }
}
