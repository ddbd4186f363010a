//! Exact residue calculus for the circle integrals behind every derivative
//! of the functional `G`, including the perturbative expansion of the
//! Cauchy operator to arbitrary mixed order.

mod canonical;
pub mod engine;
pub mod mpoly;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use canonical::{canonical_integral, canonical_value, CanonicalForm};
pub use engine::{cauchy_series, g_series, imaginary_part, Geometry};
pub use mpoly::{MPoly, Mono, Trunc, NSERIES, VAR_A, VAR_W};

use crate::error::{Error, Result};
use crate::exactnum::{BRat, Field, Rat};

/// Highest total derivative order handled by the expansion engine.
pub const MAX_ORDER: u32 = 6;

/// Polynomial in the kernel-mixing parameter `a`; `coeffs[k]` multiplies `a^k`.
#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefExpr {
    coeffs: Vec<BRat>,
}

impl CoefExpr {
    pub fn from_coeffs(coeffs: Vec<BRat>) -> Self {
        let mut c = CoefExpr { coeffs };
        while c.coeffs.last().is_some_and(|x| x.is_zero()) {
            c.coeffs.pop();
        }
        c
    }

    pub fn zero() -> Self {
        CoefExpr { coeffs: Vec::new() }
    }

    pub fn constant(x: BRat) -> Self {
        Self::from_coeffs(vec![x])
    }

    /// `x * a^k`.
    pub fn monomial(x: BRat, k: usize) -> Self {
        let mut c = vec![BRat::zero(); k + 1];
        c[k] = x;
        Self::from_coeffs(c)
    }

    pub fn coeffs(&self) -> &[BRat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BRat {
        self.coeffs.get(k).cloned().unwrap_or_else(BRat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|k| self.coeff(k).add(&o.coeff(k))).collect())
    }

    pub fn neg(&self) -> Self {
        CoefExpr {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut c = vec![BRat::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            for (j, y) in o.coeffs.iter().enumerate() {
                c[i + j] = c[i + j].add(&x.mul(y));
            }
        }
        Self::from_coeffs(c)
    }

    pub fn scale(&self, s: &BRat) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c.mul(s)).collect())
    }

    pub fn eval_f64(&self, a: f64, b: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * a + c.eval_f64(b))
    }
}

impl fmt::Debug for CoefExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CoefExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "[{}]", c)?,
                1 => write!(f, "[{}]*a", c)?,
                _ => write!(f, "[{}]*a^{}", c, k)?,
            }
        }
        Ok(())
    }
}

/// Finite Laurent polynomial `Σ c_k w^k` on the unit circle.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<i32, CoefExpr>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `c w^k`.
    pub fn monomial(k: i32, c: CoefExpr) -> Self {
        let mut p = Self::zero();
        p.add_term(k, c);
        p
    }

    pub fn add_term(&mut self, k: i32, c: CoefExpr) {
        let s = self.coeff(k).add(&c);
        if s.is_zero() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, s);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(*k, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&BRat::from_int(-1)))
    }

    pub fn scale(&self, s: &BRat) -> Self {
        let mut r = Self::zero();
        for (k, c) in &self.terms {
            r.add_term(*k, c.scale(s));
        }
        r
    }

    pub fn coeff(&self, k: i32) -> CoefExpr {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> &BTreeMap<i32, CoefExpr> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_json(&self, component: usize) -> Value {
        let coeffs: serde_json::Map<String, Value> = self
            .terms
            .iter()
            .map(|(k, c)| (k.to_string(), serde_json::to_value(c).unwrap()))
            .collect();
        json!({"component": component, "coeffs": coeffs})
    }

    /// Embed into the engine's polynomial ring, tagging every term with `tag`.
    pub fn to_mpoly<K: Field>(&self, tag: &Mono, conv: &impl Fn(&BRat) -> K) -> MPoly<K> {
        let mut r = MPoly::zero();
        for (k, c) in &self.terms {
            for (ak, x) in c.coeffs().iter().enumerate() {
                let mut m = *tag;
                m[VAR_W] += *k as i16;
                m[VAR_A] += ak as i16;
                r.add_term(m, conv(x));
            }
        }
        r
    }

    /// Inverse of [`to_mpoly`](Self::to_mpoly) for polynomials free of series variables.
    pub fn from_mpoly(p: &MPoly<BRat>) -> Self {
        let mut r = Self::zero();
        for (m, c) in p.sorted() {
            debug_assert!(m[..NSERIES].iter().all(|&e| e == 0));
            r.add_term(
                m[VAR_W] as i32,
                CoefExpr::monomial(c, m[VAR_A] as usize),
            );
        }
        r
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}) w^{}", c, k)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Two-component element of `Y`: `B_n` coefficients of `e_n = Im(w̄^n)`.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct YElement {
    pub comps: [BTreeMap<u32, CoefExpr>; 2],
}

impl YElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn coeff(&self, j: usize, n: u32) -> CoefExpr {
        self.comps[j - 1].get(&n).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, j: usize, n: u32, c: CoefExpr) {
        if c.is_zero() {
            self.comps[j - 1].remove(&n);
        } else {
            self.comps[j - 1].insert(n, c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_empty())
    }

    pub fn from_sine(p: &[MPoly<BRat>; 2]) -> Self {
        let mut y = Self::zero();
        for j in 1..=2 {
            for (m, c) in p[j - 1].sorted() {
                let n = m[VAR_W] as u32;
                let cur = y.coeff(j, n);
                y.set(j, n, cur.add(&CoefExpr::monomial(c, m[VAR_A] as usize)));
            }
        }
        y
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (1..=2)
                .map(|j| {
                    let coeffs: serde_json::Map<String, Value> = self.comps[j - 1]
                        .iter()
                        .map(|(n, c)| (n.to_string(), serde_json::to_value(c).unwrap()))
                        .collect();
                    json!({"component": j, "coeffs": coeffs})
                })
                .collect(),
        )
    }
}

/// Perturbation directions `(d₁, d₂)` around the annulus with radii `1` and `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationScheme {
    pub p: u32,
    pub directions: Vec<[LaurentPoly; 2]>,
}

impl PerturbationScheme {
    /// Validates the two-fold support `w^{-(2n-1)}` of every direction.
    pub fn new(p: u32, directions: Vec<[LaurentPoly; 2]>) -> Result<Self> {
        if directions.len() >= NSERIES {
            return Err(Error::InvalidArgument(format!(
                "at most {} directions supported",
                NSERIES - 1
            )));
        }
        for d in &directions {
            for comp in d {
                for k in comp.terms().keys() {
                    if *k > -1 || (-k) % 2 != 1 {
                        return Err(Error::InvalidArgument(format!(
                            "direction exponent {} is not of the form -(2n-1)",
                            k
                        )));
                    }
                }
            }
        }
        Ok(PerturbationScheme { p, directions })
    }

    /// Kernel direction `x_a = (b,1) w̄ + a (b,-1) w̄^{2p-1}` with symbolic `a`.
    pub fn kernel_direction(p: u32) -> [LaurentPoly; 2] {
        let b = BRat::b();
        let one = BRat::one();
        let k2 = -(2 * p as i32 - 1);
        let mut d1 = LaurentPoly::monomial(-1, CoefExpr::constant(b.clone()));
        d1.add_term(k2, CoefExpr::monomial(b, 1));
        let mut d2 = LaurentPoly::monomial(-1, CoefExpr::constant(one.clone()));
        d2.add_term(k2, CoefExpr::monomial(one.neg(), 1));
        [d1, d2]
    }

    /// `x_0 = (b,1) w̄`.
    pub fn kernel_direction_a0() -> [LaurentPoly; 2] {
        [
            LaurentPoly::monomial(-1, CoefExpr::constant(BRat::b())),
            LaurentPoly::monomial(-1, CoefExpr::constant(BRat::one())),
        ]
    }

    fn series_input(&self, first_var: usize) -> [MPoly<BRat>; 2] {
        let mut f = [MPoly::zero(), MPoly::zero()];
        for (l, d) in self.directions.iter().enumerate() {
            let tag = mpoly::var(first_var + l, 1);
            for j in 0..2 {
                f[j].add_assign(&d[j].to_mpoly(&tag, &|x: &BRat| x.clone()));
            }
        }
        f
    }
}

fn check_order(scheme: &PerturbationScheme, multi_order: &[u32], extra: u32) -> Result<u32> {
    if multi_order.len() > scheme.directions.len() {
        return Err(Error::InvalidArgument(
            "multi-index longer than the direction list".into(),
        ));
    }
    let total: u32 = multi_order.iter().sum::<u32>() + extra;
    if total == 0 || total > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "total order {} outside 1..={}",
            total, MAX_ORDER
        )));
    }
    Ok(total)
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

/// Coefficient of the series monomial times the multinomial factorial.
fn extract_derivative(p: &MPoly<BRat>, s: [i16; NSERIES]) -> MPoly<BRat> {
    let f: i64 = s.iter().map(|&e| factorial(e as u32)).product();
    p.series_coeff(&s).scale(&BRat::from_int(f))
}

/// Exact mixed derivative `∂^{multi_order} I_source(φ_target)` at zero.
pub fn expand_cauchy(
    scheme: &PerturbationScheme,
    source: usize,
    target: usize,
    multi_order: &[u32],
) -> Result<LaurentPoly> {
    let total = check_order(scheme, multi_order, 0)?;
    let geo = Geometry::new(BRat::b());
    let f = scheme.series_input(0);
    let out = cauchy_series(&geo, &f, source, target, &Trunc::series(total as i32))?;
    let mut s = [0i16; NSERIES];
    for (l, &k) in multi_order.iter().enumerate() {
        s[l] = k as i16;
    }
    Ok(LaurentPoly::from_mpoly(&extract_derivative(&out, s)))
}

/// `λ_{2p} = (1+b²)/2` as an exact rational function.
pub fn lambda_2p() -> BRat {
    BRat::one().add(&BRat::bpow(2)).mul(&BRat::from_rat(Rat::new(1, 2)))
}

/// Exact `∂_λ^{lambda_order} ∂^{multi_order} G(λ_{2p}, Σ t_l d_l)` at zero.
pub fn derivative_g(
    scheme: &PerturbationScheme,
    lambda_order: u32,
    multi_order: &[u32],
) -> Result<YElement> {
    if lambda_order > 1 {
        return Err(Error::InvalidArgument("lambda_order must be 0 or 1".into()));
    }
    let total = check_order(scheme, multi_order, lambda_order)?;
    let geo = Geometry::new(BRat::b());
    let f = scheme.series_input(1);
    let g = g_series(&geo, &lambda_2p(), Some(0), &f, &Trunc::series(total as i32))?;
    let mut s = [0i16; NSERIES];
    s[0] = lambda_order as i16;
    for (l, &k) in multi_order.iter().enumerate() {
        s[l + 1] = k as i16;
    }
    Ok(YElement::from_sine(&[
        extract_derivative(&g[0], s),
        extract_derivative(&g[1], s),
    ]))
}

/// One summand `coef * ∮ τ^{k1} τ̄^{k2} / D^{k3}` of [`integrate_rational`].
#[derive(Clone, Debug)]
pub struct RationalTerm {
    pub coef: CoefExpr,
    pub k1: u32,
    pub k2: u32,
    pub k3: u32,
    pub form: CanonicalForm,
}

pub fn integrate_rational(terms: &[RationalTerm]) -> CoefExpr {
    terms.iter().fold(CoefExpr::zero(), |acc, t| {
        acc.add(&t.coef.scale(&canonical_integral(t.k1, t.k2, t.k3, t.form)))
    })
}
