//! Truncated perturbative expansion of the Cauchy operator and of `G`.
//!
//! With `ξ = wσ` the Cauchy integral `I_k(φ_j(w))` becomes
//!
//! ```text
//! Σ_m (-1)^m w^{-m} (1/2πi) ∮ D̄ Δ^m φ_k'(wσ) / (b_j - b_k σ)^{m+1} dσ
//! ```
//!
//! where `D̄ = conj φ_j(w) - conj φ_k(wσ)` and `Δ = f_j(w) - f_k(wσ)`. Every
//! σ-monomial then integrates by one of the canonical closed forms.

use rustc_hash::FxHashMap;

use super::canonical::{canonical_value, CanonicalForm};
use super::mpoly::{var, MPoly, Mono, Trunc, NSERIES, VAR_S, VAR_W};
use crate::error::{Error, Result};
use crate::exactnum::Field;

const BPOW_RANGE: i64 = 96;

/// Powers of the inner radius `b` in the coefficient field.
#[derive(Clone, Debug)]
pub struct Geometry<K> {
    pos: Vec<K>,
    neg: Vec<K>,
}

impl<K: Field> Geometry<K> {
    pub fn new(b: K) -> Self {
        let binv = b.inv().expect("b must be invertible");
        let mut pos = vec![K::one()];
        let mut neg = vec![K::one()];
        for k in 1..=BPOW_RANGE as usize {
            pos.push(pos[k - 1].mul(&b));
            neg.push(neg[k - 1].mul(&binv));
        }
        Geometry { pos, neg }
    }

    pub fn b(&self) -> &K {
        &self.pos[1]
    }

    pub fn bpow(&self, k: i64) -> K {
        assert!(k.abs() <= BPOW_RANGE, "power of b out of range");
        if k >= 0 {
            self.pos[k as usize].clone()
        } else {
            self.neg[(-k) as usize].clone()
        }
    }

    /// Radius of boundary component `j` (1 = outer, 2 = inner).
    pub fn radius(&self, j: usize) -> K {
        if j == 1 {
            K::one()
        } else {
            self.b().clone()
        }
    }
}

fn sigma_substitute<K: Field>(f: &MPoly<K>) -> MPoly<K> {
    f.map_monos(|m| {
        let mut k = *m;
        k[VAR_S] += k[VAR_W];
        k
    })
}

/// Complex conjugate on the circle for real coefficients: `w → 1/w`, `σ → 1/σ`.
fn conj_circle<K: Field>(f: &MPoly<K>) -> MPoly<K> {
    f.map_monos(|m| {
        let mut k = *m;
        k[VAR_W] = -k[VAR_W];
        k[VAR_S] = -k[VAR_S];
        k
    })
}

/// `d/dξ` of `f(ξ)` evaluated at `ξ = wσ`, from `f(wσ)`.
fn derivative_at_sigma<K: Field>(fs: &MPoly<K>) -> MPoly<K> {
    let mut r = MPoly::zero();
    for (m, c) in fs.iter() {
        let e = m[VAR_W];
        if e == 0 {
            continue;
        }
        let mut k = *m;
        k[VAR_W] -= 1;
        k[VAR_S] -= 1;
        r.add_term(k, c.mul_i64(e as i64));
    }
    r
}

/// `w f'(w)` for a polynomial in `w`.
fn euler_derivative<K: Field>(f: &MPoly<K>) -> MPoly<K> {
    let mut r = MPoly::zero();
    for (m, c) in f.iter() {
        if m[VAR_W] != 0 {
            r.add_term(*m, c.mul_i64(m[VAR_W] as i64));
        }
    }
    r
}

fn falling(n: i64, r: i64) -> i64 {
    (0..r).map(|i| n - i).product()
}

/// `I_source(φ_target(w))` truncated at the series degree of `trunc`.
///
/// `f[0]`, `f[1]` are the boundary perturbations of the outer and inner
/// component, polynomials in the series variables, `a` and `w`.
pub fn cauchy_series<K: Field>(
    geo: &Geometry<K>,
    f: &[MPoly<K>; 2],
    source: usize,
    target: usize,
    trunc: &Trunc,
) -> Result<MPoly<K>> {
    assert!(matches!(source, 1 | 2) && matches!(target, 1 | 2));
    let bj = geo.radius(target);
    let bk = geo.radius(source);
    let fj = &f[target - 1];
    let fks = sigma_substitute(&f[source - 1]);

    let mut dbar = MPoly::term(var(VAR_W, -1), bj.clone());
    let mut wsig = var(VAR_W, -1);
    wsig[VAR_S] = -1;
    dbar.add_term(wsig, bk.neg());
    dbar.add_assign(&conj_circle(fj));
    dbar = dbar.sub(&conj_circle(&fks));

    let delta = fj.sub(&fks);
    let mut dphi = MPoly::constant(bk.clone());
    dphi.add_assign(&derivative_at_sigma(&fks));
    let base = dbar.mul(&dphi, trunc);

    let (form, self_scale) = match (target, source) {
        (1, 2) => (CanonicalForm::InnerAtOuter, None),
        (2, 1) => (CanonicalForm::OuterAtInner, None),
        _ => (CanonicalForm::SelfForm, Some(target)),
    };

    let mut out = MPoly::zero();
    let mut power = MPoly::constant(K::one());
    for m in 0..=trunc.series {
        let numer = if m == 0 {
            base.clone()
        } else {
            base.mul(&power, trunc)
        };
        let q = (m + 1) as i64;
        let mut scale = if m % 2 == 0 { K::one() } else { K::one().neg() };
        if self_scale == Some(2) {
            scale = scale.mul(&geo.bpow(-q));
        }
        integrate_sigma(geo, &numer, q, form, &scale, m as i16, &mut out)?;
        power = power.mul(&delta, trunc);
        if power.is_empty() {
            break;
        }
    }
    Ok(out)
}

fn integrate_sigma<K: Field>(
    geo: &Geometry<K>,
    numer: &MPoly<K>,
    q: i64,
    form: CanonicalForm,
    scale: &K,
    wshift: i16,
    out: &mut MPoly<K>,
) -> Result<()> {
    let check = form == CanonicalForm::SelfForm && K::EXACT;
    let mut moments: FxHashMap<Mono, Vec<K>> = FxHashMap::default();
    for (m, c) in numer.iter() {
        let e = m[VAR_S] as i64;
        let mut key = *m;
        key[VAR_S] = 0;
        key[VAR_W] -= wshift;
        if check {
            let mom = moments
                .entry(key)
                .or_insert_with(|| vec![K::zero(); q as usize]);
            for (r, slot) in mom.iter_mut().enumerate() {
                let fr = falling(e, r as i64);
                if fr != 0 {
                    slot.add_assign(&c.mul_i64(fr));
                }
            }
        }
        let (coef, pw) = canonical_value(e, q, form);
        if coef == 0 {
            continue;
        }
        let coef = i64::try_from(coef).expect("canonical coefficient overflow");
        out.add_term(key, c.mul(&geo.bpow(pw)).mul_i64(coef).mul(scale));
    }
    if moments.values().any(|v| v.iter().any(|x| !x.is_zero())) {
        return Err(Error::PoleOnCircle);
    }
    Ok(())
}

/// `I(φ_target) = I_1(φ_target) - I_2(φ_target)`.
pub fn cauchy_difference<K: Field>(
    geo: &Geometry<K>,
    f: &[MPoly<K>; 2],
    target: usize,
    trunc: &Trunc,
) -> Result<MPoly<K>> {
    let i1 = cauchy_series(geo, f, 1, target, trunc)?;
    let i2 = cauchy_series(geo, f, 2, target, trunc)?;
    Ok(i1.sub(&i2))
}

/// Sine coefficients of `Im(Σ c_e w^e)`: the returned polynomial stores the
/// coefficient `B_n` of `e_n = Im(w̄^n)` at `w`-exponent `n ≥ 1`.
pub fn imaginary_part<K: Field>(p: &MPoly<K>) -> MPoly<K> {
    let mut r = MPoly::zero();
    for (m, c) in p.iter() {
        let e = m[VAR_W];
        let mut k = *m;
        k[VAR_W] = e.abs();
        if e < 0 {
            r.add_term(k, c.clone());
        } else if e > 0 {
            r.add_term(k, c.neg());
        }
    }
    r
}

/// Both components of `G(λ₀ + δλ, f)` as sine-coefficient series.
///
/// `lambda_var` names the series slot of `δλ`; `None` keeps `λ = λ₀`.
pub fn g_series<K: Field>(
    geo: &Geometry<K>,
    lambda0: &K,
    lambda_var: Option<usize>,
    f: &[MPoly<K>; 2],
    trunc: &Trunc,
) -> Result<[MPoly<K>; 2]> {
    if let Some(v) = lambda_var {
        assert!(v < NSERIES);
    }
    let one_minus = K::one().sub(lambda0);
    let mut out: [MPoly<K>; 2] = [MPoly::zero(), MPoly::zero()];
    for j in 1..=2 {
        let fj = &f[j - 1];
        let bj = geo.radius(j);
        let mut cphi = MPoly::term(var(VAR_W, -1), bj.clone());
        cphi.add_assign(&conj_circle(fj));
        let mut left = cphi.scale(&one_minus);
        if let Some(v) = lambda_var {
            left = left.sub(&cphi.shift(&var(v, 1)).truncate(trunc));
        }
        left.add_assign(&cauchy_difference(geo, f, j, trunc)?);
        let mut right = MPoly::term(var(VAR_W, 1), bj);
        right.add_assign(&euler_derivative(fj));
        out[j - 1] = imaginary_part(&left.mul(&right, trunc));
    }
    Ok(out)
}
