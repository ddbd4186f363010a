//! Fourier-multiplier form of `∂_f G` at the annulus, the dispersion
//! relation, kernel/co-kernel bases, projections and the inverse
//! linearization used by the Lyapunov–Schmidt reduction.
//!
//! Frequencies are absolute: `M_n` maps the coefficient pair of `w̄^{n-1}`
//! to the coefficient pair of `e_n = Im(w̄^n)`. In the two-fold space,
//! block `n` pairs `w̄^{2n-1}` with `e_{2n}` through `M_{2n}`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exactnum::Field;

/// Sine coefficients per component: `B_n` of `e_n`.
pub type YMap<K> = [BTreeMap<u32, K>; 2];

/// Two-fold coordinates per component: `A_n` of `w̄^{2n-1}`.
pub type XMap<K> = [BTreeMap<u32, K>; 2];

/// The 2×2 multiplier at absolute frequency `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mult2<K> {
    pub n: u32,
    pub m: [[K; 2]; 2],
}

impl<K: Field> Mult2<K> {
    pub fn det(&self) -> K {
        self.m[0][0]
            .mul(&self.m[1][1])
            .sub(&self.m[0][1].mul(&self.m[1][0]))
    }

    pub fn apply(&self, x: &[K; 2]) -> [K; 2] {
        [
            self.m[0][0].mul(&x[0]).add(&self.m[0][1].mul(&x[1])),
            self.m[1][0].mul(&x[0]).add(&self.m[1][1].mul(&x[1])),
        ]
    }

    /// `M^{-1} y`, `None` when singular.
    pub fn solve(&self, y: &[K; 2]) -> Option<[K; 2]> {
        let d = self.det();
        let di = d.inv()?;
        Some([
            self.m[1][1]
                .mul(&y[0])
                .sub(&self.m[0][1].mul(&y[1]))
                .mul(&di),
            self.m[0][0]
                .mul(&y[1])
                .sub(&self.m[1][0].mul(&y[0]))
                .mul(&di),
        ])
    }
}

/// `M_n(λ) = [[nλ-1-nb², b^{n+1}], [-b^n, b(nλ-n+1)]]`.
pub fn multiplier<K: Field>(n: u32, lambda: &K, b: &K) -> Mult2<K> {
    assert!(n >= 1);
    let nk = K::from_i64(n as i64);
    let nl = nk.mul(lambda);
    let bn = b.pow(n);
    Mult2 {
        n,
        m: [
            [
                nl.sub(&K::one()).sub(&nk.mul(&b.mul(b))),
                bn.mul(b),
            ],
            [bn.neg(), b.mul(&nl.sub(&nk).add(&K::one()))],
        ],
    }
}

/// `λ_{2p} = (1+b²)/2` in any field.
pub fn lambda_2p<K: Field>(b: &K) -> K {
    K::one()
        .add(&b.mul(b))
        .mul(&K::from_i64(2).inv().unwrap())
}

/// `Δ_m(λ,b) = ((1-λ)+b²+m(b²-λ))(m(1-λ)-λ) + b^{2m+2}`, which equals
/// `det M_{m+1}(λ) / b`.
pub fn dispersion<K: Field>(m: u32, lambda: &K, b: &K) -> K {
    let mk = K::from_i64(m as i64);
    let oml = K::one().sub(lambda);
    let b2 = b.mul(b);
    let first = oml.add(&b2).add(&mk.mul(&b2.sub(lambda)));
    let second = mk.mul(&oml).sub(lambda);
    first.mul(&second).add(&b.pow(2 * m + 2))
}

/// Kernel eigenvectors `x¹ = (b,1) w̄` (block 1) and `x² = (b,-1) w̄^{2p-1}` (block p).
pub fn kernel_vectors<K: Field>(b: &K) -> ([K; 2], [K; 2]) {
    ([b.clone(), K::one()], [b.clone(), K::one().neg()])
}

/// `x_a = x¹ + a x²` in two-fold coordinates.
pub fn kernel_xa<K: Field>(p: u32, a: &K, b: &K) -> XMap<K> {
    let mut x: XMap<K> = Default::default();
    x[0].insert(1, b.clone());
    x[1].insert(1, K::one());
    let add = |m: &mut BTreeMap<u32, K>, n: u32, v: K| {
        let cur = m.get(&n).cloned().unwrap_or_else(K::zero);
        let s = cur.add(&v);
        if s.is_zero() {
            m.remove(&n);
        } else {
            m.insert(n, s);
        }
    };
    add(&mut x[0], p, a.mul(b));
    add(&mut x[1], p, a.neg());
    x
}

fn get<K: Field>(m: &BTreeMap<u32, K>, n: u32) -> K {
    m.get(&n).cloned().unwrap_or_else(K::zero)
}

fn put<K: Field>(m: &mut BTreeMap<u32, K>, n: u32, v: K) {
    if v.is_zero() {
        m.remove(&n);
    } else {
        m.insert(n, v);
    }
}

/// Co-kernel coordinates in units of `√2`.
///
/// Returns `(s₁, s₂, remainder)` with `q_i = √2 s_i`, where
/// `q₁ = ⟨B_2,(1,-1)⟩/√2` and `q₂ = -⟨B_{2p},(1,1)⟩/√2` are the coefficients
/// along `y₁ = (1,-1)/√2 e_2` and `y₂ = -(1,1)/√2 e_{2p}`. Keeping the `√2`
/// outside leaves exact results in `Q(b)`.
pub fn project_sqrt2_units<K: Field>(k: &YMap<K>, p: u32) -> (K, K, YMap<K>) {
    let half = K::from_i64(2).inv().unwrap();
    let (u1, v1) = (get(&k[0], 2), get(&k[1], 2));
    let (up, vp) = (get(&k[0], 2 * p), get(&k[1], 2 * p));
    let s1 = u1.sub(&v1).mul(&half);
    let s2 = up.add(&vp).mul(&half).neg();
    let mut rem = k.clone();
    // q₁y₁ = s₁(1,-1)e₂ and q₂y₂ = -s₂(1,1)e_{2p}.
    put(&mut rem[0], 2, u1.sub(&s1));
    put(&mut rem[1], 2, v1.add(&s1));
    put(&mut rem[0], 2 * p, up.add(&s2));
    put(&mut rem[1], 2 * p, vp.add(&s2));
    (s1, s2, rem)
}

/// Numeric projection returning the actual coefficients `(q₁, q₂)`.
pub fn project(k: &YMap<f64>, p: u32) -> (f64, f64, YMap<f64>) {
    let (s1, s2, rem) = project_sqrt2_units(k, p);
    (
        s1 * std::f64::consts::SQRT_2,
        s2 * std::f64::consts::SQRT_2,
        rem,
    )
}

/// The element `Q k = q₁y₁ + q₂y₂` from `√2`-unit coordinates.
pub fn coker_element<K: Field>(s1: &K, s2: &K, p: u32) -> YMap<K> {
    let mut y: YMap<K> = Default::default();
    put(&mut y[0], 2, s1.clone());
    put(&mut y[1], 2, s1.neg());
    put(&mut y[0], 2 * p, s2.neg());
    put(&mut y[1], 2 * p, s2.neg());
    y
}

/// Action of `∂_f G(λ, 0)` on two-fold coordinates.
pub fn apply_linearization<K: Field>(h: &XMap<K>, lambda: &K, b: &K) -> YMap<K> {
    let mut out: YMap<K> = Default::default();
    let blocks: std::collections::BTreeSet<u32> =
        h[0].keys().chain(h[1].keys()).copied().collect();
    for n in blocks {
        let y = multiplier(2 * n, lambda, b).apply(&[get(&h[0], n), get(&h[1], n)]);
        put(&mut out[0], 2 * n, y[0].clone());
        put(&mut out[1], 2 * n, y[1].clone());
    }
    out
}

/// Unique `h` in the complement of the kernel with
/// `(Id-Q) ∂_f G(λ_{2p},0) h = k`, for `k` without co-kernel component.
///
/// Blocks 1 and p are one-dimensional: `β₁(1,1)e₂ ↦ -β₁/b² (1,0)w̄` and
/// `β₂(1,-1)e_{2p} ↦ β₂/b^{2p} (1,0)w̄^{2p-1}`; every other block is
/// inverted through `M_{2n}(λ_{2p})`.
pub fn invert_linearization<K: Field>(k: &YMap<K>, p: u32, b: &K) -> Result<XMap<K>> {
    let lam = lambda_2p(b);
    let half = K::from_i64(2).inv().unwrap();
    let mut out: XMap<K> = Default::default();
    let freqs: std::collections::BTreeSet<u32> =
        k[0].keys().chain(k[1].keys()).copied().collect();
    for e in freqs {
        let (u, v) = (get(&k[0], e), get(&k[1], e));
        if u.is_zero() && v.is_zero() {
            continue;
        }
        if e % 2 == 1 {
            return Err(Error::InvalidArgument(format!(
                "odd frequency e_{} outside the two-fold space",
                e
            )));
        }
        let n = e / 2;
        if n == 1 {
            let beta = u.add(&v).mul(&half);
            let alpha = beta.mul(&b.mul(b).inv().unwrap()).neg();
            put(&mut out[0], 1, alpha);
        } else if n == p {
            let beta = u.sub(&v).mul(&half);
            let alpha = beta.mul(&b.pow(2 * p).inv().unwrap());
            put(&mut out[0], p, alpha);
        } else {
            let m = multiplier(e, &lam, b);
            if K::EXACT && m.det().is_zero() {
                return Err(Error::SingularBlock(n as usize));
            }
            let a = m.solve(&[u, v]).ok_or(Error::SingularBlock(n as usize))?;
            put(&mut out[0], n, a[0].clone());
            put(&mut out[1], n, a[1].clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{b2p_f64, BPoly, BRat, RelElem};

    #[test]
    fn degenerate_block_one() {
        let b = BRat::b();
        let m = multiplier(2, &lambda_2p(&b), &b);
        let mb2 = BRat::bpow(2).neg();
        assert_eq!(m.m[0][0], mb2);
        assert_eq!(m.m[0][1], BRat::bpow(3));
        assert_eq!(m.m[1][0], mb2);
        assert_eq!(m.m[1][1], BRat::bpow(3));
    }

    #[test]
    fn degenerate_block_p() {
        for p in 2..=4u32 {
            let b = RelElem::b(p);
            let m = multiplier(2 * p, &lambda_2p(&b), &b);
            let b2p = b.pow(2 * p);
            assert_eq!(m.m[0][0], b2p);
            assert_eq!(m.m[0][1], b2p.mul(&b));
            assert_eq!(m.m[1][0], b2p.neg());
            assert_eq!(m.m[1][1], b2p.mul(&b).neg());
            assert!(m.det().is_zero());
        }
    }

    #[test]
    fn trivial_multiplier() {
        let m = multiplier(4, &0.0, &0.0);
        assert_eq!(m.m, [[-1.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(0, &1.0, &0.5), 0.0);
        assert_eq!(dispersion(1, &0.0, &0.0), 1.0);
        for p in 2..=4u32 {
            let b = b2p_f64(p);
            let lam = (1.0 + b * b) / 2.0;
            // Δ_m pairs with the multiplier at frequency m+1.
            assert!(dispersion(2 * p - 1, &lam, &b).abs() < 1e-14);
            assert!(dispersion(2 * p, &lam, &b).abs() > 1e-3);
        }
    }

    #[test]
    fn dispersion_is_scaled_determinant() {
        let b = BRat::b();
        for m in 0..12u32 {
            for lam in [BRat::from_int(0), lambda_2p(&b), BRat::from_int(3).mul(&BRat::bpow(-1))] {
                let d = multiplier(m + 1, &lam, &b).det().mul(&BRat::bpow(-1));
                assert_eq!(dispersion(m, &lam, &b), d);
            }
        }
    }

    #[test]
    fn projection_examples() {
        let b = BRat::b();
        let c = BRat::from_poly(BPoly::from_i64s(&[0, 0, 2, 0, 2]));
        let mut k: YMap<BRat> = Default::default();
        k[0].insert(2, c.clone());
        k[1].insert(2, c);
        let (s1, _, _) = project_sqrt2_units(&k, 2);
        assert!(s1.is_zero());
        let mut k: YMap<f64> = Default::default();
        k[0].insert(4, 16.0);
        let (_, q2, _) = project(&k, 2);
        assert!((q2 + 16.0 / 2f64.sqrt()).abs() < 1e-14);
        let y1 = coker_element(&BRat::one(), &BRat::zero(), 3);
        let (s1, s2, rem) = project_sqrt2_units(&y1, 3);
        assert_eq!((s1, s2), (BRat::one(), BRat::zero()));
        assert!(rem.iter().all(|c| c.is_empty()));
        let _ = b;
    }

    #[test]
    fn inverse_examples() {
        let b = BRat::b();
        let mut k: YMap<BRat> = Default::default();
        let c = BRat::bpow(-1).mul_i64(-4);
        k[0].insert(2, c.clone());
        k[1].insert(2, c);
        let h = invert_linearization(&k, 3, &b).unwrap();
        assert_eq!(h[0].get(&1), Some(&BRat::bpow(-3).mul_i64(4)));
        assert!(h[1].is_empty());
        let zero: YMap<BRat> = Default::default();
        assert!(invert_linearization(&zero, 2, &b).unwrap()[0].is_empty());
    }

    #[test]
    fn hat_alpha_block() {
        // -32 (1,0) e_4 pushed through M_4(λ_{2p})^{-1} for general b.
        let b = BRat::b();
        let m = multiplier(4, &lambda_2p(&b), &b);
        let a = m.solve(&[BRat::from_int(-32), BRat::zero()]).unwrap();
        let den = BPoly::from_i64s(&[0, 1])
            .mul(&BPoly::from_i64s(&[-1, 0, 1]).pow(2))
            .mul(&BPoly::from_i64s(&[-1, 0, 2, 0, 1]));
        let a1 = BRat::new(BPoly::from_i64s(&[0, 32, 0, -64]), den.clone());
        let a2 = BRat::new(BPoly::from_i64s(&[0, 0, 0, 0, -32]), den);
        assert_eq!(a[0], a1);
        assert_eq!(a[1], a2);
    }
}
