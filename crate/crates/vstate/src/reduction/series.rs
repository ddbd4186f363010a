//! Order-by-order power-series solution of the Lyapunov–Schmidt problem.
//!
//! Writing `φ(λ, t x_a) = Σ φ_{ij} δλ^i t^j` (`j ≥ 1`, `i+j ≥ 2`), the part of
//! `G(λ_{2p}+δλ, t x_a + φ)` of total degree `d` equals `L φ_d` plus terms
//! built from lower orders only. Each `φ_d` is therefore
//! `-L^{-1}(Id-Q)` of the degree-`d` part computed with `φ_d = 0`, and the
//! co-kernel part of the degree-`d` coefficient at `δλ^i t^{j+1}` is the
//! Taylor coefficient `(i, j)` of `F₂ = (1/t) Q G`.

use std::collections::BTreeMap;

use crate::contour::mpoly::{var, MPoly, Mono, Trunc, NSERIES, ONE, VAR_A, VAR_W};
use crate::contour::{g_series, Geometry};
use crate::error::{Error, Result};
use crate::exactnum::Field;
use crate::linearization::{invert_linearization, lambda_2p, project_sqrt2_units, XMap, YMap};

/// Series slot of `δλ = λ - λ_{2p}`.
pub const VAR_DL: usize = 0;
/// Series slot of the kernel amplitude `t`.
pub const VAR_T: usize = 1;

/// How the kernel-mixing parameter enters the computation.
#[derive(Clone, Debug, PartialEq)]
pub enum AParam<K> {
    /// `a` kept as a polynomial variable.
    Symbolic,
    /// `a` fixed to a field element.
    Value(K),
}

/// Polynomial in `a`; index is the power.
pub type APoly<K> = Vec<K>;

#[derive(Clone, Debug)]
pub struct SeriesJet<K> {
    pub p: u32,
    pub order: u32,
    /// Taylor coefficient `(i, j)` of `(Q₁F₂, Q₂F₂)` in units of `√2`.
    pub coeffs: BTreeMap<(u32, u32), [APoly<K>; 2]>,
    /// `φ_{ij}` in two-fold coordinates.
    pub phi: BTreeMap<(u32, u32), XMap<APoly<K>>>,
}

fn apoly_trim<K: Field>(mut v: Vec<K>) -> Vec<K> {
    while v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

/// Split a sine-coefficient polynomial (vars `a`, `w`=frequency) by powers of `a`.
fn split_by_a<K: Field>(g: &[MPoly<K>; 2]) -> BTreeMap<i16, YMap<K>> {
    let mut out: BTreeMap<i16, YMap<K>> = BTreeMap::new();
    for j in 0..2 {
        for (m, c) in g[j].iter() {
            let y = out.entry(m[VAR_A]).or_default();
            y[j].insert(m[VAR_W] as u32, c.clone());
        }
    }
    out
}

/// Kernel direction `t x_a` as engine input.
pub fn kernel_input<K: Field>(p: u32, b: &K, a: &AParam<K>) -> [MPoly<K>; 2] {
    let k2 = -(2 * p as i16 - 1);
    let mut f = [MPoly::zero(), MPoly::zero()];
    let t1 = var(VAR_T, 1);
    let mut t1w = t1;
    t1w[VAR_W] = -1;
    f[0].add_term(t1w, b.clone());
    f[1].add_term(t1w, K::one());
    let mut m2 = t1;
    m2[VAR_W] = k2;
    let (c1, c2) = match a {
        AParam::Symbolic => {
            m2[VAR_A] = 1;
            (b.clone(), K::one().neg())
        }
        AParam::Value(av) => (av.mul(b), av.neg()),
    };
    f[0].add_term(m2, c1);
    f[1].add_term(m2, c2);
    f
}

/// Add `coef * δλ^i t^j a^k w̄^{2n-1}` terms of an `XMap` to the engine input.
fn add_x_terms<K: Field>(f: &mut [MPoly<K>; 2], i: u32, j: u32, ak: i16, x: &XMap<K>) {
    for c in 0..2 {
        for (&n, v) in &x[c] {
            let mut m: Mono = ONE;
            m[VAR_DL] = i as i16;
            m[VAR_T] = j as i16;
            m[VAR_A] = ak;
            m[VAR_W] = -(2 * n as i16 - 1);
            f[c].add_term(m, v.clone());
        }
    }
}

/// Jet of `F₂` through total order `order`, with `φ` through order `order`.
pub fn series_jet<K: Field>(p: u32, order: u32, b: &K, a: &AParam<K>) -> Result<SeriesJet<K>> {
    if order as usize + 1 > 6 || NSERIES < 2 {
        return Err(Error::InvalidArgument(format!(
            "jet order {} exceeds the engine cap",
            order
        )));
    }
    let geo = Geometry::new(b.clone());
    let lam0 = lambda_2p(b);
    let mut f = kernel_input(p, b, a);
    let mut coeffs: BTreeMap<(u32, u32), [APoly<K>; 2]> = BTreeMap::new();
    let mut phi: BTreeMap<(u32, u32), XMap<APoly<K>>> = BTreeMap::new();
    for d in 1..=order + 1 {
        let g = g_series(&geo, &lam0, Some(VAR_DL), &f, &Trunc::series(d as i32))?;
        let mut new_terms: Vec<(u32, u32, i16, XMap<K>)> = Vec::new();
        for i in 0..=d {
            let j = d - i;
            let mut s = [0i16; NSERIES];
            s[VAR_DL] = i as i16;
            s[VAR_T] = j as i16;
            let part = [g[0].series_coeff(&s), g[1].series_coeff(&s)];
            let by_a = split_by_a(&part);
            if j == 0 {
                if !by_a.is_empty() {
                    return Err(Error::InvalidArgument(
                        "G(λ, 0) does not vanish: inconsistent input".into(),
                    ));
                }
                continue;
            }
            let mut s1: APoly<K> = Vec::new();
            let mut s2: APoly<K> = Vec::new();
            let mut phi_ij: XMap<APoly<K>> = Default::default();
            for (ak, y) in &by_a {
                let ak = *ak as usize;
                let odd = y.iter().any(|c| c.keys().any(|n| n % 2 == 1));
                if odd {
                    return Err(Error::InvalidArgument(
                        "odd frequencies in a two-fold expansion".into(),
                    ));
                }
                let (q1, q2, rem) = project_sqrt2_units(y, p);
                if s1.len() <= ak {
                    s1.resize(ak + 1, K::zero());
                    s2.resize(ak + 1, K::zero());
                }
                s1[ak] = q1;
                s2[ak] = q2;
                if d <= order {
                    let h = invert_linearization(&rem, p, b)?;
                    let h: XMap<K> = [
                        h[0].iter().map(|(n, v)| (*n, v.neg())).collect(),
                        h[1].iter().map(|(n, v)| (*n, v.neg())).collect(),
                    ];
                    for c in 0..2 {
                        for (&n, v) in &h[c] {
                            let e = phi_ij[c].entry(n).or_default();
                            if e.len() <= ak {
                                e.resize(ak + 1, K::zero());
                            }
                            e[ak] = v.clone();
                        }
                    }
                    new_terms.push((i, j, ak as i16, h));
                }
            }
            coeffs.insert((i, j - 1), [apoly_trim(s1), apoly_trim(s2)]);
            if d <= order && d >= 2 {
                phi.insert((i, j), phi_ij);
            }
        }
        if d >= 2 {
            for (i, j, ak, h) in &new_terms {
                add_x_terms(&mut f, *i, *j, *ak, h);
            }
        }
    }
    Ok(SeriesJet {
        p,
        order,
        coeffs,
        phi,
    })
}
