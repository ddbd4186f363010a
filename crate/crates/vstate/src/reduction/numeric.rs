//! Numerical Lyapunov–Schmidt reduction on truncated Fourier states.
//!
//! The correction `φ` lives in the complement of the kernel: both components
//! in blocks `n ∉ {1, p}` and only the outer component in blocks `1` and `p`.
//! Equations are the even sine modes `e_2, …, e_{2N}` with the co-kernel
//! directions removed.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::b2p_f64;
use crate::linearization::{multiplier, Mult2};
use crate::spectral::{eval_g, FourierState, YCoeffs};

use super::jet::{AMode, Jet2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsConfig {
    /// Number of two-fold Fourier blocks.
    pub n: usize,
    /// Quadrature grid size.
    pub m: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LsConfig {
    fn default() -> Self {
        LsConfig {
            n: 32,
            m: 256,
            tol: 1e-13,
            max_iter: 100,
        }
    }
}

impl LsConfig {
    /// `N` blocks on a grid of `max(8N, 256)` points; the cross-curve
    /// quadrature error decays like `b^M`.
    pub fn with_n(n: usize) -> Self {
        LsConfig {
            n,
            m: (8 * n).next_power_of_two().max(256),
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsResult {
    pub lambda: f64,
    pub t: f64,
    pub a: f64,
    /// Correction `φ`, without the kernel part `t x_a`.
    pub phi: FourierState,
    /// `‖(Id-Q)G‖_∞` over the modes `e_2, …, e_{2N}`.
    pub residual: f64,
    pub iterations: usize,
    /// Co-kernel coordinates `(q₁, q₂)` of `G` at the solution.
    pub coker: [f64; 2],
}

impl LsResult {
    /// The full perturbation `t x_a + φ`.
    pub fn state(&self) -> FourierState {
        let x = FourierState::kernel(self.phi.p, self.phi.n(), self.a);
        self.phi.axpy(self.t, &x)
    }
}

fn block_pair(y: &YCoeffs, n: usize) -> (f64, f64) {
    (y.get(1, 2 * n), y.get(2, 2 * n))
}

/// Co-kernel coordinates `q₁ = (u₂ - v₂)/√2`, `q₂ = -(u_{2p} + v_{2p})/√2`.
pub fn coker_coords(y: &YCoeffs, p: u32) -> [f64; 2] {
    let (u1, v1) = block_pair(y, 1);
    let (up, vp) = block_pair(y, p as usize);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [(u1 - v1) * r, -(up + vp) * r]
}

/// `(Id-Q)` part of the modes `e_2, …, e_{2N}` as block pairs.
fn range_part(y: &YCoeffs, p: u32, n_blocks: usize) -> Vec<(f64, f64)> {
    (1..=n_blocks)
        .map(|n| {
            let (u, v) = block_pair(y, n);
            if n == 1 || n == p as usize {
                // Remove (1,-1) on block 1 and (1,1) on block p.
                let keep = if n == 1 { (u + v) / 2.0 } else { (u - v) / 2.0 };
                if n == 1 {
                    (keep, keep)
                } else {
                    (keep, -keep)
                }
            } else {
                (u, v)
            }
        })
        .collect()
}

fn sup(r: &[(f64, f64)]) -> f64 {
    r.iter().fold(0.0, |m, (u, v)| m.max(u.abs()).max(v.abs()))
}

/// Inverse of `(Id-Q) ∂_f G(λ, 0)` on the kernel complement.
struct Preconditioner {
    p: u32,
    blocks: Vec<Mult2<f64>>,
}

impl Preconditioner {
    fn new(lambda: f64, b: f64, p: u32, n_blocks: usize) -> Self {
        Preconditioner {
            p,
            blocks: (1..=n_blocks)
                .map(|n| multiplier(2 * n as u32, &lambda, &b))
                .collect(),
        }
    }

    fn apply(&self, r: &[(f64, f64)], out: &mut FourierState) -> Result<()> {
        for (k, &(u, v)) in r.iter().enumerate() {
            let n = k + 1;
            let m = &self.blocks[k];
            if n == 1 {
                // M(α,0) projected on (1,1)/2: α (m00+m10)/2 = u.
                let d = (m.m[0][0] + m.m[1][0]) / 2.0;
                out.set(1, n, u / d);
                out.set(2, n, 0.0);
            } else if n == self.p as usize {
                let d = (m.m[0][0] - m.m[1][0]) / 2.0;
                out.set(1, n, u / d);
                out.set(2, n, 0.0);
            } else {
                let x = m.solve(&[u, v]).ok_or(Error::SingularBlock(n))?;
                out.set(1, n, x[0]);
                out.set(2, n, x[1]);
            }
        }
        Ok(())
    }
}

/// Solve `(Id-Q) G(λ, t x_a + φ) = 0` for `φ` in the kernel complement.
pub fn ls_solve(lambda: f64, t: f64, a: f64, p: u32, cfg: &LsConfig) -> Result<LsResult> {
    ls_solve_from(lambda, t, a, p, cfg, None)
}

/// As [`ls_solve`], starting from a previous correction.
pub fn ls_solve_from(
    lambda: f64,
    t: f64,
    a: f64,
    p: u32,
    cfg: &LsConfig,
    start: Option<&FourierState>,
) -> Result<LsResult> {
    if cfg.n < p as usize {
        return Err(Error::InvalidArgument(format!(
            "N = {} is smaller than p = {}",
            cfg.n, p
        )));
    }
    let b = b2p_f64(p);
    let kernel = FourierState::kernel(p, cfg.n, a).scale(t);
    let mut phi = match start {
        Some(s) if s.n() == cfg.n => s.clone(),
        _ => FourierState::zero(p, cfg.n),
    };
    let pre = Preconditioner::new(lambda, b, p, cfg.n);
    let mut step = FourierState::zero(p, cfg.n);
    let mut last = f64::INFINITY;
    for it in 0..=cfg.max_iter {
        let g = eval_g(lambda, &phi.axpy(1.0, &kernel), cfg.m)?;
        let r = range_part(&g, p, cfg.n);
        let res = sup(&r);
        if !res.is_finite() || res > 1e3 * last.max(1e-3) {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: res,
            });
        }
        // Stop at the tolerance or once roundoff stalls the iteration.
        if res <= cfg.tol || (it > 2 && res <= 10.0 * cfg.tol && res > 0.5 * last) {
            return Ok(LsResult {
                lambda,
                t,
                a,
                phi,
                residual: res,
                iterations: it,
                coker: coker_coords(&g, p),
            });
        }
        if it == cfg.max_iter {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: res,
            });
        }
        pre.apply(&r, &mut step)?;
        phi = phi.axpy(-1.0, &step);
        last = res;
    }
    unreachable!()
}

/// Unknowns of the range equations: `α` on blocks `1` and `p`, both
/// components elsewhere.
fn pack_phi(phi: &FourierState, p: u32) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * phi.n());
    for n in 1..=phi.n() {
        v.push(phi.get(1, n));
        if n != 1 && n != p as usize {
            v.push(phi.get(2, n));
        }
    }
    v
}

fn unpack_phi(v: &[f64], p: u32, n_blocks: usize) -> FourierState {
    let mut phi = FourierState::zero(p, n_blocks);
    let mut it = v.iter();
    for n in 1..=n_blocks {
        phi.set(1, n, *it.next().unwrap());
        if n != 1 && n != p as usize {
            phi.set(2, n, *it.next().unwrap());
        }
    }
    phi
}

/// Range equations in the same layout as [`pack_phi`].
fn pack_range(r: &[(f64, f64)], p: u32) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * r.len());
    for (k, &(u, w)) in r.iter().enumerate() {
        v.push(u);
        if k + 1 != 1 && k + 1 != p as usize {
            v.push(w);
        }
    }
    v
}

/// LU factorization of the finite-difference Jacobian of the range
/// equations with respect to `φ`, reused across solves as a chord.
#[derive(Clone, Debug)]
pub struct RangeJacobian {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl RangeJacobian {
    fn build(lambda: f64, kernel: &FourierState, phi: &FourierState, p: u32, cfg: &LsConfig) -> Result<Self> {
        let x0 = pack_phi(phi, p);
        let dim = x0.len();
        let eval = |x: &[f64]| -> Result<Vec<f64>> {
            let f = unpack_phi(x, p, cfg.n).axpy(1.0, kernel);
            let g = eval_g(lambda, &f, cfg.m)?;
            Ok(pack_range(&range_part(&g, p, cfg.n), p))
        };
        let h = 1e-6;
        let cols: Vec<Vec<f64>> = (0..dim)
            .into_par_iter()
            .map(|k| {
                let mut xp = x0.clone();
                let mut xm = x0.clone();
                xp[k] += h;
                xm[k] -= h;
                let (fp, fm) = (eval(&xp)?, eval(&xm)?);
                Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
            })
            .collect::<Result<_>>()?;
        let j = nalgebra::DMatrix::from_fn(dim, dim, |r, c| cols[c][r]);
        let lu = j.lu();
        if !lu.is_invertible() {
            return Err(Error::NewtonDiverged);
        }
        Ok(RangeJacobian { lu })
    }

    fn solve(&self, r: &[f64]) -> Result<Vec<f64>> {
        let v = nalgebra::DVector::from_column_slice(r);
        self.lu
            .solve(&v)
            .map(|x| x.iter().copied().collect())
            .ok_or(Error::NewtonDiverged)
    }
}

/// [`ls_solve_from`] with chord-Newton steps on the range equations.
///
/// `jac` holds the factorized Jacobian between calls; it is rebuilt at the
/// current iterate whenever the chord iteration stops contracting. Suited to
/// amplitudes where the annulus multipliers no longer precondition well.
pub fn ls_solve_newton(
    lambda: f64,
    t: f64,
    a: f64,
    p: u32,
    cfg: &LsConfig,
    start: Option<&FourierState>,
    jac: &mut Option<RangeJacobian>,
) -> Result<LsResult> {
    if cfg.n < p as usize {
        return Err(Error::InvalidArgument(format!(
            "N = {} is smaller than p = {}",
            cfg.n, p
        )));
    }
    let kernel = FourierState::kernel(p, cfg.n, a).scale(t);
    let mut phi = match start {
        Some(s) if s.n() == cfg.n => s.clone(),
        _ => FourierState::zero(p, cfg.n),
    };
    let mut last = f64::INFINITY;
    let mut fresh = false;
    for it in 0..=cfg.max_iter {
        let g = eval_g(lambda, &phi.axpy(1.0, &kernel), cfg.m)?;
        let r = range_part(&g, p, cfg.n);
        let res = sup(&r);
        if !res.is_finite() {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: res,
            });
        }
        if res <= cfg.tol || (it > 2 && res <= 10.0 * cfg.tol && res > 0.5 * last) {
            return Ok(LsResult {
                lambda,
                t,
                a,
                phi,
                residual: res,
                iterations: it,
                coker: coker_coords(&g, p),
            });
        }
        if it == cfg.max_iter {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: res,
            });
        }
        if jac.is_some() && res > 0.25 * last && fresh && res >= last {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: res,
            });
        }
        fresh = jac.is_none() || res > 0.25 * last;
        if fresh {
            *jac = Some(RangeJacobian::build(lambda, &kernel, &phi, p, cfg)?);
        }
        let step = jac.as_ref().unwrap().solve(&pack_range(&r, p))?;
        let x: Vec<f64> = pack_phi(&phi, p).iter().zip(&step).map(|(x, d)| x - d).collect();
        phi = unpack_phi(&x, p, cfg.n);
        last = res;
    }
    unreachable!()
}

/// `F₂(λ, 0; a) = Q ∂_f G(λ, 0)(x_a + ∂_gφ(λ, 0) x_a)` from the multipliers.
///
/// The correction `∂_gφ x_a = (α, 0)` in blocks 1 and p removes the range part
/// of `∂_f G(λ, 0) x_a`, which is nonzero away from `λ_{2p}`.
pub fn f2_closed_form_t0(lambda: f64, a: f64, p: u32) -> [f64; 2] {
    let b = b2p_f64(p);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let m1 = multiplier(2, &lambda, &b);
    // (u+v) of M(b+α, 1) vanishes.
    let alpha1 = -(m1.m[0][0] * b + m1.m[0][1] + m1.m[1][0] * b + m1.m[1][1])
        / (m1.m[0][0] + m1.m[1][0]);
    let y1 = m1.apply(&[b + alpha1, 1.0]);
    let mp = multiplier(2 * p, &lambda, &b);
    // (u-v) of M(a b+α, -a) vanishes.
    let alphap = -(mp.m[0][0] * a * b - mp.m[0][1] * a - mp.m[1][0] * a * b + mp.m[1][1] * a)
        / (mp.m[0][0] - mp.m[1][0]);
    let yp = mp.apply(&[a * b + alphap, -a]);
    [(y1[0] - y1[1]) * r, -(yp[0] + yp[1]) * r]
}

/// `F₂(λ, t; a) = (1/t) Q G(λ, t x_a + φ)`, with the closed form at `t = 0`.
pub fn f2_eval(lambda: f64, t: f64, a: f64, p: u32, cfg: &LsConfig) -> Result<[f64; 2]> {
    if t == 0.0 {
        return Ok(f2_closed_form_t0(lambda, a, p));
    }
    let r = ls_solve(lambda, t, a, p, cfg)?;
    Ok([r.coker[0] / t, r.coker[1] / t])
}

/// Finite-difference step settings for [`jet_numeric`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    /// Step in `δλ`; `None` uses a tenth of [`lambda_radius`].
    pub h_lambda: Option<f64>,
    /// Step in `t`.
    pub h_t: f64,
    /// Combine steps `h`, `h/2` and `h/4` to cancel the two leading truncation terms.
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            h_lambda: None,
            h_t: 2e-2,
            richardson: true,
        }
    }
}

/// Distance from `λ_{2p}` to the nearest complex `λ` where the restricted
/// linearization `(Id-Q) ∂_f G(λ, 0)` on the kernel complement is singular.
pub fn lambda_radius(p: u32, n_blocks: usize) -> f64 {
    let b = b2p_f64(p);
    let lam0 = (1.0 + b * b) / 2.0;
    // Blocks 1 and p: the one-dimensional restrictions are linear in λ.
    let mut r = ((1.0 + 3.0 * b * b) / 2.0 - lam0).abs();
    let pf = p as f64;
    r = r.min(((1.0 + 2.0 * pf * b * b - b.powi(2 * p as i32)) / (2.0 * pf) - lam0).abs());
    for n in 2..=n_blocks.max(p as usize + 1) {
        if n == p as usize {
            continue;
        }
        // det M_m(λ) = b (mλ + c1)(mλ + c2) + b^{2m+1}.
        let m = 2.0 * n as f64;
        let c1 = -1.0 - m * b * b;
        let c2 = 1.0 - m;
        let qa = b * m * m;
        let qb = b * m * (c1 + c2);
        let qc = b * c1 * c2 + b.powi(4 * n as i32 + 1);
        let disc = qb * qb - 4.0 * qa * qc;
        let d = if disc >= 0.0 {
            let s = disc.sqrt();
            let r1 = (-qb + s) / (2.0 * qa);
            let r2 = (-qb - s) / (2.0 * qa);
            (r1 - lam0).abs().min((r2 - lam0).abs())
        } else {
            let re = -qb / (2.0 * qa) - lam0;
            let im = (-disc).sqrt() / (2.0 * qa);
            re.hypot(im)
        };
        r = r.min(d);
    }
    r
}

/// Taylor coefficients through total order `order` from a 7×7 tensor stencil
/// with steps `hl` in `δλ` and `ht` in `t`.
fn stencil_coeffs(
    vals: &BTreeMap<(i32, i32), [f64; 2]>,
    hl: f64,
    ht: f64,
    order: u32,
) -> BTreeMap<(u32, u32), [f64; 2]> {
    let w = taylor_weights();
    let mut out = BTreeMap::new();
    for i in 0..=order {
        for j in 0..=order - i {
            let mut c = [0.0; 2];
            for (ki, wi) in w[i as usize].iter().enumerate() {
                for (kj, wj) in w[j as usize].iter().enumerate() {
                    if *wi == 0.0 || *wj == 0.0 {
                        continue;
                    }
                    let v = vals[&(ki as i32 - 3, kj as i32 - 3)];
                    c[0] += wi * wj * v[0];
                    c[1] += wi * wj * v[1];
                }
            }
            let s = hl.powi(i as i32) * ht.powi(j as i32);
            out.insert((i, j), [c[0] / s, c[1] / s]);
        }
    }
    out
}

/// `taylor_weights()[k][l]`: weight of node `l-3` in the `k`-th Taylor
/// coefficient of the degree-6 interpolant on nodes `-3..=3` (unit spacing).
fn taylor_weights() -> [[f64; 7]; 4] {
    [
        [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        [1.0 / 180.0, -3.0 / 40.0, 3.0 / 4.0, -49.0 / 36.0, 3.0 / 4.0, -3.0 / 40.0, 1.0 / 180.0],
        [1.0 / 48.0, -1.0 / 6.0, 13.0 / 48.0, 0.0, -13.0 / 48.0, 1.0 / 6.0, -1.0 / 48.0],
    ]
}

/// Leading truncation power of a symmetric 7-point stencil for the `k`-th coefficient.
fn truncation_power(k: u32) -> i32 {
    if k % 2 == 1 {
        7 - k as i32
    } else {
        8 - k as i32
    }
}

fn stencil_values(
    p: u32,
    a: f64,
    hl: f64,
    ht: f64,
    cfg: &LsConfig,
) -> Result<BTreeMap<(i32, i32), [f64; 2]>> {
    let lam0 = (1.0 + b2p_f64(p).powi(2)) / 2.0;
    let nodes: Vec<(i32, i32)> = (-3..=3)
        .flat_map(|i| (-3..=3).map(move |j| (i, j)))
        .collect();
    let vals: Result<Vec<_>> = nodes
        .par_iter()
        .map(|&(i, j)| {
            f2_eval(lam0 + i as f64 * hl, j as f64 * ht, a, p, cfg).map(|v| ((i, j), v))
        })
        .collect();
    Ok(vals?.into_iter().collect())
}

/// Jet of `F₂` at `(λ_{2p}, 0)` by finite differences of [`f2_eval`].
pub fn jet_numeric(p: u32, a: f64, order: u32, cfg: &LsConfig, fd: &FdConfig) -> Result<Jet2> {
    if order > 3 {
        return Err(Error::InvalidArgument(format!(
            "numeric jet order {} exceeds 3",
            order
        )));
    }
    let hl = fd.h_lambda.unwrap_or_else(|| lambda_radius(p, cfg.n) / 10.0);
    let ht = fd.h_t;
    let levels: Vec<BTreeMap<(u32, u32), [f64; 2]>> = [1.0, 2.0, 4.0]
        .iter()
        .take(if fd.richardson { 3 } else { 1 })
        .map(|d| {
            stencil_values(p, a, hl / d, ht / d, cfg).map(|v| stencil_coeffs(&v, hl / d, ht / d, order))
        })
        .collect::<Result<_>>()?;
    let mut coeffs = BTreeMap::new();
    let mut errors = BTreeMap::new();
    for &(i, j) in levels[0].keys() {
        let (v, e) = if fd.richardson {
            // Symmetric stencils: error terms h^q, h^{q+2}, ...
            let q = truncation_power(i).min(truncation_power(j));
            let r = |lo: [f64; 2], hi: [f64; 2], q: i32| {
                let f = 2f64.powi(q);
                [(f * hi[0] - lo[0]) / (f - 1.0), (f * hi[1] - lo[1]) / (f - 1.0)]
            };
            let (c0, c1, c2) = (levels[0][&(i, j)], levels[1][&(i, j)], levels[2][&(i, j)]);
            let r01 = r(c0, c1, q);
            let r12 = r(c1, c2, q);
            let v = r(r01, r12, q + 2);
            (v, [(v[0] - r12[0]).abs(), (v[1] - r12[1]).abs()])
        } else {
            (levels[0][&(i, j)], [f64::NAN; 2])
        };
        coeffs.insert((i, j), v);
        errors.insert((i, j), e);
    }
    Ok(Jet2 {
        p,
        order,
        a_mode: AMode::Fixed(a),
        coeffs,
        errors: Some(errors),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reproduce_monomials() {
        let w = taylor_weights();
        for deg in 0..=6 {
            for (k, row) in w.iter().enumerate() {
                let s: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(l, c)| c * ((l as f64) - 3.0).powi(deg))
                    .sum();
                let expect = if deg == k as i32 { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "k={} deg={} s={}", k, deg, s);
            }
        }
    }

    #[test]
    fn zero_amplitude_is_trivial() {
        let r = ls_solve(0.6, 0.0, 0.1, 2, &LsConfig::with_n(16)).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.phi.max_abs() == 0.0);
        assert!(r.residual < 1e-13);
    }

    #[test]
    fn closed_form_vanishes_at_degenerate_value() {
        for p in 2..=4 {
            let b = b2p_f64(p);
            let f = f2_closed_form_t0((1.0 + b * b) / 2.0, 0.3, p);
            assert!(f[0].abs() < 1e-14 && f[1].abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_small_t() {
        let p = 2;
        let cfg = LsConfig::with_n(16);
        let lam = 0.7;
        let exact = f2_closed_form_t0(lam, 0.05, p);
        let f1 = f2_eval(lam, 1e-4, 0.05, p, &cfg).unwrap();
        let f2 = f2_eval(lam, -1e-4, 0.05, p, &cfg).unwrap();
        for k in 0..2 {
            assert!(((f1[k] + f2[k]) / 2.0 - exact[k]).abs() < 1e-8);
        }
    }
}
