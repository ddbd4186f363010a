//! Numerical evaluation of the nonlinear functional `G(λ, f)` for truncated
//! Fourier perturbations: trapezoid quadrature of the Cauchy integrals on an
//! equispaced grid and FFT projection onto sine modes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::b2p_f64;
use crate::linearization::{XMap, YMap};

/// Minimal distance allowed between sampled boundary points.
pub const MIN_SEPARATION: f64 = 1e-8;

/// `f_j(w) = Σ_{n=1}^{N} A_n^j w̄^{2n-1}` around the annulus of radii `1` and `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierState {
    pub p: u32,
    pub b: f64,
    /// `coeffs[j][n-1] = A_n^{j+1}`.
    pub coeffs: [Vec<f64>; 2],
}

impl FourierState {
    /// The annulus itself, at the degenerate radius `b_{2p}`.
    pub fn zero(p: u32, n: usize) -> Self {
        Self::zero_with_b(p, n, b2p_f64(p))
    }

    pub fn zero_with_b(p: u32, n: usize, b: f64) -> Self {
        FourierState {
            p,
            b,
            coeffs: [vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn get(&self, j: usize, n: usize) -> f64 {
        self.coeffs[j - 1].get(n - 1).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, j: usize, n: usize, v: f64) {
        self.coeffs[j - 1][n - 1] = v;
    }

    /// Kernel direction `x_a = (b,1) w̄ + a (b,-1) w̄^{2p-1}`.
    pub fn kernel(p: u32, n: usize, a: f64) -> Self {
        let mut s = Self::zero(p, n);
        let b = s.b;
        s.set(1, 1, b);
        s.set(2, 1, 1.0);
        s.coeffs[0][p as usize - 1] += a * b;
        s.coeffs[1][p as usize - 1] -= a;
        s
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let mut r = self.clone();
        for j in 0..2 {
            for (x, y) in r.coeffs[j].iter_mut().zip(&other.coeffs[j]) {
                *x += s * y;
            }
        }
        r
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut r = self.clone();
        for c in &mut r.coeffs {
            for x in c.iter_mut() {
                *x *= s;
            }
        }
        r
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn from_xmap(p: u32, n: usize, b: f64, x: &XMap<f64>) -> Self {
        let mut s = Self::zero_with_b(p, n, b);
        for j in 0..2 {
            for (&k, &v) in &x[j] {
                if (k as usize) <= n {
                    s.coeffs[j][k as usize - 1] = v;
                }
            }
        }
        s
    }

    pub fn to_xmap(&self) -> XMap<f64> {
        let mut x: XMap<f64> = Default::default();
        for j in 0..2 {
            for (k, &v) in self.coeffs[j].iter().enumerate() {
                if v != 0.0 {
                    x[j].insert(k as u32 + 1, v);
                }
            }
        }
        x
    }

    /// Boundary values and derivatives on the grid `w_k = exp(2πik/M)`.
    pub fn sample(&self, m: usize) -> GridSample {
        let w: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
            .collect();
        let mut phi = [Vec::with_capacity(m), Vec::with_capacity(m)];
        let mut dphi = [Vec::with_capacity(m), Vec::with_capacity(m)];
        let mut pert = [Vec::with_capacity(m), Vec::with_capacity(m)];
        let mut dpert = [Vec::with_capacity(m), Vec::with_capacity(m)];
        for &wk in &w {
            let wbar = wk.conj();
            for j in 0..2 {
                let r = if j == 0 { 1.0 } else { self.b };
                let mut f = Complex64::new(0.0, 0.0);
                let mut df = Complex64::new(0.0, 0.0);
                // w̄^{2n-1} and its derivative -(2n-1) w̄^{2n}.
                let mut pw = wbar;
                for (n0, &a) in self.coeffs[j].iter().enumerate() {
                    if a != 0.0 {
                        f += a * pw;
                        df -= a * (2 * n0 + 1) as f64 * pw * wbar;
                    }
                    pw *= wbar * wbar;
                }
                phi[j].push(r * wk + f);
                dphi[j].push(r + df);
                pert[j].push(f);
                dpert[j].push(df);
            }
        }
        GridSample {
            m,
            radii: [1.0, self.b],
            w,
            phi,
            dphi,
            pert,
            dpert,
        }
    }
}

/// Boundary parametrizations sampled on the equispaced grid.
#[derive(Clone, Debug)]
pub struct GridSample {
    pub m: usize,
    pub radii: [f64; 2],
    pub w: Vec<Complex64>,
    pub phi: [Vec<Complex64>; 2],
    pub dphi: [Vec<Complex64>; 2],
    /// Perturbations `f_j` and `f_j'` alone.
    pub pert: [Vec<Complex64>; 2],
    pub dpert: [Vec<Complex64>; 2],
}

impl GridSample {
    /// Smallest distance between the two curves and between consecutive
    /// points of the same curve.
    pub fn separation(&self) -> f64 {
        let between = self.phi[0]
            .par_iter()
            .map(|z| {
                self.phi[1]
                    .iter()
                    .fold(f64::INFINITY, |m, y| m.min((z - y).norm()))
            })
            .reduce(|| f64::INFINITY, f64::min);
        let mut within = f64::INFINITY;
        for c in &self.phi {
            for k in 0..self.m {
                within = within.min((c[(k + 1) % self.m] - c[k]).norm());
            }
        }
        between.min(within)
    }

    /// Whether every sample of the inner curve lies inside the outer polygon.
    pub fn nested(&self) -> bool {
        let outer = &self.phi[0];
        self.phi[1].par_iter().all(|&z| winding_number(outer, z) != 0)
    }

    pub fn check(&self) -> Result<()> {
        let s = self.separation();
        if !(s > MIN_SEPARATION && s.is_finite()) {
            return Err(Error::CurveDegenerate(s));
        }
        if !self.nested() {
            return Err(Error::CurveDegenerate(0.0));
        }
        Ok(())
    }
}

/// Winding number of a closed polygon around `z` (crossing rule).
fn winding_number(poly: &[Complex64], z: Complex64) -> i32 {
    let mut wn = 0;
    for k in 0..poly.len() {
        let (u, v) = (poly[k] - z, poly[(k + 1) % poly.len()] - z);
        let cross = u.re * v.im - u.im * v.re;
        if u.im <= 0.0 && v.im > 0.0 && cross > 0.0 {
            wn += 1;
        } else if u.im > 0.0 && v.im <= 0.0 && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Integrand value `conj(z-ζ)/(z-ζ) φ'(ξ)` in the limit `ξ → w` on one curve.
pub fn diagonal_fill_in(w: Complex64, dphi: Complex64) -> Complex64 {
    -dphi.conj() * w.conj() * w.conj()
}

/// Trapezoid approximation of `I_source(φ_target(w_k))` on the grid.
pub fn eval_cauchy(sample: &GridSample, source: usize, target: usize) -> Result<Vec<Complex64>> {
    sample.check()?;
    Ok(eval_cauchy_unchecked(sample, source, target))
}

fn eval_cauchy_unchecked(sample: &GridSample, source: usize, target: usize) -> Vec<Complex64> {
    let m = sample.m;
    let zs = &sample.phi[source - 1];
    let dzs = &sample.dphi[source - 1];
    let zt = &sample.phi[target - 1];
    let same = source == target;
    (0..m)
        .into_par_iter()
        .map(|k| {
            let z = zt[k];
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..m {
                // dξ = i ξ dθ turns (1/2πi)∮ into (1/M) Σ g(ξ_l) ξ_l.
                let g = if same && l == k {
                    diagonal_fill_in(sample.w[l], dzs[l])
                } else {
                    let d = z - zs[l];
                    d.conj() / d * dzs[l]
                };
                acc += g * sample.w[l];
            }
            acc / m as f64
        })
        .collect()
}

/// Sine coefficients `B_n` of `e_n = Im(w̄^n)`, `n = 0..M/2` (entry 0 unused).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YCoeffs {
    pub coeffs: [Vec<f64>; 2],
}

impl YCoeffs {
    pub fn get(&self, j: usize, n: usize) -> f64 {
        self.coeffs[j - 1].get(n).copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_odd(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter().enumerate().filter(|(n, _)| n % 2 == 1))
            .fold(0.0, |m, (_, x)| m.max(x.abs()))
    }

    pub fn axpy(&self, s: f64, o: &Self) -> Self {
        let mut r = self.clone();
        for j in 0..2 {
            for (x, y) in r.coeffs[j].iter_mut().zip(&o.coeffs[j]) {
                *x += s * y;
            }
        }
        r
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut r = self.clone();
        for c in &mut r.coeffs {
            for x in c.iter_mut() {
                *x *= s;
            }
        }
        r
    }

    /// Even frequencies `e_{2n}`, `n ≤ blocks`, as a sparse map.
    pub fn to_ymap(&self, blocks: usize) -> YMap<f64> {
        let mut y: YMap<f64> = Default::default();
        for j in 0..2 {
            for n in 1..=blocks {
                let v = self.get(j + 1, 2 * n);
                if v != 0.0 {
                    y[j].insert(2 * n as u32, v);
                }
            }
        }
        y
    }
}

fn sine_coefficients(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    // G = Σ B_n Im(w̄^n) = -Σ B_n sin(nθ) has ĝ_n = i B_n / 2.
    (0..m / 2)
        .map(|n| if n == 0 { 0.0 } else { 2.0 * buf[n].im / m as f64 })
        .collect()
}

/// `I_source(φ_target) - I_source^0(φ_target)` on the grid, where the
/// annulus part `I^0` uses the unperturbed kernel `K₀ = conj(D₀)/D₀`,
/// `D₀ = r_j w - r_k ξ`, against `r_k`.
///
/// With `ρ = Δ/D₀` the kernel splits as `K = K₀ + K₀ (ρ̄ - ρ)/(1 + ρ)`, so
/// every summand is proportional to the perturbation and keeps its relative
/// precision.
pub fn eval_cauchy_remainder(sample: &GridSample, source: usize, target: usize) -> Vec<Complex64> {
    let m = sample.m;
    let (k, j) = (source - 1, target - 1);
    let (rk, rj) = (sample.radii[k], sample.radii[j]);
    let same = source == target;
    (0..m)
        .into_par_iter()
        .map(|i| {
            let w = sample.w[i];
            let fj = sample.pert[j][i];
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..m {
                let xi = sample.w[l];
                let g = if same && l == i {
                    // K φ' - K₀ r in the limit ξ → w.
                    -sample.dpert[k][l].conj() * w.conj() * w.conj()
                } else {
                    let d0 = rj * w - rk * xi;
                    let k0 = d0.conj() / d0;
                    let rho = (fj - sample.pert[k][l]) / d0;
                    let dk = k0 * (rho.conj() - rho) / (1.0 + rho);
                    k0 * sample.dpert[k][l] + dk * sample.dphi[k][l]
                };
                acc += g * xi;
            }
            acc / m as f64
        })
        .collect()
}

/// `G_j = Im{[(1-λ) conj φ_j + I(φ_j)] w φ_j'}` projected onto sine modes.
///
/// The annulus parts of the Cauchy integrals are taken in closed form:
/// `I_1^0(φ_1) - I_2^0(φ_1) = -(1-b²) w̄` and `I_1^0(φ_2) - I_2^0(φ_2) = 0`.
/// What remains is `Im{A_j w f_j' + [(1-λ) conj f_j + δI_j] w φ_j'}` with
/// `A_1 = (b²-λ) w̄`, `A_2 = (1-λ) b w̄`, which vanishes with `f`.
pub fn eval_g(lambda: f64, state: &FourierState, m: usize) -> Result<YCoeffs> {
    if !m.is_power_of_two() || m < 8 * state.n().max(1) {
        return Err(Error::InvalidArgument(format!(
            "grid size {} must be a power of two and at least 8N",
            m
        )));
    }
    let sample = state.sample(m);
    sample.check()?;
    let b = state.b;
    let mut coeffs: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for j in 1..=2 {
        let d1 = eval_cauchy_remainder(&sample, 1, j);
        let d2 = eval_cauchy_remainder(&sample, 2, j);
        let aj = if j == 1 { b * b - lambda } else { (1.0 - lambda) * b };
        let vals: Vec<f64> = (0..m)
            .map(|k| {
                let w = sample.w[k];
                let base = aj * w.conj() * w * sample.dpert[j - 1][k];
                let rest = (1.0 - lambda) * sample.pert[j - 1][k].conj() + d1[k] - d2[k];
                (base + rest * w * sample.dphi[j - 1][k]).im
            })
            .collect();
        coeffs[j - 1] = sine_coefficients(&vals);
    }
    Ok(YCoeffs { coeffs })
}

/// [`eval_g`] assembled directly from the full Cauchy sums [`eval_cauchy`].
pub fn eval_g_direct(lambda: f64, state: &FourierState, m: usize) -> Result<YCoeffs> {
    let sample = state.sample(m);
    sample.check()?;
    let mut coeffs: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for j in 1..=2 {
        let i1 = eval_cauchy_unchecked(&sample, 1, j);
        let i2 = eval_cauchy_unchecked(&sample, 2, j);
        let vals: Vec<f64> = (0..m)
            .map(|k| {
                let left = (1.0 - lambda) * sample.phi[j - 1][k].conj() + i1[k] - i2[k];
                (left * sample.w[k] * sample.dphi[j - 1][k]).im
            })
            .collect();
        coeffs[j - 1] = sine_coefficients(&vals);
    }
    Ok(YCoeffs { coeffs })
}

/// Fourth-order central difference of `G` along `direction` with step `h`.
pub fn jacobian_action(
    lambda: f64,
    state: &FourierState,
    direction: &FourierState,
    m: usize,
    h: f64,
) -> Result<YCoeffs> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::InvalidArgument(format!("step {} outside [1e-7, 1e-3]", h)));
    }
    let g = |s: f64| eval_g(lambda, &state.axpy(s, direction), m);
    let (p1, m1, p2, m2) = (g(h)?, g(-h)?, g(2.0 * h)?, g(-2.0 * h)?);
    let d1 = p1.axpy(-1.0, &m1).scale(8.0);
    let d2 = p2.axpy(-1.0, &m2);
    Ok(d1.axpy(-1.0, &d2).scale(1.0 / (12.0 * h)))
}

/// Boundary points as CSV with header `component,theta,x,y`.
pub fn boundary_csv(state: &FourierState, m: usize) -> String {
    let sample = state.sample(m);
    let mut s = String::from("component,theta,x,y\n");
    for j in 0..2 {
        for k in 0..m {
            let theta = 2.0 * PI * k as f64 / m as f64;
            let z = sample.phi[j][k];
            writeln!(s, "{},{:.16e},{:.16e},{:.16e}", j + 1, theta, z.re, z.im).unwrap();
        }
    }
    s
}

/// Both boundary curves as a standalone SVG document.
pub fn boundary_svg(state: &FourierState, m: usize) -> String {
    let sample = state.sample(m);
    let size = 400.0;
    let scale = size * 0.45;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    );
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (j, color) in [(0, "#1f4e79"), (1, "#a33")] {
        let mut d = String::new();
        for k in 0..=m {
            let z = sample.phi[j][k % m];
            let x = size / 2.0 + scale * z.re;
            let y = size / 2.0 - scale * z.im;
            write!(d, "{}{:.6},{:.6} ", if k == 0 { "M" } else { "L" }, x, y).unwrap();
        }
        writeln!(
            s,
            "<path d=\"{}Z\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            d.trim_end(),
            color
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Action of the multiplier `M_{2n}(λ)` predicted for a unit block direction.
pub fn block_direction(p: u32, n_total: usize, b: f64, block: usize, comp: usize) -> FourierState {
    let mut s = FourierState::zero_with_b(p, n_total, b);
    s.set(comp, block, 1.0);
    s
}

/// Sparse view of a state for diagnostics.
pub fn nonzero_coeffs(state: &FourierState, tol: f64) -> BTreeMap<(usize, usize), f64> {
    let mut m = BTreeMap::new();
    for j in 1..=2 {
        for n in 1..=state.n() {
            let v = state.get(j, n);
            if v.abs() > tol {
                m.insert((j, n), v);
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearization::multiplier;

    #[test]
    fn annulus_is_stationary() {
        for p in 2..=4 {
            let s = FourierState::zero(p, 16);
            for lam in [0.3, (1.0 + s.b * s.b) / 2.0, 0.9] {
                let g = eval_g(lam, &s, 128).unwrap();
                assert!(g.max_abs() < 1e-12, "p={} λ={} {}", p, lam, g.max_abs());
            }
        }
    }

    #[test]
    fn fill_in_matches_numeric_limit() {
        // ξ = w e^{iε} on a perturbed outer curve, ε → 0.
        let mut s = FourierState::zero(2, 4);
        s.set(1, 1, 0.05);
        s.set(1, 2, -0.02);
        let phi = |w: Complex64| {
            let wb = w.conj();
            w + 0.05 * wb - 0.02 * wb * wb * wb
        };
        let dphi = |w: Complex64| {
            let wb = w.conj();
            Complex64::new(1.0, 0.0) - 0.05 * wb * wb + 0.06 * wb.powi(4)
        };
        let w = Complex64::from_polar(1.0, 0.7);
        let expect = diagonal_fill_in(w, dphi(w));
        let mut last = f64::INFINITY;
        for eps in [1e-3, 1e-4, 1e-5] {
            let xi = w * Complex64::from_polar(1.0, eps);
            let d = phi(w) - phi(xi);
            let g = d.conj() / d * dphi(xi);
            let err = (g - expect).norm();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn linear_response_matches_multiplier() {
        let p = 3;
        let n_total = 8;
        let b = b2p_f64(p);
        let lam = 0.4;
        let z = FourierState::zero(p, n_total);
        for block in [1usize, 2, 5] {
            for comp in 1..=2 {
                let d = block_direction(p, n_total, b, block, comp);
                let g = jacobian_action(lam, &z, &d, 128, 1e-3).unwrap();
                let mm = multiplier(2 * block as u32, &lam, &b);
                let col = if comp == 1 { [mm.m[0][0], mm.m[1][0]] } else { [mm.m[0][1], mm.m[1][1]] };
                assert!((g.get(1, 2 * block) - col[0]).abs() < 1e-10);
                assert!((g.get(2, 2 * block) - col[1]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn remainder_form_matches_direct_sums() {
        let mut s = FourierState::kernel(3, 16, 0.3).scale(0.05);
        s.set(1, 2, 0.004);
        s.set(2, 4, -0.002);
        let g1 = eval_g(0.75, &s, 128).unwrap();
        let g2 = eval_g_direct(0.75, &s, 128).unwrap();
        assert!(g1.axpy(-1.0, &g2).max_abs() < 1e-13);
        assert!(g1.max_abs() > 1e-3);
    }

    #[test]
    fn remainder_form_is_relatively_accurate() {
        // G = t·L x + O(t²): the ratio under halving is 2 + O(t) down to tiny t.
        let x = FourierState::kernel(2, 16, 0.0);
        let lam = 0.7;
        let q = |t: f64| eval_g(lam, &x.scale(t), 128).unwrap().get(1, 2);
        for t in [1e-3, 1e-5, 1e-7] {
            let r = q(t) / q(t / 2.0);
            assert!((r - 2.0).abs() < 0.1 * t + 1e-10, "t={} r={}", t, r);
        }
    }

    #[test]
    fn degenerate_curves_rejected() {
        let s = FourierState::zero_with_b(2, 4, 1.0);
        assert!(matches!(eval_g(0.5, &s, 64), Err(Error::CurveDegenerate(_))));
        let mut crossing = FourierState::zero(2, 4);
        crossing.set(2, 1, 0.5);
        assert!(matches!(eval_g(0.5, &crossing, 64), Err(Error::CurveDegenerate(_))));
    }

    #[test]
    fn winding_numbers() {
        let circle: Vec<Complex64> = (0..64)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 64.0))
            .collect();
        assert_eq!(winding_number(&circle, Complex64::new(0.3, -0.2)), 1);
        assert_eq!(winding_number(&circle, Complex64::new(1.3, 0.0)), 0);
    }
}
