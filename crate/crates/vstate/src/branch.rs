//! Non-degeneracy screening, solution of the reduced system
//! `F₂(λ, t; a) = 0` and tracing of the bifurcating two-fold V-states.
//!
//! Sign convention: the branch with sign `s` has `s·(λ - λ_{2p}) > 0` for
//! `a > 0`; when two such solutions exist (p odd), the one with `t > 0`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::b2p_f64;
use crate::reduction::{
    jet_symbolic, jet_symbolic_a0, ls_solve_newton, ExactJet2, Jet2, LsConfig, LsResult, RangeJacobian, AMode,
};
use crate::spectral::{eval_g, FourierState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            _ => Err(Error::InvalidArgument(format!("sign must be + or -, got {:?}", s))),
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Degeneracy {
    #[serde(rename = "ISOLATED")]
    Isolated,
    #[serde(rename = "DEGENERATE")]
    Degenerate,
}

/// Sign conditions that rule out non-trivial zeros of the quadratic part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub p: u32,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    /// `c₂/a`, absent at `a = 0`.
    pub c2_over_a: Option<f64>,
    /// `b^{-1}(b²-1)² p (2 + p b^{2-2p})`, always positive.
    pub identity_lhs: f64,
    /// `-b^{-1}(b²-1)² p(2p-1) a² - c₂/a + p² b^{2-2p} c₁`, negative for `a ≠ 0`.
    pub identity_rhs: Option<f64>,
    /// `(4b²-3)/(2b⁴-1)` for `p = 2`; `2 + 4p(b²-1) + p²(b²-1)²` for `p ≥ 3`.
    pub auxiliary: f64,
    pub status: Degeneracy,
}

/// `c₁` of the `t t`-Hessian entry.
pub fn hessian_c1(p: u32, a: f64, b: f64) -> f64 {
    let z = b * b - 1.0;
    if p == 2 {
        -2.0 * a * a * b * (b * b + 1.0).powi(2)
    } else {
        -2.0 * a * a * z * z / b * (p as f64 + (p as f64 - 1.0) * b * b)
    }
}

/// `c₂` of the `t t`-Hessian entry.
pub fn hessian_c2(p: u32, a: f64, b: f64) -> f64 {
    let z = b * b - 1.0;
    if p == 2 {
        2.0 * a.powi(3) * z * z * (4.0 * b * b - 3.0) / (b * (2.0 * b.powi(4) - 1.0))
    } else {
        let pf = p as f64;
        4.0 * a.powi(3) * (pf - 1.0).powi(4) * z * z * (2.0 * pf * b.powi(3) + (1.0 - 2.0 * pf) * b)
            / (b * b * (2.0 + 4.0 * pf * z + pf * pf * z * z))
    }
}

pub fn degeneracy_check(p: u32, a: f64) -> Result<DegeneracyReport> {
    if !(2..=6).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {} outside 2..=6", p)));
    }
    let b = b2p_f64(p);
    let pf = p as f64;
    let z2 = (b * b - 1.0).powi(2);
    let c1 = hessian_c1(p, a, b);
    let c2 = hessian_c2(p, a, b);
    let lhs = z2 / b * pf * (2.0 + pf * b.powi(2 - 2 * p as i32));
    let (c2a, rhs) = if a == 0.0 {
        (None, None)
    } else {
        let c2a = c2 / a;
        (
            Some(c2a),
            Some(-z2 / b * pf * (2.0 * pf - 1.0) * a * a - c2a + pf * pf * b.powi(2 - 2 * p as i32) * c1),
        )
    };
    let auxiliary = if p == 2 {
        (4.0 * b * b - 3.0) / (2.0 * b.powi(4) - 1.0)
    } else {
        let z = b * b - 1.0;
        2.0 + 4.0 * pf * z + pf * pf * z * z
    };
    Ok(DegeneracyReport {
        p,
        a,
        b,
        c1,
        c2,
        c2_over_a: c2a,
        identity_lhs: lhs,
        identity_rhs: rhs,
        auxiliary,
        status: if a == 0.0 {
            Degeneracy::Degenerate
        } else {
            Degeneracy::Isolated
        },
    })
}

/// Quadratic parts `H₂`, `J₂` of `(Q₁F₂, Q₂F₂)` as coefficients of
/// `(δλ², δλ t, t²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPair {
    pub a: f64,
    pub h2: [f64; 3],
    pub j2: [f64; 3],
}

pub fn quadratic_pair(p: u32, a: f64) -> Result<QuadraticPair> {
    let j = jet_symbolic(p, 2)?.to_numeric(a);
    let get = |i, k| j.coeff(i, k);
    Ok(QuadraticPair {
        a,
        h2: [get(2, 0)[0], get(1, 1)[0], get(0, 2)[0]],
        j2: [get(2, 0)[1], get(1, 1)[1], get(0, 2)[1]],
    })
}

/// Truncated Taylor model of `F₂`: orders `≤ 2` exact in `a`, orders
/// `3..=p+1` at `a = 0`.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub p: u32,
    pub b: f64,
    low: ExactJet2,
    high: ExactJet2,
}

impl ReducedModel {
    pub fn new(p: u32) -> Result<Self> {
        Ok(ReducedModel {
            p,
            b: b2p_f64(p),
            low: jet_symbolic(p, 2)?,
            high: jet_symbolic_a0(p, (p + 1).min(5))?,
        })
    }

    /// Numeric jet at `a`.
    pub fn jet(&self, a: f64) -> Jet2 {
        let mut j = self.low.to_numeric(a);
        let h = self.high.to_numeric(0.0);
        for (&(i, k), c) in &h.coeffs {
            if i + k >= 3 {
                j.coeffs.insert((i, k), *c);
            }
        }
        j.order = h.order;
        j.a_mode = AMode::Fixed(a);
        j
    }
}

fn newton_2d<F>(mut x: [f64; 2], f: F, tol: f64, max_iter: usize) -> Result<[f64; 2]>
where
    F: Fn([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]),
{
    for _ in 0..max_iter {
        let (r, j) = f(x);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !det.is_finite() || det == 0.0 {
            return Err(Error::NewtonDiverged);
        }
        let dx = [
            (j[1][1] * r[0] - j[0][1] * r[1]) / det,
            (j[0][0] * r[1] - j[1][0] * r[0]) / det,
        ];
        x = [x[0] - dx[0], x[1] - dx[1]];
        let scale = x[0].abs().max(x[1].abs()).max(1e-300);
        if !x[0].is_finite() || !x[1].is_finite() {
            return Err(Error::NewtonDiverged);
        }
        if dx[0].abs().max(dx[1].abs()) <= tol * scale {
            return Ok(x);
        }
    }
    Err(Error::NewtonDiverged)
}

/// `t(λ)` on `Q₁F₂(λ, t; a) = 0` near `t = ±2λ̂/(b²-1)`, by 1-D Newton on the jet.
///
/// `sign` selects the `±` of the seed; `λ̂ = 0` gives `t = 0`.
pub fn solve_t_of_lambda(jet: &Jet2, lambda_hat: f64, sign: Sign) -> Result<f64> {
    if lambda_hat == 0.0 {
        return Ok(0.0);
    }
    let b = b2p_f64(jet.p);
    let mut t = sign.value() * 2.0 * lambda_hat / (b * b - 1.0);
    for _ in 0..60 {
        let r = jet.eval(lambda_hat, t)[0];
        let d = jet.eval_jacobian(lambda_hat, t)[0][1];
        if d == 0.0 || !d.is_finite() {
            return Err(Error::NewtonDiverged);
        }
        let dt = r / d;
        t -= dt;
        if !t.is_finite() {
            return Err(Error::NewtonDiverged);
        }
        if dt.abs() <= 1e-15 * t.abs().max(1e-300) {
            return Ok(t);
        }
    }
    Err(Error::NewtonDiverged)
}

/// Leading-order `λ̂(a)` of the branch with the given sign.
///
/// For even `p` the law is odd in `a` and the sign of `λ̂/a` is `sign`; for
/// odd `p` (where `a > 0`) the sign of `λ̂` is `sign`.
pub fn asymptotic_lambda(p: u32, a: f64, sign: Sign) -> f64 {
    let b = b2p_f64(p);
    let s = sign.value();
    let w = 1.0 - b * b;
    match p {
        2 => s * a * w * (b.powi(-3) + 1.0 / b),
        3 => s * 0.5 * a.abs().sqrt() * w * (3.0 / b.powi(6) + 2.0 / (b * b)).sqrt(),
        4 => s * (a * (4.0 / b.powi(7) + 2.0 / b) * w.powi(3) / (8.0 * b * b)).cbrt(),
        _ if p % 2 == 0 => s * a.signum() * a.abs().powf(1.0 / (p as f64 - 1.0)),
        _ => s * a.abs().powf(1.0 / (p as f64 - 1.0)),
    }
}

/// Exponent of the leading-order law `|λ̂| ∝ |a|^e`.
pub fn asymptotic_exponent(p: u32) -> f64 {
    1.0 / (p as f64 - 1.0)
}

/// Non-trivial zero of the truncated model near the asymptotic seed.
pub fn model_seed(model: &ReducedModel, a: f64, sign: Sign) -> Result<(f64, f64)> {
    let jet = model.jet(a);
    let l0 = asymptotic_lambda(model.p, a, sign);
    let t0 = 2.0 * l0.abs() / (1.0 - model.b * model.b) * if a < 0.0 && model.p % 2 == 0 { -1.0 } else { 1.0 };
    let x = newton_2d([l0, t0], |x| (jet.eval(x[0], x[1]), jet.eval_jacobian(x[0], x[1])), 1e-14, 100)?;
    if x[0].abs() < 1e-3 * l0.abs() {
        return Err(Error::NewtonDiverged);
    }
    Ok((x[0], x[1]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub ls: LsConfig,
    pub tol_reduced: f64,
    pub tol_full: f64,
    pub max_newton: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            ls: LsConfig::default(),
            tol_reduced: 1e-11,
            tol_full: 1e-9,
            max_newton: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub a: f64,
    pub lambda: f64,
    pub t: f64,
    pub phi: FourierState,
    pub reduced_residual: f64,
    pub full_residual: f64,
}

impl BranchSample {
    /// Angular velocity `Ω = (1 - λ)/2`.
    pub fn omega(&self) -> f64 {
        (1.0 - self.lambda) / 2.0
    }

    /// Boundary perturbation `t x_a + φ`.
    pub fn state(&self) -> FourierState {
        let x = FourierState::kernel(self.phi.p, self.phi.n(), self.a);
        self.phi.axpy(self.t, &x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchCurve {
    pub p: u32,
    pub sign: Sign,
    pub samples: Vec<BranchSample>,
    pub fitted_exponent: f64,
    pub fitted_prefactor: f64,
    pub r_squared: f64,
}

struct Corrected {
    lambda: f64,
    t: f64,
    ls: LsResult,
    reduced: f64,
}

/// `F₂` and the LS solution at `(λ, t)`, warm-started from `start`.
fn f2_at(
    lambda: f64,
    t: f64,
    a: f64,
    p: u32,
    cfg: &LsConfig,
    start: Option<&FourierState>,
    jac: &mut Option<RangeJacobian>,
) -> Result<([f64; 2], LsResult)> {
    let r = ls_solve_newton(lambda, t, a, p, cfg, start, jac)?;
    Ok(([r.coker[0] / t, r.coker[1] / t], r))
}

/// Corrector iterations allowed without a new smallest residual.
const STALL_ITERATIONS: usize = 6;

/// Smallest bisected step, relative to `|a|`, before a trace gives up.
pub const MIN_RELATIVE_STEP: f64 = 1e-3;

/// 2-D Newton on `(Q₁F₂, Q₂F₂)(λ, t; a) = 0` with a finite-difference Jacobian.
///
/// Works in the blown-up variables `(λ̂, τ = t/λ̂)` on `F₂/λ̂²`, which removes
/// the trivial zero at the origin.
fn correct(
    p: u32,
    a: f64,
    seed: (f64, f64),
    start: Option<&FourierState>,
    cfg: &TraceConfig,
    jac: &mut Option<RangeJacobian>,
) -> Result<Corrected> {
    let lam0 = (1.0 + b2p_f64(p).powi(2)) / 2.0;
    let (mut lh, mut tau) = (seed.0, seed.1 / seed.0);
    let mut warm = start.cloned();
    let mut scaled = |lh: f64, tau: f64, warm: Option<&FourierState>| -> Result<([f64; 2], LsResult)> {
        let (f, ls) = f2_at(lam0 + lh, tau * lh, a, p, &cfg.ls, warm, jac)?;
        Ok(([f[0] / (lh * lh), f[1] / (lh * lh)], ls))
    };
    let mut best = (f64::INFINITY, 0);
    for it in 0..cfg.max_newton {
        let (g, ls) = scaled(lh, tau, warm.as_ref())?;
        let hl = 1e-5 * lh.abs();
        let ht = 1e-5 * tau.abs().max(1e-3);
        let (gl, _) = scaled(lh + hl, tau, Some(&ls.phi))?;
        let (gt, _) = scaled(lh, tau + ht, Some(&ls.phi))?;
        let j = [
            [(gl[0] - g[0]) / hl, (gt[0] - g[0]) / ht],
            [(gl[1] - g[1]) / hl, (gt[1] - g[1]) / ht],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NewtonDiverged);
        }
        let dl = (j[1][1] * g[0] - j[0][1] * g[1]) / det;
        let dtau = (j[0][0] * g[1] - j[1][0] * g[0]) / det;
        let res = lh * lh * g[0].abs().max(g[1].abs());
        if res < best.0 {
            best = (res, it);
        } else if it >= best.1 + STALL_ITERATIONS {
            return Err(Error::NewtonDiverged);
        }
        if dl.abs() <= 1e-7 * lh.abs() && dtau.abs() <= 1e-7 * tau.abs() && res <= cfg.tol_reduced {
            return Ok(Corrected {
                lambda: lam0 + lh,
                t: tau * lh,
                ls,
                reduced: res,
            });
        }
        // Keep λ̂ away from the blown-up origin.
        let frac = (0.5 * lh.abs() / dl.abs()).min(0.5 * tau.abs().max(1e-3) / dtau.abs()).min(1.0);
        lh -= frac * dl;
        tau -= frac * dtau;
        warm = Some(ls.phi);
    }
    Err(Error::NewtonDiverged)
}

/// `‖G(λ, t x_a + φ)‖_∞` over all sine modes on a grid of `m` points.
pub fn full_residual(lambda: f64, state: &FourierState, m: usize) -> Result<f64> {
    Ok(eval_g(lambda, state, m)?.max_abs())
}

fn sample_grid(a_min: f64, a_max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![a_min];
    }
    let geometric = a_min > 0.0 && a_max > 0.0 || a_min < 0.0 && a_max < 0.0;
    (0..steps)
        .map(|k| {
            let s = k as f64 / (steps - 1) as f64;
            if k == 0 {
                a_min
            } else if k == steps - 1 {
                a_max
            } else if geometric {
                a_min.signum() * (a_min.abs().ln() + s * (a_max.abs().ln() - a_min.abs().ln())).exp()
            } else {
                a_min + s * (a_max - a_min)
            }
        })
        .collect()
}

/// Largest relative gap between predicted and corrected `λ̂` in a continuation step.
pub const MAX_PREDICTOR_MISS: f64 = 0.1;

/// Solve the reduced system at one `a` and certify the full residual.
pub fn solve_at(
    p: u32,
    a: f64,
    sign: Sign,
    model: &ReducedModel,
    prev: Option<&BranchSample>,
    cfg: &TraceConfig,
    jac: &mut Option<RangeJacobian>,
) -> Result<BranchSample> {
    let lam0 = (1.0 + model.b * model.b) / 2.0;
    let e = asymptotic_exponent(p);
    let (seed, warm) = match prev {
        Some(s) if s.a != 0.0 && s.a.signum() == a.signum() => {
            let r = (a / s.a).abs();
            let rl = r.powf(e);
            // λ̂ and t share the leading power law.
            (((s.lambda - lam0) * rl, s.t * rl), Some(s.phi.scale(rl * rl)))
        }
        _ => (model_seed(model, a, sign)?, None),
    };
    let c = correct(p, a, seed, warm.as_ref(), cfg, jac)?;
    if sign.value() * (c.lambda - lam0) * a.signum() <= 0.0 {
        return Err(Error::BranchLost(a));
    }
    // A continuation step that lands far from its predictor has jumped sheets.
    if prev.is_some() && (c.lambda - lam0 - seed.0).abs() > MAX_PREDICTOR_MISS * seed.0.abs() {
        return Err(Error::BranchLost(a));
    }
    let state = c.ls.state();
    let grid = 2 * cfg.ls.m;
    let sample = state.sample(grid);
    sample.check()?;
    let full = full_residual(c.lambda, &state, grid)?;
    if full > cfg.tol_full {
        return Err(Error::NoConvergence {
            iterations: c.ls.iterations,
            residual: full,
        });
    }
    Ok(BranchSample {
        a,
        lambda: c.lambda,
        t: c.t,
        phi: c.ls.phi,
        reduced_residual: c.reduced,
        full_residual: full,
    })
}

/// Accepted samples of a trace and where it stopped, if it did.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOutcome {
    pub curve: BranchCurve,
    /// `a` at which the branch was lost; `None` if the whole range was covered.
    pub lost_at: Option<f64>,
}

fn check_trace_args(p: u32, a_min: f64, a_max: f64, steps: usize) -> Result<()> {
    if !(2..=6).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {} outside 2..=6", p)));
    }
    if steps == 0 || !(a_min < a_max) || a_max.abs().max(a_min.abs()) > 0.2 {
        return Err(Error::InvalidArgument(format!(
            "need a_min < a_max with |a| ≤ 0.2 and steps ≥ 1 (got {}, {}, {})",
            a_min, a_max, steps
        )));
    }
    if a_min <= 0.0 && a_max >= 0.0 {
        return Err(Error::InvalidArgument("a-range must not contain 0".into()));
    }
    if p % 2 == 1 && a_min < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "p = {} admits real branches only for a > 0",
            p
        )));
    }
    Ok(())
}

/// First sample at `a`, continued from smaller `|a|` when the model seed at
/// `a` itself is too far from the branch.
fn first_sample(
    p: u32,
    a: f64,
    sign: Sign,
    model: &ReducedModel,
    cfg: &TraceConfig,
    jac: &mut Option<RangeJacobian>,
) -> Result<BranchSample> {
    let direct = solve_at(p, a, sign, model, None, cfg, jac);
    if direct.is_ok() {
        return direct;
    }
    for decades in 1..=3 {
        let a0 = a * 10f64.powi(-decades);
        *jac = None;
        let Ok(mut prev) = solve_at(p, a0, sign, model, None, cfg, jac) else {
            continue;
        };
        let steps = 8 * decades as usize;
        let mut ok = true;
        for k in 1..=steps {
            let ak = a0 * 10f64.powf(decades as f64 * k as f64 / steps as f64);
            let ak = if k == steps { a } else { ak };
            match solve_at(p, ak, sign, model, Some(&prev), cfg, jac) {
                Ok(s) => prev = s,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(prev);
        }
    }
    direct
}

/// Trace the branch with the given sign over `a ∈ [a_min, a_max]`, keeping
/// the accepted samples if the branch is lost part way.
///
/// Targets run outward from `a = 0`; a failed step is bisected, and three
/// consecutive failures end the trace.
pub fn trace_branch_partial(
    p: u32,
    a_min: f64,
    a_max: f64,
    steps: usize,
    sign: Sign,
    cfg: &TraceConfig,
) -> Result<TraceOutcome> {
    check_trace_args(p, a_min, a_max, steps)?;
    let model = ReducedModel::new(p)?;
    let mut targets = sample_grid(a_min, a_max, steps);
    if a_max < 0.0 {
        targets.reverse();
    }
    let mut samples: Vec<BranchSample> = Vec::new();
    let mut queue: std::collections::VecDeque<f64> = targets.into();
    let mut failures = 0;
    let mut jac = None;
    let mut lost_at = None;
    while let Some(a) = queue.pop_front() {
        let res = match samples.last() {
            None => first_sample(p, a, sign, &model, cfg, &mut jac),
            prev => solve_at(p, a, sign, &model, prev, cfg, &mut jac),
        };
        match res {
            Ok(s) => {
                failures = 0;
                samples.push(s);
            }
            Err(_) => {
                failures += 1;
                let Some(prev) = samples.last() else {
                    lost_at = Some(a);
                    break;
                };
                if failures >= 3 || (a - prev.a).abs() < MIN_RELATIVE_STEP * a.abs() {
                    lost_at = Some(a);
                    break;
                }
                queue.push_front(a);
                queue.push_front((prev.a + a) / 2.0);
            }
        }
    }
    samples.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let (e, c, r2) = fit_samples(&samples, model.b).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    Ok(TraceOutcome {
        curve: BranchCurve {
            p,
            sign,
            samples,
            fitted_exponent: e,
            fitted_prefactor: c,
            r_squared: r2,
        },
        lost_at,
    })
}

/// Trace the branch with the given sign over `a ∈ [a_min, a_max]`.
pub fn trace_branch(
    p: u32,
    a_min: f64,
    a_max: f64,
    steps: usize,
    sign: Sign,
    cfg: &TraceConfig,
) -> Result<BranchCurve> {
    let out = trace_branch_partial(p, a_min, a_max, steps, sign, cfg)?;
    match out.lost_at {
        Some(a) => Err(Error::BranchLost(a)),
        None => Ok(out.curve),
    }
}

/// Least squares of `log|λ̂|` against `log|a|`: `(exponent, prefactor, r²)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 5 {
        return Err(Error::InsufficientSamples(points.len()));
    }
    let xs: Vec<f64> = points.iter().map(|(a, _)| a.abs().ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, l)| l.abs().ln()).collect();
    let span = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < 10f64.ln() - 1e-9 {
        return Err(Error::InsufficientSamples(points.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, icpt.exp(), r2))
}

fn fit_samples(samples: &[BranchSample], b: f64) -> Result<(f64, f64, f64)> {
    let lam0 = (1.0 + b * b) / 2.0;
    let mut pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.a, s.lambda - lam0)).collect();
    pts.sort_by(|x, y| x.0.abs().partial_cmp(&y.0.abs()).unwrap());
    // Smallest decade, closed by the first sample at or beyond it.
    let Some(first) = pts.first().map(|x| x.0.abs()) else {
        return Err(Error::InsufficientSamples(0));
    };
    let end = pts
        .iter()
        .position(|x| x.0.abs() >= 10.0 * first * (1.0 - 1e-9))
        .map_or(pts.len(), |k| k + 1);
    fit_power_law(&pts[..end])
}

/// Fit over the smallest decade of `a` in the curve.
pub fn scaling_fit(curve: &BranchCurve) -> Result<(f64, f64, f64)> {
    fit_samples(&curve.samples, b2p_f64(curve.p))
}

/// Fourier support of a sample by component, for diagnostics.
pub fn support(sample: &BranchSample, tol: f64) -> BTreeMap<(usize, usize), f64> {
    crate::spectral::nonzero_coeffs(&sample.state(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_fit() {
        let pts: Vec<(f64, f64)> = (0..8).map(|k| {
            let a = 1e-4 * 10f64.powf(k as f64 / 7.0);
            (a, 3.0 * a)
        }).collect();
        let (e, c, r2) = fit_power_law(&pts).unwrap();
        assert!((e - 1.0).abs() < 1e-12 && (c - 3.0).abs() < 1e-10 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_needs_a_decade() {
        let pts: Vec<(f64, f64)> = (0..8).map(|k| (1.0 + k as f64 * 0.1, 1.0)).collect();
        assert!(matches!(fit_power_law(&pts), Err(Error::InsufficientSamples(_))));
        assert!(matches!(fit_power_law(&pts[..3]), Err(Error::InsufficientSamples(3))));
    }

    #[test]
    fn degeneracy_signs() {
        for p in 2..=6 {
            let r = degeneracy_check(p, 0.05).unwrap();
            assert_eq!(r.status, Degeneracy::Isolated);
            assert!(r.c1 < 0.0);
            assert!(r.c2_over_a.unwrap() > 0.0);
            assert!(r.identity_lhs > 0.0 && r.identity_rhs.unwrap() < 0.0);
            if p >= 3 {
                assert!(r.auxiliary < 0.0);
            }
        }
        let r = degeneracy_check(2, 0.1).unwrap();
        assert!((r.auxiliary - (3.0 + 8.0 * 2f64.sqrt()) / 7.0).abs() < 1e-12);
        assert_eq!(degeneracy_check(3, 0.0).unwrap().status, Degeneracy::Degenerate);
    }

    #[test]
    fn t_of_lambda_zero() {
        let m = ReducedModel::new(2).unwrap();
        assert_eq!(solve_t_of_lambda(&m.jet(0.0), 0.0, Sign::Plus).unwrap(), 0.0);
    }

    #[test]
    fn t_of_lambda_slope() {
        let m = ReducedModel::new(2).unwrap();
        let j = m.jet(0.0);
        let b = m.b;
        let t = solve_t_of_lambda(&j, 1e-3, Sign::Plus).unwrap();
        assert!((t / (-2e-3 / (1.0 - b * b)) - 1.0).abs() < 1e-2);
        assert!(j.eval(1e-3, t)[0].abs() < 1e-12);
    }
}
