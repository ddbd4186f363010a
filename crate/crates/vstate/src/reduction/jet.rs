//! Taylor jets of `F₂` at `(λ_{2p}, 0)` and derivatives of the correction `φ`.
//!
//! Jets store Taylor coefficients: entry `(i, j)` is the coefficient of
//! `δλ^i t^j`, i.e. `∂_λ^i ∂_t^j F₂ / (i! j!)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{b2p_f64, Field, RelElem};
use crate::linearization::XMap;

use super::series::{series_jet, AParam, APoly};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AMode {
    /// Evaluated at a fixed numeric `a`.
    Fixed(f64),
    /// Polynomial in `a`.
    Symbolic,
    /// `a = 0`.
    Zero,
}

/// Numeric jet: `coeffs[(i, j)] = (Q₁F₂, Q₂F₂)` Taylor coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub p: u32,
    pub order: u32,
    pub a_mode: AMode,
    pub coeffs: BTreeMap<(u32, u32), [f64; 2]>,
    /// Absolute error estimate per coefficient, when finite differences were used.
    pub errors: Option<BTreeMap<(u32, u32), [f64; 2]>>,
}

impl Jet2 {
    pub fn coeff(&self, i: u32, j: u32) -> [f64; 2] {
        self.coeffs.get(&(i, j)).copied().unwrap_or([0.0; 2])
    }

    /// `∂_λ^i ∂_t^j F₂` (Taylor coefficient times `i! j!`).
    pub fn derivative(&self, i: u32, j: u32) -> [f64; 2] {
        let f = (factorial(i) * factorial(j)) as f64;
        let c = self.coeff(i, j);
        [c[0] * f, c[1] * f]
    }

    /// The truncated Taylor polynomial at `(δλ, t)`.
    pub fn eval(&self, dl: f64, t: f64) -> [f64; 2] {
        let mut r = [0.0; 2];
        for (&(i, j), c) in &self.coeffs {
            let m = dl.powi(i as i32) * t.powi(j as i32);
            r[0] += c[0] * m;
            r[1] += c[1] * m;
        }
        r
    }

    /// Jacobian of [`Jet2::eval`] with respect to `(δλ, t)`.
    pub fn eval_jacobian(&self, dl: f64, t: f64) -> [[f64; 2]; 2] {
        let mut r = [[0.0; 2]; 2];
        for (&(i, j), c) in &self.coeffs {
            let dli = if i > 0 { i as f64 * dl.powi(i as i32 - 1) * t.powi(j as i32) } else { 0.0 };
            let dtj = if j > 0 { j as f64 * dl.powi(i as i32) * t.powi(j as i32 - 1) } else { 0.0 };
            for k in 0..2 {
                r[k][0] += c[k] * dli;
                r[k][1] += c[k] * dtj;
            }
        }
        r
    }
}

pub(crate) fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// Exact jet with coefficients in `Q(b_{2p})`, as polynomials in `a`, in
/// units of `√2`: the actual coefficient is `√2 · Σ_k c_k a^k`.
#[derive(Clone, Debug)]
pub struct ExactJet2 {
    pub p: u32,
    pub order: u32,
    pub a_mode: AMode,
    pub coeffs: BTreeMap<(u32, u32), [APoly<RelElem>; 2]>,
}

fn apoly_eval(c: &APoly<RelElem>, a: f64, b: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, x| acc * a + x.eval_f64(b))
}

impl ExactJet2 {
    /// Coefficient `(i, j)` of component `comp` (1 or 2) as an `a`-polynomial in `√2` units.
    pub fn coeff(&self, i: u32, j: u32, comp: usize) -> APoly<RelElem> {
        self.coeffs
            .get(&(i, j))
            .map(|c| c[comp - 1].clone())
            .unwrap_or_default()
    }

    /// `∂_λ^i ∂_t^j` of component `comp` in `√2` units, as an `a`-polynomial.
    pub fn derivative(&self, i: u32, j: u32, comp: usize) -> APoly<RelElem> {
        let f = RelElem::from_i64((factorial(i) * factorial(j)) as i64);
        self.coeff(i, j, comp).iter().map(|x| x.mul(&f)).collect()
    }

    /// Numeric jet at `b = b_{2p}` and the given `a`.
    pub fn to_numeric(&self, a: f64) -> Jet2 {
        let b = b2p_f64(self.p);
        let a_eff = if self.a_mode == AMode::Symbolic { a } else { 0.0 };
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&k, c)| {
                (
                    k,
                    [
                        std::f64::consts::SQRT_2 * apoly_eval(&c[0], a_eff, b),
                        std::f64::consts::SQRT_2 * apoly_eval(&c[1], a_eff, b),
                    ],
                )
            })
            .collect();
        Jet2 {
            p: self.p,
            order: self.order,
            a_mode: if self.a_mode == AMode::Symbolic { AMode::Fixed(a) } else { self.a_mode },
            coeffs,
            errors: None,
        }
    }
}

fn check_order(p: u32, order: u32) -> Result<()> {
    if !(2..=6).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {} outside 2..=6", p)));
    }
    if order > p + 1 || order > 5 {
        return Err(Error::InvalidArgument(format!(
            "order {} exceeds min(p+1, 5) for p = {}",
            order, p
        )));
    }
    Ok(())
}

/// Exact jet through total order `order`: polynomial in `a` for
/// `order ≤ 2`, at `a = 0` otherwise.
pub fn jet_symbolic(p: u32, order: u32) -> Result<ExactJet2> {
    check_order(p, order)?;
    let b = RelElem::b(p);
    let (aparam, mode) = if order <= 2 {
        (AParam::Symbolic, AMode::Symbolic)
    } else {
        (AParam::Value(RelElem::zero()), AMode::Zero)
    };
    let s = series_jet(p, order, &b, &aparam)?;
    Ok(ExactJet2 {
        p,
        order,
        a_mode: mode,
        coeffs: s
            .coeffs
            .into_iter()
            .filter(|((i, j), _)| i + j <= order)
            .collect(),
    })
}

/// Exact jet at `a = 0` through `order` (allowed for any `order ≤ min(p+1, 5)`).
pub fn jet_symbolic_a0(p: u32, order: u32) -> Result<ExactJet2> {
    check_order(p, order)?;
    let b = RelElem::b(p);
    let s = series_jet(p, order, &b, &AParam::Value(RelElem::zero()))?;
    Ok(ExactJet2 {
        p,
        order,
        a_mode: AMode::Zero,
        coeffs: s
            .coeffs
            .into_iter()
            .filter(|((i, j), _)| i + j <= order)
            .collect(),
    })
}

/// Mixed derivatives `∂_λ^i ∂_g^j φ(λ_{2p}, 0)[x_a, …, x_a]` in two-fold
/// coordinates, each an `a`-polynomial per Fourier coefficient.
#[derive(Clone, Debug)]
pub struct PhiDerivatives {
    pub p: u32,
    pub a_mode: AMode,
    pub entries: BTreeMap<(u32, u32), XMap<APoly<RelElem>>>,
}

impl PhiDerivatives {
    pub fn get(&self, i: u32, j: u32) -> XMap<APoly<RelElem>> {
        self.entries.get(&(i, j)).cloned().unwrap_or_default()
    }

    /// `x̃ = ∂_λ∂_gφ x_a`.
    pub fn x_tilde(&self) -> XMap<APoly<RelElem>> {
        self.get(1, 1)
    }

    /// `x̄ = ∂_{gg}φ[x_a, x_a]`.
    pub fn x_bar(&self) -> XMap<APoly<RelElem>> {
        self.get(0, 2)
    }

    /// Whether the element vanishes identically (including `i+j ≤ 1`, where `φ` has no terms).
    pub fn is_zero(&self, i: u32, j: u32) -> bool {
        self.get(i, j)
            .iter()
            .all(|c| c.values().all(|v| v.iter().all(|x| x.is_zero())))
    }
}

fn phi_family(p: u32, order: u32, aparam: AParam<RelElem>, mode: AMode) -> Result<PhiDerivatives> {
    let b = RelElem::b(p);
    let s = series_jet(p, order, &b, &aparam)?;
    let entries = s
        .phi
        .into_iter()
        .map(|((i, j), x)| {
            let f = RelElem::from_i64((factorial(i) * factorial(j)) as i64);
            let scaled: XMap<APoly<RelElem>> = [
                x[0].iter()
                    .map(|(n, c)| (*n, c.iter().map(|v| v.mul(&f)).collect()))
                    .collect(),
                x[1].iter()
                    .map(|(n, c)| (*n, c.iter().map(|v| v.mul(&f)).collect()))
                    .collect(),
            ];
            ((i, j), scaled)
        })
        .collect();
    Ok(PhiDerivatives {
        p,
        a_mode: mode,
        entries,
    })
}

/// `φ`-derivatives of total order 2 as polynomials in `a`, and of order
/// `3..=min(p+1, 5)` at `a = 0`.
pub fn phi_derivatives(p: u32) -> Result<(PhiDerivatives, PhiDerivatives)> {
    let top = (p + 1).min(5);
    check_order(p, top)?;
    let low = phi_family(p, 2, AParam::Symbolic, AMode::Symbolic)?;
    let high = phi_family(p, top, AParam::Value(RelElem::zero()), AMode::Zero)?;
    Ok((low, high))
}
