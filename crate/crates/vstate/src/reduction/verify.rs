//! Jet entries of `F₂` checked against their closed forms.
//!
//! All exact values are in `√2` units: the entry is `√2 · Σ_k c_k a^k`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{b2p_f64, find_b2p, Field, RelElem};

use super::jet::{jet_symbolic, Jet2};
use super::numeric::{jet_numeric, FdConfig, LsConfig};
use super::series::APoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Symbolic,
    Numeric,
    Both,
}

impl FromStr for VerifyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symbolic" => Ok(VerifyMode::Symbolic),
            "numeric" => Ok(VerifyMode::Numeric),
            "both" => Ok(VerifyMode::Both),
            _ => Err(Error::InvalidArgument(format!("unknown mode {:?}", s))),
        }
    }
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerifyMode::Symbolic => "symbolic",
            VerifyMode::Numeric => "numeric",
            VerifyMode::Both => "both",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Match,
    Mismatch,
    /// No closed form to compare against.
    Computed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    /// e.g. `∂λλt F₂·y₂`.
    pub name: String,
    pub lambda_order: u32,
    pub t_order: u32,
    /// Co-kernel direction, 1 or 2.
    pub component: usize,
    /// Closed form in `√2` units as a polynomial in `a`.
    pub anchor: Option<String>,
    pub anchor_value: Option<f64>,
    pub symbolic: Option<String>,
    pub symbolic_value: Option<f64>,
    pub numeric: Option<f64>,
    pub numeric_error: Option<f64>,
    pub symbolic_status: Option<Status>,
    pub numeric_status: Option<Status>,
}

impl VerifyRow {
    pub fn status(&self) -> Status {
        let s = [self.symbolic_status, self.numeric_status];
        if s.contains(&Some(Status::Mismatch)) {
            Status::Mismatch
        } else if s.contains(&Some(Status::Match)) {
            Status::Match
        } else {
            Status::Computed
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyTolerances {
    /// Absolute bound on first-order numeric entries.
    pub first_order: f64,
    /// Relative bound (against `max(1, |exact|)`) on second-order numeric entries.
    pub second_order: f64,
    /// Relative bound on third-order numeric entries.
    pub third_order: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            first_order: 1e-8,
            second_order: 1e-6,
            third_order: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub p: u32,
    pub order: u32,
    pub mode: VerifyMode,
    pub a: f64,
    /// Exact bracket of `b_{2p}` as rationals.
    pub b_interval: [String; 2],
    pub tolerances: VerifyTolerances,
    pub ls: LsConfig,
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn mismatches(&self) -> usize {
        self.rows.iter().filter(|r| r.status() == Status::Mismatch).count()
    }
}

fn cst(x: RelElem) -> APoly<RelElem> {
    vec![x]
}

fn trim(mut c: APoly<RelElem>) -> APoly<RelElem> {
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    c
}

/// Closed forms of `∂_λ^i ∂_t^j F₂ · y_comp` at `(λ_{2p}, 0)` in `√2` units.
///
/// Second order is polynomial in `a`; higher orders are at `a = 0`.
pub fn anchors(p: u32, order: u32) -> BTreeMap<(u32, u32, usize), APoly<RelElem>> {
    let b = RelElem::b(p);
    let k = |n: i64| RelElem::from_i64(n);
    let bi = b.inv().expect("b is nonzero");
    let bpow = |e: i64| if e >= 0 { b.pow(e as u32) } else { bi.pow((-e) as u32) };
    let w = b.mul(&b).sub(&k(1)).pow(2).mul(&bi);
    let pi = p as i64;
    let mut m = BTreeMap::new();
    if order >= 1 {
        for c in 1..=2 {
            m.insert((1, 0, c), vec![]);
            m.insert((0, 1, c), vec![]);
        }
    }
    if order >= 2 {
        m.insert((2, 0, 1), cst(k(4).mul(&bi)));
        m.insert((2, 0, 2), vec![k(0), k(4 * pi * pi).mul(&bpow(1 - 2 * pi))]);
        m.insert((1, 1, 1), vec![]);
        m.insert((1, 1, 2), vec![]);
        let b2 = b.mul(&b);
        let (c1, c2) = if p == 2 {
            let c1 = k(-2).mul(&b).mul(&b2.add(&k(1)).pow(2));
            let den = b.mul(&k(2).mul(&b2.pow(2)).sub(&k(1)));
            let c2 = k(2)
                .mul(&b2.sub(&k(1)).pow(2))
                .mul(&k(4).mul(&b2).sub(&k(3)))
                .mul(&den.inv().expect("2b⁴-1 is nonzero at b_4"));
            (c1, c2)
        } else {
            let c1 = k(-2).mul(&w).mul(&k(pi).add(&k(pi - 1).mul(&b2)));
            let s = b2.sub(&k(1));
            let den = b2.mul(&k(2).add(&k(4 * pi).mul(&s)).add(&k(pi * pi).mul(&s.pow(2))));
            let c2 = k(4 * (pi - 1).pow(4))
                .mul(&s.pow(2))
                .mul(&k(2 * pi).mul(&b.pow(3)).add(&k(1 - 2 * pi).mul(&b)))
                .mul(&den.inv().expect("denominator of c₂ is nonzero"));
            (c1, c2)
        };
        m.insert((0, 2, 1), vec![w.neg(), k(0), c1]);
        m.insert(
            (0, 2, 2),
            vec![k(0), k(2 * pi).mul(&w), k(0), k((2 * pi - 1) * pi).mul(&w).add(&c2)],
        );
    }
    if order >= 3 {
        m.insert((3, 0, 1), cst(k(12).mul(&bpow(-3))));
        m.insert((3, 0, 2), vec![]);
        m.insert((2, 1, 1), vec![]);
        m.insert((2, 1, 2), if p == 2 { cst(k(-8)) } else { vec![] });
        m.insert(
            (1, 2, 1),
            cst(bpow(-3).add(&k(6).mul(&bi)).sub(&k(7).mul(&b))),
        );
        m.insert((1, 2, 2), vec![]);
        m.insert((0, 3, 1), vec![]);
        m.insert((0, 3, 2), vec![]);
    }
    if order >= 4 {
        m.insert((4, 0, 1), cst(k(48).mul(&bpow(-5))));
    }
    // Among Q₂ entries of order ≤ p+1 at a = 0, only ∂λλ ∂t^{p-1} survives.
    let key = match p {
        2 => Some(k(-8)),
        3 => Some(k(-24).mul(&b)),
        4 => Some(k(-96).mul(&b.pow(2))),
        _ => None,
    };
    for n in 4..=order.min(p + 1) {
        for i in 0..=n {
            let v = if (i, n - i) == (2, p - 1) {
                key.clone().map(cst)
            } else {
                Some(vec![])
            };
            if let Some(v) = v {
                m.insert((i, n - i, 2), v);
            }
        }
    }
    m
}

fn apoly_string(c: &APoly<RelElem>) -> String {
    let c = trim(c.clone());
    if c.is_empty() {
        return "0".into();
    }
    c.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(k, x)| match k {
            0 => format!("({})", x),
            1 => format!("({})·a", x),
            _ => format!("({})·a^{}", x, k),
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn apoly_value(c: &APoly<RelElem>, a: f64, b: f64) -> f64 {
    std::f64::consts::SQRT_2 * c.iter().rev().fold(0.0, |acc, x| acc * a + x.eval_f64(b))
}

/// Truncation to `a`-degree ≤ 3.
fn through_a3(c: &APoly<RelElem>) -> APoly<RelElem> {
    trim(c.iter().take(4).cloned().collect())
}

pub fn entry_name(i: u32, j: u32, comp: usize) -> String {
    format!(
        "∂{}{} F₂·y{}",
        "λ".repeat(i as usize),
        "t".repeat(j as usize),
        if comp == 1 { "₁" } else { "₂" }
    )
}

/// Compare every jet entry of total order `1..=order` with its closed form.
///
/// Symbolic entries must equal the closed form exactly modulo the relation
/// (through `a`-degree 3 at second order). Numeric entries come from finite
/// differences at the given `a`, for orders up to 3.
pub fn verify(p: u32, order: u32, mode: VerifyMode, a: f64, ls: &LsConfig) -> Result<VerifyReport> {
    if !(1..=5).contains(&order) {
        return Err(Error::InvalidArgument(format!("order {} outside 1..=5", order)));
    }
    let b = b2p_f64(p);
    let anchor = anchors(p, order);
    let tol = VerifyTolerances::default();
    let do_sym = mode != VerifyMode::Numeric;
    let do_num = mode != VerifyMode::Symbolic && order <= 3;
    let low = if do_sym || do_num { Some(jet_symbolic(p, order.min(2))?) } else { None };
    let high = if order >= 3 { Some(jet_symbolic(p, order)?) } else { None };
    let numeric: Option<Jet2> = if do_num {
        Some(jet_numeric(p, a, order, ls, &FdConfig::default())?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for n in 1..=order {
        for i in (0..=n).rev() {
            let j = n - i;
            for comp in 1..=2 {
                let exact = if n <= 2 {
                    low.as_ref().map(|x| trim(x.derivative(i, j, comp)))
                } else {
                    high.as_ref().map(|x| trim(x.derivative(i, j, comp)))
                };
                let anc = anchor.get(&(i, j, comp)).map(|c| trim(c.clone()));
                // Exact values valid at this `a`: a-polynomials to order 2, `a = 0` above.
                let a_ok = n <= 2 || a == 0.0;
                let mut row = VerifyRow {
                    name: entry_name(i, j, comp),
                    lambda_order: i,
                    t_order: j,
                    component: comp,
                    anchor: anc.as_ref().map(apoly_string),
                    anchor_value: anc.as_ref().filter(|_| a_ok).map(|c| apoly_value(c, a, b)),
                    symbolic: None,
                    symbolic_value: None,
                    numeric: None,
                    numeric_error: None,
                    symbolic_status: None,
                    numeric_status: None,
                };
                if do_sym {
                    let e = exact.clone().unwrap_or_default();
                    row.symbolic = Some(apoly_string(&e));
                    row.symbolic_value = a_ok.then(|| apoly_value(&e, a, b));
                    row.symbolic_status = Some(match &anc {
                        Some(c) => {
                            let equal = if n == 2 { through_a3(&e) == through_a3(c) } else { &e == c };
                            if equal {
                                Status::Match
                            } else {
                                Status::Mismatch
                            }
                        }
                        None => Status::Computed,
                    });
                }
                if let Some(nj) = &numeric {
                    let v = nj.derivative(i, j)[comp - 1];
                    row.numeric = Some(v);
                    row.numeric_error = nj.errors.as_ref().map(|e| {
                        let f = (super::jet::factorial(i) * super::jet::factorial(j)) as f64;
                        e.get(&(i, j)).map_or(0.0, |x| x[comp - 1] * f)
                    });
                    // Reference: the closed form if there is one, else the exact jet.
                    let reference = if !a_ok {
                        None
                    } else if let Some(c) = &anc {
                        Some(apoly_value(c, a, b))
                    } else {
                        exact.as_ref().map(|e| apoly_value(e, a, b))
                    };
                    row.numeric_status = Some(match reference {
                        Some(r) => {
                            let bound = match n {
                                1 => tol.first_order,
                                2 => tol.second_order * r.abs().max(1.0),
                                _ => tol.third_order * r.abs().max(1.0),
                            };
                            if (v - r).abs() <= bound {
                                Status::Match
                            } else {
                                Status::Mismatch
                            }
                        }
                        None => Status::Computed,
                    });
                }
                rows.push(row);
            }
        }
    }
    let root = find_b2p(p, 128);
    Ok(VerifyReport {
        p,
        order,
        mode,
        a,
        b_interval: [root.interval.lo.to_string(), root.interval.hi.to_string()],
        tolerances: tol,
        ls: *ls,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_count() {
        let a = anchors(3, 4);
        assert!(a.contains_key(&(2, 2, 2)));
        assert!(a.contains_key(&(0, 4, 2)));
        assert!(!a.contains_key(&(2, 2, 1)));
    }

    #[test]
    fn symbolic_orders_match_for_p2() {
        let r = verify(2, 3, VerifyMode::Symbolic, 0.0, &LsConfig::default()).unwrap();
        assert_eq!(r.mismatches(), 0, "{:#?}", r.rows);
    }
}
