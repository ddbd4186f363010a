//! Elements of `Q[b]/(b^{2p} + p b^2 - (p-1))`, i.e. of `Q(b_{2p})`.
//!
//! Stored as an integer coefficient vector of degree `< 2p` over one common
//! positive denominator, which keeps the hot multiplication loop free of
//! per-coefficient gcds. Reduction only needs the integer rule
//! `b^{2p} = (p-1) - p b^2`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::bpoly::BPoly;
use super::brat::BRat;
use super::field::Field;
use super::rat::Rat;

#[derive(Clone)]
pub struct RelElem {
    /// Relation order; 0 marks a rational constant usable with any `p`.
    p: u32,
    coeffs: Vec<BigInt>,
    den: BigInt,
}

impl RelElem {
    pub fn constant(r: &Rat) -> Self {
        let mut x = RelElem {
            p: 0,
            coeffs: vec![r.numer().clone()],
            den: r.denom().clone(),
        };
        x.normalize();
        x
    }

    /// The generator `b` of the field for relation order `p`.
    pub fn b(p: u32) -> Self {
        assert!(p >= 2);
        RelElem {
            p,
            coeffs: vec![BigInt::zero(), BigInt::one()],
            den: BigInt::one(),
        }
    }

    /// Reduce a polynomial in `b` modulo the relation.
    pub fn from_bpoly(q: &BPoly, p: u32) -> Self {
        let den = q.denominator_lcm();
        let mut coeffs: Vec<BigInt> = q
            .coeffs()
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        reduce_in_place(&mut coeffs, p);
        let mut x = RelElem { p, coeffs, den };
        x.normalize();
        x
    }

    /// Image of a rational function; `None` if the denominator vanishes at `b_{2p}`.
    pub fn from_brat(x: &BRat, p: u32) -> Option<Self> {
        let n = Self::from_bpoly(x.num(), p);
        let d = Self::from_bpoly(x.den(), p).inv_with(p)?;
        Some(n.mul(&d))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Canonical representative as a polynomial of degree `< 2p`.
    pub fn to_bpoly(&self) -> BPoly {
        BPoly::from_coeffs(
            self.coeffs
                .iter()
                .map(|c| Rat::new(c.clone(), self.den.clone()))
                .collect(),
        )
    }

    pub fn to_brat(&self) -> BRat {
        BRat::from_poly(self.to_bpoly())
    }

    pub fn eval_f64(&self, b: f64) -> f64 {
        self.to_bpoly().eval_f64(b)
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.den = BigInt::one();
            return;
        }
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in &mut self.coeffs {
                *c = -&*c;
            }
        }
        if self.den.is_one() {
            return;
        }
        let mut g = self.den.clone();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                return;
            }
        }
        self.den /= &g;
        for c in &mut self.coeffs {
            *c /= &g;
        }
    }

    fn join_p(&self, o: &Self) -> u32 {
        match (self.p, o.p) {
            (0, q) | (q, 0) => q,
            (a, b) => {
                assert_eq!(a, b, "mixing elements of different relation orders");
                a
            }
        }
    }

    fn inv_with(&self, p: u32) -> Option<Self> {
        if self.coeffs.is_empty() {
            return None;
        }
        if self.coeffs.len() == 1 {
            let mut x = RelElem {
                p: self.p,
                coeffs: vec![self.den.clone()],
                den: self.coeffs[0].clone(),
            };
            x.normalize();
            return Some(x);
        }
        let q = self.to_bpoly().inverse_mod(&BPoly::relation(p))?;
        Some(Self::from_bpoly(&q, p))
    }
}

// The relation order is deliberately ignored: constants compare equal
// whichever field they were produced in.
impl PartialEq for RelElem {
    fn eq(&self, o: &Self) -> bool {
        self.den == o.den && self.coeffs == o.coeffs
    }
}

impl Eq for RelElem {}

impl std::hash::Hash for RelElem {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.coeffs.hash(h);
        self.den.hash(h);
    }
}

fn reduce_in_place(c: &mut Vec<BigInt>, p: u32) {
    if p == 0 {
        return;
    }
    let n = 2 * p as usize;
    let pm1 = BigInt::from(p as i64 - 1);
    let mp = BigInt::from(-(p as i64));
    for k in (n..c.len()).rev() {
        if c[k].is_zero() {
            continue;
        }
        let top = std::mem::take(&mut c[k]);
        c[k - n] += &top * &pm1;
        c[k - n + 2] += &top * &mp;
    }
    c.truncate(n.min(c.len()));
}

impl Field for RelElem {
    fn zero() -> Self {
        RelElem {
            p: 0,
            coeffs: Vec::new(),
            den: BigInt::one(),
        }
    }
    fn one() -> Self {
        Self::from_i64(1)
    }
    fn from_i64(n: i64) -> Self {
        let mut x = RelElem {
            p: 0,
            coeffs: vec![BigInt::from(n)],
            den: BigInt::one(),
        };
        x.normalize();
        x
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let p = self.join_p(o);
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        let den;
        if self.den == o.den {
            for k in 0..n {
                coeffs.push(match (self.coeffs.get(k), o.coeffs.get(k)) {
                    (Some(x), Some(y)) => x + y,
                    (Some(x), None) => x.clone(),
                    (None, Some(y)) => y.clone(),
                    _ => unreachable!(),
                });
            }
            den = self.den.clone();
        } else {
            let l = self.den.lcm(&o.den);
            let fa = &l / &self.den;
            let fb = &l / &o.den;
            for k in 0..n {
                coeffs.push(match (self.coeffs.get(k), o.coeffs.get(k)) {
                    (Some(x), Some(y)) => x * &fa + y * &fb,
                    (Some(x), None) => x * &fa,
                    (None, Some(y)) => y * &fb,
                    _ => unreachable!(),
                });
            }
            den = l;
        }
        let mut x = RelElem { p, coeffs, den };
        x.normalize();
        x
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let p = self.join_p(o);
        let mut c = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    c[i + j] += x * y;
                }
            }
        }
        reduce_in_place(&mut c, p);
        let mut x = RelElem {
            p,
            coeffs: c,
            den: &self.den * &o.den,
        };
        x.normalize();
        x
    }
    fn neg(&self) -> Self {
        RelElem {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
    fn inv(&self) -> Option<Self> {
        self.inv_with(self.p)
    }
    fn mul_i64(&self, n: i64) -> Self {
        let mut x = RelElem {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c * n).collect(),
            den: self.den.clone(),
        };
        x.normalize();
        x
    }
}

impl fmt::Debug for RelElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bpoly())
    }
}

impl fmt::Display for RelElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bpoly())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::root::find_b2p;

    #[test]
    fn relation_is_zero() {
        for p in 2..=6 {
            let rel = RelElem::from_bpoly(&BPoly::relation(p), p);
            assert!(rel.is_zero());
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let b = RelElem::b(4);
        let x = b.pow(3).add(&RelElem::from_i64(-2)).mul_i64(3);
        let y = x.inv().unwrap();
        assert_eq!(x.mul(&y), RelElem::one());
    }

    #[test]
    fn matches_numeric_root() {
        let p = 3;
        let bv = find_b2p(p, 64).to_f64();
        let b = RelElem::b(p);
        let x = b.pow(11).sub(&b.pow(2).mul_i64(5)).inv().unwrap();
        let exact = 1.0 / (bv.powi(11) - 5.0 * bv * bv);
        assert!((x.eval_f64(bv) - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn from_brat_clears_denominator() {
        let p = 2;
        let x = BRat::new(BPoly::from_i64s(&[-3, 0, 4]), BPoly::from_i64s(&[-1, 0, 0, 0, 2]));
        let r = RelElem::from_brat(&x, p).unwrap();
        let back = r.to_bpoly().mul(&BPoly::from_i64s(&[-1, 0, 0, 0, 2]));
        assert_eq!(back.rem(&BPoly::relation(p)), BPoly::from_i64s(&[-3, 0, 4]));
    }
}
