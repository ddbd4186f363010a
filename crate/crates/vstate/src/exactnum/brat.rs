//! Rational functions of `b` with rational coefficients.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::bpoly::BPoly;
use super::field::Field;
use super::rat::Rat;

/// `num / den` in lowest terms with a monic denominator.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BRatRepr", into = "BRatRepr")]
pub struct BRat {
    num: BPoly,
    den: BPoly,
}

#[derive(Serialize, Deserialize)]
struct BRatRepr {
    num: BPoly,
    den: BPoly,
}

impl TryFrom<BRatRepr> for BRat {
    type Error = String;
    fn try_from(r: BRatRepr) -> Result<Self, String> {
        if r.den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(BRat::new(r.num, r.den))
    }
}

impl From<BRat> for BRatRepr {
    fn from(x: BRat) -> Self {
        BRatRepr {
            num: x.num,
            den: x.den,
        }
    }
}

impl BRat {
    /// Normalizes `num / den`; panics if `den` is zero.
    pub fn new(num: BPoly, den: BPoly) -> Self {
        assert!(!den.is_zero(), "BRat with zero denominator");
        if num.is_zero() {
            return BRat {
                num,
                den: BPoly::one(),
            };
        }
        let (num, den) = if den.is_monomial() {
            // Only powers of b can cancel.
            let k = den.valuation().unwrap().min(num.valuation().unwrap());
            (num.unshift(k), den.unshift(k))
        } else {
            let g = num.gcd(&den);
            if g.is_one() {
                (num, den)
            } else {
                (num.divrem(&g).0, den.divrem(&g).0)
            }
        };
        let lead = den.leading().unwrap().recip();
        BRat {
            num: num.scale(&lead),
            den: den.scale(&lead),
        }
    }

    pub fn from_poly(p: BPoly) -> Self {
        BRat {
            num: p,
            den: BPoly::one(),
        }
    }

    pub fn from_rat(r: Rat) -> Self {
        Self::from_poly(BPoly::constant(r))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(Rat::from(n))
    }

    pub fn b() -> Self {
        Self::from_poly(BPoly::b())
    }

    /// `b^k` for any integer `k`.
    pub fn bpow(k: i32) -> Self {
        if k >= 0 {
            Self::from_poly(BPoly::monomial(Rat::one(), k as usize))
        } else {
            BRat {
                num: BPoly::one(),
                den: BPoly::monomial(Rat::one(), (-k) as usize),
            }
        }
    }

    pub fn num(&self) -> &BPoly {
        &self.num
    }

    pub fn den(&self) -> &BPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv().expect("division by zero BRat"))
    }

    pub fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        BRat {
            num: self.num.scale(r),
            den: self.den.clone(),
        }
    }

    pub fn eval_f64(&self, b: f64) -> f64 {
        self.num.eval_f64(b) / self.den.eval_f64(b)
    }

    pub fn eval(&self, b: &Rat) -> Option<Rat> {
        let d = self.den.eval(b);
        if d.is_zero() {
            None
        } else {
            Some(&self.num.eval(b) / &d)
        }
    }
}

impl Field for BRat {
    fn zero() -> Self {
        Self::from_poly(BPoly::zero())
    }
    fn one() -> Self {
        Self::from_poly(BPoly::one())
    }
    fn from_i64(n: i64) -> Self {
        Self::from_int(n)
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return BRat::new(self.num.add(&o.num), self.den.clone());
        }
        if self.den.is_monomial() && o.den.is_monomial() {
            // Common denominator b^max(i,j) without a gcd computation.
            let i = self.den.degree().unwrap();
            let j = o.den.degree().unwrap();
            let k = i.max(j);
            let num = self.num.shift(k - i).add(&o.num.shift(k - j));
            return BRat::new(num, BPoly::monomial(Rat::one(), k));
        }
        BRat::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        BRat::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    fn neg(&self) -> Self {
        BRat {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(BRat::new(self.den.clone(), self.num.clone()))
        }
    }
}

impl fmt::Debug for BRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for BRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
