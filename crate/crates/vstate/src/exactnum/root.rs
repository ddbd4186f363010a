//! Certified isolation of the degenerate radius and evaluation at it.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::bpoly::BPoly;
use super::brat::BRat;
use super::interval::Interval;
use super::rat::Rat;
use crate::error::{Error, Result};

/// Highest precision tried before giving up on a sign decision.
pub const MAX_REFINE_BITS: u64 = 4096;

/// Precision of the numeric tier of [`is_zero_mod_relation`].
pub const ZERO_TEST_BITS: u64 = 256;

/// Bracket `[lo, hi] ⊂ (0,1)` of the unique root of `b^{2p} + p b^2 - (p-1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgRoot {
    pub p: u32,
    pub relation: BPoly,
    pub interval: Interval,
    pub precision_bits: u64,
}

/// Remainder of `q` modulo the relation of order `p` (degree `< 2p`).
pub fn bpoly_reduce(q: &BPoly, p: u32) -> BPoly {
    assert!(p >= 2, "p must be at least 2");
    q.rem(&BPoly::relation(p))
}

/// Bisection on dyadic rationals; the bracket is exact, not approximate.
pub fn find_b2p(p: u32, precision_bits: u64) -> AlgRoot {
    assert!(p >= 2, "p must be at least 2");
    assert!(precision_bits >= 16, "precision_bits must be at least 16");
    AlgRoot {
        p,
        relation: BPoly::relation(p),
        interval: Interval::new(Rat::zero(), Rat::one()),
        precision_bits: 0,
    }
    .refine(precision_bits)
}

impl AlgRoot {
    /// Narrow the bracket to at least `bits` of precision.
    pub fn refine(&self, bits: u64) -> AlgRoot {
        if bits <= self.precision_bits {
            return self.clone();
        }
        let mut lo = self.interval.lo.clone();
        let mut hi = self.interval.hi.clone();
        // relation(0) = 1-p < 0 and relation(1) = 1 > 0.
        let half = Rat::new(1, 2);
        for _ in self.precision_bits..bits {
            if lo == hi {
                break;
            }
            let mid = &(&lo + &hi) * &half;
            let v = self.relation.eval(&mid);
            if v.is_zero() {
                lo = mid.clone();
                hi = mid;
            } else if v.is_negative() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        AlgRoot {
            p: self.p,
            relation: self.relation.clone(),
            interval: Interval::new(lo, hi),
            precision_bits: bits,
        }
    }

    pub fn midpoint(&self) -> Rat {
        self.interval.midpoint()
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64()
    }

    /// Value of the relation at the bracket midpoint.
    pub fn midpoint_residual(&self) -> Rat {
        self.relation.eval(&self.midpoint())
    }
}

/// Certified enclosure of `x(b_{2p})` of width at most `2^{4-precision_bits}`.
pub fn eval_brat(x: &BRat, root: &AlgRoot, precision_bits: u64) -> Result<Interval> {
    let target = Rat::dyadic(BigInt::from(1), precision_bits.saturating_sub(4));
    let mut bits = precision_bits + 16;
    loop {
        let r = root.refine(bits);
        let work = bits + 32;
        let num = x.num().eval_interval(&r.interval, work);
        let den = x.den().eval_interval(&r.interval, work);
        if let Some(q) = num.div(&den) {
            let q = q.round_out(precision_bits + 8);
            if q.width() <= target {
                return Ok(q);
            }
        }
        if bits >= MAX_REFINE_BITS {
            return Err(if den.contains_zero() {
                Error::DenominatorVanishes
            } else {
                Error::Inconclusive
            });
        }
        bits *= 2;
    }
}

/// Two-tier zero test at `b_{2p}`: symbolic reduction, then a 256-bit
/// enclosure. Disagreements are reported, never silently resolved.
pub fn is_zero_mod_relation(x: &BRat, p: u32) -> Result<bool> {
    let rel = BPoly::relation(p);
    if bpoly_reduce(x.den(), p).is_zero() {
        return Err(Error::DenominatorVanishes);
    }
    let symbolic_zero = x.num().rem(&rel).is_zero();
    let root = find_b2p(p, ZERO_TEST_BITS);
    let mut bits = ZERO_TEST_BITS;
    loop {
        let enc = eval_brat(x, &root, bits)?;
        match (symbolic_zero, enc.contains_zero()) {
            (true, true) => return Ok(true),
            (true, false) => return Err(Error::ZeroTestDisagreement),
            (false, false) => return Ok(false),
            (false, true) => {
                if bits >= MAX_REFINE_BITS {
                    return Err(Error::Inconclusive);
                }
                bits *= 2;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_b4_for_p2() {
        let q = BPoly::monomial(Rat::one(), 4);
        assert_eq!(bpoly_reduce(&q, 2), BPoly::from_i64s(&[1, 0, -2]));
    }

    #[test]
    fn reduce_b8_for_p3() {
        let q = BPoly::monomial(Rat::one(), 8);
        assert_eq!(bpoly_reduce(&q, 3), BPoly::from_i64s(&[0, 0, 2, 0, -3]));
    }

    #[test]
    fn reduced_polynomial_untouched() {
        let q = BPoly::monomial(Rat::one(), 3);
        assert_eq!(bpoly_reduce(&q, 2), q);
    }

    #[test]
    fn bracket_straddles_sign_change() {
        for p in 2..=6 {
            let r = find_b2p(p, 64);
            assert!(r.relation.eval(&r.interval.lo) <= Rat::zero());
            assert!(r.relation.eval(&r.interval.hi) >= Rat::zero());
            assert!(r.interval.width() <= Rat::dyadic(BigInt::from(1), 64));
            assert!(r.interval.lo.is_positive() && r.interval.hi < Rat::one());
        }
    }

    #[test]
    fn p2_root_value() {
        let r = find_b2p(2, 64);
        assert!((r.to_f64() - 0.643_594_252_905_582_6).abs() < 1e-15);
    }

    #[test]
    fn refine_keeps_bracket() {
        let r = find_b2p(3, 20);
        let s = r.refine(80);
        assert!(r.interval.contains(&s.interval.lo) && r.interval.contains(&s.interval.hi));
        assert!(s.interval.width() <= Rat::dyadic(BigInt::from(1), 80));
    }

    #[test]
    fn zero_test_cases() {
        let rel2 = BRat::from_poly(BPoly::from_i64s(&[-1, 0, 2, 0, 1]));
        assert_eq!(is_zero_mod_relation(&rel2, 2), Ok(true));
        let bm1 = BRat::from_poly(BPoly::from_i64s(&[-1, 0, 1]));
        assert_eq!(is_zero_mod_relation(&bm1, 2), Ok(false));
        // (p b^2 - p + 1) + b^{2p} at p = 3
        let x = BRat::from_poly(BPoly::from_i64s(&[-2, 0, 3, 0, 0, 0, 1]));
        assert_eq!(is_zero_mod_relation(&x, 3), Ok(true));
    }

    #[test]
    fn denominator_on_relation_rejected() {
        let x = BRat::new(BPoly::one(), BPoly::relation(2));
        assert_eq!(is_zero_mod_relation(&x, 2), Err(Error::DenominatorVanishes));
    }
}
