//! Closed forms for `(1/2πi) ∮ τ^{k1} τ̄^{k2} / D^{k3} dτ` over the unit circle.
//!
//! On the circle `τ̄ = 1/τ`, so only `e = k1 - k2` matters.

use serde::{Deserialize, Serialize};

use crate::exactnum::{BRat, Field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CanonicalForm {
    /// `D = 1 - τ`; pole on the circle, see [`canonical_value`].
    #[serde(rename = "SELF")]
    SelfForm,
    /// `D = b - τ`; pole inside the circle.
    #[serde(rename = "OUTER_AT_INNER")]
    OuterAtInner,
    /// `D = 1 - bτ`; pole outside the circle.
    #[serde(rename = "INNER_AT_OUTER")]
    InnerAtOuter,
}

pub(crate) fn binomial(n: i64, k: i64) -> i128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: i128 = 1;
    for i in 0..k {
        r = r * (n - i) as i128 / (i + 1) as i128;
    }
    r
}

/// Value as `coefficient * b^power` for exponent `e = k1 - k2` and pole order `q`.
///
/// The `SELF` form is taken as the sum of the residues at `0` and `1`, i.e.
/// the integral over any circle of radius `> 1`. Integrands assembled from
/// pole-free sums therefore integrate correctly term by term.
pub fn canonical_value(e: i64, q: i64, form: CanonicalForm) -> (i128, i64) {
    assert!(q >= 1, "pole order must be positive");
    let sign = if q % 2 == 0 { 1 } else { -1 };
    match form {
        CanonicalForm::SelfForm => {
            if e >= q - 1 {
                (sign * binomial(e, q - 1), 0)
            } else {
                (0, 0)
            }
        }
        CanonicalForm::OuterAtInner => {
            if e >= q - 1 {
                (sign * binomial(e, q - 1), e - q + 1)
            } else {
                (0, 0)
            }
        }
        CanonicalForm::InnerAtOuter => {
            if e <= -1 {
                (binomial(q - 2 - e, q - 1), -1 - e)
            } else {
                (0, 0)
            }
        }
    }
}

/// Exact value of the canonical integral as a rational function of `b`.
pub fn canonical_integral(k1: u32, k2: u32, k3: u32, form: CanonicalForm) -> BRat {
    let (c, pw) = canonical_value(k1 as i64 - k2 as i64, k3 as i64, form);
    if c == 0 {
        return BRat::zero();
    }
    BRat::from_i64(i64::try_from(c).expect("binomial overflow")).mul(&BRat::bpow(pw as i32))
}
