//! Exact arithmetic over rational functions of `b`, reduction modulo the
//! defining relation of `b_{2p}`, and certified numeric evaluation at it.

mod bpoly;
mod brat;
mod field;
mod interval;
mod rat;
mod relelem;
mod root;

pub use bpoly::BPoly;
pub use brat::BRat;
pub use field::Field;
pub use interval::Interval;
pub use rat::Rat;
pub use relelem::RelElem;
pub use root::{
    bpoly_reduce, eval_brat, find_b2p, is_zero_mod_relation, AlgRoot, MAX_REFINE_BITS,
    ZERO_TEST_BITS,
};

/// `b_{2p}` as a double, from a certified 64-bit bracket.
pub fn b2p_f64(p: u32) -> f64 {
    find_b2p(p, 64).to_f64()
}
