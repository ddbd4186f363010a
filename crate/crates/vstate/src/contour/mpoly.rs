//! Sparse multivariate Laurent polynomials used by the expansion engine.
//!
//! Variables `0..NSERIES` are perturbation (series) parameters and are
//! truncated by total degree; the remaining slots hold the kernel-mixing
//! parameter `a`, the boundary variable `w` and the rescaled integration
//! variable `σ = ξ / w`.

use rustc_hash::FxHashMap;

use crate::exactnum::Field;

pub const NSERIES: usize = 7;
pub const VAR_A: usize = NSERIES;
pub const VAR_W: usize = NSERIES + 1;
pub const VAR_S: usize = NSERIES + 2;
pub const NV: usize = NSERIES + 3;

pub type Mono = [i16; NV];

pub const ONE: Mono = [0; NV];

pub fn series_degree(m: &Mono) -> i32 {
    m[..NSERIES].iter().map(|&e| e as i32).sum()
}

pub fn mono_mul(x: &Mono, y: &Mono) -> Mono {
    let mut r = *x;
    for (ri, yi) in r.iter_mut().zip(y) {
        *ri += yi;
    }
    r
}

pub fn var(v: usize, e: i16) -> Mono {
    let mut m = ONE;
    m[v] = e;
    m
}

/// Truncation applied to every product.
#[derive(Clone, Copy, Debug)]
pub struct Trunc {
    /// Maximal total degree in the series variables.
    pub series: i32,
    /// Maximal degree in `a` (`None` keeps everything).
    pub a: Option<i16>,
}

impl Trunc {
    pub fn series(series: i32) -> Self {
        Trunc { series, a: None }
    }

    fn keeps(&self, m: &Mono) -> bool {
        series_degree(m) <= self.series && self.a.is_none_or(|amax| m[VAR_A] <= amax)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MPoly<K> {
    terms: FxHashMap<Mono, K>,
}

impl<K: Field> Default for MPoly<K> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<K: Field> MPoly<K> {
    pub fn zero() -> Self {
        MPoly {
            terms: FxHashMap::default(),
        }
    }

    pub fn constant(c: K) -> Self {
        Self::term(ONE, c)
    }

    pub fn term(m: Mono, c: K) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mono, &K)> {
        self.terms.iter()
    }

    /// Terms in a fixed (lexicographic) order.
    pub fn sorted(&self) -> Vec<(Mono, K)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (*m, c.clone())).collect();
        v.sort_by(|x, y| x.0.cmp(&y.0));
        v
    }

    pub fn get(&self, m: &Mono) -> Option<&K> {
        self.terms.get(m)
    }

    pub fn add_term(&mut self, m: Mono, c: K) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add_assign(&mut self, o: &Self) {
        for (m, c) in &o.terms {
            self.add_term(*m, c.clone());
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn neg(&self) -> Self {
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &K) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, c.mul(s))).collect(),
        }
    }

    /// Multiply every monomial by `m`.
    pub fn shift(&self, m: &Mono) -> Self {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (mono_mul(k, m), c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self, t: &Trunc) -> Self {
        let mut r = Self::zero();
        let (small, big) = if self.len() <= o.len() {
            (self, o)
        } else {
            (o, self)
        };
        let big: Vec<(Mono, i32, &K)> = big
            .terms
            .iter()
            .map(|(m, c)| (*m, series_degree(m), c))
            .collect();
        for (m1, c1) in &small.terms {
            let d1 = series_degree(m1);
            for (m2, d2, c2) in &big {
                if d1 + d2 > t.series {
                    continue;
                }
                let m = mono_mul(m1, m2);
                if t.keeps(&m) {
                    r.add_term(m, c1.mul(c2));
                }
            }
        }
        r
    }

    /// Drop terms outside the truncation.
    pub fn truncate(&self, t: &Trunc) -> Self {
        MPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| t.keeps(m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Apply a monomial map; colliding images are summed.
    pub fn map_monos(&self, f: impl Fn(&Mono) -> Mono) -> Self {
        let mut r = Self::zero();
        for (m, c) in &self.terms {
            r.add_term(f(m), c.clone());
        }
        r
    }

    /// Keep the terms with the given series monomial and strip it.
    pub fn series_coeff(&self, s: &[i16; NSERIES]) -> Self {
        let mut r = Self::zero();
        for (m, c) in &self.terms {
            if &m[..NSERIES] == s {
                let mut k = *m;
                k[..NSERIES].fill(0);
                r.add_term(k, c.clone());
            }
        }
        r
    }

    /// Substitute a scalar for variable `v`, given the table of its powers.
    pub fn eval_var(&self, v: usize, pow: impl Fn(i16) -> K) -> Self {
        let mut r = Self::zero();
        for (m, c) in &self.terms {
            let mut k = *m;
            let e = k[v];
            k[v] = 0;
            r.add_term(k, c.mul(&pow(e)));
        }
        r
    }

    pub fn map_coeffs<L: Field>(&self, f: impl Fn(&K) -> L) -> MPoly<L> {
        let mut r = MPoly::zero();
        for (m, c) in &self.terms {
            r.add_term(*m, f(c));
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_product() {
        let t = MPoly::<f64>::term(var(0, 1), 1.0).add(&MPoly::constant(1.0));
        let sq = t.mul(&t, &Trunc::series(1));
        assert_eq!(sq.len(), 2);
        assert_eq!(sq.get(&var(0, 1)), Some(&2.0));
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut p = MPoly::<f64>::term(var(VAR_W, -1), 2.0);
        p.add_term(var(VAR_W, -1), -2.0);
        assert!(p.is_empty());
    }
}
