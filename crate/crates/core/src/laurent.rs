//! Laurent polynomials in a formal variable `u` over the rationals, and vectors with such
//! coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::fock::{Coefficient, Monomial, State};

/// Finite sum `sum_k c_k u^k`, `k` in the integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ULaurent(BTreeMap<i64, Coefficient>);

impl ULaurent {
    pub fn zero() -> Self {
        ULaurent(BTreeMap::new())
    }

    pub fn monomial(power: i64, c: Coefficient) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(power, c);
        }
        ULaurent(m)
    }

    pub fn one() -> Self {
        Self::monomial(0, Coefficient::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficient(&self, power: i64) -> Coefficient {
        self.0
            .get(&power)
            .cloned()
            .unwrap_or_else(Coefficient::zero)
    }

    pub fn terms(&self) -> &BTreeMap<i64, Coefficient> {
        &self.0
    }

    pub fn add_term(&mut self, power: i64, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(power).or_insert_with(Coefficient::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&power);
        }
    }

    pub fn add(&self, o: &ULaurent) -> ULaurent {
        let mut out = self.clone();
        for (k, c) in &o.0 {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> ULaurent {
        ULaurent(self.0.iter().map(|(k, c)| (*k, -c)).collect())
    }

    pub fn sub(&self, o: &ULaurent) -> ULaurent {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &ULaurent) -> ULaurent {
        let mut out = ULaurent::zero();
        for (a, x) in &self.0 {
            for (b, y) in &o.0 {
                out.add_term(a + b, x * y);
            }
        }
        out
    }
}

impl fmt::Display for ULaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}*u"),
                _ => format!("{c}*u^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Fock-space vector with `ULaurent` coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentVector(BTreeMap<Monomial, ULaurent>);

impl LaurentVector {
    pub fn zero() -> Self {
        LaurentVector(BTreeMap::new())
    }

    /// `u^power * s`
    pub fn from_state(s: &State, power: i64) -> Self {
        let mut v = LaurentVector::zero();
        v.add_state(s, &ULaurent::monomial(power, Coefficient::one()));
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<Monomial, ULaurent> {
        &self.0
    }

    /// `self += a * s`
    pub fn add_state(&mut self, s: &State, a: &ULaurent) {
        for (m, c) in s.terms() {
            let t = a.mul(&ULaurent::monomial(0, c.clone()));
            let e = self.0.entry(m.clone()).or_default();
            *e = e.add(&t);
            if e.is_zero() {
                self.0.remove(m);
            }
        }
    }

    pub fn sub(&self, o: &LaurentVector) -> LaurentVector {
        let mut out = self.clone();
        for (m, a) in &o.0 {
            let e = out.0.entry(m.clone()).or_default();
            *e = e.sub(a);
            if e.is_zero() {
                out.0.remove(m);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{rat, ratio};

    #[test]
    fn arithmetic() {
        let a = ULaurent::monomial(-1, rat(2)).add(&ULaurent::one());
        let b = ULaurent::monomial(1, ratio(1, 2)).sub(&ULaurent::one());
        let p = a.mul(&b);
        assert_eq!(p.coefficient(-1), rat(-2));
        assert_eq!(p.coefficient(0), rat(0));
        assert_eq!(p.coefficient(1), ratio(1, 2));
        assert!(a.sub(&a).is_zero());
        assert_eq!(a.to_string(), "2*u^-1 + 1");
    }
}
