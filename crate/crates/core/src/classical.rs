//! Classical calculus on polynomial polyvectors and forms of affine N-space.
//!
//! This module does not touch the vertex engine; it is the independent reference for the
//! conformal-weight-0 restrictions of the chiral operators.
//!
//! A [`SuperPoly`] is a polynomial in commuting `x_1..x_N` and anticommuting `e_1..e_N`. For
//! polyvectors `e_i = d/dx_i`, for forms `e_i = dx_i`. Odd monomials are stored as bitmasks
//! in increasing index order.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::fock::{Coefficient, Kind, Monomial, Sheaf, State, Symbol};

/// Commutative polynomial in `x_1..x_N`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    pub dim: usize,
    pub terms: BTreeMap<Vec<u32>, Coefficient>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Coefficient) -> Self {
        let mut p = Poly::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i - 1] = 1;
        let mut p = Poly::zero(dim);
        p.add_term(e, Coefficient::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        let v = self
            .terms
            .entry(e.clone())
            .or_insert_with(Coefficient::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn scale(&self, s: &Coefficient) -> Poly {
        let mut p = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Coefficient::one())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut p = Poly::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn derive(&self, i: usize) -> Poly {
        let mut p = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i - 1] > 0 {
                let mut f = e.clone();
                f[i - 1] -= 1;
                p.add_term(f, c * Coefficient::from_integer(e[i - 1].into()));
            }
        }
        p
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Torus weight of each monomial, if all agree.
    pub fn torus_weight(&self, w: &[i64]) -> Option<Option<i64>> {
        let mut it = self
            .terms
            .keys()
            .map(|e| e.iter().zip(w).map(|(a, b)| *a as i64 * b).sum::<i64>());
        let Some(first) = it.next() else {
            return Some(None);
        };
        it.all(|x| x == first).then_some(Some(first))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| **k > 0)
                    .map(|(i, k)| {
                        if *k == 1 {
                            format!("x{}", i + 1)
                        } else {
                            format!("x{}^{}", i + 1, k)
                        }
                    })
                    .collect();
                if mono.is_empty() {
                    c.to_string()
                } else if c.is_one() {
                    mono.join("*")
                } else {
                    format!("{}*{}", c, mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Polynomial-coefficient exterior object.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SuperPoly {
    pub dim: usize,
    pub terms: BTreeMap<(Vec<u32>, u32), Coefficient>,
}

pub type ClassicalPolyvector = SuperPoly;
pub type ClassicalForm = SuperPoly;

fn count_bits_below(mask: u32, i: usize) -> u32 {
    (mask & ((1u32 << (i - 1)) - 1)).count_ones()
}

fn count_bits_above(mask: u32, i: usize) -> u32 {
    (mask >> i).count_ones()
}

fn sgn(n: u32) -> Coefficient {
    if n.is_multiple_of(2) {
        Coefficient::one()
    } else {
        -Coefficient::one()
    }
}

impl SuperPoly {
    pub fn zero(dim: usize) -> Self {
        SuperPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: &Poly) -> Self {
        let mut s = SuperPoly::zero(p.dim);
        for (e, c) in &p.terms {
            s.add_term(e.clone(), 0, c.clone());
        }
        s
    }

    /// Single odd generator `e_i`.
    pub fn odd(dim: usize, i: usize) -> Self {
        let mut s = SuperPoly::zero(dim);
        s.add_term(vec![0; dim], 1 << (i - 1), Coefficient::one());
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Vec<u32>, mask: u32, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        let key = (e, mask);
        let v = self
            .terms
            .entry(key.clone())
            .or_insert_with(Coefficient::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, o: &SuperPoly) -> SuperPoly {
        let mut p = self.clone();
        for ((e, m), c) in &o.terms {
            p.add_term(e.clone(), *m, c.clone());
        }
        p
    }

    pub fn sub(&self, o: &SuperPoly) -> SuperPoly {
        self.add(&o.scale(&-Coefficient::one()))
    }

    pub fn scale(&self, s: &Coefficient) -> SuperPoly {
        let mut p = SuperPoly::zero(self.dim);
        for ((e, m), c) in &self.terms {
            p.add_term(e.clone(), *m, c * s);
        }
        p
    }

    pub fn mul(&self, o: &SuperPoly) -> SuperPoly {
        let mut p = SuperPoly::zero(self.dim);
        for ((e1, m1), c1) in &self.terms {
            for ((e2, m2), c2) in &o.terms {
                if m1 & m2 != 0 {
                    continue;
                }
                // move each odd factor of the right operand past the larger ones on the left
                let mut swaps = 0;
                for j in 0..self.dim {
                    if m2 & (1 << j) != 0 {
                        swaps += count_bits_above(*m1, j + 1);
                    }
                }
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, m1 | m2, sgn(swaps) * c1 * c2);
            }
        }
        p
    }

    pub fn derive_x(&self, i: usize) -> SuperPoly {
        let mut p = SuperPoly::zero(self.dim);
        for ((e, m), c) in &self.terms {
            if e[i - 1] > 0 {
                let mut f = e.clone();
                f[i - 1] -= 1;
                p.add_term(f, *m, c * Coefficient::from_integer(e[i - 1].into()));
            }
        }
        p
    }

    /// Left derivative in `e_i`.
    pub fn derive_odd_left(&self, i: usize) -> SuperPoly {
        let bit = 1u32 << (i - 1);
        let mut p = SuperPoly::zero(self.dim);
        for ((e, m), c) in &self.terms {
            if m & bit != 0 {
                p.add_term(e.clone(), m & !bit, sgn(count_bits_below(*m, i)) * c);
            }
        }
        p
    }

    /// Right derivative in `e_i`.
    pub fn derive_odd_right(&self, i: usize) -> SuperPoly {
        let bit = 1u32 << (i - 1);
        let mut p = SuperPoly::zero(self.dim);
        for ((e, m), c) in &self.terms {
            if m & bit != 0 {
                p.add_term(e.clone(), m & !bit, sgn(count_bits_above(*m, i)) * c);
            }
        }
        p
    }

    pub fn odd_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|(_, m)| m.count_ones());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Split into components of fixed odd degree.
    pub fn by_odd_degree(&self) -> BTreeMap<u32, SuperPoly> {
        let mut out: BTreeMap<u32, SuperPoly> = BTreeMap::new();
        for ((e, m), c) in &self.terms {
            out.entry(m.count_ones())
                .or_insert_with(|| SuperPoly::zero(self.dim))
                .add_term(e.clone(), *m, c.clone());
        }
        out
    }

    /// Weight-0 chiral state: `x_i -> x^i_0`, `e_i -> psi^i_0` (polyvectors) or `phi^i_0`
    /// (forms).
    pub fn to_state(&self, sheaf: Sheaf) -> State {
        let odd_kind = match sheaf {
            Sheaf::Theta => Kind::Psi,
            Sheaf::Omega => Kind::Phi,
        };
        let mut s = State::zero(sheaf, self.dim);
        for ((e, m), c) in &self.terms {
            let mut syms = Vec::new();
            for (i, k) in e.iter().enumerate() {
                for _ in 0..*k {
                    syms.push(Symbol::new(Kind::X, i + 1, 0));
                }
                if m & (1 << i) != 0 {
                    syms.push(Symbol::new(odd_kind, i + 1, 0));
                }
            }
            let (sign, mono) = Monomial::from_product(&syms).expect("distinct odd symbols");
            s.add_term(mono, if sign < 0 { -c.clone() } else { c.clone() });
        }
        s
    }

    /// Inverse of [`SuperPoly::to_state`]; `None` if the state has positive-weight symbols.
    pub fn from_state(s: &State) -> Option<SuperPoly> {
        let odd_kind = match s.sheaf() {
            Sheaf::Theta => Kind::Psi,
            Sheaf::Omega => Kind::Phi,
        };
        let mut p = SuperPoly::zero(s.dim());
        for (mono, c) in s.terms() {
            let mut e = vec![0u32; s.dim()];
            let mut mask = 0u32;
            for (sym, k) in mono.factors() {
                if sym.weight != 0 {
                    return None;
                }
                match sym.kind {
                    Kind::X => e[sym.coord - 1] += k,
                    k2 if k2 == odd_kind => mask |= 1 << (sym.coord - 1),
                    _ => return None,
                }
            }
            // canonical state order interleaves x's (even) with odd symbols by coordinate,
            // which keeps the odd symbols in increasing order
            p.add_term(e, mask, c.clone());
        }
        Some(p)
    }
}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((e, m), c)| {
                let mut factors = Vec::new();
                for (i, k) in e.iter().enumerate() {
                    match k {
                        0 => {}
                        1 => factors.push(format!("x{}", i + 1)),
                        k => factors.push(format!("x{}^{}", i + 1, k)),
                    }
                }
                for i in 0..self.dim {
                    if m & (1 << i) != 0 {
                        factors.push(format!("e{}", i + 1));
                    }
                }
                if factors.is_empty() {
                    c.to_string()
                } else {
                    format!("{}*{}", c, factors.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Schouten bracket `[P, Q] = sum_i (d_l P/d e_i)(dQ/dx_i) + (-1)^|P| (dP/dx_i)(d_l Q/d e_i)`,
/// `|P|` the polyvector degree.
pub fn schouten(p: &SuperPoly, q: &SuperPoly) -> SuperPoly {
    let mut out = SuperPoly::zero(p.dim);
    for i in 1..=p.dim {
        out = out.add(&p.derive_odd_left(i).mul(&q.derive_x(i)));
        for (k, part) in p.by_odd_degree() {
            let t = part.derive_x(i).mul(&q.derive_odd_left(i));
            out = if k % 2 == 0 { out.add(&t) } else { out.sub(&t) };
        }
    }
    out
}

/// Bivector `sum_{i<j} pi_ij e_i e_j` from the upper triangle.
pub fn bivector(dim: usize, upper: &BTreeMap<(usize, usize), Poly>) -> SuperPoly {
    let mut out = SuperPoly::zero(dim);
    for ((i, j), p) in upper {
        let term = SuperPoly::from_poly(p)
            .mul(&SuperPoly::odd(dim, *i))
            .mul(&SuperPoly::odd(dim, *j));
        out = out.add(&term);
    }
    out
}

/// Lichnerowicz differential `[pi, -]`.
pub fn lichnerowicz(pi: &SuperPoly, v: &SuperPoly) -> SuperPoly {
    schouten(pi, v)
}

/// de Rham differential on forms.
pub fn de_rham(w: &SuperPoly) -> SuperPoly {
    let mut out = SuperPoly::zero(w.dim);
    for i in 1..=w.dim {
        out = out.add(&SuperPoly::odd(w.dim, i).mul(&w.derive_x(i)));
    }
    out
}

/// Contraction by a polyvector: each term `f e_{i_1} .. e_{i_k}` acts as
/// `f iota_{i_1} .. iota_{i_k}` (rightmost first).
pub fn contract(pv: &SuperPoly, w: &SuperPoly) -> SuperPoly {
    let mut out = SuperPoly::zero(w.dim);
    for ((e, m), c) in &pv.terms {
        let mut t = w.clone();
        for i in (1..=w.dim).rev() {
            if m & (1 << (i - 1)) != 0 {
                t = t.derive_odd_left(i);
            }
        }
        let mut coeff = SuperPoly::zero(w.dim);
        coeff.add_term(e.clone(), 0, c.clone());
        out = out.add(&coeff.mul(&t));
    }
    out
}

/// Lie derivative `[d, iota_v]` (graded commutator; `iota_v` has parity of the degree of v).
pub fn lie_derivative(pv: &SuperPoly, w: &SuperPoly) -> SuperPoly {
    let deg = pv.odd_degree().unwrap_or(0);
    let a = de_rham(&contract(pv, w));
    let b = contract(pv, &de_rham(w));
    if deg.is_multiple_of(2) {
        a.sub(&b)
    } else {
        a.add(&b)
    }
}

/// Koszul–Brylinski differential `[d, iota_pi]`.
pub fn koszul_brylinski(pi: &SuperPoly, w: &SuperPoly) -> SuperPoly {
    lie_derivative(pi, w)
}

/// Anchor `pi(alpha) = sum_{i,j} pi_ij alpha_i d/dx_j` with `pi_ji = -pi_ij`.
pub fn anchor(dim: usize, upper: &BTreeMap<(usize, usize), Poly>, alpha: &[Poly]) -> SuperPoly {
    let mut out = SuperPoly::zero(dim);
    for ((i, j), p) in upper {
        let a = SuperPoly::from_poly(&p.mul(&alpha[*i - 1])).mul(&SuperPoly::odd(dim, *j));
        let b = SuperPoly::from_poly(&p.mul(&alpha[*j - 1])).mul(&SuperPoly::odd(dim, *i));
        out = out.add(&a).sub(&b);
    }
    out
}

/// All monomials `x^a e^S` of polynomial degree at most `max_deg`.
pub fn monomials(dim: usize, max_deg: u32) -> Vec<SuperPoly> {
    let mut exps: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for e in &exps {
            let used: u32 = e.iter().sum();
            for k in 0..=(max_deg - used) {
                let mut f = e.clone();
                f.push(k);
                next.push(f);
            }
        }
        exps = next;
    }
    let mut out = Vec::new();
    for e in exps {
        for mask in 0..(1u32 << dim) {
            let mut s = SuperPoly::zero(dim);
            s.add_term(e.clone(), mask, Coefficient::one());
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::rat;

    fn x(dim: usize, i: usize) -> SuperPoly {
        SuperPoly::from_poly(&Poly::var(dim, i))
    }

    fn one(dim: usize) -> SuperPoly {
        SuperPoly::from_poly(&Poly::constant(dim, rat(1)))
    }

    #[test]
    fn schouten_basic() {
        assert_eq!(schouten(&SuperPoly::odd(1, 1), &x(1, 1)), one(1));
        assert_eq!(schouten(&x(1, 1), &SuperPoly::odd(1, 1)), one(1));
        let e12 = SuperPoly::odd(2, 1).mul(&SuperPoly::odd(2, 2));
        assert_eq!(
            schouten(&e12, &x(2, 2)),
            SuperPoly::odd(2, 1).scale(&rat(-1))
        );
    }

    #[test]
    fn example_structures_are_poisson() {
        let mut upper = BTreeMap::new();
        upper.insert((1, 2), Poly::var(2, 2));
        let pi = bivector(2, &upper);
        assert!(schouten(&pi, &pi).is_zero());
        upper.insert((1, 2), Poly::var(2, 1).mul(&Poly::var(2, 2)));
        let pi = bivector(2, &upper);
        assert!(schouten(&pi, &pi).is_zero());
        // a non-Poisson bivector in three dimensions
        let mut upper3 = BTreeMap::new();
        upper3.insert((1, 2), Poly::constant(3, rat(1)));
        upper3.insert((2, 3), Poly::var(3, 2));
        let pi3 = bivector(3, &upper3);
        assert!(!schouten(&pi3, &pi3).is_zero());
        // linear Poisson structure of a three-dimensional Lie algebra
        let mut lin = BTreeMap::new();
        lin.insert((1, 2), Poly::var(3, 3));
        lin.insert((2, 3), Poly::var(3, 1));
        lin.insert((1, 3), Poly::constant(3, rat(1)));
        let lin = bivector(3, &lin);
        assert!(schouten(&lin, &lin).is_zero());
    }

    #[test]
    fn de_rham_squares_to_zero() {
        for m in monomials(2, 3) {
            assert!(de_rham(&de_rham(&m)).is_zero());
        }
    }

    #[test]
    fn koszul_brylinski_squares_to_zero_and_commutes_with_d() {
        let mut upper = BTreeMap::new();
        upper.insert((1, 2), Poly::var(2, 2));
        let pi = bivector(2, &upper);
        for m in monomials(2, 3) {
            let l = |w: &SuperPoly| koszul_brylinski(&pi, w);
            assert!(l(&l(&m)).is_zero());
            assert_eq!(de_rham(&l(&m)), l(&de_rham(&m)).scale(&rat(-1)));
        }
    }

    #[test]
    fn anchor_of_dx1_is_euler_field() {
        let mut upper = BTreeMap::new();
        upper.insert((1, 2), Poly::var(2, 2));
        let alpha = vec![Poly::constant(2, rat(1)), Poly::zero(2)];
        let eta = anchor(2, &upper, &alpha);
        assert_eq!(eta, x(2, 2).mul(&SuperPoly::odd(2, 2)));
    }

    #[test]
    fn state_round_trip() {
        for m in monomials(2, 2) {
            for sheaf in [Sheaf::Omega, Sheaf::Theta] {
                assert_eq!(SuperPoly::from_state(&m.to_state(sheaf)).unwrap(), m);
            }
        }
    }
}
