//! Fock-space states of the chiral de Rham complex and of chiral polyvectors on affine space.
//!
//! A state is a finite rational combination of monomials in the creation symbols of one
//! sheaf. Symbols are labelled by the conformal weight they carry, so `x1_0` is the weight-0
//! coordinate boson and `psi2_1` the weight-1 fermion of the second coordinate.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational scalar. `BigRational` keeps lowest terms with a positive denominator.
pub type Coefficient = BigRational;

pub fn rat(n: i64) -> Coefficient {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Coefficient {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sheaf {
    /// chiral de Rham complex
    Omega,
    /// chiral polyvectors
    Theta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    X,
    Y,
    Phi,
    Psi,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::X, Kind::Y, Kind::Phi, Kind::Psi];

    pub fn is_odd(self) -> bool {
        matches!(self, Kind::Phi | Kind::Psi)
    }

    /// The kind whose modes have a nonzero supercommutator with this one.
    pub fn partner(self) -> Kind {
        match self {
            Kind::X => Kind::Y,
            Kind::Y => Kind::X,
            Kind::Phi => Kind::Psi,
            Kind::Psi => Kind::Phi,
        }
    }

    pub fn charge_sign(self) -> i64 {
        match self {
            Kind::X | Kind::Phi => 1,
            Kind::Y | Kind::Psi => -1,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Kind::X => "x",
            Kind::Y => "y",
            Kind::Phi => "phi",
            Kind::Psi => "psi",
        }
    }
}

impl Sheaf {
    /// Weight of the generating field of `kind`; the creation symbols are those of weight at
    /// least this value.
    pub fn min_weight(self, kind: Kind) -> i64 {
        match (self, kind) {
            (_, Kind::X) => 0,
            (_, Kind::Y) => 1,
            (Sheaf::Omega, Kind::Phi) | (Sheaf::Theta, Kind::Psi) => 0,
            (Sheaf::Omega, Kind::Psi) | (Sheaf::Theta, Kind::Phi) => 1,
        }
    }

    pub fn degree(self, kind: Kind) -> i64 {
        match (self, kind) {
            (_, Kind::X) | (_, Kind::Y) => 0,
            (Sheaf::Omega, Kind::Phi) | (Sheaf::Theta, Kind::Psi) => 1,
            (Sheaf::Omega, Kind::Psi) | (Sheaf::Theta, Kind::Phi) => -1,
        }
    }

    pub fn is_creation(self, kind: Kind, weight: i64) -> bool {
        weight >= self.min_weight(kind)
    }
}

/// A creation symbol: generator kind, coordinate (1-based) and conformal weight.
///
/// The derived order is (coord, kind, weight), which fixes canonical monomial order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub coord: usize,
    pub kind: Kind,
    pub weight: u32,
}

impl Symbol {
    pub fn new(kind: Kind, coord: usize, weight: u32) -> Self {
        Symbol {
            coord,
            kind,
            weight,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.kind.is_odd()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}_{}", self.kind.token(), self.coord, self.weight)
    }
}

/// Sorted product of creation symbols with exponents (odd symbols have exponent 1).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn symbol(s: Symbol) -> Self {
        Monomial(vec![(s, 1)])
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Build from an ordered product of symbols, returning the Koszul sign of sorting
    /// (or `None` when an odd symbol repeats).
    pub fn from_product(symbols: &[Symbol]) -> Option<(i32, Monomial)> {
        let mut acc = (1, Monomial::one());
        for s in symbols.iter().rev() {
            let (sign, m) = Monomial::symbol(*s).mul(&acc.1)?;
            acc = (acc.0 * sign, m);
        }
        Some(acc)
    }

    /// Super-commutative product `self * other`, with the Koszul sign of reordering.
    pub fn mul(&self, other: &Monomial) -> Option<(i32, Monomial)> {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let mut sign = 1;
        // odd symbols of `self` not yet emitted; each odd symbol of `other` that is emitted
        // first must jump over them
        let mut pending_odd_self = self.0.iter().filter(|(s, _)| s.is_odd()).count();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let take_self = match (self.0.get(i), other.0.get(j)) {
                (Some(a), Some(b)) => {
                    if a.0 == b.0 {
                        if a.0.is_odd() {
                            return None;
                        }
                        out.push((a.0, a.1 + b.1));
                        i += 1;
                        j += 1;
                        continue;
                    }
                    a.0 < b.0
                }
                (Some(_), None) => true,
                _ => false,
            };
            if take_self {
                if self.0[i].0.is_odd() {
                    pending_odd_self -= 1;
                }
                out.push(self.0[i]);
                i += 1;
            } else {
                if other.0[j].0.is_odd() && pending_odd_self % 2 == 1 {
                    sign = -sign;
                }
                out.push(other.0[j]);
                j += 1;
            }
        }
        Some((sign, Monomial(out)))
    }

    /// Left partial derivative with respect to `s`: returns the multiplicity factor (signed
    /// for odd symbols) and the reduced monomial.
    pub fn derive(&self, s: &Symbol) -> Option<(i64, Monomial)> {
        let pos = self.0.iter().position(|(t, _)| t == s)?;
        let mut v = self.0.clone();
        let e = v[pos].1;
        let factor = if s.is_odd() {
            let before = self.0[..pos].iter().filter(|(t, _)| t.is_odd()).count();
            if before % 2 == 0 {
                1
            } else {
                -1
            }
        } else {
            e as i64
        };
        if e == 1 {
            v.remove(pos);
        } else {
            v[pos].1 -= 1;
        }
        Some((factor, Monomial(v)))
    }

    pub fn exponent(&self, s: &Symbol) -> u32 {
        self.0
            .iter()
            .find(|(t, _)| t == s)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn weight(&self) -> i64 {
        self.0
            .iter()
            .map(|(s, e)| s.weight as i64 * *e as i64)
            .sum()
    }

    pub fn degree(&self, sheaf: Sheaf) -> i64 {
        self.0
            .iter()
            .map(|(s, e)| sheaf.degree(s.kind) * *e as i64)
            .sum()
    }

    pub fn odd_count(&self) -> usize {
        self.0.iter().filter(|(s, _)| s.is_odd()).count()
    }

    pub fn parity(&self) -> u8 {
        (self.odd_count() % 2) as u8
    }

    pub fn charge(&self, dim: usize) -> Vec<i64> {
        let mut c = vec![0; dim];
        for (s, e) in &self.0 {
            c[s.coord - 1] += s.kind.charge_sign() * *e as i64;
        }
        c
    }

    pub fn grading(&self, sheaf: Sheaf, dim: usize) -> GradingVector {
        GradingVector {
            charge: self.charge(dim),
            weight: self.weight(),
            degree: self.degree(sheaf),
            parity: self.parity(),
        }
    }

    /// Flat list of symbols, bosons repeated by exponent.
    pub fn expanded(&self) -> Vec<Symbol> {
        self.0
            .iter()
            .flat_map(|(s, e)| std::iter::repeat_n(*s, *e as usize))
            .collect()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(s, e)| {
                if *e == 1 {
                    s.to_string()
                } else {
                    format!("{s}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradingVector {
    pub charge: Vec<i64>,
    pub weight: i64,
    pub degree: i64,
    /// 0 even, 1 odd
    pub parity: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Grade {
    Zero,
    Homogeneous(GradingVector),
    /// homogeneous components of an inhomogeneous state
    Mixed(Vec<(GradingVector, State)>),
}

/// Immutable element of the Fock space of one sheaf on affine N-space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    sheaf: Sheaf,
    dim: usize,
    terms: BTreeMap<Monomial, Coefficient>,
}

impl State {
    pub fn zero(sheaf: Sheaf, dim: usize) -> Self {
        State {
            sheaf,
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn vacuum(sheaf: Sheaf, dim: usize) -> Self {
        State::from_monomial(sheaf, dim, Monomial::one(), Coefficient::one())
    }

    pub fn from_monomial(sheaf: Sheaf, dim: usize, m: Monomial, c: Coefficient) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        State { sheaf, dim, terms }
    }

    pub fn from_terms(
        sheaf: Sheaf,
        dim: usize,
        terms: impl IntoIterator<Item = (Monomial, Coefficient)>,
    ) -> Self {
        let mut s = State::zero(sheaf, dim);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    /// Single generator; fails below the minimal weight of the kind in this sheaf.
    pub fn generator(
        sheaf: Sheaf,
        dim: usize,
        kind: Kind,
        coord: usize,
        weight: i64,
    ) -> Result<Self> {
        if coord < 1 || coord > dim {
            return Err(Error::BadCoordinate { coord, dim });
        }
        let min = sheaf.min_weight(kind);
        if weight < min {
            return Err(Error::OutOfRangeWeight {
                sheaf,
                kind,
                weight,
                min,
            });
        }
        Ok(State::from_monomial(
            sheaf,
            dim,
            Monomial::symbol(Symbol::new(kind, coord, weight as u32)),
            Coefficient::one(),
        ))
    }

    pub fn sheaf(&self) -> Sheaf {
        self.sheaf
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Coefficient> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Coefficient {
        self.terms.get(m).cloned().unwrap_or_else(Coefficient::zero)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn add_assign(&mut self, other: &State) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    fn check_compatible(&self, other: &State) -> Result<()> {
        if self.sheaf != other.sheaf || self.dim != other.dim {
            return Err(Error::SheafMismatch(format!(
                "{:?}/N={} vs {:?}/N={}",
                self.sheaf, self.dim, other.sheaf, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &State) -> Result<State> {
        self.check_compatible(other)?;
        let mut s = self.clone();
        s.add_assign(other);
        Ok(s)
    }

    pub fn sub(&self, other: &State) -> Result<State> {
        self.add(&other.scale(&-Coefficient::one()))
    }

    pub fn scale(&self, c: &Coefficient) -> State {
        if c.is_zero() {
            return State::zero(self.sheaf, self.dim);
        }
        State {
            sheaf: self.sheaf,
            dim: self.dim,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn neg(&self) -> State {
        self.scale(&-Coefficient::one())
    }

    /// Free super-commutative product.
    pub fn poly_mul(&self, other: &State) -> Result<State> {
        self.check_compatible(other)?;
        let mut out = State::zero(self.sheaf, self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((sign, m)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(m, if sign < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn grade(&self) -> Grade {
        let mut comps: BTreeMap<(i64, Vec<i64>, i64, u8), State> = BTreeMap::new();
        for (m, c) in &self.terms {
            let g = m.grading(self.sheaf, self.dim);
            comps
                .entry((g.weight, g.charge, g.degree, g.parity))
                .or_insert_with(|| State::zero(self.sheaf, self.dim))
                .add_term(m.clone(), c.clone());
        }
        let mut list: Vec<(GradingVector, State)> = comps
            .into_iter()
            .map(|((weight, charge, degree, parity), s)| {
                (
                    GradingVector {
                        charge,
                        weight,
                        degree,
                        parity,
                    },
                    s,
                )
            })
            .collect();
        match list.len() {
            0 => Grade::Zero,
            1 => Grade::Homogeneous(list.pop().unwrap().0),
            _ => Grade::Mixed(list),
        }
    }

    /// Split by conformal weight only.
    pub fn weight_components(&self) -> Vec<(i64, State)> {
        let mut comps: BTreeMap<i64, State> = BTreeMap::new();
        for (m, c) in &self.terms {
            comps
                .entry(m.weight())
                .or_insert_with(|| State::zero(self.sheaf, self.dim))
                .add_term(m.clone(), c.clone());
        }
        comps.into_iter().collect()
    }

    /// Conformal weight if all terms share one.
    pub fn weight(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(Monomial::weight);
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }

    /// Parity if all terms share one.
    pub fn parity(&self) -> Option<u8> {
        let mut it = self.terms.keys().map(Monomial::parity);
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }

    pub fn degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| m.degree(self.sheaf));
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }

    pub fn charge(&self) -> Option<Vec<i64>> {
        let mut it = self.terms.keys().map(|m| m.charge(self.dim));
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }

    /// Largest weight among terms (0 for the zero state).
    pub fn max_weight(&self) -> i64 {
        self.terms.keys().map(Monomial::weight).max().unwrap_or(0)
    }

    /// Reinterpret the monomials in another sheaf (identity on symbols). Used only where the
    /// symbols are admissible in both.
    pub(crate) fn relabel(&self, sheaf: Sheaf) -> State {
        State {
            sheaf,
            dim: self.dim,
            terms: self.terms.clone(),
        }
    }
}

fn fmt_coefficient(c: &Coefficient) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{}", fmt_coefficient(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_coefficient(&abs))?;
            }
        }
        Ok(())
    }
}

/// Generalized binomial coefficient C(n, j) for integer n and j >= 0.
pub fn binomial(n: i64, j: i64) -> BigInt {
    if j < 0 {
        return BigInt::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for t in 0..j {
        num *= BigInt::from(n - t);
        den *= BigInt::from(t + 1);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(kind: Kind, coord: usize, weight: u32) -> Symbol {
        Symbol::new(kind, coord, weight)
    }

    fn gen(sheaf: Sheaf, kind: Kind, coord: usize, weight: i64) -> State {
        State::generator(sheaf, 2, kind, coord, weight).unwrap()
    }

    #[test]
    fn generator_ranges() {
        assert!(matches!(
            State::generator(Sheaf::Omega, 1, Kind::Psi, 1, 0),
            Err(Error::OutOfRangeWeight { .. })
        ));
        let psi_bar = State::generator(Sheaf::Theta, 1, Kind::Psi, 1, 0).unwrap();
        assert_eq!(psi_bar.to_string(), "psi1_0");
        assert!(matches!(
            State::generator(Sheaf::Omega, 2, Kind::X, 3, 0),
            Err(Error::BadCoordinate { .. })
        ));
        let x2 = gen(Sheaf::Omega, Kind::X, 2, 0);
        assert_eq!(
            x2.grade(),
            Grade::Homogeneous(GradingVector {
                charge: vec![0, 1],
                weight: 0,
                degree: 0,
                parity: 0
            })
        );
    }

    #[test]
    fn odd_square_and_koszul_sign() {
        let p1 = gen(Sheaf::Omega, Kind::Phi, 1, 0);
        let p2 = gen(Sheaf::Omega, Kind::Phi, 2, 0);
        assert!(p1.poly_mul(&p1).unwrap().is_zero());
        assert_eq!(p1.poly_mul(&p2).unwrap(), p2.poly_mul(&p1).unwrap().neg());
    }

    #[test]
    fn v_vector_grading() {
        let v = gen(Sheaf::Omega, Kind::X, 1, 1)
            .poly_mul(&gen(Sheaf::Omega, Kind::Psi, 1, 1))
            .unwrap()
            .sub(
                &gen(Sheaf::Omega, Kind::X, 2, 1)
                    .poly_mul(&gen(Sheaf::Omega, Kind::Psi, 2, 1))
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(v.to_string(), "x1_1*psi1_1 - x2_1*psi2_1");
        match v.grade() {
            Grade::Homogeneous(g) => {
                assert_eq!(g.weight, 2);
                assert_eq!(g.charge, vec![0, 0]);
                assert_eq!(g.degree, -1);
                assert_eq!(g.parity, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vacuum_and_mixed() {
        let vac = State::vacuum(Sheaf::Omega, 2);
        assert_eq!(
            vac.grade(),
            Grade::Homogeneous(GradingVector {
                charge: vec![0, 0],
                weight: 0,
                degree: 0,
                parity: 0
            })
        );
        let mixed = vac.add(&gen(Sheaf::Omega, Kind::X, 1, 1)).unwrap();
        assert!(matches!(mixed.grade(), Grade::Mixed(ref v) if v.len() == 2));
    }

    #[test]
    fn sheaf_mismatch() {
        let a = State::vacuum(Sheaf::Omega, 2);
        let b = State::vacuum(Sheaf::Theta, 2);
        assert!(matches!(a.poly_mul(&b), Err(Error::SheafMismatch(_))));
    }

    fn perm_sign(p: &[usize]) -> i32 {
        let mut s = 1;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    s = -s;
                }
            }
        }
        s
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = vec![];
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn sign_coherence_brute_force() {
        let odd = [
            sym(Kind::Phi, 1, 0),
            sym(Kind::Psi, 1, 1),
            sym(Kind::Phi, 2, 3),
            sym(Kind::Psi, 2, 2),
        ];
        let mut sorted = odd.to_vec();
        sorted.sort();
        for n in 1..=4 {
            for p in permutations(n) {
                let written: Vec<Symbol> = p.iter().map(|&i| sorted[i]).collect();
                let (sign, m) = Monomial::from_product(&written).unwrap();
                assert_eq!(sign, perm_sign(&p));
                // idempotence
                let (s2, m2) = Monomial::from_product(&m.expanded()).unwrap();
                assert_eq!((s2, &m2), (1, &m));
            }
        }
        // bosons interleaved do not change the sign
        let written = vec![sorted[1], sym(Kind::X, 1, 0), sorted[0], sym(Kind::Y, 2, 1)];
        assert_eq!(Monomial::from_product(&written).unwrap().0, -1);
        assert!(Monomial::from_product(&[sorted[0], sorted[0]]).is_none());
    }

    #[test]
    fn left_derivative_signs() {
        let (_, m) = Monomial::from_product(&[sym(Kind::Phi, 1, 0), sym(Kind::Phi, 2, 0)]).unwrap();
        assert_eq!(m.derive(&sym(Kind::Phi, 1, 0)).unwrap().0, 1);
        assert_eq!(m.derive(&sym(Kind::Phi, 2, 0)).unwrap().0, -1);
        let (_, b) = Monomial::from_product(&[sym(Kind::X, 1, 0), sym(Kind::X, 1, 0)]).unwrap();
        assert_eq!(b.derive(&sym(Kind::X, 1, 0)).unwrap().0, 2);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(-1, 3), BigInt::from(-1));
        assert_eq!(binomial(-2, 2), BigInt::from(3));
        assert_eq!(binomial(2, 3), BigInt::from(0));
        assert_eq!(binomial(7, 0), BigInt::from(1));
    }
}
