//! Vertex-superalgebra structure of the free beta-gamma / b-c system.
//!
//! Modes are labelled by the conformal weight they add: `G[k]` takes weight `w` to `w + k`.
//! Both sheaves share this one mode algebra,
//!
//! ```text
//! [Y[m], X[k]] = delta(m + k, 0),   {Psi[m], Phi[k]} = delta(m + k, 0),
//! ```
//!
//! and differ only in which modes create: `G[k]` creates iff `k` is at least the weight of the
//! generating field of `G` in that sheaf. A non-creation mode acts as the (left) derivative
//! with respect to its partner symbol; for `X[k]` the derivative carries a minus sign.
//!
//! The field of a monomial state is the fully normal-ordered product of the derivative fields
//! of its symbols. For a symbol `G_m` of a generator of weight `h` the field is
//! `sum_k C(k - h, m - h) G[k] z^(k - m)`, so the weight-indexed mode `a[K]` of a monomial is a
//! sum over index tuples `(k_1, .., k_r)` with `sum k_s = K`. Applied to a monomial only
//! finitely many tuples contribute; [`apply_mode`] enumerates them.
//!
//! A state of one sheaf may act on the Fock space of the other sheaf: the mode expression is
//! kept (normal ordered for the source vacuum) and each mode acts on the target as either
//! creation or annihilation. This is the transport of polyvector modes to operators on
//! chiral forms.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fock::{binomial, Coefficient, Grade, Kind, Monomial, Sheaf, State, Symbol};

/// One factor of a normal-ordered monomial field.
#[derive(Clone, Copy, Debug)]
struct Factor {
    kind: Kind,
    coord: usize,
    /// weight label of the symbol
    m: i64,
    /// weight of the generating field in the source sheaf
    h: i64,
}

impl Factor {
    fn coefficient(&self, k: i64) -> BigInt {
        binomial(k - self.h, self.m - self.h)
    }
}

/// Action of the single mode `kind^coord[k]` on a target monomial.
fn act_single(
    target: Sheaf,
    kind: Kind,
    coord: usize,
    k: i64,
    mono: &Monomial,
) -> Option<(i64, Monomial)> {
    if target.is_creation(kind, k) {
        let (sign, m) = Monomial::symbol(Symbol::new(kind, coord, k as u32)).mul(mono)?;
        Some((sign as i64, m))
    } else {
        // pairs with the partner creation symbol of weight -k
        if -k < 0 {
            return None;
        }
        let partner = Symbol::new(kind.partner(), coord, (-k) as u32);
        let (f, m) = mono.derive(&partner)?;
        let f = if kind == Kind::X { -f } else { f };
        Some((f, m))
    }
}

struct ModeJob<'a> {
    target: Sheaf,
    /// factors in application order (rightmost first)
    seq: Vec<(Factor, bool)>,
    /// for creation-role factors: sum of the minimal indices of the creation factors after
    /// this position in `seq`
    min_rest: Vec<i64>,
    total: i64,
    out: &'a mut Vec<(BigInt, Monomial)>,
}

impl ModeJob<'_> {
    fn run(&mut self, pos: usize, used: i64, coef: BigInt, mono: Monomial) {
        if pos == self.seq.len() {
            if used == self.total {
                self.out.push((coef, mono));
            }
            return;
        }
        let (f, annihilation_role) = self.seq[pos];
        let mut candidates: Vec<i64> = Vec::new();
        if annihilation_role {
            // source annihilation: k < h; on the target either a creation mode (k >= h_tgt)
            // or a derivative hitting a symbol present in `mono`
            let h_tgt = self.target.min_weight(f.kind);
            for k in h_tgt..f.h {
                candidates.push(k);
            }
            let partner = f.kind.partner();
            for (s, _) in mono.factors() {
                if s.kind == partner && s.coord == f.coord {
                    let k = -(s.weight as i64);
                    if k < f.h && k < h_tgt {
                        candidates.push(k);
                    }
                }
            }
        } else {
            let lo = f.m.max(f.h);
            let remaining = self.total - used;
            let hi = remaining - self.min_rest[pos];
            let last_creation = !self.seq[pos + 1..].iter().any(|(_, a)| !*a);
            if last_creation {
                if remaining >= lo {
                    candidates.push(remaining);
                }
            } else {
                candidates.extend(lo..=hi);
            }
        }
        for k in candidates {
            let c = f.coefficient(k);
            if c.is_zero() {
                continue;
            }
            if let Some((g, m2)) = act_single(self.target, f.kind, f.coord, k, &mono) {
                self.run(pos + 1, used + k, &coef * c * BigInt::from(g), m2);
            }
        }
    }
}

/// Apply the weight-indexed mode `source[shift]` (normal ordered for `source`'s vacuum) to a
/// state `b` of the `target` sheaf.
pub fn apply_mode(source: &State, shift: i64, target: Sheaf, b: &State) -> State {
    let mut out = State::zero(target, b.dim());
    if source.is_zero() || b.is_zero() {
        return out;
    }
    let src = source.sheaf();
    for (am, ac) in source.terms() {
        let factors: Vec<Factor> = am
            .expanded()
            .into_iter()
            .map(|s| Factor {
                kind: s.kind,
                coord: s.coord,
                m: s.weight as i64,
                h: src.min_weight(s.kind),
            })
            .collect();
        let r = factors.len();
        if r == 0 {
            // vacuum field is the identity
            if shift == 0 {
                out.add_assign(&b.scale(ac).relabel(target));
            }
            continue;
        }
        for mask in 0u32..(1 << r) {
            let is_ann = |i: usize| mask & (1 << i) != 0;
            // sign of moving annihilators to the right of creators
            let mut sign = 1i64;
            for i in 0..r {
                if is_ann(i) && factors[i].kind.is_odd() {
                    for (j, fj) in factors.iter().enumerate().skip(i + 1) {
                        if !is_ann(j) && fj.kind.is_odd() {
                            sign = -sign;
                        }
                    }
                }
            }
            let mut ordered: Vec<(Factor, bool)> = Vec::with_capacity(r);
            ordered.extend((0..r).filter(|&i| !is_ann(i)).map(|i| (factors[i], false)));
            ordered.extend((0..r).filter(|&i| is_ann(i)).map(|i| (factors[i], true)));
            ordered.reverse();
            let mut min_rest = vec![0i64; r];
            let mut acc = 0;
            for i in (0..r).rev() {
                min_rest[i] = acc;
                if !ordered[i].1 {
                    acc += ordered[i].0.m.max(ordered[i].0.h);
                }
            }
            let mut results = Vec::new();
            for (bm, bc) in b.terms() {
                results.clear();
                let mut job = ModeJob {
                    target,
                    seq: ordered.clone(),
                    min_rest: min_rest.clone(),
                    total: shift,
                    out: &mut results,
                };
                job.run(0, 0, BigInt::from(sign), bm.clone());
                for (c, m) in results.drain(..) {
                    out.add_term(m, Coefficient::from_integer(c) * ac * bc);
                }
            }
        }
    }
    out
}

/// `a_(n) b`. Inhomogeneous `a` is split by conformal weight.
pub fn nth_product(a: &State, n: i64, b: &State) -> Result<State> {
    if a.sheaf() != b.sheaf() || a.dim() != b.dim() {
        return Err(Error::SheafMismatch(format!(
            "{:?}/N={} vs {:?}/N={}",
            a.sheaf(),
            a.dim(),
            b.sheaf(),
            b.dim()
        )));
    }
    let mut out = State::zero(b.sheaf(), b.dim());
    for (w, comp) in a.weight_components() {
        out.add_assign(&apply_mode(&comp, w - n - 1, b.sheaf(), b));
    }
    Ok(out)
}

/// Translation operator: the even derivation with `T(G_m) = (m + 1 - h) G_(m+1)`.
pub fn translate(a: &State) -> State {
    let sheaf = a.sheaf();
    let mut out = State::zero(sheaf, a.dim());
    for (m, c) in a.terms() {
        for (s, _) in m.factors() {
            let h = sheaf.min_weight(s.kind);
            let factor = s.weight as i64 + 1 - h;
            let (f, rest) = m.derive(s).expect("symbol present");
            let raised = Symbol::new(s.kind, s.coord, s.weight + 1);
            if let Some((sign, prod)) = Monomial::symbol(raised).mul(&rest) {
                out.add_term(
                    prod,
                    c * Coefficient::from_integer(BigInt::from(f * factor * sign as i64)),
                );
            }
        }
    }
    out
}

/// Grading shift of an operator acting on a fixed sheaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorShift {
    pub weight: i64,
    pub degree: i64,
    pub charge: Vec<i64>,
    pub parity: u8,
}

/// Linear endomorphism of the Fock space of one sheaf.
#[derive(Clone)]
pub enum Operator {
    Zero {
        sheaf: Sheaf,
        dim: usize,
    },
    Identity {
        sheaf: Sheaf,
        dim: usize,
    },
    /// weight-indexed mode `source[shift]` acting on `target`
    Mode {
        source: Arc<State>,
        shift: i64,
        target: Sheaf,
    },
    Scaled(Coefficient, Arc<Operator>),
    Sum(Vec<Operator>),
    /// `A ∘ B`
    Compose(Arc<Operator>, Arc<Operator>),
    /// super-commutator `AB - (-1)^{|A||B|} BA`
    Commutator(Arc<Operator>, Arc<Operator>),
    /// externally defined map with a declared grading shift
    Custom {
        name: String,
        shift: OperatorShift,
        map: Arc<dyn Fn(&State) -> State + Send + Sync>,
    },
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Zero { .. } => write!(f, "0"),
            Operator::Identity { .. } => write!(f, "id"),
            Operator::Mode { source, shift, .. } => write!(f, "({source})[{shift}]"),
            Operator::Scaled(c, a) => write!(f, "{c}*{a:?}"),
            Operator::Sum(v) => write!(f, "Sum{v:?}"),
            Operator::Compose(a, b) => write!(f, "({a:?} . {b:?})"),
            Operator::Commutator(a, b) => write!(f, "[{a:?}, {b:?}]"),
            Operator::Custom { name, .. } => write!(f, "{name}"),
        }
    }
}

impl Operator {
    pub fn zero(sheaf: Sheaf, dim: usize) -> Self {
        Operator::Zero { sheaf, dim }
    }

    pub fn identity(sheaf: Sheaf, dim: usize) -> Self {
        Operator::Identity { sheaf, dim }
    }

    /// Weight-indexed mode of a (weight-homogeneous) state acting on `target`.
    pub fn mode(source: State, shift: i64, target: Sheaf) -> Self {
        Operator::Mode {
            source: Arc::new(source),
            shift,
            target,
        }
    }

    pub fn scaled(self, c: Coefficient) -> Self {
        Operator::Scaled(c, Arc::new(self))
    }

    pub fn plus(self, other: Operator) -> Self {
        match self {
            Operator::Sum(mut v) => {
                v.push(other);
                Operator::Sum(v)
            }
            s => Operator::Sum(vec![s, other]),
        }
    }

    pub fn minus(self, other: Operator) -> Self {
        self.plus(other.scaled(-Coefficient::one()))
    }

    pub fn compose(self, other: Operator) -> Self {
        Operator::Compose(Arc::new(self), Arc::new(other))
    }

    pub fn apply(&self, b: &State) -> State {
        match self {
            Operator::Zero { .. } => State::zero(b.sheaf(), b.dim()),
            Operator::Identity { .. } => b.clone(),
            Operator::Mode {
                source,
                shift,
                target,
            } => apply_mode(source, *shift, *target, b),
            Operator::Scaled(c, a) => a.apply(b).scale(c),
            Operator::Sum(v) => {
                let mut out = State::zero(b.sheaf(), b.dim());
                for a in v {
                    out.add_assign(&a.apply(b));
                }
                out
            }
            Operator::Compose(a, c) => a.apply(&c.apply(b)),
            Operator::Commutator(a, c) => {
                let ab = a.apply(&c.apply(b));
                let ba = c.apply(&a.apply(b));
                let odd_odd = a.parity() == 1 && c.parity() == 1;
                let mut out = ab;
                if odd_odd {
                    out.add_assign(&ba);
                } else {
                    out.add_assign(&ba.neg());
                }
                out
            }
            Operator::Custom { map, .. } => map(b),
        }
    }

    /// Parity (0 even, 1 odd); sums are assumed parity-homogeneous and report their first
    /// nonzero summand.
    pub fn parity(&self) -> u8 {
        match self {
            Operator::Zero { .. } | Operator::Identity { .. } => 0,
            Operator::Mode { source, .. } => source.parity().unwrap_or(0),
            Operator::Scaled(_, a) => a.parity(),
            Operator::Sum(v) => v
                .iter()
                .find(|a| !matches!(a, Operator::Zero { .. }))
                .map(|a| a.parity())
                .unwrap_or(0),
            Operator::Compose(a, b) | Operator::Commutator(a, b) => (a.parity() + b.parity()) % 2,
            Operator::Custom { shift, .. } => shift.parity,
        }
    }

    /// Grading shift on the Fock space of `sheaf` (N = `dim`), if homogeneous.
    pub fn shift(&self, sheaf: Sheaf, dim: usize) -> Option<OperatorShift> {
        match self {
            Operator::Zero { .. } => None,
            Operator::Identity { .. } => Some(OperatorShift {
                weight: 0,
                degree: 0,
                charge: vec![0; dim],
                parity: 0,
            }),
            Operator::Mode { source, shift, .. } => {
                if source.is_zero() {
                    return None;
                }
                let relabeled = source.relabel(sheaf);
                Some(OperatorShift {
                    weight: *shift,
                    degree: relabeled.degree()?,
                    charge: source.charge()?,
                    parity: source.parity()?,
                })
            }
            Operator::Scaled(c, a) => {
                if c.is_zero() {
                    None
                } else {
                    a.shift(sheaf, dim)
                }
            }
            Operator::Sum(v) => {
                let shifts: Vec<OperatorShift> =
                    v.iter().filter_map(|a| a.shift(sheaf, dim)).collect();
                let first = shifts.first()?.clone();
                shifts.iter().all(|s| *s == first).then_some(first)
            }
            Operator::Compose(a, b) | Operator::Commutator(a, b) => {
                let sa = a.shift(sheaf, dim)?;
                let sb = b.shift(sheaf, dim)?;
                Some(OperatorShift {
                    weight: sa.weight + sb.weight,
                    degree: sa.degree + sb.degree,
                    charge: sa
                        .charge
                        .iter()
                        .zip(&sb.charge)
                        .map(|(x, y)| x + y)
                        .collect(),
                    parity: (sa.parity + sb.parity) % 2,
                })
            }
            Operator::Custom { shift, .. } => Some(shift.clone()),
        }
    }
}

/// The operator `a_(n)` on `a`'s own sheaf.
pub fn mode_operator(a: &State, n: i64) -> Operator {
    let mut parts: Vec<Operator> = a
        .weight_components()
        .into_iter()
        .map(|(w, comp)| Operator::mode(comp, w - n - 1, a.sheaf()))
        .collect();
    match parts.len() {
        0 => Operator::zero(a.sheaf(), a.dim()),
        1 => parts.pop().unwrap(),
        _ => Operator::Sum(parts),
    }
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    Operator::Commutator(Arc::new(a.clone()), Arc::new(b.clone()))
}

/// Upper bound (exclusive) on `n` with `a_(n) b` possibly nonzero.
pub fn locality_bound(a: &State, b: &State) -> i64 {
    a.max_weight() + b.max_weight()
}

fn sign_pow(p: i64) -> Coefficient {
    if p.rem_euclid(2) == 0 {
        Coefficient::one()
    } else {
        -Coefficient::one()
    }
}

fn parity_of(s: &State) -> Result<i64> {
    match s.parity() {
        Some(p) => Ok(p as i64),
        None if s.is_zero() => Ok(0),
        None => Err(Error::Inhomogeneous(s.to_string())),
    }
}

/// Residual of the Borcherds identity
///
/// ```text
/// sum_j C(m,j) (a_(n+j) b)_(m+k-j) c
///   = sum_j (-1)^j C(n,j) [ a_(m+n-j) b_(k+j) c - (-1)^n (-1)^{|a||b|} b_(n+k-j) a_(m+j) c ].
/// ```
pub fn borcherds_residual(
    a: &State,
    b: &State,
    c: &State,
    m: i64,
    k: i64,
    n: i64,
) -> Result<State> {
    let pa = parity_of(a)?;
    let pb = parity_of(b)?;
    let wa = a.max_weight();
    let wb = b.max_weight();
    let wc = c.max_weight();
    let mut lhs = State::zero(c.sheaf(), c.dim());
    // a_(n+j) b vanishes once n + j >= wa + wb
    let jmax = (wa + wb - n).max(0);
    for j in 0..=jmax {
        let coef = binomial(m, j);
        if coef.is_zero() {
            continue;
        }
        let ab = nth_product(a, n + j, b)?;
        if ab.is_zero() {
            continue;
        }
        let t = nth_product(&ab, m + k - j, c)?;
        lhs.add_assign(&t.scale(&Coefficient::from_integer(coef)));
    }
    let mut rhs = State::zero(c.sheaf(), c.dim());
    // b_(k+j) c vanishes once k + j >= wb + wc, a_(m+j) c once m + j >= wa + wc
    let jmax1 = (wb + wc - k).max(0);
    let jmax2 = (wa + wc - m).max(0);
    let swap_sign = sign_pow(n) * sign_pow(pa * pb);
    for j in 0..=jmax1.max(jmax2) {
        let coef = Coefficient::from_integer(binomial(n, j)) * sign_pow(j);
        if coef.is_zero() {
            continue;
        }
        if j <= jmax1 {
            let bc = nth_product(b, k + j, c)?;
            if !bc.is_zero() {
                rhs.add_assign(&nth_product(a, m + n - j, &bc)?.scale(&coef));
            }
        }
        if j <= jmax2 {
            let ac = nth_product(a, m + j, c)?;
            if !ac.is_zero() {
                rhs.add_assign(&nth_product(b, n + k - j, &ac)?.scale(&(-(&coef * &swap_sign))));
            }
        }
    }
    lhs.sub(&rhs)
}

pub fn borcherds_check(a: &State, b: &State, c: &State, m: i64, k: i64, n: i64) -> Result<bool> {
    Ok(borcherds_residual(a, b, c, m, k, n)?.is_zero())
}

/// `[a_(m), b_(k)] c - sum_j C(m,j) (a_(j) b)_(m+k-j) c`.
pub fn commutator_formula_residual(
    a: &State,
    b: &State,
    c: &State,
    m: i64,
    k: i64,
) -> Result<State> {
    let lhs = commutator(&mode_operator(a, m), &mode_operator(b, k)).apply(c);
    let mut rhs = State::zero(c.sheaf(), c.dim());
    let jmax = locality_bound(a, b);
    for j in 0..jmax.max(0) {
        let coef = binomial(m, j);
        if coef.is_zero() {
            continue;
        }
        let ab = nth_product(a, j, b)?;
        rhs.add_assign(&nth_product(&ab, m + k - j, c)?.scale(&Coefficient::from_integer(coef)));
    }
    lhs.sub(&rhs)
}

/// Homogeneous components of a state (by full grading).
pub fn homogeneous_parts(a: &State) -> Vec<State> {
    match a.grade() {
        Grade::Zero => vec![],
        Grade::Homogeneous(_) => vec![a.clone()],
        Grade::Mixed(v) => v.into_iter().map(|(_, s)| s).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Kind::*;

    fn g(sheaf: Sheaf, dim: usize, kind: Kind, coord: usize, w: i64) -> State {
        State::generator(sheaf, dim, kind, coord, w).unwrap()
    }

    fn mul(a: &State, b: &State) -> State {
        a.poly_mul(b).unwrap()
    }

    #[test]
    fn vacuum_axioms_on_generators() {
        let vac = State::vacuum(Sheaf::Omega, 1);
        let x = g(Sheaf::Omega, 1, X, 1, 0);
        assert_eq!(nth_product(&x, -1, &vac).unwrap(), x);
        assert!(nth_product(&x, 0, &vac).unwrap().is_zero());
        assert_eq!(nth_product(&vac, -1, &x).unwrap(), x);
    }

    #[test]
    fn translation_examples() {
        let vac = State::vacuum(Sheaf::Omega, 1);
        assert!(translate(&vac).is_zero());
        assert_eq!(
            translate(&g(Sheaf::Omega, 1, X, 1, 0)),
            g(Sheaf::Omega, 1, X, 1, 1)
        );
        assert_eq!(
            translate(&g(Sheaf::Omega, 1, Phi, 1, 0)),
            g(Sheaf::Omega, 1, Phi, 1, 1)
        );
        // second derivative of x carries the factor 2
        assert_eq!(
            translate(&g(Sheaf::Omega, 1, X, 1, 1)),
            g(Sheaf::Omega, 1, X, 1, 2).scale(&crate::fock::rat(2))
        );
    }

    #[test]
    fn basic_pairings() {
        // y_(0) x = 1, psi_(0) phi = 1 in the de Rham sheaf
        let x = g(Sheaf::Omega, 1, X, 1, 0);
        let y = g(Sheaf::Omega, 1, Y, 1, 1);
        let phi = g(Sheaf::Omega, 1, Phi, 1, 0);
        let psi = g(Sheaf::Omega, 1, Psi, 1, 1);
        let vac = State::vacuum(Sheaf::Omega, 1);
        assert_eq!(nth_product(&y, 0, &x).unwrap(), vac);
        assert_eq!(nth_product(&x, 0, &y).unwrap(), vac.neg());
        assert_eq!(nth_product(&psi, 0, &phi).unwrap(), vac);
        assert_eq!(nth_product(&phi, 0, &psi).unwrap(), vac);
    }

    #[test]
    fn identity_and_multiplication_modes() {
        let vac = State::vacuum(Sheaf::Omega, 2);
        let x = g(Sheaf::Omega, 2, X, 1, 0);
        let b = mul(&g(Sheaf::Omega, 2, Y, 2, 1), &g(Sheaf::Omega, 2, Phi, 1, 0));
        assert_eq!(mode_operator(&vac, -1).apply(&b), b);
        assert_eq!(mode_operator(&x, -1).apply(&b), mul(&x, &b));
    }

    #[test]
    fn odd_self_commutator() {
        let psi = g(Sheaf::Omega, 1, Psi, 1, 1);
        let phi = g(Sheaf::Omega, 1, Phi, 1, 0);
        let a = mode_operator(&mul(&psi, &g(Sheaf::Omega, 1, X, 1, 0)), 0);
        let b = mul(&phi, &g(Sheaf::Omega, 1, Y, 1, 1));
        let lhs = commutator(&a, &a).apply(&b);
        let rhs = a.apply(&a.apply(&b)).scale(&crate::fock::rat(2));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn borcherds_small() {
        let x = g(Sheaf::Omega, 1, X, 1, 0);
        let y = g(Sheaf::Omega, 1, Y, 1, 1);
        let phi = g(Sheaf::Omega, 1, Phi, 1, 0);
        let psi = g(Sheaf::Omega, 1, Psi, 1, 1);
        let a = mul(&x, &psi);
        let b = mul(&y, &phi);
        let c = mul(&mul(&x, &x), &g(Sheaf::Omega, 1, Y, 1, 2));
        for m in -2..=2 {
            for k in -2..=2 {
                for n in -2..=2 {
                    assert!(borcherds_check(&a, &b, &c, m, k, n).unwrap(), "{m} {k} {n}");
                }
            }
        }
    }
}
