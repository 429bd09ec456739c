//! Polynomial Poisson structures on affine space, their chiral differentials, and the
//! classical weight-0 complexes built on the independent oracle in [`crate::classical`].

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::One;

use crate::chiral::{gerstenhaber_operator, iota, lie, q_bar_zero};
use crate::classical::{self, Poly, SuperPoly};
use crate::error::{Error, Result};
use crate::fock::{rat, Coefficient, Kind, Monomial, Sheaf, State, Symbol};
use crate::linalg::{solve, SparseMatrix, SparseVec};
use crate::vops::{commutator, mode_operator, Operator, OperatorShift};

/// Overall constant multiplying `sum_{i<j} pi_ij psi^i_0 psi^j_0` in [`pi_state`]. Pinned by
/// the weight-0 agreement of `pi_{0}` with the classical Lichnerowicz differential.
pub const PI_NORMALIZATION: i64 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonStructure {
    pub dim: usize,
    /// upper triangle `(i, j)`, `i < j`
    pub pi: BTreeMap<(usize, usize), Poly>,
    pub torus_weights: Option<Vec<i64>>,
}

impl PoissonStructure {
    /// Build from arbitrary `(i, j) -> pi_ij` entries, checking antisymmetry, the Jacobi
    /// identity (Schouten self-bracket, via the classical oracle) and quasi-homogeneity.
    pub fn new(
        dim: usize,
        entries: &[((usize, usize), Poly)],
        torus_weights: Option<Vec<i64>>,
    ) -> Result<Self> {
        let mut upper: BTreeMap<(usize, usize), Poly> = BTreeMap::new();
        let mut lower: BTreeMap<(usize, usize), Poly> = BTreeMap::new();
        for ((i, j), p) in entries {
            if *i < 1 || *j < 1 || *i > dim || *j > dim {
                return Err(Error::BadCoordinate {
                    coord: (*i).max(*j),
                    dim,
                });
            }
            if p.dim != dim {
                return Err(Error::InvalidPoisson(format!(
                    "entry ({i},{j}) is a polynomial in {} variables",
                    p.dim
                )));
            }
            if i == j {
                if !p.is_zero() {
                    return Err(Error::InvalidPoisson(format!(
                        "diagonal entry ({i},{i}) = {p} is nonzero"
                    )));
                }
                continue;
            }
            let (key, target) = if i < j {
                ((*i, *j), &mut upper)
            } else {
                ((*j, *i), &mut lower)
            };
            let slot = target.entry(key).or_insert_with(|| Poly::zero(dim));
            *slot = slot.add(p);
        }
        for (key, p) in &lower {
            let neg = p.neg();
            match upper.get(key) {
                Some(u) if *u != neg => {
                    return Err(Error::InvalidPoisson(format!(
                        "not antisymmetric: pi{:?} = {} but pi({},{}) = {}",
                        key, u, key.1, key.0, p
                    )))
                }
                Some(_) => {}
                None => {
                    upper.insert(*key, neg);
                }
            }
        }
        upper.retain(|_, p| !p.is_zero());
        let ps = PoissonStructure {
            dim,
            pi: upper,
            torus_weights,
        };
        let residual = ps.jacobi_residual();
        if !residual.is_zero() {
            return Err(Error::InvalidPoisson(format!(
                "Schouten self-bracket [pi, pi] = {residual} is nonzero"
            )));
        }
        if let Some(w) = &ps.torus_weights {
            if w.len() != dim {
                return Err(Error::InvalidPoisson(format!(
                    "{} torus weights for dimension {dim}",
                    w.len()
                )));
            }
            ps.torus_weight()?;
        }
        Ok(ps)
    }

    pub fn zero(dim: usize) -> Self {
        PoissonStructure {
            dim,
            pi: BTreeMap::new(),
            torus_weights: None,
        }
    }

    /// `pi_12 = 1` on the plane.
    pub fn standard_symplectic() -> Self {
        PoissonStructure::new(2, &[((1, 2), Poly::constant(2, rat(1)))], None).unwrap()
    }

    /// `pi = x2 d1 d2` on the plane with torus weights (0, 1).
    pub fn extended_example() -> Self {
        PoissonStructure::new(2, &[((1, 2), Poly::var(2, 2))], Some(vec![0, 1])).unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn bivector(&self) -> SuperPoly {
        classical::bivector(self.dim, &self.pi)
    }

    pub fn jacobi_residual(&self) -> SuperPoly {
        let b = self.bivector();
        classical::schouten(&b, &b)
    }

    /// Torus weight of pi (coefficient weight minus the weights of the two derivations).
    pub fn torus_weight(&self) -> Result<Option<i64>> {
        let Some(w) = &self.torus_weights else {
            return Ok(None);
        };
        let mut found: Option<i64> = None;
        for ((i, j), p) in &self.pi {
            let Some(Some(t)) = p.torus_weight(w) else {
                return Err(Error::InvalidPoisson(format!(
                    "pi({i},{j}) = {p} is not quasi-homogeneous"
                )));
            };
            let t = t - w[i - 1] - w[j - 1];
            match found {
                Some(f) if f != t => {
                    return Err(Error::InvalidPoisson(format!(
                        "pi has mixed torus weights {f} and {t}"
                    )))
                }
                _ => found = Some(t),
            }
        }
        Ok(found)
    }

    /// Charge shift of pi when every term shares one; `None` otherwise or for pi = 0.
    pub fn charge_shift(&self) -> Option<Vec<i64>> {
        pi_state(self).charge()
    }
}

/// Polynomial as a weight-0 state in `x^i_0`.
pub fn poly_state(sheaf: Sheaf, p: &Poly) -> State {
    SuperPoly::from_poly(p).to_state(sheaf)
}

/// `pi = PI_NORMALIZATION * sum_{i<j} pi_ij psi^i_0 psi^j_0` in chiral polyvectors.
pub fn pi_state(p: &PoissonStructure) -> State {
    p.bivector()
        .to_state(Sheaf::Theta)
        .scale(&rat(PI_NORMALIZATION))
}

/// `pi_{0}` on chiral polyvectors.
pub fn cohomology_differential(p: &PoissonStructure) -> Operator {
    if p.is_zero() {
        return Operator::zero(Sheaf::Theta, p.dim);
    }
    gerstenhaber_operator(&pi_state(p), 0).expect("pi is a polyvector")
}

/// Chiral Poisson differential `[d, iota(pi, 0)]` on chiral forms.
pub fn homology_differential(p: &PoissonStructure) -> Operator {
    if p.is_zero() {
        return Operator::zero(Sheaf::Omega, p.dim);
    }
    lie(&pi_state(p), 1).expect("pi is a polyvector")
}

/// `iota(pi, 0)`: even, degree -2, weight preserving.
pub fn pi_contraction(p: &PoissonStructure) -> Operator {
    if p.is_zero() {
        return Operator::zero(Sheaf::Omega, p.dim);
    }
    iota(&pi_state(p), 0).expect("pi is a polyvector")
}

/// The explicit residue field
/// `sum_{ijk} d_k pi_ij psi^i_0 psi^j_0 phi^k_1 + sum_{ij} pi_ij (psi^i_0 y^j_1 - psi^j_0 y^i_1)`
/// (full antisymmetric matrix `pi_ij`), transcribed literally. Its 0-mode is the chiral
/// cohomology differential up to a constant once the fermion pairing is flipped, see
/// [`opposite_fermion_pairing`].
pub fn residue_field(p: &PoissonStructure) -> State {
    let n = p.dim;
    let full = |i: usize, j: usize| -> Poly {
        if i < j {
            p.pi.get(&(i, j)).cloned().unwrap_or_else(|| Poly::zero(n))
        } else if i > j {
            p.pi.get(&(j, i))
                .map(|q| q.neg())
                .unwrap_or_else(|| Poly::zero(n))
        } else {
            Poly::zero(n)
        }
    };
    let sym = |k: Kind, i: usize, w: u32| {
        State::from_monomial(
            Sheaf::Theta,
            n,
            Monomial::symbol(Symbol::new(k, i, w)),
            Coefficient::one(),
        )
    };
    let mut out = State::zero(Sheaf::Theta, n);
    for i in 1..=n {
        for j in 1..=n {
            let pij = full(i, j);
            if pij.is_zero() {
                continue;
            }
            for k in 1..=n {
                let d = pij.derive(k);
                if d.is_zero() {
                    continue;
                }
                let t = poly_state(Sheaf::Theta, &d)
                    .poly_mul(&sym(Kind::Psi, i, 0))
                    .and_then(|s| s.poly_mul(&sym(Kind::Psi, j, 0)))
                    .and_then(|s| s.poly_mul(&sym(Kind::Phi, k, 1)))
                    .unwrap();
                out.add_assign(&t);
            }
            let c = poly_state(Sheaf::Theta, &pij);
            let a = c
                .poly_mul(&sym(Kind::Psi, i, 0))
                .and_then(|s| s.poly_mul(&sym(Kind::Y, j, 1)))
                .unwrap();
            let b = c
                .poly_mul(&sym(Kind::Psi, j, 0))
                .and_then(|s| s.poly_mul(&sym(Kind::Y, i, 1)))
                .unwrap();
            out.add_assign(&a);
            out.add_assign(&b.neg());
        }
    }
    out
}

/// Rewrite a state for the opposite sign of the `psi`-`phi` pairing (`phi -> -phi`).
pub fn opposite_fermion_pairing(s: &State) -> State {
    let terms = s.terms().iter().map(|(m, c)| {
        let phis: u32 = m
            .factors()
            .iter()
            .filter(|(f, _)| f.kind == Kind::Phi)
            .map(|(_, e)| e)
            .sum();
        let c = if phis % 2 == 1 { -c.clone() } else { c.clone() };
        (m.clone(), c)
    });
    State::from_terms(s.sheaf(), s.dim(), terms)
}

/// `Q_(0) pi`, the state whose 0-mode is `pi_{0}`.
pub fn cohomology_source(p: &PoissonStructure) -> State {
    q_bar_zero(&pi_state(p)).expect("pi is a polyvector")
}

fn custom(
    name: &str,
    sheaf: Sheaf,
    degree: i64,
    charge: Vec<i64>,
    parity: u8,
    f: impl Fn(&SuperPoly) -> SuperPoly + Send + Sync + 'static,
) -> Operator {
    Operator::Custom {
        name: name.to_string(),
        shift: OperatorShift {
            weight: 0,
            degree,
            charge,
            parity,
        },
        map: Arc::new(move |s: &State| {
            let c = SuperPoly::from_state(s).expect("classical operators act on weight 0");
            f(&c).to_state(sheaf)
        }),
    }
}

/// The classical weight-0 differentials, as operators on weight-0 states.
pub struct ClassicalComplexes {
    pub lichnerowicz: Operator,
    pub koszul_brylinski: Operator,
    pub de_rham: Operator,
    pub contraction: Operator,
}

pub fn classical_complexes(p: &PoissonStructure) -> ClassicalComplexes {
    let n = p.dim;
    let charge = p.charge_shift().unwrap_or_else(|| vec![0; n]);
    let b1 = p.bivector();
    let b2 = b1.clone();
    let b3 = b1.clone();
    ClassicalComplexes {
        lichnerowicz: custom(
            "lichnerowicz",
            Sheaf::Theta,
            1,
            charge.clone(),
            1,
            move |v| classical::lichnerowicz(&b1, v),
        ),
        koszul_brylinski: custom(
            "koszul-brylinski",
            Sheaf::Omega,
            -1,
            charge.clone(),
            1,
            move |w| classical::koszul_brylinski(&b2, w),
        ),
        de_rham: custom(
            "de-rham",
            Sheaf::Omega,
            1,
            vec![0; n],
            1,
            classical::de_rham,
        ),
        contraction: custom("contraction", Sheaf::Omega, -2, charge, 0, move |w| {
            classical::contract(&b3, w)
        }),
    }
}

/// Euler field of the torus action and a one-form `alpha` with `pi(alpha) = eta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerData {
    pub eta: SuperPoly,
    pub alpha: Vec<Poly>,
}

impl EulerData {
    /// `eta` as a weight-0 chiral polyvector.
    pub fn eta_state(&self) -> State {
        self.eta.to_state(Sheaf::Theta)
    }

    /// `alpha` as a weight-0 chiral form.
    pub fn alpha_state(&self) -> State {
        let n = self.alpha.len();
        let mut s = SuperPoly::zero(n);
        for (i, a) in self.alpha.iter().enumerate() {
            s = s.add(&SuperPoly::from_poly(a).mul(&SuperPoly::odd(n, i + 1)));
        }
        s.to_state(Sheaf::Omega)
    }
}

fn monomial_exponents(dim: usize, max_deg: u32) -> Vec<Vec<u32>> {
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
    exps
}

/// Solve `pi(alpha) = eta` for polynomial `alpha` of degree at most 2.
pub fn euler_data(p: &PoissonStructure) -> Result<EulerData> {
    let w = p
        .torus_weights
        .as_ref()
        .ok_or_else(|| Error::Unsupported("euler data needs torus weights".into()))?;
    let n = p.dim;
    let mut eta = SuperPoly::zero(n);
    for (i, wi) in w.iter().enumerate() {
        if *wi != 0 {
            eta = eta.add(
                &SuperPoly::from_poly(&Poly::var(n, i + 1).scale(&rat(*wi)))
                    .mul(&SuperPoly::odd(n, i + 1)),
            );
        }
    }
    if p.is_zero() {
        return Err(Error::NoHamiltonianWitness);
    }
    // unknowns: coefficient of x^e in alpha_i
    let exps = monomial_exponents(n, 2);
    let mut unknowns = Vec::new();
    for i in 1..=n {
        for e in &exps {
            unknowns.push((i, e.clone()));
        }
    }
    let mut row_index: BTreeMap<(Vec<u32>, u32), usize> = BTreeMap::new();
    let mut columns = Vec::new();
    for (i, e) in &unknowns {
        let mut alpha = vec![Poly::zero(n); n];
        alpha[i - 1].add_term(e.clone(), Coefficient::one());
        let image = classical::anchor(n, &p.pi, &alpha);
        let mut col = SparseVec::new();
        for (key, c) in image.terms {
            let next = row_index.len();
            let r = *row_index.entry(key).or_insert(next);
            col.insert(r, c);
        }
        columns.push(col);
    }
    let mut rhs = SparseVec::new();
    for (key, c) in &eta.terms {
        let next = row_index.len();
        let r = *row_index.entry(key.clone()).or_insert(next);
        rhs.insert(r, c.clone());
    }
    let m = SparseMatrix {
        rows: row_index.len(),
        cols: columns.len(),
        columns,
    };
    let x = solve(&m, &rhs).ok_or(Error::NoHamiltonianWitness)?;
    let mut alpha = vec![Poly::zero(n); n];
    for (k, c) in x {
        let (i, e) = &unknowns[k];
        alpha[i - 1].add_term(e.clone(), c);
    }
    Ok(EulerData { eta, alpha })
}

/// `(eta_i y^i_1 + d_j eta_i phi^j_0 psi^i_1)_(0)` for a weight-0 vector field `eta`.
pub fn vector_field_residue(eta: &SuperPoly) -> Operator {
    let n = eta.dim;
    let mut s = State::zero(Sheaf::Omega, n);
    let sym = |k: Kind, i: usize, w: u32| {
        State::from_monomial(
            Sheaf::Omega,
            n,
            Monomial::symbol(Symbol::new(k, i, w)),
            Coefficient::one(),
        )
    };
    for i in 1..=n {
        // coefficient of e_i
        let mut ei = Poly::zero(n);
        for ((e, m), c) in &eta.terms {
            if *m == 1 << (i - 1) {
                ei.add_term(e.clone(), c.clone());
            }
        }
        if ei.is_zero() {
            continue;
        }
        s.add_assign(
            &poly_state(Sheaf::Omega, &ei)
                .poly_mul(&sym(Kind::Y, i, 1))
                .unwrap(),
        );
        for j in 1..=n {
            let d = ei.derive(j);
            if d.is_zero() {
                continue;
            }
            let t = poly_state(Sheaf::Omega, &d)
                .poly_mul(&sym(Kind::Phi, j, 0))
                .and_then(|t| t.poly_mul(&sym(Kind::Psi, i, 1)))
                .unwrap();
            s.add_assign(&t);
        }
    }
    mode_operator(&s, 0)
}

/// `[L_pi, alpha_(-1)]`, the left side of the chiral Euler homotopy identity.
pub fn euler_homotopy_lhs(p: &PoissonStructure, data: &EulerData) -> Operator {
    commutator(
        &homology_differential(p),
        &mode_operator(&data.alpha_state(), -1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::monomials;

    #[test]
    fn invalid_structures() {
        let e = PoissonStructure::new(
            2,
            &[((1, 2), Poly::var(2, 1)), ((2, 1), Poly::var(2, 1))],
            None,
        );
        assert!(matches!(e, Err(Error::InvalidPoisson(_))));
        let mut upper3 = vec![
            ((2, 3), Poly::var(3, 2)),
            ((1, 2), Poly::constant(3, rat(1))),
        ];
        assert!(matches!(
            PoissonStructure::new(3, &upper3, None),
            Err(Error::InvalidPoisson(_))
        ));
        upper3.truncate(1);
        assert!(PoissonStructure::new(3, &upper3, None).is_ok());
        assert!(
            PoissonStructure::new(2, &[((1, 2), Poly::var(2, 1).mul(&Poly::var(2, 2)))], None)
                .is_ok()
        );
    }

    #[test]
    fn symplectic_pi_state() {
        let p = PoissonStructure::standard_symplectic();
        assert_eq!(pi_state(&p).to_string(), "psi1_0*psi2_0");
    }

    #[test]
    fn lichnerowicz_oracle_on_functions() {
        for p in [
            PoissonStructure::standard_symplectic(),
            PoissonStructure::extended_example(),
        ] {
            let cc = classical_complexes(&p);
            let chiral = cohomology_differential(&p);
            for m in monomials(2, 3) {
                let s = m.to_state(Sheaf::Theta);
                assert_eq!(chiral.apply(&s), cc.lichnerowicz.apply(&s), "{m}");
            }
        }
    }

    #[test]
    fn euler_data_extended_example() {
        let p = PoissonStructure::extended_example();
        let d = euler_data(&p).unwrap();
        assert_eq!(d.alpha, vec![Poly::constant(2, rat(1)), Poly::zero(2)]);
        assert_eq!(d.eta_state().to_string(), "x2_0*psi2_0");
        let z = PoissonStructure {
            torus_weights: Some(vec![0, 1]),
            ..PoissonStructure::zero(2)
        };
        assert!(matches!(euler_data(&z), Err(Error::NoHamiltonianWitness)));
    }

    #[test]
    fn residue_field_matches_q_bar_image() {
        for p in [
            PoissonStructure::standard_symplectic(),
            PoissonStructure::extended_example(),
        ] {
            let src = cohomology_source(&p);
            let literal = residue_field(&p);
            assert_ne!(src.terms().len(), 0);
            let r = opposite_fermion_pairing(&literal);
            // fixed overall constant
            let (m, c) = r.terms().iter().next().unwrap();
            let k = src.coefficient(m) / c;
            assert_eq!(src, r.scale(&k), "pi = {:?}", p.pi);
        }
    }
}
