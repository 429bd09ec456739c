//! Chiral calculus: the distinguished vectors, Gerstenhaber products on chiral polyvectors,
//! contraction and Lie-derivative operators on chiral forms, and the axiom checkers.
//!
//! Conventions:
//! - the contraction `iota(v, j)` is the weight-indexed mode `v[wt(v) - j]` of the
//!   polyvector field of `v`, acting on chiral forms; `iota(v, 0)` is weight preserving and on
//!   weight 0 it is the classical contraction;
//! - `lie(v, j) = [d, iota(v, j - 1)]`, so `lie(v, 1)` is the weight-preserving Lie derivative
//!   (for a weight-0 vector field it restricts to the classical one).
//!
//! Bracket of a product. Commuting the odd derivation `Q_(0)` through the associativity form
//! of the Borcherds identity gives, for homogeneous `v, w` and all `i, j`,
//!
//! ```text
//! (v_(i) w)_{j} = sum_k (-1)^k C(i,k) [ v_{i-k} w_(j+k) + (-1)^|v| v_(i-k) w_{j+k}
//!                  - (-1)^i ( (-1)^{(|v|+1)|w|} w_(i+j-k) v_{k}
//!                           + (-1)^{|v| + |v|(|w|+1)} w_{i+j-k} v_(k) ) ]
//! ```
//!
//! where `a_{n}` is the Gerstenhaber mode `(Q_(0) a)_(n)`. [`bracket_of_product_residual`]
//! checks this form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{binomial, rat, Coefficient, Kind, Sheaf, State};
use crate::slices::{operator_matrix, SliceSpec};
use crate::vops::{commutator, mode_operator, nth_product, Operator};

fn gen(sheaf: Sheaf, dim: usize, kind: Kind, coord: usize, w: i64) -> State {
    State::generator(sheaf, dim, kind, coord, w).expect("admissible generator")
}

fn prod(a: &State, b: &State) -> State {
    a.poly_mul(b).expect("same sheaf")
}

/// `Q = sum_i y^i_1 phi^i_1` in chiral polyvectors (weight 2, odd, degree -1).
pub fn q_bar(dim: usize) -> State {
    let mut s = State::zero(Sheaf::Theta, dim);
    for i in 1..=dim {
        s = s
            .add(&prod(
                &gen(Sheaf::Theta, dim, Kind::Y, i, 1),
                &gen(Sheaf::Theta, dim, Kind::Phi, i, 1),
            ))
            .unwrap();
    }
    s
}

/// `sum_i y^i_1 phi^i_0` in chiral forms; its 0-mode is the chiral de Rham differential.
pub fn de_rham_current(dim: usize) -> State {
    let mut s = State::zero(Sheaf::Omega, dim);
    for i in 1..=dim {
        s = s
            .add(&prod(
                &gen(Sheaf::Omega, dim, Kind::Y, i, 1),
                &gen(Sheaf::Omega, dim, Kind::Phi, i, 0),
            ))
            .unwrap();
    }
    s
}

/// `L = sum_i (x^i_1 y^i_1 + phi^i_1 psi^i_1)`.
pub fn virasoro(dim: usize) -> State {
    let mut s = State::zero(Sheaf::Omega, dim);
    for i in 1..=dim {
        let a = prod(
            &gen(Sheaf::Omega, dim, Kind::X, i, 1),
            &gen(Sheaf::Omega, dim, Kind::Y, i, 1),
        );
        let b = prod(
            &gen(Sheaf::Omega, dim, Kind::Phi, i, 1),
            &gen(Sheaf::Omega, dim, Kind::Psi, i, 1),
        );
        s = s.add(&a).unwrap().add(&b).unwrap();
    }
    s
}

/// `H = x^1_1 phi^2_0 - x^2_1 phi^1_0` on the plane.
pub fn h_vector() -> State {
    let a = prod(
        &gen(Sheaf::Omega, 2, Kind::X, 1, 1),
        &gen(Sheaf::Omega, 2, Kind::Phi, 2, 0),
    );
    let b = prod(
        &gen(Sheaf::Omega, 2, Kind::X, 2, 1),
        &gen(Sheaf::Omega, 2, Kind::Phi, 1, 0),
    );
    a.sub(&b).unwrap()
}

/// `y^1_1 psi^2_1 - y^2_1 psi^1_1`, whose (1)-mode is the chiral Poisson differential of the
/// standard symplectic plane.
pub fn symplectic_partner() -> State {
    let a = prod(
        &gen(Sheaf::Omega, 2, Kind::Y, 1, 1),
        &gen(Sheaf::Omega, 2, Kind::Psi, 2, 1),
    );
    let b = prod(
        &gen(Sheaf::Omega, 2, Kind::Y, 2, 1),
        &gen(Sheaf::Omega, 2, Kind::Psi, 1, 1),
    );
    a.sub(&b).unwrap()
}

fn require_theta(s: &State) -> Result<()> {
    if s.sheaf() != Sheaf::Theta {
        return Err(Error::SheafMismatch(format!(
            "expected a chiral polyvector, got a {:?} state",
            s.sheaf()
        )));
    }
    Ok(())
}

/// `Q_(0) v`.
pub fn q_bar_zero(v: &State) -> Result<State> {
    require_theta(v)?;
    nth_product(&q_bar(v.dim()), 0, v)
}

/// Gerstenhaber product `v_{i} w = (Q_(0) v)_(i) w`.
pub fn gerstenhaber(v: &State, i: i64, w: &State) -> Result<State> {
    require_theta(v)?;
    require_theta(w)?;
    nth_product(&q_bar_zero(v)?, i, w)
}

/// The operator `v_{i}` on chiral polyvectors.
pub fn gerstenhaber_operator(v: &State, i: i64) -> Result<Operator> {
    Ok(mode_operator(&q_bar_zero(v)?, i))
}

/// Chiral de Rham differential on chiral forms.
pub fn dch(dim: usize) -> Operator {
    mode_operator(&de_rham_current(dim), 0)
}

/// Contraction `iota^v_j`: the polyvector field of `v` acting on chiral forms.
pub fn iota(v: &State, j: i64) -> Result<Operator> {
    require_theta(v)?;
    let mut parts: Vec<Operator> = v
        .weight_components()
        .into_iter()
        .map(|(w, comp)| Operator::mode(comp, w - j, Sheaf::Omega))
        .collect();
    Ok(match parts.len() {
        0 => Operator::zero(Sheaf::Omega, v.dim()),
        1 => parts.pop().unwrap(),
        _ => Operator::Sum(parts),
    })
}

/// Lie derivative `L^v_j = [d, iota^v_(j-1)]`.
pub fn lie(v: &State, j: i64) -> Result<Operator> {
    Ok(commutator(&dch(v.dim()), &iota(v, j - 1)?))
}

fn sign(p: i64) -> Coefficient {
    if p.rem_euclid(2) == 0 {
        rat(1)
    } else {
        rat(-1)
    }
}

fn parity(s: &State) -> i64 {
    s.parity().unwrap_or(0) as i64
}

/// `[v_{i}, w_{j}] u - (-1)^(|v|+1) sum_k C(i,k) (v_{k} w)_{i+j-k} u`.
///
/// The sign comes from `Q_(0) (Q_(0) v)_(k) w = (-1)^(|v|+1) (Q_(0) v)_(k) Q_(0) w`; without it
/// the identity fails for even `v`.
pub fn lie_star_residual(v: &State, w: &State, u: &State, i: i64, j: i64) -> Result<State> {
    let lhs = commutator(&gerstenhaber_operator(v, i)?, &gerstenhaber_operator(w, j)?).apply(u);
    let lhs = lhs.scale(&sign(parity(v) + 1));
    let mut rhs = State::zero(Sheaf::Theta, u.dim());
    let kmax = v.max_weight() + 1 + w.max_weight();
    for k in 0..kmax {
        let c = binomial(i, k);
        if c == 0.into() {
            continue;
        }
        let vw = gerstenhaber(v, k, w)?;
        if vw.is_zero() {
            continue;
        }
        rhs.add_assign(&gerstenhaber(&vw, i + j - k, u)?.scale(&Coefficient::from_integer(c)));
    }
    lhs.sub(&rhs)
}

/// `[v_{i}, w_(j)] u - sum_k C(i,k) (v_{k} w)_(i+j-k) u`.
pub fn derivation_residual(v: &State, w: &State, u: &State, i: i64, j: i64) -> Result<State> {
    let lhs = commutator(&gerstenhaber_operator(v, i)?, &mode_operator(w, j)).apply(u);
    let mut rhs = State::zero(Sheaf::Theta, u.dim());
    let kmax = v.max_weight() + 1 + w.max_weight();
    for k in 0..kmax {
        let c = binomial(i, k);
        if c == 0.into() {
            continue;
        }
        let vw = gerstenhaber(v, k, w)?;
        if vw.is_zero() {
            continue;
        }
        rhs.add_assign(&nth_product(&vw, i + j - k, u)?.scale(&Coefficient::from_integer(c)));
    }
    lhs.sub(&rhs)
}

/// Residual of the bracket-of-a-product identity in the module docs, applied to `u`.
pub fn bracket_of_product_residual(
    v: &State,
    w: &State,
    u: &State,
    i: i64,
    j: i64,
) -> Result<State> {
    let pv = parity(v);
    let pw = parity(w);
    let lhs = gerstenhaber(&nth_product(v, i, w)?, j, u)?;
    let (wv, ww, wu) = (v.max_weight(), w.max_weight(), u.max_weight());
    let kmax = if i >= 0 {
        i
    } else {
        (ww + wu + 1 - j).max(wv + wu + 1).max(0)
    };
    let s1 = sign(pv);
    let s2 = sign((pv + 1) * pw);
    let s3 = sign(pv + pv * (pw + 1));
    let si = sign(i);
    let mut rhs = State::zero(Sheaf::Theta, u.dim());
    for k in 0..=kmax {
        let c = Coefficient::from_integer(binomial(i, k)) * sign(k);
        if c == rat(0) {
            continue;
        }
        let mut t = gerstenhaber(v, i - k, &nth_product(w, j + k, u)?)?;
        t.add_assign(&nth_product(v, i - k, &gerstenhaber(w, j + k, u)?)?.scale(&s1));
        let mut back = nth_product(w, i + j - k, &gerstenhaber(v, k, u)?)?.scale(&s2);
        back.add_assign(&gerstenhaber(w, i + j - k, &nth_product(v, k, u)?)?.scale(&s3));
        t.add_assign(&back.scale(&-&si));
        rhs.add_assign(&t.scale(&c));
    }
    lhs.sub(&rhs)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct AxiomFailure {
    pub identity: String,
    pub v: String,
    pub w: String,
    pub u: String,
    pub i: i64,
    pub j: i64,
    pub residual: String,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct AxiomReport {
    pub samples: usize,
    pub seed: u64,
    pub checks: usize,
    pub passed: bool,
    pub first_failure: Option<AxiomFailure>,
}

/// Evaluate the Lie*, generalized-derivation and bracket-of-product identities on seeded
/// random homogeneous triples of chiral polyvectors.
pub fn check_vertex_g_axioms(
    dim: usize,
    weight_max: i64,
    samples: usize,
    seed: u64,
    exec: crate::exec::Execution,
) -> Result<AxiomReport> {
    let mut rng = crate::sample::rng(seed);
    let triples: Vec<(State, State, State, i64, i64)> = (0..samples)
        .map(|_| {
            use rand::Rng;
            let v = crate::sample::random_state(&mut rng, Sheaf::Theta, dim, weight_max, 3);
            let w = crate::sample::random_state(&mut rng, Sheaf::Theta, dim, weight_max, 3);
            let u = crate::sample::random_state(&mut rng, Sheaf::Theta, dim, weight_max, 3);
            (v, w, u, rng.gen_range(-1..=2), rng.gen_range(-1..=2))
        })
        .collect();
    let results = exec.map(
        &triples,
        |(v, w, u, i, j)| -> Result<Vec<(String, State)>> {
            Ok(vec![
                ("lie-star".to_string(), lie_star_residual(v, w, u, *i, *j)?),
                (
                    "generalized-derivation".to_string(),
                    derivation_residual(v, w, u, *i, *j)?,
                ),
                (
                    "bracket-of-product".to_string(),
                    bracket_of_product_residual(v, w, u, *i, *j)?,
                ),
            ])
        },
    );
    let mut checks = 0;
    let mut first_failure = None;
    for ((v, w, u, i, j), r) in triples.iter().zip(results) {
        for (name, res) in r? {
            checks += 1;
            if !res.is_zero() && first_failure.is_none() {
                first_failure = Some(AxiomFailure {
                    identity: name,
                    v: v.to_string(),
                    w: w.to_string(),
                    u: u.to_string(),
                    i: *i,
                    j: *j,
                    residual: res.to_string(),
                });
            }
        }
    }
    Ok(AxiomReport {
        samples,
        seed,
        checks,
        passed: first_failure.is_none(),
        first_failure,
    })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CalculusCheck {
    pub cartan: bool,
    pub representation: bool,
}

/// Cartan formula `lie(v,i) = [d, iota(v,i-1)]` and the representation identity
/// `[L^v_i, L^w_j] = sum_k C(i - wt(v) - 1, k) L^{v_{k} w}_{i+j-k-1}` (weight-indexed Lie
/// derivatives, `v` of pure weight) as exact matrices on `slice`.
pub fn check_calculus(
    v: &State,
    w: &State,
    i: i64,
    j: i64,
    slice: &SliceSpec,
) -> Result<CalculusCheck> {
    let dim = v.dim();
    let lv = lie(v, i)?;
    let cartan_rhs = commutator(&dch(dim), &iota(v, i - 1)?);
    let cartan = operator_matrix(&lv.clone().minus(cartan_rhs), slice)?.is_zero();
    let lhs = commutator(&lv, &lie(w, j)?);
    let wv = v
        .weight()
        .ok_or_else(|| Error::Inhomogeneous(v.to_string()))?;
    let mut rhs = Operator::zero(Sheaf::Omega, dim);
    let kmax = v.max_weight() + 1 + w.max_weight();
    for k in 0..kmax {
        let c = binomial(i - wv - 1, k);
        if c == 0.into() {
            continue;
        }
        let vw = gerstenhaber(v, k, w)?;
        if vw.is_zero() {
            continue;
        }
        rhs = rhs.plus(lie(&vw, i + j - k - 1)?.scaled(Coefficient::from_integer(c)));
    }
    let representation = operator_matrix(&lhs.minus(rhs), slice)?.is_zero();
    Ok(CalculusCheck {
        cartan,
        representation,
    })
}
