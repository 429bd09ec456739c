use chiralis::chiral::{
    check_calculus, check_vertex_g_axioms, dch, gerstenhaber, gerstenhaber_operator,
    lie_star_residual,
};
use chiralis::classical::{monomials, schouten, SuperPoly};
use chiralis::exec::Execution;
use chiralis::fock::{binomial, Coefficient, Sheaf, State};
use chiralis::parse::parse_state;
use chiralis::poisson::{cohomology_differential, pi_state, PoissonStructure};
use chiralis::sample::{random_state, rng};
use chiralis::slices::SliceSpec;
use chiralis::vops::{commutator, nth_product};

fn theta(s: &str) -> State {
    parse_state(s, Sheaf::Theta, 2).unwrap()
}

#[test]
fn weight_zero_pairing() {
    let vac = State::vacuum(Sheaf::Theta, 2);
    assert_eq!(
        gerstenhaber(&theta("psi1_0"), 0, &theta("x1_0")).unwrap(),
        vac
    );
    assert_eq!(
        gerstenhaber(&theta("x1_0"), 0, &theta("psi1_0")).unwrap(),
        vac
    );
    assert!(gerstenhaber(&theta("psi1_0"), 0, &theta("x2_0"))
        .unwrap()
        .is_zero());
}

#[test]
fn zero_product_is_schouten() {
    let ms = monomials(2, 2);
    for p in &ms {
        for q in &ms {
            let chiral =
                gerstenhaber(&p.to_state(Sheaf::Theta), 0, &q.to_state(Sheaf::Theta)).unwrap();
            assert_eq!(
                SuperPoly::from_state(&chiral).as_ref(),
                Some(&schouten(p, q)),
                "{p:?} {q:?}"
            );
        }
    }
}

/// The unsigned Lie* form, for comparison with [`lie_star_residual`].
fn unsigned_lie_star(v: &State, w: &State, u: &State, i: i64, j: i64) -> State {
    let lhs = commutator(
        &gerstenhaber_operator(v, i).unwrap(),
        &gerstenhaber_operator(w, j).unwrap(),
    )
    .apply(u);
    let mut rhs = State::zero(Sheaf::Theta, 2);
    for k in 0..=(v.max_weight() + w.max_weight()) {
        let vw = gerstenhaber(v, k, w).unwrap();
        let c = Coefficient::from_integer(binomial(i, k));
        rhs = rhs
            .add(&gerstenhaber(&vw, i + j - k, u).unwrap().scale(&c))
            .unwrap();
    }
    lhs.sub(&rhs).unwrap()
}

#[test]
fn lie_star_sign() {
    let v = theta("x1_0*phi1_3*psi2_0");
    let w = theta("y1_1*x2_0*y2_1");
    let u = theta("psi1_0*psi1_2");
    assert!(lie_star_residual(&v, &w, &u, 1, 2).unwrap().is_zero());
    assert!(!unsigned_lie_star(&v, &w, &u, 1, 2).is_zero());
    // odd v: both forms agree
    let v = theta("x1_0*psi2_0");
    assert!(lie_star_residual(&v, &w, &u, 0, 1).unwrap().is_zero());
    assert!(unsigned_lie_star(&v, &w, &u, 0, 1).is_zero());
}

#[test]
fn vertex_g_axioms_small_sample() {
    let r = check_vertex_g_axioms(2, 2, 20, 5, Execution::Sequential).unwrap();
    assert!(r.passed, "{:?}", r.first_failure);
    assert_eq!(r.checks, 60);
}

#[test]
fn cohomology_differential_squares_to_zero_and_is_a_derivation() {
    let p = PoissonStructure::extended_example();
    let d = cohomology_differential(&p);
    let mut g = rng(19);
    for _ in 0..40 {
        let a = random_state(&mut g, Sheaf::Theta, 2, 2, 3);
        let b = random_state(&mut g, Sheaf::Theta, 2, 2, 3);
        assert!(d.apply(&d.apply(&a)).is_zero(), "{a}");
        let sign = Coefficient::from_integer(if a.parity() == Some(1) { -1 } else { 1 }.into());
        for n in -2..=1 {
            let lhs = d.apply(&nth_product(&a, n, &b).unwrap());
            let rhs = nth_product(&d.apply(&a), n, &b)
                .unwrap()
                .add(&nth_product(&a, n, &d.apply(&b)).unwrap().scale(&sign))
                .unwrap();
            assert_eq!(lhs, rhs, "{a} ({n}) {b}");
        }
    }
}

#[test]
fn calculus_identities_on_slices() {
    let p = PoissonStructure::extended_example();
    let pairs = [
        (pi_state(&p), theta("x2_0*psi2_0")),
        (theta("x1_0*psi2_0"), theta("x2_0*psi1_0")),
        (theta("x1_0*psi2_0"), theta("x2_1*psi1_0")),
        (theta("x1_1*psi2_0"), theta("x2_0*x2_0*psi1_0")),
    ];
    let slices = [
        SliceSpec::new(Sheaf::Omega, 2, 1, vec![0, 0], 0),
        SliceSpec::new(Sheaf::Omega, 2, 1, vec![1, 0], 1),
        SliceSpec::new(Sheaf::Omega, 2, 2, vec![0, 1], 1),
    ];
    for (v, w) in &pairs {
        for s in &slices {
            for (i, j) in [(1, 1), (0, 1), (1, 0), (2, 1)] {
                let c = check_calculus(v, w, i, j, s).unwrap();
                assert!(c.cartan && c.representation, "{v} {w} {i} {j} {s} {c:?}");
            }
        }
    }
    assert!(!dch(2)
        .apply(&parse_state("x1_0", Sheaf::Omega, 2).unwrap())
        .is_zero());
}
