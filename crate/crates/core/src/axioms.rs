//! Vertex algebra axiom suites: vacuum, translation covariance, commutator formula and the
//! Borcherds identity, evaluated on exhaustive bases and on seeded random triples.

use serde::Serialize;

use crate::exec::Execution;
use crate::fock::{rat, Kind, Sheaf, State};
use crate::slices::{charge_window, enumerate_basis};
use crate::vops::{
    borcherds_residual, commutator_formula_residual, mode_operator, nth_product, translate,
};
use crate::Result;

/// Mode indices tried for every triple.
pub const MODE_WINDOW: std::ops::RangeInclusive<i64> = -1..=1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityFailure {
    pub identity: String,
    pub states: Vec<String>,
    pub residual: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub cases: usize,
    pub checks: usize,
    pub passed: bool,
    pub first_failure: Option<IdentityFailure>,
}

impl SuiteReport {
    fn merge(parts: Vec<(usize, Option<IdentityFailure>)>) -> SuiteReport {
        let cases = parts.len();
        let checks = parts.iter().map(|p| p.0).sum();
        let first_failure = parts.into_iter().find_map(|p| p.1);
        SuiteReport {
            cases,
            checks,
            passed: first_failure.is_none(),
            first_failure,
        }
    }

    pub fn combine(reports: &[SuiteReport]) -> SuiteReport {
        SuiteReport {
            cases: reports.iter().map(|r| r.cases).sum(),
            checks: reports.iter().map(|r| r.checks).sum(),
            passed: reports.iter().all(|r| r.passed),
            first_failure: reports.iter().find_map(|r| r.first_failure.clone()),
        }
    }
}

struct Tally<'a> {
    checks: usize,
    failure: Option<IdentityFailure>,
    states: &'a [&'a State],
}

impl Tally<'_> {
    fn record(&mut self, identity: &str, residual: State) {
        self.checks += 1;
        if !residual.is_zero() && self.failure.is_none() {
            self.failure = Some(IdentityFailure {
                identity: identity.to_string(),
                states: self.states.iter().map(|s| s.to_string()).collect(),
                residual: residual.to_string(),
            });
        }
    }
}

/// Vacuum axioms and translation covariance for a single homogeneous state, tested against
/// `probe`.
fn single_state(a: &State, probe: &State) -> Result<(usize, Option<IdentityFailure>)> {
    let vac = State::vacuum(a.sheaf(), a.dim());
    let states = [a, probe];
    let mut t = Tally {
        checks: 0,
        failure: None,
        states: &states,
    };
    t.record("vacuum-creation", nth_product(a, -1, &vac)?.sub(a)?);
    for n in 0..=2 {
        t.record("vacuum-annihilation", nth_product(a, n, &vac)?);
    }
    for n in -2..=1 {
        let mut r = nth_product(&vac, n, probe)?;
        if n == -1 {
            r = r.sub(probe)?;
        }
        t.record("vacuum-identity", r);
    }
    let ta = translate(a);
    t.record("translation-state", nth_product(a, -2, &vac)?.sub(&ta)?);
    for n in -2..=2 {
        // (T a)_(n) = -n a_(n-1)
        let lhs = mode_operator(&ta, n).apply(probe);
        let rhs = mode_operator(a, n - 1).apply(probe).scale(&rat(-n));
        t.record("translation-covariance", lhs.sub(&rhs)?);
    }
    Ok((t.checks, t.failure))
}

/// Commutator formula and Borcherds identity on `(a, b, c)` over [`MODE_WINDOW`].
fn triple(a: &State, b: &State, c: &State) -> Result<(usize, Option<IdentityFailure>)> {
    let states = [a, b, c];
    let mut t = Tally {
        checks: 0,
        failure: None,
        states: &states,
    };
    for m in MODE_WINDOW {
        for k in MODE_WINDOW {
            t.record(
                "commutator-formula",
                commutator_formula_residual(a, b, c, m, k)?,
            );
            for n in MODE_WINDOW {
                t.record("borcherds", borcherds_residual(a, b, c, m, k, n)?);
            }
        }
    }
    Ok((t.checks, t.failure))
}

/// Every monomial state of weight at most `weight_max` with charge in the box `|c_i| <= bound`.
pub fn exhaustive_states(
    sheaf: Sheaf,
    dim: usize,
    weight_max: i64,
    bound: i64,
) -> Result<Vec<State>> {
    let mut out = Vec::new();
    for n in 0..=weight_max {
        for s in charge_window(sheaf, dim, n, bound) {
            for m in enumerate_basis(&s)? {
                out.push(State::from_monomial(sheaf, dim, m, rat(1)));
            }
        }
    }
    Ok(out)
}

/// Generators and their derivatives `x_j, y_j, phi_j, psi_j` with weight at most `weight_max`.
pub fn generator_states(sheaf: Sheaf, dim: usize, weight_max: i64) -> Vec<State> {
    let mut out = Vec::new();
    for coord in 1..=dim {
        for kind in Kind::ALL {
            for w in sheaf.min_weight(kind)..=weight_max {
                out.push(State::generator(sheaf, dim, kind, coord, w).expect("in range"));
            }
        }
    }
    out
}

/// Vacuum and translation axioms on every state, each probed against every generator.
pub fn single_state_suite(
    states: &[State],
    probes: &[State],
    exec: Execution,
) -> Result<SuiteReport> {
    let parts = exec.map(states, |a| -> Result<(usize, Option<IdentityFailure>)> {
        let mut checks = 0;
        let mut failure = None;
        for p in probes {
            let (k, f) = single_state(a, p)?;
            checks += k;
            failure = failure.or(f);
        }
        Ok((checks, failure))
    });
    Ok(SuiteReport::merge(
        parts.into_iter().collect::<Result<_>>()?,
    ))
}

/// Commutator formula and Borcherds identity on every triple.
pub fn triple_suite(triples: &[(State, State, State)], exec: Execution) -> Result<SuiteReport> {
    let parts = exec.map(triples, |(a, b, c)| triple(a, b, c));
    Ok(SuiteReport::merge(
        parts.into_iter().collect::<Result<_>>()?,
    ))
}

/// Seeded random homogeneous triples, with random sheaf and no charge restriction.
pub fn random_triples(
    dim: usize,
    weight_max: i64,
    samples: usize,
    seed: u64,
) -> Vec<(State, State, State)> {
    use rand::Rng;
    let mut rng = crate::sample::rng(seed);
    (0..samples)
        .map(|_| {
            let sheaf = if rng.gen_bool(0.5) {
                Sheaf::Omega
            } else {
                Sheaf::Theta
            };
            let mut draw = || crate::sample::random_state(&mut rng, sheaf, dim, weight_max, 3);
            (draw(), draw(), draw())
        })
        .collect()
}

/// Random-case axiom suite: all four identities on `samples` seeded triples.
pub fn random_suite(
    dim: usize,
    weight_max: i64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<SuiteReport> {
    let triples = random_triples(dim, weight_max, samples, seed);
    let singles: Vec<(State, State)> = triples
        .iter()
        .map(|(a, b, _)| (a.clone(), b.clone()))
        .collect();
    let s = exec.map(&singles, |(a, b)| single_state(a, b));
    let s = SuiteReport::merge(s.into_iter().collect::<Result<_>>()?);
    let t = triple_suite(&triples, exec)?;
    Ok(SuiteReport {
        cases: samples,
        ..SuiteReport::combine(&[s, t])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_pass() {
        let g = generator_states(Sheaf::Omega, 1, 2);
        assert_eq!(g.len(), 3 + 2 + 3 + 2);
        let s = single_state_suite(&g, &g, Execution::Sequential).unwrap();
        assert!(s.passed, "{:?}", s.first_failure);
        let triples: Vec<_> = g
            .iter()
            .flat_map(|a| g.iter().map(move |b| (a.clone(), b.clone(), a.clone())))
            .collect();
        let t = triple_suite(&triples, Execution::Sequential).unwrap();
        assert!(t.passed, "{:?}", t.first_failure);
    }

    #[test]
    fn random_suite_is_seeded() {
        let a = random_suite(2, 2, 5, 3, Execution::Sequential).unwrap();
        let b = random_suite(2, 2, 5, 3, Execution::Parallel).unwrap();
        assert!(a.passed, "{:?}", a.first_failure);
        assert_eq!(a, b);
    }
}
