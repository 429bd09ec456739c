//! Seeded random states for the randomized identity suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fock::{ratio, Kind, Monomial, Sheaf, State, Symbol};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random monomial of conformal weight at most `weight_max` with at most `max_symbols`
/// symbols.
pub fn random_monomial<R: Rng>(
    rng: &mut R,
    sheaf: Sheaf,
    dim: usize,
    weight_max: i64,
    max_symbols: usize,
) -> Monomial {
    loop {
        let count = rng.gen_range(0..=max_symbols);
        let mut budget = weight_max;
        let mut symbols = Vec::with_capacity(count);
        for _ in 0..count {
            let kind = Kind::ALL[rng.gen_range(0..4)];
            let min = sheaf.min_weight(kind);
            if min > budget {
                continue;
            }
            let w = rng.gen_range(min..=budget.min(min + 2));
            budget -= w;
            symbols.push(Symbol::new(kind, rng.gen_range(1..=dim), w as u32));
        }
        if let Some((_, m)) = Monomial::from_product(&symbols) {
            return m;
        }
    }
}

/// Random homogeneous state: one monomial, or two monomials of equal grading, with small
/// rational coefficients.
pub fn random_state<R: Rng>(
    rng: &mut R,
    sheaf: Sheaf,
    dim: usize,
    weight_max: i64,
    max_symbols: usize,
) -> State {
    let m1 = random_monomial(rng, sheaf, dim, weight_max, max_symbols);
    let c1 = ratio(
        rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 },
        rng.gen_range(1..=3),
    );
    let mut s = State::from_monomial(sheaf, dim, m1.clone(), c1);
    if rng.gen_bool(0.5) {
        let target = m1.grading(sheaf, dim);
        for _ in 0..40 {
            let m2 = random_monomial(rng, sheaf, dim, weight_max, max_symbols);
            if m2 != m1 && m2.grading(sheaf, dim) == target {
                let c2 = ratio(rng.gen_range(-4..=4), 1);
                s = s
                    .add(&State::from_monomial(sheaf, dim, m2, c2))
                    .expect("same sheaf");
                break;
            }
        }
    }
    s
}
