//! Seeded random formulas small enough for the oracle.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Clause, Dqbf, Lit, Prefix, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzBounds {
    pub max_universals: usize,
    pub max_existentials: usize,
    pub max_clauses: usize,
    pub max_width: usize,
}

impl Default for FuzzBounds {
    fn default() -> Self {
        FuzzBounds {
            max_universals: 3,
            max_existentials: 3,
            max_clauses: 8,
            max_width: 4,
        }
    }
}

/// Draws one formula. Variable ids are `1..=n` with universals and
/// existentials shuffled together; each dependency is kept with
/// probability one half.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, bounds: &FuzzBounds) -> Dqbf {
    let universals = rng.random_range(0..=bounds.max_universals);
    let existentials = rng.random_range(1..=bounds.max_existentials.max(1));
    let total = universals + existentials;
    let mut ids: Vec<Var> = (1..=total as u32).map(Var::new).collect();
    ids.shuffle(rng);
    let (univ, exist) = ids.split_at(universals);

    let mut prefix = Prefix::new();
    for &u in univ {
        prefix.add_universal(u).expect("fresh variable");
    }
    for &y in exist {
        let deps: Vec<Var> = univ.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        prefix.add_existential(y, deps).expect("fresh variable");
    }

    let mut formula = Dqbf::new(prefix, []).expect("empty matrix");
    for _ in 0..rng.random_range(0..=bounds.max_clauses) {
        let clause = random_clause_over(rng, &ids, bounds.max_width);
        formula.add_clause(clause).expect("variables come from the prefix");
    }
    formula
}

/// A random nonempty, non-tautological clause over `vars`.
pub fn random_clause_over<R: Rng + ?Sized>(rng: &mut R, vars: &[Var], max_width: usize) -> Clause {
    let width = rng.random_range(1..=max_width.clamp(1, vars.len().max(1)));
    let lits: Vec<Lit> = vars
        .choose_multiple(rng, width)
        .map(|&v| Lit::new(v, rng.random_bool(0.5)))
        .collect();
    Clause::normalize(lits).into_clause().expect("distinct variables")
}

/// A random clause compatible with `formula`, possibly empty.
pub fn random_compatible_clause<R: Rng + ?Sized>(rng: &mut R, formula: &Dqbf, max_width: usize) -> Clause {
    let vars = formula.prefix().vars();
    if vars.is_empty() || rng.random_ratio(1, 20) {
        return Clause::empty();
    }
    random_clause_over(rng, &vars, max_width)
}

/// The deterministic stream of `count` formulas for `seed`.
pub fn fuzz(seed: u64, count: usize, bounds: FuzzBounds) -> impl Iterator<Item = Dqbf> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(move |_| random_formula(&mut rng, &bounds))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
