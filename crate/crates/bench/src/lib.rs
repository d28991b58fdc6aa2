//! Workloads for the criterion benches: fuzzed formulas far beyond what the
//! oracle can check, so the passes themselves dominate.

use dqprep_core::fuzz::{random_formula, rng, FuzzBounds};
use dqprep_core::Dqbf;

/// Bounds for a workload of roughly `scale` variables and `4 * scale`
/// clauses.
pub fn bounds(scale: usize) -> FuzzBounds {
    FuzzBounds {
        max_universals: scale / 3,
        max_existentials: scale - scale / 3,
        max_clauses: 4 * scale,
        max_width: 4,
    }
}

/// `count` formulas for `seed`, keeping only draws with at least half the
/// maximum clause count.
pub fn workload(seed: u64, scale: usize, count: usize) -> Vec<Dqbf> {
    let b = bounds(scale);
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let f = random_formula(&mut r, &b);
        if f.num_clauses() >= b.max_clauses / 2 {
            out.push(f);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workload_is_deterministic_and_sized() {
        let a = workload(1, 30, 4);
        assert_eq!(a, workload(1, 30, 4));
        assert!(a.iter().all(|f| f.num_clauses() >= 60));
    }
}
