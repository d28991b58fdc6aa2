use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;

use dqprep_core::fuzz::{random_clause_over, random_formula, rng, FuzzBounds};
use dqprep_core::oracle::{equisatisfiable, equivalent, solve_brute};
use dqprep_core::{
    abstraction, dqrat_eliminate_pass, emit_dqdimacs, parse_dqdimacs, run_pipeline, unit_propagate, universal_reduce,
    upla_pass, upla_probe, vivify_clause, vivify_pass, Clause, Dqbf, Lit, Normalized, OracleBudget, PassKind,
    PipelineConfig, PropagationOutcome, UplaCandidates, Var, VivifyResult,
};

fn formula_from(seed: u64) -> Dqbf {
    random_formula(&mut rng(seed), &FuzzBounds::default())
}

fn in_budget(f: &Dqbf) -> bool {
    solve_brute(f, &OracleBudget::default()).is_ok()
}

fn assert_no_tautologies(f: &Dqbf) {
    for c in f.clauses() {
        assert!(!Clause::normalize(c.iter()).is_tautology(), "tautology {c} in {f}");
        assert!(f.is_compatible(c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dep_of_clause_is_union_of_literal_deps(seed in any::<u64>()) {
        let f = formula_from(seed);
        let mut r = rng(seed ^ 0xdead);
        let vars = f.prefix().vars();
        let c = random_clause_over(&mut r, &vars, 4);
        let union: BTreeSet<Var> = c.iter().flat_map(|l| f.prefix().dep_lit(l).unwrap()).collect();
        prop_assert_eq!(f.prefix().dep_clause(&c).unwrap(), union);
    }

    #[test]
    fn removing_a_universal_clears_it_from_dependencies(seed in any::<u64>()) {
        let f = formula_from(seed);
        for &u in f.prefix().universals() {
            let p = f.prefix().without(u).unwrap();
            prop_assert!(!p.contains(u));
            prop_assert!(p.existentials().values().all(|d| !d.contains(&u)));
            prop_assert_eq!(p.existentials().len(), f.prefix().existentials().len());
        }
    }

    #[test]
    fn normalize_is_idempotent(raw in prop::collection::vec((1i64..6, any::<bool>()), 0..8)) {
        let lits: Vec<Lit> = raw.iter().map(|&(v, neg)| Lit::from_dimacs(if neg { -v } else { v }).unwrap()).collect();
        match Clause::normalize(lits.clone()) {
            Normalized::Tautology => {
                prop_assert!(lits.iter().any(|&l| lits.contains(&!l)));
            }
            Normalized::Clause(c) => {
                prop_assert!(c.lits().windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(Clause::normalize(c.iter()), Normalized::Clause(c.clone()));
            }
        }
    }

    #[test]
    fn universal_reduction_is_idempotent(seed in any::<u64>()) {
        let f = formula_from(seed);
        let once = universal_reduce(&f);
        prop_assert_eq!(universal_reduce(&once), once.clone());
        prop_assert_eq!(once.prefix(), f.prefix());
        assert_no_tautologies(&once);
    }

    #[test]
    fn unit_propagation_is_idempotent(seed in any::<u64>()) {
        let f = formula_from(seed);
        if let PropagationOutcome::Fixpoint { result, units } = unit_propagate(&f) {
            assert_no_tautologies(&result);
            for l in &units {
                prop_assert!(f.prefix().is_existential(l.var()));
                prop_assert!(!result.prefix().contains(l.var()));
            }
            match unit_propagate(&result) {
                PropagationOutcome::Fixpoint { result: again, units } => {
                    prop_assert!(units.is_empty());
                    prop_assert_eq!(again, result);
                }
                PropagationOutcome::Conflict => prop_assert!(false, "fixpoint propagated to a conflict"),
            }
        }
    }

    #[test]
    fn abstraction_preserves_satisfiability(seed in any::<u64>()) {
        let f = formula_from(seed);
        let mut r = rng(seed ^ 0xab5);
        let chosen: BTreeSet<Var> = f.prefix().universals().iter().copied().filter(|_| r.random_bool(0.5)).collect();
        let budget = OracleBudget::default();
        let abs = abstraction(&f, &chosen).unwrap();
        if let (Ok(orig), Ok(abst)) = (solve_brute(&f, &budget), solve_brute(&abs, &budget)) {
            prop_assert!(!orig.is_sat() || abst.is_sat());
        }
    }

    #[test]
    fn equivalence_implies_equisatisfiability(seed in any::<u64>()) {
        let f = formula_from(seed);
        let reduced = universal_reduce(&f);
        let budget = OracleBudget::default();
        if let Ok(true) = equivalent(&f, &reduced, &budget) {
            prop_assert!(equisatisfiable(&f, &reduced, &budget).unwrap());
        }
    }

    #[test]
    fn round_trip_through_dqdimacs(seed in any::<u64>()) {
        let bounds = FuzzBounds { max_universals: 5, max_existentials: 6, max_clauses: 20, max_width: 5 };
        let f = random_formula(&mut rng(seed), &bounds);
        let text = emit_dqdimacs(&f);
        let parsed = parse_dqdimacs(&text).unwrap();
        prop_assert!(parsed.diagnostics.is_empty());
        prop_assert_eq!(parsed.formula, f);
    }

    #[test]
    fn vivify_results_are_subsets(seed in any::<u64>()) {
        let f = formula_from(seed);
        for c in f.clauses() {
            match vivify_clause(&f, c, 10_000).unwrap() {
                VivifyResult::Replaced(shorter) | VivifyResult::Strengthened(shorter) => {
                    prop_assert!(shorter.is_subset_of(c) && shorter.len() < c.len());
                }
                VivifyResult::Unchanged => {}
            }
        }
    }

    #[test]
    fn upla_findings_are_well_formed(seed in any::<u64>()) {
        let f = formula_from(seed);
        for v in f.prefix().vars() {
            let findings = upla_probe(&f, v).unwrap();
            for &(w, k) in &findings.equivalences {
                prop_assert_eq!(w, v);
                prop_assert_ne!(k.var(), v);
            }
            for l in findings.forced.iter().chain(&findings.common_units) {
                prop_assert!(f.prefix().contains(l.var()));
            }
        }
    }

    #[test]
    fn passes_never_grow_the_matrix(seed in any::<u64>()) {
        let f = formula_from(seed);
        let literals = f.num_literals();
        let outputs = [
            universal_reduce(&f),
            vivify_pass(&f, 10_000).0,
            dqrat_eliminate_pass(&f).0,
        ];
        for out in &outputs {
            assert_no_tautologies(out);
            prop_assert!(out.num_literals() <= literals);
        }
        if let PropagationOutcome::Fixpoint { result, .. } = unit_propagate(&f) {
            prop_assert!(result.num_literals() <= literals);
        }
        assert_no_tautologies(&upla_pass(&f, UplaCandidates::All).0);
    }

    #[test]
    fn pipeline_is_sound(seed in any::<u64>()) {
        let f = formula_from(seed);
        prop_assume!(in_budget(&f));
        let budget = OracleBudget::default();
        let config = PipelineConfig { verify: true, ..PipelineConfig::default() };
        let outcome = run_pipeline(&config, &f).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let sat = solve_brute(&f, &budget).unwrap().is_sat();
        match outcome.verdict {
            dqprep_core::Verdict::Sat => prop_assert!(sat),
            dqprep_core::Verdict::Unsat => prop_assert!(!sat),
            dqprep_core::Verdict::Unknown => {}
        }
        prop_assert_eq!(solve_brute(&outcome.formula, &budget).unwrap().is_sat(), sat);
        assert_no_tautologies(&outcome.formula);
    }

    #[test]
    fn pipeline_without_dqrat_is_equivalent(seed in any::<u64>()) {
        let f = formula_from(seed);
        prop_assume!(in_budget(&f));
        let config = PipelineConfig {
            passes: vec![PassKind::Ur, PassKind::Up, PassKind::Upla, PassKind::Vivify],
            ..PipelineConfig::default()
        };
        let outcome = run_pipeline(&config, &f).unwrap();
        let in_original_prefix = f
            .with_matrix(outcome.formula.clauses().cloned().chain(outcome.fixed_units.iter().map(|&l| Clause::unit(l))))
            .unwrap();
        prop_assert!(equivalent(&f, &in_original_prefix, &OracleBudget::default()).unwrap());
    }

    #[test]
    fn converged_pipeline_output_is_a_fixpoint(seed in any::<u64>()) {
        let f = formula_from(seed);
        let config = PipelineConfig::default();
        let first = run_pipeline(&config, &f).unwrap();
        prop_assume!(first.converged);
        let second = run_pipeline(&config, &first.formula).unwrap();
        prop_assert_eq!(&second.formula, &first.formula);
        prop_assert_eq!(second.verdict, first.verdict);
        prop_assert!(second.fixed_units.is_empty());
    }
}
