//! Pass scheduling. The configured passes run in order, and the whole
//! sequence repeats until a round changes nothing or the round limit is hit.
//! In verify mode every single pass is checked against the oracle.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, warn};
use thiserror::Error;

use crate::dqdimacs::emit_dqdimacs;
use crate::error::Error;
use crate::formula::{Clause, Dqbf, Lit};
use crate::oracle::{self, OracleBudget};
use crate::propagation::{unit_propagate, universal_reduce, universal_reduce_clause, PropagationOutcome};
use crate::report::PassReport;
use crate::techniques::{dqrat_eliminate_pass, upla_pass, vivify_pass, UplaCandidates, DEFAULT_VIVIFY_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PassKind {
    Ur,
    Up,
    Vivify,
    Upla,
    Dqrat,
}

impl PassKind {
    pub fn name(self) -> &'static str {
        match self {
            PassKind::Ur => "ur",
            PassKind::Up => "up",
            PassKind::Vivify => "vivify",
            PassKind::Upla => "upla",
            PassKind::Dqrat => "dqrat",
        }
    }

    /// Passes that keep the Skolem-function set intact. DQRAT+ elimination
    /// only preserves satisfiability.
    pub fn preserves_equivalence(self) -> bool {
        self != PassKind::Dqrat
    }
}

impl fmt::Display for PassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown pass `{0}` (expected ur, up, vivify, upla or dqrat)")]
pub struct UnknownPass(pub String);

impl FromStr for PassKind {
    type Err = UnknownPass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ur" => Ok(PassKind::Ur),
            "up" => Ok(PassKind::Up),
            "vivify" => Ok(PassKind::Vivify),
            "upla" => Ok(PassKind::Upla),
            "dqrat" => Ok(PassKind::Dqrat),
            other => Err(UnknownPass(other.to_string())),
        }
    }
}

/// Parses a comma-separated pass list.
pub fn parse_passes(list: &str) -> Result<Vec<PassKind>, UnknownPass> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub passes: Vec<PassKind>,
    pub max_rounds: usize,
    pub vivify_budget: u64,
    pub upla_candidates: UplaCandidates,
    pub verify: bool,
    pub budget: OracleBudget,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            passes: vec![
                PassKind::Ur,
                PassKind::Up,
                PassKind::Upla,
                PassKind::Vivify,
                PassKind::Dqrat,
            ],
            max_rounds: 10,
            vivify_budget: DEFAULT_VIVIFY_BUDGET,
            upla_candidates: UplaCandidates::All,
            verify: false,
            budget: OracleBudget::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

impl Verdict {
    pub fn of(formula: &Dqbf) -> Verdict {
        if formula.has_empty_clause() {
            Verdict::Unsat
        } else if formula.num_clauses() == 0 {
            Verdict::Sat
        } else {
            Verdict::Unknown
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub formula: Dqbf,
    pub reports: Vec<PassReport>,
    pub verdict: Verdict,
    /// Existential units eliminated by propagation, in order.
    pub fixed_units: Vec<Lit>,
    pub rounds: usize,
    /// The last round changed nothing.
    pub converged: bool,
    /// Oracle checks skipped because the instance exceeded the budget.
    pub skipped_checks: usize,
}

/// A pass produced a formula the oracle rejects.
#[derive(Debug, Clone)]
pub struct VerificationFailure {
    pub pass: PassKind,
    pub round: usize,
    pub relation: &'static str,
    pub before: Box<Dqbf>,
    pub after: Box<Dqbf>,
}

impl fmt::Display for VerificationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "pass {} in round {} broke {}; counterexample:",
            self.pass, self.round, self.relation
        )?;
        writeln!(f, "c before")?;
        write!(f, "{}", emit_dqdimacs(&self.before))?;
        writeln!(f, "c after (compared form)")?;
        write!(f, "{}", emit_dqdimacs(&self.after))
    }
}

impl std::error::Error for VerificationFailure {}

struct Step {
    formula: Dqbf,
    report: PassReport,
    /// The result in the prefix of the input, for verification.
    comparable: Dqbf,
}

fn unsat_form(formula: &Dqbf) -> Dqbf {
    formula
        .with_matrix([Clause::empty()])
        .expect("empty clause is compatible")
}

fn apply(pass: PassKind, config: &PipelineConfig, formula: &Dqbf, fixed: &mut Vec<Lit>) -> Step {
    let start = Instant::now();
    let (formula_out, mut report, comparable) = match pass {
        PassKind::Ur => {
            let out = universal_reduce(formula);
            let mut report = PassReport::new("ur");
            for c in formula.clauses() {
                let reduced = universal_reduce_clause(formula.prefix(), c).expect("matrix clause is compatible");
                if reduced.len() < c.len() {
                    report.clauses_shortened += 1;
                    report.literals_removed += c.len() - reduced.len();
                }
            }
            report.clauses_removed = formula.num_clauses() - out.num_clauses();
            (out.clone(), report, out)
        }
        PassKind::Up => {
            let mut report = PassReport::new("up");
            match unit_propagate(formula) {
                PropagationOutcome::Conflict => {
                    report.conflicts = 1;
                    report.clauses_removed = formula.num_clauses();
                    let out = unsat_form(formula);
                    (out.clone(), report, out)
                }
                PropagationOutcome::Fixpoint { result, units } => {
                    report.units_added = units.len();
                    report.clauses_removed = formula.num_clauses().saturating_sub(result.num_clauses());
                    report.literals_removed = formula.num_literals().saturating_sub(result.num_literals());
                    let comparable = formula
                        .with_matrix(result.clauses().cloned().chain(units.iter().map(|&l| Clause::unit(l))))
                        .expect("propagated clauses are compatible");
                    fixed.extend(units);
                    (result, report, comparable)
                }
            }
        }
        PassKind::Vivify => {
            let (out, report) = vivify_pass(formula, config.vivify_budget);
            (out.clone(), report, out)
        }
        PassKind::Upla => {
            let (out, report) = upla_pass(formula, config.upla_candidates);
            (out.clone(), report, out)
        }
        PassKind::Dqrat => {
            let (out, report) = dqrat_eliminate_pass(formula);
            (out.clone(), report, out)
        }
    };
    report.wall_time = start.elapsed();
    let formula_out = if formula_out.has_empty_clause() && formula_out.num_clauses() > 1 {
        unsat_form(&formula_out)
    } else {
        formula_out
    };
    Step {
        formula: formula_out,
        report,
        comparable,
    }
}

/// Checks one transformation. Returns `Ok(false)` when the oracle was out
/// of budget.
fn verify(pass: PassKind, before: &Dqbf, after: &Dqbf, budget: &OracleBudget) -> Result<bool, &'static str> {
    let relation = if pass.preserves_equivalence() {
        "equivalence"
    } else {
        "equi-satisfiability"
    };
    let result = if pass.preserves_equivalence() {
        oracle::equivalent(before, after, budget)
    } else {
        oracle::equisatisfiable(before, after, budget).map_err(Error::from)
    };
    match result {
        Ok(true) => Ok(true),
        Ok(false) => Err(relation),
        Err(Error::Budget(e)) => {
            warn!("skipping {pass} check: {e}");
            Ok(false)
        }
        Err(e) => panic!("oracle contract violated while checking {pass}: {e}"),
    }
}

pub fn run_pipeline(config: &PipelineConfig, formula: &Dqbf) -> Result<PipelineOutcome, VerificationFailure> {
    let mut current = if formula.has_empty_clause() {
        unsat_form(formula)
    } else {
        formula.clone()
    };
    let mut outcome = PipelineOutcome {
        formula: Dqbf::default(),
        reports: Vec::new(),
        verdict: Verdict::of(&current),
        fixed_units: Vec::new(),
        rounds: 0,
        converged: false,
        skipped_checks: 0,
    };

    'rounds: for round in 1..=config.max_rounds.max(1) {
        if outcome.verdict != Verdict::Unknown {
            break;
        }
        outcome.rounds = round;
        let mut changed = false;
        for &pass in &config.passes {
            let mut step = apply(pass, config, &current, &mut outcome.fixed_units);
            step.report.round = round;
            if config.verify {
                match verify(pass, &current, &step.comparable, &config.budget) {
                    Ok(true) => {}
                    Ok(false) => outcome.skipped_checks += 1,
                    Err(relation) => {
                        return Err(VerificationFailure {
                            pass,
                            round,
                            relation,
                            before: Box::new(current),
                            after: Box::new(step.comparable),
                        })
                    }
                }
            }
            changed |= step.formula != current;
            current = step.formula;
            debug!("{}", step.report);
            outcome.reports.push(step.report);
            outcome.verdict = Verdict::of(&current);
            if outcome.verdict != Verdict::Unknown {
                break 'rounds;
            }
        }
        if !changed {
            outcome.converged = true;
            break;
        }
    }
    if outcome.verdict != Verdict::Unknown {
        outcome.converged = true;
    }
    outcome.formula = current;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dqdimacs::parse_dqdimacs;

    #[test]
    fn pass_list_parsing() {
        assert_eq!(
            parse_passes("ur,up,upla,vivify,dqrat").unwrap(),
            PipelineConfig::default().passes
        );
        assert_eq!(parse_passes("up").unwrap(), vec![PassKind::Up]);
        assert!(parse_passes("up,magic").is_err());
    }

    fn config(passes: &[PassKind]) -> PipelineConfig {
        PipelineConfig {
            passes: passes.to_vec(),
            verify: true,
            ..Default::default()
        }
    }

    #[test]
    fn clashing_universal_unit_is_unsat_after_up() {
        let f = parse_dqdimacs("p cnf 2 3\na 1 0\nd 2 0\n1 0\n2 0\n-1 0\n")
            .unwrap()
            .formula;
        let out = run_pipeline(&config(&[PassKind::Up]), &f).unwrap();
        assert_eq!(out.verdict, Verdict::Unsat);
        assert_eq!(out.formula.num_clauses(), 1);
        assert!(out.formula.has_empty_clause());
    }

    #[test]
    fn mirror_is_left_alone() {
        let f = parse_dqdimacs("p cnf 2 2\na 1 0\nd 2 1 0\n1 -2 0\n-1 2 0\n")
            .unwrap()
            .formula;
        let equivalence_passes = [PassKind::Ur, PassKind::Up, PassKind::Upla, PassKind::Vivify];
        let out = run_pipeline(&config(&equivalence_passes), &f).unwrap();
        assert_eq!(out.verdict, Verdict::Unknown);
        assert_eq!(out.formula, f);
        assert!(out.converged);
        assert_eq!(out.rounds, 1);

        // both clauses are blocked, so clause elimination decides it
        let out = run_pipeline(&config(&PipelineConfig::default().passes), &f).unwrap();
        assert_eq!(out.verdict, Verdict::Sat);
    }

    #[test]
    fn single_unit_is_sat() {
        let f = parse_dqdimacs("p cnf 1 1\ne 1 0\n1 0\n").unwrap().formula;
        let out = run_pipeline(&config(&PipelineConfig::default().passes), &f).unwrap();
        assert_eq!(out.verdict, Verdict::Sat);
        assert_eq!(out.fixed_units, vec![crate::formula::Var::new(1).pos()]);
    }
}
