//! Vivification, unit-propagation lookahead and DQRAT+ redundancy
//! elimination. Each test propagates on an abstraction of the formula in
//! which the dependencies of the probed clause or literal have become
//! existentials without dependencies, which is what makes universal
//! reduction during propagation sound here.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::formula::{Clause, Dqbf, Lit, Normalized, Prefix, Var};
use crate::propagation::{dqat_check_excluding, propagate_abstracted, universal_reduce_clause, Status};
use crate::report::PassReport;

/// Default propagation budget per vivified clause.
pub const DEFAULT_VIVIFY_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VivifyResult {
    /// The clause can be replaced by this proper subset.
    Replaced(Clause),
    /// A proper subset `C'` plus one implied literal of `C ∖ C'`.
    Strengthened(Clause),
    Unchanged,
}

impl VivifyResult {
    pub fn clause(&self) -> Option<&Clause> {
        match self {
            VivifyResult::Replaced(c) | VivifyResult::Strengthened(c) => Some(c),
            VivifyResult::Unchanged => None,
        }
    }
}

fn occurrence_counts(formula: &Dqbf) -> HashMap<Lit, usize> {
    let mut counts = HashMap::new();
    for c in formula.clauses() {
        for l in c {
            *counts.entry(l).or_insert(0) += 1;
        }
    }
    counts
}

/// Vivification order: most frequent literal first, ties by variable id.
fn vivify_order(clause: &Clause, counts: &HashMap<Lit, usize>) -> Vec<Lit> {
    let mut lits: Vec<Lit> = clause.iter().collect();
    lits.sort_by_key(|l| (std::cmp::Reverse(counts.get(l).copied().unwrap_or(0)), *l));
    lits
}

/// Tries to shorten `clause`, a member of the matrix, against the rest of
/// the matrix. Subsets `C'` grow one literal at a time; each is tested by
/// propagating `¬C'` on the abstraction over `dep(C')`.
pub fn vivify_clause(formula: &Dqbf, clause: &Clause, budget: u64) -> Result<VivifyResult> {
    if !formula.contains_clause(clause) {
        return Err(Error::ContractViolation(format!(
            "clause {clause} is not in the matrix"
        )));
    }
    let counts = occurrence_counts(formula);
    vivify_with_order(formula, clause, &vivify_order(clause, &counts), budget)
}

fn vivify_with_order(formula: &Dqbf, clause: &Clause, order: &[Lit], budget: u64) -> Result<VivifyResult> {
    let prefix = formula.prefix();
    let first = if clause.len() > 1 { 0 } else { 1 };
    let mut spent = 0u64;
    for k in first..clause.len() {
        let (subset, rest) = order.split_at(k);
        let sub = Clause::normalize(subset.iter().copied())
            .into_clause()
            .expect("subset of a clause");
        let vars = prefix.dep_clause(&sub)?;
        let negated: Vec<Lit> = subset.iter().map(|&l| !l).collect();
        let remaining = budget.saturating_sub(spent);
        if remaining == 0 {
            break;
        }
        let run = propagate_abstracted(formula, Some(clause), &negated, &vars, Some(remaining))?;
        spent += run.steps;
        match run.status {
            Status::Conflict => return Ok(VivifyResult::Replaced(sub)),
            Status::Exhausted => break,
            Status::Fixpoint => {
                // C' ∪ {ℓ} must stay a proper subset to be worth reporting
                if rest.len() > 1 {
                    if let Some(&implied) = rest.iter().find(|l| run.units.contains(l)) {
                        let strengthened = Clause::normalize(subset.iter().copied().chain([implied]))
                            .into_clause()
                            .expect("subset of a clause");
                        return Ok(VivifyResult::Strengthened(strengthened));
                    }
                }
            }
        }
    }
    Ok(VivifyResult::Unchanged)
}

/// Vivifies every clause once in matrix order, committing each change
/// before the next clause is visited.
pub fn vivify_pass(formula: &Dqbf, budget: u64) -> (Dqbf, PassReport) {
    let start = Instant::now();
    let mut report = PassReport::new("vivify");
    let mut current = formula.clone();
    let snapshot: Vec<Clause> = formula.clauses().cloned().collect();
    for clause in snapshot {
        if !current.contains_clause(&clause) {
            continue;
        }
        let result = vivify_clause(&current, &clause, budget).expect("matrix clause is compatible");
        if let Some(shorter) = result.clause() {
            report.clauses_shortened += 1;
            report.literals_removed += clause.len() - shorter.len();
            if shorter.is_empty() {
                report.conflicts += 1;
            }
            current
                .replace_clause(&clause, shorter.clone())
                .expect("subset of a compatible clause");
        }
    }
    report.wall_time = start.elapsed();
    (current, report)
}

/// What probing both polarities of one variable revealed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UplaFindings {
    /// Literals implied because the opposite polarity propagated to a
    /// conflict. Both `v` and `¬v` means the formula is unsatisfiable.
    pub forced: BTreeSet<Lit>,
    /// Units implied by both polarities.
    pub common_units: BTreeSet<Lit>,
    /// `(v, κ)` with `v ≡ κ`.
    pub equivalences: BTreeSet<(Var, Lit)>,
}

impl UplaFindings {
    pub fn is_empty(&self) -> bool {
        self.forced.is_empty() && self.common_units.is_empty() && self.equivalences.is_empty()
    }

    pub fn is_contradictory(&self) -> bool {
        self.forced.iter().any(|&l| self.forced.contains(&!l))
    }
}

/// Propagates `v` and `¬v` on the abstraction over `dep(v)`.
pub fn upla_probe(formula: &Dqbf, v: Var) -> Result<UplaFindings> {
    let vars = formula.prefix().dep(v)?;
    let pos = propagate_abstracted(formula, None, &[v.pos()], &vars, None)?;
    let neg = propagate_abstracted(formula, None, &[v.neg()], &vars, None)?;
    let mut findings = UplaFindings::default();
    match (pos.status == Status::Conflict, neg.status == Status::Conflict) {
        (true, true) => {
            findings.forced.extend([v.pos(), v.neg()]);
        }
        (true, false) => {
            findings.forced.insert(v.neg());
        }
        (false, true) => {
            findings.forced.insert(v.pos());
        }
        (false, false) => {
            let u1: BTreeSet<Lit> = pos.units.iter().copied().collect();
            let u0: BTreeSet<Lit> = neg.units.iter().copied().collect();
            findings.common_units = u1.intersection(&u0).copied().collect();
            findings.equivalences = u1
                .iter()
                .filter(|k| k.var() != v && u0.contains(&!**k))
                .map(|&k| (v, k))
                .collect();
        }
    }
    Ok(findings)
}

/// Adds the findings to the matrix: forced literals and common units as
/// unit clauses, each equivalence as two binary clauses. Contradictory
/// forced literals replace the matrix by the empty clause.
pub fn upla_apply(formula: &Dqbf, findings: &UplaFindings) -> Result<(Dqbf, PassReport)> {
    let mut report = PassReport::new("upla");
    if findings.is_contradictory() {
        report.conflicts = 1;
        report.clauses_removed = formula.num_clauses();
        return Ok((formula.with_matrix([Clause::empty()])?, report));
    }
    let mut out = formula.clone();
    for &l in findings.forced.iter().chain(&findings.common_units) {
        if out.add_clause(Clause::unit(l))? {
            report.units_added += 1;
        }
    }
    for &(v, k) in &findings.equivalences {
        let mut added = false;
        for pair in [Clause::binary(v.neg(), k), Clause::binary(v.pos(), !k)] {
            if let Normalized::Clause(c) = pair {
                added |= out.add_clause(c)?;
            }
        }
        report.equivalences_added += usize::from(added);
    }
    Ok((out, report))
}

/// Which variables the lookahead pass probes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UplaCandidates {
    #[default]
    All,
    ExistentialOnly,
}

/// Probes every candidate variable in ascending order, applying findings
/// immediately.
pub fn upla_pass(formula: &Dqbf, candidates: UplaCandidates) -> (Dqbf, PassReport) {
    let start = Instant::now();
    let mut report = PassReport::new("upla");
    let mut current = formula.clone();
    for v in formula.prefix().vars() {
        if candidates == UplaCandidates::ExistentialOnly && !current.prefix().is_existential(v) {
            continue;
        }
        if !current.clauses().any(|c| c.vars().any(|w| w == v)) {
            continue;
        }
        let findings = upla_probe(&current, v).expect("candidate is in the prefix");
        if findings.is_empty() {
            continue;
        }
        let (next, step) = upla_apply(&current, &findings).expect("findings are compatible");
        report.units_added += step.units_added;
        report.equivalences_added += step.equivalences_added;
        report.conflicts += step.conflicts;
        report.clauses_removed += step.clauses_removed;
        current = next;
        if step.conflicts > 0 {
            break;
        }
    }
    report.wall_time = start.elapsed();
    (current, report)
}

/// The outer-variable sets of a variable. For an existential only `outer`
/// is populated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OuterSets {
    /// Existentials depending on the universal.
    pub sv: BTreeSet<Var>,
    /// Existentials independent of the universal.
    pub iv: BTreeSet<Var>,
    /// Intersection of the dependency sets in `sv`.
    pub kernel: BTreeSet<Var>,
    pub outer: BTreeSet<Var>,
}

pub fn outer_variables(prefix: &Prefix, v: Var) -> Result<OuterSets> {
    if let Some(deps) = prefix.dependencies(v) {
        let mut outer: BTreeSet<Var> = prefix.universals().intersection(deps).copied().collect();
        outer.extend(
            prefix
                .existentials()
                .iter()
                .filter(|(_, d)| d.is_subset(deps))
                .map(|(&w, _)| w),
        );
        return Ok(OuterSets {
            outer,
            ..Default::default()
        });
    }
    if !prefix.is_universal(v) {
        return Err(Error::Compatibility(v));
    }
    let (sv, iv): (BTreeSet<Var>, BTreeSet<Var>) = prefix
        .existentials()
        .keys()
        .partition(|y| prefix.dependencies(**y).is_some_and(|d| d.contains(&v)));
    let mut dep_sets = sv.iter().map(|y| prefix.dependencies(*y).expect("existential"));
    let Some(first) = dep_sets.next() else {
        return Err(Error::KernelUndefined(v));
    };
    let kernel: BTreeSet<Var> = dep_sets.fold(first.clone(), |k, d| k.intersection(d).copied().collect());
    let mut outer = kernel.clone();
    outer.extend(
        iv.iter()
            .filter(|y| prefix.dependencies(**y).expect("existential").is_subset(&kernel)),
    );
    Ok(OuterSets { sv, iv, kernel, outer })
}

/// The literals of `d` over outer variables of `var(pivot)`.
fn outer_clause(d: &Clause, outer: &BTreeSet<Var>) -> Vec<Lit> {
    d.iter().filter(|l| outer.contains(&l.var())).collect()
}

/// Outer resolvent of `c` and `d` on `pivot ∈ c`, where `¬pivot ∈ d`.
pub fn outer_resolvent(prefix: &Prefix, c: &Clause, d: &Clause, pivot: Lit) -> Result<Normalized> {
    if !c.contains(pivot) || !d.contains(!pivot) {
        return Err(Error::ContractViolation(format!(
            "outer resolvent needs {pivot} in {c} and {} in {d}",
            !pivot
        )));
    }
    let outer = outer_variables(prefix, pivot.var())?.outer;
    let oc = outer_clause(d, &outer);
    let lits: Vec<Lit> = if prefix.is_existential(pivot.var()) {
        c.iter().chain(oc.into_iter().filter(|&l| l != !pivot)).collect()
    } else {
        // ¬pivot stays in the outer clause of a universal pivot
        c.iter().filter(|&l| l != pivot).chain(oc).collect()
    };
    Ok(Clause::normalize(lits))
}

/// All outer resolvents of `c` on `pivot` against the matrix clauses
/// containing `¬pivot`, in matrix order.
pub fn outer_resolvents(formula: &Dqbf, c: &Clause, pivot: Lit) -> Result<Vec<Normalized>> {
    check_pivot(formula, c, pivot)?;
    formula
        .clauses()
        .filter(|d| d.contains(!pivot))
        .map(|d| outer_resolvent(formula.prefix(), c, d, pivot))
        .collect()
}

fn check_pivot(formula: &Dqbf, c: &Clause, pivot: Lit) -> Result<()> {
    formula.check_compatible(c)?;
    if !c.contains(pivot) {
        return Err(Error::MissingLiteral(pivot));
    }
    Ok(())
}

/// DQRAT+ on `pivot`: every non-tautological outer resolvent `E` against the
/// matrix satisfies the abstracted propagation test on `¬E`.
pub fn dqrat_plus_check(formula: &Dqbf, c: &Clause, pivot: Lit) -> Result<bool> {
    dqrat_plus_excluding(formula, None, c, pivot)
}

fn dqrat_plus_excluding(formula: &Dqbf, skip: Option<&Clause>, c: &Clause, pivot: Lit) -> Result<bool> {
    check_pivot(formula, c, pivot)?;
    let mut outer = None;
    for d in formula.clauses().filter(|d| Some(*d) != skip && d.contains(!pivot)) {
        let outer = match &outer {
            Some(o) => o,
            None => outer.insert(outer_variables(formula.prefix(), pivot.var())?.outer),
        };
        let oc = outer_clause(d, outer);
        let lits: Vec<Lit> = if formula.prefix().is_existential(pivot.var()) {
            c.iter().chain(oc.into_iter().filter(|&l| l != !pivot)).collect()
        } else {
            c.iter().filter(|&l| l != pivot).chain(oc).collect()
        };
        let Normalized::Clause(resolvent) = Clause::normalize(lits) else {
            continue;
        };
        if !dqat_check_excluding(formula, skip, &resolvent)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Removes clauses that are DQRAT+ on an existential literal and drops
/// universal literals on which the clause is DQRAT+, both tested against
/// the matrix without the clause. Preserves satisfiability only.
pub fn dqrat_eliminate_pass(formula: &Dqbf) -> (Dqbf, PassReport) {
    let start = Instant::now();
    let mut report = PassReport::new("dqrat");
    let mut current = formula.clone();
    let snapshot: Vec<Clause> = formula.clauses().cloned().collect();
    for clause in snapshot {
        if !current.contains_clause(&clause) {
            continue;
        }
        let prefix = current.prefix().clone();
        let blocked = clause
            .iter()
            .filter(|l| prefix.is_existential(l.var()))
            .any(|l| dqrat_plus_excluding(&current, Some(&clause), &clause, l).expect("pivot is in the clause"));
        if blocked {
            current.remove_clause(&clause);
            report.clauses_removed += 1;
            continue;
        }

        let mut shortened = clause.clone();
        loop {
            let droppable = shortened.iter().find(|&l| {
                prefix.is_universal(l.var())
                    && !matches!(outer_variables(&prefix, l.var()), Err(Error::KernelUndefined(_)))
                    && dqrat_plus_excluding(&current, Some(&clause), &shortened, l).expect("pivot is in the clause")
            });
            let Some(l) = droppable else { break };
            shortened = universal_reduce_clause(&prefix, &shortened.without(l)).expect("compatible");
        }
        if shortened != clause {
            report.clauses_shortened += 1;
            report.literals_removed += clause.len() - shortened.len();
            if shortened.is_empty() {
                report.conflicts += 1;
            }
            current.replace_clause(&clause, shortened).expect("compatible");
        }
    }
    report.wall_time = start.elapsed();
    (current, report)
}
