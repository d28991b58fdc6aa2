//! Brute-force DQBF semantics for small instances.
//!
//! Two independent deciders: enumeration of Skolem-function tuples, and
//! universal expansion into a propositional formula solved by a small DPLL
//! procedure. Equivalence and implication compare the full sets of Skolem
//! tuples.
//!
//! Assignments are ranked with variables in ascending id order and the
//! smallest id as the least significant bit. A Skolem tuple is numbered by
//! concatenating the truth tables of the existentials in ascending order,
//! first existential in the lowest bits; enumeration runs in that order, so
//! the reported witness is the canonically first one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{BudgetError, Error, Result};
use crate::formula::{Clause, Dqbf, Lit, Var};

/// Work bounds, as base-2 exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Bound on the number of Skolem tuples, `Σ_y 2^|D_y|`.
    pub skolem_log2: u32,
    /// Bound on universal assignments times clauses for expansion and for
    /// the per-tuple check.
    pub expansion_log2: u32,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            skolem_log2: 20,
            expansion_log2: 20,
        }
    }
}

/// A total assignment over some set of variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariableAssignment(BTreeMap<Var, bool>);

impl VariableAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Decodes `rank` over `vars` (ascending, smallest id least significant).
    pub fn from_rank(vars: &[Var], rank: u64) -> Self {
        VariableAssignment(vars.iter().enumerate().map(|(i, &v)| (v, rank >> i & 1 == 1)).collect())
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.0.insert(var, value);
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.0.get(&var).copied()
    }

    /// Rank of the restriction to `vars`. Missing variables read as 0.
    pub fn rank_of(&self, vars: &[Var]) -> usize {
        vars.iter()
            .enumerate()
            .filter(|(_, v)| self.get(**v) == Some(true))
            .map(|(i, _)| 1 << i)
            .sum()
    }
}

impl FromIterator<(Var, bool)> for VariableAssignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        VariableAssignment(iter.into_iter().collect())
    }
}

/// Evaluates a CNF matrix under a total assignment.
pub fn evaluate<'a, I>(matrix: I, assignment: &VariableAssignment) -> Result<bool>
where
    I: IntoIterator<Item = &'a Clause>,
{
    let mut all = true;
    for clause in matrix {
        let mut satisfied = false;
        for l in clause {
            let value = assignment
                .get(l.var())
                .ok_or_else(|| Error::ContractViolation(format!("assignment misses variable {}", l.var())))?;
            satisfied |= l.eval(value);
        }
        all &= satisfied;
    }
    Ok(all)
}

/// A truth table for one existential over assignments of its dependencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkolemFunction {
    pub variable: Var,
    /// The dependency set in ascending order.
    pub domain: Vec<Var>,
    /// Indexed by the rank of the domain assignment.
    pub table: Vec<bool>,
}

impl SkolemFunction {
    pub fn constant(variable: Var, value: bool) -> Self {
        SkolemFunction {
            variable,
            domain: Vec::new(),
            table: vec![value],
        }
    }

    pub fn apply(&self, assignment: &VariableAssignment) -> bool {
        self.table[assignment.rank_of(&self.domain)]
    }
}

/// One Skolem function per existential, ascending by variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkolemTuple {
    pub functions: Vec<SkolemFunction>,
}

impl SkolemTuple {
    pub fn get(&self, var: Var) -> Option<&SkolemFunction> {
        self.functions.iter().find(|f| f.variable == var)
    }
}

impl fmt::Display for SkolemTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for func in &self.functions {
            write!(f, "s_{}[", func.variable)?;
            for &b in &func.table {
                f.write_str(if b { "1" } else { "0" })?;
            }
            f.write_str("] ")?;
        }
        Ok(())
    }
}

/// Does the tuple turn the matrix into a tautology over all universal
/// assignments? Evaluates the matrix point by point.
pub fn is_skolem(formula: &Dqbf, tuple: &SkolemTuple) -> Result<bool> {
    let prefix = formula.prefix();
    if tuple.functions.len() != prefix.existentials().len() {
        return Err(Error::ContractViolation("tuple does not cover the existentials".into()));
    }
    for func in &tuple.functions {
        let Some(deps) = prefix.dependencies(func.variable) else {
            return Err(Error::ContractViolation(format!(
                "{} is not existential",
                func.variable
            )));
        };
        if !deps.iter().copied().eq(func.domain.iter().copied()) || func.table.len() != 1 << func.domain.len() {
            return Err(Error::ContractViolation(format!(
                "domain mismatch for {}",
                func.variable
            )));
        }
    }
    let universals: Vec<Var> = prefix.universals().iter().copied().collect();
    if universals.len() >= 63 {
        return Err(Error::ContractViolation("too many universals".into()));
    }
    for rank in 0..1u64 << universals.len() {
        let mut assignment = VariableAssignment::from_rank(&universals, rank);
        for func in &tuple.functions {
            let value = func.apply(&assignment);
            assignment.set(func.variable, value);
        }
        if !evaluate(formula.clauses(), &assignment)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The Skolem tuples of a prefix packed into bits, with the matrix compiled
/// to one bit constraint per (universal assignment, clause).
struct SkolemSpace {
    existentials: Vec<(Var, Vec<Var>, u32)>,
    bits: u32,
    /// `(positive, negative)`: satisfied iff `t & positive != 0` or
    /// `!t & negative != 0`.
    constraints: Vec<(u64, u64)>,
    /// Some clause has no existential literal left under some universal
    /// assignment, so no tuple works.
    infeasible: bool,
}

impl SkolemSpace {
    fn compile(formula: &Dqbf, budget: &OracleBudget) -> Result<Self, BudgetError> {
        let prefix = formula.prefix();
        let universals: Vec<Var> = prefix.universals().iter().copied().collect();
        let mut existentials = Vec::new();
        let mut bits: u64 = 0;
        for (&y, deps) in prefix.existentials() {
            let deps: Vec<Var> = deps.iter().copied().collect();
            let width = 1u64.checked_shl(deps.len() as u32).unwrap_or(u64::MAX);
            existentials.push((y, deps, bits as u32));
            bits = bits.saturating_add(width);
        }
        if bits > u64::from(budget.skolem_log2.min(62)) {
            return Err(BudgetError {
                what: "Skolem enumeration",
                needed: bits.min(u64::from(u32::MAX)) as u32,
                limit: budget.skolem_log2,
            });
        }
        let clause_log = usize::BITS - formula.num_clauses().leading_zeros();
        let needed = universals.len() as u32 + clause_log;
        if needed > budget.expansion_log2 {
            return Err(BudgetError {
                what: "universal assignments",
                needed,
                limit: budget.expansion_log2,
            });
        }

        let mut space = SkolemSpace {
            existentials,
            bits: bits as u32,
            constraints: Vec::new(),
            infeasible: false,
        };
        let index: BTreeMap<Var, usize> = space
            .existentials
            .iter()
            .enumerate()
            .map(|(i, (y, _, _))| (*y, i))
            .collect();
        let position: BTreeMap<Var, usize> = universals.iter().enumerate().map(|(i, &u)| (u, i)).collect();

        let mut seen = BTreeSet::new();
        for mu in 0..1u64 << universals.len() {
            'clauses: for clause in formula.clauses() {
                let (mut pos, mut neg) = (0u64, 0u64);
                for l in clause {
                    if let Some(&i) = position.get(&l.var()) {
                        if l.eval(mu >> i & 1 == 1) {
                            continue 'clauses;
                        }
                    } else {
                        let (_, deps, offset) = &space.existentials[index[&l.var()]];
                        let rank: u32 = deps
                            .iter()
                            .enumerate()
                            .filter(|(_, d)| mu >> position[d] & 1 == 1)
                            .map(|(j, _)| 1 << j)
                            .sum();
                        let bit = 1u64 << (offset + rank);
                        if l.is_negated() {
                            neg |= bit;
                        } else {
                            pos |= bit;
                        }
                    }
                }
                if pos & neg != 0 {
                    continue;
                }
                if pos == 0 && neg == 0 {
                    space.infeasible = true;
                }
                if seen.insert((pos, neg)) {
                    space.constraints.push((pos, neg));
                }
            }
        }
        Ok(space)
    }

    fn candidates(&self) -> u64 {
        1u64 << self.bits
    }

    fn accepts(&self, t: u64) -> bool {
        !self.infeasible && self.constraints.iter().all(|&(pos, neg)| t & pos != 0 || !t & neg != 0)
    }

    fn decode(&self, t: u64) -> SkolemTuple {
        SkolemTuple {
            functions: self
                .existentials
                .iter()
                .map(|(y, deps, offset)| SkolemFunction {
                    variable: *y,
                    domain: deps.clone(),
                    table: (0..1u32 << deps.len()).map(|r| t >> (offset + r) & 1 == 1).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteVerdict {
    Sat(SkolemTuple),
    Unsat,
}

impl BruteVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, BruteVerdict::Sat(_))
    }
}

/// Enumerates Skolem tuples in canonical order and returns the first one
/// that works.
pub fn solve_brute(formula: &Dqbf, budget: &OracleBudget) -> Result<BruteVerdict, BudgetError> {
    let space = SkolemSpace::compile(formula, budget)?;
    if space.infeasible {
        return Ok(BruteVerdict::Unsat);
    }
    Ok((0..space.candidates())
        .find(|&t| space.accepts(t))
        .map_or(BruteVerdict::Unsat, |t| BruteVerdict::Sat(space.decode(t))))
}

/// Decides satisfiability by expanding the universals: each existential `y`
/// becomes one propositional variable per assignment of `D_y`.
pub fn solve_expansion(formula: &Dqbf, budget: &OracleBudget) -> Result<bool, BudgetError> {
    let prefix = formula.prefix();
    let universals: Vec<Var> = prefix.universals().iter().copied().collect();
    let clause_log = usize::BITS - formula.num_clauses().leading_zeros();
    let needed = universals.len() as u32 + clause_log;
    if needed > budget.expansion_log2 {
        return Err(BudgetError {
            what: "universal expansion",
            needed,
            limit: budget.expansion_log2,
        });
    }

    let mut copies: BTreeMap<(Var, Vec<bool>), usize> = BTreeMap::new();
    let mut cnf: Vec<Vec<(usize, bool)>> = Vec::new();
    for rank in 0..1u64 << universals.len() {
        let mu = VariableAssignment::from_rank(&universals, rank);
        'clauses: for clause in formula.clauses() {
            let mut expanded = Vec::new();
            for l in clause {
                match prefix.dependencies(l.var()) {
                    None => {
                        if l.eval(mu.get(l.var()).unwrap_or(false)) {
                            continue 'clauses;
                        }
                    }
                    Some(deps) => {
                        let key = (l.var(), deps.iter().map(|d| mu.get(*d) == Some(true)).collect());
                        let next = copies.len();
                        let id = *copies.entry(key).or_insert(next);
                        expanded.push((id, !l.is_negated()));
                    }
                }
            }
            if expanded.is_empty() {
                return Ok(false);
            }
            cnf.push(expanded);
        }
    }
    let mut values = vec![None; copies.len()];
    Ok(dpll(&cnf, &mut values))
}

fn dpll(cnf: &[Vec<(usize, bool)>], values: &mut Vec<Option<bool>>) -> bool {
    let mut trail = Vec::new();
    let consistent = loop {
        let mut changed = false;
        let mut conflict = false;
        for clause in cnf {
            let mut open = None;
            let mut open_count = 0;
            let mut satisfied = false;
            for &(var, positive) in clause {
                match values[var] {
                    Some(v) if v == positive => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        open_count += 1;
                        open = Some((var, positive));
                    }
                }
            }
            if satisfied {
                continue;
            }
            match (open_count, open) {
                (0, _) => {
                    conflict = true;
                    break;
                }
                (1, Some((var, positive))) => {
                    values[var] = Some(positive);
                    trail.push(var);
                    changed = true;
                }
                _ => {}
            }
        }
        if conflict {
            break false;
        }
        if !changed {
            break true;
        }
    };
    if consistent {
        match values.iter().position(Option::is_none) {
            None => return true,
            Some(var) => {
                for choice in [false, true] {
                    values[var] = Some(choice);
                    if dpll(cnf, values) {
                        return true;
                    }
                }
                values[var] = None;
            }
        }
    }
    for var in trail {
        values[var] = None;
    }
    false
}

fn same_prefix(f1: &Dqbf, f2: &Dqbf) -> Result<()> {
    if f1.prefix() != f2.prefix() {
        return Err(Error::ContractViolation(format!(
            "prefixes differ: {} vs {}",
            f1.prefix(),
            f2.prefix()
        )));
    }
    Ok(())
}

/// `f1 ⊨ f2`: every Skolem tuple of `f1` is one of `f2`.
pub fn implies(f1: &Dqbf, f2: &Dqbf, budget: &OracleBudget) -> Result<bool> {
    same_prefix(f1, f2)?;
    let s1 = SkolemSpace::compile(f1, budget)?;
    let s2 = SkolemSpace::compile(f2, budget)?;
    Ok((0..s1.candidates()).all(|t| !s1.accepts(t) || s2.accepts(t)))
}

/// Same set of Skolem tuples.
pub fn equivalent(f1: &Dqbf, f2: &Dqbf, budget: &OracleBudget) -> Result<bool> {
    same_prefix(f1, f2)?;
    let s1 = SkolemSpace::compile(f1, budget)?;
    let s2 = SkolemSpace::compile(f2, budget)?;
    Ok((0..s1.candidates()).all(|t| s1.accepts(t) == s2.accepts(t)))
}

/// Same satisfiability verdict.
pub fn equisatisfiable(f1: &Dqbf, f2: &Dqbf, budget: &OracleBudget) -> Result<bool, BudgetError> {
    Ok(solve_brute(f1, budget)?.is_sat() == solve_brute(f2, budget)?.is_sat())
}

/// Restricts a literal-level witness check: `Ψ ⊨ C` for a single clause,
/// i.e. every Skolem tuple of `Ψ` satisfies `C`.
pub fn implies_clause(formula: &Dqbf, clause: &Clause, budget: &OracleBudget) -> Result<bool> {
    let strengthened = formula.and_clauses([clause.clone()])?;
    implies(formula, &strengthened, budget)
}

/// Adds each literal as a unit clause.
pub fn with_units(formula: &Dqbf, units: &[Lit]) -> Result<Dqbf> {
    formula.and_clauses(units.iter().map(|&l| Clause::unit(l)))
}
