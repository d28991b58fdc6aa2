//! Universal reduction, unit propagation with universal reduction, formula
//! abstraction and the abstracted clause-derivation test built from them.

use std::collections::{BTreeSet, HashMap, VecDeque};

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::formula::{Clause, Dqbf, Lit, Prefix, Var};

/// Removes every universal literal that no existential literal of the clause
/// may depend on.
pub fn universal_reduce_clause(prefix: &Prefix, clause: &Clause) -> Result<Clause> {
    let mut support = BTreeSet::new();
    for l in clause {
        if let Some(deps) = prefix.dependencies(l.var()) {
            support.extend(deps.iter().copied());
        } else if !prefix.is_universal(l.var()) {
            return Err(Error::Compatibility(l.var()));
        }
    }
    Ok(clause.retain(|l| !prefix.is_universal(l.var()) || support.contains(&l.var())))
}

/// Clause-wise universal reduction; the prefix is unchanged.
pub fn universal_reduce(formula: &Dqbf) -> Dqbf {
    let prefix = formula.prefix();
    let matrix: IndexSet<Clause> = formula
        .clauses()
        .map(|c| universal_reduce_clause(prefix, c).expect("matrix clauses are compatible"))
        .collect();
    Dqbf::from_parts_unchecked(prefix.clone(), matrix)
}

/// Result of running unit propagation to its fixpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropagationOutcome {
    /// The empty clause was derived.
    Conflict,
    /// `result` is the propagated formula: satisfied clauses removed,
    /// falsified literals deleted, propagated variables dropped from the
    /// prefix. `units` lists the existential unit literals in processing
    /// order.
    Fixpoint { result: Dqbf, units: Vec<Lit> },
}

impl PropagationOutcome {
    pub fn is_conflict(&self) -> bool {
        matches!(self, PropagationOutcome::Conflict)
    }

    pub fn units(&self) -> &[Lit] {
        match self {
            PropagationOutcome::Conflict => &[],
            PropagationOutcome::Fixpoint { units, .. } => units,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Conflict,
    Fixpoint,
    /// The step limit ran out before a verdict.
    Exhausted,
}

/// Occurrence-list propagator over a private copy of the clauses.
///
/// Units are processed FIFO, seeded in clause order; every clause that loses
/// a literal is universally reduced before the next unit is dequeued.
pub(crate) struct Propagator<'p> {
    prefix: &'p Prefix,
    clauses: Vec<Vec<Lit>>,
    alive: Vec<bool>,
    occurs: HashMap<Lit, Vec<usize>>,
    values: HashMap<Var, bool>,
    queue: VecDeque<Lit>,
    units: Vec<Lit>,
    steps: u64,
    status: Option<Status>,
}

impl<'p> Propagator<'p> {
    pub(crate) fn new<'c, I>(prefix: &'p Prefix, clauses: I) -> Self
    where
        I: IntoIterator<Item = &'c Clause>,
    {
        let mut p = Propagator {
            prefix,
            clauses: Vec::new(),
            alive: Vec::new(),
            occurs: HashMap::new(),
            values: HashMap::new(),
            queue: VecDeque::new(),
            units: Vec::new(),
            steps: 0,
            status: None,
        };
        for c in clauses {
            p.push(c.lits().to_vec());
        }
        p
    }

    /// Adds `lit` as a unit clause that is not part of the matrix proper.
    pub(crate) fn assume(&mut self, lit: Lit) {
        self.push(vec![lit]);
    }

    fn push(&mut self, lits: Vec<Lit>) {
        let index = self.clauses.len();
        for &l in &lits {
            self.occurs.entry(l).or_default().push(index);
        }
        self.clauses.push(lits);
        self.alive.push(true);
    }

    fn reduce(&mut self, index: usize) {
        let prefix = self.prefix;
        let lits = &mut self.clauses[index];
        let support: BTreeSet<Var> = lits
            .iter()
            .filter_map(|l| prefix.dependencies(l.var()))
            .flatten()
            .copied()
            .collect();
        lits.retain(|l| !prefix.is_universal(l.var()) || support.contains(&l.var()));
    }

    /// Reduces and inspects a clause. Returns `false` on conflict.
    fn settle(&mut self, index: usize) -> bool {
        self.reduce(index);
        match self.clauses[index].as_slice() {
            [] => false,
            [l] => {
                self.queue.push_back(*l);
                true
            }
            _ => true,
        }
    }

    pub(crate) fn run(&mut self, limit: Option<u64>) -> Status {
        if let Some(status) = self.status {
            return status;
        }
        let status = self.propagate(limit);
        self.status = Some(status);
        status
    }

    fn propagate(&mut self, limit: Option<u64>) -> Status {
        for index in 0..self.clauses.len() {
            if !self.settle(index) {
                return Status::Conflict;
            }
        }
        while let Some(lit) = self.queue.pop_front() {
            match self.values.get(&lit.var()) {
                Some(&value) if lit.eval(value) => continue,
                Some(_) => return Status::Conflict,
                None => {}
            }
            if limit.is_some_and(|limit| self.steps >= limit) {
                return Status::Exhausted;
            }
            self.steps += 1;
            self.values.insert(lit.var(), !lit.is_negated());
            self.units.push(lit);
            if let Some(sat) = self.occurs.get(&lit) {
                for &i in sat {
                    self.alive[i] = false;
                }
            }
            let touched = self.occurs.get(&!lit).cloned().unwrap_or_default();
            for i in touched {
                if !self.alive[i] {
                    continue;
                }
                self.clauses[i].retain(|&l| l != !lit);
                if !self.settle(i) {
                    return Status::Conflict;
                }
            }
        }
        Status::Fixpoint
    }

    pub(crate) fn units(&self) -> &[Lit] {
        &self.units
    }

    pub(crate) fn steps(&self) -> u64 {
        self.steps
    }

    /// The propagated formula. Only meaningful at a fixpoint.
    pub(crate) fn remaining(&self) -> Dqbf {
        let mut prefix = self.prefix.clone();
        for l in &self.units {
            prefix.remove(l.var()).expect("propagated variables are in the prefix");
        }
        let matrix: IndexSet<Clause> = self
            .clauses
            .iter()
            .zip(&self.alive)
            .filter(|(_, &alive)| alive)
            .map(|(lits, _)| {
                Clause::normalize(lits.iter().copied())
                    .into_clause()
                    .expect("no tautologies")
            })
            .collect();
        Dqbf::from_parts_unchecked(prefix, matrix)
    }
}

/// Iterated unit propagation with universal reduction.
pub fn unit_propagate(formula: &Dqbf) -> PropagationOutcome {
    let mut p = Propagator::new(formula.prefix(), formula.clauses());
    outcome(&mut p)
}

fn outcome(p: &mut Propagator<'_>) -> PropagationOutcome {
    match p.run(None) {
        Status::Fixpoint => PropagationOutcome::Fixpoint {
            result: p.remaining(),
            units: p.units().to_vec(),
        },
        _ => PropagationOutcome::Conflict,
    }
}

/// `abs(Ψ, vars)`: every variable of `vars` becomes an existential with an
/// empty dependency set; the matrix is left unchanged.
pub fn abstraction(formula: &Dqbf, vars: &BTreeSet<Var>) -> Result<Dqbf> {
    formula.abstracted(vars)
}

pub(crate) struct AbstractedRun {
    pub status: Status,
    pub units: Vec<Lit>,
    pub steps: u64,
}

/// Unit propagation on `abs(Π : φ ∧ ⋀assumptions, vars)`, where φ may
/// skip one clause. The assumptions are injected as unit clauses that never
/// enter the matrix.
pub(crate) fn propagate_abstracted(
    formula: &Dqbf,
    skip: Option<&Clause>,
    assumptions: &[Lit],
    vars: &BTreeSet<Var>,
    limit: Option<u64>,
) -> Result<AbstractedRun> {
    let prefix = formula.prefix().abstracted(vars)?;
    let mut p = Propagator::new(&prefix, formula.clauses().filter(|c| Some(*c) != skip));
    for &l in assumptions {
        if !prefix.contains(l.var()) {
            return Err(Error::Compatibility(l.var()));
        }
        p.assume(l);
    }
    let status = p.run(limit);
    Ok(AbstractedRun {
        status,
        units: p.units().to_vec(),
        steps: p.steps(),
    })
}

/// Unit propagation on `Π : φ ∧ ⋀assumptions` without abstraction.
pub fn unit_propagate_with(formula: &Dqbf, assumptions: &[Lit]) -> Result<PropagationOutcome> {
    let mut p = Propagator::new(formula.prefix(), formula.clauses());
    for &l in assumptions {
        formula.prefix().dep(l.var())?;
        p.assume(l);
    }
    Ok(outcome(&mut p))
}

/// The DQAT test: does `abs(Π : φ ∧ ¬C, dep(C))` propagate to a conflict?
/// A positive answer means `Π:φ ≡ Π:φ ∧ C`.
pub fn dqat_check(formula: &Dqbf, clause: &Clause) -> Result<bool> {
    dqat_check_excluding(formula, None, clause)
}

/// [`dqat_check`] against the matrix with `skip` removed.
pub(crate) fn dqat_check_excluding(formula: &Dqbf, skip: Option<&Clause>, clause: &Clause) -> Result<bool> {
    formula.check_compatible(clause)?;
    let vars = formula.prefix().dep_clause(clause)?;
    let negated: Vec<Lit> = clause.iter().map(|l| !l).collect();
    let run = propagate_abstracted(formula, skip, &negated, &vars, None)?;
    Ok(run.status == Status::Conflict)
}
