//! The DQBF data model: variables, literals, clauses, the Henkin prefix and
//! the CNF matrix.
//!
//! Clauses are kept sorted by `(variable, polarity)` and free of duplicates,
//! so two clauses are equal exactly when they contain the same literals.
//! A matrix never stores a tautological clause.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Not;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 1-based variable identifier, as used in DQDIMACS files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(u32);

impl Var {
    /// # Panics
    /// If `id` is zero.
    pub fn new(id: u32) -> Self {
        assert!(id >= 1, "variable ids start at 1");
        Var(id)
    }

    pub fn try_new(id: u32) -> Option<Self> {
        (id >= 1).then_some(Var(id))
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, false)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit::new(self, true)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A variable or its negation. Orders by variable first, positive before
/// negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lit {
    var: Var,
    negated: bool,
}

impl Lit {
    pub fn new(var: Var, negated: bool) -> Self {
        Lit { var, negated }
    }

    /// Converts a nonzero DIMACS integer.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        let id = u32::try_from(value.unsigned_abs()).ok()?;
        Var::try_new(id).map(|v| Lit::new(v, value < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var.0);
        if self.negated {
            -id
        } else {
            id
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// The truth value this literal takes when its variable is `value`.
    pub fn eval(self, value: bool) -> bool {
        value != self.negated
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit::new(self.var, !self.negated)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Result of normalizing a raw literal list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Clause(Clause),
    Tautology,
}

impl Normalized {
    pub fn into_clause(self) -> Option<Clause> {
        match self {
            Normalized::Clause(c) => Some(c),
            Normalized::Tautology => None,
        }
    }

    pub fn is_tautology(&self) -> bool {
        matches!(self, Normalized::Tautology)
    }
}

/// A non-tautological disjunction of literals in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause(Vec<Lit>);

impl Clause {
    /// Sorts, removes duplicates and detects complementary pairs.
    pub fn normalize<I: IntoIterator<Item = Lit>>(lits: I) -> Normalized {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        // complementary literals are adjacent after sorting
        if lits.windows(2).any(|w| w[0].var == w[1].var) {
            return Normalized::Tautology;
        }
        Normalized::Clause(Clause(lits))
    }

    pub fn empty() -> Self {
        Clause(Vec::new())
    }

    pub fn unit(lit: Lit) -> Self {
        Clause(vec![lit])
    }

    pub fn binary(a: Lit, b: Lit) -> Normalized {
        Clause::normalize([a, b])
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Lit> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_unit(&self) -> Option<Lit> {
        match self.0.as_slice() {
            [l] => Some(*l),
            _ => None,
        }
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.0.binary_search(&lit).is_ok()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|l| l.var)
    }

    /// The clause with `lit` removed (unchanged if absent).
    pub fn without(&self, lit: Lit) -> Clause {
        Clause(self.0.iter().copied().filter(|&l| l != lit).collect())
    }

    /// Keeps the literals matching `keep`. Removing literals cannot create a
    /// tautology, so the result is again a clause.
    pub fn retain(&self, mut keep: impl FnMut(Lit) -> bool) -> Clause {
        Clause(self.0.iter().copied().filter(|&l| keep(l)).collect())
    }

    pub fn is_subset_of(&self, other: &Clause) -> bool {
        self.0.iter().all(|&l| other.contains(l))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

impl<'a> IntoIterator for &'a Clause {
    type Item = Lit;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, Lit>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// The quantifier prefix, viewed as a set: universals plus every existential
/// with its dependency set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prefix {
    universals: BTreeSet<Var>,
    existentials: BTreeMap<Var, BTreeSet<Var>>,
}

impl Prefix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_universal(&mut self, v: Var) -> Result<()> {
        if self.contains(v) {
            return Err(Error::Redeclared(v));
        }
        self.universals.insert(v);
        Ok(())
    }

    pub fn add_existential<I: IntoIterator<Item = Var>>(&mut self, v: Var, deps: I) -> Result<()> {
        if self.contains(v) {
            return Err(Error::Redeclared(v));
        }
        let deps: BTreeSet<Var> = deps.into_iter().collect();
        if let Some(&dep) = deps.iter().find(|d| !self.universals.contains(d)) {
            return Err(Error::NonUniversalDependency { var: v, dep });
        }
        self.existentials.insert(v, deps);
        Ok(())
    }

    pub fn universals(&self) -> &BTreeSet<Var> {
        &self.universals
    }

    pub fn existentials(&self) -> &BTreeMap<Var, BTreeSet<Var>> {
        &self.existentials
    }

    pub fn is_universal(&self, v: Var) -> bool {
        self.universals.contains(&v)
    }

    pub fn is_existential(&self, v: Var) -> bool {
        self.existentials.contains_key(&v)
    }

    pub fn contains(&self, v: Var) -> bool {
        self.is_universal(v) || self.is_existential(v)
    }

    /// The dependency set `D_y` of an existential.
    pub fn dependencies(&self, y: Var) -> Option<&BTreeSet<Var>> {
        self.existentials.get(&y)
    }

    /// All variables in ascending order.
    pub fn vars(&self) -> Vec<Var> {
        let mut vars: Vec<Var> = self
            .universals
            .iter()
            .chain(self.existentials.keys())
            .copied()
            .collect();
        vars.sort_unstable();
        vars
    }

    pub fn num_vars(&self) -> usize {
        self.universals.len() + self.existentials.len()
    }

    /// `{v}` for a universal, `D_v` for an existential.
    pub fn dep(&self, v: Var) -> Result<BTreeSet<Var>> {
        if self.is_universal(v) {
            Ok(BTreeSet::from([v]))
        } else if let Some(deps) = self.existentials.get(&v) {
            Ok(deps.clone())
        } else {
            Err(Error::Compatibility(v))
        }
    }

    pub fn dep_lit(&self, lit: Lit) -> Result<BTreeSet<Var>> {
        self.dep(lit.var())
    }

    /// Union of the literal dependencies.
    pub fn dep_clause(&self, clause: &Clause) -> Result<BTreeSet<Var>> {
        let mut out = BTreeSet::new();
        for l in clause {
            if self.is_universal(l.var()) {
                out.insert(l.var());
            } else if let Some(deps) = self.existentials.get(&l.var()) {
                out.extend(deps.iter().copied());
            } else {
                return Err(Error::Compatibility(l.var()));
            }
        }
        Ok(out)
    }

    /// `Π ∖ {v}`: a universal also leaves every dependency set, an
    /// existential is dropped together with its dependencies.
    pub fn remove(&mut self, v: Var) -> Result<()> {
        if self.universals.remove(&v) {
            for deps in self.existentials.values_mut() {
                deps.remove(&v);
            }
            Ok(())
        } else if self.existentials.remove(&v).is_some() {
            Ok(())
        } else {
            Err(Error::NotInPrefix(v))
        }
    }

    pub fn without(&self, v: Var) -> Result<Prefix> {
        let mut p = self.clone();
        p.remove(v)?;
        Ok(p)
    }

    /// Turns each universal in `vars` into an existential with an empty
    /// dependency set.
    pub fn abstracted<'a, I: IntoIterator<Item = &'a Var>>(&self, vars: I) -> Result<Prefix> {
        let mut p = self.clone();
        for &v in vars {
            if !self.is_universal(v) {
                return Err(Error::ContractViolation(format!(
                    "cannot abstract {v}: not a universal variable"
                )));
            }
            p.remove(v)?;
            p.existentials.insert(v, BTreeSet::new());
        }
        Ok(p)
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for u in &self.universals {
            write!(f, "∀{u} ")?;
        }
        for (y, deps) in &self.existentials {
            write!(f, "∃{y}(")?;
            for (i, d) in deps.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{d}")?;
            }
            f.write_str(") ")?;
        }
        Ok(())
    }
}

/// A DQBF `Π : φ` with a CNF matrix. The matrix is an insertion-ordered set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dqbf {
    prefix: Prefix,
    matrix: IndexSet<Clause>,
}

impl Dqbf {
    pub fn new<I: IntoIterator<Item = Clause>>(prefix: Prefix, clauses: I) -> Result<Self> {
        let mut f = Dqbf {
            prefix,
            matrix: IndexSet::new(),
        };
        for c in clauses {
            f.add_clause(c)?;
        }
        Ok(f)
    }

    pub fn prefix(&self) -> &Prefix {
        &self.prefix
    }

    pub fn matrix(&self) -> &IndexSet<Clause> {
        &self.matrix
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.matrix.iter()
    }

    pub fn num_clauses(&self) -> usize {
        self.matrix.len()
    }

    pub fn num_literals(&self) -> usize {
        self.matrix.iter().map(Clause::len).sum()
    }

    pub fn is_compatible(&self, clause: &Clause) -> bool {
        clause.vars().all(|v| self.prefix.contains(v))
    }

    pub fn check_compatible(&self, clause: &Clause) -> Result<()> {
        match clause.vars().find(|&v| !self.prefix.contains(v)) {
            Some(v) => Err(Error::Compatibility(v)),
            None => Ok(()),
        }
    }

    pub fn contains_clause(&self, clause: &Clause) -> bool {
        self.matrix.contains(clause)
    }

    pub fn has_empty_clause(&self) -> bool {
        self.matrix.iter().any(Clause::is_empty)
    }

    /// Adds a compatible clause. Returns `false` if it was already present.
    pub fn add_clause(&mut self, clause: Clause) -> Result<bool> {
        self.check_compatible(&clause)?;
        Ok(self.matrix.insert(clause))
    }

    /// Removes a clause, keeping the order of the others.
    pub fn remove_clause(&mut self, clause: &Clause) -> bool {
        self.matrix.shift_remove(clause)
    }

    /// Replaces `old` by `new` in place. If `new` is already present, `old`
    /// is simply dropped.
    pub fn replace_clause(&mut self, old: &Clause, new: Clause) -> Result<()> {
        self.check_compatible(&new)?;
        let Some(index) = self.matrix.get_index_of(old) else {
            return Err(Error::ContractViolation(format!("clause {old} is not in the matrix")));
        };
        if old == &new {
            return Ok(());
        }
        if self.matrix.contains(&new) {
            self.matrix.shift_remove_index(index);
        } else {
            let _ = self.matrix.replace_index(index, new);
        }
        Ok(())
    }

    /// The formula with its matrix replaced, keeping the prefix.
    pub fn with_matrix<I: IntoIterator<Item = Clause>>(&self, clauses: I) -> Result<Dqbf> {
        Dqbf::new(self.prefix.clone(), clauses)
    }

    /// `Π : φ ∧ extra`.
    pub fn and_clauses<I: IntoIterator<Item = Clause>>(&self, extra: I) -> Result<Dqbf> {
        let mut f = self.clone();
        for c in extra {
            f.add_clause(c)?;
        }
        Ok(f)
    }

    /// `abs(Ψ, vars)`: each universal of `vars` becomes `∃v(∅)`; the matrix is
    /// left alone.
    pub fn abstracted<'a, I: IntoIterator<Item = &'a Var>>(&self, vars: I) -> Result<Dqbf> {
        Ok(Dqbf {
            prefix: self.prefix.abstracted(vars)?,
            matrix: self.matrix.clone(),
        })
    }

    pub fn into_parts(self) -> (Prefix, IndexSet<Clause>) {
        (self.prefix, self.matrix)
    }

    /// Direct prefix access for passes that drop variables. Callers must keep
    /// every clause compatible.
    pub(crate) fn from_parts_unchecked(prefix: Prefix, matrix: IndexSet<Clause>) -> Dqbf {
        debug_assert!(matrix.iter().all(|c| c.vars().all(|v| prefix.contains(v))));
        Dqbf { prefix, matrix }
    }
}

impl fmt::Display for Dqbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.prefix)?;
        for c in &self.matrix {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: u32) -> Var {
        Var::new(id)
    }

    fn mirror_prefix() -> Prefix {
        let mut p = Prefix::new();
        p.add_universal(v(1)).unwrap();
        p.add_existential(v(2), [v(1)]).unwrap();
        p
    }

    #[test]
    fn dep_of_existential_universal_and_clause() {
        let p = mirror_prefix();
        assert_eq!(p.dep(v(2)).unwrap(), BTreeSet::from([v(1)]));
        assert_eq!(p.dep(v(1)).unwrap(), BTreeSet::from([v(1)]));
        let c = Clause::normalize([v(1).pos(), v(2).neg()]).into_clause().unwrap();
        assert_eq!(p.dep_clause(&c).unwrap(), BTreeSet::from([v(1)]));
        assert_eq!(p.dep_lit(v(2).neg()).unwrap(), BTreeSet::from([v(1)]));
    }

    #[test]
    fn dep_of_unknown_variable_fails() {
        let p = mirror_prefix();
        assert_eq!(p.dep(v(9)), Err(Error::Compatibility(v(9))));
    }

    #[test]
    fn prefix_remove_rules() {
        let p = mirror_prefix();
        let q = p.without(v(1)).unwrap();
        assert!(q.universals().is_empty());
        assert_eq!(q.dependencies(v(2)).unwrap(), &BTreeSet::new());

        let q = p.without(v(2)).unwrap();
        assert_eq!(q.universals(), &BTreeSet::from([v(1)]));
        assert!(q.existentials().is_empty());

        let mut p = Prefix::new();
        p.add_universal(v(1)).unwrap();
        p.add_universal(v(2)).unwrap();
        p.add_existential(v(3), [v(1), v(2)]).unwrap();
        let q = p.without(v(2)).unwrap();
        assert_eq!(q.universals(), &BTreeSet::from([v(1)]));
        assert_eq!(q.dependencies(v(3)).unwrap(), &BTreeSet::from([v(1)]));

        assert_eq!(p.without(v(7)), Err(Error::NotInPrefix(v(7))));
    }

    #[test]
    fn normalize_examples() {
        let y = v(2);
        assert_eq!(
            Clause::normalize([y.pos(), y.pos()]),
            Normalized::Clause(Clause::unit(y.pos()))
        );
        assert_eq!(Clause::normalize([v(1).pos(), v(1).neg()]), Normalized::Tautology);
        let c = Clause::normalize([y.neg(), v(1).pos()]).into_clause().unwrap();
        assert_eq!(c.lits(), &[v(1).pos(), y.neg()]);
    }

    #[test]
    fn compatibility() {
        let f = Dqbf::new(mirror_prefix(), []).unwrap();
        let c = Clause::normalize([v(1).pos(), v(2).neg()]).into_clause().unwrap();
        assert!(f.is_compatible(&c));
        assert!(!f.is_compatible(&Clause::unit(v(3).pos())));
        assert!(f.is_compatible(&Clause::empty()));
    }

    #[test]
    fn dependency_must_be_universal() {
        let mut p = Prefix::new();
        p.add_existential(v(1), []).unwrap();
        assert!(matches!(
            p.add_existential(v(2), [v(1)]),
            Err(Error::NonUniversalDependency { .. })
        ));
        assert_eq!(p.add_universal(v(1)), Err(Error::Redeclared(v(1))));
    }

    #[test]
    fn abstraction_requires_universals() {
        let p = mirror_prefix();
        let a = p.abstracted(&[v(1)]).unwrap();
        assert!(a.is_existential(v(1)));
        assert!(a.dependencies(v(2)).unwrap().is_empty());
        assert!(p.abstracted(&[v(2)]).is_err());
        assert_eq!(p.abstracted(&[]).unwrap(), p);
    }

    #[test]
    fn replace_keeps_position_and_set_semantics() {
        let mut p = Prefix::new();
        for i in 1..=3 {
            p.add_existential(v(i), []).unwrap();
        }
        let a = Clause::unit(v(1).pos());
        let b = Clause::normalize([v(2).pos(), v(3).pos()]).into_clause().unwrap();
        let c = Clause::unit(v(3).pos());
        let mut f = Dqbf::new(p, [a.clone(), b.clone(), c.clone()]).unwrap();
        f.replace_clause(&b, Clause::unit(v(2).pos())).unwrap();
        let order: Vec<_> = f.clauses().cloned().collect();
        assert_eq!(order, vec![a.clone(), Clause::unit(v(2).pos()), c.clone()]);
        f.replace_clause(&a, c.clone()).unwrap();
        assert_eq!(f.num_clauses(), 2);
    }
}
