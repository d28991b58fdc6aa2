//! Reading and writing the DQDIMACS text format.
//!
//! ```text
//! c comment
//! p cnf <maxvar> <nclauses>
//! a <universals> 0
//! e <existentials> 0        depends on all universals declared so far
//! d <y> <dependencies> 0    explicit dependency set
//! <literals> 0
//! ```

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::io::{self, BufRead};

use thiserror::Error;

use crate::formula::{Clause, Dqbf, Lit, Normalized, Prefix, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "line {}: {kind}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ParseError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            message: message.into(),
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } => Some(*line),
            ParseError::Io(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub formula: Dqbf,
    pub diagnostics: Vec<ParseDiagnostic>,
}

#[derive(Default)]
struct Parser {
    header: Option<(u32, usize)>,
    prefix: Prefix,
    /// Universals in declaration order, for `e` lines.
    declared_universals: Vec<Var>,
    clauses: Vec<(usize, Vec<Lit>)>,
    pending: Vec<Lit>,
    pending_line: usize,
    diagnostics: Vec<ParseDiagnostic>,
}

impl Parser {
    fn warn(&mut self, line: usize, message: impl Into<String>) {
        self.diagnostics.push(ParseDiagnostic {
            line,
            message: message.into(),
            severity: Severity::Warning,
        });
    }

    fn var(&self, line: usize, token: &str) -> Result<Var, ParseError> {
        let id: u32 = token
            .parse()
            .map_err(|_| ParseError::at(line, format!("expected a variable, found `{token}`")))?;
        let var = Var::try_new(id).ok_or_else(|| ParseError::at(line, "variable 0 inside a quantifier list"))?;
        self.check_range(line, var)?;
        Ok(var)
    }

    fn check_range(&self, line: usize, var: Var) -> Result<(), ParseError> {
        let (maxvar, _) = self.header.expect("header checked before use");
        if var.id() > maxvar {
            return Err(ParseError::at(
                line,
                format!("variable {var} is undeclared: exceeds header maximum {maxvar}"),
            ));
        }
        Ok(())
    }

    /// Splits a quantifier line into its variables, checking the final 0.
    fn quantified_vars(&self, line: usize, tokens: &[&str]) -> Result<Vec<Var>, ParseError> {
        match tokens.split_last() {
            Some((&"0", vars)) => vars.iter().map(|t| self.var(line, t)).collect(),
            _ => Err(ParseError::at(line, "quantifier line must end with 0")),
        }
    }

    fn line(&mut self, line: usize, text: &str) -> Result<(), ParseError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let Some(&first) = tokens.first() else {
            return Ok(());
        };
        if first == "c" {
            return Ok(());
        }
        if first == "p" {
            return self.header_line(line, &tokens);
        }
        if self.header.is_none() {
            return Err(ParseError::at(line, "expected `p cnf` header"));
        }
        match first {
            "a" | "e" | "d" => {
                if !self.clauses.is_empty() || !self.pending.is_empty() {
                    return Err(ParseError::at(line, "quantifier line after the first clause"));
                }
                let vars = self.quantified_vars(line, &tokens[1..])?;
                self.quantifier_line(line, first, vars)
            }
            _ => self.clause_tokens(line, &tokens),
        }
    }

    fn header_line(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        if self.header.is_some() {
            return Err(ParseError::at(line, "duplicate header"));
        }
        let malformed = || ParseError::at(line, "malformed header, expected `p cnf <vars> <clauses>`");
        let [_, "cnf", vars, clauses] = tokens else {
            return Err(malformed());
        };
        let vars: u32 = vars.parse().map_err(|_| malformed())?;
        let clauses: usize = clauses.parse().map_err(|_| malformed())?;
        self.header = Some((vars, clauses));
        Ok(())
    }

    fn quantifier_line(&mut self, line: usize, kind: &str, vars: Vec<Var>) -> Result<(), ParseError> {
        let redeclared = |v: Var| ParseError::at(line, format!("variable {v} redeclared"));
        match kind {
            "a" => {
                for v in vars {
                    self.prefix.add_universal(v).map_err(|_| redeclared(v))?;
                    self.declared_universals.push(v);
                }
            }
            "e" => {
                for v in vars {
                    self.prefix
                        .add_existential(v, self.declared_universals.iter().copied())
                        .map_err(|_| redeclared(v))?;
                }
            }
            _ => {
                let Some((&y, deps)) = vars.split_first() else {
                    return Err(ParseError::at(line, "`d` line without a variable"));
                };
                if self.prefix.contains(y) {
                    return Err(redeclared(y));
                }
                if let Some(&d) = deps.iter().find(|&&d| !self.prefix.is_universal(d)) {
                    return Err(ParseError::at(
                        line,
                        format!("dependency {d} of {y} is not a declared universal"),
                    ));
                }
                self.prefix
                    .add_existential(y, deps.iter().copied())
                    .map_err(|e| ParseError::at(line, e.to_string()))?;
            }
        }
        Ok(())
    }

    fn clause_tokens(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        for token in tokens {
            let value: i64 = token
                .parse()
                .map_err(|_| ParseError::at(line, format!("expected a literal, found `{token}`")))?;
            if self.pending.is_empty() {
                self.pending_line = line;
            }
            if value == 0 {
                let lits = std::mem::take(&mut self.pending);
                self.clauses.push((self.pending_line, lits));
                continue;
            }
            let lit =
                Lit::from_dimacs(value).ok_or_else(|| ParseError::at(line, format!("literal {value} out of range")))?;
            self.check_range(line, lit.var())?;
            self.pending.push(lit);
        }
        Ok(())
    }

    fn finish(mut self, last_line: usize) -> Result<Parsed, ParseError> {
        let Some((_, declared_clauses)) = self.header else {
            return Err(ParseError::at(last_line.max(1), "missing `p cnf` header"));
        };
        if !self.pending.is_empty() {
            return Err(ParseError::at(last_line, "last clause is not terminated by 0"));
        }
        if self.clauses.len() != declared_clauses {
            self.warn(
                last_line,
                format!(
                    "header announces {declared_clauses} clauses, found {}",
                    self.clauses.len()
                ),
            );
        }

        let free: BTreeSet<(Var, usize)> = self
            .clauses
            .iter()
            .flat_map(|(line, lits)| lits.iter().map(move |l| (l.var(), *line)))
            .filter(|(v, _)| !self.prefix.contains(*v))
            .collect();
        let mut seen = BTreeSet::new();
        for (v, line) in free {
            if seen.insert(v) {
                self.prefix
                    .add_existential(v, [])
                    .expect("free variable is new to the prefix");
                self.warn(
                    line,
                    format!("free variable {v} treated as existential without dependencies"),
                );
            }
        }

        let mut formula = Dqbf::new(self.prefix.clone(), []).expect("empty matrix is compatible");
        let clauses = std::mem::take(&mut self.clauses);
        for (line, lits) in clauses {
            match Clause::normalize(lits) {
                Normalized::Clause(c) => {
                    formula.add_clause(c).expect("all clause variables are declared");
                }
                Normalized::Tautology => self.warn(line, "tautological clause dropped"),
            }
        }
        Ok(Parsed {
            formula,
            diagnostics: self.diagnostics,
        })
    }
}

/// Parses a DQDIMACS document. Tautologies are dropped and free variables
/// become existentials without dependencies; both produce warnings.
pub fn parse_dqdimacs(input: &str) -> Result<Parsed, ParseError> {
    let mut parser = Parser::default();
    let mut last = 0;
    for (i, line) in input.lines().enumerate() {
        last = i + 1;
        parser.line(last, line)?;
    }
    parser.finish(last.max(1))
}

pub fn parse_reader<R: BufRead>(reader: R) -> Result<Parsed, ParseError> {
    let mut parser = Parser::default();
    let mut last = 0;
    for (i, line) in reader.lines().enumerate() {
        last = i + 1;
        parser.line(last, &line?)?;
    }
    parser.finish(last.max(1))
}

/// Writes the formula canonically: header, one `a` line with the universals
/// ascending, one `d` line per existential ascending, then the clauses in
/// matrix order.
pub fn emit_dqdimacs(formula: &Dqbf) -> String {
    let prefix = formula.prefix();
    let maxvar = prefix
        .vars()
        .into_iter()
        .chain(formula.clauses().flat_map(|c| c.vars().collect::<Vec<_>>()))
        .map(Var::id)
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {maxvar} {}", formula.num_clauses());
    if !prefix.universals().is_empty() {
        out.push('a');
        for u in prefix.universals() {
            let _ = write!(out, " {u}");
        }
        out.push_str(" 0\n");
    }
    for (y, deps) in prefix.existentials() {
        let _ = write!(out, "d {y}");
        for d in deps {
            let _ = write!(out, " {d}");
        }
        out.push_str(" 0\n");
    }
    for clause in formula.clauses() {
        for l in clause {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}
