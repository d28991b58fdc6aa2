//! Preprocessing for dependency quantified Boolean formulas (DQBF).
//!
//! The techniques here (vivification, unit-propagation lookahead and DQRAT+
//! clause elimination) all run unit propagation with universal reduction on
//! an *abstraction* of the formula, where the universals the probed clause
//! depends on are turned into existentials without dependencies. The
//! [`oracle`] module decides small instances by brute force and is used to
//! check every transformation.

pub mod dqdimacs;
pub mod error;
pub mod formula;
pub mod fuzz;
pub mod oracle;
pub mod pipeline;
pub mod propagation;
pub mod report;
pub mod techniques;

pub use dqdimacs::{emit_dqdimacs, parse_dqdimacs, parse_reader, ParseDiagnostic, ParseError, Parsed, Severity};
pub use error::{BudgetError, Error, Result};
pub use formula::{Clause, Dqbf, Lit, Normalized, Prefix, Var};
pub use oracle::{BruteVerdict, OracleBudget, SkolemFunction, SkolemTuple, VariableAssignment};
pub use pipeline::{run_pipeline, PassKind, PipelineConfig, PipelineOutcome, Verdict, VerificationFailure};
pub use propagation::{
    abstraction, dqat_check, unit_propagate, unit_propagate_with, universal_reduce, universal_reduce_clause,
    PropagationOutcome,
};
pub use report::PassReport;
pub use techniques::{
    dqrat_eliminate_pass, dqrat_plus_check, outer_resolvent, outer_resolvents, outer_variables, upla_apply, upla_pass,
    upla_probe, vivify_clause, vivify_pass, OuterSets, UplaCandidates, UplaFindings, VivifyResult,
};
