use thiserror::Error;

use crate::formula::{Lit, Var};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A variable that the prefix does not declare.
    #[error("variable {0} does not occur in the prefix")]
    Compatibility(Var),
    #[error("variable {0} is not in the prefix")]
    NotInPrefix(Var),
    #[error("variable {0} is already declared")]
    Redeclared(Var),
    #[error("dependency {dep} of existential {var} is not a universal variable")]
    NonUniversalDependency { var: Var, dep: Var },
    /// The kernel of a universal variable is an intersection over the
    /// existentials depending on it; with no such existential it is undefined.
    #[error("kernel of universal {0} is undefined: no existential depends on it")]
    KernelUndefined(Var),
    #[error("literal {0} is not part of the clause")]
    MissingLiteral(Lit),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error(transparent)]
    Budget(#[from] BudgetError),
}

/// The oracle refused to run because the instance is larger than its work
/// bound. This is never a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("oracle budget exceeded: {what} needs 2^{needed} work, limit is 2^{limit}")]
pub struct BudgetError {
    pub what: &'static str,
    pub needed: u32,
    pub limit: u32,
}
