//! Extensional semantics over finite labelled transition systems, used as
//! model checker and as equivalence oracle.

mod domain;
mod enumerate;
mod eval;
mod lts;

pub use domain::{complement, enumerate_domain, join, leq, meet, Domain, SemValue, DEFAULT_BUDGET};
pub use enumerate::{enumerate_ltss, MAX_ENUMERATION_BITS};
pub use eval::{eval, Evaluator, FixStats, Valuation};
pub use lts::{Lts, LtsError, MAX_STATES};

use crate::syntax::{Formula, HflType, VarName};
use crate::typing::{typecheck_closed, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("formula has type {0}, expected o")]
    NotGround(HflType),
    #[error("domain of type {ty} has at least {at_least} elements, above the budget of {budget}")]
    BudgetExceeded {
        ty: HflType,
        at_least: u128,
        budget: usize,
    },
    #[error("no value for variable {0}")]
    MissingVariable(VarName),
    #[error("semantic values of different shapes")]
    ShapeMismatch,
    #[error(transparent)]
    Lts(#[from] LtsError),
}

/// The set of states of `lts` satisfying the closed ground formula `φ`.
pub fn satisfying_states(evaluator: &Evaluator<'_>, phi: &Formula) -> Result<u64, SemanticsError> {
    let t = typecheck_closed(phi)?;
    if !t.ty.is_ground() {
        return Err(SemanticsError::NotGround(t.ty));
    }
    let v = evaluator.eval(&Valuation::new(), &t)?;
    Ok(v.as_set().expect("ground formulas denote state sets"))
}

/// `s ⊨ φ`.
pub fn model_check(lts: &Lts, state: usize, phi: &Formula) -> Result<bool, SemanticsError> {
    let set = satisfying_states(&Evaluator::new(lts), phi)?;
    Ok(set >> state & 1 == 1)
}

/// Whether `φ` and `ψ` hold at exactly the same states of `lts`.
pub fn equivalent_on(lts: &Lts, phi: &Formula, psi: &Formula) -> Result<bool, SemanticsError> {
    let ev = Evaluator::new(lts);
    Ok(satisfying_states(&ev, phi)? == satisfying_states(&ev, psi)?)
}

#[cfg(test)]
mod eval_tests;
