//! Higher-order modal fixed point logic: syntax, variance-aware typing,
//! monotonization into negation normal form with sharing, and an
//! extensional model checker over finite transition systems.

pub mod corpus;
pub mod fuzz;
pub mod monotonize;
pub mod semantics;
pub mod share;
pub mod syntax;
pub mod typing;

pub use monotonize::{translate, Mode, MonotonizeError};
pub use semantics::{enumerate_ltss, equivalent_on, model_check, Evaluator, Lts, SemValue, SemanticsError};
pub use share::{nnf, nnf_unshared, share, unshare, PipelineError, ShareMode};
pub use syntax::{parse, Formula, HflType, Label, ParseError, SizeReport, VarName, Variance};
pub use typing::{measure, typecheck, typecheck_closed, TypeError, TypedFormula, TypingEnv};
