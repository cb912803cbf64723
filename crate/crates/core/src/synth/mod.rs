//! Network constructors for MAX_n and for signed max-affine decompositions.

mod basic;
mod cpwl;
mod m5;
mod realize;
mod terms;

pub use basic::{build_five_ary_max, build_max2, build_tree_max};
pub use cpwl::{compile_cpwl, CpwlDecomposition, CpwlTerm, Sign};
pub use m5::{build_max5, eval_m, m_term_combo, term_eval, TermId};
pub use realize::{
    build_max, build_ternary_max, build_ternary_max_with, ceil_log, expected_depth, inner_arity, realize_combo,
    realize_term, realize_term_with, ternary_depth, ternary_expansion, ternary_term_count, Method, SynthConfig,
    DEFAULT_TERM_LIMIT, TERM_LIMIT_ENV,
};
pub use terms::{expand_full, expand_step, expansion_size, t_value, Form, TabTerm, TermCombo};

use crate::ir::IrError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("the maximum of zero arguments is undefined")]
    EmptyMax,
    #[error("expected {expected} arguments, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("unknown term {0:?}")]
    UnknownTerm(String),
    #[error("unknown method {0:?} (expected tree, five or ternary)")]
    UnknownMethod(String),
    #[error("pre-map has {found} rows, shape needs {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("expansion needs at least four extra arguments, term has {extras}")]
    TooFewExtras { extras: usize },
    #[error("expansion of T(0,4) leaves nothing to play the fifth argument")]
    EmptyRemainder,
    #[error("term with {extras} extras cannot reach {target} in steps of three")]
    ModulusMismatch { extras: usize, target: usize },
    #[error("empty term combination")]
    EmptyCombo,
    #[error("MAX_{arity} needs {needed} hidden layers, budget is {budget}")]
    BudgetInsufficient { arity: usize, needed: usize, budget: usize },
    #[error(
        "ternary construction of MAX_{n} needs {} terms, above the term limit {limit} \
         (raise RELU_FORGE_TERM_LIMIT or use the five-ary fallback)",
        terms.map_or("too many".to_string(), |t| t.to_string())
    )]
    TermLimit { n: usize, terms: Option<u64>, limit: u64 },
    #[error("malformed decomposition: {0}")]
    Malformed(String),
    #[error(transparent)]
    Ir(#[from] IrError),
}
