//! Reduction semantics over canonical states, state-space exploration and
//! finite approximants.

mod approx;
mod canon;
mod explore;
mod reduce;

pub use approx::{
    approx_leq, approx_leq_state, approx_leq_type, approximant, approximant_type, cap_indices,
    ApproxError,
};
pub use canon::{canonicalize, CanonState, Channel};
pub use explore::{reachable, trace_line, Edge, StateSpace};
pub use reduce::{
    is_normal_form, step, subst_proc_renaming, subst_value_renaming, unfold_thread, RedexKind,
    RedexLabel,
};
