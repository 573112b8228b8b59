//! Priority-based session types with bounded recursion: syntax, reduction,
//! type checking, a termination measure and progress verification.

pub mod syntax;
pub mod types;
pub mod semantics;
pub mod typecheck;
pub mod measure;
pub mod progress;
