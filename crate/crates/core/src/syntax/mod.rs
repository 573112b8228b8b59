//! Surface syntax: abstract syntax, parser, printer and substitutions.

pub mod ast;
pub mod parser;
pub mod pretty;
pub mod subst;

pub use ast::{
    Direction, Endpoint, Index, Name, Polarity, Priority, Process, Program, SessionType, Value,
};
pub use parser::{parse_process, parse_program, parse_type, ParseError};
pub use pretty::pretty;
pub use subst::{
    free_channels, free_names, free_proc_vars, fresh_ident, freshen, freshen_avoiding,
    rename_channel, subst_name, subst_proc, subst_type_free, subst_value, type_free_vars,
    NameSets,
};
