//! Printer producing text that parses back to the same tree.

use std::fmt::{self, Display, Write};

use super::ast::{Process, SessionType};

impl Display for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionType::End => f.write_str("end"),
            SessionType::Int => f.write_str("int"),
            SessionType::Var(t) => f.write_str(t),
            SessionType::Prefix {
                dir,
                obligation,
                capability,
                payload,
                cont,
            } => {
                write!(f, "{}[{obligation},{capability}] ", dir.symbol())?;
                if matches!(**payload, SessionType::Prefix { .. } | SessionType::Rec { .. }) {
                    write!(f, "({payload})")?;
                } else {
                    write!(f, "{payload}")?;
                }
                write!(f, ".{cont}")
            }
            SessionType::Rec { index, var, body } => write!(f, "rec[{index}] {var}.{body}"),
        }
    }
}

impl Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_process(self, true, &mut out)?;
        f.write_str(&out)
    }
}

// `top` is true where an unparenthesised parallel composition is allowed.
fn write_process(p: &Process, top: bool, out: &mut String) -> fmt::Result {
    match p {
        Process::Idle => out.write_str("0"),
        Process::Var(x) => out.write_str(x),
        Process::Input {
            subject,
            binder,
            body,
        } => {
            write!(out, "{subject}?({binder}).")?;
            write_process(body, false, out)
        }
        Process::Output {
            subject,
            payload,
            body,
        } => {
            write!(out, "{subject}!{payload}.")?;
            write_process(body, false, out)
        }
        Process::Par(l, r) => {
            if !top {
                out.write_char('(')?;
            }
            let left_needs_parens = matches!(**l, Process::Par(..));
            if left_needs_parens {
                out.write_char('(')?;
                write_process(l, true, out)?;
                out.write_char(')')?;
            } else {
                write_process(l, false, out)?;
            }
            out.write_str(" | ")?;
            write_process(r, true, out)?;
            if !top {
                out.write_char(')')?;
            }
            Ok(())
        }
        Process::New {
            channel,
            pos_type,
            neg_type,
            body,
        } => {
            write!(out, "new {channel}")?;
            match (pos_type, neg_type) {
                (Some(t), Some(s)) => write!(out, " : {t} ~ {s} . ")?,
                (Some(t), None) => write!(out, " : {t} . ")?,
                // A negative annotation alone has no surface form; print both.
                (None, Some(s)) => write!(out, " : end ~ {s} . ")?,
                (None, None) => out.write_char('.')?,
            }
            write_process(body, false, out)
        }
        Process::Rec { index, var, body } => {
            write!(out, "rec[{index}] {var}.")?;
            write_process(body, false, out)
        }
    }
}

/// Renders a process or a session type.
pub fn pretty<T: Display + ?Sized>(x: &T) -> String {
    x.to_string()
}
