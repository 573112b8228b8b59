//! Recursive-descent parser for the `.ssp` surface syntax.
//!
//! ```text
//! Proc ::= "0" | PV | Name "?" "(" id ")" "." Proc | Name "!" Val "." Proc
//!        | Proc "|" Proc | "new" id [":" Type ["~" Type]] "." Proc
//!        | "rec" "[" Idx "]" PV "." Proc | "(" Proc ")"
//! Val  ::= Name | integer          Name ::= id ("+" | "-") | id
//! Type ::= "end" | tv | "?" "[" Pri "," Pri "]" Type "." Type
//!        | "!" "[" Pri "," Pri "]" Type "." Type | "rec" "[" Idx "]" tv "." Type
//!        | "int" | "(" Type ")"
//! Pri  ::= natural | id            Idx  ::= natural | "inf"
//! ```
//!
//! `|` is right-associative and every prefix (including `new` and `rec`)
//! binds tighter than `|`. Process variables start with an uppercase letter;
//! channels and variables with a lowercase one. A program is a sequence of
//! `type NAME = Type` declarations followed by a process. `//` starts a line
//! comment.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::{Direction, Index, Name, Priority, Process, Program, SessionType, Value};
use super::subst::{subst_type_free, type_free_vars};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: expected {}, found {found}", expected.join(" or "))]
    Unexpected {
        line: usize,
        column: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{line}:{column}: {message}")]
    Lexical {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("type alias `{0}` is defined more than once")]
    DuplicateAlias(String),
    #[error("type alias `{0}` is cyclic")]
    CyclicAlias(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Sym(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Nat(n) => format!("`{n}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: &str = "?!|.()[],:=~+-";

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, column);
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits.parse::<u64>().map_err(|_| ParseError::Lexical {
                line: tline,
                column: tcol,
                message: format!("integer literal `{digits}` is too large"),
            })?;
            column += i - start;
            tokens.push(Token {
                tok: Tok::Nat(n),
                line: tline,
                column: tcol,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == '\'' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let ident: String = chars[start..i].iter().collect();
            if ident == "'" {
                return Err(ParseError::Lexical {
                    line: tline,
                    column: tcol,
                    message: "`'` must be followed by a type variable name".into(),
                });
            }
            column += i - start;
            tokens.push(Token {
                tok: Tok::Ident(ident),
                line: tline,
                column: tcol,
            });
            continue;
        }
        if SYMBOLS.contains(c) {
            i += 1;
            column += 1;
            tokens.push(Token {
                tok: Tok::Sym(c),
                line: tline,
                column: tcol,
            });
            continue;
        }
        return Err(ParseError::Lexical {
            line: tline,
            column: tcol,
            message: format!("unexpected character `{c}`"),
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(tokens)
}

const KEYWORDS: [&str; 6] = ["new", "rec", "inf", "end", "int", "type"];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn is_proc_var(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_uppercase())
}

fn is_lower_ident(s: &str) -> bool {
    !is_keyword(s) && s.chars().next().is_some_and(|c| c.is_lowercase() || c == '_')
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let t = &self.tokens[self.pos];
        Err(ParseError::Unexpected {
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        })
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            self.error(&[&format!("`{c}`")])
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&[&format!("`{kw}`")])
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(&["end of input", "`|`"])
        }
    }

    fn lower_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if is_lower_ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&[what]),
        }
    }

    fn proc_var(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if is_proc_var(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&["process variable"]),
        }
    }

    fn index(&mut self) -> Result<Index, ParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(Index::Fin(n))
            }
            Tok::Ident(s) if s == "inf" => {
                self.bump();
                Ok(Index::Inf)
            }
            _ => self.error(&["natural number", "`inf`"]),
        }
    }

    fn bracketed_index(&mut self) -> Result<Index, ParseError> {
        self.expect_sym('[')?;
        let idx = self.index()?;
        self.expect_sym(']')?;
        Ok(idx)
    }

    fn priority(&mut self) -> Result<Priority, ParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(Priority::Const(n))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Priority::Var(s))
            }
            _ => self.error(&["priority"]),
        }
    }

    // Proc ::= PrefixProc ("|" Proc)?
    fn process(&mut self) -> Result<Process, ParseError> {
        let left = self.prefix_process()?;
        if self.is_sym('|') {
            self.bump();
            let right = self.process()?;
            Ok(Process::par(left, right))
        } else {
            Ok(left)
        }
    }

    fn prefix_process(&mut self) -> Result<Process, ParseError> {
        match self.peek().clone() {
            Tok::Nat(0) => {
                self.bump();
                Ok(Process::Idle)
            }
            Tok::Sym('(') => {
                self.bump();
                let p = self.process()?;
                self.expect_sym(')')?;
                Ok(p)
            }
            Tok::Ident(s) if s == "new" => {
                self.bump();
                let channel = self.lower_ident("channel name")?;
                let (mut pos_type, mut neg_type) = (None, None);
                if self.is_sym(':') {
                    self.bump();
                    pos_type = Some(self.session_type()?);
                    if self.is_sym('~') {
                        self.bump();
                        neg_type = Some(self.session_type()?);
                    }
                }
                let body = self.continuation()?;
                Ok(Process::new_session(channel, pos_type, neg_type, body))
            }
            Tok::Ident(s) if s == "rec" => {
                self.bump();
                let index = self.bracketed_index()?;
                let var = self.proc_var()?;
                self.expect_sym('.')?;
                let body = self.prefix_process()?;
                Ok(Process::rec(index, var, body))
            }
            Tok::Ident(s) if is_proc_var(&s) => {
                self.bump();
                Ok(Process::Var(s))
            }
            Tok::Ident(s) if is_lower_ident(&s) => {
                let subject = self.name()?;
                match self.peek() {
                    Tok::Sym('?') => {
                        self.bump();
                        self.expect_sym('(')?;
                        let binder = self.lower_ident("variable")?;
                        self.expect_sym(')')?;
                        self.expect_sym('.')?;
                        let body = self.prefix_process()?;
                        Ok(Process::input(subject, binder, body))
                    }
                    Tok::Sym('!') => {
                        self.bump();
                        let payload = self.value()?;
                        self.expect_sym('.')?;
                        let body = self.prefix_process()?;
                        Ok(Process::output(subject, payload, body))
                    }
                    _ => self.error(&["`?`", "`!`"]),
                }
            }
            _ => self.error(&["`0`", "process variable", "name", "`new`", "`rec`", "`(`"]),
        }
    }

    // The body of a restriction: "." Proc, or a parenthesised process.
    fn continuation(&mut self) -> Result<Process, ParseError> {
        if self.is_sym('.') {
            self.bump();
            self.prefix_process()
        } else if self.is_sym('(') {
            self.prefix_process()
        } else {
            self.error(&["`.`", "`(`"])
        }
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        let id = self.lower_ident("name")?;
        match self.peek() {
            Tok::Sym('+') => {
                self.bump();
                Ok(Name::plus(id))
            }
            Tok::Sym('-') => {
                self.bump();
                Ok(Name::minus(id))
            }
            _ => Ok(Name::Var(id)),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                let k = i64::try_from(n).map_err(|_| {
                    let t = &self.tokens[self.pos.saturating_sub(1)];
                    ParseError::Lexical {
                        line: t.line,
                        column: t.column,
                        message: format!("integer literal `{n}` is too large"),
                    }
                })?;
                Ok(Value::Int(k))
            }
            Tok::Ident(s) if is_lower_ident(&s) => Ok(Value::Name(self.name()?)),
            _ => self.error(&["name", "integer"]),
        }
    }

    fn session_type(&mut self) -> Result<SessionType, ParseError> {
        match self.peek().clone() {
            Tok::Sym('(') => {
                self.bump();
                let t = self.session_type()?;
                self.expect_sym(')')?;
                Ok(t)
            }
            Tok::Sym(c @ ('?' | '!')) => {
                self.bump();
                let dir = if c == '?' { Direction::In } else { Direction::Out };
                self.expect_sym('[')?;
                let obligation = self.priority()?;
                self.expect_sym(',')?;
                let capability = self.priority()?;
                self.expect_sym(']')?;
                let payload = self.session_type()?;
                self.expect_sym('.')?;
                let cont = self.session_type()?;
                Ok(SessionType::prefix(dir, obligation, capability, payload, cont))
            }
            Tok::Ident(s) if s == "end" => {
                self.bump();
                Ok(SessionType::End)
            }
            Tok::Ident(s) if s == "int" => {
                self.bump();
                Ok(SessionType::Int)
            }
            Tok::Ident(s) if s == "rec" => {
                self.bump();
                let index = self.bracketed_index()?;
                let var = self.type_var()?;
                self.expect_sym('.')?;
                let body = self.session_type()?;
                Ok(SessionType::rec(index, var, body))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(SessionType::Var(s))
            }
            _ => self.error(&["`end`", "`int`", "`?`", "`!`", "`rec`", "type variable", "`(`"]),
        }
    }

    fn type_var(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&["type variable"]),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut raw = Vec::new();
        while self.is_kw("type") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.expect_kw("type")?;
            let name = self.type_var()?;
            self.expect_sym('=')?;
            let body = self.session_type()?;
            raw.push((name, body));
        }
        let process = self.process()?;
        self.expect_eof()?;
        let aliases = resolve_aliases(raw)?;
        let process = expand_in_process(&process, &aliases);
        Ok(Program { process, aliases })
    }
}

fn resolve_aliases(
    raw: Vec<(String, SessionType)>,
) -> Result<BTreeMap<String, SessionType>, ParseError> {
    let mut defs = BTreeMap::new();
    for (name, body) in raw {
        if defs.insert(name.clone(), body).is_some() {
            return Err(ParseError::DuplicateAlias(name));
        }
    }
    let mut resolved: BTreeMap<String, SessionType> = BTreeMap::new();
    let names: Vec<String> = defs.keys().cloned().collect();
    for name in names {
        let mut visiting = BTreeSet::new();
        resolve_one(&name, &defs, &mut resolved, &mut visiting)?;
    }
    Ok(resolved)
}

fn resolve_one(
    name: &str,
    defs: &BTreeMap<String, SessionType>,
    resolved: &mut BTreeMap<String, SessionType>,
    visiting: &mut BTreeSet<String>,
) -> Result<SessionType, ParseError> {
    if let Some(t) = resolved.get(name) {
        return Ok(t.clone());
    }
    if !visiting.insert(name.to_string()) {
        return Err(ParseError::CyclicAlias(name.to_string()));
    }
    let mut body = defs[name].clone();
    for free in type_free_vars(&body) {
        if defs.contains_key(&free) {
            let replacement = resolve_one(&free, defs, resolved, visiting)?;
            body = subst_type_free(&body, &free, &replacement);
        }
    }
    visiting.remove(name);
    resolved.insert(name.to_string(), body.clone());
    Ok(body)
}

fn expand_alias_refs(t: &SessionType, aliases: &BTreeMap<String, SessionType>) -> SessionType {
    let mut t = t.clone();
    for free in type_free_vars(&t) {
        if let Some(def) = aliases.get(&free) {
            t = subst_type_free(&t, &free, def);
        }
    }
    t
}

fn expand_in_process(p: &Process, aliases: &BTreeMap<String, SessionType>) -> Process {
    if aliases.is_empty() {
        return p.clone();
    }
    match p {
        Process::Idle | Process::Var(_) => p.clone(),
        Process::Input {
            subject,
            binder,
            body,
        } => Process::input(subject.clone(), binder.clone(), expand_in_process(body, aliases)),
        Process::Output {
            subject,
            payload,
            body,
        } => Process::output(subject.clone(), payload.clone(), expand_in_process(body, aliases)),
        Process::Par(l, r) => {
            Process::par(expand_in_process(l, aliases), expand_in_process(r, aliases))
        }
        Process::New {
            channel,
            pos_type,
            neg_type,
            body,
        } => Process::new_session(
            channel.clone(),
            pos_type.as_ref().map(|t| expand_alias_refs(t, aliases)),
            neg_type.as_ref().map(|t| expand_alias_refs(t, aliases)),
            expand_in_process(body, aliases),
        ),
        Process::Rec { index, var, body } => {
            Process::rec(*index, var.clone(), expand_in_process(body, aliases))
        }
    }
}

/// Parses a program: type alias declarations followed by a process.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    Parser::new(text)?.program()
}

/// Parses a single process (no alias declarations).
pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    let mut parser = Parser::new(text)?;
    let p = parser.process()?;
    parser.expect_eof()?;
    Ok(p)
}

/// Parses a session type.
pub fn parse_type(text: &str) -> Result<SessionType, ParseError> {
    let mut parser = Parser::new(text)?;
    let t = parser.session_type()?;
    parser.expect_eof()?;
    Ok(t)
}
