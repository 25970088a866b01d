//! Concrete syntax for formulas and automata, and the checking pipeline
//! behind the command-line interface.
//!
//! Formula grammar (whitespace-insensitive, `!` binds tighter than `&`
//! which binds tighter than `|`; binders extend maximally to the right):
//!
//! ```text
//! phi := u '=' u | u '!=' u | phi '|' phi | phi '&' phi | '!' phi
//!      | 'some' x '.' phi | 'all' x '.' phi | 'fresh' x '.' phi
//!      | '<' tag (':' u (',' u)*)? '>' phi
//!      | '[' tag (':' u (',' u)*)? ']' phi
//!      | ('mu'|'nu') X ('(' x,… ')')? '.' phi ('(' u,… ')')?
//!      | X ('(' u,… ')')? | '(' phi ')'
//! ```
//!
//! Names are written `#n`; value variables are lowercase identifiers,
//! recursion variables start with an uppercase letter. Zero-arity
//! fixpoints may omit both parameter and argument lists.
//!
//! Model format, line oriented, `#` starts a comment:
//!
//! ```text
//! registers R
//! tags t:1 u:1
//! state q0 avail {}
//! state q1 avail {1}
//! trans q0 t gfresh(1) q1
//! trans q1 u read(1) q1
//! ```

use crate::fra::{Config, Fra, RegisterAssignment, StateId, TransKind, Transition};
use crate::game::{self, BuildOptions, Owner};
use crate::logic::{self, Formula, Label, Sigma, Value};
use crate::nominal::Name;
use crate::oracle;
use crate::solver;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(u32),
    LIdent(String),
    UIdent(String),
    Eq,
    Neq,
    Or,
    And,
    Not,
    Dot,
    Comma,
    LParen,
    RParen,
    Lt,
    Gt,
    LBracket,
    RBracket,
    Colon,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(n) => write!(f, "#{n}"),
            Tok::LIdent(s) | Tok::UIdent(s) => write!(f, "{s}"),
            Tok::Eq => write!(f, "="),
            Tok::Neq => write!(f, "!="),
            Tok::Or => write!(f, "|"),
            Tok::And => write!(f, "&"),
            Tok::Not => write!(f, "!"),
            Tok::Dot => write!(f, "."),
            Tok::Comma => write!(f, ","),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::Lt => write!(f, "<"),
            Tok::Gt => write!(f, ">"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::Colon => write!(f, ":"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

fn err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        msg: msg.into(),
    })
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        match c {
            '#' => {
                bump(&mut chars);
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                if digits.is_empty() {
                    return err(pos, "expected digits after '#'");
                }
                let n: u32 = digits.parse().map_err(|_| ParseError {
                    pos,
                    msg: format!("name #{digits} out of range"),
                })?;
                out.push((Tok::Name(n), pos));
            }
            '=' => {
                bump(&mut chars);
                out.push((Tok::Eq, pos));
            }
            '!' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    out.push((Tok::Neq, pos));
                } else {
                    out.push((Tok::Not, pos));
                }
            }
            '|' => {
                bump(&mut chars);
                out.push((Tok::Or, pos));
            }
            '&' => {
                bump(&mut chars);
                out.push((Tok::And, pos));
            }
            '.' => {
                bump(&mut chars);
                out.push((Tok::Dot, pos));
            }
            ',' => {
                bump(&mut chars);
                out.push((Tok::Comma, pos));
            }
            '(' => {
                bump(&mut chars);
                out.push((Tok::LParen, pos));
            }
            ')' => {
                bump(&mut chars);
                out.push((Tok::RParen, pos));
            }
            '<' => {
                bump(&mut chars);
                out.push((Tok::Lt, pos));
            }
            '>' => {
                bump(&mut chars);
                out.push((Tok::Gt, pos));
            }
            '[' => {
                bump(&mut chars);
                out.push((Tok::LBracket, pos));
            }
            ']' => {
                bump(&mut chars);
                out.push((Tok::RBracket, pos));
            }
            ':' => {
                bump(&mut chars);
                out.push((Tok::Colon, pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        ident.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                if ident.chars().next().unwrap().is_ascii_uppercase() {
                    out.push((Tok::UIdent(ident), pos));
                } else {
                    out.push((Tok::LIdent(ident), pos));
                }
            }
            other => return err(pos, format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Formula parser

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    /// Declared tag arities, or inferred from use when none are given.
    sig: Option<&'a BTreeMap<String, usize>>,
    inferred: BTreeMap<String, usize>,
    /// In-scope value variables.
    scope: Vec<String>,
    /// In-scope recursion variables with their arities.
    rec_scope: Vec<(String, usize)>,
    /// Arities of free recursion variables, fixed by first use.
    free_rec: BTreeMap<String, usize>,
}

impl<'a> Parser<'a> {
    fn pos(&self) -> Pos {
        self.toks
            .get(self.at)
            .map(|(_, p)| *p)
            .unwrap_or(Pos { line: 0, col: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            Some(t) => err(pos, format!("expected '{tok}', found '{t}'")),
            None => err(pos, format!("expected '{tok}', found end of input")),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Name(n)) => Ok(Value::Name(Name(n))),
            Some(Tok::LIdent(x)) => {
                if is_keyword(&x) {
                    return err(pos, format!("'{x}' is a keyword"));
                }
                if !self.scope.contains(&x) {
                    return err(pos, format!("unbound value variable '{x}'"));
                }
                Ok(Value::Var(x))
            }
            Some(t) => err(pos, format!("expected a value, found '{t}'")),
            None => err(pos, "expected a value, found end of input"),
        }
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        let pos = self.pos();
        let tag = match self.next() {
            Some(Tok::LIdent(s)) | Some(Tok::UIdent(s)) => {
                if is_keyword(&s) {
                    return err(pos, format!("'{s}' is a keyword"));
                }
                s
            }
            Some(t) => return err(pos, format!("expected a tag, found '{t}'")),
            None => return err(pos, "expected a tag, found end of input"),
        };
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::Colon) {
            self.next();
            args.push(self.value()?);
            while self.peek() == Some(&Tok::Comma) {
                self.next();
                args.push(self.value()?);
            }
        }
        match self.sig {
            Some(sig) => match sig.get(&tag) {
                None => return err(pos, format!("unknown tag '{tag}'")),
                Some(&ar) if ar != args.len() => {
                    return err(
                        pos,
                        format!("tag '{tag}' has arity {ar}, found {} arguments", args.len()),
                    )
                }
                _ => {}
            },
            None => {
                let ar = *self.inferred.entry(tag.clone()).or_insert(args.len());
                if ar != args.len() {
                    return err(
                        pos,
                        format!(
                            "tag '{tag}' used with arity {} after arity {ar}",
                            args.len()
                        ),
                    );
                }
            }
        }
        Ok(Label { tag, args })
    }

    /// Lowest precedence: `|`, left associative.
    fn or_expr(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and_expr()?;
        while self.peek() == Some(&Tok::Or) {
            self.next();
            let rhs = self.and_expr()?;
            acc = Formula::Or(acc.boxed(), rhs.boxed());
        }
        Ok(acc)
    }

    fn and_expr(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.next();
            let rhs = self.unary()?;
            acc = Formula::And(acc.boxed(), rhs.boxed());
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.next();
                Ok(Formula::Not(self.unary()?.boxed()))
            }
            Some(Tok::Lt) => {
                self.next();
                let label = self.label()?;
                self.expect(Tok::Gt)?;
                Ok(Formula::Diamond(label, self.unary()?.boxed()))
            }
            Some(Tok::LBracket) => {
                self.next();
                let label = self.label()?;
                self.expect(Tok::RBracket)?;
                Ok(Formula::Box(label, self.unary()?.boxed()))
            }
            Some(Tok::LIdent(kw)) if matches!(kw.as_str(), "some" | "all" | "fresh") => {
                let kw = kw.clone();
                self.next();
                let pos = self.pos();
                let x = match self.next() {
                    Some(Tok::LIdent(x)) if !is_keyword(&x) => x,
                    Some(t) => return err(pos, format!("expected a value variable, found '{t}'")),
                    None => return err(pos, "expected a value variable"),
                };
                self.expect(Tok::Dot)?;
                self.scope.push(x.clone());
                let body = self.or_expr()?;
                self.scope.pop();
                Ok(match kw.as_str() {
                    "some" => Formula::SomeName(x, body.boxed()),
                    "all" => Formula::AllName(x, body.boxed()),
                    _ => Formula::Fresh(x, body.boxed()),
                })
            }
            Some(Tok::LIdent(kw)) if matches!(kw.as_str(), "mu" | "nu") => {
                let sigma = if kw == "mu" { Sigma::Mu } else { Sigma::Nu };
                self.next();
                let pos = self.pos();
                let var = match self.next() {
                    Some(Tok::UIdent(v)) => v,
                    Some(t) => {
                        return err(pos, format!("expected a recursion variable, found '{t}'"))
                    }
                    None => return err(pos, "expected a recursion variable"),
                };
                let mut params = Vec::new();
                if self.peek() == Some(&Tok::LParen) {
                    self.next();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            let ppos = self.pos();
                            match self.next() {
                                Some(Tok::LIdent(x)) if !is_keyword(&x) => {
                                    if params.contains(&x) {
                                        return err(ppos, format!("duplicate parameter '{x}'"));
                                    }
                                    params.push(x);
                                }
                                Some(t) => {
                                    return err(ppos, format!("expected a parameter, found '{t}'"))
                                }
                                None => return err(ppos, "expected a parameter"),
                            }
                            if self.peek() == Some(&Tok::Comma) {
                                self.next();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                }
                self.expect(Tok::Dot)?;
                self.rec_scope.push((var.clone(), params.len()));
                let depth = self.scope.len();
                self.scope.extend(params.iter().cloned());
                let body = self.or_expr()?;
                self.scope.truncate(depth);
                self.rec_scope.pop();
                let args = if params.is_empty() {
                    // zero-arity: accept an explicit empty argument list
                    if self.peek() == Some(&Tok::LParen)
                        && self.toks.get(self.at + 1).map(|(t, _)| t) == Some(&Tok::RParen)
                    {
                        self.next();
                        self.next();
                    }
                    Vec::new()
                } else {
                    let pos = self.pos();
                    if self.peek() != Some(&Tok::LParen) {
                        return err(
                            pos,
                            format!(
                                "fixpoint {var} with {} parameters must be applied to arguments",
                                params.len()
                            ),
                        );
                    }
                    let args = self.arg_list()?;
                    if args.len() != params.len() {
                        return err(
                            pos,
                            format!(
                                "fixpoint {var} expects {} arguments, found {}",
                                params.len(),
                                args.len()
                            ),
                        );
                    }
                    args
                };
                Ok(Formula::Fix(
                    sigma,
                    logic::Fix {
                        var,
                        params,
                        body: body.boxed(),
                        args,
                    },
                ))
            }
            _ => self.primary(),
        }
    }

    fn arg_list(&mut self) -> Result<Vec<Value>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            args.push(self.value()?);
            while self.peek() == Some(&Tok::Comma) {
                self.next();
                args.push(self.value()?);
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.next();
                let inner = self.or_expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(Tok::UIdent(var)) => {
                self.next();
                let arity = self
                    .rec_scope
                    .iter()
                    .rev()
                    .find(|(v, _)| v == &var)
                    .map(|(_, a)| *a);
                let args = match arity {
                    Some(0) => {
                        // a zero-arity call never consumes parentheses,
                        // except an immediate explicit `()`
                        if self.peek() == Some(&Tok::LParen)
                            && self.toks.get(self.at + 1).map(|(t, _)| t) == Some(&Tok::RParen)
                        {
                            self.next();
                            self.next();
                        }
                        Vec::new()
                    }
                    Some(n) => {
                        let args = self.arg_list()?;
                        if args.len() != n {
                            return err(
                                pos,
                                format!("{var} expects {n} arguments, found {}", args.len()),
                            );
                        }
                        args
                    }
                    None => {
                        // free recursion variable: arity fixed by first use
                        let args = if self.peek() == Some(&Tok::LParen) {
                            self.arg_list()?
                        } else {
                            Vec::new()
                        };
                        let ar = *self.free_rec.entry(var.clone()).or_insert(args.len());
                        if ar != args.len() {
                            return err(
                                pos,
                                format!("{var} used with arity {} after arity {ar}", args.len()),
                            );
                        }
                        args
                    }
                };
                Ok(Formula::Call(var, args))
            }
            Some(Tok::Name(_)) | Some(Tok::LIdent(_)) => {
                let lhs = self.value()?;
                let cmp = self.next();
                let rhs = self.value()?;
                match cmp {
                    Some(Tok::Eq) => Ok(Formula::Eq(lhs, rhs)),
                    Some(Tok::Neq) => Ok(Formula::Neq(lhs, rhs)),
                    Some(t) => err(pos, format!("expected '=' or '!=', found '{t}'")),
                    None => err(pos, "expected '=' or '!='"),
                }
            }
            Some(t) => err(pos, format!("expected a formula, found '{t}'")),
            None => err(pos, "expected a formula, found end of input"),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "some" | "all" | "fresh" | "mu" | "nu")
}

/// Parses a formula against a declared tag signature. With `None` the
/// signature is inferred from use (arities still checked for
/// consistency).
pub fn parse_formula(
    text: &str,
    signature: Option<&BTreeMap<String, usize>>,
) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        sig: signature,
        inferred: BTreeMap::new(),
        scope: Vec::new(),
        rec_scope: Vec::new(),
        free_rec: BTreeMap::new(),
    };
    let phi = p.or_expr()?;
    if p.at != p.toks.len() {
        return err(p.pos(), format!("unexpected '{}'", p.peek().unwrap()));
    }
    logic::validate(&phi).map_err(|e| ParseError {
        pos: Pos { line: 0, col: 0 },
        msg: e.to_string(),
    })?;
    Ok(phi)
}

// ---------------------------------------------------------------------------
// Model parser

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("model is not well formed:\n{0}")]
    Invalid(String),
}

fn model_err<T>(line: usize, msg: impl Into<String>) -> Result<T, ModelError> {
    Err(ModelError::Parse {
        line,
        msg: msg.into(),
    })
}

/// Parses the line-oriented model format and validates the result.
pub fn parse_fra(text: &str) -> Result<Fra, ModelError> {
    let mut registers: Option<usize> = None;
    let mut tags: BTreeMap<String, usize> = BTreeMap::new();
    let mut states: Vec<(String, BTreeSet<usize>)> = Vec::new();
    let mut raw_transitions: Vec<(usize, String, String, String, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        match words[0] {
            "registers" => {
                if words.len() != 2 {
                    return model_err(lineno, "expected: registers N");
                }
                if registers.is_some() {
                    return model_err(lineno, "duplicate registers declaration");
                }
                registers = Some(words[1].parse().map_err(|_| ModelError::Parse {
                    line: lineno,
                    msg: format!("invalid register count '{}'", words[1]),
                })?);
            }
            "tags" => {
                for w in &words[1..] {
                    let (name, ar) = w.split_once(':').ok_or_else(|| ModelError::Parse {
                        line: lineno,
                        msg: format!("expected tag:arity, found '{w}'"),
                    })?;
                    let ar: usize = ar.parse().map_err(|_| ModelError::Parse {
                        line: lineno,
                        msg: format!("invalid arity in '{w}'"),
                    })?;
                    if tags.insert(name.to_string(), ar).is_some() {
                        return model_err(lineno, format!("duplicate tag '{name}'"));
                    }
                }
            }
            "state" => {
                if words.len() != 4 || words[2] != "avail" {
                    return model_err(lineno, "expected: state NAME avail {i,...}");
                }
                let name = words[1].to_string();
                if states.iter().any(|(s, _)| s == &name) {
                    return model_err(lineno, format!("duplicate state '{name}'"));
                }
                let set = words[3];
                if !set.starts_with('{') || !set.ends_with('}') {
                    return model_err(lineno, "availability must be written {i,...} or {}");
                }
                let inner = &set[1..set.len() - 1];
                let mut avail = BTreeSet::new();
                if !inner.is_empty() {
                    for part in inner.split(',') {
                        let i: usize = part.trim().parse().map_err(|_| ModelError::Parse {
                            line: lineno,
                            msg: format!("invalid register index '{part}'"),
                        })?;
                        avail.insert(i);
                    }
                }
                states.push((name, avail));
            }
            "trans" => {
                if words.len() != 5 {
                    return model_err(lineno, "expected: trans FROM TAG KIND TO");
                }
                raw_transitions.push((
                    lineno,
                    words[1].to_string(),
                    words[2].to_string(),
                    words[3].to_string(),
                    words[4].to_string(),
                ));
            }
            other => return model_err(lineno, format!("unknown directive '{other}'")),
        }
    }

    let registers = registers.unwrap_or(0);
    let state_id = |name: &str, line: usize| -> Result<StateId, ModelError> {
        states
            .iter()
            .position(|(s, _)| s == name)
            .map(StateId)
            .ok_or_else(|| ModelError::Parse {
                line,
                msg: format!("unknown state '{name}'"),
            })
    };

    let mut transitions = Vec::new();
    for (line, from, tag, kind, to) in raw_transitions {
        let parse_kind = |s: &str| -> Result<TransKind, ModelError> {
            let (head, rest) = match s.split_once('(') {
                Some(x) => x,
                None => return model_err(line, format!("expected KIND(i), found '{s}'")),
            };
            let idx = rest.strip_suffix(')').ok_or_else(|| ModelError::Parse {
                line,
                msg: format!("missing ')' in '{s}'"),
            })?;
            let i: usize = idx.parse().map_err(|_| ModelError::Parse {
                line,
                msg: format!("invalid register index '{idx}'"),
            })?;
            match head {
                "read" => Ok(TransKind::Read(i)),
                "lfresh" => Ok(TransKind::LocalFresh(i)),
                "gfresh" => Ok(TransKind::GlobalFresh(i)),
                other => model_err(line, format!("unknown transition kind '{other}'")),
            }
        };
        transitions.push(Transition {
            from: state_id(&from, line)?,
            tag,
            kind: parse_kind(&kind)?,
            to: state_id(&to, line)?,
        });
    }

    let fra = Fra::new(registers, states, tags, transitions);
    fra.validate().map_err(|errs| {
        ModelError::Invalid(
            errs.iter()
                .map(|e| format!("  - {e}"))
                .collect::<Vec<_>>()
                .join("\n"),
        )
    })?;
    Ok(fra)
}

// ---------------------------------------------------------------------------
// Start configurations

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Formula(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Logic(#[from] logic::LogicError),
    #[error(transparent)]
    Game(#[from] game::GameError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error("{0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses `--regs "1=#0,2=#1"`.
pub fn parse_registers(text: &str) -> Result<RegisterAssignment, CliError> {
    let mut map = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (idx, name) = part
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected i=#n, found '{part}'")))?;
        let i: usize = idx
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("invalid register index '{idx}'")))?;
        let name = name.trim();
        let n = name
            .strip_prefix('#')
            .and_then(|d| d.parse::<u32>().ok())
            .ok_or_else(|| CliError::Config(format!("invalid name '{name}'")))?;
        if map.insert(i, Name(n)).is_some() {
            return Err(CliError::Config(format!("register {i} assigned twice")));
        }
    }
    Ok(RegisterAssignment(map))
}

/// Parses `--history "#0,#1"`.
pub fn parse_history(text: &str) -> Result<BTreeSet<Name>, CliError> {
    let mut out = BTreeSet::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let n = part
            .strip_prefix('#')
            .and_then(|d| d.parse::<u32>().ok())
            .ok_or_else(|| CliError::Config(format!("invalid name '{part}'")))?;
        out.insert(Name(n));
    }
    Ok(out)
}

/// Builds and validates the start configuration. The history defaults to
/// the register contents, the minimal valid choice.
pub fn start_config(
    fra: &Fra,
    state: &str,
    regs: Option<&str>,
    history: Option<&str>,
) -> Result<Config, CliError> {
    let state = fra
        .state_by_name(state)
        .ok_or_else(|| CliError::Config(format!("unknown state '{state}'")))?;
    let regs = match regs {
        Some(text) => parse_registers(text)?,
        None => RegisterAssignment::empty(),
    };
    let mut history = match history {
        Some(text) => parse_history(text)?,
        None => BTreeSet::new(),
    };
    history.extend(regs.range());
    let cfg = Config::new(state, regs, history);
    cfg.validate(fra).map_err(CliError::Config)?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// The checking pipeline

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNSAT")]
    Unsat,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Sat => write!(f, "SAT"),
            Verdict::Unsat => write!(f, "UNSAT"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub positions: usize,
    pub edges: usize,
    pub max_rank: u32,
    pub grade: u32,
    pub bound: u64,
    pub millis: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_agrees: Option<bool>,
}

pub struct CheckOutcome {
    pub report: CheckReport,
    pub game: game::OrbitGame,
    pub alternation_depth: u32,
}

/// The full pipeline: validate, normalize binders, eliminate negation,
/// build the orbit game, solve it.
pub fn run_check(
    fra: &Fra,
    phi_text: &str,
    start: &Config,
    opts: &BuildOptions,
    with_oracle: bool,
) -> Result<CheckOutcome, CliError> {
    let t0 = std::time::Instant::now();
    let parsed = parse_formula(phi_text, Some(&fra.tags))?;
    logic::require_firm(&parsed)?;
    let normalized = logic::normalize_binders(&parsed);
    logic::require_closed(&normalized)?;
    let negfree = logic::negation_free(&normalized)?;
    let table = logic::RankTable::new(&negfree)?;
    let og = game::build_orbit_game(fra, &negfree, start, opts)?;
    let verdict = if solver::winner(&og.game) == Owner::Defender {
        Verdict::Sat
    } else {
        Verdict::Unsat
    };
    let oracle_agrees = if with_oracle {
        let by_oracle = oracle::check_membership(fra, &parsed, start)?;
        Some(by_oracle == (verdict == Verdict::Sat))
    } else {
        None
    };
    let report = CheckReport {
        verdict,
        positions: og.game.len(),
        edges: og.game.edge_count(),
        max_rank: og.game.max_rank,
        grade: og.grade.n,
        bound: og.bound.min(u64::MAX as u128) as u64,
        millis: t0.elapsed().as_millis() as u64,
        oracle_agrees,
    };
    Ok(CheckOutcome {
        report,
        game: og,
        alternation_depth: table.alternation_depth(),
    })
}
