//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := "true" | "false" | ident | "~" formula | formula "\/" formula
//!          | formula "/\" formula | "<" label ">" formula | "[" label "]" formula
//!          | "\" ident ":" type "^" variance "." formula
//!          | ("mu" | "nu") ident ":" type "." formula
//!          | formula formula | "(" formula ")"
//! type    := "o" | "(" type "^" variance "->" type ")"
//! ```
//!
//! Precedence from tightest: `~` and modalities, application, `/\`, `\/`,
//! binders (whose body extends as far right as possible). Arrow types may
//! also be written without the outer parentheses, associating to the right.

use std::collections::BTreeSet;
use std::fmt;

use super::{Formula, HflType, Label, VarName, Variance, BAR_SUFFIX, RESERVED_PREFIX};

#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    /// When set, labels outside this alphabet are rejected.
    pub alphabet: Option<BTreeSet<Label>>,
    /// Accept barred names and `_`-prefixed names. Needed to read back
    /// formulas produced by the negation elimination pipeline.
    pub allow_reserved: bool,
}

impl ParseOptions {
    pub fn internal() -> ParseOptions {
        ParseOptions {
            alphabet: None,
            allow_reserved: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownLabel(String),
    MalformedType(String),
    ReservedName(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UnknownLabel(l) => write!(f, "unknown label `{l}`"),
            ParseErrorKind::MalformedType(m) => write!(f, "malformed type annotation: {m}"),
            ParseErrorKind::ReservedName(n) => write!(f, "reserved name `{n}`"),
        }
    }
}

/// Parses user input: reserved names are rejected, labels are unrestricted.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_with(text, &ParseOptions::default())
}

pub fn parse_with(text: &str, opts: &ParseOptions) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        opts,
    };
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

pub fn parse_type(text: &str) -> Result<HflType, ParseError> {
    let tokens = lex(text)?;
    let opts = ParseOptions::default();
    let mut p = Parser {
        tokens,
        pos: 0,
        opts: &opts,
    };
    let ty = p.ty()?;
    p.expect_eof()?;
    Ok(ty)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String, bool),
    True,
    False,
    Mu,
    Nu,
    Tilde,
    Or,
    And,
    Lt,
    Gt,
    LBrack,
    RBrack,
    Backslash,
    Colon,
    Caret,
    Dot,
    LParen,
    RParen,
    Arrow,
    Plus,
    Minus,
    Zero,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s, false) => return write!(f, "`{s}`"),
            Tok::Ident(s, true) => return write!(f, "`{s}{BAR_SUFFIX}`"),
            Tok::True => "true",
            Tok::False => "false",
            Tok::Mu => "mu",
            Tok::Nu => "nu",
            Tok::Tilde => "~",
            Tok::Or => "\\/",
            Tok::And => "/\\",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Backslash => "\\",
            Tok::Colon => ":",
            Tok::Caret => "^",
            Tok::Dot => ".",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Arrow => "->",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Zero => "0",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, m: String| ParseError {
        line,
        column,
        kind: ParseErrorKind::Syntax(m),
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '\\' if next == Some('/') => (Tok::Or, 2),
            '/' if next == Some('\\') => (Tok::And, 2),
            '-' if next == Some('>') => (Tok::Arrow, 2),
            '\\' => (Tok::Backslash, 1),
            '~' => (Tok::Tilde, 1),
            '<' => (Tok::Lt, 1),
            '>' => (Tok::Gt, 1),
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            ':' => (Tok::Colon, 1),
            '^' => (Tok::Caret, 1),
            '.' => (Tok::Dot, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '+' => (Tok::Plus, 1),
            '-' => (Tok::Minus, 1),
            '0' => (Tok::Zero, 1),
            c if c.is_ascii_alphabetic() || c == RESERVED_PREFIX => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let suffix: Vec<char> = BAR_SUFFIX.chars().collect();
                let barred = chars.get(j..j + suffix.len()) == Some(&suffix[..]);
                let len = j - i + if barred { suffix.len() } else { 0 };
                let tok = match (word.as_str(), barred) {
                    ("true", false) => Tok::True,
                    ("false", false) => Tok::False,
                    ("mu", false) => Tok::Mu,
                    ("nu", false) => Tok::Nu,
                    _ => Tok::Ident(word, barred),
                };
                (tok, len)
            }
            other => {
                return Err(err(
                    start_line,
                    start_col,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
        i += len;
        col += len;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'o> {
    tokens: Vec<Spanned>,
    pos: usize,
    opts: &'o ParseOptions,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let s = &self.tokens[self.pos];
        ParseError {
            line: s.line,
            column: s.column,
            kind,
        }
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(self.error_here(ParseErrorKind::Syntax(msg.into())))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => self.syntax(format!("unexpected {t} after end of formula")),
        }
    }

    fn var_name(&mut self) -> Result<VarName, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name, barred) => {
                let reserved = barred || name.starts_with(RESERVED_PREFIX);
                if reserved && !self.opts.allow_reserved {
                    let shown = if barred {
                        format!("{name}{BAR_SUFFIX}")
                    } else {
                        name
                    };
                    return Err(self.error_here(ParseErrorKind::ReservedName(shown)));
                }
                self.bump();
                Ok(VarName::with_bar(name, barred))
            }
            t => self.syntax(format!("expected a variable, found {t}")),
        }
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name, false) if !name.starts_with(RESERVED_PREFIX) => {
                let label = Label::new(name);
                if let Some(alphabet) = &self.opts.alphabet {
                    if !alphabet.contains(&label) {
                        return Err(self.error_here(ParseErrorKind::UnknownLabel(
                            label.as_str().to_string(),
                        )));
                    }
                }
                self.bump();
                Ok(label)
            }
            t => self.syntax(format!("expected a label, found {t}")),
        }
    }

    fn variance(&mut self) -> Result<Variance, ParseError> {
        let v = match self.peek() {
            Tok::Plus => Variance::Plus,
            Tok::Minus => Variance::Minus,
            Tok::Zero => Variance::Zero,
            t => {
                let m = format!("expected a variance (+, - or 0), found {t}");
                return Err(self.error_here(ParseErrorKind::MalformedType(m)));
            }
        };
        self.bump();
        Ok(v)
    }

    fn ty(&mut self) -> Result<HflType, ParseError> {
        let arg = self.ty_atom()?;
        let is_arrow = *self.peek() == Tok::Caret
            && matches!(self.peek_at(1), Tok::Plus | Tok::Minus | Tok::Zero)
            && *self.peek_at(2) == Tok::Arrow;
        if !is_arrow {
            return Ok(arg);
        }
        self.bump();
        let v = self.variance()?;
        self.bump();
        let res = self.ty()?;
        Ok(HflType::arrow(arg, v, res))
    }

    fn ty_atom(&mut self) -> Result<HflType, ParseError> {
        match self.peek() {
            Tok::Ident(o, false) if o == "o" => {
                self.bump();
                Ok(HflType::Ground)
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                if *self.peek() != Tok::RParen {
                    let m = format!("expected `)` or `^v ->`, found {}", self.peek());
                    return Err(self.error_here(ParseErrorKind::MalformedType(m)));
                }
                self.bump();
                Ok(t)
            }
            t => {
                let m = format!("expected `o` or `(`, found {t}");
                Err(self.error_here(ParseErrorKind::MalformedType(m)))
            }
        }
    }

    fn starts_binder(&self) -> bool {
        matches!(self.peek(), Tok::Backslash | Tok::Mu | Tok::Nu)
    }

    fn starts_operand(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(..)
                | Tok::True
                | Tok::False
                | Tok::LParen
                | Tok::Tilde
                | Tok::Lt
                | Tok::LBrack
                | Tok::Backslash
                | Tok::Mu
                | Tok::Nu
        )
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.starts_binder() {
            self.binder()
        } else {
            self.or()
        }
    }

    fn binder(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Tok::Backslash => {
                let x = self.var_name()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                if *self.peek() != Tok::Caret {
                    let m = format!("expected `^` and a variance after the λ type, found {}", self.peek());
                    return Err(self.error_here(ParseErrorKind::MalformedType(m)));
                }
                self.bump();
                let v = self.variance()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(Formula::lambda(x, ty, v, body))
            }
            t @ (Tok::Mu | Tok::Nu) => {
                let x = self.var_name()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(if t == Tok::Mu {
                    Formula::mu(x, ty, body)
                } else {
                    Formula::nu(x, ty, body)
                })
            }
            _ => unreachable!("binder called without a binder token"),
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.app()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.app()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn app(&mut self) -> Result<Formula, ParseError> {
        let mut head = self.prefix()?;
        while self.starts_operand() {
            if self.starts_binder() {
                let arg = self.binder()?;
                return Ok(Formula::app(head, arg));
            }
            let arg = self.prefix()?;
            head = Formula::app(head, arg);
        }
        Ok(head)
    }

    fn prefix(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::neg(self.prefix()?))
            }
            Tok::Lt => {
                self.bump();
                let l = self.label()?;
                self.expect(Tok::Gt)?;
                Ok(Formula::Diamond(l, Box::new(self.prefix()?)))
            }
            Tok::LBrack => {
                self.bump();
                let l = self.label()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::Box(l, Box::new(self.prefix()?)))
            }
            Tok::Backslash | Tok::Mu | Tok::Nu => self.binder(),
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::True => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::Ident(..) => Ok(Formula::Var(self.var_name()?)),
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            t => self.syntax(format!("expected a formula, found {t}")),
        }
    }
}
