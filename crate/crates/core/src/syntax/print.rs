use std::fmt::{self, Write};

use super::{Formula, HflType};

// Precedence levels, loosest first.
const BINDER: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const APP: u8 = 3;
const PREFIX: u8 = 4;
const ATOM: u8 = 5;

fn write_type(f: &mut impl Write, ty: &HflType, parens: bool) -> fmt::Result {
    match ty {
        HflType::Ground => f.write_char('o'),
        HflType::Arrow(arg, v, res) => {
            if parens {
                f.write_char('(')?;
            }
            write_type(f, arg, true)?;
            write!(f, "^{v} -> ")?;
            write_type(f, res, true)?;
            if parens {
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

impl HflType {
    /// The type as it appears in binder annotations: arrows are always
    /// parenthesized.
    pub fn annotation(&self) -> String {
        let mut s = String::new();
        write_type(&mut s, self, true).expect("writing to a String");
        s
    }
}

/// Top-level arrows are printed without the outer parentheses.
impl fmt::Display for HflType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type(f, self, false)
    }
}

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Top | Formula::Bottom | Formula::Var(_) => ATOM,
        Formula::Neg(_) | Formula::Diamond(..) | Formula::Box(..) => PREFIX,
        Formula::App(..) => APP,
        Formula::And(..) => AND,
        Formula::Or(..) => OR,
        Formula::Lambda(..) | Formula::Mu(..) | Formula::Nu(..) => BINDER,
    }
}

fn write_formula(out: &mut impl Write, f: &Formula, min: u8) -> fmt::Result {
    let parens = level(f) < min;
    if parens {
        out.write_char('(')?;
    }
    match f {
        Formula::Top => out.write_str("true")?,
        Formula::Bottom => out.write_str("false")?,
        Formula::Var(x) => write!(out, "{x}")?,
        Formula::Neg(a) => {
            out.write_char('~')?;
            write_formula(out, a, PREFIX)?;
        }
        Formula::Diamond(l, a) => {
            write!(out, "<{l}>")?;
            write_formula(out, a, PREFIX)?;
        }
        Formula::Box(l, a) => {
            write!(out, "[{l}]")?;
            write_formula(out, a, PREFIX)?;
        }
        Formula::App(a, b) => {
            write_formula(out, a, APP)?;
            out.write_char(' ')?;
            write_formula(out, b, ATOM)?;
        }
        Formula::And(a, b) => {
            write_formula(out, a, AND)?;
            out.write_str(" /\\ ")?;
            write_formula(out, b, APP)?;
        }
        Formula::Or(a, b) => {
            write_formula(out, a, OR)?;
            out.write_str(" \\/ ")?;
            write_formula(out, b, AND)?;
        }
        Formula::Lambda(x, ty, v, body) => {
            write!(out, "\\{x}:{}^{v}. ", ty.annotation())?;
            write_formula(out, body, BINDER)?;
        }
        Formula::Mu(x, ty, body) => {
            write!(out, "mu {x}:{}. ", ty.annotation())?;
            write_formula(out, body, BINDER)?;
        }
        Formula::Nu(x, ty, body) => {
            write!(out, "nu {x}:{}. ", ty.annotation())?;
            write_formula(out, body, BINDER)?;
        }
    }
    if parens {
        out.write_char(')')?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, BINDER)
    }
}
