//! Abstract syntax of HFL formulas and types, together with the purely
//! syntactic operations on them (free/bound variables, masking, NNF shape,
//! size metrics and α-equivalence).

mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Neg;

pub use parse::{parse, parse_type, parse_with, ParseError, ParseErrorKind, ParseOptions};

/// Suffix used when printing barred variables. User input may not contain it.
pub const BAR_SUFFIX: &str = "'bar";

/// Prefix reserved for generated let-variables.
pub const RESERVED_PREFIX: char = '_';

/// How a function depends on its argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variance {
    /// Monotone.
    Plus,
    /// Antitone.
    Minus,
    /// Unrestricted.
    Zero,
}

impl Variance {
    pub const ALL: [Variance; 3] = [Variance::Plus, Variance::Minus, Variance::Zero];

    pub fn symbol(self) -> char {
        match self {
            Variance::Plus => '+',
            Variance::Minus => '-',
            Variance::Zero => '0',
        }
    }

    /// Variance of a composition: `+·v = v`, `-·v = -v`, `0·v = 0`.
    pub fn compose(self, other: Variance) -> Variance {
        match self {
            Variance::Plus => other,
            Variance::Minus => -other,
            Variance::Zero => Variance::Zero,
        }
    }
}

impl Neg for Variance {
    type Output = Variance;

    fn neg(self) -> Variance {
        match self {
            Variance::Plus => Variance::Minus,
            Variance::Minus => Variance::Plus,
            Variance::Zero => Variance::Zero,
        }
    }
}

impl fmt::Display for Variance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A type: the ground type `o` of state predicates, or a variance-annotated
/// arrow `σ^v -> τ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HflType {
    Ground,
    Arrow(Box<HflType>, Variance, Box<HflType>),
}

impl HflType {
    pub fn arrow(arg: HflType, variance: Variance, result: HflType) -> HflType {
        HflType::Arrow(Box::new(arg), variance, Box::new(result))
    }

    /// Builds `a1^v1 -> ... -> an^vn -> result`.
    pub fn curried<I>(args: I, result: HflType) -> HflType
    where
        I: IntoIterator<Item = (HflType, Variance)>,
        I::IntoIter: DoubleEndedIterator,
    {
        args.into_iter()
            .rev()
            .fold(result, |acc, (arg, v)| HflType::arrow(arg, v, acc))
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, HflType::Ground)
    }

    pub fn order(&self) -> usize {
        match self {
            HflType::Ground => 0,
            HflType::Arrow(arg, _, res) => res.order().max(1 + arg.order()),
        }
    }

    /// True iff every variance occurring in the type is `+`.
    pub fn is_monotone(&self) -> bool {
        match self {
            HflType::Ground => true,
            HflType::Arrow(arg, v, res) => {
                *v == Variance::Plus && arg.is_monotone() && res.is_monotone()
            }
        }
    }

    /// The type of the pointwise complement of a value of this type:
    /// variances along the result spine flip, argument types are unchanged.
    pub fn negate(&self) -> HflType {
        match self {
            HflType::Ground => HflType::Ground,
            HflType::Arrow(arg, v, res) => HflType::arrow((**arg).clone(), -*v, res.negate()),
        }
    }

    /// Argument types and variances along the result spine, and the final
    /// (always ground) result.
    pub fn spine(&self) -> Vec<(&HflType, Variance)> {
        let mut out = Vec::new();
        let mut ty = self;
        while let HflType::Arrow(arg, v, res) = ty {
            out.push((&**arg, *v));
            ty = res;
        }
        out
    }

    /// Number of type constructors, used for annotated size accounting.
    pub fn size(&self) -> usize {
        match self {
            HflType::Ground => 1,
            HflType::Arrow(arg, _, res) => 1 + arg.size() + res.size(),
        }
    }
}

/// A variable name. Barred names are the duplicates introduced by
/// monotonization and never appear in user input.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarName {
    base: String,
    barred: bool,
}

impl VarName {
    pub fn new(base: impl Into<String>) -> VarName {
        VarName {
            base: base.into(),
            barred: false,
        }
    }

    pub fn with_bar(base: impl Into<String>, barred: bool) -> VarName {
        VarName {
            base: base.into(),
            barred,
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn is_barred(&self) -> bool {
        self.barred
    }

    /// Names starting with `_` are reserved for generated let-variables.
    pub fn is_reserved(&self) -> bool {
        self.base.starts_with(RESERVED_PREFIX)
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.barred {
            write!(f, "{}{}", self.base, BAR_SUFFIX)
        } else {
            f.write_str(&self.base)
        }
    }
}

impl From<&str> for VarName {
    fn from(s: &str) -> VarName {
        VarName::new(s)
    }
}

/// A transition label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Label {
        Label(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Label {
        Label::new(s)
    }
}

/// An HFL formula. `⊥`, `∧`, `[a]` and `ν` are primitive so that negation
/// normal forms can be expressed without negation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bottom,
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Neg(Box<Formula>),
    Diamond(Label, Box<Formula>),
    Box(Label, Box<Formula>),
    Var(VarName),
    Lambda(VarName, HflType, Variance, Box<Formula>),
    App(Box<Formula>, Box<Formula>),
    Mu(VarName, HflType, Box<Formula>),
    Nu(VarName, HflType, Box<Formula>),
}

/// A position in a formula: the sequence of child indices from the root.
/// Binary nodes number their children 0 and 1, unary nodes and binders 0.
pub type Path = Vec<usize>;

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(VarName::new(name))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Formula) -> Formula {
        Formula::Neg(Box::new(a))
    }

    pub fn diamond(label: impl Into<Label>, a: Formula) -> Formula {
        Formula::Diamond(label.into(), Box::new(a))
    }

    pub fn boxed(label: impl Into<Label>, a: Formula) -> Formula {
        Formula::Box(label.into(), Box::new(a))
    }

    pub fn lambda(x: impl Into<VarName>, ty: HflType, v: Variance, body: Formula) -> Formula {
        Formula::Lambda(x.into(), ty, v, Box::new(body))
    }

    pub fn app(f: Formula, a: Formula) -> Formula {
        Formula::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Formula, args: impl IntoIterator<Item = Formula>) -> Formula {
        args.into_iter().fold(f, Formula::app)
    }

    pub fn mu(x: impl Into<VarName>, ty: HflType, body: Formula) -> Formula {
        Formula::Mu(x.into(), ty, Box::new(body))
    }

    pub fn nu(x: impl Into<VarName>, ty: HflType, body: Formula) -> Formula {
        Formula::Nu(x.into(), ty, Box::new(body))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Top | Formula::Bottom | Formula::Var(_) => vec![],
            Formula::Or(a, b) | Formula::And(a, b) | Formula::App(a, b) => vec![a, b],
            Formula::Neg(a)
            | Formula::Diamond(_, a)
            | Formula::Box(_, a)
            | Formula::Lambda(_, _, _, a)
            | Formula::Mu(_, _, a)
            | Formula::Nu(_, _, a) => vec![a],
        }
    }

    /// The variable bound at this node, if it is a binder.
    pub fn binder(&self) -> Option<&VarName> {
        match self {
            Formula::Lambda(x, ..) | Formula::Mu(x, ..) | Formula::Nu(x, ..) => Some(x),
            _ => None,
        }
    }

    pub fn subformula(&self, path: &[usize]) -> Option<&Formula> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    /// All subformula occurrences in pre-order, with their paths.
    pub fn occurrences(&self) -> Vec<(Path, &Formula)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), self)];
        while let Some((path, f)) = stack.pop() {
            for (i, c) in f.children().into_iter().enumerate().rev() {
                let mut p = path.clone();
                p.push(i);
                stack.push((p, c));
            }
            out.push((path, f));
        }
        out
    }

    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn bound_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Some(x) = f.binder() {
                out.insert(x.clone());
            }
        });
        out
    }

    /// `fv(φ) ∪ bv(φ)`.
    pub fn vars(&self) -> BTreeSet<VarName> {
        let mut out = self.bound_vars();
        self.visit(&mut |f| {
            if let Formula::Var(x) = f {
                out.insert(x.clone());
            }
        });
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Diamond(a, _) | Formula::Box(a, _) = f {
                out.insert(a.clone());
            }
        });
        out
    }

    /// Checks that no binder rebinds a variable already bound in its body.
    pub fn check_no_masking(&self) -> Result<(), MaskingViolation> {
        fn walk(f: &Formula, path: &mut Path) -> Result<BTreeSet<VarName>, MaskingViolation> {
            let mut bv = BTreeSet::new();
            for (i, c) in f.children().into_iter().enumerate() {
                path.push(i);
                bv.extend(walk(c, path)?);
                path.pop();
            }
            if let Some(x) = f.binder() {
                if bv.contains(x) {
                    return Err(MaskingViolation {
                        var: x.clone(),
                        path: path.clone(),
                    });
                }
                bv.insert(x.clone());
            }
            Ok(bv)
        }
        walk(self, &mut Vec::new()).map(|_| ())
    }

    /// Negation normal form: no negation, every binder annotation monotone,
    /// every λ-variance `+`.
    pub fn is_nnf(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |f| match f {
            Formula::Neg(_) => ok = false,
            Formula::Lambda(_, ty, v, _) => ok &= *v == Variance::Plus && ty.is_monotone(),
            Formula::Mu(_, ty, _) | Formula::Nu(_, ty, _) => ok &= ty.is_monotone(),
            _ => {}
        });
        ok
    }

    pub fn contains_barred(&self) -> bool {
        self.vars().iter().any(VarName::is_barred)
    }

    /// Number of AST nodes; each constructor and each variable occurrence
    /// counts one, type annotations are not counted.
    pub fn tree_size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Like [`Formula::tree_size`] but also counting type constructors in
    /// binder annotations.
    pub fn annotated_size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |f| {
            n += 1;
            if let Formula::Lambda(_, ty, ..) | Formula::Mu(_, ty, _) | Formula::Nu(_, ty, _) = f {
                n += ty.size();
            }
        });
        n
    }

    /// α-equivalence: equal up to consistent renaming of bound variables.
    /// Binder annotations must agree exactly.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        alpha_eq(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<VarName>, out: &mut BTreeSet<VarName>) {
    match f {
        Formula::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        _ => {
            let binder = f.binder();
            if let Some(x) = binder {
                bound.push(x.clone());
            }
            for c in f.children() {
                collect_free(c, bound, out);
            }
            if binder.is_some() {
                bound.pop();
            }
        }
    }
}

fn alpha_eq<'a>(
    a: &'a Formula,
    b: &'a Formula,
    left: &mut Vec<&'a VarName>,
    right: &mut Vec<&'a VarName>,
) -> bool {
    use Formula as F;
    let binder_pair = |left: &mut Vec<&'a VarName>,
                       right: &mut Vec<&'a VarName>,
                       x: &'a VarName,
                       y: &'a VarName,
                       p: &'a Formula,
                       q: &'a Formula| {
        left.push(x);
        right.push(y);
        let r = alpha_eq(p, q, left, right);
        left.pop();
        right.pop();
        r
    };
    match (a, b) {
        (F::Top, F::Top) | (F::Bottom, F::Bottom) => true,
        (F::Or(a1, a2), F::Or(b1, b2))
        | (F::And(a1, a2), F::And(b1, b2))
        | (F::App(a1, a2), F::App(b1, b2)) => {
            alpha_eq(a1, b1, left, right) && alpha_eq(a2, b2, left, right)
        }
        (F::Neg(p), F::Neg(q)) => alpha_eq(p, q, left, right),
        (F::Diamond(l1, p), F::Diamond(l2, q)) | (F::Box(l1, p), F::Box(l2, q)) => {
            l1 == l2 && alpha_eq(p, q, left, right)
        }
        (F::Var(x), F::Var(y)) => {
            let i = left.iter().rposition(|v| *v == x);
            let j = right.iter().rposition(|v| *v == y);
            match (i, j) {
                (None, None) => x == y,
                (Some(i), Some(j)) => i == j,
                _ => false,
            }
        }
        (F::Lambda(x, t1, v1, p), F::Lambda(y, t2, v2, q)) => {
            t1 == t2 && v1 == v2 && binder_pair(left, right, x, y, p, q)
        }
        (F::Mu(x, t1, p), F::Mu(y, t2, q)) | (F::Nu(x, t1, p), F::Nu(y, t2, q)) => {
            t1 == t2 && binder_pair(left, right, x, y, p, q)
        }
        _ => false,
    }
}

/// A binder whose variable is rebound somewhere in its own body.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("variable {var} is rebound inside the binder at path {path:?}")]
pub struct MaskingViolation {
    pub var: VarName,
    pub path: Path,
}

/// Size measurements of a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeReport {
    pub tree_size: usize,
    pub annotated_size: usize,
    /// Number of non-identical subformulas; `None` when the formula is not
    /// closed and well-typed.
    pub dag_size: Option<usize>,
    pub var_count: usize,
}

impl fmt::Display for SizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tree_size={} annotated_size={} dag_size={} var_count={}",
            self.tree_size,
            self.annotated_size,
            self.dag_size
                .map_or_else(|| "n/a".to_string(), |d| d.to_string()),
            self.var_count
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o() -> HflType {
        HflType::Ground
    }

    #[test]
    fn variance_negation_is_involution() {
        for v in Variance::ALL {
            assert_eq!(-(-v), v);
        }
        assert_eq!(-Variance::Plus, Variance::Minus);
        assert_eq!(-Variance::Minus, Variance::Plus);
        assert_eq!(-Variance::Zero, Variance::Zero);
    }

    #[test]
    fn type_order() {
        let t1 = HflType::arrow(
            HflType::arrow(o(), Variance::Minus, o()),
            Variance::Plus,
            HflType::arrow(o(), Variance::Zero, o()),
        );
        assert_eq!(o().order(), 0);
        assert_eq!(t1.order(), 2);
        assert!(!t1.is_monotone());
        assert!(HflType::arrow(o(), Variance::Plus, o()).is_monotone());
        assert_eq!(t1.negate().negate(), t1);
    }

    #[test]
    fn free_and_bound_vars() {
        let x = Formula::var("X");
        assert_eq!(x.free_vars(), BTreeSet::from([VarName::new("X")]));
        assert!(x.bound_vars().is_empty());

        let m = Formula::mu("X", o(), Formula::var("X"));
        assert!(m.free_vars().is_empty());
        assert_eq!(m.bound_vars(), BTreeSet::from([VarName::new("X")]));

        let a = Formula::app(
            Formula::var("X"),
            Formula::lambda("Y", o(), Variance::Plus, Formula::var("Y")),
        );
        assert_eq!(a.free_vars(), BTreeSet::from([VarName::new("X")]));
        assert_eq!(a.bound_vars(), BTreeSet::from([VarName::new("Y")]));
    }

    #[test]
    fn masking_detected_at_outer_binder() {
        let f = Formula::mu(
            "X",
            o(),
            Formula::lambda("X", o(), Variance::Plus, Formula::var("X")),
        );
        let err = f.check_no_masking().unwrap_err();
        assert_eq!(err.var, VarName::new("X"));
        assert_eq!(err.path, Vec::<usize>::new());
        assert!(Formula::Top.check_no_masking().is_ok());
        // sibling rebinding is not masking
        let g = Formula::or(
            Formula::mu("X", o(), Formula::var("X")),
            Formula::mu("X", o(), Formula::var("X")),
        );
        assert!(g.check_no_masking().is_ok());
    }

    #[test]
    fn nnf_shape() {
        assert!(Formula::Bottom.is_nnf());
        assert!(!Formula::neg(Formula::Top).is_nnf());
        assert!(!Formula::lambda("Y", o(), Variance::Zero, Formula::var("Y")).is_nnf());
        let bad_ty = HflType::arrow(o(), Variance::Minus, o());
        assert!(!Formula::mu("F", bad_ty, Formula::var("F")).is_nnf());
    }

    #[test]
    fn sizes() {
        assert_eq!(Formula::Top.tree_size(), 1);
        assert_eq!(Formula::Top.vars().len(), 0);
        let f = Formula::or(Formula::var("X"), Formula::var("X"));
        assert_eq!(f.tree_size(), 3);
        assert_eq!(f.vars().len(), 1);
        let l = Formula::lambda("Y", HflType::arrow(o(), Variance::Plus, o()), Variance::Plus, Formula::Top);
        assert_eq!(l.tree_size(), 2);
        assert_eq!(l.annotated_size(), 2 + 3);
    }

    #[test]
    fn alpha_equivalence() {
        let a = Formula::lambda("X", o(), Variance::Plus, Formula::var("X"));
        let b = Formula::lambda("Y", o(), Variance::Plus, Formula::var("Y"));
        let c = Formula::lambda("Y", o(), Variance::Minus, Formula::var("Y"));
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
        assert!(!Formula::var("X").alpha_eq(&Formula::var("Y")));
        let free = Formula::lambda("X", o(), Variance::Plus, Formula::var("Z"));
        let bound = Formula::lambda("Z", o(), Variance::Plus, Formula::var("Z"));
        assert!(!free.alpha_eq(&bound));
    }

    #[test]
    fn barred_names_print_with_reserved_suffix() {
        let x = VarName::with_bar("X", true);
        assert_eq!(x.to_string(), "X'bar");
        assert_ne!(x, VarName::new("X"));
    }
}
