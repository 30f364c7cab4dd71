//! The variance-tracking type system and the judgement-annotated AST.
//!
//! Every node of a [`TypedFormula`] carries the environment and type of its
//! judgement in the unique derivation. Negation is typed as pointwise
//! complement: `Γ ⊢ ¬φ : τ̃` when `¬Γ ⊢ φ : τ`, where `τ̃` flips the variances
//! along the result spine of `τ` (identical to `τ` at ground type).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::syntax::{Formula, HflType, Label, MaskingViolation, Path, SizeReport, VarName, Variance};

/// One assumption `X^v : τ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binding {
    pub name: VarName,
    pub variance: Variance,
    pub ty: HflType,
}

impl Binding {
    pub fn new(name: impl Into<VarName>, variance: Variance, ty: HflType) -> Binding {
        Binding {
            name: name.into(),
            variance,
            ty,
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}:{}", self.name, self.variance, self.ty.annotation())
    }
}

/// Ordered typing environment; order is binding order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TypingEnv {
    bindings: Vec<Binding>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("variable {0} is bound twice in the environment")]
pub struct DuplicateBinding(pub VarName);

impl TypingEnv {
    pub fn new() -> TypingEnv {
        TypingEnv::default()
    }

    pub fn from_bindings(
        bindings: impl IntoIterator<Item = Binding>,
    ) -> Result<TypingEnv, DuplicateBinding> {
        let mut env = TypingEnv::new();
        for b in bindings {
            env.push(b)?;
        }
        Ok(env)
    }

    pub fn push(&mut self, b: Binding) -> Result<(), DuplicateBinding> {
        if self.contains(&b.name) {
            return Err(DuplicateBinding(b.name));
        }
        self.bindings.push(b);
        Ok(())
    }

    /// A copy of the environment extended with one binding.
    pub fn with(&self, b: Binding) -> Result<TypingEnv, DuplicateBinding> {
        let mut env = self.clone();
        env.push(b)?;
        Ok(env)
    }

    pub fn lookup(&self, x: &VarName) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.name == *x)
    }

    pub fn contains(&self, x: &VarName) -> bool {
        self.lookup(x).is_some()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Binding> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// `¬Γ`: every variance negated, types and order unchanged.
    pub fn negate(&self) -> TypingEnv {
        TypingEnv {
            bindings: self
                .bindings
                .iter()
                .map(|b| Binding {
                    variance: -b.variance,
                    ..b.clone()
                })
                .collect(),
        }
    }

    /// The bindings of the given names, in binding order.
    pub fn restrict(&self, names: &BTreeSet<VarName>) -> TypingEnv {
        TypingEnv {
            bindings: self
                .bindings
                .iter()
                .filter(|b| names.contains(&b.name))
                .cloned()
                .collect(),
        }
    }

    /// Bindings sorted by name: equality of these is equality as sets.
    fn canonical(&self) -> Vec<Binding> {
        let mut v = self.bindings.clone();
        v.sort();
        v
    }
}

impl fmt::Display for TypingEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a TypingEnv {
    type Item = &'a Binding;
    type IntoIter = std::slice::Iter<'a, Binding>;

    fn into_iter(self) -> Self::IntoIter {
        self.bindings.iter()
    }
}

pub fn negate_env(env: &TypingEnv) -> TypingEnv {
    env.negate()
}

/// A formula node annotated with its judgement `env ⊢ node : ty`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedFormula {
    pub env: TypingEnv,
    pub ty: HflType,
    pub kind: TypedKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypedKind {
    Top,
    Bottom,
    Or(Box<TypedFormula>, Box<TypedFormula>),
    And(Box<TypedFormula>, Box<TypedFormula>),
    Neg(Box<TypedFormula>),
    Diamond(Label, Box<TypedFormula>),
    Box(Label, Box<TypedFormula>),
    Var(VarName),
    Lambda(VarName, HflType, Variance, Box<TypedFormula>),
    /// For a `0`-variance head the stored argument is its derivation under
    /// the application's own environment.
    App(Box<TypedFormula>, Box<TypedFormula>),
    Mu(VarName, HflType, Box<TypedFormula>),
    Nu(VarName, HflType, Box<TypedFormula>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no subformula at path {0:?}")]
pub struct InvalidPath(pub Path);

impl TypedFormula {
    pub fn children(&self) -> Vec<&TypedFormula> {
        match &self.kind {
            TypedKind::Top | TypedKind::Bottom | TypedKind::Var(_) => vec![],
            TypedKind::Or(a, b) | TypedKind::And(a, b) | TypedKind::App(a, b) => vec![a, b],
            TypedKind::Neg(a)
            | TypedKind::Diamond(_, a)
            | TypedKind::Box(_, a)
            | TypedKind::Lambda(_, _, _, a)
            | TypedKind::Mu(_, _, a)
            | TypedKind::Nu(_, _, a) => vec![a],
        }
    }

    pub fn erase(&self) -> Formula {
        let e = |t: &TypedFormula| Box::new(t.erase());
        match &self.kind {
            TypedKind::Top => Formula::Top,
            TypedKind::Bottom => Formula::Bottom,
            TypedKind::Or(a, b) => Formula::Or(e(a), e(b)),
            TypedKind::And(a, b) => Formula::And(e(a), e(b)),
            TypedKind::Neg(a) => Formula::Neg(e(a)),
            TypedKind::Diamond(l, a) => Formula::Diamond(l.clone(), e(a)),
            TypedKind::Box(l, a) => Formula::Box(l.clone(), e(a)),
            TypedKind::Var(x) => Formula::Var(x.clone()),
            TypedKind::Lambda(x, t, v, a) => Formula::Lambda(x.clone(), t.clone(), *v, e(a)),
            TypedKind::App(a, b) => Formula::App(e(a), e(b)),
            TypedKind::Mu(x, t, a) => Formula::Mu(x.clone(), t.clone(), e(a)),
            TypedKind::Nu(x, t, a) => Formula::Nu(x.clone(), t.clone(), e(a)),
        }
    }

    pub fn subformula(&self, path: &[usize]) -> Option<&TypedFormula> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    /// The judgement stored at `path`.
    pub fn type_of(&self, path: &[usize]) -> Result<(&TypingEnv, &HflType), InvalidPath> {
        self.subformula(path)
            .map(|t| (&t.env, &t.ty))
            .ok_or_else(|| InvalidPath(path.to_vec()))
    }

    /// All occurrences in pre-order, with their paths.
    pub fn occurrences(&self) -> Vec<(Path, &TypedFormula)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), self)];
        while let Some((path, t)) = stack.pop() {
            for (i, c) in t.children().into_iter().enumerate().rev() {
                let mut p = path.clone();
                p.push(i);
                stack.push((p, c));
            }
            out.push((path, t));
        }
        out
    }
}

/// The rule of the type system whose premise or side condition failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Var,
    Or,
    And,
    Not,
    Diamond,
    Box,
    Lambda,
    AppPlus,
    AppMinus,
    AppZero,
    Mu,
    Nu,
    NoMasking,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Var => "variable",
            Rule::Or => "disjunction",
            Rule::And => "conjunction",
            Rule::Not => "negation",
            Rule::Diamond => "diamond",
            Rule::Box => "box",
            Rule::Lambda => "abstraction",
            Rule::AppPlus => "monotone application",
            Rule::AppMinus => "antitone application",
            Rule::AppZero => "unrestricted application",
            Rule::Mu => "least fixed point",
            Rule::Nu => "greatest fixed point",
            Rule::NoMasking => "no variable masking",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeErrorKind {
    Masking(MaskingViolation),
    UnboundVariable(VarName),
    /// Variable looked up with variance `-`.
    NegativeOccurrence(VarName),
    /// Binder name already present in the environment.
    Rebinding(VarName),
    OperandMismatch { left: HflType, right: HflType },
    NotGround(HflType),
    NotAFunction(HflType),
    ArgumentMismatch { expected: HflType, found: HflType },
    FixpointBodyMismatch { expected: HflType, found: HflType },
    /// The argument of a `0`-application fails under the negated
    /// environment.
    NegatedArgument(Box<TypeError>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct TypeError {
    pub path: Path,
    pub rule: Rule,
    pub kind: TypeErrorKind,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rule violated at {:?}: ", self.rule, self.path)?;
        match &self.kind {
            TypeErrorKind::Masking(m) => write!(f, "{m}"),
            TypeErrorKind::UnboundVariable(x) => write!(f, "unbound variable {x}"),
            TypeErrorKind::NegativeOccurrence(x) => {
                write!(f, "variable {x} occurs with variance - (needs + or 0)")
            }
            TypeErrorKind::Rebinding(x) => write!(f, "binder {x} is already in the environment"),
            TypeErrorKind::OperandMismatch { left, right } => {
                write!(f, "operands have types {left} and {right}")
            }
            TypeErrorKind::NotGround(t) => write!(f, "expected type o, found {t}"),
            TypeErrorKind::NotAFunction(t) => write!(f, "applied formula has type {t}"),
            TypeErrorKind::ArgumentMismatch { expected, found } => {
                write!(f, "argument has type {found}, expected {expected}")
            }
            TypeErrorKind::FixpointBodyMismatch { expected, found } => {
                write!(f, "body has type {found}, expected {expected}")
            }
            TypeErrorKind::NegatedArgument(inner) => {
                write!(f, "argument is not typable under the negated environment ({inner})")
            }
        }
    }
}

/// Builds the unique derivation of `env ⊢ φ : τ`. Fails at the first
/// violated rule.
pub fn typecheck(env: &TypingEnv, phi: &Formula) -> Result<TypedFormula, TypeError> {
    phi.check_no_masking().map_err(|m| TypeError {
        path: m.path.clone(),
        rule: Rule::NoMasking,
        kind: TypeErrorKind::Masking(m),
    })?;
    check(env, phi, &mut Vec::new())
}

/// Typechecks a closed formula in the empty environment.
pub fn typecheck_closed(phi: &Formula) -> Result<TypedFormula, TypeError> {
    typecheck(&TypingEnv::new(), phi)
}

fn err<T>(path: &Path, rule: Rule, kind: TypeErrorKind) -> Result<T, TypeError> {
    Err(TypeError {
        path: path.clone(),
        rule,
        kind,
    })
}

fn child(env: &TypingEnv, phi: &Formula, path: &mut Path, i: usize) -> Result<TypedFormula, TypeError> {
    path.push(i);
    let r = check(env, phi, path);
    path.pop();
    r
}

fn bind(env: &TypingEnv, b: Binding, path: &Path, rule: Rule) -> Result<TypingEnv, TypeError> {
    env.with(b)
        .or_else(|DuplicateBinding(x)| err(path, rule, TypeErrorKind::Rebinding(x)))
}

fn check(env: &TypingEnv, phi: &Formula, path: &mut Path) -> Result<TypedFormula, TypeError> {
    let node = |ty: HflType, kind: TypedKind| TypedFormula {
        env: env.clone(),
        ty,
        kind,
    };
    match phi {
        Formula::Top => Ok(node(HflType::Ground, TypedKind::Top)),
        Formula::Bottom => Ok(node(HflType::Ground, TypedKind::Bottom)),
        Formula::Var(x) => match env.lookup(x) {
            None => err(path, Rule::Var, TypeErrorKind::UnboundVariable(x.clone())),
            Some(b) if b.variance == Variance::Minus => {
                err(path, Rule::Var, TypeErrorKind::NegativeOccurrence(x.clone()))
            }
            Some(b) => Ok(node(b.ty.clone(), TypedKind::Var(x.clone()))),
        },
        Formula::Or(a, b) | Formula::And(a, b) => {
            let rule = if matches!(phi, Formula::Or(..)) { Rule::Or } else { Rule::And };
            let ta = child(env, a, path, 0)?;
            let tb = child(env, b, path, 1)?;
            if ta.ty != tb.ty {
                return err(
                    path,
                    rule,
                    TypeErrorKind::OperandMismatch {
                        left: ta.ty,
                        right: tb.ty,
                    },
                );
            }
            let ty = ta.ty.clone();
            let (ta, tb) = (Box::new(ta), Box::new(tb));
            Ok(node(
                ty,
                if rule == Rule::Or { TypedKind::Or(ta, tb) } else { TypedKind::And(ta, tb) },
            ))
        }
        Formula::Neg(a) => {
            let ta = child(&env.negate(), a, path, 0)?;
            Ok(node(ta.ty.negate(), TypedKind::Neg(Box::new(ta))))
        }
        Formula::Diamond(l, a) | Formula::Box(l, a) => {
            let diamond = matches!(phi, Formula::Diamond(..));
            let rule = if diamond { Rule::Diamond } else { Rule::Box };
            let ta = child(env, a, path, 0)?;
            if !ta.ty.is_ground() {
                return err(path, rule, TypeErrorKind::NotGround(ta.ty));
            }
            let ta = Box::new(ta);
            Ok(node(
                HflType::Ground,
                if diamond { TypedKind::Diamond(l.clone(), ta) } else { TypedKind::Box(l.clone(), ta) },
            ))
        }
        Formula::Lambda(x, sigma, v, body) => {
            let inner = bind(env, Binding::new(x.clone(), *v, sigma.clone()), path, Rule::Lambda)?;
            let tb = child(&inner, body, path, 0)?;
            let ty = HflType::arrow(sigma.clone(), *v, tb.ty.clone());
            Ok(node(ty, TypedKind::Lambda(x.clone(), sigma.clone(), *v, Box::new(tb))))
        }
        Formula::Mu(x, tau, body) | Formula::Nu(x, tau, body) => {
            let mu = matches!(phi, Formula::Mu(..));
            let rule = if mu { Rule::Mu } else { Rule::Nu };
            let inner = bind(env, Binding::new(x.clone(), Variance::Plus, tau.clone()), path, rule)?;
            let tb = child(&inner, body, path, 0)?;
            if tb.ty != *tau {
                return err(
                    path,
                    rule,
                    TypeErrorKind::FixpointBodyMismatch {
                        expected: tau.clone(),
                        found: tb.ty,
                    },
                );
            }
            let tb = Box::new(tb);
            Ok(node(
                tau.clone(),
                if mu {
                    TypedKind::Mu(x.clone(), tau.clone(), tb)
                } else {
                    TypedKind::Nu(x.clone(), tau.clone(), tb)
                },
            ))
        }
        Formula::App(f, a) => {
            let tf = child(env, f, path, 0)?;
            let HflType::Arrow(sigma, v, res) = &tf.ty else {
                return err(path, Rule::AppPlus, TypeErrorKind::NotAFunction(tf.ty.clone()));
            };
            let (rule, arg_env) = match v {
                Variance::Plus => (Rule::AppPlus, env.clone()),
                Variance::Minus => (Rule::AppMinus, env.negate()),
                Variance::Zero => (Rule::AppZero, env.clone()),
            };
            let ta = child(&arg_env, a, path, 1)?;
            if ta.ty != **sigma {
                return err(
                    path,
                    rule,
                    TypeErrorKind::ArgumentMismatch {
                        expected: (**sigma).clone(),
                        found: ta.ty,
                    },
                );
            }
            if *v == Variance::Zero {
                let neg = child(&env.negate(), a, path, 1).map_err(|e| TypeError {
                    path: path.clone(),
                    rule,
                    kind: TypeErrorKind::NegatedArgument(Box::new(e)),
                })?;
                debug_assert_eq!(neg.ty, ta.ty, "types do not depend on variances");
            }
            let res = (**res).clone();
            Ok(node(res, TypedKind::App(Box::new(tf), Box::new(ta))))
        }
    }
}

/// Connective of a node, including its binder and annotations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeTag {
    Top,
    Bottom,
    Or,
    And,
    Neg,
    Diamond(Label),
    Box(Label),
    Var(VarName),
    Lambda(VarName, HflType, Variance),
    App,
    Mu(VarName, HflType),
    Nu(VarName, HflType),
}

impl NodeTag {
    pub fn of(t: &TypedFormula) -> NodeTag {
        match &t.kind {
            TypedKind::Top => NodeTag::Top,
            TypedKind::Bottom => NodeTag::Bottom,
            TypedKind::Or(..) => NodeTag::Or,
            TypedKind::And(..) => NodeTag::And,
            TypedKind::Neg(_) => NodeTag::Neg,
            TypedKind::Diamond(l, _) => NodeTag::Diamond(l.clone()),
            TypedKind::Box(l, _) => NodeTag::Box(l.clone()),
            TypedKind::Var(x) => NodeTag::Var(x.clone()),
            TypedKind::Lambda(x, t, v, _) => NodeTag::Lambda(x.clone(), t.clone(), *v),
            TypedKind::App(..) => NodeTag::App,
            TypedKind::Mu(x, t, _) => NodeTag::Mu(x.clone(), t.clone()),
            TypedKind::Nu(x, t, _) => NodeTag::Nu(x.clone(), t.clone()),
        }
    }
}

/// One class of identical subformula occurrences.
#[derive(Clone, Debug)]
pub struct DagClass<'a> {
    pub id: usize,
    /// The first occurrence in pre-order.
    pub representative: &'a TypedFormula,
    pub tag: NodeTag,
    pub children: Vec<usize>,
    /// The representative's environment restricted to its free variables.
    pub free: TypingEnv,
    pub occurrences: Vec<Path>,
}

/// Partition of the occurrences of a typed formula into classes of
/// identical subformulas. Class ids are topological: every child class
/// has a smaller id than its parent.
#[derive(Clone, Debug)]
pub struct DagClasses<'a> {
    pub classes: Vec<DagClass<'a>>,
    pub root: usize,
}

impl DagClasses<'_> {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, path: &[usize]) -> Option<usize> {
        self.classes
            .iter()
            .find(|c| c.occurrences.iter().any(|p| p == path))
            .map(|c| c.id)
    }
}

type ClassKey = (NodeTag, Vec<usize>, HflType, Vec<Binding>);

/// Two occurrences share a class iff they are syntactically equal, have
/// equal types, and agree on the environment restricted to their free
/// variables.
pub fn dag_classes(t: &TypedFormula) -> DagClasses<'_> {
    struct Builder<'a> {
        index: HashMap<ClassKey, usize>,
        classes: Vec<DagClass<'a>>,
    }

    impl<'a> Builder<'a> {
        // Returns (class id, free variables).
        fn visit(&mut self, t: &'a TypedFormula, path: &mut Path) -> (usize, BTreeSet<VarName>) {
            let mut children = Vec::new();
            let mut fv = BTreeSet::new();
            for (i, c) in t.children().into_iter().enumerate() {
                path.push(i);
                let (id, cfv) = self.visit(c, path);
                path.pop();
                children.push(id);
                fv.extend(cfv);
            }
            match &t.kind {
                TypedKind::Var(x) => {
                    fv.insert(x.clone());
                }
                TypedKind::Lambda(x, ..) | TypedKind::Mu(x, ..) | TypedKind::Nu(x, ..) => {
                    fv.remove(x);
                }
                _ => {}
            }
            let free = t.env.restrict(&fv);
            let tag = NodeTag::of(t);
            let key = (tag.clone(), children.clone(), t.ty.clone(), free.canonical());
            let id = match self.index.get(&key) {
                Some(&id) => id,
                None => {
                    let id = self.classes.len();
                    self.index.insert(key, id);
                    self.classes.push(DagClass {
                        id,
                        representative: t,
                        tag,
                        children,
                        free,
                        occurrences: Vec::new(),
                    });
                    id
                }
            };
            self.classes[id].occurrences.push(path.clone());
            (id, fv)
        }
    }

    let mut b = Builder {
        index: HashMap::new(),
        classes: Vec::new(),
    };
    let (root, _) = b.visit(t, &mut Vec::new());
    // Post-order visiting reaches the first occurrence of a class in
    // post-order, so the representative is that first occurrence.
    for c in &mut b.classes {
        c.occurrences.sort();
    }
    DagClasses {
        classes: b.classes,
        root,
    }
}

/// Size metrics; `dag_size` is present iff φ is closed and well-typed.
pub fn measure(phi: &Formula) -> SizeReport {
    let dag_size = if phi.is_closed() {
        typecheck_closed(phi).ok().map(|t| dag_classes(&t).len())
    } else {
        None
    };
    SizeReport {
        tree_size: phi.tree_size(),
        annotated_size: phi.annotated_size(),
        dag_size,
        var_count: phi.vars().len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn o() -> HflType {
        HflType::Ground
    }

    fn arrow(a: HflType, v: Variance, r: HflType) -> HflType {
        HflType::arrow(a, v, r)
    }

    #[test]
    fn negate_env_examples() {
        let env = TypingEnv::from_bindings([
            Binding::new("F", Variance::Minus, arrow(o(), Variance::Minus, o())),
            Binding::new("Y", Variance::Plus, o()),
        ])
        .unwrap();
        let neg = negate_env(&env);
        let vs: Vec<_> = neg.iter().map(|b| b.variance).collect();
        assert_eq!(vs, vec![Variance::Plus, Variance::Minus]);
        assert_eq!(neg.iter().next().unwrap().ty, arrow(o(), Variance::Minus, o()));
        assert_eq!(negate_env(&neg), env);
        let zero = TypingEnv::from_bindings([Binding::new("X", Variance::Zero, o())]).unwrap();
        assert_eq!(negate_env(&zero), zero);
    }

    #[test]
    fn duplicate_bindings_rejected() {
        let b = Binding::new("X", Variance::Plus, o());
        assert!(TypingEnv::from_bindings([b.clone(), b]).is_err());
    }

    #[test]
    fn variable_rule_requires_non_negative_variance() {
        let env = TypingEnv::from_bindings([Binding::new("X", Variance::Minus, o())]).unwrap();
        let e = typecheck(&env, &Formula::var("X")).unwrap_err();
        assert_eq!(e.rule, Rule::Var);
        assert_eq!(e.kind, TypeErrorKind::NegativeOccurrence(VarName::new("X")));
        let t = typecheck(&env, &Formula::neg(Formula::var("X"))).unwrap();
        assert_eq!(t.ty, o());
    }

    #[test]
    fn first_example_judgements() {
        let phi = parse(r"\F:(o^- -> o)^+ . \Y:o^0 . mu Z:o. (F ~Y) \/ <a>(Z \/ ~Y)").unwrap();
        let t = typecheck_closed(&phi).unwrap();
        let tau1 = arrow(
            arrow(o(), Variance::Minus, o()),
            Variance::Plus,
            arrow(o(), Variance::Zero, o()),
        );
        let (env, ty) = t.type_of(&[]).unwrap();
        assert!(env.is_empty());
        assert_eq!(*ty, tau1);
        // the argument ¬Y of F: path λF / λY / μZ / ∨ left / app arg
        let (env, ty) = t.type_of(&[0, 0, 0, 0, 1]).unwrap();
        assert_eq!(*ty, o());
        assert_eq!(env.lookup(&"Y".into()).unwrap().variance, Variance::Zero);
        assert_eq!(env.lookup(&"F".into()).unwrap().variance, Variance::Minus);
        assert_eq!(env.lookup(&"Z".into()).unwrap().variance, Variance::Minus);
        // the Y under that negation
        let (env, _) = t.type_of(&[0, 0, 0, 0, 1, 0]).unwrap();
        assert_eq!(env.lookup(&"Z".into()).unwrap().variance, Variance::Plus);
        assert!(t.type_of(&[1]).is_err());
    }

    #[test]
    fn second_example_is_rejected() {
        let phi = parse(r"(\F:(o^- -> o)^+ . mu X:o. F X) (\Y:o^- . ~Y)").unwrap();
        let e = typecheck_closed(&phi).unwrap_err();
        assert_eq!(e.rule, Rule::Var);
        // with any other annotation on F it still fails
        for v in Variance::ALL {
            for w in Variance::ALL {
                let src = format!(r"(\F:(o^{v} -> o)^{w} . mu X:o. F X) (\Y:o^{v} . ~Y)");
                assert!(typecheck_closed(&parse(&src).unwrap()).is_err(), "{src}");
            }
        }
    }

    #[test]
    fn negation_flips_function_types() {
        let phi = parse(r"~(\X:o^+ . X)").unwrap();
        let t = typecheck_closed(&phi).unwrap();
        assert_eq!(t.ty, arrow(o(), Variance::Minus, o()));
        let phi = parse(r"(~(\X:o^+ . X)) true").unwrap();
        let t = typecheck_closed(&phi).unwrap();
        assert_eq!(t.ty, o());
    }

    #[test]
    fn zero_application_needs_both_derivations() {
        let ok = parse(r"\Y:o^0 . (\X:o^0 . X) Y").unwrap();
        assert!(typecheck_closed(&ok).is_ok());
        let bad = parse(r"\Y:o^+ . (\X:o^0 . X) Y").unwrap();
        let e = typecheck_closed(&bad).unwrap_err();
        assert_eq!(e.rule, Rule::AppZero);
        assert!(matches!(e.kind, TypeErrorKind::NegatedArgument(_)));
    }

    #[test]
    fn fixpoint_body_must_match() {
        let e = typecheck_closed(&parse(r"mu X:(o^+ -> o). true").unwrap()).unwrap_err();
        assert_eq!(e.rule, Rule::Mu);
        let e = typecheck_closed(&parse("mu X:o. X X").unwrap()).unwrap_err();
        assert_eq!(e.rule, Rule::AppPlus);
        assert!(matches!(e.kind, TypeErrorKind::NotAFunction(_)));
    }

    #[test]
    fn masking_reported_as_type_error() {
        let e = typecheck_closed(&parse(r"mu X:o. (\X:o^+ . X) X").unwrap()).unwrap_err();
        assert_eq!(e.rule, Rule::NoMasking);
    }

    #[test]
    fn dag_of_disjunction() {
        let t = typecheck_closed(&Formula::or(Formula::Top, Formula::Top)).unwrap();
        let d = dag_classes(&t);
        assert_eq!(d.len(), 2);
        assert_eq!(d.class_of(&[0]), d.class_of(&[1]));
        assert_eq!(d.root, 1);
        assert_eq!(d.classes[1].children, vec![0, 0]);
    }

    #[test]
    fn dag_separates_occurrences_in_different_contexts() {
        // X under μX and X under λX at different types are different classes
        let phi = parse(r"(\X:o^+ . X) ((\X:(o^+ -> o)^+ . X) (\Y:o^+ . Y) true)");
        // masking: X bound twice in different branches is fine
        let t = typecheck_closed(&phi.unwrap()).unwrap();
        let d = dag_classes(&t);
        assert_eq!(d.len(), t.erase().tree_size());
    }

    #[test]
    fn measure_top() {
        let r = measure(&Formula::Top);
        assert_eq!((r.tree_size, r.var_count, r.dag_size), (1, 0, Some(1)));
        assert_eq!(measure(&Formula::var("X")).dag_size, None);
    }
}
