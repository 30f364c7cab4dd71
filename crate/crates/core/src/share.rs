//! Subformula sharing: one let-definition per class of identical
//! subformulas, and the inverse β-expansion used as its oracle.
//!
//! `let X = ψ in φ` is encoded as `(\X:τ^+. φ) ψ`. Definitions abstract
//! over the free variables of their subformula, so every definition is a
//! closed term and every use site applies it to the variables in scope.

use std::collections::{BTreeSet, HashMap};

use crate::monotonize::{translate, Mode, MonotonizeError};
use crate::syntax::{Formula, HflType, VarName, Variance};
use crate::typing::{dag_classes, typecheck_closed, NodeTag, TypeError, TypedFormula, TypingEnv};

/// Prefix of generated let-variables.
pub const LET_PREFIX: &str = "_s";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ShareMode {
    /// Inputs must be negation-free with monotone annotations; the output
    /// is in negation normal form.
    #[default]
    Monotone,
    /// Accepts any closed well-typed formula. Let-binders get variance `0`
    /// and definitions keep the variances of their free variables. Not part
    /// of the negation elimination pipeline.
    UnsafeGeneral,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ShareError {
    #[error("sharing needs a closed formula")]
    NotClosed,
    #[error("sharing needs a negation-free formula with monotone annotations")]
    NotMonotone,
    #[error("fresh let-variable names exhausted")]
    FreshNamesExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum UnshareError {
    #[error("let-variable {0} is used outside its scope")]
    UnboundLet(VarName),
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("formula has type {0}, expected o")]
    NotGround(HflType),
    #[error(transparent)]
    Monotonize(#[from] MonotonizeError),
    #[error(transparent)]
    Share(#[from] ShareError),
    #[error("translation output is ill-typed: {0}")]
    Internal(TypeError),
}

/// One class of identical subformulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DagNode {
    pub id: usize,
    pub tag: NodeTag,
    pub children: Vec<usize>,
    pub ty: HflType,
    /// Free variables in binding order, with their variances and types.
    pub free: TypingEnv,
    /// `σ1^v1 -> ... -> σk^vk -> ty` over the free variables.
    pub let_type: HflType,
}

/// Classes in topological order; the last node is the root.
pub fn build_dag(t: &TypedFormula) -> Result<Vec<DagNode>, ShareError> {
    build_dag_with(t, ShareMode::Monotone)
}

fn build_dag_with(t: &TypedFormula, mode: ShareMode) -> Result<Vec<DagNode>, ShareError> {
    if !t.env.is_empty() || !t.erase().is_closed() {
        return Err(ShareError::NotClosed);
    }
    if mode == ShareMode::Monotone && !t.erase().is_nnf() {
        return Err(ShareError::NotMonotone);
    }
    let classes = dag_classes(t);
    let mut nodes: Vec<DagNode> = classes
        .classes
        .iter()
        .map(|c| {
            let params = c.free.iter().map(|b| (b.ty.clone(), b.variance));
            DagNode {
                id: c.id,
                tag: c.tag.clone(),
                children: c.children.clone(),
                ty: c.representative.ty.clone(),
                free: c.free.clone(),
                let_type: HflType::curried(params.collect::<Vec<_>>(), c.representative.ty.clone()),
            }
        })
        .collect();
    debug_assert!(nodes.iter().all(|n| n.children.iter().all(|&c| c < n.id)));
    debug_assert_eq!(classes.root, nodes.len() - 1);
    nodes.truncate(classes.root + 1);
    Ok(nodes)
}

fn let_index(x: &VarName) -> Option<usize> {
    if x.is_barred() {
        return None;
    }
    x.base().strip_prefix(LET_PREFIX)?.parse().ok()
}

/// Rebuilds a closed formula as a let-chain over its dag classes. The
/// root's definition is inlined, so a single-class formula is returned
/// unchanged.
pub fn share(t: &TypedFormula, mode: ShareMode) -> Result<Formula, ShareError> {
    let nodes = build_dag_with(t, mode)?;
    let first = t
        .erase()
        .vars()
        .iter()
        .filter_map(let_index)
        .max()
        .map_or(Some(1), |m| m.checked_add(1))
        .ok_or(ShareError::FreshNamesExhausted)?;
    first
        .checked_add(nodes.len())
        .ok_or(ShareError::FreshNamesExhausted)?;
    let name = |i: usize| VarName::new(format!("{LET_PREFIX}{}", first + i));
    let use_site = |j: usize| {
        Formula::apps(
            Formula::Var(name(j)),
            nodes[j].free.iter().map(|b| Formula::Var(b.name.clone())),
        )
    };
    let body = |n: &DagNode| -> Formula {
        let c = |k: usize| use_site(n.children[k]);
        match &n.tag {
            NodeTag::Top => Formula::Top,
            NodeTag::Bottom => Formula::Bottom,
            NodeTag::Var(x) => Formula::Var(x.clone()),
            NodeTag::Or => Formula::or(c(0), c(1)),
            NodeTag::And => Formula::and(c(0), c(1)),
            NodeTag::App => Formula::app(c(0), c(1)),
            NodeTag::Neg => Formula::neg(c(0)),
            NodeTag::Diamond(l) => Formula::Diamond(l.clone(), Box::new(c(0))),
            NodeTag::Box(l) => Formula::Box(l.clone(), Box::new(c(0))),
            NodeTag::Lambda(x, ty, v) => Formula::lambda(x.clone(), ty.clone(), *v, c(0)),
            NodeTag::Mu(x, ty) => Formula::mu(x.clone(), ty.clone(), c(0)),
            NodeTag::Nu(x, ty) => Formula::nu(x.clone(), ty.clone(), c(0)),
        }
    };
    let let_variance = match mode {
        ShareMode::Monotone => Variance::Plus,
        ShareMode::UnsafeGeneral => Variance::Zero,
    };
    let (root, defs) = nodes.split_last().expect("a formula has at least one class");
    let mut out = body(root);
    for n in defs.iter().rev() {
        let def = n.free.iter().rev().fold(body(n), |acc, b| {
            Formula::lambda(b.name.clone(), b.ty.clone(), b.variance, acc)
        });
        out = Formula::app(
            Formula::lambda(name(n.id), n.let_type.clone(), let_variance, out),
            def,
        );
    }
    Ok(out)
}

/// Inverts [`share`]: expands every let-definition at its use sites.
pub fn unshare(phi: &Formula) -> Result<Formula, UnshareError> {
    let mut defs: HashMap<VarName, Formula> = HashMap::new();
    let mut cur = phi;
    while let Formula::App(head, def) = cur {
        let Formula::Lambda(x, _, _, rest) = &**head else {
            break;
        };
        if let_index(x).is_none() {
            break;
        }
        let expanded = expand(def, &defs)?;
        defs.insert(x.clone(), expanded);
        cur = rest;
    }
    let out = expand(cur, &defs)?;
    match out.free_vars().into_iter().find(|x| defs.contains_key(x)) {
        Some(x) => Err(UnshareError::UnboundLet(x)),
        None => Ok(out),
    }
}

fn leading_params(def: &Formula) -> Vec<&VarName> {
    let mut out = Vec::new();
    let mut cur = def;
    while let Formula::Lambda(y, _, _, body) = cur {
        out.push(y);
        cur = body;
    }
    out
}

fn expand(f: &Formula, defs: &HashMap<VarName, Formula>) -> Result<Formula, UnshareError> {
    let mut spine = Vec::new();
    let mut head = f;
    while let Formula::App(g, a) = head {
        spine.push(&**a);
        head = g;
    }
    spine.reverse();
    if let Formula::Var(x) = head {
        if let Some(def) = defs.get(x) {
            let params = leading_params(def);
            let k = spine
                .iter()
                .zip(&params)
                .take_while(|(a, p)| matches!(a, Formula::Var(y) if y == **p))
                .count();
            let mut reduced = def;
            let mut sub = Vec::with_capacity(k);
            for a in &spine[..k] {
                let Formula::Lambda(y, _, _, body) = reduced else {
                    unreachable!("k is bounded by the number of leading parameters")
                };
                sub.push((y.clone(), (*a).clone()));
                reduced = body;
            }
            let mut out = reduced.clone();
            for (y, a) in sub.into_iter().rev() {
                out = substitute(&out, &y, &a);
            }
            let rest = spine[k..]
                .iter()
                .map(|a| expand(a, defs))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Formula::apps(out, rest));
        }
    }
    Ok(match f {
        Formula::Top | Formula::Bottom | Formula::Var(_) => f.clone(),
        Formula::Or(a, b) => Formula::or(expand(a, defs)?, expand(b, defs)?),
        Formula::And(a, b) => Formula::and(expand(a, defs)?, expand(b, defs)?),
        Formula::App(a, b) => Formula::app(expand(a, defs)?, expand(b, defs)?),
        Formula::Neg(a) => Formula::neg(expand(a, defs)?),
        Formula::Diamond(l, a) => Formula::Diamond(l.clone(), Box::new(expand(a, defs)?)),
        Formula::Box(l, a) => Formula::Box(l.clone(), Box::new(expand(a, defs)?)),
        Formula::Lambda(x, t, v, a) => Formula::lambda(x.clone(), t.clone(), *v, expand(a, defs)?),
        Formula::Mu(x, t, a) => Formula::mu(x.clone(), t.clone(), expand(a, defs)?),
        Formula::Nu(x, t, a) => Formula::nu(x.clone(), t.clone(), expand(a, defs)?),
    })
}

/// Capture-avoiding substitution `f[x := a]`.
pub fn substitute(f: &Formula, x: &VarName, a: &Formula) -> Formula {
    let fv = a.free_vars();
    subst(f, x, a, &fv)
}

fn subst(f: &Formula, x: &VarName, a: &Formula, fv_a: &BTreeSet<VarName>) -> Formula {
    let rec = |g: &Formula| Box::new(subst(g, x, a, fv_a));
    match f {
        Formula::Var(y) if y == x => a.clone(),
        Formula::Top | Formula::Bottom | Formula::Var(_) => f.clone(),
        Formula::Or(p, q) => Formula::Or(rec(p), rec(q)),
        Formula::And(p, q) => Formula::And(rec(p), rec(q)),
        Formula::App(p, q) => Formula::App(rec(p), rec(q)),
        Formula::Neg(p) => Formula::Neg(rec(p)),
        Formula::Diamond(l, p) => Formula::Diamond(l.clone(), rec(p)),
        Formula::Box(l, p) => Formula::Box(l.clone(), rec(p)),
        Formula::Lambda(y, _, _, _) | Formula::Mu(y, _, _) | Formula::Nu(y, _, _) => {
            if y == x || !f.free_vars().contains(x) {
                return f.clone();
            }
            let (y, body) = match f {
                Formula::Lambda(_, _, _, b) | Formula::Mu(_, _, b) | Formula::Nu(_, _, b) => (y, b),
                _ => unreachable!(),
            };
            let (y2, body2) = if fv_a.contains(y) {
                let avoid: BTreeSet<VarName> =
                    body.vars().union(fv_a).cloned().chain([x.clone()]).collect();
                let fresh = (1..)
                    .map(|i| VarName::with_bar(format!("{}_{i}", y.base()), y.is_barred()))
                    .find(|n| !avoid.contains(n))
                    .expect("infinitely many candidates");
                let renamed = substitute(body, y, &Formula::Var(fresh.clone()));
                (fresh, renamed)
            } else {
                (y.clone(), (**body).clone())
            };
            let inner = Box::new(subst(&body2, x, a, fv_a));
            match f {
                Formula::Lambda(_, t, v, _) => Formula::Lambda(y2, t.clone(), *v, inner),
                Formula::Mu(_, t, _) => Formula::Mu(y2, t.clone(), inner),
                Formula::Nu(_, t, _) => Formula::Nu(y2, t.clone(), inner),
                _ => unreachable!(),
            }
        }
    }
}

fn monotonized(phi: &Formula) -> Result<TypedFormula, PipelineError> {
    let t = typecheck_closed(phi)?;
    if !t.ty.is_ground() {
        return Err(PipelineError::NotGround(t.ty));
    }
    let out = translate(Mode::Pos, &t)?;
    typecheck_closed(&out).map_err(PipelineError::Internal)
}

/// `⟨+⟩φ` for a closed ground formula, without sharing.
pub fn nnf_unshared(phi: &Formula) -> Result<Formula, PipelineError> {
    Ok(monotonized(phi)?.erase())
}

/// The negation normal form `share(⟨+⟩φ)` of a closed ground formula.
pub fn nnf(phi: &Formula) -> Result<Formula, PipelineError> {
    Ok(share(&monotonized(phi)?, ShareMode::Monotone)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::syntax::parse;

    fn typed(src: &str) -> TypedFormula {
        typecheck_closed(&corpus::formula(src)).unwrap()
    }

    #[test]
    fn dag_of_disjunction_of_tops() {
        let nodes = build_dag(&typed(r"true \/ true")).unwrap();
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[0].tag, NodeTag::Top);
        assert_eq!(nodes[1].children, vec![0, 0]);
    }

    #[test]
    fn share_examples() {
        assert_eq!(share(&typed("true"), ShareMode::Monotone).unwrap(), Formula::Top);
        let s = share(&typed(r"true \/ true"), ShareMode::Monotone).unwrap();
        assert_eq!(s, corpus::formula(r"(\_s1:o^+ . _s1 \/ _s1) true"));
    }

    #[test]
    fn share_avoids_existing_let_names() {
        let phi = corpus::formula(r"(\_s4:o^+ . _s4 \/ _s4) true");
        let s = share(&typecheck_closed(&phi).unwrap(), ShareMode::Monotone).unwrap();
        assert!(s.vars().iter().filter_map(let_index).all(|i| i == 4 || i >= 5));
        assert_eq!(unshare(&s).unwrap(), phi);
    }

    #[test]
    fn share_rejects_negations_unless_general() {
        let t = typed(r"~true \/ ~true");
        assert_eq!(share(&t, ShareMode::Monotone), Err(ShareError::NotMonotone));
        let s = share(&t, ShareMode::UnsafeGeneral).unwrap();
        assert!(typecheck_closed(&s).is_ok());
        assert_eq!(unshare(&s).unwrap(), t.erase());
    }

    #[test]
    fn unshare_single_step() {
        let f = corpus::formula(r"(\_s1:o^+ . _s1 \/ _s1) true");
        assert_eq!(unshare(&f).unwrap(), parse(r"true \/ true").unwrap());
    }

    #[test]
    fn unshare_reports_unbound_lets() {
        let f = corpus::formula(r"(\_s1:o^+ . _s1) _s1");
        assert_eq!(unshare(&f), Err(UnshareError::UnboundLet("_s1".into())));
        let g = corpus::formula(r"_s3 \/ true");
        assert_eq!(unshare(&g), Ok(g.clone()));
    }

    #[test]
    fn round_trip_on_corpus() {
        for (name, phi) in corpus::closed_ground() {
            let t = monotonized(&phi).unwrap();
            let s = share(&t, ShareMode::Monotone).unwrap();
            assert!(s.is_nnf(), "{name}");
            let ts = typecheck_closed(&s).unwrap_or_else(|e| panic!("{name}: {e}\n{s}"));
            assert_eq!(ts.ty, HflType::Ground);
            assert!(unshare(&s).unwrap().alpha_eq(&t.erase()), "{name}");
        }
    }

    #[test]
    fn nested_family_dag_is_linear() {
        for depth in 1..=8 {
            let phi = corpus::nested_unrestricted(depth);
            let t = monotonized(&phi).unwrap();
            let nodes = build_dag(&t).unwrap();
            assert!(nodes.len() <= 20 * depth + 10, "{depth}: {}", nodes.len());
            assert!(t.erase().tree_size() >= 1 << depth);
        }
    }

    #[test]
    fn substitution_avoids_capture() {
        let f = parse(r"\Y:o^+ . X \/ Y").unwrap();
        let out = substitute(&f, &"X".into(), &Formula::var("Y"));
        assert!(out.alpha_eq(&parse(r"\Z:o^+ . Y \/ Z").unwrap()), "{out}");
        let g = parse(r"mu X:o. X").unwrap();
        assert_eq!(substitute(&g, &"X".into(), &Formula::Top), g);
    }

    #[test]
    fn pipeline_rejects_non_ground() {
        let e = nnf(&parse(r"\X:o^+ . X").unwrap()).unwrap_err();
        assert!(matches!(e, PipelineError::NotGround(_)));
        let e = nnf(&parse(r"mu X:o. ~X").unwrap()).unwrap_err();
        assert!(matches!(e, PipelineError::Type(_)));
    }
}
