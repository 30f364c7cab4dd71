//! Type expansion and the type-directed negation elimination `⟨+⟩`/`⟨−⟩`.
//!
//! `⟨+⟩ψ` is a monotone formula equivalent to `ψ`, `⟨−⟩ψ` one equivalent to
//! `¬ψ`. Every unrestricted argument is passed twice, once positively and
//! once as its complement, to a binder pair `X`, `X'bar`.

use std::ops::Neg;

use crate::syntax::{Formula, HflType, VarName, Variance};
use crate::typing::{Binding, TypedFormula, TypedKind, TypingEnv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Pos,
    Neg,
}

impl Mode {
    pub fn flip(self) -> Mode {
        match self {
            Mode::Pos => Mode::Neg,
            Mode::Neg => Mode::Pos,
        }
    }

    /// The mode in which a position of variance `v` (`+` or `-`) is
    /// translated when the surrounding mode is `self`.
    fn compose(self, v: Variance) -> Mode {
        match (self, v) {
            (m, Variance::Plus) => m,
            (m, Variance::Minus) => m.flip(),
            (_, Variance::Zero) => unreachable!("unrestricted positions are translated both ways"),
        }
    }
}

impl Neg for Mode {
    type Output = Mode;

    fn neg(self) -> Mode {
        self.flip()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MonotonizeError {
    #[error("variable {0} is already barred")]
    AlreadyBarred(VarName),
}

/// The barred duplicate of an unbarred variable.
pub fn bar(x: &VarName) -> Result<VarName, MonotonizeError> {
    if x.is_barred() {
        return Err(MonotonizeError::AlreadyBarred(x.clone()));
    }
    Ok(VarName::with_bar(x.base(), true))
}

/// `⟦o⟧ = o`, `⟦σ^±→τ⟧ = ⟦σ⟧^+→⟦τ⟧`, `⟦σ^0→τ⟧ = ⟦σ⟧^+→⟦σ⟧^+→⟦τ⟧`.
pub fn expand_type(ty: &HflType) -> HflType {
    match ty {
        HflType::Ground => HflType::Ground,
        HflType::Arrow(arg, v, res) => {
            let arg = expand_type(arg);
            let res = expand_type(res);
            match v {
                Variance::Plus | Variance::Minus => HflType::arrow(arg, Variance::Plus, res),
                Variance::Zero => HflType::arrow(
                    arg.clone(),
                    Variance::Plus,
                    HflType::arrow(arg, Variance::Plus, res),
                ),
            }
        }
    }
}

/// `X^+` keeps its name, `X^-` becomes `X'bar`, `X^0` becomes `X, X'bar`;
/// all at variance `+` and expanded type.
pub fn expand_env(env: &TypingEnv) -> Result<TypingEnv, MonotonizeError> {
    let mut out = Vec::with_capacity(env.len());
    for b in env {
        let ty = expand_type(&b.ty);
        let names = match b.variance {
            Variance::Plus => vec![unbarred(&b.name)?],
            Variance::Minus => vec![bar(&b.name)?],
            Variance::Zero => vec![unbarred(&b.name)?, bar(&b.name)?],
        };
        out.extend(names.into_iter().map(|n| Binding::new(n, Variance::Plus, ty.clone())));
    }
    Ok(TypingEnv::from_bindings(out).expect("bar is injective on unbarred names"))
}

fn unbarred(x: &VarName) -> Result<VarName, MonotonizeError> {
    if x.is_barred() {
        Err(MonotonizeError::AlreadyBarred(x.clone()))
    } else {
        Ok(x.clone())
    }
}

// Positive positions keep their name, so NNF inputs with barred names
// translate to themselves.
fn name_in(m: Mode, x: &VarName) -> Result<VarName, MonotonizeError> {
    match m {
        Mode::Pos => Ok(x.clone()),
        Mode::Neg => bar(x),
    }
}

/// `translate(Pos, ψ)` is `⟨+⟩ψ`, `translate(Neg, ψ)` is `⟨−⟩ψ`.
///
/// Application dispatches on the stored type of the head. Binders and
/// arguments are named and translated by their effective variance, i.e.
/// the declared variance composed with the mode.
pub fn translate(m: Mode, t: &TypedFormula) -> Result<Formula, MonotonizeError> {
    let tr = |m: Mode, t: &TypedFormula| translate(m, t).map(Box::new);
    Ok(match (&t.kind, m) {
        (TypedKind::Top, Mode::Pos) | (TypedKind::Bottom, Mode::Neg) => Formula::Top,
        (TypedKind::Top, Mode::Neg) | (TypedKind::Bottom, Mode::Pos) => Formula::Bottom,
        (TypedKind::Var(x), m) => Formula::Var(name_in(m, x)?),
        (TypedKind::Neg(a), m) => translate(m.flip(), a)?,
        (TypedKind::Or(a, b), Mode::Pos) | (TypedKind::And(a, b), Mode::Neg) => {
            Formula::Or(tr(m, a)?, tr(m, b)?)
        }
        (TypedKind::And(a, b), Mode::Pos) | (TypedKind::Or(a, b), Mode::Neg) => {
            Formula::And(tr(m, a)?, tr(m, b)?)
        }
        (TypedKind::Diamond(l, a), Mode::Pos) | (TypedKind::Box(l, a), Mode::Neg) => {
            Formula::Diamond(l.clone(), tr(m, a)?)
        }
        (TypedKind::Box(l, a), Mode::Pos) | (TypedKind::Diamond(l, a), Mode::Neg) => {
            Formula::Box(l.clone(), tr(m, a)?)
        }
        (TypedKind::Lambda(x, sigma, w, body), m) => {
            let ty = expand_type(sigma);
            let body = translate(m, body)?;
            match w {
                Variance::Zero => Formula::lambda(
                    x.clone(),
                    ty.clone(),
                    Variance::Plus,
                    Formula::lambda(bar(x)?, ty, Variance::Plus, body),
                ),
                w => Formula::lambda(name_in(m.compose(*w), x)?, ty, Variance::Plus, body),
            }
        }
        (TypedKind::Mu(x, tau, body), Mode::Pos) | (TypedKind::Nu(x, tau, body), Mode::Neg) => {
            Formula::Mu(name_in(m, x)?, expand_type(tau), tr(m, body)?)
        }
        (TypedKind::Nu(x, tau, body), Mode::Pos) | (TypedKind::Mu(x, tau, body), Mode::Neg) => {
            Formula::Nu(name_in(m, x)?, expand_type(tau), tr(m, body)?)
        }
        (TypedKind::App(f, a), m) => {
            let HflType::Arrow(_, v, _) = &f.ty else {
                unreachable!("typed application head has an arrow type")
            };
            let head = translate(m, f)?;
            match v {
                Variance::Zero => Formula::apps(
                    head,
                    [translate(Mode::Pos, a)?, translate(Mode::Neg, a)?],
                ),
                v => Formula::app(head, translate(m.compose(*v), a)?),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::typing::{negate_env, typecheck, typecheck_closed};

    fn o() -> HflType {
        HflType::Ground
    }

    fn pos(src: &str) -> Formula {
        let t = typecheck_closed(&corpus::formula(src)).unwrap();
        translate(Mode::Pos, &t).unwrap()
    }

    fn assert_alpha(actual: &Formula, expected_src: &str) {
        let expected = corpus::formula(expected_src);
        assert!(
            actual.alpha_eq(&expected),
            "\n  actual:   {actual}\n  expected: {expected}"
        );
    }

    #[test]
    fn mode_flip_is_involution() {
        assert_eq!(Mode::Pos.flip().flip(), Mode::Pos);
        assert_eq!(-Mode::Neg, Mode::Pos);
    }

    #[test]
    fn expand_type_examples() {
        assert_eq!(expand_type(&o()), o());
        let neg = HflType::arrow(o(), Variance::Minus, o());
        let mono = HflType::arrow(o(), Variance::Plus, o());
        assert_eq!(expand_type(&neg), mono);
        let tau1 = HflType::arrow(neg, Variance::Plus, HflType::arrow(o(), Variance::Zero, o()));
        let expected = HflType::arrow(
            mono,
            Variance::Plus,
            HflType::arrow(o(), Variance::Plus, HflType::arrow(o(), Variance::Plus, o())),
        );
        assert_eq!(expand_type(&tau1), expected);
        assert_eq!(expand_type(&tau1).order(), tau1.order());
    }

    #[test]
    fn expand_env_examples() {
        let plus = TypingEnv::from_bindings([Binding::new("X", Variance::Plus, o())]).unwrap();
        assert_eq!(expand_env(&plus).unwrap(), plus);
        let minus = TypingEnv::from_bindings([Binding::new("X", Variance::Minus, o())]).unwrap();
        let out: Vec<_> = expand_env(&minus).unwrap().iter().cloned().collect();
        assert_eq!(out, vec![Binding::new(VarName::with_bar("X", true), Variance::Plus, o())]);
        let f = HflType::arrow(o(), Variance::Minus, o());
        let zero = TypingEnv::from_bindings([Binding::new("Y", Variance::Zero, f)]).unwrap();
        let mono = HflType::arrow(o(), Variance::Plus, o());
        let out: Vec<_> = expand_env(&zero).unwrap().iter().cloned().collect();
        assert_eq!(
            out,
            vec![
                Binding::new("Y", Variance::Plus, mono.clone()),
                Binding::new(VarName::with_bar("Y", true), Variance::Plus, mono),
            ]
        );
        let barred =
            TypingEnv::from_bindings([Binding::new(VarName::with_bar("X", true), Variance::Plus, o())])
                .unwrap();
        assert!(expand_env(&barred).is_err());
    }

    #[test]
    fn bar_examples() {
        let xb = bar(&"X".into()).unwrap();
        assert!(xb.is_barred());
        assert_eq!(xb.base(), "X");
        assert_ne!(bar(&"Y".into()).unwrap(), xb);
        assert_eq!(bar(&xb), Err(MonotonizeError::AlreadyBarred(xb.clone())));
    }

    #[test]
    fn unrestricted_recursion_golden() {
        assert_alpha(&pos(corpus::UNRESTRICTED_RECURSION), corpus::UNRESTRICTED_RECURSION_NNF);
    }

    #[test]
    fn negation_at_callee_golden() {
        assert_alpha(&pos(corpus::NEGATION_AT_CALLEE), corpus::NEGATION_AT_CALLEE_NNF);
    }

    #[test]
    fn negation_at_caller_golden() {
        assert_alpha(&pos(corpus::NEGATION_AT_CALLER), corpus::NEGATION_AT_CALLER_NNF);
    }

    #[test]
    fn excluded_middle_golden() {
        assert_alpha(
            &pos(corpus::EXCLUDED_MIDDLE_FUNCTION),
            corpus::EXCLUDED_MIDDLE_FUNCTION_NNF,
        );
    }

    #[test]
    fn negation_of_application_uses_effective_mode() {
        // ¬((\X:o^+. X) true) must become a formula equivalent to false
        let f = pos(r"~((\X:o^+ . X) true)");
        assert_alpha(&f, r"(\X'bar:o^+ . X'bar) false");
        let g = pos(r"~((\X:o^- . ~X) true)");
        assert_alpha(&g, r"(\X:o^+ . X) true");
    }

    #[test]
    fn identity_on_nnf() {
        for (_, phi) in corpus::closed_ground() {
            let t = typecheck_closed(&phi).unwrap();
            let out = translate(Mode::Pos, &t).unwrap();
            assert!(out.is_nnf(), "{phi}");
            if phi.is_nnf() {
                assert_eq!(out, phi);
            }
        }
    }

    #[test]
    fn subformula_typing_preserved_on_corpus() {
        let mut sources: Vec<Formula> = corpus::closed_ground().into_iter().map(|(_, f)| f).collect();
        sources.push(corpus::formula(corpus::HIGHER_ORDER_SIGNATURE));
        for phi in sources.into_iter().filter(|f| !f.contains_barred()) {
            let t = typecheck_closed(&phi).unwrap();
            for (path, sub) in t.occurrences() {
                let ty = expand_type(&sub.ty);
                let p = translate(Mode::Pos, sub).unwrap();
                let tp = typecheck(&expand_env(&sub.env).unwrap(), &p)
                    .unwrap_or_else(|e| panic!("{phi} at {path:?}: {p}: {e}"));
                assert_eq!(tp.ty, ty);
                let n = translate(Mode::Neg, sub).unwrap();
                let tn = typecheck(&expand_env(&negate_env(&sub.env)).unwrap(), &n)
                    .unwrap_or_else(|e| panic!("{phi} at {path:?}: {n}: {e}"));
                assert_eq!(tn.ty, ty);
            }
        }
    }
}
