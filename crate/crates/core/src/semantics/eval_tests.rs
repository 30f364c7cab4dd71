use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::corpus::{self, formula};
use crate::syntax::{Formula, HflType, Label, Variance};
use crate::typing::{typecheck, typecheck_closed, Binding, TypedKind, TypingEnv};

fn labels(names: &[&str]) -> Vec<Label> {
    names.iter().map(|n| Label::new(*n)).collect()
}

fn sat(lts: &Lts, phi: &Formula) -> u64 {
    satisfying_states(&Evaluator::new(lts), phi).unwrap()
}

fn random_lts(rng: &mut ChaCha8Rng, max_states: usize, names: &[&str]) -> Lts {
    let n = rng.gen_range(1..=max_states);
    let mut lts = Lts::new(n, labels(names)).unwrap();
    for l in labels(names) {
        for s in 0..n {
            for t in 0..n {
                if rng.gen_bool(0.3) {
                    lts.add_transition(s, &l, t);
                }
            }
        }
    }
    lts
}

#[test]
fn ground_fixpoints() {
    let chain = Lts::chain(["a", "a"]);
    assert_eq!(sat(&chain, &formula(r"mu X:o. <a> X")), 0);
    assert_eq!(sat(&chain, &formula(r"mu X:o. [a] X")), 0b111);
    let mut looped = Lts::new(2, labels(&["a"])).unwrap();
    looped.add_transition(0, &Label::new("a"), 0);
    assert_eq!(sat(&looped, &formula(r"nu X:o. <a> X")), 0b01);
    assert_eq!(sat(&looped, &formula(r"nu X:o. [a] X")), 0b11);
    assert_eq!(sat(&looped, &formula(r"mu X:o. [a] X")), 0b10);
}

// Boolean matrix of label `a`.
type Matrix = Vec<u64>;

fn square(m: &Matrix) -> Matrix {
    m.iter()
        .map(|&row| (0..m.len()).filter(|&j| row >> j & 1 == 1).fold(0, |acc, j| acc | m[j]))
        .collect()
}

fn pre(m: &Matrix, set: u64) -> u64 {
    (0..m.len()).filter(|&s| m[s] & set != 0).fold(0, |acc, s| acc | 1 << s)
}

// States with a path a^(2^k) b for some k, by repeated squaring of the
// a-relation until the sequence of powers cycles.
fn power_of_two_paths(lts: &Lts) -> u64 {
    let a = Label::new("a");
    let b = Label::new("b");
    let target = lts.diamond(&b, lts.all());
    let mut m: Matrix = (0..lts.num_states()).map(|s| lts.successors(s, &a)).collect();
    let mut seen = Vec::new();
    let mut out = 0;
    while !seen.contains(&m) {
        out |= pre(&m, target);
        let next = square(&m);
        seen.push(m);
        m = next;
    }
    out
}

#[test]
fn exponential_paths_on_chains() {
    let phi = formula(corpus::EXPONENTIAL_PATHS);
    for k in 0..=10 {
        let mut word = vec!["a"; k];
        word.push("b");
        let lts = Lts::chain(word);
        let expected = k.is_power_of_two();
        assert_eq!(model_check(&lts, 0, &phi).unwrap(), expected, "a^{k} b");
        assert_eq!(sat(&lts, &phi), power_of_two_paths(&lts));
    }
}

#[test]
fn exponential_paths_on_random_systems() {
    let phi = formula(corpus::EXPONENTIAL_PATHS);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let lts = random_lts(&mut rng, 6, &["a", "b"]);
        assert_eq!(sat(&lts, &phi), power_of_two_paths(&lts), "{lts}");
    }
}

// Disjunction of [a]^k false for k up to the number of states.
fn bounded_depth(n: usize) -> Formula {
    let mut term = Formula::Bottom;
    let mut out = Formula::Bottom;
    for _ in 0..=n {
        out = Formula::or(out, term.clone());
        term = Formula::boxed("a", term);
    }
    out
}

#[test]
fn unrestricted_recursion_is_bounded_depth() {
    let phi = formula(corpus::UNRESTRICTED_RECURSION);
    let nnf = formula(corpus::UNRESTRICTED_RECURSION_NNF);
    let (one, two) = (labels(&["a"]), labels(&["a", "b"]));
    for lts in enumerate_ltss(3, &one).chain(enumerate_ltss(2, &two)) {
        let expected = sat(&lts, &bounded_depth(lts.num_states()));
        assert_eq!(sat(&lts, &phi), expected, "{lts}");
        assert_eq!(sat(&lts, &nnf), expected, "{lts}");
    }
}

// Fixed point of `body` in `x`, as the meet of all prefixed points (least)
// or the join of all postfixed points (greatest), by enumeration.
fn tarski(lts: &Lts, x: &str, ty: &HflType, body: &Formula, greatest: bool) -> SemValue {
    let env = TypingEnv::from_bindings([Binding::new(x, Variance::Plus, ty.clone())]).unwrap();
    let t = typecheck(&env, body).unwrap();
    let ev = Evaluator::new(lts);
    let dom = ev.domain(ty).unwrap();
    let mut acc: Option<SemValue> = None;
    for d in dom.elems() {
        let rho = Valuation::from([(x.into(), d.clone())]);
        let f = ev.eval(&rho, &t).unwrap();
        let (lo, hi) = if greatest { (d, &f) } else { (&f, d) };
        if leq(lo, hi).unwrap() {
            acc = Some(match acc {
                None => d.clone(),
                Some(a) if greatest => join(&a, d).unwrap(),
                Some(a) => meet(&a, d).unwrap(),
            });
        }
    }
    acc.expect("the extremal element is always a prefixed and postfixed point")
}

#[test]
fn fixpoints_agree_with_knaster_tarski() {
    let cases = [
        ("X", "o", r"<a> X \/ [b] false"),
        ("X", "o", r"<a> X /\ [b] X"),
        ("X", "o^+ -> o", r"\Y:o^+ . Y \/ <a> (X Y)"),
        ("X", "o^- -> o", r"\Y:o^- . ~Y \/ <a> (X Y)"),
        ("X", "o^0 -> o", r"\Y:o^0 . (Y /\ ~<b> Y) \/ [a] (X (<b> Y))"),
        ("X", "o^+ -> o^- -> o", r"\Y:o^+ . \Z:o^- . (Y /\ ~Z) \/ <a> (X Y Z)"),
    ];
    for (x, ty_src, body_src) in cases {
        let body = formula(body_src);
        let systems: Vec<Lts> = enumerate_ltss(2, &body.labels().into_iter().collect::<Vec<_>>()).collect();
        let ty = crate::syntax::parse_type(ty_src).unwrap();
        for greatest in [false, true] {
            let fix = if greatest {
                Formula::nu(x, ty.clone(), body.clone())
            } else {
                Formula::mu(x, ty.clone(), body.clone())
            };
            let t = typecheck_closed(&fix).unwrap();
            for lts in &systems {
                let got = eval(lts, &Valuation::new(), &t).unwrap();
                let want = tarski(lts, x, &ty, &body, greatest);
                assert_eq!(got, want, "{fix} on\n{lts}");
            }
        }
    }
}

#[test]
fn values_respect_declared_variance() {
    let cases = [
        r"\Y:o^+ . <a> Y \/ Y",
        r"\Y:o^- . ~<a> Y",
        r"\Y:o^0 . Y /\ ~<a> Y",
        r"mu X:(o^- -> o). \Y:o^- . ~Y \/ <a> (X Y)",
        r"nu X:(o^0 -> o). \Y:o^0 . (Y \/ ~[b] Y) /\ [a] (X (<b> Y))",
        corpus::EXCLUDED_MIDDLE_FUNCTION,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for src in cases {
        let t = typecheck_closed(&formula(src)).unwrap();
        for _ in 0..20 {
            let lts = random_lts(&mut rng, 2, &["a", "b"]);
            let ev = Evaluator::new(&lts);
            let v = ev.eval(&Valuation::new(), &t).unwrap();
            assert!(ev.domain(&t.ty).unwrap().index_of(&v).is_some(), "{src} on\n{lts}");
        }
    }
}

#[test]
fn modal_and_fixpoint_duality() {
    let pairs = [
        (r"[a] <b> true", r"~<a> ~<b> true"),
        (r"nu X:o. <a> X", r"~(mu X:o. ~<a> ~X)"),
        (r"mu X:o. <b> true \/ [a] X", r"~(nu X:o. ~(<b> true \/ [a] ~X))"),
        (
            r"(nu F:(o^+ -> o). \Y:o^+ . Y /\ [a] (F Y)) <b> true",
            r"~((mu F:(o^+ -> o). \Y:o^+ . Y \/ <a> (F Y)) (~<b> true))",
        ),
    ];
    let systems: Vec<Lts> = enumerate_ltss(2, &labels(&["a", "b"])).collect();
    for (l, r) in pairs {
        let (phi, psi) = (formula(l), formula(r));
        for lts in &systems {
            assert!(equivalent_on(lts, &phi, &psi).unwrap(), "{l} vs {r} on\n{lts}");
        }
    }
}

#[test]
fn invariant_under_bisimilar_copies() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let corpus = corpus::closed_ground();
    for _ in 0..15 {
        let lts = random_lts(&mut rng, 4, &["a", "b"]);
        let s = rng.gen_range(0..lts.num_states());
        let dup = lts.duplicate_state(s).unwrap();
        let copy = dup.num_states() - 1;
        for (name, phi) in &corpus {
            let before = sat(&lts, phi);
            let after = sat(&dup, phi);
            assert_eq!(after & lts.all(), before, "{name}");
            assert_eq!(after >> copy & 1, before >> s & 1, "{name}");
        }
    }
}

#[test]
fn iteration_steps_are_bounded_by_the_lattice() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, phi) in corpus::closed_ground() {
        for _ in 0..5 {
            let lts = random_lts(&mut rng, 3, &["a", "b"]);
            let ev = Evaluator::new(&lts);
            satisfying_states(&ev, &phi).unwrap();
            for st in ev.stats() {
                assert!(st.steps < st.rounds || st.rounds == 0, "{name}");
                if let Ok(dom) = enumerate_domain(&lts, &st.ty, DEFAULT_BUDGET) {
                    assert!(st.steps < dom.len(), "{name}: {st:?}");
                }
            }
        }
    }
}

#[test]
fn missing_variables_and_types_are_reported() {
    let lts = Lts::chain(["a"]);
    let env = TypingEnv::from_bindings([Binding::new("Z", Variance::Plus, HflType::Ground)]).unwrap();
    let t = typecheck(&env, &formula("<a> Z")).unwrap();
    assert!(matches!(
        eval(&lts, &Valuation::new(), &t),
        Err(SemanticsError::MissingVariable(_))
    ));
    let lam = formula(r"\Y:o^+ . Y");
    assert!(matches!(model_check(&lts, 0, &lam), Err(SemanticsError::NotGround(_))));
    assert!(matches!(model_check(&lts, 0, &formula("Q")), Err(SemanticsError::Type(_))));
    assert!(matches!(t.kind, TypedKind::Diamond(..)));
}

#[test]
fn de_morgan_for_application() {
    let cases = [
        (r"\Y:o^+ . <a> Y", r"<b> true"),
        (r"\Y:o^- . [a] ~Y", r"<b> true"),
        (r"\Y:o^0 . Y /\ ~<a> Y", r"[b] false"),
        (r"\G:(o^+ -> o)^+ . G (G <a> true)", r"\Z:o^+ . <b> Z"),
    ];
    let systems: Vec<Lts> = enumerate_ltss(2, &labels(&["a", "b"])).collect();
    for (f, a) in cases {
        let (f, a) = (formula(f), formula(a));
        let lhs = Formula::neg(Formula::app(f.clone(), a.clone()));
        let rhs = Formula::app(Formula::neg(f), a);
        for lts in &systems {
            assert!(equivalent_on(lts, &lhs, &rhs).unwrap(), "{lhs} vs {rhs} on\n{lts}");
        }
    }
}
