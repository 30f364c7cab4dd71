//! Reference formulas and parameterised formula families used by tests,
//! benchmarks and the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{parse_with, Formula, HflType, ParseOptions, Variance};

/// A predicate transformer with a contravariant functional argument and an
/// unrestricted ground argument.
pub const HIGHER_ORDER_SIGNATURE: &str =
    r"\F:(o^- -> o)^+ . \Y:o^0 . mu Z:o. (F ~Y) \/ <a>(Z \/ ~Y)";

/// Ill-typed: β-reduces to `mu X. ~X`.
pub const NEGATIVE_FIXPOINT: &str = r"(\F:(o^- -> o)^+ . mu X:o. F X) (\Y:o^- . ~Y)";

/// Holds at s iff some path from s is labelled `a^(2^n) b` for some n ≥ 0.
pub const EXPONENTIAL_PATHS: &str = r"(mu F:((o^+ -> o)^+ -> (o^+ -> o)). \G:(o^+ -> o)^+ . \X:o^+ . (G X) \/ (F (\Y:o^+ . G (G Y)) X)) (\Z:o^+ . <a> Z) (<b> true)";

/// Equivalent to the infinite disjunction of `[a]^n false`.
pub const UNRESTRICTED_RECURSION: &str = r"(mu X:(o^0 -> o). \Y:o^0 . ~Y \/ X (<a> Y)) true";

/// Negation normal form of [`UNRESTRICTED_RECURSION`].
pub const UNRESTRICTED_RECURSION_NNF: &str =
    r"(mu X:(o^+ -> (o^+ -> o)). \Y:o^+ . \Y'bar:o^+ . Y'bar \/ X (<a> Y) ([a] Y'bar)) true false";

/// Two nested unrestricted applications; naive negation elimination
/// duplicates the inner argument.
pub const NESTED_UNRESTRICTED: &str =
    r"(\X:o^0 . X \/ <a> ~X) ((\Y:o^0 . Y \/ <b> ~Y) true)";

/// Negation inside the callee.
pub const NEGATION_AT_CALLEE: &str = r"(\F:(o^- -> o)^+ . mu X:o. F ~X) (\Y:o^- . ~<a> Y)";

pub const NEGATION_AT_CALLEE_NNF: &str =
    r"(\F:(o^+ -> o)^+ . mu X:o. F X) (\Y'bar:o^+ . [a] Y'bar)";

/// Negation at the call site.
pub const NEGATION_AT_CALLER: &str = r"(\F:(o^- -> o)^- . mu X:o. ~F X) (\Y:o^- . ~<a> Y)";

pub const NEGATION_AT_CALLER_NNF: &str =
    r"(\F'bar:(o^+ -> o)^+ . mu X:o. F'bar X) (\Y:o^+ . <a> Y)";

/// An unrestricted function using its argument both ways.
pub const EXCLUDED_MIDDLE_FUNCTION: &str = r"\X:o^0 . X /\ ~X";

pub const EXCLUDED_MIDDLE_FUNCTION_NNF: &str = r"\X:o^+ . \X'bar:o^+ . X /\ X'bar";

/// Three identity functions at different types; no two occurrences are
/// identical.
pub const THREE_IDENTITIES: &str =
    r"(\X:o^+ . X) (((\X:(o^+ -> o)^+ . X) (\Y:o^+ . Y)) true)";

/// Parses a corpus string. Corpus strings may use reserved names.
pub fn formula(src: &str) -> Formula {
    parse_with(src, &ParseOptions::internal())
        .unwrap_or_else(|e| panic!("corpus formula does not parse: {e}\n{src}"))
}

/// All closed ground well-typed corpus formulas.
pub fn closed_ground() -> Vec<(&'static str, Formula)> {
    [
        ("exponential_paths", EXPONENTIAL_PATHS),
        ("unrestricted_recursion", UNRESTRICTED_RECURSION),
        ("unrestricted_recursion_nnf", UNRESTRICTED_RECURSION_NNF),
        ("nested_unrestricted", NESTED_UNRESTRICTED),
        ("negation_at_callee", NEGATION_AT_CALLEE),
        ("negation_at_callee_nnf", NEGATION_AT_CALLEE_NNF),
        ("negation_at_caller", NEGATION_AT_CALLER),
        ("negation_at_caller_nnf", NEGATION_AT_CALLER_NNF),
        ("three_identities", THREE_IDENTITIES),
    ]
    .into_iter()
    .map(|(name, src)| (name, formula(src)))
    .collect()
}

/// `φ(0) = true`, `φ(k+1) = (\Y:o^0. Y \/ <a>~Y) φ(k)`.
pub fn nested_unrestricted(depth: usize) -> Formula {
    let step = Formula::lambda(
        "Y",
        HflType::Ground,
        Variance::Zero,
        Formula::or(
            Formula::var("Y"),
            Formula::diamond("a", Formula::neg(Formula::var("Y"))),
        ),
    );
    (0..depth).fold(Formula::Top, |acc, _| Formula::app(step.clone(), acc))
}

/// `(\Y1:o^0 ... \Yk:o^0. M) true ... true` with exactly `vars` variables,
/// where `M` is a seeded random Boolean and modal combination of the `Yi`
/// chosen so that the whole formula has roughly `size` nodes.
pub fn unrestricted_family(vars: usize, size: usize, seed: u64) -> Formula {
    assert!(vars > 0, "the family needs at least one variable");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let body_size = size.saturating_sub(3 * vars).max(1);
    let names: Vec<String> = (1..=vars).map(|i| format!("Y{i}")).collect();
    let body = random_body(&mut rng, &names, body_size);
    let abs = names.iter().rev().fold(body, |acc, y| {
        Formula::lambda(y.as_str(), HflType::Ground, Variance::Zero, acc)
    });
    Formula::apps(abs, std::iter::repeat_n(Formula::Top, vars))
}

fn random_body(rng: &mut ChaCha8Rng, names: &[String], size: usize) -> Formula {
    if size <= 1 {
        return Formula::var(names[rng.gen_range(0..names.len())].as_str());
    }
    if size == 2 || rng.gen_bool(0.3) {
        let a = random_body(rng, names, size - 1);
        return match rng.gen_range(0..3) {
            0 => Formula::neg(a),
            1 => Formula::diamond("a", a),
            _ => Formula::boxed("a", a),
        };
    }
    let left = rng.gen_range(1..size - 1);
    let a = random_body(rng, names, left);
    let b = random_body(rng, names, size - 1 - left);
    if rng.gen_bool(0.5) {
        Formula::or(a, b)
    } else {
        Formula::and(a, b)
    }
}
