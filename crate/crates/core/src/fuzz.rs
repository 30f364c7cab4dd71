//! Type-directed random generation of closed ground formulas, the
//! invariant suite run on each of them, and a type-preserving shrinker.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::monotonize::{expand_env, expand_type, translate, Mode};
use crate::semantics::{
    enumerate_domain, enumerate_ltss, satisfying_states, Evaluator, Lts, SemanticsError,
    DEFAULT_BUDGET,
};
use crate::share::{nnf, nnf_unshared, share, unshare, ShareMode};
use crate::syntax::{Formula, HflType, Label, Path, VarName, Variance};
use crate::typing::{negate_env, typecheck, typecheck_closed, TypedFormula};

/// `tree_size(nnf(φ)) ≤ SIZE_BOUND · tree_size(φ) · (|vars(φ)| + 1)`.
pub const SIZE_BOUND: usize = 20;

const NEGATION_PROBABILITY: f64 = 0.3;
const LABELS: [&str; 2] = ["a", "b"];
// Domains are counted up to this size; larger ones only by a lower bound.
const COUNT_BUDGET: usize = 1 << 12;
// Candidate evaluations a single shrink may spend.
const SHRINK_ATTEMPTS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub count: usize,
    pub max_order: usize,
    pub max_size: usize,
    pub budget: usize,
    /// Whether to compare `φ` and `nnf(φ)` on enumerated systems.
    pub equivalence: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 1,
            count: 100,
            max_order: 1,
            max_size: 40,
            budget: DEFAULT_BUDGET,
            equivalence: true,
        }
    }
}

/// The properties checked on every case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Invariant {
    WellTyped,
    TypingPreservation,
    Pipeline,
    Nnf,
    SizeBound,
    ShareRoundTrip,
    TranslateIdentity,
    Equivalence,
    StepBound,
    Bisimulation,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::WellTyped => "well-typed",
            Invariant::TypingPreservation => "typing-preservation",
            Invariant::Pipeline => "pipeline",
            Invariant::Nnf => "nnf",
            Invariant::SizeBound => "size-bound",
            Invariant::ShareRoundTrip => "share-round-trip",
            Invariant::TranslateIdentity => "translate-identity",
            Invariant::Equivalence => "equivalence",
            Invariant::StepBound => "step-bound",
            Invariant::Bisimulation => "bisimulation",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckError {
    Violation { invariant: Invariant, detail: String },
    /// A semantic domain exceeded the budget; nothing was decided.
    Resource(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseStats {
    pub order: usize,
    pub size: usize,
    pub vars: usize,
    pub unshared_size: usize,
    pub nnf_size: usize,
    /// Transition systems on which `φ` and `nnf(φ)` were compared.
    pub systems: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok(CaseStats),
    Failed {
        invariant: Invariant,
        detail: String,
        shrunk: Formula,
    },
    Resource(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseReport {
    pub index: usize,
    pub formula: Formula,
    pub outcome: Outcome,
}

impl CaseReport {
    pub fn is_ok(&self) -> bool {
        matches!(self.outcome, Outcome::Ok(_))
    }
}

/// Order of a well-typed formula: the largest order among the types of its
/// subformulas.
pub fn formula_order(t: &TypedFormula) -> usize {
    t.occurrences().iter().map(|(_, s)| s.ty.order()).max().unwrap_or(0)
}

/// The random closed ground formula of case `index` under `seed`, of
/// order at most `max_order` and tree size at most `max_size`.
pub fn generate(seed: u64, index: usize, max_order: usize, max_size: usize) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let max_size = max_size.max(1);
    loop {
        let target = rng.gen_range(max_size.div_ceil(3)..=max_size);
        let mut gen = Generator { rng: &mut rng, max_order, fresh: 0 };
        let phi = gen.term(&Vec::new(), &HflType::Ground, target);
        if phi.tree_size() <= max_size {
            return phi;
        }
    }
}

type GenEnv = Vec<(VarName, Variance, HflType)>;

struct Generator<'r> {
    rng: &'r mut ChaCha8Rng,
    max_order: usize,
    fresh: usize,
}

fn min_size(ty: &HflType) -> usize {
    ty.spine().len() + 1
}

fn usable(v: Variance) -> bool {
    v != Variance::Minus
}

fn negated(env: &GenEnv) -> GenEnv {
    env.iter().map(|(x, v, t)| (x.clone(), -*v, t.clone())).collect()
}

// Environment in which an argument passed at variance `v` is typed. A
// variable usable under both Γ and ¬Γ must have variance 0.
fn argument_env(env: &GenEnv, v: Variance) -> GenEnv {
    match v {
        Variance::Plus => env.clone(),
        Variance::Minus => negated(env),
        Variance::Zero => env.iter().filter(|b| b.1 == Variance::Zero).cloned().collect(),
    }
}

// Argument types, variances and result of `ty` after `k` applications.
fn peel(ty: &HflType, k: usize) -> Option<(Vec<(HflType, Variance)>, &HflType)> {
    let mut args = Vec::new();
    let mut cur = ty;
    for _ in 0..k {
        let HflType::Arrow(a, v, r) = cur else { return None };
        args.push(((**a).clone(), *v));
        cur = r;
    }
    Some((args, cur))
}

impl Generator<'_> {
    fn name(&mut self, prefix: &str) -> VarName {
        self.fresh += 1;
        VarName::new(format!("{prefix}{}", self.fresh))
    }

    fn variance(&mut self) -> Variance {
        *Variance::ALL.choose(self.rng).expect("nonempty")
    }

    fn ty(&mut self, max_order: usize) -> HflType {
        if max_order == 0 || self.rng.gen_bool(0.4) {
            return HflType::Ground;
        }
        let arg = self.ty(max_order - 1);
        let v = self.variance();
        let res = if self.rng.gen_bool(0.7) {
            HflType::Ground
        } else {
            let arg2 = self.ty(max_order - 1);
            let v2 = self.variance();
            HflType::arrow(arg2, v2, HflType::Ground)
        };
        HflType::arrow(arg, v, res)
    }

    // Splits `total` into parts of at least the given minimums.
    fn split(&mut self, total: usize, mins: &[usize]) -> Vec<usize> {
        let mut parts = mins.to_vec();
        let spare = total.saturating_sub(mins.iter().sum());
        for _ in 0..spare {
            let i = self.rng.gen_range(0..parts.len());
            parts[i] += 1;
        }
        parts
    }

    fn leaf(&mut self, env: &GenEnv, ty: &HflType) -> Formula {
        let vars: Vec<&VarName> =
            env.iter().filter(|(_, v, t)| usable(*v) && t == ty).map(|b| &b.0).collect();
        if !vars.is_empty() && (!ty.is_ground() || self.rng.gen_bool(0.6)) {
            return Formula::Var((*vars.choose(self.rng).expect("nonempty")).clone());
        }
        match ty {
            HflType::Ground if self.rng.gen_bool(0.5) => Formula::Top,
            HflType::Ground => Formula::Bottom,
            HflType::Arrow(arg, v, res) => {
                let y = self.name("Y");
                let mut inner = env.clone();
                inner.push((y.clone(), *v, (**arg).clone()));
                let body = self.leaf(&inner, res);
                Formula::Lambda(y, (**arg).clone(), *v, Box::new(body))
            }
        }
    }

    fn term(&mut self, env: &GenEnv, ty: &HflType, size: usize) -> Formula {
        let min = min_size(ty);
        if size <= min {
            return self.leaf(env, ty);
        }
        if self.rng.gen_bool(NEGATION_PROBABILITY) {
            let inner = self.term(&negated(env), &ty.negate(), size - 1);
            return Formula::neg(inner);
        }
        let heads = self.heads(env, ty);
        // 0 leaf, 1 modal, 2 connective, 3 fixpoint, 4 λ, 5 redex, 6 variable head
        let mut weights = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        if ty.is_ground() {
            weights[1] = 3.0;
        } else {
            weights[4] = 6.0;
        }
        if size > 2 * min {
            weights[2] = 3.0;
        }
        if self.max_order >= 1 && size >= min + 3 {
            weights[5] = 2.0;
        }
        if !heads.is_empty() {
            weights[6] = 3.0;
        }
        let total: f64 = weights.iter().sum();
        let mut pick = self.rng.gen_range(0.0..total);
        let choice = weights
            .iter()
            .position(|w| {
                pick -= w;
                pick < 0.0
            })
            .unwrap_or(0);
        match choice {
            1 => {
                let l = Label::new(*LABELS.choose(self.rng).expect("nonempty"));
                let a = Box::new(self.term(env, ty, size - 1));
                if self.rng.gen_bool(0.5) {
                    Formula::Diamond(l, a)
                } else {
                    Formula::Box(l, a)
                }
            }
            2 => {
                let parts = self.split(size - 1, &[min, min]);
                let a = self.term(env, ty, parts[0]);
                let b = self.term(env, ty, parts[1]);
                if self.rng.gen_bool(0.5) {
                    Formula::or(a, b)
                } else {
                    Formula::and(a, b)
                }
            }
            3 => {
                let x = self.name("X");
                let mut inner = env.clone();
                inner.push((x.clone(), Variance::Plus, ty.clone()));
                let body = self.term(&inner, ty, size - 1);
                if self.rng.gen_bool(0.5) {
                    Formula::mu(x, ty.clone(), body)
                } else {
                    Formula::nu(x, ty.clone(), body)
                }
            }
            4 => {
                let HflType::Arrow(arg, v, res) = ty else { unreachable!("λ at arrow types only") };
                let y = self.name("Y");
                let mut inner = env.clone();
                inner.push((y.clone(), *v, (**arg).clone()));
                let body = self.term(&inner, res, size - 1);
                Formula::Lambda(y, (**arg).clone(), *v, Box::new(body))
            }
            5 => self.redex(env, ty, size),
            6 => {
                let (x, args) = heads.choose(self.rng).expect("nonempty").clone();
                let mins: Vec<usize> = args.iter().map(|(a, _)| min_size(a)).collect();
                let parts = self.split(size.saturating_sub(1 + args.len()), &mins);
                let mut f = Formula::Var(x);
                for ((a, v), s) in args.iter().zip(parts) {
                    let arg = self.term(&argument_env(env, *v), a, s);
                    f = Formula::app(f, arg);
                }
                f
            }
            _ => self.leaf(env, ty),
        }
    }

    // Usable variables whose type yields `ty` after one or more arguments.
    fn heads(&self, env: &GenEnv, ty: &HflType) -> Vec<(VarName, Vec<(HflType, Variance)>)> {
        let mut out = Vec::new();
        for (x, v, t) in env {
            if !usable(*v) {
                continue;
            }
            for k in 1..=t.spine().len() {
                if let Some((args, res)) = peel(t, k) {
                    if res == ty {
                        out.push((x.clone(), args));
                    }
                }
            }
        }
        out
    }

    // `(f ψ)` where `f` is a fresh term of an arrow type ending in `ty`.
    fn redex(&mut self, env: &GenEnv, ty: &HflType, size: usize) -> Formula {
        let arg_ty = self.ty(self.max_order - 1);
        let v = self.variance();
        let fty = HflType::arrow(arg_ty.clone(), v, ty.clone());
        if fty.order() > self.max_order {
            return self.leaf(env, ty);
        }
        let parts = self.split(size - 1, &[min_size(&fty), min_size(&arg_ty)]);
        let f = self.term(env, &fty, parts[0]);
        let a = self.term(&argument_env(env, v), &arg_ty, parts[1]);
        Formula::app(f, a)
    }
}

/// Runs the invariant suite with systems shared across cases.
pub struct Suite {
    config: FuzzConfig,
    // Equivalence systems for order ≤ 1 and for higher orders.
    low: Vec<Lts>,
    high: Vec<Lts>,
    // Systems whose states are duplicated in the bisimulation check.
    bisim_low: Vec<Lts>,
    bisim_high: Vec<Lts>,
}

fn labels(names: &[&str]) -> Vec<Label> {
    names.iter().map(|n| Label::new(*n)).collect()
}

fn violation(invariant: Invariant, detail: impl Into<String>) -> CheckError {
    CheckError::Violation { invariant, detail: detail.into() }
}

fn semantic(e: SemanticsError, invariant: Invariant) -> CheckError {
    match e {
        SemanticsError::BudgetExceeded { .. } => CheckError::Resource(e.to_string()),
        e => violation(invariant, e.to_string()),
    }
}

impl Suite {
    pub fn new(config: FuzzConfig) -> Suite {
        let (one, two) = (labels(&LABELS[..1]), labels(&LABELS));
        Suite {
            low: enumerate_ltss(3, &one).chain(enumerate_ltss(2, &two)).collect(),
            high: enumerate_ltss(2, &one).collect(),
            bisim_low: enumerate_ltss(2, &one).collect(),
            bisim_high: enumerate_ltss(1, &two).collect(),
            config,
        }
    }

    pub fn config(&self) -> &FuzzConfig {
        &self.config
    }

    /// Systems on which formulas of the given order are compared with
    /// their normal form.
    pub fn equivalence_systems(&self, order: usize) -> &[Lts] {
        if order <= 1 {
            &self.low
        } else {
            &self.high
        }
    }

    /// Generates, checks and, on failure, shrinks every case. Reports are
    /// in case order.
    pub fn run(&self) -> Vec<CaseReport> {
        (0..self.config.count).into_par_iter().map(|i| self.case(i)).collect()
    }

    pub fn case(&self, index: usize) -> CaseReport {
        let c = &self.config;
        let formula = generate(c.seed, index, c.max_order, c.max_size);
        let outcome = match self.check(&formula) {
            Ok(stats) => Outcome::Ok(stats),
            Err(CheckError::Resource(msg)) => Outcome::Resource(msg),
            Err(CheckError::Violation { invariant, detail }) => Outcome::Failed {
                invariant,
                detail,
                shrunk: self.shrink(&formula, invariant),
            },
        };
        CaseReport { index, formula, outcome }
    }

    /// All invariants on one closed ground formula.
    pub fn check(&self, phi: &Formula) -> Result<CaseStats, CheckError> {
        let t = typecheck_closed(phi).map_err(|e| violation(Invariant::WellTyped, e.to_string()))?;
        if !t.ty.is_ground() {
            return Err(violation(Invariant::WellTyped, format!("type {}", t.ty)));
        }
        check_typing_preservation(&t)?;
        let unshared = nnf_unshared(phi).map_err(|e| violation(Invariant::Pipeline, e.to_string()))?;
        let normal = nnf(phi).map_err(|e| violation(Invariant::Pipeline, e.to_string()))?;
        if !unshared.is_nnf() || !normal.is_nnf() {
            return Err(violation(Invariant::Nnf, normal.to_string()));
        }
        let vars = phi.vars().len();
        let bound = SIZE_BOUND * phi.tree_size() * (vars + 1);
        if normal.tree_size() > bound {
            return Err(violation(
                Invariant::SizeBound,
                format!("size {} above {bound}", normal.tree_size()),
            ));
        }
        check_round_trips(&t, &unshared, &normal)?;
        let order = formula_order(&t);
        let systems = if self.config.equivalence {
            self.check_equivalence(phi, &normal, order)?
        } else {
            0
        };
        self.check_bisimulation(phi, order)?;
        Ok(CaseStats {
            order,
            size: phi.tree_size(),
            vars,
            unshared_size: unshared.tree_size(),
            nnf_size: normal.tree_size(),
            systems,
        })
    }

    fn check_equivalence(&self, phi: &Formula, normal: &Formula, order: usize) -> Result<usize, CheckError> {
        let systems = self.equivalence_systems(order);
        let mut counts = HashMap::new();
        for lts in systems {
            let mut sets = [0; 2];
            for (set, f) in sets.iter_mut().zip([phi, normal]) {
                let ev = Evaluator::with_budget(lts, self.config.budget);
                *set = satisfying_states(&ev, f).map_err(|e| semantic(e, Invariant::Equivalence))?;
                check_steps(&ev, &mut counts)?;
            }
            if sets[0] != sets[1] {
                return Err(violation(
                    Invariant::Equivalence,
                    format!("states {:#b} vs {:#b} on\n{lts}", sets[0], sets[1]),
                ));
            }
        }
        Ok(systems.len())
    }

    fn check_bisimulation(&self, phi: &Formula, order: usize) -> Result<(), CheckError> {
        let systems = if order <= 1 { &self.bisim_low } else { &self.bisim_high };
        for lts in systems {
            let sat = |l: &Lts| {
                satisfying_states(&Evaluator::with_budget(l, self.config.budget), phi)
                    .map_err(|e| semantic(e, Invariant::Bisimulation))
            };
            let before = sat(lts)?;
            for s in 0..lts.num_states() {
                let dup = lts.duplicate_state(s).expect("small systems");
                let after = sat(&dup)?;
                let copy = after >> (dup.num_states() - 1) & 1;
                if after & lts.all() != before || copy != before >> s & 1 {
                    return Err(violation(
                        Invariant::Bisimulation,
                        format!("duplicating {} changes the verdict on\n{lts}", lts.state_name(s)),
                    ));
                }
            }
        }
        Ok(())
    }

    /// A smaller well-typed formula on which `invariant` still fails.
    pub fn shrink(&self, phi: &Formula, invariant: Invariant) -> Formula {
        shrink_by(phi, |f| {
            matches!(self.check(f), Err(CheckError::Violation { invariant: i, .. }) if i == invariant)
        })
    }
}

/// Greedily replaces subformulas of `phi` with constants of their type,
/// connectives with an operand and vacuous fixpoints with their body, while
/// the result stays closed, ground and `fails`.
pub fn shrink_by(phi: &Formula, fails: impl Fn(&Formula) -> bool) -> Formula {
    let mut best = phi.clone();
    let mut attempts = 0;
    'outer: while attempts < SHRINK_ATTEMPTS {
        for candidate in shrink_candidates(&best) {
            if candidate.tree_size() >= best.tree_size() {
                continue;
            }
            if !typecheck_closed(&candidate).is_ok_and(|t| t.ty.is_ground()) {
                continue;
            }
            attempts += 1;
            if fails(&candidate) {
                best = candidate;
                continue 'outer;
            }
            if attempts >= SHRINK_ATTEMPTS {
                break 'outer;
            }
        }
        break;
    }
    best
}

fn check_typing_preservation(t: &TypedFormula) -> Result<(), CheckError> {
    for (path, sub) in t.occurrences() {
        let ty = expand_type(&sub.ty);
        for mode in [Mode::Pos, Mode::Neg] {
            let env = match mode {
                Mode::Pos => sub.env.clone(),
                Mode::Neg => negate_env(&sub.env),
            };
            let fail = |msg: String| violation(Invariant::TypingPreservation, format!("at {path:?}: {msg}"));
            let out = translate(mode, sub).map_err(|e| fail(e.to_string()))?;
            let env = expand_env(&env).map_err(|e| fail(e.to_string()))?;
            let got = typecheck(&env, &out).map_err(|e| fail(format!("{out}: {e}")))?;
            if got.ty != ty {
                return Err(fail(format!("{out} has type {}, expected {ty}", got.ty)));
            }
        }
    }
    Ok(())
}

fn check_round_trips(t: &TypedFormula, unshared: &Formula, normal: &Formula) -> Result<(), CheckError> {
    let back = unshare(normal).map_err(|e| violation(Invariant::ShareRoundTrip, e.to_string()))?;
    if !back.alpha_eq(unshared) {
        return Err(violation(Invariant::ShareRoundTrip, format!("{back} differs from {unshared}")));
    }
    let general = share(t, ShareMode::UnsafeGeneral)
        .map_err(|e| violation(Invariant::ShareRoundTrip, e.to_string()))?;
    let back = unshare(&general).map_err(|e| violation(Invariant::ShareRoundTrip, e.to_string()))?;
    let phi = t.erase();
    if !back.alpha_eq(&phi) {
        return Err(violation(Invariant::ShareRoundTrip, format!("{back} differs from {phi}")));
    }
    let tu = typecheck_closed(unshared).map_err(|e| violation(Invariant::Pipeline, e.to_string()))?;
    let again = translate(Mode::Pos, &tu).map_err(|e| violation(Invariant::TranslateIdentity, e.to_string()))?;
    if !again.alpha_eq(unshared) {
        return Err(violation(Invariant::TranslateIdentity, format!("{again} differs from {unshared}")));
    }
    Ok(())
}

// Every fixpoint iteration of `ev` took at most |T⟦τ⟧| steps.
fn check_steps(ev: &Evaluator<'_>, counts: &mut HashMap<(usize, HflType), u128>) -> Result<(), CheckError> {
    for st in ev.stats() {
        let key = (ev.lts().num_states(), st.ty.clone());
        let card = *counts.entry(key).or_insert_with(|| {
            match enumerate_domain(ev.lts(), &st.ty, COUNT_BUDGET) {
                Ok(d) => d.len() as u128,
                Err(SemanticsError::BudgetExceeded { at_least, .. }) => at_least,
                Err(_) => 0,
            }
        });
        if st.steps as u128 > card {
            return Err(violation(
                Invariant::StepBound,
                format!("{} steps at {} with {card} elements", st.steps, st.ty),
            ));
        }
    }
    Ok(())
}

fn const_of(ty: &HflType, value: bool, avoid: &mut usize) -> Formula {
    match ty {
        HflType::Ground if value => Formula::Top,
        HflType::Ground => Formula::Bottom,
        HflType::Arrow(arg, v, res) => {
            *avoid += 1;
            let k = VarName::new(format!("K{avoid}"));
            Formula::Lambda(k, (**arg).clone(), *v, Box::new(const_of(res, value, avoid)))
        }
    }
}

fn replace_at(f: &Formula, path: &[usize], new: &Formula) -> Formula {
    let Some((&i, rest)) = path.split_first() else {
        return new.clone();
    };
    let r = |a: &Formula| Box::new(replace_at(a, rest, new));
    match (f, i) {
        (Formula::Or(a, b), 0) => Formula::Or(r(a), b.clone()),
        (Formula::Or(a, b), _) => Formula::Or(a.clone(), r(b)),
        (Formula::And(a, b), 0) => Formula::And(r(a), b.clone()),
        (Formula::And(a, b), _) => Formula::And(a.clone(), r(b)),
        (Formula::App(a, b), 0) => Formula::App(r(a), b.clone()),
        (Formula::App(a, b), _) => Formula::App(a.clone(), r(b)),
        (Formula::Neg(a), _) => Formula::Neg(r(a)),
        (Formula::Diamond(l, a), _) => Formula::Diamond(l.clone(), r(a)),
        (Formula::Box(l, a), _) => Formula::Box(l.clone(), r(a)),
        (Formula::Lambda(x, t, v, a), _) => Formula::Lambda(x.clone(), t.clone(), *v, r(a)),
        (Formula::Mu(x, t, a), _) => Formula::Mu(x.clone(), t.clone(), r(a)),
        (Formula::Nu(x, t, a), _) => Formula::Nu(x.clone(), t.clone(), r(a)),
        (leaf, _) => leaf.clone(),
    }
}

// Smaller variants of `phi`, largest reductions first: subformulas
// replaced by constants of their type, connectives by an operand, and
// fixpoints whose variable is unused by their body.
fn shrink_candidates(phi: &Formula) -> Vec<Formula> {
    let Ok(t) = typecheck_closed(phi) else {
        return Vec::new();
    };
    let mut fresh = phi
        .vars()
        .iter()
        .filter_map(|x| x.base().strip_prefix('K')?.parse::<usize>().ok())
        .max()
        .unwrap_or(0);
    let mut out: Vec<(usize, Formula)> = Vec::new();
    for (path, sub) in t.occurrences() {
        let f = sub.erase();
        let size = f.tree_size();
        let mut push = |p: &Path, g: Formula| out.push((size, replace_at(phi, p, &g)));
        for value in [false, true] {
            push(&path, const_of(&sub.ty, value, &mut fresh));
        }
        match &f {
            Formula::Or(a, b) | Formula::And(a, b) => {
                push(&path, (**a).clone());
                push(&path, (**b).clone());
            }
            Formula::Mu(x, _, body) | Formula::Nu(x, _, body) if !body.free_vars().contains(x) => {
                push(&path, (**body).clone());
            }
            _ => {}
        }
    }
    out.sort_by_key(|(size, _)| std::cmp::Reverse(*size));
    out.into_iter().map(|(_, f)| f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_and_bounded() {
        for i in 0..50 {
            let a = generate(9, i, 2, 30);
            assert_eq!(a, generate(9, i, 2, 30));
            assert!(a.tree_size() <= 30);
            let t = typecheck_closed(&a).unwrap_or_else(|e| panic!("{a}: {e}"));
            assert!(t.ty.is_ground());
            assert!(formula_order(&t) <= 2);
            a.check_no_masking().unwrap();
        }
        assert_ne!(generate(9, 0, 2, 30), generate(10, 0, 2, 30));
    }

    #[test]
    fn generator_covers_the_grammar() {
        let mut seen = [false; 6];
        for i in 0..300 {
            generate(3, i, 2, 40).visit(&mut |f| match f {
                Formula::Neg(_) => seen[0] = true,
                Formula::Lambda(_, _, Variance::Zero, _) => seen[1] = true,
                Formula::Lambda(_, _, Variance::Minus, _) => seen[2] = true,
                Formula::Mu(..) => seen[3] = true,
                Formula::Nu(..) => seen[4] = true,
                Formula::App(..) => seen[5] = true,
                _ => {}
            });
        }
        assert_eq!(seen, [true; 6]);
    }

    #[test]
    fn orders_are_respected() {
        for i in 0..100 {
            let t = typecheck_closed(&generate(4, i, 0, 30)).unwrap();
            assert_eq!(formula_order(&t), 0);
        }
    }

    #[test]
    fn small_run_passes() {
        let suite = Suite::new(FuzzConfig { count: 20, max_size: 25, ..FuzzConfig::default() });
        let reports = suite.run();
        assert_eq!(reports.len(), 20);
        for (i, r) in reports.iter().enumerate() {
            assert_eq!(r.index, i);
            assert!(r.is_ok(), "{}: {:?}", r.formula, r.outcome);
        }
    }

    #[test]
    fn shrinking_reaches_a_local_minimum() {
        let b = Label::new("b");
        let mentions_b = |f: &Formula| f.labels().contains(&b);
        for i in 0..20 {
            let phi = generate(2, i, 1, 40);
            if !mentions_b(&phi) {
                continue;
            }
            let small = shrink_by(&phi, mentions_b);
            assert!(mentions_b(&small) && small.tree_size() <= phi.tree_size());
            assert!(typecheck_closed(&small).unwrap().ty.is_ground());
            for c in shrink_candidates(&small) {
                let smaller = c.tree_size() < small.tree_size();
                let ground = typecheck_closed(&c).is_ok_and(|t| t.ty.is_ground());
                assert!(!(smaller && ground && mentions_b(&c)), "{small} shrinks to {c}");
            }
        }
    }

    #[test]
    fn constants_have_their_type() {
        let mut fresh = 0;
        let ty = crate::syntax::parse_type("(o^0 -> o)^- -> o").unwrap();
        let k = const_of(&ty, true, &mut fresh);
        assert_eq!(typecheck_closed(&k).unwrap().ty, ty);
    }

    #[test]
    fn shrinks_to_a_minimal_violation() {
        // a formula failing the well-typed check once the root is not ground
        let suite = Suite::new(FuzzConfig::default());
        let phi = crate::corpus::formula(crate::corpus::NEGATIVE_FIXPOINT);
        match suite.check(&phi) {
            Err(CheckError::Violation { invariant, .. }) => {
                assert_eq!(invariant, Invariant::WellTyped);
                // nothing smaller is well-typed and still ill-typed
                assert_eq!(suite.shrink(&phi, invariant), phi);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn replace_at_paths() {
        let f = crate::corpus::formula(r"<a> (true \/ X)");
        let g = replace_at(&f, &[0, 1], &Formula::Bottom);
        assert_eq!(g, crate::corpus::formula(r"<a> (true \/ false)"));
    }
}
