//! Evaluation of typed formulas over a finite LTS.
//!
//! Function values stay symbolic (closures, partially applied fixed
//! points, pointwise Boolean combinations) until they are applied or
//! compared. A fixed point of arrow type is computed as a table over the
//! argument tuples it is actually queried at: each query adds its tuple and
//! re-solves the table by round-robin iteration from the bottom (`mu`) or
//! top (`nu`) of the lattice until no entry changes. Because the body is
//! monotone in the fixed point variable, the entries agree with the global
//! fixed point on every queried tuple.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use indexmap::IndexMap;

use super::domain::{Domain, DomainCache, SemValue, DEFAULT_BUDGET};
use super::{Lts, SemanticsError};
use crate::syntax::{HflType, VarName};
use crate::typing::{TypedFormula, TypedKind};

/// A valuation of free variables by extensional values.
pub type Valuation = HashMap<VarName, SemValue>;

/// Iteration statistics of one fixed point solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixStats {
    pub ty: HflType,
    pub greatest: bool,
    /// Argument tuples in the table.
    pub keys: usize,
    /// Rounds in which some entry changed.
    pub steps: usize,
    /// All rounds, including the final one confirming stability.
    pub rounds: usize,
}

#[derive(Clone)]
enum Val<'a> {
    Set(u64),
    Table {
        dom: Arc<Domain>,
        res: HflType,
        entries: Arc<[SemValue]>,
    },
    Closure {
        param: &'a VarName,
        body: &'a TypedFormula,
        env: Env<'a>,
    },
    Fix(Rc<FixPoint<'a>>, Rc<Vec<Val<'a>>>),
    Join(Rc<Val<'a>>, Rc<Val<'a>>),
    Meet(Rc<Val<'a>>, Rc<Val<'a>>),
    Not(Rc<Val<'a>>),
}

impl Val<'_> {
    fn set(&self) -> u64 {
        match self {
            Val::Set(s) => *s,
            _ => unreachable!("ground value expected"),
        }
    }
}

#[derive(Clone, Default)]
struct Env<'a>(Option<Rc<EnvNode<'a>>>);

struct EnvNode<'a> {
    name: &'a VarName,
    val: Val<'a>,
    next: Env<'a>,
}

impl<'a> Env<'a> {
    fn bind(&self, name: &'a VarName, val: Val<'a>) -> Env<'a> {
        Env(Some(Rc::new(EnvNode {
            name,
            val,
            next: self.clone(),
        })))
    }

    fn lookup(&self, x: &VarName) -> Option<&Val<'a>> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if node.name == x {
                return Some(&node.val);
            }
            cur = &node.next.0;
        }
        None
    }
}

struct FixPoint<'a> {
    var: &'a VarName,
    ty: &'a HflType,
    body: &'a TypedFormula,
    env: Env<'a>,
    greatest: bool,
    /// Argument types along the spine of `ty`.
    args: Vec<&'a HflType>,
    table: RefCell<IndexMap<Vec<SemValue>, u64>>,
    solving: Cell<bool>,
}

/// Evaluates formulas over one LTS, caching enumerated domains.
pub struct Evaluator<'l> {
    lts: &'l Lts,
    domains: RefCell<DomainCache<'l>>,
    stats: RefCell<Vec<FixStats>>,
}

impl<'l> Evaluator<'l> {
    pub fn new(lts: &'l Lts) -> Self {
        Self::with_budget(lts, DEFAULT_BUDGET)
    }

    pub fn with_budget(lts: &'l Lts, budget: usize) -> Self {
        Evaluator {
            lts,
            domains: RefCell::new(DomainCache::new(lts, budget)),
            stats: RefCell::new(Vec::new()),
        }
    }

    pub fn lts(&self) -> &'l Lts {
        self.lts
    }

    /// Statistics of every fixed point solve so far.
    pub fn stats(&self) -> Vec<FixStats> {
        self.stats.borrow().clone()
    }

    pub fn domain(&self, ty: &HflType) -> Result<Arc<Domain>, SemanticsError> {
        self.domains.borrow_mut().get(ty)
    }

    /// The value of `t` under `rho`, which must bind every variable of the
    /// root environment to a value of its declared type.
    pub fn eval(&self, rho: &Valuation, t: &TypedFormula) -> Result<SemValue, SemanticsError> {
        let mut env = Env::default();
        for b in &t.env {
            let v = rho
                .get(&b.name)
                .ok_or_else(|| SemanticsError::MissingVariable(b.name.clone()))?;
            env = env.bind(&b.name, self.lift_value(v, &b.ty)?);
        }
        let v = self.eval_in(t, &env)?;
        self.force(&v, &t.ty)
    }

    fn lift_value<'a>(&self, v: &SemValue, ty: &HflType) -> Result<Val<'a>, SemanticsError> {
        match (v, ty) {
            (SemValue::Set(s), HflType::Ground) => Ok(Val::Set(*s)),
            (SemValue::Fun(entries), HflType::Arrow(sigma, _, res)) => {
                let dom = self.domain(sigma)?;
                if dom.len() != entries.len() {
                    return Err(SemanticsError::ShapeMismatch);
                }
                Ok(Val::Table {
                    dom,
                    res: (**res).clone(),
                    entries: entries.clone(),
                })
            }
            _ => Err(SemanticsError::ShapeMismatch),
        }
    }

    fn force<'a>(&self, v: &Val<'a>, ty: &HflType) -> Result<SemValue, SemanticsError> {
        match ty {
            HflType::Ground => Ok(SemValue::Set(v.set())),
            HflType::Arrow(sigma, _, res) => {
                if let Val::Table { entries, .. } = v {
                    return Ok(SemValue::Fun(entries.clone()));
                }
                let dom = self.domain(sigma)?;
                let entries = dom
                    .elems()
                    .iter()
                    .map(|e| {
                        let arg = self.lift_value(e, sigma)?;
                        self.force(&self.apply(v, arg)?, res)
                    })
                    .collect::<Result<Arc<[_]>, _>>()?;
                Ok(SemValue::Fun(entries))
            }
        }
    }

    fn apply<'a>(&self, f: &Val<'a>, arg: Val<'a>) -> Result<Val<'a>, SemanticsError> {
        match f {
            Val::Closure { param, body, env } => self.eval_in(body, &env.bind(param, arg)),
            Val::Table { dom, res, entries } => {
                let key = self.force(&arg, &dom.ty)?;
                let i = dom.index_of(&key).ok_or(SemanticsError::ShapeMismatch)?;
                self.lift_value(&entries[i], res)
            }
            Val::Fix(fp, args) => {
                let mut args = (**args).clone();
                args.push(arg);
                self.saturate(fp.clone(), args)
            }
            Val::Join(a, b) => Ok(join(self.apply(a, arg.clone())?, self.apply(b, arg)?)),
            Val::Meet(a, b) => Ok(meet(self.apply(a, arg.clone())?, self.apply(b, arg)?)),
            Val::Not(a) => Ok(self.not(self.apply(a, arg)?)),
            Val::Set(_) => unreachable!("ground values are not applied"),
        }
    }

    fn not<'a>(&self, v: Val<'a>) -> Val<'a> {
        match v {
            Val::Set(s) => Val::Set(!s & self.lts.all()),
            v => Val::Not(Rc::new(v)),
        }
    }

    /// A fixed point value applied to `args`: a state set once all its
    /// arguments are present.
    fn saturate<'a>(&self, fp: Rc<FixPoint<'a>>, args: Vec<Val<'a>>) -> Result<Val<'a>, SemanticsError> {
        if args.len() < fp.args.len() {
            return Ok(Val::Fix(fp, Rc::new(args)));
        }
        let key = args
            .iter()
            .zip(&fp.args)
            .map(|(a, ty)| self.force(a, ty))
            .collect::<Result<Vec<_>, _>>()?;
        self.query(&fp, key).map(Val::Set)
    }

    fn query(&self, fp: &Rc<FixPoint<'_>>, key: Vec<SemValue>) -> Result<u64, SemanticsError> {
        let init = if fp.greatest { self.lts.all() } else { 0 };
        if let Some(&v) = fp.table.borrow().get(&key) {
            return Ok(v);
        }
        fp.table.borrow_mut().insert(key.clone(), init);
        if fp.solving.get() {
            return Ok(init);
        }
        self.solve(fp)?;
        Ok(fp.table.borrow()[&key])
    }

    fn solve(&self, fp: &Rc<FixPoint<'_>>) -> Result<(), SemanticsError> {
        fp.solving.set(true);
        let result = self.iterate(fp);
        fp.solving.set(false);
        let (rounds, steps) = result?;
        let keys = fp.table.borrow().len();
        let n = self.lts.num_states();
        assert!(
            steps <= keys * n.max(1),
            "fixed point iteration exceeded the lattice height"
        );
        self.stats.borrow_mut().push(FixStats {
            ty: fp.ty.clone(),
            greatest: fp.greatest,
            keys,
            steps,
            rounds,
        });
        Ok(())
    }

    fn iterate(&self, fp: &Rc<FixPoint<'_>>) -> Result<(usize, usize), SemanticsError> {
        let (mut rounds, mut steps) = (0, 0);
        loop {
            rounds += 1;
            let mut changed = false;
            let mut i = 0;
            while i < fp.table.borrow().len() {
                let (key, old) = {
                    let table = fp.table.borrow();
                    let (k, v) = table.get_index(i).expect("index in range");
                    (k.clone(), *v)
                };
                let new = self.unfold(fp, &key)?;
                if new != old {
                    fp.table.borrow_mut()[i] = new;
                    changed = true;
                }
                i += 1;
            }
            if !changed {
                return Ok((rounds, steps));
            }
            steps += 1;
        }
    }

    /// One unfolding of the body at an argument tuple.
    fn unfold<'a>(&self, fp: &Rc<FixPoint<'a>>, key: &[SemValue]) -> Result<u64, SemanticsError> {
        let env = fp.env.bind(fp.var, Val::Fix(fp.clone(), Rc::new(Vec::new())));
        let mut v = self.eval_in(fp.body, &env)?;
        for (k, ty) in key.iter().zip(&fp.args) {
            let arg = self.lift_value(k, ty)?;
            v = self.apply(&v, arg)?;
        }
        Ok(v.set())
    }

    fn eval_in<'a>(&self, t: &'a TypedFormula, env: &Env<'a>) -> Result<Val<'a>, SemanticsError> {
        Ok(match &t.kind {
            TypedKind::Top => Val::Set(self.lts.all()),
            TypedKind::Bottom => Val::Set(0),
            TypedKind::Var(x) => match env.lookup(x) {
                Some(Val::Fix(fp, args)) if args.len() == fp.args.len() => {
                    self.saturate(fp.clone(), (**args).clone())?
                }
                Some(v) => v.clone(),
                None => return Err(SemanticsError::MissingVariable(x.clone())),
            },
            TypedKind::Or(a, b) => join(self.eval_in(a, env)?, self.eval_in(b, env)?),
            TypedKind::And(a, b) => meet(self.eval_in(a, env)?, self.eval_in(b, env)?),
            TypedKind::Neg(a) => self.not(self.eval_in(a, env)?),
            TypedKind::Diamond(l, a) => Val::Set(self.lts.diamond(l, self.eval_in(a, env)?.set())),
            TypedKind::Box(l, a) => Val::Set(self.lts.boxed(l, self.eval_in(a, env)?.set())),
            TypedKind::Lambda(x, _, _, body) => Val::Closure {
                param: x,
                body,
                env: env.clone(),
            },
            TypedKind::App(f, a) => {
                let fv = self.eval_in(f, env)?;
                let av = self.eval_in(a, env)?;
                self.apply(&fv, av)?
            }
            TypedKind::Mu(x, ty, body) | TypedKind::Nu(x, ty, body) => {
                let fp = Rc::new(FixPoint {
                    var: x,
                    ty,
                    body,
                    env: env.clone(),
                    greatest: matches!(t.kind, TypedKind::Nu(..)),
                    args: ty.spine().into_iter().map(|(a, _)| a).collect(),
                    table: RefCell::new(IndexMap::new()),
                    solving: Cell::new(false),
                });
                self.saturate(fp, Vec::new())?
            }
        })
    }
}

fn join<'a>(a: Val<'a>, b: Val<'a>) -> Val<'a> {
    match (a, b) {
        (Val::Set(x), Val::Set(y)) => Val::Set(x | y),
        (a, b) => Val::Join(Rc::new(a), Rc::new(b)),
    }
}

fn meet<'a>(a: Val<'a>, b: Val<'a>) -> Val<'a> {
    match (a, b) {
        (Val::Set(x), Val::Set(y)) => Val::Set(x & y),
        (a, b) => Val::Meet(Rc::new(a), Rc::new(b)),
    }
}

/// Evaluates with the default domain budget.
pub fn eval(lts: &Lts, rho: &Valuation, t: &TypedFormula) -> Result<SemValue, SemanticsError> {
    Evaluator::new(lts).eval(rho, t)
}
