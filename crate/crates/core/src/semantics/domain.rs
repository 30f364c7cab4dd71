use std::collections::HashMap;
use std::sync::Arc;

use super::{Lts, SemanticsError};
use crate::syntax::{HflType, Variance};

/// Budget on the number of elements of an enumerated domain.
pub const DEFAULT_BUDGET: usize = 1_000_000;

// Above this size the order on a domain is not tabulated.
const LEQ_TABLE_LIMIT: usize = 2048;

/// An extensional semantic value: a state set at ground type, a table at
/// arrow types indexed by the enumerated argument domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemValue {
    Set(u64),
    Fun(Arc<[SemValue]>),
}

impl SemValue {
    pub fn as_set(&self) -> Option<u64> {
        match self {
            SemValue::Set(s) => Some(*s),
            SemValue::Fun(_) => None,
        }
    }

    pub fn entries(&self) -> Option<&[SemValue]> {
        match self {
            SemValue::Set(_) => None,
            SemValue::Fun(t) => Some(t),
        }
    }
}

fn mismatch() -> SemanticsError {
    SemanticsError::ShapeMismatch
}

/// Pointwise order.
pub fn leq(a: &SemValue, b: &SemValue) -> Result<bool, SemanticsError> {
    match (a, b) {
        (SemValue::Set(x), SemValue::Set(y)) => Ok(x & !y == 0),
        (SemValue::Fun(f), SemValue::Fun(g)) if f.len() == g.len() => {
            for (x, y) in f.iter().zip(g.iter()) {
                if !leq(x, y)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Err(mismatch()),
    }
}

fn pointwise(
    a: &SemValue,
    b: &SemValue,
    op: &impl Fn(u64, u64) -> u64,
) -> Result<SemValue, SemanticsError> {
    match (a, b) {
        (SemValue::Set(x), SemValue::Set(y)) => Ok(SemValue::Set(op(*x, *y))),
        (SemValue::Fun(f), SemValue::Fun(g)) if f.len() == g.len() => Ok(SemValue::Fun(
            f.iter()
                .zip(g.iter())
                .map(|(x, y)| pointwise(x, y, op))
                .collect::<Result<Arc<[_]>, _>>()?,
        )),
        _ => Err(mismatch()),
    }
}

pub fn join(a: &SemValue, b: &SemValue) -> Result<SemValue, SemanticsError> {
    pointwise(a, b, &|x, y| x | y)
}

pub fn meet(a: &SemValue, b: &SemValue) -> Result<SemValue, SemanticsError> {
    pointwise(a, b, &|x, y| x & y)
}

/// Pointwise complement relative to the states of `lts`.
pub fn complement(a: &SemValue, lts: &Lts) -> SemValue {
    match a {
        SemValue::Set(x) => SemValue::Set(!x & lts.all()),
        SemValue::Fun(f) => SemValue::Fun(f.iter().map(|x| complement(x, lts)).collect()),
    }
}

/// The elements of `T⟦τ⟧` for one LTS, in a fixed order that extends the
/// pointwise order (smaller elements come first).
#[derive(Debug)]
pub struct Domain {
    pub ty: HflType,
    elems: Vec<SemValue>,
    index: HashMap<SemValue, usize>,
}

impl Domain {
    fn new(ty: HflType, elems: Vec<SemValue>) -> Domain {
        let index = elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        Domain { ty, elems, index }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[SemValue] {
        &self.elems
    }

    pub fn index_of(&self, v: &SemValue) -> Option<usize> {
        self.index.get(v).copied()
    }
}

/// Domains per type for one LTS, built on demand.
pub(crate) struct DomainCache<'l> {
    lts: &'l Lts,
    budget: usize,
    domains: HashMap<HflType, Arc<Domain>>,
}

impl<'l> DomainCache<'l> {
    pub(crate) fn new(lts: &'l Lts, budget: usize) -> Self {
        DomainCache {
            lts,
            budget,
            domains: HashMap::new(),
        }
    }

    pub(crate) fn get(&mut self, ty: &HflType) -> Result<Arc<Domain>, SemanticsError> {
        if let Some(d) = self.domains.get(ty) {
            return Ok(d.clone());
        }
        let d = Arc::new(self.build(ty)?);
        self.domains.insert(ty.clone(), d.clone());
        Ok(d)
    }

    fn exceeded(&self, ty: &HflType, at_least: u128) -> SemanticsError {
        SemanticsError::BudgetExceeded {
            ty: ty.clone(),
            at_least,
            budget: self.budget,
        }
    }

    fn build(&mut self, ty: &HflType) -> Result<Domain, SemanticsError> {
        let (sigma, v, tau) = match ty {
            HflType::Ground => {
                let n = self.lts.num_states();
                let card = 1u128 << n;
                if card > self.budget as u128 {
                    return Err(self.exceeded(ty, card));
                }
                return Ok(Domain::new(ty.clone(), (0..card as u64).map(SemValue::Set).collect()));
            }
            HflType::Arrow(sigma, v, tau) => (sigma, *v, tau),
        };
        let dsig = self.get(sigma)?;
        let dtau = self.get(tau)?;
        let (m, k) = (dsig.len(), dtau.len());
        let mut tables: Vec<Vec<usize>> = Vec::new();
        if v == Variance::Zero {
            let card = (k as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
            if card > self.budget as u128 {
                return Err(self.exceeded(ty, card));
            }
            let mut cur = vec![0usize; m];
            loop {
                tables.push(cur.clone());
                let Some(pos) = (0..m).find(|&i| cur[i] + 1 < k) else {
                    break;
                };
                cur[pos] += 1;
                cur[..pos].iter_mut().for_each(|c| *c = 0);
            }
        } else {
            // A monotone or antitone map from a domain of m elements has at
            // least m + 1 possible values once k ≥ 2.
            if m > LEQ_TABLE_LIMIT || (k >= 2 && m as u128 + 1 > self.budget as u128) {
                return Err(self.exceeded(ty, m as u128 + 1));
            }
            let below: Vec<Vec<usize>> = (0..m)
                .map(|x| {
                    (0..x)
                        .filter(|&y| leq(&dsig.elems[y], &dsig.elems[x]).expect("same type"))
                        .collect()
                })
                .collect();
            let leq_tau = LeqOracle::new(&dtau);
            let mut cur = vec![0usize; m];
            self.backtrack(ty, v, 0, &below, &leq_tau, &mut cur, &mut tables)?;
        }
        let rank_sum = |t: &Vec<usize>| t.iter().map(|&r| r as u64).sum::<u64>();
        tables.sort_by_key(rank_sum);
        let elems = tables
            .into_iter()
            .map(|t| SemValue::Fun(t.into_iter().map(|r| dtau.elems[r].clone()).collect()))
            .collect();
        Ok(Domain::new(ty.clone(), elems))
    }

    #[allow(clippy::too_many_arguments)]
    fn backtrack(
        &self,
        ty: &HflType,
        v: Variance,
        x: usize,
        below: &[Vec<usize>],
        leq_tau: &LeqOracle<'_>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<(), SemanticsError> {
        if x == cur.len() {
            if out.len() == self.budget {
                return Err(self.exceeded(ty, self.budget as u128 + 1));
            }
            out.push(cur.clone());
            return Ok(());
        }
        for c in 0..leq_tau.len() {
            let ok = below[x].iter().all(|&y| match v {
                Variance::Plus => leq_tau.leq(cur[y], c),
                _ => leq_tau.leq(c, cur[y]),
            });
            if ok {
                cur[x] = c;
                self.backtrack(ty, v, x + 1, below, leq_tau, cur, out)?;
            }
        }
        Ok(())
    }
}

/// Order on the elements of one domain, tabulated when small.
struct LeqOracle<'d> {
    dom: &'d Domain,
    table: Option<Vec<bool>>,
}

impl<'d> LeqOracle<'d> {
    fn new(dom: &'d Domain) -> Self {
        let k = dom.len();
        let table = (k <= LEQ_TABLE_LIMIT).then(|| {
            let mut t = vec![false; k * k];
            for i in 0..k {
                for j in i..k {
                    t[i * k + j] = leq(&dom.elems[i], &dom.elems[j]).expect("same type");
                }
            }
            t
        });
        LeqOracle { dom, table }
    }

    fn len(&self) -> usize {
        self.dom.len()
    }

    fn leq(&self, i: usize, j: usize) -> bool {
        // elements are ordered by a linear extension
        if i > j {
            return false;
        }
        match &self.table {
            Some(t) => t[i * self.dom.len() + j],
            None => leq(&self.dom.elems[i], &self.dom.elems[j]).expect("same type"),
        }
    }
}

/// All elements of `T⟦τ⟧` for the LTS: every variance-respecting function
/// at arrow types, each exactly once.
pub fn enumerate_domain(lts: &Lts, ty: &HflType, budget: usize) -> Result<Arc<Domain>, SemanticsError> {
    DomainCache::new(lts, budget).get(ty)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o() -> HflType {
        HflType::Ground
    }

    fn one_state() -> Lts {
        Lts::new(1, []).unwrap()
    }

    fn count(lts: &Lts, ty: &HflType) -> usize {
        enumerate_domain(lts, ty, DEFAULT_BUDGET).unwrap().len()
    }

    // Independent count: filter all functions by the variance condition.
    fn brute_count(lts: &Lts, sigma: &HflType, v: Variance, tau: &HflType) -> usize {
        let ds = enumerate_domain(lts, sigma, DEFAULT_BUDGET).unwrap();
        let dt = enumerate_domain(lts, tau, DEFAULT_BUDGET).unwrap();
        let (m, k) = (ds.len(), dt.len());
        let mut n = 0;
        for code in 0..k.pow(m as u32) {
            let f: Vec<usize> = (0..m).map(|i| code / k.pow(i as u32) % k).collect();
            let ok = (0..m).all(|x| {
                (0..m).all(|y| {
                    !leq(&ds.elems()[x], &ds.elems()[y]).unwrap()
                        || match v {
                            Variance::Plus => leq(&dt.elems()[f[x]], &dt.elems()[f[y]]).unwrap(),
                            Variance::Minus => leq(&dt.elems()[f[y]], &dt.elems()[f[x]]).unwrap(),
                            Variance::Zero => true,
                        }
                })
            });
            n += ok as usize;
        }
        n
    }

    #[test]
    fn small_cardinalities() {
        let lts = one_state();
        assert_eq!(count(&lts, &o()), 2);
        assert_eq!(count(&lts, &HflType::arrow(o(), Variance::Zero, o())), 4);
        assert_eq!(count(&lts, &HflType::arrow(o(), Variance::Plus, o())), 3);
        assert_eq!(count(&lts, &HflType::arrow(o(), Variance::Minus, o())), 3);
    }

    #[test]
    fn cardinalities_match_brute_force() {
        let two = Lts::new(2, []).unwrap();
        let mono = HflType::arrow(o(), Variance::Plus, o());
        for lts in [one_state(), two] {
            for v in Variance::ALL {
                assert_eq!(
                    count(&lts, &HflType::arrow(o(), v, o())),
                    brute_count(&lts, &o(), v, &o())
                );
            }
        }
        let lts = one_state();
        for v in Variance::ALL {
            assert_eq!(
                count(&lts, &HflType::arrow(mono.clone(), v, o())),
                brute_count(&lts, &mono, v, &o())
            );
        }
    }

    #[test]
    fn order_is_a_linear_extension_without_duplicates() {
        let mono = HflType::arrow(o(), Variance::Plus, o());
        let cases = [
            (Lts::new(2, []).unwrap(), mono.clone()),
            (Lts::new(2, []).unwrap(), HflType::arrow(o(), Variance::Zero, o())),
            (one_state(), HflType::arrow(mono, Variance::Minus, o())),
        ];
        for (lts, ty) in cases {
            let d = enumerate_domain(&lts, &ty, DEFAULT_BUDGET).unwrap();
            let elems = d.elems();
            for i in 0..elems.len() {
                for j in 0..i {
                    assert_ne!(elems[i], elems[j]);
                    assert!(!leq(&elems[i], &elems[j]).unwrap());
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let lts = Lts::new(3, []).unwrap();
        let ty = HflType::arrow(o(), Variance::Zero, o());
        let e = enumerate_domain(&lts, &ty, 1000).unwrap_err();
        assert!(matches!(e, SemanticsError::BudgetExceeded { at_least, .. } if at_least == 1 << 24));
        let big = Lts::new(30, []).unwrap();
        assert!(enumerate_domain(&big, &o(), DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn pointwise_operations() {
        let lts = one_state();
        assert_eq!(complement(&SemValue::Set(0), &lts), SemValue::Set(1));
        let mono = enumerate_domain(&lts, &HflType::arrow(o(), Variance::Plus, o()), DEFAULT_BUDGET).unwrap();
        let anti = enumerate_domain(&lts, &HflType::arrow(o(), Variance::Minus, o()), DEFAULT_BUDGET).unwrap();
        let id = SemValue::Fun(Arc::from([SemValue::Set(0), SemValue::Set(1)]));
        assert!(mono.index_of(&id).is_some());
        let not = complement(&id, &lts);
        assert_eq!(not, SemValue::Fun(Arc::from([SemValue::Set(1), SemValue::Set(0)])));
        assert!(anti.index_of(&not).is_some());
        assert!(mono.index_of(&not).is_none());
        for f in mono.elems() {
            for g in mono.elems() {
                let j = join(f, g).unwrap();
                assert!(leq(f, &j).unwrap() && leq(g, &j).unwrap());
                let m = meet(f, g).unwrap();
                assert!(leq(&m, f).unwrap() && leq(&m, g).unwrap());
            }
        }
        assert!(leq(&SemValue::Set(0), &id).is_err());
    }
}
