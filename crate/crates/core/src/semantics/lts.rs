use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::syntax::Label;

/// States are limited so that state sets fit a machine word.
pub const MAX_STATES: usize = 64;

/// A finite labelled transition system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    state_names: Vec<String>,
    labels: Vec<Label>,
    label_index: HashMap<Label, usize>,
    /// `succ[l][s]` is the set of `l`-successors of `s`.
    succ: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LtsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("an LTS may have at most {MAX_STATES} states")]
    TooManyStates,
    #[error("unknown state `{0}`")]
    UnknownState(String),
}

impl Lts {
    /// States named `s0 .. s{n-1}`, no transitions.
    pub fn new(num_states: usize, labels: impl IntoIterator<Item = Label>) -> Result<Lts, LtsError> {
        if num_states > MAX_STATES {
            return Err(LtsError::TooManyStates);
        }
        let mut lts = Lts {
            state_names: (0..num_states).map(|i| format!("s{i}")).collect(),
            labels: Vec::new(),
            label_index: HashMap::new(),
            succ: Vec::new(),
        };
        for l in labels {
            lts.add_label(l);
        }
        Ok(lts)
    }

    /// Index of the label, added if new.
    pub fn add_label(&mut self, l: Label) -> usize {
        if let Some(&i) = self.label_index.get(&l) {
            return i;
        }
        self.labels.push(l.clone());
        self.label_index.insert(l, self.labels.len() - 1);
        self.succ.push(vec![0; self.state_names.len()]);
        self.labels.len() - 1
    }

    fn add_state(&mut self, name: String) -> Result<usize, LtsError> {
        if let Some(i) = self.state_index(&name) {
            return Ok(i);
        }
        if self.state_names.len() == MAX_STATES {
            return Err(LtsError::TooManyStates);
        }
        self.state_names.push(name);
        for row in &mut self.succ {
            row.push(0);
        }
        Ok(self.state_names.len() - 1)
    }

    pub fn add_transition(&mut self, src: usize, label: &Label, dst: usize) {
        assert!(src < self.num_states() && dst < self.num_states(), "state out of range");
        let l = self.add_label(label.clone());
        self.succ[l][src] |= 1 << dst;
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.state_names[s]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    /// Resolves a state given by name or, failing that, by index.
    pub fn resolve_state(&self, name: &str) -> Result<usize, LtsError> {
        self.state_index(name)
            .or_else(|| name.parse().ok().filter(|&i: &usize| i < self.num_states()))
            .ok_or_else(|| LtsError::UnknownState(name.to_string()))
    }

    /// The set of all states.
    pub fn all(&self) -> u64 {
        match self.num_states() {
            MAX_STATES => u64::MAX,
            n => (1u64 << n) - 1,
        }
    }

    /// `{s | some l-successor of s is in set}`.
    pub fn diamond(&self, label: &Label, set: u64) -> u64 {
        let Some(&l) = self.label_index.get(label) else {
            return 0;
        };
        self.succ[l]
            .iter()
            .enumerate()
            .filter(|(_, &succ)| succ & set != 0)
            .fold(0, |acc, (s, _)| acc | 1 << s)
    }

    /// `{s | every l-successor of s is in set}`.
    pub fn boxed(&self, label: &Label, set: u64) -> u64 {
        let Some(&l) = self.label_index.get(label) else {
            return self.all();
        };
        self.succ[l]
            .iter()
            .enumerate()
            .filter(|(_, &succ)| succ & !set == 0)
            .fold(0, |acc, (s, _)| acc | 1 << s)
    }

    pub fn successors(&self, s: usize, label: &Label) -> u64 {
        self.label_index.get(label).map_or(0, |&l| self.succ[l][s])
    }

    /// All transitions `(src, label, dst)`, by source, label index, target.
    pub fn transitions(&self) -> Vec<(usize, &Label, usize)> {
        let mut out = Vec::new();
        for s in 0..self.num_states() {
            for (l, label) in self.labels.iter().enumerate() {
                let succ = self.succ[l][s];
                out.extend((0..self.num_states()).filter(|t| succ >> t & 1 == 1).map(|t| (s, label, t)));
            }
        }
        out
    }

    /// Adds a copy of state `s` with the same incoming and outgoing
    /// transitions, bisimilar to `s`. The new state is the last one.
    pub fn duplicate_state(&self, s: usize) -> Result<Lts, LtsError> {
        let mut out = self.clone();
        let name = (0..)
            .map(|i| format!("{}_copy{i}", self.state_names[s]))
            .find(|n| self.state_index(n).is_none())
            .expect("infinitely many candidate names");
        let c = out.add_state(name)?;
        for (src, label, dst) in self.transitions() {
            let (src2, dst2) = (if src == s { c } else { src }, if dst == s { c } else { dst });
            out.add_transition(src2, label, dst);
            out.add_transition(src, label, dst2);
            out.add_transition(src2, label, dst2);
        }
        Ok(out)
    }

    /// Reads the line format `src label dst`, with optional
    /// `states s0 s1 ...` lines and `#` comments.
    pub fn parse(text: &str) -> Result<Lts, LtsError> {
        let mut lts = Lts::new(0, [])?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            if words[0] == "states" {
                for w in &words[1..] {
                    lts.add_state(w.to_string())?;
                }
                continue;
            }
            let [src, label, dst] = words[..] else {
                return Err(LtsError::Syntax {
                    line: i + 1,
                    message: format!("expected `src label dst`, found `{line}`"),
                });
            };
            let valid_label = label.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid_label {
                return Err(LtsError::Syntax {
                    line: i + 1,
                    message: format!("invalid label `{label}`"),
                });
            }
            let s = lts.add_state(src.to_string())?;
            let t = lts.add_state(dst.to_string())?;
            lts.add_transition(s, &Label::new(label), t);
        }
        Ok(lts)
    }

    /// A chain `s0 -l0-> s1 -l1-> ... -> sk` over the given labels.
    pub fn chain<'a>(labels: impl IntoIterator<Item = &'a str>) -> Lts {
        let labels: Vec<&str> = labels.into_iter().collect();
        let mut lts = Lts::new(labels.len() + 1, []).expect("chain fits the state limit");
        for (i, l) in labels.iter().enumerate() {
            lts.add_transition(i, &Label::new(*l), i + 1);
        }
        lts
    }

    /// Labels of the LTS together with the given ones.
    pub fn with_labels(&self, labels: &BTreeSet<Label>) -> Lts {
        let mut out = self.clone();
        for l in labels {
            out.add_label(l.clone());
        }
        out
    }
}

impl fmt::Display for Lts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "states")?;
        for n in &self.state_names {
            write!(f, " {n}")?;
        }
        writeln!(f)?;
        for (s, l, t) in self.transitions() {
            writeln!(f, "{} {l} {}", self.state_names[s], self.state_names[t])?;
        }
        Ok(())
    }
}
