//! Workloads shared by the benchmarks.

use hflkit_core::corpus;
use hflkit_core::fuzz::generate;
use hflkit_core::{Formula, Lts};

/// Depths of the nested unrestricted family; the unshared translation
/// doubles with each level.
pub const NESTING_DEPTHS: [usize; 3] = [4, 8, 12];

/// Chain lengths for the exponential path formula.
pub const CHAIN_LENGTHS: [usize; 3] = [4, 8, 12];

pub fn nested(depth: usize) -> Formula {
    corpus::nested_unrestricted(depth)
}

/// Random formulas of the unrestricted family with the given tree size.
pub fn unrestricted(vars: usize, size: usize) -> Formula {
    corpus::unrestricted_family(vars, size, 0)
}

/// A fixed batch of random well-typed formulas.
pub fn fuzz_batch(count: usize, max_order: usize, max_size: usize) -> Vec<Formula> {
    (0..count).map(|i| generate(7, i, max_order, max_size)).collect()
}

/// `s0 -a-> ... -a-> sk -b-> sk+1`.
pub fn chain(k: usize) -> Lts {
    let mut word = vec!["a"; k];
    word.push("b");
    Lts::chain(word)
}

pub fn exponential_paths() -> Formula {
    corpus::formula(corpus::EXPONENTIAL_PATHS)
}
