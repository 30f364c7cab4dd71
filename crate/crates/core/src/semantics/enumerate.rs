use super::Lts;
use crate::syntax::Label;

/// Transition relations with more bits than this are not enumerated.
pub const MAX_ENUMERATION_BITS: usize = 24;

/// Every LTS with 1 to `max_states` states over `labels`, one per
/// isomorphism class, in a deterministic order (by state count, then by
/// the smallest encoding of the transition relation). Panics when
/// `labels · max_states²` exceeds [`MAX_ENUMERATION_BITS`].
pub fn enumerate_ltss(max_states: usize, labels: &[Label]) -> impl Iterator<Item = Lts> + '_ {
    (1..=max_states).flat_map(move |n| {
        let bits = labels.len() * n * n;
        assert!(bits <= MAX_ENUMERATION_BITS, "too many transition systems to enumerate");
        let perms = permutations(n);
        (0..1u64 << bits)
            .filter(move |&code| perms.iter().all(|p| permute(code, p, n, labels.len()) >= code))
            .map(move |code| decode(code, n, labels))
    })
}

// Bit (l * n + s) * n + t encodes the transition (s, l, t).
fn permute(code: u64, p: &[usize], n: usize, labels: usize) -> u64 {
    let mut out = 0;
    for l in 0..labels {
        for s in 0..n {
            for t in 0..n {
                if code >> ((l * n + s) * n + t) & 1 == 1 {
                    out |= 1 << ((l * n + p[s]) * n + p[t]);
                }
            }
        }
    }
    out
}

fn decode(code: u64, n: usize, labels: &[Label]) -> Lts {
    let mut lts = Lts::new(n, labels.iter().cloned()).expect("small state count");
    for (l, label) in labels.iter().enumerate() {
        for s in 0..n {
            for t in 0..n {
                if code >> ((l * n + s) * n + t) & 1 == 1 {
                    lts.add_transition(s, label, t);
                }
            }
        }
    }
    lts
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}
