//! Slow reference oracle: breadth-first search over production sets.
//!
//! A state is the set of strings derivable so far. It starts as the
//! alphabet (one unary rule per symbol) and grows by one binary rule
//! `X → YZ` at a time, where `YZ` is a substring of `w` not yet derivable.
//! The first level whose state derives `w` gives the smallest size.

use std::collections::{BTreeSet, HashSet};

pub fn smallest_size(w: &str) -> usize {
    let chars: Vec<char> = w.chars().collect();
    let n = chars.len();
    assert!(n > 0);
    let substrings: HashSet<String> = (0..n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .map(|(i, j)| chars[i..j].iter().collect())
        .collect();
    let start: BTreeSet<String> = chars.iter().map(|c| c.to_string()).collect();
    if start.contains(w) {
        return 1;
    }
    let mut level = start.len();
    let mut frontier = vec![start];
    let mut seen: HashSet<BTreeSet<String>> = frontier.iter().cloned().collect();
    loop {
        level += 1;
        let mut next = Vec::new();
        for state in &frontier {
            for x in state {
                for y in state {
                    let xy = format!("{x}{y}");
                    if state.contains(&xy) || !substrings.contains(&xy) {
                        continue;
                    }
                    if xy == w {
                        return level;
                    }
                    let mut grown = state.clone();
                    grown.insert(xy);
                    if seen.insert(grown.clone()) {
                        next.push(grown);
                    }
                }
            }
        }
        assert!(!next.is_empty(), "search exhausted without deriving {w}");
        frontier = next;
    }
}

/// Every word of length `len` over the first `sigma` letters.
pub fn all_words(sigma: u8, len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| (0..sigma).map(move |c| format!("{p}{}", char::from(b'a' + c))))
            .collect();
    }
    out
}
