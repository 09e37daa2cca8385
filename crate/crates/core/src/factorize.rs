//! LZ, C, semi-greedy and g-factorizations.
//!
//! Factorizations work on arbitrary symbol sequences, so words that carry
//! nonterminals after bigram replacement factorize exactly like terminal
//! words.
//!
//! * LZ: each phrase is the longest prefix of the remaining suffix that
//!   occurs wholly inside the phrases before it, or a fresh symbol. Sources
//!   never overlap the phrase. Computed online with a suffix automaton of
//!   the processed prefix.
//! * C: each phrase is the longest prefix that occurs twice in the prefix
//!   ending with the phrase, so sources may overlap. Computed from the
//!   longest-previous-factor array of a suffix array.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Symbol, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FactorizationKind {
    Lz,
    C,
    SemiGreedy,
    G,
}

/// An ordered partition of a word into non-empty phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    subject: Word,
    /// Exclusive 0-based end of every phrase; the last entry is `|w|`.
    ends: Vec<usize>,
    kind: FactorizationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationJson {
    pub phrases: Vec<String>,
}

impl Factorization {
    pub fn from_ends(subject: Word, ends: Vec<usize>, kind: FactorizationKind) -> Result<Self> {
        if subject.is_empty() {
            return Err(Error::domain("cannot factorize the empty word"));
        }
        let increasing = ends.windows(2).all(|w| w[0] < w[1]);
        if ends.first() == Some(&0) || !increasing || ends.last() != Some(&subject.len()) {
            return Err(Error::domain(format!(
                "phrase ends {ends:?} do not partition a word of length {}",
                subject.len()
            )));
        }
        Ok(Factorization {
            subject,
            ends,
            kind,
        })
    }

    /// Builds a factorization from phrase lengths.
    pub fn from_lengths(
        subject: Word,
        lengths: impl IntoIterator<Item = usize>,
        kind: FactorizationKind,
    ) -> Result<Self> {
        let mut acc = 0;
        let ends = lengths
            .into_iter()
            .map(|l| {
                acc += l;
                acc
            })
            .collect();
        Factorization::from_ends(subject, ends, kind)
    }

    pub fn subject(&self) -> &Word {
        &self.subject
    }

    pub fn kind(&self) -> FactorizationKind {
        self.kind
    }

    /// Number of phrases.
    pub fn len(&self) -> usize {
        self.ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ends.is_empty()
    }

    pub fn ends(&self) -> &[usize] {
        &self.ends
    }

    /// 0-based start of every phrase.
    pub fn starts(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(0).chain(self.ends[..self.ends.len() - 1].iter().copied())
    }

    /// Internal boundaries: a boundary `b` sits between `w[b-1]` and `w[b]`
    /// (0-based).
    pub fn boundaries(&self) -> &[usize] {
        &self.ends[..self.ends.len() - 1]
    }

    pub fn phrases(&self) -> impl Iterator<Item = &[Symbol]> + '_ {
        self.starts()
            .zip(self.ends.iter())
            .map(|(s, &e)| &self.subject[s..e])
    }

    pub fn phrase(&self, i: usize) -> Word {
        let start = if i == 0 { 0 } else { self.ends[i - 1] };
        Word::from_symbols(self.subject[start..self.ends[i]].to_vec())
    }

    pub fn phrase_words(&self) -> Vec<Word> {
        self.phrases().map(|p| Word::from_symbols(p.to_vec())).collect()
    }

    pub fn phrase_lengths(&self) -> Vec<usize> {
        self.starts().zip(&self.ends).map(|(s, &e)| e - s).collect()
    }

    /// `s_1|s_2|…|s_m`
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn to_json_value(&self) -> FactorizationJson {
        FactorizationJson {
            phrases: self
                .phrases()
                .map(|p| p.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("factorization JSON is serializable")
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.phrases().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for s in p {
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

/// Maps symbols to dense codes `0..σ` in order of first occurrence.
pub(crate) fn dense_codes(w: &[Symbol]) -> (Vec<u32>, usize) {
    let mut map: HashMap<Symbol, u32> = HashMap::new();
    let codes = w
        .iter()
        .map(|s| {
            let next = map.len() as u32;
            *map.entry(*s).or_insert(next)
        })
        .collect();
    (codes, map.len())
}

const NONE: u32 = u32::MAX;
const FLAT_SIGMA: usize = 8;

/// Online suffix automaton over dense codes with reusable buffers.
#[derive(Debug, Default)]
pub(crate) struct SuffixAutomaton {
    sigma: usize,
    flat: Vec<u32>,
    sparse: Vec<Vec<(u32, u32)>>,
    link: Vec<u32>,
    len: Vec<u32>,
    last: u32,
}

impl SuffixAutomaton {
    pub(crate) fn reset(&mut self, sigma: usize, capacity: usize) {
        self.sigma = sigma;
        self.flat.clear();
        self.sparse.clear();
        self.link.clear();
        self.len.clear();
        self.link.reserve(2 * capacity + 1);
        self.len.reserve(2 * capacity + 1);
        self.last = 0;
        self.new_state(0, NONE);
    }

    fn is_flat(&self) -> bool {
        self.sigma <= FLAT_SIGMA
    }

    fn new_state(&mut self, len: u32, link: u32) -> u32 {
        let id = self.len.len() as u32;
        self.len.push(len);
        self.link.push(link);
        if self.is_flat() {
            self.flat.extend(std::iter::repeat_n(NONE, self.sigma));
        } else {
            self.sparse.push(Vec::new());
        }
        id
    }

    #[inline]
    pub(crate) fn next(&self, state: u32, c: u32) -> u32 {
        if self.is_flat() {
            self.flat[state as usize * self.sigma + c as usize]
        } else {
            let row = &self.sparse[state as usize];
            match row.binary_search_by_key(&c, |&(k, _)| k) {
                Ok(i) => row[i].1,
                Err(_) => NONE,
            }
        }
    }

    fn set(&mut self, state: u32, c: u32, target: u32) {
        if self.is_flat() {
            self.flat[state as usize * self.sigma + c as usize] = target;
        } else {
            let row = &mut self.sparse[state as usize];
            match row.binary_search_by_key(&c, |&(k, _)| k) {
                Ok(i) => row[i].1 = target,
                Err(i) => row.insert(i, (c, target)),
            }
        }
    }

    fn copy_transitions(&mut self, from: u32, to: u32) {
        if self.is_flat() {
            let s = self.sigma;
            let (f, t) = (from as usize * s, to as usize * s);
            self.flat.copy_within(f..f + s, t);
        } else {
            self.sparse[to as usize] = self.sparse[from as usize].clone();
        }
    }

    pub(crate) fn extend(&mut self, c: u32) {
        let cur = self.new_state(self.len[self.last as usize] + 1, NONE);
        let mut p = self.last;
        while p != NONE && self.next(p, c) == NONE {
            self.set(p, c, cur);
            p = self.link[p as usize];
        }
        if p == NONE {
            self.link[cur as usize] = 0;
        } else {
            let q = self.next(p, c);
            if self.len[p as usize] + 1 == self.len[q as usize] {
                self.link[cur as usize] = q;
            } else {
                let clone = self.new_state(self.len[p as usize] + 1, self.link[q as usize]);
                self.copy_transitions(q, clone);
                while p != NONE && self.next(p, c) == q {
                    self.set(p, c, clone);
                    p = self.link[p as usize];
                }
                self.link[q as usize] = clone;
                self.link[cur as usize] = clone;
            }
        }
        self.last = cur;
    }
}

/// Reusable LZ parser; keeps its automaton buffers between calls.
#[derive(Debug, Default)]
pub struct LzParser {
    automaton: SuffixAutomaton,
    ends: Vec<usize>,
}

impl LzParser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Phrase ends of the LZ-factorization of a dense-coded word.
    pub(crate) fn parse_codes(&mut self, codes: &[u32], sigma: usize) -> &[usize] {
        self.automaton.reset(sigma.max(1), codes.len());
        self.ends.clear();
        let mut i = 0;
        while i < codes.len() {
            let mut state = 0u32;
            let mut l = 0;
            while i + l < codes.len() {
                let t = self.automaton.next(state, codes[i + l]);
                if t == NONE {
                    break;
                }
                state = t;
                l += 1;
            }
            let l = l.max(1);
            for &c in &codes[i..i + l] {
                self.automaton.extend(c);
            }
            i += l;
            self.ends.push(i);
        }
        &self.ends
    }

    /// z(w) for a dense-coded word.
    pub(crate) fn count_codes(&mut self, codes: &[u32], sigma: usize) -> usize {
        self.parse_codes(codes, sigma).len()
    }

    pub fn phrase_count(&mut self, w: &[Symbol]) -> usize {
        let (codes, sigma) = dense_codes(w);
        self.count_codes(&codes, sigma)
    }
}

pub fn lz_factorize(w: &Word) -> Result<Factorization> {
    if w.is_empty() {
        return Err(Error::domain("LZ-factorization of the empty word"));
    }
    let (codes, sigma) = dense_codes(w);
    let mut parser = LzParser::new();
    let ends = parser.parse_codes(&codes, sigma).to_vec();
    Factorization::from_ends(w.clone(), ends, FactorizationKind::Lz)
}

/// z(w), the size of the LZ-factorization.
pub fn z(w: &Word) -> Result<usize> {
    if w.is_empty() {
        return Err(Error::domain("z of the empty word"));
    }
    Ok(LzParser::new().phrase_count(w))
}

/// Suffix array by prefix doubling.
pub(crate) fn suffix_array(codes: &[u32]) -> Vec<usize> {
    let n = codes.len();
    let mut sa: Vec<usize> = (0..n).collect();
    let mut rank: Vec<u64> = codes.iter().map(|&c| c as u64).collect();
    let mut tmp = vec![0u64; n];
    let mut k = 1;
    loop {
        let key = |i: usize, rank: &[u64]| {
            let second = if i + k < n { rank[i + k] + 1 } else { 0 };
            (rank[i], second)
        };
        sa.sort_unstable_by_key(|&i| key(i, &rank));
        tmp[sa[0]] = 0;
        for j in 1..n {
            let bump = key(sa[j - 1], &rank) != key(sa[j], &rank);
            tmp[sa[j]] = tmp[sa[j - 1]] + bump as u64;
        }
        std::mem::swap(&mut rank, &mut tmp);
        if n == 0 || rank[sa[n - 1]] as usize == n - 1 {
            break;
        }
        k *= 2;
    }
    sa
}

/// Kasai: `lcp[r]` = lcp of suffixes `sa[r-1]` and `sa[r]`; `lcp[0] = 0`.
pub(crate) fn lcp_array(codes: &[u32], sa: &[usize]) -> Vec<usize> {
    let n = codes.len();
    let mut rank = vec![0; n];
    for (r, &i) in sa.iter().enumerate() {
        rank[i] = r;
    }
    let mut lcp = vec![0; n];
    let mut h = 0usize;
    for i in 0..n {
        if rank[i] > 0 {
            let j = sa[rank[i] - 1];
            while i + h < n && j + h < n && codes[i + h] == codes[j + h] {
                h += 1;
            }
            lcp[rank[i]] = h;
            h = h.saturating_sub(1);
        } else {
            h = 0;
        }
    }
    lcp
}

/// Longest previous factor: `lpf[i]` is the longest `l` such that
/// `w[i..i+l]` also starts at some `j < i` (overlap allowed).
///
/// Among suffixes starting before `i`, the best match is the nearest one
/// on either side of `i` in suffix-array order, so only the previous and
/// next smaller text positions need an lcp query.
pub(crate) fn longest_previous_factor(codes: &[u32]) -> Vec<usize> {
    let n = codes.len();
    if n == 0 {
        return Vec::new();
    }
    let sa = suffix_array(codes);
    let lcp = lcp_array(codes, &sa);
    let rmq = SparseMin::new(&lcp);
    let mut psv = vec![None; n];
    let mut nsv = vec![None; n];
    let mut stack: Vec<usize> = Vec::new();
    for r in 0..n {
        while let Some(&top) = stack.last() {
            if sa[top] > sa[r] {
                nsv[top] = Some(r);
                stack.pop();
            } else {
                break;
            }
        }
        psv[r] = stack.last().copied();
        stack.push(r);
    }
    let mut lpf = vec![0usize; n];
    for r in 0..n {
        let left = psv[r].map_or(0, |p| rmq.min(p + 1, r));
        let right = nsv[r].map_or(0, |q| rmq.min(r + 1, q));
        lpf[sa[r]] = left.max(right);
    }
    lpf
}

/// Range-minimum table over a fixed array.
struct SparseMin {
    levels: Vec<Vec<usize>>,
}

impl SparseMin {
    fn new(values: &[usize]) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().unwrap();
            let next = (0..=values.len() - 2 * width)
                .map(|i| prev[i].min(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        SparseMin { levels }
    }

    /// Minimum over the inclusive range `lo..=hi`.
    fn min(&self, lo: usize, hi: usize) -> usize {
        let k = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        self.levels[k][lo].min(self.levels[k][hi + 1 - (1 << k)])
    }
}

pub fn c_factorize(w: &Word) -> Result<Factorization> {
    if w.is_empty() {
        return Err(Error::domain("C-factorization of the empty word"));
    }
    let (codes, _) = dense_codes(w);
    let lpf = longest_previous_factor(&codes);
    let mut ends = Vec::new();
    let mut i = 0;
    while i < codes.len() {
        i += lpf[i].max(1);
        ends.push(i);
    }
    Factorization::from_ends(w.clone(), ends, FactorizationKind::C)
}

/// Semi-greedy factorization: every LZ boundary whose left phrase is
/// longer than one symbol moves one position to the left.
pub fn semi_greedy(w: &Word) -> Result<Factorization> {
    let lz = lz_factorize(w)?;
    Ok(semi_greedy_from_lz(&lz))
}

pub(crate) fn semi_greedy_from_lz(lz: &Factorization) -> Factorization {
    let n = lz.subject.len();
    let mut ends: Vec<usize> = lz
        .boundaries()
        .iter()
        .zip(lz.phrase_lengths())
        .map(|(&b, len)| if len > 1 { b - 1 } else { b })
        .collect();
    ends.push(n);
    Factorization {
        subject: lz.subject.clone(),
        ends,
        kind: FactorizationKind::SemiGreedy,
    }
}

/// `z(w) - 1 + σ_w`, a lower bound on the smallest grammar size.
pub fn grammar_lower_bound(w: &Word) -> Result<usize> {
    Ok(z(w)? - 1 + w.distinct_symbols())
}
