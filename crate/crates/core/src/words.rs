//! Symbols, words, and the Fibonacci-family generators.
//!
//! A [`Symbol`] is an interned `u32`. Terminals reuse their Unicode scalar
//! value; nonterminals live above `char::MAX`, so the two kinds can never
//! collide. Terminals render as their character and nonterminals as `X1`,
//! `X2`, ... in id order.
//!
//! The generators [`fib_word`], [`p_word`] and [`q_word`] are memoized per
//! `(family, order, alphabet)` in a process-wide cache. Cache fills are
//! idempotent, so concurrent callers always observe the same words.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::Deref;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;

use crate::error::{Error, Result};

const NONTERMINAL_BASE: u32 = 0x0011_0000;

/// Default cap on generated word length.
pub const DEFAULT_LENGTH_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Terminal,
    Nonterminal,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u32);

impl Symbol {
    pub const fn terminal(c: char) -> Self {
        Symbol(c as u32)
    }

    /// Nonterminal with the given 1-based index. Index 0 is reserved.
    pub fn nonterminal(index: u32) -> Self {
        assert!(index >= 1, "nonterminal indices start at 1");
        Symbol(NONTERMINAL_BASE + index)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn kind(self) -> SymbolKind {
        if self.0 < NONTERMINAL_BASE {
            SymbolKind::Terminal
        } else {
            SymbolKind::Nonterminal
        }
    }

    pub fn is_terminal(self) -> bool {
        self.kind() == SymbolKind::Terminal
    }

    pub fn is_nonterminal(self) -> bool {
        self.kind() == SymbolKind::Nonterminal
    }

    pub fn as_char(self) -> Option<char> {
        if self.is_terminal() {
            char::from_u32(self.0)
        } else {
            None
        }
    }

    /// 1-based nonterminal index, `None` for terminals.
    pub fn nonterminal_index(self) -> Option<u32> {
        if self.is_nonterminal() {
            Some(self.0 - NONTERMINAL_BASE)
        } else {
            None
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            SymbolKind::Terminal => write!(f, "{}", self.as_char().unwrap_or('\u{fffd}')),
            SymbolKind::Nonterminal => write!(f, "X{}", self.0 - NONTERMINAL_BASE),
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<char> for Symbol {
    fn from(c: char) -> Self {
        Symbol::terminal(c)
    }
}

/// Immutable sequence of symbols. Cloning shares the backing buffer.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Arc<[Symbol]>);

impl Word {
    pub fn empty() -> Self {
        Word(Arc::from(Vec::new()))
    }

    pub fn from_symbols(symbols: impl Into<Vec<Symbol>>) -> Self {
        Word(Arc::from(symbols.into()))
    }

    /// Word of terminals, one per character of `s`.
    pub fn terminals(s: &str) -> Self {
        Word::from_symbols(s.chars().map(Symbol::terminal).collect::<Vec<_>>())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(self);
        v.extend_from_slice(other);
        Word::from_symbols(v)
    }

    /// Number of distinct symbols (σ_w).
    pub fn distinct_symbols(&self) -> usize {
        self.iter().collect::<HashSet<_>>().len()
    }

    /// Distinct symbols in order of first occurrence.
    pub fn alphabet(&self) -> Vec<Symbol> {
        let mut seen = HashSet::new();
        self.iter().copied().filter(|s| seen.insert(*s)).collect()
    }

    pub fn is_terminal_only(&self) -> bool {
        self.iter().all(|s| s.is_terminal())
    }

    /// 1-based inclusive substring `w[i..j]`; empty when `i > j`.
    pub fn substring(&self, i: usize, j: usize) -> Word {
        if i > j {
            return Word::empty();
        }
        Word::from_symbols(self[i - 1..j].to_vec())
    }
}

impl Deref for Word {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.iter() {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl From<&str> for Word {
    fn from(s: &str) -> Self {
        Word::terminals(s)
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word::from_symbols(v)
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Word::from_symbols(iter.into_iter().collect::<Vec<_>>())
    }
}

/// The ordered pair `(a, b)` written as a superscript on F, P, Q and the
/// morphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alphabet {
    first: Symbol,
    second: Symbol,
}

impl Alphabet {
    pub fn new(first: impl Into<Symbol>, second: impl Into<Symbol>) -> Result<Self> {
        let (first, second) = (first.into(), second.into());
        if first == second {
            return Err(Error::domain(format!(
                "ordered alphabet needs two distinct symbols, got ({first}, {second})"
            )));
        }
        Ok(Alphabet { first, second })
    }

    /// `(a, b)`.
    pub fn ab() -> Self {
        Alphabet {
            first: Symbol::terminal('a'),
            second: Symbol::terminal('b'),
        }
    }

    /// `(b, a)`.
    pub fn ba() -> Self {
        Alphabet::ab().swapped()
    }

    pub fn first(self) -> Symbol {
        self.first
    }

    pub fn second(self) -> Symbol {
        self.second
    }

    pub fn swapped(self) -> Self {
        Alphabet {
            first: self.second,
            second: self.first,
        }
    }
}

/// A total map from a domain of symbols to non-empty words.
///
/// `reverse_phi` morphisms act as the identity outside their single
/// rewritten symbol, so their domain is every symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    images: BTreeMap<Symbol, Word>,
    identity_elsewhere: bool,
}

impl Morphism {
    pub fn new(images: impl IntoIterator<Item = (Symbol, Word)>) -> Result<Self> {
        let images: BTreeMap<_, _> = images.into_iter().collect();
        if let Some((s, _)) = images.iter().find(|(_, w)| w.is_empty()) {
            return Err(Error::domain(format!("morphism image of {s} is empty")));
        }
        Ok(Morphism {
            images,
            identity_elsewhere: false,
        })
    }

    fn over(ab: Alphabet, first: &[Symbol], second: &[Symbol]) -> Self {
        Morphism {
            images: BTreeMap::from([
                (ab.first, Word::from_symbols(first.to_vec())),
                (ab.second, Word::from_symbols(second.to_vec())),
            ]),
            identity_elsewhere: false,
        }
    }

    /// φ: a ↦ ab, b ↦ a.
    pub fn phi(ab: Alphabet) -> Self {
        let (a, b) = (ab.first, ab.second);
        Morphism::over(ab, &[a, b], &[a])
    }

    /// π: a ↦ ab, b ↦ abb.
    pub fn pi(ab: Alphabet) -> Self {
        let (a, b) = (ab.first, ab.second);
        Morphism::over(ab, &[a, b], &[a, b, b])
    }

    /// θ: a ↦ aab, b ↦ ab.
    pub fn theta(ab: Alphabet) -> Self {
        let (a, b) = (ab.first, ab.second);
        Morphism::over(ab, &[a, a, b], &[a, b])
    }

    /// ψ_{x→y}: replaces every `x` by `y`, fixes every other symbol.
    pub fn reverse_phi(x: Symbol, y: Word) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::domain("reverse_phi replacement must be non-empty"));
        }
        Ok(Morphism {
            images: BTreeMap::from([(x, y)]),
            identity_elsewhere: true,
        })
    }

    pub fn image(&self, s: Symbol) -> Option<Word> {
        match self.images.get(&s) {
            Some(w) => Some(w.clone()),
            None if self.identity_elsewhere => Some(Word::from_symbols(vec![s])),
            None => None,
        }
    }

    pub fn apply(&self, w: &[Symbol]) -> Result<Word> {
        let mut out = Vec::with_capacity(w.len() * 2);
        for &s in w {
            match self.images.get(&s) {
                Some(img) => out.extend_from_slice(img),
                None if self.identity_elsewhere => out.push(s),
                None => {
                    return Err(Error::domain(format!("symbol {s} is outside the morphism domain")))
                }
            }
        }
        Ok(Word::from_symbols(out))
    }

    /// `self` applied `k` times.
    pub fn apply_n(&self, w: &[Symbol], k: usize) -> Result<Word> {
        let mut cur = Word::from_symbols(w.to_vec());
        for _ in 0..k {
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Phrase-wise application `λ(s_1, …, s_m) = (λ(s_1), …, λ(s_m))`.
    pub fn apply_each<'a>(&self, phrases: impl IntoIterator<Item = &'a [Symbol]>) -> Result<Vec<Word>> {
        phrases.into_iter().map(|p| self.apply(p)).collect()
    }
}

pub fn apply_morphism(m: &Morphism, w: &Word) -> Result<Word> {
    m.apply(w)
}

pub fn reverse_phi(x: Symbol, y: Word) -> Result<Morphism> {
    Morphism::reverse_phi(x, y)
}

/// Fibonacci number `f_i` with `f_1 = f_2 = 1`.
pub fn fib_number(i: u32) -> Result<BigUint> {
    if i < 1 {
        return Err(Error::domain("Fibonacci order must be at least 1"));
    }
    let (mut prev, mut cur) = (BigUint::from(0u32), BigUint::from(1u32));
    for _ in 1..i {
        let next = &prev + &cur;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

/// `f_i` when it fits in a `u64`.
pub fn fib_u64(i: u32) -> Option<u64> {
    if i < 1 {
        return None;
    }
    let (mut prev, mut cur) = (0u64, 1u64);
    for _ in 1..i {
        let next = prev.checked_add(cur)?;
        prev = cur;
        cur = next;
    }
    Some(cur)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    F,
    P,
    Q,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::F => "F",
            Family::P => "P",
            Family::Q => "Q",
        })
    }
}

impl Family {
    /// Length of the `i`-th member.
    pub fn length(self, i: u32) -> Option<u64> {
        match self {
            Family::F => fib_u64(i),
            Family::P => fib_u64((2 * i).checked_sub(1)?),
            Family::Q => fib_u64(2 * i),
        }
    }
}

type CacheKey = (Family, u32, Alphabet);

fn cache() -> &'static Mutex<HashMap<CacheKey, Word>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Word>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(key: CacheKey) -> Option<Word> {
    cache().lock().unwrap_or_else(|e| e.into_inner()).get(&key).cloned()
}

fn remember(key: CacheKey, w: &Word) {
    cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .entry(key)
        .or_insert_with(|| w.clone());
}

/// Word generator with a length cap.
#[derive(Debug, Clone, Copy)]
pub struct Generator {
    pub length_cap: u64,
}

impl Default for Generator {
    fn default() -> Self {
        Generator {
            length_cap: DEFAULT_LENGTH_CAP,
        }
    }
}

impl Generator {
    pub fn new(length_cap: u64) -> Self {
        Generator { length_cap }
    }

    fn check(&self, family: Family, i: u32) -> Result<()> {
        if i < 1 {
            return Err(Error::domain(format!("{family}_i needs order i >= 1")));
        }
        match family.length(i) {
            Some(len) if len <= self.length_cap => Ok(()),
            _ => Err(Error::resource(format!(
                "{family}_{i} is longer than the cap of {} symbols",
                self.length_cap
            ))),
        }
    }

    pub fn word(&self, family: Family, i: u32, ab: Alphabet) -> Result<Word> {
        match family {
            Family::F => self.fib_word(i, ab),
            Family::P => self.p_word(i, ab),
            Family::Q => self.q_word(i, ab),
        }
    }

    pub fn fib_word(&self, i: u32, ab: Alphabet) -> Result<Word> {
        self.check(Family::F, i)?;
        if let Some(w) = cached((Family::F, i, ab)) {
            return Ok(w);
        }
        let (mut older, mut newer) = (
            Word::from_symbols(vec![ab.second]),
            Word::from_symbols(vec![ab.first]),
        );
        if i == 1 {
            return Ok(older);
        }
        for _ in 3..=i {
            let next = newer.concat(&older);
            older = std::mem::replace(&mut newer, next);
        }
        remember((Family::F, i, ab), &newer);
        Ok(newer)
    }

    pub fn p_word(&self, i: u32, ab: Alphabet) -> Result<Word> {
        self.iterate(Family::P, Morphism::pi(ab), i, ab)
    }

    pub fn q_word(&self, i: u32, ab: Alphabet) -> Result<Word> {
        self.iterate(Family::Q, Morphism::theta(ab), i, ab)
    }

    fn iterate(&self, family: Family, m: Morphism, i: u32, ab: Alphabet) -> Result<Word> {
        self.check(family, i)?;
        if let Some(w) = cached((family, i, ab)) {
            return Ok(w);
        }
        let w = if i == 1 {
            Word::from_symbols(vec![ab.first])
        } else {
            m.apply(&self.iterate(family, m.clone(), i - 1, ab)?)?
        };
        remember((family, i, ab), &w);
        Ok(w)
    }
}

/// `F_i^{(a,b)}`: `F_1 = b`, `F_2 = a`, `F_i = F_{i-1} F_{i-2}`.
pub fn fib_word(i: u32, ab: Alphabet) -> Result<Word> {
    Generator::default().fib_word(i, ab)
}

/// `P_i^{(a,b)} = π^{i-1}(a)`.
pub fn p_word(i: u32, ab: Alphabet) -> Result<Word> {
    Generator::default().p_word(i, ab)
}

/// `Q_i^{(a,b)} = θ^{i-1}(a)`.
pub fn q_word(i: u32, ab: Alphabet) -> Result<Word> {
    Generator::default().q_word(i, ab)
}

/// Moves the last symbol to the front.
pub fn right_rotation(w: &Word) -> Result<Word> {
    let (last, rest) = w
        .split_last()
        .ok_or_else(|| Error::domain("right rotation of the empty word"))?;
    Ok(std::iter::once(*last).chain(rest.iter().copied()).collect())
}

pub fn reverse(w: &Word) -> Word {
    w.iter().rev().copied().collect()
}

/// Whether `w` becomes `target` under some bijective renaming of symbols.
pub fn isomorphic(w: &[Symbol], target: &[Symbol]) -> bool {
    if w.len() != target.len() {
        return false;
    }
    let mut fwd = HashMap::new();
    let mut back = HashMap::new();
    w.iter().zip(target).all(|(x, y)| {
        *fwd.entry(*x).or_insert(*y) == *y && *back.entry(*y).or_insert(*x) == *x
    })
}
