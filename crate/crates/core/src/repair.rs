//! RePair with pluggable tie-breaking, exhaustive enumeration of every
//! RePair grammar, and the F/P/Q strategy graph.
//!
//! Words handed to the replacement stage keep their terminals in place:
//! a terminal stands for its unary nonterminal until the grammar is read
//! off the trace, which is also how replacements are written in the
//! literature (`ab` in `F_i` becomes `X`, giving `F_{i-1}^{(X,a)}`).

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::hash::Hash;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::grammar::{Grammar, Production};
use crate::words::{fib_word, p_word, q_word, isomorphic, Alphabet, Family, Symbol, Word};

pub type Bigram = (Symbol, Symbol);

/// Non-overlapping count and first position of every bigram, computed
/// run by run: a run of `r` equal symbols holds `⌊r/2⌋` disjoint `xx`.
fn bigram_table<T: Copy + Eq + Hash>(w: &[T]) -> HashMap<(T, T), (usize, usize)> {
    let mut table: HashMap<(T, T), (usize, usize)> = HashMap::new();
    let mut i = 0;
    while i < w.len() {
        let x = w[i];
        let mut j = i + 1;
        while j < w.len() && w[j] == x {
            j += 1;
        }
        let run = j - i;
        if run >= 2 {
            table.entry((x, x)).or_insert((0, i)).0 += run / 2;
        }
        if j < w.len() {
            table.entry((x, w[j])).or_insert((0, j - 1)).0 += 1;
        }
        i = j;
    }
    table
}

type Positioned<T> = ((T, T), usize);

/// Most frequent bigrams with their first positions, in scan order.
fn most_frequent<T: Copy + Eq + Hash>(w: &[T]) -> (usize, Vec<Positioned<T>>) {
    let table = bigram_table(w);
    let max = table.values().map(|&(c, _)| c).max().unwrap_or(0);
    let mut best: Vec<_> = table
        .into_iter()
        .filter(|&(_, (c, _))| c == max)
        .map(|(b, (_, pos))| (b, pos))
        .collect();
    best.sort_by_key(|&(_, pos)| pos);
    (max, best)
}

fn replace_pairs<T: Copy + Eq>(w: &[T], (x, y): (T, T), fresh: T) -> Vec<T> {
    let mut out = Vec::with_capacity(w.len());
    let mut i = 0;
    while i < w.len() {
        if i + 1 < w.len() && w[i] == x && w[i + 1] == y {
            out.push(fresh);
            i += 2;
        } else {
            out.push(w[i]);
            i += 1;
        }
    }
    out
}

/// Maximum number of pairwise non-overlapping occurrences of `bigram`.
pub fn count_nonoverlapping(w: &[Symbol], bigram: Bigram) -> Result<usize> {
    if w.len() < 2 {
        return Err(Error::domain("bigram counts need a word of length >= 2"));
    }
    Ok(bigram_table(w).get(&bigram).map_or(0, |&(c, _)| c))
}

/// Every bigram attaining the maximum non-overlapping count, ordered by
/// first occurrence.
pub fn most_frequent_bigrams(w: &[Symbol]) -> Result<Vec<Bigram>> {
    if w.len() < 2 {
        return Err(Error::domain("bigram counts need a word of length >= 2"));
    }
    Ok(most_frequent(w).1.into_iter().map(|(b, _)| b).collect())
}

/// Left-to-right greedy replacement of every non-overlapping occurrence.
pub fn replace_all(w: &[Symbol], bigram: Bigram, fresh: Symbol) -> Result<Word> {
    if w.contains(&fresh) {
        return Err(Error::domain(format!("fresh symbol {fresh} already occurs in the word")));
    }
    Ok(Word::from_symbols(replace_pairs(w, bigram, fresh)))
}

/// A most-frequent bigram together with where it first occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub bigram: Bigram,
    pub first_position: usize,
}

/// Selects one bigram among the equally most frequent ones.
pub trait TieBreak {
    fn choose(&self, word: &[Symbol], candidates: &[Candidate]) -> Bigram;

    fn name(&self) -> &str;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// The candidate whose leftmost occurrence comes first.
    FirstByScan,
    /// The candidate with the smallest `(left id, right id)`.
    Lexicographic,
}

impl Policy {
    pub const ALL: [Policy; 2] = [Policy::FirstByScan, Policy::Lexicographic];
}

impl TieBreak for Policy {
    fn choose(&self, _word: &[Symbol], candidates: &[Candidate]) -> Bigram {
        match self {
            Policy::FirstByScan => candidates
                .iter()
                .min_by_key(|c| c.first_position)
                .expect("at least one candidate")
                .bigram,
            Policy::Lexicographic => candidates
                .iter()
                .map(|c| c.bigram)
                .min_by_key(|(x, y)| (x.id(), y.id()))
                .expect("at least one candidate"),
        }
    }

    fn name(&self) -> &str {
        match self {
            Policy::FirstByScan => "first",
            Policy::Lexicographic => "lex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplacementStep {
    pub bigram: Bigram,
    pub fresh: Symbol,
    pub before: Word,
    pub after: Word,
}

/// Final-stage bracketing of the remaining sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bracketing {
    Symbol(Symbol),
    Pair(Box<Bracketing>, Box<Bracketing>),
}

impl Bracketing {
    /// `((s1 s2) s3) …`
    pub fn left_fold(seq: &[Symbol]) -> Bracketing {
        let mut it = seq.iter();
        let mut acc = Bracketing::Symbol(*it.next().expect("non-empty sequence"));
        for &s in it {
            acc = Bracketing::Pair(Box::new(acc), Box::new(Bracketing::Symbol(s)));
        }
        acc
    }
}

impl fmt::Display for Bracketing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bracketing::Symbol(s) => write!(f, "{s}"),
            Bracketing::Pair(l, r) => write!(f, "({l}{r})"),
        }
    }
}

/// Everything RePair did to one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplacementTrace {
    pub input: Word,
    pub steps: Vec<ReplacementStep>,
    pub final_sequence: Word,
    pub bracketing: Bracketing,
}

impl ReplacementTrace {
    /// Reads the grammar off the trace: one unary rule per input terminal,
    /// one binary rule per step, one per internal node of the bracketing.
    pub fn to_grammar(&self) -> Result<Grammar> {
        let terminals = self.input.alphabet();
        if terminals.iter().any(|t| t.is_nonterminal()) {
            return Err(Error::domain("RePair input must consist of terminals"));
        }
        let mut next = self
            .steps
            .iter()
            .filter_map(|s| s.fresh.nonterminal_index())
            .chain([terminals.len() as u32])
            .max()
            .unwrap_or(0);
        let unary: HashMap<Symbol, Symbol> = terminals
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, Symbol::nonterminal(i as u32 + 1)))
            .collect();
        let lift = |s: Symbol| unary.get(&s).copied().unwrap_or(s);
        let mut productions: Vec<Production> = terminals
            .iter()
            .map(|&t| Production::terminal(unary[&t], t))
            .collect();
        for step in &self.steps {
            productions.push(Production::pair(step.fresh, lift(step.bigram.0), lift(step.bigram.1)));
        }
        fn emit(
            b: &Bracketing,
            lift: &dyn Fn(Symbol) -> Symbol,
            next: &mut u32,
            out: &mut Vec<Production>,
        ) -> Symbol {
            match b {
                Bracketing::Symbol(s) => lift(*s),
                Bracketing::Pair(l, r) => {
                    let l = emit(l, lift, next, out);
                    let r = emit(r, lift, next, out);
                    *next += 1;
                    let lhs = Symbol::nonterminal(*next);
                    out.push(Production::pair(lhs, l, r));
                    lhs
                }
            }
        }
        let start = emit(&self.bracketing, &lift, &mut next, &mut productions);
        Ok(Grammar::new(productions, start))
    }

    /// One line per step, `<before> --[XY→Z]--> <after>`, then the final
    /// bracketing.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{} --[{}{}→{}]--> {}",
                s.before, s.bigram.0, s.bigram.1, s.fresh, s.after
            );
        }
        let _ = writeln!(out, "final {} => {}", self.final_sequence, self.bracketing);
        out
    }
}

#[derive(Debug, Clone)]
pub struct RepairOutput {
    pub grammar: Grammar,
    pub trace: ReplacementTrace,
}

/// RePair with a deterministic tie-break and a left-fold final stage.
pub fn repair(w: &Word, tb: &dyn TieBreak) -> Result<RepairOutput> {
    if w.is_empty() {
        return Err(Error::domain("RePair needs a non-empty word"));
    }
    if !w.is_terminal_only() {
        return Err(Error::domain("RePair input must consist of terminals"));
    }
    let mut next = w.distinct_symbols() as u32;
    let mut cur = w.clone();
    let mut steps = Vec::new();
    loop {
        let (max, best) = most_frequent(&cur);
        if max < 2 {
            break;
        }
        let candidates: Vec<Candidate> = best
            .into_iter()
            .map(|(bigram, first_position)| Candidate {
                bigram,
                first_position,
            })
            .collect();
        let bigram = tb.choose(&cur, &candidates);
        next += 1;
        let fresh = Symbol::nonterminal(next);
        let after = Word::from_symbols(replace_pairs(&cur, bigram, fresh));
        steps.push(ReplacementStep {
            bigram,
            fresh,
            before: cur,
            after: after.clone(),
        });
        cur = after;
    }
    let trace = ReplacementTrace {
        input: w.clone(),
        bracketing: Bracketing::left_fold(&cur),
        final_sequence: cur,
        steps,
    };
    Ok(RepairOutput {
        grammar: trace.to_grammar()?,
        trace,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RepairLimits {
    /// Longest input accepted.
    pub max_len: usize,
    /// Most grammars a single enumeration may produce.
    pub max_grammars: usize,
}

impl Default for RepairLimits {
    fn default() -> Self {
        RepairLimits {
            max_len: 100_000,
            max_grammars: 100_000,
        }
    }
}

/// Hash-consed derivation-tree shapes. Two symbols get the same id exactly
/// when they derive identical trees.
#[derive(Debug, Default)]
pub(crate) struct Interner {
    nodes: Vec<Shape>,
    ids: HashMap<Shape, u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Shape {
    Leaf(Symbol),
    Pair(u32, u32),
}

impl Interner {
    pub(crate) fn intern(&mut self, s: Shape) -> u32 {
        if let Some(&id) = self.ids.get(&s) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(s);
        self.ids.insert(s, id);
        id
    }

    /// Grammar rooted at `root`, nonterminals numbered in post-order.
    pub(crate) fn grammar(&self, root: u32) -> Grammar {
        let mut number: HashMap<u32, Symbol> = HashMap::new();
        let mut productions = Vec::new();
        let mut stack = vec![(root, false)];
        while let Some((v, done)) = stack.pop() {
            if number.contains_key(&v) {
                continue;
            }
            match (self.nodes[v as usize], done) {
                (Shape::Pair(l, r), false) => {
                    stack.push((v, true));
                    stack.push((r, false));
                    stack.push((l, false));
                }
                (shape, _) => {
                    let lhs = Symbol::nonterminal(number.len() as u32 + 1);
                    number.insert(v, lhs);
                    productions.push(match shape {
                        Shape::Leaf(c) => Production::terminal(lhs, c),
                        Shape::Pair(l, r) => Production::pair(lhs, number[&l], number[&r]),
                    });
                }
            }
        }
        Grammar::new(productions, number[&root])
    }

    /// Renders a state word: terminal leaves as themselves, everything else
    /// as `X<id+1>`.
    fn render(&self, w: &[u32]) -> Word {
        w.iter()
            .map(|&id| match self.nodes[id as usize] {
                Shape::Leaf(c) => c,
                Shape::Pair(..) => Symbol::nonterminal(id + 1),
            })
            .collect()
    }
}

fn catalan(n: usize, cap: usize) -> Option<usize> {
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c * 2 * (2 * i + 1) / (i + 2);
        if c > cap as u128 {
            return None;
        }
    }
    Some(c as usize)
}

/// Every full bracketing of `seq`, as interned roots.
fn bracketings(seq: &[u32], interner: &mut Interner) -> Vec<u32> {
    let n = seq.len();
    // table[i][len-1] = roots of seq[i..i+len]
    let mut table: Vec<Vec<Vec<u32>>> = vec![Vec::with_capacity(n); n];
    for (i, &s) in seq.iter().enumerate() {
        table[i].push(vec![s]);
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let mut roots = BTreeSet::new();
            for k in 1..len {
                let (left, right) = (table[i][k - 1].clone(), &table[i + k][len - k - 1]);
                for &l in &left {
                    for &r in right.clone().iter() {
                        roots.insert(interner.intern(Shape::Pair(l, r)));
                    }
                }
            }
            table[i].push(roots.into_iter().collect());
        }
    }
    table[0][n - 1].clone()
}

/// One replace-all move between two explored words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub bigram: Bigram,
}

/// Full exploration of every tie-break choice.
#[derive(Debug, Clone)]
pub struct RepairExploration {
    /// Canonical representatives of all RePair grammars.
    pub grammars: BTreeSet<Grammar>,
    /// Every distinct intermediate word, the input first.
    pub states: Vec<Word>,
    pub transitions: Vec<Transition>,
}

struct State {
    word: Vec<u32>,
    children: Vec<(usize, (u32, u32))>,
    roots: Option<Rc<BTreeSet<u32>>>,
}

/// Explores every most-frequent-bigram choice at every step and every
/// bracketing of each final sequence. States are keyed by their
/// hash-consed word, which already determines the productions built so
/// far, so converging branches are explored once.
pub fn explore_repair(w: &Word, limits: RepairLimits) -> Result<RepairExploration> {
    if w.is_empty() {
        return Err(Error::domain("RePair needs a non-empty word"));
    }
    if !w.is_terminal_only() {
        return Err(Error::domain("RePair input must consist of terminals"));
    }
    if w.len() > limits.max_len {
        return Err(Error::resource(format!(
            "RePair enumeration is limited to {} symbols, got {}",
            limits.max_len,
            w.len()
        )));
    }
    let mut interner = Interner::default();
    let start: Vec<u32> = w.iter().map(|&c| interner.intern(Shape::Leaf(c))).collect();
    let mut states = vec![State {
        word: start.clone(),
        children: Vec::new(),
        roots: None,
    }];
    let mut index: HashMap<Vec<u32>, usize> = HashMap::from([(start, 0)]);
    let mut stack = vec![(0usize, false)];
    while let Some((s, expanded)) = stack.pop() {
        if states[s].roots.is_some() {
            continue;
        }
        if expanded {
            let mut roots = BTreeSet::new();
            for &(c, _) in &states[s].children {
                roots.extend(states[c].roots.as_ref().expect("child finished").iter().copied());
            }
            if roots.len() > limits.max_grammars {
                return Err(Error::resource(format!(
                    "more than {} RePair grammars",
                    limits.max_grammars
                )));
            }
            states[s].roots = Some(Rc::new(roots));
            continue;
        }
        let (max, best) = most_frequent(&states[s].word);
        if max < 2 {
            let word = states[s].word.clone();
            if catalan(word.len() - 1, limits.max_grammars).is_none() {
                return Err(Error::resource(format!(
                    "final sequence of length {} has more than {} bracketings",
                    word.len(),
                    limits.max_grammars
                )));
            }
            let roots = bracketings(&word, &mut interner);
            states[s].roots = Some(Rc::new(roots.into_iter().collect()));
            continue;
        }
        stack.push((s, true));
        for (pair, _) in best {
            let fresh = interner.intern(Shape::Pair(pair.0, pair.1));
            let next = replace_pairs(&states[s].word, pair, fresh);
            let child = match index.get(&next) {
                Some(&c) => c,
                None => {
                    let c = states.len();
                    index.insert(next.clone(), c);
                    states.push(State {
                        word: next,
                        children: Vec::new(),
                        roots: None,
                    });
                    c
                }
            };
            states[s].children.push((child, pair));
            if states[child].roots.is_none() {
                stack.push((child, false));
            }
        }
    }

    let grammars = states[0]
        .roots
        .as_ref()
        .expect("root finished")
        .iter()
        .map(|&r| interner.grammar(r).canonicalize())
        .collect::<Result<BTreeSet<_>>>()?;
    let rendered: Vec<Word> = states.iter().map(|s| interner.render(&s.word)).collect();
    let transitions = states
        .iter()
        .enumerate()
        .flat_map(|(from, s)| {
            s.children.iter().map(move |&(to, pair)| (from, to, pair))
        })
        .map(|(from, to, (x, y))| Transition {
            from,
            to,
            bigram: (
                interner.render(&[x])[0],
                interner.render(&[y])[0],
            ),
        })
        .collect();
    Ok(RepairExploration {
        grammars,
        states: rendered,
        transitions,
    })
}

/// The set of all RePair grammars of `w` up to equivalence.
pub fn enumerate_repair(w: &Word) -> Result<BTreeSet<Grammar>> {
    Ok(explore_repair(w, RepairLimits::default())?.grammars)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub family: Family,
    pub index: u32,
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.family, self.index)
    }
}

/// How RePair moves through the F/P/Q words of `F_n`: `F_i → F_{i-1}`
/// (replace `ab`), `F_{2k} → P_k` (replace `ba`), `P_i → Q_{i-1}` and
/// `Q_i → P_i` (replace `ab`).
#[derive(Debug, Clone)]
pub struct StrategyGraph {
    pub n: u32,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
}

impl StrategyGraph {
    pub fn new(n: u32) -> Result<Self> {
        if n < 6 {
            return Err(Error::domain("the strategy graph needs n >= 6"));
        }
        let half = n / 2;
        let mut vertices = Vec::new();
        let v = |family, index| Vertex { family, index };
        vertices.extend((4..=n).map(|i| v(Family::F, i)));
        vertices.extend((3..=half).map(|i| v(Family::P, i)));
        vertices.extend((2..half).map(|i| v(Family::Q, i)));
        let at = |x: Vertex| vertices.iter().position(|&y| y == x).expect("vertex exists");
        let mut edges = Vec::new();
        for i in 5..=n {
            edges.push((at(v(Family::F, i)), at(v(Family::F, i - 1))));
        }
        for k in 3..=half {
            edges.push((at(v(Family::F, 2 * k)), at(v(Family::P, k))));
        }
        for i in 3..=half {
            edges.push((at(v(Family::P, i)), at(v(Family::Q, i - 1))));
        }
        for i in 3..half {
            edges.push((at(v(Family::Q, i)), at(v(Family::P, i))));
        }
        Ok(StrategyGraph { n, vertices, edges })
    }

    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }

    pub fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        match (self.position(from), self.position(to)) {
            (Some(a), Some(b)) => self.edges.contains(&(a, b)),
            _ => false,
        }
    }

    pub fn sources(&self) -> Vec<Vertex> {
        (0..self.vertices.len())
            .filter(|&i| !self.edges.iter().any(|&(_, b)| b == i))
            .map(|i| self.vertices[i])
            .collect()
    }

    pub fn sinks(&self) -> Vec<Vertex> {
        (0..self.vertices.len())
            .filter(|&i| !self.edges.iter().any(|&(a, _)| a == i))
            .map(|i| self.vertices[i])
            .collect()
    }

    /// Number of source-to-sink paths.
    pub fn path_count(&self) -> u64 {
        let n = self.vertices.len();
        let mut memo: Vec<Option<u64>> = vec![None; n];
        fn count(g: &StrategyGraph, v: usize, memo: &mut Vec<Option<u64>>) -> u64 {
            if let Some(c) = memo[v] {
                return c;
            }
            let out: Vec<usize> = g.edges.iter().filter(|e| e.0 == v).map(|e| e.1).collect();
            let c = if out.is_empty() {
                1
            } else {
                out.into_iter().map(|t| count(g, t, memo)).sum()
            };
            memo[v] = Some(c);
            c
        }
        self.sources()
            .into_iter()
            .map(|s| count(self, self.position(s).unwrap(), &mut memo))
            .sum()
    }

    /// Identifies `w` with a vertex when it equals that member of the
    /// family up to a renaming of its two symbols.
    pub fn classify(&self, w: &[Symbol]) -> Option<Vertex> {
        let ab = Alphabet::ab();
        self.vertices.iter().copied().find(|v| {
            v.family.length(v.index) == Some(w.len() as u64)
                && match v.family {
                    Family::F => fib_word(v.index, ab),
                    Family::P => p_word(v.index, ab),
                    Family::Q => q_word(v.index, ab),
                }
                .is_ok_and(|target| isomorphic(w, &target))
        })
    }

    /// Graphviz rendering: F row on top, P/Q row below.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph strategy {\n  rankdir=LR;\n");
        let row = |fams: &[Family]| {
            self.vertices
                .iter()
                .filter(|v| fams.contains(&v.family))
                .map(|v| format!("\"{v}\""))
                .collect::<Vec<_>>()
                .join("; ")
        };
        let _ = writeln!(out, "  {{ rank=same; {}; }}", row(&[Family::F]));
        let _ = writeln!(out, "  {{ rank=same; {}; }}", row(&[Family::P, Family::Q]));
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", self.vertices[a], self.vertices[b]);
        }
        out.push_str("}\n");
        out
    }
}

pub fn strategy_graph(n: u32) -> Result<StrategyGraph> {
    StrategyGraph::new(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{fib_word, p_word, Alphabet};

    fn w(s: &str) -> Word {
        Word::terminals(s)
    }

    fn t(c: char) -> Symbol {
        Symbol::terminal(c)
    }

    fn fib(n: u32) -> Word {
        fib_word(n, Alphabet::ab()).unwrap()
    }

    #[test]
    fn counting() {
        assert_eq!(count_nonoverlapping(&w("abaababa"), (t('a'), t('b'))).unwrap(), 3);
        assert_eq!(count_nonoverlapping(&w("aaa"), (t('a'), t('a'))).unwrap(), 1);
        assert_eq!(count_nonoverlapping(&fib(7), (t('a'), t('b'))).unwrap(), 5);
        assert_eq!(count_nonoverlapping(&w("aaaabaa"), (t('a'), t('a'))).unwrap(), 3);
        assert!(count_nonoverlapping(&w("a"), (t('a'), t('a'))).is_err());
    }

    #[test]
    fn most_frequent_examples() {
        let ab = (t('a'), t('b'));
        let ba = (t('b'), t('a'));
        let mut f8 = most_frequent_bigrams(&fib(8)).unwrap();
        f8.sort();
        assert_eq!(f8, vec![ab, ba]);
        assert_eq!(most_frequent_bigrams(&fib(7)).unwrap(), vec![ab]);
        assert_eq!(
            most_frequent_bigrams(&p_word(4, Alphabet::ab()).unwrap()).unwrap(),
            vec![ab]
        );
        assert!(most_frequent_bigrams(&w("")).is_err());
    }

    #[test]
    fn replacement() {
        let x = Symbol::nonterminal(1);
        let r = replace_all(&fib(8), (t('b'), t('a')), x).unwrap();
        assert_eq!(r, p_word(4, Alphabet::new('a', x).unwrap()).unwrap());
        let r = replace_all(&fib(7), (t('a'), t('b')), x).unwrap();
        assert_eq!(r, fib_word(6, Alphabet::new(x, 'a').unwrap()).unwrap());
        let r = replace_all(&w("aaa"), (t('a'), t('a')), x).unwrap();
        assert_eq!(r, Word::from_symbols(vec![x, t('a')]));
        assert!(replace_all(&r, (t('a'), t('a')), x).is_err());
    }

    #[test]
    fn deterministic_repair() {
        for p in Policy::ALL {
            let out = repair(&fib(7), &p).unwrap();
            assert_eq!(out.grammar.size(), 7);
            assert_eq!(out.grammar.expand().unwrap(), fib(7));
        }
        let single = repair(&w("a"), &Policy::FirstByScan).unwrap();
        assert_eq!(single.grammar.size(), 1);
        assert_eq!(single.grammar.expand().unwrap(), w("a"));
        let compressed = repair(&w("ababaabaaba"), &Policy::FirstByScan).unwrap();
        assert_eq!(compressed.grammar.size(), 7);
        assert!(repair(&Word::empty(), &Policy::FirstByScan).is_err());
    }

    #[test]
    fn trace_format() {
        let out = repair(&w("abaababa"), &Policy::FirstByScan).unwrap();
        let text = out.trace.to_text();
        let first = text.lines().next().unwrap();
        assert_eq!(first, "abaababa --[ab→X3]--> X3aX3X3a");
        assert!(text.lines().last().unwrap().starts_with("final "));
        assert_eq!(out.trace.to_grammar().unwrap().validate(), Ok(()));
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_repair(&w("abaababa")).unwrap().len(), 4);
        assert_eq!(enumerate_repair(&fib(11)).unwrap().len(), 8);
        let ab = enumerate_repair(&w("ab")).unwrap();
        assert_eq!(ab.len(), 1);
        let only = ab.iter().next().unwrap();
        assert!(only
            .equivalent(&Grammar::from_notation("A→a, B→b, S→AB", "S").unwrap())
            .unwrap());
    }

    #[test]
    fn enumeration_contains_deterministic_runs() {
        for s in ["abaababa", "ababaabaaba", "aaaaaaa", "abcabcabcab", "mississippi"] {
            let all = enumerate_repair(&w(s)).unwrap();
            for p in Policy::ALL {
                let g = repair(&w(s), &p).unwrap().grammar.canonicalize().unwrap();
                assert!(all.contains(&g), "{s} {p:?}");
            }
            for g in &all {
                assert_eq!(g.expand().unwrap(), w(s));
            }
        }
    }

    #[test]
    fn enumeration_limits() {
        let long = w("abcdefghijklmnop");
        let limits = RepairLimits {
            max_len: 100,
            max_grammars: 1000,
        };
        assert!(matches!(explore_repair(&long, limits), Err(Error::Resource { .. })));
        let limits = RepairLimits {
            max_len: 4,
            max_grammars: 1000,
        };
        assert!(matches!(explore_repair(&fib(5), limits), Err(Error::Resource { .. })));
    }

    #[test]
    fn strategy_graph_examples() {
        let g = strategy_graph(11).unwrap();
        let f = |i| Vertex { family: Family::F, index: i };
        let p = |i| Vertex { family: Family::P, index: i };
        let q = |i| Vertex { family: Family::Q, index: i };
        assert_eq!(g.sources(), vec![f(11)]);
        assert_eq!(g.sinks(), vec![f(4), q(2)]);
        assert_eq!(g.path_count(), 4);
        for k in 3..=5 {
            assert!(g.has_edge(f(2 * k), p(k)));
        }
        assert_eq!(strategy_graph(6).unwrap().path_count(), 2);
        assert!(strategy_graph(5).is_err());
        assert!(g.to_dot().contains("\"F_10\" -> \"P_5\""));
        for n in 6..=30 {
            assert_eq!(strategy_graph(n).unwrap().path_count(), (n / 2 - 1) as u64);
        }
    }

    #[test]
    fn explored_words_follow_the_strategy_graph() {
        for n in 6..=14 {
            let ex = explore_repair(&fib(n), RepairLimits::default()).unwrap();
            let g = strategy_graph(n).unwrap();
            let class: Vec<Vertex> = ex
                .states
                .iter()
                .map(|s| g.classify(s).unwrap_or_else(|| panic!("n={n}: {s} unclassified")))
                .collect();
            let mut seen = BTreeSet::new();
            for tr in &ex.transitions {
                let (a, b) = (class[tr.from], class[tr.to]);
                assert!(g.has_edge(a, b), "n={n}: {a} -> {b} not in graph");
                seen.insert((g.position(a).unwrap(), g.position(b).unwrap()));
            }
            assert_eq!(seen.len(), g.edges.len(), "n={n}: every edge is taken");
        }
    }

    #[test]
    fn catalan_numbers() {
        assert_eq!(catalan(0, 100), Some(1));
        assert_eq!(catalan(3, 100), Some(5));
        assert_eq!(catalan(10, 100_000), Some(16796));
        assert_eq!(catalan(10, 100), None);
    }
}
