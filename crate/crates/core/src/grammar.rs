//! Straight-line programs in Chomsky normal form.
//!
//! A [`Grammar`] is an unchecked list of productions plus a start symbol.
//! [`Grammar::validate`] checks the SLP conditions and every query that
//! needs a well-formed grammar runs it first. Derivation trees are never
//! materialized node-per-leaf: queries walk the production DAG and use
//! memoized expansion lengths, so a size-25 grammar of a 75k-symbol word
//! stays cheap.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorize::{Factorization, FactorizationKind};
use crate::words::{Alphabet, Symbol, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rhs {
    /// `A → α`
    Terminal(Symbol),
    /// `A → B C`
    Pair(Symbol, Symbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Production {
    pub lhs: Symbol,
    pub rhs: Rhs,
}

impl Production {
    pub fn terminal(lhs: Symbol, c: Symbol) -> Self {
        Production {
            lhs,
            rhs: Rhs::Terminal(c),
        }
    }

    pub fn pair(lhs: Symbol, left: Symbol, right: Symbol) -> Self {
        Production {
            lhs,
            rhs: Rhs::Pair(left, right),
        }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rhs {
            Rhs::Terminal(c) => write!(f, "{} → {}", self.lhs, c),
            Rhs::Pair(l, r) => write!(f, "{} → {}{}", self.lhs, l, r),
        }
    }
}

/// The first SLP condition a grammar breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TerminalLhs(Symbol),
    /// `A → α` with a nonterminal α.
    NonterminalInUnary(Symbol),
    /// `A → BC` with a terminal among B, C.
    TerminalInBinary(Symbol),
    DuplicateLhs(Symbol),
    Undefined { lhs: Symbol, symbol: Symbol },
    UndefinedStart(Symbol),
    Cycle(Symbol),
    Unreachable(Vec<Symbol>),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TerminalLhs(s) => write!(f, "left-hand side {s} is a terminal"),
            Violation::NonterminalInUnary(s) => {
                write!(f, "unary production of {s} must derive a terminal")
            }
            Violation::TerminalInBinary(s) => {
                write!(f, "binary production of {s} must have two nonterminals")
            }
            Violation::DuplicateLhs(s) => write!(f, "{s} has more than one production"),
            Violation::Undefined { lhs, symbol } => {
                write!(f, "production of {lhs} uses undefined {symbol}")
            }
            Violation::UndefinedStart(s) => write!(f, "start symbol {s} has no production"),
            Violation::Cycle(s) => write!(f, "cycle through {s}"),
            Violation::Unreachable(v) => {
                let names: Vec<_> = v.iter().map(|s| s.to_string()).collect();
                write!(f, "unreachable from start: {}", names.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grammar {
    productions: Vec<Production>,
    start: Symbol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Node {
    Leaf(Symbol),
    Inner(usize, usize),
}

/// Validated, index-based view: nodes are in topological order (children
/// before parents) and `root` is the start symbol's node.
#[derive(Debug, Clone)]
pub(crate) struct Slp {
    pub(crate) labels: Vec<Symbol>,
    pub(crate) nodes: Vec<Node>,
    pub(crate) lens: Vec<u64>,
    pub(crate) root: usize,
}

impl Slp {
    fn expand(&self) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(self.lens[self.root].min(1 << 26) as usize);
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            match self.nodes[v] {
                Node::Leaf(c) => out.push(c),
                Node::Inner(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        out
    }
}

impl Grammar {
    /// Unchecked constructor; see [`Grammar::validate`].
    pub fn new(productions: Vec<Production>, start: Symbol) -> Self {
        Grammar { productions, start }
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn start(&self) -> Symbol {
        self.start
    }

    /// |G|: the number of productions, unary ones included.
    pub fn size(&self) -> usize {
        self.productions.len()
    }

    /// Total right-hand-side length, the size measure used for non-SLP
    /// grammars.
    pub fn rhs_length_sum(&self) -> usize {
        self.productions
            .iter()
            .map(|p| match p.rhs {
                Rhs::Terminal(_) => 1,
                Rhs::Pair(..) => 2,
            })
            .sum()
    }

    pub fn binary_count(&self) -> usize {
        self.productions
            .iter()
            .filter(|p| matches!(p.rhs, Rhs::Pair(..)))
            .count()
    }

    pub fn unary_count(&self) -> usize {
        self.size() - self.binary_count()
    }

    pub fn validate(&self) -> std::result::Result<(), Violation> {
        self.index().map(|_| ())
    }

    pub(crate) fn checked(&self) -> Result<Slp> {
        self.index().map_err(Error::InvalidGrammar)
    }

    fn index(&self) -> std::result::Result<Slp, Violation> {
        let mut by_lhs: HashMap<Symbol, usize> = HashMap::with_capacity(self.productions.len());
        for (i, p) in self.productions.iter().enumerate() {
            if p.lhs.is_terminal() {
                return Err(Violation::TerminalLhs(p.lhs));
            }
            match p.rhs {
                Rhs::Terminal(c) if c.is_nonterminal() => {
                    return Err(Violation::NonterminalInUnary(p.lhs))
                }
                Rhs::Pair(l, r) if l.is_terminal() || r.is_terminal() => {
                    return Err(Violation::TerminalInBinary(p.lhs))
                }
                _ => {}
            }
            if by_lhs.insert(p.lhs, i).is_some() {
                return Err(Violation::DuplicateLhs(p.lhs));
            }
        }
        for p in &self.productions {
            if let Rhs::Pair(l, r) = p.rhs {
                for s in [l, r] {
                    if !by_lhs.contains_key(&s) {
                        return Err(Violation::Undefined { lhs: p.lhs, symbol: s });
                    }
                }
            }
        }
        let Some(&start) = by_lhs.get(&self.start) else {
            return Err(Violation::UndefinedStart(self.start));
        };

        // Iterative DFS; post-order gives the topological numbering.
        const WHITE: u8 = 0;
        const GREY: u8 = 1;
        const BLACK: u8 = 2;
        let n = self.productions.len();
        let mut colour = vec![WHITE; n];
        let mut node_of = vec![usize::MAX; n];
        let mut slp = Slp {
            labels: Vec::with_capacity(n),
            nodes: Vec::with_capacity(n),
            lens: Vec::with_capacity(n),
            root: 0,
        };
        let mut stack: Vec<(usize, bool)> = vec![(start, false)];
        while let Some((i, children_done)) = stack.pop() {
            let p = self.productions[i];
            if children_done {
                let (node, len) = match p.rhs {
                    Rhs::Terminal(c) => (Node::Leaf(c), 1),
                    Rhs::Pair(l, r) => {
                        let (l, r) = (node_of[by_lhs[&l]], node_of[by_lhs[&r]]);
                        (Node::Inner(l, r), slp.lens[l].saturating_add(slp.lens[r]))
                    }
                };
                node_of[i] = slp.nodes.len();
                slp.labels.push(p.lhs);
                slp.nodes.push(node);
                slp.lens.push(len);
                colour[i] = BLACK;
                continue;
            }
            match colour[i] {
                BLACK => continue,
                GREY => return Err(Violation::Cycle(p.lhs)),
                _ => {}
            }
            colour[i] = GREY;
            stack.push((i, true));
            if let Rhs::Pair(l, r) = p.rhs {
                for s in [r, l] {
                    let j = by_lhs[&s];
                    match colour[j] {
                        GREY => return Err(Violation::Cycle(s)),
                        WHITE => stack.push((j, false)),
                        _ => {}
                    }
                }
            }
        }
        let unreachable: Vec<Symbol> = self
            .productions
            .iter()
            .zip(&colour)
            .filter(|(_, &c)| c != BLACK)
            .map(|(p, _)| p.lhs)
            .collect();
        if !unreachable.is_empty() {
            return Err(Violation::Unreachable(unreachable));
        }
        slp.root = node_of[start];
        Ok(slp)
    }

    /// The word derived from the start symbol.
    pub fn expand(&self) -> Result<Word> {
        Ok(Word::from_symbols(self.checked()?.expand()))
    }

    /// Length of the derived word without expanding it.
    pub fn expansion_len(&self) -> Result<u64> {
        let slp = self.checked()?;
        Ok(slp.lens[slp.root])
    }

    pub fn derivation_tree(&self) -> Result<DerivationTree> {
        Ok(DerivationTree { slp: self.checked()? })
    }

    pub fn partial_derivation_tree(&self) -> Result<PartialDerivationTree> {
        let slp = self.checked()?;
        Ok(PartialDerivationTree::build(&slp))
    }

    /// The factorization of the derived word whose phrases are the leaves
    /// of the partial derivation tree.
    pub fn g_factorization(&self) -> Result<Factorization> {
        let slp = self.checked()?;
        let pt = PartialDerivationTree::build(&slp);
        let subject = Word::from_symbols(slp.expand());
        let ends = pt.leaves().map(|leaf| leaf.start + leaf.len).collect();
        Factorization::from_ends(subject, ends, FactorizationKind::G)
    }

    /// Representative of the equivalence class: nonterminals renumbered
    /// `X1, X2, …` in order of completion of a left-to-right post-order walk
    /// of the derivation DAG, each shared node numbered once. Productions
    /// come out sorted by the new numbering, so children always precede
    /// parents and the start is last.
    pub fn canonicalize(&self) -> Result<Grammar> {
        let slp = self.checked()?;
        Ok(canonical_from_slp(&slp))
    }

    pub fn equivalent(&self, other: &Grammar) -> Result<bool> {
        Ok(self.canonicalize()? == other.canonicalize()?)
    }

    /// `{A→a, B→b, X_3→AB, X_i→X_{i-1}X_{i-2}}`: the recursive definition
    /// of `F_n` read as a grammar of size `n`.
    pub fn from_recursive_fib(n: u32, ab: Alphabet) -> Result<Grammar> {
        if n < 3 {
            return Err(Error::domain("recursive Fibonacci grammar needs n >= 3"));
        }
        let nt = |i: u32| Symbol::nonterminal(i);
        // X_2 = A derives a, X_1 = B derives b.
        let mut productions = vec![
            Production::terminal(nt(2), ab.first()),
            Production::terminal(nt(1), ab.second()),
        ];
        for i in 3..=n {
            productions.push(Production::pair(nt(i), nt(i - 1), nt(i - 2)));
        }
        Ok(Grammar::new(productions, nt(n)))
    }

    /// Parses the compact notation used in docs and tests, e.g.
    /// `"A→a, B→b, C→AB, D→CA"`. Nonterminal names are an uppercase
    /// letter followed by optional digits; a right-hand side that is one
    /// other character is a terminal. `->` is accepted for `→`.
    pub fn from_notation(rules: &str, start: &str) -> Result<Grammar> {
        let mut names = NameTable::default();
        let mut productions = Vec::new();
        for rule in rules.split([',', ';', '\n']).map(str::trim).filter(|r| !r.is_empty()) {
            let (lhs, rhs) = rule
                .split_once("→")
                .or_else(|| rule.split_once("->"))
                .ok_or_else(|| Error::Parse(format!("missing arrow in rule {rule:?}")))?;
            let lhs = names.get(lhs.trim())?;
            let rhs: String = rhs.chars().filter(|c| !c.is_whitespace()).collect();
            let mut chars = rhs.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if !c.is_ascii_uppercase() => {
                    productions.push(Production::terminal(lhs, Symbol::terminal(c)));
                }
                _ => {
                    let parts = split_names(&rhs)?;
                    let [l, r] = parts.as_slice() else {
                        return Err(Error::Parse(format!(
                            "rule {rule:?} must have one terminal or two nonterminals"
                        )));
                    };
                    productions.push(Production::pair(lhs, names.get(l)?, names.get(r)?));
                }
            }
        }
        let start = names.get(start.trim())?;
        Ok(Grammar::new(productions, start))
    }

    pub fn to_json_value(&self) -> GrammarJson {
        GrammarJson {
            start: self.start.to_string(),
            productions: self
                .productions
                .iter()
                .map(|p| ProductionJson {
                    lhs: p.lhs.to_string(),
                    rhs: match p.rhs {
                        Rhs::Terminal(c) => RhsJson::Terminal(c.to_string()),
                        Rhs::Pair(l, r) => RhsJson::Pair([l.to_string(), r.to_string()]),
                    },
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("grammar JSON is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Grammar> {
        let doc: GrammarJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Grammar::from_json_value(&doc)
    }

    /// Names are mapped to nonterminals in order of first appearance.
    pub fn from_json_value(doc: &GrammarJson) -> Result<Grammar> {
        let keep_indices = std::iter::once(&doc.start)
            .chain(doc.productions.iter().flat_map(|p| {
                std::iter::once(&p.lhs).chain(match &p.rhs {
                    RhsJson::Terminal(_) => [].iter(),
                    RhsJson::Pair(pair) => pair.iter(),
                })
            }))
            .all(|n| own_index(n).is_some());
        let mut names = NameTable {
            keep_indices,
            ..NameTable::default()
        };
        let mut productions = Vec::with_capacity(doc.productions.len());
        for p in &doc.productions {
            let lhs = names.get(&p.lhs)?;
            let rhs = match &p.rhs {
                RhsJson::Terminal(t) => {
                    let mut cs = t.chars();
                    match (cs.next(), cs.next()) {
                        (Some(c), None) => Rhs::Terminal(Symbol::terminal(c)),
                        _ => {
                            return Err(Error::Parse(format!(
                                "terminal right-hand side of {} must be one character, got {t:?}",
                                p.lhs
                            )))
                        }
                    }
                }
                RhsJson::Pair([l, r]) => Rhs::Pair(names.get(l)?, names.get(r)?),
            };
            productions.push(Production { lhs, rhs });
        }
        let start = names.get(&doc.start)?;
        Ok(Grammar::new(productions, start))
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rules: Vec<_> = self.productions.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}} start {}", rules.join(", "), self.start)
    }
}

#[derive(Default)]
struct NameTable {
    ids: HashMap<String, Symbol>,
    /// Every name is `X<n>`: keep `n` rather than renumbering.
    keep_indices: bool,
}

/// Index of a name in the form this crate prints, `X<n>` with `n >= 1`.
fn own_index(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('X')?;
    if digits.starts_with('0') {
        return None;
    }
    digits.parse().ok().filter(|&n| (1..u32::MAX / 2).contains(&n))
}

impl NameTable {
    fn get(&mut self, name: &str) -> Result<Symbol> {
        if name.is_empty() {
            return Err(Error::Parse("empty nonterminal name".into()));
        }
        if self.keep_indices {
            if let Some(n) = own_index(name) {
                return Ok(Symbol::nonterminal(n));
            }
        }
        let next = self.ids.len() as u32 + 1;
        Ok(*self
            .ids
            .entry(name.to_string())
            .or_insert_with(|| Symbol::nonterminal(next)))
    }
}

fn split_names(s: &str) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    for c in s.chars() {
        if c.is_ascii_uppercase() {
            out.push(c.to_string());
        } else if c.is_ascii_digit() || c == '_' {
            match out.last_mut() {
                Some(last) => last.push(c),
                None => return Err(Error::Parse(format!("bad nonterminal list {s:?}"))),
            }
        } else {
            return Err(Error::Parse(format!("unexpected {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

pub(crate) fn canonical_from_slp(slp: &Slp) -> Grammar {
    let mut index = vec![0u32; slp.nodes.len()];
    let mut next = 0u32;
    let mut productions = Vec::with_capacity(slp.nodes.len());
    let mut stack = vec![(slp.root, false)];
    while let Some((v, done)) = stack.pop() {
        if index[v] != 0 {
            continue;
        }
        match (slp.nodes[v], done) {
            (Node::Leaf(c), _) => {
                next += 1;
                index[v] = next;
                productions.push(Production::terminal(Symbol::nonterminal(next), c));
            }
            (Node::Inner(l, r), true) => {
                next += 1;
                index[v] = next;
                productions.push(Production::pair(
                    Symbol::nonterminal(next),
                    Symbol::nonterminal(index[l]),
                    Symbol::nonterminal(index[r]),
                ));
            }
            (Node::Inner(l, r), false) => {
                stack.push((v, true));
                stack.push((r, false));
                stack.push((l, false));
            }
        }
    }
    Grammar::new(productions, Symbol::nonterminal(next))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarJson {
    pub start: String,
    pub productions: Vec<ProductionJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductionJson {
    pub lhs: String,
    pub rhs: RhsJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhsJson {
    Terminal(String),
    Pair([String; 2]),
}

/// Derivation tree 𝒯(G), with terminals identified with their parents so
/// the tree is full binary. Backed by the production DAG.
#[derive(Debug, Clone)]
pub struct DerivationTree {
    slp: Slp,
}

/// Refuse to draw trees larger than this many nodes.
pub const DOT_NODE_LIMIT: u64 = 20_000;

impl DerivationTree {
    pub fn root_label(&self) -> Symbol {
        self.slp.labels[self.slp.root]
    }

    pub fn leaf_count(&self) -> u64 {
        self.slp.lens[self.slp.root]
    }

    pub fn internal_count(&self) -> u64 {
        self.leaf_count() - 1
    }

    /// Leaf labels left to right (the unary nonterminals).
    pub fn leaf_labels(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.preorder().filter(|(_, leaf)| *leaf).map(|(s, _)| s)
    }

    /// Internal labels in pre-order, repeats included.
    pub fn internal_labels(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.preorder().filter(|(_, leaf)| !*leaf).map(|(s, _)| s)
    }

    /// Pre-order walk yielding `(label, is_leaf)`.
    pub fn preorder(&self) -> impl Iterator<Item = (Symbol, bool)> + '_ {
        let mut stack = vec![self.slp.root];
        std::iter::from_fn(move || {
            let v = stack.pop()?;
            Some(match self.slp.nodes[v] {
                Node::Leaf(_) => (self.slp.labels[v], true),
                Node::Inner(l, r) => {
                    stack.push(r);
                    stack.push(l);
                    (self.slp.labels[v], false)
                }
            })
        })
    }

    /// Graphviz rendering. Terminal characters are boxed; nodes that are
    /// leaves of the partial derivation tree are circled.
    pub fn to_dot(&self) -> Result<String> {
        let total = 2 * self.leaf_count() - 1;
        if total > DOT_NODE_LIMIT {
            return Err(Error::resource(format!(
                "derivation tree has {total} nodes, over the drawing limit of {DOT_NODE_LIMIT}"
            )));
        }
        let pt = PartialDerivationTree::build(&self.slp);
        let pt_leaf_starts: HashSet<(usize, usize)> =
            pt.leaves().map(|l| (l.start, l.len)).collect();
        let mut out = String::from("digraph derivation {\n  node [shape=plaintext];\n");
        let mut next_id = 0usize;
        // (node, parent dot id, start position)
        let mut stack = vec![(self.slp.root, None::<usize>, 0usize)];
        while let Some((v, parent, start)) = stack.pop() {
            let id = next_id;
            next_id += 1;
            let len = self.slp.lens[v] as usize;
            let circled = pt_leaf_starts.contains(&(start, len));
            let _ = writeln!(
                out,
                "  n{id} [label=\"{}\"{}];",
                self.slp.labels[v],
                if circled { ", shape=circle" } else { "" }
            );
            if let Some(p) = parent {
                let _ = writeln!(out, "  n{p} -> n{id};");
            }
            match self.slp.nodes[v] {
                Node::Leaf(c) => {
                    let t = next_id;
                    next_id += 1;
                    let _ = writeln!(out, "  n{t} [label=\"{c}\", shape=box];");
                    let _ = writeln!(out, "  n{id} -> n{t};");
                }
                Node::Inner(l, r) => {
                    let llen = self.slp.lens[l] as usize;
                    stack.push((r, Some(id), start + llen));
                    stack.push((l, Some(id), start));
                }
            }
        }
        out.push_str("}\n");
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PtNode {
    pub label: Symbol,
    /// 0-based start of the derived interval in the word.
    pub start: usize,
    pub len: usize,
    pub children: Option<(usize, usize)>,
}

impl PtNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// 𝒫𝒯(G): the maximal top part of the derivation tree in which no
/// internal node has a same-labelled node to its left. Node 0 is the root;
/// nodes are stored in pre-order.
#[derive(Debug, Clone)]
pub struct PartialDerivationTree {
    nodes: Vec<PtNode>,
}

impl PartialDerivationTree {
    fn build(slp: &Slp) -> Self {
        let mut seen = vec![false; slp.nodes.len()];
        let mut nodes: Vec<PtNode> = Vec::new();
        // (slp node, start, parent pt index, is right child)
        let mut stack = vec![(slp.root, 0usize, None::<usize>, false)];
        while let Some((v, start, parent, right)) = stack.pop() {
            let idx = nodes.len();
            nodes.push(PtNode {
                label: slp.labels[v],
                start,
                len: slp.lens[v] as usize,
                children: None,
            });
            if let Some(p) = parent {
                let c = nodes[p].children.get_or_insert((usize::MAX, usize::MAX));
                if right {
                    c.1 = idx;
                } else {
                    c.0 = idx;
                }
            }
            let first_time = !std::mem::replace(&mut seen[v], true);
            if let (Node::Inner(l, r), true) = (slp.nodes[v], first_time) {
                stack.push((r, start + slp.lens[l] as usize, Some(idx), true));
                stack.push((l, start, Some(idx), false));
            }
        }
        PartialDerivationTree { nodes }
    }

    pub fn nodes(&self) -> &[PtNode] {
        &self.nodes
    }

    pub fn root(&self) -> &PtNode {
        &self.nodes[0]
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> impl Iterator<Item = &PtNode> + '_ {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.len() - self.leaf_count()
    }

    /// Graphviz rendering of the partial tree alone, leaves circled.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph partial_derivation {\n  node [shape=plaintext];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if n.is_leaf() { ", shape=circle" } else { "" };
            let _ = writeln!(
                out,
                "  n{i} [label=\"{} [{}..{}]\"{shape}];",
                n.label,
                n.start + 1,
                n.start + n.len
            );
            if let Some((l, r)) = n.children {
                let _ = writeln!(out, "  n{i} -> n{l};\n  n{i} -> n{r};");
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::fib_word;

    fn g(rules: &str, start: &str) -> Grammar {
        Grammar::from_notation(rules, start).unwrap()
    }

    pub(crate) fn hand_built_grammar() -> Grammar {
        g(
            "A→a, B→b, X1→AB, X2→AA, X3→X1X1, X4→X2B, X5→X3X4, X6→X4A, X7→X5X6",
            "X7",
        )
    }

    #[test]
    fn validate_accepts_the_aba_grammar() {
        assert_eq!(g("A→a, B→b, C→AB, D→CA", "D").validate(), Ok(()));
    }

    #[test]
    fn validate_rejects_cycles() {
        let cyc = g("A→a, X→XX", "X");
        assert!(matches!(cyc.validate(), Err(Violation::Cycle(_))));
        let longer = g("A→a, X→YA, Y→XA", "X");
        assert!(matches!(longer.validate(), Err(Violation::Cycle(_))));
    }

    #[test]
    fn validate_reports_unreachable() {
        let gr = g("A→a, B→b, C→AB", "A");
        let b = Symbol::nonterminal(2);
        let c = Symbol::nonterminal(3);
        assert_eq!(gr.validate(), Err(Violation::Unreachable(vec![b, c])));
    }

    #[test]
    fn validate_shape_and_definition_errors() {
        let a = Symbol::nonterminal(1);
        let dup = Grammar::new(
            vec![
                Production::terminal(a, 'a'.into()),
                Production::terminal(a, 'b'.into()),
            ],
            a,
        );
        assert_eq!(dup.validate(), Err(Violation::DuplicateLhs(a)));
        let bad_bin = Grammar::new(vec![Production::pair(a, 'a'.into(), 'b'.into())], a);
        assert_eq!(bad_bin.validate(), Err(Violation::TerminalInBinary(a)));
        let bad_un = Grammar::new(vec![Production::terminal(a, a)], a);
        assert_eq!(bad_un.validate(), Err(Violation::NonterminalInUnary(a)));
        let b = Symbol::nonterminal(2);
        let undefined = Grammar::new(vec![Production::pair(a, b, b)], a);
        assert!(matches!(undefined.validate(), Err(Violation::Undefined { .. })));
        let no_start = Grammar::new(vec![Production::terminal(a, 'a'.into())], b);
        assert_eq!(no_start.validate(), Err(Violation::UndefinedStart(b)));
        assert!(matches!(
            no_start.expand(),
            Err(Error::InvalidGrammar(Violation::UndefinedStart(_)))
        ));
    }

    #[test]
    fn expansion_and_size() {
        assert_eq!(g("A→a, B→b, C→AB, D→CA", "D").expand().unwrap(), Word::from("aba"));
        assert_eq!(g("A→a", "A").expand().unwrap(), Word::from("a"));
        let left = hand_built_grammar();
        assert_eq!(left.expand().unwrap(), Word::from("ababaabaaba"));
        assert_eq!(left.size(), 9);
        assert_eq!(g("A→a", "A").size(), 1);
        assert_eq!(left.rhs_length_sum(), 16);
    }

    #[test]
    fn derivation_tree_shape() {
        let t = g("A→a, B→b, C→AB, D→CA", "D").derivation_tree().unwrap();
        let a = Symbol::nonterminal(1);
        let b = Symbol::nonterminal(2);
        assert_eq!(t.leaf_labels().collect::<Vec<_>>(), vec![a, b, a]);
        let c = Symbol::nonterminal(3);
        let d = Symbol::nonterminal(4);
        assert_eq!(t.internal_labels().collect::<Vec<_>>(), vec![d, c]);
        assert_eq!(g("A→a", "A").derivation_tree().unwrap().leaf_count(), 1);
        assert_eq!(hand_built_grammar().derivation_tree().unwrap().leaf_count(), 11);
    }

    #[test]
    fn partial_tree_and_gfact() {
        let left = hand_built_grammar();
        assert_eq!(left.partial_derivation_tree().unwrap().leaf_count(), 8);
        assert_eq!(left.g_factorization().unwrap().to_text(), "a|b|ab|a|a|b|aab|a");

        let simple = g("A→a, B→b, C→AB", "C");
        assert_eq!(simple.partial_derivation_tree().unwrap().leaf_count(), 2);
        assert_eq!(simple.g_factorization().unwrap().to_text(), "a|b");

        let aaaa = g("A→a, X→AA, Y→XX", "Y");
        let pt = aaaa.partial_derivation_tree().unwrap();
        assert_eq!(pt.leaf_count(), 3);
        assert_eq!(aaaa.g_factorization().unwrap().to_text(), "a|a|aa");

        let single = g("A→a", "A").partial_derivation_tree().unwrap();
        assert_eq!(single.leaf_count(), 1);
        assert!(single.root().is_leaf());
    }

    #[test]
    fn equivalence_up_to_renaming() {
        let g1 = g("A→a, B→b, C→AB, D→CA", "D");
        let g2 = g("X→a, Y→b, Z→XY, W→ZX", "W");
        assert!(g1.equivalent(&g2).unwrap());
        assert!(g1.equivalent(&g1).unwrap());
        let right = g("A→a, B→b, X1→AB, X2→X1A, X3→X1X2, X4→X3X2, X5→X4X2", "X5");
        assert_eq!(right.expand().unwrap(), hand_built_grammar().expand().unwrap());
        assert!(!hand_built_grammar().equivalent(&right).unwrap());
    }

    #[test]
    fn canonical_form() {
        let gr = g("X→a, Y→b, Z→XY, W→ZX", "W");
        let canon = gr.canonicalize().unwrap();
        let n = Symbol::nonterminal;
        assert_eq!(
            canon,
            Grammar::new(
                vec![
                    Production::terminal(n(1), 'a'.into()),
                    Production::terminal(n(2), 'b'.into()),
                    Production::pair(n(3), n(1), n(2)),
                    Production::pair(n(4), n(3), n(1)),
                ],
                n(4)
            )
        );
        assert_eq!(canon.canonicalize().unwrap(), canon);
        assert_eq!(
            g("A→a, B→b, C→AB, D→CA", "D").canonicalize().unwrap(),
            canon
        );
    }

    #[test]
    fn recursive_fib_grammar() {
        let g7 = Grammar::from_recursive_fib(7, Alphabet::ab()).unwrap();
        assert_eq!(g7.size(), 7);
        assert_eq!(g7.expand().unwrap(), Word::from("abaababaabaab"));
        let g3 = Grammar::from_recursive_fib(3, Alphabet::ab()).unwrap();
        assert_eq!(g3.size(), 3);
        assert_eq!(g3.expand().unwrap(), Word::from("ab"));
        let g10 = Grammar::from_recursive_fib(10, Alphabet::ab()).unwrap();
        assert_eq!(g10.size(), 10);
        assert_eq!(g10.expansion_len().unwrap(), 55);
        assert!(Grammar::from_recursive_fib(2, Alphabet::ab()).is_err());
        for n in 3..=25 {
            let gr = Grammar::from_recursive_fib(n, Alphabet::ab()).unwrap();
            assert_eq!(gr.expand().unwrap(), fib_word(n, Alphabet::ab()).unwrap());
        }
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"start":"D","productions":[{"lhs":"A","rhs":"a"},{"lhs":"B","rhs":"b"},{"lhs":"C","rhs":["A","B"]},{"lhs":"D","rhs":["C","A"]}]}"#;
        let gr = Grammar::from_json(text).unwrap();
        assert_eq!(gr.expand().unwrap(), Word::from("aba"));
        let again = Grammar::from_json(&gr.to_json()).unwrap();
        assert_eq!(again, gr);
        assert!(Grammar::from_json(r#"{"start":"A","productions":[{"lhs":"A","rhs":"ab"}]}"#).is_err());
        assert!(Grammar::from_json("{").is_err());
    }

    #[test]
    fn dot_output() {
        let left = hand_built_grammar();
        let dot = left.derivation_tree().unwrap().to_dot().unwrap();
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("shape=circle").count(), 8);
        assert_eq!(dot.matches("shape=box").count(), 11);
        let pt = left.partial_derivation_tree().unwrap().to_dot();
        assert_eq!(pt.matches("shape=circle").count(), 8);
    }
}
