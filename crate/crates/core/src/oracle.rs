//! Exact smallest grammars.
//!
//! A smallest SLP never has two nonterminals with equal expansions, and every
//! reachable nonterminal derives a substring of `w`, so it is determined by a
//! set of distinct substrings containing `w` and its symbols in which every
//! member of length ≥ 2 splits into two members. The search grows such sets
//! top-down from `{w} ∪ alphabet`, branching over the splits of one
//! unresolved member at a time.
//!
//! Pruning uses a tiling bound. Fix an unresolved member `u` and any grammar
//! extending the current set `S`. Expanding `u` from the root, stopping at
//! nodes already in `S` and at nodes whose label was expanded further left,
//! yields a tiling of `u` by phrases that are members of `S`, single symbols,
//! or repeats of an earlier non-overlapping substring of `u`. Its internal
//! nodes other than the root are distinct and absent from `S`, so at least
//! `m_S(u) − 2` new members are still needed, where `m_S(u)` is the fewest
//! phrases of such a tiling.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorize::grammar_lower_bound;
use crate::grammar::{Grammar, Production};
use crate::repair::{repair, Policy};
use crate::words::{Symbol, Word};

/// Caps on a single oracle query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Longest word accepted.
    pub max_len: usize,
    /// Search nodes before giving up.
    pub max_nodes: u64,
    /// Grammars an enumeration may emit.
    pub max_grammars: usize,
}

impl OracleBudget {
    pub const DEFAULT_SIZE_LEN: usize = 60;
    pub const DEFAULT_ENUMERATE_LEN: usize = 40;

    pub fn for_size() -> Self {
        OracleBudget {
            max_len: Self::DEFAULT_SIZE_LEN,
            max_nodes: 20_000_000,
            max_grammars: 100_000,
        }
    }

    pub fn for_enumeration() -> Self {
        OracleBudget {
            max_len: Self::DEFAULT_ENUMERATE_LEN,
            ..Self::for_size()
        }
    }

    pub fn with_max_len(self, max_len: usize) -> Self {
        OracleBudget { max_len, ..self }
    }
}

/// `{"g_star":N,"count":M,"lower_bound":L,"upper_bound":U}`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub g_star: usize,
    pub count: Option<usize>,
    pub lower_bound: usize,
    pub upper_bound: usize,
}

type Bits = Vec<u64>;

fn has(bits: &[u64], i: u32) -> bool {
    bits[i as usize / 64] >> (i % 64) & 1 == 1
}

fn set(bits: &mut [u64], i: u32) {
    bits[i as usize / 64] |= 1 << (i % 64);
}

/// The distinct substrings of the subject with their splits.
struct Substrings {
    n: usize,
    /// `id_at[start * (n + 1) + len]`
    id_at: Vec<u32>,
    start: Vec<usize>,
    len: Vec<usize>,
    splits: Vec<Vec<(u32, u32)>>,
    /// For member `u` and offset `p`, the longest prefix of `u[p..]` that
    /// occurs in `u[..p]`.
    prev: Vec<Vec<usize>>,
}

impl Substrings {
    fn new(w: &[Symbol]) -> Self {
        let n = w.len();
        let mut ids: HashMap<&[Symbol], u32> = HashMap::new();
        let mut id_at = vec![u32::MAX; n * (n + 1)];
        let (mut start, mut len) = (Vec::new(), Vec::new());
        for l in 1..=n {
            for s in 0..=n - l {
                let next = ids.len() as u32;
                let id = *ids.entry(&w[s..s + l]).or_insert_with(|| {
                    start.push(s);
                    len.push(l);
                    next
                });
                id_at[s * (n + 1) + l] = id;
            }
        }
        let at = |s: usize, l: usize| id_at[s * (n + 1) + l];
        let splits = (0..start.len())
            .map(|i| {
                (1..len[i])
                    .map(|k| (at(start[i], k), at(start[i] + k, len[i] - k)))
                    .collect()
            })
            .collect();
        // lce[i][j] over w
        let mut lce = vec![0usize; (n + 1) * (n + 1)];
        for i in (0..n).rev() {
            for j in (0..n).rev() {
                if w[i] == w[j] {
                    lce[i * (n + 1) + j] = 1 + lce[(i + 1) * (n + 1) + j + 1];
                }
            }
        }
        let prev = (0..start.len())
            .map(|i| {
                let (s, l) = (start[i], len[i]);
                (0..l)
                    .map(|p| {
                        (0..p)
                            .map(|q| lce[(s + q) * (n + 1) + s + p].min(l - p).min(p - q))
                            .max()
                            .unwrap_or(0)
                    })
                    .collect()
            })
            .collect();
        Substrings {
            n,
            id_at,
            start,
            len,
            splits,
            prev,
        }
    }

    fn id(&self, s: usize, l: usize) -> u32 {
        self.id_at[s * (self.n + 1) + l]
    }

    fn count(&self) -> usize {
        self.start.len()
    }

    fn whole(&self) -> u32 {
        self.id(0, self.n)
    }

    /// Fewest phrases in a tiling of member `u` by members of `bits`,
    /// single symbols and earlier repeats, `u` itself excluded.
    fn tiling(&self, u: u32, bits: &[u64], dp: &mut Vec<usize>) -> usize {
        let (s, l) = (self.start[u as usize], self.len[u as usize]);
        let prev = &self.prev[u as usize];
        dp.clear();
        dp.resize(l + 1, usize::MAX);
        dp[0] = 0;
        for p in 0..l {
            let base = dp[p] + 1;
            let max_len = if p == 0 { l - 1 } else { l - p };
            for k in 1..=max_len {
                if (k == 1 || k <= prev[p] || has(bits, self.id(s + p, k))) && base < dp[p + k] {
                    dp[p + k] = base;
                }
            }
        }
        dp[l]
    }

    fn resolved(&self, u: u32, bits: &[u64]) -> bool {
        self.len[u as usize] == 1
            || self.splits[u as usize]
                .iter()
                .any(|&(x, y)| has(bits, x) && has(bits, y))
    }
}

enum Mode {
    /// Stop at the first closed set.
    First,
    /// Collect every closed set within the bound.
    All,
}

struct Search<'a> {
    subs: &'a Substrings,
    bound: usize,
    mode: Mode,
    visited: HashSet<Bits>,
    found: Vec<Bits>,
    nodes: u64,
    max_nodes: u64,
    dp: Vec<usize>,
}

enum Outcome {
    Continue,
    Stop,
    OutOfBudget,
}

impl Search<'_> {
    fn run(&mut self, bits: Bits, size: usize) -> Outcome {
        if !self.visited.insert(bits.clone()) {
            return Outcome::Continue;
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Outcome::OutOfBudget;
        }
        let mut pick: Option<(usize, usize, u32)> = None;
        for (word, &chunk) in bits.iter().enumerate() {
            let mut chunk = chunk;
            while chunk != 0 {
                let u = (word * 64 + chunk.trailing_zeros() as usize) as u32;
                chunk &= chunk - 1;
                if self.subs.resolved(u, &bits) {
                    continue;
                }
                let need = self.subs.tiling(u, &bits, &mut self.dp).saturating_sub(2);
                if size + need > self.bound {
                    return Outcome::Continue;
                }
                let key = (need, self.subs.len[u as usize], u);
                if pick.is_none_or(|p| key > p) {
                    pick = Some(key);
                }
            }
        }
        let Some((_, _, u)) = pick else {
            self.found.push(bits);
            return match self.mode {
                Mode::First => Outcome::Stop,
                Mode::All => Outcome::Continue,
            };
        };
        let mut children: Vec<(usize, u32, u32)> = self.subs.splits[u as usize]
            .iter()
            .map(|&(x, y)| {
                let fresh = usize::from(!has(&bits, x)) + usize::from(!has(&bits, y) && x != y);
                (fresh, x, y)
            })
            .filter(|&(fresh, _, _)| size + fresh <= self.bound)
            .collect();
        children.sort_by_key(|&(fresh, _, _)| fresh);
        for (fresh, x, y) in children {
            let mut next = bits.clone();
            set(&mut next, x);
            set(&mut next, y);
            match self.run(next, size + fresh) {
                Outcome::Continue => {}
                other => return other,
            }
        }
        Outcome::Continue
    }
}

struct Prepared {
    subs: Substrings,
    root: Bits,
    root_size: usize,
    lower: usize,
    upper: usize,
}

fn prepare(w: &Word, budget: &OracleBudget) -> Result<Prepared> {
    if w.is_empty() {
        return Err(Error::domain("the oracle needs a non-empty word"));
    }
    if !w.is_terminal_only() {
        return Err(Error::domain("oracle input must consist of terminals"));
    }
    let lower = grammar_lower_bound(w)?;
    let upper = Policy::ALL
        .iter()
        .map(|p| repair(w, p).map(|r| r.grammar.size()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .expect("two policies");
    if w.len() > budget.max_len {
        return Err(Error::Resource {
            what: format!("oracle is limited to {} symbols, got {}", budget.max_len, w.len()),
            lower: Some(lower),
            upper: Some(upper),
        });
    }
    let subs = Substrings::new(w);
    let mut root = vec![0u64; subs.count().div_ceil(64)];
    set(&mut root, subs.whole());
    for i in 0..w.len() {
        set(&mut root, subs.id(i, 1));
    }
    let root_size = root.iter().map(|c| c.count_ones() as usize).sum();
    Ok(Prepared {
        subs,
        root,
        root_size,
        lower,
        upper,
    })
}

fn out_of_budget(budget: &OracleBudget, lower: usize, upper: usize) -> Error {
    Error::Resource {
        what: format!("oracle search exceeded {} nodes", budget.max_nodes),
        lower: Some(lower),
        upper: Some(upper),
    }
}

/// Smallest closed set by iterative deepening from the lower bound.
fn search_smallest(prep: &Prepared, budget: &OracleBudget) -> Result<(usize, Option<Bits>)> {
    let mut nodes = 0;
    for bound in prep.lower.max(prep.root_size)..prep.upper {
        let mut search = Search {
            subs: &prep.subs,
            bound,
            mode: Mode::First,
            visited: HashSet::new(),
            found: Vec::new(),
            nodes,
            max_nodes: budget.max_nodes,
            dp: Vec::new(),
        };
        match search.run(prep.root.clone(), prep.root_size) {
            Outcome::OutOfBudget => return Err(out_of_budget(budget, bound, prep.upper)),
            Outcome::Stop => return Ok((bound, search.found.pop())),
            Outcome::Continue => nodes = search.nodes,
        }
    }
    Ok((prep.upper, None))
}

/// All grammars whose nonterminals derive exactly the members of `bits`.
fn grammars_of(
    subs: &Substrings,
    w: &Word,
    bits: &[u64],
    out: &mut BTreeSet<Grammar>,
    cap: usize,
) -> Result<()> {
    let members: Vec<u32> = (0..subs.count() as u32).filter(|&i| has(bits, i)).collect();
    let symbol: HashMap<u32, Symbol> = members
        .iter()
        .enumerate()
        .map(|(k, &m)| (m, Symbol::nonterminal(k as u32 + 1)))
        .collect();
    let choices: Vec<Vec<(u32, u32)>> = members
        .iter()
        .map(|&m| {
            subs.splits[m as usize]
                .iter()
                .copied()
                .filter(|&(x, y)| has(bits, x) && has(bits, y))
                .collect()
        })
        .collect();
    let mut pick = vec![0usize; members.len()];
    loop {
        let productions = members
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let lhs = symbol[&m];
                if subs.len[m as usize] == 1 {
                    Production::terminal(lhs, w[subs.start[m as usize]])
                } else {
                    let (x, y) = choices[k][pick[k]];
                    Production::pair(lhs, symbol[&x], symbol[&y])
                }
            })
            .collect();
        let g = Grammar::new(productions, symbol[&subs.whole()]);
        // A size-minimal set admits no assignment with unreachable members.
        if g.validate().is_ok() {
            out.insert(g.canonicalize()?);
            if out.len() > cap {
                return Err(Error::resource(format!("more than {cap} smallest grammars")));
            }
        }
        let mut k = 0;
        loop {
            if k == members.len() {
                return Ok(());
            }
            pick[k] += 1;
            if pick[k] < choices[k].len().max(1) {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

/// `g*(w)` together with one witness grammar.
pub fn smallest_grammar_with(w: &Word, budget: &OracleBudget) -> Result<(usize, Grammar)> {
    let prep = prepare(w, budget)?;
    let (size, bits) = search_smallest(&prep, budget)?;
    let grammar = match bits {
        Some(bits) => {
            let mut one = BTreeSet::new();
            grammars_of(&prep.subs, w, &bits, &mut one, usize::MAX)?;
            one.into_iter().next().expect("closed set yields a grammar")
        }
        None => repair(w, &Policy::FirstByScan)?.grammar.canonicalize()?,
    };
    Ok((size, grammar))
}

pub fn smallest_size_with(w: &Word, budget: &OracleBudget) -> Result<usize> {
    let prep = prepare(w, budget)?;
    Ok(search_smallest(&prep, budget)?.0)
}

/// Exact smallest SLP size under the default budget.
pub fn smallest_size(w: &Word) -> Result<usize> {
    smallest_size_with(w, &OracleBudget::for_size())
}

pub fn enumerate_smallest_with(w: &Word, budget: &OracleBudget) -> Result<BTreeSet<Grammar>> {
    let prep = prepare(w, budget)?;
    let (g_star, _) = search_smallest(&prep, budget)?;
    let mut search = Search {
        subs: &prep.subs,
        bound: g_star,
        mode: Mode::All,
        visited: HashSet::new(),
        found: Vec::new(),
        nodes: 0,
        max_nodes: budget.max_nodes,
        dp: Vec::new(),
    };
    if let Outcome::OutOfBudget = search.run(prep.root.clone(), prep.root_size) {
        return Err(out_of_budget(budget, g_star, g_star));
    }
    let mut out = BTreeSet::new();
    for bits in &search.found {
        grammars_of(&prep.subs, w, bits, &mut out, budget.max_grammars)?;
    }
    Ok(out)
}

/// Every smallest grammar of `w` up to equivalence.
pub fn enumerate_smallest(w: &Word) -> Result<BTreeSet<Grammar>> {
    enumerate_smallest_with(w, &OracleBudget::for_enumeration())
}

/// Whether `z(w) − 1 + σ ≤ g*(w)`.
pub fn verify_lower_bound(w: &Word) -> Result<bool> {
    Ok(grammar_lower_bound(w)? <= smallest_size(w)?)
}

/// Summary record plus the grammars it describes: all of `Opt(w)` when
/// enumerating, otherwise one witness.
pub fn summarize(
    w: &Word,
    enumerate: bool,
    budget: &OracleBudget,
) -> Result<(OracleSummary, Vec<Grammar>)> {
    let prep = prepare(w, budget)?;
    let (lower_bound, upper_bound) = (prep.lower, prep.upper);
    if enumerate {
        let all = enumerate_smallest_with(w, budget)?;
        let g_star = all.iter().next().map_or(upper_bound, Grammar::size);
        let summary = OracleSummary {
            g_star,
            count: Some(all.len()),
            lower_bound,
            upper_bound,
        };
        Ok((summary, all.into_iter().collect()))
    } else {
        let (g_star, witness) = smallest_grammar_with(w, budget)?;
        let summary = OracleSummary {
            g_star,
            count: None,
            lower_bound,
            upper_bound,
        };
        Ok((summary, vec![witness]))
    }
}
