//! Executable checks for the structural results about Fibonacci-family
//! words, plus the strategy table of non-RePair bigram replacements.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorize::{dense_codes, grammar_lower_bound, lz_factorize, semi_greedy, z, LzParser};
use crate::grammar::Grammar;
use crate::oracle::{enumerate_smallest, smallest_size};
use crate::repair::{
    enumerate_repair, explore_repair, most_frequent_bigrams, repair, replace_all, strategy_graph,
    Bigram, Policy, RepairLimits,
};
use crate::words::{
    fib_number, fib_word, p_word, q_word, reverse, right_rotation, Alphabet, Morphism, Symbol,
    Word,
};

pub const RNG_NAME: &str = "ChaCha8";

/// Replaces exactly the occurrences of `bigram` starting at the given
/// 1-based positions.
pub fn replace_subset(
    w: &[Symbol],
    bigram: Bigram,
    positions: &BTreeSet<usize>,
    fresh: Symbol,
) -> Result<Word> {
    if w.contains(&fresh) {
        return Err(Error::domain(format!("fresh symbol {fresh} already occurs in the word")));
    }
    let mut last_end = 0;
    for &p in positions {
        if p == 0 || p + 1 > w.len() || (w[p - 1], w[p]) != bigram {
            return Err(Error::domain(format!(
                "no occurrence of {}{} at position {p}",
                bigram.0, bigram.1
            )));
        }
        if p < last_end + 1 {
            return Err(Error::domain(format!("occurrence at {p} overlaps the previous one")));
        }
        last_end = p + 1;
    }
    let mut out = Vec::with_capacity(w.len());
    let mut i = 0;
    while i < w.len() {
        if positions.contains(&(i + 1)) {
            out.push(fresh);
            i += 2;
        } else {
            out.push(w[i]);
            i += 1;
        }
    }
    Ok(Word::from_symbols(out))
}

/// Leftmost-greedy non-overlapping occurrences, 0-based.
fn occurrences(w: &[Symbol], (x, y): Bigram) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < w.len() {
        if w[i] == x && w[i + 1] == y {
            out.push(i);
            i += 2;
        } else {
            i += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetFamily {
    /// `F_n` of either parity.
    Fib,
    FibEven,
    FibOdd,
    P,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReplaceMode {
    All,
    NotAll,
}

/// One non-RePair replacement strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StrategyCase {
    pub id: u8,
    pub family: TargetFamily,
    pub bigram: (char, char),
    pub mode: ReplaceMode,
}

const fn case(id: u8, family: TargetFamily, x: char, y: char, mode: ReplaceMode) -> StrategyCase {
    StrategyCase {
        id,
        family,
        bigram: (x, y),
        mode,
    }
}

impl StrategyCase {
    pub const ALL: [StrategyCase; 16] = {
        use ReplaceMode::*;
        use TargetFamily::*;
        [
            case(1, Fib, 'a', 'b', NotAll),
            case(2, Fib, 'a', 'a', All),
            case(3, Fib, 'a', 'a', NotAll),
            case(4, FibEven, 'b', 'a', NotAll),
            case(5, FibOdd, 'b', 'a', All),
            case(6, FibOdd, 'b', 'a', NotAll),
            case(7, P, 'a', 'b', NotAll),
            case(8, P, 'b', 'a', All),
            case(9, P, 'b', 'a', NotAll),
            case(10, P, 'b', 'b', All),
            case(11, P, 'b', 'b', NotAll),
            case(12, Q, 'a', 'b', NotAll),
            case(13, Q, 'b', 'a', All),
            case(14, Q, 'b', 'a', NotAll),
            case(15, Q, 'a', 'a', All),
            case(16, Q, 'a', 'a', NotAll),
        ]
    };

    pub fn by_id(id: u8) -> Result<StrategyCase> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::domain(format!("no strategy case {id}")))
    }

    /// The word under test at order `n` and the phrase count every
    /// replacement must reach.
    pub fn target(&self, n: u32) -> Result<(Word, usize)> {
        let ab = Alphabet::ab();
        let half = n / 2;
        let parity_ok = match self.family {
            TargetFamily::FibEven => n.is_multiple_of(2),
            TargetFamily::FibOdd => n % 2 == 1,
            _ => true,
        };
        if !parity_ok {
            return Err(Error::domain(format!("case {} does not apply to F_{n}", self.id)));
        }
        let (w, threshold) = match self.family {
            TargetFamily::Fib | TargetFamily::FibEven | TargetFamily::FibOdd => {
                if n < 5 {
                    return Err(Error::domain("F-family strategy cases need n >= 5"));
                }
                (fib_word(n, ab)?, n as usize - 1)
            }
            TargetFamily::P => {
                if half < 3 {
                    return Err(Error::domain("P-family strategy cases need n >= 6"));
                }
                (p_word(half, ab)?, 2 * half as usize - 2)
            }
            TargetFamily::Q => {
                if half < 4 {
                    return Err(Error::domain("Q-family strategy cases need n >= 8"));
                }
                (q_word(half - 1, ab)?, 2 * (half as usize - 1) - 1)
            }
        };
        let bigram = self.bigram_symbols();
        if occurrences(&w, bigram).is_empty() {
            return Err(Error::domain(format!(
                "{}{} does not occur in the case {} word",
                self.bigram.0, self.bigram.1, self.id
            )));
        }
        Ok((w, threshold))
    }

    /// The exact phrase count, for the cases where it is fixed.
    pub fn exact(&self, n: u32) -> Option<usize> {
        match self.id {
            2 if n % 2 == 1 => Some(n as usize - 1),
            5 => Some(n as usize - 1),
            _ => None,
        }
    }

    pub fn bigram_symbols(&self) -> Bigram {
        (Symbol::terminal(self.bigram.0), Symbol::terminal(self.bigram.1))
    }

    /// Orders `≤ n_max` at which the case is checked, one per distinct word.
    pub fn orders(&self, n_max: u32) -> Vec<u32> {
        let mut seen = BTreeSet::new();
        (5..=n_max)
            .filter(|&n| match self.target(n) {
                Ok((w, _)) => seen.insert(w),
                Err(_) => false,
            })
            .collect()
    }
}

impl fmt::Display for StrategyCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            TargetFamily::Fib => "F_n",
            TargetFamily::FibEven => "F_2k",
            TargetFamily::FibOdd => "F_2k+1",
            TargetFamily::P => "P",
            TargetFamily::Q => "Q",
        };
        let mode = match self.mode {
            ReplaceMode::All => "all",
            ReplaceMode::NotAll => "not all",
        };
        write!(f, "{fam}, {} {}{}", mode, self.bigram.0, self.bigram.1)
    }
}

/// The replacement word for a case, order and set of 0-based occurrence
/// starts. Used to replay counterexamples.
pub fn strategy_word(case: StrategyCase, n: u32, replaced: &[usize]) -> Result<Word> {
    let (w, _) = case.target(n)?;
    let positions = replaced.iter().map(|p| p + 1).collect();
    replace_subset(&w, case.bigram_symbols(), &positions, fresh_symbol())
}

fn fresh_symbol() -> Symbol {
    Symbol::nonterminal(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetBudget {
    /// Enumerate all subsets up to this many occurrences.
    pub exhaustive_max: usize,
    /// Random subsets tested beyond that.
    pub samples: u64,
}

impl Default for SubsetBudget {
    fn default() -> Self {
        SubsetBudget {
            exhaustive_max: 20,
            samples: 100_000,
        }
    }
}

/// Outcome of one claim check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub claim: String,
    pub params: String,
    pub passed: bool,
    /// Instances examined.
    pub tested: u64,
    pub counterexample: Option<String>,
    pub detail: Option<String>,
    pub rng: Option<String>,
    pub seed: Option<u64>,
}

impl CheckReport {
    fn new(claim: &str, params: impl Into<String>) -> Self {
        CheckReport {
            claim: claim.to_owned(),
            params: params.into(),
            passed: true,
            tested: 0,
            counterexample: None,
            detail: None,
            rng: None,
            seed: None,
        }
    }

    fn seeded(mut self, seed: u64) -> Self {
        self.rng = Some(RNG_NAME.to_owned());
        self.seed = Some(seed);
        self
    }

    /// Counts one instance; the first failure is kept.
    fn check(&mut self, ok: bool, counterexample: impl FnOnce() -> String) {
        self.tested += 1;
        if !ok && self.passed {
            self.passed = false;
            self.counterexample = Some(counterexample());
        }
    }

    /// Records an error as a failure.
    fn absorb<T>(&mut self, r: Result<T>, context: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, || format!("{}: {e}", context()));
                None
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Checks that every tested replacement word for `case` at order `n` has at
/// least the threshold number of LZ phrases.
pub fn check_strategy_case(
    case: StrategyCase,
    n: u32,
    budget: SubsetBudget,
    seed: u64,
) -> Result<CheckReport> {
    let (w, threshold) = case.target(n)?;
    let bigram = case.bigram_symbols();
    let occ = occurrences(&w, bigram);
    let k = occ.len();
    let mut report = CheckReport::new(
        &format!("strategy-{}", case.id),
        format!("n={n} {case} occurrences={k} threshold={threshold}"),
    );
    let fresh = fresh_symbol();
    let (codes, _) = dense_codes(&w);
    let fresh_code = 2u32;
    debug_assert!(codes.iter().all(|&c| c < fresh_code));
    let mut parser = LzParser::new();
    let mut buf: Vec<u32> = Vec::with_capacity(codes.len());
    let mut mask = vec![false; k];
    let mut min_z = usize::MAX;
    let mut eval = |mask: &[bool], report: &mut CheckReport, min_z: &mut usize| {
        buf.clear();
        let mut next = 0;
        let mut i = 0;
        while i < codes.len() {
            if next < k && occ[next] == i {
                if mask[next] {
                    buf.push(fresh_code);
                    i += 2;
                } else {
                    buf.push(codes[i]);
                    i += 1;
                }
                next += 1;
            } else {
                buf.push(codes[i]);
                i += 1;
            }
        }
        let zr = parser.count_codes(&buf, 3);
        *min_z = (*min_z).min(zr);
        let exact_ok = case.exact(n).is_none_or(|e| e == zr);
        report.check(zr >= threshold && exact_ok, || {
            let chosen: Vec<usize> = (0..k).filter(|&j| mask[j]).map(|j| occ[j]).collect();
            format!("n={n} replaced={chosen:?} z={zr}")
        });
    };
    match case.mode {
        ReplaceMode::All => {
            mask.fill(true);
            eval(&mask, &mut report, &mut min_z);
            let r = replace_all(&w, bigram, fresh)?;
            report.check(z(&r)? == min_z, || format!("n={n} replace_all disagrees"));
            report.tested -= 1;
        }
        ReplaceMode::NotAll if k <= budget.exhaustive_max => {
            for bits in 1u64..(1u64 << k) - 1 {
                for (j, m) in mask.iter_mut().enumerate() {
                    *m = bits >> j & 1 == 1;
                }
                eval(&mask, &mut report, &mut min_z);
            }
        }
        ReplaceMode::NotAll => {
            let mut rng = stream_rng(seed, u64::from(case.id) << 32 | u64::from(n));
            report = report.seeded(seed);
            let mut drawn = 0;
            while drawn < budget.samples {
                for m in mask.iter_mut() {
                    *m = rng.gen();
                }
                let count = mask.iter().filter(|&&m| m).count();
                if count == 0 || count == k {
                    continue;
                }
                drawn += 1;
                eval(&mask, &mut report, &mut min_z);
            }
        }
    }
    if min_z != usize::MAX {
        report.detail = Some(format!("min z = {min_z}"));
    }
    Ok(report)
}

/// Every claim the suite knows how to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Claim {
    /// Odd- and even-indexed Fibonacci numbers sum to their neighbours.
    FibLengthSums,
    /// No `bb`, no `aaa` in `F_n`.
    ForbiddenFactors,
    /// Which bigrams are most frequent in `F`, `P` and `Q` words.
    MostFrequentBigrams,
    /// Phrase-by-phrase LZ-factorization of `F_n`.
    LzOfFib,
    /// `P` and `Q` words are right-rotations of Fibonacci words.
    RotationIdentities,
    /// Phrase-by-phrase LZ-factorization of `P_i`.
    LzOfP,
    /// `z(w) ≤ |gfact(G)|` and `|gfact(G)| − 1 + σ ≤ |G|` over a grammar corpus.
    GfactBound,
    /// Commutation of φ², π and θ with the substitutions ψ, and the images
    /// of `P` and `Q` words under them.
    MorphismComposition,
    /// Every RePair grammar of `F_n` has size `n`; there are `2⌊n/2⌋−2`;
    /// all runs move along the strategy graph.
    RepairCensus,
    /// Replacing every `ab` in `F_i` yields `F_{i-1}` over `(X, a)`.
    ReplaceAb,
    /// `g*(F_n) = n = z(F_n) − 1 + 2 = |RePair(F_n)|`.
    FibSmallestSize,
    /// Replacing every `ba` in `F_{2i}` yields `P_i` over `(a, X)`.
    ReplaceBa,
    /// `(φ^{(b,a)})²(x)·b = b·π(x)` and `φ²(x)·ab = ab·θ(x)`.
    SquareShift,
    /// Shape of the semi-greedy factorization of `F_n`.
    SemiGreedyShape,
    /// `z(w) − 1 + σ ≤ g*(w)` on random words.
    LzLowerBound,
    /// Smallest grammars of `F_n` are exactly its RePair grammars.
    OptEqualsRepair,
    /// One non-RePair replacement strategy.
    Strategy(u8),
}

impl Claim {
    pub fn all() -> Vec<Claim> {
        let mut v = vec![
            Claim::FibLengthSums,
            Claim::ForbiddenFactors,
            Claim::MostFrequentBigrams,
            Claim::LzOfFib,
            Claim::RotationIdentities,
            Claim::LzOfP,
            Claim::GfactBound,
            Claim::MorphismComposition,
            Claim::RepairCensus,
            Claim::ReplaceAb,
            Claim::FibSmallestSize,
            Claim::ReplaceBa,
            Claim::SquareShift,
            Claim::SemiGreedyShape,
            Claim::LzLowerBound,
            Claim::OptEqualsRepair,
        ];
        v.extend((1..=16).map(Claim::Strategy));
        v
    }

    pub fn id(&self) -> String {
        match self {
            Claim::FibLengthSums => "fib-length-sums".into(),
            Claim::ForbiddenFactors => "forbidden-factors".into(),
            Claim::MostFrequentBigrams => "most-frequent-bigrams".into(),
            Claim::LzOfFib => "lz-of-fib".into(),
            Claim::RotationIdentities => "rotation-identities".into(),
            Claim::LzOfP => "lz-of-p".into(),
            Claim::GfactBound => "gfact-bound".into(),
            Claim::MorphismComposition => "morphism-composition".into(),
            Claim::RepairCensus => "repair-census".into(),
            Claim::ReplaceAb => "replace-ab".into(),
            Claim::FibSmallestSize => "fib-smallest-size".into(),
            Claim::ReplaceBa => "replace-ba".into(),
            Claim::SquareShift => "square-shift".into(),
            Claim::SemiGreedyShape => "semi-greedy-shape".into(),
            Claim::LzLowerBound => "lz-lower-bound".into(),
            Claim::OptEqualsRepair => "opt-equals-repair".into(),
            Claim::Strategy(k) => format!("strategy-{k}"),
        }
    }

    /// Parses `all` or a comma-separated list of claim ids.
    pub fn parse_selection(s: &str) -> Result<Vec<Claim>> {
        if s.trim() == "all" {
            return Ok(Claim::all());
        }
        let mut out: Vec<Claim> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "strategy" {
                out.extend((1..=16).map(Claim::Strategy));
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Parse("empty claim selection".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Claim> {
        Claim::all()
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::Parse(format!("unknown claim `{s}`")))
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Knobs for [`run_suite_with`].
#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub n_max: u32,
    pub seed: u64,
    pub subsets: SubsetBudget,
    /// Words in the random lower-bound sweep.
    pub sweep_words: usize,
    /// Longest word in that sweep.
    pub sweep_max_len: usize,
    /// Largest order handed to the exact oracle.
    pub oracle_n_max: u32,
    /// Random words feeding the grammar corpus.
    pub corpus_words: usize,
}

impl SuiteConfig {
    pub fn new(n_max: u32, seed: u64) -> Self {
        SuiteConfig {
            n_max,
            seed,
            subsets: SubsetBudget::default(),
            sweep_words: 10_000,
            sweep_max_len: 14,
            oracle_n_max: 9,
            corpus_words: 300,
        }
    }
}

fn ab() -> Alphabet {
    Alphabet::ab()
}

fn t(c: char) -> Symbol {
    Symbol::terminal(c)
}

fn random_word(rng: &mut ChaCha8Rng, sigma: u32, len: usize) -> Word {
    (0..len)
        .map(|_| Symbol::terminal(char::from(b'a' + rng.gen_range(0..sigma) as u8)))
        .collect()
}

/// `Σ f_{2k−1} = f_{2i}` and `Σ f_{2k} = f_{2i+1} − 1` for `k = 1..i`.
pub fn check_fib_length_sums() -> CheckReport {
    let mut r = CheckReport::new("fib-length-sums", "1 <= i <= 12");
    for i in 1..=12u32 {
        let odd: u64 = (1..=i).map(|k| fib(2 * k - 1)).sum();
        let even: u64 = (1..=i).map(|k| fib(2 * k)).sum();
        r.check(odd == fib(2 * i) && even == fib(2 * i + 1) - 1, || {
            format!("i={i} odd sum={odd} even sum={even}")
        });
    }
    r
}

/// The even-index sum in the form `f_{2i+2} − 1`. This form is false for
/// every `i ≥ 1`; the report records where it first breaks.
pub fn check_even_sum_shifted_form() -> CheckReport {
    let mut r = CheckReport::new("even-sum-shifted-form", "1 <= i <= 12");
    for i in 1..=12u32 {
        let even: u64 = (1..=i).map(|k| fib(2 * k)).sum();
        let shifted = fib(2 * i + 2) - 1;
        r.check(even == shifted, || format!("i={i} sum={even} f_(2i+2)-1={shifted}"));
    }
    r
}

fn fib(i: u32) -> u64 {
    fib_number(i)
        .ok()
        .and_then(|b| u64::try_from(b).ok())
        .expect("small Fibonacci number")
}

pub fn check_forbidden_factors(n_max: u32) -> CheckReport {
    let mut r = CheckReport::new("forbidden-factors", format!("3 <= n <= {n_max}"));
    let (bb, aaa) = (Word::terminals("bb"), Word::terminals("aaa"));
    for n in 3..=n_max {
        let Some(w) = r.absorb(fib_word(n, ab()), || format!("n={n}")) else {
            continue;
        };
        let has = |f: &Word| w.windows(f.len()).any(|x| x == &f[..]);
        r.check(!has(&bb) && !has(&aaa), || format!("n={n}"));
    }
    r
}

pub fn check_most_frequent_bigrams(n_max: u32) -> CheckReport {
    let mut r = CheckReport::new(
        "most-frequent-bigrams",
        format!("F_4..F_{n_max}, P_2..P_{h}, Q_3..Q_{h}", h = n_max / 2),
    );
    let (abg, bag) = ((t('a'), t('b')), (t('b'), t('a')));
    let sorted = |mut v: Vec<Bigram>| {
        v.sort();
        v
    };
    for n in 4..=n_max {
        let expected = if n % 2 == 0 { vec![abg, bag] } else { vec![abg] };
        let got = fib_word(n, ab()).and_then(|w| most_frequent_bigrams(&w));
        if let Some(got) = r.absorb(got, || format!("F_{n}")) {
            r.check(sorted(got) == expected, || format!("F_{n}"));
        }
    }
    for i in 2..=(n_max / 2).max(2) {
        let got = p_word(i, ab()).and_then(|w| most_frequent_bigrams(&w));
        if let Some(got) = r.absorb(got, || format!("P_{i}")) {
            r.check(got == vec![abg], || format!("P_{i}"));
        }
    }
    for i in 3..=(n_max / 2).max(3) {
        let got = q_word(i, ab()).and_then(|w| most_frequent_bigrams(&w));
        if let Some(got) = r.absorb(got, || format!("Q_{i}")) {
            r.check(got == vec![abg], || format!("Q_{i}"));
        }
    }
    r
}

pub fn check_lz_of_fib(n_max: u32) -> CheckReport {
    let mut r = CheckReport::new("lz-of-fib", format!("5 <= n <= {n_max}"));
    for n in 5..=n_max {
        let run = || -> Result<bool> {
            let lz = lz_factorize(&fib_word(n, ab())?)?;
            let mut expected = vec![Word::terminals("a"), Word::terminals("b"), Word::terminals("a")];
            for i in 4..=n - 2 {
                expected.push(reverse(&fib_word(i, ab())?));
            }
            expected.push(Word::terminals(if n % 2 == 1 { "ab" } else { "ba" }));
            Ok(lz.phrase_words() == expected)
        };
        if let Some(ok) = r.absorb(run(), || format!("n={n}")) {
            r.check(ok, || format!("n={n}"));
        }
    }
    r
}

pub fn check_rotation_identities(i_max: u32) -> CheckReport {
    let mut r = CheckReport::new("rotation-identities", format!("1 <= i <= {i_max}"));
    for i in 1..=i_max {
        let run = || -> Result<bool> {
            let p = p_word(i, ab())? == right_rotation(&fib_word(2 * i - 1, Alphabet::ba())?)?;
            let q = q_word(i, ab())? == right_rotation(&fib_word(2 * i, ab())?)?;
            Ok(p && q)
        };
        if let Some(ok) = r.absorb(run(), || format!("i={i}")) {
            r.check(ok, || format!("i={i}"));
        }
    }
    r
}

/// Phrases of `LZ(P_i)` for `i_lo ≤ i ≤ i_hi`.
pub fn check_lz_of_p(i_lo: u32, i_hi: u32) -> CheckReport {
    let mut r = CheckReport::new("lz-of-p", format!("{i_lo} <= i <= {i_hi}"));
    for i in i_lo.max(2)..=i_hi {
        let run = || -> Result<bool> {
            let lz = lz_factorize(&p_word(i, ab())?)?;
            let phrases = lz.phrase_words();
            let mut ok = phrases.len() == 2 * i as usize - 2;
            for j in 1..=2 * i - 3 {
                ok &= phrases.get(j as usize - 1) == Some(&reverse(&fib_word(j, Alphabet::ba())?));
            }
            ok &= phrases.last() == Some(&Word::terminals("b"));
            Ok(ok)
        };
        if let Some(ok) = r.absorb(run(), || format!("i={i}")) {
            r.check(ok, || format!("i={i}"));
        }
    }
    r
}

/// Grammars produced across the suite, paired with their words.
pub fn grammar_corpus(n_max: u32, seed: u64, random_words: usize) -> Result<Vec<(Word, Grammar)>> {
    let mut out = Vec::new();
    let mut push_all = |w: &Word, gs: &mut dyn Iterator<Item = Grammar>| {
        for g in gs {
            out.push((w.clone(), g));
        }
    };
    for n in 1..=n_max {
        let w = fib_word(n, ab())?;
        if n >= 3 {
            push_all(&w, &mut std::iter::once(Grammar::from_recursive_fib(n, ab())?));
        }
        push_all(&w, &mut enumerate_repair(&w)?.into_iter());
    }
    for i in 1..=n_max / 2 {
        for w in [p_word(i, ab())?, q_word(i, ab())?] {
            push_all(&w, &mut enumerate_repair(&w)?.into_iter());
        }
    }
    let mut rng = stream_rng(seed, 7);
    for k in 0..random_words {
        let sigma = rng.gen_range(1..=4);
        let len = rng.gen_range(1..=40);
        let w = random_word(&mut rng, sigma, len);
        for p in Policy::ALL {
            push_all(&w, &mut std::iter::once(repair(&w, &p)?.grammar));
        }
        let limits = RepairLimits {
            max_grammars: 2_000,
            ..RepairLimits::default()
        };
        if let Ok(ex) = explore_repair(&w, limits) {
            push_all(&w, &mut ex.grammars.into_iter());
        }
        if k % 2 == 0 && len <= 12 {
            push_all(&w, &mut enumerate_smallest(&w)?.into_iter());
        }
    }
    Ok(out)
}

pub fn check_gfact_bounds(corpus: &[(Word, Grammar)]) -> CheckReport {
    let mut r = CheckReport::new("gfact-bound", format!("{} grammars", corpus.len()));
    for (w, g) in corpus {
        let run = || -> Result<bool> {
            let gf = g.g_factorization()?;
            let sigma = w.distinct_symbols();
            Ok(g.expand()? == *w && z(w)? <= gf.len() && gf.len() - 1 + sigma <= g.size())
        };
        if let Some(ok) = r.absorb(run(), || format!("w={w}")) {
            r.check(ok, || format!("w={w} grammar={}", g.to_json()));
        }
    }
    r
}

pub fn check_morphism_composition(n_max: u32, seed: u64, samples: usize) -> CheckReport {
    let mut r = CheckReport::new(
        "morphism-composition",
        format!("{samples} random words, i <= {}", n_max / 2),
    )
    .seeded(seed);
    let (a, b) = (t('a'), t('b'));
    let psi1 = Morphism::reverse_phi(b, Word::terminals("ba")).expect("non-empty");
    let psi2 = Morphism::reverse_phi(b, Word::terminals("ab")).expect("non-empty");
    let psi3 = Morphism::reverse_phi(a, Word::terminals("ab")).expect("non-empty");
    let (phi, pi, theta) = (Morphism::phi(ab()), Morphism::pi(ab()), Morphism::theta(ab()));
    let mut rng = stream_rng(seed, 11);
    for _ in 0..samples {
        let len = rng.gen_range(1..=30);
        let x = random_word(&mut rng, 2, len);
        let run = || -> Result<bool> {
            let one = phi.apply(&phi.apply(&psi1.apply(&x)?)?)? == psi1.apply(&pi.apply(&x)?)?;
            let two = psi2.apply(&pi.apply(&x)?)? == theta.apply(&psi2.apply(&x)?)?;
            let three = psi3.apply(&theta.apply(&x)?)? == pi.apply(&psi3.apply(&x)?)?;
            Ok(one && two && three)
        };
        if let Some(ok) = r.absorb(run(), || format!("x={x}")) {
            r.check(ok, || format!("x={x}"));
        }
    }
    for i in 2..=(n_max / 2).max(2) {
        let run = || -> Result<bool> {
            let p = p_word(i, ab())?;
            let q = q_word(i, ab())?;
            Ok(psi1.apply(&p)? == fib_word(2 * i, ab())?
                && psi2.apply(&p)? == q
                && psi3.apply(&q)? == p_word(i + 1, ab())?)
        };
        if let Some(ok) = r.absorb(run(), || format!("i={i}")) {
            r.check(ok, || format!("i={i}"));
        }
    }
    r
}

pub fn check_repair_census(n_max: u32) -> CheckReport {
    let mut r = CheckReport::new("repair-census", format!("6 <= n <= {n_max}"));
    let mut counts = Vec::new();
    for n in 6..=n_max {
        let run = || -> Result<(bool, usize)> {
            let ex = explore_repair(&fib_word(n, ab())?, RepairLimits::default())?;
            let graph = strategy_graph(n)?;
            let sizes_ok = ex.grammars.iter().all(|g| g.size() == n as usize);
            let count_ok = ex.grammars.len() == 2 * (n as usize / 2) - 2;
            let classes: Option<Vec<_>> = ex.states.iter().map(|s| graph.classify(s)).collect();
            let edges_ok = classes.is_some_and(|c| {
                ex.transitions.iter().all(|tr| graph.has_edge(c[tr.from], c[tr.to]))
            });
            let paths_ok = graph.path_count() == u64::from(n / 2 - 1);
            Ok((sizes_ok && count_ok && edges_ok && paths_ok, ex.grammars.len()))
        };
        if let Some((ok, count)) = r.absorb(run(), || format!("n={n}")) {
            counts.push(count);
            r.check(ok, || format!("n={n} count={count}"));
        }
    }
    r.detail = Some(format!("counts {counts:?}"));
    r
}

pub fn check_replace_ab(n_max: u32) -> CheckReport {
    let mut r = CheckReport::new("replace-ab", format!("3 <= i <= {n_max}"));
    let x = fresh_symbol();
    for i in 3..=n_max {
        let run = || -> Result<bool> {
            let got = replace_all(&fib_word(i, ab())?, (t('a'), t('b')), x)?;
            Ok(got == fib_word(i - 1, Alphabet::new(x, 'a')?)?)
        };
        if let Some(ok) = r.absorb(run(), || format!("i={i}")) {
            r.check(ok, || format!("i={i}"));
        }
    }
    r
}

pub fn check_replace_ba(n_max: u32) -> CheckReport {
    let mut r = CheckReport::new("replace-ba", format!("2 <= i <= {}", n_max / 2));
    let x = fresh_symbol();
    for i in 2..=(n_max / 2).max(2) {
        let run = || -> Result<bool> {
            let got = replace_all(&fib_word(2 * i, ab())?, (t('b'), t('a')), x)?;
            Ok(got == p_word(i, Alphabet::new('a', x)?)?)
        };
        if let Some(ok) = r.absorb(run(), || format!("i={i}")) {
            r.check(ok, || format!("i={i}"));
        }
    }
    r
}

pub fn check_fib_smallest_size(n_max: u32, oracle_n_max: u32) -> CheckReport {
    let mut r = CheckReport::new(
        "fib-smallest-size",
        format!("bounds 5 <= n <= {n_max}, oracle 5 <= n <= {}", oracle_n_max.min(n_max)),
    );
    for n in 5..=n_max {
        let run = || -> Result<bool> {
            let w = fib_word(n, ab())?;
            let n = n as usize;
            let mut ok = grammar_lower_bound(&w)? == n;
            for p in Policy::ALL {
                ok &= repair(&w, &p)?.grammar.size() == n;
            }
            Ok(ok)
        };
        if let Some(ok) = r.absorb(run(), || format!("n={n}")) {
            r.check(ok, || format!("n={n}"));
        }
    }
    for n in 5..=oracle_n_max.min(n_max) {
        let got = fib_word(n, ab()).and_then(|w| smallest_size(&w));
        if let Some(g) = r.absorb(got, || format!("oracle n={n}")) {
            r.check(g == n as usize, || format!("oracle n={n} g*={g}"));
        }
    }
    r
}

pub fn check_square_shift(seed: u64, samples: usize) -> CheckReport {
    let mut r = CheckReport::new("square-shift", format!("{samples} random words, |x| <= 30"))
        .seeded(seed);
    let phi_ba = Morphism::phi(Alphabet::ba());
    let phi = Morphism::phi(ab());
    let (pi, theta) = (Morphism::pi(ab()), Morphism::theta(ab()));
    let (b, abw) = (Word::terminals("b"), Word::terminals("ab"));
    let mut rng = stream_rng(seed, 13);
    for _ in 0..samples {
        let len = rng.gen_range(1..=30);
        let x = random_word(&mut rng, 2, len);
        let run = || -> Result<bool> {
            let left1 = phi_ba.apply(&phi_ba.apply(&x)?)?.concat(&b);
            let right1 = b.concat(&pi.apply(&x)?);
            let left2 = phi.apply(&phi.apply(&x)?)?.concat(&abw);
            let right2 = abw.concat(&theta.apply(&x)?);
            Ok(left1 == right1 && left2 == right2)
        };
        if let Some(ok) = r.absorb(run(), || format!("x={x}")) {
            r.check(ok, || format!("x={x}"));
        }
    }
    r
}

/// Shape of `SG(F_n)` for `n_lo ≤ n ≤ n_hi`. At `n = 5` the word has only
/// four phrases, so the prefix and last-phrase conditions cannot both hold.
pub fn check_semi_greedy_shape(n_lo: u32, n_hi: u32) -> CheckReport {
    let mut r = CheckReport::new("semi-greedy-shape", format!("{n_lo} <= n <= {n_hi}"));
    for n in n_lo.max(5)..=n_hi {
        let run = || -> Result<(bool, String)> {
            let w = fib_word(n, ab())?;
            let sg = semi_greedy(&w)?;
            let phrases = sg.phrase_words();
            let starts: Vec<usize> = sg.starts().collect();
            let nn = n as usize;
            let mut ok = phrases.len() == nn - 1 && sg.len() == z(&w)?;
            ok &= phrases[..4] == ["a", "b", "a", "ab"].map(Word::terminals);
            for i in 5..=nn - 2 {
                let expected = right_rotation(&reverse(&fib_word(i as u32, ab())?))?;
                let p = &phrases[i - 1];
                let prefix = &w[..starts[i - 1]];
                ok &= *p == expected && prefix.windows(p.len()).any(|x| x == &p[..]);
            }
            let last = if n % 2 == 0 { "aba" } else { "aab" };
            ok &= phrases[nn - 2] == Word::terminals(last);
            for (k, &pos) in sg.boundaries().iter().enumerate() {
                if k == 0 || k == 2 {
                    continue;
                }
                ok &= w[pos - 1] == t('b') && w[pos] == t('a');
            }
            Ok((ok, sg.to_text()))
        };
        if let Some((ok, text)) = r.absorb(run(), || format!("n={n}")) {
            r.check(ok, || format!("n={n} SG={text}"));
        }
    }
    r
}

pub fn check_lz_lower_bound(seed: u64, words: usize, max_len: usize) -> CheckReport {
    let mut r = CheckReport::new(
        "lz-lower-bound",
        format!("{words} random binary/ternary words, |w| <= {max_len}"),
    )
    .seeded(seed);
    let mut rng = stream_rng(seed, 17);
    for _ in 0..words {
        let sigma = rng.gen_range(2..=3);
        let len = rng.gen_range(1..=max_len);
        let w = random_word(&mut rng, sigma, len);
        let run = || -> Result<(usize, usize)> { Ok((grammar_lower_bound(&w)?, smallest_size(&w)?)) };
        if let Some((lb, g)) = r.absorb(run(), || format!("w={w}")) {
            r.check(lb <= g, || format!("w={w} bound={lb} g*={g}"));
        }
    }
    r
}

pub fn check_opt_equals_repair(n_lo: u32, n_hi: u32) -> CheckReport {
    let mut r = CheckReport::new("opt-equals-repair", format!("{n_lo} <= n <= {n_hi}"));
    for n in n_lo..=n_hi {
        let run = || -> Result<(bool, usize)> {
            let w = fib_word(n, ab())?;
            let budget = crate::oracle::OracleBudget::for_enumeration().with_max_len(w.len().max(40));
            let opt = crate::oracle::enumerate_smallest_with(&w, &budget)?;
            Ok((opt == enumerate_repair(&w)?, opt.len()))
        };
        if let Some((ok, count)) = r.absorb(run(), || format!("n={n}")) {
            r.check(ok, || format!("n={n} |opt|={count}"));
        }
    }
    r
}

/// Runs one strategy case over every applicable order up to `n_max`.
pub fn check_strategy_sweep(case: StrategyCase, n_max: u32, budget: SubsetBudget, seed: u64) -> CheckReport {
    let orders = case.orders(n_max);
    let mut r = CheckReport::new(
        &format!("strategy-{}", case.id),
        format!("{case}, n in {orders:?}"),
    );
    let mut details = Vec::new();
    for n in orders {
        let Some(sub) = r.absorb(check_strategy_case(case, n, budget, seed), || format!("n={n}")) else {
            continue;
        };
        r.tested += sub.tested;
        if sub.rng.is_some() {
            r = r.seeded(seed);
        }
        if let Some(d) = &sub.detail {
            details.push(format!("n={n}: {d}"));
        }
        if !sub.passed && r.passed {
            r.passed = false;
            r.counterexample = sub.counterexample;
        }
    }
    r.detail = Some(details.join("; "));
    r
}

/// Runs the selected checks; reports come back in claim order.
pub fn run_suite_with(claims: &[Claim], cfg: &SuiteConfig) -> Vec<CheckReport> {
    let mut claims = claims.to_vec();
    claims.sort();
    claims.dedup();
    let n = cfg.n_max;
    claims
        .into_iter()
        .map(|c| match c {
            Claim::FibLengthSums => check_fib_length_sums(),
            Claim::ForbiddenFactors => check_forbidden_factors(n),
            Claim::MostFrequentBigrams => check_most_frequent_bigrams(n),
            Claim::LzOfFib => check_lz_of_fib(n),
            Claim::RotationIdentities => check_rotation_identities(12),
            Claim::LzOfP => check_lz_of_p(2, n.min(12)),
            Claim::GfactBound => match grammar_corpus(n, cfg.seed, cfg.corpus_words) {
                Ok(corpus) => check_gfact_bounds(&corpus).seeded(cfg.seed),
                Err(e) => {
                    let mut r = CheckReport::new("gfact-bound", "corpus");
                    r.check(false, || e.to_string());
                    r
                }
            },
            Claim::MorphismComposition => check_morphism_composition(n, cfg.seed, 1000),
            Claim::RepairCensus => check_repair_census(n),
            Claim::ReplaceAb => check_replace_ab(n),
            Claim::FibSmallestSize => check_fib_smallest_size(n, cfg.oracle_n_max),
            Claim::ReplaceBa => check_replace_ba(n),
            Claim::SquareShift => check_square_shift(cfg.seed, 1000),
            Claim::SemiGreedyShape => check_semi_greedy_shape(6, n),
            Claim::LzLowerBound => check_lz_lower_bound(cfg.seed, cfg.sweep_words, cfg.sweep_max_len),
            Claim::OptEqualsRepair => check_opt_equals_repair(5, n.min(cfg.oracle_n_max)),
            Claim::Strategy(k) => match StrategyCase::by_id(k) {
                Ok(case) => check_strategy_sweep(case, n, cfg.subsets, cfg.seed),
                Err(e) => {
                    let mut r = CheckReport::new(&c.id(), "");
                    r.check(false, || e.to_string());
                    r
                }
            },
        })
        .collect()
}

pub fn run_suite(claims: &[Claim], n_max: u32, seed: u64) -> Vec<CheckReport> {
    run_suite_with(claims, &SuiteConfig::new(n_max, seed))
}

/// Fixed-width table, one row per report.
pub fn reports_table(reports: &[CheckReport]) -> String {
    let width = reports.iter().map(|r| r.claim.len()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  {:<6}  {:>9}  params\n", "claim", "result", "tested");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:<6}  {:>9}  {}",
            r.claim,
            if r.passed { "pass" } else { "FAIL" },
            r.tested,
            r.params
        );
        if let Some(c) = &r.counterexample {
            let _ = writeln!(out, "{:<width$}  counterexample: {c}", "");
        }
    }
    out
}

pub fn reports_json_lines(reports: &[CheckReport]) -> String {
    reports.iter().map(|r| r.to_json() + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_replacement() {
        let x = fresh_symbol();
        let w = Word::terminals("abab");
        let got = replace_subset(&w, (t('a'), t('b')), &BTreeSet::from([1]), x).unwrap();
        assert_eq!(got, Word::from_symbols(vec![x, t('a'), t('b')]));
        let f6 = fib_word(6, ab()).unwrap();
        let all: BTreeSet<usize> = occurrences(&f6, (t('a'), t('b'))).iter().map(|p| p + 1).collect();
        let got = replace_subset(&f6, (t('a'), t('b')), &all, x).unwrap();
        assert_eq!(got, fib_word(5, Alphabet::new(x, 'a').unwrap()).unwrap());
        let same = replace_subset(&f6, (t('a'), t('b')), &BTreeSet::new(), x).unwrap();
        assert_eq!(same, f6);
        assert!(replace_subset(&w, (t('a'), t('b')), &BTreeSet::from([2]), x).is_err());
        let aaa = Word::terminals("aaa");
        assert!(replace_subset(&aaa, (t('a'), t('a')), &BTreeSet::from([1, 2]), x).is_err());
    }

    #[test]
    fn case_examples() {
        let c2 = StrategyCase::by_id(2).unwrap();
        let rep = check_strategy_case(c2, 9, SubsetBudget::default(), 0).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.detail.as_deref(), Some("min z = 8"));
        let c5 = StrategyCase::by_id(5).unwrap();
        let rep = check_strategy_case(c5, 9, SubsetBudget::default(), 0).unwrap();
        assert_eq!(rep.detail.as_deref(), Some("min z = 8"));
        let c1 = StrategyCase::by_id(1).unwrap();
        let r1 = strategy_word(c1, 7, &[0]).unwrap();
        assert!(z(&r1).unwrap() >= 6);
        assert!(StrategyCase::by_id(4).unwrap().target(9).is_err());
        assert!(StrategyCase::by_id(17).is_err());
    }

    #[test]
    fn exhaustive_subset_count() {
        let c1 = StrategyCase::by_id(1).unwrap();
        let (w, _) = c1.target(7).unwrap();
        let k = occurrences(&w, c1.bigram_symbols()).len();
        let rep = check_strategy_case(c1, 7, SubsetBudget::default(), 0).unwrap();
        assert_eq!(rep.tested, (1u64 << k) - 2);
    }

    #[test]
    fn sampled_cases_are_reproducible() {
        let c1 = StrategyCase::by_id(1).unwrap();
        let budget = SubsetBudget {
            exhaustive_max: 4,
            samples: 200,
        };
        let a = check_strategy_case(c1, 10, budget, 5).unwrap();
        let b = check_strategy_case(c1, 10, budget, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tested, 200);
        assert_eq!(a.rng.as_deref(), Some(RNG_NAME));
    }

    #[test]
    fn claim_ids_round_trip() {
        for c in Claim::all() {
            assert_eq!(c.id().parse::<Claim>().unwrap(), c);
        }
        assert_eq!(Claim::parse_selection("all").unwrap().len(), 32);
        assert_eq!(
            Claim::parse_selection("repair-census, strategy-3").unwrap(),
            vec![Claim::RepairCensus, Claim::Strategy(3)]
        );
        assert!(Claim::parse_selection("nonsense").is_err());
    }

    #[test]
    fn quick_claims_pass() {
        let cfg = SuiteConfig {
            sweep_words: 50,
            corpus_words: 10,
            oracle_n_max: 7,
            subsets: SubsetBudget {
                exhaustive_max: 10,
                samples: 100,
            },
            ..SuiteConfig::new(10, 0)
        };
        let reports = run_suite_with(&Claim::all(), &cfg);
        let failed: Vec<CheckReport> = reports.iter().filter(|r| !r.passed).cloned().collect();
        assert!(failed.is_empty(), "{}", reports_table(&failed));
        let table = reports_table(&reports);
        assert!(table.lines().count() > 32);
        let lines = reports_json_lines(&reports);
        for line in lines.lines() {
            let back: CheckReport = serde_json::from_str(line).unwrap();
            assert!(back.passed);
        }
    }
}
