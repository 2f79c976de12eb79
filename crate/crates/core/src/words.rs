//! Binary words: balance, mechanical and Christoffel words, unbalance
//! witnesses, and the alphabet reduction that rewrites an unbalanced
//! periodic word over a two-word alphabet `{u, v}`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite word over `{0, 1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from letters; every letter must be 0 or 1.
    pub fn from_letters(letters: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidLetter(char::from(b'0' + bad.min(9))));
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of 1-letters.
    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&l| l == 1).count()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn pow(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Cyclic rotation moving the first `k` letters to the end.
    pub fn rotated(&self, k: usize) -> Word {
        if self.is_empty() {
            return self.clone();
        }
        let mut letters = self.0.clone();
        letters.rotate_left(k % self.len());
        Word(letters)
    }

    pub fn is_factor_of(&self, other: &Word) -> bool {
        contains_factor(other.letters(), self.letters())
    }

    pub fn is_balanced(&self) -> bool {
        is_balanced(self)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            f.write_str(if l == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidLetter(other)),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The eventually periodic infinite word `preperiod · cycle · cycle · …`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicWord {
    preperiod: Word,
    cycle: Word,
}

impl PeriodicWord {
    pub fn new(preperiod: Word, cycle: Word) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::EmptyCycle);
        }
        Ok(PeriodicWord { preperiod, cycle })
    }

    /// The purely periodic word `cycle^∞`.
    pub fn purely(cycle: Word) -> Result<Self> {
        Self::new(Word::empty(), cycle)
    }

    pub fn preperiod(&self) -> &Word {
        &self.preperiod
    }

    pub fn cycle(&self) -> &Word {
        &self.cycle
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.preperiod.is_empty()
    }

    /// The first `n` letters.
    pub fn expand(&self, n: usize) -> Word {
        let pre = self.preperiod.letters();
        let cyc = self.cycle.letters();
        Word(
            (0..n)
                .map(|i| if i < pre.len() { pre[i] } else { cyc[(i - pre.len()) % cyc.len()] })
                .collect(),
        )
    }

    /// Every factor of the infinite word starts (up to repetition) at a
    /// position below this bound.
    fn start_bound(&self) -> usize {
        self.preperiod.len() + self.cycle.len()
    }

    /// Factor length up to which balance is checked by [`PeriodicWord::is_balanced`].
    ///
    /// For lengths `L ≥ |preperiod|` the spread of 1-counts over factors of
    /// length `L + |cycle|` equals the spread at length `L`, so scanning
    /// lengths up to `|preperiod| + |cycle|` is exact; the default adds one
    /// more cycle of slack.
    pub fn default_horizon(&self) -> usize {
        self.preperiod.len() + 2 * self.cycle.len()
    }

    /// True iff all equal-length factors of length at most `horizon` have
    /// 1-counts differing by at most one.
    pub fn is_balanced_within(&self, horizon: usize) -> bool {
        let text = self.expand(self.start_bound() + horizon);
        spread_at_most_one(text.letters(), horizon, Some(self.start_bound()))
    }

    pub fn is_balanced(&self) -> bool {
        self.is_balanced_within(self.default_horizon())
    }

    /// True iff `factor` occurs somewhere in the infinite word.
    pub fn has_factor(&self, factor: &Word) -> bool {
        let text = self.expand(self.start_bound() + factor.len());
        contains_factor(text.letters(), factor.letters())
    }
}

impl fmt::Display for PeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})^∞", self.preperiod, self.cycle)
    }
}

fn contains_factor(text: &[u8], factor: &[u8]) -> bool {
    factor.is_empty() || text.windows(factor.len()).any(|w| w == factor)
}

fn prefix_sums(text: &[u8]) -> Vec<usize> {
    let mut sums = Vec::with_capacity(text.len() + 1);
    sums.push(0);
    for &l in text {
        sums.push(sums.last().unwrap() + l as usize);
    }
    sums
}

/// Checks that for every length `1..=max_len` the 1-counts of factors of
/// `text` (starting below `start_limit`, if given) span at most one value.
fn spread_at_most_one(text: &[u8], max_len: usize, start_limit: Option<usize>) -> bool {
    let sums = prefix_sums(text);
    for len in 1..=max_len.min(text.len()) {
        let last = text.len() - len;
        let last = start_limit.map_or(last, |k| last.min(k.saturating_sub(1)));
        let (mut lo, mut hi) = (usize::MAX, 0usize);
        for i in 0..=last {
            let c = sums[i + len] - sums[i];
            lo = lo.min(c);
            hi = hi.max(c);
            if hi - lo > 1 {
                return false;
            }
        }
    }
    true
}

/// True iff any two equal-length factors of `w` have 1-counts differing by at most one.
pub fn is_balanced(w: &Word) -> bool {
    spread_at_most_one(w.letters(), w.len(), None)
}

/// Shortest `w` (ties broken lexicographically) such that `0w0` and `1w1`
/// are both factors of `text`, scanning factors of length at most `max_len`
/// that start below `start_limit`.
fn shortest_witness(text: &[u8], max_len: usize, start_limit: Option<usize>) -> Option<Word> {
    let max_len = max_len.min(text.len());
    for len in 2..=max_len {
        let last = text.len() - len;
        let last = start_limit.map_or(last, |k| last.min(k.saturating_sub(1)));
        let mut zeros: HashSet<&[u8]> = HashSet::new();
        let mut ones: HashSet<&[u8]> = HashSet::new();
        for i in 0..=last {
            let f = &text[i..i + len];
            if f[0] == f[len - 1] {
                let middle = &f[1..len - 1];
                if f[0] == 0 {
                    zeros.insert(middle);
                } else {
                    ones.insert(middle);
                }
            }
        }
        if let Some(best) = zeros.intersection(&ones).min() {
            return Some(Word(best.to_vec()));
        }
    }
    None
}

/// For an unbalanced word, returns the shortest `w` such that `0w0` and
/// `1w1` are both factors; `None` iff the word is balanced.
pub fn unbalance_witness(x: &Word) -> Option<Word> {
    shortest_witness(x.letters(), x.len(), None)
}

/// [`unbalance_witness`] for an eventually periodic infinite word.
pub fn unbalance_witness_periodic(x: &PeriodicWord) -> Option<Word> {
    let horizon = x.default_horizon();
    let text = x.expand(x.start_bound() + horizon);
    shortest_witness(text.letters(), horizon, Some(x.start_bound()))
}

/// A reduced fraction `num/den` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SlopeFraction {
    num: u64,
    den: u64,
}

impl SlopeFraction {
    pub const ZERO: SlopeFraction = SlopeFraction { num: 0, den: 1 };
    pub const ONE: SlopeFraction = SlopeFraction { num: 1, den: 1 };

    /// Reduces `num/den` to lowest terms.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::InvalidSlope(format!("{num}/{den}")));
        }
        let g = num.gcd(&den);
        Ok(SlopeFraction { num: num / g, den: den / g })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn mediant(&self, other: &SlopeFraction) -> SlopeFraction {
        // Mediants of Farey neighbours are already reduced; reduce anyway for
        // arbitrary inputs.
        SlopeFraction::new(self.num + other.num, self.den + other.den)
            .expect("mediant of slopes in [0,1] lies in [0,1]")
    }

    /// `|p1 q2 − p2 q1| = 1`.
    pub fn is_farey_neighbor(&self, other: &SlopeFraction) -> bool {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.abs_diff(rhs) == 1
    }

    /// `1 − num/den`.
    pub fn complement(&self) -> SlopeFraction {
        SlopeFraction { num: self.den - self.num, den: self.den }
    }
}

impl PartialOrd for SlopeFraction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SlopeFraction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for SlopeFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for SlopeFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSlope(s.to_string());
        let (p, q) = match s.trim().split_once('/') {
            Some((p, q)) => (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        SlopeFraction::new(p, q).map_err(|_| bad())
    }
}

impl Serialize for SlopeFraction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SlopeFraction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// First `n` letters of the mechanical word `i_k = ⌊kα⌋ − ⌊(k−1)α⌋` for an
/// exact `α ∈ [0, 1]`.
pub fn mechanical_word_exact(alpha: &BigRational, n: usize) -> Word {
    let floor_at = |k: usize| (alpha * BigInt::from(k)).floor().to_integer();
    let mut prev = BigInt::zero();
    let mut letters = Vec::with_capacity(n);
    for k in 1..=n {
        let cur = floor_at(k);
        letters.push(if cur > prev { 1 } else { 0 });
        prev = cur;
    }
    Word(letters)
}

/// First `n` letters of the mechanical word of a rational slope.
pub fn mechanical_word(alpha: SlopeFraction, n: usize) -> Word {
    let (p, q) = (alpha.num as u128, alpha.den as u128);
    Word((1..=n as u128).map(|k| ((k * p) / q - ((k - 1) * p) / q) as u8).collect())
}

/// Mechanical word of a real slope, using the exact binary value of `alpha`.
pub fn mechanical_word_real(alpha: f64, n: usize) -> Result<Word> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("slope {alpha} outside [0, 1]")));
    }
    let exact = BigRational::from_float(alpha).ok_or_else(|| Error::InvalidArgument(format!("slope {alpha}")))?;
    Ok(mechanical_word_exact(&exact, n))
}

/// The period of the mechanical word of slope `p/q`: its first `q` letters.
pub fn christoffel_cycle(slope: SlopeFraction) -> Word {
    mechanical_word(slope, slope.den as usize)
}

/// True iff `x^∞` is balanced.
///
/// Unbalancedness of `x^∞` is always witnessed by factors of length at most
/// `|x|`, so a window of `2|x|` letters decides it.
pub fn cyclic_is_balanced(x: &Word) -> bool {
    if x.is_empty() {
        return true;
    }
    let text = x.pow(2);
    spread_at_most_one(text.letters(), x.len(), Some(x.len()))
}

/// Maximum over all factors `f` of `w` of `| |f|_1 − |f|·α |`.
pub fn sturmian_deviation(w: &Word, alpha: SlopeFraction) -> BigRational {
    let sums = prefix_sums(w.letters());
    let (p, q) = (BigInt::from(alpha.num), BigInt::from(alpha.den));
    // |q·ones − len·p| / q, maximised over integer numerators.
    let mut best = BigInt::zero();
    for i in 0..w.len() {
        for j in i + 1..=w.len() {
            let ones = BigInt::from(sums[j] - sums[i]);
            let len = BigInt::from(j - i);
            let dev = (&q * ones - len * &p).abs();
            if dev > best {
                best = dev;
            }
        }
    }
    BigRational::new(best, q)
}

/// An eventually periodic word over a two-letter meta alphabet; `false`
/// stands for the current `u`, `true` for the current `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaWord {
    pub pre: Vec<bool>,
    pub cycle: Vec<bool>,
}

impl MetaWord {
    fn at(&self, i: usize) -> bool {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.cycle[(i - self.pre.len()) % self.cycle.len()]
        }
    }

    fn has_factor(&self, factor: &[bool]) -> bool {
        let n = self.pre.len() + self.cycle.len() + factor.len();
        let text: Vec<bool> = (0..n).map(|i| self.at(i)).collect();
        factor.is_empty() || text.windows(factor.len()).any(|w| w == factor)
    }

    /// Re-tokenises over `{a, ba}` where `b` is the meta letter `b_letter`.
    /// Returns `None` if some `b` is not followed by `a`.
    fn reparse(&self, b_letter: bool) -> Option<MetaWord> {
        let mut pre = self.pre.clone();
        let mut cycle = self.cycle.clone();
        let needs_shift =
            *cycle.last().unwrap() == b_letter || pre.last().is_some_and(|&l| l == b_letter);
        if needs_shift {
            pre.push(cycle[0]);
            cycle.rotate_left(1);
        }
        Some(MetaWord { pre: tokenize(&pre, b_letter)?, cycle: tokenize(&cycle, b_letter)? })
    }

    /// Expands the cycle (only) into binary letters.
    fn expand_cycle(&self, u: &Word, v: &Word) -> Word {
        meta_to_binary(&self.cycle, u, v)
    }
}

fn meta_to_binary(meta: &[bool], u: &Word, v: &Word) -> Word {
    let mut letters = Vec::new();
    for &m in meta {
        letters.extend_from_slice(if m { v.letters() } else { u.letters() });
    }
    Word(letters)
}

/// Tokenises a finite sequence over `{a, b}` into `{a → false, ba → true}`.
fn tokenize(seq: &[bool], b_letter: bool) -> Option<Vec<bool>> {
    let mut out = Vec::with_capacity(seq.len());
    let mut i = 0;
    while i < seq.len() {
        if seq[i] == b_letter {
            if i + 1 >= seq.len() || seq[i + 1] == b_letter {
                return None;
            }
            out.push(true);
            i += 2;
        } else {
            out.push(false);
            i += 1;
        }
    }
    Some(out)
}

/// One rewriting step `{a, b} → {a, ba}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionStep {
    pub a: Word,
    pub b: Word,
    /// Binary length of the witness before the step.
    pub witness_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphabetReduction {
    pub u: Word,
    pub v: Word,
    /// The input word parsed over `{u, v}`.
    pub meta: MetaWord,
    /// Witness over `{u, v}`: both `u·w·u` and `v·w·v` occur in `meta`.
    pub witness: Vec<bool>,
    pub steps: Vec<ReductionStep>,
}

/// Rewrites an unbalanced purely periodic word over a two-word alphabet
/// `{u, v}` in which both `uu` and `vv` occur.
///
/// Starting from `u = 0`, `v = 1` and the shortest unbalance witness `w`,
/// each step picks `b` as the meta letter whose square is absent, strips
/// the leading `a` from `w`, and re-tokenises everything over `{a, ba}`.
/// The binary length of `w` strictly decreases, so the loop terminates.
pub fn alphabet_reduce(s: &PeriodicWord) -> Result<AlphabetReduction> {
    if !s.is_purely_periodic() {
        return Err(Error::NotRecurrent);
    }
    let w0 = unbalance_witness_periodic(s).ok_or(Error::BalancedInput)?;

    let mut u = Word(vec![0]);
    let mut v = Word(vec![1]);
    let mut meta = MetaWord { pre: Vec::new(), cycle: s.cycle.letters().iter().map(|&l| l == 1).collect() };
    let mut w: Vec<bool> = w0.letters().iter().map(|&l| l == 1).collect();
    let mut steps = Vec::new();

    loop {
        debug_assert!({
            let mut uwu = vec![false];
            uwu.extend_from_slice(&w);
            uwu.push(false);
            let mut vwv = vec![true];
            vwv.extend_from_slice(&w);
            vwv.push(true);
            meta.has_factor(&uwu) && meta.has_factor(&vwv)
        });
        let has_uu = meta.has_factor(&[false, false]);
        let has_vv = meta.has_factor(&[true, true]);
        if has_uu && has_vv {
            break;
        }
        // b is the meta letter whose square is absent.
        let b_letter = !has_vv;
        let (a_word, b_word) = if b_letter { (u.clone(), v.clone()) } else { (v.clone(), u.clone()) };
        let witness_len = meta_to_binary(&w, &u, &v).len();

        if w.first() != Some(&!b_letter) {
            return Err(Error::Internal(format!("witness does not start with a in step {}", steps.len())));
        }
        let rest = tokenize(&w[1..], b_letter)
            .ok_or_else(|| Error::Internal("witness is not a word over {a, ba}".into()))?;
        meta = meta.reparse(b_letter).ok_or_else(|| Error::Internal("word is not over {a, ba}".into()))?;
        steps.push(ReductionStep { a: a_word.clone(), b: b_word.clone(), witness_len });
        v = b_word.concat(&a_word);
        u = a_word;
        w = rest;
    }

    Ok(AlphabetReduction { u, v, meta, witness: w, steps })
}

/// The three equal-weight words built from an unbalanced recurrent word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmplificationWords {
    pub w0: Word,
    pub w1: Word,
    pub w2: Word,
    pub u: Word,
    pub v: Word,
    pub p: usize,
    pub q: usize,
    pub m: usize,
    /// Offset of an occurrence of `w0` in the expansion of the input word.
    pub offset: usize,
    /// True when the pattern was found with the roles of `u` and `v`
    /// swapped; the `u`/`v` fields already hold the swapped roles.
    pub mirrored: bool,
}

/// Match of `x y^{q+1} (xy)^m x^{p+1} y` starting at meta position `start`.
fn match_pattern(meta: &[bool], start: usize, x: bool) -> Option<(usize, usize, usize, usize)> {
    let n = meta.len();
    let at = |i: usize| meta[i % n];
    let limit = start + 3 * n + 4;
    let y = !x;
    let mut pos = start;
    if at(pos) != x {
        return None;
    }
    pos += 1;
    let run_start = pos;
    while at(pos) == y {
        pos += 1;
        if pos > limit {
            return None;
        }
    }
    let y_run = pos - run_start;
    if y_run < 2 {
        return None;
    }
    let mut m = 0;
    loop {
        let x_start = pos;
        while at(pos) == x {
            pos += 1;
            if pos > limit {
                return None;
            }
        }
        let x_run = pos - x_start;
        if x_run >= 2 {
            // the run is followed by a y
            return Some((x_run - 1, y_run - 1, m, pos + 1 - start));
        }
        let y_start = pos;
        while at(pos) == y {
            pos += 1;
            if pos > limit {
                return None;
            }
        }
        if pos - y_start != 1 {
            return None;
        }
        m += 1;
    }
}

/// Builds `w0 = u v^{q+1} (uv)^m u^{p+1} v`, `w1 = v u v^q (uv)^m u^p v u`
/// and `w2 = u v u^p (vu)^m v^q u v` for an unbalanced recurrent word.
///
/// The pattern is searched in the cyclic meta word with minimal binary
/// length (ties: earliest start); the mirrored pattern
/// `v u^{p+1} (vu)^m v^{q+1} u` is tried when the direct one is absent.
pub fn amplification_words(s: &PeriodicWord) -> Result<AmplificationWords> {
    let red = alphabet_reduce(s)?;
    let cyc = &red.meta.cycle;

    for mirrored in [false, true] {
        let (u, v) = if mirrored { (&red.v, &red.u) } else { (&red.u, &red.v) };
        let x = mirrored; // meta letter playing the role of u
        let mut best: Option<(usize, usize, (usize, usize, usize))> = None;
        for start in 0..cyc.len() {
            if let Some((p, q, m, _)) = match_pattern(cyc, start, x) {
                let blen = u.len() * (p + m + 2) + v.len() * (q + m + 2);
                if best.as_ref().is_none_or(|(l, _, _)| blen < *l) {
                    best = Some((blen, start, (p, q, m)));
                }
            }
        }
        let Some((_, start, (p, q, m))) = best else { continue };

        let uv = u.concat(v);
        let vu = v.concat(u);
        let w0 = u.concat(&v.pow(q + 1)).concat(&uv.pow(m)).concat(&u.pow(p + 1)).concat(v);
        let w1 = v.concat(u).concat(&v.pow(q)).concat(&uv.pow(m)).concat(&u.pow(p)).concat(v).concat(u);
        let w2 = u.concat(v).concat(&u.pow(p)).concat(&vu.pow(m)).concat(&v.pow(q)).concat(u).concat(v);

        let pre_len = meta_to_binary(&red.meta.pre, &red.u, &red.v).len();
        let offset = pre_len + meta_to_binary(&cyc[..start], &red.u, &red.v).len();
        let cycle_len = red.meta.expand_cycle(&red.u, &red.v).len();
        let expansion = s.expand(offset + w0.len() + cycle_len);
        if expansion.letters()[offset..offset + w0.len()] != *w0.letters() {
            return Err(Error::Internal(format!("w0 = {w0} not found at offset {offset}")));
        }
        return Ok(AmplificationWords { w0, w1, w2, u: u.clone(), v: v.clone(), p, q, m, offset, mirrored });
    }
    Err(Error::Internal("no w0 pattern in the reduced word".into()))
}

/// Convenience: the continued-fraction convergents of an exact value in
/// `[0, 1]` with denominators at most `max_q`.
pub fn convergents(alpha: &BigRational, max_q: u64) -> Vec<SlopeFraction> {
    let mut out = Vec::new();
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::from(1));
    let (mut k_prev, mut k) = (BigInt::from(1), BigInt::zero());
    let mut x = alpha.clone();
    loop {
        let a = x.floor().to_integer();
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        let (Some(num), Some(den)) = (h_next.to_u64(), k_next.to_u64()) else { break };
        if den > max_q {
            break;
        }
        if let Ok(f) = SlopeFraction::new(num, den) {
            out.push(f);
        }
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        let frac = &x - BigRational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        x = frac.recip();
    }
    out
}
