//! Lyapunov exponents along Christoffel cycles, joint spectral radius
//! bounds, exact trace maximization over fixed letter counts, and exact
//! checks of the trace identities behind the uniqueness argument.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mat2::{
    gamma_from_trace, ln_bigint, ln_spectral_radius_int, rational_to_f64, spectral_radius, IntegerPair, Mat2Q,
    Mat2Z, QuadraticNumber, Q,
};
use crate::pairs::{classify, MatrixPair};
use crate::words::{
    christoffel_cycle, convergents, cyclic_is_balanced, amplification_words, PeriodicWord, AmplificationWords, SlopeFraction,
    Word,
};

/// `χ` at a rational slope together with the exact spectral radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeValue {
    pub slope: SlopeFraction,
    pub chi: f64,
    pub exact_radius: QuadraticNumber,
}

/// `(1/q)·ln ρ([c])` for the Christoffel cycle `c` of `p/q`.
pub fn chi_rational(pair: &MatrixPair, slope: SlopeFraction) -> SlopeValue {
    let product = pair.product(&christoffel_cycle(slope));
    let exact_radius = spectral_radius(&product);
    let chi = crate::mat2::ln_spectral_radius_from(&product.trace(), &product.det()) / slope.den() as f64;
    SlopeValue { slope, chi, exact_radius }
}

/// Fast evaluation of `f(p/q) = χ(pair, μ_{p/q})` on integer products.
#[derive(Clone, Debug)]
pub struct ChiEvaluator {
    ints: IntegerPair,
}

impl ChiEvaluator {
    pub fn new(pair: &MatrixPair) -> Self {
        ChiEvaluator { ints: IntegerPair::new(pair.a(), pair.b()) }
    }

    /// Integer product of the Christoffel cycle of `slope`.
    pub fn cycle_product(&self, slope: SlopeFraction) -> Mat2Z {
        self.ints.product(&christoffel_cycle(slope))
    }

    pub fn generator(&self, letter: usize) -> &Mat2Z {
        &self.ints.mats[letter]
    }

    /// `f` from an integer cycle product and its slope.
    pub fn chi_from_product(&self, slope: SlopeFraction, m: &Mat2Z) -> f64 {
        let (q, p) = (slope.den() as usize, slope.num() as usize);
        (ln_spectral_radius_int(&m.trace(), &m.det()) - self.ints.ln_den(q - p, p)) / q as f64
    }

    pub fn chi(&self, slope: SlopeFraction) -> f64 {
        self.chi_from_product(slope, &self.cycle_product(slope))
    }
}

/// Approximation of `χ` at a real slope through continued-fraction
/// convergents with denominator at most `max_q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrrationalChi {
    pub value: f64,
    /// `|f(last) − f(previous)|`; zero when the input is itself a
    /// convergent.
    pub error_bound: f64,
    pub convergent: SlopeFraction,
    pub convergents: Vec<SlopeFraction>,
}

pub fn chi_irrational_approx(pair: &MatrixPair, alpha: f64, max_q: u64) -> Result<IrrationalChi> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("slope {alpha} outside [0, 1]")));
    }
    let exact = BigRational::from_float(alpha).ok_or_else(|| Error::InvalidArgument(format!("slope {alpha}")))?;
    chi_irrational_exact(pair, &exact, max_q)
}

pub fn chi_irrational_exact(pair: &MatrixPair, alpha: &BigRational, max_q: u64) -> Result<IrrationalChi> {
    let convs = convergents(alpha, max_q.max(1));
    let eval = ChiEvaluator::new(pair);
    let last = *convs.last().ok_or_else(|| Error::InvalidArgument("no convergent".into()))?;
    let value = eval.chi(last);
    let error_bound = if last.to_rational() == *alpha {
        0.0
    } else if convs.len() >= 2 {
        (value - eval.chi(convs[convs.len() - 2])).abs()
    } else {
        f64::INFINITY
    };
    Ok(IrrationalChi { value, error_bound, convergent: last, convergents: convs })
}

/// Bounds on the joint spectral radius from words of bounded length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JsrBounds {
    /// `max ρ([w])^{1/|w|}` over non-empty words with `|w| ≤ depth`.
    pub lower: f64,
    /// `max ‖[w]‖^{1/depth}` over words of length `depth`, Hilbert–Schmidt norm.
    pub upper: f64,
    pub depth: usize,
    pub argmax_word: Word,
    /// `max ‖[w]‖ / lower^{|w|}` over the enumerated words.
    pub c_hat: f64,
}

pub const MAX_JSR_DEPTH: usize = 16;

pub fn jsr_bounds(pair: &MatrixPair, depth: usize) -> Result<JsrBounds> {
    if depth == 0 || depth > MAX_JSR_DEPTH {
        return Err(Error::InvalidArgument(format!("depth must be in 1..={MAX_JSR_DEPTH}, got {depth}")));
    }
    let ints = IntegerPair::new(pair.a(), pair.b());
    // level k: (word, integer product, zeros, ones)
    let mut level: Vec<(Vec<u8>, Mat2Z, usize)> = vec![(Vec::new(), Mat2Z::identity(), 0)];
    let mut best: Option<(f64, Word)> = None;
    // ln of HS norms per length, to build Ĉ once `lower` is known
    let mut ln_norms: Vec<(usize, f64)> = Vec::new();
    let mut ln_upper = f64::NEG_INFINITY;
    let mats = &ints.mats;
    for len in 1..=depth {
        level = level
            .into_par_iter()
            .flat_map_iter(|(w, m, ones)| {
                (0..2u8).map(move |l| {
                    let mut w2 = w.clone();
                    w2.push(l);
                    (w2, &m * &mats[l as usize], ones + l as usize)
                })
            })
            .collect();
        let stats: Vec<(f64, f64)> = level
            .par_iter()
            .map(|(_, m, ones)| {
                let ln_den = ints.ln_den(len - ones, *ones);
                let ln_rho = ln_spectral_radius_int(&m.trace(), &m.det()) - ln_den;
                let ln_norm = 0.5 * ln_bigint(&m.hs_norm_sq()) - ln_den;
                (ln_rho / len as f64, ln_norm)
            })
            .collect();
        for ((w, _, _), (rate, ln_norm)) in level.iter().zip(&stats) {
            // a later word replaces the incumbent only if clearly larger
            let better = match &best {
                None => true,
                Some((b, _)) => *rate > *b + 1e-12 * b.abs().max(1.0),
            };
            if better {
                best = Some((*rate, Word::from_letters(w.clone())?));
            }
            ln_norms.push((len, *ln_norm));
            if len == depth {
                ln_upper = ln_upper.max(*ln_norm / depth as f64);
            }
        }
    }
    let (ln_lower, argmax_word) = best.expect("depth ≥ 1");
    let ln_c = ln_norms.iter().map(|(len, n)| n - *len as f64 * ln_lower).fold(f64::NEG_INFINITY, f64::max);
    Ok(JsrBounds { lower: ln_lower.exp(), upper: ln_upper.exp(), depth, argmax_word, c_hat: ln_c.exp() })
}

/// One row of a [`TraceTable`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub word: Word,
    #[serde(serialize_with = "crate::lyapunov::ser_rational")]
    pub trace: Q,
    pub is_cyclic_balanced: bool,
    pub is_maximizer: bool,
}

pub(crate) fn ser_rational<S: serde::Serializer>(r: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

/// Exact traces over `𝓧_{l,n} = {x ∈ {0,1}ⁿ : |x|₁ = l}` in lexicographic
/// order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceTable {
    pub n: usize,
    pub l: usize,
    pub entries: Vec<TraceEntry>,
    pub maximizers: Vec<Word>,
}

impl TraceTable {
    pub fn trace_of(&self, w: &Word) -> Option<&Q> {
        self.entries.binary_search_by(|e| e.word.cmp(w)).ok().map(|i| &self.entries[i].trace)
    }

    /// True iff the maximizers are exactly the words `x` with `x^∞` balanced.
    pub fn maximizers_are_balanced_words(&self) -> bool {
        self.entries.iter().all(|e| e.is_maximizer == e.is_cyclic_balanced)
    }
}

pub const MAX_TRACE_N: usize = 24;

/// All words of length `n` with `l` ones, lexicographically, with their
/// integer products.
fn enumerate_class(ints: &IntegerPair, l: usize, n: usize) -> Vec<(Vec<u8>, Mat2Z)> {
    fn extend(
        ints: &IntegerPair,
        prefix: Vec<u8>,
        m: Mat2Z,
        ones_left: usize,
        len_left: usize,
        out: &mut Vec<(Vec<u8>, Mat2Z)>,
    ) {
        if len_left == 0 {
            out.push((prefix, m));
            return;
        }
        for letter in 0..2u8 {
            let ones_after = ones_left as isize - letter as isize;
            if ones_after < 0 || ones_after as usize > len_left - 1 {
                continue;
            }
            let mut p = prefix.clone();
            p.push(letter);
            let next = &m * &ints.mats[letter as usize];
            extend(ints, p, next, ones_after as usize, len_left - 1, out);
        }
    }

    // split on short prefixes and finish each in parallel
    let split = n.min(8);
    let mut seeds = Vec::new();
    for bits in 0..(1u32 << split) {
        let prefix: Vec<u8> = (0..split).rev().map(|i| ((bits >> i) & 1) as u8).collect();
        let ones = prefix.iter().filter(|&&b| b == 1).count();
        if ones <= l && l - ones <= n - split {
            seeds.push(prefix);
        }
    }
    seeds
        .into_par_iter()
        .flat_map_iter(|prefix| {
            let ones = prefix.iter().filter(|&&b| b == 1).count();
            let mut m = Mat2Z::identity();
            for &b in &prefix {
                m = &m * &ints.mats[b as usize];
            }
            let mut out = Vec::new();
            extend(ints, prefix, m, l - ones, n - split, &mut out);
            out
        })
        .collect()
}

/// Sign of `tr` after scaling each generator into `𝔞`: the product of
/// the trace signs of the letters used.
fn scaled_sign(pair: &MatrixPair, zeros: usize, ones: usize) -> i32 {
    let neg = |m: &Mat2Q, count: usize| m.trace().is_negative() && count % 2 == 1;
    if neg(pair.a(), zeros) != neg(pair.b(), ones) {
        -1
    } else {
        1
    }
}

/// Enumerates `𝓧_{l,n}` and returns the exact traces and the maximizers of
/// the trace of the scaled (unimodular, trace ≥ 2) pair.
pub fn trace_argmax(pair: &MatrixPair, l: usize, n: usize) -> Result<TraceTable> {
    if l > n {
        return Err(Error::InvalidArgument(format!("l = {l} exceeds n = {n}")));
    }
    if n > MAX_TRACE_N {
        return Err(Error::TooLarge(format!("n = {n} exceeds {MAX_TRACE_N}")));
    }
    let ints = IntegerPair::new(pair.a(), pair.b());
    let den = ints.den(n - l, l);
    let sign = scaled_sign(pair, n - l, l);
    let words = enumerate_class(&ints, l, n);
    let traces: Vec<BigInt> = words.par_iter().map(|(_, m)| m.trace()).collect();
    let key = |t: &BigInt| if sign < 0 { -t } else { t.clone() };
    let best = traces.iter().map(key).max().expect("class is non-empty");
    let mut entries = Vec::with_capacity(words.len());
    let mut maximizers = Vec::new();
    for ((letters, _), tr) in words.into_iter().zip(traces) {
        let word = Word::from_letters(letters)?;
        let is_maximizer = key(&tr) == best;
        if is_maximizer {
            maximizers.push(word.clone());
        }
        entries.push(TraceEntry {
            is_cyclic_balanced: word.is_empty() || cyclic_is_balanced(&word),
            trace: Q::new(tr, den.clone()),
            word,
            is_maximizer,
        });
    }
    Ok(TraceTable { n, l, entries, maximizers })
}

/// Exact quantities of the `W₀, W₁, W₂` identities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplificationResult {
    #[serde(serialize_with = "ser_rational")]
    pub eta: Q,
    #[serde(serialize_with = "ser_rational")]
    pub t1: Q,
    #[serde(serialize_with = "ser_rational")]
    pub t2: Q,
    #[serde(serialize_with = "ser_rational")]
    pub delta: Q,
    /// `W₁ − W₀ = ηX̃ + t₁(X̃ − X)`.
    pub identity_w1: bool,
    /// `W₂ − W₀ = ηX + t₂(X − X̃)`.
    pub identity_w2: bool,
    /// `Ỹ − Y = δ(X − X̃)`.
    pub identity_y: bool,
    pub w1_minus_w0: Mat2Q,
    pub w2_minus_w0: Mat2Q,
}

impl AmplificationResult {
    pub fn identities_hold(&self) -> bool {
        self.identity_w1 && self.identity_w2 && self.identity_y
    }

    pub fn signs_hold(&self) -> bool {
        self.eta.is_positive() && self.t1 > Q::from_integer(2.into()) && self.delta.is_positive()
    }
}

/// Builds `X = UV`, `X̃ = VU`, `Y = V^q (UV)^m U^p`, `Ỹ = U^p (VU)^m V^q`,
/// `W₀ = XYX`, `W₁ = X̃YX̃`, `W₂ = XỸX` and checks the identities exactly.
pub fn trace_identity_check(u: &Mat2Q, v: &Mat2Q, p: usize, q: usize, m: usize) -> Result<AmplificationResult> {
    for x in [u, v] {
        if !x.det().is_one() {
            return Err(Error::NotUnimodular(x.det().to_string()));
        }
    }
    if p == 0 || q == 0 {
        return Err(Error::InvalidArgument("p and q must be at least 1".into()));
    }
    let class = classify(&MatrixPair::new(u.clone(), v.clone())?)?;
    if !class.is_balanced() {
        return Err(Error::NotBalanced(class.to_string()));
    }
    let pw = |x: &Mat2Q, k: usize| x.pow(k as u32);
    let x = u * v;
    let xt = v * u;
    let y = &(&pw(v, q) * &pw(&x, m)) * &pw(u, p);
    let yt = &(&pw(u, p) * &pw(&xt, m)) * &pw(v, q);
    let w0 = &(&x * &y) * &x;
    let w1 = &(&xt * &y) * &xt;
    let w2 = &(&x * &yt) * &x;

    let eta = (&x * &(&yt - &y)).trace();
    let t1 = (&x * &y).trace();
    let (gx, gu, gv) = (x.trace(), u.trace(), v.trace());
    let g = |tr: &Q, k: isize| if k < 0 { -gamma_from_trace(tr, 1) } else { gamma_from_trace(tr, k as usize) };
    let (p, q, m) = (p as isize, q as isize, m as isize);
    let delta = g(&gx, m + 1) * g(&gu, p) * g(&gv, q) - g(&gx, m) * g(&gu, p - 1) * g(&gv, q - 1);
    let t2 = delta.clone();

    let diff = &xt - &x;
    let w1_minus_w0 = &w1 - &w0;
    let w2_minus_w0 = &w2 - &w0;
    let identity_w1 = w1_minus_w0 == &xt.scale(&eta) + &diff.scale(&t1);
    let identity_w2 = w2_minus_w0 == &x.scale(&eta) - &diff.scale(&t2);
    let identity_y = &yt - &y == (&x - &xt).scale(&delta);
    Ok(AmplificationResult { eta, t1, t2, delta, identity_w1, identity_w2, identity_y, w1_minus_w0, w2_minus_w0 })
}

/// Exact traces and the empirical amplification constant `ξ̂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplificationCertificate {
    pub words: AmplificationWords,
    #[serde(serialize_with = "ser_rational")]
    pub xi_hat: Q,
    pub worst_z: Word,
    pub samples: usize,
}

/// `tr` of a word for a pair, with the sign fixed by the scaling into `𝔞`.
fn scaled_trace(pair: &MatrixPair, w: &Word) -> Q {
    let tr = pair.product(w).trace();
    if scaled_sign(pair, w.len() - w.ones(), w.ones()) < 0 {
        -tr
    } else {
        tr
    }
}

/// Evaluates `max(tr[w₁z], tr[w₂z]) / tr[w₀z]` for every sample `z` and
/// returns the minimum ratio; every ratio must exceed one.
pub fn amplification_certificate(pair: &MatrixPair, s: &PeriodicWord, z_samples: &[Word]) -> Result<AmplificationCertificate> {
    let class = classify(pair)?;
    if !class.is_balanced() {
        return Err(Error::NotBalanced(class.to_string()));
    }
    let words = amplification_words(s)?;
    if z_samples.is_empty() {
        return Err(Error::InvalidArgument("no z samples".into()));
    }
    let ratios: Vec<Result<Q>> = z_samples
        .par_iter()
        .map(|z| {
            let t0 = scaled_trace(pair, &words.w0.concat(z));
            let t1 = scaled_trace(pair, &words.w1.concat(z));
            let t2 = scaled_trace(pair, &words.w2.concat(z));
            if !t0.is_positive() {
                return Err(Error::Certificate(format!("tr[w0 z] = {t0} is not positive for z = {z}")));
            }
            Ok(t1.max(t2) / t0)
        })
        .collect();
    let mut best: Option<(Q, Word)> = None;
    for (z, r) in z_samples.iter().zip(ratios) {
        let r = r?;
        if r <= Q::one() {
            return Err(Error::Certificate(format!("ratio {r} ≤ 1 at z = {z}")));
        }
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, z.clone()));
        }
    }
    let (xi_hat, worst_z) = best.unwrap();
    Ok(AmplificationCertificate { words, xi_hat, worst_z, samples: z_samples.len() })
}

/// All words of length at most `max_len`, shortest first.
pub fn all_words_up_to(max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for len in 1..=max_len {
        for bits in 0..(1u64 << len) {
            let letters = (0..len).rev().map(|i| ((bits >> i) & 1) as u8).collect();
            out.push(Word::from_letters(letters).expect("binary"));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplifyOutcome {
    pub n: usize,
    pub t: Word,
    pub t_prime: Word,
    /// Offset of `t` in the expansion of `s`.
    pub offset: usize,
    /// `i_k ∈ {1, 2}` for `k = 1..n`.
    pub choices: Vec<u8>,
    #[serde(serialize_with = "ser_rational")]
    pub tr_t: Q,
    #[serde(serialize_with = "ser_rational")]
    pub tr_t_prime: Q,
    #[serde(serialize_with = "ser_rational")]
    pub ratio: Q,
}

/// Builds `t = w₀x₁w₀⋯w₀xₙw₀` from the first `n + 1` non-overlapping
/// occurrences of `w₀` in `s`, then substitutes `w₁` or `w₂` for the first
/// `n` copies of `w₀`, choosing `w₁` iff `tr(X̃Z) ≥ tr(XZ)` with
/// `Z = [v_k u_k]`, `X = [uv]`, `X̃ = [vu]`.
pub fn trace_amplify(pair: &MatrixPair, s: &PeriodicWord, n: usize) -> Result<AmplifyOutcome> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let class = classify(pair)?;
    if !class.is_balanced() {
        return Err(Error::NotBalanced(class.to_string()));
    }
    let words = amplification_words(s)?;
    let w0 = &words.w0;
    let k0 = w0.len();

    // greedy non-overlapping occurrences of w0
    let cycle = s.cycle().len();
    let mut occurrences = Vec::with_capacity(n + 1);
    let mut pos = words.offset;
    let mut text = s.expand(pos + k0);
    while occurrences.len() <= n {
        if text.len() < pos + k0 {
            text = s.expand((pos + k0) * 2 + cycle);
        }
        if text.letters()[pos..pos + k0] == *w0.letters() {
            occurrences.push(pos);
            pos += k0;
        } else {
            pos += 1;
        }
    }
    let start = occurrences[0];
    let end = occurrences[n] + k0;
    let t = Word::from_letters(text.letters()[start..end].to_vec())?;
    let gaps: Vec<Word> = (0..n)
        .map(|k| Word::from_letters(text.letters()[occurrences[k] + k0..occurrences[k + 1]].to_vec()).unwrap())
        .collect();

    let x = pair.product(&words.u.concat(&words.v));
    let xt = pair.product(&words.v.concat(&words.u));
    let mut u_k = Word::empty();
    let mut choices = Vec::with_capacity(n);
    for k in 0..n {
        // v_k = x_{k+1} w0 x_{k+2} ⋯ w0 x_n w0
        let mut v_k = Word::empty();
        for gap in &gaps[k..] {
            v_k = v_k.concat(gap).concat(w0);
        }
        let z = pair.product(&v_k.concat(&u_k));
        let pick_w1 = (&xt * &z).trace() >= (&x * &z).trace();
        let (choice, w) = if pick_w1 { (1, &words.w1) } else { (2, &words.w2) };
        choices.push(choice);
        u_k = u_k.concat(w).concat(&gaps[k]);
    }
    let t_prime = u_k.concat(w0);
    if t_prime.len() != t.len() || t_prime.ones() != t.ones() {
        return Err(Error::Internal("substitution changed letter counts".into()));
    }
    let tr_t = scaled_trace(pair, &t);
    let tr_t_prime = scaled_trace(pair, &t_prime);
    let ratio = &tr_t_prime / &tr_t;
    Ok(AmplifyOutcome { n, t, t_prime, offset: start, choices, tr_t, tr_t_prime, ratio })
}

/// `x ∈ 𝓗_N`: `x` neither starts nor ends with `0^N` or `1^N`.
pub fn in_h_n(x: &Word, n: usize) -> bool {
    if x.len() < n {
        return true;
    }
    let l = x.letters();
    let uniform = |s: &[u8]| s.iter().all(|&c| c == s[0]);
    !(uniform(&l[..n]) || uniform(&l[l.len() - n..]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceNormRatio {
    pub delta_hat: f64,
    pub argmin: Word,
    pub sampled: usize,
}

/// `min tr[x] / ‖[x]‖` over non-empty words of length ≤ `sample_len`,
/// restricted to `𝓗_N` when `n` is given.
pub fn trace_norm_ratio(pair: &MatrixPair, n: Option<usize>, sample_len: usize) -> Result<TraceNormRatio> {
    let class = classify(pair)?;
    if !class.is_balanced() {
        return Err(Error::NotBalanced(class.to_string()));
    }
    let words: Vec<Word> = all_words_up_to(sample_len)
        .into_iter()
        .skip(1)
        .filter(|w| n.is_none_or(|n| in_h_n(w, n)))
        .collect();
    let ratios: Vec<f64> = words
        .par_iter()
        .map(|w| {
            let m = pair.product(w);
            let tr = rational_to_f64(&scaled_trace(pair, w));
            tr / rational_to_f64(&crate::mat2::hs_norm_sq(&m)).sqrt()
        })
        .collect();
    let (i, &delta_hat) = ratios
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(Ordering::Equal))
        .ok_or_else(|| Error::InvalidArgument("no words sampled".into()))?;
    if delta_hat.is_nan() || delta_hat <= 0.0 {
        return Err(Error::Certificate(format!("trace/norm ratio {delta_hat} at {}", words[i])));
    }
    Ok(TraceNormRatio { delta_hat, argmin: words[i].clone(), sampled: words.len() })
}
