//! Named property suites run by the `verify` subcommand.

use std::fmt;
use std::str::FromStr;

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{self, Archetype};
use crate::lyapunov::{all_words_up_to, trace_identity_check, amplification_certificate, trace_amplify, trace_argmax, ChiEvaluator};
use crate::mat2::{p, q, Q};
use crate::optimizer::{bracket_of, concavity_probe, farey_brackets, geometric_grid, maximize_slope, sweep_family};
use crate::pairs::{classify, exact_unimodular, MatrixPair, PairClass};
use crate::words::{is_balanced, mechanical_word, sturmian_deviation, unbalance_witness, PeriodicWord, SlopeFraction, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    TraceMaximizers,
    AmplificationIdentities,
    CrossingProducts,
    ClassifierRoundtrip,
    Concavity,
    Words,
    AmplificationGrowth,
    SolverOptimality,
    Sweep,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::TraceMaximizers,
        Suite::AmplificationIdentities,
        Suite::CrossingProducts,
        Suite::ClassifierRoundtrip,
        Suite::Concavity,
        Suite::Words,
        Suite::AmplificationGrowth,
        Suite::SolverOptimality,
        Suite::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::TraceMaximizers => "trace-maximizers",
            Suite::AmplificationIdentities => "amplification-identities",
            Suite::CrossingProducts => "crossing-products",
            Suite::ClassifierRoundtrip => "classifier-roundtrip",
            Suite::Concavity => "concavity",
            Suite::Words => "words",
            Suite::AmplificationGrowth => "amplification-growth",
            Suite::SolverOptimality => "solver-optimality",
            Suite::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: usize,
    /// First few failures, in check order.
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

const MAX_REPORTED_FAILURES: usize = 20;

struct Tally {
    checks: usize,
    failures: Vec<String>,
    failed: usize,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: 0, failures: Vec::new(), failed: 0, notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_REPORTED_FAILURES {
                self.failures.push(what());
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checks += other.checks;
        self.failed += other.failed;
        for f in other.failures {
            if self.failures.len() < MAX_REPORTED_FAILURES {
                self.failures.push(f);
            }
        }
        self.notes.extend(other.notes);
    }

    fn finish(mut self, suite: Suite) -> SuiteReport {
        if self.failed > self.failures.len() {
            self.notes.push(format!("{} failures in total", self.failed));
        }
        SuiteReport { suite, passed: self.failed == 0, checks: self.checks, failures: self.failures, notes: self.notes }
    }
}

/// Knobs for the randomized suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub pairs: usize,
    pub max_n: usize,
    pub roundtrips: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 2024, pairs: 50, max_n: 12, roundtrips: 1000 }
    }
}

fn golden() -> MatrixPair {
    let a = p(q(1)).expect("x > 0");
    MatrixPair::new(a.clone(), a.transpose()).expect("det 1")
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    match suite {
        Suite::TraceMaximizers => trace_maximizers(cfg),
        Suite::AmplificationIdentities => amplification_identities(cfg),
        Suite::CrossingProducts => crossing_products(cfg),
        Suite::ClassifierRoundtrip => classifier_roundtrip(cfg),
        Suite::Concavity => concavity(cfg),
        Suite::Words => words(),
        Suite::AmplificationGrowth => amplification_growth(),
        Suite::SolverOptimality => solver_optimality(cfg),
        Suite::Sweep => sweep(),
    }
}

fn trace_maximizers(cfg: &VerifyConfig) -> SuiteReport {
    let pairs = family::balanced_family(cfg.seed, cfg.pairs);
    let tallies: Vec<Tally> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, rp)| {
            let mut t = Tally::new();
            for n in 1..=cfg.max_n {
                for l in 0..=n {
                    match trace_argmax(&rp.pair, l, n) {
                        Ok(table) => t.check(table.maximizers_are_balanced_words(), || {
                            format!("pair {i} ({:?}), l = {l}, n = {n}: maximizers {:?}", rp.archetype, table.maximizers)
                        }),
                        Err(e) => t.check(false, || format!("pair {i}, l = {l}, n = {n}: {e}")),
                    }
                }
            }
            t
        })
        .collect();
    let mut total = Tally::new();
    tallies.into_iter().for_each(|t| total.merge(t));
    total.finish(Suite::TraceMaximizers)
}

fn amplification_identities(cfg: &VerifyConfig) -> SuiteReport {
    let mut total = Tally::new();
    let mut pairs: Vec<(String, MatrixPair)> = vec![("golden".into(), golden())];
    for (i, rp) in family::balanced_family(cfg.seed, cfg.pairs).into_iter().enumerate() {
        match exact_unimodular(&rp.pair) {
            Ok(u) => pairs.push((format!("pair {i}"), u)),
            Err(e) => total.check(false, || format!("pair {i}: {e}")),
        }
    }
    let tallies: Vec<Tally> = pairs
        .par_iter()
        .map(|(name, pair)| {
            let mut t = Tally::new();
            for pp in 1..=4 {
                for qq in 1..=4 {
                    for m in 0..=3 {
                        match trace_identity_check(pair.a(), pair.b(), pp, qq, m) {
                            Ok(r) => t.check(r.identities_hold() && r.signs_hold(), || {
                                format!("{name}, (p, q, m) = ({pp}, {qq}, {m}): eta {}, t1 {}, delta {}", r.eta, r.t1, r.delta)
                            }),
                            Err(e) => t.check(false, || format!("{name}, ({pp}, {qq}, {m}): {e}")),
                        }
                    }
                }
            }
            t
        })
        .collect();
    tallies.into_iter().for_each(|t| total.merge(t));
    match trace_identity_check(golden().a(), golden().b(), 1, 1, 0) {
        Ok(r) => total.check(r.eta == q(1) && r.t1 == q(6) && r.delta == q(1), || {
            format!("golden (1, 1, 0): eta {}, t1 {}, delta {}", r.eta, r.t1, r.delta)
        }),
        Err(e) => total.check(false, || e.to_string()),
    }
    total.finish(Suite::AmplificationIdentities)
}

fn crossing_products(cfg: &VerifyConfig) -> SuiteReport {
    let mut t = Tally::new();
    let ab: Word = "01".parse().expect("binary");
    let abab: Word = "0101".parse().expect("binary");
    let aabb: Word = "0011".parse().expect("binary");
    let mut pairs = vec![golden()];
    pairs.extend(family::balanced_family(cfg.seed, cfg.pairs).into_iter().map(|r| r.pair));
    for (i, pair) in pairs.iter().enumerate() {
        let x = pair.product(&ab);
        let y = pair.b() * pair.a();
        let class = MatrixPair::new(x, y).and_then(|pr| classify(&pr));
        t.check(matches!(class, Ok(PairClass::Crossing)), || format!("pair {i}: (AB, BA) classified as {class:?}"));
        let (t1, t2) = (pair.product(&abab).trace(), pair.product(&aabb).trace());
        t.check(t1 > t2, || format!("pair {i}: tr((AB)^2) = {t1} vs tr(A^2 B^2) = {t2}"));
    }
    let g = golden();
    t.check(g.product(&abab).trace() == q(7) && g.product(&aabb).trace() == q(6), || "golden traces".into());
    t.finish(Suite::CrossingProducts)
}

fn classifier_roundtrip(cfg: &VerifyConfig) -> SuiteReport {
    let mut rng = family::rng(cfg.seed ^ 0x5eed);
    let all = [Archetype::CoParallel, Archetype::Mixed, Archetype::Parabolic, Archetype::Crossing];
    let mut t = Tally::new();
    for i in 0..cfg.roundtrips {
        let rp = family::random_pair(&mut rng, all[i % all.len()]);
        let got = classify(&rp.pair);
        t.check(got.as_ref().ok() == Some(&rp.archetype.class()), || {
            format!("case {i}: expected {:?}, got {got:?} for {}", rp.archetype, rp.pair)
        });
    }
    t.finish(Suite::ClassifierRoundtrip)
}

fn concavity(cfg: &VerifyConfig) -> SuiteReport {
    let brackets = farey_brackets(30);
    let pairs = family::balanced_family(cfg.seed, 20);
    let tallies: Vec<Tally> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, rp)| {
            let mut t = Tally::new();
            for &(l, r) in &brackets {
                let ok = concavity_probe(&rp.pair, &bracket_of(&rp.pair, l, r));
                t.check(matches!(ok, Ok(true)), || format!("pair {i}: chord test fails on ({l}, {r})"));
            }
            t
        })
        .collect();
    let mut total = Tally::new();
    tallies.into_iter().for_each(|t| total.merge(t));
    let g = golden();
    let eval = ChiEvaluator::new(&g);
    let s = |a, b| SlopeFraction::new(a, b).expect("valid");
    let (f13, f12, f25) = (eval.chi(s(1, 3)), eval.chi(s(1, 2)), eval.chi(s(2, 5)));
    let chord = 0.6 * f13 + 0.4 * f12;
    total.check(f25 > chord, || format!("golden: f(2/5) = {f25} vs chord {chord}"));
    total.notes.push(format!("golden: f(1/3) = {f13:.7}, f(1/2) = {f12:.7}, f(2/5) = {f25:.7}, chord = {chord:.7}"));
    total.finish(Suite::Concavity)
}

fn words() -> SuiteReport {
    let mut t = Tally::new();
    for den in 1..=64u64 {
        for num in 0..=den {
            let alpha = match SlopeFraction::new(num, den) {
                Ok(a) if a.den() == den => a,
                _ => continue,
            };
            let w = mechanical_word(alpha, 128);
            // every factor of length ≤ 64 lies in a window of length 64
            t.check(is_balanced(&Word::from_letters(w.letters()[..64].to_vec()).expect("binary")), || {
                format!("mechanical word of slope {alpha} has an unbalanced factor")
            });
            t.check(is_balanced(&w), || format!("mechanical prefix of slope {alpha} is unbalanced"));
            t.check(sturmian_deviation(&w, alpha) < Q::one(), || format!("deviation ≥ 1 at slope {alpha}"));
        }
    }
    for len in 1..=14usize {
        for bits in 0u32..(1 << len) {
            let letters: Vec<u8> = (0..len).rev().map(|i| ((bits >> i) & 1) as u8).collect();
            let x = Word::from_letters(letters).expect("binary");
            let witness = unbalance_witness(&x);
            if is_balanced(&x) {
                t.check(witness.is_none(), || format!("balanced {x} has a witness"));
                continue;
            }
            let ok = witness.is_some_and(|w| {
                let zero = Word::from_letters(vec![0]).expect("binary");
                let one = Word::from_letters(vec![1]).expect("binary");
                zero.concat(&w).concat(&zero).is_factor_of(&x) && one.concat(&w).concat(&one).is_factor_of(&x)
            });
            t.check(ok, || format!("witness does not round-trip for {x}"));
        }
    }
    t.finish(Suite::Words)
}

/// Least `r` such that every amplification ratio is at least `rⁿ`.
pub fn amplification_base(ratios: &[Q]) -> f64 {
    ratios
        .iter()
        .enumerate()
        .map(|(i, r)| crate::mat2::rational_to_f64(r).powf(1.0 / (i + 1) as f64))
        .fold(f64::INFINITY, f64::min)
}

fn amplification_growth() -> SuiteReport {
    let mut t = Tally::new();
    let g = golden();
    let s = PeriodicWord::purely("0011".parse().expect("binary")).expect("non-empty");
    let mut ratios = Vec::new();
    for n in 1..=5 {
        match trace_amplify(&g, &s, n) {
            Ok(r) => {
                t.check(r.ratio > Q::one(), || format!("n = {n}: ratio {} ≤ 1", r.ratio));
                t.notes.push(format!("n = {n}: tr[t] = {}, tr[t'] = {}, ratio = {}", r.tr_t, r.tr_t_prime, r.ratio));
                ratios.push(r.ratio);
            }
            Err(e) => t.check(false, || format!("n = {n}: {e}")),
        }
    }
    let base = amplification_base(&ratios);
    t.check(base > 1.0, || format!("geometric base {base} ≤ 1"));
    t.notes.push(format!("geometric base {base:.6}"));
    match amplification_certificate(&g, &s, &all_words_up_to(6)) {
        Ok(c) => {
            t.check(c.xi_hat > Q::one(), || format!("xi_hat = {}", c.xi_hat));
            t.notes.push(format!("xi_hat = {} at z = {:?}", c.xi_hat, c.worst_z.to_string()));
        }
        Err(e) => t.check(false, || e.to_string()),
    }
    t.finish(Suite::AmplificationGrowth)
}

fn solver_optimality(cfg: &VerifyConfig) -> SuiteReport {
    let max_den = 200;
    let pairs = family::balanced_family(cfg.seed, 20);
    let tallies: Vec<Tally> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, rp)| {
            let mut t = Tally::new();
            let r = match maximize_slope(&rp.pair, max_den) {
                Ok(r) => r,
                Err(e) => {
                    t.check(false, || format!("pair {i}: {e}"));
                    return t;
                }
            };
            let eval = ChiEvaluator::new(&rp.pair);
            let limit = (r.tau_hat.den() + 5).min(max_den);
            for d in 1..=limit {
                for k in 0..=d {
                    let x = SlopeFraction::new(k, d).expect("valid");
                    let fx = eval.chi(x);
                    t.check(fx <= r.chi_at_tau + 1e-12, || format!("pair {i}: f({x}) = {fx} beats f({}) = {}", r.tau_hat, r.chi_at_tau));
                }
            }
            let swapped = maximize_slope(&rp.pair.swapped(), max_den);
            t.check(swapped.is_ok_and(|s| (s.chi_at_tau - r.chi_at_tau).abs() < 1e-12), || format!("pair {i}: swap changes the optimum"));
            t
        })
        .collect();
    let mut total = Tally::new();
    tallies.into_iter().for_each(|t| total.merge(t));
    total.finish(Suite::SolverOptimality)
}

fn sweep() -> SuiteReport {
    let mut t = Tally::new();
    let a = p(q(1)).expect("x > 0");
    let b = a.transpose();
    let max_den = 1000;
    let mut grid = geometric_grid(0.05, 20.0, 100);
    grid.push(1.0);
    let records = match sweep_family(&a, &b, &grid, max_den) {
        Ok(r) => r,
        Err(e) => {
            t.check(false, || e.to_string());
            return t.finish(Suite::Sweep);
        }
    };
    let resolution = 1.0 / (max_den as f64 * max_den as f64);
    for w in records.windows(2) {
        let drop = w[0].tau.to_f64() - w[1].tau.to_f64();
        t.check(drop <= resolution, || format!("tau decreases from {} to {} between t = {} and {}", w[0].tau, w[1].tau, w[0].t, w[1].t));
    }
    let at_one = records.iter().find(|r| r.t == 1.0).map(|r| r.tau);
    t.check(at_one == SlopeFraction::new(1, 2).ok(), || format!("tau(1) = {at_one:?}"));
    let inverse: Vec<f64> = records.iter().map(|r| 1.0 / r.t).collect();
    match sweep_family(&a, &b, &inverse, max_den) {
        Ok(inv) => {
            for r in &records {
                let back = inv.iter().find(|x| x.t == 1.0 / r.t).expect("same grid");
                let sum = r.tau.to_f64() + back.tau.to_f64();
                t.check((sum - 1.0).abs() <= 1e-9, || format!("tau({}) + tau(1/{}) = {sum}", r.t, r.t));
            }
        }
        Err(e) => t.check(false, || e.to_string()),
    }
    t.finish(Suite::Sweep)
}
