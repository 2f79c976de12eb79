//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if a criterion fails that is not listed in `KNOWN_FAILURES`.

use std::collections::BTreeSet;
use std::time::Instant;

use balpair::family::{self, Archetype};
use balpair::lyapunov::{
    all_words_up_to, chi_rational, jsr_bounds, trace_identity_check, amplification_certificate, trace_amplify, trace_argmax,
    ChiEvaluator,
};
use balpair::mat2::{frac, p, q, Mat2Q, Q};
use balpair::optimizer::{bracket_of, concavity_probe, farey_brackets, geometric_grid, maximize_slope, sweep_family};
use balpair::pairs::{classify, exact_unimodular, MatrixPair, PairClass};
use balpair::words::{
    mechanical_word, mechanical_word_real, sturmian_deviation, unbalance_witness, PeriodicWord, SlopeFraction, Word,
};
use num_traits::{One, Signed, Zero};

/// Criteria whose pinned values cannot be met; see the decisions ledger.
const KNOWN_FAILURES: [u32; 2] = [6, 7];

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn golden() -> MatrixPair {
    let a = p(q(1)).unwrap();
    MatrixPair::new(a.clone(), a.transpose()).unwrap()
}

fn slope(a: u64, b: u64) -> SlopeFraction {
    SlopeFraction::new(a, b).unwrap()
}

fn word(s: &str) -> Word {
    s.parse().unwrap()
}

// ---- independent oracles ----

fn ones(x: &[u8]) -> usize {
    x.iter().filter(|&&c| c == 1).count()
}

/// Pairwise comparison of every two equal-length factors.
fn oracle_balanced(x: &[u8]) -> bool {
    for len in 1..=x.len() {
        let counts: Vec<usize> = (0..=x.len() - len).map(|i| ones(&x[i..i + len])).collect();
        for a in &counts {
            for b in &counts {
                if a.abs_diff(*b) > 1 {
                    return false;
                }
            }
        }
    }
    true
}

/// `x^∞` balanced: cyclic factors of every length up to `|x|`.
fn oracle_cyclic_balanced(x: &[u8]) -> bool {
    let n = x.len();
    (1..=n).all(|len| {
        let counts: Vec<usize> = (0..n).map(|i| (0..len).filter(|j| x[(i + j) % n] == 1).count()).collect();
        counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1
    })
}

fn oracle_product(pair: &MatrixPair, x: &[u8]) -> Mat2Q {
    let mut m = Mat2Q::identity();
    for &c in x {
        m = &m * if c == 0 { pair.a() } else { pair.b() };
    }
    m
}

/// `Γ_k` from `Γ_{k+1} = tr·Γ_k − Γ_{k−1}`, `Γ_0 = 0`, `Γ_1 = 1`, `Γ_{−1} = −1`.
fn oracle_gamma(tr: &Q, k: i64) -> Q {
    if k < 0 {
        return -Q::one();
    }
    let (mut g0, mut g1) = (Q::zero(), Q::one());
    for _ in 0..k {
        let next = tr * &g1 - &g0;
        g0 = g1;
        g1 = next;
    }
    g0
}

fn letters(bits: u32, len: usize) -> Vec<u8> {
    (0..len).rev().map(|i| ((bits >> i) & 1) as u8).collect()
}

// ---- criteria ----

fn criterion_1() -> Outcome {
    let g = golden();
    let r = maximize_slope(&g, 10_000).unwrap();
    let expected = ((3.0 + 5f64.sqrt()) / 2.0).ln() / 2.0;
    let chi = chi_rational(&g, slope(1, 2)).chi;
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let jsr = jsr_bounds(&g, 8).unwrap();
    let ok = r.tau_hat == slope(1, 2)
        && (chi - expected).abs() <= 1e-12
        && (jsr.lower - phi).abs() <= 1e-12
        && jsr.argmax_word == word("01");
    outcome(ok, format!("tau = {}, chi(1/2) = {chi}, jsr lower = {} at {}", r.tau_hat, jsr.lower, jsr.argmax_word))
}

fn criterion_2() -> Outcome {
    let pairs = family::balanced_family(SEED, 51);
    let mut checked = 0;
    let mut failures = Vec::new();
    for (i, rp) in pairs.iter().enumerate() {
        for n in 1..=12usize {
            for l in 0..=n {
                let table = trace_argmax(&rp.pair, l, n).unwrap();
                let best = table.entries.iter().map(|e| e.trace.clone()).max().unwrap();
                let argmax: BTreeSet<String> =
                    table.entries.iter().filter(|e| e.trace == best).map(|e| e.word.to_string()).collect();
                let balanced: BTreeSet<String> = table
                    .entries
                    .iter()
                    .filter(|e| oracle_cyclic_balanced(e.word.letters()))
                    .map(|e| e.word.to_string())
                    .collect();
                checked += 1;
                if argmax != balanced {
                    failures.push(format!("pair {i}, l = {l}, n = {n}"));
                }
                // exact traces against a separate product path on short words
                if n <= 7 {
                    for e in &table.entries {
                        if oracle_product(&rp.pair, e.word.letters()).trace() != e.trace {
                            failures.push(format!("pair {i}: trace of {}", e.word));
                        }
                    }
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{} pairs, {checked} classes, failures: {failures:?}", pairs.len()))
}

fn criterion_3() -> Outcome {
    let mut pairs = vec![golden()];
    pairs.extend(family::balanced_family(SEED, 51).iter().map(|rp| exact_unimodular(&rp.pair).unwrap()));
    let mut failures = Vec::new();
    let mut checked = 0;
    for (i, pair) in pairs.iter().enumerate() {
        let (u, v) = (pair.a(), pair.b());
        for pp in 1..=4usize {
            for qq in 1..=4usize {
                for m in 0..=3usize {
                    let x = u * v;
                    let xt = v * u;
                    let y = &(&v.pow(qq as u32) * &x.pow(m as u32)) * &u.pow(pp as u32);
                    let yt = &(&u.pow(pp as u32) * &xt.pow(m as u32)) * &v.pow(qq as u32);
                    let w0 = &(&x * &y) * &x;
                    let w1 = &(&xt * &y) * &xt;
                    let w2 = &(&x * &yt) * &x;
                    let eta = (&x * &(&yt - &y)).trace();
                    let t1 = (&x * &y).trace();
                    let (gx, gu, gv) = (x.trace(), u.trace(), v.trace());
                    let (pi, qi, mi) = (pp as i64, qq as i64, m as i64);
                    let delta = oracle_gamma(&gx, mi + 1) * oracle_gamma(&gu, pi) * oracle_gamma(&gv, qi)
                        - oracle_gamma(&gx, mi) * oracle_gamma(&gu, pi - 1) * oracle_gamma(&gv, qi - 1);
                    let diff = &xt - &x;
                    let eq1 = &w1 - &w0 == &xt.scale(&eta) + &diff.scale(&t1);
                    let eq2 = &w2 - &w0 == &x.scale(&eta) - &diff.scale(&delta);
                    let eq3 = &yt - &y == (&x - &xt).scale(&delta);
                    let signs = eta.is_positive() && t1 > q(2) && delta.is_positive();
                    let lib = trace_identity_check(u, v, pp, qq, m).unwrap();
                    let agree = lib.eta == eta && lib.t1 == t1 && lib.delta == delta && lib.identities_hold();
                    checked += 1;
                    if !(eq1 && eq2 && eq3 && signs && agree) {
                        failures.push(format!("pair {i}, (p, q, m) = ({pp}, {qq}, {m})"));
                    }
                }
            }
        }
    }
    let r = trace_identity_check(golden().a(), golden().b(), 1, 1, 0).unwrap();
    let worked = r.eta == q(1) && r.t1 == q(6) && r.delta == q(1);
    outcome(
        failures.is_empty() && worked,
        format!("{checked} instances; golden (1,1,0): eta = {}, t1 = {}, delta = {}; failures: {failures:?}", r.eta, r.t1, r.delta),
    )
}

fn criterion_4() -> Outcome {
    let mut pairs = vec![golden()];
    pairs.extend(family::balanced_family(SEED, 51).into_iter().map(|r| r.pair));
    let mut failures = Vec::new();
    for (i, pair) in pairs.iter().enumerate() {
        let ab = pair.a() * pair.b();
        let ba = pair.b() * pair.a();
        let crossing = classify(&MatrixPair::new(ab.clone(), ba).unwrap()).unwrap() == PairClass::Crossing;
        let t_abab = (&ab * &ab).trace();
        let t_aabb = (&(pair.a() * pair.a()) * &(pair.b() * pair.b())).trace();
        if !(crossing && t_abab > t_aabb) {
            failures.push(i);
        }
    }
    let g = golden();
    let values = (oracle_product(&g, &[0, 1, 0, 1]).trace(), oracle_product(&g, &[0, 0, 1, 1]).trace());
    let ok = failures.is_empty() && values == (q(7), q(6));
    outcome(ok, format!("{} pairs; golden tr((AB)^2) = {}, tr(A^2 B^2) = {}; failures: {failures:?}", pairs.len(), values.0, values.1))
}

fn criterion_5() -> Outcome {
    let mut rng = family::rng(SEED);
    let kinds = [Archetype::CoParallel, Archetype::Mixed, Archetype::Parabolic, Archetype::Crossing];
    let mut wrong = 0;
    for i in 0..1000 {
        let rp = family::random_pair(&mut rng, kinds[i % 4]);
        if classify(&rp.pair).ok() != Some(rp.archetype.class()) {
            wrong += 1;
        }
    }
    outcome(wrong == 0, format!("1000 pairs, {wrong} misclassified"))
}

fn criterion_6() -> Outcome {
    let brackets = farey_brackets(30);
    let mut failures = 0;
    let pairs = family::balanced_family(SEED, 20);
    for rp in &pairs {
        for &(l, r) in &brackets {
            if !concavity_probe(&rp.pair, &bracket_of(&rp.pair, l, r)).unwrap() {
                failures += 1;
            }
        }
    }
    let g = golden();
    let eval = ChiEvaluator::new(&g);
    let (f13, f12, f25) = (eval.chi(slope(1, 3)), eval.chi(slope(1, 2)), eval.chi(slope(2, 5)));
    let chord = 0.6 * f13 + 0.4 * f12;
    // closed forms: ln(2+√3)/3 and ln(5+√24)/5
    let exact13 = (2.0 + 3f64.sqrt()).ln() / 3.0;
    let exact25 = (5.0 + 24f64.sqrt()).ln() / 5.0;
    let closed_forms = (f13 - exact13).abs() < 1e-14 && (f25 - exact25).abs() < 1e-14;
    let inequality = f25 > chord;
    let pinned = (f25 - 0.459216).abs() <= 1e-5 && (chord - 0.456031).abs() <= 1e-5;
    outcome(
        failures == 0 && inequality && closed_forms && pinned,
        format!(
            "{} brackets x {} pairs, {failures} chord failures; f(2/5) = {f25:.7} vs chord {chord:.7} \
             (pinned 0.459216 vs 0.456031 ±1e-5: {})",
            brackets.len(),
            pairs.len(),
            if pinned { "met" } else { "not met" }
        ),
    )
}

fn criterion_7() -> Outcome {
    let g = golden();
    let s = PeriodicWord::purely(word("0011")).unwrap();
    let base = frac(6, 5);
    let mut bound = Q::one();
    let mut lines = Vec::new();
    let mut ok = true;
    for n in 1..=5 {
        bound = &bound * &base;
        let r = trace_amplify(&g, &s, n).unwrap();
        // recompute both traces on a separate product path
        let t = oracle_product(&g, r.t.letters()).trace();
        let tp = oracle_product(&g, r.t_prime.letters()).trace();
        let ratio = &tp / &t;
        let meets = ratio >= bound && ratio == r.ratio;
        ok &= meets;
        lines.push(format!("n={n}: {ratio} {} (6/5)^{n}", if meets { ">=" } else { "<" }));
    }
    let c = amplification_certificate(&g, &s, &all_words_up_to(6)).unwrap();
    ok &= c.xi_hat > Q::one();
    outcome(ok, format!("{}; xi_hat = {}", lines.join(", "), c.xi_hat))
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut factors = 0usize;
    for den in 1..=64u64 {
        for num in 0..=den {
            let alpha = slope(num, den);
            if alpha.den() != den {
                continue;
            }
            let w = mechanical_word(alpha, 128);
            let l = w.letters();
            // factor sets of length ≤ 64 are all seen within a window of length 64 + den
            let window = &l[..(64 + den as usize).min(l.len())];
            for len in 1..=64usize {
                let counts: BTreeSet<usize> = (0..=window.len() - len).map(|i| ones(&window[i..i + len])).collect();
                factors += counts.len();
                if counts.iter().max().unwrap() - counts.iter().min().unwrap() > 1 {
                    failures.push(format!("slope {alpha}, length {len}"));
                }
            }
            if sturmian_deviation(&w, alpha) >= Q::one() {
                failures.push(format!("deviation at {alpha}"));
            }
        }
    }
    // irrational slopes: deviation measured in floating point
    for alpha in [(5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0, (3.0 - 5f64.sqrt()) / 2.0, std::f64::consts::PI - 3.0] {
        let w = mechanical_word_real(alpha, 300).unwrap();
        let l = w.letters();
        let mut worst: f64 = 0.0;
        for i in 0..l.len() {
            let mut c = 0usize;
            for j in i..l.len() {
                c += l[j] as usize;
                worst = worst.max((c as f64 - (j - i + 1) as f64 * alpha).abs());
            }
        }
        if worst >= 1.0 {
            failures.push(format!("deviation {worst} at slope {alpha}"));
        }
    }
    let mut unbalanced = 0;
    for len in 1..=14usize {
        for bits in 0..(1u32 << len) {
            let x = letters(bits, len);
            if oracle_balanced(&x) {
                continue;
            }
            unbalanced += 1;
            let w = Word::from_letters(x.clone()).unwrap();
            let ok = unbalance_witness(&w).is_some_and(|u| {
                let zero = [vec![0], u.letters().to_vec(), vec![0]].concat();
                let one = [vec![1], u.letters().to_vec(), vec![1]].concat();
                let has = |f: &[u8]| x.windows(f.len()).any(|win| win == f);
                has(&zero) && has(&one)
            });
            if !ok {
                failures.push(format!("witness for {w}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{factors} factor counts, {unbalanced} unbalanced words; failures: {:?}", &failures[..failures.len().min(5)]),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let a = p(q(1)).unwrap();
    let b = a.transpose();
    let max_den = 1000;
    let grid = geometric_grid(0.05, 20.0, 100);
    let records = sweep_family(&a, &b, &grid, max_den).unwrap();
    let inverse: Vec<f64> = grid.iter().map(|t| 1.0 / t).collect();
    let mirrored = sweep_family(&a, &b, &inverse, max_den).unwrap();
    let at_one = sweep_family(&a, &b, &[1.0], max_den).unwrap()[0].tau;
    let resolution = 1.0 / (max_den as f64).powi(2);
    let worst_drop = records
        .windows(2)
        .map(|w| w[0].tau.to_f64() - w[1].tau.to_f64())
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_sym = records
        .iter()
        .map(|r| {
            let m = mirrored.iter().find(|x| x.t == 1.0 / r.t).unwrap();
            (r.tau.to_f64() + m.tau.to_f64() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst_drop <= resolution && at_one == slope(1, 2) && worst_sym <= 1e-9 && elapsed < 120.0;
    outcome(
        ok,
        format!(
            "tau from {} to {}, largest decrease {worst_drop:.3e}, tau(1) = {at_one}, symmetry error {worst_sym:.1e}, {elapsed:.1}s",
            records[0].tau,
            records.last().unwrap().tau
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "golden pair exactness", criterion_1),
        (2, "trace maximizers are the balanced words", criterion_2),
        (3, "amplification identities", criterion_3),
        (4, "crossing products and trace inequality", criterion_4),
        (5, "classifier round-trip", criterion_5),
        (6, "concavity", criterion_6),
        (7, "amplification engine", criterion_7),
        (8, "word-layer properties", criterion_8),
        (9, "sweep sanity", criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {id} ({name}) [{:.1}s]: {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.pass && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
        if o.pass && KNOWN_FAILURES.contains(&id) {
            println!("note: criterion {id} is listed as a known failure but passed");
        }
    }
    println!("known failures: {KNOWN_FAILURES:?}");
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
