//! Maximization of the concave slope-to-exponent function over Farey
//! fractions, sweeps over `(A, tB)` and bisection toward a target slope.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lyapunov::ChiEvaluator;
use crate::mat2::{h, Mat2Q, Mat2Z, Q};
use crate::pairs::{classify, MatrixPair};
use crate::words::SlopeFraction;

pub const DEFAULT_MAX_DEN: u64 = 10_000;
/// Cap on the summed lengths of all evaluated cycles in one solve.
pub const LETTER_BUDGET: u64 = 1_000_000;

/// Two Farey neighbors with the exponent at each.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FareyBracket {
    pub left: SlopeFraction,
    pub right: SlopeFraction,
    pub f_left: f64,
    pub f_right: f64,
}

impl FareyBracket {
    pub fn width(&self) -> f64 {
        1.0 / (self.left.den() as f64 * self.right.den() as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    #[serde(rename = "tau")]
    pub tau_hat: SlopeFraction,
    #[serde(rename = "chi")]
    pub chi_at_tau: f64,
    /// Farey neighbors, one of which is `tau_hat`.
    pub bracket: FareyBracket,
    /// Interval between the order-`max_den` neighbors of `tau_hat`; it
    /// contains the true maximizing slope.
    pub enclosure: (SlopeFraction, SlopeFraction),
    pub max_den: u64,
    pub evaluations: usize,
    pub letters: u64,
    /// The letter budget ran out before the descent finished.
    pub truncated: bool,
}

fn mat_pow(m: &Mat2Z, mut k: u64) -> Mat2Z {
    let mut base = m.clone();
    let mut acc = Mat2Z::identity();
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    acc
}

/// `a·x ⊕ b·y`: the fraction `(a·p_x + b·p_y)/(a·q_x + b·q_y)`.
fn combine(a: u64, x: SlopeFraction, b: u64, y: SlopeFraction) -> SlopeFraction {
    SlopeFraction::new(a * x.num() + b * y.num(), a * x.den() + b * y.den()).expect("valid combination")
}

/// Memoized `f` with integer cycle products; products of nested mediants
/// are built from their parents.
struct Solver {
    eval: ChiEvaluator,
    products: HashMap<SlopeFraction, Mat2Z>,
    recipes: HashMap<SlopeFraction, (SlopeFraction, u64, SlopeFraction, u64)>,
    values: HashMap<SlopeFraction, f64>,
    letters: u64,
}

impl Solver {
    fn new(pair: &MatrixPair) -> Self {
        let eval = ChiEvaluator::new(pair);
        let mut products = HashMap::new();
        products.insert(SlopeFraction::ZERO, eval.generator(0).clone());
        products.insert(SlopeFraction::ONE, eval.generator(1).clone());
        Solver { eval, products, recipes: HashMap::new(), values: HashMap::new(), letters: 0 }
    }

    fn product(&mut self, x: SlopeFraction) -> Mat2Z {
        if let Some(m) = self.products.get(&x) {
            return m.clone();
        }
        let m = match self.recipes.get(&x).copied() {
            Some((l, kl, r, kr)) => &mat_pow(&self.product(l), kl) * &mat_pow(&self.product(r), kr),
            None => self.eval.cycle_product(x),
        };
        self.products.insert(x, m.clone());
        m
    }

    /// Records `x = k·left ⊕ right` or `left ⊕ k·right` so its product can be
    /// built from the parents on demand.
    fn remember(&mut self, x: SlopeFraction, left: SlopeFraction, kl: u64, right: SlopeFraction, kr: u64) {
        self.recipes.entry(x).or_insert((left, kl, right, kr));
    }

    fn f(&mut self, x: SlopeFraction) -> f64 {
        if let Some(&v) = self.values.get(&x) {
            return v;
        }
        let m = self.product(x);
        let v = self.eval.chi_from_product(x, &m);
        self.letters += x.den();
        self.values.insert(x, v);
        v
    }
}

/// Candidate points for one round, in increasing order: `lo`, the first
/// Stern–Brocot level of `(lo, c)` and of `(c, hi)` with denominator at most
/// `max_den`, `c`, `hi`.
fn round_points(solver: &mut Solver, lo: SlopeFraction, c: SlopeFraction, hi: SlopeFraction, max_den: u64) -> Vec<SlopeFraction> {
    let mut pts = Vec::new();
    let mut run = |l: SlopeFraction, r: SlopeFraction, pts: &mut Vec<SlopeFraction>| {
        if l == r {
            return;
        }
        // k·l ⊕ r for k = K..1, then l ⊕ k·r for k = 2..K'
        let mut kl = 0;
        while (kl + 1) * l.den() + r.den() <= max_den {
            kl += 1;
        }
        for k in (1..=kl).rev() {
            let x = combine(k, l, 1, r);
            solver.remember(x, l, k, r, 1);
            pts.push(x);
        }
        let mut k = 2;
        while l.den() + k * r.den() <= max_den {
            let x = combine(1, l, k, r);
            solver.remember(x, l, 1, r, k);
            pts.push(x);
            k += 1;
        }
    };
    pts.push(lo);
    run(lo, c, &mut pts);
    if c != lo {
        pts.push(c);
    }
    run(c, hi, &mut pts);
    if hi != c {
        pts.push(hi);
    }
    pts
}

/// Leftmost peak of a unimodal sequence by binary search on consecutive
/// differences.
fn unimodal_peak(solver: &mut Solver, pts: &[SlopeFraction]) -> usize {
    let (mut a, mut b) = (0, pts.len() - 1);
    while a < b {
        let mid = (a + b) / 2;
        if solver.f(pts[mid]) >= solver.f(pts[mid + 1]) {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    a
}

/// Finds the Farey fraction of order `max_den` maximizing
/// `f(p/q) = (1/q)·ln ρ([c_{p/q}])` for a balanced pair.
pub fn maximize_slope(pair: &MatrixPair, max_den: u64) -> Result<SolveResult> {
    let class = classify(pair)?;
    if !class.is_balanced() {
        return Err(Error::NotBalanced(class.to_string()));
    }
    maximize_slope_unchecked(pair, max_den)
}

/// [`maximize_slope`] without the balance check; for pairs already known to
/// be balanced.
pub fn maximize_slope_unchecked(pair: &MatrixPair, max_den: u64) -> Result<SolveResult> {
    if max_den < 2 {
        return Err(Error::InvalidArgument(format!("max_den must be at least 2, got {max_den}")));
    }
    let mut solver = Solver::new(pair);
    let (zero, one) = (SlopeFraction::ZERO, SlopeFraction::ONE);
    let mut c = if solver.f(zero) >= solver.f(one) { zero } else { one };
    let (mut lo, mut hi) = (zero, one);
    let mut truncated = false;
    loop {
        let pts = round_points(&mut solver, lo, c, hi, max_den);
        let i = unimodal_peak(&mut solver, &pts);
        let q = pts[i];
        // keep the incumbent on ties
        if q == c || solver.f(q) <= solver.f(c) {
            let ci = pts.iter().position(|&x| x == c).expect("center is a candidate");
            lo = pts[ci.saturating_sub(1)];
            hi = pts[(ci + 1).min(pts.len() - 1)];
            break;
        }
        lo = pts[i.saturating_sub(1)];
        hi = pts[(i + 1).min(pts.len() - 1)];
        c = q;
        if solver.letters > LETTER_BUDGET {
            truncated = true;
            break;
        }
    }
    let f_c = solver.f(c);
    let (f_lo, f_hi) = (solver.f(lo), solver.f(hi));
    let bracket = if c == hi || (c != lo && f_lo >= f_hi) {
        FareyBracket { left: lo, right: c, f_left: f_lo, f_right: f_c }
    } else {
        FareyBracket { left: c, right: hi, f_left: f_c, f_right: f_hi }
    };
    Ok(SolveResult {
        tau_hat: c,
        chi_at_tau: f_c,
        bracket,
        enclosure: (lo, hi),
        max_den,
        evaluations: solver.values.len(),
        letters: solver.letters,
        truncated,
    })
}

/// Strict chord test at the mediant:
/// `f(m) > λ·f(left) + (1−λ)·f(right) − 1e−10` with `λ = q₁/(q₁+q₂)`.
pub fn concavity_probe(pair: &MatrixPair, bracket: &FareyBracket) -> Result<bool> {
    let (l, r) = (bracket.left, bracket.right);
    if l >= r || !l.is_farey_neighbor(&r) {
        return Err(Error::InvalidArgument(format!("{l}, {r} are not increasing Farey neighbors")));
    }
    let eval = ChiEvaluator::new(pair);
    let (fl, fr, fm) = (eval.chi(l), eval.chi(r), eval.chi(l.mediant(&r)));
    let lambda = l.den() as f64 / (l.den() + r.den()) as f64;
    Ok(fm - (lambda * fl + (1.0 - lambda) * fr) > -1e-10)
}

/// All increasing Farey-neighbor pairs in `[0, 1]` with `q₁ + q₂ ≤ max_sum`.
pub fn farey_brackets(max_sum: u64) -> Vec<(SlopeFraction, SlopeFraction)> {
    let mut out = Vec::new();
    let mut stack = vec![(SlopeFraction::ZERO, SlopeFraction::ONE)];
    while let Some((l, r)) = stack.pop() {
        if l.den() + r.den() > max_sum {
            continue;
        }
        out.push((l, r));
        let m = l.mediant(&r);
        stack.push((l, m));
        stack.push((m, r));
    }
    out.sort();
    out
}

pub fn bracket_of(pair: &MatrixPair, l: SlopeFraction, r: SlopeFraction) -> FareyBracket {
    let eval = ChiEvaluator::new(pair);
    FareyBracket { left: l, right: r, f_left: eval.chi(l), f_right: eval.chi(r) }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub t: f64,
    pub tau: SlopeFraction,
    pub chi: f64,
    /// `exp(chi)`: the normalized spectral radius of the maximizing cycle.
    pub jsr_lower: f64,
}

/// Consecutive sweep records sharing `tau`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plateau {
    pub tau: SlopeFraction,
    pub t_start: f64,
    pub t_end: f64,
    pub count: usize,
}

fn exact_float(t: f64) -> Result<Q> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!("grid point {t} must be positive and finite")));
    }
    Ok(BigRational::from_float(t).expect("finite"))
}

/// `τ̂(t)` for `(A, tB)` on each grid point, ordered by `t`.
pub fn sweep_family(a: &Mat2Q, b: &Mat2Q, t_grid: &[f64], max_den: u64) -> Result<Vec<SweepRecord>> {
    let base = MatrixPair::new(a.clone(), b.clone())?;
    let class = classify(&base)?;
    if !class.is_balanced() {
        return Err(Error::NotBalanced(class.to_string()));
    }
    let mut grid = t_grid.to_vec();
    grid.sort_by(|x, y| x.total_cmp(y));
    grid.par_iter()
        .map(|&t| {
            let pair = base.with_scaled_b(&exact_float(t)?)?;
            let r = maximize_slope_unchecked(&pair, max_den)?;
            Ok(SweepRecord { t, tau: r.tau_hat, chi: r.chi_at_tau, jsr_lower: r.chi_at_tau.exp() })
        })
        .collect()
}

pub fn plateaus(records: &[SweepRecord]) -> Vec<Plateau> {
    let mut out: Vec<Plateau> = Vec::new();
    for r in records {
        match out.last_mut() {
            Some(p) if p.tau == r.tau => {
                p.t_end = r.t;
                p.count += 1;
            }
            _ => out.push(Plateau { tau: r.tau, t_start: r.t, t_end: r.t, count: 1 }),
        }
    }
    out
}

/// `count` points spaced geometrically over `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln() / (count - 1) as f64;
            (0..count).map(|i| if i == count - 1 { hi } else { lo * (ratio * i as f64).exp() }).collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HuntResult {
    pub t_lo: f64,
    pub t_hi: f64,
    pub tau_lo: SlopeFraction,
    pub tau_hi: SlopeFraction,
    pub target: String,
    pub steps: usize,
}

/// Bisects `t ∈ [t_lo, t_hi]` while `τ̂(t)` straddles `target`, until the
/// interval is narrower than `tol` or `τ̂` hits the target exactly.
pub fn hunt_bracket(
    a: &Mat2Q,
    b: &Mat2Q,
    target: &BigRational,
    t_lo: f64,
    t_hi: f64,
    max_den: u64,
    tol: f64,
) -> Result<HuntResult> {
    if t_lo > t_hi {
        return Err(Error::InvalidArgument(format!("empty t-range {t_lo}:{t_hi}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let base = MatrixPair::new(a.clone(), b.clone())?;
    let class = classify(&base)?;
    if !class.is_balanced() {
        return Err(Error::NotBalanced(class.to_string()));
    }
    let tau = |t: f64| -> Result<SlopeFraction> {
        Ok(maximize_slope_unchecked(&base.with_scaled_b(&exact_float(t)?)?, max_den)?.tau_hat)
    };
    let (mut lo, mut hi) = (t_lo, t_hi);
    let (mut tau_lo, mut tau_hi) = (tau(lo)?, tau(hi)?);
    let hit = |t: f64, s: SlopeFraction, steps| HuntResult {
        t_lo: t,
        t_hi: t,
        tau_lo: s,
        tau_hi: s,
        target: target.to_string(),
        steps,
    };
    if tau_lo.to_rational() == *target {
        return Ok(hit(lo, tau_lo, 0));
    }
    if tau_hi.to_rational() == *target {
        return Ok(hit(hi, tau_hi, 0));
    }
    let below = |s: SlopeFraction| s.to_rational() < *target;
    let lo_below = below(tau_lo);
    if lo_below == below(tau_hi) {
        return Err(Error::InvalidArgument(format!(
            "tau({t_lo}) = {tau_lo} and tau({t_hi}) = {tau_hi} do not straddle {target}"
        )));
    }
    let mut steps = 0;
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        let s = tau(mid)?;
        steps += 1;
        if s.to_rational() == *target {
            return Ok(hit(mid, s, steps));
        }
        if below(s) == lo_below {
            lo = mid;
            tau_lo = s;
        } else {
            hi = mid;
            tau_hi = s;
        }
    }
    Ok(HuntResult { t_lo: lo, t_hi: hi, tau_lo, tau_hi, target: target.to_string(), steps })
}

/// The co-parallel pair `(H_{s,u}^λ, H_{s',u'}^{λ'})` with `u' < u < 0 < s < s'`.
pub fn lambda_family(s: &Q, u: &Q, s2: &Q, u2: &Q, lambda: &Q, lambda2: &Q) -> Result<MatrixPair> {
    if !(u2 < u && u < &Q::zero() && s < s2 && s > &Q::zero()) {
        return Err(Error::InvalidArgument("need u' < u < 0 < s < s'".into()));
    }
    if lambda2 <= &Q::one() || lambda < lambda2 {
        return Err(Error::InvalidArgument("need λ ≥ λ' > 1".into()));
    }
    MatrixPair::new(h(s.clone(), u.clone(), lambda.clone())?, h(s2.clone(), u2.clone(), lambda2.clone())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::{frac, p, q};

    fn golden() -> MatrixPair {
        let a = p(q(1)).unwrap();
        MatrixPair::new(a.clone(), a.transpose()).unwrap()
    }

    fn slope(p: u64, q: u64) -> SlopeFraction {
        SlopeFraction::new(p, q).unwrap()
    }

    /// Best fraction of order `n` by exhaustive evaluation.
    fn brute_force(pair: &MatrixPair, n: u64) -> SlopeFraction {
        let eval = ChiEvaluator::new(pair);
        let mut best = (f64::NEG_INFINITY, SlopeFraction::ZERO);
        for d in 1..=n {
            for k in 0..=d {
                let x = slope(k, d);
                if x.den() != d {
                    continue;
                }
                let v = eval.chi(x);
                if v > best.0 + 1e-13 {
                    best = (v, x);
                }
            }
        }
        best.1
    }

    #[test]
    fn golden_pair_solves_to_one_half() {
        let r = maximize_slope(&golden(), 100).unwrap();
        assert_eq!(r.tau_hat, slope(1, 2));
        assert_eq!(r.chi_at_tau, 0.48121182505960347);
        assert!(!r.truncated);
        let r = maximize_slope(&golden(), DEFAULT_MAX_DEN).unwrap();
        assert_eq!(r.tau_hat, slope(1, 2));
    }

    #[test]
    fn small_b_pushes_tau_toward_zero() {
        let pair = golden().with_scaled_b(&frac(1, 100)).unwrap();
        let r = maximize_slope(&pair, 100).unwrap();
        assert!(r.tau_hat <= slope(1, 10));
        let eval = ChiEvaluator::new(&pair);
        assert!(eval.chi(r.enclosure.1) <= r.chi_at_tau);
    }

    #[test]
    fn solver_matches_brute_force() {
        for (i, rp) in crate::family::balanced_family(11, 12).iter().enumerate() {
            let r = maximize_slope(&rp.pair, 40).unwrap();
            let eval = ChiEvaluator::new(&rp.pair);
            let bf = brute_force(&rp.pair, 40);
            assert!(
                (eval.chi(bf) - r.chi_at_tau).abs() < 1e-12,
                "pair {i}: solver {} vs brute force {}",
                r.tau_hat,
                bf
            );
            let s = maximize_slope(&rp.pair.swapped(), 40).unwrap();
            assert!((r.chi_at_tau - s.chi_at_tau).abs() < 1e-12);
        }
    }

    #[test]
    fn solver_rejects_bad_input() {
        let h1 = h(q(1), q(-1), q(2)).unwrap();
        let crossing = MatrixPair::new(h1, h(q(2), frac(-1, 2), q(3)).unwrap()).unwrap();
        assert!(matches!(maximize_slope(&crossing, 100), Err(Error::NotBalanced(_))));
        assert!(maximize_slope(&golden(), 1).is_err());
    }

    #[test]
    fn concavity_examples() {
        let g = golden();
        assert!(concavity_probe(&g, &bracket_of(&g, slope(0, 1), slope(1, 1))).unwrap());
        assert!(concavity_probe(&g, &bracket_of(&g, slope(1, 3), slope(1, 2))).unwrap());
        assert!(concavity_probe(&g, &bracket_of(&g, slope(1, 2), slope(1, 2))).is_err());
        assert!(concavity_probe(&g, &bracket_of(&g, slope(1, 3), slope(2, 3))).is_err());
        let all = farey_brackets(30);
        assert!(all.iter().all(|(l, r)| l.is_farey_neighbor(r) && l < r && l.den() + r.den() <= 30));
        for (l, r) in all {
            assert!(concavity_probe(&g, &bracket_of(&g, l, r)).unwrap());
        }
    }

    #[test]
    fn sweep_examples() {
        let a = p(q(1)).unwrap();
        let b = a.transpose();
        let r = sweep_family(&a, &b, &[1.0], 100).unwrap();
        assert_eq!(r[0].tau, slope(1, 2));
        let r = sweep_family(&a, &b, &[0.25, 4.0], 200).unwrap();
        assert_eq!(r[0].tau, r[1].tau.complement());
        let r = sweep_family(&a, &b, &[100.0, 0.01], 200).unwrap();
        assert!(r[0].t < r[1].t);
        assert!(r[0].tau < slope(1, 10) && r[1].tau > slope(9, 10));
        assert!(sweep_family(&a, &b, &[], 100).unwrap().is_empty());
        let grid = geometric_grid(0.05, 20.0, 5);
        assert_eq!((grid[0], grid[4]), (0.05, 20.0));
    }

    #[test]
    fn plateau_merging() {
        let rec = |t, p, q| SweepRecord { t, tau: slope(p, q), chi: 0.0, jsr_lower: 1.0 };
        let pl = plateaus(&[rec(1.0, 1, 2), rec(2.0, 1, 2), rec(3.0, 2, 3)]);
        assert_eq!(pl.len(), 2);
        assert_eq!((pl[0].t_start, pl[0].t_end, pl[0].count), (1.0, 2.0, 2));
    }

    #[test]
    fn hunt_examples() {
        let a = p(q(1)).unwrap();
        let b = a.transpose();
        let r = hunt_bracket(&a, &b, &frac(1, 2), 1.0, 1.0, 100, 1e-4).unwrap();
        assert_eq!((r.t_lo, r.t_hi, r.tau_lo), (1.0, 1.0, slope(1, 2)));
        let target = BigRational::from_float((3.0 - 5f64.sqrt()) / 2.0).unwrap();
        let r = hunt_bracket(&a, &b, &target, 0.1, 1.0, 200, 1e-4).unwrap();
        assert!(r.t_hi - r.t_lo <= 1e-4);
        assert!(r.tau_lo.to_rational() < target && target < r.tau_hi.to_rational());
        assert!(hunt_bracket(&a, &b, &target, 1.0, 2.0, 200, 1e-4).is_err());
    }

    #[test]
    fn lambda_family_examples() {
        let (s, u, s2, u2) = (q(1), q(-1), q(2), q(-2));
        let equal = lambda_family(&s, &u, &s2, &u2, &q(2), &q(2)).unwrap();
        assert_eq!(maximize_slope(&equal, 200).unwrap().tau_hat, slope(1, 2));
        let big = lambda_family(&s, &u, &s2, &u2, &q(1000), &q(2)).unwrap();
        assert!(maximize_slope(&big, 200).unwrap().tau_hat < slope(1, 5));
        assert!(lambda_family(&s, &u, &s2, &u2, &q(1), &q(2)).is_err());
    }
}
