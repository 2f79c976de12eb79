//! Matrix pairs: unimodular normalization, balanced/crossing
//! classification from fixed-point configurations, invariant cones, and
//! a floating-point normal-form conjugator for inspection.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::{
    fixed_points, hs_norm_sq, q, rational_to_f64, spectral_class, word_product, Arc, FixedPoints, Mat2Q,
    ProjectivePoint, SpectralClass, Q,
};
use crate::words::Word;

/// An ordered pair `(A, B)` with positive determinants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPair")]
pub struct MatrixPair {
    #[serde(rename = "A")]
    a: Mat2Q,
    #[serde(rename = "B")]
    b: Mat2Q,
}

#[derive(Deserialize)]
struct RawPair {
    #[serde(rename = "A")]
    a: Mat2Q,
    #[serde(rename = "B")]
    b: Mat2Q,
}

impl TryFrom<RawPair> for MatrixPair {
    type Error = Error;

    fn try_from(raw: RawPair) -> Result<Self> {
        MatrixPair::new(raw.a, raw.b)
    }
}

impl MatrixPair {
    pub fn new(a: Mat2Q, b: Mat2Q) -> Result<Self> {
        for m in [&a, &b] {
            let det = m.det();
            if !det.is_positive() {
                return Err(Error::NonPositiveDeterminant(det.to_string()));
            }
        }
        Ok(MatrixPair { a, b })
    }

    pub fn a(&self) -> &Mat2Q {
        &self.a
    }

    pub fn b(&self) -> &Mat2Q {
        &self.b
    }

    pub fn as_tuple(&self) -> (&Mat2Q, &Mat2Q) {
        (&self.a, &self.b)
    }

    /// `(B, A)`; relabels letters `0 ↔ 1`.
    pub fn swapped(&self) -> MatrixPair {
        MatrixPair { a: self.b.clone(), b: self.a.clone() }
    }

    pub fn product(&self, w: &Word) -> Mat2Q {
        word_product(self.as_tuple(), w)
    }

    /// `(A, t·B)`.
    pub fn with_scaled_b(&self, t: &Q) -> Result<MatrixPair> {
        MatrixPair::new(self.a.clone(), self.b.scale(t))
    }
}

impl fmt::Display for MatrixPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(A = {}, B = {})", self.a, self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    /// Case (h): two hyperbolics with nested fixed-point chords.
    CoParallel,
    /// Case (m): a hyperbolic and a parabolic.
    Mixed,
    /// Case (p): two opposed parabolics.
    ParabolicPair,
    Crossing,
    SharedFixedPoint,
    Elliptic,
    IdentityComponent,
    NotBalanced,
}

impl PairClass {
    pub fn is_balanced(self) -> bool {
        matches!(self, PairClass::CoParallel | PairClass::Mixed | PairClass::ParabolicPair)
    }

    pub fn name(self) -> &'static str {
        match self {
            PairClass::CoParallel => "co_parallel",
            PairClass::Mixed => "mixed",
            PairClass::ParabolicPair => "parabolic_pair",
            PairClass::Crossing => "crossing",
            PairClass::SharedFixedPoint => "shared_fixed_point",
            PairClass::Elliptic => "elliptic",
            PairClass::IdentityComponent => "identity_component",
            PairClass::NotBalanced => "not_balanced",
        }
    }

    /// Normal-form case letter for balanced classes.
    pub fn case_tag(self) -> Option<char> {
        match self {
            PairClass::CoParallel => Some('h'),
            PairClass::Mixed => Some('m'),
            PairClass::ParabolicPair => Some('p'),
            _ => None,
        }
    }
}

impl fmt::Display for PairClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One matrix scaled into `𝔞`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledMatrix {
    pub scalar: f64,
    /// Present when `det` is the square of a rational.
    pub exact_scalar: Option<String>,
    #[serde(skip)]
    pub exact: Option<Mat2Q>,
    pub matrix: [[f64; 2]; 2],
    pub class: SpectralClass,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizedPair {
    pub a: ScaledMatrix,
    pub b: ScaledMatrix,
}

impl NormalizedPair {
    pub fn scalars(&self) -> [f64; 2] {
        [self.a.scalar, self.b.scalar]
    }

    /// The scaled pair with exact entries, when both scalars are rational.
    pub fn exact_pair(&self) -> Option<MatrixPair> {
        MatrixPair::new(self.a.exact.clone()?, self.b.exact.clone()?).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Normalization {
    Normalized(NormalizedPair),
    Degenerate(PairClass),
}

/// `√r` when `r` is the square of a rational.
fn rational_sqrt(r: &Q) -> Option<Q> {
    if r.is_negative() {
        return None;
    }
    let root = |n: &BigInt| {
        let s = n.sqrt();
        (&s * &s == *n).then_some(s)
    };
    Some(Q::new(root(r.numer())?, root(r.denom())?))
}

fn scale_one(m: &Mat2Q) -> std::result::Result<ScaledMatrix, PairClass> {
    if m.is_scalar() {
        return Err(PairClass::IdentityComponent);
    }
    let tr = m.trace();
    let det = m.det();
    if tr.is_zero() || &tr * &tr < q(4) * &det {
        return Err(PairClass::Elliptic);
    }
    let sign = if tr.is_negative() { -1.0 } else { 1.0 };
    let det_f = rational_to_f64(&det);
    let scalar = sign / det_f.sqrt();
    let exact_scalar = rational_sqrt(&det).map(|r| if tr.is_negative() { -r.recip() } else { r.recip() });
    let exact = exact_scalar.as_ref().map(|s| m.scale(s));
    let matrix = match &exact {
        Some(e) => e.to_f64(),
        None => {
            let f = m.to_f64();
            [[f[0][0] * scalar, f[0][1] * scalar], [f[1][0] * scalar, f[1][1] * scalar]]
        }
    };
    let class = if sign > 0.0 {
        spectral_class(m).expect("det > 0")
    } else {
        spectral_class(&m.scale(&q(-1))).expect("det > 0")
    };
    Ok(ScaledMatrix { scalar, exact_scalar: exact_scalar.map(|s| s.to_string()), exact, matrix, class })
}

/// Scales both matrices into `𝔞` (det 1, trace ≥ 2), choosing the sign of
/// each scalar by the sign of the trace.
pub fn normalize_to_unimodular(pair: &MatrixPair) -> Normalization {
    match (scale_one(&pair.a), scale_one(&pair.b)) {
        (Ok(a), Ok(b)) => Normalization::Normalized(NormalizedPair { a, b }),
        (Err(c), _) | (_, Err(c)) => Normalization::Degenerate(c),
    }
}

/// The open arc with endpoints `x`, `y` that does not contain `avoid`.
pub fn arc_avoiding(x: &ProjectivePoint, y: &ProjectivePoint, avoid: &ProjectivePoint) -> Arc {
    let forward = Arc { from: x.clone(), to: y.clone() };
    if forward.contains(avoid) {
        Arc { from: y.clone(), to: x.clone() }
    } else {
        forward
    }
}

/// The open arc with endpoints `x`, `y` that contains `inside`.
pub fn arc_through(x: &ProjectivePoint, y: &ProjectivePoint, inside: &ProjectivePoint) -> Arc {
    let forward = Arc { from: x.clone(), to: y.clone() };
    if forward.contains(inside) {
        forward
    } else {
        Arc { from: y.clone(), to: x.clone() }
    }
}

/// Fixed points and spectral data of one matrix of a non-degenerate pair.
fn hyperbolic_points(fp: &FixedPoints) -> Option<(&ProjectivePoint, &ProjectivePoint)> {
    match fp {
        FixedPoints::Hyperbolic { attracting, repelling } => Some((attracting, repelling)),
        FixedPoints::Parabolic { .. } => None,
    }
}

fn parabolic_point(fp: &FixedPoints) -> Option<&ProjectivePoint> {
    match fp {
        FixedPoints::Parabolic { point } => Some(point),
        FixedPoints::Hyperbolic { .. } => None,
    }
}

fn classify_hyperbolics(
    (sa, ua): (&ProjectivePoint, &ProjectivePoint),
    (sb, ub): (&ProjectivePoint, &ProjectivePoint),
) -> PairClass {
    // s_B and u_B on the same side of the chord {s_A, u_A}?
    let arc_a = Arc { from: sa.clone(), to: ua.clone() };
    let nested = arc_a.contains(sb) == arc_a.contains(ub);
    // attractors adjacent iff the chord {s_A, s_B} does not separate the repellers
    let arc_s = Arc { from: sa.clone(), to: sb.clone() };
    let attractors_adjacent = arc_s.contains(ua) == arc_s.contains(ub);
    match (attractors_adjacent, nested) {
        (false, _) => PairClass::NotBalanced,
        (true, true) => PairClass::CoParallel,
        (true, false) => PairClass::Crossing,
    }
}

/// Direction test for a hyperbolic `H` (fixed points `s`, `u`) and a
/// parabolic `P` fixing `p`; the two dual tests must agree.
fn classify_mixed(
    parabolic: &Mat2Q,
    p: &ProjectivePoint,
    (s, u): (&ProjectivePoint, &ProjectivePoint),
) -> Result<PairClass> {
    let forward = arc_avoiding(p, s, u).contains(&parabolic.apply(s));
    let inverse = parabolic.inverse()?;
    let backward = arc_avoiding(p, u, s).contains(&inverse.apply(u));
    if forward != backward {
        return Err(Error::Internal(format!(
            "mixed-case direction tests disagree (at s: {forward}, at u: {backward})"
        )));
    }
    Ok(if forward { PairClass::Mixed } else { PairClass::NotBalanced })
}

/// Decides the class of a pair from conjugation-invariant data.
pub fn classify(pair: &MatrixPair) -> Result<PairClass> {
    if let Normalization::Degenerate(c) = normalize_to_unimodular(pair) {
        return Ok(c);
    }
    let fa = fixed_points(&pair.a)?;
    let fb = fixed_points(&pair.b)?;
    if fa.points().iter().any(|x| fb.points().contains(x)) {
        return Ok(PairClass::SharedFixedPoint);
    }
    match (hyperbolic_points(&fa), hyperbolic_points(&fb)) {
        (Some(ha), Some(hb)) => Ok(classify_hyperbolics(ha, hb)),
        (Some(ha), None) => classify_mixed(&pair.b, parabolic_point(&fb).unwrap(), ha),
        (None, Some(hb)) => classify_mixed(&pair.a, parabolic_point(&fa).unwrap(), hb),
        (None, None) => {
            let (pa, pb) = (parabolic_point(&fa).unwrap(), parabolic_point(&fb).unwrap());
            let side = Arc { from: pa.clone(), to: pb.clone() };
            let same = side.contains(&pair.a.apply(pb)) == side.contains(&pair.b.apply(pa));
            Ok(if same { PairClass::ParabolicPair } else { PairClass::NotBalanced })
        }
    }
}

/// Invariant arcs `I⁺` (attractors) and `I⁻` (repellers) in the original
/// coordinates of a balanced pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeData {
    #[serde(rename = "Iplus")]
    pub i_plus: Arc,
    #[serde(rename = "Iminus")]
    pub i_minus: Arc,
}

pub fn cones(pair: &MatrixPair) -> Result<ConeData> {
    let class = classify(pair)?;
    let fa = fixed_points(&pair.a)?;
    let fb = fixed_points(&pair.b)?;
    match class {
        PairClass::CoParallel => {
            let (sa, ua) = hyperbolic_points(&fa).unwrap();
            let (sb, ub) = hyperbolic_points(&fb).unwrap();
            Ok(ConeData { i_plus: arc_avoiding(sa, sb, ua), i_minus: arc_avoiding(ua, ub, sa) })
        }
        PairClass::Mixed => {
            let (h, p) = match (hyperbolic_points(&fa), parabolic_point(&fb)) {
                (Some(h), Some(p)) => (h, p),
                _ => (hyperbolic_points(&fb).unwrap(), parabolic_point(&fa).unwrap()),
            };
            let (s, u) = h;
            Ok(ConeData { i_plus: arc_avoiding(p, s, u), i_minus: arc_avoiding(u, p, s) })
        }
        PairClass::ParabolicPair => {
            let (pa, pb) = (parabolic_point(&fa).unwrap(), parabolic_point(&fb).unwrap());
            let i_plus = arc_through(pa, pb, &pair.a.apply(pb));
            let i_minus = Arc { from: i_plus.to.clone(), to: i_plus.from.clone() };
            Ok(ConeData { i_plus, i_minus })
        }
        other => Err(Error::NotBalanced(other.to_string())),
    }
}

/// Image of an open arc under an orientation-preserving Möbius map.
pub fn arc_image(x: &Mat2Q, arc: &Arc) -> Arc {
    Arc { from: x.apply(&arc.from), to: x.apply(&arc.to) }
}

type M2 = [[f64; 2]; 2];

fn mul2(x: &M2, y: &M2) -> M2 {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

fn inv2(x: &M2) -> M2 {
    let det = x[0][0] * x[1][1] - x[0][1] * x[1][0];
    [[x[1][1] / det, -x[0][1] / det], [-x[1][0] / det, x[0][0] / det]]
}

fn homogeneous(z: f64) -> [f64; 2] {
    if z.is_infinite() {
        [1.0, 0.0]
    } else {
        [z, 1.0]
    }
}

/// Möbius matrix sending `∞, 0, 1` to `z1, z2, z3`.
fn three_point_frame(z1: f64, z2: f64, z3: f64) -> M2 {
    let (v1, v2, v3) = (homogeneous(z1), homogeneous(z2), homogeneous(z3));
    // α v1 + β v2 = v3
    let det = v1[0] * v2[1] - v1[1] * v2[0];
    let alpha = (v3[0] * v2[1] - v3[1] * v2[0]) / det;
    let beta = (v1[0] * v3[1] - v1[1] * v3[0]) / det;
    [[alpha * v1[0], beta * v2[0]], [alpha * v1[1], beta * v2[1]]]
}

/// Matrix of the Möbius map sending `from[i]` to `to[i]`.
fn mobius_through(from: [f64; 3], to: [f64; 3]) -> M2 {
    let f = three_point_frame(from[0], from[1], from[2]);
    let g = three_point_frame(to[0], to[1], to[2]);
    mul2(&g, &inv2(&f))
}

fn apply2(x: &M2, z: f64) -> f64 {
    if z.is_infinite() {
        return x[0][0] / x[1][0];
    }
    (x[0][0] * z + x[0][1]) / (x[1][0] * z + x[1][1])
}

/// Fixed points `(s, u)` of a float matrix with trace > 2·√det, or the
/// parabolic point.
fn fixed_points_f64(x: &M2) -> (f64, f64) {
    let [[a, b], [c, d]] = *x;
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b * c).max(0.0).sqrt();
    if c == 0.0 {
        return if a.abs() < d.abs() { (b / (d - a), f64::INFINITY) } else { (f64::INFINITY, b / (d - a)) };
    }
    let plus = (a - d + disc) / (2.0 * c);
    let minus = (a - d - disc) / (2.0 * c);
    if tr >= 0.0 {
        (plus, minus)
    } else {
        (minus, plus)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalFormReport {
    pub case: char,
    /// `T` with `T⁻¹ A′ T` in normal form, `A′` the scaled matrices.
    #[serde(rename = "T")]
    pub t: M2,
    pub conjugated: [M2; 2],
    /// Normal-form parameters: fixed points or the parabolic coefficients.
    pub parameters: Vec<f64>,
}

const NF_TOL: f64 = 1e-9;

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= NF_TOL * (1.0 + y.abs())
}

fn conjugate(t: &M2, x: &M2) -> M2 {
    mul2(&mul2(&inv2(t), x), t)
}

fn to_point(p: &ProjectivePoint) -> f64 {
    p.to_f64()
}

/// `Some(x)` if `m ≈ [[1, 0], [x, 1]]` with `x > 0`.
fn as_lower_parabolic(m: &M2) -> Option<f64> {
    (close(m[0][0], 1.0) && close(m[1][1], 1.0) && m[0][1].abs() <= NF_TOL && m[1][0] > NF_TOL).then_some(m[1][0])
}

fn check_h(conj: &[M2; 2]) -> std::result::Result<Vec<f64>, String> {
    let (s_a, u_a) = fixed_points_f64(&conj[0]);
    let (s_b, u_b) = fixed_points_f64(&conj[1]);
    let (inner, outer) = if s_a < s_b { ((s_a, u_a), (s_b, u_b)) } else { ((s_b, u_b), (s_a, u_a)) };
    let (s1, u1) = inner;
    let (s2, u2) = outer;
    let ok = u2 < u1 - NF_TOL && u1 < -NF_TOL && s1 > NF_TOL && s2 > s1 + NF_TOL;
    if ok && [s1, u1, s2, u2].iter().all(|v| v.is_finite()) {
        Ok(vec![s1, u1, s2, u2])
    } else {
        Err(format!("u2 < u1 < 0 < s1 < s2 fails for s = ({s1}, {s2}), u = ({u1}, {u2})"))
    }
}

fn check_m(conj: &[M2; 2], hyperbolic_first: bool) -> std::result::Result<Vec<f64>, String> {
    let (hm, pm) = if hyperbolic_first { (&conj[0], &conj[1]) } else { (&conj[1], &conj[0]) };
    let x = as_lower_parabolic(pm).ok_or_else(|| format!("parabolic is not of the form P_x with x > 0: {pm:?}"))?;
    let (s, u) = fixed_points_f64(hm);
    if !(u < -NF_TOL && s > NF_TOL && s.is_finite() && u.is_finite()) {
        return Err(format!("u < 0 < s fails for s = {s}, u = {u}"));
    }
    Ok(vec![s, u, x])
}

fn check_p(conj: &[M2; 2]) -> std::result::Result<Vec<f64>, String> {
    let x = as_lower_parabolic(&conj[0]).ok_or_else(|| format!("A is not P_x with x > 0: {:?}", conj[0]))?;
    let bt = [[conj[1][1][1], conj[1][1][0]], [conj[1][0][1], conj[1][0][0]]];
    let y = as_lower_parabolic(&bt).ok_or_else(|| format!("B is not P_y^t with y > 0: {:?}", conj[1]))?;
    Ok(vec![x, y])
}

/// Builds `T` for a balanced pair so that `T⁻¹ (aA) T`, `T⁻¹ (bB) T` is a
/// normal form, trying a short list of candidate frames.
pub fn normal_form_conjugator(pair: &MatrixPair) -> Result<NormalFormReport> {
    let class = classify(pair)?;
    let Normalization::Normalized(norm) = normalize_to_unimodular(pair) else {
        return Err(Error::NotBalanced(class.to_string()));
    };
    let mats = [norm.a.matrix, norm.b.matrix];
    let fa = fixed_points(&pair.a)?;
    let fb = fixed_points(&pair.b)?;
    let mut failures = Vec::new();
    let mut attempt = |t: M2, check: &dyn Fn(&[M2; 2]) -> std::result::Result<Vec<f64>, String>| {
        let conjugated = [conjugate(&t, &mats[0]), conjugate(&t, &mats[1])];
        match check(&conjugated) {
            Ok(parameters) => Some((t, conjugated, parameters)),
            Err(e) => {
                failures.push(e);
                None
            }
        }
    };

    let found = match class {
        PairClass::CoParallel => {
            let (sa, ua) = hyperbolic_points(&fa).unwrap();
            let (sb, ub) = hyperbolic_points(&fb).unwrap();
            let (sa, ua, sb, ub) = (to_point(sa), to_point(ua), to_point(sb), to_point(ub));
            // T maps normal coordinates to original ones
            let first = mobius_through([-2.0, -1.0, 1.0], [ub, ua, sa]);
            attempt(first, &check_h).or_else(|| {
                let mid = apply2(&first, 0.0);
                attempt(mobius_through([-2.0, 0.0, 2.0], [ub, mid, sb]), &check_h)
            })
        }
        PairClass::Mixed => {
            let hyperbolic_first = hyperbolic_points(&fa).is_some();
            let (h, p) = if hyperbolic_first {
                (hyperbolic_points(&fa).unwrap(), parabolic_point(&fb).unwrap())
            } else {
                (hyperbolic_points(&fb).unwrap(), parabolic_point(&fa).unwrap())
            };
            let (s, u, p) = (to_point(h.0), to_point(h.1), to_point(p));
            let check = |c: &[M2; 2]| check_m(c, hyperbolic_first);
            let t = mobius_through([0.0, -1.0, 1.0], [p, u, s]);
            attempt(t, &check).or_else(|| {
                let flip = [[-1.0, 0.0], [0.0, 1.0]];
                attempt(mul2(&t, &flip), &check)
            })
        }
        PairClass::ParabolicPair => {
            let (pa, pb) = (to_point(parabolic_point(&fa).unwrap()), to_point(parabolic_point(&fb).unwrap()));
            let (va, vb) = (homogeneous(pa), homogeneous(pb));
            // T e₁ ∝ p_B (∞ ↦ p_B), T e₂ ∝ p_A (0 ↦ p_A)
            let t0 = [[vb[0], va[0]], [vb[1], va[1]]];
            let a0 = conjugate(&t0, &mats[0]);
            let b0 = conjugate(&t0, &mats[1]);
            let (x0, y0) = (a0[1][0], b0[0][1]);
            // diag(k, 1) turns (x, y) into (x k, y / k); balance them
            let k = (y0 / x0).abs().sqrt() * x0.signum();
            let t = mul2(&t0, &[[k, 0.0], [0.0, 1.0]]);
            attempt(t, &check_p)
        }
        other => return Err(Error::NotBalanced(other.to_string())),
    };
    let (t, conjugated, parameters) = found.ok_or_else(|| Error::NormalForm(failures.join("; ")))?;
    Ok(NormalFormReport { case: class.case_tag().unwrap(), t, conjugated, parameters })
}

/// Per-item outcome of [`balanced_pair_checks`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancedChecks {
    /// Every non-empty word of length ≤ 8 lands in `𝔞`, mixed words in `𝔥`.
    pub words_in_a: bool,
    /// `{X, Y}` balanced for `X ∈ {A, B}`, `Y ∈ {AB, BA}`.
    pub sub_pairs_balanced: bool,
    /// `{AB, BA}` is a crossing pair.
    pub products_crossing: bool,
    /// `tr((AB)²) > tr(A²B²)`.
    pub trace_inequality: bool,
    pub tr_abab: String,
    pub tr_aabb: String,
}

impl BalancedChecks {
    pub fn all_pass(&self) -> bool {
        self.words_in_a && self.sub_pairs_balanced && self.products_crossing && self.trace_inequality
    }
}

/// The exactly scaled unimodular pair of a balanced pair.
pub fn exact_unimodular(pair: &MatrixPair) -> Result<MatrixPair> {
    match normalize_to_unimodular(pair) {
        Normalization::Normalized(n) => n.exact_pair().ok_or(Error::InexactNormalization),
        Normalization::Degenerate(c) => Err(Error::NotBalanced(c.to_string())),
    }
}

/// Exact structural checks for a balanced pair (scaled to `𝔞²` first).
pub fn balanced_pair_checks(pair: &MatrixPair) -> Result<BalancedChecks> {
    let class = classify(pair)?;
    if !class.is_balanced() {
        return Err(Error::NotBalanced(class.to_string()));
    }
    let pair = exact_unimodular(pair)?;
    let (a, b) = (pair.a(), pair.b());

    let mut words_in_a = true;
    let mut frontier = vec![(Mat2Q::identity(), false, false)];
    for _ in 0..8 {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (m, has0, has1) in &frontier {
            for (letter, g) in [(0, a), (1, b)] {
                let prod = m * g;
                let (h0, h1) = (*has0 || letter == 0, *has1 || letter == 1);
                words_in_a &= prod.is_in_a();
                if h0 && h1 {
                    words_in_a &= prod.trace() > q(2);
                }
                next.push((prod, h0, h1));
            }
        }
        frontier = next;
    }

    let ab = a * b;
    let ba = b * a;
    let mut sub_pairs_balanced = true;
    for x in [a, b] {
        for y in [&ab, &ba] {
            sub_pairs_balanced &= classify(&MatrixPair::new(x.clone(), y.clone())?)?.is_balanced();
        }
    }
    let products_crossing = classify(&MatrixPair::new(ab.clone(), ba)?)? == PairClass::Crossing;
    let tr_abab = (&ab * &ab).trace();
    let tr_aabb = (&(a * a) * &(b * b)).trace();
    Ok(BalancedChecks {
        words_in_a,
        sub_pairs_balanced,
        products_crossing,
        trace_inequality: tr_abab > tr_aabb,
        tr_abab: tr_abab.to_string(),
        tr_aabb: tr_aabb.to_string(),
    })
}

/// Everything the `classify` command reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub class: PairClass,
    pub scalars: Option<[f64; 2]>,
    pub normalization: Option<NormalizedPair>,
    pub fixed_points: Option<[FixedPoints; 2]>,
    pub cones: Option<ConeData>,
    #[serde(rename = "T")]
    pub conjugator: Option<NormalFormReport>,
}

pub fn classification_report(pair: &MatrixPair) -> Result<ClassificationReport> {
    let class = classify(pair)?;
    let normalization = match normalize_to_unimodular(pair) {
        Normalization::Normalized(n) => Some(n),
        Normalization::Degenerate(_) => None,
    };
    let fixed_points = match (fixed_points(&pair.a), fixed_points(&pair.b)) {
        (Ok(x), Ok(y)) => Some([x, y]),
        _ => None,
    };
    let (cones, conjugator) = if class.is_balanced() {
        (Some(cones(pair)?), Some(normal_form_conjugator(pair)?))
    } else {
        (None, None)
    };
    Ok(ClassificationReport {
        class,
        scalars: normalization.as_ref().map(|n| n.scalars()),
        normalization,
        fixed_points,
        cones,
        conjugator,
    })
}

/// Squared Hilbert–Schmidt norm of `[w]`, as a convenience for callers
/// holding a pair.
pub fn word_hs_norm_sq(pair: &MatrixPair, w: &Word) -> Q {
    hs_norm_sq(&pair.product(w))
}

/// `true` iff the determinant of both matrices is exactly one.
pub fn is_unimodular(pair: &MatrixPair) -> bool {
    pair.a.det().is_one() && pair.b.det().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::{frac, h, p, pt};

    fn p1() -> Mat2Q {
        p(q(1)).unwrap()
    }

    fn pair(a: Mat2Q, b: Mat2Q) -> MatrixPair {
        MatrixPair::new(a, b).unwrap()
    }

    fn golden() -> MatrixPair {
        pair(p1(), p1().transpose())
    }

    #[test]
    fn normalization_examples() {
        let Normalization::Normalized(n) = normalize_to_unimodular(&pair(p1().scale(&q(2)), p1().transpose().scale(&q(3))))
        else {
            panic!("expected normalization")
        };
        assert!((n.a.scalar - 0.5).abs() < 1e-15 && (n.b.scalar - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(n.a.class, SpectralClass::Parabolic);
        assert_eq!(n.exact_pair().unwrap(), golden());

        let rot = Mat2Q::from_ints(0, -1, 1, 0);
        assert_eq!(normalize_to_unimodular(&pair(rot, p1())), Normalization::Degenerate(PairClass::Elliptic));

        let Normalization::Normalized(n) = normalize_to_unimodular(&golden()) else { panic!() };
        assert_eq!(n.scalars(), [1.0, 1.0]);

        // negative trace flips the sign of the scalar
        let Normalization::Normalized(n) = normalize_to_unimodular(&pair(p1().scale(&q(-2)), p1().transpose()))
        else {
            panic!()
        };
        assert_eq!(n.a.scalar, -0.5);
        assert_eq!(n.a.exact_scalar.as_deref(), Some("-1/2"));

        assert_eq!(
            normalize_to_unimodular(&pair(Mat2Q::scalar(q(2)), p1())),
            Normalization::Degenerate(PairClass::IdentityComponent)
        );
        assert!(MatrixPair::new(Mat2Q::from_ints(0, 1, 1, 0), p1()).is_err());
    }

    #[test]
    fn classify_examples() {
        let h1 = h(q(1), q(-1), q(2)).unwrap();
        assert_eq!(classify(&pair(h1.clone(), h(q(2), q(-2), q(3)).unwrap())).unwrap(), PairClass::CoParallel);
        assert_eq!(classify(&pair(h1.clone(), h(q(2), frac(-1, 2), q(3)).unwrap())).unwrap(), PairClass::Crossing);
        assert_eq!(classify(&golden()).unwrap(), PairClass::ParabolicPair);
        assert_eq!(classify(&pair(p1(), Mat2Q::from_ints(1, -1, 0, 1))).unwrap(), PairClass::NotBalanced);
        assert_eq!(classify(&pair(h1.clone(), p1())).unwrap(), PairClass::Mixed);
        assert_eq!(classify(&pair(p1(), h1.clone())).unwrap(), PairClass::Mixed);
        assert_eq!(classify(&pair(h1.clone(), Mat2Q::from_ints(1, 0, -1, 1))).unwrap(), PairClass::NotBalanced);
        // alternating attractors and repellers: u_A < s_A < u_B < s_B
        let shift = Mat2Q::from_ints(1, 3, 0, 1);
        let hb = &(&shift * &h1) * &shift.inverse().unwrap();
        assert_eq!(classify(&pair(h1.clone(), hb)).unwrap(), PairClass::NotBalanced);
        assert_eq!(classify(&pair(h1.clone(), h(q(1), q(-2), q(3)).unwrap())).unwrap(), PairClass::SharedFixedPoint);
        assert_eq!(classify(&pair(h1, Mat2Q::from_ints(0, -1, 1, 0))).unwrap(), PairClass::Elliptic);
    }

    #[test]
    fn classify_is_conjugation_invariant() {
        let t = Mat2Q::from_ints(2, 1, 1, 1);
        let ti = t.inverse().unwrap();
        let conj = |m: &Mat2Q| &(&t * m) * &ti;
        let cases = [
            (golden(), PairClass::ParabolicPair),
            (pair(h(q(1), q(-1), q(2)).unwrap(), p1()), PairClass::Mixed),
            (pair(h(q(1), q(-1), q(2)).unwrap(), h(q(2), q(-2), q(3)).unwrap()), PairClass::CoParallel),
            (pair(h(q(1), q(-1), q(2)).unwrap(), h(q(2), frac(-1, 2), q(3)).unwrap()), PairClass::Crossing),
        ];
        for (pr, class) in cases {
            let c = pair(conj(pr.a()), conj(pr.b()));
            assert_eq!(classify(&c).unwrap(), class);
            let flip = Mat2Q::from_ints(-1, 0, 0, 1);
            let f = |m: &Mat2Q| &(&flip * m) * &flip;
            assert_eq!(classify(&pair(f(pr.a()), f(pr.b()))).unwrap(), class);
        }
    }

    #[test]
    fn conjugator_examples() {
        let r = normal_form_conjugator(&golden()).unwrap();
        assert_eq!(r.case, 'p');
        assert_eq!(r.t, [[1.0, 0.0], [0.0, 1.0]]);

        let t = Mat2Q::from_ints(2, 1, 1, 1);
        let ti = t.inverse().unwrap();
        let conj = |m: &Mat2Q| &(&t * m) * &ti;
        let r = normal_form_conjugator(&pair(conj(&p1()), conj(&p1().transpose()))).unwrap();
        assert_eq!(r.case, 'p');
        let want = [[[1.0, 0.0], [1.0, 1.0]], [[1.0, 1.0], [0.0, 1.0]]];
        for (got, want) in r.conjugated.iter().zip(want) {
            for i in 0..2 {
                for j in 0..2 {
                    assert!((got[i][j] - want[i][j]).abs() < 1e-9, "{got:?}");
                }
            }
        }

        let r = normal_form_conjugator(&pair(h(q(1), q(-1), q(2)).unwrap(), p1())).unwrap();
        assert_eq!(r.case, 'm');
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((r.t[i][j] - id).abs() < 1e-12);
            }
        }

        let hh = pair(h(q(2), q(-2), q(3)).unwrap(), h(q(1), q(-1), q(2)).unwrap());
        assert_eq!(normal_form_conjugator(&hh).unwrap().case, 'h');
        let crossing = pair(h(q(1), q(-1), q(2)).unwrap(), h(q(2), frac(-1, 2), q(3)).unwrap());
        assert!(matches!(normal_form_conjugator(&crossing), Err(Error::NotBalanced(_))));
    }

    #[test]
    fn balanced_check_examples() {
        let r = balanced_pair_checks(&golden()).unwrap();
        assert!(r.all_pass());
        assert_eq!((r.tr_abab.as_str(), r.tr_aabb.as_str()), ("7", "6"));
        let ab = Mat2Q::from_ints(1, 1, 1, 2);
        let ba = Mat2Q::from_ints(2, 1, 1, 1);
        assert_eq!(golden().product(&"01".parse().unwrap()), ab);
        assert_eq!(classify(&pair(ab, ba)).unwrap(), PairClass::Crossing);
        let hh = pair(h(q(1), q(-1), q(2)).unwrap(), h(q(2), q(-2), q(3)).unwrap());
        assert!(balanced_pair_checks(&hh).unwrap().all_pass());
        assert!(balanced_pair_checks(&pair(pt(q(1)).unwrap(), p1().scale(&q(4)))).unwrap().all_pass());
    }

    #[test]
    fn cone_examples() {
        let c = cones(&golden()).unwrap();
        assert_eq!(c.i_plus, Arc { from: ProjectivePoint::rational(q(0)), to: ProjectivePoint::Infinity });
        assert_eq!(c.i_minus, Arc { from: ProjectivePoint::Infinity, to: ProjectivePoint::rational(q(0)) });
        let hh = pair(h(q(1), q(-1), q(2)).unwrap(), h(q(2), q(-2), q(3)).unwrap());
        let c = cones(&hh).unwrap();
        assert_eq!(c.i_plus, Arc { from: ProjectivePoint::rational(q(1)), to: ProjectivePoint::rational(q(2)) });
        assert_eq!(c.i_minus, Arc { from: ProjectivePoint::rational(q(-2)), to: ProjectivePoint::rational(q(-1)) });
        let hm = pair(h(q(1), q(-1), q(2)).unwrap(), p1());
        let c = cones(&hm).unwrap();
        assert_eq!(c.i_plus, Arc { from: ProjectivePoint::rational(q(0)), to: ProjectivePoint::rational(q(1)) });
        assert_eq!(c.i_minus, Arc { from: ProjectivePoint::rational(q(-1)), to: ProjectivePoint::rational(q(0)) });
    }

    #[test]
    fn pair_json_round_trip() {
        let s = r#"{"A": [[1, 0], ["1/1", 1]], "B": [["1", "1"], [0, 1]]}"#;
        let pr: MatrixPair = serde_json::from_str(s).unwrap();
        assert_eq!(pr, golden());
        let back: MatrixPair = serde_json::from_str(&serde_json::to_string(&pr).unwrap()).unwrap();
        assert_eq!(back, pr);
        assert!(serde_json::from_str::<MatrixPair>(r#"{"A": [[0, 1], [1, 0]], "B": [[1, 0], [0, 1]]}"#).is_err());
    }
}
