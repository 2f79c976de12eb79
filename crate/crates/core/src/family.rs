//! Seeded random pairs: normal forms with rational parameters, disguised by
//! a random rational conjugation and positive rational scaling.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::mat2::{frac, h, p, pt, Mat2Q, Q};
use crate::pairs::{MatrixPair, PairClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    CoParallel,
    Mixed,
    Parabolic,
    Crossing,
}

impl Archetype {
    pub const BALANCED: [Archetype; 3] = [Archetype::CoParallel, Archetype::Mixed, Archetype::Parabolic];

    pub fn class(self) -> PairClass {
        match self {
            Archetype::CoParallel => PairClass::CoParallel,
            Archetype::Mixed => PairClass::Mixed,
            Archetype::Parabolic => PairClass::ParabolicPair,
            Archetype::Crossing => PairClass::Crossing,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RandomPair {
    pub archetype: Archetype,
    pub normal_form: MatrixPair,
    pub conjugator: Mat2Q,
    pub scalars: (Q, Q),
    pub pair: MatrixPair,
}

/// `n/d` with `1 ≤ n ≤ 6`, `1 ≤ d ≤ 4`.
fn small_positive<R: Rng>(rng: &mut R) -> Q {
    frac(rng.gen_range(1..=6), rng.gen_range(1..=4))
}

fn lambda<R: Rng>(rng: &mut R) -> Q {
    Q::from_integer(1.into()) + small_positive(rng)
}

/// A normal form of the given archetype, in random order.
pub fn normal_form<R: Rng>(rng: &mut R, archetype: Archetype) -> MatrixPair {
    let (first, second) = match archetype {
        Archetype::CoParallel => {
            // u2 < u1 < 0 < s1 < s2
            let s1 = small_positive(rng);
            let s2 = &s1 + small_positive(rng);
            let u1 = -small_positive(rng);
            let u2 = &u1 - small_positive(rng);
            (h(s1, u1, lambda(rng)).unwrap(), h(s2, u2, lambda(rng)).unwrap())
        }
        Archetype::Crossing => {
            // u1 < u2 < 0 < s1 < s2
            let s1 = small_positive(rng);
            let s2 = &s1 + small_positive(rng);
            let u2 = -small_positive(rng);
            let u1 = &u2 - small_positive(rng);
            (h(s1, u1, lambda(rng)).unwrap(), h(s2, u2, lambda(rng)).unwrap())
        }
        Archetype::Mixed => {
            let s = small_positive(rng);
            let u = -small_positive(rng);
            (h(s, u, lambda(rng)).unwrap(), p(small_positive(rng)).unwrap())
        }
        Archetype::Parabolic => (p(small_positive(rng)).unwrap(), pt(small_positive(rng)).unwrap()),
    };
    let (a, b) = if rng.gen_bool(0.5) { (first, second) } else { (second, first) };
    MatrixPair::new(a, b).expect("normal forms have det 1")
}

/// Random invertible integer matrix with entries in `[-20, 20]`.
pub fn random_conjugator<R: Rng>(rng: &mut R) -> Mat2Q {
    loop {
        let mut e = || Q::from_integer(BigInt::from(rng.gen_range(-20..=20)));
        let t = Mat2Q::new(e(), e(), e(), e());
        if !t.det().is_zero() {
            return t;
        }
    }
}

pub fn random_pair<R: Rng>(rng: &mut R, archetype: Archetype) -> RandomPair {
    let normal_form = normal_form(rng, archetype);
    let t = random_conjugator(rng);
    let ti = t.inverse().expect("invertible");
    let scalars = (small_positive(rng), small_positive(rng));
    let conj = |m: &Mat2Q, s: &Q| (&(&t * m) * &ti).scale(s);
    let pair = MatrixPair::new(conj(normal_form.a(), &scalars.0), conj(normal_form.b(), &scalars.1))
        .expect("positive scalars keep det > 0");
    RandomPair { archetype, normal_form, conjugator: t, scalars, pair }
}

pub fn random_balanced_pair<R: Rng>(rng: &mut R) -> RandomPair {
    let archetype = *Archetype::BALANCED.choose(rng).unwrap();
    random_pair(rng, archetype)
}

/// `count` balanced pairs cycling through the three balanced archetypes.
pub fn balanced_family(seed: u64, count: usize) -> Vec<RandomPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_pair(&mut rng, Archetype::BALANCED[i % 3])).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairs::classify;

    #[test]
    fn family_is_reproducible_and_classified() {
        let a = balanced_family(7, 9);
        let b = balanced_family(7, 9);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.pair, y.pair);
            assert_eq!(classify(&x.pair).unwrap(), x.archetype.class());
            assert_eq!(classify(&x.normal_form).unwrap(), x.archetype.class());
        }
        let mut r = rng(3);
        for _ in 0..20 {
            let c = random_pair(&mut r, Archetype::Crossing);
            assert_eq!(classify(&c.pair).unwrap(), PairClass::Crossing);
        }
    }
}
