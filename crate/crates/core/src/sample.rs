//! Seeded random inputs for the property and verification suites.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{CycleElement, Generator, MatC};
use crate::poly::Poly;

pub type SuiteRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the box `[-1, 1] x [-1, 1]`.
pub fn complex_unit_box(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

/// Uniform in the closed unit disk.
pub fn disk_point(rng: &mut impl Rng) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    Complex64::from_polar(r, rng.random_range(0.0..2.0 * PI))
}

pub fn circle_point(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
}

/// Dense polynomial of random degree at most `deg`.
pub fn poly(rng: &mut impl Rng, deg: usize) -> Poly {
    let len = rng.random_range(1..=deg + 1);
    Poly::new((0..len).map(|_| complex_unit_box(rng)).collect())
}

/// Element with each `f_ij` zero with probability 1/4, otherwise [`poly`].
pub fn element(rng: &mut impl Rng, n: usize, deg: usize) -> CycleElement {
    let mut a = CycleElement::zero(n);
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(0.75) {
                a.set_entry(i, j, poly(rng, deg));
            }
        }
    }
    a
}

pub fn matc(rng: &mut impl Rng, n: usize) -> MatC {
    MatC::from_fn(n, |_, _| complex_unit_box(rng))
}

pub fn generator(rng: &mut impl Rng, n: usize) -> Generator {
    let i = rng.random_range(0..n);
    if rng.random_bool(0.5) {
        Generator::E(i)
    } else {
        Generator::Z(i)
    }
}

/// A word of length `1..=max_len`. Words that follow the cycle (`Z_i` then
/// `Z_{i+1}`, or an idempotent matching the current vertex) are favoured so
/// that most words are nonzero.
pub fn word(rng: &mut impl Rng, n: usize, max_len: usize) -> Vec<Generator> {
    let len = rng.random_range(1..=max_len.max(1));
    let mut vertex = rng.random_range(0..n);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let g = if rng.random_bool(0.1) {
            generator(rng, n)
        } else if rng.random_bool(0.25) {
            Generator::E(vertex)
        } else {
            Generator::Z(vertex)
        };
        if let Generator::Z(i) = g {
            vertex = (i + 1) % n;
        }
        out.push(g);
    }
    out
}
