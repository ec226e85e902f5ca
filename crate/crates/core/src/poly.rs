//! Dense complex polynomials in one variable.
//!
//! `Poly` is the entry type for everything above it: algebra elements store
//! their matrix entries as polynomials in `w = z^n`, evaluation representations
//! evaluate them, and the reconstruction pipeline recovers them from samples on
//! the unit circle.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for canonicalization and zero tests.
pub const EPS_COEFF: f64 = 1e-9;

/// Default bound on the `w`-degree of algebra entries.
pub const DEG_MAX: usize = 64;

/// A polynomial with complex coefficients, `coeffs[k]` multiplying `x^k`.
///
/// Trailing coefficients with modulus at most [`EPS_COEFF`] are dropped on
/// construction, so the zero polynomial has no coefficients at all.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl From<Vec<Complex64>> for Poly {
    fn from(coeffs: Vec<Complex64>) -> Self {
        Poly::new(coeffs)
    }
}

impl From<Poly> for Vec<Complex64> {
    fn from(p: Poly) -> Self {
        p.coeffs
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm() <= EPS_COEFF) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(Complex64::new(1.0, 0.0))
    }

    /// `c * x^k`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    /// The linear factor `x - c`.
    pub fn linear_factor(c: Complex64) -> Self {
        Poly::new(vec![-c, Complex64::new(1.0, 0.0)])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `x^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    /// Number of stored coefficients (`degree + 1`).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// True for the zero polynomial, which stores no coefficients.
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of coefficient moduli. Dominates the sup norm on the closed disk.
    pub fn norm_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Equality of canonical forms up to [`EPS_COEFF`] per coefficient.
    pub fn approx_eq(&self, other: &Poly) -> bool {
        self.max_coeff_diff(other) <= EPS_COEFF
    }

    pub fn max_coeff_diff(&self, other: &Poly) -> f64 {
        let len = self.len().max(other.len());
        (0..len)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k];
        coeffs.extend_from_slice(&self.coeffs);
        Poly { coeffs }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Substitute `x -> x^n`.
    pub fn compose_power(&self, n: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n * (self.len() - 1) + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[n * k] = c;
        }
        Poly::new(coeffs)
    }

    /// Synthetic division by `x - c`.
    ///
    /// Fails with [`Error::RootMismatch`] unless `|p(c)| <= EPS_COEFF * (1 + |p|_1)`.
    pub fn divide_root(&self, c: Complex64) -> Result<Poly> {
        let value = self.eval(c);
        let bound = EPS_COEFF * (1.0 + self.norm_l1());
        if value.norm() > bound {
            return Err(Error::RootMismatch {
                root: c,
                residual: value.norm(),
            });
        }
        if self.len() <= 1 {
            return Ok(Poly::zero());
        }
        let d = self.len() - 1;
        let mut quotient = vec![Complex64::new(0.0, 0.0); d];
        let mut carry = Complex64::new(0.0, 0.0);
        for k in (1..=d).rev() {
            carry = carry * c + self.coeffs[k];
            quotient[k - 1] = carry;
        }
        Ok(Poly::new(quotient))
    }

    /// Values at the `m`-th roots of unity `exp(2 pi i k / m)`, `k = 0..m`.
    ///
    /// Coefficients of index `>= m` wrap around (aliasing), which is what a
    /// length-`m` sample of the boundary function sees.
    pub fn eval_roots_of_unity(&self, m: usize) -> Vec<Complex64> {
        roots_of_unity(m).into_iter().map(|x| self.eval(x)).collect()
    }
}

/// The `m`-th roots of unity in counter-clockwise order starting at 1.
pub fn roots_of_unity(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
        .collect()
}

/// The unique polynomial of degree `< m` taking `samples[k]` at `exp(2 pi i k / m)`.
///
/// Panics on an empty sample set.
pub fn interpolate_roots_of_unity(samples: &[Complex64]) -> Poly {
    let m = samples.len();
    assert!(m >= 1, "interpolation needs at least one sample");
    let mut buffer = samples.to_vec();
    // p(w^k) = sum_j c_j w^{jk}, so the coefficients are a forward DFT over m.
    FftPlanner::new().plan_fft_forward(m).process(&mut buffer);
    let inv = 1.0 / m as f64;
    Poly::new(buffer.into_iter().map(|c| c * inv).collect())
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let len = self.len().max(rhs.len());
        Poly::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        let len = self.len().max(rhs.len());
        Poly::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.len() + rhs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Poly {
            type Output = Poly;

            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.norm() <= EPS_COEFF {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{k}")?,
            }
        }
        Ok(())
    }
}
