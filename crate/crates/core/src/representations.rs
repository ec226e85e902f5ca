//! Point evaluations `phi_lambda` (values in `M_n`) and the scalar
//! representations `phi_{i,0}` reading the constant term of the `i`-th
//! diagonal entry, with their kernels.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{CycleElement, Generator, MatC};
use crate::error::{Error, Result};
use crate::poly::{Poly, EPS_COEFF};
use crate::sample;

/// Slack allowed on `|lambda| <= 1`.
pub const DISK_SLACK: f64 = 1e-12;

/// A point of evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepPointJson", into = "RepPointJson")]
pub enum RepPoint {
    /// `phi_lambda` for `lambda` in the closed unit disk.
    Lambda(Complex64),
    /// `phi_{i,0}` with a 1-based vertex index.
    DiagZero(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RepPointJson {
    Lambda { re: f64, im: f64 },
    Diag0 { i: usize },
}

impl TryFrom<RepPointJson> for RepPoint {
    type Error = Error;

    fn try_from(raw: RepPointJson) -> Result<Self> {
        match raw {
            RepPointJson::Lambda { re, im } => RepPoint::lambda(Complex64::new(re, im)),
            RepPointJson::Diag0 { i } if i >= 1 => Ok(RepPoint::DiagZero(i)),
            RepPointJson::Diag0 { i } => Err(Error::IndexOutOfRange { index: i, n: 0 }),
        }
    }
}

impl From<RepPoint> for RepPointJson {
    fn from(p: RepPoint) -> Self {
        match p {
            RepPoint::Lambda(l) => RepPointJson::Lambda { re: l.re, im: l.im },
            RepPoint::DiagZero(i) => RepPointJson::Diag0 { i },
        }
    }
}

impl RepPoint {
    /// `phi_lambda`, rejecting points outside the closed disk.
    pub fn lambda(l: Complex64) -> Result<Self> {
        if !(l.re.is_finite() && l.im.is_finite()) || l.norm() > 1.0 + DISK_SLACK {
            return Err(Error::Precondition(format!(
                "|lambda| = {} is outside the closed unit disk",
                l.norm()
            )));
        }
        Ok(RepPoint::Lambda(l))
    }

    /// Dimension of the representation space.
    pub fn dim(&self, n: usize) -> usize {
        match self {
            RepPoint::Lambda(_) => n,
            RepPoint::DiagZero(_) => 1,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            RepPoint::Lambda(l) => RepPoint::lambda(l).map(|_| ()),
            RepPoint::DiagZero(i) if (1..=n).contains(&i) => Ok(()),
            RepPoint::DiagZero(i) => Err(Error::IndexOutOfRange { index: i, n }),
        }
    }

    pub fn as_lambda(&self) -> Option<Complex64> {
        match *self {
            RepPoint::Lambda(l) => Some(l),
            RepPoint::DiagZero(_) => None,
        }
    }
}

impl fmt::Display for RepPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepPoint::Lambda(l) => write!(f, "phi_lambda({l})"),
            RepPoint::DiagZero(i) => write!(f, "phi_{{{i},0}}"),
        }
    }
}

/// `phi_lambda(a)` is `[lambda^l(i,j) f_ij(lambda^n)]`; `phi_{i,0}(a)` is the
/// `1 x 1` matrix `[f_ii(0)]`.
pub fn eval_rep(point: &RepPoint, a: &CycleElement) -> Result<MatC> {
    point.validate(a.n())?;
    Ok(match *point {
        RepPoint::Lambda(l) => a.evaluate(l),
        RepPoint::DiagZero(i) => {
            MatC::from_fn(1, |_, _| a.entry(i - 1, i - 1).coeff(0))
        }
    })
}

/// Values of the representation on the generators `e_11..e_nn, Z_1..Z_n`.
pub fn generator_values(point: &RepPoint, n: usize) -> Result<Vec<MatC>> {
    Generator::all(n)
        .map(|g| eval_rep(point, &g.element(n)))
        .collect()
}

/// The element with every `f_ij = w - lambda^n`; it lies in `ker phi_lambda`.
pub fn tilde_f(n: usize, lambda: Complex64) -> CycleElement {
    let f = Poly::linear_factor(lambda.powu(n as u32));
    CycleElement::zero(n).map_entries(|_, _, _| f.clone())
}

/// Moves a random element into the kernel of `point`.
pub fn project_to_kernel(point: &RepPoint, r: &CycleElement) -> Result<CycleElement> {
    let n = r.n();
    point.validate(n)?;
    Ok(match *point {
        RepPoint::Lambda(l) if l != Complex64::new(0.0, 0.0) => {
            let factor = Poly::linear_factor(l.powu(n as u32));
            r.map_entries(|_, _, f| f * &factor)
        }
        RepPoint::Lambda(_) => r.map_entries(|i, j, f| {
            if i == j {
                zero_constant(f)
            } else {
                f.clone()
            }
        }),
        RepPoint::DiagZero(k) => r.map_entries(|i, j, f| {
            if i == k - 1 && j == k - 1 {
                zero_constant(f)
            } else {
                f.clone()
            }
        }),
    })
}

fn zero_constant(f: &Poly) -> Poly {
    let mut c = f.coeffs().to_vec();
    if let Some(c0) = c.first_mut() {
        *c0 = Complex64::new(0.0, 0.0);
    }
    Poly::new(c)
}

/// Pseudo-random kernel elements with entry degree at most `deg` before projection.
pub fn kernel_sample_with(
    point: &RepPoint,
    n: usize,
    deg: usize,
    rng: &mut impl Rng,
    count: usize,
) -> Result<Vec<CycleElement>> {
    (0..count)
        .map(|_| project_to_kernel(point, &sample::element(rng, n, deg)))
        .collect()
}

/// `count` seeded kernel samples with entry degree at most 8.
pub fn kernel_sample(
    point: &RepPoint,
    n: usize,
    seed: u64,
    count: usize,
) -> Result<Vec<CycleElement>> {
    kernel_sample_with(point, n, 8, &mut sample::rng(seed), count)
}

/// Outcome of [`semisimplicity_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Semisimplicity {
    Zero { points: usize },
    NonZero {
        lambda: Complex64,
        row: usize,
        col: usize,
        value: Complex64,
        points: usize,
    },
}

/// Threshold for "vanishes" in [`semisimplicity_certificate`].
pub const SEMISIMPLE_TOL: f64 = 1e-10;

/// Evaluates `phi_lambda(a)` at `n (deg_max + 2)` points on the circle of
/// radius 1/2. An entry of `w`-degree at most `deg_max` realizes a
/// `z`-polynomial of degree below that count, so vanishing on the grid
/// forces it to be zero.
pub fn semisimplicity_certificate(a: &CycleElement, deg_max: usize) -> Semisimplicity {
    let n = a.n();
    let points = n * (deg_max + 2);
    let mut best: Option<(f64, Complex64, usize, usize, Complex64)> = None;
    for k in 0..points {
        let lambda = Complex64::from_polar(
            0.5,
            2.0 * std::f64::consts::PI * k as f64 / points as f64,
        );
        let value = a.evaluate(lambda);
        for i in 0..n {
            for j in 0..n {
                let v = value.get(i, j);
                if best.is_none_or(|b| v.norm() > b.0) {
                    best = Some((v.norm(), lambda, i, j, v));
                }
            }
        }
    }
    match best {
        Some((mag, lambda, i, j, v)) if mag > SEMISIMPLE_TOL => Semisimplicity::NonZero {
            lambda,
            row: i + 1,
            col: j + 1,
            value: v,
            points,
        },
        _ => Semisimplicity::Zero { points },
    }
}

/// Dimension of the span of `phi(w^d E_ij)` for `d <= 1`.
pub fn range_dimension(point: &RepPoint, n: usize) -> Result<usize> {
    let dim = point.dim(n);
    let mut columns = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for d in 0..=1 {
                columns.push(eval_rep(point, &CycleElement::basis(n, i, j, d))?);
            }
        }
    }
    let m = DMatrix::from_fn(dim * dim, columns.len(), |r, c| {
        columns[c].get(r / dim, r % dim)
    });
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > 1e-10 * top.max(1.0)).count())
}

/// A witness `k = sum_t b_t c_t` with every `b_t, c_t` in the kernel.
#[derive(Clone, Debug)]
pub enum KernelSquare {
    Decomposition {
        pairs: Vec<(CycleElement, CycleElement)>,
        residual: f64,
    },
    Failure { budget: usize, residual: f64 },
}

/// Tolerance on the recombined coefficients of a [`KernelSquare`] decomposition.
pub const KERNEL_SQUARE_TOL: f64 = 1e-8;

/// Kernel spanning set for `phi_{i,0}`: `w^d E_rc` for `d <= budget`, minus `E_ii`.
pub fn diag_zero_spanning_set(n: usize, i: usize, budget: usize) -> Vec<CycleElement> {
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            for d in 0..=budget {
                if r == i - 1 && c == i - 1 && d == 0 {
                    continue;
                }
                out.push(CycleElement::basis(n, r, c, d));
            }
        }
    }
    out
}

/// Searches for `k` in the span of products of the canonical kernel
/// spanning set at the given degree budget by a least-squares solve.
pub fn kernel_square_witness(
    point: &RepPoint,
    k: &CycleElement,
    budget: usize,
) -> Result<KernelSquare> {
    let n = k.n();
    let i = match *point {
        RepPoint::DiagZero(i) => i,
        RepPoint::Lambda(_) => {
            return Err(Error::Precondition(
                "kernel_square_witness expects a diag0 point".into(),
            ))
        }
    };
    point.validate(n)?;
    let v = eval_rep(point, k)?;
    if v.max_abs() > EPS_COEFF {
        return Err(Error::Precondition(format!(
            "element is not in the kernel: phi = {}",
            v.get(0, 0)
        )));
    }
    if k.is_zero() {
        return Ok(KernelSquare::Decomposition {
            pairs: Vec::new(),
            residual: 0.0,
        });
    }

    let span = diag_zero_spanning_set(n, i, budget);
    let mut pairs = Vec::new();
    let mut products = Vec::new();
    for b in &span {
        for c in &span {
            let p = b.mul_bounded(c, usize::MAX)?;
            if !p.is_zero() {
                pairs.push((b, c));
                products.push(p);
            }
        }
    }
    let width = products
        .iter()
        .map(|p| p.max_degree())
        .chain(std::iter::once(k.max_degree()))
        .max()
        .unwrap_or(0)
        .max(0) as usize
        + 1;

    let coeff_row = |a: &CycleElement, row: usize| -> Complex64 {
        let entry = row / width;
        a.entry(entry / n, entry % n).coeff(row % width)
    };
    let rows = n * n * width;
    let system = DMatrix::from_fn(rows, products.len(), |r, c| coeff_row(&products[c], r));
    let rhs = DMatrix::from_fn(rows, 1, |r, _| coeff_row(k, r));
    let svd = system.svd(true, true);
    let alpha = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Precondition(e.to_string()))?;

    let mut recombined = CycleElement::zero(n);
    let mut out = Vec::new();
    for (t, (b, c)) in pairs.into_iter().enumerate() {
        let a = alpha[(t, 0)];
        if a.norm() <= 1e-14 {
            continue;
        }
        recombined = recombined.add_elem(&products[t].scale(a))?;
        out.push((b.scale(a), c.clone()));
    }
    let residual = recombined.max_coeff_diff(k);
    Ok(if residual <= KERNEL_SQUARE_TOL {
        KernelSquare::Decomposition {
            pairs: out,
            residual,
        }
    } else {
        KernelSquare::Failure { budget, residual }
    })
}
