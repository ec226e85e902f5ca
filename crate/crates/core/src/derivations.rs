//! Point derivations at a representation: maps `D` with
//! `D(ab) = D(a) phi(b) + phi(a) D(b)`.
//!
//! Besides the two canonical families (commutators `delta_X` and the
//! entrywise derivative `F_lambda`), a derivation can be presented by its
//! values on the generators ([`GenDerivation`]); [`inner_solve`] then decides
//! whether it is a commutator, and [`kernel_vanishing_test`] looks for a
//! kernel element it does not kill.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{monomial_word, CycleElement, Generator, MatC, NORM_GRID};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::representations::{eval_rep, kernel_sample, RepPoint};
use crate::sample;

/// Generator residual below which a commutator solve counts as consistent.
pub const TOL_INNER: f64 = 1e-8;

/// A non-inner certificate needs `|D(k)| >= NON_INNER_RATIO * |k|` for some kernel `k`.
pub const NON_INNER_RATIO: f64 = 1e-3;

/// A linear map into `M_dim` attached to a representation.
pub trait PointDerivation {
    fn point(&self) -> RepPoint;

    fn apply(&self, a: &CycleElement) -> Result<MatC>;
}

/// `delta_X(a) = phi(a) X - X phi(a)`.
#[derive(Clone, Debug)]
pub struct InnerDerivation {
    pub point: RepPoint,
    pub x: MatC,
}

impl InnerDerivation {
    pub fn new(point: RepPoint, x: MatC) -> Self {
        InnerDerivation { point, x }
    }
}

impl PointDerivation for InnerDerivation {
    fn point(&self) -> RepPoint {
        self.point
    }

    fn apply(&self, a: &CycleElement) -> Result<MatC> {
        delta_x(&self.point, &self.x, a)
    }
}

pub fn delta_x(point: &RepPoint, x: &MatC, a: &CycleElement) -> Result<MatC> {
    let phi = eval_rep(point, a)?;
    if phi.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.dim(),
            found: x.dim(),
        });
    }
    Ok(phi.commutator(x))
}

/// Entrywise `d/dz` of the realized matrix, evaluated at `lambda`.
#[derive(Clone, Copy, Debug)]
pub struct DerivativeAt {
    pub lambda: Complex64,
}

impl PointDerivation for DerivativeAt {
    fn point(&self) -> RepPoint {
        RepPoint::Lambda(self.lambda)
    }

    fn apply(&self, a: &CycleElement) -> Result<MatC> {
        f_point_derivation(self.lambda, a)
    }
}

pub fn f_point_derivation(lambda: Complex64, a: &CycleElement) -> Result<MatC> {
    RepPoint::lambda(lambda)?;
    let realized = a.realize();
    Ok(MatC::from_fn(a.n(), |i, j| {
        realized[i][j].derivative().eval(lambda)
    }))
}

/// Wraps a closure; used for negative controls such as `a -> phi(a)`.
pub struct FnDerivation<F> {
    pub point: RepPoint,
    pub f: F,
}

impl<F> PointDerivation for FnDerivation<F>
where
    F: Fn(&CycleElement) -> Result<MatC>,
{
    fn point(&self) -> RepPoint {
        self.point
    }

    fn apply(&self, a: &CycleElement) -> Result<MatC> {
        (self.f)(a)
    }
}

/// `phi` of a path monomial: the identity, a scaled matrix unit, or zero.
#[derive(Clone, Copy, Debug)]
enum UnitRep {
    Identity,
    Unit(Complex64, usize, usize),
    Zero,
}

impl UnitRep {
    /// `phi` of the length-`len >= 1` path of edges leaving vertex `i`.
    fn of_path(point: &RepPoint, n: usize, i: usize, len: usize) -> UnitRep {
        let j = (i + len) % n;
        match *point {
            RepPoint::Lambda(l) => UnitRep::Unit(l.powu(len as u32), i, j),
            // a path of positive length has no constant diagonal term
            RepPoint::DiagZero(_) => UnitRep::Zero,
        }
    }

    /// `self * m * rhs`.
    fn sandwich(self, m: &MatC, rhs: UnitRep) -> Option<MatC> {
        let dim = m.dim();
        match (self, rhs) {
            (UnitRep::Zero, _) | (_, UnitRep::Zero) => None,
            (UnitRep::Identity, UnitRep::Identity) => Some(m.clone()),
            (UnitRep::Unit(c, a, b), UnitRep::Identity) => {
                let mut out = MatC::zeros(dim);
                for col in 0..dim {
                    out.set(a, col, c * m.get(b, col));
                }
                Some(out)
            }
            (UnitRep::Identity, UnitRep::Unit(c, a, b)) => {
                let mut out = MatC::zeros(dim);
                for row in 0..dim {
                    out.set(row, b, m.get(row, a) * c);
                }
                Some(out)
            }
            (UnitRep::Unit(c, a, b), UnitRep::Unit(d, e, f)) => {
                let mut out = MatC::zeros(dim);
                out.set(a, f, c * m.get(b, e) * d);
                Some(out)
            }
        }
    }
}

/// A point derivation given by its values on `e_11..e_nn` and `Z_1..Z_n`.
///
/// Arbitrary elements are expanded in the basis `w^d E_ij`, each basis element
/// is written as its canonical path word (see [`monomial_word`]), and the
/// word is differentiated by the Leibniz rule. Whether the result is
/// independent of the chosen words is exactly what [`check_leibniz`] probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenDerivation {
    pub point: RepPoint,
    pub values_e: Vec<MatC>,
    #[serde(rename = "values_Z")]
    pub values_z: Vec<MatC>,
}

impl GenDerivation {
    pub fn new(point: RepPoint, values_e: Vec<MatC>, values_z: Vec<MatC>) -> Result<Self> {
        let d = GenDerivation {
            point,
            values_e,
            values_z,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn zero(point: RepPoint, n: usize) -> Self {
        let dim = point.dim(n);
        GenDerivation {
            point,
            values_e: vec![MatC::zeros(dim); n],
            values_z: vec![MatC::zeros(dim); n],
        }
    }

    /// Samples `d` on the generators.
    pub fn from_derivation(d: &dyn PointDerivation, n: usize) -> Result<Self> {
        let values = |g: Generator| d.apply(&g.element(n));
        GenDerivation::new(
            d.point(),
            (0..n).map(|i| values(Generator::E(i))).collect::<Result<_>>()?,
            (0..n).map(|i| values(Generator::Z(i))).collect::<Result<_>>()?,
        )
    }

    pub fn n(&self) -> usize {
        self.values_e.len()
    }

    pub fn dim(&self) -> usize {
        self.point.dim(self.n())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.values_e.len();
        if n == 0 {
            return Err(Error::Precondition("derivation needs n >= 1".into()));
        }
        if self.values_z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.values_z.len(),
            });
        }
        self.point.validate(n)?;
        let dim = self.point.dim(n);
        for m in self.values_e.iter().chain(&self.values_z) {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            if !m.is_finite() {
                return Err(Error::Precondition("non-finite derivation value".into()));
            }
        }
        Ok(())
    }

    pub fn value(&self, g: Generator) -> &MatC {
        match g {
            Generator::E(i) => &self.values_e[i],
            Generator::Z(i) => &self.values_z[i],
        }
    }

    /// Values in the order `e_11..e_nn, Z_1..Z_n`.
    pub fn values(&self) -> impl Iterator<Item = (Generator, &MatC)> {
        Generator::all(self.n()).map(move |g| (g, self.value(g)))
    }

    /// Leibniz expansion along the word for `w^d E_ij`.
    fn apply_basis(&self, i: usize, j: usize, d: usize) -> Option<MatC> {
        let n = self.n();
        let word = monomial_word(n, i, j, d);
        if let [Generator::E(k)] = word[..] {
            return Some(self.values_e[k].clone());
        }
        let len = word.len();
        let mut acc: Option<MatC> = None;
        for (t, g) in word.iter().enumerate() {
            let prefix = if t == 0 {
                UnitRep::Identity
            } else {
                UnitRep::of_path(&self.point, n, i, t)
            };
            let suffix = if t + 1 == len {
                UnitRep::Identity
            } else {
                UnitRep::of_path(&self.point, n, (i + t + 1) % n, len - t - 1)
            };
            if let Some(term) = prefix.sandwich(self.value(*g), suffix) {
                acc = Some(match acc {
                    Some(a) => &a + &term,
                    None => term,
                });
            }
        }
        acc
    }

    /// Same point, replaced values.
    fn with_values(&self, values_e: Vec<MatC>, values_z: Vec<MatC>) -> GenDerivation {
        GenDerivation {
            point: self.point,
            values_e,
            values_z,
        }
    }
}

impl PointDerivation for GenDerivation {
    fn point(&self) -> RepPoint {
        self.point
    }

    fn apply(&self, a: &CycleElement) -> Result<MatC> {
        if a.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: a.n(),
            });
        }
        let mut out = MatC::zeros(self.dim());
        for ((i, j), f) in a.entries() {
            for (d, &c) in f.coeffs().iter().enumerate() {
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if let Some(v) = self.apply_basis(i, j, d) {
                    out = &out + &v.scale(c);
                }
            }
        }
        Ok(out)
    }
}

/// `|D(ab) - D(a) phi(b) - phi(a) D(b)|` (spectral norm).
pub fn leibniz_residual(
    d: &dyn PointDerivation,
    a: &CycleElement,
    b: &CycleElement,
) -> Result<f64> {
    let point = d.point();
    let ab = a.mul_bounded(b, usize::MAX)?;
    let lhs = d.apply(&ab)?;
    let rhs = &(&d.apply(a)? * &eval_rep(&point, b)?) + &(&eval_rep(&point, a)? * &d.apply(b)?);
    Ok((&lhs - &rhs).spectral_norm())
}

/// Maximum Leibniz residual over all generator pairs and then `trials`
/// random pairs with entry degree at most `deg`.
pub fn check_leibniz(
    d: &dyn PointDerivation,
    n: usize,
    trials: usize,
    deg: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in Generator::all(n) {
        for h in Generator::all(n) {
            worst = worst.max(leibniz_residual(d, &g.element(n), &h.element(n))?);
        }
    }
    for _ in 0..trials {
        let a = sample::element(rng, n, deg);
        let b = sample::element(rng, n, deg);
        worst = worst.max(leibniz_residual(d, &a, &b)?);
    }
    Ok(worst)
}

/// Result of [`inner_solve`].
#[derive(Clone, Debug, Serialize)]
pub struct InnerSolveResult {
    pub consistent: bool,
    /// Least-squares witness with `X[1][1] = 0`; `None` when inconsistent.
    #[serde(rename = "X")]
    pub x: Option<MatC>,
    pub residual: f64,
    pub normalization: &'static str,
}

pub const GAUGE_NOTE: &str = "X[1][1] = 0";

/// Solves `phi(g) X - X phi(g) = D(g)` over all generators `g` in the least
/// squares sense, with the gauge `X[1][1] = 0`. Where the commutant of the
/// range is larger than the scalars (at `lambda = 0`) the minimum-norm
/// solution is returned.
pub fn inner_solve(d: &GenDerivation) -> Result<InnerSolveResult> {
    inner_solve_tol(d, TOL_INNER)
}

pub fn inner_solve_tol(d: &GenDerivation, tol: f64) -> Result<InnerSolveResult> {
    d.validate()?;
    let n = d.n();
    let reps: Vec<(MatC, &MatC)> = d
        .values()
        .map(|(g, v)| Ok((eval_rep(&d.point, &g.element(n))?, v)))
        .collect::<Result<_>>()?;
    let residual_of = |x: &MatC| {
        reps.iter()
            .map(|(a, dv)| (&a.commutator(x) - dv).spectral_norm())
            .fold(0.0, f64::max)
    };

    let mut fast = None;
    if let Some(lambda) = d.point.as_lambda().filter(|l| l.norm() >= FAST_PATH_RADIUS) {
        let x = edge_witness(d, lambda);
        let residual = residual_of(&x);
        if residual <= tol {
            fast = Some((x, residual));
        }
    }
    let (x, residual) = match fast {
        Some(found) => found,
        None => {
            let x = least_squares_witness(&reps, d.dim())?;
            let residual = residual_of(&x);
            (x, residual)
        }
    };
    let consistent = residual <= tol;
    Ok(InnerSolveResult {
        consistent,
        x: consistent.then_some(x),
        residual,
        normalization: GAUGE_NOTE,
    })
}

/// Below this radius the edge witness divides by a small `lambda` and the
/// solver goes straight to least squares.
const FAST_PATH_RADIUS: f64 = 0.5;

/// The unique gauged witness when one exists at `lambda != 0`: off-diagonal
/// entries are read from `D(e_ii)`, and the diagonal steps
/// `X_{i+1,i+1} - X_ii` from the `(i, i+1)` entry of `D(Z_i)` over `lambda`.
fn edge_witness(d: &GenDerivation, lambda: Complex64) -> MatC {
    let n = d.n();
    let mut x = MatC::zeros(n);
    for i in 0..n {
        let de = d.value(Generator::E(i));
        for j in (0..n).filter(|&j| j != i) {
            x.set(i, j, de.get(i, j));
        }
    }
    for i in 0..n.saturating_sub(1) {
        let step = d.value(Generator::Z(i)).get(i, i + 1) / lambda;
        x.set(i + 1, i + 1, x.get(i, i) + step);
    }
    x
}

/// Minimum-norm least-squares solution of `A X - X A = D(g)` over the
/// generators, with `X[0][0]` fixed at zero.
fn least_squares_witness(reps: &[(MatC, &MatC)], dim: usize) -> Result<MatC> {
    // Unknowns: X_pq for (p,q) != (0,0), column index p*dim + q - 1.
    let unknowns = dim * dim - 1;
    let mut x = MatC::zeros(dim);
    if unknowns == 0 {
        return Ok(x);
    }
    let block = dim * dim;
    let mut system = DMatrix::<Complex64>::zeros(reps.len() * block, unknowns);
    let mut rhs = DMatrix::<Complex64>::zeros(reps.len() * block, 1);
    for (g, (a, dv)) in reps.iter().enumerate() {
        for r in 0..dim {
            for s in 0..dim {
                let row = g * block + r * dim + s;
                rhs[(row, 0)] = dv.get(r, s);
                // (A X - X A)_rs = sum_p A_rp X_ps - sum_q X_rq A_qs
                for p in 0..dim {
                    if let Some(col) = (p * dim + s).checked_sub(1) {
                        system[(row, col)] += a.get(r, p);
                    }
                }
                for q in 0..dim {
                    if let Some(col) = (r * dim + q).checked_sub(1) {
                        system[(row, col)] -= a.get(q, s);
                    }
                }
            }
        }
    }
    let svd = system.svd(true, true);
    let top = svd.singular_values.max();
    if top > 0.0 {
        let sol = svd
            .solve(&rhs, 1e-12 * top)
            .map_err(|e| Error::Precondition(e.to_string()))?;
        for k in 0..unknowns {
            let idx = k + 1;
            x.set(idx / dim, idx % dim, sol[(k, 0)]);
        }
    }
    Ok(x)
}

/// Largest `|D(k)|` over the samples, with the ratio `|D(k)| / |k|`.
#[derive(Clone, Debug, Serialize)]
pub struct KernelVanishing {
    pub max_value: f64,
    pub best_ratio: f64,
    /// Index into the samples of the element achieving `best_ratio`.
    pub witness: Option<usize>,
    pub samples: usize,
}

impl KernelVanishing {
    /// Whether some sample certifies non-inner-ness.
    pub fn certifies_non_inner(&self) -> bool {
        self.best_ratio >= NON_INNER_RATIO
    }
}

/// Evaluates `D` on kernel elements of its point.
///
/// Elements not in the kernel are rejected: the test is meaningless on them.
pub fn kernel_vanishing_test(
    d: &dyn PointDerivation,
    samples: &[CycleElement],
) -> Result<KernelVanishing> {
    let point = d.point();
    let mut out = KernelVanishing {
        max_value: 0.0,
        best_ratio: 0.0,
        witness: None,
        samples: samples.len(),
    };
    for (t, k) in samples.iter().enumerate() {
        let phi = eval_rep(&point, k)?;
        if phi.max_abs() > 1e-10 * (1.0 + k.norm_upper()) {
            return Err(Error::Precondition(format!(
                "sample {t} is not in the kernel of {point}"
            )));
        }
        let value = d.apply(k)?.spectral_norm();
        out.max_value = out.max_value.max(value);
        let size = k.norm(NORM_GRID);
        if size > 0.0 && value / size > out.best_ratio {
            out.best_ratio = value / size;
            out.witness = Some(t);
        }
    }
    Ok(out)
}

/// Leibniz pre-check threshold of [`decide_inner`], relative to `1 + max |D(g)|`.
pub const LEIBNIZ_TOL: f64 = 1e-9;

/// `w` degree of the random Leibniz test pairs in [`decide_inner`].
const LEIBNIZ_DEG: usize = 4;

/// Outcome of [`decide_inner`].
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum InnerVerdict {
    Inner {
        #[serde(rename = "X")]
        x: MatC,
        residual: f64,
        normalization: &'static str,
        leibniz_residual: f64,
    },
    NotInner {
        residual: f64,
        witness: CycleElement,
        witness_value: MatC,
        ratio: f64,
        kernel_test: KernelVanishing,
        leibniz_residual: f64,
    },
    Indeterminate {
        reason: &'static str,
        #[serde(skip_serializing_if = "Option::is_none")]
        residual: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        kernel_test: Option<KernelVanishing>,
        leibniz_residual: f64,
    },
}

impl InnerVerdict {
    pub fn is_inner(&self) -> bool {
        matches!(self, InnerVerdict::Inner { .. })
    }
}

/// Full decision procedure: a Leibniz pre-check on `trials` random pairs,
/// the gauged inner solve at tolerance `tol`, and on failure a search for a
/// kernel element with `|D(k)| >= 1e-3 |k|` among `samples` seeded samples.
pub fn decide_inner(
    d: &GenDerivation,
    tol: f64,
    trials: usize,
    samples: usize,
    seed: u64,
) -> Result<InnerVerdict> {
    d.validate()?;
    let n = d.n();
    let leibniz = check_leibniz(d, n, trials, LEIBNIZ_DEG, &mut sample::rng(seed))?;
    let scale = 1.0 + d.values().map(|(_, v)| v.max_abs()).fold(0.0, f64::max);
    if leibniz > LEIBNIZ_TOL * scale {
        return Ok(InnerVerdict::Indeterminate {
            reason: "generator values violate the Leibniz rule",
            residual: None,
            kernel_test: None,
            leibniz_residual: leibniz,
        });
    }
    let solved = inner_solve_tol(d, tol)?;
    if let (true, Some(x)) = (solved.consistent, solved.x) {
        return Ok(InnerVerdict::Inner {
            x,
            residual: solved.residual,
            normalization: solved.normalization,
            leibniz_residual: leibniz,
        });
    }
    let kernel = kernel_sample(&d.point, n, seed, samples)?;
    let test = kernel_vanishing_test(d, &kernel)?;
    Ok(match test.witness.filter(|_| test.certifies_non_inner()) {
        Some(t) => InnerVerdict::NotInner {
            residual: solved.residual,
            witness_value: d.apply(&kernel[t])?,
            witness: kernel[t].clone(),
            ratio: test.best_ratio,
            kernel_test: test,
            leibniz_residual: leibniz,
        },
        None => InnerVerdict::Indeterminate {
            reason: "no inner witness within tolerance and no kernel certificate",
            residual: Some(solved.residual),
            kernel_test: Some(test),
            leibniz_residual: leibniz,
        },
    })
}

/// The splitting `D = D0 + D1` at `phi_0`.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroDecomposition {
    /// Inner part: the values of `D` on the idempotents, solved as a commutator.
    pub d0: GenDerivation,
    pub inner: InnerSolveResult,
    /// Kernel part: zero on the idempotents, `D(Z_i)` on the edges.
    pub d1: GenDerivation,
}

/// Splits a derivation at `phi_0` into an inner part and a part supported on
/// `ker phi_0`. Writing `a = x_a + y_a` with `x_a = sum f_ii(0) e_ii`, the
/// kernel part is `D1(a) = D(y_a)`, determined by its values `D(Z_i)`.
pub fn decompose_at_zero(d: &GenDerivation) -> Result<ZeroDecomposition> {
    d.validate()?;
    match d.point {
        RepPoint::Lambda(l) if l == Complex64::new(0.0, 0.0) => {}
        other => {
            return Err(Error::Precondition(format!(
                "decompose_at_zero needs phi_0, got {other}"
            )))
        }
    }
    let dim = d.dim();
    let n = d.n();
    let d1 = d.with_values(vec![MatC::zeros(dim); n], d.values_z.clone());
    let d0 = d.with_values(d.values_e.clone(), vec![MatC::zeros(dim); n]);
    let inner = inner_solve(&d0)?;
    Ok(ZeroDecomposition { d0, inner, d1 })
}

/// `D(y_a) = D(a) - sum_i f_ii(0) D(e_ii)`: the kernel part evaluated
/// without going through the presentation of `D1`.
pub fn kernel_part(d: &dyn PointDerivation, a: &CycleElement) -> Result<MatC> {
    let n = a.n();
    let mut out = d.apply(a)?;
    for i in 0..n {
        let c = a.entry(i, i).coeff(0);
        if c != Complex64::new(0.0, 0.0) {
            out = &out - &d.apply(&Generator::E(i).element(n))?.scale(c);
        }
    }
    Ok(out)
}

/// `D = delta_X + D1` with `X` read off the idempotent values, so that `D1`
/// vanishes on every `e_ii`. At `phi_0` this agrees with [`decompose_at_zero`];
/// elsewhere it is an experiment and carries no uniqueness claim.
#[derive(Clone, Debug, Serialize)]
pub struct IdempotentSplit {
    #[serde(rename = "X")]
    pub x: MatC,
    pub inner: GenDerivation,
    pub rest: GenDerivation,
    /// Largest `|D1(e_ii)|`; zero up to round-off when `D` is a derivation.
    pub idempotent_residual: f64,
}

pub fn idempotent_split(d: &GenDerivation) -> Result<IdempotentSplit> {
    d.validate()?;
    let n = d.n();
    let dim = d.dim();
    let mut x = MatC::zeros(dim);
    if dim == n {
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                x.set(i, j, d.values_e[i].get(i, j));
            }
        }
    }
    let inner = GenDerivation::from_derivation(&InnerDerivation::new(d.point, x.clone()), n)?;
    let minus = |a: &[MatC], b: &[MatC]| a.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>();
    let rest = d.with_values(
        minus(&d.values_e, &inner.values_e),
        minus(&d.values_z, &inner.values_z),
    );
    let idempotent_residual = rest
        .values_e
        .iter()
        .map(MatC::spectral_norm)
        .fold(0.0, f64::max);
    Ok(IdempotentSplit {
        x,
        inner,
        rest,
        idempotent_residual,
    })
}

/// One term `F_k = diag(f_k(w))` of the approximate identity of `ker phi_lambda`
/// for `|lambda| = 1`.
#[derive(Clone, Debug)]
pub struct ApproxIdentityTerm {
    pub k: usize,
    /// Root of `f_k` in the `w` variable: `lambda^n`.
    pub mu: Complex64,
    pub element: CycleElement,
}

/// Coefficients of `((1 + conj(mu) w) / 2)^k`, computed in log space so that
/// large `k` does not underflow the binomial weights.
fn half_binomial_power(mu: Complex64, k: usize) -> Vec<Complex64> {
    let ln2 = std::f64::consts::LN_2;
    let mut log_binom = 0.0f64;
    let base = mu.conj();
    let mut power = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(k + 1);
    for j in 0..=k {
        if j > 0 {
            log_binom += ((k - j + 1) as f64).ln() - (j as f64).ln();
            power *= base;
        }
        out.push(power * (log_binom - k as f64 * ln2).exp());
    }
    out
}

/// Builds `f_k(w) = 1 - ((1 + conj(mu) w)/2)^k` with `mu = lambda^n`, so that
/// `f_k` vanishes at `w = lambda^n` and `|f_k| <= 2` on the circle, then
/// returns `F_k = f_k(w) I`.
///
/// Coefficients below the canonical threshold are dropped from the top of
/// `f_k`; the constant term is then corrected so that `f_k(mu) = 0` holds to
/// round-off.
pub fn boundary_approx_identity(lambda: Complex64, n: usize, k: usize) -> Result<ApproxIdentityTerm> {
    if (lambda.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "approximate identity needs |lambda| = 1, got {}",
            lambda.norm()
        )));
    }
    if k == 0 || n == 0 {
        return Err(Error::Precondition("need k >= 1 and n >= 1".into()));
    }
    let mu = lambda.powu(n as u32);
    let mut coeffs: Vec<Complex64> = half_binomial_power(mu, k).into_iter().map(|c| -c).collect();
    coeffs[0] += Complex64::new(1.0, 0.0);
    let trimmed = Poly::new(coeffs);
    let defect = trimmed.eval(mu);
    let mut coeffs = trimmed.coeffs().to_vec();
    coeffs[0] -= defect;
    let f = Poly::new(coeffs);
    Ok(ApproxIdentityTerm {
        k,
        mu,
        element: CycleElement::diagonal_scalar(n, &f),
    })
}

impl ApproxIdentityTerm {
    /// `|F_k a - a|` on a `grid`-point circle sample.
    pub fn defect(&self, a: &CycleElement, grid: usize) -> Result<f64> {
        let prod = self.element.mul_bounded(a, usize::MAX)?;
        Ok(prod.sub_elem(a)?.norm(grid))
    }
}

/// Kernel elements of `phi_lambda` for `|lambda| = 1` whose boundary values
/// have norm at most `|w - lambda^n|`: `(w - mu) I`, `(w - mu) Z_1` and
/// `(w - mu) w e_nn`.
pub fn canonical_boundary_kernel(lambda: Complex64, n: usize) -> Vec<CycleElement> {
    let mu = lambda.powu(n as u32);
    let factor = Poly::linear_factor(mu);
    let scale = |a: CycleElement| a.map_entries(|_, _, f| f * &factor);
    vec![
        scale(CycleElement::identity(n)),
        scale(Generator::Z(0).element(n)),
        scale(CycleElement::basis(n, n - 1, n - 1, 1)),
    ]
}
