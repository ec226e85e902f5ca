//! Invariant suites behind the `suite` command.
//!
//! Each check yields one row. A check whose verdict depends on the inner-ness
//! tolerance is re-run at the default tolerance when it fails, and the row is
//! flagged `tolerance_induced` if that rerun passes.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use super::{to_csv, to_value, Failure, Options, Outcome, Status};
use crate::algebra::{CycleElement, Generator, MatC, NORM_GRID};
use crate::derivations::{
    boundary_approx_identity, canonical_boundary_kernel, check_leibniz, decompose_at_zero,
    inner_solve_tol, kernel_part, kernel_vanishing_test, DerivativeAt, GenDerivation,
    InnerDerivation, PointDerivation, NON_INNER_RATIO, TOL_INNER,
};
use crate::error::Result;
use crate::reconstruction::{default_grid, localize, reconstruct, GlobalDerivation, GLOBAL_TOL};
use crate::representations::{
    diag_zero_spanning_set, eval_rep, kernel_sample, kernel_square_witness,
    semisimplicity_certificate, KernelSquare, RepPoint, Semisimplicity,
};
use crate::sample::{self, SuiteRng};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteRow {
    pub invariant: &'static str,
    pub cases: usize,
    pub metric: f64,
    pub threshold: f64,
    pub pass: bool,
    pub tolerance_induced: bool,
}

struct Check {
    cases: usize,
    metric: f64,
    threshold: f64,
    pass: bool,
}

impl Check {
    fn at_most(cases: usize, metric: f64, threshold: f64) -> Self {
        Check {
            cases,
            metric,
            threshold,
            pass: metric <= threshold,
        }
    }

    fn at_least(cases: usize, metric: f64, threshold: f64) -> Self {
        Check {
            cases,
            metric,
            threshold,
            pass: metric >= threshold,
        }
    }
}

type CheckFn = fn(&mut SuiteRng, usize, &Settings) -> Result<Check>;

#[derive(Clone, Copy)]
struct Settings {
    tol_inner: f64,
    deg_max: usize,
}

const DIMS: [usize; 5] = [1, 2, 3, 4, 6];

/// `(name, check, depends on the inner-ness tolerance)`.
const CHECKS: &[(&str, CheckFn, bool)] = &[
    ("closure_homomorphism", closure_homomorphism, false),
    ("leibniz_inner", leibniz_inner, false),
    ("leibniz_derivative", leibniz_derivative, false),
    ("sign_convention", sign_convention, false),
    ("inner_recovery", inner_recovery, true),
    ("non_inner_derivative", non_inner_derivative, true),
    ("diag_zero_rigidity", diag_zero_rigidity, false),
    ("kernel_square", kernel_square, false),
    ("approx_identity", approx_identity, false),
    ("semisimplicity", semisimplicity, false),
    ("decompose_at_zero", decompose_zero, false),
    ("word_well_defined", word_well_defined, false),
    ("reconstruction_round_trip", round_trip, true),
    ("disk_algebra_rigidity", disk_algebra, false),
];

/// Runs every check with `trials` as the base case count.
pub fn run_suite(seed: u64, trials: usize, tol_inner: f64, deg_max: usize) -> Result<Vec<SuiteRow>> {
    let settings = Settings { tol_inner, deg_max };
    let default = Settings {
        tol_inner: TOL_INNER,
        deg_max,
    };
    let mut rows = Vec::with_capacity(CHECKS.len());
    for (t, &(name, check, uses_tol)) in CHECKS.iter().enumerate() {
        let stream = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(t as u64);
        let c = check(&mut sample::rng(stream), trials, &settings)?;
        let tolerance_induced = !c.pass
            && uses_tol
            && tol_inner != TOL_INNER
            && check(&mut sample::rng(stream), trials, &default)?.pass;
        rows.push(SuiteRow {
            invariant: name,
            cases: c.cases,
            metric: c.metric,
            threshold: c.threshold,
            pass: c.pass,
            tolerance_induced,
        });
    }
    Ok(rows)
}

pub fn command(o: &Options, trials: usize) -> Result<Outcome, Failure> {
    let rows = run_suite(o.seed, trials, o.tol_inner, o.deg_max).map_err(|e| Failure::internal(&e))?;
    let failures = rows.iter().filter(|r| !r.pass).count();
    let induced = rows.iter().filter(|r| r.tolerance_induced).count();
    Ok(Outcome {
        status: if failures == 0 {
            Status::Success
        } else {
            Status::Negative
        },
        result: json!({
            "passed": rows.len() - failures,
            "failed": failures,
            "tolerance_induced": induced,
            "rows": to_value(&rows),
        }),
        csv: Some(to_csv(&rows)?),
    })
}

fn closure_homomorphism(rng: &mut SuiteRng, trials: usize, _: &Settings) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in DIMS {
        for _ in 0..trials {
            let a = sample::element(rng, n, 8);
            let b = sample::element(rng, n, 8);
            let ab = a.mul_elem(&b)?;
            // Closure: the product re-parses from its realized form unchanged.
            if CycleElement::parse_realized(&ab.realize())? != ab {
                worst = f64::INFINITY;
            }
            let point = RepPoint::Lambda(sample::disk_point(rng));
            let lhs = eval_rep(&point, &ab)?;
            let rhs = &eval_rep(&point, &a)? * &eval_rep(&point, &b)?;
            worst = worst.max((&lhs - &rhs).spectral_norm());
            cases += 1;
        }
    }
    Ok(Check::at_most(cases, worst, 1e-10))
}

/// Twenty points including `0` and four boundary points.
fn leibniz_points(rng: &mut SuiteRng) -> Vec<Complex64> {
    let mut points = vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        sample::circle_point(rng),
    ];
    while points.len() < 20 {
        points.push(sample::disk_point(rng));
    }
    points
}

fn leibniz_inner(rng: &mut SuiteRng, trials: usize, _: &Settings) -> Result<Check> {
    let mut worst = 0.0f64;
    for lambda in leibniz_points(rng) {
        let n = rng_dim(rng);
        let d = InnerDerivation::new(RepPoint::Lambda(lambda), sample::matc(rng, n));
        worst = worst.max(check_leibniz(&d, n, trials, 4, rng)?);
    }
    Ok(Check::at_most(20 * trials, worst, 1e-12))
}

fn leibniz_derivative(rng: &mut SuiteRng, trials: usize, _: &Settings) -> Result<Check> {
    let mut worst = 0.0f64;
    for lambda in leibniz_points(rng) {
        let n = rng_dim(rng);
        worst = worst.max(check_leibniz(&DerivativeAt { lambda }, n, trials, 4, rng)?);
    }
    Ok(Check::at_most(20 * trials, worst, 1e-10))
}

fn rng_dim(rng: &mut SuiteRng) -> usize {
    use rand::Rng;
    rng.random_range(1..=4)
}

fn sign_convention(rng: &mut SuiteRng, trials: usize, _: &Settings) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = rng_dim(rng);
        let x0 = sample::element(rng, n, 3);
        let lambda = sample::disk_point(rng);
        let local = localize(&GlobalDerivation::commutator(&x0), lambda)?;
        let expect = InnerDerivation::new(RepPoint::Lambda(lambda), x0.evaluate(lambda));
        let a = sample::element(rng, n, 3);
        worst = worst.max((&local.apply(&a)? - &expect.apply(&a)?).spectral_norm());
    }
    Ok(Check::at_most(trials, worst, 1e-12))
}

fn inner_recovery(rng: &mut SuiteRng, trials: usize, s: &Settings) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..10 {
        let lambda = loop {
            let l = sample::disk_point(rng);
            if l.norm() > 1e-3 {
                break l;
            }
        };
        for _ in 0..trials {
            let n = rng_dim(rng) + 1;
            let point = RepPoint::Lambda(lambda);
            let x = sample::matc(rng, n);
            let d = GenDerivation::from_derivation(&InnerDerivation::new(point, x.clone()), n)?;
            let solved = inner_solve_tol(&d, s.tol_inner)?;
            let err = match solved.x {
                Some(found) if solved.consistent => {
                    let gauged = &x - &MatC::identity(n).scale(x.get(0, 0));
                    (&found - &gauged).max_abs()
                }
                _ => f64::INFINITY,
            };
            worst = worst.max(err);
            cases += 1;
        }
    }
    Ok(Check::at_most(cases, worst, 1e-9))
}

fn non_inner_derivative(rng: &mut SuiteRng, trials: usize, s: &Settings) -> Result<Check> {
    use rand::Rng;
    let lambdas = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.3, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(-0.7, 0.0),
    ];
    let mut weakest = f64::INFINITY;
    for lambda in lambdas {
        for n in 1..=3 {
            let d = GenDerivation::from_derivation(&DerivativeAt { lambda }, n)?;
            let solved = inner_solve_tol(&d, s.tol_inner)?;
            let kernel = kernel_sample(&d.point, n, rng.random(), trials.max(4))?;
            let test = kernel_vanishing_test(&d, &kernel)?;
            let ratio = if solved.consistent { 0.0 } else { test.best_ratio };
            weakest = weakest.min(ratio);
        }
    }
    Ok(Check::at_least(lambdas.len() * 3, weakest, NON_INNER_RATIO))
}

fn diag_zero_rigidity(rng: &mut SuiteRng, trials: usize, _: &Settings) -> Result<Check> {
    let attempts = 10 * trials;
    let mut failed = 0;
    let mut total = 0;
    for n in 2..=3 {
        for _ in 0..attempts {
            let i = rand::Rng::random_range(rng, 1..=n);
            let point = RepPoint::DiagZero(i);
            let mut values = || (0..n).map(|_| MatC::from_fn(1, |_, _| sample::complex_unit_box(rng))).collect();
            let d = GenDerivation::new(point, values(), values())?;
            if check_leibniz(&d, n, 0, 0, rng)? >= 1e-3 {
                failed += 1;
            }
            total += 1;
        }
    }
    Ok(Check::at_least(total, failed as f64 / total as f64, 0.99))
}

fn kernel_square(_: &mut SuiteRng, _: usize, _: &Settings) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 2..=3 {
        let point = RepPoint::DiagZero(1);
        for k in diag_zero_spanning_set(n, 1, 2) {
            worst = worst.max(match kernel_square_witness(&point, &k, 2)? {
                KernelSquare::Decomposition { residual, .. } => residual,
                KernelSquare::Failure { .. } => f64::INFINITY,
            });
            cases += 1;
        }
    }
    Ok(Check::at_most(cases, worst, crate::representations::KERNEL_SQUARE_TOL))
}

/// Monotone decrease and the norm bound on `F_k` for `k` up to 1024; the
/// metric is the largest defect at the last `k`.
fn approx_identity(_: &mut SuiteRng, _: usize, _: &Settings) -> Result<Check> {
    let lambda = Complex64::new(1.0, 0.0);
    let ks = [4, 16, 64, 256, 1024];
    let mut ok = true;
    let mut last = 0.0f64;
    for n in 1..=3 {
        let kernel = canonical_boundary_kernel(lambda, n);
        let mut previous = vec![f64::INFINITY; kernel.len()];
        for k in ks {
            let grid = NORM_GRID.max(8 * k);
            let term = boundary_approx_identity(lambda, n, k)?;
            ok &= term.element.norm(grid) <= 2.0 + 1e-9;
            for (t, a) in kernel.iter().enumerate() {
                let defect = term.defect(a, grid)?;
                ok &= defect < previous[t];
                previous[t] = defect;
            }
        }
        last = previous.iter().copied().fold(last, f64::max);
    }
    // sup |1 - ((1 + w)/2)^k| |w - 1| at k = 1024 is about 0.0379.
    let metric = if ok { last } else { f64::INFINITY };
    Ok(Check::at_most(3 * ks.len() * 3, metric, 0.04))
}

fn semisimplicity(rng: &mut SuiteRng, trials: usize, s: &Settings) -> Result<Check> {
    use rand::Rng;
    let cases = 5 * trials;
    let mut mismatches = 0;
    for _ in 0..cases {
        let n = rng_dim(rng);
        let a = if rng.random_bool(0.3) {
            CycleElement::zero(n)
        } else {
            sample::element(rng, n, 8)
        };
        let zero = matches!(semisimplicity_certificate(&a, s.deg_max.max(8)), Semisimplicity::Zero { .. });
        if zero != a.is_zero() {
            mismatches += 1;
        }
    }
    Ok(Check::at_most(cases, mismatches as f64, 0.0))
}

fn decompose_zero(rng: &mut SuiteRng, trials: usize, _: &Settings) -> Result<Check> {
    let mut worst = 0.0f64;
    let zero = RepPoint::Lambda(Complex64::new(0.0, 0.0));
    for _ in 0..trials {
        let n = rng_dim(rng) + 1;
        let x = sample::matc(rng, n);
        let inner = GenDerivation::from_derivation(&InnerDerivation::new(zero, x), n)?;
        let f = GenDerivation::from_derivation(&DerivativeAt { lambda: Complex64::new(0.0, 0.0) }, n)?;
        // D = delta_X + F at phi_0, and a second D sharing its edge values.
        let sum = |p: &GenDerivation, q: &GenDerivation| {
            let add = |a: &[MatC], b: &[MatC]| a.iter().zip(b).map(|(u, v)| u + v).collect::<Vec<_>>();
            GenDerivation::new(zero, add(&p.values_e, &q.values_e), add(&p.values_z, &q.values_z))
        };
        let d = sum(&inner, &f)?;
        let split = decompose_at_zero(&d)?;
        for g in Generator::all(n) {
            let rebuilt = split.d0.value(g) + split.d1.value(g);
            worst = worst.max((&rebuilt - d.value(g)).max_abs());
        }
        let other_x = sample::matc(rng, n);
        let mut other = d.clone();
        other.values_e = GenDerivation::from_derivation(&InnerDerivation::new(zero, other_x), n)?.values_e;
        let other_split = decompose_at_zero(&other)?;
        for _ in 0..2 {
            let a = sample::element(rng, n, 4);
            let lhs = split.d1.apply(&a)?;
            worst = worst.max((&lhs - &other_split.d1.apply(&a)?).max_abs());
            worst = worst.max((&lhs - &kernel_part(&d, &a)?).max_abs());
        }
    }
    Ok(Check::at_most(trials, worst, 1e-10))
}

fn word_well_defined(rng: &mut SuiteRng, trials: usize, _: &Settings) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = rng_dim(rng) + 1;
        let d = GlobalDerivation::commutator(&sample::element(rng, n, 2));
        for i in 0..n {
            let left = d.apply_word(&[Generator::E(i), Generator::Z(i)])?;
            let right = d.apply_word(&[Generator::Z(i), Generator::E((i + 1) % n)])?;
            let direct = d.apply(&Generator::Z(i).element(n))?;
            worst = worst.max(left.max_coeff_diff(&right)).max(left.max_coeff_diff(&direct));
        }
        let word = sample::word(rng, n, 6);
        let by_word = d.apply_word(&word)?;
        let by_basis = d.apply(&CycleElement::from_word(n, &word))?;
        worst = worst.max(by_word.max_coeff_diff(&by_basis));
    }
    Ok(Check::at_most(trials, worst, 1e-12))
}

fn round_trip(rng: &mut SuiteRng, trials: usize, s: &Settings) -> Result<Check> {
    let per_dim = (trials / 5).max(1);
    let mut worst = 0.0f64;
    for n in DIMS {
        for _ in 0..per_dim {
            let d = GlobalDerivation::commutator(&sample::element(rng, n, 8));
            let m = default_grid(n, s.deg_max);
            worst = worst.max(match reconstruct(&d, m, s.deg_max, s.tol_inner, 20, rng) {
                Ok(report) => report.max_residual,
                Err(_) => f64::INFINITY,
            });
        }
    }
    Ok(Check::at_most(per_dim * DIMS.len(), worst, GLOBAL_TOL))
}

/// For `n = 1` every commutator derivation is zero.
fn disk_algebra(rng: &mut SuiteRng, trials: usize, _: &Settings) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let d = GlobalDerivation::commutator(&sample::element(rng, 1, 8));
        let a = CycleElement::from_word(1, &sample::word(rng, 1, 6));
        worst = worst.max(d.apply(&a)?.norm(NORM_GRID));
    }
    Ok(Check::at_most(trials, worst, 0.0))
}
