//! Reconstruction of a global commutator witness.
//!
//! A derivation of the algebra into itself that is locally inner at every
//! boundary point `lambda` on the unit circle yields a field of pointwise
//! witnesses `X_lambda`. Sampling that field on the roots of unity and
//! interpolating each entry recovers one element `X` with `D(a) = aX - Xa`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{
    monomial_word, parse_entry, path_basis, CycleElement, Generator, MatC, NORM_GRID,
};
use crate::derivations::{inner_solve_tol, GenDerivation, TOL_INNER};
use crate::error::{Error, Result};
use crate::poly::{interpolate_roots_of_unity, roots_of_unity, Poly, DEG_MAX};
use crate::representations::{eval_rep, RepPoint};
use crate::sample;

/// A derivation of the algebra into itself, presented on the generators.
///
/// `D` is extended to words by `D(ab) = D(a) b + a D(b)` and to general
/// elements through the canonical path words of the basis `w^d E_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalDerivation {
    n: usize,
    values_e: Vec<CycleElement>,
    values_z: Vec<CycleElement>,
}

#[derive(Serialize, Deserialize)]
struct GlobalDerivationJson {
    n: usize,
    values_e: Vec<CycleElement>,
    #[serde(rename = "values_Z")]
    values_z: Vec<CycleElement>,
}

impl GlobalDerivation {
    pub fn new(
        n: usize,
        values_e: Vec<CycleElement>,
        values_z: Vec<CycleElement>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("derivation needs n >= 1".into()));
        }
        for list in [&values_e, &values_z] {
            if list.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: list.len(),
                });
            }
        }
        if let Some(bad) = values_e.iter().chain(&values_z).find(|a| a.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.n(),
            });
        }
        Ok(GlobalDerivation {
            n,
            values_e,
            values_z,
        })
    }

    pub fn zero(n: usize) -> Self {
        GlobalDerivation {
            n,
            values_e: vec![CycleElement::zero(n); n],
            values_z: vec![CycleElement::zero(n); n],
        }
    }

    /// `D(a) = a x - x a`.
    pub fn commutator(x: &CycleElement) -> Self {
        let n = x.n();
        let values =
            |g: Generator| g.element(n).commutator(x).expect("same dimension");
        GlobalDerivation {
            n,
            values_e: (0..n).map(|i| values(Generator::E(i))).collect(),
            values_z: (0..n).map(|i| values(Generator::Z(i))).collect(),
        }
    }

    /// Entrywise `z d/dz`: a derivation of the polynomial algebra that is
    /// unbounded in the sup norm, and not locally inner anywhere on the circle.
    pub fn euler(n: usize) -> Self {
        let values = |g: Generator| match g {
            Generator::E(_) => CycleElement::zero(n),
            Generator::Z(_) => g.element(n),
        };
        GlobalDerivation {
            n,
            values_e: (0..n).map(|i| values(Generator::E(i))).collect(),
            values_z: (0..n).map(|i| values(Generator::Z(i))).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, g: Generator) -> &CycleElement {
        match g {
            Generator::E(i) => &self.values_e[i],
            Generator::Z(i) => &self.values_z[i],
        }
    }

    /// Leibniz rule along the given word, using the word's own factorization.
    pub fn apply_word(&self, word: &[Generator]) -> Result<CycleElement> {
        let n = self.n;
        let mut acc = CycleElement::zero(n);
        for t in 0..word.len() {
            let prefix = CycleElement::from_word(n, &word[..t]);
            let suffix = CycleElement::from_word(n, &word[t + 1..]);
            let term = prefix
                .mul_bounded(self.value(word[t]), usize::MAX)?
                .mul_bounded(&suffix, usize::MAX)?;
            acc = acc.add_elem(&term)?;
        }
        Ok(acc)
    }

    /// `D(w^d E_ij)` along the canonical path word.
    fn apply_basis(&self, i: usize, j: usize, d: usize) -> CycleElement {
        let n = self.n;
        let word = monomial_word(n, i, j, d);
        if let [Generator::E(k)] = word[..] {
            return self.values_e[k].clone();
        }
        let len = word.len();
        let mut acc = CycleElement::zero(n);
        for (t, g) in word.iter().enumerate() {
            let mut term = self.value(*g).clone();
            if t > 0 {
                let (r, c, q) = path_basis(n, i, t);
                term = term.mul_basis_left(r, c, q);
            }
            if t + 1 < len {
                let (r, c, q) = path_basis(n, (i + t + 1) % n, len - t - 1);
                term = term.mul_basis_right(r, c, q);
            }
            acc = acc.add_elem(&term).expect("same dimension");
        }
        acc
    }

    pub fn apply(&self, a: &CycleElement) -> Result<CycleElement> {
        if a.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: a.n(),
            });
        }
        let mut out = CycleElement::zero(self.n);
        for ((i, j), f) in a.entries() {
            for (d, &c) in f.coeffs().iter().enumerate() {
                if c != Complex64::new(0.0, 0.0) {
                    out = out.add_elem(&self.apply_basis(i, j, d).scale(c))?;
                }
            }
        }
        Ok(out)
    }

    /// Largest coefficient of `D(ab) - D(a) b - a D(b)` over `trials` random pairs.
    pub fn leibniz_defect(&self, trials: usize, deg: usize, rng: &mut impl Rng) -> Result<f64> {
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let a = sample::element(rng, self.n, deg);
            let b = sample::element(rng, self.n, deg);
            let lhs = self.apply(&a.mul_bounded(&b, usize::MAX)?)?;
            let rhs = self
                .apply(&a)?
                .mul_bounded(&b, usize::MAX)?
                .add_elem(&a.mul_bounded(&self.apply(&b)?, usize::MAX)?)?;
            worst = worst.max(lhs.max_coeff_diff(&rhs));
        }
        Ok(worst)
    }
}

impl Serialize for GlobalDerivation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GlobalDerivationJson {
            n: self.n,
            values_e: self.values_e.clone(),
            values_z: self.values_z.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GlobalDerivation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = GlobalDerivationJson::deserialize(deserializer)?;
        GlobalDerivation::new(raw.n, raw.values_e, raw.values_z).map_err(serde::de::Error::custom)
    }
}

/// `phi_lambda o D` as a point derivation at `phi_lambda`.
pub fn localize(d: &GlobalDerivation, lambda: Complex64) -> Result<GenDerivation> {
    let point = RepPoint::lambda(lambda)?;
    let n = d.n;
    let eval = |a: &CycleElement| eval_rep(&point, a);
    GenDerivation::new(
        point,
        d.values_e.iter().map(eval).collect::<Result<_>>()?,
        d.values_z.iter().map(eval).collect::<Result<_>>()?,
    )
    .inspect(|g| debug_assert_eq!(g.n(), n))
}

/// Pointwise witnesses on the `m`-th roots of unity, each with `X[1][1] = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryField {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "X_at")]
    pub x_at: Vec<MatC>,
}

impl BoundaryField {
    pub fn grid(&self) -> Vec<Complex64> {
        roots_of_unity(self.m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Precondition("empty boundary field".into()));
        }
        if self.x_at.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: self.x_at.len(),
            });
        }
        for x in &self.x_at {
            if x.dim() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: x.dim(),
                });
            }
        }
        Ok(())
    }
}

/// Smallest admissible grid for entries of `w`-degree at most `deg_max`.
pub fn min_grid(n: usize, deg_max: usize) -> usize {
    n * (deg_max + 1) + 1
}

/// Default grid: `4 n (deg_max + 2)`.
pub fn default_grid(n: usize, deg_max: usize) -> usize {
    4 * n * (deg_max + 2)
}

/// Solves for the witness at every grid point, failing on the first point
/// where the localized derivation is not inner.
pub fn solve_boundary_field(d: &GlobalDerivation, m: usize) -> Result<BoundaryField> {
    solve_boundary_field_with(d, m, DEG_MAX, TOL_INNER)
}

pub fn solve_boundary_field_with(
    d: &GlobalDerivation,
    m: usize,
    deg_max: usize,
    tol: f64,
) -> Result<BoundaryField> {
    let n = d.n;
    if m < min_grid(n, deg_max) {
        return Err(Error::Precondition(format!(
            "grid of {m} points is too coarse: need more than {}",
            n * (deg_max + 1)
        )));
    }
    let mut x_at = Vec::with_capacity(m);
    for lambda in roots_of_unity(m) {
        let local = localize(d, lambda)?;
        let solved = inner_solve_tol(&local, tol)?;
        match solved.x {
            Some(x) if solved.consistent => x_at.push(x),
            _ => {
                return Err(Error::NotLocallyInner {
                    lambda,
                    residual: solved.residual,
                })
            }
        }
    }
    Ok(BoundaryField { n, m, x_at })
}

/// Interpolates the field into one algebra element.
///
/// Off-diagonal entries are interpolated directly and must satisfy the
/// support condition of their position. The diagonal is rebuilt from the
/// edge data: the `(i, i+1)` entry of `delta_X(Z_i)` divided by `lambda` is
/// `X_{i+1,i+1} - X_{ii}`, which is interpolated and summed from `X_11 = 0`.
pub fn reconstruct_witness(field: &BoundaryField) -> Result<CycleElement> {
    reconstruct_witness_with(field, DEG_MAX)
}

pub fn reconstruct_witness_with(field: &BoundaryField, deg_max: usize) -> Result<CycleElement> {
    field.validate()?;
    let n = field.n;
    let grid = field.grid();
    let mut x = CycleElement::zero(n);

    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let samples: Vec<Complex64> = field.x_at.iter().map(|m| m.get(i, j)).collect();
            let p = interpolate_roots_of_unity(&samples);
            x.set_entry(i, j, parse_entry(n, i, j, &p)?);
        }
    }

    let mut diagonal = Poly::zero();
    for i in 0..n.saturating_sub(1) {
        let samples: Vec<Complex64> = field
            .x_at
            .iter()
            .zip(&grid)
            .map(|(m, &lambda)| {
                let z = MatC::unit(n, i, i + 1).scale(lambda);
                z.commutator(m).get(i, i + 1) / lambda
            })
            .collect();
        let step = parse_entry(n, i + 1, i + 1, &interpolate_roots_of_unity(&samples))?;
        diagonal = &diagonal + &step;
        x.set_entry(i + 1, i + 1, diagonal.clone());
    }
    x.check_degree(deg_max)?;
    Ok(x)
}

/// Acceptance threshold on the global residual of a reconstructed witness.
pub const GLOBAL_TOL: f64 = 1e-8;

/// Largest `|D(a) - (a X - X a)|` over `trials` random generator words,
/// measured in the algebra norm on a `grid`-point circle sample.
pub fn verify_global_inner(
    d: &GlobalDerivation,
    x: &CycleElement,
    trials: usize,
    rng: &mut impl Rng,
    grid: usize,
) -> Result<f64> {
    if x.n() != d.n {
        return Err(Error::DimensionMismatch {
            expected: d.n,
            found: x.n(),
        });
    }
    // Compared on evaluated matrices so that coefficient trimming in the
    // subtraction cannot hide a small residual.
    let points = roots_of_unity(grid);
    let x_at: Vec<MatC> = points.iter().map(|&z| x.evaluate(z)).collect();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let word = sample::word(rng, d.n, 6);
        let a = CycleElement::from_word(d.n, &word);
        let lhs = d.apply_word(&word)?;
        for (&z, xz) in points.iter().zip(&x_at) {
            let diff = &lhs.evaluate(z) - &a.evaluate(z).commutator(xz);
            worst = worst.max(diff.spectral_norm());
        }
    }
    Ok(worst)
}

/// Output of the full pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct ReconstructionReport {
    #[serde(rename = "X")]
    pub x: CycleElement,
    pub max_residual: f64,
    pub grid: usize,
}

/// Localize, solve on the boundary, interpolate, and verify on `trials` words.
pub fn reconstruct(
    d: &GlobalDerivation,
    m: usize,
    deg_max: usize,
    tol: f64,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<ReconstructionReport> {
    let field = solve_boundary_field_with(d, m, deg_max, tol)?;
    let x = reconstruct_witness_with(&field, deg_max)?;
    let max_residual = verify_global_inner(d, &x, trials, rng, NORM_GRID)?;
    Ok(ReconstructionReport {
        x,
        max_residual,
        grid: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const DEG: usize = 12;

    #[test]
    fn localize_examples() {
        let l = c(0.6, -0.3);
        let g = localize(&GlobalDerivation::zero(3), l).unwrap();
        assert!(g.values().all(|(_, v)| v.max_abs() == 0.0));

        let mut rng = sample::rng(17);
        let x0 = sample::element(&mut rng, 3, 3);
        let g = localize(&GlobalDerivation::commutator(&x0), l).unwrap();
        let phi_x = eval_rep(&RepPoint::Lambda(l), &x0).unwrap();
        for (gen, v) in g.values() {
            let phi_g = eval_rep(&RepPoint::Lambda(l), &gen.element(3)).unwrap();
            assert!((&phi_g.commutator(&phi_x) - v).max_abs() < 1e-12);
        }

        let mut vz = vec![CycleElement::zero(3); 3];
        vz[0] = CycleElement::gen_z(3, 1).unwrap();
        let d = GlobalDerivation::new(3, vec![CycleElement::zero(3); 3], vz).unwrap();
        let g = localize(&d, l).unwrap();
        assert_eq!(g.values_z[0], MatC::unit(3, 0, 1).scale(l));
    }

    #[test]
    fn field_examples() {
        let n = 2;
        let m = default_grid(n, DEG);
        let mut rng = sample::rng(23);
        let x0 = sample::element(&mut rng, n, 3);
        let field = solve_boundary_field_with(&GlobalDerivation::commutator(&x0), m, DEG, TOL_INNER)
            .unwrap();
        for (x, lambda) in field.x_at.iter().zip(field.grid()) {
            let v = x0.evaluate(lambda);
            let expect = &v - &MatC::identity(n).scale(v.get(0, 0));
            assert!((x - &expect).max_abs() < 1e-9);
        }

        let zero = solve_boundary_field_with(&GlobalDerivation::zero(n), m, DEG, TOL_INNER).unwrap();
        assert!(zero.x_at.iter().all(|x| x.max_abs() == 0.0));

        let junk = GlobalDerivation::new(
            n,
            vec![CycleElement::identity(n); n],
            vec![CycleElement::zero(n); n],
        )
        .unwrap();
        assert!(matches!(
            solve_boundary_field_with(&junk, m, DEG, TOL_INNER),
            Err(Error::NotLocallyInner { .. })
        ));

        assert!(solve_boundary_field_with(&GlobalDerivation::zero(n), 10, DEG, TOL_INNER).is_err());
    }

    #[test]
    fn reconstruct_examples() {
        let n = 2;
        let m = default_grid(n, DEG);
        let x0 = CycleElement::gen_z(2, 1)
            .unwrap()
            .add_elem(&CycleElement::gen_z(2, 2).unwrap())
            .unwrap();
        let field = solve_boundary_field_with(&GlobalDerivation::commutator(&x0), m, DEG, TOL_INNER)
            .unwrap();
        let x = reconstruct_witness_with(&field, DEG).unwrap();
        assert!(x.max_coeff_diff(&x0) < 1e-12);

        let zero = BoundaryField {
            n: 3,
            m: 40,
            x_at: vec![MatC::zeros(3); 40],
        };
        assert!(reconstruct_witness_with(&zero, DEG).unwrap().is_zero());
    }

    #[test]
    fn corrupted_field_is_not_in_algebra() {
        // A constant in position (1,2) needs exponent = 1 mod 2.
        let m = 24;
        let x_at = (0..m)
            .map(|_| {
                let mut x = MatC::zeros(2);
                x.set(0, 1, c(1.0, 0.0));
                x
            })
            .collect();
        let field = BoundaryField { n: 2, m, x_at };
        assert!(matches!(
            reconstruct_witness_with(&field, DEG),
            Err(Error::NotInAlgebra { row: 1, col: 2, .. })
        ));
    }

    #[test]
    fn verify_examples() {
        let mut rng = sample::rng(31);
        let n = 3;
        let x0 = sample::element(&mut rng, n, 2);
        let d = GlobalDerivation::commutator(&x0);
        let report = reconstruct(&d, default_grid(n, DEG), DEG, TOL_INNER, 20, &mut rng).unwrap();
        assert!(report.max_residual <= 1e-8);

        let z = verify_global_inner(&GlobalDerivation::zero(n), &CycleElement::zero(n), 10, &mut rng, 64)
            .unwrap();
        assert_eq!(z, 0.0);

        let mut perturbed = report.x.clone();
        let f = perturbed.entry(0, 1) + &Poly::constant(c(1e-2, 0.0));
        perturbed.set_entry(0, 1, f);
        let r = verify_global_inner(&d, &perturbed, 50, &mut rng, NORM_GRID).unwrap();
        assert!(r >= 1e-3, "{r}");
    }

    #[test]
    fn word_and_basis_extensions_agree() {
        let mut rng = sample::rng(3);
        for n in 1..=4 {
            let d = GlobalDerivation::commutator(&sample::element(&mut rng, n, 2));
            for _ in 0..20 {
                let word = sample::word(&mut rng, n, 7);
                let a = CycleElement::from_word(n, &word);
                let by_word = d.apply_word(&word).unwrap();
                let by_basis = d.apply(&a).unwrap();
                assert!(by_word.max_coeff_diff(&by_basis) < 1e-12);
            }
        }
    }

    #[test]
    fn euler_derivation_is_not_locally_inner() {
        let d = GlobalDerivation::euler(3);
        assert!(d.leibniz_defect(10, 3, &mut sample::rng(1)).unwrap() < 1e-12);
        assert!(matches!(
            solve_boundary_field_with(&d, default_grid(3, DEG), DEG, TOL_INNER),
            Err(Error::NotLocallyInner { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let d = GlobalDerivation::commutator(&CycleElement::gen_z(2, 1).unwrap());
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"values_Z\""));
        let back: GlobalDerivation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
