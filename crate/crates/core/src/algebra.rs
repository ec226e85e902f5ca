//! The cycle algebra: `n x n` matrices whose `(i,j)` entry is
//! `z^l(i,j) f_ij(z^n)` with `l(i,j) = (j - i) mod n`.
//!
//! Elements store the `f_ij` as polynomials in `w = z^n`, so membership is
//! structural. [`CycleElement::realize`] and [`CycleElement::parse_realized`]
//! convert to and from plain matrices of `z`-polynomials.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{roots_of_unity, Poly, DEG_MAX, EPS_COEFF};

/// Default number of circle points used by [`CycleElement::norm`].
pub const NORM_GRID: usize = 512;

/// Exponent shift attached to matrix position `(i, j)`, 0-indexed.
pub fn shift(n: usize, i: usize, j: usize) -> usize {
    (j + n - i % n) % n
}

/// A dense complex matrix: the value of a representation or a point
/// derivation at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct MatC(pub DMatrix<Complex64>);

impl MatC {
    pub fn zeros(n: usize) -> Self {
        MatC(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        MatC(DMatrix::identity(n, n))
    }

    /// Matrix unit with a one at 0-indexed `(i, j)`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        MatC(m)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        MatC(DMatrix::from_fn(n, n, f))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.0[(i, j)] = value;
    }

    pub fn scale(&self, c: Complex64) -> MatC {
        MatC(&self.0 * c)
    }

    /// `self * x - x * self`.
    pub fn commutator(&self, x: &MatC) -> MatC {
        MatC(&self.0 * &x.0 - &x.0 * &self.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        match self.dim() {
            0 => 0.0,
            1 => self.0[(0, 0)].norm(),
            _ => {
                if self.0.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                    return 0.0;
                }
                self.0.singular_values().max()
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Rows as nested vectors, row-major.
    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.0.nrows())
            .map(|i| (0..self.0.ncols()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(MatC::from_fn(n, |i, j| rows[i][j]))
    }
}

impl Add for &MatC {
    type Output = MatC;

    fn add(self, rhs: &MatC) -> MatC {
        MatC(&self.0 + &rhs.0)
    }
}

impl Sub for &MatC {
    type Output = MatC;

    fn sub(self, rhs: &MatC) -> MatC {
        MatC(&self.0 - &rhs.0)
    }
}

impl Mul for &MatC {
    type Output = MatC;

    fn mul(self, rhs: &MatC) -> MatC {
        MatC(&self.0 * &rhs.0)
    }
}

impl Serialize for MatC {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

/// Nested rows, or a flat row-major list of `n^2` entries.
#[derive(Deserialize)]
#[serde(untagged)]
enum MatCJson {
    Rows(Vec<Vec<Complex64>>),
    Flat(Vec<Complex64>),
}

impl<'de> Deserialize<'de> for MatC {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match MatCJson::deserialize(deserializer)? {
            MatCJson::Rows(rows) => MatC::from_rows(rows).map_err(serde::de::Error::custom),
            MatCJson::Flat(flat) => {
                let n = (flat.len() as f64).sqrt().round() as usize;
                if n * n != flat.len() {
                    return Err(serde::de::Error::custom(format!(
                        "flat matrix of {} entries is not square",
                        flat.len()
                    )));
                }
                Ok(MatC::from_fn(n, |i, j| flat[i * n + j]))
            }
        }
    }
}

/// One of the `2n` algebra generators, with a 0-based index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    E(usize),
    Z(usize),
}

impl Generator {
    pub fn all(n: usize) -> impl Iterator<Item = Generator> {
        (0..n).map(Generator::E).chain((0..n).map(Generator::Z))
    }

    pub fn element(self, n: usize) -> CycleElement {
        match self {
            Generator::E(i) => CycleElement::basis(n, i, i, 0),
            Generator::Z(i) => CycleElement::z_basis(n, i),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::E(i) => write!(f, "e{}{}", i + 1, i + 1),
            Generator::Z(i) => write!(f, "Z{}", i + 1),
        }
    }
}

/// The canonical path word for the basis element with `f_ij = w^d`:
/// `e_ii` for the trivial path, otherwise `Z_i Z_{i+1} ... ` of length
/// `l(i,j) + n d`.
pub fn monomial_word(n: usize, i: usize, j: usize, d: usize) -> Vec<Generator> {
    let len = shift(n, i, j) + n * d;
    if len == 0 {
        vec![Generator::E(i)]
    } else {
        (0..len).map(|t| Generator::Z((i + t) % n)).collect()
    }
}

/// An element of the cycle algebra on `n` vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleElement {
    n: usize,
    /// Row-major `f_ij` in `w = z^n`.
    entries: Vec<Poly>,
}

impl CycleElement {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "cycle length must be positive");
        CycleElement {
            n,
            entries: vec![Poly::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = CycleElement::zero(n);
        for i in 0..n {
            a.entries[i * n + i] = Poly::one();
        }
        a
    }

    /// Builds an element from its `f_ij` (0-indexed rows of polynomials in `w`).
    pub fn from_entries(entries: Vec<Vec<Poly>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::Precondition("cycle length must be positive".into()));
        }
        if let Some(row) = entries.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        Ok(CycleElement {
            n,
            entries: entries.into_iter().flatten().collect(),
        })
    }

    /// `w^d` in position `(i, j)`, 0-indexed.
    pub fn basis(n: usize, i: usize, j: usize, d: usize) -> Self {
        let mut a = CycleElement::zero(n);
        a.entries[i * n + j] = Poly::monomial(Complex64::new(1.0, 0.0), d);
        a
    }

    /// The edge generator leaving vertex `i` (0-indexed): realized `z` at `(i, i+1 mod n)`.
    fn z_basis(n: usize, i: usize) -> Self {
        let j = (i + 1) % n;
        // z = z^l * w^q with l + n q = 1; q = 1 only when n = 1.
        let q = (1 - shift(n, i, j)) / n;
        CycleElement::basis(n, i, j, q)
    }

    /// Diagonal idempotent `e_ii`, with `1 <= i <= n`.
    pub fn gen_e(n: usize, i: usize) -> Result<Self> {
        check_index(n, i)?;
        Ok(Generator::E(i - 1).element(n))
    }

    /// Edge generator `Z_i`, with `1 <= i <= n`.
    pub fn gen_z(n: usize, i: usize) -> Result<Self> {
        check_index(n, i)?;
        Ok(Generator::Z(i - 1).element(n))
    }

    /// `f(w) * I`.
    pub fn diagonal_scalar(n: usize, f: &Poly) -> Self {
        let mut a = CycleElement::zero(n);
        for i in 0..n {
            a.entries[i * n + i] = f.clone();
        }
        a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `f_ij` as a polynomial in `w`, 0-indexed.
    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.n + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, f: Poly) {
        self.entries[i * self.n + j] = f;
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &Poly)> {
        let n = self.n;
        self.entries
            .iter()
            .enumerate()
            .map(move |(k, p)| ((k / n, k % n), p))
    }

    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, &Poly) -> Poly) -> Self {
        let n = self.n;
        CycleElement {
            n,
            entries: self
                .entries
                .iter()
                .enumerate()
                .map(|(k, p)| f(k / n, k % n, p))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    /// Largest `w`-degree over all entries, `-1` for zero.
    pub fn max_degree(&self) -> isize {
        self.entries.iter().map(Poly::degree).max().unwrap_or(-1)
    }

    pub fn check_degree(&self, limit: usize) -> Result<()> {
        for ((i, j), p) in self.entries() {
            if p.len() > limit.saturating_add(1) {
                return Err(Error::DegreeOverflow {
                    row: i + 1,
                    col: j + 1,
                    degree: p.degree() as usize,
                    limit,
                });
            }
        }
        Ok(())
    }

    fn check_same_n(&self, other: &CycleElement) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    pub fn add_elem(&self, other: &CycleElement) -> Result<Self> {
        self.check_same_n(other)?;
        Ok(self.zip_entries(other, |a, b| a + b))
    }

    pub fn sub_elem(&self, other: &CycleElement) -> Result<Self> {
        self.check_same_n(other)?;
        Ok(self.zip_entries(other, |a, b| a - b))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_entries(|_, _, p| p.scale(c))
    }

    fn zip_entries(&self, other: &CycleElement, f: impl Fn(&Poly, &Poly) -> Poly) -> Self {
        CycleElement {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Product with entries limited to `w`-degree [`DEG_MAX`].
    pub fn mul_elem(&self, other: &CycleElement) -> Result<Self> {
        self.mul_bounded(other, DEG_MAX)
    }

    /// Product with an explicit `w`-degree limit.
    ///
    /// A summand through vertex `k` carries `z^(l(i,k) + l(k,j))`, which is
    /// `z^l(i,j)` times either `1` or `w`.
    pub fn mul_bounded(&self, other: &CycleElement, limit: usize) -> Result<Self> {
        self.check_same_n(other)?;
        let n = self.n;
        let mut out = CycleElement::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Poly::zero();
                for k in 0..n {
                    let a = self.entry(i, k);
                    let b = other.entry(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b).shift(carry(n, i, k, j));
                }
                out.entries[i * n + j] = acc;
            }
        }
        out.check_degree(limit)?;
        Ok(out)
    }

    /// Product of a word of generators.
    pub fn from_word(n: usize, word: &[Generator]) -> Self {
        word.iter().fold(CycleElement::identity(n), |acc, g| {
            acc.mul_bounded(&g.element(n), usize::MAX)
                .expect("same dimension")
        })
    }

    /// Position `(i,j)` as the `z`-polynomial `z^l(i,j) f_ij(z^n)`, rows 0-indexed.
    pub fn realize(&self) -> Vec<Vec<Poly>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.entry(i, j).compose_power(n).shift(shift(n, i, j)))
                    .collect()
            })
            .collect()
    }

    /// Inverse of [`realize`](Self::realize); rejects monomials whose exponent
    /// is off the congruence class of their position.
    pub fn parse_realized(realized: &[Vec<Poly>]) -> Result<Self> {
        let n = realized.len();
        let mut out = CycleElement::zero(n.max(1));
        if n == 0 {
            return Err(Error::Precondition("cycle length must be positive".into()));
        }
        for (i, row) in realized.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, p) in row.iter().enumerate() {
                out.entries[i * n + j] = parse_entry(n, i, j, p)?;
            }
        }
        Ok(out)
    }

    /// `basis(r, c, d) * self`, without a general product.
    pub fn mul_basis_left(&self, r: usize, c: usize, d: usize) -> Self {
        let n = self.n;
        let mut out = CycleElement::zero(n);
        for j in 0..n {
            let f = self.entry(c, j);
            if !f.is_zero() {
                out.entries[r * n + j] = f.shift(d + carry(n, r, c, j));
            }
        }
        out
    }

    /// `self * basis(r, c, d)`.
    pub fn mul_basis_right(&self, r: usize, c: usize, d: usize) -> Self {
        let n = self.n;
        let mut out = CycleElement::zero(n);
        for i in 0..n {
            let f = self.entry(i, r);
            if !f.is_zero() {
                out.entries[i * n + c] = f.shift(d + carry(n, i, r, c));
            }
        }
        out
    }

    /// Value at `z`: entry `(i,j)` is `z^l(i,j) f_ij(z^n)`.
    pub fn evaluate(&self, z: Complex64) -> MatC {
        let n = self.n;
        let w = z.powu(n as u32);
        let mut powers = Vec::with_capacity(n);
        let mut p = Complex64::new(1.0, 0.0);
        for _ in 0..n {
            powers.push(p);
            p *= z;
        }
        MatC::from_fn(n, |i, j| {
            let f = self.entry(i, j);
            if f.is_zero() {
                Complex64::new(0.0, 0.0)
            } else {
                powers[shift(n, i, j)] * f.eval(w)
            }
        })
    }

    /// Sup over `grid` equispaced circle points of the spectral norm of the
    /// realized value. A lower bound for the true sup norm.
    pub fn norm(&self, grid: usize) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        roots_of_unity(grid.max(1))
            .into_iter()
            .map(|z| self.evaluate(z).spectral_norm())
            .fold(0.0, f64::max)
    }

    /// `sqrt(sum |f_ij|_1^2)`: an upper bound for the sup norm on the closed disk.
    pub fn norm_upper(&self) -> f64 {
        self.entries
            .iter()
            .map(|p| p.norm_l1().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient difference over all entries.
    pub fn max_coeff_diff(&self, other: &CycleElement) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_coeff_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &CycleElement) -> bool {
        self.n == other.n && self.max_coeff_diff(other) <= EPS_COEFF
    }

    /// Commutator `self * x - x * self` without a degree limit.
    pub fn commutator(&self, x: &CycleElement) -> Result<Self> {
        self.mul_bounded(x, usize::MAX)?
            .sub_elem(&x.mul_bounded(self, usize::MAX)?)
    }
}

/// Power of `w` produced when `z^l(i,k)` meets `z^l(k,j)`: zero or one.
pub fn carry(n: usize, i: usize, k: usize, j: usize) -> usize {
    (shift(n, i, k) + shift(n, k, j) - shift(n, i, j)) / n
}

/// The basis element `w^d E_ij` equal to the path of `len` edges leaving vertex `i`.
pub fn path_basis(n: usize, i: usize, len: usize) -> (usize, usize, usize) {
    let j = (i + len) % n;
    (i, j, (len - shift(n, i, j)) / n)
}

/// Reads the `w`-polynomial `f` out of `z^l(i,j) f(z^n)`, positions 0-indexed.
pub fn parse_entry(n: usize, i: usize, j: usize, p: &Poly) -> Result<Poly> {
    let l = shift(n, i, j);
    let mut f = Vec::new();
    for (e, &c) in p.coeffs().iter().enumerate() {
        if c.norm() <= EPS_COEFF {
            continue;
        }
        if e % n != l {
            return Err(Error::NotInAlgebra {
                row: i + 1,
                col: j + 1,
                exponent: e,
                shift: l,
                n,
            });
        }
        let d = (e - l) / n;
        if f.len() <= d {
            f.resize(d + 1, Complex64::new(0.0, 0.0));
        }
        f[d] = c;
    }
    Ok(Poly::new(f))
}

fn check_index(n: usize, i: usize) -> Result<()> {
    if n == 0 || i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    n: usize,
    entries: Vec<Vec<Poly>>,
}

/// Interchange form holding the realized `z`-polynomials.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealizedJson {
    pub n: usize,
    pub realized: Vec<Vec<Poly>>,
}

impl RealizedJson {
    pub fn from_element(a: &CycleElement) -> Self {
        RealizedJson {
            n: a.n,
            realized: a.realize(),
        }
    }

    pub fn to_element(&self) -> Result<CycleElement> {
        if self.realized.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: self.realized.len(),
            });
        }
        CycleElement::parse_realized(&self.realized)
    }
}

impl Serialize for CycleElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n;
        ElementJson {
            n,
            entries: self.entries.chunks(n).map(<[Poly]>::to_vec).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CycleElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ElementJson::deserialize(deserializer)?;
        if raw.entries.len() != raw.n {
            return Err(serde::de::Error::custom(format!(
                "expected {} rows, found {}",
                raw.n,
                raw.entries.len()
            )));
        }
        CycleElement::from_entries(raw.entries).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for CycleElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((i, j), p) in self.entries() {
            if !p.is_zero() {
                writeln!(f, "f[{},{}](w) = {p}", i + 1, j + 1)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_poly(coeffs: &[f64]) -> Poly {
        Poly::from_real(coeffs)
    }

    fn e(n: usize, i: usize) -> CycleElement {
        CycleElement::gen_e(n, i).unwrap()
    }

    fn zg(n: usize, i: usize) -> CycleElement {
        CycleElement::gen_z(n, i).unwrap()
    }

    #[test]
    fn matrix_json_forms() {
        let m = MatC::from_fn(2, |i, j| Complex64::new(i as f64, j as f64));
        let nested = serde_json::to_string(&m).unwrap();
        assert_eq!(nested, "[[[0.0,0.0],[0.0,1.0]],[[1.0,0.0],[1.0,1.0]]]");
        let flat: MatC = serde_json::from_str("[[0,0],[0,1],[1,0],[1,1]]").unwrap();
        assert_eq!(flat, m);
        assert_eq!(serde_json::from_str::<MatC>(&nested).unwrap(), m);
        assert!(serde_json::from_str::<MatC>("[[0,0],[0,1],[1,0]]").is_err());
        assert!(serde_json::from_str::<MatC>("[[[0,0]],[[1,0]]]").is_err());
    }

    #[test]
    fn shift_matches_display() {
        // z at (1,2), z^{n-1} at (2,1), z at (n,1)
        assert_eq!(shift(4, 0, 1), 1);
        assert_eq!(shift(4, 1, 0), 3);
        assert_eq!(shift(4, 3, 0), 1);
        assert_eq!(shift(1, 0, 0), 0);
    }

    #[test]
    fn generators() {
        assert_eq!(
            e(2, 1).realize(),
            vec![vec![z_poly(&[1.0]), Poly::zero()], vec![Poly::zero(), Poly::zero()]]
        );
        assert_eq!(e(1, 1), CycleElement::identity(1));
        let sum = (1..=3).fold(CycleElement::zero(3), |acc, i| acc.add_elem(&e(3, i)).unwrap());
        assert_eq!(sum, CycleElement::identity(3));

        let z = z_poly(&[0.0, 1.0]);
        assert_eq!(zg(2, 1).realize()[0][1], z);
        assert_eq!(zg(2, 2).realize()[1][0], z);
        assert_eq!(zg(1, 1).realize()[0][0], z);

        assert!(matches!(
            CycleElement::gen_e(2, 3),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(CycleElement::gen_z(2, 0).is_err());
    }

    #[test]
    fn products() {
        let p = zg(2, 1).mul_elem(&zg(2, 2)).unwrap();
        assert_eq!(p, CycleElement::basis(2, 0, 0, 1));
        assert_eq!(p.realize()[0][0], z_poly(&[0.0, 0.0, 1.0]));

        assert!(e(3, 1).mul_elem(&e(3, 2)).unwrap().is_zero());

        let cyc = zg(3, 1)
            .mul_elem(&zg(3, 2))
            .unwrap()
            .mul_elem(&zg(3, 3))
            .unwrap();
        assert_eq!(cyc, CycleElement::basis(3, 0, 0, 1));
        assert_eq!(cyc.realize()[0][0], z_poly(&[0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn cycle_relation_up_to_eight() {
        for n in 1..=8 {
            let word: Vec<_> = (0..n).map(Generator::Z).collect();
            assert_eq!(CycleElement::from_word(n, &word), CycleElement::basis(n, 0, 0, 1));
        }
    }

    #[test]
    fn degree_overflow_is_an_error() {
        let a = CycleElement::basis(2, 0, 0, 40);
        let err = a.mul_elem(&a).unwrap_err();
        assert!(matches!(err, Error::DegreeOverflow { degree: 80, .. }));
        assert!(a.mul_bounded(&a, 80).is_ok());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            e(2, 1).add_elem(&e(3, 1)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(e(2, 1).mul_elem(&e(3, 1)).is_err());
    }

    #[test]
    fn linear_ops() {
        let a = zg(3, 2).add_elem(&e(3, 1).scale(Complex64::new(2.0, 1.0))).unwrap();
        assert_eq!(a.add_elem(&CycleElement::zero(3)).unwrap(), a);
        assert_eq!(a.scale(Complex64::new(1.0, 0.0)), a);
        assert!(a.sub_elem(&a).unwrap().is_zero());
    }

    #[test]
    fn realize_substitutes_w() {
        let mut a = CycleElement::zero(2);
        a.set_entry(0, 1, z_poly(&[1.0, 1.0]));
        assert_eq!(a.realize()[0][1], z_poly(&[0.0, 1.0, 0.0, 1.0]));
    }

    #[test]
    fn parse_realized_examples() {
        let one = z_poly(&[1.0]);
        let z = z_poly(&[0.0, 1.0]);
        let id = vec![vec![one.clone(), Poly::zero()], vec![Poly::zero(), one.clone()]];
        assert_eq!(CycleElement::parse_realized(&id).unwrap(), CycleElement::identity(2));

        let edge = vec![vec![Poly::zero(), z], vec![Poly::zero(), Poly::zero()]];
        assert_eq!(CycleElement::parse_realized(&edge).unwrap(), zg(2, 1));

        let bad = vec![vec![Poly::zero(), one], vec![Poly::zero(), Poly::zero()]];
        assert!(matches!(
            CycleElement::parse_realized(&bad),
            Err(Error::NotInAlgebra { row: 1, col: 2, exponent: 0, .. })
        ));
    }

    #[test]
    fn norm_examples() {
        assert!((CycleElement::identity(3).norm(NORM_GRID) - 1.0).abs() < 1e-12);
        assert!((zg(2, 1).norm(NORM_GRID) - 1.0).abs() < 1e-12);
        let s = zg(2, 1).add_elem(&zg(2, 2)).unwrap();
        assert!((s.norm(NORM_GRID) - 1.0).abs() < 1e-12);
        assert_eq!(CycleElement::zero(2).norm(NORM_GRID), 0.0);
    }

    #[test]
    fn norm_matches_dense_svd_oracle() {
        // [[1, z], [z, 1]] has singular values |1 +- z| on the circle; sup = 2 at z = 1.
        let a = CycleElement::identity(2)
            .add_elem(&zg(2, 1))
            .unwrap()
            .add_elem(&zg(2, 2))
            .unwrap();
        assert!((a.norm(NORM_GRID) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let a = zg(3, 2).add_elem(&CycleElement::basis(3, 0, 0, 2)).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.starts_with("{\"n\":3,\"entries\":"));
        let back: CycleElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);

        let r = RealizedJson::from_element(&a);
        assert_eq!(r.to_element().unwrap(), a);
    }

    #[test]
    fn matc_json_is_nested_rows() {
        let m = MatC::unit(2, 0, 1);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[0.0,0.0],[1.0,0.0]],[[0.0,0.0],[0.0,0.0]]]");
        let back: MatC = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<MatC>("[[[0,0]],[[0,0]]]").is_err());
    }

    #[test]
    fn basis_multiplication_shortcuts() {
        let mut rng = crate::sample::rng(8);
        for n in 1..=4 {
            let a = crate::sample::element(&mut rng, n, 3);
            for r in 0..n {
                for c in 0..n {
                    for d in 0..2 {
                        let b = CycleElement::basis(n, r, c, d);
                        assert!(a.mul_basis_left(r, c, d).approx_eq(&b.mul_elem(&a).unwrap()));
                        assert!(a.mul_basis_right(r, c, d).approx_eq(&a.mul_elem(&b).unwrap()));
                    }
                }
            }
            for i in 0..n {
                for len in 1..3 * n {
                    let (r, c, d) = path_basis(n, i, len);
                    let word: Vec<_> = (0..len).map(|t| Generator::Z((i + t) % n)).collect();
                    assert_eq!(CycleElement::from_word(n, &word), CycleElement::basis(n, r, c, d));
                }
            }
        }
    }

    #[test]
    fn monomial_words_multiply_to_basis() {
        for n in 1..=4 {
            for i in 0..n {
                for j in 0..n {
                    for d in 0..3 {
                        let word = monomial_word(n, i, j, d);
                        assert_eq!(
                            CycleElement::from_word(n, &word),
                            CycleElement::basis(n, i, j, d),
                            "n={n} ({i},{j}) d={d}"
                        );
                    }
                }
            }
        }
    }
}
