//! Unimodular lattices, the diagonal action and shortest vectors.
//!
//! A point of the space of unimodular lattices is stored as a basis matrix
//! whose columns generate the lattice. The diagonal group acts on the left:
//! `apply_diag(t, B)` multiplies row `i` by `e^{t_i}`.
//!
//! [`shortest_vector`] is exact for the dimensions used here (`k <= 6`): the
//! basis is LLL-reduced, the shortest reduced column gives an upper bound on
//! the minimum, and every lattice point inside the corresponding Euclidean ball
//! is enumerated.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{LabError, Result};
use crate::matrix::Matrix;

/// Largest dimension supported by the exact enumeration.
pub const MAX_DIM: usize = 6;
/// Bases whose sup-norm condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;
const UNIMODULAR_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-12;

/// Distance from `w` to the nearest integer, `<w>`.
pub fn frac_dist(w: f64) -> Result<f64> {
    if !w.is_finite() {
        return Err(LabError::Domain(format!(
            "frac_dist of non-finite value {w}"
        )));
    }
    Ok((w - w.round()).abs())
}

/// A trace-zero parameter `t`, acting as `diag(e^{t_1}, ..., e^{t_k})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagParam {
    t: Vec<f64>,
}

impl DiagParam {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.len() < 2 {
            return Err(LabError::Domain("diagonal parameter needs k >= 2".into()));
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(LabError::Domain("diagonal parameter is not finite".into()));
        }
        let sum: f64 = t.iter().sum();
        let scale = t.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        if sum.abs() > TRACE_TOL * scale {
            return Err(LabError::Domain(format!("trace {sum:e} is not zero")));
        }
        Ok(DiagParam { t })
    }

    pub fn zero(k: usize) -> Self {
        DiagParam { t: vec![0.0; k] }
    }

    /// The semigroup element `(-r-s, r, s)` used for Littlewood's problem.
    pub fn from_rs(r: f64, s: f64) -> Self {
        DiagParam {
            t: vec![-r - s, r, s],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    pub fn scaled(&self, c: f64) -> Self {
        DiagParam {
            t: self.t.iter().map(|x| x * c).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1.0)
    }

    pub fn add(&self, other: &DiagParam) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(LabError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(DiagParam {
            t: self.t.iter().zip(&other.t).map(|(a, b)| a + b).collect(),
        })
    }

    /// Linear combination `sum_i c_i d_i` of directions of equal dimension.
    pub fn combination(dirs: &[DiagParam], coeffs: &[f64]) -> Result<Self> {
        let k = dirs
            .first()
            .map(|d| d.dim())
            .ok_or_else(|| LabError::Domain("empty list of directions".into()))?;
        let mut t = vec![0.0; k];
        for (d, &c) in dirs.iter().zip(coeffs) {
            if d.dim() != k {
                return Err(LabError::DimensionMismatch {
                    expected: k,
                    got: d.dim(),
                });
            }
            for (ti, di) in t.iter_mut().zip(&d.t) {
                *ti += c * di;
            }
        }
        Ok(DiagParam { t })
    }

    pub fn max_entry(&self) -> f64 {
        self.t.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.t.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::diagonal(&self.t.iter().map(|x| x.exp()).collect::<Vec<_>>())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Sup,
    Euclidean,
}

impl Norm {
    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::Sup => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Norm::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }
}

/// A basis of a unimodular lattice (columns are the generators).
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeBasis {
    basis: Matrix,
    exact: Option<Vec<BigRational>>,
}

impl LatticeBasis {
    /// Floating-mode basis; checks `|det - 1| <= 1e-9` and finiteness.
    pub fn new(basis: Matrix) -> Result<Self> {
        if !basis.is_finite() {
            return Err(LabError::Domain("basis has non-finite entries".into()));
        }
        let k = basis.dim();
        if !(2..=MAX_DIM).contains(&k) {
            return Err(LabError::Domain(format!(
                "dimension {k} outside 2..={MAX_DIM}"
            )));
        }
        let det = basis.det();
        if (det - 1.0).abs() > UNIMODULAR_TOL {
            return Err(LabError::Domain(format!(
                "basis is not unimodular (det = {det})"
            )));
        }
        Ok(LatticeBasis { basis, exact: None })
    }

    /// Exact-mode basis from rational entries given row by row; `det` must be exactly 1.
    pub fn from_exact_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let k = rows.len();
        if !(2..=MAX_DIM).contains(&k) {
            return Err(LabError::Domain(format!(
                "dimension {k} outside 2..={MAX_DIM}"
            )));
        }
        let mut flat = Vec::with_capacity(k * k);
        for r in &rows {
            if r.len() != k {
                return Err(LabError::DimensionMismatch {
                    expected: k,
                    got: r.len(),
                });
            }
            flat.extend(r.iter().cloned());
        }
        if !rational_det(&flat, k).is_one() {
            return Err(LabError::Domain(
                "exact basis must have determinant exactly 1".into(),
            ));
        }
        let approx: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        let basis = Matrix::from_rows(&approx)?;
        if !basis.is_finite() {
            return Err(LabError::Domain("exact entries overflow f64".into()));
        }
        Ok(LatticeBasis {
            basis,
            exact: Some(flat),
        })
    }

    /// Skips the unimodularity check; used for images of valid bases under the group action.
    pub(crate) fn from_matrix_unchecked(basis: Matrix) -> Self {
        LatticeBasis { basis, exact: None }
    }

    pub fn identity(k: usize) -> Self {
        LatticeBasis::from_matrix_unchecked(Matrix::identity(k))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn mode(&self) -> Mode {
        if self.exact.is_some() {
            Mode::Exact
        } else {
            Mode::Float
        }
    }

    /// Exact entries in row-major order, when in exact mode.
    pub fn exact_entries(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    /// `{"k": .., "mode": "exact"|"float", "columns": [[..], ..]}`; exact
    /// entries are written as `"p/q"` strings.
    pub fn to_json(&self) -> Value {
        let k = self.dim();
        let columns: Vec<Value> = match &self.exact {
            Some(e) => (0..k)
                .map(|j| Value::Array((0..k).map(|i| json!(e[i * k + j].to_string())).collect()))
                .collect(),
            None => self.basis.columns().into_iter().map(|c| json!(c)).collect(),
        };
        json!({ "k": k, "mode": self.mode(), "columns": columns })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let file = MatrixFile::from_json(v)?;
        match file.mode {
            Mode::Exact => LatticeBasis::from_exact_rows(file.exact_rows()?),
            Mode::Float => LatticeBasis::new(file.float_matrix()?),
        }
    }
}

/// A square matrix read from JSON: `{"k", "mode", "columns"}` or `{"k", "mode", "rows"}`.
#[derive(Clone, Debug)]
pub struct MatrixFile {
    pub k: usize,
    pub mode: Mode,
    rows: Vec<Vec<Value>>,
}

impl MatrixFile {
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| LabError::Parse("expected a JSON object".into()))?;
        let mode: Mode = match obj.get("mode") {
            Some(m) => serde_json::from_value(m.clone())?,
            None => Mode::Float,
        };
        let grid = |key: &str| -> Result<Option<Vec<Vec<Value>>>> {
            match obj.get(key) {
                None => Ok(None),
                Some(Value::Array(outer)) => outer
                    .iter()
                    .map(|c| {
                        c.as_array().cloned().ok_or_else(|| {
                            LabError::Parse(format!("`{key}` must be nested arrays"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Some),
                Some(_) => Err(LabError::Parse(format!("`{key}` must be an array"))),
            }
        };
        let rows = match (grid("rows")?, grid("columns")?) {
            (Some(r), None) => r,
            (None, Some(c)) => transpose_values(c)?,
            (Some(_), Some(_)) => {
                return Err(LabError::Parse(
                    "give either `rows` or `columns`, not both".into(),
                ))
            }
            (None, None) => return Err(LabError::Parse("missing `columns`".into())),
        };
        let k = rows.len();
        if let Some(declared) = obj.get("k") {
            let declared = declared
                .as_u64()
                .ok_or_else(|| LabError::Parse("`k` must be an integer".into()))?;
            if declared as usize != k {
                return Err(LabError::DimensionMismatch {
                    expected: declared as usize,
                    got: k,
                });
            }
        }
        if rows.iter().any(|r| r.len() != k) {
            return Err(LabError::Parse("matrix is not square".into()));
        }
        Ok(MatrixFile { k, mode, rows })
    }

    pub fn float_matrix(&self) -> Result<Matrix> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(value_to_f64).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(&rows)
    }

    pub fn exact_rows(&self) -> Result<Vec<Vec<BigRational>>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(value_to_rational).collect::<Result<Vec<_>>>())
            .collect()
    }
}

fn transpose_values(cols: Vec<Vec<Value>>) -> Result<Vec<Vec<Value>>> {
    let k = cols.len();
    if cols.iter().any(|c| c.len() != k) {
        return Err(LabError::Parse("matrix is not square".into()));
    }
    Ok((0..k)
        .map(|i| cols.iter().map(|c| c[i].clone()).collect())
        .collect())
}

fn value_to_f64(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| LabError::Parse("bad number".into())),
        Value::String(s) => crate::expr::parse_real(s).map(|r| r.to_f64()),
        _ => Err(LabError::Parse(format!("expected a number, got {v}"))),
    }
}

fn value_to_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => s
            .trim()
            .parse::<BigRational>()
            .map_err(|_| LabError::Parse(format!("`{s}` is not a rational `p/q`"))),
        Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(n.as_i64().unwrap().into())),
        _ => Err(LabError::Parse(format!(
            "exact entries must be \"p/q\" strings, got {v}"
        ))),
    }
}

/// Exact determinant of a row-major `k x k` rational matrix.
pub fn rational_det(entries: &[BigRational], k: usize) -> BigRational {
    let mut a = entries.to_vec();
    let mut det = BigRational::one();
    for c in 0..k {
        let Some(p) = (c..k).find(|&r| !a[r * k + c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            for j in 0..k {
                a.swap(p * k + j, c * k + j);
            }
            det = -det;
        }
        let piv = a[c * k + c].clone();
        det *= &piv;
        for r in c + 1..k {
            if a[r * k + c].is_zero() {
                continue;
            }
            let f = &a[r * k + c] / &piv;
            for j in c..k {
                let d = &f * &a[c * k + j];
                a[r * k + j] -= d;
            }
        }
    }
    det
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn int_rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Left multiplication by `alpha^t`: row `i` is scaled by `e^{t_i}`.
pub fn apply_diag(t: &DiagParam, b: &LatticeBasis) -> Result<LatticeBasis> {
    let k = b.dim();
    if t.dim() != k {
        return Err(LabError::DimensionMismatch {
            expected: k,
            got: t.dim(),
        });
    }
    let mut m = b.basis.clone();
    for (i, ti) in t.as_slice().iter().enumerate() {
        let f = ti.exp();
        for j in 0..k {
            m[(i, j)] *= f;
        }
    }
    Ok(LatticeBasis::from_matrix_unchecked(m))
}

/// A shortest nonzero lattice vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortVectorResult {
    /// Integer coefficients with respect to the input basis.
    pub coefficients: Vec<i64>,
    pub image: Vec<f64>,
    pub norm: f64,
}

/// Exact shortest nonzero vector of the lattice in the chosen norm.
///
/// The returned coefficient vector is normalized so its first nonzero entry
/// is positive.
pub fn shortest_vector(b: &LatticeBasis, norm: Norm) -> Result<ShortVectorResult> {
    let m = &b.basis;
    let k = m.dim();
    if !m.is_finite() {
        return Err(LabError::Numeric("basis has non-finite entries".into()));
    }
    let cond = m.condition();
    if !(cond <= MAX_CONDITION) {
        return Err(LabError::Numeric(format!(
            "condition estimate {cond:e} exceeds {MAX_CONDITION:e}"
        )));
    }

    let mut cols = m.columns();
    let mut transform: Vec<Vec<i64>> = (0..k)
        .map(|j| (0..k).map(|i| i64::from(i == j)).collect())
        .collect();
    lll_reduce(&mut cols, &mut transform)?;

    // Upper bound from the reduced columns, then the Euclidean ball that contains
    // every vector of at most that norm.
    let (best_col, bound) = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (j, norm.of(c)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let mut best = Candidate {
        x: unit_vec(k, best_col),
        image: cols[best_col].clone(),
        norm: bound,
    };

    let (bstar, mu) = gram_schmidt(&cols);
    let ball = |n: f64| -> f64 {
        let r = match norm {
            Norm::Sup => n * (k as f64).sqrt(),
            Norm::Euclidean => n,
        };
        r * r * (1.0 + 1e-9) + 1e-300
    };
    let mut enumerator = Enumerator {
        cols: &cols,
        bstar: &bstar,
        mu: &mu,
        norm,
        radius_sq: ball(bound),
        ball: &ball,
        x: vec![0; k],
        best: &mut best,
        visited: 0,
    };
    enumerator.level(k - 1, 0.0)?;

    let coeffs = apply_transform(&transform, &best.x)?;
    let mut result = ShortVectorResult {
        coefficients: coeffs,
        image: best.image,
        norm: best.norm,
    };
    if let Some(first) = result.coefficients.iter().find(|&&c| c != 0) {
        if *first < 0 {
            result.coefficients.iter_mut().for_each(|c| *c = -*c);
            result.image.iter_mut().for_each(|c| *c = -*c);
        }
    }
    Ok(result)
}

/// `delta(L)`: the sup-norm length of a shortest nonzero vector.
pub fn delta(b: &LatticeBasis) -> Result<f64> {
    Ok(shortest_vector(b, Norm::Sup)?.norm)
}

/// Membership in the Mahler compact set `K_rho = { L : delta(L) >= rho }`.
pub fn mahler_in_k_rho(b: &LatticeBasis, rho: f64) -> Result<bool> {
    if !(rho > 0.0) {
        return Err(LabError::Domain(format!("rho must be positive, got {rho}")));
    }
    Ok(delta(b)? >= rho)
}

struct Candidate {
    x: Vec<i64>,
    image: Vec<f64>,
    norm: f64,
}

struct Enumerator<'a, F: Fn(f64) -> f64> {
    cols: &'a [Vec<f64>],
    bstar: &'a [f64],
    mu: &'a [Vec<f64>],
    norm: Norm,
    radius_sq: f64,
    ball: &'a F,
    x: Vec<i64>,
    best: &'a mut Candidate,
    visited: u64,
}

const ENUM_BUDGET: u64 = 50_000_000;

impl<F: Fn(f64) -> f64> Enumerator<'_, F> {
    fn level(&mut self, i: usize, partial: f64) -> Result<()> {
        let k = self.x.len();
        let center: f64 = -(i + 1..k)
            .map(|j| self.mu[j][i] * self.x[j] as f64)
            .sum::<f64>();
        let room = self.radius_sq - partial;
        if room < 0.0 {
            return Ok(());
        }
        let w = (room / self.bstar[i]).sqrt();
        let lo = (center - w).ceil() as i64;
        let hi = (center + w).floor() as i64;
        for xi in lo..=hi {
            self.visited += 1;
            if self.visited > ENUM_BUDGET {
                return Err(LabError::Numeric("enumeration budget exhausted".into()));
            }
            let d = xi as f64 - center;
            let p = partial + d * d * self.bstar[i];
            if p > self.radius_sq {
                continue;
            }
            self.x[i] = xi;
            if i > 0 {
                self.level(i - 1, p)?;
            } else if self.x.iter().any(|&c| c != 0) {
                let image: Vec<f64> = (0..k)
                    .map(|r| (0..k).map(|j| self.cols[j][r] * self.x[j] as f64).sum())
                    .collect();
                let n = self.norm.of(&image);
                if n < self.best.norm {
                    *self.best = Candidate {
                        x: self.x.clone(),
                        image,
                        norm: n,
                    };
                    self.radius_sq = (self.ball)(n);
                }
            }
        }
        self.x[i] = 0;
        Ok(())
    }
}

fn unit_vec(k: usize, j: usize) -> Vec<i64> {
    (0..k).map(|i| i64::from(i == j)).collect()
}

fn apply_transform(transform: &[Vec<i64>], x: &[i64]) -> Result<Vec<i64>> {
    let k = x.len();
    (0..k)
        .map(|i| {
            let mut acc: i64 = 0;
            for j in 0..k {
                acc = transform[j][i]
                    .checked_mul(x[j])
                    .and_then(|p| acc.checked_add(p))
                    .ok_or_else(|| LabError::Numeric("coefficient overflow".into()))?;
            }
            Ok(acc)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram-Schmidt data: squared lengths `|b*_i|^2` and coefficients `mu[i][j]`.
fn gram_schmidt(cols: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = cols.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut bstar = vec![0.0; k];
    let mut mu = vec![vec![0.0; k]; k];
    for i in 0..k {
        let mut v = cols[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&cols[i], &star[j]) / bstar[j];
            for (vr, sr) in v.iter_mut().zip(&star[j]) {
                *vr -= mu[i][j] * sr;
            }
        }
        bstar[i] = dot(&v, &v);
        star.push(v);
    }
    (bstar, mu)
}

/// LLL reduction (`delta = 0.99`) of the columns, tracking the integer transform.
fn lll_reduce(cols: &mut [Vec<f64>], transform: &mut [Vec<i64>]) -> Result<()> {
    let k = cols.len();
    let mut idx = 1;
    let mut steps = 0u32;
    while idx < k {
        steps += 1;
        if steps > 100_000 {
            return Err(LabError::Numeric("LLL did not converge".into()));
        }
        for j in (0..idx).rev() {
            let (_, mu) = gram_schmidt(cols);
            let q = mu[idx][j].round();
            if q != 0.0 {
                if q.abs() > 1e15 {
                    return Err(LabError::Numeric("size reduction overflow".into()));
                }
                let qi = q as i64;
                let (lo, hi) = cols.split_at_mut(idx);
                for (a, b) in hi[0].iter_mut().zip(&lo[j]) {
                    *a -= q * b;
                }
                let (tlo, thi) = transform.split_at_mut(idx);
                for (a, b) in thi[0].iter_mut().zip(&tlo[j]) {
                    *a = b
                        .checked_mul(qi)
                        .and_then(|p| a.checked_sub(p))
                        .ok_or_else(|| LabError::Numeric("transform overflow".into()))?;
                }
            }
        }
        let (bstar, mu) = gram_schmidt(cols);
        let m = mu[idx][idx - 1];
        if bstar[idx] >= (0.99 - m * m) * bstar[idx - 1] {
            idx += 1;
        } else {
            cols.swap(idx, idx - 1);
            transform.swap(idx, idx - 1);
            idx = (idx - 1).max(1);
        }
    }
    Ok(())
}

/// Brute-force reference: minimum norm over coefficient vectors in `[-box, box]^k`.
///
/// Exponential in `k`; intended for cross-checking [`shortest_vector`].
pub fn brute_force_shortest(b: &LatticeBasis, norm: Norm, bound: i64) -> ShortVectorResult {
    let k = b.dim();
    let m = b.matrix();
    let mut x = vec![-bound; k];
    let mut best = ShortVectorResult {
        coefficients: vec![],
        image: vec![],
        norm: f64::INFINITY,
    };
    loop {
        if x.iter().any(|&c| c != 0) {
            let img = m.mul_int_vec(&x);
            let n = norm.of(&img);
            if n < best.norm {
                best = ShortVectorResult {
                    coefficients: x.clone(),
                    image: img,
                    norm: n,
                };
            }
        }
        let mut i = 0;
        loop {
            if i == k {
                return best;
            }
            x[i] += 1;
            if x[i] <= bound {
                break;
            }
            x[i] = -bound;
            i += 1;
        }
    }
}

/// Largest coefficient a vector of norm at most `radius` can have in basis `b`.
///
/// If this is at most `bound`, the box `[-bound, bound]^k` contains every
/// minimizer and [`brute_force_shortest`] is a valid oracle.
pub fn coefficient_bound(b: &LatticeBasis, norm: Norm, radius: f64) -> Result<f64> {
    let inv = b.matrix().inverse()?;
    let k = b.dim();
    let per_row = |i: usize| -> f64 {
        let row = inv.row(i);
        match norm {
            Norm::Sup => row.iter().map(|x| x.abs()).sum::<f64>(),
            Norm::Euclidean => row.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    };
    Ok((0..k).map(per_row).fold(0.0, f64::max) * radius)
}

/// Exact integer rows (used by tests and JSON fixtures).
pub fn exact_rows_from_ints(rows: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| int_rational(x)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag3(d: [f64; 3]) -> LatticeBasis {
        LatticeBasis::new(Matrix::diagonal(&d)).unwrap()
    }

    #[test]
    fn frac_dist_examples() {
        assert_eq!(frac_dist(0.5).unwrap(), 0.5);
        assert_eq!(frac_dist(3.0).unwrap(), 0.0);
        assert!((frac_dist(2.7).unwrap() - 0.3).abs() < 1e-15);
        assert!(frac_dist(f64::NAN).is_err());
        assert!(frac_dist(f64::INFINITY).is_err());
    }

    #[test]
    fn diag_param_requires_trace_zero() {
        assert!(DiagParam::new(vec![1.0, 1.0, 0.0]).is_err());
        assert!(DiagParam::new(vec![1.0, -1.0, 0.0]).is_ok());
        assert!(DiagParam::new(vec![0.0]).is_err());
    }

    #[test]
    fn apply_diag_examples() {
        let b = LatticeBasis::identity(3);
        let same = apply_diag(&DiagParam::zero(3), &b).unwrap();
        assert_eq!(same.matrix(), b.matrix());

        let t = DiagParam::new(vec![1.0, -1.0, 0.0]).unwrap();
        let img = apply_diag(&t, &b).unwrap();
        let e = std::f64::consts::E;
        let want = Matrix::diagonal(&[e, 1.0 / e, 1.0]);
        assert!(crate::matrix::matrix_metric(img.matrix(), &want).unwrap() < 1e-15);

        assert!(apply_diag(&DiagParam::zero(2), &b).is_err());
    }

    #[test]
    fn shortest_vector_examples() {
        let sv = shortest_vector(&LatticeBasis::identity(3), Norm::Sup).unwrap();
        assert_eq!(sv.norm, 1.0);
        let e = std::f64::consts::E;
        let b = diag3([(-2.0f64).exp(), e, e]);
        let sv = shortest_vector(&b, Norm::Sup).unwrap();
        assert!((sv.norm - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(sv.coefficients, vec![1, 0, 0]);
        let sv = shortest_vector(&b, Norm::Euclidean).unwrap();
        assert!((sv.norm - 0.1353352832366127).abs() < 1e-15);
    }

    #[test]
    fn mahler_examples() {
        let i3 = LatticeBasis::identity(3);
        assert!(mahler_in_k_rho(&i3, 0.5).unwrap());
        assert!(!mahler_in_k_rho(&i3, 1.5).unwrap());
        let e = std::f64::consts::E;
        assert!(!mahler_in_k_rho(&diag3([(-2.0f64).exp(), e, e]), 0.2).unwrap());
        assert!(mahler_in_k_rho(&i3, 0.0).is_err());
    }

    #[test]
    fn rejects_ill_conditioned() {
        let b = LatticeBasis::new(Matrix::diagonal(&[1e-7, 1e7, 1.0])).unwrap();
        assert!(matches!(
            shortest_vector(&b, Norm::Sup),
            Err(LabError::Numeric(_))
        ));
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(LatticeBasis::new(Matrix::diagonal(&[2.0, 1.0, 1.0])).is_err());
        let rows = exact_rows_from_ints(&[vec![2, 0], vec![0, 1]]);
        assert!(LatticeBasis::from_exact_rows(rows).is_err());
    }

    #[test]
    fn json_round_trip_exact() {
        let half = BigRational::new(1.into(), 2.into());
        let rows = vec![
            vec![int_rational(1), int_rational(0), int_rational(0)],
            vec![half.clone(), int_rational(1), int_rational(0)],
            vec![-half, int_rational(0), int_rational(1)],
        ];
        let b = LatticeBasis::from_exact_rows(rows).unwrap();
        let v = b.to_json();
        assert_eq!(v["mode"], "exact");
        assert_eq!(v["columns"][0][1], "1/2");
        let back = LatticeBasis::from_json(&v).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn json_float_and_errors() {
        let v = json!({"k": 2, "mode": "float", "columns": [[1.0, 0.0], [0.5, 1.0]]});
        let b = LatticeBasis::from_json(&v).unwrap();
        assert_eq!(b.matrix()[(0, 1)], 0.5);
        let bad = json!({"k": 3, "mode": "float", "columns": [[1.0, 0.0], [0.5, 1.0]]});
        assert!(LatticeBasis::from_json(&bad).is_err());
        let bad = json!({"k": 2, "mode": "exact", "columns": [[1.5, 0], [0, 1]]});
        assert!(LatticeBasis::from_json(&bad).is_err());
    }

    fn random_basis(seed: [f64; 9]) -> Option<LatticeBasis> {
        let mut m = Matrix::from_rows(&[
            seed[0..3].to_vec(),
            seed[3..6].to_vec(),
            seed[6..9].to_vec(),
        ])
        .ok()?;
        let det = m.det();
        if det.abs() < 0.05 {
            return None;
        }
        if det < 0.0 {
            for j in 0..3 {
                m[(0, j)] = -m[(0, j)];
            }
        }
        let s = m.det().cbrt();
        LatticeBasis::new(m.scale(1.0 / s)).ok()
    }

    proptest! {
        #[test]
        fn frac_dist_symmetries(w in -1e6f64..1e6) {
            let a = frac_dist(w).unwrap();
            prop_assert!((0.0..=0.5).contains(&a));
            prop_assert!((a - frac_dist(w + 1.0).unwrap()).abs() < 1e-9);
            prop_assert_eq!(a, frac_dist(-w).unwrap());
        }

        #[test]
        fn diag_group_law_and_det(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0) {
            let t = DiagParam::new(vec![a, b, -a - b]).unwrap();
            let s = DiagParam::new(vec![c, d, -c - d]).unwrap();
            let basis = LatticeBasis::new(Matrix::from_rows(&[
                vec![1.0, 0.3, 0.0], vec![0.2, 1.06, 0.0], vec![0.0, 0.5, 1.0],
            ]).unwrap()).unwrap();
            let two = apply_diag(&t, &apply_diag(&s, &basis).unwrap()).unwrap();
            let one = apply_diag(&t.add(&s).unwrap(), &basis).unwrap();
            let scale = one.matrix().sup_norm();
            prop_assert!(crate::matrix::matrix_metric(two.matrix(), one.matrix()).unwrap() <= 1e-12 * scale.max(1.0));
            prop_assert!((one.matrix().det() - basis.matrix().det()).abs() < 1e-9);
        }

        #[test]
        fn delta_scaling_bounds(entries in proptest::array::uniform9(-1.0f64..1.0), a in -1.5f64..1.5, b in -1.5f64..1.5) {
            if let Some(basis) = random_basis(entries) {
                let t = DiagParam::new(vec![a, b, -a - b]).unwrap();
                let d0 = delta(&basis).unwrap();
                let d1 = delta(&apply_diag(&t, &basis).unwrap()).unwrap();
                prop_assert!(d1 <= t.max_entry().exp() * d0 * (1.0 + 1e-12));
                prop_assert!(d1 >= t.min_entry().exp() * d0 * (1.0 - 1e-12));
            }
        }

        #[test]
        fn mahler_monotone(entries in proptest::array::uniform9(-1.0f64..1.0), r1 in 0.01f64..2.0, r2 in 0.01f64..2.0) {
            if let Some(basis) = random_basis(entries) {
                let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
                if mahler_in_k_rho(&basis, hi).unwrap() {
                    prop_assert!(mahler_in_k_rho(&basis, lo).unwrap());
                }
            }
        }

        #[test]
        fn short_vector_result_is_consistent(entries in proptest::array::uniform9(-1.0f64..1.0)) {
            if let Some(basis) = random_basis(entries) {
                for norm in [Norm::Sup, Norm::Euclidean] {
                    let sv = shortest_vector(&basis, norm).unwrap();
                    let img = basis.matrix().mul_int_vec(&sv.coefficients);
                    for (x, y) in img.iter().zip(&sv.image) {
                        prop_assert!((x - y).abs() < 1e-9);
                    }
                    prop_assert!((norm.of(&img) - sv.norm).abs() < 1e-9);
                    let bound = coefficient_bound(&basis, norm, sv.norm).unwrap();
                    if bound <= 6.0 {
                        let bf = brute_force_shortest(&basis, norm, 6);
                        prop_assert!((bf.norm - sv.norm).abs() < 1e-9, "bf {} sv {}", bf.norm, sv.norm);
                    }
                }
            }
        }
    }
}
