//! Littlewood products and excursions of the lattice `tau(u, v)`.
//!
//! For a pair `(u, v)` let `tau(u, v)` be the lattice generated by
//! `(1, u, v)`, `(0, 1, 0)` and `(0, 0, 1)`, and let
//! `a(r, s) = diag(e^{-r-s}, e^r, e^s)` with `r, s >= 0`. A lattice vector of
//! `a(r, s) tau(u, v)` has the form
//!
//! ```text
//! (n e^{-r-s},  e^r (n u + m1),  e^s (n v + m2))
//! ```
//!
//! whose coordinate product is `n (n u + m1)(n v + m2)`. So a short vector
//! along the orbit gives a small Littlewood product ([`orbit_to_witness`]), and
//! conversely a small product with both factors small can be turned into an
//! orbit point where the lattice has a short vector ([`witness_to_orbit`]).
//! [`dirichlet_fix`] handles witnesses where only one factor is small.
//!
//! With the sup-norm the constant relating the two sides is 1 in both
//! directions; see [`BRIDGE_CONSTANT`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::error::{LabError, Result};
use crate::expr::{parse_real, RealValue};
use crate::flow::ConeGrid;
use crate::lattice::{
    apply_diag, delta, int_rational, shortest_vector, DiagParam, LatticeBasis, Norm, MAX_CONDITION,
};
use crate::matrix::Matrix;

/// The constant `c` in `|n (nu+m1)(nv+m2)| < c eps^3` and `delta < c eps` for the sup-norm.
pub const BRIDGE_CONSTANT: f64 = 1.0;

/// Default cap on `r` (or `s`) when a factor of the witness vanishes.
pub const DEFAULT_R_MAX: f64 = 40.0;

#[derive(Clone, Debug, PartialEq)]
pub struct TargetPair {
    pub u: RealValue,
    pub v: RealValue,
}

impl TargetPair {
    pub fn new(u: RealValue, v: RealValue) -> Self {
        TargetPair { u, v }
    }

    pub fn from_f64(u: f64, v: f64) -> Self {
        TargetPair {
            u: RealValue::from_f64(u),
            v: RealValue::from_f64(v),
        }
    }

    /// Parse both coordinates from expressions such as `cbrt(2)` or `1/3`.
    pub fn parse(u: &str, v: &str) -> Result<Self> {
        Ok(TargetPair {
            u: parse_real(u)?,
            v: parse_real(v)?,
        })
    }

    pub fn swapped(&self) -> Self {
        TargetPair {
            u: self.v.clone(),
            v: self.u.clone(),
        }
    }
}

/// `tau(u, v)`: first column `(1, u, v)`, then `e_2`, `e_3`. Exact mode when
/// both coordinates are rational.
pub fn tau(pair: &TargetPair) -> LatticeBasis {
    if let (Some(u), Some(v)) = (&pair.u.exact, &pair.v.exact) {
        let z = BigRational::zero;
        let o = BigRational::one;
        let rows = vec![
            vec![o(), z(), z()],
            vec![u.clone(), o(), z()],
            vec![v.clone(), z(), o()],
        ];
        if let Ok(b) = LatticeBasis::from_exact_rows(rows) {
            return b;
        }
    }
    let m = Matrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![pair.u.to_f64(), 1.0, 0.0],
        vec![pair.v.to_f64(), 0.0, 1.0],
    ])
    .expect("3x3");
    LatticeBasis::from_matrix_unchecked(m)
}

/// A scanned coordinate: exact rationals are handled with integer arithmetic so
/// that `<n p/q>` is exactly zero when `q | n p`.
#[derive(Clone, Copy, Debug)]
enum Coord {
    Rational { p: i128, q: i128 },
    Real(DoubleDouble),
}

impl Coord {
    fn of(v: &RealValue) -> Self {
        if let Some(r) = &v.exact {
            if let (Some(p), Some(q)) = (r.numer().to_i64(), r.denom().to_i64()) {
                return Coord::Rational {
                    p: p as i128,
                    q: q as i128,
                };
            }
        }
        Coord::Real(v.approx)
    }

    #[inline]
    fn frac_dist_mul(&self, n: u64) -> f64 {
        match *self {
            Coord::Rational { p, q } => {
                let r = ((n as i128) * p).rem_euclid(q);
                (r.min(q - r)) as f64 / q as f64
            }
            Coord::Real(x) => x.frac_dist_mul(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub n: u64,
    pub du: f64,
    pub dv: f64,
    pub product: f64,
    pub is_record: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LittlewoodScan {
    pub min_product: f64,
    pub argmin: u64,
    /// Running-minimum records, increasing in `n` and strictly decreasing in product.
    pub records: Vec<ScanRecord>,
}

impl LittlewoodScan {
    /// CSV with header `n,du,dv,product,is_record`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,du,dv,product,is_record\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n, r.du, r.dv, r.product, r.is_record
            ));
        }
        out
    }
}

/// Upper limit on `n` for the Littlewood scans.
pub const MAX_SCAN_N: u64 = 1_000_000_000;
const CHUNK: u64 = 1 << 16;

fn chunk_records(
    lo: u64,
    hi: u64,
    f: &(impl Fn(u64) -> (f64, f64, f64) + Sync),
) -> Vec<ScanRecord> {
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for n in lo..hi {
        let (du, dv, p) = f(n);
        if p < best {
            best = p;
            out.push(ScanRecord {
                n,
                du,
                dv,
                product: p,
                is_record: true,
            });
            if p == 0.0 {
                break;
            }
        }
    }
    out
}

fn scan_records(n_max: u64, f: impl Fn(u64) -> (f64, f64, f64) + Sync) -> Result<LittlewoodScan> {
    if n_max == 0 {
        return Err(LabError::Contract("scan needs N >= 1".into()));
    }
    if n_max > MAX_SCAN_N {
        return Err(LabError::Budget(format!(
            "N = {n_max} exceeds {MAX_SCAN_N}"
        )));
    }
    let mut records: Vec<ScanRecord> = Vec::new();
    let mut best = f64::INFINITY;
    // Process in batches of chunks; stop once an exact zero has been seen.
    let batch = CHUNK * 64;
    let mut start = 1;
    while start <= n_max && best > 0.0 {
        let end = (start + batch).min(n_max + 1);
        let chunks: Vec<(u64, u64)> = (start..end)
            .step_by(CHUNK as usize)
            .map(|lo| (lo, (lo + CHUNK).min(end)))
            .collect();
        let local: Vec<Vec<ScanRecord>> = chunks
            .par_iter()
            .map(|&(lo, hi)| chunk_records(lo, hi, &f))
            .collect();
        for rec in local.into_iter().flatten() {
            if rec.product < best {
                best = rec.product;
                records.push(rec);
            }
        }
        start = end;
    }
    let last = records.last().expect("N >= 1 gives at least one record");
    Ok(LittlewoodScan {
        min_product: last.product,
        argmin: last.n,
        records,
    })
}

/// `min_{1 <= n <= N} n <nu> <nv>` with its running-minimum records.
pub fn littlewood_scan(pair: &TargetPair, n_max: u64) -> Result<LittlewoodScan> {
    let (u, v) = (Coord::of(&pair.u), Coord::of(&pair.v));
    scan_records(n_max, move |n| {
        let du = u.frac_dist_mul(n);
        let dv = v.frac_dist_mul(n);
        (du, dv, n as f64 * (du * dv))
    })
}

/// One-dimensional variant: `min_{1 <= n <= N} n <nu>`. `dv` is reported as 1.
pub fn one_dim_scan(u: &RealValue, n_max: u64) -> Result<LittlewoodScan> {
    let u = Coord::of(u);
    scan_records(n_max, move |n| {
        let du = u.frac_dist_mul(n);
        (du, 1.0, n as f64 * du)
    })
}

/// `n <nu>` for a single `n`.
pub fn one_dim_product(u: &RealValue, n: u64) -> f64 {
    n as f64 * Coord::of(u).frac_dist_mul(n)
}

/// Integer solution `(n, m1, m2)` of a small Littlewood product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub n: i64,
    pub m1: i64,
    pub m2: i64,
    pub product: f64,
}

impl Witness {
    /// Builds the witness and evaluates `|n (nu + m1)(nv + m2)|` in extended precision.
    pub fn new(pair: &TargetPair, n: i64, m1: i64, m2: i64) -> Self {
        let (a, b) = factors(pair, n, m1, m2);
        let product = (n as f64 * a * b).abs();
        Witness { n, m1, m2, product }
    }

    /// `(n u + m1, n v + m2)`.
    pub fn factors(&self, pair: &TargetPair) -> (f64, f64) {
        factors(pair, self.n, self.m1, self.m2)
    }

    pub fn is_nice(&self, pair: &TargetPair, eps: f64) -> bool {
        let (a, b) = self.factors(pair);
        a.abs().max(b.abs()) < eps
    }
}

fn linear_factor(x: &RealValue, n: i64, m: i64) -> f64 {
    if let Some(r) = &x.exact {
        let val = r * int_rational(n) + int_rational(m);
        return val.to_f64().unwrap_or(f64::NAN);
    }
    (x.approx * DoubleDouble::from_f64(n as f64) + DoubleDouble::from_f64(m as f64)).to_f64()
}

fn factors(pair: &TargetPair, n: i64, m1: i64, m2: i64) -> (f64, f64) {
    (linear_factor(&pair.u, n, m1), linear_factor(&pair.v, n, m2))
}

/// The short vector of `a(r, s) tau(u, v)` as a Littlewood witness, if its sup-norm is below `eps`.
///
/// All three coordinates of the vector are below `eps`, so the product is below `eps^3`.
pub fn orbit_to_witness(pair: &TargetPair, r: f64, s: f64, eps: f64) -> Result<Option<Witness>> {
    if !(r >= 0.0 && s >= 0.0) {
        return Err(LabError::Contract(format!(
            "(r, s) = ({r}, {s}) is outside the quadrant"
        )));
    }
    let basis = apply_diag(&DiagParam::from_rs(r, s), &tau(pair))?;
    let sv = shortest_vector(&basis, Norm::Sup)?;
    if sv.norm >= eps {
        return Ok(None);
    }
    let (n, m1, m2) = (sv.coefficients[0], sv.coefficients[1], sv.coefficients[2]);
    if n == 0 {
        return Err(LabError::Contract(format!(
            "short vector has n = 0 (eps = {eps} is too large for the lower coordinates)"
        )));
    }
    let (n, m1, m2) = if n < 0 { (-n, -m1, -m2) } else { (n, m1, m2) };
    Ok(Some(Witness::new(pair, n, m1, m2)))
}

/// Convergent denominators of the continued fraction of `x` in `[0, 1)`, up to `limit`.
fn convergent_denominators(x: DoubleDouble, limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut q_prev, mut q) = (0u64, 1u64);
    let mut frac = x - x.round();
    if frac.hi < 0.0 {
        frac = frac + DoubleDouble::ONE;
    }
    out.push(1);
    for _ in 0..64 {
        if frac.hi.abs() < 1e-30 {
            break;
        }
        let inv = DoubleDouble::ONE / frac;
        let a = inv.hi.floor();
        if !(1.0..1e15).contains(&a) {
            break;
        }
        frac = inv - DoubleDouble::from_f64(a);
        if frac.hi < 0.0 {
            break;
        }
        let next = match (a as u64)
            .checked_mul(q)
            .and_then(|x| x.checked_add(q_prev))
        {
            Some(v) => v,
            None => break,
        };
        if next > limit {
            break;
        }
        q_prev = q;
        q = next;
        out.push(q);
    }
    out
}

/// Replace `(n, m1, m2)` by `(q n, q m1, m2')` so both factors drop below `eps`.
///
/// If `|n v + m2| >= eps` then `|n (n u + m1)| < eps^4`, and Dirichlet gives
/// `q < 1/eps` with `<q n v> < eps`; the product then stays below `eps^3`.
/// The roles of `u` and `v` swap when the other factor is large.
pub fn dirichlet_fix(pair: &TargetPair, w: &Witness, eps: f64) -> Result<Witness> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::Contract(format!(
            "eps = {eps} must lie in (0, 1)"
        )));
    }
    if w.n <= 0 {
        return Err(LabError::Contract("witness needs n > 0".into()));
    }
    if !(w.product < eps.powi(5)) {
        return Err(LabError::Contract(format!(
            "witness product {:e} is not below eps^5 = {:e}",
            w.product,
            eps.powi(5)
        )));
    }
    if w.is_nice(pair, eps) {
        return Ok(w.clone());
    }
    let (a, b) = w.factors(pair);
    // Fix the coordinate whose factor is large.
    let fix_v = b.abs() >= eps;
    let large_coord = if fix_v { &pair.v } else { &pair.u };
    let small = if fix_v { a } else { b };
    if !((w.n as f64 * small).abs() < eps.powi(4)) {
        return Err(LabError::Contract("both factors are large".into()));
    }

    let q_limit = {
        let l = (1.0 / eps).ceil() as u64;
        if (l as f64) < 1.0 / eps {
            l
        } else {
            l - 1
        }
    };
    let target = large_coord.approx * DoubleDouble::from_f64(w.n as f64);
    let large = Coord::of(large_coord);
    let good = |q: u64| large.frac_dist_mul(q * w.n as u64) < eps;
    let q = convergent_denominators(target, q_limit)
        .into_iter()
        .find(|&q| q >= 1 && q <= q_limit && good(q))
        .or_else(|| (1..=q_limit).find(|&q| good(q)))
        .ok_or_else(|| LabError::Numeric("no Dirichlet multiplier found below 1/eps".into()))?;

    let qn = q as i64 * w.n;
    let nearest = |x: &RealValue| -> i64 {
        match &x.exact {
            Some(r) => {
                let v = r * int_rational(qn);
                -(v.round().to_integer().to_i64().unwrap_or(0))
            }
            None => {
                -((x.approx * DoubleDouble::from_f64(qn as f64))
                    .round()
                    .to_f64() as i64)
            }
        }
    };
    let m_small = if fix_v { w.m1 } else { w.m2 };
    let new_small = q as i64 * m_small;
    let new_large = nearest(large_coord);
    let fixed = if fix_v {
        Witness::new(pair, qn, new_small, new_large)
    } else {
        Witness::new(pair, qn, new_large, new_small)
    };
    if !(fixed.is_nice(pair, eps) && fixed.product < eps.powi(3)) {
        return Err(LabError::Numeric(format!(
            "Dirichlet step failed to produce a nice witness (q = {q}, product = {:e})",
            fixed.product
        )));
    }
    Ok(fixed)
}

/// An orbit point `(r, s)` where `a(r, s) tau(u, v)` has a vector shorter than `eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub r: f64,
    pub s: f64,
    /// Sup-norm of the witness vector at `(r, s)`; an upper bound for `delta`.
    pub delta_bound: f64,
    /// `delta` from the exact enumeration, when the basis is well enough conditioned.
    pub delta: Option<f64>,
    /// Constant `c` in `delta < c eps`.
    pub constant: f64,
}

/// Choose `(r, s)` from a nice witness and verify the excursion below `eps`.
///
/// Each nonzero factor gets `e^r |n u + m1| = eps e^{-eta}` (likewise for `s`),
/// with a common slack `eta > 0` chosen so that the first coordinate
/// `n e^{-r-s}` is also below `eps`. A vanishing factor is given `r_max`.
pub fn witness_to_orbit(
    pair: &TargetPair,
    w: &Witness,
    eps: f64,
    r_max: f64,
) -> Result<OrbitPoint> {
    let (a, b) = w.factors(pair);
    if !(a.abs().max(b.abs()) < eps) || !(w.product < eps.powi(3)) || w.n <= 0 {
        return Err(LabError::Contract(format!(
            "witness is not nice: factors ({a:e}, {b:e}), product {:e}",
            w.product
        )));
    }
    let cap = |f: f64| {
        if f == 0.0 {
            None
        } else {
            Some((eps / f.abs()).ln())
        }
    };
    let (ra, sa) = (cap(a), cap(b));
    let r_hi = ra.unwrap_or(r_max);
    let s_hi = sa.unwrap_or(r_max);
    let need = (w.n as f64 / eps).ln();
    let surplus = r_hi + s_hi - need;
    if !(surplus > 0.0) {
        return Err(LabError::Contract(format!(
            "r_max = {r_max} is too small to shrink the first coordinate"
        )));
    }
    let free = ra.is_some() as u32 + sa.is_some() as u32;
    let mut eta = surplus / (free as f64 + 1.0);
    if let Some(x) = ra {
        eta = eta.min(x / 2.0);
    }
    if let Some(x) = sa {
        eta = eta.min(x / 2.0);
    }
    let r = if ra.is_some() { r_hi - eta } else { r_hi };
    let s = if sa.is_some() { s_hi - eta } else { s_hi };

    let image = [w.n as f64 * (-r - s).exp(), r.exp() * a, s.exp() * b];
    let delta_bound = Norm::Sup.of(&image);
    let basis = apply_diag(&DiagParam::from_rs(r, s), &tau(pair))?;
    let delta = if basis.matrix().condition() <= MAX_CONDITION {
        Some(shortest_vector(&basis, Norm::Sup)?.norm)
    } else {
        None
    };
    let reached = delta.unwrap_or(delta_bound);
    if !(reached < BRIDGE_CONSTANT * eps) || delta_bound >= BRIDGE_CONSTANT * eps {
        return Err(LabError::Numeric(format!(
            "orbit point (r, s) = ({r}, {s}) has delta {reached:e}, not below {eps}"
        )));
    }
    Ok(OrbitPoint {
        r,
        s,
        delta_bound,
        delta,
        constant: BRIDGE_CONSTANT,
    })
}

/// Value of the continued fraction `[0; a_1, a_2, ...]`.
pub fn continued_fraction_value(quotients: &[u64]) -> f64 {
    let mut x = DoubleDouble::ZERO;
    for &a in quotients.iter().rev() {
        x = DoubleDouble::ONE / (DoubleDouble::from_f64(a as f64) + x);
    }
    x.to_f64()
}

/// Exact value of `[0; a_1, ..., a_n]` as a rational.
pub fn continued_fraction_rational(quotients: &[u64]) -> BigRational {
    let mut x = BigRational::zero();
    for &a in quotients.iter().rev() {
        x = (BigRational::from_integer(BigInt::from(a)) + x).recip();
    }
    x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadApprox {
    pub quotients: Vec<u64>,
    pub value: f64,
}

impl BadApprox {
    pub fn real_value(&self) -> RealValue {
        RealValue::from_rational(continued_fraction_rational(&self.quotients))
    }
}

/// A number with bounded partial quotients drawn (seeded) from `[1, bound]`.
pub fn bad_approx_generate(bound: u64, length: usize, seed: u64) -> Result<BadApprox> {
    if bound == 0 {
        return Err(LabError::Contract(
            "partial quotient bound must be >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quotients: Vec<u64> = (0..length).map(|_| rng.gen_range(1..=bound)).collect();
    let value = continued_fraction_value(&quotients);
    Ok(BadApprox { quotients, value })
}

/// Fibonacci numbers `1, 2, 3, 5, 8, ...` up to `limit`.
pub fn fibonacci_up_to(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut a, mut b) = (1u64, 2u64);
    while a <= limit {
        out.push(a);
        let c = a + b;
        a = b;
        b = c;
    }
    out
}

/// One orbit point of a round trip where the lattice came within `eps` of zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub r: f64,
    pub s: f64,
    pub delta: f64,
    pub witness: Witness,
    /// `product < eps^3`, evaluated directly from the witness.
    pub product_ok: bool,
}

/// A witness with product below `eps^5` sent back to the orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Return {
    pub witness: Witness,
    pub fixed: Witness,
    pub orbit: OrbitPoint,
    /// `delta` at the returned orbit point, or the certified bound when the
    /// basis is too ill-conditioned to enumerate.
    pub delta: f64,
    pub delta_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub eps: f64,
    pub grid_points: usize,
    pub excursions: Vec<Excursion>,
    pub returns: Vec<Return>,
    pub violations_to_witness: usize,
    pub violations_to_orbit: usize,
}

/// Both directions of the bridge on one pair.
///
/// Every point `(r, s)` of `grid` (over the Littlewood quadrant) with
/// `delta < eps` is turned into a witness and its product checked against
/// `eps^3`. Every distinct witness with product below `eps^5` is then passed
/// through [`dirichlet_fix`] and [`witness_to_orbit`], and `delta` at the
/// resulting point is checked against `eps`.
pub fn roundtrip(pair: &TargetPair, eps: f64, grid: &ConeGrid, r_max: f64) -> Result<RoundTrip> {
    if grid.extents.len() != 2 {
        return Err(LabError::DimensionMismatch {
            expected: 2,
            got: grid.extents.len(),
        });
    }
    let base = tau(pair);
    let hits: Vec<Option<Excursion>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let p = grid.point(idx);
            let (r, s) = (p[0], p[1]);
            let d = delta(&apply_diag(&DiagParam::from_rs(r, s), &base)?)?;
            if d >= eps {
                return Ok(None);
            }
            let w = orbit_to_witness(pair, r, s, eps)?.ok_or_else(|| {
                LabError::Numeric(format!("delta {d} < eps but no witness at ({r}, {s})"))
            })?;
            let product_ok = w.product < BRIDGE_CONSTANT * eps.powi(3);
            Ok(Some(Excursion {
                r,
                s,
                delta: d,
                witness: w,
                product_ok,
            }))
        })
        .collect::<Result<_>>()?;
    let excursions: Vec<Excursion> = hits.into_iter().flatten().collect();
    let mut seen = std::collections::BTreeSet::new();
    let deep: Vec<Witness> = excursions
        .iter()
        .filter(|e| e.witness.product < eps.powi(5))
        .filter(|e| seen.insert((e.witness.n, e.witness.m1, e.witness.m2)))
        .map(|e| e.witness.clone())
        .collect();
    let returns = deep
        .into_iter()
        .map(|w| {
            let fixed = dirichlet_fix(pair, &w, eps)?;
            let orbit = witness_to_orbit(pair, &fixed, eps, r_max)?;
            let d = orbit.delta.unwrap_or(orbit.delta_bound);
            Ok(Return {
                witness: w,
                fixed,
                delta: d,
                delta_ok: d < BRIDGE_CONSTANT * eps,
                orbit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RoundTrip {
        eps,
        grid_points: grid.len(),
        violations_to_witness: excursions.iter().filter(|e| !e.product_ok).count(),
        violations_to_orbit: returns.iter().filter(|r| !r.delta_ok).count(),
        excursions,
        returns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::brute_force_shortest;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    fn rat(p: i64, q: i64) -> RealValue {
        RealValue::from_rational(BigRational::new(p.into(), q.into()))
    }

    #[test]
    fn tau_examples() {
        let t = tau(&TargetPair::from_f64(0.0, 0.0));
        assert_eq!(t.matrix(), &Matrix::identity(3));
        let t = tau(&TargetPair::from_f64(0.25, -0.75));
        assert_eq!(t.matrix().column(0), vec![1.0, 0.25, -0.75]);
        assert_eq!(t.matrix().det(), 1.0);
        let p = TargetPair::new(rat(1, 3), rat(2, 7));
        assert_eq!(tau(&p).mode(), crate::lattice::Mode::Exact);
    }

    #[test]
    fn tau_has_unit_minimum() {
        // Any vector with n != 0 has first coordinate |n| >= 1; with n = 0 it is integral.
        let t = tau(&TargetPair::from_f64(0.5, 0.0));
        let sv = shortest_vector(&t, Norm::Sup).unwrap();
        let bf = brute_force_shortest(&t, Norm::Sup, 4);
        assert_eq!(bf.norm, 1.0);
        assert_eq!(sv.norm, 1.0);
    }

    #[test]
    fn scan_examples() {
        let s = littlewood_scan(&TargetPair::from_f64(0.0, 0.0), 10).unwrap();
        assert_eq!((s.min_product, s.argmin), (0.0, 1));
        let third = TargetPair::new(rat(1, 3), rat(1, 3));
        let s = littlewood_scan(&third, 100).unwrap();
        assert_eq!((s.min_product, s.argmin), (0.0, 3));
        assert!(littlewood_scan(&third, 0).is_err());
        assert!(littlewood_scan(&third, MAX_SCAN_N + 1).is_err());
    }

    #[test]
    fn golden_ratio_one_dim() {
        let phi = parse_real("(1+sqrt(5))/2").unwrap();
        let fib = fibonacci_up_to(100_000);
        let target = 1.0 / 5f64.sqrt();
        let last = *fib.last().unwrap();
        assert!((one_dim_product(&phi, last) - target).abs() < 1e-6);
        // n <n phi> on Fibonacci n alternates around 1/sqrt(5) with shrinking gap.
        let gaps: Vec<f64> = fib
            .iter()
            .map(|&n| (one_dim_product(&phi, n) - target).abs())
            .collect();
        assert!(gaps.windows(2).skip(2).all(|w| w[1] < w[0]));
        // The Fibonacci values are the records of the full scan beyond the first few n.
        let scan = one_dim_scan(&phi, 100_000).unwrap();
        assert!(scan.records.iter().all(|r| fib.contains(&r.n)));
    }

    #[test]
    fn continued_fraction_examples() {
        assert_eq!(continued_fraction_value(&[2]), 0.5);
        let ones = vec![1u64; 60];
        assert!((continued_fraction_value(&ones) - 0.6180339887498949).abs() < 1e-15);
        let g = bad_approx_generate(1, 40, 9).unwrap();
        assert!(g.quotients.iter().all(|&a| a == 1));
        assert!(bad_approx_generate(0, 10, 0).is_err());
        let a = bad_approx_generate(3, 30, 5).unwrap();
        assert_eq!(a, bad_approx_generate(3, 30, 5).unwrap());
        assert!(a.quotients.iter().all(|&q| (1..=3).contains(&q)));
    }

    #[test]
    fn bad_approx_scan_stays_away_from_zero() {
        for seed in 0..5 {
            let u = bad_approx_generate(3, 40, seed).unwrap();
            let s = one_dim_scan(&u.real_value(), 10_000).unwrap();
            assert!(s.min_product > 0.05, "seed {seed}: {}", s.min_product);
        }
    }

    #[test]
    fn witness_examples() {
        let zero = TargetPair::from_f64(0.0, 0.0);
        let w = orbit_to_witness(&zero, 1.0, 1.0, 0.2).unwrap().unwrap();
        assert_eq!((w.n, w.m1, w.m2, w.product), (1, 0, 0, 0.0));
        assert!(orbit_to_witness(&zero, 0.0, 0.0, 0.2).unwrap().is_none());

        let p = witness_to_orbit(&zero, &w, 0.2, DEFAULT_R_MAX).unwrap();
        assert_eq!((p.r, p.s), (DEFAULT_R_MAX, DEFAULT_R_MAX));
        assert_eq!(p.delta_bound, (-2.0 * DEFAULT_R_MAX).exp());

        let third = TargetPair::new(rat(1, 3), rat(1, 3));
        let w = Witness::new(&third, 3, -1, -1);
        assert_eq!(w.product, 0.0);
        let p = witness_to_orbit(&third, &w, 0.1, DEFAULT_R_MAX).unwrap();
        assert_eq!((p.r, p.s), (DEFAULT_R_MAX, DEFAULT_R_MAX));
        assert!(p.delta_bound < 1e-30);
    }

    #[test]
    fn witness_to_orbit_rejects_bad_witness() {
        let pair = TargetPair::from_f64(0.3, 0.7);
        let w = Witness::new(&pair, 1, 0, -1);
        assert!(matches!(
            witness_to_orbit(&pair, &w, 0.1, 40.0),
            Err(LabError::Contract(_))
        ));
    }

    #[test]
    fn dirichlet_keeps_nice_witness() {
        let third = TargetPair::new(rat(1, 3), rat(1, 3));
        let w = Witness::new(&third, 3, -1, -1);
        assert_eq!(dirichlet_fix(&third, &w, 0.1).unwrap(), w);
        let bad = Witness {
            n: 1,
            m1: 0,
            m2: 0,
            product: 1.0,
        };
        assert!(dirichlet_fix(&third, &bad, 0.1).is_err());
    }

    /// Pairs where `n <nu>` is tiny but `<nv>` is not.
    fn constructed(eps: f64, n: i64, tiny: f64, v: f64) -> (TargetPair, Witness) {
        let u = (3.0 + tiny / n as f64) / n as f64;
        let pair = TargetPair::from_f64(u, v);
        let m2 = -(n as f64 * v).round() as i64;
        let w = Witness::new(&pair, n, -3, m2);
        assert!(w.product < eps.powi(5));
        (pair, w)
    }

    #[test]
    fn dirichlet_constructed_cases() {
        let eps = 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..50);
            let v: f64 = rng.gen_range(0.0..1.0);
            let tiny = rng.gen_range(-1e-7..1e-7);
            let (pair, w) = constructed(eps, n, tiny, v);
            let (_, b) = w.factors(&pair);
            if b.abs() < eps {
                continue;
            }
            let fixed = dirichlet_fix(&pair, &w, eps).unwrap();
            let q = fixed.n / w.n;
            assert_eq!(fixed.n, q * w.n);
            assert!(q >= 1 && (q as f64) < 1.0 / eps);
            assert!(fixed.is_nice(&pair, eps));
            assert!(fixed.product < eps.powi(3));
            // Exhaustive oracle: q is the smallest admissible multiplier.
            let smallest = (1..10u64)
                .find(|&q| crate::lattice::frac_dist(q as f64 * w.n as f64 * v).unwrap() < eps)
                .unwrap();
            assert!(q as u64 >= smallest);
            let p = witness_to_orbit(&pair, &fixed, eps, DEFAULT_R_MAX).unwrap();
            assert!(p.delta.unwrap_or(p.delta_bound) < eps);
        }
    }

    #[test]
    fn convergents_of_golden_section() {
        let x = parse_real("(sqrt(5)-1)/2").unwrap().approx;
        assert_eq!(
            convergent_denominators(x, 100),
            vec![1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]
        );
    }

    proptest! {
        #[test]
        fn scan_symmetry_and_periodicity(u in 0.0f64..1.0, v in 0.0f64..1.0) {
            let p = TargetPair::from_f64(u, v);
            let a = littlewood_scan(&p, 2000).unwrap();
            let b = littlewood_scan(&p.swapped(), 2000).unwrap();
            prop_assert_eq!(a.argmin, b.argmin);
            prop_assert_eq!(a.min_product, b.min_product);
            let key = |s: &LittlewoodScan| s.records.iter().map(|r| (r.n, r.product)).collect::<Vec<_>>();
            prop_assert_eq!(key(&a), key(&b));
            let shifted = TargetPair::new(
                RealValue { approx: p.u.approx + DoubleDouble::ONE, exact: None },
                RealValue { approx: p.v.approx, exact: None },
            );
            let c = littlewood_scan(&shifted, 2000).unwrap();
            prop_assert_eq!(a.argmin, c.argmin);
            prop_assert!((a.min_product - c.min_product).abs() < 1e-12);
        }

        #[test]
        fn records_strictly_decrease(u in 0.0f64..1.0, v in 0.0f64..1.0) {
            let s = littlewood_scan(&TargetPair::from_f64(u, v), 5000).unwrap();
            prop_assert!(s.records.windows(2).all(|w| w[1].n > w[0].n && w[1].product < w[0].product));
            prop_assert_eq!(s.records.last().unwrap().product, s.min_product);
            // brute-force minimum
            let brute = (1..=5000u64)
                .map(|n| {
                    let nf = n as f64;
                    nf * (nf * u - (nf * u).round()).abs() * (nf * v - (nf * v).round()).abs()
                })
                .fold(f64::INFINITY, f64::min);
            prop_assert!((brute - s.min_product).abs() < 1e-9);
        }

        #[test]
        fn orbit_witness_product_bound(u in 0.0f64..1.0, v in 0.0f64..1.0, r in 0.0f64..4.0, s in 0.0f64..4.0) {
            let pair = TargetPair::from_f64(u, v);
            let eps = 0.1;
            if let Some(w) = orbit_to_witness(&pair, r, s, eps).unwrap() {
                prop_assert!(w.n > 0);
                prop_assert!(w.product < eps.powi(3));
            }
        }
    }

    #[test]
    fn roundtrip_near_rational_pair() {
        let pair = TargetPair::parse("1/7 + sqrt(2) * 1e-7", "3/7 - sqrt(3) * 1e-7").unwrap();
        let grid = ConeGrid::new(0.1, vec![7.0, 7.0]).unwrap();
        let rt = roundtrip(&pair, 0.1, &grid, DEFAULT_R_MAX).unwrap();
        assert!(!rt.excursions.is_empty());
        assert_eq!(rt.violations_to_witness, 0);
        assert_eq!(rt.violations_to_orbit, 0);
        assert!(rt
            .excursions
            .iter()
            .all(|e| e.delta < 0.1 && e.witness.product < 1e-3));
        assert!(!rt.returns.is_empty());
    }
}
