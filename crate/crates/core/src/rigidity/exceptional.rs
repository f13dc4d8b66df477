//! Exact test for integer matrices that could realize an exceptional return.
//!
//! `gamma` qualifies when it is diagonalizable over `R`, has neither `1` nor
//! `-1` as an eigenvalue, and has exactly one eigenvalue of multiplicity two
//! with all others simple. Everything here runs in exact integer/rational
//! arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use crate::error::{LabError, Result};

/// Square integer matrix with determinant exactly 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerMatrix {
    k: usize,
    entries: Vec<i64>,
}

impl IntegerMatrix {
    pub fn new(rows: &[Vec<i64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(LabError::Domain(
                "integer matrix must be square and nonempty".into(),
            ));
        }
        let m = IntegerMatrix {
            k,
            entries: rows.concat(),
        };
        let d = m.det();
        if !d.is_one() {
            return Err(LabError::Domain(format!("determinant is {d}, not 1")));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.k + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    fn big(&self) -> Vec<Vec<BigInt>> {
        self.rows()
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        bareiss_det(self.big())
    }

    /// Characteristic polynomial `det(x I - gamma)`, ascending coefficients.
    pub fn char_poly(&self) -> Vec<BigInt> {
        // Faddeev-LeVerrier; every intermediate matrix is integral and the
        // trace divisions are exact.
        let k = self.k;
        let a = self.big();
        let mut c = vec![BigInt::zero(); k + 1];
        c[k] = BigInt::one();
        let mut m = vec![vec![BigInt::zero(); k]; k];
        for i in 1..=k {
            let mut next = mat_mul(&a, &m);
            for (d, row) in next.iter_mut().enumerate() {
                row[d] += &c[k + 1 - i];
            }
            m = next;
            let am = mat_mul(&a, &m);
            let tr: BigInt = (0..k).map(|d| am[d][d].clone()).sum();
            c[k - i] = -tr / BigInt::from(i);
        }
        c
    }
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let k = a.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (0..k).map(|l| &a[i][l] * &b[l][j]).sum())
                .collect()
        })
        .collect()
}

fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let k = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for p in 0..k {
        if m[p][p].is_zero() {
            match (p + 1..k).find(|&r| !m[r][p].is_zero()) {
                Some(r) => {
                    m.swap(p, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in p + 1..k {
            for j in p + 1..k {
                m[i][j] = (&m[i][j] * &m[p][p] - &m[i][p] * &m[p][j]) / &prev;
            }
        }
        prev = m[p][p].clone();
    }
    sign * &m[k - 1][k - 1]
}

/// Which of the conditions failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionalFailure {
    NotRealRooted,
    NotDiagonalizable,
    EigenvalueOne,
    EigenvalueMinusOne,
    MultiplicityPattern,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalDiagnostics {
    /// Characteristic polynomial, ascending coefficients as decimal strings.
    pub char_poly: Vec<String>,
    /// Entry `i` is the number of distinct (complex) eigenvalues of multiplicity `i + 1`.
    pub multiplicity_counts: Vec<usize>,
    pub failures: Vec<ExceptionalFailure>,
}

/// Returns whether `gamma` meets all three conditions, plus which ones failed.
pub fn exceptional_check(gamma: &IntegerMatrix) -> (bool, ExceptionalDiagnostics) {
    let cp = gamma.char_poly();
    let p = Poly::from_ints(&cp);
    let sqf = p.square_free_decomposition();
    let mut failures = Vec::new();

    let real_rooted = sqf.iter().all(|a| a.count_real_roots() == a.degree());
    if !real_rooted {
        failures.push(ExceptionalFailure::NotRealRooted);
    }
    // Diagonalizable iff the square-free part annihilates gamma.
    let sqf_part = sqf.iter().fold(Poly::one(), |acc, a| acc.mul(a));
    if !annihilates(&sqf_part, gamma) {
        failures.push(ExceptionalFailure::NotDiagonalizable);
    }
    if p.eval(&BigRational::one()).is_zero() {
        failures.push(ExceptionalFailure::EigenvalueOne);
    }
    if p.eval(&-BigRational::one()).is_zero() {
        failures.push(ExceptionalFailure::EigenvalueMinusOne);
    }
    let counts: Vec<usize> = sqf.iter().map(|a| a.degree()).collect();
    let pattern_ok = counts.get(1) == Some(&1) && counts.iter().skip(2).all(|&d| d == 0);
    if !pattern_ok {
        failures.push(ExceptionalFailure::MultiplicityPattern);
    }
    let diag = ExceptionalDiagnostics {
        char_poly: cp.iter().map(|c| c.to_string()).collect(),
        multiplicity_counts: counts,
        failures,
    };
    (diag.failures.is_empty(), diag)
}

fn annihilates(q: &Poly, gamma: &IntegerMatrix) -> bool {
    let k = gamma.dim();
    let g: Vec<Vec<BigRational>> = gamma
        .rows()
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from_integer(x.into()))
                .collect()
        })
        .collect();
    let mut acc = vec![vec![BigRational::zero(); k]; k];
    for c in q.coeffs().iter().rev() {
        let mut next: Vec<Vec<BigRational>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (0..k).map(|l| &acc[i][l] * &g[l][j]).sum())
                    .collect()
            })
            .collect();
        for (d, row) in next.iter_mut().enumerate() {
            row[d] += c;
        }
        acc = next;
    }
    acc.iter().flatten().all(|x| x.is_zero())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalScan {
    pub k: usize,
    pub entry_bound: i64,
    /// Matrices with determinant 1 that were checked.
    pub checked: u64,
    pub hits: Vec<Vec<Vec<i64>>>,
    /// How often each condition failed, in [`ExceptionalFailure`] order.
    pub failure_counts: Vec<(ExceptionalFailure, u64)>,
}

/// Upper limit on the number of candidate matrices `(2b+1)^{k^2}`.
pub const SCAN_BUDGET: f64 = 1e9;

const FAILURES: [ExceptionalFailure; 5] = [
    ExceptionalFailure::NotRealRooted,
    ExceptionalFailure::NotDiagonalizable,
    ExceptionalFailure::EigenvalueOne,
    ExceptionalFailure::EigenvalueMinusOne,
    ExceptionalFailure::MultiplicityPattern,
];

/// Checked count, hits and failure counts for one first row.
type RowTally = (u64, Vec<Vec<Vec<i64>>>, [u64; 5]);

/// Runs [`exceptional_check`] on every `SL(k, Z)` matrix with entries in `[-b, b]`.
///
/// Work is split by first row and merged in lexicographic order.
pub fn exceptional_scan(k: usize, b: i64) -> Result<ExceptionalScan> {
    if !(2..=4).contains(&k) || b < 0 {
        return Err(LabError::Contract(
            "scan needs 2 <= k <= 4 and bound >= 0".into(),
        ));
    }
    let side = (2 * b + 1) as u64;
    if (side as f64).powi((k * k) as i32) > SCAN_BUDGET {
        return Err(LabError::Budget(format!("(2*{b}+1)^{} candidates", k * k)));
    }
    let row_count = side.pow(k as u32);
    let row = |mut idx: u64| -> Vec<i64> {
        let mut r = vec![0; k];
        for x in r.iter_mut().rev() {
            *x = (idx % side) as i64 - b;
            idx /= side;
        }
        r
    };
    let rows: Vec<Vec<i64>> = (0..row_count).map(row).collect();
    let per_first: Vec<RowTally> = rows
        .par_iter()
        .map(|first| {
            let mut checked = 0u64;
            let mut hits = Vec::new();
            let mut counts = [0u64; 5];
            let rest = row_count.pow(k as u32 - 1);
            for mut idx in 0..rest {
                let mut m = vec![first.clone()];
                for _ in 1..k {
                    m.push(Vec::new());
                }
                for slot in (1..k).rev() {
                    m[slot] = rows[(idx % row_count) as usize].clone();
                    idx /= row_count;
                }
                if !det_is_one_small(&m) {
                    continue;
                }
                let g = IntegerMatrix {
                    k,
                    entries: m.concat(),
                };
                checked += 1;
                let (ok, d) = exceptional_check(&g);
                for f in d.failures {
                    counts[FAILURES.iter().position(|&x| x == f).unwrap()] += 1;
                }
                if ok {
                    hits.push(m);
                }
            }
            (checked, hits, counts)
        })
        .collect();
    let mut out = ExceptionalScan {
        k,
        entry_bound: b,
        checked: 0,
        hits: Vec::new(),
        failure_counts: FAILURES.iter().map(|&f| (f, 0)).collect(),
    };
    for (c, h, counts) in per_first {
        out.checked += c;
        out.hits.extend(h);
        for (slot, n) in out.failure_counts.iter_mut().zip(counts) {
            slot.1 += n;
        }
    }
    Ok(out)
}

fn det_is_one_small(m: &[Vec<i64>]) -> bool {
    match m.len() {
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0] == 1,
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
                == 1
        }
        _ => bareiss_det(
            m.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .is_one(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im(rows: &[&[i64]]) -> IntegerMatrix {
        IntegerMatrix::new(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(IntegerMatrix::new(&[vec![2, 0], vec![0, 1]]).is_err());
        assert!(IntegerMatrix::new(&[vec![1, 0, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn char_poly_matches_direct_formula() {
        let g = im(&[&[2, 1, 0], &[1, 1, 0], &[0, 0, 1]]);
        // (x^2 - 3x + 1)(x - 1) = x^3 - 4x^2 + 4x - 1
        let cp: Vec<i64> = g
            .char_poly()
            .iter()
            .map(|c| c.try_into().unwrap())
            .collect();
        assert_eq!(cp, vec![-1, 4, -4, 1]);
        // Companion matrix of x^3 - x - 1.
        let c = im(&[&[0, 0, 1], &[1, 0, 1], &[0, 1, 0]]);
        let cp: Vec<i64> = c
            .char_poly()
            .iter()
            .map(|c| c.try_into().unwrap())
            .collect();
        assert_eq!(cp, vec![-1, -1, 0, 1]);
    }

    #[test]
    fn examples() {
        let (ok, d) = exceptional_check(&im(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
        assert!(!ok);
        assert!(d.failures.contains(&ExceptionalFailure::EigenvalueOne));
        assert_eq!(d.multiplicity_counts, vec![0, 0, 1]);

        let (ok, d) = exceptional_check(&im(&[&[2, 1, 0], &[1, 1, 0], &[0, 0, 1]]));
        assert!(!ok);
        assert_eq!(
            d.failures,
            vec![
                ExceptionalFailure::EigenvalueOne,
                ExceptionalFailure::MultiplicityPattern
            ]
        );

        // Jordan block: not diagonalizable.
        let (_, d) = exceptional_check(&im(&[&[1, 1], &[0, 1]]));
        assert!(d.failures.contains(&ExceptionalFailure::NotDiagonalizable));
        // Rotation by 90 degrees: complex eigenvalues.
        let (_, d) = exceptional_check(&im(&[&[0, -1], &[1, 0]]));
        assert!(d.failures.contains(&ExceptionalFailure::NotRealRooted));
    }

    #[test]
    fn rational_diagonal_matrices_can_pass_over_q() {
        // The criterion itself is not restricted to integer matrices; over Q,
        // diag(2, 2, 1/4) satisfies all three conditions.
        let p = Poly::from_ints(&[(-1).into(), 8.into(), (-20).into(), 16.into()]);
        let sqf = p.square_free_decomposition();
        assert_eq!(
            sqf.iter().map(|a| a.degree()).collect::<Vec<_>>(),
            vec![1, 1]
        );
    }

    #[test]
    fn small_scans_find_nothing() {
        let s = exceptional_scan(3, 1).unwrap();
        assert!(s.hits.is_empty());
        assert!(s.checked > 0);
        let s2 = exceptional_scan(2, 3).unwrap();
        assert!(s2.hits.is_empty());
        assert!(matches!(exceptional_scan(4, 3), Err(LabError::Budget(_))));
    }
}
