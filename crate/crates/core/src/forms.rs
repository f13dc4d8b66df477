//! Products of `k` linear forms.
//!
//! A unimodular matrix `m` with rows `m_1, ..., m_k` defines
//! `f_m(x) = m_1(x) * ... * m_k(x)`. Acting by `alpha^a` on the left rescales
//! the `i`-th form by `e^{a_i}` and leaves `|f_m|` unchanged, so a short vector
//! of the lattice `alpha^a m Z^k` is an integer point where `|f_m|` is small.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::{apply_diag, shortest_vector, DiagParam, LatticeBasis, Norm};
use crate::matrix::Matrix;

/// Unimodular matrix whose rows are linear forms.
#[derive(Clone, Debug, PartialEq)]
pub struct FormsMatrix {
    m: Matrix,
}

impl FormsMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        // Same invariants as a lattice basis.
        LatticeBasis::new(m.clone())?;
        Ok(FormsMatrix { m })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// The lattice `m Z^k` generated by the columns of `m`.
    pub fn lattice(&self) -> LatticeBasis {
        LatticeBasis::from_matrix_unchecked(self.m.clone())
    }

    /// `alpha^a m`: the `i`-th form scaled by `e^{a_i}`.
    pub fn flowed(&self, a: &DiagParam) -> Result<FormsMatrix> {
        Ok(FormsMatrix {
            m: apply_diag(a, &self.lattice())?.matrix().clone(),
        })
    }
}

/// `f_m(x) = prod_i (row_i . x)`.
pub fn f_m_eval(m: &FormsMatrix, x: &[i64]) -> f64 {
    m.m.mul_int_vec(x).iter().product()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormsScan {
    pub min: f64,
    pub argmin: Vec<i64>,
    pub evaluations: u64,
}

/// Evaluation budget for [`forms_min_scan`], in `N^k`.
pub const FORMS_BUDGET: f64 = 1e9;
const SHELL_BATCH: usize = 8;

/// Calls `visit` on every `x` with `|x|_inf = s` whose first nonzero
/// coordinate is positive, in lexicographic order.
fn for_each_in_shell(k: usize, s: i64, visit: &mut impl FnMut(&[i64])) {
    fn rec(
        x: &mut Vec<i64>,
        k: usize,
        s: i64,
        has_max: bool,
        signed: bool,
        visit: &mut impl FnMut(&[i64]),
    ) {
        let pos = x.len();
        if pos == k {
            if has_max {
                visit(x);
            }
            return;
        }
        let lo = if signed { -s } else { 0 };
        for v in lo..=s {
            // The last coordinate must reach the shell if nothing before did.
            if pos == k - 1 && !has_max && v.abs() != s {
                continue;
            }
            x.push(v);
            rec(x, k, s, has_max || v.abs() == s, signed || v != 0, visit);
            x.pop();
        }
    }
    let mut x = Vec::with_capacity(k);
    rec(&mut x, k, s, false, false, visit);
}

fn scan_shell(m: &FormsMatrix, s: i64) -> (f64, Vec<i64>, u64) {
    let mut best = f64::INFINITY;
    let mut arg = Vec::new();
    let mut count = 0u64;
    let k = m.dim();
    for_each_in_shell(k, s, &mut |x| {
        count += 1;
        if best == 0.0 {
            return;
        }
        let v = f_m_eval(m, x).abs();
        if v < best {
            best = v;
            arg = x.to_vec();
        }
    });
    (best, arg, count)
}

/// Minimum of `|f_m(x)|` over `0 < |x|_inf <= N`.
///
/// Shells `|x|_inf = 1, 2, ...` are scanned in order and each shell
/// lexicographically, with `x` normalized so its first nonzero coordinate is
/// positive. Ties go to the first vector in that order. The scan stops after
/// the batch of shells in which an exact zero first appears.
pub fn forms_min_scan(m: &FormsMatrix, n: u64) -> Result<FormsScan> {
    if n == 0 {
        return Err(LabError::Contract("forms scan needs N >= 1".into()));
    }
    let k = m.dim();
    if (n as f64).powi(k as i32) > FORMS_BUDGET {
        return Err(LabError::Budget(format!(
            "N^k = {n}^{k} exceeds {FORMS_BUDGET:e}"
        )));
    }
    let shells: Vec<i64> = (1..=n as i64).collect();
    let mut best = f64::INFINITY;
    let mut arg = Vec::new();
    let mut evaluations = 0u64;
    for batch in shells.chunks(SHELL_BATCH) {
        let results: Vec<(f64, Vec<i64>, u64)> =
            batch.par_iter().map(|&s| scan_shell(m, s)).collect();
        for (v, x, c) in results {
            evaluations += c;
            if v < best {
                best = v;
                arg = x;
            }
        }
        if best == 0.0 {
            break;
        }
    }
    Ok(FormsScan {
        min: best,
        argmin: arg,
        evaluations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormWitness {
    pub x: Vec<i64>,
    pub value: f64,
    /// `eps^k`, which `value` is guaranteed to undercut.
    pub bound: f64,
}

/// Integer point with `|f_m(x)| < eps^k` from a short vector of `alpha^a m Z^k`.
pub fn orbit_to_form_witness(
    m: &FormsMatrix,
    a: &DiagParam,
    eps: f64,
) -> Result<Option<FormWitness>> {
    let flowed = m.flowed(a)?;
    let sv = shortest_vector(&flowed.lattice(), Norm::Sup)?;
    if sv.norm >= eps {
        return Ok(None);
    }
    let value = f_m_eval(m, &sv.coefficients).abs();
    Ok(Some(FormWitness {
        x: sv.coefficients,
        value,
        bound: eps.powi(m.dim() as i32),
    }))
}

/// Norm form of the totally real cubic field `Q(2 cos(2 pi / 7))`, scaled to be unimodular.
///
/// Row `i` is `(1, t_i, t_i^2) / 7^{1/3}` for the three conjugates `t_i` of
/// `2 cos(2 pi / 7)`, so `f_m(x)` is the field norm of `x_1 + x_2 t + x_3 t^2`
/// divided by 7. It never vanishes on `Z^3 \ {0}`, and the lattice `m Z^3`
/// has a compact orbit under the full diagonal group.
pub fn cubic_norm_form() -> FormsMatrix {
    let theta: Vec<f64> = (1..=3)
        .map(|j| 2.0 * (2.0 * std::f64::consts::PI * j as f64 / 7.0).cos())
        .collect();
    let mut rows: Vec<Vec<f64>> = theta.iter().map(|&t| vec![1.0, t, t * t]).collect();
    let det = Matrix::from_rows(&rows).expect("3x3").det();
    if det < 0.0 {
        rows.swap(0, 1);
    }
    let scale = 7f64.cbrt();
    let rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|x| x / scale).collect())
        .collect();
    FormsMatrix::new(Matrix::from_rows(&rows).expect("3x3")).expect("discriminant 49")
}
