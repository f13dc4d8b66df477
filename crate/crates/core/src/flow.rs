//! Diagonal flows on the space of lattices.
//!
//! Conjugation by `a = alpha^t` scales the `(i, j)` entry of a matrix by
//! `e^{t_i - t_j}`. This splits `SL(k, R)` near the identity into
//!
//! * `U`, unipotent with off-diagonal entries only where `t_i > t_j` (expanded),
//! * `V`, unipotent with off-diagonal entries only where `t_i < t_j` (contracted),
//! * `C`, supported where `t_i = t_j` (the centralizer of `a`).
//!
//! [`cuv_decompose`] writes `g = c * u * v` with the factors in that order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::{apply_diag, delta, DiagParam, LatticeBasis};
use crate::matrix::Matrix;

const TIE_TOL: f64 = 1e-12;
const PIVOT_MIN: f64 = 1e-10;

/// `alpha^t g alpha^{-t}`, computed entrywise as `e^{t_i - t_j} g_ij`.
pub fn conjugate_diag(t: &DiagParam, g: &Matrix) -> Result<Matrix> {
    let k = g.dim();
    if t.dim() != k {
        return Err(LabError::DimensionMismatch {
            expected: k,
            got: t.dim(),
        });
    }
    let ts = t.as_slice();
    let mut out = g.clone();
    for i in 0..k {
        for j in 0..k {
            if i != j {
                out[(i, j)] *= (ts[i] - ts[j]).exp();
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairClass {
    Expanded,
    Contracted,
    Central,
}

/// A fixed diagonal generator together with its splitting of index pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSpec {
    pub a: DiagParam,
}

impl FlowSpec {
    pub fn new(a: DiagParam) -> Self {
        FlowSpec { a }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn classify(&self, i: usize, j: usize) -> PairClass {
        let t = self.a.as_slice();
        let d = t[i] - t[j];
        if i == j || d.abs() <= TIE_TOL {
            PairClass::Central
        } else if d > 0.0 {
            PairClass::Expanded
        } else {
            PairClass::Contracted
        }
    }

    /// `lambda = exp(min over expanded pairs of t_i - t_j)`; `None` when nothing is expanded.
    pub fn expansion_rate(&self) -> Option<f64> {
        let t = self.a.as_slice();
        let k = t.len();
        (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .filter(|&(i, j)| self.classify(i, j) == PairClass::Expanded)
            .map(|(i, j)| t[i] - t[j])
            .min_by(f64::total_cmp)
            .map(f64::exp)
    }

    fn in_class(&self, g: &Matrix, class: PairClass, tol: f64) -> bool {
        let k = g.dim();
        (0..k).all(|i| {
            (0..k).all(|j| {
                if i == j || self.classify(i, j) == class {
                    true
                } else {
                    g[(i, j)].abs() <= tol
                }
            })
        })
    }

    /// Membership in `U` up to `tol`: unit diagonal, support on expanded pairs.
    pub fn is_in_u(&self, g: &Matrix, tol: f64) -> bool {
        (0..g.dim()).all(|i| (g[(i, i)] - 1.0).abs() <= tol)
            && self.in_class(g, PairClass::Expanded, tol)
    }

    pub fn is_in_v(&self, g: &Matrix, tol: f64) -> bool {
        (0..g.dim()).all(|i| (g[(i, i)] - 1.0).abs() <= tol)
            && self.in_class(g, PairClass::Contracted, tol)
    }

    pub fn is_in_c(&self, g: &Matrix, tol: f64) -> bool {
        self.in_class(g, PairClass::Central, tol)
    }

    /// Index order by decreasing `t`, grouped into blocks of equal `t`.
    fn blocks(&self) -> (Vec<usize>, Vec<Vec<usize>>) {
        let t = self.a.as_slice();
        let mut order: Vec<usize> = (0..t.len()).collect();
        order.sort_by(|&a, &b| t[b].total_cmp(&t[a]));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (pos, &idx) in order.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if (t[order[g[0]]] - t[idx]).abs() <= TIE_TOL => g.push(pos),
                _ => groups.push(vec![pos]),
            }
        }
        (order, groups)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CuvFactors {
    pub c: Matrix,
    pub u: Matrix,
    pub v: Matrix,
}

impl CuvFactors {
    pub fn product(&self) -> Matrix {
        &(&self.c * &self.u) * &self.v
    }
}

fn submatrix(m: &Matrix, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|&i| cols.iter().map(|&j| m[(i, j)]).collect())
        .collect()
}

/// Factor `g = c * u * v` with `c` in `C`, `u` in `U`, `v` in `V`.
///
/// In coordinates sorted by decreasing `t`, `c * u` is block upper triangular
/// and `v` is block lower unipotent. The lower blocks of `g` are cleared by
/// column operations from the last block row upwards; what remains is `c * u`.
pub fn cuv_decompose(spec: &FlowSpec, g: &Matrix) -> Result<CuvFactors> {
    let k = g.dim();
    if spec.dim() != k {
        return Err(LabError::DimensionMismatch {
            expected: k,
            got: spec.dim(),
        });
    }
    let (order, groups) = spec.blocks();
    let mut m = Matrix::zeros(k);
    for a in 0..k {
        for b in 0..k {
            m[(a, b)] = g[(order[a], order[b])];
        }
    }
    let gp = m.clone();

    for p in (0..groups.len()).rev() {
        let piv = Matrix::from_rows(&submatrix(&m, &groups[p], &groups[p]))?;
        let det = piv.det();
        if !(det.abs() >= PIVOT_MIN) {
            return Err(LabError::Decomposition { pivot: det.abs() });
        }
        if p == 0 {
            break;
        }
        let piv_inv = piv
            .inverse()
            .map_err(|_| LabError::Decomposition { pivot: det.abs() })?;
        for q in 0..p {
            // X = P^{-1} M[p, q]; then column block q -= column block p * X.
            let mpq = submatrix(&m, &groups[p], &groups[q]);
            let np = groups[p].len();
            let x: Vec<Vec<f64>> = (0..np)
                .map(|a| {
                    (0..groups[q].len())
                        .map(|b| (0..np).map(|l| piv_inv[(a, l)] * mpq[l][b]).sum())
                        .collect()
                })
                .collect();
            for r in 0..k {
                for (b, &c) in groups[q].iter().enumerate() {
                    let delta: f64 = groups[p]
                        .iter()
                        .enumerate()
                        .map(|(l, &col)| m[(r, col)] * x[l][b])
                        .sum();
                    m[(r, c)] -= delta;
                }
            }
            for &r in &groups[p] {
                for &c in &groups[q] {
                    m[(r, c)] = 0.0;
                }
            }
        }
    }

    // m = c u (block upper). v = m^{-1} g.
    let mut cp = Matrix::zeros(k);
    for grp in &groups {
        for &a in grp {
            for &b in grp {
                cp[(a, b)] = m[(a, b)];
            }
        }
    }
    let up = &cp.inverse()? * &m;
    let vp = &m.inverse()? * &gp;

    let mut c = Matrix::zeros(k);
    let mut u = Matrix::identity(k);
    let mut v = Matrix::identity(k);
    let block_of: Vec<usize> = {
        let mut b = vec![0; k];
        for (gi, grp) in groups.iter().enumerate() {
            for &a in grp {
                b[a] = gi;
            }
        }
        b
    };
    for a in 0..k {
        for b in 0..k {
            let (i, j) = (order[a], order[b]);
            if block_of[a] == block_of[b] {
                c[(i, j)] = cp[(a, b)];
            } else if block_of[a] < block_of[b] {
                u[(i, j)] = up[(a, b)];
            } else {
                v[(i, j)] = vp[(a, b)];
            }
        }
    }
    Ok(CuvFactors { c, u, v })
}

/// `|a^n f a^{-n} - I| / |f - I|` for `f` in `U`.
pub fn expansion_check(spec: &FlowSpec, f: &Matrix, n: u32) -> Result<f64> {
    if f.dim() != spec.dim() {
        return Err(LabError::DimensionMismatch {
            expected: spec.dim(),
            got: f.dim(),
        });
    }
    if !spec.is_in_u(f, 1e-12) {
        return Err(LabError::Contract(
            "f is not in the expanded subgroup U".into(),
        ));
    }
    let base = f.distance_from_identity();
    if base == 0.0 {
        return Err(LabError::UndefinedRatio);
    }
    let moved = conjugate_diag(&spec.a.scaled(n as f64), f)?;
    Ok(moved.distance_from_identity() / base)
}

/// Rectangular grid over a cone: `s_i in {0, step, 2 step, ...} <= extent_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeGrid {
    pub step: f64,
    pub extents: Vec<f64>,
}

impl ConeGrid {
    /// Default grid step in each log-coordinate.
    pub const DEFAULT_STEP: f64 = 0.05;

    pub fn new(step: f64, extents: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(LabError::Config(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if extents.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(LabError::Config(
                "grid extents must be finite and non-negative".into(),
            ));
        }
        Ok(ConeGrid { step, extents })
    }

    pub fn counts(&self) -> Vec<usize> {
        self.extents
            .iter()
            .map(|e| (e / self.step + 1e-9).floor() as usize + 1)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.counts().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `idx`-th grid point in lexicographic order (first coordinate slowest).
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let counts = self.counts();
        let mut out = vec![0.0; counts.len()];
        for d in (0..counts.len()).rev() {
            out[d] = (idx % counts[d]) as f64 * self.step;
            idx /= counts[d];
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub times: Vec<f64>,
    pub delta: f64,
    pub in_k_rho: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub rho: f64,
    pub samples: Vec<OrbitSample>,
}

impl OrbitTrace {
    pub fn min_delta(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.delta)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_in_k_rho(&self) -> bool {
        self.samples.iter().all(|s| s.in_k_rho)
    }

    /// CSV with header `time_1,...,time_m,delta,in_K_rho`.
    pub fn to_csv(&self) -> String {
        let m = self.samples.first().map(|s| s.times.len()).unwrap_or(0);
        let mut out: String = (1..=m).map(|i| format!("time_{i},")).collect();
        out.push_str("delta,in_K_rho\n");
        for s in &self.samples {
            for t in &s.times {
                out.push_str(&format!("{t},"));
            }
            out.push_str(&format!("{},{}\n", s.delta, s.in_k_rho));
        }
        out
    }
}

fn check_independent(dirs: &[DiagParam]) -> Result<()> {
    // Gram determinant of the direction vectors.
    let m = dirs.len();
    if m == 0 {
        return Err(LabError::Contract("no cone directions given".into()));
    }
    let gram: Vec<Vec<f64>> = dirs
        .iter()
        .map(|a| {
            dirs.iter()
                .map(|b| {
                    a.as_slice()
                        .iter()
                        .zip(b.as_slice())
                        .map(|(x, y)| x * y)
                        .sum()
                })
                .collect()
        })
        .collect();
    let scale: f64 = (0..m).map(|i| gram[i][i]).product();
    let det = if m == 1 {
        gram[0][0]
    } else {
        Matrix::from_rows(&gram)?.det()
    };
    if !(det > 1e-12 * scale.max(1e-300)) {
        return Err(LabError::Contract(
            "cone directions are linearly dependent".into(),
        ));
    }
    Ok(())
}

/// Sample `delta(alpha^{s_1 t_1 + ... + s_m t_m} x0)` over a cone grid.
///
/// Grid points are evaluated in parallel and returned in grid order.
pub fn orbit_trace_cone(
    x0: &LatticeBasis,
    dirs: &[DiagParam],
    grid: &ConeGrid,
    rho: f64,
) -> Result<OrbitTrace> {
    check_independent(dirs)?;
    if grid.extents.len() != dirs.len() {
        return Err(LabError::DimensionMismatch {
            expected: dirs.len(),
            got: grid.extents.len(),
        });
    }
    if dirs.iter().any(|d| d.dim() != x0.dim()) {
        return Err(LabError::DimensionMismatch {
            expected: x0.dim(),
            got: dirs[0].dim(),
        });
    }
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let times = grid.point(idx);
            let t = DiagParam::combination(dirs, &times)?;
            let d = delta(&apply_diag(&t, x0)?)?;
            Ok(OrbitSample {
                times,
                delta: d,
                in_k_rho: d >= rho,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitTrace { rho, samples })
}

/// The two generators `(-1, 1, 0)` and `(-1, 0, 1)` of the Littlewood quadrant.
pub fn littlewood_cone() -> Vec<DiagParam> {
    vec![DiagParam::from_rs(1.0, 0.0), DiagParam::from_rs(0.0, 1.0)]
}
