//! Conjugating a displacement `g` by the unipotent `u(r) = I + r E_12`.
//!
//! With the first two coordinates split off, `g` is written in blocks
//!
//! ```text
//!     | a1   g12  g1* |
//! g = | g21  a2   g2* |
//!     | g*1  g*2  a*  |
//! ```
//!
//! and `g(r) = u(r) g u(-r)` has a closed form that is quadratic in `r`.

use std::fmt::Debug;
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::rational_det;
use crate::matrix::Matrix;

/// Field of scalars used for shear computations (`f64` or exact rationals).
pub trait Scalar: Clone + PartialEq + Debug + Num + Neg<Output = Self> {}
impl<T: Clone + PartialEq + Debug + Num + Neg<Output = T>> Scalar for T {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearState<T> {
    pub a1: T,
    pub a2: T,
    pub g12: T,
    pub g21: T,
    /// Row vectors of length `k - 2`.
    pub g1s: Vec<T>,
    pub g2s: Vec<T>,
    /// Column vectors of length `k - 2`.
    pub gs1: Vec<T>,
    pub gs2: Vec<T>,
    /// `(k - 2) x (k - 2)`, row-major rows.
    pub a_star: Vec<Vec<T>>,
}

impl<T: Scalar> ShearState<T> {
    /// Splits a `k x k` matrix given by rows, `k >= 2`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let k = rows.len();
        if k < 2 || rows.iter().any(|r| r.len() != k) {
            return Err(LabError::Domain(
                "shear state needs a square matrix with k >= 2".into(),
            ));
        }
        Ok(ShearState {
            a1: rows[0][0].clone(),
            a2: rows[1][1].clone(),
            g12: rows[0][1].clone(),
            g21: rows[1][0].clone(),
            g1s: rows[0][2..].to_vec(),
            g2s: rows[1][2..].to_vec(),
            gs1: rows[2..].iter().map(|r| r[0].clone()).collect(),
            gs2: rows[2..].iter().map(|r| r[1].clone()).collect(),
            a_star: rows[2..].iter().map(|r| r[2..].to_vec()).collect(),
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        let mut out = Vec::with_capacity(self.dim());
        let mut r0 = vec![self.a1.clone(), self.g12.clone()];
        r0.extend(self.g1s.iter().cloned());
        let mut r1 = vec![self.g21.clone(), self.a2.clone()];
        r1.extend(self.g2s.iter().cloned());
        out.push(r0);
        out.push(r1);
        for (i, row) in self.a_star.iter().enumerate() {
            let mut r = vec![self.gs1[i].clone(), self.gs2[i].clone()];
            r.extend(row.iter().cloned());
            out.push(r);
        }
        out
    }

    pub fn identity(k: usize) -> Self {
        let rows: Vec<Vec<T>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { T::one() } else { T::zero() })
                    .collect()
            })
            .collect();
        Self::from_rows(&rows).expect("k >= 2")
    }

    pub fn dim(&self) -> usize {
        2 + self.g1s.len()
    }

    /// `u(r) g u(-r)` from the block formula.
    pub fn shear(&self, r: &T) -> Self {
        let r2 = r.clone() * r.clone();
        let g21 = self.g21.clone();
        ShearState {
            a1: self.a1.clone() + g21.clone() * r.clone(),
            a2: self.a2.clone() - g21.clone() * r.clone(),
            g12: self.g12.clone() + (self.a2.clone() - self.a1.clone()) * r.clone()
                - g21.clone() * r2,
            g21,
            g1s: self
                .g1s
                .iter()
                .zip(&self.g2s)
                .map(|(a, b)| a.clone() + b.clone() * r.clone())
                .collect(),
            g2s: self.g2s.clone(),
            gs1: self.gs1.clone(),
            gs2: self
                .gs2
                .iter()
                .zip(&self.gs1)
                .map(|(a, b)| a.clone() - b.clone() * r.clone())
                .collect(),
            a_star: self.a_star.clone(),
        }
    }

    /// `u(r) g u(-r)` by two matrix products; oracle for [`ShearState::shear`].
    pub fn shear_direct(&self, r: &T) -> Self {
        let k = self.dim();
        let unip = |x: T| -> Vec<Vec<T>> {
            let mut m: Vec<Vec<T>> = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| if i == j { T::one() } else { T::zero() })
                        .collect()
                })
                .collect();
            m[0][1] = x;
            m
        };
        let prod = mat_mul(
            &mat_mul(&unip(r.clone()), &self.to_rows()),
            &unip(-r.clone()),
        );
        Self::from_rows(&prod).expect("same shape")
    }
}

fn mat_mul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let k = a.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (0..k).fold(T::zero(), |acc, l| acc + a[i][l].clone() * b[l][j].clone()))
                .collect()
        })
        .collect()
}

impl ShearState<f64> {
    /// Splits `g`, requiring `|det g - 1| <= 1e-9`.
    pub fn from_matrix(g: &Matrix) -> Result<Self> {
        if (g.det() - 1.0).abs() > 1e-9 {
            return Err(LabError::Domain(format!("det g = {} is not 1", g.det())));
        }
        Self::from_rows(&g.rows())
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.to_rows()).expect("square")
    }

    /// Largest entrywise difference from another state of the same shape.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.to_matrix().sub(&other.to_matrix()).sup_norm()
    }
}

impl ShearState<BigRational> {
    /// Splits an exact matrix, requiring `det g = 1` exactly.
    pub fn from_exact_rows(rows: &[Vec<BigRational>]) -> Result<Self> {
        let st = Self::from_rows(rows)?;
        let k = rows.len();
        let d = rational_det(&rows.concat(), k);
        if d != BigRational::from_integer(1.into()) {
            return Err(LabError::Domain(format!("det g = {d} is not 1")));
        }
        Ok(st)
    }
}

/// Displacement sizes: `kappa_a = |a2 - a1|`,
/// `kappa_u = max(|g21|^{1/2}, |g*1|, |g2*|)` (sup norms), `kappa = max` of both.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub kappa: f64,
    pub kappa_a: f64,
    pub kappa_u: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn kappa(g: &ShearState<f64>) -> Kappa {
    let kappa_a = (g.a2 - g.a1).abs();
    let kappa_u = g.g21.abs().sqrt().max(sup(&g.gs1)).max(sup(&g.g2s));
    Kappa {
        kappa: kappa_a.max(kappa_u),
        kappa_a,
        kappa_u,
    }
}

/// Conjugation by the diagonal element `diag(e^{-tau}, e^{tau}, 1, ..., 1)`.
///
/// `g21` scales by `e^{2 tau}`, `g2*` and `g*1` by `e^tau`, their mirror
/// images by the inverse factors; diagonal blocks are fixed. Hence
/// `kappa_a` is invariant and `kappa_u` scales by exactly `e^tau`.
pub fn flow_conjugate_shear(g: &ShearState<f64>, tau: f64) -> ShearState<f64> {
    let (e, e2) = (tau.exp(), (2.0 * tau).exp());
    let (ie, ie2) = ((-tau).exp(), (-2.0 * tau).exp());
    let out = ShearState {
        a1: g.a1,
        a2: g.a2,
        g12: g.g12 * ie2,
        g21: g.g21 * e2,
        g1s: g.g1s.iter().map(|x| x * ie).collect(),
        g2s: g.g2s.iter().map(|x| x * e).collect(),
        gs1: g.gs1.iter().map(|x| x * e).collect(),
        gs2: g.gs2.iter().map(|x| x * ie).collect(),
        a_star: g.a_star.clone(),
    };
    debug_assert!({
        let (a, b) = (kappa(g), kappa(&out));
        a.kappa_a == b.kappa_a && (b.kappa_u - e * a.kappa_u).abs() <= 1e-12 * b.kappa_u.max(1.0)
    });
    out
}

/// Search settings for [`find_shear_time`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearSearch {
    pub rho: f64,
    /// Small parameter in `|g21 r| <= C delta^{3/8}`; defaults to `kappa^2`.
    pub delta: Option<f64>,
}

impl Default for ShearSearch {
    fn default() -> Self {
        ShearSearch {
            rho: 0.5,
            delta: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShearChoice {
    InverseKappa,
    DoubledFallback,
    GridSearch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearTime {
    pub r: f64,
    /// Achieved constant `C`.
    pub c: f64,
    /// `max(|(a2 - a1) r - g21 r^2|, |g2* r|, |g*1 r|)`.
    pub max_term: f64,
    pub g21_term: f64,
    pub choice: ShearChoice,
}

/// A `C` this small at `r = 1/kappa` or `r = 2/kappa` is accepted without searching.
pub const ACCEPT_C: f64 = 4.0;
const GRID_RATIO: f64 = 1.05;

fn shear_constant(g: &ShearState<f64>, r: f64, delta: f64) -> (f64, f64, f64) {
    let m = ((g.a2 - g.a1) * r - g.g21 * r * r)
        .abs()
        .max(sup(&g.g2s) * r.abs())
        .max(sup(&g.gs1) * r.abs());
    let g21_term = (g.g21 * r).abs();
    let c = m.max(1.0 / m).max(g21_term / delta.powf(0.375));
    (c, m, g21_term)
}

/// Picks a time `r` at which the sheared displacement has size comparable to 1.
///
/// Tries `r = 1/kappa`, then `r = 2/kappa` (for near-cancellation of the
/// quadratic term), then the grid `r = kappa^{-1}/4 * 1.05^j` up to
/// `rho^{-5} / kappa`, returning the smallest achieved `C`.
pub fn find_shear_time(g: &ShearState<f64>, search: &ShearSearch) -> Result<ShearTime> {
    let kap = kappa(g);
    if kap.kappa == 0.0 {
        return Err(LabError::NoShear);
    }
    if !(search.rho > 0.0 && search.rho <= 1.0) {
        return Err(LabError::Contract("shear search needs 0 < rho <= 1".into()));
    }
    let delta = search.delta.unwrap_or(kap.kappa * kap.kappa);
    if delta.is_nan() || delta <= 0.0 {
        return Err(LabError::Contract("delta must be positive".into()));
    }
    let at = |r: f64, choice| {
        let (c, max_term, g21_term) = shear_constant(g, r, delta);
        ShearTime {
            r,
            c,
            max_term,
            g21_term,
            choice,
        }
    };
    let first = at(1.0 / kap.kappa, ShearChoice::InverseKappa);
    if first.c <= ACCEPT_C {
        return Ok(first);
    }
    let second = at(2.0 / kap.kappa, ShearChoice::DoubledFallback);
    if second.c <= ACCEPT_C {
        return Ok(second);
    }
    let mut best = if second.c < first.c { second } else { first };
    let hi = search.rho.powi(-5) / kap.kappa;
    let mut r = 0.25 / kap.kappa;
    while r <= hi {
        let cand = at(r, ShearChoice::GridSearch);
        if cand.c < best.c {
            best = cand;
        }
        r *= GRID_RATIO;
    }
    if !best.c.is_finite() {
        return Err(LabError::Numeric(
            "no finite shear constant on the search grid".into(),
        ));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn state(k: usize, f: impl Fn(&mut ShearState<f64>)) -> ShearState<f64> {
        let mut g = ShearState::identity(k);
        f(&mut g);
        g
    }

    fn random_state(rng: &mut ChaCha8Rng, k: usize) -> ShearState<f64> {
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.3..0.3))
                    .collect()
            })
            .collect();
        ShearState::from_rows(&rows).unwrap()
    }

    #[test]
    fn round_trip_blocks() {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| (4 * i + j) as f64).collect())
            .collect();
        let g = ShearState::from_rows(&rows).unwrap();
        assert_eq!(g.to_rows(), rows);
        assert_eq!(g.g2s, vec![6.0, 7.0]);
        assert_eq!(g.gs1, vec![8.0, 12.0]);
        assert!(ShearState::from_matrix(&Matrix::diagonal(&[2.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn shear_examples() {
        let id = ShearState::<f64>::identity(3);
        assert_eq!(id.shear(&2.5), id);
        let g = state(3, |g| g.g21 = 0.3);
        let s = g.shear(&2.0);
        assert!((s.a1 - 1.6).abs() < 1e-15);
        assert!((s.g12 + 1.2).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 2..=5 {
            for _ in 0..50 {
                let g = random_state(&mut rng, k);
                let r = rng.gen_range(-5.0..5.0);
                assert!(g.shear(&r).max_diff(&g.shear_direct(&r)) < 1e-12);
            }
        }
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let rows = vec![
            vec![q(2, 1), q(1, 3), q(0, 1)],
            vec![q(3, 1), q(1, 1), q(1, 2)],
            vec![q(0, 1), q(-1, 5), q(3, 5)],
        ];
        let mut rows = rows;
        let d = rational_det(&rows.concat(), 3);
        rows[0] = rows[0].iter().map(|x| x / &d).collect();
        let g = ShearState::from_exact_rows(&rows).unwrap();
        let r = q(7, 4);
        assert_eq!(g.shear(&r), g.shear_direct(&r));
    }

    #[test]
    fn kappa_examples() {
        let k = kappa(&ShearState::identity(3));
        assert_eq!((k.kappa, k.kappa_a, k.kappa_u), (0.0, 0.0, 0.0));
        let k = kappa(&state(3, |g| g.a2 = 1.3));
        assert!((k.kappa - 0.3).abs() < 1e-15 && k.kappa == k.kappa_a);
        let k = kappa(&state(3, |g| g.g21 = 0.04));
        assert!((k.kappa_u - 0.2).abs() < 1e-15);
    }

    #[test]
    fn conjugation_matches_diagonal_conjugation() {
        use crate::flow::conjugate_diag;
        use crate::lattice::DiagParam;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let g = random_state(&mut rng, 4);
            let tau = rng.gen_range(-2.0..2.0);
            let t = DiagParam::new(vec![-tau, tau, 0.0, 0.0]).unwrap();
            let direct = conjugate_diag(&t, &g.to_matrix()).unwrap();
            let ours = flow_conjugate_shear(&g, tau).to_matrix();
            assert!(direct.sub(&ours).sup_norm() <= 1e-12 * direct.sup_norm());
        }
        let g = state(3, |g| g.g2s = vec![0.1]);
        let h = flow_conjugate_shear(&g, 1.0);
        assert!((h.g2s[0] - 0.1 * std::f64::consts::E).abs() < 1e-15);
        assert_eq!(flow_conjugate_shear(&g, 0.0), g);
    }

    #[test]
    fn conjugation_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = random_state(&mut rng, 3);
        let a = flow_conjugate_shear(&flow_conjugate_shear(&g, 0.4), -1.1);
        let b = flow_conjugate_shear(&g, -0.7);
        assert!(a.max_diff(&b) < 1e-14);
    }

    #[test]
    fn shear_time_single_term() {
        let g = state(3, |g| g.a2 = 1.1);
        let t = find_shear_time(&g, &ShearSearch::default()).unwrap();
        assert!((t.r - 10.0).abs() < 1e-9);
        assert!((t.max_term - 1.0).abs() < 1e-9);
        assert!((t.c - 1.0).abs() < 1e-9);
        assert_eq!(t.choice, ShearChoice::InverseKappa);
    }

    #[test]
    fn shear_time_near_cancellation() {
        let g = state(3, |g| {
            g.a2 = 1.1;
            g.g21 = 0.01;
        });
        let t = find_shear_time(&g, &ShearSearch::default()).unwrap();
        assert_eq!(t.choice, ShearChoice::DoubledFallback);
        assert!((t.r - 20.0).abs() < 1e-9);
        assert!((t.max_term - 2.0).abs() < 1e-9);
    }

    #[test]
    fn shear_time_postcondition_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let g = random_state(&mut rng, 4).scale_unipotent_part(rng.gen_range(0.001..0.1));
            let search = ShearSearch {
                rho: 0.3,
                delta: None,
            };
            let t = find_shear_time(&g, &search).unwrap();
            let delta = kappa(&g).kappa.powi(2);
            let (c, m, g21) = shear_constant(&g, t.r, delta);
            assert_eq!(c, t.c);
            let slack = 1.0 + 1e-12;
            assert!(1.0 / c <= m * slack && m <= c * slack && g21 <= c * delta.powf(0.375) * slack);
            assert!(t.c < 10.0, "C = {}", t.c);
        }
    }

    #[test]
    fn no_shear_in_l() {
        let g = state(3, |g| {
            g.g12 = 0.5;
            g.g1s = vec![0.2];
            g.gs2 = vec![0.1];
        });
        assert_eq!(
            find_shear_time(&g, &ShearSearch::default()),
            Err(LabError::NoShear)
        );
    }

    impl ShearState<f64> {
        fn scale_unipotent_part(mut self, s: f64) -> Self {
            let mid = (self.a1 + self.a2) / 2.0;
            self.a1 = mid + (self.a1 - mid) * s;
            self.a2 = mid + (self.a2 - mid) * s;
            self.g21 *= s * s;
            self.gs1.iter_mut().for_each(|x| *x *= s);
            self.g2s.iter_mut().for_each(|x| *x *= s);
            self
        }
    }
}
