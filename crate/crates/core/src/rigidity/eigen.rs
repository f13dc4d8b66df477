//! Eigenvalues of `h diag(e^lambda)` for `h` near the identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::matrix::Matrix;

/// Imaginary parts below this (relative to the modulus) count as real.
pub const IMAG_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigCheck {
    /// Logarithms of the eigenvalues, descending; empty if any eigenvalue is
    /// complex or non-positive.
    pub lambda_prime: Vec<f64>,
    /// `max_i |lambda'_i - lambda_i|` after sorting both descending.
    pub max_shift: f64,
    pub real_positive: bool,
    pub ok: bool,
    /// Raw eigenvalues `(re, im)` in solver order.
    pub eigenvalues: Vec<(f64, f64)>,
}

/// Checks that `h diag(e^lambda)` is diagonalizable over `R` with positive
/// eigenvalues `e^{lambda'_i}` and `|lambda'_i - lambda_i| < 1/2`.
///
/// Requires pairwise gaps `|lambda_i - lambda_j| > 1` and `det h = 1`. The
/// distance of `h` from the identity is not checked; far from it the
/// result is still reported but carries no guarantee.
pub fn perturbed_eigs_check(lambda: &[f64], h: &Matrix) -> Result<EigCheck> {
    let m = lambda.len();
    if h.dim() != m {
        return Err(LabError::DimensionMismatch {
            expected: m,
            got: h.dim(),
        });
    }
    for i in 0..m {
        for j in i + 1..m {
            if (lambda[i] - lambda[j]).abs() <= 1.0 {
                return Err(LabError::Contract(format!(
                    "eigenvalue gap |{} - {}| is not > 1",
                    lambda[i], lambda[j]
                )));
            }
        }
    }
    if (h.det() - 1.0).abs() > 1e-9 {
        return Err(LabError::Contract(format!("det h = {} is not 1", h.det())));
    }
    let d = Matrix::diagonal(&lambda.iter().map(|x| x.exp()).collect::<Vec<_>>());
    let prod = (h * &d).to_nalgebra();
    let eig = prod.complex_eigenvalues();
    let eigenvalues: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
    if eigenvalues
        .iter()
        .any(|(re, im)| !re.is_finite() || !im.is_finite())
    {
        return Err(LabError::Numeric(
            "eigensolver returned non-finite values".into(),
        ));
    }
    let real_positive = eigenvalues
        .iter()
        .all(|&(re, im)| re > 0.0 && im.abs() <= IMAG_TOL * re.hypot(im));
    let mut sorted_lambda = lambda.to_vec();
    sorted_lambda.sort_by(|a, b| b.total_cmp(a));
    let (lambda_prime, max_shift) = if real_positive {
        let mut lp: Vec<f64> = eigenvalues.iter().map(|(re, _)| re.ln()).collect();
        lp.sort_by(|a, b| b.total_cmp(a));
        let shift = lp
            .iter()
            .zip(&sorted_lambda)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        (lp, shift)
    } else {
        (Vec::new(), f64::INFINITY)
    };
    Ok(EigCheck {
        ok: real_positive && max_shift < 0.5,
        lambda_prime,
        max_shift,
        real_positive,
        eigenvalues,
    })
}

/// Random unimodular `h` with `|h - I|_sup < radius`, by rejection.
///
/// Entries of `h - I` are uniform in `(-radius, radius)`; `h` is rescaled to
/// determinant 1 and redrawn if the rescaling leaves the ball.
pub fn random_near_identity<R: Rng + ?Sized>(rng: &mut R, m: usize, radius: f64) -> Matrix {
    assert!(radius > 0.0 && m > 0);
    loop {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-radius..radius))
                    .collect()
            })
            .collect();
        let h = Matrix::from_rows(&rows).expect("square");
        let d = h.det();
        if d <= 0.0 {
            continue;
        }
        let h = h.scale(d.powf(-1.0 / m as f64));
        if h.distance_from_identity() < radius {
            return h;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigTrials {
    pub trials: usize,
    pub passed: usize,
    /// Largest `max_shift` over trials with real positive spectrum.
    pub max_shift: f64,
    /// Indices of trials that failed.
    pub failures: Vec<usize>,
}

/// [`perturbed_eigs_check`] on `trials` seeded draws of [`random_near_identity`].
pub fn eig_lemma_trials(
    lambda: &[f64],
    trials: usize,
    radius: f64,
    seed: u64,
) -> Result<EigTrials> {
    if !(radius > 0.0) {
        return Err(LabError::Contract("radius must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = EigTrials {
        trials,
        passed: 0,
        max_shift: 0.0,
        failures: Vec::new(),
    };
    for i in 0..trials {
        let h = random_near_identity(&mut rng, lambda.len(), radius);
        let c = perturbed_eigs_check(lambda, &h)?;
        if c.real_positive {
            out.max_shift = out.max_shift.max(c.max_shift);
        }
        if c.ok {
            out.passed += 1;
        } else {
            out.failures.push(i);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_respects_radius() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let h = random_near_identity(&mut rng, 3, 0.01);
            assert!(h.distance_from_identity() < 0.01);
            assert!((h.det() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_trials_are_reproducible() {
        let a = eig_lemma_trials(&[3.0, 1.5, 0.0], 20, 0.01, 7).unwrap();
        let b = eig_lemma_trials(&[3.0, 1.5, 0.0], 20, 0.01, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.passed, 20);
    }

    #[test]
    fn identity_is_exact() {
        let l = [3.0, 1.5, 0.0];
        let c = perturbed_eigs_check(&l, &Matrix::identity(3)).unwrap();
        assert!(c.ok);
        for (a, b) in c.lambda_prime.iter().zip(&l) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let c = perturbed_eigs_check(&[0.0, 3.0, 1.5], &Matrix::identity(3)).unwrap();
        assert!(c.max_shift < 1e-12);
        assert!(c.lambda_prime[0] > c.lambda_prime[2]);
    }

    #[test]
    fn contract_violations() {
        assert!(perturbed_eigs_check(&[1.0, 1.5], &Matrix::identity(2)).is_err());
        assert!(perturbed_eigs_check(&[3.0, 0.0], &Matrix::identity(3)).is_err());
        assert!(perturbed_eigs_check(&[3.0, 0.0], &Matrix::diagonal(&[2.0, 1.0])).is_err());
    }

    #[test]
    fn far_from_identity_still_reports() {
        // Rotation-like h mixes the eigenvalues into a complex pair.
        let h = Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let c = perturbed_eigs_check(&[0.6, -0.6], &h).unwrap();
        assert!(!c.real_positive && !c.ok);
        assert_eq!(c.eigenvalues.len(), 2);
        let h = Matrix::from_rows(&[vec![1.0, 10.0], vec![0.0, 1.0]]).unwrap();
        let c = perturbed_eigs_check(&[2.0, 0.0], &h).unwrap();
        assert_eq!(c.lambda_prime.len(), 2);
    }
}
