//! Entropy of a diagonal element from the coefficients `s_ij in [0, 1]`:
//! `h(t) = sum_{i,j} s_ij (t_i - t_j)^+`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::DiagParam;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyData {
    s: Vec<Vec<f64>>,
    t: DiagParam,
}

impl EntropyData {
    pub fn new(s: Vec<Vec<f64>>, t: DiagParam) -> Result<Self> {
        let k = t.dim();
        if s.len() != k || s.iter().any(|r| r.len() != k) {
            return Err(LabError::DimensionMismatch {
                expected: k,
                got: s.len(),
            });
        }
        for (i, row) in s.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) {
                    return Err(LabError::Domain(format!(
                        "s[{i}][{j}] = {x} is outside [0, 1]"
                    )));
                }
                if i == j && x != 0.0 {
                    return Err(LabError::Domain(format!("s[{i}][{i}] must be 0")));
                }
            }
        }
        Ok(EntropyData { s, t })
    }

    pub fn s(&self) -> &[Vec<f64>] {
        &self.s
    }

    pub fn t(&self) -> &DiagParam {
        &self.t
    }

    pub fn is_symmetric(&self) -> bool {
        let k = self.s.len();
        (0..k).all(|i| (0..i).all(|j| self.s[i][j] == self.s[j][i]))
    }

    pub fn transposed(&self) -> Self {
        let k = self.s.len();
        EntropyData {
            s: (0..k)
                .map(|i| (0..k).map(|j| self.s[j][i]).collect())
                .collect(),
            t: self.t.clone(),
        }
    }

    pub fn with_t(&self, t: DiagParam) -> Result<Self> {
        EntropyData::new(self.s.clone(), t)
    }
}

pub fn entropy_formula(data: &EntropyData) -> f64 {
    let t = data.t.as_slice();
    let mut h = 0.0;
    for (i, row) in data.s.iter().enumerate() {
        for (j, &s) in row.iter().enumerate() {
            h += s * (t[i] - t[j]).max(0.0);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: &[f64]) -> DiagParam {
        DiagParam::new(v.to_vec()).unwrap()
    }

    #[test]
    fn examples() {
        let zero = EntropyData::new(vec![vec![0.0; 3]; 3], t(&[1.0, 0.0, -1.0])).unwrap();
        assert_eq!(entropy_formula(&zero), 0.0);
        let ones: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        let haar = EntropyData::new(ones, t(&[1.0, 0.0, -1.0])).unwrap();
        assert_eq!(entropy_formula(&haar), 4.0);
        assert!(haar.is_symmetric());
    }

    #[test]
    fn invalid_data() {
        assert!(EntropyData::new(vec![vec![0.0, 1.5], vec![0.0, 0.0]], t(&[1.0, -1.0])).is_err());
        assert!(EntropyData::new(vec![vec![0.5, 0.0], vec![0.0, 0.0]], t(&[1.0, -1.0])).is_err());
        assert!(EntropyData::new(vec![vec![0.0; 3]; 3], t(&[1.0, -1.0])).is_err());
    }
}
