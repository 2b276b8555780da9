use crate::domain::{DomainSpec, EnergyModel};
use crate::error::{Error, Result};

/// `U(theta) = a theta^T W theta + b sum_i theta_i` on `{-1,+1}^{n^2}`.
#[derive(Debug, Clone)]
pub struct IsingModel {
    side: usize,
    w: Vec<f64>,
    a: f64,
    b: f64,
    spec: DomainSpec,
}

impl IsingModel {
    /// `w` is a dense row-major `n^2 x n^2` symmetric matrix.
    pub fn new(side: usize, w: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        if side == 0 {
            return Err(Error::EmptyDomain);
        }
        let d = side * side;
        if w.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: w.len(),
            });
        }
        for i in 0..d {
            for j in 0..i {
                if w[i * d + j] != w[j * d + i] {
                    return Err(Error::param("w", format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::param("a/b", "must be finite"));
        }
        Ok(Self {
            side,
            w,
            a,
            b,
            spec: DomainSpec::spins(d),
        })
    }

    /// `W[i][j] = 1` iff `i + j = n^2 - 1`.
    pub fn cross_diagonal(side: usize, a: f64, b: f64) -> Result<Self> {
        let d = side * side;
        let mut w = vec![0.0; d * d];
        for i in 0..d {
            w[i * d + (d - 1 - i)] = 1.0;
        }
        Self::new(side, w, a, b)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn interaction(&self) -> &[f64] {
        &self.w
    }

    fn w_times(&self, x: &[f64]) -> Vec<f64> {
        let d = self.spec.dim();
        assert_eq!(x.len(), d, "input length must match the domain");
        (0..d)
            .map(|i| self.w[i * d..(i + 1) * d].iter().zip(x).map(|(w, v)| w * v).sum())
            .collect()
    }
}

impl EnergyModel for IsingModel {
    fn domain(&self) -> &DomainSpec {
        &self.spec
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let wx = self.w_times(x);
        let quad: f64 = x.iter().zip(&wx).map(|(a, b)| a * b).sum();
        self.a * quad + self.b * x.iter().sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.w_times(x)
            .into_iter()
            .map(|v| 2.0 * self.a * v + self.b)
            .collect()
    }
}

pub fn ising_3x3(a: f64, b: f64) -> IsingModel {
    IsingModel::cross_diagonal(3, a, b).expect("3x3 lattice is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{enumerate_states, gradient_relative_error};

    #[test]
    fn cross_diagonal_shape() {
        let m = ising_3x3(0.5, 0.1);
        let w = m.interaction();
        assert_eq!(w.iter().filter(|&&v| v == 1.0).count(), 9);
        assert_eq!(w[8], 1.0);
        assert_eq!(w[4 * 9 + 4], 1.0);
    }

    #[test]
    fn spin_flip_symmetry_without_bias() {
        let m = ising_3x3(0.5, 0.0);
        for s in enumerate_states(m.domain()).unwrap() {
            let neg: Vec<f64> = s.iter().map(|v| -v).collect();
            assert_eq!(m.energy(&s), m.energy(&neg));
        }
    }

    #[test]
    fn gradient_is_exact() {
        let m = ising_3x3(0.5, 0.1);
        let x = [0.3, -0.7, 1.0, 0.1, -1.0, 0.5, 0.9, -0.2, 0.0];
        assert!(gradient_relative_error(&m, &x, 1e-4) < 1e-10);
    }

    #[test]
    fn asymmetric_w_rejected() {
        let mut w = vec![0.0; 16];
        w[1] = 1.0;
        assert!(IsingModel::new(2, w, 1.0, 0.0).is_err());
    }
}
