//! Explicit probability tables over small domains.

use crate::domain::{enumerate_states, DomainSpec, EnergyModel};
use crate::error::{Error, Result};
use crate::kernels::log_sum_exp;

/// Target given by a table of log-masses, extended off the lattice by
/// tensor-product Lagrange interpolation in each coordinate. On binary
/// `{0,1}` alphabets this is the multilinear extension
/// `sum_a prod_n x_n^{a_n} (1 - x_n)^{1 - a_n} ln p_a`.
#[derive(Debug, Clone)]
pub struct TabularModel {
    spec: DomainSpec,
    /// Log-mass per state in enumeration order, as supplied.
    log_table: Vec<f64>,
    log_z: f64,
    /// Level indices of every state, in enumeration order.
    levels: Vec<Vec<usize>>,
}

impl TabularModel {
    /// `probs` is indexed in enumeration order. Masses are used as given for
    /// the energy; [`Self::probabilities`] is the normalized view.
    pub fn new(spec: DomainSpec, probs: &[f64]) -> Result<Self> {
        let n = spec.enumerable_count(crate::domain::ENUMERATION_CAP)?;
        if probs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::param("probs", format!("masses must be positive and finite, got {p}")));
        }
        let log_table: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
        let log_z = log_sum_exp(&log_table);
        let levels = enumerate_states(&spec)?
            .map(|st| (0..spec.dim()).map(|i| spec.level_index(i, st[i]).unwrap()).collect())
            .collect();
        Ok(Self {
            spec,
            log_table,
            log_z,
            levels,
        })
    }

    pub fn log_table(&self) -> &[f64] {
        &self.log_table
    }

    /// Normalized probabilities in enumeration order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.log_table.iter().map(|l| (l - self.log_z).exp()).collect()
    }

    /// Sum of the supplied masses.
    pub fn raw_total(&self) -> f64 {
        self.log_z.exp()
    }

    /// Lagrange basis values and derivatives for coordinate `i` at `x`.
    fn basis(&self, i: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
        let levels = self.spec.alphabet(i);
        let m = levels.len();
        let mut vals = vec![1.0; m];
        let mut ders = vec![0.0; m];
        for k in 0..m {
            for j in 0..m {
                if j == k {
                    continue;
                }
                let denom = levels[k] - levels[j];
                let factor = (x - levels[j]) / denom;
                ders[k] = ders[k] * factor + vals[k] / denom;
                vals[k] *= factor;
            }
        }
        (vals, ders)
    }

    fn bases(&self, x: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
        assert_eq!(x.len(), self.spec.dim(), "input length must match the domain");
        (0..self.spec.dim()).map(|i| self.basis(i, x[i])).collect()
    }
}

impl EnergyModel for TabularModel {
    fn domain(&self) -> &DomainSpec {
        &self.spec
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let bases = self.bases(x);
        self.levels
            .iter()
            .zip(&self.log_table)
            .map(|(idx, lp)| {
                let w: f64 = idx.iter().enumerate().map(|(i, &k)| bases[i].0[k]).product();
                w * lp
            })
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let bases = self.bases(x);
        let d = self.spec.dim();
        let mut grad = vec![0.0; d];
        for (idx, lp) in self.levels.iter().zip(&self.log_table) {
            for (i, g) in grad.iter_mut().enumerate() {
                let mut term = bases[i].1[idx[i]];
                for j in (0..d).filter(|&j| j != i) {
                    term *= bases[j].0[idx[j]];
                }
                *g += term * lp;
            }
        }
        grad
    }
}

/// Four binary variables with a dominant mode at `0000`, secondary modes at
/// `1110` and `1111`, and a flat floor elsewhere.
pub fn bernoulli4d() -> TabularModel {
    let mut probs = [5.882e-6; 16];
    probs[0b0000] = 0.588204;
    probs[0b1110] = 0.294102;
    probs[0b1111] = 0.117641;
    TabularModel::new(DomainSpec::binary(4), &probs).expect("static table is valid")
}
