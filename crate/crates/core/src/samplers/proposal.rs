//! Per-coordinate categorical proposal tables.
//!
//! Every proposal in this crate (DLP, denoising) is a table of log-weights,
//! one row per coordinate and one entry per alphabet level. The same table is
//! used both to sample and to score candidates, so MH ratios never recompute
//! the weights along a different path.

use rand::Rng;

use crate::domain::{DiscreteState, DomainSpec, Structure};

/// Index drawn by cumulative-sum inversion of a single uniform, scanning the
/// weights in order. Returns the index and its normalized log-probability.
pub fn sample_log_weights(log_weights: &[f64], u: f64) -> (usize, f64) {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (k, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        acc += w;
        chosen = Some(k);
        if target < acc {
            break;
        }
    }
    let k = chosen.expect("at least one finite log-weight");
    (k, log_weights[k] - max - total.ln())
}

fn log_normalizer(log_weights: &[f64]) -> f64 {
    crate::kernels::log_sum_exp(log_weights)
}

#[derive(Debug, Clone)]
pub struct CategoricalTable {
    logits: Vec<Vec<f64>>,
    structure: Structure,
}

impl CategoricalTable {
    pub fn new(logits: Vec<Vec<f64>>, structure: Structure) -> Self {
        if let Structure::Permutation { n } = structure {
            assert_eq!(logits.len(), n * n, "permutation table needs n^2 rows");
            assert!(logits.iter().all(|row| row.len() == 2), "permutation table needs binary levels");
        }
        Self { logits, structure }
    }

    pub fn logits(&self) -> &[Vec<f64>] {
        &self.logits
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// Normalized per-coordinate probabilities (factorized view).
    pub fn coordinate_probs(&self, coord: usize) -> Vec<f64> {
        let row = &self.logits[coord];
        let z = log_normalizer(row);
        row.iter().map(|l| (l - z).exp()).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, spec: &DomainSpec, rng: &mut R) -> DiscreteState {
        match self.structure {
            Structure::Factorized => DiscreteState(
                self.logits
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let (k, _) = sample_log_weights(row, rng.gen::<f64>());
                        spec.alphabet(i)[k]
                    })
                    .collect(),
            ),
            Structure::Permutation { n } => {
                let mut values = vec![0.0; n * n];
                let mut used = vec![false; n];
                for row in 0..n {
                    let (free, weights) = self.row_weights(row, &used);
                    let (k, _) = sample_log_weights(&weights, rng.gen::<f64>());
                    let col = free[k];
                    used[col] = true;
                    values[row * n + col] = 1.0;
                }
                DiscreteState(values)
            }
        }
    }

    /// Log-probability of `state` under the table; `-inf` if unreachable.
    pub fn log_prob(&self, spec: &DomainSpec, state: &[f64]) -> f64 {
        match self.structure {
            Structure::Factorized => self
                .logits
                .iter()
                .enumerate()
                .map(|(i, row)| match spec.level_index(i, state[i]) {
                    Some(k) => row[k] - log_normalizer(row),
                    None => f64::NEG_INFINITY,
                })
                .sum(),
            Structure::Permutation { n } => {
                let Some(cols) = permutation_columns(state, n) else {
                    return f64::NEG_INFINITY;
                };
                let mut used = vec![false; n];
                let mut total = 0.0;
                for (row, &col) in cols.iter().enumerate() {
                    let (free, weights) = self.row_weights(row, &used);
                    let k = free.iter().position(|&c| c == col).expect("column is free");
                    total += weights[k] - log_normalizer(&weights);
                    used[col] = true;
                }
                total
            }
        }
    }

    /// Free columns of `row` and the log-weight of placing the row's single
    /// one in each of them. The weight of a one-hot row pattern is the sum of
    /// per-entry logits; the part shared by all patterns is dropped.
    fn row_weights(&self, row: usize, used: &[bool]) -> (Vec<usize>, Vec<f64>) {
        let n = used.len();
        let free: Vec<usize> = (0..n).filter(|&c| !used[c]).collect();
        let weights = free
            .iter()
            .map(|&c| {
                let entry = &self.logits[row * n + c];
                entry[1] - entry[0]
            })
            .collect();
        (free, weights)
    }
}

/// Column of the single one in each row, if `state` is an `n x n`
/// permutation matrix.
pub fn permutation_columns(state: &[f64], n: usize) -> Option<Vec<usize>> {
    if state.len() != n * n {
        return None;
    }
    let mut cols = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for row in 0..n {
        let entries = &state[row * n..(row + 1) * n];
        let mut col = None;
        for (c, &v) in entries.iter().enumerate() {
            if v == 1.0 {
                if col.is_some() {
                    return None;
                }
                col = Some(c);
            } else if v != 0.0 {
                return None;
            }
        }
        let c = col?;
        if seen[c] {
            return None;
        }
        seen[c] = true;
        cols.push(c);
    }
    Some(cols)
}
