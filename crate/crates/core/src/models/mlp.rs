//! Two-layer tanh network with weights on a finite alphabet.
//!
//! `f(x) = W2 tanh(W1 x)`, no biases, scalar output. The state vector holds
//! `W1` row-major (`hidden x inputs`) followed by `W2` (`hidden`).

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::domain::{DomainSpec, EnergyModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl RegressionData {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dataset(format!("{} feature rows but {} targets", x.len(), y.len())));
        }
        if x.is_empty() {
            return Err(Error::Dataset("no rows".into()));
        }
        let width = x[0].len();
        if width == 0 {
            return Err(Error::Dataset("no feature columns".into()));
        }
        if let Some(r) = x.iter().position(|row| row.len() != width) {
            return Err(Error::Dataset(format!("row {r} has {} features, expected {width}", x[r].len())));
        }
        if x.iter().flatten().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Dataset("non-finite value".into()));
        }
        Ok(Self { x, y })
    }

    pub fn inputs(&self) -> usize {
        self.x[0].len()
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Reads a comma-separated file with a header row; the last column is the
/// target.
pub fn load_regression_csv(path: impl AsRef<Path>) -> Result<RegressionData> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
        let values: Vec<f64> = record
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Dataset(format!("{} row {}: {e}", path.display(), r + 2)))?;
        if values.len() < 2 {
            return Err(Error::Dataset(format!("{} row {}: need features and a target", path.display(), r + 2)));
        }
        let (feat, target) = values.split_at(values.len() - 1);
        x.push(feat.to_vec());
        y.push(target[0]);
    }
    RegressionData::new(x, y)
}

/// Data from a random teacher network of the same architecture with weights
/// drawn from `alphabet`, plus Gaussian label noise. Features are standard
/// normal.
pub fn synthetic_regression<R: Rng + ?Sized>(
    rows: usize,
    inputs: usize,
    hidden: usize,
    alphabet: &[f64],
    noise_sd: f64,
    rng: &mut R,
) -> Result<(RegressionData, Vec<f64>)> {
    if rows == 0 || inputs == 0 || hidden == 0 {
        return Err(Error::param("rows/inputs/hidden", "must all be positive"));
    }
    if alphabet.is_empty() {
        return Err(Error::param("alphabet", "must be nonempty"));
    }
    let d = hidden * inputs + hidden;
    let teacher: Vec<f64> = (0..d).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
    let x: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..inputs).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let y = x
        .iter()
        .map(|xi| {
            let eps: f64 = rng.sample(StandardNormal);
            forward(&teacher, inputs, hidden, xi).0 + noise_sd * eps
        })
        .collect();
    Ok((RegressionData::new(x, y)?, teacher))
}

/// Output and hidden activations.
fn forward(w: &[f64], inputs: usize, hidden: usize, x: &[f64]) -> (f64, Vec<f64>) {
    let (w1, w2) = w.split_at(hidden * inputs);
    let h: Vec<f64> = (0..hidden)
        .map(|j| {
            w1[j * inputs..(j + 1) * inputs]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .tanh()
        })
        .collect();
    let out = w2.iter().zip(&h).map(|(a, b)| a * b).sum();
    (out, h)
}

#[derive(Debug, Clone)]
pub struct BinaryMlpModel {
    inputs: usize,
    hidden: usize,
    data: RegressionData,
    spec: DomainSpec,
}

impl BinaryMlpModel {
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn data(&self) -> &RegressionData {
        &self.data
    }

    pub fn predict(&self, w: &[f64], x: &[f64]) -> f64 {
        forward(w, self.inputs, self.hidden, x).0
    }

    pub fn mse(&self, w: &[f64]) -> f64 {
        -self.energy(w) / self.data.len() as f64
    }
}

impl EnergyModel for BinaryMlpModel {
    fn domain(&self) -> &DomainSpec {
        &self.spec
    }

    /// `-sum_i (f(x_i) - y_i)^2`
    fn energy(&self, w: &[f64]) -> f64 {
        assert_eq!(w.len(), self.spec.dim(), "input length must match the domain");
        -self
            .data
            .x
            .iter()
            .zip(&self.data.y)
            .map(|(x, y)| {
                let r = self.predict(w, x) - y;
                r * r
            })
            .sum::<f64>()
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.spec.dim(), "input length must match the domain");
        let (n_in, n_h) = (self.inputs, self.hidden);
        let w2 = &w[n_h * n_in..];
        let mut grad = vec![0.0; w.len()];
        for (x, y) in self.data.x.iter().zip(&self.data.y) {
            let (out, h) = forward(w, n_in, n_h, x);
            let r = out - y;
            for j in 0..n_h {
                grad[n_h * n_in + j] -= 2.0 * r * h[j];
                let back = 2.0 * r * w2[j] * (1.0 - h[j] * h[j]);
                for (k, xk) in x.iter().enumerate() {
                    grad[j * n_in + k] -= back * xk;
                }
            }
        }
        grad
    }
}

pub fn binary_mlp(data: RegressionData, hidden: usize, alphabet: &[f64]) -> Result<BinaryMlpModel> {
    if hidden == 0 {
        return Err(Error::param("hidden", "must be positive"));
    }
    let inputs = data.inputs();
    let d = hidden * inputs + hidden;
    let spec = DomainSpec::uniform(d, alphabet)?;
    Ok(BinaryMlpModel {
        inputs,
        hidden,
        data,
        spec,
    })
}
