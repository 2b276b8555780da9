//! Builds the configured energy model.

use hiss::domain::{DiscreteState, DomainSpec, EnergyModel, Structure};
use hiss::models::{
    bernoulli4d, binary_mlp, eil14, load_regression_csv, synthetic_regression, tsp_from_tsplib, BinaryMlpModel,
    IsingModel, TabularModel, TspModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;
use crate::error::CliError;

pub enum AnyModel {
    Tabular(TabularModel),
    Ising(IsingModel),
    Tsp(TspModel),
    Mlp(BinaryMlpModel),
}

macro_rules! dispatch {
    ($self:expr, $m:ident => $body:expr) => {
        match $self {
            AnyModel::Tabular($m) => $body,
            AnyModel::Ising($m) => $body,
            AnyModel::Tsp($m) => $body,
            AnyModel::Mlp($m) => $body,
        }
    };
}

impl EnergyModel for AnyModel {
    fn domain(&self) -> &DomainSpec {
        dispatch!(self, m => m.domain())
    }
    fn energy(&self, x: &[f64]) -> f64 {
        dispatch!(self, m => m.energy(x))
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        dispatch!(self, m => m.gradient(x))
    }
    fn structure(&self) -> Structure {
        dispatch!(self, m => m.structure())
    }
    fn is_feasible(&self, x: &[f64]) -> bool {
        dispatch!(self, m => m.is_feasible(x))
    }
}

impl AnyModel {
    pub fn build(cfg: &ModelConfig) -> Result<Self, CliError> {
        Ok(match cfg {
            ModelConfig::Bernoulli4d => AnyModel::Tabular(bernoulli4d()),
            ModelConfig::Ising { side, a, b } => AnyModel::Ising(IsingModel::cross_diagonal(*side, *a, *b)?),
            ModelConfig::Tsp { path: None } => AnyModel::Tsp(eil14()),
            ModelConfig::Tsp { path: Some(p) } => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                AnyModel::Tsp(tsp_from_tsplib(&text)?)
            }
            ModelConfig::Mlp {
                csv,
                hidden,
                alphabet,
                rows,
                inputs,
                noise_sd,
                data_seed,
            } => {
                let data = match csv {
                    Some(p) => load_regression_csv(p)?,
                    None => {
                        let mut rng = ChaCha8Rng::seed_from_u64(*data_seed);
                        synthetic_regression(*rows, *inputs, *hidden, alphabet, *noise_sd, &mut rng)?.0
                    }
                };
                AnyModel::Mlp(binary_mlp(data, *hidden, alphabet)?)
            }
        })
    }

    pub fn tsp(&self) -> Option<&TspModel> {
        match self {
            AnyModel::Tsp(m) => Some(m),
            _ => None,
        }
    }

    pub fn mlp(&self) -> Option<&BinaryMlpModel> {
        match self {
            AnyModel::Mlp(m) => Some(m),
            _ => None,
        }
    }

    /// Starting state of a chain: a random tour for TSP, a uniformly random
    /// lattice point otherwise.
    pub fn initial_state(&self, rng: &mut ChaCha8Rng) -> DiscreteState {
        match self {
            AnyModel::Tsp(m) => {
                let tour = m.random_tour(rng);
                m.state_from_tour(&tour).expect("shuffled tour is valid")
            }
            _ => self.domain().random_state(rng),
        }
    }

    /// Compact text form of a state: the tour for TSP, level indices when
    /// every alphabet has at most 10 levels, else values joined by `;`.
    pub fn encode_state(&self, state: &[f64]) -> String {
        if let AnyModel::Tsp(m) = self {
            if let Ok(tour) = m.tour_from_state(state) {
                return tour.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("-");
            }
        }
        encode_levels(self.domain(), state)
    }
}

pub fn encode_levels(spec: &DomainSpec, state: &[f64]) -> String {
    let small = spec.alphabets().iter().all(|a| a.len() <= 10);
    let idx: Option<Vec<usize>> = (0..spec.dim()).map(|i| spec.level_index(i, state[i])).collect();
    match idx {
        Some(idx) if small => idx.iter().map(|k| char::from(b'0' + *k as u8)).collect(),
        _ => state.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
    }
}
