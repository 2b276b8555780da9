//! Energy models with analytic gradients of their continuous extensions.

pub mod ising;
pub mod mlp;
pub mod tabular;
pub mod tsp;

pub use ising::{ising_3x3, IsingModel};
pub use mlp::{binary_mlp, load_regression_csv, synthetic_regression, BinaryMlpModel, RegressionData};
pub use tabular::{bernoulli4d, TabularModel};
pub use tsp::{eil14, tsp_from_tsplib, TspModel};
