//! Parallel tempering over DMALA replicas.

use rand::Rng;

use crate::domain::{DiscreteState, DomainSpec, EnergyModel, Structure};
use crate::error::{Error, Result};

use super::dmala::dmala_step;

#[derive(Debug, Clone, PartialEq)]
pub struct PTConfig {
    pub num_temps: usize,
    /// Inverse temperature of the hottest replica; the ladder is geometric
    /// from 1 down to this value.
    pub min_beta: f64,
    pub swap_interval: usize,
}

impl Default for PTConfig {
    fn default() -> Self {
        Self {
            num_temps: 5,
            min_beta: 0.1,
            swap_interval: 4,
        }
    }
}

impl PTConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_temps < 2 {
            return Err(Error::param(
                "num_temps",
                format!("parallel tempering needs at least 2 temperatures, got {}", self.num_temps),
            ));
        }
        if !(self.min_beta > 0.0 && self.min_beta < 1.0) {
            return Err(Error::param("min_beta", format!("must lie in (0, 1), got {}", self.min_beta)));
        }
        if self.swap_interval == 0 {
            return Err(Error::param("swap_interval", "must be at least 1"));
        }
        Ok(())
    }

    /// `beta_k = r^k` with `r = min_beta^(1 / (K - 1))`.
    pub fn ladder(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let ratio = self.min_beta.powf(1.0 / (self.num_temps - 1) as f64);
        Ok((0..self.num_temps).map(|k| ratio.powi(k as i32)).collect())
    }
}

/// `beta * U` as a model in its own right.
pub struct Tempered<'a, M: ?Sized> {
    pub inner: &'a M,
    pub beta: f64,
}

impl<M: EnergyModel + ?Sized> EnergyModel for Tempered<'_, M> {
    fn domain(&self) -> &DomainSpec {
        self.inner.domain()
    }
    fn energy(&self, x: &[f64]) -> f64 {
        self.beta * self.inner.energy(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.inner.gradient(x);
        g.iter_mut().for_each(|v| *v *= self.beta);
        g
    }
    fn structure(&self) -> Structure {
        self.inner.structure()
    }
    fn is_feasible(&self, x: &[f64]) -> bool {
        self.inner.is_feasible(x)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PtStepStats {
    /// Accepted DMALA moves summed over replicas.
    pub moves_accepted: u64,
    pub moves_attempted: u64,
    pub swaps_accepted: u64,
    pub swaps_attempted: u64,
}

/// Swap acceptance probability between adjacent replicas.
pub fn swap_probability(beta_k: f64, beta_next: f64, energy_k: f64, energy_next: f64) -> f64 {
    let log_ratio = (beta_k - beta_next) * (energy_next - energy_k);
    if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

/// Advances every replica by one tempered DMALA step; when
/// `(step_index + 1)` is a multiple of the swap interval, attempts swaps on
/// the adjacent pairs `(0,1), (1,2), ...` in order. `replicas[0]` is the
/// untempered chain.
pub fn pt_dmala_step<M: EnergyModel + ?Sized, R: Rng + ?Sized>(
    replicas: &mut [DiscreteState],
    model: &M,
    alpha: f64,
    pt: &PTConfig,
    step_index: usize,
    rng: &mut R,
) -> Result<PtStepStats> {
    let betas = pt.ladder()?;
    if replicas.len() != betas.len() {
        return Err(Error::DimensionMismatch {
            expected: betas.len(),
            got: replicas.len(),
        });
    }
    let mut stats = PtStepStats::default();
    for (state, &beta) in replicas.iter_mut().zip(&betas) {
        let tempered = Tempered { inner: model, beta };
        let (next, accepted) = dmala_step(state, &tempered, alpha, rng);
        *state = next;
        stats.moves_attempted += 1;
        stats.moves_accepted += accepted as u64;
    }
    if (step_index + 1) % pt.swap_interval == 0 {
        for k in 0..betas.len() - 1 {
            let e_k = model.energy(&replicas[k]);
            let e_next = model.energy(&replicas[k + 1]);
            let prob = swap_probability(betas[k], betas[k + 1], e_k, e_next);
            stats.swaps_attempted += 1;
            if rng.gen::<f64>() < prob {
                replicas.swap(k, k + 1);
                stats.swaps_accepted += 1;
            }
        }
    }
    Ok(stats)
}
