//! Markov kernels over discrete states.
//!
//! * [`dmala`]: discrete Langevin proposal with MH correction, plus the
//!   variant conditioned on a fixed auxiliary variable.
//! * [`gwg`]: single-coordinate gradient-informed flips.
//! * [`hiss`]: the auxiliary-variable Gibbs sweep (noise, denoise, MwG
//!   correction, conditional refinement).
//! * [`pt`]: replica exchange over tempered DMALA chains.
//!
//! Energy-call accounting follows a fixed convention: a gradient-based MH step
//! evaluates the gradient at the current and proposed state and the energy at
//! both (4 units); an MwG correction evaluates two energies (2 units); a swap
//! attempt evaluates the energies of both replicas (2 units).

pub mod dmala;
pub mod gwg;
pub mod hiss;
pub mod proposal;
pub mod pt;

use rand::Rng;

use crate::domain::DiscreteState;
use crate::error::{Error, Result};
use crate::kernels::Kernel;

pub use dmala::{conditional_dmala_step, dlp_proposal, dlp_table, dmala_step};
pub use gwg::gwg_step;
pub use hiss::{hiss_denoise, hiss_mwg_accept, hiss_noise, hiss_sweep, SweepStats};
pub use proposal::CategoricalTable;
pub use pt::{pt_dmala_step, PTConfig, PtStepStats, Tempered};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Logistic,
    /// Variance-preserving Gaussian with the given noise variance.
    GaussianVp { sigma2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub alpha: f64,
    pub eta: f64,
    pub sweeps_g: usize,
    pub refinements_l: usize,
    pub seed: u64,
    pub kernel_kind: KernelKind,
    pub mh_correction: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            eta: 4.0,
            sweeps_g: 5,
            refinements_l: 2,
            seed: 0,
            kernel_kind: KernelKind::Logistic,
            mh_correction: true,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be positive, got {}", self.alpha)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::param("eta", format!("must be positive, got {}", self.eta)));
        }
        if self.sweeps_g == 0 {
            return Err(Error::param("sweeps_g", "need at least one Gibbs sweep"));
        }
        self.kernel()?;
        Ok(())
    }

    pub fn kernel(&self) -> Result<Kernel> {
        match self.kernel_kind {
            KernelKind::Logistic => Kernel::logistic(self.eta),
            KernelKind::GaussianVp { sigma2 } => Kernel::gaussian_vp(sigma2),
        }
    }
}

/// Recorded path and counters of one chain.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainTrace {
    pub samples: Vec<DiscreteState>,
    pub mwg_accept_count: u64,
    pub mwg_attempt_count: u64,
    /// Sum of `min(1, ratio)` over MwG attempts, kept even when the
    /// correction itself is switched off.
    pub mwg_accept_prob_sum: f64,
    pub refine_accept_count: u64,
    pub refine_attempt_count: u64,
    pub swap_accept_count: u64,
    pub swap_attempt_count: u64,
    pub energy_calls: u64,
    pub wall_time: f64,
}

impl ChainTrace {
    pub fn absorb(&mut self, stats: &SweepStats) {
        self.mwg_accept_count += stats.mwg_accepted;
        self.mwg_attempt_count += stats.mwg_attempted;
        self.mwg_accept_prob_sum += stats.mwg_accept_prob_sum;
        self.refine_accept_count += stats.refine_accepted;
        self.refine_attempt_count += stats.refine_attempted;
    }

    pub fn record_step(&mut self, accepted: bool) {
        self.refine_attempt_count += 1;
        if accepted {
            self.refine_accept_count += 1;
        }
    }

    pub fn mwg_acceptance(&self) -> Option<f64> {
        (self.mwg_attempt_count > 0)
            .then(|| self.mwg_accept_count as f64 / self.mwg_attempt_count as f64)
    }

    pub fn mean_mwg_accept_prob(&self) -> Option<f64> {
        (self.mwg_attempt_count > 0).then(|| self.mwg_accept_prob_sum / self.mwg_attempt_count as f64)
    }

    pub fn refine_acceptance(&self) -> Option<f64> {
        (self.refine_attempt_count > 0)
            .then(|| self.refine_accept_count as f64 / self.refine_attempt_count as f64)
    }
}

/// MH decision on a log acceptance ratio. Always consumes one uniform so the
/// random stream does not depend on the ratio's sign.
pub(crate) fn mh_accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> (bool, f64) {
    let u: f64 = rng.gen();
    let prob = if log_ratio >= 0.0 { 1.0 } else { log_ratio.exp() };
    (u < prob, prob)
}
