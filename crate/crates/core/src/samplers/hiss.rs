//! Auxiliary-variable Gibbs sweep.
//!
//! Each inner sweep draws `theta_a ~ q_noise(. | theta)`, proposes
//! `theta' ~ q_denoise(. | theta_a)` independently per coordinate, corrects
//! the proposal with a Metropolis-within-Gibbs (MwG) step on
//! `p(theta | theta_a)`, then refines with `L` conditional DMALA steps that
//! keep the same `theta_a`. Only the state after the last of `G` inner sweeps
//! is emitted as a sample.

use rand::Rng;

use crate::domain::{AuxState, DiscreteState, DomainSpec, EnergyModel, JointState, Structure};
use crate::error::Result;
use crate::kernels::Kernel;

use super::dmala::conditional_dmala_step;
use super::mh_accept;
use super::proposal::CategoricalTable;
use super::SamplerConfig;

pub fn hiss_noise<R: Rng + ?Sized>(theta: &[f64], kernel: &Kernel, rng: &mut R) -> AuxState {
    kernel.noise(theta, rng)
}

/// Denoising table: coordinate `i`, level `v` gets log-weight
/// `ln q(theta_a_i | v)`, which for the logistic kernel is
/// `-2 ln cosh((theta_a_i - v) / (2 eta))` plus a constant.
pub fn denoise_table(
    theta_a: &[f64],
    kernel: &Kernel,
    spec: &DomainSpec,
    structure: Structure,
) -> CategoricalTable {
    let logits = (0..spec.dim())
        .map(|i| {
            spec.alphabet(i)
                .iter()
                .map(|&v| kernel.log_density(theta_a[i], v))
                .collect()
        })
        .collect();
    CategoricalTable::new(logits, structure)
}

/// Draws a denoised proposal; depends on `theta_a` only.
pub fn hiss_denoise<R: Rng + ?Sized>(
    theta_a: &[f64],
    kernel: &Kernel,
    spec: &DomainSpec,
    structure: Structure,
    rng: &mut R,
) -> DiscreteState {
    denoise_table(theta_a, kernel, spec, structure).sample(spec, rng)
}

/// The individual log terms of the MwG acceptance ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwgTerms {
    pub energy_proposed: f64,
    pub energy_current: f64,
    /// `ln q_noise(theta_a | theta')`
    pub log_noise_proposed: f64,
    /// `ln q_noise(theta_a | theta)`
    pub log_noise_current: f64,
    /// `ln q_denoise(theta | theta_a)`
    pub log_denoise_current: f64,
    /// `ln q_denoise(theta' | theta_a)`
    pub log_denoise_proposed: f64,
}

impl MwgTerms {
    pub fn log_ratio(&self) -> f64 {
        (self.energy_proposed - self.energy_current)
            + (self.log_noise_proposed - self.log_noise_current)
            + (self.log_denoise_current - self.log_denoise_proposed)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn mwg_terms<M: EnergyModel + ?Sized>(
    theta_prev: &[f64],
    theta_a: &[f64],
    theta_prop: &[f64],
    table: &CategoricalTable,
    model: &M,
    kernel: &Kernel,
) -> MwgTerms {
    let spec = model.domain();
    MwgTerms {
        energy_proposed: model.energy(theta_prop),
        energy_current: model.energy(theta_prev),
        log_noise_proposed: kernel.log_noise_density(theta_a, theta_prop),
        log_noise_current: kernel.log_noise_density(theta_a, theta_prev),
        log_denoise_current: table.log_prob(spec, theta_prev),
        log_denoise_proposed: table.log_prob(spec, theta_prop),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwgOutcome {
    pub accepted: bool,
    /// `min(1, ratio)`; computed even when the correction is disabled.
    pub accept_prob: f64,
}

/// MwG correction of a denoised proposal. With `mh_correction == false` the
/// proposal is always taken (ablation), but the ratio is still evaluated.
#[allow(clippy::too_many_arguments)]
pub fn hiss_mwg_accept<M: EnergyModel + ?Sized, R: Rng + ?Sized>(
    theta_prev: &DiscreteState,
    theta_a: &AuxState,
    theta_prop: &DiscreteState,
    table: &CategoricalTable,
    model: &M,
    kernel: &Kernel,
    mh_correction: bool,
    rng: &mut R,
) -> (DiscreteState, MwgOutcome) {
    if !model.is_feasible(theta_prop) {
        rng.gen::<f64>();
        return (
            theta_prev.clone(),
            MwgOutcome {
                accepted: false,
                accept_prob: 0.0,
            },
        );
    }
    let terms = mwg_terms(theta_prev, theta_a, theta_prop, table, model, kernel);
    let (accepted, accept_prob) = mh_accept(terms.log_ratio(), rng);
    let accepted = accepted || !mh_correction;
    let next = if accepted {
        theta_prop.clone()
    } else {
        theta_prev.clone()
    };
    (
        next,
        MwgOutcome {
            accepted,
            accept_prob,
        },
    )
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepStats {
    pub mwg_accepted: u64,
    pub mwg_attempted: u64,
    pub mwg_accept_prob_sum: f64,
    pub refine_accepted: u64,
    pub refine_attempted: u64,
}

/// One outer iteration: `G` inner sweeps, returning the final state.
pub fn hiss_sweep<M: EnergyModel + ?Sized, R: Rng + ?Sized>(
    theta: &DiscreteState,
    model: &M,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<(DiscreteState, SweepStats)> {
    config.validate()?;
    let kernel = config.kernel()?;
    let spec = model.domain();
    let structure = model.structure();
    let mut stats = SweepStats::default();
    let mut current = theta.clone();
    for _ in 0..config.sweeps_g {
        let theta_a = hiss_noise(&current, &kernel, rng);
        let table = denoise_table(&theta_a, &kernel, spec, structure);
        let proposal = table.sample(spec, rng);
        let (init, outcome) = hiss_mwg_accept(
            &current,
            &theta_a,
            &proposal,
            &table,
            model,
            &kernel,
            config.mh_correction,
            rng,
        );
        stats.mwg_attempted += 1;
        stats.mwg_accepted += outcome.accepted as u64;
        stats.mwg_accept_prob_sum += outcome.accept_prob;

        let mut joint = JointState {
            theta: init,
            theta_a,
        };
        for _ in 0..config.refinements_l {
            let (next, accepted) = conditional_dmala_step(&joint, model, config.alpha, &kernel, rng);
            stats.refine_attempted += 1;
            stats.refine_accepted += accepted as u64;
            joint = next;
        }
        current = joint.theta;
    }
    Ok((current, stats))
}
