//! Gibbs-with-gradients: change one coordinate, chosen by a softmax over
//! first-order estimates of the energy change, then MH-correct.

use rand::Rng;

use crate::domain::{DiscreteState, DomainSpec, EnergyModel};

use super::mh_accept;
use super::proposal::sample_log_weights;

/// Candidate moves `(coord, level)` of `theta` with scores
/// `0.5 * g_i * (v - theta_i)`; levels equal to the current value are skipped.
pub fn gwg_candidates(theta: &[f64], grad: &[f64], spec: &DomainSpec) -> (Vec<(usize, usize)>, Vec<f64>) {
    let mut moves = Vec::new();
    let mut scores = Vec::new();
    for i in 0..spec.dim() {
        for (k, &v) in spec.alphabet(i).iter().enumerate() {
            if v != theta[i] {
                moves.push((i, k));
                scores.push(0.5 * grad[i] * (v - theta[i]));
            }
        }
    }
    (moves, scores)
}

fn log_prob_of(moves: &[(usize, usize)], scores: &[f64], mv: (usize, usize)) -> f64 {
    let z = crate::kernels::log_sum_exp(scores);
    let k = moves.iter().position(|&m| m == mv).expect("move is a candidate");
    scores[k] - z
}

pub fn gwg_step<M: EnergyModel + ?Sized, R: Rng + ?Sized>(
    theta: &DiscreteState,
    model: &M,
    rng: &mut R,
) -> (DiscreteState, bool) {
    let spec = model.domain();
    let grad = model.gradient(theta);
    let (moves, scores) = gwg_candidates(theta, &grad, spec);
    if moves.is_empty() {
        // Single-state domain.
        return (theta.clone(), true);
    }
    let (pick, log_fwd) = sample_log_weights(&scores, rng.gen::<f64>());
    let (coord, level) = moves[pick];
    let mut proposal = theta.clone();
    proposal[coord] = spec.alphabet(coord)[level];
    if !model.is_feasible(&proposal) {
        rng.gen::<f64>();
        return (theta.clone(), false);
    }
    let grad_rev = model.gradient(&proposal);
    let (rev_moves, rev_scores) = gwg_candidates(&proposal, &grad_rev, spec);
    let back = spec
        .level_index(coord, theta[coord])
        .expect("current state is on the lattice");
    let log_rev = log_prob_of(&rev_moves, &rev_scores, (coord, back));
    let log_ratio = model.energy(&proposal) - model.energy(theta) + log_rev - log_fwd;
    let (accepted, _) = mh_accept(log_ratio, rng);
    if accepted {
        (proposal, true)
    } else {
        (theta.clone(), false)
    }
}
