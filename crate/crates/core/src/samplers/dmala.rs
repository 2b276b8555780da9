//! Discrete Langevin proposal (DLP) and its Metropolis-adjusted kernel.

use rand::Rng;

use crate::domain::{DiscreteState, DomainSpec, EnergyModel, JointState, Structure};
use crate::kernels::Kernel;

use super::mh_accept;
use super::proposal::CategoricalTable;

/// Per-coordinate DLP log-weights
/// `0.5 * g_i * (v - theta_i) - (v - theta_i)^2 / (2 alpha)` over each alphabet.
pub fn dlp_table(
    theta: &[f64],
    grad: &[f64],
    alpha: f64,
    spec: &DomainSpec,
    structure: Structure,
) -> CategoricalTable {
    assert_eq!(theta.len(), spec.dim());
    assert_eq!(grad.len(), spec.dim(), "gradient length must match the domain");
    let logits = (0..spec.dim())
        .map(|i| {
            spec.alphabet(i)
                .iter()
                .map(|&v| {
                    let step = v - theta[i];
                    0.5 * grad[i] * step - step * step / (2.0 * alpha)
                })
                .collect()
        })
        .collect();
    CategoricalTable::new(logits, structure)
}

pub fn dlp_proposal<R: Rng + ?Sized>(
    theta: &[f64],
    grad: &[f64],
    alpha: f64,
    spec: &DomainSpec,
    rng: &mut R,
) -> DiscreteState {
    dlp_table(theta, grad, alpha, spec, Structure::Factorized).sample(spec, rng)
}

/// Log MH ratio of moving `from -> to` under DLP proposals built from the
/// given energy and gradient.
pub fn dlp_log_ratio(
    from: &[f64],
    to: &[f64],
    energy: impl Fn(&[f64]) -> f64,
    gradient: impl Fn(&[f64]) -> Vec<f64>,
    alpha: f64,
    spec: &DomainSpec,
    structure: Structure,
) -> f64 {
    let forward = dlp_table(from, &gradient(from), alpha, spec, structure);
    let reverse = dlp_table(to, &gradient(to), alpha, spec, structure);
    energy(to) - energy(from) + reverse.log_prob(spec, from) - forward.log_prob(spec, to)
}

/// One DLP-MH step on an arbitrary differentiable target.
#[allow(clippy::too_many_arguments)]
pub(crate) fn dlp_mh_step<R: Rng + ?Sized>(
    theta: &DiscreteState,
    energy: impl Fn(&[f64]) -> f64,
    gradient: impl Fn(&[f64]) -> Vec<f64>,
    feasible: impl Fn(&[f64]) -> bool,
    alpha: f64,
    spec: &DomainSpec,
    structure: Structure,
    rng: &mut R,
) -> (DiscreteState, bool) {
    let forward = dlp_table(theta, &gradient(theta), alpha, spec, structure);
    let proposal = forward.sample(spec, rng);
    if !feasible(&proposal) {
        rng.gen::<f64>();
        return (theta.clone(), false);
    }
    let reverse = dlp_table(&proposal, &gradient(&proposal), alpha, spec, structure);
    let log_ratio = energy(&proposal) - energy(theta) + reverse.log_prob(spec, theta)
        - forward.log_prob(spec, &proposal);
    let (accepted, _) = mh_accept(log_ratio, rng);
    if accepted {
        (proposal, true)
    } else {
        (theta.clone(), false)
    }
}

pub fn dmala_step<M: EnergyModel + ?Sized, R: Rng + ?Sized>(
    theta: &DiscreteState,
    model: &M,
    alpha: f64,
    rng: &mut R,
) -> (DiscreteState, bool) {
    dlp_mh_step(
        theta,
        |x| model.energy(x),
        |x| model.gradient(x),
        |x| model.is_feasible(x),
        alpha,
        model.domain(),
        model.structure(),
        rng,
    )
}

/// Energy of the joint state up to a constant:
/// `U(theta) + sum_i ln q(theta_a_i | theta_i)`.
pub fn joint_energy<M: EnergyModel + ?Sized>(
    model: &M,
    theta: &[f64],
    theta_a: &[f64],
    kernel: &Kernel,
) -> f64 {
    model.energy(theta) + kernel.log_noise_density(theta_a, theta)
}

/// Gradient of `ln p(theta | theta_a)` in `theta`. For the logistic kernel
/// this is `grad U(theta) + tanh((theta_a - theta) / (2 eta)) / eta`.
pub fn conditional_gradient<M: EnergyModel + ?Sized>(
    model: &M,
    theta: &[f64],
    theta_a: &[f64],
    kernel: &Kernel,
) -> Vec<f64> {
    let mut g = model.gradient(theta);
    for (gi, (&x, &t)) in g.iter_mut().zip(theta_a.iter().zip(theta)) {
        *gi += kernel.log_density_grad_center(x, t);
    }
    g
}

/// DMALA step on `p(theta | theta_a)` with `theta_a` held fixed.
pub fn conditional_dmala_step<M: EnergyModel + ?Sized, R: Rng + ?Sized>(
    joint: &JointState,
    model: &M,
    alpha: f64,
    kernel: &Kernel,
    rng: &mut R,
) -> (JointState, bool) {
    let theta_a = &joint.theta_a;
    let (theta, accepted) = dlp_mh_step(
        &joint.theta,
        |x| joint_energy(model, x, theta_a, kernel),
        |x| conditional_gradient(model, x, theta_a, kernel),
        |x| model.is_feasible(x),
        alpha,
        model.domain(),
        model.structure(),
        rng,
    );
    (
        JointState {
            theta,
            theta_a: joint.theta_a.clone(),
        },
        accepted,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{AuxState, Counted};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Quad {
        spec: DomainSpec,
        w: Vec<f64>,
    }

    impl EnergyModel for Quad {
        fn domain(&self) -> &DomainSpec {
            &self.spec
        }
        fn energy(&self, x: &[f64]) -> f64 {
            x.iter().zip(&self.w).map(|(a, w)| w * a - 0.3 * a * a).sum()
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            x.iter().zip(&self.w).map(|(a, w)| w - 0.6 * a).collect()
        }
    }

    #[test]
    fn zero_gradient_flip_probability() {
        let spec = DomainSpec::binary(1);
        let table = dlp_table(&[0.0], &[0.0], 0.2, &spec, Structure::Factorized);
        let p = table.coordinate_probs(0);
        let expected = (-2.5f64).exp() / (1.0 + (-2.5f64).exp());
        assert!((p[1] - expected).abs() < 1e-12);
        assert!((p[1] - 0.0759).abs() < 1e-4);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_step_size_stays_put() {
        let spec = DomainSpec::uniform(3, &[-1.0, 0.0, 2.0]).unwrap();
        let table = dlp_table(&[0.0, 2.0, -1.0], &[5.0, -3.0, 1.0], 1e-4, &spec, Structure::Factorized);
        assert!(table.coordinate_probs(0)[1] > 1.0 - 1e-12);
        assert!(table.coordinate_probs(1)[2] > 1.0 - 1e-12);
        assert!(table.coordinate_probs(2)[0] > 1.0 - 1e-12);
    }

    #[test]
    fn self_move_ratio_is_zero() {
        let model = Quad {
            spec: DomainSpec::binary(3),
            w: vec![0.4, -1.0, 2.0],
        };
        let x = [1.0, 0.0, 1.0];
        let r = dlp_log_ratio(
            &x,
            &x,
            |s| model.energy(s),
            |s| model.gradient(s),
            0.3,
            model.domain(),
            Structure::Factorized,
        );
        assert_eq!(r, 0.0);
    }

    #[test]
    fn reverse_ratio_is_reciprocal() {
        let model = Quad {
            spec: DomainSpec::uniform(3, &[0.0, 1.0, 2.0]).unwrap(),
            w: vec![0.4, -1.0, 2.0],
        };
        let a = [1.0, 0.0, 2.0];
        let b = [0.0, 2.0, 1.0];
        let ratio = |x: &[f64], y: &[f64]| {
            dlp_log_ratio(x, y, |s| model.energy(s), |s| model.gradient(s), 0.7, model.domain(), Structure::Factorized)
        };
        assert!((ratio(&a, &b) + ratio(&b, &a)).abs() < 1e-10);
    }

    #[test]
    fn dmala_step_uses_four_units() {
        let model = Quad {
            spec: DomainSpec::binary(3),
            w: vec![0.4, -1.0, 2.0],
        };
        let counted = Counted::new(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut theta = DiscreteState(vec![0.0, 1.0, 0.0]);
        for _ in 0..25 {
            theta = dmala_step(&theta, &counted, 0.5, &mut rng).0;
        }
        assert_eq!(counted.calls(), 100);
    }

    #[test]
    fn conditional_reduces_to_plain_when_aux_equals_state() {
        let model = Quad {
            spec: DomainSpec::binary(3),
            w: vec![0.4, -1.0, 2.0],
        };
        let theta = [1.0, 0.0, 1.0];
        let kernel = Kernel::logistic(2.0).unwrap();
        let g = conditional_gradient(&model, &theta, &theta, &kernel);
        assert_eq!(g, model.gradient(&theta));
    }

    #[test]
    fn conditional_keeps_aux_fixed() {
        let model = Quad {
            spec: DomainSpec::binary(3),
            w: vec![0.4, -1.0, 2.0],
        };
        let kernel = Kernel::logistic(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut joint = JointState::new(
            DiscreteState(vec![0.0, 0.0, 0.0]),
            AuxState::new(vec![2.3, -0.7, 0.4]).unwrap(),
        )
        .unwrap();
        for _ in 0..50 {
            let next = conditional_dmala_step(&joint, &model, 0.8, &kernel, &mut rng).0;
            assert_eq!(next.theta_a, joint.theta_a);
            joint = next;
        }
    }
}
