//! Convolution kernels coupling a discrete state with its continuous
//! auxiliary copy.
//!
//! The logistic kernel has density `(1/(4 eta)) sech^2((x - mu)/(2 eta))`,
//! i.e. a logistic distribution with location `mu` and scale `eta`. The
//! Gaussian kernel uses the variance-preserving parameterization
//! `N(x; alpha * mu, sigma^2)` with `alpha^2 + sigma^2 = 1`, or a plain
//! location/scale form when `alpha = 1`.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::domain::{enumerate_states, AuxState, EnergyModel};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// `ln cosh z` without overflow for large `|z|`.
pub fn ln_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// Clamps a uniform draw into `[ulp, 1 - ulp]` so the logit stays finite.
pub fn clamp_unit(u: f64) -> f64 {
    let ulp = f64::EPSILON / 2.0;
    u.clamp(ulp, 1.0 - ulp)
}

/// Inverse CDF of the logistic distribution with location 0 and scale `eta`.
pub fn logistic_quantile(u: f64, eta: f64) -> f64 {
    let u = clamp_unit(u);
    eta * (u / (1.0 - u)).ln()
}

pub fn logistic_cdf(x: f64, mu: f64, eta: f64) -> f64 {
    let z = (x - mu) / eta;
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln[(1/(4 eta)) sech^2((x - mu)/(2 eta))]`.
pub fn logistic_log_density(x: f64, mu: f64, eta: f64) -> f64 {
    -(4.0 * eta).ln() - 2.0 * ln_cosh((x - mu) / (2.0 * eta))
}

fn check_scale(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {value}")))
    }
}

/// `d` i.i.d. draws of `eta * Logistic(0, 1)` by inverse-transform sampling.
pub fn sample_logistic_noise<R: Rng + ?Sized>(rng: &mut R, d: usize, eta: f64) -> Result<Vec<f64>> {
    check_scale("eta", eta)?;
    Ok((0..d)
        .map(|_| logistic_quantile(rng.gen::<f64>(), eta))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticKernel {
    eta: f64,
}

impl LogisticKernel {
    pub fn new(eta: f64) -> Result<Self> {
        check_scale("eta", eta)?;
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    alpha_vp: f64,
    sigma: f64,
}

impl GaussianKernel {
    /// Variance-preserving kernel with noise variance `sigma2`; the signal
    /// coefficient is `sqrt(1 - sigma2)`.
    pub fn vp(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2 < 1.0) {
            return Err(Error::param(
                "sigma2",
                format!("variance-preserving kernel needs 0 < sigma^2 < 1, got {sigma2}"),
            ));
        }
        Ok(Self {
            alpha_vp: (1.0 - sigma2).sqrt(),
            sigma: sigma2.sqrt(),
        })
    }

    /// Plain location/scale Gaussian (`alpha_vp = 1`).
    pub fn plain(sigma: f64) -> Result<Self> {
        check_scale("sigma", sigma)?;
        Ok(Self {
            alpha_vp: 1.0,
            sigma,
        })
    }

    pub fn alpha_vp(&self) -> f64 {
        self.alpha_vp
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_variance_preserving(&self) -> bool {
        (self.alpha_vp * self.alpha_vp + self.sigma * self.sigma - 1.0).abs() <= 1e-12
    }
}

pub fn gaussian_log_density(x: f64, center: f64, kernel: &GaussianKernel) -> f64 {
    let s2 = kernel.sigma * kernel.sigma;
    let r = x - kernel.alpha_vp * center;
    -0.5 * (2.0 * PI * s2).ln() - r * r / (2.0 * s2)
}

pub fn sample_gaussian_noise<R: Rng + ?Sized>(rng: &mut R, d: usize, kernel: &GaussianKernel) -> Vec<f64> {
    (0..d)
        .map(|_| kernel.sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Noising/denoising kernel used by the auxiliary-variable sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Logistic(LogisticKernel),
    Gaussian(GaussianKernel),
}

impl Kernel {
    pub fn logistic(eta: f64) -> Result<Self> {
        LogisticKernel::new(eta).map(Kernel::Logistic)
    }

    pub fn gaussian_vp(sigma2: f64) -> Result<Self> {
        GaussianKernel::vp(sigma2).map(Kernel::Gaussian)
    }

    /// `ln q(x | center)` for one coordinate.
    pub fn log_density(&self, x: f64, center: f64) -> f64 {
        match self {
            Kernel::Logistic(k) => logistic_log_density(x, center, k.eta),
            Kernel::Gaussian(k) => gaussian_log_density(x, center, k),
        }
    }

    /// `d/d center  ln q(x | center)`.
    pub fn log_density_grad_center(&self, x: f64, center: f64) -> f64 {
        match self {
            Kernel::Logistic(k) => ((x - center) / (2.0 * k.eta)).tanh() / k.eta,
            Kernel::Gaussian(k) => {
                k.alpha_vp * (x - k.alpha_vp * center) / (k.sigma * k.sigma)
            }
        }
    }

    /// Draws `theta_a ~ q(. | theta)`.
    pub fn noise<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> AuxState {
        let values = match self {
            Kernel::Logistic(k) => theta
                .iter()
                .map(|&t| t + logistic_quantile(rng.gen::<f64>(), k.eta))
                .collect(),
            Kernel::Gaussian(k) => theta
                .iter()
                .map(|&t| k.alpha_vp * t + k.sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        };
        AuxState::new(values).expect("kernel noise is finite")
    }

    /// `ln q(theta_a | theta)` summed over coordinates.
    pub fn log_noise_density(&self, theta_a: &[f64], theta: &[f64]) -> f64 {
        theta_a
            .iter()
            .zip(theta)
            .map(|(&x, &t)| self.log_density(x, t))
            .sum()
    }
}

/// Log of the unnormalized smoothed density
/// `sum_theta exp(U(theta)) prod_i q(theta_a_i | theta_i)`.
pub fn log_smoothed_density<M: EnergyModel + ?Sized>(
    theta_a: &[f64],
    model: &M,
    kernel: &Kernel,
) -> Result<f64> {
    let spec = model.domain();
    if theta_a.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: theta_a.len(),
        });
    }
    let terms: Vec<f64> = enumerate_states(spec)?
        .map(|s| model.energy(&s) + kernel.log_noise_density(theta_a, &s))
        .collect();
    Ok(log_sum_exp(&terms))
}

pub fn smoothed_density<M: EnergyModel + ?Sized>(
    theta_a: &[f64],
    model: &M,
    eta: f64,
) -> Result<f64> {
    let kernel = Kernel::logistic(eta)?;
    log_smoothed_density(theta_a, model, &kernel).map(f64::exp)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Probability mass of the strip `|x| < epsilon` under a kernel-smoothed
/// symmetric two-atom mixture at `-mu` and `+mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntermediateMass {
    /// Adaptive-quadrature value of the strip integral.
    pub quadrature: f64,
    /// Small-strip closed form `2 epsilon p(0)` simplified for distant modes.
    pub approximation: f64,
}

fn check_strip(mu: f64, epsilon: f64) -> Result<()> {
    check_scale("mu", mu)?;
    check_scale("epsilon", epsilon)?;
    if epsilon >= mu {
        return Err(Error::param(
            "epsilon",
            format!("strip half-width {epsilon} must be well below the mode offset {mu}"),
        ));
    }
    Ok(())
}

pub fn intermediate_mass_logistic(mu: f64, eta: f64, epsilon: f64) -> Result<IntermediateMass> {
    check_scale("eta", eta)?;
    check_strip(mu, epsilon)?;
    let density = |x: f64| {
        0.5 * logistic_log_density(x, -mu, eta).exp() + 0.5 * logistic_log_density(x, mu, eta).exp()
    };
    let crude = 2.0 * epsilon * density(0.0);
    let quadrature = adaptive_simpson(density, -epsilon, epsilon, 1e-10 * crude);
    Ok(IntermediateMass {
        quadrature,
        approximation: 2.0 * (epsilon / eta) * (-mu / eta).exp(),
    })
}

pub fn intermediate_mass_gaussian(
    mu: f64,
    kernel: &GaussianKernel,
    epsilon: f64,
) -> Result<IntermediateMass> {
    check_strip(mu, epsilon)?;
    let density = |x: f64| {
        0.5 * gaussian_log_density(x, -mu, kernel).exp()
            + 0.5 * gaussian_log_density(x, mu, kernel).exp()
    };
    let crude = 2.0 * epsilon * density(0.0);
    let quadrature = adaptive_simpson(density, -epsilon, epsilon, 1e-10 * crude.max(f64::MIN_POSITIVE));
    let s = kernel.sigma;
    let a = kernel.alpha_vp;
    Ok(IntermediateMass {
        quadrature,
        approximation: (2.0 / PI).sqrt() * (epsilon / s) * (-(a * mu).powi(2) / (2.0 * s * s)).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Bern {
        spec: DomainSpec,
        p: f64,
    }

    impl EnergyModel for Bern {
        fn domain(&self) -> &DomainSpec {
            &self.spec
        }
        fn energy(&self, x: &[f64]) -> f64 {
            x[0] * self.p.ln() + (1.0 - x[0]) * (1.0 - self.p).ln()
        }
        fn gradient(&self, _x: &[f64]) -> Vec<f64> {
            vec![self.p.ln() - (1.0 - self.p).ln()]
        }
    }

    #[test]
    fn ln_cosh_matches_naive_and_survives_large_arguments() {
        for &z in &[-3.0, -0.5, 0.0, 0.1, 2.0, 10.0] {
            let naive = f64::cosh(z).ln();
            assert!((ln_cosh(z) - naive).abs() < 1e-14, "z={z}");
        }
        assert!((ln_cosh(1e4) - (1e4 - LN_2)).abs() < 1e-9);
        assert!(ln_cosh(-1e308).is_finite());
    }

    #[test]
    fn quantile_special_points() {
        assert_eq!(logistic_quantile(0.5, 4.0), 0.0);
        let e = std::f64::consts::E;
        assert!((logistic_quantile(e / (1.0 + e), 4.0) - 4.0).abs() < 1e-12);
        assert!(logistic_quantile(0.0, 1.0).is_finite());
        assert!(logistic_quantile(1.0, 1.0).is_finite());
    }

    #[test]
    fn noise_rejects_bad_eta() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_logistic_noise(&mut rng, 3, 0.0).is_err());
        assert!(sample_logistic_noise(&mut rng, 3, -1.0).is_err());
        assert!(sample_logistic_noise(&mut rng, 3, f64::NAN).is_err());
    }

    #[test]
    fn log_density_peak_and_symmetry() {
        assert!((logistic_log_density(0.3, 0.3, 1.0) + 4f64.ln()).abs() < 1e-15);
        assert!((logistic_log_density(1.3, -0.2, 0.7) - logistic_log_density(-0.2, 1.3, 0.7)).abs() < 1e-15);
    }

    #[test]
    fn log_density_matches_standard_logistic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: f64 = rng.gen_range(-20.0..20.0);
            let mu: f64 = rng.gen_range(-5.0..5.0);
            let eta: f64 = rng.gen_range(0.1..5.0);
            let z = (x - mu) / eta;
            let reference = -z - eta.ln() - 2.0 * (-z).exp().ln_1p();
            assert!((logistic_log_density(x, mu, eta) - reference).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_kernel_constraints() {
        let k = GaussianKernel::vp(0.9).unwrap();
        assert!((k.alpha_vp() - 0.1f64.sqrt()).abs() < 1e-15);
        assert!(k.is_variance_preserving());
        assert!(GaussianKernel::vp(1.0).is_err());
        assert!(GaussianKernel::vp(0.0).is_err());
        let plain = GaussianKernel::plain(1.0).unwrap();
        let peak = gaussian_log_density(2.0, 2.0, &plain);
        assert!((peak + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        let vp = GaussianKernel::vp(0.5).unwrap();
        let x = vp.alpha_vp() * 3.0;
        assert!((gaussian_log_density(x, 3.0, &vp) + 0.5 * (2.0 * PI * 0.5).ln()).abs() < 1e-14);
    }

    #[test]
    fn center_gradients_match_finite_differences() {
        let kernels = [Kernel::logistic(0.7).unwrap(), Kernel::gaussian_vp(0.9).unwrap()];
        for k in kernels {
            for &(x, c) in &[(0.3, 1.0), (-2.0, 0.0), (5.0, -1.0)] {
                let h = 1e-6;
                let fd = (k.log_density(x, c + h) - k.log_density(x, c - h)) / (2.0 * h);
                assert!((fd - k.log_density_grad_center(x, c)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn smoothed_density_is_positive_on_grid() {
        let model = Bern {
            spec: DomainSpec::binary(1),
            p: 0.7,
        };
        for eta in [0.05, 0.5, 4.0] {
            for k in 0..=200 {
                let x = -10.0 + 0.1 * k as f64;
                let v = smoothed_density(&[x], &model, eta).unwrap();
                assert!(v > 0.0, "eta={eta} x={x}");
            }
        }
    }

    #[test]
    fn smoothed_density_flattens_for_large_eta() {
        let model = Bern {
            spec: DomainSpec::binary(1),
            p: 0.7,
        };
        let a = smoothed_density(&[-3.0], &model, 1e4).unwrap();
        let b = smoothed_density(&[5.0], &model, 1e4).unwrap();
        assert!((a / b - 1.0).abs() < 1e-3);
    }

    #[test]
    fn smoothed_density_single_state_is_one_kernel() {
        let model = Bern {
            spec: DomainSpec::new(vec![vec![1.0]]).unwrap(),
            p: 0.3,
        };
        for &x in &[-2.0, 0.5, 1.0, 7.0] {
            let v = smoothed_density(&[x], &model, 0.8).unwrap();
            let expected = model.energy(&[1.0]).exp() * logistic_log_density(x, 1.0, 0.8).exp();
            assert!((v - expected).abs() <= 1e-14 * expected.max(1.0));
        }
    }

    #[test]
    fn intermediate_mass_regime_checks() {
        assert!(intermediate_mass_logistic(1.0, 1.0, 1.0).is_err());
        assert!(intermediate_mass_logistic(1.0, 1.0, 2.0).is_err());
        assert!(intermediate_mass_logistic(1.0, 0.0, 0.1).is_err());
        let tiny = intermediate_mass_logistic(10.0, 1.0, 1e-9).unwrap();
        assert!(tiny.quadrature < 1e-12);
    }

    #[test]
    fn intermediate_mass_mu10() {
        let m = intermediate_mass_logistic(10.0, 1.0, 0.1).unwrap();
        assert!((m.approximation - 9.0799e-6).abs() < 1e-9);
        assert!((m.quadrature / m.approximation - 1.0).abs() < 0.1);
    }
}
