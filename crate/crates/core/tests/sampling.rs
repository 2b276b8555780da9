//! Statistical checks on the sampler kernels against enumerated targets.

use hiss::diagnostics::{tvd_probs, ExactDistribution};
use hiss::domain::{Counted, DiscreteState, DomainSpec, EnergyModel};
use hiss::kernels::Kernel;
use hiss::models::{bernoulli4d, TabularModel};
use hiss::samplers::{
    dmala_step, gwg_step, hiss_denoise, hiss_noise, hiss_sweep, pt_dmala_step, KernelKind, PTConfig, SamplerConfig,
};
use hiss::derive_seed;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CHAINS: usize = 100_000;

/// Starts `CHAINS` chains from exact draws, applies `step` once to each and
/// returns the TVD of the result to the target.
fn one_step_tvd<M: EnergyModel>(model: &M, mut step: impl FnMut(&DiscreteState, &mut ChaCha8Rng) -> DiscreteState) -> f64 {
    let exact = ExactDistribution::from_model(model).unwrap();
    let spec = model.domain();
    let pick = WeightedIndex::new(exact.probs()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut counts = vec![0f64; exact.probs().len()];
    for _ in 0..CHAINS {
        let x = spec.state_from_index(pick.sample(&mut rng));
        let y = step(&x, &mut rng);
        counts[spec.state_index(&y).unwrap()] += 1.0;
    }
    let freq: Vec<f64> = counts.iter().map(|c| c / CHAINS as f64).collect();
    tvd_probs(&freq, exact.probs()).unwrap()
}

fn three_level() -> TabularModel {
    let probs = [9.0, 1.0, 0.2, 0.5, 4.0, 0.1, 2.0, 0.3, 6.0];
    TabularModel::new(DomainSpec::uniform(2, &[-1.0, 0.0, 2.0]).unwrap(), &probs).unwrap()
}

#[test]
fn kernels_keep_the_target_stationary() {
    let bern = bernoulli4d();
    let tri = three_level();
    let hiss = SamplerConfig::default();
    let gk = SamplerConfig {
        kernel_kind: KernelKind::GaussianVp { sigma2: 0.9 },
        ..SamplerConfig::default()
    };
    let t = [
        ("dmala", one_step_tvd(&bern, |x, r| dmala_step(x, &bern, 0.2, r).0)),
        ("gwg", one_step_tvd(&bern, |x, r| gwg_step(x, &bern, r).0)),
        ("hiss", one_step_tvd(&bern, |x, r| hiss_sweep(x, &bern, &hiss, r).unwrap().0)),
        ("hiss-gk", one_step_tvd(&bern, |x, r| hiss_sweep(x, &bern, &gk, r).unwrap().0)),
        ("dmala 3-level", one_step_tvd(&tri, |x, r| dmala_step(x, &tri, 0.5, r).0)),
        ("gwg 3-level", one_step_tvd(&tri, |x, r| gwg_step(x, &tri, r).0)),
        ("hiss 3-level", one_step_tvd(&tri, |x, r| hiss_sweep(x, &tri, &hiss, r).unwrap().0)),
    ];
    for (name, v) in t {
        assert!(v < 0.02, "{name}: one-step TVD {v}");
    }
}

#[test]
fn two_state_chains_converge() {
    let model = TabularModel::new(DomainSpec::binary(1), &[0.3, 0.7]).unwrap();
    let minimal = SamplerConfig {
        sweeps_g: 1,
        refinements_l: 0,
        ..SamplerConfig::default()
    };
    let run = |step: &dyn Fn(&DiscreteState, &mut ChaCha8Rng) -> DiscreteState| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut x = DiscreteState(vec![0.0]);
        let mut ones = 0.0;
        let n = 50_000;
        for _ in 0..n {
            x = step(&x, &mut rng);
            ones += x[0];
        }
        (ones / n as f64 - 0.7).abs()
    };
    assert!(run(&|x, r| dmala_step(x, &model, 0.2, r).0) < 0.01);
    assert!(run(&|x, r| gwg_step(x, &model, r).0) < 0.01);
    assert!(run(&|x, r| hiss_sweep(x, &model, &minimal, r).unwrap().0) < 0.01);
}

#[test]
fn denoising_ignores_the_pre_noise_state() {
    let model = bernoulli4d();
    let spec = model.domain();
    let kernel = Kernel::logistic(4.0).unwrap();
    let mode = DiscreteState(vec![0.0; 4]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let theta_a = hiss_noise(&mode, &kernel, &mut rng);

    // Row 0: theta_a treated as noise of the mode; row 1: of the antipode
    // 1111. The denoiser only ever sees theta_a, so the rows must agree.
    let n = 40_000;
    let mut counts = [[0f64; 16]; 2];
    for k in 0..2 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(100, k as u64));
        for _ in 0..n {
            let y = hiss_denoise(&theta_a, &kernel, spec, model.structure(), &mut rng);
            counts[k][spec.state_index(&y).unwrap()] += 1.0;
        }
    }
    // Two-sample chi-square homogeneity test.
    let mut stat = 0.0;
    let mut dof = 0;
    for j in 0..16 {
        let col = counts[0][j] + counts[1][j];
        if col == 0.0 {
            continue;
        }
        dof += 1;
        for row in &counts {
            let e = col / 2.0;
            stat += (row[j] - e).powi(2) / e;
        }
    }
    // Wilson-Hilferty normal approximation to the chi-square tail.
    let k = (dof - 1) as f64;
    let z = ((stat / k).cbrt() - (1.0 - 2.0 / (9.0 * k))) / (2.0 / (9.0 * k)).sqrt();
    assert!(z < 3.09, "chi2 {stat} on {k} dof, z {z}");
}

#[test]
fn identical_seeds_give_identical_traces() {
    let model = bernoulli4d();
    let trace = |seed: u64| {
        let cfg = SamplerConfig {
            seed,
            ..SamplerConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = DiscreteState(vec![1.0, 0.0, 1.0, 0.0]);
        let mut out = Vec::new();
        for _ in 0..200 {
            x = hiss_sweep(&x, &model, &cfg, &mut rng).unwrap().0;
            out.push(x.clone());
        }
        out
    };
    assert_eq!(trace(42), trace(42));
    assert_ne!(trace(42), trace(43));
}

#[test]
fn energy_calls_match_closed_forms() {
    let model = bernoulli4d();
    let counted = Counted::new(&model);
    let cfg = SamplerConfig {
        sweeps_g: 3,
        refinements_l: 4,
        ..SamplerConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut x = DiscreteState(vec![0.0; 4]);
    let mut last = 0;
    for _ in 0..50 {
        x = hiss_sweep(&x, &counted, &cfg, &mut rng).unwrap().0;
        assert!(counted.calls() >= last);
        last = counted.calls();
    }
    assert_eq!(counted.calls(), 50 * 3 * (2 + 4 * 4));

    let counted = Counted::new(&model);
    let pt = PTConfig {
        num_temps: 4,
        min_beta: 0.1,
        swap_interval: 3,
    };
    let mut replicas = vec![DiscreteState(vec![0.0; 4]); 4];
    for step in 0..30 {
        pt_dmala_step(&mut replicas, &counted, 0.2, &pt, step, &mut rng).unwrap();
    }
    assert_eq!(counted.calls(), 30 * 4 * 4 + 10 * 3 * 2);
}

#[test]
fn counter_is_safe_across_threads() {
    let model = bernoulli4d();
    let counted = Counted::new(&model);
    std::thread::scope(|s| {
        for _ in 0..4 {
            s.spawn(|| {
                for _ in 0..1000 {
                    counted.energy(&[0.0; 4]);
                }
            });
        }
    });
    assert_eq!(counted.calls(), 4000);
}
