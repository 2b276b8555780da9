//! Runs chains in parallel and writes experiment artifacts.

use std::fs;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use hiss::diagnostics::{
    log_mae, mean_sd, nfe_report, tsp_diversity, tvd, write_metrics_csv, ExactDistribution, Histogram, MetricSeries,
    NfeRecord, NfeScheme, TourDiversity,
};
use hiss::domain::{Counted, DiscreteState, EnergyModel};
use hiss::samplers::{dmala_step, gwg_step, hiss_sweep, pt_dmala_step, ChainTrace, KernelKind, PTConfig, SamplerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ManifestInfo, Metric, SamplerName};
use crate::error::CliError;
use crate::model::AnyModel;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct ChainOutcome {
    pub chain_id: usize,
    pub seed: u64,
    pub trace: ChainTrace,
    pub series: Vec<MetricSeries>,
    /// Lowest tour cost among emitted samples (TSP only).
    pub best_cost: Option<f64>,
}

impl ChainOutcome {
    pub fn final_metric(&self, metric: Metric) -> Option<f64> {
        self.series
            .iter()
            .find(|s| s.metric == metric.as_str())
            .and_then(|s| s.last())
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub chains: Vec<ChainOutcome>,
    pub nfe: NfeRecord,
    pub tsp: Option<TourDiversity>,
}

impl RunReport {
    /// Final value of `metric` for every chain that recorded it.
    pub fn finals(&self, metric: Metric) -> Vec<f64> {
        self.chains.iter().filter_map(|c| c.final_metric(metric)).collect()
    }

    pub fn mean_final(&self, metric: Metric) -> Option<f64> {
        let v = self.finals(metric);
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn best_costs(&self) -> Vec<f64> {
        self.chains.iter().filter_map(|c| c.best_cost).collect()
    }
}

pub fn sampler_config(cfg: &ExperimentConfig, seed: u64) -> SamplerConfig {
    let s = &cfg.sampler;
    SamplerConfig {
        alpha: s.alpha,
        eta: s.eta,
        sweeps_g: s.sweeps_g,
        refinements_l: s.refinements_l,
        seed,
        kernel_kind: if s.name == SamplerName::HissGk {
            KernelKind::GaussianVp { sigma2: s.gk_sigma2 }
        } else {
            KernelKind::Logistic
        },
        mh_correction: s.name != SamplerName::HissNomh,
    }
}

pub fn pt_config(cfg: &ExperimentConfig) -> PTConfig {
    PTConfig {
        num_temps: cfg.sampler.num_temps,
        min_beta: cfg.sampler.min_beta,
        swap_interval: cfg.sampler.swap_interval,
    }
}

pub fn nfe_scheme(cfg: &ExperimentConfig) -> NfeScheme {
    let s = &cfg.sampler;
    let steps = s.resolved_steps() as u64;
    match s.name {
        SamplerName::Hiss | SamplerName::HissGk | SamplerName::HissNomh => NfeScheme::Hiss {
            sweeps_g: s.sweeps_g as u64,
            refinements_l: s.refinements_l as u64,
        },
        SamplerName::Dmala | SamplerName::Gwg => NfeScheme::Baseline { steps },
        SamplerName::PtDmala => NfeScheme::ParallelTempering {
            steps,
            temps: s.num_temps as u64,
            swap_interval: s.swap_interval as u64,
        },
    }
}

struct ChainContext<'a> {
    cfg: &'a ExperimentConfig,
    model: &'a AnyModel,
    exact: Option<&'a ExactDistribution>,
    metrics: &'a [Metric],
}

/// Advances one emitted sample.
fn advance(
    ctx: &ChainContext<'_>,
    counted: &Counted<'_, AnyModel>,
    theta: DiscreteState,
    replicas: &mut [DiscreteState],
    step: &mut usize,
    sampler: &SamplerConfig,
    trace: &mut ChainTrace,
    rng: &mut ChaCha8Rng,
) -> Result<DiscreteState, CliError> {
    let steps = ctx.cfg.sampler.resolved_steps();
    Ok(match ctx.cfg.sampler.name {
        SamplerName::Hiss | SamplerName::HissGk | SamplerName::HissNomh => {
            let (next, stats) = hiss_sweep(&theta, counted, sampler, rng)?;
            trace.absorb(&stats);
            next
        }
        SamplerName::Dmala => {
            let mut theta = theta;
            for _ in 0..steps {
                let (next, accepted) = dmala_step(&theta, counted, sampler.alpha, rng);
                trace.record_step(accepted);
                theta = next;
            }
            theta
        }
        SamplerName::Gwg => {
            let mut theta = theta;
            for _ in 0..steps {
                let (next, accepted) = gwg_step(&theta, counted, rng);
                trace.record_step(accepted);
                theta = next;
            }
            theta
        }
        SamplerName::PtDmala => {
            let pt = pt_config(ctx.cfg);
            for _ in 0..steps {
                let stats = pt_dmala_step(replicas, counted, sampler.alpha, &pt, *step, rng)?;
                *step += 1;
                trace.refine_accept_count += stats.moves_accepted;
                trace.refine_attempt_count += stats.moves_attempted;
                trace.swap_accept_count += stats.swaps_accepted;
                trace.swap_attempt_count += stats.swaps_attempted;
            }
            replicas[0].clone()
        }
    })
}

fn run_chain(ctx: &ChainContext<'_>, chain_id: usize) -> Result<ChainOutcome, CliError> {
    let cfg = ctx.cfg;
    let seed = hiss::derive_seed(cfg.run.seed, chain_id as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = sampler_config(cfg, seed);
    let counted = Counted::new(ctx.model);
    let start = Instant::now();

    let mut theta = ctx.model.initial_state(&mut rng);
    let mut replicas = vec![theta.clone(); if cfg.sampler.name == SamplerName::PtDmala { cfg.sampler.num_temps } else { 0 }];
    let mut pt_step = 0;
    let mut trace = ChainTrace::default();
    let mut hist = match ctx.exact {
        Some(exact) => Some(Histogram::new(exact.spec())?),
        None => None,
    };
    let mut series: Vec<MetricSeries> = ctx
        .metrics
        .iter()
        .map(|m| MetricSeries::new(m.as_str(), chain_id))
        .collect();
    let tsp = ctx.model.tsp();
    let mut best_cost = f64::INFINITY;
    let total = cfg.run.samples;

    for it in 1..=total {
        theta = advance(ctx, &counted, theta, &mut replicas, &mut pt_step, &sampler, &mut trace, &mut rng)?;
        if let Some(h) = hist.as_mut() {
            h.add(&theta)?;
        }
        let cost = tsp.map(|m| {
            let tour = m.tour_from_state(&theta).expect("samplers keep tours feasible");
            m.tour_length(&tour)
        });
        if let Some(c) = cost {
            best_cost = best_cost.min(c);
        }
        trace.samples.push(theta.clone());

        if it % cfg.run.metric_every != 0 && it != total {
            continue;
        }
        let wall = if cfg.run.record_wall_time {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        for (metric, s) in ctx.metrics.iter().zip(series.iter_mut()) {
            let value = match metric {
                Metric::Tvd => Some(tvd(hist.as_ref().unwrap(), ctx.exact.unwrap())?),
                Metric::LogMae => Some(log_mae(hist.as_ref().unwrap(), ctx.exact.unwrap())?),
                Metric::Coverage => Some(hist.as_ref().unwrap().coverage()),
                Metric::MwgAcceptance => trace.mean_mwg_accept_prob(),
                Metric::AcceptanceRate => trace.refine_acceptance(),
                Metric::Energy => Some(ctx.model.energy(&theta)),
                Metric::Cost => cost,
                Metric::BestCost => cost.map(|_| best_cost),
                Metric::Mse => ctx.model.mlp().map(|m| m.mse(&theta)),
            };
            if let Some(v) = value {
                s.push(it as u64, wall, v)?;
            }
        }
    }
    trace.energy_calls = counted.calls();
    trace.wall_time = start.elapsed().as_secs_f64();
    series.retain(|s| !s.points().is_empty());
    Ok(ChainOutcome {
        chain_id,
        seed,
        trace,
        series,
        best_cost: tsp.map(|_| best_cost),
    })
}

/// Runs every chain and computes the report without touching the disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let model = AnyModel::build(&cfg.model)?;
    let metrics = cfg.metrics();
    let exact = if metrics.iter().any(|m| m.needs_enumeration()) {
        Some(ExactDistribution::from_model(&model)?)
    } else {
        None
    };
    let ctx = ChainContext {
        cfg,
        model: &model,
        exact: exact.as_ref(),
        metrics: &metrics,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let chains: Vec<ChainOutcome> = pool.install(|| {
        (0..cfg.run.chains)
            .into_par_iter()
            .map(|k| run_chain(&ctx, k))
            .collect::<Result<_, _>>()
    })?;

    let calls: Vec<u64> = chains.iter().map(|c| c.trace.energy_calls).collect();
    let nfe = nfe_report(&calls, cfg.run.samples as u64, nfe_scheme(cfg));

    let tsp = match model.tsp() {
        Some(m) => {
            let tail = cfg.run.diversity_tail.max(1);
            let tours: Vec<Vec<usize>> = chains
                .iter()
                .flat_map(|c| {
                    let n = c.trace.samples.len();
                    c.trace.samples[n.saturating_sub(tail)..].iter()
                })
                .map(|s| m.tour_from_state(s))
                .collect::<Result<_, _>>()?;
            Some(tsp_diversity(&tours, |t| m.tour_length(t))?)
        }
        None => None,
    };

    Ok(RunReport {
        config: cfg.clone(),
        chains,
        nfe,
        tsp,
    })
}

/// Runs the experiment and writes its artifacts to `run.out_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let report = execute(cfg)?;
    write_artifacts(&report, &cfg.run.out_dir)?;
    Ok(report)
}

fn git_describe() -> String {
    option_env!("HISS_GIT_DESCRIBE").unwrap_or("unknown").to_string()
}

pub fn write_artifacts(report: &RunReport, out_dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let model = AnyModel::build(&report.config.model)?;

    let series: Vec<MetricSeries> = report.chains.iter().flat_map(|c| c.series.iter().cloned()).collect();
    let f = fs::File::create(out_dir.join("metrics.csv"))?;
    write_metrics_csv(BufWriter::new(f), &series)?;

    let mut w = csv::Writer::from_path(out_dir.join("samples.csv"))?;
    w.write_record(["chain_id", "iteration", "state"])?;
    for c in &report.chains {
        for (i, s) in c.trace.samples.iter().enumerate() {
            w.write_record([c.chain_id.to_string(), (i + 1).to_string(), model.encode_state(s)])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out_dir.join("summary.csv"))?;
    w.write_record(["chain_id", "seed", "quantity", "value"])?;
    for c in &report.chains {
        let t = &c.trace;
        let mut rows: Vec<(String, String)> = c
            .series
            .iter()
            .filter_map(|s| s.last().map(|v| (format!("final_{}", s.metric), v.to_string())))
            .collect();
        rows.extend([
            ("mwg_accept_count".to_string(), t.mwg_accept_count.to_string()),
            ("mwg_attempt_count".to_string(), t.mwg_attempt_count.to_string()),
            ("refine_accept_count".to_string(), t.refine_accept_count.to_string()),
            ("refine_attempt_count".to_string(), t.refine_attempt_count.to_string()),
            ("swap_accept_count".to_string(), t.swap_accept_count.to_string()),
            ("swap_attempt_count".to_string(), t.swap_attempt_count.to_string()),
            ("energy_calls".to_string(), t.energy_calls.to_string()),
        ]);
        if let Some(b) = c.best_cost {
            rows.push(("best_cost".to_string(), b.to_string()));
        }
        for (q, v) in rows {
            w.write_record([c.chain_id.to_string(), c.seed.to_string(), q, v])?;
        }
    }
    w.flush()?;

    let nfe = &report.nfe;
    let mut w = csv::Writer::from_path(out_dir.join("nfe.csv"))?;
    w.write_record(["sampler", "chains", "samples", "measured", "predicted", "matches"])?;
    w.write_record([
        report.config.sampler.name.to_string(),
        nfe.chains.to_string(),
        nfe.samples.to_string(),
        nfe.measured.to_string(),
        nfe.predicted.to_string(),
        nfe.matches().to_string(),
    ])?;
    w.flush()?;

    if let Some(d) = &report.tsp {
        let (best_mean, best_sd) = mean_sd(&report.best_costs());
        let mut w = csv::Writer::from_path(out_dir.join("tsp_summary.csv"))?;
        w.write_record(["mean_cost", "sd_cost", "pmc", "jaccard", "unique", "best_cost_mean", "best_cost_sd"])?;
        w.write_record([
            d.mean_cost.to_string(),
            d.sd_cost.to_string(),
            d.pmc.to_string(),
            d.jaccard.to_string(),
            d.unique.to_string(),
            best_mean.to_string(),
            best_sd.to_string(),
        ])?;
        w.flush()?;
    }

    let mut manifest = report.config.clone();
    manifest.manifest = Some(ManifestInfo {
        version: format!("hiss-cli {VERSION}"),
        git: git_describe(),
        nfe_measured: nfe.measured,
        nfe_predicted: nfe.predicted,
    });
    fs::write(out_dir.join("manifest.toml"), manifest.to_toml())?;
    Ok(())
}

/// Exact distribution as `state,probability` rows, most probable first.
pub fn enumerate(cfg: &ExperimentConfig) -> Result<Vec<(String, f64)>, CliError> {
    let model = AnyModel::build(&cfg.model)?;
    let exact = ExactDistribution::from_model(&model)?;
    let spec = exact.spec();
    Ok(exact
        .sorted_desc()
        .into_iter()
        .map(|(idx, p)| (model.encode_state(&spec.state_from_index(idx)), p))
        .collect())
}

pub fn write_enumeration(rows: &[(String, f64)], path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["state", "probability"])?;
    for (s, p) in rows {
        w.write_record([s.clone(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
