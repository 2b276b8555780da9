//! Exact-enumeration oracle and chain metrics.

use std::collections::HashSet;
use std::io::Write;

use crate::domain::{enumerate_states, DiscreteState, DomainSpec, EnergyModel};
use crate::error::{Error, Result};
use crate::kernels::log_sum_exp;

/// Lower bound on reported logMAE.
pub const LOG_MAE_FLOOR: f64 = -16.0;

/// `exp(U) / Z` over every lattice state, in enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    spec: DomainSpec,
    probs: Vec<f64>,
    log_z: f64,
}

impl ExactDistribution {
    pub fn from_model<M: EnergyModel + ?Sized>(model: &M) -> Result<Self> {
        let spec = model.domain().clone();
        let energies: Vec<f64> = enumerate_states(&spec)?.map(|s| model.energy(&s)).collect();
        let log_z = log_sum_exp(&energies);
        let probs = energies.iter().map(|e| (e - log_z).exp()).collect();
        Ok(Self { spec, probs, log_z })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    pub fn prob(&self, state: &[f64]) -> Result<f64> {
        Ok(self.probs[self.spec.state_index(state)?])
    }

    /// `(state index, probability)` sorted by probability, largest first;
    /// ties keep enumeration order.
    pub fn sorted_desc(&self) -> Vec<(usize, f64)> {
        let mut rows: Vec<(usize, f64)> = self.probs.iter().copied().enumerate().collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        rows
    }

    /// Fewest states whose combined mass reaches `mass`.
    pub fn dominant_state_count(&self, mass: f64) -> usize {
        let mut acc = 0.0;
        for (k, (_, p)) in self.sorted_desc().into_iter().enumerate() {
            acc += p;
            if acc >= mass {
                return k + 1;
            }
        }
        self.probs.len()
    }
}

/// Visit counts per enumerated state.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    spec: DomainSpec,
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn new(spec: &DomainSpec) -> Result<Self> {
        let n = spec.enumerable_count(crate::domain::ENUMERATION_CAP)?;
        Ok(Self {
            spec: spec.clone(),
            counts: vec![0; n],
            total: 0,
        })
    }

    pub fn from_samples<'a>(spec: &DomainSpec, samples: impl IntoIterator<Item = &'a DiscreteState>) -> Result<Self> {
        let mut h = Self::new(spec)?;
        for s in samples {
            h.add(s)?;
        }
        Ok(h)
    }

    pub fn add(&mut self, state: &[f64]) -> Result<()> {
        let idx = self.spec.state_index(state)?;
        self.counts[idx] += 1;
        self.total += 1;
        Ok(())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Empirical frequencies; all zero when empty.
    pub fn frequencies(&self) -> Vec<f64> {
        if self.total == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    /// Fraction of states visited at least once.
    pub fn coverage(&self) -> f64 {
        self.counts.iter().filter(|&&c| c > 0).count() as f64 / self.counts.len() as f64
    }
}

fn check_same(h: &Histogram, exact: &ExactDistribution) -> Result<()> {
    if h.spec != exact.spec {
        return Err(Error::DimensionMismatch {
            expected: exact.probs.len(),
            got: h.counts.len(),
        });
    }
    Ok(())
}

/// Half the L1 distance between two probability vectors.
pub fn tvd_probs(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            got: p.len(),
        });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

pub fn tvd(empirical: &Histogram, exact: &ExactDistribution) -> Result<f64> {
    check_same(empirical, exact)?;
    tvd_probs(&empirical.frequencies(), &exact.probs)
}

/// `log10` of the mean absolute error over states, floored.
pub fn log_mae_probs(p: &[f64], q: &[f64]) -> Result<f64> {
    let l1 = 2.0 * tvd_probs(p, q)?;
    let mae = l1 / p.len() as f64;
    Ok(if mae > 0.0 { mae.log10().max(LOG_MAE_FLOOR) } else { LOG_MAE_FLOOR })
}

pub fn log_mae(empirical: &Histogram, exact: &ExactDistribution) -> Result<f64> {
    check_same(empirical, exact)?;
    log_mae_probs(&empirical.frequencies(), &exact.probs)
}

/// Fraction of `spec` visited by `samples`.
pub fn coverage<'a>(samples: impl IntoIterator<Item = &'a DiscreteState>, spec: &DomainSpec) -> Result<f64> {
    let total = spec.enumerable_count(crate::domain::ENUMERATION_CAP)?;
    let mut seen = HashSet::new();
    for s in samples {
        seen.insert(spec.state_index(s)?);
    }
    Ok(seen.len() as f64 / total as f64)
}

/// Mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    (mean, sample_sd(values, mean) / (n as f64).sqrt())
}

/// Mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (mean, if n == 1 { 0.0 } else { sample_sd(values, mean) })
}

fn sample_sd(values: &[f64], mean: f64) -> f64 {
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TourDiversity {
    pub mean_cost: f64,
    pub sd_cost: f64,
    /// Average count of positions holding different cities, over pairs.
    pub pmc: f64,
    /// Average undirected-edge-set Jaccard index, over pairs.
    pub jaccard: f64,
    /// Distinct tours up to rotation and reflection.
    pub unique: usize,
}

fn validate_tour(tour: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if tour.len() != n || tour.iter().any(|&c| c >= n || std::mem::replace(&mut seen[c], true)) {
        return Err(Error::Infeasible(format!("{tour:?} is not a tour of {n} cities")));
    }
    Ok(())
}

fn tour_edges(tour: &[usize]) -> HashSet<(usize, usize)> {
    let n = tour.len();
    (0..n)
        .map(|t| {
            let (a, b) = (tour[t], tour[(t + 1) % n]);
            (a.min(b), a.max(b))
        })
        .collect()
}

/// Lexicographically smallest rotation over both orientations.
pub fn canonical_tour(tour: &[usize]) -> Vec<usize> {
    let n = tour.len();
    let reversed: Vec<usize> = tour.iter().rev().copied().collect();
    let mut best: Option<Vec<usize>> = None;
    for seq in [tour, &reversed[..]] {
        for r in 0..n {
            let cand: Vec<usize> = (0..n).map(|t| seq[(t + r) % n]).collect();
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

/// Cost statistics and pairwise diversity of a set of tours; `cost` gives
/// each tour's length.
pub fn tsp_diversity(tours: &[Vec<usize>], cost: impl Fn(&[usize]) -> f64) -> Result<TourDiversity> {
    let first = tours
        .first()
        .ok_or_else(|| Error::param("tours", "need at least one tour"))?;
    let n = first.len();
    for t in tours {
        validate_tour(t, n)?;
    }
    let costs: Vec<f64> = tours.iter().map(|t| cost(t)).collect();
    let (mean_cost, sd_cost) = mean_sd(&costs);
    let edges: Vec<HashSet<(usize, usize)>> = tours.iter().map(|t| tour_edges(t)).collect();
    let (mut pmc, mut jac, mut pairs) = (0.0, 0.0, 0usize);
    for i in 0..tours.len() {
        for j in i + 1..tours.len() {
            pmc += tours[i].iter().zip(&tours[j]).filter(|(a, b)| a != b).count() as f64;
            let inter = edges[i].intersection(&edges[j]).count() as f64;
            let union = edges[i].union(&edges[j]).count() as f64;
            jac += inter / union;
            pairs += 1;
        }
    }
    let (pmc, jaccard) = if pairs == 0 {
        (0.0, 1.0)
    } else {
        (pmc / pairs as f64, jac / pairs as f64)
    };
    let unique = tours.iter().map(|t| canonical_tour(t)).collect::<HashSet<_>>().len();
    Ok(TourDiversity {
        mean_cost,
        sd_cost,
        pmc,
        jaccard,
        unique,
    })
}

/// Closed-form energy-call budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfeScheme {
    /// One gradient MH step (4 units) per step, `steps` steps per sample.
    Baseline { steps: u64 },
    /// `G` sweeps of one MwG correction (2 units) and `L` conditional steps.
    Hiss { sweeps_g: u64, refinements_l: u64 },
    ParallelTempering { steps: u64, temps: u64, swap_interval: u64 },
}

/// Units charged per gradient-based MH step.
pub const C_GRAD: u64 = 4;

impl NfeScheme {
    pub fn predict(&self, chains: u64, samples: u64) -> u64 {
        match *self {
            NfeScheme::Baseline { steps } => chains * samples * steps * C_GRAD,
            NfeScheme::Hiss {
                sweeps_g,
                refinements_l,
            } => chains * samples * sweeps_g * (2 + refinements_l * C_GRAD),
            NfeScheme::ParallelTempering {
                steps,
                temps,
                swap_interval,
            } => {
                samples * chains * temps * steps * C_GRAD
                    + (samples * steps / swap_interval) * chains * (temps - 1) * 2
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NfeRecord {
    pub scheme: NfeScheme,
    pub chains: u64,
    pub samples: u64,
    pub measured: u64,
    pub predicted: u64,
}

impl NfeRecord {
    pub fn matches(&self) -> bool {
        self.measured == self.predicted
    }
}

pub fn nfe_report(per_chain_calls: &[u64], samples: u64, scheme: NfeScheme) -> NfeRecord {
    let chains = per_chain_calls.len() as u64;
    NfeRecord {
        scheme,
        chains,
        samples,
        measured: per_chain_calls.iter().sum(),
        predicted: scheme.predict(chains, samples),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricPoint {
    pub iteration: u64,
    pub wall_time_s: f64,
    pub value: f64,
}

/// One metric along one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub metric: String,
    pub chain_id: usize,
    points: Vec<MetricPoint>,
}

impl MetricSeries {
    pub fn new(metric: impl Into<String>, chain_id: usize) -> Self {
        Self {
            metric: metric.into(),
            chain_id,
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, iteration: u64, wall_time_s: f64, value: f64) -> Result<()> {
        if let Some(last) = self.points.last() {
            if iteration <= last.iteration {
                return Err(Error::param(
                    "iteration",
                    format!("{iteration} does not follow {}", last.iteration),
                ));
            }
        }
        self.points.push(MetricPoint {
            iteration,
            wall_time_s,
            value,
        });
        Ok(())
    }

    pub fn points(&self) -> &[MetricPoint] {
        &self.points
    }

    pub fn last(&self) -> Option<f64> {
        self.points.last().map(|p| p.value)
    }
}

pub const METRIC_CSV_HEADER: [&str; 5] = ["iteration", "wall_time_s", "metric", "value", "chain_id"];

pub fn write_metrics_csv<W: Write>(out: W, series: &[MetricSeries]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRIC_CSV_HEADER)?;
    for s in series {
        for p in &s.points {
            w.write_record([
                p.iteration.to_string(),
                p.wall_time_s.to_string(),
                s.metric.clone(),
                p.value.to_string(),
                s.chain_id.to_string(),
            ])?;
        }
    }
    w.flush()
}
