//! One-parameter sweeps over the sampler configuration.

use std::path::Path;

use hiss::diagnostics::mean_sd;

use crate::config::{ExperimentConfig, Metric};
use crate::error::CliError;
use crate::runner::{execute, write_artifacts, RunReport};

/// Sweepable sampler parameters. `gl` takes values of the form `GxL`.
pub const PARAMS: [&str; 6] = ["alpha", "eta", "sweeps_g", "refinements_l", "gl", "steps_per_sample"];

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub param: String,
    pub value: String,
    pub log_mae_mean: Option<f64>,
    pub log_mae_sd: Option<f64>,
    pub tvd_mean: Option<f64>,
    pub mwg_acceptance_mean: Option<f64>,
    pub coverage_mean: Option<f64>,
    pub wall_time_mean: f64,
}

fn canonical_param(name: &str) -> Option<&'static str> {
    Some(match name {
        "alpha" => "alpha",
        "eta" => "eta",
        "sweeps_g" | "G" | "g" => "sweeps_g",
        "refinements_l" | "L" | "l" => "refinements_l",
        "gl" | "GxL" | "g_x_l" => "gl",
        "steps_per_sample" | "S" => "steps_per_sample",
        _ => return None,
    })
}

fn parse<T: std::str::FromStr>(param: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Ablation(format!("cannot parse `{value}` as a value of {param}")))
}

/// Copy of `cfg` with `param` set to `value`.
pub fn apply(cfg: &ExperimentConfig, param: &str, value: &str) -> Result<ExperimentConfig, CliError> {
    let canon = canonical_param(param).ok_or_else(|| {
        CliError::Ablation(format!("unknown parameter `{param}`; valid: {}", PARAMS.join(", ")))
    })?;
    let mut out = cfg.clone();
    let s = &mut out.sampler;
    match canon {
        "alpha" => s.alpha = parse(canon, value)?,
        "eta" => s.eta = parse(canon, value)?,
        "sweeps_g" => s.sweeps_g = parse(canon, value)?,
        "refinements_l" => s.refinements_l = parse(canon, value)?,
        "steps_per_sample" => s.steps_per_sample = Some(parse(canon, value)?),
        "gl" => {
            let (g, l) = value
                .split_once(['x', 'X'])
                .ok_or_else(|| CliError::Ablation(format!("gl values look like `5x2`, got `{value}`")))?;
            s.sweeps_g = parse("G", g)?;
            s.refinements_l = parse("L", l)?;
        }
        _ => unreachable!(),
    }
    out.validate()?;
    Ok(out)
}

fn summarize(param: &str, value: &str, report: &RunReport) -> AblationRow {
    let stat = |m: Metric| {
        let v = report.finals(m);
        if v.is_empty() {
            (None, None)
        } else {
            let (mean, sd) = mean_sd(&v);
            (Some(mean), Some(sd))
        }
    };
    let (log_mae_mean, log_mae_sd) = stat(Metric::LogMae);
    let wall: Vec<f64> = report.chains.iter().map(|c| c.trace.wall_time).collect();
    AblationRow {
        param: param.to_string(),
        value: value.to_string(),
        log_mae_mean,
        log_mae_sd,
        tvd_mean: stat(Metric::Tvd).0,
        mwg_acceptance_mean: stat(Metric::MwgAcceptance).0,
        coverage_mean: stat(Metric::Coverage).0,
        wall_time_mean: if report.config.run.record_wall_time {
            mean_sd(&wall).0
        } else {
            0.0
        },
    }
}

/// Runs one sub-experiment per grid value. With `write`, each sub-run goes
/// to `<out_dir>/<param>_<value>/` and the summary to
/// `<out_dir>/ablation_summary.csv`.
pub fn ablation(
    cfg: &ExperimentConfig,
    param: &str,
    grid: &[String],
    write: bool,
) -> Result<(Vec<AblationRow>, Vec<RunReport>), CliError> {
    if grid.is_empty() {
        return Err(CliError::Ablation("empty grid".into()));
    }
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for value in grid {
        let mut sub = apply(cfg, param, value)?;
        sub.run.out_dir = cfg.run.out_dir.join(format!("{param}_{value}"));
        let report = execute(&sub)?;
        if write {
            write_artifacts(&report, &sub.run.out_dir)?;
        }
        rows.push(summarize(param, value, &report));
        reports.push(report);
    }
    if write {
        write_summary(&rows, &cfg.run.out_dir.join("ablation_summary.csv"))?;
    }
    Ok((rows, reports))
}

pub fn write_summary(rows: &[AblationRow], path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "param",
        "value",
        "log_mae_mean",
        "log_mae_sd",
        "tvd_mean",
        "mwg_acceptance_mean",
        "coverage_mean",
        "wall_time_s",
    ])?;
    for r in rows {
        w.write_record([
            r.param.clone(),
            r.value.clone(),
            opt(r.log_mae_mean),
            opt(r.log_mae_sd),
            opt(r.tvd_mean),
            opt(r.mwg_acceptance_mean),
            opt(r.coverage_mean),
            r.wall_time_mean.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
