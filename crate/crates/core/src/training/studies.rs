//! Repeated-run studies: seed-to-seed consistency of the learned interface
//! and its stability across contrast values.

use crate::designer::{design_direct, DesignConfig};
use crate::error::{Error, Result};
use crate::geometry::ConformalMap;
use crate::training::{credibility_eval, interface_value, train, Metrics, TrainConfig};

/// Angular sample count for interface statistics.
pub const STUDY_GRID: usize = 256;

fn study_thetas() -> Vec<f64> {
    (0..STUDY_GRID)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / STUDY_GRID as f64)
        .collect()
}

fn pointwise_stats(samples: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len() as f64;
    let m = samples[0].len();
    let mut mean = vec![0.0; m];
    let mut std = vec![0.0; m];
    for s in samples {
        for (j, v) in s.iter().enumerate() {
            mean[j] += v / n;
        }
    }
    for s in samples {
        for (j, v) in s.iter().enumerate() {
            std[j] += (v - mean[j]).powi(2) / n;
        }
    }
    for v in &mut std {
        *v = v.sqrt();
    }
    (mean, std)
}

fn scalar_stats(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConsistencyReport {
    pub thetas: Vec<f64>,
    pub p_mean: Vec<f64>,
    pub p_std: Vec<f64>,
    /// Mean over the grid of the pointwise standard deviation.
    pub mean_of_std: f64,
    pub metric_mean: Metrics,
    pub metric_std: Metrics,
    /// Per-run metrics of the included runs, in seed order.
    pub metrics: Vec<Metrics>,
    pub excluded: usize,
}

/// Train once per seed and aggregate interface and metric statistics.
/// Diverged runs are excluded from the statistics and counted.
pub fn consistency_study(
    map: &ConformalMap,
    base: &TrainConfig,
    seeds: &[u64],
) -> Result<ConsistencyReport> {
    if seeds.is_empty() {
        return Err(Error::EmptyPointSet("study seeds"));
    }
    let thetas = study_thetas();
    let mut interfaces = Vec::new();
    let mut metrics = Vec::new();
    let mut excluded = 0;
    for &seed in seeds {
        let cfg = TrainConfig { seed, ..base.clone() };
        let run = train(map, &cfg)?;
        if run.diverged {
            excluded += 1;
            continue;
        }
        interfaces.push(thetas.iter().map(|&t| interface_value(map, &run, t)).collect());
        metrics.push(credibility_eval(map, &run, None)?.metrics);
    }
    if interfaces.is_empty() {
        return Err(Error::EmptyPointSet("completed study runs"));
    }
    let (p_mean, p_std) = pointwise_stats(&interfaces);
    let mean_of_std = p_std.iter().sum::<f64>() / p_std.len() as f64;
    let (cred_m, cred_s) = scalar_stats(&metrics.iter().map(|m| m.cred).collect::<Vec<_>>());
    let (sup_m, sup_s) = scalar_stats(&metrics.iter().map(|m| m.sup).collect::<Vec<_>>());
    let (pn_m, pn_s) = scalar_stats(&metrics.iter().map(|m| m.p_neutral).collect::<Vec<_>>());
    Ok(ConsistencyReport {
        thetas,
        p_mean,
        p_std,
        mean_of_std,
        metric_mean: Metrics { cred: cred_m, sup: sup_m, p_neutral: pn_m },
        metric_std: Metrics { cred: cred_s, sup: sup_s, p_neutral: pn_s },
        metrics,
        excluded,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct StabilityRow {
    pub sigma_c: f64,
    pub mean_of_std: f64,
    pub metric_mean: Metrics,
    pub excluded: usize,
}

/// Repeat the consistency study for each contrast value.
pub fn stability_study(
    map: &ConformalMap,
    base: &TrainConfig,
    sigma_cs: &[f64],
    seeds: &[u64],
) -> Result<Vec<StabilityRow>> {
    if sigma_cs.is_empty() {
        return Err(Error::EmptyPointSet("contrast values"));
    }
    let mut rows = Vec::with_capacity(sigma_cs.len());
    for &sigma_c in sigma_cs {
        let cfg = TrainConfig { sigma_c, ..base.clone() };
        let rep = consistency_study(map, &cfg, seeds)?;
        rows.push(StabilityRow {
            sigma_c,
            mean_of_std: rep.mean_of_std,
            metric_mean: rep.metric_mean,
            excluded: rep.excluded,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DesignConsistency {
    pub thetas: Vec<f64>,
    pub p_mean: Vec<f64>,
    pub p_std: Vec<f64>,
    pub mean_of_std: f64,
    pub max_std: f64,
    /// Mean over the grid of |p_mean|, the scale the std is judged against.
    pub mean_amplitude: f64,
    pub objectives: Vec<f64>,
}

/// Run the direct designer once per seed and aggregate the resulting
/// physical interface functions on the study grid.
pub fn design_consistency(
    map: &ConformalMap,
    sigma_c: f64,
    sigma_m: f64,
    base: &DesignConfig,
    seeds: &[u64],
) -> Result<DesignConsistency> {
    if seeds.is_empty() {
        return Err(Error::EmptyPointSet("study seeds"));
    }
    let thetas = study_thetas();
    let mut interfaces = Vec::with_capacity(seeds.len());
    let mut objectives = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let cfg = DesignConfig { seed, ..base.clone() };
        let res = design_direct(map, sigma_c, sigma_m, &cfg)?;
        interfaces
            .push(thetas.iter().map(|&t| res.density.physical_value(map, t)).collect::<Vec<_>>());
        objectives.push(res.best_objective);
    }
    let (p_mean, p_std) = pointwise_stats(&interfaces);
    let mean_of_std = p_std.iter().sum::<f64>() / p_std.len() as f64;
    let max_std = p_std.iter().fold(0.0f64, |a, &b| a.max(b));
    let mean_amplitude = p_mean.iter().map(|v| v.abs()).sum::<f64>() / p_mean.len() as f64;
    Ok(DesignConsistency {
        thetas,
        p_mean,
        p_std,
        mean_of_std,
        max_std,
        mean_amplitude,
        objectives,
    })
}
