//! Command implementations. Each takes a resolved config and an output
//! directory, writes its artifacts plus a manifest, and returns the file
//! list with a one-line summary for the terminal.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::json;

use coco_core::analytic::{eval, LinearField, SeriesSolver};
use coco_core::colloc;
use coco_core::designer::{cross_direction_report, design_direct};
use coco_core::error::{Error, Result};
use coco_core::geometry::shapes;
use coco_core::training::studies::{consistency_study, stability_study};
use coco_core::training::{self, Inverse};

use crate::artifacts;
use crate::config::ExperimentConfig;

#[derive(Debug)]
pub struct Written {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Library shapes in listing order.
pub const SHAPE_NAMES: [&str; 5] = ["disk", "square", "fish", "kite", "spike"];

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{}{:+}i", c.re, c.im)
    }
}

pub fn shapes_listing() -> String {
    let mut out = String::new();
    for name in SHAPE_NAMES {
        let map = shapes::by_name(name).expect("library shape");
        let coeffs: Vec<String> = map
            .ak()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(i, c)| format!("a{} = {}", i + 1, fmt_coeff(*c)))
            .collect();
        let coeffs = if coeffs.is_empty() { "(none)".to_string() } else { coeffs.join(", ") };
        out.push_str(&format!("{:<8} gamma {}  {}\n", name, map.gamma(), coeffs));
    }
    out.push_str("ellipse:q  parametric, a1 = q (e.g. \"ellipse:0.25\" or \"ellipse:0.2,0.1\")\n");
    out
}

pub fn solve(cfg: &ExperimentConfig, out: &Path) -> Result<Written> {
    let map = cfg.resolve_map()?;
    let density = cfg.resolve_density(&map)?;
    let solver = SeriesSolver::new(&map, cfg.sigma_c, cfg.sigma_m, cfg.solver.big_n)?;
    let field = LinearField::new(cfg.train.field.0, cfg.train.field.1);
    let row = solver.scattering_row(&density, &field)?;

    let (n_ext, _, n_bd) = cfg.solver.counts;
    let pts = colloc::exterior_grid(&map, n_ext, n_bd, cfg.solver.l)?;
    let u_p: Vec<f64> = pts.iter().map(|p| eval::exterior_value(&map, &field, &row, p.w)).collect();
    let h: Vec<f64> = pts.iter().map(|p| field.value(p.z)).collect();
    let ws: Vec<Complex64> = pts.iter().map(|p| p.w).collect();
    let p_neutral = eval::p_neutral(&row, &ws);
    let sup = eval::sup_perturbation(&row, &ws);

    let field_path = out.join("field.csv");
    artifacts::write_text(&field_path, &artifacts::field_csv(&pts, &u_p, &h))?;
    let density_path = out.join("density.json");
    artifacts::write_density(&density_path, &density)?;
    let metrics_path = out.join("metrics.json");
    artifacts::write_json(
        &metrics_path,
        &json!({
            "schema_version": artifacts::SCHEMA_VERSION,
            "p_neutral": p_neutral,
            "sup_perturbation": sup,
            "big_n": cfg.solver.big_n,
            "n_points": pts.len(),
            "field": [cfg.train.field.0, cfg.train.field.1],
        }),
    )?;
    let manifest = artifacts::write_manifest(out, "solve", cfg)?;
    Ok(Written {
        files: vec![field_path, density_path, metrics_path, manifest],
        summary: format!("solve: p_neutral {p_neutral:.3e}, sup {sup:.3e} over {} points", pts.len()),
    })
}

pub fn design(cfg: &ExperimentConfig, out: &Path) -> Result<Written> {
    let map = cfg.resolve_map()?;
    let dcfg = cfg.design_config();
    let res = design_direct(&map, cfg.sigma_c, cfg.sigma_m, &dcfg)?;
    let report = cross_direction_report(&map, &res.density, cfg.sigma_c, cfg.sigma_m)?;

    let density_path = out.join("density.json");
    artifacts::write_density(&density_path, &res.density)?;
    let trace_path = out.join("trace.csv");
    artifacts::write_text(&trace_path, &artifacts::objective_trace_csv(&res.trace))?;
    let report_path = out.join("cross_report.json");
    let mut report_value = serde_json::to_value(&report)?;
    report_value["schema_version"] = json!(artifacts::SCHEMA_VERSION);
    artifacts::write_json(&report_path, &report_value)?;
    let metrics_path = out.join("metrics.json");
    artifacts::write_json(
        &metrics_path,
        &json!({
            "schema_version": artifacts::SCHEMA_VERSION,
            "best_objective": res.best_objective,
            "admissible": res.admissible,
            "p0": res.density.p0(),
            "order": res.density.order(),
            "p_neutral": report.p_neutral,
            "independence_ratio": report.independence_ratio,
        }),
    )?;
    let manifest = artifacts::write_manifest(out, "design", cfg)?;
    Ok(Written {
        files: vec![density_path, trace_path, report_path, metrics_path, manifest],
        summary: format!(
            "design: objective {:.3e}, p0 {:.4}, p_neutral [{:.2e}, {:.2e}, {:.2e}]",
            res.best_objective, res.density.p0(), report.p_neutral[0], report.p_neutral[1],
            report.p_neutral[2]
        ),
    })
}

pub fn train(cfg: &ExperimentConfig, out: &Path) -> Result<Written> {
    let map = cfg.resolve_map()?;
    let tcfg = cfg.train_config();
    let run = training::train(&map, &tcfg)?;
    let report = training::credibility_eval(&map, &run, Some(cfg.solver.big_n))?;

    let mut files = Vec::new();
    let trace_path = out.join("loss_trace.csv");
    artifacts::write_text(&trace_path, &artifacts::loss_trace_csv(&run.trace))?;
    files.push(trace_path);
    let int_path = out.join("params_u_int.json");
    artifacts::write_params(&int_path, &run.u_int)?;
    files.push(int_path);
    let ext_path = out.join("params_u_ext.json");
    artifacts::write_params(&ext_path, &run.u_ext)?;
    files.push(ext_path);
    if let Inverse::Classical(net) = &run.inverse {
        let p_path = out.join("params_p_nn.json");
        artifacts::write_params(&p_path, net)?;
        files.push(p_path);
    }
    // coco: the trained density; classical: the Fourier fit used for credibility
    let density_path = out.join("density.json");
    artifacts::write_density(&density_path, &report.density)?;
    files.push(density_path);
    let metrics_path = out.join("metrics.json");
    artifacts::write_json(
        &metrics_path,
        &json!({
            "schema_version": artifacts::SCHEMA_VERSION,
            "cred": report.metrics.cred,
            "sup": report.metrics.sup,
            "p_neutral": report.metrics.p_neutral,
            "admissible": report.admissible,
            "diverged": run.diverged,
            "iterations_run": run.trace.len(),
            "final_loss": run.trace.last().map(|b| b.total),
            "fit_rel_error": report.fit_rel_error,
        }),
    )?;
    files.push(metrics_path);
    files.push(artifacts::write_manifest(out, "train", cfg)?);
    Ok(Written {
        files,
        summary: format!(
            "train: cred {:.3e}, sup {:.3e}, p_neutral {:.3e}{}{}",
            report.metrics.cred,
            report.metrics.sup,
            report.metrics.p_neutral,
            report
                .fit_rel_error
                .map(|e| format!(", fourier fit {e:.2e}"))
                .unwrap_or_default(),
            if run.diverged { " [DIVERGED]" } else { "" }
        ),
    })
}

pub fn study(cfg: &ExperimentConfig, out: &Path) -> Result<Written> {
    let map = cfg.resolve_map()?;
    let tcfg = cfg.train_config();
    let seeds = &cfg.study.seeds;
    match cfg.study.kind.as_str() {
        "consistency" => {
            let rep = consistency_study(&map, &tcfg, seeds)?;
            let stats_path = out.join("interface_stats.csv");
            artifacts::write_text(
                &stats_path,
                &artifacts::interface_stats_csv(&rep.thetas, &rep.p_mean, &rep.p_std),
            )?;
            let summary_path = out.join("study_summary.csv");
            artifacts::write_text(&summary_path, &artifacts::study_summary_csv(&rep))?;
            let json_path = out.join("study.json");
            let mut v = serde_json::to_value(&rep)?;
            v["schema_version"] = json!(artifacts::SCHEMA_VERSION);
            artifacts::write_json(&json_path, &v)?;
            let manifest = artifacts::write_manifest(out, "study", cfg)?;
            Ok(Written {
                files: vec![stats_path, summary_path, json_path, manifest],
                summary: format!(
                    "consistency: {} runs ({} excluded), interface mean-of-std {:.3e}",
                    seeds.len() - rep.excluded, rep.excluded, rep.mean_of_std
                ),
            })
        }
        "stability" => {
            let rows = stability_study(&map, &tcfg, &cfg.study.sigma_c_list, seeds)?;
            let table_path = out.join("stability.csv");
            artifacts::write_text(&table_path, &artifacts::stability_csv(&rows))?;
            let json_path = out.join("study.json");
            artifacts::write_json(
                &json_path,
                &json!({
                    "schema_version": artifacts::SCHEMA_VERSION,
                    "rows": serde_json::to_value(&rows)?,
                }),
            )?;
            let manifest = artifacts::write_manifest(out, "study", cfg)?;
            Ok(Written {
                files: vec![table_path, json_path, manifest],
                summary: format!("stability: {} contrast values, {} seeds", rows.len(), seeds.len()),
            })
        }
        other => Err(Error::Config(format!(
            "unknown study kind `{other}` (expected consistency or stability)"
        ))),
    }
}

/// Re-execute the command recorded in a manifest after verifying that the
/// inputs still hash to the recorded value.
pub fn rerun(manifest_path: &Path, out: &Path) -> Result<Written> {
    let manifest = artifacts::read_manifest(manifest_path)?;
    let fresh = artifacts::input_hash(&manifest.config)?;
    if fresh != manifest.input_hash {
        return Err(Error::Config(format!(
            "input hash mismatch: manifest records {}, inputs now hash to {fresh}",
            manifest.input_hash
        )));
    }
    dispatch(&manifest.command, &manifest.config, out)
}

pub fn dispatch(command: &str, cfg: &ExperimentConfig, out: &Path) -> Result<Written> {
    match command {
        "solve" => solve(cfg, out),
        "design" => design(cfg, out),
        "train" => train(cfg, out),
        "study" => study(cfg, out),
        other => Err(Error::Config(format!("unknown command `{other}` in manifest"))),
    }
}
