//! Artifact files: JSON for scalars/coefficients/manifests, CSV for point
//! data. Every schema carries `schema_version`; floats are written with
//! shortest round-trip formatting so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::json;
use sha2::{Digest, Sha256};

use coco_core::analytic::InterfaceDensity;
use coco_core::colloc::ExtPoint;
use coco_core::error::{Error, Result};
use coco_core::nn::Mlp;
use coco_core::training::studies::{ConsistencyReport, StabilityRow};
use coco_core::training::LossBreakdown;

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn check_version(value: &serde_json::Value, what: &str) -> Result<()> {
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => Ok(()),
        other => Err(Error::Config(format!(
            "{what}: unsupported schema_version {other:?} (expected {SCHEMA_VERSION})"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Density

pub fn density_value(d: &InterfaceDensity) -> serde_json::Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "gamma": d.gamma(),
        "order": d.order(),
        "p0": d.p0(),
        "pk": d.pk().iter().map(|c| vec![c.re, c.im]).collect::<Vec<_>>(),
    })
}

pub fn write_density(path: &Path, d: &InterfaceDensity) -> Result<()> {
    write_json(path, &density_value(d))
}

pub fn read_density(path: &Path) -> Result<InterfaceDensity> {
    let v = read_json(path)?;
    check_version(&v, "density file")?;
    let err = |what: &str| Error::Config(format!("density file {}: missing {what}", path.display()));
    let gamma = v.get("gamma").and_then(|x| x.as_f64()).ok_or_else(|| err("gamma"))?;
    let p0 = v.get("p0").and_then(|x| x.as_f64()).ok_or_else(|| err("p0"))?;
    let pk_raw = v.get("pk").and_then(|x| x.as_array()).ok_or_else(|| err("pk"))?;
    let mut pk = Vec::with_capacity(pk_raw.len());
    for c in pk_raw {
        let pair = c.as_array().filter(|a| a.len() == 2).ok_or_else(|| err("pk pair"))?;
        let (re, im) = (pair[0].as_f64(), pair[1].as_f64());
        match (re, im) {
            (Some(re), Some(im)) => pk.push(Complex64::new(re, im)),
            _ => return Err(err("pk pair")),
        }
    }
    InterfaceDensity::new(gamma, p0, pk)
}

// ---------------------------------------------------------------------------
// Network parameters

pub fn write_params(path: &Path, net: &Mlp) -> Result<()> {
    write_json(
        path,
        &json!({
            "schema_version": SCHEMA_VERSION,
            "widths": net.widths(),
            "params": net.params(),
        }),
    )
}

pub fn read_params(path: &Path) -> Result<Mlp> {
    let v = read_json(path)?;
    check_version(&v, "parameter file")?;
    let err = |what: &str| Error::Config(format!("parameter file: bad {what}"));
    let widths: Vec<usize> = v
        .get("widths")
        .and_then(|x| x.as_array())
        .ok_or_else(|| err("widths"))?
        .iter()
        .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| err("widths")))
        .collect::<Result<_>>()?;
    let params: Vec<f64> = v
        .get("params")
        .and_then(|x| x.as_array())
        .ok_or_else(|| err("params"))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| err("params")))
        .collect::<Result<_>>()?;
    Mlp::from_params(&widths, params)
}

// ---------------------------------------------------------------------------
// CSV tables

pub fn field_csv(points: &[ExtPoint], u_p: &[f64], h: &[f64]) -> String {
    let mut s = String::from("rho,theta,x1,x2,u_p,h\n");
    for (i, p) in points.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:?},{:?},{:?},{:?},{:?},{:?}",
            p.rho, p.theta, p.z.re, p.z.im, u_p[i], h[i]
        );
    }
    s
}

pub fn loss_trace_csv(trace: &[LossBreakdown]) -> String {
    let mut s = String::from("iteration,pde_int,pde_ext,bd1,bd2,neutral,positivity,reg,total\n");
    for (i, b) in trace.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            b.pde_int, b.pde_ext, b.bd1, b.bd2, b.neutral, b.positivity, b.reg, b.total
        );
    }
    s
}

pub fn objective_trace_csv(trace: &[f64]) -> String {
    let mut s = String::from("iteration,objective\n");
    for (i, v) in trace.iter().enumerate() {
        let _ = writeln!(s, "{i},{v:?}");
    }
    s
}

pub fn interface_stats_csv(thetas: &[f64], mean: &[f64], std: &[f64]) -> String {
    let mut s = String::from("theta,p_mean,p_std\n");
    for i in 0..thetas.len() {
        let _ = writeln!(s, "{:?},{:?},{:?}", thetas[i], mean[i], std[i]);
    }
    s
}

/// Aggregate table of a consistency study: per-metric mean/std rows plus the
/// interface spread summary.
pub fn study_summary_csv(rep: &ConsistencyReport) -> String {
    let mut s = String::from("stat,cred,sup,p_neutral\n");
    let m = &rep.metric_mean;
    let d = &rep.metric_std;
    let _ = writeln!(s, "mean,{:?},{:?},{:?}", m.cred, m.sup, m.p_neutral);
    let _ = writeln!(s, "std,{:?},{:?},{:?}", d.cred, d.sup, d.p_neutral);
    let _ = writeln!(s, "interface_mean_of_std,{:?},,", rep.mean_of_std);
    let _ = writeln!(s, "excluded_runs,{},,", rep.excluded);
    s
}

pub fn stability_csv(rows: &[StabilityRow]) -> String {
    let mut s = String::from("sigma_c,interface_mean_of_std,cred_mean,sup_mean,p_neutral_mean,excluded\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:?},{:?},{:?},{:?},{:?},{}",
            r.sigma_c, r.mean_of_std, r.metric_mean.cred, r.metric_mean.sup,
            r.metric_mean.p_neutral, r.excluded
        );
    }
    s
}

// ---------------------------------------------------------------------------
// Manifest

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    /// Hash of the resolved config plus any referenced input files.
    pub input_hash: String,
    pub config: ExperimentConfig,
}

/// Content hash over the resolved config and referenced density file.
pub fn input_hash(cfg: &ExperimentConfig) -> Result<String> {
    let cfg_json = serde_json::to_vec(cfg)?;
    let mut parts: Vec<Vec<u8>> = vec![cfg_json];
    if let Some(crate::config::DensitySpec::File { file }) = &cfg.density {
        parts.push(std::fs::read(file)?);
    }
    let refs: Vec<&[u8]> = parts.iter().map(|p| p.as_slice()).collect();
    Ok(sha256_hex(&refs))
}

pub fn write_manifest(dir: &Path, command: &str, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        input_hash: input_hash(cfg)?,
        config: cfg.clone(),
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_text(&path, &text)?;
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("manifest parse: {e}")))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "manifest: unsupported schema_version {}",
            manifest.schema_version
        )));
    }
    Ok(manifest)
}
