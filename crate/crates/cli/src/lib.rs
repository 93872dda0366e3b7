//! Batch interface: TOML experiment configs in, CSV/JSON artifacts out.
//! Every run writes a manifest sufficient to reproduce it bit-for-bit.

pub mod artifacts;
pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;

/// Output directory precedence: CLI flag, then `COCO_OUT_DIR`, then the
/// config's `out_dir`, then `./coco-out`.
pub fn resolve_out_dir(flag: Option<PathBuf>, cfg_dir: Option<&Path>) -> PathBuf {
    flag.or_else(|| std::env::var_os("COCO_OUT_DIR").map(PathBuf::from))
        .or_else(|| cfg_dir.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("coco-out"))
}

/// Thread-count precedence: CLI flag, then `COCO_THREADS`, then the config.
pub fn resolve_threads(flag: Option<usize>, cfg_threads: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("COCO_THREADS").ok().and_then(|s| s.parse().ok()))
        .or(cfg_threads)
}

/// Pin the worker-thread count. With one thread (or the sequential build)
/// runs are bit-reproducible; the deterministic reductions make the parallel
/// build reproducible at any count as well.
pub fn apply_threads(n: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = n {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}
