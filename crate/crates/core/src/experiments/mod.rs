//! Configured studies: parsing, caching, orchestration and report emission.

pub mod cache;
pub mod config;
pub mod report;
pub mod studies;

pub use cache::{SpaceCache, SpaceKey};
pub use config::{canonical_hash, BundleConfig, ExperimentConfig, StudyKind, Tolerances};
pub use report::{emit_report, EmittedFiles, RunMeta, StudyReport, Table, Verdict};
pub use studies::run_study;

use crate::error::Result;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// Runs a study with its configured cache and serial mode and writes every report file.
pub fn run_and_emit(config: &ExperimentConfig) -> Result<(StudyReport, EmittedFiles)> {
    crate::quadrature::set_serial(config.serial);
    let cache = SpaceCache::new(config.cache.as_deref())?;
    let start = Instant::now();
    let report = run_study(config, &cache)?;
    let meta = RunMeta {
        config_hash: report.config_hash.clone(),
        unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        elapsed_seconds: start.elapsed().as_secs_f64(),
        cache_hits: cache.hits(),
        cache_misses: cache.misses(),
        serial: config.serial,
    };
    let files = emit_report(&report, &meta, &config.out)?;
    Ok((report, files))
}
