//! Batch driver for the numerical studies.
//!
//! Every subcommand runs one study. A JSON config carries the full experiment;
//! flags override individual fields, and without `--config` the flags alone
//! describe a Fubini-Study experiment.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails or is
//! inconclusive, 2 for configuration and I/O errors, 3 for numerical errors.

use bergman_lab::bundle::MetricDescriptor;
use bergman_lab::experiments::{run_and_emit, BundleConfig, ExperimentConfig, StudyKind, Verdict};
use bergman_lab::manifold::ManifoldKind;
use bergman_lab::Error;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bergman-lab", version, about = "Bergman kernel and random zero studies on projective models")]
struct Cli {
    #[command(subcommand)]
    study: Study,
}

#[derive(Subcommand)]
enum Study {
    /// Sup statistic of the log Bergman kernel off the pole set.
    Bergman(Overrides),
    /// Section-space dimensions against the closed form.
    Dimension(Overrides),
    /// Rate of convergence of random zero currents.
    Equidistribution(Overrides),
    /// Fubini-Study currents against the curvature currents.
    FsConvergence(Overrides),
    /// Diagonal sequence for the interpolated metrics.
    Approximation(Overrides),
    /// Monte Carlo mean of zero currents against the Fubini-Study current.
    ExpectedZero(Overrides),
}

impl Study {
    fn split(self) -> (StudyKind, Overrides) {
        match self {
            Study::Bergman(o) => (StudyKind::Bergman, o),
            Study::Dimension(o) => (StudyKind::Dimension, o),
            Study::Equidistribution(o) => (StudyKind::Equidistribution, o),
            Study::FsConvergence(o) => (StudyKind::FsConvergence, o),
            Study::Approximation(o) => (StudyKind::Approximation, o),
            Study::ExpectedZero(o) => (StudyKind::ExpectedZero, o),
        }
    }
}

#[derive(Args, Default)]
struct Overrides {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// p1, p2 or p1xp1.
    #[arg(long)]
    manifold: Option<ManifoldKind>,
    /// Bundle multidegree, comma separated; repeat for several bundles.
    #[arg(long, value_parser = parse_degree)]
    degree: Vec<Vec<i64>>,
    #[arg(long)]
    p_min: Option<i64>,
    #[arg(long)]
    p_max: Option<i64>,
    #[arg(long)]
    p_step: Option<i64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Single-threaded run with byte-identical output.
    #[arg(long)]
    serial: bool,
}

fn parse_degree(s: &str) -> Result<Vec<i64>, String> {
    s.split(',').map(|t| t.trim().parse::<i64>().map_err(|e| format!("bad degree {t:?}: {e}"))).collect()
}

fn p_grid(lo: i64, hi: i64, step: i64) -> Result<Vec<i64>, Error> {
    if step < 1 || hi < lo {
        return Err(Error::Config(format!("empty p range {lo}..={hi} step {step}")));
    }
    Ok((lo..=hi).step_by(step as usize).collect())
}

fn build_config(kind: StudyKind, o: Overrides) -> Result<ExperimentConfig, Error> {
    let mut c = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let manifold = o.manifold.unwrap_or(ManifoldKind::P1);
            let g = (kind == StudyKind::Approximation).then_some(MetricDescriptor::FubiniStudy);
            let degree = vec![1; manifold.ndeg()];
            let bundle = BundleConfig { degree, h: MetricDescriptor::FubiniStudy, g };
            ExperimentConfig::new(kind, manifold, vec![bundle], p_grid(4, 16, 4)?)
        }
    };
    if o.config.is_some() && c.study != kind {
        log::warn!("config names study {}, running {kind}", c.study);
    }
    c.study = kind;
    if let Some(m) = o.manifold {
        c.manifold = m;
    }
    if !o.degree.is_empty() {
        let template = c.bundles.first().cloned();
        c.bundles = o
            .degree
            .into_iter()
            .enumerate()
            .map(|(i, degree)| {
                let base = c.bundles.get(i).or(template.as_ref());
                BundleConfig { degree, h: base.map_or(MetricDescriptor::FubiniStudy, |b| b.h.clone()), g: base.and_then(|b| b.g.clone()) }
            })
            .collect();
    }
    if o.p_min.is_some() || o.p_max.is_some() || o.p_step.is_some() {
        let first = c.p_grid.first().copied().unwrap_or(1);
        let last = c.p_grid.last().copied().unwrap_or(first);
        c.p_grid = p_grid(o.p_min.unwrap_or(first), o.p_max.unwrap_or(last), o.p_step.unwrap_or(1))?;
    }
    c.samples = o.samples.unwrap_or(c.samples);
    c.seed = o.seed.unwrap_or(c.seed);
    c.resolution = o.resolution.unwrap_or(c.resolution);
    if let Some(out) = o.out {
        c.out = out;
    }
    if o.cache.is_some() {
        c.cache = o.cache;
    }
    c.serial |= o.serial;
    c.validate()?;
    Ok(c)
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config() || matches!(e, Error::Io(_)) {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (kind, overrides) = Cli::parse().study.split();
    let result = build_config(kind, overrides).and_then(|c| run_and_emit(&c));
    let (report, files) = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    for (name, flag) in &report.flags {
        let verdict = match flag.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        println!("{verdict:<12} {name}: {}", flag.detail);
    }
    for path in [&files.csv, &files.json, &files.svg] {
        println!("wrote {}", path.display());
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
