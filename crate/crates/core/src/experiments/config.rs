use crate::bundle::{line_bundle, MetricDescriptor};
use crate::error::{Error, Result};
use crate::manifold::{build_manifold, ManifoldKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Bergman,
    Dimension,
    Equidistribution,
    FsConvergence,
    Approximation,
    ExpectedZero,
}

impl StudyKind {
    pub const ALL: [StudyKind; 6] = [
        StudyKind::Bergman,
        StudyKind::Dimension,
        StudyKind::Equidistribution,
        StudyKind::FsConvergence,
        StudyKind::Approximation,
        StudyKind::ExpectedZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Bergman => "bergman",
            StudyKind::Dimension => "dimension",
            StudyKind::Equidistribution => "equidistribution",
            StudyKind::FsConvergence => "fs-convergence",
            StudyKind::Approximation => "approximation",
            StudyKind::ExpectedZero => "expected-zero",
        }
    }

    /// Whether the study works in `L^p ⊗ K_X` unless the config says otherwise.
    fn default_adjoint(self) -> bool {
        !matches!(self, StudyKind::Dimension | StudyKind::Approximation)
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StudyKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Config(format!("unknown study {s:?}")))
    }
}

/// One line bundle with its metric `h` and, for interpolation studies, the auxiliary `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleConfig {
    pub degree: Vec<i64>,
    #[serde(default = "fs_descriptor")]
    pub h: MetricDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<MetricDescriptor>,
}

fn fs_descriptor() -> MetricDescriptor {
    MetricDescriptor::FubiniStudy
}

/// Pass/fail thresholds. All of them are echoed into the JSON summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Accepted range for fitted log-log decay slopes.
    pub slope_range: Option<[f64; 2]>,
    /// Fits below this R² are inconclusive.
    pub r2_min: f64,
    /// Largest accepted exceedance frequency of `c λ_p / p` at the last p.
    pub exceedance_budget: f64,
    /// Largest accepted `c` in `c⁻¹ ≤ d_p / pⁿ ≤ c`.
    pub ratio_bound: Option<f64>,
    pub mass_tolerance: f64,
    /// Errors at or below this level count as converged in monotonicity checks.
    pub error_floor: f64,
    /// Fraction of dictionary forms whose error column must decrease.
    pub monotone_fraction: f64,
    /// Fraction of forms whose Monte Carlo gap must lie within `se_multiplier` standard errors.
    pub coverage: f64,
    pub se_multiplier: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            slope_range: None,
            r2_min: 0.8,
            exceedance_budget: 0.05,
            ratio_bound: None,
            mass_tolerance: 1e-5,
            error_floor: 1e-12,
            monotone_fraction: 10.0 / 12.0,
            coverage: 0.95,
            se_multiplier: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub study: StudyKind,
    pub manifold: ManifoldKind,
    pub bundles: Vec<BundleConfig>,
    pub p_grid: Vec<i64>,
    #[serde(default = "one")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_exclusion")]
    pub exclusion: f64,
    /// Sections of `L^p ⊗ K_X`; the default depends on the study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjoint: Option<bool>,
    /// Interpolation weights `ε_j` for approximation runs.
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Rate sequence `λ_p`, one value per grid point; `log² p` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
    #[serde(default)]
    pub serial: bool,
}

fn one() -> usize {
    1
}
fn default_resolution() -> usize {
    64
}
fn default_exclusion() -> f64 {
    0.2
}
fn default_eps() -> Vec<f64> {
    vec![0.5, 0.25, 0.125]
}
fn default_out() -> PathBuf {
    PathBuf::from("reports")
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(study: StudyKind, manifold: ManifoldKind, bundles: Vec<BundleConfig>, p_grid: Vec<i64>) -> Self {
        ExperimentConfig {
            study,
            manifold,
            bundles,
            p_grid,
            samples: 1,
            seed: 0,
            resolution: default_resolution(),
            exclusion: default_exclusion(),
            adjoint: None,
            eps: default_eps(),
            lambda: None,
            tolerances: Tolerances::default(),
            out: default_out(),
            cache: None,
            serial: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad experiment config: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn adjoint(&self) -> bool {
        self.adjoint.unwrap_or(self.study.default_adjoint())
    }

    /// `λ_p` for every grid point.
    pub fn lambdas(&self) -> Vec<f64> {
        match &self.lambda {
            Some(l) => l.clone(),
            None => self.p_grid.iter().map(|&p| (p as f64).ln().powi(2)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.p_grid.is_empty() || self.p_grid[0] < 1 || self.p_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("p grid must be positive and strictly increasing");
        }
        if self.samples == 0 {
            return bad("samples must be at least 1");
        }
        if self.resolution < 8 {
            return bad("resolution must be at least 8");
        }
        if self.bundles.is_empty() || self.bundles.len() > self.manifold.dim() {
            return bad("need between 1 and dim X bundles");
        }
        if !(self.exclusion >= 0.0) {
            return bad("exclusion radius must be nonnegative");
        }
        if let Some(l) = &self.lambda {
            if l.len() != self.p_grid.len() || l.iter().any(|x| !(*x > 0.0)) {
                return bad("lambda needs one positive value per grid point");
            }
        }
        let m = build_manifold(self.manifold);
        for b in &self.bundles {
            let bundle = line_bundle(&m, &b.degree)?;
            b.h.build(&bundle)?;
            if let Some(g) = &b.g {
                g.build(&bundle)?;
            }
        }
        if self.study == StudyKind::Approximation {
            crate::distance::ApproximationSchedule::new(self.eps.clone(), self.p_grid.clone())?;
            if self.bundles.iter().any(|b| b.g.is_none()) {
                return bad("approximation runs need a g metric for every bundle");
            }
        }
        Ok(())
    }

    /// Hash of everything that affects results; output and cache locations and the
    /// serial flag are left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.cache = None;
        c.serial = false;
        c.adjoint = Some(self.adjoint());
        c.lambda = Some(self.lambdas());
        canonical_hash(&c)
    }
}

/// SHA-256 of the canonical JSON form: sorted keys and shortest round-trip decimals.
pub fn canonical_hash<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("config values serialize");
    let text = serde_json::to_string(&v).expect("json values serialize");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::new(StudyKind::Dimension, ManifoldKind::P1, vec![BundleConfig { degree: vec![1], h: fs_descriptor(), g: None }], vec![4, 8])
    }

    #[test]
    fn hash_ignores_locations() {
        let a = base();
        let mut b = a.clone();
        b.out = "/tmp/elsewhere".into();
        b.cache = Some("/tmp/cache".into());
        b.serial = true;
        assert_eq!(a.hash(), b.hash());
        b.resolution = 65;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn validation() {
        assert!(base().validate().is_ok());
        let mut c = base();
        c.p_grid = vec![8, 4];
        assert!(c.validate().unwrap_err().is_config());
        let mut c = base();
        c.resolution = 4;
        assert!(c.validate().is_err());
        let mut c = base();
        let q = crate::poly::PolySpec { exponents: vec![vec![2, 0], vec![1, 0]], coefficients: vec!["1".into(), "1".into()], imaginary: None };
        c.bundles[0].h = MetricDescriptor::LogPole { q, t: 0.5 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip_with_defaults() {
        let text = r#"{"study":"fs-convergence","manifold":"P2","bundles":[{"degree":[1]}],"p_grid":[6,9,12]}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.study, StudyKind::FsConvergence);
        assert!(c.adjoint());
        assert_eq!(c.samples, 1);
        assert_eq!(ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap(), c);
    }
}
