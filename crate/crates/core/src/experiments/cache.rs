//! Content-addressed store for completed section spaces.

use super::config::canonical_hash;
use crate::bundle::{LineBundle, MetricDescriptor, MetricWeight};
use crate::error::{Error, Result};
use crate::sections::{build_space, space_basis, SectionSpace};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// Everything that determines a section space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceKey {
    pub bundle: LineBundle,
    pub metric: MetricDescriptor,
    pub p: i64,
    pub adjoint: bool,
    pub resolution: usize,
}

impl SpaceKey {
    pub fn hash(&self) -> String {
        canonical_hash(self)
    }
}

#[derive(Serialize, Deserialize)]
struct Payload {
    key: SpaceKey,
    /// Surviving-monomial mask over the full basis, when the filter produces one.
    mask: Option<Vec<bool>>,
    dim: usize,
    gram: Vec<[f64; 2]>,
    transform: Vec<[f64; 2]>,
    diagonal: bool,
    condition: f64,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, msg.into()))
}

fn flatten(m: &DMatrix<C64>) -> Vec<[f64; 2]> {
    m.iter().map(|z| [z.re, z.im]).collect()
}

fn unflatten(d: usize, v: &[[f64; 2]]) -> Option<DMatrix<C64>> {
    (v.len() == d * d).then(|| DMatrix::from_iterator(d, d, v.iter().map(|z| C64::new(z[0], z[1]))))
}

/// Section-space builder with an optional on-disk cache and hit counters.
#[derive(Debug, Default)]
pub struct SpaceCache {
    dir: Option<PathBuf>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl SpaceCache {
    pub fn new(dir: Option<&Path>) -> Result<SpaceCache> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(SpaceCache { dir: dir.map(Path::to_path_buf), ..Default::default() })
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::SeqCst)
    }

    fn path(&self, key: &SpaceKey) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{}.json", key.hash())))
    }

    /// The space for `(bundle, metric, p)`, from the cache when a valid entry exists.
    pub fn space(&self, bundle: &LineBundle, metric: &Arc<MetricWeight>, p: i64, adjoint: bool, resolution: usize) -> Result<SectionSpace> {
        let key = SpaceKey { bundle: bundle.clone(), metric: metric.descriptor.clone(), p, adjoint, resolution };
        let Some(path) = self.path(&key) else {
            self.misses.fetch_add(1, Ordering::SeqCst);
            return build_space(bundle, metric, p, adjoint, resolution);
        };
        if path.exists() {
            match self.load(&path, &key, metric) {
                Ok(s) => {
                    self.hits.fetch_add(1, Ordering::SeqCst);
                    return Ok(s);
                }
                Err(e) => log::warn!("ignoring cache entry {}: {e}", path.display()),
            }
        }
        self.misses.fetch_add(1, Ordering::SeqCst);
        let space = build_space(bundle, metric, p, adjoint, resolution)?;
        if let Err(e) = self.store(&path, &key, &space) {
            log::warn!("cannot write cache entry {}: {e}", path.display());
        }
        Ok(space)
    }

    fn load(&self, path: &Path, key: &SpaceKey, metric: &Arc<MetricWeight>) -> Result<SectionSpace> {
        let text = std::fs::read_to_string(path)?;
        let pl: Payload = serde_json::from_str(&text).map_err(|e| corrupt(format!("corrupt entry: {e}")))?;
        if &pl.key != key {
            return Err(corrupt("key mismatch"));
        }
        let basis = space_basis(&key.bundle, key.p, key.adjoint)?;
        if pl.mask.as_ref().is_some_and(|m| m.len() != basis.exponents.len()) {
            return Err(corrupt("mask length differs from the basis size"));
        }
        let (gram, t) = match (unflatten(pl.dim, &pl.gram), unflatten(pl.dim, &pl.transform)) {
            (Some(g), Some(t)) => (g, t),
            _ => return Err(corrupt("matrix sizes differ from the stored dimension")),
        };
        let space = SectionSpace::from_parts(basis, metric.clone(), gram, t, pl.diagonal, pl.condition)?;
        if space.filtered.mask != pl.mask {
            return Err(corrupt("stored mask disagrees with the integrability filter"));
        }
        Ok(space)
    }

    fn store(&self, path: &Path, key: &SpaceKey, space: &SectionSpace) -> Result<()> {
        let pl = Payload {
            key: key.clone(),
            mask: space.filtered.mask.clone(),
            dim: space.dim(),
            gram: flatten(&space.gram),
            transform: flatten(space.transform()?),
            diagonal: space.diagonal,
            condition: space.condition,
        };
        let dir = path.parent().ok_or_else(|| corrupt("cache path has no parent"))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer(&mut tmp, &pl).map_err(std::io::Error::from)?;
        tmp.flush()?;
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{line_bundle, log_pole_metric};
    use crate::manifold::{build_manifold, ManifoldKind};
    use crate::poly::PolySpec;

    #[test]
    fn round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let m = build_manifold(ManifoldKind::P1);
        let b = line_bundle(&m, &[1]).unwrap();
        let h = Arc::new(log_pole_metric(&b, &PolySpec::monomial(&[1, 0]), 0.5).unwrap());
        let cache = SpaceCache::new(Some(dir.path())).unwrap();
        let a = cache.space(&b, &h, 9, false, 32).unwrap();
        let again = cache.space(&b, &h, 9, false, 32).unwrap();
        assert_eq!((cache.hits(), cache.misses()), (1, 1));
        assert_eq!(a.gram, again.gram);
        assert_eq!(a.transform().unwrap(), again.transform().unwrap());

        let key = SpaceKey { bundle: b.clone(), metric: h.descriptor.clone(), p: 9, adjoint: false, resolution: 32 };
        let other = SpaceKey { resolution: 33, ..key.clone() };
        assert_ne!(key.hash(), other.hash());
        std::fs::write(cache.path(&key).unwrap(), "{not json").unwrap();
        let fresh = cache.space(&b, &h, 9, false, 32).unwrap();
        assert_eq!(fresh.gram, a.gram);
        assert_eq!((cache.hits(), cache.misses()), (1, 2));
    }
}
