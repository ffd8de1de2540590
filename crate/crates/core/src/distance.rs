//! Dictionary distances between currents, the interpolation expansion check, diagonal
//! selection over a `(j, p)` distance matrix, and the end-to-end approximation runs.

use crate::bundle::{curvature_pairing, LineBundle, interpolate_metrics, line_bundle, loci_in_general_position, MetricDescriptor, MetricWeight, Positivity};
use crate::error::{Error, Result};
use crate::manifold::{build_manifold, Manifold, ManifoldKind};
use crate::quadrature::{is_serial, Center, QuadratureRule};
use rayon::prelude::*;
use crate::sections::{build_space, SectionSpace};
use crate::testforms::{mass_form, test_form_dictionary, TestForm};
use crate::zeros::{common_zeros, sample_tuple, section_zero_set, zero_pairing, SectionTuple, SeedRecord};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// The normalized test forms of one codegree plus the (unnormalized) mass form.
#[derive(Clone, Debug)]
pub struct Dictionary {
    pub kind: ManifoldKind,
    pub codegree: usize,
    pub forms: Arc<Vec<TestForm>>,
    pub mass: TestForm,
}

impl Dictionary {
    pub fn new(m: &Manifold, codegree: usize) -> Result<Dictionary> {
        Ok(Dictionary { kind: m.kind, codegree, forms: test_form_dictionary(m, codegree)?, mass: mass_form(m, codegree)? })
    }

    pub fn id(&self) -> String {
        format!("{}/codegree-{}/{}", self.kind, self.codegree, self.forms.len())
    }

    /// Pairings of a current given by `pair` against every form.
    pub fn evaluate(&self, id: &str, pair: impl Fn(&TestForm) -> Result<f64>) -> Result<PairingVector> {
        let values = self.forms.iter().map(&pair).collect::<Result<Vec<_>>>()?;
        Ok(PairingVector {
            id: id.to_string(),
            dictionary: self.id(),
            names: self.forms.iter().map(|f| f.name.clone()).collect(),
            values,
            mass: pair(&self.mass)?,
            mass_norm: self.mass.c1_norm,
            meta: BTreeMap::new(),
        })
    }
}

/// Pairings of one current against a dictionary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingVector {
    pub id: String,
    pub dictionary: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Pairing with the mass form.
    pub mass: f64,
    /// C¹ norm of the mass form, used to normalize mass differences.
    pub mass_norm: f64,
    pub meta: BTreeMap<String, String>,
}

impl PairingVector {
    /// `Σ c_i v_i` over vectors on one dictionary.
    pub fn linear(id: &str, terms: &[(f64, &PairingVector)]) -> Result<PairingVector> {
        let first = terms.first().ok_or_else(|| Error::Config("empty linear combination".into()))?.1;
        let mut out = PairingVector { id: id.to_string(), values: vec![0.0; first.values.len()], mass: 0.0, meta: BTreeMap::new(), ..first.clone() };
        for (c, v) in terms {
            check_same(first, v)?;
            for (o, x) in out.values.iter_mut().zip(&v.values) {
                *o += c * x;
            }
            out.mass += c * v.mass;
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> PairingVector {
        let mut o = self.clone();
        o.values.iter_mut().for_each(|x| *x *= c);
        o.mass *= c;
        o
    }
}

fn check_same(a: &PairingVector, b: &PairingVector) -> Result<()> {
    if a.dictionary != b.dictionary || a.names != b.names {
        return Err(Error::Config(format!("dictionary mismatch: {} vs {}", a.dictionary, b.dictionary)));
    }
    Ok(())
}

/// `max_Φ |⟨a - b, Φ⟩|` over the normalized forms and the normalized mass form.
///
/// Every form has C¹ norm at most 1, so this is a lower bound for the distance
/// defined by the supremum over all such forms.
pub fn ds_distance(a: &PairingVector, b: &PairingVector) -> Result<f64> {
    check_same(a, b)?;
    let d = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(d.max((a.mass - b.mass).abs() / a.mass_norm))
}

/// Quadrature rule refined at the singular sets of the given metrics.
pub fn rule_for(kind: ManifoldKind, resolution: usize, metrics: &[&MetricWeight]) -> Result<QuadratureRule> {
    let centers: Vec<Center> = metrics.iter().flat_map(|h| h.centers()).collect();
    QuadratureRule::new(kind, resolution, &centers)
}

/// `⟨c₁(L₁,h₁) ∧ … ∧ c₁(L_m,h_m), Φ⟩` for `m ≤ 2`, from the closed-form decompositions.
///
/// A single metric without a decomposition is paired by integration by parts.
pub fn wedge_target(metrics: &[&MetricWeight], m: &Manifold, rule: &QuadratureRule, phi: &TestForm) -> Result<f64> {
    match metrics {
        [h] => match h.curvature_decomposition() {
            Ok(c) => c.pair(m, rule, phi),
            Err(Error::Unsupported(_)) => curvature_pairing(h, phi, m, rule),
            Err(e) => Err(e),
        },
        [a, b] => a.curvature_decomposition()?.wedge_pair(&b.curvature_decomposition()?, m, rule, phi),
        _ => Err(Error::Precondition(format!("wedges of {} currents are not supported", metrics.len()))),
    }
}

fn check_loci(hs: &[&MetricWeight], gs: &[&MetricWeight], m: &Manifold) -> Result<()> {
    let loci: Vec<_> = hs
        .iter()
        .zip(gs)
        .map(|(h, g)| h.singular_locus.iter().chain(&g.singular_locus).cloned().collect::<Vec<_>>())
        .collect();
    if !loci_in_general_position(&loci, m)? {
        return Err(Error::Precondition("singular sets are not in general position".into()));
    }
    Ok(())
}

/// `|⟨⋀ c₁(h_k^{1/(1+ε)} g_k^{ε/(1+ε)}), χ⟩ - Σ_J ε^{m-|J|}/(1+ε)^m ⟨⋀_{J} c₁(h) ∧ ⋀_{J^c} c₁(g), χ⟩|`.
///
/// For one metric pair both sides are integrated by parts against the potentials; for
/// two pairs both sides wedge the closed-form decompositions.
pub fn multilinear_expansion_residual(hs: &[&MetricWeight], gs: &[&MetricWeight], eps: f64, chi: &TestForm, m: &Manifold, rule: &QuadratureRule) -> Result<f64> {
    let k = hs.len();
    if k == 0 || k != gs.len() || k > m.n || k > 2 {
        return Err(Error::Precondition(format!("need 1 or 2 metric pairs with m ≤ n, got {k}/{}", gs.len())));
    }
    check_loci(hs, gs, m)?;
    let mixed: Vec<MetricWeight> = hs.iter().zip(gs).map(|(h, g)| interpolate_metrics(h, g, eps)).collect::<Result<_>>()?;
    let w = 1.0 / (1.0 + eps).powi(k as i32);
    if k == 1 {
        let direct = curvature_pairing(&mixed[0], chi, m, rule)?;
        let a = curvature_pairing(hs[0], chi, m, rule)?;
        let b = curvature_pairing(gs[0], chi, m, rule)?;
        return Ok((direct - (a + eps * b) * w).abs());
    }
    let direct = wedge_target(&[&mixed[0], &mixed[1]], m, rule, chi)?;
    let mut sum = 0.0;
    for mask in 0..4u32 {
        // bit k set: factor k uses h
        let pick = |i: usize| if mask >> i & 1 == 1 { hs[i] } else { gs[i] };
        let inh = mask.count_ones() as i32;
        sum += eps.powi(2 - inh) * wedge_target(&[pick(0), pick(1)], m, rule, chi)?;
    }
    Ok((direct - w * sum).abs())
}

/// Selected indices of a diagonal sequence; `None` marks unresolved rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSelection {
    pub p: Vec<Option<i64>>,
    pub distance: Vec<Option<f64>>,
}

impl DiagonalSelection {
    pub fn resolved(&self) -> bool {
        self.p.iter().all(Option::is_some)
    }
}

/// Row `j` (1-based) picks the smallest grid `p` above the last pick with `d[j][p] ≤ 1/j`.
pub fn diagonal_sequence(d: &[Vec<f64>], grid: &[i64]) -> Result<DiagonalSelection> {
    if grid.windows(2).any(|w| w[1] <= w[0]) || d.iter().any(|r| r.len() != grid.len()) {
        return Err(Error::Config("distance rows must match a strictly increasing p grid".into()));
    }
    let mut last = i64::MIN;
    let mut sel = DiagonalSelection { p: Vec::new(), distance: Vec::new() };
    for (j, row) in d.iter().enumerate() {
        let thr = 1.0 / (j + 1) as f64;
        let hit = grid.iter().zip(row).find(|(p, v)| **p > last && **v <= thr);
        match hit {
            Some((p, v)) => {
                last = *p;
                sel.p.push(Some(*p));
                sel.distance.push(Some(*v));
            }
            None => {
                sel.p.push(None);
                sel.distance.push(None);
            }
        }
    }
    Ok(sel)
}

/// Interpolation weights `ε_j` and the shared `p` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationSchedule {
    pub eps: Vec<f64>,
    pub p_grid: Vec<i64>,
}

impl ApproximationSchedule {
    pub fn new(eps: Vec<f64>, p_grid: Vec<i64>) -> Result<Self> {
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps list must be positive and strictly decreasing".into()));
        }
        if p_grid.is_empty() || p_grid[0] < 1 || p_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("p grid must be positive and strictly increasing".into()));
        }
        Ok(ApproximationSchedule { eps, p_grid })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationSetup {
    pub manifold: ManifoldKind,
    /// One multidegree per bundle.
    pub degrees: Vec<Vec<i64>>,
    pub h: Vec<MetricDescriptor>,
    pub g: Vec<MetricDescriptor>,
    /// Sections of `L^p ⊗ K_X` instead of `L^p`.
    pub adjoint: bool,
    pub schedule: ApproximationSchedule,
    pub samples: usize,
    pub seed: u64,
    pub resolution: usize,
}

/// One `(j, p)` cell of the distance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationCell {
    pub j: usize,
    pub eps: f64,
    pub p: i64,
    pub distance: f64,
    pub mass: f64,
    pub seed: SeedRecord,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub cells: Vec<ApproximationCell>,
    pub matrix: Vec<Vec<f64>>,
    pub selection: DiagonalSelection,
    pub target_mass: f64,
}

/// `(1/p^m) [s = 0]` of one tuple against a dictionary.
pub fn zero_current_vector(tuple: &SectionTuple, p: i64, dict: &Dictionary, m: &Manifold, rule: &QuadratureRule) -> Result<PairingVector> {
    let zs = match tuple.members.len() {
        1 => section_zero_set(&tuple.members[0])?,
        _ => common_zeros(tuple)?,
    };
    let scale = (p as f64).powi(tuple.members.len() as i32).recip();
    let id = format!("zeros(p={p},seed={}:{})", tuple.seed.master, tuple.seed.index);
    Ok(dict.evaluate(&id, |f| zero_pairing(&zs, f, m, rule))?.scaled(scale))
}

fn check_hypotheses(setup: &ApproximationSetup, gs: &[&MetricWeight]) -> Result<()> {
    for g in gs {
        let ok = match g.positivity {
            Positivity::GlobalConstant(c) => c > 0.0,
            Positivity::LocallyPositiveOffSigma(c) => setup.adjoint && c > 0.0,
        };
        if !ok {
            return Err(Error::Precondition(format!("metric {} lacks the positivity the run requires", g.descriptor.label())));
        }
    }
    Ok(())
}

/// Builds a completed section space; lets callers put a cache in front of Gram assembly.
pub type SpaceBuilder<'a> = dyn Fn(&LineBundle, &Arc<MetricWeight>, i64, bool, usize) -> Result<SectionSpace> + Sync + 'a;

/// Distance matrix `d[j][p] = dist((1/p^m)[s_p = 0], ⋀ c₁(L_k, h_k))` with the sections drawn
/// for the interpolated metrics at `ε_j`, followed by diagonal selection. Cell failures are
/// recorded in the cell status and the run continues.
pub fn approximation_run(setup: &ApproximationSetup) -> Result<ApproximationReport> {
    approximation_run_with(setup, &build_space)
}

pub fn approximation_run_with(setup: &ApproximationSetup, build: &SpaceBuilder) -> Result<ApproximationReport> {
    let k = setup.degrees.len();
    let man = build_manifold(setup.manifold);
    if k == 0 || k > man.n || setup.h.len() != k || setup.g.len() != k || setup.samples == 0 {
        return Err(Error::Config("need 1 ≤ m ≤ n bundles, one h and g per bundle, and N ≥ 1".into()));
    }
    let bundles = setup.degrees.iter().map(|d| line_bundle(&man, d)).collect::<Result<Vec<_>>>()?;
    let hs = setup.h.iter().zip(&bundles).map(|(d, b)| d.build(b)).collect::<Result<Vec<_>>>()?;
    let gs = setup.g.iter().zip(&bundles).map(|(d, b)| d.build(b)).collect::<Result<Vec<_>>>()?;
    let (hr, gr): (Vec<&MetricWeight>, Vec<&MetricWeight>) = (hs.iter().collect(), gs.iter().collect());
    check_hypotheses(setup, &gr)?;
    check_loci(&hr, &gr, &man)?;
    let dict = Dictionary::new(&man, k)?;
    let all: Vec<&MetricWeight> = hr.iter().chain(&gr).copied().collect();
    let rule = rule_for(setup.manifold, setup.resolution, &all)?;
    let target = dict.evaluate("target", |f| wedge_target(&hr, &man, &rule, f))?;
    let grid = &setup.schedule.p_grid;
    let mut cells = Vec::new();
    let mut matrix = Vec::new();
    for (ji, &eps) in setup.schedule.eps.iter().enumerate() {
        let mixed: Vec<Arc<MetricWeight>> = hs.iter().zip(&gs).map(|(h, g)| interpolate_metrics(h, g, eps).map(Arc::new)).collect::<Result<_>>()?;
        let mut row = Vec::new();
        for (pi, &p) in grid.iter().enumerate() {
            let base = ((ji * grid.len() + pi) * setup.samples) as u64;
            let seed = SeedRecord::new(setup.seed, base);
            let cell = (|| -> Result<(f64, f64)> {
                let spaces: Vec<Arc<SectionSpace>> = mixed
                    .iter()
                    .zip(&bundles)
                    .map(|(h, b)| build(b, h, p, setup.adjoint, setup.resolution).map(Arc::new))
                    .collect::<Result<_>>()?;
                let one = |i: usize| -> Result<PairingVector> {
                    let tuple = sample_tuple(&spaces, SeedRecord::new(setup.seed, base + i as u64))?;
                    zero_current_vector(&tuple, p, &dict, &man, &rule)
                };
                let vs: Vec<PairingVector> = if is_serial() {
                    (0..setup.samples).map(one).collect::<Result<_>>()?
                } else {
                    (0..setup.samples).into_par_iter().map(one).collect::<Result<_>>()?
                };
                let w = 1.0 / vs.len() as f64;
                let terms: Vec<(f64, &PairingVector)> = vs.iter().map(|v| (w, v)).collect();
                let avg = PairingVector::linear("mean", &terms)?;
                Ok((ds_distance(&avg, &target)?, avg.mass))
            })();
            let (distance, mass, status) = match cell {
                Ok((d, ms)) => (d, ms, "ok".to_string()),
                Err(e) => {
                    log::warn!("approximation cell j={} p={p}: {e}", ji + 1);
                    (f64::NAN, f64::NAN, e.status().to_string())
                }
            };
            row.push(distance);
            cells.push(ApproximationCell { j: ji + 1, eps, p, distance, mass, seed, status });
        }
        matrix.push(row);
    }
    let selection = diagonal_sequence(&matrix, grid)?;
    Ok(ApproximationReport { cells, matrix, selection, target_mass: target.mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{log_pole_metric, reference_metric};
    use crate::poly::PolySpec;

    fn pv(values: Vec<f64>, mass: f64) -> PairingVector {
        PairingVector {
            id: "v".into(),
            dictionary: "d".into(),
            names: (0..values.len()).map(|i| i.to_string()).collect(),
            values,
            mass,
            mass_norm: 1.05,
            meta: BTreeMap::new(),
        }
    }

    #[test]
    fn distance_is_a_scaled_maximum() {
        let a = pv(vec![0.1, -0.3, 0.2], 1.0);
        let b = pv(vec![0.0, 0.1, 0.2], 1.0);
        assert_eq!(ds_distance(&a, &a).unwrap(), 0.0);
        assert!((ds_distance(&a, &b).unwrap() - 0.4).abs() < 1e-15);
        assert!((ds_distance(&a.scaled(2.0), &b.scaled(2.0)).unwrap() - 0.8).abs() < 1e-12);
        let mut c = b.clone();
        c.names[0] = "other".into();
        assert!(matches!(ds_distance(&a, &c), Err(Error::Config(_))));
    }

    #[test]
    fn diagonal_selection_rules() {
        let grid = [4, 8, 16, 32];
        let zero = vec![vec![0.0; 4]; 3];
        assert_eq!(diagonal_sequence(&zero, &grid).unwrap().p, vec![Some(4), Some(8), Some(16)]);
        let inv: Vec<Vec<f64>> = (0..3).map(|_| grid.iter().map(|&p| 1.0 / p as f64).collect()).collect();
        assert_eq!(diagonal_sequence(&inv, &grid).unwrap().p, vec![Some(4), Some(8), Some(16)]);
        let grid2 = [1, 2, 3, 5, 8];
        let inv2: Vec<Vec<f64>> = (0..4).map(|_| grid2.iter().map(|&p| 1.0 / p as f64).collect()).collect();
        assert_eq!(diagonal_sequence(&inv2, &grid2).unwrap().p, vec![Some(1), Some(2), Some(3), Some(5)]);
        let stuck = vec![vec![0.9, 0.9], vec![0.9, 0.9]];
        let s = diagonal_sequence(&stuck, &[1, 2]).unwrap();
        assert_eq!(s.p, vec![Some(1), None]);
        assert!(!s.resolved());
    }

    #[test]
    fn pole_current_distance_matches_direct_evaluation() {
        let m = build_manifold(ManifoldKind::P1);
        let b = line_bundle(&m, &[1]).unwrap();
        let fs = reference_metric(&b);
        let h = log_pole_metric(&b, &PolySpec::monomial(&[1, 0]), 0.5).unwrap();
        let rule = rule_for(m.kind, 96, &[&h]).unwrap();
        let dict = Dictionary::new(&m, 1).unwrap();
        let a = dict.evaluate("fs", |f| wedge_target(&[&fs], &m, &rule, f)).unwrap();
        let c = dict.evaluate("pole", |f| wedge_target(&[&h], &m, &rule, f)).unwrap();
        let pole = crate::manifold::Point::real(m.kind, &[0.0, 1.0]).unwrap();
        let omega = crate::current::Current11::smooth(m.kind, crate::current::degree_class(m.kind, &[1.0]));
        let direct = dict
            .forms
            .iter()
            .map(|f| 0.5 * (omega.pair(&m, &rule, f).unwrap() - f.value_at(&pole)).abs())
            .fold(0.0, f64::max);
        assert!((ds_distance(&a, &c).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn expansion_identity_on_a_curve_and_a_surface() {
        let m1 = build_manifold(ManifoldKind::P1);
        let b1 = line_bundle(&m1, &[1]).unwrap();
        let (h, g) = (log_pole_metric(&b1, &PolySpec::monomial(&[1, 0]), 0.5).unwrap(), reference_metric(&b1));
        let rule = rule_for(m1.kind, 48, &[&h]).unwrap();
        let chi = &test_form_dictionary(&m1, 1).unwrap()[2];
        for eps in [0.0, 0.3] {
            assert!(multilinear_expansion_residual(&[&h], &[&g], eps, chi, &m1, &rule).unwrap() < 1e-12);
        }
        let m2 = build_manifold(ManifoldKind::P2);
        let b2 = line_bundle(&m2, &[1]).unwrap();
        let h1 = log_pole_metric(&b2, &PolySpec::monomial(&[1, 0, 0]), 0.5).unwrap();
        let h2 = log_pole_metric(&b2, &PolySpec::monomial(&[0, 1, 0]), 0.5).unwrap();
        let g2 = reference_metric(&b2);
        let rule = rule_for(m2.kind, 12, &[&h1, &h2]).unwrap();
        let chi = &test_form_dictionary(&m2, 2).unwrap()[0];
        for eps in [0.0, 0.3] {
            let r = multilinear_expansion_residual(&[&h1, &h2], &[&g2, &g2], eps, chi, &m2, &rule).unwrap();
            assert!(r < 1e-8, "{r}");
        }
        assert!(matches!(
            multilinear_expansion_residual(&[&h1, &h1], &[&g2, &g2], 0.3, chi, &m2, &rule),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn schedules_are_validated() {
        assert!(ApproximationSchedule::new(vec![0.5, 0.25], vec![4, 8]).is_ok());
        assert!(ApproximationSchedule::new(vec![0.25, 0.5], vec![4, 8]).is_err());
        assert!(ApproximationSchedule::new(vec![0.5], vec![8, 4]).is_err());
    }

    #[test]
    fn curve_run_fills_the_matrix() {
        let setup = ApproximationSetup {
            manifold: ManifoldKind::P1,
            degrees: vec![vec![1]],
            h: vec![MetricDescriptor::LogPole { q: PolySpec::monomial(&[1, 0]), t: 0.5 }],
            g: vec![MetricDescriptor::FubiniStudy],
            adjoint: false,
            schedule: ApproximationSchedule::new(vec![0.5, 0.25], vec![4, 16, 64]).unwrap(),
            samples: 20,
            seed: 11,
            resolution: 48,
        };
        let r = approximation_run(&setup).unwrap();
        assert_eq!(r.cells.len(), 6);
        assert!(r.cells.iter().all(|c| c.status == "ok" && (c.mass - 1.0).abs() < 1e-6), "{:?}", r.cells);
        eprintln!("{:?} {:?}", r.matrix, r.selection);
        assert!(r.matrix[1][2] < r.matrix[1][0]);
    }
}
