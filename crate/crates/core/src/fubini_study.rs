//! Fubini–Study currents `γ_p = dd^c ½ log Σ_k |σ_k|²` of orthonormal frames.
//!
//! Two independent evaluations of `⟨γ_p, φ⟩` are provided. The potential route moves
//! `dd^c` onto the test form. The Kodaira route writes `γ_p` as the base divisor
//! plus the pullback of the Fubini–Study form by the residual frame, a smooth form
//! with an explicit matrix.

use crate::bundle::{class_intersection, class_mass, curvature_pairing, psi_ddc_pairing};
use crate::current::{degree_class, Current11, FsPullback, SmoothPart};
use crate::error::{Error, Result};
use crate::manifold::{LinearComponent, Manifold, Point};
use crate::quadrature::QuadratureRule;
use crate::sections::SectionSpace;
use crate::testforms::TestForm;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::sync::Arc;

impl SectionSpace {
    /// `Σ a_i log|ℓ_i(z)|`.
    pub fn log_prefactor(&self, z: &[C64; 4]) -> f64 {
        self.filtered.poles.iter().filter(|po| po.order > 0).map(|po| po.order as f64 * po.component.eval(z).norm().ln()).sum()
    }

    /// FS potential `½ log Σ_k |σ_k(z)|²` at a unit point, without the metric weight.
    pub fn fs_potential(&self, p: &Point) -> Result<f64> {
        let v = self.frame_values(&p.z)?;
        let s: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        Ok(self.log_prefactor(&p.z) + 0.5 * s.ln())
    }

    /// Effective multidegree as floats.
    pub fn degree_f64(&self) -> Vec<f64> {
        self.basis.degree.iter().map(|&d| d as f64).collect()
    }

    /// Cohomological mass `⟨γ_p, ω^{n-1}⟩`.
    pub fn fs_mass(&self) -> f64 {
        class_mass(self.kind(), &self.degree_f64())
    }
}

/// `[σ_0(x) : … : σ_d(x)]` as a unit vector, phase fixed so the first nonzero entry is positive.
pub fn kodaira_map(space: &SectionSpace, x: &Point) -> Result<Vec<C64>> {
    let lb = space.log_prefactor(&x.z);
    let v = space.frame_values(&x.z)?;
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if lb == f64::NEG_INFINITY || !(n * lb.exp() >= 1e-300) {
        return Err(Error::BaseLocus);
    }
    let k = v.iter().position(|c| c.norm() > 1e-15 * n).unwrap_or(0);
    let phase = v[k].conj() / v[k].norm();
    Ok(v.iter().map(|c| c * phase / n).collect())
}

/// `γ_p` as base divisor plus the smooth Kodaira pullback.
pub fn fs_current(space: &SectionSpace) -> Result<Current11> {
    let t = space.transform()?;
    let d = space.dim();
    let coeffs = DMatrix::from_fn(d, d, |i, k| t[(i, k)] * space.scales[i]);
    let fs = FsPullback::new(space.kind(), space.filtered.exponents.clone(), coeffs);
    let mut cur = Current11::smooth(space.kind(), vec![(1.0, SmoothPart::FsPullback(Arc::new(fs)))]);
    for po in &space.filtered.poles {
        if po.order > 0 {
            cur.add_divisor(po.component, po.order as f64);
        }
    }
    Ok(cur)
}

/// `⟨γ_p, φ⟩` by the potential route: class of the effective degree plus `∫ u dd^c φ`.
pub fn fs_pairing(space: &SectionSpace, phi: &TestForm, m: &Manifold, rule: &QuadratureRule) -> Result<f64> {
    let class = Current11::smooth(space.kind(), degree_class(space.kind(), &space.degree_f64()));
    let a = class.pair(m, rule, phi)?;
    let b = psi_ddc_pairing(m, rule, phi, |x| space.fs_potential(x).unwrap_or(f64::NAN))?;
    Ok(a + b)
}

/// `⟨γ_p, φ⟩` through the Kodaira map.
pub fn fs_pairing_kodaira(space: &SectionSpace, phi: &TestForm, m: &Manifold, rule: &QuadratureRule) -> Result<f64> {
    fs_current(space)?.pair(m, rule, phi)
}

/// Residual of `(1/p)γ_p - c₁(L,h) - (1/p)c₁(K_X) = (1/2p) dd^c log P_p` against `φ`,
/// with `γ_p` from the Kodaira route and the right side from the metric and kernel.
pub fn identity_residual(space: &SectionSpace, phi: &TestForm, m: &Manifold, rule: &QuadratureRule) -> Result<f64> {
    let p = space.p() as f64;
    let gamma = fs_pairing_kodaira(space, phi, m, rule)?;
    let c1 = curvature_pairing(&space.metric, phi, m, rule)?;
    let k: Vec<f64> = if space.basis.adjoint {
        space.kind().canonical().iter().map(|&x| x as f64).collect()
    } else {
        vec![0.0; space.kind().ndeg()]
    };
    let ck = Current11::smooth(space.kind(), degree_class(space.kind(), &k)).pair(m, rule, phi)?;
    let logp = psi_ddc_pairing(m, rule, phi, |x| space.log_bergman(x).unwrap_or(f64::NAN))?;
    Ok((gamma / p - c1 - ck / p - logp / (2.0 * p)).abs())
}

/// `⟨γ₁ ∧ γ₂, χ⟩` on a surface from the decompositions of both currents.
pub fn fs_wedge_pairing(spaces: [&SectionSpace; 2], chi: &TestForm, m: &Manifold, rule: &QuadratureRule) -> Result<f64> {
    if m.n != 2 {
        return Err(Error::Precondition("wedge products of Fubini–Study currents need a surface".into()));
    }
    let (a, b) = (base_locus(spaces[0])?, base_locus(spaces[1])?);
    for (d, _) in &a.divisors {
        if b.divisors.iter().any(|(e, _)| e.same_as(d)) {
            return Err(Error::Precondition(format!("base loci share the component {d:?}")));
        }
    }
    fs_current(spaces[0])?.wedge_pair(&fs_current(spaces[1])?, m, rule, chi)
}

/// Cohomological value of `⟨γ₁ ∧ γ₂, 1⟩`.
pub fn fs_wedge_mass(spaces: [&SectionSpace; 2]) -> f64 {
    class_intersection(spaces[0].kind(), &spaces[0].degree_f64(), &spaces[1].degree_f64())
}

/// Common zeros of all sections of a space.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseLocus {
    pub divisors: Vec<(LinearComponent, u32)>,
    pub points: Vec<Point>,
}

impl BaseLocus {
    pub fn is_empty(&self) -> bool {
        self.divisors.is_empty() && self.points.is_empty()
    }
}

/// The base prefactor's components. Residual spaces contain every polynomial of their
/// degree, so there are no isolated base points; [`base_point_sweep`] confirms this numerically.
pub fn base_locus(space: &SectionSpace) -> Result<BaseLocus> {
    space.transform()?;
    let divisors = space.filtered.poles.iter().filter(|po| po.order > 0).map(|po| (po.component, po.order)).collect();
    Ok(BaseLocus { divisors, points: Vec::new() })
}

/// Grid points off the base divisors where `P_p ≤ 1e-12 · median(P_p)`.
pub fn base_point_sweep(space: &SectionSpace, grid: &[Point]) -> Result<Vec<Point>> {
    let divs = base_locus(space)?.divisors;
    let mut vals = Vec::with_capacity(grid.len());
    for x in grid {
        vals.push(space.log_bergman(x)?);
    }
    let mut sorted: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return Ok(Vec::new());
    }
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let thresh = median + (1e-12f64).ln();
    Ok(grid
        .iter()
        .zip(&vals)
        .filter(|(x, v)| **v <= thresh && divs.iter().all(|(l, _)| l.distance(x) > 1e-8))
        .map(|(x, _)| *x)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{line_bundle, log_pole_metric, reference_metric, LineBundle, MetricWeight};
    use crate::manifold::{build_manifold, ManifoldKind};
    use crate::poly::PolySpec;
    use crate::sections::{build_space, gram_rule, grid_points};
    use crate::testforms::{mass_form, test_form_dictionary};

    fn space(kind: ManifoldKind, deg: &[i64], metric: impl Fn(&LineBundle) -> MetricWeight, p: i64, res: usize) -> SectionSpace {
        let b = line_bundle(&build_manifold(kind), deg).unwrap();
        build_space(&b, &Arc::new(metric(&b)), p, true, res).unwrap()
    }

    #[test]
    fn constant_map_for_one_dimensional_space() {
        let s = space(ManifoldKind::P1, &[1], reference_metric, 2, 16);
        let x = Point::real(ManifoldKind::P1, &[0.3, 0.7]).unwrap();
        let v = kodaira_map(&s, &x).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn kodaira_images_are_torus_equivariant() {
        let s = space(ManifoldKind::P1, &[1], reference_metric, 8, 16);
        let x = Point::new(ManifoldKind::P1, &[C64::new(0.8, 0.0), C64::new(0.3, 0.4)]).unwrap();
        let y = Point::new(ManifoldKind::P1, &[C64::new(0.6, 0.1), C64::new(-0.2, 0.7)]).unwrap();
        let rot = |p: &Point| Point::new(ManifoldKind::P1, &[p.z[0], p.z[1] * C64::from_polar(1.0, 0.9)]).unwrap();
        let ip = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(u, v)| u.conj() * v).sum::<C64>().norm();
        let (fx, fy) = (kodaira_map(&s, &x).unwrap(), kodaira_map(&s, &y).unwrap());
        let (gx, gy) = (kodaira_map(&s, &rot(&x)).unwrap(), kodaira_map(&s, &rot(&y)).unwrap());
        assert!((ip(&fx, &fy) - ip(&gx, &gy)).abs() < 1e-12);
    }

    #[test]
    fn base_point_raises_error() {
        let s = space(ManifoldKind::P1, &[1], |b| log_pole_metric(b, &PolySpec::monomial(&[1, 0]), 0.5).unwrap(), 9, 32);
        assert_eq!(base_locus(&s).unwrap().divisors[0].1, 4);
        let pole = Point::real(ManifoldKind::P1, &[0.0, 1.0]).unwrap();
        assert!(matches!(kodaira_map(&s, &pole), Err(Error::BaseLocus)));
        assert!(base_point_sweep(&s, &grid_points(ManifoldKind::P1, 12).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn potential_and_kodaira_routes_agree() {
        let m = build_manifold(ManifoldKind::P1);
        for p in [3, 8] {
            let s = space(ManifoldKind::P1, &[1], reference_metric, p, 64);
            let rule = QuadratureRule::new(m.kind, 96, &[]).unwrap();
            let mass = fs_pairing(&s, &mass_form(&m, 1).unwrap(), &m, &rule).unwrap();
            assert!((mass / p as f64 - (p - 2) as f64 / p as f64).abs() < 1e-12);
            for phi in test_form_dictionary(&m, 1).unwrap().iter() {
                let a = fs_pairing(&s, phi, &m, &rule).unwrap();
                let b = fs_pairing_kodaira(&s, phi, &m, &rule).unwrap();
                assert!((a - b).abs() < 1e-6, "{} {a} {b}", phi.name);
                assert!(identity_residual(&s, phi, &m, &rule).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn log_pole_identity_and_mass() {
        let m = build_manifold(ManifoldKind::P1);
        let s = space(ManifoldKind::P1, &[1], |b| log_pole_metric(b, &PolySpec::monomial(&[1, 0]), 0.5).unwrap(), 9, 64);
        let rule = gram_rule(&s.metric, 9, 96).unwrap();
        let g = fs_pairing_kodaira(&s, &mass_form(&m, 1).unwrap(), &m, &rule).unwrap();
        assert!((g - 7.0).abs() < 1e-10);
        for phi in test_form_dictionary(&m, 1).unwrap().iter() {
            let r = identity_residual(&s, phi, &m, &rule).unwrap();
            assert!(r < 1e-6, "{} {r}", phi.name);
        }
    }

    #[test]
    fn veronese_wedge_mass_on_p2() {
        let m = build_manifold(ManifoldKind::P2);
        let s = space(ManifoldKind::P2, &[1], reference_metric, 5, 16);
        let rule = QuadratureRule::new(m.kind, 12, &[]).unwrap();
        let one = mass_form(&m, 2).unwrap();
        let v = fs_wedge_pairing([&s, &s], &one, &m, &rule).unwrap();
        assert!((v - 4.0).abs() < 1e-8, "{v}");
        assert_eq!(fs_wedge_mass([&s, &s]), 4.0);
    }

    #[test]
    fn wedge_with_base_divisors_is_symmetric_and_has_full_mass() {
        let m = build_manifold(ManifoldKind::P2);
        let a = space(ManifoldKind::P2, &[1], |b| log_pole_metric(b, &PolySpec::monomial(&[1, 0, 0]), 0.5).unwrap(), 6, 16);
        let b = space(ManifoldKind::P2, &[1], |b| log_pole_metric(b, &PolySpec::monomial(&[0, 1, 0]), 0.5).unwrap(), 6, 16);
        let mut centers = a.metric.centers();
        centers.extend(b.metric.centers());
        let rule = QuadratureRule::new(m.kind, 12, &centers).unwrap();
        let one = mass_form(&m, 2).unwrap();
        let v = fs_wedge_pairing([&a, &b], &one, &m, &rule).unwrap();
        assert!((v - 9.0).abs() < 1e-6, "{v}");
        let chi = &test_form_dictionary(&m, 2).unwrap()[3];
        let (x, y) = (fs_wedge_pairing([&a, &b], chi, &m, &rule).unwrap(), fs_wedge_pairing([&b, &a], chi, &m, &rule).unwrap());
        assert!((x - y).abs() < 1e-8);
        assert!(matches!(fs_wedge_pairing([&a, &a], chi, &m, &rule), Err(Error::Precondition(_))));
    }
}
