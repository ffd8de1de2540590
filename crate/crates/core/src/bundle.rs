//! Line bundles, singular Hermitian metrics and their curvature currents.
//!
//! A metric on `L` is the Fubini–Study reference metric times `e^{-2ψ}` for a
//! global function `ψ` on `X`, evaluated at unit homogeneous points. Each family
//! in the library has a closed-form curvature decomposition into divisors and
//! smooth forms, see [`MetricWeight::curvature_decomposition`].

use crate::current::{degree_class, divisor_class, Current11, FsPullback, SmoothPart};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldKind, Point, LinearComponent};
use crate::poly::{have_common_factor, ExactPoly, Poly, PolySpec};
use crate::quadrature::{Center, QuadratureRule};
use crate::roots::{binary_form_roots, cluster};
use crate::testforms::TestForm;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineBundle {
    pub kind: ManifoldKind,
    pub degree: Vec<i64>,
}

pub fn line_bundle(m: &Manifold, degree: &[i64]) -> Result<LineBundle> {
    if degree.len() != m.kind.ndeg() {
        return Err(Error::Config(format!("{} needs {} degree entries, got {degree:?}", m.kind, m.kind.ndeg())));
    }
    if degree.iter().any(|&d| d < 1) {
        return Err(Error::Config(format!("bundle degrees must be positive, got {degree:?}")));
    }
    Ok(LineBundle { kind: m.kind, degree: degree.to_vec() })
}

impl LineBundle {
    /// Multidegree of `L^p ⊗ K_X`.
    pub fn canonical_twist(&self, p: i64) -> Vec<i64> {
        self.degree.iter().zip(self.kind.canonical()).map(|(d, k)| p * d + k).collect()
    }

    /// Multidegree of `L^p`, or of `L^p ⊗ K_X` when `adjoint`.
    pub fn twist(&self, p: i64, adjoint: bool) -> Vec<i64> {
        if adjoint {
            self.canonical_twist(p)
        } else {
            self.degree.iter().map(|d| p * d).collect()
        }
    }

    pub fn has_sections(&self, p: i64, adjoint: bool) -> bool {
        self.twist(p, adjoint).iter().all(|&d| d >= 0)
    }
}

/// `⟨c₁(O(deg)), ω^{n-1}⟩`.
pub fn class_mass(kind: ManifoldKind, deg: &[f64]) -> f64 {
    match kind {
        ManifoldKind::P1xP1 => (deg[0] + deg[1]) * std::f64::consts::FRAC_1_SQRT_2,
        _ => deg[0],
    }
}

/// `∫ c₁(O(a)) ∧ c₁(O(b))` on a surface.
pub fn class_intersection(kind: ManifoldKind, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        ManifoldKind::P1xP1 => a[0] * b[1] + a[1] * b[0],
        _ => a[0] * b[0],
    }
}

/// Metric family as read from configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MetricDescriptor {
    FubiniStudy,
    /// `ψ = (t/m) log|Q|` with `deg Q = m · deg L`.
    LogPole { q: PolySpec, t: f64 },
    /// `ψ = max_i (t/m) log|Q_i|`.
    MaxOfLogPoles { poles: Vec<PolySpec>, t: f64 },
    /// `ψ = (t/(2mN)) log Σ_i |Q_i|^{2N}`.
    SmoothedMax { polys: Vec<PolySpec>, t: f64, sharpness: u32 },
    /// `ψ = (ψ_h + ε ψ_g)/(1 + ε)`.
    Interpolated { h: Box<MetricDescriptor>, g: Box<MetricDescriptor>, eps: f64 },
}

impl MetricDescriptor {
    pub fn build(&self, bundle: &LineBundle) -> Result<MetricWeight> {
        match self {
            MetricDescriptor::FubiniStudy => Ok(reference_metric(bundle)),
            MetricDescriptor::LogPole { q, t } => log_pole_metric(bundle, q, *t),
            MetricDescriptor::MaxOfLogPoles { poles, t } => max_log_metric(bundle, poles, *t),
            MetricDescriptor::SmoothedMax { polys, t, sharpness } => smoothed_max_metric(bundle, polys, *t, *sharpness),
            MetricDescriptor::Interpolated { h, g, eps } => interpolate_metrics(&h.build(bundle)?, &g.build(bundle)?, *eps),
        }
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match self {
            MetricDescriptor::FubiniStudy => "fs".into(),
            MetricDescriptor::LogPole { t, .. } => format!("log-pole(t={t})"),
            MetricDescriptor::MaxOfLogPoles { t, .. } => format!("max-log(t={t})"),
            MetricDescriptor::SmoothedMax { t, sharpness, .. } => format!("smoothed-max(t={t},N={sharpness})"),
            MetricDescriptor::Interpolated { h, g, eps } => format!("interp({},{},eps={eps})", h.label(), g.label()),
        }
    }
}

/// Declared lower bound `c₁(L,h) ≥ ε ω`, globally or off the singular set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Positivity {
    GlobalConstant(f64),
    LocallyPositiveOffSigma(f64),
}

impl Positivity {
    pub fn constant(&self) -> f64 {
        match *self {
            Positivity::GlobalConstant(e) | Positivity::LocallyPositiveOffSigma(e) => e,
        }
    }

    fn combine(&self, o: &Positivity, eps: f64) -> Positivity {
        let c = (self.constant() + eps * o.constant()) / (1.0 + eps);
        match (self, o) {
            (Positivity::GlobalConstant(_), Positivity::GlobalConstant(_)) => Positivity::GlobalConstant(c),
            _ => Positivity::LocallyPositiveOffSigma(c),
        }
    }
}

#[derive(Clone, Debug)]
enum Psi {
    Zero,
    LogPole { q: Poly, c: f64 },
    MaxLog { qs: Vec<Poly>, c: f64 },
    Smoothed { qs: Vec<Poly>, c: f64, n: u32 },
    Interp { h: Box<Psi>, g: Box<Psi>, eps: f64 },
}

impl Psi {
    fn eval(&self, z: &[C64; 4]) -> f64 {
        match self {
            Psi::Zero => 0.0,
            Psi::LogPole { q, c } => c * q.eval(z).norm().ln(),
            Psi::MaxLog { qs, c } => c * qs.iter().map(|q| q.eval(z).norm().ln()).fold(f64::NEG_INFINITY, f64::max),
            Psi::Smoothed { qs, c, n } => {
                let l: Vec<f64> = qs.iter().map(|q| q.eval(z).norm().ln()).collect();
                let mx = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let nn = 2.0 * *n as f64;
                let s: f64 = l.iter().map(|x| (nn * (x - mx)).exp()).sum();
                c * (mx + s.ln() / nn)
            }
            Psi::Interp { h, g, eps } => {
                let a = h.eval(z);
                if *eps == 0.0 {
                    return a;
                }
                (a + eps * g.eval(z)) / (1.0 + eps)
            }
        }
    }

    fn torus_invariant(&self) -> bool {
        let mono = |qs: &[Poly]| qs.iter().all(|q| q.terms.len() == 1);
        match self {
            Psi::Zero => true,
            Psi::LogPole { q, .. } => q.terms.len() == 1,
            Psi::MaxLog { qs, .. } | Psi::Smoothed { qs, .. } => mono(qs),
            Psi::Interp { h, g, .. } => h.torus_invariant() && g.torus_invariant(),
        }
    }
}

/// A compiled metric: evaluator for `ψ`, pole data and declared positivity.
#[derive(Clone, Debug)]
pub struct MetricWeight {
    pub bundle: LineBundle,
    pub descriptor: MetricDescriptor,
    psi: Psi,
    /// Defining polynomials of the singular set `Σ`.
    pub singular_locus: Vec<ExactPoly>,
    /// Divisor part `Σ c_i [ℓ_i]` of the curvature; `ψ ~ c_i log|ℓ_i|` near `ℓ_i`.
    pub poles: Vec<(LinearComponent, f64)>,
    pub positivity: Positivity,
}

fn base_positivity(b: &LineBundle) -> f64 {
    match b.kind {
        ManifoldKind::P1xP1 => std::f64::consts::SQRT_2 * b.degree[0].min(b.degree[1]) as f64,
        _ => b.degree[0] as f64,
    }
}

pub fn reference_metric(bundle: &LineBundle) -> MetricWeight {
    MetricWeight {
        bundle: bundle.clone(),
        descriptor: MetricDescriptor::FubiniStudy,
        psi: Psi::Zero,
        singular_locus: Vec::new(),
        poles: Vec::new(),
        positivity: Positivity::GlobalConstant(base_positivity(bundle)),
    }
}

fn check_t(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Config(format!("pole coefficient t must be in [0, 1], got {t}")));
    }
    if t > 1.0 {
        return Err(Error::Config(format!("t = {t} > 1 would break positivity of the curvature")));
    }
    Ok(())
}

/// `m` with `deg Q = m · deg L`.
fn degree_ratio(bundle: &LineBundle, q: &ExactPoly) -> Result<i64> {
    let dq = q.degree()?;
    let m = dq[0] / bundle.degree[0];
    if m < 1 || dq.iter().zip(&bundle.degree).any(|(a, b)| *a != m * b) {
        return Err(Error::Config(format!(
            "polynomial degree {dq:?} is not a positive multiple of the bundle degree {:?}",
            bundle.degree
        )));
    }
    Ok(m)
}

/// Linear components of `{Q = 0}` with multiplicities.
pub fn linear_factors(q: &Poly) -> Result<Vec<(LinearComponent, usize)>> {
    let kind = q.kind;
    let deg = q.degree()?;
    let binary = |idx: [usize; 2], k: i64| -> Vec<C64> {
        let mut c = vec![C64::new(0.0, 0.0); k as usize + 1];
        for (e, v) in &q.terms {
            c[e[idx[1]] as usize] += v;
        }
        c
    };
    let roots_to = |c: Vec<C64>, mk: &dyn Fn([C64; 2]) -> Result<LinearComponent>| -> Result<Vec<(LinearComponent, usize)>> {
        let roots = binary_form_roots(&c)?;
        cluster(&roots, 1e-5).into_iter().map(|(r, mult)| Ok((mk(r)?, mult))).collect()
    };
    if let Some((e, _)) = q.as_monomial() {
        let mut out = Vec::new();
        for i in 0..kind.ncoords() {
            if e[i] > 0 {
                out.push((LinearComponent::coordinate(kind, i), e[i] as usize));
            }
        }
        return Ok(out);
    }
    match kind {
        ManifoldKind::P1 => roots_to(binary([0, 1], deg[0]), &|r| LinearComponent::point(r[0], r[1])),
        ManifoldKind::P2 if deg[0] == 1 => {
            let mut n = [C64::new(0.0, 0.0); 3];
            for (e, v) in &q.terms {
                let i = (0..3).find(|&i| e[i] == 1).expect("linear term");
                n[i] = *v;
            }
            Ok(vec![(LinearComponent::line(n)?, 1)])
        }
        ManifoldKind::P1xP1 if deg[1] == 0 => roots_to(binary([0, 1], deg[0]), &|r| LinearComponent::fiber_z(r)),
        ManifoldKind::P1xP1 if deg[0] == 0 => roots_to(binary([2, 3], deg[1]), &|r| LinearComponent::fiber_w(r)),
        _ => Err(Error::Unsupported(
            "pole polynomials on surfaces must be monomials, linear forms, or forms in one factor".into(),
        )),
    }
}

fn check_pole_configuration(poles: &[(LinearComponent, f64)]) -> Result<()> {
    let lines: Vec<[C64; 3]> = poles
        .iter()
        .filter_map(|(l, _)| match l {
            LinearComponent::Line(n) => Some(*n),
            _ => None,
        })
        .collect();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            for k in j + 1..lines.len() {
                let (a, b, c) = (lines[i], lines[j], lines[k]);
                let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]);
                if det.norm() < 1e-10 {
                    return Err(Error::Unsupported("three concurrent pole lines".into()));
                }
            }
        }
    }
    Ok(())
}

pub fn log_pole_metric(bundle: &LineBundle, q: &PolySpec, t: f64) -> Result<MetricWeight> {
    check_t(t)?;
    let exact = q.to_exact(bundle.kind)?;
    let m = degree_ratio(bundle, &exact)?;
    let qp = exact.to_poly();
    let c = t / m as f64;
    let descriptor = MetricDescriptor::LogPole { q: q.clone(), t };
    if t == 0.0 {
        return Ok(MetricWeight { descriptor, ..reference_metric(bundle) });
    }
    let poles: Vec<(LinearComponent, f64)> =
        linear_factors(&qp)?.into_iter().map(|(l, e)| (l, c * e as f64)).collect();
    check_pole_configuration(&poles)?;
    Ok(MetricWeight {
        bundle: bundle.clone(),
        descriptor,
        psi: Psi::LogPole { q: qp, c },
        singular_locus: vec![exact],
        poles,
        positivity: Positivity::LocallyPositiveOffSigma((1.0 - t) * base_positivity(bundle)),
    })
}

/// Exact check that monomials have no common zero on `X`.
fn monomials_have_common_zero(kind: ManifoldKind, exps: &[crate::poly::Exp]) -> bool {
    let nc = kind.ncoords();
    for mask in 1u32..(1 << nc) {
        let zero = |i: usize| mask & (1 << i) != 0;
        let valid = match kind {
            ManifoldKind::P1xP1 => !(zero(0) && zero(1)) && !(zero(2) && zero(3)),
            _ => (0..nc).any(|i| !zero(i)),
        };
        if valid && exps.iter().all(|e| (0..nc).any(|i| zero(i) && e[i] > 0)) {
            return true;
        }
    }
    false
}

fn check_no_common_zeros(polys: &[Poly]) -> Result<()> {
    let kind = polys[0].kind;
    if polys.iter().all(|q| q.terms.len() == 1) {
        let exps: Vec<_> = polys.iter().map(|q| q.terms[0].0).collect();
        if monomials_have_common_zero(kind, &exps) {
            return Err(Error::Config("the polynomials have a common zero".into()));
        }
        return Ok(());
    }
    if kind != ManifoldKind::P1 {
        return Err(Error::Unsupported("max-type metrics on surfaces need monomial polynomials".into()));
    }
    for (l, _) in linear_factors(&polys[0])? {
        let p = l.as_point().expect("point component");
        let hit = polys.iter().all(|q| q.eval(&p.z).norm() <= 1e-8 * q.bombieri_norm());
        if hit {
            return Err(Error::Config("the polynomials have a common zero".into()));
        }
    }
    Ok(())
}

fn compile_family(bundle: &LineBundle, polys: &[PolySpec], t: f64) -> Result<(Vec<Poly>, f64)> {
    check_t(t)?;
    if polys.is_empty() {
        return Err(Error::Config("empty polynomial list".into()));
    }
    let mut m = None;
    let mut out = Vec::new();
    for q in polys {
        let e = q.to_exact(bundle.kind)?;
        let mq = degree_ratio(bundle, &e)?;
        if *m.get_or_insert(mq) != mq {
            return Err(Error::Config("all polynomials must have the same degree".into()));
        }
        out.push(e.to_poly());
    }
    check_no_common_zeros(&out)?;
    Ok((out, t / m.unwrap() as f64))
}

pub fn max_log_metric(bundle: &LineBundle, polys: &[PolySpec], t: f64) -> Result<MetricWeight> {
    let (qs, c) = compile_family(bundle, polys, t)?;
    Ok(MetricWeight {
        bundle: bundle.clone(),
        descriptor: MetricDescriptor::MaxOfLogPoles { poles: polys.to_vec(), t },
        psi: Psi::MaxLog { qs, c },
        singular_locus: Vec::new(),
        poles: Vec::new(),
        positivity: Positivity::GlobalConstant((1.0 - t) * base_positivity(bundle)),
    })
}

pub fn smoothed_max_metric(bundle: &LineBundle, polys: &[PolySpec], t: f64, sharpness: u32) -> Result<MetricWeight> {
    if sharpness == 0 {
        return Err(Error::Config("sharpness must be at least 1".into()));
    }
    let (qs, c) = compile_family(bundle, polys, t)?;
    Ok(MetricWeight {
        bundle: bundle.clone(),
        descriptor: MetricDescriptor::SmoothedMax { polys: polys.to_vec(), t, sharpness },
        psi: Psi::Smoothed { qs, c, n: sharpness },
        singular_locus: Vec::new(),
        poles: Vec::new(),
        positivity: Positivity::GlobalConstant((1.0 - t) * base_positivity(bundle)),
    })
}

/// The metric with weight `(φ_h + ε φ_g)/(1 + ε)`.
pub fn interpolate_metrics(h: &MetricWeight, g: &MetricWeight, eps: f64) -> Result<MetricWeight> {
    if h.bundle != g.bundle {
        return Err(Error::Config("interpolated metrics must live on the same bundle".into()));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::Config(format!("interpolation weight must be nonnegative, got {eps}")));
    }
    let s = 1.0 + eps;
    let mut poles: Vec<(LinearComponent, f64)> = h.poles.iter().map(|(l, c)| (*l, c / s)).collect();
    for (l, c) in &g.poles {
        let c = eps * c / s;
        match poles.iter_mut().find(|(k, _)| k.same_as(l)) {
            Some(slot) => slot.1 += c,
            None => poles.push((*l, c)),
        }
    }
    poles.retain(|(_, c)| *c != 0.0);
    check_pole_configuration(&poles)?;
    let mut singular_locus = h.singular_locus.clone();
    if eps > 0.0 {
        singular_locus.extend(g.singular_locus.iter().cloned());
    }
    Ok(MetricWeight {
        bundle: h.bundle.clone(),
        descriptor: MetricDescriptor::Interpolated {
            h: Box::new(h.descriptor.clone()),
            g: Box::new(g.descriptor.clone()),
            eps,
        },
        psi: Psi::Interp { h: Box::new(h.psi.clone()), g: Box::new(g.psi.clone()), eps },
        singular_locus,
        poles,
        positivity: h.positivity.combine(&g.positivity, eps),
    })
}

impl MetricWeight {
    pub fn kind(&self) -> ManifoldKind {
        self.bundle.kind
    }

    /// `ψ` at a unit point; `-∞` on poles.
    pub fn psi(&self, p: &Point) -> f64 {
        self.psi.eval(&p.z)
    }

    /// Local weight `φ` of the metric in a chart at a point.
    pub fn local_weight(&self, p: &Point, chart: usize) -> f64 {
        let x = p.chart_coords(chart);
        let r = match self.kind() {
            ManifoldKind::P1xP1 => {
                0.5 * (self.bundle.degree[0] as f64 * (1.0 + x[0].norm_sqr()).ln()
                    + self.bundle.degree[1] as f64 * (1.0 + x[1].norm_sqr()).ln())
            }
            _ => 0.5 * self.bundle.degree[0] as f64 * (1.0 + x[0].norm_sqr() + x[1].norm_sqr()).ln(),
        };
        r + self.psi(p)
    }

    pub fn is_smooth(&self) -> bool {
        self.poles.is_empty() && !matches!(self.psi, Psi::MaxLog { .. })
    }

    /// Invariant under the diagonal torus action, so distinct monomials are orthogonal.
    pub fn is_torus_invariant(&self) -> bool {
        self.psi.torus_invariant() && self.poles.iter().all(|(l, _)| is_coordinate(l))
    }

    pub fn singular_divisors(&self) -> Vec<LinearComponent> {
        self.poles.iter().map(|p| p.0).collect()
    }

    /// Quadrature centers refining toward the poles.
    pub fn centers(&self) -> Vec<Center> {
        self.poles.iter().map(|(l, _)| Center::Divisor(*l)).collect()
    }

    /// Curvature `c₁(L,h)` as divisors plus smooth forms.
    pub fn curvature_decomposition(&self) -> Result<Current11> {
        let deg: Vec<f64> = self.bundle.degree.iter().map(|&d| d as f64).collect();
        let reference = Current11::smooth(self.kind(), degree_class(self.kind(), &deg));
        Ok(reference.plus(&psi_ddc(self.kind(), &self.psi)?))
    }

    /// Reference part `Σ d_i (class form)` of the curvature.
    pub fn reference_current(&self) -> Current11 {
        let deg: Vec<f64> = self.bundle.degree.iter().map(|&d| d as f64).collect();
        Current11::smooth(self.kind(), degree_class(self.kind(), &deg))
    }
}

fn is_coordinate(l: &LinearComponent) -> bool {
    let c = l.form_coeffs();
    c.iter().filter(|x| x.norm() > 0.0).count() == 1
}

/// `dd^c ψ` as a current.
fn psi_ddc(kind: ManifoldKind, psi: &Psi) -> Result<Current11> {
    match psi {
        Psi::Zero => Ok(Current11::zero(kind)),
        Psi::LogPole { q, c } => {
            let mut out = Current11::zero(kind);
            for (l, e) in linear_factors(q)? {
                let a = c * e as f64;
                out.add_divisor(l, a);
                out.smooth.push((-a, divisor_class(&l)));
            }
            Ok(out)
        }
        Psi::Smoothed { qs, c, n } => {
            let dq: Vec<f64> = qs[0].degree()?.iter().map(|&d| d as f64).collect();
            let mut smooth: Vec<(f64, SmoothPart)> = degree_class(kind, &dq).into_iter().map(|(a, s)| (-c * a, s)).collect();
            let powers: Vec<Poly> = qs.iter().map(|q| q.pow(*n)).collect();
            let fs = FsPullback::from_polys(kind, &powers);
            smooth.push((c / *n as f64, SmoothPart::FsPullback(Arc::new(fs))));
            Ok(Current11::smooth(kind, smooth))
        }
        Psi::MaxLog { .. } => Err(Error::Unsupported(
            "the curvature of a maximum of log poles has no closed-form decomposition".into(),
        )),
        Psi::Interp { h, g, eps } => {
            let s = 1.0 + eps;
            let a = psi_ddc(kind, h)?.scaled(1.0 / s);
            if *eps == 0.0 {
                return Ok(a);
            }
            Ok(a.plus(&psi_ddc(kind, g)?.scaled(eps / s)))
        }
    }
}

/// `⟨c₁(L,h), φ⟩ = ⟨c₁(L,h_ref), φ⟩ + ∫ ψ dd^c φ`, never differentiating `ψ`.
pub fn curvature_pairing(metric: &MetricWeight, phi: &TestForm, m: &Manifold, rule: &QuadratureRule) -> Result<f64> {
    let reference = metric.reference_current().pair(m, rule, phi)?;
    if matches!(metric.psi, Psi::Zero) {
        return Ok(reference);
    }
    Ok(reference + psi_ddc_pairing(m, rule, phi, |p| metric.psi(p))?)
}

/// `∫ u dd^c φ` for a function `u` with at most integrable singularities.
pub fn psi_ddc_pairing<F>(m: &Manifold, rule: &QuadratureRule, phi: &TestForm, u: F) -> Result<f64>
where
    F: Fn(&Point) -> f64 + Sync,
{
    crate::current::check_codegree(m, phi, 1)?;
    let (s, bad) = rule.fold(
        || (0.0, 0usize),
        |(s, bad), nd| {
            let d = phi.ddc_density(m, nd);
            if d == 0.0 {
                return;
            }
            let v = u(&nd.point);
            if v.is_nan() || v == f64::INFINITY {
                *bad += 1;
            } else if v.is_finite() {
                *s += nd.weight * v * d;
            }
        },
        |(a, b), (c, d)| (a + c, b + d),
    );
    if bad > 0 {
        return Err(Error::NumericalDomain(format!("{bad} non-integrable values of the potential")));
    }
    Ok(s)
}

/// Whether every `k` of the hypersurfaces meet in codimension `k`.
pub fn general_position_check(divisors: &[ExactPoly], m: &Manifold) -> Result<bool> {
    if divisors.len() > m.n {
        return Err(Error::Precondition(format!(
            "{} hypersurfaces on a manifold of dimension {}",
            divisors.len(),
            m.n
        )));
    }
    if divisors.iter().any(|d| d.is_zero()) {
        return Err(Error::Precondition("zero polynomial".into()));
    }
    if divisors.len() <= 1 {
        return Ok(true);
    }
    Ok(!have_common_factor(&divisors[0], &divisors[1])?)
}

/// General position of a list of unions of hypersurfaces (one union per bundle).
pub fn loci_in_general_position(loci: &[Vec<ExactPoly>], m: &Manifold) -> Result<bool> {
    if loci.len() > m.n {
        return Err(Error::Precondition(format!("{} singular sets on a manifold of dimension {}", loci.len(), m.n)));
    }
    for i in 0..loci.len() {
        for j in i + 1..loci.len() {
            for a in &loci[i] {
                for b in &loci[j] {
                    if !general_position_check(&[a.clone(), b.clone()], m)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::build_manifold;
    use crate::testforms::{mass_form, test_form_dictionary};

    fn mono(e: &[u16]) -> PolySpec {
        PolySpec::monomial(e)
    }

    #[test]
    fn adjoint_twists() {
        let p1 = build_manifold(ManifoldKind::P1);
        let p2 = build_manifold(ManifoldKind::P2);
        let q = build_manifold(ManifoldKind::P1xP1);
        assert_eq!(line_bundle(&p1, &[1]).unwrap().canonical_twist(5), vec![3]);
        assert_eq!(line_bundle(&p2, &[1]).unwrap().canonical_twist(6), vec![3]);
        assert_eq!(line_bundle(&q, &[1, 1]).unwrap().canonical_twist(4), vec![2, 2]);
        assert!(line_bundle(&p1, &[0]).is_err());
    }

    #[test]
    fn reference_masses() {
        for (kind, deg, mass) in [
            (ManifoldKind::P1, vec![1], 1.0),
            (ManifoldKind::P1, vec![2], 2.0),
            (ManifoldKind::P2, vec![1], 1.0),
            (ManifoldKind::P1xP1, vec![1, 2], 3.0 * std::f64::consts::FRAC_1_SQRT_2),
        ] {
            let m = build_manifold(kind);
            let b = line_bundle(&m, &deg).unwrap();
            let rule = QuadratureRule::new(kind, 24, &[]).unwrap();
            let v = curvature_pairing(&reference_metric(&b), &mass_form(&m, 1).unwrap(), &m, &rule).unwrap();
            assert!((v - mass).abs() < 1e-12, "{kind} {v}");
        }
    }

    #[test]
    fn product_mass_matches_separable_integral() {
        // ∫ (F1 + 2F2) ∧ (F1+F2)/√2 over the product, with each F_i integrated in
        // its own sphere coordinate: ∫ F1∧F2 = 1 by the volume normalization.
        let m = build_manifold(ManifoldKind::P1xP1);
        let b = line_bundle(&m, &[1, 2]).unwrap();
        let rule = QuadratureRule::new(m.kind, 24, &[]).unwrap();
        let v = curvature_pairing(&reference_metric(&b), &mass_form(&m, 1).unwrap(), &m, &rule).unwrap();
        let oracle = (1.0 + 2.0) / std::f64::consts::SQRT_2;
        assert!((v - oracle).abs() < 1e-12);
    }

    #[test]
    fn log_pole_on_p1_splits_mass() {
        let m = build_manifold(ManifoldKind::P1);
        let b = line_bundle(&m, &[1]).unwrap();
        let h = log_pole_metric(&b, &mono(&[1, 0]), 0.5).unwrap();
        assert_eq!(h.poles.len(), 1);
        let rule = QuadratureRule::new(m.kind, 64, &h.centers()).unwrap();
        let pole = Point::real(m.kind, &[0.0, 1.0]).unwrap();
        for phi in test_form_dictionary(&m, 1).unwrap().iter() {
            let v = curvature_pairing(&h, phi, &m, &rule).unwrap();
            let smooth: f64 = rule.nodes().iter().map(|n| n.weight * phi.eval(n).chi).sum();
            let oracle = 0.5 * smooth + 0.5 * phi.value_at(&pole);
            assert!((v - oracle).abs() < 1e-6, "{} {v} {oracle}", phi.name);
        }
        let one = curvature_pairing(&h, &mass_form(&m, 1).unwrap(), &m, &rule).unwrap();
        assert!((one - 1.0).abs() < 1e-8);
    }

    #[test]
    fn log_pole_with_t_zero_is_reference() {
        let m = build_manifold(ManifoldKind::P2);
        let b = line_bundle(&m, &[1]).unwrap();
        let h = log_pole_metric(&b, &mono(&[1, 0, 0]), 0.0).unwrap();
        let r = reference_metric(&b);
        let rule = QuadratureRule::new(m.kind, 12, &[]).unwrap();
        for phi in test_form_dictionary(&m, 1).unwrap().iter() {
            let a = curvature_pairing(&h, phi, &m, &rule).unwrap();
            let c = curvature_pairing(&r, phi, &m, &rule).unwrap();
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn t_above_one_rejected() {
        let m = build_manifold(ManifoldKind::P1);
        let b = line_bundle(&m, &[1]).unwrap();
        assert!(log_pole_metric(&b, &mono(&[1, 0]), 1.5).unwrap_err().is_config());
        assert!(log_pole_metric(&b, &mono(&[2, 0]), 0.5).is_ok());
        let q = PolySpec { exponents: vec![vec![1, 1]], coefficients: vec!["1".into()], imaginary: None };
        assert!(log_pole_metric(&line_bundle(&m, &[3]).unwrap(), &q, 0.5).unwrap_err().is_config());
    }

    #[test]
    fn full_pole_on_p2_is_line_integral() {
        let m = build_manifold(ManifoldKind::P2);
        let b = line_bundle(&m, &[1]).unwrap();
        let h = log_pole_metric(&b, &mono(&[1, 0, 0]), 1.0).unwrap();
        let rule = QuadratureRule::new(m.kind, 24, &h.centers()).unwrap();
        let line = LinearComponent::coordinate(m.kind, 0);
        for phi in test_form_dictionary(&m, 1).unwrap().iter() {
            let v = curvature_pairing(&h, phi, &m, &rule).unwrap();
            let oracle = crate::current::divisor_integral(&m, &line, 64, &[], &|_: &Point, c, x: &[C64; 2]| {
                m.kahler(x).scale(phi.eval_chart(c, x).chi)
            })
            .unwrap();
            assert!((v - oracle).abs() < 1e-5, "{} {v} {oracle}", phi.name);
        }
    }

    #[test]
    fn decomposition_agrees_with_integration_by_parts() {
        let m = build_manifold(ManifoldKind::P1);
        let b = line_bundle(&m, &[1]).unwrap();
        let q = PolySpec {
            exponents: vec![vec![2, 0], vec![0, 2]],
            coefficients: vec!["1".into(), "-3/4".into()],
            imaginary: None,
        };
        let metrics = [
            log_pole_metric(&b, &q, 0.7).unwrap(),
            smoothed_max_metric(&b, &[mono(&[1, 0]), mono(&[0, 1])], 0.8, 3).unwrap(),
            interpolate_metrics(&log_pole_metric(&b, &q, 1.0).unwrap(), &reference_metric(&b), 0.1).unwrap(),
        ];
        for h in &metrics {
            let rule = QuadratureRule::new(m.kind, 96, &h.centers()).unwrap();
            let t = h.curvature_decomposition().unwrap();
            for phi in test_form_dictionary(&m, 1).unwrap().iter() {
                let a = curvature_pairing(h, phi, &m, &rule).unwrap();
                let c = t.pair(&m, &rule, phi).unwrap();
                assert!((a - c).abs() < 1e-6, "{} {} {a} {c}", h.descriptor.label(), phi.name);
            }
        }
    }

    #[test]
    fn interpolation_is_affine() {
        let m = build_manifold(ManifoldKind::P1);
        let b = line_bundle(&m, &[1]).unwrap();
        let h = log_pole_metric(&b, &mono(&[1, 0]), 1.0).unwrap();
        let g = reference_metric(&b);
        let rule = QuadratureRule::new(m.kind, 64, &h.centers()).unwrap();
        for eps in [0.0, 0.1, 1.0] {
            let k = interpolate_metrics(&h, &g, eps).unwrap();
            for phi in test_form_dictionary(&m, 1).unwrap().iter() {
                let a = curvature_pairing(&k, phi, &m, &rule).unwrap();
                let ph = curvature_pairing(&h, phi, &m, &rule).unwrap();
                let pg = curvature_pairing(&g, phi, &m, &rule).unwrap();
                assert!((a - (ph + eps * pg) / (1.0 + eps)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn section_norms_are_chart_independent() {
        let m = build_manifold(ManifoldKind::P2);
        let b = line_bundle(&m, &[2]).unwrap();
        let h = log_pole_metric(&b, &mono(&[1, 1, 0]), 0.5).unwrap();
        let p = Point::new(m.kind, &[C64::new(0.4, 0.3), C64::new(-0.7, 0.1), C64::new(0.5, -0.2)]).unwrap();
        // The section z2^2 of O(2): local value (z2/z_c)^2 in chart c.
        let norm = |c: usize| {
            let v = p.z[2] / p.z[c];
            v.norm_sqr().powi(2) * (-2.0 * h.local_weight(&p, c)).exp()
        };
        let (a, b2, c) = (norm(0), norm(1), norm(2));
        assert!((a - b2).abs() < 1e-10 * a && (a - c).abs() < 1e-10 * a);
    }

    #[test]
    fn general_position_examples() {
        let p2 = build_manifold(ManifoldKind::P2);
        let z0 = ExactPoly::from_int_terms(ManifoldKind::P2, &[([1, 0, 0, 0], 1)]);
        let z1 = ExactPoly::from_int_terms(ManifoldKind::P2, &[([0, 1, 0, 0], 1)]);
        let z01 = ExactPoly::from_int_terms(ManifoldKind::P2, &[([1, 1, 0, 0], 1)]);
        assert!(general_position_check(&[z0.clone(), z1.clone()], &p2).unwrap());
        assert!(!general_position_check(&[z0.clone(), z01.clone()], &p2).unwrap());
        assert!(!general_position_check(&[z01, z0], &p2).unwrap());
        let p1 = build_manifold(ManifoldKind::P1);
        let a = ExactPoly::from_int_terms(ManifoldKind::P1, &[([1, 0, 0, 0], 1)]);
        let b = ExactPoly::from_int_terms(ManifoldKind::P1, &[([0, 1, 0, 0], 1)]);
        assert!(general_position_check(&[a.clone()], &p1).unwrap());
        assert!(matches!(general_position_check(&[a, b], &p1), Err(Error::Precondition(_))));
    }

    #[test]
    fn max_type_families_need_no_common_zeros() {
        let m = build_manifold(ManifoldKind::P2);
        let b = line_bundle(&m, &[1]).unwrap();
        assert!(max_log_metric(&b, &[mono(&[1, 0, 0]), mono(&[0, 1, 0])], 0.5).is_err());
        assert!(max_log_metric(&b, &[mono(&[1, 0, 0]), mono(&[0, 1, 0]), mono(&[0, 0, 1])], 0.5).is_ok());
    }
}
