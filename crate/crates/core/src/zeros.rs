//! Random sections, their zero sets, and pairings of zero currents with test forms.
//!
//! Coefficients are standard complex Gaussians in the orthonormal frame, normalized
//! to the unit sphere. Every draw comes from a ChaCha8 stream keyed by a master seed
//! and `index * STREAMS_PER_SAMPLE + member`, so results do not depend on scheduling.

use crate::bundle::{class_intersection, psi_ddc_pairing};
use crate::current::{check_codegree, degree_class, Current11};
use crate::error::{Error, Result};
use crate::fubini_study::fs_pairing;
use crate::homotopy;
use crate::manifold::{Frame, LinearComponent, Manifold, ManifoldKind, Point};
use crate::poly::{companion_roots, have_common_factor, resultant, ExactPoly, Poly};
use crate::quadrature::{is_serial, QuadratureRule};
use crate::roots::{binary_form_roots, cluster};
use crate::sections::{Section, SectionSpace};
use crate::testforms::TestForm;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Streams reserved per sample index: members use `0..m`, the root solver uses the last.
pub const STREAMS_PER_SAMPLE: u64 = 8;
const SOLVER_STREAM: u64 = STREAMS_PER_SAMPLE - 1;
/// Largest Bézout number solved by resultant elimination before switching to continuation.
pub const RESULTANT_MAX_BEZOUT: usize = 64;
const CLUSTER_RADIUS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    pub index: u64,
}

impl SeedRecord {
    pub fn new(master: u64, index: u64) -> Self {
        SeedRecord { master, index }
    }

    pub fn rng(&self, member: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.master);
        r.set_stream(self.index * STREAMS_PER_SAMPLE + member);
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralPosition {
    Verified,
    Failed,
    Unchecked,
}

#[derive(Clone, Debug)]
pub struct SectionTuple {
    pub members: Vec<Section>,
    pub seed: SeedRecord,
    pub general_position: GeneralPosition,
}

fn draw(space: &Arc<SectionSpace>, rng: &mut ChaCha8Rng) -> Result<Section> {
    if space.d_p() == 0 {
        return Err(Error::DegenerateSpace);
    }
    let mut c: Vec<C64> = (0..space.dim())
        .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let n = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|x| *x /= n);
    space.section(c)
}

/// A section drawn from the Fubini–Study measure on `P(H)`.
pub fn sample_section(space: &Arc<SectionSpace>, seed: SeedRecord) -> Result<Section> {
    draw(space, &mut seed.rng(0))
}

/// Independent draws, member `j` from stream `j` of the sample index.
pub fn sample_tuple(spaces: &[Arc<SectionSpace>], seed: SeedRecord) -> Result<SectionTuple> {
    if spaces.is_empty() || spaces.len() as u64 >= SOLVER_STREAM {
        return Err(Error::Precondition(format!("tuples hold 1 to {} sections", SOLVER_STREAM - 1)));
    }
    let members = spaces.iter().enumerate().map(|(j, s)| draw(s, &mut seed.rng(j as u64))).collect::<Result<_>>()?;
    Ok(SectionTuple { members, seed, general_position: GeneralPosition::Unchecked })
}

/// The section whose polynomial is `f`; `f` must be divisible by the space's base prefactor.
pub fn section_from_poly(space: &Arc<SectionSpace>, f: &Poly) -> Result<Section> {
    let t = space.transform()?;
    let pre = space.prefactor();
    let ex = &space.filtered.exponents;
    let d = ex.len();
    // Solve prefactor · Σ m_i scale_i z^{e_i} = f for m by least squares over f's monomials.
    let cols: Vec<Poly> = ex.iter().zip(&space.scales).map(|(e, s)| pre.mul(&Poly::new(space.kind(), vec![(*e, C64::new(*s, 0.0))]))).collect();
    let mut rows: Vec<crate::poly::Exp> = cols.iter().flat_map(|c| c.terms.iter().map(|t| t.0)).chain(f.terms.iter().map(|t| t.0)).collect();
    rows.sort();
    rows.dedup();
    let coef = |p: &Poly, e: &crate::poly::Exp| p.terms.iter().find(|t| &t.0 == e).map(|t| t.1).unwrap_or_default();
    let a = DMatrix::from_fn(rows.len(), d, |r, c| coef(&cols[c], &rows[r]));
    let b = DVector::from_fn(rows.len(), |r, _| coef(f, &rows[r]));
    let m = a.clone().svd(true, true).solve(&b, 1e-14).map_err(|e| Error::NumericalDomain(e.to_string()))?;
    if (&a * &m - &b).norm() > 1e-9 * b.norm().max(1e-300) {
        return Err(Error::Precondition("polynomial is not a section of this space".into()));
    }
    let tinv = t.clone().try_inverse().ok_or_else(|| Error::NumericalDomain("singular frame transform".into()))?;
    let c = tinv * m;
    space.section(c.iter().copied().collect())
}

/// Zero set of a section or tuple.
#[derive(Clone, Debug)]
pub enum ZeroSet {
    /// Isolated zeros with multiplicities; `bezout` is the expected total.
    Points { kind: ManifoldKind, points: Vec<(Point, usize)>, bezout: usize },
    /// The divisor of one section, paired through its log-norm potential.
    Divisor { section: Section },
}

impl ZeroSet {
    pub fn total_multiplicity(&self) -> Option<usize> {
        match self {
            ZeroSet::Points { points, .. } => Some(points.iter().map(|p| p.1).sum()),
            ZeroSet::Divisor { .. } => None,
        }
    }
}

fn base_components(s: &Section) -> Vec<(LinearComponent, usize)> {
    s.space.filtered.poles.iter().filter(|po| po.order > 0).map(|po| (po.component, po.order as usize)).collect()
}

fn check_zero_residual(f: &Poly, z: &[C64; 4]) -> Result<()> {
    let r = f.eval(z).norm() / f.bombieri_norm();
    if !(r <= 1e-8) {
        return Err(Error::RootFinding(format!("zero residual {r:.3e} exceeds 1e-8")));
    }
    Ok(())
}

fn merge_points(pts: Vec<(Point, usize)>) -> Vec<(Point, usize)> {
    let mut out: Vec<(Point, usize)> = Vec::new();
    for (p, m) in pts {
        match out.iter_mut().find(|(q, _)| q.chordal(&p) <= CLUSTER_RADIUS) {
            Some(slot) => slot.1 += m,
            None => out.push((p, m)),
        }
    }
    out
}

/// Zeros of a section on `P1`: base points with their orders and the roots of the residual.
pub fn zeros_on_curve(s: &Section) -> Result<ZeroSet> {
    let kind = s.space.kind();
    if kind != ManifoldKind::P1 {
        return Err(Error::Precondition(format!("zeros_on_curve needs P1, got {kind}")));
    }
    let res = s.residual_poly();
    if res.is_zero() {
        return Err(Error::Precondition("zero section".into()));
    }
    let k = s.space.basis.degree[0] as usize;
    let mut pts: Vec<(Point, usize)> = Vec::new();
    for (l, o) in base_components(s) {
        pts.push((l.as_point().expect("P1 component"), o));
    }
    let rk = s.space.filtered.residual_degree[0] as usize;
    if rk > 0 {
        let mut c = vec![C64::new(0.0, 0.0); rk + 1];
        for (e, v) in &res.terms {
            c[e[1] as usize] = *v;
        }
        for (r, m) in cluster(&binary_form_roots(&c)?, CLUSTER_RADIUS) {
            let z = [r[0], r[1], C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
            check_zero_residual(&res, &z)?;
            pts.push((Point::new(kind, &r)?, m));
        }
    }
    let points = merge_points(pts);
    let total: usize = points.iter().map(|p| p.1).sum();
    if total != k {
        return Err(Error::RootFinding(format!("found {total} zeros for degree {k}")));
    }
    Ok(ZeroSet::Points { kind, points, bezout: k })
}

/// Degree of `g` restricted to a linear component.
fn restricted_degree(l: &LinearComponent, deg: &[i64]) -> usize {
    match l {
        LinearComponent::FiberZ(_) => deg[1] as usize,
        LinearComponent::FiberW(_) => deg[0] as usize,
        _ => deg[0] as usize,
    }
}

/// Zeros of `g` on the curve `l`, or `None` when `g` vanishes on it.
fn restrict_zeros(kind: ManifoldKind, l: &LinearComponent, g: &Poly) -> Result<Option<Vec<(Point, usize)>>> {
    let r = restricted_degree(l, &g.degree()?);
    let n = r + 1;
    let at = |lam: C64| g.eval(&l.embed(&[C64::new(1.0, 0.0), lam]).expect("curve").0);
    let vals: Vec<C64> = (0..n).map(|k| at(C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))).collect();
    let c: Vec<C64> = (0..n)
        .map(|j| vals.iter().enumerate().map(|(k, v)| v * C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64)).sum::<C64>() / n as f64)
        .collect();
    if c.iter().all(|x| x.norm() <= 1e-12 * g.bombieri_norm()) {
        return Ok(None);
    }
    if r == 0 {
        return Ok(Some(Vec::new()));
    }
    let mut out = Vec::new();
    for (s, m) in cluster(&binary_form_roots(&c)?, CLUSTER_RADIUS) {
        let z = l.embed(&s).expect("curve").0;
        check_zero_residual(g, &z)?;
        out.push((Point::new(kind, &z[..kind.ncoords()])?, m));
    }
    Ok(Some(out))
}

fn random_component<R: Rng>(kind: ManifoldKind, which: usize, rng: &mut R) -> LinearComponent {
    let mut g = || C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng));
    match (kind, which) {
        (ManifoldKind::P1xP1, 0) => LinearComponent::fiber_z([g(), g()]).expect("nonzero"),
        (ManifoldKind::P1xP1, _) => LinearComponent::fiber_w([g(), g()]).expect("nonzero"),
        _ => LinearComponent::line([g(), g(), g()]).expect("nonzero"),
    }
}

/// Numerical common-factor test: on random test curves, some zero of `f` is a zero of `g`.
pub fn share_factor_numeric<R: Rng>(kind: ManifoldKind, f: &Poly, g: &Poly, rng: &mut R) -> Result<bool> {
    let gn = g.bombieri_norm();
    let families: &[usize] = if kind == ManifoldKind::P1xP1 { &[0, 1] } else { &[0] };
    for &fam in families {
        let mut hits = 0;
        for _ in 0..2 {
            let l = random_component(kind, fam, rng);
            match restrict_zeros(kind, &l, f) {
                Ok(Some(z)) => {
                    if z.iter().any(|(p, _)| g.eval(&p.z).norm() <= 1e-7 * gn) {
                        hits += 1;
                    }
                }
                Ok(None) => hits += 1,
                Err(Error::RootFinding(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if hits == 2 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Exact common-factor test after rounding both polynomials to 12 decimals relative to their norms.
fn share_factor_exact(f: &Poly, g: &Poly) -> Result<bool> {
    let unit = |p: &Poly| p.scale(C64::new(1.0 / p.coeff_norm(), 0.0));
    let (a, b) = (ExactPoly::from_poly_rounded(&unit(f), 12), ExactPoly::from_poly_rounded(&unit(g), 12));
    if a.is_zero() || b.is_zero() {
        return Ok(true);
    }
    have_common_factor(&a, &b)
}

const EXACT_MAX_DEGREE: i64 = 6;

fn is_constant(d: &[i64]) -> bool {
    d.iter().all(|&x| x == 0)
}

fn residual_pair_degenerate<R: Rng>(kind: ManifoldKind, f: &Poly, g: &Poly, rng: &mut R) -> Result<bool> {
    let (df, dg) = (f.degree()?, g.degree()?);
    if is_constant(&df) || is_constant(&dg) {
        return Ok(false);
    }
    if df.iter().chain(&dg).all(|&d| d <= EXACT_MAX_DEGREE) && share_factor_exact(f, g)? {
        return Ok(true);
    }
    share_factor_numeric(kind, f, g, rng)
}

/// Whether the members of a tuple have no common component; records the outcome.
pub fn empirical_general_position(tuple: &mut SectionTuple) -> Result<bool> {
    let ok = general_position_of(tuple)?;
    tuple.general_position = if ok { GeneralPosition::Verified } else { GeneralPosition::Failed };
    Ok(ok)
}

fn general_position_of(tuple: &SectionTuple) -> Result<bool> {
    let kind = tuple.members[0].space.kind();
    let m = tuple.members.len();
    if m > kind.dim() {
        return Err(Error::Precondition(format!("{m} sections on a manifold of dimension {}", kind.dim())));
    }
    if tuple.members.iter().any(|s| s.residual_poly().is_zero()) {
        return Ok(false);
    }
    if m == 1 {
        return Ok(true);
    }
    let (a, b) = (&tuple.members[0], &tuple.members[1]);
    let (ba, bb) = (base_components(a), base_components(b));
    if ba.iter().any(|(l, _)| bb.iter().any(|(k, _)| l.same_as(k))) {
        return Ok(false);
    }
    let (ra, rb) = (a.residual_poly(), b.residual_poly());
    for (l, _) in &ba {
        if restrict_zeros(kind, l, &rb)?.is_none() {
            return Ok(false);
        }
    }
    for (l, _) in &bb {
        if restrict_zeros(kind, l, &ra)?.is_none() {
            return Ok(false);
        }
    }
    Ok(!residual_pair_degenerate(kind, &ra, &rb, &mut tuple.seed.rng(SOLVER_STREAM))?)
}

type V4 = [C64; 4];

/// Random unitary change `z = U z'` acting on each projective factor.
fn random_change<R: Rng>(kind: ManifoldKind, rng: &mut R) -> [[C64; 4]; 4] {
    let mut u = [[C64::new(0.0, 0.0); 4]; 4];
    let mut put = |f: Frame, off: usize| {
        for r in 0..f.dim {
            for c in 0..f.dim {
                u[off + r][off + c] = f.m[r][c];
            }
        }
    };
    match kind {
        ManifoldKind::P1xP1 => {
            put(Frame::random(2, rng), 0);
            put(Frame::random(2, rng), 2);
        }
        k => put(Frame::random(k.ncoords(), rng), 0),
    }
    u
}

/// Common zeros of two polynomials by elimination of one affine variable.
fn resultant_zeros<R: Rng>(kind: ManifoldKind, f: &Poly, g: &Poly, rng: &mut R) -> Result<Vec<V4>> {
    let u = random_change(kind, rng);
    let (fp, gp) = (f.substitute(&u), g.substitute(&u));
    let (df, dg) = (f.degree()?, g.degree()?);
    let one = C64::new(1.0, 0.0);
    // affine coordinates: z' = (1, x, y) on P2 and ((1, x), (1, y)) on P1xP1
    let (yi, fy, gy, total) = match kind {
        ManifoldKind::P2 => (2, df[0], dg[0], (df[0] * dg[0]) as usize),
        _ => (3, df[1], dg[1], (df[0] * dg[1] + df[1] * dg[0]) as usize),
    };
    let lift = |x: C64, y: C64| -> V4 {
        if kind == ManifoldKind::P2 {
            [one, x, y, C64::new(0.0, 0.0)]
        } else {
            [one, x, one, y]
        }
    };
    let in_y = |p: &Poly, x: C64, d: i64| {
        let mut c = vec![C64::new(0.0, 0.0); d as usize + 1];
        for (e, v) in &p.terms {
            c[e[yi] as usize] += v * x.powu(e[1] as u32);
        }
        c
    };
    if total == 0 {
        return Ok(Vec::new());
    }
    let n = total + 1;
    let xs: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect();
    let vals: Vec<C64> = xs.iter().map(|&x| resultant(&in_y(&fp, x, fy), &in_y(&gp, x, gy))).collect();
    let c: Vec<C64> = (0..n)
        .map(|j| vals.iter().zip(&xs).map(|(v, x)| v * x.powi(-(j as i32))).sum::<C64>() / n as f64)
        .collect();
    let mut out = Vec::with_capacity(total);
    for r in binary_form_roots(&c)? {
        if r[0].norm() < 1e-8 {
            return Err(Error::RootFinding("elimination root at infinity".into()));
        }
        let mut x = r[1] / r[0];
        let (pick, other, dpick) = if fy > 0 { (&fp, &gp, fy) } else { (&gp, &fp, gy) };
        let ys = companion_roots(&in_y(pick, x, dpick))?;
        let mut y = *ys
            .iter()
            .min_by(|a, b| other.eval(&lift(x, **a)).norm().total_cmp(&other.eval(&lift(x, **b)).norm()))
            .ok_or_else(|| Error::RootFinding("no candidate for the eliminated variable".into()))?;
        for _ in 0..6 {
            let (vf, gf) = fp.eval_grad(&lift(x, y));
            let (vg, gg) = gp.eval_grad(&lift(x, y));
            let det = gf[1] * gg[yi] - gf[yi] * gg[1];
            if det.norm() == 0.0 {
                break;
            }
            let dx = (vf * gg[yi] - vg * gf[yi]) / det;
            let dy = (gf[1] * vg - gg[1] * vf) / det;
            x -= dx;
            y -= dy;
            if (dx.norm() + dy.norm()) < 1e-15 * (1.0 + x.norm() + y.norm()) {
                break;
            }
        }
        let zp = lift(x, y);
        let mut z = [C64::new(0.0, 0.0); 4];
        for a in 0..4 {
            for b in 0..4 {
                z[a] += u[a][b] * zp[b];
            }
        }
        out.push(z);
    }
    Ok(out)
}

fn validated(kind: ManifoldKind, f: &Poly, g: &Poly, zs: &[V4], expect: usize) -> Result<Vec<Point>> {
    let pts: Vec<Point> = zs.iter().map(|z| Point::new(kind, &z[..kind.ncoords()])).collect::<Result<_>>()?;
    for p in &pts {
        check_zero_residual(f, &p.z)?;
        check_zero_residual(g, &p.z)?;
    }
    let distinct = merge_points(pts.iter().map(|p| (*p, 1)).collect()).len();
    if pts.len() != expect || distinct != expect {
        return Err(Error::RootFinding(format!("{} zeros ({distinct} distinct) for Bézout number {expect}", pts.len())));
    }
    Ok(pts)
}

/// Common zeros of two residual polynomials in general position.
pub fn solve_pair<R: Rng>(kind: ManifoldKind, f: &Poly, g: &Poly, rng: &mut R) -> Result<Vec<Point>> {
    let (df, dg) = (f.degree()?, g.degree()?);
    let expect = class_intersection(kind, &to_f64(&df), &to_f64(&dg)).round() as usize;
    if expect == 0 {
        return Ok(Vec::new());
    }
    if expect <= RESULTANT_MAX_BEZOUT {
        let attempt = resultant_zeros(kind, f, g, rng).and_then(|zs| validated(kind, f, g, &zs, expect));
        if let Ok(p) = attempt {
            return Ok(p);
        }
    }
    let zs = homotopy::solve(kind, f, g, rng)?;
    validated(kind, f, g, &zs, expect)
}

fn to_f64(d: &[i64]) -> Vec<f64> {
    d.iter().map(|&x| x as f64).collect()
}

/// Common zeros of a pair of sections on a surface, with multiplicities.
///
/// Base divisors are split off: base-base pairs meet in one point, base-residual
/// pairs are solved on the base curve, and the two residual curves go to
/// [`solve_pair`]. A shared component is a general-position failure.
pub fn common_zeros(tuple: &SectionTuple) -> Result<ZeroSet> {
    if tuple.members.len() != 2 {
        return Err(Error::Precondition("common zeros need exactly two sections".into()));
    }
    let (a, b) = (&tuple.members[0], &tuple.members[1]);
    let kind = a.space.kind();
    if kind.dim() != 2 || b.space.kind() != kind {
        return Err(Error::Precondition("common zeros need two sections on one surface".into()));
    }
    let (ra, rb) = (a.residual_poly(), b.residual_poly());
    if ra.is_zero() || rb.is_zero() {
        return Err(Error::Precondition("zero section".into()));
    }
    let fail = |what: &str| Error::GeneralPosition(format!("sections share a component ({what})"));
    let mut rng = tuple.seed.rng(SOLVER_STREAM);
    let (ba, bb) = (base_components(a), base_components(b));
    let mut pts: Vec<(Point, usize)> = Vec::new();
    for (l, o) in &ba {
        for (k, q) in &bb {
            if l.same_as(k) {
                return Err(fail("base divisor"));
            }
            if let Some(p) = l.intersect(k) {
                pts.push((p, o * q));
            }
        }
    }
    for (comps, other) in [(&ba, &rb), (&bb, &ra)] {
        for (l, o) in comps {
            let z = restrict_zeros(kind, l, other)?.ok_or_else(|| fail("base divisor inside a zero curve"))?;
            pts.extend(z.into_iter().map(|(p, m)| (p, m * o)));
        }
    }
    if residual_pair_degenerate(kind, &ra, &rb, &mut rng)? {
        return Err(fail("residual curves"));
    }
    pts.extend(solve_pair(kind, &ra, &rb, &mut rng)?.into_iter().map(|p| (p, 1)));
    let bezout = class_intersection(kind, &to_f64(&a.space.basis.degree), &to_f64(&b.space.basis.degree)).round() as usize;
    let points = merge_points(pts);
    let total: usize = points.iter().map(|p| p.1).sum();
    if total != bezout {
        return Err(Error::RootFinding(format!("total multiplicity {total} differs from Bézout number {bezout}")));
    }
    Ok(ZeroSet::Points { kind, points, bezout })
}

/// `log |F(z)|` at a unit point, `F` the section's polynomial.
pub fn log_modulus(s: &Section, p: &Point) -> f64 {
    s.space.log_prefactor(&p.z) + s.residual_value(&p.z).norm().ln()
}

/// `⟨[Z], φ⟩`: a weighted point sum, or by Lelong–Poincaré for a divisor.
pub fn zero_pairing(zs: &ZeroSet, phi: &TestForm, m: &Manifold, rule: &QuadratureRule) -> Result<f64> {
    match zs {
        ZeroSet::Points { points, .. } => {
            check_codegree(m, phi, m.n)?;
            Ok(points.iter().map(|(p, k)| *k as f64 * phi.value_at(p)).sum())
        }
        ZeroSet::Divisor { section } => {
            let class = Current11::smooth(m.kind, degree_class(m.kind, &section.space.degree_f64()));
            let a = class.pair(m, rule, phi)?;
            let b = psi_ddc_pairing(m, rule, phi, |x| log_modulus(section, x))?;
            Ok(a + b)
        }
    }
}

/// The zero current used by expected-current checks: points on curves, divisors on surfaces.
pub fn section_zero_set(s: &Section) -> Result<ZeroSet> {
    if s.space.kind() == ManifoldKind::P1 {
        zeros_on_curve(s)
    } else {
        Ok(ZeroSet::Divisor { section: s.clone() })
    }
}

/// Monte Carlo mean of `⟨[s=0], φ⟩` against `⟨γ_p, φ⟩`: `(|gap|, standard error)`.
pub fn expected_zero_residual(
    space: &Arc<SectionSpace>,
    phi: &TestForm,
    m: &Manifold,
    rule: &QuadratureRule,
    samples: usize,
    master: u64,
) -> Result<(f64, f64)> {
    if samples < 100 {
        return Err(Error::Precondition(format!("need at least 100 samples, got {samples}")));
    }
    let one = |i: usize| -> Result<f64> {
        let s = sample_section(space, SeedRecord::new(master, i as u64))?;
        zero_pairing(&section_zero_set(&s)?, phi, m, rule)
    };
    let vals: Vec<f64> = if is_serial() {
        (0..samples).map(one).collect::<Result<_>>()?
    } else {
        (0..samples).into_par_iter().map(one).collect::<Result<_>>()?
    };
    let (mean, se) = crate::stats::mean_se(&vals);
    let target = fs_pairing(space, phi, m, rule)?;
    Ok(((mean - target).abs(), se))
}

/// `|⟨v, s⟩|²` for a sampled coefficient vector.
pub fn projection_sq(s: &Section, v: &[C64]) -> f64 {
    v.iter().zip(&s.coeffs).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()
}
