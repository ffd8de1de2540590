//! Quadrature on the model manifolds.
//!
//! Each rule is a product rule in moment-map coordinates. On `P1` a unit point is
//! `z' = (sqrt(1-u), sqrt(u) e^{iθ})` in some unitary frame; the Fubini–Study
//! measure becomes `du dθ/2π` on `[0,1] × S¹`. On `P2` the moment simplex is
//! parametrized by `t_a = u`, `t_b = (1-u)v`, `t_c = (1-u)(1-v)` with density
//! `2(1-u)` and two angles. `P1xP1` uses a product of two curve rules.
//!
//! Gauss–Legendre nodes are used in `u`, `v` and the trapezoidal rule in the
//! angles. Refinement toward a divisor or point grades the radial variable
//! geometrically toward the corresponding end of the interval, after rotating
//! the frame so that every center is a coordinate point or hyperplane.
//! Nodes are generated on demand; rules are cheap to clone.

use crate::error::{Error, Result};
use crate::manifold::{hdot, LinearComponent, Frame, ManifoldKind, Manifold, Point};
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

static SERIAL: AtomicBool = AtomicBool::new(false);

/// Forces all reductions onto the calling thread. Results are bit-identical either way;
/// this only exists for profiling and for the `--serial` flag.
pub fn set_serial(on: bool) {
    SERIAL.store(on, Ordering::SeqCst);
}

pub fn is_serial() -> bool {
    SERIAL.load(Ordering::SeqCst)
}

const CHUNK: usize = 4096;

/// Runs `f` over fixed index chunks and merges the chunk results in order.
pub fn chunked_reduce<T, F, M>(len: usize, chunk: usize, f: F, mut merge: M) -> Option<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync,
    M: FnMut(T, T) -> T,
{
    let nchunks = len.div_ceil(chunk);
    let range = |c: usize| c * chunk..((c + 1) * chunk).min(len);
    let parts: Vec<T> = if is_serial() {
        (0..nchunks).map(|c| f(range(c))).collect()
    } else {
        (0..nchunks).into_par_iter().map(|c| f(range(c))).collect()
    };
    let mut it = parts.into_iter();
    let first = it.next()?;
    Some(it.fold(first, &mut merge))
}

fn gauss01(n: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let q = GaussLegendre::new(n.max(1).try_into().expect("nonzero"));
            let mut v: Vec<(f64, f64)> = q.iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(v)
        })
        .clone()
}

fn push_interval(out: &mut Vec<(f64, f64)>, a: f64, b: f64, n: usize) {
    for &(x, w) in gauss01(n).iter() {
        out.push((a + (b - a) * x, (b - a) * w));
    }
}

/// A node `u` on `[0, 1]` with its complement `1 - u` kept to full relative precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitNode {
    pub u: f64,
    pub uc: f64,
    pub w: f64,
}

/// Radial grading parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grading {
    /// Number of geometric layers toward a graded end.
    pub depth: usize,
    /// Ratio between consecutive layer widths.
    pub ratio: f64,
}

impl Default for Grading {
    fn default() -> Self {
        Grading { depth: 12, ratio: 0.2 }
    }
}

/// One-dimensional rule on `[0, 1]`, graded toward either end.
pub fn graded_rule(res: usize, grading: Grading, left: bool, right: bool) -> Vec<UnitNode> {
    if !left && !right {
        // Gauss nodes are symmetric, so the mirrored node is the exact complement.
        let g = gauss01(res);
        let n = g.len();
        return (0..n).map(|i| UnitNode { u: g[i].0, uc: g[n - 1 - i].0, w: g[i].1 }).collect();
    }
    let m = 4 + res / 16;
    let top = (res / 2).max(m);
    let half = |graded: bool| {
        // rule on [0, 1/2] graded toward 0
        let mut v = Vec::new();
        if graded {
            let mut hi = 0.5;
            for k in 0..grading.depth {
                let lo = hi * grading.ratio;
                push_interval(&mut v, lo, hi, if k == 0 { top } else { m });
                hi = lo;
            }
            push_interval(&mut v, 0.0, hi, m);
        } else {
            push_interval(&mut v, 0.0, 0.5, top);
        }
        v
    };
    let mut out: Vec<UnitNode> = half(left).into_iter().map(|(x, w)| UnitNode { u: x, uc: 1.0 - x, w }).collect();
    out.extend(half(right).into_iter().map(|(x, w)| UnitNode { u: 1.0 - x, uc: x, w }));
    out.sort_by(|a, b| a.u.total_cmp(&b.u).then(b.uc.total_cmp(&a.uc)));
    out
}

/// A refinement target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Center {
    Point(Point),
    Divisor(LinearComponent),
}

impl Center {
    fn check(&self, kind: ManifoldKind) -> Result<()> {
        let ok = match self {
            Center::Point(p) => p.kind == kind && p.coords().iter().all(|c| c.is_finite()),
            Center::Divisor(d) => d.kind() == kind,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("refinement center {self:?} is not a point of {kind}")))
        }
    }
}

#[derive(Clone, Debug)]
enum Cutoff {
    None,
    Near { center: [C64; 2], rho: f64 },
    Far { centers: Vec<[C64; 2]>, rho: f64 },
}

fn smooth_step(s: f64) -> f64 {
    // 1 on [0, 1/2], 0 on [1, ∞), a C³ septic step in between
    if s <= 0.5 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let x = 2.0 * (1.0 - s);
    x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3))
}

fn fs_angle(a: &[C64], b: &[C64]) -> f64 {
    (1.0 - hdot(a, b).norm_sqr()).max(0.0).sqrt().min(1.0).asin()
}

impl Cutoff {
    fn weight(&self, z: &[C64]) -> f64 {
        match self {
            Cutoff::None => 1.0,
            Cutoff::Near { center, rho } => smooth_step(fs_angle(center, z) / rho),
            Cutoff::Far { centers, rho } => {
                1.0 - centers.iter().map(|c| smooth_step(fs_angle(c, z) / rho)).sum::<f64>()
            }
        }
    }
}

#[derive(Clone, Debug)]
struct CurvePiece {
    frame: Frame,
    u: Arc<Vec<UnitNode>>,
    ntheta: usize,
    cutoff: Cutoff,
}

impl CurvePiece {
    fn len(&self) -> usize {
        self.u.len() * self.ntheta
    }

    fn node(&self, idx: usize) -> ([C64; 2], f64) {
        let (iu, it) = (idx / self.ntheta, idx % self.ntheta);
        let UnitNode { u, uc, w: wu } = self.u[iu];
        let th = 2.0 * PI * (it as f64 + 0.5) / self.ntheta as f64;
        let zp = [C64::new(uc.sqrt(), 0.0), C64::from_polar(u.sqrt(), th)];
        let z = self.frame.apply(&zp);
        let z = [z[0], z[1]];
        let w = wu / self.ntheta as f64 * self.cutoff.weight(&z);
        (z, w)
    }
}

#[derive(Clone, Debug)]
struct PlanePiece {
    frame: Frame,
    perm: [usize; 3],
    uv: Arc<Vec<(UnitNode, UnitNode, f64)>>,
    ntheta: usize,
}

impl PlanePiece {
    fn len(&self) -> usize {
        self.uv.len() * self.ntheta * self.ntheta
    }

    fn node(&self, idx: usize) -> ([C64; 3], f64) {
        let nt = self.ntheta;
        let (iuv, rest) = (idx / (nt * nt), idx % (nt * nt));
        let (i1, i2) = (rest / nt, rest % nt);
        let (u, v, w) = self.uv[iuv];
        let (u, uc, v, vc) = (u.u, u.uc, v.u, v.uc);
        let t1 = 2.0 * PI * (i1 as f64 + 0.5) / nt as f64;
        let t2 = 2.0 * PI * (i2 as f64 + 0.5) / nt as f64;
        let mut zp = [C64::new(0.0, 0.0); 3];
        zp[self.perm[0]] = C64::new(u.sqrt(), 0.0);
        zp[self.perm[1]] = C64::from_polar((uc * v).sqrt(), t1);
        zp[self.perm[2]] = C64::from_polar((uc * vc).sqrt(), t2);
        (self.frame.apply(&zp), w / (nt * nt) as f64)
    }
}

#[derive(Clone, Debug)]
enum Layout {
    Curve(Vec<CurvePiece>),
    Plane(PlanePiece),
    Product(Vec<CurvePiece>, Vec<CurvePiece>),
}

/// A quadrature node: unit homogeneous point, its chart, chart coordinates and weight.
#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub point: Point,
    pub chart: usize,
    pub x: [C64; 2],
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub kind: ManifoldKind,
    pub resolution: usize,
    pub grading: Grading,
    pub centers: Vec<Center>,
    layout: Layout,
    offsets: Vec<usize>,
    len: usize,
}

/// Classification of refinement targets on a single projective factor.
enum Target {
    Point(Vec<C64>),
    Hyperplane(Vec<C64>),
}

impl Target {
    fn vector(&self) -> &[C64] {
        match self {
            Target::Point(v) | Target::Hyperplane(v) => v,
        }
    }
}

fn pad3(v: &[C64]) -> [C64; 3] {
    let mut o = [C64::new(0.0, 0.0); 3];
    o[..v.len()].copy_from_slice(v);
    o
}

/// Finds a unitary frame in which every target vector is a coordinate vector.
/// Returns the frame and, per target, the coordinate index it maps to.
fn align(dim: usize, targets: &[Target]) -> Option<(Frame, Vec<usize>)> {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for t in targets {
        let v = t.vector();
        let mut new = true;
        for c in &cols {
            let d = hdot(c, v).norm();
            if (1.0 - d).abs() < 1e-12 {
                new = false;
                break;
            }
            if d > 1e-12 {
                return None;
            }
        }
        if new {
            cols.push(v.to_vec());
        }
    }
    // Prefer the identity frame when it already works.
    let id = Frame::identity(dim);
    let on_axis = |f: &Frame, v: &[C64]| -> Option<usize> {
        (0..dim).find(|&j| (1.0 - hdot(&f.column(j)[..dim], v).norm()).abs() < 1e-12)
    };
    let frame = if cols.iter().all(|c| on_axis(&id, c).is_some()) {
        id
    } else {
        let c3: Vec<[C64; 3]> = cols.iter().map(|c| pad3(c)).collect();
        Frame::from_columns(dim, &c3)
    };
    let idx = targets.iter().map(|t| on_axis(&frame, t.vector())).collect::<Option<Vec<_>>>()?;
    Some((frame, idx))
}

fn curve_pieces(res: usize, grading: Grading, targets: &[Target]) -> Vec<CurvePiece> {
    let full = |frame: Frame, left: bool, right: bool, cutoff: Cutoff| CurvePiece {
        frame,
        u: Arc::new(graded_rule(res, grading, left, right)),
        ntheta: res,
        cutoff,
    };
    if targets.is_empty() {
        return vec![full(Frame::identity(2), false, false, Cutoff::None)];
    }
    if let Some((frame, idx)) = align(2, targets) {
        // point e_0 sits at u = 0, e_1 at u = 1
        let left = idx.iter().any(|&j| j == 0);
        let right = idx.iter().any(|&j| j == 1);
        return vec![full(frame, left, right, Cutoff::None)];
    }
    // Partition of unity: one graded piece per center plus an ungraded remainder.
    let mut centers: Vec<[C64; 2]> = Vec::new();
    for t in targets {
        let v = t.vector();
        let c = [v[0], v[1]];
        if !centers.iter().any(|d| (1.0 - hdot(d, &c).norm()).abs() < 1e-12) {
            centers.push(c);
        }
    }
    let mut sep = f64::INFINITY;
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            sep = sep.min(fs_angle(&centers[i], &centers[j]));
        }
    }
    let rho = (0.5 * sep).min(0.5);
    let mut pieces: Vec<CurvePiece> = centers
        .iter()
        .map(|c| full(Frame::with_first(2, &pad3(c)), true, false, Cutoff::Near { center: *c, rho }))
        .collect();
    // The remainder must resolve cutoff transitions of width rho / 2.
    let fine = ((res as f64 * 0.25 / rho).ceil() as usize).clamp(res, 8 * res);
    pieces.push(CurvePiece {
        frame: Frame::identity(2),
        u: Arc::new(graded_rule(fine, grading, false, false)),
        ntheta: fine,
        cutoff: Cutoff::Far { centers, rho },
    });
    pieces
}

impl QuadratureRule {
    /// Rule with default grading.
    pub fn new(kind: ManifoldKind, resolution: usize, centers: &[Center]) -> Result<Self> {
        Self::with_grading(kind, resolution, centers, Grading::default())
    }

    pub fn with_grading(kind: ManifoldKind, resolution: usize, centers: &[Center], grading: Grading) -> Result<Self> {
        if resolution < 8 {
            return Err(Error::Config(format!("quadrature resolution {resolution} < 8")));
        }
        for c in centers {
            c.check(kind)?;
        }
        let res = resolution;
        let layout = match kind {
            ManifoldKind::P1 => {
                let targets: Vec<Target> = centers
                    .iter()
                    .map(|c| match c {
                        Center::Point(p) => Target::Point(p.coords().to_vec()),
                        Center::Divisor(d) => Target::Point(d.as_point().expect("P1 divisor").coords().to_vec()),
                    })
                    .collect();
                Layout::Curve(curve_pieces(res, grading, &targets))
            }
            ManifoldKind::P1xP1 => {
                let mut t1 = Vec::new();
                let mut t2 = Vec::new();
                for c in centers {
                    match c {
                        Center::Point(p) => {
                            t1.push(Target::Point(p.z[0..2].to_vec()));
                            t2.push(Target::Point(p.z[2..4].to_vec()));
                        }
                        Center::Divisor(LinearComponent::FiberZ(c)) => t1.push(Target::Point(c.to_vec())),
                        Center::Divisor(LinearComponent::FiberW(c)) => t2.push(Target::Point(c.to_vec())),
                        Center::Divisor(_) => unreachable!("checked kind"),
                    }
                }
                Layout::Product(curve_pieces(res, grading, &t1), curve_pieces(res, grading, &t2))
            }
            ManifoldKind::P2 => {
                let targets: Vec<Target> = centers
                    .iter()
                    .map(|c| match c {
                        Center::Point(p) => Target::Point(p.coords().to_vec()),
                        Center::Divisor(LinearComponent::Line(n)) => {
                            Target::Hyperplane(n.iter().map(|x| x.conj()).collect())
                        }
                        Center::Divisor(_) => unreachable!("checked kind"),
                    })
                    .collect();
                let (frame, idx) = align(3, &targets).ok_or_else(|| {
                    Error::Config("refinement centers cannot be aligned with a single unitary frame".into())
                })?;
                let a = targets
                    .iter()
                    .zip(&idx)
                    .find(|(t, _)| matches!(t, Target::Point(_)))
                    .or_else(|| targets.iter().zip(&idx).next())
                    .map(|(_, &j)| j)
                    .unwrap_or(0);
                let rest: Vec<usize> = (0..3).filter(|&j| j != a).collect();
                let perm = [a, rest[0], rest[1]];
                let (mut ul, mut ur, mut vl, mut vr) = (false, false, false, false);
                for (t, &j) in targets.iter().zip(&idx) {
                    let slot = perm.iter().position(|&p| p == j).expect("index in perm");
                    match (t, slot) {
                        (Target::Hyperplane(_), 0) => ul = true,
                        (Target::Hyperplane(_), 1) => {
                            vl = true;
                            ur = true;
                        }
                        (Target::Hyperplane(_), _) => {
                            vr = true;
                            ur = true;
                        }
                        (Target::Point(_), 0) => ur = true,
                        (Target::Point(_), 1) => {
                            ul = true;
                            vr = true;
                        }
                        (Target::Point(_), _) => {
                            ul = true;
                            vl = true;
                        }
                    }
                }
                let ur_rule = graded_rule(res, grading, ul, ur);
                let vr_rule = graded_rule(res, grading, vl, vr);
                let mut uv = Vec::with_capacity(ur_rule.len() * vr_rule.len());
                for &u in &ur_rule {
                    for &v in &vr_rule {
                        uv.push((u, v, 2.0 * u.uc * u.w * v.w));
                    }
                }
                Layout::Plane(PlanePiece { frame, perm, uv: Arc::new(uv), ntheta: res })
            }
        };
        let mut rule = QuadratureRule {
            kind,
            resolution,
            grading,
            centers: centers.to_vec(),
            layout,
            offsets: Vec::new(),
            len: 0,
        };
        rule.index();
        Ok(rule)
    }

    fn index(&mut self) {
        let sizes: Vec<usize> = match &self.layout {
            Layout::Curve(ps) => ps.iter().map(|p| p.len()).collect(),
            Layout::Plane(p) => vec![p.len()],
            Layout::Product(a, b) => {
                let mut v = Vec::new();
                for p in a {
                    for q in b {
                        v.push(p.len() * q.len());
                    }
                }
                v
            }
        };
        self.offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        self.offsets.push(0);
        for s in sizes {
            acc += s;
            self.offsets.push(acc);
        }
        self.len = acc;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Whether the rule uses the standard coordinate frame throughout (so the
    /// torus `diag(e^{iθ})` acts by shifting the angular nodes).
    pub fn is_standard_frame(&self) -> bool {
        match &self.layout {
            Layout::Curve(ps) => ps.iter().all(|p| p.frame.is_identity() && matches!(p.cutoff, Cutoff::None)),
            Layout::Plane(p) => p.frame.is_identity(),
            Layout::Product(a, b) => a
                .iter()
                .chain(b)
                .all(|p| p.frame.is_identity() && matches!(p.cutoff, Cutoff::None)),
        }
    }

    /// Same radial nodes with a single angular node per angle. Exact for integrands
    /// invariant under the coordinate torus when the frame is standard.
    pub fn torus_reduced(&self) -> Result<QuadratureRule> {
        if !self.is_standard_frame() {
            return Err(Error::Precondition("torus reduction needs the standard frame".into()));
        }
        let mut r = self.clone();
        match &mut r.layout {
            Layout::Curve(ps) => ps.iter_mut().for_each(|p| p.ntheta = 1),
            Layout::Plane(p) => p.ntheta = 1,
            Layout::Product(a, b) => a.iter_mut().chain(b.iter_mut()).for_each(|p| p.ntheta = 1),
        }
        r.index();
        Ok(r)
    }

    pub fn node(&self, idx: usize) -> Node {
        let piece = match self.offsets.binary_search(&idx) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let local = idx - self.offsets[piece];
        let zero = C64::new(0.0, 0.0);
        let (z, w) = match &self.layout {
            Layout::Curve(ps) => {
                let (z, w) = ps[piece].node(local);
                ([z[0], z[1], zero, zero], w)
            }
            Layout::Plane(p) => {
                let (z, w) = p.node(local);
                ([z[0], z[1], z[2], zero], w)
            }
            Layout::Product(a, b) => {
                let (i, j) = (piece / b.len(), piece % b.len());
                let nb = b[j].len();
                let (z1, w1) = a[i].node(local / nb);
                let (z2, w2) = b[j].node(local % nb);
                ([z1[0], z1[1], z2[0], z2[1]], w1 * w2)
            }
        };
        let point = Point { kind: self.kind, z };
        let chart = point.chart();
        Node { point, chart, x: point.chart_coords(chart), weight: w }
    }

    /// Deterministic parallel fold over all nodes with positive weight.
    pub fn fold<T, I, S, M>(&self, init: I, step: S, merge: M) -> T
    where
        T: Send,
        I: Fn() -> T + Sync,
        S: Fn(&mut T, &Node) + Sync,
        M: FnMut(T, T) -> T,
    {
        chunked_reduce(
            self.len,
            CHUNK,
            |r| {
                let mut acc = init();
                for i in r {
                    let nd = self.node(i);
                    if nd.weight > 0.0 {
                        step(&mut acc, &nd);
                    }
                }
                acc
            },
            merge,
        )
        .unwrap_or_else(init)
    }

    /// Weighted sums of a vector-valued field.
    pub fn integrate_vec<F>(&self, dim: usize, f: F) -> Vec<f64>
    where
        F: Fn(&Node, &mut [f64]) + Sync,
    {
        self.fold(
            || (vec![0.0; dim], vec![0.0; dim]),
            |(acc, buf), nd| {
                buf.iter_mut().for_each(|x| *x = 0.0);
                f(nd, buf);
                for k in 0..dim {
                    acc[k] += nd.weight * buf[k];
                }
            },
            |(mut a, b), (c, _)| {
                for k in 0..a.len() {
                    a[k] += c[k];
                }
                (a, b)
            },
        )
        .0
    }

    /// Collects all nodes (for small rules and inspection).
    pub fn nodes(&self) -> Vec<Node> {
        (0..self.len).map(|i| self.node(i)).collect()
    }
}

/// `Σ weight · field`. Infinite values are tolerated (and dropped) only when
/// `integrable` is set, for fields with an integrable singularity at isolated nodes.
pub fn integrate<F>(_m: &Manifold, rule: &QuadratureRule, field: F, integrable: bool) -> Result<f64>
where
    F: Fn(&Node) -> f64 + Sync,
{
    let (sum, bad) = rule.fold(
        || (0.0, 0usize),
        |(s, b), nd| {
            let v = field(nd);
            if v.is_finite() {
                *s += nd.weight * v;
            } else if !(integrable && v.is_infinite()) {
                *b += 1;
            }
        },
        |(a, b), (c, d)| (a + c, b + d),
    );
    if bad > 0 {
        return Err(Error::NumericalDomain(format!("{bad} quadrature nodes produced non-finite values")));
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::build_manifold;

    #[test]
    fn volumes_are_one() {
        for kind in [ManifoldKind::P1, ManifoldKind::P2, ManifoldKind::P1xP1] {
            let m = build_manifold(kind);
            let r = QuadratureRule::new(kind, 16, &[]).unwrap();
            let v = integrate(&m, &r, |_| 1.0, false).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "{kind}: {v}");
        }
    }

    #[test]
    fn graded_rules_integrate_polynomials() {
        for (l, r) in [(true, false), (false, true), (true, true)] {
            let q = graded_rule(16, Grading::default(), l, r);
            let s: f64 = q.iter().map(|n| n.w * n.u.powi(5)).sum();
            assert!((s - 1.0 / 6.0).abs() < 1e-14);
            assert!(q.iter().all(|n| (n.u + n.uc - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn rejects_low_resolution() {
        assert!(QuadratureRule::new(ManifoldKind::P1, 4, &[]).is_err());
    }

    #[test]
    fn misaligned_p2_centers_are_rejected() {
        let a = LinearComponent::coordinate(ManifoldKind::P2, 0);
        let b = LinearComponent::line([C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let r = QuadratureRule::new(ManifoldKind::P2, 8, &[Center::Divisor(a), Center::Divisor(b)]);
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
