//! The three model manifolds, their charts and the normalized Fubini–Study form.
//!
//! Points are stored as unit homogeneous vectors (one unit vector per factor on
//! `P1xP1`). The chart attached to a point is the one in which it has the
//! largest homogeneous coordinate, so chart coordinates never exceed 1 in modulus.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldKind {
    P1,
    P2,
    P1xP1,
}

impl ManifoldKind {
    pub fn dim(self) -> usize {
        match self {
            ManifoldKind::P1 => 1,
            _ => 2,
        }
    }

    /// Number of homogeneous coordinates.
    pub fn ncoords(self) -> usize {
        match self {
            ManifoldKind::P1 => 2,
            ManifoldKind::P2 => 3,
            ManifoldKind::P1xP1 => 4,
        }
    }

    /// Number of entries in a multidegree.
    pub fn ndeg(self) -> usize {
        match self {
            ManifoldKind::P1xP1 => 2,
            _ => 1,
        }
    }

    pub fn ncharts(self) -> usize {
        match self {
            ManifoldKind::P1 => 2,
            ManifoldKind::P2 => 3,
            ManifoldKind::P1xP1 => 4,
        }
    }

    /// Multidegree of the canonical bundle.
    pub fn canonical(self) -> Vec<i64> {
        match self {
            ManifoldKind::P1 => vec![-2],
            ManifoldKind::P2 => vec![-3],
            ManifoldKind::P1xP1 => vec![-2, -2],
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ManifoldKind::P1 => "P1",
            ManifoldKind::P2 => "P2",
            ManifoldKind::P1xP1 => "P1xP1",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ManifoldKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(ManifoldKind::P1),
            "p2" => Ok(ManifoldKind::P2),
            "p1xp1" | "p1p1" | "p1*p1" => Ok(ManifoldKind::P1xP1),
            _ => Err(Error::Config(format!("unsupported manifold kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartDescriptor {
    pub id: usize,
    pub dim: usize,
    /// Homogeneous coordinates set to 1 in this chart.
    pub unit_coords: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifold {
    pub kind: ManifoldKind,
    pub n: usize,
    pub charts: Vec<ChartDescriptor>,
    pub volume_normalization: f64,
}

pub fn build_manifold(kind: ManifoldKind) -> Manifold {
    let charts = match kind {
        ManifoldKind::P1 | ManifoldKind::P2 => (0..kind.ncoords())
            .map(|i| ChartDescriptor { id: i, dim: kind.dim(), unit_coords: vec![i] })
            .collect(),
        ManifoldKind::P1xP1 => (0..4)
            .map(|c| ChartDescriptor { id: c, dim: 2, unit_coords: vec![c / 2, 2 + c % 2] })
            .collect(),
    };
    Manifold { kind, n: kind.dim(), charts, volume_normalization: 1.0 }
}

impl Manifold {
    /// Matrix of the Kähler form in chart coordinates, `ω = (i/π) Σ G_ab dx_a ∧ dx̄_b`.
    pub fn kahler(&self, x: &[C64; 2]) -> Herm {
        kahler_matrix(self.kind, x)
    }

    /// Ratio `α ∧ ω^{n-1} / ω^n` for a real (1,1)-form with matrix `a`.
    pub fn trace_ratio(&self, a: &Herm, g: &Herm) -> f64 {
        if self.n == 1 {
            a.a11 / g.a11
        } else {
            a.mixdet(g) / (2.0 * g.det())
        }
    }

    /// Ratio `α ∧ β / ω²` on a surface.
    pub fn wedge_ratio(&self, a: &Herm, b: &Herm, g: &Herm) -> f64 {
        a.mixdet(b) / (2.0 * g.det())
    }
}

/// Hermitian 2×2 matrix (the lower-right block is unused in dimension one).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Herm {
    pub a11: f64,
    pub a22: f64,
    pub a12: C64,
}

impl Herm {
    pub const ZERO: Herm = Herm { a11: 0.0, a22: 0.0, a12: C64 { re: 0.0, im: 0.0 } };

    pub fn scalar(a: f64) -> Herm {
        Herm { a11: a, ..Herm::ZERO }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12.norm_sqr()
    }

    /// Mixed determinant, normalized so that `mixdet(A, A) = 2 det A`.
    pub fn mixdet(&self, b: &Herm) -> f64 {
        self.a11 * b.a22 + self.a22 * b.a11 - 2.0 * (self.a12 * b.a12.conj()).re
    }

    pub fn scale(&self, c: f64) -> Herm {
        Herm { a11: self.a11 * c, a22: self.a22 * c, a12: self.a12 * c }
    }

    pub fn add(&self, o: &Herm) -> Herm {
        Herm { a11: self.a11 + o.a11, a22: self.a22 + o.a22, a12: self.a12 + o.a12 }
    }

    pub fn axpy(&mut self, c: f64, o: &Herm) {
        self.a11 += c * o.a11;
        self.a22 += c * o.a22;
        self.a12 += o.a12 * c;
    }

    /// `v^* A v` restricted to the first `n` entries.
    pub fn quad(&self, v: &[C64; 2], n: usize) -> f64 {
        if n == 1 {
            return self.a11 * v[0].norm_sqr();
        }
        self.a11 * v[0].norm_sqr()
            + self.a22 * v[1].norm_sqr()
            + 2.0 * (v[0] * self.a12 * v[1].conj()).re
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a22.abs()).max(self.a12.norm())
    }
}

pub fn kahler_matrix(kind: ManifoldKind, x: &[C64; 2]) -> Herm {
    match kind {
        ManifoldKind::P1 => {
            let r = 1.0 + x[0].norm_sqr();
            Herm::scalar(0.5 / (r * r))
        }
        ManifoldKind::P2 => {
            let r = 1.0 + x[0].norm_sqr() + x[1].norm_sqr();
            let r2 = r * r;
            Herm {
                a11: 0.5 * (1.0 / r - x[0].norm_sqr() / r2),
                a22: 0.5 * (1.0 / r - x[1].norm_sqr() / r2),
                a12: -0.5 * x[0].conj() * x[1] / r2,
            }
        }
        ManifoldKind::P1xP1 => {
            let r1 = 1.0 + x[0].norm_sqr();
            let r2 = 1.0 + x[1].norm_sqr();
            Herm {
                a11: FRAC_1_SQRT_2 * 0.5 / (r1 * r1),
                a22: FRAC_1_SQRT_2 * 0.5 / (r2 * r2),
                a12: C64::new(0.0, 0.0),
            }
        }
    }
}

/// Matrix of the pulled-back Fubini–Study form of one factor of `P1xP1`
/// (unit mass on that factor, not rescaled).
pub fn factor_form(factor: usize, x: &[C64; 2]) -> Herm {
    let r = 1.0 + x[factor].norm_sqr();
    let v = 0.5 / (r * r);
    if factor == 0 {
        Herm { a11: v, ..Herm::ZERO }
    } else {
        Herm { a22: v, ..Herm::ZERO }
    }
}

/// Lebesgue density of `ω^n` in chart coordinates: `n! det G (2/π)^n`.
pub fn volume_density(kind: ManifoldKind, x: &[C64; 2]) -> f64 {
    let g = kahler_matrix(kind, x);
    match kind.dim() {
        1 => g.a11 * 2.0 / PI,
        _ => 2.0 * g.det() * 4.0 / (PI * PI),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub kind: ManifoldKind,
    pub z: [C64; 4],
}

fn normalize_slice(z: &mut [C64]) -> Result<()> {
    let nrm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::NumericalDomain("zero homogeneous vector".into()));
    }
    for c in z.iter_mut() {
        *c /= nrm;
    }
    Ok(())
}

fn argmax_abs(z: &[C64]) -> usize {
    let mut best = 0;
    for i in 1..z.len() {
        if z[i].norm_sqr() > z[best].norm_sqr() {
            best = i;
        }
    }
    best
}

impl Point {
    /// Builds a point from homogeneous coordinates, normalizing each factor.
    pub fn new(kind: ManifoldKind, coords: &[C64]) -> Result<Point> {
        if coords.len() != kind.ncoords() {
            return Err(Error::Config(format!(
                "{kind} needs {} homogeneous coordinates, got {}",
                kind.ncoords(),
                coords.len()
            )));
        }
        let mut z = [C64::new(0.0, 0.0); 4];
        z[..coords.len()].copy_from_slice(coords);
        match kind {
            ManifoldKind::P1xP1 => {
                normalize_slice(&mut z[0..2])?;
                normalize_slice(&mut z[2..4])?;
            }
            _ => normalize_slice(&mut z[..kind.ncoords()])?,
        }
        Ok(Point { kind, z })
    }

    pub fn real(kind: ManifoldKind, coords: &[f64]) -> Result<Point> {
        let c: Vec<C64> = coords.iter().map(|&x| C64::new(x, 0.0)).collect();
        Point::new(kind, &c)
    }

    /// Point with affine coordinates `x` in chart `chart`.
    pub fn from_chart(kind: ManifoldKind, chart: usize, x: &[C64; 2]) -> Point {
        let one = C64::new(1.0, 0.0);
        let mut z = [C64::new(0.0, 0.0); 4];
        match kind {
            ManifoldKind::P1 => {
                z[chart] = one;
                z[1 - chart] = x[0];
            }
            ManifoldKind::P2 => {
                let mut k = 0;
                for a in 0..3 {
                    if a == chart {
                        z[a] = one;
                    } else {
                        z[a] = x[k];
                        k += 1;
                    }
                }
            }
            ManifoldKind::P1xP1 => {
                let (i, j) = (chart / 2, chart % 2);
                z[i] = one;
                z[1 - i] = x[0];
                z[2 + j] = one;
                z[2 + (1 - j)] = x[1];
            }
        }
        Point::new(kind, &z[..kind.ncoords()]).expect("chart point is nonzero")
    }

    pub fn coords(&self) -> &[C64] {
        &self.z[..self.kind.ncoords()]
    }

    /// The chart in which this point has its largest coordinate(s).
    pub fn chart(&self) -> usize {
        match self.kind {
            ManifoldKind::P1 => argmax_abs(&self.z[..2]),
            ManifoldKind::P2 => argmax_abs(&self.z[..3]),
            ManifoldKind::P1xP1 => 2 * argmax_abs(&self.z[..2]) + argmax_abs(&self.z[2..4]),
        }
    }

    /// Affine coordinates in the given chart (undefined where the chart is invalid).
    pub fn chart_coords(&self, chart: usize) -> [C64; 2] {
        chart_coords_of(self.kind, &self.z, chart)
    }

    /// Chordal distance: the sine of the Fubini–Study angle (root-sum-square over factors).
    pub fn chordal(&self, o: &Point) -> f64 {
        match self.kind {
            ManifoldKind::P1xP1 => {
                let a = sine_dist(&self.z[0..2], &o.z[0..2]);
                let b = sine_dist(&self.z[2..4], &o.z[2..4]);
                (a * a + b * b).sqrt()
            }
            k => sine_dist(&self.z[..k.ncoords()], &o.z[..k.ncoords()]),
        }
    }
}

pub fn hdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn sine_dist(a: &[C64], b: &[C64]) -> f64 {
    (1.0 - hdot(a, b).norm_sqr()).max(0.0).sqrt()
}

pub fn chart_coords_of(kind: ManifoldKind, z: &[C64; 4], chart: usize) -> [C64; 2] {
    let zero = C64::new(0.0, 0.0);
    match kind {
        ManifoldKind::P1 => [z[1 - chart] / z[chart], zero],
        ManifoldKind::P2 => {
            let mut out = [zero; 2];
            let mut k = 0;
            for a in 0..3 {
                if a != chart {
                    out[k] = z[a] / z[chart];
                    k += 1;
                }
            }
            out
        }
        ManifoldKind::P1xP1 => {
            let (i, j) = (chart / 2, chart % 2);
            [z[1 - i] / z[i], z[2 + (1 - j)] / z[2 + j]]
        }
    }
}

/// Homogeneous coordinate index behind each chart variable.
pub fn chart_var_index(kind: ManifoldKind, chart: usize) -> [usize; 2] {
    match kind {
        ManifoldKind::P1 => [1 - chart, 0],
        ManifoldKind::P2 => {
            let v: Vec<usize> = (0..3).filter(|&a| a != chart).collect();
            [v[0], v[1]]
        }
        ManifoldKind::P1xP1 => [1 - chart / 2, 2 + (1 - chart % 2)],
    }
}

/// Homogeneous vector rescaled (per factor) so the chart's unit coordinates equal 1.
pub fn chart_normalized(kind: ManifoldKind, z: &[C64; 4], chart: usize) -> [C64; 4] {
    let mut out = *z;
    match kind {
        ManifoldKind::P1 | ManifoldKind::P2 => {
            let d = z[chart];
            for c in out.iter_mut().take(kind.ncoords()) {
                *c /= d;
            }
        }
        ManifoldKind::P1xP1 => {
            let (d1, d2) = (z[chart / 2], z[2 + chart % 2]);
            out[0] /= d1;
            out[1] /= d1;
            out[2] /= d2;
            out[3] /= d2;
        }
    }
    out
}

/// Derivative of the chart coordinates along a homogeneous tangent vector `dz` at `z`.
pub fn chart_tangent(kind: ManifoldKind, z: &[C64; 4], dz: &[C64; 4], chart: usize) -> [C64; 2] {
    let zero = C64::new(0.0, 0.0);
    let quot = |num: usize, den: usize| (dz[num] * z[den] - z[num] * dz[den]) / (z[den] * z[den]);
    match kind {
        ManifoldKind::P1 => [quot(1 - chart, chart), zero],
        ManifoldKind::P2 => {
            let mut out = [zero; 2];
            let mut k = 0;
            for a in 0..3 {
                if a != chart {
                    out[k] = quot(a, chart);
                    k += 1;
                }
            }
            out
        }
        ManifoldKind::P1xP1 => {
            let (i, j) = (chart / 2, chart % 2);
            [quot(1 - i, i), quot(2 + (1 - j), 2 + j)]
        }
    }
}

/// A linear irreducible divisor: a point on `P1`, a line on `P2`, or a fiber on `P1xP1`.
///
/// Each carries a unit defining linear form `ℓ`; for a unit point `z` the modulus
/// `|ℓ(z)|` is the chordal distance to the divisor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearComponent {
    /// The point `[c0 : c1]` of `P1`, cut out by `c0 z1 - c1 z0`.
    Point([C64; 2]),
    /// The line `{n0 z0 + n1 z1 + n2 z2 = 0}` of `P2`.
    Line([C64; 3]),
    /// The fiber `{[c] × P1}` of `P1xP1`.
    FiberZ([C64; 2]),
    /// The fiber `{P1 × [c]}` of `P1xP1`.
    FiberW([C64; 2]),
}

fn unit2(c: [C64; 2]) -> Result<[C64; 2]> {
    let mut v = c;
    normalize_slice(&mut v)?;
    Ok(v)
}

impl LinearComponent {
    pub fn point(c0: C64, c1: C64) -> Result<Self> {
        Ok(LinearComponent::Point(unit2([c0, c1])?))
    }

    pub fn line(n: [C64; 3]) -> Result<Self> {
        let mut v = n;
        normalize_slice(&mut v)?;
        Ok(LinearComponent::Line(v))
    }

    pub fn fiber_z(c: [C64; 2]) -> Result<Self> {
        Ok(LinearComponent::FiberZ(unit2(c)?))
    }

    pub fn fiber_w(c: [C64; 2]) -> Result<Self> {
        Ok(LinearComponent::FiberW(unit2(c)?))
    }

    /// The coordinate divisor `{z_i = 0}` (on `P1xP1`, indices 2 and 3 refer to the second factor).
    pub fn coordinate(kind: ManifoldKind, i: usize) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match kind {
            ManifoldKind::P1 => {
                // {z_i = 0} is the point e_{1-i}
                if i == 0 {
                    LinearComponent::Point([zero, one])
                } else {
                    LinearComponent::Point([one, zero])
                }
            }
            ManifoldKind::P2 => {
                let mut n = [zero; 3];
                n[i] = one;
                LinearComponent::Line(n)
            }
            ManifoldKind::P1xP1 => {
                let c = if i % 2 == 0 { [zero, one] } else { [one, zero] };
                if i < 2 {
                    LinearComponent::FiberZ(c)
                } else {
                    LinearComponent::FiberW(c)
                }
            }
        }
    }

    pub fn kind(&self) -> ManifoldKind {
        match self {
            LinearComponent::Point(_) => ManifoldKind::P1,
            LinearComponent::Line(_) => ManifoldKind::P2,
            _ => ManifoldKind::P1xP1,
        }
    }

    /// Value of the unit defining form at a homogeneous vector.
    pub fn eval(&self, z: &[C64; 4]) -> C64 {
        match self {
            LinearComponent::Point(c) => c[0] * z[1] - c[1] * z[0],
            LinearComponent::Line(n) => n[0] * z[0] + n[1] * z[1] + n[2] * z[2],
            LinearComponent::FiberZ(c) => c[0] * z[1] - c[1] * z[0],
            LinearComponent::FiberW(c) => c[0] * z[3] - c[1] * z[2],
        }
    }

    /// Coefficients of the defining form in the homogeneous coordinates.
    pub fn form_coeffs(&self) -> [C64; 4] {
        let zero = C64::new(0.0, 0.0);
        match *self {
            LinearComponent::Point(c) => [-c[1], c[0], zero, zero],
            LinearComponent::Line(n) => [n[0], n[1], n[2], zero],
            LinearComponent::FiberZ(c) => [-c[1], c[0], zero, zero],
            LinearComponent::FiberW(c) => [zero, zero, -c[1], c[0]],
        }
    }

    /// Multidegree of the defining form.
    pub fn degree(&self) -> Vec<i64> {
        match self {
            LinearComponent::FiberZ(_) => vec![1, 0],
            LinearComponent::FiberW(_) => vec![0, 1],
            _ => vec![1],
        }
    }

    pub fn distance(&self, p: &Point) -> f64 {
        self.eval(&p.z).norm()
    }

    /// Same divisor up to the phase of the defining form.
    pub fn same_as(&self, o: &LinearComponent) -> bool {
        let (a, b) = (self.form_coeffs(), o.form_coeffs());
        let same_type = std::mem::discriminant(self) == std::mem::discriminant(o);
        same_type && (1.0 - hdot(&a, &b).norm_sqr()).abs() < 1e-20
    }

    /// Isometric parametrization `ι : P1 → X` of a curve component, with its
    /// homogeneous derivative at parameter `[1 : λ]` direction. Returns `None` for points.
    pub fn embed(&self, s: &[C64; 2]) -> Option<([C64; 4], [C64; 4])> {
        let zero = C64::new(0.0, 0.0);
        match *self {
            LinearComponent::Point(_) => None,
            LinearComponent::Line(n) => {
                let (u, v) = line_basis(&n);
                let mut z = [zero; 4];
                let mut dz = [zero; 4];
                for a in 0..3 {
                    z[a] = s[0] * u[a] + s[1] * v[a];
                }
                // derivative along the parameter chart in which s is largest
                if s[0].norm_sqr() >= s[1].norm_sqr() {
                    for a in 0..3 {
                        dz[a] = v[a] * s[0];
                    }
                } else {
                    for a in 0..3 {
                        dz[a] = u[a] * s[1];
                    }
                }
                Some((z, dz))
            }
            LinearComponent::FiberZ(c) => {
                let z = [c[0], c[1], s[0], s[1]];
                let dz = if s[0].norm_sqr() >= s[1].norm_sqr() {
                    [zero, zero, zero, s[0]]
                } else {
                    [zero, zero, s[1], zero]
                };
                Some((z, dz))
            }
            LinearComponent::FiberW(c) => {
                let z = [s[0], s[1], c[0], c[1]];
                let dz = if s[0].norm_sqr() >= s[1].norm_sqr() {
                    [zero, s[0], zero, zero]
                } else {
                    [s[1], zero, zero, zero]
                };
                Some((z, dz))
            }
        }
    }

    /// Parameter of a point of the curve under [`LinearComponent::embed`].
    pub fn parameter_of(&self, p: &Point) -> Option<[C64; 2]> {
        match *self {
            LinearComponent::Point(_) => None,
            LinearComponent::Line(n) => {
                let (u, v) = line_basis(&n);
                Some([hdot(&u, &p.z[..3]), hdot(&v, &p.z[..3])])
            }
            LinearComponent::FiberZ(_) => Some([p.z[2], p.z[3]]),
            LinearComponent::FiberW(_) => Some([p.z[0], p.z[1]]),
        }
    }

    /// Intersection with another divisor on a surface, if it is a single point.
    pub fn intersect(&self, o: &LinearComponent) -> Option<Point> {
        use LinearComponent::*;
        match (*self, *o) {
            (Line(a), Line(b)) => {
                // cross product of the normals spans the common zero
                let z = [
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                self::Point::new(ManifoldKind::P2, &z).ok()
            }
            (FiberZ(c), FiberW(d)) | (FiberW(d), FiberZ(c)) => {
                self::Point::new(ManifoldKind::P1xP1, &[c[0], c[1], d[0], d[1]]).ok()
            }
            _ => None,
        }
    }

    /// The point of `P1` for a point component.
    pub fn as_point(&self) -> Option<Point> {
        match *self {
            LinearComponent::Point(c) => Point::new(ManifoldKind::P1, &c).ok(),
            _ => None,
        }
    }
}

/// Orthonormal basis of the plane `{n · z = 0}` in `C^3`.
pub fn line_basis(n: &[C64; 3]) -> ([C64; 3], [C64; 3]) {
    // The plane is the Hermitian orthogonal complement of conj(n).
    let nb = [n[0].conj(), n[1].conj(), n[2].conj()];
    let f = Frame::with_first(3, &nb);
    (f.column(1), f.column(2))
}

/// A unitary change of homogeneous coordinates, `z = U z'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub dim: usize,
    pub m: [[C64; 3]; 3],
}

impl Frame {
    pub fn identity(dim: usize) -> Frame {
        let mut m = [[C64::new(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate().take(dim) {
            row[i] = C64::new(1.0, 0.0);
        }
        Frame { dim, m }
    }

    pub fn is_identity(&self) -> bool {
        let id = Frame::identity(self.dim);
        (0..self.dim).all(|i| (0..self.dim).all(|j| (self.m[i][j] - id.m[i][j]).norm() < 1e-15))
    }

    pub fn column(&self, j: usize) -> [C64; 3] {
        [self.m[0][j], self.m[1][j], self.m[2][j]]
    }

    /// Unitary matrix whose columns extend the given orthonormal vectors.
    pub fn from_columns(dim: usize, cols: &[[C64; 3]]) -> Frame {
        let mut basis: Vec<[C64; 3]> = Vec::new();
        let mut candidates: Vec<[C64; 3]> = cols.to_vec();
        for i in 0..dim {
            let mut e = [C64::new(0.0, 0.0); 3];
            e[i] = C64::new(1.0, 0.0);
            candidates.push(e);
        }
        for c in candidates {
            if basis.len() == dim {
                break;
            }
            let mut v = c;
            for _ in 0..2 {
                for b in &basis {
                    let d = hdot(&b[..dim], &v[..dim]);
                    for a in 0..dim {
                        v[a] -= b[a] * d;
                    }
                }
            }
            let nrm = v[..dim].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 1e-8 {
                for x in v.iter_mut() {
                    *x /= nrm;
                }
                basis.push(v);
            }
        }
        let mut m = [[C64::new(0.0, 0.0); 3]; 3];
        for (j, b) in basis.iter().enumerate() {
            for i in 0..dim {
                m[i][j] = b[i];
            }
        }
        Frame { dim, m }
    }

    pub fn with_first(dim: usize, v: &[C64; 3]) -> Frame {
        Frame::from_columns(dim, &[*v])
    }

    pub fn apply(&self, zp: &[C64]) -> [C64; 3] {
        let mut out = [C64::new(0.0, 0.0); 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[i] += self.m[i][j] * zp[j];
            }
        }
        out
    }

    /// Applies the inverse (conjugate transpose).
    pub fn apply_inv(&self, z: &[C64]) -> [C64; 3] {
        let mut out = [C64::new(0.0, 0.0); 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[i] += self.m[j][i].conj() * z[j];
            }
        }
        out
    }

    /// Haar-random unitary from a complex Gaussian matrix.
    pub fn random<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Frame {
        use rand_distr::{Distribution, StandardNormal};
        let mut cols = Vec::new();
        for _ in 0..dim {
            let mut c = [C64::new(0.0, 0.0); 3];
            for x in c.iter_mut().take(dim) {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                *x = C64::new(re, im);
            }
            cols.push(c);
        }
        Frame::from_columns(dim, &cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_and_charts() {
        let p1 = build_manifold(ManifoldKind::P1);
        assert_eq!((p1.n, p1.charts.len()), (1, 2));
        let p2 = build_manifold(ManifoldKind::P2);
        assert_eq!((p2.n, p2.charts.len()), (2, 3));
        let pp = build_manifold(ManifoldKind::P1xP1);
        assert_eq!((pp.n, pp.charts.len()), (2, 4));
        assert!("P3".parse::<ManifoldKind>().is_err());
    }

    #[test]
    fn chart_roundtrip() {
        for kind in [ManifoldKind::P1, ManifoldKind::P2, ManifoldKind::P1xP1] {
            let x = [C64::new(0.3, -0.2), C64::new(-0.1, 0.6)];
            for c in 0..kind.ncharts() {
                let p = Point::from_chart(kind, c, &x);
                let y = p.chart_coords(c);
                for k in 0..kind.dim() {
                    assert!((x[k] - y[k]).norm() < 1e-14);
                }
                assert_eq!(p.chart(), c);
            }
        }
    }

    #[test]
    fn kahler_form_is_positive_and_matches_volume_density() {
        let x = [C64::new(0.7, 0.1), C64::new(-0.4, 0.9)];
        for kind in [ManifoldKind::P1, ManifoldKind::P2, ManifoldKind::P1xP1] {
            let g = kahler_matrix(kind, &x);
            assert!(g.a11 > 0.0);
            if kind.dim() == 2 {
                assert!(g.det() > 0.0);
            }
        }
        let r = 1.0 + x[0].norm_sqr() + x[1].norm_sqr();
        let d = volume_density(ManifoldKind::P2, &x);
        assert!((d - 2.0 / (PI * PI) / r.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn line_embedding_lies_on_line() {
        let l = LinearComponent::line([C64::new(1.0, 0.5), C64::new(-0.3, 0.0), C64::new(0.2, 2.0)]).unwrap();
        let s = [C64::new(0.6, 0.1), C64::new(-0.2, 0.7)];
        let (z, _) = l.embed(&s).unwrap();
        assert!(l.eval(&z).norm() < 1e-14);
        let p = Point::new(ManifoldKind::P2, &z[..3]).unwrap();
        let t = l.parameter_of(&p).unwrap();
        let ratio = t[1] / t[0] - s[1] / s[0];
        assert!(ratio.norm() < 1e-12);
    }

    #[test]
    fn frame_is_unitary() {
        let v = [C64::new(0.3, 0.1), C64::new(0.0, -0.5), C64::new(0.8, 0.0)];
        let f = Frame::with_first(3, &v);
        for i in 0..3 {
            for j in 0..3 {
                let d = hdot(&f.column(i), &f.column(j));
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((d - C64::new(e, 0.0)).norm() < 1e-14);
            }
        }
    }
}
