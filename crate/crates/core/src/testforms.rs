//! Smooth test forms and the fixed dictionary used for all pairings.
//!
//! A test form of codegree `m` has bidegree `(n-m, n-m)`. On curves, and for
//! `m = n`, it is a scalar function `χ`. On surfaces with `m = 1` it is `χ·ω`,
//! whose `dd^c` is `dd^c χ ∧ ω`. All derivatives come from [`crate::jet`].

use crate::error::{Error, Result};
use crate::jet::{gradient_l1, hessian_l1, levi_matrix, CJet, Jet};
use crate::manifold::{Herm, Manifold, ManifoldKind, Point};
use crate::poly::Exp;
use crate::quadrature::{Node, QuadratureRule};
use num_complex::Complex64 as C64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

const BUMP_POWER: i32 = 8;

/// Scalar profile of a test form.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFn {
    Constant(f64),
    /// `(1 - s/r²)^8` for `s < r²`, where `s = 1 - Π |⟨z_f, c_f⟩|²` over factors.
    ///
    /// A piecewise polynomial profile: smooth enough for C² norms and far easier
    /// on quadrature than exponential-type bumps.
    Bump { center: Point, radius: f64 },
    /// Real or imaginary part of `z^a z̄^b / ‖z‖^{2k}` (per factor on products).
    Harmonic { a: Exp, b: Exp, imag: bool },
}

fn factors(kind: ManifoldKind) -> &'static [(usize, usize)] {
    match kind {
        ManifoldKind::P1 => &[(0, 2)],
        ManifoldKind::P2 => &[(0, 3)],
        ManifoldKind::P1xP1 => &[(0, 2), (2, 4)],
    }
}

/// Homogeneous coordinates as jets in the real chart variables.
pub fn homogeneous_jets(kind: ManifoldKind, chart: usize, x: &[C64; 2]) -> [CJet; 4] {
    let one = CJet::constant(C64::new(1.0, 0.0));
    let zero = CJet::constant(C64::new(0.0, 0.0));
    let mut z = [zero; 4];
    match kind {
        ManifoldKind::P1 => {
            z[chart] = one;
            z[1 - chart] = CJet::coordinate(x[0], 0);
        }
        ManifoldKind::P2 => {
            let mut k = 0;
            for (a, slot) in z.iter_mut().enumerate().take(3) {
                if a == chart {
                    *slot = one;
                } else {
                    *slot = CJet::coordinate(x[k], k);
                    k += 1;
                }
            }
        }
        ManifoldKind::P1xP1 => {
            let (i, j) = (chart / 2, chart % 2);
            z[i] = one;
            z[1 - i] = CJet::coordinate(x[0], 0);
            z[2 + j] = one;
            z[2 + (1 - j)] = CJet::coordinate(x[1], 1);
        }
    }
    z
}

/// Entries `(G11, G22, Re G12, Im G12)` of the Kähler matrix as jets.
pub fn kahler_jets(kind: ManifoldKind, x: &[C64; 2]) -> [Jet; 4] {
    let x0 = CJet::coordinate(x[0], 0);
    let x1 = CJet::coordinate(x[1], 1);
    let zero = Jet::constant(0.0);
    match kind {
        ManifoldKind::P1 => {
            let r = x0.norm_sqr().add_const(1.0);
            [(r * r).recip().scale(0.5), zero, zero, zero]
        }
        ManifoldKind::P2 => {
            let (n0, n1) = (x0.norm_sqr(), x1.norm_sqr());
            let r = (n0 + n1).add_const(1.0);
            let ir = r.recip();
            let ir2 = ir * ir;
            let g11 = (ir - n0 * ir2).scale(0.5);
            let g22 = (ir - n1 * ir2).scale(0.5);
            let c = x0.conj() * x1;
            [g11, g22, (c.re * ir2).scale(-0.5), (c.im * ir2).scale(-0.5)]
        }
        ManifoldKind::P1xP1 => {
            let s = std::f64::consts::FRAC_1_SQRT_2 * 0.5;
            let r1 = x0.norm_sqr().add_const(1.0);
            let r2 = x1.norm_sqr().add_const(1.0);
            [(r1 * r1).recip().scale(s), (r2 * r2).recip().scale(s), zero, zero]
        }
    }
}

impl ScalarFn {
    pub fn jet(&self, kind: ManifoldKind, chart: usize, x: &[C64; 2]) -> Jet {
        match self {
            ScalarFn::Constant(c) => Jet::constant(*c),
            ScalarFn::Bump { center, radius } => {
                let z = homogeneous_jets(kind, chart, x);
                let mut prod = Jet::constant(1.0);
                for &(lo, hi) in factors(kind) {
                    let mut ip = CJet::constant(C64::new(0.0, 0.0));
                    let mut nz = Jet::constant(0.0);
                    for a in lo..hi {
                        ip = ip + z[a].scale(center.z[a].conj());
                        nz = nz + z[a].norm_sqr();
                    }
                    prod = prod * ip.norm_sqr() / nz;
                }
                let q = (Jet::constant(1.0) - prod).scale(1.0 / (radius * radius));
                if q.v >= 1.0 {
                    return Jet::constant(0.0);
                }
                (Jet::constant(1.0) - q).powi(BUMP_POWER)
            }
            ScalarFn::Harmonic { a, b, imag } => {
                let z = homogeneous_jets(kind, chart, x);
                let mut num = CJet::constant(C64::new(1.0, 0.0));
                for k in 0..4 {
                    for _ in 0..a[k] {
                        num = num * z[k];
                    }
                    for _ in 0..b[k] {
                        num = num * z[k].conj();
                    }
                }
                let mut den = Jet::constant(1.0);
                for &(lo, hi) in factors(kind) {
                    let deg: u16 = a[lo..hi].iter().sum();
                    let mut nz = Jet::constant(0.0);
                    for zk in z.iter().take(hi).skip(lo) {
                        nz = nz + zk.norm_sqr();
                    }
                    den = den * nz.powi(deg as i32);
                }
                let part = if *imag { num.im } else { num.re };
                part / den
            }
        }
    }

    pub fn value_at(&self, p: &Point) -> f64 {
        let c = p.chart();
        self.jet(p.kind, c, &p.chart_coords(c)).v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    Global,
    /// Contained in the chordal ball of the given radius.
    Ball { center: Point, radius: f64 },
}

/// Value and `∂∂̄` of the scalar profile at a node.
#[derive(Clone, Copy, Debug)]
pub struct FormEval {
    pub chi: f64,
    pub levi: Herm,
}

#[derive(Clone, Debug)]
pub struct TestForm {
    pub name: String,
    /// Dictionary class used to group chart series: `bump`, `polynomial`, `far`, `mass`.
    pub class: String,
    pub kind: ManifoldKind,
    pub codegree: usize,
    pub profile: ScalarFn,
    /// Multiplier applied to the profile.
    pub scale: f64,
    pub c1_norm: f64,
    pub c2_norm: f64,
    pub support: Support,
}

impl TestForm {
    pub fn new(kind: ManifoldKind, codegree: usize, name: &str, class: &str, profile: ScalarFn) -> Result<Self> {
        if codegree == 0 || codegree > kind.dim() {
            return Err(Error::Config(format!("codegree {codegree} invalid on {kind}")));
        }
        let support = match &profile {
            ScalarFn::Bump { center, radius } => {
                Support::Ball { center: *center, radius: *radius }
            }
            _ => Support::Global,
        };
        let mut f = TestForm {
            name: name.to_string(),
            class: class.to_string(),
            kind,
            codegree,
            profile,
            scale: 1.0,
            c1_norm: 0.0,
            c2_norm: 0.0,
            support,
        };
        let (c1, c2) = f.grid_norms(&norm_grid(kind)?);
        f.c1_norm = c1 * NORM_SAFETY;
        f.c2_norm = c2 * NORM_SAFETY;
        Ok(f)
    }

    /// Rescales so that the reported C¹ norm is exactly 1.
    pub fn normalized(mut self) -> Self {
        if self.c1_norm > 0.0 {
            let s = 1.0 / self.c1_norm;
            self.scale *= s;
            self.c1_norm = 1.0;
            self.c2_norm *= s;
        }
        self
    }

    /// Whether the coefficient is `χ·ω` (surface, codegree one) rather than a function.
    pub fn carries_kahler(&self) -> bool {
        self.kind.dim() == 2 && self.codegree == 1
    }

    pub fn jet(&self, chart: usize, x: &[C64; 2]) -> Jet {
        self.profile.jet(self.kind, chart, x).scale(self.scale)
    }

    pub fn eval(&self, nd: &Node) -> FormEval {
        self.eval_chart(nd.chart, &nd.x)
    }

    pub fn eval_chart(&self, chart: usize, x: &[C64; 2]) -> FormEval {
        let j = self.jet(chart, x);
        FormEval { chi: j.v, levi: levi_matrix(&j, self.kind.dim()) }
    }

    pub fn value_at(&self, p: &Point) -> f64 {
        self.profile.value_at(p) * self.scale
    }

    /// Ratio of the top-degree form `dd^c φ` to `ω^n` at a node.
    pub fn ddc_density(&self, m: &Manifold, nd: &Node) -> f64 {
        let e = self.eval(nd);
        m.trace_ratio(&e.levi, &m.kahler(&nd.x))
    }

    /// Whether the support stays at chordal distance at least `r` from a set described by `dist`.
    pub fn support_misses(&self, dist_to_set: impl Fn(&Point) -> f64) -> bool {
        match &self.support {
            Support::Global => false,
            Support::Ball { center, radius } => dist_to_set(center) > *radius * 1.0001 + 1e-12,
        }
    }

    /// Sup over the grid of the C¹ and C² norms of the coefficient functions in the atlas charts.
    pub fn grid_norms(&self, grid: &QuadratureRule) -> (f64, f64) {
        let kind = self.kind;
        let n = kind.dim();
        let kahler = self.carries_kahler();
        grid.fold(
            || (0.0f64, 0.0f64),
            |(c1, c2), nd| {
                let chi = self.jet(nd.chart, &nd.x);
                let coeffs: Vec<Jet> = if kahler {
                    kahler_jets(kind, &nd.x).iter().map(|g| chi * *g).collect()
                } else {
                    vec![chi]
                };
                let mut a = 0.0;
                let mut b = 0.0;
                for c in &coeffs {
                    let base = c.v.abs() + gradient_l1(c, n);
                    a += base;
                    b += base + hessian_l1(c, n);
                }
                *c1 = c1.max(a);
                *c2 = c2.max(b);
            },
            |(a, b), (c, d)| (a.max(c), b.max(d)),
        )
    }
}

/// Inflation applied to grid suprema so reported norms bound values between nodes.
const NORM_SAFETY: f64 = 1.05;

fn norm_grid(kind: ManifoldKind) -> Result<QuadratureRule> {
    QuadratureRule::new(kind, if kind.dim() == 1 { 48 } else { 20 }, &[])
}

/// Second-order central-difference `∂∂̄` for cross-checking the exact evaluator.
pub fn finite_difference_levi(f: &TestForm, chart: usize, x: &[C64; 2], h: f64) -> Herm {
    let n = f.kind.dim();
    let val = |dx: [f64; 4]| {
        let y = [x[0] + C64::new(dx[0], dx[1]), x[1] + C64::new(dx[2], dx[3])];
        f.jet(chart, &y).v
    };
    let mut hess = [[0.0; 4]; 4];
    for i in 0..2 * n {
        for k in 0..2 * n {
            let mut pp = [0.0; 4];
            let mut pm = [0.0; 4];
            let mut mp = [0.0; 4];
            let mut mm = [0.0; 4];
            pp[i] += h;
            pp[k] += h;
            pm[i] += h;
            pm[k] -= h;
            mp[i] -= h;
            mp[k] += h;
            mm[i] -= h;
            mm[k] -= h;
            hess[i][k] = (val(pp) - val(pm) - val(mp) + val(mm)) / (4.0 * h * h);
        }
    }
    let mut j = Jet::constant(0.0);
    j.h = hess;
    levi_matrix(&j, n)
}

fn pt(kind: ManifoldKind, re: &[f64], im: &[f64]) -> Point {
    let c: Vec<C64> = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
    Point::new(kind, &c).expect("dictionary point")
}

type Entry = (String, String, ScalarFn);

fn dictionary_profiles(kind: ManifoldKind) -> Vec<Entry> {
    use ScalarFn::*;
    let bump = |name: &str, class: &str, re: &[f64], im: &[f64], r: f64| {
        (name.to_string(), class.to_string(), Bump { center: pt(kind, re, im), radius: r })
    };
    let harm = |name: &str, a: Exp, b: Exp, imag: bool| {
        (name.to_string(), "polynomial".to_string(), Harmonic { a, b, imag })
    };
    match kind {
        ManifoldKind::P1 => vec![
            bump("bump-e0", "bump", &[1.0, 0.0], &[0.0, 0.0], 0.6),
            bump("bump-e1", "bump", &[0.0, 1.0], &[0.0, 0.0], 0.5),
            bump("bump-1-1", "bump", &[1.0, 1.0], &[0.0, 0.0], 0.7),
            bump("bump-1-i", "bump", &[1.0, 0.0], &[0.0, 1.0], 0.45),
            bump("bump-1-m2", "bump", &[1.0, -2.0], &[0.0, 0.0], 0.55),
            bump("bump-wide", "bump", &[2.0, 1.0], &[0.0, 1.0], 0.95),
            harm("poly-abs-z0", [1, 0, 0, 0], [1, 0, 0, 0], false),
            harm("poly-re-z0z1", [1, 0, 0, 0], [0, 1, 0, 0], false),
            harm("poly-im-z0z1", [1, 0, 0, 0], [0, 1, 0, 0], true),
            harm("poly-re-z0sq-z1sq", [2, 0, 0, 0], [0, 2, 0, 0], false),
            bump("far-1-1", "far", &[1.0, 1.0], &[0.0, 0.0], 0.3),
            bump("far-1-mi", "far", &[1.0, 0.0], &[0.0, -1.0], 0.35),
        ],
        ManifoldKind::P2 => vec![
            bump("bump-e0", "bump", &[1.0, 0.0, 0.0], &[0.0; 3], 0.6),
            bump("bump-e2", "bump", &[0.0, 0.0, 1.0], &[0.0; 3], 0.5),
            bump("bump-e1", "bump", &[0.0, 1.0, 0.0], &[0.0; 3], 0.55),
            bump("bump-1-i-0", "bump", &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 0.6),
            bump("bump-0-1-m1", "bump", &[0.0, 1.0, -1.0], &[0.0; 3], 0.5),
            bump("bump-wide", "bump", &[1.0, 2.0, 0.0], &[0.0, 0.0, 3.0], 0.9),
            harm("poly-abs-z0", [1, 0, 0, 0], [1, 0, 0, 0], false),
            harm("poly-re-z0z1", [1, 0, 0, 0], [0, 1, 0, 0], false),
            harm("poly-im-z1z2", [0, 1, 0, 0], [0, 0, 1, 0], true),
            harm("poly-abs-z0z1", [1, 1, 0, 0], [1, 1, 0, 0], false),
            bump("far-1-1-1", "far", &[1.0, 1.0, 1.0], &[0.0; 3], 0.4),
            bump("far-2-m1-1", "far", &[2.0, -1.0, 1.0], &[0.0; 3], 0.3),
        ],
        ManifoldKind::P1xP1 => vec![
            bump("bump-e0e0", "bump", &[1.0, 0.0, 1.0, 0.0], &[0.0; 4], 0.6),
            bump("bump-e1e1", "bump", &[0.0, 1.0, 0.0, 1.0], &[0.0; 4], 0.55),
            bump("bump-e0e1", "bump", &[1.0, 0.0, 0.0, 1.0], &[0.0; 4], 0.6),
            bump("bump-mixed", "bump", &[1.0, 1.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0], 0.6),
            bump("bump-1-m2", "bump", &[1.0, -2.0, 2.0, 1.0], &[0.0; 4], 0.5),
            bump("bump-wide", "bump", &[2.0, 1.0, 1.0, 3.0], &[0.0, 1.0, 0.0, 0.0], 0.95),
            harm("poly-abs-z0", [1, 0, 0, 0], [1, 0, 0, 0], false),
            harm("poly-abs-w0", [0, 0, 1, 0], [0, 0, 1, 0], false),
            harm("poly-re-z0z1w0w1", [1, 0, 1, 0], [0, 1, 0, 1], false),
            harm("poly-im-z0z1", [1, 0, 0, 0], [0, 1, 0, 0], true),
            bump("far-11-11", "far", &[1.0, 1.0, 1.0, 1.0], &[0.0; 4], 0.45),
            bump("far-1i-1m1", "far", &[1.0, 0.0, 1.0, -1.0], &[0.0, 1.0, 0.0, 0.0], 0.4),
        ],
    }
}

type DictKey = (ManifoldKind, usize);

/// The fixed dictionary of 12 test forms of codegree `m`, each normalized to C¹ norm 1.
///
/// Six bumps at varied centers and radii (including ones centered on coordinate
/// points, where the library's poles sit), four polynomial-coefficient forms, and
/// two small bumps whose supports avoid all coordinate divisors.
pub fn test_form_dictionary(m: &Manifold, codegree: usize) -> Result<Arc<Vec<TestForm>>> {
    if codegree == 0 || codegree > m.n {
        return Err(Error::Config(format!("codegree {codegree} invalid for dimension {}", m.n)));
    }
    static CACHE: OnceLock<Mutex<HashMap<DictKey, Arc<Vec<TestForm>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(d) = cache.lock().expect("dictionary cache").get(&(m.kind, codegree)) {
        return Ok(d.clone());
    }
    let forms = dictionary_profiles(m.kind)
        .into_iter()
        .map(|(name, class, prof)| TestForm::new(m.kind, codegree, &name, &class, prof).map(|f| f.normalized()))
        .collect::<Result<Vec<_>>>()?;
    let d = Arc::new(forms);
    cache.lock().expect("dictionary cache").insert((m.kind, codegree), d.clone());
    Ok(d)
}

/// The unnormalized mass form: `1` on curves and for `m = n`, `ω` for `m = 1` on surfaces.
pub fn mass_form(m: &Manifold, codegree: usize) -> Result<TestForm> {
    TestForm::new(m.kind, codegree, "mass", "mass", ScalarFn::Constant(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::build_manifold;

    #[test]
    fn dictionary_sizes_and_norms() {
        for kind in [ManifoldKind::P1, ManifoldKind::P2, ManifoldKind::P1xP1] {
            let m = build_manifold(kind);
            for cd in 1..=m.n {
                let d = test_form_dictionary(&m, cd).unwrap();
                assert_eq!(d.len(), 12);
                for f in d.iter() {
                    assert!(f.c1_norm <= 1.0 + 1e-12, "{}", f.name);
                    assert!(f.c2_norm >= f.c1_norm);
                }
            }
            assert!(test_form_dictionary(&m, m.n + 1).is_err());
        }
    }

    #[test]
    fn far_forms_avoid_coordinate_divisors() {
        for kind in [ManifoldKind::P1, ManifoldKind::P2, ManifoldKind::P1xP1] {
            let m = build_manifold(kind);
            let d = test_form_dictionary(&m, 1).unwrap();
            for f in d.iter().filter(|f| f.class == "far") {
                let dist = |p: &Point| {
                    let mut best = f64::INFINITY;
                    for i in 0..kind.ncoords() {
                        let l = crate::manifold::LinearComponent::coordinate(kind, i);
                        best = best.min(l.distance(p));
                    }
                    best
                };
                assert!(f.support_misses(dist), "{}", f.name);
            }
        }
    }
}
