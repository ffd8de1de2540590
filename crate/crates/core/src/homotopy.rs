//! Projective homotopy continuation for two equations on a surface.
//!
//! The target system is deformed from a product start system in random
//! coordinates, `H = γ(1-t)S + tT`. Paths are tracked in homogeneous coordinates
//! with one affine patch per projective factor, re-centered at every step.

use crate::error::{Error, Result};
use crate::manifold::{Frame, ManifoldKind};
use crate::poly::Poly;
use crate::quadrature::is_serial;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

type V4 = [C64; 4];
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `x1^d - c x0^d` in two linear forms; the empty product when `d = 0`.
#[derive(Clone, Copy, Debug)]
struct PowerPair {
    l0: V4,
    l1: V4,
    d: u32,
    c: C64,
}

fn dot(l: &V4, z: &V4) -> C64 {
    l.iter().zip(z).map(|(a, b)| a * b).sum()
}

impl PowerPair {
    fn eval(&self, z: &V4) -> (C64, V4) {
        if self.d == 0 {
            return (C64::new(1.0, 0.0), [ZERO; 4]);
        }
        let (x0, x1) = (dot(&self.l0, z), dot(&self.l1, z));
        let d = self.d as i32;
        let v = x1.powi(d) - self.c * x0.powi(d);
        let (a, b) = (x1.powi(d - 1) * d as f64, self.c * x0.powi(d - 1) * d as f64);
        let mut g = [ZERO; 4];
        for k in 0..4 {
            g[k] = a * self.l1[k] - b * self.l0[k];
        }
        (v, g)
    }

    /// Values of `x1 / x0` on the zero set.
    fn ratios(&self) -> Vec<C64> {
        let r = self.c.powf(1.0 / self.d as f64);
        (0..self.d).map(|k| r * C64::from_polar(1.0, 2.0 * PI * k as f64 / self.d as f64)).collect()
    }
}

fn product(a: (C64, V4), b: (C64, V4)) -> (C64, V4) {
    let mut g = [ZERO; 4];
    for k in 0..4 {
        g[k] = a.0 * b.1[k] + b.0 * a.1[k];
    }
    (a.0 * b.0, g)
}

struct System {
    kind: ManifoldKind,
    target: [Poly; 2],
    start: [[PowerPair; 2]; 2],
    gamma: C64,
}

impl System {
    fn n(&self) -> usize {
        self.kind.ncoords()
    }

    fn start_eval(&self, z: &V4) -> [(C64, V4); 2] {
        let f = |i: usize| product(self.start[i][0].eval(z), self.start[i][1].eval(z));
        [f(0), f(1)]
    }

    fn target_eval(&self, z: &V4) -> [(C64, V4); 2] {
        [self.target[0].eval_grad(z), self.target[1].eval_grad(z)]
    }

    /// Rows of `H`, `∂H/∂z` and `∂H/∂t` at `(z, t)`.
    fn eval(&self, z: &V4, t: f64) -> ([C64; 2], [V4; 2], [C64; 2]) {
        let (s, f) = (self.start_eval(z), self.target_eval(z));
        let a = self.gamma * (1.0 - t);
        let mut h = [ZERO; 2];
        let mut j = [[ZERO; 4]; 2];
        let mut ht = [ZERO; 2];
        for i in 0..2 {
            h[i] = a * s[i].0 + t * f[i].0;
            ht[i] = f[i].0 - self.gamma * s[i].0;
            for k in 0..4 {
                j[i][k] = a * s[i].1[k] + t * f[i].1[k];
            }
        }
        (h, j, ht)
    }

    /// Patch rows `conj(z_F)` per projective factor, so the patch equations read `⟨z_F, ·⟩ = 1`.
    fn patches(&self, z: &V4) -> Vec<V4> {
        match self.kind {
            ManifoldKind::P1xP1 => vec![[z[0].conj(), z[1].conj(), ZERO, ZERO], [ZERO, ZERO, z[2].conj(), z[3].conj()]],
            _ => vec![[z[0].conj(), z[1].conj(), z[2].conj(), ZERO]],
        }
    }

    fn normalize(&self, z: &mut V4) {
        let unit = |s: &mut [C64]| {
            let n = s.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            s.iter_mut().for_each(|c| *c /= n);
        };
        match self.kind {
            ManifoldKind::P1xP1 => {
                unit(&mut z[0..2]);
                unit(&mut z[2..4]);
            }
            _ => unit(&mut z[0..3]),
        }
    }

    fn jacobian(&self, j: &[V4; 2], patches: &[V4]) -> DMatrix<C64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |r, c| if r < 2 { j[r][c] } else { patches[r - 2][c] })
    }

    /// Tangent `dz/dt` with the patch held fixed.
    fn tangent(&self, z: &V4, t: f64, patches: &[V4]) -> Option<V4> {
        let (_, j, ht) = self.eval(z, t);
        let n = self.n();
        let rhs = DVector::from_fn(n, |r, _| if r < 2 { -ht[r] } else { ZERO });
        let sol = self.jacobian(&j, patches).lu().solve(&rhs)?;
        let mut out = [ZERO; 4];
        for k in 0..n {
            out[k] = sol[k];
        }
        Some(out)
    }

    /// One Newton step at fixed `t`; returns the step norm.
    fn newton(&self, z: &mut V4, t: f64, patches: &[V4]) -> Option<f64> {
        let (h, j, _) = self.eval(z, t);
        let n = self.n();
        let rhs = DVector::from_fn(n, |r, _| if r < 2 { -h[r] } else { C64::new(1.0, 0.0) - dot(&patches[r - 2], z) });
        let d = self.jacobian(&j, patches).lu().solve(&rhs)?;
        let mut nrm = 0.0;
        for k in 0..n {
            z[k] += d[k];
            nrm += d[k].norm_sqr();
        }
        nrm.is_finite().then_some(nrm.sqrt())
    }

    fn corrector(&self, z: &mut V4, t: f64, patches: &[V4]) -> bool {
        let mut prev = f64::INFINITY;
        for _ in 0..4 {
            let Some(d) = self.newton(z, t, patches) else { return false };
            if d > 0.5 * prev || d > 0.1 {
                return false;
            }
            if d < 1e-10 {
                return true;
            }
            prev = d;
        }
        prev < 1e-8
    }

    fn track(&self, mut z: V4, hmax: f64) -> Option<V4> {
        let mut t = 0.0;
        let mut h = hmax.min(0.01);
        let mut streak = 0;
        let axpy = |z: &V4, a: f64, v: &V4| {
            let mut o = *z;
            for k in 0..4 {
                o[k] += a * v[k];
            }
            o
        };
        while t < 1.0 {
            h = h.min(1.0 - t);
            self.normalize(&mut z);
            let patches = self.patches(&z);
            let step = || -> Option<V4> {
                let k1 = self.tangent(&z, t, &patches)?;
                let k2 = self.tangent(&axpy(&z, 0.5 * h, &k1), t + 0.5 * h, &patches)?;
                let k3 = self.tangent(&axpy(&z, 0.5 * h, &k2), t + 0.5 * h, &patches)?;
                let k4 = self.tangent(&axpy(&z, h, &k3), t + h, &patches)?;
                let mut zp = z;
                for k in 0..4 {
                    zp[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
                }
                let mut zc = zp;
                self.corrector(&mut zc, t + h, &patches).then_some(zc)
            };
            match step() {
                Some(zn) => {
                    z = zn;
                    t = if 1.0 - t - h < 1e-15 { 1.0 } else { t + h };
                    streak += 1;
                    if streak >= 3 {
                        h = (2.0 * h).min(hmax);
                        streak = 0;
                    }
                }
                None => {
                    h *= 0.5;
                    streak = 0;
                    if h < 1e-13 {
                        return None;
                    }
                }
            }
        }
        for _ in 0..3 {
            self.normalize(&mut z);
            let patches = self.patches(&z);
            let d = self.newton(&mut z, 1.0, &patches)?;
            if d < 1e-15 {
                break;
            }
        }
        self.normalize(&mut z);
        Some(z)
    }
}

fn unitary_rows<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<V4> {
    let f = Frame::random(dim, rng);
    (0..dim)
        .map(|r| {
            let mut row = [ZERO; 4];
            for c in 0..dim {
                row[c] = f.m[r][c];
            }
            row
        })
        .collect()
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)
}

/// Solves `x0 = 1, x1 = r` in the coordinates given by `rows` (a unitary block at `offset`).
fn back_substitute(rows: &[V4], xs: &[C64], offset: usize, z: &mut V4) {
    // rows are unitary, so z = rowsᴴ x on the block
    for (r, x) in rows.iter().zip(xs) {
        for k in 0..rows.len() {
            z[offset + k] += r[offset + k].conj() * x;
        }
    }
}

/// Common zeros of `f` and `g` on a surface, one per homotopy path.
///
/// Returns unit homogeneous vectors. Fails with a root-finding error when a path
/// cannot be completed or the endpoints do not separate into the Bézout count.
pub fn solve<R: Rng + ?Sized>(kind: ManifoldKind, f: &Poly, g: &Poly, rng: &mut R) -> Result<Vec<V4>> {
    let (df, dg) = (f.degree()?, g.degree()?);
    let nf = |p: &Poly| p.scale(C64::new(1.0 / p.bombieri_norm(), 0.0));
    let target = [nf(f), nf(g)];
    let gamma = random_phase(rng);
    let (start, starts) = match kind {
        ManifoldKind::P2 => {
            let l = unitary_rows(3, rng);
            let s1 = PowerPair { l0: l[0], l1: l[1], d: df[0] as u32, c: random_phase(rng) };
            let s2 = PowerPair { l0: l[0], l1: l[2], d: dg[0] as u32, c: random_phase(rng) };
            let one = PowerPair { l0: l[0], l1: l[0], d: 0, c: ZERO };
            let mut pts = Vec::new();
            for r1 in s1.ratios() {
                for r2 in s2.ratios() {
                    let mut z = [ZERO; 4];
                    back_substitute(&l, &[C64::new(1.0, 0.0), r1, r2], 0, &mut z);
                    pts.push(z);
                }
            }
            ([[s1, one], [s2, one]], pts)
        }
        ManifoldKind::P1xP1 => {
            let shift = |r: V4| [ZERO, ZERO, r[0], r[1]];
            let lz = unitary_rows(2, rng);
            let lw: Vec<V4> = unitary_rows(2, rng).into_iter().map(shift).collect();
            let pz = |d: i64, rng: &mut R| PowerPair { l0: lz[0], l1: lz[1], d: d as u32, c: random_phase(rng) };
            let pw = |d: i64, rng: &mut R| PowerPair { l0: lw[0], l1: lw[1], d: d as u32, c: random_phase(rng) };
            let (a1, a2, b1, b2) = (pz(df[0], rng), pw(df[1], rng), pz(dg[0], rng), pw(dg[1], rng));
            let mut pts = Vec::new();
            let one = C64::new(1.0, 0.0);
            let mut push = |rz: C64, rw: C64| {
                let mut z = [ZERO; 4];
                back_substitute(&lz, &[one, rz], 0, &mut z);
                back_substitute(&lw, &[one, rw], 2, &mut z);
                pts.push(z);
            };
            if a1.d > 0 && b2.d > 0 {
                for rz in a1.ratios() {
                    for rw in b2.ratios() {
                        push(rz, rw);
                    }
                }
            }
            if a2.d > 0 && b1.d > 0 {
                for rw in a2.ratios() {
                    for rz in b1.ratios() {
                        push(rz, rw);
                    }
                }
            }
            ([[a1, a2], [b1, b2]], pts)
        }
        ManifoldKind::P1 => return Err(Error::Precondition("two equations need a surface".into())),
    };
    let sys = System { kind, target, start, gamma };
    let run = |idx: &[usize], hmax: f64| -> Vec<Option<V4>> {
        let go = |&i: &usize| sys.track(starts[i], hmax);
        if is_serial() {
            idx.iter().map(go).collect()
        } else {
            idx.par_iter().map(go).collect()
        }
    };
    let all: Vec<usize> = (0..starts.len()).collect();
    let mut ends = run(&all, 0.05);
    for hmax in [0.01, 0.002] {
        let redo = suspicious(&sys, &ends);
        if redo.is_empty() {
            break;
        }
        for (i, z) in redo.iter().zip(run(&redo, hmax)) {
            ends[*i] = z;
        }
    }
    let bad = suspicious(&sys, &ends);
    if !bad.is_empty() {
        return Err(Error::RootFinding(format!("{} of {} homotopy paths failed or collided", bad.len(), ends.len())));
    }
    Ok(ends.into_iter().map(|z| z.expect("checked")).collect())
}

fn chordal(kind: ManifoldKind, a: &V4, b: &V4) -> f64 {
    let s = |x: &[C64], y: &[C64]| {
        let ip: C64 = x.iter().zip(y).map(|(u, v)| u.conj() * v).sum();
        (1.0 - ip.norm_sqr()).max(0.0)
    };
    match kind {
        ManifoldKind::P1xP1 => (s(&a[0..2], &b[0..2]) + s(&a[2..4], &b[2..4])).sqrt(),
        _ => s(&a[0..3], &b[0..3]).sqrt(),
    }
}

/// Failed paths, endpoints that are not zeros, and endpoints shared by several paths.
fn suspicious(sys: &System, ends: &[Option<V4>]) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, z) in ends.iter().enumerate() {
        let Some(z) = z else {
            out.push(i);
            continue;
        };
        let f = sys.target_eval(z);
        let collide = ends.iter().enumerate().any(|(j, w)| j != i && w.is_some_and(|w| chordal(sys.kind, z, &w) < 1e-6));
        if collide || f[0].0.norm() > 1e-9 || f[1].0.norm() > 1e-9 {
            out.push(i);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_poly<R: Rng>(kind: ManifoldKind, deg: &[i64], rng: &mut R) -> Poly {
        use rand_distr::{Distribution, StandardNormal};
        let terms = crate::poly::monomials(kind, deg)
            .into_iter()
            .map(|e| {
                let (a, b): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
                (e, C64::new(a, b) * crate::poly::monomial_scale(kind, &e))
            })
            .collect();
        Poly::new(kind, terms)
    }

    #[test]
    fn finds_all_zeros_of_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (kind, a, b, n) in [
            (ManifoldKind::P2, vec![4], vec![5], 20),
            (ManifoldKind::P2, vec![12], vec![12], 144),
            (ManifoldKind::P1xP1, vec![2, 3], vec![4, 1], 14),
        ] {
            let (f, g) = (random_poly(kind, &a, &mut rng), random_poly(kind, &b, &mut rng));
            let zs = solve(kind, &f, &g, &mut rng).unwrap();
            assert_eq!(zs.len(), n);
            for z in &zs {
                assert!(f.eval(z).norm() < 1e-8 * f.bombieri_norm());
                assert!(g.eval(z).norm() < 1e-8 * g.bombieri_norm());
            }
        }
    }
}
