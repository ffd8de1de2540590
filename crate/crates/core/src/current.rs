//! Closed (1,1)-currents in decomposed form: divisors plus smooth forms.
//!
//! Every current that appears as a curvature, a Fubini–Study current or a limit
//! target here is `Σ c_i [D_i] + Σ a_j α_j` with `D_i` linear divisors and `α_j`
//! explicit smooth forms. Pairings and wedge products then reduce to smooth
//! quadrature on `X` and on the divisors.

use crate::error::{Error, Result};
use crate::manifold::{
    chart_normalized, chart_tangent, chart_var_index, factor_form, Herm, LinearComponent, Manifold,
    ManifoldKind, Point,
};
use crate::poly::{Exp, Poly, PowerTable};
use crate::quadrature::{Center, QuadratureRule};
use crate::testforms::TestForm;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::sync::Arc;

/// `dd^c ½ log Σ_j |g_j|²` for polynomials `g_j = Σ_i C[i][j] z^{e_i}` without common zeros.
#[derive(Clone, Debug)]
pub struct FsPullback {
    pub kind: ManifoldKind,
    pub exps: Vec<Exp>,
    pub coeffs: DMatrix<C64>,
    /// `coeffs` is square and diagonal (one monomial per polynomial).
    pub diagonal: bool,
    maxdeg: usize,
}

impl FsPullback {
    pub fn new(kind: ManifoldKind, exps: Vec<Exp>, coeffs: DMatrix<C64>) -> FsPullback {
        let diagonal = coeffs.nrows() == coeffs.ncols()
            && (0..coeffs.nrows()).all(|i| (0..coeffs.ncols()).all(|j| i == j || coeffs[(i, j)].norm() == 0.0));
        let maxdeg = exps.iter().flat_map(|e| e.iter()).copied().max().unwrap_or(0) as usize;
        FsPullback { kind, exps, coeffs, diagonal, maxdeg }
    }

    /// From an explicit list of homogeneous polynomials of equal multidegree.
    pub fn from_polys(kind: ManifoldKind, polys: &[Poly]) -> FsPullback {
        let mut exps: Vec<Exp> = polys.iter().flat_map(|p| p.terms.iter().map(|t| t.0)).collect();
        exps.sort();
        exps.dedup();
        let mut c = DMatrix::<C64>::zeros(exps.len(), polys.len());
        for (j, p) in polys.iter().enumerate() {
            for (e, v) in &p.terms {
                let i = exps.binary_search(e).expect("exponent present");
                c[(i, j)] = *v;
            }
        }
        FsPullback::new(kind, exps, c)
    }

    fn values(&self, zc: &[C64; 4], vars: &[usize; 2], n: usize) -> (Vec<C64>, Vec<[C64; 2]>) {
        let pt = PowerTable::new(zc, self.maxdeg);
        let nm = self.exps.len();
        let mut m = Vec::with_capacity(nm);
        let mut dm = Vec::with_capacity(nm);
        for e in &self.exps {
            m.push(pt.mono(e));
            let mut d = [C64::new(0.0, 0.0); 2];
            for (a, &k) in vars.iter().enumerate().take(n) {
                if e[k] > 0 {
                    let mut ee = *e;
                    ee[k] -= 1;
                    d[a] = pt.mono(&ee) * e[k] as f64;
                }
            }
            dm.push(d);
        }
        if self.diagonal {
            for i in 0..nm {
                let c = self.coeffs[(i, i)];
                m[i] *= c;
                dm[i][0] *= c;
                dm[i][1] *= c;
            }
            return (m, dm);
        }
        let np = self.coeffs.ncols();
        let mut g = vec![C64::new(0.0, 0.0); np];
        let mut dg = vec![[C64::new(0.0, 0.0); 2]; np];
        for i in 0..nm {
            if m[i].norm_sqr() == 0.0 && dm[i][0].norm_sqr() == 0.0 && dm[i][1].norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..np {
                let c = self.coeffs[(i, j)];
                g[j] += c * m[i];
                dg[j][0] += c * dm[i][0];
                dg[j][1] += c * dm[i][1];
            }
        }
        (g, dg)
    }

    /// Matrix of the form in chart coordinates at a point.
    pub fn matrix(&self, p: &Point, chart: usize) -> Herm {
        let n = self.kind.dim();
        let zc = chart_normalized(self.kind, &p.z, chart);
        let vars = chart_var_index(self.kind, chart);
        let (g, dg) = self.values(&zc, &vars, n);
        let mut f = 0.0;
        let mut v = [C64::new(0.0, 0.0); 2];
        let mut mm = [[C64::new(0.0, 0.0); 2]; 2];
        for j in 0..g.len() {
            f += g[j].norm_sqr();
            for a in 0..n {
                v[a] += dg[j][a] * g[j].conj();
                for b in 0..n {
                    mm[a][b] += dg[j][a] * dg[j][b].conj();
                }
            }
        }
        let h = |a: usize, b: usize| 0.5 * (mm[a][b] / f - v[a] * v[b].conj() / (f * f));
        if n == 1 {
            Herm::scalar(h(0, 0).re)
        } else {
            Herm { a11: h(0, 0).re, a22: h(1, 1).re, a12: h(0, 1) }
        }
    }

    /// `½ log Σ |g_j(z)|²` at a unit point.
    pub fn potential(&self, p: &Point) -> f64 {
        let pt = PowerTable::new(&p.z, self.maxdeg);
        let m: Vec<C64> = self.exps.iter().map(|e| pt.mono(e)).collect();
        let s: f64 = if self.diagonal {
            m.iter().enumerate().map(|(i, x)| (x * self.coeffs[(i, i)]).norm_sqr()).sum()
        } else {
            (0..self.coeffs.ncols())
                .map(|j| m.iter().enumerate().map(|(i, x)| x * self.coeffs[(i, j)]).sum::<C64>().norm_sqr())
                .sum()
        };
        0.5 * s.ln()
    }

    /// Multidegree of the polynomials.
    pub fn degree(&self) -> Vec<i64> {
        self.exps.first().map(|e| crate::poly::exp_degree(self.kind, e)).unwrap_or_default()
    }
}

#[derive(Clone, Debug)]
pub enum SmoothPart {
    /// The Kähler form `ω`.
    Kahler,
    /// Pullback of the unit-mass Fubini–Study form of factor 0 or 1 of `P1xP1`.
    Factor(usize),
    FsPullback(Arc<FsPullback>),
}

impl SmoothPart {
    pub fn matrix(&self, m: &Manifold, p: &Point, chart: usize, x: &[C64; 2]) -> Herm {
        match self {
            SmoothPart::Kahler => m.kahler(x),
            SmoothPart::Factor(f) => factor_form(*f, x),
            SmoothPart::FsPullback(fs) => fs.matrix(p, chart),
        }
    }
}

/// Cohomology class form of a linear divisor (the smooth form it is cohomologous to).
pub fn divisor_class(d: &LinearComponent) -> SmoothPart {
    match d {
        LinearComponent::FiberZ(_) => SmoothPart::Factor(0),
        LinearComponent::FiberW(_) => SmoothPart::Factor(1),
        _ => SmoothPart::Kahler,
    }
}

/// Class form of a multidegree: `d·ω` on `P^n`, `d1 F1 + d2 F2` on `P1xP1`.
pub fn degree_class(kind: ManifoldKind, deg: &[f64]) -> Vec<(f64, SmoothPart)> {
    match kind {
        ManifoldKind::P1xP1 => vec![(deg[0], SmoothPart::Factor(0)), (deg[1], SmoothPart::Factor(1))],
        _ => vec![(deg[0], SmoothPart::Kahler)],
    }
}

/// `Σ c_i [D_i] + Σ a_j α_j`.
#[derive(Clone, Debug)]
pub struct Current11 {
    pub kind: ManifoldKind,
    pub divisors: Vec<(LinearComponent, f64)>,
    pub smooth: Vec<(f64, SmoothPart)>,
}

impl Current11 {
    pub fn zero(kind: ManifoldKind) -> Current11 {
        Current11 { kind, divisors: Vec::new(), smooth: Vec::new() }
    }

    pub fn smooth(kind: ManifoldKind, parts: Vec<(f64, SmoothPart)>) -> Current11 {
        Current11 { kind, divisors: Vec::new(), smooth: parts }
    }

    pub fn scaled(&self, c: f64) -> Current11 {
        Current11 {
            kind: self.kind,
            divisors: self.divisors.iter().map(|(d, a)| (*d, a * c)).collect(),
            smooth: self.smooth.iter().map(|(a, s)| (a * c, s.clone())).collect(),
        }
    }

    /// Sum, merging coefficients of identical divisors.
    pub fn plus(&self, o: &Current11) -> Current11 {
        let mut out = self.clone();
        for (d, c) in &o.divisors {
            out.add_divisor(*d, *c);
        }
        out.smooth.extend(o.smooth.iter().cloned());
        out
    }

    pub fn add_divisor(&mut self, d: LinearComponent, c: f64) {
        match self.divisors.iter_mut().find(|(e, _)| e.same_as(&d)) {
            Some(slot) => slot.1 += c,
            None => self.divisors.push((d, c)),
        }
    }

    pub fn smooth_matrix(&self, m: &Manifold, p: &Point, chart: usize, x: &[C64; 2]) -> Herm {
        let mut h = Herm::ZERO;
        for (a, s) in &self.smooth {
            if *a != 0.0 {
                h.axpy(*a, &s.matrix(m, p, chart, x));
            }
        }
        h
    }

    pub fn divisor_lines(&self) -> Vec<LinearComponent> {
        self.divisors.iter().map(|d| d.0).collect()
    }

    /// `⟨T, β⟩` for a field `β` given per chart point: a function on curves, a
    /// (1,1)-form matrix on surfaces. Infinite field values are treated as an
    /// integrable singularity and dropped; NaN is an error.
    ///
    /// `singular` lists divisors along which `β` may be singular; divisor integrals
    /// are refined at their intersections with them.
    pub fn pair_field<F>(&self, m: &Manifold, rule: &QuadratureRule, singular: &[LinearComponent], beta: F) -> Result<f64>
    where
        F: Fn(&Point, usize, &[C64; 2]) -> Herm + Sync,
    {
        let mut total = 0.0;
        for (d, c) in &self.divisors {
            if *c == 0.0 {
                continue;
            }
            total += c * divisor_integral(m, d, rule.resolution, singular, &beta)?;
        }
        if self.smooth.iter().any(|(a, _)| *a != 0.0) {
            let (s, bad) = rule.fold(
                || (0.0, 0usize),
                |(s, bad), nd| {
                    let b = beta(&nd.point, nd.chart, &nd.x);
                    let g = m.kahler(&nd.x);
                    let a = self.smooth_matrix(m, &nd.point, nd.chart, &nd.x);
                    let v = if m.n == 1 { b.a11 * a.a11 / g.a11 } else { m.wedge_ratio(&a, &b, &g) };
                    if v.is_finite() {
                        *s += nd.weight * v;
                    } else if v.is_nan() {
                        *bad += 1;
                    }
                },
                |(a, b), (c, d)| (a + c, b + d),
            );
            if bad > 0 {
                return Err(Error::NumericalDomain(format!("{bad} NaN values in current pairing")));
            }
            total += s;
        }
        Ok(total)
    }

    /// `⟨T, φ⟩` for a test form of codegree one.
    pub fn pair(&self, m: &Manifold, rule: &QuadratureRule, phi: &TestForm) -> Result<f64> {
        check_codegree(m, phi, 1)?;
        if m.n == 1 {
            self.pair_field(m, rule, &[], |_, c, x| Herm::scalar(phi.eval_chart(c, x).chi))
        } else {
            self.pair_field(m, rule, &[], |_, c, x| m.kahler(x).scale(phi.eval_chart(c, x).chi))
        }
    }

    /// `⟨T ∧ T', χ⟩` on a surface.
    pub fn wedge_pair(&self, o: &Current11, m: &Manifold, rule: &QuadratureRule, chi: &TestForm) -> Result<f64> {
        if m.n != 2 {
            return Err(Error::Precondition("wedge products need a surface".into()));
        }
        check_codegree(m, chi, 2)?;
        let mut total = 0.0;
        for (d, c) in &self.divisors {
            for (e, c2) in &o.divisors {
                if d.same_as(e) {
                    return Err(Error::GeneralPosition(format!("common divisor component {d:?}")));
                }
                if let Some(p) = d.intersect(e) {
                    total += c * c2 * chi.value_at(&p);
                }
            }
        }
        // T ∧ smooth(T') and divisors(T') ∧ smooth(T)
        let smooth_o = Current11::smooth(self.kind, o.smooth.clone());
        let smooth_s = Current11::smooth(self.kind, self.smooth.clone());
        total += self.pair_field(m, rule, &[], |p, c, x| smooth_o.smooth_matrix(m, p, c, x).scale(chi.eval_chart(c, x).chi))?;
        let divs_o = Current11 { kind: self.kind, divisors: o.divisors.clone(), smooth: Vec::new() };
        total += divs_o.pair_field(m, rule, &[], |p, c, x| smooth_s.smooth_matrix(m, p, c, x).scale(chi.eval_chart(c, x).chi))?;
        Ok(total)
    }

    /// Refinement centers for quadrature against this current.
    pub fn centers(&self) -> Vec<Center> {
        self.divisors.iter().map(|(d, _)| Center::Divisor(*d)).collect()
    }
}

pub(crate) fn check_codegree(m: &Manifold, phi: &TestForm, expect: usize) -> Result<()> {
    if phi.kind != m.kind || phi.codegree != expect {
        return Err(Error::Precondition(format!(
            "test form {} has codegree {} on {}, expected codegree {expect} on {}",
            phi.name, phi.codegree, phi.kind, m.kind
        )));
    }
    Ok(())
}

/// Quadrature rule on the parameter line of a curve divisor, refined where it meets `singular`.
pub fn divisor_rule(d: &LinearComponent, res: usize, singular: &[LinearComponent]) -> Result<QuadratureRule> {
    let mut centers = Vec::new();
    for s in singular {
        if s.same_as(d) {
            continue;
        }
        if let Some(p) = d.intersect(s) {
            if let Some(t) = d.parameter_of(&p) {
                let q = Point::new(ManifoldKind::P1, &t)?;
                if !centers.iter().any(|c| matches!(c, Center::Point(o) if o.chordal(&q) < 1e-12)) {
                    centers.push(Center::Point(q));
                }
            }
        }
    }
    QuadratureRule::new(ManifoldKind::P1, res.max(16), &centers)
}

/// `∫_D β` for a curve divisor on a surface, or `β(point)` on a curve.
pub fn divisor_integral<F>(m: &Manifold, d: &LinearComponent, res: usize, singular: &[LinearComponent], beta: &F) -> Result<f64>
where
    F: Fn(&Point, usize, &[C64; 2]) -> Herm + Sync,
{
    if let Some(p) = d.as_point() {
        let c = p.chart();
        return Ok(beta(&p, c, &p.chart_coords(c)).a11);
    }
    let rule = divisor_rule(d, res, singular)?;
    let kind = m.kind;
    let (s, bad) = rule.fold(
        || (0.0, 0usize),
        |(s, bad), nd| {
            let param = [nd.point.z[0], nd.point.z[1]];
            let (z, dz) = d.embed(&param).expect("curve divisor");
            let p = Point { kind, z };
            let c = p.chart();
            let x = p.chart_coords(c);
            let dx = chart_tangent(kind, &z, &dz, c);
            let b = beta(&p, c, &x);
            let gl = 0.5 / (1.0 + nd.x[0].norm_sqr()).powi(2);
            let v = b.quad(&dx, 2) / gl;
            if v.is_finite() {
                *s += nd.weight * v;
            } else if v.is_nan() {
                *bad += 1;
            }
        },
        |(a, b), (c, d)| (a + c, b + d),
    );
    if bad > 0 {
        return Err(Error::NumericalDomain(format!("{bad} NaN values on divisor {d:?}")));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::build_manifold;
    use crate::testforms::test_form_dictionary;

    #[test]
    fn kahler_restricts_to_unit_mass_on_lines() {
        let m = build_manifold(ManifoldKind::P2);
        let l = LinearComponent::line([C64::new(1.0, 0.2), C64::new(0.0, -1.0), C64::new(0.5, 0.0)]).unwrap();
        let v = divisor_integral(&m, &l, 32, &[], &|_: &Point, _, x: &[C64; 2]| m.kahler(x)).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn fiber_mass_matches_product_normalization() {
        let m = build_manifold(ManifoldKind::P1xP1);
        let l = LinearComponent::coordinate(ManifoldKind::P1xP1, 0);
        let v = divisor_integral(&m, &l, 32, &[], &|_: &Point, _, x: &[C64; 2]| m.kahler(x)).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12, "{v}");
    }

    #[test]
    fn fs_pullback_of_scaled_monomials_is_multiple_of_kahler() {
        // ½ log Σ binom |z^e|² = k · ½ log ‖z‖², so the form is k ω.
        let kind = ManifoldKind::P2;
        let m = build_manifold(kind);
        let exps = crate::poly::monomials(kind, &[3]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            exps.len(),
            exps.iter().map(|e| C64::new(crate::poly::monomial_scale(kind, e), 0.0)),
        ));
        let fs = FsPullback::new(kind, exps, d);
        let p = Point::new(kind, &[C64::new(0.3, 0.1), C64::new(1.0, 0.0), C64::new(-0.2, 0.5)]).unwrap();
        let c = p.chart();
        let x = p.chart_coords(c);
        let a = fs.matrix(&p, c);
        let g = m.kahler(&x).scale(3.0);
        assert!((a.a11 - g.a11).abs() < 1e-13 && (a.a22 - g.a22).abs() < 1e-13 && (a.a12 - g.a12).norm() < 1e-13);
    }

    #[test]
    fn point_current_pairs_by_evaluation() {
        let m = build_manifold(ManifoldKind::P1);
        let rule = QuadratureRule::new(ManifoldKind::P1, 32, &[]).unwrap();
        let phi = &test_form_dictionary(&m, 1).unwrap()[1];
        let pole = LinearComponent::coordinate(ManifoldKind::P1, 0);
        let t = Current11 { kind: m.kind, divisors: vec![(pole, 0.5)], smooth: vec![(0.5, SmoothPart::Kahler)] };
        let v = t.pair(&m, &rule, phi).unwrap();
        let direct = 0.5 * phi.value_at(&pole.as_point().unwrap())
            + 0.5 * rule.nodes().iter().map(|n| n.weight * phi.eval(n).chi).sum::<f64>();
        assert!((v - direct).abs() < 1e-13);
    }
}
