//! Spaces of `L²` holomorphic sections of `L^p ⊗ K_X` as polynomial spaces.
//!
//! Sections of `O(k)` are homogeneous polynomials `F` of degree `k`, with pointwise
//! norm `|F(z)|² e^{-2pψ(z)}` at unit homogeneous `z`. The metric on `K_X` is the
//! Fubini–Study one, so the same formula holds with `k = p·deg L + deg K`. With
//! `adjoint = false` the twist by `K_X` is dropped.
//!
//! Integrability along a pole `ℓ` with coefficient `c` forces vanishing order
//! `a > pc - 1` along `ℓ`, so every space is `B · (all polynomials of the residual
//! degree)` with the base prefactor `B = Π ℓ_i^{a_i}`.

use crate::bundle::{LineBundle, MetricWeight};
use crate::error::{Error, Result};
use crate::manifold::{LinearComponent, ManifoldKind, Point};
use crate::poly::{monomial_scale, monomials, Exp, Poly, PowerTable};
use crate::quadrature::{Grading, QuadratureRule};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::sync::Arc;

/// Largest accepted condition number of the Jacobi-scaled Gram matrix.
pub const CONDITION_CAP: f64 = 1e12;

/// All monomials of the effective multidegree of `L^p` or `L^p ⊗ K_X`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialBasis {
    pub bundle: LineBundle,
    pub p: i64,
    pub adjoint: bool,
    pub degree: Vec<i64>,
    pub exponents: Vec<Exp>,
}

/// `dim H⁰(X, O(deg))`.
pub fn closed_form_dimension(kind: ManifoldKind, deg: &[i64]) -> usize {
    if deg.iter().any(|&d| d < 0) {
        return 0;
    }
    match kind {
        ManifoldKind::P1 => deg[0] as usize + 1,
        ManifoldKind::P2 => ((deg[0] + 1) * (deg[0] + 2) / 2) as usize,
        ManifoldKind::P1xP1 => ((deg[0] + 1) * (deg[1] + 1)) as usize,
    }
}

pub fn space_basis(bundle: &LineBundle, p: i64, adjoint: bool) -> Result<MonomialBasis> {
    if p < 1 {
        return Err(Error::Config(format!("tensor power must be positive, got {p}")));
    }
    let degree = bundle.twist(p, adjoint);
    if degree.iter().any(|&d| d < 0) {
        return Err(Error::EmptySpace(format!("effective degree {degree:?} at p = {p}")));
    }
    let exponents = monomials(bundle.kind, &degree);
    Ok(MonomialBasis { bundle: bundle.clone(), p, adjoint, degree, exponents })
}

pub fn adjoint_space_basis(bundle: &LineBundle, p: i64) -> Result<MonomialBasis> {
    space_basis(bundle, p, true)
}

/// Vanishing order forced along a pole where the weight `e^{-2pψ}` behaves like `|ℓ|^{-2pc}`.
pub fn minimal_vanishing(pc: f64) -> u32 {
    let r = pc.round();
    let a = if (pc - r).abs() < 1e-9 { r } else { pc.floor() };
    a.max(0.0) as u32
}

/// A pole of the weight with its forced vanishing order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoleOrder {
    pub component: LinearComponent,
    /// `p · c` for the pole coefficient `c`.
    pub weight: f64,
    pub order: u32,
}

impl PoleOrder {
    /// Exponent `a - pc + 1 > 0` of `|ℓ|²` in the local norm integral.
    pub fn gap(&self) -> f64 {
        self.order as f64 - self.weight + 1.0
    }
}

pub fn pole_orders(metric: &MetricWeight, p: i64) -> Vec<PoleOrder> {
    metric
        .poles
        .iter()
        .map(|(l, c)| {
            let w = p as f64 * c;
            PoleOrder { component: *l, weight: w, order: minimal_vanishing(w) }
        })
        .collect()
}

/// Result of the integrability filter.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtered {
    pub poles: Vec<PoleOrder>,
    pub residual_degree: Vec<i64>,
    pub exponents: Vec<Exp>,
    /// Which monomials of the full basis survive; present when all poles are coordinate divisors.
    pub mask: Option<Vec<bool>>,
}

fn coordinate_index(l: &LinearComponent) -> Option<usize> {
    let c = l.form_coeffs();
    let nz: Vec<usize> = (0..4).filter(|&i| c[i].norm() > 0.0).collect();
    (nz.len() == 1).then(|| nz[0])
}

pub fn integrability_filter(basis: &MonomialBasis, metric: &MetricWeight) -> Result<Filtered> {
    let poles = pole_orders(metric, basis.p);
    let mut residual = basis.degree.clone();
    for po in &poles {
        for (r, d) in residual.iter_mut().zip(po.component.degree()) {
            *r -= po.order as i64 * d;
        }
    }
    if residual.iter().any(|&d| d < 0) {
        return Err(Error::EmptySpace(format!(
            "no integrable sections: vanishing along the poles exceeds degree {:?} at p = {}",
            basis.degree, basis.p
        )));
    }
    let exponents = monomials(basis.bundle.kind, &residual);
    let idx: Option<Vec<(usize, u32)>> = poles.iter().map(|po| coordinate_index(&po.component).map(|i| (i, po.order))).collect();
    let mask = idx.map(|idx| {
        basis.exponents.iter().map(|e| idx.iter().all(|&(i, a)| e[i] as u32 >= a)).collect::<Vec<bool>>()
    });
    Ok(Filtered { poles, residual_degree: residual, exponents, mask })
}

/// Whether a full-basis monomial has finite norm, decided by the radial exponent test
/// along coordinate poles: `2·order + 1 - 2·weight > -1`.
pub fn monomial_is_integrable(e: &Exp, poles: &[PoleOrder]) -> Option<bool> {
    poles.iter().try_fold(true, |ok, po| {
        coordinate_index(&po.component).map(|i| ok && 2.0 * e[i] as f64 + 1.0 - 2.0 * po.weight > -1.0)
    })
}

/// The `L²` space with its Gram matrix and, once completed, an orthonormal frame.
#[derive(Clone, Debug)]
pub struct SectionSpace {
    pub basis: MonomialBasis,
    pub metric: Arc<MetricWeight>,
    pub filtered: Filtered,
    /// `√multinomial` scale of each residual monomial.
    pub scales: Vec<f64>,
    /// `G_ij = ∫ conj(S_i) S_j e^{-2pψ} ω^n` for `S_i = B · scale_i · z^{e_i}`.
    pub gram: DMatrix<C64>,
    /// `T` with `Tᴴ G T = I`; orthonormal sections are `σ_k = Σ_i T_ik S_i`.
    pub transform: Option<DMatrix<C64>>,
    pub diagonal: bool,
    pub condition: f64,
    maxdeg: usize,
}

/// Quadrature rule for Gram assembly: graded at the poles deeply enough that the
/// power singularity `|ℓ|^{2(a - pc)}` is resolved to double precision.
pub fn gram_rule(metric: &MetricWeight, p: i64, resolution: usize) -> Result<QuadratureRule> {
    let gap = pole_orders(metric, p).iter().map(|po| po.gap()).fold(1.0f64, f64::min);
    let ratio = 0.2f64;
    let depth = ((1e-16f64).ln() / (gap * ratio.ln())).ceil().clamp(16.0, 400.0) as usize;
    QuadratureRule::with_grading(metric.kind(), resolution, &metric.centers(), Grading { depth, ratio })
}

/// Assembles the Gram matrix. Torus-invariant metrics on a standard-frame rule give a
/// diagonal matrix, computed on the torus-reduced rule; `force_full` disables that.
pub fn gram_matrix(basis: &MonomialBasis, metric: &Arc<MetricWeight>, rule: &QuadratureRule, force_full: bool) -> Result<SectionSpace> {
    if basis.bundle != metric.bundle {
        return Err(Error::Config("metric and basis live on different bundles".into()));
    }
    let filtered = integrability_filter(basis, metric)?;
    let kind = basis.bundle.kind;
    let scales: Vec<f64> = filtered.exponents.iter().map(|e| monomial_scale(kind, e)).collect();
    let maxdeg = filtered.residual_degree.iter().copied().max().unwrap_or(0) as usize;
    let mut space = SectionSpace {
        basis: basis.clone(),
        metric: metric.clone(),
        filtered,
        scales,
        gram: DMatrix::zeros(0, 0),
        transform: None,
        diagonal: false,
        condition: f64::NAN,
        maxdeg,
    };
    let d = space.dim();
    space.diagonal = !force_full && metric.is_torus_invariant() && rule.is_standard_frame();
    let gram = if space.diagonal {
        let r = rule.torus_reduced()?;
        let v = r.integrate_vec(d, |nd, buf| {
            let lw = space.log_weight(&nd.point);
            let rv = space.monomial_values(&nd.point.z);
            for i in 0..d {
                buf[i] = (lw + rv[i].norm_sqr().ln()).exp();
            }
        });
        DMatrix::from_diagonal(&DVector::from_iterator(d, v.into_iter().map(|x| C64::new(x, 0.0))))
    } else {
        let n2 = d * d;
        let v = rule.integrate_vec(2 * n2, |nd, buf| {
            let w = space.log_weight(&nd.point).exp();
            let rv = space.monomial_values(&nd.point.z);
            for i in 0..d {
                for j in i..d {
                    let g = rv[i].conj() * rv[j] * w;
                    buf[i * d + j] = g.re;
                    buf[n2 + i * d + j] = g.im;
                }
            }
        });
        DMatrix::from_fn(d, d, |i, j| {
            if i <= j {
                C64::new(v[i * d + j], v[n2 + i * d + j])
            } else {
                C64::new(v[j * d + i], -v[n2 + j * d + i])
            }
        })
    };
    if gram.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::QuadratureFailure("non-finite Gram entries".into()));
    }
    space.gram = gram;
    Ok(space)
}

/// `T = D V Λ^{-1/2} Vᴴ` from the eigendecomposition `D G D = V Λ Vᴴ`, `D = diag(G_ii^{-1/2})`.
/// Returns the transform and the condition number of `D G D`.
pub fn orthonormal_transform(g: &DMatrix<C64>) -> Result<(DMatrix<C64>, f64)> {
    let d = g.nrows();
    if d == 0 || g.ncols() != d {
        return Err(Error::EmptySpace("empty Gram matrix".into()));
    }
    let diag: Vec<f64> = (0..d).map(|i| g[(i, i)].re).collect();
    if diag.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::QuadratureFailure("Gram diagonal is not positive".into()));
    }
    let dinv: Vec<f64> = diag.iter().map(|x| 1.0 / x.sqrt()).collect();
    let is_diag = (0..d).all(|i| (0..d).all(|j| i == j || g[(i, j)].norm() == 0.0));
    if is_diag {
        return Ok((DMatrix::from_diagonal(&DVector::from_iterator(d, dinv.iter().map(|&x| C64::new(x, 0.0)))), 1.0));
    }
    let mut s = DMatrix::from_fn(d, d, |i, j| g[(i, j)] * (dinv[i] * dinv[j]));
    // exact Hermitian symmetry before the eigensolver
    for i in 0..d {
        s[(i, i)] = C64::new(s[(i, i)].re, 0.0);
        for j in i + 1..d {
            let a = 0.5 * (s[(i, j)] + s[(j, i)].conj());
            s[(i, j)] = a;
            s[(j, i)] = a.conj();
        }
    }
    let eig = nalgebra::SymmetricEigen::new(s);
    let lmin = eig.eigenvalues.min();
    let lmax = eig.eigenvalues.max();
    if !(lmin > 0.0) {
        return Err(Error::QuadratureFailure(format!("Gram matrix is not positive definite (λmin = {lmin:e})")));
    }
    let cond = lmax / lmin;
    if cond > CONDITION_CAP {
        return Err(Error::IllConditioned { cond, context: format!("scaled Gram matrix of size {d}") });
    }
    let v = &eig.eigenvectors;
    let li = DVector::from_iterator(d, eig.eigenvalues.iter().map(|&l| C64::new(1.0 / l.sqrt(), 0.0)));
    let core = v * DMatrix::from_diagonal(&li) * v.adjoint();
    let t = DMatrix::from_fn(d, d, |i, j| core[(i, j)] * dinv[i]);
    Ok((t, cond))
}

pub fn orthonormal_basis(mut space: SectionSpace) -> Result<SectionSpace> {
    let (t, cond) = orthonormal_transform(&space.gram)?;
    space.transform = Some(t);
    space.condition = cond;
    Ok(space)
}

/// Gram assembly and orthonormalization on the default Gram rule.
pub fn build_space(bundle: &LineBundle, metric: &Arc<MetricWeight>, p: i64, adjoint: bool, resolution: usize) -> Result<SectionSpace> {
    let basis = space_basis(bundle, p, adjoint)?;
    let rule = gram_rule(metric, p, resolution)?;
    orthonormal_basis(gram_matrix(&basis, metric, &rule, false)?)
}

impl SectionSpace {
    pub fn kind(&self) -> ManifoldKind {
        self.basis.bundle.kind
    }

    pub fn p(&self) -> i64 {
        self.basis.p
    }

    /// Dimension of the `L²` space.
    pub fn dim(&self) -> usize {
        self.filtered.exponents.len()
    }

    /// `d_p = dim - 1`.
    pub fn d_p(&self) -> usize {
        self.dim() - 1
    }

    /// Number of monomials of the full space removed by the integrability filter.
    pub fn deficit(&self) -> usize {
        self.basis.exponents.len() - self.dim()
    }

    pub fn transform(&self) -> Result<&DMatrix<C64>> {
        self.transform.as_ref().ok_or_else(|| Error::Precondition("space has no orthonormal frame yet".into()))
    }

    /// Scaled residual monomials at a homogeneous vector.
    pub fn monomial_values(&self, z: &[C64; 4]) -> Vec<C64> {
        let pt = PowerTable::new(z, self.maxdeg);
        self.filtered.exponents.iter().zip(&self.scales).map(|(e, s)| pt.mono(e) * *s).collect()
    }

    /// `2 Σ a_i log|ℓ_i| - 2pψ` at a unit point, combining each pole's two terms.
    pub fn log_weight(&self, p: &Point) -> f64 {
        let pp = self.p() as f64;
        let mut lw = -2.0 * pp * self.metric.psi(p);
        if lw.is_finite() {
            for po in &self.filtered.poles {
                lw += 2.0 * po.order as f64 * po.component.eval(&p.z).norm().ln();
            }
            return lw;
        }
        // on a pole: the prefactor vanishes at least as fast as the weight blows up
        if self.filtered.poles.iter().any(|po| po.component.eval(&p.z).norm() == 0.0 && po.order as f64 > po.weight - 1e-9) {
            f64::NEG_INFINITY
        } else {
            lw
        }
    }

    /// Base prefactor `B = Π ℓ_i^{a_i}` as a polynomial.
    pub fn prefactor(&self) -> Poly {
        let mut b = Poly::constant(self.kind(), C64::new(1.0, 0.0));
        for po in &self.filtered.poles {
            if po.order > 0 {
                b = b.mul(&Poly::from_linear(&po.component).pow(po.order));
            }
        }
        b
    }

    /// Orthonormal frame values `(Tᵀ r)_k`, without the prefactor.
    pub fn frame_values(&self, z: &[C64; 4]) -> Result<Vec<C64>> {
        let t = self.transform()?;
        let r = self.monomial_values(z);
        let d = self.dim();
        if self.diagonal {
            return Ok((0..d).map(|k| t[(k, k)] * r[k]).collect());
        }
        Ok((0..d).map(|k| (0..d).map(|i| t[(i, k)] * r[i]).sum()).collect())
    }

    /// `log P_p` at a unit point.
    pub fn log_bergman(&self, p: &Point) -> Result<f64> {
        let t = self.transform()?;
        let lw = self.log_weight(p);
        let r = self.monomial_values(&p.z);
        let d = self.dim();
        let s: f64 = if self.diagonal {
            (0..d).map(|k| (t[(k, k)] * r[k]).norm_sqr()).sum()
        } else {
            (0..d).map(|k| (0..d).map(|i| t[(i, k)] * r[i]).sum::<C64>().norm_sqr()).sum()
        };
        Ok(lw + s.ln())
    }

    /// `P_p(x) = Σ_k |σ_k(x)|²`.
    pub fn bergman_kernel(&self, p: &Point) -> Result<f64> {
        if p.kind != self.kind() {
            return Err(Error::NumericalDomain(format!("point on {} for a space on {}", p.kind, self.kind())));
        }
        Ok(self.log_bergman(p)?.exp())
    }

    /// `∫ P_p ω^n`, which equals the dimension on the Gram rule.
    pub fn bergman_integral(&self, rule: &QuadratureRule) -> Result<f64> {
        self.transform()?;
        let r = if self.diagonal { rule.torus_reduced()? } else { rule.clone() };
        let (s, bad) = r.fold(
            || (0.0, 0usize),
            |(s, bad), nd| match self.log_bergman(&nd.point) {
                Ok(v) if v.is_finite() => *s += nd.weight * v.exp(),
                Ok(v) if v == f64::NEG_INFINITY => {}
                _ => *bad += 1,
            },
            |(a, b), (c, d)| (a + c, b + d),
        );
        if bad > 0 {
            return Err(Error::NumericalDomain(format!("{bad} invalid kernel values")));
        }
        Ok(s)
    }

    /// A section from coefficients in the orthonormal frame.
    pub fn section(self: &Arc<Self>, coeffs: Vec<C64>) -> Result<Section> {
        if coeffs.len() != self.dim() {
            return Err(Error::Precondition(format!("{} coefficients for a space of dimension {}", coeffs.len(), self.dim())));
        }
        self.transform()?;
        Ok(Section { space: self.clone(), coeffs })
    }

    /// Rotates the orthonormal frame by a unitary matrix `U` (`T ↦ T U`).
    pub fn rotated(&self, u: &DMatrix<C64>) -> Result<SectionSpace> {
        let t = self.transform()?;
        let mut s = self.clone();
        s.transform = Some(t * u);
        s.diagonal = false;
        Ok(s)
    }

    /// Rebuilds a completed space from stored Gram data.
    pub fn from_parts(
        basis: MonomialBasis,
        metric: Arc<MetricWeight>,
        gram: DMatrix<C64>,
        transform: DMatrix<C64>,
        diagonal: bool,
        condition: f64,
    ) -> Result<SectionSpace> {
        let filtered = integrability_filter(&basis, &metric)?;
        let d = filtered.exponents.len();
        if gram.nrows() != d || transform.nrows() != d {
            return Err(Error::Config("stored Gram data does not match the basis".into()));
        }
        let kind = basis.bundle.kind;
        let scales = filtered.exponents.iter().map(|e| monomial_scale(kind, e)).collect();
        let maxdeg = filtered.residual_degree.iter().copied().max().unwrap_or(0) as usize;
        Ok(SectionSpace { basis, metric, filtered, scales, gram, transform: Some(transform), diagonal, condition, maxdeg })
    }
}

/// A section `Σ_k c_k σ_k`.
#[derive(Clone, Debug)]
pub struct Section {
    pub space: Arc<SectionSpace>,
    pub coeffs: Vec<C64>,
}

impl Section {
    /// Coefficients on the residual monomials `scale_i z^{e_i}`.
    pub fn monomial_coeffs(&self) -> Vec<C64> {
        let t = self.space.transform.as_ref().expect("completed space");
        let d = self.coeffs.len();
        (0..d).map(|i| (0..d).map(|k| t[(i, k)] * self.coeffs[k]).sum()).collect()
    }

    /// The residual polynomial (the section divided by the base prefactor).
    pub fn residual_poly(&self) -> Poly {
        let c = self.monomial_coeffs();
        let terms = self.space.filtered.exponents.iter().zip(&self.space.scales).zip(c).map(|((e, s), c)| (*e, c * *s)).collect();
        Poly::new(self.space.kind(), terms)
    }

    /// The full homogeneous polynomial of the section.
    pub fn poly(&self) -> Poly {
        self.space.prefactor().mul(&self.residual_poly())
    }

    /// Residual polynomial value `F_res(z)`.
    pub fn residual_value(&self, z: &[C64; 4]) -> C64 {
        let r = self.space.monomial_values(z);
        self.monomial_coeffs().iter().zip(r).map(|(c, v)| c * v).sum()
    }

    /// `log |S|²_{h}` at a unit point.
    pub fn log_norm_sq(&self, p: &Point) -> f64 {
        self.space.log_weight(p) + self.residual_value(&p.z).norm_sqr().ln()
    }

    /// `|S|²` in a chart, from the local function and the local weight.
    pub fn norm_sq_in_chart(&self, p: &Point, chart: usize) -> f64 {
        let f = self.poly();
        let deg = self.space.basis.degree.clone();
        let zc = crate::manifold::chart_normalized(self.space.kind(), &p.z, chart);
        // local weight of L^p ⊗ K (or L^p) is the degree-k Fubini–Study weight plus pψ
        let x = p.chart_coords(chart);
        let refw = match self.space.kind() {
            ManifoldKind::P1xP1 => 0.5 * (deg[0] as f64 * (1.0 + x[0].norm_sqr()).ln() + deg[1] as f64 * (1.0 + x[1].norm_sqr()).ln()),
            _ => 0.5 * deg[0] as f64 * (1.0 + x[0].norm_sqr() + x[1].norm_sqr()).ln(),
        };
        let phi = refw + self.space.p() as f64 * self.space.metric.psi(p);
        f.eval(&zc).norm_sqr() * (-2.0 * phi).exp()
    }
}

/// `(p, d_p, d_p / p^n)` for each `p`, from the integrability filter alone.
pub fn dimension_growth(bundle: &LineBundle, metric: &MetricWeight, p_list: &[i64], adjoint: bool) -> Result<Vec<(i64, usize, f64)>> {
    if p_list.is_empty() || p_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("p list must be nonempty and strictly increasing".into()));
    }
    let n = bundle.kind.dim() as i32;
    p_list
        .iter()
        .map(|&p| {
            let dim = match space_basis(bundle, p, adjoint).and_then(|b| integrability_filter(&b, metric)) {
                Ok(f) => f.exponents.len(),
                Err(Error::EmptySpace(_)) => 0,
                Err(e) => return Err(e),
            };
            let dp = dim.saturating_sub(1);
            Ok((p, dp, dp as f64 / (p as f64).powi(n)))
        })
        .collect()
}

/// Deterministic evaluation grid: nodes of an ungraded rule.
pub fn grid_points(kind: ManifoldKind, resolution: usize) -> Result<Vec<Point>> {
    Ok(QuadratureRule::new(kind, resolution, &[])?.nodes().into_iter().map(|n| n.point).collect())
}

/// Chordal distance from a point to the singular divisors of a metric.
pub fn distance_to_poles(metric: &MetricWeight, p: &Point) -> f64 {
    metric.poles.iter().map(|(l, _)| l.distance(p)).fold(f64::INFINITY, f64::min)
}

/// `sup |(1/p) log P_p|` over grid points at distance at least `exclusion` from `Σ`.
pub fn log_bergman_sup(space: &SectionSpace, exclusion: f64, grid: &[Point]) -> Result<f64> {
    if !space.metric.poles.is_empty() && !(exclusion > 0.0) {
        return Err(Error::Config("a positive exclusion radius is needed for singular metrics".into()));
    }
    let pf = space.p() as f64;
    let mut sup = f64::NEG_INFINITY;
    let mut count = 0;
    for x in grid {
        if distance_to_poles(&space.metric, x) < exclusion {
            continue;
        }
        count += 1;
        sup = sup.max((space.log_bergman(x)? / pf).abs());
    }
    if count == 0 {
        return Err(Error::Config("exclusion radius removes the whole grid".into()));
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{line_bundle, log_pole_metric, reference_metric, smoothed_max_metric};
    use crate::manifold::build_manifold;
    use crate::poly::PolySpec;
    use rand::{Rng, SeedableRng};

    fn bundle(kind: ManifoldKind, deg: &[i64]) -> LineBundle {
        line_bundle(&build_manifold(kind), deg).unwrap()
    }

    fn fs_space(kind: ManifoldKind, deg: &[i64], p: i64, res: usize) -> SectionSpace {
        let b = bundle(kind, deg);
        build_space(&b, &Arc::new(reference_metric(&b)), p, true, res).unwrap()
    }

    #[test]
    fn basis_sizes() {
        let b1 = bundle(ManifoldKind::P1, &[1]);
        assert_eq!(adjoint_space_basis(&b1, 5).unwrap().exponents.len(), 4);
        assert_eq!(adjoint_space_basis(&b1, 2).unwrap().exponents.len(), 1);
        assert!(matches!(adjoint_space_basis(&b1, 1), Err(Error::EmptySpace(_))));
        let b2 = bundle(ManifoldKind::P2, &[1]);
        assert_eq!(adjoint_space_basis(&b2, 6).unwrap().exponents.len(), 10);
        let b3 = bundle(ManifoldKind::P1xP1, &[1, 2]);
        let m = adjoint_space_basis(&b3, 3).unwrap();
        assert_eq!(m.degree, vec![1, 4]);
        assert_eq!(m.exponents.len(), closed_form_dimension(ManifoldKind::P1xP1, &[1, 4]));
    }

    #[test]
    fn fs_gram_matches_beta_integrals() {
        // |z0^{k-j} z1^j|² integrates to j!(k-j)!/(k+1)! against the unit-mass
        // measure on P1, so the scaled monomials all have norm 1/(k+1).
        let s = fs_space(ManifoldKind::P1, &[1], 8, 32);
        let k = 6.0;
        for i in 0..s.dim() {
            assert!((s.gram[(i, i)].re - 1.0 / (k + 1.0)).abs() < 1e-12);
        }
        // the same on P2: (k+2 choose 2)^{-1}
        let s2 = fs_space(ManifoldKind::P2, &[1], 6, 16);
        for i in 0..s2.dim() {
            assert!((s2.gram[(i, i)].re - 1.0 / 10.0).abs() < 1e-12, "{}", s2.gram[(i, i)]);
        }
    }

    #[test]
    fn full_gram_of_invariant_metric_is_diagonal() {
        let b = bundle(ManifoldKind::P1, &[1]);
        let h = Arc::new(log_pole_metric(&b, &PolySpec::monomial(&[1, 0]), 0.4).unwrap());
        let basis = adjoint_space_basis(&b, 10).unwrap();
        let rule = gram_rule(&h, 10, 32).unwrap();
        let full = gram_matrix(&basis, &h, &rule, true).unwrap();
        let diag = gram_matrix(&basis, &h, &rule, false).unwrap();
        assert!(diag.diagonal && !full.diagonal);
        let d = full.dim();
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    assert!(full.gram[(i, j)].norm() < 1e-10 * full.gram[(i, i)].re);
                }
            }
            assert!((full.gram[(i, i)].re - diag.gram[(i, i)].re).abs() < 1e-10 * diag.gram[(i, i)].re);
        }
    }

    #[test]
    fn log_pole_filter_matches_radial_exponent_test() {
        // t = 0.4, p = 10: weight |z0|^{-8}, so z0 must divide to order 4 - 1 + 1 = 4.
        let b = bundle(ManifoldKind::P1, &[1]);
        let h = log_pole_metric(&b, &PolySpec::monomial(&[1, 0]), 0.4).unwrap();
        let basis = adjoint_space_basis(&b, 10).unwrap();
        let f = integrability_filter(&basis, &h).unwrap();
        let mask = f.mask.clone().unwrap();
        for (e, keep) in basis.exponents.iter().zip(&mask) {
            assert_eq!(Some(*keep), monomial_is_integrable(e, &f.poles));
        }
        assert_eq!(basis.exponents.len() - f.exponents.len(), 4);
        let g = dimension_growth(&b, &h, &[10], true).unwrap();
        assert_eq!(g[0].1, 10 - 2 - 4);
    }

    #[test]
    fn excluded_monomial_norm_diverges_under_refinement() {
        // z0^3 z1^5 has |z0|^{6-8} = |z0|^{-2} near the pole: log-divergent norm.
        let b = bundle(ManifoldKind::P1, &[1]);
        let h = log_pole_metric(&b, &PolySpec::monomial(&[1, 0]), 0.4).unwrap();
        let norm = |depth: usize| {
            let rule = QuadratureRule::with_grading(ManifoldKind::P1, 32, &h.centers(), Grading { depth, ratio: 0.2 })
                .unwrap()
                .torus_reduced()
                .unwrap();
            rule.nodes().iter().map(|n| n.weight * n.point.z[0].norm().powi(6 - 8) * n.point.z[1].norm().powi(10)).sum::<f64>()
        };
        let (a, b2, c) = (norm(10), norm(20), norm(40));
        // grows linearly in the depth
        assert!(b2 - a > 0.5 && ((c - b2) / (b2 - a) - 2.0).abs() < 0.05, "{a} {b2} {c}");
    }

    #[test]
    fn orthonormal_transform_cases() {
        let id = DMatrix::<C64>::identity(4, 4);
        let (t, _) = orthonormal_transform(&id).unwrap();
        assert!((t - &id).norm() < 1e-15);
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(4.0, 0.0), C64::new(0.25, 0.0)]));
        let (t, _) = orthonormal_transform(&g).unwrap();
        assert!((t[(0, 0)].re - 0.5).abs() < 1e-15 && (t[(1, 1)].re - 2.0).abs() < 1e-15 && t[(0, 1)].norm() == 0.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = DMatrix::from_fn(10, 10, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let g = &a * a.adjoint() + DMatrix::identity(10, 10).scale(0.1);
        let (t, _) = orthonormal_transform(&g).unwrap();
        let r = t.adjoint() * &g * &t - DMatrix::<C64>::identity(10, 10);
        assert!(r.norm() < 1e-10);
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
        assert!(orthonormal_transform(&bad).is_err());
        let sing = DMatrix::from_fn(2, 2, |_, _| C64::new(1.0, 0.0));
        assert!(orthonormal_transform(&sing).is_err());
    }

    #[test]
    fn fs_kernel_is_constant_with_trace_identity() {
        for kind in [ManifoldKind::P1, ManifoldKind::P2, ManifoldKind::P1xP1] {
            let deg = if kind == ManifoldKind::P1xP1 { vec![1, 1] } else { vec![1] };
            let s = fs_space(kind, &deg, 7, 24);
            let rule = gram_rule(&s.metric, 7, 24).unwrap();
            let total = s.bergman_integral(&rule).unwrap();
            assert!((total - s.dim() as f64).abs() < 1e-10 * s.dim() as f64, "{kind} {total}");
            for x in grid_points(kind, 8).unwrap().iter().step_by(7) {
                let v = s.bergman_kernel(x).unwrap();
                assert!((v - s.dim() as f64).abs() < 1e-9 * v, "{kind} {v}");
            }
        }
    }

    #[test]
    fn kernel_is_basis_independent() {
        let b = bundle(ManifoldKind::P1, &[1]);
        let q = PolySpec { exponents: vec![vec![2, 0], vec![1, 1], vec![0, 2]], coefficients: vec!["1".into(), "1/2".into(), "-1".into()], imaginary: None };
        let h = Arc::new(log_pole_metric(&b, &q, 0.5).unwrap());
        let s = build_space(&b, &h, 9, true, 32).unwrap();
        assert!(!s.diagonal);
        let rule = gram_rule(&h, 9, 32).unwrap();
        assert!((s.bergman_integral(&rule).unwrap() - s.dim() as f64).abs() < 1e-8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let d = s.dim();
        let a = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>(), rng.random::<f64>()));
        let u = a.qr().q();
        let r = s.rotated(&u).unwrap();
        for x in grid_points(ManifoldKind::P1, 10).unwrap().iter().step_by(3) {
            let (v, w) = (s.log_bergman(x).unwrap(), r.log_bergman(x).unwrap());
            assert!((v - w).abs() < 1e-10, "{v} {w}");
        }
    }

    #[test]
    fn section_norm_is_chart_independent() {
        let b = bundle(ManifoldKind::P1xP1, &[1, 1]);
        let h = Arc::new(smoothed_max_metric(&b, &[PolySpec::monomial(&[1, 0, 1, 0]), PolySpec::monomial(&[0, 1, 0, 1]), PolySpec::monomial(&[1, 0, 0, 1]), PolySpec::monomial(&[0, 1, 1, 0])], 0.5, 2).unwrap());
        let s = Arc::new(build_space(&b, &h, 4, true, 16).unwrap());
        let sec = s.section((0..s.dim()).map(|k| C64::new(1.0 + k as f64, 0.5 - k as f64)).collect()).unwrap();
        let p = Point::new(ManifoldKind::P1xP1, &[C64::new(0.8, 0.1), C64::new(0.6, -0.3), C64::new(0.2, 0.0), C64::new(-0.9, 0.4)]).unwrap();
        let direct = sec.log_norm_sq(&p).exp();
        for c in 0..4 {
            let v = sec.norm_sq_in_chart(&p, c);
            assert!((v - direct).abs() < 1e-10 * direct, "{c} {v} {direct}");
        }
    }

    #[test]
    fn log_pole_kernel_sup_grows_with_smaller_exclusion() {
        let b = bundle(ManifoldKind::P1, &[1]);
        let h = Arc::new(log_pole_metric(&b, &PolySpec::monomial(&[1, 0]), 0.5).unwrap());
        let s = build_space(&b, &h, 12, true, 32).unwrap();
        let grid = grid_points(ManifoldKind::P1, 16).unwrap();
        let a = log_bergman_sup(&s, 0.2, &grid).unwrap();
        let c = log_bergman_sup(&s, 0.1, &grid).unwrap();
        assert!(a.is_finite() && c >= a);
        assert!(log_bergman_sup(&s, 0.0, &grid).is_err());
        assert!(log_bergman_sup(&s, 2.0, &grid).is_err());
    }
}
