//! Homogeneous polynomials on the model manifolds, in floating point and exact form.

use crate::error::{Error, Result};
use crate::manifold::{LinearComponent, ManifoldKind};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Exp = [u16; 4];

/// Multidegree of an exponent vector.
pub fn exp_degree(kind: ManifoldKind, e: &Exp) -> Vec<i64> {
    match kind {
        ManifoldKind::P1 => vec![(e[0] + e[1]) as i64],
        ManifoldKind::P2 => vec![(e[0] + e[1] + e[2]) as i64],
        ManifoldKind::P1xP1 => vec![(e[0] + e[1]) as i64, (e[2] + e[3]) as i64],
    }
}

/// All monomials of a multidegree, in a fixed documented order.
///
/// `P1`: `z0^{k-j} z1^j` for `j = 0..=k`. `P2`: by increasing `z1 + z2` degree,
/// then increasing `z2`. `P1xP1`: first factor outer, second inner.
pub fn monomials(kind: ManifoldKind, deg: &[i64]) -> Vec<Exp> {
    if deg.iter().any(|&d| d < 0) {
        return Vec::new();
    }
    match kind {
        ManifoldKind::P1 => {
            let k = deg[0] as u16;
            (0..=k).map(|j| [k - j, j, 0, 0]).collect()
        }
        ManifoldKind::P2 => {
            let k = deg[0] as u16;
            let mut out = Vec::new();
            for s in 0..=k {
                for c in 0..=s {
                    out.push([k - s, s - c, c, 0]);
                }
            }
            out
        }
        ManifoldKind::P1xP1 => {
            let (a, b) = (deg[0] as u16, deg[1] as u16);
            let mut out = Vec::new();
            for i in 0..=a {
                for j in 0..=b {
                    out.push([a - i, i, b - j, j]);
                }
            }
            out
        }
    }
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `sqrt` of the multinomial coefficient of an exponent: the scale making monomials
/// orthogonal with equal norms for the Fubini–Study inner product.
pub fn monomial_scale(kind: ManifoldKind, e: &Exp) -> f64 {
    let lm = |es: &[u16]| {
        let s: u32 = es.iter().map(|&x| x as u32).sum();
        ln_factorial(s) - es.iter().map(|&x| ln_factorial(x as u32)).sum::<f64>()
    };
    let l = match kind {
        ManifoldKind::P1 => lm(&e[..2]),
        ManifoldKind::P2 => lm(&e[..3]),
        ManifoldKind::P1xP1 => lm(&e[..2]) + lm(&e[2..4]),
    };
    (0.5 * l).exp()
}

#[inline]
pub fn eval_monomial(e: &Exp, z: &[C64; 4]) -> C64 {
    let mut v = C64::new(1.0, 0.0);
    for k in 0..4 {
        if e[k] > 0 {
            v *= z[k].powu(e[k] as u32);
        }
    }
    v
}

/// Powers `z_k^j` for `j ≤ maxdeg` to evaluate many monomials at one point.
pub struct PowerTable {
    pub pw: [Vec<C64>; 4],
}

impl PowerTable {
    pub fn new(z: &[C64; 4], maxdeg: usize) -> PowerTable {
        let mk = |c: C64| {
            let mut v = Vec::with_capacity(maxdeg + 1);
            let mut acc = C64::new(1.0, 0.0);
            for _ in 0..=maxdeg {
                v.push(acc);
                acc *= c;
            }
            v
        };
        PowerTable { pw: [mk(z[0]), mk(z[1]), mk(z[2]), mk(z[3])] }
    }

    #[inline]
    pub fn mono(&self, e: &Exp) -> C64 {
        self.pw[0][e[0] as usize]
            * self.pw[1][e[1] as usize]
            * self.pw[2][e[2] as usize]
            * self.pw[3][e[3] as usize]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub kind: ManifoldKind,
    pub terms: Vec<(Exp, C64)>,
}

impl Poly {
    pub fn new(kind: ManifoldKind, terms: Vec<(Exp, C64)>) -> Poly {
        let mut p = Poly { kind, terms };
        p.normalize_terms();
        p
    }

    pub fn monomial(kind: ManifoldKind, e: Exp) -> Poly {
        Poly { kind, terms: vec![(e, C64::new(1.0, 0.0))] }
    }

    pub fn constant(kind: ManifoldKind, c: C64) -> Poly {
        Poly { kind, terms: vec![([0; 4], c)] }
    }

    pub fn from_linear(l: &LinearComponent) -> Poly {
        let c = l.form_coeffs();
        let kind = l.kind();
        let mut terms = Vec::new();
        for (k, &ck) in c.iter().enumerate() {
            if ck.norm() > 0.0 {
                let mut e = [0u16; 4];
                e[k] = 1;
                terms.push((e, ck));
            }
        }
        Poly::new(kind, terms)
    }

    fn normalize_terms(&mut self) {
        self.terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Exp, C64)> = Vec::with_capacity(self.terms.len());
        for (e, c) in self.terms.drain(..) {
            if let Some(last) = out.last_mut() {
                if last.0 == e {
                    last.1 += c;
                    continue;
                }
            }
            out.push((e, c));
        }
        out.retain(|(_, c)| c.norm() != 0.0);
        self.terms = out;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multidegree, or an error if the polynomial is not homogeneous.
    pub fn degree(&self) -> Result<Vec<i64>> {
        let mut it = self.terms.iter();
        let first = it
            .next()
            .ok_or_else(|| Error::Config("zero polynomial has no degree".into()))?;
        let d = exp_degree(self.kind, &first.0);
        for (e, _) in it {
            if exp_degree(self.kind, e) != d {
                return Err(Error::Config("polynomial is not homogeneous".into()));
            }
        }
        Ok(d)
    }

    pub fn eval(&self, z: &[C64; 4]) -> C64 {
        self.terms.iter().map(|(e, c)| c * eval_monomial(e, z)).sum()
    }

    /// Value and homogeneous gradient at `z`.
    pub fn eval_grad(&self, z: &[C64; 4]) -> (C64, [C64; 4]) {
        let maxdeg = self.terms.iter().flat_map(|(e, _)| e.iter()).copied().max().unwrap_or(0) as usize;
        let t = PowerTable::new(z, maxdeg);
        let zero = C64::new(0.0, 0.0);
        let (mut v, mut g) = (zero, [zero; 4]);
        for (e, c) in &self.terms {
            let m = [t.pw[0][e[0] as usize], t.pw[1][e[1] as usize], t.pw[2][e[2] as usize], t.pw[3][e[3] as usize]];
            v += c * m[0] * m[1] * m[2] * m[3];
            for k in 0..4 {
                if e[k] > 0 {
                    let mut d = c * e[k] as f64 * t.pw[k][e[k] as usize - 1];
                    for (j, mj) in m.iter().enumerate() {
                        if j != k {
                            d *= mj;
                        }
                    }
                    g[k] += d;
                }
            }
        }
        (v, g)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]];
                terms.push((e, c1 * c2));
            }
        }
        Poly::new(self.kind, terms)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::constant(self.kind, C64::new(1.0, 0.0));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, c: C64) -> Poly {
        Poly::new(self.kind, self.terms.iter().map(|(e, x)| (*e, x * c)).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        Poly::new(self.kind, t)
    }

    /// Coefficient 2-norm.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Norm for which `|F(z)| ≤ ‖F‖` on unit vectors (the Bombieri-type norm of the scaled basis).
    pub fn bombieri_norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| (c / monomial_scale(self.kind, e)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn as_monomial(&self) -> Option<(Exp, C64)> {
        if self.terms.len() == 1 {
            Some(self.terms[0])
        } else {
            None
        }
    }

    /// Applies a unitary change of coordinates `z = U z'`, returning the polynomial in `z'`.
    pub fn substitute(&self, lin: &[[C64; 4]; 4]) -> Poly {
        // z_k = Σ_j lin[k][j] z'_j
        let nc = self.kind.ncoords();
        let lin_polys: Vec<Poly> = (0..nc)
            .map(|k| {
                let mut terms = Vec::new();
                for j in 0..nc {
                    if lin[k][j].norm() > 0.0 {
                        let mut e = [0u16; 4];
                        e[j] = 1;
                        terms.push((e, lin[k][j]));
                    }
                }
                Poly::new(self.kind, terms)
            })
            .collect();
        let mut acc = Poly { kind: self.kind, terms: Vec::new() };
        for (e, c) in &self.terms {
            let mut t = Poly::constant(self.kind, *c);
            for k in 0..nc {
                if e[k] > 0 {
                    t = t.mul(&lin_polys[k].pow(e[k] as u32));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }
}

/// Rational number parsed from an integer or decimal literal such as `"-2.75"` or `"3/4"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let err = || Error::Config(format!("cannot parse coefficient {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| err())?;
        let d: BigInt = b.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let neg = mantissa.starts_with('-');
    let body = mantissa.trim_start_matches(['-', '+']);
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(err());
    }
    let digits = format!("{ip}{fp}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let mut num: BigInt = digits.parse().map_err(|_| err())?;
    if neg {
        num = -num;
    }
    let scale = exp10 - fp.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Structured polynomial record as it appears in configuration files.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolySpec {
    pub exponents: Vec<Vec<u16>>,
    /// Real parts, as integer or decimal strings.
    pub coefficients: Vec<String>,
    /// Optional imaginary parts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imaginary: Option<Vec<String>>,
}

impl PolySpec {
    pub fn monomial(e: &[u16]) -> PolySpec {
        PolySpec { exponents: vec![e.to_vec()], coefficients: vec!["1".into()], imaginary: None }
    }

    pub fn to_exact(&self, kind: ManifoldKind) -> Result<ExactPoly> {
        if self.exponents.len() != self.coefficients.len() {
            return Err(Error::Config("exponent and coefficient lists differ in length".into()));
        }
        let nc = kind.ncoords();
        let mut terms = Vec::new();
        for (k, (e, c)) in self.exponents.iter().zip(&self.coefficients).enumerate() {
            if e.len() != nc {
                return Err(Error::Config(format!("exponent {e:?} needs {nc} entries on {kind}")));
            }
            let mut ex = [0u16; 4];
            ex[..nc].copy_from_slice(e);
            let re = parse_rational(c)?;
            let im = match &self.imaginary {
                Some(v) => parse_rational(v.get(k).ok_or_else(|| {
                    Error::Config("imaginary list shorter than coefficient list".into())
                })?)?,
                None => BigRational::zero(),
            };
            terms.push((ex, re, im));
        }
        let p = ExactPoly::new(kind, terms);
        if p.is_zero() {
            return Err(Error::Config("polynomial is identically zero".into()));
        }
        p.degree()?;
        Ok(p)
    }

    pub fn to_poly(&self, kind: ManifoldKind) -> Result<Poly> {
        Ok(self.to_exact(kind)?.to_poly())
    }
}

/// Polynomial with exact Gaussian-rational coefficients `re + i·im`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPoly {
    pub kind: ManifoldKind,
    pub terms: Vec<(Exp, BigRational, BigRational)>,
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl ExactPoly {
    pub fn new(kind: ManifoldKind, mut terms: Vec<(Exp, BigRational, BigRational)>) -> ExactPoly {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Exp, BigRational, BigRational)> = Vec::new();
        for (e, re, im) in terms {
            if let Some(last) = out.last_mut() {
                if last.0 == e {
                    last.1 += re;
                    last.2 += im;
                    continue;
                }
            }
            out.push((e, re, im));
        }
        out.retain(|t| !(t.1.is_zero() && t.2.is_zero()));
        ExactPoly { kind, terms: out }
    }

    pub fn from_int_terms(kind: ManifoldKind, terms: &[(Exp, i64)]) -> ExactPoly {
        ExactPoly::new(
            kind,
            terms
                .iter()
                .map(|(e, c)| (*e, BigRational::from_integer(BigInt::from(*c)), BigRational::zero()))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Result<Vec<i64>> {
        let first = self
            .terms
            .first()
            .ok_or_else(|| Error::Config("zero polynomial has no degree".into()))?;
        let d = exp_degree(self.kind, &first.0);
        if self.terms.iter().any(|t| exp_degree(self.kind, &t.0) != d) {
            return Err(Error::Config("polynomial is not homogeneous".into()));
        }
        Ok(d)
    }

    pub fn to_poly(&self) -> Poly {
        Poly::new(
            self.kind,
            self.terms
                .iter()
                .map(|(e, re, im)| (*e, C64::new(rat_to_f64(re), rat_to_f64(im))))
                .collect(),
        )
    }

    /// Exact rational approximation of a floating polynomial (coefficients rounded to `digits` decimals).
    pub fn from_poly_rounded(p: &Poly, digits: u32) -> ExactPoly {
        let scale = 10f64.powi(digits as i32);
        let den = BigInt::from(10).pow(digits);
        let r = |x: f64| BigRational::new(BigInt::from((x * scale).round() as i64), den.clone());
        ExactPoly::new(p.kind, p.terms.iter().map(|(e, c)| (*e, r(c.re), r(c.im))).collect())
    }

    /// Linear change of variables `z_k = Σ_j m[k][j] z'_j` with integer entries.
    pub fn substitute_int(&self, m: &[[i64; 4]; 4]) -> ExactPoly {
        let nc = self.kind.ncoords();
        let zero = || BigRational::zero();
        // Multiply out term by term with a sparse map.
        let mut acc: std::collections::BTreeMap<Exp, (BigRational, BigRational)> = Default::default();
        for (e, re, im) in &self.terms {
            let mut cur: std::collections::BTreeMap<Exp, BigRational> = Default::default();
            cur.insert([0; 4], BigRational::one());
            for k in 0..nc {
                for _ in 0..e[k] {
                    let mut next: std::collections::BTreeMap<Exp, BigRational> = Default::default();
                    for (ee, c) in &cur {
                        for j in 0..nc {
                            if m[k][j] != 0 {
                                let mut ne = *ee;
                                ne[j] += 1;
                                let add = c * BigRational::from_integer(BigInt::from(m[k][j]));
                                let slot = next.entry(ne).or_insert_with(zero);
                                *slot += add;
                            }
                        }
                    }
                    cur = next;
                }
            }
            for (ee, c) in cur {
                let slot = acc.entry(ee).or_insert_with(|| (zero(), zero()));
                slot.0 += &c * re;
                slot.1 += &c * im;
            }
        }
        ExactPoly::new(self.kind, acc.into_iter().map(|(e, (a, b))| (e, a, b)).collect())
    }

    /// Coefficients in the variable `var` after fixing the other coordinates to integers,
    /// ascending in the power of `var`, padded to `deg + 1` entries.
    fn univariate_at(&self, var: usize, fixed: &[i64; 4], deg: usize) -> Vec<(BigRational, BigRational)> {
        let mut out = vec![(BigRational::zero(), BigRational::zero()); deg + 1];
        for (e, re, im) in &self.terms {
            let mut w = BigRational::one();
            for k in 0..4 {
                if k != var && e[k] > 0 {
                    w *= BigRational::from_integer(BigInt::from(fixed[k]).pow(e[k] as u32));
                }
            }
            let slot = &mut out[e[var] as usize];
            slot.0 += &w * re;
            slot.1 += &w * im;
        }
        out
    }
}

/// Determinant of a square matrix of Gaussian rationals by exact elimination.
fn exact_det(mut m: Vec<Vec<(BigRational, BigRational)>>) -> (BigRational, BigRational) {
    let n = m.len();
    let cmul = |a: &(BigRational, BigRational), b: &(BigRational, BigRational)| {
        (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
    };
    let cinv = |a: &(BigRational, BigRational)| {
        let d = &a.0 * &a.0 + &a.1 * &a.1;
        (&a.0 / &d, -&a.1 / &d)
    };
    let mut det = (BigRational::one(), BigRational::zero());
    for col in 0..n {
        let piv = (col..n).find(|&r| !(m[r][col].0.is_zero() && m[r][col].1.is_zero()));
        let Some(piv) = piv else {
            return (BigRational::zero(), BigRational::zero());
        };
        if piv != col {
            m.swap(piv, col);
            det = (-&det.0, -&det.1);
        }
        det = cmul(&det, &m[col][col]);
        let inv = cinv(&m[col][col]);
        for r in col + 1..n {
            if m[r][col].0.is_zero() && m[r][col].1.is_zero() {
                continue;
            }
            let f = cmul(&m[r][col], &inv);
            for c in col..n {
                let t = cmul(&f, &m[col][c]);
                m[r][c] = (&m[r][c].0 - &t.0, &m[r][c].1 - &t.1);
            }
        }
    }
    det
}

/// Sylvester matrix of two coefficient lists (ascending powers, formal degrees from lengths).
fn sylvester<T: Clone>(a: &[T], b: &[T], zero: T) -> Vec<Vec<T>> {
    let (da, db) = (a.len() - 1, b.len() - 1);
    let n = da + db;
    let mut m = vec![vec![zero; n]; n];
    for r in 0..db {
        for (k, c) in a.iter().rev().enumerate() {
            m[r][r + k] = c.clone();
        }
    }
    for r in 0..da {
        for (k, c) in b.iter().rev().enumerate() {
            m[db + r][r + k] = c.clone();
        }
    }
    m
}

fn exact_resultant(a: &[(BigRational, BigRational)], b: &[(BigRational, BigRational)]) -> (BigRational, BigRational) {
    if a.len() == 1 && b.len() == 1 {
        return (BigRational::one(), BigRational::zero());
    }
    exact_det(sylvester(a, b, (BigRational::zero(), BigRational::zero())))
}

/// Numerical resultant of two univariate coefficient lists (ascending, formal degrees).
pub fn resultant(a: &[C64], b: &[C64]) -> C64 {
    if a.len() == 1 && b.len() == 1 {
        return C64::new(1.0, 0.0);
    }
    let m = sylvester(a, b, C64::new(0.0, 0.0));
    let n = m.len();
    let mat = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    mat.determinant()
}

/// Exact test for a common nonconstant factor of two homogeneous polynomials.
pub fn have_common_factor(p: &ExactPoly, q: &ExactPoly) -> Result<bool> {
    if p.kind != q.kind {
        return Err(Error::Config("polynomials live on different manifolds".into()));
    }
    let (dp, dq) = (p.degree()?, q.degree()?);
    match p.kind {
        ManifoldKind::P1 => {
            // Binary forms: resultant in the dehomogenized variable, homogeneous version.
            let a = p.univariate_at(1, &[1, 0, 0, 0], dp[0] as usize);
            let b = q.univariate_at(1, &[1, 0, 0, 0], dq[0] as usize);
            if dp[0] == 0 || dq[0] == 0 {
                return Ok(false);
            }
            let r = exact_resultant(&a, &b);
            Ok(r.0.is_zero() && r.1.is_zero())
        }
        ManifoldKind::P2 => {
            if dp[0] == 0 || dq[0] == 0 {
                return Ok(false);
            }
            // Shear so both have a nonzero pure z2-power coefficient.
            let shears: [[i64; 4]; 6] = [
                [0, 0, 0, 0],
                [1, 1, 0, 0],
                [2, 3, 0, 0],
                [3, 1, 0, 0],
                [5, 7, 0, 0],
                [1, 4, 0, 0],
            ];
            for s in shears {
                let m = [[1, 0, s[0], 0], [0, 1, s[1], 0], [0, 0, 1, 0], [0, 0, 0, 1]];
                let ps = p.substitute_int(&m);
                let qs = q.substitute_int(&m);
                let lead = |f: &ExactPoly, d: i64| {
                    f.terms.iter().any(|t| t.0[2] as i64 == d && !(t.1.is_zero() && t.2.is_zero()))
                };
                if !(lead(&ps, dp[0]) && lead(&qs, dq[0])) {
                    continue;
                }
                // Res_{z2} is a binary form of degree dp·dq in (z0, z1).
                let npts = (dp[0] * dq[0] + 1) as i64;
                let mut all_zero = true;
                for j in 0..npts {
                    let fixed = [1, j, 0, 0];
                    let a = ps.univariate_at(2, &fixed, dp[0] as usize);
                    let b = qs.univariate_at(2, &fixed, dq[0] as usize);
                    let r = exact_resultant(&a, &b);
                    if !(r.0.is_zero() && r.1.is_zero()) {
                        all_zero = false;
                        break;
                    }
                }
                return Ok(all_zero);
            }
            Err(Error::NumericalDomain("no admissible shear found for resultant test".into()))
        }
        ManifoldKind::P1xP1 => {
            // A common factor depends on w (Res_w ≡ 0) or is a pure z-form (Res_z ≡ 0).
            let check = |var_hi: usize, fix_lo: usize, fix_hi: usize, dvar_p: i64, dvar_q: i64, dfix_p: i64, dfix_q: i64| {
                if dvar_p == 0 && dvar_q == 0 {
                    return false;
                }
                let npts = dfix_p * dvar_q + dfix_q * dvar_p + 1;
                for j in 0..npts {
                    let pts: [(i64, i64); 1] = [(1, j)];
                    for (x0, x1) in pts {
                        let mut fixed = [0i64; 4];
                        fixed[fix_lo] = x0;
                        fixed[fix_hi] = x1;
                        // homogenize the eliminated factor at var_lo = 1
                        let var_lo = if var_hi == 1 { 0 } else { 2 };
                        fixed[var_lo] = 1;
                        let a = p.univariate_at(var_hi, &fixed, dvar_p as usize);
                        let b = q.univariate_at(var_hi, &fixed, dvar_q as usize);
                        let r = exact_resultant(&a, &b);
                        if !(r.0.is_zero() && r.1.is_zero()) {
                            return false;
                        }
                    }
                }
                true
            };
            // Res_w with (z0,z1) = (1,j); binary forms in w via w0 = 1 with formal degree.
            let res_w_zero = check(3, 0, 1, dp[1], dq[1], dp[0], dq[0]);
            let res_z_zero = check(1, 2, 3, dp[0], dq[0], dp[1], dq[1]);
            Ok(res_w_zero || res_z_zero)
        }
    }
}

/// Roots of `Σ c_k x^k` (ascending coefficients, nonzero leading term) from companion eigenvalues.
pub fn companion_roots(c: &[C64]) -> Result<Vec<C64>> {
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    if lead.norm() == 0.0 {
        return Err(Error::RootFinding("zero leading coefficient".into()));
    }
    if n == 1 {
        return Ok(vec![-c[0] / lead]);
    }
    // Rescale x = s·y so that the extreme coefficients balance.
    let s = if c[0].norm() > 0.0 { (c[0].norm() / lead.norm()).powf(1.0 / n as f64) } else { 1.0 };
    let s = if s.is_finite() && s > 0.0 { s } else { 1.0 };
    let mut m = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        // monic in y: y^n + Σ (c_k s^k / (lead s^n)) y^k
        let coef = c[k] / lead * s.powi(k as i32 - n as i32);
        m[(0, n - 1 - k)] = -coef;
    }
    for i in 1..n {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    let eig = nalgebra::Schur::new(m)
        .eigenvalues()
        .ok_or_else(|| Error::RootFinding("companion eigenvalues did not converge".into()))?;
    Ok(eig.iter().map(|y| y * s).collect())
}

/// Evaluates `Σ c_k x^k` and its derivative by Horner's rule.
pub fn horner(c: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

/// A few Newton steps; keeps the better of start and result.
pub fn newton_polish(c: &[C64], x0: C64, iters: usize) -> C64 {
    let mut x = x0;
    let mut best = (horner(c, x).0.norm(), x);
    for _ in 0..iters {
        let (p, dp) = horner(c, x);
        if dp.norm() == 0.0 {
            break;
        }
        x -= p / dp;
        let r = horner(c, x).0.norm();
        if r < best.0 {
            best = (r, x);
        }
        if r == 0.0 {
            break;
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(ManifoldKind::P1, &[3]).len(), 4);
        assert_eq!(monomials(ManifoldKind::P2, &[3]).len(), 10);
        assert_eq!(monomials(ManifoldKind::P1xP1, &[2, 3]).len(), 12);
        assert!(monomials(ManifoldKind::P1, &[-1]).is_empty());
    }

    #[test]
    fn parse_decimals_exactly() {
        assert_eq!(parse_rational("-2.75").unwrap(), BigRational::new((-11).into(), 4.into()));
        assert_eq!(parse_rational("3/4").unwrap(), BigRational::new(3.into(), 4.into()));
        assert_eq!(parse_rational("1e2").unwrap(), BigRational::from_integer(100.into()));
        assert!(parse_rational("x1").is_err());
    }

    #[test]
    fn roots_of_unity() {
        let mut c = vec![C64::new(0.0, 0.0); 6];
        c[0] = C64::new(-1.0, 0.0);
        c[5] = C64::new(1.0, 0.0);
        let r = companion_roots(&c).unwrap();
        assert_eq!(r.len(), 5);
        for x in r {
            assert!((x.powu(5) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn common_factor_on_p2() {
        let k = ManifoldKind::P2;
        let z0 = ExactPoly::from_int_terms(k, &[([1, 0, 0, 0], 1)]);
        let z1 = ExactPoly::from_int_terms(k, &[([0, 1, 0, 0], 1)]);
        let z0z1 = ExactPoly::from_int_terms(k, &[([1, 1, 0, 0], 1)]);
        assert!(!have_common_factor(&z0, &z1).unwrap());
        assert!(have_common_factor(&z0, &z0z1).unwrap());
        assert!(have_common_factor(&z0z1, &z0).unwrap());
    }

    #[test]
    fn common_factor_on_product() {
        let k = ManifoldKind::P1xP1;
        let a = ExactPoly::from_int_terms(k, &[([1, 0, 1, 0], 1), ([0, 1, 0, 1], 1)]);
        let b = ExactPoly::from_int_terms(k, &[([1, 0, 0, 1], 1), ([0, 1, 1, 0], 2)]);
        assert!(!have_common_factor(&a, &b).unwrap());
        let z0 = ExactPoly::from_int_terms(k, &[([1, 0, 0, 0], 1)]);
        let z0w = ExactPoly::from_int_terms(k, &[([1, 0, 1, 0], 1), ([1, 0, 0, 1], 3)]);
        assert!(have_common_factor(&z0, &z0w).unwrap());
        let w0 = ExactPoly::from_int_terms(k, &[([0, 0, 1, 0], 1)]);
        let w0z = ExactPoly::from_int_terms(k, &[([1, 0, 1, 0], 1), ([0, 1, 1, 0], -1)]);
        assert!(have_common_factor(&w0, &w0z).unwrap());
        assert!(!have_common_factor(&z0, &w0).unwrap());
    }
}
