//! Roots of binary forms and clustering of nearby roots.

use crate::error::{Error, Result};
use crate::manifold::hdot;
use crate::poly::{companion_roots, newton_polish};
use num_complex::Complex64 as C64;

/// Roots of the binary form `Σ c_j z0^{k-j} z1^j` as unit vectors, repeated by multiplicity.
///
/// Exact zero coefficients at either end give roots at `[1:0]` or `[0:1]`. The
/// remaining roots come from companion eigenvalues in `x = z1/z0`; those with
/// `|x| > 1` are polished in the reciprocal chart.
pub fn binary_form_roots(c: &[C64]) -> Result<Vec<[C64; 2]>> {
    let k = c.len().saturating_sub(1);
    if c.iter().all(|x| x.norm() == 0.0) {
        return Err(Error::RootFinding("zero form has no isolated roots".into()));
    }
    let lo = c.iter().position(|x| x.norm() != 0.0).unwrap_or(0);
    let hi = c.iter().rposition(|x| x.norm() != 0.0).unwrap_or(0);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(k);
    // x = 0 is the point [1:0]; x = ∞ is [0:1]
    out.extend(std::iter::repeat_n([one, zero], lo));
    out.extend(std::iter::repeat_n([zero, one], k - hi));
    let mid = &c[lo..=hi];
    let rev: Vec<C64> = mid.iter().rev().cloned().collect();
    for x in companion_roots(mid)? {
        if x.norm() <= 1.0 {
            let x = newton_polish(mid, x, 4);
            let n = (1.0 + x.norm_sqr()).sqrt();
            out.push([one / n, x / n]);
        } else {
            let y = newton_polish(&rev, one / x, 4);
            let n = (1.0 + y.norm_sqr()).sqrt();
            out.push([y / n, one / n]);
        }
    }
    if out.len() != k {
        return Err(Error::RootFinding(format!("found {} roots for degree {k}", out.len())));
    }
    Ok(out)
}

/// Groups unit vectors within chordal distance `tol` of a cluster seed.
pub fn cluster<const N: usize>(pts: &[[C64; N]], tol: f64) -> Vec<([C64; N], usize)> {
    let mut out: Vec<([C64; N], usize)> = Vec::new();
    for p in pts {
        let hit = out
            .iter_mut()
            .find(|(q, _)| (1.0 - hdot(q, p).norm_sqr()).max(0.0).sqrt() <= tol);
        match hit {
            Some(slot) => slot.1 += 1,
            None => out.push((*p, 1)),
        }
    }
    out
}
