//! Second-order forward differentiation in up to four real variables.
//!
//! Test functions are written once against [`Jet`] and [`CJet`]; evaluating them
//! on seeded chart coordinates yields the value, gradient and Hessian exactly,
//! which is all the `dd^c` machinery needs.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const NV: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; NV],
    pub h: [[f64; NV]; NV],
}

impl Jet {
    pub fn constant(v: f64) -> Jet {
        Jet { v, g: [0.0; NV], h: [[0.0; NV]; NV] }
    }

    pub fn variable(v: f64, i: usize) -> Jet {
        let mut j = Jet::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Jet {
        let mut out = Jet::constant(f);
        for i in 0..NV {
            out.g[i] = df * self.g[i];
            for k in 0..NV {
                out.h[i][k] = df * self.h[i][k] + d2f * self.g[i] * self.g[k];
            }
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let x = self.v;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn recip(&self) -> Jet {
        let x = self.v;
        self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    pub fn powi(&self, n: i32) -> Jet {
        let x = self.v;
        let nf = n as f64;
        let d1 = if n == 0 { 0.0 } else { nf * x.powi(n - 1) };
        let d2 = if n <= 1 { 0.0 } else { nf * (nf - 1.0) * x.powi(n - 2) };
        self.chain(x.powi(n), d1, d2)
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut out = *self;
        out.v *= c;
        for i in 0..NV {
            out.g[i] *= c;
            for k in 0..NV {
                out.h[i][k] *= c;
            }
        }
        out
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = *self;
        out.v += c;
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out.v += o.v;
        for i in 0..NV {
            out.g[i] += o.g[i];
            for k in 0..NV {
                out.h[i][k] += o.h[i][k];
            }
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + o.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..NV {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for k in 0..NV {
                out.h[i][k] = self.v * o.h[i][k]
                    + o.v * self.h[i][k]
                    + self.g[i] * o.g[k]
                    + o.g[i] * self.g[k];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

/// Complex-valued jet: real and imaginary parts carried separately.
#[derive(Clone, Copy, Debug)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn constant(c: Complex64) -> CJet {
        CJet { re: Jet::constant(c.re), im: Jet::constant(c.im) }
    }

    /// Seeds the complex coordinate `c` as the variables `(2k, 2k+1)`.
    pub fn coordinate(c: Complex64, k: usize) -> CJet {
        CJet { re: Jet::variable(c.re, 2 * k), im: Jet::variable(c.im, 2 * k + 1) }
    }

    pub fn conj(&self) -> CJet {
        CJet { re: self.re, im: -self.im }
    }

    pub fn norm_sqr(&self) -> Jet {
        self.re * self.re + self.im * self.im
    }

    pub fn scale(&self, c: Complex64) -> CJet {
        CJet {
            re: self.re.scale(c.re) - self.im.scale(c.im),
            im: self.re.scale(c.im) + self.im.scale(c.re),
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.v, self.im.v)
    }
}

impl Add for CJet {
    type Output = CJet;
    fn add(self, o: CJet) -> CJet {
        CJet { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for CJet {
    type Output = CJet;
    fn sub(self, o: CJet) -> CJet {
        CJet { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for CJet {
    type Output = CJet;
    fn mul(self, o: CJet) -> CJet {
        CJet {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// Wirtinger block `∂_a ∂̄_b f` of a real jet in `n` complex variables.
pub fn levi_matrix(f: &Jet, n: usize) -> crate::manifold::Herm {
    let h = &f.h;
    let entry = |a: usize, b: usize| {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        Complex64::new(h[xa][xb] + h[ya][yb], h[xa][yb] - h[ya][xb]) * 0.25
    };
    if n == 1 {
        crate::manifold::Herm::scalar(entry(0, 0).re)
    } else {
        crate::manifold::Herm { a11: entry(0, 0).re, a22: entry(1, 1).re, a12: entry(0, 1) }
    }
}

/// Sum of absolute first partials in real coordinates.
pub fn gradient_l1(f: &Jet, n: usize) -> f64 {
    f.g[..2 * n].iter().map(|x| x.abs()).sum()
}

/// Sum of absolute second partials in real coordinates.
pub fn hessian_l1(f: &Jet, n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..2 * n {
        for k in 0..2 * n {
            s += f.h[i][k].abs();
        }
    }
    s
}
