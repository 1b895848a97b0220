//! SL(2,ℤ) matrices and reduction of moduli.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An integer matrix `(a b; c d)` with determinant one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GammaMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl GammaMatrix {
    pub const IDENTITY: GammaMatrix = GammaMatrix { a: 1, b: 0, c: 0, d: 1 };
    pub const S: GammaMatrix = GammaMatrix { a: 0, b: -1, c: 1, d: 0 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<GammaMatrix> {
        if a * d - b * c != 1 {
            return Err(Error::Domain(format!("det({a},{b};{c},{d}) != 1")));
        }
        Ok(GammaMatrix { a, b, c, d })
    }

    pub fn translation(n: i64) -> GammaMatrix {
        GammaMatrix { a: 1, b: n, c: 0, d: 1 }
    }

    /// Matrix product `self * other`.
    pub fn mul(self, o: GammaMatrix) -> GammaMatrix {
        GammaMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(self) -> GammaMatrix {
        GammaMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `(aτ+b)/(cτ+d)`.
    pub fn act(self, tau: Complex64) -> Complex64 {
        (tau * self.a as f64 + self.b as f64) / self.automorphy(tau)
    }

    /// `cτ+d`.
    pub fn automorphy(self, tau: Complex64) -> Complex64 {
        tau * self.c as f64 + self.d as f64
    }

    /// `(s′,r′) = (s,r)·γ⁻¹`, returned as `(r′,s′)`.
    pub fn act_pair<T>(self, r: T, s: T) -> (T, T)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T>,
    {
        let r2 = r * self.a as f64 - s * self.b as f64;
        let s2 = s * self.d as f64 - r * self.c as f64;
        (r2, s2)
    }
}

/// Returns `γ` with `γτ` in the closed standard domain `|Re| ≤ ½, |τ| ≥ 1`.
pub fn reduce_standard(tau: Complex64) -> (GammaMatrix, Complex64) {
    let mut g = GammaMatrix::IDENTITY;
    let mut t = tau;
    for _ in 0..200 {
        let n = (t.re + 0.5).floor() as i64;
        if n != 0 {
            let tr = GammaMatrix::translation(-n);
            g = tr.mul(g);
            t = tr.act(t);
        }
        if t.norm_sqr() < 1.0 - 1e-15 {
            g = GammaMatrix::S.mul(g);
            t = GammaMatrix::S.act(t);
        } else {
            break;
        }
    }
    (g, t)
}

/// Returns `γ` with `γτ` in `F = {0 ≤ Re τ < 1, |τ| ≥ 1, |τ−1| > 1}` up to boundary rounding.
pub fn reduce_to_f(tau: Complex64) -> (GammaMatrix, Complex64) {
    let (mut g, mut t) = reduce_standard(tau);
    if t.re < 0.0 {
        let tr = GammaMatrix::translation(1);
        g = tr.mul(g);
        t = tr.act(t);
    }
    (g, t)
}

/// Membership in `F₀ = {0 ≤ Re τ ≤ 1, |τ−½| ≥ ½}` with slack `tol`.
pub fn in_f0(tau: Complex64, tol: f64) -> bool {
    tau.im > 0.0
        && tau.re >= -tol
        && tau.re <= 1.0 + tol
        && (tau - Complex64::new(0.5, 0.0)).norm() >= 0.5 - tol
}

/// Membership in `F`, with `ρ = e^{iπ/3}` included.
pub fn in_f(tau: Complex64, tol: f64) -> bool {
    let rho = Complex64::new(0.5, 3f64.sqrt() / 2.0);
    if (tau - rho).norm() <= tol {
        return true;
    }
    tau.im > 0.0
        && tau.re >= -tol
        && tau.re < 1.0 + tol
        && tau.norm() >= 1.0 - tol
        && (tau - 1.0).norm() > 1.0 - tol
}
