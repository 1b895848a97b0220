//! The Hecke form `Z(r,s,τ) = ζ(r+sτ) − rη₁ − sη₂`, its pre-modular relatives and
//! the Green-function quantities derived from it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::elliptic::{expm1c, LatticeContext};
use crate::error::{Error, Result};
use crate::modular::{reduce_standard, GammaMatrix};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Index `k ∈ {1,2,3}` of the second singular point `ω_k/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KIndex(u8);

impl KIndex {
    pub const ALL: [KIndex; 3] = [KIndex(1), KIndex(2), KIndex(3)];

    pub fn new(k: u8) -> Result<KIndex> {
        if (1..=3).contains(&k) {
            Ok(KIndex(k))
        } else {
            Err(Error::Domain(format!("k must be 1, 2 or 3, got {k}")))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// The exponent tuple `m_k`.
    pub fn m_tuple(self) -> [u32; 4] {
        match self.0 {
            1 => [1, 1, 0, 0],
            2 => [1, 0, 1, 0],
            _ => [1, 0, 0, 1],
        }
    }

    /// `(r_k, s_k)`.
    pub fn shift<T: std::ops::Add<f64, Output = T>>(self, r: T, s: T) -> (T, T) {
        match self.0 {
            1 => (r + 0.5, s + 0.0),
            2 => (r + 0.0, s + 0.5),
            _ => (r + 0.5, s + 0.5),
        }
    }

    /// `(λ_k, β_k)`.
    pub fn lambda_beta(self) -> (f64, f64) {
        match self.0 {
            1 => (0.5, 0.0),
            2 => (2.0, 0.0),
            _ => (2.0, 1.0),
        }
    }

    /// The modulus `τ_k ∈ {2τ, τ/2, (1+τ)/2}` of the factorized form.
    pub fn factor_tau(self, tau: C) -> C {
        match self.0 {
            1 => tau * 2.0,
            2 => tau * 0.5,
            _ => (tau + 1.0) * 0.5,
        }
    }

    /// Inverse of [`factor_tau`](Self::factor_tau).
    pub fn from_factor_tau(self, tk: C) -> C {
        match self.0 {
            1 => tk * 0.5,
            2 => tk * 2.0,
            _ => tk * 2.0 - 1.0,
        }
    }
}

impl GammaMatrix {
    /// The `k′` with `e_{k′}(γτ) = (cτ+d)² e_k(τ)`.
    pub fn transported_index(self, k: KIndex) -> KIndex {
        let class = |x: i64, y: i64| match (x.rem_euclid(2), y.rem_euclid(2)) {
            (0, 1) => 1,
            (1, 0) => 2,
            _ => 3,
        };
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let sources = [class(c, d), class(a, b), class(a + c, b + d)];
        let kp = sources.iter().position(|&src| src == k.0).expect("parity classes form a permutation");
        KIndex(kp as u8 + 1)
    }
}

/// `(r′, s′, τ′, cτ+d)` with `Z(r′,s′,τ′) = (cτ+d)·Z(r,s,τ)`.
pub fn modular_transform(r: C, s: C, tau: C, gamma: GammaMatrix) -> (C, C, C, C) {
    let (r2, s2) = gamma.act_pair(r, s);
    (r2, s2, gamma.act(tau), gamma.automorphy(tau))
}

fn is_real(x: C) -> bool {
    x.im == 0.0
}

/// `Z(r,s,τ)`; the q-expansion serves real pairs, the ζ-definition everything else.
pub fn hecke_z(r: C, s: C, tau: C) -> Result<C> {
    if is_real(r) && is_real(s) {
        hecke_z_real(r.re, s.re, tau).map(|(z, _)| z)
    } else {
        let ctx = LatticeContext::new(tau)?;
        hecke_z_ctx(&ctx, r, s)
    }
}

/// `Z(r,s,τ)` through `ζ` in an existing context.
pub fn hecke_z_ctx(ctx: &LatticeContext, r: C, s: C) -> Result<C> {
    let z = r + s * ctx.tau;
    Ok(ctx.zeta_w(z)? - r * ctx.eta1 - s * ctx.eta2)
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `Z(r,s,τ)` and `∂Z/∂τ` for real `(r,s)` from the q-expansion, after moving τ into the
/// standard domain.
pub fn hecke_z_real(r: f64, s: f64, tau: C) -> Result<(C, C)> {
    hecke_z_real_floor(r, s, tau, crate::Config::default().pole_floor)
}

pub fn hecke_z_real_floor(r: f64, s: f64, tau: C, pole_floor: f64) -> Result<(C, C)> {
    if !(tau.im > 0.0) {
        return Err(Error::Domain(format!("Im τ must be positive, got {tau}")));
    }
    let (g, tr) = if tau.im < 3f64.sqrt() / 2.0 {
        reduce_standard(tau)
    } else {
        (GammaMatrix::IDENTITY, tau)
    };
    let (r2, s2) = g.act_pair(r, s);
    let (rr, ss) = (frac(r2), frac(s2));
    let j = g.automorphy(tau);
    let zr = C::new(rr, 0.0) + tr * ss;
    let mut dist = f64::INFINITY;
    for (a, b) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        dist = dist.min((zr - (tr * b + a)).norm());
    }
    if !(dist * j.norm() >= pole_floor) {
        return Err(Error::Pole {
            z: C::new(r, 0.0) + tau * s,
            dist: dist * j.norm(),
        });
    }
    let (zv, dv) = z_series(rr, ss, tr);
    // Z(τ) = Z′(γτ)/(cτ+d), differentiated in τ.
    let z = zv / j;
    let dz = dv / (j * j * j) - zv * g.c as f64 / (j * j);
    Ok((z, dz))
}

/// q-expansion of `Z` and `∂Z/∂τ` for `s ∈ [0,1)`.
fn z_series(r: f64, s: f64, tau: C) -> (C, C) {
    let two_pi_i = 2.0 * PI * I;
    let zarg = two_pi_i * (C::new(r, 0.0) + tau * s);
    let x = zarg.exp();
    let omx = -expm1c(zarg);
    let mut z = two_pi_i * s - PI * I * (C::new(1.0, 0.0) + x) / omx;
    let mut dz = x / (omx * omx) * s;
    let mut sum = C::new(0.0, 0.0);
    for m in 1..400 {
        let mf = m as f64;
        let ua = zarg + two_pi_i * tau * mf;
        let va = -zarg + two_pi_i * tau * mf;
        let (u, v) = (ua.exp(), va.exp());
        let (ou, ov) = (-expm1c(ua), -expm1c(va));
        sum += u / ou - v / ov;
        dz += u / (ou * ou) * (s + mf) - v / (ov * ov) * (mf - s);
        if u.norm().max(v.norm()) < 1e-18 {
            break;
        }
    }
    z -= two_pi_i * sum;
    (z, dz * (4.0 * PI * PI))
}

/// `Z^{(m_k)} = Z² − ℘(r+sτ) + e_k`.
pub fn premodular_zmk(ctx: &LatticeContext, r: C, s: C, k: KIndex) -> Result<C> {
    let z = hecke_z_ctx(ctx, r, s)?;
    let wp = ctx.wp(r + s * ctx.tau)?;
    Ok(z * z - wp + ctx.e(k.get()))
}

/// `Z^{(n,0,0,0)}` for `n ∈ {1,2,3}`.
pub fn premodular_zn000(ctx: &LatticeContext, r: C, s: C, n: u8) -> Result<C> {
    let z = hecke_z_ctx(ctx, r, s)?;
    let v = ctx.values(r + s * ctx.tau)?;
    let (p, p1) = (v.wp, v.wp1);
    match n {
        1 => Ok(z),
        2 => Ok(z.powi(3) - p * z * 3.0 - p1),
        3 => Ok(z.powi(6) - p * z.powi(4) * 15.0 - p1 * z.powi(3) * 20.0
            + (ctx.g2 * (27.0 / 4.0) - p * p * 45.0) * z * z
            - p * p1 * z * 12.0
            - p1 * p1 * 1.25),
        _ => Err(Error::Domain(format!("Z^(n,0,0,0) is implemented for n ≤ 3, got {n}"))),
    }
}

/// Direction of a half-step translation of `(r,s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    S,
    R,
}

/// Residual of `Z(r,s+½) = Z(r,s) + ℘′/(2(℘−e₂))` (or the `r`-shift with `e₁`).
pub fn translation_identity(ctx: &LatticeContext, r: C, s: C, dir: Shift) -> Result<C> {
    let v = ctx.values(r + s * ctx.tau)?;
    let (shifted, e) = match dir {
        Shift::S => (hecke_z_ctx(ctx, r, s + 0.5)?, ctx.e2),
        Shift::R => (hecke_z_ctx(ctx, r + 0.5, s)?, ctx.e1),
    };
    let denom = (v.wp - e) * 2.0;
    if denom.norm() < ctx.config.pole_floor {
        return Err(Error::Pole { z: r + s * ctx.tau, dist: denom.norm() });
    }
    Ok(shifted - hecke_z_ctx(ctx, r, s)? - v.wp1 / denom)
}

/// Real coordinates `(r,s)` of `z = r + sτ`.
pub fn real_coordinates(z: C, tau: C) -> (f64, f64) {
    let s = z.im / tau.im;
    (z.re - s * tau.re, s)
}

/// `−4π ∂G/∂z`, which equals `Z(r,s,τ)` for `z = r + sτ`.
pub fn green_gradient(ctx: &LatticeContext, z: C) -> Result<C> {
    let (r, s) = real_coordinates(z, ctx.tau);
    hecke_z_ctx(ctx, C::new(r, 0.0), C::new(s, 0.0))
}

/// `(π/Im τ)² − |e_i + η₁ − π/Im τ|²`, a positive multiple of `det D²G(ω_i/2)`.
pub fn green_hessian_degeneracy(i: usize, tau: C) -> Result<f64> {
    let ctx = LatticeContext::new(tau)?;
    Ok(hessian_functional(&ctx, i))
}

pub fn hessian_functional(ctx: &LatticeContext, i: usize) -> f64 {
    let a = PI / ctx.tau.im;
    a * a - (ctx.e(i) + ctx.eta1 - a).norm_sqr()
}
