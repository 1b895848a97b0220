//! Algebraic layer of the Lamé-type equation `y″ = q(z;T,E) y` with
//! `q = 2(℘(z+ω_k/4) + ℘(z−ω_k/4)) + T(ζ(z+ω_k/4) − ζ(z−ω_k/4)) − E`.
//!
//! Quantities written `℘, ℘′, ℘″, ζ` without argument are taken at `ω_k/4`.
//! A point `P = (T, C)` of the spectral curve uses the branch `√(−Q(T)) = −iC`,
//! which is the sign making `Φ_e′(a) = 2iC` at the zeros `a` of `ψ(P;·)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::elliptic::LatticeContext;
use crate::error::{Error, Result};
use crate::hecke::{hecke_z_ctx, KIndex};

type C = Complex64;
const I: C = C::new(0.0, 1.0);

fn others(k: KIndex) -> (usize, usize) {
    match k.get() {
        1 => (2, 3),
        2 => (1, 3),
        _ => (1, 2),
    }
}

fn small(v: C, scale: f64) -> bool {
    v.norm() < 1e-8 * (1.0 + scale)
}

/// Parameters of `L(m_k, T, E, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LameParams {
    pub k: KIndex,
    pub t: C,
    pub e: C,
    pub tau: C,
}

impl LameParams {
    /// `E = −T²/4 + (η_k/2)T + e_k`.
    pub fn constrained(ctx: &LatticeContext, k: KIndex, t: C) -> LameParams {
        LameParams { k, t, e: constrained_energy(ctx, k, t), tau: ctx.tau }
    }

    pub fn is_constrained(&self, ctx: &LatticeContext) -> bool {
        let e = constrained_energy(ctx, self.k, self.t);
        small(self.e - e, e.norm())
    }
}

pub fn constrained_energy(ctx: &LatticeContext, k: KIndex, t: C) -> C {
    let j = k.get();
    -t * t / 4.0 + ctx.eta(j) * t / 2.0 + ctx.e(j)
}

/// `T(T² − 2η_kT + 4E − 4e_k)`; zero exactly when the equation is apparent.
pub fn apparent_obstruction(ctx: &LatticeContext, p: &LameParams) -> C {
    let j = p.k.get();
    p.t * (p.t * p.t - ctx.eta(j) * p.t * 2.0 + p.e * 4.0 - ctx.e(j) * 4.0)
}

/// `q(z;T,E)` from its definition.
pub fn potential(ctx: &LatticeContext, p: &LameParams, z: C) -> Result<C> {
    let w = ctx.omega(p.k.get()) / 4.0;
    let a = ctx.values(z + w)?;
    let b = ctx.values(z - w)?;
    Ok((a.wp + b.wp) * 2.0 + (a.zeta - b.zeta) * p.t - p.e)
}

/// `q′(z;T,E)`.
pub fn potential_prime(ctx: &LatticeContext, p: &LameParams, z: C) -> Result<C> {
    let w = ctx.omega(p.k.get()) / 4.0;
    let a = ctx.values(z + w)?;
    let b = ctx.values(z - w)?;
    Ok((a.wp1 + b.wp1) * 2.0 - (a.wp - b.wp) * p.t)
}

/// `q = a₋₂x⁻² + a₋₁x⁻¹ + a₀` with `x = ℘(z) − ℘`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialCoeffs {
    pub a_m2: C,
    pub a_m1: C,
    pub a0: C,
}

impl PotentialCoeffs {
    pub fn eval(&self, x: C) -> C {
        self.a_m2 / (x * x) + self.a_m1 / x + self.a0
    }
}

pub fn potential_coeffs(ctx: &LatticeContext, p: &LameParams) -> PotentialCoeffs {
    let n = ctx.quarter(p.k.get());
    PotentialCoeffs {
        a_m2: n.wp1 * n.wp1 * 2.0,
        a_m1: n.wp2 * 2.0 - n.wp1 * p.t,
        a0: -p.e + n.zeta * p.t * 2.0 + n.wp * 4.0,
    }
}

/// The even elliptic solution `Φ_e = d₂x⁻² + d₁x⁻¹ + d₀` of the symmetric-square equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEven {
    pub k: KIndex,
    pub t: C,
    pub d2: C,
    pub d1: C,
    pub d0: C,
}

/// `Φ_e` and its first three `z`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiJet {
    pub phi: C,
    pub d1: C,
    pub d2: C,
    pub d3: C,
}

impl PhiEven {
    /// `d₀(T)d₁(T) − a₀(T)d₀(T)²`.
    pub fn spectral_q(&self, ctx: &LatticeContext) -> C {
        let a0 = potential_coeffs(ctx, &LameParams::constrained(ctx, self.k, self.t)).a0;
        self.d0 * self.d1 - a0 * self.d0 * self.d0
    }

    pub fn eval_x(&self, x: C) -> C {
        self.d2 / (x * x) + self.d1 / x + self.d0
    }

    pub fn jet(&self, ctx: &LatticeContext, z: C) -> Result<PhiJet> {
        let n = ctx.quarter(self.k.get());
        let v = ctx.values(z)?;
        let x = v.wp - n.wp;
        let scale = n.wp.norm().max(1.0);
        if x.norm() < ctx.config.pole_floor * scale {
            return Err(Error::Pole { z, dist: x.norm() });
        }
        let (x2, x3) = (x * x, x * x * x);
        let f = self.d2 / x2 + self.d1 / x + self.d0;
        let fx = -self.d2 * 2.0 / x3 - self.d1 / x2;
        let fxx = self.d2 * 6.0 / (x2 * x2) + self.d1 * 2.0 / x3;
        let fxxx = -self.d2 * 24.0 / (x2 * x3) - self.d1 * 6.0 / (x2 * x2);
        let wp3 = v.wp * v.wp1 * 12.0;
        Ok(PhiJet {
            phi: f,
            d1: fx * v.wp1,
            d2: fxx * v.wp1 * v.wp1 + fx * v.wp2,
            d3: fxxx * v.wp1 * v.wp1 * v.wp1 + fxx * v.wp1 * v.wp2 * 3.0 + fx * wp3,
        })
    }

    pub fn eval(&self, ctx: &LatticeContext, z: C) -> Result<C> {
        self.jet(ctx, z).map(|j| j.phi)
    }
}

/// `d₀(T,E)` for general `E`.
pub fn d0_general(ctx: &LatticeContext, k: KIndex, t: C, e: C) -> C {
    let n = ctx.quarter(k.get());
    let p1s = n.wp1 * n.wp1;
    (p1s * e * 4.0 + p1s * t * t * 3.0 - n.zeta * p1s * t * 8.0 + n.wp * p1s * 32.0 - n.wp2 * n.wp2 * 3.0) / 4.0
}

/// `Φ_e` under the constraint on `E`, with `d₀` in its reduced form.
pub fn phi_even(ctx: &LatticeContext, k: KIndex, t: C) -> PhiEven {
    let j = k.get();
    let n = ctx.quarter(j);
    let p1s = n.wp1 * n.wp1;
    PhiEven {
        k,
        t,
        d2: p1s * p1s,
        d1: p1s * (n.wp1 * t + n.wp2),
        d0: (p1s * t * t * 2.0 + n.wp1 * n.wp2 * t * 2.0 + (n.wp * 8.0 + ctx.e(j)) * p1s * 4.0
            - n.wp2 * n.wp2 * 3.0)
            / 4.0,
    }
}

/// `Q(T)` from `d₀d₁ − a₀d₀²`.
pub fn spectral_q1(ctx: &LatticeContext, k: KIndex, t: C) -> C {
    phi_even(ctx, k, t).spectral_q(ctx)
}

/// `Q(T) = −(℘′⁴/16)(T² − 12e_k)(T² − 4e_k + 4e_i)(T² − 4e_k + 4e_{i′})`.
pub fn spectral_q2(ctx: &LatticeContext, k: KIndex, t: C) -> C {
    let j = k.get();
    let (i, ip) = others(k);
    let n = ctx.quarter(j);
    let t2 = t * t;
    let ek = ctx.e(j);
    -n.wp1.powi(4) / 16.0 * (t2 - ek * 12.0) * (t2 - ek * 4.0 + ctx.e(i) * 4.0) * (t2 - ek * 4.0 + ctx.e(ip) * 4.0)
}

/// Both evaluation paths of `Q(T)`.
pub fn spectral_q(ctx: &LatticeContext, k: KIndex, t: C) -> (C, C) {
    (spectral_q1(ctx, k, t), spectral_q2(ctx, k, t))
}

/// Magnitude against which `Q(T)` is compared to zero.
fn q_scale(ctx: &LatticeContext, k: KIndex, t: C) -> f64 {
    let n = ctx.quarter(k.get());
    let e = ctx.e1.norm().max(ctx.e2.norm()).max(ctx.e3.norm());
    n.wp1.norm().powi(4) / 16.0 * (t.norm().powi(2) + 12.0 * e).powi(3)
}

/// A point of `Γ(τ) = {C² = Q(T)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub t: C,
    pub c: C,
}

impl SpectralPoint {
    /// The point over `T` with `C` the principal root of `Q(T)`.
    pub fn over(ctx: &LatticeContext, k: KIndex, t: C) -> SpectralPoint {
        SpectralPoint { t, c: spectral_q2(ctx, k, t).sqrt() }
    }

    pub fn dual(self) -> SpectralPoint {
        SpectralPoint { t: self.t, c: -self.c }
    }

    /// `√(−Q(T))` on the branch attached to this point.
    pub fn root(self) -> C {
        -I * self.c
    }

    pub fn residual(self, ctx: &LatticeContext, k: KIndex) -> f64 {
        (self.c * self.c - spectral_q2(ctx, k, self.t)).norm()
    }
}

/// `(℘(σ), ℘′(σ), κ)` and the recovered monodromy coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyData {
    pub wp_sigma: C,
    pub wp1_sigma: C,
    pub kappa: C,
    pub sigma: C,
    pub r: C,
    pub s: C,
}

/// Solves `r + sτ = σ`, `rη₁ + sη₂ = ζ(σ) − κ` with the Legendre relation.
pub fn rs_from_sigma_kappa(ctx: &LatticeContext, sigma: C, zeta_sigma: C, kappa: C) -> (C, C) {
    rs_from_sum_rate(ctx, sigma, zeta_sigma - kappa)
}

/// Solves `r + sτ = a`, `rη₁ + sη₂ = c`.
pub fn rs_from_sum_rate(ctx: &LatticeContext, a: C, c: C) -> (C, C) {
    let det = ctx.eta2 - ctx.tau * ctx.eta1;
    ((a * ctx.eta2 - ctx.tau * c) / det, (c - ctx.eta1 * a) / det)
}

/// `σ` with `℘(σ) = w`, and `℘′(σ) = w1` when given. Newton seeded from a grid over
/// the period cell.
pub fn wp_inverse(ctx: &LatticeContext, w: C, w1: Option<C>) -> Result<C> {
    let tau = ctx.tau;
    let n = 12;
    let mut seeds: Vec<(f64, C)> = Vec::with_capacity(n * n + 2);
    for i in 0..n {
        for j in 0..n {
            let z = C::new((i as f64 + 0.5) / n as f64, 0.0) + tau * ((j as f64 + 0.5) / n as f64);
            if let Ok(v) = ctx.values(z) {
                seeds.push(((v.wp - w).norm() / (1.0 + w.norm()), z));
            }
        }
    }
    if w.norm() > 1.0 {
        // ℘(z) ≈ z⁻² near the lattice.
        let z = w.sqrt().inv();
        seeds.push((0.0, z));
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, C)> = None;
    for &(_, z0) in seeds.iter().take(6) {
        let mut z = z0;
        for _ in 0..60 {
            let v = match ctx.values(z) {
                Ok(v) => v,
                Err(_) => break,
            };
            let f = v.wp - w;
            if v.wp1.norm() == 0.0 {
                break;
            }
            let mut step = f / v.wp1;
            let cap = 0.25 * tau.im.min(1.0);
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            z -= step;
            if step.norm() < 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        if let Ok(v) = ctx.values(z) {
            let res = (v.wp - w).norm() / (1.0 + w.norm());
            if best.map_or(true, |b| res < b.0) {
                best = Some((res, z));
            }
            if res < 1e-13 {
                break;
            }
        }
    }
    let (res, mut z) = best.ok_or_else(|| Error::Inversion(w))?;
    if res > 1e-9 {
        return Err(Error::Inversion(w));
    }
    if let Some(w1) = w1 {
        let d = ctx.wp_prime(z)?;
        if (d + w1).norm() < (d - w1).norm() {
            z = -z;
        }
    }
    Ok(z)
}

/// `(℘(σ), ℘′(σ), κ)` at `P` and the monodromy coordinates `(r(P), s(P))`.
pub fn monodromy_data(ctx: &LatticeContext, k: KIndex, p: SpectralPoint) -> Result<MonodromyData> {
    let j = k.get();
    let ek = ctx.e(j);
    let n = ctx.quarter(j);
    let d = p.t * p.t - ek * 12.0;
    let h = ek * ek * 12.0 - ctx.g2;
    if small(d, ek.norm() * 12.0) {
        return Err(Error::Degenerate("T² = 12e_k: σ(P) = 0 and (r,s) ≡ (0,0)".into()));
    }
    let root = p.root();
    let p1s = n.wp1 * n.wp1;
    let wp_sigma = ek + h / d;
    let wp1_sigma = -h * 4.0 / (p1s * d * d) * root;
    let kappa = root * 2.0 / (p1s * d);
    let sigma = wp_inverse(ctx, wp_sigma, Some(wp1_sigma)).map_err(|e| e.at("monodromy data"))?;
    let zeta = ctx.zeta_w(sigma)?;
    let (r, s) = rs_from_sigma_kappa(ctx, sigma, zeta, kappa);
    Ok(MonodromyData { wp_sigma, wp1_sigma, kappa, sigma, r, s })
}

/// Monodromy data at the point over `T` with the principal root `C = √Q(T)`.
pub fn monodromy_data_from_t(ctx: &LatticeContext, k: KIndex, t: C) -> Result<MonodromyData> {
    monodromy_data(ctx, k, SpectralPoint::over(ctx, k, t))
}

/// A solution `T` of the recovery system; `−T` gives the same `(r,s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TSolution {
    pub point: SpectralPoint,
    /// `|Z(r_k, s_k, τ)|` at the input.
    pub shifted_z: f64,
    /// Residual of the second recovery equation.
    pub residual: f64,
}

/// Finds `P = (T, C)` with `(r(P), s(P)) = (r, s)`, which exists iff `Z(r_k,s_k,τ) = 0`.
pub fn solve_t_from_rs(ctx: &LatticeContext, k: KIndex, r: C, s: C, tol: f64) -> Result<Option<TSolution>> {
    let j = k.get();
    let sigma = r + ctx.tau * s;
    let half = ctx.omega(j) / 2.0;
    if ctx.lattice_distance(sigma) < 1e-12 {
        return Err(Error::Domain("σ = r + sτ is a lattice point".into()));
    }
    if ctx.lattice_distance(sigma - half) < 1e-12 {
        return Err(Error::Domain("σ = ω_k/2: Z(r_k,s_k,τ) has a pole".into()));
    }
    let (rk, sk) = k.shift(r, s);
    let zk = hecke_z_ctx(ctx, rk, sk)?;
    if zk.norm() > tol {
        return Ok(None);
    }
    let ek = ctx.e(j);
    let h = ek * ek * 12.0 - ctx.g2;
    let v = ctx.values(sigma)?;
    let kappa = v.zeta - r * ctx.eta1 - s * ctx.eta2;
    let t2 = ek * 12.0 + h / (v.wp - ek);
    let t = t2.sqrt();
    let d = t2 - ek * 12.0;
    let residual = (v.wp1 * d + h * kappa * 2.0).norm() / (1.0 + (v.wp1 * d).norm());
    let p1s = ctx.quarter(j).wp1.powi(2);
    // κ = 2√(−Q)/(℘′²(T²−12e_k)) and √(−Q) = −iC.
    let root = kappa * p1s * d / 2.0;
    let point = SpectralPoint { t, c: I * root };
    Ok(Some(TSolution { point, shifted_z: zk.norm(), residual }))
}

/// Data of `ψ(P;z) = e^{cz}σ(z−a₁)σ(z−a₂) / (σ(z−ω_k/4)σ(z+ω_k/4))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BakerAkhiezerData {
    pub k: KIndex,
    pub point: SpectralPoint,
    pub a1: C,
    pub a2: C,
    pub c: C,
    pub lambda1: C,
    pub lambda2: C,
    pub r: C,
    pub s: C,
    /// Residual of the algebraic constraint on `(a₁, a₂)`.
    pub constraint_residual: f64,
}

impl BakerAkhiezerData {
    pub fn dual(&self) -> BakerAkhiezerData {
        BakerAkhiezerData {
            point: self.point.dual(),
            a1: -self.a1,
            a2: -self.a2,
            c: -self.c,
            lambda1: self.lambda1.inv(),
            lambda2: self.lambda2.inv(),
            r: -self.r,
            s: -self.s,
            ..*self
        }
    }
}

/// Zeros `a₁, a₂` of `ψ(P;·)` and the rate `c`.
pub fn zeros_a1a2(ctx: &LatticeContext, k: KIndex, p: SpectralPoint) -> Result<BakerAkhiezerData> {
    let j = k.get();
    let n = ctx.quarter(j);
    let phi = phi_even(ctx, k, p.t);
    if small(phi.d0, phi.d1.norm().max(phi.d2.norm())) {
        return Err(Error::Degenerate("d₀(T) = 0: Φ_e has a zero at the lattice".into()));
    }
    let sum = (n.wp * phi.d0 * 2.0 - phi.d1) / phi.d0;
    let prod = (n.wp * n.wp * phi.d0 - n.wp * phi.d1 + phi.d2) / phi.d0;
    let disc = (sum * sum - prod * 4.0).sqrt();
    let x1 = (sum + disc) / 2.0;
    let x2 = (sum - disc) / 2.0;
    if small(x1 - x2, x1.norm().max(x2.norm())) {
        return Err(Error::Degenerate("℘(a₁) = ℘(a₂)".into()));
    }
    let root = p.root();
    let y1 = -root * 2.0 * (n.wp - x1).powi(2) / (phi.d0 * (x1 - x2));
    let y2 = root * 2.0 * (n.wp - x2).powi(2) / (phi.d0 * (x1 - x2));
    let a1 = wp_inverse(ctx, x1, Some(y1)).map_err(|e| e.at("zero a₁"))?;
    let a2 = wp_inverse(ctx, x2, Some(y2)).map_err(|e| e.at("zero a₂"))?;
    let w = ctx.omega(j) / 4.0;
    let z = |u: C| ctx.zeta_w(u);
    let c = p.t / 2.0 + ctx.eta(j) / 2.0 + z(a1 - w)? + z(a2 - w)?;
    let lhs = (z(a2 + w)? + z(a2 - w)?) / 2.0;
    let rhs = (z(a1 + w)? + z(a1 - w)?) / 2.0 - z(a1 - a2)?;
    let constraint_residual = (lhs - rhs).norm() / (1.0 + lhs.norm());
    let (r, s) = rs_from_sum_rate(ctx, a1 + a2, c);
    Ok(BakerAkhiezerData {
        k,
        point: p,
        a1,
        a2,
        c,
        lambda1: (-I * 2.0 * PI * s).exp(),
        lambda2: (I * 2.0 * PI * r).exp(),
        r,
        s,
        constraint_residual,
    })
}

fn ba_log(ctx: &LatticeContext, data: &BakerAkhiezerData, z: C) -> Result<C> {
    let w = ctx.omega(data.k.get()) / 4.0;
    for pole in [w, -w] {
        let dist = ctx.lattice_distance(z - pole);
        if dist < ctx.config.pole_floor {
            return Err(Error::Pole { z, dist });
        }
    }
    Ok(data.c * z + ctx.log_sigma(z - data.a1) + ctx.log_sigma(z - data.a2)
        - ctx.log_sigma(z - w)
        - ctx.log_sigma(z + w))
}

/// `ψ(P;z)` up to the normalization fixed by the σ-quotient.
pub fn baker_akhiezer_eval(ctx: &LatticeContext, data: &BakerAkhiezerData, z: C) -> Result<C> {
    ba_log(ctx, data, z).map(|l| l.exp())
}

/// `ψ(P;z)/ψ(P;z₀)`.
pub fn baker_akhiezer_ratio(ctx: &LatticeContext, data: &BakerAkhiezerData, z: C, z0: C) -> Result<C> {
    Ok((ba_log(ctx, data, z)? - ba_log(ctx, data, z0)?).exp())
}

/// `ψ′/ψ` from the σ-quotient.
pub fn baker_akhiezer_log_derivative(ctx: &LatticeContext, data: &BakerAkhiezerData, z: C) -> Result<C> {
    let w = ctx.omega(data.k.get()) / 4.0;
    Ok(data.c + ctx.zeta_w(z - data.a1)? + ctx.zeta_w(z - data.a2)? - ctx.zeta_w(z - w)? - ctx.zeta_w(z + w)?)
}

/// `φ(P;z) = (iC + ½Φ_e′)/Φ_e`.
pub fn phi_log_derivative(ctx: &LatticeContext, k: KIndex, p: SpectralPoint, z: C) -> Result<C> {
    let j = phi_even(ctx, k, p.t).jet(ctx, z)?;
    Ok((I * p.c + j.d1 / 2.0) / j.phi)
}

/// Monodromy type of `L(m_k, T, E, τ)` at `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonodromyClass {
    CompletelyReducible { r: C, s: C },
    /// `(r,s) ∈ ½ℤ²`; the extra datum of the non-diagonal normal form is not computed.
    NotCompletelyReducible { r: f64, s: f64 },
}

/// Classifies by `Q(T) ≠ 0`; the degenerate case is resolved to the factor of `Q` that
/// vanishes.
pub fn classify_point(ctx: &LatticeContext, k: KIndex, p: SpectralPoint) -> Result<MonodromyClass> {
    let q = spectral_q2(ctx, k, p.t);
    let scale = q_scale(ctx, k, p.t);
    if q.norm() > 1e-8 * (1.0 + scale) {
        let d = monodromy_data(ctx, k, p)?;
        return Ok(MonodromyClass::CompletelyReducible { r: d.r, s: d.s });
    }
    let j = k.get();
    let ek = ctx.e(j);
    let t2 = p.t * p.t;
    let mut cands = vec![((t2 - ek * 12.0).norm(), (0.0, 0.0))];
    let (i, ip) = others(k);
    for m in [i, ip] {
        let half = match m {
            1 => (0.5, 0.0),
            2 => (0.0, 0.5),
            _ => (0.5, 0.5),
        };
        cands.push(((t2 - ek * 4.0 + ctx.e(m) * 4.0).norm(), half));
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (r, s) = cands[0].1;
    Ok(MonodromyClass::NotCompletelyReducible { r, s })
}
