//! Weierstrass functions on the lattice `ℤ + τℤ`.
//!
//! Values are computed from Lambert-type q-series in a modulus reduced to the
//! standard SL(2,ℤ) domain, after reducing the argument to the period cell
//! around the origin. Periods are `ω₁ = 1`, `ω₂ = τ`, `ω₃ = 1 + τ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::modular::{reduce_standard, GammaMatrix};

type C = Complex64;

const I: C = C::new(0.0, 1.0);
const MAX_TERMS: usize = 400;

/// A point of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tau(C);

impl Tau {
    pub fn new(value: C) -> Result<Tau> {
        if !(value.im > 0.0) || !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Domain(format!("Im τ must be positive, got {value}")));
        }
        Ok(Tau(value))
    }

    pub fn value(self) -> C {
        self.0
    }
}

/// A representative in ℂ of a point of the torus.
pub type ComplexPoint = C;

/// `(ζ, ℘, ℘′, ℘″)` at `ω_k/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quarter {
    pub zeta: C,
    pub wp: C,
    pub wp1: C,
    pub wp2: C,
}

/// `ζ, ℘, ℘′, ℘″` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpValues {
    pub zeta: C,
    pub wp: C,
    pub wp1: C,
    pub wp2: C,
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    tau: C,
    q: C,
    eta1: C,
    eta2: C,
    gamma: GammaMatrix,
    /// Scale `1/(cτ+d)` carrying the original lattice onto the reduced one.
    lambda: C,
}

/// A torus with its precomputed invariants.
#[derive(Debug, Clone)]
pub struct LatticeContext {
    pub tau: C,
    pub q: C,
    pub eta1: C,
    pub eta2: C,
    pub eta3: C,
    pub e1: C,
    pub e2: C,
    pub e3: C,
    pub g2: C,
    pub g3: C,
    pub quarter: [Quarter; 3],
    pub precision_warning: Option<String>,
    pub config: Config,
    frame: Frame,
}

/// `e^z − 1` without cancellation for small `z`.
pub(crate) fn expm1c(z: C) -> C {
    let (s, c) = z.im.sin_cos();
    let em = z.re.exp_m1();
    let half = (z.im / 2.0).sin();
    C::new(em * c - 2.0 * half * half, (em + 1.0) * s)
}

/// Odd Jacobi theta function `θ₁(v) = 2 p^{1/4} Σ (−1)ⁿ p^{n(n+1)} sin((2n+1)v)`
/// with nome `p = e^{iπτ}` (principal fourth root).
pub fn theta1(v: C, nome: C) -> Result<C> {
    theta1_with_tol(v, nome, Config::default().series_tol)
}

fn theta1_with_tol(v: C, nome: C, tol: f64) -> Result<C> {
    if !(nome.norm() < 1.0) {
        return Err(Error::Domain(format!("theta series needs |q| < 1, got |q| = {}", nome.norm())));
    }
    let p4 = nome.powf(0.25);
    let mut sum = C::new(0.0, 0.0);
    for n in 0..MAX_TERMS as i64 {
        let pn = nome.powi((n * (n + 1)) as i32);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = pn * ((2 * n + 1) as f64 * v).sin() * sign;
        sum += term;
        let decaying = nome.norm().powi(2 * (n as i32 + 1)) * (2.0 * v.im.abs()).exp() < 1.0;
        if n > 0 && decaying && term.norm() <= tol * sum.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(p4 * sum * 2.0)
}

/// `[θ₁′(0), θ₁″(0), θ₁‴(0)]` for nome `p`.
pub fn theta1_derivatives_at_zero(nome: C) -> Result<[C; 3]> {
    if !(nome.norm() < 1.0) {
        return Err(Error::Domain(format!("theta series needs |q| < 1, got |q| = {}", nome.norm())));
    }
    let (d1, d3) = theta_odd_moments(|n| nome.powi((n * (n + 1)) as i32), nome.norm());
    let p4 = nome.powf(0.25);
    Ok([p4 * d1 * 2.0, C::new(0.0, 0.0), -p4 * d3 * 2.0])
}

/// `Σ(−1)ⁿ pⁿ⁽ⁿ⁺¹⁾(2n+1)` and `Σ(−1)ⁿ pⁿ⁽ⁿ⁺¹⁾(2n+1)³`.
fn theta_odd_moments(pow: impl Fn(i64) -> C, abs_nome: f64) -> (C, C) {
    let mut d1 = C::new(0.0, 0.0);
    let mut d3 = C::new(0.0, 0.0);
    for n in 0..MAX_TERMS as i64 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let k = (2 * n + 1) as f64;
        let pn = pow(n) * sign;
        d1 += pn * k;
        d3 += pn * (k * k * k);
        if n > 0 && abs_nome.powi((n * (n + 1)) as i32) * k * k * k < 1e-18 * d3.norm() {
            break;
        }
    }
    (d1, d3)
}

impl Frame {
    fn new(tau: C) -> Frame {
        let (gamma, rt) = if tau.im < 3f64.sqrt() / 2.0 {
            reduce_standard(tau)
        } else {
            (GammaMatrix::IDENTITY, tau)
        };
        let (d1, d3) = theta_odd_moments(|n| (I * PI * rt * (n * (n + 1)) as f64).exp(), (-PI * rt.im).exp());
        let eta1 = d3 / d1 * (PI * PI / 3.0);
        let eta2 = rt * eta1 - 2.0 * PI * I;
        Frame {
            tau: rt,
            q: (2.0 * PI * I * rt).exp(),
            eta1,
            eta2,
            gamma,
            lambda: gamma.automorphy(tau).inv(),
        }
    }

    /// Splits `w = w₀ + m + nτ` with `w₀` in the cell around the origin.
    fn split(&self, w: C) -> (C, f64, f64) {
        let n = (w.im / self.tau.im).round();
        let w1 = w - self.tau * n;
        let m = w1.re.round();
        (w1 - m, m, n)
    }

    fn lattice_distance(&self, w0: C) -> f64 {
        let mut best = f64::INFINITY;
        for i in -1..=1 {
            for j in -1..=1 {
                best = best.min((w0 - (self.tau * j as f64 + i as f64)).norm());
            }
        }
        best
    }

    /// `[ζ − η₁w₀, ℘ + η₁, ℘′, ℘″]` at a reduced point, before the η₁ terms.
    fn series(&self, w0: C, tol: f64) -> [C; 4] {
        // Leading term uses y = e^{±2πiw₀} with |y| ≤ 1.
        let flip = w0.im < 0.0;
        let arg = if flip { -2.0 * PI * I * w0 } else { 2.0 * PI * I * w0 };
        let y = arg.exp();
        let omy = -expm1c(arg);
        let sgn = if flip { -1.0 } else { 1.0 };
        let a0 = (C::new(1.0, 0.0) + y) / omy * sgn;
        let b0 = y / (omy * omy);
        let c0 = y * (C::new(1.0, 0.0) + y) / (omy * omy * omy) * sgn;
        let d0 = y * (y * y + y * 4.0 + 1.0) / (omy * omy * omy * omy);
        let x = (2.0 * PI * I * w0).exp();
        let xi = x.inv();
        let (mut sa, mut sb, mut sc, mut sd) = (C::default(), C::default(), C::default(), C::default());
        let scale = b0.norm().max(1.0);
        let mut qm = C::new(1.0, 0.0);
        for _ in 0..MAX_TERMS {
            qm *= self.q;
            let u = x * qm;
            let v = xi * qm;
            let (ou, ov) = (C::new(1.0, 0.0) - u, C::new(1.0, 0.0) - v);
            sa += u / ou - v / ov;
            sb += u / (ou * ou) + v / (ov * ov);
            sc += u * (u + 1.0) / (ou * ou * ou) - v * (v + 1.0) / (ov * ov * ov);
            sd += u * (u * u + u * 4.0 + 1.0) / (ou * ou * ou * ou) + v * (v * v + v * 4.0 + 1.0) / (ov * ov * ov * ov);
            if u.norm().max(v.norm()) < tol * scale {
                break;
            }
        }
        let pi2 = PI * PI;
        [
            -PI * I * a0 - 2.0 * PI * I * sa,
            -(b0 + sb) * (4.0 * pi2),
            -(c0 + sc) * (8.0 * pi2 * PI) * I,
            (d0 + sd) * (16.0 * pi2 * pi2),
        ]
    }

    fn sigma_reduced(&self, w0: C, tol: f64) -> C {
        let x = (2.0 * PI * I * w0).exp();
        let xi = x.inv();
        let mut prod = C::new(1.0, 0.0);
        let mut qm = C::new(1.0, 0.0);
        for _ in 0..MAX_TERMS {
            qm *= self.q;
            let u = x * qm;
            let v = xi * qm;
            let omq = C::new(1.0, 0.0) - qm;
            prod *= (C::new(1.0, 0.0) - u) * (C::new(1.0, 0.0) - v) / (omq * omq);
            if u.norm().max(v.norm()) < tol {
                break;
            }
        }
        (self.eta1 * w0 * w0 * 0.5).exp() * (w0 * PI).sin() / PI * prod
    }
}

impl LatticeContext {
    pub fn new(tau: C) -> Result<LatticeContext> {
        LatticeContext::with_config(tau, Config::default())
    }

    pub fn from_tau(tau: Tau) -> Result<LatticeContext> {
        LatticeContext::new(tau.value())
    }

    pub fn with_config(tau: C, config: Config) -> Result<LatticeContext> {
        let tau = Tau::new(tau)?.value();
        let frame = Frame::new(tau);
        let lam = frame.lambda;
        let g = frame.gamma;
        // 1 = a(cτ+d) − c(aτ+b) and τ = d(aτ+b) − b(cτ+d) in the reduced lattice.
        let eta1 = lam * (frame.eta1 * g.a as f64 - frame.eta2 * g.c as f64);
        let eta2 = lam * (frame.eta2 * g.d as f64 - frame.eta1 * g.b as f64);
        let mut precision_warning = None;
        if lam.norm() < 1e-3 || tau.im < 1e-4 {
            precision_warning = Some(format!(
                "Im τ = {:e}: reduction factor |cτ+d| = {:.3e} amplifies rounding",
                tau.im,
                lam.norm().recip()
            ));
        }
        let zero = C::default();
        let blank = Quarter { zeta: zero, wp: zero, wp1: zero, wp2: zero };
        let mut ctx = LatticeContext {
            tau,
            q: (2.0 * PI * I * tau).exp(),
            eta1,
            eta2,
            eta3: eta1 + eta2,
            e1: zero,
            e2: zero,
            e3: zero,
            g2: zero,
            g3: zero,
            quarter: [blank; 3],
            precision_warning,
            config,
            frame,
        };
        ctx.e1 = ctx.wp(ctx.omega(1) * 0.5)?;
        ctx.e2 = ctx.wp(ctx.omega(2) * 0.5)?;
        ctx.e3 = ctx.wp(ctx.omega(3) * 0.5)?;
        let (e1, e2, e3) = (ctx.e1, ctx.e2, ctx.e3);
        ctx.g2 = -(e1 * e2 + e1 * e3 + e2 * e3) * 4.0;
        ctx.g3 = e1 * e2 * e3 * 4.0;
        for k in 1..=3 {
            let v = ctx.values(ctx.omega(k) * 0.25)?;
            ctx.quarter[k - 1] = Quarter { zeta: v.zeta, wp: v.wp, wp1: v.wp1, wp2: v.wp2 };
        }
        Ok(ctx)
    }

    /// `ω₁ = 1`, `ω₂ = τ`, `ω₃ = 1 + τ`.
    pub fn omega(&self, k: usize) -> C {
        match k {
            1 => C::new(1.0, 0.0),
            2 => self.tau,
            3 => self.tau + 1.0,
            _ => panic!("period index {k} outside 1..=3"),
        }
    }

    pub fn eta(&self, k: usize) -> C {
        match k {
            1 => self.eta1,
            2 => self.eta2,
            3 => self.eta3,
            _ => panic!("period index {k} outside 1..=3"),
        }
    }

    pub fn e(&self, k: usize) -> C {
        match k {
            1 => self.e1,
            2 => self.e2,
            3 => self.e3,
            _ => panic!("half-period index {k} outside 1..=3"),
        }
    }

    pub fn quarter(&self, k: usize) -> Quarter {
        self.quarter[k - 1]
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn lattice_distance(&self, z: C) -> f64 {
        let (w0, _, _) = self.frame.split(z * self.frame.lambda);
        self.frame.lattice_distance(w0) / self.frame.lambda.norm()
    }

    /// `ζ, ℘, ℘′, ℘″` at `z` in one series pass.
    pub fn values(&self, z: C) -> Result<WpValues> {
        let f = &self.frame;
        let lam = f.lambda;
        let (w0, m, n) = f.split(z * lam);
        let dist = f.lattice_distance(w0) / lam.norm();
        if !(dist >= self.config.pole_floor) {
            return Err(Error::Pole { z, dist });
        }
        let [za, wpa, wp1, wp2] = f.series(w0, self.config.series_tol);
        let zeta_r = za + f.eta1 * w0 + f.eta1 * m + f.eta2 * n;
        let wp_r = wpa - f.eta1;
        let l2 = lam * lam;
        Ok(WpValues {
            zeta: zeta_r * lam,
            wp: wp_r * l2,
            wp1: wp1 * l2 * lam,
            wp2: wp2 * l2 * l2,
        })
    }

    pub fn wp(&self, z: C) -> Result<C> {
        self.values(z).map(|v| v.wp)
    }

    pub fn wp_prime(&self, z: C) -> Result<C> {
        self.values(z).map(|v| v.wp1)
    }

    pub fn wp_second(&self, z: C) -> Result<C> {
        self.values(z).map(|v| v.wp2)
    }

    /// `℘‴ = 12℘℘′`.
    pub fn wp_third(&self, z: C) -> Result<C> {
        self.values(z).map(|v| v.wp * v.wp1 * 12.0)
    }

    pub fn zeta_w(&self, z: C) -> Result<C> {
        self.values(z).map(|v| v.zeta)
    }

    /// σ is entire; no pole check.
    pub fn sigma_w(&self, z: C) -> C {
        let f = &self.frame;
        let lam = f.lambda;
        let (w0, m, n) = f.split(z * lam);
        let base = f.sigma_reduced(w0, self.config.series_tol);
        let (mi, ni) = (m as i64, n as i64);
        let sign = if (mi + ni + mi * ni).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let eta = f.eta1 * m + f.eta2 * n;
        let shift = C::new(m, 0.0) + f.tau * n;
        base * (eta * (w0 + shift * 0.5)).exp() * sign / lam
    }

    /// `log σ(z)` on a branch continuous along real-line cuts; for quotients of
    /// σ with large arguments.
    pub fn log_sigma(&self, z: C) -> C {
        let f = &self.frame;
        let lam = f.lambda;
        let (w0, m, n) = f.split(z * lam);
        let base = f.sigma_reduced(w0, self.config.series_tol);
        let (mi, ni) = (m as i64, n as i64);
        let odd = (mi + ni + mi * ni).rem_euclid(2) != 0;
        let eta = f.eta1 * m + f.eta2 * n;
        let shift = C::new(m, 0.0) + f.tau * n;
        let mut out = base.ln() + eta * (w0 + shift * 0.5) - lam.ln();
        if odd {
            out += I * PI;
        }
        out
    }
}
