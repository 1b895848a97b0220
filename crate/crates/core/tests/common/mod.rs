//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const I: C = C::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random modulus with `|Re τ| ≤ 1` and `Im τ ∈ [lo, hi]`.
pub fn random_tau(rng: &mut impl Rng, lo: f64, hi: f64) -> C {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(lo..hi))
}

/// Random point `a + bτ` with `a, b ∈ [margin, 1−margin]`.
pub fn random_z(rng: &mut impl Rng, tau: C, margin: f64) -> C {
    let a = rng.gen_range(margin..1.0 - margin);
    let b = rng.gen_range(margin..1.0 - margin);
    c(a, 0.0) + tau * b
}

/// `Σ_{m∈ℤ, m≠−b} (m+b)^{−k}` over `|m| ≤ M` plus second-order Euler–Maclaurin tails.
fn row_sum(b: C, k: i32, skip_zero: bool) -> C {
    const M: i64 = 2000;
    let mut s = C::new(0.0, 0.0);
    for m in -M..=M {
        if skip_zero && m == 0 {
            continue;
        }
        s += (b + m as f64).powi(-k);
    }
    let kf = k as f64;
    let tail = |x: C| x.powf(1.0 - kf) / (kf - 1.0) - x.powf(-kf - 1.0) * (kf / 24.0);
    let edge = M as f64 + 0.5;
    // Σ_{m>M}(m+b)^{−k} and Σ_{m>M}(−m+b)^{−k} = (−1)^k Σ_{m>M}(m−b)^{−k}.
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    s + tail(b + edge) + tail(-b + edge) * sign
}

fn rows(tau: C) -> i64 {
    (40.0 / (2.0 * PI * tau.im)).ceil() as i64 + 2
}

/// ℘ by direct lattice summation.
pub fn lattice_wp(z: C, tau: C) -> C {
    let n_max = rows(tau);
    let mut s = row_sum(z, 2, false) - row_sum(c(0.0, 0.0), 2, true);
    for n in 1..=n_max {
        let nt = tau * n as f64;
        s += row_sum(z - nt, 2, false) + row_sum(z + nt, 2, false);
        s -= row_sum(-nt, 2, false) + row_sum(nt, 2, false);
    }
    s
}

/// Eisenstein-summed `G₂(τ) = Σ_n Σ_m' (m+nτ)^{−2}`, equal to η₁ for ω₁ = 1.
pub fn lattice_eta1(tau: C) -> C {
    eisenstein(tau, 2)
}

pub fn eisenstein(tau: C, k: i32) -> C {
    let n_max = rows(tau);
    let mut s = row_sum(c(0.0, 0.0), k, true);
    for n in 1..=n_max {
        let nt = tau * n as f64;
        s += row_sum(nt, k, false) + row_sum(-nt, k, false);
    }
    s
}

pub fn lattice_g2_g3(tau: C) -> (C, C) {
    (eisenstein(tau, 4) * 60.0, eisenstein(tau, 6) * 140.0)
}

/// θ₁(v|τ) by plain partial summation of the Fourier series.
pub fn theta1_brute(v: C, tau: C) -> C {
    let mut s = C::new(0.0, 0.0);
    for n in 0..60i32 {
        let e = (n as f64 + 0.5).powi(2);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        s += (I * PI * tau * e).exp() * ((2 * n + 1) as f64 * v).sin() * (2.0 * sign);
    }
    s
}

/// Green function of the torus up to an additive constant.
pub fn green(z: C, tau: C) -> f64 {
    -(theta1_brute(z * PI, tau).norm().ln()) / (2.0 * PI) + z.im * z.im / (2.0 * tau.im)
}

/// `∂G/∂z = (G_x − iG_y)/2` by central differences.
pub fn green_dz(z: C, tau: C, h: f64) -> C {
    let gx = (green(z + h, tau) - green(z - h, tau)) / (2.0 * h);
    let gy = (green(z + I * h, tau) - green(z - I * h, tau)) / (2.0 * h);
    c(gx, -gy) * 0.5
}

/// Determinant of the real Hessian of G at `z` by central differences.
pub fn green_hessian_det(z: C, tau: C, h: f64) -> f64 {
    let g = |dx: f64, dy: f64| green(z + c(dx, dy), tau);
    let g0 = g(0.0, 0.0);
    let gxx = (g(h, 0.0) - 2.0 * g0 + g(-h, 0.0)) / (h * h);
    let gyy = (g(0.0, h) - 2.0 * g0 + g(0.0, -h)) / (h * h);
    let gxy = (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4.0 * h * h);
    gxx * gyy - gxy * gxy
}

/// Relative residual `|a−b| / max(1, |a|, |b|)`.
pub fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}
