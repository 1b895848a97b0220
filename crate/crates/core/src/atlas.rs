//! τ-zeros of `Z(r,s,·)` and `Z^{(m_k)}(r,s,·)`, region predicates, the degenerate
//! curves `C_i` and sampled geometry of `Λ`.
//!
//! `F₀` is covered by three charts `τ = g(w)` with `w` in
//! `T = {0 ≤ Re w ≤ 1, |w| ≥ 1, |w−1| ≥ 1}` and `g ∈ {1, R, R²}`, `R(τ) = 1 − 1/τ`.
//! Each chart resolves one cusp, so Newton iterates near `0` and `1` behave like
//! iterates near `∞`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::Config;
use crate::elliptic::LatticeContext;
use crate::error::{Error, Result};
use crate::hecke::{hecke_z_ctx, hecke_z_real, hessian_functional, KIndex};
use crate::modular::{in_f0, GammaMatrix};

type C = Complex64;

/// Named regions of the `(r,s)` square and of the τ half plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionId {
    Square,
    Delta0,
    Delta1,
    Delta2,
    Delta3,
    SquareM1,
    SquareM2,
    SquareM3,
    /// `(r,s) ∈ ½ℤ²`, excluded from every region.
    HalfLattice,
    F,
    F0,
    Lambda,
    /// `λ_k F₀ − β_k` for the given k.
    ScaledF0(u8),
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Representative of `(r,s) mod ℤ²` in `[0,1)²`.
pub fn reduce_pair(r: f64, s: f64) -> (f64, f64) {
    (frac(r), frac(s))
}

/// Representative of `±(r,s) mod ℤ²` in `□ = [0,½]×[0,1]`.
pub fn square_rep(r: f64, s: f64) -> (f64, f64) {
    let (a, b) = reduce_pair(r, s);
    if a <= 0.5 {
        (a, b)
    } else {
        reduce_pair(-a, -b)
    }
}

pub fn in_half_lattice(r: f64, s: f64, tol: f64) -> bool {
    let near = |x: f64| ((2.0 * x).round() - 2.0 * x).abs() <= 2.0 * tol;
    near(r) && near(s)
}

fn delta(i: u8, r: f64, s: f64) -> bool {
    match i {
        0 => 0.0 < r && r < 0.5 && 0.0 < s && s < 0.5 && r + s > 0.5,
        1 => 0.5 < r && r < 1.0 && 0.0 < s && s < 0.5 && r + s > 1.0,
        2 => 0.5 < r && r < 1.0 && 0.0 < s && s < 0.5 && r + s < 1.0,
        _ => 0.0 < r && r < 0.5 && 0.0 < s && s < 0.5 && r + s < 0.5,
    }
}

fn square_m(k: u8, r: f64, s: f64) -> bool {
    match k {
        1 => 0.0 < s && s <= 0.5 && (((1.0 - s) / 2.0 < r && r < 0.5) || (0.5 < r && r < (2.0 - s) / 2.0)),
        2 => 0.0 < r && r < 1.0 && 0.0 < s && s < 0.5 && r + 2.0 * s > 1.0,
        _ => (0.0 < r && r < 0.5 && 0.0 < s && s < 0.5 && r < s) || delta(1, r, s),
    }
}

/// Region labels of `(r,s)`. Predicates are tested on both representatives of
/// `±(r,s) mod ℤ²` in `[0,1)²`, since `Z(−r,−s,τ) = −Z(r,s,τ)`.
pub fn region_of(r: f64, s: f64) -> Vec<RegionId> {
    if in_half_lattice(r, s, 0.0) {
        return vec![RegionId::HalfLattice];
    }
    let reps = [reduce_pair(r, s), reduce_pair(-r, -s)];
    let mut out = vec![RegionId::Square];
    let any = |f: &dyn Fn(f64, f64) -> bool| reps.iter().any(|&(a, b)| f(a, b));
    let labels = [
        (RegionId::Delta0, 0u8),
        (RegionId::Delta1, 1),
        (RegionId::Delta2, 2),
        (RegionId::Delta3, 3),
    ];
    for (id, i) in labels {
        if any(&|a, b| delta(i, a, b)) {
            out.push(id);
        }
    }
    for (id, k) in [(RegionId::SquareM1, 1u8), (RegionId::SquareM2, 2), (RegionId::SquareM3, 3)] {
        if any(&|a, b| square_m(k, a, b)) {
            out.push(id);
        }
    }
    out
}

pub fn in_region(r: f64, s: f64, id: RegionId) -> bool {
    region_of(r, s).contains(&id)
}

/// Labels of a modulus.
pub fn tau_regions(tau: C) -> Vec<RegionId> {
    let mut out = Vec::new();
    if crate::modular::in_f(tau, 0.0) {
        out.push(RegionId::F);
    }
    if in_f0(tau, 0.0) {
        out.push(RegionId::F0);
    }
    for k in KIndex::ALL {
        if in_f0(k.factor_tau(tau), 0.0) {
            out.push(RegionId::ScaledF0(k.get() as u8));
        }
    }
    out
}

/// A located zero `τ*` of `Z(r,s,·)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauZero {
    pub tau_star: C,
    pub residual: f64,
    pub newton_iterations: usize,
    pub derivative_at_zero: C,
}

/// Outcome of a zero search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroSearch {
    Found(TauZero),
    /// Grid minimum of `|Z|` above the certification threshold.
    NoneCertified { grid_min: f64 },
    /// Grid minimum inside the ambiguous band and no Newton run converged.
    Inconclusive { grid_min: f64, best: C },
}

impl ZeroSearch {
    pub fn zero(&self) -> Option<TauZero> {
        match self {
            ZeroSearch::Found(z) => Some(*z),
            _ => None,
        }
    }
}

/// Search controls for τ-zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Seeding grid per chart side.
    pub grid: usize,
    /// Chart truncation height for seeding.
    pub height: f64,
    /// Number of best seeds refined by Newton.
    pub seeds: usize,
    pub max_iter: usize,
    /// Grid minimum above which absence of zeros is certified.
    pub none_threshold: f64,
    /// Grid minimum below which a failed search is reported as an error.
    pub ambiguous_floor: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grid: 24,
            height: 3.0,
            seeds: 3,
            max_iter: 60,
            none_threshold: 1e-3,
            ambiguous_floor: 1e-6,
        }
    }
}

/// `1`, `R = (1 −1; 1 0)` and `R²`.
pub const CHARTS: [GammaMatrix; 3] = [
    GammaMatrix::IDENTITY,
    GammaMatrix { a: 1, b: -1, c: 1, d: 0 },
    GammaMatrix { a: 0, b: -1, c: 1, d: -1 },
];

fn in_top(w: C) -> bool {
    w.re >= 0.0 && w.re <= 1.0 && w.norm() >= 1.0 && (w - 1.0).norm() >= 1.0
}

/// Grid points of `T` up to `height`, per chart.
fn chart_grid(n: usize, height: f64) -> Vec<(usize, C)> {
    let lo = 3f64.sqrt() / 2.0;
    let mut pts = Vec::with_capacity(3 * n * n);
    for chart in 0..3 {
        for i in 0..n {
            for j in 0..n {
                let x = (i as f64 + 0.5) / n as f64;
                let y = lo + (height - lo) * (j as f64 + 0.5) / n as f64;
                let w = C::new(x, y);
                if in_top(w) {
                    pts.push((chart, w));
                }
            }
        }
    }
    pts
}

fn eval_chart(r: f64, s: f64, chart: usize, w: C, cfg: &Config) -> Result<(C, C)> {
    let g = CHARTS[chart];
    let tau = g.act(w);
    let j = g.automorphy(w);
    let (z, dz) = crate::hecke::hecke_z_real_floor(r, s, tau, cfg.pole_floor)?;
    Ok((z, dz / (j * j)))
}

/// Newton on `w ↦ Z(r,s,g(w))` from `w0` in chart `chart`.
pub fn newton_in_chart(r: f64, s: f64, chart: usize, w0: C, max_iter: usize, cfg: &Config) -> Result<TauZero> {
    let mut w = w0;
    let mut last = C::new(f64::NAN, f64::NAN);
    for it in 1..=max_iter {
        let (z, dz) = eval_chart(r, s, chart, w, cfg)?;
        last = z;
        if dz.norm() == 0.0 || !dz.norm().is_finite() {
            break;
        }
        let mut step = z / dz;
        let cap = 0.5 * w.im;
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        let next = w - step;
        if !(next.im > 0.0) || next.im > 60.0 || next.re.abs() > 6.0 {
            break;
        }
        w = next;
        if step.norm() < 1e-14 * w.norm().max(1.0) || z.norm() < 1e-15 {
            let g = CHARTS[chart];
            let tau = g.act(w);
            let (zv, dtau) = hecke_z_real(r, s, tau)?;
            return Ok(TauZero {
                tau_star: tau,
                residual: zv.norm(),
                newton_iterations: it,
                derivative_at_zero: dtau,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last: CHARTS[chart].act(w),
        residual: last.norm(),
    })
}

fn chart_of(tau: C) -> (usize, C) {
    for (i, g) in CHARTS.iter().enumerate() {
        let w = g.inverse().act(tau);
        if in_top(w) {
            return (i, w);
        }
    }
    (0, tau)
}

/// Newton from a τ seed, run in the chart containing the seed.
pub fn newton_tau(r: f64, s: f64, tau0: C, cfg: &Config) -> Result<TauZero> {
    let (chart, w0) = chart_of(tau0);
    newton_in_chart(r, s, chart, w0, 60, cfg)
}

fn validate_pair(r: f64, s: f64) -> Result<()> {
    if !r.is_finite() || !s.is_finite() {
        return Err(Error::Domain("(r,s) must be finite".into()));
    }
    if in_half_lattice(r, s, 1e-12) {
        return Err(Error::Domain(format!("({r},{s}) lies in ½ℤ²")));
    }
    Ok(())
}

fn accept(z: &TauZero, cfg: &Config) -> bool {
    in_f0(z.tau_star, 1e-9) && z.residual < cfg.zero_tol
}

/// Locates the zero of `Z(r,s,·)` in `F₀`, or certifies that the seeding grid stays
/// away from zero.
pub fn find_tau_zero(r: f64, s: f64, cfg: &Config) -> Result<ZeroSearch> {
    find_tau_zero_with(r, s, cfg, &SearchOptions::default(), None)
}

pub fn find_tau_zero_with(r: f64, s: f64, cfg: &Config, opt: &SearchOptions, seed: Option<C>) -> Result<ZeroSearch> {
    validate_pair(r, s)?;
    if let Some(t0) = seed {
        if let Ok(z) = newton_tau(r, s, t0, cfg) {
            if accept(&z, cfg) {
                return Ok(ZeroSearch::Found(z));
            }
        }
    }
    let grid = chart_grid(opt.grid, opt.height);
    let mut vals: Vec<(f64, usize, C)> = grid
        .par_iter()
        .filter_map(|&(chart, w)| eval_chart(r, s, chart, w, cfg).ok().map(|(z, _)| (z.norm(), chart, w)))
        .collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let grid_min = vals.first().map(|v| v.0).unwrap_or(f64::INFINITY);
    let mut last_err = None;
    for &(_, chart, w) in vals.iter().take(opt.seeds.max(1) * 4) {
        match newton_in_chart(r, s, chart, w, opt.max_iter, cfg) {
            Ok(z) if accept(&z, cfg) => return Ok(ZeroSearch::Found(z)),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    let best = vals.first().map(|v| CHARTS[v.1].act(v.2)).unwrap_or_default();
    if grid_min > opt.none_threshold {
        Ok(ZeroSearch::NoneCertified { grid_min })
    } else if grid_min >= opt.ambiguous_floor {
        Ok(ZeroSearch::Inconclusive { grid_min, best })
    } else {
        Err(last_err.unwrap_or(Error::NoConvergence {
            iterations: opt.max_iter,
            last: best,
            residual: grid_min,
        }))
    }
}

/// Distinct zeros in `F₀` reached by Newton from every point of an `n×n` grid per chart,
/// charts truncated at `Im w ≤ height`.
pub fn scan_zero_basins(r: f64, s: f64, n: usize, height: f64, cfg: &Config) -> Result<Vec<TauZero>> {
    validate_pair(r, s)?;
    let grid = chart_grid(n, height);
    let found: Vec<TauZero> = grid
        .par_iter()
        .filter_map(|&(chart, w)| newton_in_chart(r, s, chart, w, 60, cfg).ok())
        .filter(|z| accept(z, cfg))
        .collect();
    let mut distinct: Vec<TauZero> = Vec::new();
    for z in found {
        if !distinct.iter().any(|d| (d.tau_star - z.tau_star).norm() < 1e-6) {
            distinct.push(z);
        }
    }
    Ok(distinct)
}

/// Lower bound of `|Z(r,s,τ)|` over `Im τ ≥ h` from the cusp asymptote, for `s mod 1 ∈ (0,1)`.
pub fn cusp_lower_bound(r: f64, s: f64, h: f64) -> Option<f64> {
    let (_, s) = reduce_pair(r, s);
    if s <= 0.0 {
        return None;
    }
    let x = (-2.0 * PI * s * h).exp();
    let y = (-2.0 * PI * (1.0 - s) * h).exp();
    let q = (-2.0 * PI * h).exp();
    if x.max(y) >= 0.5 {
        return None;
    }
    // |πi(1+x)/(1−x) − πi| ≤ 2π|x|/(1−|x|); Lambert tail ≤ 2π Σ (x+y)qᵐ⁻¹/(1−…).
    let lead = 2.0 * PI * x / (1.0 - x);
    let tail = 2.0 * PI * (x * q / (1.0 - x * q) + y / (1.0 - y)) / (1.0 - q);
    Some(2.0 * PI * (s - 0.5).abs() - lead - tail)
}

/// Hecke factors of `Z^{(m_k)}`: pairs `(r_j, s_j)` at modulus `τ_k`.
pub fn premodular_factors(r: f64, s: f64, k: KIndex) -> [(f64, f64); 2] {
    match k.get() {
        1 => [(r, s / 2.0), (r, (s + 1.0) / 2.0)],
        2 => [(r / 2.0, s), ((r + 1.0) / 2.0, s)],
        _ => [((r - s) / 2.0, s), ((r - s + 1.0) / 2.0, s)],
    }
}

/// A zero of `Z^{(m_k)}(r,s,·)` with the factor it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremodularZero {
    pub factor: usize,
    /// The zero `τ̂ ∈ F₀` of the factor.
    pub factor_zero: TauZero,
    /// `τ` with `τ_k(τ) = τ̂`.
    pub tau: C,
    /// `|Z^{(m_k)}(r,s,τ)|`.
    pub residual: f64,
}

/// Zeros of `Z^{(m_k)}(r,s,·)` in `λ_k F₀ − β_k`, one per Hecke factor having a zero in `F₀`.
pub fn tau_zero_premodular(r: f64, s: f64, k: KIndex, cfg: &Config) -> Result<Vec<PremodularZero>> {
    validate_pair(r, s)?;
    let mut out = Vec::new();
    for (j, (a, b)) in premodular_factors(r, s, k).into_iter().enumerate() {
        if in_half_lattice(a, b, 1e-12) {
            continue;
        }
        if let ZeroSearch::Found(z) = find_tau_zero(a, b, cfg)? {
            let tau = k.from_factor_tau(z.tau_star);
            let ctx = LatticeContext::with_config(tau, *cfg)?;
            let v = crate::hecke::premodular_zmk(&ctx, C::new(r, 0.0), C::new(s, 0.0), k)?;
            out.push(PremodularZero { factor: j, factor_zero: z, tau, residual: v.norm() });
        }
    }
    Ok(out)
}

/// Cusps of `F₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cusp {
    Zero,
    One,
    Infinity,
}

/// Nearest cusp of `τ ∈ F₀` in the chart sense.
pub fn nearest_cusp(tau: C) -> Cusp {
    let (chart, _) = chart_of(tau);
    match chart {
        0 => Cusp::Infinity,
        1 => Cusp::One,
        _ => Cusp::Zero,
    }
}

/// Follows `τ^{(0)}(r,s)` toward a boundary point `(r₀,s₀)` of `Δ₀` and reports the
/// limiting cusp.
pub fn asymptotic_check(r0: f64, s0: f64, cfg: &Config) -> Result<(Cusp, Vec<C>)> {
    let centroid = (1.0 / 3.0, 1.0 / 3.0);
    let mut track = Vec::new();
    let mut seed = None;
    for &t in &[0.3, 0.1, 0.03, 0.01, 0.003] {
        let r = r0 + (centroid.0 - r0) * t;
        let s = s0 + (centroid.1 - s0) * t;
        let opt = SearchOptions::default();
        let z = find_tau_zero_with(r, s, cfg, &opt, seed)?
            .zero()
            .ok_or_else(|| Error::Degenerate(format!("no τ-zero found at ({r},{s})")))?;
        seed = Some(z.tau_star);
        track.push(z.tau_star);
    }
    let last = *track.last().expect("track is non-empty");
    Ok((nearest_cusp(last), track))
}

/// A sampled degenerate curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub i: usize,
    pub points: Vec<C>,
    /// Scan lines without a sign change.
    pub excluded: Vec<f64>,
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn functional(i: usize, tau: C) -> f64 {
    match LatticeContext::new(tau) {
        Ok(ctx) => hessian_functional(&ctx, i),
        Err(_) => f64::NAN,
    }
}

/// Sign changes of `f` on `[a,b]` sampled at `n` points, refined by bisection.
fn roots_on(a: f64, b: f64, n: usize, f: &(dyn Fn(f64) -> f64 + Sync)) -> Vec<f64> {
    let xs: Vec<f64> = (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for j in 0..n {
        if ys[j].is_finite() && ys[j + 1].is_finite() && (ys[j] > 0.0) != (ys[j + 1] > 0.0) {
            out.push(bisect(xs[j], xs[j + 1], f, 1e-12));
        }
    }
    out
}

/// Samples `C_i` by bisecting the Hessian functional along scan lines: vertical lines
/// `Re τ = x` for `C₁`, and horizontal lines `Im τ = y` on the right (`C₂`) or left
/// (`C₃`) half of `F₀`.
pub fn trace_degenerate_curve(i: usize, samples: usize) -> Result<Curve> {
    if samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    if !(1..=3).contains(&i) {
        return Err(Error::Domain(format!("curve index {i} outside 1..=3")));
    }
    let lines: Vec<f64> = if i == 1 {
        (0..samples).map(|j| 0.02 + 0.96 * j as f64 / (samples - 1) as f64).collect()
    } else {
        // Geometric spacing in Im τ. Below Im τ ≈ 0.1 the functional is a difference of
        // two O(Im τ⁻⁴) terms and the root position loses all digits.
        (0..samples)
            .map(|j| (0.12f64.ln() + (8.0f64.ln() - 0.12f64.ln()) * j as f64 / (samples - 1) as f64).exp())
            .collect()
    };
    let results: Vec<(f64, Option<C>)> = lines
        .par_iter()
        .map(|&p| {
            let pt = if i == 1 {
                let lo = (0.25 - (p - 0.5) * (p - 0.5)).max(0.0).sqrt() + 1e-9;
                let f = |y: f64| functional(1, C::new(p, y));
                roots_on(lo, 4.0, 400, &f).first().map(|&y| C::new(p, y))
            } else {
                let y = p;
                let half = if y < 0.5 { (0.25 - y * y).sqrt() } else { 0.0 };
                // C₂ lies in the right half of F₀, C₃ in the left.
                let (a, b) = if i == 2 { (0.5 + half + 1e-9, 1.0 - 1e-9) } else { (1e-9, 0.5 - half - 1e-9) };
                let f = |x: f64| functional(i, C::new(x, y));
                if b - a < 1e-9 {
                    None
                } else {
                    roots_on(a, b, 200, &f).first().map(|&x| C::new(x, y))
                }
            };
            (p, pt)
        })
        .collect();
    let mut curve = Curve { i, points: Vec::new(), excluded: Vec::new() };
    for (p, pt) in results {
        match pt {
            Some(t) => curve.points.push(t),
            None => curve.excluded.push(p),
        }
    }
    Ok(curve)
}

/// `b₀`: the crossing of `C₁` with `τ = ½ + ib/2`, `b ∈ (1, √3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct B0 {
    pub b0: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
}

pub fn compute_b0(tol: f64) -> Result<B0> {
    let f = |b: f64| functional(1, C::new(0.5, b / 2.0));
    let (mut lo, mut hi) = (1.0, 3f64.sqrt());
    let (flo, fhi) = (f(lo), f(hi));
    if (flo > 0.0) == (fhi > 0.0) {
        return Err(Error::Degenerate("Hessian functional has no sign change on (1, √3)".into()));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b0 = 0.5 * (lo + hi);
    Ok(B0 { b0, bracket: (lo, hi), residual: f(b0).abs() })
}

/// Tri-state verdict of a sampled existence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Exists,
    None,
    Inconclusive,
}

/// Result of testing `τ ∈ Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub verdict: Verdict,
    /// `(r,s) ∈ Δ₀` with `Z(r,s,τ) = 0`.
    pub witness: Option<(f64, f64)>,
    pub residual: f64,
    /// Smallest `|Z|` met among non-trivial candidates.
    pub min_abs: f64,
}

const DELTA0_CORNERS: [(f64, f64); 3] = [(0.5, 0.0), (0.0, 0.5), (0.5, 0.5)];

/// Newton on `(r,s) ↦ Z(r,s,τ)` deflated at the corners of `Δ₀`, where `Z` vanishes
/// identically in τ.
fn deflated_newton(ctx: &LatticeContext, r0: f64, s0: f64) -> Option<(f64, f64, f64)> {
    let (mut r, mut s) = (r0, s0);
    for _ in 0..80 {
        let z = hecke_z_ctx(ctx, C::new(r, 0.0), C::new(s, 0.0)).ok()?;
        let wp = ctx.wp(C::new(r, 0.0) + ctx.tau * s).ok()?;
        let zr = -wp - ctx.eta1;
        let zs = -wp * ctx.tau - ctx.eta2;
        // Deflation m(x) = Π (1 + 1/|x − c|²).
        let mut m = 1.0;
        let mut grad_ln = (0.0, 0.0);
        for &(cr, cs) in &DELTA0_CORNERS {
            let (dr, ds) = (r - cr, s - cs);
            let d2 = dr * dr + ds * ds;
            let f = 1.0 + 1.0 / d2;
            m *= f;
            let coef = -2.0 / (d2 * d2) / f;
            grad_ln.0 += coef * dr;
            grad_ln.1 += coef * ds;
        }
        // G = m·Z, ∂G = m(∂Z + Z ∂ln m).
        let gr = (zr + z * grad_ln.0) * m;
        let gs = (zs + z * grad_ln.1) * m;
        let g = z * m;
        let det = gr.re * gs.im - gs.re * gr.im;
        if det.abs() < 1e-300 {
            return None;
        }
        let dr = -(g.re * gs.im - gs.re * g.im) / det;
        let ds = -(gr.re * g.im - g.re * gr.im) / det;
        let len = (dr * dr + ds * ds).sqrt();
        let scale = if len > 0.1 { 0.1 / len } else { 1.0 };
        r += dr * scale;
        s += ds * scale;
        if !r.is_finite() || !s.is_finite() || r.abs() > 3.0 || s.abs() > 3.0 {
            return None;
        }
        if len < 1e-14 {
            let z = hecke_z_ctx(ctx, C::new(r, 0.0), C::new(s, 0.0)).ok()?;
            return Some((r, s, z.norm()));
        }
    }
    let z = hecke_z_ctx(ctx, C::new(r, 0.0), C::new(s, 0.0)).ok()?;
    Some((r, s, z.norm()))
}

/// Reduces `τ` into `F₀`; returns the reduced modulus and the matrix used.
pub fn reduce_to_f0(tau: C) -> (GammaMatrix, C) {
    if in_f0(tau, 0.0) {
        return (GammaMatrix::IDENTITY, tau);
    }
    crate::modular::reduce_to_f(tau)
}

/// Tests `τ ∈ Λ`: a grid-seeded Newton solve of `Z(r,s,τ) = 0` over `(r,s) ∈ Δ₀`.
/// The witness is reported in the frame of the reduced modulus.
pub fn lambda_membership(tau: C, cfg: &Config) -> Result<Membership> {
    let (_, tr) = reduce_to_f0(tau);
    let ctx = LatticeContext::with_config(tr, *cfg)?;
    if !in_f0(tr, 1e-12) {
        return Err(Error::Domain(format!("reduction left τ = {tr} outside F₀")));
    }
    let n = 16;
    let mut seeds = Vec::new();
    for i in 1..n {
        for j in 1..n {
            let (r, s) = (0.5 * i as f64 / n as f64, 0.5 * j as f64 / n as f64);
            if r + s > 0.5 + 0.5 / n as f64 {
                seeds.push((r, s));
            }
        }
    }
    let results: Vec<(f64, f64, f64)> = seeds.par_iter().filter_map(|&(r, s)| deflated_newton(&ctx, r, s)).collect();
    let mut best: Option<(f64, f64, f64)> = None;
    let mut min_abs = f64::INFINITY;
    for (r, s, res) in results {
        let (a, b) = square_rep(r, s);
        let corner_dist = DELTA0_CORNERS
            .iter()
            .map(|&(cr, cs)| ((a - cr).powi(2) + (b - cs).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        if corner_dist < 1e-6 || in_half_lattice(a, b, 1e-6) {
            continue;
        }
        min_abs = min_abs.min(res);
        if delta(0, a, b) && res < cfg.zero_tol && best.map_or(true, |bb| res < bb.2) {
            best = Some((a, b, res));
        }
    }
    Ok(match best {
        Some((a, b, res)) => Membership { verdict: Verdict::Exists, witness: Some((a, b)), residual: res, min_abs },
        None if min_abs < 1e-6 && min_abs.is_finite() => {
            Membership { verdict: Verdict::Inconclusive, witness: None, residual: min_abs, min_abs }
        }
        None => Membership { verdict: Verdict::None, witness: None, residual: min_abs, min_abs },
    })
}

/// One sample of the atlas: `(r,s) ∈ Δ₀` and its zero `τ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtlasRow {
    pub r: f64,
    pub s: f64,
    pub tau: C,
    pub residual: f64,
}

/// Zeros `τ^{(0)}(r,s)` over a uniform grid of `Δ₀`.
pub fn sample_lambda(grid: usize, cfg: &Config) -> Vec<AtlasRow> {
    let mut pts = Vec::new();
    for i in 1..grid {
        for j in 1..grid {
            let (r, s) = (0.5 * i as f64 / grid as f64, 0.5 * j as f64 / grid as f64);
            if r + s > 0.5 + 1e-12 {
                pts.push((r, s));
            }
        }
    }
    pts.par_iter()
        .filter_map(|&(r, s)| match find_tau_zero(r, s, cfg) {
            Ok(ZeroSearch::Found(z)) => Some(AtlasRow { r, s, tau: z.tau_star, residual: z.residual }),
            _ => None,
        })
        .collect()
}

/// SVG scatter of atlas samples with optional polylines for `C_i`, in the box
/// `0 ≤ Re τ ≤ 1`, `0 ≤ Im τ ≤ y_max`.
pub fn render_svg(rows: &[AtlasRow], curves: &[Curve], y_max: f64) -> String {
    let (w, h) = (600.0, 600.0 * y_max.min(3.0));
    let map = |t: C| ((t.re * w), h - (t.im / y_max * h));
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    out.push_str(&format!(
        "<path d=\"M 0 {h} A {r} {r} 0 0 1 {w} {h}\" fill=\"none\" stroke=\"#999\"/>\n",
        r = w / 2.0
    ));
    for row in rows {
        if row.tau.im <= y_max {
            let (x, y) = map(row.tau);
            out.push_str(&format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.5\" fill=\"#1f77b4\"/>\n"));
        }
    }
    let colors = ["#d62728", "#2ca02c", "#9467bd"];
    for c in curves {
        let mut pts: Vec<C> = c.points.iter().copied().filter(|t| t.im <= y_max).collect();
        if c.i == 1 {
            pts.sort_by(|a, b| a.re.total_cmp(&b.re));
        } else {
            pts.sort_by(|a, b| a.im.total_cmp(&b.im));
        }
        let path: Vec<String> = pts
            .iter()
            .map(|&t| {
                let (x, y) = map(t);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            path.join(" "),
            colors[(c.i - 1) % 3]
        ));
    }
    out.push_str("</svg>\n");
    out
}
