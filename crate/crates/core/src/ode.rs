//! Direct checks on `y″ = q(z;T,E) y`: Frobenius series at the poles `±ω_k/4` and the
//! monodromy of a fundamental system carried around the period cycles by DOP853.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use ode_solvers::{Dop853, OutputType, SVector, System};

use crate::elliptic::LatticeContext;
use crate::error::{Error, Result};
use crate::hecke::KIndex;
use crate::spectral::{classify_point, potential, LameParams, MonodromyClass, SpectralPoint};

type C = Complex64;
const I: C = C::new(0.0, 1.0);

/// Highest Frobenius coefficient computed.
pub const FROBENIUS_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusReport {
    pub singularity: C,
    /// Right-hand side of the recursion at the exponent gap `m = 3`.
    pub obstruction: C,
    /// `c₀ = 1, c₁, …` of `y = Σ c_m u^{m−1}`, with `c₃ = 0`.
    pub coefficients: Vec<C>,
}

/// `c_j` with `℘(u) = u⁻² + Σ_{j≥2} c_j u^{2j−2}`, indices `0..=n` (`c₀ = c₁ = 0`).
fn wp_laurent(ctx: &LatticeContext, n: usize) -> Vec<C> {
    let mut c = vec![C::new(0.0, 0.0); n.max(3) + 1];
    c[2] = ctx.g2 / 20.0;
    c[3] = ctx.g3 / 28.0;
    for j in 4..=n {
        let s: C = (2..=j - 2).map(|m| c[m] * c[j - m]).sum();
        c[j] = s * 3.0 / ((2 * j + 1) as f64 * (j - 3) as f64);
    }
    c
}

/// Taylor coefficients of `℘(p+u)` through `u^n`, from `℘″ = 6℘² − g₂/2`.
fn wp_taylor(ctx: &LatticeContext, p: C, n: usize) -> Result<Vec<C>> {
    let v = ctx.values(p)?;
    let mut a = vec![C::new(0.0, 0.0); n.max(1) + 1];
    a[0] = v.wp;
    a[1] = v.wp1;
    for m in 0..n.saturating_sub(1) {
        let mut s: C = (0..=m).map(|i| a[i] * a[m - i]).sum::<C>() * 6.0;
        if m == 0 {
            s -= ctx.g2 / 2.0;
        }
        a[m + 2] = s / ((m + 2) * (m + 1)) as f64;
    }
    Ok(a)
}

/// Regular part `Σ b_n u^n` of `q(s₀+u)` at `s₀ = ±ω_k/4`, through `u^n`, plus the
/// coefficient of `u⁻¹`. The `u⁻²` coefficient is 2.
fn laurent_at(ctx: &LatticeContext, p: &LameParams, s0: C, n: usize) -> Result<(C, Vec<C>)> {
    let w = ctx.omega(p.k.get()) / 4.0;
    // ε = −1 at +ω_k/4 (the pole comes from −ζ(z−w)), +1 at −ω_k/4.
    let eps = if (s0 - w).norm() < (s0 + w).norm() { -1.0 } else { 1.0 };
    let other = s0 * 2.0;
    let a = wp_taylor(ctx, other, n + 1)?;
    let zeta_p = ctx.values(other)?.zeta;
    let lw = wp_laurent(ctx, n / 2 + 2);
    let mut b = vec![C::new(0.0, 0.0); n + 1];
    for (i, bi) in b.iter_mut().enumerate() {
        // 2℘(u) regular part and 2℘(u + 2s₀).
        if i % 2 == 0 && i >= 2 {
            *bi += lw[i / 2 + 1] * 2.0;
        }
        *bi += a[i] * 2.0;
        // −εTζ(u + 2s₀) with ζ(p+u) = ζ(p) − Σ a_m u^{m+1}/(m+1).
        let zt = if i == 0 { zeta_p } else { -a[i - 1] / i as f64 };
        *bi -= zt * p.t * eps;
        // εTζ(u) regular part: −Σ c_j u^{2j−1}/(2j−1).
        if i % 2 == 1 && i >= 3 {
            let j = (i + 1) / 2;
            *bi -= lw[j] * p.t * eps / (2 * j - 1) as f64;
        }
    }
    b[0] -= p.e;
    Ok((p.t * eps, b))
}

/// Frobenius series `y = Σ c_m u^{m−1}` at both poles of `q`.
pub fn frobenius_apparent(ctx: &LatticeContext, p: &LameParams) -> Result<[FrobeniusReport; 2]> {
    let w = ctx.omega(p.k.get()) / 4.0;
    let one = |s0: C| -> Result<FrobeniusReport> {
        let (bm1, b) = laurent_at(ctx, p, s0, FROBENIUS_ORDER - 2)?;
        let mut c = vec![C::new(1.0, 0.0)];
        let mut obstruction = C::new(0.0, 0.0);
        for j in 1..=FROBENIUS_ORDER {
            let mut rhs = bm1 * c[j - 1];
            for n in 0..=j.saturating_sub(2) {
                if j >= 2 {
                    rhs += b[n] * c[j - 2 - n];
                }
            }
            let lhs = ((j as f64 - 1.0) * (j as f64 - 2.0)) - 2.0;
            if j == 3 {
                obstruction = rhs;
                c.push(C::new(0.0, 0.0));
            } else {
                c.push(rhs / lhs);
            }
        }
        Ok(FrobeniusReport { singularity: s0, obstruction, coefficients: c })
    };
    Ok([one(w)?, one(-w)?])
}

pub type Mat2 = [[C; 2]; 2];

pub const IDENTITY: Mat2 = [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

pub fn mat_det(a: &Mat2) -> C {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn mat_inverse(a: &Mat2) -> Result<Mat2> {
    let d = mat_det(a);
    if d.norm() < 1e-300 {
        return Err(Error::Degenerate("singular basis matrix".into()));
    }
    Ok([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn mat_norm(a: &Mat2) -> f64 {
    a.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Monodromy along `z → z+1` and `z → z+τ`, acting on the column of basis solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleMonodromy {
    pub m1: Mat2,
    pub m2: Mat2,
    pub t1: C,
    pub t2: C,
}

impl CycleMonodromy {
    fn from(m1: Mat2, m2: Mat2) -> CycleMonodromy {
        CycleMonodromy { m1, m2, t1: m1[0][0] + m1[1][1], t2: m2[0][0] + m2[1][1] }
    }

    /// Frobenius norm of `M₁M₂ − M₂M₁`.
    pub fn commutator(&self) -> f64 {
        let a = mat_mul(&self.m1, &self.m2);
        let b = mat_mul(&self.m2, &self.m1);
        let mut d = a;
        for i in 0..2 {
            for j in 0..2 {
                d[i][j] -= b[i][j];
            }
        }
        mat_norm(&d)
    }

    pub fn det_defect(&self) -> f64 {
        (mat_det(&self.m1) - 1.0).norm().max((mat_det(&self.m2) - 1.0).norm())
    }
}

/// One piece of an integration path, parametrized by `t ∈ [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Line { from: C, to: C },
    Arc { center: C, radius: f64, start: f64, sweep: f64 },
}

impl Piece {
    pub fn point(&self, t: f64) -> C {
        match *self {
            Piece::Line { from, to } => from + (to - from) * t,
            Piece::Arc { center, radius, start, sweep } => center + C::from_polar(radius, start + sweep * t),
        }
    }

    pub fn velocity(&self, t: f64) -> C {
        match *self {
            Piece::Line { from, to } => to - from,
            Piece::Arc { radius, start, sweep, .. } => I * C::from_polar(radius * sweep, start + sweep * t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    /// Minimum distance from the poles below which a detour is inserted.
    pub clearance: f64,
    /// Detour radius as a fraction of the shorter period.
    pub detour: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { clearance: 0.08, detour: 0.05 }
    }
}

/// `z₀ = 0.31 + 0.43τ`.
pub fn base_point(tau: C) -> C {
    tau * 0.43 + 0.31
}

/// Poles of `q` (translates of `±ω_k/4`) within `reach` of the segment `[a,b]`,
/// with their foot parameter on the segment and distance.
fn poles_near(ctx: &LatticeContext, k: KIndex, a: C, b: C, reach: f64) -> Vec<(f64, f64, C)> {
    let w = ctx.omega(k.get()) / 4.0;
    let tau = ctx.tau;
    let len = (b - a).norm();
    let span = ((len + 2.0) / tau.im.min(1.0)).ceil() as i64 + 1;
    let n0 = (a.im / tau.im).round() as i64;
    let m0 = (a - tau * n0 as f64).re.round() as i64;
    let mut out = Vec::new();
    for n in n0 - span..=n0 + span {
        for m in m0 - span..=m0 + span {
            for sgn in [1.0, -1.0] {
                let s = w * sgn + tau * n as f64 + m as f64;
                let t = (((s - a) * (b - a).conj()).re / (len * len)).clamp(0.0, 1.0);
                let d = (a + (b - a) * t - s).norm();
                if d < reach {
                    out.push((t, d, s));
                }
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// The segment `[a,b]` with semicircular detours around nearby poles.
pub fn plan_segment(ctx: &LatticeContext, k: KIndex, a: C, b: C, opt: &PathOptions) -> Result<Vec<Piece>> {
    let len = (b - a).norm();
    let rho = opt.detour * ctx.tau.norm().min(1.0);
    let u = (b - a) / len;
    let mut pieces = Vec::new();
    let mut cursor = a;
    let mut cursor_t = 0.0;
    for (t, _, s) in poles_near(ctx, k, a, b, opt.clearance) {
        let foot = a + (b - a) * t;
        if (s - a).norm() < opt.clearance || (s - b).norm() < opt.clearance {
            return Err(Error::Domain(format!("path endpoint within {} of the pole {s}", opt.clearance)));
        }
        let (t0, t1) = (t - rho / len, t + rho / len);
        if t0 < cursor_t || t1 > 1.0 {
            return Err(Error::Integration(format!("overlapping detours near {s}; re-plan the path")));
        }
        pieces.push(Piece::Line { from: cursor, to: a + (b - a) * t0 });
        // Bulge to the side away from the pole.
        let away = if ((s - foot) * (I * u).conj()).re > 0.0 { -1.0 } else { 1.0 };
        pieces.push(Piece::Arc { center: foot, radius: rho, start: u.arg() + PI, sweep: -PI * away });
        cursor = a + (b - a) * t1;
        cursor_t = t1;
    }
    pieces.push(Piece::Line { from: cursor, to: b });
    Ok(pieces)
}

/// Polyline through `waypoints`, each leg planned with [`plan_segment`].
pub fn plan_path(ctx: &LatticeContext, k: KIndex, waypoints: &[C], opt: &PathOptions) -> Result<Vec<Piece>> {
    let mut out = Vec::new();
    for leg in waypoints.windows(2) {
        out.extend(plan_segment(ctx, k, leg[0], leg[1], opt)?);
    }
    Ok(out)
}

// The path parameter rides along as the last component: DOP853 in `ode_solvers` only
// handles autonomous right-hand sides correctly.
type State = SVector<f64, 9>;

struct Transport<'a> {
    ctx: &'a LatticeContext,
    params: &'a LameParams,
    piece: Piece,
    failure: &'a Cell<Option<C>>,
}

fn pack(m: &Mat2, t: f64) -> State {
    State::from_iterator(m.iter().flatten().flat_map(|x| [x.re, x.im]).chain([t]))
}

fn unpack(y: &State) -> Mat2 {
    let c = |i: usize| C::new(y[2 * i], y[2 * i + 1]);
    [[c(0), c(1)], [c(2), c(3)]]
}

impl System<f64, State> for Transport<'_> {
    fn system(&self, _: f64, y: &State, dy: &mut State) {
        let t = y[8];
        let z = self.piece.point(t);
        let v = self.piece.velocity(t);
        let q = match potential(self.ctx, self.params, z) {
            Ok(q) => q,
            Err(_) => {
                self.failure.set(Some(z));
                C::new(0.0, 0.0)
            }
        };
        let f = unpack(y);
        // Rows are (y, y′); columns are basis solutions.
        let d = [[f[1][0] * v, f[1][1] * v], [f[0][0] * q * v, f[0][1] * q * v]];
        *dy = pack(&d, 1.0);
    }
}

/// Carries the fundamental matrix `[[y₁, y₂], [y₁′, y₂′]]` along `path`.
pub fn transport(ctx: &LatticeContext, params: &LameParams, path: &[Piece], start: Mat2) -> Result<Mat2> {
    let rtol = ctx.config.ode_rtol;
    let mut y = pack(&start, 0.0);
    for &piece in path {
        let scale = y.rows(0, 8).amax().max(1.0);
        let failure = Cell::new(None);
        let sys = Transport { ctx, params, piece, failure: &failure };
        let mut solver = Dop853::new(sys, 0.0, 1.0, 1.0, y, rtol, rtol * 1e-3 * scale);
        solver.set_output(OutputType::Sparse);
        solver
            .integrate()
            .map_err(|e| Error::Integration(format!("{e} on {piece:?}; re-plan the path")))?;
        if let Some(z) = failure.get() {
            return Err(Error::Integration(format!("pole hit at {z}; re-plan the path")));
        }
        y = *solver.y_out().last().ok_or_else(|| Error::Integration("empty solver output".into()))?;
        y[8] = 0.0;
    }
    Ok(unpack(&y))
}

/// Monodromy of the cycle traced by `waypoints` (first and last differ by a period)
/// in the basis with Wronskian matrix `basis` at the first waypoint.
pub fn cycle_matrix(
    ctx: &LatticeContext,
    params: &LameParams,
    waypoints: &[C],
    basis: &Mat2,
    opt: &PathOptions,
) -> Result<Mat2> {
    let path = plan_path(ctx, params.k, waypoints, opt)?;
    let end = transport(ctx, params, &path, *basis)?;
    Ok(transpose(&mat_mul(&mat_inverse(basis)?, &end)))
}

/// `M₁, M₂` at `base` in the basis with Wronskian matrix `basis` there.
pub fn integrate_monodromy_with(
    ctx: &LatticeContext,
    params: &LameParams,
    base: C,
    basis: &Mat2,
    opt: &PathOptions,
) -> Result<CycleMonodromy> {
    let w = ctx.omega(params.k.get()) / 4.0;
    if [w, -w].iter().any(|&s| ctx.lattice_distance(base - s) < opt.clearance) {
        return Err(Error::Domain(format!("base point {base} too close to a pole")));
    }
    let m1 = cycle_matrix(ctx, params, &[base, base + 1.0], basis, opt)?;
    let m2 = cycle_matrix(ctx, params, &[base, base + ctx.tau], basis, opt)?;
    Ok(CycleMonodromy::from(m1, m2))
}

pub fn integrate_monodromy(ctx: &LatticeContext, params: &LameParams, base: C) -> Result<CycleMonodromy> {
    integrate_monodromy_with(ctx, params, base, &IDENTITY, &PathOptions::default())
}

/// Monodromy of a positively oriented circle of radius `radius` about `center`.
pub fn local_monodromy(ctx: &LatticeContext, params: &LameParams, center: C, radius: f64) -> Result<Mat2> {
    let path = [Piece::Arc { center, radius, start: 0.0, sweep: 2.0 * PI }];
    let end = transport(ctx, params, &path, IDENTITY)?;
    Ok(transpose(&end))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryReport {
    pub class: MonodromyClass,
    pub monodromy: Option<CycleMonodromy>,
    pub unitary: bool,
}

/// Trace-level unitarity test for the constrained equation with parameter `t`.
pub fn verify_unitary(ctx: &LatticeContext, k: KIndex, t: C) -> Result<UnitaryReport> {
    const TOL: f64 = 1e-6;
    let class = classify_point(ctx, k, SpectralPoint::over(ctx, k, t))?;
    if let MonodromyClass::NotCompletelyReducible { .. } = class {
        return Ok(UnitaryReport { class, monodromy: None, unitary: false });
    }
    let params = LameParams::constrained(ctx, k, t);
    let m = integrate_monodromy(ctx, &params, base_point(ctx.tau))?;
    let ok = |t: C| t.im.abs() < TOL && t.re.abs() <= 2.0 + TOL;
    let unitary = ok(m.t1) && ok(m.t2) && m.commutator() < TOL;
    Ok(UnitaryReport { class, monodromy: Some(m), unitary })
}
