//! Existence of even and non-even solution families for a given torus, the rectangle
//! obstruction on `m`, and the end-to-end check from a pair `(r,s)` to ODE monodromy.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::atlas::{compute_b0, find_tau_zero_with, in_half_lattice, lambda_membership, reduce_to_f0, SearchOptions, Verdict, ZeroSearch};
use crate::config::Config;
use crate::elliptic::LatticeContext;
use crate::error::{Error, Result};
use crate::hecke::{hecke_z, premodular_zmk, KIndex};
use crate::ode::{base_point, integrate_monodromy};
use crate::spectral::{monodromy_data, solve_t_from_rs, LameParams};

type C = Complex64;

/// Tolerance in `b` for the cached `b₀`.
pub const B0_TOL: f64 = 1e-8;

static B0: OnceLock<f64> = OnceLock::new();

/// `b₀`, computed once per process.
pub fn cached_b0() -> Result<f64> {
    if let Some(&b) = B0.get() {
        return Ok(b);
    }
    let b = compute_b0(B0_TOL)?.b0;
    Ok(*B0.get_or_init(|| b))
}

/// A zero `Z(a,b,τ̃) = 0` with `(a,b)` real, in the reduced and the original frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    /// The family's own `(r,s)`, reduced mod ℤ² into `[0,1)²`.
    pub r: f64,
    pub s: f64,
    /// The Hecke pair in the frame of the tested modulus `τ̃`.
    pub pair: (f64, f64),
    /// The same pair after reduction of `τ̃` into `F₀`.
    pub reduced_pair: (f64, f64),
    pub reduced_tau: C,
    /// `|Z(pair, τ̃)|`.
    pub residual: f64,
    /// `|Z^(m_k)(r,s,τ)|` for the even family, `|Z(r_k,s_k,τ)|` for the non-even one.
    pub family_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyVerdict {
    pub verdict: Verdict,
    /// The modulus tested for membership in `Λ`: `τ_k` or `τ`.
    pub tested_tau: C,
    pub witness: Option<Witness>,
    pub min_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub tau: C,
    pub k: KIndex,
    pub even: FamilyVerdict,
    pub noneven: FamilyVerdict,
    pub notes: Vec<String>,
}

impl ClassificationReport {
    pub fn inconclusive(&self) -> bool {
        self.even.verdict == Verdict::Inconclusive || self.noneven.verdict == Verdict::Inconclusive
    }
}

fn frac(x: f64) -> f64 {
    x.rem_euclid(1.0)
}

/// Membership of `tested` in `Λ` with the witness carried back to the frame of `tested`.
fn family(tested: C, cfg: &Config, lift: impl Fn(f64, f64) -> Result<(f64, f64, f64)>) -> Result<FamilyVerdict> {
    let m = lambda_membership(tested, cfg)?;
    let (gamma, reduced) = reduce_to_f0(tested);
    let witness = match m.witness {
        Some((a, b)) => {
            // act_pair on γ⁻¹ undoes the reduction: Z(a′,b′,γτ) = (cτ+d)Z(a,b,τ).
            let (a0, b0) = gamma.inverse().act_pair(a, b);
            let residual = hecke_z(C::new(a0, 0.0), C::new(b0, 0.0), tested)?.norm();
            let (r, s, family_residual) = lift(a0, b0)?;
            Some(Witness { r, s, pair: (a0, b0), reduced_pair: (a, b), reduced_tau: reduced, residual, family_residual })
        }
        None => None,
    };
    Ok(FamilyVerdict { verdict: m.verdict, tested_tau: tested, witness, min_abs: m.min_abs })
}

/// Both existence verdicts for the torus `τ` and the index `k`.
pub fn classify_torus(tau: C, k: KIndex, cfg: &Config) -> Result<ClassificationReport> {
    if tau.im <= 0.0 || !tau.is_finite() {
        return Err(Error::Domain(format!("Im τ must be positive, got {tau}")));
    }
    let ctx = LatticeContext::with_config(tau, *cfg)?;
    let tk = k.factor_tau(tau);
    let even = family(tk, cfg, |a, b| {
        // Invert the factor pair of Z^(m_k) at τ_k.
        let (r, s) = match k.get() {
            1 => (a, 2.0 * b),
            2 => (2.0 * a, b),
            _ => (2.0 * a + b, b),
        };
        let res = premodular_zmk(&ctx, C::new(r, 0.0), C::new(s, 0.0), k)?.norm();
        Ok((frac(r), frac(s), res))
    })
    .map_err(|e| e.at("even family"))?;
    let noneven = family(tau, cfg, |a, b| {
        let (r, s) = k.shift(a, b);
        let (rk, sk) = k.shift(r, s);
        let res = hecke_z(C::new(rk, 0.0), C::new(sk, 0.0), tau)?.norm();
        Ok((frac(r), frac(s), res))
    })
    .map_err(|e| e.at("non-even family"))?;

    let mut notes = Vec::new();
    if let Some(w) = &even.witness {
        notes.push(format!("even witness from the factor at τ_k = {tk}, reduced to {}", w.reduced_tau));
    }
    if let Some(w) = &noneven.witness {
        notes.push(format!("non-even witness transported from reduced τ = {}", w.reduced_tau));
    }
    if tau.re.abs() < 1e-12 {
        let b = tau.im;
        if k.get() == 3 {
            let b0 = cached_b0()?;
            let predicted = b < 1.0 / b0 || b > b0;
            notes.push(format!(
                "rectangle b = {b}: even family expected {} (b₀ = {b0:.10}); uniqueness and symmetry are not computed",
                if predicted { "to exist" } else { "not to exist" }
            ));
        } else {
            notes.push(format!("rectangle b = {b}: no family expected for k = {}", k.get()));
        }
    }
    if even.verdict == Verdict::Inconclusive || noneven.verdict == Verdict::Inconclusive {
        notes.push("grid minimum of |Z| in the ambiguous band; membership not forced".into());
    }
    Ok(ClassificationReport { tau, k, even, noneven, notes })
}

/// Classifies many moduli in parallel.
pub fn classify_batch(inputs: &[(C, KIndex)], cfg: &Config) -> Vec<Result<ClassificationReport>> {
    inputs.par_iter().map(|&(tau, k)| classify_torus(tau, k, cfg)).collect()
}

/// Evaluation of the two rectangle conditions on `m = (m₀,m₁,m₂,m₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObstructionVerdict {
    pub m: [u32; 4],
    /// `(m₁+m₂−m₀−m₃)/2 ≥ 1, m₁ ≥ 1, m₂ ≥ 1`.
    pub middle_excess: bool,
    /// `(m₁+m₂−m₀−m₃)/2 ≤ −1, m₀ ≥ 1, m₃ ≥ 1`.
    pub outer_excess: bool,
}

impl ObstructionVerdict {
    /// Neither condition holds: no even solution on any rectangle.
    pub fn excludes_rectangles(&self) -> bool {
        !self.middle_excess && !self.outer_excess
    }
}

pub fn rectangle_obstruction(m: [u32; 4]) -> ObstructionVerdict {
    let d = m[1] as i64 + m[2] as i64 - m[0] as i64 - m[3] as i64;
    ObstructionVerdict {
        m,
        middle_excess: d >= 2 && m[1] >= 1 && m[2] >= 1,
        outer_excess: d <= -2 && m[0] >= 1 && m[3] >= 1,
    }
}

/// Result of the spectral and ODE stages at a known zero `τ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralStage {
    pub t: C,
    pub c: C,
    /// `|Z(r_k,s_k,τ*)|`.
    pub shifted_residual: f64,
    /// Distance of the recovered `(r,s)` from the input, mod ℤ².
    pub roundtrip: f64,
    pub t1: C,
    pub t2: C,
    /// `|t₁ − 2cos 2πs| + |t₂ − 2cos 2πr|`.
    pub trace_residual: f64,
    pub commutator: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PipelineOutcome {
    /// `Z(r_k,s_k,·)` has no zero in `F₀`.
    NoZero { grid_min: f64 },
    Inconclusive { grid_min: f64 },
    /// `Z^(m_k)(r,s,τ*)` vanishes too: the `T = 0` configuration of the even family.
    EvenBranch { tau_star: C, premodular: f64 },
    NonEven { tau_star: C, premodular: f64, stage: SpectralStage },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineRecord {
    pub r: f64,
    pub s: f64,
    pub k: KIndex,
    pub outcome: PipelineOutcome,
}

/// Below this `|Z^(m_k)|` the zero is attributed to the even family.
pub const COMMON_ZERO_TOL: f64 = 1e-8;

fn mod_int(a: C, b: C) -> f64 {
    let d = a - b;
    (d.re - d.re.round()).abs() + d.im.abs()
}

/// Spectral and ODE stages at a modulus where `Z(r_k,s_k,τ)` vanishes. Accepts complex
/// `(r,s)`. The inner `Err` carries `|Z^(m_k)(r,s,τ)|` when that vanishes as well.
pub fn spectral_stage(ctx: &LatticeContext, k: KIndex, r: C, s: C) -> Result<std::result::Result<SpectralStage, f64>> {
    let premodular = premodular_zmk(ctx, r, s, k).map_err(|e| e.at("premodular"))?.norm();
    if premodular < COMMON_ZERO_TOL {
        return Ok(Err(premodular));
    }
    let sol = solve_t_from_rs(ctx, k, r, s, ctx.config.zero_tol.max(1e-8))
        .map_err(|e| e.at("solve T"))?
        .ok_or_else(|| Error::Degenerate("Z(r_k,s_k,τ) does not vanish".into()).at("solve T"))?;
    let data = monodromy_data(ctx, k, sol.point).map_err(|e| e.at("monodromy data"))?;
    let roundtrip = mod_int(data.r, r) + mod_int(data.s, s);
    let params = LameParams::constrained(ctx, k, sol.point.t);
    let m = integrate_monodromy(ctx, &params, base_point(ctx.tau)).map_err(|e| e.at("ode monodromy"))?;
    let trace_residual = (m.t1 - (s * 2.0 * PI).cos() * 2.0).norm() + (m.t2 - (r * 2.0 * PI).cos() * 2.0).norm();
    Ok(Ok(SpectralStage {
        t: sol.point.t,
        c: sol.point.c,
        shifted_residual: sol.shifted_z,
        roundtrip,
        t1: m.t1,
        t2: m.t2,
        trace_residual,
        commutator: m.commutator(),
    }))
}

/// From a real pair `(r,s) ∉ ½ℤ²`: the zero of `Z(r_k,s_k,·)` in `F₀`, the common-zero
/// test, `T` and `P`, the `(r,s)` round trip and the ODE traces. `seed` optionally
/// starts the zero search near a known modulus.
pub fn full_pipeline(r: f64, s: f64, k: KIndex, seed: Option<C>, cfg: &Config) -> Result<PipelineRecord> {
    if !r.is_finite() || !s.is_finite() || in_half_lattice(frac(r), frac(s), 1e-9) {
        return Err(Error::Domain(format!("(r,s) = ({r},{s}) must be real and outside ½ℤ²")).at("input"));
    }
    let (a, b) = k.shift(r, s);
    let search = find_tau_zero_with(frac(a), frac(b), cfg, &SearchOptions::default(), seed).map_err(|e| e.at("locate"))?;
    let outcome = match search {
        ZeroSearch::NoneCertified { grid_min } => PipelineOutcome::NoZero { grid_min },
        ZeroSearch::Inconclusive { grid_min, .. } => PipelineOutcome::Inconclusive { grid_min },
        ZeroSearch::Found(z) => {
            let ctx = LatticeContext::with_config(z.tau_star, *cfg).map_err(|e| e.at("locate"))?;
            match spectral_stage(&ctx, k, C::new(r, 0.0), C::new(s, 0.0))? {
                Ok(stage) => {
                    let premodular = premodular_zmk(&ctx, C::new(r, 0.0), C::new(s, 0.0), k)?.norm();
                    PipelineOutcome::NonEven { tau_star: z.tau_star, premodular, stage }
                }
                Err(premodular) => PipelineOutcome::EvenBranch { tau_star: z.tau_star, premodular },
            }
        }
    };
    Ok(PipelineRecord { r, s, k, outcome })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obstruction_examples() {
        let v = rectangle_obstruction([1, 0, 0, 0]);
        assert!(!v.middle_excess && !v.outer_excess && v.excludes_rectangles());
        assert!(rectangle_obstruction([0, 1, 1, 0]).middle_excess);
        let v = rectangle_obstruction([1, 1, 0, 0]);
        assert!(!v.middle_excess && !v.outer_excess);
        assert!(rectangle_obstruction([1, 0, 0, 1]).outer_excess);
        // Odd differences: −3/2 ≤ −1 holds, ±1/2 does not.
        assert!(rectangle_obstruction([2, 0, 0, 1]).outer_excess);
        assert!(rectangle_obstruction([0, 2, 1, 0]).middle_excess);
        assert!(rectangle_obstruction([1, 1, 1, 0]).excludes_rectangles());
        assert!(rectangle_obstruction([1, 0, 1, 1]).excludes_rectangles());
        // Excess without the matching positivity.
        assert!(rectangle_obstruction([3, 0, 0, 0]).excludes_rectangles());
        assert!(rectangle_obstruction([0, 3, 0, 0]).excludes_rectangles());
    }
}
