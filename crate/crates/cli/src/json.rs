use hecke_core::atlas::{TauZero, Verdict, ZeroSearch};
use hecke_core::classify::{ClassificationReport, FamilyVerdict, ObstructionVerdict, Witness};
use hecke_core::ode::{CycleMonodromy, Mat2};
use hecke_core::spectral::{MonodromyClass, MonodromyData};
use hecke_core::Complex64 as C;
use serde_json::{json, Value};

pub fn cx(z: C) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn mat(m: &Mat2) -> Value {
    json!([[cx(m[0][0]), cx(m[0][1])], [cx(m[1][0]), cx(m[1][1])]])
}

pub fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Exists => "exists",
        Verdict::None => "none",
        Verdict::Inconclusive => "inconclusive",
    }
}

pub fn tau_zero(z: &TauZero) -> Value {
    json!({
        "tau_star": cx(z.tau_star),
        "residual": z.residual,
        "newton_iterations": z.newton_iterations,
        "derivative": cx(z.derivative_at_zero),
    })
}

pub fn zero_search(s: &ZeroSearch) -> Value {
    match s {
        ZeroSearch::Found(z) => json!({ "verdict": "exists", "zero": tau_zero(z) }),
        ZeroSearch::NoneCertified { grid_min } => json!({ "verdict": "none", "grid_min": grid_min }),
        ZeroSearch::Inconclusive { grid_min, best } => {
            json!({ "verdict": "inconclusive", "grid_min": grid_min, "best": cx(*best) })
        }
    }
}

fn witness(w: &Witness) -> Value {
    json!({
        "r": w.r,
        "s": w.s,
        "pair": [w.pair.0, w.pair.1],
        "reduced_pair": [w.reduced_pair.0, w.reduced_pair.1],
        "reduced_tau": cx(w.reduced_tau),
        "residual": w.residual,
        "family_residual": w.family_residual,
    })
}

fn family(f: &FamilyVerdict) -> Value {
    json!({
        "verdict": verdict(f.verdict),
        "tested_tau": cx(f.tested_tau),
        "witness": f.witness.as_ref().map(witness),
        "min_abs": f.min_abs,
    })
}

pub fn report(r: &ClassificationReport) -> Value {
    json!({
        "tau": cx(r.tau),
        "k": r.k.get(),
        "even_family": family(&r.even),
        "noneven_family": family(&r.noneven),
        "inconclusive": r.inconclusive(),
        "notes": r.notes,
    })
}

pub fn obstruction(v: &ObstructionVerdict) -> Value {
    json!({
        "m": v.m,
        "middle_excess": v.middle_excess,
        "outer_excess": v.outer_excess,
        "excludes_rectangles": v.excludes_rectangles(),
    })
}

pub fn class(c: &MonodromyClass) -> Value {
    match c {
        MonodromyClass::CompletelyReducible { r, s } => {
            json!({ "completely_reducible": true, "r": cx(*r), "s": cx(*s) })
        }
        MonodromyClass::NotCompletelyReducible { r, s } => {
            json!({ "completely_reducible": false, "r": r, "s": s })
        }
    }
}

pub fn monodromy_data(d: &MonodromyData) -> Value {
    json!({
        "sigma": cx(d.sigma),
        "wp_sigma": cx(d.wp_sigma),
        "wp1_sigma": cx(d.wp1_sigma),
        "kappa": cx(d.kappa),
        "r": cx(d.r),
        "s": cx(d.s),
    })
}

pub fn cycles(m: &CycleMonodromy) -> Value {
    json!({
        "m1": mat(&m.m1),
        "m2": mat(&m.m2),
        "trace1": cx(m.t1),
        "trace2": cx(m.t2),
        "commutator": m.commutator(),
        "det_defect": m.det_defect(),
    })
}
