mod common;

use std::f64::consts::PI;

use common::*;
use hecke_core::atlas::{find_tau_zero, in_half_lattice, in_region, RegionId};
use hecke_core::hecke::premodular_zmk;
use hecke_core::ode::*;
use hecke_core::spectral::*;
use hecke_core::{Complex64 as C, Config, KIndex, LatticeContext};
use rand::Rng;

fn random_k(rng: &mut impl Rng) -> KIndex {
    KIndex::ALL[rng.gen_range(0..3)]
}

fn mod_int(a: C, b: C) -> f64 {
    let d = a - b;
    (d.re - d.re.round()).abs() + d.im.abs()
}

/// A real pair `(r,s)` with `Z(r_k,s_k,·)` vanishing at the returned `τ*`.
fn located_zero(rng: &mut impl Rng, k: KIndex, cfg: &Config) -> (f64, f64, C) {
    loop {
        let (a, b) = (rng.gen::<f64>(), rng.gen::<f64>());
        if !in_region(a, b, RegionId::Delta0) {
            continue;
        }
        let Some(z) = find_tau_zero(a, b, cfg).unwrap().zero() else { continue };
        let (r, s) = k.shift(a, b);
        let (r, s) = (r.rem_euclid(1.0), s.rem_euclid(1.0));
        if in_half_lattice(r, s, 1e-3) {
            continue;
        }
        let ctx = LatticeContext::new(z.tau_star).unwrap();
        if premodular_zmk(&ctx, c(r, 0.0), c(s, 0.0), k).unwrap().norm() < 1e-4 {
            continue;
        }
        return (r, s, z.tau_star);
    }
}

#[test]
fn frobenius_obstruction_matches_algebra() {
    let mut rng = rng(81);
    let mut ratio = [None, None];
    for _ in 0..10 {
        let ctx = LatticeContext::new(random_tau(&mut rng, 0.6, 2.0)).unwrap();
        let k = random_k(&mut rng);
        let t = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let e = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let p = LameParams { k, t, e, tau: ctx.tau };
        let alg = apparent_obstruction(&ctx, &p);
        for (slot, rep) in ratio.iter_mut().zip(frobenius_apparent(&ctx, &p).unwrap()) {
            assert_eq!(rep.coefficients[0], c(1.0, 0.0));
            assert_eq!(rep.coefficients.len(), FROBENIUS_ORDER + 1);
            let q = rep.obstruction / alg;
            let q0 = *slot.get_or_insert(q);
            assert!(rel(q, q0) < 1e-9, "{q} {q0}");
        }
    }
    // Opposite orientation of the local coordinate at the two poles.
    assert!(rel(ratio[0].unwrap(), c(-0.25, 0.0)) < 1e-9);
    assert!(rel(ratio[1].unwrap(), c(0.25, 0.0)) < 1e-9);
}

#[test]
fn frobenius_obstruction_vanishes_when_apparent() {
    let mut rng = rng(82);
    for _ in 0..10 {
        let ctx = LatticeContext::new(random_tau(&mut rng, 0.6, 2.0)).unwrap();
        let k = random_k(&mut rng);
        let e = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let trivial = LameParams { k, t: c(0.0, 0.0), e, tau: ctx.tau };
        for rep in frobenius_apparent(&ctx, &trivial).unwrap() {
            assert!(rep.obstruction.norm() < 1e-12 * (1.0 + e.norm()));
        }
        let t = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let p = LameParams::constrained(&ctx, k, t);
        for rep in frobenius_apparent(&ctx, &p).unwrap() {
            let scale = t.norm() * (t.norm_sqr() + p.e.norm() + ctx.e(k.get()).norm() + 1.0);
            assert!(rep.obstruction.norm() < 1e-10 * scale);
        }
    }
}

#[test]
fn frobenius_series_solves_the_equation_locally() {
    let mut rng = rng(83);
    for _ in 0..5 {
        let ctx = LatticeContext::new(random_tau(&mut rng, 0.8, 1.5)).unwrap();
        let k = random_k(&mut rng);
        let t = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p = LameParams::constrained(&ctx, k, t);
        for rep in frobenius_apparent(&ctx, &p).unwrap() {
            let u = c(0.004, 0.003);
            let cs = &rep.coefficients;
            let y: C = cs.iter().enumerate().map(|(m, &x)| x * u.powi(m as i32 - 1)).sum();
            let y2: C = cs
                .iter()
                .enumerate()
                .map(|(m, &x)| x * ((m as f64 - 1.0) * (m as f64 - 2.0)) * u.powi(m as i32 - 3))
                .sum();
            let q = potential(&ctx, &p, rep.singularity + u).unwrap();
            // Truncation after u⁵ leaves a residual of order u⁴ against y″ ~ u⁻³.
            assert!((y2 - q * y).norm() < 1e-6 * y2.norm(), "{}", (y2 - q * y).norm() / y2.norm());
        }
    }
}

#[test]
fn local_monodromy_is_trivial_exactly_when_apparent() {
    let mut rng = rng(84);
    for _ in 0..4 {
        let ctx = LatticeContext::new(random_tau(&mut rng, 0.8, 1.5)).unwrap();
        let k = random_k(&mut rng);
        let t = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let w = ctx.omega(k.get()) / 4.0;
        let p = LameParams::constrained(&ctx, k, t);
        let off = LameParams { e: p.e + 0.5, ..p };
        for center in [w, -w] {
            let m = local_monodromy(&ctx, &p, center, 0.05).unwrap();
            let dist = (m[0][0] - 1.0).norm() + m[0][1].norm() + m[1][0].norm() + (m[1][1] - 1.0).norm();
            assert!(dist < 1e-6, "{dist}");
            let m = local_monodromy(&ctx, &off, center, 0.05).unwrap();
            let dist = (m[0][0] - 1.0).norm() + m[0][1].norm() + m[1][0].norm() + (m[1][1] - 1.0).norm();
            assert!(dist > 1e-3, "{dist}");
        }
    }
}

#[test]
fn traces_match_algebraic_monodromy() {
    let mut rng = rng(85);
    for _ in 0..6 {
        let ctx = LatticeContext::new(random_tau(&mut rng, 0.7, 1.6)).unwrap();
        let k = random_k(&mut rng);
        let t = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let p = LameParams::constrained(&ctx, k, t);
        let d = monodromy_data_from_t(&ctx, k, t).unwrap();
        let m = integrate_monodromy(&ctx, &p, base_point(ctx.tau)).unwrap();
        assert!((m.t1 - (d.s * 2.0 * PI).cos() * 2.0).norm() < 1e-6, "{} {}", m.t1, d.s);
        assert!((m.t2 - (d.r * 2.0 * PI).cos() * 2.0).norm() < 1e-6, "{} {}", m.t2, d.r);
        let scale = 1.0 + m.t1.norm().max(m.t2.norm()).powi(2);
        assert!(m.commutator() < 1e-7 * scale, "{}", m.commutator());
        assert!(m.det_defect() < 1e-8);
    }
}

#[test]
fn path_and_basis_independence() {
    let mut rng = rng(86);
    for _ in 0..4 {
        let ctx = LatticeContext::new(random_tau(&mut rng, 0.7, 1.6)).unwrap();
        let k = random_k(&mut rng);
        let t = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let p = LameParams::constrained(&ctx, k, t);
        let z0 = base_point(ctx.tau);
        let opt = PathOptions::default();
        let straight = cycle_matrix(&ctx, &p, &[z0, z0 + 1.0], &IDENTITY, &opt).unwrap();
        let bent = cycle_matrix(&ctx, &p, &[z0, z0 + ctx.tau * 0.2 + 0.5, z0 + 1.0], &IDENTITY, &opt).unwrap();
        let tr = |m: &Mat2| m[0][0] + m[1][1];
        assert!((tr(&straight) - tr(&bent)).norm() < 1e-8);
        let bent2 = cycle_matrix(&ctx, &p, &[z0, z0 + ctx.tau * 0.5 - 0.15, z0 + ctx.tau], &IDENTITY, &opt).unwrap();
        let straight2 = cycle_matrix(&ctx, &p, &[z0, z0 + ctx.tau], &IDENTITY, &opt).unwrap();
        assert!((tr(&straight2) - tr(&bent2)).norm() < 1e-8);
        let basis = [
            [c(rng.gen(), rng.gen()), c(rng.gen(), rng.gen())],
            [c(rng.gen(), rng.gen()), c(rng.gen(), rng.gen())],
        ];
        let a = integrate_monodromy(&ctx, &p, z0).unwrap();
        let b = integrate_monodromy_with(&ctx, &p, z0, &basis, &opt).unwrap();
        assert!((a.t1 - b.t1).norm() < 1e-8 && (a.t2 - b.t2).norm() < 1e-8);
    }
}

#[test]
fn located_zeros_have_unitary_monodromy() {
    let cfg = Config::default();
    let mut rng = rng(87);
    for i in 0..6 {
        let k = KIndex::ALL[i % 3];
        let (r, s, tau) = located_zero(&mut rng, k, &cfg);
        let ctx = LatticeContext::new(tau).unwrap();
        let sol = solve_t_from_rs(&ctx, k, c(r, 0.0), c(s, 0.0), 1e-8).unwrap().expect("located zero");
        let d = monodromy_data(&ctx, k, sol.point).unwrap();
        assert!(mod_int(d.r, c(r, 0.0)) < 1e-8 && mod_int(d.s, c(s, 0.0)) < 1e-8);
        let rep = verify_unitary(&ctx, k, sol.point.t).unwrap();
        assert!(rep.unitary, "{rep:?}");
        let m = rep.monodromy.unwrap();
        assert!((m.t1 - (2.0 * PI * s).cos() * 2.0).norm() < 1e-6);
        assert!((m.t2 - (2.0 * PI * r).cos() * 2.0).norm() < 1e-6);
        assert!(matches!(rep.class, MonodromyClass::CompletelyReducible { .. }));
    }
}

#[test]
fn complex_data_is_not_unitary() {
    let mut rng = rng(88);
    for _ in 0..3 {
        let ctx = LatticeContext::new(random_tau(&mut rng, 0.8, 1.5)).unwrap();
        let k = random_k(&mut rng);
        let t = c(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let d = monodromy_data_from_t(&ctx, k, t).unwrap();
        assert!(d.s.im.abs() > 1e-3 || d.r.im.abs() > 1e-3);
        let sol = solve_t_from_rs(&ctx, k, d.r, d.s, 1e-8).unwrap().unwrap();
        let rep = verify_unitary(&ctx, k, sol.point.t).unwrap();
        assert!(!rep.unitary);
    }
    for k in KIndex::ALL {
        let ctx = LatticeContext::new(c(0.1, 1.2)).unwrap();
        let root = (ctx.e(k.get()) * 12.0).sqrt();
        let rep = verify_unitary(&ctx, k, root).unwrap();
        assert!(!rep.unitary && rep.monodromy.is_none());
        assert!(matches!(rep.class, MonodromyClass::NotCompletelyReducible { .. }));
    }
}

#[test]
fn base_point_on_a_pole_is_rejected() {
    let ctx = LatticeContext::new(c(0.0, 1.0)).unwrap();
    let k = KIndex::ALL[0];
    let p = LameParams::constrained(&ctx, k, c(0.5, 0.0));
    assert!(integrate_monodromy(&ctx, &p, c(0.25, 0.01)).is_err());
}
