//! Fixed inputs shared by the benches.

use hecke_core::Complex64 as C;

pub fn rho() -> C {
    C::new(0.5, 3f64.sqrt() / 2.0)
}

/// Moduli spread over the fundamental domain, including one near the cusp.
pub fn moduli() -> [C; 4] {
    [rho(), C::new(0.0, 1.0), C::new(-0.31, 1.4), C::new(0.12, 3.5)]
}

/// Pairs inside `Δ₀`.
pub fn pairs() -> [(f64, f64); 3] {
    [(1.0 / 3.0, 1.0 / 3.0), (0.3, 0.4), (0.45, 0.2)]
}
