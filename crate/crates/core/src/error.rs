use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point {z} lies within {dist:e} of a lattice pole")]
    Pole { z: Complex64, dist: f64 },
    #[error("newton did not converge after {iterations} iterations (last iterate {last}, residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        last: Complex64,
        residual: f64,
    },
    #[error("inversion of wp failed for target {0}")]
    Inversion(Complex64),
    #[error("no branch of sqrt(-Q) is consistent: {0}")]
    Branch(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("config: {0}")]
    Config(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
