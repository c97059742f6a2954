use thiserror::Error;

/// Errors surfaced by the kernel library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("zero finder did not converge for n={n}, nu={nu} (last iterate {last})")]
    ZeroConvergence { n: usize, nu: f64, last: f64 },

    #[error("basis capacity {capacity} exhausted, about {needed} terms required")]
    CapacityExhausted { capacity: usize, needed: usize },

    #[error("t={t} below t_min={t_min} for alpha={alpha}; {guidance}")]
    TimeTooSmall {
        t: f64,
        t_min: f64,
        alpha: f64,
        guidance: String,
    },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("invalid sweep configuration: {0}")]
    Config(String),

    #[error("i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
