//! Fourier-Bessel kernels on the unit interval: spectra, heat and
//! subordinated kernels, two-sided envelopes, and transference checks.

mod dd;
pub mod envelopes;
pub mod error;
pub mod gamma;
pub mod kernels;
pub mod quad;
pub mod specfun;
pub mod spectrum;
pub mod sweep;
pub mod transference;

pub use error::{Error, Result};
pub use kernels::{KernelQuery, KernelValue};
pub use specfun::Order;
pub use spectrum::{BasisCache, SpectralBasis};
pub use sweep::{RatioReport, ReportFormat, SweepConfig, Verdict};
