//! Simulation of photon-echo quantum memories based on controlled reversible
//! inhomogeneous broadening (CRIB).
//!
//! The numerical core is generic over the scalar type ([`num::Real`], `f32`
//! or `f64`); the aliases below fix it to `f64`. Frequencies are in units of
//! the input-pulse bandwidth `Γ` and times in units of `1/Γ`.

pub mod analytic;
pub mod config;
pub mod error;
pub mod kernels;
pub mod metrics;
pub mod num;
pub mod oracle;
pub mod quadrature;
pub mod spectral;
pub mod sweep;

pub use analytic::{Direction, QuadratureReport};
pub use error::{CribError, Result};
pub use spectral::ShapeKind;

pub type SpectralDistribution = spectral::SpectralDistribution<f64>;
pub type PulseSpec = spectral::PulseSpec<f64>;
pub type FrequencyGrid = spectral::FrequencyGrid<f64>;
pub type ComplexSpectrum = spectral::ComplexSpectrum<f64>;
pub type TimeSignal = spectral::TimeSignal<f64>;
pub type KernelContext = kernels::KernelContext<f64>;
pub type MediumSpec = kernels::MediumSpec<f64>;
pub type ProtocolConfig = analytic::ProtocolConfig<f64>;
pub type OracleConfig = oracle::OracleConfig<f64>;
pub type CoherenceField = oracle::CoherenceField<f64>;
pub type MemoryReport = metrics::MemoryReport<f64>;
