//! Two-photon interference of type-II down-conversion pumped by chirped
//! femtosecond pulses, with first- and second-order dispersion in the
//! crystal and in the delay line.

pub mod amplitude;
pub mod autocorr;
pub mod error;
pub mod interference;
pub mod kernel;
pub mod phys;
pub mod pump;
pub mod quadrature;

pub use amplitude::{amplitude, amplitude_analytic, amplitude_grid, beta_c_gamma, AmplitudeGrid};
pub use autocorr::{
    gamma_gaussian, gamma_numeric, rho_autocorr, rho_nofilter, PumpCorrelation,
};
pub use error::{Error, Result};
pub use interference::{
    dip_scan, rho, rho_analytic, rho_numeric, rho_overlap, visibility, visibility_vs_duration,
    DipCurve, DipSample, Method, RhoEstimate,
};
pub use kernel::{BarBetaCGamma, BetaCGamma, GaussKernel, TildeBetaCGamma};
pub use phys::{
    CentralFrequencies, CrystalParams, DelayLine, FilterPair, FilterWidth, PumpPulse, SetupConfig,
};
pub use pump::{GaussianSpectrum, PumpSpectrum, TabulatedSpectrum};
pub use quadrature::{QuadratureConfig, QuadratureResult};
