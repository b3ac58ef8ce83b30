//! Chirped Gaussian pump pulses and their propagation through the crystal.
//!
//! Spectra use the convention `E(Ω) = (1/2π) ∫ E(t) exp(iΩt) dt`, so that
//! `E(t) = ∫ E(Ω) exp(-iΩt) dΩ`.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phys::{CrystalParams, FilterWidth, PumpPulse};
use crate::quadrature::{integrate_adaptive, QuadratureConfig, QuadratureResult};

impl PumpPulse {
    /// Time-domain envelope `ξ₀ exp(-(1 + i a) t² / τ_D²)`.
    pub fn envelope(&self, t: f64) -> Complex64 {
        let x = t / self.tau_d;
        self.amplitude * Complex64::new(-x * x, -self.chirp * x * x).exp()
    }

    /// `ξ_p = ξ₀ exp(-i arctan(a) / 2)`.
    pub fn spectral_amplitude(&self) -> Complex64 {
        self.amplitude * Complex64::from_polar(1.0, -0.5 * self.chirp.atan())
    }

    /// Complex spectrum of [`Self::envelope`] at detuning `omega`.
    pub fn spectrum(&self, omega: f64) -> Complex64 {
        let a2 = 1.0 + self.chirp * self.chirp;
        let prefactor = self.tau_d / (2.0 * PI.sqrt() * a2.powf(0.25));
        let b = self.b();
        self.spectral_amplitude()
            * prefactor
            * Complex64::new(-b * omega * omega, b * self.chirp * omega * omega).exp()
    }

    /// Intensity bandwidth ΔΩ_p = √2 √(1 + a²) / τ_D; b = 1 / (2 ΔΩ_p²).
    pub fn bandwidth(&self) -> f64 {
        2f64.sqrt() * (1.0 + self.chirp * self.chirp).sqrt() / self.tau_d
    }

    /// Pulse at the crystal output plane for a pulse entering at z = -L.
    ///
    /// Second-order pump dispersion only adds spectral phase, so b is
    /// unchanged while the chirp grows by D_p L / (4π b).
    pub fn propagate_through_crystal(&self, crystal: &CrystalParams) -> PumpPulse {
        self.propagate(crystal.dp * crystal.length)
    }

    /// Propagation through an accumulated second-order dispersion `dp_l`
    /// (= D_p·length, in s²).
    pub fn propagate(&self, dp_l: f64) -> PumpPulse {
        let b = self.b();
        let chirp = (self.chirp * b + dp_l / (4.0 * PI)) / b;
        let tau_d = self.tau_d * ((1.0 + chirp * chirp) / (1.0 + self.chirp * self.chirp)).sqrt();
        PumpPulse {
            tau_d,
            chirp,
            amplitude: self.amplitude,
        }
    }

    /// Filtered field propagated from the input plane to `z` ∈ [-L, 0],
    /// closed form of the Gaussian frequency integral. `sigma` is the
    /// effective pump-side filter width.
    pub fn propagated_filtered_field(
        &self,
        crystal: &CrystalParams,
        sigma: FilterWidth,
        z: f64,
        t: f64,
    ) -> Complex64 {
        let b = self.b();
        let p = Complex64::new(
            b + sigma.inv_sq(),
            -(self.chirp * b + crystal.dp * (z + crystal.length) / (4.0 * PI)),
        );
        let a2 = 1.0 + self.chirp * self.chirp;
        let c = self.spectral_amplitude() * self.tau_d / (2.0 * PI.sqrt() * a2.powf(0.25));
        c * (Complex64::new(PI, 0.0) / p).sqrt() * (-(t * t) / (4.0 * p)).exp()
    }
}

/// Input-plane complex pump spectrum for the autocorrelation route.
pub trait PumpSpectrum: Sync {
    fn amplitude(&self, omega: f64) -> Complex64;

    /// Detuning interval outside which the spectrum is negligible.
    fn support(&self) -> (f64, f64);

    /// Points where the spectrum is not smooth (table nodes).
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Gaussian spectrum of an input-plane pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpectrum(pub PumpPulse);

impl PumpSpectrum for GaussianSpectrum {
    fn amplitude(&self, omega: f64) -> Complex64 {
        self.0.spectrum(omega)
    }

    fn support(&self) -> (f64, f64) {
        // |E(Ω)| / |E(0)| = exp(-b Ω²) < e⁻⁴⁰ beyond this.
        let w = (40.0 / self.0.b()).sqrt();
        (-w, w)
    }
}

/// Linearly interpolated spectrum read from a `Omega re im` table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    omega: Vec<f64>,
    values: Vec<Complex64>,
}

/// Edge samples must be below this fraction of the peak magnitude.
pub const TABLE_EDGE_DECAY: f64 = 1e-6;

impl TabulatedSpectrum {
    pub fn new(omega: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if omega.len() != values.len() {
            return Err(Error::Spectrum("column lengths differ".into()));
        }
        if omega.len() < 3 {
            return Err(Error::Spectrum("at least three samples are required".into()));
        }
        if let Some(i) = omega.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Spectrum(format!(
                "detunings must be strictly increasing (row {})",
                i + 2
            )));
        }
        if omega
            .iter()
            .chain(values.iter().flat_map(|v| [&v.re, &v.im]))
            .any(|x| !x.is_finite())
        {
            return Err(Error::Spectrum("non-finite entry".into()));
        }
        let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(Error::Spectrum("spectrum is identically zero".into()));
        }
        let edge = values[0].norm().max(values[values.len() - 1].norm());
        if edge >= TABLE_EDGE_DECAY * peak {
            return Err(Error::Spectrum(format!(
                "spectrum must decay below {TABLE_EDGE_DECAY:e} of its peak at the table edges \
                 (edge/peak = {:e})",
                edge / peak
            )));
        }
        Ok(Self { omega, values })
    }

    /// Parse whitespace-separated `Omega_rad_s re im` rows; `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut omega = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 3 {
                return Err(Error::Spectrum(format!(
                    "line {}: expected 3 columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| {
                    Error::Spectrum(format!("line {}: `{s}`: {e}", lineno + 1))
                })
            };
            omega.push(num(cols[0])?);
            values.push(Complex64::new(num(cols[1])?, num(cols[2])?));
        }
        Self::new(omega, values)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Spectrum(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sample a spectrum on a uniform grid.
    pub fn sample<S: PumpSpectrum + ?Sized>(spectrum: &S, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let step = (hi - lo) / (n - 1) as f64;
        let omega: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        let values = omega.iter().map(|&w| spectrum.amplitude(w)).collect();
        Self::new(omega, values)
    }
}

impl PumpSpectrum for TabulatedSpectrum {
    fn amplitude(&self, omega: f64) -> Complex64 {
        let n = self.omega.len();
        if omega < self.omega[0] || omega > self.omega[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let i = self.omega.partition_point(|&w| w <= omega).clamp(1, n - 1);
        let (w0, w1) = (self.omega[i - 1], self.omega[i]);
        let s = (omega - w0) / (w1 - w0);
        self.values[i - 1] * (1.0 - s) + self.values[i] * s
    }

    fn support(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    /// Every `k`-th table node, at most 64 panels; kinks between them are
    /// left to adaptive refinement.
    fn breakpoints(&self) -> Vec<f64> {
        let n = self.omega.len();
        let k = (n - 1).div_ceil(64).max(1);
        let mut b: Vec<f64> = self.omega.iter().step_by(k).copied().collect();
        if (n - 1) % k != 0 {
            b.push(self.omega[n - 1]);
        }
        b
    }
}

/// Filtered pump field at `z` ∈ [-L, 0] and time `t`, obtained by numerical
/// integration over the input-plane spectrum (first-order pump dispersion
/// is left out). `sigma` is the effective pump-side filter width.
pub fn propagated_filtered_pump<S: PumpSpectrum + ?Sized>(
    spectrum: &S,
    crystal: &CrystalParams,
    sigma: FilterWidth,
    z: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    let (lo, hi) = spectrum.support();
    let phase = crystal.dp * (z + crystal.length) / (4.0 * PI);
    let inv_sq = sigma.inv_sq();
    let breaks = spectrum.breakpoints();
    // |field| never exceeds this, which sets the absolute floor in the tails.
    let bound = integrate_adaptive(
        |w: f64| Ok(Complex64::new(spectrum.amplitude(w).norm() * (-inv_sq * w * w).exp(), 0.0)),
        lo,
        hi,
        &breaks,
        cfg,
        0.0,
    )?
    .value
    .re;
    let f = |w: f64| {
        Ok(spectrum.amplitude(w) * Complex64::new(-inv_sq * w * w, phase * w * w - w * t).exp())
    };
    integrate_adaptive(f, lo, hi, &breaks, cfg, 1e-3 * cfg.rel_tol * bound)
}
