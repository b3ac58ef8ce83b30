//! ρ through the autocorrelation of the filtered pump field.
//!
//! Valid when second-order dispersion acts only on the pump and both
//! filters have the same width σ₁. Crystal depths here run over
//! [−L/2, L/2]; z − L/2 is the depth in the usual [−L, 0] frame. The
//! effective pump-side filter width is σ = √2 σ₁.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interference::RhoEstimate;
use crate::phys::{CrystalParams, FilterWidth, PumpPulse, SetupConfig};
use crate::pump::{propagated_filtered_pump, PumpSpectrum};
use crate::quadrature::{graded_breakpoints, integrate_adaptive, QuadratureConfig};

/// Source of the pump correlation: the closed form for a Gaussian pulse or
/// numerical integration over an arbitrary spectrum.
#[derive(Clone, Copy)]
pub enum CorrelationSource<'a> {
    Gaussian(PumpPulse),
    Spectrum(&'a dyn PumpSpectrum),
}

/// γ_σ(z₁, z₂, x) for a given crystal and effective filter width.
#[derive(Clone, Copy)]
pub struct PumpCorrelation<'a> {
    pub source: CorrelationSource<'a>,
    pub crystal: CrystalParams,
    pub sigma: FilterWidth,
    pub cfg: QuadratureConfig,
}

impl<'a> PumpCorrelation<'a> {
    pub fn gaussian(pump_input: PumpPulse, crystal: CrystalParams, sigma: FilterWidth) -> Self {
        Self {
            source: CorrelationSource::Gaussian(pump_input),
            crystal,
            sigma,
            cfg: QuadratureConfig::default(),
        }
    }

    pub fn spectral(
        spectrum: &'a dyn PumpSpectrum,
        crystal: CrystalParams,
        sigma: FilterWidth,
        cfg: QuadratureConfig,
    ) -> Self {
        Self {
            source: CorrelationSource::Spectrum(spectrum),
            crystal,
            sigma,
            cfg,
        }
    }

    pub fn gamma(&self, z1: f64, z2: f64, x: f64) -> Result<Complex64> {
        match self.source {
            CorrelationSource::Gaussian(p) => {
                Ok(gamma_gaussian_at(&p, &self.crystal, self.sigma, z1, z2, x))
            }
            CorrelationSource::Spectrum(s) => {
                gamma_spectral(s, &self.crystal, self.sigma, z1 - z2, x, &self.cfg)
            }
        }
    }
}

/// Frequency-domain evaluation:
/// 2π ∫ |E(Ω)|² exp[i D_p v Ω²/4π − 2Ω²/σ² + iΩx] dΩ with v = z₁ − z₂.
pub fn gamma_spectral(
    spectrum: &(impl PumpSpectrum + ?Sized),
    crystal: &CrystalParams,
    sigma: FilterWidth,
    v: f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    let (lo, hi) = spectrum.support();
    let phase = crystal.dp * v / (4.0 * PI);
    let damp = 2.0 * sigma.inv_sq();
    let r = integrate_adaptive(
        |w| {
            Ok(spectrum.amplitude(w).norm_sqr()
                * Complex64::new(-damp * w * w, phase * w * w + w * x).exp())
        },
        lo,
        hi,
        &spectrum.breakpoints(),
        cfg,
        0.0,
    )?;
    Ok(2.0 * PI * r.value)
}

/// Time-domain evaluation ∫ E(z₁ − L/2, t) E*(z₂ − L/2, t + x) dt over
/// `window`, with both fields obtained by integrating the spectrum.
///
/// The integration variable is the midpoint s = t + x/2, so swapping
/// (z₁, x) with (z₂, −x) conjugates the integrand on the same nodes.
///
/// The fields at the window edges must be below 1e-4 of the largest field
/// sampled inside the window.
#[allow(clippy::too_many_arguments)]
pub fn gamma_numeric(
    spectrum: &(impl PumpSpectrum + ?Sized),
    crystal: &CrystalParams,
    sigma: FilterWidth,
    z1: f64,
    z2: f64,
    x: f64,
    window: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    let half = 0.5 * crystal.length;
    let field = |z: f64, t: f64| -> Result<Complex64> {
        Ok(propagated_filtered_pump(spectrum, crystal, sigma, z - half, t, cfg)?.value)
    };
    let (lo, hi) = window;
    let probe = 64;
    let mut peak: f64 = 0.0;
    let h = 0.5 * x;
    for k in 0..=probe {
        let s = lo + (hi - lo) * k as f64 / probe as f64;
        peak = peak.max(field(z1, s - h)?.norm()).max(field(z2, s + h)?.norm());
    }
    let edge = [field(z1, lo - h)?, field(z1, hi - h)?, field(z2, lo + h)?, field(z2, hi + h)?]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let limit = 1e-4;
    if !(edge < limit * peak) {
        return Err(Error::WindowTruncation {
            ratio: edge / peak,
            limit,
        });
    }
    let r = integrate_adaptive(
        |s| Ok(field(z1, s - h)? * field(z2, s + h)?.conj()),
        lo,
        hi,
        &[],
        cfg,
        0.0,
    )?;
    Ok(r.value)
}

/// Closed form for the Gaussian pulse at an arbitrary lag `x`.
pub fn gamma_gaussian_at(
    pump_input: &PumpPulse,
    crystal: &CrystalParams,
    sigma: FilterWidth,
    z1: f64,
    z2: f64,
    x: f64,
) -> Complex64 {
    let psi = Complex64::new(
        2.0 * pump_input.b() + 2.0 * sigma.inv_sq(),
        -crystal.dp * (z1 - z2) / (4.0 * PI),
    );
    let a2 = 1.0 + pump_input.chirp * pump_input.chirp;
    let prefactor =
        PI.sqrt() * pump_input.tau_d * pump_input.tau_d * pump_input.amplitude.norm_sqr() / (2.0 * a2.sqrt());
    prefactor / psi.sqrt() * (-(x * x) / (4.0 * psi)).exp()
}

/// Closed form for the Gaussian pulse at the lag x = Λ(z₁ − z₂).
pub fn gamma_gaussian(
    pump_input: &PumpPulse,
    crystal: &CrystalParams,
    sigma: FilterWidth,
    z1: f64,
    z2: f64,
) -> Complex64 {
    let x = crystal.pump_mismatch() * (z1 - z2);
    gamma_gaussian_at(pump_input, crystal, sigma, z1, z2, x)
}

/// Effective pump-side filter width σ = √2 σ₁.
pub fn effective_sigma(setup: &SetupConfig) -> FilterWidth {
    match setup.filters.sigma1 {
        FilterWidth::Finite(s) => FilterWidth::Finite(2f64.sqrt() * s),
        FilterWidth::Unbounded => FilterWidth::Unbounded,
    }
}

fn check_pump_only_dispersion(setup: &SetupConfig) -> Result<()> {
    let c = &setup.crystal;
    if c.d1 != 0.0 || c.d2 != 0.0 {
        return Err(Error::OutOfRegime(
            "the autocorrelation route allows second-order dispersion only in the pump".into(),
        ));
    }
    if setup.delay.d1 != setup.delay.d2 {
        return Err(Error::OutOfRegime(
            "the autocorrelation route needs equal delay-line dispersion d1 = d2".into(),
        ));
    }
    Ok(())
}

fn check_autocorr_regime(setup: &SetupConfig) -> Result<()> {
    check_pump_only_dispersion(setup)?;
    match (setup.filters.sigma1, setup.filters.sigma2) {
        (FilterWidth::Finite(a), FilterWidth::Finite(b)) if a == b => Ok(()),
        _ => Err(Error::OutOfRegime(
            "the autocorrelation route needs two finite filters of equal width".into(),
        )),
    }
}

/// erf(b) − erf(a) for a ≤ b without cancellation in the tails.
fn erf_diff(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        libm::erfc(a) - libm::erfc(b)
    } else if b < 0.0 {
        libm::erfc(-b) - libm::erfc(-a)
    } else {
        libm::erf(b) - libm::erf(a)
    }
}

/// ρ(Δτ_l) from a pump correlation. γ depends on z₁, z₂ only through
/// v = z₁ − z₂, so the u = z₁ + z₂ integral of the phase-matching factor
/// is done in closed form and one v-integral remains for each of the
/// numerator and R₀.
pub fn rho_autocorr_with(
    corr: &PumpCorrelation<'_>,
    setup: &SetupConfig,
    dtau: f64,
    cfg: &QuadratureConfig,
) -> Result<RhoEstimate> {
    check_autocorr_regime(setup)?;
    let sigma = effective_sigma(setup)
        .sigma()
        .expect("regime check guarantees finite filters");
    let c = &setup.crystal;
    let len = c.length;
    let d = c.mismatch();
    let lambda = c.pump_mismatch();
    let width = 4.0 / (sigma * d);
    let g = |v: f64| corr.gamma(0.5 * v, -0.5 * v, lambda * v);

    let den = integrate_adaptive(
        |v| Ok(g(v)? * ((len - v.abs()) * (-(sigma * d * v).powi(2) / 32.0).exp())),
        -len,
        len,
        &graded_breakpoints(-len, len, 0.0, width),
        cfg,
        0.0,
    )?;
    let norm = den.value.re;
    if !(norm > 0.0) {
        return Err(Error::OutOfRegime(format!("R0 = {norm:e} is not positive")));
    }

    // ∫ exp[−σ²/8 (Δτ + D u/2)²] du over |u| ≤ w.
    let k = sigma / (2.0 * 2f64.sqrt());
    let scale = 4.0 * 2f64.sqrt() / (sigma * d) * 0.5 * PI.sqrt();
    let h = |w: f64| scale * erf_diff(k * (dtau - 0.5 * d * w), k * (dtau + 0.5 * d * w));
    let edge = len - (2.0 * dtau / d).abs();
    let mut breaks = vec![0.0];
    if edge > 0.0 {
        breaks.extend(graded_breakpoints(-len, len, edge, width));
        breaks.extend(graded_breakpoints(-len, len, -edge, width));
    }
    let num = integrate_adaptive(
        |v| Ok(g(v)? * (0.5 * h(len - v.abs()))),
        -len,
        len,
        &breaks,
        cfg,
        cfg.rel_tol * norm,
    )?;
    let rho = num.value.re / norm;
    let abs_err = num.abs_error() / norm + rho.abs() * den.est_rel_error;
    Ok(RhoEstimate {
        rho,
        est_rel_error: if rho != 0.0 { abs_err / rho.abs() } else { abs_err },
        converged: num.converged && den.converged,
    })
}

/// [`rho_autocorr_with`] for the Gaussian input pulse of `setup`.
pub fn rho_autocorr(setup: &SetupConfig, dtau: f64, cfg: &QuadratureConfig) -> Result<RhoEstimate> {
    let corr = PumpCorrelation::gaussian(setup.pump_input, setup.crystal, effective_sigma(setup));
    rho_autocorr_with(&corr, setup, dtau, cfg)
}

/// [`rho_autocorr_with`] for a tabulated or other input-plane spectrum.
pub fn rho_autocorr_spectrum(
    setup: &SetupConfig,
    spectrum: &dyn PumpSpectrum,
    dtau: f64,
    cfg: &QuadratureConfig,
) -> Result<RhoEstimate> {
    let corr = PumpCorrelation::spectral(spectrum, setup.crystal, effective_sigma(setup), *cfg);
    rho_autocorr_with(&corr, setup, dtau, cfg)
}

/// Unfiltered limit: a single integral of γ_∞ along the line selected by
/// the delay, normalized by L γ_∞(0, 0, 0). The rectangular window is 1 on
/// 0 < x < 1.
pub fn rho_nofilter_with(
    corr: &PumpCorrelation<'_>,
    setup: &SetupConfig,
    dtau: f64,
    cfg: &QuadratureConfig,
) -> Result<RhoEstimate> {
    if setup.filters.any_finite() {
        return Err(Error::OutOfRegime(
            "the unfiltered route needs unbounded filters".into(),
        ));
    }
    check_pump_only_dispersion(setup)?;
    let c = &setup.crystal;
    let len = c.length;
    let d = c.mismatch();
    let shift = 2.0 * dtau / d;
    let lo = (-0.5 * len).max(-0.5 * len - shift);
    let hi = (0.5 * len).min(0.5 * len - shift);
    if !(hi > lo) {
        return Ok(RhoEstimate {
            rho: 0.0,
            est_rel_error: 0.0,
            converged: true,
        });
    }
    let lambda = c.pump_mismatch();
    let norm = corr.gamma(0.0, 0.0, 0.0)?.re * len;
    let r = integrate_adaptive(
        |z| {
            let v = 2.0 * z + shift;
            corr.gamma(z, -z - shift, lambda * v)
        },
        lo,
        hi,
        &[],
        cfg,
        cfg.rel_tol * norm,
    )?;
    Ok(RhoEstimate {
        rho: r.value.re / norm,
        est_rel_error: r.est_rel_error,
        converged: r.converged,
    })
}

/// [`rho_nofilter_with`] for the Gaussian input pulse of `setup`.
pub fn rho_nofilter(setup: &SetupConfig, dtau: f64, cfg: &QuadratureConfig) -> Result<RhoEstimate> {
    let corr = PumpCorrelation::gaussian(setup.pump_input, setup.crystal, FilterWidth::Unbounded);
    rho_nofilter_with(&corr, setup, dtau, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phys::FilterPair;
    use crate::pump::GaussianSpectrum;

    fn setup(dp: f64, filters: FilterPair) -> SetupConfig {
        let s = SetupConfig::reference(3.0, 1.55e-13, 0.0, filters).unwrap();
        s.with_crystal(s.crystal.with_second_order(dp, 0.0, 0.0).unwrap())
    }

    #[test]
    fn equal_depths_give_real_positive_gaussian_correlation() {
        let s = setup(1e-25, FilterPair::equal_nm(50.0).unwrap());
        let g = gamma_gaussian_at(&s.pump_input, &s.crystal, effective_sigma(&s), 0.4, 0.4, 0.0);
        assert!(g.re > 0.0 && g.im == 0.0);
    }

    #[test]
    fn spectral_matches_closed_form() {
        let s = setup(2e-25, FilterPair::equal_nm(50.0).unwrap());
        let spec = GaussianSpectrum(s.pump_input);
        let sigma = effective_sigma(&s);
        let cfg = QuadratureConfig::default().with_rel_tol(1e-11);
        for (z1, z2, x) in [(0.3, -1.2, 1e-13), (1.5, 1.5, 0.0), (-1.0, 0.7, -2e-13)] {
            let a = gamma_gaussian_at(&s.pump_input, &s.crystal, sigma, z1, z2, x);
            let b = gamma_spectral(&spec, &s.crystal, sigma, z1 - z2, x, &cfg).unwrap();
            assert!((a - b).norm() < 1e-9 * a.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn unfiltered_matches_closed_form_dip() {
        let s = setup(0.0, FilterPair::none());
        let cfg = QuadratureConfig::default().with_rel_tol(1e-12);
        let half = 0.5 * s.crystal.dip_width();
        for k in -5..=5 {
            let dtau = 0.95 * half * k as f64 / 5.0;
            let a = crate::interference::rho_analytic(&s, dtau).unwrap();
            let b = rho_nofilter(&s, dtau, &cfg).unwrap().rho;
            assert!((a - b).abs() < 1e-6, "dtau = {dtau:e}: {a} vs {b}");
        }
        assert_eq!(rho_nofilter(&s, half, &cfg).unwrap().rho, 0.0);
        assert_eq!(rho_nofilter(&s, -1.2 * half, &cfg).unwrap().rho, 0.0);
    }

    #[test]
    fn regime_checks() {
        let cfg = QuadratureConfig::default();
        let s = setup(0.0, FilterPair::none());
        assert!(rho_autocorr(&s, 0.0, &cfg).is_err());
        let f = setup(0.0, FilterPair::equal_nm(50.0).unwrap());
        assert!(rho_nofilter(&f, 0.0, &cfg).is_err());
        let d1 = f.with_crystal(f.crystal.with_second_order(0.0, 1e-25, 0.0).unwrap());
        assert!(rho_autocorr(&d1, 0.0, &cfg).is_err());
    }

    #[test]
    fn erf_difference_tails() {
        assert!((erf_diff(-1.0, 2.0) - (libm::erf(2.0) + libm::erf(1.0))).abs() < 1e-15);
        let tail = erf_diff(6.0, 7.0);
        assert!(tail > 0.0 && tail < 1e-15);
        assert!((erf_diff(-7.0, -6.0) - tail).abs() < 1e-30);
    }
}
