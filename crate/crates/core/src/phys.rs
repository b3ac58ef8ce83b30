//! Physical parameters and unit conventions.
//!
//! Lengths are in millimetres, times in seconds, angular frequencies in
//! rad/s. Inverse group velocities are in s/mm and second-order dispersion
//! coefficients (2π d²k/dω²) in s²/mm.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Vacuum speed of light in nm/s.
pub const SPEED_OF_LIGHT_NM_PER_S: f64 = 2.997_924_58e17;

fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be > 0, got {value}"),
        })
    }
}

/// Nonlinear crystal of length `length` extending over z ∈ [-L, 0].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalParams {
    pub length: f64,
    pub inv_vp: f64,
    pub inv_v1: f64,
    pub inv_v2: f64,
    pub dp: f64,
    pub d1: f64,
    pub d2: f64,
}

impl CrystalParams {
    /// Crystal without second-order dispersion.
    pub fn new(length: f64, inv_vp: f64, inv_v1: f64, inv_v2: f64) -> Result<Self> {
        Self::with_dispersion(length, inv_vp, inv_v1, inv_v2, 0.0, 0.0, 0.0)
    }

    pub fn with_dispersion(
        length: f64,
        inv_vp: f64,
        inv_v1: f64,
        inv_v2: f64,
        dp: f64,
        d1: f64,
        d2: f64,
    ) -> Result<Self> {
        require_positive("crystal.length", length)?;
        for (name, v) in [
            ("crystal.inv_vp", inv_vp),
            ("crystal.inv_v1", inv_v1),
            ("crystal.inv_v2", inv_v2),
            ("crystal.Dp", dp),
            ("crystal.D1", d1),
            ("crystal.D2", d2),
        ] {
            require_finite(name, v)?;
        }
        let crystal = Self {
            length,
            inv_vp,
            inv_v1,
            inv_v2,
            dp,
            d1,
            d2,
        };
        let d = crystal.mismatch();
        if d <= 0.0 {
            return Err(Error::NonPositiveMismatch { value: d });
        }
        Ok(crystal)
    }

    /// BBO, type II, 397.5 nm → 2 × 795 nm.
    pub fn bbo(length: f64) -> Result<Self> {
        Self::new(length, 57.05e-13, 56.2e-13, 54.26e-13)
    }

    pub fn with_second_order(mut self, dp: f64, d1: f64, d2: f64) -> Result<Self> {
        self.dp = dp;
        self.d1 = d1;
        self.d2 = d2;
        Self::with_dispersion(
            self.length,
            self.inv_vp,
            self.inv_v1,
            self.inv_v2,
            dp,
            d1,
            d2,
        )
    }

    /// Group-velocity mismatch D = 1/v₁ − 1/v₂ of the down-converted beams.
    pub fn mismatch(&self) -> f64 {
        self.inv_v1 - self.inv_v2
    }

    /// Λ = 1/v_p − (1/v₁ + 1/v₂)/2, the pump-to-mean mismatch that tilts
    /// the two-photon amplitude.
    pub fn pump_mismatch(&self) -> f64 {
        self.inv_vp - 0.5 * (self.inv_v1 + self.inv_v2)
    }

    /// `(D, Λ)`.
    pub fn derived_d_lambda(&self) -> (f64, f64) {
        (self.mismatch(), self.pump_mismatch())
    }

    /// Dip width D·L in seconds.
    pub fn dip_width(&self) -> f64 {
        self.mismatch() * self.length
    }

    pub fn has_second_order(&self) -> bool {
        self.dp != 0.0 || self.d1 != 0.0 || self.d2 != 0.0
    }
}

/// Gaussian pump pulse `ξ₀ exp(-(1 + i a) t² / τ_D²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpPulse {
    pub tau_d: f64,
    pub chirp: f64,
    pub amplitude: Complex64,
}

impl PumpPulse {
    pub fn new(tau_d: f64, chirp: f64) -> Result<Self> {
        Self::with_amplitude(tau_d, chirp, Complex64::new(1.0, 0.0))
    }

    pub fn with_amplitude(tau_d: f64, chirp: f64, amplitude: Complex64) -> Result<Self> {
        require_positive("pump.tau_D", tau_d)?;
        require_finite("pump.chirp", chirp)?;
        if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "pump.amplitude",
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            tau_d,
            chirp,
            amplitude,
        })
    }

    /// b = τ_D² / (4(1 + a²)), the inverse squared pump bandwidth.
    pub fn b(&self) -> f64 {
        self.tau_d * self.tau_d / (4.0 * (1.0 + self.chirp * self.chirp))
    }
}

/// Birefringent delay line of length `length` placed after the crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayLine {
    pub inv_g1: f64,
    pub inv_g2: f64,
    pub d1: f64,
    pub d2: f64,
    pub length: f64,
}

impl DelayLine {
    pub fn new(inv_g1: f64, inv_g2: f64, d1: f64, d2: f64, length: f64) -> Result<Self> {
        for (name, v) in [
            ("delay.inv_g1", inv_g1),
            ("delay.inv_g2", inv_g2),
            ("delay.d1", d1),
            ("delay.d2", d2),
        ] {
            require_finite(name, v)?;
        }
        require_finite("delay.length", length)?;
        if length < 0.0 {
            return Err(Error::InvalidParameter {
                name: "delay.length",
                reason: format!("must be >= 0, got {length}"),
            });
        }
        Ok(Self {
            inv_g1,
            inv_g2,
            d1,
            d2,
            length,
        })
    }

    /// Quartz delay line without second-order dispersion.
    pub fn quartz(length: f64) -> Result<Self> {
        Self::new(51.81e-13, 52.08e-13, 0.0, 0.0, length)
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(self.inv_g1, self.inv_g2, self.d1, self.d2, length)
    }

    /// Delay per unit length, 1/g₂ − 1/g₁ [s/mm].
    pub fn delay_rate(&self) -> f64 {
        self.inv_g2 - self.inv_g1
    }

    /// τ_l = (1/g₂ − 1/g₁)·l.
    pub fn relative_delay(&self) -> f64 {
        self.delay_rate() * self.length
    }

    /// Common group delay (l/g₁ + l/g₂)/2, the t-shift of the amplitude.
    pub fn mean_delay(&self) -> f64 {
        0.5 * (self.inv_g1 + self.inv_g2) * self.length
    }

    /// Δτ_l = τ_l − D L / 2.
    pub fn dtau(&self, crystal: &CrystalParams) -> f64 {
        self.relative_delay() - 0.5 * crystal.dip_width()
    }

    /// Delay-line length that produces a given Δτ_l.
    pub fn length_for_dtau(&self, crystal: &CrystalParams, dtau: f64) -> Result<f64> {
        let rate = self.delay_rate();
        if rate == 0.0 {
            return Err(Error::InvalidParameter {
                name: "delay.inv_g",
                reason: "1/g1 = 1/g2: the delay line cannot scan the dip".into(),
            });
        }
        Ok((dtau + 0.5 * crystal.dip_width()) / rate)
    }
}

/// Free-standing form of [`DelayLine::dtau`].
pub fn delay_to_dtau(delay: &DelayLine, crystal: &CrystalParams) -> f64 {
    delay.dtau(crystal)
}

/// Gaussian filter width; `Unbounded` is the absence of a filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterWidth {
    Finite(f64),
    Unbounded,
}

impl FilterWidth {
    pub fn finite(sigma: f64) -> Result<Self> {
        require_positive("filter.sigma", sigma)?;
        Ok(Self::Finite(sigma))
    }

    /// Filter given by its FWHM-style width in nm at a central wavelength.
    pub fn from_wavelength(delta_lambda_nm: f64, lambda0_nm: f64) -> Result<Self> {
        if delta_lambda_nm == f64::INFINITY {
            return Ok(Self::Unbounded);
        }
        Ok(Self::Finite(filter_width_from_wavelength(
            delta_lambda_nm,
            lambda0_nm,
        )?))
    }

    /// 1/σ², zero for an unbounded filter.
    pub fn inv_sq(&self) -> f64 {
        match *self {
            Self::Finite(s) => 1.0 / (s * s),
            Self::Unbounded => 0.0,
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            Self::Finite(s) => Some(s),
            Self::Unbounded => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }
}

/// σ = 2πc Δλ / λ₀² in rad/s.
pub fn filter_width_from_wavelength(delta_lambda_nm: f64, lambda0_nm: f64) -> Result<f64> {
    require_positive("filter.delta_lambda", delta_lambda_nm)?;
    require_positive("filter.lambda0", lambda0_nm)?;
    Ok(2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_NM_PER_S * delta_lambda_nm
        / (lambda0_nm * lambda0_nm))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterPair {
    pub sigma1: FilterWidth,
    pub sigma2: FilterWidth,
}

impl FilterPair {
    pub fn new(sigma1: FilterWidth, sigma2: FilterWidth) -> Self {
        Self { sigma1, sigma2 }
    }

    pub fn none() -> Self {
        Self::new(FilterWidth::Unbounded, FilterWidth::Unbounded)
    }

    pub fn equal(sigma: FilterWidth) -> Self {
        Self::new(sigma, sigma)
    }

    /// Equal filters of width `delta_lambda_nm` at the degenerate 795 nm.
    pub fn equal_nm(delta_lambda_nm: f64) -> Result<Self> {
        Ok(Self::equal(FilterWidth::from_wavelength(
            delta_lambda_nm,
            DEFAULT_SIGNAL_NM,
        )?))
    }

    pub fn any_finite(&self) -> bool {
        self.sigma1.is_finite() || self.sigma2.is_finite()
    }

    pub fn both_finite(&self) -> bool {
        self.sigma1.is_finite() && self.sigma2.is_finite()
    }

    /// Largest finite width, if any.
    pub fn widest(&self) -> Option<f64> {
        match (self.sigma1.sigma(), self.sigma2.sigma()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

pub const DEFAULT_PUMP_NM: f64 = 397.5;
pub const DEFAULT_SIGNAL_NM: f64 = 795.0;

/// Central angular frequencies ω⁰_p, ω⁰₁, ω⁰₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralFrequencies {
    pub omega_p: f64,
    pub omega_1: f64,
    pub omega_2: f64,
}

impl CentralFrequencies {
    pub fn new(omega_p: f64, omega_1: f64, omega_2: f64) -> Result<Self> {
        require_positive("centers.omega_p", omega_p)?;
        require_positive("centers.omega_1", omega_1)?;
        require_positive("centers.omega_2", omega_2)?;
        if ((omega_1 + omega_2) - omega_p).abs() > 1e-9 * omega_p {
            return Err(Error::InvalidParameter {
                name: "centers.omega_p",
                reason: format!(
                    "frequency phase matching requires omega_p = omega_1 + omega_2 ({omega_p:e} vs {:e})",
                    omega_1 + omega_2
                ),
            });
        }
        if (omega_1 - omega_2).abs() > 1e-9 * omega_1 {
            return Err(Error::InvalidParameter {
                name: "centers.omega_1",
                reason: "interference expressions require the degenerate case omega_1 = omega_2"
                    .into(),
            });
        }
        Ok(Self {
            omega_p,
            omega_1,
            omega_2,
        })
    }

    pub fn from_wavelengths(lambda_p_nm: f64, lambda1_nm: f64, lambda2_nm: f64) -> Result<Self> {
        let to_omega = |name, l: f64| -> Result<f64> {
            require_positive(name, l)?;
            Ok(2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_NM_PER_S / l)
        };
        Self::new(
            to_omega("centers.lambda_p", lambda_p_nm)?,
            to_omega("centers.lambda_1", lambda1_nm)?,
            to_omega("centers.lambda_2", lambda2_nm)?,
        )
    }
}

impl Default for CentralFrequencies {
    fn default() -> Self {
        Self::from_wavelengths(DEFAULT_PUMP_NM, DEFAULT_SIGNAL_NM, DEFAULT_SIGNAL_NM)
            .expect("default wavelengths are degenerate")
    }
}

/// Everything needed to evaluate amplitudes and interference patterns.
///
/// The pump is supplied at the crystal input plane; the output-plane pulse
/// (which the amplitude formulas use) is derived on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupConfig {
    pub crystal: CrystalParams,
    pub pump_input: PumpPulse,
    pub pump: PumpPulse,
    pub delay: DelayLine,
    pub filters: FilterPair,
    pub centers: CentralFrequencies,
}

impl SetupConfig {
    pub fn new(
        crystal: CrystalParams,
        pump_input: PumpPulse,
        delay: DelayLine,
        filters: FilterPair,
    ) -> Self {
        Self::with_centers(
            crystal,
            pump_input,
            delay,
            filters,
            CentralFrequencies::default(),
        )
    }

    pub fn with_centers(
        crystal: CrystalParams,
        pump_input: PumpPulse,
        delay: DelayLine,
        filters: FilterPair,
        centers: CentralFrequencies,
    ) -> Self {
        let pump = pump_input.propagate_through_crystal(&crystal);
        Self {
            crystal,
            pump_input,
            pump,
            delay,
            filters,
            centers,
        }
    }

    /// BBO + quartz defaults with the given crystal length, input pulse and
    /// filters; all second-order terms zero and l = 0.
    pub fn reference(length: f64, tau_di: f64, chirp_ai: f64, filters: FilterPair) -> Result<Self> {
        Ok(Self::new(
            CrystalParams::bbo(length)?,
            PumpPulse::new(tau_di, chirp_ai)?,
            DelayLine::quartz(0.0)?,
            filters,
        ))
    }

    pub fn with_delay_length(&self, length: f64) -> Result<Self> {
        Ok(Self {
            delay: self.delay.with_length(length)?,
            ..*self
        })
    }

    pub fn with_crystal(&self, crystal: CrystalParams) -> Self {
        Self::with_centers(crystal, self.pump_input, self.delay, self.filters, self.centers)
    }

    pub fn with_pump_input(&self, pump_input: PumpPulse) -> Self {
        Self::with_centers(self.crystal, pump_input, self.delay, self.filters, self.centers)
    }

    pub fn with_delay(&self, delay: DelayLine) -> Self {
        Self { delay, ..*self }
    }

    pub fn with_filters(&self, filters: FilterPair) -> Self {
        Self { filters, ..*self }
    }

    pub fn b(&self) -> f64 {
        self.pump.b()
    }

    pub fn dtau(&self) -> f64 {
        self.delay.dtau(&self.crystal)
    }

    /// Length l at which Δτ_l takes the given value.
    pub fn length_for_dtau(&self, dtau: f64) -> Result<f64> {
        self.delay.length_for_dtau(&self.crystal, dtau)
    }

    /// Setup with the delay-line length chosen so that Δτ_l = `dtau`.
    ///
    /// Delays that would need l < 0 are realized, for a delay line without
    /// second-order dispersion, by the mirrored line (1/g₁ and 1/g₂
    /// exchanged) of positive length; τ_l and the mean delay (the only
    /// places l enters then) are the same.
    pub fn with_dtau(&self, dtau: f64) -> Result<Self> {
        let l = self.length_for_dtau(dtau)?;
        if l >= 0.0 {
            return self.with_delay_length(l);
        }
        let d = &self.delay;
        if d.d1 != 0.0 || d.d2 != 0.0 {
            return Err(Error::InvalidParameter {
                name: "delay.length",
                reason: format!(
                    "dtau = {dtau:e} s needs l = {l} mm < 0, which a dispersive delay line cannot realize"
                ),
            });
        }
        let mirrored = DelayLine::new(d.inv_g2, d.inv_g1, 0.0, 0.0, 0.0)?;
        let l = mirrored.length_for_dtau(&self.crystal, dtau)?;
        Ok(self.with_delay(mirrored.with_length(l)?))
    }

    /// No second-order dispersion anywhere.
    pub fn first_order_only(&self) -> bool {
        !self.crystal.has_second_order() && self.delay.d1 == 0.0 && self.delay.d2 == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn bbo_mismatches() {
        let (d, lambda) = CrystalParams::bbo(3.0).unwrap().derived_d_lambda();
        assert!(rel(d, 1.94e-13) < 1e-12);
        assert!(rel(lambda, 1.82e-13) < 1e-12);
    }

    #[test]
    fn symmetric_pump_velocity_gives_zero_lambda() {
        let c = CrystalParams::new(3.0, 55.23e-13, 56.2e-13, 54.26e-13).unwrap();
        assert!(c.pump_mismatch().abs() < 1e-27);
    }

    #[test]
    fn equal_signal_velocities_rejected() {
        let err = CrystalParams::new(3.0, 57.05e-13, 56.2e-13, 56.2e-13).unwrap_err();
        assert!(matches!(err, Error::NonPositiveMismatch { .. }));
        let err = CrystalParams::new(3.0, 57.05e-13, 54.26e-13, 56.2e-13).unwrap_err();
        assert!(err.to_string().contains("swap the beam labels"));
    }

    #[test]
    fn non_positive_length_rejected() {
        assert!(CrystalParams::bbo(0.0).is_err());
        assert!(CrystalParams::bbo(-1.0).is_err());
        assert!(DelayLine::quartz(-0.1).is_err());
        assert!(PumpPulse::new(0.0, 0.0).is_err());
    }

    #[test]
    fn mismatch_is_linear() {
        let c = CrystalParams::bbo(3.0).unwrap();
        let s = 1.7;
        let scaled = CrystalParams::new(3.0, s * c.inv_vp, s * c.inv_v1, s * c.inv_v2).unwrap();
        assert!(rel(scaled.mismatch(), s * c.mismatch()) < 1e-12);
        assert!(rel(scaled.pump_mismatch(), s * c.pump_mismatch()) < 1e-12);
    }

    #[test]
    fn quartz_balances_bbo_near_ten_point_eight_mm() {
        let crystal = CrystalParams::bbo(3.0).unwrap();
        let delay = DelayLine::quartz(10.78).unwrap();
        // τ_l/l = 2.7e-14 s/mm, DL/2 = 2.91e-13 s.
        assert!(delay_to_dtau(&delay, &crystal).abs() < 1e-16);
        let l = delay.length_for_dtau(&crystal, 0.0).unwrap();
        assert!((l - 10.777_777_777_8).abs() < 1e-6);
    }

    #[test]
    fn dtau_edge_cases() {
        let crystal = CrystalParams::bbo(3.0).unwrap();
        let half = 0.5 * crystal.dip_width();
        let at_zero = DelayLine::quartz(0.0).unwrap();
        assert_eq!(at_zero.dtau(&crystal), -half);
        let flat = DelayLine::new(52.0e-13, 52.0e-13, 0.0, 0.0, 17.0).unwrap();
        assert_eq!(flat.dtau(&crystal), -half);
        assert!(flat.length_for_dtau(&crystal, 0.0).is_err());
    }

    #[test]
    fn dtau_beyond_zero_length_uses_mirrored_line() {
        let s = SetupConfig::reference(3.0, 1.55e-13, 0.0, FilterPair::none()).unwrap();
        let half = 0.5 * s.crystal.dip_width();
        for dtau in [-3.0 * half, -half, 0.0, 2.0 * half] {
            let m = s.with_dtau(dtau).unwrap();
            assert!(m.delay.length >= 0.0);
            assert!((m.dtau() - dtau).abs() < 1e-12 * half);
            // mean delay tracks the signed length
            let l = s.length_for_dtau(dtau).unwrap();
            assert!((m.delay.mean_delay() - 0.5 * (51.81e-13 + 52.08e-13) * l.abs()).abs() < 1e-24);
        }
        let dispersive = s.with_delay(DelayLine::new(51.81e-13, 52.08e-13, 1e-25, 0.0, 0.0).unwrap());
        assert!(dispersive.with_dtau(-2.0 * half).is_err());
    }

    #[test]
    fn filter_conversion() {
        let s50 = filter_width_from_wavelength(50.0, 795.0).unwrap();
        assert!(rel(s50, 1.4902e14) < 1e-3);
        let s100 = filter_width_from_wavelength(100.0, 795.0).unwrap();
        assert!(rel(s100, 2.0 * s50) < 1e-14);
        assert!(rel(s100, 2.98e14) < 2e-3);
        assert!(filter_width_from_wavelength(0.0, 795.0).is_err());
        assert!(filter_width_from_wavelength(10.0, -795.0).is_err());
        assert_eq!(
            FilterWidth::from_wavelength(f64::INFINITY, 795.0).unwrap(),
            FilterWidth::Unbounded
        );
        assert_eq!(FilterWidth::Unbounded.inv_sq(), 0.0);
    }

    #[test]
    fn central_frequencies_must_be_degenerate_and_matched() {
        let c = CentralFrequencies::default();
        assert!(rel(c.omega_p, c.omega_1 + c.omega_2) < 1e-12);
        assert!(CentralFrequencies::from_wavelengths(397.5, 780.0, 810.0).is_err());
        assert!(CentralFrequencies::from_wavelengths(400.0, 795.0, 795.0).is_err());
    }

    #[test]
    fn b_parameter() {
        let p = PumpPulse::new(1.55e-13, 0.0).unwrap();
        assert!(rel(p.b(), 6.00625e-27) < 1e-12);
        let q = PumpPulse::new(1.55e-13 * 5f64.sqrt(), 2.0).unwrap();
        assert!(rel(q.b(), p.b()) < 1e-14);
    }
}
