//! Interference term ρ(l), normalization R₀, Rₙ = 1 − ρ and visibility.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::amplitude::{amplitude_on_axes, ridge_breaks, AmplitudeGrid};
use crate::autocorr::rho_nofilter;
use crate::error::{Error, Result};
use crate::kernel::{BarBetaCGamma, GaussKernel, TildeBetaCGamma};
use crate::phys::{PumpPulse, SetupConfig};
use crate::quadrature::{integrate_adaptive, QuadratureConfig, QuadratureResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoEstimate {
    pub rho: f64,
    pub est_rel_error: f64,
    pub converged: bool,
}

impl RhoEstimate {
    fn exact(rho: f64) -> Self {
        Self {
            rho,
            est_rel_error: 0.0,
            converged: true,
        }
    }
}

/// ρ-numerator kernel at (z₁, z₂) ∈ [−L, 0]².
pub fn bar_beta_c_gamma(setup: &SetupConfig, z1: f64, z2: f64) -> BarBetaCGamma {
    let c = &setup.crystal;
    let d = &setup.delay;
    let l = d.length;
    let q = 1.0 / (4.0 * PI);
    let s = setup.filters.sigma1.inv_sq() + setup.filters.sigma2.inv_sq();
    let e1 = Complex64::new(
        s,
        -q * ((d.d1 - d.d2) * l + (c.dp - c.d1) * z1 - (c.dp - c.d2) * z2),
    );
    let e2 = Complex64::new(
        s,
        -q * ((d.d2 - d.d1) * l + (c.dp - c.d2) * z1 - (c.dp - c.d1) * z2),
    );
    let a1 = c.inv_vp - c.inv_v1;
    let a2 = c.inv_vp - c.inv_v2;
    let g = (d.inv_g1 - d.inv_g2) * l;
    GaussKernel {
        p: Complex64::new(2.0 * setup.b(), 0.0),
        e1,
        e2,
        e_gamma: Complex64::new(0.0, -q * c.dp * (z1 - z2)),
        c1: a1 * z1 - a2 * z2 + g,
        c2: a1 * z2 - a2 * z1 + g,
    }
}

/// R₀ kernel at (z₁, z₂) ∈ [−L, 0]²; depends on z₁ − z₂ only.
pub fn tilde_beta_c_gamma(setup: &SetupConfig, z1: f64, z2: f64) -> TildeBetaCGamma {
    let c = &setup.crystal;
    let q = 1.0 / (4.0 * PI);
    let v = z1 - z2;
    GaussKernel {
        p: Complex64::new(2.0 * setup.b(), 0.0),
        e1: Complex64::new(2.0 * setup.filters.sigma1.inv_sq(), -q * (c.dp - c.d1) * v),
        e2: Complex64::new(2.0 * setup.filters.sigma2.inv_sq(), -q * (c.dp - c.d2) * v),
        e_gamma: Complex64::new(0.0, -q * c.dp * v),
        c1: (c.inv_vp - c.inv_v1) * v,
        c2: -(c.inv_vp - c.inv_v2) * v,
    }
}

/// R₀ up to the common prefactor, as ∫(L − |v|) f(v) dv over v = z₁ − z₂.
pub fn r0_numeric(setup: &SetupConfig, cfg: &QuadratureConfig) -> Result<QuadratureResult> {
    if !setup.filters.any_finite() {
        return Err(Error::DegenerateKernel);
    }
    let len = setup.crystal.length;
    let at = |v: f64| (0.5 * v - 0.5 * len, -0.5 * v - 0.5 * len);
    let probe = tilde_beta_c_gamma(setup, -0.5 * len, -0.5 * len);
    let breaks = ridge_breaks(-len, len, 0.0, &probe, setup.crystal.mismatch());
    integrate_adaptive(
        |v| {
            let (z1, z2) = at(v);
            Ok(tilde_beta_c_gamma(setup, z1, z2).value((z1, z2))? * (len - v.abs()))
        },
        -len,
        len,
        &breaks,
        cfg,
        0.0,
    )
}

/// ρ-numerator up to the common prefactor, integrated in u = z₁ + z₂,
/// v = z₁ − z₂. `abs_tol` is the absolute accuracy requested for the
/// result.
pub fn rho_numerator(
    setup: &SetupConfig,
    cfg: &QuadratureConfig,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    if !setup.filters.any_finite() {
        return Err(Error::DegenerateKernel);
    }
    let len = setup.crystal.length;
    let d = setup.crystal.mismatch();
    // c̄₁ + c̄₂ = −D u − 2τ_l vanishes on this line.
    let u0 = (-2.0 * setup.delay.relative_delay() / d).clamp(-2.0 * len, 0.0);
    let probe = bar_beta_c_gamma(setup, 0.5 * u0, 0.5 * u0);
    let mut breaks = ridge_breaks(-2.0 * len, 0.0, u0, &probe, d);
    breaks.push(-len);
    let inner_ok = Cell::new(true);
    // I = ½ ∫du ∫dv; the inner tolerance spreads the budget over the u-range.
    let inner_tol = abs_tol / (2.0 * len);
    let outer = integrate_adaptive(
        |u| {
            let w = len - (u + len).abs();
            if w <= 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let r = integrate_adaptive(
                |v| {
                    let (z1, z2) = (0.5 * (u + v), 0.5 * (u - v));
                    bar_beta_c_gamma(setup, z1, z2).value((z1, z2))
                },
                -w,
                w,
                &[0.0],
                cfg,
                inner_tol,
            )?;
            if !r.converged {
                inner_ok.set(false);
            }
            Ok(r.value)
        },
        -2.0 * len,
        0.0,
        &breaks,
        cfg,
        2.0 * abs_tol,
    )?;
    Ok(QuadratureResult {
        value: 0.5 * outer.value,
        converged: outer.converged && inner_ok.get(),
        ..outer
    })
}

/// ρ at the delay-line length stored in `setup`, as the ratio of the
/// numerator and R₀ integrals.
pub fn rho_numeric(setup: &SetupConfig, cfg: &QuadratureConfig) -> Result<RhoEstimate> {
    let r0 = r0_numeric(setup, cfg)?;
    let norm = r0.value.re;
    if !(norm > 0.0) {
        return Err(Error::OutOfRegime(format!("R0 = {norm:e} is not positive")));
    }
    let num = rho_numerator(setup, cfg, cfg.rel_tol * norm)?;
    let rho = num.value.re / norm;
    let abs_err = num.abs_error() / norm + rho.abs() * r0.est_rel_error;
    Ok(RhoEstimate {
        rho,
        est_rel_error: if rho != 0.0 { abs_err / rho.abs() } else { abs_err },
        converged: r0.converged && num.converged,
    })
}

/// √π erf(κ) / (2κ), continuous at κ = 0.
fn erf_ratio(kappa: f64) -> f64 {
    if kappa.abs() < 1e-4 {
        1.0 - kappa * kappa / 3.0
    } else {
        PI.sqrt() * libm::erf(kappa) / (2.0 * kappa)
    }
}

/// Closed form without filters and second-order dispersion; 0 outside
/// |Δτ_l| ≤ DL/2.
pub fn rho_analytic(setup: &SetupConfig, dtau: f64) -> Result<f64> {
    if setup.filters.any_finite() || !setup.first_order_only() {
        return Err(Error::OutOfRegime(
            "the closed-form dip needs unbounded filters and no second-order dispersion".into(),
        ));
    }
    let c = &setup.crystal;
    let half = 0.5 * c.dip_width();
    let h = half - dtau.abs();
    if h <= 0.0 {
        return Ok(0.0);
    }
    let p = &setup.pump_input;
    let kappa = 2f64.sqrt() * c.pump_mismatch().abs() * (1.0 + p.chirp * p.chirp).sqrt() * h
        / (c.mismatch() * p.tau_d);
    Ok(h / half * erf_ratio(kappa))
}

/// V = ρ / (2 − ρ) at the dip centre.
pub fn visibility(rho: f64) -> Result<f64> {
    if !(rho >= 0.0 && rho <= 1.0 + 1e-6) {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: format!("visibility needs 0 <= rho <= 1, got {rho}"),
        });
    }
    let rho = rho.min(1.0);
    Ok(rho / (2.0 - rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed form where it applies, the unfiltered single-z route for
    /// pump-only dispersion without filters, the double integral otherwise.
    #[default]
    Auto,
    Numeric,
    Analytic,
    Autocorr,
    NoFilter,
    Overlap,
}

impl Method {
    pub fn resolve(self, setup: &SetupConfig) -> Self {
        if self != Method::Auto {
            return self;
        }
        if setup.filters.any_finite() {
            Method::Numeric
        } else if setup.first_order_only() {
            Method::Analytic
        } else {
            Method::NoFilter
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Numeric => "numeric",
            Method::Analytic => "analytic",
            Method::Autocorr => "autocorr",
            Method::NoFilter => "nofilter",
            Method::Overlap => "overlap",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => Method::Auto,
            "numeric" => Method::Numeric,
            "analytic" => Method::Analytic,
            "autocorr" => Method::Autocorr,
            "nofilter" => Method::NoFilter,
            "overlap" => Method::Overlap,
            other => {
                return Err(Error::InvalidParameter {
                    name: "method",
                    reason: format!(
                        "unknown method `{other}` (auto, numeric, analytic, autocorr, nofilter, overlap)"
                    ),
                })
            }
        })
    }
}

/// ρ at the delay-line length stored in `setup`.
pub fn rho(setup: &SetupConfig, method: Method, cfg: &QuadratureConfig) -> Result<RhoEstimate> {
    match method.resolve(setup) {
        Method::Numeric => rho_numeric(setup, cfg),
        Method::Analytic => rho_analytic(setup, setup.dtau()).map(RhoEstimate::exact),
        Method::Autocorr => crate::autocorr::rho_autocorr(setup, setup.dtau(), cfg),
        Method::NoFilter => rho_nofilter(setup, setup.dtau(), cfg),
        Method::Overlap => rho_overlap(setup, cfg),
        Method::Auto => unreachable!("resolved above"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipSample {
    pub l: f64,
    pub dtau: f64,
    pub rho: f64,
    pub rn: f64,
    pub est_rel_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DipCurve {
    pub samples: Vec<DipSample>,
    pub setup: SetupConfig,
    pub method: Method,
}

impl DipCurve {
    pub fn converged(&self) -> bool {
        self.samples.iter().all(|s| s.converged)
    }

    /// Sample with the smallest Rₙ.
    pub fn minimum(&self) -> Option<&DipSample> {
        self.samples.iter().min_by(|a, b| a.rn.total_cmp(&b.rn))
    }
}

fn sample_at(setup: &SetupConfig, l: f64, method: Method, cfg: &QuadratureConfig) -> Result<DipSample> {
    sample_of(&setup.with_delay_length(l)?, l, method, cfg)
}

fn sample_of(s: &SetupConfig, l: f64, method: Method, cfg: &QuadratureConfig) -> Result<DipSample> {
    let r = rho(s, method, cfg)?;
    Ok(DipSample {
        l,
        dtau: s.dtau(),
        rho: r.rho,
        rn: 1.0 - r.rho,
        est_rel_error: r.est_rel_error,
        converged: r.converged,
    })
}

/// ρ and Rₙ at the given delay-line lengths, in input order.
pub fn dip_at_lengths(
    setup: &SetupConfig,
    lengths: &[f64],
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<DipCurve> {
    cfg.validate()?;
    let samples = lengths
        .par_iter()
        .map(|&l| sample_at(setup, l, method, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(DipCurve {
        samples,
        setup: *setup,
        method: method.resolve(setup),
    })
}

/// ρ and Rₙ at the given Δτ_l values, in input order. Samples that need a
/// negative delay-line length report it with its sign (see
/// [`SetupConfig::with_dtau`]).
pub fn dip_at_dtaus(
    setup: &SetupConfig,
    dtaus: &[f64],
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<DipCurve> {
    cfg.validate()?;
    let samples = dtaus
        .par_iter()
        .map(|&dtau| {
            let l = setup.length_for_dtau(dtau)?;
            sample_of(&setup.with_dtau(dtau)?, l, method, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DipCurve {
        samples,
        setup: *setup,
        method: method.resolve(setup),
    })
}

/// Uniform scan of `n` lengths over [l_min, l_max].
pub fn dip_scan(
    setup: &SetupConfig,
    l_min: f64,
    l_max: f64,
    n: usize,
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<DipCurve> {
    if !(l_min < l_max) || n < 2 {
        return Err(Error::InvalidParameter {
            name: "scan",
            reason: format!("need l_min < l_max and n >= 2, got [{l_min}, {l_max}], n = {n}"),
        });
    }
    let lengths = crate::amplitude::linspace((l_min, l_max), n);
    dip_at_lengths(setup, &lengths, method, cfg)
}

/// Delay-line length and ρ at the minimum of Rₙ: a coarse scan across the
/// dip centred on Δτ_l = 0, refined by golden-section search.
pub fn dip_center(setup: &SetupConfig, method: Method, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let half = 0.5 * setup.crystal.dip_width();
    let l_of = |dtau: f64| setup.length_for_dtau(dtau);
    let eval = |dtau: f64| -> Result<f64> {
        let l = l_of(dtau)?;
        if l < 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(rho(&setup.with_delay_length(l)?, method, cfg)?.rho)
    };
    let n = 13;
    let grid: Vec<f64> = (0..n)
        .map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect();
    let values = grid
        .par_iter()
        .map(|&x| eval(x))
        .collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::SearchFailed("empty scan".into()))?;
    if !values[best].is_finite() {
        return Err(Error::SearchFailed("no admissible delay-line length".into()));
    }
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(n - 1)];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    let tol = 1e-6 * half;
    while (b - a) > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = eval(x2)?;
        }
    }
    let x = 0.5 * (a + b);
    let best_rho = eval(x)?.max(f1).max(f2).max(values[best]);
    if !best_rho.is_finite() {
        return Err(Error::SearchFailed("non-finite rho at the dip centre".into()));
    }
    Ok((l_of(x)?, best_rho))
}

/// Visibility at the dip centre for each input-plane pump duration.
pub fn visibility_vs_duration(
    setup: &SetupConfig,
    taus: &[f64],
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<Vec<(f64, f64)>> {
    taus.iter()
        .map(|&tau| {
            let pump = PumpPulse::with_amplitude(tau, setup.pump_input.chirp, setup.pump_input.amplitude)?;
            let s = setup.with_pump_input(pump);
            let (_, r) = dip_center(&s, method, cfg)?;
            Ok((tau, visibility(r)?))
        })
        .collect()
}

/// ∫₀^δmax |Rₙ(l₀ + δ) − Rₙ(l₀ − δ)| dδ by the trapezoid rule on `n`
/// intervals.
pub fn dip_asymmetry(
    setup: &SetupConfig,
    l0: f64,
    delta_max: f64,
    n: usize,
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let h = delta_max / n as f64;
    let deltas: Vec<f64> = (0..=n).map(|i| h * i as f64).collect();
    let lengths: Vec<f64> = deltas
        .iter()
        .flat_map(|d| [l0 + d, l0 - d])
        .collect();
    let curve = dip_at_lengths(setup, &lengths, method, cfg)?;
    let diffs: Vec<f64> = curve
        .samples
        .chunks(2)
        .map(|p| (p[0].rn - p[1].rn).abs())
        .collect();
    Ok(h * (diffs.iter().sum::<f64>() - 0.5 * (diffs[0] + diffs[n])))
}

/// Boundary-to-peak limit for the overlap grid.
pub const OVERLAP_TRUNCATION: f64 = 1e-4;

/// Grid used by [`rho_overlap_with`]; `resolution` scales both step sizes
/// (2 halves them).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapGrid {
    pub resolution: f64,
    pub max_enlargements: u32,
}

impl Default for OverlapGrid {
    fn default() -> Self {
        Self {
            resolution: 1.0,
            max_enlargements: 3,
        }
    }
}

fn overlap_axes(setup: &SetupConfig, grid: &OverlapGrid, margin_scale: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let f = &setup.filters;
    let widest = f.widest().ok_or(Error::DegenerateKernel)?;
    let narrowest = [f.sigma1.sigma(), f.sigma2.sigma()]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min);
    let c = &setup.crystal;
    let d = &setup.delay;
    let b = setup.b();
    let tau_l = d.relative_delay();

    // Frequency content: the filters bound Ω₁ − Ω₂, the pump bounds Ω₁ + Ω₂.
    let h_tau = 1.0 / (widest * grid.resolution);
    let h_t = b.sqrt() / grid.resolution;

    // Spread of the relative time from down-converted-beam dispersion:
    // group-delay dispersion × phase-matched bandwidth. Pump dispersion
    // only stretches the t-direction, which the output-plane duration
    // already accounts for.
    let bandwidth = widest.min(2.0 * PI / c.dip_width()) + 1.0 / b.sqrt();
    let gdd = (((c.dp - c.d1).abs() + (c.dp - c.d2).abs()) * c.length
        + (d.d1 - d.d2).abs() * d.length)
        / (2.0 * PI);
    let spread = gdd * bandwidth;

    let m_tau = margin_scale * (12.0 * 2f64.sqrt() / narrowest + 0.1 * spread);
    let half = tau_l.abs().max((c.dip_width() - tau_l).abs()) + m_tau;
    let n_tau = (half / h_tau).ceil() as i64;
    let tau_axis: Vec<f64> = (-n_tau..=n_tau).map(|k| k as f64 * h_tau).collect();

    let tau_d = setup.pump.tau_d.max(setup.pump_input.tau_d);
    let m_t = margin_scale * (5.0 * tau_d + 12.0 * 2f64.sqrt() / narrowest + 0.1 * spread);
    let tilt = c.pump_mismatch() * c.length;
    let t_g = d.mean_delay();
    let lo = t_g - tilt.max(0.0) - m_t;
    let hi = t_g - tilt.min(0.0) + m_t;
    let n_t = ((hi - lo) / h_t).ceil() as usize + 1;
    let t_axis: Vec<f64> = (0..n_t).map(|i| lo + h_t * i as f64).collect();
    Ok((t_axis, tau_axis))
}

/// ρ from the overlap of A(t, τ) with its mirror image A(t, −τ), by
/// trapezoid sums on a symmetric grid, normalized by Σ|A|² on the same
/// grid.
pub fn rho_overlap_with(
    setup: &SetupConfig,
    cfg: &QuadratureConfig,
    grid: &OverlapGrid,
) -> Result<RhoEstimate> {
    if !setup.filters.any_finite() {
        return Err(Error::DegenerateKernel);
    }
    let mut scale = 1.0;
    let mut last_ratio = f64::INFINITY;
    for _ in 0..=grid.max_enlargements {
        let (t_axis, tau_axis) = overlap_axes(setup, grid, scale)?;
        let amp = amplitude_on_axes(setup, t_axis, tau_axis, cfg)?;
        let peak = amp.peak();
        last_ratio = amp.boundary_peak() / peak;
        if last_ratio < OVERLAP_TRUNCATION {
            return Ok(overlap_ratio(&amp));
        }
        scale *= 2.0;
    }
    Err(Error::WindowTruncation {
        ratio: last_ratio,
        limit: OVERLAP_TRUNCATION,
    })
}

pub fn rho_overlap(setup: &SetupConfig, cfg: &QuadratureConfig) -> Result<RhoEstimate> {
    rho_overlap_with(setup, cfg, &OverlapGrid::default())
}

/// Overlap ratio ΣRe[A(t, τ) A*(t, −τ)] / Σ|A|² of a grid with a symmetric τ axis.
pub fn overlap_ratio(amp: &AmplitudeGrid) -> RhoEstimate {
    let n_tau = amp.tau_axis.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..amp.t_axis.len() {
        for j in 0..n_tau {
            let a = amp.get(i, j);
            let m = amp.get(i, n_tau - 1 - j);
            num += (a * m.conj()).re;
            den += a.norm_sqr();
        }
    }
    RhoEstimate {
        rho: num / den,
        est_rel_error: 2.0 * amp.max_rel_error,
        converged: amp.converged,
    }
}
