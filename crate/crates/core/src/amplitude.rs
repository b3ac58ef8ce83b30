//! Two-photon amplitude A(τ₁, τ₂) behind the delay line.
//!
//! The amplitude is returned without the constant prefactor and without the
//! fast carrier phase exp(−iω⁰(τ₁ + τ₂)); neither survives in ρ or R₀.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{BetaCGamma, GaussKernel};
use crate::phys::SetupConfig;
use crate::quadrature::{graded_breakpoints, integrate_adaptive, QuadratureConfig, QuadratureResult};

/// Kernel of the single-z amplitude integral at depth `z` ∈ [−L, 0].
pub fn beta_c_gamma(setup: &SetupConfig, z: f64, tau1: f64, tau2: f64) -> BetaCGamma {
    let c = &setup.crystal;
    let d = &setup.delay;
    let l = d.length;
    let b = setup.pump.b();
    let q = 1.0 / (4.0 * PI);
    let p = Complex64::new(b, -b * setup.pump.chirp);
    let e1 = Complex64::new(
        setup.filters.sigma1.inv_sq(),
        -q * (d.d1 * l + (c.dp - c.d1) * z),
    );
    let e2 = Complex64::new(
        setup.filters.sigma2.inv_sq(),
        -q * (d.d2 * l + (c.dp - c.d2) * z),
    );
    let e_gamma = Complex64::new(0.0, -q * c.dp * z);
    let c1 = (c.inv_vp - c.inv_v1) * z + l * d.inv_g1 - tau1;
    let c2 = -((c.inv_vp - c.inv_v2) * z + l * d.inv_g2 - tau2);
    GaussKernel {
        p,
        e1,
        e2,
        e_gamma,
        c1,
        c2,
    }
}

/// Depth at which the phase-matching ridge c₁ + c₂ = 0 crosses, for the
/// relative time τ₁ − τ₂.
pub fn ridge_depth(setup: &SetupConfig, tau: f64) -> f64 {
    -(tau + setup.delay.relative_delay()) / setup.crystal.mismatch()
}

/// Peak magnitude of the unfiltered, dispersion-free amplitude; used as
/// an absolute scale.
pub fn amplitude_scale(setup: &SetupConfig) -> f64 {
    let p = &setup.pump;
    2.0 * PI.sqrt() / (setup.crystal.mismatch() * p.b().sqrt() * (1.0 + p.chirp * p.chirp).powf(0.25))
}

/// Breakpoints grading the z-axis towards the ridge of a kernel family.
pub(crate) fn ridge_breaks(
    lo: f64,
    hi: f64,
    center: f64,
    kernel: &GaussKernel,
    slope: f64,
) -> Vec<f64> {
    let k = kernel.ridge_curvature();
    let span = hi - lo;
    let width = if k > 0.0 {
        (1.0 / ((2.0 * k).sqrt() * slope.abs())).clamp(span * 1e-7, span)
    } else {
        span
    };
    graded_breakpoints(lo, hi, center, width)
}

/// A(τ₁, τ₂) by quadrature over the crystal.
pub fn amplitude(
    setup: &SetupConfig,
    tau1: f64,
    tau2: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    if !setup.filters.any_finite() && setup.first_order_only() {
        return Err(Error::DegenerateKernel);
    }
    let len = setup.crystal.length;
    let center = ridge_depth(setup, tau1 - tau2).clamp(-len, 0.0);
    let probe = beta_c_gamma(setup, center, tau1, tau2);
    let breaks = ridge_breaks(-len, 0.0, center, &probe, setup.crystal.mismatch());
    let floor = 1e-3 * cfg.rel_tol * amplitude_scale(setup);
    integrate_adaptive(
        |z| beta_c_gamma(setup, z, tau1, tau2).value((z, z)),
        -len,
        0.0,
        &breaks,
        cfg,
        floor,
    )
}

/// Closed form for the case without filters and without second-order
/// dispersion, in the coordinates t = (τ₁ + τ₂)/2, τ = τ₁ − τ₂.
///
/// The rectangular window is 1 on 0 < (τ + τ_l)/(DL) < 1. For l ≠ 0 the
/// l = 0 form is translated by the delay line (τ → τ + τ_l, t → t − t_g).
pub fn amplitude_analytic(setup: &SetupConfig, t: f64, tau: f64) -> Result<Complex64> {
    if setup.filters.any_finite() || !setup.first_order_only() {
        return Err(Error::OutOfRegime(
            "the closed-form amplitude needs unbounded filters and no second-order dispersion"
                .into(),
        ));
    }
    let c = &setup.crystal;
    let p = &setup.pump_input;
    let d = c.mismatch();
    let x = (tau + setup.delay.relative_delay()) / c.dip_width();
    if !(x > 0.0 && x < 1.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let ts = t - setup.delay.mean_delay() + c.pump_mismatch() / d * (tau + setup.delay.relative_delay());
    let prefactor = 4.0 * PI * PI.sqrt() * (1.0 + p.chirp * p.chirp).powf(0.25) / (p.tau_d * d.abs());
    let arg = Complex64::new(1.0, p.chirp) * (-(ts * ts) / (p.tau_d * p.tau_d));
    Ok(prefactor * arg.exp())
}

/// Factor relating [`amplitude`] to [`amplitude_analytic`] in their common
/// limit: analytic = factor × numeric.
pub fn analytic_normalization(setup: &SetupConfig) -> Complex64 {
    Complex64::from_polar(PI, -0.5 * setup.pump.chirp.atan())
}

/// Amplitude sampled on a (t, τ) grid. `values` is row-major in t.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeGrid {
    pub t_axis: Vec<f64>,
    pub tau_axis: Vec<f64>,
    pub values: Vec<Complex64>,
    pub max_rel_error: f64,
    pub converged: bool,
    pub setup: SetupConfig,
}

impl AmplitudeGrid {
    pub fn get(&self, i_t: usize, i_tau: usize) -> Complex64 {
        self.values[i_t * self.tau_axis.len() + i_tau]
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Grid indices of the largest magnitude.
    pub fn argmax(&self) -> (usize, usize) {
        let n_tau = self.tau_axis.len();
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bk, bv), (k, v)| {
                if v.norm() > bv {
                    (k, v.norm())
                } else {
                    (bk, bv)
                }
            });
        (k / n_tau, k % n_tau)
    }

    /// Largest magnitude on the outer boundary.
    pub fn boundary_peak(&self) -> f64 {
        let (nt, ns) = (self.t_axis.len(), self.tau_axis.len());
        let mut m: f64 = 0.0;
        for i in 0..nt {
            m = m.max(self.get(i, 0).norm()).max(self.get(i, ns - 1).norm());
        }
        for j in 0..ns {
            m = m.max(self.get(0, j).norm()).max(self.get(nt - 1, j).norm());
        }
        m
    }
}

/// Uniform axis of `n` points spanning `range`.
pub fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    let step = (range.1 - range.0) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { range.1 } else { range.0 + step * i as f64 })
        .collect()
}

/// Amplitude on an explicit grid, evaluated at τ₁ = t + τ/2, τ₂ = t − τ/2.
pub fn amplitude_on_axes(
    setup: &SetupConfig,
    t_axis: Vec<f64>,
    tau_axis: Vec<f64>,
    cfg: &QuadratureConfig,
) -> Result<AmplitudeGrid> {
    let n_tau = tau_axis.len();
    let results: Vec<QuadratureResult> = (0..t_axis.len() * n_tau)
        .into_par_iter()
        .map(|k| {
            let t = t_axis[k / n_tau];
            let tau = tau_axis[k % n_tau];
            amplitude(setup, t + 0.5 * tau, t - 0.5 * tau, cfg)
        })
        .collect::<Result<_>>()?;
    let converged = results.iter().all(|r| r.converged);
    let max_rel_error = results
        .iter()
        .map(|r| r.est_rel_error)
        .fold(0.0, f64::max);
    Ok(AmplitudeGrid {
        t_axis,
        tau_axis,
        values: results.into_iter().map(|r| r.value).collect(),
        max_rel_error,
        converged,
        setup: *setup,
    })
}

pub fn amplitude_grid(
    setup: &SetupConfig,
    t_range: (f64, f64),
    tau_range: (f64, f64),
    n_t: usize,
    n_tau: usize,
    cfg: &QuadratureConfig,
) -> Result<AmplitudeGrid> {
    for (name, r) in [("grid.t_range", t_range), ("grid.tau_range", tau_range)] {
        if !(r.0.is_finite() && r.1.is_finite() && r.0 < r.1) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("need a finite increasing range, got {r:?}"),
            });
        }
    }
    if n_t < 2 || n_tau < 2 {
        return Err(Error::InvalidParameter {
            name: "grid.n",
            reason: format!("need at least 2 points per axis, got {n_t} x {n_tau}"),
        });
    }
    amplitude_on_axes(setup, linspace(t_range, n_t), linspace(tau_range, n_tau), cfg)
}
