//! Evaluation of a scenario and its CSV rendering.

use std::fmt::Write as _;

use femtohom::amplitude::amplitude_on_axes;
use femtohom::autocorr::rho_autocorr_spectrum;
use femtohom::interference::{dip_at_dtaus, dip_at_lengths, dip_center, DipCurve};
use femtohom::{
    amplitude_analytic, rho, visibility, AmplitudeGrid, DipSample, Error, FilterWidth, Method, PumpPulse,
    QuadratureConfig, SetupConfig, TabulatedSpectrum,
};
use rayon::prelude::*;

use crate::config::{Axis, Scenario, Task};

/// Rendered output and the number of samples that did not converge.
pub struct Rendered {
    pub csv: String,
    pub nonconverged: usize,
}

fn width(w: FilterWidth) -> String {
    match w {
        FilterWidth::Finite(s) => format!("{s:e}"),
        FilterWidth::Unbounded => "inf".into(),
    }
}

/// Full resolved parameter set as `# key = value` lines.
fn header(scenario: &Scenario, method: Option<&str>) -> String {
    let s = &scenario.setup;
    let c = &s.crystal;
    let q = &scenario.quadrature;
    let mut h = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(h, "# {k} = {v}");
    };
    kv("crystal.length_mm", format!("{:e}", c.length));
    kv("crystal.inv_vp_s_per_mm", format!("{:e}", c.inv_vp));
    kv("crystal.inv_v1_s_per_mm", format!("{:e}", c.inv_v1));
    kv("crystal.inv_v2_s_per_mm", format!("{:e}", c.inv_v2));
    kv("crystal.Dp_s2_per_mm", format!("{:e}", c.dp));
    kv("crystal.D1_s2_per_mm", format!("{:e}", c.d1));
    kv("crystal.D2_s2_per_mm", format!("{:e}", c.d2));
    kv("crystal.mismatch_D_s_per_mm", format!("{:e}", c.mismatch()));
    kv("crystal.pump_mismatch_Lambda_s_per_mm", format!("{:e}", c.pump_mismatch()));
    kv("crystal.dip_width_DL_s", format!("{:e}", c.dip_width()));
    kv("pump_input.tau_D_s", format!("{:e}", s.pump_input.tau_d));
    kv("pump_input.chirp", format!("{:e}", s.pump_input.chirp));
    kv("pump_input.b_s2", format!("{:e}", s.pump_input.b()));
    kv("pump_output.tau_D_s", format!("{:e}", s.pump.tau_d));
    kv("pump_output.chirp", format!("{:e}", s.pump.chirp));
    kv("pump_output.b_s2", format!("{:e}", s.pump.b()));
    kv("delay.inv_g1_s_per_mm", format!("{:e}", s.delay.inv_g1));
    kv("delay.inv_g2_s_per_mm", format!("{:e}", s.delay.inv_g2));
    kv("delay.d1_s2_per_mm", format!("{:e}", s.delay.d1));
    kv("delay.d2_s2_per_mm", format!("{:e}", s.delay.d2));
    kv("delay.length_mm", format!("{:e}", s.delay.length));
    kv("filters.sigma1_rad_per_s", width(s.filters.sigma1));
    kv("filters.sigma2_rad_per_s", width(s.filters.sigma2));
    kv("centers.omega_p_rad_per_s", format!("{:e}", s.centers.omega_p));
    kv("centers.omega_1_rad_per_s", format!("{:e}", s.centers.omega_1));
    kv("centers.omega_2_rad_per_s", format!("{:e}", s.centers.omega_2));
    kv("quadrature.base_order", q.base_order.to_string());
    kv("quadrature.max_refinements", q.max_refinements.to_string());
    kv("quadrature.rel_tol", format!("{:e}", q.rel_tol));
    match &scenario.task {
        Task::Sweep { axis, values, .. } => {
            kv("sweep.axis", axis.key().into());
            kv("sweep.count", values.len().to_string());
        }
        Task::Grid { n_t, n_tau, .. } => {
            kv("grid.n_t", n_t.to_string());
            kv("grid.n_tau", n_tau.to_string());
        }
    }
    if let Some(m) = method {
        kv("method", m.into());
    }
    h
}

/// Evaluate `scenario`; `spectrum` replaces the Gaussian pump on the
/// autocorrelation route.
pub fn run(scenario: &Scenario, spectrum: Option<&TabulatedSpectrum>) -> Result<Rendered, Error> {
    match &scenario.task {
        Task::Sweep { values, .. } if spectrum.is_some() => {
            tabulated_sweep(scenario, values, spectrum.expect("checked"))
        }
        Task::Sweep { axis, values, method } => sweep(scenario, *axis, values, *method),
        Task::Grid {
            t_range,
            tau_range,
            n_t,
            n_tau,
        } => grid(scenario, *t_range, *tau_range, *n_t, *n_tau),
    }
}

fn curve_rows(out: &mut String, curve: &DipCurve) -> usize {
    out.push_str("l_mm,dtau_l_s,rho,Rn,rel_err\n");
    for s in &curve.samples {
        let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e}", s.l, s.dtau, s.rho, s.rn, s.est_rel_error);
    }
    curve.samples.iter().filter(|s| !s.converged).count()
}

fn sweep(scenario: &Scenario, axis: Axis, values: &[f64], method: Method) -> Result<Rendered, Error> {
    let setup = &scenario.setup;
    let cfg = &scenario.quadrature;
    let resolved = method.resolve(setup);
    let mut csv = header(scenario, Some(resolved.name()));
    let nonconverged = match axis {
        Axis::Length => curve_rows(&mut csv, &dip_at_lengths(setup, values, method, cfg)?),
        Axis::Dtau => curve_rows(&mut csv, &dip_at_dtaus(setup, values, method, cfg)?),
        Axis::Duration => {
            let rows = values
                .par_iter()
                .map(|&tau| duration_row(setup, tau, method, cfg))
                .collect::<Result<Vec<_>, Error>>()?;
            csv.push_str("tau_Di_s,l_mm,dtau_l_s,rho,Rn,V,rel_err\n");
            let mut bad = 0;
            for (tau, s, r, v, err, ok) in rows {
                let _ = writeln!(
                    csv,
                    "{tau:e},{:e},{:e},{r:e},{:e},{v:e},{err:e}",
                    s.delay.length,
                    s.dtau(),
                    1.0 - r
                );
                bad += usize::from(!ok);
            }
            bad
        }
    };
    Ok(Rendered { csv, nonconverged })
}

fn tabulated_sweep(scenario: &Scenario, dtaus: &[f64], spectrum: &TabulatedSpectrum) -> Result<Rendered, Error> {
    let setup = &scenario.setup;
    let cfg = &scenario.quadrature;
    let samples = dtaus
        .par_iter()
        .map(|&dtau| {
            let r = rho_autocorr_spectrum(setup, spectrum, dtau, cfg)?;
            Ok(DipSample {
                l: setup.length_for_dtau(dtau)?,
                dtau,
                rho: r.rho,
                rn: 1.0 - r.rho,
                est_rel_error: r.est_rel_error,
                converged: r.converged,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut csv = header(scenario, Some("autocorr (tabulated spectrum)"));
    let curve = DipCurve {
        samples,
        setup: *setup,
        method: Method::Autocorr,
    };
    let nonconverged = curve_rows(&mut csv, &curve);
    Ok(Rendered { csv, nonconverged })
}

type DurationRow = (f64, SetupConfig, f64, f64, f64, bool);

fn duration_row(
    setup: &SetupConfig,
    tau: f64,
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<DurationRow, Error> {
    let pump = PumpPulse::with_amplitude(tau, setup.pump_input.chirp, setup.pump_input.amplitude)?;
    let s = setup.with_pump_input(pump);
    let (l, _) = dip_center(&s, method, cfg)?;
    let s = s.with_delay_length(l)?;
    let r = rho(&s, method, cfg)?;
    Ok((tau, s, r.rho, visibility(r.rho)?, r.est_rel_error, r.converged))
}

fn grid(
    scenario: &Scenario,
    t_range: (f64, f64),
    tau_range: (f64, f64),
    n_t: usize,
    n_tau: usize,
) -> Result<Rendered, Error> {
    let setup = &scenario.setup;
    let t_axis = femtohom::amplitude::linspace(t_range, n_t);
    let tau_axis = femtohom::amplitude::linspace(tau_range, n_tau);
    let closed = !setup.filters.any_finite() && setup.first_order_only();
    let grid = if closed {
        let values = t_axis
            .iter()
            .flat_map(|&t| tau_axis.iter().map(move |&tau| (t, tau)))
            .map(|(t, tau)| amplitude_analytic(setup, t, tau))
            .collect::<Result<Vec<_>, Error>>()?;
        AmplitudeGrid {
            t_axis,
            tau_axis,
            values,
            max_rel_error: 0.0,
            converged: true,
            setup: *setup,
        }
    } else {
        amplitude_on_axes(setup, t_axis, tau_axis, &scenario.quadrature)?
    };
    let mut csv = header(scenario, None);
    let _ = writeln!(csv, "# grid.max_rel_error = {:e}", grid.max_rel_error);
    let _ = writeln!(csv, "# grid.normalization = up to a constant complex prefactor");
    let _ = writeln!(
        csv,
        "# grid.amplitude = {}",
        if closed { "closed form" } else { "quadrature" }
    );
    csv.push_str("t_s,tau_s,re,im,abs\n");
    for (i, t) in grid.t_axis.iter().enumerate() {
        for (j, tau) in grid.tau_axis.iter().enumerate() {
            let a = grid.get(i, j);
            let _ = writeln!(csv, "{t:e},{tau:e},{:e},{:e},{:e}", a.re, a.im, a.norm());
        }
    }
    Ok(Rendered {
        csv,
        nonconverged: usize::from(!grid.converged),
    })
}
