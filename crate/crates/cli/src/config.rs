//! TOML scenario files.
//!
//! Units: lengths in mm, times in s, inverse velocities in s/mm,
//! second-order dispersion in s²/mm, filter widths in nm (`sigma1_nm`) or
//! rad/s (`sigma1_rad_s`, `inf` for none). Omitted crystal and delay-line constants default to
//! BBO and quartz; omitted filters are absent.

use std::fmt;

use femtohom::amplitude::linspace;
use femtohom::phys::DEFAULT_SIGNAL_NM;
use femtohom::{
    CrystalParams, DelayLine, FilterPair, FilterWidth, Method, PumpPulse, QuadratureConfig, SetupConfig,
};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct File {
    #[serde(default)]
    pub crystal: CrystalSection,
    pub pump: PumpSection,
    #[serde(default)]
    pub delay: DelaySection,
    #[serde(default)]
    pub filters: FilterSection,
    pub quadrature: Option<QuadratureSection>,
    pub sweep: Option<SweepSection>,
    pub grid: Option<GridSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "bbo_vp")]
    pub inv_vp: f64,
    #[serde(default = "bbo_v1")]
    pub inv_v1: f64,
    #[serde(default = "bbo_v2")]
    pub inv_v2: f64,
    #[serde(default, rename = "Dp")]
    pub dp: f64,
    #[serde(default, rename = "D1")]
    pub d1: f64,
    #[serde(default, rename = "D2")]
    pub d2: f64,
}

fn default_length() -> f64 {
    3.0
}
fn bbo_vp() -> f64 {
    57.05e-13
}
fn bbo_v1() -> f64 {
    56.2e-13
}
fn bbo_v2() -> f64 {
    54.26e-13
}

impl Default for CrystalSection {
    fn default() -> Self {
        Self {
            length: default_length(),
            inv_vp: bbo_vp(),
            inv_v1: bbo_v1(),
            inv_v2: bbo_v2(),
            dp: 0.0,
            d1: 0.0,
            d2: 0.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    /// Input-plane duration.
    #[serde(rename = "tau_Di_s")]
    pub tau_di: f64,
    #[serde(default, rename = "chirp_ai")]
    pub chirp: f64,
    /// Tabulated input-plane spectrum, `Omega_rad_s re im` per row, relative
    /// to the scenario file.
    pub spectrum_file: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySection {
    #[serde(default = "quartz_g1")]
    pub inv_g1: f64,
    #[serde(default = "quartz_g2")]
    pub inv_g2: f64,
    #[serde(default)]
    pub d1: f64,
    #[serde(default)]
    pub d2: f64,
    #[serde(default)]
    pub length: f64,
}

fn quartz_g1() -> f64 {
    51.81e-13
}
fn quartz_g2() -> f64 {
    52.08e-13
}

impl Default for DelaySection {
    fn default() -> Self {
        Self {
            inv_g1: quartz_g1(),
            inv_g2: quartz_g2(),
            d1: 0.0,
            d2: 0.0,
            length: 0.0,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub sigma1_nm: Option<f64>,
    pub sigma2_nm: Option<f64>,
    pub sigma1_rad_s: Option<f64>,
    pub sigma2_rad_s: Option<f64>,
    /// Central wavelength for the nm conversion.
    pub lambda0_nm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub base_order: Option<usize>,
    pub max_refinements: Option<u32>,
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_sweep_output")]
    pub output: String,
}

fn default_method() -> String {
    "auto".into()
}
fn default_sweep_output() -> String {
    "sweep.csv".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_range: [f64; 2],
    pub tau_range: [f64; 2],
    pub n_t: usize,
    pub n_tau: usize,
    #[serde(default = "default_grid_output")]
    pub output: String,
}

fn default_grid_output() -> String {
    "grid.csv".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Length,
    Dtau,
    Duration,
}

impl Axis {
    pub fn key(self) -> &'static str {
        match self {
            Axis::Length => "l_mm",
            Axis::Dtau => "dtau_s",
            Axis::Duration => "tau_Di_s",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Sweep {
        axis: Axis,
        values: Vec<f64>,
        method: Method,
    },
    Grid {
        t_range: (f64, f64),
        tau_range: (f64, f64),
        n_t: usize,
        n_tau: usize,
    },
}

/// A fully resolved run: one setup, one task, one output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub setup: SetupConfig,
    pub quadrature: QuadratureConfig,
    pub task: Task,
    pub output: String,
    /// Tabulated pump spectrum path as written in the file.
    pub spectrum_file: Option<String>,
}

/// Parse or validation failure, with the 1-based line when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Line of `key = …` inside `[section]`, or of the section header when
/// the key is absent.
pub fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: locate(self.text, section, key),
            message: message.into(),
        }
    }

    /// Attach the line of the offending key to a library validation error.
    fn lib(&self, e: femtohom::Error) -> ConfigError {
        let (section, key) = match &e {
            femtohom::Error::InvalidParameter { name, .. } => {
                let mut parts = name.splitn(2, '.');
                let s = parts.next().unwrap_or("");
                let k = parts.next().unwrap_or("");
                match (s, k) {
                    ("filter", _) => ("filters", "sigma1_nm"),
                    ("pump", "tau_D") => ("pump", "tau_Di_s"),
                    _ => (s, k),
                }
            }
            femtohom::Error::NonPositiveMismatch { .. } => ("crystal", "inv_v1"),
            _ => ("", ""),
        };
        ConfigError {
            line: locate(self.text, section, key),
            message: e.to_string(),
        }
    }
}

fn filter_width(
    ctx: &Ctx<'_>,
    nm: Option<f64>,
    rad: Option<f64>,
    lambda0: f64,
    key: &str,
) -> Result<FilterWidth, ConfigError> {
    match (nm, rad) {
        (Some(_), Some(_)) => Err(ctx.err(
            "filters",
            key,
            format!("give either {key}_nm or {key}_rad_s, not both"),
        )),
        (Some(w), None) => {
            FilterWidth::from_wavelength(w, lambda0).map_err(|e| ConfigError {
                line: locate(ctx.text, "filters", &format!("{key}_nm")),
                message: e.to_string(),
            })
        }
        (None, Some(s)) if s == f64::INFINITY => Ok(FilterWidth::Unbounded),
        (None, Some(s)) => FilterWidth::finite(s).map_err(|e| ConfigError {
            line: locate(ctx.text, "filters", &format!("{key}_rad_s")),
            message: e.to_string(),
        }),
        (None, None) => Ok(FilterWidth::Unbounded),
    }
}

/// Overrides from the command line, applied after the `[quadrature]`
/// section.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadratureOverrides {
    pub base_order: Option<usize>,
    pub rel_tol: Option<f64>,
    pub max_refinements: Option<u32>,
}

pub fn parse(text: &str, overrides: &QuadratureOverrides) -> Result<Scenario, ConfigError> {
    let file: File = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
        message: e.message().trim().to_string(),
    })?;
    let ctx = Ctx { text };

    let c = &file.crystal;
    let crystal = CrystalParams::with_dispersion(c.length, c.inv_vp, c.inv_v1, c.inv_v2, c.dp, c.d1, c.d2)
        .map_err(|e| ctx.lib(e))?;
    let pump = PumpPulse::new(file.pump.tau_di, file.pump.chirp).map_err(|e| ctx.lib(e))?;
    let d = &file.delay;
    let delay = DelayLine::new(d.inv_g1, d.inv_g2, d.d1, d.d2, d.length).map_err(|e| ctx.lib(e))?;
    let f = &file.filters;
    let lambda0 = f.lambda0_nm.unwrap_or(DEFAULT_SIGNAL_NM);
    let filters = FilterPair::new(
        filter_width(&ctx, f.sigma1_nm, f.sigma1_rad_s, lambda0, "sigma1")?,
        filter_width(&ctx, f.sigma2_nm, f.sigma2_rad_s, lambda0, "sigma2")?,
    );
    let setup = SetupConfig::new(crystal, pump, delay, filters);

    let defaults = QuadratureConfig::default();
    let q = file.quadrature.as_ref();
    let quadrature = QuadratureConfig {
        base_order: overrides
            .base_order
            .or(q.and_then(|q| q.base_order))
            .unwrap_or(defaults.base_order),
        max_refinements: overrides
            .max_refinements
            .or(q.and_then(|q| q.max_refinements))
            .unwrap_or(defaults.max_refinements),
        rel_tol: overrides
            .rel_tol
            .or(q.and_then(|q| q.rel_tol))
            .unwrap_or(defaults.rel_tol),
    };
    quadrature.validate().map_err(|e| ConfigError {
        line: locate(text, "quadrature", ""),
        message: e.to_string(),
    })?;

    let (task, output) = match (&file.sweep, &file.grid) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(ConfigError {
                line: None,
                message: "exactly one of [sweep] or [grid] is required".into(),
            })
        }
        (Some(s), None) => (sweep_task(&ctx, s, &setup)?, s.output.clone()),
        (None, Some(g)) => (grid_task(&ctx, g)?, g.output.clone()),
    };
    check_output_name(&ctx, &output, if file.sweep.is_some() { "sweep" } else { "grid" })?;
    if file.pump.spectrum_file.is_some() {
        let autocorr_sweep = matches!(
            &task,
            Task::Sweep { axis: Axis::Dtau, method: Method::Auto | Method::Autocorr, .. }
        );
        if !autocorr_sweep {
            return Err(ctx.err(
                "pump",
                "spectrum_file",
                "a tabulated spectrum needs a dtau_s sweep with method auto or autocorr",
            ));
        }
    }

    Ok(Scenario {
        setup,
        quadrature,
        task,
        output,
        spectrum_file: file.pump.spectrum_file.clone(),
    })
}

fn check_output_name(ctx: &Ctx<'_>, name: &str, section: &str) -> Result<(), ConfigError> {
    let path = std::path::Path::new(name);
    let plain = path.components().count() == 1
        && matches!(path.components().next(), Some(std::path::Component::Normal(_)));
    if name.is_empty() || !plain {
        return Err(ctx.err(
            section,
            "output",
            format!("output must be a plain file name, got `{name}`"),
        ));
    }
    Ok(())
}

fn sweep_task(ctx: &Ctx<'_>, s: &SweepSection, setup: &SetupConfig) -> Result<Task, ConfigError> {
    let axis = match s.axis.as_str() {
        "l_mm" => Axis::Length,
        "dtau_s" => Axis::Dtau,
        "tau_Di_s" => Axis::Duration,
        other => {
            return Err(ctx.err(
                "sweep",
                "axis",
                format!("unknown sweep axis `{other}` (l_mm, dtau_s, tau_Di_s)"),
            ))
        }
    };
    let method: Method = s.method.parse().map_err(|e: femtohom::Error| ctx.err("sweep", "method", e.to_string()))?;
    let values = match (&s.values, s.start, s.stop, s.count) {
        (Some(v), None, None, None) => v.clone(),
        (None, Some(a), Some(b), Some(n)) => {
            if !(a.is_finite() && b.is_finite() && a < b) || n < 2 {
                return Err(ctx.err(
                    "sweep",
                    "start",
                    format!("need start < stop and count >= 2, got [{a}, {b}], count = {n}"),
                ));
            }
            linspace((a, b), n)
        }
        _ => {
            return Err(ctx.err(
                "sweep",
                "axis",
                "give either `values` or all of `start`, `stop`, `count`",
            ))
        }
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(ctx.err("sweep", "values", "sweep values must be finite and non-empty"));
    }
    match axis {
        Axis::Length if values.iter().any(|&l| l < 0.0) => {
            return Err(ctx.err("sweep", "start", "delay-line lengths must be >= 0"));
        }
        Axis::Duration if values.iter().any(|&t| t <= 0.0) => {
            return Err(ctx.err("sweep", "start", "pump durations must be > 0"));
        }
        Axis::Dtau if setup.delay.d1 != 0.0 || setup.delay.d2 != 0.0 => {
            // Negative lengths cannot be mirrored for a dispersive line.
            for &x in &values {
                setup.with_dtau(x).map_err(|e| ctx.err("sweep", "start", e.to_string()))?;
            }
        }
        _ => {}
    }
    Ok(Task::Sweep { axis, values, method })
}

fn grid_task(ctx: &Ctx<'_>, g: &GridSection) -> Result<Task, ConfigError> {
    for (key, r) in [("t_range", g.t_range), ("tau_range", g.tau_range)] {
        if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
            return Err(ctx.err("grid", key, format!("need a finite increasing range, got {r:?}")));
        }
    }
    if g.n_t < 2 || g.n_tau < 2 {
        return Err(ctx.err("grid", "n_t", "need at least 2 points per axis"));
    }
    Ok(Task::Grid {
        t_range: (g.t_range[0], g.t_range[1]),
        tau_range: (g.tau_range[0], g.tau_range[1]),
        n_t: g.n_t,
        n_tau: g.n_tau,
    })
}
