//! Complex-valued Gauss–Legendre integration.
//!
//! Two families of routines live here:
//!
//! * [`integrate_1d`] / [`integrate_2d`]: a single (tensor-product) rule on
//!   the whole domain, refined by doubling the order until two successive
//!   estimates agree to `rel_tol`. Good for integrands that are smooth on
//!   the scale of the interval.
//! * [`integrate_adaptive`]: a panel-based scheme for integrands with a
//!   narrow ridge (the filter-limited phase-matching ridge is ~10⁻³ of the
//!   crystal length for wide filters). The caller supplies breakpoints,
//!   typically a geometric grading around the ridge from
//!   [`graded_breakpoints`]; panels are then bisected where the local
//!   error is largest.
//!
//! Every routine sums in a fixed order, so results are bit-reproducible.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per axis on the first pass.
    pub base_order: usize,
    /// Number of order doublings (or, for the adaptive routine, the panel
    /// budget is `64 << max_refinements`).
    pub max_refinements: u32,
    pub rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            base_order: 32,
            max_refinements: 4,
            rel_tol: 1e-8,
        }
    }
}

impl QuadratureConfig {
    pub fn new(base_order: usize, max_refinements: u32, rel_tol: f64) -> Result<Self> {
        let cfg = Self {
            base_order,
            max_refinements,
            rel_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_order < 8 {
            return Err(Error::InvalidParameter {
                name: "quadrature.base_order",
                reason: format!("must be >= 8, got {}", self.base_order),
            });
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "quadrature.rel_tol",
                reason: format!("must be > 0, got {}", self.rel_tol),
            });
        }
        Ok(())
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    fn max_panels(&self) -> usize {
        64usize << self.max_refinements.min(12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub est_rel_error: f64,
    pub refinements_used: u32,
    pub converged: bool,
}

impl QuadratureResult {
    /// Absolute error estimate.
    pub fn abs_error(&self) -> f64 {
        self.est_rel_error * self.value.norm()
    }
}

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared, lazily built rule of the given order.
    pub fn cached(order: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
        guard
            .entry(order)
            .or_insert_with(|| Arc::new(Self::new(order)))
            .clone()
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Apply the rule on [a, b].
    pub fn integrate<F>(&self, f: &mut F, a: f64, b: f64) -> Result<Complex64>
    where
        F: FnMut(f64) -> Result<Complex64>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let z = mid + half * x;
            let v = f(z)?;
            check_finite(v, &[z])?;
            acc += v * *w;
        }
        Ok(acc * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn check_finite(v: Complex64, at: &[f64]) -> Result<()> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteIntegrand {
            at: at.to_vec(),
            value: format!("{v}"),
        })
    }
}

fn relative_change(new: Complex64, old: Complex64) -> f64 {
    let diff = (new - old).norm();
    if diff == 0.0 {
        0.0
    } else {
        diff / new.norm()
    }
}

/// Integrate `f` over [a, b] with order doubling.
pub fn integrate_1d<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    cfg.validate()?;
    let mut order = cfg.base_order;
    let mut prev = GaussLegendre::cached(order).integrate(&mut f, a, b)?;
    let mut err = f64::INFINITY;
    for k in 1..=cfg.max_refinements {
        order *= 2;
        let next = GaussLegendre::cached(order).integrate(&mut f, a, b)?;
        err = relative_change(next, prev);
        prev = next;
        if err <= cfg.rel_tol {
            return Ok(QuadratureResult {
                value: next,
                est_rel_error: err,
                refinements_used: k,
                converged: true,
            });
        }
    }
    Ok(QuadratureResult {
        value: prev,
        est_rel_error: err,
        refinements_used: cfg.max_refinements,
        converged: false,
    })
}

fn tensor_rule<F>(rule: &GaussLegendre, f: &mut F, x: (f64, f64), y: (f64, f64)) -> Result<Complex64>
where
    F: FnMut(f64, f64) -> Result<Complex64>,
{
    let hx = 0.5 * (x.1 - x.0);
    let mx = 0.5 * (x.0 + x.1);
    let hy = 0.5 * (y.1 - y.0);
    let my = 0.5 * (y.0 + y.1);
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
        let z1 = mx + hx * xi;
        let mut row = Complex64::new(0.0, 0.0);
        for (yj, wj) in rule.nodes.iter().zip(&rule.weights) {
            let z2 = my + hy * yj;
            let v = f(z1, z2)?;
            check_finite(v, &[z1, z2])?;
            row += v * *wj;
        }
        acc += row * *wi;
    }
    Ok(acc * (hx * hy))
}

/// Tensor-product analogue of [`integrate_1d`] on `x × y`.
pub fn integrate_2d<F>(
    mut f: F,
    x: (f64, f64),
    y: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult>
where
    F: FnMut(f64, f64) -> Result<Complex64>,
{
    cfg.validate()?;
    let mut order = cfg.base_order;
    let mut prev = tensor_rule(&GaussLegendre::cached(order), &mut f, x, y)?;
    let mut err = f64::INFINITY;
    for k in 1..=cfg.max_refinements {
        order *= 2;
        let next = tensor_rule(&GaussLegendre::cached(order), &mut f, x, y)?;
        err = relative_change(next, prev);
        prev = next;
        if err <= cfg.rel_tol {
            return Ok(QuadratureResult {
                value: next,
                est_rel_error: err,
                refinements_used: k,
                converged: true,
            });
        }
    }
    Ok(QuadratureResult {
        value: prev,
        est_rel_error: err,
        refinements_used: cfg.max_refinements,
        converged: false,
    })
}

/// Breakpoints graded geometrically towards `center`: center ± width·2ᵏ
/// for k = 0, 1, … until the interval [a, b] is left. Points outside
/// (a, b) are dropped; `center` is clamped into the interval.
pub fn graded_breakpoints(a: f64, b: f64, center: f64, width: f64) -> Vec<f64> {
    let c = center.clamp(a, b);
    let mut out = vec![c];
    if !(width > 0.0 && width.is_finite()) {
        return out;
    }
    let span = b - a;
    let mut h = width;
    while h < span {
        out.push(c - h);
        out.push(c + h);
        h *= 2.0;
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive panel integration of `f` over [a, b].
///
/// Each panel is evaluated with Gauss–Legendre rules of order `p` and `2p`
/// (`p = base_order / 2`, at least 8); the higher-order value is kept and
/// their difference is the panel error. The worst panel is bisected until
/// the summed error is below `max(rel_tol·|I|, abs_tol)` or the panel
/// budget is spent (then the result is flagged non-converged).
pub fn integrate_adaptive<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
    abs_tol: f64,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    cfg.validate()?;
    if a == b {
        return Ok(QuadratureResult {
            value: Complex64::new(0.0, 0.0),
            est_rel_error: 0.0,
            refinements_used: 0,
            converged: true,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let p = (cfg.base_order / 2).max(8);
    let low = GaussLegendre::cached(p);
    let high = GaussLegendre::cached(2 * p);

    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    let min_len = (hi - lo) * 1e-14;
    cuts.dedup_by(|x, y| (*x - *y).abs() <= min_len);
    if let Some(last) = cuts.last_mut() {
        *last = hi;
    }

    let eval = |a: f64, b: f64, f: &mut F| -> Result<Panel> {
        let coarse = low.integrate(f, a, b)?;
        let fine = high.integrate(f, a, b)?;
        Ok(Panel {
            a,
            b,
            value: fine,
            error: (fine - coarse).norm(),
        })
    };

    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        heap.push(eval(w[0], w[1], &mut f)?);
    }
    let max_panels = cfg.max_panels().max(heap.len() + 1);
    let mut splits = 0u32;

    let totals = |heap: &BinaryHeap<Panel>| -> Complex64 {
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|x, y| x.a.total_cmp(&y.a));
        panels.iter().fold(Complex64::new(0.0, 0.0), |v, p| v + p.value)
    };

    let mut value = totals(&heap);
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        let target = (cfg.rel_tol * value.norm()).max(abs_tol);
        let done = error <= target;
        if done || heap.len() >= max_panels {
            let value = totals(&heap);
            let error: f64 = heap.iter().map(|p| p.error).sum();
            let done = error <= (cfg.rel_tol * value.norm()).max(abs_tol);
            let est_rel_error = if value.norm() > 0.0 {
                error / value.norm()
            } else {
                error
            };
            return Ok(QuadratureResult {
                value: value * sign,
                est_rel_error,
                refinements_used: splits,
                converged: done,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point.
            error -= worst.error;
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        let left = eval(worst.a, mid, &mut f)?;
        let right = eval(mid, worst.b, &mut f)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        splits += 1;
    }
}

/// Principal square root (non-negative real part).
pub fn principal_sqrt(w: Complex64) -> Complex64 {
    w.sqrt()
}

/// Square root of a kernel determinant evaluated at `(z1, z2)`.
///
/// Only determinants with positive real part are accepted; anything else
/// means the integrand left the regime in which the principal branch has
/// been checked, and is reported as [`Error::BranchGuard`].
pub fn guarded_sqrt(w: Complex64, z1: f64, z2: f64) -> Result<Complex64> {
    if w.re > 0.0 && w.im.is_finite() {
        Ok(principal_sqrt(w))
    } else {
        Err(Error::BranchGuard { z1, z2, re: w.re })
    }
}
