//! The complex Gaussian kernel shared by the amplitude, ρ and R₀ integrands.
//!
//! All three integrands have the form
//!
//! ```text
//! 1/√(β₁β₂ − γ²) · exp[−(c₁²β₂ + c₂²β₁ + 2γc₁c₂) / (4(β₁β₂ − γ²))]
//! ```
//!
//! with β_j = P + e_j and γ = P + e_γ for a common pump term P. Expanding in
//! the deviations avoids the cancellation in β₁β₂ − γ² that would otherwise
//! wipe out the (small) filter terms against the (large) pump term.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::principal_sqrt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussKernel {
    /// Common pump part of β₁, β₂ and γ.
    pub p: Complex64,
    pub e1: Complex64,
    pub e2: Complex64,
    pub e_gamma: Complex64,
    pub c1: f64,
    pub c2: f64,
}

/// Single-z amplitude kernel.
pub type BetaCGamma = GaussKernel;
/// ρ-numerator kernel at (z₁, z₂).
pub type BarBetaCGamma = GaussKernel;
/// R₀ kernel at (z₁, z₂).
pub type TildeBetaCGamma = GaussKernel;

impl GaussKernel {
    pub fn beta1(&self) -> Complex64 {
        self.p + self.e1
    }

    pub fn beta2(&self) -> Complex64 {
        self.p + self.e2
    }

    pub fn gamma(&self) -> Complex64 {
        self.p + self.e_gamma
    }

    /// β₁β₂ − γ².
    pub fn determinant(&self) -> Complex64 {
        self.p * (self.e1 + self.e2 - 2.0 * self.e_gamma) + self.e1 * self.e2
            - self.e_gamma * self.e_gamma
    }

    /// c₁²β₂ + c₂²β₁ + 2γc₁c₂.
    pub fn numerator(&self) -> Complex64 {
        let (c1, c2) = (self.c1, self.c2);
        self.p * ((c1 + c2) * (c1 + c2))
            + self.e2 * (c1 * c1)
            + self.e1 * (c2 * c2)
            + self.e_gamma * (2.0 * c1 * c2)
    }

    /// Determinant of the real part of [[β₁, γ], [γ, β₂]].
    pub fn real_part_determinant(&self) -> f64 {
        let (p, e1, e2, eg) = (self.p.re, self.e1.re, self.e2.re, self.e_gamma.re);
        p * (e1 + e2 - 2.0 * eg) + e1 * e2 - eg * eg
    }

    /// Kernel value; `at` is reported if the real part of the coefficient
    /// matrix is not positive definite.
    ///
    /// With a positive-definite real part both eigenvalues of the matrix lie
    /// in the right half-plane, so the principal √(β₁β₂ − γ²) is the branch
    /// continued from the real case even where Re(β₁β₂ − γ²) < 0.
    pub fn value(&self, at: (f64, f64)) -> Result<Complex64> {
        let det = self.determinant();
        let re = self.real_part_determinant();
        if !(self.beta1().re > 0.0 && re > 0.0 && det.norm() > 0.0 && det.is_finite()) {
            return Err(Error::BranchGuard { z1: at.0, z2: at.1, re });
        }
        Ok((-self.numerator() / (4.0 * det)).exp() / principal_sqrt(det))
    }

    /// Curvature Re(P / (4Δ)) of the exponent along c₁ + c₂; sets the width
    /// of the phase-matching ridge.
    pub fn ridge_curvature(&self) -> f64 {
        (self.p / (4.0 * self.determinant())).re
    }
}
