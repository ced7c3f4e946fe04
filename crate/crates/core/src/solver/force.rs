//! Force synthesis, force norms and shape factors.

use serde::{Deserialize, Serialize};

use super::config::{ForceTarget, ShellKind};
use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::spectral::ops::{divergence_residual, random_solenoidal, sobolev_norm_sq_unchecked};
use crate::spectral::VectorField;

/// A time-independent, solenoidal, mean-zero force with its norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceProfile {
    pub f: VectorField,
    pub norms: ForceNorms,
}

/// `||A^(alpha/2) f||` for the powers the theorems use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceNorms {
    /// `||f||`.
    pub norm: f64,
    /// `||A^(1/2) f||`.
    pub norm_half: f64,
    /// `||A^(-1/2) f||`.
    pub norm_minus_half: f64,
    /// `||A^(-1) f||`.
    pub norm_minus_one: f64,
}

impl ForceNorms {
    pub fn of(f: &VectorField) -> Self {
        Self {
            norm: sobolev_norm_sq_unchecked(f, 0.0).sqrt(),
            norm_half: sobolev_norm_sq_unchecked(f, 1.0).sqrt(),
            norm_minus_half: sobolev_norm_sq_unchecked(f, -1.0).sqrt(),
            norm_minus_one: sobolev_norm_sq_unchecked(f, -2.0).sqrt(),
        }
    }

    /// `tau_f = ||f|| / ||A^(1/2) f||`.
    pub fn tau_f(&self) -> f64 {
        self.norm / self.norm_half
    }

    /// Periodic Grashof number `||f|| / (nu^2 R0^(-3/2))`.
    pub fn grashof(&self, nu: f64, r0: f64) -> f64 {
        self.norm * r0.powf(1.5) / (nu * nu)
    }
}

/// Dimensionless shape factors of a force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeFactors {
    pub sigma_f: f64,
    pub theta_f: f64,
    pub gamma_f: f64,
}

/// Inputs the shape factors depend on besides the force itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeContext {
    pub nu: f64,
    pub t: f64,
    pub r0: f64,
    /// `(1/T) int eta`.
    pub c_eta: f64,
    /// Cutoff constant `C0`.
    pub c0: f64,
    /// Agmon constant `C_A`.
    pub c_a: f64,
}

/// `gamma_f = C0/(nu T) ||A^-1 f|| / ||f|| + 1`,
/// `sigma_f = (2 gamma_f^2 nu^2 / (c_eta C_A)) (||f|| / ||A^(1/2) f||)^(1/2) ||f||^2 / ||A^(-1/2) f||^2`,
/// `theta_f = (c_eta / (4 C_A)) R0^(-5/2) ||A^(-1/2) f||^2 / (||f||^(3/2) ||A^(1/2) f||^(1/2))`.
pub fn force_shape_factors(n: &ForceNorms, ctx: &ShapeContext) -> Result<ShapeFactors> {
    if !(n.norm > 0.0) {
        return Err(CoreError::arg("shape factors are undefined for a zero force"));
    }
    if !(n.norm_half.is_finite() && n.norm_half > 0.0) {
        return Err(CoreError::arg("force needs a finite ||A^(1/2) f||"));
    }
    let gamma_f = ctx.c0 / (ctx.nu * ctx.t) * n.norm_minus_one / n.norm + 1.0;
    let sigma_f = 2.0 * gamma_f * gamma_f * ctx.nu * ctx.nu / (ctx.c_eta * ctx.c_a)
        * (n.norm / n.norm_half).sqrt()
        * (n.norm * n.norm)
        / (n.norm_minus_half * n.norm_minus_half);
    let theta_f = ctx.c_eta / (4.0 * ctx.c_a) * ctx.r0.powf(-2.5) * n.norm_minus_half.powi(2)
        / (n.norm.powf(1.5) * n.norm_half.sqrt());
    Ok(ShapeFactors {
        sigma_f,
        theta_f,
        gamma_f,
    })
}

impl ForceProfile {
    pub fn from_field(f: VectorField) -> Result<Self> {
        if !f.is_mean_zero() {
            return Err(CoreError::arg("force must have zero mean"));
        }
        let r = divergence_residual(&f);
        if r > crate::spectral::ops::DIVERGENCE_TOLERANCE {
            return Err(CoreError::NotDivergenceFree { residual: r });
        }
        let norms = ForceNorms::of(&f);
        Ok(Self { f, norms })
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    pub fn shape_factors(&self, ctx: &ShapeContext) -> Result<ShapeFactors> {
        force_shape_factors(&self.norms, ctx)
    }
}

/// Random-phase force on the shell `k_f`, Leray-projected and rescaled to
/// the target. Deterministic per seed.
pub fn make_force(
    grid: Grid,
    k_f: f64,
    shell: ShellKind,
    target: ForceTarget,
    nu: f64,
    seed: u64,
) -> Result<ForceProfile> {
    if !(k_f >= 1.0 && 3.0 * k_f <= grid.n() as f64) {
        return Err(CoreError::arg(format!(
            "force shell k_f = {k_f} must satisfy 1 <= k_f <= N/3"
        )));
    }
    let want = match target {
        ForceTarget::Grashof(g) => {
            if !(g > 0.0) {
                return Err(CoreError::arg("target Grashof number must be positive"));
            }
            g * nu * nu / grid.r0().powf(1.5)
        }
        ForceTarget::Norm(v) => {
            if !(v > 0.0) {
                return Err(CoreError::arg("target force norm must be positive"));
            }
            v
        }
    };
    let (lo, hi) = match shell {
        ShellKind::Band => (k_f, k_f + 1.0),
        ShellKind::Sphere => (k_f - 1e-9, k_f + 1e-9),
    };
    let mut f = random_solenoidal(grid, lo, hi, seed)
        .map_err(|_| CoreError::arg(format!("force shell k_f = {k_f} holds no modes")))?;
    f.scale(want);
    ForceProfile::from_field(f)
}
