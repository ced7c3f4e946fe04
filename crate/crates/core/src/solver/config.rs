//! Simulation configuration.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::spectral::NonlinearForm;

/// Which modes a synthesized force occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShellKind {
    /// `k_f <= |k| < k_f + 1`.
    #[default]
    Band,
    /// `|k| = k_f` exactly; every mode is an eigenfunction of `A`.
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceTarget {
    /// Periodic Grashof number `||f|| / (nu^2 R0^(-3/2))`.
    Grashof(f64),
    /// `||f||` in velocity / time * length^(3/2).
    Norm(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingConfig {
    /// Shell radius in integer wavenumber units.
    pub k_f: f64,
    #[serde(default)]
    pub shell: ShellKind,
    pub target: ForceTarget,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialCondition {
    #[default]
    Zero,
    /// Random solenoidal field on `k_lo <= |k| < k_hi` with the given
    /// root-mean-square speed.
    Random {
        rms: f64,
        k_lo: f64,
        k_hi: f64,
        seed: u64,
    },
    /// `amplitude * (cos x sin y, -sin x cos y, 0)` in box-scaled coordinates.
    TaylorGreen { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Points per dimension.
    pub n: usize,
    /// Box side (length).
    pub l: f64,
    /// Kinematic viscosity (length^2 / time).
    pub nu: f64,
    /// Fixed time step (time); CFL-chosen when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    /// CFL number used when `dt` is absent.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Largest admissible step (time) in CFL mode.
    #[serde(default)]
    pub dt_max: Option<f64>,
    /// Statistics horizon `T` (time).
    pub horizon: f64,
    /// Minimum transient discarded before statistics (time).
    pub spin_up: f64,
    /// Upper limit for the spin-up extension while waiting for the
    /// attractor bound to hold over one eddy turnover (time).
    #[serde(default)]
    pub spin_up_max: Option<f64>,
    /// Interval between snapshots (time).
    pub cadence: f64,
    #[serde(default)]
    pub forcing: Option<ForcingConfig>,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub nonlinear_form: NonlinearFormConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearFormConfig {
    #[default]
    Rotational,
    Convective,
}

impl From<NonlinearFormConfig> for NonlinearForm {
    fn from(v: NonlinearFormConfig) -> Self {
        match v {
            NonlinearFormConfig::Rotational => NonlinearForm::Rotational,
            NonlinearFormConfig::Convective => NonlinearForm::Convective,
        }
    }
}

fn default_cfl() -> f64 {
    0.4
}

/// Fewest trapezoid nodes allowed inside the statistics window.
pub const MIN_QUADRATURE_NODES: usize = 200;

impl SimulationConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.l)
    }

    pub fn r0(&self) -> f64 {
        self.l / 4.0
    }

    /// Snapshot count in the statistics window, `floor(T / cadence) + 1`.
    pub fn snapshot_count(&self) -> usize {
        ((self.horizon / self.cadence) * (1.0 + 1e-12)).floor() as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        let pos = |v: f64, what: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CoreError::arg(format!("{what} must be positive, got {v}")))
            }
        };
        pos(self.nu, "nu")?;
        pos(self.horizon, "horizon")?;
        pos(self.cadence, "cadence")?;
        pos(self.cfl, "cfl")?;
        if let Some(dt) = self.dt {
            pos(dt, "dt")?;
        }
        if let Some(dt) = self.dt_max {
            pos(dt, "dt_max")?;
        }
        if !(self.spin_up >= 0.0 && self.spin_up.is_finite()) {
            return Err(CoreError::arg("spin_up must be nonnegative"));
        }
        if let Some(f) = &self.forcing {
            if !(f.k_f >= 1.0 && 3.0 * f.k_f <= self.n as f64) {
                return Err(CoreError::arg(format!(
                    "force shell k_f = {} must satisfy 1 <= k_f <= N/3",
                    f.k_f
                )));
            }
            let t = match f.target {
                ForceTarget::Grashof(v) | ForceTarget::Norm(v) => v,
            };
            pos(t, "force target")?;
        }
        if let InitialCondition::Random { rms, k_lo, k_hi, .. } = self.initial {
            if !(rms >= 0.0 && k_hi > k_lo) {
                return Err(CoreError::arg("random initial condition needs rms >= 0 and k_hi > k_lo"));
            }
        }
        Ok(())
    }

    /// Additional checks required before theorem-level statistics.
    pub fn validate_for_statistics(&self) -> Result<()> {
        self.validate()?;
        let nodes = self.snapshot_count();
        if nodes < MIN_QUADRATURE_NODES {
            return Err(CoreError::arg(format!(
                "statistics window holds {nodes} snapshots; at least {MIN_QUADRATURE_NODES} are required"
            )));
        }
        Ok(())
    }

    /// `T >= R0^2 / nu`.
    pub fn meets_horizon_condition(&self) -> bool {
        self.horizon >= self.r0().powi(2) / self.nu
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SimulationConfig {
        SimulationConfig {
            n: 16,
            l: 2.0 * std::f64::consts::PI,
            nu: 0.1,
            dt: None,
            cfl: 0.4,
            dt_max: None,
            horizon: 1.0,
            spin_up: 0.0,
            spin_up_max: None,
            cadence: 0.005,
            forcing: None,
            initial: InitialCondition::Zero,
            nonlinear_form: NonlinearFormConfig::Rotational,
        }
    }

    #[test]
    fn snapshot_count_is_floor_plus_one() {
        let mut c = base();
        assert_eq!(c.snapshot_count(), 201);
        c.cadence = 0.3;
        assert_eq!(c.snapshot_count(), 4);
    }

    #[test]
    fn rejects_nonpositive_viscosity() {
        let mut c = base();
        c.nu = 0.0;
        assert!(c.validate().is_err());
        c.nu = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn statistics_need_enough_nodes() {
        let mut c = base();
        assert!(c.validate_for_statistics().is_ok());
        c.cadence = 0.01;
        assert!(c.validate_for_statistics().is_err());
    }
}
