//! Driving a simulation: spin-up, the statistics window and snapshot
//! emission to sinks.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::config::{InitialCondition, SimulationConfig};
use super::force::{make_force, ForceProfile};
use super::forcing::Forcing;
use super::integrator::{all_finite, Integrator};
use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::spectral::ops::{inner, random_solenoidal, sobolev_norm_sq_unchecked};
use crate::spectral::{
    nonlinear_term, pressure_from_velocity, Fft3, NonlinearOptions, PhysicalVector, ScalarField,
    VectorField,
};

/// Global scalar quantities of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SeriesRow {
    pub t: f64,
    /// `||u||^2`.
    pub u_sq: f64,
    /// `||grad u||^2`.
    pub grad_sq: f64,
    /// `(f, u)`.
    pub force_work: f64,
    /// `||A^(-1/2) u||^2`.
    pub inv_half_sq: f64,
    /// `(B(u, u), u)`.
    pub trilinear: f64,
    /// `||f||^2`.
    pub f_sq: f64,
}

impl SeriesRow {
    pub fn compute(t: f64, u: &VectorField, f: Option<&VectorField>, fft: &Fft3) -> Result<Self> {
        let b = if u.is_zero() {
            0.0
        } else {
            inner(&nonlinear_term(u, fft)?, u)
        };
        let (fw, fsq) = match f {
            Some(f) => (inner(f, u), inner(f, f)),
            None => (0.0, 0.0),
        };
        Ok(Self {
            t,
            u_sq: inner(u, u),
            grad_sq: sobolev_norm_sq_unchecked(u, 1.0),
            force_work: fw,
            inv_half_sq: sobolev_norm_sq_unchecked(u, -1.0),
            trilinear: b,
            f_sq: fsq,
        })
    }

    /// `||u||^2 / 2`.
    pub fn energy(&self) -> f64 {
        0.5 * self.u_sq
    }
}

/// Per-step energy bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub t: f64,
    pub u_sq: f64,
    pub grad_sq: f64,
    pub force_work: f64,
}

/// A state handed to sinks.
#[derive(Debug, Clone)]
pub struct Snapshot<'a> {
    pub index: usize,
    pub time: f64,
    pub u: &'a VectorField,
    pub p: &'a ScalarField,
    pub f: Option<Cow<'a, VectorField>>,
    pub series: SeriesRow,
}

/// Consumer of emitted snapshots.
pub trait SnapshotSink {
    fn accept(&mut self, snap: &Snapshot<'_>, fft: &Fft3) -> Result<()>;
}

impl<T: SnapshotSink + ?Sized> SnapshotSink for &mut T {
    fn accept(&mut self, snap: &Snapshot<'_>, fft: &Fft3) -> Result<()> {
        (**self).accept(snap, fft)
    }
}

impl SnapshotSink for Vec<Box<dyn SnapshotSink + '_>> {
    fn accept(&mut self, snap: &Snapshot<'_>, fft: &Fft3) -> Result<()> {
        for s in self.iter_mut() {
            s.accept(snap, fft)?;
        }
        Ok(())
    }
}

/// Discards snapshots.
pub struct NullSink;

impl SnapshotSink for NullSink {
    fn accept(&mut self, _: &Snapshot<'_>, _: &Fft3) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredSnapshot {
    pub time: f64,
    pub u: VectorField,
    pub p: ScalarField,
    /// Force at this time when it is not static.
    pub f: Option<VectorField>,
}

/// In-memory trajectory: snapshots plus their scalar series.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub nu: f64,
    pub snapshots: Vec<StoredSnapshot>,
    pub series: Vec<SeriesRow>,
    /// Static force shared by every snapshot.
    pub force: Option<VectorField>,
}

impl Trajectory {
    pub fn new(grid: Grid, nu: f64, force: Option<VectorField>) -> Self {
        Self {
            grid,
            nu,
            snapshots: Vec::new(),
            series: Vec::new(),
            force,
        }
    }

    /// Appends a state, recovering its pressure.
    pub fn push(&mut self, time: f64, u: VectorField, fft: &Fft3) -> Result<()> {
        let p = pressure_from_velocity(&u, fft)?;
        let row = SeriesRow::compute(time, &u, self.force.as_ref(), fft)?;
        self.series.push(row);
        self.snapshots.push(StoredSnapshot {
            time,
            u,
            p,
            f: None,
        });
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    /// Replays the stored snapshots into another sink.
    pub fn replay(&self, sink: &mut dyn SnapshotSink, fft: &Fft3) -> Result<()> {
        for (i, (s, row)) in self.snapshots.iter().zip(&self.series).enumerate() {
            let f = match (&s.f, &self.force) {
                (Some(f), _) => Some(Cow::Borrowed(f)),
                (None, Some(f)) => Some(Cow::Borrowed(f)),
                _ => None,
            };
            sink.accept(
                &Snapshot {
                    index: i,
                    time: s.time,
                    u: &s.u,
                    p: &s.p,
                    f,
                    series: *row,
                },
                fft,
            )?;
        }
        Ok(())
    }
}

impl SnapshotSink for Trajectory {
    fn accept(&mut self, snap: &Snapshot<'_>, _: &Fft3) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if snap.time <= last.time {
                return Err(CoreError::arg("snapshot times must increase"));
            }
        }
        let f = match (&snap.f, &self.force) {
            (Some(_), Some(_)) | (None, _) => None,
            (Some(f), None) => Some(f.clone().into_owned()),
        };
        self.snapshots.push(StoredSnapshot {
            time: snap.time,
            u: snap.u.clone(),
            p: snap.p.clone(),
            f,
        });
        self.series.push(snap.series);
        Ok(())
    }
}

/// Attractor-proximity bookkeeping for static forcing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorStatus {
    /// `(2/pi)^4 R0^4 ||f||^2 / nu^2`.
    pub bound: f64,
    /// The bound held at every check over the final eddy turnover of the
    /// spin-up and at every snapshot of the statistics window.
    pub certified: bool,
    /// Largest `||u||^2 / bound` seen in the statistics window.
    pub max_ratio: f64,
    /// Spin-up time actually used.
    pub spin_up_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: u64,
    pub snapshots: usize,
    pub t_stats_start: f64,
    pub t_end: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub attractor: Option<AttractorStatus>,
    pub max_divergence: f64,
    /// Energy bookkeeping at every step of the statistics window.
    pub budget: Vec<BudgetRow>,
}

/// `(2/pi)^4 R0^4 ||f||^2 / nu^2`, the weak-attractor bound on `||u||^2`.
pub fn attractor_bound(r0: f64, f_norm: f64, nu: f64) -> f64 {
    (2.0 / std::f64::consts::PI).powi(4) * r0.powi(4) * f_norm * f_norm / (nu * nu)
}

/// A simulation in progress.
pub struct Simulation {
    cfg: SimulationConfig,
    grid: Grid,
    integ: Integrator,
    forcing: Forcing,
    force: Option<ForceProfile>,
    u: VectorField,
    t: f64,
    steps: u64,
    dt_min: f64,
    dt_max: f64,
    record_budget: bool,
    budget: Vec<BudgetRow>,
}

impl Simulation {
    /// Builds the force and initial state described by the configuration.
    pub fn from_config(cfg: &SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        let fft = Fft3::new(grid);
        let force = match &cfg.forcing {
            Some(fc) => Some(make_force(grid, fc.k_f, fc.shell, fc.target, cfg.nu, fc.seed)?),
            None => None,
        };
        let u0 = initial_field(grid, &cfg.initial, &fft)?;
        let forcing = match &force {
            Some(f) => Forcing::Static(f.f.clone()),
            None => Forcing::None,
        };
        let mut sim = Self::with_forcing(cfg, forcing, u0)?;
        sim.force = force;
        Ok(sim)
    }

    /// Uses an explicit forcing and initial field instead of the ones the
    /// configuration would synthesize.
    pub fn with_forcing(cfg: &SimulationConfig, forcing: Forcing, u0: VectorField) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        if *u0.grid() != grid {
            return Err(CoreError::arg("initial field lives on a different grid"));
        }
        crate::spectral::ops::require_solenoidal(&u0)?;
        let fft = Fft3::new(grid);
        let integ = Integrator::new(fft, cfg.nu).with_nonlinear(NonlinearOptions {
            form: cfg.nonlinear_form.into(),
            dealias: true,
        });
        let force = match &forcing {
            Forcing::Static(f) if !f.is_zero() => Some(ForceProfile::from_field(f.clone())?),
            _ => None,
        };
        let mut u0 = u0;
        crate::spectral::ops::dealias_in_place(&mut u0);
        u0.remove_mean();
        Ok(Self {
            cfg: cfg.clone(),
            grid,
            integ,
            forcing,
            force,
            u: u0,
            t: 0.0,
            steps: 0,
            dt_min: f64::INFINITY,
            dt_max: 0.0,
            record_budget: false,
            budget: Vec::new(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fft(&self) -> &Fft3 {
        self.integ.fft()
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn velocity(&self) -> &VectorField {
        &self.u
    }

    pub fn force(&self) -> Option<&ForceProfile> {
        self.force.as_ref()
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    fn budget_row(&self) -> Result<BudgetRow> {
        let fw = match self.forcing.at(self.t, self.fft())? {
            Some(f) => inner(&f, &self.u),
            None => 0.0,
        };
        Ok(BudgetRow {
            t: self.t,
            u_sq: inner(&self.u, &self.u),
            grad_sq: sobolev_norm_sq_unchecked(&self.u, 1.0),
            force_work: fw,
        })
    }

    /// Integrates over `[t, t + len]` in equal substeps.
    pub fn advance(&mut self, len: f64) -> Result<()> {
        if !(len > 0.0) {
            return Ok(());
        }
        let (cfl_dt, speed) = self.integ.cfl_dt(&self.u, self.cfg.cfl)?;
        let target = match self.cfg.dt {
            Some(dt) => dt,
            None => cfl_dt.min(self.cfg.dt_max.unwrap_or(len)),
        };
        let sub = ((len / target) - 1e-9).ceil().max(1.0) as u64;
        let dt = len / sub as f64;
        let t0 = self.t;
        for j in 0..sub {
            self.integ.step(&mut self.u, self.t, dt, &self.forcing)?;
            self.steps += 1;
            self.t = t0 + (j + 1) as f64 * dt;
            if !all_finite(&self.u) {
                return Err(CoreError::Unstable {
                    time: self.t,
                    step: self.steps,
                    dt,
                    cfl_dt,
                    max_speed: speed,
                });
            }
            if self.record_budget {
                let row = self.budget_row()?;
                self.budget.push(row);
            }
        }
        self.t = t0 + len;
        self.dt_min = self.dt_min.min(dt);
        self.dt_max = self.dt_max.max(dt);
        Ok(())
    }

    fn attractor_ratio(&self) -> Option<f64> {
        self.force.as_ref().map(|f| {
            inner(&self.u, &self.u) / attractor_bound(self.grid.r0(), f.norms.norm, self.cfg.nu)
        })
    }

    fn eddy_time(&self) -> f64 {
        let u_rms = (inner(&self.u, &self.u) / self.grid.volume()).sqrt();
        if u_rms > 0.0 {
            self.grid.r0() / u_rms
        } else {
            f64::INFINITY
        }
    }

    /// Spin-up, then the statistics window; every window snapshot goes to `sink`.
    pub fn run(&mut self, sink: &mut dyn SnapshotSink) -> Result<RunSummary> {
        let cad = self.cfg.cadence;
        let t_min = self.cfg.spin_up;
        let t_max = self.cfg.spin_up_max.unwrap_or(2.0 * t_min).max(t_min);

        // (time, bound holds) at each spin-up check.
        let mut checks: Vec<(f64, bool)> = Vec::new();
        if let Some(r) = self.attractor_ratio() {
            checks.push((self.t, r <= 1.0));
        }
        let window_ok = |checks: &[(f64, bool)], now: f64, eddy: f64| {
            let from = now - eddy.min(now);
            checks.iter().filter(|(t, _)| *t >= from - 1e-12).all(|(_, ok)| *ok)
        };
        while self.t < t_min - 1e-12 {
            self.advance(cad.min(t_min - self.t))?;
            if let Some(r) = self.attractor_ratio() {
                checks.push((self.t, r <= 1.0));
            }
        }
        let mut certified = self.force.is_some();
        if self.force.is_some() {
            while !window_ok(&checks, self.t, self.eddy_time()) {
                if self.t >= t_max - 1e-12 {
                    certified = false;
                    break;
                }
                self.advance(cad.min(t_max - self.t))?;
                checks.push((self.t, self.attractor_ratio().unwrap_or(0.0) <= 1.0));
            }
        }
        let spin_up_used = self.t;

        let count = self.cfg.snapshot_count();
        let t_s = self.t;
        let mut max_ratio: f64 = 0.0;
        let mut max_div: f64 = 0.0;
        self.record_budget = true;
        self.budget.clear();
        let first = self.budget_row()?;
        self.budget.push(first);
        for j in 0..count {
            if j > 0 {
                self.advance(t_s + j as f64 * cad - self.t)?;
                self.t = t_s + j as f64 * cad;
            }
            if let Some(r) = self.attractor_ratio() {
                max_ratio = max_ratio.max(r);
                if r > 1.0 {
                    certified = false;
                }
            }
            max_div = max_div.max(crate::spectral::divergence_residual(&self.u));
            let f = self.forcing.at(self.t, self.integ.fft())?;
            let p = pressure_from_velocity(&self.u, self.integ.fft())?;
            let row = SeriesRow::compute(self.t, &self.u, f.as_deref(), self.integ.fft())?;
            sink.accept(
                &Snapshot {
                    index: j,
                    time: self.t,
                    u: &self.u,
                    p: &p,
                    f,
                    series: row,
                },
                self.integ.fft(),
            )?;
        }
        self.record_budget = false;

        let attractor = self.force.as_ref().map(|f| AttractorStatus {
            bound: attractor_bound(self.grid.r0(), f.norms.norm, self.cfg.nu),
            certified,
            max_ratio,
            spin_up_used,
        });
        Ok(RunSummary {
            steps: self.steps,
            snapshots: count,
            t_stats_start: t_s,
            t_end: self.t,
            dt_min: self.dt_min,
            dt_max: self.dt_max,
            attractor,
            max_divergence: max_div,
            budget: std::mem::take(&mut self.budget),
        })
    }
}

/// Builds the configured initial field.
pub fn initial_field(grid: Grid, ic: &InitialCondition, fft: &Fft3) -> Result<VectorField> {
    Ok(match *ic {
        InitialCondition::Zero => VectorField::zeros(grid),
        InitialCondition::Random {
            rms,
            k_lo,
            k_hi,
            seed,
        } => {
            let mut v = random_solenoidal(grid, k_lo, k_hi, seed)?;
            v.scale(rms * grid.volume().sqrt());
            v
        }
        InitialCondition::TaylorGreen { amplitude } => {
            let k = grid.k0();
            let p = PhysicalVector::from_fn(grid, |x| {
                [
                    amplitude * (k * x[0]).cos() * (k * x[1]).sin(),
                    -amplitude * (k * x[0]).sin() * (k * x[1]).cos(),
                    0.0,
                ]
            });
            VectorField::from_physical(&p, fft)?
        }
    })
}

/// Runs a configuration, collecting everything in memory.
pub fn run(cfg: &SimulationConfig) -> Result<(Trajectory, RunSummary, Option<ForceProfile>)> {
    let mut sim = Simulation::from_config(cfg)?;
    let grid = *sim.grid();
    let force = sim.force().cloned();
    let mut traj = Trajectory::new(grid, cfg.nu, force.as_ref().map(|f| f.f.clone()));
    let summary = sim.run(&mut traj)?;
    Ok((traj, summary, force))
}
