//! End-to-end evaluation of one statistics window: global and local
//! budgets, coverings at every requested scale, the exact invariants and
//! the theorem records.

use serde::{Deserialize, Serialize};

use crate::agmon::agmon_constant;
use crate::budget::{
    flux_bracket, flux_profile, global_budget, global_flux_zero_check, sandwich_checks,
    DensityFields, FluxBracket, FluxZeroCheck, GlobalBudget, LocalGlobals, SandwichCheck,
    ScaleAverage,
};
use crate::covering::{jittered_covering, lattice_covering, Covering};
use crate::cutoffs::SpaceCertificate;
use crate::diagnostics::{
    adimensional_numbers, alignment_ratio, apriori_bounds_check, default_saturation_constant,
    inertial_range_detect, kolmogorov_saturation, tau_scales, theorem1_check, theorem2_check,
    theorem3_check, theorem6_check, DiagnosticsReport, Saturation, Status, TauScales,
    Theorem1Inputs, Theorem6Inputs, TheoremRecord,
};
use crate::error::{CoreError, Result};
use crate::solver::{ForceProfile, SeriesRow, ShapeContext, ShapeFactors};

/// Theorem identifiers accepted by [`AnalysisOptions::theorems`]: 1 cascade,
/// 2 dissipation bound, 3 energy lower bound, 4 one-sided Kolmogorov bounds,
/// 6 periodic cascade.
pub const ALL_THEOREMS: [u32; 5] = [1, 2, 3, 4, 6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    /// Covering radii (length).
    pub scales: Vec<f64>,
    /// Coverings per scale: the lattice plus jittered replicas.
    pub coverings_per_scale: usize,
    pub seed: u64,
    pub delta: f64,
    /// Ramp fraction of the time cutoff.
    pub rho: f64,
    /// Overrides `max(space C0, time C0)` for the cascade theorems.
    pub c0: Option<f64>,
    /// Override the covering constants used by the theorems; by default the
    /// largest declared values among the coverings.
    pub k1: Option<u32>,
    pub k2: Option<u32>,
    pub alpha_margin: f64,
    /// Kolmogorov constant of the periodic cascade theorem; by default
    /// `K_meas theta_f`.
    pub saturation_c: Option<f64>,
    pub k_threshold: Option<f64>,
    pub theorems: Vec<u32>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            scales: Vec::new(),
            coverings_per_scale: 4,
            seed: 1,
            delta: crate::cutoffs::DEFAULT_DELTA,
            rho: 0.25,
            c0: None,
            k1: None,
            k2: None,
            alpha_margin: 0.5,
            saturation_c: None,
            k_threshold: None,
            theorems: ALL_THEOREMS.to_vec(),
        }
    }
}

/// Constants actually used, echoed into reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub delta: f64,
    pub rho: f64,
    pub c0_space_grad: f64,
    pub c0_space_lap: f64,
    pub c0_time: f64,
    pub c0: f64,
    pub c_a: f64,
    pub k1: u32,
    pub k2: u32,
    pub alpha_margin: f64,
}

/// Exact consequences checked on every profile row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowChecks {
    pub r: f64,
    pub covering_id: String,
    pub sandwich: Vec<SandwichCheck>,
    pub bracket: FluxBracket,
    pub bracket_pass: bool,
    /// `|<(f,u)>_R| <= sqrt2 <|f|^2>_R^(1/2) <e>_R^(1/2)`.
    pub force_work_pass: bool,
}

impl RowChecks {
    pub fn pass(&self) -> bool {
        self.sandwich.iter().all(|s| s.pass) && self.bracket_pass && self.force_work_pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAnalysis {
    pub constants: Constants,
    pub horizon: f64,
    pub nu: f64,
    pub r0: f64,
    pub globals: GlobalBudget,
    pub local_globals: LocalGlobals,
    pub profile: Vec<ScaleAverage>,
    pub row_checks: Vec<RowChecks>,
    pub flux_zero: FluxZeroCheck,
    pub tau: Option<TauScales>,
    pub saturation: Option<Saturation>,
    pub shape: Option<ShapeFactors>,
    pub observed_inertial_range: Option<(f64, f64)>,
    pub report: DiagnosticsReport,
}

impl RunAnalysis {
    /// Every exact invariant held and no theorem conclusion was violated.
    pub fn invariants_ok(&self) -> bool {
        self.row_checks.iter().all(|r| r.pass())
            && self.flux_zero.pass
            && self.tau.map_or(true, |t| t.ordered && t.lemma_holds)
            && !self
                .report
                .theorems
                .iter()
                .any(|t| t.status == Status::Violated)
    }

    /// Every requested theorem had its hypotheses met.
    pub fn hypotheses_met(&self) -> bool {
        self.report
            .theorems
            .iter()
            .all(|t| t.status == Status::Verified)
    }

    pub fn theorem(&self, name: &str) -> Option<&TheoremRecord> {
        self.report.theorems.iter().find(|t| t.name == name)
    }
}

/// The lattice covering and `count - 1` jittered replicas at scale `r`.
pub fn coverings_at(
    grid: &crate::Grid,
    r: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<(String, Covering)>> {
    let mut out = vec![(format!("lattice@{r}"), lattice_covering(grid, r)?)];
    for j in 1..count {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(j as u64);
        out.push((format!("jitter{j}@{r}"), jittered_covering(grid, r, s)?));
    }
    Ok(out)
}

/// Analyzes one statistics window. `series` must cover the time cutoff
/// stored in `fields`.
pub fn analyze(
    fields: &DensityFields,
    series: &[SeriesRow],
    force: Option<&ForceProfile>,
    on_attractor: bool,
    opts: &AnalysisOptions,
) -> Result<RunAnalysis> {
    let grid = fields.grid;
    let eta = fields.eta;
    if (eta.delta - opts.delta).abs() > 0.0 || (eta.rho - opts.rho).abs() > 0.0 {
        return Err(CoreError::arg(
            "time cutoff of the accumulated densities does not match the options",
        ));
    }
    let nu = fields.nu;
    let r0 = grid.r0();
    let t = eta.t;
    let cert = SpaceCertificate::new(opts.delta)?;

    let mut coverings = Vec::new();
    for (i, &r) in opts.scales.iter().enumerate() {
        coverings.extend(coverings_at(
            &grid,
            r,
            opts.coverings_per_scale.max(1),
            opts.seed.wrapping_add(i as u64),
        )?);
    }
    let k1 = opts
        .k1
        .unwrap_or_else(|| coverings.iter().map(|(_, c)| c.k1).max().unwrap_or(1));
    let k2 = opts
        .k2
        .unwrap_or_else(|| coverings.iter().map(|(_, c)| c.k2).max().unwrap_or(1));
    let constants = Constants {
        delta: opts.delta,
        rho: opts.rho,
        c0_space_grad: cert.c0_grad,
        c0_space_lap: cert.c0_lap,
        c0_time: eta.c0,
        c0: opts.c0.unwrap_or(cert.c0().max(eta.c0)),
        c_a: agmon_constant(),
        k1,
        k2,
        alpha_margin: opts.alpha_margin,
    };

    let globals = global_budget(series, &eta, nu, r0)?;
    let local_globals = fields.global_averages();
    let profile = flux_profile(fields, &coverings, &cert)?;
    let row_checks = profile
        .iter()
        .map(|row| {
            let bracket = flux_bracket(&local_globals, nu, t, constants.c0, row.r, r0, row.n, row.k2);
            let slack = 1e-10 * (bracket.hi.abs() + bracket.lo.abs());
            let majorant = 2f64.sqrt() * row.fsq.max(0.0).sqrt() * row.e.max(0.0).sqrt();
            RowChecks {
                r: row.r,
                covering_id: row.covering_id.clone(),
                sandwich: sandwich_checks(row, &local_globals, r0),
                bracket,
                bracket_pass: row.flux >= bracket.lo - slack && row.flux <= bracket.hi + slack,
                force_work_pass: row.fu.abs() <= majorant * (1.0 + 1e-10) + 1e-300,
            }
        })
        .collect();
    let flux_zero = global_flux_zero_check(series, &eta, r0, globals.eps0);
    let tau = if globals.e0 > 0.0 && globals.eps0 > 0.0 {
        Some(tau_scales(&globals, nu)?)
    } else {
        None
    };

    let f_norm = force.map_or(0.0, |f| f.norms.norm);
    let adim = adimensional_numbers(globals.e0, globals.fsq0, f_norm, nu, r0);
    let shape = match force {
        Some(f) => Some(f.shape_factors(&ShapeContext {
            nu,
            t,
            r0,
            c_eta: eta.c_eta,
            c0: eta.c0,
            c_a: constants.c_a,
        })?),
        None => None,
    };
    let saturation = shape
        .map(|s| kolmogorov_saturation(globals.e0, globals.eps0, s.theta_f, r0, opts.k_threshold));

    let wants = |id: u32| opts.theorems.contains(&id);
    let mut theorems = Vec::new();
    let t1 = theorem1_check(
        &Theorem1Inputs {
            e0: globals.e0,
            eps0: globals.eps0,
            f0: globals.f0,
            nu,
            r0,
            t,
            c0: constants.c0,
            k1: k1 as f64,
            k2: k2 as f64,
        },
        &profile,
    );
    let observed_inertial_range = inertial_range_detect(
        &profile,
        [globals.eps0 / (4.0 * k1 as f64), 9.0 * k2 as f64 * globals.eps0 / 4.0],
    );
    if wants(1) {
        theorems.push(t1);
    }
    if wants(2) {
        theorems.push(theorem2_check(
            globals.e0,
            globals.eps0,
            f_norm,
            nu,
            r0,
            t,
            eta.c0,
            on_attractor && force.is_some(),
        ));
    }
    if let (Some(f), Some(s)) = (force, shape) {
        if wants(3) {
            theorems.push(theorem3_check(&f.norms, s.sigma_f, s.theta_f, globals.e0, r0)?);
        }
        if wants(4) {
            theorems.push(apriori_bounds_check(
                globals.e0,
                globals.eps0,
                f_norm,
                s.sigma_f,
                s.theta_f,
                nu,
                r0,
                t,
                eta.c0,
                on_attractor,
            ));
        }
        if wants(6) {
            let k_meas = saturation.map_or(0.0, |s| s.k_meas);
            theorems.push(theorem6_check(
                &Theorem6Inputs {
                    e0: globals.e0,
                    eps0: globals.eps0,
                    f_norm,
                    theta_f: s.theta_f,
                    tau_m1: tau.map_or(0.0, |t| t.tau_m1),
                    tau_f: f.norms.tau_f(),
                    nu,
                    r0,
                    t,
                    c: opts
                        .saturation_c
                        .unwrap_or_else(|| default_saturation_constant(k_meas, s.theta_f)),
                    alpha_margin: opts.alpha_margin,
                    c0: constants.c0,
                    k1: k1 as f64,
                    k2: k2 as f64,
                },
                &profile,
            ));
        }
    } else {
        for (id, name) in [(3, "energy_lower_bound"), (4, "apriori_bounds"), (6, "periodic_cascade")] {
            if wants(id) {
                theorems.push(TheoremRecord {
                    name: name.into(),
                    status: Status::NotApplicable,
                    hypotheses: Vec::new(),
                    conclusion: Default::default(),
                    notes: vec!["unforced flow".into()],
                });
            }
        }
    }

    let report = DiagnosticsReport {
        tau0: tau.map_or(0.0, |t| t.tau0),
        tau_m1: tau.map_or(0.0, |t| t.tau_m1),
        tau_m1_tilde: tau.map_or(0.0, |t| t.tau_m1_tilde),
        tau_f: force.map(|f| f.norms.tau_f()),
        gr_local: adim.gr_local,
        gr_periodic: adim.gr_periodic,
        re: adim.re,
        k_meas: saturation.map_or(0.0, |s| s.k_meas),
        alignment: alignment_ratio(&globals),
        theorems,
    };
    Ok(RunAnalysis {
        constants,
        horizon: t,
        nu,
        r0,
        globals,
        local_globals,
        profile,
        row_checks,
        flux_zero,
        tau,
        saturation,
        shape,
        observed_inertial_range,
        report,
    })
}

/// Everything produced by [`simulate_and_analyze`].
#[derive(Debug, Clone)]
pub struct AnalyzedRun {
    pub summary: crate::solver::RunSummary,
    pub series: Vec<SeriesRow>,
    pub force: Option<ForceProfile>,
    pub fields: DensityFields,
    pub analysis: RunAnalysis,
}

struct Pair<'a, 'b> {
    series: &'a mut crate::solver::io::SeriesRecorder,
    density: &'a mut crate::budget::DensityAccumulator,
    extra: Option<&'a mut (dyn crate::solver::SnapshotSink + 'b)>,
}

impl crate::solver::SnapshotSink for Pair<'_, '_> {
    fn accept(&mut self, snap: &crate::solver::Snapshot<'_>, fft: &crate::spectral::Fft3) -> Result<()> {
        self.series.accept(snap, fft)?;
        self.density.accept(snap, fft)?;
        if let Some(e) = self.extra.as_mut() {
            e.accept(snap, fft)?;
        }
        Ok(())
    }
}

/// Runs `cfg`, streaming the statistics window into the density
/// accumulator (and `extra`, when given), then analyzes it.
pub fn simulate_and_analyze(
    cfg: &crate::solver::SimulationConfig,
    opts: &AnalysisOptions,
    extra: Option<&mut dyn crate::solver::SnapshotSink>,
) -> Result<AnalyzedRun> {
    let mut sim = crate::solver::Simulation::from_config(cfg)?;
    simulate_and_analyze_with(&mut sim, opts, extra)
}

/// As [`simulate_and_analyze`] for a prepared simulation.
pub fn simulate_and_analyze_with(
    sim: &mut crate::solver::Simulation,
    opts: &AnalysisOptions,
    extra: Option<&mut dyn crate::solver::SnapshotSink>,
) -> Result<AnalyzedRun> {
    let cfg = sim.config().clone();
    let grid = *sim.grid();
    let eta = crate::cutoffs::TimeCutoff::new(cfg.horizon, opts.delta, opts.rho)?;
    let mut series = crate::solver::io::SeriesRecorder::default();
    let mut density = crate::budget::DensityAccumulator::new(grid, cfg.nu, eta).anchored();
    let summary = sim.run(&mut Pair {
        series: &mut series,
        density: &mut density,
        extra: extra.map(|e| &mut *e),
    })?;
    let fields = density.finish()?;
    let force = sim.force().cloned();
    let certified = summary.attractor.is_some_and(|a| a.certified);
    let analysis = analyze(&fields, &series.rows, force.as_ref(), certified, opts)?;
    Ok(AnalyzedRun {
        summary,
        series: series.rows,
        force,
        fields,
        analysis,
    })
}
