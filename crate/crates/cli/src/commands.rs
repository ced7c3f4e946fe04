use std::borrow::Cow;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cascade_core::analysis::{analyze, simulate_and_analyze, AnalyzedRun};
use cascade_core::budget::{profile_csv, DensityAccumulator};
use cascade_core::cutoffs::TimeCutoff;
use cascade_core::diagnostics::{scaling_check, ScalingRecord, ScalingRun, EXPECTED_SLOPES};
use cascade_core::solver::io::{
    read_force, read_series_json, read_snapshot, series_csv, write_force, write_series_json, SeriesRecorder,
    SnapshotWriter,
};
use cascade_core::solver::{ForceProfile, ForceTarget, Simulation, Snapshot, SnapshotSink};
use cascade_core::spectral::{Fft3, VectorField};
use cascade_core::toy1d::{toy_average, toy_csv, Strategy, ToySpec};
use cascade_core::{AnalysisOptions, RunAnalysis};
use serde::Serialize;

use crate::config::{unix_now, write_json, RunConfig, RunFiles, RunManifest, WallClock, MANIFEST};

/// Process exit status: 0 invariants held, 2 some theorem hypothesis was
/// not met, 1 an asserted invariant failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Ok,
    HypothesesNotMet,
    InvariantViolated,
}

impl Verdict {
    pub fn of(a: &RunAnalysis) -> Self {
        if !a.invariants_ok() {
            Verdict::InvariantViolated
        } else if !a.hypotheses_met() {
            Verdict::HypothesesNotMet
        } else {
            Verdict::Ok
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Verdict::Ok => 0,
            Verdict::HypothesesNotMet => 2,
            Verdict::InvariantViolated => 1,
        }
    }
}

pub fn simulate(config: &Path, out: &Path) -> Result<Verdict> {
    let cfg = RunConfig::load(config)?;
    let started = unix_now();
    let clock = Instant::now();
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let sc = &cfg.simulation;
    let mut sim = Simulation::from_config(sc)?;
    let mut files = RunFiles {
        series_json: "series.json".into(),
        series_csv: "series.csv".into(),
        summary: "summary.json".into(),
        ..Default::default()
    };
    if let Some(f) = sim.force() {
        let fft = Fft3::new(*sim.grid());
        let path = PathBuf::from("force.bin");
        write_force(&out.join(&path), sc.nu, &f.f.to_physical(&fft)?)?;
        files.force = Some(path);
    }
    let mut writer = SnapshotWriter::new(out.join("snapshots"), sc.nu)?;
    let mut rec = SeriesRecorder::default();
    let summary = {
        let mut sinks: Vec<Box<dyn SnapshotSink>> = vec![Box::new(&mut writer), Box::new(&mut rec)];
        sim.run(&mut sinks)?
    };
    files.snapshots = writer
        .written
        .iter()
        .map(|p| PathBuf::from("snapshots").join(p.file_name().expect("snapshot file name")))
        .collect();
    write_series_json(&out.join(&files.series_json), &rec.rows)?;
    std::fs::write(out.join(&files.series_csv), series_csv(&rec.rows))?;
    write_json(&out.join(&files.summary), &summary)?;
    let manifest = RunManifest::new(
        cfg,
        files,
        &summary,
        WallClock {
            started,
            elapsed_s: clock.elapsed().as_secs_f64(),
        },
    );
    write_json(&out.join(MANIFEST), &manifest)?;
    println!(
        "{} steps, {} snapshots from t = {:.4}; attractor bound certified: {}",
        summary.steps, summary.snapshots, summary.t_stats_start, manifest.attractor_certified
    );
    Ok(Verdict::Ok)
}

/// Overrides applied on top of the analysis options stored in a manifest.
#[derive(Debug, Clone, Default)]
pub struct AnalysisOverrides {
    pub scales: Option<Vec<f64>>,
    pub coverings: Option<usize>,
    pub theorems: Option<Vec<u32>>,
}

impl AnalysisOverrides {
    pub fn apply(&self, mut opts: AnalysisOptions) -> AnalysisOptions {
        if let Some(s) = &self.scales {
            opts.scales = s.clone();
        }
        if let Some(c) = self.coverings {
            opts.coverings_per_scale = c;
        }
        if let Some(t) = &self.theorems {
            opts.theorems = t.clone();
        }
        opts
    }
}

#[derive(Debug, Serialize)]
struct AnalysisManifest<'a> {
    run: &'a Path,
    options: &'a AnalysisOptions,
    files: Vec<&'static str>,
}

/// Replays the stored snapshots through the density accumulator and writes
/// the reports into `<run>/analysis`. Simulation outputs are only read.
pub fn analyze_run(run: &Path, overrides: &AnalysisOverrides) -> Result<Verdict> {
    let manifest = RunManifest::load(run)?;
    let opts = overrides.apply(manifest.config.analysis.clone());
    let sc = &manifest.config.simulation;
    let grid = sc.grid()?;
    let fft = Fft3::new(grid);
    let force = match &manifest.files.force {
        Some(p) => {
            let f = read_force(&run.join(p)).with_context(|| format!("reading force {}", p.display()))?;
            let mut f = VectorField::from_physical(&f, &fft)?;
            // The stored samples reproduce the mean mode only up to roundoff.
            f.remove_mean();
            Some(ForceProfile::from_field(f)?)
        }
        None => None,
    };
    let series = read_series_json(&run.join(&manifest.files.series_json))
        .with_context(|| format!("reading {}", manifest.files.series_json.display()))?;
    if series.len() != manifest.files.snapshots.len() {
        bail!(
            "{} series rows for {} snapshots",
            series.len(),
            manifest.files.snapshots.len()
        );
    }
    let eta = TimeCutoff::new(sc.horizon, opts.delta, opts.rho)?;
    let mut acc = DensityAccumulator::new(grid, sc.nu, eta).anchored();
    for (index, (rel, row)) in manifest.files.snapshots.iter().zip(&series).enumerate() {
        let path = run.join(rel);
        let snap = read_snapshot(&path).with_context(|| format!("snapshot {} missing or unreadable", path.display()))?;
        let (u, p) = snap.spectral(&fft)?;
        acc.accept(
            &Snapshot {
                index,
                time: snap.header.time,
                u: &u,
                p: &p,
                f: force.as_ref().map(|f| Cow::Borrowed(&f.f)),
                series: *row,
            },
            &fft,
        )?;
    }
    let fields = acc.finish()?;
    let analysis = analyze(&fields, &series, force.as_ref(), manifest.attractor_certified, &opts)?;

    let dir = run.join("analysis");
    std::fs::create_dir_all(&dir)?;
    write_json(&dir.join("report.json"), &analysis)?;
    write_json(&dir.join("theorems.json"), &analysis.report.theorems)?;
    std::fs::write(dir.join("profile.csv"), profile_csv(&analysis.profile))?;
    write_json(
        &dir.join("analysis_manifest.json"),
        &AnalysisManifest {
            run,
            options: &opts,
            files: vec!["report.json", "theorems.json", "profile.csv"],
        },
    )?;
    print!("{}", summarize(&analysis));
    Ok(Verdict::of(&analysis))
}

fn summarize(a: &RunAnalysis) -> String {
    let mut s = String::new();
    let g = &a.globals;
    let r = &a.report;
    let _ = writeln!(s, "e0 {:.6e}  eps0 {:.6e}  tau0 {:.4e}  Gr {:.4e}  K_meas {:.4e}", g.e0, g.eps0, r.tau0, r.gr_periodic, r.k_meas);
    let failed = a.row_checks.iter().filter(|c| !c.pass()).count();
    let _ = writeln!(
        s,
        "profile rows {}  failed row checks {}  global flux zero {}",
        a.profile.len(),
        failed,
        a.flux_zero.pass
    );
    for t in &r.theorems {
        let _ = writeln!(s, "{:<26} {:?}", t.name, t.status);
    }
    s
}

#[derive(Debug, Serialize)]
struct SweepReport {
    expected_slopes: (f64, f64),
    gr_targets: Vec<f64>,
    scaling: ScalingRecord,
    members: Vec<PathBuf>,
}

/// One member per Grashof target, then the scaling fit over all members
/// with `K_meas >= k` (default: the smallest measured value).
pub fn sweep(config: &Path, grs: &[f64], out: &Path, k: Option<f64>) -> Result<Verdict> {
    let cfg = RunConfig::load(config)?;
    if cfg.simulation.forcing.is_none() {
        bail!("a Grashof sweep needs a [simulation.forcing] table");
    }
    if grs.is_empty() {
        bail!("--gr needs at least one value");
    }
    std::fs::create_dir_all(out)?;
    let mut csv = String::from("Gr,e0,eps0,K_meas,tau0,tau_m1,alignment\n");
    let mut runs = Vec::new();
    let mut members = Vec::new();
    let mut verdict = Verdict::Ok;
    for (i, &gr) in grs.iter().enumerate() {
        let mut member = cfg.clone();
        if let Some(f) = member.simulation.forcing.as_mut() {
            f.target = ForceTarget::Grashof(gr);
        }
        let dir = PathBuf::from(format!("gr_{i:02}"));
        std::fs::create_dir_all(out.join(&dir))?;
        let run: AnalyzedRun = simulate_and_analyze(&member.simulation, &member.analysis, None)
            .with_context(|| format!("sweep member Gr = {gr}"))?;
        let a = &run.analysis;
        write_json(&out.join(&dir).join("report.json"), a)?;
        write_series_json(&out.join(&dir).join("series.json"), &run.series)?;
        write_json(&out.join(&dir).join("config.json"), &member)?;
        verdict = verdict.max(Verdict::of(a));
        let r = &a.report;
        let _ = writeln!(
            csv,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.gr_periodic, a.globals.e0, a.globals.eps0, r.k_meas, r.tau0, r.tau_m1, r.alignment
        );
        runs.push(ScalingRun {
            gr: r.gr_periodic,
            e0: a.globals.e0,
            eps0: a.globals.eps0,
            f_norm: run.force.as_ref().map_or(0.0, |f| f.norms.norm),
            theta_f: a.shape.map_or(0.0, |s| s.theta_f),
            r0: a.r0,
            k_meas: r.k_meas,
        });
        members.push(dir);
        println!("Gr {:.4e}: e0 {:.4e} eps0 {:.4e} K_meas {:.4e}", r.gr_periodic, a.globals.e0, a.globals.eps0, r.k_meas);
    }
    let k = k.unwrap_or_else(|| runs.iter().map(|r| r.k_meas).fold(f64::INFINITY, f64::min));
    let scaling = scaling_check(&runs, k);
    match (scaling.energy_slope, scaling.dissipation_slope) {
        (Some(e), Some(d)) => println!(
            "slopes: e0 {:.3} +- {:.3} (expected {}), eps0 {:.3} +- {:.3} (expected {})",
            e.slope, e.slope_stderr, EXPECTED_SLOPES.0, d.slope, d.slope_stderr, EXPECTED_SLOPES.1
        ),
        _ => println!("fewer than three members with K_meas >= {k:.4e}: slope fit skipped"),
    }
    if !scaling.pass {
        verdict = verdict.max(Verdict::HypothesesNotMet);
    }
    std::fs::write(out.join("sweep.csv"), csv)?;
    write_json(
        &out.join("scaling.json"),
        &SweepReport {
            expected_slopes: EXPECTED_SLOPES,
            gr_targets: grs.to_vec(),
            scaling,
            members,
        },
    )?;
    Ok(verdict)
}

pub fn toy1d(m: f64, n: u32, scales: &[f64], strategies: &[Strategy]) -> Result<String> {
    let spec = ToySpec::new(m, n)?;
    let mut results = Vec::new();
    for &r in scales {
        for &st in strategies {
            results.push(toy_average(&spec, r, st).with_context(|| format!("R = {r}, {}", st.name()))?);
        }
    }
    Ok(toy_csv(&results))
}
