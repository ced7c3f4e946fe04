//! Localized energy budgets, `(K1, K2)`-averages and global budgets.
//!
//! Space-time integrals `(1/T R^3) iint q eta psi_i` are evaluated by
//! exchanging the order of integration: the time integrals of every
//! density are accumulated once per grid point while the run streams its
//! snapshots (composite trapezoid over snapshot times), and each ball then
//! needs a single weighted sum over its support.

use serde::{Deserialize, Serialize};

use crate::covering::Covering;
use crate::cutoffs::{PartitionOfUnity, SpaceCertificate, SpaceCutoff, TimeCutoff};
use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::solver::{SeriesRow, Snapshot, SnapshotSink};
use crate::spectral::{Fft3, VectorField};

/// Relative tolerance of the positivity sandwiches.
pub const SANDWICH_TOLERANCE: f64 = 1e-10;

/// Pointwise densities of one snapshot.
#[derive(Debug, Clone)]
struct NodeDensities {
    /// `|u|^2 / 2`.
    energy: Vec<f64>,
    /// `|grad u|^2`.
    grad_sq: Vec<f64>,
    /// `(|u|^2/2 + p) u`.
    flux: [Vec<f64>; 3],
    /// `|f|^2`.
    force_sq: Vec<f64>,
    /// `f . u`.
    force_work: Vec<f64>,
}

impl NodeDensities {
    fn zeros(len: usize) -> Self {
        Self {
            energy: vec![0.0; len],
            grad_sq: vec![0.0; len],
            flux: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            force_sq: vec![0.0; len],
            force_work: vec![0.0; len],
        }
    }
}

/// Time integrals of the local-budget densities at every grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFields {
    pub grid: Grid,
    pub nu: f64,
    pub eta: TimeCutoff,
    /// Quadrature nodes used.
    pub nodes: usize,
    /// `int eta^(2 delta - 1) |u|^2 / 2`.
    pub energy: Vec<f64>,
    /// `nu int eta |grad u|^2`.
    pub dissipation: Vec<f64>,
    /// `int eta (|u|^2/2 + p) u`.
    pub flux: [Vec<f64>; 3],
    /// `int eta |f|^2`.
    pub force_sq: Vec<f64>,
    /// `int eta f . u`.
    pub force_work: Vec<f64>,
    /// `int eta_t |u|^2 / 2`.
    pub energy_dt: Vec<f64>,
    /// `nu int eta |u|^2 / 2`.
    pub energy_visc: Vec<f64>,
}

impl DensityFields {
    fn zeros(grid: Grid, nu: f64, eta: TimeCutoff) -> Self {
        let len = grid.physical_len();
        Self {
            grid,
            nu,
            eta,
            nodes: 0,
            energy: vec![0.0; len],
            dissipation: vec![0.0; len],
            flux: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            force_sq: vec![0.0; len],
            force_work: vec![0.0; len],
            energy_dt: vec![0.0; len],
            energy_visc: vec![0.0; len],
        }
    }

    /// Time-integrated fields, each scaled so that its grid sum times the
    /// cell volume over `T R0^3` gives the global (`psi_0 = 1`) average.
    pub fn global_averages(&self) -> LocalGlobals {
        let g = &self.grid;
        let s = g.cell_volume() / (self.eta.t * g.r0().powi(3));
        let sum = |v: &[f64]| v.iter().sum::<f64>() * s;
        LocalGlobals {
            e0: sum(&self.energy),
            eps0: sum(&self.dissipation),
            fsq0: sum(&self.force_sq),
            fu0: sum(&self.force_work),
        }
    }
}

/// Global averages built from the same time-integrated densities as the
/// per-ball quantities, with `psi_0 = 1` and the `eta^(2 delta - 1)`
/// energy weight. These are the `Q0` of the positivity sandwiches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalGlobals {
    pub e0: f64,
    pub eps0: f64,
    pub fsq0: f64,
    pub fu0: f64,
}

/// Streams snapshots into [`DensityFields`].
pub struct DensityAccumulator {
    fields: DensityFields,
    prev: Option<(f64, NodeDensities)>,
    cur: NodeDensities,
    work: Vec<num_complex::Complex64>,
    spec: Vec<num_complex::Complex64>,
    phys: Vec<f64>,
    anchor: bool,
}

impl DensityAccumulator {
    pub fn new(grid: Grid, nu: f64, eta: TimeCutoff) -> Self {
        let len = grid.physical_len();
        Self {
            fields: DensityFields::zeros(grid, nu, eta),
            prev: None,
            cur: NodeDensities::zeros(len),
            work: Vec::new(),
            spec: vec![num_complex::Complex64::new(0.0, 0.0); grid.spectral_len()],
            phys: vec![0.0; len],
            anchor: false,
        }
    }

    /// Shifts the time cutoff so that it starts at the first snapshot
    /// received, for runs whose spin-up length is decided on the fly.
    pub fn anchored(mut self) -> Self {
        self.anchor = true;
        self
    }

    pub fn finish(self) -> Result<DensityFields> {
        if self.fields.nodes < 2 {
            return Err(CoreError::arg(
                "at least two snapshots are needed for the time quadrature",
            ));
        }
        Ok(self.fields)
    }

    fn evaluate(
        &mut self,
        u: &VectorField,
        p: &[f64],
        f: Option<&VectorField>,
        fft: &Fft3,
    ) -> Result<()> {
        let g = *u.grid();
        let t = g.modes();
        let up = u.to_physical(fft)?;
        let d = &mut self.cur;
        for j in 0..g.physical_len() {
            let v = up.at(j);
            let e = 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            d.energy[j] = e;
            let h = e + p[j];
            d.flux[0][j] = h * v[0];
            d.flux[1][j] = h * v[1];
            d.flux[2][j] = h * v[2];
        }
        d.grad_sq.iter_mut().for_each(|x| *x = 0.0);
        let i_unit = num_complex::Complex64::new(0.0, 1.0);
        for i in 0..3 {
            for a in 0..3 {
                for (idx, s) in self.spec.iter_mut().enumerate() {
                    *s = i_unit * t.qd[idx][a] * u.comp(i)[idx];
                }
                fft.inverse_using(&self.spec, &mut self.phys, &mut self.work)?;
                for (o, x) in d.grad_sq.iter_mut().zip(&self.phys) {
                    *o += x * x;
                }
            }
        }
        match f {
            Some(f) => {
                let fp = f.to_physical(fft)?;
                for j in 0..g.physical_len() {
                    let a = fp.at(j);
                    let v = up.at(j);
                    d.force_sq[j] = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
                    d.force_work[j] = a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
                }
            }
            None => {
                d.force_sq.iter_mut().for_each(|x| *x = 0.0);
                d.force_work.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        Ok(())
    }

    /// Adds the trapezoid panel `[t_a, t_b]`.
    fn add_panel(&mut self, ta: f64, a: &NodeDensities, tb: f64, b: &NodeDensities) {
        let eta = self.fields.eta;
        let h = 0.5 * (tb - ta);
        let p = 2.0 * eta.delta - 1.0;
        let w = |t: f64| {
            let e = eta.value(t);
            (e, if e > 0.0 { e.powf(p) } else { 0.0 }, eta.derivative(t))
        };
        let nu = self.fields.nu;
        for (node, t) in [(a, ta), (b, tb)] {
            let (e1, e2, et) = w(t);
            if e1 == 0.0 && et == 0.0 {
                continue;
            }
            let fl = &mut self.fields;
            for j in 0..node.energy.len() {
                let en = node.energy[j];
                fl.energy[j] += h * e2 * en;
                fl.dissipation[j] += h * nu * e1 * node.grad_sq[j];
                fl.flux[0][j] += h * e1 * node.flux[0][j];
                fl.flux[1][j] += h * e1 * node.flux[1][j];
                fl.flux[2][j] += h * e1 * node.flux[2][j];
                fl.force_sq[j] += h * e1 * node.force_sq[j];
                fl.force_work[j] += h * e1 * node.force_work[j];
                fl.energy_dt[j] += h * et * en;
                fl.energy_visc[j] += h * nu * e1 * en;
            }
        }
    }
}

impl SnapshotSink for DensityAccumulator {
    fn accept(&mut self, snap: &Snapshot<'_>, fft: &Fft3) -> Result<()> {
        if *snap.u.grid() != self.fields.grid {
            return Err(CoreError::arg("snapshot lives on a different grid"));
        }
        if let Some((tp, _)) = &self.prev {
            if snap.time <= *tp {
                return Err(CoreError::arg("snapshot times must increase"));
            }
        }
        if self.anchor && self.fields.nodes == 0 {
            let e = self.fields.eta;
            self.fields.eta = TimeCutoff::starting_at(snap.time, e.t, e.delta, e.rho)?;
        }
        let p = snap.p.to_physical(fft)?;
        self.evaluate(snap.u, p.values(), snap.f.as_deref(), fft)?;
        let len = self.fields.grid.physical_len();
        let cur = std::mem::replace(&mut self.cur, NodeDensities::zeros(0));
        if let Some((tp, prev)) = self.prev.take() {
            self.add_panel(tp, &prev, snap.time, &cur);
            // Recycle the old buffers for the next node.
            self.cur = prev;
        } else {
            self.cur = NodeDensities::zeros(len);
        }
        self.prev = Some((snap.time, cur));
        self.fields.nodes += 1;
        Ok(())
    }
}

/// Localized quantities of one ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalBudget {
    pub index: usize,
    /// `(1/T R^3) iint |u|^2/2 phi^(2 delta - 1)`.
    pub e: f64,
    /// `(1/T R^3) nu iint |grad u|^2 phi`.
    pub eps: f64,
    /// `(1/T R^3) iint (|u|^2/2 + p) u . grad phi`.
    pub flux: f64,
    /// `(1/T R^3) iint |f|^2 phi`.
    pub fsq: f64,
    /// `(1/T R^3) iint f . u phi`.
    pub fw: f64,
    /// `(1/T R^3) iint |u|^2/2 (phi_t + nu Laplace phi)`.
    pub tr: f64,
    /// `flux - eps + tr + fw`; zero for exact smooth solutions.
    pub residual: f64,
}

/// Budget of the ball carried by `cutoff`.
pub fn local_budget(fields: &DensityFields, cutoff: &SpaceCutoff, index: usize) -> LocalBudget {
    let g = &fields.grid;
    let p = 2.0 * cutoff.profile.delta - 1.0;
    let (mut e, mut eps, mut flux, mut fsq, mut fw, mut tr) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    cutoff.for_each_support_point(g, |j, d| {
        let s = cutoff.sample_displacement(d);
        if s.value == 0.0 {
            return;
        }
        let psi_p = if s.value == 1.0 { 1.0 } else { s.value.powf(p) };
        e += psi_p * fields.energy[j];
        eps += s.value * fields.dissipation[j];
        flux += s.gradient[0] * fields.flux[0][j]
            + s.gradient[1] * fields.flux[1][j]
            + s.gradient[2] * fields.flux[2][j];
        fsq += s.value * fields.force_sq[j];
        fw += s.value * fields.force_work[j];
        tr += s.value * fields.energy_dt[j] + s.laplacian * fields.energy_visc[j];
    });
    let scale = g.cell_volume() / (fields.eta.t * cutoff.r.powi(3));
    let (e, eps, flux, fsq, fw, tr) = (
        e * scale,
        eps * scale,
        flux * scale,
        fsq * scale,
        fw * scale,
        tr * scale,
    );
    LocalBudget {
        index,
        e,
        eps,
        flux,
        fsq,
        fw,
        tr,
        residual: flux - eps + tr + fw,
    }
}

/// Budgets of every ball of a covering.
pub fn covering_budgets(
    fields: &DensityFields,
    covering: &Covering,
    cert: &SpaceCertificate,
) -> Result<Vec<LocalBudget>> {
    if covering.n() == 0 {
        return Err(CoreError::arg("empty covering"));
    }
    covering
        .centers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let cut = SpaceCutoff::with_certificate(*c, covering.r, cert, fields.grid.l())?;
            Ok(local_budget(fields, &cut, i))
        })
        .collect()
}

/// Arithmetic mean over the balls, `(1/n) sum_i q_i`.
pub fn kk_average(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(CoreError::arg("cannot average over an empty covering"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// `(K1, K2)`-averages at one scale for one covering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleAverage {
    pub r: f64,
    pub covering_id: String,
    pub e: f64,
    pub eps: f64,
    pub flux: f64,
    pub fsq: f64,
    pub fu: f64,
    pub tr: f64,
    /// Mean of the per-ball balance residuals.
    pub residual: f64,
    /// Largest per-ball `|residual|`.
    pub max_abs_residual: f64,
    pub n: usize,
    pub k1: u32,
    pub k2: u32,
}

impl ScaleAverage {
    pub fn from_budgets(
        budgets: &[LocalBudget],
        covering: &Covering,
        covering_id: impl Into<String>,
    ) -> Result<Self> {
        let col = |f: fn(&LocalBudget) -> f64| -> Result<f64> {
            kk_average(&budgets.iter().map(f).collect::<Vec<_>>())
        };
        Ok(Self {
            r: covering.r,
            covering_id: covering_id.into(),
            e: col(|b| b.e)?,
            eps: col(|b| b.eps)?,
            flux: col(|b| b.flux)?,
            fsq: col(|b| b.fsq)?,
            fu: col(|b| b.fw)?,
            tr: col(|b| b.tr)?,
            residual: col(|b| b.residual)?,
            max_abs_residual: budgets.iter().map(|b| b.residual.abs()).fold(0.0, f64::max),
            n: covering.n(),
            k1: covering.k1,
            k2: covering.k2,
        })
    }
}

/// Scale averages for a set of coverings; scales must exceed four grid
/// spacings.
pub fn flux_profile(
    fields: &DensityFields,
    coverings: &[(String, Covering)],
    cert: &SpaceCertificate,
) -> Result<Vec<ScaleAverage>> {
    let min_r = 4.0 * fields.grid.dx();
    coverings
        .iter()
        .map(|(id, c)| {
            if c.r <= min_r {
                return Err(CoreError::arg(format!(
                    "scale {} is under-resolved; it must exceed 4 dx = {min_r}",
                    c.r
                )));
            }
            let b = covering_budgets(fields, c, cert)?;
            ScaleAverage::from_budgets(&b, c, id.clone())
        })
        .collect()
}

/// Profile CSV `R,covering_id,avg_flux,avg_diss,avg_energy,avg_fsq,avg_fu,n,K1,K2`.
pub fn profile_csv(rows: &[ScaleAverage]) -> String {
    let mut s = String::from("R,covering_id,avg_flux,avg_diss,avg_energy,avg_fsq,avg_fu,n,K1,K2\n");
    for r in rows {
        s.push_str(&format!(
            "{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{},{}\n",
            r.r, r.covering_id, r.flux, r.eps, r.e, r.fsq, r.fu, r.n, r.k1, r.k2
        ));
    }
    s
}

/// Densities the positivity sandwich applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    Energy,
    Dissipation,
    ForceSq,
    Flux,
    ForceWork,
}

impl Density {
    pub fn is_nonnegative(self) -> bool {
        matches!(self, Density::Energy | Density::Dissipation | Density::ForceSq)
    }
}

/// Outcome of the chain
/// `Q0/K1 <= (1/n)(R0/R)^3 Q0 <= <Q>_R <= K2 (1/n)(R0/R)^3 Q0 <= K2 Q0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub density: Density,
    pub value: f64,
    pub outer_lo: f64,
    pub inner_lo: f64,
    pub inner_hi: f64,
    pub outer_hi: f64,
    /// `(value - inner_lo) / Q0`.
    pub margin_lo: f64,
    /// `(inner_hi - value) / Q0`.
    pub margin_hi: f64,
    pub pass: bool,
    /// Set when the check does not apply.
    pub skipped: Option<String>,
}

#[allow(clippy::too_many_arguments)]
pub fn positivity_sandwich_check(
    density: Density,
    avg: f64,
    q0: f64,
    n: usize,
    r: f64,
    r0: f64,
    k1: u32,
    k2: u32,
) -> SandwichCheck {
    let ratio = (r0 / r).powi(3) / n as f64;
    let (k1f, k2f) = (k1 as f64, k2 as f64);
    let mut out = SandwichCheck {
        density,
        value: avg,
        outer_lo: q0 / k1f,
        inner_lo: ratio * q0,
        inner_hi: k2f * ratio * q0,
        outer_hi: k2f * q0,
        margin_lo: 0.0,
        margin_hi: 0.0,
        pass: true,
        skipped: None,
    };
    if !density.is_nonnegative() {
        out.skipped = Some(format!("{density:?} is sign-varying; positivity does not apply"));
        return out;
    }
    if q0 < 0.0 || avg < 0.0 {
        out.skipped = Some("negative value for a nonnegative density".into());
        out.pass = false;
        return out;
    }
    let tol = SANDWICH_TOLERANCE * q0.abs().max(avg.abs());
    let chain = [out.outer_lo, out.inner_lo, avg, out.inner_hi, out.outer_hi];
    out.pass = chain.windows(2).all(|w| w[0] <= w[1] + tol);
    if q0 > 0.0 {
        out.margin_lo = (avg - out.inner_lo) / q0;
        out.margin_hi = (out.inner_hi - avg) / q0;
    }
    out
}

/// Sandwich checks of `e`, `eps` and `|f|^2` for one scale average.
pub fn sandwich_checks(avg: &ScaleAverage, globals: &LocalGlobals, r0: f64) -> Vec<SandwichCheck> {
    [
        (Density::Energy, avg.e, globals.e0),
        (Density::Dissipation, avg.eps, globals.eps0),
        (Density::ForceSq, avg.fsq, globals.fsq0),
    ]
    .into_iter()
    .map(|(d, v, q0)| positivity_sandwich_check(d, v, q0, avg.n, avg.r, r0, avg.k1, avg.k2))
    .collect()
}

/// Two-sided bracket on `<Phi>_R` obtained by averaging the local balance
/// and bounding each term with the cutoff and covering properties:
///
/// `(1/n)(R0/R)^3 [eps0 - C0 K2 (1/T + nu/R^2) e0 - sqrt2 K2 F0 e0^(1/2)]
///  <= <Phi>_R <=
///  K2 (1/n)(R0/R)^3 [eps0 + C0 (1/T + nu/R^2) e0 + sqrt2 F0 e0^(1/2)]`.
///
/// With `T >= R^2/nu` the factor `1/T + nu/R^2` is at most `2 nu / R^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxBracket {
    pub lo: f64,
    pub hi: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn flux_bracket(
    globals: &LocalGlobals,
    nu: f64,
    t: f64,
    c0: f64,
    r: f64,
    r0: f64,
    n: usize,
    k2: u32,
) -> FluxBracket {
    let ratio = (r0 / r).powi(3) / n as f64;
    let k2 = k2 as f64;
    let tr = c0 * (1.0 / t + nu / (r * r)) * globals.e0;
    let fw = 2f64.sqrt() * globals.fsq0.max(0.0).sqrt() * globals.e0.sqrt();
    FluxBracket {
        lo: ratio * (globals.eps0 - k2 * tr - k2 * fw),
        hi: k2 * ratio * (globals.eps0 + tr + fw),
    }
}

/// `<(f, u)>_R` with its Cauchy-Schwarz majorant
/// `sqrt2 <|f|^2>_R^(1/2) <e>_R^(1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceWorkAverage {
    pub value: f64,
    pub majorant: f64,
    pub pass: bool,
}

pub fn force_work_average(budgets: &[LocalBudget]) -> Result<ForceWorkAverage> {
    let fu = kk_average(&budgets.iter().map(|b| b.fw).collect::<Vec<_>>())?;
    let fsq = kk_average(&budgets.iter().map(|b| b.fsq).collect::<Vec<_>>())?;
    let e = kk_average(&budgets.iter().map(|b| b.e).collect::<Vec<_>>())?;
    let majorant = 2f64.sqrt() * fsq.max(0.0).sqrt() * e.max(0.0).sqrt();
    Ok(ForceWorkAverage {
        value: fu,
        majorant,
        pass: fu.abs() <= majorant * (1.0 + 1e-12) + 1e-300,
    })
}

/// Global budget of the periodic box from the scalar series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalBudget {
    /// `(1/T R0^3) int eta^delta ||u||^2/2`.
    pub e0: f64,
    /// Energy with the `eta^(2 delta - 1)` weight used by the local averages.
    pub e0_local: f64,
    /// `(1/T R0^3) nu int eta ||grad u||^2`.
    pub eps0_viscous: f64,
    /// `eps0_viscous + max(residual, 0)`.
    pub eps0: f64,
    /// `(1/T R0^3) int eta (B(u, u), u)`.
    pub phi0: f64,
    /// `(1/T R0^3) int eta ||f||^2`.
    pub fsq0: f64,
    /// `sqrt(fsq0)`.
    pub f0: f64,
    /// `(1/T R0^3) int eta (f, u)`.
    pub force_work: f64,
    /// `(1/T R0^3) int eta_t ||u||^2/2`.
    pub transport: f64,
    /// `transport + force_work - eps0_viscous`: the anomalous-dissipation
    /// proxy, zero up to discretization error for resolved runs.
    pub residual: f64,
    /// `(1/T R0^3) int eta^2 ||A^(-1/2) u||^2`.
    pub inv_sq: f64,
    /// `(1/T R0^3) int eta^(2 delta - 1) ||A^(-1/2) u||^2`.
    pub inv_sq_2dm1: f64,
    /// `int eta ||u||^2`, `int eta ||f||^2` and `int eta (f, u)`, unscaled.
    pub eta_u_sq: f64,
    pub eta_f_sq: f64,
    pub eta_fu: f64,
    pub c_eta: f64,
    pub c_eta_delta: f64,
    pub c_eta_sq: f64,
    pub c_eta_2delta_m1: f64,
    pub nodes: usize,
}

/// Composite trapezoid of `w(t) q(row)` over the series.
fn trapezoid(rows: &[SeriesRow], w: impl Fn(f64) -> f64, q: impl Fn(&SeriesRow) -> f64) -> f64 {
    rows.windows(2)
        .map(|p| 0.5 * (p[1].t - p[0].t) * (w(p[0].t) * q(&p[0]) + w(p[1].t) * q(&p[1])))
        .sum()
}

pub fn global_budget(
    series: &[SeriesRow],
    eta: &TimeCutoff,
    nu: f64,
    r0: f64,
) -> Result<GlobalBudget> {
    if series.len() < 2 {
        return Err(CoreError::arg("the series needs at least two rows"));
    }
    let slack = 1e-9 * eta.t;
    let (first, last) = (series[0].t, series[series.len() - 1].t);
    if first > eta.t0 + slack || last < eta.end() - slack {
        return Err(CoreError::arg(format!(
            "series covers [{first}, {last}] but the time cutoff needs [{}, {}]",
            eta.t0,
            eta.end()
        )));
    }
    let pw = |p: f64| {
        move |t: f64| {
            let v = eta.value(t);
            if v > 0.0 {
                v.powf(p)
            } else {
                0.0
            }
        }
    };
    let one = pw(1.0);
    let scale = 1.0 / (eta.t * r0.powi(3));
    let e0 = scale * trapezoid(series, pw(eta.delta), |r| 0.5 * r.u_sq);
    let e0_local = scale * trapezoid(series, pw(2.0 * eta.delta - 1.0), |r| 0.5 * r.u_sq);
    let eps0_viscous = scale * nu * trapezoid(series, one, |r| r.grad_sq);
    let transport = scale * trapezoid(series, |t| eta.derivative(t), |r| 0.5 * r.u_sq);
    let eta_fu = trapezoid(series, one, |r| r.force_work);
    let force_work = scale * eta_fu;
    let residual = transport + force_work - eps0_viscous;
    let eta_f_sq = trapezoid(series, one, |r| r.f_sq);
    let fsq0 = scale * eta_f_sq;
    Ok(GlobalBudget {
        e0,
        e0_local,
        eps0_viscous,
        eps0: eps0_viscous + residual.max(0.0),
        phi0: scale * trapezoid(series, one, |r| r.trilinear),
        fsq0,
        f0: fsq0.max(0.0).sqrt(),
        force_work,
        transport,
        residual,
        inv_sq: scale * trapezoid(series, pw(2.0), |r| r.inv_half_sq),
        inv_sq_2dm1: scale * trapezoid(series, pw(2.0 * eta.delta - 1.0), |r| r.inv_half_sq),
        eta_u_sq: trapezoid(series, one, |r| r.u_sq),
        eta_f_sq,
        eta_fu,
        c_eta: eta.c_eta,
        c_eta_delta: eta.c_eta_delta,
        c_eta_sq: eta.c_eta_sq,
        c_eta_2delta_m1: eta.c_eta_2delta_m1,
        nodes: series.len(),
    })
}

/// Vanishing of the global flux `(B(u, u), u)`, per snapshot and
/// integrated against `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxZeroCheck {
    /// `(1/T R0^3) int eta (B(u, u), u)`.
    pub phi_omega: f64,
    /// `max_j |(B(u_j, u_j), u_j)| / R0^3`.
    pub max_snapshot: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Relative threshold of the global flux check.
pub const FLUX_ZERO_TOLERANCE: f64 = 1e-10;

pub fn global_flux_zero_check(
    series: &[SeriesRow],
    eta: &TimeCutoff,
    r0: f64,
    eps0: f64,
) -> FluxZeroCheck {
    let scale = 1.0 / (eta.t * r0.powi(3));
    let phi_omega = scale * trapezoid(series, |t| eta.value(t), |r| r.trilinear);
    let max_snapshot = series
        .iter()
        .map(|r| r.trilinear.abs() / r0.powi(3))
        .fold(0.0, f64::max);
    let threshold = FLUX_ZERO_TOLERANCE * eps0.max(f64::MIN_POSITIVE);
    FluxZeroCheck {
        phi_omega,
        max_snapshot,
        threshold,
        pass: phi_omega.abs() <= threshold && max_snapshot <= threshold,
    }
}

/// Pairings `(q, Psi_m)` of a density with the eight partition-of-unity
/// members and the relative defect of their sum against `(q, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPairing {
    pub pairings: Vec<f64>,
    pub total: f64,
    pub relative_defect: f64,
}

pub fn partition_pairing(grid: &Grid, density: &[f64]) -> Result<PartitionPairing> {
    grid.check_len(density.len(), grid.physical_len(), "density")?;
    let pou = PartitionOfUnity::new(grid.l())?;
    let members = pou.on_grid(grid);
    let dv = grid.cell_volume();
    let pairings: Vec<f64> = members
        .iter()
        .map(|m| m.iter().zip(density).map(|(a, b)| a * b).sum::<f64>() * dv)
        .collect();
    let total = density.iter().sum::<f64>() * dv;
    let sum: f64 = pairings.iter().sum();
    let scale = density.iter().map(|x| x.abs()).sum::<f64>() * dv;
    Ok(PartitionPairing {
        relative_defect: if scale > 0.0 { (sum - total).abs() / scale } else { 0.0 },
        pairings,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values_average_to_themselves() {
        assert_eq!(kk_average(&[2.5, 2.5, 2.5]).unwrap(), 2.5);
        assert!(kk_average(&[]).is_err());
    }

    #[test]
    fn flux_check_is_skipped_for_sign_varying_density() {
        let c = positivity_sandwich_check(Density::Flux, -1.0, 1.0, 8, 0.5, 1.0, 2, 8);
        assert!(c.skipped.is_some());
        assert!(c.pass);
    }

    #[test]
    fn zero_density_passes() {
        let c = positivity_sandwich_check(Density::Energy, 0.0, 0.0, 8, 0.5, 1.0, 2, 8);
        assert!(c.pass && c.skipped.is_none());
    }

    #[test]
    fn sandwich_brackets_follow_counts() {
        // n = 16 balls at R = R0/2: inner factor 8/16.
        let c = positivity_sandwich_check(Density::Dissipation, 1.0, 1.0, 16, 0.5, 1.0, 2, 4);
        assert_eq!(c.inner_lo, 0.5);
        assert_eq!(c.inner_hi, 2.0);
        assert!(c.pass);
        let c = positivity_sandwich_check(Density::Dissipation, 2.5, 1.0, 16, 0.5, 1.0, 2, 4);
        assert!(!c.pass);
    }
}
