//! Characteristic scales, adimensional numbers and the theorem evaluators.
//!
//! Every evaluator is a pure function of already-computed budgets. A
//! hypothesis `lhs <= rhs` carries the margin
//! `(rhs - lhs) / max(|lhs|, |rhs|)`, positive when it holds.

use serde::{Deserialize, Serialize};

use crate::budget::{GlobalBudget, ScaleAverage};
use crate::error::{CoreError, Result};
use crate::solver::ForceNorms;

const SQRT2: f64 = std::f64::consts::SQRT_2;
const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub margin: f64,
}

impl Hypothesis {
    /// `lhs <= rhs`.
    pub fn le(id: &str, lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        Self {
            id: id.to_string(),
            lhs,
            rhs,
            pass: lhs <= rhs,
            margin: if scale > 0.0 { (rhs - lhs) / scale } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Hypotheses hold and every conclusion was confirmed.
    Verified,
    /// Hypotheses hold but a conclusion failed.
    Violated,
    /// Some hypothesis fails; conclusions were not asserted.
    HypothesesNotMet,
    /// Preconditions of the check itself are missing.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Conclusion {
    pub bracket: Option<[f64; 2]>,
    pub range: Option<[f64; 2]>,
    pub violations: Vec<String>,
    /// Named inequalities asserted by the conclusion.
    pub checks: Vec<Hypothesis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremRecord {
    pub name: String,
    pub status: Status,
    pub hypotheses: Vec<Hypothesis>,
    pub conclusion: Conclusion,
    pub notes: Vec<String>,
}

impl TheoremRecord {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            status: Status::NotApplicable,
            hypotheses: Vec::new(),
            conclusion: Conclusion::default(),
            notes: Vec::new(),
        }
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.pass)
    }

    /// Sets the status from the hypotheses and the conclusion checks.
    fn settle(&mut self) {
        self.status = if !self.hypotheses_hold() {
            Status::HypothesesNotMet
        } else if self.conclusion.violations.is_empty()
            && self.conclusion.checks.iter().all(|c| c.pass)
        {
            Status::Verified
        } else {
            Status::Violated
        };
    }
}

/// `tau0 = (nu e0 / eps0)^(1/2)`.
pub fn taylor_scale(e0: f64, eps0: f64, nu: f64) -> Result<f64> {
    if !(eps0 > 0.0) {
        return Err(CoreError::arg("the Taylor scale needs a positive dissipation"));
    }
    Ok((nu * e0 / eps0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauScales {
    /// `[(1/T R0^3) int eta^2 ||A^(-1/2) u||^2 / e0]^(1/2)`.
    pub tau_m1: f64,
    /// Same with the `eta^(2 delta - 1)` weight.
    pub tau_m1_tilde: f64,
    pub tau0: f64,
    /// `tau_m1 <= tau_m1_tilde`.
    pub ordered: bool,
    /// `tau_m1_tilde >= 2 tau0`.
    pub lemma_holds: bool,
}

/// Relative slack for the discrete versions of exact inequalities.
pub const EXACT_SLACK: f64 = 1e-12;

pub fn tau_scales(gb: &GlobalBudget, nu: f64) -> Result<TauScales> {
    if !(gb.e0 > 0.0) {
        return Err(CoreError::arg("tau scales need a positive energy"));
    }
    let tau_m1 = (gb.inv_sq / gb.e0).sqrt();
    let tau_m1_tilde = (gb.inv_sq_2dm1 / gb.e0).sqrt();
    let tau0 = taylor_scale(gb.e0, gb.eps0, nu)?;
    Ok(TauScales {
        tau_m1,
        tau_m1_tilde,
        tau0,
        ordered: tau_m1 <= tau_m1_tilde * (1.0 + EXACT_SLACK),
        lemma_holds: tau_m1_tilde >= 2.0 * tau0 * (1.0 - EXACT_SLACK),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adimensional {
    /// `(|f|^2_0)^(1/2) / (nu^2 R0^-3)`.
    pub gr_local: f64,
    /// `||f|| / (nu^2 R0^(-3/2))`.
    pub gr_periodic: f64,
    /// `e0^(1/2) / (nu R0^-1)`.
    pub re: f64,
}

pub fn adimensional_numbers(e0: f64, fsq0: f64, f_norm: f64, nu: f64, r0: f64) -> Adimensional {
    Adimensional {
        gr_local: fsq0.max(0.0).sqrt() * r0.powi(3) / (nu * nu),
        gr_periodic: f_norm * r0.powf(1.5) / (nu * nu),
        re: e0.max(0.0).sqrt() * r0 / nu,
    }
}

/// Inputs of the first cascade theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Inputs {
    pub e0: f64,
    pub eps0: f64,
    pub f0: f64,
    pub nu: f64,
    pub r0: f64,
    pub t: f64,
    pub c0: f64,
    pub k1: f64,
    pub k2: f64,
}

/// `alpha0 = sqrt8 K2`, `beta0 = 8 C0 K2`; hypotheses
/// `alpha0 F0 e0^(1/2) <= eps0` and `beta0 nu e0 / R0^2 <= eps0` (with
/// `T >= R0^2/nu`); conclusion `eps0/(4 K1) <= <Phi>_R <= 9 K2 eps0 / 4`
/// on `[sqrt(beta0) tau0, R0]`.
pub fn theorem1_check(inp: &Theorem1Inputs, profile: &[ScaleAverage]) -> TheoremRecord {
    let mut rec = TheoremRecord::new("cascade");
    let alpha0 = 8f64.sqrt() * inp.k2;
    let beta0 = 8.0 * inp.c0 * inp.k2;
    rec.hypotheses.push(Hypothesis::le("T", inp.r0 * inp.r0 / inp.nu, inp.t));
    rec.hypotheses
        .push(Hypothesis::le("a", alpha0 * inp.f0 * inp.e0.max(0.0).sqrt(), inp.eps0));
    rec.hypotheses
        .push(Hypothesis::le("b", beta0 * inp.nu * inp.e0 / (inp.r0 * inp.r0), inp.eps0));
    rec.notes.push(format!("alpha0 = {alpha0}, beta0 = {beta0}"));
    if rec.hypotheses_hold() {
        match taylor_scale(inp.e0, inp.eps0, inp.nu) {
            Ok(tau0) => {
                let range = [beta0.sqrt() * tau0, inp.r0];
                let bracket = [inp.eps0 / (4.0 * inp.k1), 9.0 * inp.k2 * inp.eps0 / 4.0];
                rec.conclusion.violations = bracket_violations(profile, range, bracket);
                rec.conclusion.range = Some(range);
                rec.conclusion.bracket = Some(bracket);
            }
            Err(e) => rec.notes.push(e.to_string()),
        }
    }
    rec.settle();
    rec
}

fn bracket_violations(profile: &[ScaleAverage], range: [f64; 2], b: [f64; 2]) -> Vec<String> {
    let tol = 1e-12 * (range[1].abs());
    profile
        .iter()
        .filter(|row| row.r >= range[0] - tol && row.r <= range[1] + tol)
        .filter(|row| !(row.flux >= b[0] && row.flux <= b[1]))
        .map(|row| format!("R = {}, covering {}: flux {} outside [{}, {}]", row.r, row.covering_id, row.flux, b[0], b[1]))
        .collect()
}

/// `eps0 <= 2 sqrt2 ||f|| e0^(1/2) / R0^(3/2)`, asserted on the weak
/// attractor with `T >= (2 C0 / pi^2) R0^2 / nu`.
#[allow(clippy::too_many_arguments)]
pub fn theorem2_check(
    e0: f64,
    eps0: f64,
    f_norm: f64,
    nu: f64,
    r0: f64,
    t: f64,
    c0: f64,
    on_attractor: bool,
) -> TheoremRecord {
    let mut rec = TheoremRecord::new("energy_dissipation_bound");
    if !(f_norm > 0.0) {
        rec.notes.push("unforced flow: the bound degenerates".into());
        return rec;
    }
    if !on_attractor {
        rec.notes
            .push("attractor bound not certified for the statistics window".into());
        return rec;
    }
    let horizon = Hypothesis::le("T", 2.0 * c0 / PI2 * r0 * r0 / nu, t);
    if !horizon.pass {
        rec.notes.push("horizon shorter than (2 C0/pi^2) R0^2/nu".into());
        rec.hypotheses.push(horizon);
        return rec;
    }
    rec.hypotheses.push(horizon);
    rec.conclusion.checks.push(Hypothesis::le(
        "eps0_bound",
        eps0,
        2.0 * 2f64.sqrt() * f_norm * e0.max(0.0).sqrt() / r0.powf(1.5),
    ));
    rec.settle();
    rec
}

/// Hypothesis `||f|| >= sigma_f`; conclusion `e0 >= theta_f ||f|| / R0^(1/2)`.
pub fn theorem3_check(
    norms: &ForceNorms,
    sigma_f: f64,
    theta_f: f64,
    e0: f64,
    r0: f64,
) -> Result<TheoremRecord> {
    if !(norms.norm_half.is_finite() && norms.norm_half > 0.0) {
        return Err(CoreError::arg("the energy lower bound needs ||A^(1/2) f|| < infinity"));
    }
    let mut rec = TheoremRecord::new("energy_lower_bound");
    rec.hypotheses.push(Hypothesis::le("force_size", sigma_f, norms.norm));
    if rec.hypotheses_hold() {
        rec.conclusion.checks.push(Hypothesis::le(
            "e0_lower",
            theta_f * norms.norm / r0.sqrt(),
            e0,
        ));
    }
    rec.settle();
    Ok(rec)
}

/// One-sided Kolmogorov bounds: `eps0 <= 2 sqrt2 ||f|| e0^(1/2)/R0^(3/2)`,
/// `e0 >= theta_f ||f|| / R0^(1/2)` and `eps0 <= (2 sqrt2/theta_f) e0^(3/2)/R0`
/// under `||f|| >= sigma_f`, `T >= (2 C0/pi^2) R0^2/nu` and the attractor bound.
#[allow(clippy::too_many_arguments)]
pub fn apriori_bounds_check(
    e0: f64,
    eps0: f64,
    f_norm: f64,
    sigma_f: f64,
    theta_f: f64,
    nu: f64,
    r0: f64,
    t: f64,
    c0: f64,
    on_attractor: bool,
) -> TheoremRecord {
    let mut rec = TheoremRecord::new("apriori_bounds");
    if !on_attractor {
        rec.notes
            .push("attractor bound not certified for the statistics window".into());
        return rec;
    }
    rec.hypotheses.push(Hypothesis::le("force_size", sigma_f, f_norm));
    rec.hypotheses.push(Hypothesis::le("T", 2.0 * c0 / PI2 * r0 * r0 / nu, t));
    let c = &mut rec.conclusion.checks;
    c.push(Hypothesis::le(
        "dissipation_vs_force",
        eps0,
        2.0 * SQRT2 * f_norm * e0.max(0.0).sqrt() / r0.powf(1.5),
    ));
    c.push(Hypothesis::le("energy_lower", theta_f * f_norm / r0.sqrt(), e0));
    c.push(Hypothesis::le(
        "kolmogorov_upper",
        eps0,
        2.0 * SQRT2 / theta_f * e0.max(0.0).powf(1.5) / r0,
    ));
    rec.settle();
    rec
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    /// `eps0 R0 / e0^(3/2)`.
    pub k_meas: f64,
    pub threshold: f64,
    /// `2 sqrt2 / theta_f`.
    pub upper: f64,
    pub saturated: bool,
    pub upper_ok: bool,
}

/// Default saturation threshold as a fraction of `2 sqrt2 / theta_f`.
pub const SATURATION_FRACTION: f64 = 0.1;

pub fn kolmogorov_saturation(
    e0: f64,
    eps0: f64,
    theta_f: f64,
    r0: f64,
    threshold: Option<f64>,
) -> Saturation {
    let upper = 2.0 * SQRT2 / theta_f;
    let k_meas = if e0 > 0.0 && eps0 > 0.0 {
        eps0 * r0 / e0.powf(1.5)
    } else {
        0.0
    };
    let threshold = threshold.unwrap_or(SATURATION_FRACTION * upper);
    Saturation {
        k_meas,
        threshold,
        upper,
        saturated: k_meas > 0.0 && k_meas >= threshold && k_meas <= upper,
        upper_ok: k_meas <= upper * (1.0 + EXACT_SLACK),
    }
}

/// One member of a Grashof sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRun {
    pub gr: f64,
    pub e0: f64,
    pub eps0: f64,
    pub f_norm: f64,
    pub theta_f: f64,
    pub r0: f64,
    pub k_meas: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero with exactly two points.
    pub slope_stderr: f64,
    pub points: usize,
}

/// Least-squares line through `(x, y)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(CoreError::arg("a line fit needs at least two paired points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(CoreError::arg("a line fit needs distinct abscissae"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if x.len() > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit {
        slope,
        intercept,
        slope_stderr: stderr,
        points: x.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub k: f64,
    /// Per included run: the three two-sided brackets.
    pub brackets: Vec<Vec<Hypothesis>>,
    pub included: Vec<usize>,
    pub energy_slope: Option<SlopeFit>,
    pub dissipation_slope: Option<SlopeFit>,
    pub pass: bool,
}

/// Expected log-log slopes of `e0` and `eps0` against the Grashof number.
pub const EXPECTED_SLOPES: (f64, f64) = (1.0, 1.5);

/// Brackets implied by `K e0^(3/2)/R0 <= eps0` and the one-sided bounds,
/// for every run with `k_meas >= K`, plus log-log slope fits over them.
pub fn scaling_check(runs: &[ScalingRun], k: f64) -> ScalingRecord {
    let mut brackets = Vec::new();
    let mut included = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        if !(r.k_meas >= k) {
            continue;
        }
        included.push(i);
        let th = r.theta_f;
        let drive = r.f_norm / r0_pow(r.r0, 1.5) * r.e0.max(0.0).sqrt();
        let e_scale = r.f_norm / r.r0.sqrt();
        let d_scale = r.f_norm.powf(1.5) / r.r0.powf(1.75);
        brackets.push(vec![
            Hypothesis::le("dissipation_lower", k.powf(1.5) * th.powf(1.5) / 8f64.powf(0.25) * drive, r.eps0),
            Hypothesis::le("dissipation_upper", r.eps0, 2.0 * SQRT2 * drive),
            Hypothesis::le("energy_lower", th * e_scale, r.e0),
            Hypothesis::le("energy_upper", r.e0, 2.0 * SQRT2 / k * e_scale),
            Hypothesis::le("dissipation_force_lower", k * th.powf(1.5) * d_scale, r.eps0),
            Hypothesis::le(
                "dissipation_force_upper",
                r.eps0,
                8f64.powf(1.25) / (k.powf(1.5) * th) * d_scale,
            ),
        ]);
    }
    let fit = |f: fn(&ScalingRun) -> f64| -> Option<SlopeFit> {
        if included.len() < 3 {
            return None;
        }
        let x: Vec<f64> = included.iter().map(|&i| runs[i].gr.ln()).collect();
        let y: Vec<f64> = included.iter().map(|&i| f(&runs[i]).ln()).collect();
        fit_line(&x, &y).ok()
    };
    let energy_slope = fit(|r| r.e0);
    let dissipation_slope = fit(|r| r.eps0);
    let pass = brackets.iter().flatten().all(|h| h.pass);
    ScalingRecord {
        k,
        brackets,
        included,
        energy_slope,
        dissipation_slope,
        pass,
    }
}

#[inline]
fn r0_pow(r0: f64, p: f64) -> f64 {
    r0.powf(p)
}

/// `int eta (f, u) / [(int eta ||f||^2)(int eta ||u||^2)]^(1/2)`.
pub fn alignment_ratio(gb: &GlobalBudget) -> f64 {
    let d = (gb.eta_f_sq * gb.eta_u_sq).sqrt();
    if d > 0.0 {
        gb.eta_fu / d
    } else {
        0.0
    }
}

/// Inputs of the periodic-box cascade theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem6Inputs {
    pub e0: f64,
    pub eps0: f64,
    pub f_norm: f64,
    pub theta_f: f64,
    pub tau_m1: f64,
    pub tau_f: f64,
    pub nu: f64,
    pub r0: f64,
    pub t: f64,
    /// Kolmogorov saturation constant, in `(0, 2^(3/2))`.
    pub c: f64,
    /// Free margin parameter in `(0, 1)`.
    pub alpha_margin: f64,
    pub c0: f64,
    pub k1: f64,
    pub k2: f64,
}

/// `beta0 = (2 C0 K2 / alpha_margin)^(1/2)`.
pub fn theorem6_beta0(c0: f64, k2: f64, alpha_margin: f64) -> f64 {
    (2.0 * c0 * k2 / alpha_margin).sqrt()
}

/// `2^3 C0^2 K2^2 / (C^4 alpha^2) theta_f nu^2 / R0^(3/2)`.
pub fn theorem6_force_threshold(inp: &Theorem6Inputs) -> f64 {
    8.0 * inp.c0.powi(2) * inp.k2.powi(2) / (inp.c.powi(4) * inp.alpha_margin.powi(2))
        * inp.theta_f
        * inp.nu
        * inp.nu
        / inp.r0.powf(1.5)
}

pub fn theorem6_check(inp: &Theorem6Inputs, profile: &[ScaleAverage]) -> TheoremRecord {
    let mut rec = TheoremRecord::new("periodic_cascade");
    rec.notes
        .push("suitable and Leray-Hopf: assumed by regularity of the discrete solution".into());
    if !(inp.c > 0.0 && inp.c < 2f64.powf(1.5)) || !(inp.alpha_margin > 0.0 && inp.alpha_margin < 1.0) {
        rec.notes
            .push("C must lie in (0, 2^(3/2)) and alpha_margin in (0, 1)".into());
        return rec;
    }
    let c = inp.c;
    let a = inp.alpha_margin;
    rec.hypotheses
        .push(Hypothesis::le("force_size", theorem6_force_threshold(inp), inp.f_norm));
    rec.hypotheses.push(Hypothesis::le(
        "T",
        2f64.powf(13.0 / 4.0) * inp.c0 / (PI2 * c.powf(1.5)) * inp.r0 * inp.r0 / inp.nu,
        inp.t,
    ));
    rec.hypotheses.push(Hypothesis::le(
        "saturation",
        c / inp.theta_f * inp.e0.max(0.0).powf(1.5) / inp.r0,
        inp.eps0,
    ));
    rec.hypotheses.push(Hypothesis::le(
        "force_scale",
        2f64.powf(11.0 / 4.0) * inp.k2 / (a * c.powf(1.5)) * inp.tau_m1,
        inp.tau_f,
    ));
    if rec.hypotheses_hold() {
        match taylor_scale(inp.e0, inp.eps0, inp.nu) {
            Ok(tau0) => {
                let beta0 = theorem6_beta0(inp.c0, inp.k2, a);
                let range = [beta0 * tau0, inp.r0];
                let bracket = [(1.0 - a) * inp.eps0 / inp.k1, inp.k2 * (1.0 + a) * inp.eps0];
                rec.conclusion.violations = bracket_violations(profile, range, bracket);
                rec.conclusion.range = Some(range);
                rec.conclusion.bracket = Some(bracket);
                let s = inp.theta_f.sqrt() * inp.nu * inp.r0.powf(1.25) / inp.f_norm.sqrt();
                rec.conclusion.checks.push(Hypothesis::le(
                    "taylor_lower",
                    c.powf(1.5) / 2f64.powf(15.0 / 4.0) * s,
                    tau0 * tau0,
                ));
                rec.conclusion.checks.push(Hypothesis::le(
                    "taylor_upper",
                    tau0 * tau0,
                    2f64.powf(1.5) / (c * c) * s,
                ));
            }
            Err(e) => rec.notes.push(e.to_string()),
        }
    }
    rec.settle();
    rec
}

/// Default Kolmogorov constant for the periodic cascade theorem:
/// `K_meas theta_f` clamped into `(0, 2^(3/2))`.
pub fn default_saturation_constant(k_meas: f64, theta_f: f64) -> f64 {
    let hi = 2f64.powf(1.5) * (1.0 - 1e-9);
    (k_meas * theta_f).clamp(1e-12, hi)
}

/// Scales at which every covering's average flux lies in `bracket`,
/// returned as the longest contiguous run of sampled scales (by count,
/// then by log-extent, ties toward larger `R`).
pub fn inertial_range_detect(profile: &[ScaleAverage], bracket: [f64; 2]) -> Option<(f64, f64)> {
    let mut scales: Vec<f64> = profile.iter().map(|r| r.r).collect();
    scales.sort_by(|a, b| a.partial_cmp(b).expect("finite scales"));
    scales.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let inside: Vec<bool> = scales
        .iter()
        .map(|&s| {
            profile
                .iter()
                .filter(|r| (r.r - s).abs() <= 1e-12 * s.abs())
                .all(|r| r.flux >= bracket[0] && r.flux <= bracket[1])
        })
        .collect();
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < scales.len() {
        if !inside[i] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < scales.len() && inside[j + 1] {
            j += 1;
        }
        let better = match best {
            None => true,
            Some((a, b)) => {
                let (len_new, len_old) = (j - i, b - a);
                let ext_new = (scales[j] / scales[i]).ln();
                let ext_old = (scales[b] / scales[a]).ln();
                len_new > len_old
                    || (len_new == len_old && ext_new > ext_old * (1.0 + 1e-12))
                    || (len_new == len_old && (ext_new - ext_old).abs() <= 1e-12 * ext_old.abs().max(1e-300) && scales[j] > scales[b])
            }
        };
        if better {
            best = Some((i, j));
        }
        i = j + 1;
    }
    best.map(|(a, b)| (scales[a], scales[b]))
}

/// Summary of every diagnostic for one analyzed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub tau0: f64,
    pub tau_m1: f64,
    pub tau_m1_tilde: f64,
    pub tau_f: Option<f64>,
    pub gr_local: f64,
    pub gr_periodic: f64,
    pub re: f64,
    pub k_meas: f64,
    pub alignment: f64,
    pub theorems: Vec<TheoremRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_scale_formula() {
        assert_eq!(taylor_scale(2.0, 8.0, 1.0).unwrap(), 0.5);
        assert!(taylor_scale(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn unit_grashof() {
        let a = adimensional_numbers(1.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(a.gr_periodic, 1.0);
        let b = adimensional_numbers(1.0, 1.0, 1.0, 2.0, 1.0);
        assert_eq!(b.gr_periodic, 0.25);
    }

    #[test]
    fn line_fit_recovers_slope() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 1.5 * v - 2.0).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-12);
    }
}
