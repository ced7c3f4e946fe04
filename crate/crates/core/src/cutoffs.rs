//! Refined space and time cutoffs and the periodic partition of unity.
//!
//! Both cutoffs are powers of the quintic smoothstep transition
//! `S(s) = 6 s^5 - 15 s^4 + 10 s^3`. The space profile is
//! `psi(x) = chi(|x - x_i| / R)^m` with `chi = 1` on `[0, 1]`,
//! `chi = 1 - S(r - 1)` on `[1, 2]` and `0` beyond, where
//! `m = ceil(1 / (1 - delta))`. With that exponent the ratios
//! `R |grad psi| / psi^delta` and `R^2 |Laplace psi| / psi^(2 delta - 1)`
//! stay bounded down to the edge of the support.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::Grid;

/// Exponent used when none is configured.
pub const DEFAULT_DELTA: f64 = 0.75;

/// Base number of normalized-radius samples across `[0, 2]`.
const BASE_SAMPLES: usize = 512;
/// Oversampling factor applied to the base samples during certification.
pub const CERTIFY_OVERSAMPLING: usize = 4;

#[inline]
pub fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }
}

#[inline]
pub fn smoothstep_d1(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        30.0 * s * s * (1.0 - s) * (1.0 - s)
    }
}

#[inline]
pub fn smoothstep_d2(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
    }
}

/// Largest slope of the smoothstep, attained at `s = 1/2`.
pub const SMOOTHSTEP_MAX_SLOPE: f64 = 15.0 / 8.0;

/// Profile exponent `m = ceil(1 / (1 - delta))`.
pub fn profile_exponent(delta: f64) -> Result<u32> {
    check_delta(delta)?;
    let x = 1.0 / (1.0 - delta);
    // Guard against 1/(1 - 0.75) landing a hair above an integer.
    Ok((x - 1e-12).ceil() as u32)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.5 && delta < 1.0) {
        return Err(CoreError::arg(format!(
            "delta must lie in (1/2, 1), got {delta}"
        )));
    }
    Ok(())
}

/// `chi` and its first two derivatives at normalized radius `r`.
#[inline]
fn chi(r: f64) -> (f64, f64, f64) {
    if r <= 1.0 {
        (1.0, 0.0, 0.0)
    } else if r >= 2.0 {
        (0.0, 0.0, 0.0)
    } else {
        let s = r - 1.0;
        (1.0 - smoothstep(s), -smoothstep_d1(s), -smoothstep_d2(s))
    }
}

/// Radial profile `g(r) = chi(r)^m` in the normalized radius `r = d / R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub delta: f64,
    pub m: u32,
}

impl RadialProfile {
    pub fn new(delta: f64) -> Result<Self> {
        Ok(Self {
            delta,
            m: profile_exponent(delta)?,
        })
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        chi(r).0.powi(self.m as i32)
    }

    /// `(g, g', g'')` at normalized radius `r`.
    #[inline]
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let (c, c1, c2) = chi(r);
        if c1 == 0.0 && c2 == 0.0 {
            return (c.powi(self.m as i32), 0.0, 0.0);
        }
        let m = self.m as i32;
        let mf = self.m as f64;
        let g = c.powi(m);
        let g1 = mf * c.powi(m - 1) * c1;
        let g2 = mf * (mf - 1.0) * c.powi(m - 2) * c1 * c1 + mf * c.powi(m - 1) * c2;
        (g, g1, g2)
    }

    /// `|g'| / g^delta`, zero outside the transition.
    pub fn gradient_ratio(&self, r: f64) -> f64 {
        let (c, c1, _) = chi(r);
        if c1 == 0.0 || c == 0.0 {
            return 0.0;
        }
        let mf = self.m as f64;
        mf * c1.abs() * c.powf(mf - 1.0 - mf * self.delta)
    }

    /// `|g'' + (dim - 1) g' / r| / g^(2 delta - 1)` for the radial Laplacian
    /// in `dim` dimensions.
    pub fn laplacian_ratio(&self, r: f64, dim: u32) -> f64 {
        let (c, c1, c2) = chi(r);
        if (c1 == 0.0 && c2 == 0.0) || c == 0.0 {
            return 0.0;
        }
        let mf = self.m as f64;
        let p = mf - 2.0 - mf * (2.0 * self.delta - 1.0);
        let inner = (mf - 1.0) * c1 * c1 + c * (c2 + (dim as f64 - 1.0) * c1 / r);
        mf * c.powf(p) * inner.abs()
    }

    /// Certified bounds `(C0_grad, C0_lap)` in `dim` dimensions from
    /// oversampled normalized-radius samples followed by local refinement
    /// around the sampled maxima.
    pub fn certify(&self, dim: u32, oversampling: usize) -> (f64, f64) {
        let samples = BASE_SAMPLES * oversampling.max(1);
        let grad = certify_sup(|r| self.gradient_ratio(r), 1.0, 2.0, samples / 2);
        let lap = certify_sup(|r| self.laplacian_ratio(r, dim), 1.0, 2.0, samples / 2);
        (grad, lap)
    }
}

/// Supremum of `f` on `[a, b]`: dense sampling, then a golden-section
/// search in the bracket around every local maximum of the samples.
pub(crate) fn certify_sup(f: impl Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> f64 {
    let h = (b - a) / samples as f64;
    let vals: Vec<f64> = (0..=samples).map(|j| f(a + j as f64 * h)).collect();
    let mut best = vals.iter().cloned().fold(0.0, f64::max);
    for j in 1..samples {
        if vals[j] >= vals[j - 1] && vals[j] >= vals[j + 1] && vals[j] > 0.0 {
            let lo = a + (j - 1) as f64 * h;
            let hi = a + (j + 1) as f64 * h;
            best = best.max(golden_max(&f, lo, hi));
        }
    }
    best
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = f(d);
        }
    }
    fc.max(fd).max(f(0.5 * (lo + hi)))
}

/// Refined space cutoff attached to the ball `B(center, R)` on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceCutoff {
    pub center: [f64; 3],
    pub r: f64,
    pub profile: RadialProfile,
    /// Certified `sup R |grad psi| / psi^delta`.
    pub c0_grad: f64,
    /// Certified `sup R^2 |Laplace psi| / psi^(2 delta - 1)`.
    pub c0_lap: f64,
}

/// Certified constants shared by every space cutoff with the same `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceCertificate {
    pub delta: f64,
    pub m: u32,
    pub c0_grad: f64,
    pub c0_lap: f64,
}

impl SpaceCertificate {
    pub fn new(delta: f64) -> Result<Self> {
        Self::with_oversampling(delta, CERTIFY_OVERSAMPLING)
    }

    pub fn with_oversampling(delta: f64, oversampling: usize) -> Result<Self> {
        let profile = RadialProfile::new(delta)?;
        let (g, l) = profile.certify(3, oversampling);
        Ok(Self {
            delta,
            m: profile.m,
            c0_grad: g,
            c0_lap: l,
        })
    }

    pub fn c0(&self) -> f64 {
        self.c0_grad.max(self.c0_lap)
    }

    pub fn profile(&self) -> RadialProfile {
        RadialProfile {
            delta: self.delta,
            m: self.m,
        }
    }
}

/// Pointwise values of a space cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSample {
    pub value: f64,
    pub gradient: [f64; 3],
    pub laplacian: f64,
}

impl SpaceCutoff {
    pub fn new(center: [f64; 3], r: f64, delta: f64, l: f64) -> Result<Self> {
        Self::with_certificate(center, r, &SpaceCertificate::new(delta)?, l)
    }

    /// Builds a cutoff reusing constants certified once for its `delta`.
    pub fn with_certificate(
        center: [f64; 3],
        r: f64,
        cert: &SpaceCertificate,
        l: f64,
    ) -> Result<Self> {
        if !(r > 0.0 && r <= l / 4.0 * (1.0 + 1e-12)) {
            return Err(CoreError::arg(format!(
                "cutoff radius must lie in (0, L/4 = {}], got {r}",
                l / 4.0
            )));
        }
        Ok(Self {
            center,
            r,
            profile: cert.profile(),
            c0_grad: cert.c0_grad,
            c0_lap: cert.c0_lap,
        })
    }

    pub fn c0(&self) -> f64 {
        self.c0_grad.max(self.c0_lap)
    }

    /// Evaluates the cutoff at a minimum-image displacement `d = x - x_i`.
    #[inline]
    pub fn sample_displacement(&self, d: [f64; 3]) -> CutoffSample {
        let rho = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let r = rho / self.r;
        let (g, g1, g2) = self.profile.eval(r);
        if g1 == 0.0 && g2 == 0.0 {
            return CutoffSample {
                value: g,
                gradient: [0.0; 3],
                laplacian: 0.0,
            };
        }
        let s = g1 / (self.r * rho);
        CutoffSample {
            value: g,
            gradient: [s * d[0], s * d[1], s * d[2]],
            laplacian: (g2 + 2.0 * g1 / r) / (self.r * self.r),
        }
    }

    pub fn sample(&self, grid: &Grid, x: [f64; 3]) -> CutoffSample {
        let d = [
            grid.periodic_delta(x[0] - self.center[0]),
            grid.periodic_delta(x[1] - self.center[1]),
            grid.periodic_delta(x[2] - self.center[2]),
        ];
        self.sample_displacement(d)
    }

    pub fn value(&self, grid: &Grid, x: [f64; 3]) -> f64 {
        self.sample(grid, x).value
    }

    /// Visits every grid point inside the support with its flat index and
    /// minimum-image displacement from the center.
    pub fn for_each_support_point(&self, grid: &Grid, mut f: impl FnMut(usize, [f64; 3])) {
        let axes: Vec<Vec<(usize, f64)>> = (0..3)
            .map(|a| support_axis(grid, self.center[a], 2.0 * self.r))
            .collect();
        let n = grid.n();
        let r2 = (2.0 * self.r) * (2.0 * self.r);
        for &(iz, dz) in &axes[2] {
            for &(iy, dy) in &axes[1] {
                let dyz = dy * dy + dz * dz;
                if dyz >= r2 {
                    continue;
                }
                let base = n * (iy + n * iz);
                for &(ix, dx) in &axes[0] {
                    if dx * dx + dyz < r2 {
                        f(base + ix, [dx, dy, dz]);
                    }
                }
            }
        }
    }
}

/// Grid indices along one axis within `reach` of `c`, each listed once,
/// with their signed displacement. Falls back to minimum-image over the
/// full axis when the window wraps the period.
pub(crate) fn support_axis(grid: &Grid, c: f64, reach: f64) -> Vec<(usize, f64)> {
    let n = grid.n() as i64;
    let h = grid.dx();
    let lo = ((c - reach) / h).floor() as i64;
    let hi = ((c + reach) / h).ceil() as i64;
    if hi - lo + 1 >= n {
        return (0..n as usize)
            .map(|j| (j, grid.periodic_delta(j as f64 * h - c)))
            .collect();
    }
    (lo..=hi)
        .map(|j| (j.rem_euclid(n) as usize, j as f64 * h - c))
        .collect()
}

/// Refined time cutoff on `[t0, t0 + T]`: smoothstep ramps of width
/// `rho T` raised to the power `m`, equal to 1 in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeCutoff {
    pub t0: f64,
    pub t: f64,
    pub delta: f64,
    pub rho: f64,
    pub m: u32,
    /// Certified `sup T |eta'| / eta^delta`.
    pub c0: f64,
    /// `(1/T) int eta`.
    pub c_eta: f64,
    /// `(1/T) int eta^delta`.
    pub c_eta_delta: f64,
    /// `(1/T) int eta^2`.
    pub c_eta_sq: f64,
    /// `(1/T) int eta^(2 delta - 1)`.
    pub c_eta_2delta_m1: f64,
}

/// Default moment quadrature panels.
pub const MOMENT_PANELS: usize = 20_000;

impl TimeCutoff {
    pub fn new(t: f64, delta: f64, rho: f64) -> Result<Self> {
        Self::starting_at(0.0, t, delta, rho)
    }

    pub fn starting_at(t0: f64, t: f64, delta: f64, rho: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CoreError::arg(format!("horizon must be positive, got {t}")));
        }
        if !(rho > 0.0 && rho <= 0.5) {
            return Err(CoreError::arg(format!(
                "ramp fraction must lie in (0, 1/2], got {rho}"
            )));
        }
        let m = profile_exponent(delta)?;
        let mut out = Self {
            t0,
            t,
            delta,
            rho,
            m,
            c0: 0.0,
            c_eta: 0.0,
            c_eta_delta: 0.0,
            c_eta_sq: 0.0,
            c_eta_2delta_m1: 0.0,
        };
        let mf = m as f64;
        let p = mf - 1.0 - mf * delta;
        let ramp = |s: f64| {
            let v = smoothstep(s);
            if v == 0.0 {
                0.0
            } else {
                mf * smoothstep_d1(s) * v.powf(p) / rho
            }
        };
        out.c0 = certify_sup(ramp, 0.0, 1.0, BASE_SAMPLES * CERTIFY_OVERSAMPLING);
        out.c_eta = out.moment(1.0, MOMENT_PANELS);
        out.c_eta_delta = out.moment(delta, MOMENT_PANELS);
        out.c_eta_sq = out.moment(2.0, MOMENT_PANELS);
        out.c_eta_2delta_m1 = out.moment(2.0 * delta - 1.0, MOMENT_PANELS);
        Ok(out)
    }

    #[inline]
    pub fn end(&self) -> f64 {
        self.t0 + self.t
    }

    #[inline]
    pub fn value(&self, time: f64) -> f64 {
        let s = (time - self.t0) / self.t;
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let w = if s < 0.5 { s } else { 1.0 - s };
        smoothstep(w / self.rho).powi(self.m as i32)
    }

    /// `d eta / dt`.
    #[inline]
    pub fn derivative(&self, time: f64) -> f64 {
        let s = (time - self.t0) / self.t;
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let (w, sign) = if s < 0.5 { (s, 1.0) } else { (1.0 - s, -1.0) };
        let a = w / self.rho;
        let mf = self.m as f64;
        sign * mf * smoothstep(a).powi(self.m as i32 - 1) * smoothstep_d1(a) / (self.rho * self.t)
    }

    /// `(1/T) int eta^p` by composite Simpson with `panels` panels.
    pub fn moment(&self, p: f64, panels: usize) -> f64 {
        let panels = panels.max(2) + panels % 2;
        let h = self.t / panels as f64;
        let f = |j: usize| {
            let v = self.value(self.t0 + j as f64 * h);
            if v == 0.0 {
                0.0
            } else {
                v.powf(p)
            }
        };
        let mut s = f(0) + f(panels);
        for j in 1..panels {
            s += if j % 2 == 1 { 4.0 } else { 2.0 } * f(j);
        }
        s * h / 3.0 / self.t
    }
}

/// The `C^infinity` transition `h(t) = e^(-1/t) / (e^(-1/t) + e^(-1/(1-t)))`.
#[inline]
pub fn smooth_transition(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Periodic partition of unity on `[0, L)^3` built from the 1D pair
/// `f1` (equal to 1 on `[L/3, 2L/3]`, 0 on `[0, L/6]` and `[5L/6, L]`)
/// and `f2 = 1 - f1`. The eight products `f_a(x) f_b(y) f_c(z)` sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionOfUnity {
    pub l: f64,
}

impl PartitionOfUnity {
    pub fn new(l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(CoreError::arg("box side must be positive"));
        }
        Ok(Self { l })
    }

    /// `f1` at `x` (any real, reduced modulo `L`).
    pub fn f1(&self, x: f64) -> f64 {
        let l = self.l;
        let x = x.rem_euclid(l);
        let w = l / 6.0;
        if x <= w || x >= 5.0 * w {
            0.0
        } else if x < 2.0 * w {
            smooth_transition((x - w) / w)
        } else if x <= 4.0 * w {
            1.0
        } else {
            smooth_transition((5.0 * w - x) / w)
        }
    }

    /// Factor `which` (0 for `f1`, 1 for `f2`).
    pub fn factor(&self, which: usize, x: f64) -> f64 {
        let v = self.f1(x);
        if which == 0 {
            v
        } else {
            1.0 - v
        }
    }

    /// Closed support of factor `which` as an interval on the real line
    /// (the `f2` interval straddles `x = L`).
    pub fn support(&self, which: usize) -> (f64, f64) {
        let w = self.l / 6.0;
        if which == 0 {
            (w, 5.0 * w)
        } else {
            (4.0 * w, 8.0 * w)
        }
    }

    /// The shifted box on which factor `which` is compactly supported.
    pub fn shifted_box(&self, which: usize) -> (f64, f64) {
        if which == 0 {
            (0.0, self.l)
        } else {
            (0.5 * self.l, 1.5 * self.l)
        }
    }

    /// Member `(a, b, c)` with each index in `{0, 1}`.
    pub fn member(&self, idx: [usize; 3], x: [f64; 3]) -> f64 {
        self.factor(idx[0], x[0]) * self.factor(idx[1], x[1]) * self.factor(idx[2], x[2])
    }

    pub fn members() -> [[usize; 3]; 8] {
        let mut out = [[0; 3]; 8];
        for (j, m) in out.iter_mut().enumerate() {
            *m = [j & 1, (j >> 1) & 1, (j >> 2) & 1];
        }
        out
    }

    /// All eight members sampled on `grid`.
    pub fn on_grid(&self, grid: &Grid) -> Vec<Vec<f64>> {
        let n = grid.n();
        let h = grid.dx();
        let tab: Vec<[f64; 2]> = (0..n)
            .map(|j| {
                let x = j as f64 * h;
                [self.factor(0, x), self.factor(1, x)]
            })
            .collect();
        Self::members()
            .iter()
            .map(|m| {
                let mut v = vec![0.0; grid.physical_len()];
                for iz in 0..n {
                    for iy in 0..n {
                        let yz = tab[iy][m[1]] * tab[iz][m[2]];
                        for ix in 0..n {
                            v[grid.physical_index(ix, iy, iz)] = tab[ix][m[0]] * yz;
                        }
                    }
                }
                v
            })
            .collect()
    }
}

/// Outcome of the `psi0 <= sum_i psi_i <= K2 psi0` check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub min_sum: f64,
    pub max_sum: f64,
    pub k2: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl SandwichReport {
    pub fn pass(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// `sum_i psi_i` on the grid for a family of cutoffs.
pub fn family_sum(grid: &Grid, family: &[SpaceCutoff]) -> Vec<f64> {
    let mut sum = vec![0.0; grid.physical_len()];
    for c in family {
        c.for_each_support_point(grid, |idx, d| {
            sum[idx] += c.sample_displacement(d).value;
        });
    }
    sum
}

/// Verifies the sandwich against `psi0 = 1` (the periodic global cutoff).
pub fn verify_family_sandwich(grid: &Grid, family: &[SpaceCutoff], k2: f64) -> SandwichReport {
    let ones = vec![1.0; grid.physical_len()];
    verify_family_sandwich_with(grid, family, &ones, k2)
}

pub fn verify_family_sandwich_with(
    grid: &Grid,
    family: &[SpaceCutoff],
    psi0: &[f64],
    k2: f64,
) -> SandwichReport {
    let sum = family_sum(grid, family);
    let mut min_sum = f64::INFINITY;
    let mut max_sum: f64 = 0.0;
    let mut lower_ok = true;
    let mut upper_ok = true;
    for (s, p) in sum.iter().zip(psi0) {
        min_sum = min_sum.min(*s);
        max_sum = max_sum.max(*s);
        if *s < *p * (1.0 - 1e-12) {
            lower_ok = false;
        }
        if *s > k2 * *p * (1.0 + 1e-12) {
            upper_ok = false;
        }
    }
    SandwichReport {
        min_sum,
        max_sum,
        k2,
        lower_ok,
        upper_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_for_three_quarters_is_four() {
        assert_eq!(profile_exponent(0.75).unwrap(), 4);
        assert_eq!(profile_exponent(0.6).unwrap(), 3);
        assert!(profile_exponent(0.5).is_err());
        assert!(profile_exponent(1.0).is_err());
    }

    #[test]
    fn gradient_constant_matches_chain_rule() {
        let cert = SpaceCertificate::new(0.75).unwrap();
        let expect = 4.0 * SMOOTHSTEP_MAX_SLOPE;
        assert!((cert.c0_grad - expect).abs() < 1e-10, "{}", cert.c0_grad);
    }

    #[test]
    fn certification_is_stable_under_refinement() {
        let a = SpaceCertificate::with_oversampling(0.75, 4).unwrap();
        let b = SpaceCertificate::with_oversampling(0.75, 32).unwrap();
        assert!((a.c0_lap - b.c0_lap).abs() <= 0.01 * b.c0_lap);
        assert!((a.c0_grad - b.c0_grad).abs() <= 0.01 * b.c0_grad);
    }

    #[test]
    fn support_values() {
        let c = SpaceCutoff::new([0.0; 3], 0.5, 0.75, 4.0).unwrap();
        assert_eq!(c.sample_displacement([0.0; 3]).value, 1.0);
        assert_eq!(c.sample_displacement([1.0, 0.0, 0.0]).value, 0.0);
        assert!(SpaceCutoff::new([0.0; 3], 1.5, 0.75, 4.0).is_err());
    }

    #[test]
    fn time_cutoff_shape() {
        let e = TimeCutoff::new(2.0, 0.75, 0.25).unwrap();
        assert_eq!(e.value(1.0), 1.0);
        assert_eq!(e.value(0.0), 0.0);
        assert_eq!(e.value(2.0), 0.0);
        assert!((e.c0 - 30.0).abs() < 1e-9);
        assert!(e.c_eta > 0.0 && e.c_eta < 1.0);
        assert!(TimeCutoff::new(1.0, 0.75, 0.6).is_err());
    }

    #[test]
    fn time_derivative_matches_difference_quotient() {
        let e = TimeCutoff::starting_at(1.0, 3.0, 0.75, 0.3).unwrap();
        for &t in &[1.2, 1.5, 3.1, 3.7] {
            let h = 1e-6;
            let fd = (e.value(t + h) - e.value(t - h)) / (2.0 * h);
            assert!((fd - e.derivative(t)).abs() < 1e-6);
        }
    }
}
