//! One-dimensional sign-changing density `q = M (0.5 + sin(N x))` on the
//! periodic interval `[-pi, pi]`, averaged over `(K1, K2)`-coverings with
//! refined cutoffs `chi(|x - c| / R)^m`.
//!
//! A ball average is `(1/2R) int q psi_i` and the covering average is the
//! mean over balls, so that `R = R0 = pi` with `psi0 = 1` returns `M/2`.
//! A covering is valid when `1 <= sum psi_i <= K2` everywhere and
//! `R0/R <= n <= K1 R0/R`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cutoffs::{RadialProfile, DEFAULT_DELTA};
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    pub m_amp: f64,
    pub n_freq: u32,
    pub k1: f64,
    pub k2: f64,
    pub delta: f64,
    /// Quadrature panels per ball radius.
    pub panels_per_radius: usize,
    /// Gauss-Legendre nodes per panel.
    pub order: usize,
}

impl ToySpec {
    pub fn new(m_amp: f64, n_freq: u32) -> Result<Self> {
        if n_freq < 10 {
            return Err(CoreError::arg(format!("N must be at least 10, got {n_freq}")));
        }
        if !m_amp.is_finite() {
            return Err(CoreError::arg("M must be finite"));
        }
        Ok(Self {
            m_amp,
            n_freq,
            k1: 3.0,
            k2: 3.0,
            delta: DEFAULT_DELTA,
            panels_per_radius: 4,
            order: 8,
        })
    }

    pub const R0: f64 = PI;

    pub fn q(&self, x: f64) -> f64 {
        self.m_amp * (0.5 + (self.n_freq as f64 * x).sin())
    }

    /// Global average `M/2`.
    pub fn q0(&self) -> f64 {
        0.5 * self.m_amp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Lattice,
    AdversarialPositive,
    AdversarialNegative,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::Lattice,
        Strategy::AdversarialPositive,
        Strategy::AdversarialNegative,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Lattice => "lattice",
            Strategy::AdversarialPositive => "adversarial+",
            Strategy::AdversarialNegative => "adversarial-",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lattice" => Ok(Strategy::Lattice),
            "adversarial+" | "adversarial_positive" => Ok(Strategy::AdversarialPositive),
            "adversarial-" | "adversarial_negative" => Ok(Strategy::AdversarialNegative),
            _ => Err(CoreError::arg(format!("unknown toy strategy {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyResult {
    pub r: f64,
    pub strategy: Strategy,
    pub average: f64,
    pub centers: Vec<f64>,
    /// Smallest value of `sum psi_i` on the check grid and its largest value
    /// over the interval.
    pub coverage: (f64, f64),
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Signed periodic displacement in `[-pi, pi)`.
fn wrap(d: f64) -> f64 {
    (d + PI).rem_euclid(2.0 * PI) - PI
}

/// Check points per ball radius for `sum psi_i`.
const CHECK_PER_RADIUS: f64 = 32.0;

/// Running `sum psi_i` and its slope on the check grid, with centers
/// bucketed by position for pointwise evaluation.
struct Cover {
    sum: Vec<f64>,
    slope: Vec<f64>,
    buckets: Vec<Vec<f64>>,
}

struct Toy {
    spec: ToySpec,
    r: f64,
    profile: RadialProfile,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    check: Vec<f64>,
}

impl Toy {
    fn new(spec: &ToySpec, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= ToySpec::R0 * (1.0 + 1e-12)) {
            return Err(CoreError::arg(format!("R must lie in (0, pi], got {r}")));
        }
        let (nodes, weights) = gauss_legendre(spec.order.max(2));
        let per = (CHECK_PER_RADIUS * 2.0 * PI / r).ceil().max(64.0) as usize;
        let check = (0..per).map(|j| -PI + 2.0 * PI * j as f64 / per as f64).collect();
        Ok(Self {
            spec: *spec,
            r,
            profile: RadialProfile::new(spec.delta)?,
            nodes,
            weights,
            check,
        })
    }

    /// `(1/2R) int q psi_c`, integrated over `|x - c| <= min(2R, pi)` with
    /// panel edges at the profile's kinks.
    fn ball_average(&self, c: f64) -> f64 {
        let r = self.r;
        let reach = (2.0 * r).min(PI);
        let mut edges = vec![-reach];
        if r < reach {
            edges.extend([-r, r]);
        }
        edges.push(reach);
        let mut total = 0.0;
        for seg in edges.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let panels = ((b - a) / r * self.spec.panels_per_radius as f64).ceil().max(1.0) as usize;
            // Resolve the oscillation with several panels per period too.
            let panels = panels.max(((b - a) * self.spec.n_freq as f64 / PI * 2.0).ceil() as usize);
            let h = (b - a) / panels as f64;
            for p in 0..panels {
                let lo = a + p as f64 * h;
                for (z, w) in self.nodes.iter().zip(&self.weights) {
                    let y = lo + 0.5 * h * (z + 1.0);
                    let g = self.profile.value(y.abs() / r);
                    total += 0.5 * h * w * g * self.spec.q(c + y);
                }
            }
        }
        total / (2.0 * r)
    }

    /// `(psi_c, d psi_c / dx)` at `x`.
    fn psi_d(&self, c: f64, x: f64) -> (f64, f64) {
        let d = wrap(x - c);
        let (g, g1, _) = self.profile.eval(d.abs() / self.r);
        (g, g1 * d.signum() / self.r)
    }

    /// Calls `f(index, psi_c, psi_c')` for the check points inside the support of `psi_c`.
    fn for_support(&self, c: f64, mut f: impl FnMut(usize, f64, f64)) {
        let per = self.check.len();
        let h = 2.0 * PI / per as f64;
        let reach = ((2.0 * self.r / h).ceil() as usize + 1).min(per / 2);
        let mid = ((c + PI) / h).round() as i64;
        for k in -(reach as i64)..=(reach as i64) {
            let j = (mid + k).rem_euclid(per as i64) as usize;
            if reach == per / 2 && k == reach as i64 && per % 2 == 0 {
                continue;
            }
            let (v, d) = self.psi_d(c, self.check[j]);
            if v != 0.0 || d != 0.0 {
                f(j, v, d);
            }
        }
    }

    fn cover(&self) -> Cover {
        let buckets = ((PI / self.r).floor() as usize).max(1);
        Cover {
            sum: vec![0.0; self.check.len()],
            slope: vec![0.0; self.check.len()],
            buckets: vec![Vec::new(); buckets],
        }
    }

    fn bucket(&self, cov: &Cover, x: f64) -> usize {
        let nb = cov.buckets.len();
        (((x + PI) / (2.0 * PI) * nb as f64).floor() as usize).min(nb - 1)
    }

    fn add(&self, cov: &mut Cover, c: f64) {
        self.for_support(c, |j, v, d| {
            cov.sum[j] += v;
            cov.slope[j] += d;
        });
        let b = self.bucket(cov, c);
        cov.buckets[b].push(c);
    }

    /// `(sum psi_i, sum psi_i')` at `x`, including an optional extra ball.
    fn eval(&self, cov: &Cover, extra: Option<f64>, x: f64) -> (f64, f64) {
        let nb = cov.buckets.len() as i64;
        let b = self.bucket(cov, x) as i64;
        let mut seen = [usize::MAX; 3];
        let (mut s, mut ds) = extra.map_or((0.0, 0.0), |c| self.psi_d(c, x));
        for (slot, k) in (-1..=1).enumerate() {
            let i = (b + k).rem_euclid(nb) as usize;
            if seen.contains(&i) {
                continue;
            }
            seen[slot] = i;
            for &c in &cov.buckets[i] {
                let (v, d) = self.psi_d(c, x);
                s += v;
                ds += d;
            }
        }
        (s, ds)
    }

    /// Largest `sum psi_i` on the check interval starting at `j`: the larger
    /// endpoint, or the interior critical point when the slope changes sign.
    fn interval_max(&self, cov: &Cover, extra: Option<f64>, j: usize, ends: [(f64, f64); 2]) -> f64 {
        let mut best = ends[0].0.max(ends[1].0);
        if !(ends[0].1 > 0.0 && ends[1].1 < 0.0) {
            return best;
        }
        let h = 2.0 * PI / self.check.len() as f64;
        let (mut a, mut b) = (self.check[j], self.check[j] + h);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if self.eval(cov, extra, m).1 > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        best = best.max(self.eval(cov, extra, 0.5 * (a + b)).0);
        best
    }

    fn fits(&self, cov: &Cover, c: f64) -> bool {
        let cap = self.spec.k2 + 1e-9;
        let per = self.check.len();
        let mut touched = Vec::new();
        let mut ok = true;
        self.for_support(c, |j, v, d| {
            ok &= cov.sum[j] + v <= cap;
            touched.push((j, cov.sum[j] + v, cov.slope[j] + d));
        });
        if !ok {
            return false;
        }
        // Interior maxima only matter close to the cap.
        for w in touched.windows(2) {
            let ((j, s0, d0), (k, s1, d1)) = (w[0], w[1]);
            if k != (j + 1) % per || s0.max(s1) < self.spec.k2 - 0.1 {
                continue;
            }
            if self.interval_max(cov, Some(c), j, [(s0, d0), (s1, d1)]) > cap {
                return false;
            }
        }
        true
    }

    /// Extremes of `sum psi_i` over the whole interval.
    fn coverage(&self, cov: &Cover) -> (f64, f64) {
        let per = self.check.len();
        let lo = cov.sum.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut hi = f64::NEG_INFINITY;
        for j in 0..per {
            let k = (j + 1) % per;
            let ends = [(cov.sum[j], cov.slope[j]), (cov.sum[k], cov.slope[k])];
            hi = hi.max(self.interval_max(cov, None, j, ends));
        }
        (lo, hi)
    }

    fn lattice(&self, phase: f64) -> Vec<f64> {
        let m = (PI / self.r - 1e-12).ceil().max(1.0) as usize;
        let s = 2.0 * PI / m as f64;
        (0..m).map(|j| -PI + (j as f64 + 0.5 + phase) * s).collect()
    }

    fn max_balls(&self) -> usize {
        (self.spec.k1 * ToySpec::R0 / self.r + 1e-9).floor() as usize
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Covering average of the toy density at scale `r`.
pub fn toy_average(spec: &ToySpec, r: f64, strategy: Strategy) -> Result<ToyResult> {
    let toy = Toy::new(spec, r)?;
    let (centers, values) = match strategy {
        Strategy::Lattice => {
            let c = toy.lattice(0.0);
            let v: Vec<f64> = c.iter().map(|&x| toy.ball_average(x)).collect();
            (c, v)
        }
        Strategy::AdversarialPositive => adversarial(&toy, 1.0)?,
        Strategy::AdversarialNegative => adversarial(&toy, -1.0)?,
    };
    let mut cov = toy.cover();
    for &c in &centers {
        toy.add(&mut cov, c);
    }
    let (lo, hi) = toy.coverage(&cov);
    let n = centers.len() as f64;
    if lo < 1.0 - 1e-9
        || hi > spec.k2 + 1e-9
        || n < ToySpec::R0 / r - 1e-9
        || n > spec.k1 * ToySpec::R0 / r + 1e-9
    {
        return Err(CoreError::Infeasible(format!(
            "no valid ({}, {}) covering at R = {r}: n = {n}, sum psi in [{lo}, {hi}]",
            spec.k1, spec.k2
        )));
    }
    Ok(ToyResult {
        r,
        strategy,
        average: mean(&values),
        centers,
        coverage: (lo, hi),
    })
}

/// Lattice base (best of several phases) plus greedily stacked balls on
/// the lobes of the requested sign, added while they move the mean in that
/// direction and keep `sum psi <= K2`.
fn adversarial(toy: &Toy, sign: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let step = toy.r / 8.0;
    let cand_n = (2.0 * PI / step).ceil() as usize;
    let cands: Vec<f64> = (0..cand_n)
        .map(|j| -PI + 2.0 * PI * j as f64 / cand_n as f64)
        .collect();
    let scores: Vec<f64> = cands.iter().map(|&c| toy.ball_average(c)).collect();
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| {
        (sign * scores[b])
            .partial_cmp(&(sign * scores[a]))
            .expect("finite ball averages")
            .then(a.cmp(&b))
    });
    let cap = toy.max_balls();
    let mut best: Option<(Vec<f64>, Vec<f64>)> = None;
    for k in 0..8 {
        let base = toy.lattice(k as f64 / 8.0);
        let mut values: Vec<f64> = base.iter().map(|&c| toy.ball_average(c)).collect();
        let mut centers = base;
        let mut cov = toy.cover();
        for &c in &centers {
            toy.add(&mut cov, c);
        }
        if toy.coverage(&cov).1 > toy.spec.k2 + 1e-9 || centers.len() > cap {
            continue;
        }
        let mut total: f64 = values.iter().sum();
        for &j in &order {
            if centers.len() >= cap {
                break;
            }
            let a = scores[j];
            if sign * a <= sign * total / centers.len() as f64 {
                break;
            }
            let c = cands[j];
            if toy.fits(&cov, c) {
                toy.add(&mut cov, c);
                centers.push(c);
                values.push(a);
                total += a;
            }
        }
        let m = total / centers.len() as f64;
        if best
            .as_ref()
            .map_or(true, |(_, v)| sign * m > sign * mean(v))
        {
            best = Some((centers, values));
        }
    }
    best.ok_or_else(|| {
        CoreError::Infeasible(format!(
            "the base lattice at R = {} exceeds K2 = {}",
            toy.r, toy.spec.k2
        ))
    })
}

/// CSV `R,strategy,average`; infeasible scales are skipped.
pub fn toy_csv(results: &[ToyResult]) -> String {
    let mut s = String::from("R,strategy,average\n");
    for r in results {
        s.push_str(&format!("{:.17e},{},{:.17e}\n", r.r, r.strategy.name(), r.average));
    }
    s
}
