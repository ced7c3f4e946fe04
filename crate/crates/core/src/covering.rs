//! `(K1, K2)`-coverings of the periodic box by balls of radius `R`.
//!
//! A covering is valid at scale `R` when `(R0/R)^3 <= n <= K1 (R0/R)^3`,
//! every point lies in some `B(x_i, R)` and no point lies in more than
//! `K2` of the doubled balls `B(x_i, 2R)`. Coverage and multiplicity are
//! checked on the simulation grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cutoffs::support_axis;
use crate::error::{CoreError, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoveringKind {
    Lattice,
    Jittered,
    AdversarialPositive,
    AdversarialNegative,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covering {
    pub r: f64,
    pub r0: f64,
    pub l: f64,
    pub centers: Vec<[f64; 3]>,
    pub k1: u32,
    pub k2: u32,
    pub kind: CoveringKind,
    pub seed: Option<u64>,
}

/// Measured multiplicities of a covering on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringValidation {
    pub n: usize,
    pub k1_min: u32,
    pub k2_min: u32,
    pub coverage_ok: bool,
    /// Largest distance from a grid point to its nearest center.
    pub max_gap: f64,
    /// `n >= (R0/R)^3`.
    pub lower_count_ok: bool,
}

impl CoveringValidation {
    /// Valid for the declared multiplicities.
    pub fn valid_for(&self, k1: u32, k2: u32) -> bool {
        self.coverage_ok && self.lower_count_ok && self.k1_min <= k1 && self.k2_min <= k2
    }
}

fn check_scale(grid: &Grid, r: f64) -> Result<()> {
    let r0 = grid.r0();
    if !(r > 0.0 && r <= r0 * (1.0 + 1e-12)) {
        return Err(CoreError::arg(format!(
            "covering radius must lie in (0, R0 = {r0}], got {r}"
        )));
    }
    Ok(())
}

/// Lattice points per side needed so radius-`r` balls cover the torus.
pub fn lattice_side(l: f64, r: f64) -> usize {
    let x = 3f64.sqrt() * l / (2.0 * r);
    (x - 1e-9).ceil().max(1.0) as usize
}

/// `ceil(n / (R0/R)^3)`.
pub fn k1_min(n: usize, r0: f64, r: f64) -> u32 {
    let v = n as f64 / (r0 / r).powi(3);
    (v - 1e-9).ceil().max(1.0) as u32
}

fn cubic_lattice(l: f64, m: usize, offset: [f64; 3]) -> Vec<[f64; 3]> {
    let s = l / m as f64;
    let mut out = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                out.push([
                    (offset[0] + i as f64 * s).rem_euclid(l),
                    (offset[1] + j as f64 * s).rem_euclid(l),
                    (offset[2] + k as f64 * s).rem_euclid(l),
                ]);
            }
        }
    }
    out
}

impl Covering {
    pub fn n(&self) -> usize {
        self.centers.len()
    }

    /// Wraps explicit centers; multiplicities are measured on `grid` and
    /// rounded up to the next power of two.
    pub fn from_centers(grid: &Grid, r: f64, centers: Vec<[f64; 3]>) -> Result<Self> {
        check_scale(grid, r)?;
        if centers.is_empty() {
            return Err(CoreError::arg("a covering needs at least one ball"));
        }
        let mut c = Self {
            r,
            r0: grid.r0(),
            l: grid.l(),
            centers,
            k1: 0,
            k2: 0,
            kind: CoveringKind::Custom,
            seed: None,
        };
        c.declare_measured(grid);
        Ok(c)
    }

    fn declare_measured(&mut self, grid: &Grid) {
        let v = validate_covering(self, grid);
        self.k1 = v.k1_min.next_power_of_two();
        self.k2 = v.k2_min.max(1).next_power_of_two();
    }

    /// Same centers translated rigidly on the torus.
    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let mut out = self.clone();
        for c in &mut out.centers {
            for a in 0..3 {
                c[a] = (c[a] + shift[a]).rem_euclid(self.l);
            }
        }
        out
    }

    /// CSV `i,x,y,z`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,x,y,z\n");
        for (i, c) in self.centers.iter().enumerate() {
            s.push_str(&format!("{i},{:.17e},{:.17e},{:.17e}\n", c[0], c[1], c[2]));
        }
        s
    }

    /// JSON metadata `{R, R0, n, K1, K2, seed}`.
    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "R": self.r,
            "R0": self.r0,
            "n": self.n(),
            "K1": self.k1,
            "K2": self.k2,
            "seed": self.seed,
            "kind": self.kind,
        })
    }
}

/// Centers on the cubic lattice with `m = ceil(sqrt(3) L / (2R))` points
/// per side.
pub fn lattice_covering(grid: &Grid, r: f64) -> Result<Covering> {
    check_scale(grid, r)?;
    let m = lattice_side(grid.l(), r);
    let mut c = Covering {
        r,
        r0: grid.r0(),
        l: grid.l(),
        centers: cubic_lattice(grid.l(), m, [0.0; 3]),
        k1: 0,
        k2: 0,
        kind: CoveringKind::Lattice,
        seed: None,
    };
    c.declare_measured(grid);
    Ok(c)
}

/// Randomized covering: a denser lattice (`m = ceil(3 sqrt(3) L / (4R))`)
/// with a random global offset and every center jittered by at most a
/// quarter spacing per coordinate. The density margin keeps every point
/// within `R` of a center whatever the jitter.
pub fn jittered_covering(grid: &Grid, r: f64, seed: u64) -> Result<Covering> {
    check_scale(grid, r)?;
    let l = grid.l();
    let m = ((3.0 * 3f64.sqrt() * l / (4.0 * r)) - 1e-9).ceil() as usize;
    let s = l / m as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = [
        rng.random_range(0.0..s),
        rng.random_range(0.0..s),
        rng.random_range(0.0..s),
    ];
    let mut centers = cubic_lattice(l, m, offset);
    for c in &mut centers {
        for x in c.iter_mut() {
            *x = (*x + rng.random_range(-0.25 * s..=0.25 * s)).rem_euclid(l);
        }
    }
    let mut c = Covering {
        r,
        r0: grid.r0(),
        l,
        centers,
        k1: 0,
        k2: 0,
        kind: CoveringKind::Jittered,
        seed: Some(seed),
    };
    c.declare_measured(grid);
    Ok(c)
}

/// Visits grid points within `reach` of `center` with their distance.
fn for_each_within(grid: &Grid, center: [f64; 3], reach: f64, mut f: impl FnMut(usize, f64)) {
    let axes: Vec<Vec<(usize, f64)>> = (0..3)
        .map(|a| support_axis(grid, center[a], reach))
        .collect();
    let n = grid.n();
    let r2 = reach * reach;
    for &(iz, dz) in &axes[2] {
        for &(iy, dy) in &axes[1] {
            let dyz = dy * dy + dz * dz;
            if dyz >= r2 {
                continue;
            }
            let base = n * (iy + n * iz);
            for &(ix, dx) in &axes[0] {
                let d2 = dx * dx + dyz;
                if d2 < r2 {
                    f(base + ix, d2.sqrt());
                }
            }
        }
    }
}

/// Per-grid-point count of doubled balls containing the point
/// (`|x - x_i| < 2R`).
pub fn multiplicity_field(cov: &Covering, grid: &Grid) -> Vec<u32> {
    let mut count = vec![0u32; grid.physical_len()];
    for &c in &cov.centers {
        for_each_within(grid, c, 2.0 * cov.r, |idx, _| count[idx] += 1);
    }
    count
}

/// Measures `K1_min`, `K2_min` and coverage on the grid.
pub fn validate_covering(cov: &Covering, grid: &Grid) -> CoveringValidation {
    let mut count = vec![0u32; grid.physical_len()];
    let mut gap = vec![f64::INFINITY; grid.physical_len()];
    for &c in &cov.centers {
        for_each_within(grid, c, 2.0 * cov.r, |idx, d| {
            count[idx] += 1;
            if d < gap[idx] {
                gap[idx] = d;
            }
        });
    }
    let k2_min = count.iter().copied().max().unwrap_or(0);
    let max_gap = gap.iter().cloned().fold(0.0, f64::max);
    let n = cov.n();
    CoveringValidation {
        n,
        k1_min: k1_min(n, cov.r0, cov.r),
        k2_min,
        coverage_ok: max_gap <= cov.r * (1.0 + 1e-12),
        max_gap,
        lower_count_ok: n as f64 >= (cov.r0 / cov.r).powi(3) * (1.0 - 1e-12),
    }
}

/// Sign whose regions an adversarial covering emphasizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emphasis {
    Positive,
    Negative,
}

/// Starts from the lattice covering and greedily adds balls at the grid
/// points where `q` (grid samples) is most extreme with the requested
/// sign, as long as the ball count stays within `K1 (R0/R)^3` and no
/// point exceeds `K2` doubled balls.
pub fn adversarial_covering(
    grid: &Grid,
    r: f64,
    q: &[f64],
    emphasis: Emphasis,
    k1: u32,
    k2: u32,
) -> Result<Covering> {
    check_scale(grid, r)?;
    grid.check_len(q.len(), grid.physical_len(), "density samples")?;
    let base = lattice_covering(grid, r)?;
    let mut count = multiplicity_field(&base, grid);
    if count.iter().any(|&c| c > k2) || base.n() as f64 > k1 as f64 * (grid.r0() / r).powi(3) {
        return Err(CoreError::Infeasible(format!(
            "the base lattice at R = {r} already exceeds K1 = {k1} or K2 = {k2}"
        )));
    }
    let budget = (k1 as f64 * (grid.r0() / r).powi(3)).floor() as usize;
    let sign = match emphasis {
        Emphasis::Positive => 1.0,
        Emphasis::Negative => -1.0,
    };
    let mut order: Vec<usize> = (0..q.len()).filter(|&j| sign * q[j] > 0.0).collect();
    order.sort_by(|&a, &b| {
        (sign * q[b])
            .partial_cmp(&(sign * q[a]))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let n = grid.n();
    let mut centers = base.centers.clone();
    for j in order {
        if centers.len() >= budget {
            break;
        }
        let ix = j % n;
        let iy = (j / n) % n;
        let iz = j / (n * n);
        let c = grid.point(ix, iy, iz);
        let mut ok = true;
        for_each_within(grid, c, 2.0 * r, |idx, _| {
            if count[idx] + 1 > k2 {
                ok = false;
            }
        });
        if ok {
            for_each_within(grid, c, 2.0 * r, |idx, _| count[idx] += 1);
            centers.push(c);
        }
    }
    Ok(Covering {
        r,
        r0: grid.r0(),
        l: grid.l(),
        centers,
        k1,
        k2,
        kind: match emphasis {
            Emphasis::Positive => CoveringKind::AdversarialPositive,
            Emphasis::Negative => CoveringKind::AdversarialNegative,
        },
        seed: None,
    })
}
