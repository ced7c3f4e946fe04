//! Explicit constant for the Agmon inequality on the periodic box,
//! `||w||_inf <= C_A ||A^(1/2) w||^(1/2) ||A w||^(1/2)` for mean-zero `w`.
//!
//! Bounding `||w||_inf` by `sum_k |w_k|` and splitting the sum at `|k| = K`
//! with Cauchy-Schwarz on each part gives, with `||A w|| = rho (2 pi / L)
//! ||A^(1/2) w||` and `rho >= 1`,
//!
//! `C(rho) = (2 pi)^(-3/2) min_K [ sqrt(S2(K) / rho) + sqrt(S4(K) rho) ]`,
//!
//! where `S2(K) = sum_{0<|k|<=K} |k|^-2` and `S4(K) = sum_{|k|>K} |k|^-4`
//! run over integer vectors. The box side cancels. `C_A` is the largest
//! `C(rho)` over the admissible ratios.

use std::sync::OnceLock;

/// Lattice sums are exact up to this radius; beyond it an integral bound
/// over unit cells is used.
const K_CAP: i64 = 96;
/// Largest frequency ratio considered. Grids up to `N = 2 * RHO_MAX / sqrt(3)`
/// cannot produce a larger ratio.
pub const RHO_MAX: f64 = 200.0;
const RHO_SAMPLES: usize = 1200;

struct Tables {
    /// `(K^2, S2(K), S4(K))` for every occupied shell plus `K = 0`.
    shells: Vec<(i64, f64, f64)>,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(build_tables)
}

fn build_tables() -> Tables {
    let j_max = (K_CAP * K_CAP) as usize;
    let mut count = vec![0u64; j_max + 1];
    for a in -K_CAP..=K_CAP {
        for b in -K_CAP..=K_CAP {
            let ab = a * a + b * b;
            if ab as usize > j_max {
                continue;
            }
            for c in -K_CAP..=K_CAP {
                let j = (ab + c * c) as usize;
                if j <= j_max {
                    count[j] += 1;
                }
            }
        }
    }
    // Unit cells around lattice points with |k| > K_CAP lie outside the
    // ball of radius K_CAP - sqrt(3)/2, and |k| >= |y| - sqrt(3)/2 there.
    let c = 3f64.sqrt() / 2.0;
    let b = K_CAP as f64 - 2.0 * c;
    let tail = 4.0 * std::f64::consts::PI * (1.0 / b + c / (b * b) + c * c / (3.0 * b * b * b));

    let total4: f64 = (1..=j_max).map(|j| count[j] as f64 / (j as f64).powi(2)).sum::<f64>() + tail;
    let mut shells = vec![(0, 0.0, total4)];
    let mut s2 = 0.0;
    let mut s4 = total4;
    for (j, &cnt) in count.iter().enumerate().skip(1) {
        if cnt == 0 {
            continue;
        }
        let jf = j as f64;
        s2 += cnt as f64 / jf;
        s4 -= cnt as f64 / (jf * jf);
        shells.push((j as i64, s2, s4.max(tail)));
    }
    Tables { shells }
}

/// `C(rho)`: the split-sum bound at frequency ratio `rho >= 1`.
pub fn split_sum_bound(rho: f64) -> f64 {
    let pref = (2.0 * std::f64::consts::PI).powf(-1.5);
    let best = tables()
        .shells
        .iter()
        .map(|&(_, s2, s4)| (s2 / rho).sqrt() + (s4 * rho).sqrt())
        .fold(f64::INFINITY, f64::min);
    pref * best
}

/// Default Agmon constant: `max C(rho)` over log-spaced `rho` in `[1, RHO_MAX]`.
pub fn agmon_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let lmax = RHO_MAX.ln();
        (0..=RHO_SAMPLES)
            .map(|j| split_sum_bound((lmax * j as f64 / RHO_SAMPLES as f64).exp()))
            .fold(0.0, f64::max)
    })
}
