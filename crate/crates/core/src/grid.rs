//! Periodic cubic grid and its wavevector bookkeeping.
//!
//! Physical samples are stored x-fastest: `ix + n * (iy + n * iz)`.
//! Spectral coefficients use the real-to-complex layout along x, so only
//! `kx in 0..=n/2` is stored: `kx + nxh * (ky + n * kz)` with `nxh = n/2 + 1`.
//! The `ky`, `kz` indices map to signed wavenumbers in `[-n/2, n/2)`.

use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    l: f64,
}

impl Grid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(CoreError::InvalidGrid(format!(
                "points per dimension must be even and >= 8, got {n}"
            )));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(CoreError::InvalidGrid(format!(
                "box side must be positive, got {l}"
            )));
        }
        Ok(Self { n, l })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn l(&self) -> f64 {
        self.l
    }

    /// Integral scale `R0 = L/4`.
    #[inline]
    pub fn r0(&self) -> f64 {
        self.l / 4.0
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Volume element of the rectangle rule.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    #[inline]
    pub fn volume(&self) -> f64 {
        self.l.powi(3)
    }

    #[inline]
    pub fn nxh(&self) -> usize {
        self.n / 2 + 1
    }

    #[inline]
    pub fn physical_len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn spectral_len(&self) -> usize {
        self.nxh() * self.n * self.n
    }

    /// Fundamental physical wavenumber `2*pi/L`.
    #[inline]
    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.l
    }

    /// Signed integer wavenumber of a full-length axis index.
    #[inline]
    pub fn signed(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    #[inline]
    pub fn is_nyquist(&self, k: i64) -> bool {
        k.unsigned_abs() as usize == self.n / 2
    }

    #[inline]
    pub fn physical_index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n * (iy + self.n * iz)
    }

    #[inline]
    pub fn spectral_index(&self, kx: usize, ky: usize, kz: usize) -> usize {
        kx + self.nxh() * (ky + self.n * kz)
    }

    /// Coordinates of the grid point `(ix, iy, iz)`.
    #[inline]
    pub fn point(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        let h = self.dx();
        [ix as f64 * h, iy as f64 * h, iz as f64 * h]
    }

    /// Visits every stored mode with its signed integer wavevector and the
    /// Hermitian multiplicity (2 for interior `kx`, 1 on the `kx = 0` and
    /// `kx = n/2` planes).
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, [i64; 3], f64)) {
        let n = self.n;
        let nxh = self.nxh();
        let mut idx = 0;
        for kz in 0..n {
            let sz = self.signed(kz);
            for ky in 0..n {
                let sy = self.signed(ky);
                for kx in 0..nxh {
                    let w = if kx == 0 || kx == n / 2 { 1.0 } else { 2.0 };
                    f(idx, [kx as i64, sy, sz], w);
                    idx += 1;
                }
            }
        }
    }

    /// Physical wavevector `2*pi*k/L` of an integer wavevector.
    #[inline]
    pub fn wavevector(&self, k: [i64; 3]) -> [f64; 3] {
        let k0 = self.k0();
        [k[0] as f64 * k0, k[1] as f64 * k0, k[2] as f64 * k0]
    }

    /// Wavevector used for odd-order derivatives: the Nyquist component is
    /// zeroed so that derivatives of real fields stay real.
    #[inline]
    pub fn derivative_wavevector(&self, k: [i64; 3]) -> [f64; 3] {
        let k0 = self.k0();
        let c = |v: i64| if self.is_nyquist(v) { 0.0 } else { v as f64 * k0 };
        [c(k[0]), c(k[1]), c(k[2])]
    }

    /// `|2*pi*k/L|^2`.
    #[inline]
    pub fn wavenumber_sq(&self, k: [i64; 3]) -> f64 {
        let q = self.wavevector(k);
        q[0] * q[0] + q[1] * q[1] + q[2] * q[2]
    }

    /// 2/3-rule test: true when every `|k_i| <= n/3`.
    #[inline]
    pub fn is_resolved(&self, k: [i64; 3]) -> bool {
        let n = self.n as i64;
        k.iter().all(|&c| 3 * c.abs() <= n)
    }

    /// Minimum-image displacement component on the torus.
    #[inline]
    pub fn periodic_delta(&self, d: f64) -> f64 {
        let l = self.l;
        d - l * (d / l).round()
    }

    #[inline]
    pub fn periodic_distance(&self, a: [f64; 3], b: [f64; 3]) -> f64 {
        let dx = self.periodic_delta(a[0] - b[0]);
        let dy = self.periodic_delta(a[1] - b[1]);
        let dz = self.periodic_delta(a[2] - b[2]);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub(crate) fn check_len(&self, len: usize, expected: usize, what: &str) -> Result<()> {
        if len != expected {
            return Err(CoreError::SizeMismatch {
                what: what.to_string(),
                expected,
                found: len,
            });
        }
        Ok(())
    }
}

/// Per-mode wavevector data of a grid, computed once and shared.
#[derive(Debug)]
pub struct ModeTable {
    /// Signed integer wavevector.
    pub k: Vec<[i64; 3]>,
    /// Derivative wavevector (Nyquist components zeroed).
    pub qd: Vec<[f64; 3]>,
    /// `|qd|^2`.
    pub qd2: Vec<f64>,
    /// `|2 pi k / L|^2`.
    pub q2: Vec<f64>,
    /// Hermitian multiplicity.
    pub w: Vec<f64>,
    /// Inside the 2/3-rule band.
    pub resolved: Vec<bool>,
}

impl Grid {
    /// Shared wavevector table for this grid.
    pub fn modes(&self) -> Arc<ModeTable> {
        static CACHE: OnceLock<Mutex<Vec<(Grid, Arc<ModeTable>)>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((_, t)) = guard.iter().find(|(g, _)| g == self) {
            return t.clone();
        }
        let len = self.spectral_len();
        let mut t = ModeTable {
            k: Vec::with_capacity(len),
            qd: Vec::with_capacity(len),
            qd2: Vec::with_capacity(len),
            q2: Vec::with_capacity(len),
            w: Vec::with_capacity(len),
            resolved: Vec::with_capacity(len),
        };
        self.for_each_mode(|_, k, w| {
            let qd = self.derivative_wavevector(k);
            t.k.push(k);
            t.qd.push(qd);
            t.qd2.push(qd[0] * qd[0] + qd[1] * qd[1] + qd[2] * qd[2]);
            t.q2.push(self.wavenumber_sq(k));
            t.w.push(w);
            t.resolved.push(self.is_resolved(k));
        });
        let t = Arc::new(t);
        if guard.len() >= 8 {
            guard.remove(0);
        }
        guard.push((*self, t.clone()));
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(6, 1.0).is_err());
        assert!(Grid::new(9, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        assert!(Grid::new(16, -2.0).is_err());
        assert!(Grid::new(16, 2.0).is_ok());
    }

    #[test]
    fn signed_wavenumbers_cover_half_open_range() {
        let g = Grid::new(8, 1.0).unwrap();
        let ks: Vec<i64> = (0..8).map(|j| g.signed(j)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!(g.is_nyquist(-4));
    }

    #[test]
    fn hermitian_weights_count_full_spectrum() {
        let g = Grid::new(8, 1.0).unwrap();
        let mut total = 0.0;
        g.for_each_mode(|_, _, w| total += w);
        assert_eq!(total as usize, g.physical_len());
    }

    #[test]
    fn periodic_distance_wraps() {
        let g = Grid::new(8, 4.0).unwrap();
        let d = g.periodic_distance([0.1, 0.0, 0.0], [3.9, 0.0, 0.0]);
        assert!((d - 0.2).abs() < 1e-12);
    }
}
