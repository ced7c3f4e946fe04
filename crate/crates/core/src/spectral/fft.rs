//! Three-dimensional real FFT on the periodic grid.
//!
//! Forward transform is normalized so that `u(x) = sum_k u_hat(k) exp(i q.x)`,
//! i.e. `u_hat = (1/N^3) sum_x u(x) exp(-i q.x)`.

use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::grid::Grid;

#[derive(Clone)]
pub struct Fft3 {
    grid: Grid,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("grid", &self.grid).finish()
    }
}

impl Fft3 {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n();
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        Self {
            grid,
            r2c: rp.plan_fft_forward(n),
            c2r: rp.plan_fft_inverse(n),
            fwd: cp.plan_fft_forward(n),
            inv: cp.plan_fft_inverse(n),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Real samples to normalized spectral coefficients.
    pub fn forward(&self, input: &[f64], out: &mut [Complex64]) -> Result<()> {
        let g = &self.grid;
        g.check_len(input.len(), g.physical_len(), "physical input")?;
        g.check_len(out.len(), g.spectral_len(), "spectral output")?;
        let n = g.n();
        let nxh = g.nxh();

        let mut line = vec![0.0; n];
        let mut scratch = self.r2c.make_scratch_vec();
        for row in 0..n * n {
            line.copy_from_slice(&input[row * n..(row + 1) * n]);
            self.r2c
                .process_with_scratch(&mut line, &mut out[row * nxh..(row + 1) * nxh], &mut scratch)
                .expect("r2c lengths are fixed by the plan");
        }
        self.along_y(out, &self.fwd);
        self.along_z(out, &self.fwd);

        let scale = 1.0 / (n * n * n) as f64;
        for c in out.iter_mut() {
            *c *= scale;
        }
        Ok(())
    }

    /// Spectral coefficients to real samples. The input is left untouched.
    pub fn inverse(&self, input: &[Complex64], out: &mut [f64]) -> Result<()> {
        let mut work = Vec::new();
        self.inverse_using(input, out, &mut work)
    }

    /// [`Fft3::inverse`] with a caller-owned work buffer, reused across calls.
    pub fn inverse_using(
        &self,
        input: &[Complex64],
        out: &mut [f64],
        work: &mut Vec<Complex64>,
    ) -> Result<()> {
        let g = &self.grid;
        g.check_len(input.len(), g.spectral_len(), "spectral input")?;
        g.check_len(out.len(), g.physical_len(), "physical output")?;
        let n = g.n();
        let nxh = g.nxh();

        work.clear();
        work.extend_from_slice(input);
        let work = &mut work[..];
        self.along_z(work, &self.inv);
        self.along_y(work, &self.inv);

        let mut line = vec![Complex64::new(0.0, 0.0); nxh];
        let mut scratch = self.c2r.make_scratch_vec();
        for row in 0..n * n {
            line.copy_from_slice(&work[row * nxh..(row + 1) * nxh]);
            // A Hermitian line has real DC and Nyquist entries; drop any
            // rounding residue so the c2r transform accepts it.
            line[0].im = 0.0;
            line[nxh - 1].im = 0.0;
            self.c2r
                .process_with_scratch(&mut line, &mut out[row * n..(row + 1) * n], &mut scratch)
                .expect("c2r lengths are fixed by the plan");
        }
        Ok(())
    }

    fn along_y(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        let nxh = self.grid.nxh();
        let mut buf = vec![Complex64::new(0.0, 0.0); n * nxh];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for kz in 0..n {
            let plane = &mut data[kz * n * nxh..(kz + 1) * n * nxh];
            // Transpose (ky, kx) -> (kx, ky) so each y-line is contiguous.
            for ky in 0..n {
                for kx in 0..nxh {
                    buf[kx * n + ky] = plane[ky * nxh + kx];
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for ky in 0..n {
                for kx in 0..nxh {
                    plane[ky * nxh + kx] = buf[kx * n + ky];
                }
            }
        }
    }

    fn along_z(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        let nxh = self.grid.nxh();
        let stride = n * nxh;
        let mut buf = vec![Complex64::new(0.0, 0.0); n * nxh];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for ky in 0..n {
            for kz in 0..n {
                let src = &data[kz * stride + ky * nxh..kz * stride + (ky + 1) * nxh];
                for kx in 0..nxh {
                    buf[kx * n + kz] = src[kx];
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for kz in 0..n {
                let dst = &mut data[kz * stride + ky * nxh..kz * stride + (ky + 1) * nxh];
                for kx in 0..nxh {
                    dst[kx] = buf[kx * n + kz];
                }
            }
        }
    }
}
