//! Integrating-factor low-storage Runge-Kutta stepping for
//! `u_t + nu A u + B(u, u) = f`.
//!
//! The viscous term is absorbed exactly through `v(s) = exp(nu |q|^2 s) u(t_n + s)`;
//! the remaining `f - B(u, u)` is advanced with Williamson's third-order
//! two-register scheme.

use std::cell::RefCell;

use num_complex::Complex64;

use super::forcing::Forcing;
use crate::error::{CoreError, Result};
use crate::spectral::ops::dealias_in_place;
use crate::spectral::{nonlinear_term_into, Fft3, NonlinearOptions, NonlinearWorkspace, VectorField};

const RK_A: [f64; 3] = [0.0, -5.0 / 9.0, -153.0 / 128.0];
const RK_B: [f64; 3] = [1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0];
const RK_C: [f64; 3] = [0.0, 1.0 / 3.0, 3.0 / 4.0];

#[derive(Debug, Clone)]
pub struct Integrator {
    fft: Fft3,
    nu: f64,
    opts: NonlinearOptions,
    linear_only: bool,
    /// `|q|^2` per stored mode.
    q2: Vec<f64>,
    ws: RefCell<NonlinearWorkspace>,
}

impl Integrator {
    pub fn new(fft: Fft3, nu: f64) -> Self {
        let g = *fft.grid();
        let q2 = g.modes().q2.clone();
        Self {
            fft,
            nu,
            opts: NonlinearOptions::default(),
            linear_only: false,
            q2,
            ws: RefCell::default(),
        }
    }

    pub fn with_nonlinear(mut self, opts: NonlinearOptions) -> Self {
        self.opts = opts;
        self
    }

    /// Drops `B(u, u)`; used to isolate the linear part.
    pub fn linear_only(mut self, on: bool) -> Self {
        self.linear_only = on;
        self
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `f(t) - B(u, u)`, dealiased and solenoidal.
    pub fn explicit_rhs(&self, u: &VectorField, t: f64, forcing: &Forcing) -> Result<VectorField> {
        let mut g = VectorField::zeros(*u.grid());
        self.explicit_rhs_into(u, t, forcing, &mut g)?;
        Ok(g)
    }

    fn explicit_rhs_into(
        &self,
        u: &VectorField,
        t: f64,
        forcing: &Forcing,
        out: &mut VectorField,
    ) -> Result<()> {
        if self.linear_only {
            out.comps_mut().iter_mut().for_each(|c| c.fill(Complex64::new(0.0, 0.0)));
        } else {
            let mut ws = self.ws.borrow_mut();
            nonlinear_term_into(u, &self.fft, self.opts, &mut ws, out)?;
            out.scale(-1.0);
        }
        if let Some(f) = forcing.at(t, &self.fft)? {
            out.axpy(1.0, &f)?;
        }
        dealias_in_place(out);
        Ok(())
    }

    /// Multiplies each mode by `exp(sign * nu |q|^2 s)`.
    fn propagate(&self, v: &mut VectorField, s: f64) {
        if s == 0.0 {
            return;
        }
        let nu = self.nu;
        let [c0, c1, c2] = v.comps_mut();
        for (idx, &q2) in self.q2.iter().enumerate() {
            let f = (nu * q2 * s).exp();
            c0[idx] *= f;
            c1[idx] *= f;
            c2[idx] *= f;
        }
    }

    /// Advances `u` from `t` to `t + dt` in place.
    pub fn step(&self, u: &mut VectorField, t: f64, dt: f64, forcing: &Forcing) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CoreError::arg(format!("time step must be positive, got {dt}")));
        }
        let g = *u.grid();
        let mut v = u.clone();
        let mut du = VectorField::zeros(g);
        let mut stage = VectorField::zeros(g);
        let mut rhs = VectorField::zeros(g);
        for i in 0..3 {
            let s = RK_C[i] * dt;
            for (a, b) in stage.comps_mut().iter_mut().zip(v.comps()) {
                a.copy_from_slice(b);
            }
            self.propagate(&mut stage, -s);
            self.explicit_rhs_into(&stage, t + s, forcing, &mut rhs)?;
            self.propagate(&mut rhs, s);
            for (a, b) in du.comps_mut().iter_mut().zip(rhs.comps()) {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = *x * RK_A[i] + *y * dt;
                }
            }
            v.axpy(RK_B[i], &du)?;
        }
        self.propagate(&mut v, -dt);
        v.remove_mean();
        *u = v;
        Ok(())
    }

    /// Largest stable step for the CFL number `cfl`, `cfl dx / max(|u_x|+|u_y|+|u_z|)`.
    /// Infinite for the zero field.
    pub fn cfl_dt(&self, u: &VectorField, cfl: f64) -> Result<(f64, f64)> {
        let up = u.to_physical(&self.fft)?;
        let speed = up.max_l1_speed();
        let dt = if speed > 0.0 {
            cfl * self.fft.grid().dx() / speed
        } else {
            f64::INFINITY
        };
        Ok((dt, speed))
    }
}

pub(crate) fn all_finite(v: &VectorField) -> bool {
    v.comps()
        .iter()
        .all(|c| c.iter().all(|z: &Complex64| z.re.is_finite() && z.im.is_finite()))
}
