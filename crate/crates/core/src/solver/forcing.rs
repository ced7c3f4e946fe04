//! Right-hand-side forcing: static fields and manufactured solutions.

use std::borrow::Cow;

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::Grid;
use crate::spectral::{nonlinear_term, Fft3, PhysicalVector, VectorField};

/// Force applied by the integrator.
#[derive(Debug, Clone)]
pub enum Forcing {
    None,
    /// Time-independent force (the setting of every theorem check).
    Static(VectorField),
    /// Force that makes a prescribed field an exact solution.
    Manufactured(ManufacturedSolution),
}

impl Forcing {
    pub fn at(&self, t: f64, fft: &Fft3) -> Result<Option<Cow<'_, VectorField>>> {
        Ok(match self {
            Forcing::None => None,
            Forcing::Static(f) => Some(Cow::Borrowed(f)),
            Forcing::Manufactured(m) => Some(Cow::Owned(m.force(t, fft)?)),
        })
    }

    pub fn is_static(&self) -> bool {
        matches!(self, Forcing::Static(_) | Forcing::None)
    }
}

/// `u*(t) = a(t) T(x) + b(t) W(x)` with the Taylor-Green cell
/// `T = (cos x sin y, -sin x cos y, 0)` and its rotated copy
/// `W = (0, cos y sin z, -sin y cos z)` (coordinates scaled by `2 pi / L`),
/// `a(t) = a0 (1 + sin(omega t) / 2)`, `b(t) = b0 cos(omega t)`.
/// Both cells are eigenfunctions of `A` with eigenvalue `2 k0^2`; the
/// compensating force is `u*_t + nu A u* + B(u*, u*)`.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    pub grid: Grid,
    pub nu: f64,
    pub a0: f64,
    pub b0: f64,
    pub omega: f64,
    tg: VectorField,
    w: VectorField,
}

impl ManufacturedSolution {
    pub fn new(grid: Grid, nu: f64, a0: f64, b0: f64, omega: f64, fft: &Fft3) -> Result<Self> {
        let k = grid.k0();
        let tg = PhysicalVector::from_fn(grid, |x| {
            [
                (k * x[0]).cos() * (k * x[1]).sin(),
                -(k * x[0]).sin() * (k * x[1]).cos(),
                0.0,
            ]
        });
        let w = PhysicalVector::from_fn(grid, |x| {
            [
                0.0,
                (k * x[1]).cos() * (k * x[2]).sin(),
                -(k * x[1]).sin() * (k * x[2]).cos(),
            ]
        });
        let mut tg = VectorField::from_physical(&tg, fft)?;
        let mut w = VectorField::from_physical(&w, fft)?;
        clean(&mut tg);
        clean(&mut w);
        Ok(Self {
            grid,
            nu,
            a0,
            b0,
            omega,
            tg,
            w,
        })
    }

    fn coeffs(&self, t: f64) -> (f64, f64, f64, f64) {
        let (s, c) = (self.omega * t).sin_cos();
        let a = self.a0 * (1.0 + 0.5 * s);
        let da = self.a0 * 0.5 * self.omega * c;
        let b = self.b0 * c;
        let db = -self.b0 * self.omega * s;
        (a, da, b, db)
    }

    /// Eigenvalue of both cells under `A`.
    pub fn eigenvalue(&self) -> f64 {
        2.0 * self.grid.k0().powi(2)
    }

    pub fn velocity(&self, t: f64) -> VectorField {
        let (a, _, b, _) = self.coeffs(t);
        let mut u = self.tg.scaled(a);
        u.axpy(b, &self.w).expect("cells share the grid");
        u
    }

    pub fn force(&self, t: f64, fft: &Fft3) -> Result<VectorField> {
        let (a, da, b, db) = self.coeffs(t);
        let lam = self.nu * self.eigenvalue();
        let u = self.velocity(t);
        let mut f = nonlinear_term(&u, fft)?;
        f.axpy(da + lam * a, &self.tg)?;
        f.axpy(db + lam * b, &self.w)?;
        Ok(f)
    }
}

/// Drops transform round-off below `1e-15` of the largest coefficient.
fn clean(v: &mut VectorField) {
    let m = v.max_abs();
    for c in v.comps_mut() {
        for z in c.iter_mut() {
            if z.norm() < 1e-15 * m {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
}
