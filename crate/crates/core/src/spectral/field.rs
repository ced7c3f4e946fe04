//! Vector and scalar fields in spectral and physical representations.
//!
//! The representation is carried by the type: [`VectorField`] and
//! [`ScalarField`] hold spectral coefficients, [`PhysicalVector`] and
//! [`PhysicalScalar`] hold grid samples.

use num_complex::Complex64;

use super::fft::Fft3;
use crate::error::{CoreError, Result};
use crate::grid::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Spectral coefficients of a three-component field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: [Vec<Complex64>; 3],
}

/// Spectral coefficients of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<Complex64>,
}

/// Grid samples of a three-component field, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalVector {
    grid: Grid,
    comps: [Vec<f64>; 3],
}

/// Grid samples of a scalar field, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalScalar {
    grid: Grid,
    values: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.spectral_len();
        Self {
            grid,
            comps: [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]],
        }
    }

    pub fn from_components(grid: Grid, comps: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in &comps {
            grid.check_len(c.len(), grid.spectral_len(), "vector component")?;
        }
        Ok(Self { grid, comps })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn comp(&self, i: usize) -> &[Complex64] {
        &self.comps[i]
    }

    #[inline]
    pub fn comp_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.comps[i]
    }

    #[inline]
    pub fn comps(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    #[inline]
    pub fn comps_mut(&mut self) -> &mut [Vec<Complex64>; 3] {
        &mut self.comps
    }

    pub fn into_components(self) -> [Vec<Complex64>; 3] {
        self.comps
    }

    /// Coefficient vector of mode `idx`.
    #[inline]
    pub fn mode(&self, idx: usize) -> [Complex64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    #[inline]
    pub fn set_mode(&mut self, idx: usize, v: [Complex64; 3]) {
        for (c, x) in self.comps.iter_mut().zip(v) {
            c[idx] = x;
        }
    }

    pub fn from_physical(u: &PhysicalVector, fft: &Fft3) -> Result<Self> {
        let g = *u.grid();
        let mut out = Self::zeros(g);
        for i in 0..3 {
            fft.forward(u.comp(i), &mut out.comps[i])?;
        }
        Ok(out)
    }

    pub fn to_physical(&self, fft: &Fft3) -> Result<PhysicalVector> {
        let mut out = PhysicalVector::zeros(self.grid);
        for i in 0..3 {
            fft.inverse(&self.comps[i], &mut out.comps[i])?;
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|z| *z == ZERO))
    }

    /// True when the zero wavevector carries no coefficient.
    pub fn is_mean_zero(&self) -> bool {
        self.comps.iter().all(|c| c[0] == ZERO)
    }

    pub fn remove_mean(&mut self) {
        for c in &mut self.comps {
            c[0] = ZERO;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.comps {
            for z in c.iter_mut() {
                *z *= s;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &VectorField) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * s;
            }
        }
        Ok(())
    }

    /// Largest coefficient modulus over all components.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub(crate) fn check_same(&self, other: &VectorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(CoreError::arg("fields live on different grids"));
        }
        Ok(())
    }
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![ZERO; grid.spectral_len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        grid.check_len(values.len(), grid.spectral_len(), "scalar values")?;
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn from_physical(p: &PhysicalScalar, fft: &Fft3) -> Result<Self> {
        let mut out = Self::zeros(*p.grid());
        fft.forward(p.values(), &mut out.values)?;
        Ok(out)
    }

    pub fn to_physical(&self, fft: &Fft3) -> Result<PhysicalScalar> {
        let mut out = PhysicalScalar::zeros(self.grid);
        fft.inverse(&self.values, &mut out.values)?;
        Ok(out)
    }

    pub fn is_mean_zero(&self) -> bool {
        self.values[0] == ZERO
    }
}

impl PhysicalVector {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.physical_len();
        Self {
            grid,
            comps: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
        }
    }

    pub fn from_components(grid: Grid, comps: [Vec<f64>; 3]) -> Result<Self> {
        for c in &comps {
            grid.check_len(c.len(), grid.physical_len(), "vector component")?;
        }
        Ok(Self { grid, comps })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, mut f: impl FnMut([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        let n = grid.n();
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    let idx = grid.physical_index(ix, iy, iz);
                    let v = f(grid.point(ix, iy, iz));
                    for i in 0..3 {
                        out.comps[i][idx] = v[i];
                    }
                }
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn comp(&self, i: usize) -> &[f64] {
        &self.comps[i]
    }

    #[inline]
    pub fn comp_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.comps[i]
    }

    #[inline]
    pub fn comps(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    /// Rectangle-rule `L^2` inner product.
    pub fn inner(&self, other: &PhysicalVector) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            s += self.comps[i]
                .iter()
                .zip(&other.comps[i])
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
        s * self.grid.cell_volume()
    }

    /// Largest pointwise `|u_x| + |u_y| + |u_z|`, the CFL speed.
    pub fn max_l1_speed(&self) -> f64 {
        (0..self.grid.physical_len())
            .map(|j| self.comps[0][j].abs() + self.comps[1][j].abs() + self.comps[2][j].abs())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }
}

impl PhysicalScalar {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.physical_len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len(), grid.physical_len(), "scalar values")?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        let n = grid.n();
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    out.values[grid.physical_index(ix, iy, iz)] = f(grid.point(ix, iy, iz));
                }
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_round_trips_to_zero() {
        let g = Grid::new(8, 1.0).unwrap();
        let fft = Fft3::new(g);
        let u = PhysicalVector::zeros(g);
        let s = VectorField::from_physical(&u, &fft).unwrap();
        assert!(s.is_zero());
        assert_eq!(s.to_physical(&fft).unwrap(), u);
    }

    #[test]
    fn axpy_rejects_foreign_grid() {
        let a = Grid::new(8, 1.0).unwrap();
        let b = Grid::new(8, 2.0).unwrap();
        let mut u = VectorField::zeros(a);
        assert!(u.axpy(1.0, &VectorField::zeros(b)).is_err());
    }
}
