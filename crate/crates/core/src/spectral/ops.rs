//! Differential operators, Leray projection, Stokes-operator powers,
//! the projected advection term and pressure recovery.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fft::Fft3;
use super::field::{PhysicalScalar, PhysicalVector, ScalarField, VectorField};
use crate::error::{CoreError, Result};
use crate::grid::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative divergence tolerance accepted by operators that require a
/// solenoidal input.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-9;

/// `L^2` inner product computed from the spectral coefficients,
/// `L^3 sum_k w_k Re(a_hat(k) . conj(b_hat(k)))`.
pub fn inner(a: &VectorField, b: &VectorField) -> f64 {
    let g = *a.grid();
    let t = g.modes();
    let mut s = 0.0;
    for (idx, w) in t.w.iter().enumerate() {
        let mut m = 0.0;
        for i in 0..3 {
            let (x, y) = (a.comp(i)[idx], b.comp(i)[idx]);
            m += x.re * y.re + x.im * y.im;
        }
        s += w * m;
    }
    s * g.volume()
}

pub fn scalar_inner(a: &ScalarField, b: &ScalarField) -> f64 {
    let g = *a.grid();
    let t = g.modes();
    let mut s = 0.0;
    for (idx, w) in t.w.iter().enumerate() {
        let (x, y) = (a.values()[idx], b.values()[idx]);
        s += w * (x.re * y.re + x.im * y.im);
    }
    s * g.volume()
}

pub fn l2_norm(v: &VectorField) -> f64 {
    inner(v, v).max(0.0).sqrt()
}

/// Removes the gradient part of every mode:
/// `v(k) <- v(k) - k (k . v(k)) / |k|^2`. The zero mode is left alone.
pub fn leray_project(v: &VectorField) -> VectorField {
    let mut out = v.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(v: &mut VectorField) {
    let t = v.grid().modes();
    let [c0, c1, c2] = v.comps_mut();
    for idx in 0..t.qd2.len() {
        let q2 = t.qd2[idx];
        if q2 == 0.0 {
            continue;
        }
        let q = t.qd[idx];
        let s = (c0[idx] * q[0] + c1[idx] * q[1] + c2[idx] * q[2]) / q2;
        c0[idx] -= s * q[0];
        c1[idx] -= s * q[1];
        c2[idx] -= s * q[2];
    }
}

/// Multiplies each mode by `|2 pi k / L|^(2 alpha)`, i.e. applies `A^alpha`.
pub fn stokes_power(v: &VectorField, alpha: f64) -> Result<VectorField> {
    check_power(v, alpha)?;
    let mut out = v.clone();
    if alpha == 0.0 {
        return Ok(out);
    }
    let t = v.grid().modes();
    for c in out.comps_mut() {
        for (z, &q2) in c.iter_mut().zip(&t.q2) {
            *z *= if q2 == 0.0 { 0.0 } else { q2.powf(alpha) };
        }
    }
    Ok(out)
}

/// `||A^(alpha/2) v||`.
pub fn sobolev_norm(v: &VectorField, alpha: f64) -> Result<f64> {
    check_power(v, alpha)?;
    Ok(sobolev_norm_sq_unchecked(v, alpha).sqrt())
}

pub(crate) fn sobolev_norm_sq_unchecked(v: &VectorField, alpha: f64) -> f64 {
    let g = *v.grid();
    let t = g.modes();
    let mut s = 0.0;
    for idx in 0..t.q2.len() {
        let q2 = t.q2[idx];
        let f = if alpha == 0.0 {
            1.0
        } else if q2 == 0.0 {
            continue;
        } else if alpha == 1.0 {
            q2
        } else if alpha == -1.0 {
            1.0 / q2
        } else {
            q2.powf(alpha)
        };
        let m = v.comp(0)[idx].norm_sqr() + v.comp(1)[idx].norm_sqr() + v.comp(2)[idx].norm_sqr();
        s += t.w[idx] * f * m;
    }
    s * g.volume()
}

fn check_power(v: &VectorField, alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(CoreError::arg("Stokes power must be finite"));
    }
    if alpha < 0.0 && !v.is_mean_zero() {
        return Err(CoreError::arg(
            "negative Stokes powers need a mean-zero field",
        ));
    }
    Ok(())
}

/// 2/3-rule truncation: zeroes every mode with some `|k_i| > N/3`.
pub fn dealias(v: &VectorField) -> VectorField {
    let mut out = v.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(v: &mut VectorField) {
    let t = v.grid().modes();
    for c in v.comps_mut() {
        for (z, &ok) in c.iter_mut().zip(&t.resolved) {
            if !ok {
                *z = ZERO;
            }
        }
    }
}

pub fn dealias_scalar_in_place(p: &mut ScalarField) {
    let t = p.grid().modes();
    for (z, &ok) in p.values_mut().iter_mut().zip(&t.resolved) {
        if !ok {
            *z = ZERO;
        }
    }
}

/// `max_k |q . v(k)| / (|q| max_k' |v(k')|)`; zero for the zero field.
pub fn divergence_residual(v: &VectorField) -> f64 {
    let vmax = v.max_abs();
    if vmax == 0.0 {
        return 0.0;
    }
    let t = v.grid().modes();
    let mut worst: f64 = 0.0;
    for idx in 0..t.qd2.len() {
        let q2 = t.qd2[idx];
        if q2 == 0.0 {
            continue;
        }
        let q = t.qd[idx];
        let d = (v.comp(0)[idx] * q[0] + v.comp(1)[idx] * q[1] + v.comp(2)[idx] * q[2]).norm_sqr() / q2;
        worst = worst.max(d);
    }
    worst.sqrt() / vmax
}

pub fn require_solenoidal(v: &VectorField) -> Result<()> {
    let r = divergence_residual(v);
    if r > DIVERGENCE_TOLERANCE {
        return Err(CoreError::NotDivergenceFree { residual: r });
    }
    Ok(())
}

/// Spectral divergence `i q . v`.
pub fn divergence(v: &VectorField) -> ScalarField {
    let t = v.grid().modes();
    let mut out = ScalarField::zeros(*v.grid());
    for (idx, o) in out.values_mut().iter_mut().enumerate() {
        let q = t.qd[idx];
        *o = I * (v.comp(0)[idx] * q[0] + v.comp(1)[idx] * q[1] + v.comp(2)[idx] * q[2]);
    }
    out
}

/// Spectral gradient `i q s`.
pub fn gradient(s: &ScalarField) -> VectorField {
    let t = s.grid().modes();
    let mut out = VectorField::zeros(*s.grid());
    let [o0, o1, o2] = out.comps_mut();
    for (idx, v) in s.values().iter().enumerate() {
        let q = t.qd[idx];
        let c = I * *v;
        o0[idx] = c * q[0];
        o1[idx] = c * q[1];
        o2[idx] = c * q[2];
    }
    out
}

/// Spectral curl `i q x v`.
pub fn curl(v: &VectorField) -> VectorField {
    let t = v.grid().modes();
    let mut out = VectorField::zeros(*v.grid());
    let [o0, o1, o2] = out.comps_mut();
    let (a, b, c) = (v.comp(0), v.comp(1), v.comp(2));
    for idx in 0..t.qd.len() {
        let q = t.qd[idx];
        o0[idx] = I * (c[idx] * q[1] - b[idx] * q[2]);
        o1[idx] = I * (a[idx] * q[2] - c[idx] * q[0]);
        o2[idx] = I * (b[idx] * q[0] - a[idx] * q[1]);
    }
    out
}

/// Physical samples of the velocity gradient, `grad[i][j] = d_j u_i`.
pub fn velocity_gradient(u: &VectorField, fft: &Fft3) -> Result<[[Vec<f64>; 3]; 3]> {
    let g = *u.grid();
    let t = g.modes();
    let mut spec = vec![ZERO; g.spectral_len()];
    let mut out: [[Vec<f64>; 3]; 3] = Default::default();
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            for (idx, s) in spec.iter_mut().enumerate() {
                *s = I * t.qd[idx][j] * u.comp(i)[idx];
            }
            let mut phys = vec![0.0; g.physical_len()];
            fft.inverse(&spec, &mut phys)?;
            *slot = phys;
        }
    }
    Ok(out)
}

/// Evaluation form of the quadratic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonlinearForm {
    /// `omega x u`; differs from the convective form by a gradient, which
    /// the projection removes. Nine transforms per evaluation.
    #[default]
    Rotational,
    /// `(u . grad) u` evaluated directly.
    Convective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonlinearOptions {
    pub form: NonlinearForm,
    /// Apply the 2/3 rule to the product before projecting.
    pub dealias: bool,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        Self {
            form: NonlinearForm::Rotational,
            dealias: true,
        }
    }
}

/// `B(u, u) = P_L (u . grad) u`, pseudo-spectral with 2/3 dealiasing.
pub fn nonlinear_term(u: &VectorField, fft: &Fft3) -> Result<VectorField> {
    nonlinear_term_with(u, fft, NonlinearOptions::default())
}

pub fn nonlinear_term_with(
    u: &VectorField,
    fft: &Fft3,
    opts: NonlinearOptions,
) -> Result<VectorField> {
    let mut out = VectorField::zeros(*u.grid());
    nonlinear_term_into(u, fft, opts, &mut NonlinearWorkspace::default(), &mut out)?;
    Ok(out)
}

/// Scratch buffers for [`nonlinear_term_into`]; sized on first use.
#[derive(Debug, Default, Clone)]
pub struct NonlinearWorkspace {
    phys: [Vec<f64>; 7],
    spec: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl NonlinearWorkspace {
    fn fit(&mut self, g: &Grid) {
        for p in &mut self.phys {
            p.resize(g.physical_len(), 0.0);
        }
        self.spec.resize(g.spectral_len(), ZERO);
    }
}

/// Allocation-free form of [`nonlinear_term_with`] writing into `out`.
pub fn nonlinear_term_into(
    u: &VectorField,
    fft: &Fft3,
    opts: NonlinearOptions,
    ws: &mut NonlinearWorkspace,
    out: &mut VectorField,
) -> Result<()> {
    require_solenoidal(u)?;
    u.check_same(out)?;
    let g = *u.grid();
    let t = g.modes();
    ws.fit(&g);
    let NonlinearWorkspace { phys, spec, work } = ws;
    let (vel, rest) = phys.split_at_mut(3);
    let (rest, extra) = rest.split_at_mut(3);
    let deriv = &mut extra[0];
    for i in 0..3 {
        fft.inverse_using(u.comp(i), &mut vel[i], work)?;
    }
    match opts.form {
        NonlinearForm::Rotational => {
            let (a, b, c) = (u.comp(0), u.comp(1), u.comp(2));
            for i in 0..3 {
                for (idx, s) in spec.iter_mut().enumerate() {
                    let q = t.qd[idx];
                    *s = I * match i {
                        0 => c[idx] * q[1] - b[idx] * q[2],
                        1 => a[idx] * q[2] - c[idx] * q[0],
                        _ => b[idx] * q[0] - a[idx] * q[1],
                    };
                }
                fft.inverse_using(spec, &mut rest[i], work)?;
            }
            let (w0, w12) = rest.split_at_mut(1);
            let (w1, w2) = w12.split_at_mut(1);
            let (w0, w1, w2) = (&mut w0[0], &mut w1[0], &mut w2[0]);
            let (u0, u1, u2) = (&vel[0], &vel[1], &vel[2]);
            for j in 0..g.physical_len() {
                let (a0, a1, a2) = (w0[j], w1[j], w2[j]);
                let (b0, b1, b2) = (u0[j], u1[j], u2[j]);
                w0[j] = a1 * b2 - a2 * b1;
                w1[j] = a2 * b0 - a0 * b2;
                w2[j] = a0 * b1 - a1 * b0;
            }
        }
        NonlinearForm::Convective => {
            for r in rest.iter_mut() {
                r.iter_mut().for_each(|x| *x = 0.0);
            }
            for i in 0..3 {
                for j in 0..3 {
                    for (idx, s) in spec.iter_mut().enumerate() {
                        *s = I * t.qd[idx][j] * u.comp(i)[idx];
                    }
                    fft.inverse_using(spec, deriv, work)?;
                    for (d, (&uj, &dij)) in rest[i].iter_mut().zip(vel[j].iter().zip(deriv.iter())) {
                        *d += uj * dij;
                    }
                }
            }
        }
    }
    for i in 0..3 {
        fft.forward(&rest[i], out.comp_mut(i))?;
    }
    let [c0, c1, c2] = out.comps_mut();
    for idx in 0..t.qd2.len() {
        if opts.dealias && !t.resolved[idx] {
            c0[idx] = ZERO;
            c1[idx] = ZERO;
            c2[idx] = ZERO;
            continue;
        }
        let q2 = t.qd2[idx];
        if q2 == 0.0 {
            continue;
        }
        let q = t.qd[idx];
        let s = (c0[idx] * q[0] + c1[idx] * q[1] + c2[idx] * q[2]) / q2;
        c0[idx] -= s * q[0];
        c1[idx] -= s * q[1];
        c2[idx] -= s * q[2];
    }
    out.remove_mean();
    Ok(())
}

/// Spectral coefficients of `(u . grad) u` without projection or truncation.
pub fn advection_unprojected(u: &VectorField, fft: &Fft3) -> Result<VectorField> {
    let g = *u.grid();
    let up = u.to_physical(fft)?;
    let grad = velocity_gradient(u, fft)?;
    let mut c = PhysicalVector::zeros(g);
    for i in 0..3 {
        let dst = c.comp_mut(i);
        for (j, d) in dst.iter_mut().enumerate() {
            *d = up.comp(0)[j] * grad[i][0][j]
                + up.comp(1)[j] * grad[i][1][j]
                + up.comp(2)[j] * grad[i][2][j];
        }
    }
    VectorField::from_physical(&c, fft)
}

/// Mean-zero pressure solving `-Laplace p = div((u . grad) u)`.
pub fn pressure_from_velocity(u: &VectorField, fft: &Fft3) -> Result<ScalarField> {
    let g = *u.grid();
    let t = g.modes();
    let mut adv = advection_unprojected(u, fft)?;
    dealias_in_place(&mut adv);
    let mut p = ScalarField::zeros(g);
    for (idx, o) in p.values_mut().iter_mut().enumerate() {
        let q2 = t.qd2[idx];
        if q2 == 0.0 {
            continue;
        }
        let q = t.qd[idx];
        let m = adv.mode(idx);
        *o = I * (m[0] * q[0] + m[1] * q[1] + m[2] * q[2]) / q2;
    }
    Ok(p)
}

/// Pressure samples on the grid.
pub fn pressure_physical(u: &VectorField, fft: &Fft3) -> Result<PhysicalScalar> {
    pressure_from_velocity(u, fft)?.to_physical(fft)
}

/// Makes the `kx = 0` and `kx = N/2` planes Hermitian so the coefficients
/// describe a real field.
pub fn enforce_hermitian(v: &mut VectorField) {
    let g = *v.grid();
    let n = g.n();
    for kx in [0, n / 2] {
        for kz in 0..n {
            for ky in 0..n {
                let my = (n - ky) % n;
                let mz = (n - kz) % n;
                let a = g.spectral_index(kx, ky, kz);
                let b = g.spectral_index(kx, my, mz);
                if a == b {
                    for i in 0..3 {
                        v.comp_mut(i)[a].im = 0.0;
                    }
                } else if a < b {
                    for i in 0..3 {
                        let c = v.comp(i)[a];
                        v.comp_mut(i)[b] = c.conj();
                    }
                }
            }
        }
    }
}

/// Random solenoidal field supported on `k_lo <= |k| < k_hi` within the
/// dealiased range, normalized to unit `L^2` norm. Deterministic per seed.
pub fn random_solenoidal(grid: Grid, k_lo: f64, k_hi: f64, seed: u64) -> Result<VectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = VectorField::zeros(grid);
    let mut any = false;
    grid.for_each_mode(|idx, k, _| {
        let kk = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        if kk >= k_lo && kk < k_hi && kk > 0.0 && grid.is_resolved(k) && !grid.is_nyquist(k[0]) {
            let mut m = [ZERO; 3];
            for c in &mut m {
                *c = Complex64::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
            }
            v.set_mode(idx, m);
            any = true;
        }
    });
    if !any {
        return Err(CoreError::arg(format!(
            "no resolved modes with {k_lo} <= |k| < {k_hi}"
        )));
    }
    enforce_hermitian(&mut v);
    leray_project_in_place(&mut v);
    v.remove_mean();
    let nrm = l2_norm(&v);
    if nrm == 0.0 {
        return Err(CoreError::arg("random field vanished after projection"));
    }
    v.scale(1.0 / nrm);
    Ok(v)
}
