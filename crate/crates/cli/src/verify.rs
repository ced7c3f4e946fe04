//! Self-checks of the numerical building blocks on small grids.

use std::f64::consts::PI;

use anyhow::Result;
use cascade_core::covering::{jittered_covering, lattice_covering, validate_covering};
use cascade_core::cutoffs::{PartitionOfUnity, SpaceCertificate, SpaceCutoff, TimeCutoff, DEFAULT_DELTA};
use cascade_core::spectral::{
    divergence_residual, gradient, inner, leray_project, l2_norm, Fft3, PhysicalScalar, PhysicalVector, ScalarField,
    VectorField,
};
use cascade_core::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Component {
    Cutoffs,
    Covering,
    Spectral,
}

pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
        }
    }

    pub fn pass(&self) -> bool {
        self.value <= self.limit
    }
}

pub fn run(component: Component) -> Result<Vec<Check>> {
    match component {
        Component::Cutoffs => cutoffs(),
        Component::Covering => covering(),
        Component::Spectral => spectral(),
    }
}

fn cutoffs() -> Result<Vec<Check>> {
    let g = Grid::new(32, 2.0 * PI)?;
    let members = PartitionOfUnity::new(g.l())?.on_grid(&g);
    let pou = (0..g.physical_len())
        .map(|j| (members.iter().map(|m| m[j]).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let cert = SpaceCertificate::new(DEFAULT_DELTA)?;
    let d = DEFAULT_DELTA;
    let mut excess: f64 = 0.0;
    for r in [g.r0(), g.r0() / 4.0] {
        let cut = SpaceCutoff::with_certificate([0.0; 3], r, &cert, g.l())?;
        let h = r / 32.0;
        for i in 0..=64 {
            for j in 0..=64 {
                let s = cut.sample_displacement([i as f64 * h, j as f64 * h, 0.0]);
                if s.value <= 0.0 || s.value >= 1.0 {
                    continue;
                }
                let grad = s.gradient.iter().map(|x| x * x).sum::<f64>().sqrt();
                excess = excess.max(r * grad / s.value.powf(d) / cert.c0_grad - 1.0);
                excess = excess.max(r * r * s.laplacian.abs() / s.value.powf(2.0 * d - 1.0) / cert.c0_lap - 1.0);
            }
        }
    }
    let eta = TimeCutoff::new(10.0, DEFAULT_DELTA, 0.25)?;
    let mass = (eta.moment(1.0, 4000) - eta.c_eta).abs();
    Ok(vec![
        Check::at_most("partition of unity max |sum - 1|", pou, 1e-12),
        Check::at_most("cutoff bound excess over certified C0", excess, 1e-9),
        Check::at_most("time cutoff mass vs c_eta", mass, 1e-8),
    ])
}

fn covering() -> Result<Vec<Check>> {
    let g = Grid::new(32, 2.0 * PI)?;
    let mut out = Vec::new();
    for r in [0.9, g.r0()] {
        let lat = lattice_covering(&g, r)?;
        let lv = validate_covering(&lat, &g);
        out.push(Check::at_most(
            &format!("lattice R = {r:.4} invalid"),
            (!lv.valid_for(lat.k1, lat.k2)) as u8 as f64,
            0.0,
        ));
        for seed in 0..2 {
            let j = jittered_covering(&g, r, seed)?;
            let v = validate_covering(&j, &g);
            out.push(Check::at_most(
                &format!("jittered R = {r:.4} seed {seed} invalid"),
                (!v.valid_for(j.k1, j.k2)) as u8 as f64,
                0.0,
            ));
            out.push(Check::at_most(
                &format!("jittered R = {r:.4} seed {seed} K2 / lattice K2"),
                v.k2_min as f64 / lv.k2_min as f64,
                8.0,
            ));
        }
    }
    Ok(out)
}

fn spectral() -> Result<Vec<Check>> {
    let g = Grid::new(16, 2.0 * PI)?;
    let fft = Fft3::new(g);
    let u = PhysicalVector::from_fn(g, |x| [x[1].sin() + (2.0 * x[2]).cos(), x[0].cos() * x[2].sin(), x[0].sin()]);
    let uh = VectorField::from_physical(&u, &fft)?;
    let back = uh.to_physical(&fft)?;
    let round = (0..3)
        .flat_map(|c| u.comp(c).iter().zip(back.comp(c)).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let parseval = (inner(&uh, &uh) - u.inner(&u)).abs() / u.inner(&u);
    let w = PhysicalVector::from_fn(g, |x| [x[0].sin() + x[1].sin(), x[1].cos(), 0.0]);
    let wh = VectorField::from_physical(&w, &fft)?;
    let proj = leray_project(&wh);
    let div = divergence_residual(&proj);
    let s = PhysicalScalar::from_fn(g, |x| (3.0 * x[0]).sin());
    let grad = gradient(&ScalarField::from_physical(&s, &fft)?).to_physical(&fft)?;
    let dx = (0..g.physical_len())
        .map(|j| {
            let n = g.n();
            let x = g.point(j % n, (j / n) % n, j / (n * n));
            (grad.comp(0)[j] - 3.0 * (3.0 * x[0]).cos()).abs()
        })
        .fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("transform round trip max error", round, 1e-13),
        Check::at_most("Parseval relative defect", parseval, 1e-13),
        Check::at_most("divergence after projection", div, 1e-13),
        Check::at_most("spectral derivative max error", dx, 1e-12),
        Check::at_most("projected norm / original norm", l2_norm(&proj) / l2_norm(&wh), 1.0),
    ])
}
