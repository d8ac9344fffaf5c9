//! ψ(v) = 1/2 + (v+1)/(v-1) between the unit disk and the half plane Re z ≤ 1/2,
//! transported symbols κ = ρ∘ψ and boundary grids.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core_functions::{rho, FactorSpec};
use crate::error::{QiError, Result};

const INF_TOL: f64 = 1e-14;

pub fn psi(v: Complex64) -> Result<Complex64> {
    let d = v - 1.0;
    if d.norm() < INF_TOL {
        return Err(QiError::PointAtInfinity(v));
    }
    Ok(0.5 + (v + 1.0) / d)
}

pub fn psi_inv(z: Complex64) -> Result<Complex64> {
    let d = 2.0 * z - 3.0;
    if d.norm() < INF_TOL {
        return Err(QiError::PointAtInfinity(z));
    }
    Ok((2.0 * z + 1.0) / d)
}

/// ψ(e^{iθ}) = 1/2 - i cot(θ/2), exact on the critical line.
pub fn psi_boundary(theta: f64) -> Complex64 {
    Complex64::new(0.5, -1.0 / (0.5 * theta).tan())
}

/// θ ∈ (0, 2π) with ψ(e^{iθ}) = 1/2 + is.
pub fn theta_of_s(s: f64) -> f64 {
    2.0 * 1f64.atan2(-s)
}

pub fn kappa(spec: &FactorSpec, v: Complex64) -> Result<Complex64> {
    let z = psi(v)?;
    rho(spec, z).map_err(|e| match e {
        QiError::Pole(_) => QiError::DiskPole { disk: v, plane: z },
        other => other,
    })
}

/// Disk image of the prime pole 2πin/log p.
pub fn prime_pole_disk(p: u64, n: i64) -> Complex64 {
    let l = (p as f64).ln();
    let a = 4.0 * std::f64::consts::PI * n as f64;
    Complex64::new(a, -l) / Complex64::new(a, 3.0 * l)
}

/// Disk image of the archimedean pole -2n.
pub fn arch_pole_disk(n: u64) -> f64 {
    1.0 - 4.0 / (4.0 * n as f64 + 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    pub n_points: usize,
    pub offset: f64,
}

impl BoundaryGrid {
    pub fn new(n_points: usize, offset: f64) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < 4 {
            return Err(QiError::Precondition(format!("grid size {n_points} must be a power of two")));
        }
        if !(offset > 0.0 && offset < 1.0) {
            return Err(QiError::Precondition(format!("grid offset {offset} must lie in (0,1)")));
        }
        Ok(BoundaryGrid { n_points, offset })
    }

    pub fn default_grid() -> Self {
        BoundaryGrid { n_points: 1 << 14, offset: 0.5 }
    }

    pub fn theta(&self, j: usize) -> f64 {
        TAU * ((j as f64 + self.offset) / self.n_points as f64)
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.n_points).map(|j| Complex64::from_polar(1.0, self.theta(j))).collect()
    }

    /// Every other point of this grid, as a grid of half the size.
    pub fn coarsen(&self) -> Result<Self> {
        BoundaryGrid::new(self.n_points / 2, self.offset / 2.0)
    }
}

pub fn sample_boundary(spec: &FactorSpec, grid: &BoundaryGrid) -> Result<Vec<Complex64>> {
    (0..grid.n_points)
        .into_par_iter()
        .map(|j| {
            let z = psi_boundary(grid.theta(j));
            rho(spec, z).map_err(|e| match e {
                QiError::Pole(_) => QiError::DiskPole { disk: Complex64::from_polar(1.0, grid.theta(j)), plane: z },
                other => other,
            })
        })
        .collect()
}

pub fn write_grid_csv<W: Write>(mut out: W, grid: &BoundaryGrid, values: &[Complex64]) -> std::io::Result<()> {
    writeln!(out, "j,theta,re,im")?;
    for (j, v) in values.iter().enumerate() {
        writeln!(out, "{},{:.17e},{:.17e},{:.17e}", j, grid.theta(j), v.re, v.im)?;
    }
    Ok(())
}
