//! Observables: the reduced field state, the lattice phase distribution,
//! quadrature distributions and their moments, and the injection readout.

use std::f64::consts::{FRAC_PI_2, PI};

use log::warn;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{displacement_operator, phase_state, ModeSpace};
use crate::linalg::{CMatrix, CVector, I};
use crate::walk::{Coin, PureState};

/// Quadrature orthogonal to a real, positive initial amplitude.
pub const DEFAULT_QUADRATURE_ANGLE: f64 = FRAC_PI_2;

/// Partial trace over the coin of a field-major joint matrix.
pub fn reduce_field(rho_joint: &CMatrix) -> CMatrix {
    let levels = rho_joint.nrows() / 2;
    CMatrix::from_fn(levels, levels, |i, j| {
        rho_joint[(2 * i, 2 * j)] + rho_joint[(2 * i + 1, 2 * j + 1)]
    })
}

/// Partial trace over the field.
pub fn reduce_coin(rho_joint: &CMatrix) -> CMatrix {
    let levels = rho_joint.nrows() / 2;
    CMatrix::from_fn(2, 2, |a, b| (0..levels).map(|n| rho_joint[(2 * n + a, 2 * n + b)]).sum())
}

/// Reduced field state of a pure joint state.
pub fn field_density(state: &PureState) -> CMatrix {
    let plus = state.coin_component(Coin::Plus);
    let minus = state.coin_component(Coin::Minus);
    &plus * plus.adjoint() + &minus * minus.adjoint()
}

/// Probabilities `P_k = ⟨θ_k|ρ|θ_k⟩` over the d lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistribution {
    pub probabilities: Vec<f64>,
}

impl PhaseDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Lattice angle of site k, reported in (−π, π].
    pub fn angle(&self, k: usize) -> f64 {
        let d = self.probabilities.len();
        let theta = 2.0 * PI * k as f64 / d as f64;
        if theta > PI {
            theta - 2.0 * PI
        } else {
            theta
        }
    }

    pub fn max_abs_diff(&self, other: &PhaseDistribution) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn phase_vectors(space: &ModeSpace) -> Vec<CVector> {
    (0..space.d())
        .map(|k| phase_state(space, k).expect("k < d").amplitudes)
        .collect()
}

pub fn phase_distribution(rho_field: &CMatrix, space: &ModeSpace) -> PhaseDistribution {
    let probabilities = phase_vectors(space)
        .iter()
        .map(|v| v.dotc(&(rho_field * v)).re)
        .collect();
    PhaseDistribution { probabilities }
}

/// Coin-resolved form for pure states:
/// `P_k = |(⟨θ_k|⊗⟨+|)Ψ|² + |(⟨θ_k|⊗⟨−|)Ψ|²`.
pub fn coin_resolved_distribution(state: &PureState, space: &ModeSpace) -> PhaseDistribution {
    let plus = state.coin_component(Coin::Plus);
    let minus = state.coin_component(Coin::Minus);
    let probabilities = phase_vectors(space)
        .iter()
        .map(|v| v.dotc(&plus).norm_sqr() + v.dotc(&minus).norm_sqr())
        .collect();
    PhaseDistribution { probabilities }
}

/// Orthonormal oscillator eigenfunctions `φ_0 … φ_{count-1}` on `grid`,
/// by the recurrence
/// `φ_{n+1} = x √(2/(n+1)) φ_n − √(n/(n+1)) φ_{n−1}`.
pub fn hermite_functions(grid: &[f64], count: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let norm0 = PI.powf(-0.25);
    out.push(grid.iter().map(|x| norm0 * (-0.5 * x * x).exp()).collect());
    if count > 1 {
        out.push(
            grid.iter()
                .zip(&out[0])
                .map(|(x, p0)| std::f64::consts::SQRT_2 * x * p0)
                .collect(),
        );
    }
    for n in 1..count.saturating_sub(1) {
        let a = (2.0 / (n as f64 + 1.0)).sqrt();
        let b = (n as f64 / (n as f64 + 1.0)).sqrt();
        let next = grid
            .iter()
            .enumerate()
            .map(|(i, x)| a * x * out[n][i] - b * out[n - 1][i])
            .collect();
        out.push(next);
    }
    out
}

/// Uniform sampling grid for quadrature densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            min: -12.0,
            max: 12.0,
            points: 1201,
        }
    }
}

impl Grid {
    /// Default grid, widened at the default spacing until it covers
    /// `±(√(2 n̄) + 5)`.
    pub fn for_mean_photons(n_bar: f64) -> Self {
        let base = Self::default();
        let need = (2.0 * n_bar).sqrt() + 5.0;
        if need <= base.max {
            return base;
        }
        let spacing = base.spacing();
        let half_points = (need / spacing).ceil() as usize;
        let half = half_points as f64 * spacing;
        Self {
            min: -half,
            max: half,
            points: 2 * half_points + 1,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn samples(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|i| self.min + h * i as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 || !(self.max > self.min) {
            return Err(Error::Domain(format!(
                "grid needs max > min and at least 2 points, got {self:?}"
            )));
        }
        Ok(())
    }
}

pub fn trapezoid(values: &[f64], spacing: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => spacing * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Exact moments of `x_θ = (a e^{−iθ} + a† e^{iθ})/√2` on a field state.
///
/// Uses the ladder-operator identities of the untruncated oscillator, so the
/// result is the moment of the state's true quadrature distribution even when
/// the state populates the top level of the basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub mean: f64,
    pub second: f64,
}

impl QuadratureMoments {
    pub fn variance(&self) -> f64 {
        self.second - self.mean * self.mean
    }
}

pub fn quadrature_moments(rho_field: &CMatrix, angle: f64) -> QuadratureMoments {
    let levels = rho_field.nrows();
    let mut a = C64::from(0.0);
    let mut a2 = C64::from(0.0);
    let mut n = 0.0;
    for k in 0..levels {
        n += k as f64 * rho_field[(k, k)].re;
        if k + 1 < levels {
            // ⟨a⟩ = Σ √(k+1) ρ_{k+1,k}
            a += ((k + 1) as f64).sqrt() * rho_field[(k + 1, k)];
        }
        if k + 2 < levels {
            a2 += (((k + 1) * (k + 2)) as f64).sqrt() * rho_field[(k + 2, k)];
        }
    }
    let tr: f64 = (0..levels).map(|k| rho_field[(k, k)].re).sum();
    let rot = (-I * angle).exp();
    let mean = std::f64::consts::SQRT_2 * (rot * a).re;
    let second = (rot * rot * a2).re + n + 0.5 * tr;
    QuadratureMoments { mean, second }
}

/// Sampled quadrature distribution plus its exact operator moments.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureDistribution {
    pub angle: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl QuadratureDistribution {
    fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.density, self.spacing())
    }

    /// Mean and variance by trapezoidal quadrature over the grid.
    pub fn grid_moments(&self) -> (f64, f64) {
        let h = self.spacing();
        let norm = self.integral();
        let first: Vec<f64> = self.grid.iter().zip(&self.density).map(|(x, p)| x * p).collect();
        let mean = trapezoid(&first, h) / norm;
        let second: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(x, p)| (x - mean) * (x - mean) * p)
            .collect();
        (mean, trapezoid(&second, h) / norm)
    }
}

/// `e^{−iθN̂} ρ e^{iθN̂}`
pub fn rotate_field(rho_field: &CMatrix, angle: f64) -> CMatrix {
    CMatrix::from_fn(rho_field.nrows(), rho_field.ncols(), |m, n| {
        rho_field[(m, n)] * (-I * (angle * (m as f64 - n as f64))).exp()
    })
}

/// Quadrature distribution at `angle`:
/// `p(x) = Σ_{mn} ρ′_{mn} φ_m(x) φ_n(x)` with `ρ′ = e^{−iθN̂} ρ e^{iθN̂}`.
pub fn qpd(rho_field: &CMatrix, angle: f64, grid: &Grid, space: &ModeSpace) -> Result<QuadratureDistribution> {
    grid.validate()?;
    if rho_field.nrows() != space.levels() {
        return Err(Error::Domain(format!(
            "field matrix has {} levels, space has {}",
            rho_field.nrows(),
            space.levels()
        )));
    }
    let xs = grid.samples();
    let levels = space.levels();
    let phis = hermite_functions(&xs, levels);
    let rotated = rotate_field(rho_field, angle);
    let density: Vec<f64> = (0..xs.len())
        .map(|i| {
            let mut acc = 0.0;
            for m in 0..levels {
                let pm = phis[m][i];
                acc += rotated[(m, m)].re * pm * pm;
                for n in (m + 1)..levels {
                    acc += 2.0 * rotated[(m, n)].re * pm * phis[n][i];
                }
            }
            acc
        })
        .collect();
    let moments = quadrature_moments(&rotated, 0.0);
    let dist = QuadratureDistribution {
        angle,
        grid: xs,
        density,
        mean: moments.mean,
        variance: moments.variance(),
    };
    let tr: f64 = (0..levels).map(|k| rho_field[(k, k)].re).sum();
    let edge_mass = (tr - dist.integral()).abs();
    if edge_mass > 1e-4 {
        return Err(Error::GridTooNarrow { edge_mass });
    }
    Ok(dist)
}

/// Mean photon number after injecting a coherent field `α e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutPoint {
    pub phi: f64,
    pub mean_photons: f64,
    /// Population pushed into the top Fock level by the displacement.
    pub leakage: f64,
}

pub const LEAKAGE_WARNING: f64 = 1e-6;

pub fn homodyne_injection_readout(
    rho_field: &CMatrix,
    alpha: f64,
    phis: &[f64],
    space: &ModeSpace,
) -> Vec<ReadoutPoint> {
    let levels = space.levels();
    phis.iter()
        .map(|&phi| {
            let d = displacement_operator(space, (I * phi).exp() * alpha);
            let out = &d * rho_field * d.adjoint();
            let mean_photons = (0..levels).map(|k| k as f64 * out[(k, k)].re).sum();
            let leakage = out[(levels - 1, levels - 1)].re;
            if leakage > LEAKAGE_WARNING {
                warn!("injection at phi={phi:.4}: top Fock level population {leakage:.3e}, readout is truncation-limited");
            }
            ReadoutPoint {
                phi,
                mean_photons,
                leakage,
            }
        })
        .collect()
}

/// Operator-moment quadrature variance per step.
pub fn variance_curve(states: &[CMatrix], angle: f64) -> Result<Vec<(usize, f64)>> {
    if states.is_empty() {
        return Err(Error::Domain("variance curve needs at least one state".into()));
    }
    Ok(states
        .iter()
        .enumerate()
        .map(|(m, rho)| (m, quadrature_moments(rho, angle).variance()))
        .collect())
}
