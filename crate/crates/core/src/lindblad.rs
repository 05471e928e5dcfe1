//! Open-system walk: the joint atom+cavity density matrix evolves under the
//! conditional-rotation Hamiltonian with zero-temperature cavity damping
//! between instantaneous Hadamard kicks.
//!
//! The generator is
//!
//! ```text
//! dρ/dt = −i[H, ρ] + (g/2)(2 a ρ a† − a†a ρ − ρ a†a),   H = −χ N̂ ⊗ σ_z,
//! ```
//!
//! with ħ = 1 and χτ = 2π/d, so a lossless segment is exactly the
//! conditional rotation `F = exp(i (2π/d) N̂ ⊗ σ_z)` (coin `|+⟩` advances
//! the field phase by +2π/d).
//!
//! Segments are integrated with fixed-step classical RK4 in the frame
//! co-rotating with `H`. `H` is diagonal, so the frame change is a set of
//! exact phases and RK4 only has to resolve the damping term, whose fastest
//! oscillation in that frame is 2χ.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{ModeSpace, PureFieldState};
use crate::linalg::{hermitian_part, hermiticity_defect, min_eigenvalue, trace, CMatrix, I};
use crate::walk::{check_field, PureState, WalkConfig};

/// Default RK4 substeps per segment.
pub const DEFAULT_SUBSTEPS: usize = 100;

/// Tolerances for the post-segment health check.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
pub const NEGATIVITY_LIMIT: f64 = 1e-6;

/// A joint field⊗coin density matrix that passed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), unit trace (1e-8) and positivity
    /// (minimum eigenvalue >= -1e-8).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() % 2 != 0 {
            return Err(Error::Domain(format!(
                "joint density matrix must be square with even size, got {:?}",
                matrix.shape()
            )));
        }
        let herm = hermiticity_defect(&matrix);
        if herm > 1e-10 {
            return Err(Error::Domain(format!("density matrix not Hermitian (defect {herm:.3e})")));
        }
        let tr = trace(&matrix);
        if (tr - C64::from(1.0)).norm() > 1e-8 {
            return Err(Error::Domain(format!("density matrix trace {tr} != 1")));
        }
        let min = min_eigenvalue(&matrix);
        if min < -1e-8 {
            return Err(Error::Domain(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(Self(matrix))
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self(state.density())
    }

    /// Field state ⊗ coin state.
    pub fn product(field: &PureFieldState, coin: crate::walk::Coin) -> Self {
        Self::from_pure(&PureState::product(field, coin))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladParams {
    pub chi: f64,
    pub tau: f64,
    pub g: f64,
    pub substeps: usize,
}

impl LindbladParams {
    /// Unit segment duration: τ = 1, χ = 2π/d, and `g` is the loss per segment.
    pub fn new(d: usize, g: f64, substeps: usize) -> Result<Self> {
        Self::with_time_scale(d, 1.0, g, substeps)
    }

    /// Segment duration `tau`; χ is set to 2π/(d τ) and `g` is a rate.
    pub fn with_time_scale(d: usize, tau: f64, g: f64, substeps: usize) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain(format!("segment duration must be positive, got {tau}")));
        }
        Self::from_parts(d, 2.0 * PI / (d as f64 * tau), tau, g, substeps)
    }

    /// Explicit parameters; rejects χτ that does not equal 2π/d.
    pub fn from_parts(d: usize, chi: f64, tau: f64, g: f64, substeps: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("lattice dimension must be positive".into()));
        }
        if substeps == 0 {
            return Err(Error::Domain("substeps must be at least 1".into()));
        }
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::Domain(format!("loss g must be finite and >= 0, got {g}")));
        }
        let step = 2.0 * PI / d as f64;
        if ((chi * tau - step) / step).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "chi*tau = {} but the lattice step is 2π/{d} = {step}",
                chi * tau
            )));
        }
        Ok(Self { chi, tau, g, substeps })
    }
}

/// Precomputed per-index data for the structured right-hand side.
struct Generator {
    levels: usize,
    /// Fock level of each joint index.
    photons: Vec<f64>,
    /// σ_z eigenvalue of each joint index.
    coin_sign: Vec<f64>,
    /// Diagonal of H = −χ N̂⊗σ_z.
    energy: Vec<f64>,
    chi: f64,
    g: f64,
}

impl Generator {
    fn new(space: &ModeSpace, params: &LindbladParams) -> Self {
        let dim = 2 * space.levels();
        let photons: Vec<f64> = (0..dim).map(|i| (i / 2) as f64).collect();
        let coin_sign: Vec<f64> = (0..dim).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let energy = photons
            .iter()
            .zip(&coin_sign)
            .map(|(n, s)| -params.chi * n * s)
            .collect();
        Self {
            levels: space.levels(),
            photons,
            coin_sign,
            energy,
            chi: params.chi,
            g: params.g,
        }
    }

    /// Damping term with the jump operator taken in the frame rotating with
    /// `H` at time `t`: `a(t) = e^{iHt} a e^{−iHt}` picks up `e^{iχ s t}` on
    /// coin sector `s`. At t = 0 this is the lab-frame dissipator.
    fn dissipator(&self, rho: &CMatrix, t: f64, out: &mut CMatrix) {
        let dim = 2 * self.levels;
        let g = self.g;
        // coin_sign[i] - coin_sign[j] is one of -2, 0, 2
        let up = (I * (2.0 * self.chi * t)).exp();
        let down = up.conj();
        for j in 0..dim {
            for i in 0..dim {
                let mut v = -0.5 * g * (self.photons[i] + self.photons[j]) * rho[(i, j)];
                if i + 2 < dim && j + 2 < dim {
                    let amp = ((self.photons[i] + 1.0) * (self.photons[j] + 1.0)).sqrt();
                    let phase = match (self.coin_sign[i] > 0.0, self.coin_sign[j] > 0.0) {
                        (true, false) => up,
                        (false, true) => down,
                        _ => C64::from(1.0),
                    };
                    v += phase * (g * amp) * rho[(i + 2, j + 2)];
                }
                out[(i, j)] = v;
            }
        }
    }

    fn lab_rhs(&self, rho: &CMatrix) -> CMatrix {
        let dim = 2 * self.levels;
        let mut out = CMatrix::zeros(dim, dim);
        if self.g != 0.0 {
            self.dissipator(rho, 0.0, &mut out);
        }
        for j in 0..dim {
            for i in 0..dim {
                out[(i, j)] += -I * (self.energy[i] - self.energy[j]) * rho[(i, j)];
            }
        }
        out
    }

    /// `ρ_ij ↦ e^{−i(E_i − E_j)t} ρ_ij`, i.e. `e^{−iHt} ρ e^{iHt}`.
    fn free_evolution(&self, rho: &mut CMatrix, t: f64) {
        let dim = 2 * self.levels;
        for j in 0..dim {
            for i in 0..dim {
                rho[(i, j)] *= (-I * ((self.energy[i] - self.energy[j]) * t)).exp();
            }
        }
    }
}

/// `dρ/dt` in the lab frame.
pub fn lindblad_rhs(rho: &DensityMatrix, params: &LindbladParams, space: &ModeSpace) -> Result<CMatrix> {
    check_dims(rho, space)?;
    Ok(Generator::new(space, params).lab_rhs(rho.matrix()))
}

fn check_dims(rho: &DensityMatrix, space: &ModeSpace) -> Result<()> {
    if rho.dim() != 2 * space.levels() {
        return Err(Error::Domain(format!(
            "density matrix dimension {} does not match joint space {}",
            rho.dim(),
            2 * space.levels()
        )));
    }
    Ok(())
}

fn rk4_interaction(gen: &Generator, rho: &CMatrix, duration: f64, substeps: usize) -> CMatrix {
    let dim = rho.nrows();
    let h = duration / substeps as f64;
    let mut state = rho.clone();
    let (mut k1, mut k2, mut k3, mut k4) = (
        CMatrix::zeros(dim, dim),
        CMatrix::zeros(dim, dim),
        CMatrix::zeros(dim, dim),
        CMatrix::zeros(dim, dim),
    );
    let half = C64::from(h / 2.0);
    for step in 0..substeps {
        let t = step as f64 * h;
        gen.dissipator(&state, t, &mut k1);
        gen.dissipator(&(&state + &k1 * half), t + h / 2.0, &mut k2);
        gen.dissipator(&(&state + &k2 * half), t + h / 2.0, &mut k3);
        gen.dissipator(&(&state + &k3 * C64::from(h)), t + h, &mut k4);
        state += (&k1 + (&k2 + &k3) * C64::from(2.0) + &k4) * C64::from(h / 6.0);
    }
    state
}

fn evolve_indexed(
    rho: &DensityMatrix,
    params: &LindbladParams,
    space: &ModeSpace,
    segment: usize,
) -> Result<DensityMatrix> {
    check_dims(rho, space)?;
    let gen = Generator::new(space, params);
    let mut out = if params.g == 0.0 {
        rho.matrix().clone()
    } else {
        rk4_interaction(&gen, rho.matrix(), params.tau, params.substeps)
    };
    gen.free_evolution(&mut out, params.tau);
    let out = hermitian_part(&out);

    let drift = (trace(&out) - C64::from(1.0)).norm();
    if drift > TRACE_DRIFT_LIMIT {
        return Err(Error::NumericalInstability {
            segment,
            detail: format!("trace drift {drift:.3e}"),
        });
    }
    let min = min_eigenvalue(&out);
    if min < -NEGATIVITY_LIMIT {
        return Err(Error::NumericalInstability {
            segment,
            detail: format!("minimum eigenvalue {min:.3e}"),
        });
    }
    Ok(DensityMatrix(out))
}

/// Evolves for one segment of duration τ with `params.substeps` RK4 steps.
pub fn evolve_segment(rho: &DensityMatrix, params: &LindbladParams, space: &ModeSpace) -> Result<DensityMatrix> {
    evolve_indexed(rho, params, space, 0)
}

/// `(1 ⊗ H) ρ (1 ⊗ H)†`, applied block by block.
pub fn hadamard_kick(rho: &DensityMatrix) -> DensityMatrix {
    let m = rho.matrix();
    let dim = m.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    for bj in (0..dim).step_by(2) {
        for bi in (0..dim).step_by(2) {
            let (a, b, c, d) = (m[(bi, bj)], m[(bi, bj + 1)], m[(bi + 1, bj)], m[(bi + 1, bj + 1)]);
            // H B H with H = [[1,1],[1,-1]]/√2
            out[(bi, bj)] = (a + b + c + d) * 0.5;
            out[(bi, bj + 1)] = (a - b + c - d) * 0.5;
            out[(bi + 1, bj)] = (a + b - c - d) * 0.5;
            out[(bi + 1, bj + 1)] = (a - b - c + d) * 0.5;
        }
    }
    DensityMatrix(out)
}

/// Open walk with the configuration's loss `g` per unit segment.
pub fn run_open_walk(config: &WalkConfig, initial_field: &PureFieldState) -> Result<Vec<DensityMatrix>> {
    config.validate()?;
    let params = LindbladParams::new(config.lattice.d, config.loss_g, config.substeps)?;
    run_open_walk_with(config, initial_field, &params)
}

/// Open walk with explicit segment parameters. Step m is
/// `(evolve_segment ∘ hadamard_kick)^m` applied to the initial projector.
pub fn run_open_walk_with(
    config: &WalkConfig,
    initial_field: &PureFieldState,
    params: &LindbladParams,
) -> Result<Vec<DensityMatrix>> {
    let space = config.space()?;
    check_field(&space, initial_field)?;
    let mut out = Vec::with_capacity(config.steps + 1);
    out.push(DensityMatrix::product(initial_field, config.coin_init));
    for m in 1..=config.steps {
        let kicked = hadamard_kick(&out[m - 1]);
        out.push(evolve_indexed(&kicked, params, &space, m)?);
    }
    Ok(out)
}
