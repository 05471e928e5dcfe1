//! Coin operators, the lossless coined walk and the classical random-walk
//! baseline.
//!
//! Joint states are stored field-major: amplitude index `2 * n + c`, where
//! `n` is the Fock level and `c` is 0 for coin `|+⟩` and 1 for `|−⟩`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{rotation_phases, LatticeParams, ModeSpace, PureFieldState};
use crate::linalg::{kron, projector, CMatrix, CVector, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coin {
    #[default]
    Plus,
    Minus,
}

impl Coin {
    pub fn index(self) -> usize {
        match self {
            Coin::Plus => 0,
            Coin::Minus => 1,
        }
    }

    /// Eigenvalue of σ_z.
    pub fn sign(self) -> f64 {
        match self {
            Coin::Plus => 1.0,
            Coin::Minus => -1.0,
        }
    }

    pub fn vector(self) -> CVector {
        let mut v = CVector::zeros(2);
        v[self.index()] = C64::from(1.0);
        v
    }
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_vec(vec![C64::from(1.0), C64::from(-1.0)]))
}

/// `(1/√2) [[1, 1], [1, −1]]`
pub fn hadamard() -> CMatrix {
    let h = C64::from(FRAC_1_SQRT_2);
    CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

/// Diagonal of `F = exp((2πi/d) N̂ ⊗ σ_z)` in joint ordering.
pub(crate) fn conditional_phases(space: &ModeSpace) -> CVector {
    let theta = space.theta_step();
    CVector::from_fn(2 * space.levels(), |idx, _| {
        let n = (idx / 2) as f64;
        let s = if idx % 2 == 0 { 1.0 } else { -1.0 };
        (I * (theta * n * s)).exp()
    })
}

/// Conditional rotation: the field turns by +2π/d on coin `|+⟩` and by
/// −2π/d on `|−⟩`.
pub fn conditional_rotation(space: &ModeSpace) -> CMatrix {
    CMatrix::from_diagonal(&conditional_phases(space))
}

/// One walk step `U = F (1 ⊗ H)`.
pub fn step_unitary(space: &ModeSpace) -> CMatrix {
    let coin = kron(&CMatrix::identity(space.levels(), space.levels()), &hadamard());
    conditional_rotation(space) * coin
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub amplitudes: CVector,
}

impl PureState {
    pub fn product(field: &PureFieldState, coin: Coin) -> Self {
        Self {
            amplitudes: field.amplitudes.kronecker(&coin.vector()),
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn density(&self) -> CMatrix {
        projector(&self.amplitudes)
    }

    /// Amplitudes of the field conditioned on one coin value (unnormalized).
    pub fn coin_component(&self, coin: Coin) -> CVector {
        let levels = self.amplitudes.len() / 2;
        CVector::from_fn(levels, |n, _| self.amplitudes[2 * n + coin.index()])
    }
}

/// Applies `U = F (1 ⊗ H)` in place without forming the matrix.
pub(crate) fn apply_step(amplitudes: &mut CVector, phases: &CVector) {
    let h = FRAC_1_SQRT_2;
    for n in 0..amplitudes.len() / 2 {
        let (p, m) = (amplitudes[2 * n], amplitudes[2 * n + 1]);
        amplitudes[2 * n] = (p + m) * h * phases[2 * n];
        amplitudes[2 * n + 1] = (p - m) * h * phases[2 * n + 1];
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub lattice: LatticeParams,
    /// Fock levels in the simulation basis (`>= lattice.d`).
    pub levels: usize,
    pub steps: usize,
    pub loss_g: f64,
    pub substeps: usize,
    pub seed: u64,
    pub coin_init: Coin,
}

impl WalkConfig {
    pub fn new(alpha: f64, d: usize) -> Self {
        Self {
            lattice: LatticeParams::new(alpha, d),
            levels: d,
            steps: 10,
            loss_g: 0.0,
            substeps: 100,
            seed: 42,
            coin_init: Coin::Plus,
        }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_loss(mut self, g: f64) -> Self {
        self.loss_g = g;
        self
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn space(&self) -> Result<ModeSpace> {
        ModeSpace::with_levels(self.lattice.d, self.levels)
    }

    pub fn validate(&self) -> Result<()> {
        if self.substeps == 0 {
            return Err(Error::Domain("substeps must be at least 1".into()));
        }
        if !(self.loss_g >= 0.0) || !self.loss_g.is_finite() {
            return Err(Error::Domain(format!("loss g must be finite and >= 0, got {}", self.loss_g)));
        }
        self.space().map(|_| ())
    }

    /// Field start `|α⟩` on this configuration's basis.
    pub fn coherent_start(&self) -> Result<PureFieldState> {
        crate::hilbert::coherent_state_truncated(&self.space()?, self.lattice.alpha)
    }
}

pub(crate) fn check_field(space: &ModeSpace, field: &PureFieldState) -> Result<()> {
    if field.dim() != space.levels() {
        return Err(Error::Domain(format!(
            "initial field has {} amplitudes, space has {} levels",
            field.dim(),
            space.levels()
        )));
    }
    Ok(())
}

/// Lossless walk `|Ψ_m⟩ = U^m |ψ_0⟩ ⊗ |coin⟩` for m = 0..=steps.
pub fn run_ideal_walk(config: &WalkConfig, initial_field: &PureFieldState) -> Result<Vec<PureState>> {
    config.validate()?;
    if config.loss_g != 0.0 {
        return Err(Error::Misuse(format!(
            "ideal walk requires g = 0 (got {}); use the open-system walk",
            config.loss_g
        )));
    }
    let space = config.space()?;
    check_field(&space, initial_field)?;
    let phases = conditional_phases(&space);
    let mut state = PureState::product(initial_field, config.coin_init);
    let mut out = Vec::with_capacity(config.steps + 1);
    out.push(state.clone());
    for _ in 0..config.steps {
        apply_step(&mut state.amplitudes, &phases);
        out.push(state.clone());
    }
    Ok(out)
}

/// Averaged single step of the classical walk on field density matrices:
/// `ρ ↦ ½ (R₊ ρ R₊† + R₋ ρ R₋†)` with `R_± = exp(±i (2π/d) N̂)`.
#[derive(Debug, Clone)]
pub struct RwChannel {
    /// Entry (i, j) multiplies ρ_ij; the channel is diagonal in the Fock
    /// product basis because both Kraus operators are.
    multiplier: CMatrix,
}

impl RwChannel {
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        rho.component_mul(&self.multiplier)
    }

    /// The Kraus operators `(R₊/√2, R₋/√2)`.
    pub fn kraus(space: &ModeSpace) -> [CMatrix; 2] {
        let theta = space.theta_step();
        let s = C64::from(FRAC_1_SQRT_2);
        [
            CMatrix::from_diagonal(&rotation_phases(space.levels(), theta)) * s,
            CMatrix::from_diagonal(&rotation_phases(space.levels(), -theta)) * s,
        ]
    }
}

pub fn rw_step_channel(space: &ModeSpace) -> RwChannel {
    let theta = space.theta_step();
    let n = space.levels();
    RwChannel {
        multiplier: CMatrix::from_fn(n, n, |i, j| C64::from((theta * (i as f64 - j as f64)).cos())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwMode {
    Ensemble,
    MonteCarlo { trajectories: usize },
}

/// Default trajectory count for the Monte Carlo baseline.
pub const DEFAULT_TRAJECTORIES: usize = 10_000;

/// Net lattice displacement counts per step from sampled single-atom
/// trajectories. Each step a fresh atom rotates the field by ±2π/d with
/// equal probability; a trajectory's field state at step m is therefore
/// `R^k |ψ_0⟩` for its net displacement k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftHistogram {
    steps: usize,
    trajectories: usize,
    /// `counts[m][k + steps]` = trajectories with net displacement k after m steps.
    counts: Vec<Vec<u64>>,
}

impl ShiftHistogram {
    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `(net displacement, trajectory count)` pairs with nonzero count.
    pub fn at_step(&self, step: usize) -> impl Iterator<Item = (i64, u64)> + '_ {
        let offset = self.steps as i64;
        self.counts[step]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (i as i64 - offset, c))
    }

    /// Trajectory-averaged field density matrix at `step`.
    pub fn density(&self, space: &ModeSpace, rho0: &CMatrix, step: usize) -> CMatrix {
        let theta = space.theta_step();
        let n = space.levels();
        let total = self.trajectories as f64;
        // average of e^{iθk(i-j)} over trajectories, indexed by i - j
        let factors: Vec<C64> = (0..2 * n - 1)
            .map(|diff| {
                let delta = diff as f64 - (n as f64 - 1.0);
                self.at_step(step)
                    .map(|(k, c)| (I * (theta * k as f64 * delta)).exp() * (c as f64 / total))
                    .sum()
            })
            .collect();
        CMatrix::from_fn(n, n, |i, j| rho0[(i, j)] * factors[i + n - 1 - j])
    }
}

fn trajectory_rng(seed: u64, trajectory: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory as u64);
    rng
}

/// Samples `trajectories` independent classical walks of `steps` steps.
/// Each trajectory draws from its own stream derived from `(seed, index)`,
/// so the result does not depend on thread scheduling.
pub fn sample_shifts(steps: usize, trajectories: usize, seed: u64) -> Result<ShiftHistogram> {
    if trajectories < 1 {
        return Err(Error::Domain("Monte Carlo walk needs at least one trajectory".into()));
    }
    let width = 2 * steps + 1;
    let counts = (0..trajectories)
        .into_par_iter()
        .fold(
            || vec![vec![0u64; width]; steps + 1],
            |mut acc, t| {
                let mut rng = trajectory_rng(seed, t);
                let mut pos = steps;
                acc[0][pos] += 1;
                for m in 1..=steps {
                    if rng.random_bool(0.5) {
                        pos += 1;
                    } else {
                        pos -= 1;
                    }
                    acc[m][pos] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![vec![0u64; width]; steps + 1],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                a
            },
        );
    Ok(ShiftHistogram {
        steps,
        trajectories,
        counts,
    })
}

/// Classical walk baseline: one field density matrix per step 0..=steps.
pub fn run_classical_walk(
    config: &WalkConfig,
    initial_field: &PureFieldState,
    mode: RwMode,
) -> Result<Vec<CMatrix>> {
    config.validate()?;
    let space = config.space()?;
    check_field(&space, initial_field)?;
    let rho0 = initial_field.projector();
    match mode {
        RwMode::Ensemble => {
            let channel = rw_step_channel(&space);
            let mut out = Vec::with_capacity(config.steps + 1);
            out.push(rho0);
            for m in 0..config.steps {
                let next = channel.apply(&out[m]);
                out.push(next);
            }
            Ok(out)
        }
        RwMode::MonteCarlo { trajectories } => {
            let hist = sample_shifts(config.steps, trajectories, config.seed)?;
            Ok((0..=config.steps)
                .map(|m| hist.density(&space, &rho0, m))
                .collect())
        }
    }
}
