//! Truncated oscillator space: Fock and phase bases, coherent states,
//! rotation and displacement operators, and the coherent-lattice checks.
//!
//! A [`ModeSpace`] carries two sizes. `d` is the lattice dimension: the phase
//! states `|θ_k⟩`, k in Z_d, span the first `d` Fock levels and the walk step
//! is 2π/d. `levels` is the number of Fock levels kept in the simulation
//! basis (`levels >= d`). With `levels == d` the walker space and the
//! simulation basis coincide; a larger `levels` keeps a coherent state of
//! amplitude close to `sqrt(d)` from being clipped by the basis.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{expm, CMatrix, CVector, I};

/// Hard cap on Fock levels (joint field⊗coin dimension at most 128).
pub const MAX_LEVELS: usize = 64;

#[derive(Debug, Clone)]
pub struct ModeSpace {
    d: usize,
    levels: usize,
    number_op: CMatrix,
    x_op: CMatrix,
    p_op: CMatrix,
}

impl ModeSpace {
    /// Space whose Fock basis is exactly the lattice space H_d.
    pub fn new(d: usize) -> Result<Self> {
        Self::with_levels(d, d)
    }

    pub fn with_levels(d: usize, levels: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("lattice dimension d must be positive".into()));
        }
        if levels < d {
            return Err(Error::Domain(format!(
                "Fock levels ({levels}) must be at least the lattice dimension ({d})"
            )));
        }
        if levels > MAX_LEVELS {
            return Err(Error::Domain(format!(
                "Fock levels ({levels}) exceed the cap of {MAX_LEVELS}"
            )));
        }
        let number_op = CMatrix::from_fn(levels, levels, |i, j| {
            if i == j {
                C64::from(i as f64)
            } else {
                C64::from(0.0)
            }
        });
        let a = annihilation(levels);
        let ad = a.adjoint();
        let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let x_op = (&a + &ad) * s;
        let p_op = (&a - &ad) * (s / I);
        Ok(Self {
            d,
            levels,
            number_op,
            x_op,
            p_op,
        })
    }

    /// Lattice dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of Fock levels in the simulation basis.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Lattice spacing 2π/d.
    pub fn theta_step(&self) -> f64 {
        2.0 * PI / self.d as f64
    }

    pub fn number_op(&self) -> &CMatrix {
        &self.number_op
    }

    pub fn x_op(&self) -> &CMatrix {
        &self.x_op
    }

    pub fn p_op(&self) -> &CMatrix {
        &self.p_op
    }

    pub fn annihilation(&self) -> CMatrix {
        annihilation(self.levels)
    }
}

fn annihilation(levels: usize) -> CMatrix {
    CMatrix::from_fn(levels, levels, |i, j| {
        if j == i + 1 {
            C64::from((j as f64).sqrt())
        } else {
            C64::from(0.0)
        }
    })
}

/// A normalized field state plus the weight that truncation removed.
#[derive(Debug, Clone, PartialEq)]
pub struct PureFieldState {
    pub amplitudes: CVector,
    pub norm_deficit: f64,
}

impl PureFieldState {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn inner(&self, other: &PureFieldState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> CMatrix {
        crate::linalg::projector(&self.amplitudes)
    }
}

/// Phase state `|θ_k⟩ = d^{-1/2} Σ_{j<d} e^{i j 2πk/d} |j⟩`.
pub fn phase_state(space: &ModeSpace, k: usize) -> Result<PureFieldState> {
    let d = space.d();
    if k >= d {
        return Err(Error::Domain(format!("phase index {k} out of range 0..{d}")));
    }
    let theta = 2.0 * PI * k as f64 / d as f64;
    let norm = 1.0 / (d as f64).sqrt();
    let amplitudes = CVector::from_fn(space.levels(), |j, _| {
        if j < d {
            (I * (j as f64 * theta)).exp() * norm
        } else {
            C64::from(0.0)
        }
    });
    Ok(PureFieldState {
        amplitudes,
        norm_deficit: 0.0,
    })
}

/// Fock state `|n⟩`.
pub fn fock_state(space: &ModeSpace, n: usize) -> Result<PureFieldState> {
    if n >= space.levels() {
        return Err(Error::Domain(format!(
            "Fock level {n} outside 0..{}",
            space.levels()
        )));
    }
    let mut amplitudes = CVector::zeros(space.levels());
    amplitudes[n] = C64::from(1.0);
    Ok(PureFieldState {
        amplitudes,
        norm_deficit: 0.0,
    })
}

/// `ln P(j)` for a Poisson distribution of mean `mean`.
fn ln_poisson(mean: f64, j: usize, ln_fact: f64) -> f64 {
    if mean == 0.0 {
        return if j == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + j as f64 * mean.ln() - ln_fact
}

/// Coherent state `|α⟩` projected onto the space's Fock levels and
/// renormalized. The removed weight is kept in `norm_deficit`.
pub fn coherent_state_truncated(space: &ModeSpace, alpha: f64) -> Result<PureFieldState> {
    coherent_on_levels(space.levels(), alpha)
}

fn coherent_on_levels(levels: usize, alpha: f64) -> Result<PureFieldState> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("coherent amplitude must be >= 0, got {alpha}")));
    }
    let mean = alpha * alpha;
    let mut ln_fact = 0.0;
    let mut amplitudes = CVector::zeros(levels);
    for j in 0..levels {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        amplitudes[j] = C64::from((0.5 * ln_poisson(mean, j, ln_fact)).exp());
    }

    // Tail sum of the Poisson weights beyond the basis, accumulated directly
    // so that tiny deficits keep their relative precision.
    let mut deficit = 0.0;
    if mean > 0.0 {
        let mut j = levels;
        let mut lf = ln_fact + (levels as f64).ln();
        loop {
            let term = ln_poisson(mean, j, lf).exp();
            deficit += term;
            if j as f64 > mean && term <= 1e-18 * deficit {
                break;
            }
            j += 1;
            lf += (j as f64).ln();
        }
    }

    let norm = amplitudes.norm();
    amplitudes /= C64::from(norm);
    Ok(PureFieldState {
        amplitudes,
        norm_deficit: deficit.min(1.0),
    })
}

/// `exp(i·angle·N̂)`.
pub fn rotation_operator(space: &ModeSpace, angle: f64) -> CMatrix {
    CMatrix::from_diagonal(&rotation_phases(space.levels(), angle))
}

pub(crate) fn rotation_phases(levels: usize, angle: f64) -> CVector {
    CVector::from_fn(levels, |j, _| (I * (angle * j as f64)).exp())
}

/// `exp(β â† − β* â)` on the truncated basis.
///
/// Exactly unitary on the truncated space; it reproduces the infinite-space
/// displacement only on states whose displaced support stays inside the
/// basis. See [`displacement_leakage`].
pub fn displacement_operator(space: &ModeSpace, beta: C64) -> CMatrix {
    let a = space.annihilation();
    let generator = a.adjoint() * beta - a * beta.conj();
    expm(&generator)
}

/// Population that `D(β)|ψ⟩` puts in the topmost Fock level. Anything well
/// above 1e-6 means the displacement ran into the truncation boundary.
pub fn displacement_leakage(space: &ModeSpace, beta: C64, state: &PureFieldState) -> f64 {
    let displaced = displacement_operator(space, beta) * &state.amplitudes;
    displaced[space.levels() - 1].norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    pub alpha: f64,
    pub d: usize,
    pub n_bar: f64,
    pub theta_step: f64,
}

impl LatticeParams {
    pub fn new(alpha: f64, d: usize) -> Self {
        Self {
            alpha,
            d,
            n_bar: alpha * alpha,
            theta_step: 2.0 * PI / d as f64,
        }
    }
}

/// Global photon-number bound for a usable coherent lattice.
pub const N_BAR_BOUND: f64 = 28.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCheck {
    pub name: &'static str,
    pub relation: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeReport {
    pub params: LatticeParams,
    pub checks: Vec<LatticeCheck>,
}

impl LatticeReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LatticeCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for LatticeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lattice alpha={} d={} n_bar={} theta_step={:.6}",
            self.params.alpha, self.params.d, self.params.n_bar, self.params.theta_step
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {}: {:.6} {} {:.6}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.lhs,
                c.relation,
                c.rhs
            )?;
        }
        write!(f, "overall: {}", if self.pass() { "pass" } else { "FAIL" })
    }
}

/// Evaluate the three coherent-lattice conditions:
/// support `d > n̄ + √n̄`, distinguishability `d < 2π√n̄`, and `n̄ < 28`.
pub fn validate_lattice(params: &LatticeParams) -> LatticeReport {
    let d = params.d as f64;
    let n = params.n_bar;
    let support = n + n.sqrt();
    let capacity = 2.0 * PI * n.sqrt();
    LatticeReport {
        params: *params,
        checks: vec![
            LatticeCheck {
                name: "support",
                relation: ">",
                lhs: d,
                rhs: support,
                pass: d > support,
            },
            LatticeCheck {
                name: "distinguishability",
                relation: "<",
                lhs: d,
                rhs: capacity,
                pass: d < capacity,
            },
            LatticeCheck {
                name: "photon_bound",
                relation: "<",
                lhs: n,
                rhs: N_BAR_BOUND,
                pass: n < N_BAR_BOUND,
            },
        ],
    }
}

/// `⟨θ_j|α⟩_d` for every lattice site, where `|α⟩_d` is the coherent state
/// projected onto the d-level lattice space and renormalized. Independent of
/// the space's simulation levels.
pub fn overlap_profile(space: &ModeSpace, alpha: f64) -> Result<Vec<C64>> {
    let d = space.d();
    let lattice = ModeSpace::new(d)?;
    let coherent = coherent_state_truncated(&lattice, alpha)?;
    (0..d)
        .map(|j| Ok(phase_state(&lattice, j)?.inner(&coherent)))
        .collect()
}
