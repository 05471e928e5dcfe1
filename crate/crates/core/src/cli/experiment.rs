//! Runs the lossless walk, the classical baseline and one lossy walk per
//! nonzero loss value, and collects their per-step observables.

use std::fmt;

use rayon::prelude::*;

use super::config::ExperimentSpec;
use crate::error::{Error, Result};
use crate::hilbert::{LatticeReport, ModeSpace};
use crate::lindblad::run_open_walk;
use crate::linalg::CMatrix;
use crate::measurement::{field_density, phase_distribution, reduce_field, variance_curve, PhaseDistribution};
use crate::walk::{run_classical_walk, run_ideal_walk};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    QuantumWalk,
    RandomWalk,
    Lossy(f64),
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveKind::QuantumWalk => write!(f, "qw"),
            CurveKind::RandomWalk => write!(f, "rw"),
            CurveKind::Lossy(g) => write!(f, "qw_g={g}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub kind: CurveKind,
    /// Reduced field state per step.
    pub fields: Vec<CMatrix>,
    pub variances: Vec<f64>,
    pub phases: Vec<PhaseDistribution>,
}

impl Curve {
    pub fn label(&self) -> String {
        self.kind.to_string()
    }
}

/// Largest change of any lossy curve's variance when the substep count is
/// halved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub substeps: usize,
    pub coarse_substeps: usize,
    pub max_variance_change: f64,
}

#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub spec: ExperimentSpec,
    pub version: &'static str,
    pub lattice: LatticeReport,
    pub curves: Vec<Curve>,
    pub convergence: Option<Convergence>,
}

impl ResultBundle {
    pub fn curve(&self, kind: CurveKind) -> Option<&Curve> {
        self.curves.iter().find(|c| c.kind == kind)
    }

    /// Comment lines (without the leading `#`) describing how the data was made.
    pub fn provenance(&self) -> Vec<String> {
        let mut lines = vec![format!("quincunx {}", self.version)];
        lines.extend(self.spec.to_toml().lines().map(|l| format!("config: {l}")));
        for c in &self.lattice.checks {
            lines.push(format!(
                "lattice {}: {} {} {} -> {}",
                c.name,
                c.lhs,
                c.relation,
                c.rhs,
                if c.pass { "pass" } else { "FAIL" }
            ));
        }
        lines.push(format!(
            "lattice overall: {}{}",
            if self.lattice.pass() { "pass" } else { "FAIL" },
            if self.spec.allow_invalid_lattice { " (override set)" } else { "" }
        ));
        match self.convergence {
            Some(c) => lines.push(format!(
                "integrator convergence: max |variance(substeps={}) - variance(substeps={})| = {:.3e}",
                c.substeps, c.coarse_substeps, c.max_variance_change
            )),
            None => lines.push("integrator convergence: n/a (no lossy curves)".into()),
        }
        lines
    }
}

fn curve_kinds(spec: &ExperimentSpec) -> Vec<CurveKind> {
    let mut kinds = vec![CurveKind::QuantumWalk, CurveKind::RandomWalk];
    for &g in &spec.g_values {
        if g > 0.0 && !kinds.contains(&CurveKind::Lossy(g)) {
            kinds.push(CurveKind::Lossy(g));
        }
    }
    kinds
}

fn field_states(spec: &ExperimentSpec, kind: CurveKind, substeps: usize) -> Result<Vec<CMatrix>> {
    let config = spec.walk_config(0.0).with_substeps(substeps);
    let start = config.coherent_start()?;
    match kind {
        CurveKind::QuantumWalk => Ok(run_ideal_walk(&config, &start)?.iter().map(field_density).collect()),
        CurveKind::RandomWalk => run_classical_walk(&config, &start, spec.rw_mode()),
        CurveKind::Lossy(g) => {
            let config = config.with_loss(g);
            Ok(run_open_walk(&config, &start)?
                .iter()
                .map(|rho| reduce_field(rho.matrix()))
                .collect())
        }
    }
}

fn build_curve(spec: &ExperimentSpec, space: &ModeSpace, kind: CurveKind) -> Result<Curve> {
    let fields = field_states(spec, kind, spec.substeps).map_err(|e| match e {
        Error::NumericalInstability { segment, detail } => Error::NumericalInstability {
            segment,
            detail: format!("{detail} (curve {kind})"),
        },
        other => other,
    })?;
    let variances = variance_curve(&fields, spec.quadrature_angle)?
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    let phases = fields.iter().map(|rho| phase_distribution(rho, space)).collect();
    Ok(Curve {
        kind,
        fields,
        variances,
        phases,
    })
}

fn convergence(spec: &ExperimentSpec, curves: &[Curve]) -> Result<Option<Convergence>> {
    let coarse = (spec.substeps / 2).max(1);
    let lossy: Vec<&Curve> = curves.iter().filter(|c| matches!(c.kind, CurveKind::Lossy(_))).collect();
    if lossy.is_empty() {
        return Ok(None);
    }
    let changes = lossy
        .par_iter()
        .map(|c| {
            let fields = field_states(spec, c.kind, coarse)?;
            let coarse_var = variance_curve(&fields, spec.quadrature_angle)?;
            Ok(c.variances
                .iter()
                .zip(coarse_var)
                .map(|(a, (_, b))| (a - b).abs())
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Some(Convergence {
        substeps: spec.substeps,
        coarse_substeps: coarse,
        max_variance_change: changes.into_iter().fold(0.0, f64::max),
    }))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultBundle> {
    spec.validate()?;
    let space = ModeSpace::with_levels(spec.d, spec.fock_levels)?;
    let curves = curve_kinds(spec)
        .into_par_iter()
        .map(|kind| build_curve(spec, &space, kind))
        .collect::<Result<Vec<_>>>()?;
    let convergence = convergence(spec, &curves)?;
    Ok(ResultBundle {
        spec: spec.clone(),
        version: VERSION,
        lattice: spec.lattice_report(),
        curves,
        convergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_labels() {
        assert_eq!(CurveKind::QuantumWalk.to_string(), "qw");
        assert_eq!(CurveKind::RandomWalk.to_string(), "rw");
        assert_eq!(CurveKind::Lossy(0.01).to_string(), "qw_g=0.01");
    }

    #[test]
    fn kinds_from_g_values() {
        let mut spec = ExperimentSpec::default();
        assert_eq!(
            curve_kinds(&spec),
            vec![CurveKind::QuantumWalk, CurveKind::RandomWalk, CurveKind::Lossy(0.01)]
        );
        spec.g_values = vec![0.02, 0.0, 0.02, 0.005];
        assert_eq!(
            curve_kinds(&spec),
            vec![
                CurveKind::QuantumWalk,
                CurveKind::RandomWalk,
                CurveKind::Lossy(0.02),
                CurveKind::Lossy(0.005)
            ]
        );
    }

    #[test]
    fn zero_steps_gives_initial_width() {
        let spec = ExperimentSpec {
            steps: 0,
            ..ExperimentSpec::default()
        };
        let bundle = run_experiment(&spec).unwrap();
        assert_eq!(bundle.curves.len(), 3);
        for c in &bundle.curves {
            assert_eq!(c.variances.len(), 1);
            assert!((c.variances[0] - 0.5).abs() < 5e-3);
        }
    }

    #[test]
    fn invalid_lattice_is_refused() {
        let spec = ExperimentSpec {
            alpha: 6.0,
            d: 37,
            ..ExperimentSpec::default()
        };
        assert!(matches!(run_experiment(&spec), Err(Error::InvalidLattice(_))));
    }
}
