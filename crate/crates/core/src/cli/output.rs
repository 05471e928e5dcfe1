//! CSV emission. Every file starts with `#` provenance comments and is
//! written to a temporary file in the target directory, then renamed.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use super::experiment::ResultBundle;
use crate::error::{Error, Result};
use crate::hilbert::ModeSpace;
use crate::measurement::qpd;

pub const VARIANCE_FILE: &str = "variance.csv";
pub const PHASE_FILE: &str = "phase_distribution.csv";

/// 17 significant digits: parses back to the identical f64.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(bundle: &ResultBundle) -> String {
    bundle
        .provenance()
        .iter()
        .map(|l| format!("# {l}\n"))
        .collect()
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn variance_csv(bundle: &ResultBundle) -> String {
    let mut s = header(bundle);
    s.push_str("step");
    for c in &bundle.curves {
        write!(s, ",{}", c.label()).unwrap();
    }
    s.push('\n');
    for step in 0..=bundle.spec.steps {
        write!(s, "{step}").unwrap();
        for c in &bundle.curves {
            write!(s, ",{}", fmt_value(c.variances[step])).unwrap();
        }
        s.push('\n');
    }
    s
}

fn phase_rows(bundle: &ResultBundle, step: usize, s: &mut String, with_step: bool) {
    let d = bundle.spec.d;
    for k in 0..d {
        if with_step {
            write!(s, "{step},").unwrap();
        }
        let theta = bundle.curves[0].phases[step].angle(k);
        write!(s, "{k},{}", fmt_value(theta)).unwrap();
        for c in &bundle.curves {
            write!(s, ",{}", fmt_value(c.phases[step].probabilities[k])).unwrap();
        }
        s.push('\n');
    }
}

pub fn phase_csv(bundle: &ResultBundle) -> String {
    let mut s = header(bundle);
    s.push_str("step,k,theta_k");
    for c in &bundle.curves {
        write!(s, ",{}", c.label()).unwrap();
    }
    s.push('\n');
    for step in 0..=bundle.spec.steps {
        phase_rows(bundle, step, &mut s, true);
    }
    s
}

/// Writes `variance.csv` and `phase_distribution.csv` into `dir`.
pub fn emit_csv(bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    let files = [
        (dir.join(VARIANCE_FILE), variance_csv(bundle)),
        (dir.join(PHASE_FILE), phase_csv(bundle)),
    ];
    for (path, contents) in &files {
        write_atomic(path, contents)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// Phase distribution and quadrature density of every curve at one step.
pub fn emit_distributions(bundle: &ResultBundle, step: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    if step > bundle.spec.steps {
        return Err(Error::Config(format!(
            "step {step} beyond the run's {} steps",
            bundle.spec.steps
        )));
    }
    let space = ModeSpace::with_levels(bundle.spec.d, bundle.spec.fock_levels)?;
    let grid = bundle.spec.grid();

    let mut phase = header(bundle);
    phase.push_str("k,theta_k");
    let mut quad = header(bundle);
    writeln!(quad, "# quadrature angle: {}", fmt_value(bundle.spec.quadrature_angle)).unwrap();
    quad.push('x');
    for c in &bundle.curves {
        write!(phase, ",{}", c.label()).unwrap();
        write!(quad, ",{}", c.label()).unwrap();
    }
    phase.push('\n');
    quad.push('\n');
    phase_rows(bundle, step, &mut phase, false);

    let dists = bundle
        .curves
        .iter()
        .map(|c| qpd(&c.fields[step], bundle.spec.quadrature_angle, &grid, &space))
        .collect::<Result<Vec<_>>>()?;
    for (i, x) in dists[0].grid.iter().enumerate() {
        quad.push_str(&fmt_value(*x));
        for q in &dists {
            write!(quad, ",{}", fmt_value(q.density[i])).unwrap();
        }
        quad.push('\n');
    }

    let files = [
        (dir.join(format!("phase_step{step}.csv")), phase),
        (dir.join(format!("qpd_step{step}.csv")), quad),
    ];
    for (path, contents) in &files {
        write_atomic(path, contents)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// One row per loss value: `g, variance at each step`.
pub fn sweep_csv(bundle: &ResultBundle) -> String {
    use super::experiment::CurveKind;
    let mut s = header(bundle);
    s.push_str("g");
    for step in 0..=bundle.spec.steps {
        write!(s, ",step_{step}").unwrap();
    }
    s.push('\n');
    let mut gs = bundle.spec.g_values.clone();
    gs.sort_by(f64::total_cmp);
    gs.dedup();
    for g in gs {
        let kind = if g == 0.0 { CurveKind::QuantumWalk } else { CurveKind::Lossy(g) };
        let curve = bundle.curve(kind).expect("every g has a curve");
        s.push_str(&fmt_value(g));
        for v in &curve.variances {
            write!(s, ",{}", fmt_value(*v)).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn emit_sweep(bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = emit_csv(bundle, dir)?;
    let path = dir.join("sweep.csv");
    write_atomic(&path, &sweep_csv(bundle))?;
    files.push(path);
    Ok(files)
}
