mod common;

use std::f64::consts::FRAC_PI_2;

use common::{dense_step, max_diff, phase_probabilities, rel_diff, wrapped_binomial};
use quincunx::hilbert::{coherent_state_truncated, phase_state, ModeSpace};
use quincunx::lindblad::{run_open_walk, run_open_walk_with, DensityMatrix, LindbladParams};
use quincunx::linalg::{hermiticity_defect, max_abs_diff, min_eigenvalue, purity, trace};
use quincunx::measurement::{
    coin_resolved_distribution, field_density, phase_distribution, qpd, quadrature_moments, reduce_coin, reduce_field,
    Grid,
};
use quincunx::walk::{run_classical_walk, run_ideal_walk, sample_shifts, RwMode, WalkConfig};

#[test]
fn ensemble_walk_reproduces_wrapped_binomial() {
    for d in [5usize, 8, 13] {
        let cfg = WalkConfig::new(0.0, d).with_steps(12);
        let space = cfg.space().unwrap();
        let start = phase_state(&space, 0).unwrap();
        let states = run_classical_walk(&cfg, &start, RwMode::Ensemble).unwrap();
        for (n, rho) in states.iter().enumerate() {
            let p = phase_distribution(rho, &space);
            assert!(max_diff(&p.probabilities, &wrapped_binomial(n, d)) < 1e-12, "d={d} n={n}");
        }
    }
}

#[test]
fn ideal_walk_matches_dense_matrix_power() {
    let cfg = WalkConfig::new(5.0, 31).with_levels(40).with_steps(6);
    let start = cfg.coherent_start().unwrap();
    let states = run_ideal_walk(&cfg, &start).unwrap();
    let u = dense_step(31, 40);
    let mut psi = states[0].amplitudes.clone();
    for st in &states {
        assert!((&st.amplitudes - &psi).norm() < 1e-12);
        psi = &u * psi;
    }
}

#[test]
fn coin_resolved_and_trace_out_agree_for_coherent_walk() {
    let cfg = WalkConfig::new(5.0, 31).with_levels(64).with_steps(8);
    let space = cfg.space().unwrap();
    let states = run_ideal_walk(&cfg, &cfg.coherent_start().unwrap()).unwrap();
    for st in &states {
        let a = coin_resolved_distribution(st, &space);
        let b = phase_distribution(&field_density(st), &space);
        let c = phase_probabilities(&st.amplitudes, 31);
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert!(max_diff(&a.probabilities, &c) < 1e-12);
        assert!(b.total() <= 1.0 + 1e-10);
    }
}

#[test]
fn monte_carlo_tracks_ensemble_on_small_lattice() {
    let cfg = WalkConfig::new(2.0, 11).with_steps(8).with_seed(9);
    let space = cfg.space().unwrap();
    let start = cfg.coherent_start().unwrap();
    let exact = run_classical_walk(&cfg, &start, RwMode::Ensemble).unwrap();
    let hist = sample_shifts(8, 4000, 9).unwrap();
    let mc = run_classical_walk(&cfg, &start, RwMode::MonteCarlo { trajectories: 4000 }).unwrap();
    for m in 0..=8 {
        assert!(max_abs_diff(&mc[m], &hist.density(&space, &start.projector(), m)) < 1e-14);
        let p_exact = phase_distribution(&exact[m], &space);
        let p_mc = phase_distribution(&mc[m], &space);
        // binomial sampling error per site is at most 0.5/sqrt(4000) ≈ 0.008
        assert!(p_exact.max_abs_diff(&p_mc) < 0.04, "step {m}");
    }
}

#[test]
fn open_walk_keeps_density_matrix_invariants() {
    let cfg = WalkConfig::new(5.0, 31).with_levels(64).with_steps(15).with_loss(0.02);
    let states = run_open_walk(&cfg, &cfg.coherent_start().unwrap()).unwrap();
    for rho in &states {
        let m = rho.matrix();
        assert!((trace(m).re - 1.0).abs() <= 1e-8);
        assert!(hermiticity_defect(m) <= 1e-10);
        assert!(min_eigenvalue(m) >= -1e-8);
        // the validating constructor accepts every produced state
        DensityMatrix::new(m.clone()).unwrap();
    }
}

#[test]
fn zero_loss_open_walk_equals_pure_walk_for_phase_start() {
    let cfg = WalkConfig::new(0.0, 8).with_steps(10);
    let space = cfg.space().unwrap();
    let start = phase_state(&space, 0).unwrap();
    let pure = run_ideal_walk(&cfg, &start).unwrap();
    let open = run_open_walk(&cfg, &start).unwrap();
    for (p, o) in pure.iter().zip(&open) {
        assert!(max_abs_diff(&p.density(), o.matrix()) < 1e-10);
    }
}

#[test]
fn only_products_of_rates_and_durations_matter() {
    let cfg = WalkConfig::new(3.0, 19).with_levels(24).with_steps(6);
    let start = cfg.coherent_start().unwrap();
    let base = LindbladParams::new(19, 0.03, 100).unwrap();
    for c in [0.25, 4.0] {
        let scaled = LindbladParams::with_time_scale(19, 1.0 / c, 0.03 * c, 100).unwrap();
        assert!(rel_diff(scaled.chi, base.chi * c) < 1e-14);
        let a = run_open_walk_with(&cfg, &start, &base).unwrap();
        let b = run_open_walk_with(&cfg, &start, &scaled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(max_abs_diff(x.matrix(), y.matrix()) < 1e-9, "c={c}");
        }
    }
}

#[test]
fn strong_damping_empties_field_and_leaves_coin_mixed() {
    let cfg = WalkConfig::new(5.0, 31).with_levels(64).with_steps(8).with_loss(10.0).with_substeps(400);
    let states = run_open_walk(&cfg, &cfg.coherent_start().unwrap()).unwrap();
    let joint: Vec<f64> = states.iter().map(|r| purity(r.matrix())).collect();
    assert!((joint[0] - 1.0).abs() < 1e-12);
    for w in joint.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{joint:?}");
    }
    // the field ends in the vacuum, which is pure; the photons that left
    // carried away part of the coin coherence
    let last = states.last().unwrap().matrix();
    let field = reduce_field(last);
    let photons: f64 = (0..64).map(|n| n as f64 * field[(n, n)].re).sum();
    assert!(photons < 1e-6);
    assert!((purity(&field) - 1.0).abs() < 1e-6);
    assert!(purity(&reduce_coin(last)) < 0.99);
}

#[test]
fn quadrature_distributions_are_consistent_for_walk_states() {
    let spec = (5.0, 31, 64);
    let cfg = WalkConfig::new(spec.0, spec.1).with_levels(spec.2).with_steps(15);
    let space = cfg.space().unwrap();
    let grid = Grid::for_mean_photons(25.0);
    let start = cfg.coherent_start().unwrap();
    let mut fields: Vec<_> = run_ideal_walk(&cfg, &start).unwrap().iter().map(field_density).collect();
    fields.extend(run_classical_walk(&cfg, &start, RwMode::Ensemble).unwrap());
    for rho in &fields {
        for angle in [0.0, FRAC_PI_2] {
            let q = qpd(rho, angle, &grid, &space).unwrap();
            assert!(q.density.iter().all(|p| *p >= -1e-10));
            assert!((q.integral() - 1.0).abs() < 1e-4);
            let (gm, gv) = q.grid_moments();
            assert!((gm - q.mean).abs() < 1e-3 * q.mean.abs().max(1.0));
            assert!(rel_diff(gv, q.variance) < 1e-3);
        }
    }
}

#[test]
fn orthogonal_quadrature_growth_tracks_phase_spread_growth() {
    // Near θ = 0 the orthogonal quadrature is ≈ √(2n̄) sin θ. The lattice
    // distribution of the initial coherent state is much wider than its
    // quadrature width, so only the growth per step is compared.
    let cfg = WalkConfig::new(5.0, 31).with_levels(64).with_steps(3);
    let space = ModeSpace::with_levels(31, 64).unwrap();
    let start = coherent_state_truncated(&space, 5.0).unwrap();
    let states = run_classical_walk(&cfg, &start, RwMode::Ensemble).unwrap();
    let stats: Vec<(f64, f64, f64)> = states
        .iter()
        .map(|rho| {
            let dist = phase_distribution(rho, &space);
            let var_theta: f64 = (0..31).map(|k| dist.angle(k).powi(2) * dist.probabilities[k]).sum::<f64>()
                / dist.total();
            let var_p = quadrature_moments(rho, FRAC_PI_2).variance();
            let photons: f64 = (0..64).map(|n| n as f64 * rho[(n, n)].re).sum();
            (var_theta, var_p, photons)
        })
        .collect();
    let (theta0, p0, photons) = stats[0];
    for &(var_theta, var_p, _) in &stats[1..] {
        let predicted = 2.0 * photons * (var_theta - theta0);
        assert!(rel_diff(var_p - p0, predicted) < 0.2, "{} vs {predicted}", var_p - p0);
    }
}
