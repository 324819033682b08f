//! Acceptance suite. Every test prints one verdict line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to read them.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use semiclassic::closed_form::{inverse_momentum_integral, quadrature_J};
use semiclassic::gelfand_yaglom::{default_fd_step, van_vleck_fd};
use semiclassic::propagator::split_step::split_step_propagate;
use semiclassic::{
    det_j, focal_scan, integrate_ivp, integrate_variational, k_wkb, solve_bvp_shooting, BvpProblem, Complex64, DMatrix,
    DVector, Drive, GaugeReduction, HamiltonianSpec, KernelTable, KernelTableConfig, PhaseState, PotentialFamily,
    ShootingConfig, Tolerance, WavepacketGrid,
};

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed < Duration::from_secs(secs)
}

#[test]
fn criterion_1_lemma_end_to_end() {
    let start = Instant::now();
    let cfg = ShootingConfig::default();
    let corpus = bvp_corpus(1, 7);
    let mut worst: f64 = 0.0;
    for case in &corpus {
        let traj = solve_bvp_shooting(&case.spec, &case.bvp, &cfg).unwrap();
        let j = integrate_variational(&traj, case.bvp.t1).unwrap().block_j();
        let m = van_vleck_fd(&case.spec, &case.bvp, &cfg, default_fd_step(&case.bvp))
            .unwrap()
            .matrix;
        let n = case.bvp.n();
        let r = inf_norm(&(&j * &m + DMatrix::identity(n, n)));
        worst = worst.max(r);
    }
    let elapsed = start.elapsed();
    let ok = corpus.len() >= 20 && worst <= 1e-4 && within(elapsed, 10);
    report(
        1,
        "lemma",
        ok,
        format!("{} problems, max |JM + I| = {worst:.3e}, {elapsed:.2?}", corpus.len()),
    );
    assert!(ok);
}

#[test]
fn criterion_2_closed_form_equivalence() {
    let start = Instant::now();
    let corpus = monotone_corpus(2, 6);
    let mut worst: f64 = 0.0;
    for (_, traj) in &corpus {
        for t in [0.5 * (traj.t0() + traj.t1()), traj.t1()] {
            let numeric = det_j(traj, t).unwrap();
            let closed = quadrature_J(traj, t).unwrap();
            worst = worst.max((closed - numeric).abs() / numeric.abs());
        }
    }
    let labels: Vec<&str> = corpus.iter().map(|c| c.0).collect();
    let elapsed = start.elapsed();
    let ok = corpus.len() >= 20
        && labels.contains(&"cubic")
        && labels.contains(&"quartic")
        && worst <= 1e-8
        && within(elapsed, 5);
    report(
        2,
        "closed form",
        ok,
        format!(
            "{} trajectories, max rel dev = {worst:.3e}, {elapsed:.2?}",
            corpus.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_3_harmonic_inverse_momentum_integral() {
    let mut r = rng(3);
    let cfg = ShootingConfig::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 10 {
        let m: f64 = r.gen_range(0.5..2.0);
        let w: f64 = r.gen_range(0.5..2.0);
        let t = r.gen_range(0.2..2.5) / w;
        let x0: f64 = r.gen_range(-2.0..2.0);
        let x: f64 = r.gen_range(-2.0..2.0);
        // y(s) ∝ A cos ωs − x₀ sin ωs must keep its sign
        let a = (x - x0 * (w * t).cos()) / (w * t).sin();
        let profile: Vec<f64> = (0..=200)
            .map(|k| {
                let s = t * k as f64 / 200.0;
                a * (w * s).cos() - x0 * (w * s).sin()
            })
            .collect();
        let peak = profile.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if profile.iter().any(|v| v * profile[0].signum() < 0.1 * peak) {
            continue;
        }
        let spec = HamiltonianSpec::harmonic(m, w).unwrap();
        let traj = solve_bvp_shooting(&spec, &BvpProblem::one_dof(x0, x, 0.0, t).unwrap(), &cfg).unwrap();
        let numeric = inverse_momentum_integral(&traj, 0.0, t).unwrap();
        let (s, c) = (w * t).sin_cos();
        let closed = s.powi(3) / (m * m * w.powi(3) * (x - x0 * c) * (x * c - x0));
        worst = worst.max((numeric - closed).abs() / closed.abs());
        count += 1;
    }
    let ok = worst <= 1e-8;
    report(
        3,
        "harmonic integral",
        ok,
        format!("10 points, max rel dev = {worst:.3e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_4_quadratic_exactness() {
    let start = Instant::now();
    let mut r = rng(4);
    let cfg = ShootingConfig::default();
    let mut worst: f64 = 0.0;
    let mut draws = 0;
    for k in 0..36 {
        let m: f64 = r.gen_range(0.5..2.0);
        let hbar: f64 = r.gen_range(0.2..2.0);
        let x0: f64 = r.gen_range(-2.0..2.0);
        let x: f64 = r.gen_range(-2.0..2.0);
        let t0: f64 = r.gen_range(-0.5..0.5);
        let (spec, t1, exact) = match k % 3 {
            0 => {
                let t1 = t0 + r.gen_range(0.2..2.0);
                (HamiltonianSpec::free(m), t1, free_kernel(m, hbar, x0, x, t1 - t0))
            }
            1 => {
                let w: f64 = r.gen_range(0.5..2.0);
                let t1 = t0 + r.gen_range(0.1..3.0) / w;
                (
                    HamiltonianSpec::harmonic(m, w).unwrap(),
                    t1,
                    mehler_kernel(m, w, hbar, x0, x, t1 - t0),
                )
            }
            _ => {
                let w: f64 = r.gen_range(0.5..2.0);
                let t1 = t0 + r.gen_range(0.1..3.0) / w;
                let drive = match r.gen_range(0..3) {
                    0 => Drive::Constant {
                        value: r.gen_range(-1.0..1.0),
                    },
                    1 => Drive::Sinusoidal {
                        amplitude: r.gen_range(-1.0..1.0),
                        frequency: r.gen_range(0.2..3.0),
                        phase: r.gen_range(0.0..PI),
                    },
                    _ => Drive::Polynomial {
                        coefficients: vec![r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-0.5..0.5)],
                    },
                };
                let exact = forced_kernel(m, w, &drive, hbar, x0, x, t0, t1);
                (HamiltonianSpec::forced_oscillator(m, w, drive).unwrap(), t1, exact)
            }
        };
        let bvp = BvpProblem::one_dof(x0, x, t0, t1).unwrap();
        let k = k_wkb(&spec, &bvp, hbar, &cfg).unwrap();
        worst = worst.max((k.amplitude - exact).norm() / exact.norm());
        draws += 1;
    }
    let elapsed = start.elapsed();
    let ok = draws >= 30 && worst <= 1e-8 && within(elapsed, 10);
    report(
        4,
        "quadratic exactness",
        ok,
        format!("{draws} draws, max rel dev = {worst:.3e}, {elapsed:.2?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_5_gauge_structure() {
    let corpus = monotone_corpus(2, 6);
    let (mut off, mut diag): (f64, f64) = (0.0, 0.0);
    for (_, traj) in &corpus {
        let m = traj.spec().mass()[0];
        let red = GaugeReduction::build(traj, 50).unwrap();
        assert_eq!(red.pa.len(), 50);
        off = off.max(red.structure_residual());
        for (tau, pa) in red.tau.iter().zip(&red.pa) {
            let y = traj.state_at(*tau).unwrap().y[0];
            let expect = -m / (y * y);
            diag = diag.max((pa[(1, 0)] - expect).abs() / expect.abs());
        }
    }
    let ok = off < 1e-9 && diag <= 1e-9;
    report(
        5,
        "gauge structure",
        ok,
        format!(
            "{} trajectories, off-structure {off:.3e}, (1,0) rel dev {diag:.3e}",
            corpus.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_6_focal_detection() {
    let mut worst: f64 = 0.0;
    let mut all_single = true;
    for w in [0.5, 1.0, 2.0, 3.7, 6.0] {
        let spec = HamiltonianSpec::harmonic(1.3, w).unwrap();
        let traj = integrate_ivp(
            &spec,
            &PhaseState::one_dof(0.4, 0.9, 0.0),
            1.4 * PI / w,
            Tolerance::default(),
        )
        .unwrap();
        let scan = focal_scan(&traj, 64).unwrap();
        all_single &= scan.focal_times.len() == 1;
        if let Some(&tf) = scan.focal_times.first() {
            worst = worst.max((tf - PI / w).abs());
        } else {
            worst = f64::INFINITY;
        }
    }
    let free = integrate_ivp(
        &HamiltonianSpec::free(1.0),
        &PhaseState::one_dof(0.3, 1.1, 0.0),
        5.0,
        Tolerance::default(),
    )
    .unwrap();
    let free_empty = focal_scan(&free, 64).unwrap().focal_times.is_empty();
    let ok = all_single && worst <= 1e-8 && free_empty;
    report(
        6,
        "focal detection",
        ok,
        format!("5 frequencies, max |t_f − π/ω| = {worst:.3e}, free focal set empty: {free_empty}"),
    );
    assert!(ok);
}

#[test]
fn criterion_7_symplecticity_and_composition() {
    let cfg = ShootingConfig::default();
    let mut trajectories: Vec<_> = bvp_corpus(1, 7)
        .iter()
        .map(|c| solve_bvp_shooting(&c.spec, &c.bvp, &cfg).unwrap())
        .collect();
    trajectories.extend(monotone_corpus(2, 6).into_iter().map(|c| c.1));
    let spec2 = HamiltonianSpec::new(vec![1.0, 2.0], PotentialFamily::Harmonic { omega: 1.2 }, None).unwrap();
    let bvp2 = BvpProblem::new(
        DVector::from_vec(vec![0.3, -0.4]),
        DVector::from_vec(vec![1.0, 0.5]),
        0.0,
        1.7,
    )
    .unwrap();
    trajectories.push(solve_bvp_shooting(&spec2, &bvp2, &cfg).unwrap());

    let (mut symp, mut comp): (f64, f64) = (0.0, 0.0);
    for traj in &trajectories {
        let (t0, t2) = (traj.t0(), traj.t1());
        let t1 = t0 + 0.43 * (t2 - t0);
        let jj = symplectic_unit(traj.n());
        let phi20 = traj.phi_at(t2).unwrap();
        symp = symp.max(inf_norm(&(phi20.transpose() * &jj * &phi20 - &jj)));
        let phi10 = traj.phi_at(t1).unwrap();
        let restart = integrate_ivp(traj.spec(), &traj.state_at(t1).unwrap(), t2, Tolerance::default()).unwrap();
        let phi21 = restart.phi_at(t2).unwrap();
        comp = comp.max(inf_norm(&(&phi20 - phi21 * phi10)));
    }
    let ok = symp <= 1e-9 && comp <= 1e-8;
    report(
        7,
        "symplecticity",
        ok,
        format!(
            "{} trajectories, defect {symp:.3e}, composition {comp:.3e}",
            trajectories.len()
        ),
    );
    assert!(ok);
}

fn coherent_oracle(x: f64, t: f64, m: f64, w: f64, hbar: f64, c: f64, p: f64) -> Complex64 {
    let xt = c * (w * t).cos() + p / (m * w) * (w * t).sin();
    let pt = p * (w * t).cos() - m * w * c * (w * t).sin();
    let amp = (m * w / (PI * hbar)).powf(0.25) * (-m * w * (x - xt).powi(2) / (2.0 * hbar)).exp();
    Complex64::from_polar(amp, (pt * x - 0.5 * (pt * xt + p * c)) / hbar - 0.5 * w * t)
}

fn table(
    spec: &HamiltonianSpec,
    hbar: f64,
    t: f64,
    x: (f64, f64),
    x0: (f64, f64),
    nodes: (usize, usize),
) -> KernelTable {
    let cfg = KernelTableConfig {
        x_range: x,
        x_nodes: nodes.0,
        x0_range: x0,
        x0_nodes: nodes.1,
        shooting: ShootingConfig::default(),
    };
    KernelTable::build(spec, hbar, 0.0, t, &cfg).unwrap()
}

#[test]
fn criterion_8_cauchy_problem() {
    let start = Instant::now();
    let (m, w, hbar, c, p) = (1.0, 1.0, 1.0, 1.0, 0.5);
    let t = 0.5 * PI / w;
    let sigma = (hbar / (2.0 * m * w)).sqrt();
    let psi0 = WavepacketGrid::gaussian(-8.0, 8.0, 2048, c, sigma, p, hbar, 0.0).unwrap();
    let ho = table(
        &HamiltonianSpec::harmonic(m, w).unwrap(),
        hbar,
        t,
        (-8.0, 8.0),
        (-8.0, 8.0),
        (33, 33),
    );
    let out = semiclassic::propagate_wavepacket(|x, x0| ho.eval(x, x0), &psi0, t);
    let exact = WavepacketGrid::from_fn(-8.0, 8.0, 2048, t, |x| coherent_oracle(x, t, m, w, hbar, c, p)).unwrap();
    let coherent_err = out.psi.l2_distance(&exact);

    let (sigma, tf) = (1.0, 1.0);
    let psi0 = WavepacketGrid::gaussian(-20.0, 20.0, 2048, 0.0, sigma, 0.0, hbar, 0.0).unwrap();
    let free = table(
        &HamiltonianSpec::free(m),
        hbar,
        tf,
        (-20.0, 20.0),
        (-20.0, 20.0),
        (17, 17),
    );
    let spread = semiclassic::propagate_wavepacket(|x, x0| free.eval(x, x0), &psi0, tf);
    let analytic_width = sigma * (1.0 + (hbar * tf / (2.0 * m * sigma * sigma)).powi(2)).sqrt();
    let width_err = (spread.psi.width() - analytic_width).abs();

    let elapsed = start.elapsed();
    let ok = coherent_err < 1e-3 && width_err < 1e-4 && within(elapsed, 20);
    report(
        8,
        "cauchy problem",
        ok,
        format!("coherent L2 error {coherent_err:.3e}, width error {width_err:.3e}, {elapsed:.2?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_9_semiclassical_order() {
    let spec = HamiltonianSpec::quartic(1.0, 1.0).unwrap();
    let (t, c, sigma) = (0.25, 0.6, 0.1);
    let (lo, hi, n) = (-1.2, 1.8, 2048);
    let base = table(&spec, 1.0, t, (lo, hi), (-0.2, 1.4), (61, 33));
    let mut devs = Vec::new();
    let mut ref_gap: f64 = 0.0;
    for hbar in [0.1, 0.05, 0.025, 0.0125, 0.00625] {
        let kern = base.with_hbar(hbar).unwrap();
        let psi0 = WavepacketGrid::gaussian(lo, hi, n, c, sigma, 0.0, hbar, 0.0).unwrap();
        let wkb = semiclassic::propagate_wavepacket(|x, x0| kern.eval(x, x0), &psi0, t).psi;
        let reference = split_step_propagate(&spec, hbar, &psi0, t, 4000).unwrap();
        let finer = split_step_propagate(&spec, hbar, &psi0, t, 8000).unwrap();
        ref_gap = ref_gap.max(reference.l2_distance(&finer));
        devs.push(wkb.l2_distance(&reference));
    }
    let monotone = devs.windows(2).all(|w| w[1] < w[0]);
    let resolved = ref_gap < 0.1 * devs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let ok = monotone && resolved;
    let listed: Vec<String> = devs.iter().map(|d| format!("{d:.3e}")).collect();
    report(
        9,
        "semiclassical order",
        ok,
        format!("deviations [{}], reference gap {ref_gap:.1e}", listed.join(", ")),
    );
    assert!(ok);
}
