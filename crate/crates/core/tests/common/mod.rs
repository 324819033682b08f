#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiclassic::{
    integrate_ivp, BvpProblem, ClassicalTrajectory, Complex64, DMatrix, Drive, HamiltonianSpec, PhaseState, Tolerance,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Induced ∞-norm (largest absolute row sum).
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn symplectic_unit(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// n-point Gauss–Legendre rule on [a, b].
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out.push((0.5 * (a + b) + 0.5 * (b - a) * z, 0.5 * (b - a) * w));
    }
    out
}

pub fn free_kernel(m: f64, hbar: f64, x0: f64, x: f64, t: f64) -> Complex64 {
    let pre = (Complex64::new(m / (2.0 * PI * hbar * t), 0.0) / Complex64::i()).sqrt();
    pre * Complex64::from_polar(1.0, m * (x - x0).powi(2) / (2.0 * hbar * t))
}

/// Mehler kernel for 0 < ωt < π.
pub fn mehler_kernel(m: f64, w: f64, hbar: f64, x0: f64, x: f64, t: f64) -> Complex64 {
    let (s, c) = (w * t).sin_cos();
    let pre = (Complex64::new(m * w / (2.0 * PI * hbar * s), 0.0) / Complex64::i()).sqrt();
    let action = m * w * ((x * x + x0 * x0) * c - 2.0 * x * x0) / (2.0 * s);
    pre * Complex64::from_polar(1.0, action / hbar)
}

/// Classical action of the oscillator driven by `+γ(τ)x` in the Lagrangian,
/// from the closed-form Green's-function expression.
pub fn forced_action(m: f64, w: f64, gamma: &dyn Fn(f64) -> f64, x0: f64, x: f64, ta: f64, tb: f64) -> f64 {
    let big_t = tb - ta;
    let (s, c) = (w * big_t).sin_cos();
    let rule = gauss_legendre(64, ta, tb);
    let i_b: f64 = rule.iter().map(|&(t, wt)| wt * gamma(t) * (w * (t - ta)).sin()).sum();
    let i_a: f64 = rule.iter().map(|&(t, wt)| wt * gamma(t) * (w * (tb - t)).sin()).sum();
    let double: f64 = rule
        .iter()
        .map(|&(t, wt)| {
            let inner: f64 = gauss_legendre(64, ta, t)
                .iter()
                .map(|&(u, wu)| wu * gamma(u) * (w * (u - ta)).sin())
                .sum();
            wt * gamma(t) * (w * (tb - t)).sin() * inner
        })
        .sum();
    m * w / (2.0 * s) * ((x * x + x0 * x0) * c - 2.0 * x * x0) + x * i_b / s + x0 * i_a / s - double / (m * w * s)
}

pub fn forced_kernel(m: f64, w: f64, drive: &Drive, hbar: f64, x0: f64, x: f64, ta: f64, tb: f64) -> Complex64 {
    let s = (w * (tb - ta)).sin();
    let pre = (Complex64::new(m * w / (2.0 * PI * hbar * s), 0.0) / Complex64::i()).sqrt();
    pre * Complex64::from_polar(1.0, forced_action(m, w, &|t| drive.eval(t), x0, x, ta, tb) / hbar)
}

/// A boundary-value problem expected to have a unique focal-free short path.
#[derive(Debug, Clone)]
pub struct Case {
    pub label: &'static str,
    pub spec: HamiltonianSpec,
    pub bvp: BvpProblem,
}

/// Randomised free, harmonic and quartic problems without focal points.
pub fn bvp_corpus(seed: u64, per_family: usize) -> Vec<Case> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for _ in 0..per_family {
        let m = r.gen_range(0.5..2.0);
        let t = r.gen_range(0.3..2.0);
        out.push(Case {
            label: "free",
            spec: HamiltonianSpec::free(m),
            bvp: BvpProblem::one_dof(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), 0.0, t).unwrap(),
        });
    }
    for _ in 0..per_family {
        let m = r.gen_range(0.5..2.0);
        let w = r.gen_range(0.5..2.0);
        let t = r.gen_range(0.2..2.8) / w;
        let t0 = r.gen_range(-1.0..1.0);
        out.push(Case {
            label: "harmonic",
            spec: HamiltonianSpec::harmonic(m, w).unwrap(),
            bvp: BvpProblem::one_dof(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5), t0, t0 + t).unwrap(),
        });
    }
    for _ in 0..per_family {
        let lambda = r.gen_range(0.1..1.0);
        let t = r.gen_range(0.2..0.5);
        out.push(Case {
            label: "quartic",
            spec: HamiltonianSpec::quartic(1.0, lambda).unwrap(),
            bvp: BvpProblem::one_dof(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), 0.0, t).unwrap(),
        });
    }
    out
}

/// Initial-value trajectories whose momentum stays well away from zero.
pub fn monotone_corpus(seed: u64, per_family: usize) -> Vec<(&'static str, ClassicalTrajectory)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let families: [(&str, fn(&mut ChaCha8Rng) -> HamiltonianSpec); 4] = [
        ("free", |r| HamiltonianSpec::free(r.gen_range(0.5..2.0))),
        ("harmonic", |r| {
            HamiltonianSpec::harmonic(r.gen_range(0.5..2.0), r.gen_range(0.5..2.0)).unwrap()
        }),
        ("cubic", |r| {
            HamiltonianSpec::cubic(r.gen_range(0.5..2.0), r.gen_range(-1.0..1.0)).unwrap()
        }),
        ("quartic", |r| {
            HamiltonianSpec::quartic(r.gen_range(0.5..2.0), r.gen_range(0.1..1.0)).unwrap()
        }),
    ];
    for (label, make) in families {
        let mut accepted = 0;
        while accepted < per_family {
            let spec = make(&mut r);
            let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
            let z0 = PhaseState::one_dof(
                r.gen_range(-0.5..0.5),
                sign * r.gen_range(1.0..2.5),
                r.gen_range(-0.5..0.5),
            );
            let t1 = z0.t + r.gen_range(0.2..0.8);
            let traj = integrate_ivp(&spec, &z0, t1, Tolerance::default()).unwrap();
            let y0 = z0.y[0].abs();
            let keeps_sign = (0..=400).all(|k| {
                let t = z0.t + (t1 - z0.t) * k as f64 / 400.0;
                let y = traj.state_at(t).unwrap().y[0];
                y * sign > 0.2 * y0
            });
            if keeps_sign {
                out.push((label, traj));
                accepted += 1;
            }
        }
    }
    out
}

/// Prints the criterion verdict and returns it.
pub fn report(id: u32, name: &str, ok: bool, detail: String) -> bool {
    println!(
        "criterion {id} [{name}]: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}
