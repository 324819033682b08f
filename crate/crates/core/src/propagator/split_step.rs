//! Strang split-operator reference solver for the one-dimensional
//! Schrödinger equation on a periodic grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::WavepacketGrid;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;

/// Evolves `psi0` from `psi0.t` to `t1` in `steps` Strang steps. The grid is
/// treated as periodic with period `n·dx`, so ψ must be negligible at the
/// boundaries throughout.
pub fn split_step_propagate(
    spec: &HamiltonianSpec,
    hbar: f64,
    psi0: &WavepacketGrid,
    t1: f64,
    steps: usize,
) -> Result<WavepacketGrid> {
    if spec.n() != 1 {
        return Err(Error::NotOneDof { n: spec.n() });
    }
    super::check_hbar(hbar)?;
    if steps == 0 || !(t1 > psi0.t) {
        return Err(Error::InvalidInput(
            "split-step needs t1 > t0 and at least one step".into(),
        ));
    }
    let m = spec.mass()[0];
    let n = psi0.n_points();
    let dx = psi0.dx();
    let dt = (t1 - psi0.t) / steps as f64;
    let xs = psi0.coords();

    let kinetic: Vec<Complex64> = (0..n)
        .map(|j| {
            let idx = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            let k = 2.0 * PI * idx / (n as f64 * dx);
            Complex64::from_polar(1.0 / n as f64, -hbar * k * k * dt / (2.0 * m))
        })
        .collect();
    let v0: Vec<f64> = xs.iter().map(|&x| spec.potential_1d(x).0).collect();
    let half_kick = |t: f64| -> Vec<Complex64> {
        let g = spec.drive_at(t);
        v0.iter()
            .zip(&xs)
            .map(|(v, x)| Complex64::from_polar(1.0, -(v - g * x) * dt / (2.0 * hbar)))
            .collect()
    };

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex64::default(); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
    let mut psi = psi0.values.clone();
    let autonomous = spec.is_autonomous();
    let fixed = half_kick(psi0.t);
    for step in 0..steps {
        let ta = psi0.t + dt * step as f64;
        let (ka, kb) = if autonomous {
            (None, None)
        } else {
            (Some(half_kick(ta)), Some(half_kick(ta + dt)))
        };
        for (p, k) in psi.iter_mut().zip(ka.as_ref().unwrap_or(&fixed)) {
            *p *= k;
        }
        fwd.process_with_scratch(&mut psi, &mut scratch);
        for (p, k) in psi.iter_mut().zip(&kinetic) {
            *p *= k;
        }
        inv.process_with_scratch(&mut psi, &mut scratch);
        for (p, k) in psi.iter_mut().zip(kb.as_ref().unwrap_or(&fixed)) {
            *p *= k;
        }
    }
    WavepacketGrid::new(psi0.x_min, psi0.x_max, psi, t1)
}
