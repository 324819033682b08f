//! `det J(τ, t₀)`, focal-point scans and the Van Vleck–Morette matrix.
//!
//! `M(t₀, t) = ∂²S/∂x∂x₀` and the `J` block satisfy `J·M = −I` away from
//! focal points; both routes are provided so each can check the other.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::classical_path::{singular_threshold, solve_bvp_shooting, BvpProblem, ClassicalTrajectory, ShootingConfig};
use crate::error::{Error, Result, Warning};
use crate::hamiltonian::{eval_vector_field, HamiltonianSpec};
use crate::io::fmt_f64;
use crate::ode::Tolerance;
use crate::variational::FundamentalMatrix;

/// Root refinement tolerance in τ.
pub const ROOT_TOL: f64 = 1e-10;

pub fn det_j(traj: &ClassicalTrajectory, tau: f64) -> Result<f64> {
    let n = traj.n();
    Ok(traj.phi_at(tau)?.view((0, n), (n, n)).determinant())
}

fn det_j_unchecked(traj: &ClassicalTrajectory, buf: &mut [f64], tau: f64) -> f64 {
    let n = traj.n();
    traj.raw_at(tau, buf);
    crate::classical_path::phi_from_raw(n, buf)
        .view((0, n), (n, n))
        .determinant()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalScanReport {
    pub t0: f64,
    pub t1: f64,
    pub grid: Vec<f64>,
    pub det_j_values: Vec<f64>,
    pub focal_times: Vec<f64>,
    /// Zeros of the momentum in `(t₀, t₁)`; only for one degree of freedom.
    pub turning_times: Option<Vec<f64>>,
    pub warnings: Vec<Warning>,
}

impl FocalScanReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,det_j")?;
        for (t, d) in self.grid.iter().zip(&self.det_j_values) {
            writeln!(w, "{},{}", fmt_f64(*t), fmt_f64(*d))?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "t0": self.t0,
            "t1": self.t1,
            "focal_times": self.focal_times,
            "turning_times": self.turning_times,
            "warnings": self.warnings,
        })
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn bisect<F: FnMut(f64) -> f64>(f: &mut F, mut a: f64, mut b: f64, sa: i8) -> f64 {
    let tol = ROOT_TOL * 1e-2 * a.abs().max(b.abs()).max(1.0);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let sm = sign(f(m));
        if sm == 0 {
            return m;
        }
        if sm == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `f` on `grid`, with a midpoint probe per cell. `s0` is the
/// sign just after `grid[0]`. Returns the refined roots in increasing order.
fn scan_roots<F: FnMut(f64) -> f64>(
    f: &mut F,
    grid: &[f64],
    values: &[f64],
    s0: i8,
    warnings: &mut Vec<Warning>,
) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev = s0;
    for k in 0..grid.len() - 1 {
        let (a, b) = (grid[k], grid[k + 1]);
        let sb = sign(values[k + 1]);
        let mid = 0.5 * (a + b);
        let sm = sign(f(mid));
        let before = roots.len();
        if prev != 0 && sm != 0 && sm != prev {
            roots.push(bisect(f, a, mid, prev));
            if sb != 0 && sb != sm {
                roots.push(bisect(f, mid, b, sm));
            }
        } else if sm != 0 && sb != 0 && sb != sm {
            roots.push(bisect(f, mid, b, sm));
        }
        if roots.len() - before >= 2 {
            warnings.push(Warning::GridTooCoarse {
                cell_start: a,
                cell_end: b,
            });
        }
        if sb != 0 {
            prev = sb;
        } else if sm != 0 {
            prev = sm;
        }
    }
    roots
}

/// Samples `det J` on a uniform grid, refines its sign changes by bisection
/// and, for one degree of freedom, locates zeros of the momentum.
pub fn focal_scan(traj: &ClassicalTrajectory, n_grid: usize) -> Result<FocalScanReport> {
    if n_grid < 2 {
        return Err(Error::spec("numerics.grid", "scan grid needs at least two points"));
    }
    let (t0, t1) = (traj.t0(), traj.t1());
    let grid: Vec<f64> = (0..n_grid)
        .map(|k| {
            if k + 1 == n_grid {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / (n_grid - 1) as f64
            }
        })
        .collect();
    let mut buf = vec![0.0; crate::classical_path::AugmentedFlow::dim_for(traj.n())];
    let mut det = |t: f64| det_j_unchecked(traj, &mut buf, t);
    let values: Vec<f64> = grid.iter().map(|&t| det(t)).collect();
    let mut warnings = Vec::new();

    // det J vanishes at t₀ and is positive just after it
    let mut focal_times = scan_roots(&mut det, &grid, &values, 1, &mut warnings);
    let threshold = singular_threshold(traj.tolerance(), &traj.phi_at(t1)?);
    if values[n_grid - 1].abs() < threshold && focal_times.last().map_or(true, |&r| t1 - r > ROOT_TOL) {
        focal_times.push(t1);
    }

    let turning_times = if traj.n() == 1 {
        let mut mom = |t: f64| traj.momentum_1d(t);
        let yv: Vec<f64> = grid.iter().map(|&t| mom(t)).collect();
        let start = traj.initial_state();
        let s0 = match sign(start.y[0]) {
            0 => sign(eval_vector_field(traj.spec(), &start)[1]),
            s => s,
        };
        let roots = scan_roots(&mut mom, &grid, &yv, s0, &mut warnings);
        Some(roots.into_iter().filter(|&r| r > t0 && r < t1).collect())
    } else {
        None
    };

    Ok(FocalScanReport {
        t0,
        t1,
        grid,
        det_j_values: values,
        focal_times,
        turning_times,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VanVleckSource {
    FromJ,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VanVleckMatrix {
    pub matrix: DMatrix<f64>,
    pub source: VanVleckSource,
}

/// `M = −J⁻¹`. Fails with `FocalPoint` when `det J` is indistinguishable from
/// zero at the default integrator tolerance.
#[allow(non_snake_case)]
pub fn van_vleck_from_J(phi: &FundamentalMatrix) -> Result<VanVleckMatrix> {
    let j = phi.block_j();
    let det = j.determinant();
    if !(det.abs() > singular_threshold(Tolerance::default(), &phi.matrix)) {
        return Err(Error::FocalPoint {
            time: phi.tau,
            det_j: det,
        });
    }
    let inv = j.try_inverse().ok_or(Error::FocalPoint {
        time: phi.tau,
        det_j: det,
    })?;
    Ok(VanVleckMatrix {
        matrix: -inv,
        source: VanVleckSource::FromJ,
    })
}

/// Default finite-difference step `1e-3·max(1, |x|)`.
pub fn default_fd_step(bvp: &BvpProblem) -> f64 {
    let scale = bvp.x0.amax().max(bvp.x1.amax()).max(1.0);
    1e-3 * scale
}

/// Action of the path joining `x0` to `x1`, corrected to first order for the
/// shooting residual: `S + y(t₁)·(x1 − x(t₁))`.
pub fn endpoint_action(
    spec: &HamiltonianSpec,
    bvp: &BvpProblem,
    cfg: &ShootingConfig,
) -> Result<(f64, ClassicalTrajectory)> {
    let traj = solve_bvp_shooting(spec, bvp, cfg)?;
    let end = traj.final_state();
    let s = traj.action + end.y.dot(&(&bvp.x1 - &end.x));
    Ok((s, traj))
}

/// `M_ij ≈ ∂²S/∂x_i∂x0_j` by central differences over repeated BVP solves.
pub fn van_vleck_fd(spec: &HamiltonianSpec, bvp: &BvpProblem, cfg: &ShootingConfig, h: f64) -> Result<VanVleckMatrix> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let n = bvp.n();
    // the unperturbed solution seeds every corner solve
    let (_, base) = endpoint_action(spec, bvp, cfg)?;
    let seeded = cfg.clone().with_guess(base.initial_state().y.clone());

    let corners: Vec<(usize, usize, f64, f64)> = (0..n)
        .flat_map(|i| {
            (0..n).flat_map(move |j| [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].map(|(a, b)| (i, j, a, b)))
        })
        .collect();
    let values: Vec<f64> = corners
        .par_iter()
        .map(|&(i, j, a, b)| {
            let mut p = bvp.clone();
            p.x1[i] += a * h;
            p.x0[j] += b * h;
            endpoint_action(spec, &p, &seeded).map(|(s, _)| a * b * s)
        })
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (k, &(i, j, _, _)) in corners.iter().enumerate() {
        m[(i, j)] += values[k] / (4.0 * h * h);
    }
    if m.iter().any(|v: &f64| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "non-finite finite-difference Van Vleck matrix".into(),
        ));
    }
    Ok(VanVleckMatrix {
        matrix: m,
        source: VanVleckSource::FiniteDifference,
    })
}

/// `−∂S/∂x₀` by central differences; equals the shooting momentum `y₀`.
pub fn initial_momentum_fd(
    spec: &HamiltonianSpec,
    bvp: &BvpProblem,
    cfg: &ShootingConfig,
    h: f64,
) -> Result<DVector<f64>> {
    let n = bvp.n();
    let mut out = DVector::zeros(n);
    for j in 0..n {
        let mut plus = bvp.clone();
        let mut minus = bvp.clone();
        plus.x0[j] += h;
        minus.x0[j] -= h;
        let sp = endpoint_action(spec, &plus, cfg)?.0;
        let sm = endpoint_action(spec, &minus, cfg)?.0;
        out[j] = -(sp - sm) / (2.0 * h);
    }
    Ok(out)
}
