//! Semiclassical propagator, exact quadratic kernels and wavepacket
//! propagation by kernel quadrature.
//!
//! `K_WKB = (2πiℏ)^{−n/2} |det J(t, t₀)|^{−1/2} exp(iS/ℏ)` with the principal
//! root `i^{−1/2} = e^{−iπ/4}` per degree of freedom and no Maslov phase.

pub mod analytic;
mod kernel_table;
pub mod split_step;
mod wavepacket;

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::classical_path::{
    compute_action, singular_threshold, solve_bvp_shooting, BvpProblem, ClassicalTrajectory, ShootingConfig,
};
use crate::closed_form::quadrature_J;
use crate::error::{Error, Result};
use crate::gelfand_yaglom::focal_scan;
use crate::hamiltonian::{Drive, HamiltonianSpec};

pub use kernel_table::{KernelTable, KernelTableConfig};
pub use wavepacket::{propagate_wavepacket, PropagationOutput, WavepacketGrid};

/// Grid used to look for focal points strictly inside the path interval.
pub const FOCAL_SCAN_GRID: usize = 64;

/// Branch bookkeeping for the complex prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrefactorBranch {
    /// `−nπ/4`, from the principal root of `(2πiℏ)^{−n/2}`.
    pub phase_offset: f64,
    /// Sign of `det J`; only its modulus enters the amplitude.
    pub det_j_sign: f64,
    /// Always zero: no focal points are crossed.
    pub maslov_index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorResult {
    pub amplitude: Complex64,
    pub action: f64,
    pub det_j: f64,
    pub hbar: f64,
    pub n: usize,
    pub prefactor_branch: PrefactorBranch,
}

impl PropagatorResult {
    /// Builds the WKB amplitude from the action and `det J`.
    pub fn assemble(n: usize, action: f64, det_j: f64, hbar: f64) -> Self {
        let offset = -(n as f64) * FRAC_PI_4;
        let modulus = (2.0 * PI * hbar).powf(-(n as f64) / 2.0) / det_j.abs().sqrt();
        Self {
            amplitude: Complex64::from_polar(modulus, action / hbar + offset),
            action,
            det_j,
            hbar,
            n,
            prefactor_branch: PrefactorBranch {
                phase_offset: offset,
                det_j_sign: det_j.signum(),
                maslov_index: 0,
            },
        }
    }

    pub fn modulus(&self) -> f64 {
        self.amplitude.norm()
    }

    /// `S/ℏ − nπ/4`, unwrapped.
    pub fn phase(&self) -> f64 {
        self.action / self.hbar + self.prefactor_branch.phase_offset
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "amplitude": { "re": self.amplitude.re, "im": self.amplitude.im },
            "modulus": self.modulus(),
            "phase": self.phase(),
            "action": self.action,
            "det_j": self.det_j,
            "hbar": self.hbar,
            "n": self.n,
            "prefactor_branch": self.prefactor_branch,
        })
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::spec("numerics.hbar", "hbar must be positive and finite"))
    }
}

/// Shooting with singular Jacobians reported as focal points at `t₁`.
pub(crate) fn classical_path(
    spec: &HamiltonianSpec,
    bvp: &BvpProblem,
    cfg: &ShootingConfig,
) -> Result<ClassicalTrajectory> {
    solve_bvp_shooting(spec, bvp, cfg).map_err(|e| match e {
        Error::SingularShootingJacobian { det_j, .. } => Error::FocalPoint { time: bvp.t1, det_j },
        other => other,
    })
}

/// Focal checks on a solved path; returns `det J(t₁, t₀)`.
pub(crate) fn checked_det_j(traj: &ClassicalTrajectory) -> Result<f64> {
    let n = traj.n();
    let t1 = traj.t1();
    let phi = traj.phi_at(t1)?;
    let det = phi.view((0, n), (n, n)).determinant();
    if !(det.abs() >= singular_threshold(traj.tolerance(), &phi)) {
        return Err(Error::FocalPoint { time: t1, det_j: det });
    }
    let scan = focal_scan(traj, FOCAL_SCAN_GRID)?;
    let span = t1 - traj.t0();
    if let Some(&time) = scan.focal_times.iter().find(|&&r| r < t1 - 1e-9 * span) {
        return Err(Error::FocalPointInInterior { time });
    }
    Ok(det)
}

/// Semiclassical propagator from the variational route.
pub fn k_wkb(spec: &HamiltonianSpec, bvp: &BvpProblem, hbar: f64, cfg: &ShootingConfig) -> Result<PropagatorResult> {
    check_hbar(hbar)?;
    let traj = classical_path(spec, bvp, cfg)?;
    let det = checked_det_j(&traj)?;
    Ok(PropagatorResult::assemble(spec.n(), traj.action, det, hbar))
}

/// Same amplitude with `det J` from the one-dimensional quadrature formula.
pub fn k_wkb_closed_form(
    spec: &HamiltonianSpec,
    bvp: &BvpProblem,
    hbar: f64,
    cfg: &ShootingConfig,
) -> Result<PropagatorResult> {
    check_hbar(hbar)?;
    let traj = classical_path(spec, bvp, cfg)?;
    checked_det_j(&traj)?;
    let det = quadrature_J(&traj, bvp.t1)?;
    Ok(PropagatorResult::assemble(1, traj.action, det, hbar))
}

/// Free-particle kernel `(m/2πiℏΔt)^{n/2} exp(i m|x₁−x₀|²/2ℏΔt)`.
pub fn exact_kernel_free(m: f64, hbar: f64, bvp: &BvpProblem) -> Complex64 {
    let n = bvp.n() as f64;
    let dt = bvp.duration();
    let d2 = (&bvp.x1 - &bvp.x0).norm_squared();
    let modulus = (m / (2.0 * PI * hbar * dt)).powf(n / 2.0);
    Complex64::from_polar(modulus, m * d2 / (2.0 * hbar * dt) - n * FRAC_PI_4)
}

fn ho_prefactor(m: f64, omega: f64, hbar: f64, bvp: &BvpProblem) -> Result<(Complex64, f64)> {
    let wt = omega * bvp.duration();
    let s = wt.sin();
    if s.abs() < 1e-12 {
        return Err(Error::FocalPoint {
            time: bvp.t1,
            det_j: s / (m * omega),
        });
    }
    let root = (Complex64::new(m * omega / (2.0 * PI * hbar * s), 0.0) / Complex64::i()).sqrt();
    Ok((root.powi(bvp.n() as i32), s))
}

/// Mehler kernel of the isotropic oscillator, principal branch.
pub fn exact_kernel_ho(m: f64, omega: f64, hbar: f64, bvp: &BvpProblem) -> Result<Complex64> {
    let (pre, s) = ho_prefactor(m, omega, hbar, bvp)?;
    let c = (omega * bvp.duration()).cos();
    let action =
        m * omega * ((bvp.x0.norm_squared() + bvp.x1.norm_squared()) * c - 2.0 * bvp.x0.dot(&bvp.x1)) / (2.0 * s);
    Ok(pre * Complex64::from_polar(1.0, action / hbar))
}

/// Forced-oscillator kernel: oscillator prefactor times `exp(iS/ℏ)` with the
/// action of the forced classical path.
pub fn exact_kernel_forced(
    m: f64,
    omega: f64,
    drive: &Drive,
    hbar: f64,
    bvp: &BvpProblem,
    cfg: &ShootingConfig,
) -> Result<Complex64> {
    check_hbar(hbar)?;
    if bvp.n() != 1 {
        return Err(Error::NotOneDof { n: bvp.n() });
    }
    let (pre, _) = ho_prefactor(m, omega, hbar, bvp)?;
    let spec = HamiltonianSpec::forced_oscillator(m, omega, drive.clone())?;
    let traj = classical_path(&spec, bvp, cfg)?;
    Ok(pre * Complex64::from_polar(1.0, compute_action(&traj) / hbar))
}
