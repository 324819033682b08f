//! Classical trajectories: initial-value integration, Newton shooting for the
//! two-point boundary-value problem, and the classical action.
//!
//! A trajectory integrates the augmented state `(x, y, Φ, S)` in one adaptive
//! loop, where `Φ` is the fundamental matrix of the variational equation and
//! `S` the running action. Newton shooting uses the `J` block of `Φ` as the
//! exact Jacobian `∂x(t₁)/∂y₀`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hamiltonian::{eval_hamiltonian, HamiltonianSpec, PhaseState};
use crate::io::fmt_f64;
use crate::ode::{self, DenseSolution, IntegratorOptions, OdeSystem, Tolerance};
use crate::quad;

/// Relative energy drift tolerated along autonomous trajectories.
pub const ENERGY_TOL: f64 = 1e-9;

/// |det J| below which the shooting Jacobian is treated as singular.
pub const SINGULAR_DET_J: f64 = 1e-12;

/// Singularity threshold for a computed `J` block: the fixed floor
/// [`SINGULAR_DET_J`], raised to the level the integrator tolerance can
/// resolve. Near a focal point `det J` is pure integration noise of order
/// `rtol·‖Φ‖ⁿ`.
pub fn singular_threshold(tol: Tolerance, phi: &DMatrix<f64>) -> f64 {
    let n = phi.nrows() / 2;
    let scale = phi.amax().max(1.0);
    SINGULAR_DET_J.max(10.0 * tol.rtol.max(tol.atol) * scale.powi(n as i32))
}

const MAX_HALVINGS: usize = 8;

/// Augmented Hamiltonian flow on `(x, y, Φ, S)`; Φ is stored column-major.
pub(crate) struct AugmentedFlow<'a> {
    spec: &'a HamiltonianSpec,
    inv_mass: Vec<f64>,
}

impl<'a> AugmentedFlow<'a> {
    pub(crate) fn new(spec: &'a HamiltonianSpec) -> Self {
        Self {
            inv_mass: spec.mass().iter().map(|m| 1.0 / m).collect(),
            spec,
        }
    }

    pub(crate) fn dim_for(n: usize) -> usize {
        2 * n + 4 * n * n + 1
    }

    pub(crate) fn initial_state(z0: &PhaseState) -> Vec<f64> {
        let n = z0.n();
        let mut v = vec![0.0; Self::dim_for(n)];
        v[..n].copy_from_slice(z0.x.as_slice());
        v[n..2 * n].copy_from_slice(z0.y.as_slice());
        for k in 0..2 * n {
            v[2 * n + k * 2 * n + k] = 1.0;
        }
        v
    }
}

impl OdeSystem for AugmentedFlow<'_> {
    fn dim(&self) -> usize {
        Self::dim_for(self.spec.n())
    }

    fn rhs(&self, t: f64, z: &[f64], dz: &mut [f64]) {
        let n = self.spec.n();
        let (x, rest) = z.split_at(n);
        let y = &rest[..n];
        let g = self.spec.drive_at(t);

        // potential gradient and Hessian diagonal share a scratch buffer
        let mut scratch = [0.0f64; 16];
        let mut heap;
        let (grad, hdiag): (&mut [f64], &mut [f64]) = if 2 * n <= scratch.len() {
            let (a, b) = scratch.split_at_mut(n);
            (a, &mut b[..n])
        } else {
            heap = vec![0.0; 2 * n];
            let (a, b) = heap.split_at_mut(n);
            (a, b)
        };
        self.spec.potential_gradient(x, grad);
        self.spec.potential_hessian_diag(x, hdiag);

        let mut two_kinetic = 0.0;
        for i in 0..n {
            dz[i] = y[i] * self.inv_mass[i];
            dz[n + i] = -grad[i] + g;
            two_kinetic += y[i] * y[i] * self.inv_mass[i];
        }
        let dim2 = 2 * n;
        for col in 0..dim2 {
            let base = dim2 + col * dim2;
            for i in 0..n {
                dz[base + i] = z[base + n + i] * self.inv_mass[i];
                dz[base + n + i] = -hdiag[i] * z[base + i];
            }
        }
        let energy = 0.5 * two_kinetic + self.spec.potential_energy(x) - g * x.iter().sum::<f64>();
        dz[dim2 + dim2 * dim2] = two_kinetic - energy;
    }
}

/// Endpoints `(x₀, t₀)` and `(x₁, t₁)` of a classical path.
#[derive(Debug, Clone, PartialEq)]
pub struct BvpProblem {
    pub x0: DVector<f64>,
    pub x1: DVector<f64>,
    pub t0: f64,
    pub t1: f64,
}

impl BvpProblem {
    pub fn new(x0: DVector<f64>, x1: DVector<f64>, t0: f64, t1: f64) -> Result<Self> {
        let b = Self { x0, x1, t0, t1 };
        b.validate()?;
        Ok(b)
    }

    pub fn one_dof(x0: f64, x1: f64, t0: f64, t1: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, x0), DVector::from_element(1, x1), t0, t1)
    }

    pub fn n(&self) -> usize {
        self.x0.len()
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn validate(&self) -> Result<()> {
        if self.x0.len() != self.x1.len() || self.x0.is_empty() {
            return Err(Error::InvalidInput("endpoint dimensions differ".into()));
        }
        if !(self.t1 - self.t0 > 0.0) || !(self.t1 - self.t0).is_finite() {
            return Err(Error::spec("problem.t1", "t1 - t0 must be positive and finite"));
        }
        if self.x0.iter().chain(self.x1.iter()).any(|v| !v.is_finite()) {
            return Err(Error::spec("problem.x0", "endpoints must be finite"));
        }
        Ok(())
    }

    /// Initial momentum of the free particle joining the endpoints.
    pub fn free_particle_momentum(&self, spec: &HamiltonianSpec) -> DVector<f64> {
        let dt = self.duration();
        DVector::from_iterator(
            self.n(),
            (0..self.n()).map(|i| spec.mass()[i] * (self.x1[i] - self.x0[i]) / dt),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingConfig {
    /// Initial-momentum guess; `None` uses the free-particle momentum.
    pub y0_guess: Option<DVector<f64>>,
    pub max_iter: usize,
    pub residual_tol: f64,
    pub ivp_tol: Tolerance,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            y0_guess: None,
            max_iter: 50,
            residual_tol: 1e-10,
            ivp_tol: Tolerance::default(),
        }
    }
}

impl ShootingConfig {
    pub fn with_guess(mut self, y0: DVector<f64>) -> Self {
        self.y0_guess = Some(y0);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::spec("shooting.max_iter", "must be positive"));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::spec("shooting.residual_tol", "must be positive"));
        }
        if !self.ivp_tol.is_valid() {
            return Err(Error::spec("numerics.atol", "integrator tolerances must be positive"));
        }
        Ok(())
    }
}

/// Newton diagnostics attached to trajectories produced by shooting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingReport {
    pub iterations: usize,
    pub residual: f64,
}

/// A sampled classical integral curve with dense output, co-integrated
/// fundamental matrix and running action.
#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    spec: HamiltonianSpec,
    dense: DenseSolution,
    tol: Tolerance,
    /// S(γ) accumulated over the whole span.
    pub action: f64,
    shooting: Option<ShootingReport>,
}

impl ClassicalTrajectory {
    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn t0(&self) -> f64 {
        self.dense.t0()
    }

    pub fn t1(&self) -> f64 {
        self.dense.t1()
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn shooting(&self) -> Option<ShootingReport> {
        self.shooting
    }

    /// Integrator step boundaries.
    pub fn nodes(&self) -> &[f64] {
        self.dense.nodes()
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        let (t0, t1) = (self.t0(), self.t1());
        let slack = 1e-12 * (t1 - t0).abs().max(t0.abs()).max(t1.abs()).max(1.0);
        if t.is_finite() && t >= t0 - slack && t <= t1 + slack {
            Ok(())
        } else {
            Err(Error::OutOfRange { t, t0, t1 })
        }
    }

    pub(crate) fn raw_at(&self, t: f64, out: &mut [f64]) {
        self.dense.eval_into(t, out);
    }

    fn state_from_raw(&self, raw: &[f64], t: f64) -> PhaseState {
        let n = self.n();
        PhaseState::from_slices(&raw[..n], &raw[n..2 * n], t)
    }

    pub fn state_at(&self, t: f64) -> Result<PhaseState> {
        self.check_time(t)?;
        Ok(self.state_from_raw(&self.dense.eval(t), t))
    }

    pub fn initial_state(&self) -> PhaseState {
        self.state_from_raw(self.dense.node_state(0), self.t0())
    }

    pub fn final_state(&self) -> PhaseState {
        self.state_from_raw(self.dense.final_state(), self.t1())
    }

    /// Co-integrated fundamental matrix Φ(τ, t₀).
    pub fn phi_at(&self, t: f64) -> Result<DMatrix<f64>> {
        self.check_time(t)?;
        let raw = self.dense.eval(t);
        Ok(phi_from_raw(self.n(), &raw))
    }

    /// Running action ∫_{t₀}^{τ} L dτ from the co-integrated accumulator.
    pub fn action_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let raw = self.dense.eval(t);
        Ok(raw[raw.len() - 1])
    }

    /// Momentum of a one-degree-of-freedom trajectory at τ (no range check).
    pub(crate) fn momentum_1d(&self, t: f64) -> f64 {
        let mut raw = vec![0.0; self.dense.dim()];
        self.dense.eval_into(t, &mut raw);
        raw[1]
    }

    /// States at the integrator steps.
    pub fn samples(&self) -> Vec<(f64, PhaseState)> {
        self.nodes()
            .iter()
            .enumerate()
            .map(|(k, &t)| (t, self.state_from_raw(self.dense.node_state(k), t)))
            .collect()
    }

    /// max |H(τ) − H(t₀)| over the step nodes.
    pub fn energy_drift(&self) -> f64 {
        let h0 = eval_hamiltonian(&self.spec, &self.initial_state());
        self.samples()
            .iter()
            .map(|(_, s)| (eval_hamiltonian(&self.spec, s) - h0).abs())
            .fold(0.0, f64::max)
    }

    /// Scale against which energy drift is measured: the largest of |H₀|,
    /// kinetic energy and |V| seen along the path.
    fn energy_scale(&self) -> f64 {
        let h0 = eval_hamiltonian(&self.spec, &self.initial_state()).abs();
        self.samples().iter().fold(h0, |acc, (_, s)| {
            let v = self.spec.potential_energy(s.x.as_slice()).abs();
            let t = eval_hamiltonian(&self.spec, s) - self.spec.potential_energy(s.x.as_slice());
            acc.max(v).max(t.abs())
        })
    }

    /// Writes `tau, x1..xn, y1..yn, S_partial` at the integrator steps.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.n();
        let mut header = vec!["tau".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=n).map(|i| format!("y{i}")));
        header.push("S_partial".into());
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.nodes().len() {
            let raw = self.dense.node_state(k);
            let mut row = vec![fmt_f64(self.nodes()[k])];
            row.extend(raw[..2 * n].iter().map(|v| fmt_f64(*v)));
            row.push(fmt_f64(raw[raw.len() - 1]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn phi_from_raw(n: usize, raw: &[f64]) -> DMatrix<f64> {
    let d = 2 * n;
    DMatrix::from_column_slice(d, d, &raw[d..d + d * d])
}

fn integrate_once(spec: &HamiltonianSpec, z0: &PhaseState, t1: f64, tol: Tolerance) -> Result<ClassicalTrajectory> {
    let flow = AugmentedFlow::new(spec);
    let y0 = AugmentedFlow::initial_state(z0);
    let dense = ode::integrate(&flow, z0.t, &y0, t1, &IntegratorOptions::from(tol))?;
    let action = dense.final_state()[dense.dim() - 1];
    Ok(ClassicalTrajectory {
        spec: spec.clone(),
        dense,
        tol,
        action,
        shooting: None,
    })
}

/// Integrates Hamilton's equations from `z0` to `t1`, carrying the
/// fundamental matrix and the running action. Autonomous trajectories whose
/// energy drifts by more than [`ENERGY_TOL`] (relative) are re-integrated at
/// tighter tolerance; persistent drift is an error.
pub fn integrate_ivp(spec: &HamiltonianSpec, z0: &PhaseState, t1: f64, tol: Tolerance) -> Result<ClassicalTrajectory> {
    if z0.n() != spec.n() {
        return Err(Error::InvalidInput(format!(
            "state has {} degrees of freedom, spec has {}",
            z0.n(),
            spec.n()
        )));
    }
    if !z0.is_finite() {
        return Err(Error::InvalidInput("initial state must be finite".into()));
    }
    if !(t1 > z0.t) {
        return Err(Error::InvalidInput(format!(
            "final time {t1} must exceed initial time {}",
            z0.t
        )));
    }
    let mut tol = tol;
    let mut attempt = 0;
    loop {
        let traj = integrate_once(spec, z0, t1, tol)?;
        if !spec.is_autonomous() {
            return Ok(traj);
        }
        let drift = traj.energy_drift();
        let allowed = ENERGY_TOL * traj.energy_scale().max(f64::MIN_POSITIVE);
        if drift <= allowed {
            return Ok(traj);
        }
        if attempt == 2 {
            return Err(Error::EnergyDrift { drift, allowed });
        }
        attempt += 1;
        tol = tol.tightened(100.0);
    }
}

fn shoot(
    spec: &HamiltonianSpec,
    bvp: &BvpProblem,
    y0: &DVector<f64>,
    tol: Tolerance,
) -> Result<(ClassicalTrajectory, DVector<f64>)> {
    let z0 = PhaseState::new(bvp.x0.clone(), y0.clone(), bvp.t0);
    let traj = integrate_ivp(spec, &z0, bvp.t1, tol)?;
    let residual = &traj.final_state().x - &bvp.x1;
    Ok((traj, residual))
}

fn j_block(n: usize, phi: &DMatrix<f64>) -> DMatrix<f64> {
    phi.view((0, n), (n, n)).into_owned()
}

/// Solves the two-point boundary-value problem by Newton shooting on the
/// initial momentum. Returns the path in the basin of the supplied guess.
pub fn solve_bvp_shooting(
    spec: &HamiltonianSpec,
    bvp: &BvpProblem,
    cfg: &ShootingConfig,
) -> Result<ClassicalTrajectory> {
    bvp.validate()?;
    cfg.validate()?;
    let n = spec.n();
    if bvp.n() != n {
        return Err(Error::InvalidInput(format!(
            "endpoints have {} coordinates, spec has {n}",
            bvp.n()
        )));
    }
    let mut y0 = match &cfg.y0_guess {
        Some(g) if g.len() == n && g.iter().all(|v| v.is_finite()) => g.clone(),
        Some(_) => return Err(Error::spec("shooting.y0_guess", "guess must be a finite n-vector")),
        None => bvp.free_particle_momentum(spec),
    };

    let (mut traj, mut residual) = shoot(spec, bvp, &y0, cfg.ivp_tol)?;
    for iteration in 0..=cfg.max_iter {
        let rnorm = residual.amax();
        let phi = traj.phi_at(bvp.t1)?;
        let jac = j_block(n, &phi);
        let det = jac.determinant();
        if !(det.abs() >= singular_threshold(traj.tolerance(), &phi)) {
            return Err(Error::SingularShootingJacobian { det_j: det, iteration });
        }
        if rnorm <= cfg.residual_tol {
            traj.shooting = Some(ShootingReport {
                iterations: iteration,
                residual: rnorm,
            });
            return Ok(traj);
        }
        if iteration == cfg.max_iter {
            return Err(Error::NoConvergence {
                iterations: iteration,
                residual: rnorm,
            });
        }
        let step = jac
            .lu()
            .solve(&(-&residual))
            .ok_or(Error::SingularShootingJacobian { det_j: det, iteration })?;

        // damped update: halve until the residual decreases
        let mut scale = 1.0;
        let mut fallback = None;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = &y0 + &step * scale;
            if let Ok((t, r)) = shoot(spec, bvp, &cand, cfg.ivp_tol) {
                if r.amax() < rnorm {
                    accepted = Some((cand, t, r));
                    break;
                }
                fallback = Some((cand, t, r));
            }
            scale *= 0.5;
        }
        match accepted.or(fallback) {
            Some((cand, t, r)) => {
                y0 = cand;
                traj = t;
                residual = r;
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations: iteration + 1,
                    residual: rnorm,
                })
            }
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// ∫ (y·ẋ − H) dτ recomputed by adaptive quadrature of the Lagrangian along
/// the dense output (independent of the co-integrated accumulator).
pub fn compute_action(traj: &ClassicalTrajectory) -> f64 {
    action_between(traj, traj.t0(), traj.t1())
}

/// Lagrangian quadrature over `[a, b] ⊂ [t₀, t₁]`, panelled on integrator steps.
pub fn action_between(traj: &ClassicalTrajectory, a: f64, b: f64) -> f64 {
    let n = traj.n();
    let spec = traj.spec();
    let inv_mass: Vec<f64> = spec.mass().iter().map(|m| 1.0 / m).collect();
    let mut raw = vec![0.0; traj.dense.dim()];
    let mut lagrangian = |t: f64| {
        traj.dense.eval_into(t, &mut raw);
        let (x, rest) = raw.split_at(n);
        let y = &rest[..n];
        let two_kin: f64 = y.iter().zip(&inv_mass).map(|(p, im)| p * p * im).sum();
        let h = 0.5 * two_kin + spec.potential_energy(x) - spec.drive_at(t) * x.iter().sum::<f64>();
        two_kin - h
    };
    let mut panels: Vec<f64> = vec![a];
    panels.extend(traj.nodes().iter().copied().filter(|&t| t > a && t < b));
    panels.push(b);
    // scale the tolerance by a crude magnitude estimate
    let crude: f64 = panels
        .windows(2)
        .map(|w| (lagrangian(0.5 * (w[0] + w[1])) * (w[1] - w[0])).abs())
        .sum();
    quad::integrate_panels(&mut lagrangian, &panels, 1e-14 * crude.max(1e-300))
}
