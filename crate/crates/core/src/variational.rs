//! Fundamental matrix of the variational equation `Φ̇ = 𝕁 H″ Φ` along a
//! classical trajectory.
//!
//! Blocks follow the state order `(x, y)`:
//!
//! ```text
//! Φ = | H  J |    J = ∂x(τ)/∂y₀
//!     | L  P |
//! ```

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::classical_path::{integrate_ivp, ClassicalTrajectory};
use crate::error::{Error, Result};
use crate::hamiltonian::{symplectic_unit, HamiltonianSpec, PhaseState};
use crate::io::matrix_rows;
use crate::ode::Tolerance;

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalMatrix {
    pub t0: f64,
    pub tau: f64,
    pub matrix: DMatrix<f64>,
}

impl FundamentalMatrix {
    pub fn new(t0: f64, tau: f64, matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() % 2 != 0 || matrix.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "fundamental matrix must be 2n×2n, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { t0, tau, matrix })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows() / 2
    }

    fn block(&self, r: usize, c: usize) -> DMatrix<f64> {
        let n = self.n();
        self.matrix.view((r * n, c * n), (n, n)).into_owned()
    }

    pub fn block_h(&self) -> DMatrix<f64> {
        self.block(0, 0)
    }

    pub fn block_j(&self) -> DMatrix<f64> {
        self.block(0, 1)
    }

    pub fn block_l(&self) -> DMatrix<f64> {
        self.block(1, 0)
    }

    pub fn block_p(&self) -> DMatrix<f64> {
        self.block(1, 1)
    }

    /// ‖Φᵀ𝕁Φ − 𝕁‖_∞ (max-abs entry).
    pub fn symplecticity_defect(&self) -> f64 {
        let j = symplectic_unit(self.n());
        (self.matrix.transpose() * &j * &self.matrix - j).amax()
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Blocks {
            #[serde(rename = "H")]
            h: Vec<Vec<f64>>,
            #[serde(rename = "J")]
            j: Vec<Vec<f64>>,
            #[serde(rename = "L")]
            l: Vec<Vec<f64>>,
            #[serde(rename = "P")]
            p: Vec<Vec<f64>>,
        }
        serde_json::json!({
            "t0": self.t0,
            "tau": self.tau,
            "n": self.n(),
            "phi": matrix_rows(&self.matrix),
            "blocks": Blocks {
                h: matrix_rows(&self.block_h()),
                j: matrix_rows(&self.block_j()),
                l: matrix_rows(&self.block_l()),
                p: matrix_rows(&self.block_p()),
            },
        })
    }
}

/// Φ(τ, t₀) along `traj`. The matrix is integrated together with the path,
/// so this reads the co-integrated dense output.
pub fn integrate_variational(traj: &ClassicalTrajectory, tau: f64) -> Result<FundamentalMatrix> {
    let phi = traj.phi_at(tau)?;
    FundamentalMatrix::new(traj.t0(), tau, phi)
}

pub fn block_j(phi: &FundamentalMatrix) -> DMatrix<f64> {
    phi.block_j()
}

/// Central finite differences of the flow map `z₀ ↦ φ(t₁, z₀)`.
pub fn flow_jacobian_fd(spec: &HamiltonianSpec, z0: &PhaseState, t1: f64, h: f64) -> Result<DMatrix<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let n = spec.n();
    let base = z0.to_phase_vector();
    let tol = Tolerance::new(1e-14, 1e-13);
    let endpoint = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let z = PhaseState::from_slices(&v.as_slice()[..n], &v.as_slice()[n..], z0.t);
        Ok(integrate_ivp(spec, &z, t1, tol)?.final_state().to_phase_vector())
    };
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..2 * n {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[k] += h;
        minus[k] -= h;
        let col = (endpoint(&plus)? - endpoint(&minus)?) / (2.0 * h);
        jac.set_column(k, &col);
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::PotentialFamily;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn traj(spec: &HamiltonianSpec, z0: PhaseState, t1: f64) -> ClassicalTrajectory {
        integrate_ivp(spec, &z0, t1, Tolerance::default()).unwrap()
    }

    #[test]
    fn identity_at_start() {
        let spec = HamiltonianSpec::quartic(1.0, 1.0).unwrap();
        let tr = traj(&spec, PhaseState::one_dof(1.0, 0.0, 0.0), 1.0);
        let phi = integrate_variational(&tr, 0.0).unwrap();
        assert_eq!(phi.matrix, DMatrix::identity(2, 2));
        assert_eq!(block_j(&phi)[(0, 0)], 0.0);
    }

    #[test]
    fn free_particle_shear() {
        let spec = HamiltonianSpec::free(1.0);
        let tr = traj(&spec, PhaseState::one_dof(0.3, 0.7, 0.0), 2.5);
        let phi = integrate_variational(&tr, 2.5).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 2.5, 0.0, 1.0]);
        assert!((phi.matrix - want).amax() < 1e-12);
    }

    #[test]
    fn free_mass_two_j() {
        let spec = HamiltonianSpec::free(2.0);
        let tr = traj(&spec, PhaseState::one_dof(0.0, 1.0, 0.0), 3.0);
        let j = integrate_variational(&tr, 3.0).unwrap().block_j();
        assert!((j[(0, 0)] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn harmonic_rotation() {
        let spec = HamiltonianSpec::harmonic(1.0, 1.0).unwrap();
        let tr = traj(&spec, PhaseState::one_dof(0.5, -0.2, 0.0), 3.0);
        for k in 0..=30 {
            let t = 0.1 * k as f64;
            let phi = integrate_variational(&tr, t).unwrap().matrix;
            let want = DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
            assert!((phi - want).amax() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn harmonic_omega_two_j() {
        let spec = HamiltonianSpec::harmonic(1.0, 2.0).unwrap();
        let tr = traj(&spec, PhaseState::one_dof(0.0, 1.0, 0.0), 0.5);
        let j = integrate_variational(&tr, 0.5).unwrap().block_j()[(0, 0)];
        assert!((j - 1f64.sin() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn quartic_symplectic_at_many_times() {
        let spec = HamiltonianSpec::quartic(1.0, 1.0).unwrap();
        let tr = traj(&spec, PhaseState::one_dof(1.0, 0.0, 0.0), 3.0);
        for k in 0..100 {
            let phi = integrate_variational(&tr, 3.0 * k as f64 / 99.0).unwrap();
            assert!(phi.symplecticity_defect() < 1e-9);
            assert!((phi.matrix.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fd_matches_variational() {
        let cases = [
            (HamiltonianSpec::free(1.0), PhaseState::one_dof(0.0, 1.0, 0.0), 1.3),
            (
                HamiltonianSpec::harmonic(1.0, 1.0).unwrap(),
                PhaseState::one_dof(0.2, 0.4, 0.0),
                1.0,
            ),
            (
                HamiltonianSpec::quartic(1.0, 1.0).unwrap(),
                PhaseState::one_dof(1.0, 0.0, 0.0),
                0.5,
            ),
        ];
        for (spec, z0, t1) in cases {
            let tr = traj(&spec, z0.clone(), t1);
            let var = integrate_variational(&tr, t1).unwrap().matrix;
            let fd = flow_jacobian_fd(&spec, &z0, t1, 1e-4).unwrap();
            assert!((var - fd).amax() < 1e-5);
        }
    }

    #[test]
    fn composition_and_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = HamiltonianSpec::quartic(1.0, 0.7).unwrap();
        let z0 = PhaseState::one_dof(0.8, -0.3, 0.0);
        let t2 = 2.0;
        let tr = traj(&spec, z0.clone(), t2);
        let full = integrate_variational(&tr, t2).unwrap().matrix;
        for _ in 0..5 {
            let t1: f64 = rng.gen_range(0.05..1.95);
            let head = integrate_variational(&tr, t1).unwrap().matrix;
            let tail_traj = traj(&spec, tr.state_at(t1).unwrap(), t2);
            let tail = integrate_variational(&tail_traj, t2).unwrap().matrix;
            assert!((&full - tail * head).amax() < 1e-8);
        }
        let v0 = crate::hamiltonian::eval_vector_field(&spec, &z0);
        for k in 1..=10 {
            let t = 0.2 * k as f64;
            let phi = integrate_variational(&tr, t).unwrap().matrix;
            let vt = crate::hamiltonian::eval_vector_field(&spec, &tr.state_at(t).unwrap());
            assert!((&phi * &v0 - vt).amax() < 1e-8);
        }
    }

    #[test]
    fn two_dof_blocks_are_diagonal() {
        let spec = HamiltonianSpec::new(vec![1.0, 1.0], PotentialFamily::Harmonic { omega: 1.0 }, None).unwrap();
        let z0 = PhaseState::from_slices(&[0.1, 0.2], &[0.3, -0.1], 0.0);
        let t = std::f64::consts::FRAC_PI_4;
        let tr = traj(&spec, z0, t);
        let j = integrate_variational(&tr, t).unwrap().block_j();
        assert!((j.determinant() - 0.5).abs() < 1e-9);
        assert!(j[(0, 1)].abs() < 1e-14 && j[(1, 0)].abs() < 1e-14);
    }

    #[test]
    fn json_layout() {
        let tr = traj(&HamiltonianSpec::free(1.0), PhaseState::one_dof(0.0, 1.0, 0.0), 2.0);
        let v = integrate_variational(&tr, 2.0).unwrap().to_json();
        assert_eq!(v["n"], 1);
        assert_eq!(v["phi"][0][1].as_f64().unwrap().round(), 2.0);
        assert_eq!(v["blocks"]["J"][0][0].as_f64().unwrap().round(), 2.0);
    }

    #[test]
    fn rejects_odd_matrix() {
        assert!(FundamentalMatrix::new(0.0, 1.0, DMatrix::identity(3, 3)).is_err());
    }
}
