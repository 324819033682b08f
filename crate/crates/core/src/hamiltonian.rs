//! Natural Hamiltonians `H = Σ yᵢ²/2mᵢ + V(x) − γ(τ)·x` and their derivatives.
//!
//! State vectors are ordered positions first, then momenta. Every potential in
//! [`PotentialFamily`] is a polynomial, so values, gradients and Hessians are
//! exact up to rounding.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialFamily {
    Free,
    /// `½ m ω² x²` per coordinate.
    Harmonic {
        omega: f64,
    },
    /// `λ x³`
    Cubic {
        lambda: f64,
    },
    /// `λ x⁴`
    Quartic {
        lambda: f64,
    },
    /// `Σ c_k x^k`
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl PotentialFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialFamily::Free => "free",
            PotentialFamily::Harmonic { .. } => "harmonic",
            PotentialFamily::Cubic { .. } => "cubic",
            PotentialFamily::Quartic { .. } => "quartic",
            PotentialFamily::Polynomial { .. } => "polynomial",
        }
    }

    /// True when V is at most quadratic, i.e. the semiclassical kernel is exact.
    pub fn is_quadratic(&self) -> bool {
        match self {
            PotentialFamily::Free | PotentialFamily::Harmonic { .. } => true,
            PotentialFamily::Polynomial { coefficients } => coefficients.iter().skip(3).all(|&c| c == 0.0),
            _ => false,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            PotentialFamily::Free => Ok(()),
            PotentialFamily::Harmonic { omega } => {
                if omega.is_finite() && *omega > 0.0 {
                    Ok(())
                } else {
                    Err(Error::spec(
                        "potential.omega",
                        format!("must be positive and finite, got {omega}"),
                    ))
                }
            }
            PotentialFamily::Cubic { lambda } | PotentialFamily::Quartic { lambda } => {
                if lambda.is_finite() {
                    Ok(())
                } else {
                    Err(Error::spec("potential.lambda", "must be finite"))
                }
            }
            PotentialFamily::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    Err(Error::spec("potential.coefficients", "needs at least one coefficient"))
                } else if coefficients.iter().any(|c| !c.is_finite()) {
                    Err(Error::spec("potential.coefficients", "must be finite"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// V, V′, V″ of the one-dimensional profile (harmonic needs the mass).
    fn eval_1d(&self, mass: f64, x: f64) -> (f64, f64, f64) {
        match self {
            PotentialFamily::Free => (0.0, 0.0, 0.0),
            PotentialFamily::Harmonic { omega } => {
                let k = mass * omega * omega;
                (0.5 * k * x * x, k * x, k)
            }
            PotentialFamily::Cubic { lambda } => (lambda * x * x * x, 3.0 * lambda * x * x, 6.0 * lambda * x),
            PotentialFamily::Quartic { lambda } => {
                let x2 = x * x;
                (lambda * x2 * x2, 4.0 * lambda * x2 * x, 12.0 * lambda * x2)
            }
            PotentialFamily::Polynomial { coefficients } => {
                let (mut v, mut dv, mut ddv) = (0.0, 0.0, 0.0);
                for &c in coefficients.iter().rev() {
                    ddv = ddv * x + 2.0 * dv;
                    dv = dv * x + v;
                    v = v * x + c;
                }
                (v, dv, ddv)
            }
        }
    }
}

/// Time-dependent linear forcing γ(τ) entering `H` as `−γ(τ)·x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drive {
    Constant {
        value: f64,
    },
    /// `A sin(Ωτ + φ)`
    Sinusoidal {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// `Σ a_k τ^k`
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl Drive {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Drive::Constant { value } => *value,
            Drive::Sinusoidal {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * t + phase).sin(),
            Drive::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Drive::Constant { value } => value.is_finite(),
            Drive::Sinusoidal {
                amplitude,
                frequency,
                phase,
            } => amplitude.is_finite() && frequency.is_finite() && phase.is_finite(),
            Drive::Polynomial { coefficients } => {
                !coefficients.is_empty() && coefficients.iter().all(|c| c.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::spec("drive.params", "drive parameters must be finite"))
        }
    }
}

/// A classical Hamiltonian system with diagonal mass matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    mass: Vec<f64>,
    potential: PotentialFamily,
    drive: Option<Drive>,
}

impl HamiltonianSpec {
    pub fn new(mass: Vec<f64>, potential: PotentialFamily, drive: Option<Drive>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::spec("n", "at least one degree of freedom is required"));
        }
        if let Some(m) = mass.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::spec("mass", format!("must be positive and finite, got {m}")));
        }
        potential.validate()?;
        let n = mass.len();
        if n > 1 && !matches!(potential, PotentialFamily::Free | PotentialFamily::Harmonic { .. }) {
            return Err(Error::spec(
                "potential.kind",
                format!("{} potential is only supported for n = 1", potential.name()),
            ));
        }
        if let Some(d) = &drive {
            d.validate()?;
            if !matches!(potential, PotentialFamily::Harmonic { .. }) {
                return Err(Error::spec("drive.kind", "a drive requires the harmonic potential"));
            }
            if n != 1 {
                return Err(Error::spec("drive.kind", "a drive is only supported for n = 1"));
            }
        }
        Ok(Self { mass, potential, drive })
    }

    pub fn one_dof(mass: f64, potential: PotentialFamily) -> Result<Self> {
        Self::new(vec![mass], potential, None)
    }

    pub fn free(mass: f64) -> Self {
        Self::one_dof(mass, PotentialFamily::Free).expect("valid free particle")
    }

    pub fn harmonic(mass: f64, omega: f64) -> Result<Self> {
        Self::one_dof(mass, PotentialFamily::Harmonic { omega })
    }

    pub fn quartic(mass: f64, lambda: f64) -> Result<Self> {
        Self::one_dof(mass, PotentialFamily::Quartic { lambda })
    }

    pub fn cubic(mass: f64, lambda: f64) -> Result<Self> {
        Self::one_dof(mass, PotentialFamily::Cubic { lambda })
    }

    /// Forced oscillator `y²/2m + ½mω²x² − γ(τ)x`.
    pub fn forced_oscillator(mass: f64, omega: f64, drive: Drive) -> Result<Self> {
        Self::new(vec![mass], PotentialFamily::Harmonic { omega }, Some(drive))
    }

    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Mass of a one-degree-of-freedom system.
    pub fn scalar_mass(&self) -> Result<f64> {
        match self.mass.as_slice() {
            [m] => Ok(*m),
            _ => Err(Error::NotOneDof { n: self.n() }),
        }
    }

    pub fn potential(&self) -> &PotentialFamily {
        &self.potential
    }

    pub fn drive(&self) -> Option<&Drive> {
        self.drive.as_ref()
    }

    pub fn is_autonomous(&self) -> bool {
        self.drive.is_none()
    }

    pub fn drive_at(&self, t: f64) -> f64 {
        self.drive.as_ref().map_or(0.0, |d| d.eval(t))
    }

    /// V(x) without the drive term.
    pub fn potential_energy(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.mass)
            .map(|(&xi, &m)| self.potential.eval_1d(m, xi).0)
            .sum()
    }

    /// ∂V/∂xᵢ written into `out`.
    pub fn potential_gradient(&self, x: &[f64], out: &mut [f64]) {
        for ((o, &xi), &m) in out.iter_mut().zip(x).zip(&self.mass) {
            *o = self.potential.eval_1d(m, xi).1;
        }
    }

    /// Diagonal of ∂²V/∂xᵢ∂xⱼ (every supported potential is separable).
    pub fn potential_hessian_diag(&self, x: &[f64], out: &mut [f64]) {
        for ((o, &xi), &m) in out.iter_mut().zip(x).zip(&self.mass) {
            *o = self.potential.eval_1d(m, xi).2;
        }
    }

    /// Scalar V, V′, V″ for n = 1.
    pub fn potential_1d(&self, x: f64) -> (f64, f64, f64) {
        self.potential.eval_1d(self.mass[0], x)
    }
}

/// A point `(x, y, τ)` of extended phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub t: f64,
}

impl PhaseState {
    pub fn new(x: DVector<f64>, y: DVector<f64>, t: f64) -> Self {
        assert_eq!(x.len(), y.len(), "position and momentum dimensions differ");
        Self { x, y, t }
    }

    pub fn one_dof(x: f64, y: f64, t: f64) -> Self {
        Self::new(DVector::from_element(1, x), DVector::from_element(1, y), t)
    }

    pub fn from_slices(x: &[f64], y: &[f64], t: f64) -> Self {
        Self::new(DVector::from_column_slice(x), DVector::from_column_slice(y), t)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().chain(self.y.iter()).all(|v| v.is_finite())
    }

    /// `(x, y)` stacked into one 2n-vector.
    pub fn to_phase_vector(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.n(), self.x.iter().chain(self.y.iter()).copied())
    }
}

fn kinetic(spec: &HamiltonianSpec, y: &[f64]) -> f64 {
    y.iter().zip(spec.mass()).map(|(&p, &m)| p * p / (2.0 * m)).sum()
}

fn drive_work(spec: &HamiltonianSpec, s: &PhaseState) -> f64 {
    match spec.drive() {
        Some(d) => d.eval(s.t) * s.x.iter().sum::<f64>(),
        None => 0.0,
    }
}

pub fn eval_hamiltonian(spec: &HamiltonianSpec, s: &PhaseState) -> f64 {
    kinetic(spec, s.y.as_slice()) + spec.potential_energy(s.x.as_slice()) - drive_work(spec, s)
}

/// Phase velocity `(∂H/∂y, −∂H/∂x)`.
pub fn eval_vector_field(spec: &HamiltonianSpec, s: &PhaseState) -> DVector<f64> {
    let n = s.n();
    let mut grad = vec![0.0; n];
    spec.potential_gradient(s.x.as_slice(), &mut grad);
    let g = spec.drive_at(s.t);
    let mut out = DVector::zeros(2 * n);
    for i in 0..n {
        out[i] = s.y[i] / spec.mass()[i];
        out[n + i] = -grad[i] + g;
    }
    out
}

/// Hessian of H in `(x, y)` order: `diag(V″(x), 1/m)`.
pub fn eval_hessian(spec: &HamiltonianSpec, s: &PhaseState) -> DMatrix<f64> {
    let n = s.n();
    let mut diag = vec![0.0; n];
    spec.potential_hessian_diag(s.x.as_slice(), &mut diag);
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        h[(i, i)] = diag[i];
        h[(n + i, n + i)] = 1.0 / spec.mass()[i];
    }
    h
}

/// On-shell Lagrangian `y·(y/m) − H`.
pub fn eval_lagrangian(spec: &HamiltonianSpec, s: &PhaseState) -> f64 {
    2.0 * kinetic(spec, s.y.as_slice()) - eval_hamiltonian(spec, s)
}

/// The standard symplectic matrix `[[0, I], [−I, 0]]` of size 2n.
pub fn symplectic_unit(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}
