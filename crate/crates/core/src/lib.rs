//! Semiclassical propagators built from classical paths.
//!
//! The pipeline runs from a [`HamiltonianSpec`] through Newton shooting
//! ([`solve_bvp_shooting`]) to the co-integrated fundamental matrix of the
//! variational equation, whose `J` block gives the prefactor of
//! [`k_wkb`]. One-degree-of-freedom paths also admit a closed form for `J`
//! by a single quadrature ([`closed_form::quadrature_J`]).
//!
//! ```
//! use semiclassic::{k_wkb, BvpProblem, HamiltonianSpec, ShootingConfig};
//!
//! let spec = HamiltonianSpec::harmonic(1.0, 1.0).unwrap();
//! let bvp = BvpProblem::one_dof(0.0, 1.0, 0.0, std::f64::consts::FRAC_PI_4).unwrap();
//! let k = k_wkb(&spec, &bvp, 1.0, &ShootingConfig::default()).unwrap();
//! assert!((k.action - 0.5).abs() < 1e-9);
//! ```

pub mod classical_path;
pub mod closed_form;
pub mod error;
pub mod gelfand_yaglom;
pub mod hamiltonian;
pub mod io;
pub mod ode;
pub mod propagator;
pub mod quad;
pub mod variational;

pub use classical_path::{
    compute_action, integrate_ivp, solve_bvp_shooting, BvpProblem, ClassicalTrajectory, ShootingConfig, ShootingReport,
};
pub use closed_form::{GaugeReduction, PicardVessiotReport};
pub use error::{BoundarySide, Error, Result, Warning};
pub use gelfand_yaglom::{det_j, focal_scan, FocalScanReport, VanVleckMatrix, VanVleckSource};
pub use hamiltonian::{Drive, HamiltonianSpec, PhaseState, PotentialFamily};
pub use ode::Tolerance;
pub use propagator::{
    exact_kernel_forced, exact_kernel_free, exact_kernel_ho, k_wkb, k_wkb_closed_form, propagate_wavepacket,
    KernelTable, KernelTableConfig, PropagationOutput, PropagatorResult, WavepacketGrid,
};
pub use variational::{integrate_variational, FundamentalMatrix};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
