//! Shared inputs for the benchmarks.

use semiclassic::{BvpProblem, HamiltonianSpec, KernelTableConfig, ShootingConfig, WavepacketGrid};

/// Quartic oscillator with a boundary problem well inside its caustic-free region.
pub fn quartic_problem() -> (HamiltonianSpec, BvpProblem) {
    let spec = HamiltonianSpec::quartic(1.0, 0.5).expect("valid spec");
    let bvp = BvpProblem::one_dof(-0.5, 0.8, 0.0, 0.5).expect("valid problem");
    (spec, bvp)
}

pub fn harmonic_problem() -> (HamiltonianSpec, BvpProblem) {
    let spec = HamiltonianSpec::harmonic(1.0, 1.0).expect("valid spec");
    let bvp = BvpProblem::one_dof(0.0, 1.0, 0.0, std::f64::consts::FRAC_PI_4).expect("valid problem");
    (spec, bvp)
}

pub fn table_config(nodes: usize) -> KernelTableConfig {
    KernelTableConfig {
        x_range: (-1.0, 1.5),
        x_nodes: nodes,
        x0_range: (-1.0, 1.5),
        x0_nodes: nodes,
        shooting: ShootingConfig::default(),
    }
}

pub fn packet(points: usize) -> WavepacketGrid {
    WavepacketGrid::gaussian(-1.0, 1.5, points, 0.25, 0.15, 0.0, 0.05, 0.0).expect("valid packet")
}
