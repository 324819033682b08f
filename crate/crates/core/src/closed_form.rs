//! Closed-form treatment of one-degree-of-freedom variational equations.
//!
//! Along a trajectory without turning points the phase velocity `(y/m, −V′)`
//! solves the variational equation, and the gauge matrix
//!
//! ```text
//! P = | 0      y/m |
//!     | −m/y   −V′ |
//! ```
//!
//! reduces it to the triangular system `ż = [[0, 0], [−m/y², 0]] z`. A single
//! quadrature `q(τ) = ∫ dσ/y²` then gives everything, in particular
//! `J(t, t₀) = y(t₀) y(t) q(t) / m`.

use std::io::Write;

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::classical_path::ClassicalTrajectory;
use crate::error::{Error, Result};
use crate::hamiltonian::PotentialFamily;
use crate::io::fmt_f64;
use crate::quad;

/// Momenta below this magnitude count as turning points.
pub const Y_FLOOR: f64 = 1e-10;

/// Relative tolerance of the `∫ dτ/y²` quadrature.
pub const QUAD_TOL: f64 = 1e-10;

fn require_1d(traj: &ClassicalTrajectory) -> Result<f64> {
    if traj.n() != 1 {
        return Err(Error::NotOneDof { n: traj.n() });
    }
    if !traj.spec().is_autonomous() {
        return Err(Error::InvalidInput(
            "closed-form reduction needs an autonomous Hamiltonian".into(),
        ));
    }
    Ok(traj.spec().mass()[0])
}

struct Point {
    y: f64,
    dv: f64,
    d2v: f64,
}

fn point(traj: &ClassicalTrajectory, tau: f64) -> Result<Point> {
    let s = traj.state_at(tau)?;
    let (_, dv, d2v) = traj.spec().potential_1d(s.x[0]);
    Ok(Point { y: s.y[0], dv, d2v })
}

fn point_off_turning(traj: &ClassicalTrajectory, tau: f64) -> Result<Point> {
    let p = point(traj, tau)?;
    if !(p.y.abs() >= Y_FLOOR) {
        return Err(Error::TurningPoint {
            time: tau,
            momentum: p.y,
        });
    }
    Ok(p)
}

/// `(y/m, −V′)` at τ: the phase velocity, a solution of the variational equation.
pub fn particular_solution(traj: &ClassicalTrajectory, tau: f64) -> Result<Vector2<f64>> {
    let m = require_1d(traj)?;
    let p = point(traj, tau)?;
    Ok(Vector2::new(p.y / m, -p.dv))
}

/// Symplectic gauge matrix built from the particular solution.
#[allow(non_snake_case)]
pub fn gauge_matrix_P(traj: &ClassicalTrajectory, tau: f64) -> Result<Matrix2<f64>> {
    let m = require_1d(traj)?;
    let p = point_off_turning(traj, tau)?;
    Ok(Matrix2::new(0.0, p.y / m, -m / p.y, -p.dv))
}

/// `P⁻¹ A P − P⁻¹ Ṗ` with `A = 𝕁H″` and `Ṗ` by the chain rule.
pub fn reduced_matrix(traj: &ClassicalTrajectory, tau: f64) -> Result<Matrix2<f64>> {
    let m = require_1d(traj)?;
    let p = point_off_turning(traj, tau)?;
    let gauge = Matrix2::new(0.0, p.y / m, -m / p.y, -p.dv);
    let a = Matrix2::new(0.0, 1.0 / m, -p.d2v, 0.0);
    let (xdot, ydot) = (p.y / m, -p.dv);
    let gauge_dot = Matrix2::new(0.0, ydot / m, m * ydot / (p.y * p.y), -p.d2v * xdot);
    // det P = 1, so the inverse is the adjugate
    let inv = Matrix2::new(gauge[(1, 1)], -gauge[(0, 1)], -gauge[(1, 0)], gauge[(0, 0)]);
    Ok(inv * a * gauge - inv * gauge_dot)
}

fn first_turning_in(traj: &ClassicalTrajectory, a: f64, b: f64) -> Option<(f64, f64)> {
    let mut samples: Vec<f64> = vec![a];
    samples.extend(traj.nodes().iter().copied().filter(|&t| t > a && t < b));
    samples.push(b);
    let mut probe = Vec::with_capacity(2 * samples.len());
    for w in samples.windows(2) {
        probe.push(w[0]);
        for k in 1..4 {
            probe.push(w[0] + (w[1] - w[0]) * k as f64 / 4.0);
        }
    }
    probe.push(b);
    let y = |t: f64| traj.momentum_1d(t);
    let mut prev = (probe[0], y(probe[0]));
    for &t in &probe {
        let v = y(t);
        if v.abs() < Y_FLOOR {
            return Some((t, v));
        }
        if v.signum() != prev.1.signum() {
            // bisect the sign change
            let (mut lo, mut hi) = (prev.0, t);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if y(mid).signum() == prev.1.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tt = 0.5 * (lo + hi);
            return Some((tt, y(tt)));
        }
        prev = (t, v);
    }
    None
}

/// `∫_a^b dτ/y²` on the dense output; fails if `y` vanishes on `[a, b]`.
pub fn inverse_momentum_integral(traj: &ClassicalTrajectory, a: f64, b: f64) -> Result<f64> {
    require_1d(traj)?;
    traj.check_time(a)?;
    traj.check_time(b)?;
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sgn) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    if let Some((time, momentum)) = first_turning_in(traj, lo, hi) {
        return Err(Error::TurningPointInInterval { time, momentum });
    }
    let mut panels = vec![lo];
    panels.extend(traj.nodes().iter().copied().filter(|&t| t > lo && t < hi));
    panels.push(hi);
    let f = |t: f64| {
        let y = traj.momentum_1d(t);
        1.0 / (y * y)
    };
    let crude: f64 = panels.windows(2).map(|w| f(0.5 * (w[0] + w[1])) * (w[1] - w[0])).sum();
    Ok(sgn * quad::integrate_panels(f, &panels, QUAD_TOL * 1e-2 * crude))
}

/// `J(t, t₀) = y(t₀) y(t) ∫_{t₀}^{t} dτ/y² / m`.
#[allow(non_snake_case)]
pub fn quadrature_J(traj: &ClassicalTrajectory, t: f64) -> Result<f64> {
    let m = require_1d(traj)?;
    let q = inverse_momentum_integral(traj, traj.t0(), t)?;
    Ok(traj.initial_state().y[0] * traj.momentum_1d(t) * q / m)
}

/// Fundamental matrix of the reduced system, `[[1, 0], [−m q, 1]]`.
pub fn reduced_fundamental(traj: &ClassicalTrajectory, tau: f64) -> Result<Matrix2<f64>> {
    let m = require_1d(traj)?;
    let q = inverse_momentum_integral(traj, traj.t0(), tau)?;
    Ok(Matrix2::new(1.0, 0.0, -m * q, 1.0))
}

/// Symplectic fundamental matrix `P(τ)·[[1, 0], [−m q, 1]]` of the
/// variational equation; columns `(−y q, −m/y + m V′ q)` and `(y/m, −V′)`.
pub fn general_fundamental(traj: &ClassicalTrajectory, tau: f64) -> Result<Matrix2<f64>> {
    Ok(gauge_matrix_P(traj, tau)? * reduced_fundamental(traj, tau)?)
}

/// General solution `(ξ, η)` at τ for the constants `(c1, c2)`.
pub fn general_solution(traj: &ClassicalTrajectory, tau: f64, c1: f64, c2: f64) -> Result<Vector2<f64>> {
    Ok(general_fundamental(traj, tau)? * Vector2::new(c1, c2))
}

/// Gauge data sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeReduction {
    pub tau: Vec<f64>,
    pub p: Vec<Matrix2<f64>>,
    pub pa: Vec<Matrix2<f64>>,
    pub quad: Vec<f64>,
}

impl GaugeReduction {
    pub fn build(traj: &ClassicalTrajectory, n_grid: usize) -> Result<Self> {
        require_1d(traj)?;
        if n_grid < 2 {
            return Err(Error::spec("numerics.grid", "reduction grid needs at least two points"));
        }
        let (t0, t1) = (traj.t0(), traj.t1());
        if let Some((time, momentum)) = first_turning_in(traj, t0, t1) {
            return Err(Error::TurningPointInInterval { time, momentum });
        }
        let tau: Vec<f64> = (0..n_grid)
            .map(|k| {
                if k + 1 == n_grid {
                    t1
                } else {
                    t0 + (t1 - t0) * k as f64 / (n_grid - 1) as f64
                }
            })
            .collect();
        let mut out = Self {
            tau: Vec::with_capacity(n_grid),
            p: Vec::with_capacity(n_grid),
            pa: Vec::with_capacity(n_grid),
            quad: Vec::with_capacity(n_grid),
        };
        let mut running = 0.0;
        let mut last = t0;
        for &t in &tau {
            running += inverse_momentum_integral(traj, last, t)?;
            last = t;
            out.tau.push(t);
            out.p.push(gauge_matrix_P(traj, t)?);
            out.pa.push(reduced_matrix(traj, t)?);
            out.quad.push(running);
        }
        Ok(out)
    }

    /// Largest |entry| of P[A] outside position (1, 0).
    pub fn structure_residual(&self) -> f64 {
        self.pa
            .iter()
            .map(|m| m[(0, 0)].abs().max(m[(0, 1)].abs()).max(m[(1, 1)].abs()))
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,P00,P01,P10,P11,PA00,PA01,PA10,PA11,quad")?;
        for k in 0..self.tau.len() {
            let (p, a) = (&self.p[k], &self.pa[k]);
            let row = [
                self.tau[k],
                p[(0, 0)],
                p[(0, 1)],
                p[(1, 0)],
                p[(1, 1)],
                a[(0, 0)],
                a[(0, 1)],
                a[(1, 0)],
                a[(1, 1)],
                self.quad[k],
            ];
            writeln!(w, "{}", row.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","))?;
        }
        Ok(())
    }
}

/// Bookkeeping for the quadrature extension used by the closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardVessiotReport {
    pub potential: String,
    pub base_elements: Vec<String>,
    pub tower_depth: usize,
    pub adjoined_integral: String,
    /// Numeric value of the adjoined integral at `t`.
    pub value: f64,
    /// `Some(true)` for families with a tabulated elementary antiderivative.
    pub elementary: Option<bool>,
    /// The tabulated closed form evaluated at `t`, when available.
    pub closed_form_value: Option<f64>,
}

/// Elementary `∫_{t₀}^{t} dτ/y²` for the tabulated families.
pub fn elementary_inverse_momentum_integral(traj: &ClassicalTrajectory, t: f64) -> Result<Option<f64>> {
    let m = require_1d(traj)?;
    let z0 = traj.initial_state();
    let s = t - traj.t0();
    let y0 = z0.y[0];
    Ok(match traj.spec().potential() {
        PotentialFamily::Free => Some(s / (y0 * y0)),
        PotentialFamily::Harmonic { omega } => {
            // y(s) = Y sin(ωs + φ) with ẏ(0) = −mω²x₀
            let w = *omega;
            let ydot0 = -m * w * w * z0.x[0];
            let amp = y0.hypot(ydot0 / w);
            let phase = y0.atan2(ydot0 / w);
            let cot = |a: f64| a.cos() / a.sin();
            Some((cot(phase) - cot(w * s + phase)) / (amp * amp * w))
        }
        _ => None,
    })
}

pub fn picard_vessiot_report(traj: &ClassicalTrajectory, t: f64) -> Result<PicardVessiotReport> {
    let value = inverse_momentum_integral(traj, traj.t0(), t)?;
    let closed = elementary_inverse_momentum_integral(traj, t)?;
    let (integral, elementary) = match traj.spec().potential() {
        PotentialFamily::Free => ("(tau - t0)/y0^2", Some(true)),
        PotentialFamily::Harmonic { .. } => ("[cot(phi) - cot(omega (tau - t0) + phi)]/(Y^2 omega)", Some(true)),
        _ => ("int dtau/y^2", None),
    };
    Ok(PicardVessiotReport {
        potential: traj.spec().potential().name().to_string(),
        base_elements: vec!["y".into(), "V'".into()],
        tower_depth: 1,
        adjoined_integral: integral.into(),
        value,
        elementary,
        closed_form_value: closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical_path::{integrate_ivp, solve_bvp_shooting, BvpProblem, ShootingConfig};
    use crate::hamiltonian::{HamiltonianSpec, PhaseState};
    use crate::ode::Tolerance;
    use crate::variational::integrate_variational;
    use std::f64::consts::PI;

    fn ivp(spec: &HamiltonianSpec, x: f64, y: f64, t1: f64) -> ClassicalTrajectory {
        integrate_ivp(spec, &PhaseState::one_dof(x, y, 0.0), t1, Tolerance::default()).unwrap()
    }

    fn close(a: Matrix2<f64>, b: Matrix2<f64>, tol: f64) -> bool {
        (a - b).amax() < tol
    }

    #[test]
    fn particular_solution_examples() {
        let v = particular_solution(&ivp(&HamiltonianSpec::free(1.0), 0.0, 2.0, 1.0), 0.5).unwrap();
        assert_eq!(v, Vector2::new(2.0, 0.0));
        let v = particular_solution(&ivp(&HamiltonianSpec::harmonic(1.0, 1.0).unwrap(), 1.0, 0.0, 1.0), 0.0).unwrap();
        assert_eq!(v, Vector2::new(0.0, -1.0));
        let v = particular_solution(&ivp(&HamiltonianSpec::quartic(1.0, 1.0).unwrap(), 1.0, 0.5, 1.0), 0.0).unwrap();
        assert_eq!(v, Vector2::new(0.5, -4.0));
    }

    #[test]
    fn particular_solution_solves_variational_equation() {
        let spec = HamiltonianSpec::quartic(1.0, 1.0).unwrap();
        let tr = ivp(&spec, 0.2, 1.0, 1.0);
        let h = 1e-5;
        for k in 1..10 {
            let t = 0.1 * k as f64;
            let d = (particular_solution(&tr, t + h).unwrap() - particular_solution(&tr, t - h).unwrap()) / (2.0 * h);
            let x = tr.state_at(t).unwrap().x[0];
            let a = Matrix2::new(0.0, 1.0, -12.0 * x * x, 0.0);
            assert!((d - a * particular_solution(&tr, t).unwrap()).amax() < 1e-6);
        }
    }

    #[test]
    fn gauge_examples() {
        let tr = ivp(&HamiltonianSpec::free(1.0), 0.0, 1.0, 1.0);
        assert_eq!(gauge_matrix_P(&tr, 0.3).unwrap(), Matrix2::new(0.0, 1.0, -1.0, 0.0));
        assert!(close(
            reduced_matrix(&tr, 0.3).unwrap(),
            Matrix2::new(0.0, 0.0, -1.0, 0.0),
            1e-15
        ));
        // (x, y) = (0, −1) at τ = π/2 on x = cos τ
        let tr = ivp(&HamiltonianSpec::harmonic(1.0, 1.0).unwrap(), 1.0, 0.0, 2.0);
        assert!(close(
            gauge_matrix_P(&tr, PI / 2.0).unwrap(),
            Matrix2::new(0.0, -1.0, 1.0, 0.0),
            1e-9
        ));
        assert!(close(
            reduced_matrix(&tr, PI / 2.0).unwrap(),
            Matrix2::new(0.0, 0.0, -1.0, 0.0),
            1e-9
        ));
        assert!(matches!(gauge_matrix_P(&tr, 0.0), Err(Error::TurningPoint { .. })));
    }

    #[test]
    fn quartic_reduced_structure() {
        let tr = ivp(&HamiltonianSpec::quartic(1.3, 0.8).unwrap(), -0.5, 1.2, 0.6);
        let g = GaugeReduction::build(&tr, 50).unwrap();
        assert!(g.structure_residual() < 1e-9);
        for k in 0..50 {
            assert!((g.p[k].determinant() - 1.0).abs() < 1e-12);
            let y = tr.state_at(g.tau[k]).unwrap().y[0];
            let want = -1.3 / (y * y);
            assert!((g.pa[k][(1, 0)] - want).abs() < 1e-9 * want.abs());
        }
    }

    #[test]
    fn quadrature_j_examples() {
        let tr = ivp(&HamiltonianSpec::free(1.0), 0.0, 1.0, 2.0);
        assert!((quadrature_J(&tr, 2.0).unwrap() - 2.0).abs() < 1e-12);
        let spec = HamiltonianSpec::harmonic(1.0, 1.0).unwrap();
        let bvp = BvpProblem::one_dof(0.0, 1.0, 0.0, PI / 4.0).unwrap();
        let tr = solve_bvp_shooting(&spec, &bvp, &ShootingConfig::default()).unwrap();
        assert!((quadrature_J(&tr, PI / 4.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-8);
        let tr = ivp(&spec, 0.5, 0.5, 2.0);
        assert!(matches!(
            quadrature_J(&tr, 2.0),
            Err(Error::TurningPointInInterval { .. })
        ));
    }

    #[test]
    fn quadrature_j_matches_variational_on_anharmonic_paths() {
        for (spec, x, y, t) in [
            (HamiltonianSpec::quartic(1.0, 1.0).unwrap(), 0.0, 1.5, 0.8),
            (HamiltonianSpec::cubic(2.0, 0.3).unwrap(), -0.4, 1.0, 1.0),
            (HamiltonianSpec::harmonic(0.7, 1.7).unwrap(), 0.1, -0.9, 0.6),
        ] {
            let tr = ivp(&spec, x, y, t);
            for k in 1..=8 {
                let tau = t * k as f64 / 8.0;
                let q = quadrature_J(&tr, tau).unwrap();
                let v = integrate_variational(&tr, tau).unwrap().block_j()[(0, 0)];
                assert!((q - v).abs() <= 1e-8 * v.abs(), "{q} vs {v}");
            }
        }
    }

    #[test]
    fn general_solution_examples() {
        let tr = ivp(&HamiltonianSpec::free(1.0), 0.0, 1.0, 3.0);
        // the symplectic first column carries a sign: (−y q, −m/y)
        let v = general_solution(&tr, 2.0, 1.0, 0.0).unwrap();
        assert!((v - Vector2::new(-2.0, -1.0)).amax() < 1e-12);
        let v = general_solution(&tr, 2.0, 0.0, 3.0).unwrap();
        assert!((v - 3.0 * particular_solution(&tr, 2.0).unwrap()).amax() < 1e-12);

        let spec = HamiltonianSpec::quartic(1.0, 1.0).unwrap();
        let tr = ivp(&spec, 0.1, 1.2, 0.7);
        let f0 = general_fundamental(&tr, 0.0).unwrap();
        for k in 1..=7 {
            let t = 0.1 * k as f64;
            let f = general_fundamental(&tr, t).unwrap();
            assert!((f.determinant() - 1.0).abs() < 1e-9);
            let phi = integrate_variational(&tr, t).unwrap().matrix;
            let phi = Matrix2::new(phi[(0, 0)], phi[(0, 1)], phi[(1, 0)], phi[(1, 1)]);
            // F(τ) = Φ(τ, t₀) F(t₀)
            assert!(close(f, phi * f0, 1e-8));
        }
        // J via c1 = −y₀/m, c2 = 0
        let y0 = tr.initial_state().y[0];
        let j = general_solution(&tr, 0.7, -y0, 0.0).unwrap()[0];
        assert!((j - quadrature_J(&tr, 0.7).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn reduced_fundamental_is_unitriangular() {
        let tr = ivp(&HamiltonianSpec::quartic(1.0, 1.0).unwrap(), 0.0, 1.0, 0.5);
        let r = reduced_fundamental(&tr, 0.5).unwrap();
        assert_eq!((r[(0, 0)], r[(0, 1)], r[(1, 1)]), (1.0, 0.0, 1.0));
        assert!(r[(1, 0)] < 0.0);
    }

    #[test]
    fn picard_vessiot_examples() {
        let r = picard_vessiot_report(&ivp(&HamiltonianSpec::free(1.0), 0.0, 2.0, 1.0), 1.0).unwrap();
        assert_eq!((r.tower_depth, r.elementary), (1, Some(true)));
        assert!((r.value - 0.25).abs() < 1e-12);
        let r = picard_vessiot_report(&ivp(&HamiltonianSpec::harmonic(1.0, 1.3).unwrap(), 0.3, 1.0, 1.0), 0.9).unwrap();
        assert_eq!(r.elementary, Some(true));
        assert!((r.value - r.closed_form_value.unwrap()).abs() < 1e-9 * r.value);
        let r = picard_vessiot_report(&ivp(&HamiltonianSpec::quartic(1.0, 1.0).unwrap(), 0.0, 1.0, 0.5), 0.5).unwrap();
        assert_eq!(r.elementary, None);
        assert!(r.closed_form_value.is_none());
    }

    #[test]
    fn requires_one_autonomous_dof() {
        let spec = HamiltonianSpec::new(vec![1.0, 1.0], PotentialFamily::Free, None).unwrap();
        let tr = integrate_ivp(
            &spec,
            &PhaseState::from_slices(&[0.0, 0.0], &[1.0, 1.0], 0.0),
            1.0,
            Tolerance::default(),
        )
        .unwrap();
        assert!(matches!(quadrature_J(&tr, 1.0), Err(Error::NotOneDof { n: 2 })));
    }

    #[test]
    fn csv_export() {
        let g = GaugeReduction::build(&ivp(&HamiltonianSpec::free(1.0), 0.0, 1.0, 1.0), 4).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("tau,P00"));
        assert_eq!(text.lines().count(), 5);
    }
}
