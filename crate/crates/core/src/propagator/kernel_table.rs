//! Tabulated one-dimensional semiclassical kernel.
//!
//! Each node `(x, x₀)` is one boundary-value solve. The action is
//! interpolated with bicubic Hermite patches using its exact derivatives
//! `S_x = y(t₁)`, `S_{x₀} = −y(t₀)` and `S_{xx₀} = −1/J`; `J` itself uses
//! finite-difference slopes.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{checked_det_j, classical_path};
use crate::classical_path::{BvpProblem, ShootingConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelTableConfig {
    /// Range and node count for the final position `x`.
    pub x_range: (f64, f64),
    pub x_nodes: usize,
    /// Range and node count for the initial position `x₀`.
    pub x0_range: (f64, f64),
    pub x0_nodes: usize,
    pub shooting: ShootingConfig,
}

/// Uniform axis.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Axis {
    lo: f64,
    step: f64,
    n: usize,
}

impl Axis {
    fn new(range: (f64, f64), n: usize, key: &str) -> Result<Self> {
        if n < 2 || !(range.1 > range.0) {
            return Err(Error::spec(
                key,
                "table axis needs at least two nodes over a non-empty range",
            ));
        }
        Ok(Self {
            lo: range.0,
            step: (range.1 - range.0) / (n - 1) as f64,
            n,
        })
    }

    fn node(&self, i: usize) -> f64 {
        self.lo + self.step * i as f64
    }

    fn hi(&self) -> f64 {
        self.node(self.n - 1)
    }

    /// Cell index and local coordinate in [0, 1].
    fn locate(&self, v: f64) -> Option<(usize, f64)> {
        let slack = 1e-12 * self.step;
        if !(v >= self.lo - slack && v <= self.hi() + slack) {
            return None;
        }
        let u = ((v - self.lo) / self.step).max(0.0);
        let i = (u.floor() as usize).min(self.n - 2);
        Some((i, (u - i as f64).clamp(0.0, 1.0)))
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Node {
    s: f64,
    s_x: f64,
    s_x0: f64,
    s_xx0: f64,
    j: f64,
}

/// Semiclassical kernel `K(x, t₁ | x₀, t₀)` on a rectangle of endpoints.
#[derive(Debug, Clone)]
pub struct KernelTable {
    hbar: f64,
    t0: f64,
    t1: f64,
    x: Axis,
    x0: Axis,
    nodes: Vec<Node>,
    j_x: Vec<f64>,
    j_x0: Vec<f64>,
    j_xx0: Vec<f64>,
}

fn solve_node(
    spec: &HamiltonianSpec,
    x0: f64,
    x: f64,
    t0: f64,
    t1: f64,
    cfg: &ShootingConfig,
    guess: Option<f64>,
) -> Result<(Node, f64)> {
    let bvp = BvpProblem::one_dof(x0, x, t0, t1)?;
    let cfg = match guess {
        Some(g) => cfg.clone().with_guess(DVector::from_element(1, g)),
        None => cfg.clone(),
    };
    let traj = classical_path(spec, &bvp, &cfg)?;
    let j = checked_det_j(&traj)?;
    if j <= 0.0 {
        // J starts positive, so a negative value means a focal point was crossed
        return Err(Error::FocalPointInInterior { time: t1 });
    }
    let start = traj.initial_state();
    let end = traj.final_state();
    let s = traj.action + end.y[0] * (x - end.x[0]);
    Ok((
        Node {
            s,
            s_x: end.y[0],
            s_x0: -start.y[0],
            s_xx0: -1.0 / j,
            j,
        },
        start.y[0],
    ))
}

/// Linear extrapolation from the last two continuation values.
fn extrapolate((last, before): (f64, Option<f64>)) -> f64 {
    before.map_or(last, |b| 2.0 * last - b)
}

/// Finite-difference slope along a uniform axis, second order throughout.
fn slope(f: &dyn Fn(usize) -> f64, n: usize, i: usize, h: f64) -> f64 {
    if n == 2 {
        (f(1) - f(0)) / h
    } else if i == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * h)
    }
}

fn hermite(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [
        2.0 * u3 - 3.0 * u2 + 1.0,
        u3 - 2.0 * u2 + u,
        -2.0 * u3 + 3.0 * u2,
        u3 - u2,
    ]
}

impl KernelTable {
    /// Solves the boundary-value problem at every node. The initial momentum
    /// is continued from the central node, first along `x` and then along
    /// each row (rows run in parallel), which keeps every solve on the branch
    /// of the short direct path.
    pub fn build(spec: &HamiltonianSpec, hbar: f64, t0: f64, t1: f64, cfg: &KernelTableConfig) -> Result<Self> {
        if spec.n() != 1 {
            return Err(Error::NotOneDof { n: spec.n() });
        }
        super::check_hbar(hbar)?;
        if !(t1 > t0) {
            return Err(Error::spec("problem.t1", "t1 must exceed t0"));
        }
        let xa = Axis::new(cfg.x_range, cfg.x_nodes, "kernel.x_nodes")?;
        let x0a = Axis::new(cfg.x0_range, cfg.x0_nodes, "kernel.x0_nodes")?;

        // seed column: continue along x from the central node
        let (ic, jc) = (xa.n / 2, x0a.n / 2);
        let mut seed = vec![0.0; xa.n];
        let mut seed_nodes = vec![Node::default(); xa.n];
        let (centre, y_centre) = solve_node(spec, x0a.node(jc), xa.node(ic), t0, t1, &cfg.shooting, None)?;
        seed[ic] = y_centre;
        seed_nodes[ic] = centre;
        for dir in [1isize, -1] {
            let mut prev = (y_centre, None);
            let mut i = ic as isize + dir;
            while i >= 0 && (i as usize) < xa.n {
                let (node, y0) = solve_node(
                    spec,
                    x0a.node(jc),
                    xa.node(i as usize),
                    t0,
                    t1,
                    &cfg.shooting,
                    Some(extrapolate(prev)),
                )?;
                seed[i as usize] = y0;
                seed_nodes[i as usize] = node;
                prev = (y0, Some(prev.0));
                i += dir;
            }
        }

        // rows in parallel, each continued along x₀ from the seed column
        let rows: Vec<Vec<Node>> = (0..xa.n)
            .into_par_iter()
            .map(|i| {
                let x = xa.node(i);
                let mut row = vec![Node::default(); x0a.n];
                row[jc] = seed_nodes[i];
                for dir in [1isize, -1] {
                    let mut prev = (seed[i], None);
                    let mut j = jc as isize + dir;
                    while j >= 0 && (j as usize) < x0a.n {
                        let (node, y0) = solve_node(
                            spec,
                            x0a.node(j as usize),
                            x,
                            t0,
                            t1,
                            &cfg.shooting,
                            Some(extrapolate(prev)),
                        )?;
                        row[j as usize] = node;
                        prev = (y0, Some(prev.0));
                        j += dir;
                    }
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let nodes: Vec<Node> = rows.into_iter().flatten().collect();

        let n0 = x0a.n;
        let idx = |i: usize, j: usize| i * n0 + j;
        let mut j_x = vec![0.0; nodes.len()];
        let mut j_x0 = vec![0.0; nodes.len()];
        let mut j_xx0 = vec![0.0; nodes.len()];
        for i in 0..xa.n {
            for j in 0..n0 {
                j_x[idx(i, j)] = slope(&|k| nodes[idx(k, j)].j, xa.n, i, xa.step);
                j_x0[idx(i, j)] = slope(&|k| nodes[idx(i, k)].j, n0, j, x0a.step);
            }
        }
        for i in 0..xa.n {
            for j in 0..n0 {
                j_xx0[idx(i, j)] = slope(&|k| j_x0[idx(k, j)], xa.n, i, xa.step);
            }
        }
        Ok(Self {
            hbar,
            t0,
            t1,
            x: xa,
            x0: x0a,
            nodes,
            j_x,
            j_x0,
            j_xx0,
        })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// The same classical data with another ℏ; no solves are repeated.
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        super::check_hbar(hbar)?;
        Ok(Self { hbar, ..self.clone() })
    }

    pub fn times(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x.lo, self.x.hi())
    }

    pub fn x0_range(&self) -> (f64, f64) {
        (self.x0.lo, self.x0.hi())
    }

    /// Interpolated `(S, J)` at `(x, x₀)`, or `None` outside the table.
    pub fn action_and_j(&self, x: f64, x0: f64) -> Option<(f64, f64)> {
        let (i, u) = self.x.locate(x)?;
        let (j, v) = self.x0.locate(x0)?;
        let (hx, h0) = (self.x.step, self.x0.step);
        let bu = hermite(u);
        let bv = hermite(v);
        let n0 = self.x0.n;
        let mut s = 0.0;
        let mut jac = 0.0;
        for (a, di) in [(0usize, 0usize), (2, 1)] {
            for (b, dj) in [(0usize, 0usize), (2, 1)] {
                let k = (i + di) * n0 + (j + dj);
                let nd = &self.nodes[k];
                s += nd.s * bu[a] * bv[b]
                    + hx * nd.s_x * bu[a + 1] * bv[b]
                    + h0 * nd.s_x0 * bu[a] * bv[b + 1]
                    + hx * h0 * nd.s_xx0 * bu[a + 1] * bv[b + 1];
                jac += nd.j * bu[a] * bv[b]
                    + hx * self.j_x[k] * bu[a + 1] * bv[b]
                    + h0 * self.j_x0[k] * bu[a] * bv[b + 1]
                    + hx * h0 * self.j_xx0[k] * bu[a + 1] * bv[b + 1];
            }
        }
        Some((s, jac))
    }

    /// `K_WKB(x, t₁ | x₀, t₀)`, or `None` outside the table.
    pub fn try_eval(&self, x: f64, x0: f64) -> Option<Complex64> {
        let (s, j) = self.action_and_j(x, x0)?;
        let modulus = 1.0 / (2.0 * PI * self.hbar * j.abs()).sqrt();
        Some(Complex64::from_polar(modulus, s / self.hbar - FRAC_PI_4))
    }

    /// Kernel value; points outside the table contribute zero. Size the
    /// table to cover the propagation grid and the support of ψ₀.
    pub fn eval(&self, x: f64, x0: f64) -> Complex64 {
        self.try_eval(x, x0).unwrap_or_default()
    }
}
