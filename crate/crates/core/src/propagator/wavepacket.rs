use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{BoundarySide, Error, Result, Warning};
use crate::io::fmt_f64;

/// Boundary-to-peak modulus ratio above which a wavepacket counts as leaking.
pub const BOUNDARY_DECAY: f64 = 1e-12;

/// Samples of ψ on a uniform grid including both end points.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub values: Vec<Complex64>,
    pub t: f64,
}

impl WavepacketGrid {
    pub fn new(x_min: f64, x_max: f64, values: Vec<Complex64>, t: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::spec("evolve.points", "a grid needs at least two points"));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::spec(
                "evolve.x_max",
                "grid bounds must be finite with x_max > x_min",
            ));
        }
        Ok(Self {
            x_min,
            x_max,
            values,
            t,
        })
    }

    /// Samples `f` at the grid points.
    pub fn from_fn<F: Fn(f64) -> Complex64>(x_min: f64, x_max: f64, n_points: usize, t: f64, f: F) -> Result<Self> {
        let dx = (x_max - x_min) / (n_points.max(2) - 1) as f64;
        let values = (0..n_points).map(|i| f(x_min + dx * i as f64)).collect();
        Self::new(x_min, x_max, values, t)
    }

    /// Normalised Gaussian `(2πσ²)^{−1/4} exp(−(x−c)²/4σ² + ip(x−c)/ℏ)`.
    pub fn gaussian(
        x_min: f64,
        x_max: f64,
        n_points: usize,
        center: f64,
        sigma: f64,
        momentum: f64,
        hbar: f64,
        t: f64,
    ) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::spec("evolve.sigma", "width must be positive"));
        }
        Self::from_fn(x_min, x_max, n_points, t, |x| {
            super::analytic::gaussian(x, center, sigma, momentum, hbar)
        })
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points() {
            self.x_max
        } else {
            self.x_min + self.dx() * i as f64
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n_points()).map(|i| self.x(i)).collect()
    }

    fn trapezoid<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        let n = self.n_points();
        let inner: f64 = (1..n - 1).map(&f).sum();
        self.dx() * (inner + 0.5 * (f(0) + f(n - 1)))
    }

    /// ‖ψ‖₂ by the trapezoid rule.
    pub fn norm(&self) -> f64 {
        self.trapezoid(|i| self.values[i].norm_sqr()).sqrt()
    }

    /// ‖ψ − φ‖₂ on a shared grid.
    pub fn l2_distance(&self, other: &WavepacketGrid) -> f64 {
        assert_eq!(self.n_points(), other.n_points(), "grids differ");
        self.trapezoid(|i| (self.values[i] - other.values[i]).norm_sqr()).sqrt()
    }

    /// ⟨x⟩ under |ψ|².
    pub fn mean_position(&self) -> f64 {
        self.trapezoid(|i| self.x(i) * self.values[i].norm_sqr()) / self.norm().powi(2)
    }

    /// Position standard deviation under |ψ|².
    pub fn width(&self) -> f64 {
        let mu = self.mean_position();
        (self.trapezoid(|i| (self.x(i) - mu).powi(2) * self.values[i].norm_sqr()) / self.norm().powi(2)).sqrt()
    }

    /// Boundary leak warnings for modulus ratios above [`BOUNDARY_DECAY`].
    pub fn boundary_warnings(&self) -> Vec<Warning> {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut out = Vec::new();
        if peak == 0.0 {
            return out;
        }
        let ends = [
            (BoundarySide::Left, self.values[0]),
            (BoundarySide::Right, self.values[self.n_points() - 1]),
        ];
        for (side, v) in ends {
            let ratio = v.norm() / peak;
            if ratio > BOUNDARY_DECAY {
                out.push(Warning::BoundaryLeak { side, ratio });
            }
        }
        out
    }

    /// `x, re, im, abs2` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,re,im,abs2")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(self.x(i)),
                fmt_f64(v.re),
                fmt_f64(v.im),
                fmt_f64(v.norm_sqr())
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOutput {
    pub psi: WavepacketGrid,
    pub warnings: Vec<Warning>,
}

/// `ψ(x, t) = ∫ K(x, x₀) ψ₀(x₀) dx₀` by the trapezoid rule on the input grid,
/// evaluated in parallel over output points. Input samples below
/// [`BOUNDARY_DECAY`] of the peak are skipped.
pub fn propagate_wavepacket<K>(kernel: K, psi0: &WavepacketGrid, t: f64) -> PropagationOutput
where
    K: Fn(f64, f64) -> Complex64 + Sync,
{
    let n = psi0.n_points();
    let dx = psi0.dx();
    let peak = psi0.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cutoff = BOUNDARY_DECAY * peak;
    let support: Vec<(f64, Complex64)> = (0..n)
        .filter(|&j| psi0.values[j].norm() > cutoff)
        .map(|j| {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            (psi0.x(j), psi0.values[j] * (w * dx))
        })
        .collect();
    let values: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = psi0.x(i);
            support.iter().map(|&(x0, c)| kernel(x, x0) * c).sum()
        })
        .collect();
    let psi = WavepacketGrid {
        x_min: psi0.x_min,
        x_max: psi0.x_max,
        values,
        t,
    };
    let mut warnings = psi0.boundary_warnings();
    warnings.extend(psi.boundary_warnings());
    PropagationOutput { psi, warnings }
}
