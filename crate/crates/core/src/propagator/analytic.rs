//! Closed-form wavepackets used as oracles.
//!
//! Initial states are `ψ₀(x) = (2πσ²)^{−1/4} exp(−(x−c)²/4σ² + ip(x−c)/ℏ)`.

use std::f64::consts::PI;

use num_complex::Complex64;

pub fn gaussian(x: f64, center: f64, sigma: f64, momentum: f64, hbar: f64) -> Complex64 {
    let d = x - center;
    let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
    Complex64::from_polar(norm * (-d * d / (4.0 * sigma * sigma)).exp(), momentum * d / hbar)
}

/// Free evolution of [`gaussian`] to time `t` after preparation.
pub fn free_gaussian(x: f64, t: f64, m: f64, hbar: f64, center: f64, sigma: f64, momentum: f64) -> Complex64 {
    let s2 = sigma * sigma;
    let alpha = Complex64::new(s2, hbar * t / (2.0 * m));
    let d = x - center - momentum * t / m;
    let norm = (2.0 * PI * s2).powf(-0.25) * (Complex64::new(s2, 0.0) / alpha).sqrt();
    let phase = Complex64::new(
        0.0,
        momentum * (x - center) / hbar - momentum * momentum * t / (2.0 * m * hbar),
    );
    norm * (-(d * d) / (4.0 * alpha) + phase).exp()
}

/// Position spread `σ(t) = σ √(1 + (ℏt/2mσ²)²)` of a free Gaussian.
pub fn free_gaussian_width(t: f64, m: f64, hbar: f64, sigma: f64) -> f64 {
    sigma * (1.0 + (hbar * t / (2.0 * m * sigma * sigma)).powi(2)).sqrt()
}

/// Width `σ² = ℏ/2mω` of the oscillator ground state.
pub fn coherent_width(m: f64, omega: f64, hbar: f64) -> f64 {
    (hbar / (2.0 * m * omega)).sqrt()
}

/// Oscillator evolution of [`gaussian`] with `σ = coherent_width`, centred at
/// `center` with momentum `momentum` at `t = 0`.
pub fn coherent_state(x: f64, t: f64, m: f64, omega: f64, hbar: f64, center: f64, momentum: f64) -> Complex64 {
    let (s, c) = (omega * t).sin_cos();
    let xt = center * c + momentum / (m * omega) * s;
    let pt = momentum * c - m * omega * center * s;
    let d = x - xt;
    let norm = (m * omega / (PI * hbar)).powf(0.25);
    let phase = (pt * x - 0.5 * pt * xt - 0.5 * momentum * center) / hbar - 0.5 * omega * t;
    Complex64::from_polar(norm * (-m * omega * d * d / (2.0 * hbar)).exp(), phase)
}
