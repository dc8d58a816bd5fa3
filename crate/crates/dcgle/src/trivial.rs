//! Stability of the homogeneous zero state: exact characteristic roots and
//! Hopf curves for any delay, plus the large-delay dispersion surface and the
//! strong/weak/stable classification.

use num_complex::Complex64;

use crate::error::ModelError;
use crate::params::ModelParams;

/// Point on an Andronov-Hopf curve of the zero state, parametrized by the
/// critical frequency. `eta` may come out negative; the physical curve is
/// its |eta| image with the phase shifted by pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfPoint {
    pub omega_c: f64,
    pub eta: f64,
    pub delta: f64,
    pub q: f64,
}

/// Stability kind shared by the trivial state and plane waves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityKind {
    Stable,
    WeakUnstable,
    StrongUnstable,
}

impl StabilityKind {
    /// Stable CSV encoding: 0 stable, 1 weak, 2 strong.
    pub fn code(self) -> u8 {
        match self {
            StabilityKind::Stable => 0,
            StabilityKind::WeakUnstable => 1,
            StabilityKind::StrongUnstable => 2,
        }
    }
}

/// Large-delay classification of the zero state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrivialClass {
    pub kind: StabilityKind,
    /// Two disjoint bands of unstable wavenumbers (delta > |eta|)?
    pub two_regions: bool,
    /// Delay-mode frequency maximizing the dispersion surface.
    pub xi_c: f64,
    /// Wavenumber maximizing the dispersion surface (the nonnegative one
    /// of the symmetric pair).
    pub q_c: f64,
}

/// Characteristic residual of the zero state,
/// lambda - delta + (beta + i/2) q^2 - eta e^{i phi} e^{-lambda tau}.
pub fn trivial_char_residual(p: &ModelParams, q: f64, lambda: Complex64) -> Complex64 {
    lambda - p.delta + Complex64::new(p.beta, 0.5) * q * q
        - Complex64::from_polar(p.eta, p.phi) * (-lambda * p.tau).exp()
}

/// Hopf curve samples eta(omega), delta(omega) at wavenumber q. Grid points
/// within 1e-12 of the sin(phi - omega tau) = 0 asymptotes are dropped; the
/// second return value counts them.
pub fn hopf_curve(p: &ModelParams, q: f64, omega_grid: &[f64]) -> (Vec<HopfPoint>, usize) {
    let mut out = Vec::with_capacity(omega_grid.len());
    let mut skipped = 0usize;
    for &omega in omega_grid {
        let s = (p.phi - omega * p.tau).sin();
        if s.abs() < 1e-12 {
            skipped += 1;
            continue;
        }
        let c = (p.phi - omega * p.tau).cos();
        let ratio = (0.5 * q * q + omega) / s;
        out.push(HopfPoint {
            omega_c: omega,
            eta: ratio,
            delta: p.beta * q * q - c * ratio,
            q,
        });
    }
    (out, skipped)
}

/// Rescaled growth rate of the pseudo-continuous spectrum,
/// gamma = -1/2 ln[((delta - beta q^2)^2 + (xi + q^2/2)^2) / eta^2].
pub fn trivial_gamma(p: &ModelParams, q: f64, xi: f64) -> Result<f64, ModelError> {
    if p.eta == 0.0 {
        return Err(ModelError::DegenerateSpectrum);
    }
    let re = p.delta - p.beta * q * q;
    let im = xi + 0.5 * q * q;
    Ok(-0.5 * ((re * re + im * im) / (p.eta * p.eta)).ln())
}

/// Large-delay classification of the zero state: strongly unstable for
/// delta > 0, weakly unstable for -|eta| < delta <= 0, stable for
/// delta <= -|eta| (the boundary counts as stable).
pub fn classify_trivial(p: &ModelParams) -> TrivialClass {
    let eta = p.eta.abs();
    let kind = if p.delta > 0.0 {
        StabilityKind::StrongUnstable
    } else if p.delta > -eta {
        StabilityKind::WeakUnstable
    } else {
        StabilityKind::Stable
    };
    // The dispersion surface diverges where both squared terms vanish:
    // q^2 = delta/beta when delta > 0, else the maximum sits at the origin.
    let (xi_c, q_c) = if p.delta > 0.0 {
        (-0.5 * p.delta / p.beta, (p.delta / p.beta).sqrt())
    } else {
        (0.0, 0.0)
    };
    TrivialClass {
        kind,
        two_regions: kind != StabilityKind::Stable && p.delta > eta,
        xi_c,
        q_c,
    }
}

/// Newton iteration on the exact characteristic function from a grid of
/// seeds covering one delay strip; returns the rightmost converged root.
///
/// The derivative is 1 + eta tau e^{i phi} e^{-lambda tau}.
pub fn trivial_rightmost_root(p: &ModelParams, q: f64) -> Option<Complex64> {
    if p.tau <= 0.0 {
        // Single explicit root.
        return Some(Complex64::new(p.delta, 0.0) - Complex64::new(p.beta, 0.5) * q * q
            + Complex64::from_polar(p.eta, p.phi));
    }
    let strip = 2.0 * std::f64::consts::PI / p.tau;
    let mut best: Option<Complex64> = None;
    let re_lo = -40.0 / p.tau;
    let re_hi = 5.0;
    for i in 0..24 {
        let re = re_lo + (re_hi - re_lo) * i as f64 / 23.0;
        for j in 0..16 {
            let im = -0.5 * strip + strip * j as f64 / 15.0;
            let mut lambda = Complex64::new(re, im);
            let mut converged = false;
            for _ in 0..100 {
                let f = trivial_char_residual(p, q, lambda);
                let df = 1.0 + Complex64::from_polar(p.eta * p.tau, p.phi) * (-lambda * p.tau).exp();
                if df.norm() < 1e-300 {
                    break;
                }
                let step = f / df;
                lambda -= step;
                if step.norm() < 1e-13 {
                    converged = true;
                    break;
                }
            }
            if converged && trivial_char_residual(p, q, lambda).norm() < 1e-9 {
                if best.map_or(true, |b| lambda.re > b.re) {
                    best = Some(lambda);
                }
            }
        }
    }
    best
}
