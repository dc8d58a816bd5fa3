//! Plane-wave solutions A = a0 e^{i(qx + omega t)}: residuals, delay-free
//! amplitudes, the solution tube, and its angle parametrization.

use num_complex::Complex64;

use crate::error::ModelError;
use crate::params::{wrap_angle, ModelParams};

/// One plane wave. `theta` is the tube angle (omega*tau - phi + pi mod 2*pi)
/// when the wave was produced by a solver that knows it; waves from the
/// large-delay parametrization carry theta without a frequency closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub q: f64,
    pub omega: f64,
    pub a0: f64,
    pub theta: Option<f64>,
}

impl PlaneWave {
    pub fn new(q: f64, omega: f64, a0: f64) -> Self {
        Self {
            q,
            omega,
            a0,
            theta: None,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(wrap_angle(theta));
        self
    }

    /// Tube angle implied by the frequency closure at finite delay.
    pub fn closure_theta(&self, p: &ModelParams) -> f64 {
        wrap_angle(self.omega * p.tau - p.phi + std::f64::consts::PI)
    }

    /// The angle to use in tube-based formulas: the attached one if present,
    /// otherwise the closure value.
    pub fn theta_or_closure(&self, p: &ModelParams) -> f64 {
        self.theta.unwrap_or_else(|| self.closure_theta(p))
    }
}

/// Which root of the amplitude quadratic: `Plus` is always the larger a0^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchTag {
    Plus,
    Minus,
}

impl BranchTag {
    pub fn label(self) -> &'static str {
        match self {
            BranchTag::Plus => "+",
            BranchTag::Minus => "-",
        }
    }
}

/// Feedback term eta e^{i phi} e^{-i omega tau} of the plane-wave balance.
///
/// When the wave carries a tube angle the term is evaluated as
/// -eta e^{-i theta}; for closure-satisfying waves the two forms are equal,
/// and for the tau-free large-delay family only the theta form gives the
/// balance the wave actually satisfies.
pub(crate) fn feedback_factor(p: &ModelParams, pw: &PlaneWave) -> Complex64 {
    match pw.theta {
        Some(theta) => -Complex64::from_polar(p.eta, -theta),
        None => Complex64::from_polar(p.eta, p.phi - pw.omega * p.tau),
    }
}

/// Complex residual of the plane-wave balance
/// i*omega + (beta + i/2) q^2 - delta - (eps + i) a0^2 - (mu + i nu) a0^4
/// - eta e^{i phi} e^{-i omega tau};
/// zero exactly when the wave solves the model.
pub fn residual_pw(p: &ModelParams, pw: &PlaneWave) -> Complex64 {
    let s = pw.a0 * pw.a0;
    Complex64::new(0.0, pw.omega) + Complex64::new(p.beta, 0.5) * pw.q * pw.q
        - Complex64::new(p.delta, 0.0)
        - Complex64::new(p.epsilon, 1.0) * s
        - Complex64::new(p.mu, p.nu) * s * s
        - feedback_factor(p, pw)
}

/// Real roots s of mu s^2 + eps s + c = 0 ordered (larger, smaller);
/// the cubic model's single root is returned twice. `None` when no real
/// root exists.
pub(crate) fn amplitude_sq_roots(p: &ModelParams, c: f64) -> Option<(f64, f64)> {
    if p.mu == 0.0 {
        if p.epsilon == 0.0 {
            return None;
        }
        let s = -c / p.epsilon;
        Some((s, s))
    } else {
        let disc = p.epsilon * p.epsilon - 4.0 * p.mu * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let r1 = (-p.epsilon + sq) / (2.0 * p.mu);
        let r2 = (-p.epsilon - sq) / (2.0 * p.mu);
        Some((r1.max(r2), r1.min(r2)))
    }
}

/// All real nonnegative delay-free amplitudes at wavenumber q, ascending.
///
/// Quintic: both roots of mu a0^4 + eps a0^2 + (delta - beta q^2) = 0 that
/// give a0^2 >= 0. Cubic model (mu = nu = 0): the single root
/// a0^2 = (beta q^2 - delta)/eps, an exact code path rather than a mu -> 0
/// limit. The feedback rate is ignored; callers assert a no-delay context.
pub fn nodelay_amplitude(p: &ModelParams, q: f64) -> Vec<f64> {
    let c = p.delta - p.beta * q * q;
    let mut out = Vec::new();
    if let Some((hi, lo)) = amplitude_sq_roots(p, c) {
        if lo >= 0.0 {
            out.push(lo.sqrt());
        }
        if hi >= 0.0 && hi != lo {
            out.push(hi.sqrt());
        }
    }
    out
}

/// Signed distance from the tube surface:
/// (-beta q^2 + delta + eps a0^2 + mu a0^4)^2
/// + (omega + q^2/2 - a0^2 - nu a0^4)^2 - eta^2.
/// Zero exactly on the tube containing every delayed plane wave.
pub fn tube_residual(p: &ModelParams, pw: &PlaneWave) -> f64 {
    let s = pw.a0 * pw.a0;
    let f1 = -p.beta * pw.q * pw.q + p.delta + p.epsilon * s + p.mu * s * s;
    let f2 = pw.omega + 0.5 * pw.q * pw.q - s - p.nu * s * s;
    f1 * f1 + f2 * f2 - p.eta * p.eta
}

/// Wave at tube angle theta: amplitude from
/// a0^2 = (-eps +- sqrt(eps^2 - 4 mu (delta - beta q^2 - eta cos theta)))/(2 mu)
/// (branch per the larger/smaller a0^2 convention) and frequency
/// omega = -q^2/2 + a0^2 + nu a0^4 + eta sin theta.
///
/// The result is tau-independent; omega does not in general satisfy the
/// finite-delay phase closure.
pub fn planewave_from_theta(
    p: &ModelParams,
    q: f64,
    theta: f64,
    branch: BranchTag,
) -> Result<PlaneWave, ModelError> {
    let c = p.delta - p.beta * q * q - p.eta * theta.cos();
    let (hi, lo) = amplitude_sq_roots(p, c).ok_or(ModelError::NoRealAmplitude { q })?;
    let s = match branch {
        BranchTag::Plus => hi,
        BranchTag::Minus => lo,
    };
    if s < 0.0 {
        return Err(ModelError::NoRealAmplitude { q });
    }
    let omega = -0.5 * q * q + s + p.nu * s * s + p.eta * theta.sin();
    Ok(PlaneWave::new(q, omega, s.sqrt()).with_theta(theta))
}
