//! Model parameters of the delayed cubic-quintic Ginzburg-Landau equation
//!
//!   dA/dt = (beta + i/2) A_xx + delta A + (eps + i)|A|^2 A
//!           + (mu + i nu)|A|^4 A + eta e^{i phi} A(x, t - tau).

use crate::error::ModelError;

/// Coefficients of the model plus the feedback delay and phase.
///
/// `beta > 0`, `eta >= 0`, `tau >= 0`; a negative feedback rate is expressed
/// through `phi`. The cubic-only model is the exact special case
/// `mu = nu = 0` and takes separate analytic code paths where the quintic
/// formulas would divide by `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub nu: f64,
    pub eta: f64,
    pub phi: f64,
    pub tau: f64,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        beta: f64,
        delta: f64,
        epsilon: f64,
        mu: f64,
        nu: f64,
        eta: f64,
        phi: f64,
        tau: f64,
    ) -> Result<Self, ModelError> {
        let p = Self {
            beta,
            delta,
            epsilon,
            mu,
            nu,
            eta,
            phi,
            tau,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.beta > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "beta",
                value: self.beta,
                reason: "diffusion coefficient must be positive",
            });
        }
        if !(self.eta >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "eta",
                value: self.eta,
                reason: "feedback rate must be nonnegative (sign goes into phi)",
            });
        }
        if !(self.tau >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "tau",
                value: self.tau,
                reason: "delay must be nonnegative",
            });
        }
        for (name, v) in [
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("mu", self.mu),
            ("nu", self.nu),
            ("phi", self.phi),
        ] {
            if !v.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }

    /// Reference quintic parameter set used throughout: beta=0.5, eps=1,
    /// mu=-1, nu=-0.1, no gain or feedback until overridden.
    pub fn quintic_defaults() -> Self {
        Self {
            beta: 0.5,
            delta: 0.0,
            epsilon: 1.0,
            mu: -1.0,
            nu: -0.1,
            eta: 0.0,
            phi: 0.0,
            tau: 0.0,
        }
    }

    /// Exactly cubic model (both quintic coefficients zero)?
    pub fn is_cubic(&self) -> bool {
        self.mu == 0.0 && self.nu == 0.0
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_feedback(mut self, eta: f64, phi: f64, tau: f64) -> Self {
        self.eta = eta;
        self.phi = phi;
        self.tau = tau;
        self
    }
}

/// Normalize an angle to [0, 2*pi).
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x % two_pi;
    if y < 0.0 {
        y += two_pi;
    }
    // x % two_pi can return exactly two_pi after the correction when x is a
    // tiny negative number.
    if y >= two_pi {
        y -= two_pi;
    }
    y
}

/// Distance between two angles on the circle, in [0, pi].
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(2.0 * std::f64::consts::PI - d)
}
