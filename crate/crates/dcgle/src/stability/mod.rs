//! Plane-wave stability three ways: the delay-free quadratic with its
//! longwave expansion, finite-delay rightmost characteristic roots, and the
//! large-delay strong/weak splitting with classification maps.

mod finite;
mod large_delay;
mod nodelay;

pub use finite::{certify_window, rightmost_root, roots_at_k, RightmostResult};
pub use large_delay::{
    classify_pw_large_delay, classify_with_grids, default_k_grid, default_xi_grid,
    stability_map, stability_map_with, strong_spectrum, strong_spectrum_at, strong_sup,
    weak_gamma, weak_gamma_at, weak_y_at, weak_sup, MapNode, MapSolution, SpectrumSample,
    StabilityClass, StabilityMap, WeakSup,
};
pub use nodelay::{
    nodelay_growth, nodelay_longwave, q0_threshold_comparison, LongwaveExpansion,
    ThresholdComparison,
};

use num_complex::Complex64;

use crate::params::ModelParams;
use crate::planewave::{feedback_factor, PlaneWave};

/// Nonlinear coupling coefficient of the linearization,
/// P = (eps + i) a0^2 + 2 (mu + i nu) a0^4.
pub(crate) fn coupling(p: &ModelParams, s: f64) -> Complex64 {
    Complex64::new(p.epsilon, 1.0) * s + 2.0 * Complex64::new(p.mu, p.nu) * s * s
}

/// Spatial dispersion used when building the matrix entries: the continuum
/// Laplacian symbol or its second-order finite-difference counterpart on a
/// grid of spacing h (used to cross-check the linearization against the
/// simulator's Jacobian).
#[derive(Debug, Clone, Copy)]
enum Dispersion {
    Continuum,
    Grid { h: f64 },
}

impl Dispersion {
    fn eval(self, wavenumber: f64) -> f64 {
        match self {
            Dispersion::Continuum => wavenumber * wavenumber,
            Dispersion::Grid { h } => 2.0 * (1.0 - (wavenumber * h).cos()) / (h * h),
        }
    }
}

/// The 2x2 linearization about a plane wave, coupling the co-rotating
/// perturbation mode at wavenumber k to the conjugate counter-rotating mode
/// at -k. The delayed term contributes `delay_terms.(0|1) * e^{-lam tau}`
/// on the respective diagonal entry.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicSystem {
    pub params: ModelParams,
    pub wave: PlaneWave,
    /// Coefficients of e^{-lam tau} on the two diagonal entries.
    pub delay_terms: (Complex64, Complex64),
    coupling: Complex64,
    dispersion: Dispersion,
}

impl CharacteristicSystem {
    pub fn new(params: &ModelParams, wave: &PlaneWave) -> Self {
        Self::build(params, wave, Dispersion::Continuum)
    }

    /// Same linearization with the finite-difference dispersion of a
    /// periodic grid with spacing h substituted for k^2.
    pub fn with_grid_dispersion(params: &ModelParams, wave: &PlaneWave, h: f64) -> Self {
        Self::build(params, wave, Dispersion::Grid { h })
    }

    fn build(params: &ModelParams, wave: &PlaneWave, dispersion: Dispersion) -> Self {
        let ce = feedback_factor(params, wave);
        Self {
            params: *params,
            wave: *wave,
            delay_terms: (ce, ce.conj()),
            coupling: coupling(params, wave.a0 * wave.a0),
            dispersion,
        }
    }

    /// Dispersion increment of the co-rotating mode,
    /// (beta + i/2)(|q+k|^2 - q^2) in the continuum.
    fn dp(&self, k: f64) -> Complex64 {
        let q = self.wave.q;
        Complex64::new(self.params.beta, 0.5)
            * (self.dispersion.eval(q + k) - self.dispersion.eval(q))
    }

    /// Dispersion increment of the conjugated counter-rotating mode.
    fn dm(&self, k: f64) -> Complex64 {
        let q = self.wave.q;
        Complex64::new(self.params.beta, -0.5)
            * (self.dispersion.eval(q - k) - self.dispersion.eval(q))
    }

    /// Matrix entries [m11, m12, m21, m22] at (lam, k).
    pub fn entries(&self, lam: Complex64, k: f64) -> [Complex64; 4] {
        let decay = (-lam * self.params.tau).exp() - 1.0;
        let p = self.coupling;
        let m11 = lam + self.dp(k) - p - self.delay_terms.0 * decay;
        let m22 = lam + self.dm(k) - p.conj() - self.delay_terms.1 * decay;
        [m11, -p, -p.conj(), m22]
    }

    /// Characteristic function det M(lam; k); entire in lam.
    pub fn det(&self, lam: Complex64, k: f64) -> Complex64 {
        let [m11, m12, m21, m22] = self.entries(lam, k);
        m11 * m22 - m12 * m21
    }

    /// d/dlam of the determinant, for Newton iteration.
    pub fn det_dlam(&self, lam: Complex64, k: f64) -> Complex64 {
        let [m11, _, _, m22] = self.entries(lam, k);
        let shrink = (-lam * self.params.tau).exp() * self.params.tau;
        let d11 = 1.0 + self.delay_terms.0 * shrink;
        let d22 = 1.0 + self.delay_terms.1 * shrink;
        d11 * m22 + m11 * d22
    }

    /// Coefficients (b, c) of the quadratic lam^2 + b lam + c obtained by
    /// replacing e^{-lam tau} with `delay_weight` (0 drops the delayed term
    /// entirely, giving the strong spectrum; at eta=0 the delay-free
    /// quadratic emerges for any weight).
    pub(crate) fn quadratic_coeffs(&self, k: f64, delay_weight: Complex64) -> (Complex64, Complex64) {
        let p = self.coupling;
        let b1 = self.dp(k) - p - self.delay_terms.0 * (delay_weight - 1.0);
        let b2 = self.dm(k) - p.conj() - self.delay_terms.1 * (delay_weight.conj() - 1.0);
        (b1 + b2, b1 * b2 - p * p.conj())
    }

    /// Upper bound on |lambda| over all roots with Re lambda >= 0 at this k.
    ///
    /// On the closed right half-plane the delay weight has modulus at most
    /// one, so the quadratic coefficients admit moduli bounds |b|, |c|
    /// uniform in the delay term, and any root of lambda^2 + b lambda + c
    /// satisfies |lambda| <= max(2|b|, sqrt(2|c|)).
    pub fn root_modulus_bound(&self, k: f64) -> f64 {
        let p = self.coupling;
        let (d0, d1) = self.delay_terms;
        let b1_centre = self.dp(k) - p + d0;
        let b2_centre = self.dm(k) - p.conj() + d1;
        let b = (b1_centre + b2_centre).norm() + d0.norm() + d1.norm();
        let c = (b1_centre.norm() + d0.norm()) * (b2_centre.norm() + d1.norm()) + p.norm_sqr();
        1.0 + (2.0 * b).max((2.0 * c).sqrt())
    }
}

/// det M(lam; k) for the linearization about `pw`.
pub fn char_fn(params: &ModelParams, pw: &PlaneWave, k: f64, lam: Complex64) -> Complex64 {
    CharacteristicSystem::new(params, pw).det(lam, k)
}

/// Roots of lam^2 + b lam + c, ordered by descending real part; numerically
/// stable against cancellation in the -b +/- sqrt pairing.
pub(crate) fn quadratic_roots(b: Complex64, c: Complex64) -> (Complex64, Complex64) {
    let disc = (b * b - 4.0 * c).sqrt();
    // Pick the sign that avoids subtracting nearly equal quantities.
    let s = if (b + disc).norm() >= (b - disc).norm() {
        disc
    } else {
        -disc
    };
    let r1 = -(b + s) / 2.0;
    let r2 = if r1.norm() > 0.0 { c / r1 } else { -(b - s) / 2.0 };
    if r1.re >= r2.re {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::wrap_angle;
    use crate::planewave::{nodelay_amplitude, planewave_from_theta, BranchTag};
    use proptest::prelude::*;

    fn quintic(delta: f64) -> ModelParams {
        ModelParams::quintic_defaults().with_delta(delta)
    }

    /// A feedback wave on the tube at the given angle.
    fn tube_wave(p: &ModelParams, q: f64, theta: f64) -> PlaneWave {
        planewave_from_theta(p, q, theta, BranchTag::Plus).unwrap()
    }

    #[test]
    fn goldstone_root_is_exact() {
        let p = quintic(0.5).with_feedback(0.3, 0.8, 17.0);
        for theta in [0.4, 2.0, 4.0, 5.9] {
            if let Ok(w) = planewave_from_theta(&p, 0.7, theta, BranchTag::Plus) {
                let d = char_fn(&p, &w, 0.0, Complex64::new(0.0, 0.0));
                assert!(d.norm() < 1e-12, "theta={theta}: |det|={}", d.norm());
            }
        }
    }

    #[test]
    fn delay_free_wave_goldstone() {
        let p = quintic(0.1);
        let a0 = *nodelay_amplitude(&p, 0.0).last().unwrap();
        let s = a0 * a0;
        let w = PlaneWave::new(0.0, s + p.nu * s * s, a0);
        assert!(char_fn(&p, &w, 0.0, Complex64::default()).norm() < 1e-12);
    }

    #[test]
    fn determinant_matches_quadratic_when_delay_free() {
        let p = quintic(0.1);
        let a0 = *nodelay_amplitude(&p, 0.5).last().unwrap();
        let s = a0 * a0;
        let w = PlaneWave::new(0.5, -0.125 + s + p.nu * s * s, a0);
        let cs = CharacteristicSystem::new(&p, &w);
        for k in [-1.7, -0.3, 0.0, 0.4, 2.2] {
            let (b, c) = cs.quadratic_coeffs(k, Complex64::new(1.0, 0.0));
            let (r1, r2) = quadratic_roots(b, c);
            for r in [r1, r2] {
                assert!(cs.det(r, k).norm() < 1e-10, "k={k}");
            }
        }
    }

    #[test]
    fn newton_derivative_matches_finite_difference() {
        let p = quintic(0.4).with_feedback(0.2, 0.0, 20.0);
        let w = tube_wave(&p, 0.0, 4.0);
        let cs = CharacteristicSystem::new(&p, &w);
        let lam = Complex64::new(0.05, 0.3);
        let k = 0.7;
        let h = 1e-6;
        let fd = (cs.det(lam + h, k) - cs.det(lam - h, k)) / (2.0 * h);
        let an = cs.det_dlam(lam, k);
        assert!((fd - an).norm() < 1e-6 * an.norm().max(1.0));
    }

    #[test]
    fn grid_dispersion_approaches_continuum() {
        let p = quintic(0.4).with_feedback(0.2, 0.0, 20.0);
        let w = tube_wave(&p, 0.5, 4.0);
        let fine = CharacteristicSystem::with_grid_dispersion(&p, &w, 1e-4);
        let cont = CharacteristicSystem::new(&p, &w);
        let lam = Complex64::new(-0.1, 0.2);
        let d = (fine.det(lam, 0.8) - cont.det(lam, 0.8)).norm();
        assert!(d < 1e-5, "difference {d}");
    }

    #[test]
    fn theta_attached_and_closure_feedback_agree() {
        // The tube-angle form of the delayed coefficient must equal the
        // (phi - omega tau) form when theta is consistent with them.
        let p = quintic(0.4).with_feedback(0.2, 0.3, 21.0);
        let found = crate::existence::find_planewaves(&p, 0.0, (-1.0, 2.0));
        assert!(!found.waves.is_empty());
        for w in &found.waves {
            let mut bare = *w;
            bare.theta = None;
            let a = feedback_factor(&p, w);
            let b = feedback_factor(&p, &bare);
            assert!((a - b).norm() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn quadratic_roots_solve_equation(
            br in -3.0f64..3.0, bi in -3.0f64..3.0,
            cr in -3.0f64..3.0, ci in -3.0f64..3.0,
        ) {
            let b = Complex64::new(br, bi);
            let c = Complex64::new(cr, ci);
            let (r1, r2) = quadratic_roots(b, c);
            for r in [r1, r2] {
                let v = r * r + b * r + c;
                prop_assert!(v.norm() < 1e-9 * (1.0 + c.norm() + b.norm_sqr()));
            }
            prop_assert!((r1 + r2 + b).norm() < 1e-8 * (1.0 + b.norm()));
            prop_assert!((r1 * r2 - c).norm() < 1e-8 * (1.0 + c.norm()));
        }

        #[test]
        fn k_reflection_symmetry_at_zero_carrier(
            theta in 0.2f64..6.0,
            k in 0.01f64..2.5,
            lr in -1.0f64..0.5, li in -2.0f64..2.0,
        ) {
            let p = quintic(0.6).with_feedback(0.25, 0.0, 13.0);
            if let Ok(w) = planewave_from_theta(&p, 0.0, theta, BranchTag::Plus) {
                let cs = CharacteristicSystem::new(&p, &w);
                let lam = Complex64::new(lr, li);
                let a = cs.det(lam, k);
                let b = cs.det(lam, -k);
                prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn wrap_consistency_on_tube_waves() {
        let p = quintic(0.5).with_feedback(0.3, 0.8, 17.0);
        let w = tube_wave(&p, 0.7, 2.0);
        let th = w.theta.unwrap();
        assert!((th - wrap_angle(th)).abs() < 1e-15);
    }
}
