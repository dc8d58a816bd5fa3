//! Large-delay stability splitting: the strong spectrum (delayed term
//! dropped), the weak spectrum (delayed exponential promoted to a free
//! unit-scale factor Y, growth rescaled as gamma = -ln|Y|), and the
//! resulting three-way classification over (gain, tube angle) maps.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{quadratic_roots, CharacteristicSystem};
use crate::error::ModelError;
use crate::params::ModelParams;
use crate::planewave::{planewave_from_theta, BranchTag, PlaneWave};
use crate::trivial::StabilityKind;

/// One point of a computed spectrum surface.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumSample {
    /// Perturbation spatial wavenumber.
    pub k: f64,
    /// Imaginary part (strong roots) or delay-mode frequency (weak).
    pub xi: f64,
    /// Re lam for strong samples, gamma for weak ones.
    pub value: f64,
    /// 1 or 2, ordered by decreasing growth at that node.
    pub branch_index: u8,
}

/// Classification with the maximizing probe recorded.
#[derive(Debug, Clone, Copy)]
pub struct StabilityClass {
    pub kind: StabilityKind,
    pub witness_k: f64,
    pub witness_xi: f64,
    /// Growth at the witness: Re lam if strongly unstable, gamma otherwise.
    pub witness_value: f64,
}

const TOL_STRONG: f64 = 1e-8;
const TOL_WEAK: f64 = 1e-8;
const K_EXCL: f64 = 1e-3;
const XI_EXCL: f64 = 1e-3;
const RING_RADIUS: f64 = 2e-3;

/// Default perturbation wavenumber grid, [-3, 3] at 601 nodes.
pub fn default_k_grid() -> Vec<f64> {
    (0..601).map(|i| -3.0 + 6.0 * i as f64 / 600.0).collect()
}

/// Default delay-mode frequency grid, one 2*pi period at 629 nodes; the
/// weak spectrum is a function of xi alone, so one period suffices.
pub fn default_xi_grid() -> Vec<f64> {
    use std::f64::consts::PI;
    (0..629).map(|i| -PI + 2.0 * PI * i as f64 / 628.0).collect()
}

/// Strong-spectrum growth rates at one k: the quadratic left over when the
/// delayed entries are dropped. Ordered by descending real part.
pub fn strong_spectrum_at(p: &ModelParams, pw: &PlaneWave, k: f64) -> (Complex64, Complex64) {
    let cs = CharacteristicSystem::new(p, pw);
    let (b, c) = cs.quadratic_coeffs(k, Complex64::new(0.0, 0.0));
    quadratic_roots(b, c)
}

/// Strong spectrum at the tube point (q, theta) on the larger-amplitude
/// branch.
pub fn strong_spectrum(
    p: &ModelParams,
    q: f64,
    theta: f64,
    k: f64,
) -> Result<(Complex64, Complex64), ModelError> {
    let pw = planewave_from_theta(p, q, theta, BranchTag::Plus)?;
    Ok(strong_spectrum_at(p, &pw, k))
}

/// Max over the k grid of the strong growth rate, with its maximizer.
pub fn strong_sup(
    p: &ModelParams,
    pw: &PlaneWave,
    k_grid: &[f64],
) -> (f64, f64, Complex64) {
    let mut best = (f64::NEG_INFINITY, f64::NAN, Complex64::default());
    for &k in k_grid {
        let (r1, _) = strong_spectrum_at(p, pw, k);
        if r1.re > best.0 {
            best = (r1.re, k, r1);
        }
    }
    best
}

/// The two y-factors the delayed exponential can take on the weak spectrum
/// at probe (k, xi): roots of
/// |cE|^2 Y^2 - (B1 conj(cE) + B2 cE) Y + (B1 B2 - |P|^2) = 0,
/// where B1/B2 are the non-delay diagonal entries at lam = i xi. Ordered by
/// descending gamma = -ln|Y| (less damped first).
pub fn weak_y_at(
    p: &ModelParams,
    pw: &PlaneWave,
    k: f64,
    xi: f64,
) -> Result<(Complex64, Complex64), ModelError> {
    if p.eta == 0.0 {
        return Err(ModelError::DegenerateSpectrum);
    }
    let cs = CharacteristicSystem::new(p, pw);
    // Each diagonal entry at lam = i xi reads (B - cE Y) once e^{-lam tau}
    // is replaced by Y, so the determinant is a quadratic in Y. B1/B2 are
    // built directly from dispersion and coupling; tau never enters.
    let (ce, ce_bar) = cs.delay_terms;
    let coupling = super::coupling(p, pw.a0 * pw.a0);
    let i_xi = Complex64::new(0.0, xi);
    let b1 = i_xi + cs.dp(k) - coupling + ce;
    let b2 = i_xi + cs.dm(k) - coupling.conj() + ce_bar;
    let aa = ce * ce_bar;
    let bb = -(b1 * ce_bar + b2 * ce);
    let cc = b1 * b2 - coupling * coupling.conj();
    // Stable complex quadratic solve.
    let disc = (bb * bb - 4.0 * aa * cc).sqrt();
    let sgn = if (bb + disc).norm() >= (bb - disc).norm() {
        disc
    } else {
        -disc
    };
    let y1 = -(bb + sgn) / (2.0 * aa);
    let y2 = if y1.norm() > 0.0 {
        cc / (aa * y1)
    } else {
        -(bb - sgn) / (2.0 * aa)
    };
    // Less damped branch (larger gamma = smaller |Y|) first.
    if y1.norm() <= y2.norm() {
        Ok((y1, y2))
    } else {
        Ok((y2, y1))
    }
}

/// Weak-spectrum growth exponents gamma = -ln|Y| at probe (k, xi), ordered
/// descending. Independent of tau by construction.
pub fn weak_gamma_at(
    p: &ModelParams,
    pw: &PlaneWave,
    k: f64,
    xi: f64,
) -> Result<(f64, f64), ModelError> {
    let (y1, y2) = weak_y_at(p, pw, k, xi)?;
    Ok((-y1.norm().ln(), -y2.norm().ln()))
}

/// Weak spectrum at the tube point (q, theta), larger-amplitude branch.
pub fn weak_gamma(
    p: &ModelParams,
    q: f64,
    theta: f64,
    k: f64,
    xi: f64,
) -> Result<(f64, f64), ModelError> {
    let pw = planewave_from_theta(p, q, theta, BranchTag::Plus)?;
    weak_gamma_at(p, &pw, k, xi)
}

/// Supremum of the weak growth over a (k, xi) grid with the Goldstone zero
/// handled: at probes inside the exclusion box only the phase branch (the Y
/// nearest 1) is dropped, and a genuinely positive cap at the origin is
/// re-detected on a small ring around it.
#[derive(Debug, Clone, Copy)]
pub struct WeakSup {
    pub gamma: f64,
    pub k: f64,
    pub xi: f64,
    /// True when the supremum came from the ring around the excluded
    /// origin (positive Goldstone cap).
    pub goldstone_cap: bool,
}

pub fn weak_sup(
    p: &ModelParams,
    pw: &PlaneWave,
    k_grid: &[f64],
    xi_grid: &[f64],
) -> Result<WeakSup, ModelError> {
    if p.eta == 0.0 {
        return Err(ModelError::DegenerateSpectrum);
    }
    let rows: Vec<(f64, f64, f64)> = k_grid
        .par_iter()
        .map(|&k| {
            let mut best = (f64::NEG_INFINITY, f64::NAN);
            for &xi in xi_grid {
                let (y1, y2) = weak_y_at(p, pw, k, xi).expect("eta > 0 checked");
                let excluded = k.abs() < K_EXCL && xi.abs() < XI_EXCL;
                let candidates: [Option<Complex64>; 2] = if excluded {
                    // Drop only the phase branch; keep the companion.
                    if (y1 - 1.0).norm() <= (y2 - 1.0).norm() {
                        [Some(y2), None]
                    } else {
                        [Some(y1), None]
                    }
                } else {
                    [Some(y1), Some(y2)]
                };
                for y in candidates.into_iter().flatten() {
                    let g = -y.norm().ln();
                    if g > best.0 {
                        best = (g, xi);
                    }
                }
            }
            (best.0, k, best.1)
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, f64::NAN, f64::NAN);
    for (g, k, xi) in rows {
        if g > best.0 {
            best = (g, k, xi);
        }
    }

    // Ring test around the excluded origin: if the phase branch's gamma is
    // positive all the way around a small circle, the symmetry zero sits in
    // a positive cap and the wave is weakly unstable regardless of the
    // grid values.
    let mut ring_best = (f64::NEG_INFINITY, f64::NAN, f64::NAN);
    let mut ring_min = f64::INFINITY;
    for i in 0..16 {
        let t = 2.0 * std::f64::consts::PI * i as f64 / 16.0;
        let (k, xi) = (RING_RADIUS * t.cos(), RING_RADIUS * t.sin());
        let (y1, y2) = weak_y_at(p, pw, k, xi)?;
        let y_phase = if (y1 - 1.0).norm() <= (y2 - 1.0).norm() {
            y1
        } else {
            y2
        };
        let g = -y_phase.norm().ln();
        ring_min = ring_min.min(g);
        if g > ring_best.0 {
            ring_best = (g, k, xi);
        }
    }
    if ring_min > TOL_WEAK && ring_best.0 > best.0 {
        return Ok(WeakSup {
            gamma: ring_best.0,
            k: ring_best.1,
            xi: ring_best.2,
            goldstone_cap: true,
        });
    }
    Ok(WeakSup {
        gamma: best.0,
        k: best.1,
        xi: best.2,
        goldstone_cap: false,
    })
}

/// Three-way classification at the tube point (q, theta) with the grids
/// pinned to the defaults.
pub fn classify_pw_large_delay(
    p: &ModelParams,
    q: f64,
    theta: f64,
) -> Result<StabilityClass, ModelError> {
    classify_with_grids(p, q, theta, &default_k_grid(), &default_xi_grid())
}

/// Classification with caller-chosen probe grids (coarser grids make maps
/// cheap; the defaults match the reference figures).
pub fn classify_with_grids(
    p: &ModelParams,
    q: f64,
    theta: f64,
    k_grid: &[f64],
    xi_grid: &[f64],
) -> Result<StabilityClass, ModelError> {
    let pw = planewave_from_theta(p, q, theta, BranchTag::Plus)?;
    let (s_max, s_k, s_root) = strong_sup(p, &pw, k_grid);
    if s_max > TOL_STRONG {
        return Ok(StabilityClass {
            kind: StabilityKind::StrongUnstable,
            witness_k: s_k,
            witness_xi: s_root.im,
            witness_value: s_max,
        });
    }
    let w = weak_sup(p, &pw, k_grid, xi_grid)?;
    let kind = if w.gamma > TOL_WEAK {
        StabilityKind::WeakUnstable
    } else {
        StabilityKind::Stable
    };
    Ok(StabilityClass {
        kind,
        witness_k: w.k,
        witness_xi: w.xi,
        witness_value: w.gamma,
    })
}

/// A wave and its classification at one map node.
#[derive(Debug, Clone, Copy)]
pub struct MapSolution {
    pub a0: f64,
    pub omega: f64,
    pub class: StabilityClass,
}

/// One node of a stability map; `solution` is None off the tube.
#[derive(Debug, Clone, Copy)]
pub struct MapNode {
    pub delta: f64,
    pub theta: f64,
    pub solution: Option<MapSolution>,
}

impl MapNode {
    /// CSV class encoding: 0 stable, 1 weak, 2 strong, 3 no solution.
    pub fn class_code(&self) -> u8 {
        self.solution.map(|s| s.class.kind.code()).unwrap_or(3)
    }
}

/// Classification over a (delta, theta) grid, delta-major ordering.
#[derive(Debug, Clone)]
pub struct StabilityMap {
    pub q: f64,
    pub deltas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub nodes: Vec<MapNode>,
}

impl StabilityMap {
    pub fn node(&self, i_delta: usize, j_theta: usize) -> &MapNode {
        &self.nodes[i_delta * self.thetas.len() + j_theta]
    }

    /// (delta, a0, kind) projections split at theta = pi; the two halves
    /// overlap in (delta, a0) but need not classify alike.
    pub fn half_maps(&self) -> (Vec<(f64, f64, StabilityKind)>, Vec<(f64, f64, StabilityKind)>) {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for n in &self.nodes {
            if let Some(sol) = n.solution {
                let row = (n.delta, sol.a0, sol.class.kind);
                if n.theta <= std::f64::consts::PI {
                    lower.push(row);
                } else {
                    upper.push(row);
                }
            }
        }
        (lower, upper)
    }
}

/// Classify every (delta, theta) node with the default probe grids.
pub fn stability_map(
    p: &ModelParams,
    q: f64,
    delta_grid: &[f64],
    theta_grid: &[f64],
) -> StabilityMap {
    stability_map_with(p, q, delta_grid, theta_grid, &default_k_grid(), &default_xi_grid())
}

/// Classify every node with caller-chosen probe grids.
pub fn stability_map_with(
    p: &ModelParams,
    q: f64,
    delta_grid: &[f64],
    theta_grid: &[f64],
    k_grid: &[f64],
    xi_grid: &[f64],
) -> StabilityMap {
    let jobs: Vec<(f64, f64)> = delta_grid
        .iter()
        .flat_map(|&d| theta_grid.iter().map(move |&t| (d, t)))
        .collect();
    let nodes: Vec<MapNode> = jobs
        .par_iter()
        .map(|&(delta, theta)| {
            let pd = p.with_delta(delta);
            let solution = match planewave_from_theta(&pd, q, theta, BranchTag::Plus) {
                Ok(pw) => classify_with_grids(&pd, q, theta, k_grid, xi_grid)
                    .ok()
                    .map(|class| MapSolution {
                        a0: pw.a0,
                        omega: pw.omega,
                        class,
                    }),
                Err(_) => None,
            };
            MapNode {
                delta,
                theta,
                solution,
            }
        })
        .collect();
    StabilityMap {
        q,
        deltas: delta_grid.to_vec(),
        thetas: theta_grid.to_vec(),
        nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    fn quintic(delta: f64) -> ModelParams {
        // Large-delay quantities are tau-free; tau only fixes the wave's
        // frequency bookkeeping, so any positive value works.
        ModelParams::quintic_defaults()
            .with_delta(delta)
            .with_feedback(0.2, 0.0, 50.0)
    }

    fn coarse_k() -> Vec<f64> {
        (0..201).map(|i| -3.0 + 6.0 * i as f64 / 200.0).collect()
    }

    fn coarse_xi() -> Vec<f64> {
        use std::f64::consts::PI;
        (0..157).map(|i| -PI + 2.0 * PI * i as f64 / 156.0).collect()
    }

    #[test]
    fn weak_goldstone_root_at_origin() {
        let p = quintic(0.5);
        let pw = planewave_from_theta(&p, 0.0, 3.0, BranchTag::Plus).unwrap();
        let (y1, y2) = weak_y_at(&p, &pw, 0.0, 0.0).unwrap();
        let d = (y1 - 1.0).norm().min((y2 - 1.0).norm());
        assert!(d < 1e-12, "nearest |Y-1| = {d}");
    }

    #[test]
    fn weak_values_reconstruct_y_modulus() {
        let p = quintic(0.7);
        let pw = planewave_from_theta(&p, 0.5, 2.5, BranchTag::Plus).unwrap();
        for (k, xi) in [(0.3, 0.9), (-1.2, -2.0), (2.4, 0.1)] {
            let (y1, y2) = weak_y_at(&p, &pw, k, xi).unwrap();
            let (g1, g2) = weak_gamma_at(&p, &pw, k, xi).unwrap();
            assert!((y1.norm() - (-g1).exp()).abs() < 1e-12);
            assert!((y2.norm() - (-g2).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn weak_spectrum_is_tau_free() {
        let base = quintic(0.6);
        let pw = planewave_from_theta(&base, 0.0, 2.2, BranchTag::Plus).unwrap();
        let g50 = weak_gamma_at(&base, &pw, 0.7, 1.1).unwrap();
        let mut other = base;
        other.tau = 123.0;
        let g123 = weak_gamma_at(&other, &pw, 0.7, 1.1).unwrap();
        assert!((g50.0 - g123.0).abs() < 1e-12);
        assert!((g50.1 - g123.1).abs() < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_without_feedback() {
        let mut p = quintic(0.5);
        p.eta = 0.0;
        let pw = PlaneWave::new(0.0, 1.0, 1.0);
        assert!(matches!(
            weak_gamma_at(&p, &pw, 0.1, 0.1),
            Err(ModelError::DegenerateSpectrum)
        ));
    }

    #[test]
    fn strong_quadratic_reduces_to_delay_free_form() {
        // With eta = 0 the strong quadratic and the delay-free growth
        // quadratic are the same object.
        let mut p = quintic(0.5);
        p.eta = 0.0;
        let amps = crate::planewave::nodelay_amplitude(&p, 0.0);
        let a0 = *amps.last().unwrap();
        let s = a0 * a0;
        let pw = PlaneWave::new(0.0, s + p.nu * s * s, a0);
        for k in [-2.0, -0.4, 0.9, 2.7] {
            let (s1, s2) = strong_spectrum_at(&p, &pw, k);
            let (n1, n2) = crate::stability::nodelay_growth(&p, &pw, k);
            assert!((s1 - n1).norm() < 1e-12);
            assert!((s2 - n2).norm() < 1e-12);
        }
    }

    #[test]
    fn fig_zero_carrier_strong_boundaries() {
        // Gain 0.5, zero carrier: strongly unstable below the lower angle
        // boundary near 1.91 and above the upper one near 5.18.
        let p = quintic(0.5);
        let k = coarse_k();
        let sup = |theta: f64| {
            let pw = planewave_from_theta(&p, 0.0, theta, BranchTag::Plus).unwrap();
            strong_sup(&p, &pw, &k).0
        };
        assert!(sup(1.0) > 0.0);
        assert!(sup(3.0) < 0.0);
        assert!(sup(5.5) > 0.0);
        let bisect = |mut a: f64, mut b: f64| {
            for _ in 0..40 {
                let m = 0.5 * (a + b);
                if sup(a).signum() == sup(m).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        let lower = bisect(1.0, 3.0);
        let upper = bisect(5.5, 3.0);
        assert!((lower - 1.91).abs() < 0.05, "lower boundary {lower}");
        assert!((upper - 5.18).abs() < 0.05, "upper boundary {upper}");
    }

    #[test]
    fn off_zero_carrier_boundary_has_finite_k_maximizer() {
        // Gain 0.5, carrier 1: upper boundary near 4.47 with the strong
        // maximizer away from k = 0.
        let p = quintic(0.5);
        let k = coarse_k();
        let sup_k = |theta: f64| {
            let pw = planewave_from_theta(&p, 1.0, theta, BranchTag::Plus).unwrap();
            strong_sup(&p, &pw, &k)
        };
        let mut a = 4.0;
        let mut b = 5.0;
        for _ in 0..40 {
            let m = 0.5 * (a + b);
            if sup_k(a).0.signum() == sup_k(m).0.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        let upper = 0.5 * (a + b);
        assert!((upper - 4.5).abs() < 0.1, "upper boundary {upper}");
        let (_, k_star, _) = sup_k(upper + 0.01);
        assert!((k_star.abs() - 0.85).abs() < 0.1, "maximizer {k_star}");
    }

    #[test]
    fn captioned_classifications() {
        let k = coarse_k();
        let xi = coarse_xi();
        let case = |delta: f64, q: f64, theta: f64| {
            classify_with_grids(&quintic(delta), q, theta, &k, &xi)
                .unwrap()
                .kind
        };
        assert_eq!(case(1.0, 1.0, 4.0), StabilityKind::Stable);
        assert_eq!(case(1.0, 1.0, 2.0), StabilityKind::WeakUnstable);
        assert_eq!(case(0.5, 0.0, 1.0), StabilityKind::StrongUnstable);
    }

    #[test]
    fn witness_sign_iff_unstable() {
        let k = coarse_k();
        let xi = coarse_xi();
        for (delta, q, theta) in [(1.0, 1.0, 4.0), (1.0, 1.0, 2.0), (0.5, 0.0, 1.0), (1.0, 0.0, 2.0)] {
            let c = classify_with_grids(&quintic(delta), q, theta, &k, &xi).unwrap();
            assert_eq!(
                c.witness_value > 0.0,
                c.kind != StabilityKind::Stable,
                "({delta}, {q}, {theta}) -> {c:?}"
            );
        }
    }

    #[test]
    fn zero_carrier_quartet_growth_signs() {
        // Four captioned spectra: two weakly unstable, two stable.
        let k = coarse_k();
        let xi = coarse_xi();
        let sup = |delta: f64, q: f64, theta: f64| {
            let p = quintic(delta);
            let pw = planewave_from_theta(&p, q, theta, BranchTag::Plus).unwrap();
            weak_sup(&p, &pw, &k, &xi).unwrap().gamma
        };
        assert!(sup(0.5, 0.0, 0.0) > 0.0);
        assert!(sup(1.0, 0.0, 2.0) < 0.0);
        assert!(sup(1.0, 1.0, 2.0) > 0.0);
        assert!(sup(1.0, 1.0, 4.0) < 0.0);
    }

    #[test]
    fn class_boundary_refines_by_bisection() {
        // The weak/stable boundary in theta at fixed gain is a sign change
        // of the continuous weak supremum; bisection pins it to 1e-6.
        let p = quintic(1.0);
        let k = coarse_k();
        let xi = coarse_xi();
        let g = |theta: f64| {
            let pw = planewave_from_theta(&p, 1.0, theta, BranchTag::Plus).unwrap();
            weak_sup(&p, &pw, &k, &xi).unwrap().gamma
        };
        let (mut a, mut b) = (2.0, 4.0);
        assert!(g(a) > 0.0 && g(b) < 0.0);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if g(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
            if (b - a) < 1e-7 {
                break;
            }
        }
        assert!(b - a < 1e-6);
        assert!(g(a) > 0.0 && g(b) < 0.0);
    }

    #[test]
    fn map_contains_all_classes_and_marks_gaps() {
        let p = quintic(0.0);
        let deltas: Vec<f64> = (0..17).map(|i| -0.4 + 1.6 * i as f64 / 16.0).collect();
        let thetas: Vec<f64> = (0..15)
            .map(|i| 2.0 * std::f64::consts::PI * i as f64 / 14.0)
            .collect();
        let map = stability_map_with(&p, 0.0, &deltas, &thetas, &coarse_k(), &coarse_xi());
        let mut seen = [false; 4];
        for n in &map.nodes {
            seen[n.class_code() as usize] = true;
        }
        assert!(seen[0], "no stable nodes");
        assert!(seen[1], "no weakly unstable nodes");
        assert!(seen[2], "no strongly unstable nodes");
        assert!(seen[3], "no off-tube nodes");
    }

    #[test]
    fn half_maps_disagree_about_theta_reflection() {
        let p = quintic(0.0);
        let deltas: Vec<f64> = (0..9).map(|i| 0.2 + 0.8 * i as f64 / 8.0).collect();
        let thetas: Vec<f64> = (0..17)
            .map(|i| 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / 17.0)
            .collect();
        let map = stability_map_with(&p, 0.0, &deltas, &thetas, &coarse_k(), &coarse_xi());
        // Compare each node against its reflection theta -> 2 pi - theta.
        let mut disagreements = 0;
        for (j, &theta) in map.thetas.iter().enumerate() {
            let mirror = 2.0 * std::f64::consts::PI - theta;
            let Some(jm) = map
                .thetas
                .iter()
                .position(|&t| (t - mirror).abs() < 1e-9)
            else {
                continue;
            };
            for i in 0..map.deltas.len() {
                if map.node(i, j).class_code() != map.node(i, jm).class_code() {
                    disagreements += 1;
                }
            }
        }
        assert!(disagreements > 0, "map symmetric under theta reflection");
        let (lower, upper) = map.half_maps();
        assert!(!lower.is_empty() && !upper.is_empty());
    }

    #[test]
    fn cubic_mode_three_region_layout() {
        // Cubic mode with destabilizing nonlinearity sign: along growing
        // gain at a fixed angle the zero-carrier family shows all three
        // classes.
        let p = ModelParams::new(0.5, 0.0, -1.0, 0.0, 0.0, 0.2, 0.0, 50.0).unwrap();
        let deltas: Vec<f64> = (0..31).map(|i| -0.25 + 0.75 * i as f64 / 30.0).collect();
        let thetas: Vec<f64> = (0..13)
            .map(|i| 2.0 * std::f64::consts::PI * i as f64 / 12.0)
            .collect();
        let map = stability_map_with(&p, 0.0, &deltas, &thetas, &coarse_k(), &coarse_xi());
        let mut seen = [false; 4];
        for n in &map.nodes {
            seen[n.class_code() as usize] = true;
        }
        assert!(seen[0] && seen[1] && seen[2], "classes seen: {seen:?}");
    }
}
