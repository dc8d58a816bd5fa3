//! Finite-delay characteristic roots: multi-seed Newton per perturbation
//! wavenumber, Goldstone exclusion, and an argument-principle count for
//! certifying that the heuristic search missed nothing in a window.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{quadratic_roots, CharacteristicSystem};
use crate::params::ModelParams;
use crate::planewave::PlaneWave;

/// Outcome of a rightmost-root search over a k grid.
#[derive(Debug, Clone)]
pub struct RightmostResult {
    /// Largest real part over all k, Goldstone excluded.
    pub max_re: f64,
    /// k at which it is attained.
    pub k: f64,
    /// The root itself.
    pub root: Complex64,
    /// Seeding heuristics that looked suspicious, if any.
    pub warnings: Vec<String>,
}

const NEWTON_ITERS: usize = 80;
const RESIDUAL_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-8;

fn newton(cs: &CharacteristicSystem, k: f64, seed: Complex64) -> Option<Complex64> {
    let mut lam = seed;
    for _ in 0..NEWTON_ITERS {
        let f = cs.det(lam, k);
        let df = cs.det_dlam(lam, k);
        if df.norm() == 0.0 {
            return None;
        }
        let step = f / df;
        lam -= step;
        if !lam.re.is_finite() || !lam.im.is_finite() {
            return None;
        }
        if step.norm() < 1e-13 * (1.0 + lam.norm()) {
            break;
        }
    }
    (cs.det(lam, k).norm() < RESIDUAL_TOL).then_some(lam)
}

/// All characteristic roots at one k that the seed grid reaches: Newton from
/// a rectangle Re in [-5, 3] x (3 delay strips of width 2*pi/tau), plus the
/// two delay-free quadratic roots and their strip translates. Deduplicated;
/// not certified complete.
pub fn roots_at_k(cs: &CharacteristicSystem, k: f64) -> (Vec<Complex64>, Option<String>) {
    let tau = cs.params.tau;
    let mut seeds = Vec::new();
    let strip = if tau > 0.0 {
        2.0 * std::f64::consts::PI / tau
    } else {
        2.0
    };
    let n_re = 9;
    let n_im = 12;
    for i in 0..n_re {
        let re = -5.0 + 8.0 * i as f64 / (n_re - 1) as f64;
        for j in 0..(3 * n_im) {
            let im = strip * (-1.5 + 3.0 * j as f64 / (3 * n_im - 1) as f64);
            seeds.push(Complex64::new(re, im));
        }
    }
    let (r1, r2) = {
        let (b, c) = {
            let mut p0 = cs.params;
            p0.eta = 0.0;
            let free = CharacteristicSystem::new(&p0, &cs.wave);
            free.quadratic_coeffs(k, Complex64::new(0.0, 0.0))
        };
        quadratic_roots(b, c)
    };
    for root in [r1, r2] {
        for m in -2i32..=2 {
            seeds.push(root + Complex64::new(0.0, m as f64 * strip));
        }
    }

    let mut roots: Vec<Complex64> = Vec::new();
    let mut converged = 0usize;
    let mut cluster: Vec<(Complex64, usize)> = Vec::new();
    for seed in &seeds {
        let Some(lam) = newton(cs, k, *seed) else {
            continue;
        };
        converged += 1;
        match cluster.iter_mut().find(|(c, _)| (*c - lam).norm() < 1e-10) {
            Some((_, n)) => *n += 1,
            None => cluster.push((lam, 1)),
        }
        if !roots.iter().any(|r| (r - lam).norm() < DEDUP_TOL) {
            roots.push(lam);
        }
    }
    roots.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());

    let warning = if converged >= 20 {
        cluster
            .iter()
            .max_by_key(|(_, n)| *n)
            .filter(|(_, n)| *n * 10 > converged * 9)
            .map(|(c, n)| {
                format!(
                    "k={k:.4}: {n}/{converged} seeds collapsed onto {c:.6}; \
                     the seed grid may be blind to part of the spectrum"
                )
            })
    } else {
        None
    };
    (roots, warning)
}

/// Rightmost characteristic root over a k grid, excluding the Goldstone
/// root (|lam| < 1e-8 at k = 0). The wave is stable iff `max_re < 0`.
pub fn rightmost_root(params: &ModelParams, pw: &PlaneWave, k_grid: &[f64]) -> RightmostResult {
    let cs = CharacteristicSystem::new(params, pw);
    let per_k: Vec<(f64, Vec<Complex64>, Option<String>)> = k_grid
        .par_iter()
        .map(|&k| {
            let (roots, warning) = roots_at_k(&cs, k);
            (k, roots, warning)
        })
        .collect();

    let mut best: Option<(f64, Complex64)> = None;
    let mut warnings = Vec::new();
    for (k, roots, warning) in per_k {
        if let Some(w) = warning {
            warnings.push(w);
        }
        for lam in roots {
            if k.abs() < 1e-12 && lam.norm() < 1e-8 {
                continue;
            }
            if best.map(|(_, b)| lam.re > b.re).unwrap_or(true) {
                best = Some((k, lam));
            }
        }
    }
    let (k, root) = best.unwrap_or((f64::NAN, Complex64::new(f64::NEG_INFINITY, 0.0)));
    RightmostResult {
        max_re: root.re,
        k,
        root,
        warnings,
    }
}

/// Count characteristic roots inside the rectangle by the argument
/// principle, sampling the boundary adaptively until the phase of det is
/// resolved. Returns None when det comes too close to zero on the boundary
/// or the winding fails to close; the caller should nudge the rectangle.
pub fn certify_window(
    cs: &CharacteristicSystem,
    k: f64,
    re: (f64, f64),
    im: (f64, f64),
) -> Option<usize> {
    let corners = [
        Complex64::new(re.0, im.0),
        Complex64::new(re.1, im.0),
        Complex64::new(re.1, im.1),
        Complex64::new(re.0, im.1),
    ];
    let scale = cs
        .det(Complex64::new(re.1, 0.5 * (im.0 + im.1)), k)
        .norm()
        .max(1e-6);
    let mut budget = 500_000usize;
    let mut total = 0.0f64;
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        let (fa, fb) = (cs.det(a, k), cs.det(b, k));
        total += edge_winding(cs, k, (a, fa), (b, fb), scale, 0, &mut budget)?;
    }
    let turns = total / (2.0 * std::f64::consts::PI);
    let n = turns.round();
    if (turns - n).abs() > 0.1 || n < 0.0 {
        return None;
    }
    Some(n as usize)
}

fn edge_winding(
    cs: &CharacteristicSystem,
    k: f64,
    a: (Complex64, Complex64),
    b: (Complex64, Complex64),
    scale: f64,
    depth: usize,
    budget: &mut usize,
) -> Option<f64> {
    let (a, fa) = a;
    let (b, fb) = b;
    if fa.norm() < 1e-12 * scale || fb.norm() < 1e-12 * scale {
        return None;
    }
    let dphi = (fb / fa).arg();
    if dphi.abs() < std::f64::consts::FRAC_PI_2 && depth >= 4 {
        return Some(dphi);
    }
    if depth > 28 || *budget == 0 {
        return None;
    }
    *budget -= 1;
    let m = 0.5 * (a + b);
    let fm = cs.det(m, k);
    Some(
        edge_winding(cs, k, (a, fa), (m, fm), scale, depth + 1, budget)?
            + edge_winding(cs, k, (m, fm), (b, fb), scale, depth + 1, budget)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planewave::{nodelay_amplitude, planewave_from_theta, BranchTag};
    use crate::stability::nodelay_growth;

    fn quintic(delta: f64) -> ModelParams {
        ModelParams::quintic_defaults().with_delta(delta)
    }

    #[test]
    fn reduces_to_quadratic_without_feedback() {
        let p = quintic(0.5);
        let a0 = *nodelay_amplitude(&p, 0.0).last().unwrap();
        let s = a0 * a0;
        let w = PlaneWave::new(0.0, s + p.nu * s * s, a0);
        // Tiny residual feedback with tau > 0 so the solver exercises the
        // transcendental path.
        let p_eps = {
            let mut x = p;
            x.eta = 1e-12;
            x.tau = 2.0;
            x
        };
        let grid: Vec<f64> = (0..41).map(|i| -2.0 + 4.0 * i as f64 / 40.0).collect();
        let got = rightmost_root(&p_eps, &w, &grid);
        let mut want = f64::NEG_INFINITY;
        for &k in &grid {
            let (r1, r2) = nodelay_growth(&p, &w, k);
            for r in [r1, r2] {
                if !(k.abs() < 1e-12 && r.norm() < 1e-8) {
                    want = want.max(r.re);
                }
            }
        }
        assert!((got.max_re - want).abs() < 1e-8, "{} vs {want}", got.max_re);
    }

    #[test]
    fn goldstone_excluded_for_stable_wave() {
        // A deep-stable wave still has the exact root at zero; the search
        // must not report it.
        let p = quintic(0.4).with_feedback(0.2, 0.0, 20.0);
        let waves = crate::existence::find_planewaves(&p, 0.0, (0.9, 1.2)).waves;
        let w = waves
            .iter()
            .find(|w| (w.omega - 0.998).abs() < 0.02)
            .copied()
            .expect("relaxed wave present");
        let res = rightmost_root(&p, &w, &[0.0]);
        assert!(res.max_re < 0.0, "max_re = {}", res.max_re);
        assert!(res.max_re > -1.0);
    }

    #[test]
    fn stable_wave_on_high_amplitude_segment_short_delay() {
        // tau=5, phi=0, gain 0.4: the top of the snaking branch is stable
        // across the k band.
        let p = quintic(0.4).with_feedback(0.2, 0.0, 5.0);
        let found = crate::existence::find_planewaves(&p, 0.0, (-1.0, 2.0));
        let w = found
            .waves
            .iter()
            .copied()
            .max_by(|a, b| a.a0.partial_cmp(&b.a0).unwrap())
            .unwrap();
        let grid: Vec<f64> = (0..61).map(|i| -3.0 + 6.0 * i as f64 / 60.0).collect();
        let res = rightmost_root(&p, &w, &grid);
        assert!(res.max_re < 0.0, "max_re = {} at k = {}", res.max_re, res.k);
    }

    #[test]
    fn winding_count_matches_found_roots() {
        let p = quintic(0.4).with_feedback(0.2, 0.0, 10.0);
        let w = planewave_from_theta(&p, 0.0, 4.0, BranchTag::Plus).unwrap();
        let cs = CharacteristicSystem::new(&p, &w);
        let k = 0.5;
        let (roots, _) = roots_at_k(&cs, k);
        let re = (-1.0, 1.0);
        let im = (-1.03, 0.97);
        let inside: Vec<_> = roots
            .iter()
            .filter(|r| r.re > re.0 && r.re < re.1 && r.im > im.0 && r.im < im.1)
            .collect();
        let counted = certify_window(&cs, k, re, im).expect("boundary clean");
        assert_eq!(counted, inside.len(), "roots found: {roots:?}");
    }

    #[test]
    fn winding_sees_goldstone() {
        let p = quintic(0.4).with_feedback(0.2, 0.0, 10.0);
        let w = planewave_from_theta(&p, 0.0, 4.0, BranchTag::Plus).unwrap();
        let cs = CharacteristicSystem::new(&p, &w);
        let n = certify_window(&cs, 0.0, (-0.013, 0.011), (-0.012, 0.014)).unwrap();
        assert!(n >= 1);
    }
}
