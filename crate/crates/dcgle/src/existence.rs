//! Delayed plane-wave existence: roots of the transcendental frequency
//! equation, snaking branch traces between the delay-free envelopes, and the
//! linear-in-tau growth of the solution count.

use crate::error::ModelError;
use crate::params::{wrap_angle, ModelParams};
use crate::planewave::{amplitude_sq_roots, BranchTag, PlaneWave};

/// Scan spacing: each oscillation of sin(omega tau - phi) is sampled at
/// least 20 times, never coarser than 1e-3.
pub fn scan_spacing(p: &ModelParams) -> f64 {
    let osc = 2.0 * std::f64::consts::PI / (20.0 * p.tau.max(f64::MIN_POSITIVE) * p.eta.max(1.0));
    osc.min(1e-3)
}

/// Amplitude-squared on a frequency branch, from
/// mu s^2 + eps s + (delta - beta q^2 + eta cos(omega tau - phi)) = 0.
fn branch_s(p: &ModelParams, q: f64, omega: f64, branch: BranchTag) -> Result<f64, ModelError> {
    let c = p.delta - p.beta * q * q + p.eta * (omega * p.tau - p.phi).cos();
    let (hi, lo) = amplitude_sq_roots(p, c).ok_or(ModelError::NoRealAmplitude { q })?;
    Ok(match branch {
        BranchTag::Plus => hi,
        BranchTag::Minus => lo,
    })
}

/// Frequency residual f(omega) = a0^2 + nu a0^4 - omega - q^2/2
/// - eta sin(omega tau - phi) with a0^2 taken on the requested branch;
/// its zeros are the plane-wave frequencies at fixed delta.
pub fn pw_frequency_residual(
    p: &ModelParams,
    q: f64,
    omega: f64,
    branch: BranchTag,
) -> Result<f64, ModelError> {
    let s = branch_s(p, q, omega, branch)?;
    Ok(s + p.nu * s * s - omega - 0.5 * q * q - p.eta * (omega * p.tau - p.phi).sin())
}

/// Waves found by a bracketing scan, plus non-fatal diagnostics.
#[derive(Debug, Clone)]
pub struct FoundWaves {
    pub waves: Vec<PlaneWave>,
    /// Human-readable scan warnings (possible missed root pairs).
    pub warnings: Vec<String>,
}

/// Frequencies of every plane wave in `omega_range` at fixed parameters:
/// both amplitude branches are scanned, roots are bisected to 1e-13,
/// Newton-polished once, merged when closer than 1e-8 in omega, and
/// returned sorted by frequency with the tube angle attached.
pub fn find_planewaves(p: &ModelParams, q: f64, omega_range: (f64, f64)) -> FoundWaves {
    let (lo, hi) = omega_range;
    let mut waves: Vec<PlaneWave> = Vec::new();
    let mut warnings = Vec::new();
    if !(hi > lo) {
        return FoundWaves { waves, warnings };
    }
    let dx = scan_spacing(p);
    let n = ((hi - lo) / dx).ceil() as usize + 1;
    for branch in [BranchTag::Plus, BranchTag::Minus] {
        if p.is_cubic() && branch == BranchTag::Minus {
            // The cubic amplitude equation is linear; both tags coincide.
            continue;
        }
        let f = |w: f64| -> Option<f64> {
            let s = branch_s(p, q, w, branch).ok()?;
            if s < 0.0 {
                return None;
            }
            Some(s + p.nu * s * s - w - 0.5 * q * q - p.eta * (w * p.tau - p.phi).sin())
        };
        let mut prev: Option<(f64, f64)> = None;
        // Sign direction of the previous bracket; two successive brackets
        // falling the same way imply an even number of crossings was missed
        // between them.
        let mut last_parity: Option<bool> = None;
        for i in 0..n {
            let w = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let fw = match f(w) {
                Some(v) => v,
                None => {
                    prev = None;
                    continue;
                }
            };
            if let Some((w0, f0)) = prev {
                if f0 == 0.0 {
                    // Grid point is itself a root; handled when it became prev.
                } else if f0 * fw < 0.0 {
                    let parity = f0 > 0.0;
                    if last_parity == Some(parity) {
                        warnings.push(format!(
                            "possible missed root pair on branch {} before omega={w0:.6}: \
                             consecutive brackets fall the same way; refine the scan",
                            branch.label()
                        ));
                    }
                    last_parity = Some(parity);
                    if let Some(root) = refine_root(&f, w0, w, f0) {
                        let s = branch_s(p, q, root, branch).unwrap_or(-1.0);
                        if s >= 0.0 {
                            let theta = wrap_angle(root * p.tau - p.phi + std::f64::consts::PI);
                            waves.push(PlaneWave::new(q, root, s.sqrt()).with_theta(theta));
                        }
                    }
                }
            } else if fw == 0.0 {
                if let Ok(s) = branch_s(p, q, w, branch) {
                    if s >= 0.0 {
                        let theta = wrap_angle(w * p.tau - p.phi + std::f64::consts::PI);
                        waves.push(PlaneWave::new(q, w, s.sqrt()).with_theta(theta));
                    }
                }
            }
            prev = Some((w, fw));
        }
    }
    waves.sort_by(|a, b| (a.omega, a.a0).partial_cmp(&(b.omega, b.a0)).unwrap());
    // Merge duplicates: same frequency to 1e-8 and same amplitude, which
    // keeps genuinely distinct waves that happen to share a frequency.
    waves.dedup_by(|a, b| (a.omega - b.omega).abs() < 1e-8 && (a.a0 - b.a0).abs() < 1e-6);
    FoundWaves { waves, warnings }
}

/// Bisection to 1e-13 followed by one Newton polish with a central numeric
/// derivative.
fn refine_root(f: &dyn Fn(f64) -> Option<f64>, mut a: f64, mut b: f64, fa0: f64) -> Option<f64> {
    let mut fa = fa0;
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * a.abs().max(1.0) {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Some(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    let mut root = 0.5 * (a + b);
    let h = 1e-7 * root.abs().max(1.0);
    if let (Some(fp), Some(fm), Some(f0)) = (f(root + h), f(root - h), f(root)) {
        let df = (fp - fm) / (2.0 * h);
        if df != 0.0 {
            let polished = root - f0 / df;
            if polished.is_finite() && (polished - root).abs() < 10.0 * (b - a).abs().max(h) {
                if let Some(fpol) = f(polished) {
                    if fpol.abs() <= f0.abs() {
                        root = polished;
                    }
                }
            }
        }
    }
    Some(root)
}

/// Default scan window [min - eta - 1, max + eta + 1] over the frequencies
/// of the two delay-free envelope branches; callers widen it when they know
/// better.
pub fn default_omega_range(p: &ModelParams, q: f64) -> (f64, f64) {
    let mut omegas = Vec::new();
    for sign in [1.0, -1.0] {
        let c = p.delta - p.beta * q * q + sign * p.eta;
        if let Some((hi, lo)) = amplitude_sq_roots(p, c) {
            for s in [hi, lo] {
                if s >= 0.0 {
                    omegas.push(-0.5 * q * q + s + p.nu * s * s);
                }
            }
        }
    }
    if omegas.is_empty() {
        let center = -0.5 * q * q;
        return (center - p.eta - 1.0, center + p.eta + 1.0);
    }
    let min = omegas.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = omegas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min - p.eta - 1.0, max + p.eta + 1.0)
}

/// Which amplitude root a wave sits on: the larger (`Plus`) or smaller
/// (`Minus`) solution of the modulus equation at the wave's frequency.
/// Cubic parameters have a single root and always report `Plus`.
pub fn amplitude_branch(p: &ModelParams, w: &PlaneWave) -> BranchTag {
    if p.is_cubic() {
        return BranchTag::Plus;
    }
    let c = p.delta - p.beta * w.q * w.q
        + p.eta * (w.omega * p.tau - p.phi).cos();
    let s = w.a0 * w.a0;
    match amplitude_sq_roots(p, c) {
        Some((hi, lo)) => {
            if (s - hi).abs() <= (s - lo).abs() {
                BranchTag::Plus
            } else {
                BranchTag::Minus
            }
        }
        None => BranchTag::Plus,
    }
}

/// One traced point of a snaking branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub omega: f64,
    pub a0: f64,
    pub delta: f64,
    pub theta: f64,
}

/// Frequency-parametrized branch delta(omega), a0(omega). The gain field of
/// the input parameters is ignored: the branch sweeps delta. Gaps where the
/// amplitude root goes complex or negative split the trace into segments.
#[derive(Debug, Clone)]
pub struct Branch {
    pub q: f64,
    pub branch_tag: BranchTag,
    pub segments: Vec<Vec<BranchPoint>>,
    /// Delay-free reference curve at phi = 0 as (a0, delta) samples.
    pub envelope_low: Vec<(f64, f64)>,
    /// Delay-free reference curve at phi = pi.
    pub envelope_high: Vec<(f64, f64)>,
    /// Count of grid steps where the other quadratic root continued the
    /// curve better than the tagged one (fold proximity).
    pub swaps: usize,
}

impl Branch {
    /// All points in omega order regardless of segment breaks.
    pub fn points(&self) -> impl Iterator<Item = &BranchPoint> {
        self.segments.iter().flatten()
    }
}

/// Amplitude-squared roots of nu s^2 + s - r = 0 as (tagged, other) for the
/// requested tag; `None` when no real root exists.
/// The closure sheet that continues to the delay-free amplitude curve as the
/// quintic frequency correction vanishes: the root of nu s^2 + s = r that
/// tends to r for nu -> 0. For nu < 0 that is the smaller root.
pub fn principal_branch(p: &ModelParams) -> BranchTag {
    if p.nu < 0.0 {
        BranchTag::Minus
    } else {
        BranchTag::Plus
    }
}

fn trace_roots(nu: f64, r: f64, branch: BranchTag) -> Option<(f64, f64)> {
    if nu == 0.0 {
        return Some((r, r));
    }
    let disc = 1.0 + 4.0 * nu * r;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let s1 = (-1.0 + sq) / (2.0 * nu);
    let s2 = (-1.0 - sq) / (2.0 * nu);
    let (hi, lo) = (s1.max(s2), s1.min(s2));
    Some(match branch {
        BranchTag::Plus => (hi, lo),
        BranchTag::Minus => (lo, hi),
    })
}

/// Trace delta(omega) along one amplitude branch:
/// a0^2 from nu s^2 + s = omega + q^2/2 + eta sin(omega tau - phi), then
/// delta = beta q^2 - eps a0^2 - mu a0^4 - eta cos(omega tau - phi).
/// The grid is refined until consecutive deltas differ by less than 0.01.
pub fn branch_trace(p: &ModelParams, q: f64, omega_grid: &[f64], branch: BranchTag) -> Branch {
    let eval = |omega: f64| -> Option<BranchPoint> {
        let r = omega + 0.5 * q * q + p.eta * (omega * p.tau - p.phi).sin();
        let (s, _) = trace_roots(p.nu, r, branch)?;
        if s < 0.0 {
            return None;
        }
        let delta = p.beta * q * q - p.epsilon * s - p.mu * s * s
            - p.eta * (omega * p.tau - p.phi).cos();
        Some(BranchPoint {
            omega,
            a0: s.sqrt(),
            delta,
            theta: wrap_angle(omega * p.tau - p.phi + std::f64::consts::PI),
        })
    };

    // Refine the grid until the delta increment condition holds.
    let mut grid: Vec<f64> = omega_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for _ in 0..14 {
        let mut refined = Vec::with_capacity(grid.len() * 2);
        let mut any = false;
        for w in grid.windows(2) {
            refined.push(w[0]);
            if let (Some(p0), Some(p1)) = (eval(w[0]), eval(w[1])) {
                if (p1.delta - p0.delta).abs() >= 0.01 && (w[1] - w[0]) > 1e-12 {
                    refined.push(0.5 * (w[0] + w[1]));
                    any = true;
                }
            }
        }
        if let Some(&last) = grid.last() {
            refined.push(last);
        }
        grid = refined;
        if !any {
            break;
        }
    }

    let mut segments: Vec<Vec<BranchPoint>> = Vec::new();
    let mut current: Vec<BranchPoint> = Vec::new();
    let mut swaps = 0usize;
    let mut prev_s: Option<f64> = None;
    for &omega in &grid {
        match eval(omega) {
            Some(pt) => {
                let s = pt.a0 * pt.a0;
                if let Some(s0) = prev_s {
                    let r = omega + 0.5 * q * q + p.eta * (omega * p.tau - p.phi).sin();
                    if let Some((_, other)) = trace_roots(p.nu, r, branch) {
                        if other >= 0.0 && (other - s0).abs() < (s - s0).abs() {
                            swaps += 1;
                        }
                    }
                }
                prev_s = Some(s);
                current.push(pt);
            }
            None => {
                prev_s = None;
                if !current.is_empty() {
                    segments.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        segments.push(current);
    }

    // Delay-free reference curves, sampled over the amplitude range the
    // branch actually visits (padded a little).
    let a_max = segments
        .iter()
        .flatten()
        .map(|pt| pt.a0)
        .fold(0.0f64, f64::max)
        .max(1e-3)
        * 1.1;
    let m = 301;
    let mut envelope_low = Vec::with_capacity(m);
    let mut envelope_high = Vec::with_capacity(m);
    for i in 0..m {
        let a0 = a_max * i as f64 / (m - 1) as f64;
        let s = a0 * a0;
        let g = p.beta * q * q - p.epsilon * s - p.mu * s * s;
        envelope_low.push((a0, g - p.eta));
        envelope_high.push((a0, g + p.eta));
    }

    Branch {
        q,
        branch_tag: branch,
        segments,
        envelope_low,
        envelope_high,
        swaps,
    }
}
