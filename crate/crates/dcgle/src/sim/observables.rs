//! Trajectory reductions: amplitude statistics, spectral peak, phase-drift
//! frequency estimation, defect counting.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{FieldState, Grid};

/// Time series of the scalar diagnostics recorded along a run.
///
/// `mean_phase` is the spatial-mean phase unwrapped in time; `omega_est` is
/// its finite-difference slope (central where possible), which for a clean
/// rotating wave reads off the frequency at every sample.
#[derive(Debug, Clone, Default)]
pub struct Observables {
    pub t: Vec<f64>,
    pub mean_amp: Vec<f64>,
    pub max_amp: Vec<f64>,
    pub dominant_q: Vec<f64>,
    pub mean_phase: Vec<f64>,
    pub omega_est: Vec<f64>,
    pub defect_count: Vec<usize>,
}

impl Observables {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Incremental builder for [`Observables`]; one FFT plan shared by all
/// samples.
pub(crate) struct ObservableRecorder {
    grid: Grid,
    fft: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    t: Vec<f64>,
    mean_amp: Vec<f64>,
    max_amp: Vec<f64>,
    dominant_q: Vec<f64>,
    mean_phase: Vec<f64>,
    defect_count: Vec<usize>,
    prev_raw_phase: Option<f64>,
}

impl ObservableRecorder {
    pub(crate) fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(grid.n_points());
        Self {
            grid: *grid,
            fft,
            scratch: Vec::with_capacity(grid.n_points()),
            t: Vec::new(),
            mean_amp: Vec::new(),
            max_amp: Vec::new(),
            dominant_q: Vec::new(),
            mean_phase: Vec::new(),
            defect_count: Vec::new(),
            prev_raw_phase: None,
        }
    }

    pub(crate) fn record(&mut self, t: f64, values: &[Complex64]) {
        let n = values.len() as f64;
        let mean = values.iter().map(|v| v.norm()).sum::<f64>() / n;
        let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let (mode, _) = spectral_peak(values, self.fft.as_ref(), &mut self.scratch);
        let raw = mean_unwrapped_phase(values);
        let unwrapped = match self.prev_raw_phase {
            None => raw,
            Some(prev) => self.mean_phase.last().unwrap() + principal(raw - prev),
        };
        self.prev_raw_phase = Some(raw);
        self.t.push(t);
        self.mean_amp.push(mean);
        self.max_amp.push(max);
        self.dominant_q.push(self.grid.wavenumber(mode));
        self.mean_phase.push(unwrapped);
        self.defect_count.push(count_defects(values, mean));
    }

    pub(crate) fn finish(self) -> Observables {
        let omega_est = slope_column(&self.t, &self.mean_phase);
        Observables {
            t: self.t,
            mean_amp: self.mean_amp,
            max_amp: self.max_amp,
            dominant_q: self.dominant_q,
            mean_phase: self.mean_phase,
            omega_est,
            defect_count: self.defect_count,
        }
    }
}

/// Plane-wave readout of a trajectory window, plus the raw figures the
/// accept/reject flag was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanewaveEstimate {
    pub q: f64,
    pub omega: f64,
    pub a0: f64,
    /// True iff the final modulus varies by under 1% of its mean and the
    /// peak spatial mode carries over 99% of the spectral power.
    pub is_planewave: bool,
    pub modulus_variation: f64,
    pub peak_power_fraction: f64,
}

/// Reduces a trajectory window to plane-wave parameters.
///
/// q and a0 come from the final snapshot (spectral peak and mean modulus);
/// omega is the least-squares slope of the time-unwrapped spatial-mean
/// phase, so the window must be sampled densely enough that the phase moves
/// by less than pi between snapshots. A window shorter than two snapshots
/// leaves omega as NaN.
pub fn estimate_planewave(window: &[FieldState], grid: &Grid) -> PlanewaveEstimate {
    let Some(last) = window.last() else {
        return PlanewaveEstimate {
            q: f64::NAN,
            omega: f64::NAN,
            a0: f64::NAN,
            is_planewave: false,
            modulus_variation: f64::NAN,
            peak_power_fraction: f64::NAN,
        };
    };
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(grid.n_points());
    let mut scratch = Vec::with_capacity(grid.n_points());
    let (mode, peak_power_fraction) = spectral_peak(&last.values, fft.as_ref(), &mut scratch);
    let a0 = last.mean_modulus();
    let min = last.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let modulus_variation = if a0 > 0.0 {
        (last.max_modulus() - min) / a0
    } else {
        f64::INFINITY
    };

    let omega = if window.len() < 2 {
        f64::NAN
    } else {
        let mut ts = Vec::with_capacity(window.len());
        let mut phases = Vec::with_capacity(window.len());
        let mut prev_raw = f64::NAN;
        for state in window {
            let raw = mean_unwrapped_phase(&state.values);
            let unwrapped = if phases.is_empty() {
                raw
            } else {
                phases.last().unwrap() + principal(raw - prev_raw)
            };
            prev_raw = raw;
            ts.push(state.t);
            phases.push(unwrapped);
        }
        lsq_slope(&ts, &phases)
    };

    PlanewaveEstimate {
        q: grid.wavenumber(mode),
        omega,
        a0,
        is_planewave: modulus_variation < 0.01 && peak_power_fraction > 0.99,
        modulus_variation,
        peak_power_fraction,
    }
}

/// Signed dominant mode and its share of the total spectral power.
fn spectral_peak(
    values: &[Complex64],
    fft: &dyn Fft<f64>,
    scratch: &mut Vec<Complex64>,
) -> (i64, f64) {
    scratch.clear();
    scratch.extend_from_slice(values);
    fft.process(scratch);
    let n = values.len();
    let mut best = 0usize;
    let mut best_power = -1.0;
    let mut total = 0.0;
    for (m, c) in scratch.iter().enumerate() {
        let power = c.norm_sqr();
        total += power;
        if power > best_power {
            best_power = power;
            best = m;
        }
    }
    let signed = if best <= n / 2 {
        best as i64
    } else {
        best as i64 - n as i64
    };
    let fraction = if total > 0.0 { best_power / total } else { 0.0 };
    (signed, fraction)
}

/// Spatial mean of the phase after unwrapping along x, so a carrier ramp
/// q x contributes a constant instead of sawtooth jumps.
fn mean_unwrapped_phase(values: &[Complex64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut cur = values[0].arg();
    let mut prev_raw = cur;
    let mut sum = cur;
    for v in &values[1..] {
        let raw = v.arg();
        cur += principal(raw - prev_raw);
        prev_raw = raw;
        sum += cur;
    }
    sum / values.len() as f64
}

/// Nearest representative of an angle difference in (-pi, pi].
fn principal(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    x - two_pi * (x / two_pi).round()
}

fn lsq_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let t_mean = t.iter().sum::<f64>() / n;
    let y_mean = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (ti, yi) in t.iter().zip(y) {
        num += (ti - t_mean) * (yi - y_mean);
        den += (ti - t_mean) * (ti - t_mean);
    }
    num / den
}

fn slope_column(t: &[f64], phase: &[f64]) -> Vec<f64> {
    let n = t.len();
    match n {
        0 => Vec::new(),
        1 => vec![f64::NAN],
        _ => (0..n)
            .map(|i| {
                let (a, b) = if i == 0 {
                    (0, 1)
                } else if i == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (i - 1, i + 1)
                };
                (phase[b] - phase[a]) / (t[b] - t[a])
            })
            .collect(),
    }
}

/// Contiguous runs of grid points whose modulus drops below one fifth of
/// the instantaneous mean, merged across the periodic seam.
pub(crate) fn count_defects(values: &[Complex64], mean_amp: f64) -> usize {
    let thr = 0.2 * mean_amp;
    if !(thr > 0.0) || values.is_empty() {
        return 0;
    }
    let n = values.len();
    let below: Vec<bool> = values.iter().map(|v| v.norm() < thr).collect();
    let mut rises = 0usize;
    for j in 0..n {
        let prev = below[(j + n - 1) % n];
        if below[j] && !prev {
            rises += 1;
        }
    }
    if rises == 0 && below[0] {
        1
    } else {
        rises
    }
}
