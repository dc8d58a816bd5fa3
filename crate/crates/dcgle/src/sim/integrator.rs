//! Embedded Cash-Karp 5(4) stepping of the semi-discrete delay system.

use num_complex::Complex64;

use super::grid::{FieldState, Grid};
use super::history::{HistoryBuffer, InitialHistory};
use super::observables::{ObservableRecorder, Observables};
use crate::error::{ModelError, SimError};
use crate::params::ModelParams;

const STAGE_OFFSETS: [f64; 6] = [0.0, 0.2, 0.3, 0.6, 1.0, 0.875];
const COUPLINGS: [&[f64]; 6] = [
    &[],
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0],
    &[-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0],
    &[
        1631.0 / 55296.0,
        175.0 / 512.0,
        575.0 / 13824.0,
        44275.0 / 110592.0,
        253.0 / 4096.0,
    ],
];
const WEIGHTS_5TH: [f64; 6] = [
    37.0 / 378.0,
    0.0,
    250.0 / 621.0,
    125.0 / 594.0,
    0.0,
    512.0 / 1771.0,
];
const WEIGHTS_4TH: [f64; 6] = [
    2825.0 / 27648.0,
    0.0,
    18575.0 / 48384.0,
    13525.0 / 55296.0,
    277.0 / 14336.0,
    1.0 / 4.0,
];

/// Semi-discrete right-hand side: three-point periodic Laplacian plus the
/// pointwise nonlinearity and the delayed feedback term.
pub fn rhs(
    state: &FieldState,
    delayed: &FieldState,
    params: &ModelParams,
    grid: &Grid,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); state.values.len()];
    rhs_into(&state.values, &delayed.values, params, grid, &mut out);
    out
}

pub(crate) fn rhs_into(
    a: &[Complex64],
    delayed: &[Complex64],
    p: &ModelParams,
    grid: &Grid,
    out: &mut [Complex64],
) {
    let n = a.len();
    let h = grid.spacing();
    let diff = Complex64::new(p.beta, 0.5) / (h * h);
    let gain = Complex64::new(p.delta, 0.0);
    let cubic = Complex64::new(p.epsilon, 1.0);
    let quintic = Complex64::new(p.mu, p.nu);
    let feedback = Complex64::from_polar(p.eta, p.phi);
    let quintic_on = !p.is_cubic();
    let feedback_on = p.eta != 0.0;
    for j in 0..n {
        let left = a[if j == 0 { n - 1 } else { j - 1 }];
        let right = a[if j + 1 == n { 0 } else { j + 1 }];
        let aj = a[j];
        let s = aj.norm_sqr();
        let mut nl = gain + cubic * s;
        if quintic_on {
            nl += quintic * (s * s);
        }
        let mut d = diff * (left - 2.0 * aj + right) + nl * aj;
        if feedback_on {
            d += feedback * delayed[j];
        }
        out[j] = d;
    }
}

/// Knobs for [`integrate_with`]; [`integrate`] is the positional shorthand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Keep a full field snapshot every so many time units (the start and
    /// final states are always kept).
    pub snapshot_every: Option<f64>,
    /// Observable cadence; `None` records at every accepted step.
    pub observe_every: Option<f64>,
    /// Disables adaptivity and steps at exactly this size; convergence-order
    /// harness, not for production runs.
    pub fixed_step: Option<f64>,
}

impl IntegrateOptions {
    pub fn new(t_end: f64) -> Self {
        Self {
            t_end,
            rtol: 1e-6,
            atol: 1e-9,
            snapshot_every: None,
            observe_every: None,
            fixed_step: None,
        }
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_snapshots_every(mut self, dt: f64) -> Self {
        self.snapshot_every = Some(dt);
        self
    }

    pub fn with_observables_every(mut self, dt: f64) -> Self {
        self.observe_every = Some(dt);
        self
    }

    pub fn with_fixed_step(mut self, h: f64) -> Self {
        self.fixed_step = Some(h);
        self
    }
}

/// Everything an integration run produces.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub snapshots: Vec<FieldState>,
    pub observables: Observables,
    pub final_state: FieldState,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Set when stepping aborted early (step-size underflow or a non-finite
    /// field); the fields above hold everything up to the last good step.
    pub failure: Option<SimError>,
}

pub fn integrate(
    params: &ModelParams,
    grid: &Grid,
    history: &InitialHistory,
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<SimOutput, SimError> {
    integrate_with(
        params,
        grid,
        history,
        &IntegrateOptions::new(t_end).with_tolerances(rtol, atol),
    )
}

/// Integrates the method-of-lines system from t = 0 to `opts.t_end`.
///
/// Steps are capped at tau/2 so delayed queries always land in completed
/// history, evaluated by cubic Hermite interpolation on accepted steps.
/// Acceptance uses the mixed error norm max_j |err_j| / (atol + rtol |A_j|)
/// <= 1 and the next step is scaled by 0.9 err^(-1/5), clamped to [0.2, 5].
///
/// Unlike the closed-form layers this path also accepts beta = 0: the pure
/// dispersion limit is a legitimate integration target (norm-conservation
/// checks) even though the analysis formulas exclude it.
pub fn integrate_with(
    params: &ModelParams,
    grid: &Grid,
    history: &InitialHistory,
    opts: &IntegrateOptions,
) -> Result<SimOutput, SimError> {
    validate_for_sim(params)?;
    if history.n_points() != grid.n_points() {
        return Err(ModelError::InvalidParameter {
            name: "history",
            value: history.n_points() as f64,
            reason: "history profile length does not match the grid",
        }
        .into());
    }
    if !(opts.t_end > 0.0) || !opts.t_end.is_finite() {
        return Err(ModelError::InvalidParameter {
            name: "t_end",
            value: opts.t_end,
            reason: "integration horizon must be positive",
        }
        .into());
    }
    for (name, v) in [("rtol", opts.rtol), ("atol", opts.atol)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(ModelError::InvalidParameter {
                name,
                value: v,
                reason: "tolerances must be positive",
            }
            .into());
        }
    }
    if let Some(hf) = opts.fixed_step {
        if !(hf > 0.0) || !hf.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "fixed_step",
                value: hf,
                reason: "forced step must be positive",
            }
            .into());
        }
    }

    let n = grid.n_points();
    let tau = params.tau;
    let uses_delay = params.eta != 0.0 && tau > 0.0;
    let step_cap = if uses_delay { 0.5 * tau } else { f64::INFINITY };
    let t_end = opts.t_end;
    let end_slack = 1e-12 * t_end;

    let mut t = 0.0;
    let mut y = history.state_at(0.0).values;
    let mut buffer = if uses_delay {
        Some(HistoryBuffer::new(history.clone(), 0.0, tau))
    } else {
        None
    };

    let mut stages = vec![vec![Complex64::new(0.0, 0.0); n]; 6];
    let mut ytmp = vec![Complex64::new(0.0, 0.0); n];
    let mut delayed = vec![Complex64::new(0.0, 0.0); n];
    let mut y_new = vec![Complex64::new(0.0, 0.0); n];
    let mut f_cur = vec![Complex64::new(0.0, 0.0); n];

    if let Some(buf) = &buffer {
        buf.eval_into(t - tau, &mut delayed);
        rhs_into(&y, &delayed, params, grid, &mut f_cur);
    } else {
        rhs_into(&y, &y, params, grid, &mut f_cur);
    }
    if let Some(buf) = &mut buffer {
        buf.push(t, y.clone(), f_cur.clone());
    }

    let mut recorder = ObservableRecorder::new(grid);
    recorder.record(t, &y);
    let mut last_recorded = t;
    let mut next_observe = opts.observe_every.unwrap_or(f64::INFINITY);
    let mut snapshots = vec![FieldState::new(t, y.clone())];
    let mut next_snapshot = opts.snapshot_every.unwrap_or(f64::INFINITY);

    let f_scale = f_cur.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut h = match opts.fixed_step {
        Some(hf) => hf,
        None => (0.1 / (1.0 + f_scale)).min(step_cap).min(t_end),
    };

    let mut failure = None;
    let mut steps_accepted = 0usize;
    let mut steps_rejected = 0usize;

    while t < t_end - end_slack {
        let h_use = h.min(step_cap).min(t_end - t);
        if h_use < 1e-12 * t_end {
            failure = Some(SimError::StepSizeUnderflow { t, h: h_use });
            break;
        }

        stages[0].copy_from_slice(&f_cur);
        for i in 1..6 {
            let (done, rest) = stages.split_at_mut(i);
            let row = COUPLINGS[i];
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (l, &w) in row.iter().enumerate() {
                    acc += w * done[l][j];
                }
                ytmp[j] = y[j] + h_use * acc;
            }
            let ts = t + STAGE_OFFSETS[i] * h_use;
            if let Some(buf) = &buffer {
                buf.eval_into(ts - tau, &mut delayed);
                rhs_into(&ytmp, &delayed, params, grid, &mut rest[0]);
            } else {
                rhs_into(&ytmp, &ytmp, params, grid, &mut rest[0]);
            }
        }

        let mut err_max = 0.0f64;
        let mut finite = true;
        for j in 0..n {
            let mut acc5 = Complex64::new(0.0, 0.0);
            let mut acc_err = Complex64::new(0.0, 0.0);
            for i in 0..6 {
                acc5 += WEIGHTS_5TH[i] * stages[i][j];
                acc_err += (WEIGHTS_5TH[i] - WEIGHTS_4TH[i]) * stages[i][j];
            }
            let ynj = y[j] + h_use * acc5;
            y_new[j] = ynj;
            let scale = opts.atol + opts.rtol * y[j].norm().max(ynj.norm());
            err_max = err_max.max((h_use * acc_err).norm() / scale);
            finite &= ynj.re.is_finite() && ynj.im.is_finite();
        }
        if !finite || !err_max.is_finite() {
            failure = Some(SimError::NonFiniteField { t: t + h_use });
            break;
        }

        let accept = opts.fixed_step.is_some() || err_max <= 1.0;
        if opts.fixed_step.is_none() {
            let fac = (0.9 * err_max.powf(-0.2)).clamp(0.2, 5.0);
            h = h_use * fac;
        }
        if !accept {
            steps_rejected += 1;
            continue;
        }
        steps_accepted += 1;
        t += h_use;
        std::mem::swap(&mut y, &mut y_new);

        if let Some(buf) = &buffer {
            buf.eval_into(t - tau, &mut delayed);
            rhs_into(&y, &delayed, params, grid, &mut f_cur);
        } else {
            rhs_into(&y, &y, params, grid, &mut f_cur);
        }
        if let Some(buf) = &mut buffer {
            buf.push(t, y.clone(), f_cur.clone());
        }

        if opts.observe_every.is_none() || t >= next_observe - end_slack {
            recorder.record(t, &y);
            last_recorded = t;
            while next_observe <= t + end_slack {
                next_observe += opts.observe_every.unwrap_or(f64::INFINITY);
            }
        }
        if t >= next_snapshot - end_slack {
            snapshots.push(FieldState::new(t, y.clone()));
            while next_snapshot <= t + end_slack {
                next_snapshot += opts.snapshot_every.unwrap_or(f64::INFINITY);
            }
        }
    }

    if last_recorded < t - end_slack {
        recorder.record(t, &y);
    }
    if snapshots.last().map(|s| s.t) != Some(t) {
        snapshots.push(FieldState::new(t, y.clone()));
    }
    Ok(SimOutput {
        snapshots,
        observables: recorder.finish(),
        final_state: FieldState::new(t, y),
        steps_accepted,
        steps_rejected,
        failure,
    })
}

/// The integrator's own domain check: the dispersive edge beta = 0 is
/// allowed here, the closed-form layers keep requiring beta > 0.
fn validate_for_sim(p: &ModelParams) -> Result<(), SimError> {
    if !(p.beta >= 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "beta",
            value: p.beta,
            reason: "diffusion coefficient must be nonnegative in the integrator",
        }
        .into());
    }
    let probe = ModelParams {
        beta: p.beta.max(f64::MIN_POSITIVE),
        ..*p
    };
    probe.validate()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::existence::{default_omega_range, find_planewaves};
    use crate::planewave::PlaneWave;
    use crate::sim::history::{make_initial_history, Perturbation};

    fn zero_field(n: usize) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); n]
    }

    #[test]
    fn uniform_state_reduces_to_pointwise_nonlinearity() {
        let p = ModelParams::quintic_defaults().with_delta(0.3);
        let g = Grid::new(32, 10.0).unwrap();
        let c = Complex64::new(0.4, -0.7);
        let state = FieldState::new(0.0, vec![c; 32]);
        let out = rhs(&state, &state, &p, &g);
        let s = c.norm_sqr();
        let want = (Complex64::new(p.delta, 0.0)
            + Complex64::new(p.epsilon, 1.0) * s
            + Complex64::new(p.mu, p.nu) * (s * s))
            * c;
        for v in out {
            assert!((v - want).norm() < 1e-15);
        }
    }

    #[test]
    fn discrete_plane_wave_sees_the_grid_dispersion() {
        let p = ModelParams::quintic_defaults().with_delta(0.1);
        let g = Grid::default();
        let q = 1.0;
        let a0 = 0.8;
        let values: Vec<Complex64> = (0..g.n_points())
            .map(|j| a0 * Complex64::from_polar(1.0, q * g.x(j)))
            .collect();
        let state = FieldState::new(0.0, values.clone());
        let out = rhs(&state, &state, &p, &g);
        let sigma = g.discrete_dispersion(q);
        let s = a0 * a0;
        let factor = Complex64::new(p.beta, 0.5) * (-sigma)
            + Complex64::new(p.delta, 0.0)
            + Complex64::new(p.epsilon, 1.0) * s
            + Complex64::new(p.mu, p.nu) * (s * s);
        for (v, a) in out.iter().zip(&values) {
            assert!((v - factor * a).norm() < 1e-12);
        }
    }

    #[test]
    fn feedback_contribution_is_exactly_linear_in_gain() {
        // Dyadic fixture so every float operation is exact and the identity
        // rhs(2 eta) - rhs(0) = 2 (rhs(eta) - rhs(0)) holds bitwise.
        let g = Grid::new(16, 16.0).unwrap();
        let mk = |eta: f64| ModelParams {
            beta: 0.5,
            delta: 0.25,
            epsilon: 1.0,
            mu: -1.0,
            nu: -0.25,
            eta,
            phi: 0.0,
            tau: 1.0,
        };
        let state = FieldState::new(
            0.0,
            (0..16)
                .map(|j| Complex64::new(j as f64 / 8.0, ((j * 3) % 5) as f64 / 4.0))
                .collect(),
        );
        let delayed = FieldState::new(
            -1.0,
            (0..16)
                .map(|j| Complex64::new(((j * 7) % 9) as f64 / 8.0, -(j as f64) / 16.0))
                .collect(),
        );
        let r0 = rhs(&state, &delayed, &mk(0.0), &g);
        let r1 = rhs(&state, &delayed, &mk(0.25), &g);
        let r2 = rhs(&state, &delayed, &mk(0.5), &g);
        for j in 0..16 {
            assert_eq!(r2[j] - r0[j], (r1[j] - r0[j]) * 2.0);
        }
    }

    #[test]
    fn forced_step_halving_shows_fifth_order() {
        // O(1) amplitudes so truncation error sits far above round-off.
        let p = ModelParams::quintic_defaults().with_delta(0.5);
        let g = Grid::new(32, 32.0 * std::f64::consts::PI).unwrap();
        let pw = PlaneWave::new(0.0, 0.0, 0.8);
        let hist = make_initial_history(
            &g,
            &pw,
            Perturbation::Modal {
                k: g.wavenumber(2),
                amplitude: 0.4,
            },
        )
        .unwrap();
        let run = |hstep: f64| {
            integrate_with(
                &p,
                &g,
                &hist,
                &IntegrateOptions::new(2.0).with_fixed_step(hstep),
            )
            .unwrap()
            .final_state
        };
        let reference = run(0.003125);
        let err = |state: &FieldState| {
            state
                .values
                .iter()
                .zip(&reference.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        let coarse = err(&run(0.1));
        let fine = err(&run(0.05));
        let ratio = coarse / fine;
        assert!(coarse > 1e-10, "coarse error {coarse} too close to round-off");
        assert!(coarse < 1e-3, "coarse error {coarse}");
        assert!((20.0..48.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn adaptive_error_tracks_the_tolerance() {
        let p = ModelParams::quintic_defaults().with_delta(0.5);
        let g = Grid::new(32, 32.0 * std::f64::consts::PI).unwrap();
        let pw = PlaneWave::new(0.0, 0.0, 0.8);
        let hist = make_initial_history(
            &g,
            &pw,
            Perturbation::Modal {
                k: g.wavenumber(2),
                amplitude: 0.4,
            },
        )
        .unwrap();
        let run = |rtol: f64| {
            integrate(&p, &g, &hist, 5.0, rtol, rtol * 1e-3)
                .unwrap()
                .final_state
        };
        let reference = run(1e-12);
        let err = |state: &FieldState| {
            state
                .values
                .iter()
                .zip(&reference.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        let loose = err(&run(1e-5));
        let tight = err(&run(1e-8));
        assert!(tight < loose, "loose {loose} tight {tight}");
        assert!(tight < 1e-6, "tight {tight}");
        assert!(loose / tight > 5.0, "ratio {}", loose / tight);
    }

    #[test]
    fn pure_dispersion_conserves_the_l2_norm() {
        // beta = 0 with every other coefficient zero leaves i/2 A_xx: the
        // three-point operator is skew-Hermitian, so the semi-discrete norm
        // is exact and any drift is integrator error.
        let p = ModelParams {
            beta: 0.0,
            delta: 0.0,
            epsilon: 0.0,
            mu: 0.0,
            nu: 0.0,
            eta: 0.0,
            phi: 0.0,
            tau: 0.0,
        };
        let g = Grid::new(64, 32.0 * std::f64::consts::PI).unwrap();
        let pw = PlaneWave::new(0.0, 0.0, 0.5);
        let hist = make_initial_history(
            &g,
            &pw,
            Perturbation::Modal {
                k: g.wavenumber(3),
                amplitude: 0.25,
            },
        )
        .unwrap();
        let out = integrate(&p, &g, &hist, 5.0, 1e-9, 1e-12).unwrap();
        assert!(out.failure.is_none());
        let n0 = hist.state_at(0.0).l2_norm(&g);
        let n1 = out.final_state.l2_norm(&g);
        assert!((n1 - n0).abs() / n0 < 1e-7, "drift {}", (n1 - n0).abs() / n0);
    }

    #[test]
    fn stable_wave_holds_its_modulus_over_ten_delays() {
        let p = ModelParams::quintic_defaults()
            .with_delta(0.4)
            .with_feedback(0.2, 0.0, 20.0);
        let found = find_planewaves(&p, 0.0, default_omega_range(&p, 0.0));
        let pw = found
            .waves
            .iter()
            .find(|w| (w.omega - 0.998).abs() < 0.05 && (w.a0 - 1.166).abs() < 0.05)
            .copied()
            .expect("documented stable wave not found");
        let g = Grid::default();
        let hist = make_initial_history(&g, &pw, Perturbation::None).unwrap();
        let out = integrate_with(
            &p,
            &g,
            &hist,
            &IntegrateOptions::new(10.0 * p.tau).with_observables_every(5.0),
        )
        .unwrap();
        assert!(out.failure.is_none());
        let drift = (out.final_state.mean_modulus() - pw.a0).abs() / pw.a0;
        assert!(drift < 1e-4, "drift {drift}");
    }

    #[test]
    fn instantaneous_feedback_keeps_its_exact_wave() {
        // tau = 0 turns the feedback into an instantaneous term; the wave
        // satisfying the closure with theta = pi - phi must persist.
        let p = ModelParams::quintic_defaults()
            .with_delta(0.3)
            .with_feedback(0.2, 0.0, 0.0);
        let s = {
            // 0 = delta + eps*s + mu*s^2 + eta*cos(phi) at q=0, larger root
            let c = p.delta + p.eta;
            let disc = (p.epsilon * p.epsilon - 4.0 * p.mu * c).sqrt();
            (-p.epsilon - disc) / (2.0 * p.mu)
        };
        let omega = s + p.nu * s * s;
        let pw = PlaneWave::new(0.0, omega, s.sqrt());
        let g = Grid::new(64, 32.0 * std::f64::consts::PI).unwrap();
        let hist = make_initial_history(&g, &pw, Perturbation::None).unwrap();
        let out = integrate(&p, &g, &hist, 20.0, 1e-8, 1e-11).unwrap();
        assert!(out.failure.is_none());
        let drift = (out.final_state.mean_modulus() - pw.a0).abs() / pw.a0;
        assert!(drift < 1e-5, "drift {drift}");
    }

    #[test]
    fn blowup_aborts_with_last_good_state() {
        // Destabilizing quintic sign produces finite-time blowup.
        let p = ModelParams {
            mu: 1.0,
            nu: 0.0,
            ..ModelParams::quintic_defaults().with_delta(1.0)
        };
        let g = Grid::new(32, 10.0).unwrap();
        let pw = PlaneWave::new(0.0, 0.0, 2.0);
        let hist = make_initial_history(&g, &pw, Perturbation::None).unwrap();
        let out = integrate(&p, &g, &hist, 50.0, 1e-6, 1e-9).unwrap();
        let fail = out.failure.expect("blowup must be reported");
        assert!(matches!(
            fail,
            SimError::NonFiniteField { .. } | SimError::StepSizeUnderflow { .. }
        ));
        assert!(out.final_state.is_finite());
        assert!(out.final_state.t < 50.0);
        assert_eq!(out.snapshots.last().unwrap().t, out.final_state.t);
    }

    #[test]
    fn step_cap_respects_the_delay() {
        let p = ModelParams::quintic_defaults()
            .with_delta(0.4)
            .with_feedback(0.2, 0.0, 0.5);
        let found = find_planewaves(&p, 0.0, default_omega_range(&p, 0.0));
        let pw = found.waves.first().copied().expect("no wave at tau=0.5");
        let g = Grid::new(32, 32.0 * std::f64::consts::PI).unwrap();
        let hist = make_initial_history(&g, &pw, Perturbation::None).unwrap();
        let out = integrate(&p, &g, &hist, 5.0, 1e-6, 1e-9).unwrap();
        assert!(out.failure.is_none());
        // 5.0 / (tau/2) = 20 steps minimum
        assert!(out.steps_accepted >= 20);
    }

    #[test]
    fn rejects_bad_options() {
        let p = ModelParams::quintic_defaults();
        let g = Grid::new(32, 10.0).unwrap();
        let hist = InitialHistory::from_parts(zero_field(32), 0.0);
        assert!(integrate(&p, &g, &hist, -1.0, 1e-6, 1e-9).is_err());
        assert!(integrate(&p, &g, &hist, 1.0, 0.0, 1e-9).is_err());
        let short = InitialHistory::from_parts(zero_field(16), 0.0);
        assert!(integrate(&p, &g, &short, 1.0, 1e-6, 1e-9).is_err());
    }
}
