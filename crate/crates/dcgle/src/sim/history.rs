//! Initial history and the dense-output ring buffer behind the delayed term.

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{FieldState, Grid};
use crate::error::{ModelError, SimError};
use crate::planewave::PlaneWave;

/// Initial disturbance riding on the plane-wave modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    None,
    /// amplitude * cos(k x), so the initial spectrum gains the two side
    /// modes q - k and q + k.
    Modal { k: f64, amplitude: f64 },
    /// Uniform complex noise of the given amplitude, reproducible by seed.
    Noise { amplitude: f64, seed: u64 },
}

/// Separable history (a0 + p(x_j)) e^{i(q x_j + omega t)}: a fixed spatial
/// profile rotating rigidly in time. This covers every supported start
/// (plane wave plus frozen disturbance) and evaluates exactly at any t <= 0.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialHistory {
    profile: Vec<Complex64>,
    omega: f64,
}

impl InitialHistory {
    /// History profile_j * e^{i omega t} from raw parts; `make_initial_history`
    /// is the plane-wave front door.
    pub fn from_parts(profile: Vec<Complex64>, omega: f64) -> Self {
        Self { profile, omega }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n_points(&self) -> usize {
        self.profile.len()
    }

    pub fn state_at(&self, t: f64) -> FieldState {
        let mut values = vec![Complex64::new(0.0, 0.0); self.profile.len()];
        self.eval_into(t, &mut values);
        FieldState::new(t, values)
    }

    pub(crate) fn eval_into(&self, t: f64, out: &mut [Complex64]) {
        let rot = Complex64::from_polar(1.0, self.omega * t);
        for (o, &p) in out.iter_mut().zip(&self.profile) {
            *o = p * rot;
        }
    }
}

/// Builds the history function on t <= 0 for a plane-wave start.
///
/// `history(t, x_j) = (a0 + p(x_j)) e^{i(q x_j + omega t)}` with `p` given by
/// the perturbation. Both the carrier q and a modal disturbance wavenumber
/// must fit the periodic grid.
pub fn make_initial_history(
    grid: &Grid,
    pw: &PlaneWave,
    perturbation: Perturbation,
) -> Result<InitialHistory, SimError> {
    grid.mode_of(pw.q)?;
    let n = grid.n_points();
    let mut bump = vec![Complex64::new(0.0, 0.0); n];
    match perturbation {
        Perturbation::None => {}
        Perturbation::Modal { k, amplitude } => {
            require_nonneg(amplitude)?;
            grid.mode_of(k)?;
            for (j, b) in bump.iter_mut().enumerate() {
                *b = Complex64::new(amplitude * (k * grid.x(j)).cos(), 0.0);
            }
        }
        Perturbation::Noise { amplitude, seed } => {
            require_nonneg(amplitude)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for b in bump.iter_mut() {
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                *b = amplitude * Complex64::new(re, im);
            }
        }
    }
    let profile = bump
        .iter()
        .enumerate()
        .map(|(j, &p)| (pw.a0 + p) * Complex64::from_polar(1.0, pw.q * grid.x(j)))
        .collect();
    Ok(InitialHistory::from_parts(profile, pw.omega))
}

fn require_nonneg(amplitude: f64) -> Result<(), SimError> {
    if amplitude < 0.0 || !amplitude.is_finite() {
        return Err(ModelError::InvalidParameter {
            name: "amplitude",
            value: amplitude,
            reason: "perturbation amplitude must be nonnegative",
        }
        .into());
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Node {
    t: f64,
    y: Vec<Complex64>,
    f: Vec<Complex64>,
}

/// Ring of accepted steps (t_i, state, derivative) with cubic Hermite dense
/// output, backed by the analytic initial history for queries at or before
/// the start time.
///
/// Nodes older than `span` behind the newest are dropped as new steps land,
/// keeping one node at or before every reachable query time, so memory stays
/// O(span / min step). Interpolation error is O(h^4) in the step size.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    initial: InitialHistory,
    t_start: f64,
    span: f64,
    nodes: VecDeque<Node>,
}

impl HistoryBuffer {
    pub fn new(initial: InitialHistory, t_start: f64, span: f64) -> Self {
        Self {
            initial,
            t_start,
            span,
            nodes: VecDeque::new(),
        }
    }

    pub fn interpolation_order(&self) -> usize {
        4
    }

    pub fn latest_t(&self) -> f64 {
        self.nodes.back().map_or(self.t_start, |n| n.t)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Appends an accepted step. The first node must sit exactly at the
    /// start time (so stepped history begins where the analytic history
    /// ends); later times must be strictly increasing.
    pub fn push(&mut self, t: f64, y: Vec<Complex64>, f: Vec<Complex64>) {
        debug_assert!(if self.nodes.is_empty() {
            t == self.t_start
        } else {
            t > self.latest_t()
        });
        self.nodes.push_back(Node { t, y, f });
        // The slack keeps queries computed as t - span safe from rounding:
        // a node a hair older than the horizon must survive the prune.
        let slack = 1e-9 * (1.0 + self.latest_t().abs());
        let horizon = self.latest_t() - self.span - slack;
        while self.nodes.len() > 1 && self.nodes[1].t <= horizon {
            self.nodes.pop_front();
        }
    }

    /// Field at time `t`, cubic Hermite between the bracketing accepted
    /// steps. Queries at or before the start time hit the analytic history;
    /// queries past the newest node are a caller bug (the step-size cap is
    /// what rules them out) and panic.
    pub fn eval_into(&self, t: f64, out: &mut [Complex64]) {
        if t <= self.t_start {
            self.initial.eval_into(t, out);
            return;
        }
        assert!(
            t <= self.latest_t() + 1e-9,
            "history queried at t={t} beyond newest accepted step {}",
            self.latest_t()
        );
        // First node with node.t >= t; its predecessor starts the bracket.
        let hi = self.nodes.partition_point(|n| n.t < t);
        if hi == 0 {
            // Undershooting the oldest kept node is rounding noise in a
            // query computed as t - span; anything larger is a caller bug.
            let front = &self.nodes[0];
            assert!(
                front.t - t < 1e-6 * (1.0 + t.abs()),
                "history queried at t={t}, older than the retained span starting {}",
                front.t
            );
            out.copy_from_slice(&front.y);
            return;
        }
        if hi == self.nodes.len() {
            // within the 1e-9 slack past the newest node
            out.copy_from_slice(&self.nodes[hi - 1].y);
            return;
        }
        let b = &self.nodes[hi];
        let a = &self.nodes[hi - 1];
        let h = b.t - a.t;
        let s = ((t - a.t) / h).clamp(0.0, 1.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        for (j, o) in out.iter_mut().enumerate() {
            *o = h00 * a.y[j] + h01 * b.y[j] + h * (h10 * a.f[j] + h11 * b.f[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n: usize) -> Grid {
        Grid::new(n, 32.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn plane_wave_history_rotates_rigidly() {
        let g = unit_grid(64);
        let pw = PlaneWave::new(1.0, 0.7, 1.3);
        let h = make_initial_history(&g, &pw, Perturbation::None).unwrap();
        let s = h.state_at(-2.5);
        for (j, v) in s.values.iter().enumerate() {
            let want = 1.3 * Complex64::from_polar(1.0, g.x(j) + 0.7 * (-2.5));
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn incommensurate_carrier_is_rejected() {
        let g = unit_grid(64);
        let pw = PlaneWave::new(0.3, 1.0, 1.0);
        assert!(matches!(
            make_initial_history(&g, &pw, Perturbation::None),
            Err(SimError::InadmissibleWavenumber { .. })
        ));
    }

    #[test]
    fn modal_bump_adds_exactly_two_side_modes() {
        let g = unit_grid(64);
        let pw = PlaneWave::new(1.0, 0.5, 1.0);
        let k = g.wavenumber(1);
        let h = make_initial_history(
            &g,
            &pw,
            Perturbation::Modal {
                k,
                amplitude: 1e-3,
            },
        )
        .unwrap();
        let vals = h.state_at(0.0).values;
        let n = vals.len();
        let mut planner = rustfft::FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let mut buf = vals.clone();
        fft.process(&mut buf);
        let carrier = 16usize;
        for (m, c) in buf.iter().enumerate() {
            let expected = m == carrier || m == carrier - 1 || m == carrier + 1;
            if expected {
                assert!(c.norm() > 1e-6 * n as f64);
            } else {
                assert!(c.norm() < 1e-12 * n as f64, "leak at mode {m}");
            }
        }
    }

    #[test]
    fn noise_is_reproducible_by_seed() {
        let g = unit_grid(32);
        let pw = PlaneWave::new(0.0, 1.0, 1.0);
        let mk = |seed| {
            make_initial_history(
                &g,
                &pw,
                Perturbation::Noise {
                    amplitude: 1e-3,
                    seed,
                },
            )
            .unwrap()
            .state_at(0.0)
            .values
        };
        assert_eq!(mk(1), mk(1));
        assert_ne!(mk(1), mk(2));
    }

    #[test]
    fn negative_amplitude_is_rejected() {
        let g = unit_grid(32);
        let pw = PlaneWave::new(0.0, 1.0, 1.0);
        assert!(make_initial_history(
            &g,
            &pw,
            Perturbation::Modal {
                k: 0.0,
                amplitude: -1.0
            }
        )
        .is_err());
    }

    #[test]
    fn hermite_interpolation_is_fourth_order() {
        // Scalar test signal y(t) = e^{2it}; halving the node spacing must
        // shrink the midpoint error by about 2^4.
        let omega = 2.0;
        let err_at = |dt: f64| {
            let initial = InitialHistory::from_parts(vec![Complex64::new(1.0, 0.0)], omega);
            let mut buf = HistoryBuffer::new(initial, 0.0, f64::INFINITY);
            for i in 0..=40 {
                let t = i as f64 * dt;
                let y = Complex64::from_polar(1.0, omega * t);
                let f = Complex64::new(0.0, omega) * y;
                buf.push(t, vec![y], vec![f]);
            }
            let mut worst = 0.0f64;
            let mut out = [Complex64::new(0.0, 0.0)];
            for i in 0..40 {
                let t = (i as f64 + 0.5) * dt;
                buf.eval_into(t, &mut out);
                let want = Complex64::from_polar(1.0, omega * t);
                worst = worst.max((out[0] - want).norm());
            }
            worst
        };
        let coarse = err_at(0.2);
        let fine = err_at(0.1);
        let ratio = coarse / fine;
        assert!(coarse < 1e-3);
        assert!((11.0..22.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn queries_before_start_use_the_analytic_history() {
        let g = unit_grid(32);
        let pw = PlaneWave::new(0.0, 0.9, 1.1);
        let initial = make_initial_history(&g, &pw, Perturbation::None).unwrap();
        let buf = HistoryBuffer::new(initial.clone(), 0.0, 5.0);
        let mut out = vec![Complex64::new(0.0, 0.0); 32];
        buf.eval_into(-3.7, &mut out);
        assert_eq!(out, initial.state_at(-3.7).values);
    }

    #[test]
    fn old_nodes_are_pruned_but_coverage_survives() {
        let initial = InitialHistory::from_parts(vec![Complex64::new(1.0, 0.0)], 0.0);
        let mut buf = HistoryBuffer::new(initial, 0.0, 1.0);
        let dt = 0.01;
        for i in 0..=1000 {
            let t = i as f64 * dt;
            buf.push(
                t,
                vec![Complex64::new(t, 0.0)],
                vec![Complex64::new(1.0, 0.0)],
            );
        }
        // span/dt nodes plus slack, far below the thousand pushed
        assert!(buf.node_count() < 120, "kept {}", buf.node_count());
        let mut out = [Complex64::new(0.0, 0.0)];
        let t_query = 10.0 - 1.0;
        buf.eval_into(t_query, &mut out);
        assert!((out[0].re - t_query).abs() < 1e-12);
    }
}
