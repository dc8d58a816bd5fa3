//! Scenario runners: one parsed configuration in, CSV artifacts on disk out.
//!
//! Every runner resolves the scan defaults it is documented with, computes
//! its tables, and hands them back to [`run_scenario`], which writes each
//! table, a metadata sidecar carrying the fully resolved configuration, and
//! (unless `plots = false`) a matplotlib script per table. Identical
//! configurations produce byte-identical CSV data; grid scans parallelize
//! over nodes without affecting row order.
//!
//! Default grids keep every scenario under a few minutes on a laptop; the
//! one intentional exception is `simulate` with a long horizon, whose wall
//! time is recorded in the sidecar.

use std::f64::consts::PI;
use std::fs;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{ConfigError, ModelError, ScenarioError, SimError};
use crate::existence::{
    amplitude_branch, branch_trace, default_omega_range, find_planewaves, principal_branch,
};
use crate::planewave::{planewave_from_theta, BranchTag, PlaneWave};
use crate::sim::{integrate_with, make_initial_history, Grid, IntegrateOptions, Perturbation};
use crate::stability::{
    certify_window, rightmost_root, stability_map_with, strong_sup, weak_sup,
    CharacteristicSystem,
};
use crate::trivial::{classify_trivial, hopf_curve, trivial_gamma};

use super::config::{serialize_config, PerturbationKind, RangeSpec, ScenarioConfig};
use super::csv_out::{Cell, CsvArtifact, Metadata};
use super::plot::{emit_plot_script, figure_tag_for};

/// Growth rates this close to zero count as marginal rather than unstable.
const CLASS_TOL: f64 = 1e-8;

struct ScenarioOutput {
    resolved: ScenarioConfig,
    artifacts: Vec<CsvArtifact>,
    notes: Vec<String>,
    /// An integration abort that still produced partial artifacts; recorded
    /// as FAILED in the sidecars and re-raised after flushing.
    soft_failure: Option<SimError>,
}

impl ScenarioOutput {
    fn new(resolved: ScenarioConfig) -> Self {
        Self {
            resolved,
            artifacts: Vec::new(),
            notes: Vec::new(),
            soft_failure: None,
        }
    }
}

/// Run the configured scenario and write its artifacts under `cfg.out_dir`.
///
/// On success the artifacts are also returned in memory. A simulation that
/// aborts mid-run still flushes everything it produced, with a FAILED status
/// in the sidecars, before the error is returned.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<CsvArtifact>, ScenarioError> {
    let started = Instant::now();
    let mut out = dispatch(cfg)?;
    if cfg.certify_roots && cfg.scenario != "pw-stability-finite" {
        out.notes
            .push("certify_roots only affects the pw-stability-finite scenario".to_string());
    }
    let mut meta = Metadata::new(serialize_config(&out.resolved));
    meta.wall_time = started.elapsed();
    meta.notes = out.notes;
    meta.failed = out.soft_failure.as_ref().map(|e| e.to_string());
    for artifact in &out.artifacts {
        artifact.write(&cfg.out_dir, &meta)?;
        if cfg.plots {
            if let Some(tag) = figure_tag_for(&artifact.name) {
                let script = emit_plot_script(artifact, tag)?;
                let path = cfg.out_dir.join(format!("{}_plot.py", artifact.name));
                fs::write(path, script)?;
            }
        }
    }
    match out.soft_failure {
        Some(e) => Err(e.into()),
        None => Ok(out.artifacts),
    }
}

fn dispatch(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    match cfg.scenario.as_str() {
        "hopf-curves" => run_hopf_curves(cfg),
        "trivial-dispersion" => run_trivial_dispersion(cfg),
        "trivial-regions" => run_trivial_regions(cfg),
        "pw-roots" => run_pw_roots(cfg),
        "pw-branch" => run_pw_branch(cfg),
        "pw-stability-finite" => run_pw_stability_finite(cfg),
        "pw-strong-map" => run_value_map(cfg, MapKind::Strong),
        "pw-weak-map" => run_value_map(cfg, MapKind::Weak),
        "pw-class-map" => run_class_map(cfg),
        "simulate" => run_simulate(cfg),
        other => Err(ConfigError::Range {
            key: "scenario".to_string(),
            message: format!("'{other}' is not a scenario"),
        }
        .into()),
    }
}

fn node_failed(scenario: &str, node: String, source: ScenarioError) -> ScenarioError {
    ScenarioError::NodeFailed {
        scenario: scenario.to_string(),
        node,
        source: Box::new(source),
    }
}

/// Critical gain and offset of the zero state along the frequency grid,
/// one curve per carrier q. Default grid: omega in [-2, 2], 4001 points.
fn run_hopf_curves(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let omega = cfg.scan.omega.grid("omega", -2.0, 2.0, 4001)?;
    let qs = cfg.scan.q_values();
    let mut resolved = cfg.clone();
    resolved.scan.q = Some(qs.clone());
    resolved.scan.omega = cfg.scan.omega.resolved(-2.0, 2.0, 4001);
    let mut out = ScenarioOutput::new(resolved);
    let mut art = CsvArtifact::new("hopf_curves", &["omega", "eta", "delta", "q"]);
    let mut skipped_total = 0;
    for &q in &qs {
        let (points, skipped) = hopf_curve(&cfg.model, q, &omega);
        skipped_total += skipped;
        for pt in points {
            art.push_row(vec![
                pt.omega_c.into(),
                pt.eta.into(),
                pt.delta.into(),
                pt.q.into(),
            ]);
        }
    }
    if skipped_total > 0 {
        out.notes.push(format!(
            "{skipped_total} frequencies skipped where sin(phi - omega tau) vanishes"
        ));
    }
    out.artifacts.push(art);
    Ok(out)
}

/// Scaled growth rate of the zero state over the (xi, q) plane. Default
/// grids: xi in [-10, 10], 401 points; q in [-3, 3], 201 points.
fn run_trivial_dispersion(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let xis = cfg.scan.xi.grid("xi", -10.0, 10.0, 401)?;
    let qs = cfg.scan.q_range.grid("q", -3.0, 3.0, 201)?;
    let mut resolved = cfg.clone();
    resolved.scan.xi = cfg.scan.xi.resolved(-10.0, 10.0, 401);
    resolved.scan.q_range = cfg.scan.q_range.resolved(-3.0, 3.0, 201);
    let mut out = ScenarioOutput::new(resolved);
    let rows: Result<Vec<Vec<Vec<Cell>>>, ScenarioError> = xis
        .par_iter()
        .map(|&xi| {
            qs.iter()
                .map(|&q| {
                    let gamma = trivial_gamma(&cfg.model, q, xi).map_err(|e| {
                        node_failed(
                            &cfg.scenario,
                            format!("xi={xi:.6e}, q={q:.6e}"),
                            e.into(),
                        )
                    })?;
                    Ok(vec![xi.into(), q.into(), gamma.into()])
                })
                .collect()
        })
        .collect();
    let mut art = CsvArtifact::new("trivial_dispersion", &["xi", "q", "gamma"]);
    for block in rows? {
        for row in block {
            art.push_row(row);
        }
    }
    out.artifacts.push(art);
    Ok(out)
}

/// Stability class of the zero state over the (delta, eta) plane. Default
/// grids: delta in [-1, 1], 201 points; eta in [0, 1], 101 points.
fn run_trivial_regions(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let deltas = cfg.scan.delta.grid("delta", -1.0, 1.0, 201)?;
    let etas = cfg.scan.eta.grid("eta", 0.0, 1.0, 101)?;
    let mut resolved = cfg.clone();
    resolved.scan.delta = cfg.scan.delta.resolved(-1.0, 1.0, 201);
    resolved.scan.eta = cfg.scan.eta.resolved(0.0, 1.0, 101);
    let mut out = ScenarioOutput::new(resolved);
    let mut art = CsvArtifact::new(
        "trivial_regions",
        &["delta", "eta", "class", "two_regions"],
    );
    for &delta in &deltas {
        for &eta in &etas {
            let p = cfg
                .model
                .with_delta(delta)
                .with_feedback(eta, cfg.model.phi, cfg.model.tau);
            let class = classify_trivial(&p);
            art.push_row(vec![
                delta.into(),
                eta.into(),
                class.kind.code().into(),
                class.two_regions.into(),
            ]);
        }
    }
    out.artifacts.push(art);
    Ok(out)
}

fn branch_code(tag: BranchTag) -> Cell {
    match tag {
        BranchTag::Plus => Cell::Int(0),
        BranchTag::Minus => Cell::Int(1),
    }
}

/// Every plane wave in the frequency window at fixed parameters. The window
/// defaults to a band around the delay-free envelope frequencies.
fn run_pw_roots(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let q = cfg.scan.single_q(&cfg.scenario)?;
    let (dlo, dhi) = default_omega_range(&cfg.model, q);
    let lo = cfg.scan.omega.min.unwrap_or(dlo);
    let hi = cfg.scan.omega.max.unwrap_or(dhi);
    let mut resolved = cfg.clone();
    resolved.scan.q = Some(vec![q]);
    resolved.scan.omega.min = Some(lo);
    resolved.scan.omega.max = Some(hi);
    let mut out = ScenarioOutput::new(resolved);
    let found = find_planewaves(&cfg.model, q, (lo, hi));
    let mut art = CsvArtifact::new("pw_roots", &["omega", "a0", "theta", "branch"]);
    for w in &found.waves {
        art.push_row(vec![
            w.omega.into(),
            w.a0.into(),
            w.theta_or_closure(&cfg.model).into(),
            branch_code(amplitude_branch(&cfg.model, w)),
        ]);
    }
    out.notes.extend(found.warnings);
    out.artifacts.push(art);
    Ok(out)
}

fn branch_artifacts(
    cfg: &ScenarioConfig,
    q: f64,
    omega_grid: &[f64],
    tag: BranchTag,
    notes: &mut Vec<String>,
) -> Vec<CsvArtifact> {
    let branch = branch_trace(&cfg.model, q, omega_grid, tag);
    let stem = match tag {
        BranchTag::Plus => "pw_branch_plus",
        BranchTag::Minus => "pw_branch_minus",
    };
    let mut art = CsvArtifact::new(stem, &["omega", "a0", "delta", "theta", "segment_id"]);
    for (seg_id, segment) in branch.segments.iter().enumerate() {
        for pt in segment {
            art.push_row(vec![
                pt.omega.into(),
                pt.a0.into(),
                pt.delta.into(),
                pt.theta.into(),
                seg_id.into(),
            ]);
        }
    }
    if branch.swaps > 0 {
        notes.push(format!(
            "{stem}: {} grid steps continued on the companion root (fold proximity)",
            branch.swaps
        ));
    }
    let mut env = CsvArtifact::new(
        &format!("{stem}_envelopes"),
        &["a0", "delta_low", "delta_high"],
    );
    for ((a0, d_low), (_, d_high)) in branch.envelope_low.iter().zip(&branch.envelope_high) {
        env.push_row(vec![(*a0).into(), (*d_low).into(), (*d_high).into()]);
    }
    vec![art, env]
}

/// The delta-swept plane-wave branch for both amplitude roots, with the
/// delay-free envelopes. Default frequency grid: 2001 points over the
/// default window.
fn run_pw_branch(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let q = cfg.scan.single_q(&cfg.scenario)?;
    let (dlo, dhi) = default_omega_range(&cfg.model, q);
    let omega = RangeSpec {
        min: Some(cfg.scan.omega.min.unwrap_or(dlo)),
        max: Some(cfg.scan.omega.max.unwrap_or(dhi)),
        count: Some(cfg.scan.omega.count.unwrap_or(2001)),
    };
    let grid = omega.grid("omega", dlo, dhi, 2001)?;
    let mut resolved = cfg.clone();
    resolved.scan.q = Some(vec![q]);
    resolved.scan.omega = omega;
    let mut out = ScenarioOutput::new(resolved);
    out.artifacts = branch_artifacts(cfg, q, &grid, BranchTag::Plus, &mut out.notes);
    if cfg.model.is_cubic() {
        out.notes
            .push("cubic amplitude equation: the two roots coincide, minus branch omitted".into());
    } else {
        out.artifacts
            .extend(branch_artifacts(cfg, q, &grid, BranchTag::Minus, &mut out.notes));
    }
    Ok(out)
}

/// The traced branch with the rightmost characteristic root at every point.
/// Defaults: 241 frequencies over the default window, k in [-3, 3] with 121
/// points, larger amplitude root.
fn run_pw_stability_finite(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let q = cfg.scan.single_q(&cfg.scenario)?;
    let tag = cfg
        .scan
        .branch
        .unwrap_or_else(|| principal_branch(&cfg.model));
    let (dlo, dhi) = default_omega_range(&cfg.model, q);
    let omega = RangeSpec {
        min: Some(cfg.scan.omega.min.unwrap_or(dlo)),
        max: Some(cfg.scan.omega.max.unwrap_or(dhi)),
        count: Some(cfg.scan.omega.count.unwrap_or(241)),
    };
    let omega_grid = omega.grid("omega", dlo, dhi, 241)?;
    let k_grid = cfg.scan.k.grid("k", -3.0, 3.0, 121)?;
    let mut resolved = cfg.clone();
    resolved.scan.q = Some(vec![q]);
    resolved.scan.branch = Some(tag);
    resolved.scan.omega = omega;
    resolved.scan.k = cfg.scan.k.resolved(-3.0, 3.0, 121);
    let mut out = ScenarioOutput::new(resolved);
    let branch = branch_trace(&cfg.model, q, &omega_grid, tag);
    let mut jobs: Vec<(usize, crate::existence::BranchPoint)> = branch
        .segments
        .iter()
        .enumerate()
        .flat_map(|(seg_id, seg)| seg.iter().map(move |pt| (seg_id, *pt)))
        .collect();
    // Fold refinement can hand back far more points than the requested grid;
    // root searches at every one of them would dominate the run for nothing.
    let cap = 4 * omega_grid.len();
    if jobs.len() > cap {
        let total = jobs.len();
        let stride = total.div_ceil(cap);
        jobs = jobs.into_iter().step_by(stride).collect();
        out.notes.push(format!(
            "traced branch sampled at {} of {total} refined points",
            jobs.len()
        ));
    }
    let results: Vec<(usize, crate::existence::BranchPoint, f64, f64, usize)> = jobs
        .par_iter()
        .map(|&(seg_id, pt)| {
            let pd = cfg.model.with_delta(pt.delta);
            let pw = PlaneWave::new(q, pt.omega, pt.a0).with_theta(pt.theta);
            let r = rightmost_root(&pd, &pw, &k_grid);
            (seg_id, pt, r.max_re, r.k, r.warnings.len())
        })
        .collect();
    if cfg.certify_roots {
        certify_branch(cfg, q, &k_grid, &results, &mut out);
    }
    let mut art = CsvArtifact::new(
        "pw_stability_finite",
        &[
            "omega",
            "a0",
            "delta",
            "theta",
            "segment_id",
            "max_re_lambda",
            "argmax_k",
            "class",
        ],
    );
    let mut warned = 0usize;
    for (seg_id, pt, max_re, argmax_k, warnings) in results {
        warned += warnings;
        let class: u8 = if max_re > CLASS_TOL { 2 } else { 0 };
        art.push_row(vec![
            pt.omega.into(),
            pt.a0.into(),
            pt.delta.into(),
            pt.theta.into(),
            seg_id.into(),
            max_re.into(),
            argmax_k.into(),
            class.into(),
        ]);
    }
    if warned > 0 {
        out.notes
            .push(format!("{warned} root searches reported seeding warnings"));
    }
    if branch.swaps > 0 {
        out.notes.push(format!(
            "{} grid steps continued on the companion root (fold proximity)",
            branch.swaps
        ));
    }
    out.artifacts.push(art);
    Ok(out)
}

/// Slow cross-check of the heuristic root search: count roots to the right
/// of each reported maximum with the argument principle. Every window is
/// expected to be empty; anything else lands in the run notes.
fn certify_branch(
    cfg: &ScenarioConfig,
    q: f64,
    k_grid: &[f64],
    results: &[(usize, crate::existence::BranchPoint, f64, f64, usize)],
    out: &mut ScenarioOutput,
) {
    let outcomes: Vec<(f64, usize, usize)> = results
        .par_iter()
        .map(|&(_, pt, max_re, _, _)| {
            let pd = cfg.model.with_delta(pt.delta);
            let pw = PlaneWave::new(q, pt.omega, pt.a0).with_theta(pt.theta);
            let cs = CharacteristicSystem::new(&pd, &pw);
            // Stay strictly right of the reported maximum, and of the exact
            // phase zero at k = 0, so no window edge grazes a known root.
            let lo = (max_re + 1e-4).max(1e-6);
            let mut uncounted = 0usize;
            let mut inconclusive = 0usize;
            for &k in k_grid {
                let r = cs.root_modulus_bound(k);
                match certify_window(&cs, k, (lo, r.max(lo + 1.0)), (-r, r)) {
                    Some(n) => uncounted += n,
                    None => inconclusive += 1,
                }
            }
            (pt.delta, uncounted, inconclusive)
        })
        .collect();
    let uncounted: usize = outcomes.iter().map(|o| o.1).sum();
    let inconclusive: usize = outcomes.iter().map(|o| o.2).sum();
    let windows = results.len() * k_grid.len();
    if uncounted == 0 && inconclusive == 0 {
        out.notes.push(format!(
            "certification: winding counts confirm no roots right of the reported maxima ({windows} windows)"
        ));
        return;
    }
    for (delta, e, o) in outcomes.iter().filter(|o| o.1 > 0 || o.2 > 0).take(8) {
        out.notes.push(format!(
            "certification at delta={delta:.6}: {e} uncounted roots, {o} inconclusive windows"
        ));
    }
    out.notes.push(format!(
        "certification: {uncounted} uncounted roots, {inconclusive} inconclusive of {windows} windows"
    ));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MapKind {
    Strong,
    Weak,
}

fn map_grids(
    cfg: &ScenarioConfig,
) -> Result<(Vec<f64>, Vec<f64>, ScenarioConfig), ScenarioError> {
    let deltas = cfg.scan.delta.grid("delta", -0.5, 1.5, 101)?;
    let thetas = cfg.scan.theta.grid("theta", 0.0, 2.0 * PI, 64)?;
    let mut resolved = cfg.clone();
    resolved.scan.delta = cfg.scan.delta.resolved(-0.5, 1.5, 101);
    resolved.scan.theta = cfg.scan.theta.resolved(0.0, 2.0 * PI, 64);
    Ok((deltas, thetas, resolved))
}

/// Large-delay growth over the (delta, theta) tube: the strong rate for
/// `pw-strong-map`, the scaled weak rate for `pw-weak-map`. Points off the
/// solution tube carry NaN. Defaults: delta in [-0.5, 1.5] x 101, theta in
/// [0, 2 pi] x 64, probes k in [-3, 3] x 601 (and xi in [-pi, pi] x 629 for
/// the weak rate).
fn run_value_map(cfg: &ScenarioConfig, kind: MapKind) -> Result<ScenarioOutput, ScenarioError> {
    if kind == MapKind::Weak && cfg.model.eta == 0.0 {
        return Err(ModelError::DegenerateSpectrum.into());
    }
    let q = cfg.scan.single_q(&cfg.scenario)?;
    let (deltas, thetas, mut resolved) = map_grids(cfg)?;
    let k_grid = cfg.scan.k.grid("k", -3.0, 3.0, 601)?;
    resolved.scan.q = Some(vec![q]);
    resolved.scan.k = cfg.scan.k.resolved(-3.0, 3.0, 601);
    let xi_grid = match kind {
        MapKind::Weak => {
            let g = cfg.scan.xi.grid("xi", -PI, PI, 629)?;
            resolved.scan.xi = cfg.scan.xi.resolved(-PI, PI, 629);
            g
        }
        MapKind::Strong => Vec::new(),
    };
    let mut out = ScenarioOutput::new(resolved);
    let jobs: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|&d| thetas.iter().map(move |&t| (d, t)))
        .collect();
    let values: Result<Vec<f64>, ScenarioError> = jobs
        .par_iter()
        .map(|&(delta, theta)| {
            let pd = cfg.model.with_delta(delta);
            let wave = match planewave_from_theta(&pd, q, theta, BranchTag::Plus) {
                Ok(w) => w,
                Err(ModelError::NoRealAmplitude { .. }) => return Ok(f64::NAN),
                Err(e) => {
                    return Err(node_failed(
                        &cfg.scenario,
                        format!("delta={delta:.6e}, theta={theta:.6e}"),
                        e.into(),
                    ))
                }
            };
            match kind {
                MapKind::Strong => Ok(strong_sup(&pd, &wave, &k_grid).0),
                MapKind::Weak => weak_sup(&pd, &wave, &k_grid, &xi_grid)
                    .map(|w| w.gamma)
                    .map_err(|e| {
                        node_failed(
                            &cfg.scenario,
                            format!("delta={delta:.6e}, theta={theta:.6e}"),
                            e.into(),
                        )
                    }),
            }
        })
        .collect();
    let values = values?;
    let name = match kind {
        MapKind::Strong => "pw_strong_map",
        MapKind::Weak => "pw_weak_map",
    };
    let mut art = CsvArtifact::new(name, &["delta", "theta", "value"]);
    for ((delta, theta), value) in jobs.into_iter().zip(values) {
        art.push_row(vec![delta.into(), theta.into(), value.into()]);
    }
    out.artifacts.push(art);
    Ok(out)
}

/// Three-way large-delay classification over the (delta, theta) tube plus
/// its two (delta, a0) projections (theta at or below pi, theta above pi).
/// Same default grids as the value maps.
fn run_class_map(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    if cfg.model.eta == 0.0 {
        return Err(ModelError::DegenerateSpectrum.into());
    }
    let q = cfg.scan.single_q(&cfg.scenario)?;
    let (deltas, thetas, mut resolved) = map_grids(cfg)?;
    let k_grid = cfg.scan.k.grid("k", -3.0, 3.0, 601)?;
    let xi_grid = cfg.scan.xi.grid("xi", -PI, PI, 629)?;
    resolved.scan.q = Some(vec![q]);
    resolved.scan.k = cfg.scan.k.resolved(-3.0, 3.0, 601);
    resolved.scan.xi = cfg.scan.xi.resolved(-PI, PI, 629);
    let mut out = ScenarioOutput::new(resolved);
    let map = stability_map_with(&cfg.model, q, &deltas, &thetas, &k_grid, &xi_grid);
    let mut art = CsvArtifact::new("pw_class_map", &["delta", "theta", "class"]);
    for node in &map.nodes {
        art.push_row(vec![
            node.delta.into(),
            node.theta.into(),
            node.class_code().into(),
        ]);
    }
    out.artifacts.push(art);
    let (lower, upper) = map.half_maps();
    for (name, half) in [
        ("pw_class_map_half_low", lower),
        ("pw_class_map_half_high", upper),
    ] {
        let mut proj = CsvArtifact::new(name, &["delta", "a0", "class"]);
        for (delta, a0, kind) in half {
            proj.push_row(vec![delta.into(), a0.into(), kind.code().into()]);
        }
        out.artifacts.push(proj);
    }
    Ok(out)
}

/// Direct integration from a perturbed plane wave: space-time snapshots and
/// the observable time series. A run that aborts (blow-up, step underflow)
/// still flushes both tables, marked FAILED.
fn run_simulate(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let sim = &cfg.sim;
    let missing = |key: &str| -> ScenarioError {
        ConfigError::Range {
            key: key.to_string(),
            message: "required by the simulate scenario (no unique default wave)".to_string(),
        }
        .into()
    };
    let start_omega = sim.start_omega.ok_or_else(|| missing("start_omega"))?;
    let start_a0 = sim.start_a0.ok_or_else(|| missing("start_a0"))?;
    let grid = Grid::new(sim.n_points, sim.length).map_err(ScenarioError::Sim)?;
    let wave = PlaneWave::new(sim.start_q, start_omega, start_a0);
    let amplitude = sim
        .perturbation_amplitude
        .unwrap_or(1e-3 * start_a0);
    let modal_k = sim
        .perturbation_k
        .unwrap_or_else(|| 2.0 * PI / sim.length);
    let perturbation = match sim.perturbation {
        PerturbationKind::None => Perturbation::None,
        PerturbationKind::Modal => Perturbation::Modal {
            k: modal_k,
            amplitude,
        },
        PerturbationKind::Noise => Perturbation::Noise {
            amplitude,
            seed: sim.seed,
        },
    };
    let history = make_initial_history(&grid, &wave, perturbation).map_err(|e| match e {
        SimError::InadmissibleWavenumber { q, .. } => {
            let key = if q == sim.start_q {
                "start_q"
            } else {
                "perturbation_k"
            };
            ConfigError::Range {
                key: key.to_string(),
                message: e.to_string(),
            }
            .into()
        }
        other => ScenarioError::Sim(other),
    })?;
    let opts = IntegrateOptions::new(sim.t_end)
        .with_tolerances(sim.rtol, sim.atol)
        .with_snapshots_every(sim.snapshot_every)
        .with_observables_every(sim.observe_every);
    let result = integrate_with(&cfg.model, &grid, &history, &opts)?;

    let mut resolved = cfg.clone();
    resolved.sim.start_omega = Some(start_omega);
    resolved.sim.start_a0 = Some(start_a0);
    resolved.sim.perturbation_amplitude = Some(amplitude);
    if sim.perturbation == PerturbationKind::Modal {
        resolved.sim.perturbation_k = Some(modal_k);
    }
    let mut out = ScenarioOutput::new(resolved);

    let mut snaps = CsvArtifact::new("simulate_snapshots", &["t", "j", "x", "re", "im"]);
    for state in &result.snapshots {
        for (j, value) in state.values.iter().enumerate() {
            snaps.push_row(vec![
                state.t.into(),
                j.into(),
                grid.x(j).into(),
                value.re.into(),
                value.im.into(),
            ]);
        }
    }
    let obs = &result.observables;
    let mut series = CsvArtifact::new(
        "simulate_observables",
        &["t", "mean_amp", "max_amp", "dominant_q", "omega_est", "defect_count"],
    );
    for i in 0..obs.len() {
        series.push_row(vec![
            obs.t[i].into(),
            obs.mean_amp[i].into(),
            obs.max_amp[i].into(),
            obs.dominant_q[i].into(),
            obs.omega_est[i].into(),
            obs.defect_count[i].into(),
        ]);
    }
    out.artifacts.push(snaps);
    out.artifacts.push(series);
    out.notes.push(format!(
        "steps: {} accepted, {} rejected",
        result.steps_accepted, result.steps_rejected
    ));
    if let Some(last) = obs.len().checked_sub(1) {
        out.notes.push(format!(
            "final sample: t={:.6e}, mean |A|={:.6e}, dominant q={:.6e}, omega estimate={:.6e}, defects={}",
            obs.t[last], obs.mean_amp[last], obs.dominant_q[last], obs.omega_est[last],
            obs.defect_count[last]
        ));
    }
    out.soft_failure = result.failure;
    Ok(out)
}
