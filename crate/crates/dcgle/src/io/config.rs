//! Scenario configuration files: a sectioned `key = value` format.
//!
//! ```text
//! scenario = pw-class-map        # which table(s) to produce
//! out_dir = out
//!
//! [model]
//! beta = 0.5
//! eta = 0.2
//!
//! [scan]
//! delta_min = -0.5
//! delta_max = 1.5
//! delta_count = 101
//!
//! [simulation]
//! t_end = 600
//! ```
//!
//! `#` starts a comment anywhere on a line. Keys may appear in any order;
//! a repeated key keeps its last value. Every omitted key takes a default
//! (the `[model]` section defaults to the quintic reference parameters, an
//! omitted `[simulation]` section means a 500-point grid on length 32*pi
//! with rtol 1e-6). Scan ranges left unset are resolved per scenario at run
//! time and echoed, fully resolved, into each artifact's metadata sidecar.

use std::f64::consts::PI;
use std::path::PathBuf;

use crate::error::ConfigError;
use crate::params::ModelParams;
use crate::planewave::BranchTag;

/// Names accepted for the top-level `scenario` key.
pub const SCENARIO_NAMES: [&str; 10] = [
    "hopf-curves",
    "trivial-dispersion",
    "trivial-regions",
    "pw-roots",
    "pw-branch",
    "pw-stability-finite",
    "pw-strong-map",
    "pw-weak-map",
    "pw-class-map",
    "simulate",
];

/// One scan axis: any subset of min/max/count may be given; the rest is
/// filled from the scenario's documented default when the run starts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RangeSpec {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
}

impl RangeSpec {
    /// Inclusive linear grid after filling unset fields with the defaults.
    pub fn grid(
        &self,
        key: &str,
        default_min: f64,
        default_max: f64,
        default_count: usize,
    ) -> Result<Vec<f64>, ConfigError> {
        let min = self.min.unwrap_or(default_min);
        let max = self.max.unwrap_or(default_max);
        let count = self.count.unwrap_or(default_count);
        if count == 0 {
            return Err(ConfigError::Range {
                key: format!("{key}_count"),
                message: "grid needs at least one point".to_string(),
            });
        }
        if !(min <= max) {
            return Err(ConfigError::Range {
                key: format!("{key}_min"),
                message: format!("{min} exceeds {key}_max = {max}"),
            });
        }
        if count == 1 {
            return Ok(vec![min]);
        }
        let step = (max - min) / (count - 1) as f64;
        Ok((0..count).map(|i| min + step * i as f64).collect())
    }

    /// The resolved spec (for echoing into metadata).
    pub fn resolved(&self, default_min: f64, default_max: f64, default_count: usize) -> Self {
        Self {
            min: Some(self.min.unwrap_or(default_min)),
            max: Some(self.max.unwrap_or(default_max)),
            count: Some(self.count.unwrap_or(default_count)),
        }
    }
}

/// The `[scan]` section: grids for the analysis scenarios.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanConfig {
    /// Carrier wavenumbers. Scenarios whose output has a `q` column accept a
    /// list; the rest require a single value. Default `0`.
    pub q: Option<Vec<f64>>,
    /// Amplitude branch for `pw-stability-finite` (`plus` or `minus`).
    pub branch: Option<BranchTag>,
    /// Wavenumber axis (`q_min`/`q_max`/`q_count`) for scenarios that scan q
    /// as a grid rather than taking a carrier list.
    pub q_range: RangeSpec,
    pub omega: RangeSpec,
    pub delta: RangeSpec,
    pub theta: RangeSpec,
    pub eta: RangeSpec,
    pub k: RangeSpec,
    pub xi: RangeSpec,
}

impl ScanConfig {
    pub fn q_values(&self) -> Vec<f64> {
        self.q.clone().unwrap_or_else(|| vec![0.0])
    }

    /// The single carrier wavenumber, for scenarios without a `q` column.
    pub fn single_q(&self, scenario: &str) -> Result<f64, ConfigError> {
        let qs = self.q_values();
        if qs.len() != 1 {
            return Err(ConfigError::Range {
                key: "q".to_string(),
                message: format!(
                    "scenario '{scenario}' outputs have no q column; give exactly one q (got {})",
                    qs.len()
                ),
            });
        }
        Ok(qs[0])
    }
}

/// How the initial field deviates from the exact plane wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerturbationKind {
    None,
    #[default]
    Modal,
    Noise,
}

impl PerturbationKind {
    fn label(self) -> &'static str {
        match self {
            PerturbationKind::None => "none",
            PerturbationKind::Modal => "modal",
            PerturbationKind::Noise => "noise",
        }
    }
}

/// The `[simulation]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_points: usize,
    pub length: f64,
    pub rtol: f64,
    pub atol: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub observe_every: f64,
    pub perturbation: PerturbationKind,
    /// Sideband wavenumber for modal perturbations; default 2*pi/length.
    pub perturbation_k: Option<f64>,
    /// Perturbation size; default 1e-3 times the starting amplitude.
    pub perturbation_amplitude: Option<f64>,
    /// Seed for noise perturbations (DCGLE_SEED overrides it in the CLI).
    pub seed: u64,
    pub start_q: f64,
    /// Frequency of the starting plane wave; required by `simulate`.
    pub start_omega: Option<f64>,
    /// Amplitude of the starting plane wave; required by `simulate`.
    pub start_a0: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_points: 500,
            length: 32.0 * PI,
            rtol: 1e-6,
            atol: 1e-9,
            t_end: 600.0,
            snapshot_every: 5.0,
            observe_every: 0.5,
            perturbation: PerturbationKind::Modal,
            perturbation_k: None,
            perturbation_amplitude: None,
            seed: 0,
            start_q: 0.0,
            start_omega: None,
            start_a0: None,
        }
    }
}

/// A fully parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub out_dir: PathBuf,
    /// Emit a plot script next to each table.
    pub plots: bool,
    /// Cross-check rightmost roots with argument-principle window counts.
    /// Slow; normally switched on from the command line rather than here.
    pub certify_roots: bool,
    pub model: ModelParams,
    pub scan: ScanConfig,
    pub sim: SimConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: String::new(),
            out_dir: PathBuf::from("out"),
            plots: true,
            certify_roots: false,
            model: ModelParams::quintic_defaults(),
            scan: ScanConfig::default(),
            sim: SimConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Model,
    Scan,
    Simulation,
}

fn parse_f64(value: &str, line: usize) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::Parse {
        line,
        message: format!("expected a number, got '{value}'"),
    })
}

fn parse_usize(value: &str, line: usize) -> Result<usize, ConfigError> {
    value.parse::<usize>().map_err(|_| ConfigError::Parse {
        line,
        message: format!("expected a nonnegative integer, got '{value}'"),
    })
}

fn parse_u64(value: &str, line: usize) -> Result<u64, ConfigError> {
    value.parse::<u64>().map_err(|_| ConfigError::Parse {
        line,
        message: format!("expected a nonnegative integer, got '{value}'"),
    })
}

fn parse_bool(value: &str, line: usize) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError::Parse {
            line,
            message: format!("expected true or false, got '{value}'"),
        }),
    }
}

fn parse_f64_list(value: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|item| parse_f64(item.trim(), line))
        .collect()
}

/// Parse a configuration file. Syntax problems report their line number;
/// out-of-range values name the offending key.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut section = Section::Top;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line,
                message: "unterminated section header".to_string(),
            })?;
            section = match name.trim() {
                "model" => Section::Model,
                "scan" => Section::Scan,
                "simulation" => Section::Simulation,
                other => {
                    return Err(ConfigError::Parse {
                        line,
                        message: format!("unknown section '[{other}]'"),
                    })
                }
            };
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: "expected 'key = value'".to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("empty value for '{key}'"),
            });
        }
        match section {
            Section::Top => match key {
                "scenario" => cfg.scenario = value.to_string(),
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                "plots" => cfg.plots = parse_bool(value, line)?,
                "certify_roots" => cfg.certify_roots = parse_bool(value, line)?,
                _ => {
                    return Err(ConfigError::UnknownKey {
                        key: key.to_string(),
                        line,
                    })
                }
            },
            Section::Model => {
                let slot = match key {
                    "beta" => &mut cfg.model.beta,
                    "delta" => &mut cfg.model.delta,
                    "epsilon" => &mut cfg.model.epsilon,
                    "mu" => &mut cfg.model.mu,
                    "nu" => &mut cfg.model.nu,
                    "eta" => &mut cfg.model.eta,
                    "phi" => &mut cfg.model.phi,
                    "tau" => &mut cfg.model.tau,
                    _ => {
                        return Err(ConfigError::UnknownKey {
                            key: key.to_string(),
                            line,
                        })
                    }
                };
                *slot = parse_f64(value, line)?;
            }
            Section::Scan => match key {
                "q" => cfg.scan.q = Some(parse_f64_list(value, line)?),
                "branch" => {
                    cfg.scan.branch = Some(match value {
                        "plus" => BranchTag::Plus,
                        "minus" => BranchTag::Minus,
                        _ => {
                            return Err(ConfigError::Parse {
                                line,
                                message: format!("expected plus or minus, got '{value}'"),
                            })
                        }
                    })
                }
                _ => {
                    let (base, suffix) =
                        key.rsplit_once('_').ok_or_else(|| ConfigError::UnknownKey {
                            key: key.to_string(),
                            line,
                        })?;
                    let spec = match base {
                        "q" => &mut cfg.scan.q_range,
                        "omega" => &mut cfg.scan.omega,
                        "delta" => &mut cfg.scan.delta,
                        "theta" => &mut cfg.scan.theta,
                        "eta" => &mut cfg.scan.eta,
                        "k" => &mut cfg.scan.k,
                        "xi" => &mut cfg.scan.xi,
                        _ => {
                            return Err(ConfigError::UnknownKey {
                                key: key.to_string(),
                                line,
                            })
                        }
                    };
                    match suffix {
                        "min" => spec.min = Some(parse_f64(value, line)?),
                        "max" => spec.max = Some(parse_f64(value, line)?),
                        "count" => spec.count = Some(parse_usize(value, line)?),
                        _ => {
                            return Err(ConfigError::UnknownKey {
                                key: key.to_string(),
                                line,
                            })
                        }
                    }
                }
            },
            Section::Simulation => match key {
                "n_points" => cfg.sim.n_points = parse_usize(value, line)?,
                "length" => cfg.sim.length = parse_f64(value, line)?,
                "rtol" => cfg.sim.rtol = parse_f64(value, line)?,
                "atol" => cfg.sim.atol = parse_f64(value, line)?,
                "t_end" => cfg.sim.t_end = parse_f64(value, line)?,
                "snapshot_every" => cfg.sim.snapshot_every = parse_f64(value, line)?,
                "observe_every" => cfg.sim.observe_every = parse_f64(value, line)?,
                "perturbation" => {
                    cfg.sim.perturbation = match value {
                        "none" => PerturbationKind::None,
                        "modal" => PerturbationKind::Modal,
                        "noise" => PerturbationKind::Noise,
                        _ => {
                            return Err(ConfigError::Parse {
                                line,
                                message: format!("expected none, modal, or noise, got '{value}'"),
                            })
                        }
                    }
                }
                "perturbation_k" => cfg.sim.perturbation_k = Some(parse_f64(value, line)?),
                "perturbation_amplitude" => {
                    cfg.sim.perturbation_amplitude = Some(parse_f64(value, line)?)
                }
                "seed" => cfg.sim.seed = parse_u64(value, line)?,
                "start_q" => cfg.sim.start_q = parse_f64(value, line)?,
                "start_omega" => cfg.sim.start_omega = Some(parse_f64(value, line)?),
                "start_a0" => cfg.sim.start_a0 = Some(parse_f64(value, line)?),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        key: key.to_string(),
                        line,
                    })
                }
            },
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn range_err(key: &str, message: String) -> ConfigError {
    ConfigError::Range {
        key: key.to_string(),
        message,
    }
}

fn require_finite(key: &str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(range_err(key, format!("{value} is not finite")))
    }
}

fn require_positive(key: &str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(range_err(key, format!("{value} must be > 0")))
    }
}

fn validate(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    if cfg.scenario.is_empty() {
        return Err(range_err(
            "scenario",
            format!("required; one of {}", SCENARIO_NAMES.join(", ")),
        ));
    }
    if !SCENARIO_NAMES.contains(&cfg.scenario.as_str()) {
        return Err(range_err(
            "scenario",
            format!(
                "'{}' is not a scenario; expected one of {}",
                cfg.scenario,
                SCENARIO_NAMES.join(", ")
            ),
        ));
    }
    cfg.model.validate().map_err(|e| match e {
        crate::error::ModelError::InvalidParameter {
            name,
            value,
            reason,
        } => range_err(name, format!("{value}: {reason}")),
        other => range_err("model", other.to_string()),
    })?;
    if let Some(qs) = &cfg.scan.q {
        if qs.is_empty() {
            return Err(range_err("q", "list must not be empty".to_string()));
        }
        for &q in qs {
            require_finite("q", q)?;
        }
    }
    for (name, spec) in [
        ("q", &cfg.scan.q_range),
        ("omega", &cfg.scan.omega),
        ("delta", &cfg.scan.delta),
        ("theta", &cfg.scan.theta),
        ("eta", &cfg.scan.eta),
        ("k", &cfg.scan.k),
        ("xi", &cfg.scan.xi),
    ] {
        if let Some(min) = spec.min {
            require_finite(&format!("{name}_min"), min)?;
        }
        if let Some(max) = spec.max {
            require_finite(&format!("{name}_max"), max)?;
        }
        if let (Some(min), Some(max)) = (spec.min, spec.max) {
            if min > max {
                return Err(range_err(
                    &format!("{name}_min"),
                    format!("{min} exceeds {name}_max = {max}"),
                ));
            }
        }
        if spec.count == Some(0) {
            return Err(range_err(
                &format!("{name}_count"),
                "grid needs at least one point".to_string(),
            ));
        }
    }
    let sim = &cfg.sim;
    if sim.n_points < 16 {
        return Err(range_err(
            "n_points",
            format!("{}: the grid needs at least 16 points", sim.n_points),
        ));
    }
    require_positive("length", sim.length)?;
    require_positive("rtol", sim.rtol)?;
    require_positive("atol", sim.atol)?;
    require_positive("t_end", sim.t_end)?;
    require_positive("snapshot_every", sim.snapshot_every)?;
    require_positive("observe_every", sim.observe_every)?;
    if let Some(k) = sim.perturbation_k {
        require_finite("perturbation_k", k)?;
    }
    if let Some(a) = sim.perturbation_amplitude {
        require_finite("perturbation_amplitude", a)?;
        if a < 0.0 {
            return Err(range_err(
                "perturbation_amplitude",
                format!("{a} must be >= 0"),
            ));
        }
    }
    require_finite("start_q", sim.start_q)?;
    if let Some(w) = sim.start_omega {
        require_finite("start_omega", w)?;
    }
    if let Some(a0) = sim.start_a0 {
        require_positive("start_a0", a0)?;
    }
    Ok(())
}

fn push_f64(out: &mut String, key: &str, value: f64) {
    out.push_str(&format!("{key} = {value:.16e}\n"));
}

fn push_range(out: &mut String, name: &str, spec: &RangeSpec) {
    if let Some(min) = spec.min {
        push_f64(out, &format!("{name}_min"), min);
    }
    if let Some(max) = spec.max {
        push_f64(out, &format!("{name}_max"), max);
    }
    if let Some(count) = spec.count {
        out.push_str(&format!("{name}_count = {count}\n"));
    }
}

/// Render a configuration back to file syntax. The output parses to an equal
/// value, so serializing the resolved configuration into the metadata sidecar
/// makes every run reproducible from its own artifacts.
pub fn serialize_config(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("scenario = {}\n", cfg.scenario));
    out.push_str(&format!("out_dir = {}\n", cfg.out_dir.display()));
    out.push_str(&format!("plots = {}\n", cfg.plots));
    out.push_str(&format!("certify_roots = {}\n", cfg.certify_roots));
    out.push_str("\n[model]\n");
    let m = &cfg.model;
    push_f64(&mut out, "beta", m.beta);
    push_f64(&mut out, "delta", m.delta);
    push_f64(&mut out, "epsilon", m.epsilon);
    push_f64(&mut out, "mu", m.mu);
    push_f64(&mut out, "nu", m.nu);
    push_f64(&mut out, "eta", m.eta);
    push_f64(&mut out, "phi", m.phi);
    push_f64(&mut out, "tau", m.tau);
    out.push_str("\n[scan]\n");
    if let Some(qs) = &cfg.scan.q {
        let items: Vec<String> = qs.iter().map(|q| format!("{q:.16e}")).collect();
        out.push_str(&format!("q = {}\n", items.join(", ")));
    }
    if let Some(branch) = cfg.scan.branch {
        let word = match branch {
            BranchTag::Plus => "plus",
            BranchTag::Minus => "minus",
        };
        out.push_str(&format!("branch = {word}\n"));
    }
    push_range(&mut out, "q", &cfg.scan.q_range);
    push_range(&mut out, "omega", &cfg.scan.omega);
    push_range(&mut out, "delta", &cfg.scan.delta);
    push_range(&mut out, "theta", &cfg.scan.theta);
    push_range(&mut out, "eta", &cfg.scan.eta);
    push_range(&mut out, "k", &cfg.scan.k);
    push_range(&mut out, "xi", &cfg.scan.xi);
    out.push_str("\n[simulation]\n");
    let s = &cfg.sim;
    out.push_str(&format!("n_points = {}\n", s.n_points));
    push_f64(&mut out, "length", s.length);
    push_f64(&mut out, "rtol", s.rtol);
    push_f64(&mut out, "atol", s.atol);
    push_f64(&mut out, "t_end", s.t_end);
    push_f64(&mut out, "snapshot_every", s.snapshot_every);
    push_f64(&mut out, "observe_every", s.observe_every);
    out.push_str(&format!("perturbation = {}\n", s.perturbation.label()));
    if let Some(k) = s.perturbation_k {
        push_f64(&mut out, "perturbation_k", k);
    }
    if let Some(a) = s.perturbation_amplitude {
        push_f64(&mut out, "perturbation_amplitude", a);
    }
    out.push_str(&format!("seed = {}\n", s.seed));
    push_f64(&mut out, "start_q", s.start_q);
    if let Some(w) = s.start_omega {
        push_f64(&mut out, "start_omega", w);
    }
    if let Some(a0) = s.start_a0 {
        push_f64(&mut out, "start_a0", a0);
    }
    out
}
