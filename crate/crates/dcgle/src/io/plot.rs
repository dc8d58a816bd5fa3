//! Plot scripts: one self-contained matplotlib script per artifact.
//!
//! The scripts are plain text generated from the artifact name, so they can
//! be re-run long after the fact: each reads its sibling `<name>.csv` from
//! the current directory and writes `<name>.png`. Nothing here executes
//! Python; the scripts are artifacts like the tables.

use crate::error::ScenarioError;

use super::csv_out::CsvArtifact;

/// Figure tags understood by [`emit_plot_script`], with the exact column
/// set each one requires.
const SCHEMAS: [(&str, &[&str]); 12] = [
    ("hopf-curves", &["omega", "eta", "delta", "q"]),
    ("trivial-dispersion", &["xi", "q", "gamma"]),
    ("trivial-regions", &["delta", "eta", "class", "two_regions"]),
    ("pw-roots", &["omega", "a0", "theta", "branch"]),
    ("pw-branch", &["omega", "a0", "delta", "theta", "segment_id"]),
    ("pw-branch-envelopes", &["a0", "delta_low", "delta_high"]),
    (
        "pw-stability-finite",
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
    ),
    ("pw-map-value", &["delta", "theta", "value"]),
    ("pw-map-class", &["delta", "theta", "class"]),
    ("pw-map-projection", &["delta", "a0", "class"]),
    ("simulate-snapshots", &["t", "j", "x", "re", "im"]),
    (
        "simulate-observables",
        &["t", "mean_amp", "max_amp", "dominant_q", "omega_est", "defect_count"],
    ),
];

/// The figure tag for a scenario artifact, by its table name.
pub fn figure_tag_for(artifact_name: &str) -> Option<&'static str> {
    match artifact_name {
        "hopf_curves" => Some("hopf-curves"),
        "trivial_dispersion" => Some("trivial-dispersion"),
        "trivial_regions" => Some("trivial-regions"),
        "pw_roots" => Some("pw-roots"),
        "pw_branch_plus" | "pw_branch_minus" => Some("pw-branch"),
        "pw_branch_plus_envelopes" | "pw_branch_minus_envelopes" => Some("pw-branch-envelopes"),
        "pw_stability_finite" => Some("pw-stability-finite"),
        "pw_strong_map" | "pw_weak_map" => Some("pw-map-value"),
        "pw_class_map" => Some("pw-map-class"),
        "pw_class_map_half_low" | "pw_class_map_half_high" => Some("pw-map-projection"),
        "simulate_snapshots" => Some("simulate-snapshots"),
        "simulate_observables" => Some("simulate-observables"),
        _ => None,
    }
}

/// Generate the plot script for `artifact` under the given figure tag.
///
/// The artifact's columns must match the tag's schema exactly (same names,
/// same order); otherwise this returns [`ScenarioError::SchemaMismatch`] and
/// writes nothing. An unknown tag is reported the same way, with an empty
/// expected-column list.
pub fn emit_plot_script(
    artifact: &CsvArtifact,
    figure_tag: &str,
) -> Result<String, ScenarioError> {
    let expected: &[&str] = match SCHEMAS.iter().find(|(tag, _)| *tag == figure_tag) {
        Some((_, cols)) => cols,
        None => {
            return Err(ScenarioError::SchemaMismatch {
                tag: figure_tag.to_string(),
                expected: Vec::new(),
                got: artifact.columns.clone(),
            })
        }
    };
    if artifact.columns != expected {
        return Err(ScenarioError::SchemaMismatch {
            tag: figure_tag.to_string(),
            expected: expected.iter().map(|c| c.to_string()).collect(),
            got: artifact.columns.clone(),
        });
    }
    let name = &artifact.name;
    let body = match figure_tag {
        "hopf-curves" => HOPF_BODY,
        "trivial-dispersion" => DISPERSION_BODY,
        "trivial-regions" => REGIONS_BODY,
        "pw-roots" => ROOTS_BODY,
        "pw-branch" => BRANCH_BODY,
        "pw-branch-envelopes" => ENVELOPES_BODY,
        "pw-stability-finite" => STABILITY_FINITE_BODY,
        "pw-map-value" => MAP_VALUE_BODY,
        "pw-map-class" => MAP_CLASS_BODY,
        "pw-map-projection" => MAP_PROJECTION_BODY,
        "simulate-snapshots" => SNAPSHOTS_BODY,
        "simulate-observables" => OBSERVABLES_BODY,
        _ => unreachable!("tag validated above"),
    };
    Ok(format!(
        "#!/usr/bin/env python3\n\
         # Plot {name}.csv ({figure_tag}). Run next to the CSV file.\n\
         import numpy as np\n\
         import matplotlib\n\
         matplotlib.use(\"Agg\")\n\
         import matplotlib.pyplot as plt\n\
         \n\
         data = np.genfromtxt(\"{name}.csv\", delimiter=\",\", names=True)\n\
         data = np.atleast_1d(data)\n\
         {body}\
         plt.savefig(\"{name}.png\", dpi=150, bbox_inches=\"tight\")\n\
         print(\"wrote {name}.png\")\n"
    ))
}

const HOPF_BODY: &str = r##"plt.figure(figsize=(6, 4.5))
for q in np.unique(data["q"]):
    sel = data["q"] == q
    plt.plot(data["delta"][sel], np.abs(data["eta"][sel]), ".", ms=2, label=f"q = {q:g}")
plt.xlabel("delta")
plt.ylabel("|eta|")
plt.title("Hopf curve of the zero state")
plt.legend()
plt.grid(alpha=0.3)
"##;

const DISPERSION_BODY: &str = r##"xi = np.unique(data["xi"])
q = np.unique(data["q"])
g = data["gamma"].reshape(len(xi), len(q))
finite = g[np.isfinite(g)]
lim = np.percentile(np.abs(finite), 99) if finite.size else 1.0
plt.figure(figsize=(6, 4.5))
plt.pcolormesh(xi, q, g.T, shading="nearest", cmap="RdBu_r", vmin=-lim, vmax=lim)
plt.colorbar(label="gamma")
plt.contour(xi, q, g.T, levels=[0.0], colors="k", linewidths=0.8)
plt.xlabel("xi")
plt.ylabel("q")
plt.title("Scaled growth rate of the zero state")
"##;

const REGIONS_BODY: &str = r##"delta = np.unique(data["delta"])
eta = np.unique(data["eta"])
cls = data["class"].reshape(len(delta), len(eta))
two = data["two_regions"].reshape(len(delta), len(eta))
from matplotlib.colors import ListedColormap
cmap = ListedColormap(["#2c7bb6", "#fdae61", "#d7191c"])
plt.figure(figsize=(6, 4.5))
plt.pcolormesh(delta, eta, cls.T, shading="nearest", cmap=cmap, vmin=-0.5, vmax=2.5)
plt.colorbar(ticks=[0, 1, 2], label="0 stable / 1 weak / 2 strong")
if two.any():
    plt.contour(delta, eta, two.T, levels=[0.5], colors="k", linewidths=0.8)
plt.xlabel("delta")
plt.ylabel("eta")
plt.title("Stability regions of the zero state")
"##;

const ROOTS_BODY: &str = r##"plt.figure(figsize=(6, 4.5))
for tag, marker, label in [(0, "o", "larger root"), (1, "s", "smaller root")]:
    sel = data["branch"] == tag
    if sel.any():
        plt.plot(data["omega"][sel], data["a0"][sel], marker, ms=4, ls="none", label=label)
plt.xlabel("omega")
plt.ylabel("a0")
plt.title("Plane waves at fixed parameters")
plt.legend()
plt.grid(alpha=0.3)
"##;

const BRANCH_BODY: &str = r##"fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 7), sharex=True)
for seg in np.unique(data["segment_id"]):
    sel = data["segment_id"] == seg
    ax1.plot(data["delta"][sel], data["a0"][sel], lw=0.9)
    ax2.plot(data["delta"][sel], data["omega"][sel], lw=0.9)
ax1.set_ylabel("a0")
ax1.set_title("Plane-wave branch")
ax2.set_ylabel("omega")
ax2.set_xlabel("delta")
for ax in (ax1, ax2):
    ax.grid(alpha=0.3)
"##;

const ENVELOPES_BODY: &str = r##"plt.figure(figsize=(6, 4.5))
plt.plot(data["delta_low"], data["a0"], "k--", lw=1, label="lower envelope")
plt.plot(data["delta_high"], data["a0"], "k-.", lw=1, label="upper envelope")
plt.xlabel("delta")
plt.ylabel("a0")
plt.title("Delay-free envelopes of the branch")
plt.legend()
plt.grid(alpha=0.3)
"##;

const STABILITY_FINITE_BODY: &str = r##"fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 7), sharex=True)
stable = data["class"] == 0
ax1.plot(data["delta"][stable], data["a0"][stable], "o", ms=3, color="#1a9641", label="stable")
ax1.plot(data["delta"][~stable], data["a0"][~stable], "o", ms=3, color="#d7191c", label="unstable")
ax1.set_ylabel("a0")
ax1.set_title("Branch with finite-delay stability")
ax1.legend()
ax2.axhline(0.0, color="k", lw=0.8)
ax2.plot(data["delta"], data["max_re_lambda"], ".", ms=3)
ax2.set_ylabel("max Re lambda")
ax2.set_xlabel("delta")
for ax in (ax1, ax2):
    ax.grid(alpha=0.3)
"##;

const MAP_VALUE_BODY: &str = r##"delta = np.unique(data["delta"])
theta = np.unique(data["theta"])
v = data["value"].reshape(len(delta), len(theta))
finite = v[np.isfinite(v)]
lim = np.percentile(np.abs(finite), 99) if finite.size else 1.0
cmap = plt.get_cmap("RdBu_r").copy()
cmap.set_bad("#bbbbbb")
plt.figure(figsize=(6, 4.5))
plt.pcolormesh(theta, delta, np.ma.masked_invalid(v), shading="nearest", cmap=cmap,
               vmin=-lim, vmax=lim)
plt.colorbar(label="growth")
plt.contour(theta, delta, np.where(np.isfinite(v), v, lim), levels=[0.0],
            colors="k", linewidths=0.8)
plt.xlabel("theta")
plt.ylabel("delta")
plt.title("Growth rate over the solution tube")
"##;

const MAP_CLASS_BODY: &str = r##"delta = np.unique(data["delta"])
theta = np.unique(data["theta"])
cls = data["class"].reshape(len(delta), len(theta))
from matplotlib.colors import ListedColormap
cmap = ListedColormap(["#1a9641", "#fdae61", "#d7191c", "#bbbbbb"])
plt.figure(figsize=(6, 4.5))
plt.pcolormesh(theta, delta, cls, shading="nearest", cmap=cmap, vmin=-0.5, vmax=3.5)
plt.colorbar(ticks=[0, 1, 2, 3], label="0 stable / 1 weak / 2 strong / 3 none")
plt.xlabel("theta")
plt.ylabel("delta")
plt.title("Stability classes over the solution tube")
"##;

const MAP_PROJECTION_BODY: &str = r##"colors = {0: "#1a9641", 1: "#fdae61", 2: "#d7191c"}
labels = {0: "stable", 1: "weak", 2: "strong"}
plt.figure(figsize=(6, 4.5))
for code, color in colors.items():
    sel = data["class"] == code
    if sel.any():
        plt.plot(data["delta"][sel], data["a0"][sel], ".", ms=3, color=color,
                 label=labels[code])
plt.xlabel("delta")
plt.ylabel("a0")
plt.title("Classes projected to the (delta, a0) plane")
plt.legend()
plt.grid(alpha=0.3)
"##;

const SNAPSHOTS_BODY: &str = r##"t = np.unique(data["t"])
n = int(data["j"].max()) + 1
x = data["x"][:n]
amp = np.hypot(data["re"], data["im"]).reshape(len(t), n)
plt.figure(figsize=(6, 4.5))
plt.pcolormesh(x, t, amp, shading="nearest", cmap="viridis")
plt.colorbar(label="|A|")
plt.xlabel("x")
plt.ylabel("t")
plt.title("Field modulus over space and time")
"##;

const OBSERVABLES_BODY: &str = r##"fig, axes = plt.subplots(3, 1, figsize=(6, 8), sharex=True)
axes[0].plot(data["t"], data["mean_amp"], label="mean |A|")
axes[0].plot(data["t"], data["max_amp"], label="max |A|")
axes[0].set_ylabel("amplitude")
axes[0].legend()
axes[1].plot(data["t"], data["dominant_q"], label="dominant q")
axes[1].plot(data["t"], data["omega_est"], label="omega estimate")
axes[1].set_ylabel("q, omega")
axes[1].legend()
axes[2].plot(data["t"], data["defect_count"], drawstyle="steps-mid")
axes[2].set_ylabel("defects")
axes[2].set_xlabel("t")
for ax in axes:
    ax.grid(alpha=0.3)
"##;
