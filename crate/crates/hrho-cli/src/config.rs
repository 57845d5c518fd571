//! Run configuration: a flat `key = value` file with `#` comments.
//!
//! Parsing validates every field against the module preconditions before
//! any run starts and reports all errors at once, each with its line
//! number.  `emit_config` writes a canonical form that reparses to an equal
//! configuration (floats carry 17 significant digits).

use hrho_core::csvfmt::format_f64;
use hrho_core::exact::Scenario;
use hrho_core::grid::GridSpec;
use hrho_core::solver::TimeStepPolicy;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line number; 0 for whole-file errors (missing keys,
    /// cross-field constraints).
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            write!(f, "config: {}", self.message)
        }
    }
}

/// How the truncated boundary is driven; the barrier variant resolves to
/// the exact evolving cap of the hemisphere scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Frozen,
    Barrier,
    Extrapolate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuConfig {
    pub radii: Vec<f64>,
    pub pair_distance: f64,
    pub assert: NuAssert,
}

/// Assertion applied to the initial-datum profile.
/// decay: non-increasing within 1e-3 noise and below 0.2 at the largest
/// radius; plateau: at least 0.5 at every radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuAssert {
    None,
    Decay,
    Plateau,
}

#[derive(Debug, Clone, PartialEq)]
pub struct C2Config {
    pub beta: f64,
    pub gradient_bound: f64,
    pub height_offset: f64,
    /// Seed point (horizontal coordinates); the patch frame is the tangent
    /// frame there.
    pub seed: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnackConfig {
    pub direction: [f64; 3],
    pub t1: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityFloorConfig {
    pub point: [f64; 2],
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisjointnessConfig {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualConfig {
    pub samples: usize,
    pub dim: usize,
    pub rhos: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rho: f64,
    pub dim: usize,
    pub scenario: Scenario,
    pub half_width: f64,
    pub dx: f64,
    pub t_end: f64,
    pub time_step: TimeStepPolicy,
    pub boundary: BoundaryKind,
    pub convexity_floor: f64,
    pub snapshot_every: usize,
    pub seed: u64,
    pub nu: Option<NuConfig>,
    pub nu_preservation: bool,
    pub c2: Option<C2Config>,
    pub harnack: Option<HarnackConfig>,
    pub velocity_floor: Option<VelocityFloorConfig>,
    pub disjointness: Option<DisjointnessConfig>,
    pub dual: Option<DualConfig>,
    pub emit_geometry: bool,
    pub emit_svg: bool,
}

const KNOWN_KEYS: &[&str] = &[
    "rho",
    "n",
    "scenario",
    "scenario_a",
    "scenario_mu",
    "scenario_r0",
    "L",
    "dx",
    "t_end",
    "time_step",
    "cfl_safety",
    "dt",
    "boundary",
    "convexity_floor",
    "snapshot_every",
    "seed",
    "nu_profile",
    "nu_radii",
    "nu_pair_distance",
    "nu_assert",
    "nu_preservation",
    "c2_monitor",
    "c2_beta",
    "c2_gradient_bound",
    "c2_height",
    "c2_seed",
    "harnack",
    "harnack_p",
    "harnack_t1",
    "harnack_t2",
    "velocity_floor",
    "vf_x",
    "vf_t",
    "normal_disjointness",
    "nd_inner",
    "nd_outer",
    "nd_horizon",
    "dual_concavity",
    "dual_samples",
    "dual_dim",
    "dual_rhos",
    "emit_geometry",
    "emit_svg",
];

struct Raw<'a> {
    map: BTreeMap<&'a str, (usize, &'a str)>,
    errors: Vec<ConfigError>,
}

impl<'a> Raw<'a> {
    fn err(&mut self, line: usize, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            message: message.into(),
        });
    }

    fn take(&mut self, key: &str) -> Option<(usize, &'a str)> {
        self.map.get(key).copied()
    }

    fn f64_opt(&mut self, key: &str) -> Option<(usize, f64)> {
        let (line, text) = self.take(key)?;
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Some((line, v)),
            _ => {
                self.err(line, format!("{key} must be a finite number, got '{text}'"));
                None
            }
        }
    }

    fn f64_req(&mut self, key: &str) -> Option<(usize, f64)> {
        if self.map.contains_key(key) {
            self.f64_opt(key)
        } else {
            self.err(0, format!("missing key '{key}'"));
            None
        }
    }

    fn usize_opt(&mut self, key: &str, default: usize) -> usize {
        match self.take(key) {
            None => default,
            Some((line, text)) => match text.parse::<usize>() {
                Ok(v) => v,
                Err(_) => {
                    self.err(line, format!("{key} must be a non-negative integer, got '{text}'"));
                    default
                }
            },
        }
    }

    fn u64_opt(&mut self, key: &str, default: u64) -> u64 {
        match self.take(key) {
            None => default,
            Some((line, text)) => match text.parse::<u64>() {
                Ok(v) => v,
                Err(_) => {
                    self.err(line, format!("{key} must be an unsigned integer, got '{text}'"));
                    default
                }
            },
        }
    }

    fn flag(&mut self, key: &str) -> bool {
        match self.take(key) {
            None => false,
            Some((line, text)) => match text {
                "on" | "true" => true,
                "off" | "false" => false,
                _ => {
                    self.err(line, format!("{key} must be on or off, got '{text}'"));
                    false
                }
            },
        }
    }

    fn list(&mut self, key: &str) -> Option<(usize, Vec<f64>)> {
        let (line, text) = self.take(key)?;
        let mut out = Vec::new();
        for part in text.split(',') {
            match part.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => {
                    self.err(
                        line,
                        format!("{key} must be a comma-separated list of numbers, got '{text}'"),
                    );
                    return None;
                }
            }
        }
        Some((line, out))
    }
}

/// Parses and fully validates a configuration, reporting every error.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    let mut raw = Raw {
        map: BTreeMap::new(),
        errors: Vec::new(),
    };

    for (idx, full_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match full_line.find('#') {
            Some(pos) => &full_line[..pos],
            None => full_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            raw.err(line_no, format!("expected 'key = value', got '{line}'"));
            continue;
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        if !KNOWN_KEYS.contains(&key) {
            raw.err(line_no, format!("unknown key '{key}'"));
            continue;
        }
        if raw.map.contains_key(key) {
            raw.err(line_no, format!("duplicate key '{key}'"));
            continue;
        }
        // keys live as long as `text`
        let key: &str = KNOWN_KEYS.iter().find(|k| **k == key).unwrap();
        raw.map.insert(key, (line_no, value));
    }

    // core numeric fields
    let rho = raw.f64_req("rho").and_then(|(line, v)| {
        if v > 0.0 {
            Some(v)
        } else {
            raw.err(line, "rho must be > 0");
            None
        }
    });
    let dim = match raw.take("n") {
        None => {
            raw.err(0, "missing key 'n'");
            None
        }
        Some((line, text)) => match text.parse::<usize>() {
            Ok(v) if v == 1 || v == 2 => Some(v),
            _ => {
                raw.err(line, format!("n must be 1 or 2, got '{text}'"));
                None
            }
        },
    };
    let half_width = raw.f64_req("L").and_then(|(line, v)| {
        if v > 0.0 {
            Some(v)
        } else {
            raw.err(line, "L must be > 0");
            None
        }
    });
    let dx = raw.f64_req("dx").and_then(|(line, v)| {
        if v > 0.0 {
            Some(v)
        } else {
            raw.err(line, "dx must be > 0");
            None
        }
    });
    let t_end = raw.f64_req("t_end").and_then(|(line, v)| {
        if v >= 0.0 {
            Some(v)
        } else {
            raw.err(line, "t_end must be >= 0");
            None
        }
    });

    // grid alignment
    if let (Some(d), Some(l), Some(h)) = (dim, half_width, dx) {
        if let Err(e) = GridSpec::new(d, l, h) {
            raw.err(0, e.to_string());
        }
    }

    // scenario
    let scenario = match raw.take("scenario") {
        None => {
            raw.err(0, "missing key 'scenario'");
            None
        }
        Some((line, name)) => match name {
            "paraboloid" => Some(Scenario::Paraboloid),
            "scaled_paraboloid" => {
                raw.f64_req("scenario_a").and_then(|(aline, a)| {
                    if a > 0.0 {
                        Some(Scenario::ScaledParaboloid { coefficient: a })
                    } else {
                        raw.err(aline, "scenario_a must be > 0");
                        None
                    }
                })
            }
            "smoothed_cone" => raw.f64_req("scenario_mu").and_then(|(mline, mu)| {
                if mu > 0.0 {
                    Some(Scenario::SmoothedCone { smoothing: mu })
                } else {
                    raw.err(mline, "scenario_mu must be > 0");
                    None
                }
            }),
            "hemisphere" => raw.f64_req("scenario_r0").and_then(|(rline, r0)| {
                if r0 > 0.0 {
                    Some(Scenario::Hemisphere { initial_radius: r0 })
                } else {
                    raw.err(rline, "scenario_r0 must be > 0");
                    None
                }
            }),
            _ => {
                raw.err(line, format!("unknown scenario '{name}'"));
                None
            }
        },
    };

    // time stepping
    let time_step = match raw.take("time_step") {
        None | Some((_, "cfl")) => {
            let safety = raw
                .f64_opt("cfl_safety")
                .map(|(line, v)| {
                    if v > 0.0 && v <= 1.0 {
                        v
                    } else {
                        raw.err(line, "cfl_safety must lie in (0, 1]");
                        0.9
                    }
                })
                .unwrap_or(0.9);
            Some(TimeStepPolicy::ParabolicCfl { safety })
        }
        Some((_, "fixed")) => {
            if raw.map.contains_key("dt") {
                raw.f64_opt("dt").and_then(|(line, v)| {
                    if v > 0.0 {
                        Some(TimeStepPolicy::Fixed { dt: v })
                    } else {
                        raw.err(line, "dt must be > 0");
                        None
                    }
                })
            } else {
                raw.err(0, "time_step = fixed requires a dt key");
                None
            }
        }
        Some((line, other)) => {
            raw.err(line, format!("time_step must be cfl or fixed, got '{other}'"));
            None
        }
    };

    let boundary = match raw.take("boundary") {
        None | Some((_, "extrapolate")) => Some(BoundaryKind::Extrapolate),
        Some((_, "frozen")) => Some(BoundaryKind::Frozen),
        Some((_, "barrier")) => Some(BoundaryKind::Barrier),
        Some((line, other)) => {
            raw.err(
                line,
                format!("boundary must be frozen, barrier or extrapolate, got '{other}'"),
            );
            None
        }
    };
    if boundary == Some(BoundaryKind::Barrier) {
        if let Some(s) = &scenario {
            if !matches!(s, Scenario::Hemisphere { .. }) {
                raw.err(0, "boundary = barrier requires the hemisphere scenario");
            }
        }
    }

    let convexity_floor = raw
        .f64_opt("convexity_floor")
        .map(|(line, v)| {
            if v > 0.0 {
                v
            } else {
                raw.err(line, "convexity_floor must be > 0");
                1e-12
            }
        })
        .unwrap_or(1e-12);
    let snapshot_every = {
        let v = raw.usize_opt("snapshot_every", 100);
        if v == 0 {
            raw.err(0, "snapshot_every must be >= 1");
            100
        } else {
            v
        }
    };
    let seed = raw.u64_opt("seed", 42);

    // nu profile
    let nu_on = raw.flag("nu_profile");
    let nu = if nu_on {
        let radii = match raw.list("nu_radii") {
            Some((line, r)) => {
                if r.is_empty() || r.windows(2).any(|w| !(w[0] < w[1])) || r[0] <= 0.0 {
                    raw.err(line, "nu_radii must be a strictly increasing positive list");
                    None
                } else {
                    Some(r)
                }
            }
            None => {
                raw.err(0, "nu_profile = on requires nu_radii");
                None
            }
        };
        let pair_distance = raw
            .f64_opt("nu_pair_distance")
            .map(|(line, v)| {
                if v > 0.0 {
                    v
                } else {
                    raw.err(line, "nu_pair_distance must be > 0");
                    1.0
                }
            })
            .unwrap_or(1.0);
        let assert = match raw.take("nu_assert") {
            None | Some((_, "none")) => NuAssert::None,
            Some((_, "decay")) => NuAssert::Decay,
            Some((_, "plateau")) => NuAssert::Plateau,
            Some((line, other)) => {
                raw.err(
                    line,
                    format!("nu_assert must be none, decay or plateau, got '{other}'"),
                );
                NuAssert::None
            }
        };
        radii.map(|radii| NuConfig {
            radii,
            pair_distance,
            assert,
        })
    } else {
        None
    };
    let nu_preservation = raw.flag("nu_preservation");
    if nu_preservation && !nu_on {
        raw.err(0, "nu_preservation = on requires nu_profile = on");
    }

    // c2 monitor
    let c2 = if raw.flag("c2_monitor") {
        let beta = raw
            .f64_opt("c2_beta")
            .map(|(line, v)| {
                if v > 1.0 {
                    v
                } else {
                    raw.err(line, "c2_beta must be > 1");
                    2.0
                }
            })
            .unwrap_or(2.0);
        let gradient_bound = raw
            .f64_opt("c2_gradient_bound")
            .map(|(line, v)| {
                if v > 0.0 {
                    v
                } else {
                    raw.err(line, "c2_gradient_bound must be > 0");
                    0.5
                }
            })
            .unwrap_or(0.5);
        let height_offset = match raw.f64_req("c2_height") {
            Some((line, v)) if v <= 0.0 => {
                raw.err(line, "c2_height must be > 0");
                None
            }
            Some((_, v)) => Some(v),
            None => None,
        };
        let seed_pt = match raw.list("c2_seed") {
            None => Some([0.0, 0.0]),
            Some((line, v)) => match (dim, v.len()) {
                (Some(1), 1) => Some([v[0], 0.0]),
                (Some(2), 2) => Some([v[0], v[1]]),
                _ => {
                    raw.err(line, "c2_seed must list n coordinates");
                    None
                }
            },
        };
        match (height_offset, seed_pt) {
            (Some(h), Some(s)) => Some(C2Config {
                beta,
                gradient_bound,
                height_offset: h,
                seed: s,
            }),
            _ => None,
        }
    } else {
        None
    };

    // harnack
    let harnack = if raw.flag("harnack") {
        let p = match raw.list("harnack_p") {
            None => {
                raw.err(0, "harnack = on requires harnack_p");
                None
            }
            Some((line, v)) => {
                let p = match (dim, v.len()) {
                    (Some(1), 2) => Some([v[0], 0.0, v[1]]),
                    (Some(2), 3) => Some([v[0], v[1], v[2]]),
                    _ => {
                        raw.err(line, "harnack_p must list n + 1 components");
                        None
                    }
                };
                if let Some(p) = p {
                    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    if (norm - 1.0).abs() > 1e-9 || p[2] >= 0.0 {
                        raw.err(line, "harnack_p must be a unit vector with negative last component");
                        None
                    } else {
                        Some(p)
                    }
                } else {
                    None
                }
            }
        };
        let t1 = raw.f64_req("harnack_t1");
        let t2 = raw.f64_req("harnack_t2");
        match (p, t1, t2) {
            (Some(p), Some((l1, t1)), Some((_, t2))) => {
                if !(t1 > 0.0 && t2 >= t1) {
                    raw.err(l1, "harnack times must satisfy 0 < t1 <= t2");
                    None
                } else {
                    if let Some(te) = t_end {
                        if t2 > te {
                            raw.err(0, "harnack_t2 exceeds t_end");
                        }
                    }
                    Some(HarnackConfig {
                        direction: p,
                        t1,
                        t2,
                    })
                }
            }
            _ => None,
        }
    } else {
        None
    };

    // velocity floor
    let velocity_floor = if raw.flag("velocity_floor") {
        let point = match raw.list("vf_x") {
            None => Some([0.0, 0.0]),
            Some((line, v)) => match (dim, v.len()) {
                (Some(1), 1) => Some([v[0], 0.0]),
                (Some(2), 2) => Some([v[0], v[1]]),
                _ => {
                    raw.err(line, "vf_x must list n coordinates");
                    None
                }
            },
        };
        let time = match raw.f64_req("vf_t") {
            Some((line, v)) => {
                if v > 0.0 && t_end.map(|te| v <= te).unwrap_or(true) {
                    Some(v)
                } else {
                    raw.err(line, "vf_t must satisfy 0 < vf_t <= t_end");
                    None
                }
            }
            None => None,
        };
        match (point, time) {
            (Some(p), Some(t)) => Some(VelocityFloorConfig { point: p, time: t }),
            _ => None,
        }
    } else {
        None
    };

    // normal-image disjointness
    let disjointness = if raw.flag("normal_disjointness") {
        let inner = raw.f64_req("nd_inner");
        let outer = raw.f64_req("nd_outer");
        let horizon = raw
            .f64_opt("nd_horizon")
            .map(|(_, v)| v)
            .or(t_end);
        match (inner, outer, horizon) {
            (Some((li, i)), Some((_, o)), Some(h)) => {
                if !(o > i && i > 0.0) {
                    raw.err(li, "need nd_outer > nd_inner > 0");
                    None
                } else {
                    Some(DisjointnessConfig {
                        inner_radius: i,
                        outer_radius: o,
                        horizon: h,
                    })
                }
            }
            _ => None,
        }
    } else {
        None
    };

    // dual concavity
    let dual = if raw.flag("dual_concavity") {
        let samples = raw.usize_opt("dual_samples", 1000).max(1);
        let ddim = raw.usize_opt("dual_dim", 2).max(1);
        let rhos = match raw.list("dual_rhos") {
            None => rho.map(|r| vec![r]),
            Some((line, v)) => {
                if v.iter().all(|r| *r > 0.0) && !v.is_empty() {
                    Some(v)
                } else {
                    raw.err(line, "dual_rhos must be positive");
                    None
                }
            }
        };
        rhos.map(|rhos| DualConfig {
            samples,
            dim: ddim,
            rhos,
        })
    } else {
        None
    };

    let emit_geometry = raw.flag("emit_geometry");
    let emit_svg = raw.flag("emit_svg");

    if !raw.errors.is_empty() {
        return Err(raw.errors);
    }
    Ok(RunConfig {
        rho: rho.expect("validated"),
        dim: dim.expect("validated"),
        scenario: scenario.expect("validated"),
        half_width: half_width.expect("validated"),
        dx: dx.expect("validated"),
        t_end: t_end.expect("validated"),
        time_step: time_step.expect("validated"),
        boundary: boundary.expect("validated"),
        convexity_floor,
        snapshot_every,
        seed,
        nu,
        nu_preservation,
        c2,
        harnack,
        velocity_floor,
        disjointness,
        dual,
        emit_geometry,
        emit_svg,
    })
}

fn push_list(out: &mut String, key: &str, values: &[f64]) {
    out.push_str(key);
    out.push_str(" = ");
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format_f64(*v));
    }
    out.push('\n');
}

/// Canonical text form; `parse_config(emit_config(c))` equals `c`.
pub fn emit_config(config: &RunConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("rho", format_f64(config.rho));
    kv("n", config.dim.to_string());
    kv("scenario", config.scenario.name().to_string());
    match config.scenario {
        Scenario::ScaledParaboloid { coefficient } => kv("scenario_a", format_f64(coefficient)),
        Scenario::SmoothedCone { smoothing } => kv("scenario_mu", format_f64(smoothing)),
        Scenario::Hemisphere { initial_radius } => kv("scenario_r0", format_f64(initial_radius)),
        Scenario::Paraboloid => {}
    }
    kv("L", format_f64(config.half_width));
    kv("dx", format_f64(config.dx));
    kv("t_end", format_f64(config.t_end));
    match config.time_step {
        TimeStepPolicy::ParabolicCfl { safety } => {
            kv("time_step", "cfl".into());
            kv("cfl_safety", format_f64(safety));
        }
        TimeStepPolicy::Fixed { dt } => {
            kv("time_step", "fixed".into());
            kv("dt", format_f64(dt));
        }
    }
    kv(
        "boundary",
        match config.boundary {
            BoundaryKind::Frozen => "frozen",
            BoundaryKind::Barrier => "barrier",
            BoundaryKind::Extrapolate => "extrapolate",
        }
        .into(),
    );
    kv("convexity_floor", format_f64(config.convexity_floor));
    kv("snapshot_every", config.snapshot_every.to_string());
    kv("seed", config.seed.to_string());
    if let Some(nu) = &config.nu {
        kv("nu_profile", "on".into());
        push_list(&mut out, "nu_radii", &nu.radii);
        out.push_str("nu_pair_distance = ");
        out.push_str(&format_f64(nu.pair_distance));
        out.push('\n');
        out.push_str("nu_assert = ");
        out.push_str(match nu.assert {
            NuAssert::None => "none",
            NuAssert::Decay => "decay",
            NuAssert::Plateau => "plateau",
        });
        out.push('\n');
        if config.nu_preservation {
            out.push_str("nu_preservation = on\n");
        }
    }
    if let Some(c2) = &config.c2 {
        out.push_str("c2_monitor = on\n");
        out.push_str(&format!("c2_beta = {}\n", format_f64(c2.beta)));
        out.push_str(&format!(
            "c2_gradient_bound = {}\n",
            format_f64(c2.gradient_bound)
        ));
        out.push_str(&format!("c2_height = {}\n", format_f64(c2.height_offset)));
        let coords = if config.dim == 1 {
            vec![c2.seed[0]]
        } else {
            vec![c2.seed[0], c2.seed[1]]
        };
        push_list(&mut out, "c2_seed", &coords);
    }
    if let Some(h) = &config.harnack {
        out.push_str("harnack = on\n");
        let comps = if config.dim == 1 {
            vec![h.direction[0], h.direction[2]]
        } else {
            vec![h.direction[0], h.direction[1], h.direction[2]]
        };
        push_list(&mut out, "harnack_p", &comps);
        out.push_str(&format!("harnack_t1 = {}\n", format_f64(h.t1)));
        out.push_str(&format!("harnack_t2 = {}\n", format_f64(h.t2)));
    }
    if let Some(v) = &config.velocity_floor {
        out.push_str("velocity_floor = on\n");
        let coords = if config.dim == 1 {
            vec![v.point[0]]
        } else {
            vec![v.point[0], v.point[1]]
        };
        push_list(&mut out, "vf_x", &coords);
        out.push_str(&format!("vf_t = {}\n", format_f64(v.time)));
    }
    if let Some(d) = &config.disjointness {
        out.push_str("normal_disjointness = on\n");
        out.push_str(&format!("nd_inner = {}\n", format_f64(d.inner_radius)));
        out.push_str(&format!("nd_outer = {}\n", format_f64(d.outer_radius)));
        out.push_str(&format!("nd_horizon = {}\n", format_f64(d.horizon)));
    }
    if let Some(d) = &config.dual {
        out.push_str("dual_concavity = on\n");
        out.push_str(&format!("dual_samples = {}\n", d.samples));
        out.push_str(&format!("dual_dim = {}\n", d.dim));
        push_list(&mut out, "dual_rhos", &d.rhos);
    }
    if config.emit_geometry {
        out.push_str("emit_geometry = on\n");
    }
    if config.emit_svg {
        out.push_str("emit_svg = on\n");
    }
    out
}
