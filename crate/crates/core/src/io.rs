//! Run configuration, canonical JSON, hashing and the on-disk layout of
//! curves and traces.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::barrier::BarrierCurve;
use crate::curve::{Point, ProfileGraph, Region};
use crate::error::IoError;
use crate::flow::{FlowConfig, FlowEvent, FlowState, FlowTrace, Status};
use crate::join::NeckParam;
use crate::pancake::PancakeSpec;
use crate::shoot::{Schedule, ShootConfig, TrackingConfig};

/// Initial data of a single evolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Two copies of the configured pancake glued by a neck arc.
    Joined { neck: NeckParam, gap_half: f64 },
    Sphere { radius: f64, center: f64 },
    /// Flat profile with open ends at `x0` and `x1`.
    Cylinder { radius: f64, x0: f64, x1: f64 },
    /// Two spheres joined by a circular neck arc with minimum `neck`.
    Dumbbell { sphere_radius: f64, neck: f64, arc_radius: f64 },
}

/// Shooting parameters apart from the flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootSettings {
    pub m_threshold: f64,
    pub tol_m: f64,
    pub delta: f64,
    pub gap_half: f64,
    pub band: (f64, f64),
    pub band_unit: f64,
    pub tracking: TrackingConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySettings {
    pub window: Region,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSettings {
    pub barriers: Vec<BarrierCurve>,
    /// Area levels as fractions of the initial girth.
    pub c_fractions: Vec<f64>,
}

/// Every parameter of a run in one validated record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub flow: FlowConfig,
    pub initial: InitialSpec,
    pub pancake: PancakeSpec,
    pub schedule: Schedule,
    pub shoot: ShootSettings,
    pub study: StudySettings,
    pub diagnostics: DiagnosticsSettings,
    /// Worker cap for `stack` and `study`; `PANCAKE_THREADS` overrides it.
    pub threads: Option<usize>,
    pub output_dir: String,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), IoError> {
        let bad = |m: String| Err(IoError::Config(m));
        self.shoot_config().validate().or_else(|e| bad(e.to_string()))?;
        self.pancake.validate().or_else(|e| bad(format!("pancake: {e}")))?;
        if self.schedule.s.is_empty() {
            return bad("schedule.s is empty".into());
        }
        if let Some(s) = self.schedule.s.iter().find(|&&s| !(s < 0.0)) {
            return bad(format!("schedule time {s} must be negative"));
        }
        if self.schedule.s.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("schedule.s must be strictly decreasing".into());
        }
        if self.schedule.n != self.flow.n || self.pancake.n != self.flow.n {
            return bad(format!(
                "dimensions disagree: flow n = {}, pancake n = {}, schedule n = {}",
                self.flow.n, self.pancake.n, self.schedule.n
            ));
        }
        if !(self.study.window.r.0 > 0.0) {
            return bad(format!("study window must stay off the axis, got r >= {}", self.study.window.r.0));
        }
        if !(self.study.window.x.0 < self.study.window.x.1 && self.study.window.r.0 < self.study.window.r.1) {
            return bad("study window is empty".into());
        }
        if self.diagnostics.c_fractions.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
            return bad("diagnostics.c_fractions must lie in (0, 1)".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        match &self.initial {
            InitialSpec::Joined { gap_half, .. } if !(*gap_half > 0.0) => {
                bad(format!("initial.gap_half = {gap_half} must be positive"))
            }
            InitialSpec::Sphere { radius, .. } if !(*radius > 0.0) => {
                bad(format!("initial.radius = {radius} must be positive"))
            }
            InitialSpec::Cylinder { radius, x0, x1 } if !(*radius > 0.0 && x0 < x1) => {
                bad(format!("cylinder needs radius > 0 and x0 < x1, got {radius}, [{x0}, {x1}]"))
            }
            InitialSpec::Dumbbell {
                sphere_radius,
                neck,
                arc_radius,
            } if !(*sphere_radius > 0.0 && *neck > 0.0 && *arc_radius > 0.0 && *neck < *sphere_radius) => {
                bad("dumbbell needs positive radii and a neck below the sphere radius".into())
            }
            _ => Ok(()),
        }
    }

    pub fn shoot_config(&self) -> ShootConfig {
        let s = &self.shoot;
        ShootConfig {
            flow: self.flow.clone(),
            m_threshold: s.m_threshold,
            tol_m: s.tol_m,
            delta: s.delta,
            gap_half: s.gap_half,
            band: s.band,
            band_unit: s.band_unit,
            tracking: s.tracking.clone(),
        }
    }

    /// Parses and validates a configuration document.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, IoError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|source| IoError::Json {
            path: origin.to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        Self::from_json(&read(path)?, &path.display().to_string())
    }
}

/// Pretty JSON with sorted keys and shortest round-trip floats, ending in a
/// newline. Equal values always produce equal bytes.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    // `serde_json::Map` is ordered by key, so a round trip through `Value`
    // sorts every object.
    let v = serde_json::to_value(value).expect("serializable value");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable value");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Whether any object key in a JSON document mentions a seed.
pub fn mentions_seed(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.iter().any(|(k, v)| k.to_lowercase().contains("seed") || mentions_seed(v)),
        Value::Array(a) => a.iter().any(mentions_seed),
        _ => false,
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a file (creating parent directories) and returns its SHA-256.
pub fn write_file(path: &Path, contents: &str) -> Result<String, IoError> {
    let io = |source| IoError::File {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)?;
    Ok(sha256_hex(contents.as_bytes()))
}

/// `x,r` CSV of a polyline, one node per row.
pub fn curve_csv(points: &[Point]) -> String {
    let mut out = String::from("x,r\n");
    for p in points {
        out.push_str(&format!("{},{}\n", p.x, p.r));
    }
    out
}

pub fn parse_curve_csv(text: &str, origin: &str) -> Result<Vec<Point>, IoError> {
    let err = |line: usize, message: String| IoError::Csv {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "x,r" => {}
        _ => return Err(err(1, "expected header `x,r`".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let mut num = |name: &str| -> Result<f64, IoError> {
            it.next()
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| err(i + 1, format!("bad {name} value in `{line}`")))
        };
        let (x, r) = (num("x")?, num("r")?);
        if it.next().is_some() {
            return Err(err(i + 1, "expected two columns".into()));
        }
        out.push(Point::new(x, r));
    }
    Ok(out)
}

pub fn read_curve(path: &Path) -> Result<Vec<Point>, IoError> {
    parse_curve_csv(&read(path)?, &path.display().to_string())
}

/// Reads a graph whose ends are closed exactly where the height is zero.
pub fn read_profile(path: &Path) -> Result<ProfileGraph, IoError> {
    let pts = read_curve(path)?;
    let closed = [pts.first().is_some_and(|p| p.r == 0.0), pts.last().is_some_and(|p| p.r == 0.0)];
    Ok(ProfileGraph::new(pts, closed)?)
}

/// One stored state of a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub t: f64,
    pub status: Status,
    pub files: Vec<String>,
    pub closed_ends: Vec<[bool; 2]>,
}

/// `manifest.json` of a trace directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceManifest {
    pub flow: FlowConfig,
    pub events: Vec<FlowEvent>,
    pub extinction_time: Option<f64>,
    pub failure: Option<crate::flow::Failure>,
    pub snapshots: Vec<SnapshotEntry>,
    /// SHA-256 of every file written next to the manifest.
    pub files: BTreeMap<String, String>,
}

/// File name of component `k` at time `t`.
pub fn snapshot_name(t: f64, k: usize) -> String {
    format!("{t:.6}_{k}.csv")
}

/// Writes the snapshots of `trace` as CSVs plus `events.log`, and returns
/// the manifest (not yet written).
pub fn write_trace(dir: &Path, trace: &FlowTrace) -> Result<TraceManifest, IoError> {
    let mut files = BTreeMap::new();
    let mut snapshots = Vec::new();
    for state in trace.states() {
        let mut names = Vec::new();
        for (k, comp) in state.components.iter().enumerate() {
            let name = snapshot_name(state.t, k);
            files.insert(name.clone(), write_file(&dir.join(&name), &curve_csv(comp.nodes()))?);
            names.push(name);
        }
        snapshots.push(SnapshotEntry {
            t: state.t,
            status: state.status,
            files: names,
            closed_ends: state.components.iter().map(|c| c.closed_ends()).collect(),
        });
    }
    files.insert("events.log".into(), write_file(&dir.join("events.log"), &trace.event_log())?);
    Ok(TraceManifest {
        flow: trace.config.clone(),
        events: trace.events.clone(),
        extinction_time: trace.extinction_time,
        failure: trace.failure.clone(),
        snapshots,
        files,
    })
}

/// Rebuilds a trace from a directory written by [`write_trace`] whose
/// manifest stores the [`TraceManifest`] under the key `trace`.
pub fn read_trace(dir: &Path) -> Result<FlowTrace, IoError> {
    let path = dir.join("manifest.json");
    let text = read(&path)?;
    let origin = path.display().to_string();
    let doc: Value = serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: origin.clone(),
        source,
    })?;
    let inner = doc
        .get("trace")
        .cloned()
        .ok_or_else(|| IoError::Config(format!("{origin} holds no trace")))?;
    let m: TraceManifest = serde_json::from_value(inner).map_err(|source| IoError::Json { path: origin, source })?;
    let mut states = Vec::with_capacity(m.snapshots.len());
    for snap in &m.snapshots {
        let mut comps = Vec::new();
        for (name, ends) in snap.files.iter().zip(&snap.closed_ends) {
            comps.push(ProfileGraph::new(read_curve(&dir.join(name))?, *ends)?);
        }
        let mut s = FlowState::new(comps);
        s.t = snap.t;
        s.status = snap.status;
        states.push(s);
    }
    let first = states
        .first()
        .cloned()
        .ok_or_else(|| IoError::Config(format!("{} lists no snapshots", dir.display())))?;
    let last = states.last().cloned().unwrap_or_else(|| first.clone());
    Ok(FlowTrace {
        config: m.flow,
        initial: first,
        snapshots: states,
        final_state: last,
        events: m.events,
        extinction_time: m.extinction_time,
        failure: m.failure,
    })
}
