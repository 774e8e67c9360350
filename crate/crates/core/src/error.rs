use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("curve has {0} nodes, needs at least 8")]
    TooFewNodes(usize),
    #[error("x-coordinates not strictly increasing at node {index}")]
    NonMonotone { index: usize },
    #[error("non-positive or non-finite height at node {index}")]
    NegativeHeight { index: usize },
    #[error("closed end at node {index} is not on the axis")]
    OpenCap { index: usize },
    #[error("spacing {spacing} at node {index} outside factor 4 of mean {mean}")]
    UnevenSpacing { index: usize, spacing: f64, mean: f64 },
    #[error("consecutive points coincide at {index}")]
    RepeatedPoint { index: usize },
    #[error("region bounds are empty")]
    EmptyRegion,
    #[error("needs interior node (got index {index} of {len})")]
    NeedsInteriorNode { index: usize, len: usize },
    #[error("non-transverse overlap of length {length} near x = {x}")]
    NonTransverseOverlap { x: f64, length: f64 },
    #[error("target spacing {spacing} exceeds total length / 8 = {limit}")]
    SpacingTooLarge { spacing: f64, limit: f64 },
    #[error("target spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),
    #[error("curve is not closed on the axis")]
    NotClosed,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PancakeError {
    #[error("asymptotic regime only: t = {t} must be <= -10")]
    AsymptoticRegime { t: f64 },
    #[error("degenerate pancake: girth {girth} <= width {width}")]
    Degenerate { girth: f64, width: f64 },
    #[error("construction time must be negative, got {0}")]
    NonNegativeTime(f64),
    #[error("spacing {spacing} must be below width / 16 = {limit}")]
    SpacingTooCoarse { spacing: f64, limit: f64 },
    #[error("dimension n = {0} must be at least 2")]
    Dimension(usize),
    #[error("burn-in stopped by {kind} at t = {t}")]
    BurnIn { kind: String, t: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JoinError {
    #[error("geometry inconsistent: {0}")]
    GeometryInconsistent(String),
    #[error("{name} = {value} outside valid interval ({lo}, {hi})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("tangency residual {0} exceeds 1e-9")]
    Tangency(f64),
    #[error("gluing produced fold")]
    Fold,
    #[error("monotonicity of m in rho fails between rho = {0} and {1}")]
    NotMonotone(f64, f64),
    #[error(transparent)]
    Pancake(#[from] PancakeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid flow configuration: {0}")]
    Config(String),
    #[error("blown up at t = {t}: {reason} (component {component}, node {node})")]
    BlownUp {
        t: f64,
        reason: String,
        component: usize,
        node: usize,
    },
    #[error("state is not running")]
    NotRunning,
    #[error("no interior neck below pinch_eps")]
    NoNeck,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BarrierError {
    #[error("entire catenoid: no slab (n = 2)")]
    EntireCatenoid,
    #[error("invalid barrier parameter: {0}")]
    Parameter(String),
    #[error("time {t} beyond lifespan {lifespan}")]
    BeyondLifespan { t: f64, lifespan: f64 },
    #[error("shooting failed to bracket over r0 in [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("not a barrier configuration: {0}")]
    NotBarrier(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShootError {
    #[error("invalid bracket: classify({m_lo}) = {lo_label}, classify({m_hi}) = {hi_label}")]
    InvalidBracket {
        m_lo: f64,
        m_hi: f64,
        lo_label: String,
        hi_label: String,
    },
    #[error("undetermined classification at m = {0}")]
    Undetermined(f64),
    #[error("bisection exceeded 80 iterations")]
    TooManyIterations,
    #[error("margin delta too large/small: {0}")]
    Margin(String),
    #[error("invalid shooting setup: {0}")]
    Setup(String),
    #[error("critical trajectory lost at t = {t}: {reason}")]
    Tracking { t: f64, reason: String },
    #[error("window touches the axis (r lower bound {0} <= 0)")]
    WindowTouchesAxis(f64),
    #[error(transparent)]
    Join(#[from] JoinError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Pancake(#[from] PancakeError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("estimate inapplicable: {0}")]
    EstimateInapplicable(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {message}")]
    Csv { path: String, line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
