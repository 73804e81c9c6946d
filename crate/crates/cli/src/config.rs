//! Run configuration: TOML text in, fully validated [`RunConfig`] out.
//!
//! Parsing never stops at the first problem. Every unknown key, type mismatch
//! and out-of-range value is collected and returned together.

use std::fmt;
use std::path::PathBuf;

use pdx_core::pdx::PacketSpec;
use pdx_core::{Boundary, GridModel, Membership, Model, PhysicalParams, QuadratureSpec, RegionSpec, Rule, Side};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "PDX_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ResolutionIdentity,
    PdxPosition,
    PdxSameSide,
    PdxGeneralized,
    PdxMomentum,
    ZenoConvergence,
    CrossingDistribution,
    OracleSuite,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::ResolutionIdentity,
        ExperimentKind::PdxPosition,
        ExperimentKind::PdxSameSide,
        ExperimentKind::PdxGeneralized,
        ExperimentKind::PdxMomentum,
        ExperimentKind::ZenoConvergence,
        ExperimentKind::CrossingDistribution,
        ExperimentKind::OracleSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ResolutionIdentity => "resolution-identity",
            ExperimentKind::PdxPosition => "pdx-position",
            ExperimentKind::PdxSameSide => "pdx-same-side",
            ExperimentKind::PdxGeneralized => "pdx-generalized",
            ExperimentKind::PdxMomentum => "pdx-momentum",
            ExperimentKind::ZenoConvergence => "zeno-convergence",
            ExperimentKind::CrossingDistribution => "crossing-distribution",
            ExperimentKind::OracleSuite => "oracle-suite",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// What the experiment needs beyond the documented defaults.
    pub fn requirements(self) -> &'static str {
        match self {
            ExperimentKind::ResolutionIdentity => "a position region, or a momentum region on a periodic grid",
            ExperimentKind::PdxPosition | ExperimentKind::PdxSameSide => {
                "a [region.position] block and packets on the sides the expansion assumes"
            }
            ExperimentKind::PdxGeneralized => "a position region, or a momentum region on a periodic grid",
            ExperimentKind::PdxMomentum => "a [region.momentum] block and model.params.omega > 0",
            ExperimentKind::ZenoConvergence => "a [region.position] block and numeric.zeno.k_list with at least 3 ascending counts",
            ExperimentKind::CrossingDistribution => "a [region.position] block and numeric.crossing.horizons",
            ExperimentKind::OracleSuite => "nothing beyond model.params",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Free,
    Harmonic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsConfig {
    pub mass: f64,
    pub hbar: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub potential: PotentialConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeOwner {
    C,
    CBar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionConfig {
    Position {
        boundary: f64,
        side: Side,
        boundary_node: NodeOwner,
    },
    Momentum {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicingConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub n_slices: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmearingConfig {
    pub initial: PacketSpec,
    pub target: PacketSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-norm bound on `sum of crossing classes - I`.
    pub identity: f64,
    /// Bound on the class-amplitude sum against the direct amplitude.
    pub completeness: f64,
    /// Relative residual bound for the smeared expansions.
    pub residual: f64,
    /// Largest allowed `residual(refined) / residual(previous)` in a sweep.
    pub refinement_ratio: f64,
    /// Largest allowed `error(4K) / error(K)` in a Zeno study.
    pub zeno_ratio: f64,
    /// Bound on closed-form oracle consistency checks.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-11,
            completeness: 1e-10,
            residual: 5e-2,
            refinement_ratio: 0.6,
            zeno_ratio: 0.7,
            oracle: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZenoConfig {
    pub k_list: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingConfig {
    pub horizons: Vec<f64>,
}

/// Resolution levels for `sweep`; `n_points[i]` pairs with `quad_nodes[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_points: Vec<usize>,
    pub quad_nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericConfig {
    pub quadrature: QuadratureSpec,
    pub slicing: SlicingConfig,
    pub smearing: SmearingConfig,
    pub tolerances: Tolerances,
    pub zeno: ZenoConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing: Option<CrossingConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    CsvBundle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub stem: String,
    pub formats: Vec<ReportFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub model: ModelConfig,
    pub region: RegionConfig,
    pub numeric: NumericConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn grid(&self) -> pdx_core::Result<GridModel> {
        let g = &self.model.grid;
        GridModel::new(g.n_points, g.x_min, g.x_max, g.boundary)
    }

    pub fn params(&self) -> pdx_core::Result<PhysicalParams> {
        let p = &self.model.params;
        PhysicalParams::new(p.mass, p.hbar, p.omega)
    }

    pub fn model_on(&self, grid: GridModel) -> pdx_core::Result<Model> {
        let p = &self.model.params;
        match self.model.potential.kind {
            PotentialKind::Free => Model::free(grid, p.mass, p.hbar),
            PotentialKind::Harmonic => Model::harmonic(grid, p.mass, p.hbar, p.omega),
        }
    }

    pub fn model(&self) -> pdx_core::Result<Model> {
        self.model_on(self.grid()?)
    }

    pub fn region_spec(&self) -> RegionSpec {
        match self.region {
            RegionConfig::Position {
                boundary,
                side,
                boundary_node,
            } => RegionSpec::position(boundary)
                .with_side(side)
                .with_boundary_node(match boundary_node {
                    NodeOwner::C => Membership::C,
                    NodeOwner::CBar => Membership::CBar,
                }),
            RegionConfig::Momentum {} => RegionSpec::momentum(),
        }
    }

    pub fn is_momentum(&self) -> bool {
        matches!(self.region, RegionConfig::Momentum {})
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Dotted key path, e.g. `model.params.mass`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Every problem found in one config, in discovery order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} config error(s)", self.0.len())?;
        for e in &self.0 {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

struct Collector {
    errors: Vec<ConfigError>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn nearest<'a>(key: &str, allowed: &[&'a str]) -> Option<&'a str> {
    allowed
        .iter()
        .min_by(|a, b| {
            strsim::damerau_levenshtein(key, a)
                .cmp(&strsim::damerau_levenshtein(key, b))
                .then_with(|| a.cmp(b))
        })
        .copied()
}

impl Collector {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(ConfigError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn keys(&mut self, table: &Table, path: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let hint = match nearest(key, allowed) {
                    Some(n) => format!("unknown key; nearest valid key is `{}`", join(path, n)),
                    None => "unknown key; this block takes no keys".to_string(),
                };
                self.push(join(path, key), hint);
            }
        }
    }

    fn table<'a>(&mut self, parent: Option<&'a Table>, path: &str, key: &str) -> Option<&'a Table> {
        match parent?.get(key)? {
            Value::Table(t) => Some(t),
            other => {
                self.push(join(path, key), format!("expected a table, found {}", other.type_str()));
                None
            }
        }
    }

    fn float(&mut self, t: Option<&Table>, path: &str, key: &str, default: f64) -> f64 {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Float(v)) => *v,
            Some(Value::Integer(v)) => *v as f64,
            Some(other) => {
                self.push(join(path, key), format!("expected a number, found {}", other.type_str()));
                default
            }
        }
    }

    fn count(&mut self, t: Option<&Table>, path: &str, key: &str, default: usize) -> usize {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Integer(v)) if *v >= 0 => *v as usize,
            Some(Value::Integer(v)) => {
                self.push(join(path, key), format!("must be a non-negative integer, got {v}"));
                default
            }
            Some(other) => {
                self.push(join(path, key), format!("expected an integer, found {}", other.type_str()));
                default
            }
        }
    }

    fn word(&mut self, t: Option<&Table>, path: &str, key: &str, default: &str) -> String {
        match t.and_then(|t| t.get(key)) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(other) => {
                self.push(join(path, key), format!("expected a string, found {}", other.type_str()));
                default.to_string()
            }
        }
    }

    fn choice<T: Copy>(&mut self, t: Option<&Table>, path: &str, key: &str, default: T, options: &[(&str, T)]) -> T {
        let Some(raw) = t.and_then(|t| t.get(key)) else {
            return default;
        };
        let Value::String(s) = raw else {
            self.push(join(path, key), format!("expected a string, found {}", raw.type_str()));
            return default;
        };
        if let Some((_, v)) = options.iter().find(|(name, _)| name == s) {
            return *v;
        }
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        self.push(
            join(path, key),
            format!("unknown value `{s}`; expected one of {}", names.join(", ")),
        );
        default
    }

    fn list<T>(&mut self, t: Option<&Table>, path: &str, key: &str, item: impl Fn(&Value) -> Option<T>, what: &str) -> Option<Vec<T>> {
        let raw = t.and_then(|t| t.get(key))?;
        let Value::Array(items) = raw else {
            self.push(join(path, key), format!("expected an array of {what}, found {}", raw.type_str()));
            return None;
        };
        let parsed: Option<Vec<T>> = items.iter().map(item).collect();
        if parsed.is_none() {
            self.push(join(path, key), format!("every entry must be {what}"));
        }
        parsed
    }

    fn positive(&mut self, path: &str, value: f64) {
        if !(value > 0.0 && value.is_finite()) {
            self.push(path, format!("must be positive and finite, got {value}"));
        }
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_count(v: &Value) -> Option<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Some(*i as usize),
        _ => None,
    }
}

const ROOT_KEYS: &[&str] = &["experiment", "model", "region", "numeric", "output"];
const MODEL_KEYS: &[&str] = &["grid", "params", "potential"];
const GRID_KEYS: &[&str] = &["n_points", "x_min", "x_max", "boundary"];
const PARAMS_KEYS: &[&str] = &["mass", "hbar", "omega"];
const POTENTIAL_KEYS: &[&str] = &["kind"];
const REGION_KEYS: &[&str] = &["position", "momentum"];
const POSITION_KEYS: &[&str] = &["boundary", "side", "boundary_node"];
const NUMERIC_KEYS: &[&str] = &["quadrature", "slicing", "smearing", "tolerances", "zeno", "crossing", "sweep"];
const QUADRATURE_KEYS: &[&str] = &["rule", "n_nodes"];
const SLICING_KEYS: &[&str] = &["t_start", "t_end", "n_slices"];
const SMEARING_KEYS: &[&str] = &["initial", "target"];
const PACKET_KEYS: &[&str] = &["center", "width", "wavenumber"];
const TOLERANCE_KEYS: &[&str] = &["identity", "completeness", "residual", "refinement_ratio", "zeno_ratio", "oracle"];
const ZENO_KEYS: &[&str] = &["k_list"];
const CROSSING_KEYS: &[&str] = &["horizons"];
const SWEEP_KEYS: &[&str] = &["n_points", "quad_nodes"];
const OUTPUT_KEYS: &[&str] = &["dir", "stem", "formats"];

/// Parses and validates a config.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_with(text, None, &[])
}

/// Parses a config after applying `--set key=value` overrides.
///
/// `default_experiment` fills `experiment` when the text leaves it out.
/// Overrides are applied in order, so later ones win.
pub fn parse_config_with(text: &str, default_experiment: Option<ExperimentKind>, overrides: &[String]) -> Result<RunConfig, ConfigErrors> {
    let mut root: Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![ConfigError {
            path: String::new(),
            message: format!("not valid TOML: {}", e.message()),
        }])
    })?;
    let mut errors = Vec::new();
    for o in overrides {
        if let Err(e) = apply_override(&mut root, o) {
            errors.push(e);
        }
    }
    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }
    if let (false, Some(kind)) = (root.contains_key("experiment"), default_experiment) {
        root.insert("experiment".into(), Value::String(kind.name().into()));
    }
    from_table(&root)
}

/// Sets a dotted key, creating intermediate tables. The value is read as a TOML
/// literal when it parses as one and as a bare string otherwise.
pub fn apply_override(root: &mut Table, assignment: &str) -> Result<(), ConfigError> {
    let Some((key, raw)) = assignment.split_once('=') else {
        return Err(ConfigError {
            path: assignment.to_string(),
            message: "override must look like key=value".into(),
        });
    };
    let key = key.trim();
    let raw = raw.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError {
            path: key.to_string(),
            message: "override key has an empty segment".into(),
        });
    }
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let mut table = root;
    for (i, part) in parts[..parts.len() - 1].iter().enumerate() {
        let entry = table.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        match entry {
            Value::Table(t) => table = t,
            _ => {
                return Err(ConfigError {
                    path: parts[..=i].join("."),
                    message: "override descends into a value that is not a table".into(),
                })
            }
        }
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn packet(c: &mut Collector, parent: Option<&Table>, path: &str, key: &str, default: PacketSpec) -> PacketSpec {
    let p = join(path, key);
    let t = c.table(parent, path, key);
    if let Some(t) = t {
        c.keys(t, &p, PACKET_KEYS);
    }
    let center = c.float(t, &p, "center", default.center);
    let width = c.float(t, &p, "width", default.width);
    let wavenumber = c.float(t, &p, "wavenumber", default.wavenumber);
    c.positive(&join(&p, "width"), width);
    PacketSpec::new(center, width).with_wavenumber(wavenumber)
}

fn from_table(root: &Table) -> Result<RunConfig, ConfigErrors> {
    let mut c = Collector { errors: Vec::new() };
    c.keys(root, "", ROOT_KEYS);

    let experiment = match root.get("experiment") {
        None => {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            c.push("experiment", format!("missing; choose one of {}", names.join(", ")));
            None
        }
        Some(Value::String(s)) => match ExperimentKind::from_name(s) {
            Some(k) => Some(k),
            None => {
                let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                let hint = nearest(s, &names).unwrap_or("resolution-identity");
                c.push("experiment", format!("unknown experiment `{s}`; nearest is `{hint}`"));
                None
            }
        },
        Some(other) => {
            c.push("experiment", format!("expected a string, found {}", other.type_str()));
            None
        }
    };

    let model_t = c.table(Some(root), "", "model");
    if let Some(t) = model_t {
        c.keys(t, "model", MODEL_KEYS);
    }
    let grid_t = c.table(model_t, "model", "grid");
    if let Some(t) = grid_t {
        c.keys(t, "model.grid", GRID_KEYS);
    }
    let grid = GridConfig {
        n_points: c.count(grid_t, "model.grid", "n_points", 256),
        x_min: c.float(grid_t, "model.grid", "x_min", -20.0),
        x_max: c.float(grid_t, "model.grid", "x_max", 20.0),
        boundary: c.choice(
            grid_t,
            "model.grid",
            "boundary",
            Boundary::HardWall,
            &[("hard-wall", Boundary::HardWall), ("periodic", Boundary::Periodic)],
        ),
    };
    if grid.n_points < pdx_core::grid::MIN_POINTS {
        c.push(
            "model.grid.n_points",
            format!("needs at least {} nodes, got {}", pdx_core::grid::MIN_POINTS, grid.n_points),
        );
    }
    if !(grid.x_max > grid.x_min) {
        c.push(
            "model.grid.x_max",
            format!("must exceed model.grid.x_min ({} <= {})", grid.x_max, grid.x_min),
        );
    }

    let params_t = c.table(model_t, "model", "params");
    if let Some(t) = params_t {
        c.keys(t, "model.params", PARAMS_KEYS);
    }
    let potential_t = c.table(model_t, "model", "potential");
    if let Some(t) = potential_t {
        c.keys(t, "model.potential", POTENTIAL_KEYS);
    }
    let kind = c.choice(
        potential_t,
        "model.potential",
        "kind",
        PotentialKind::Free,
        &[("free", PotentialKind::Free), ("harmonic", PotentialKind::Harmonic)],
    );
    let params = ParamsConfig {
        mass: c.float(params_t, "model.params", "mass", 1.0),
        hbar: c.float(params_t, "model.params", "hbar", 1.0),
        omega: c.float(params_t, "model.params", "omega", 0.0),
    };
    c.positive("model.params.mass", params.mass);
    c.positive("model.params.hbar", params.hbar);
    if !(params.omega >= 0.0 && params.omega.is_finite()) {
        c.push("model.params.omega", format!("must be >= 0 and finite, got {}", params.omega));
    } else if kind == PotentialKind::Harmonic && params.omega == 0.0 {
        c.push("model.params.omega", "a harmonic potential needs omega > 0");
    }

    let region_t = c.table(Some(root), "", "region");
    if let Some(t) = region_t {
        c.keys(t, "region", REGION_KEYS);
    }
    let pos_t = c.table(region_t, "region", "position");
    let mom_t = c.table(region_t, "region", "momentum");
    let region = match (pos_t, mom_t) {
        (Some(_), Some(_)) => {
            c.push("region", "give exactly one of [region.position] or [region.momentum], not both");
            None
        }
        (None, Some(t)) => {
            c.keys(t, "region.momentum", &[]);
            Some(RegionConfig::Momentum {})
        }
        (pos, None) => {
            if let Some(t) = pos {
                c.keys(t, "region.position", POSITION_KEYS);
            }
            Some(RegionConfig::Position {
                boundary: c.float(pos, "region.position", "boundary", 0.0),
                side: c.choice(
                    pos,
                    "region.position",
                    "side",
                    Side::Above,
                    &[("above", Side::Above), ("below", Side::Below)],
                ),
                boundary_node: c.choice(
                    pos,
                    "region.position",
                    "boundary_node",
                    NodeOwner::C,
                    &[("c", NodeOwner::C), ("c-bar", NodeOwner::CBar)],
                ),
            })
        }
    };

    let numeric_t = c.table(Some(root), "", "numeric");
    if let Some(t) = numeric_t {
        c.keys(t, "numeric", NUMERIC_KEYS);
    }
    let quad_t = c.table(numeric_t, "numeric", "quadrature");
    if let Some(t) = quad_t {
        c.keys(t, "numeric.quadrature", QUADRATURE_KEYS);
    }
    let rule = c.choice(
        quad_t,
        "numeric.quadrature",
        "rule",
        Rule::Simpson,
        &[("simpson", Rule::Simpson), ("trapezoid", Rule::Trapezoid)],
    );
    let n_nodes = c.count(quad_t, "numeric.quadrature", "n_nodes", 129);
    let quadrature = match QuadratureSpec::new(rule, n_nodes) {
        Ok(q) => q,
        Err(e) => {
            c.push("numeric.quadrature.n_nodes", e.to_string());
            QuadratureSpec { rule, n_nodes }
        }
    };

    let slicing_t = c.table(numeric_t, "numeric", "slicing");
    if let Some(t) = slicing_t {
        c.keys(t, "numeric.slicing", SLICING_KEYS);
    }
    let slicing = SlicingConfig {
        t_start: c.float(slicing_t, "numeric.slicing", "t_start", 0.0),
        t_end: c.float(slicing_t, "numeric.slicing", "t_end", 1.0),
        n_slices: c.count(slicing_t, "numeric.slicing", "n_slices", 32),
    };
    if !(slicing.t_end > slicing.t_start) {
        c.push(
            "numeric.slicing.t_end",
            format!("must exceed t_start ({} <= {})", slicing.t_end, slicing.t_start),
        );
    }
    if slicing.n_slices == 0 {
        c.push("numeric.slicing.n_slices", "must be at least 1");
    }

    let smear_t = c.table(numeric_t, "numeric", "smearing");
    if let Some(t) = smear_t {
        c.keys(t, "numeric.smearing", SMEARING_KEYS);
    }
    let smearing = SmearingConfig {
        initial: packet(&mut c, smear_t, "numeric.smearing", "initial", PacketSpec::new(-2.0, 0.5)),
        target: packet(&mut c, smear_t, "numeric.smearing", "target", PacketSpec::new(2.0, 0.5)),
    };

    let tol_t = c.table(numeric_t, "numeric", "tolerances");
    if let Some(t) = tol_t {
        c.keys(t, "numeric.tolerances", TOLERANCE_KEYS);
    }
    let d = Tolerances::default();
    let tolerances = Tolerances {
        identity: c.float(tol_t, "numeric.tolerances", "identity", d.identity),
        completeness: c.float(tol_t, "numeric.tolerances", "completeness", d.completeness),
        residual: c.float(tol_t, "numeric.tolerances", "residual", d.residual),
        refinement_ratio: c.float(tol_t, "numeric.tolerances", "refinement_ratio", d.refinement_ratio),
        zeno_ratio: c.float(tol_t, "numeric.tolerances", "zeno_ratio", d.zeno_ratio),
        oracle: c.float(tol_t, "numeric.tolerances", "oracle", d.oracle),
    };
    for (key, v) in [
        ("identity", tolerances.identity),
        ("completeness", tolerances.completeness),
        ("residual", tolerances.residual),
        ("refinement_ratio", tolerances.refinement_ratio),
        ("zeno_ratio", tolerances.zeno_ratio),
        ("oracle", tolerances.oracle),
    ] {
        c.positive(&join("numeric.tolerances", key), v);
    }

    let zeno_t = c.table(numeric_t, "numeric", "zeno");
    if let Some(t) = zeno_t {
        c.keys(t, "numeric.zeno", ZENO_KEYS);
    }
    let k_list = c
        .list(zeno_t, "numeric.zeno", "k_list", as_count, "non-negative integers")
        .unwrap_or_else(|| vec![8, 32, 128]);
    if k_list.len() < 3 || k_list[0] == 0 || k_list.windows(2).any(|w| w[0] >= w[1]) {
        c.push(
            "numeric.zeno.k_list",
            format!("needs at least 3 positive, strictly ascending counts, got {k_list:?}"),
        );
    }

    let crossing_t = c.table(numeric_t, "numeric", "crossing");
    let crossing = crossing_t.and_then(|t| {
        c.keys(t, "numeric.crossing", CROSSING_KEYS);
        let horizons = c.list(Some(t), "numeric.crossing", "horizons", as_float, "numbers")?;
        if horizons.is_empty() || horizons.iter().any(|&h| !(h > slicing.t_start)) || horizons.windows(2).any(|w| w[0] >= w[1]) {
            c.push(
                "numeric.crossing.horizons",
                format!(
                    "needs ascending horizons after numeric.slicing.t_start = {}, got {horizons:?}",
                    slicing.t_start
                ),
            );
        }
        Some(CrossingConfig { horizons })
    });

    let sweep_t = c.table(numeric_t, "numeric", "sweep");
    let sweep = sweep_t.and_then(|t| {
        c.keys(t, "numeric.sweep", SWEEP_KEYS);
        let n_points = c.list(Some(t), "numeric.sweep", "n_points", as_count, "non-negative integers")?;
        let quad_nodes = c.list(Some(t), "numeric.sweep", "quad_nodes", as_count, "non-negative integers")?;
        if n_points.len() < 2 || n_points.len() != quad_nodes.len() {
            c.push(
                "numeric.sweep",
                format!(
                    "n_points and quad_nodes need the same length of at least 2 (got {} and {})",
                    n_points.len(),
                    quad_nodes.len()
                ),
            );
        }
        for (i, &q) in quad_nodes.iter().enumerate() {
            if let Err(e) = QuadratureSpec::new(rule, q) {
                c.push(format!("numeric.sweep.quad_nodes[{i}]"), e.to_string());
            }
        }
        for (i, &n) in n_points.iter().enumerate() {
            if n < pdx_core::grid::MIN_POINTS {
                c.push(
                    format!("numeric.sweep.n_points[{i}]"),
                    format!("needs at least {} nodes", pdx_core::grid::MIN_POINTS),
                );
            }
        }
        Some(SweepConfig { n_points, quad_nodes })
    });

    let output_t = c.table(Some(root), "", "output");
    if let Some(t) = output_t {
        c.keys(t, "output", OUTPUT_KEYS);
    }
    let dir = PathBuf::from(c.word(output_t, "output", "dir", "pdx-out"));
    let stem = c.word(output_t, "output", "stem", "report");
    if stem.is_empty() || stem.contains(['/', '\\']) {
        c.push("output.stem", format!("must be a plain file stem, got `{stem}`"));
    }
    let formats = c
        .list(
            output_t,
            "output",
            "formats",
            |v| match v.as_str() {
                Some("json") => Some(ReportFormat::Json),
                Some("csv_bundle") => Some(ReportFormat::CsvBundle),
                _ => None,
            },
            "\"json\" or \"csv_bundle\"",
        )
        .unwrap_or_else(|| vec![ReportFormat::Json, ReportFormat::CsvBundle]);
    if formats.is_empty() {
        c.push("output.formats", "name at least one format");
    }

    if let (Some(kind), Some(region)) = (experiment, &region) {
        let momentum = matches!(region, RegionConfig::Momentum {});
        let periodic = grid.boundary == Boundary::Periodic;
        let problem = match kind {
            ExperimentKind::PdxMomentum if !momentum || params.omega == 0.0 => true,
            ExperimentKind::PdxPosition
            | ExperimentKind::PdxSameSide
            | ExperimentKind::ZenoConvergence
            | ExperimentKind::CrossingDistribution
                if momentum =>
            {
                true
            }
            ExperimentKind::ResolutionIdentity | ExperimentKind::PdxGeneralized if momentum && !periodic => true,
            ExperimentKind::CrossingDistribution if crossing_t.is_none() => true,
            _ => false,
        };
        if problem {
            c.push("experiment", format!("{kind} requires {}", kind.requirements()));
        }
    }

    match (experiment, region) {
        (Some(experiment), Some(region)) if c.errors.is_empty() => Ok(RunConfig {
            experiment,
            model: ModelConfig {
                grid,
                params,
                potential: PotentialConfig { kind },
            },
            region,
            numeric: NumericConfig {
                quadrature,
                slicing,
                smearing,
                tolerances,
                zeno: ZenoConfig { k_list },
                crossing,
                sweep,
            },
            output: OutputConfig { dir, stem, formats },
        }),
        _ => Err(ConfigErrors(c.errors)),
    }
}

/// Default `output.dir` override from the environment, applied before `--set`.
pub fn env_output_override() -> Option<String> {
    std::env::var(OUTPUT_DIR_ENV)
        .ok()
        .filter(|v| !v.is_empty())
        .map(|v| format!("output.dir={}", toml::Value::String(v)))
}
