//! Scenario configuration: a single JSON document with `kind`, `parameters`,
//! `output_path` and `seed`. Parameter keys carry their unit as a suffix.

use std::fmt;

use fluxlab::CODATA;
use serde_json::{Map, Number, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    LoopPhase,
    TwoBodyDynamics,
    CageCancellation,
    ShieldDesign,
    CovarianceCheck,
    OverlapConvergence,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::LoopPhase,
        ScenarioKind::TwoBodyDynamics,
        ScenarioKind::CageCancellation,
        ScenarioKind::ShieldDesign,
        ScenarioKind::CovarianceCheck,
        ScenarioKind::OverlapConvergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::LoopPhase => "loop_phase",
            ScenarioKind::TwoBodyDynamics => "two_body_dynamics",
            ScenarioKind::CageCancellation => "cage_cancellation",
            ScenarioKind::ShieldDesign => "shield_design",
            ScenarioKind::CovarianceCheck => "covariance_check",
            ScenarioKind::OverlapConvergence => "overlap_convergence",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn schema(self) -> &'static [Field] {
        match self {
            ScenarioKind::LoopPhase => LOOP_PHASE,
            ScenarioKind::TwoBodyDynamics => TWO_BODY,
            ScenarioKind::CageCancellation => CAGE,
            ScenarioKind::ShieldDesign => SHIELD,
            ScenarioKind::CovarianceCheck => COVARIANCE,
            ScenarioKind::OverlapConvergence => OVERLAP,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug)]
enum Bound {
    Any,
    Positive,
    NonNegative,
    /// open interval (0, 1)
    UnitOpen,
}

#[derive(Clone, Copy, Debug)]
enum Ty {
    Number(Bound),
    Integer { min: i64 },
    Choice(&'static [&'static str]),
    Path,
    NumberList(Bound),
}

#[derive(Clone, Copy, Debug)]
enum Presence {
    Required,
    Optional,
    Default(fn() -> Value),
}

#[derive(Clone, Copy, Debug)]
struct Field {
    key: &'static str,
    ty: Ty,
    presence: Presence,
}

const fn field(key: &'static str, ty: Ty, presence: Presence) -> Field {
    Field { key, ty, presence }
}

use Bound::*;
use Presence::*;

fn zero() -> Value {
    Value::from(0.0)
}
fn one() -> Value {
    Value::from(1)
}
fn elementary_charge() -> Value {
    Value::from(CODATA.e_charge)
}
fn electron_mass() -> Value {
    Value::from(CODATA.m_electron)
}

const LOOP_SHAPES: &[&str] = &["circle", "ellipse", "square", "csv"];
const PROFILES: &[&str] = &["point_limit", "uniform_disk", "gaussian_tube"];
const FINITE_PROFILES: &[&str] = &["gaussian_tube", "uniform_disk"];
const INTEGRATORS: &[&str] = &["rk4", "stormer_verlet"];
const RULES: &[&str] = &["gauss_legendre", "adaptive_simpson"];

static LOOP_PHASE: &[Field] = &[
    field("charge_statC", Ty::Number(Any), Default(elementary_charge)),
    field("flux_Mx", Ty::Number(Any), Optional),
    field("flux_quanta", Ty::Number(Any), Optional),
    field("flux_csv", Ty::Path, Optional),
    field("fluxon_x_cm", Ty::Number(Any), Default(zero)),
    field("fluxon_y_cm", Ty::Number(Any), Default(zero)),
    field("loop_shape", Ty::Choice(LOOP_SHAPES), Required),
    field("loop_center_x_cm", Ty::Number(Any), Default(zero)),
    field("loop_center_y_cm", Ty::Number(Any), Default(zero)),
    field("loop_radius_cm", Ty::Number(Positive), Optional),
    field("loop_semi_major_cm", Ty::Number(Positive), Optional),
    field("loop_semi_minor_cm", Ty::Number(Positive), Optional),
    field("loop_tilt_rad", Ty::Number(Any), Default(zero)),
    field("loop_vertices", Ty::Integer { min: 3 }, Default(|| Value::from(256))),
    field("loop_turns", Ty::Integer { min: i64::MIN }, Default(one)),
    field("loop_csv", Ty::Path, Optional),
    field("gl_nodes_per_panel", Ty::Integer { min: 1 }, Default(|| Value::from(8))),
];

static TWO_BODY: &[Field] = &[
    field("charge_statC", Ty::Number(Any), Default(elementary_charge)),
    field("charge_mass_g", Ty::Number(Positive), Default(electron_mass)),
    field("charge_x_cm", Ty::Number(Any), Required),
    field("charge_y_cm", Ty::Number(Any), Required),
    field("charge_vx_cm_per_s", Ty::Number(Any), Required),
    field("charge_vy_cm_per_s", Ty::Number(Any), Required),
    field("fluxon_mass_g", Ty::Number(Positive), Required),
    field("fluxon_x_cm", Ty::Number(Any), Default(zero)),
    field("fluxon_y_cm", Ty::Number(Any), Default(zero)),
    field("fluxon_vx_cm_per_s", Ty::Number(Any), Default(zero)),
    field("fluxon_vy_cm_per_s", Ty::Number(Any), Default(zero)),
    field("flux_Mx", Ty::Number(Any), Required),
    field("tube_profile", Ty::Choice(PROFILES), Default(|| Value::from("point_limit"))),
    field("tube_radius_cm", Ty::Number(NonNegative), Default(zero)),
    field("duration_s", Ty::Number(Positive), Required),
    field("dt_s", Ty::Number(Positive), Optional),
    field("integrator", Ty::Choice(INTEGRATORS), Default(|| Value::from("rk4"))),
    field("exclusion_radius_cm", Ty::Number(NonNegative), Default(zero)),
    field("record_every", Ty::Integer { min: 1 }, Default(one)),
];

static CAGE: &[Field] = &[
    field("charge_statC", Ty::Number(Any), Default(elementary_charge)),
    field("a_cm", Ty::Number(Positive), Required),
    field("R_cage_cm", Ty::Number(Positive), Required),
    field("omega_rad_per_s", Ty::Number(Any), Required),
    field("flux_Mx", Ty::Number(Any), Required),
    field("n_pairs", Ty::Integer { min: 0 }, Default(|| Value::from(0))),
    field("profile_points", Ty::Integer { min: 4 }, Default(|| Value::from(360))),
];

static SHIELD: &[Field] = &[
    field("d_m", Ty::Number(Positive), Required),
    field("gap_eV", Ty::Number(Positive), Required),
    field("lambda_m", Ty::Number(Positive), Optional),
    field("v_e_m_per_s", Ty::Number(Positive), Optional),
];

static COVARIANCE: &[Field] = &[
    field("cases", Ty::Integer { min: 1 }, Default(|| Value::from(1000))),
    field("max_beta", Ty::Number(UnitOpen), Default(|| Value::from(0.9))),
];

static OVERLAP: &[Field] = &[
    field("charge_statC", Ty::Number(Any), Default(elementary_charge)),
    field("flux_Mx", Ty::Number(Any), Required),
    field("rho_cm", Ty::Number(Positive), Default(|| Value::from(1.0))),
    field("tube_profile", Ty::Choice(FINITE_PROFILES), Default(|| Value::from("gaussian_tube"))),
    field("radii_over_rho", Ty::NumberList(Positive), Default(|| serde_json::json!([0.04, 0.02, 0.01]))),
    field("z_extent_over_rho", Ty::Number(Positive), Default(|| Value::from(100.0))),
    field("outer_radius_over_rho", Ty::Number(Positive), Default(|| Value::from(100.0))),
    field("points_per_dim", Ty::Integer { min: 8 }, Default(|| Value::from(16))),
    field("rule", Ty::Choice(RULES), Default(|| Value::from("gauss_legendre"))),
];

/// One validation failure. `line` is 1-based when the offending key or
/// token could be located in the source text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationError {
    pub line: Option<usize>,
    pub path: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.path, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Normalized: every schema key with a default is present.
    pub parameters: Map<String, Value>,
    pub output_path: String,
    pub seed: u64,
}

const TOP_LEVEL: [&str; 4] = ["kind", "parameters", "output_path", "seed"];

impl ScenarioConfig {
    /// Canonical JSON form: fixed key order, defaults filled in.
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("kind".into(), Value::from(self.kind.name()));
        m.insert("parameters".into(), Value::Object(self.parameters.clone()));
        m.insert("output_path".into(), Value::from(self.output_path.clone()));
        m.insert("seed".into(), Value::from(self.seed));
        Value::Object(m)
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn num(&self, key: &str) -> f64 {
        self.opt_num(key).unwrap_or_else(|| panic!("validated parameter `{key}` missing"))
    }

    pub fn opt_num(&self, key: &str) -> Option<f64> {
        self.parameters.get(key).and_then(Value::as_f64)
    }

    pub fn int(&self, key: &str) -> i64 {
        self.parameters
            .get(key)
            .and_then(Value::as_i64)
            .unwrap_or_else(|| panic!("validated parameter `{key}` missing"))
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.parameters.get(key).and_then(Value::as_str)
    }

    pub fn list(&self, key: &str) -> Vec<f64> {
        self.parameters
            .get(key)
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_f64).collect())
            .unwrap_or_default()
    }
}

/// Locates `"key"` in `text`, searching after the first occurrence of
/// `"parent"` when one is given.
fn line_of(text: &str, parent: Option<&str>, key: &str) -> Option<usize> {
    let start = match parent {
        Some(p) => text.find(&format!("\"{p}\""))?,
        None => 0,
    };
    let at = start + text[start..].find(&format!("\"{key}\""))?;
    Some(text[..at].matches('\n').count() + 1)
}

struct Collector<'a> {
    text: &'a str,
    errors: Vec<ValidationError>,
}

impl Collector<'_> {
    fn top(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(ValidationError {
            line: line_of(self.text, None, key),
            path: key.to_string(),
            message: message.into(),
        });
    }

    fn param(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(ValidationError {
            line: line_of(self.text, Some("parameters"), key),
            path: format!("parameters.{key}"),
            message: message.into(),
        });
    }
}

/// Parses and fully validates a scenario document, reporting every problem
/// found rather than stopping at the first.
pub fn validate(text: &str) -> Result<ScenarioConfig, Vec<ValidationError>> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        vec![ValidationError {
            line: Some(e.line()),
            path: "<document>".into(),
            message: format!("invalid JSON: {e}"),
        }]
    })?;
    let mut c = Collector { text, errors: Vec::new() };
    let Value::Object(root) = root else {
        c.errors.push(ValidationError { line: Some(1), path: "<document>".into(), message: "expected a JSON object".into() });
        return Err(c.errors);
    };

    for key in root.keys() {
        if !TOP_LEVEL.contains(&key.as_str()) {
            c.top(key, format!("unknown key; expected one of {}", TOP_LEVEL.join(", ")));
        }
    }

    let kind = match root.get("kind") {
        None => {
            c.errors.push(ValidationError { line: None, path: "kind".into(), message: "required key missing".into() });
            None
        }
        Some(Value::String(s)) => {
            let k = ScenarioKind::from_name(s);
            if k.is_none() {
                let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
                c.top("kind", format!("unknown scenario kind `{s}`; expected one of {}", names.join(", ")));
            }
            k
        }
        Some(_) => {
            c.top("kind", "must be a string");
            None
        }
    };

    let output_path = match root.get("output_path") {
        None => {
            c.errors.push(ValidationError { line: None, path: "output_path".into(), message: "required key missing".into() });
            String::new()
        }
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(_) => {
            c.top("output_path", "must be a non-empty string");
            String::new()
        }
    };

    let seed = match root.get("seed") {
        None => 0,
        Some(v) => match v.as_u64() {
            Some(s) => s,
            None => {
                c.top("seed", "must be a non-negative integer");
                0
            }
        },
    };

    let empty = Map::new();
    let raw = match root.get("parameters") {
        None => {
            c.errors.push(ValidationError { line: None, path: "parameters".into(), message: "required key missing".into() });
            &empty
        }
        Some(Value::Object(m)) => m,
        Some(_) => {
            c.top("parameters", "must be an object");
            &empty
        }
    };

    let mut parameters = Map::new();
    if let Some(kind) = kind {
        let schema = kind.schema();
        for key in raw.keys() {
            if !schema.iter().any(|f| f.key == key) {
                c.param(key, format!("unknown parameter for kind `{kind}`"));
            }
        }
        for f in schema {
            match (raw.get(f.key), f.presence) {
                (Some(v), _) => {
                    if let Some(norm) = check_type(&mut c, f, v) {
                        parameters.insert(f.key.to_string(), norm);
                    }
                }
                (None, Required) => c.errors.push(ValidationError {
                    line: line_of(text, None, "parameters"),
                    path: format!("parameters.{}", f.key),
                    message: "required parameter missing".into(),
                }),
                (None, Optional) => {}
                (None, Default(d)) => {
                    parameters.insert(f.key.to_string(), d());
                }
            }
        }
        cross_checks(&mut c, kind, &parameters, raw);
    }

    if c.errors.is_empty() {
        Ok(ScenarioConfig { kind: kind.expect("kind validated"), parameters, output_path, seed })
    } else {
        Err(c.errors)
    }
}

fn check_type(c: &mut Collector, f: &Field, v: &Value) -> Option<Value> {
    let key = f.key;
    match f.ty {
        Ty::Number(bound) => {
            let Some(x) = v.as_f64() else {
                c.param(key, "must be a number");
                return None;
            };
            check_bound(c, key, bound, x).then(|| Value::Number(Number::from_f64(x).expect("finite")))
        }
        Ty::Integer { min } => {
            let Some(x) = v.as_i64() else {
                c.param(key, "must be an integer");
                return None;
            };
            if x < min {
                c.param(key, format!("must be at least {min}, got {x}"));
                return None;
            }
            Some(Value::from(x))
        }
        Ty::Choice(options) => match v.as_str() {
            Some(s) if options.contains(&s) => Some(v.clone()),
            _ => {
                c.param(key, format!("must be one of {}", options.join(", ")));
                None
            }
        },
        Ty::Path => match v.as_str() {
            Some(s) if !s.is_empty() => Some(v.clone()),
            _ => {
                c.param(key, "must be a non-empty path string");
                None
            }
        },
        Ty::NumberList(bound) => {
            let Some(items) = v.as_array().filter(|a| !a.is_empty()) else {
                c.param(key, "must be a non-empty array of numbers");
                return None;
            };
            let mut out = Vec::with_capacity(items.len());
            let mut ok = true;
            for (i, item) in items.iter().enumerate() {
                match item.as_f64() {
                    Some(x) if check_bound(c, &format!("{key}[{i}]"), bound, x) => {
                        out.push(Value::Number(Number::from_f64(x).expect("finite")))
                    }
                    Some(_) => ok = false,
                    None => {
                        c.param(key, format!("element {i} must be a number"));
                        ok = false;
                    }
                }
            }
            ok.then_some(Value::Array(out))
        }
    }
}

fn check_bound(c: &mut Collector, key: &str, bound: Bound, x: f64) -> bool {
    let (ok, what) = match bound {
        Any => (true, ""),
        Positive => (x > 0.0, "must be positive"),
        NonNegative => (x >= 0.0, "must be non-negative"),
        UnitOpen => (x > 0.0 && x < 1.0, "must lie strictly between 0 and 1"),
    };
    if !ok {
        c.param(key.split('[').next().unwrap_or(key), format!("{what}, got {x}"));
    }
    ok
}

fn cross_checks(c: &mut Collector, kind: ScenarioKind, p: &Map<String, Value>, raw: &Map<String, Value>) {
    let has = |k: &str| raw.contains_key(k);
    let num = |k: &str| p.get(k).and_then(Value::as_f64);
    match kind {
        ScenarioKind::LoopPhase => {
            let given: Vec<&str> = ["flux_Mx", "flux_quanta", "flux_csv"].into_iter().filter(|k| has(k)).collect();
            if given.len() != 1 {
                c.param(
                    given.get(1).copied().unwrap_or("flux_Mx"),
                    "exactly one of flux_Mx, flux_quanta, flux_csv must be given",
                );
            }
            if p.get("loop_turns").and_then(Value::as_i64) == Some(0) {
                c.param("loop_turns", "must be nonzero");
            }
            let needs: &[&str] = match p.get("loop_shape").and_then(Value::as_str) {
                Some("circle") | Some("square") => &["loop_radius_cm"],
                Some("ellipse") => &["loop_semi_major_cm", "loop_semi_minor_cm"],
                Some("csv") => &["loop_csv"],
                _ => &[],
            };
            for k in needs {
                if !has(k) {
                    c.param("loop_shape", format!("this shape requires `{k}`"));
                }
            }
        }
        ScenarioKind::TwoBodyDynamics => {
            let profile = p.get("tube_profile").and_then(Value::as_str);
            if profile.is_some_and(|s| s != "point_limit") && num("tube_radius_cm").is_some_and(|w| w <= 0.0) {
                c.param("tube_radius_cm", "finite tube profiles need a positive radius");
            }
        }
        ScenarioKind::CageCancellation => {
            if let (Some(a), Some(r)) = (num("a_cm"), num("R_cage_cm")) {
                if a <= r {
                    c.param("a_cm", format!("the orbit must lie outside the cage (a > R_cage), got a = {a}, R_cage = {r}"));
                }
            }
        }
        ScenarioKind::ShieldDesign => {
            if has("lambda_m") == has("v_e_m_per_s") {
                c.param(
                    if has("lambda_m") { "v_e_m_per_s" } else { "lambda_m" },
                    "exactly one of lambda_m and v_e_m_per_s must be given",
                );
            }
        }
        ScenarioKind::CovarianceCheck | ScenarioKind::OverlapConvergence => {}
    }
}
