//! Declarative scenarios, run records and report files.
//!
//! A config file is `{"scenarios": [...]}`; each scenario names a system, an
//! operation and every parameter the operation needs. Nothing is defaulted.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hyperspace::{covering_radius, FiniteClosedSet};
use crate::limits::{
    ap_set_test, catalog_cross_check, cluster_set, compose_nets, d_star_estimate, proximal_pair,
    proximal_pair_with_threshold, prolongation_point, quasifactor_check, recurrence_report, shipped_catalog,
    timenet_for_identity, timenet_for_idempotent, TimeNet, MAX_NET_RADIUS,
};
use crate::spaces::{Point, SymbolicPoint, SystemSpec};
use crate::symbolic::{quasi_order, Base, IdempotentTable, OffOrbitPanel, QuasiOrder, Substitution};
use crate::torus::{Circle, TorusPoint, ERROR_BUDGET_PER_STEP};

/// Overrides the parent of per-scenario output directories.
pub const OUT_DIR_ENV: &str = "HYPERLAB_OUT_DIR";

const SHIPPED: &[&str] = &[
    include_str!("../scenarios/morse-idempotents.json"),
    include_str!("../scenarios/morse-finite-set-rule.json"),
    include_str!("../scenarios/morse-recurrence-bb.json"),
    include_str!("../scenarios/morse-recurrence-ab.json"),
    include_str!("../scenarios/morse-proximal-ab.json"),
    include_str!("../scenarios/morse-quasifactor-bb.json"),
    include_str!("../scenarios/morse-quasifactor-ab.json"),
    include_str!("../scenarios/morse-prolongation.json"),
    include_str!("../scenarios/furstenberg-density.json"),
    include_str!("../scenarios/furstenberg-prolongation.json"),
];

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub system: Arc<SystemSpec>,
    pub operation: Operation,
    pub rng_seed: u64,
    pub runtime_budget_s: f64,
    raw: Value,
}

impl Scenario {
    pub fn raw(&self) -> &Value {
        &self.raw
    }
}

#[derive(Clone, Debug)]
pub enum SetConfig {
    Points(Vec<Point>),
    StandIn(StandIn),
}

/// Finite stand-ins for the whole space.
#[derive(Clone, Copy, Debug)]
pub enum StandIn {
    /// `{σ^j a : |j| <= radius}`.
    OrbitSegment(i64),
    /// The `k × k` grid.
    Grid(u32),
}

#[derive(Clone, Debug)]
pub enum NetConfig {
    Table { table: IdempotentTable, radii: Vec<u32>, horizon: u64 },
    Constant(i64),
    Identity { x: f64, horizon: u64, tol: f64 },
    Compose(Box<NetConfig>, Box<NetConfig>),
}

#[derive(Clone, Debug)]
pub enum Targets {
    Random(usize),
    List(Vec<(f64, f64)>),
}

#[derive(Clone, Debug)]
pub enum Operation {
    IdempotentAlgebra { samples: usize },
    Timenet { net: NetConfig },
    ClusterSet { set: SetConfig, net: NetConfig, eps: f64 },
    Recurrence { set: SetConfig, eps: f64, horizon: u64 },
    ApSet { tuple: Vec<Point>, eps: f64, horizon: u64 },
    ProximalPair { x: Point, y: Point, horizon: u64, threshold: Option<f64> },
    Prolongation { x: Point, delta: f64, sample: usize, horizon: u64, eps: f64, stand_in: StandIn },
    DStar { set: SetConfig, horizon: u64, eps: f64, catalog: Option<(Vec<u32>, u64)> },
    Quasifactor { set: SetConfig, horizon: u64, eps: f64 },
    FurstenbergDensity { targets: Targets, horizon: u64, search_tol: f64, approach_tol: f64 },
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::IdempotentAlgebra { .. } => "idempotent-algebra",
            Operation::Timenet { .. } => "timenet",
            Operation::ClusterSet { .. } => "cluster-set",
            Operation::Recurrence { .. } => "recurrence",
            Operation::ApSet { .. } => "ap-set",
            Operation::ProximalPair { .. } => "proximal-pair",
            Operation::Prolongation { .. } => "prolongation",
            Operation::DStar { .. } => "d-star",
            Operation::Quasifactor { .. } => "quasifactor",
            Operation::FurstenbergDensity { .. } => "furstenberg-density",
        }
    }
}

/// Required and optional parameter keys per operation.
fn operation_keys(op: &str) -> Option<(&'static [&'static str], &'static [&'static str])> {
    Some(match op {
        "idempotent-algebra" => (&["samples"], &[]),
        "timenet" => (&["net"], &[]),
        "cluster-set" => (&["set", "net", "eps"], &[]),
        "recurrence" => (&["set", "eps", "horizon"], &[]),
        "ap-set" => (&["tuple", "eps", "horizon"], &[]),
        "proximal-pair" => (&["x", "y", "horizon"], &["threshold"]),
        "prolongation" => (&["x", "delta", "sample", "horizon", "eps", "stand_in"], &[]),
        "d-star" => (&["set", "horizon", "eps"], &["catalog"]),
        "quasifactor" => (&["set", "horizon", "eps"], &[]),
        "furstenberg-density" => (&["targets", "horizon", "search_tol", "approach_tol"], &[]),
        _ => return None,
    })
}

const OPERATIONS: &[&str] = &[
    "idempotent-algebra",
    "timenet",
    "cluster-set",
    "recurrence",
    "ap-set",
    "proximal-pair",
    "prolongation",
    "d-star",
    "quasifactor",
    "furstenberg-density",
];

/// Collects every schema violation instead of stopping at the first.
struct Checker {
    errors: Vec<String>,
}

impl Checker {
    fn fail<T>(&mut self, path: &str, msg: impl std::fmt::Display) -> Option<T> {
        self.errors.push(format!("{path}: {msg}"));
        None
    }

    fn object<'a>(&mut self, path: &str, v: &'a Value) -> Option<&'a serde_json::Map<String, Value>> {
        match v.as_object() {
            Some(m) => Some(m),
            None => self.fail(path, "expected an object"),
        }
    }

    fn keys(&mut self, path: &str, m: &serde_json::Map<String, Value>, required: &[&str], optional: &[&str]) -> bool {
        let before = self.errors.len();
        for k in required {
            if !m.contains_key(*k) {
                self.errors.push(format!("{path}.{k}: missing"));
            }
        }
        for k in m.keys() {
            if !required.contains(&k.as_str()) && !optional.contains(&k.as_str()) {
                self.errors.push(format!("{path}.{k}: unknown key"));
            }
        }
        self.errors.len() == before
    }

    fn string(&mut self, path: &str, v: &Value) -> Option<String> {
        match v.as_str() {
            Some(s) => Some(s.to_string()),
            None => self.fail(path, "expected a string"),
        }
    }

    fn positive(&mut self, path: &str, v: &Value) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x > 0.0 && x.is_finite() => Some(x),
            _ => self.fail(path, "expected a positive number"),
        }
    }

    fn real(&mut self, path: &str, v: &Value) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => self.fail(path, "expected a number"),
        }
    }

    fn count(&mut self, path: &str, v: &Value, min: u64) -> Option<u64> {
        match v.as_u64() {
            Some(n) if n >= min => Some(n),
            _ => self.fail(path, format!("expected an integer >= {min}")),
        }
    }

    fn integer(&mut self, path: &str, v: &Value) -> Option<i64> {
        match v.as_i64() {
            Some(n) => Some(n),
            None => self.fail(path, "expected an integer"),
        }
    }

    fn system(&mut self, path: &str, v: &Value) -> Option<SystemSpec> {
        let m = self.object(path, v)?;
        let kind = m.get("kind").and_then(Value::as_str);
        match kind {
            Some("substitution-subshift") => {
                if !self.keys(path, m, &["kind", "rules"], &[]) {
                    return None;
                }
                let rules = self.object(&format!("{path}.rules"), &m["rules"])?;
                if !self.keys(&format!("{path}.rules"), rules, &["0", "1"], &[]) {
                    return None;
                }
                let mut words = Vec::new();
                for letter in ["0", "1"] {
                    let p = format!("{path}.rules.{letter}");
                    let w = self.string(&p, &rules[letter])?;
                    words.push(self.word(&p, &w)?);
                }
                match Substitution::new(&words[0], &words[1]) {
                    Ok(s) => Some(SystemSpec::Subshift(s)),
                    Err(e) => self.fail(&format!("{path}.rules"), e),
                }
            }
            Some("torus-skew") => {
                if !self.keys(path, m, &["kind", "alpha"], &[]) {
                    return None;
                }
                let alpha = self.real(&format!("{path}.alpha"), &m["alpha"])?;
                match SystemSpec::furstenberg(alpha) {
                    Ok(s) => Some(s),
                    Err(e) => self.fail(&format!("{path}.alpha"), e),
                }
            }
            _ => self.fail(&format!("{path}.kind"), "expected \"substitution-subshift\" or \"torus-skew\""),
        }
    }

    fn word(&mut self, path: &str, w: &str) -> Option<Vec<u8>> {
        if w.bytes().all(|c| c == b'0' || c == b'1') {
            Some(w.bytes().map(|c| c - b'0').collect())
        } else {
            self.fail(path, "expected a word over {0,1}")
        }
    }

    fn point(&mut self, path: &str, v: &Value, sys: &SystemSpec) -> Option<Point> {
        let m = self.object(path, v)?;
        match sys {
            SystemSpec::Subshift(_) if m.contains_key("base") => {
                if !self.keys(path, m, &["base", "shift"], &[]) {
                    return None;
                }
                let name = self.string(&format!("{path}.base"), &m["base"])?;
                let shift = self.integer(&format!("{path}.shift"), &m["shift"])?;
                match Base::from_name(&name) {
                    Some(b) => Some(Point::orbit(b, shift)),
                    None => self.fail(&format!("{path}.base"), "expected one of a, b, abar, bbar"),
                }
            }
            SystemSpec::Subshift(_) => {
                if !self.keys(path, m, &["window", "shift"], &[]) {
                    return None;
                }
                let w = self.string(&format!("{path}.window"), &m["window"])?;
                let shift = self.integer(&format!("{path}.shift"), &m["shift"])?;
                let word = self.word(&format!("{path}.window"), &w)?;
                match SymbolicPoint::from_window(&word) {
                    Ok(p) => Some(Point::Symbolic(p.shifted(shift))),
                    Err(e) => self.fail(&format!("{path}.window"), e),
                }
            }
            SystemSpec::TorusSkew(_) => {
                if !self.keys(path, m, &["x", "y"], &[]) {
                    return None;
                }
                let x = self.real(&format!("{path}.x"), &m["x"])?;
                let y = self.real(&format!("{path}.y"), &m["y"])?;
                Some(Point::torus(x, y))
            }
        }
    }

    fn points(&mut self, path: &str, v: &Value, sys: &SystemSpec) -> Option<Vec<Point>> {
        let Some(items) = v.as_array().filter(|a| !a.is_empty()) else {
            return self.fail(path, "expected a nonempty list of points");
        };
        let pts: Vec<Option<Point>> = items
            .iter()
            .enumerate()
            .map(|(i, p)| self.point(&format!("{path}[{i}]"), p, sys))
            .collect();
        pts.into_iter().collect()
    }

    fn stand_in(&mut self, path: &str, v: &Value, sys: &SystemSpec) -> Option<StandIn> {
        let m = self.object(path, v)?;
        match sys {
            SystemSpec::Subshift(_) => {
                if !self.keys(path, m, &["orbit_radius"], &[]) {
                    return None;
                }
                let r = self.count(&format!("{path}.orbit_radius"), &m["orbit_radius"], 1)?;
                Some(StandIn::OrbitSegment(r as i64))
            }
            SystemSpec::TorusSkew(_) => {
                if !self.keys(path, m, &["grid"], &[]) {
                    return None;
                }
                let k = self.count(&format!("{path}.grid"), &m["grid"], 1)?;
                Some(StandIn::Grid(k.min(u32::MAX as u64) as u32))
            }
        }
    }

    fn set(&mut self, path: &str, v: &Value, sys: &SystemSpec) -> Option<SetConfig> {
        if v.is_object() {
            self.stand_in(path, v, sys).map(SetConfig::StandIn)
        } else {
            self.points(path, v, sys).map(SetConfig::Points)
        }
    }

    fn radii(&mut self, path: &str, v: &Value) -> Option<Vec<u32>> {
        let ok = v.as_array().and_then(|a| {
            a.iter()
                .map(|r| r.as_u64().filter(|&r| (1..=MAX_NET_RADIUS as u64).contains(&r)).map(|r| r as u32))
                .collect::<Option<Vec<_>>>()
        });
        match ok {
            Some(r) if r.windows(2).all(|w| w[0] < w[1]) => Some(r),
            _ => self.fail(path, format!("expected strictly increasing radii in 1..={MAX_NET_RADIUS}")),
        }
    }

    fn net(&mut self, path: &str, v: &Value, sys: &SystemSpec) -> Option<NetConfig> {
        let m = self.object(path, v)?;
        if m.contains_key("table") {
            if !self.keys(path, m, &["table", "radii", "horizon"], &[]) {
                return None;
            }
            if sys.subshift().is_none() {
                return self.fail(&format!("{path}.table"), "idempotent nets need the subshift");
            }
            let name = self.string(&format!("{path}.table"), &m["table"])?;
            let radii = self.radii(&format!("{path}.radii"), &m["radii"]);
            let horizon = self.count(&format!("{path}.horizon"), &m["horizon"], 1);
            let Some(table) = IdempotentTable::by_name(&name) else {
                return self.fail(&format!("{path}.table"), "expected one of u1, v1, u2, v2, id");
            };
            Some(NetConfig::Table {
                table,
                radii: radii?,
                horizon: horizon?,
            })
        } else if m.contains_key("constant") {
            if !self.keys(path, m, &["constant"], &[]) {
                return None;
            }
            self.integer(&format!("{path}.constant"), &m["constant"]).map(NetConfig::Constant)
        } else if m.contains_key("identity") {
            if !self.keys(path, m, &["identity"], &[]) {
                return None;
            }
            if sys.torus().is_none() {
                return self.fail(&format!("{path}.identity"), "identity nets need the torus");
            }
            let p = format!("{path}.identity");
            let im = self.object(&p, &m["identity"])?;
            if !self.keys(&p, im, &["x", "horizon", "tol"], &[]) {
                return None;
            }
            let x = self.real(&format!("{p}.x"), &im["x"]);
            let horizon = self.count(&format!("{p}.horizon"), &im["horizon"], 2);
            let tol = self.positive(&format!("{p}.tol"), &im["tol"]);
            Some(NetConfig::Identity {
                x: x?,
                horizon: horizon?,
                tol: tol?,
            })
        } else if m.contains_key("compose") {
            if !self.keys(path, m, &["compose"], &[]) {
                return None;
            }
            let p = format!("{path}.compose");
            match m["compose"].as_array().map(|a| a.as_slice()) {
                Some([outer, inner]) => {
                    let o = self.net(&format!("{p}[0]"), outer, sys);
                    let i = self.net(&format!("{p}[1]"), inner, sys);
                    Some(NetConfig::Compose(Box::new(o?), Box::new(i?)))
                }
                _ => self.fail(&p, "expected [outer, inner]"),
            }
        } else {
            self.fail(path, "expected one of table, constant, identity, compose")
        }
    }

    fn targets(&mut self, path: &str, v: &Value) -> Option<Targets> {
        if let Some(m) = v.as_object() {
            if !self.keys(path, m, &["random"], &[]) {
                return None;
            }
            return self.count(&format!("{path}.random"), &m["random"], 1).map(|n| Targets::Random(n as usize));
        }
        let list = v.as_array().and_then(|a| {
            a.iter()
                .map(|t| match t.as_array().map(|p| p.as_slice()) {
                    Some([x, y]) => Some((x.as_f64()?, y.as_f64()?)),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
        });
        match list {
            Some(l) if !l.is_empty() => Some(Targets::List(l)),
            _ => self.fail(path, "expected {\"random\": n} or a nonempty list of [x, y]"),
        }
    }

    fn scenario(&mut self, path: &str, v: &Value) -> Option<Scenario> {
        let m = self.object(path, v)?;
        let ok = self.keys(
            path,
            m,
            &["name", "system", "operation", "parameters", "rng_seed", "runtime_budget_s"],
            &["description"],
        );
        let name = m.get("name").and_then(|n| self.string(&format!("{path}.name"), n));
        if let Some(n) = &name {
            if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                self.errors.push(format!("{path}.name: expected [A-Za-z0-9_-]+"));
            }
        }
        let description = m.get("description").and_then(|d| self.string(&format!("{path}.description"), d));
        let system = m.get("system").and_then(|s| self.system(&format!("{path}.system"), s));
        let rng_seed = m.get("rng_seed").and_then(|s| self.count(&format!("{path}.rng_seed"), s, 0));
        let budget = m
            .get("runtime_budget_s")
            .and_then(|b| self.positive(&format!("{path}.runtime_budget_s"), b));
        let op = m.get("operation").and_then(|o| {
            let name = self.string(&format!("{path}.operation"), o)?;
            if operation_keys(&name).is_none() {
                return self.fail(
                    &format!("{path}.operation"),
                    format!("unknown operation, expected one of {}", OPERATIONS.join(", ")),
                );
            }
            Some(name)
        });
        let operation = match (&op, &system, m.get("parameters")) {
            (Some(op), Some(sys), Some(params)) => self.operation(&format!("{path}.parameters"), op, params, sys),
            (Some(op), None, Some(params)) => {
                let p = format!("{path}.parameters");
                if let (Some(m), Some((required, optional))) = (self.object(&p, params), operation_keys(op)) {
                    self.keys(&p, m, required, optional);
                }
                None
            }
            _ => None,
        };
        if !ok {
            return None;
        }
        Some(Scenario {
            name: name?,
            description,
            system: Arc::new(system?),
            operation: operation?,
            rng_seed: rng_seed?,
            runtime_budget_s: budget?,
            raw: v.clone(),
        })
    }

    fn operation(&mut self, path: &str, op: &str, v: &Value, sys: &SystemSpec) -> Option<Operation> {
        let m = self.object(path, v)?;
        let (required, optional) = operation_keys(op)?;
        if !self.keys(path, m, required, optional) {
            return None;
        }
        let p = |k: &str| format!("{path}.{k}");
        let subshift_only = |c: &mut Checker| {
            if sys.subshift().is_none() {
                c.errors.push(format!("{path}: operation {op} needs the substitution subshift"));
                None
            } else {
                Some(())
            }
        };
        let torus_only = |c: &mut Checker| {
            if sys.torus().is_none() {
                c.errors.push(format!("{path}: operation {op} needs the torus skew product"));
                None
            } else {
                Some(())
            }
        };
        Some(match op {
            "idempotent-algebra" => {
                subshift_only(self)?;
                Operation::IdempotentAlgebra {
                    samples: self.count(&p("samples"), &m["samples"], 1)? as usize,
                }
            }
            "timenet" => Operation::Timenet {
                net: self.net(&p("net"), &m["net"], sys)?,
            },
            "cluster-set" => {
                let set = self.set(&p("set"), &m["set"], sys);
                let net = self.net(&p("net"), &m["net"], sys);
                let eps = self.positive(&p("eps"), &m["eps"]);
                Operation::ClusterSet {
                    set: set?,
                    net: net?,
                    eps: eps?,
                }
            }
            "recurrence" => {
                let set = self.set(&p("set"), &m["set"], sys);
                let eps = self.positive(&p("eps"), &m["eps"]);
                let horizon = self.count(&p("horizon"), &m["horizon"], 16);
                Operation::Recurrence {
                    set: set?,
                    eps: eps?,
                    horizon: horizon?,
                }
            }
            "ap-set" => {
                let tuple = self.points(&p("tuple"), &m["tuple"], sys);
                let eps = self.positive(&p("eps"), &m["eps"]);
                let horizon = self.count(&p("horizon"), &m["horizon"], 16);
                Operation::ApSet {
                    tuple: tuple?,
                    eps: eps?,
                    horizon: horizon?,
                }
            }
            "proximal-pair" => {
                let x = self.point(&p("x"), &m["x"], sys);
                let y = self.point(&p("y"), &m["y"], sys);
                let horizon = self.count(&p("horizon"), &m["horizon"], 1);
                let threshold = match m.get("threshold") {
                    Some(t) => Some(self.positive(&p("threshold"), t)?),
                    None => None,
                };
                Operation::ProximalPair {
                    x: x?,
                    y: y?,
                    horizon: horizon?,
                    threshold,
                }
            }
            "prolongation" => {
                let x = self.point(&p("x"), &m["x"], sys);
                let delta = self.positive(&p("delta"), &m["delta"]);
                let sample = self.count(&p("sample"), &m["sample"], 1);
                let horizon = self.count(&p("horizon"), &m["horizon"], 0);
                let eps = self.positive(&p("eps"), &m["eps"]);
                let stand_in = self.stand_in(&p("stand_in"), &m["stand_in"], sys);
                Operation::Prolongation {
                    x: x?,
                    delta: delta?,
                    sample: sample? as usize,
                    horizon: horizon?,
                    eps: eps?,
                    stand_in: stand_in?,
                }
            }
            "d-star" => {
                let set = self.set(&p("set"), &m["set"], sys);
                let horizon = self.count(&p("horizon"), &m["horizon"], 0);
                let eps = self.positive(&p("eps"), &m["eps"]);
                let catalog = match m.get("catalog") {
                    None => None,
                    Some(c) => {
                        subshift_only(self)?;
                        let cp = p("catalog");
                        let cm = self.object(&cp, c)?;
                        if !self.keys(&cp, cm, &["radii", "net_horizon"], &[]) {
                            return None;
                        }
                        let radii = self.radii(&format!("{cp}.radii"), &cm["radii"]);
                        let h = self.count(&format!("{cp}.net_horizon"), &cm["net_horizon"], 1);
                        Some((radii?, h?))
                    }
                };
                Operation::DStar {
                    set: set?,
                    horizon: horizon?,
                    eps: eps?,
                    catalog,
                }
            }
            "quasifactor" => {
                let set = self.set(&p("set"), &m["set"], sys);
                let horizon = self.count(&p("horizon"), &m["horizon"], 0);
                let eps = self.positive(&p("eps"), &m["eps"]);
                Operation::Quasifactor {
                    set: set?,
                    horizon: horizon?,
                    eps: eps?,
                }
            }
            "furstenberg-density" => {
                torus_only(self)?;
                let targets = self.targets(&p("targets"), &m["targets"]);
                let horizon = self.count(&p("horizon"), &m["horizon"], 2);
                let search_tol = self.positive(&p("search_tol"), &m["search_tol"]);
                let approach_tol = self.positive(&p("approach_tol"), &m["approach_tol"]);
                Operation::FurstenbergDensity {
                    targets: targets?,
                    horizon: horizon?,
                    search_tol: search_tol?,
                    approach_tol: approach_tol?,
                }
            }
            _ => return None,
        })
    }
}

/// Parses and validates a config, reporting every offending key at once.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let v: Value = serde_json::from_str(text)?;
    let mut c = Checker { errors: Vec::new() };
    let mut out = Vec::new();
    if let Some(m) = c.object("$", &v) {
        if c.keys("$", m, &["scenarios"], &[]) {
            match m["scenarios"].as_array() {
                Some(list) if !list.is_empty() => {
                    for (i, s) in list.iter().enumerate() {
                        if let Some(s) = c.scenario(&format!("$.scenarios[{i}]"), s) {
                            out.push(s);
                        }
                    }
                }
                _ => c.errors.push("$.scenarios: expected a nonempty list".into()),
            }
        }
    }
    let mut seen = BTreeSet::new();
    for s in &out {
        if !seen.insert(s.name.clone()) {
            c.errors.push(format!("$.scenarios: duplicate name {}", s.name));
        }
    }
    if c.errors.is_empty() {
        Ok(out)
    } else {
        Err(Error::Validation(c.errors))
    }
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenarios(&text)
}

pub fn shipped_scenarios() -> Result<Vec<Scenario>> {
    let mut all = Vec::new();
    for text in SHIPPED {
        all.extend(parse_scenarios(text)?);
    }
    Ok(all)
}

/// Raw text of the shipped config holding `name`.
pub fn shipped_config(name: &str) -> Option<&'static str> {
    SHIPPED.iter().copied().find(|text| {
        parse_scenarios(text).is_ok_and(|s| s.iter().any(|s| s.name == name))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub name: String,
    pub value: Value,
    /// `None` for descriptive verdicts that are not claims.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub per_step: f64,
    pub charged: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_s: f64,
    pub budget_s: f64,
    pub within_budget: bool,
}

/// Everything a run produced. All fields but `timing` are deterministic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: Value,
    pub version: String,
    pub operation: String,
    pub outputs: Value,
    pub verdicts: Vec<VerdictEntry>,
    pub error_budget: ErrorBudget,
    pub timing: Timing,
}

impl RunRecord {
    pub fn name(&self) -> &str {
        self.scenario["name"].as_str().unwrap_or("unnamed")
    }

    /// All claim verdicts hold.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass != Some(false))
    }
}

struct Outcome {
    outputs: Value,
    verdicts: Vec<VerdictEntry>,
    charged: f64,
}

fn claim(name: &str, pass: bool) -> VerdictEntry {
    VerdictEntry {
        name: name.into(),
        value: json!(pass),
        pass: Some(pass),
    }
}

fn note(name: &str, value: Value) -> VerdictEntry {
    VerdictEntry {
        name: name.into(),
        value,
        pass: None,
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn build_set(sys: &Arc<SystemSpec>, set: &SetConfig, resolution: f64) -> Result<FiniteClosedSet> {
    match set {
        SetConfig::Points(p) => FiniteClosedSet::new(sys.clone(), p.clone(), resolution),
        SetConfig::StandIn(s) => stand_in(sys, *s, resolution),
    }
}

fn stand_in(sys: &Arc<SystemSpec>, s: StandIn, resolution: f64) -> Result<FiniteClosedSet> {
    match s {
        StandIn::OrbitSegment(r) => FiniteClosedSet::orbit_segment(sys.clone(), &Point::orbit(Base::A, 0), r, resolution),
        StandIn::Grid(k) => FiniteClosedSet::torus_grid(sys.clone(), k),
    }
}

fn build_net(sys: &SystemSpec, net: &NetConfig) -> Result<TimeNet> {
    match net {
        NetConfig::Table { table, radii, horizon } => {
            let s = sys
                .subshift()
                .ok_or_else(|| Error::DomainMismatch("idempotent nets need the subshift".into()))?;
            timenet_for_idempotent(s, table, radii, *horizon, &OffOrbitPanel::standard())
        }
        NetConfig::Constant(t) => Ok(TimeNet::constant(*t)),
        NetConfig::Identity { x, horizon, tol } => {
            let t = sys
                .torus()
                .ok_or_else(|| Error::DomainMismatch("identity nets need the torus".into()))?;
            timenet_for_identity(t, Circle::from_f64(*x), *horizon, *tol)
        }
        NetConfig::Compose(p, q) => compose_nets(&build_net(sys, p)?, &build_net(sys, q)?),
    }
}

fn algebra(sys: &SystemSpec, samples: usize, seed: u64) -> Result<Outcome> {
    let s = sys
        .subshift()
        .ok_or_else(|| Error::DomainMismatch("idempotent tables act on the subshift".into()))?;
    let tables = IdempotentTable::minimal();
    let [u1, v1, u2, v2] = tables.clone();
    let mut products = Vec::new();
    for a in &tables {
        for b in &tables {
            let c = a.compose(b);
            let equals: Vec<&str> = tables.iter().filter(|t| t.same_action(&c)).map(|t| t.name.as_str()).collect();
            products.push(json!({
                "outer": a.name,
                "inner": b.name,
                "images": Base::ALL.map(|x| c.image(x).name()),
                "equals": equals,
            }));
        }
    }
    let panel = OffOrbitPanel::generate(seed, samples);
    let off: Vec<SymbolicPoint> = panel.points();
    let on: Vec<SymbolicPoint> = Base::ALL
        .iter()
        .flat_map(|&b| (-8..=8).map(move |k| SymbolicPoint::orbit(b, k)))
        .collect();
    let fixed_sets_agree = |x: &IdempotentTable, y: &IdempotentTable| {
        on.iter().chain(&off).all(|p| x.fixes(s, p) == y.fixes(s, p))
    };
    let member = |t: &IdempotentTable, b: Base| t.fixes(s, &SymbolicPoint::orbit(b, 0));
    let msys = Arc::new(sys.clone());
    let ab = FiniteClosedSet::from_orbit_points(msys.clone(), &[(Base::A, 0), (Base::B, 0)], 1.0)?;
    let just_b = FiniteClosedSet::from_orbit_points(msys.clone(), &[(Base::B, 0)], 1.0)?;
    let b_bbar = FiniteClosedSet::from_orbit_points(msys, &[(Base::B, 0), (Base::BBar, 0)], 1.0)?;
    let verdicts = vec![
        claim("u1v1 = v1", u1.compose(&v1).same_action(&v1)),
        claim("v1u1 = u1", v1.compose(&u1).same_action(&u1)),
        claim("u2v2 = v2", u2.compose(&v2).same_action(&v2)),
        claim("v2u2 = u2", v2.compose(&u2).same_action(&u2)),
        claim("u1 ~ v1", quasi_order(&u1, &v1) == QuasiOrder::Equivalent),
        claim("u2 ~ v2", quasi_order(&u2, &v2) == QuasiOrder::Equivalent),
        claim("u1, u2 incomparable", quasi_order(&u1, &u2) == QuasiOrder::Incomparable),
        claim("v1, v2 incomparable", quasi_order(&v1, &v2) == QuasiOrder::Incomparable),
        claim("tables idempotent", tables.iter().all(|t| t.is_idempotent())),
        claim(
            "a, abar not in F_u1 = F_v1, which contains b, bbar",
            fixed_sets_agree(&u1, &v1)
                && [Base::B, Base::BBar].iter().all(|&b| member(&u1, b))
                && [Base::A, Base::ABar].iter().all(|&b| !member(&u1, b)),
        ),
        claim(
            "b, bbar not in F_u2 = F_v2, which contains a, abar",
            fixed_sets_agree(&u2, &v2)
                && [Base::A, Base::ABar].iter().all(|&b| member(&u2, b))
                && [Base::B, Base::BBar].iter().all(|&b| !member(&u2, b)),
        ),
        claim(
            "identity off the distinguished orbits",
            off.iter().all(|p| tables.iter().all(|t| t.apply(s, p) == *p)),
        ),
        claim("u1({a,b}) = {b}", u1.apply_to_set(&ab)? == just_b),
        claim("v1({a,b}) = {b,bbar}", v1.apply_to_set(&ab)? == b_bbar),
    ];
    Ok(Outcome {
        outputs: json!({
            "tables": tables,
            "products": products,
            "off_orbit_panel": panel,
        }),
        verdicts,
        charged: 0.0,
    })
}

fn execute(sc: &Scenario) -> Result<Outcome> {
    let sys = &sc.system;
    match &sc.operation {
        Operation::IdempotentAlgebra { samples } => algebra(sys, *samples, sc.rng_seed),
        Operation::Timenet { net } => {
            let net = build_net(sys, net)?;
            Ok(Outcome {
                verdicts: vec![
                    note("levels", json!(net.levels.len())),
                    claim("complete", net.truncation.is_none()),
                ],
                outputs: json!({ "net": net }),
                charged: 0.0,
            })
        }
        Operation::ClusterSet { set, net, eps } => {
            let a = build_set(sys, set, *eps)?;
            let net = build_net(sys, net)?;
            let c = cluster_set(&a, &net, *eps)?;
            let mut verdicts = vec![claim("converged", c.converged)];
            if let (Some(table), SetConfig::Points(_)) = (&net.table, set) {
                let image = table.apply_to_set(&a)?;
                verdicts.push(claim("equals table image", image == c.result));
            }
            if let SetConfig::StandIn(_) = set {
                let radius = covering_radius(&c.result, a.points());
                verdicts.push(note("covering radius", json!(radius)));
                verdicts.push(claim("dense within 3 eps", radius <= 3.0 * eps));
            }
            Ok(Outcome {
                outputs: json!({
                    "input": a,
                    "result": c.result,
                    "cluster": c,
                }),
                verdicts,
                charged: 0.0,
            })
        }
        Operation::Recurrence { set, eps, horizon } => {
            let a = build_set(sys, set, *eps)?;
            let r = recurrence_report(&a, *eps, *horizon)?;
            Ok(Outcome {
                verdicts: vec![note("verdict", to_value(&r.verdict)?), note("max gap", json!(r.max_gap))],
                outputs: json!({ "input": a, "recurrence": r }),
                charged: torus_charge(sys, *horizon),
            })
        }
        Operation::ApSet { tuple, eps, horizon } => {
            let r = ap_set_test(sys, tuple, *eps, *horizon)?;
            Ok(Outcome {
                verdicts: vec![note("verdict", to_value(&r.verdict)?), note("max gap", json!(r.max_gap))],
                outputs: json!({ "tuple": tuple, "recurrence": r }),
                charged: torus_charge(sys, *horizon),
            })
        }
        Operation::ProximalPair { x, y, horizon, threshold } => {
            let r = match threshold {
                Some(t) => proximal_pair_with_threshold(sys, x, y, *horizon, *t)?,
                None => proximal_pair(sys, x, y, *horizon)?,
            };
            Ok(Outcome {
                verdicts: vec![note("verdict", to_value(&r.verdict)?)],
                outputs: json!({ "x": x, "y": y, "pair": r }),
                charged: torus_charge(sys, *horizon),
            })
        }
        Operation::Prolongation {
            x,
            delta,
            sample,
            horizon,
            eps,
            stand_in: s,
        } => {
            let est = prolongation_point(sys, x, *delta, *sample, *horizon, *eps)?;
            let orbit: Vec<Point> = (0..=*horizon as i64).map(|n| sys.act(x, n)).collect();
            let pruned_orbit = sys.epsilon_net_prune(&orbit, *eps)?;
            let contains = pruned_orbit.iter().all(|p| est.points().contains(p));
            let probe = stand_in(sys, *s, *eps)?;
            let radius = covering_radius(&est, probe.points());
            let budget = torus_charge(sys, *horizon);
            Ok(Outcome {
                verdicts: vec![
                    claim("contains pruned orbit of x", contains),
                    note("covering radius", json!(radius)),
                    claim("eps-dense in stand-in", radius <= eps + budget),
                ],
                outputs: json!({ "x": x, "estimate": est }),
                charged: budget,
            })
        }
        Operation::DStar { set, horizon, eps, catalog } => {
            let a = build_set(sys, set, *eps)?;
            let members = d_star_estimate(&a, *horizon, *eps)?;
            let symmetric = members.iter().all(complement_closed);
            let mut verdicts = vec![
                note("members", json!(members.len())),
                note("complement symmetric", json!(symmetric)),
            ];
            let mut outputs = json!({ "input": a, "members": members });
            if let Some((radii, net_horizon)) = catalog {
                let s = sys
                    .subshift()
                    .ok_or_else(|| Error::DomainMismatch("catalog nets need the subshift".into()))?;
                let nets = shipped_catalog(s, radii, *net_horizon)?;
                let check = catalog_cross_check(&a, &members, &nets, *eps)?;
                verdicts.push(claim("cluster sets lie in the orbit closure", check.clusters_in_orbit));
                outputs["catalog"] = to_value(&check)?;
            }
            Ok(Outcome {
                outputs,
                verdicts,
                charged: torus_charge(sys, *horizon),
            })
        }
        Operation::Quasifactor { set, horizon, eps } => {
            let a = build_set(sys, set, *eps)?;
            let members = d_star_estimate(&a, *horizon, *eps)?;
            let r = quasifactor_check(&members, *eps, *horizon)?;
            let verdict = if r.minimal { "minimal-at-resolution" } else { "not-minimal" };
            Ok(Outcome {
                verdicts: vec![
                    note("verdict", json!(verdict)),
                    note("members", json!(members.len())),
                    note("complement symmetric", json!(members.iter().all(complement_closed))),
                ],
                outputs: json!({ "input": a, "members": members, "quasifactor": r }),
                charged: torus_charge(sys, *horizon),
            })
        }
        Operation::FurstenbergDensity {
            targets,
            horizon,
            search_tol,
            approach_tol,
        } => {
            let t = sys
                .torus()
                .ok_or_else(|| Error::DomainMismatch("density checks need the torus".into()))?;
            let pts: Vec<TorusPoint> = match targets {
                Targets::Random(n) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(sc.rng_seed);
                    (0..*n).map(|_| TorusPoint::new(rng.gen(), rng.gen())).collect()
                }
                Targets::List(l) => l.iter().map(|&(x, y)| TorusPoint::new(x, y)).collect(),
            };
            let r = t.verify_density(&pts, *horizon, *search_tol)?;
            let worst = r.worst_approach();
            Ok(Outcome {
                verdicts: vec![
                    note("worst approach", json!(worst)),
                    claim("all targets approached", r.all_within(*approach_tol)),
                ],
                charged: r.error_budget,
                outputs: json!({ "density": r }),
            })
        }
    }
}

/// Budget for comparisons after fixed-point iteration; conversions only.
fn torus_charge(sys: &SystemSpec, _horizon: u64) -> f64 {
    match sys {
        SystemSpec::TorusSkew(_) => 4.0 * ERROR_BUDGET_PER_STEP,
        SystemSpec::Subshift(_) => 0.0,
    }
}

fn complement_closed(m: &FiniteClosedSet) -> bool {
    m.points().iter().all(|p| match p {
        Point::Symbolic(q) => m.points().contains(&Point::Symbolic(q.complement())),
        Point::Torus(_) => false,
    })
}

pub fn run_scenario(sc: &Scenario) -> Result<RunRecord> {
    let start = Instant::now();
    let out = execute(sc)?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(RunRecord {
        scenario: sc.raw.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        operation: sc.operation.name().to_string(),
        outputs: out.outputs,
        verdicts: out.verdicts,
        error_budget: ErrorBudget {
            per_step: ERROR_BUDGET_PER_STEP,
            charged: out.charged,
        },
        timing: Timing {
            elapsed_s: elapsed,
            budget_s: sc.runtime_budget_s,
            within_budget: elapsed <= sc.runtime_budget_s,
        },
    })
}

/// Line-delimited machine records; everything except timing.
pub fn render_machine(r: &RunRecord) -> Result<String> {
    let mut lines = vec![json!({
        "record": "scenario",
        "name": r.name(),
        "operation": r.operation,
        "version": r.version,
        "config": r.scenario,
    })];
    for v in &r.verdicts {
        lines.push(json!({ "record": "verdict", "name": v.name, "value": v.value, "pass": v.pass }));
    }
    lines.push(json!({
        "record": "error-budget",
        "per_step": r.error_budget.per_step,
        "charged": r.error_budget.charged,
    }));
    lines.push(json!({ "record": "outputs", "data": r.outputs }));
    let mut out = String::new();
    for l in lines {
        out.push_str(&serde_json::to_string(&l)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn render_table(r: &RunRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario   {}", r.name());
    let _ = writeln!(out, "operation  {}", r.operation);
    if let Some(kind) = r.scenario["system"]["kind"].as_str() {
        let _ = writeln!(out, "system     {kind}");
    }
    let _ = writeln!(out, "seed       {}", r.scenario["rng_seed"]);
    let _ = writeln!(out);
    let width = r.verdicts.iter().map(|v| v.name.len()).max().unwrap_or(0);
    for v in &r.verdicts {
        let status = match v.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "    ",
        };
        let value = match &v.value {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let _ = writeln!(out, "  {status}  {:<width$}  {value}", v.name);
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "error budget {:e} per step, {:e} charged",
        r.error_budget.per_step, r.error_budget.charged
    );
    let _ = writeln!(
        out,
        "elapsed {:.3}s of {}s budget{}",
        r.timing.elapsed_s,
        r.timing.budget_s,
        if r.timing.within_budget { "" } else { " (OVER BUDGET)" }
    );
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Machine,
}

pub fn render(r: &RunRecord, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Table => Ok(render_table(r)),
        ReportFormat::Machine => render_machine(r),
    }
}

/// `$HYPERLAB_OUT_DIR/<name>` or `./runs/<name>`.
pub fn output_dir(name: &str) -> PathBuf {
    let base = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
    base.join(name)
}

fn write(path: PathBuf, contents: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
}

fn point_cells(p: &Value) -> Vec<String> {
    let cell = |k: &str| p.get(k).map(|v| v.to_string().trim_matches('"').to_string()).unwrap_or_default();
    vec![cell("base"), cell("window"), cell("shift"), cell("x"), cell("y")]
}

const POINT_HEADER: [&str; 5] = ["base", "window", "shift", "x", "y"];

/// Writes `record.json`, `results.jsonl`, `report.txt` and the CSV exports.
pub fn emit_report(r: &RunRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    write(dir.join("record.json"), serde_json::to_string_pretty(r)?.as_bytes(), &mut written)?;
    write(dir.join("results.jsonl"), render_machine(r)?.as_bytes(), &mut written)?;
    write(dir.join("report.txt"), render_table(r).as_bytes(), &mut written)?;

    let o = &r.outputs;
    if let Some(rec) = o.get("recurrence") {
        let times = rec["return_times"].as_array().cloned().unwrap_or_default();
        let mut rows: Vec<Vec<String>> = times
            .iter()
            .enumerate()
            .map(|(i, n)| vec![n.to_string(), rec["distances"][i].to_string(), rec["gaps"][i].to_string()])
            .collect();
        // The trailing gap is censored at the horizon; its row has no distance.
        if let (Some(h), Some(g)) = (rec["horizon"].as_u64(), rec["censored_gap"].as_u64()) {
            rows.push(vec![(h + 1).to_string(), String::new(), g.to_string()]);
        }
        write(dir.join("gaps.csv"), &csv_bytes(&["n", "d_H", "gap"], rows)?, &mut written)?;
    }
    if let Some(c) = o.get("cluster") {
        let pts = o["result"]["points"].as_array().cloned().unwrap_or_default();
        write(
            dir.join("cluster_points.csv"),
            &csv_bytes(&POINT_HEADER, pts.iter().map(point_cells).collect())?,
            &mut written,
        )?;
        let levels = c["net"]["levels"].as_array().cloned().unwrap_or_default();
        let rows = levels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let d = if i == 0 { String::new() } else { c["witness"][i - 1].to_string() };
                vec![i.to_string(), l["time"].to_string(), c["partial_sizes"][i].to_string(), d]
            })
            .collect();
        write(
            dir.join("cluster_witness.csv"),
            &csv_bytes(&["level", "time", "points", "d_H_to_previous"], rows)?,
            &mut written,
        )?;
    }
    if let Some(est) = o.get("estimate") {
        let pts = est["points"].as_array().cloned().unwrap_or_default();
        write(
            dir.join("estimate_points.csv"),
            &csv_bytes(&POINT_HEADER, pts.iter().map(point_cells).collect())?,
            &mut written,
        )?;
    }
    if let Some(members) = o.get("members").and_then(Value::as_array) {
        let mut rows = Vec::new();
        for (i, m) in members.iter().enumerate() {
            for p in m["points"].as_array().into_iter().flatten() {
                let mut row = vec![i.to_string()];
                row.extend(point_cells(p));
                rows.push(row);
            }
        }
        let mut header = vec!["member"];
        header.extend(POINT_HEADER);
        write(dir.join("members.csv"), &csv_bytes(&header, rows)?, &mut written)?;
    }
    if let Some(d) = o.get("density") {
        let rows = d["targets"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|t| {
                vec![
                    t["target"]["x"].to_string(),
                    t["target"]["y"].to_string(),
                    t["found"].to_string(),
                    t["hits"].to_string(),
                    t["best_time"].to_string(),
                    t["approach"].to_string(),
                ]
            })
            .collect();
        write(
            dir.join("approaches.csv"),
            &csv_bytes(&["x", "y", "found", "hits", "best_n", "approach"], rows)?,
            &mut written,
        )?;
    }
    Ok(written)
}

pub fn load_record(path: &Path) -> Result<RunRecord> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scenario_list_is_rejected() {
        let err = parse_scenarios(r#"{"scenarios": []}"#).unwrap_err();
        assert!(matches!(err, Error::Validation(ref e) if e[0].contains("nonempty")), "{err}");
    }

    #[test]
    fn validation_lists_every_offending_key() {
        let text = r#"{"scenarios": [{
            "name": "x",
            "system": {"kind": "torus-skew", "alpha": 0.5},
            "operation": "recurrence",
            "parameters": {"eps": -1, "horizon": 3, "bogus": 1, "set": [{"x": 0, "y": 0}]},
            "rng_seed": 1,
            "runtime_budget_s": 1,
            "extra": true
        }]}"#;
        let Error::Validation(errors) = parse_scenarios(text).unwrap_err() else { panic!() };
        let joined = errors.join("\n");
        for key in ["extra", "system.alpha", "parameters.bogus"] {
            assert!(joined.contains(key), "{key} missing from {joined}");
        }
    }

    #[test]
    fn shipped_scenarios_validate() {
        let all = shipped_scenarios().unwrap();
        assert_eq!(all.len(), SHIPPED.len());
        assert!(shipped_config("morse-idempotents").is_some());
    }
}
