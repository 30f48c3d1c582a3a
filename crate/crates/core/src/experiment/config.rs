use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value as Json};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    Hn,
    CdtMono,
    CdtDuo,
    Aah,
    Ssh,
    Bbh,
    Bounds,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Hn,
        Experiment::CdtMono,
        Experiment::CdtDuo,
        Experiment::Aah,
        Experiment::Ssh,
        Experiment::Bbh,
        Experiment::Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Hn => "hn",
            Experiment::CdtMono => "cdt-mono",
            Experiment::CdtDuo => "cdt-duo",
            Experiment::Aah => "aah",
            Experiment::Ssh => "ssh",
            Experiment::Bbh => "bbh",
            Experiment::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::config_key(format!("unknown experiment `{s}`"), "experiment", None))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Str,
    Bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Str(String),
    Bool(bool),
}

impl Value {
    fn to_json(&self) -> Json {
        match self {
            Value::Float(x) => Json::from(*x),
            Value::Int(i) => Json::from(*i),
            Value::Str(s) => Json::from(s.clone()),
            Value::Bool(b) => Json::from(*b),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// One documented configuration key.
#[derive(Clone, Debug)]
pub struct KeySpec {
    pub key: &'static str,
    pub default: Value,
    pub doc: &'static str,
}

impl KeySpec {
    pub fn kind(&self) -> Kind {
        match self.default {
            Value::Float(_) => Kind::Float,
            Value::Int(_) => Kind::Int,
            Value::Str(_) => Kind::Str,
            Value::Bool(_) => Kind::Bool,
        }
    }
}

fn f(key: &'static str, v: f64, doc: &'static str) -> KeySpec {
    KeySpec {
        key,
        default: Value::Float(v),
        doc,
    }
}

fn i(key: &'static str, v: i64, doc: &'static str) -> KeySpec {
    KeySpec {
        key,
        default: Value::Int(v),
        doc,
    }
}

fn s(key: &'static str, v: &str, doc: &'static str) -> KeySpec {
    KeySpec {
        key,
        default: Value::Str(v.to_string()),
        doc,
    }
}

fn b(key: &'static str, v: bool, doc: &'static str) -> KeySpec {
    KeySpec {
        key,
        default: Value::Bool(v),
        doc,
    }
}

const RCOND_DOC: &str = "cutoff on sigma^2 / sigma_max^2 in the landscape solve";

/// Documented keys and defaults for one experiment.
pub fn schema(exp: Experiment) -> Vec<KeySpec> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    match exp {
        Experiment::Hn => vec![
            i("n", 120, "chain length"),
            f("t_left", 1.0, "hopping on the superdiagonal"),
            f("r_start", 0.7, "first hopping ratio t_R / t_L"),
            f("r_stop", 1.3, "last hopping ratio"),
            i("r_count", 25, "number of ratios"),
            f("profile_r", 0.9, "extra ratio for which full profiles are written"),
            f("rcond", crate::landscape::DEFAULT_RCOND, RCOND_DOC),
        ],
        Experiment::CdtMono => vec![
            f("hopping", 1.0, "tunneling J"),
            f("omega", 10.0, "drive frequency"),
            i("truncation", 6, "harmonic cutoff M"),
            f("a_start", 0.0, "first A / omega"),
            f("a_stop", 10.0, "last A / omega"),
            i("a_count", 500, "number of amplitudes"),
            b("monodromy", true, "also integrate one period for exact quasienergies"),
            i("steps_per_period", 2000, "RK4 steps per drive period"),
            f("prominence", crate::diagnostics::DEFAULT_PROMINENCE, "peak prominence ratio"),
            f("rcond", crate::landscape::DEFAULT_RCOND, RCOND_DOC),
        ],
        Experiment::CdtDuo => vec![
            f("hopping", 1.0, "tunneling J"),
            f("omega1", 10.0, "first drive frequency"),
            f("omega_ratio", 2f64.sqrt(), "omega2 / omega1"),
            i("truncation1", 6, "harmonic cutoff M1"),
            i("truncation2", 6, "harmonic cutoff M2"),
            f("a_start", 0.0, "first A / omega1"),
            f("a_stop", 3.0, "last A / omega1"),
            i("a_count", 21, "number of A values"),
            f("b_start", 0.0, "first B / omega1"),
            f("b_stop", 3.0, "last B / omega1"),
            i("b_count", 21, "number of B values"),
            i("n_periods", 100, "periods of omega1 for min P_L"),
            i("steps_per_period", 2000, "RK4 steps per shortest drive period"),
            i("trajectory_stride", 50, "keep every n-th step in trajectory files"),
            f("rcond", crate::landscape::DEFAULT_RCOND, RCOND_DOC),
        ],
        Experiment::Aah => vec![
            i("n", 80, "chain length"),
            f("hopping", 1.0, "hopping J"),
            f("lambda0", 2.8, "static quasiperiodic strength"),
            f("alpha", golden, "incommensurate wavenumber"),
            f("theta", 0.0, "potential phase"),
            f("amplitude", 3.7, "drive amplitude A"),
            i("truncation", 6, "harmonic cutoff M"),
            f("omega_start", 1.0, "first frequency"),
            f("omega_stop", 10.0, "last frequency"),
            i("omega_count", 60, "number of frequencies"),
            f("bin_width", crate::diagnostics::DEFAULT_BIN_WIDTH, "DOS bin width in units of omega"),
            f("low_omega_max", 4.0, "upper edge of the low-frequency window"),
            f("high_omega_min", 8.0, "lower edge of the high-frequency window"),
            f("rcond", crate::landscape::DEFAULT_RCOND, RCOND_DOC),
        ],
        Experiment::Ssh => vec![
            i("n_cells", 20, "unit cells per chain"),
            f("t_weak", 0.5, "weaker hopping"),
            f("t_strong", 1.0, "stronger hopping"),
            s("variants", "topological,trivial,domain_wall", "comma-separated variants"),
            i("colocalization_sites", 3, "max distance between mode and landscape peak"),
            f("rcond", crate::landscape::DEFAULT_RCOND, RCOND_DOC),
        ],
        Experiment::Bbh => vec![
            i("n_x", 6, "cells along x"),
            i("n_y", 6, "cells along y"),
            f("gamma", 0.5, "intra-cell hopping"),
            f("lambda", 1.0, "inter-cell hopping"),
            i("colocalization_sites", 1, "max Chebyshev distance between mode and landscape peak"),
            f("rcond", crate::landscape::DEFAULT_RCOND, RCOND_DOC),
        ],
        Experiment::Bounds => vec![
            s(
                "model",
                "random_pd",
                "random_pd, random, hatano_nelson, diagonal, anderson, ssh, bbh or two_level",
            ),
            i("dim", 30, "dimension for random, diagonal and anderson models"),
            i("seed", 0, "random seed"),
            f("r", 0.9, "Hatano-Nelson ratio t_R / t_L"),
            f("eps", 1e-3, "smallest diagonal entry of the diagonal model"),
            f("amplitude", 2.4, "two-level drive A / omega"),
            f("rcond", crate::landscape::DEFAULT_RCOND, RCOND_DOC),
        ],
    }
}

/// Resolved configuration: every schema key has a value.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    values: BTreeMap<String, Value>,
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
            || t.strip_prefix(&format!("\"{key}\""))
                .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|p| p + 1)
}

impl RunConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let values = schema(experiment)
            .into_iter()
            .map(|k| (k.key.to_string(), k.default))
            .collect();
        Self { experiment, values }
    }

    fn spec(&self, key: &str) -> Option<KeySpec> {
        schema(self.experiment).into_iter().find(|k| k.key == key)
    }

    fn unknown(&self, key: &str, line: Option<usize>) -> Error {
        let known: Vec<&str> = schema(self.experiment).iter().map(|k| k.key).collect();
        Error::config_key(
            format!(
                "unknown key `{key}` for experiment {} (known: {})",
                self.experiment,
                known.join(", ")
            ),
            key,
            line,
        )
    }

    fn coerce(&self, key: &str, kind: Kind, value: Value, line: Option<usize>) -> Result<Value> {
        let bad = |v: &Value| {
            Error::config_key(
                format!("key `{key}` expects {kind:?}, got {v}").to_lowercase(),
                key,
                line,
            )
        };
        match (kind, value) {
            (Kind::Float, Value::Float(x)) => Ok(Value::Float(x)),
            (Kind::Float, Value::Int(n)) => Ok(Value::Float(n as f64)),
            (Kind::Int, Value::Int(n)) => Ok(Value::Int(n)),
            (Kind::Int, Value::Float(x)) if x.fract() == 0.0 && x.abs() < 9e15 => {
                Ok(Value::Int(x as i64))
            }
            (Kind::Str, Value::Str(s)) => Ok(Value::Str(s)),
            (Kind::Bool, Value::Bool(b)) => Ok(Value::Bool(b)),
            (_, v) => Err(bad(&v)),
        }
    }

    /// Sets one key, rejecting keys outside the schema and type mismatches.
    pub fn set(&mut self, key: &str, value: Value, line: Option<usize>) -> Result<()> {
        let spec = self.spec(key).ok_or_else(|| self.unknown(key, line))?;
        let v = self.coerce(key, spec.kind(), value, line)?;
        self.values.insert(key.to_string(), v);
        Ok(())
    }

    /// Applies flat TOML text on top of the current values.
    pub fn merge_toml(&mut self, text: &str) -> Result<()> {
        let table: toml::Table = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            Error::Config {
                message: format!("invalid TOML: {}", e.message()),
                key: None,
                line,
            }
        })?;
        for (key, raw) in table {
            let line = key_line(text, &key);
            if key == "experiment" {
                let name = raw.as_str().ok_or_else(|| {
                    Error::config_key("`experiment` must be a string", "experiment", line)
                })?;
                let exp: Experiment = name.parse().map_err(|_| {
                    Error::config_key(format!("unknown experiment `{name}`"), "experiment", line)
                })?;
                if exp != self.experiment {
                    return Err(Error::config_key(
                        format!("config is for `{exp}` but `{}` was requested", self.experiment),
                        "experiment",
                        line,
                    ));
                }
                continue;
            }
            let value = match raw {
                toml::Value::Float(x) => Value::Float(x),
                toml::Value::Integer(n) => Value::Int(n),
                toml::Value::String(s) => Value::Str(s),
                toml::Value::Boolean(b) => Value::Bool(b),
                other => {
                    return Err(Error::config_key(
                        format!(
                            "key `{key}` must be a number, string or boolean (config is flat), got {}",
                            other.type_str()
                        ),
                        &key,
                        line,
                    ))
                }
            };
            self.set(&key, value, line)?;
        }
        Ok(())
    }

    /// Applies the `config` object of a run manifest.
    pub fn merge_manifest(&mut self, text: &str) -> Result<()> {
        let doc: Json = serde_json::from_str(text)
            .map_err(|e| Error::config(format!("invalid manifest JSON: {e}")))?;
        if let Some(name) = doc.get("experiment").and_then(Json::as_str) {
            let exp: Experiment = name.parse()?;
            if exp != self.experiment {
                return Err(Error::config_key(
                    format!("manifest is for `{exp}` but `{}` was requested", self.experiment),
                    "experiment",
                    None,
                ));
            }
        }
        let cfg = doc
            .get("config")
            .and_then(Json::as_object)
            .ok_or_else(|| Error::config("manifest has no `config` object"))?;
        for (key, raw) in cfg {
            let value = match raw {
                Json::Number(n) if n.is_i64() => Value::Int(n.as_i64().unwrap_or_default()),
                Json::Number(n) => Value::Float(n.as_f64().unwrap_or(f64::NAN)),
                Json::String(s) => Value::Str(s.clone()),
                Json::Bool(b) => Value::Bool(*b),
                other => {
                    return Err(Error::config_key(
                        format!("manifest key `{key}` has unsupported value {other}"),
                        key,
                        None,
                    ))
                }
            };
            self.set(key, value, None)?;
        }
        Ok(())
    }

    /// Applies one `key=value` override, parsed by the key's schema type.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment.split_once('=').ok_or_else(|| {
            Error::config(format!("override `{assignment}` is not of the form key=value"))
        })?;
        let (key, raw) = (key.trim(), raw.trim());
        let spec = self.spec(key).ok_or_else(|| self.unknown(key, None))?;
        let bad = || {
            Error::config_key(
                format!("override `{key}={raw}` does not parse as {:?}", spec.kind()).to_lowercase(),
                key,
                None,
            )
        };
        let value = match spec.kind() {
            Kind::Float => Value::Float(raw.parse().map_err(|_| bad())?),
            Kind::Int => Value::Int(raw.parse().map_err(|_| bad())?),
            Kind::Bool => Value::Bool(raw.parse().map_err(|_| bad())?),
            Kind::Str => Value::Str(raw.trim_matches('"').to_string()),
        };
        self.set(key, value, None)
    }

    /// Defaults, then the file (TOML, or a manifest when it ends in
    /// `.json`), then overrides in order.
    pub fn load(experiment: Experiment, path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut cfg = Self::defaults(experiment);
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            if path.extension().is_some_and(|e| e == "json") {
                cfg.merge_manifest(&text)?;
            } else {
                cfg.merge_toml(&text).map_err(|e| match e {
                    Error::Config { message, key, line } => Error::Config {
                        message: format!("{}: {message}", path.display()),
                        key,
                        line,
                    },
                    other => other,
                })?;
            }
        }
        for o in overrides {
            cfg.apply_override(o)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn get(&self, key: &str) -> &Value {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("key `{key}` missing from the {} schema", self.experiment))
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(x) => *x,
            Value::Int(n) => *n as f64,
            other => panic!("key `{key}` is not numeric: {other}"),
        }
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.get(key) {
            Value::Int(n) => *n,
            other => panic!("key `{key}` is not an integer: {other}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.int(key).max(0) as usize
    }

    pub fn string(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Str(s) => s,
            other => panic!("key `{key}` is not a string: {other}"),
        }
    }

    pub fn bool(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Bool(b) => *b,
            other => panic!("key `{key}` is not a boolean: {other}"),
        }
    }

    pub fn to_json(&self) -> Json {
        let map: Map<String, Json> = self
            .values
            .iter()
            .map(|(k, v)| (k.clone(), v.to_json()))
            .collect();
        Json::Object(map)
    }

    /// Flat TOML rendering of the resolved values.
    pub fn to_toml(&self) -> String {
        let mut out = format!("experiment = \"{}\"\n", self.experiment);
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    fn check(&self, ok: bool, key: &str, msg: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::config_key(
                format!("`{key}` = {}: {msg}", self.get(key)),
                key,
                None,
            ))
        }
    }

    fn positive(&self, key: &str) -> Result<()> {
        let x = self.float(key);
        self.check(x > 0.0 && x.is_finite(), key, "must be positive")
    }

    fn count(&self, key: &str) -> Result<()> {
        self.check(self.int(key) >= 2, key, "swept axes need at least 2 points")
    }

    fn at_least(&self, key: &str, min: i64) -> Result<()> {
        self.check(self.int(key) >= min, key, &format!("must be >= {min}"))
    }

    fn finite(&self, key: &str) -> Result<()> {
        self.check(self.float(key).is_finite(), key, "must be finite")
    }

    /// Semantic checks beyond types.
    pub fn validate(&self) -> Result<()> {
        let rc = self.float("rcond");
        self.check(rc > 0.0 && rc < 1.0, "rcond", "must lie in (0, 1)")?;
        match self.experiment {
            Experiment::Hn => {
                self.at_least("n", 2)?;
                self.positive("t_left")?;
                self.positive("r_start")?;
                self.positive("r_stop")?;
                self.positive("profile_r")?;
                self.count("r_count")?;
            }
            Experiment::CdtMono => {
                self.positive("hopping")?;
                self.positive("omega")?;
                self.at_least("truncation", 0)?;
                self.check(self.float("a_start") >= 0.0, "a_start", "amplitudes must be >= 0")?;
                self.check(self.float("a_stop") >= 0.0, "a_stop", "amplitudes must be >= 0")?;
                self.count("a_count")?;
                self.at_least("steps_per_period", 200)?;
                let p = self.float("prominence");
                self.check(p > 0.0 && p < 1.0, "prominence", "must lie in (0, 1)")?;
            }
            Experiment::CdtDuo => {
                self.positive("hopping")?;
                self.positive("omega1")?;
                self.positive("omega_ratio")?;
                self.at_least("truncation1", 0)?;
                self.at_least("truncation2", 0)?;
                for k in ["a_start", "a_stop", "b_start", "b_stop"] {
                    self.check(self.float(k) >= 0.0, k, "amplitudes must be >= 0")?;
                }
                self.count("a_count")?;
                self.count("b_count")?;
                self.at_least("n_periods", 1)?;
                self.at_least("steps_per_period", 200)?;
                self.at_least("trajectory_stride", 1)?;
            }
            Experiment::Aah => {
                self.at_least("n", 2)?;
                self.finite("hopping")?;
                self.finite("lambda0")?;
                self.finite("alpha")?;
                self.finite("theta")?;
                self.finite("amplitude")?;
                self.at_least("truncation", 0)?;
                self.positive("omega_start")?;
                self.positive("omega_stop")?;
                self.count("omega_count")?;
                let bw = self.float("bin_width");
                self.check(bw > 0.0 && bw < 1.0, "bin_width", "must lie in (0, 1)")?;
            }
            Experiment::Ssh => {
                self.at_least("n_cells", 2)?;
                self.positive("t_weak")?;
                self.positive("t_strong")?;
                self.check(
                    self.float("t_weak") < self.float("t_strong"),
                    "t_weak",
                    "must be smaller than t_strong",
                )?;
                self.at_least("colocalization_sites", 0)?;
                for v in self.string("variants").split(',') {
                    v.trim().parse::<crate::models::SshVariant>().map_err(|_| {
                        Error::config_key(format!("unknown SSH variant `{}`", v.trim()), "variants", None)
                    })?;
                }
            }
            Experiment::Bbh => {
                self.at_least("n_x", 2)?;
                self.at_least("n_y", 2)?;
                self.finite("gamma")?;
                self.finite("lambda")?;
                self.at_least("colocalization_sites", 0)?;
            }
            Experiment::Bounds => {
                self.at_least("dim", 2)?;
                self.at_least("seed", 0)?;
                self.positive("r")?;
                self.positive("eps")?;
                self.check(self.float("amplitude") >= 0.0, "amplitude", "must be >= 0")?;
                let known = [
                    "random_pd",
                    "random",
                    "hatano_nelson",
                    "diagonal",
                    "anderson",
                    "ssh",
                    "bbh",
                    "two_level",
                ];
                let m = self.string("model");
                self.check(known.contains(&m), "model", &format!("expected one of {}", known.join(", ")))?;
            }
        }
        Ok(())
    }
}
