//! Run configuration: JSON files plus a flat `--key value` override grammar.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::ellipticity::MatrixPreset;
use crate::error::{Error, Result};
use crate::geometry::DomainPreset;
use crate::solver::{DataFamily, DriftSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Ellipticity,
    Certify,
    Solve,
    Ntmax,
    Rh,
    Localize,
    Extrapolate,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Ellipticity,
        Command::Certify,
        Command::Solve,
        Command::Ntmax,
        Command::Rh,
        Command::Localize,
        Command::Extrapolate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Ellipticity => "ellipticity",
            Command::Certify => "certify",
            Command::Solve => "solve",
            Command::Ntmax => "ntmax",
            Command::Rh => "rh",
            Command::Localize => "localize",
            Command::Extrapolate => "extrapolate",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown command {name:?}")))
    }
}

fn default_matrix() -> MatrixPreset {
    MatrixPreset::Identity
}

fn default_aperture() -> f64 {
    1.0
}

fn default_m() -> usize {
    crate::experiments::DEFAULT_M
}

/// Configuration of one run. Unset fields get per-command defaults in
/// [`RunConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub domain: Option<DomainPreset>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub refinements: Option<usize>,
    #[serde(default = "default_matrix")]
    pub matrix: MatrixPreset,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub drift: DriftSpec,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default = "default_aperture")]
    pub a: f64,
    /// Surface ball radii for `localize`.
    #[serde(default)]
    pub d: Option<Vec<f64>>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub data: Option<DataFamily>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self::from_value(command, Value::Object(Map::new())).expect("empty config is valid")
    }

    /// Parses a JSON config for `command`; a `command` field, if present,
    /// must agree.
    pub fn from_value(command: Command, mut value: Value) -> Result<Self> {
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        match obj.get("command") {
            None => {
                obj.insert("command".into(), Value::String(command.name().into()));
            }
            Some(Value::String(c)) if c == command.name() => {}
            Some(other) => {
                return Err(Error::Config(format!(
                    "config is for command {other}, not {:?}",
                    command.name()
                )))
            }
        }
        serde_json::from_value(value).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    /// Applies flat overrides on top of `base` and parses the result.
    pub fn with_overrides(command: Command, base: Option<Value>, overrides: &[(String, String)]) -> Result<Self> {
        let mut value = base.unwrap_or_else(|| Value::Object(Map::new()));
        if !value.is_object() {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        for (key, raw) in overrides {
            apply_override(command, &mut value, key, raw)?;
        }
        Self::from_value(command, value)
    }

    /// Materializes every default.
    pub fn resolve(&self) -> Result<Self> {
        let mut c = self.clone();
        let cmd = c.command;
        let domain = c.domain.clone().unwrap_or(match cmd {
            Command::Localize => DomainPreset::Square { side: 9.0 },
            _ => DomainPreset::Square { side: 1.0 },
        });
        let ddim = domain.dim();
        let dim = c.dim.unwrap_or(ddim);
        if cmd != Command::Ellipticity && dim != ddim {
            return Err(Error::Config(format!(
                "dim = {dim} but the {} domain has dimension {ddim}",
                domain.name()
            )));
        }
        if !(2..=3).contains(&dim) && cmd != Command::Ellipticity {
            return Err(Error::Config(format!("dimension {dim} is not 2 or 3")));
        }
        c.h = Some(c.h.unwrap_or(match (cmd, ddim) {
            (Command::Extrapolate, 3) => 1.0 / 8.0,
            (Command::Extrapolate, _) => 1.0 / 16.0,
            (_, 3) => 1.0 / 16.0,
            _ => 1.0 / 32.0,
        }));
        c.refinements = Some(c.refinements.unwrap_or(match cmd {
            Command::Rh | Command::Extrapolate => 3,
            _ => 1,
        }));
        c.p = Some(c.p.unwrap_or(match cmd {
            Command::Localize => 4.0,
            _ => 2.0,
        }));
        c.q = Some(c.q.unwrap_or(match cmd {
            Command::Rh => 4.0,
            _ => 2.0,
        }));
        c.p_grid = Some(c.p_grid.clone().unwrap_or_else(|| match (cmd, ddim) {
            (Command::Rh, _) => vec![0.5, 1.0, 2.0],
            (Command::Extrapolate, 3) => vec![2.0, 4.0, 8.0, 24.0, 48.0],
            (Command::Extrapolate, _) => vec![2.0, 4.0, 8.0, 16.0],
            _ => Vec::new(),
        }));
        c.d = Some(c.d.clone().unwrap_or_else(|| match cmd {
            Command::Localize => vec![1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0],
            _ => Vec::new(),
        }));
        if c.data.is_none() && matches!(cmd, Command::Solve | Command::Ntmax) {
            c.data = Some(DataFamily::constant(1.0));
        }
        if c.drift.k > 0.0 && c.drift.rule == crate::solver::DriftRule::Zero {
            return Err(Error::Config("drift K > 0 needs a rule other than zero".into()));
        }
        if !(c.a > 0.0) || !c.a.is_finite() {
            return Err(Error::Config(format!("aperture a = {} must be positive", c.a)));
        }
        if c.h.is_some_and(|h| !(h > 0.0)) {
            return Err(Error::Config("h must be positive".into()));
        }
        if c.refinements == Some(0) {
            return Err(Error::Config("refinements must be at least 1".into()));
        }
        c.domain = Some(domain);
        c.dim = Some(dim);
        c.out = Some(c.out.clone().unwrap_or_else(|| format!("out/{}", cmd.name())));
        Ok(c)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Parses `1/64`, plain numbers, and comma separated lists of either.
pub fn parse_scalar(raw: &str) -> Option<f64> {
    let raw = raw.trim();
    if let Some((n, d)) = raw.split_once('/') {
        let (n, d): (f64, f64) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
        return (d != 0.0).then_some(n / d);
    }
    match raw {
        "inf" | "nan" | "infinity" | "+inf" | "-inf" => None,
        _ => raw.parse().ok(),
    }
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn parse_number(key: &str, raw: &str) -> Result<Value> {
    parse_scalar(raw)
        .map(number)
        .ok_or_else(|| Error::Config(format!("--{key}: {raw:?} is not a number")))
}

fn parse_integer(key: &str, raw: &str) -> Result<Value> {
    raw.trim()
        .parse::<u64>()
        .map(Value::from)
        .map_err(|_| Error::Config(format!("--{key}: {raw:?} is not a nonnegative integer")))
}

fn parse_list(key: &str, raw: &str) -> Result<Value> {
    raw.split(',')
        .map(|s| parse_number(key, s))
        .collect::<Result<Vec<_>>>()
        .map(Value::Array)
}

/// Data grammar: `constant:RE[:IM]`, `polynomial:NAME`,
/// `bumps:SEED:COUNT:SCALE`, `atom:X,Y[,Z]:R`, or a JSON object.
pub fn parse_data(raw: &str) -> Result<DataFamily> {
    let bad = || Error::Config(format!("--data: cannot parse {raw:?}"));
    if raw.trim_start().starts_with('{') {
        return serde_json::from_str(raw).map_err(|e| Error::Config(format!("--data: {e}")));
    }
    let parts: Vec<&str> = raw.split(':').collect();
    let num = |s: &str| parse_scalar(s).ok_or_else(bad);
    Ok(match parts.as_slice() {
        ["constant", re] => DataFamily::Constant { re: num(re)?, im: 0.0 },
        ["constant", re, im] => DataFamily::Constant {
            re: num(re)?,
            im: num(im)?,
        },
        ["polynomial", name] => DataFamily::PolynomialTrace {
            polynomial: crate::solver::Polynomial::from_name(name)?,
        },
        ["bumps", seed, count, scale] => DataFamily::RandomBumps {
            seed: seed.parse().map_err(|_| bad())?,
            count: count.parse().map_err(|_| bad())?,
            scale: num(scale)?,
        },
        ["atom", center, r] => DataFamily::Atom {
            center: center.split(',').map(num).collect::<Result<_>>()?,
            radius: num(r)?,
        },
        _ => return Err(bad()),
    })
}

fn object<'a>(root: &'a mut Value, key: &str) -> Result<&'a mut Map<String, Value>> {
    let root = root.as_object_mut().expect("root is an object");
    let slot = root.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
    slot.as_object_mut()
        .ok_or_else(|| Error::Config(format!("config field {key:?} must be an object")))
}

fn set_nested(root: &mut Value, section: &str, field: &str, v: Value) -> Result<()> {
    object(root, section)?.insert(field.to_string(), v);
    Ok(())
}

fn set_top(root: &mut Value, field: &str, v: Value) {
    root.as_object_mut()
        .expect("root is an object")
        .insert(field.to_string(), v);
}

/// Applies one `--key value` pair. Dashes and underscores are equivalent.
pub fn apply_override(command: Command, root: &mut Value, key: &str, raw: &str) -> Result<()> {
    let key = key.trim_start_matches("--").replace('-', "_");
    let s = || Value::String(raw.to_string());
    match key.as_str() {
        "preset" if command == Command::Ellipticity => set_nested(root, "matrix", "preset", s())?,
        "preset" | "domain" => set_nested(root, "domain", "preset", s())?,
        "side" | "slope" | "period" => set_nested(root, "domain", &key, parse_number(&key, raw)?)?,
        "matrix" => set_nested(root, "matrix", "preset", s())?,
        "tau" | "epsilon" => set_nested(root, "matrix", &key, parse_number(&key, raw)?)?,
        "eigenvalues" | "base" => set_nested(root, "matrix", &key, parse_list(&key, raw)?)?,
        "path" => set_nested(root, "matrix", "path", s())?,
        "k" | "drift_k" => {
            set_nested(root, "drift", "k", parse_number(&key, raw)?)?;
            let drift = object(root, "drift")?;
            drift.entry("rule").or_insert_with(|| Value::String("radial_inward".into()));
        }
        "rule" | "drift_rule" => set_nested(root, "drift", "rule", s())?,
        "profile" | "drift_profile" => set_nested(root, "drift", "profile", s())?,
        "direction" | "drift_direction" => set_nested(root, "drift", "direction", parse_list(&key, raw)?)?,
        "h" | "p" | "q" | "a" => set_top(root, &key, parse_number(&key, raw)?),
        "p_grid" | "d" => set_top(root, &key, parse_list(&key, raw)?),
        "refinements" | "dim" | "m" | "seed" | "jobs" => set_top(root, &key, parse_integer(&key, raw)?),
        "out" => set_top(root, "out", s()),
        "data" => set_top(root, "data", serde_json::to_value(parse_data(raw)?)?),
        _ => return Err(Error::Config(format!("unknown flag --{key}"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn preset_means_matrix_for_ellipticity() {
        let c = RunConfig::with_overrides(
            Command::Ellipticity,
            None,
            &ov(&[("preset", "scalar_complex"), ("tau", "1"), ("dim", "3")]),
        )
        .unwrap();
        assert_eq!(c.matrix, MatrixPreset::ScalarComplex { tau: 1.0 });
        assert_eq!(c.dim, Some(3));
    }

    #[test]
    fn preset_means_domain_elsewhere() {
        let c = RunConfig::with_overrides(Command::Certify, None, &ov(&[("preset", "square"), ("h", "1/64")]))
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(c.domain, Some(DomainPreset::Square { side: 1.0 }));
        assert_eq!(c.h, Some(1.0 / 64.0));
    }

    #[test]
    fn unknown_flags_are_errors() {
        assert!(RunConfig::with_overrides(Command::Solve, None, &ov(&[("bogus", "1")])).is_err());
        let v = serde_json::json!({ "bogus": 1 });
        assert!(RunConfig::from_value(Command::Solve, v).is_err());
        assert!(RunConfig::with_overrides(Command::Solve, None, &ov(&[("h", "x")])).is_err());
    }

    #[test]
    fn data_grammar() {
        assert_eq!(parse_data("constant:1").unwrap(), DataFamily::constant(1.0));
        assert!(matches!(parse_data("polynomial:x2-y2").unwrap(), DataFamily::PolynomialTrace { .. }));
        assert_eq!(
            parse_data("atom:0.5,1:1/2").unwrap(),
            DataFamily::Atom {
                center: vec![0.5, 1.0],
                radius: 0.5
            }
        );
        assert!(matches!(
            parse_data("bumps:3:5:0.25").unwrap(),
            DataFamily::RandomBumps { seed: 3, count: 5, .. }
        ));
        assert!(parse_data("atom:1").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        for cmd in Command::ALL {
            let c = RunConfig::new(cmd).resolve().unwrap();
            let back = RunConfig::from_value(cmd, c.to_value()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.resolve().unwrap(), c);
        }
    }

    #[test]
    fn drift_strength_implies_radial_rule() {
        let c = RunConfig::with_overrides(Command::Solve, None, &ov(&[("k", "0.05")])).unwrap();
        assert_eq!(c.drift, DriftSpec::radial_inward(0.05));
    }

    #[test]
    fn mismatched_command_is_rejected() {
        let v = serde_json::json!({ "command": "rh" });
        assert!(RunConfig::from_value(Command::Solve, v).is_err());
    }
}
