//! Experiment configuration: a flat `key = value` file merged with command-line
//! overrides, validated into typed parameters before anything runs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use lamplighter::lamp::{make_uniform_measure, LampElement, LampGroup, SwitchMeasure};
use lamplighter::montecarlo::ReturnEstimator;
use lamplighter::walk::BiasParams;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file {path}: {msg}")]
    File { path: String, msg: String },
    #[error("{key}: {msg}")]
    Value { key: String, msg: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Model(#[from] lamplighter::Error),
}

/// Keys accepted in config files and as `--key` flags.
pub const KEYS: &[&str] = &[
    "seed", "replicas", "out", "tol", "budget", "p", "lambda", "lamp", "measure", "graph", "radius", "k",
    "ks", "m", "n", "ns", "x", "s", "t", "r", "c", "m-plus", "m-minus", "visits", "grid", "k-lo", "k-hi",
    "max-len", "estimator",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::File {
            path: origin.to_string(),
            msg: format!("line {}: expected key = value", i + 1),
        })?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::Unknown(key));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

pub fn load_config_file(path: &std::path::Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_config_text(&text, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// The biased walk on Z.
    Integers,
    Line,
    Gamma(u32),
    File(PathBuf),
}

/// A validated run: the command, its resolved key-value settings, and the hash
/// that tags every output.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new(command: &str, values: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        for key in values.keys() {
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::Unknown(key.clone()));
            }
        }
        let cfg = ExperimentConfig {
            command: command.to_string(),
            values,
        };
        cfg.validate_common()?;
        Ok(cfg)
    }

    fn validate_common(&self) -> Result<(), ConfigError> {
        self.seed()?;
        self.replicas()?;
        self.budget()?;
        self.tol()?;
        if self.values.contains_key("p") && self.values.contains_key("lambda") {
            return Err(ConfigError::Value {
                key: "p".into(),
                msg: "give either p or lambda, not both".into(),
            });
        }
        self.graph()?;
        self.estimator()?;
        Ok(())
    }

    /// Sorted `key=value` lines, without the output path.
    pub fn canonical_text(&self) -> String {
        let mut text = format!("command={}\n", self.command);
        for (k, v) in &self.values {
            if k != "out" {
                text.push_str(&format!("{k}={v}\n"));
            }
        }
        text
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::Value {
                    key: key.to_string(),
                    msg: format!("`{v}`: {e}"),
                })
            })
            .transpose()
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim().parse::<T>().map_err(|e| ConfigError::Value {
                            key: key.to_string(),
                            msg: format!("`{item}`: {e}"),
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    /// `key` as a single value or `plural` as a list.
    pub fn one_or_many<T: std::str::FromStr>(&self, key: &str, plural: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match (self.get::<T>(key)?, self.list::<T>(plural)?) {
            (Some(_), Some(_)) => Err(ConfigError::Value {
                key: key.to_string(),
                msg: format!("give either {key} or {plural}"),
            }),
            (Some(v), None) => Ok(vec![v]),
            (None, Some(vs)) if !vs.is_empty() => Ok(vs),
            _ => Err(ConfigError::Missing(key.to_string())),
        }
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        Ok(self.get("seed")?.unwrap_or(1))
    }

    pub fn replicas(&self) -> Result<u64, ConfigError> {
        let r = self.get("replicas")?.unwrap_or(10_000);
        if r == 0 {
            return Err(ConfigError::Value {
                key: "replicas".into(),
                msg: "must be >= 1".into(),
            });
        }
        Ok(r)
    }

    pub fn budget(&self) -> Result<u64, ConfigError> {
        let b = self.get("budget")?.unwrap_or(lamplighter::dynamics::DEFAULT_STEP_BUDGET);
        if b == 0 {
            return Err(ConfigError::Value {
                key: "budget".into(),
                msg: "must be >= 1".into(),
            });
        }
        Ok(b)
    }

    pub fn tol(&self) -> Result<f64, ConfigError> {
        let t: f64 = self.get("tol")?.unwrap_or(lamplighter::exact::DEFAULT_TOL);
        if !(t > 0.0 && t < 1.0) {
            return Err(ConfigError::Value {
                key: "tol".into(),
                msg: "must lie in (0, 1)".into(),
            });
        }
        Ok(t)
    }

    pub fn estimator(&self) -> Result<ReturnEstimator, ConfigError> {
        match self.raw("estimator").unwrap_or("direct") {
            "direct" => Ok(ReturnEstimator::Direct),
            "conditional" => Ok(ReturnEstimator::Conditional),
            other => Err(ConfigError::Value {
                key: "estimator".into(),
                msg: format!("`{other}`: expected direct or conditional"),
            }),
        }
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.raw("out").map(PathBuf::from)
    }

    pub fn graph(&self) -> Result<GraphSpec, ConfigError> {
        let raw = self.raw("graph").unwrap_or("z");
        let bad = |msg: &str| ConfigError::Value {
            key: "graph".into(),
            msg: format!("`{raw}`: {msg}"),
        };
        match raw {
            "z" => Ok(GraphSpec::Integers),
            "line" => Ok(GraphSpec::Line),
            _ => {
                if let Some(m) = raw.strip_prefix("gamma:") {
                    let m: u32 = m.parse().map_err(|_| bad("expected gamma:<copies>"))?;
                    if m < 1 {
                        return Err(bad("copies must be >= 1"));
                    }
                    Ok(GraphSpec::Gamma(m))
                } else if let Some(path) = raw.strip_prefix("file:") {
                    Ok(GraphSpec::File(PathBuf::from(path)))
                } else {
                    Err(bad("expected z, line, gamma:<m> or file:<path>"))
                }
            }
        }
    }

    /// Drift as `λ`, from either `lambda` or `p`.
    pub fn lambda(&self) -> Result<f64, ConfigError> {
        if let Some(l) = self.get::<f64>("lambda")? {
            if !(l >= 1.0 && l.is_finite()) {
                return Err(ConfigError::Value {
                    key: "lambda".into(),
                    msg: "must be >= 1".into(),
                });
            }
            return Ok(l);
        }
        Ok(self.bias()?.lambda())
    }

    pub fn bias(&self) -> Result<BiasParams, ConfigError> {
        if let Some(p) = self.get::<f64>("p")? {
            return Ok(BiasParams::new(p)?);
        }
        if let Some(l) = self.get::<f64>("lambda")? {
            return Ok(BiasParams::from_lambda(l)?);
        }
        Err(ConfigError::Missing("p".into()))
    }

    /// `lamp = N` for `Z/N`, or `lamp = int` for the integers.
    pub fn lamp_group(&self) -> Result<LampGroup, ConfigError> {
        match self.raw("lamp").unwrap_or("2") {
            "int" => Ok(LampGroup::Integers),
            v => {
                let n: u64 = v.parse().map_err(|_| ConfigError::Value {
                    key: "lamp".into(),
                    msg: format!("`{v}`: expected an order or `int`"),
                })?;
                Ok(LampGroup::cyclic(n)?)
            }
        }
    }

    pub fn lamp_order(&self) -> Result<u64, ConfigError> {
        match self.lamp_group()? {
            LampGroup::Cyclic(n) if n >= 2 => Ok(n),
            _ => Err(ConfigError::Value {
                key: "lamp".into(),
                msg: "this command needs a finite lamp group of order >= 2".into(),
            }),
        }
    }

    /// `measure = h:prob,h:prob,...`; uniform on the lamp group when absent.
    pub fn measure(&self) -> Result<SwitchMeasure, ConfigError> {
        let group = self.lamp_group()?;
        match self.raw("measure") {
            None => Ok(make_uniform_measure(group)?),
            Some(spec) => {
                let support = parse_pairs::<LampElement, f64>(spec, "measure")?;
                Ok(SwitchMeasure::new(group, &support)?)
            }
        }
    }
}

/// `a:b,a:b,...`
pub fn parse_pairs<A, B>(spec: &str, key: &str) -> Result<Vec<(A, B)>, ConfigError>
where
    A: std::str::FromStr,
    B: std::str::FromStr,
{
    spec.split(',')
        .map(|item| {
            let bad = || ConfigError::Value {
                key: key.to_string(),
                msg: format!("`{item}`: expected a:b"),
            };
            let (a, b) = item.trim().rsplit_once(':').ok_or_else(bad)?;
            Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pairs: &[(&str, &str)]) -> Result<ExperimentConfig, ConfigError> {
        let map = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        ExperimentConfig::new("exact ret-prob", map)
    }

    #[test]
    fn parses_file_text() {
        let map = parse_config_text("# comment\nseed = 5\nk_lo=10  # trailing\n\n", "t").unwrap();
        assert_eq!(map["seed"], "5");
        assert_eq!(map["k-lo"], "10");
        assert!(parse_config_text("seed 5", "t").is_err());
        assert!(matches!(parse_config_text("colour = red", "t"), Err(ConfigError::Unknown(_))));
    }

    #[test]
    fn hash_ignores_out_and_order() {
        let a = cfg(&[("k", "10"), ("p", "0.8"), ("out", "a.csv")]).unwrap();
        let b = cfg(&[("p", "0.8"), ("k", "10"), ("out", "b.csv")]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = cfg(&[("k", "11"), ("p", "0.8")]).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(cfg(&[("replicas", "0")]).is_err());
        assert!(cfg(&[("seed", "abc")]).is_err());
        assert!(cfg(&[("p", "0.8"), ("lambda", "4")]).is_err());
        assert!(cfg(&[("graph", "torus")]).is_err());
        assert!(cfg(&[("tol", "2")]).is_err());
        assert!(cfg(&[("p", "0.4")]).unwrap().bias().is_err());
    }

    #[test]
    fn measures_and_graphs() {
        let c = cfg(&[("lamp", "int"), ("measure", "-1:0.25,0:0.5,1:0.25")]).unwrap();
        assert_eq!(c.measure().unwrap().support().len(), 3);
        assert!(cfg(&[("lamp", "int")]).unwrap().measure().is_err());
        assert_eq!(cfg(&[("graph", "gamma:3")]).unwrap().graph().unwrap(), GraphSpec::Gamma(3));
        let c = cfg(&[("p", "0.8")]).unwrap();
        assert!((c.lambda().unwrap() - 4.0).abs() < 1e-12);
    }
}
