//! Run configuration: JSON schema, grid expansion and validation.
//!
//! See `docs/config.md` at the repository root for the schema.

use std::path::Path;

use serde::{Deserialize, Serialize};

use levy_triple::joint_cpdf::{EngineConfig, Method};
use levy_triple::laplace::GwrConfig;
use levy_triple::{FtdHorizon, LevyModel};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Kobol {
        nu: f64,
        lambda_minus: f64,
        lambda_plus: f64,
        #[serde(default)]
        mu: f64,
        m2: f64,
    },
    Brownian {
        sigma: f64,
        #[serde(default)]
        mu: f64,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<LevyModel, CliError> {
        let m = match *self {
            ModelSpec::Kobol {
                nu,
                lambda_minus,
                lambda_plus,
                mu,
                m2,
            } => LevyModel::kobol(nu, lambda_minus, lambda_plus, mu, m2),
            ModelSpec::Brownian { sigma, mu } => LevyModel::brownian(sigma, mu),
        };
        m.map_err(|e| CliError::field("model", e.to_string()))
    }
}

/// A list of values or a range string `start:step:stop`, optionally scaled as
/// `c*(start:step:stop)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range(String),
}

fn num(s: &str, path: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::field(path, format!("`{s}` is not a number")))
}

impl GridSpec {
    pub fn expand(&self, path: &str) -> Result<Vec<f64>, CliError> {
        let mut v = match self {
            GridSpec::List(v) => v.clone(),
            GridSpec::Range(s) => parse_range(s, path)?,
        };
        if v.is_empty() {
            return Err(CliError::field(path, "grid is empty"));
        }
        if let Some(x) = v.iter().find(|x| !x.is_finite()) {
            return Err(CliError::field(path, format!("non-finite value {x}")));
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        Ok(v)
    }
}

fn parse_range(s: &str, path: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    let (scale, body) = match s.split_once('*') {
        Some((c, rest)) => {
            let rest = rest.trim();
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| CliError::field(path, format!("expected c*(start:step:stop), got `{s}`")))?;
            (num(c, path)?, inner)
        }
        None => (1.0, s),
    };
    let parts: Vec<&str> = body.split(':').collect();
    match parts.as_slice() {
        [x] => Ok(vec![scale * num(x, path)?]),
        [a, st, b] => {
            let (a, st, b) = (num(a, path)?, num(st, path)?, num(b, path)?);
            if st == 0.0 || !st.is_finite() {
                return Err(CliError::field(path, "step must be nonzero"));
            }
            let n = ((b - a) / st + 1e-9).floor();
            if n < 0.0 {
                return Ok(Vec::new());
            }
            if n > 1e6 {
                return Err(CliError::field(path, "range has more than 1e6 entries"));
            }
            Ok((0..=n as usize).map(|i| scale * (a + i as f64 * st)).collect())
        }
        _ => Err(CliError::field(path, format!("cannot parse grid `{s}`"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    #[serde(rename = "T")]
    pub big_t: f64,
    pub t: f64,
    pub a1: GridSpec,
    pub a2: GridSpec,
}

/// Overrides of the numerical scheme; absent fields keep the library defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ne: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ne_whf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dh: Option<f64>,
    /// Number of transform values of the GWR rule (2M).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gwr_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gwr_shift: Option<f64>,
    /// Angle factor of the control run; 0 disables it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ftd_horizon: Option<FtdHorizon>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default = "yes")]
    pub include_error_estimates: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            format: Format::Csv,
            path: None,
            include_error_estimates: true,
        }
    }
}

fn default_method() -> Method {
    Method::Sinh
}

fn default_threads() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub query: QuerySpec,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub scheme: SchemeOverrides,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

/// A config with its grids expanded and checked.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub model: LevyModel,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub engine: EngineConfig,
}

impl Resolved {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.a1
            .iter()
            .flat_map(|&x| self.a2.iter().map(move |&y| (x, y)))
            .collect()
    }
}

/// Accepts a plain config or a sidecar written by `run` (its `config` member).
pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::field("$", e.to_string()))?;
    let value = match value {
        serde_json::Value::Object(mut m) if m.contains_key("config") && m.contains_key("scheme") => {
            m.remove("config").unwrap_or_default()
        }
        v => v,
    };
    serde_path_to_error::deserialize(value).map_err(|e| {
        let p = e.path().to_string();
        CliError::field(if p == "." { "$" } else { &p }, e.into_inner().to_string())
    })
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let model = self.model.build()?;
        let a1 = self.query.a1.expand("query.a1")?;
        let a2 = self.query.a2.expand("query.a2")?;
        let q = &self.query;
        if !(q.big_t > 0.0 && q.big_t.is_finite()) {
            return Err(CliError::field("query.T", "must be positive"));
        }
        if !(q.t > 0.0 && q.t <= q.big_t) {
            return Err(CliError::field("query.t", format!("need 0 < t <= T, got {}", q.t)));
        }
        if self.threads == 0 {
            return Err(CliError::field("threads", "must be at least 1"));
        }
        let s = &self.scheme;
        let mut engine = EngineConfig::default();
        if let Some(ne) = s.ne {
            engine.ne = ne;
            engine.ne_whf = s.ne_whf.unwrap_or(ne + 2.0);
        } else if let Some(w) = s.ne_whf {
            engine.ne_whf = w;
        }
        if let Some(dh) = s.dh {
            engine.dh = dh;
        }
        if let Some(n) = s.gwr_nodes {
            if n % 2 != 0 {
                return Err(CliError::field("scheme.gwr_nodes", "must be even"));
            }
            engine.gwr = GwrConfig { m: n / 2, ..engine.gwr };
        }
        if let Some(a) = s.gwr_shift {
            engine.gwr.shift = a;
        }
        if let Some(k) = s.pair_scale {
            engine.pair_scale = (k > 0.0).then_some(k);
        }
        if let Some(h) = s.ftd_horizon {
            engine.ftd_horizon = h;
        }
        engine.validate().map_err(|e| CliError::field("scheme", e.to_string()))?;
        Ok(Resolved {
            config: self.clone(),
            model,
            a1,
            a2,
            engine,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_forms() {
        let g = GridSpec::Range("0.005*(-20:1:20)".into()).expand("a").unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], -0.1);
        assert_eq!(g[20], 0.0);
        let g = GridSpec::Range("0.025:0.025:0.125".into()).expand("a").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[4] - 0.125).abs() < 1e-15);
        assert_eq!(GridSpec::Range("0.3".into()).expand("a").unwrap(), vec![0.3]);
        assert_eq!(GridSpec::List(vec![0.2, 0.1, 0.2]).expand("a").unwrap(), vec![0.1, 0.2]);
    }

    #[test]
    fn bad_grids_name_the_field() {
        for g in [
            GridSpec::List(vec![]),
            GridSpec::Range("1:1:0".into()),
            GridSpec::Range("0:0:1".into()),
            GridSpec::Range("x".into()),
            GridSpec::Range("2*0:1:3".into()),
        ] {
            let e = g.expand("query.a2").unwrap_err().to_string();
            assert!(e.contains("query.a2"), "{e}");
        }
    }

    #[test]
    fn unknown_fields_are_reported_with_paths() {
        let text = r#"{"model":{"kind":"brownian","sigma":1},"query":{"T":1,"t":0.5,"a1":[0],"a2":[1],"extra":1}}"#;
        let e = parse(text).unwrap_err().to_string();
        assert!(e.contains("query"), "{e}");
        let text = r#"{"model":{"kind":"brownian","sigma":1},"query":{"T":1,"t":0.5,"a1":[0],"a2":[1]},"method":"fast"}"#;
        let e = parse(text).unwrap_err().to_string();
        assert!(e.contains("method"), "{e}");
    }

    #[test]
    fn overrides_apply() {
        let text = r#"{"model":{"kind":"brownian","sigma":1},"query":{"T":1,"t":0.5,"a1":[0],"a2":[1]},
            "scheme":{"ne":6,"gwr_nodes":12,"pair_scale":0}}"#;
        let r = parse(text).unwrap().resolve().unwrap();
        assert_eq!(r.engine.ne, 6.0);
        assert_eq!(r.engine.ne_whf, 8.0);
        assert_eq!(r.engine.gwr.m, 6);
        assert_eq!(r.engine.pair_scale, None);
    }
}
