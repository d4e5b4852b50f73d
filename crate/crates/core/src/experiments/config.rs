//! JSON run configuration.
//!
//! ```json
//! {
//!   "scenario":   { "elements": 16, "p_bs_dbm": 33, "omega_si_db": -90 },
//!   "experiment": { "kind": "power-vs-si", "trials": 50, "schemes": ["ris-fd", "nofd"] }
//! }
//! ```
//!
//! Scenario keys ending in `_dbm` are read as dBm and stored in watts under
//! the bare name; keys ending in `_db` are converted to linear scale the same
//! way. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;
use serde_json::{Map, Value};

use super::{ExperimentKind, ExperimentSpec, Scheme};
use crate::alt_opt::AoConfig;
use crate::error::{Error, Result};
use crate::scenario::{db_to_linear, dbm_to_watts, ScenarioConfig};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: Option<ExperimentKind>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub schemes: Option<Vec<Scheme>>,
    pub elements: Option<Vec<usize>>,
    pub rf_grid: Option<Vec<f64>>,
    pub si_grid_db: Option<Vec<f64>>,
    pub ao: Option<AoConfig>,
    pub verify_step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub scenario: ScenarioConfig,
    /// Whether the scenario object set `elements`; if so it seeds the RIS-size
    /// list when the experiment section leaves it out.
    pub scenario_sets_elements: bool,
    pub experiment: ExperimentSection,
}

type Convert = fn(f64) -> f64;

fn convert_units(obj: Map<String, Value>) -> Result<Map<String, Value>> {
    let mut out = Map::new();
    for (key, value) in obj {
        let conv: Option<(&str, Convert)> = if let Some(k) = key.strip_suffix("_dbm") {
            Some((k, dbm_to_watts))
        } else if let Some(k) = key.strip_suffix("_db") {
            Some((k, db_to_linear))
        } else {
            None
        };
        let (name, value) = match conv {
            Some((name, f)) => {
                let x = value
                    .as_f64()
                    .ok_or_else(|| Error::Config(format!("scenario.{key} must be a number")))?;
                (name.to_string(), Value::from(f(x)))
            }
            None => (key, value),
        };
        if out.insert(name.clone(), value).is_some() {
            return Err(Error::Config(format!("scenario.{name} is given twice")));
        }
    }
    Ok(out)
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        let Value::Object(mut root) = root else {
            return Err(Error::Config("config must be a JSON object".into()));
        };
        if let Some(k) = root.keys().find(|k| *k != "scenario" && *k != "experiment") {
            return Err(Error::Config(format!("unknown top-level key `{k}`")));
        }
        let (scenario, scenario_sets_elements) = match root.remove("scenario") {
            None => (ScenarioConfig::default(), false),
            Some(Value::Object(obj)) => {
                let obj = convert_units(obj)?;
                let sets = obj.contains_key("elements");
                let cfg = serde_json::from_value(Value::Object(obj)).map_err(|e| Error::Config(format!("scenario: {e}")))?;
                (cfg, sets)
            }
            Some(_) => return Err(Error::Config("`scenario` must be an object".into())),
        };
        let experiment = match root.remove("experiment") {
            None => ExperimentSection::default(),
            Some(v) => serde_json::from_value(v).map_err(|e| Error::Config(format!("experiment: {e}")))?,
        };
        Ok(Self {
            scenario,
            scenario_sets_elements,
            experiment,
        })
    }

    /// Merges the file over the defaults of the chosen experiment kind.
    /// `kind` overrides the file's own `experiment.kind`.
    pub fn into_spec(self, kind: Option<ExperimentKind>) -> Result<ExperimentSpec> {
        let kind = kind
            .or(self.experiment.kind)
            .ok_or_else(|| Error::Config("no experiment kind given".into()))?;
        let mut spec = ExperimentSpec::new(kind);
        let e = self.experiment;
        if self.scenario_sets_elements {
            spec.elements = vec![self.scenario.elements];
        }
        spec.scenario = self.scenario;
        if let Some(v) = e.trials {
            spec.trials = v;
        }
        if let Some(v) = e.seed {
            spec.seed = v;
        }
        if let Some(v) = e.schemes {
            spec.schemes = v;
        }
        if let Some(v) = e.elements {
            spec.elements = v;
        }
        if let Some(v) = e.rf_grid {
            spec.rf_grid = v;
        }
        if let Some(v) = e.si_grid_db {
            spec.si_grid_db = v;
        }
        if let Some(v) = e.ao {
            spec.ao = v;
        }
        if e.verify_step.is_some() {
            spec.verify_step = e.verify_step;
        }
        spec.validate()?;
        Ok(spec)
    }
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    ConfigFile::from_json(&text)
}
