use serde::{Deserialize, Serialize};

use super::LoadingProgram;
use crate::error::{Error, Issue, Result};
use crate::integrator::SolverOptions;
use crate::material::{validate_at, MaterialParams};

/// One SVG to write after a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    /// Defaults to `<y>_vs_<x>.svg`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

impl PlotSpec {
    pub fn file_name(&self) -> String {
        self.file
            .clone()
            .unwrap_or_else(|| format!("{}_vs_{}.svg", self.y, self.x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default)]
    pub plots: Vec<PlotSpec>,
}

fn default_csv() -> String {
    "trajectory.csv".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            csv: default_csv(),
            plots: Vec::new(),
        }
    }
}

/// A fully validated config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub material: MaterialParams,
    pub program: LoadingProgram,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Parses and validates a JSON config.
///
/// Unknown keys and type errors stop parsing at the first offending path.
/// Value checks on a well-formed file are collected together.
pub fn parse_config(text: &str) -> Result<Config> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        Error::Config(vec![Issue::new(path, e.into_inner().to_string())])
    })?;
    let mut issues = validate_at(&cfg.material, "material.").issues;
    issues.extend(cfg.solver.validate_at("solver."));
    if issues.is_empty() {
        issues.extend(cfg.program.validate_at(&cfg.material, "program."));
    }
    for (k, plot) in cfg.output.plots.iter().enumerate() {
        for (key, name) in [("x", &plot.x), ("y", &plot.y)] {
            if super::output::column_index(name).is_none() {
                issues.push(Issue::new(
                    format!("output.plots[{k}].{key}"),
                    format!("unknown column `{name}`"),
                ));
            }
        }
    }
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(issues))
    }
}
