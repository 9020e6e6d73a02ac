//! Scenario-tree files and a quantile-style helper for test trees.
//!
//! Trees are ingested, not generated: a tree file lists nodes with
//! probabilities and either scale factors applied to the case's base
//! profiles or paths to replacement profile CSVs. The bundled generator
//! builds simple scale-factor trees for studies and is not a forecasting
//! method.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planning::{ScenarioTree, TreeNode};
use crate::workbench::casefile::CaseBundle;
use crate::workbench::profiles;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NodeEntry {
    probability: f64,
    #[serde(default)]
    load_scale: Option<f64>,
    #[serde(default)]
    wind_scale: Option<f64>,
    #[serde(default)]
    load_profile: Option<String>,
    #[serde(default)]
    wind_profile: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TreeFile {
    delta_t_hours: f64,
    /// Steps per node; defaults to the base profile length.
    #[serde(default)]
    steps: Option<usize>,
    node: Vec<NodeEntry>,
}

/// Load a scenario tree, resolving scales against the case's base profiles.
pub fn load_tree(path: &Path, case: &CaseBundle) -> Result<ScenarioTree> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        location: "open".into(),
        message: e.to_string(),
    })?;
    let file: TreeFile = toml::from_str(&text).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        location: "toml".into(),
        message: e.to_string(),
    })?;
    let steps = file.steps.unwrap_or(case.load.len());
    if steps > case.load.len() {
        return Err(Error::Parse {
            file: path.display().to_string(),
            location: "steps".into(),
            message: format!("{steps} steps requested, base profiles span {}", case.load.len()),
        });
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut nodes = Vec::new();
    for entry in &file.node {
        let load = match &entry.load_profile {
            Some(p) => profiles::read_profile(&dir.join(p))?.0,
            None => {
                let s = entry.load_scale.unwrap_or(1.0);
                case.load[..steps]
                    .iter()
                    .map(|row| row.iter().map(|v| v * s).collect())
                    .collect()
            }
        };
        let wind = match &entry.wind_profile {
            Some(p) => profiles::read_profile(&dir.join(p))?.0,
            None => {
                let s = entry.wind_scale.unwrap_or(1.0);
                case.wind[..steps]
                    .iter()
                    .map(|row| row.iter().map(|v| v * s).collect())
                    .collect()
            }
        };
        nodes.push(TreeNode {
            probability: entry.probability,
            load,
            gfl_available: wind,
        });
    }
    let tree = ScenarioTree {
        nodes,
        delta_t_hours: file.delta_t_hours,
        steps,
    };
    tree.validate(&case.system).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        location: "tree".into(),
        message: e.to_string(),
    })?;
    Ok(tree)
}

/// Write a scale-factor tree file.
pub fn write_tree_file(path: &Path, delta_t_hours: f64, steps: usize, scales: &[(f64, f64, f64)]) -> Result<()> {
    let file = TreeFile {
        delta_t_hours,
        steps: Some(steps),
        node: scales
            .iter()
            .map(|&(probability, load_scale, wind_scale)| NodeEntry {
                probability,
                load_scale: Some(load_scale),
                wind_scale: Some(wind_scale),
                load_profile: None,
                wind_profile: None,
            })
            .collect(),
    };
    std::fs::write(path, toml::to_string_pretty(&file)?)?;
    Ok(())
}

/// Symmetric quantile-style tree around the base profiles: `branches` nodes
/// with wind scaled across `[1 - spread, 1 + spread]` at equal probability.
pub fn quantile_tree(case: &CaseBundle, steps: usize, branches: usize, spread: f64) -> ScenarioTree {
    let n = branches.max(1);
    let nodes = (0..n)
        .map(|i| {
            let frac = if n == 1 {
                0.0
            } else {
                2.0 * (i as f64 / (n - 1) as f64) - 1.0
            };
            let ws = (1.0 + spread * frac).max(0.0);
            TreeNode {
                probability: 1.0 / n as f64,
                load: case.load[..steps].to_vec(),
                gfl_available: case.wind[..steps]
                    .iter()
                    .map(|row| row.iter().map(|v| v * ws).collect())
                    .collect(),
            }
        })
        .collect();
    ScenarioTree {
        nodes,
        delta_t_hours: 1.0,
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workbench::{casefile, fixtures};

    #[test]
    fn tree_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let case_path = dir.path().join("c.toml");
        let system = fixtures::five_bus();
        let (load, wind) = fixtures::base_profiles(&system, &fixtures::five_bus_peak_load(), 24, 1);
        let bundle = CaseBundle { system, load, wind };
        casefile::write_case(&case_path, &bundle).unwrap();

        let tree_path = dir.path().join("t.toml");
        write_tree_file(&tree_path, 1.0, 24, &[(0.5, 1.0, 0.8), (0.5, 1.0, 1.2)]).unwrap();
        let tree = load_tree(&tree_path, &bundle).unwrap();
        assert_eq!(tree.nodes.len(), 2);
        assert_eq!(tree.steps, 24);
        assert!((tree.nodes[1].gfl_available[0][0] - 1.2 * bundle.wind[0][0]).abs() < 1e-9);
    }

    #[test]
    fn quantile_tree_probabilities() {
        let system = fixtures::five_bus();
        let (load, wind) = fixtures::base_profiles(&system, &fixtures::five_bus_peak_load(), 24, 1);
        let bundle = CaseBundle { system, load, wind };
        let tree = quantile_tree(&bundle, 24, 3, 0.4);
        tree.validate(&bundle.system).unwrap();
    }
}
