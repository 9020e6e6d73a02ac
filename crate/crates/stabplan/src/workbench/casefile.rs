//! Versioned case files: the grid description plus base profile references.
//!
//! The format is TOML with field names matching the domain types; hourly
//! profiles live in sibling CSV files referenced from the `[profiles]`
//! table. `docs/formats.md` documents the layout.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Branch, Bus, IbrUnit, PowerSystem, StabilityLimits, SyncUnit};
use crate::workbench::profiles;

pub const CASE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemHeader {
    s_base_mva: f64,
    max_sc_count: usize,
    max_gfm_count: usize,
    gscr_limit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SccLimitEntry {
    bus: usize,
    i_f_lim: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileRefs {
    load: String,
    wind: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CaseFile {
    version: u32,
    system: SystemHeader,
    #[serde(default)]
    bus: Vec<Bus>,
    #[serde(default)]
    branch: Vec<Branch>,
    #[serde(default)]
    sync_unit: Vec<SyncUnit>,
    #[serde(default)]
    ibr_unit: Vec<IbrUnit>,
    #[serde(default)]
    scc_limit: Vec<SccLimitEntry>,
    profiles: ProfileRefs,
}

/// A parsed case: the validated system plus its base hourly profiles.
#[derive(Debug, Clone)]
pub struct CaseBundle {
    pub system: PowerSystem,
    /// `[hour][bus]`, MW.
    pub load: Vec<Vec<f64>>,
    /// `[hour][gfl unit]`, MW available.
    pub wind: Vec<Vec<f64>>,
}

/// Parse and validate a case file and the profiles it references.
pub fn parse_case(path: &Path) -> Result<CaseBundle> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        location: "open".into(),
        message: e.to_string(),
    })?;
    let case: CaseFile = toml::from_str(&text).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        location: "toml".into(),
        message: e.to_string(),
    })?;
    if case.version != CASE_VERSION {
        return Err(Error::Parse {
            file: path.display().to_string(),
            location: "version".into(),
            message: format!("unsupported version {} (expected {CASE_VERSION})", case.version),
        });
    }
    let system = PowerSystem {
        buses: case.bus,
        branches: case.branch,
        sync_units: case.sync_unit,
        ibr_units: case.ibr_unit,
        s_base: case.system.s_base_mva,
        max_sc_count: case.system.max_sc_count,
        max_gfm_count: case.system.max_gfm_count,
        limits: StabilityLimits {
            scc: case.scc_limit.iter().map(|e| (e.bus, e.i_f_lim)).collect(),
            gscr: case.system.gscr_limit,
        },
    };
    system.validate().map_err(|e| Error::Parse {
        file: path.display().to_string(),
        location: "system".into(),
        message: e.to_string(),
    })?;

    let dir = path.parent().unwrap_or(Path::new("."));
    let load_path = dir.join(&case.profiles.load);
    let wind_path = dir.join(&case.profiles.wind);
    let (load, load_names) = profiles::read_profile(&load_path)?;
    let (wind, wind_names) = profiles::read_profile(&wind_path)?;
    if load_names.len() != system.buses.len() {
        return Err(Error::Parse {
            file: load_path.display().to_string(),
            location: "header".into(),
            message: format!(
                "load profile has {} columns, system has {} buses",
                load_names.len(),
                system.buses.len()
            ),
        });
    }
    let n_gfl = system.gfl_units().count();
    if wind_names.len() != n_gfl {
        return Err(Error::Parse {
            file: wind_path.display().to_string(),
            location: "header".into(),
            message: format!(
                "wind profile has {} columns, system has {} grid-following units",
                wind_names.len(),
                n_gfl
            ),
        });
    }
    if load.len() != wind.len() {
        return Err(Error::Parse {
            file: path.display().to_string(),
            location: "profiles".into(),
            message: format!("load spans {} hours, wind {}", load.len(), wind.len()),
        });
    }
    Ok(CaseBundle { system, load, wind })
}

/// Write a case file and its profile CSVs next to it.
pub fn write_case(path: &Path, bundle: &CaseBundle) -> Result<(PathBuf, PathBuf)> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "case".into());
    let load_name = format!("{stem}_load.csv");
    let wind_name = format!("{stem}_wind.csv");
    let case = CaseFile {
        version: CASE_VERSION,
        system: SystemHeader {
            s_base_mva: bundle.system.s_base,
            max_sc_count: bundle.system.max_sc_count,
            max_gfm_count: bundle.system.max_gfm_count,
            gscr_limit: bundle.system.limits.gscr,
        },
        bus: bundle.system.buses.clone(),
        branch: bundle.system.branches.clone(),
        sync_unit: bundle.system.sync_units.clone(),
        ibr_unit: bundle.system.ibr_units.clone(),
        scc_limit: bundle
            .system
            .limits
            .scc
            .iter()
            .map(|&(bus, i_f_lim)| SccLimitEntry { bus, i_f_lim })
            .collect(),
        profiles: ProfileRefs {
            load: load_name.clone(),
            wind: wind_name.clone(),
        },
    };
    let text = toml::to_string_pretty(&case)?;
    std::fs::write(path, text)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let load_path = dir.join(&load_name);
    let wind_path = dir.join(&wind_name);
    let bus_names: Vec<String> = bundle.system.buses.iter().map(|b| format!("bus_{}", b.id)).collect();
    profiles::write_profile(&load_path, &bus_names, &bundle.load)?;
    let gfl_names: Vec<String> = bundle
        .system
        .gfl_units()
        .map(|u| format!("gfl_{}", u.id))
        .collect();
    profiles::write_profile(&wind_path, &gfl_names, &bundle.wind)?;
    Ok((load_path, wind_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workbench::fixtures;

    fn bundle(system: PowerSystem, peak: &[f64]) -> CaseBundle {
        let (load, wind) = fixtures::base_profiles(&system, peak, 24, 3);
        CaseBundle { system, load, wind }
    }

    #[test]
    fn roundtrip_five_bus() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("five.toml");
        let b = bundle(fixtures::five_bus(), &fixtures::five_bus_peak_load());
        write_case(&path, &b).unwrap();
        let got = parse_case(&path).unwrap();
        assert_eq!(got.system.buses.len(), 5);
        assert_eq!(got.load, b.load);
        assert_eq!(got.wind, b.wind);
        assert_eq!(got.system.limits.scc, b.system.limits.scc);
    }

    #[test]
    fn dangling_bus_reference_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        let mut b = bundle(fixtures::five_bus(), &fixtures::five_bus_peak_load());
        b.system.sync_units[0].bus = 17;
        // Write without validation by serializing manually.
        let text = toml::to_string_pretty(&CaseFile {
            version: CASE_VERSION,
            system: SystemHeader {
                s_base_mva: b.system.s_base,
                max_sc_count: 1,
                max_gfm_count: 1,
                gscr_limit: 2.5,
            },
            bus: b.system.buses.clone(),
            branch: b.system.branches.clone(),
            sync_unit: b.system.sync_units.clone(),
            ibr_unit: b.system.ibr_units.clone(),
            scc_limit: vec![],
            profiles: ProfileRefs {
                load: "bad_load.csv".into(),
                wind: "bad_wind.csv".into(),
            },
        })
        .unwrap();
        std::fs::write(&path, text).unwrap();
        match parse_case(&path) {
            Err(Error::Parse { message, .. }) => {
                assert!(message.contains("unknown bus 17"), "message: {message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn version_gate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v9.toml");
        let b = bundle(fixtures::two_bus(), &[0.0, 50.0]);
        write_case(&path, &b).unwrap();
        let text = std::fs::read_to_string(&path).unwrap().replace("version = 1", "version = 9");
        std::fs::write(&path, text).unwrap();
        assert!(parse_case(&path).is_err());
    }
}
