//! Coefficient files: the fitted surrogate sets handed from `linearize` to
//! `plan`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearize::LinearCoefficients;

pub const COEFFS_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CoeffsFile {
    version: u32,
    set: Vec<LinearCoefficients>,
}

pub fn write_coeffs(path: &Path, sets: &[LinearCoefficients]) -> Result<()> {
    let file = CoeffsFile {
        version: COEFFS_VERSION,
        set: sets.to_vec(),
    };
    std::fs::write(path, toml::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn read_coeffs(path: &Path) -> Result<Vec<LinearCoefficients>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        location: "open".into(),
        message: e.to_string(),
    })?;
    let file: CoeffsFile = toml::from_str(&text).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        location: "toml".into(),
        message: e.to_string(),
    })?;
    if file.version != COEFFS_VERSION {
        return Err(Error::Parse {
            file: path.display().to_string(),
            location: "version".into(),
            message: format!("unsupported version {}", file.version),
        });
    }
    Ok(file.set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::MetricTag;

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.toml");
        let sets = vec![
            LinearCoefficients {
                tag: MetricTag::Gscr,
                k_g: vec![0.4, -0.1],
                k_s: vec![0.002],
                k_cm: vec![0.001],
                k_cl: vec![-0.0005],
                k_0: 2.2,
                limit: 2.5,
                nu: 0.05,
            },
            LinearCoefficients {
                tag: MetricTag::Scc { bus: 3 },
                k_g: vec![1.0, 0.0],
                k_s: vec![0.01],
                k_cm: vec![0.004],
                k_cl: vec![0.0],
                k_0: 3.0,
                limit: 6.0,
                nu: 0.1,
            },
        ];
        write_coeffs(&path, &sets).unwrap();
        let got = read_coeffs(&path).unwrap();
        assert_eq!(got, sets);
    }
}
