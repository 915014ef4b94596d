//! Setup configuration files and noise overrides.

use crate::CliError;
use gslab::optics::{NoiseModel, Preset, SetupConfig, Waveplate};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// On-disk setup description. Fields left out are taken from `preset`.
///
/// ```json
/// {"schema": 1, "preset": "cluster6",
///  "waveplates": [{"mode": 4, "kind": "HWP", "deg": 22.5}],
///  "fusions": [[2, 3], [4, 5]],
///  "noise": {"v_hv": 0.93, "v_pm": 0.91, "overlap": [0.73, 0.71]}}
/// ```
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default = "schema_v1")]
    pub schema: u32,
    pub preset: Option<Preset>,
    pub sources: Option<Vec<(usize, usize)>>,
    pub waveplates: Option<Vec<Waveplate>>,
    pub fusions: Option<Vec<(usize, usize)>>,
    pub noise: Option<NoiseModel>,
}

fn schema_v1() -> u32 {
    1
}

/// Fully resolved setup.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub preset: Preset,
    pub setup: SetupConfig,
    pub noise: NoiseModel,
}

pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    let cfg: ConfigFile = serde_json::from_str(text).map_err(|e| CliError::Config(format!(
        "line {}, column {}: {e}",
        e.line(),
        e.column()
    )))?;
    if cfg.schema != 1 {
        return Err(CliError::Config(format!("unsupported schema {}", cfg.schema)));
    }
    Ok(cfg)
}

/// `ideal` or a noise JSON object.
pub fn parse_noise(text: &str) -> Result<NoiseModel, CliError> {
    if text.trim() == "ideal" {
        return Ok(NoiseModel::ideal());
    }
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("--noise: {e}")))
}

/// Precedence: `--noise` over the file's `noise`; the file over `--preset`.
pub fn resolve(preset: Preset, config: Option<&Path>, noise: Option<&str>) -> Result<Resolved, CliError> {
    let file = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        None => ConfigFile::default(),
    };
    let preset = file.preset.unwrap_or(preset);
    let mut setup = SetupConfig::preset(preset);
    if let Some(s) = file.sources {
        setup.sources = s;
    }
    if let Some(w) = file.waveplates {
        setup.waveplates = w;
    }
    if let Some(f) = file.fusions {
        setup.fusions = f;
    }
    let noise = match noise {
        Some(text) => parse_noise(text)?,
        None => file.noise.unwrap_or_default(),
    };
    setup.validate()?;
    noise.validate()?;
    Ok(Resolved { preset, setup, noise })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_is_reported_with_position() {
        let err = parse_config("{\n  \"preset\": \"ghz6\",\n  \"fusion\": []\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("fusion"), "{msg}");
    }

    #[test]
    fn noise_override_wins() {
        let r = resolve(Preset::Ghz6, None, Some(r#"{"overlap":[0.5,0.5]}"#)).unwrap();
        assert_eq!(r.noise.fusion_overlap, vec![0.5, 0.5]);
        assert_eq!(r.noise.pair_visibility_hv, 1.0);
        assert!(parse_noise("ideal").unwrap() == NoiseModel::ideal());
        assert!(parse_noise(r#"{"v_hv": 2}"#).is_ok());
        assert!(resolve(Preset::Ghz6, None, Some(r#"{"v_hv": 2}"#)).is_err());
    }
}
