//! Optional key = value configuration file (TOML). Command-line flags win
//! over file values; built-in defaults fill the rest.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::errors::CliError;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub images: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub n_resample: Option<usize>,
    pub sigma: Option<f64>,
    pub dt: Option<i32>,
    pub step: Option<i32>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub count: Option<usize>,
    pub noise: Option<f64>,
    pub year_start: Option<i32>,
    pub year_end: Option<i32>,
    /// Last year of each period before Modern:
    /// `[baroque, classical, romantic, impressionist]`.
    pub period_bounds: Option<[i32; 4]>,
    pub components: Option<usize>,
    pub include_length: Option<bool>,
    pub reference: Option<String>,
    pub target: Option<String>,
    pub trees: Option<usize>,
    pub train_fraction: Option<f64>,
    pub min_leaf: Option<usize>,
    pub max_depth: Option<usize>,
    pub features_per_split: Option<usize>,
    pub grid_nx: Option<usize>,
    pub grid_ny: Option<usize>,
    pub dump_curvature: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }
}

/// Flag beats file beats default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag beats file; the value is required.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(file).ok_or_else(|| CliError::Config(format!("`{name}` is required")))
}

/// Worker-pool size: explicit settings are capped by `MORPHO_THREADS`.
pub fn effective_threads(requested: Option<usize>) -> Option<usize> {
    let env_cap = std::env::var("MORPHO_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match (requested, env_cap) {
        (Some(n), Some(cap)) => Some(n.min(cap)),
        (None, Some(cap)) => Some(cap),
        (Some(n), None) => Some(n),
        (None, None) => None,
    }
}

pub fn period_table(bounds: [i32; 4]) -> morpho_core::ingest::PeriodTable {
    morpho_core::ingest::PeriodTable {
        baroque_until: bounds[0],
        classical_until: bounds[1],
        romantic_until: bounds[2],
        impressionist_until: bounds[3],
    }
}

/// Parse `a,b,c,d` period bounds.
pub fn parse_bounds(text: &str) -> Result<[i32; 4], CliError> {
    let parts: Vec<i32> = text
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("bad period bounds `{text}`")))?;
    if parts.len() != 4 || parts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!(
            "period bounds `{text}` must be four increasing years"
        )));
    }
    Ok([parts[0], parts[1], parts[2], parts[3]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_default() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick::<i32>(None, None, 3), 3);
    }

    #[test]
    fn toml_round_trip() {
        let cfg: FileConfig =
            toml::from_str("out = \"runs/a\"\nsigma = 4.5\nperiod_bounds = [1700, 1800, 1890, 1915]\n")
                .unwrap();
        assert_eq!(cfg.out.as_deref(), Some(Path::new("runs/a")));
        assert_eq!(cfg.sigma, Some(4.5));
        assert_eq!(cfg.period_bounds, Some([1700, 1800, 1890, 1915]));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("nope = 1\n").is_err());
    }

    #[test]
    fn bounds_parser_validates() {
        assert_eq!(parse_bounds("1750,1820,1900,1920").unwrap(), [1750, 1820, 1900, 1920]);
        assert!(parse_bounds("1, 2, 3").is_err());
        assert!(parse_bounds("5,4,3,2").is_err());
    }
}
