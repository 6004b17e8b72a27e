//! Run configuration: built-in defaults, an optional JSON config file, and
//! command-line flags, merged in that order (flags win).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use modred_core::beams::{DEMO_BETA1, DEMO_BETA2, DEMO_GRID};
use modred_core::{Error, Result};

/// Frequency-grid bounds and point count.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

/// One layer of optional settings. The JSON config file deserializes into
/// this, and parsed command-line flags are collected into a second instance;
/// [`Settings::resolve`] stacks them over the defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub out: Option<PathBuf>,
    pub interconnection: Option<PathBuf>,
    pub requirement: Option<PathBuf>,
    pub grid: Option<GridSpec>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub alpha: Option<Vec<f64>>,
    pub feas_tol: Option<f64>,
    pub conv_tol: Option<f64>,
    pub max_outer: Option<usize>,
    pub fit_order: Option<usize>,
    pub fit_tol: Option<f64>,
    pub method: Option<String>,
    pub workers: Option<usize>,
    pub elements: Option<[usize; 3]>,
}

pub fn load_config_file(path: &Path) -> Result<ConfigLayer> {
    let file = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

/// Fully resolved settings for one command invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub out: PathBuf,
    pub interconnection: PathBuf,
    pub requirement: PathBuf,
    pub grid: GridSpec,
    pub beta1: f64,
    pub beta2: f64,
    pub alpha: Vec<f64>,
    pub feas_tol: f64,
    pub conv_tol: f64,
    pub max_outer: usize,
    pub fit_order: usize,
    pub fit_tol: f64,
    pub method: String,
    /// Worker threads for frequency sweeps; 0 means one per core.
    pub workers: usize,
    pub elements: [usize; 3],
}

impl Settings {
    /// Merge flags over the config file over the defaults. Unset paths for
    /// the interconnection and requirement land in the output directory
    /// under their standard names.
    pub fn resolve(flags: ConfigLayer, file: ConfigLayer) -> Self {
        fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
            flag.or(file).unwrap_or(default)
        }
        let out = pick(flags.out, file.out, PathBuf::from("."));
        let interconnection = pick(
            flags.interconnection,
            file.interconnection,
            out.join("interconnection.json"),
        );
        let requirement = pick(
            flags.requirement,
            file.requirement,
            out.join("requirement.csv"),
        );
        Self {
            out,
            interconnection,
            requirement,
            grid: pick(
                flags.grid,
                file.grid,
                GridSpec {
                    lo: DEMO_GRID.0,
                    hi: DEMO_GRID.1,
                    n: DEMO_GRID.2,
                },
            ),
            beta1: pick(flags.beta1, file.beta1, DEMO_BETA1),
            beta2: pick(flags.beta2, file.beta2, DEMO_BETA2),
            alpha: pick(flags.alpha, file.alpha, Vec::new()),
            feas_tol: pick(flags.feas_tol, file.feas_tol, 1e-8),
            conv_tol: pick(flags.conv_tol, file.conv_tol, 1e-3),
            max_outer: pick(flags.max_outer, file.max_outer, 20),
            fit_order: pick(flags.fit_order, file.fit_order, 4),
            fit_tol: pick(flags.fit_tol, file.fit_tol, 0.1),
            method: pick(flags.method, file.method, "fwbt".to_string()),
            workers: pick(flags.workers, file.workers, 0),
            elements: pick(flags.elements, file.elements, [50, 20, 30]),
        }
    }
}

/// Parse `lo,hi,n` into a grid spec.
pub fn parse_grid(text: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!(
            "--grid expects lo,hi,n — got {text:?}"
        )));
    }
    let lo = parts[0]
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad grid bound {:?}", parts[0])))?;
    let hi = parts[1]
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad grid bound {:?}", parts[1])))?;
    let n = parts[2]
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("bad grid point count {:?}", parts[2])))?;
    Ok(GridSpec { lo, hi, n })
}

/// Parse `n1,n2,n3` into per-beam element counts.
pub fn parse_elements(text: &str) -> Result<[usize; 3]> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad element count {p:?}")))
        })
        .collect::<Result<_>>()?;
    parts
        .try_into()
        .map_err(|_| Error::Parse(format!("--elements expects three counts, got {text:?}")))
}

/// Parse `a1,a2,...` into per-subsystem cost weights.
pub fn parse_alpha(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad alpha weight {p:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_demo_case() {
        let s = Settings::resolve(ConfigLayer::default(), ConfigLayer::default());
        assert_eq!(s.out, PathBuf::from("."));
        assert_eq!(s.interconnection, PathBuf::from("./interconnection.json"));
        assert_eq!(s.grid.n, 1000);
        assert_eq!(s.beta1, 0.1);
        assert_eq!(s.beta2, 5e-7);
        assert_eq!(s.method, "fwbt");
        assert_eq!(s.elements, [50, 20, 30]);
    }

    #[test]
    fn flags_override_file_which_overrides_defaults() {
        let file = ConfigLayer {
            beta1: Some(0.2),
            beta2: Some(1e-6),
            out: Some(PathBuf::from("/data")),
            ..Default::default()
        };
        let flags = ConfigLayer {
            beta1: Some(0.5),
            ..Default::default()
        };
        let s = Settings::resolve(flags, file);
        assert_eq!(s.beta1, 0.5);
        assert_eq!(s.beta2, 1e-6);
        assert_eq!(s.out, PathBuf::from("/data"));
        // Default artifact paths follow the resolved output directory.
        assert_eq!(s.requirement, PathBuf::from("/data/requirement.csv"));
    }

    #[test]
    fn config_json_parses_every_field() {
        let text = r#"{
            "out": "run",
            "interconnection": "run/interconnection.json",
            "requirement": "run/requirement.csv",
            "grid": {"lo": 1.0, "hi": 100.0, "n": 50},
            "beta1": 0.1, "beta2": 5e-7,
            "alpha": [1.0, 2.0, 1.0],
            "feas_tol": 1e-8, "conv_tol": 1e-3, "max_outer": 20,
            "fit_order": 4, "fit_tol": 0.1,
            "method": "bt", "workers": 4, "elements": [10, 4, 6]
        }"#;
        let layer: ConfigLayer = serde_json::from_str(text).unwrap();
        let s = Settings::resolve(ConfigLayer::default(), layer);
        assert_eq!(s.grid, GridSpec { lo: 1.0, hi: 100.0, n: 50 });
        assert_eq!(s.alpha, vec![1.0, 2.0, 1.0]);
        assert_eq!(s.method, "bt");
        assert_eq!(s.workers, 4);
        assert_eq!(s.elements, [10, 4, 6]);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let text = r#"{"betaone": 0.1}"#;
        assert!(serde_json::from_str::<ConfigLayer>(text).is_err());
    }

    #[test]
    fn flag_value_parsers_validate_their_shapes() {
        assert_eq!(
            parse_grid("316.2,1e5,1000").unwrap(),
            GridSpec { lo: 316.2, hi: 1e5, n: 1000 }
        );
        assert!(parse_grid("1,2").is_err());
        assert!(parse_grid("a,b,c").is_err());
        assert_eq!(parse_elements("10,4,6").unwrap(), [10, 4, 6]);
        assert!(parse_elements("10,4").is_err());
        assert_eq!(parse_alpha("1,2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(parse_alpha("1,x").is_err());
    }
}
