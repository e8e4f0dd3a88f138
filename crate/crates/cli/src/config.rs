//! Configuration ingestion.
//!
//! One plain-text TOML file with named sections; every rational is a quoted
//! "p/q" string and potential values may be exact "log(p/q)" literals, so
//! no decimal parsing is involved anywhere. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use orbitlab::markov::{self, BranchSpec, MapSpec, MarkovMap, Orientation, ValidationReport};
use orbitlab::rat;
use orbitlab::thermo::Potential;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub map: MapSection,
    pub potential: Option<PotentialSection>,
    pub orbit: Option<OrbitSection>,
    pub experiment: Option<ExperimentSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub endpoints: Vec<String>,
    pub branches: Vec<BranchEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchEntry {
    pub orientation: i64,
    pub image_cells: [usize; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub depth: usize,
    pub values: BTreeMap<String, PotentialValue>,
}

/// A raw float or an exact "log(p/q)" literal.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PotentialValue {
    Number(f64),
    Literal(String),
}

impl PotentialValue {
    fn eval(&self) -> Result<f64> {
        match self {
            PotentialValue::Number(x) => Ok(*x),
            PotentialValue::Literal(s) => {
                let inner = s
                    .strip_prefix("log(")
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| anyhow!("potential literal {s:?} is not of the form log(p/q)"))?;
                let r = rat::parse(inner).map_err(|e| anyhow!("{e}"))?;
                let v = rat::to_f64(&r);
                if v <= 0.0 {
                    bail!("log argument {inner:?} must be positive");
                }
                Ok(v.ln())
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSection {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub preperiod: Option<String>,
    pub period: Option<String>,
}

fn default_kind() -> String {
    "sampled".into()
}

#[derive(Debug, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
    pub q_step: Option<f64>,
    pub q_grid: Option<Vec<f64>>,
    pub inv_delta_grid: Option<Vec<f64>>,
    pub n_window: Option<[u32; 2]>,
    pub ball_window: Option<[u32; 2]>,
    pub budget: Option<u64>,
    pub tolerance: Option<f64>,
    pub pairs: Option<usize>,
    pub seed_count: Option<usize>,
    pub y_source: Option<String>,
    pub coverage_range: Option<[u64; 2]>,
    pub coverage_threshold: Option<f64>,
    pub max_hit_scale: Option<u32>,
    pub scale: Option<u32>,
    pub mode: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

/// Parsed and validated experiment configuration.
pub struct LoadedConfig {
    pub map: Arc<MarkovMap>,
    pub validation: ValidationReport,
    pub potential: Option<Potential>,
    pub orbit: OrbitConfig,
    pub experiment: ExperimentSection,
    pub out_dir: Option<String>,
    /// Raw config text, digested into the run manifest.
    pub raw: String,
}

pub struct OrbitConfig {
    pub kind: OrbitKind,
    pub seeds: Vec<u64>,
}

pub enum OrbitKind {
    Sampled,
    Explicit { preperiod: Vec<u8>, period: Vec<u8> },
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let file: ConfigFile = toml::from_str(text).context("config parse error")?;

    let endpoints = file
        .map
        .endpoints
        .iter()
        .map(|s| rat::parse(s).map_err(|e| anyhow!("{e}")))
        .collect::<Result<Vec<_>>>()
        .context("in [map] endpoints")?;
    let branches = file
        .map
        .branches
        .iter()
        .map(|b| {
            Ok(BranchSpec {
                orientation: Orientation::from_sign(b.orientation).map_err(|e| anyhow!("{e}"))?,
                image_first: b.image_cells[0],
                image_last: b.image_cells[1],
            })
        })
        .collect::<Result<Vec<_>>>()
        .context("in [map] branches")?;
    let spec = MapSpec { endpoints, branches };
    let validation = markov::validate(&spec);
    let map = Arc::new(MarkovMap::build(spec).map_err(|e| anyhow!("{e}"))?.0);

    let potential = match &file.potential {
        None => None,
        Some(p) => {
            let mut table = BTreeMap::new();
            for (word, value) in &p.values {
                let w = markov::parse_word(word).map_err(|e| anyhow!("{e}"))?;
                if !map.word_admissible(&w) {
                    bail!("potential word {word:?} is inadmissible for this map");
                }
                table.insert(w, value.eval().with_context(|| format!("potential value for {word:?}"))?);
            }
            let pot = Potential::new(p.depth, table).map_err(|e| anyhow!("{e}"))?;
            pot.check_against(&map).map_err(|e| anyhow!("{e}"))?;
            Some(pot)
        }
    };

    let orbit = match &file.orbit {
        None => OrbitConfig { kind: OrbitKind::Sampled, seeds: vec![1, 2, 3, 4, 5] },
        Some(o) => {
            let kind = match o.kind.as_str() {
                "sampled" => OrbitKind::Sampled,
                "explicit" => {
                    let pre = o.preperiod.as_deref().unwrap_or("");
                    let per = o
                        .period
                        .as_deref()
                        .ok_or_else(|| anyhow!("explicit orbit requires a period"))?;
                    OrbitKind::Explicit {
                        preperiod: markov::parse_word(pre).map_err(|e| anyhow!("{e}"))?,
                        period: markov::parse_word(per).map_err(|e| anyhow!("{e}"))?,
                    }
                }
                other => bail!("orbit kind must be sampled or explicit, got {other:?}"),
            };
            let seeds = if o.seeds.is_empty() { vec![1, 2, 3, 4, 5] } else { o.seeds.clone() };
            OrbitConfig { kind, seeds }
        }
    };

    Ok(LoadedConfig {
        map,
        validation,
        potential,
        orbit,
        experiment: file.experiment.unwrap_or_default(),
        out_dir: file.output.and_then(|o| o.dir),
        raw: text.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOUBLING: &str = r#"
[map]
endpoints = ["0", "1/2", "1"]
branches = [
  { orientation = 1, image_cells = [0, 1] },
  { orientation = 1, image_cells = [0, 1] },
]

[potential]
depth = 1
[potential.values]
"0" = "log(7/10)"
"1" = "log(3/10)"
"#;

    #[test]
    fn parses_doubling() {
        let cfg = parse_config(DOUBLING).unwrap();
        assert_eq!(cfg.map.cell_count(), 2);
        assert!(cfg.validation.is_valid());
        let pot = cfg.potential.unwrap();
        let v = pot.value(&[0]).unwrap();
        assert!((v - 0.7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = DOUBLING.replace("[potential]", "[potential]\nextra = 1");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn rejects_unsorted_endpoints() {
        let bad = DOUBLING.replace(r#"["0", "1/2", "1"]"#, r#"["0", "1", "1/2"]"#);
        let err = parse_config(&bad).unwrap_err();
        assert!(format!("{err:#}").contains("increasing"), "{err:#}");
    }

    #[test]
    fn rejects_malformed_rational() {
        let bad = DOUBLING.replace("\"1/2\"", "\"0.5\"");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn rejects_inadmissible_potential_word() {
        let bad = DOUBLING.replace("\"1\" = \"log(3/10)\"", "\"3\" = \"log(3/10)\"");
        let err = parse_config(&bad).unwrap_err();
        assert!(format!("{err:#}").contains("inadmissible"), "{err:#}");
    }
}
