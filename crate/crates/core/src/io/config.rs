//! `key = value` configuration covering every tunable default.
//!
//! Later sources override earlier ones: built-in defaults, then the config
//! file, then environment variables named `FRAGFOLD_<KEY>` (key upper-cased,
//! e.g. `FRAGFOLD_INNER_TIMEOUT=30`), then command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::energy::PmfParams;
use crate::error::{Error, Result};
use crate::fragdb::BuildParams;
use crate::io::fetch::DEFAULT_ENDPOINT;
use crate::model::ModelParams;
use crate::search::{SearchConfig, SearchMode};

pub const ENV_PREFIX: &str = "FRAGFOLD_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub build: BuildParams,
    pub pmf: PmfParams,
    pub model: ModelParams,
    pub search: SearchConfig,
    /// Parallel independent LNS runs.
    pub runs: usize,
    pub endpoint: String,
    pub cache_dir: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            build: BuildParams::default(),
            pmf: PmfParams::default(),
            model: ModelParams::default(),
            search: SearchConfig::default(),
            runs: 1,
            endpoint: DEFAULT_ENDPOINT.to_string(),
            cache_dir: None,
        }
    }
}

/// Every recognised key.
pub const KEYS: &[&str] = &[
    "rmsd_thr",
    "fallback_k",
    "break_tolerance",
    "helix_bend",
    "helix_torsion",
    "strand_bend",
    "strand_torsion",
    "mass_weighted",
    "pmf_bin",
    "pmf_pseudocount",
    "pmf_k",
    "pmf_min_samples",
    "d_min",
    "diameter",
    "centroid_factor",
    "backbone_radius",
    "reortho_every",
    "contact_cutoff",
    "contact_weight",
    "torsion_weight",
    "mode",
    "n_solutions",
    "total_timeout",
    "inner_timeout",
    "worsening_probability",
    "worsening_num",
    "worsening_den",
    "seed",
    "pivot_probability",
    "min_window",
    "max_window",
    "max_iterations",
    "inner_node_limit",
    "runs",
    "endpoint",
    "cache_dir",
];

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidInput(format!("bad value '{v}' for {key}")))
}

/// `none` (any case) clears an optional setting.
fn parse_opt<T: std::str::FromStr>(key: &str, v: &str) -> Result<Option<T>> {
    if v.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        parse(key, v).map(Some)
    }
}

impl Settings {
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let v = v.trim();
        let b = &mut self.build;
        let m = &mut self.model;
        let s = &mut self.search;
        match key {
            "rmsd_thr" => b.rmsd_thr = parse(key, v)?,
            "fallback_k" => b.fallback_k = parse(key, v)?,
            "break_tolerance" => b.break_tolerance = parse(key, v)?,
            "helix_bend" => b.helix_bend = parse(key, v)?,
            "helix_torsion" => b.helix_torsion = parse(key, v)?,
            "strand_bend" => b.strand_bend = parse(key, v)?,
            "strand_torsion" => b.strand_torsion = parse(key, v)?,
            "mass_weighted" => b.mass_weighted = parse(key, v)?,
            "pmf_bin" => self.pmf.bin_deg = parse(key, v)?,
            "pmf_pseudocount" => self.pmf.pseudocount = parse(key, v)?,
            "pmf_k" => self.pmf.k = parse(key, v)?,
            "pmf_min_samples" => self.pmf.min_samples = parse(key, v)?,
            "d_min" => {
                m.d_min = parse(key, v)?;
                m.energy.d_min = m.d_min;
            }
            "diameter" => m.diameter = parse_opt(key, v)?,
            "centroid_factor" => m.centroid_factor = parse(key, v)?,
            "backbone_radius" => m.backbone_radius = parse(key, v)?,
            "reortho_every" => m.reortho_every = parse(key, v)?,
            "contact_cutoff" => m.energy.cutoff = parse(key, v)?,
            "contact_weight" => m.energy.contact_weight = parse(key, v)?,
            "torsion_weight" => m.energy.torsion_weight = parse(key, v)?,
            "mode" => s.mode = SearchMode::parse(v)?,
            "n_solutions" => s.n_solutions = parse(key, v)?,
            "total_timeout" => s.total_timeout = parse(key, v)?,
            "inner_timeout" => s.inner_timeout = parse(key, v)?,
            "worsening_probability" => s.worsening_probability = parse(key, v)?,
            "worsening_num" => s.worsening_num = parse(key, v)?,
            "worsening_den" => s.worsening_den = parse(key, v)?,
            "seed" => s.seed = parse(key, v)?,
            "pivot_probability" => s.pivot_probability = parse(key, v)?,
            "min_window" => s.min_window = parse(key, v)?,
            "max_window" => s.max_window = parse_opt(key, v)?,
            "max_iterations" => s.max_iterations = parse_opt(key, v)?,
            "inner_node_limit" => s.inner_node_limit = parse_opt(key, v)?,
            "runs" => self.runs = parse(key, v)?,
            "endpoint" => self.endpoint = v.to_string(),
            "cache_dir" => {
                self.cache_dir = (!v.eq_ignore_ascii_case("none")).then(|| PathBuf::from(v))
            }
            _ => return Err(Error::InvalidInput(format!("unknown setting '{key}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, label: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Format {
                    path: label.to_string(),
                    line: no + 1,
                    msg: "expected key = value".into(),
                });
            };
            self.set(k.trim(), v).map_err(|e| Error::Format {
                path: label.to_string(),
                line: no + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies `FRAGFOLD_<KEY>` variables from `vars`.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        for (name, v) in vars {
            let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let key = rest.to_ascii_lowercase();
            if KEYS.contains(&key.as_str()) {
                self.set(&key, &v)
                    .map_err(|e| Error::InvalidInput(format!("{name}: {e}")))?;
            }
        }
        Ok(())
    }
}
