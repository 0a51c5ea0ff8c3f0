use std::path::{Path, PathBuf};

use reliefnav::coverage::CcrArea;
use reliefnav::sensitivity::ParamDist;
use reliefnav::walker::KnnRule;
use serde::{Deserialize, Serialize};

use crate::fail::{CliError, EXIT_MALFORMED, EXIT_MISSING};

/// Flat run configuration. Relative paths resolve against the directory of
/// the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub altitude: Option<PathBuf>,
    pub roads: Option<PathBuf>,
    /// Pre-rasterized importance grid, used instead of `roads`.
    pub importance: Option<PathBuf>,
    pub destinations: Option<PathBuf>,
    pub drones: Option<PathBuf>,
    pub packages: Option<PathBuf>,
    pub buffer_m: f64,

    /// Synthetic field template, used instead of `altitude`.
    pub synth: Option<String>,
    pub synth_rows: usize,
    pub synth_cols: usize,
    pub cell_size_m: f64,

    /// Directory holding altitude.asc / importance.asc; defaults to `out`.
    pub field_dir: Option<PathBuf>,
    /// Base plan written by `plan`; defaults to `out/plan.json`.
    pub plan: Option<PathBuf>,

    pub range_k: f64,
    pub k_max: usize,
    pub kmeans_restarts: usize,
    pub oversample_step: f64,
    pub fill_efficiency: f64,
    pub redundancy: u32,

    pub alpha: f64,
    pub beta: f64,
    /// Walk budget; defaults to the unloaded range of `recon_model`.
    pub mfd_m: Option<f64>,
    pub recon_model: String,
    pub knn_rule: KnnRule,
    pub decay: f64,
    pub max_proposals: Option<usize>,
    pub max_climb_m: Option<f64>,
    pub batch: usize,
    pub top_n: usize,
    /// Which base the walks start from.
    pub base: usize,
    pub origin_lat: Option<f64>,
    pub origin_lon: Option<f64>,
    /// Launch cell given directly as grid indices; wins over lat/lon.
    pub origin_row: Option<usize>,
    pub origin_col: Option<usize>,

    /// Route directory read by `pair`; defaults to `out/routes`.
    pub routes_dir: Option<PathBuf>,
    pub ccr_area: CcrArea,

    /// Results table read by `sensitivity`; when absent a fresh study runs.
    pub results: Option<PathBuf>,
    pub study_size: Option<usize>,
    pub threshold: Option<f64>,
    pub knn_walks: usize,
    pub histogram_bins: usize,
    pub mean_alpha: f64,
    pub var_alpha: f64,
    pub mean_beta: f64,
    pub var_beta: f64,

    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let dist = ParamDist::default();
        RunConfig {
            altitude: None,
            roads: None,
            importance: None,
            destinations: None,
            drones: None,
            packages: None,
            buffer_m: reliefnav::field::DEFAULT_BUFFER_M,
            synth: None,
            synth_rows: 101,
            synth_cols: 101,
            cell_size_m: 100.0,
            field_dir: None,
            plan: None,
            range_k: reliefnav::fleet::DEFAULT_RANGE_COEFFICIENT,
            k_max: 3,
            kmeans_restarts: 10,
            oversample_step: 1.25,
            fill_efficiency: 1.0,
            redundancy: 2,
            alpha: 0.2,
            beta: 0.3,
            mfd_m: None,
            recon_model: "B".into(),
            knn_rule: KnnRule::Eight,
            decay: 0.5,
            max_proposals: None,
            max_climb_m: None,
            batch: 10_000,
            top_n: 10,
            base: 0,
            origin_lat: None,
            origin_lon: None,
            origin_row: None,
            origin_col: None,
            routes_dir: None,
            ccr_area: CcrArea::Road,
            results: None,
            study_size: None,
            threshold: None,
            knn_walks: 1000,
            histogram_bins: 20,
            mean_alpha: dist.mean_alpha,
            var_alpha: dist.var_alpha,
            mean_beta: dist.mean_beta,
            var_beta: dist.var_beta,
            seed: None,
            jobs: None,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new(EXIT_MISSING, format!("config file not found: {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::new(EXIT_MALFORMED, format!("malformed config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        for p in [
            &mut self.altitude,
            &mut self.roads,
            &mut self.importance,
            &mut self.destinations,
            &mut self.drones,
            &mut self.packages,
            &mut self.field_dir,
            &mut self.plan,
            &mut self.routes_dir,
            &mut self.results,
        ] {
            fix(p);
        }
        if self.out.is_relative() {
            self.out = base.join(&self.out);
        }
    }

    /// Applies `key=value` overrides. Values parse as JSON, falling back to a
    /// plain string, so `--set synth=loop` and `--set batch=5` both work.
    pub fn apply_overrides(self, pairs: &[String]) -> Result<Self, CliError> {
        if pairs.is_empty() {
            return Ok(self);
        }
        let mut value = serde_json::to_value(&self).map_err(|e| CliError::new(EXIT_MALFORMED, e.to_string()))?;
        let map = value.as_object_mut().expect("config serializes to an object");
        for pair in pairs {
            let (key, raw) = pair
                .split_once('=')
                .ok_or_else(|| CliError::new(EXIT_MALFORMED, format!("override `{pair}` is not key=value")))?;
            let parsed = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            map.insert(key.trim().to_string(), parsed);
        }
        serde_json::from_value(value).map_err(|e| CliError::new(EXIT_MALFORMED, format!("bad override: {e}")))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::new(EXIT_MALFORMED, "a master seed is required (--seed or `seed` in the config)"))
    }

    pub fn field_dir(&self) -> PathBuf {
        self.field_dir.clone().unwrap_or_else(|| self.out.clone())
    }

    pub fn plan_path(&self) -> PathBuf {
        self.plan.clone().unwrap_or_else(|| self.out.join("plan.json"))
    }

    pub fn routes_dir(&self) -> PathBuf {
        self.routes_dir.clone().unwrap_or_else(|| self.out.join("routes"))
    }

    pub fn param_dist(&self) -> ParamDist {
        ParamDist { mean_alpha: self.mean_alpha, var_alpha: self.var_alpha, mean_beta: self.mean_beta, var_beta: self.var_beta }
    }
}
