//! Pipeline configuration, read from TOML.
//!
//! ```toml
//! [paths]
//! transactions = "data/transactions.csv"
//! diary = "data/diary.csv"
//! tables = "data/tables"
//! out = "out"
//!
//! [matcher]
//! time_window_s = 7200
//!
//! [stats]
//! cutoffs_min = [inf, 200, 100, 60, 30]
//!
//! [synth]          # optional: generate the inputs first
//! seed = 7
//! n_travelers = 5000
//! ```
//!
//! Relative paths are taken relative to the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taplink_core::matcher::MatchOptions;
use taplink_core::model::MappingTables;
use taplink_core::stats::TestPolicy;
use taplink_core::synth::SynthConfig;

use crate::error::CliError;

pub const TIE_POLICY: &str = "smallest_card_id";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub matcher: MatcherConfig,
    #[serde(default)]
    pub stats: StatsConfig,
    pub synth: Option<SynthConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub transactions: Option<PathBuf>,
    pub diary: Option<PathBuf>,
    pub tables: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            transactions: None,
            diary: None,
            tables: None,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatcherConfig {
    /// Journeys whose tap-in is further than this from the reported start
    /// are not considered. Off when absent.
    pub time_window_s: Option<u64>,
    /// Only `smallest_card_id` is implemented; the key exists so that runs
    /// record the policy they used.
    pub tie_policy: String,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        Self {
            time_window_s: None,
            tie_policy: TIE_POLICY.into(),
        }
    }
}

impl MatcherConfig {
    pub fn options(&self) -> MatchOptions {
        MatchOptions {
            time_window_s: self.time_window_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub mwu_exact_max_n: usize,
    pub wilcoxon_exact_max_n: usize,
    pub continuity_correction: bool,
    /// Family size for the Bonferroni column; defaults to the number of
    /// two-level comparisons.
    pub bonferroni_m: Option<usize>,
    pub cutoffs_min: Vec<f64>,
    pub shapiro_threshold: f64,
    pub shapiro_subsample_seed: u64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        let p = TestPolicy::default();
        Self {
            mwu_exact_max_n: p.mwu_exact_max_n,
            wilcoxon_exact_max_n: p.wilcoxon_exact_max_n,
            continuity_correction: p.continuity_correction,
            bonferroni_m: None,
            cutoffs_min: vec![f64::INFINITY, 200.0, 100.0, 60.0, 30.0],
            shapiro_threshold: 0.01,
            shapiro_subsample_seed: 5000,
        }
    }
}

impl StatsConfig {
    pub fn policy(&self) -> TestPolicy {
        TestPolicy {
            mwu_exact_max_n: self.mwu_exact_max_n,
            wilcoxon_exact_max_n: self.wilcoxon_exact_max_n,
            continuity_correction: self.continuity_correction,
        }
    }

    pub fn bonferroni_m(&self) -> usize {
        self.bonferroni_m
            .unwrap_or(taplink_core::stats::Grouping::TWO_LEVEL.len())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.cutoffs_min;
        if c.is_empty() {
            return Err(CliError::Config("stats.cutoffs_min: empty".into()));
        }
        if c.iter().any(|&x| x.is_nan() || x <= 0.0) {
            return Err(CliError::Config("stats.cutoffs_min: cut-offs must be positive".into()));
        }
        if c.windows(2).any(|w| w[1] >= w[0]) {
            return Err(CliError::Config("stats.cutoffs_min: must be strictly decreasing".into()));
        }
        if self.bonferroni_m == Some(0) {
            return Err(CliError::Config("stats.bonferroni_m: must be at least 1".into()));
        }
        if !(self.shapiro_threshold > 0.0 && self.shapiro_threshold < 1.0) {
            return Err(CliError::Config("stats.shapiro_threshold: must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Input files of the match stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchInputs {
    pub transactions: PathBuf,
    pub diary: PathBuf,
    pub tables: PathBuf,
}

impl MatchInputs {
    /// Check that every input resolves before any stage runs.
    pub fn validate(&self) -> Result<(), CliError> {
        for (what, p) in [("transactions", &self.transactions), ("diary", &self.diary)] {
            if !p.is_file() {
                return Err(CliError::Config(format!("{what} file not found: {}", p.display())));
            }
        }
        MappingTables::check_dir(&self.tables).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read, parse and validate a config file, resolving relative paths
    /// against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        for slot in [&mut p.transactions, &mut p.diary, &mut p.tables].into_iter().flatten() {
            if slot.is_relative() {
                *slot = base.join(&*slot);
            }
        }
        if p.out.is_relative() {
            p.out = base.join(&p.out);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.stats.validate()?;
        if self.matcher.tie_policy != TIE_POLICY {
            return Err(CliError::Config(format!(
                "matcher.tie_policy: only {TIE_POLICY:?} is supported, got {:?}",
                self.matcher.tie_policy
            )));
        }
        if let Some(s) = &self.synth {
            s.validate().map_err(|e| CliError::Config(format!("synth: {e}")))?;
        }
        Ok(())
    }

    /// Inputs of the match stage: explicit paths, or the files the synth
    /// section writes under `<out>/input`.
    pub fn match_inputs(&self) -> Result<MatchInputs, CliError> {
        let input = self.paths.out.join(crate::pipeline::INPUT_DIR);
        let pick = |p: &Option<PathBuf>, generated: PathBuf, key: &str| match (p, &self.synth) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(_)) => Ok(generated),
            (None, None) => Err(CliError::Config(format!("paths.{key} is required without a [synth] section"))),
        };
        use taplink_core::synth::{DIARY_FILE, TABLES_DIR, TRANSACTIONS_FILE};
        Ok(MatchInputs {
            transactions: pick(&self.paths.transactions, input.join(TRANSACTIONS_FILE), "transactions")?,
            diary: pick(&self.paths.diary, input.join(DIARY_FILE), "diary")?,
            tables: pick(&self.paths.tables, input.join(TABLES_DIR), "tables")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_infinite_cutoff() {
        let c = PipelineConfig::parse("[stats]\ncutoffs_min = [inf, 200, 100.5, 30]\n").unwrap();
        assert_eq!(c.stats.cutoffs_min, [f64::INFINITY, 200.0, 100.5, 30.0]);
        assert_eq!(c.stats.bonferroni_m(), 6);
        assert_eq!(c.matcher.tie_policy, TIE_POLICY);
    }

    #[test]
    fn rejects_bad_cutoffs_and_unknown_keys() {
        for text in [
            "[stats]\ncutoffs_min = [30, 60]\n",
            "[stats]\ncutoffs_min = [60, 60]\n",
            "[stats]\ncutoffs_min = []\n",
            "[stats]\ncutoffs_min = [inf, -5]\n",
            "[matcher]\nwindow = 5\n",
            "[matcher]\ntie_policy = \"random\"\n",
            "[synth]\nn_travelers = 0\n",
            "[synth.noise]\nmissing_tap_out_prob = 2.0\n",
        ] {
            assert!(matches!(PipelineConfig::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn inputs_require_paths_or_synth() {
        let c = PipelineConfig::parse("").unwrap();
        assert!(c.match_inputs().is_err());
        let c = PipelineConfig::parse("[synth]\nseed = 3\n").unwrap();
        let inputs = c.match_inputs().unwrap();
        assert!(inputs.transactions.ends_with("out/input/transactions.csv"));
    }
}
