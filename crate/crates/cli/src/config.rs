use std::fs;
use std::path::{Path, PathBuf};

use rfsa::eval::CvConfig;
use rfsa::info::BinningSpec;
use rfsa::rank::ScoreMode;
use rfsa::table::{HeaderMode, Schema};
use rfsa::tree::TreeConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Everything a run depends on besides the input bytes. Written next to the
/// outputs as `run_config.json` and accepted back through `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// Schema override; the 14-column UGRansome layout when absent.
    pub schema: Option<PathBuf>,
    pub header: HeaderMode,
    /// Fixed transform spec to replay; fitted with the default plan when
    /// absent.
    pub transforms: Option<PathBuf>,
    pub binning: BinningSpec,
    pub k: usize,
    pub score: ScoreMode,
    pub literal_eq5: bool,
    pub cv: CvConfig,
    /// Tree grown for Gini importances.
    pub score_tree: TreeConfig,
    /// Tree evaluated by cross-validation.
    pub eval_tree: TreeConfig,
    /// Correlate label-encoded categoricals too.
    pub encode_correlation: bool,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            schema: None,
            header: HeaderMode::Detect,
            transforms: None,
            binning: BinningSpec::default(),
            k: 12,
            score: ScoreMode::Combined,
            literal_eq5: false,
            cv: CvConfig::default(),
            score_tree: TreeConfig::default(),
            eval_tree: TreeConfig {
                max_depth: 8,
                min_leaf: 5,
            },
            encode_correlation: false,
            out: PathBuf::from("rfsa-out"),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| rfsa::Error::Read {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Usage("--input is required".into()))
    }

    pub fn schema(&self) -> Result<Schema, CliError> {
        Ok(match &self.schema {
            Some(p) => Schema::from_json_file(p)?,
            None => Schema::ugransome(),
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.binning.bins == 0 {
            return Err(CliError::Usage("--bins must be positive".into()));
        }
        if self.cv.folds < 2 {
            return Err(CliError::Usage("--folds must be at least 2".into()));
        }
        Ok(())
    }
}
