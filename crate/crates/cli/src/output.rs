use std::fs;
use std::path::{Path, PathBuf};

use rfsa::eval::Metrics;
use rfsa::rank::FeatureScore;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

const MARKER: &str = "INCOMPLETE";

fn write_err(path: &Path, source: std::io::Error) -> CliError {
    rfsa::Error::Write {
        path: path.to_owned(),
        source,
    }
    .into()
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| write_err(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| write_err(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Marks an output directory as partial until [`Incomplete::finish`] runs.
pub struct Incomplete {
    path: PathBuf,
}

impl Incomplete {
    pub fn begin(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MARKER);
        write_text(
            &path,
            "run did not finish; outputs in this directory are partial\n",
        )?;
        Ok(Self { path })
    }

    pub fn finish(self) -> Result<(), CliError> {
        fs::remove_file(&self.path).map_err(|e| write_err(&self.path, e))
    }
}

/// One row of the score table: relevance scores plus, when evaluated, the
/// cross-validated metrics of a tree trained on that feature alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub rank: usize,
    pub feature: String,
    /// Normalized mutual information on a 0-100 scale.
    pub mi_score_percent: f64,
    pub mi_nats: f64,
    pub gini_importance: f64,
    pub combined: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_decrease: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_decrease_literal: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
}

impl ScoreRow {
    pub fn new(rank: usize, s: &FeatureScore) -> Self {
        Self {
            rank,
            feature: s.feature.clone(),
            mi_score_percent: 100.0 * s.mi_normalized,
            mi_nats: s.mi_nats,
            gini_importance: s.gini_importance,
            combined: s.combined,
            root_decrease: None,
            root_decrease_literal: None,
            accuracy: None,
            precision: None,
            recall: None,
            f1: None,
        }
    }

    pub fn with_metrics(mut self, m: &Metrics) -> Self {
        self.accuracy = Some(m.accuracy);
        self.precision = Some(m.macro_precision);
        self.recall = Some(m.macro_recall);
        self.f1 = Some(m.macro_f1);
        self
    }
}
