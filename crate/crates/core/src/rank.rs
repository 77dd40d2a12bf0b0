//! Feature ranking by mutual information and Gini importance, and top-k
//! selection.
//!
//! Each feature gets two relevance measures against the target:
//!
//! * plug-in mutual information, with numeric features discretized by
//!   [`discretize`] and categorical features used as label codes directly;
//! * Gini importance from a single tree grown over all features.
//!
//! The combined score averages the two after min-max scaling each across the
//! current feature set, so it always lies in `[0, 1]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gini::{best_split, gini_decrease, gini_decrease_literal, FeatureValues, SplitRule};
use crate::info::{discretize, entropy, mutual_information, BinningSpec};
use crate::table::{Column, Labels, Table};
use crate::transform::encode_categorical;
use crate::tree::{train_tree, GiniTree, TreeConfig};

/// Which relevance measure orders the features.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    Mi,
    Gini,
    #[default]
    Combined,
}

impl std::str::FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mi" => Ok(ScoreMode::Mi),
            "gini" => Ok(ScoreMode::Gini),
            "combined" => Ok(ScoreMode::Combined),
            other => Err(Error::Config(format!("unknown score mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: String,
    /// Position of the feature in the scored table.
    pub index: usize,
    pub mi_nats: f64,
    /// `mi_nats / H(target)`.
    pub mi_normalized: f64,
    pub gini_importance: f64,
    pub combined: f64,
}

impl FeatureScore {
    pub fn key(&self, mode: ScoreMode) -> f64 {
        match mode {
            ScoreMode::Mi => self.mi_nats,
            ScoreMode::Gini => self.gini_importance,
            ScoreMode::Combined => self.combined,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub k: usize,
    pub mode: ScoreMode,
    pub ordered_features: Vec<FeatureScore>,
}

impl SelectionResult {
    pub fn names(&self) -> Vec<&str> {
        self.ordered_features
            .iter()
            .map(|s| s.feature.as_str())
            .collect()
    }
}

/// Min-max scaling. A set without spread maps to all ones if its values are
/// positive and all zeros otherwise.
pub fn minmax(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        let fill = if hi > 0.0 { 1.0 } else { 0.0 };
        vec![fill; values.len()]
    }
}

/// Discrete codes used for the MI estimate of one column.
pub fn mi_codes(column: &Column, spec: BinningSpec) -> Vec<usize> {
    match column {
        Column::Numeric(v) => discretize(v, spec),
        Column::Categorical(v) => encode_categorical(v).0,
    }
}

/// Scores every feature of `features` against `target`.
///
/// Returns the scores in column order together with the tree used for the
/// Gini importances.
pub fn rfsa_score_with_tree(
    features: &Table,
    target: &Labels,
    spec: BinningSpec,
    tree_cfg: TreeConfig,
) -> Result<(Vec<FeatureScore>, GiniTree)> {
    if features.column_count() == 0 {
        return Err(Error::NoFeatures);
    }
    if features.row_count() != target.len() {
        return Err(Error::LengthMismatch {
            left: features.row_count(),
            right: target.len(),
        });
    }
    if target.len() < 2 {
        return Err(Error::TooFewValues {
            needed: 2,
            got: target.len(),
        });
    }
    if target.class_count() < 2 {
        return Err(Error::SingleClass);
    }
    let h_target = entropy(target.codes())?;
    let mi: Vec<f64> = features
        .columns()
        .par_iter()
        .map(|c| mutual_information(&mi_codes(c, spec), target.codes()))
        .collect::<Result<_>>()?;
    let tree = train_tree(features, target, tree_cfg)?;
    let gini: Vec<f64> = tree.importances().into_iter().map(|(_, v)| v).collect();
    let mi_scaled = minmax(&mi);
    let gini_scaled = minmax(&gini);
    let scores = features
        .schema()
        .names()
        .enumerate()
        .map(|(i, name)| FeatureScore {
            feature: name.to_owned(),
            index: i,
            mi_nats: mi[i],
            mi_normalized: (mi[i] / h_target).clamp(0.0, 1.0),
            gini_importance: gini[i],
            combined: 0.5 * (mi_scaled[i] + gini_scaled[i]),
        })
        .collect();
    Ok((scores, tree))
}

pub fn rfsa_score(
    features: &Table,
    target: &Labels,
    spec: BinningSpec,
    tree_cfg: TreeConfig,
) -> Result<Vec<FeatureScore>> {
    rfsa_score_with_tree(features, target, spec, tree_cfg).map(|(s, _)| s)
}

/// `(feature, weighted, literal)` root decreases.
pub type RootDecrease = (String, Option<f64>, Option<f64>);

/// Weighted and unnormalized impurity decrease of the best single split of
/// each feature at the root, as `(feature, weighted, literal)`. Constant
/// features report `None` for both.
pub fn root_split_decreases(features: &Table, target: &Labels) -> Result<Vec<RootDecrease>> {
    features
        .schema()
        .names()
        .zip(features.columns())
        .map(|(name, col)| {
            let codes;
            let values = match col {
                Column::Numeric(v) => FeatureValues::Numeric(v),
                Column::Categorical(v) => {
                    codes = encode_categorical(v).0;
                    FeatureValues::Categorical(&codes)
                }
            };
            let split = best_split(values, target.codes())?;
            let Some(rule) = split.rule else {
                return Ok((name.to_owned(), None, None));
            };
            let (left, right): (Vec<usize>, Vec<usize>) =
                (0..target.len()).partition(|&r| match (rule, values) {
                    (SplitRule::Threshold(t), FeatureValues::Numeric(v)) => v[r] <= t,
                    (SplitRule::Category(c), FeatureValues::Categorical(v)) => v[r] == c,
                    _ => unreachable!("rule kind follows column kind"),
                });
            let parts = [left, right];
            Ok((
                name.to_owned(),
                Some(gini_decrease(target.codes(), &parts)?),
                Some(gini_decrease_literal(target.codes(), &parts)?),
            ))
        })
        .collect()
}

/// Orders scores descending by the chosen measure (ties by ascending column
/// index) and keeps the first `k`.
pub fn select_top_k_by(scores: &[FeatureScore], k: usize, mode: ScoreMode) -> SelectionResult {
    let mut ordered = scores.to_vec();
    ordered.sort_by(|a, b| {
        b.key(mode)
            .total_cmp(&a.key(mode))
            .then(a.index.cmp(&b.index))
    });
    ordered.truncate(k);
    SelectionResult {
        k,
        mode,
        ordered_features: ordered,
    }
}

pub fn select_top_k(scores: &[FeatureScore], k: usize) -> SelectionResult {
    select_top_k_by(scores, k, ScoreMode::Combined)
}
