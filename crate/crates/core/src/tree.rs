//! Greedy Gini-split classification trees and impurity-based importance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gini::{best_split_rows, impurity_of_counts, FeatureValues, SplitRule};
use crate::table::{Column, Labels, Table};
use crate::transform::Encoder;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 5,
            min_leaf: 5,
        }
    }
}

/// Routing rule of an internal node. Numeric rows with value `<= threshold`
/// and categorical rows equal to `category` go left; anything else
/// (including categories never seen in training) goes right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Threshold(f64),
    Category(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NodeKind {
    Leaf {
        label: String,
    },
    Split {
        feature: String,
        rule: Rule,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    pub samples: usize,
    pub gini: f64,
    /// Weighted impurity decrease achieved by this node's split; 0 at leaves.
    pub decrease: f64,
    pub class_counts: Vec<usize>,
}

/// A trained tree. Node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GiniTree {
    pub features: Vec<String>,
    pub classes: Vec<String>,
    pub nodes: Vec<Node>,
    pub max_depth: usize,
}

enum Prepared {
    Numeric(Vec<f64>),
    Categorical(Vec<usize>, Encoder),
}

impl Prepared {
    fn values(&self) -> FeatureValues<'_> {
        match self {
            Prepared::Numeric(v) => FeatureValues::Numeric(v),
            Prepared::Categorical(c, _) => FeatureValues::Categorical(c),
        }
    }
}

struct Builder<'a> {
    names: Vec<String>,
    cols: Vec<Prepared>,
    labels: &'a [usize],
    classes: &'a [String],
    cfg: TreeConfig,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        let k = self.classes.len();
        let mut counts = vec![0; k];
        for &r in rows {
            counts[self.labels[r]] += 1;
        }
        let gini = impurity_of_counts(&counts, rows.len());
        let id = self.nodes.len();
        let majority = counts
            .iter()
            .enumerate()
            .fold(0, |best, (c, &n)| if n > counts[best] { c } else { best });
        self.nodes.push(Node {
            kind: NodeKind::Leaf {
                label: self.classes[majority].clone(),
            },
            samples: rows.len(),
            gini,
            decrease: 0.0,
            class_counts: counts,
        });
        if depth >= self.cfg.max_depth || gini == 0.0 {
            return id;
        }

        let mut best: Option<(usize, SplitRule, f64)> = None;
        for (f, col) in self.cols.iter().enumerate() {
            let s = best_split_rows(col.values(), self.labels, k, rows, self.cfg.min_leaf);
            if let Some(rule) = s.rule {
                if s.decrease > 0.0 && best.as_ref().is_none_or(|b| s.decrease > b.2) {
                    best = Some((f, rule, s.decrease));
                }
            }
        }
        let Some((f, rule, decrease)) = best else {
            return id;
        };

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| match (&self.cols[f], rule) {
                (Prepared::Numeric(v), SplitRule::Threshold(t)) => v[r] <= t,
                (Prepared::Categorical(c, _), SplitRule::Category(cat)) => c[r] == cat,
                _ => unreachable!("rule kind follows column kind"),
            });
        let rule = match (&self.cols[f], rule) {
            (_, SplitRule::Threshold(t)) => Rule::Threshold(t),
            (Prepared::Categorical(_, enc), SplitRule::Category(cat)) => {
                Rule::Category(enc.categories()[cat].to_owned())
            }
            _ => unreachable!("rule kind follows column kind"),
        };
        let left = self.grow(&left_rows, depth + 1);
        let right = self.grow(&right_rows, depth + 1);
        let node = &mut self.nodes[id];
        node.kind = NodeKind::Split {
            feature: self.names[f].clone(),
            rule,
            left,
            right,
        };
        node.decrease = decrease;
        id
    }
}

/// Grows a tree by greedy recursive partitioning on the weighted Gini
/// decrease. Splitting stops at `max_depth`, at pure nodes, when no split
/// leaves `min_leaf` rows on both sides, or when no split helps. Leaves
/// predict the majority class, ties going to the lexicographically smallest.
pub fn train_tree(features: &Table, target: &Labels, cfg: TreeConfig) -> Result<GiniTree> {
    if features.column_count() == 0 {
        return Err(Error::NoFeatures);
    }
    if features.row_count() != target.len() {
        return Err(Error::LengthMismatch {
            left: features.row_count(),
            right: target.len(),
        });
    }
    if target.is_empty() {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    let names: Vec<String> = features.schema().names().map(str::to_owned).collect();
    let cols = features
        .columns()
        .iter()
        .zip(&names)
        .map(|(c, name)| match c {
            Column::Numeric(v) => Prepared::Numeric(v.clone()),
            Column::Categorical(v) => {
                let enc = Encoder::fit(name, v);
                let codes = enc.encode(v).expect("encoder fitted on the same values");
                Prepared::Categorical(codes, enc)
            }
        })
        .collect();
    let mut b = Builder {
        names: names.clone(),
        cols,
        labels: target.codes(),
        classes: target.classes(),
        cfg,
        nodes: Vec::new(),
    };
    let rows: Vec<usize> = (0..target.len()).collect();
    b.grow(&rows, 0);
    Ok(GiniTree {
        features: names,
        classes: target.classes().to_vec(),
        nodes: b.nodes,
        max_depth: cfg.max_depth,
    })
}

enum Lookup<'a> {
    Numeric(&'a [f64]),
    Categorical(&'a [String]),
}

impl GiniTree {
    pub fn root_samples(&self) -> usize {
        self.nodes[0].samples
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Split { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Sum over internal nodes of `(n_t / n_root) * decrease_t`.
    pub fn weighted_decrease_sum(&self) -> f64 {
        let root = self.root_samples() as f64;
        self.nodes
            .iter()
            .map(|n| n.samples as f64 / root * n.decrease)
            .sum()
    }

    /// Root impurity minus the sample-weighted impurity of the leaves.
    pub fn total_impurity_reduction(&self) -> f64 {
        let root = self.root_samples() as f64;
        let leaves: f64 = self
            .nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Leaf { .. }))
            .map(|n| n.samples as f64 / root * n.gini)
            .sum();
        self.nodes[0].gini - leaves
    }

    /// Importance of every training feature, in training column order.
    pub fn importances(&self) -> Vec<(String, f64)> {
        let root = self.root_samples() as f64;
        let mut out: Vec<(String, f64)> = self.features.iter().map(|f| (f.clone(), 0.0)).collect();
        for n in &self.nodes {
            if let NodeKind::Split { feature, .. } = &n.kind {
                let i = self.features.iter().position(|f| f == feature).unwrap();
                out[i].1 += n.samples as f64 / root * n.decrease;
            }
        }
        out
    }

    /// Predicted class of every row of `rows`.
    pub fn predict(&self, rows: &Table) -> Result<Vec<String>> {
        let mut lookups: Vec<Option<Lookup<'_>>> = Vec::with_capacity(self.features.len());
        for (i, name) in self.features.iter().enumerate() {
            let used = self
                .nodes
                .iter()
                .any(|n| matches!(&n.kind, NodeKind::Split { feature, .. } if feature == name));
            if !used {
                lookups.push(None);
                continue;
            }
            let col = rows.column(name)?;
            let wanted_numeric = self.nodes.iter().any(|n| {
                matches!(&n.kind, NodeKind::Split { feature, rule: Rule::Threshold(_), .. } if feature == name)
            });
            let l = match col {
                Column::Numeric(v) if wanted_numeric => Lookup::Numeric(v),
                Column::Categorical(v) if !wanted_numeric => Lookup::Categorical(v),
                _ => {
                    return Err(Error::ColumnKind {
                        column: self.features[i].clone(),
                        expected: if wanted_numeric {
                            "numeric"
                        } else {
                            "categorical"
                        },
                    })
                }
            };
            lookups.push(Some(l));
        }
        let index_of = |name: &str| self.features.iter().position(|f| f == name).unwrap();
        Ok((0..rows.row_count())
            .map(|r| {
                let mut i = 0;
                loop {
                    match &self.nodes[i].kind {
                        NodeKind::Leaf { label } => return label.clone(),
                        NodeKind::Split {
                            feature,
                            rule,
                            left,
                            right,
                        } => {
                            let go_left = match (&lookups[index_of(feature)], rule) {
                                (Some(Lookup::Numeric(v)), Rule::Threshold(t)) => v[r] <= *t,
                                (Some(Lookup::Categorical(v)), Rule::Category(c)) => &v[r] == c,
                                _ => unreachable!("lookup kinds checked above"),
                            };
                            i = if go_left { *left } else { *right };
                        }
                    }
                }
            })
            .collect())
    }
}

pub fn predict(tree: &GiniTree, rows: &Table) -> Result<Vec<String>> {
    tree.predict(rows)
}

/// Sample-weighted sum of the impurity decreases of all nodes splitting on
/// `feature`.
pub fn feature_importance(tree: &GiniTree, feature: &str) -> Result<f64> {
    tree.importances()
        .into_iter()
        .find(|(f, _)| f == feature)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::UnknownColumn(feature.to_owned()))
}
