//! Confusion matrices, classification metrics and stratified k-fold
//! cross-validation of Gini trees.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{split_features_target, Labels, Table};
use crate::tree::{train_tree, TreeConfig};

/// Rows are true classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }
}

pub fn confusion<S: AsRef<str>>(pred: &[S], truth: &[S]) -> Result<ConfusionMatrix> {
    let mut classes: Vec<String> = pred
        .iter()
        .chain(truth)
        .map(|s| s.as_ref().to_owned())
        .collect();
    classes.sort();
    classes.dedup();
    confusion_with_classes(pred, truth, &classes)
}

/// Confusion matrix over a fixed class list, which must contain every label.
pub fn confusion_with_classes<S: AsRef<str>>(
    pred: &[S],
    truth: &[S],
    classes: &[String],
) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let index = |s: &str| {
        classes
            .iter()
            .position(|c| c == s)
            .ok_or_else(|| Error::Config(format!("label {s:?} not in class list")))
    };
    let k = classes.len();
    let mut counts = vec![vec![0; k]; k];
    for (p, t) in pred.iter().zip(truth) {
        counts[index(t.as_ref())?][index(p.as_ref())?] += 1;
    }
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        counts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn ratio(num: usize, den: usize, what: &str, class: &str) -> f64 {
    if den == 0 {
        log::warn!("{what} of class {class:?} has a zero denominator; reported as 0");
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Accuracy plus per-class and macro-averaged precision, recall and F1.
/// Precision is `TP / (TP + FP)`.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    let k = cm.classes.len();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.counts[c][c];
            let predicted: usize = (0..k).map(|r| cm.counts[r][c]).sum();
            let actual: usize = cm.counts[c].iter().sum();
            let precision = ratio(tp, predicted, "precision", &cm.classes[c]);
            let recall = ratio(tp, actual, "recall", &cm.classes[c]);
            ClassMetrics {
                class: cm.classes[c].clone(),
                precision,
                recall,
                f1: harmonic(precision, recall),
            }
        })
        .collect();
    let avg = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    Ok(Metrics {
        accuracy: cm.trace() as f64 / total as f64,
        macro_precision: avg(|m| m.precision),
        macro_recall: avg(|m| m.recall),
        macro_f1: avg(|m| m.f1),
        per_class,
    })
}

/// Field-wise arithmetic mean of metrics computed over the same class list.
pub fn mean_metrics(all: &[Metrics]) -> Metrics {
    let n = all.len() as f64;
    let mean = |f: &dyn Fn(&Metrics) -> f64| all.iter().map(f).sum::<f64>() / n;
    let per_class = all[0]
        .per_class
        .iter()
        .enumerate()
        .map(|(i, c)| ClassMetrics {
            class: c.class.clone(),
            precision: mean(&|m| m.per_class[i].precision),
            recall: mean(&|m| m.per_class[i].recall),
            f1: mean(&|m| m.per_class[i].f1),
        })
        .collect();
    Metrics {
        accuracy: mean(&|m| m.accuracy),
        per_class,
        macro_precision: mean(&|m| m.macro_precision),
        macro_recall: mean(&|m| m.macro_recall),
        macro_f1: mean(&|m| m.macro_f1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { folds: 5, seed: 42 }
    }
}

/// Fold id of every row.
///
/// Classes are visited in sorted order; each class's rows are shuffled with
/// a ChaCha8 generator seeded from `cfg.seed` and dealt round-robin, the
/// deal continuing from the fold where the previous class stopped.
pub fn stratified_kfold(target: &Labels, cfg: CvConfig) -> Result<Vec<usize>> {
    if cfg.folds < 2 {
        return Err(Error::Config(format!(
            "need at least 2 folds, got {}",
            cfg.folds
        )));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); target.class_count()];
    for (row, &c) in target.codes().iter().enumerate() {
        members[c].push(row);
    }
    for (c, m) in members.iter().enumerate() {
        if m.len() < cfg.folds {
            return Err(Error::ClassTooSmall {
                class: target.classes()[c].clone(),
                count: m.len(),
                folds: cfg.folds,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fold_of = vec![0; target.len()];
    let mut next = 0;
    for mut m in members {
        m.shuffle(&mut rng);
        for row in m {
            fold_of[row] = next;
            next = (next + 1) % cfg.folds;
        }
    }
    Ok(fold_of)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub features: Vec<String>,
    pub mean: Metrics,
    pub folds: Vec<FoldResult>,
}

/// Stratified k-fold evaluation of a Gini tree trained on `selected`
/// columns of `t` against its target column.
pub fn cross_validate<S: AsRef<str> + Sync>(
    t: &Table,
    selected: &[S],
    cfg: CvConfig,
    tree_cfg: TreeConfig,
) -> Result<CvReport> {
    if selected.is_empty() {
        return Err(Error::NoFeatures);
    }
    let (_, target) = split_features_target(t)?;
    let features = t.select_columns(selected)?;
    let fold_of = stratified_kfold(&target, cfg)?;
    let classes = target.classes().to_vec();
    let folds: Vec<FoldResult> = (0..cfg.folds)
        .into_par_iter()
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..t.row_count()).partition(|&r| fold_of[r] == fold);
            let tree = train_tree(&features.take_rows(&train), &target.take(&train), tree_cfg)?;
            let pred = tree.predict(&features.take_rows(&test))?;
            let truth: Vec<&str> = test.iter().map(|&r| target.get(r)).collect();
            let pred: Vec<&str> = pred.iter().map(String::as_str).collect();
            let cm = confusion_with_classes(&pred, &truth, &classes)?;
            let m = metrics(&cm)?;
            Ok(FoldResult {
                fold,
                train_rows: train.len(),
                test_rows: test.len(),
                confusion: cm,
                metrics: m,
            })
        })
        .collect::<Result<_>>()?;
    let all: Vec<Metrics> = folds.iter().map(|f| f.metrics.clone()).collect();
    Ok(CvReport {
        features: selected.iter().map(|s| s.as_ref().to_owned()).collect(),
        mean: mean_metrics(&all),
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_cases() {
        let y = ["a", "b", "c", "a"];
        let cm = confusion(&y, &y).unwrap();
        assert_eq!(cm.counts, vec![vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert!(confusion(&y[..2], &y).is_err());
    }

    fn binary() -> ConfusionMatrix {
        // TP=8, FP=2, FN=1, TN=9 with classes [neg, pos]
        let mut pred = Vec::new();
        let mut truth = Vec::new();
        for (p, t, n) in [
            ("pos", "pos", 8),
            ("pos", "neg", 2),
            ("neg", "pos", 1),
            ("neg", "neg", 9),
        ] {
            for _ in 0..n {
                pred.push(p);
                truth.push(t);
            }
        }
        confusion(&pred, &truth).unwrap()
    }

    #[test]
    fn binary_metrics() {
        let cm = binary();
        assert_eq!(cm.classes, vec!["neg", "pos"]);
        assert_eq!(cm.counts, vec![vec![9, 2], vec![1, 8]]);
        let m = metrics(&cm).unwrap();
        let pos = &m.per_class[1];
        assert!((pos.precision - 0.8).abs() < 1e-4);
        assert!((pos.recall - 0.8889).abs() < 1e-4);
        assert!((pos.f1 - 0.8421).abs() < 1e-4);
        assert!((m.accuracy - 17.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_all_wrong() {
        let y = ["x", "y", "y"];
        let m = metrics(&confusion(&y, &y).unwrap()).unwrap();
        assert_eq!(
            (m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1),
            (1.0, 1.0, 1.0, 1.0)
        );
        let m = metrics(&confusion(&["b", "a"], &["a", "b"]).unwrap()).unwrap();
        assert_eq!(m.accuracy, 0.0);
        assert!(m
            .per_class
            .iter()
            .all(|c| c.precision == 0.0 && c.recall == 0.0 && c.f1 == 0.0));
        let empty = ConfusionMatrix {
            classes: vec!["a".into()],
            counts: vec![vec![0]],
        };
        assert!(metrics(&empty).is_err());
    }

    #[test]
    fn kfold_exact_division_and_determinism() {
        let y = Labels::from_strings(&["s"; 10]);
        let cfg = CvConfig { folds: 5, seed: 7 };
        let f = stratified_kfold(&y, cfg).unwrap();
        for k in 0..5 {
            assert_eq!(f.iter().filter(|&&x| x == k).count(), 2);
        }
        assert_eq!(f, stratified_kfold(&y, cfg).unwrap());
        let small = Labels::from_strings(&["a", "a", "b", "b", "b", "b", "b"]);
        match stratified_kfold(&small, cfg) {
            Err(Error::ClassTooSmall {
                class,
                count,
                folds,
            }) => {
                assert_eq!((class.as_str(), count, folds), ("a", 2, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(stratified_kfold(&y, CvConfig { folds: 1, seed: 0 }).is_err());
    }
}
