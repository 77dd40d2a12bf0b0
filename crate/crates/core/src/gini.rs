//! Gini impurity, impurity decrease of a partition, and best single splits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::compress_codes;

/// `1 - sum p_c^2` from class counts.
pub fn impurity_of_counts(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

/// Weighted decrease `GI(parent) - sum_v |D_v|/|D| GI(D_v)` from counts.
///
/// Every split evaluation in the crate goes through this function so that
/// equal partitions produce bit-identical decreases.
pub fn decrease_of_counts(parent: &[usize], parts: &[&[usize]]) -> f64 {
    let total: usize = parent.iter().sum();
    let n = total as f64;
    let mut child = 0.0;
    for part in parts {
        let size: usize = part.iter().sum();
        if size > 0 {
            child += size as f64 / n * impurity_of_counts(part, size);
        }
    }
    impurity_of_counts(parent, total) - child
}

fn class_counts(labels: &[usize], k: usize) -> Vec<usize> {
    let mut c = vec![0; k];
    for &l in labels {
        c[l] += 1;
    }
    c
}

pub fn gini_impurity(labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    let (dense, k) = compress_codes(labels);
    Ok(impurity_of_counts(&class_counts(&dense, k), labels.len()))
}

fn check_partition(n: usize, parts: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; n];
    for part in parts {
        for &r in part {
            if r >= n {
                return Err(Error::Partition(format!("row {r} out of range")));
            }
            if seen[r] {
                return Err(Error::Partition(format!("row {r} appears twice")));
            }
            seen[r] = true;
        }
    }
    if let Some(r) = seen.iter().position(|s| !s) {
        return Err(Error::Partition(format!("row {r} is not covered")));
    }
    Ok(())
}

fn part_counts(labels: &[usize], parts: &[Vec<usize>]) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    if labels.is_empty() {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    check_partition(labels.len(), parts)?;
    let (dense, k) = compress_codes(labels);
    let parent = class_counts(&dense, k);
    let children = parts
        .iter()
        .map(|p| {
            let mut c = vec![0; k];
            for &r in p {
                c[dense[r]] += 1;
            }
            c
        })
        .collect();
    Ok((parent, children))
}

/// Impurity decrease of splitting `labels` into `parts` (row-index lists
/// that must cover every row exactly once).
pub fn gini_decrease(labels: &[usize], parts: &[Vec<usize>]) -> Result<f64> {
    let (parent, children) = part_counts(labels, parts)?;
    let refs: Vec<&[usize]> = children.iter().map(Vec::as_slice).collect();
    Ok(decrease_of_counts(&parent, &refs))
}

/// The unnormalized form `GI(D) - sum_v |D_v| GI(D_v)`, kept for
/// side-by-side comparison only. It is not bounded by `GI(D)` and is
/// usually negative.
pub fn gini_decrease_literal(labels: &[usize], parts: &[Vec<usize>]) -> Result<f64> {
    let (parent, children) = part_counts(labels, parts)?;
    let total: usize = parent.iter().sum();
    let child: f64 = children
        .iter()
        .map(|c| {
            let size: usize = c.iter().sum();
            size as f64 * impurity_of_counts(c, size)
        })
        .sum();
    Ok(impurity_of_counts(&parent, total) - child)
}

/// A feature column as seen by the split search.
#[derive(Clone, Copy, Debug)]
pub enum FeatureValues<'a> {
    Numeric(&'a [f64]),
    /// Category codes; lower codes must sort first lexicographically for the
    /// tie rule to hold (as produced by [`crate::transform::Encoder`]).
    Categorical(&'a [usize]),
}

impl FeatureValues<'_> {
    pub fn len(&self) -> usize {
        match self {
            FeatureValues::Numeric(v) => v.len(),
            FeatureValues::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Rows with value `<= threshold` (numeric) or equal to `category`
/// (categorical) go left.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    Threshold(f64),
    Category(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitResult {
    /// `None` when the feature is constant over the rows (or no split
    /// satisfies the leaf-size bound).
    pub rule: Option<SplitRule>,
    pub decrease: f64,
}

/// Best single split of `labels` (dense codes `< n_classes`) on a feature.
///
/// Numeric thresholds are midpoints between consecutive distinct sorted
/// values; categorical splits are one category against the rest. Ties go to
/// the smallest threshold or category code.
pub fn best_split(feature: FeatureValues<'_>, labels: &[usize]) -> Result<SplitResult> {
    if feature.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: feature.len(),
            right: labels.len(),
        });
    }
    if labels.len() < 2 {
        return Err(Error::TooFewValues {
            needed: 2,
            got: labels.len(),
        });
    }
    let (dense, k) = compress_codes(labels);
    let rows: Vec<usize> = (0..labels.len()).collect();
    Ok(best_split_rows(feature, &dense, k, &rows, 1))
}

/// Split search restricted to `rows`, requiring at least `min_leaf` rows on
/// each side.
pub(crate) fn best_split_rows(
    feature: FeatureValues<'_>,
    labels: &[usize],
    n_classes: usize,
    rows: &[usize],
    min_leaf: usize,
) -> SplitResult {
    let none = SplitResult {
        rule: None,
        decrease: 0.0,
    };
    let n = rows.len();
    let min_leaf = min_leaf.max(1);
    if n < 2 * min_leaf {
        return none;
    }
    let mut parent = vec![0; n_classes];
    for &r in rows {
        parent[labels[r]] += 1;
    }
    let mut best: Option<(SplitRule, f64)> = None;
    match feature {
        FeatureValues::Numeric(values) => {
            let mut order = rows.to_vec();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let mut left = vec![0; n_classes];
            let mut right = parent.clone();
            for i in 0..n - 1 {
                let l = labels[order[i]];
                left[l] += 1;
                right[l] -= 1;
                let (a, b) = (values[order[i]], values[order[i + 1]]);
                if a == b || i + 1 < min_leaf || n - i - 1 < min_leaf {
                    continue;
                }
                let d = decrease_of_counts(&parent, &[&left, &right]);
                if best.is_none_or(|(_, bd)| d > bd) {
                    let mid = a + (b - a) / 2.0;
                    // adjacent floats: the midpoint may round up onto `b`
                    let t = if mid < b { mid } else { a };
                    best = Some((SplitRule::Threshold(t), d));
                }
            }
        }
        FeatureValues::Categorical(codes) => {
            let k = rows.iter().map(|&r| codes[r]).max().map_or(0, |m| m + 1);
            let mut per_cat = vec![vec![0; n_classes]; k];
            let mut sizes = vec![0; k];
            for &r in rows {
                per_cat[codes[r]][labels[r]] += 1;
                sizes[codes[r]] += 1;
            }
            if sizes.iter().filter(|&&s| s > 0).count() < 2 {
                return none;
            }
            for (cat, inside) in per_cat.iter().enumerate() {
                let size = sizes[cat];
                if size == 0 || size < min_leaf || n - size < min_leaf {
                    continue;
                }
                let rest: Vec<usize> = parent.iter().zip(inside).map(|(p, i)| p - i).collect();
                let d = decrease_of_counts(&parent, &[inside, &rest]);
                if best.is_none_or(|(_, bd)| d > bd) {
                    best = Some((SplitRule::Category(cat), d));
                }
            }
        }
    }
    match best {
        Some((rule, decrease)) => SplitResult {
            rule: Some(rule),
            decrease,
        },
        None => none,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impurity_canonical_cases() {
        assert_eq!(gini_impurity(&[2, 2, 2]).unwrap(), 0.0);
        assert_eq!(gini_impurity(&[0, 1, 0, 1]).unwrap(), 0.5);
        assert!((gini_impurity(&[0, 1, 2]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(gini_impurity(&[]).is_err());
    }

    #[test]
    fn decrease_cases() {
        let labels = [0, 0, 1, 1];
        let d = gini_decrease(&labels, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(d, 0.5);
        let d = gini_decrease(&labels, &[vec![0, 2], vec![1, 3]]).unwrap();
        assert!(d.abs() < 1e-15);
        let lit = gini_decrease_literal(&labels, &[vec![0, 2], vec![1, 3]]).unwrap();
        assert_eq!(lit, 0.5 - 2.0 * 0.5 - 2.0 * 0.5);
        assert!(gini_decrease(&labels, &[vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(gini_decrease(&labels, &[vec![0, 1], vec![2]]).is_err());
        assert!(gini_decrease(&labels, &[vec![0, 1, 2, 9]]).is_err());
    }

    #[test]
    fn split_cases() {
        let s = best_split(FeatureValues::Numeric(&[1.0, 2.0, 3.0, 4.0]), &[0, 0, 1, 1]).unwrap();
        assert_eq!(s.rule, Some(SplitRule::Threshold(2.5)));
        assert_eq!(s.decrease, 0.5);
        let s = best_split(FeatureValues::Numeric(&[3.0; 4]), &[0, 0, 1, 1]).unwrap();
        assert_eq!(
            s,
            SplitResult {
                rule: None,
                decrease: 0.0
            }
        );
        let s = best_split(FeatureValues::Categorical(&[2, 0, 1, 2]), &[1, 0, 0, 1]).unwrap();
        assert_eq!(s.rule, Some(SplitRule::Category(2)));
        assert_eq!(s.decrease, 0.5);
        let s = best_split(FeatureValues::Categorical(&[1, 1, 1]), &[1, 0, 0]).unwrap();
        assert_eq!(s.rule, None);
        assert!(best_split(FeatureValues::Numeric(&[1.0]), &[0]).is_err());
    }

    #[test]
    fn ties_take_smallest_threshold() {
        // both cuts isolate one mismatched row with equal decrease
        let s = best_split(FeatureValues::Numeric(&[1.0, 2.0, 3.0]), &[0, 1, 0]).unwrap();
        assert_eq!(s.rule, Some(SplitRule::Threshold(1.5)));
        let s = best_split(FeatureValues::Categorical(&[0, 1, 2]), &[0, 1, 2]).unwrap();
        assert_eq!(s.rule, Some(SplitRule::Category(0)));
    }
}
