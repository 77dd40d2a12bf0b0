//! Library results checked against brute-force re-computations.

use std::collections::{HashMap, HashSet};

use proptest::prelude::*;
use rfsa::eval::{confusion, metrics};
use rfsa::gini::{best_split, gini_decrease, FeatureValues, SplitRule};
use rfsa::info::{discretize, BinStrategy, BinningSpec};
use rfsa::stats::pearson;
use rfsa::table::{deduplicate, Column, ColumnDef, ColumnKind, Labels, Schema, Table};
use rfsa::transform::{fit_yeo_johnson, skewness, yeo_johnson_log_likelihood};
use rfsa::tree::{train_tree, NodeKind, TreeConfig};

fn gini_of(labels: &[usize]) -> f64 {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let n = labels.len() as f64;
    1.0 - counts
        .values()
        .map(|&c| (c as f64 / n).powi(2))
        .sum::<f64>()
}

fn brute_decrease(labels: &[usize], parts: &[Vec<usize>]) -> f64 {
    let n = labels.len() as f64;
    let children: f64 = parts
        .iter()
        .filter(|p| !p.is_empty())
        .map(|p| {
            let sub: Vec<usize> = p.iter().map(|&r| labels[r]).collect();
            sub.len() as f64 / n * gini_of(&sub)
        })
        .sum();
    gini_of(labels) - children
}

fn labels_and_parts() -> impl Strategy<Value = (Vec<usize>, Vec<Vec<usize>>)> {
    (1usize..30).prop_flat_map(|n| {
        (
            prop::collection::vec(0usize..4, n),
            prop::collection::vec(0usize..4, n),
        )
            .prop_map(|(labels, assign)| {
                let mut parts = vec![Vec::new(); 4];
                for (r, &a) in assign.iter().enumerate() {
                    parts[a].push(r);
                }
                parts.retain(|p| !p.is_empty());
                (labels, parts)
            })
    })
}

/// Small-integer values so that ties are common.
fn numeric_feature(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0i32..6).prop_map(f64::from), n)
}

fn exhaustive_numeric(values: &[f64], labels: &[usize]) -> Option<(f64, f64)> {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut best: Option<(f64, f64)> = None;
    for w in distinct.windows(2) {
        let t = w[0] + (w[1] - w[0]) / 2.0;
        let (left, right): (Vec<usize>, Vec<usize>) =
            (0..values.len()).partition(|&r| values[r] <= t);
        let d = gini_decrease(labels, &[left, right]).unwrap();
        if best.is_none_or(|(_, bd)| d > bd) {
            best = Some((t, d));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gini_decrease_matches_weighted_formula((labels, parts) in labels_and_parts()) {
        let got = gini_decrease(&labels, &parts).unwrap();
        prop_assert!((got - brute_decrease(&labels, &parts)).abs() <= 1e-12);
    }

    #[test]
    fn numeric_best_split_matches_enumeration(
        (values, labels) in (2usize..20).prop_flat_map(|n| (numeric_feature(n), prop::collection::vec(0usize..3, n)))
    ) {
        let got = best_split(FeatureValues::Numeric(&values), &labels).unwrap();
        match exhaustive_numeric(&values, &labels) {
            None => prop_assert_eq!(got.rule, None),
            Some((t, d)) => {
                prop_assert_eq!(got.rule, Some(SplitRule::Threshold(t)));
                prop_assert_eq!(got.decrease, d);
            }
        }
    }

    #[test]
    fn categorical_best_split_matches_enumeration(
        (codes, labels) in (2usize..20).prop_flat_map(|n| (prop::collection::vec(0usize..4, n), prop::collection::vec(0usize..3, n)))
    ) {
        let got = best_split(FeatureValues::Categorical(&codes), &labels).unwrap();
        let present: Vec<usize> = {
            let mut c = codes.clone();
            c.sort();
            c.dedup();
            c
        };
        let mut best: Option<(usize, f64)> = None;
        if present.len() >= 2 {
            for &cat in &present {
                let (inside, rest): (Vec<usize>, Vec<usize>) = (0..codes.len()).partition(|&r| codes[r] == cat);
                let d = gini_decrease(&labels, &[inside, rest]).unwrap();
                if best.is_none_or(|(_, bd)| d > bd) {
                    best = Some((cat, d));
                }
            }
        }
        match best {
            None => prop_assert_eq!(got.rule, None),
            Some((c, d)) => {
                prop_assert_eq!(got.rule, Some(SplitRule::Category(c)));
                prop_assert_eq!(got.decrease, d);
            }
        }
    }

    #[test]
    fn confusion_and_metrics_match_recount(
        pairs in prop::collection::vec((0usize..4, 0usize..4), 1..60)
    ) {
        const NAMES: [&str; 4] = ["a", "b", "c", "d"];
        let pred: Vec<&str> = pairs.iter().map(|&(p, _)| NAMES[p]).collect();
        let truth: Vec<&str> = pairs.iter().map(|&(_, t)| NAMES[t]).collect();
        let cm = confusion(&pred, &truth).unwrap();
        let mut classes: Vec<&str> = pred.iter().chain(&truth).copied().collect();
        classes.sort();
        classes.dedup();
        prop_assert_eq!(&cm.classes, &classes);
        for (i, ci) in classes.iter().enumerate() {
            for (j, cj) in classes.iter().enumerate() {
                let n = pred.iter().zip(&truth).filter(|(p, t)| *t == ci && *p == cj).count();
                prop_assert_eq!(cm.counts[i][j], n);
            }
        }
        let m = metrics(&cm).unwrap();
        let hits = pred.iter().zip(&truth).filter(|(p, t)| p == t).count();
        prop_assert_eq!(m.accuracy, hits as f64 / pred.len() as f64);
        for (c, pc) in classes.iter().zip(&m.per_class) {
            let tp = pred.iter().zip(&truth).filter(|(p, t)| *p == c && *t == c).count();
            let predicted = pred.iter().filter(|p| *p == c).count();
            let actual = truth.iter().filter(|t| *t == c).count();
            let precision = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
            let recall = if actual == 0 { 0.0 } else { tp as f64 / actual as f64 };
            prop_assert_eq!(pc.precision, precision);
            prop_assert_eq!(pc.recall, recall);
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            prop_assert_eq!(pc.f1, f1);
        }
        // micro-averaged recall is accuracy
        let micro = (0..classes.len()).map(|i| cm.counts[i][i]).sum::<usize>() as f64
            / cm.counts.iter().flatten().sum::<usize>() as f64;
        prop_assert_eq!(micro, m.accuracy);
    }

    #[test]
    fn dedup_matches_first_occurrence_set(
        rows in prop::collection::vec((prop::sample::select(vec![-0.0, 0.0, 1.5, 2.0]), prop::sample::select(vec!["x", "y", "X"])), 0..40)
    ) {
        let schema = Schema::new(
            vec![ColumnDef::new("v", ColumnKind::Numeric), ColumnDef::new("c", ColumnKind::Categorical)],
            None,
        ).unwrap();
        let t = Table::new(schema, vec![
            Column::Numeric(rows.iter().map(|r| r.0).collect()),
            Column::Categorical(rows.iter().map(|r| r.1.to_owned()).collect()),
        ]).unwrap();
        let mut seen = HashSet::new();
        let mut keep = Vec::new();
        for (i, (v, c)) in rows.iter().enumerate() {
            // -0 and 0 are the same value
            if seen.insert(((v + 0.0).to_bits(), *c)) {
                keep.push(i);
            }
        }
        let (d, removed) = deduplicate(&t);
        prop_assert_eq!(removed, rows.len() - keep.len());
        prop_assert_eq!(d, t.take_rows(&keep));
    }

    #[test]
    fn skewness_matches_reference(x in prop::collection::vec(-100.0f64..100.0, 3..60)) {
        prop_assume!(x.iter().any(|&v| v != x[0]));
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let (mut m2, mut m3) = (0.0, 0.0);
        for &v in &x {
            let d = v - mean;
            m2 += d * d / n;
            m3 += d * d * d / n;
        }
        let want = m3 / m2.powf(1.5);
        let got = skewness(&x).unwrap();
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn pearson_matches_reference(
        xy in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..60)
    ) {
        let x: Vec<f64> = xy.iter().map(|p| p.0).collect();
        let y: Vec<f64> = xy.iter().map(|p| p.1).collect();
        prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
        let n = x.len() as f64;
        let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        let want = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
        let got = pearson(&x, &y).unwrap();
        prop_assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
    }

    #[test]
    fn quantile_bins_are_balanced(n in 1usize..300, bins in 1usize..20, seed in any::<u64>()) {
        // distinct values in scrambled order
        let x: Vec<f64> = (0..n).map(|i| ((i as u64).wrapping_mul(2654435761) ^ seed) as f64 + i as f64 / n as f64).collect();
        let mut sorted = x.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        prop_assume!(sorted.len() == n);
        let codes = discretize(&x, BinningSpec { bins, strategy: BinStrategy::Quantile });
        let k = codes.iter().max().unwrap() + 1;
        prop_assert_eq!(k, bins.min(n));
        let ideal = n as f64 / k as f64;
        for c in 0..k {
            let count = codes.iter().filter(|&&v| v == c).count() as f64;
            prop_assert!((count - ideal).abs() <= 1.0, "bin {c}: {count} vs {ideal}");
        }
    }

    #[test]
    fn yeo_johnson_beats_fine_grid(x in prop::collection::vec(-10.0f64..100.0, 5..40)) {
        prop_assume!(x.iter().any(|&v| v != x[0]));
        let lambda = fit_yeo_johnson(&x).unwrap();
        let at = yeo_johnson_log_likelihood(&x, lambda);
        for i in 0..=1000 {
            let l = -5.0 + i as f64 * 0.01;
            prop_assert!(at >= yeo_johnson_log_likelihood(&x, l) - 1e-6, "lambda {lambda} loses to {l}");
        }
    }
}

fn feature_table(cols: &[Vec<f64>]) -> Table {
    let schema = Schema::new(
        (0..cols.len())
            .map(|i| ColumnDef::new(format!("f{i}"), ColumnKind::Numeric))
            .collect(),
        None,
    )
    .unwrap();
    Table::new(schema, cols.iter().cloned().map(Column::Numeric).collect()).unwrap()
}

fn tree_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
    (4usize..20, 1usize..4).prop_flat_map(|(n, f)| {
        (
            prop::collection::vec(numeric_feature(n), f),
            prop::collection::vec(0usize..3, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn root_split_is_the_exhaustive_best((cols, y) in tree_case(), depth in 1usize..3) {
        let names: Vec<String> = y.iter().map(|c| format!("c{c}")).collect();
        let target = Labels::from_strings(&names);
        let tree = train_tree(&feature_table(&cols), &target, TreeConfig { max_depth: depth, min_leaf: 1 }).unwrap();
        let mut best: Option<(usize, f64, f64)> = None;
        for (f, col) in cols.iter().enumerate() {
            if let Some((t, d)) = exhaustive_numeric(col, target.codes()) {
                if best.is_none_or(|(_, _, bd)| d > bd) {
                    best = Some((f, t, d));
                }
            }
        }
        match (&tree.nodes[0].kind, best) {
            (NodeKind::Split { feature, rule, .. }, Some((f, t, d))) => {
                prop_assert!(d > 0.0);
                prop_assert_eq!(feature, &format!("f{f}"));
                prop_assert_eq!(rule, &rfsa::tree::Rule::Threshold(t));
            }
            (NodeKind::Leaf { .. }, best) => prop_assert!(best.is_none_or(|(_, _, d)| d <= 0.0)),
            (split, None) => prop_assert!(false, "unexpected split {split:?}"),
        }
    }

    #[test]
    fn importance_matches_independent_walk((cols, y) in tree_case()) {
        let names: Vec<String> = y.iter().map(|c| format!("c{c}")).collect();
        let target = Labels::from_strings(&names);
        let tree = train_tree(&feature_table(&cols), &target, TreeConfig { max_depth: 3, min_leaf: 1 }).unwrap();
        let gini = |counts: &[usize]| {
            let n: usize = counts.iter().sum();
            1.0 - counts.iter().map(|&c| (c as f64 / n as f64).powi(2)).sum::<f64>()
        };
        let root = tree.nodes[0].samples as f64;
        let mut want: HashMap<&str, f64> = HashMap::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &tree.nodes[i];
            if let NodeKind::Split { feature, left, right, .. } = &node.kind {
                let (l, r) = (&tree.nodes[*left], &tree.nodes[*right]);
                let n = node.samples as f64;
                let d = gini(&node.class_counts)
                    - l.samples as f64 / n * gini(&l.class_counts)
                    - r.samples as f64 / n * gini(&r.class_counts);
                *want.entry(feature.as_str()).or_default() += n / root * d;
                stack.extend([*left, *right]);
            }
        }
        for (f, v) in tree.importances() {
            let w = want.get(f.as_str()).copied().unwrap_or(0.0);
            prop_assert!((v - w).abs() <= 1e-12, "{f}: {v} vs {w}");
        }
    }

    #[test]
    fn tree_ignores_row_order((cols, y) in tree_case(), seed in any::<u64>()) {
        let names: Vec<String> = y.iter().map(|c| format!("c{c}")).collect();
        let n = y.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by_key(|&i| (i as u64).wrapping_mul(0x9E3779B97F4A7C15) ^ seed);
        let t = feature_table(&cols);
        let cfg = TreeConfig { max_depth: 3, min_leaf: 1 };
        let a = train_tree(&t, &Labels::from_strings(&names), cfg).unwrap();
        let permuted_names: Vec<&String> = perm.iter().map(|&i| &names[i]).collect();
        let b = train_tree(&t.take_rows(&perm), &Labels::from_strings(&permuted_names), cfg).unwrap();
        prop_assert_eq!(a.predict(&t).unwrap(), b.predict(&t).unwrap());
    }
}

#[test]
fn two_by_two_mutual_information() {
    // joint [[0.4, 0.1], [0.1, 0.4]]
    let x = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
    let y = [0, 0, 0, 0, 1, 0, 1, 1, 1, 1];
    let mi = rfsa::info::mutual_information(&x, &y).unwrap();
    assert!((mi - 0.192745).abs() < 1e-5, "{mi}");
}
