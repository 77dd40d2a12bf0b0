use proptest::prelude::*;
use rfsa::eval::{stratified_kfold, CvConfig};
use rfsa::info::{discretize, entropy, mutual_information, BinningSpec};
use rfsa::table::{read_csv, write_csv, Column, ColumnDef, ColumnKind, Labels, Schema, Table};
use rfsa::transform::{log1p_transform, sqrt_transform, standardize, Encoder};
use rfsa::tree::{train_tree, TreeConfig};

fn codes(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..k, n)
}

proptest! {
    #[test]
    fn mi_is_bounded_symmetric_and_label_free(
        (x, y) in (1usize..80).prop_flat_map(|n| (codes(n, 5), codes(n, 4))),
        shift in 1usize..5,
    ) {
        let mi = mutual_information(&x, &y).unwrap();
        let (hx, hy) = (entropy(&x).unwrap(), entropy(&y).unwrap());
        prop_assert!(mi >= 0.0);
        prop_assert!(mi <= hx.min(hy) + 1e-12);
        prop_assert!((mi - mutual_information(&y, &x).unwrap()).abs() <= 1e-12);
        let relabelled: Vec<usize> = x.iter().map(|&v| (v + shift) % 5 * 7).collect();
        prop_assert!((mi - mutual_information(&relabelled, &y).unwrap()).abs() <= 1e-12);
        prop_assert!((mutual_information(&x, &x).unwrap() - hx).abs() <= 1e-12);
    }

    #[test]
    fn quantile_codes_survive_monotone_maps(x in prop::collection::vec(0.0f64..1e6, 1..200), bins in 1usize..32) {
        let spec = BinningSpec { bins, ..BinningSpec::default() };
        let base = discretize(&x, spec);
        prop_assert_eq!(&base, &discretize(&log1p_transform(&x).unwrap(), spec));
        prop_assert_eq!(&base, &discretize(&sqrt_transform(&x).unwrap(), spec));
    }

    #[test]
    fn standardized_moments(x in prop::collection::vec(-1e3f64..1e3, 2..100)) {
        prop_assume!(x.iter().any(|&v| (v - x[0]).abs() > 1e-6));
        let z = standardize(&x).unwrap();
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prop_assert!(mean.abs() < 1e-9);
        prop_assert!((var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn encoding_round_trips(values in prop::collection::vec("[a-e]{1,3}", 0..50)) {
        let enc = Encoder::fit("c", &values);
        let codes = enc.encode(&values).unwrap();
        prop_assert_eq!(enc.decode(&codes).unwrap(), values.clone());
        let mut cats = values.clone();
        cats.sort();
        cats.dedup();
        prop_assert_eq!(enc.categories(), cats.iter().map(String::as_str).collect::<Vec<_>>());
    }

    #[test]
    fn csv_round_trips(
        rows in prop::collection::vec((any::<f64>().prop_filter("finite", |v| v.is_finite()), "[A-Za-z][A-Za-z0-9 ]{0,5}[A-Za-z]"), 0..30),
        header in any::<bool>(),
    ) {
        let schema = Schema::new(
            vec![ColumnDef::new("v", ColumnKind::Numeric), ColumnDef::new("s", ColumnKind::Categorical)],
            Some("s".into()),
        ).unwrap();
        let t = Table::new(schema.clone(), vec![
            Column::Numeric(rows.iter().map(|r| r.0).collect()),
            Column::Categorical(rows.iter().map(|r| r.1.clone()).collect()),
        ]).unwrap();
        let mut buf = Vec::new();
        write_csv(&t, &mut buf, header).unwrap();
        prop_assert_eq!(read_csv(buf.as_slice(), &schema, header).unwrap(), t);
    }

    #[test]
    fn folds_partition_rows_evenly(
        counts in prop::collection::vec(5usize..40, 1..4),
        folds in 2usize..6,
        seed in any::<u64>(),
    ) {
        let names: Vec<String> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(format!("k{c}"), n))
            .collect();
        let y = Labels::from_strings(&names);
        let fold_of = stratified_kfold(&y, CvConfig { folds, seed }).unwrap();
        prop_assert_eq!(fold_of.len(), names.len());
        prop_assert!(fold_of.iter().all(|&f| f < folds));
        for c in 0..y.class_count() {
            let per: Vec<usize> = (0..folds)
                .map(|f| (0..y.len()).filter(|&r| y.codes()[r] == c && fold_of[r] == f).count())
                .collect();
            let (lo, hi) = (per.iter().min().unwrap(), per.iter().max().unwrap());
            prop_assert!(hi - lo <= 1, "class {c}: {per:?}");
        }
        prop_assert_eq!(&fold_of, &stratified_kfold(&y, CvConfig { folds, seed }).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn importances_conserve_impurity_reduction(
        (cols, y) in (10usize..80, 1usize..5).prop_flat_map(|(n, f)| (
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, n), f),
            codes(n, 3),
        )),
        depth in 1usize..6,
        min_leaf in 1usize..4,
    ) {
        let schema = Schema::new(
            (0..cols.len()).map(|i| ColumnDef::new(format!("f{i}"), ColumnKind::Numeric)).collect(),
            None,
        ).unwrap();
        let t = Table::new(schema, cols.into_iter().map(Column::Numeric).collect()).unwrap();
        let names: Vec<String> = y.iter().map(|c| c.to_string()).collect();
        let tree = train_tree(&t, &Labels::from_strings(&names), TreeConfig { max_depth: depth, min_leaf }).unwrap();
        let total: f64 = tree.importances().iter().map(|(_, v)| v).sum();
        prop_assert!((total - tree.total_impurity_reduction()).abs() <= 1e-9);
    }
}
